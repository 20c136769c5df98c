"""
Per-iteration traces, stopping rules and the trace CSV format
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from altlin.errors import DivergenceError
from altlin.solvers.config import DIVERGENCE_LIMIT, SolverConfig
from altlin.utils import ExecutionTracker, format_real

logger = logging.getLogger(__name__)

TRACE_HEADER = ["iter", "obj", "infeas", "skipped", "t_k", "elapsed_ms"]

STOP_MAX_ITER = "max_iter"
STOP_INFEASIBILITY = "infeasibility"
STOP_OBJECTIVE_TARGET = "objective_target"
STOP_DIVERGED = "diverged"
STOP_FAILED = "failed"


@dataclass
class IterateRecord:
    """One iteration: ``obj`` is F at the reported iterate (y^k, or x^k for prox-gradient methods)"""

    k: int
    obj: float
    infeas: Optional[float] = None
    skipped: bool = False
    t_k: Optional[float] = None
    elapsed: float = 0.0
    mu: float = float("nan")
    obj_x: Optional[float] = None


@dataclass
class RunTrace:
    solver_name: str
    records: List[IterateRecord] = field(default_factory=list)
    final_x: Optional[np.ndarray] = None
    final_y: Optional[np.ndarray] = None
    initial_obj: Optional[float] = None
    grad_evals: int = 0
    prox_evals: int = 0
    stop_reason: str = ""
    iterates: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def skip_count(self) -> int:
        return sum(1 for r in self.records if r.skipped)

    @property
    def final_obj(self) -> Optional[float]:
        return self.records[-1].obj if self.records else None

    def objectives(self) -> np.ndarray:
        return np.array([r.obj for r in self.records])

    def skip_flags(self) -> List[bool]:
        return [r.skipped for r in self.records]

    def regular_counts(self) -> np.ndarray:
        """Number of non-skipped iterations among records 1..k, for each k"""
        return np.cumsum([0 if r.skipped else 1 for r in self.records])

    def iterations_to_target(self, target: float) -> Optional[int]:
        for r in self.records:
            if r.obj <= target:
                return r.k
        return None

    def record_at(self, k: int) -> Optional[IterateRecord]:
        if 1 <= k <= len(self.records) and self.records[k - 1].k == k:
            return self.records[k - 1]
        for r in self.records:
            if r.k == k:
                return r
        return None


def relative_gap(x: np.ndarray, y: np.ndarray) -> float:
    """``||x - y|| / max(1, ||y||)``"""
    return float(np.linalg.norm(x - y) / max(1.0, np.linalg.norm(y)))


class TraceRecorder:
    """Accumulate records for one run and decide when it stops"""

    def __init__(self, solver_name: str, config: SolverConfig, initial_obj: Optional[float] = None):
        self.config = config
        self.trace = RunTrace(solver_name=solver_name, initial_obj=initial_obj)
        self.tracker = ExecutionTracker()
        logger.info("%s: starting (max_iter=%d)", solver_name, config.max_iter)

    def count(self, grad: int = 0, prox: int = 0):
        self.trace.grad_evals += grad
        self.trace.prox_evals += prox

    def record(
        self,
        k: int,
        obj: float,
        mu: float,
        infeas: Optional[float] = None,
        skipped: bool = False,
        t_k: Optional[float] = None,
        obj_x: Optional[float] = None,
        x: Optional[np.ndarray] = None,
        y: Optional[np.ndarray] = None,
    ) -> bool:
        """
        Append the record for iteration ``k``.

        Returns:
            True when a stopping rule (other than the iteration cap) fires

        Raises:
            DivergenceError: if ``obj`` is non-finite or exceeds the divergence limit
        """
        rec = IterateRecord(
            k=k,
            obj=float(obj),
            infeas=None if infeas is None else float(infeas),
            skipped=bool(skipped),
            t_k=t_k,
            elapsed=self.tracker.get_duration(),
            mu=mu,
            obj_x=obj_x,
        )
        self.trace.records.append(rec)
        if self.config.record_iterates and x is not None and y is not None:
            self.trace.iterates.append((np.array(x, copy=True), np.array(y, copy=True)))

        logger.debug("%s k=%d obj=%.12g infeas=%s skipped=%s", self.trace.solver_name, k, rec.obj, rec.infeas, rec.skipped)

        if not math.isfinite(rec.obj) or rec.obj > DIVERGENCE_LIMIT:
            self.finish(x, y, STOP_DIVERGED)
            logger.warning("%s diverged at iteration %d (obj=%r)", self.trace.solver_name, k, rec.obj)
            raise DivergenceError(f"{self.trace.solver_name} diverged at iteration {k}", trace=self.trace)

        if self.config.infeas_tol > 0 and rec.infeas is not None and rec.infeas < self.config.infeas_tol:
            self.trace.stop_reason = STOP_INFEASIBILITY
            return True
        if self.config.obj_target is not None and rec.obj <= self.config.obj_target:
            self.trace.stop_reason = STOP_OBJECTIVE_TARGET
            return True
        return False

    def finish(self, x: Optional[np.ndarray], y: Optional[np.ndarray], reason: Optional[str] = None) -> RunTrace:
        self.tracker.finish()
        self.trace.final_x = None if x is None else np.array(x, copy=True)
        self.trace.final_y = None if y is None else np.array(y, copy=True)
        if reason is not None:
            self.trace.stop_reason = reason
        elif not self.trace.stop_reason:
            self.trace.stop_reason = STOP_MAX_ITER
        logger.info(
            "%s: %d iterations, %d skips, stop=%s, %.1f ms",
            self.trace.solver_name,
            len(self.trace.records),
            self.trace.skip_count,
            self.trace.stop_reason,
            self.tracker.get_duration_ms(),
        )
        return self.trace


def trace_rows(trace: RunTrace, include_timing: bool = True) -> List[List[str]]:
    rows = []
    for r in trace.records:
        rows.append([
            str(r.k),
            format_real(r.obj),
            format_real(r.infeas),
            "1" if r.skipped else "0",
            format_real(r.t_k),
            format_real(r.elapsed * 1000.0) if include_timing else "",
        ])
    return rows


def write_trace_csv(trace: RunTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        writer.writerows(trace_rows(trace))
    return path


def read_trace_csv(path: Union[str, Path]) -> List[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
