"""
Experiment runner: build the instance, run every configured solver, write
per-solver trace CSVs, the checkpoint summary and a manifest.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from altlin import __version__
from altlin.core.linalg import IndexMask
from altlin.core.matrix_io import read_mask, read_matrix, write_mask, write_matrix
from altlin.errors import AltlinError, DivergenceError, NumericFailureError
from altlin.objective import SplitObjective
from altlin.oracle import BoundConstants, BoundReport, check_bound, reference_optimum
from altlin.problems.completion import CompletionSpec, generate_completion
from altlin.problems.deblur import DeblurInstance, deblur_handles, random_deblur
from altlin.problems.lasso import LassoInstance, lasso_handles, random_lasso
from altlin.problems.rpca import RpcaInstance, default_mu0, random_rpca, relative_errors, run_rpca
from altlin.bench.config import ExperimentConfig, ProblemSpec, SolverSpec
from altlin.solvers import NEEDS_SMOOTH_G, SOLVERS
from altlin.solvers.trace import STOP_FAILED, RunTrace, write_trace_csv
from altlin.utils import ExecutionTracker, SummaryWriter, format_real, save_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_DIVERGED = 2
EXIT_BOUND_VIOLATED = 3
EXIT_SOLVER_FAILED = 4

ORACLE_TOL = 1e-12

# solver method -> complexity bound it is checked against
BOUND_FOR_METHOD = {
    "alm": "alm",
    "alm_s": "alm_s",
    "alm_s_equiv": "alm_s",
    "falm": "falm",
    "falm_s": "falm_s",
    "ista": "ista",
    "fista": "fista",
}


@dataclass
class ProblemSetup:
    """A built instance plus everything the solvers and reports need"""

    kind: str
    objectives: Dict[bool, SplitObjective] = field(default_factory=dict)
    rpca: Optional[RpcaInstance] = None
    truth_A: Optional[np.ndarray] = None
    truth_E: Optional[np.ndarray] = None
    mu0_norm: str = "spectral"
    matrices: Dict[str, np.ndarray] = field(default_factory=dict)
    mask: Optional[IndexMask] = None
    description: Dict[str, object] = field(default_factory=dict)

    def objective(self, smooth_g: bool) -> SplitObjective:
        return self.objectives[smooth_g]


@dataclass
class SolverOutcome:
    spec: SolverSpec
    trace: RunTrace
    wall_ms: float
    diverged: bool = False
    errors: Optional[Dict[str, float]] = None
    bound: Optional[BoundReport] = None
    failure: Optional[str] = None


def build_problem(problem: ProblemSpec) -> ProblemSetup:
    """Generate (or load) the instance described by ``[problem]``"""
    p = problem.params
    kind = problem.kind
    setup = ProblemSetup(kind=kind)

    if kind == "lasso":
        if p.get("a") is not None:
            A = read_matrix(problem.resolve("a"))
            b = read_matrix(problem.resolve("b")).ravel()
            inst = LassoInstance(A=A, b=b, rho=p["rho"])
        else:
            inst = random_lasso(p["m"], p["n"], p["rho"], p["seed"])
        setup.objectives = {False: lasso_handles(inst), True: lasso_handles(inst, smoothed_g=p["sigma"])}
        setup.matrices = {"A": inst.A, "b": inst.b.reshape(-1, 1)}
        if inst.x_true is not None:
            setup.matrices["x_true"] = inst.x_true.reshape(-1, 1)
        setup.description = {"m": inst.A.shape[0], "n": inst.n, "lipschitz": inst.lipschitz}

    elif kind == "deblur":
        if p.get("b") is not None:
            inst = DeblurInstance(b=read_matrix(problem.resolve("b")), kernel_size=p["kernel_size"], wavelet_levels=p["levels"], rho=p["rho"])
        else:
            size = p["size"]
            inst = random_deblur((size, size), p["kernel_size"], p["levels"], p["rho"], p["noise"], p["seed"])
        setup.objectives = {False: deblur_handles(inst), True: deblur_handles(inst, smoothed_g=p["sigma"])}
        setup.matrices = {"b": inst.b}
        if inst.image is not None:
            setup.matrices["image"] = inst.image
        setup.description = {"shape": list(inst.shape)}

    elif kind == "rpca":
        if p.get("m_file") is not None:
            M = read_matrix(problem.resolve("m_file"))
            mask = read_mask(problem.resolve("mask_file")) if p.get("mask_file") else None
            rho = p["rho"] or RpcaInstance.default_rho(M.shape)
            inst = RpcaInstance.observed(M, mask, rho, p["sigma"]) if mask else RpcaInstance(M=M, rho=rho, sigma=p["sigma"])
            setup.mask = mask
        else:
            inst, A, E = random_rpca(p["m"], p["n"], p["rank"], p["spr"], p["seed"], rho=p["rho"], sigma=p["sigma"])
            setup.truth_A, setup.truth_E = A, E
            setup.matrices = {"A": A, "E": E}
        setup.rpca = inst
        setup.matrices["M"] = inst.M
        setup.description = {"shape": list(inst.shape), "rho": inst.rho}

    elif kind == "completion":
        spec = CompletionSpec(n=p["n"], r=p["r"], spr=p["spr"], sr=p["sr"], rng_seed=p["seed"])
        generated = generate_completion(spec, sigma=p["sigma"], rho=p["rho"])
        setup.rpca = generated.instance
        setup.truth_A, setup.truth_E = generated.A, generated.E
        setup.mask = generated.instance.mask
        setup.mu0_norm = "fro"
        setup.matrices = {"M": generated.instance.M, "A": generated.A, "E": generated.E}
        setup.description = {"observed": setup.mask.size, "rho": generated.instance.rho}

    else:
        raise ValueError(f"unknown problem kind {kind!r}")
    return setup


def run_solver(setup: ProblemSetup, spec: SolverSpec) -> SolverOutcome:
    tracker = ExecutionTracker()
    diverged = False
    errors = None
    failure = None

    try:
        if setup.rpca is not None:
            config = spec.solver_config(mu0_auto=default_mu0(setup.rpca.M, setup.mu0_norm))
            result = run_rpca(setup.rpca, config, accelerated=spec.method == "falm")
            trace = result.trace
            if setup.truth_A is not None:
                rel = relative_errors(result.X, result.Y, setup.truth_A, setup.truth_E, setup.mask)
                errors = {"rel_x": rel.rel_x, "rel_y": rel.rel_y}
        else:
            trace = SOLVERS[spec.method](setup.objective(spec.smooth_g), spec.solver_config())
    except DivergenceError as exc:
        trace, diverged = exc.trace, True
    except AltlinError as exc:
        logger.warning("%s failed: %s", spec.name, exc)
        trace, failure = RunTrace(solver_name=spec.name, stop_reason=STOP_FAILED), f"{type(exc).__name__}: {exc}"

    trace.solver_name = spec.name
    tracker.finish()
    return SolverOutcome(
        spec=spec,
        trace=trace,
        wall_ms=tracker.get_duration_ms(),
        diverged=diverged,
        errors=errors,
        failure=failure,
    )


def check_solver_bound(setup: ProblemSetup, outcome: SolverOutcome, oracles: Dict[bool, object]) -> Optional[BoundReport]:
    """Check the complexity bound of one run; ``None`` when it does not apply"""
    spec = outcome.spec
    kind = BOUND_FOR_METHOD.get(spec.method)
    if kind is None or spec.uses_continuation or outcome.diverged or setup.rpca is not None:
        return None
    obj = setup.objective(spec.smooth_g)
    mu = outcome.trace.records[0].mu
    limits = [h.lipschitz for h in (obj.f,) + ((obj.g,) if spec.method in NEEDS_SMOOTH_G else ()) if h.lipschitz]
    if limits and mu > 1.0 / max(limits) * (1 + 1e-12):
        print(f"  ⚠ {spec.name}: mu={mu:g} exceeds 1/L, bound not checked")
        return None
    if spec.smooth_g not in oracles:
        oracles[spec.smooth_g] = reference_optimum(obj, tol=ORACLE_TOL)
    oracle = oracles[spec.smooth_g]
    constants = BoundConstants(mu=mu, x0_minus_xstar_sq=float(np.vdot(oracle.x_star, oracle.x_star)), f_star=oracle.f_star)
    return check_bound(outcome.trace, kind, constants)


def summary_rows(outcomes: List[SolverOutcome], checkpoints: List[int]) -> List[List[str]]:
    with_target = any(o.spec.settings.get("obj_target") is not None for o in outcomes)
    with_errors = any(o.errors is not None for o in outcomes)
    header = ["solver", "method", "iterations", "skips", "stop_reason"]
    header += [f"obj@{k}" for k in checkpoints]
    header += ["final_obj"]
    if with_target:
        header.append("iters_to_target")
    if with_errors:
        header += ["rel_x", "rel_y"]

    rows = [header]
    for o in outcomes:
        trace = o.trace
        row = [o.spec.name, o.spec.method, str(len(trace)), str(trace.skip_count), trace.stop_reason]
        for k in checkpoints:
            rec = trace.record_at(k)
            row.append(format_real(rec.obj) if rec is not None else "")
        row.append(format_real(trace.final_obj))
        if with_target:
            target = o.spec.settings.get("obj_target")
            hit = trace.iterations_to_target(target) if target is not None else None
            row.append("" if hit is None else str(hit))
        if with_errors:
            row += [format_real(o.errors["rel_x"]), format_real(o.errors["rel_y"])] if o.errors else ["", ""]
        rows.append(row)
    return rows


def write_summary_csv(rows: List[List[str]], path: Path) -> Path:
    with open(path, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    return path


def manifest(config: ExperimentConfig, setup: ProblemSetup, outcomes: List[SolverOutcome]) -> Dict[str, object]:
    return {
        "altlin_version": __version__,
        "config": config.sections,
        "problem": {"kind": setup.kind, **setup.description},
        "solvers": {
            o.spec.name: {
                "method": o.spec.method,
                "iterations": len(o.trace),
                "skips": o.trace.skip_count,
                "stop_reason": o.trace.stop_reason,
                "failure": o.failure,
                "grad_evals": o.trace.grad_evals,
                "prox_evals": o.trace.prox_evals,
                "bound": None if o.bound is None else {"kind": o.bound.kind, "passed": o.bound.passed, "first_violation": o.bound.first_violation},
            }
            for o in outcomes
        },
    }


def run_experiment(config: ExperimentConfig) -> int:
    """
    Run every solver of an experiment and write its outputs.

    Returns:
        EXIT_OK, EXIT_DIVERGED if any solver diverged (its partial trace is
        still written), EXIT_SOLVER_FAILED if a solver raised a numeric or
        usage error, or EXIT_BOUND_VIOLATED if a checked bound failed
    """
    tracker = ExecutionTracker()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    print("=" * 60)
    print(f"📉 EXPERIMENT: {config.source.name} ({config.problem.kind})")
    print("=" * 60)

    try:
        setup = build_problem(config.problem)
    except (ValueError, OSError, NumericFailureError) as exc:
        print(f"✗ Could not build the {config.problem.kind} instance: {exc}")
        return EXIT_CONFIG_ERROR
    print(f"✓ Built {config.problem.kind} instance {setup.description}")

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(lambda spec: run_solver(setup, spec), config.solvers))
    else:
        outcomes = [run_solver(setup, spec) for spec in config.solvers]

    status = EXIT_OK
    oracles: Dict[bool, object] = {}
    for outcome in outcomes:
        trace = outcome.trace
        write_trace_csv(trace, out_dir / f"trace_{outcome.spec.name}.csv")
        if outcome.diverged:
            print(f"✗ {outcome.spec.name}: diverged after {len(trace)} iterations")
            status = EXIT_DIVERGED
            continue
        if outcome.failure is not None:
            print(f"✗ {outcome.spec.name}: failed ({outcome.failure})")
            if status in (EXIT_OK, EXIT_BOUND_VIOLATED):
                status = EXIT_SOLVER_FAILED
            continue
        print(
            f"✓ {outcome.spec.name}: {len(trace)} iterations, {trace.skip_count} skips, "
            f"final obj {trace.final_obj:.10g} ({trace.stop_reason}, {outcome.wall_ms:.0f} ms)"
        )
        if config.check_bounds:
            outcome.bound = check_solver_bound(setup, outcome, oracles)
            if outcome.bound is not None:
                mark = "✓" if outcome.bound.passed else "✗"
                print(f"  {mark} {outcome.bound}")
                if not outcome.bound.passed and status == EXIT_OK:
                    status = EXIT_BOUND_VIOLATED

    rows = summary_rows(outcomes, config.checkpoints)
    write_summary_csv(rows, out_dir / "summary.csv")
    save_json(str(out_dir / "manifest.json"), manifest(config, setup, outcomes))
    tracker.finish()

    print(f"\n✓ Experiment completed in {tracker.get_duration():.2f}s")
    print(f"📁 Output saved to: {out_dir}")

    summary = SummaryWriter(f"Experiment {config.source.stem}", "📉")
    summary.add_header(config.problem.kind, "completed" if status == EXIT_OK else f"exit code {status}")
    summary.add_table(rows[0], rows[1:])
    summary.add_solver_status(
        [(o.spec.name, not (o.diverged or o.failure), o.trace.stop_reason, o.wall_ms) for o in outcomes]
    )
    summary.add_footer(tracker)
    summary.write()
    return status


def generate_instance(problem: ProblemSpec, out_dir: Path) -> List[Path]:
    """Write the instance matrices (and mask) of ``[problem]`` to ``out_dir``"""
    setup = build_problem(problem)
    out_dir = Path(out_dir)
    written = []
    for name, matrix in setup.matrices.items():
        path = out_dir / f"{name}.txt"
        write_matrix(path, matrix)
        written.append(path)
    if setup.mask is not None:
        path = out_dir / "mask.txt"
        write_mask(path, setup.mask)
        written.append(path)
    if problem.kind == "completion":
        p = problem.params
        spec = CompletionSpec(n=p["n"], r=p["r"], spr=p["spr"], sr=p["sr"], rng_seed=p["seed"])
        path = out_dir / "spec.ini"
        lines = ["[problem]", "kind = completion"] + [f"{'seed' if k == 'rng_seed' else k} = {v}" for k, v in spec.to_config().items()]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
