"""
Splitting and linearization solvers sharing one trace format
"""

from typing import Callable, Dict

from altlin.solvers.config import ContinuationConfig, SolverConfig, continuation_next_mu
from altlin.solvers.fast_linearization import run_falm, run_falm_s
from altlin.solvers.linearization import run_alm, run_alm_s, run_alm_s_equiv
from altlin.solvers.proximal_gradient import run_fista, run_ista
from altlin.solvers.schedule import TkState, correct_tk_for_skip, tk_lower_bound, tk_schedule, update_tk
from altlin.solvers.splitting import run_adal, run_sadal
from altlin.solvers.trace import IterateRecord, RunTrace, read_trace_csv, write_trace_csv

SOLVERS: Dict[str, Callable] = {
    "adal": run_adal,
    "sadal": run_sadal,
    "alm": run_alm,
    "alm_s": run_alm_s,
    "alm_s_equiv": run_alm_s_equiv,
    "falm": run_falm,
    "falm_s": run_falm_s,
    "ista": run_ista,
    "fista": run_fista,
}

# methods that linearize g and therefore need it smooth
NEEDS_SMOOTH_G = frozenset({"alm", "falm"})

__all__ = [
    "SOLVERS",
    "NEEDS_SMOOTH_G",
    "ContinuationConfig",
    "IterateRecord",
    "RunTrace",
    "SolverConfig",
    "TkState",
    "continuation_next_mu",
    "correct_tk_for_skip",
    "read_trace_csv",
    "run_adal",
    "run_alm",
    "run_alm_s",
    "run_alm_s_equiv",
    "run_falm",
    "run_falm_s",
    "run_fista",
    "run_ista",
    "run_sadal",
    "tk_lower_bound",
    "tk_schedule",
    "update_tk",
    "write_trace_csv",
]
