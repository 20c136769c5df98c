"""
Momentum weights ``t_k`` for the accelerated methods

Regular steps advance ``t`` with ``(1 + sqrt(1 + 4 t^2)) / 2``; a skipped step
advances it with factor 2 instead of 4. When a skip is detected at step k the
already computed ``t_k`` is rebuilt from ``t_{k-1}`` with factor 8 if step
k-1 was regular and factor 4 if it was skipped. The resulting sequence obeys

    regular -> regular: t_{k-1}^2     = t_k (t_k - 1)
    regular -> skip:    2 t_{k-1}^2   = t_k (t_k - 1)
    skip    -> skip:    t_{k-1}^2     = t_k (t_k - 1)
    skip    -> regular: t_{k-1}^2 / 2 = t_k (t_k - 1)

The last relation makes t drop by about a factor sqrt 2 on a regular step
after a skip once t is large, so only pure regular or pure skipping runs are
increasing; mixed runs still satisfy ``tk_lower_bound``.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

REGULAR = "regular"
SKIPPING = "skipping"
NONE = "none"

EVENT_REGULAR = "regular"
EVENT_SKIP_AFTER_REGULAR = "skip_after_regular"
EVENT_SKIP_AFTER_SKIP = "skip_after_skip"
EVENTS = (EVENT_REGULAR, EVENT_SKIP_AFTER_REGULAR, EVENT_SKIP_AFTER_SKIP)

# first-step-skip and first-step-regular constants of the t_k lower bounds
ALPHA = math.sqrt(2.0) - 1.0
ALPHA_HAT = 1.0 / math.sqrt(2.0) - 1.0


def next_t(t: float, factor: float) -> float:
    return (1.0 + math.sqrt(1.0 + factor * t * t)) / 2.0


@dataclass(frozen=True)
class TkState:
    """
    ``t`` is the weight for the upcoming step, ``prev_step_kind`` the kind of
    the step just finished and ``t_prev`` the weight that step used.
    """

    t: float = 1.0
    prev_step_kind: str = NONE
    t_prev: Optional[float] = None

    def __post_init__(self):
        if not self.t >= 1.0:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if self.prev_step_kind not in (REGULAR, SKIPPING, NONE):
            raise ValueError(f"unknown step kind {self.prev_step_kind!r}")


def skip_event(state: TkState) -> str:
    return EVENT_SKIP_AFTER_SKIP if state.prev_step_kind == SKIPPING else EVENT_SKIP_AFTER_REGULAR


def update_tk(state: TkState, event: str) -> TkState:
    """
    Advance past a finished step of kind ``event``.

    Raises:
        ValueError: for an unknown event or one that contradicts ``prev_step_kind``
    """
    if event not in EVENTS:
        raise ValueError(f"unknown t_k event {event!r}")
    if event == EVENT_SKIP_AFTER_SKIP and state.prev_step_kind == REGULAR:
        raise ValueError("skip_after_skip event after a regular step")
    if event == EVENT_SKIP_AFTER_REGULAR and state.prev_step_kind == SKIPPING:
        raise ValueError("skip_after_regular event after a skipping step")

    if event == EVENT_REGULAR:
        return TkState(t=next_t(state.t, 4.0), prev_step_kind=REGULAR, t_prev=state.t)
    return TkState(t=next_t(state.t, 2.0), prev_step_kind=SKIPPING, t_prev=state.t)


def correct_tk_for_skip(state: TkState) -> TkState:
    """
    Rebuild the pending ``t`` for a step that turned out to skip; no-op on the first step.

    The rebuilt value is larger than the one it replaces, and the regular
    step that follows can fall below it.
    """
    if state.prev_step_kind == NONE or state.t_prev is None:
        return state
    factor = 8.0 if state.prev_step_kind == REGULAR else 4.0
    return replace(state, t=next_t(state.t_prev, factor))


def tk_schedule(kinds: Sequence[str]) -> List[float]:
    """Corrected ``t_1, t_2, ...`` produced by a run with the given step kinds"""
    state = TkState()
    ts = []
    for kind in kinds:
        if kind == SKIPPING:
            state = correct_tk_for_skip(state)
            ts.append(state.t)
            state = update_tk(state, skip_event(state))
        elif kind == REGULAR:
            ts.append(state.t)
            state = update_tk(state, EVENT_REGULAR)
        else:
            raise ValueError(f"unknown step kind {kind!r}")
    return ts


def tk_lower_bound(kinds: Sequence[str], k: int) -> float:
    """
    Lower bound on ``t_k`` (1-based) given the kinds of steps 1..k.

    With r(k) regular and s(k) skipping steps among 1..k:
    first step skipping: t_k >= (k+1+ALPHA r)/2 on a skip, (k+1+ALPHA r)/(2 sqrt 2) otherwise;
    first step regular: t_k >= (k+1+ALPHA_HAT s)/sqrt 2 on a skip, (k+1+ALPHA_HAT s)/2 otherwise.
    """
    if not 1 <= k <= len(kinds):
        raise ValueError(f"k={k} outside 1..{len(kinds)}")
    prefix = kinds[:k]
    regular = sum(1 for kind in prefix if kind == REGULAR)
    skipping = k - regular
    current_skips = prefix[-1] == SKIPPING
    if prefix[0] == SKIPPING:
        base = k + 1 + ALPHA * regular
        return base / 2.0 if current_skips else base / (2.0 * math.sqrt(2.0))
    base = k + 1 + ALPHA_HAT * skipping
    return base / math.sqrt(2.0) if current_skips else base / 2.0
