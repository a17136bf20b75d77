"""Minimal-deviation safety filter over a finite candidate set.

Among candidates whose certificate margin is nonnegative, pick the one
closest to the nominal input; the deviation cost is 0.5 * ||u - u_nom||^2
with each channel normalized by its actuator rate bound so both channels
weigh comparably (the chosen candidate is invariant to any positive
rescaling of the cost). Ties break toward larger margin, then lower
candidate index. With no feasible candidate the filter returns the
max-margin candidate flagged infeasible; the episode keeps running.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..vehicle.state import ControlInput


@dataclass(frozen=True)
class FilterResult:
    input: ControlInput
    feasible: bool
    margin: float
    deviation: float
    index: int


def deviation_cost(candidates: np.ndarray, nominal_input: np.ndarray,
                   bounds: tuple[float, float]) -> np.ndarray:
    d = (candidates - nominal_input[None, :]) / np.asarray(bounds, dtype=float)[None, :]
    return 0.5 * (d * d).sum(axis=1)


def safe_filter(candidates: np.ndarray, margins: np.ndarray,
                nominal_input: np.ndarray, bounds: tuple[float, float]) -> FilterResult:
    """Selection rule of the certificate filter; pure given the margins."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    margins = np.asarray(margins, dtype=float)
    if candidates.shape[0] == 0:
        raise ValueError("candidate set must be nonempty")
    if candidates.shape[0] != margins.size:
        raise ValueError("one margin per candidate required")
    dev = deviation_cost(candidates, np.asarray(nominal_input, dtype=float), bounds)
    feas = margins >= 0.0
    if feas.any():
        idx_f = np.flatnonzero(feas)
        order = np.lexsort((idx_f, -margins[idx_f], dev[idx_f]))
        i = int(idx_f[order[0]])
        feasible = True
    else:
        i = int(np.argmax(margins))
        feasible = False
    return FilterResult(
        input=ControlInput.from_array(candidates[i]),
        feasible=feasible, margin=float(margins[i]),
        deviation=float(dev[i]), index=i,
    )
