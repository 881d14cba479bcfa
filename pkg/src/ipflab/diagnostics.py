"""Local Lyapunov exponents and the path-functional production rate.

A segment's local exponent is the least-squares slope of ln|x| over a
window, which equals the segment eigenvalue for pure exponentials; the
production rate is the trace of the identified operator, positive at
optimal switch moments.  A needle event flips the exponent's sign in the
noiseless replay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, UndefinedLogError


def lce_local(grid, x, window: float = None) -> float:
    """Least-squares slope of ln|x(t)| over the window starting at grid[0]."""
    grid = np.asarray(grid, dtype=float)
    x = np.asarray(x, dtype=float)
    if window is not None:
        mask = grid <= grid[0] + window
        grid, x = grid[mask], x[mask]
    if len(grid) < 2:
        raise InputError("window too short: need at least 2 samples")
    if x[0] == 0:
        raise InputError("reference state must be nonzero")
    if np.any(x * x[0] <= 0):
        raise UndefinedLogError("state ratio non-positive inside window")
    logs = np.log(np.abs(x))
    slope = np.polyfit(grid, logs, 1)[0]
    # exactly zero for a constant trace regardless of fit roundoff
    if np.allclose(x, x[0]):
        return 0.0
    return float(slope)


def pfr(A) -> float:
    """Production rate Tr A of an identified operator."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise InputError("operator must be square")
    return float(np.trace(A))


def classify(sigma: float, tol: float = 1e-12) -> str:
    if sigma > tol:
        return "instable"
    if sigma < -tol:
        return "asymptotically-stable"
    return "steady"


@dataclass(frozen=True)
class DiagnosticsReport:
    lce_per_segment: list
    pfr_values: list
    sign_flips: list
    classification: list

    def to_json(self) -> str:
        return json.dumps({
            "lce_per_segment": self.lce_per_segment,
            "pfr": self.pfr_values,
            "sign_flips": self.sign_flips,
            "classification": self.classification}, indent=2)


def diagnose_segments(grid, x, dps) -> DiagnosticsReport:
    """Per-segment exponents and flip records for a scalar trace.

    dps splits the grid into segments; the exponent of each segment is
    fitted over its interior and consecutive exponents with opposite sign
    are recorded as flips.
    """
    grid = np.asarray(grid, dtype=float)
    x = np.asarray(x, dtype=float)
    bounds = [grid[0]] + list(dps) + [grid[-1]]
    lces = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        mask = (grid >= lo) & (grid <= hi)
        if np.count_nonzero(mask) < 2:
            continue
        lces.append(lce_local(grid[mask], x[mask]))
    flips = [{"after_dp_index": k, "before": lces[k], "after": lces[k + 1]}
             for k in range(len(lces) - 1)
             if lces[k] * lces[k + 1] < 0]
    return DiagnosticsReport(lce_per_segment=lces,
                             pfr_values=[],
                             sign_flips=flips,
                             classification=[classify(s) for s in lces])
