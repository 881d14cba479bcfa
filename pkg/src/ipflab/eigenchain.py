"""Eigenvalue renovation across control switches and equalization chains.

A segment with eigenvalue lam, run for time t under the fixed doubling
control, renovates the eigenvalue to

    lam' = -lam e^{lam t} (2 - e^{lam t})^{-1}

and scales the state by (2 - e^{lam t}).  Chaining these steps and choosing
each interval so the joined eigenvalue meets the next spectrum entry at
equal phase-speed magnitude produces the cooperation schedule; a final
interval ln 2 / lam zeroes the state exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import (InputError, NeedsNeedleControlError, NoCooperationError,
                     SingularRenovationError)

LN2 = math.log(2.0)
_POLE_TOL = 1e-12


def eigen_step(lam: float, t: float) -> float:
    """Renovated eigenvalue after a segment of length t."""
    x = lam * t
    if abs(x - LN2) < _POLE_TOL:
        raise SingularRenovationError(f"lam*t = ln 2 at lam={lam}, t={t}")
    e = math.exp(x)
    return -lam * e / (2.0 - e)


def state_step(z, lam: float, t: float):
    """State multiplier (2 - e^{lam t}) applied segment-wise; zero is legal."""
    return (2.0 - math.exp(lam * t)) * np.asarray(z)


def terminal_time(t_prev: float, lam: float) -> float:
    """Moment the final segment zeroes the state: t_prev + ln 2 / lam."""
    if lam <= 0:
        raise NeedsNeedleControlError(
            "terminal segment needs a positive eigenvalue; apply a needle control")
    return t_prev + LN2 / abs(lam)


def _abs_speed(lam: float, t: float) -> float:
    """|renovated eigenvalue| as a function of segment time, +inf at the pole."""
    x = lam * t
    d = 2.0 - math.exp(x)
    if abs(d) < _POLE_TOL:
        return math.inf
    return abs(lam * math.exp(x) / d)


def _equalization_root(lam_joint: float, lam_next: float, offset: float,
                       t_max: float) -> float:
    """Smallest t > 0 with |speed(lam_joint, t)| = |speed(lam_next, offset+t)|.

    The difference is scanned on a fine grid, skipping pole-straddling
    cells, then bisected.
    """
    def f(t):
        return _abs_speed(lam_joint, t) - _abs_speed(lam_next, offset + t)

    grid = np.linspace(1e-9, t_max, 20000)
    prev_t, prev_v = grid[0], f(grid[0])
    for t in grid[1:]:
        v = f(t)
        if math.isfinite(prev_v) and math.isfinite(v) and prev_v * v < 0:
            return optimize.brentq(f, prev_t, t, xtol=1e-13, rtol=1e-14)
        prev_t, prev_v = t, v
    raise NoCooperationError(
        f"no equalization moment for ({lam_joint}, {lam_next}) within t <= {t_max}")


@dataclass(frozen=True)
class EigenChain:
    """Cooperation schedule: per-stage eigenvalue pairs and interval lengths."""

    lambdas: list          # stage k: [joined lam entering, next spectrum lam, lam after join]
    intervals: list        # t_k durations, one per stage
    n: int
    m: int

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "m": self.m,
                           "lambdas": self.lambdas,
                           "intervals": self.intervals}, indent=2)


def interval_ratios(chain: EigenChain) -> list:
    """Consecutive cooperation-interval ratios t_{k+1}/t_k."""
    t = chain.intervals
    return [t[k + 1] / t[k] for k in range(len(t) - 1)]


def build_equalization_chain(spectrum, n: int) -> EigenChain:
    """Sequentially equalize a ranged spectrum into a single eigenvalue.

    Stage k holds the current joined eigenvalue (its segment clock restarts
    at the join) against the next spectrum entry, whose clock has been
    running since t = 0; the interval solves the equal-magnitude condition
    on the renovated speeds.  The chain is well posed only with as many
    intervals as dimensions, so len(spectrum) must equal n.
    """
    spec = [float(s) for s in np.atleast_1d(spectrum)]
    if len(spec) != n:
        raise InputError("chain needs exactly n spectrum entries (n = m)")
    mags = [abs(s) for s in spec]
    if any(m == 0 for m in mags):
        raise InputError("spectrum entries must be nonzero")
    if any(mags[i] <= mags[i + 1] for i in range(len(mags) - 1)):
        raise InputError("spectrum must be strictly ranged by magnitude")
    if n == 1:
        return EigenChain(lambdas=[[spec[0]]], intervals=[], n=1, m=1)

    t_max = 1e3 / min(mags)
    lam_joint = spec[0]
    elapsed = 0.0
    stages = []
    intervals = []
    for k in range(1, n):
        lam_next = spec[k]
        t_k = _equalization_root(lam_joint, lam_next, elapsed, t_max)
        lam_after = abs(eigen_step(lam_joint, t_k))
        stages.append([lam_joint, lam_next, lam_after])
        intervals.append(t_k)
        elapsed += t_k
        lam_joint = lam_after
    return EigenChain(lambdas=stages, intervals=intervals, n=n, m=n)


def chain_state_trace(chain: EigenChain, z0: float) -> dict:
    """Propagate a scalar state through the chain and the zeroing tail.

    Returns the per-stage states, the terminal time, and the final state
    (exactly zero when the tail lands on lam*t = ln 2).
    """
    z = float(z0)
    states = [z]
    t = 0.0
    for stage, dt in zip(chain.lambdas, chain.intervals):
        z = float(state_step(z, stage[0], dt))
        t += dt
        states.append(z)
    lam_final = chain.lambdas[-1][2] if chain.intervals else chain.lambdas[0][0]
    T = terminal_time(t, lam_final)
    z = float(state_step(z, lam_final, T - t))
    states.append(z)
    return {"states": states, "terminal_time": T, "final_state": z}
