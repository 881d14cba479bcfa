"""Optimal control synthesis: starting, step-wise, and needle actions.

The whole control family reduces to doubling feedback v = -2x applied at
switch moments.  Under it a scalar segment with eigenvalue lam follows

    x(t) = x(tau) (2 - e^{lam (t - tau)}),

switch moments are detected where two modes reach equal relative phase
speed |xdot/x|, and equalized components are consolidated by a plane
rotation that preserves the norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .diffusion import EnsembleStats
from .errors import DegenerateEnsembleError, InputError, UndefinedAngleError
from .identification import _guarded_inv


@dataclass(frozen=True)
class NeedleEvent:
    tau: float
    v_minus: np.ndarray
    v_plus: np.ndarray
    delta_v: np.ndarray


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    eigenvalue: float
    start_state: float
    control: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class SegmentSchedule:
    """Switch moments, per-segment records, and needle events between them."""

    dps: list
    segments: list
    needle_events: list

    def __post_init__(self):
        d = list(self.dps)
        if any(d[k + 1] <= d[k] for k in range(len(d) - 1)):
            raise InputError("switch moments must be strictly increasing")

    def to_json(self) -> str:
        return json.dumps({
            "dps": list(self.dps),
            "segments": [{"t_start": s.t_start, "t_end": s.t_end,
                          "eigenvalue": s.eigenvalue,
                          "start_state": s.start_state,
                          "control": s.control} for s in self.segments],
            "needle_events": [{"tau": e.tau,
                               "v_minus": np.atleast_1d(e.v_minus).tolist(),
                               "v_plus": np.atleast_1d(e.v_plus).tolist(),
                               "delta_v": np.atleast_1d(e.delta_v).tolist()}
                              for e in self.needle_events],
        }, indent=2)


def starting_control(stats: EnsembleStats, at: float) -> dict:
    """Starting step control from the observed moments at one time.

    Reduced form v = -2 E[x], external form u = b r^{-1} v, the nonrandom
    starting state |r^{1/2}|, and the starting operator b r^{-1}.
    """
    r = np.atleast_2d(stats.r_at(at))
    b = 0.5 * np.atleast_2d(stats.r_dot_at(at, side="left"))
    r_inv = _guarded_inv(r, "r")
    mean = stats.mean[stats.index_of(at)]
    v = -2.0 * mean
    u = b @ r_inv @ v
    # principal square root of the PSD moment matrix
    w, q = np.linalg.eigh(r)
    if np.min(w) < -1e-12:
        raise DegenerateEnsembleError("moment matrix not PSD")
    x_start = q @ np.diag(np.sqrt(np.clip(w, 0, None))) @ q.T
    return {"v": v, "u": u, "x_start": np.abs(x_start),
            "A_start": b @ r_inv}


def step_control(x_at_dp) -> np.ndarray:
    """Doubling feedback v = -2 x(tau), held fixed over the next segment."""
    return -2.0 * np.asarray(x_at_dp, dtype=float)


def needle_control(x_minus, x_plus, tau: float = 0.0) -> NeedleEvent:
    """Needle action between tau-o and tau: jump of the held control."""
    v_m = step_control(x_minus)
    v_p = step_control(x_plus)
    return NeedleEvent(tau=tau, v_minus=v_m, v_plus=v_p, delta_v=v_p - v_m)


def segment_trajectory(x_at_dp: float, lam: float, t, tau: float = 0.0):
    """Closed-form scalar segment under the doubling control."""
    return x_at_dp * (2.0 - np.exp(lam * (np.asarray(t) - tau)))


def relative_phase_speed(x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
    """|xdot / x| with zeros of x mapped to +inf (condition undefined there)."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    out = np.full_like(x, np.inf)
    nz = np.abs(x) > 1e-300
    out[nz] = np.abs(xdot[nz] / x[nz])
    return out


def detect_dp(grid, modes, modes_dot=None, tolerance: float = 1e-10) -> list:
    """Moments where two modes have equal relative phase speed.

    modes is (T, n); derivatives default to central differences on the
    grid.  Each bracketing cell of the pairwise speed difference is
    refined by bisection on the linearly interpolated traces; cells where
    a mode crosses zero are skipped with a warning entry.
    """
    grid = np.asarray(grid, dtype=float)
    modes = np.atleast_2d(np.asarray(modes, dtype=float))
    if modes.shape[0] != grid.shape[0]:
        modes = modes.T
    if modes_dot is None:
        modes_dot = np.gradient(modes, grid, axis=0)
    else:
        modes_dot = np.atleast_2d(np.asarray(modes_dot, dtype=float))
        if modes_dot.shape[0] != grid.shape[0]:
            modes_dot = modes_dot.T
    n = modes.shape[1]
    hits = []
    for i in range(n):
        for j in range(i + 1, n):
            si = relative_phase_speed(modes[:, i], modes_dot[:, i])
            sj = relative_phase_speed(modes[:, j], modes_dot[:, j])
            d = si - sj
            if np.all(np.abs(d[np.isfinite(d)]) <= tolerance):
                hits.append({"pair": (i, j), "tau": float(grid[0]),
                             "note": "identical speeds throughout"})
                continue
            for k in range(len(grid) - 1):
                if not (np.isfinite(d[k]) and np.isfinite(d[k + 1])):
                    continue
                if d[k] == 0.0:
                    hits.append({"pair": (i, j), "tau": float(grid[k])})
                    continue
                if d[k] * d[k + 1] < 0:
                    if modes[k, i] * modes[k + 1, i] < 0 or modes[k, j] * modes[k + 1, j] < 0:
                        hits.append({"pair": (i, j), "tau": None,
                                     "note": f"mode zero inside [{grid[k]}, {grid[k+1]}]"})
                        continue
                    def f(t, k=k, i=i, j=j):
                        w = (t - grid[k]) / (grid[k + 1] - grid[k])
                        xi = (1 - w) * modes[k, i] + w * modes[k + 1, i]
                        xj = (1 - w) * modes[k, j] + w * modes[k + 1, j]
                        vi = (1 - w) * modes_dot[k, i] + w * modes_dot[k + 1, i]
                        vj = (1 - w) * modes_dot[k, j] + w * modes_dot[k + 1, j]
                        return abs(vi / xi) - abs(vj / xj)
                    tau = optimize.bisect(f, grid[k], grid[k + 1],
                                          xtol=tolerance * max(abs(grid[k]), 1.0))
                    hits.append({"pair": (i, j), "tau": float(tau)})
    return hits


def consolidate_rotation(z_i: float, z_j: float) -> dict:
    """Equalize a pair by rotating through -arctan((z_j - z_i)/(z_j + z_i))."""
    if z_i + z_j == 0.0:
        raise UndefinedAngleError("z_i + z_j = 0; rotation angle undefined")
    phi = math.atan2(z_j - z_i, z_j + z_i)
    c, s = math.cos(phi), math.sin(phi)
    # rotation by -phi
    zi_hat = c * z_i + s * z_j
    zj_hat = -s * z_i + c * z_j
    return {"phi": phi, "z_hat": (zi_hat, zj_hat)}


def schedule_from_invariants(inv, spectrum) -> SegmentSchedule:
    """Segment schedule on the invariant grid t_i = a_o / |alpha_i|.

    Each segment carries its spectrum eigenvalue and the doubling control
    from a unit start state; so eigenvalue * duration = a_o on every
    segment by construction.
    """
    spec = np.atleast_1d(np.asarray(spectrum, dtype=float))
    if np.any(spec == 0):
        raise InputError("spectrum entries must be nonzero")
    durations = inv.ao_abs / np.abs(spec)
    t = 0.0
    dps = []
    segments = []
    needles = []
    x = 1.0
    for lam, dt in zip(spec, durations):
        seg_end = t + dt
        segments.append(Segment(t_start=t, t_end=seg_end, eigenvalue=float(lam),
                                start_state=x, control=float(-2.0 * x)))
        x_end = float(segment_trajectory(x, lam, seg_end, tau=t))
        needles.append(needle_control(x_end, x_end, tau=seg_end))
        dps.append(seg_end)
        t = seg_end
        x = x_end
    return SegmentSchedule(dps=dps, segments=segments, needle_events=needles)
