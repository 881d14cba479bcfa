"""Entropy functional of a controlled diffusion against its driftless twin.

Two estimators of the same quantity:

    S = (1/2) E [ integral of a_u^T (2b)^{-1} a_u dt ],   2b = sigma sigma^T,

by Monte Carlo over a simulated ensemble, and in the scalar linear case by
the covariance closed form (1/2) integral u^2 sigma^{-2} r dt.  The
stochastic-integral part of the additive functional has zero expectation
and is never simulated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffusion import DiffusionModel, EnsembleStats, _noise, _REDUCE_CHUNK
from .errors import (DegenerateFunctionalError, InputError,
                     SingularDiffusionError)


@dataclass(frozen=True)
class EntropyEstimate:
    value: float                  # nats
    method: str                   # "monte-carlo" or "covariance-form"
    horizon: tuple
    std_error: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps({"value": self.value, "method": self.method,
                           "horizon": list(self.horizon),
                           "std_error": self.std_error}, indent=2)


def entropy_mc(model: DiffusionModel, n_paths: int, dt: float = None,
               seed: int = 0) -> EntropyEstimate:
    """Monte Carlo value of the drift quadratic form along simulated paths.

    The integrand a_u^T (2b)^{-1} a_u is accumulated trapezoidally per
    path; the reported standard error is the per-path spread of the time
    integral divided by sqrt(n_paths).
    """
    if n_paths < 2:
        raise InputError("n_paths must be >= 2")
    s, t_end = model.horizon
    if dt is None:
        dt = (t_end - s) * 1e-3
    n = model.n
    n_steps = int(round((t_end - s) / dt))
    grid = s + dt * np.arange(n_steps + 1)

    rng0 = np.random.Generator(np.random.Philox(key=np.uint64(seed) ^ np.uint64(0x9E3779B9)))
    if np.allclose(model.initial_cov, 0.0):
        x = np.tile(model.initial_mean, (n_paths, 1))
    else:
        x = rng0.multivariate_normal(model.initial_mean, model.initial_cov,
                                     size=n_paths, method="eigh")
    dW = _noise(seed, n_steps, n_paths, n) * np.sqrt(dt)

    integral = np.zeros(n_paths)
    prev_q = _quadratic(model, grid[0], x)
    for k in range(n_steps):
        t = grid[k]
        u = model.control_law(t, x) if model.control_law is not None else None
        a = model.drift(t, x, u)
        sig = np.atleast_2d(np.asarray(model.diffusion(t), dtype=float))
        x = x + a * dt + dW[k] @ sig.T
        q = _quadratic(model, grid[k + 1], x)
        integral += 0.5 * dt * (prev_q + q)
        prev_q = q

    half = 0.5 * integral
    value = float(np.mean(half))
    se = float(np.std(half, ddof=1) / math.sqrt(n_paths))
    return EntropyEstimate(value=value, method="monte-carlo",
                           horizon=model.horizon, std_error=se)


def _quadratic(model: DiffusionModel, t: float, x: np.ndarray) -> np.ndarray:
    """Per-path a_u^T (2b)^{-1} a_u at one time."""
    u = model.control_law(t, x) if model.control_law is not None else None
    a = model.drift(t, x, u)
    sig = np.atleast_2d(np.asarray(model.diffusion(t), dtype=float))
    twob = sig @ sig.T
    if np.linalg.cond(twob) > 1e12:
        raise SingularDiffusionError(f"2b singular at t={t}")
    sol = np.linalg.solve(twob, a.T).T
    return np.einsum("pi,pi->p", a, sol)


def entropy_covariance_form(u, stats: EnsembleStats, sigma) -> EntropyEstimate:
    """Scalar closed form (1/2) integral u(t)^2 sigma(t)^{-2} r(t) dt.

    u and sigma are nonrandom scalars or callables of t; r comes from the
    supplied moment record.  sigma is the driftless companion's dispersion
    and must stay away from zero, otherwise the functional degenerates.
    """
    grid = stats.grid
    if stats.n != 1:
        raise InputError("covariance form implemented for scalar processes")
    uu = np.array([u(t) if callable(u) else u for t in grid], dtype=float)
    ss = np.array([sigma(t) if callable(sigma) else sigma for t in grid], dtype=float)
    if np.any(np.abs(ss) < 1e-14):
        raise DegenerateFunctionalError("sigma vanishes; functional degenerates")
    r = stats.r[:, 0, 0]
    integrand = uu * uu * r / (ss * ss)
    value = 0.5 * float(np.trapezoid(integrand, grid))
    return EntropyEstimate(value=value, method="covariance-form",
                           horizon=(float(grid[0]), float(grid[-1])))
