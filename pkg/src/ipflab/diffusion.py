"""Microlevel controlled diffusion: Euler-Maruyama ensembles and their moments.

The model is the Ito equation

    dx = a(t, x, u) dt + sigma(t) dW,      u = control_law(t, x),

simulated over an ensemble of paths.  The ensemble is reduced to the time
grid of second-moment matrices r(t) = E[x x^T] and means, which is all the
identification and entropy machinery downstream needs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InputError, SimulationDivergedError

SCHEMA_VERSION = "1"

# paths are reduced chunk-by-chunk with a fixed chunk size so the moment
# sums form the same pairwise tree regardless of how work is distributed
_REDUCE_CHUNK = 4096


@dataclass(frozen=True)
class DiffusionModel:
    """Controlled Ito diffusion on a finite horizon.

    drift(t, x, u) must accept x of shape (paths, n) and u of the same shape
    (or None when no control is installed) and return (paths, n).
    diffusion(t) returns the n x n matrix sigma(t).  control_law(t, x) maps
    the ensemble state to the control; None means zero control.
    """

    n: int
    drift: Callable
    diffusion: Callable
    initial_mean: np.ndarray
    initial_cov: np.ndarray
    horizon: tuple
    control_law: Optional[Callable] = None

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.initial_mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.initial_cov, dtype=float))
        if mean.shape != (self.n,) or cov.shape != (self.n, self.n):
            raise InputError(f"initial law has wrong shape for n={self.n}")
        if not np.allclose(cov, cov.T):
            raise InputError("initial_cov must be symmetric")
        if np.min(np.linalg.eigvalsh(cov)) < -1e-12:
            raise InputError("initial_cov must be positive semi-definite")
        s, t_end = self.horizon
        if not t_end > s:
            raise InputError("horizon must satisfy T > s")
        object.__setattr__(self, "initial_mean", mean)
        object.__setattr__(self, "initial_cov", cov)


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time moments of a simulated ensemble.

    r is the (non-centered) second-moment matrix E[x x^T]; r_dot is its
    time derivative, filled by :func:`covariance_derivative`.
    """

    grid: np.ndarray            # (T,)
    mean: np.ndarray            # (T, n)
    r: np.ndarray               # (T, n, n)
    seed: int
    n_paths: int
    r_dot: Optional[np.ndarray] = None
    paths: Optional[np.ndarray] = None   # (paths, T, n) if retained

    @property
    def n(self) -> int:
        return self.mean.shape[1]

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.grid - t)))
        return i

    def r_at(self, t: float) -> np.ndarray:
        return self.r[self.index_of(t)]

    def r_dot_at(self, t: float, side: str = "left") -> np.ndarray:
        """Derivative of r at t; 'left' takes the backward difference, which
        is the correct branch at a control-switch moment."""
        if side == "left":
            i = self.index_of(t)
            if i == 0:
                side = "grid"
            else:
                dt = self.grid[i] - self.grid[i - 1]
                d = (self.r[i] - self.r[i - 1]) / dt
                return 0.5 * (d + d.T)
        if self.r_dot is None:
            raise InputError("r_dot not filled; call covariance_derivative first")
        return self.r_dot[self.index_of(t)]

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "n_paths": self.n_paths,
            "grid": self.grid.tolist(),
            "mean": self.mean.tolist(),
            "r": self.r.tolist(),
            "r_dot": None if self.r_dot is None else self.r_dot.tolist(),
        }
        return json.dumps(doc, indent=2)

    def to_csv(self) -> str:
        n = self.n
        out = io.StringIO()
        w = csv.writer(out)
        header = (["t"] + [f"mean_{i}" for i in range(n)]
                  + [f"r_{i}{j}" for i in range(n) for j in range(n)]
                  + [f"rdot_{i}{j}" for i in range(n) for j in range(n)])
        w.writerow(header)
        for k, t in enumerate(self.grid):
            row = [t] + list(self.mean[k]) + list(self.r[k].ravel())
            if self.r_dot is not None:
                row += list(self.r_dot[k].ravel())
            else:
                row += [""] * (n * n)
            w.writerow(row)
        return out.getvalue()


def _noise(seed: int, n_steps: int, n_paths: int, n: int) -> np.ndarray:
    """Standard-normal increments, bit-reproducible for fixed arguments.

    A counter-based Philox stream keyed by the seed is drawn once in
    (step, path, component) order, so the result cannot depend on how the
    ensemble is later chunked across workers.
    """
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return gen.standard_normal((n_steps, n_paths, n))


def _moments(x: np.ndarray):
    """Chunked pairwise reduction of mean and E[x x^T] over the path axis."""
    n_paths = x.shape[0]
    sums_m = []
    sums_r = []
    for lo in range(0, n_paths, _REDUCE_CHUNK):
        c = x[lo:lo + _REDUCE_CHUNK]
        sums_m.append(c.sum(axis=0))
        sums_r.append(np.einsum("pi,pj->ij", c, c))
    mean = np.add.reduce(sums_m) / n_paths
    r = np.add.reduce(sums_r) / n_paths
    return mean, 0.5 * (r + r.T)


def simulate_ensemble(model: DiffusionModel, n_paths: int, dt: float = None,
                      seed: int = 0, keep_paths: bool = False) -> EnsembleStats:
    """Euler-Maruyama ensemble of the controlled diffusion.

    Deterministic for fixed (seed, n_paths, dt).  Raises
    SimulationDivergedError with the first bad time if any path leaves the
    finite range.
    """
    if n_paths < 2:
        raise InputError("n_paths must be >= 2")
    s, t_end = model.horizon
    if dt is None:
        dt = (t_end - s) * 1e-3
    if dt <= 0:
        raise InputError("dt must be positive")
    n = model.n
    n_steps = int(round((t_end - s) / dt))
    grid = s + dt * np.arange(n_steps + 1)

    rng0 = np.random.Generator(np.random.Philox(key=np.uint64(seed) ^ np.uint64(0x9E3779B9)))
    if np.allclose(model.initial_cov, 0.0):
        x = np.tile(model.initial_mean, (n_paths, 1))
    else:
        x = rng0.multivariate_normal(model.initial_mean, model.initial_cov,
                                     size=n_paths, method="cholesky" if
                                     np.min(np.linalg.eigvalsh(model.initial_cov)) > 0 else "eigh")
    dW = _noise(seed, n_steps, n_paths, n) * np.sqrt(dt)

    means = np.empty((n_steps + 1, n))
    rs = np.empty((n_steps + 1, n, n))
    means[0], rs[0] = _moments(x)
    trail = np.empty((n_paths, n_steps + 1, n)) if keep_paths else None
    if keep_paths:
        trail[:, 0, :] = x

    for k in range(n_steps):
        t = grid[k]
        u = model.control_law(t, x) if model.control_law is not None else None
        a = model.drift(t, x, u)
        sig = np.atleast_2d(np.asarray(model.diffusion(t), dtype=float))
        x = x + a * dt + dW[k] @ sig.T
        if not np.all(np.isfinite(x)):
            raise SimulationDivergedError(grid[k + 1])
        means[k + 1], rs[k + 1] = _moments(x)
        if keep_paths:
            trail[:, k + 1, :] = x

    for arr in (grid, means, rs):
        arr.setflags(write=False)
    return EnsembleStats(grid=grid, mean=means, r=rs, seed=seed,
                         n_paths=n_paths, paths=trail)


def covariance_derivative(stats: EnsembleStats) -> EnsembleStats:
    """Fill r_dot by finite differences: central inside, one-sided at the ends."""
    grid = stats.grid
    if len(grid) < 3:
        raise InputError("grid needs at least 3 points for differentiation")
    r = stats.r
    r_dot = np.gradient(r, grid, axis=0)
    r_dot = 0.5 * (r_dot + np.transpose(r_dot, (0, 2, 1)))
    r_dot.setflags(write=False)
    return replace(stats, r_dot=r_dot)


def stats_from_covariance(grid, r, mean=None, seed=0, n_paths=0) -> EnsembleStats:
    """Wrap analytically known moments in the EnsembleStats container."""
    grid = np.asarray(grid, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.ndim == 1:
        r = r[:, None, None]
    if mean is None:
        mean = np.zeros((len(grid), r.shape[1]))
    return EnsembleStats(grid=grid, mean=np.asarray(mean, dtype=float),
                         r=r, seed=seed, n_paths=n_paths)
