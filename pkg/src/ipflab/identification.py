"""Operator identification from ensemble covariances at switch moments.

All four identification routes reduce to ratios of the local drift matrix
b and a covariance: reduced-control A = -b r_v^{-1}, covariance ratio
A = (1/2) rdot_- r^{-1}, dispersion window A = b (2 int b dt)^{-1}, and the
closed loop A = b r^{-1}.  The conjugate-vector constraint
E[2 X X^T + dX/dx] = 0 serves as the switch-moment diagnostic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diffusion import EnsembleStats
from .errors import DegenerateEnsembleError, InputError

_COND_MAX = 1e12


def _guarded_inv(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.atleast_2d(mat)
    if np.linalg.cond(mat) > _COND_MAX:
        raise DegenerateEnsembleError(f"{what} is numerically singular")
    return np.linalg.inv(mat)


@dataclass(frozen=True)
class IdentifiedOperator:
    tau: float
    A: np.ndarray
    method: str
    eigenvalues: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "tau": self.tau, "method": self.method,
            "A": np.atleast_2d(self.A).tolist(),
            "eigenvalues_real": np.real(self.eigenvalues).tolist(),
            "eigenvalues_imag": np.imag(self.eigenvalues).tolist(),
            "diagnostics": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                            for k, v in self.diagnostics.items()},
        }, indent=2)


def _make(tau, A, method, diagnostics=None) -> IdentifiedOperator:
    A = np.atleast_2d(A)
    return IdentifiedOperator(tau=float(tau), A=A, method=method,
                              eigenvalues=np.linalg.eigvals(A),
                              diagnostics=diagnostics or {})


def identify_reduced(stats: EnsembleStats, v, tau: float,
                     b: Optional[np.ndarray] = None) -> IdentifiedOperator:
    """A(tau) = -b r_v^{-1} with r_v the shifted second moment E[(x+v)(x+v)^T].

    v is the applied reduced control (callable of t or constant vector).
    b defaults to the left derivative (1/2) rdot(tau); near stationarity
    that estimate collapses to noise, so the local drift matrix
    b = (1/2) sigma sigma^T may be passed explicitly.
    """
    i = stats.index_of(tau)
    if stats.paths is None:
        raise InputError("identify_reduced needs retained paths for r_v")
    x = stats.paths[:, i, :]
    vv = np.atleast_1d(np.asarray(v(tau) if callable(v) else v, dtype=float))
    if vv.ndim == 1 and vv.shape[0] == stats.n:
        shifted = x + vv
    else:
        shifted = x + vv
    r_v = shifted.T @ shifted / shifted.shape[0]
    if b is None:
        b = 0.5 * stats.r_dot_at(tau, side="left")
    A = -np.atleast_2d(b) @ _guarded_inv(r_v, "r_v")
    return _make(tau, A, "reduced-control", {"r_v": r_v})


def identify_reduced_feedback(stats: EnsembleStats, tau: float,
                              b: Optional[np.ndarray] = None) -> IdentifiedOperator:
    """Reduced identification under the doubling feedback v = -2x.

    With x + v = -x the shifted moment equals r, so A = -b r^{-1} needs no
    retained paths.
    """
    r = stats.r_at(tau)
    if b is None:
        b = 0.5 * stats.r_dot_at(tau, side="left")
    A = -np.atleast_2d(b) @ _guarded_inv(r, "r")
    return _make(tau, A, "reduced-control", {"feedback": "v=-2x"})


def identify_covariance_ratio(stats: EnsembleStats, tau: float) -> IdentifiedOperator:
    """A_-(tau) = (1/2) rdot(tau-) r(tau)^{-1}, rdot taken from the left."""
    r = stats.r_at(tau)
    rdot = stats.r_dot_at(tau, side="left")
    r_inv = _guarded_inv(r, "r")
    A = 0.5 * rdot @ r_inv
    comm = 0.5 * rdot @ r_inv - 0.5 * r_inv @ rdot
    return _make(tau, A, "covariance-ratio",
                 {"commutator_norm": float(np.linalg.norm(comm))})


def identify_dispersion_window(stats: EnsembleStats, tau: float,
                               window: float) -> IdentifiedOperator:
    """A(tau) = b(tau) (2 int_{tau-w}^{tau} b dt)^{-1} with b = (1/2) rdot."""
    if window <= 0:
        raise InputError("window must be positive")
    grid = stats.grid
    if stats.r_dot is None:
        raise InputError("r_dot not filled; call covariance_derivative first")
    lo_t = tau - window
    mask = (grid >= lo_t - 1e-12) & (grid <= tau + 1e-12)
    if np.count_nonzero(mask) < 2:
        raise InputError("window too short for the grid")
    b_t = 0.5 * stats.r_dot[mask]
    tt = grid[mask]
    integral = np.trapezoid(b_t, tt, axis=0)
    b_tau = 0.5 * stats.r_dot_at(tau, side="left")
    A = np.atleast_2d(b_tau) @ _guarded_inv(2.0 * integral, "window integral")
    return _make(tau, A, "dispersion-window", {"window": window})


def identify_closed_loop(stats: EnsembleStats, tau: float,
                         b: Optional[np.ndarray] = None) -> IdentifiedOperator:
    """A^v(tau) = b r^{-1}, the operator seen under the closed loop."""
    r = stats.r_at(tau)
    if b is None:
        b = 0.5 * stats.r_dot_at(tau, side="left")
    A = np.atleast_2d(b) @ _guarded_inv(r, "r")
    return _make(tau, A, "closed-loop", {})


def conjugate_vector(stats: EnsembleStats, tau: float) -> np.ndarray:
    """Per-path conjugate vector X = -(1/2) r^{-1} x at tau."""
    if stats.paths is None:
        raise InputError("conjugate_vector needs retained paths")
    i = stats.index_of(tau)
    r_inv = _guarded_inv(stats.r_at(tau), "r")
    return -0.5 * (stats.paths[:, i, :] @ r_inv.T)


def check_constraint(stats: EnsembleStats, X: np.ndarray, tau: float,
                     grad: np.ndarray) -> float:
    """Residual norm of E[2 X X^T] + dX/dx at tau.

    grad is the state gradient of X; with X = -(1/2) r^{-1} x it equals
    -(1/2) (int sigma sigma^T dt)^{-1}, which matches -(1/2) r^{-1} only at
    a genuine switch moment, so the residual separates switch moments from
    mid-segment times.
    """
    X = np.atleast_2d(X)
    exx = 2.0 * X.T @ X / X.shape[0]
    return float(np.linalg.norm(exx + np.atleast_2d(grad)))
