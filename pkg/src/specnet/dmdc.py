"""Delay-embedded data matrices and DMD with control.

Column ``j`` of ``Zbar`` stacks ``z(j), z(j+s), ..., z(j+(N-1)s)`` where
``s = delta / T``; ``Zbar_prime`` is the same pattern one sample later and
``Ubar`` stacks every input sample ``u(j), ..., u(j+(N-1)s)`` so that

    Zbar_prime = Gamma @ Zbar + Upsilon @ Ubar

holds exactly for zero-order-hold data.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import DataLengthError, DegenerateDataError, NumericalError, ParameterError


@dataclass(frozen=True)
class EmbeddingConfig:
    N: int
    delta: float
    svd_tol: float = 1e-10

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError("N must be a positive integer")
        if self.delta <= 0:
            raise ParameterError("delta must be positive")
        if not 0 < self.svd_tol < 1:
            raise ParameterError("svd_tol must lie in (0, 1)")

    def stride(self, T: float) -> int:
        s = int(round(self.delta / T))
        if s < 1 or abs(s * T - self.delta) > 1e-9 * max(self.delta, T):
            raise ParameterError(f"delta={self.delta} is not a multiple of T={T}")
        return s

    def input_depth(self, T: float) -> int:
        return (self.N - 1) * self.stride(T) + 1

    def min_samples(self, T: float) -> int:
        return (self.N - 1) * self.stride(T) + 2

    def to_dict(self) -> dict:
        return {"N": int(self.N), "delta": float(self.delta), "svd_tol": float(self.svd_tol)}


@dataclass(frozen=True, eq=False)
class DataMatrices:
    Zbar: np.ndarray
    Zbar_prime: np.ndarray
    Ubar: np.ndarray
    q: int
    p: int
    stride: int
    T: float

    @property
    def M(self) -> int:
        return self.Zbar.shape[1]


@dataclass(frozen=True, eq=False)
class DmdcResult:
    Gamma: np.ndarray
    Upsilon: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    rank_used: int
    singular_values: np.ndarray
    config: EmbeddingConfig
    q: int
    stride: int
    T: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "residual": float(self.residual),
            "rank_used": int(self.rank_used),
            "config": self.config.to_dict(),
            "q": int(self.q),
            "T": float(self.T),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def build_data_matrices(traj: Trajectory, cfg: EmbeddingConfig) -> DataMatrices:
    T = traj.T
    s = cfg.stride(T)
    need = cfg.min_samples(T)
    if len(traj) < need:
        raise DataLengthError(need, len(traj))
    N = cfg.N
    depth = cfg.input_depth(T)
    M = len(traj) - depth
    z, u = traj.samples, traj.inputs
    Zbar = np.vstack([z[i * s:i * s + M].T for i in range(N)])
    Zbar_prime = np.vstack([z[i * s + 1:i * s + 1 + M].T for i in range(N)])
    Ubar = np.vstack([u[k:k + M].T for k in range(depth)])
    return DataMatrices(Zbar, Zbar_prime, Ubar, q=traj.q, p=traj.p, stride=s, T=T)


def fit(data: DataMatrices, cfg: EmbeddingConfig) -> DmdcResult:
    """Least-squares ``[Gamma Upsilon]`` from a truncated SVD of ``[Zbar; Ubar]``.

    Singular values below ``svd_tol * sigma_max`` are discarded; the
    pseudo-inverse is never formed.
    """
    Nq = data.Zbar.shape[0]
    R = np.vstack([data.Zbar, data.Ubar])
    if data.M < R.shape[0]:
        warnings.warn(
            f"only {data.M} columns for {R.shape[0]} regressor rows; "
            "the fit is underdetermined", RuntimeWarning, stacklevel=2)
    if not np.all(np.isfinite(R)):
        raise NumericalError("non-finite entries in the data matrices")
    try:
        U, S, Vt = np.linalg.svd(R, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    if S.size == 0 or S[0] == 0.0:
        raise DegenerateDataError("trajectory lies in a proper subspace: regressor is zero")
    r = int(np.count_nonzero(S > cfg.svd_tol * S[0]))
    if r == 0:
        raise DegenerateDataError("no singular value above the truncation threshold")

    G = ((data.Zbar_prime @ Vt[:r].T) / S[:r]) @ U[:, :r].T
    if r < R.shape[0]:
        G = _min_gamma_fit(data, cfg.svd_tol * S[0])
    Gamma, Upsilon = G[:, :Nq], G[:, Nq:]
    resid = data.Zbar_prime - G @ R
    denom = np.linalg.norm(data.Zbar_prime)
    residual = float(np.linalg.norm(resid) / denom) if denom > 0 else 0.0

    try:
        mu_t, w_t = np.linalg.eig(Gamma)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition of Gamma failed: {exc}") from exc
    return DmdcResult(
        Gamma=Gamma, Upsilon=Upsilon, eigenvalues=mu_t, eigenvectors=w_t,
        residual=residual, rank_used=r, singular_values=S, config=cfg,
        q=data.q, stride=data.stride, T=data.T,
    )


def _min_gamma_fit(data, tol):
    """Least-squares fit with the smallest ``Gamma`` among equal-residual fits.

    The input rows are projected out first, so state directions the data
    never excites are mapped to zero.
    """
    Z, Zp, Ub = data.Zbar, data.Zbar_prime, data.Ubar
    if Ub.shape[0]:
        Uu, Su, Vtu = np.linalg.svd(Ub, full_matrices=False)
        Vu = Vtu[:np.count_nonzero(Su > tol)]
        Z_perp, Zp_perp = Z - (Z @ Vu.T) @ Vu, Zp - (Zp @ Vu.T) @ Vu
    else:
        Z_perp, Zp_perp = Z, Zp
    Uz, Sz, Vtz = np.linalg.svd(Z_perp, full_matrices=False)
    k = int(np.count_nonzero(Sz > tol))
    Gamma = ((Zp_perp @ Vtz[:k].T) / Sz[:k]) @ Uz[:, :k].T
    if Ub.shape[0]:
        rest = Zp - Gamma @ Z
        Upsilon = ((rest @ Vu.T) / Su[:len(Vu)]) @ Uu[:, :len(Vu)].T
    else:
        Upsilon = np.zeros((Z.shape[0], 0))
    return np.hstack([Gamma, Upsilon])


def dmdc(traj: Trajectory, cfg: EmbeddingConfig) -> DmdcResult:
    return fit(build_data_matrices(traj, cfg), cfg)


@dataclass(frozen=True)
class CompanionReport:
    gamma_deviation: float
    upsilon_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.gamma_deviation, self.upsilon_deviation)


def companion_structure_check(result: DmdcResult, q: int | None = None) -> CompanionReport:
    """Measure how far the shift rows of ``Gamma`` are from ``[0 I]``.

    With unit stride, block ``i`` of ``Zbar_prime`` equals block ``i+1`` of
    ``Zbar`` for ``i < N-1``, so the first ``(N-1) q`` rows of Gamma should
    be a pure shift and the same rows of Upsilon zero. Diagnostic only.
    """
    q = result.q if q is None else q
    if result.stride != 1:
        raise ParameterError("shift structure only holds for delta == T")
    Nq = result.Gamma.shape[0]
    top = Nq - q
    if top == 0:
        return CompanionReport(0.0, 0.0)
    shift = np.zeros((top, Nq))
    shift[:, q:] = np.eye(top)
    g = float(np.max(np.abs(result.Gamma[:top] - shift)))
    u = float(np.max(np.abs(result.Upsilon[:top]), initial=0.0))
    return CompanionReport(g, u)


def block_geometry_error(result: DmdcResult, index: int) -> float:
    """Relative departure of eigenvector ``index`` from the stacked form.

    For an exact fit each ``q``-block equals ``mu_delta ** l`` times the
    first block, with ``mu_delta = mu_tilde ** stride``.
    """
    q, s = result.q, result.stride
    w = result.eigenvectors[:, index]
    mu_d = result.eigenvalues[index] ** s
    blocks = w.reshape(-1, q)
    pred = np.outer(mu_d ** np.arange(blocks.shape[0]), blocks[0])
    return float(np.linalg.norm(blocks - pred) / np.linalg.norm(blocks))
