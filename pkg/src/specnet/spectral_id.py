"""From the eigen-decomposition of Gamma to Laplacian eigenvalues and
eigenvector component ratios."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .dmdc import DmdcResult
from .dynamics import MeasurementPlan, UnitDynamics
from .errors import ExcludedEigenvalueError, ParameterError, PoleAtInfinityError


@dataclass(frozen=True)
class SystemEigen:
    mu: complex
    mu_tilde: complex
    spurious: bool
    index: int


@dataclass
class LaplacianEstimate:
    lambdas: np.ndarray
    groups: list                   # per lambda: list of (eigen index, mu)
    eigen_lambda: dict = field(default_factory=dict)   # eigen index -> lambda
    diagnostics: list = field(default_factory=list)

    @property
    def multiplicities(self) -> list:
        return [len(g) for g in self.groups]

    def to_dict(self) -> dict:
        return {
            "lambdas": [[float(z.real), float(z.imag)] for z in self.lambdas],
            "multiplicity": self.multiplicities,
            "source_mu": [[[float(mu.real), float(mu.imag)] for _, mu in g] for g in self.groups],
            "diagnostics": list(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "multiplicity", "source_mu_list"])
        for lam, g in zip(self.lambdas, self.groups):
            mus = ";".join(f"{mu.real:.17g}{mu.imag:+.17g}j" for _, mu in g)
            w.writerow([format(lam.real, ".17g"), format(lam.imag, ".17g"), len(g), mus])
        return buf.getvalue()


def recover_mu(result: DmdcResult, T: float | None = None, zero_tol: float = 1e-6):
    """Continuous-time exponents ``log(mu_tilde) / T`` (principal branch).

    Eigenvalues with ``|mu_tilde| < zero_tol`` come from over-embedding and
    are flagged spurious; their ``mu`` is ``-inf`` when ``mu_tilde == 0``.
    """
    T = result.T if T is None else T
    if T <= 0:
        raise ParameterError("T must be positive")
    out = []
    for k, mt in enumerate(np.asarray(result.eigenvalues, dtype=complex)):
        spurious = bool(abs(mt) < zero_tol)
        mu = complex(-np.inf, 0.0) if mt == 0 else complex(np.log(mt) / T)
        out.append(SystemEigen(mu=mu, mu_tilde=complex(mt), spurious=spurious, index=k))
    return out


def resolvable_zero_tol(result: DmdcResult) -> float:
    """Smallest ``|mu_tilde|`` the embedding can tell apart from zero.

    Over one stack spacing a mode contracts by ``|mu_tilde| ** stride``;
    once that drops below ``svd_tol`` the mode sits under the truncation
    floor between consecutive blocks and cannot be resolved.
    """
    return float(result.config.svd_tol ** (1.0 / result.stride))


def _transfer_parts(mu, unit: UnitDynamics):
    """``det(A - mu I)`` and ``C^T adj(A - mu I) B`` up to a common unit factor.

    Computed from an SVD so that both stay finite at eigenvalues of A.
    """
    M = unit.A - mu * np.eye(unit.m)
    U, s, Vh = np.linalg.svd(M)
    cv = unit.C @ Vh.conj().T
    ub = U.conj().T @ unit.B
    prods = np.array([np.prod(np.delete(s, i)) for i in range(s.size)])
    return np.prod(s), np.sum(cv * prods * ub), s


def mu_to_lambda(mu, unit: UnitDynamics, strict: bool = True, tol: float = 1e-10) -> complex:
    """Laplacian eigenvalue ``1 / (C^T (A - mu I)^-1 B)`` matching ``mu``.

    With ``strict`` (the default), ``mu`` within ``tol`` (relative) of an
    eigenvalue of ``A`` raises :class:`ExcludedEigenvalueError`. Otherwise
    the continuous extension ``det(A - mu I) / (C^T adj(A - mu I) B)`` is
    returned, which is 0 at such points.
    """
    mu = complex(mu)
    det, num, s = _transfer_parts(mu, unit)
    scale = max(1.0, np.linalg.norm(unit.A, 2) + abs(mu))
    if s[-1] <= tol * scale:
        if strict:
            raise ExcludedEigenvalueError(f"mu={mu} is an eigenvalue of A")
    bc = max(np.linalg.norm(unit.B) * np.linalg.norm(unit.C), np.finfo(float).tiny)
    if abs(num) <= tol * bc * np.prod(s[:-1]):
        raise PoleAtInfinityError(f"C^T (A - mu I)^-1 B vanishes at mu={mu}")
    # unit phase factors det(U) det(Vh) cancel between numerator and denominator
    return complex(det / num)


def recover_laplacian(eigens, unit: UnitDynamics, dedup_tol: float = 1e-3) -> LaplacianEstimate:
    """Map every non-spurious exponent to a Laplacian eigenvalue and merge.

    Values closer than ``dedup_tol * (1 + |lambda|)`` are merged into one
    group holding at most ``m`` exponents (each Laplacian eigenvalue has
    ``m`` preimages). Mapping failures are recorded, not raised.
    """
    diagnostics = []
    mapped = []
    for e in eigens:
        if e.spurious:
            continue
        try:
            lam = mu_to_lambda(e.mu, unit, strict=False)
        except PoleAtInfinityError as exc:
            diagnostics.append(f"eigen {e.index}: {exc}")
            continue
        if not np.isfinite(lam):
            diagnostics.append(f"eigen {e.index}: non-finite lambda")
            continue
        if min(abs(e.mu - ev) for ev in np.linalg.eigvals(unit.A)) < 1e-10 * (1 + abs(e.mu)):
            diagnostics.append(f"eigen {e.index}: mu at an eigenvalue of A, mapped to its limit")
        mapped.append((e.index, e.mu, lam))

    groups, centers = [], []
    for idx, mu, lam in sorted(mapped, key=lambda t: (t[2].real, t[2].imag)):
        for k, g in enumerate(groups):
            if len(g) < unit.m and abs(lam - centers[k]) <= dedup_tol * (1 + abs(lam)):
                g.append((idx, mu, lam))
                centers[k] = np.mean([t[2] for t in g])
                break
        else:
            groups.append([(idx, mu, lam)])
            centers.append(lam)

    lambdas = np.array(centers, dtype=complex)
    # enforce conjugate symmetry
    used = set()
    for a in range(len(lambdas)):
        la = lambdas[a]
        if abs(la.imag) <= dedup_tol * (1 + abs(la)):
            lambdas[a] = la.real
            continue
        if a in used or la.imag < 0:
            continue
        cands = [b for b in range(len(lambdas)) if b != a and b not in used
                 and lambdas[b].imag < 0]
        if not cands:
            continue
        b = min(cands, key=lambda b: abs(lambdas[b] - np.conj(la)))
        if abs(lambdas[b] - np.conj(la)) <= 10 * dedup_tol * (1 + abs(la)):
            avg = 0.5 * (la + np.conj(lambdas[b]))
            lambdas[a], lambdas[b] = avg, np.conj(avg)
            used.update((a, b))

    order = np.lexsort((lambdas.imag, lambdas.real))
    lambdas = lambdas[order]
    groups = [[(i, mu) for i, mu, _ in groups[k]] for k in order]
    eigen_lambda = {i: complex(lambdas[k]) for k, g in enumerate(groups) for i, _ in g}
    return LaplacianEstimate(lambdas=lambdas, groups=groups,
                             eigen_lambda=eigen_lambda, diagnostics=diagnostics)


@dataclass(frozen=True)
class RatioEntry:
    eig_index: int
    i: int
    j: int
    ratio: complex
    spread: float
    reliable: bool


def _complex_median(values):
    v = np.asarray(values)
    return complex(np.median(v.real), np.median(v.imag))


def eigenvector_ratios(result: DmdcResult, plan: MeasurementPlan, pair_list, N=None,
                       eig_indices=None, rel_threshold: float = 1e-10):
    """Component ratios ``[Q1 v]_i / [Q1 v]_j`` from eigenvectors of Gamma.

    The measured vector is ordered node-major (``Q = Q1 (x) Q2``), so the
    entry for measured node ``i`` and state ``l2`` of block ``l1`` sits at
    ``l1 * q + i * q2 + l2`` (0-based). ``i`` and ``j`` index positions in
    the plan's node list. The ratio is the median over all ``(l1, l2)``
    replicas; replicas whose denominator is below ``rel_threshold`` times
    the eigenvector norm are dropped.
    """
    factored = plan.factored_form
    if factored is None:
        raise ParameterError("eigenvector ratios need a Kronecker measurement plan")
    nodes, states = factored
    q1, q2 = len(nodes), len(states)
    q = q1 * q2
    Nq = result.eigenvectors.shape[0]
    N = Nq // q if N is None else N
    if N * q != Nq:
        raise ParameterError(f"N*q = {N * q} does not match Gamma size {Nq}")
    if eig_indices is None:
        eig_indices = range(result.eigenvectors.shape[1])

    table = []
    for k in eig_indices:
        w = result.eigenvectors[:, k]
        floor = rel_threshold * np.linalg.norm(w)
        for i, j in pair_list:
            if not (0 <= i < q1 and 0 <= j < q1):
                raise ParameterError(f"pair ({i}, {j}) outside 0..{q1 - 1}")
            reps = []
            for l1 in range(N):
                for l2 in range(q2):
                    den = w[l1 * q + j * q2 + l2]
                    if abs(den) > floor:
                        reps.append(w[l1 * q + i * q2 + l2] / den)
            if not reps:
                table.append(RatioEntry(k, i, j, complex(np.nan, np.nan), np.inf, False))
                continue
            med = _complex_median(reps)
            spread = float(np.max(np.abs(np.asarray(reps) - med)) / max(abs(med), 1e-300))
            table.append(RatioEntry(k, i, j, med, spread, True))
    return table


def leading_eigen_indices(estimate: LaplacianEstimate, count: int, zero_sep=None):
    """Gamma-eigen indices for the ``count`` eigenvalues after the zero one.

    Candidates are ordered by real part and taken above ``zero_sep`` (same
    rule as :func:`specnet.analysis.select_lambda2`); of a conjugate pair
    only the member with non-negative imaginary part is used.
    """
    from .analysis import lambda2_threshold

    lam = np.asarray(estimate.lambdas)
    cut = lambda2_threshold(lam, zero_sep)
    order = [k for k in np.argsort(lam.real, kind="stable")
             if lam[k].real > cut and lam[k].imag >= 0]
    if len(order) < count:
        raise ParameterError(f"only {len(order)} non-zero eigenvalues, need {count}")
    return [estimate.groups[k][0][0] for k in order[:count]]


def choose_reference(result: DmdcResult, plan: MeasurementPlan, eig_indices) -> int:
    """Measured node whose smallest normalised component is largest.

    Dividing by this node keeps every ratio denominator away from zero.
    """
    nodes, states = plan.factored_form or (None, None)
    if nodes is None:
        raise ParameterError("reference selection needs a Kronecker measurement plan")
    q1, q2 = len(nodes), len(states)
    W = np.abs(result.eigenvectors[:q1 * q2, list(eig_indices)]).reshape(q1, q2, -1).sum(1)
    W = W / np.maximum(W.max(axis=0), np.finfo(float).tiny)
    return int(np.argmax(W.min(axis=1)))


def ratio_points(result: DmdcResult, plan: MeasurementPlan, eig_indices, reference=0):
    """``(q1, len(eig_indices))`` array of ratios of every measured node to ``reference``."""
    nodes, _ = plan.factored_form or ((),)
    pairs = [(i, reference) for i in range(len(nodes))]
    cols = []
    for k in eig_indices:
        cols.append([e.ratio for e in eigenvector_ratios(result, plan, pairs, eig_indices=[k])])
    return np.array(cols, dtype=complex).T


def ratios_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eig_index", "i", "j", "ratio_re", "ratio_im", "spread"])
    for e in table:
        w.writerow([e.eig_index, e.i, e.j, format(e.ratio.real, ".17g"),
                    format(e.ratio.imag, ".17g"), format(e.spread, ".17g")])
    return buf.getvalue()
