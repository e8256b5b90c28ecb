"""Network statistics from (estimated) Laplacian spectra."""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull as _QHull
from scipy.spatial import QhullError
from scipy.spatial.distance import pdist

from .errors import DegenerateHullError, ParameterError


class Moments(NamedTuple):
    M1: float
    M2: float


@dataclass(frozen=True, eq=False)
class ConvexHull:
    """Counter-clockwise polygon in the complex plane, as ``(x, y)`` rows."""

    vertices: np.ndarray

    @property
    def signed_area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, points, tol=1e-12) -> np.ndarray:
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = np.stack([pts.real, pts.imag], axis=1)[:, None, :] - v[None]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        scale = tol * max(1.0, np.abs(v).max())
        return np.all(cross >= -scale * np.linalg.norm(e, axis=1)[None], axis=1)


@dataclass
class SpectralSummary:
    M1: float
    M2: float
    D1: float
    D2_bounds: tuple
    lambda2: float
    lambda_n: float
    dmin_bound: float
    dmax_bound: float
    mode: str
    n: int
    imag_residual: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["D2_bounds"] = list(self.D2_bounds)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def moments_from_spectrum(lambdas) -> Moments:
    """First two spectral moments ``mean(lambda)`` and ``mean(lambda**2)``.

    Both are real for a conjugate-closed multiset; the real parts are
    returned. Use :func:`moment_imag_residual` to inspect what was dropped.
    """
    lam = np.asarray(lambdas, dtype=complex)
    if lam.size == 0:
        raise ParameterError("empty spectrum")
    return Moments(float(lam.real.mean()), float(np.mean(lam ** 2).real))


def moment_imag_residual(lambdas) -> float:
    lam = np.asarray(lambdas, dtype=complex)
    return float(max(abs(lam.mean().imag), abs(np.mean(lam ** 2).imag)))


def hull_of(points) -> ConvexHull:
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    xy = np.unique(np.stack([pts.real, pts.imag], axis=1), axis=0)
    if len(xy) < 3:
        raise DegenerateHullError(f"need at least 3 distinct points, got {len(xy)}")
    try:
        h = _QHull(xy)
    except QhullError as exc:
        raise DegenerateHullError("points are collinear") from exc
    # qhull returns 2-D vertices counter-clockwise
    return ConvexHull(xy[h.vertices])


def hull_moments(hull: ConvexHull) -> Moments:
    """Area-averaged ``x`` and ``x**2 - y**2`` over the polygon.

    Exact edge sums from Green's theorem.
    """
    x, y = hull.vertices.T
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    c = x * y1 - x1 * y
    area = c.sum() / 2
    if not area > 0:
        raise DegenerateHullError("hull has zero area")
    ix = np.sum((x + x1) * c) / 6
    ixx = np.sum((x * x + x * x1 + x1 * x1) * c) / 12
    iyy = np.sum((y * y + y * y1 + y1 * y1) * c) / 12
    return Moments(float(ix / area), float((ixx - iyy) / area))


def degree_bounds(lambda2, lambda_n, n):
    """Fiedler bounds ``d_min >= (n-1)/n lambda2``, ``d_max <= (n-1)/n lambda_n``."""
    if n < 2:
        raise ParameterError("degree bounds need n >= 2")
    f = (n - 1) / n
    return f * lambda2, f * lambda_n


def quadratic_mean_bounds(M1, M2):
    """Interval ``[max(M1**2, M2/2), M2]`` containing ``mean(d**2)``."""
    if M2 < 0:
        raise ParameterError("M2 must be non-negative")
    return max(M1 * M1, M2 / 2), M2


def mean_edges_per_node(M1, mean_weight):
    if mean_weight <= 0:
        raise ParameterError("mean edge weight must be positive")
    return M1 / mean_weight


def lambda2_threshold(lambdas, zero_sep=None) -> float:
    """Real-part cut separating the zero eigenvalue from the rest.

    ``None`` means 5% of the largest real part; ``"second"`` puts the cut
    at the smallest real part, so the next value up is taken as lambda2.
    """
    re = np.sort(np.asarray(lambdas, dtype=complex).real)
    if zero_sep is None:
        return float(0.05 * re[-1])
    if zero_sep == "second":
        return float(re[0])
    return float(zero_sep)


def select_lambda2(lambdas, zero_sep=None) -> float:
    """Real part of the algebraic-connectivity estimate.

    The smallest real part above :func:`lambda2_threshold`, so a recovered
    zero eigenvalue is not mistaken for it. Falls back to the
    second-smallest real part.
    """
    re = np.sort(np.asarray(lambdas, dtype=complex).real)
    if re.size < 2:
        raise ParameterError("need at least two eigenvalues")
    above = re[re > lambda2_threshold(re, zero_sep)]
    return float(above[0]) if above.size else float(re[1])


def _hull_clusters_warning(lambdas, hull):
    # one hull assumed; flag spectra that split into far-apart groups
    gaps = np.diff(np.sort(np.asarray(lambdas, dtype=complex).real))
    diam = pdist(hull.vertices).max()
    if gaps.size and gaps.max() > 0.5 * diam:
        warnings.warn("estimated eigenvalues form separated clusters; a single hull "
                      "over-covers the spectrum", RuntimeWarning, stacklevel=3)


def summarize(lambdas, n, mode="full", zero_sep=None) -> SpectralSummary:
    """Moments, quadratic-degree interval and degree bounds in one record.

    ``mode="hull"`` takes moments from the convex hull of the estimates and
    falls back to the plain spectrum when the hull is degenerate.
    """
    lam = np.asarray(lambdas, dtype=complex)
    if mode not in ("full", "hull"):
        raise ParameterError(f"unknown mode {mode!r}")
    used = mode
    if mode == "hull":
        try:
            hull = hull_of(lam)
            mom = hull_moments(hull)
            _hull_clusters_warning(lam, hull)
        except DegenerateHullError:
            warnings.warn("degenerate hull, using spectrum moments", RuntimeWarning, stacklevel=2)
            mom = moments_from_spectrum(lam)
            used = "full"
    else:
        mom = moments_from_spectrum(lam)
    lo, hi = quadratic_mean_bounds(mom.M1, max(mom.M2, 0.0))
    lam2 = select_lambda2(lam, zero_sep) if lam.size >= 2 else float("nan")
    lam_n = float(lam.real.max())
    if n >= 2:
        dmin, dmax = degree_bounds(lam2, lam_n, n)
    else:
        dmin = dmax = float("nan")
    return SpectralSummary(
        M1=mom.M1, M2=mom.M2, D1=mom.M1, D2_bounds=(lo, hi), lambda2=lam2,
        lambda_n=lam_n, dmin_bound=dmin, dmax_bound=dmax, mode=used, n=int(n),
        imag_residual=moment_imag_residual(lam),
    )


@dataclass(frozen=True, eq=False)
class Clustering:
    labels: np.ndarray
    scatter: float


def cluster_by_ratios(points, k, seed=0, restarts=50) -> Clustering:
    """k-means (k-means++ seeding) on the real parts of ratio vectors.

    ``points`` is an ``(n_nodes, d)`` array (typically ``d = 2``: ratios for
    the two leading non-trivial eigenvectors against a reference node).
    """
    from sklearn.cluster import KMeans

    X = np.real(np.asarray(points))
    if X.ndim == 1:
        X = X[:, None]
    if k < 1:
        raise ParameterError("k must be positive")
    if len(X) < k:
        raise ParameterError(f"{len(X)} points cannot form {k} clusters")
    if k == 1:
        return Clustering(np.zeros(len(X), dtype=int), float(np.sum((X - X.mean(0)) ** 2)))
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, random_state=seed).fit(X)
    return Clustering(km.labels_.astype(int), float(km.inertia_))
