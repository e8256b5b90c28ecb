"""
Random graphs and their Laplacian spectra
=========================================

Draw the graph families used by the bundled scenarios and look at the
degree statistics next to the spectral quantities that bound them.
"""
import numpy as np

from specnet.analysis import degree_bounds, moments_from_spectrum, quadratic_mean_bounds
from specnet.graph import (degree_stats, exact_spectrum, generate_erdos_renyi,
                           generate_planted_partition, laplacian)

# a small undirected Erdos-Renyi graph with unit weights
g = generate_erdos_renyi(12, 0.4, (1, 1), directed=False, seed=1)
lam = np.sort(exact_spectrum(laplacian(g))[0].real)
print("eigenvalues:", np.round(lam, 3))

# the mean degree is the first spectral moment
M = moments_from_spectrum(lam)
ds = degree_stats(g)
print(f"mean degree {ds.mean_degree:.3f}, M1 {M.M1:.3f}")

# the quadratic mean of the degrees is sandwiched by the first two moments
lo, hi = quadratic_mean_bounds(M.M1, M.M2)
print(f"{lo:.3f} <= mean squared degree {ds.mean_sq_degree:.3f} <= {hi:.3f}")

# extreme degrees are bounded by lambda_2 and lambda_n
dmin, dmax = degree_bounds(lam[1], lam[-1], g.n)
print(f"d_min {ds.d_min:.0f} >= {dmin:.3f}, d_max {ds.d_max:.0f} <= {dmax:.3f}")

# a planted partition carries ground-truth cluster labels
pp = generate_planted_partition(3, 10, 0.6, 0.05, (0, 0.1), seed=2)
print("cluster sizes:", np.bincount(pp.labels))
