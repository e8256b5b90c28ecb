"""
Moments of a partially recovered spectrum
=========================================

When only part of a large spectrum is recovered, a uniform density on
the convex hull of the estimates stands in for the whole spectrum.
"""
import numpy as np

from specnet.analysis import hull_moments, hull_of, moments_from_spectrum, summarize

rng = np.random.default_rng(0)
lam = np.concatenate([[0.0], rng.uniform(0.2, 1.0, 40) + 1j * rng.uniform(-0.1, 0.1, 40)])
lam = np.concatenate([lam, lam[1:].conj()])

hull = hull_of(lam)
print("hull vertices:", len(hull.vertices), "area:", round(hull.signed_area, 4))
print("hull moments:    ", hull_moments(hull))
print("discrete moments:", moments_from_spectrum(lam))

s = summarize(lam, n=81, mode="hull")
print("summary:", s.to_json())
