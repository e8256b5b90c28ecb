"""
Exact spectrum recovery from delay-embedded measurements
========================================================

With noise-free data and enough delay blocks, the fitted state matrix
reproduces the discrete-time spectrum of the full network from only a
few measured states.
"""
import numpy as np
from scipy.linalg import expm

from specnet.dmdc import EmbeddingConfig, companion_structure_check, dmdc
from specnet.dynamics import MeasurementPlan, UnitDynamics, assemble, random_sinusoids, simulate
from specnet.graph import generate_erdos_renyi

unit = UnitDynamics(np.array([[-1.0]]), np.array([1.0]), np.array([1.0]))
g = generate_erdos_renyi(4, 0.8, (0.2, 1.0), seed=3)
system = assemble(unit, g, [(0, 0, 0), (2, 0, 1)], p=2)

# two measured nodes and two delay blocks cover the four states
plan = MeasurementPlan.from_nodes([0, 1])
T = 0.05
traj = simulate(system, random_sinusoids(2, (0.5, 1), (0.05, 0.5), seed=1),
                np.ones(4), T, 6.0, plan)

res = dmdc(traj, EmbeddingConfig(N=2, delta=T))
exact = np.sort_complex(np.linalg.eigvals(expm(system.K * T)))
print("fitted: ", np.round(np.sort_complex(res.eigenvalues), 8))
print("exact:  ", np.round(exact, 8))
print("companion deviation:", companion_structure_check(res).max_deviation)
