"""
Simulating a network of identical linear units
==============================================

Couple two-state units over a graph, inject sinusoidal inputs at a few
sites and sample the measured outputs with a zero-order hold.
"""
import numpy as np

from specnet.dynamics import MeasurementPlan, UnitDynamics, assemble, random_sinusoids, simulate
from specnet.graph import generate_erdos_renyi

unit = UnitDynamics(np.array([[-1.0, -2.0], [1.0, -1.0]]), np.array([1.0, 2.0]), np.array([1.0, 1.0]))
g = generate_erdos_renyi(6, 0.5, (0.5, 1.5), seed=4)

# input channel c drives state s of node i for every site (i, s, c)
system = assemble(unit, g, [(0, 1, 0), (3, 0, 1)], p=2)
print("network dimension:", system.dim, "inputs:", system.p)
print("slowest and fastest modes:", np.sort(np.linalg.eigvals(system.K).real)[[-1, 0]])

signal = random_sinusoids(2, (0.5, 1.0), (0.1, 1.0), seed=5)
plan = MeasurementPlan.from_nodes([1, 2], states=[0])
traj = simulate(system, signal, np.zeros(system.dim), T=0.01, t_end=5.0, plan=plan)
print("samples:", len(traj), "measured signals:", traj.q)
print(traj.to_csv().splitlines()[0])
