import numpy as np
from scipy.optimize import linear_sum_assignment

from specnet.dynamics import UnitDynamics


def matched_distance(a, b):
    """Largest distance after optimally pairing two equal-size multisets."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def random_stable_unit(rng, m):
    # negative-definite symmetric part keeps the unit and the network stable
    P = rng.standard_normal((m, m))
    S = rng.standard_normal((m, m))
    A = -(P @ P.T / m + 0.5 * np.eye(m)) + 0.5 * (S - S.T)
    b = rng.standard_normal(m)
    return UnitDynamics(A, b, b)


def identifiable_case(rng, n=None, m=None, q=None, stride=1, extra_blocks=0, max_tries=500):
    """Random networked system whose delay embedding satisfies the exact-recovery setting.

    Draws until the N-block observability matrix is well conditioned and
    the discrete eigenvalues are separated, then simulates a noise-free
    trajectory with two sinusoidal inputs. ``extra_blocks`` over-embeds.
    Returns ``(system, plan, T, N, trajectory)``.
    """
    from scipy.linalg import expm

    from specnet.dynamics import MeasurementPlan, assemble, random_sinusoids, simulate
    from specnet.graph import generate_erdos_renyi

    for _ in range(max_tries):
        nn = n or int(rng.integers(2, 7))
        mm = m or int(rng.integers(1, 4))
        g = generate_erdos_renyi(nn, 0.7, (0.2, 1.0), seed=int(rng.integers(1 << 31)))
        unit = random_stable_unit(rng, mm)
        nm = nn * mm
        if q is None:
            qs = [d for d in range(1, nm + 1) if nm % d == 0 and nm // d >= 2] or [nm]
            qq = int(rng.choice(qs))
        else:
            qq = q
        if nm % qq:
            continue
        N = nm // qq
        plan = MeasurementPlan(tuple(divmod(int(i), mm) for i in rng.choice(nm, qq, replace=False)))
        sites = [(int(rng.integers(nn)), int(rng.integers(mm)), c) for c in range(2)]
        system = assemble(unit, g, sites, p=2)
        ev = np.linalg.eigvals(system.K)
        T = 0.5 / np.max(np.abs(ev))
        Kd = expm(system.K * T * stride)
        Q = plan.matrix(nn, mm)
        O = np.vstack([Q @ np.linalg.matrix_power(Kd, i) for i in range(N)])
        mt = np.exp(ev * T)
        sep = min((abs(a - b) for i, a in enumerate(mt) for b in mt[i + 1:]), default=1.0)
        if np.linalg.cond(O) > 1e3 or sep < 0.03:
            continue
        sig = random_sinusoids(2, (0.5, 1), (0.05, 0.5), seed=int(rng.integers(1 << 31)))
        Nt = N + extra_blocks
        steps = (Nt - 1) * stride + 1 + 3 * (nm + 2 * ((Nt - 1) * stride + 1)) + 40
        traj = simulate(system, sig, rng.standard_normal(nm), T, T * steps, plan)
        return system, plan, T, N, traj
    raise RuntimeError("no identifiable system found")


def white_noise_trajectory(system, plan, T, steps, seed):
    """Noise-free sampled response to a random piecewise-constant input."""
    from specnet.dynamics import InputSignal, simulate

    rng = np.random.default_rng(seed)
    sig = InputSignal(samples=rng.standard_normal((steps + 1, system.p)), sample_period=T)
    return simulate(system, sig, rng.standard_normal(system.K.shape[0]), T, T * steps, plan)
