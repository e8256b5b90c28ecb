"""Networked LTI systems, inputs, measurements and exact ZOH simulation.

Each node carries ``m`` states with identical dynamics ``(A, B, C)`` and
diffusive output coupling, giving the stacked system

    X' = K X + D u,    K = I_n (x) A - L (x) B C^T

where the state vector is node-major: entry ``node * m + state``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from .errors import DivergenceError, NumericalError, ParameterError
from .graph import WeightedDigraph, laplacian

_DIVERGENCE_LIMIT = 1e150


@dataclass(frozen=True, eq=False)
class UnitDynamics:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_1d(np.asarray(self.B, dtype=float)).ravel()
        C = np.atleast_1d(np.asarray(self.C, dtype=float)).ravel()
        m = A.shape[0]
        if A.shape != (m, m) or B.shape != (m,) or C.shape != (m,):
            raise ParameterError(
                f"inconsistent unit dimensions A{A.shape} B{B.shape} C{C.shape}")
        if not all(np.all(np.isfinite(M)) for M in (A, B, C)):
            raise ParameterError("unit matrices must be finite")
        for name, M in (("A", A), ("B", B), ("C", C)):
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def m(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class NetworkSystem:
    K: np.ndarray
    D: np.ndarray
    unit: UnitDynamics
    graph: WeightedDigraph

    @property
    def p(self) -> int:
        return self.D.shape[1]

    @property
    def dim(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True, eq=False)
class InputSignal:
    """Multichannel input ``u(t)``.

    Either a bank of sinusoids ``amplitude * sin(omega * t + phase)``
    (``omega`` in rad/s), or piecewise-constant ``samples`` held over
    ``sample_period`` (the last sample is held past the end).
    """

    amplitude: np.ndarray = field(default_factory=lambda: np.zeros(0))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phase: np.ndarray = field(default_factory=lambda: np.zeros(0))
    samples: np.ndarray | None = None
    sample_period: float | None = None

    def __post_init__(self):
        amp = np.atleast_1d(np.asarray(self.amplitude, dtype=float))
        om = np.atleast_1d(np.asarray(self.omega, dtype=float))
        ph = np.atleast_1d(np.asarray(self.phase, dtype=float))
        if not (amp.shape == om.shape == ph.shape):
            raise ParameterError("amplitude, omega and phase must have equal length")
        if np.any(amp < 0):
            raise ParameterError("amplitudes must be non-negative")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "phase", ph)
        if self.samples is not None:
            s = np.asarray(self.samples, dtype=float)
            if s.ndim == 1:
                s = s[:, None]
            if amp.size:
                raise ParameterError("use either sinusoids or samples, not both")
            if self.sample_period is None or self.sample_period <= 0:
                raise ParameterError("sampled input needs a positive sample_period")
            object.__setattr__(self, "samples", s)

    @classmethod
    def zero(cls, p: int) -> "InputSignal":
        return cls(np.zeros(p), np.zeros(p), np.zeros(p))

    @property
    def p(self) -> int:
        return self.samples.shape[1] if self.samples is not None else self.amplitude.size

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.samples is not None:
            idx = np.floor(t / self.sample_period + 1e-9).astype(int)
            idx = np.clip(idx, 0, len(self.samples) - 1)
            return self.samples[idx]
        return self.amplitude * np.sin(np.outer(t, self.omega) + self.phase)

    def to_dict(self) -> dict:
        if self.samples is not None:
            return {"samples": self.samples.tolist(), "sample_period": self.sample_period}
        return {"amplitude": self.amplitude.tolist(), "omega": self.omega.tolist(),
                "phase": self.phase.tolist()}


@dataclass(frozen=True)
class MeasurementPlan:
    """Rows of the selection matrix ``Q`` as ``(node, state)`` pairs."""

    selections: tuple

    def __post_init__(self):
        sel = tuple((int(a), int(b)) for a, b in self.selections)
        if not sel:
            raise ParameterError("measurement plan is empty")
        if len(set(sel)) != len(sel):
            raise ParameterError("duplicate measurement selection")
        object.__setattr__(self, "selections", sel)

    @classmethod
    def from_nodes(cls, nodes, states=(0,)) -> "MeasurementPlan":
        """Node-major Kronecker plan ``Q = Q1 (x) Q2``."""
        return cls(tuple((n, s) for n in nodes for s in states))

    @property
    def q(self) -> int:
        return len(self.selections)

    @property
    def factored_form(self):
        """``(nodes, states)`` if ``Q = Q1 (x) Q2`` in node-major order, else None."""
        nodes = list(dict.fromkeys(a for a, _ in self.selections))
        states = list(dict.fromkeys(b for _, b in self.selections))
        if tuple((a, b) for a in nodes for b in states) == self.selections:
            return tuple(nodes), tuple(states)
        return None

    def indices(self, m: int) -> np.ndarray:
        return np.array([node * m + s for node, s in self.selections], dtype=int)

    def matrix(self, n: int, m: int) -> np.ndarray:
        for node, s in self.selections:
            if not (0 <= node < n and 0 <= s < m):
                raise ParameterError(f"selection ({node}, {s}) outside n={n}, m={m}")
        Q = np.zeros((self.q, n * m))
        Q[np.arange(self.q), self.indices(m)] = 1.0
        return Q


@dataclass(frozen=True, eq=False)
class Trajectory:
    T: float
    samples: np.ndarray
    inputs: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.samples, dtype=float)
        u = np.asarray(self.inputs, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if u.ndim == 1:
            u = u[:, None]
        if self.T <= 0:
            raise ParameterError("sampling period must be positive")
        if z.shape[0] != u.shape[0]:
            raise ParameterError("samples and inputs must have equal row counts")
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "inputs", u)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.T * np.arange(len(self))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def q(self) -> int:
        return self.samples.shape[1]

    @property
    def p(self) -> int:
        return self.inputs.shape[1]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"z{i + 1}" for i in range(self.q)]
                   + [f"u{i + 1}" for i in range(self.p)])
        for t, z, u in zip(self.times, self.samples, self.inputs):
            w.writerow([format(v, ".17g") for v in (t, *z, *u)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text) -> "Trajectory":
        text = str(path_or_text)
        if "\n" not in text:
            text = Path(text).read_text()
        rows = list(csv.reader(io.StringIO(text)))
        header = [h.strip() for h in rows[0]]
        if not header or header[0] != "t":
            raise ParameterError("trajectory CSV must start with a 't' column")
        zcols = [i for i, h in enumerate(header) if h.startswith("z")]
        ucols = [i for i, h in enumerate(header) if h.startswith("u")]
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if data.shape[0] < 2:
            raise ParameterError("trajectory CSV needs at least two rows")
        t = data[:, 0]
        # first step only: the written grid is t0 + k*T, so this round-trips T
        T = float(t[1] - t[0])
        return cls(T=T, samples=data[:, zcols], inputs=data[:, ucols], t0=float(t[0]))


def assemble(unit: UnitDynamics, g: WeightedDigraph, input_sites=(), p=None) -> NetworkSystem:
    """Build ``K = I (x) A - L (x) B C^T`` and the input map ``D``.

    ``input_sites`` holds ``(node, state, channel)`` triples; each puts a
    unit entry at row ``node * m + state``, column ``channel``.
    """
    n, m = g.n, unit.m
    L = laplacian(g).matrix
    K = np.kron(np.eye(n), unit.A) - np.kron(L, np.outer(unit.B, unit.C))
    sites = [tuple(int(v) for v in s) for s in input_sites]
    if p is None:
        p = 1 + max((c for _, _, c in sites), default=-1)
    D = np.zeros((n * m, p))
    for node, state, ch in sites:
        if not (0 <= node < n and 0 <= state < m and 0 <= ch < p):
            raise ParameterError(f"input site {(node, state, ch)} out of range")
        D[node * m + state, ch] = 1.0
    return NetworkSystem(K=K, D=D, unit=unit, graph=g)


def block_input_sites(n, p, state=0):
    """Split nodes into ``p`` contiguous blocks, channel ``c`` driving block ``c``."""
    blocks = np.array_split(np.arange(n), p)
    return [(int(node), state, c) for c, b in enumerate(blocks) for node in b]


def zoh_discretize(K, D, T):
    """Exact zero-order-hold discretisation via one augmented exponential.

    Returns ``(expm(K T), int_0^T expm(K s) ds @ D)``; valid for singular K.
    """
    if T <= 0:
        raise ParameterError("T must be positive")
    K = np.atleast_2d(np.asarray(K, dtype=float))
    D = np.asarray(D, dtype=float).reshape(K.shape[0], -1)
    d, p = D.shape
    aug = np.zeros((d + p, d + p))
    aug[:d, :d] = K
    aug[:d, d:] = D
    E = expm(aug * T)
    if not np.all(np.isfinite(E)):
        raise NumericalError("matrix exponential overflowed")
    return E[:d, :d], E[:d, d:]


def zoh_step_matrices(system: NetworkSystem, T: float):
    return zoh_discretize(system.K, system.D, T)


def check_sampling(K, T):
    """Raise if ``T`` aliases the oscillatory part of ``eig(K)``."""
    top = np.max(np.abs(np.linalg.eigvals(K).imag), initial=0.0)
    if top * T >= np.pi:
        raise ParameterError(
            f"sampling period {T} aliases modes with |Im mu| = {top:.4g} (need T*|Im mu| < pi)")


def simulate(system: NetworkSystem, signal: InputSignal, x0, T, t_end,
             plan: MeasurementPlan | None = None) -> Trajectory:
    """Sample the system every ``T`` seconds on ``[0, t_end]``.

    The input is held at its value at the left end of each period, so the
    recursion ``X_{k+1} = Kd X_k + Dd u_k`` is exact for such inputs.
    With ``plan=None`` every state is recorded.
    """
    if T <= 0:
        raise ParameterError("T must be positive")
    steps = t_end / T
    ks = int(round(steps))
    if abs(steps - ks) > 1.0 or ks < 1:
        raise ParameterError("t_end must be a positive multiple of T")
    if signal.p != system.p:
        raise ParameterError(f"signal has {signal.p} channels, system expects {system.p}")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (system.dim,) or not np.all(np.isfinite(x)):
        raise ParameterError("x0 must be a finite vector of length n*m")
    check_sampling(system.K, T)

    Kd, Dd = zoh_step_matrices(system, T)
    n, m = system.graph.n, system.unit.m
    idx = np.arange(system.dim) if plan is None else plan.indices(m)
    if plan is not None:
        plan.matrix(n, m)  # range check

    t = T * np.arange(ks + 1)
    u = signal(t) if system.p else np.zeros((ks + 1, 0))
    drive = u @ Dd.T
    z = np.empty((ks + 1, idx.size))
    for k in range(ks + 1):
        z[k] = x[idx]
        x = Kd @ x + drive[k]
        if not np.all(np.abs(x) < _DIVERGENCE_LIMIT):
            raise DivergenceError(k + 1)
    return Trajectory(T=T, samples=z, inputs=u)


def random_sinusoids(p, amp_range=(0.0, 1.0), freq_range=(0.0, 1.0), seed=0) -> InputSignal:
    """``p`` sinusoids with uniform amplitude, frequency (Hz) and phase."""
    a0, a1 = map(float, amp_range)
    f0, f1 = map(float, freq_range)
    if a1 < a0 or f1 < f0:
        raise ParameterError("empty amplitude or frequency range")
    if a0 < 0:
        raise ParameterError("amplitudes must be non-negative")
    rng = np.random.default_rng(seed)
    amp = rng.uniform(a0, a1, p)
    freq = rng.uniform(f0, f1, p)
    phase = rng.uniform(0.0, 2 * np.pi, p)
    return InputSignal(amp, 2 * np.pi * freq, phase)


def random_initial_state(dim, seed=0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(dim)
