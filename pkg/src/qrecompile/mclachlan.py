"""Variational evolution: build and solve M lambda-dot = V.

M is the Gram matrix of parameter-derivative states, 2 Re <d_k psi | d_q psi>.
The vector V is mode dependent:

  realtime   V_k = +2 Im <d_k psi | H | psi>   (Schroedinger projection)
  imaginary  V_k = -2 Re <d_k psi | H | psi>   (normalised exp(-H tau) flow)

An optional virtual global-phase parameter g with d|psi>/dg = i|psi> is
appended as a trailing row/column; its rate is solved for and discarded,
which removes the spurious sensitivity of the projection to global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import apply_circuit, state_and_derivatives, state_derivative
from .paulis import pauli_sum_action

REALTIME = "realtime"
IMAGINARY = "imaginary"

TSVD = "tsvd"
TIKHONOV = "tikhonov"
LSTSQ = "lstsq"


@dataclass(frozen=True)
class SolverConfig:
    """Regularised solver for the update equations.

    tsvd drops relative singular values below ``tsvd_tol``; tikhonov picks
    the candidate lambda at the corner (maximum Menger curvature) of the
    3-point log-log L-curve; lstsq is the minimum-norm least-squares fit.
    """

    method: str = TSVD
    tsvd_tol: float = 1e-5
    tikhonov_lambdas: tuple[float, ...] = (1e-5, 1e-3, 1e-1)

    def __post_init__(self):
        if self.method not in (TSVD, TIKHONOV, LSTSQ):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.tsvd_tol <= 0:
            raise ValueError("tsvd tolerance must be positive")
        if len(self.tikhonov_lambdas) < 3:
            raise ValueError("tikhonov needs at least three candidate lambdas")

    @classmethod
    def default_for_mode(cls, mode):
        return cls(method=TIKHONOV if mode == REALTIME else TSVD)


@dataclass(frozen=True)
class EvolutionConfig:
    mode: str
    step: float
    max_iterations: int = 5000
    convergence_window: int = 50
    convergence_tol: float = 1e-6
    global_phase: bool = True
    derivative_method: str = "analytic"

    def __post_init__(self):
        if self.mode not in (REALTIME, IMAGINARY):
            raise ValueError(f"unknown evolution mode {self.mode!r}")
        if self.step <= 0:
            raise ValueError("step must be positive")


@dataclass(frozen=True)
class LinearSystem:
    """The real P x P system; a trailing global-phase row/column is optional."""

    m: np.ndarray
    v: np.ndarray
    indices: tuple[int, ...]
    has_global_phase: bool

    @property
    def size(self):
        return self.v.shape[0]


@dataclass
class SolveInfo:
    rank: int
    truncated_all: bool = False
    chosen_lambda: float | None = None


def _assemble(circuit, params, free, state, h, cfg):
    """Shared builder returning the system plus the state and H|psi>."""
    free = tuple(sorted(free))
    if any(k < 0 or k >= circuit.n_params for k in free):
        raise IndexError(f"free indices {free} out of range for {circuit.n_params} parameters")
    if cfg.derivative_method == "fd4":
        cols = [state_derivative(circuit, params, state, k, method="fd4") for k in free]
        psi = apply_circuit(circuit, params, state).amplitudes
        d = np.stack(cols, axis=1) if cols else np.zeros((state.dim, 0), dtype=complex)
    else:
        psi, d = state_and_derivatives(circuit, params, state, free)
    if cfg.global_phase:
        d = np.concatenate([d, 1j * psi[:, None]], axis=1)
    m = 2.0 * np.real(d.conj().T @ d)
    h_psi = pauli_sum_action(h, psi, circuit.n_qubits)
    overlaps = d.conj().T @ h_psi
    if cfg.mode == REALTIME:
        v = 2.0 * np.imag(overlaps)
    else:
        v = -2.0 * np.real(overlaps)
    system = LinearSystem(m, v, free, cfg.global_phase)
    energy = float(np.real(np.vdot(psi, h_psi)))
    return system, psi, energy


def build_system(circuit, params, free, state, h, cfg):
    system, _, _ = _assemble(circuit, params, free, state, h, cfg)
    return system


def _menger_curvature(p1, p2, p3):
    area2 = abs((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1]))
    a = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    b = math.hypot(p3[0] - p2[0], p3[1] - p2[1])
    c = math.hypot(p3[0] - p1[0], p3[1] - p1[1])
    return 0.0 if a * b * c == 0.0 else 2.0 * area2 / (a * b * c)


def solve(system, solver):
    """Rate vector for M x = V under the configured regularisation."""
    m, v = system.m, system.v
    if m.shape[0] != m.shape[1] or v.shape[0] != m.shape[0]:
        raise ValueError(f"shape mismatch: M {m.shape}, V {v.shape}")
    if system.size == 0:
        return np.zeros(0), SolveInfo(rank=0, truncated_all=True)
    if solver.method == TSVD:
        u, sig, vt = np.linalg.svd(m)
        cutoff = solver.tsvd_tol * (sig[0] if sig.size else 0.0)
        keep = sig >= max(cutoff, 0.0)
        if not keep.any() or sig[0] == 0.0:
            return np.zeros_like(v), SolveInfo(rank=0, truncated_all=True)
        inv = np.where(keep, 1.0 / np.where(keep, sig, 1.0), 0.0)
        return vt.T @ (inv * (u.T @ v)), SolveInfo(rank=int(keep.sum()))
    if solver.method == TIKHONOV:
        # symmetric PSD M: minimiser of  |Mx-V|^2 + lam^2 |x|^2  via eigenbasis
        mu, q = np.linalg.eigh(m)
        qtv = q.T @ v
        points, solutions = [], []
        for lam in solver.tikhonov_lambdas:
            x = q @ (mu / (mu**2 + lam**2) * qtv)
            resid = float(np.linalg.norm(m @ x - v))
            points.append((math.log(max(resid, 1e-300)), math.log(max(float(np.linalg.norm(x)), 1e-300))))
            solutions.append(x)
        best, best_curv = 1, -1.0
        for i in range(1, len(points) - 1):
            curv = _menger_curvature(points[i - 1], points[i], points[i + 1])
            if curv > best_curv:
                best_curv, best = curv, i
        lam = solver.tikhonov_lambdas[best]
        return solutions[best], SolveInfo(rank=system.size, chosen_lambda=lam)
    x, _, rank, _ = np.linalg.lstsq(m, v, rcond=None)
    return x, SolveInfo(rank=int(rank))


@dataclass
class StepInfo:
    energy: float
    rate_norm: float
    solve: SolveInfo


def step(circuit, params, free, state, h, cfg, solver, pinned=None):
    """One update p <- p + rate * step; pinned slots advance at forced rates.

    Pinned columns are moved to the right-hand side (V <- V - M[:, j] * rate_j)
    and excluded from the solve.  The global-phase rate, when present, is
    solved for but never applied to any circuit parameter.
    """
    pinned = dict(pinned or {})
    free = tuple(sorted(free))
    if any(j not in free for j in pinned):
        raise ValueError("pinned parameters must be a subset of the free set")
    system, _, energy = _assemble(circuit, params, free, state, h, cfg)
    m, v = system.m, system.v
    pos = {k: i for i, k in enumerate(free)}
    for j, rate in pinned.items():
        v = v - m[:, pos[j]] * rate
    keep = [i for i, k in enumerate(free) if k not in pinned]
    cols = keep + ([len(free)] if cfg.global_phase else [])
    reduced = LinearSystem(m[np.ix_(cols, cols)], v[cols], tuple(free[i] for i in keep), cfg.global_phase)
    rates, info = solve(reduced, solver)
    new_params = np.array(params, dtype=float)
    for i, col in enumerate(keep):
        new_params[free[col]] += cfg.step * rates[i]
    for j, rate in pinned.items():
        new_params[j] += cfg.step * rate
    full_rates = np.zeros(len(free))
    for i, col in enumerate(keep):
        full_rates[col] = rates[i]
    for j, rate in pinned.items():
        full_rates[pos[j]] = rate
    return new_params, StepInfo(energy=energy, rate_norm=float(np.linalg.norm(full_rates)), solve=info)


@dataclass
class EvolutionTrace:
    """Per-iteration record of an evolve run; one row per evaluated state."""

    iterations: list[int] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    params: list[np.ndarray] = field(default_factory=list)
    extras: dict[str, list[float]] = field(default_factory=dict)
    converged: bool = False
    fatal: str | None = None

    def append(self, iteration, energy, params, extra=None):
        self.iterations.append(int(iteration))
        self.energies.append(float(energy))
        self.params.append(np.array(params, dtype=float))
        for key, value in (extra or {}).items():
            self.extras.setdefault(key, []).append(float(value))

    def __len__(self):
        return len(self.iterations)

    @property
    def final_params(self):
        return self.params[-1]

    @property
    def final_energy(self):
        return self.energies[-1]


def evolve(circuit, params0, free, state, h, cfg, solver=None, callback=None, halt=None):
    """Iterate ``step`` until convergence, the iteration cap, or ``halt`` fires.

    Convergence: |E_now - E_{now-window}| < tol once the window is full.
    ``callback(iteration, params, psi)`` may return extra trace columns.
    ``halt(energy)`` stops the run early (used by staged schedules).
    A non-finite energy is recorded as fatal and ends the run.
    """
    solver = solver or SolverConfig.default_for_mode(cfg.mode)
    params = np.array(params0, dtype=float)
    free = tuple(sorted(free))
    trace = EvolutionTrace()
    for it in range(cfg.max_iterations + 1):
        system, psi, energy = _assemble(circuit, params, free, state, h, cfg)
        extra = callback(it, params, psi) if callback is not None else None
        trace.append(it, energy, params, extra)
        if not math.isfinite(energy):
            trace.fatal = f"non-finite energy at iteration {it}"
            break
        if halt is not None and halt(energy):
            trace.converged = True
            break
        w = cfg.convergence_window
        if w and len(trace) > w and abs(trace.energies[-1] - trace.energies[-1 - w]) < cfg.convergence_tol:
            trace.converged = True
            break
        if it == cfg.max_iterations:
            break
        rates, _ = solve(system, solver)
        params = params.copy()
        for i, k in enumerate(free):
            params[k] += cfg.step * rates[i]
    return trace
