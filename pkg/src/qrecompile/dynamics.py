"""Ground truth and baselines for the 7-spin benchmark system.

Exact evolution is e^{-iHt} via dense Hermitian eigendecomposition (cached
per Hamiltonian).  Trotter circuits place one rotation per Hamiltonian term
and cycle, with the angle of term j set to 2 * C_j * t / q; the alternating
ordering reverses the gate order of every second cycle.  The real-time
variational baseline evolves the same layout's angles freely under the
McLachlan equations.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import mclachlan
from .circuits import Circuit, Gate, apply_circuit
from .mclachlan import EvolutionConfig, EvolutionTrace, SolverConfig
from .paulis import PauliSum, StateVector, dense_matrix, fidelity, init_basis_state

DEFAULT_REALTIME_STEP = 2.5e-3


@dataclass(frozen=True)
class SpinSystem:
    """A spin-network Hamiltonian together with its benchmark initial state."""

    h_sys: PauliSum
    input_spec: str

    @property
    def n_qubits(self):
        return len(self.input_spec)

    @property
    def n_terms(self):
        return len(self.h_sys.terms)

    def input_state(self):
        return init_basis_state(self.input_spec)

    def validate_signs(self):
        """The bundled network has negative local fields and positive couplings."""
        for coeff, string in self.h_sys.terms:
            if string.weight == 1 and coeff >= 0:
                raise ValueError(f"local field {string.label()} must be negative, got {coeff}")
            if string.weight == 2 and coeff <= 0:
                raise ValueError(f"coupling {string.label()} must be positive, got {coeff}")
        return self


@dataclass(frozen=True)
class TrotterSpec:
    cycles: int
    time: float
    ordering: str = "fixed"

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError("need at least one Trotter cycle")
        if self.ordering not in ("fixed", "alternating"):
            raise ValueError(f"unknown ordering {self.ordering!r}")


@lru_cache(maxsize=16)
def _eigensystem(h, n_qubits):
    w, vectors = np.linalg.eigh(dense_matrix(h, n_qubits))
    w.flags.writeable = False
    vectors.flags.writeable = False
    return w, vectors


def exact_evolve(h, state, t):
    """e^{-iHt}|s> by dense eigendecomposition; n_qubits <= 12."""
    if state.n_qubits > 12:
        raise ValueError(f"dense evolution limited to 12 qubits, got {state.n_qubits}")
    w, vectors = _eigensystem(h, state.n_qubits)
    phases = np.exp(-1j * w * t)
    amps = vectors @ (phases * (vectors.conj().T @ state.amplitudes))
    return StateVector(state.n_qubits, amps)


def _cycle_gates(sys, first_param):
    gates = []
    k = first_param
    for _, string in sys.h_sys.terms:
        gates.append(Gate(string, param=k))
        k += 1
    return gates, k


def build_trotter_circuit(sys, spec):
    """q cycles of one bound rotation per term; returns (circuit, angle values).

    Angles follow theta_j = 2 * C_j * t / q.  Alternating ordering reverses
    the gate order (with their parameter slots) in every second cycle.
    """
    gates = []
    values = []
    k = 0
    for cycle in range(spec.cycles):
        block, k = _cycle_gates(sys, k)
        block_values = [2.0 * coeff * spec.time / spec.cycles for coeff, _ in sys.h_sys.terms]
        if spec.ordering == "alternating" and cycle % 2 == 1:
            block = list(reversed(block))
            block_values = list(reversed(block_values))
        gates.extend(block)
        values.extend(block_values)
    circuit = Circuit(sys.n_qubits, tuple(gates), k)
    params = np.zeros(k)
    for gate, value in zip(gates, values):
        params[gate.param] = value
    return circuit, params


def append_trotter_cycles(circuit, params, sys, k):
    """Paste k blank cycles (fresh bound slots at 1e-8) after an existing circuit."""
    gates = list(circuit.gates)
    slot = circuit.n_params
    for _ in range(k):
        block, slot = _cycle_gates(sys, slot)
        gates.extend(block)
    new_params = np.concatenate([np.asarray(params, dtype=float), np.full(slot - circuit.n_params, 1e-8)])
    return Circuit(circuit.n_qubits, tuple(gates), slot), new_params


def li_realtime(circuit, params0, sys, t_final, dt=DEFAULT_REALTIME_STEP, solver=None, global_phase=True):
    """Free real-time evolution of the circuit angles against the system Hamiltonian.

    Logs, at every step, the fidelity between the circuit state and the
    exactly evolved state at the same time.  ``t_final`` must be an integer
    number of steps.
    """
    steps = round(t_final / dt)
    if abs(steps * dt - t_final) > 1e-9:
        raise ValueError(f"t_final={t_final} is not an integer multiple of dt={dt}")
    solver = solver or SolverConfig.default_for_mode(mclachlan.REALTIME)
    cfg = EvolutionConfig(
        mode=mclachlan.REALTIME,
        step=dt,
        max_iterations=steps,
        convergence_window=0,  # run the full horizon; realtime does not converge
        global_phase=global_phase,
    )
    in_state = sys.input_state()

    def callback(iteration, params, psi):
        t = iteration * dt
        reference = exact_evolve(sys.h_sys, in_state, t)
        overlap = abs(np.vdot(reference.amplitudes, psi)) ** 2
        return {"t": t, "fidelity": float(min(overlap, 1.0))}

    return mclachlan.evolve(circuit, params0, tuple(range(circuit.n_params)), in_state, sys.h_sys, cfg, solver, callback=callback)


def trotter_fidelity(sys, spec):
    """Fidelity of the Trotter circuit against exact evolution at spec.time."""
    circuit, params = build_trotter_circuit(sys, spec)
    in_state = sys.input_state()
    produced = apply_circuit(circuit, params, in_state)
    reference = exact_evolve(sys.h_sys, in_state, spec.time)
    return fidelity(produced, reference)


def sum_params_by_term(trajectory, sys, q):
    """Per-term sums of the q cycle angles, one row per trajectory entry.

    Assumes the fixed q-cycle layout (parameter slot k belongs to term
    k mod n_terms).  Returns (labels, sums) with sums shaped
    (n_rows, n_terms); for a fixed-Trotter parameter vector the sums equal
    2 * C_j * t exactly.
    """
    n_terms = sys.n_terms
    rows = trajectory.params if isinstance(trajectory, EvolutionTrace) else list(trajectory)
    sums = np.empty((len(rows), n_terms))
    for i, params in enumerate(rows):
        params = np.asarray(params, dtype=float)
        if params.shape != (n_terms * q,):
            raise ValueError(f"expected {n_terms * q} parameters for the {q}-cycle layout, got {params.shape}")
        sums[i] = params.reshape(q, n_terms).sum(axis=0)
    labels = [string.label() for _, string in sys.h_sys.terms]
    return labels, sums
