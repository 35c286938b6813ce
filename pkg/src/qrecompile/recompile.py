"""Recompile a fixed circuit into a user template by imaginary-time descent.

The ansatz is the source circuit (frozen angles) followed by the gate-by-gate
inverse of the template.  Driving the ansatz output to the ground state of a
constructed Hamiltonian whose unique ground state is the input state makes
the template reproduce the source's action on that input.  Optional
post-passes: greedy gate elimination under a defect budget, and a staged
"lure" schedule that scales the source towards identity to dodge plateaus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import circuits, mclachlan
from .circuits import Circuit, bind_params, concat, inverse, scale_fixed_angles
from .mclachlan import EvolutionConfig, EvolutionTrace, SolverConfig
from .paulis import PauliString, PauliSum, dense_matrix, fidelity, init_basis_state, pauli_sum_action

INITIAL_PARAM = 1e-8  # avoids a singular first iteration at the exact identity

_FIELD_TERMS = {"0": ("Z", -1.0), "1": ("Z", 1.0), "+": ("X", -1.0), "-": ("X", 1.0)}


def local_field_hamiltonian(spec):
    """Sum of single-qubit fields whose unique ground state is the product state ``spec``.

    Ground energy is -n and the first excited level sits at -n + 2.
    """
    terms = []
    for q, ch in enumerate(spec):
        if ch not in _FIELD_TERMS:
            raise ValueError(f"invalid basis symbol {ch!r} at position {q}")
        axis, sign = _FIELD_TERMS[ch]
        terms.append((sign, PauliString.single(q, axis)))
    return PauliSum.of(terms)


def projector_hamiltonian(spec):
    """1 - |spec><spec| as a PauliSum (2**n terms); ground energy 0, gap 1."""
    n = len(spec)
    if n > 10:
        raise ValueError(f"projector expansion limited to 10 qubits, got {n}")
    axes = {}
    signs = {}
    for q, ch in enumerate(spec):
        if ch not in _FIELD_TERMS:
            raise ValueError(f"invalid basis symbol {ch!r} at position {q}")
        axis, sign = _FIELD_TERMS[ch]
        axes[q], signs[q] = axis, -sign  # projector wants +P for '0'/'+' eigenstates
    terms = [(1.0 - 0.5**n, PauliString())]
    for mask in range(1, 1 << n):
        qs = [q for q in range(n) if (mask >> q) & 1]
        coeff = -(0.5**n) * math.prod(signs[q] for q in qs)
        terms.append((coeff, PauliString.of((q, axes[q]) for q in qs)))
    return PauliSum.of(terms)


@dataclass(frozen=True)
class RecompileJob:
    """A fully specified recompilation problem.

    ``source`` must carry only fixed angles; ``template`` only bound slots.
    ``e0``/``e1`` are the two lowest eigenvalues of ``h_rec`` found by dense
    diagonalisation at construction.
    """

    source: Circuit
    input_spec: str
    template: Circuit
    h_rec: PauliSum
    e0: float
    e1: float
    evolution: EvolutionConfig
    solver: SolverConfig

    @classmethod
    def create(cls, source, input_spec, template, h_rec, evolution=None, solver=None):
        if source.n_qubits != template.n_qubits:
            raise ValueError(f"source has {source.n_qubits} qubits, template {template.n_qubits}")
        if len(input_spec) != source.n_qubits:
            raise ValueError(f"input spec {input_spec!r} does not match {source.n_qubits} qubits")
        if any(g.is_bound for g in source.gates):
            raise ValueError("source circuit must have fixed angles only")
        if any(not g.is_bound for g in template.gates):
            raise ValueError("template must consist of bound gates only (identity at zero)")
        evolution = evolution or EvolutionConfig(mode=mclachlan.IMAGINARY, step=1e-2)
        solver = solver or SolverConfig.default_for_mode(evolution.mode)
        eigenvalues = np.linalg.eigvalsh(dense_matrix(h_rec, source.n_qubits))
        e0, e1 = float(eigenvalues[0]), float(eigenvalues[1])
        if not e0 < e1:
            raise ValueError(f"ground energy {e0} is degenerate with the first excited level")
        return cls(source, input_spec, template, h_rec, e0, e1, evolution, solver)

    def input_state(self):
        return init_basis_state(self.input_spec)

    def source_output(self):
        return circuits.apply_circuit(self.source, np.zeros(0), self.input_state())


def fidelity_bound(energy, e0, e1):
    """Lower bound on recompilation fidelity from a measured energy."""
    if not e1 > e0:
        raise ValueError(f"need e1 > e0, got e0={e0} e1={e1}")
    return float(min(max((e1 - energy) / (e1 - e0), 0.0), 1.0))


def build_ansatz(job):
    """Source (fixed) followed by the inverted template; returns (circuit, initial params)."""
    ansatz = concat(job.source, inverse(job.template))
    return ansatz, np.full(job.template.n_params, INITIAL_PARAM)


@dataclass
class RecompileResult:
    phi: np.ndarray
    trace: EvolutionTrace
    circuit: Circuit  # template with the final angles frozen in
    job: RecompileJob
    converged: bool
    stalled_stages: tuple[int, ...] = ()

    @property
    def energy(self):
        return self.trace.final_energy

    @property
    def defect(self):
        return self.trace.final_energy - self.job.e0


def _trace_callback(job, stage=1.0, source=None):
    in_state = job.input_state()
    target = (
        circuits.apply_circuit(source, np.zeros(0), in_state)
        if source is not None
        else job.source_output()
    )
    template = job.template

    def callback(iteration, params, psi):
        # psi is the ansatz output B^-1(phi) A |in>; its overlap with |in> gives
        # the same fidelity as between B(phi)|in> and A|in> (checked in tests).
        ansatz_fid = abs(np.vdot(in_state.amplitudes, psi)) ** 2
        forward = circuits.apply_circuit(template, params, in_state)
        fid = fidelity(forward, target)
        return {
            "bound": fidelity_bound(_real_energy(psi, job), job.e0, job.e1),
            "fidelity": fid,
            "fidelity_ansatz": float(ansatz_fid),
            "stage": stage,
        }

    return callback


def _real_energy(psi, job):
    return float(np.real(np.vdot(psi, pauli_sum_action(job.h_rec, psi, job.template.n_qubits))))


def recompile(job, params0=None, free=None):
    """Imaginary-time minimisation of <h_rec> over the template parameters."""
    ansatz, p0 = build_ansatz(job)
    if params0 is not None:
        p0 = np.array(params0, dtype=float)
    free = tuple(range(job.template.n_params)) if free is None else tuple(free)
    trace = mclachlan.evolve(
        ansatz,
        p0,
        free,
        job.input_state(),
        job.h_rec,
        job.evolution,
        job.solver,
        callback=_trace_callback(job),
    )
    phi = trace.final_params
    return RecompileResult(
        phi=phi,
        trace=trace,
        circuit=bind_params(job.template, phi),
        job=job,
        converged=trace.converged and trace.fatal is None,
    )


@dataclass(frozen=True)
class EliminationConfig:
    """Budget for the gate-elimination post-pass.

    The energy defect may grow to ``defect_factor`` times the entry defect
    (or ``baseline_defect`` when given); each driven parameter moves at most
    ``max_step`` radians per iteration.
    """

    defect_factor: float = 2.0
    max_step: float = 0.1
    baseline_defect: float | None = None

    def __post_init__(self):
        if self.defect_factor <= 1.0:
            raise ValueError("defect_factor must exceed 1")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")


@dataclass
class EliminationResult:
    circuit: Circuit  # reduced template, bound slots re-indexed
    params: np.ndarray  # final angles for the surviving slots
    removed: tuple[tuple[int, int], ...]  # (iteration, original slot) per removal
    trace: EvolutionTrace
    reverted_param: int | None = None  # slot whose elimination broke the budget
    no_op: bool = False


def _strip_params(template, params, removed):
    """Drop every gate bound to a removed slot and re-index the survivors."""
    removed = set(removed)
    keep = [k for k in range(template.n_params) if k not in removed]
    new_index = {k: i for i, k in enumerate(keep)}
    gates = tuple(
        circuits.Gate(g.generator, new_index[g.param], None, g.control, g.sign)
        for g in template.gates
        if g.param not in removed
    )
    return Circuit(template.n_qubits, gates, len(keep)), np.array([params[k] for k in keep])


def eliminate_gates(result, job, cfg=EliminationConfig()):
    """Greedy near-identity gate removal under an energy-defect budget.

    Repeatedly picks the free parameter closest to an identity multiple,
    drives it there under pinned imaginary-time flow (everything else keeps
    relaxing), then deletes its gates.  Stops once a removal would leave the
    defect above ``defect_factor`` times the baseline; that removal is
    reverted.  Angles parked at 2*pi*k are removed outright, which only
    shifts the global phase.
    """
    template = job.template
    ansatz, _ = build_ansatz(job)
    params = np.array(result.phi, dtype=float)
    in_state = job.input_state()
    gate_of = {}
    for g in template.gates:
        gate_of.setdefault(g.param, g)

    def measure(p):
        psi, _ = circuits.state_and_derivatives(ansatz, p, in_state, free=())
        return _real_energy(psi, job), abs(np.vdot(in_state.amplitudes, psi)) ** 2

    energy, fid = measure(params)
    d0 = cfg.baseline_defect if cfg.baseline_defect is not None else energy - job.e0
    budget = cfg.defect_factor * d0
    trace = EvolutionTrace()
    iteration = 0
    trace.append(iteration, energy, params, {"defect": energy - job.e0, "fidelity": fid, "removed": -1.0})
    if energy - job.e0 > budget:
        reduced, kept = _strip_params(template, params, [])
        return EliminationResult(reduced, kept, (), trace, no_op=True)

    free = list(range(template.n_params))
    removed: list[tuple[int, int]] = []
    reverted = None
    while free:
        j = min(free, key=lambda k: circuits.gate_distance_to_identity(gate_of[k], params[k]))
        target = circuits.nearest_identity_angle(gate_of[j], params[j])
        backup = params.copy()
        while abs(params[j] - target) > 1e-12:
            delta = math.copysign(min(abs(params[j] - target), cfg.max_step), target - params[j])
            params, _ = mclachlan.step(
                ansatz, params, tuple(free), in_state, job.h_rec, job.evolution, job.solver,
                pinned={j: delta / job.evolution.step},
            )
            iteration += 1
            energy, fid = measure(params)
            trace.append(iteration, energy, params, {"defect": energy - job.e0, "fidelity": fid, "removed": -1.0})
        params[j] = target
        energy, fid = measure(params)
        if energy - job.e0 > budget:
            params = backup
            reverted = j
            energy, fid = measure(params)
            iteration += 1
            trace.append(iteration, energy, params, {"defect": energy - job.e0, "fidelity": fid, "removed": -1.0})
            break
        free.remove(j)
        removed.append((iteration, j))
        trace.append(iteration, energy, params, {"defect": energy - job.e0, "fidelity": fid, "removed": float(j)})
    reduced, kept = _strip_params(template, params, [j for _, j in removed])
    trace.converged = True
    return EliminationResult(reduced, kept, tuple(removed), trace, reverted_param=reverted)


@dataclass(frozen=True)
class LureConfig:
    """Staged schedule scaling the source circuit from near-identity to full."""

    n_stages: int = 10
    threshold: float = 0.1
    stage_max_iterations: int = 2000
    halt_on_stall: bool = False

    def __post_init__(self):
        if self.n_stages < 1:
            raise ValueError("need at least one stage")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")


def lure_recompile(job, lure=LureConfig()):
    """Recompile against progressively stronger versions of the source.

    Stage n targets the source with all fixed angles scaled by n/n_stages and
    hands over once the energy defect falls below ``threshold``; the final
    stage runs the ordinary convergence rule.  A stage that exhausts its
    iteration budget is flagged (and, optionally, aborts the schedule).
    """
    params = np.full(job.template.n_params, INITIAL_PARAM)
    free = tuple(range(job.template.n_params))
    in_state = job.input_state()
    merged = EvolutionTrace()
    stalled = []
    offset = 0
    for n in range(1, lure.n_stages + 1):
        alpha = n / lure.n_stages
        scaled = scale_fixed_angles(job.source, alpha)
        ansatz = concat(scaled, inverse(job.template))
        last = n == lure.n_stages
        cfg = job.evolution if last else replace(job.evolution, max_iterations=lure.stage_max_iterations)
        halt = None if last else (lambda energy: energy - job.e0 < lure.threshold)
        stage_trace = mclachlan.evolve(
            ansatz, params, free, in_state, job.h_rec, cfg, job.solver,
            callback=_trace_callback(job, stage=alpha, source=scaled), halt=halt,
        )
        params = stage_trace.final_params
        if not last and stage_trace.final_energy - job.e0 >= lure.threshold:
            stalled.append(n)
            if lure.halt_on_stall:
                merged = _merge_traces(merged, stage_trace, offset)
                break
        merged = _merge_traces(merged, stage_trace, offset)
        offset = merged.iterations[-1] + 1 if merged.iterations else 0
    return RecompileResult(
        phi=params,
        trace=merged,
        circuit=bind_params(job.template, params),
        job=job,
        converged=merged.converged and merged.fatal is None and not (stalled and lure.halt_on_stall),
        stalled_stages=tuple(stalled),
    )


def _merge_traces(base, stage, offset):
    for i in range(len(stage)):
        base.append(
            stage.iterations[i] + offset,
            stage.energies[i],
            stage.params[i],
            {k: stage.extras[k][i] for k in stage.extras},
        )
    base.converged = stage.converged
    base.fatal = stage.fatal or base.fatal
    return base
