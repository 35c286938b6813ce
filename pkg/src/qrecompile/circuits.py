"""Parameterised circuits of Pauli rotations and controlled rotations.

Every gate realises exp(-i * sign * theta/2 * P) for a Pauli-string generator
P, optionally restricted to the control = |1> subspace.  At theta = 0 each
gate is exactly the identity.  The angle comes either from a bound parameter
slot or is fixed in the gate, and the inversion sign lets the same parameter
vector drive a circuit and its gate-by-gate inverse.

Circuit text format, one gate per line ('#' starts a comment line):

    Z 0 p3             bound single-qubit rotation, parameter slot 3
    ZZ 0 1 p17         bound two-qubit rotation
    X 3 fixed:-0.25    fixed-angle rotation
    CY 0 1 p4          rotation of qubit 1 controlled on qubit 0
    Z 0 p3 inv         inverted gate (sign -1)
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .paulis import ParseError, PauliString, StateVector, pauli_action

FD4_STEP = 1e-5

_GEN_RE = re.compile(r"^(C?)([XYZ]+)$")


@dataclass(frozen=True)
class Gate:
    """One parameterised rotation; ``param`` indexes a slot, else ``angle`` is fixed."""

    generator: PauliString
    param: int | None = None
    angle: float | None = None
    control: int | None = None
    sign: int = 1

    def __post_init__(self):
        if (self.param is None) == (self.angle is None):
            raise ValueError("exactly one of param / angle must be given")
        if self.param is not None and self.param < 0:
            raise ValueError(f"negative parameter index {self.param}")
        if self.sign not in (1, -1):
            raise ValueError(f"inversion sign must be +1 or -1, got {self.sign}")
        if not self.generator.factors:
            raise ValueError("gate generator must act on at least one qubit")
        if self.control is not None and self.control in self.generator.support:
            raise ValueError(f"control qubit {self.control} overlaps the generator support")

    @property
    def is_bound(self):
        return self.param is not None

    @property
    def qubits(self):
        """Qubits the gate acts on; control listed first for controlled gates."""
        if self.control is None:
            return self.generator.support
        return (self.control,) + self.generator.support

    def inverted(self):
        return Gate(self.generator, self.param, self.angle, self.control, -self.sign)

    def label(self):
        gen = "".join(ax for _, ax in self.generator.factors)
        return ("C" + gen) if self.control is not None else gen


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list; the first gate is applied first."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int

    def __post_init__(self):
        for g in self.gates:
            if g.param is not None and g.param >= self.n_params:
                raise ValueError(f"gate bound to parameter {g.param} but circuit has {self.n_params}")
            top = max(g.qubits)
            if top >= self.n_qubits:
                raise ValueError(f"gate acts on qubit {top} but circuit has {self.n_qubits} qubits")

    @classmethod
    def build(cls, n_qubits, gates, n_params=None):
        gates = tuple(gates)
        if n_params is None:
            n_params = 1 + max((g.param for g in gates if g.param is not None), default=-1)
        return cls(n_qubits, gates, n_params)

    def __len__(self):
        return len(self.gates)


@lru_cache(maxsize=None)
def _control_mask(control, n_qubits):
    mask = ((np.arange(1 << n_qubits) >> control) & 1).astype(bool)
    mask.flags.writeable = False
    return mask


def _gate_angle(gate, params):
    return gate.angle if gate.param is None else float(params[gate.param])


def apply_gate_to_array(gate, theta, array, n_qubits):
    """exp(-i*sign*theta/2 * P) acting on a (dim,) vector or (dim, k) stack."""
    th = gate.sign * theta
    c, s = math.cos(th / 2.0), math.sin(th / 2.0)
    pw = pauli_action(gate.generator, array, n_qubits)
    if gate.control is None:
        return c * array - 1j * s * pw
    mask = _control_mask(gate.control, n_qubits)
    out = array.copy()
    out[mask] = c * array[mask] - 1j * s * pw[mask]
    return out


def apply_circuit(circuit, params, state):
    """Apply the circuit gate by gate; norm is preserved to rounding."""
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, circuit needs {circuit.n_qubits}")
    amps = state.amplitudes
    for gate in circuit.gates:
        amps = apply_gate_to_array(gate, _gate_angle(gate, params), amps, circuit.n_qubits)
    return StateVector(circuit.n_qubits, amps)


def inverse(circuit):
    """Gate-by-gate inverse: reversed order, flipped signs, same parameter slots."""
    return Circuit(circuit.n_qubits, tuple(g.inverted() for g in reversed(circuit.gates)), circuit.n_params)


def concat(a, b):
    """Gates of a then gates of b; b's parameter slots are offset by a.n_params."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    shifted = tuple(
        Gate(g.generator, None if g.param is None else g.param + a.n_params, g.angle, g.control, g.sign)
        for g in b.gates
    )
    return Circuit(a.n_qubits, a.gates + shifted, a.n_params + b.n_params)


def bind_params(circuit, params):
    """Freeze every bound slot to its current value (n_params becomes 0)."""
    params = np.asarray(params, dtype=float)
    gates = tuple(
        g if g.param is None else Gate(g.generator, None, float(params[g.param]), g.control, g.sign)
        for g in circuit.gates
    )
    return Circuit(circuit.n_qubits, gates, 0)


def scale_fixed_angles(circuit, factor):
    """Multiply every fixed angle by ``factor``; bound slots are untouched."""
    gates = tuple(
        g if g.angle is None else Gate(g.generator, None, factor * g.angle, g.control, g.sign)
        for g in circuit.gates
    )
    return Circuit(circuit.n_qubits, gates, circuit.n_params)


def _insertion(gate, state_col, n_qubits):
    """Generator insertion -i*sign/2 * P |psi>, projector-conditioned if controlled."""
    ins = pauli_action(gate.generator, state_col, n_qubits)
    if gate.control is not None:
        ins = ins * _control_mask(gate.control, n_qubits)
    return (-0.5j * gate.sign) * ins


def state_and_derivatives(circuit, params, state, free=None):
    """Final state and all requested parameter derivatives in one forward sweep.

    Returns (psi, D) with psi the (dim,) output amplitudes and D a
    (dim, len(free)) stack whose column j is d psi / d params[free[j]]
    (summed over every gate bound to that slot).  Columns of unused
    parameters are zero.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise ValueError(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, circuit needs {circuit.n_qubits}")
    free = tuple(range(circuit.n_params)) if free is None else tuple(free)
    col_of = {k: 1 + i for i, k in enumerate(free)}
    n = circuit.n_qubits
    work = np.zeros((state.dim, 1 + len(free)), dtype=complex)
    work[:, 0] = state.amplitudes
    for gate in circuit.gates:
        work = apply_gate_to_array(gate, _gate_angle(gate, params), work, n)
        col = col_of.get(gate.param)
        if col is not None:
            work[:, col] += _insertion(gate, work[:, 0], n)
    return work[:, 0], work[:, 1:]


def state_derivative(circuit, params, state, k, method="analytic"):
    """d/d params[k] of the output amplitudes, as an unnormalised complex vector.

    ``analytic`` inserts the scaled generator after each gate bound to k;
    ``fd4`` is the fourth-order central difference with step 1e-5.
    """
    if not 0 <= k < circuit.n_params:
        raise IndexError(f"parameter index {k} out of range for {circuit.n_params} parameters")
    if method == "analytic":
        _, d = state_and_derivatives(circuit, params, state, free=(k,))
        return d[:, 0]
    if method == "fd4":
        params = np.asarray(params, dtype=float)
        h = FD4_STEP

        def shifted(delta):
            p = params.copy()
            p[k] += delta
            return apply_circuit(circuit, p, state).amplitudes

        return (-shifted(2 * h) + 8 * shifted(h) - 8 * shifted(-h) + shifted(-2 * h)) / (12 * h)
    raise ValueError(f"unknown derivative method {method!r}")


def gate_distance_to_identity(gate, theta):
    """How far the angle sits from the nearest identity multiple.

    Plain rotations are 2*pi periodic up to an irrelevant global phase; a
    controlled rotation at 2*pi applies a conditional -1 and only returns to
    the identity at 4*pi.
    """
    period = 2.0 * math.pi if gate.control is None else 4.0 * math.pi
    return abs(theta - period * round(theta / period))


def nearest_identity_angle(gate, theta):
    period = 2.0 * math.pi if gate.control is None else 4.0 * math.pi
    return period * round(theta / period)


@dataclass(frozen=True)
class GateCounts:
    one_qubit: int
    two_qubit: int
    by_generator: tuple[tuple[str, int], ...]

    def as_dict(self):
        return dict(self.by_generator)


def count_gates(circuit):
    """Classify gates by support size and tally by generator label."""
    one = two = 0
    hist: dict[str, int] = {}
    for g in circuit.gates:
        size = len(g.qubits)
        if size == 1:
            one += 1
        elif size == 2:
            two += 1
        hist[g.label()] = hist.get(g.label(), 0) + 1
    return GateCounts(one, two, tuple(sorted(hist.items())))


# ---------------------------------------------------------------------------
# Circuit and parameter-file text formats.
# ---------------------------------------------------------------------------

def parse_circuit(text, n_qubits=None):
    gates = []
    max_qubit = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        m = _GEN_RE.match(tokens[0])
        if m is None:
            raise ParseError(f"malformed generator token {tokens[0]!r}", line=lineno)
        controlled, letters = bool(m.group(1)), m.group(2)
        n_gate_qubits = len(letters) + (1 if controlled else 0)
        if len(tokens) < 1 + n_gate_qubits + 1:
            raise ParseError(f"expected {n_gate_qubits} qubits and a binding", line=lineno)
        try:
            qubits = [int(t) for t in tokens[1 : 1 + n_gate_qubits]]
        except ValueError:
            raise ParseError(f"malformed qubit index in {line!r}", line=lineno) from None
        if len(set(qubits)) != len(qubits):
            raise ParseError(f"repeated qubit in {line!r}", line=lineno)
        control = qubits[0] if controlled else None
        pairs = list(zip(qubits[1:] if controlled else qubits, letters))
        binding = tokens[1 + n_gate_qubits]
        rest = tokens[2 + n_gate_qubits :]
        sign = 1
        if rest == ["inv"]:
            sign = -1
        elif rest:
            raise ParseError(f"unexpected trailing tokens {rest!r}", line=lineno)
        param = angle = None
        if binding.startswith("p") and binding[1:].isdigit():
            param = int(binding[1:])
        elif binding.startswith("fixed:"):
            try:
                angle = float(binding[len("fixed:") :])
            except ValueError:
                raise ParseError(f"malformed fixed angle {binding!r}", line=lineno) from None
        else:
            raise ParseError(f"malformed binding {binding!r} (expected pN or fixed:ANGLE)", line=lineno)
        try:
            gates.append(Gate(PauliString.of(pairs), param, angle, control, sign))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        max_qubit = max(max_qubit, *qubits)
    inferred = max_qubit + 1
    if n_qubits is None:
        n_qubits = inferred
    elif n_qubits < inferred:
        raise ParseError(f"circuit uses qubit {max_qubit} but n_qubits={n_qubits} was requested")
    return Circuit.build(n_qubits, gates)


def serialize_circuit(circuit):
    lines = []
    for g in circuit.gates:
        qubits = " ".join(str(q) for q in g.qubits)
        binding = f"p{g.param}" if g.param is not None else f"fixed:{g.angle!r}"
        suffix = " inv" if g.sign == -1 else ""
        lines.append(f"{g.label()} {qubits} {binding}{suffix}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_params(text):
    """Parameter file: one radian value per line, '#' comment lines allowed."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"malformed parameter value {line!r}", line=lineno) from None
    return np.array(values, dtype=float)


def serialize_params(values):
    return "".join(f"{float(v)!r}\n" for v in values)
