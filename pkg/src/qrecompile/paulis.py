"""Dense state vectors, Pauli-string algebra and the plaintext Hamiltonian format.

Conventions used throughout the package:
  * qubit 0 is the least-significant bit of the amplitude index;
  * states are immutable once constructed (operations return new states);
  * a PauliString is a sparse map qubit -> axis, identity elsewhere, so the
    empty string is the identity operator.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NORM_TOL = 1e-10

_AXES = ("X", "Y", "Z")
_FACTOR_RE = re.compile(r"([XYZ])(\d+)")


class ParseError(ValueError):
    """Malformed text input; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class StateVector:
    """Dense complex amplitudes over the 2**n_qubits computational basis."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        dim = 1 << self.n_qubits
        if amps.shape != (dim,):
            raise ValueError(f"expected {dim} amplitudes for {self.n_qubits} qubits, got {amps.shape}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self):
        return 1 << self.n_qubits

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_normalised(self, tol=NORM_TOL):
        return abs(np.sum(np.abs(self.amplitudes) ** 2) - 1.0) <= tol

    def require_normalised(self, what="state"):
        if not self.is_normalised():
            raise ValueError(f"{what} is not normalised (sum |a|^2 = {np.sum(np.abs(self.amplitudes) ** 2)!r})")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli operators; identity on unlisted qubits.

    ``factors`` is a tuple of (qubit, axis) pairs sorted by qubit index.
    Hermitian and unitary: applying the same string twice restores the state.
    """

    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        seen = set()
        for q, ax in self.factors:
            if ax not in _AXES:
                raise ValueError(f"invalid Pauli axis {ax!r}")
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if q in seen:
                raise ValueError(f"duplicate qubit {q} in Pauli string")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def single(cls, qubit, axis):
        return cls(((qubit, axis),))

    @classmethod
    def of(cls, pairs):
        return cls(tuple((int(q), str(ax)) for q, ax in pairs))

    @property
    def support(self):
        return tuple(q for q, _ in self.factors)

    @property
    def weight(self):
        return len(self.factors)

    def max_qubit(self):
        return max((q for q, _ in self.factors), default=-1)

    def label(self):
        """Compact text form, e.g. ``X0 X1``; the identity renders empty."""
        return " ".join(f"{ax}{q}" for q, ax in self.factors)


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings (Hermitian by construction).

    Duplicate strings are merged on construction; first-occurrence order of
    the distinct strings is preserved, which fixes e.g. the gate order of
    Trotter cycles built from a term list.
    """

    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        merged: dict[PauliString, float] = {}
        order: list[PauliString] = []
        for coeff, string in self.terms:
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff!r}")
            if string in merged:
                merged[string] += coeff
            else:
                merged[string] = coeff
                order.append(string)
        object.__setattr__(self, "terms", tuple((merged[s], s) for s in order))

    @classmethod
    def of(cls, pairs):
        return cls(tuple((float(c), s) for c, s in pairs))

    def __len__(self):
        return len(self.terms)

    def max_qubit(self):
        return max((s.max_qubit() for _, s in self.terms), default=-1)

    def scaled(self, factor):
        return PauliSum(tuple((factor * c, s) for c, s in self.terms))


@lru_cache(maxsize=None)
def _pauli_arrays(factors, n_qubits):
    """Source-index and phase arrays realising P|x> = phase(x) |x ^ flip>.

    Returns (src, phase) with (P v)[y] = phase[y] * v[src[y]].
    """
    dim = 1 << n_qubits
    idx = np.arange(dim)
    flip = 0
    col_phase = np.ones(dim, dtype=complex)
    for q, ax in factors:
        if q >= n_qubits:
            raise IndexError(f"Pauli factor on qubit {q} out of range for {n_qubits} qubits")
        bit = (idx >> q) & 1
        if ax == "X":
            flip ^= 1 << q
        elif ax == "Y":
            flip ^= 1 << q
            col_phase = col_phase * (1j * (-1.0) ** bit)
        else:
            col_phase = col_phase * (-1.0) ** bit
    src = idx ^ flip
    phase = col_phase[src]
    src.flags.writeable = False
    phase.flags.writeable = False
    return src, phase


def pauli_action(string, array, n_qubits):
    """Apply a PauliString to a (dim,) vector or (dim, k) column stack."""
    src, phase = _pauli_arrays(string.factors, n_qubits)
    if array.ndim == 1:
        return phase * array[src]
    return phase[:, None] * array[src, :]


def pauli_sum_action(h, array, n_qubits):
    """Apply a PauliSum to a vector or column stack of amplitudes."""
    out = np.zeros_like(array)
    for coeff, string in h.terms:
        out += coeff * pauli_action(string, array, n_qubits)
    return out


def apply_pauli_string(string, state):
    """P|s>; exactly norm preserving."""
    if string.max_qubit() >= state.n_qubits:
        raise IndexError(
            f"Pauli string acts on qubit {string.max_qubit()} but state has {state.n_qubits} qubits"
        )
    return StateVector(state.n_qubits, pauli_action(string, state.amplitudes, state.n_qubits))


_SINGLE_QUBIT_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
}


def init_basis_state(spec):
    """Product state from a per-qubit symbol string over {0, 1, +, -}.

    The first character is qubit 0, which indexes the least-significant bit
    of the amplitude array.
    """
    if not spec:
        raise ParseError("empty basis-state spec")
    amps = None
    for pos, ch in enumerate(spec):
        if ch not in _SINGLE_QUBIT_KETS:
            raise ParseError(f"invalid basis symbol {ch!r} at position {pos} (expected one of 0, 1, +, -)")
        ket = _SINGLE_QUBIT_KETS[ch]
        amps = ket if amps is None else np.kron(ket, amps)  # later qubits occupy higher bits
    return StateVector(len(spec), amps)


def expectation(h, state):
    """<s|H|s> for a normalised state; the tiny imaginary residue is discarded."""
    state.require_normalised()
    if h.max_qubit() >= state.n_qubits:
        raise IndexError(f"Hamiltonian acts on qubit {h.max_qubit()} but state has {state.n_qubits} qubits")
    value = np.vdot(state.amplitudes, pauli_sum_action(h, state.amplitudes, state.n_qubits))
    if abs(value.imag) >= NORM_TOL:
        raise ValueError(f"expectation has non-negligible imaginary part {value.imag!r}")
    return float(value.real)


def fidelity(a, b):
    """|<a|b>|**2, symmetric and insensitive to global phase of either state."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    a.require_normalised("first state")
    b.require_normalised("second state")
    return float(min(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2, 1.0))


def dense_matrix(h, n_qubits):
    """Dense 2**n x 2**n matrix of a PauliSum; n_qubits <= 12."""
    if n_qubits > 12:
        raise ValueError(f"dense matrix limited to 12 qubits, got {n_qubits}")
    dim = 1 << n_qubits
    return pauli_sum_action(h, np.eye(dim, dtype=complex), n_qubits)


# ---------------------------------------------------------------------------
# Plaintext format: one term per line, "<coeff> <factor> <factor> ...", where
# a factor token packs one or more axis+index pairs ("Z0", "X3X4").  Lines
# whose first non-blank character is '#' are comments.
# ---------------------------------------------------------------------------

def parse_pauli_sum(text):
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            coeff = float(tokens[0])
        except ValueError:
            raise ParseError(f"expected a real coefficient, got {tokens[0]!r}", line=lineno) from None
        pairs = []
        for token in tokens[1:]:
            matches = _FACTOR_RE.findall(token)
            if "".join(ax + q for ax, q in matches) != token:
                raise ParseError(f"malformed Pauli factor {token!r}", line=lineno)
            pairs.extend((int(q), ax) for ax, q in matches)
        qubits = [q for q, _ in pairs]
        if len(set(qubits)) != len(qubits):
            raise ParseError(f"duplicate qubit in term {line!r}", line=lineno)
        terms.append((coeff, PauliString.of(pairs)))
    return PauliSum.of(terms)


def serialize_pauli_sum(h):
    lines = []
    for coeff, string in h.terms:
        label = string.label()
        lines.append(repr(coeff) if not label else f"{coeff!r} {label}")
    return "\n".join(lines) + ("\n" if lines else "")
