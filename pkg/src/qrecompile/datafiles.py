"""Access to the bundled benchmark data files.

The package ships the 7-spin network coefficients, the recompilation
Hamiltonian, the 186-gate source circuit (layout + angles), the
hexagonal-connectivity template and the 5-qubit ladder layout used by the
lure demonstration.
"""
from __future__ import annotations

from importlib import resources

from .circuits import parse_circuit, parse_params
from .dynamics import SpinSystem
from .paulis import parse_pauli_sum

HAMILTONIAN_SYS = "hamiltonian_sys.txt"
HAMILTONIAN_REC = "hamiltonian_rec.txt"
CIRCUIT_A_LAYOUT = "circuit_a_layout.txt"
CIRCUIT_A_PARAMS = "circuit_a_params.txt"
TEMPLATE_HEX = "template_hex.txt"
TEMPLATE_LADDER5 = "template_ladder5.txt"

INPUT_SPEC_7Q = "1++++++"


def bundled_path(name):
    """Filesystem path of a bundled data file (usable as a CLI argument)."""
    path = resources.files("qrecompile") / "data" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled data file named {name!r}")
    return path


def read_text(name):
    return bundled_path(name).read_text(encoding="utf-8")


def load_hamiltonian(name=HAMILTONIAN_SYS):
    return parse_pauli_sum(read_text(name))


def load_circuit(name):
    return parse_circuit(read_text(name))


def load_params(name=CIRCUIT_A_PARAMS):
    return parse_params(read_text(name))


def load_spin_system():
    """The bundled 7-spin benchmark network with its |1>|+>^6 input."""
    return SpinSystem(load_hamiltonian(HAMILTONIAN_SYS), INPUT_SPEC_7Q).validate_signs()
