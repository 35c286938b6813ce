from pathlib import Path

import pytest

from qrecompile import datafiles

REPO_ROOT = Path(__file__).resolve().parents[1]
ARTIFACTS = REPO_ROOT / "artifacts"


@pytest.fixture(scope="session")
def artifacts_dir():
    ARTIFACTS.mkdir(exist_ok=True)
    return ARTIFACTS


@pytest.fixture(scope="session")
def spin_system():
    return datafiles.load_spin_system()


@pytest.fixture(scope="session")
def h_rec():
    return datafiles.load_hamiltonian(datafiles.HAMILTONIAN_REC)


@pytest.fixture(scope="session")
def source_layout():
    return datafiles.load_circuit(datafiles.CIRCUIT_A_LAYOUT)


@pytest.fixture(scope="session")
def source_angles():
    return datafiles.load_params(datafiles.CIRCUIT_A_PARAMS)


@pytest.fixture(scope="session")
def hex_template():
    return datafiles.load_circuit(datafiles.TEMPLATE_HEX)


@pytest.fixture(scope="session")
def ladder_template():
    return datafiles.load_circuit(datafiles.TEMPLATE_LADDER5)
