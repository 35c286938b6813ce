import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[2]
ARTIFACTS = REPO_ROOT / "artifacts"


from figviz_testutil import write_csv

@pytest.fixture()
def recompile_fixture(tmp_path):
    header = ["iter", "energy", "bound", "fidelity", "stage", "param0", "param1"]
    rows = [
        [0, -0.10, 0.0, 0.02, 1.0, 1e-8, 1e-8],
        [1, -0.60, 0.3, 0.55, 1.0, 0.20, -0.05],
        [2, -0.93, 0.8, 0.95, 1.0, 0.29, -0.08],
        [3, -0.99, 0.9, 0.99, 1.0, 0.30, -0.09],
    ]
    return write_csv(tmp_path / "recompile.csv", header, rows)


@pytest.fixture()
def elimination_fixture(tmp_path):
    header = ["iter", "energy", "defect", "fidelity", "removed", "param0", "param1", "param2"]
    rows = [
        [0, -0.99, 0.01, 0.99, -1.0, 0.30, 0.02, -0.01],
        [1, -0.99, 0.01, 0.99, -1.0, 0.30, 0.02, 0.00],
        [1, -0.99, 0.01, 0.99, 2.0, 0.30, 0.02, 0.00],
        [2, -0.98, 0.02, 0.98, -1.0, 0.31, 0.00, 0.00],
        [2, -0.98, 0.02, 0.98, 1.0, 0.31, 0.00, 0.00],
    ]
    return write_csv(tmp_path / "eliminate.csv", header, rows)


@pytest.fixture()
def sweep_fixture(tmp_path):
    header = ["iter", "t", "fidelity"]
    rows = [[i, 0.25 * i, 1.0 - 0.01 * i] for i in range(5)]
    return write_csv(tmp_path / "sweep.csv", header, rows)


def _run_primary(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "qrecompile.cli", *args],
                          capture_output=True, text=True, cwd=cwd)
    if proc.returncode not in (0, 2):
        raise RuntimeError(f"primary CLI failed: {proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def pipeline_traces(tmp_path_factory):
    """Traces of the benchmark pipeline commands.

    Prefers the full-run CSVs exported by the primary acceptance suite under
    artifacts/; falls back to generating small runs of the same commands so
    this suite stays self-contained.
    """
    full = {
        "simulate": ARTIFACTS / "li_realtime_trace.csv",
        "recompile": ARTIFACTS / "recompile_trace.csv",
        "eliminate": ARTIFACTS / "eliminate_trace.csv",
    }
    if all(p.is_file() for p in full.values()):
        return {"source": "full acceptance runs", **{k: str(v) for k, v in full.items()}}

    tmp = tmp_path_factory.mktemp("pipeline")
    source = tmp / "source.txt"
    source.write_text("X 0 p0\n", encoding="utf-8")
    source_params = tmp / "source_params.txt"
    source_params.write_text("0.9\n", encoding="utf-8")
    template = tmp / "template.txt"
    template.write_text("X 0 p0\nZ 0 p1\n", encoding="utf-8")
    hrec = tmp / "hrec.txt"
    hrec.write_text("-1.0 Z0\n", encoding="utf-8")

    sim = tmp / "simulate.csv"
    _run_primary(["simulate", "--circuit", str(template), "--hamiltonian", str(hrec),
                  "--in", "0", "--mode", "real", "--steps", "25", "--trace", str(sim)], tmp)
    rec = tmp / "recompile.csv"
    phi = tmp / "phi.txt"
    _run_primary(["recompile", "--source", str(source), "--source-params", str(source_params),
                  "--template", str(template), "--in", "0", "--hrec", str(hrec),
                  "--trace", str(rec), "--params-out", str(phi)], tmp)
    elim = tmp / "eliminate.csv"
    _run_primary(["eliminate", "--recompiled", str(template), "--params", str(phi),
                  "--source", str(source), "--source-params", str(source_params),
                  "--in", "0", "--hrec", str(hrec), "--trace", str(elim)], tmp)
    return {"source": "reduced fallback runs", "simulate": str(sim),
            "recompile": str(rec), "eliminate": str(elim)}
