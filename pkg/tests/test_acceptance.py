"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria 3, 4 and 6 also export their traces as CSV files under artifacts/
(the same schemas the CLI emits) so the figure scripts can render the full
benchmark runs.
"""
import numpy as np
import pytest

import qrecompile as qr
from qrecompile.cli import _ELIMINATE_COLUMNS, _RECOMPILE_COLUMNS, trace_rows, write_trace_csv
from qrecompile.dynamics import trotter_fidelity

from testutil import random_circuit, random_state


def report(number, ok, detail):
    print(f"\nacceptance criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


@pytest.fixture(scope="module")
def bound_source(source_layout, source_angles):
    return qr.bind_params(source_layout, source_angles)


@pytest.fixture(scope="module")
def paper_job(bound_source, hex_template, h_rec):
    return qr.RecompileJob.create(bound_source, "1++++++", hex_template, h_rec)


@pytest.fixture(scope="module")
def li_trace(spin_system, source_layout, artifacts_dir):
    trace = qr.li_realtime(source_layout, np.full(186, 1e-8), spin_system, t_final=1.75, dt=2.5e-3)
    header = ["iter", "energy", "t", "fidelity"] + [f"param{i}" for i in range(186)]
    write_trace_csv(artifacts_dir / "li_realtime_trace.csv", header, trace_rows(trace, ["t", "fidelity"]))
    return trace


@pytest.fixture(scope="module")
def recompile_result(paper_job, artifacts_dir):
    result = qr.recompile(paper_job)
    header = ["iter", "energy"] + _RECOMPILE_COLUMNS + [f"param{i}" for i in range(149)]
    write_trace_csv(artifacts_dir / "recompile_trace.csv", header,
                    trace_rows(result.trace, _RECOMPILE_COLUMNS))
    return result


@pytest.fixture(scope="module")
def elimination_result(recompile_result, paper_job, artifacts_dir):
    result = qr.eliminate_gates(recompile_result, paper_job, qr.EliminationConfig(defect_factor=2.0, max_step=0.1))
    header = ["iter", "energy"] + _ELIMINATE_COLUMNS + [f"param{i}" for i in range(149)]
    write_trace_csv(artifacts_dir / "eliminate_trace.csv", header,
                    trace_rows(result.trace, _ELIMINATE_COLUMNS))
    return result


class TestCriterion1NaiveTrotter:
    def test_criterion_1_fixed_order_trotter(self, spin_system):
        """6 fixed-order cycles at t = 0.75 against exact evolution: 0.9983 +/- 5e-4.

        The measured fixed-order value sits near 0.9716; the 0.9983 reference
        is reproduced by the alternating ordering (see the companion check).
        """
        fidelity = trotter_fidelity(spin_system, qr.TrotterSpec(6, 0.75, "fixed"))
        ok = abs(fidelity - 0.9983) <= 5e-4
        report(1, ok, f"fixed-order 6-cycle fidelity at t=0.75: {fidelity:.6f}, required 0.9983 +/- 0.0005")
        assert ok

    def test_criterion_1_companion_alternating_reproduces_reference(self, spin_system):
        fidelity = trotter_fidelity(spin_system, qr.TrotterSpec(6, 0.75, "alternating"))
        ok = abs(fidelity - 0.9983) <= 5e-4
        report("1 (companion)", ok, f"alternating 6-cycle fidelity at t=0.75: {fidelity:.6f}")
        assert ok


def test_criterion_2_source_replay(spin_system, bound_source):
    produced = qr.apply_circuit(bound_source, np.zeros(0), spin_system.input_state())
    reference = qr.exact_evolve(spin_system.h_sys, spin_system.input_state(), 1.75)
    fidelity = qr.fidelity(produced, reference)
    ok = abs(fidelity - 0.995) <= 2e-3
    assert report(2, ok, f"bundled 186-angle replay fidelity at t=1.75: {fidelity:.6f}, required 0.995 +/- 0.002")


def test_criterion_3_li_regeneration(li_trace, spin_system):
    fidelity = li_trace.extras["fidelity"][-1]
    worst_margin = min(
        li_trace.extras["fidelity"][i]
        - trotter_fidelity(spin_system, qr.TrotterSpec(6, li_trace.extras["t"][i], "fixed"))
        for i in range(0, len(li_trace), 50)
    )
    ok = fidelity >= 0.99 and worst_margin >= -5e-4
    assert report(3, ok, f"real-time regeneration fidelity at t=1.75 after 700 steps: {fidelity:.6f} "
                         f"(>= 0.99); stays above the rigid Trotter rule, worst margin {worst_margin:+.2e}")


def test_criterion_4_recompilation(recompile_result):
    fidelity = recompile_result.trace.extras["fidelity"][-1]
    defect = recompile_result.defect
    ok = fidelity >= 0.995 and defect <= 0.04
    assert report(4, ok, f"recompiled fidelity {fidelity:.6f} (>= 0.995), defect {defect:.6f} (<= 0.04), "
                         f"{len(recompile_result.trace)} iterations")


def test_criterion_5_fidelity_bound(recompile_result, paper_job, h_rec):
    from qrecompile.paulis import dense_matrix

    eigenvalues = np.linalg.eigvalsh(dense_matrix(h_rec, 7))
    assert paper_job.e0 == pytest.approx(-7.0, abs=1e-9)
    assert paper_job.e1 == pytest.approx(float(eigenvalues[1]), abs=1e-12)
    trace = recompile_result.trace
    violations = sum(
        1
        for i in range(len(trace))
        if trace.extras["bound"][i] > trace.extras["fidelity"][i] + 1e-9
    )
    ok = violations == 0
    assert report(5, ok, f"bound <= fidelity at all {len(trace)} iterations, violations = {violations}")


def test_criterion_6_gate_elimination(elimination_result, recompile_result):
    removed = len(elimination_result.removed)
    fidelity = elimination_result.trace.extras["fidelity"][-1]
    ok = removed >= 25 and fidelity >= 0.99
    gates_left = len(elimination_result.circuit.gates)
    assert report(6, ok, f"removed {removed} parameters (>= 25), final fidelity {fidelity:.6f} (>= 0.99), "
                         f"149 -> {gates_left} gates")


def test_criterion_7_lure_demo(ladder_template):
    rng = np.random.default_rng(17)
    theta = rng.uniform(-np.pi, np.pi, 15)
    source = qr.bind_params(ladder_template, theta)
    job = qr.RecompileJob.create(
        source, "00000", ladder_template, qr.projector_hamiltonian("00000"),
        qr.EvolutionConfig(mode="imaginary", step=0.1, max_iterations=3000),
    )
    direct = qr.recompile(job)
    lured = qr.lure_recompile(job, qr.LureConfig(n_stages=10, threshold=0.1))
    lure_fidelity = lured.trace.extras["fidelity"][-1]
    err = np.abs(lured.phi - theta) % (2 * np.pi)
    max_err = float(np.minimum(err, 2 * np.pi - err).max())
    ok = direct.defect > 0.05 and lure_fidelity >= 0.999 and max_err <= 0.05
    assert report(7, ok, f"plateau defect without lure {direct.defect:.4f} (> 0.05); with lure fidelity "
                         f"{lure_fidelity:.6f} (>= 0.999), max parameter error {max_err:.2e} rad (<= 0.05)")


class TestCriterion8Properties:
    def test_criterion_8_property_suite(self, hex_template, ladder_template, source_layout, tmp_path):
        rng = np.random.default_rng(23)
        checks = []

        # M symmetry and positive semidefiniteness on 50 random instances
        worst_asym, worst_eig = 0.0, 0.0
        for _ in range(50):
            n = int(rng.integers(1, 4))
            c = random_circuit(rng, n, int(rng.integers(1, 9)))
            p = rng.uniform(-np.pi, np.pi, c.n_params)
            s = random_state(rng, n)
            h = qr.PauliSum.of([(rng.normal(), qr.PauliString.single(int(rng.integers(0, n)), ax))
                                for ax in "XZ"])
            cfg = qr.EvolutionConfig(mode="imaginary", step=1e-2, global_phase=bool(rng.integers(0, 2)))
            system = qr.build_system(c, p, tuple(range(c.n_params)), s, h, cfg)
            worst_asym = max(worst_asym, float(np.max(np.abs(system.m - system.m.T))))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh(system.m).min()))
        checks.append(("M symmetry <= 1e-10", worst_asym <= 1e-10))
        checks.append(("M PSD >= -1e-9", worst_eig >= -1e-9))

        # analytic vs fd4 derivatives
        worst = 0.0
        for _ in range(5):
            c = random_circuit(rng, 3, 8)
            p = rng.uniform(-np.pi, np.pi, c.n_params)
            s = random_state(rng, 3)
            for k in range(c.n_params):
                diff = qr.state_derivative(c, p, s, k) - qr.state_derivative(c, p, s, k, "fd4")
                worst = max(worst, float(np.max(np.abs(diff))))
        checks.append(("fd4 agreement <= 1e-8", worst <= 1e-8))

        # circuit round trip through its inverse
        worst = 0.0
        for _ in range(10):
            c = random_circuit(rng, 3, 10)
            p = rng.uniform(-np.pi, np.pi, c.n_params)
            s = random_state(rng, 3)
            back = qr.apply_circuit(qr.inverse(c), p, qr.apply_circuit(c, p, s))
            worst = max(worst, 1.0 - qr.fidelity(back, s))
        checks.append(("inverse round trip <= 1e-10", worst <= 1e-10))

        # imaginary-time energy monotone on the analytic one-parameter system
        rx = qr.Circuit.build(1, [qr.Gate(qr.PauliString.single(0, "X"), param=0)])
        hz = qr.PauliSum.of([(1.0, qr.PauliString.single(0, "Z"))])
        trace = qr.evolve(rx, np.array([2.1]), (0,), qr.init_basis_state("0"), hz,
                          qr.EvolutionConfig(mode="imaginary", step=1e-3, max_iterations=300,
                                             global_phase=False))
        checks.append(("imaginary energy non-increasing", bool(np.all(np.diff(trace.energies) <= 1e-9))))

        # identity at zero parameters for every bundled template
        ok_identity = True
        for template, spec in ((hex_template, "1++++++"), (ladder_template, "00000"), (source_layout, "1++++++")):
            out = qr.apply_circuit(template, np.zeros(template.n_params), qr.init_basis_state(spec))
            ok_identity &= qr.fidelity(out, qr.init_basis_state(spec)) >= 1.0 - 1e-12
        checks.append(("identity at zero", ok_identity))

        # bitwise-deterministic traces
        blobs = []
        for name in ("d1.csv", "d2.csv"):
            trace = qr.evolve(rx, np.array([1.2]), (0,), qr.init_basis_state("0"), hz,
                              qr.EvolutionConfig(mode="imaginary", step=1e-2, max_iterations=40,
                                                 convergence_window=0))
            path = tmp_path / name
            write_trace_csv(path, ["iter", "energy", "param0"], trace_rows(trace, []))
            blobs.append(path.read_bytes())
        checks.append(("bitwise deterministic traces", blobs[0] == blobs[1]))

        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name}: {'ok' if passed else 'FAILED'}" for name, passed in checks)
        assert report(8, ok, detail)


def test_criterion_9_gate_count_audit(source_layout, hex_template):
    a = qr.count_gates(source_layout)
    b = qr.count_gates(hex_template)
    ok = (a.one_qubit, a.two_qubit) == (42, 144) and (b.one_qubit, b.two_qubit) == (77, 72)
    assert report(9, ok, f"source counts {(a.one_qubit, a.two_qubit)} == (42, 144); "
                         f"template counts {(b.one_qubit, b.two_qubit)} == (77, 72)")
