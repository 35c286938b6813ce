import pytest

from figviz import TraceError, count_gates, plot_elimination, plot_fidelity_compare, plot_recompile, plot_resources
from figviz.cli import main

from figviz_testutil import write_csv


class TestPlotRecompile:
    def test_synthetic_two_param_trace(self, recompile_fixture, tmp_path):
        info = plot_recompile(recompile_fixture, tmp_path / "fig.png")
        assert info.n_param_curves == 2
        assert (tmp_path / "fig.png").stat().st_size > 0

    def test_empty_trace_errors(self, tmp_path):
        path = write_csv(tmp_path / "e.csv", ["iter", "energy", "bound", "fidelity", "stage"], [])
        with pytest.raises(TraceError):
            plot_recompile(path, tmp_path / "fig.png")

    def test_rendering_is_pure(self, recompile_fixture, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        plot_recompile(recompile_fixture, a)
        plot_recompile(recompile_fixture, b)
        assert a.read_bytes() == b.read_bytes()


class TestPlotElimination:
    def test_two_markers(self, elimination_fixture, tmp_path):
        info = plot_elimination(elimination_fixture, tmp_path / "fig.png")
        assert info.n_removal_markers == 2

    def test_zero_markers(self, tmp_path):
        path = write_csv(tmp_path / "none.csv",
                         ["iter", "energy", "defect", "fidelity", "removed", "param0"],
                         [[0, -1.0, 0.0, 1.0, -1.0, 0.1], [1, -1.0, 0.0, 1.0, -1.0, 0.1]])
        info = plot_elimination(path, tmp_path / "fig.png")
        assert info.n_removal_markers == 0


class TestPlotFidelityCompare:
    def test_single_trace(self, sweep_fixture, tmp_path):
        info = plot_fidelity_compare([sweep_fixture], ["only"], tmp_path / "fig.png")
        assert info.n_rows == 1

    def test_identical_traces_overlay(self, sweep_fixture, tmp_path):
        info = plot_fidelity_compare([sweep_fixture, sweep_fixture], ["a", "b"], tmp_path / "fig.png")
        assert info.n_rows == 2

    def test_label_count_checked(self, sweep_fixture, tmp_path):
        with pytest.raises(ValueError, match="labels"):
            plot_fidelity_compare([sweep_fixture], ["a", "b"], tmp_path / "fig.png")


class TestPlotResources:
    def test_counts_from_circuit_files(self, tmp_path):
        a = tmp_path / "a.txt"
        a.write_text("# demo\nX 0 p0\nZZ 0 1 p1\nCY 0 1 p2\n", encoding="utf-8")
        b = tmp_path / "b.txt"
        b.write_text("", encoding="utf-8")
        info = plot_resources([a, b], ["a", "empty"], tmp_path / "fig.png")
        assert info.n_rows == 2
        assert count_gates(a.read_text()).one_qubit == 1
        assert count_gates(a.read_text()).two_qubit == 2
        assert count_gates(b.read_text()).total == 0

    def test_malformed_circuit_rejected(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("Q 0 p0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="malformed"):
            plot_resources([bad], None, tmp_path / "fig.png")


class TestCli:
    def test_elimination_command_reports_markers(self, elimination_fixture, tmp_path, capsys):
        code = main(["elimination", str(elimination_fixture), "-o", str(tmp_path / "fig.png")])
        out = capsys.readouterr().out
        assert code == 0
        assert "removal markers: 2" in out

    def test_missing_column_is_cli_error(self, tmp_path, capsys):
        path = write_csv(tmp_path / "bad.csv", ["iter", "energy"], [[0, 1.0]])
        code = main(["recompile", str(path), "-o", str(tmp_path / "fig.png")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_svg_output(self, sweep_fixture, tmp_path):
        code = main(["fidelity", str(sweep_fixture), "-o", str(tmp_path / "fig.svg")])
        assert code == 0
        assert (tmp_path / "fig.svg").stat().st_size > 0
