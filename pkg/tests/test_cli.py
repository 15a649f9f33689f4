import subprocess
import sys

import pytest

from phasefrac.cli import main


def run_profile(tmp_path, *extra):
    out = tmp_path / "out"
    argv = ["run", "--case", "bar_1d_profile", "--out", str(out), "-q", *extra]
    return main(argv), out


class TestRunCommand:
    def test_smoke_writes_outputs(self, tmp_path, capsys):
        code, out = run_profile(tmp_path)
        assert code == 0
        assert (out / "history.csv").exists()
        assert (out / "case.cfg").exists()
        assert (out / "fields_00001.vtk").exists()
        header = (out / "history.csv").read_text().splitlines()[0]
        assert header.startswith("increment,displacement,force,iterations,converged")

    def test_vtk_carries_fields(self, tmp_path):
        _, out = run_profile(tmp_path)
        text = (out / "fields_00001.vtk").read_text()
        assert "SCALARS phi" in text
        assert "VECTORS displacement" in text
        assert "CELL_DATA" in text

    def test_set_override_lands_in_resolved_config(self, tmp_path):
        code, out = run_profile(tmp_path, "--set", "solve.max_iterations=19")
        assert code == 0
        assert "max_iterations = 19" in (out / "case.cfg").read_text()

    def test_bare_set_key_means_solver_field(self, tmp_path):
        code, out = run_profile(tmp_path, "--set", "extrapolate=true")
        assert code == 0
        assert "extrapolate = true" in (out / "case.cfg").read_text()

    def test_flag_overrides(self, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(out), "-q",
                "--increments", "3", "--scheme", "staggered",
                "--extrapolate", "off", "--workers", "2",
            ]
        )
        cfg = (out / "case.cfg").read_text()
        assert code == 0
        assert "n_increments = 3" in cfg
        assert "scheme = staggered-single" in cfg
        assert "workers = 2" in cfg

    def test_workers_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PHASEFRAC_WORKERS", "3")
        code, out = run_profile(tmp_path)
        assert code == 0
        assert "workers = 3" in (out / "case.cfg").read_text()

    def test_rerun_from_written_config_is_identical(self, tmp_path):
        _, first = run_profile(tmp_path)
        second = tmp_path / "second"
        code = main(
            ["run", "--config", str(first / "case.cfg"), "--out", str(second), "-q"]
        )
        assert code == 0
        assert (first / "history.csv").read_text() == (
            second / "history.csv"
        ).read_text()

    def test_nonconvergence_returns_2_with_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(out), "-q",
                "--increments", "6", "--set", "solve.max_iterations=2",
            ]
        )
        assert code == 2
        assert "non-converged" in capsys.readouterr().err
        assert (out / "history.csv").exists()  # partial outputs still written

    def test_write_fields_off(self, tmp_path):
        _, out = run_profile(tmp_path, "--write-fields", "off")
        assert not list(out.glob("*.vtk"))

    def test_write_fields_all(self, tmp_path):
        out = tmp_path / "out"
        main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(out), "-q",
                "--increments", "4",
            ]
        )
        # auto policy skips steady increments; rerun writing everything
        every = tmp_path / "every"
        main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(every), "-q",
                "--increments", "4", "--write-fields", "all",
            ]
        )
        assert len(list(every.glob("fields_*.vtk"))) == 4
        assert len(list(out.glob("fields_*.vtk"))) <= 4


class TestInputErrors:
    def test_unknown_case(self, capsys):
        assert main(["run", "--case", "nope", "--out", "x"]) == 1
        err = capsys.readouterr().err
        assert "error:" in err and "available" in err

    def test_malformed_set(self, capsys):
        assert main(["run", "--case", "bar_1d_profile", "--set", "junk"]) == 1
        assert "KEY=VALUE" in capsys.readouterr().err

    def test_unknown_override_path(self, capsys):
        code = main(
            ["run", "--case", "bar_1d_profile", "--set", "nope.field=1", "--out", "x"]
        )
        assert code == 1
        assert "unknown override key" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["run", "--config", "/no/such/file.cfg", "--out", "x"]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_bad_config_content_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[case]\nname = x\nwat\n")
        assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
        assert "line 3" in capsys.readouterr().err

    def test_usage_error_is_exit_1(self, capsys):
        assert main(["run"]) == 1  # neither --case nor --config
        assert main(["bogus-command"]) == 1

    def test_mesh_size_needs_h_fine(self, capsys):
        code = main(
            ["run", "--case", "bar_1d_profile", "--mesh-size", "0.01", "--out", "x"]
        )
        assert code == 1
        assert "mesh.<param>" in capsys.readouterr().err

    def test_case_and_config_are_exclusive(self, capsys):
        code = main(
            ["run", "--case", "bar_1d_profile", "--config", "x.cfg", "--out", "x"]
        )
        assert code == 1


class TestReportCommand:
    def test_report_on_directory(self, tmp_path, capsys):
        _, out = run_profile(tmp_path)
        capsys.readouterr()
        assert main(["report", str(out)]) == 0
        text = capsys.readouterr().out
        assert "cumulative iterations" in text
        assert "peak |force|" in text

    def test_report_flags_failed_rows(self, tmp_path, capsys):
        out = tmp_path / "out"
        main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(out), "-q",
                "--increments", "5", "--set", "solve.max_iterations=2",
            ]
        )
        capsys.readouterr()
        assert main(["report", str(out)]) == 0
        text = capsys.readouterr().out
        assert "FAILED" in text
        assert "non-converged" in text

    def test_report_missing_file(self, capsys):
        assert main(["report", "/no/such/dir"]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_cumulative_matches_row_sum(self, tmp_path, capsys):
        out = tmp_path / "out"
        main(
            [
                "run", "--case", "bar_1d_strength", "--out", str(out), "-q",
                "--increments", "4",
            ]
        )
        capsys.readouterr()
        main(["report", str(out)])
        lines = capsys.readouterr().out.splitlines()
        rows = [l for l in lines if l and l.split()[0].isdigit()]
        total = sum(int(l.split()[3]) for l in rows)
        summary = next(l for l in lines if l.startswith("cumulative iterations"))
        assert int(summary.split()[-1]) == total


class TestModuleEntry:
    def test_python_dash_m(self, tmp_path):
        out = tmp_path / "out"
        proc = subprocess.run(
            [
                sys.executable, "-m", "phasefrac.cli",
                "run", "--case", "bar_1d_profile", "--out", str(out), "-q",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert (out / "history.csv").exists()
