import xml.etree.ElementTree as ET

import pytest

from epochsa.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from epochsa.reporting import CSV_HEADER, csv_to_rows

SMALL_RUN = """\
[problem]
kind = least_squares
d = 4
B = 2.0
a = 0.3
seed = 7

[solver]
algorithm = epoch_gd

[experiment]
budget_grid = 60, 120
trials = 5
base_seed = 9

[output]
csv = {csv}
verbosity = 0
"""


@pytest.fixture()
def small_config(tmp_path):
    def write(text=None, **fmt):
        path = tmp_path / "exp.cfg"
        fmt.setdefault("csv", str(tmp_path / "out.csv"))
        path.write_text((text or SMALL_RUN).format(**fmt), encoding="utf-8")
        return path

    return write


class TestRun:
    def test_writes_csv_row_per_budget(self, small_config, tmp_path, capsys):
        cfg = small_config()
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        rows = csv_to_rows((tmp_path / "out.csv").read_text())
        assert [r.T for r in rows] == [60, 120]
        assert all(r.algorithm == "epoch_gd" and r.trials == 5 for r in rows)
        out = capsys.readouterr().out
        assert "satisfied=true" in out
        assert "theoretical_rhs_half_budget=" in out  # conservative variant reported

    def test_byte_identical_reruns(self, small_config, tmp_path):
        cfg = small_config()
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        first = (tmp_path / "out.csv").read_bytes()
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        assert (tmp_path / "out.csv").read_bytes() == first

    def test_flag_overrides(self, small_config, tmp_path):
        cfg = small_config()
        other = tmp_path / "other.csv"
        assert main(["run", "--config", str(cfg), "--out", str(other), "--trials", "2"]) == EXIT_OK
        rows = csv_to_rows(other.read_text())
        assert all(r.trials == 2 for r in rows)

    def test_seed_override_changes_samples(self, small_config, tmp_path):
        cfg = small_config()
        out = tmp_path / "out.csv"
        assert main(["run", "--config", str(cfg), "--seed", "1"]) == EXIT_OK
        first = out.read_bytes()
        assert main(["run", "--config", str(cfg), "--seed", "1"]) == EXIT_OK
        assert out.read_bytes() == first
        assert main(["run", "--config", str(cfg), "--seed", "2"]) == EXIT_OK
        assert out.read_bytes() != first

    def test_corrupted_bound_exits_two(self, small_config, tmp_path):
        # shrinking the certified gradient bound makes the theoretical rhs
        # smaller than the observed excess; enough trials that the 3 SE
        # allowance cannot absorb the gap
        text = SMALL_RUN.replace("a = 0.3", "a = 0.3\nG = 0.001")
        cfg = small_config(text)
        assert main(["run", "--config", str(cfg), "--trials", "30"]) == EXIT_CHECK_FAILED
        rows = csv_to_rows((tmp_path / "out.csv").read_text())
        assert any(not r.satisfied for r in rows)

    def test_minimal_fasa_config_with_degenerate_budgets(self, small_config, tmp_path, capsys):
        # tiny budgets cannot fit a phase-2 epoch; those trials return the
        # warm-start point, the run still completes, and the operator is told
        text = SMALL_RUN.replace(
            "algorithm = epoch_gd", "algorithm = fasa\nalpha = 2.0"
        ).replace("budget_grid = 60, 120", "budget_grid = 16, 64, 256").replace(
            "verbosity = 0", "verbosity = 1"
        )
        cfg = small_config(text)
        assert main(["run", "--config", str(cfg), "--trials", "20"]) == EXIT_OK
        rows = csv_to_rows((tmp_path / "out.csv").read_text())
        assert len(rows) == 3
        assert "too small" in capsys.readouterr().err

    def test_svg_and_epoch_outputs(self, small_config, tmp_path):
        text = SMALL_RUN.replace(
            "verbosity = 0",
            "verbosity = 0\nsvg = {svg}\nepochs_csv = {epochs}",
        )
        cfg = small_config(text, svg=str(tmp_path / "o.svg"), epochs=str(tmp_path / "e.csv"))
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        assert ET.fromstring((tmp_path / "o.svg").read_text()) is not None
        epoch_lines = (tmp_path / "e.csv").read_text().splitlines()
        assert epoch_lines[0] == "algorithm,T,k,mean_excess,std_error"
        assert len(epoch_lines) > 2


class TestConfigErrors:
    def test_config_error_exit_and_stderr(self, small_config, capsys):
        cfg = small_config(SMALL_RUN.replace("algorithm = epoch_gd", "algorithm = epoch_gd\nalpha = 2.0"))
        assert main(["run", "--config", str(cfg)]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "does not apply" in err

    def test_missing_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.cfg")]) == EXIT_USAGE

    def test_bad_flag(self):
        assert main(["run", "--bogus"]) == EXIT_USAGE

    def test_help_is_success(self):
        assert main(["--help"]) == EXIT_OK


class TestCheckAssumptions:
    def test_valid_problem_passes(self, small_config, capsys):
        cfg = small_config()
        assert main(["check-assumptions", "--config", str(cfg), "--checks", "500"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("PASS") == 6 and "FAIL" not in out

    def test_corrupted_smoothness_fails(self, small_config, capsys):
        # halving the certified smoothness constant must trip the Lipschitz check
        text = SMALL_RUN.replace("a = 0.3", "a = 0.3\nL = 1.0")
        cfg = small_config(text)
        assert main(["check-assumptions", "--config", str(cfg), "--checks", "5000"]) == EXIT_CHECK_FAILED
        out = capsys.readouterr().out
        assert any(line.startswith("FAIL smoothness") for line in out.splitlines())


class TestFitRateAndPlot:
    @pytest.fixture()
    def result_csv(self, tmp_path):
        path = tmp_path / "res.csv"
        lines = [CSV_HEADER]
        for T, excess in [(64, 1e-2), (256, 6.25e-4), (1024, 3.9e-5)]:
            lines.append(f"fasa,{T},100,{excess},1e-6,1.0,true,5,{T}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_fit_rate_outputs_slope(self, result_csv, capsys, tmp_path):
        out_path = tmp_path / "fits.txt"
        assert main(["fit-rate", "--csv", str(result_csv), "--out", str(out_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "algorithm=fasa" in out and "slope=-2.0" in out
        assert out_path.read_text().startswith("algorithm=fasa")

    def test_plot_emits_polyline_per_algorithm(self, result_csv, tmp_path):
        svg_path = tmp_path / "plot.svg"
        assert main(["plot", "--csv", str(result_csv), "--out", str(svg_path)]) == EXIT_OK
        svg = svg_path.read_text()
        root = ET.fromstring(svg)
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 1

    def test_plot_epochs_panel(self, result_csv, tmp_path):
        epochs = tmp_path / "e.csv"
        epochs.write_text(
            "algorithm,T,k,mean_excess,std_error\n"
            "epoch_gd_f,1280,1,0.1,0.01\n"
            "epoch_gd_f,1280,2,0.05,0.005\n"
            "epoch_gd_f,1280,3,0.02,0.002\n",
            encoding="utf-8",
        )
        svg_path = tmp_path / "plot.svg"
        epochs_svg = tmp_path / "epochs.svg"
        code = main(
            [
                "plot",
                "--csv",
                str(result_csv),
                "--out",
                str(svg_path),
                "--epochs-csv",
                str(epochs),
                "--epochs-out",
                str(epochs_svg),
            ]
        )
        assert code == EXIT_OK
        assert ET.fromstring(epochs_svg.read_text()) is not None
