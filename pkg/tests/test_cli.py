import pytest

from neutron_entangle.cli import EXIT_INVALID, EXIT_OK, main


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def data_lines(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


@pytest.fixture
def fig2_config(tmp_path):
    return write_config(tmp_path, """
[protocol]
B_z = 0.0

[sweep]
variable = "tau"
lo = 0.0
hi = 1.5
points = 61
engine = "sector_oracle"
variants = ["A", "B"]
""")


class TestSimulate:
    def test_outputs(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["simulate", "--out", str(out)]) == EXIT_OK
        assert "concurrence = 0.76980" in capsys.readouterr().out
        for name in ("neutron_rho.csv", "summary.csv", "stage_log.csv"):
            text = (out / name).read_text()
            assert "# config_hash: " in text
        assert len(data_lines(out / "neutron_rho.csv")) == 17
        stages = [l.split(",")[0] for l in data_lines(out / "stage_log.csv")[1:]]
        assert stages == ["initial", "free", "scatter_1", "free_prime", "scatter_2"]

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--out", str(a)])
        main(["simulate", "--out", str(b)])
        for name in ("neutron_rho.csv", "summary.csv", "stage_log.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_engine_override(self, tmp_path, capsys):
        assert main(["simulate", "--out", str(tmp_path), "--engine", "collective"]) == EXIT_OK
        assert "0.76980" in capsys.readouterr().out
        assert main(["simulate", "--out", str(tmp_path), "--engine", "warp"]) == EXIT_INVALID


class TestSweep:
    def test_series_files_and_plot(self, tmp_path, fig2_config):
        out = tmp_path / "o"
        assert main(["sweep", "--config", fig2_config, "--out", str(out), "--plot"]) == EXIT_OK
        for name in ("sweep_A_N4.csv", "sweep_B_N4.csv"):
            lines = data_lines(out / name)
            assert lines[0] == "variable,value,concurrence,engine,config_hash"
            assert len(lines) == 62
        svg = out / "sweep.svg"
        assert svg.exists() and svg.read_text().lstrip().startswith("<?xml")

    def test_byte_identical_reruns(self, tmp_path, fig2_config):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["sweep", "--config", fig2_config, "--out", str(a), "--plot", "--seed", "3"])
        main(["sweep", "--config", fig2_config, "--out", str(b), "--plot", "--seed", "3"])
        for f in a.iterdir():
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name

    def test_config_hash_changes_with_config(self, tmp_path, fig2_config):
        other = write_config(tmp_path, "[protocol]\nB_z = 1.0\n", "other.toml")
        main(["sweep", "--config", fig2_config, "--out", str(tmp_path / "a")])
        main(["sweep", "--config", other, "--out", str(tmp_path / "b")])
        ha = data_lines(tmp_path / "a" / "sweep_A_N4.csv")[1].split(",")[-1]
        hb = data_lines(tmp_path / "b" / "sweep_A_N4.csv")[1].split(",")[-1]
        assert ha != hb


class TestVerify:
    def test_all_pass(self, capsys):
        assert main(["verify"]) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines and all(l.startswith("PASS") for l in lines)

    def test_printed_sign_warns(self, tmp_path, capsys):
        cfg = write_config(tmp_path, '[witness]\nsign_convention = "paper"\n')
        assert main(["verify", "--config", cfg]) == EXIT_OK
        assert "WARN" in capsys.readouterr().out


class TestFeasibility:
    def test_report(self, tmp_path):
        assert main(["feasibility", "--out", str(tmp_path)]) == EXIT_OK
        text = (tmp_path / "feasibility.txt").read_text()
        assert "dB_over_B_star.status=DISAGREES" in text
        assert "# dipole prefactor: si" in text


class TestWitness:
    def test_detects_entanglement(self, tmp_path):
        assert main(["witness", "--out", str(tmp_path), "--seed", "1"]) == EXIT_OK
        rows = dict(l.split(",", 1) for l in data_lines(tmp_path / "witness.csv")[1:])
        est, se = float(rows["estimate"]), float(rows["stderr"])
        assert float(rows["exact"]) == pytest.approx(-0.25, abs=1e-9)
        assert est + 3 * se < 0

    def test_seeded(self, tmp_path):
        main(["witness", "--out", str(tmp_path / "a"), "--seed", "5"])
        main(["witness", "--out", str(tmp_path / "b"), "--seed", "5"])
        assert (tmp_path / "a" / "witness.csv").read_bytes() == (tmp_path / "b" / "witness.csv").read_bytes()


class TestInvalidInput:
    def test_unknown_key_named(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[protocol]\nN = 4\nfield = 2.0\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INVALID
        assert "protocol.field" in capsys.readouterr().err

    def test_negative_field(self, tmp_path):
        cfg = write_config(tmp_path, "[protocol]\nB_z = -1.0\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INVALID

    def test_missing_file(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.toml")]) == EXIT_INVALID

    def test_bad_toml(self, tmp_path):
        cfg = write_config(tmp_path, "[protocol\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INVALID


@pytest.mark.parametrize("name", ["time_traces", "peak_vs_field", "witness_printed_sign"])
def test_shipped_configs_load(name):
    from pathlib import Path

    from neutron_entangle.config import RunConfig

    RunConfig.load(Path(__file__).parents[1] / "configs" / f"{name}.toml")
