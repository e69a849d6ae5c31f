import json

import pytest

from thermolab.cli import main

RUN = """physics.kappa = 2
physics.gamma = 0.25
grid.L = 15
grid.n = 199
time.t_end = 1
time.dt = 0.05
time.record_every = 1
time.snapshot_every = 8
init.rho0 = gaussian(0.01, 0, 1)
init.phi = gaussian(0.01, 0, 1)
analysis.window = 0.2:1
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(RUN)
    return path


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestValidateParams:
    def test_valid(self, tmp_path, capsys):
        assert main(["validate-params", "--config", write(tmp_path, "a.cfg", "physics.gamma = 1\nphysics.kappa = 2\n")]) == 0
        assert "margin" in capsys.readouterr().out

    def test_first_condition(self, tmp_path, capsys):
        assert main(["validate-params", "--config", write(tmp_path, "a.cfg", "physics.gamma = 1\nphysics.epsilon = 3\nphysics.kappa = 8\n")]) == 1
        assert "failed: gamma*epsilon^2 <= 4" in capsys.readouterr().out

    def test_malformed(self, tmp_path, capsys):
        assert main(["validate-params", "--config", write(tmp_path, "a.cfg", "physics.gamma\n")]) == 2
        assert "line 1" in capsys.readouterr().err


class TestMakeWave:
    def test_traveling(self, tmp_path, capsys):
        out = tmp_path / "wave"
        assert main(["make-wave", "--config", write(tmp_path, "w.cfg", "wave.u_minus = 0\nwave.u_plus = 0.5\n"), "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "(admissible)" in text and "M_U" in text
        assert "xi,w,w_prime" in (out / "profile.csv").read_text().splitlines()

    def test_constant(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        assert main(["make-wave", "--config", write(tmp_path, "w.cfg", "wave.u_minus = 0.2\nwave.u_plus = 0.2\n"), "--out", str(out)]) == 0
        assert "K_W = 0  K_S0 = 0" in capsys.readouterr().out
        assert out.read_text().splitlines()[-1] == "0,0.20000000000000001,0"

    def test_imaginary_speed(self, tmp_path, capsys):
        assert main(["make-wave", "--config", write(tmp_path, "w.cfg", "wave.u_minus = 0.7\nwave.u_plus = 0.9\n"), "--out", str(tmp_path)]) == 1
        assert "ImaginarySpeed" in capsys.readouterr().err

    def test_symmetric_kink_has_no_connection(self, tmp_path, capsys):
        assert main(["make-wave", "--config", write(tmp_path, "w.cfg", "wave.u_minus = -0.5\nwave.u_plus = 0.5\n"), "--out", str(tmp_path)]) == 1
        assert "NoConnection" in capsys.readouterr().err


class TestSimulate:
    def test_outputs(self, cfg, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert list(report) == ["exponent", "c16", "alpha", "r2", "theta_bound_pass", "bernoulli_positive"]
        assert report["theta_bound_pass"] is True
        assert sorted(p.name for p in (out / "snapshots").iterdir()) == ["snap_00000000.csv", "snap_00000008.csv", "snap_00000016.csv", "snap_00000020.csv"]
        assert (out / "manifest.json").is_file()

    def test_reproducible_data_files(self, cfg, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--config", str(cfg), "--out", str(a)])
        main(["simulate", "--config", str(cfg), "--out", str(b)])
        for rel in ["series.csv", "report.json", "snapshots/snap_00000020.csv"]:
            assert (a / rel).read_bytes() == (b / rel).read_bytes()

    def test_resume(self, cfg, tmp_path):
        full, resumed = tmp_path / "full", tmp_path / "resumed"
        main(["simulate", "--config", str(cfg), "--out", str(full)])
        assert main(["simulate", "--config", str(cfg), "--out", str(resumed), "--resume", str(full / "snapshots/snap_00000008.csv")]) == 0
        assert (full / "series.csv").read_bytes() == (resumed / "series.csv").read_bytes()
        assert (full / "snapshots/snap_00000020.csv").read_bytes() == (resumed / "snapshots/snap_00000020.csv").read_bytes()

    def test_resume_grid_mismatch(self, cfg, tmp_path):
        full = tmp_path / "full"
        main(["simulate", "--config", str(cfg), "--out", str(full)])
        other = write(tmp_path, "o.cfg", RUN.replace("grid.n = 199", "grid.n = 99"))
        assert main(["simulate", "--config", other, "--out", str(tmp_path / "x"), "--resume", str(full / "snapshots/snap_00000008.csv")]) == 2

    def test_domain_failure(self, tmp_path, capsys):
        cooling = RUN.replace("physics.kappa = 2\nphysics.gamma = 0.25", "physics.kappa = 0.1\nphysics.gamma = 2\nphysics.epsilon = 0.1")
        cooling = cooling.replace("init.phi = gaussian(0.01, 0, 1)", "init.phi = gaussian(-0.95, 0, 1.5)\ninit.rho0_t = gaussian(0.5, 1, 1)")
        bad = write(tmp_path, "b.cfg", cooling)
        assert main(["simulate", "--config", bad, "--out", str(tmp_path / "o")]) == 1
        assert "partial series" in capsys.readouterr().err
        assert (tmp_path / "o" / "series.csv").is_file()


class TestMmsAndAnalyze:
    def test_zero_pair(self, tmp_path, capsys):
        c = write(tmp_path, "m.cfg", "mms.pair = zero\nmms.n0 = 63\nmms.time_n = 63\nmms.t_end = 0.2\n")
        assert main(["mms", "--config", c, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "convergence.csv").read_text().splitlines()[-1].endswith("exact,exact")
        assert "exact" in capsys.readouterr().out

    def test_too_few_levels(self, tmp_path):
        assert main(["mms", "--config", write(tmp_path, "m.cfg", ""), "--levels", "1"]) == 2

    def test_analyze_window(self, cfg, tmp_path):
        out = tmp_path / "out"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["analyze", "--series", str(out / "series.csv"), "--window", "0.2:1", "--out", str(tmp_path / "an")]) == 0
        assert json.loads((tmp_path / "an" / "report.json").read_text())["exponent"] < 0

    def test_analyze_bad_window(self, cfg, tmp_path):
        out = tmp_path / "out"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert main(["analyze", "--series", str(out / "series.csv"), "--window", "a:b"]) == 2

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 2
