import json
import subprocess
import sys

import numpy as np
import pytest

from gyrokit.cli import main, worker_count
from gyrokit.io import parse_touchstone
from gyrokit.smatrix import reciprocity_defect


def run(*argv) -> int:
    return main(list(argv))


@pytest.fixture
def reciprocal_s4p(tmp_path):
    path = tmp_path / "ring.s4p"
    code = run(
        "synth", "--f0", "5.69e9", "--q", "30", "--u", "0", "--g", "0.8",
        "--n-points", "201", "-o", str(path),
    )
    assert code == 0
    return path


@pytest.fixture
def nonreciprocal_s4p(tmp_path):
    path = tmp_path / "active.s4p"
    code = run(
        "synth", "--f0", "5.7e9", "--q", "30", "--u", "1", "--g", "1.8",
        "--n-points", "201", "-o", str(path),
    )
    assert code == 0
    return path


class TestSynth:
    def test_writes_parseable_file(self, reciprocal_s4p):
        net = parse_touchstone(reciprocal_s4p.read_text(), n_ports=4)
        assert net.n_ports == 4
        assert net.frequencies.size == 201
        assert max(reciprocity_defect(m) for m in net.data) < 1e-12

    def test_active_warning_on_stderr(self, tmp_path, capsys):
        path = tmp_path / "hot.s4p"
        assert run(
            "synth", "--f0", "5.7e9", "--q", "30", "--u", "1", "--g", "2.0",
            "--n-points", "51", "-o", str(path),
        ) == 0
        assert "active" in capsys.readouterr().err

    def test_invalid_params_exit_2(self, tmp_path):
        assert run(
            "synth", "--f0", "5.7e9", "--q", "30", "--u", "2", "--g", "1",
            "-o", str(tmp_path / "x.s4p"),
        ) == 2


class TestCheckReciprocity:
    def test_reciprocal_exits_0(self, reciprocal_s4p, capsys):
        assert run("check-reciprocity", str(reciprocal_s4p)) == 0
        assert "reciprocal" in capsys.readouterr().out

    def test_nonreciprocal_exits_3(self, nonreciprocal_s4p, capsys):
        assert run("check-reciprocity", str(nonreciprocal_s4p)) == 3
        assert "NONRECIPROCAL" in capsys.readouterr().out

    def test_batch_worst_verdict_wins(self, reciprocal_s4p, nonreciprocal_s4p):
        assert run(
            "check-reciprocity", str(reciprocal_s4p), str(nonreciprocal_s4p)
        ) == 3

    def test_missing_file_exits_2(self):
        assert run("check-reciprocity", "/nonexistent/x.s2p") == 2

    def test_gyro_threads_env(self, monkeypatch):
        monkeypatch.setenv("GYRO_THREADS", "2")
        assert worker_count(8) == 2
        monkeypatch.setenv("GYRO_THREADS", "bogus")
        from gyrokit.errors import InputError

        with pytest.raises(InputError):
            worker_count(8)
        monkeypatch.delenv("GYRO_THREADS")
        assert worker_count(1) == 1


class TestAnalyze:
    def test_csv_written_and_summary_printed(self, nonreciprocal_s4p, tmp_path, capsys):
        out = tmp_path / "pol.csv"
        assert run("analyze", str(nonreciprocal_s4p), "-o", str(out)) == 0
        err = capsys.readouterr().err
        assert err.startswith("analyze: resonance ")
        f_res = float(err.split("resonance ")[1].split(" GHz")[0])
        assert abs(f_res - 5.7) < 0.02
        rows = out.read_text().strip().split("\n")
        assert len(rows) == 202
        assert rows[0].startswith("freq_hz,theta_f_rad")

    def test_stdout_when_no_output_file(self, nonreciprocal_s4p, capsys):
        assert run("analyze", str(nonreciprocal_s4p)) == 0
        assert capsys.readouterr().out.startswith("freq_hz,")

    def test_no_resonance_exits_3(self, tmp_path):
        # flat sweep: frequency-independent half-thru, no transmission dip
        path = tmp_path / "flat.s4p"
        body = ["# GHZ S RI R 50"]
        for f in (4.0, 4.1, 4.2, 4.3):
            body.append(f"{f} 0 0 0 0 0.5 0 0 0")
            body.append("0 0 0 0 0 0 0.5 0")
            body.append("0.5 0 0 0 0 0 0 0")
            body.append("0 0 0.5 0 0 0 0 0")
        path.write_text("\n".join(body) + "\n")
        assert run("analyze", str(path)) == 3

    def test_port_map_round_trip(self, nonreciprocal_s4p, tmp_path, capsys):
        # swapped mapping applied twice is identity on the analysis
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert run("analyze", str(nonreciprocal_s4p), "-o", str(out1)) == 0
        assert run(
            "analyze", str(nonreciprocal_s4p),
            "--port-map", "1=1:TE,2=1:TM,3=2:TE,4=2:TM", "-o", str(out2),
        ) == 0
        assert out1.read_text() == out2.read_text()

    def test_bad_port_map_exits_2(self, nonreciprocal_s4p):
        assert run("analyze", str(nonreciprocal_s4p), "--port-map", "garbage") == 2

    def test_direction_flag(self, nonreciprocal_s4p, tmp_path):
        out1 = tmp_path / "d1.csv"
        out2 = tmp_path / "d2.csv"
        assert run("analyze", str(nonreciprocal_s4p), "--direction", "1", "-o", str(out1)) == 0
        assert run("analyze", str(nonreciprocal_s4p), "--direction", "2", "-o", str(out2)) == 0
        assert out1.read_text() != out2.read_text()


class TestDesign:
    def test_prints_expected_numbers(self, capsys):
        assert run(
            "design", "--f-target", "5.7e9", "--eps-r", "4.4",
            "--height", "0.8e-3", "--trace-width", "1.6e-3",
        ) == 0
        out = capsys.readouterr().out
        assert "3.3425" in out
        assert "4.57" in out or "4.58" in out  # mean radius mm
        assert "5.7 GHz" in out

    def test_narrow_trace_exits_2(self):
        assert run(
            "design", "--f-target", "5.7e9", "--eps-r", "4.4",
            "--height", "0.8e-3", "--trace-width", "0.4e-3",
        ) == 2


class TestFerrite:
    def test_tensor_output(self, capsys):
        assert run(
            "ferrite", "tensor", "--h0", "1000", "--m0", "1800", "--freq", "1e9"
        ) == 0
        out = capsys.readouterr().out
        assert "larmor frequency : 2.8 GHz" in out
        assert "mu" in out and "tensor" in out

    def test_tensor_on_resonance_exits_4(self):
        assert run(
            "ferrite", "tensor", "--h0", "1000", "--m0", "1800", "--freq", "2.8e9"
        ) == 4

    def test_llg_reports_precession(self, capsys, tmp_path):
        traj = tmp_path / "traj.csv"
        assert run(
            "ferrite", "llg", "--h0", "1000", "--tilt-deg", "30", "-o", str(traj)
        ) == 0
        out = capsys.readouterr().out
        assert "precession       : 2.8" in out
        rows = traj.read_text().strip().split("\n")
        assert rows[0] == "t_s,mx_g,my_g,mz_g"
        assert len(rows) > 1000


class TestCosim:
    def test_thru_two_port_is_identity(self, nonreciprocal_s4p, tmp_path):
        # 2-port thru expands to a polarization-diagonal perfect connection
        thru = tmp_path / "thru.s2p"
        body = ["# GHZ S RI R 50"]
        net = parse_touchstone(nonreciprocal_s4p.read_text(), n_ports=4)
        for f in net.frequencies:
            body.append(f"{f / 1e9:.12g} 0 0 1 0 1 0 0 0")
        thru.write_text("\n".join(body) + "\n")
        out = tmp_path / "out.s4p"
        assert run("cosim", str(nonreciprocal_s4p), str(thru), "-o", str(out)) == 0
        got = parse_touchstone(out.read_text(), n_ports=4)
        assert np.max(np.abs(got.data - net.data)) < 1e-9

    def test_grid_mismatch_exits_2(self, nonreciprocal_s4p, tmp_path):
        thru = tmp_path / "thru.s2p"
        thru.write_text("# GHZ S RI R 50\n1.0 0 0 1 0 1 0 0 0\n")
        assert run("cosim", str(nonreciprocal_s4p), str(thru), "-o", str(tmp_path / "o.s4p")) == 2


class TestOptimize:
    def test_full_run_writes_report_and_log(self, tmp_path):
        config = {
            "grid": {"f_start": 5.0e9, "f_stop": 6.4e9, "n_points": 281},
            "surrogate": {"f0": 5.4e9, "q_loaded": 15.0, "u": 0.5, "g": 1.2},
            "goal": {"f_target": 5.7e9},
            "optimizer": {"max_iter": 60},
        }
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps(config))
        report_path = tmp_path / "report.json"
        log_path = tmp_path / "run.csv"
        assert run(
            "optimize", "--config", str(cfg), "-o", str(report_path), "--log", str(log_path)
        ) == 0

        report = json.loads(report_path.read_text())
        assert report["iterations"] <= 60
        assert abs(report["kpi"]["f_res_hz"] - 5.7e9) / 5.7e9 < 0.005
        assert abs(report["kpi"]["theta_f_deg"]) >= 85.0
        assert report["kpi"]["copol_at_res"] < 0.05
        assert abs(report["kpi"]["cross_pol_phase_diff_rad"] - np.pi) < 1e-3

        log_rows = log_path.read_text().strip().split("\n")
        assert log_rows[0] == "iteration,cost,grad_norm,f0,q_loaded,u,g"
        assert len(log_rows) >= 3

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{")
        assert run("optimize", "--config", str(cfg)) == 2


class TestUsageAndHelp:
    def test_missing_subcommand_exits_1(self, capsys):
        assert run() == 1
        capsys.readouterr()

    def test_unknown_flag_exits_1(self, capsys):
        assert run("design", "--nope") == 1
        capsys.readouterr()

    def test_module_entrypoint_help(self):
        out = subprocess.run(
            [sys.executable, "-m", "gyrokit", "--help"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert "analyze" in out.stdout and "optimize" in out.stdout

    def test_version_flag(self, capsys):
        assert run("--version") == 0
        assert "gyrokit" in capsys.readouterr().out
