import math

import numpy as np
import pytest

from rabipiston.cli import main
from rabipiston.grid import norm, read_field_csv
from rabipiston.piston import PistonTrajectory, StationarySurface

from conftest import synthetic_surface

COARSE = ["--set", "n_points=512"]


@pytest.fixture
def surface_file(tmp_path):
    path = tmp_path / "surface.txt"
    synthetic_surface(na=30, nphi=30).to_file(path, header="# synthetic\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(path):
    body = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    return np.loadtxt(body[1:], delimiter=",", ndmin=2)


def header_of(path):
    return [line for line in path.read_text().splitlines() if line.startswith("#")]


def test_trial_writes_csv_with_manifest(tmp_path, capsys):
    code, _, _ = run(capsys, "trial", "--deltas", "1,5", "--na", "5", "--out", tmp_path,
                     "--set", "g_s=4")
    assert code == 0
    path = tmp_path / "trial_shift.csv"
    head = header_of(path)
    assert head[0] == "# rabipiston 0.1.0"
    assert "# command = trial" in head and "# overrides = g_s=4" in head
    assert any(line.startswith("# config_hash = ") for line in head)
    assert "# param.g_s = 4.0" in head or "# param.g_s = 4" in head
    rows = table(path)
    assert rows.shape == (10, 4)
    assert np.all(np.isnan(rows[:, 3]))
    # the critical splitting 1.5 g / a crosses delta = 5 inside [0.5, 4]
    big = rows[rows[:, 1] == 5]
    np.testing.assert_allclose(big[0, 2], 25 / 24)
    np.testing.assert_allclose(big[-1, 2], 3 * 4 / (8 * 4.0**2))


def test_outputs_are_deterministic(tmp_path, capsys, surface_file):
    for name in ("a", "b"):
        args = ["simulate", "--mode", "surrogate", "--surface", surface_file, "--tf", "20",
                "--c1", "0.2", "--c2", "0.4", "--out", tmp_path / name]
        assert run(capsys, *args)[0] == 0
    for f in ("trajectory.csv", "summary.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_surrogate(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "simulate", "--mode", "surrogate", "--surface", surface_file,
                       "--tf", "20", "--every", "100", "--out", tmp_path)
    assert code == 0 and out.startswith("xi2 = ")
    traj = PistonTrajectory.from_csv(tmp_path / "trajectory.csv")
    assert traj.mode == "surrogate" and len(traj.times) == 801
    assert traj.phi[-1] == pytest.approx(math.pi / 2)
    summary = (tmp_path / "summary.txt").read_text()
    assert "mode = surrogate" in summary and "xi2 = " in summary
    assert "# arg.tf = 20.0" in header_of(tmp_path / "summary.txt")


def test_simulate_surrogate_needs_surface(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--mode", "surrogate", "--out", tmp_path)
    assert code == 1 and "--surface" in err


@pytest.mark.parametrize("argv, fragment", [
    (["ground-state", "--a", "7"], "must lie in"),
    (["trial", "--set", "g_s=-1"], "g_s"),
    (["trial", "--set", "colour=blue"], "colour"),
    (["simulate", "--c1", "0.2", "--mode", "surrogate"], "together"),
    (["trial", "--jobs", "0"], "jobs"),
])
def test_invalid_input_exits_1(tmp_path, capsys, argv, fragment):
    code, _, err = run(capsys, *argv, "--out", tmp_path)
    assert code == 1 and fragment in err


def test_missing_files_exit_3(tmp_path, capsys):
    code, _, err = run(capsys, "trial", "--config", tmp_path / "nope.cfg", "--out", tmp_path)
    assert code == 3 and "nope.cfg" in err
    code, _, _ = run(capsys, "equilibrium", "--surface", tmp_path / "nope.txt", "--out", tmp_path)
    assert code == 3


def test_config_file_is_recorded(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("delta = 3\n")
    assert run(capsys, "trial", "--config", cfg, "--na", "3", "--out", tmp_path)[0] == 0
    head = header_of(tmp_path / "trial_shift.csv")
    assert f"# config = {cfg}" in head and "# param.delta = 3.0" in head


def test_equilibrium_on_surface(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "equilibrium", "--surface", surface_file, "--out", tmp_path)
    assert code == 0
    rows = table(tmp_path / "equilibria.csv")
    # P = 8/a^3 at phi = pi/2 on the synthetic table
    assert rows[1, 1] == pytest.approx((8 / 1.05) ** 0.25, abs=1e-6)


def test_work_report_from_saved_trajectory(tmp_path, capsys, surface_file):
    run(capsys, "simulate", "--mode", "surrogate", "--surface", surface_file, "--tf", "20",
        "--every", "1", "--out", tmp_path)
    code, out, _ = run(capsys, "work-report", "--surface", surface_file,
                       "--trajectory", tmp_path / "trajectory.csv", "--out", tmp_path)
    assert code == 0 and "closure" in out
    values = dict(line.split(" = ") for line in (tmp_path / "work.txt").read_text().splitlines()
                  if not line.startswith("#"))
    # a surrogate run feels exactly the stationary pressure
    assert abs(float(values["dw_p"])) < 1e-6
    assert abs(float(values["closure"])) < 1e-5


def test_optimize_stage1_only(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "optimize", "--surface", surface_file, "--tf", "60",
                       "--skip-stage2", "--out", tmp_path)
    assert code == 0 and "stage 1:" in out and "stage 2:" not in out
    assert (tmp_path / "stage1.txt").exists() and not (tmp_path / "stage2.txt").exists()
    log = table(tmp_path / "optimize_log.csv")
    assert np.all(log[:, 0] == 1) and log[-1, 4] == len(log)


def test_optimize_skips_stage2_above_threshold(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "optimize", "--surface", surface_file, "--tf", "3",
                       "--out", tmp_path)
    assert code == 0 and "skipping stage 2" in out
    assert not (tmp_path / "stage2.txt").exists()


def test_speed_limit_list(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "speed-limit", "--surface", surface_file, "--tf-list", "5,60",
                       "--out", tmp_path)
    assert code == 0
    head = header_of(tmp_path / "speed_limit.csv")
    assert any(line.startswith("# t_fc = ") for line in head)
    rows = table(tmp_path / "speed_limit.csv")
    assert rows.shape[1] == 4 and rows[0, 0] == 5.0


def test_ground_state_command(tmp_path, capsys):
    code, _, _ = run(capsys, "ground-state", "--a", "1.75", "--phi", "0.5", *COARSE,
                     "--out", tmp_path)
    assert code == 0
    field = read_field_csv(tmp_path / "ground_state_field.csv")
    assert field.grid.n == 512 and norm(field) == pytest.approx(1.0, abs=1e-12)
    summary = (tmp_path / "ground_state.txt").read_text()
    assert "energy = " in summary and "pressure = " in summary


def test_surface_command(tmp_path, capsys):
    code, _, _ = run(capsys, "surface", "--na", "8", "--nphi", "8", "--a-min", "1.7",
                     "--a-max", "1.8", "--phi-min", "0", "--phi-max", "0.25", *COARSE,
                     "--out", tmp_path, "--name", "s.txt")
    assert code == 0
    surf = StationarySurface.from_file(tmp_path / "s.txt")
    assert surf.phi_grid[-1] == pytest.approx(math.pi / 4)
    assert surf.s_values is not None
    assert header_of(tmp_path / "s.txt")[0] == "# rabipiston 0.1.0"


@pytest.mark.slow
def test_simulate_exact_and_stage2(tmp_path, capsys, surface_file):
    code, out, _ = run(capsys, "simulate", "--tf", "0.5", "--a0", "1.75", "--a-target", "1.75",
                       "--snapshot-every", "1000", *COARSE, "--out", tmp_path / "sim")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "sim" / "snapshots").iterdir()) == [
        "field_00001000.csv", "field_00002000.csv"]
    code, out, _ = run(capsys, "optimize", "--surface", surface_file, "--tf", "1",
                       "--force-stage2", *COARSE, "--out", tmp_path / "opt")
    assert code == 0 and "stage 2:" in out
    log = table(tmp_path / "opt" / "optimize_log.csv")
    assert set(log[:, 0]) == {1.0, 2.0}
