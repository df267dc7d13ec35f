"""Config parsing, CLI commands and the file interfaces."""

import hashlib
import os

import numpy as np
import pytest

from chns.cli import load_state_dump, main
from chns.config import build_simulation, parse_config, serialize_config
from chns.diagnostics import CSV_COLUMNS, DiagnosticsRecord
from chns.errors import ConfigError


# ---------------------------------------------------------------------------
# config

def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg["grid.n"] == 64
    assert cfg["time.dt"] == 1e-4
    assert cfg["potential.kind"] == "regular"
    assert cfg["mobility.kind"] == "constant"
    assert cfg["potential.c0"] == "auto"


def test_config_comments_and_values():
    cfg = parse_config("""
    # a comment
    grid.n = 32   # trailing comment
    physics.r = 2.5
    potential.kind = logarithmic
    """)
    assert cfg["grid.n"] == 32
    assert cfg["physics.r"] == 2.5
    assert cfg["potential.kind"] == "logarithmic"


def test_config_syntax_error_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config("grid.n = 32\nnot a valid line\n")
    assert "line 2" in str(err.value)


def test_config_unknown_key():
    with pytest.raises(ConfigError) as err:
        parse_config("grid.m = 7\n")
    assert "grid.m" in str(err.value)


def test_config_constraint_errors_name_key():
    with pytest.raises(ConfigError) as err:
        parse_config("physics.r = 0.5\n")
    assert "physics.r" in str(err.value) and "r >= 1" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_config("potential.theta = 0.3\npotential.theta_c = 0.2\n")
    assert "theta" in str(err.value)
    with pytest.raises(ConfigError):
        parse_config("grid.dim = 3\ngrid.n = 64\n")
    with pytest.raises(ConfigError):
        parse_config("potential.kind = logarithmic\ninit.phi_mean = 0.99\n")
    with pytest.raises(ConfigError):
        parse_config("physics.nu = 0\n")


def test_serialize_roundtrip_idempotent():
    text = "grid.n = 32\nphysics.nu = 0.25\npotential.kind = logarithmic\n"
    cfg = parse_config(text)
    canon = serialize_config(cfg)
    again = serialize_config(parse_config(canon))
    assert canon == again
    assert parse_config(canon).values == cfg.values


def test_build_simulation_from_config():
    cfg = parse_config("grid.n = 16\nmobility.kind = clamped\nmobility.epsilon = 0.1\n")
    sim = build_simulation(cfg)
    assert sim.grid.n == 16
    assert sim.mob.kind == "clamped"
    rec = sim.step()
    assert abs(rec.mass - sim.ledger.records[0].mass) <= 1e-12


# ---------------------------------------------------------------------------
# CLI

def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


FAST_CFG = """
grid.n = 16
time.dt = 1e-4
time.t_final = 2e-3
output.every_k_steps = 4
"""


def read_rows(path):
    lines = open(path).read().strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    return [DiagnosticsRecord.from_csv_row(row) for row in lines[1:]]


def test_simulate_writes_csv_and_dump(tmp_path):
    cfg = write_cfg(tmp_path, FAST_CFG)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    rows = read_rows(os.path.join(out, "diagnostics.csv"))
    assert rows[0].t == 0.0
    assert rows[-1].t == pytest.approx(2e-3)
    # every 4th step plus initial and final
    assert len(rows) == 1 + 20 // 4
    dim, n, arrays = load_state_dump(os.path.join(out, "final_state.chns"))
    assert (dim, n) == (2, 16)
    sim = build_simulation(parse_config(FAST_CFG))
    sim.run()
    assert np.array_equal(arrays[0], sim.state.phi.data)
    assert np.array_equal(arrays[1], sim.state.u.components[0])
    assert np.array_equal(arrays[3], sim.state.pi.data)


def test_simulate_zero_initial_data(tmp_path):
    cfg = write_cfg(tmp_path, """
    grid.n = 16
    time.dt = 1e-4
    time.t_final = 1e-3
    init.phi_mean = 0.0
    init.noise_amp = 0.0
    output.every_k_steps = 1
    """)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    rows = read_rows(os.path.join(out, "diagnostics.csv"))
    for row in rows:
        assert row.mass == 0.0
        assert row.kinetic == 0.0
        assert row.interfacial == 0.0
        assert row.visc_diss == 0.0 and row.damp_diss == 0.0 and row.mob_diss == 0.0
        assert row.work == 0.0 and row.div_max == 0.0 and row.phi_max == 0.0
        assert row.bulk == pytest.approx(1.0, abs=1e-12)  # F(0) |Omega|


def test_simulate_rerun_reproduces_csv(tmp_path):
    cfg = write_cfg(tmp_path, FAST_CFG)
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["simulate", "--config", cfg, "--out", out]) == 0
        outs.append(open(os.path.join(out, "diagnostics.csv")).read())
    assert outs[0] == outs[1]


def test_simulate_cfl_failure_leaves_parseable_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path, """
    grid.n = 16
    time.dt = 1.0
    time.t_final = 2.0
    init.velocity = vortex
    init.velocity_amp = 0.5
    """)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 1
    err = capsys.readouterr().err
    assert "CFL" in err
    rows = read_rows(os.path.join(out, "diagnostics.csv"))  # no torn rows
    assert len(rows) == 1


def test_verify_default_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "grid.n = 16\ntime.t_final = 2e-3\n")
    assert main(["verify", "--config", cfg]) == 0
    first = capsys.readouterr().out
    assert "FAIL" not in first
    assert main(["verify", "--config", cfg]) == 0
    second = capsys.readouterr().out
    assert first == second  # deterministic table


def test_verify_huge_dt_fails(tmp_path, capsys):
    cfg = write_cfg(tmp_path, """
    grid.n = 16
    time.dt = 1.0
    time.t_final = 2.0
    init.velocity = vortex
    """)
    assert main(["verify", "--config", cfg]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "CFL" in out


def test_experiment_command_r_sweep(tmp_path):
    plan = tmp_path / "sweep.plan"
    plan.write_text("""
    experiment.kind = r_sweep
    r_sweep.r_list = 1, 2, 3, 4
    grid.n = 16
    time.dt = 2e-4
    time.t_final = 1e-3
    init.velocity = vortex
    """)
    out = str(tmp_path / "runs")
    assert main(["experiment", "--plan", str(plan), "--out", out]) == 0
    root = os.path.join(out, "r_sweep")
    for r in (1, 2, 3, 4):
        assert os.path.exists(os.path.join(root, f"run_r{r}.csv"))
    assert os.path.exists(os.path.join(root, "summary.csv"))


def test_experiment_command_epsilon_sweep(tmp_path):
    plan = tmp_path / "eps.plan"
    plan.write_text("""
    experiment.kind = epsilon_sweep
    epsilon_sweep.eps_list = 0.2, 0.1, 0.05
    grid.n = 16
    time.dt = 2e-4
    time.t_final = 1e-3
    """)
    out = str(tmp_path / "runs")
    assert main(["experiment", "--plan", str(plan), "--out", out]) == 0
    assert os.path.exists(
        os.path.join(out, "epsilon_sweep", "terminal_overshoot_vs_eps.svg")
    )


def test_experiment_empty_list_fails_before_running(tmp_path, capsys):
    plan = tmp_path / "bad.plan"
    plan.write_text("experiment.kind = r_sweep\n")
    out = str(tmp_path / "runs")
    assert main(["experiment", "--plan", str(plan), "--out", out]) == 1
    assert not os.path.exists(os.path.join(out, "r_sweep"))


def test_plot_deterministic_and_monotone(tmp_path):
    cfg = write_cfg(tmp_path, FAST_CFG + "output.every_k_steps = 1\n")
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    csv_path = os.path.join(out, "diagnostics.csv")
    digests = []
    for sub in ("p1", "p2"):
        pdir = str(tmp_path / sub)
        assert main(["plot", "--csv", csv_path, "--columns", "bulk,interfacial", "--out", pdir]) == 0
        path = os.path.join(pdir, "diagnostics_bulk.svg")
        digests.append(hashlib.sha256(open(path, "rb").read()).hexdigest())
        assert os.path.exists(os.path.join(pdir, "diagnostics_interfacial.svg"))
    assert digests[0] == digests[1]  # byte-identical SVG
    # the plotted decay run has non-increasing total energy
    rows = read_rows(csv_path)
    energies = [r.energy for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_plot_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,mass\n")
    assert main(["plot", "--csv", str(empty), "--columns", "mass", "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "empty_mass.svg").exists()
    good = tmp_path / "good.csv"
    good.write_text("t,mass\n0.0,1.0\n0.1,1.5\n")
    assert main(["plot", "--csv", str(good), "--columns", "nope", "--out", str(tmp_path)]) == 1
    assert main(["plot", "--csv", str(good), "--columns", "mass", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "good_mass.svg").exists()


def test_commands_write_only_under_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_cfg(tmp_path, FAST_CFG)
    out = str(tmp_path / "only_here")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    entries = {p.name for p in tmp_path.iterdir()}
    assert entries == {"run.cfg", "only_here"}
