import json
from pathlib import Path

import pytest

from aggdiff.cli import main
from aggdiff.config import (
    RunConfig,
    apply_overrides,
    parse_config,
    serialize_config,
)
from aggdiff.errors import ConfigError

SMALL_RUN = """
[params]
d = 2
m = 1
M = 1.0

[grid]
R = 6.0
N = 80

[time]
tau_max = 0.6
snapshot_dtau = 0.2

[diagnostics]
k_levels = 0.005,0.02
"""


def test_parse_defaults_and_fractions():
    cfg = parse_config("[params]\nm = 4/3\nd = 3\n")
    assert abs(cfg.m - 4.0 / 3.0) < 1e-15
    assert cfg.d == 3
    assert cfg.N == 400  # untouched default


def test_roundtrip_exact():
    cfg = parse_config(SMALL_RUN)
    assert parse_config(serialize_config(cfg)) == cfg
    cfg2 = RunConfig(d=3, m=4.0 / 3.0, kernel_kind="power_tail", kernel_gamma=2.5)
    assert parse_config(serialize_config(cfg2)) == cfg2


def test_unknown_section_and_key_report_line():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("[reactor]\n")
    with pytest.raises(ConfigError, match="line 2.*volume"):
        parse_config("[grid]\nvolume = 3\n")
    with pytest.raises(ConfigError, match="outside"):
        parse_config("d = 2\n")
    with pytest.raises(ConfigError, match="not a number"):
        parse_config("[params]\nm = fast\n")


def test_validation_errors():
    with pytest.raises(ConfigError, match="kernel.kind"):
        parse_config("[kernel]\nkind = banana\n")
    with pytest.raises(ConfigError, match="initial.kind"):
        parse_config("[initial]\nkind = banana\n")
    with pytest.raises(ConfigError, match="fit_window"):
        parse_config("[diagnostics]\nfit_window = 1.0\n")


def test_overrides():
    cfg = parse_config(SMALL_RUN)
    apply_overrides(cfg, ["grid.N=160", "params.m=4/3", "params.d=3"])
    assert cfg.N == 160
    assert abs(cfg.m - 4.0 / 3.0) < 1e-15
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["grid.volume=2"])
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["no_equals_sign"])


def test_cli_rates_exit_codes(capsys):
    assert main(["rates", "--d", "3", "--m", "4/3"]) == 0
    out = capsys.readouterr().out
    assert "regime=critical" in out
    assert main(["rates", "--d", "3", "--m", "4/3", "--kernel", "newtonian"]) == 0
    out = capsys.readouterr().out
    assert "not applicable" in out


def test_cli_run_artifacts_and_determinism(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(SMALL_RUN)
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["run", str(cfg_path), "--output", str(out1)]) == 0
    assert main(["run", str(cfg_path), "--output", str(out2)]) == 0

    csv1 = (out1 / "diagnostics.csv").read_bytes()
    csv2 = (out2 / "diagnostics.csv").read_bytes()
    assert csv1 == csv2

    header = csv1.decode().splitlines()[0]
    assert header == "tau,t,mass,linf,l1_to_ground,H,I,H_rel,E_k_0.005,E_k_0.02,lp_2,lp_4"
    n_rows = len(csv1.decode().splitlines()) - 1
    assert n_rows == 4  # tau = 0, 0.2, 0.4, 0.6

    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["status"] == "completed"
    assert summary["config"]["N"] == 80
    assert "wall_time_seconds" in summary

    manifest = json.loads((out1 / "snapshots" / "manifest.json").read_text())
    assert len(manifest) == 4
    for entry in manifest:
        snap = out1 / entry["file"]
        assert snap.exists()
        assert snap.read_text().splitlines()[0] == "r\ttheta"
    # snapshot files are byte-identical across runs too
    assert (out1 / manifest[-1]["file"]).read_bytes() == (
        out2 / manifest[-1]["file"]
    ).read_bytes()


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[reactor]\nq = 1\n")
    assert main(["run", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_override_flag(tmp_path, capsys):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(SMALL_RUN)
    out = tmp_path / "out"
    rc = main(
        ["run", str(cfg_path), "--output", str(out), "--set", "time.tau_max=0.4"]
    )
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["tau_max"] == 0.4


def test_cli_sweep(tmp_path, capsys):
    sweep = tmp_path / "sweep.cfg"
    sweep.write_text(
        "[params]\nd = 2\nm = 1\nM = 0.5,1.0\n"
        "[grid]\nR = 6.0\nN = 60\n"
        "[time]\ntau_max = 0.4\nsnapshot_dtau = 0.2\n"
    )
    out = tmp_path / "sweep_out"
    assert main(["sweep", str(sweep), "--output", str(out)]) == 0
    rates = (out / "rates.csv").read_text().splitlines()
    assert rates[0] == "d,m,gamma,M,predicted,fitted,residual,verdict"
    assert len(rates) == 3
    assert (out / "cell_0000" / "diagnostics.csv").exists()
    assert (out / "cell_0001" / "summary.json").exists()
