import math

import pytest

from cogrelay import cli


def run(args, capsys=None):
    return cli.main(args)


def test_db_round_trip():
    for x in [-10.0, 0.0, 3.0, 20.0, 24.5]:
        assert cli.linear_to_db(cli.db_to_linear(x)) == pytest.approx(x)
    assert cli.db_to_linear(20.0) == pytest.approx(100.0)


def test_load_config_defaults_and_overrides(tmp_path):
    cfg = cli.load_config(None)
    assert cfg["snr_primary_db"] == 20.0
    p = tmp_path / "a.cfg"
    p.write_text("snr_primary_db = 14\n# comment\ntrials=5000\n")
    cfg = cli.load_config(str(p))
    assert cfg["snr_primary_db"] == 14.0
    assert cfg["trials"] == 5000


def test_load_config_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("nonsense_key = 3\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(p))
    p.write_text("no equals sign\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(p))
    p.write_text("trials = many\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(str(p))


def test_config_error_exit_code(tmp_path, capsys):
    assert run(["sweep-snr", "--config", "/does/not/exist"]) == \
        cli.EXIT_CONFIG
    assert run(["sweep-snr", "--policy", "bogus"]) == cli.EXIT_CONFIG
    assert run(["sweep-snr", "--trials", "-5"]) == cli.EXIT_CONFIG
    out = str(tmp_path / "sub" / "missing" / "x.csv")
    assert run(["sweep-snr", "--out", out]) == cli.EXIT_CONFIG


def test_sweep_snr_csv(tmp_path):
    out = tmp_path / "snr.csv"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("sweep_start = 8\nsweep_stop = 20\nsweep_step = 6\n"
                   "policies = direct,adaptive1\n")
    code = run(["sweep-snr", "--config", str(cfg), "--trials", "20000",
                "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(cli.SNR_COLUMNS)
    assert len(lines) == 1 + 3 * 2  # three sweep points, two policies
    # below the cutoff the secondary is silenced for every policy
    for line in lines[1:3]:
        cells = line.split(",")
        assert cells[0] == "8.0"
        assert cells[2] == "1.0"
    # at 20 dB adaptive1 does no worse than direct
    direct = float(lines[5].split(",")[2])
    adaptive = float(lines[6].split(",")[2])
    assert adaptive <= direct + 1e-12


def test_sweep_snr_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep-snr", "--trials", "5000", "--seed", "11",
            "--policy", "adaptive1"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rate_cutoff(tmp_path):
    out = tmp_path / "rate.csv"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("rate_sweep_start = 2.0\nrate_sweep_stop = 2.4\n"
                   "rate_sweep_step = 0.2\npolicies = adaptive1,adaptive2\n")
    assert run(["sweep-rate", "--config", str(cfg), "--trials", "20000",
                "--seed", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(cli.RATE_COLUMNS)
    rows = [ln.split(",") for ln in lines[1:]]
    # beyond the analytic rate cutoff (~2.23) both schemes are silenced
    for cells in rows:
        if float(cells[0]) > 2.3:
            assert float(cells[2]) == 1.0
            assert float(cells[5]) == 0.0  # gamma_s


def test_grid_position_invalid_cells(tmp_path):
    out = tmp_path / "grid.csv"
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid_nx = 3\ngrid_ny = 3\npolicies = adaptive1\n")
    assert run(["grid-position", "--config", str(cfg), "--trials", "5000",
                "--seed", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(cli.GRID_COLUMNS)
    assert len(lines) == 1 + 9
    rows = {(c[0], c[1]): c for c in (ln.split(",") for ln in lines[1:])}
    # (0.5, 1.0) grid point: valid mid cell
    assert rows[("0.5", "1.0")][4] == "1"
    invalid = [c for c in rows.values() if c[4] == "0"]
    # grid anchors at (-0.5,0); no node coincidence on the 3x3 grid
    assert all(c[2] == "" for c in invalid)


def test_grid_rejects_tiny_grid(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid_nx = 1\ngrid_ny = 5\n")
    assert run(["grid-position", "--config", str(cfg)]) == cli.EXIT_CONFIG


def test_validate_pass_and_negative_control(tmp_path, capsys):
    assert run(["validate", "--trials", "100000", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "seed=1" in out  # reproducibility metadata per check
    cfg = tmp_path / "c.cfg"
    cfg.write_text("lambda_scale = 0.5\n")
    assert run(["validate", "--config", str(cfg), "--trials", "100000",
                "--seed", "1"]) == cli.EXIT_VALIDATION
    out = capsys.readouterr().out
    assert "FAIL" in out
