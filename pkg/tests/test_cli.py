import pytest

from hyperepp import cli


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_reflection_preset(capsys):
    code, out, _ = run(["reflection", "--preset", "barclay"], capsys)
    assert code == 0
    assert "r = 0.94" in out
    assert "r0 = -1.00" in out


def test_reflection_explicit_parameters(capsys):
    code, out, _ = run(["reflection", "--g", "0.30", "--kappa", "26", "--gamma", "0.0004"], capsys)
    assert code == 0
    assert "0.9438" in out


def test_reflection_unknown_preset_fails(capsys):
    code, _, err = run(["reflection", "--preset", "nope"], capsys)
    assert code == 1
    assert "unknown preset" in err


def test_qnd_summary_and_csv(tmp_path, capsys):
    code, out, _ = run(["qnd", "--preset", "barclay"], capsys)
    assert code == 0
    assert "F_P1=0.997644" in out
    target = tmp_path / "qnd.csv"
    code, out, _ = run(["qnd", "--preset", "barclay", "-o", str(target)], capsys)
    assert code == 0
    header = target.read_text().splitlines()[0]
    assert header.startswith("r,F_P1,F_P2,eta_P1,eta_P2,F_S1")


def test_swap_command(capsys):
    code, out, _ = run(["swap", "--cooperativity", "5"], capsys)
    assert code == 0
    assert "F_SWAP=" in out


def test_epp_command_and_csv(tmp_path, capsys):
    target = tmp_path / "run.csv"
    code, out, _ = run(["epp", "--F", "0.8", "0.8", "0.8", "--rounds", "3", "-o", str(target)], capsys)
    assert code == 0
    assert "F' = 0.99995" in out
    lines = target.read_text().splitlines()
    assert lines[0] == "round,F1,F2,F3,F1_prime,F2_prime,F3_prime,F_prime,Y1,Y2,survival"
    assert len(lines) == 4
    assert lines[1].startswith("1,8.000")


def test_figure_csv_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code1, _, _ = run(["figure", "fig8b", "--points", "11", "-o", str(a)], capsys)
    code2, _, _ = run(["figure", "fig8b", "--points", "11", "-o", str(b)], capsys)
    assert code1 == code2 == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "F,Y1,Y2"


def test_figure_fig10_header(tmp_path, capsys):
    target = tmp_path / "f.csv"
    code, _, _ = run(["figure", "fig10", "--points", "4", "-o", str(target)], capsys)
    assert code == 0
    assert target.read_text().splitlines()[0] == "g_over_sqrt_kappa_gamma,F_P1,F_P2"


def test_figure_plot_rendering(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    target = tmp_path / "f.csv"
    plot = tmp_path / "f.svg"
    code, out, _ = run(
        ["figure", "fig12", "--points", "8", "-o", str(target), "--plot", str(plot)], capsys
    )
    assert code == 0
    assert plot.exists() and plot.stat().st_size > 0


def test_outdir_environment_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path))
    code, out, _ = run(["figure", "fig8a", "--points", "3", "-o", "rel.csv"], capsys)
    assert code == 0
    assert (tmp_path / "rel.csv").exists()


def test_config_file_supplies_defaults_and_flags_override(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("rounds = 2\nf = 0.9 0.9 0.9\n")
    target = tmp_path / "epp.csv"
    code, _, _ = run(["--config", str(config), "epp", "-o", str(target)], capsys)
    assert code == 0
    lines = target.read_text().splitlines()
    assert len(lines) == 3  # header + 2 rounds from config
    assert lines[1].startswith("1,9.000")
    # explicit flag wins over config
    code, _, _ = run(["--config", str(config), "epp", "--rounds", "1", "-o", str(target)], capsys)
    assert code == 0
    assert len(target.read_text().splitlines()) == 2


def test_cavity_flag_beats_config_preset(tmp_path, capsys):
    config = tmp_path / "cavity.cfg"
    config.write_text("preset = barclay\n")
    code, out, _ = run(["--config", str(config), "reflection", "--cooperativity", "5"], capsys)
    assert code == 0
    assert "r = 0.980198" in out  # 99/101 from the flag, not 0.9438 from the preset
    code, out, _ = run(["--config", str(config), "reflection"], capsys)
    assert code == 0
    assert "r = 0.943844" in out  # config preset applies when no flag given


def test_bad_config_line_fails(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("rounds 2\n")
    code, _, err = run(["--config", str(config), "epp"], capsys)
    assert code == 1
    assert "key = value" in err


def test_empty_grid_is_an_error(tmp_path, capsys):
    code, _, err = run(["figure", "fig8a", "--points", "1", "-o", str(tmp_path / "x.csv")], capsys)
    assert code == 1
    assert "grid" in err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["figure", "not-a-figure"])
    assert excinfo.value.code == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "hyperepp", "reflection", "--cooperativity", "5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "0.980198" in proc.stdout


def test_emit_csv_rejects_empty_table(tmp_path):
    from hyperepp import analytics
    from hyperepp.errors import ArgumentError

    empty = analytics.Table(headers=("a", "b"), rows=())
    with pytest.raises(ArgumentError):
        cli.emit_csv(empty, tmp_path / "x.csv")


def test_emit_csv_precision(tmp_path):
    from hyperepp import analytics

    table = analytics.Table(headers=("x",), rows=((1.0 / 3.0,),))
    cli.emit_csv(table, tmp_path / "x.csv")
    value = (tmp_path / "x.csv").read_text().splitlines()[1]
    assert value == "3.33333333333333e-01"
    assert float(value) == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_validate_passes(capsys):
    code, out, _ = run(["validate"], capsys)
    assert code == 0
    assert "validation passed" in out
    assert "[FLAG]" in out
    assert out.count("[PASS]") == 6


def test_validate_fails_on_impossible_tolerance(capsys):
    code, out, err = run(["validate", "--tol", "0"], capsys)
    assert code == 1
    assert "[FAIL]" in out
    assert "FAILED" in err
