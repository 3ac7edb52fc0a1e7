import filecmp
from pathlib import Path

import numpy as np
import pytest

import piezodamp as pd
from piezodamp import cli
from piezodamp.errors import ConfigError, NumericalError

SUBCOMMANDS = ["modes", "coupling", "place", "ppf-design", "sweep"]


def test_load_config_gripper(gripper_ini):
    cfg = pd.load_config(gripper_ini)
    assert cfg.structure.source == "measured"
    assert cfg.structure.frequencies_hz == [58.0, 76.0]
    assert cfg.ppf_freq_hz == 76.7
    assert cfg.ppf_zeta == 0.3
    assert cfg.gains == [1500.0, 3000.0, 4500.0, 6000.0]
    assert cfg.band_hz == (65.0, 90.0)
    assert cfg.target_mode == 2
    assert cfg.placement_step == 0.01
    assert cfg.mode_weights == {1: 1.0, 2: 1.0}
    assert cfg.patch.z_offset == pytest.approx(0.00125)
    model = cfg.build_model()
    assert model.n_modes == 2


def _minimal_ini(tmp_path, structure=None, extra=""):
    structure = structure or (
        "[structure]\nsource = analytic\nlength_m = 1.0\nEI_Nm2 = 1.0\n"
        "mass_per_length_kgpm = 1.0\nn_modes = 2\n")
    body = structure + (
        "[material]\nd31_CpN = -1.8e-10\ns11E_perPa = 1.6e-11\n"
        "epsT_FpM = 1.6e-8\n"
        "[patch]\nlength_m = 0.1\nwidth_m = 0.02\nthickness_m = 0.0005\n"
        "host_thickness_m = 0.002\n"
        "[ppf]\nfreq_hz = 3.5\nzeta = 0.3\ngains = 1, 2\n"
        "[analysis]\nband_hz = 0.4, 0.7\nstep_m = 0.1\n") + extra
    path = tmp_path / "project.ini"
    path.write_text(body)
    return path


def test_config_errors(tmp_path, gripper_ini):
    with pytest.raises(ConfigError, match="does not exist"):
        pd.load_config(tmp_path / "missing.ini")

    path = _minimal_ini(tmp_path)
    good = pd.load_config(path)
    assert good.structure.source == "analytic"
    assert good.structure.props.length == 1.0

    bad = path.read_text().replace("[material]", "[materials]")
    path.write_text(bad)
    with pytest.raises(ConfigError, match=r"\[material\]"):
        pd.load_config(path)

    path = _minimal_ini(tmp_path)
    path.write_text(path.read_text().replace("EI_Nm2 = 1.0", "EI_Nm2 = soft"))
    with pytest.raises(ConfigError, match="not a number"):
        pd.load_config(path)

    path = _minimal_ini(tmp_path)
    path.write_text(path.read_text().replace(
        "host_thickness_m = 0.002",
        "host_thickness_m = 0.002\nz_offset_m = 0.001"))
    with pytest.raises(ConfigError, match="exactly one"):
        pd.load_config(path)

    path = _minimal_ini(tmp_path)
    path.write_text(path.read_text().replace("gains = 1, 2", "gains = 2, 1"))
    with pytest.raises(ConfigError, match="increasing"):
        pd.load_config(path)

    path = _minimal_ini(tmp_path)
    path.write_text(path.read_text().replace("band_hz = 0.4, 0.7",
                                             "band_hz = 0.7"))
    with pytest.raises(ConfigError, match="band_hz"):
        pd.load_config(path)

    path = _minimal_ini(tmp_path, extra="\n[analysis2]\n")
    pd.load_config(path)  # unknown sections are ignored

    path = _minimal_ini(tmp_path)
    path.write_text(path.read_text().replace("source = analytic",
                                             "source = guesswork"))
    with pytest.raises(ConfigError, match="source"):
        pd.load_config(path)


def test_config_measured_missing_file(tmp_path):
    structure = ("[structure]\nsource = measured\nshapes_file = gone.csv\n"
                 "frequencies_hz = 10\n")
    path = _minimal_ini(tmp_path, structure=structure)
    with pytest.raises(ConfigError, match="gone.csv"):
        pd.load_config(path)


def test_config_weights_parse(tmp_path):
    path = _minimal_ini(tmp_path, extra="")
    text = path.read_text().replace("step_m = 0.1",
                                    "step_m = 0.1\nmode_weights = 1:2.0, 2:0")
    path.write_text(text)
    cfg = pd.load_config(path)
    assert cfg.mode_weights == {1: 2.0, 2: 0.0}
    path.write_text(text.replace("1:2.0, 2:0", "1=2.0"))
    with pytest.raises(ConfigError, match="mode:weight"):
        pd.load_config(path)


def _run(argv):
    return cli.main(argv)


def test_cli_runs_all_subcommands(gripper_ini, gripper_frf_csv, tmp_path):
    out = tmp_path / "out"
    for sub in SUBCOMMANDS:
        code = _run([sub, "--config", str(gripper_ini),
                     "--out-dir", str(out), "--quiet"])
        assert code == 0, sub
    code = _run(["analyze", "--frf", str(gripper_frf_csv),
                 "--band", "50,90", "--out-dir", str(out), "--quiet"])
    assert code == 0
    expected = ["modes.csv", "shapes.csv", "coupling.csv", "scan.csv",
                "placement.csv", "ppf_summary.csv", "plant_modes.csv",
                "plant_ss.csv", "controller_ss.csv", "sweep.csv",
                "bode_01.csv", "analyze.csv"]
    for name in expected:
        assert (out / name).is_file(), name


def test_cli_global_flags_before_subcommand(gripper_ini, tmp_path):
    out = tmp_path / "o1"
    code = _run(["--config", str(gripper_ini), "--out-dir", str(out),
                 "--quiet", "modes"])
    assert code == 0
    assert (out / "modes.csv").is_file()


def test_cli_unit_beam_modes_values(tmp_path):
    ini = _minimal_ini(tmp_path)
    out = tmp_path / "out"
    assert _run(["modes", "--config", str(ini), "--out-dir", str(out),
                 "--quiet"]) == 0
    lines = (out / "modes.csv").read_text().splitlines()
    assert lines[0] == "mode,freq_hz,omega_rad_s,zeta,modal_mass_kg"
    first = lines[1].split(",")
    assert first[0] == "1"
    assert float(first[1]) == pytest.approx(0.5595912099683767, rel=1e-9)
    assert float(first[4]) == 1.0


def test_cli_sweep_damping_increases_with_gain(gripper_ini, tmp_path):
    out = tmp_path / "out"
    assert _run(["sweep", "--config", str(gripper_ini), "--out-dir",
                 str(out), "--quiet"]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "gain,stable,f_peak_hz,Q,zeta,damping_pct"
    zetas = [float(l.split(",")[4]) for l in lines[1:]]
    assert all(b > a for a, b in zip(zetas, zetas[1:]))


def test_cli_deterministic_outputs(gripper_ini, gripper_frf_csv, tmp_path):
    outs = [tmp_path / "run1", tmp_path / "run2"]
    for out in outs:
        for sub in SUBCOMMANDS:
            assert _run([sub, "--config", str(gripper_ini),
                         "--out-dir", str(out), "--quiet"]) == 0
        assert _run(["analyze", "--frf", str(gripper_frf_csv),
                     "--band", "50,90", "--out-dir", str(out),
                     "--quiet"]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names,
                                               shallow=False)
    assert mismatch == [] and errors == []


def test_cli_quiet_suppresses_stdout(gripper_ini, tmp_path, capsys):
    assert _run(["modes", "--config", str(gripper_ini),
                 "--out-dir", str(tmp_path / "o"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    assert _run(["modes", "--config", str(gripper_ini),
                 "--out-dir", str(tmp_path / "o2")]) == 0
    assert "mode 1" in capsys.readouterr().out


def test_cli_exit_code_validation_error(tmp_path, capsys):
    code = _run(["modes", "--config", str(tmp_path / "nope.ini"),
                 "--out-dir", str(tmp_path)])
    assert code == 1
    assert "error" in capsys.readouterr().err

    code = _run(["modes", "--out-dir", str(tmp_path)])
    assert code == 1


def test_cli_exit_code_data_error(gripper_frf_csv, tmp_path, capsys):
    # Flat region of the record: no peaks, a data condition, not a crash.
    code = _run(["analyze", "--frf", str(gripper_frf_csv),
                 "--band", "84,89", "--out-dir", str(tmp_path), "--quiet"])
    assert code == 1
    assert "no peaks" in capsys.readouterr().err

    code = _run(["analyze", "--frf", str(gripper_frf_csv),
                 "--band", "nonsense", "--out-dir", str(tmp_path)])
    assert code == 1


def test_cli_exit_code_numerical_error(monkeypatch, gripper_ini, tmp_path,
                                       capsys):
    def boom(args):
        raise NumericalError("synthetic failure")

    monkeypatch.setattr(cli, "cmd_modes", boom)
    code = _run(["modes", "--config", str(gripper_ini),
                 "--out-dir", str(tmp_path)])
    assert code == 2
    assert "synthetic failure" in capsys.readouterr().err


def test_cli_exit_code_io_error(gripper_ini, tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory\n")
    code = _run(["modes", "--config", str(gripper_ini),
                 "--out-dir", str(blocker / "sub")])
    assert code == 3
    assert "i/o error" in capsys.readouterr().err


def test_state_space_export_round_trip(tmp_path):
    plant = pd.ModalPlant([2.0, 5.0], [0.01, 0.02], [1.0, -0.5])
    sys_ = pd.plant_system(plant)
    path = tmp_path / "ss.csv"
    cli.write_state_space_csv(sys_, path)
    lines = [l for l in path.read_text().splitlines()
             if not l.startswith("#")]
    assert lines[0] == "A,4,4"
    a_rows = [list(map(float, l.split(","))) for l in lines[1:5]]
    np.testing.assert_allclose(np.array(a_rows), sys_.A, rtol=1e-8)
    assert lines[5] == "B,4,1"
