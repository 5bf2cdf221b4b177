import json
import re

import numpy as np
import pytest

from darkthermo import cli, io
from darkthermo.spectrum import local_minima

BASE = {"level_system": "calcium8", "detuning_397_mhz": -14.0, "rabi_397_mhz": 12.0,
        "rabi_866_mhz": 8.0, "b_field_t": 4.7e-4}


def _config(tmp_path, name="c.json", **kw):
    p = tmp_path / name
    p.write_text(json.dumps({**BASE, **kw}))
    return str(p)


def test_simulate_cold_four_minima(tmp_path, capsys):
    cfg = _config(tmp_path, grid_start_mhz=-39.0, grid_stop_mhz=11.0, grid_points=1001)
    out = tmp_path / "s.csv"
    assert cli.main(["simulate", "--config", cfg, "--method", "cold", "--out", str(out)]) == 0
    spec = io.read_model_csv(out)
    assert local_minima(spec.fluorescence).size == 4
    assert "4 resonance minima" in capsys.readouterr().err


def test_quadrature_at_zero_temperature_equals_cold(tmp_path):
    cfg = _config(tmp_path, grid_start_mhz=-30.0, grid_stop_mhz=0.0, grid_points=61,
                  linewidth_397_mhz=0.45, linewidth_866_mhz=0.49)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["simulate", "--config", cfg, "--method", "cold", "--out", str(a)]) == 0
    assert cli.main(["simulate", "--config", cfg, "--method", "quadrature", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_config_is_user_error(tmp_path, capsys):
    assert cli.main(["simulate", "--config", str(tmp_path / "no.json"),
                     "--out", str(tmp_path / "x.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_config_key_is_user_error(tmp_path):
    cfg = _config(tmp_path, rabi_397=3.0)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1


def test_numerical_failure_status(tmp_path, capsys):
    cfg = _config(tmp_path, rabi_866_mhz=0.0, grid_start_mhz=-20.0, grid_stop_mhz=0.0, grid_points=5)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_resonances(tmp_path, capsys):
    assert cli.main(["resonances", "--config", _config(tmp_path)]) == 0
    text = capsys.readouterr().out
    offsets = [float(line.split(",")[0]) for line in text.splitlines()[1:5]]
    assert offsets == pytest.approx([-14.47, -3.95, 3.95, 14.47], abs=0.005)
    assert float(text.splitlines()[1].split(",")[1]) == pytest.approx(-14.0 - 14.47, abs=0.005)


def test_resonances_zero_field(tmp_path, capsys):
    assert cli.main(["resonances", "--config", _config(tmp_path, b_field_t=0.0)]) == 0
    text = capsys.readouterr().out
    assert "coincide" in text
    assert [float(l.split(",")[0]) for l in text.splitlines()[1:5]] == [0.0] * 4


def test_resonances_reject_lambda(tmp_path):
    assert cli.main(["resonances", "--config", _config(tmp_path, level_system="lambda3")]) == 1


def test_synth_reproducible(tmp_path):
    cfg = _config(tmp_path, grid_start_mhz=-24.0, grid_stop_mhz=6.0, grid_points=31,
                  temperature_mk=3.1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["synth", "--config", cfg, "--method", "effective", "--photons", "10000",
                         "--seed", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert io.read_spectrum_csv(a).counts.max() > 9000


def _pipeline(tmp_path, T, seed=1):
    cfg = _config(tmp_path, grid_start_mhz=-24.0, grid_stop_mhz=6.0, grid_points=61,
                  temperature_mk=T, linewidth_397_mhz=0.45, linewidth_866_mhz=0.49,
                  fit_model="effective")
    data, res = tmp_path / "m.csv", tmp_path / "r.json"
    assert cli.main(["synth", "--config", cfg, "--method", "effective", "--photons", "10000",
                     "--seed", str(seed), "--out", str(data)]) == 0
    # start the fit away from the true temperature
    fit_cfg = _config(tmp_path, "fit.json", grid_start_mhz=-24.0, grid_stop_mhz=6.0,
                      grid_points=61, temperature_mk=1.0, linewidth_397_mhz=0.45,
                      linewidth_866_mhz=0.49, mcmc_burn=200, mcmc_steps=300)
    status = cli.main(["fit", "--config", fit_cfg, "--data", str(data), "--mode", "mcmc",
                       "--out", str(res)])
    return status, res


@pytest.mark.slow
def test_end_to_end_temperature(tmp_path, capsys):
    status, res = _pipeline(tmp_path, 3.1)
    assert status == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    T = float(re.match(r"T = ([0-9.]+)", line).group(1))
    assert abs(T / 3.1 - 1) < 0.15
    body = json.loads(res.read_text())
    assert body["config"]["values"]["temperature_mk"] == 1.0
    assert body["params"]["temperature_mk"] == pytest.approx(T, rel=1e-3)


@pytest.mark.slow
def test_end_to_end_lower_bound(tmp_path, capsys):
    status, res = _pipeline(tmp_path, 500.0)
    assert status == 0
    assert re.search(r"T > [0-9.]+ mK", capsys.readouterr().out)
    assert json.loads(res.read_text())["temperature_lower_bound_mk"] > 46.0


def test_lsq_mode(tmp_path, capsys):
    cfg = _config(tmp_path, grid_start_mhz=-24.0, grid_stop_mhz=6.0, grid_points=41,
                  temperature_mk=3.1, linewidth_397_mhz=0.45, linewidth_866_mhz=0.49)
    data, res = tmp_path / "m.csv", tmp_path / "r.json"
    cli.main(["synth", "--config", cfg, "--method", "effective", "--out", str(data)])
    assert cli.main(["fit", "--config", cfg, "--data", str(data), "--mode", "lsq",
                     "--out", str(res)]) == 0
    assert json.loads(res.read_text())["method"] == "lsq"


def test_relax(tmp_path, capsys):
    r = np.random.default_rng(0)
    t = np.linspace(0, 400, 8)
    T = 68 * np.exp(-t / 87) + 3.0
    series = [(a, b * (1 + 0.1 * r.normal()), 0.1 * b) for a, b in zip(t, T)]
    path = io.write_series_csv(series, tmp_path / "s.csv")
    assert cli.main(["relax", "--series", str(path), "--out", str(tmp_path / "r.json")]) == 0
    tau = float(re.match(r"tau = ([0-9.]+)", capsys.readouterr().out).group(1))
    assert abs(tau / 87 - 1) < 0.15


def test_relax_constant_is_numerical_failure(tmp_path):
    path = io.write_series_csv([(t, 5.0, 0.5) for t in range(8)], tmp_path / "s.csv")
    assert cli.main(["relax", "--series", str(path), "--out", str(tmp_path / "r.json")]) == 2


UNIT_WORDS = ("MHz", "mK", "us", "tesla", "count", "dimensionless", "no unit", "path", "JSON", "CSV")


def test_help_documents_units():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.choices and isinstance(a.choices, dict))
    for name, p in sub.choices.items():
        for action in p._actions:
            if action.option_strings and action.dest != "help":
                assert action.help and any(w in action.help for w in UNIT_WORDS), (name, action.dest)
