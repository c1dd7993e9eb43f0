import dataclasses

import pytest

from isacbf.config import SimConfig, load_config


def test_defaults(cfg):
    assert cfg.n_tx == 32 and cfg.n_rx == 32 and cfg.n_vehicles == 3
    assert cfg.carrier_hz == 30e9 and cfg.wave_speed == 3e8
    assert cfg.noise_rsu == 1e-11 and cfg.noise_vehicle == 1e-11
    assert cfg.rcs_coeff == 10 + 10j and cfg.mf_gain == 10.0
    assert cfg.pathloss_ref == 1e-7 and cfg.pathloss_exp == 2.55
    assert cfg.slot_dur == 0.02 and cfg.v_min == 8.0 and cfg.v_max == 8.25
    assert cfg.gamma_theta == 0.01 and cfg.gamma_d == 0.01
    assert cfg.power_budget == 1.0 and cfg.history_len == 5


def test_echo_noise_var_default_and_override(cfg):
    assert cfg.echo_noise_var == pytest.approx(1e-10)
    assert cfg.replace(sigma_r2=5.0).echo_noise_var == 5.0


@pytest.mark.parametrize("kwargs", [
    {"n_tx": 0}, {"n_vehicles": 0}, {"history_len": 0},
    {"v_min": 9.0, "v_max": 8.0}, {"power_budget": 0.0},
    {"sigma_r2": 0.0}, {"n_slots": 0}, {"obs_rel_mse": -1.0},
])
def test_validation_rejects(kwargs):
    with pytest.raises(ValueError):
        SimConfig(**kwargs)


def test_frozen(cfg):
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.n_tx = 16


def test_replace_returns_new(cfg):
    c2 = cfg.replace(power_budget=2.0)
    assert c2.power_budget == 2.0 and cfg.power_budget == 1.0


def test_as_dict_roundtrips_complex(cfg):
    d = cfg.as_dict()
    assert complex(d["rcs_coeff"].replace(" ", "")) == cfg.rcs_coeff
    assert d["n_tx"] == 32


def test_load_config_file_overrides_seed(tmp_path):
    p = tmp_path / "sim.ini"
    p.write_text("[sim]\nn_tx = 16\npower_budget = 2.0\nrng_seed = 7\n")
    c = load_config(str(p), overrides=["power_budget=4.0", "rcs_coeff=1+2j"],
                    seed=99)
    assert c.n_tx == 16
    assert c.power_budget == 4.0          # override beats file
    assert c.rcs_coeff == 1 + 2j
    assert c.rng_seed == 99               # seed beats both


def test_load_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.ini"))
    with pytest.raises(KeyError):
        load_config(overrides=["no_such_key=1"])
    with pytest.raises(ValueError):
        load_config(overrides=["malformed"])


def test_load_config_sigma_r2_none():
    c = load_config(overrides=["sigma_r2=none"])
    assert c.sigma_r2 is None
    c = load_config(overrides=["sigma_r2=2.5e-9"])
    assert c.sigma_r2 == 2.5e-9
