import json

import pytest

from fpsa_snn.errors import ConfigError
from fpsa_snn.params import FIELD_UNITS, LaserParams


def test_round_trip_is_bit_exact(bare_params, tmp_path):
    path = tmp_path / "params.json"
    bare_params.save_json(str(path))
    loaded = LaserParams.load_json(str(path))
    assert loaded == bare_params
    # a second save must produce identical bytes
    path2 = tmp_path / "params2.json"
    loaded.save_json(str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_every_documented_key_is_serialized(bare_params):
    assert set(bare_params.to_dict()) == set(FIELD_UNITS)


def test_unknown_key_rejected(bare_params, tmp_path):
    doc = bare_params.to_dict()
    doc["tau_x"] = 1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError, match="tau_x"):
        LaserParams.load_json(str(path))


def test_missing_key_rejected(bare_params, tmp_path):
    doc = bare_params.to_dict()
    del doc["tau_ph"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError, match="tau_ph"):
        LaserParams.load_json(str(path))


def test_malformed_file_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        LaserParams.load_json(str(path))


@pytest.mark.parametrize("field", ["tau_ph", "tau_a", "tau_s", "V_a", "V_s"])
def test_positive_invariants(bare_params, field):
    with pytest.raises(ConfigError, match=field):
        bare_params.with_(**{field: 0.0})


@pytest.mark.parametrize("field", ["beta", "B_r", "k_inj"])
def test_nonnegative_invariants(bare_params, field):
    with pytest.raises(ConfigError, match=field):
        bare_params.with_(**{field: -1.0})


def test_phi_sign_values(bare_params):
    assert bare_params.with_(phi_sign="depleting").phi_sign == "depleting"
    with pytest.raises(ConfigError, match="phi_sign"):
        bare_params.with_(phi_sign="sideways")


def test_negative_absorber_current_is_allowed(bare_params):
    p = bare_params.with_(I_s=-2e-7)
    assert p.rate_coefficients().pump_s < 0
