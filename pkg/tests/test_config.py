import pytest

from beliefsim.config import (
    DECAY_MODULATORS,
    ParameterConfig,
    config_from_dict,
    default_config,
)


def test_defaults_are_valid():
    default_config().validate()


def test_decay_rate_inverse_anchor():
    cfg = default_config()
    assert cfg.decay_rate(0.0) == pytest.approx(0.02)
    assert cfg.decay_rate(10.0) == pytest.approx(0.02 / 11.0)


def test_decay_rate_flat_modulator():
    cfg = default_config().replace(decay_modulator="constant")
    assert cfg.decay_rate(10.0) == pytest.approx(0.02)


@pytest.mark.parametrize(
    "field,value",
    [
        ("delta", 0.0),
        ("delta", 1.0),
        ("lambda0", 0.0),
        ("lambda0", -0.1),
        ("embed_dim", 0),
        ("tau_retrieval", -0.1),
        ("tau_retrieval", 1.5),
        ("window", 0),
        ("effort_total", 0.0),
        ("patience", 0),
        ("meta_depth_max", 0),
        ("decay_modulator", "bogus"),
    ],
)
def test_validate_rejects_out_of_range(field, value):
    with pytest.raises(ValueError):
        default_config().replace(**{field: value})


def test_replace_returns_new_validated_config():
    cfg = default_config()
    other = cfg.replace(lambda0=0.05)
    assert other.lambda0 == 0.05
    assert cfg.lambda0 == 0.02  # original untouched


def test_cost_defaults_to_one():
    cfg = default_config().replace(sector_costs={"plan": 2.5})
    assert cfg.cost("plan") == 2.5
    assert cfg.cost("perc") == 1.0


def test_dict_roundtrip():
    cfg = default_config().replace(lambda0=0.03, sector_costs={"task": 2.0})
    again = config_from_dict(cfg.to_dict())
    assert again == cfg


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown"):
        config_from_dict({"lambda_zero": 0.02})


def test_from_dict_coerces_sequences():
    cfg = config_from_dict({"load_coeffs": [0.02, 2.0, 0.2], "sector_priority": ["a", "b"]})
    assert cfg.load_coeffs == (0.02, 2.0, 0.2)
    assert cfg.sector_priority == ("a", "b")


def test_modulator_registry_contains_default():
    assert ParameterConfig().decay_modulator in DECAY_MODULATORS
