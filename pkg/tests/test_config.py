import math

import pytest

from fracscatter import parse_config, serialize_config
from fracscatter.config import default_t0, params_hash
from fracscatter.grid import ConfigError


def test_minimal_selftest_defaults():
    cfg = parse_config("kind = selftest")
    assert cfg.rho == (0.75,)
    assert cfg.gamma == (1.0,)
    assert cfg.lam == (1.0,)
    assert cfg.epsilon == 0.5
    assert cfg.n_points == 2**17
    assert cfg.half_length == 1500.0
    assert cfg.dt == 0.05
    assert cfg.xi_center == (1.0,)
    assert cfg.xi_width == 0.1
    assert cfg.t_max == 800.0
    assert cfg.ratio == pytest.approx(2.0**0.25)
    assert cfg.seed == 0


def test_kind_argument_overrides_text():
    cfg = parse_config("kind = cauchy", kind="cook")
    assert cfg.kind == "cook"


def test_kind_required():
    with pytest.raises(ConfigError, match="kind"):
        parse_config("rho = 0.75")


def test_kind_dependent_t0_defaults():
    assert default_t0("cook") == 1.0
    assert default_t0("modifier_rl") == 1.0
    assert default_t0("cauchy") == 50.0
    assert parse_config("kind = cook").t0 == 1.0
    assert parse_config("kind = cauchy").t0 == 50.0
    assert parse_config("kind = cook\nt0 = 7.0").t0 == 7.0


def test_comments_and_blank_lines():
    cfg = parse_config("# experiment\n\nkind = selftest  # trailing\nrho = 0.6\n")
    assert cfg.rho == (0.6,)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("kind = selftest\nwavelength = 3")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("kind = selftest\nrho = 0.6\nrho = 0.7")


def test_negative_gamma_names_key():
    with pytest.raises(ConfigError, match="gamma"):
        parse_config("kind = selftest\ngamma = -1")


def test_rho_range_named():
    with pytest.raises(ConfigError, match="rho"):
        parse_config("kind = selftest\nrho = 0.3")
    with pytest.raises(ConfigError, match="rho"):
        parse_config("kind = selftest\nrho = 1.2")


def test_n_points_power_of_two():
    with pytest.raises(ConfigError, match="n_points"):
        parse_config("kind = selftest\nn_points = 1000")


def test_epsilon_positive():
    with pytest.raises(ConfigError, match="epsilon"):
        parse_config("kind = selftest\nepsilon = 0")


def test_unparseable_number_names_key():
    with pytest.raises(ConfigError, match="dt"):
        parse_config("kind = selftest\ndt = fast")


def test_no_wrap_rejection_suggests_half_length():
    with pytest.raises(ConfigError) as err:
        parse_config("kind = cauchy\nhalf_length = 100\nt_max = 800")
    msg = str(err.value)
    assert "no-wrap" in msg
    v_max = (1.0 + 5 * 0.1) ** (2 * 0.75 - 1)
    suggested = math.ceil((800.0 * v_max + 6.0 / 0.1) / 0.9)
    assert str(suggested) in msg


def test_sweep_lists_allowed_only_for_sweep():
    cfg = parse_config("kind = sweep\ngamma = 0.5, 1.0, 2.0\nt_max = 400")
    assert cfg.gamma == (0.5, 1.0, 2.0)
    assert len(cfg.combos()) == 3
    with pytest.raises(ConfigError, match="sweep"):
        parse_config("kind = cauchy\ngamma = 0.5, 1.0")


def test_physics_rejects_sweep_lists():
    cfg = parse_config("kind = sweep\nrho = 0.6, 0.75\nt_max = 400")
    with pytest.raises(ConfigError):
        cfg.physics()


def test_xi_center_dimension_check():
    with pytest.raises(ConfigError, match="xi_center"):
        parse_config("kind = selftest\ndim = 2\nxi_center = 1.0")
    cfg = parse_config(
        "kind = selftest\ndim = 2\nxi_center = 1.0, 0.0\n"
        "n_points = 256\nhalf_length = 400\nt_max = 200")
    assert cfg.xi_center == (1.0, 0.0)


def test_round_trip_is_lossless():
    text = (
        "kind = cook\nrho = 0.6\ngamma = 0.7\nlambda = -1.5\nepsilon = 0.4\n"
        "n_points = 4096\nhalf_length = 700\nxi_center = 1.1\nxi_width = 0.14\n"
        "dt = 0.025\nt0 = 2.0\nratio = 1.1892\nt_max = 500\nseed = 9\nout_dir = /tmp/x"
    )
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg


def test_hash_ignores_kind_and_out_dir():
    a = parse_config("kind = cauchy\nt0 = 50")
    b = parse_config("kind = dollard_cauchy\nt0 = 50")
    c = parse_config("kind = cauchy\nt0 = 50\nout_dir = /elsewhere")
    d = parse_config("kind = cauchy\nt0 = 25")
    assert params_hash(a) == params_hash(b) == params_hash(c)
    assert params_hash(a) != params_hash(d)


def test_schedule_and_grid_construction():
    cfg = parse_config("kind = selftest\nn_points = 1024\nhalf_length = 200\n"
                       "t_max = 100\nxi_width = 0.3")
    sched = cfg.schedule()
    assert sched.diagnostic_times[-1] == pytest.approx(100.0)
    grid = cfg.grid()
    assert grid.points_per_axis == 1024
    packet = cfg.packet()
    assert packet.norm() == pytest.approx(1.0, abs=1e-12)
