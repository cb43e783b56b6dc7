import json
import math

import pytest

from caplab.config import load_config, parse_config
from caplab.errors import ConfigError
from caplab.models import ExpressionWarping, SpaceForm

MINIMAL = {
    "task": "analyze",
    "m": 3,
    "p": 2,
    "rho": 1,
    "mode": "intrinsic",
    "warping": {"type": "expression", "formula": "r"},
}


def test_minimal_intrinsic_config():
    job = parse_config(dict(MINIMAL))
    assert job.task == "analyze"
    assert job.mode == "intrinsic"
    assert job.n == 3
    assert math.isinf(job.R)
    assert isinstance(job.warping, ExpressionWarping)
    c = job.constellation()
    assert c.is_intrinsic


def test_p_below_two_rejected_for_analysis():
    cfg = dict(MINIMAL, p=1.5)
    with pytest.raises(ConfigError) as err:
        parse_config(cfg)
    assert err.value.pointer == "/p"


def test_p_below_two_allowed_for_intrinsic_capacity():
    cfg = dict(MINIMAL, task="capacity", p=1.5, R=2.0)
    job = parse_config(cfg)
    assert job.p == 1.5


def test_tangency_bound_above_one_rejected():
    cfg = dict(MINIMAL, mode="extrinsic", n=4,
               bounds={"g": "1.5", "h": "0", "lambda": "0"})
    with pytest.raises(ConfigError) as err:
        parse_config(cfg)
    assert err.value.pointer == "/bounds/g"


def test_unknown_top_level_key():
    with pytest.raises(ConfigError) as err:
        parse_config(dict(MINIMAL, warp_speed=9))
    assert err.value.pointer == "/warp_speed"


def test_bad_task():
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, task="explore"))
    with pytest.raises(ConfigError):
        parse_config({"m": 3})


def test_expression_syntax_error_pointer():
    cfg = dict(MINIMAL, warping={"type": "expression", "formula": "log("})
    with pytest.raises(ConfigError) as err:
        parse_config(cfg)
    assert err.value.pointer == "/warping/formula"


def test_negative_warping_fatal():
    cfg = dict(MINIMAL, warping={"type": "expression", "formula": "r - 5"})
    with pytest.warns(UserWarning):  # origin-axiom warning precedes the fatal check
        with pytest.raises(ConfigError) as err:
            parse_config(cfg)
    assert err.value.pointer == "/warping/formula"


def test_space_form_warping():
    cfg = dict(MINIMAL, warping={"type": "space_form", "b": -1})
    job = parse_config(cfg)
    assert isinstance(job.warping, SpaceForm)
    assert job.warping.b == -1.0


def test_positive_curvature_radius_limit():
    cfg = dict(MINIMAL, task="capacity", R=4.0,
               warping={"type": "space_form", "b": 1.0})
    with pytest.raises(ConfigError) as err:
        parse_config(cfg)
    assert err.value.pointer == "/R"


def test_R_parsing():
    job = parse_config(dict(MINIMAL, R="inf"))
    assert math.isinf(job.R)
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, R="huge"))
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, R=0.5))
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, task="table", R="inf"))


def test_intrinsic_mode_constraints():
    cfg = dict(MINIMAL, bounds={"g": "1", "h": "0.1", "lambda": "0"})
    with pytest.raises(ConfigError) as err:
        parse_config(cfg)
    assert err.value.pointer == "/bounds"
    with pytest.raises(ConfigError) as err:
        parse_config(dict(MINIMAL, n=5))
    assert err.value.pointer == "/n"


def test_extrinsic_defaults_from_bounds():
    cfg = dict(MINIMAL, n=5, bounds={"g": "1", "h": "0.1", "lambda": "0.2"})
    del cfg["mode"]
    job = parse_config(cfg)
    assert job.mode == "extrinsic"
    assert job.n == 5


def test_sweep_validation():
    base = {"task": "sweep", "rho": 1.0}
    good = dict(base, sweep={"m": [2, 3], "p": [2.0], "b": [-1.0],
                             "h0": [0.1], "lambda0": [0.0]})
    job = parse_config(good)
    assert job.sweep["m"] == [2.0, 3.0]
    with pytest.raises(ConfigError):
        parse_config(dict(base, sweep={"m": [2], "p": [2.0], "b": [-1.0], "h0": [0.1]}))
    with pytest.raises(ConfigError):
        parse_config(dict(base, sweep={"m": [], "p": [2.0], "b": [-1.0],
                                       "h0": [0.1], "lambda0": [0.0]}))
    with pytest.raises(ConfigError):
        parse_config(dict(base, sweep={"m": [2], "p": [2.0], "b": [1.0],
                                       "h0": [0.1], "lambda0": [0.0]}))
    with pytest.raises(ConfigError):
        parse_config(dict(base, sweep={"m": [2], "p": [1.5], "b": [-1.0],
                                       "h0": [0.1], "lambda0": [0.0]}))


def test_numerics_overrides():
    job = parse_config(dict(MINIMAL, numerics={"rel_tol": 1e-8, "grid": 65}))
    assert job.numerics.rel_tol == 1e-8
    assert job.numerics.grid == 65
    assert job.numerics.tail_doublings == 20
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, numerics={"rel_tol": 1e-14}))
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, numerics={"magic": 3}))


def test_boundary_flux_validation():
    job = parse_config(dict(MINIMAL, boundary_flux=12.5))
    assert job.boundary_flux == 12.5
    with pytest.raises(ConfigError):
        parse_config(dict(MINIMAL, boundary_flux=-1.0))


def test_verify_task_minimal():
    job = parse_config({"task": "verify"})
    assert job.task == "verify"


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(MINIMAL), encoding="utf-8")
    job = load_config(str(path))
    assert job.m == 3


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(bad))
