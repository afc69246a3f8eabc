import math

import pytest

from dsumm.expr import ExprError, eval_expr, expr_names, expr_sequence, parse_expr
from dsumm.config import Config, ConfigError, SCHEMA, parse_config, serialize_config
from dsumm.matrix4d import BParams

P1 = BParams(2, 1, 3, 1)


# ---------------------------------------------------------------------------
# expression grammar

def val(text, k, l, params=None):
    return expr_sequence(text, params)(k, l)


def test_precedence_and_associativity():
    assert val("2+3*4", 0, 0) == 14.0
    assert val("2*3^2", 0, 0) == 18.0
    assert val("2^3^2", 0, 0) == 512.0  # right associative
    assert val("6/3/2", 0, 0) == 1.0  # left associative
    assert val("-k^2", 3, 0) == -9.0  # negation binds looser than the power
    assert val("(-k)^2", 3, 0) == 9.0
    assert val("(-1)^l", 0, 3) == -1.0
    assert val("2^-2", 0, 0) == 0.25
    assert val("1e-3 + 1", 0, 0) == 1.001


def test_index_variables_and_division():
    assert val("k/(l+1)", 6, 2) == 2.0
    assert val("(k+1)*(l+1)", 4, 4) == 25.0
    assert math.isinf(val("1/l", 0, 0))


def test_band_constants_need_params():
    with pytest.raises(ExprError, match="band parameters"):
        expr_sequence("r*k")
    assert val("r*k", 1, 0, P1) == 2.0
    assert val("s+u", 0, 0, P1) == 2.0
    assert val("(-(s/r))^k", 2, 0, P1) == 0.25


def test_parse_errors_carry_columns():
    with pytest.raises(ExprError, match=r"at column 3"):
        parse_expr("2 $ 3")
    with pytest.raises(ExprError, match=r"unknown name 'q'.*\(at column 1\)"):
        parse_expr("q+1")
    with pytest.raises(ExprError, match=r"trailing input.*at column 3"):
        parse_expr("k l")
    with pytest.raises(ExprError, match=r"at column"):
        parse_expr("(k")
    with pytest.raises(ExprError, match=r"at column"):
        parse_expr("k + ")
    with pytest.raises(ExprError, match="empty expression"):
        parse_expr("   ")


def test_integer_exponent_guard():
    x = expr_sequence("k^0.5")
    with pytest.raises(ExprError, match="integer-valued"):
        x(2, 0)
    y = expr_sequence("(-1)^(k/2)")
    assert y(4, 0) == 1.0
    with pytest.raises(ExprError, match="integer-valued"):
        y(3, 0)
    with pytest.raises(ExprError, match="integer-valued"):
        y.grid(4, 4)


def test_scalar_and_grid_paths_agree_bitwise():
    x = expr_sequence("(-1)^(k+l) * (k+1)/(l+2)^2")
    g = x.grid(7, 5)
    for m in range(8):
        for n in range(6):
            assert x(m, n) == g[m, n]


def test_expr_names_collects_leaves():
    node = parse_expr("r*k + (l - u)^2")
    assert expr_names(node) == frozenset({"r", "k", "l", "u"})
    assert eval_expr(parse_expr("2^3"), {}) == 8.0


# ---------------------------------------------------------------------------
# config files

GOOD = """\
# a comment
[sequence]
corpus = alt-col

[operation]
op = verdict
space = Cf

[schedule]
sides = 8 16 32

[tolerance]
decision_tol = 1e-3
"""


def test_parse_and_accessors():
    cfg = parse_config(GOOD)
    assert cfg.has("sequence", "corpus")
    assert cfg.get("sequence", "corpus") == "alt-col"
    assert cfg.get("sequence", "expr") is None
    assert cfg.require("operation", "op") == "verdict"
    assert cfg.get_float("tolerance", "decision_tol") == 1e-3
    assert cfg.get_float("tolerance", "exact_tol", 7.5) == 7.5
    assert cfg.get_int_list("schedule", "sides") == [8, 16, 32]
    with pytest.raises(ConfigError, match="missing required key tolerance.trend_ratio"):
        cfg.require("tolerance", "trend_ratio")


def test_round_trip_is_lossless_and_canonical():
    cfg = parse_config(GOOD)
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    # sections and keys come out in schema order regardless of input order
    jumbled = "[params]\nt = 3\nr = 2\n\n[sequence]\ncorpus = e\n"
    out = serialize_config(parse_config(jumbled))
    assert out == "[sequence]\ncorpus = e\n\n[params]\nr = 2\nt = 3\n"
    assert serialize_config(Config()) == ""


def test_parse_errors_name_line_and_column():
    with pytest.raises(ConfigError, match=r"key outside of any section \(line 1, column 1\)"):
        parse_config("x = 1")
    with pytest.raises(ConfigError, match=r"unknown section \[nope\].*line 1"):
        parse_config("[nope]")
    with pytest.raises(ConfigError, match=r"unterminated section header"):
        parse_config("[params")
    with pytest.raises(ConfigError, match=r"unknown key 'z' in \[params\].*line 2"):
        parse_config("[params]\nz = 1")
    with pytest.raises(ConfigError, match=r"duplicate key 'r' in \[params\] \(line 3"):
        parse_config("[params]\nr = 1\nr = 2")
    with pytest.raises(ConfigError, match=r"duplicate section \[params\] \(line 2"):
        parse_config("[params]\n[params]")
    with pytest.raises(ConfigError, match=r"expected 'key = value' \(line 2, column 1\)"):
        parse_config("[params]\nr")
    with pytest.raises(ConfigError, match=r"empty value for params.r"):
        parse_config("[params]\nr =")


def test_typed_accessor_errors():
    cfg = parse_config("[tolerance]\ndecision_tol = abc\n")
    with pytest.raises(ConfigError, match="must be a number"):
        cfg.get_float("tolerance", "decision_tol")
    cfg2 = parse_config("[schedule]\nsides = 8 sixteen\n")
    with pytest.raises(ConfigError, match="whitespace-separated integers"):
        cfg2.get_int_list("schedule", "sides")
    empty = Config(sections={"schedule": {"sides": "   "}})
    with pytest.raises(ConfigError, match="must not be empty"):
        empty.get_int_list("schedule", "sides")


def test_serialize_rejects_off_schema_content():
    with pytest.raises(ConfigError, match=r"unknown section \[bogus\]"):
        serialize_config(Config(sections={"bogus": {}}))
    with pytest.raises(ConfigError, match="unknown key"):
        serialize_config(Config(sections={"params": {"z": "1"}}))


def test_schema_covers_cli_surface():
    assert set(SCHEMA) == {
        "sequence", "kernel", "params", "schedule", "tolerance", "operation", "output",
    }
    assert SCHEMA["operation"] == ("op", "space", "class", "which", "set", "kind", "norm", "q")
