import numpy as np
import pytest

from hemopap.builtin import EXAMPLE6_OVERRIDES, EXAMPLE6_RANGE, constant_spec, example6_spec
from hemopap.model import max_delay
from hemopap.scenario import (
    BUILTIN,
    Scenario,
    ScenarioError,
    load_builtin,
    parse_scenario,
    parse_scenario_text,
    serialize,
)

MINIMAL = """\
model:
  m: 2
  n: 2
  a: "const(0.38)"
  b: ["const(1.1)"]
  tau: ["const(1)"]
range: {k: 2, M: 2.9}
"""


def same_function(f, g):
    t = np.linspace(-200, 200, 4001)
    return np.array_equal(f(t), g(t)) and f.bounds() == g.bounds()


def test_builtin_example6_matches_library_spec():
    sc = load_builtin("example6")
    ref = example6_spec()
    assert sc.model.m == sc.model.n == 2 and sc.model.N == 1
    assert max_delay(sc.model) == pytest.approx(4.0)
    assert sc.model.L == ref.L and sc.model.harvest.shape == ref.harvest.shape
    for name in ("a", "sigma"):
        assert same_function(getattr(sc.model, name), getattr(ref, name))
    assert same_function(sc.model.b[0], ref.b[0])
    assert same_function(sc.model.tau[0], ref.tau[0])
    assert same_function(sc.model.harvest.c, ref.harvest.c)
    assert sc.overrides == EXAMPLE6_OVERRIDES
    assert sc.range == EXAMPLE6_RANGE


@pytest.mark.parametrize("name", BUILTIN)
def test_builtins_load_and_round_trip(name):
    sc = load_builtin(name)
    again = parse_scenario_text(serialize(sc))
    assert serialize(again) == serialize(sc)
    assert again.range == sc.range and again.numerics == sc.numerics and again.overrides == sc.overrides
    for f, g in zip([sc.model.a, *sc.model.b, *sc.model.tau, sc.model.sigma], [again.model.a, *again.model.b, *again.model.tau, again.model.sigma]):
        assert same_function(f, g)


def test_parse_by_name_and_path(tmp_path):
    assert isinstance(parse_scenario("example6"), Scenario)
    assert isinstance(parse_scenario("example6.scn"), Scenario)
    p = tmp_path / "mine.scn"
    p.write_text(MINIMAL)
    sc = parse_scenario(p)
    assert sc.model.a(0.0) == 0.38
    assert sc.numerics.h == 0.01 and sc.numerics.horizon == 400 and sc.numerics.grid_step == 0.05 and sc.numerics.tol == 1e-6
    assert not sc.model.harvest.active
    with pytest.raises(ScenarioError):
        parse_scenario(tmp_path / "missing.scn")


def test_empty_file_is_parse_error():
    with pytest.raises(ScenarioError, match="parse error"):
        parse_scenario_text("")


def test_malformed_yaml_has_line():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario_text("model:\n  m: [1,\n")
    assert exc.value.line is not None


def test_k_not_below_M_names_range_k():
    text = MINIMAL.replace("range: {k: 2, M: 2.9}", "range:\n  k: 3\n  M: 2.9")
    with pytest.raises(ScenarioError, match="range.k") as exc:
        parse_scenario_text(text)
    assert exc.value.key == "range.k"
    assert exc.value.line == 8


def test_unknown_key_has_line_number():
    text = MINIMAL.replace("  tau:", "  tua: 3\n  tau:")
    with pytest.raises(ScenarioError, match="unknown key 'model.tua'") as exc:
        parse_scenario_text(text)
    assert exc.value.line == 6
    assert str(exc.value).startswith("line 6: ")


@pytest.mark.parametrize(
    "patch, key",
    [
        (("m: 2", "m: 0.5"), "model"),
        (("m: 2", "m: two"), "model.m"),
        (('a: "const(0.38)"', 'a: "const(0.38) + 1"'), "model.a"),
        (("range: {k: 2, M: 2.9}", "range: {k: -1, M: 2.9}"), "range.k"),
        (("range: {k: 2, M: 2.9}", "range: {k: 2, M: 2.9}\nnumerics: {h: 0}"), "numerics.h"),
        (("range: {k: 2, M: 2.9}", "range: {k: 2, M: 2.9}\nnumerics: {window: [5, 1]}"), "numerics.window"),
        (("range: {k: 2, M: 2.9}", "range: {k: 2, M: 2.9}\noverrides: {L: -1}"), "overrides.L"),
        (('tau: ["const(1)"]', 'tau: ["const(1)"]\n  harvest: {c: "const(0.1)", shape: cubic}'), "model.harvest.shape"),
    ],
)
def test_validation_errors_name_the_key(patch, key):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario_text(MINIMAL.replace(*patch))
    assert exc.value.key == key


def test_missing_required_block():
    with pytest.raises(ScenarioError, match="range"):
        parse_scenario_text(MINIMAL.split("range")[0])


def test_constant_builtin_is_the_constant_regime():
    sc = load_builtin("constant")
    ref = constant_spec()
    assert same_function(sc.model.a, ref.a) and same_function(sc.model.b[0], ref.b[0])
