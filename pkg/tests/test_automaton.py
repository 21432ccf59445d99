from fractions import Fraction as F

import pytest

from pabisim.automaton import (Dist, class_masses, classify, direct_sum, ensure_extended, extend_input_enabled,
                               make_automaton, parallel_compose, parse_dist, parse_model, serialize_model)
from pabisim.errors import ModelError, RejectedInput
from pabisim.generators import NON_COMP_LEFT, NON_COMP_RIGHT, SIM_COARSER, corpus, gen_random

SMALL = """automaton small
ap p
actions a b
state x label p
state y
init x:1
trans x a -> x:1/2, y:1/2
trans y b -> y:1
"""


def test_parse_and_serialize_round_trip():
    A = parse_model(SMALL)
    assert A.states == ("x", "y")
    assert A.label("x") == frozenset({"p"})
    assert A.choices("x", "a")[0] == Dist({"x": F(1, 2), "y": F(1, 2)})
    assert parse_model(serialize_model(A)) == A


@pytest.mark.parametrize("seed", range(20))
def test_random_models_round_trip(seed):
    A = gen_random({"n_states": 4, "n_actions": 2, "max_choices": 2, "label_classes": 3}, seed)
    assert parse_model(serialize_model(A)) == A


@pytest.mark.parametrize("text,line", [
    (SMALL.replace("trans y b -> y:1", "trans y b -> y:1/2"), 8),
    (SMALL.replace("trans y b -> y:1", "trans y c -> y:1"), 8),
    (SMALL.replace("trans y b -> y:1", "trans z b -> y:1"), 8),
    (SMALL.replace("state y", "state x"), 5),
    (SMALL.replace("state x label p", "state x label q"), 4),
    (SMALL.replace("init x:1", "init x:2/3, y:1/2"), 6),
    (SMALL + "bogus line\n", 9),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ModelError) as exc:
        parse_model(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_missing_header_lines():
    with pytest.raises(ModelError):
        parse_model("actions a\nstate x\ninit x:1\n")


def test_dist_literal_and_validation():
    d = parse_dist("a:1/3, b:2/3")
    assert d.literal() == "a:1/3,b:2/3"
    assert Dist({"a": 1, "b": 0}) == Dist.dirac("a")
    with pytest.raises(RejectedInput):
        Dist({"a": F(1, 2)})
    with pytest.raises(RejectedInput):
        Dist({"a": F(3, 2), "b": F(-1, 2)})


def test_classify_and_extension():
    A = parse_model(SMALL)
    rep = classify(A)
    assert not rep.input_enabled and rep.deterministic and not rep.reactive
    B = extend_input_enabled(A)
    assert classify(B).input_enabled
    assert B.bot == "bot" and B.label("bot") == frozenset({"dead"})
    assert B.choices("x", "b") == (Dist.dirac("bot"),)
    assert ensure_extended(B) is B
    with pytest.raises(RejectedInput):
        extend_input_enabled(B)


def test_labels_from_ea():
    A = corpus()["exam1"](0, 0).automaton
    assert A.ap == ("a",)
    assert A.label("q") == frozenset({"a"})
    assert A.label("s2") == frozenset()


def test_class_masses_only_inhabited_classes():
    A = parse_model(SMALL)
    m = class_masses(A, Dist({"x": F(1, 4), "y": F(3, 4)}))
    assert m == {frozenset({"p"}): F(1, 4), frozenset(): F(3, 4)}


def test_direct_sum_renames_states():
    A = parse_model(SIM_COARSER)
    S, m1, m2 = direct_sum(A, A)
    assert len(S.states) == 2 * len(A.states)
    assert S.choices("r.s1", "a")[0] == Dist.dirac("r.s3")
    assert m1["s1"] == "l.s1"


def test_parallel_composition_sync_and_interleave():
    L, R = parse_model(NON_COMP_LEFT), parse_model(NON_COMP_RIGHT)
    C = parallel_compose(L, R, {"a", "b", "c"})
    moves = C.choices("s0|r0", "a")
    assert len(moves) == 2
    assert Dist({"s1|r1": F(1, 2), "s2|r1": F(1, 2)}) in moves
    # interleaving when nothing is shared
    I = parallel_compose(L, R, set())
    assert len(I.choices("s0|r0", "a")) == 3
    with pytest.raises(RejectedInput):
        parallel_compose(L, R, {"z"})


def test_make_automaton_validates_targets():
    with pytest.raises(RejectedInput):
        make_automaton("bad", (), ("a",), ("x",), [("x", "a", {"y": 1})], {"x": 1})
