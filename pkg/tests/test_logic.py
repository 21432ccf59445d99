import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pabisim.automaton import Dist, ensure_extended, parse_model
from pabisim.errors import RejectedInput
from pabisim.generators import SIM_COARSER, corpus, gen_random, random_dist
from pabisim.logic import (ClassFamily, Conj, Diamond, FormulaError, Neg, Shift, diamonds, distance_lb, eval_affine,
                           eval_det, family, format_formula, parse_formula)
from pabisim.metrics import Df_det

E1, E2 = F(1, 5), F(1, 10)


@pytest.fixture(scope="module")
def exam1():
    return corpus()["exam1"](E1, E2)


def test_parse_examples():
    assert parse_formula("B{ {a} }") == family({"a"})
    assert parse_formula("<a><a>B{ {a} }") == Diamond("a", Diamond("a", family({"a"})))
    assert parse_formula("!(B{} (+) 1/4)") == Neg(Shift(ClassFamily(frozenset()), F(1, 4)))
    assert parse_formula("AND(B{{}}, <b>B{{x y}, {x}})") == Conj((family(()), Diamond("b", family({"x", "y"}, {"x"}))))
    # shift associates to the left and binds looser than prefix operators
    assert parse_formula("<a>B{{p}} (+) 1/4 (+) 1/2") == Shift(Shift(Diamond("a", family({"p"})), F(1, 4)), F(1, 2))


@pytest.mark.parametrize("text,pos", [
    ("B{ {a} ", 7),
    ("<a B{{a}}", 3),
    ("B{{a}} (+) 3/2", 11),
    ("B{{a}} (+)", 10),
    ("B{{a}} extra", 7),
    ("AND()", 4),
    ("B{{a}} # x", 7),
])
def test_syntax_errors_carry_positions(text, pos):
    with pytest.raises(FormulaError) as exc:
        parse_formula(text)
    assert exc.value.pos == pos
    assert str(exc.value).startswith(f"position {pos}:")


ATOMS = st.sampled_from(["a", "b", "dead"])
CLASSES = st.frozensets(ATOMS, max_size=2)
FAMILIES = st.builds(ClassFamily, st.frozensets(CLASSES, max_size=3))
SHIFTS = st.fractions(min_value=0, max_value=1, max_denominator=12)


def _formulas():
    return st.recursive(
        FAMILIES,
        lambda inner: st.one_of(
            st.builds(Neg, inner),
            st.builds(Diamond, st.sampled_from(["a", "b"]), inner),
            st.builds(Shift, inner, SHIFTS),
            st.builds(lambda xs: Conj(tuple(xs)), st.lists(inner, min_size=1, max_size=3)),
        ),
        max_leaves=6)


@settings(max_examples=200, deadline=None)
@given(_formulas())
def test_printer_round_trips(phi):
    assert parse_formula(format_formula(phi)) == phi


EX = parse_model("""automaton ex
ap a b
actions a b
state x label a
state y label b
state z label a b
init x:1
trans x a -> y:1/3, z:2/3
trans x b -> x:1
trans y a -> x:1/2, y:1/2
trans y b -> z:1
trans z a -> z:1
""")


@settings(max_examples=200, deadline=None)
@given(_formulas(), st.sampled_from(["x", "y", "z"]), st.sampled_from([F(1), F(1, 2), F(1, 3)]))
def test_connective_laws(phi, s, gamma):
    mu = Dist.dirac(s)
    v = eval_det(EX, phi, mu, gamma)
    assert 0 <= v <= 1
    assert eval_det(EX, Neg(Neg(phi)), mu, gamma) == v
    assert eval_det(EX, Shift(phi, F(0)), mu, gamma) == v
    assert eval_det(EX, Conj((phi,)), mu, gamma) == v


def test_eval_det_exam1(exam1):
    phi = parse_formula("<a><a>B{{a}}")
    assert eval_det(exam1.automaton, phi, "q:1", 1) == (1 + E1 - E2) / 2 == F(11, 20)
    assert eval_det(exam1.automaton, phi, "q':1", 1) == F(1, 2)


def test_class_family_is_label_mass():
    mu = Dist({"x": F(1, 2), "y": F(1, 3), "z": F(1, 6)})
    assert eval_det(EX, family({"a"}, {"a", "b"}), mu, 1) == F(2, 3)
    assert eval_det(EX, ClassFamily(frozenset()), mu, 1) == 0


def test_eval_det_rejections():
    A = parse_model(SIM_COARSER)
    with pytest.raises(RejectedInput, match="affine"):
        eval_det(A, Diamond("a", Shift(family({"box"}), F(1, 2))), "s1:1", 1)
    with pytest.raises(RejectedInput, match="unknown action"):
        eval_det(EX, Diamond("c", family({"a"})), "x:1", 1)
    with pytest.raises(RejectedInput, match="unknown atomic"):
        eval_det(EX, family({"q"}), "x:1", 1)
    with pytest.raises(RejectedInput):
        eval_det(EX, family({"a"}), "x:1", 0)
    with pytest.raises(RejectedInput, match="affine fragment"):
        eval_affine(EX, Conj((family({"a"}),)), "x:1", 1)


def test_eval_affine_trace_jan():
    fx = corpus()["trace-jan"]
    phi = parse_formula("<a><b>B{{}}")
    assert eval_affine(fx.automaton, phi, "s0:1", 1) == 1
    assert eval_affine(fx.automaton, phi, "t0:1", 1) == 1
    # on a nondeterministic automaton eval_det hands fragment formulas over
    assert eval_det(fx.automaton, phi, "t0:1", 1) == 1


def test_one_step_max_over_two_choices():
    A = parse_model(SIM_COARSER)
    phi = Diamond("a", family({"circle"}))
    assert eval_affine(A, phi, "t2:1", F(1, 2)) == F(1, 2)
    assert eval_affine(A, Diamond("a", Neg(family({"circle"}))), "t2:1", 1) == 1
    assert eval_affine(A, phi, "s1:1/2, s2:1/2", 1) == 1


def _fragment():
    return st.recursive(
        FAMILIES,
        lambda inner: st.one_of(st.builds(Neg, inner), st.builds(Diamond, st.sampled_from(["a", "b"]), inner)),
        max_leaves=5)


@settings(max_examples=200, deadline=None)
@given(_fragment(), st.integers(0, 10**6))
def test_affine_matches_det_on_deterministic(phi, seed):
    A = gen_random({"n_states": 4, "n_actions": 2, "deterministic": True, "label_classes": 3,
                    "density": F(4, 5), "max_support": 2}, seed)
    A = parse_model(_rename_ap(A))
    mu = random_dist(ensure_extended(A), random.Random(seed))
    assert eval_affine(A, phi, mu, F(1, 2)) == eval_det(A, phi, mu, F(1, 2))


def _rename_ap(A):
    # random models use p0, p1, ...; map them onto the atoms the strategy draws from
    from pabisim.automaton import serialize_model
    return serialize_model(A).replace("p0", "a").replace("p1", "b")


def test_distance_lb_exam1(exam1):
    A = exam1.automaton
    assert distance_lb(A, "q:1", "q:1", 1, 3) == (0, None)
    b, w = distance_lb(A, exam1.mu, exam1.nu, 1, 3)
    assert b == F(1, 20) and format_formula(w) == "<a><a>B{{a}}"
    b, w = distance_lb(A, exam1.mu, exam1.nu, F(1, 2), 3)
    assert b == F(1, 80) and w == diamonds("aa", family({"a"}))
    # the witness realizes the bound
    assert abs(eval_det(A, w, exam1.mu, F(1, 2)) - eval_det(A, w, exam1.nu, F(1, 2))) == b


def test_distance_lb_sim_coarser_is_zero():
    fx = corpus()["sim-coarser"]
    assert distance_lb(fx.automaton, fx.mu, fx.nu, F(1, 2), 4) == (0, None)
    assert distance_lb(fx.automaton, fx.mu, fx.nu, 1, 4)[0] == 0


def test_distance_lb_nondeterministic_witness_is_a_fragment_gap():
    fx = corpus()["trace-jan"]
    b, w = distance_lb(fx.automaton, fx.mu, fx.nu, 1, 3)
    assert b > 0
    A = fx.automaton
    assert abs(eval_affine(A, w, fx.mu, 1) - eval_affine(A, w, fx.nu, 1)) == b


def test_distance_lb_is_sound_for_df_on_random_deterministic():
    for seed in range(60):
        A = gen_random({"n_states": 4, "n_actions": 2, "deterministic": True, "label_classes": 3,
                        "density": F(4, 5), "max_support": 2}, seed)
        rng = random.Random(seed)
        B = ensure_extended(A)
        mu, nu = random_dist(B, rng), random_dist(B, rng)
        lb, _ = distance_lb(A, mu, nu, F(1, 2), 3)
        assert lb <= Df_det(A, mu, nu, F(1, 2), F(1, 1000)).value


def test_discount_shrinks_diamond_chain_gaps(exam1):
    A = exam1.automaton
    phi = diamonds("aa", family({"a"}))
    gaps = [abs(eval_det(A, phi, exam1.mu, g) - eval_det(A, phi, exam1.nu, g)) for g in (F(1, 4), F(1, 2), F(1))]
    assert gaps == sorted(gaps)
    assert gaps[0] == F(1, 16) * gaps[2]
