from fractions import Fraction as F

import pytest

from pabisim.automaton import Dist, parse_model
from pabisim.bisim import approx_bisim_query, dist_bisim_det, prob_bisim
from pabisim.errors import RejectedInput
from pabisim.generators import SIM_COARSER, corpus, gen_random

TWO_COINS = """automaton coins
ap h
actions a
state x
state y
state z
state hx label h
init x:1
trans x a -> hx:1/2, z:1/2
trans y a -> hx:1/2, z:1/2
trans y a -> z:1
trans z a -> z:1
trans hx a -> hx:1
"""


def test_exam1_state_blocks_separate_q_and_q_prime():
    A = corpus()["exam1"](0, 0).automaton
    P = prob_bisim(A)
    assert not P.same("q", "q'")
    assert P.same("s1", "s1'") and P.same("s2", "s4")
    assert not P.same("r1", "r'")


def test_exam1_distributions_bisimilar_only_when_eps_equal():
    fx = corpus()["exam1"](0, 0)
    r = dist_bisim_det(fx.automaton, fx.mu, fx.nu)
    assert r.bisimilar and r.word is None
    fx = corpus()["exam1"](F(1, 5), F(1, 10))
    r = dist_bisim_det(fx.automaton, fx.mu, fx.nu)
    assert not r.bisimilar and r.word == ("a", "a")
    fx = corpus()["exam1"](F(1, 7), F(1, 7))
    assert dist_bisim_det(fx.automaton, fx.mu, fx.nu).bisimilar


def test_combined_transitions_matter_for_state_bisimulation():
    A = parse_model(TWO_COINS)
    P = prob_bisim(A)
    # y has an extra move that x cannot match even with combinations
    assert not P.same("x", "y")
    B = parse_model(TWO_COINS.replace("trans y a -> z:1\n", "trans y a -> hx:1/4, z:3/4\ntrans y a -> hx:3/4, z:1/4\n"))
    # now the extra moves average to x's move, but x cannot reach their extremes
    assert not prob_bisim(B).same("x", "y")
    # x's half-half move is a combination of y's two Dirac moves
    D = parse_model("""automaton mix
ap h
actions a
state x
state y
state hx label h
state z
init x:1
trans x a -> hx:1
trans x a -> z:1
trans x a -> hx:1/2, z:1/2
trans y a -> hx:1
trans y a -> z:1
trans hx a -> hx:1
trans z a -> z:1
""")
    assert prob_bisim(D).same("x", "y")


def test_dist_bisim_det_rejects_nondeterministic():
    with pytest.raises(RejectedInput, match="nondeterministic"):
        dist_bisim_det(parse_model(SIM_COARSER), "s1:1", "t1:1")


def test_state_bisimilar_blockmates_are_distribution_bisimilar_on_200_mdps():
    checked = 0
    for seed in range(200):
        A = gen_random({"n_states": 5, "n_actions": 2, "deterministic": True, "label_classes": 0,
                        "density": F(3, 5), "max_support": 2}, seed)
        P = prob_bisim(A)
        for block in P.blocks:
            for t in block[1:]:
                r = dist_bisim_det(A, Dist.dirac(block[0]), Dist.dirac(t))
                assert r.bisimilar, (seed, block[0], t)
                checked += 1
    assert checked > 50


def test_approx_query_from_exact_metric():
    fx = corpus()["exam1"](F(1, 5), F(1, 10))
    A = fx.automaton
    assert approx_bisim_query(A, fx.mu, fx.nu, F(1, 20), 1, F(1, 1000)).verdict == "yes"
    r = approx_bisim_query(A, fx.mu, fx.nu, F(1, 30), 1, F(1, 1000))
    assert r.verdict == "no" and r.lower == F(1, 20)


def test_approx_query_on_nondeterministic_never_claims_yes_from_heuristics():
    fx = corpus()["sim-coarser"]
    r = approx_bisim_query(fx.automaton, fx.mu, fx.nu, F(1, 10), F(1, 2), F(1, 1000))
    assert r.verdict == "unknown" and r.lower == 0
