from fractions import Fraction as F

import pytest

from oracles import accept_prob, all_words
from pabisim.automaton import Dist, parse_model
from pabisim.errors import RejectedInput
from pabisim.generators import SAMPLE_GRAPH, gen_clique, gen_emptiness_gadget, gen_random, parse_graph, sink_automaton
from pabisim.reactive import (doyen_bisim, eps_empty_search, equivalence_metric_Dd, rabin_equiv,
                              to_matrix_form)

COIN = """automaton coin
ap acc
actions a
state x
state y label acc
init x:1
trans x a -> x:1/2, y:1/2
trans y a -> y:1
"""

COIN2 = """automaton coin2
ap acc
actions a
state u
state v label acc
state w label acc
init u:1
trans u a -> u:1/2, v:1/4, w:1/4
trans v a -> w:1
trans w a -> v:1
"""


def test_matrix_form_rejects_nonreactive_with_reason():
    A = parse_model(COIN.replace("trans y a -> y:1\n", ""))
    with pytest.raises(RejectedInput, match="not input-enabled"):
        to_matrix_form(A)


def test_rabin_equiv_identifies_renamed_copies():
    r = rabin_equiv(parse_model(COIN), parse_model(COIN2))
    assert r.equivalent and r.word is None


def test_rabin_equiv_witness_is_shortest():
    other = parse_model(COIN2.replace("u:1/2, v:1/4, w:1/4", "u:1/4, v:1/2, w:1/4"))
    r = rabin_equiv(parse_model(COIN), other)
    assert not r.equivalent
    assert r.word == ("a",)


def test_rabin_equiv_matches_word_enumeration_on_200_pairs():
    params = {"n_states": 3, "n_actions": 2, "reactive": True, "max_support": 2}
    disagreements = 0
    for seed in range(200):
        A1 = gen_random(params, 2 * seed)
        # half the pairs compare an automaton with a relabelled copy of itself
        A2 = gen_random(params, 2 * seed + 1) if seed % 2 else parse_model(
            open_copy(A1))
        r = rabin_equiv(A1, A2)
        brute = all(accept_prob(A1, w) == accept_prob(A2, w) for w in all_words(A1.actions, 6))
        assert r.equivalent == brute
        if not r.equivalent:
            disagreements += 1
            assert accept_prob(A1, r.word) != accept_prob(A2, r.word)
    assert 0 < disagreements < 200


def open_copy(A):
    from pabisim.automaton import serialize_model
    return serialize_model(A).replace("q", "z")


def test_doyen_bisim_inside_one_automaton():
    A = parse_model(COIN2)
    assert doyen_bisim(A, Dist.dirac("v"), Dist.dirac("w")).equivalent
    r = doyen_bisim(A, Dist.dirac("u"), Dist.dirac("v"))
    assert not r.equivalent and r.word == ()


def test_dd_clique_against_sink():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    r = equivalence_metric_Dd(C, sink_automaton(C), F(1, 2), F(1, 10**6))
    # best accepting mass 3/18 after five letters, discounted by 2^-5
    assert r.value == F(1, 192)
    assert r.status == "exact"
    assert r.word == ("tau", "a", "b", "c", "tau")


def test_dd_is_zero_for_equivalent_pair():
    r = equivalence_metric_Dd(parse_model(COIN), parse_model(COIN2), F(1, 2), F(1, 1000))
    assert r.value == 0


def test_eps_empty_search():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    assert eps_empty_search(C, F(1, 8), 6) == ("tau", "a", "b", "c", "tau")
    assert eps_empty_search(C, F(1, 6), 6) is None
    with pytest.raises(RejectedInput):
        eps_empty_search(C, 0, 3)


def test_gadget_sink_is_never_accepting():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    G, sink = gen_emptiness_gadget(C)
    assert set(G.enabled(sink)) == set(C.actions)
    f = to_matrix_form(G)
    v = f.vector(Dist.dirac(sink))
    assert all(f.word_value(w, v) == 0 for w in all_words(G.actions, 3))
