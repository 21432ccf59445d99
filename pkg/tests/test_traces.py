import random
from fractions import Fraction as F

import pytest

from oracles import all_words, word_values
from pabisim.automaton import Dist, parse_model
from pabisim.errors import CapExceeded, RejectedInput
from pabisim.generators import SAMPLE_GRAPH, corpus, gen_clique, gen_random, parse_graph, random_dist
from pabisim.traces import (best_word, enumerate_schedulers, max_word_prob, prio_equiv_bounded, scheduler_count,
                            trace_dist_equiv_bounded, trace_vectors, word_text)

H, T = F(1, 2), F(1, 3)
ND = {"n_states": 4, "n_actions": 2, "max_choices": 2, "label_classes": 2, "density": F(3, 4), "max_support": 2}


def _w(text):
    return tuple(text)


def test_empty_word_and_unknown_action():
    A = corpus()["trace-jan"].automaton
    assert max_word_prob(A, "t0:1", ()) == 1
    with pytest.raises(RejectedInput, match="unknown action"):
        max_word_prob(A, "t0:1", ("z",))


def test_trace_jan_word_ab():
    A = corpus()["trace-jan"].automaton
    assert max_word_prob(A, "t0:1", _w("ab")) == 1
    assert max_word_prob(A, "t0:1", _w("ac")) == 1
    assert max_word_prob(A, "t0:1", _w("abc")) == 0


def test_clique_best_word():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    w = ("tau", "a", "b", "c", "tau")
    assert max_word_prob(C, "s:1", w, target=["t"]) == F(3, 18)
    assert best_word(C, "s:1", 6, target=["t"]) == (F(1, 6), w)


@pytest.mark.parametrize("seed", range(30))
def test_max_word_prob_matches_scheduler_enumeration(seed):
    A = gen_random(ND, seed)
    rng = random.Random(seed)
    mu = random_dist(A, rng)
    for w in all_words(A.actions, 3):
        vals = word_values(A, mu, w)
        assert max_word_prob(A, mu, w) == max(vals)


@pytest.mark.parametrize("seed", range(30))
def test_max_word_prob_is_monotone_under_extension(seed):
    A = gen_random(ND, seed)
    mu = random_dist(A, random.Random(seed))
    for w in all_words(A.actions, 3):
        v = max_word_prob(A, mu, w)
        for a in A.actions:
            assert max_word_prob(A, mu, w + (a,)) <= v


def test_prio_results_on_corpus():
    fx = corpus()["trace-jan"]
    assert prio_equiv_bounded(fx.automaton, fx.mu, fx.nu, 3).equal
    assert prio_equiv_bounded(fx.automaton, fx.mu, fx.mu, 5).equal
    nc = corpus()["non-comp"]
    # every word's optimum agrees on both sides of the composed pair
    assert prio_equiv_bounded(nc.automaton, nc.mu, nc.nu, 4).equal
    with pytest.raises(RejectedInput):
        prio_equiv_bounded(fx.automaton, fx.mu, fx.nu, -1)


def test_prio_witness_is_checked_exactly():
    fx = corpus()["trace-late"]
    A = parse_model(fx.model.replace("trans t0 b -> s4:1/2, s6:1/2", "trans t0 b -> s4:1/4, s6:3/4"))
    r = prio_equiv_bounded(A, fx.mu, fx.nu, 3)
    assert not r.equal and r.word == _w("bd")
    assert (r.left, r.right) == (max_word_prob(A, fx.mu, r.word), max_word_prob(A, fx.nu, r.word)) == (H, F(1, 4))


def test_plain_certified_pairs_are_prio_equal():
    fx = corpus()["sim-coarser"]
    assert prio_equiv_bounded(fx.automaton, fx.mu, fx.nu, 4).equal


@pytest.mark.parametrize("seed", range(20))
def test_scheduler_count_matches_enumeration(seed):
    A = gen_random(ND, seed)
    for s in A.states:
        for k in range(3):
            assert scheduler_count(A, Dist.dirac(s), k) == len(list(enumerate_schedulers(A, s, k)))


def test_scheduler_vectors_are_covered_by_trace_vectors():
    A = gen_random(ND, 3)
    s = A.states[0]
    vs = {tuple(sorted(v.items())) for v in trace_vectors(A, Dist.dirac(s), 2)}
    for tree in enumerate_schedulers(A, s, 2):
        assert tuple(sorted(tree.vector().items())) in vs


def test_trace_jan_equal():
    fx = corpus()["trace-jan"]
    r = trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 2)
    assert r.equal and r.witness is None


def test_jan_late_witness():
    fx = corpus()["jan-late"]
    r = trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 2)
    assert not r.equal and r.side == "left"
    want = {("a", "c"): T, ("a", "d"): T, ("b", "d"): T}
    hits = [v for v in r.witnesses if all(v.get(w) == p for w, p in want.items())]
    assert hits and hits[0][("a",)] == 2 * T and hits[0][("b",)] == T


def test_trace_late_witness():
    fx = corpus()["trace-late"]
    r = trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 2)
    assert not r.equal and r.side == "left"
    assert any(v.get(("b", "e")) == H and ("b", "d") not in v for v in r.witnesses)


def test_hull_check_is_symmetric():
    for name in ("trace-jan", "jan-late", "trace-late"):
        fx = corpus()[name]
        a = trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 2)
        b = trace_dist_equiv_bounded(fx.automaton, fx.nu, fx.mu, 2)
        assert a.equal == b.equal


def test_non_comp_trace_distributions_differ():
    fx = corpus()["non-comp"]
    assert not trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 3).equal


def test_cap_is_reported(monkeypatch):
    monkeypatch.setenv("PABISIM_MAX_NODES", "5")
    fx = corpus()["jan-late"]
    with pytest.raises(CapExceeded, match="exceeded 5"):
        trace_dist_equiv_bounded(fx.automaton, fx.mu, fx.nu, 2)


def test_word_text():
    assert word_text(_w("ab")) == "ab"
    assert word_text(("tau", "a")) == "tau.a"
