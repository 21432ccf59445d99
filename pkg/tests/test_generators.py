import random
from collections import Counter
from fractions import Fraction as F
from itertools import combinations, product

import pytest

from oracles import clique_oracle
from pabisim.automaton import Dist, classify, parse_model, serialize_model
from pabisim.bisim import approx_bisim_query
from pabisim.errors import ModelError, RejectedInput
from pabisim.generators import (SAMPLE_GRAPH, corpus, gen_clique, gen_emptiness_gadget, gen_random, make_graph,
                                parse_graph, sink_automaton)
from pabisim.reactive import eps_empty_search
from pabisim.traces import best_word, max_word_prob


def test_figure_graph_branch_masses():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    assert classify(C).reactive
    (d,) = C.choices("s", "tau")
    assert Counter(d.values()) == Counter([F(8, 18), F(4, 18), F(4, 18), F(2, 18)])
    assert d["s1.1"] == F(8, 18)  # vertex a has degree 3
    assert C.label("t") == frozenset({"acc"}) and all(C.label(s) == frozenset() for s in C.states if s != "t")


def test_single_vertex():
    C = gen_clique(make_graph(["v"], []))
    assert C.choices("s", "tau")[0] == Dist.dirac("s1.1")
    assert max_word_prob(C, "s:1", ("tau", "v"), target=["t"]) == 1
    assert best_word(C, "s:1", 3, target=["t"]) == (1, ("tau", "v"))


def test_triangle():
    C = gen_clique(make_graph("xyz", ["xy", "yz", "xz"]))
    assert best_word(C, "s:1", 4, target=["t"])[0] == F(3, 12)


def _structured_best(G, C):
    # at position j only v_j or tau keeps any branch alive; every other letter leads to r
    n = len(G.vertices)
    best = F(0)
    for pick in product((0, 1), repeat=n):
        w = ("tau",) + tuple(v if b else "tau" for v, b in zip(G.vertices, pick))
        best = max(best, max_word_prob(C, "s:1", w, target=["t"]))
    return best


def _random_graph(rng, n):
    vs = [chr(ord("a") + i) for i in range(n)]
    es = [e for e in combinations(vs, 2) if rng.random() < 0.5]
    return make_graph(vs, es), vs, es


@pytest.mark.parametrize("seed", range(40))
def test_clique_mass_equals_max_clique_over_lambda(seed):
    rng = random.Random(seed)
    G, vs, es = _random_graph(rng, rng.randint(1, 6))
    C = gen_clique(G)
    lam = sum(2 ** G.degree(v) for v in vs)
    best = _structured_best(G, C)
    assert best * lam == clique_oracle(vs, es) == G.max_clique()
    if len(vs) <= 3:
        assert best_word(C, "s:1", len(vs) + 1, target=["t"])[0] == best


def test_gadget_sink():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    G, sink = gen_emptiness_gadget(C)
    assert sink == "sink" and G.label(sink) == frozenset()
    assert all(G.choices(sink, a) == (Dist.dirac(sink),) for a in G.actions)
    assert classify(G).reactive
    with pytest.raises(RejectedInput):
        gen_emptiness_gadget(parse_model(corpus()["trace-jan"].model))


def test_gadget_links_emptiness_and_separation():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    G, sink = gen_emptiness_gadget(C)
    assert eps_empty_search(G, F(1, 8), 6) is not None
    r = approx_bisim_query(G, "s:1", f"{sink}:1", F(1, 8), 1, F(1, 1000))
    assert r.verdict == "no"


def test_no_accepting_state_is_never_separated_from_sink():
    A = gen_random({"n_states": 3, "n_actions": 2, "reactive": True}, 7)
    A = parse_model(serialize_model(A).replace(" label acc", ""))
    G, sink = gen_emptiness_gadget(A)
    assert eps_empty_search(G, F(1, 100), 5) is None
    r = approx_bisim_query(G, A.initial, f"{sink}:1", F(1, 100), 1, F(1, 1000))
    assert r.verdict == "yes"


def test_sink_automaton():
    C = gen_clique(parse_graph(SAMPLE_GRAPH))
    S = sink_automaton(C)
    assert S.states == ("sink",) and S.actions == C.actions and classify(S).reactive


@pytest.mark.parametrize("text,line", [
    ("vertices a b\nedge a a\n", 2),
    ("vertices a b\nedge a\n", 2),
    ("vertices a b\nloop a b\n", 2),
])
def test_parse_graph_errors(text, line):
    with pytest.raises(ModelError) as exc:
        parse_graph(text)
    assert exc.value.line == line


def test_graph_validation():
    with pytest.raises(ModelError):
        parse_graph("vertices a b\nedge a c\n")
    with pytest.raises(ModelError):
        parse_graph("# nothing\n")
    with pytest.raises(RejectedInput):
        gen_clique(make_graph(["tau"], []))


@pytest.mark.parametrize("seed", range(10))
def test_random_is_seed_stable(seed):
    p = {"n_states": 5, "n_actions": 3, "max_choices": 3, "label_classes": 3, "density": F(2, 3)}
    assert serialize_model(gen_random(p, seed)) == serialize_model(gen_random(p, seed))


@pytest.mark.parametrize("seed", range(20))
def test_random_flags(seed):
    assert classify(gen_random({"n_states": 4, "n_actions": 2, "deterministic": True}, seed)).deterministic
    assert classify(gen_random({"n_states": 3, "n_actions": 2, "reactive": True}, seed)).reactive
    assert classify(gen_random({"n_states": 3, "n_actions": 2, "input_enabled": True}, seed)).input_enabled


def test_random_rejects_infeasible_params():
    with pytest.raises(RejectedInput):
        gen_random({"n_states": 0}, 1)
    with pytest.raises(RejectedInput):
        gen_random({"deterministic": True, "max_choices": 2}, 1)
    with pytest.raises(RejectedInput):
        gen_random({"density": 2}, 1)
    with pytest.raises(RejectedInput):
        gen_random({"reactive": True, "label_classes": 0}, 1)


def test_corpus_fixtures_parse_and_classify():
    fx = corpus()
    assert set(fx) == {"exam1", "sim-coarser", "trace-late-derived", "jan-late", "trace-jan", "trace-late",
                       "non-comp", "clique"}
    for name, f in fx.items():
        f = f(F(1, 5), F(1, 10)) if callable(f) else f
        A = parse_model(f.model)
        classify(A)
        A.dist(f.mu), A.dist(f.nu)
        assert parse_model(serialize_model(A)) == A
    assert fx["non-comp"].sync == ("a", "b", "c")
    assert classify(fx["clique"].automaton).reactive


def test_exam1_is_parameterized():
    A = corpus()["exam1"](F(1, 5), F(1, 10)).automaton
    B = corpus()["exam1"](0, 0).automaton
    assert A != B and A.states == B.states
