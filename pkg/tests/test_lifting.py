from fractions import Fraction as F

import pytest

from pabisim.automaton import Dist, ensure_extended, parse_model
from pabisim.errors import CapExceeded, NotEnabled, RejectedInput
from pabisim.generators import JAN_LATE, SIM_COARSER, TRACE_LATE, corpus
from pabisim.lifting import (canonical_split, consistent, dagger_step, dist_step_vertices,
                             distributed_step_vertices)

H = F(1, 2)


def test_step_vertices_enumerate_choice_functions():
    A = ensure_extended(parse_model(SIM_COARSER))
    P = dist_step_vertices(A, Dist({"s1": H, "s2": H}), "a")
    assert set(P.vertices) == {Dist.dirac("s3"), Dist({"s3": H, "s4": H})}
    Q = dist_step_vertices(A, Dist({"s1": H, "s2": H}), "b")
    assert Q.vertices == (Dist({"bot": H, "s4": H}),)


def test_step_requires_enabled_support():
    A = parse_model(SIM_COARSER)
    with pytest.raises(NotEnabled) as exc:
        dist_step_vertices(A, Dist({"s1": H, "s2": H}), "b")
    assert str(exc.value) == "not-enabled: state s1 has no b-transition"


def test_dagger_step_normalizes_enabled_mass():
    A = parse_model(TRACE_LATE)
    mu = Dist({"s1": H, "s2": H})
    P = dagger_step(A, mu, {"a"})
    assert set(P.vertices) == {Dist({"s3": H, "s5": H})}
    A2 = parse_model(JAN_LATE)
    P2 = dagger_step(A2, Dist({"s1": F(1, 3), "s2": F(1, 3), "s3": F(1, 3)}), {"b"})
    # only s2 and s3 enable b; their mass 2/3 is rescaled to 1
    assert P2.vertices == (Dist({"s5": H, "s6": H}),)
    assert dagger_step(A2, Dist.dirac("s5"), {"a"}) is None
    with pytest.raises(RejectedInput):
        dagger_step(A2, mu, set())


def test_canonical_split_by_enabled_actions():
    A = parse_model(SIM_COARSER)
    mu = Dist({"s1": H, "s2": H})
    assert not consistent(A, mu)
    sp = canonical_split(A, mu)
    assert sorted(sp.components, key=lambda c: c[1].literal()) == [(H, Dist.dirac("s1")), (H, Dist.dirac("s2"))]
    assert consistent(A, Dist.dirac("s1"))


def test_distributed_step_is_correlated_per_component():
    fx = corpus()["non-comp"]
    A = ensure_extended(fx.automaton)
    nu = A.dist(fx.nu)
    P = distributed_step_vertices(A, nu, "a", fx.sync)
    # the right component resolves r0 once for both left states
    assert set(P.vertices) == {Dist({"s1|r1": H, "s2|r1": H}), Dist({"s1|r2": H, "s2|r2": H})}
    plain = dist_step_vertices(A, nu, "a")
    assert len(plain.vertices) == 4


def test_node_cap(monkeypatch):
    monkeypatch.setenv("PABISIM_MAX_NODES", "3")
    A = ensure_extended(parse_model(SIM_COARSER))
    mu = Dist({"s1": F(1, 4), "t2": F(1, 4), "s2": F(1, 4), "t1": F(1, 4)})
    with pytest.raises(CapExceeded):
        dist_step_vertices(A, mu, "a")
