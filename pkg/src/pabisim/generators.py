"""Instance generators: the clique reduction, the emptiness gadget, the
fixture corpus and seeded random automata."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .automaton import Automaton, Dist, classify, make_automaton, parallel_compose, parse_model
from .errors import ModelError, RejectedInput
from .numerics import to_rational


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: frozenset  # of frozenset pairs

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise RejectedInput("self-loops are not allowed")
            for v in e:
                if v not in self.vertices:
                    raise RejectedInput(f"edge mentions unknown vertex {v}")

    def adjacent(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.edges

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in e)

    def max_clique(self) -> int:
        """Brute force over vertex subsets, largest first."""
        for k in range(len(self.vertices), 0, -1):
            for sub in combinations(self.vertices, k):
                if all(self.adjacent(u, v) for u, v in combinations(sub, 2)):
                    return k
        return 0


def make_graph(vertices, edges) -> Graph:
    return Graph(tuple(vertices), frozenset(frozenset(e) for e in edges))


def parse_graph(text: str) -> Graph:
    vertices: list[str] = []
    edges = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] == "vertices":
            vertices.extend(line[1:])
        elif line[0] == "edge":
            if len(line) != 3:
                raise ModelError("expected: edge <u> <v>", no)
            if line[1] == line[2]:
                raise ModelError("self-loops are not allowed", no)
            edges.append((line[1], line[2]))
        else:
            raise ModelError(f"unknown directive {line[0]!r}", no)
    if len(set(vertices)) != len(vertices):
        raise ModelError("duplicate vertex")
    if not vertices:
        raise ModelError("graph has no vertices")
    try:
        return make_graph(vertices, edges)
    except RejectedInput as exc:
        raise ModelError(str(exc)) from None


def gen_clique(G: Graph, tau: str = "tau") -> Automaton:
    """Reactive automaton whose best accepting mass is max-clique / lambda.

    Branch ``i`` starts with weight ``2^deg(v_i)``; along the branch the
    ``j``-th letter is ``v_i`` when ``j = i``, ``tau`` for a non-neighbour
    and either ``v_j`` or ``tau`` (each keeping half the mass) for a
    neighbour. Every unlisted move goes to the rejecting sink ``r``.
    """
    if not G.vertices:
        raise RejectedInput("graph has no vertices")
    if tau in G.vertices:
        raise RejectedInput(f"vertex name {tau} clashes with the silent action")
    V = G.vertices
    n = len(V)
    acts = tuple(V) + (tau,)
    lam = {v: 2 ** G.degree(v) for v in V}
    total = sum(lam.values())

    def node(i, j):
        return "t" if j == n + 1 else f"s{i}.{j}"

    states = ["s"] + [node(i, j) for i in range(1, n + 1) for j in range(1, n + 1)] + ["t", "r"]
    moves: dict[tuple[str, str], dict] = {}
    moves[("s", tau)] = {node(i, 1): Fraction(lam[V[i - 1]], total) for i in range(1, n + 1)}
    half = Fraction(1, 2)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            here, nxt = node(i, j), node(i, j + 1)
            vi, vj = V[i - 1], V[j - 1]
            if i == j:
                moves[(here, vi)] = {nxt: Fraction(1)}
            elif not G.adjacent(vi, vj):
                moves[(here, tau)] = {nxt: Fraction(1)}
            else:
                moves[(here, vj)] = {nxt: half, "r": half}
                moves[(here, tau)] = {nxt: half, "r": half}
    trans = []
    for s in states:
        for a in acts:
            trans.append((s, a, moves.get((s, a), {"r": Fraction(1)})))
    return make_automaton("clique", ("acc",), acts, states, trans, {"s": Fraction(1)}, labels={"t": {"acc"}})


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def sink_automaton(A: Automaton, name: str = "sink") -> Automaton:
    """One empty-labelled state looping on every action of ``A``."""
    return make_automaton(f"{A.name}-sink", A.ap, A.actions, (name,),
                          [(name, a, {name: 1}) for a in A.actions], {name: 1})


def gen_emptiness_gadget(A: Automaton) -> tuple[Automaton, str]:
    """``A`` plus a disjoint empty-labelled sink with self-loops on every action."""
    if not classify(A).reactive:
        raise RejectedInput("emptiness gadget needs a reactive automaton")
    sink = _fresh("sink", A.states)
    labels = {s: set(l) for s, l in zip(A.states, A.labels)}
    trans = list(A.transitions) + [(sink, a, {sink: 1}) for a in A.actions]
    B = make_automaton(f"{A.name}-gadget", A.ap, A.actions, A.states + (sink,), trans, A.initial, labels=labels)
    return B, sink


# --------------------------------------------------------------------------
# random instances


def gen_random(params: dict, seed) -> Automaton:
    """Seeded random automaton.

    params: n_states, n_actions, max_choices, density (probability that a
    (state, action) pair is enabled), label_classes (number of labels;
    0 means labels from enabled actions), deterministic, max_support,
    input_enabled, reactive.
    """
    n = int(params.get("n_states", 3))
    m = int(params.get("n_actions", 2))
    kmax = int(params.get("max_choices", 2))
    density = to_rational(params.get("density", 1))
    classes = int(params.get("label_classes", 2))
    det = bool(params.get("deterministic", False))
    supp = int(params.get("max_support", 3))
    reactive = bool(params.get("reactive", False))
    enabled_all = bool(params.get("input_enabled", False)) or reactive
    if n < 1 or m < 1 or kmax < 1 or supp < 1 or classes < 0:
        raise RejectedInput("sizes must be positive")
    if not 0 <= density <= 1:
        raise RejectedInput("density must lie in [0, 1]")
    if reactive and classes == 0:
        raise RejectedInput("reactive automata need explicit labels")
    if (det or reactive) and kmax != 1 and "max_choices" in params:
        raise RejectedInput("deterministic automata allow a single choice per action")
    rng = random.Random(seed)
    states = [f"q{i}" for i in range(n)]
    acts = [chr(ord("a") + i) if m <= 26 else f"a{i}" for i in range(m)]

    def dist():
        k = rng.randint(1, min(supp, n))
        targets = rng.sample(states, k)
        cuts = sorted(rng.randint(0, 12) for _ in range(k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [12])]
        mass = {}
        for t, p in zip(targets, parts):
            if p:
                mass[t] = Fraction(p, 12)
        if not mass:
            mass[targets[0]] = Fraction(1)
        return mass

    trans = []
    for s in states:
        for a in acts:
            if not enabled_all and rng.random() >= density:
                continue
            count = 1 if det or reactive else rng.randint(1, kmax)
            made = []
            for _ in range(count):
                d = Dist(dist())
                if d not in made:
                    made.append(d)
                    trans.append((s, a, d))
    if reactive:
        ap = ("acc",)
        labels = {s: {"acc"} if rng.random() < 0.5 else set() for s in states}
    elif classes:
        ap = tuple(f"p{i}" for i in range(classes - 1)) if classes > 1 else ()
        options = [set()] + [{p} for p in ap]
        labels = {s: set(rng.choice(options)) for s in states}
    else:
        ap, labels = (), None
    init = Dist(dist())
    return make_automaton(f"random{seed}", ap, acts, states, trans, init, labels=labels,
                          labels_from_ea=classes == 0)


def random_dist(A: Automaton, rng: random.Random, max_support: int = 3) -> Dist:
    k = rng.randint(1, min(max_support, len(A.states)))
    targets = rng.sample(list(A.states), k)
    weights = [rng.randint(1, 6) for _ in targets]
    total = sum(weights)
    return Dist({t: Fraction(w, total) for t, w in zip(targets, weights)})


# --------------------------------------------------------------------------
# fixture corpus


@dataclass
class Fixture:
    name: str
    model: str
    mu: str
    nu: str
    expected: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    sync: tuple = ()
    components: tuple = ()  # component model texts, composed into ``model``
    extra: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def automaton(self) -> Automaton:
        return parse_model(self.model)


def exam1_model(eps1, eps2) -> str:
    e1, e2 = to_rational(eps1), to_rational(eps2)
    third = Fraction(1, 3)
    for name, p in (("2/3+eps1", 2 * third + e1), ("1/3-eps1", third - e1),
                    ("1/3-eps2", third - e2), ("2/3+eps2", 2 * third + e2)):
        if not 0 <= p <= 1:
            raise RejectedInput(f"{name} must lie in [0, 1]")

    def entry(s, p):
        return f"{s}:{p}" if p else None

    def lit(*xs):
        return ", ".join(x for x in xs if x)

    return f"""automaton exam1
actions a
option labels-from-ea
state q
state r1
state r2
state s1
state s2
state s3
state s4
state q'
state r'
state s1'
state s2'
init q:1
trans q a -> r1:1/2, r2:1/2
trans r1 a -> {lit(entry('s1', 2 * third + e1), entry('s2', third - e1))}
trans r2 a -> {lit(entry('s3', third - e2), entry('s4', 2 * third + e2))}
trans s1 a -> s1:1
trans s3 a -> s3:1
trans q' a -> r':1
trans r' a -> s1':1/2, s2':1/2
trans s1' a -> s1':1
"""


def exam1(eps1=0, eps2=0) -> Fixture:
    e1, e2 = to_rational(eps1), to_rational(eps2)
    exp = {"pbisim": "separated", "dist": "bisimilar" if e1 == e2 else "different"}
    return Fixture("exam1", exam1_model(e1, e2), "q:1", "q':1", exp,
                   notes="labels are enabled-action sets; q and q' sit in different state blocks")


SIM_COARSER = """automaton sim-coarser
ap circle box
actions a b
state s1
state s2
state t1
state t2
state s3 label circle
state s4 label box
init s1:1/2, s2:1/2
trans s1 a -> s3:1
trans s1 a -> s4:1
trans s2 a -> s3:1
trans s2 b -> s4:1
trans t1 a -> s3:1
trans t2 a -> s4:1
trans t2 b -> s4:1
trans t2 a -> s3:1
trans s3 a -> s3:1
trans s4 a -> s4:1
"""

TRACE_LATE_DERIVED = SIM_COARSER.replace("automaton sim-coarser", "automaton trace-late-derived") \
    .replace("ap circle box", "ap circle box cross") \
    .replace("state s4 label box\n", "state s4 label box\nstate x label cross\n") + \
    "trans s1 b -> x:1\ntrans t1 b -> x:1\ntrans x a -> x:1\n"

JAN_LATE = """automaton jan-late
actions a b c d
state s1
state s2
state s3
state t1
state t2
state t3
state s5
state s6
init s1:1/3, s2:1/3, s3:1/3
trans s1 a -> s5:1
trans s2 b -> s5:1
trans s2 a -> s6:1
trans s3 b -> s6:1
trans t1 a -> s6:1
trans t2 b -> s6:1
trans t2 a -> s5:1
trans t3 b -> s5:1
trans s5 c -> s5:1
trans s6 d -> s6:1
"""

TRACE_JAN = """automaton trace-jan
actions a b c
state s0
state s1
state s2
state s3
state t0
state t1
state t2
state t3
state t4
init s0:1
trans s0 a -> s1:1
trans s1 b -> s2:1
trans s1 c -> s3:1
trans t0 a -> t1:1
trans t0 a -> t2:1
trans t1 b -> t3:1
trans t2 c -> t4:1
"""

TRACE_LATE = """automaton trace-late
actions a b c d e
state s1
state s2
state t0
state s3
state s4
state s5
state s6
init s1:1/2, s2:1/2
trans s1 a -> s3:1
trans s1 b -> s4:1
trans s2 a -> s5:1
trans s2 b -> s6:1
trans t0 a -> s3:1/2, s5:1/2
trans t0 b -> s4:1/2, s6:1/2
trans s3 c -> s3:1
trans s4 d -> s4:1
trans s5 c -> s5:1
trans s6 e -> s6:1
"""

NON_COMP_LEFT = """automaton non-comp-left
actions a b c
state s0
state s1
state s2
state s3
state s4
state s5
state s6
init s0:1
trans s0 a -> s1:1/2, s2:1/2
trans s5 a -> s1:1
trans s6 a -> s2:1
trans s1 b -> s3:1
trans s2 c -> s4:1
"""

NON_COMP_RIGHT = """automaton non-comp-right
actions a b c
state r0
state r1
state r2
state r3
state r4
init r0:1
trans r0 a -> r1:1
trans r0 a -> r2:1
trans r1 b -> r3:1
trans r2 c -> r4:1
"""

SAMPLE_GRAPH = """vertices a b c d
edge a b
edge a c
edge a d
edge b c
"""


def non_comp_model() -> str:
    from .automaton import serialize_model

    A = parallel_compose(parse_model(NON_COMP_LEFT), parse_model(NON_COMP_RIGHT), ("a", "b", "c"))
    return serialize_model(A)


def corpus() -> dict:
    """Named fixtures. ``corpus()["exam1"]`` is a function of (eps1, eps2)."""
    from .certificate_texts import CERTIFICATES

    return {
        "exam1": exam1,
        "sim-coarser": Fixture(
            "sim-coarser", SIM_COARSER, "s1:1/2, s2:1/2", "t1:1/2, t2:1/2",
            {"plain": "bisimilar", "late": "refuted", "dagger": "refuted"},
            {"plain": CERTIFICATES["sim-coarser/plain"]},
            notes="labels: circle on s3, box on s4, others empty; s3 and s4 loop on a"),
        "trace-late-derived": Fixture(
            "trace-late-derived", TRACE_LATE_DERIVED, "s1:1/2, s2:1/2", "t1:1/2, t2:1/2",
            {"late": "bisimilar", "dagger": "refuted"},
            {"late": CERTIFICATES["trace-late-derived/late"]},
            extra={"dagger-set": ("a", "b")},
            notes="sim-coarser plus b-moves from s1 and t1 into a fresh cross-labelled loop state"),
        "jan-late": Fixture(
            "jan-late", JAN_LATE, "s1:1/3, s2:1/3, s3:1/3", "t1:1/3, t2:1/3, t3:1/3",
            {"dagger": "bisimilar", "late": "refuted", "trace": "different"},
            {"dagger": CERTIFICATES["jan-late/dagger"]},
            notes="all labels empty; s5 loops on c and s6 on d"),
        "trace-jan": Fixture(
            "trace-jan", TRACE_JAN, "s0:1", "t0:1",
            {"trace": "equal", "prio": "equal", "plain": "refuted", "dagger": "refuted"},
            notes="all labels empty"),
        "trace-late": Fixture(
            "trace-late", TRACE_LATE, "s1:1/2, s2:1/2", "t0:1",
            {"late": "bisimilar", "trace": "different"},
            {"late": CERTIFICATES["trace-late/late"]},
            notes="all labels empty"),
        "non-comp": Fixture(
            "non-comp", non_comp_model(), "s0|r0:1", "s5|r0:1/2, s6|r0:1/2",
            {"plain": "refuted", "distributed": "bisimilar", "components": "bisimilar"},
            {"distributed": CERTIFICATES["non-comp/distributed"]},
            sync=("a", "b", "c"), components=(NON_COMP_LEFT, NON_COMP_RIGHT),
            extra={"left-mu": "s0:1", "left-nu": "s5:1/2, s6:1/2"},
            notes="left component is deterministic; all labels empty"),
        "clique": Fixture(
            "clique", serialize_clique(SAMPLE_GRAPH), "s:1", "s:1",
            {"max-word": "3/18", "dd-sink": "1/192"}, extra={"graph": SAMPLE_GRAPH}),
    }


def serialize_clique(graph_text: str) -> str:
    from .automaton import serialize_model

    return serialize_model(gen_clique(parse_graph(graph_text)))
