"""Distribution and state bisimulation metrics.

``D_f`` is the sup/inf fixed point over lifted transitions; on automata that
are deterministic after extension it is a maximum over words of discounted
label distances. ``d_f`` is the state-based metric with Kantorovich lifting.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .automaton import Automaton, Dist, class_masses, classify, ensure_extended
from .bisim import _det_steps
from .errors import RejectedInput
from .lifting import dist_step_vertices, node_cap
from .numerics import ONE, ZERO, Subspace, hull_member, lp_solve, span_insert, to_rational, transport_cost

STATUSES = ("exact-fixpoint", "within-tol", "iteration-capped")


def _check_gamma(gamma) -> Fraction:
    gamma = to_rational(gamma)
    if not 0 < gamma <= 1:
        raise RejectedInput("gamma must lie in (0, 1]")
    return gamma


def d_AP(A: Automaton, mu, nu) -> Fraction:
    """Half the L1 distance between label-class mass vectors."""
    m, n = class_masses(A, mu), class_masses(A, nu)
    return sum((abs(m.get(c, ZERO) - n.get(c, ZERO)) for c in set(m) | set(n)), ZERO) / 2


def _as_dist(A: Automaton, d) -> Dist:
    return d if isinstance(d, Dist) else A.dist(d)


# --------------------------------------------------------------------------
# D_f on deterministic automata


@dataclass(frozen=True)
class DfResult:
    value: Fraction  # certified lower bound, equal to D_f when status is exact-fixpoint
    upper: Fraction
    status: str
    depth: int
    word: tuple[str, ...] | None


def _det_successor(steps, mu: Dist, a: str) -> Dist:
    return Dist.mix((p, steps[a][s]) for s, p in mu.items())


def _observable_span(B: Automaton, steps) -> Subspace:
    """Span of ``M_w c`` over words ``w`` and label-class indicators ``c``.

    A difference vector orthogonal to this span has zero label gap after
    every word.
    """
    space = Subspace(len(B.states))
    queue = deque()
    for lab in dict.fromkeys(B.labels):
        queue.append(tuple(ONE if B.label(s) == lab else ZERO for s in B.states))
    while queue:
        g = queue.popleft()
        space, grew = span_insert(space, g)
        if not grew:
            continue
        for a in B.actions:
            row = steps[a]
            queue.append(tuple(sum((p * g[B.index[t]] for t, p in row[s].items()), ZERO) for s in B.states))
    return space


def Df_det(A: Automaton, mu, nu, gamma, tol, max_depth: int = 10_000) -> DfResult:
    """Exact (or tolerance-bounded) ``D_f`` when every lifted step is unique.

    Breadth-first over words. A node is not expanded when its pair was met
    before, when its difference is invisible after every word, or when
    half its L1 difference (which bounds every later label gap) cannot
    beat the running maximum after discounting.
    """
    gamma, tol = _check_gamma(gamma), to_rational(tol)
    if tol <= 0:
        raise RejectedInput("tol must be positive")
    B = ensure_extended(A)
    try:
        steps = _det_steps(B)
    except RejectedInput:
        raise RejectedInput("automaton is nondeterministic after extension: use Df_bounds") from None
    mu, nu = _as_dist(B, mu), _as_dist(B, nu)
    rows = _observable_span(B, steps).rows
    cap = node_cap()
    best, best_word = ZERO, None
    seen = set()
    frontier = [((), mu, nu)]
    weight = ONE
    depth = 0
    nodes = 0
    while True:
        for word, m, n in frontier:
            val = weight * d_AP(B, m, n)
            if val > best:
                best, best_word = val, word
        nxt = []
        fresh = set()
        for word, m, n in frontier:
            key = (m, n)
            if m == n or key in seen:
                continue
            seen.add(key)
            diff = [m[s] - n[s] for s in B.states]
            if weight * gamma * sum(map(abs, diff), ZERO) / 2 <= best:
                continue
            if all(sum((x * y for x, y in zip(diff, r)), ZERO) == 0 for r in rows):
                continue
            for a in B.actions:
                m2, n2 = _det_successor(steps, m, a), _det_successor(steps, n, a)
                k2 = (m2, n2)
                if m2 != n2 and k2 not in seen and k2 not in fresh:
                    fresh.add(k2)
                    nxt.append((word + (a,), m2, n2))
        nodes += len(nxt)
        tail = weight * gamma  # bound on every value from the next level on
        if not nxt or tail <= best:
            return DfResult(best, best, "exact-fixpoint", depth, best_word)
        if gamma < 1 and tail <= tol:
            return DfResult(best, max(best, tail), "within-tol", depth, best_word)
        if depth >= max_depth or nodes > cap:
            return DfResult(best, max(best, tail), "iteration-capped", depth, best_word)
        frontier = nxt
        weight = tail
        depth += 1


# --------------------------------------------------------------------------
# brackets on general automata


@dataclass(frozen=True)
class Bound:
    lower: Fraction
    upper: Fraction
    lower_witness: object = None
    upper_witness: tuple = ()
    heuristic: bool = False


def Df_bounds(A: Automaton, mu, nu, gamma, depth: int, tol=Fraction(1, 10**6)) -> Bound:
    """Lower bound from the formula search, upper bound from a truncated game."""
    from .logic import distance_lb

    gamma = _check_gamma(gamma)
    if depth < 0:
        raise RejectedInput("depth must be nonnegative")
    B = ensure_extended(A)
    mu, nu = _as_dist(B, mu), _as_dist(B, nu)
    if mu == nu:
        return Bound(ZERO, ZERO)
    lower, formula = distance_lb(A, mu, nu, gamma, depth)
    if classify(B).deterministic:
        r = Df_det(A, mu, nu, gamma, tol)
        return Bound(lower, r.upper, formula, r.word or (), False)
    memo: dict = {}

    def upper(m: Dist, n: Dist, k: int) -> Fraction:
        if m == n:
            return ZERO
        key = (m, n, k)
        if key in memo:
            return memo[key]
        val = d_AP(B, m, n)
        if k == 0:
            val = max(val, gamma)
        else:
            for a in B.actions:
                for att, dfn in ((m, n), (n, m)):
                    P = dist_step_vertices(B, att, a).vertices
                    Q = dist_step_vertices(B, dfn, a).vertices
                    for x in P:
                        if val == 1:
                            break
                        if x in Q:
                            continue
                        support = sorted(set(x.support).union(*(q.support for q in Q)))
                        if len(Q) > 1 and hull_member(x.vector(support), [q.vector(support) for q in Q]).accepted:
                            continue
                        best = min(gamma * upper(x, y, k - 1) for y in Q)
                        val = max(val, best)
        memo[key] = val
        return val

    return Bound(lower, max(lower, upper(mu, nu, depth)), formula, (), True)


# --------------------------------------------------------------------------
# state metric


@dataclass
class MetricTable:
    states: tuple[str, ...]
    values: dict = field(default_factory=dict)
    iterations: int = 0
    status: str = "iteration-capped"
    gap: Fraction = ONE  # d_f lies in [value, value + gap]

    def get(self, s: str, t: str) -> Fraction:
        if s == t:
            return ZERO
        return self.values.get((s, t), self.values.get((t, s), ZERO))

    def matrix(self):
        return [[self.get(s, t) for t in self.states] for s in self.states]


def _inf_lift(mu: Dist, options, d) -> Fraction:
    """``inf`` over the hull of ``options`` of the Kantorovich distance to ``mu``."""
    if len(options) == 1:
        nu = options[0]
        if len(mu) == 1:
            (u,) = mu.support
            return sum((p * d(u, v) for v, p in nu.items()), ZERO)
        if len(nu) == 1:
            (v,) = nu.support
            return sum((p * d(u, v) for u, p in mu.items()), ZERO)
        rows, cols = list(mu.support), list(nu.support)
        return transport_cost([mu[u] for u in rows], [nu[v] for v in cols],
                              [[d(u, v) for v in cols] for u in rows])[0]
    if len(mu) == 1:
        (u,) = mu.support
        return min(sum((p * d(u, v) for v, p in nu.items()), ZERO) for nu in options)
    U = list(mu.support)
    V = sorted(set().union(*(nu.support for nu in options)))
    nl = len(U) * len(V)
    n = nl + len(options)
    eq = []
    for i, u in enumerate(U):
        row = [ZERO] * n
        for j in range(len(V)):
            row[i * len(V) + j] = ONE
        eq.append((row, mu[u]))
    for j, v in enumerate(V):
        row = [ZERO] * n
        for i in range(len(U)):
            row[i * len(V) + j] = ONE
        for c, nu in enumerate(options):
            row[nl + c] = -nu[v]
        eq.append((row, ZERO))
    eq.append(([ZERO] * nl + [ONE] * len(options), ONE))
    cost = [d(u, v) for u in U for v in V] + [ZERO] * len(options)
    res = lp_solve(cost, eq=eq, sense="min")
    assert res.optimal, res
    return res.value


def state_metric_df(A: Automaton, gamma, tol, max_iter: int = 1000) -> MetricTable:
    """Kleene iteration of the state functional from the zero metric."""
    gamma, tol = _check_gamma(gamma), to_rational(tol)
    if tol <= 0:
        raise RejectedInput("tol must be positive")
    states = A.states
    pairs = [(s, t) for i, s in enumerate(states) for t in states[i + 1:]]
    cur = {p: ZERO for p in pairs}
    table = MetricTable(states, dict(cur), 0, "iteration-capped", ONE)

    def term(s, t, dget):
        val = ZERO if A.label(s) == A.label(t) else ONE
        for a in A.actions:
            if val == 1:
                break
            for x, y in ((s, t), (t, s)):
                mine, theirs = A.choices(x, a), A.choices(y, a)
                if not mine:
                    continue
                if not theirs:
                    return ONE
                for mu in mine:
                    val = max(val, gamma * _inf_lift(mu, theirs, dget))
        return min(val, ONE)

    bound = ONE
    for n in range(1, max_iter + 1):
        def dget(u, v, _cur=cur):
            return ZERO if u == v else _cur.get((u, v), _cur.get((v, u), ZERO))

        new = {p: term(p[0], p[1], dget) for p in pairs}
        bound *= gamma
        if new == cur:
            return MetricTable(states, new, n, "exact-fixpoint", ZERO)
        cur = new
        if gamma < 1 and bound <= tol:
            return MetricTable(states, cur, n, "within-tol", bound)
    table.values, table.iterations = cur, max_iter
    table.gap = bound if gamma < 1 else ONE
    return table


def lift_metric(table: MetricTable, mu, nu) -> Fraction:
    """Kantorovich lifting of a state table to distributions."""
    mu = dict(mu.items())
    nu = dict(nu.items())
    for s in list(mu) + list(nu):
        if s not in table.states:
            raise RejectedInput(f"unknown state {s}")
    rows, cols = sorted(mu), sorted(nu)
    return transport_cost([mu[u] for u in rows], [nu[v] for v in cols],
                          [[table.get(u, v) for v in cols] for u in rows])[0]


@dataclass(frozen=True)
class Comparison:
    mu: Dist
    nu: Dist
    distribution_metric: Fraction  # certified lower bound of D_f
    distribution_status: str
    state_metric: Fraction  # lifted d_f (lower bound; exact when the table is)
    state_gap: Fraction
    holds: bool


def compare_metrics(A: Automaton, pairs: Iterable, gamma, tol) -> list[Comparison]:
    """Check ``D_f <= lifted d_f`` pair by pair on the extended automaton."""
    gamma = _check_gamma(gamma)
    B = ensure_extended(A)
    table = state_metric_df(B, gamma, tol)
    det = classify(B).deterministic
    out = []
    for mu, nu in pairs:
        mu, nu = _as_dist(B, mu), _as_dist(B, nu)
        if det:
            r = Df_det(B, mu, nu, gamma, tol)
            lo, status = r.value, r.status
        else:
            b = Df_bounds(B, mu, nu, gamma, 3)
            lo, status = b.lower, "lower-bound"
        lifted = lift_metric(table, mu, nu)
        out.append(Comparison(mu, nu, lo, status, lifted, table.gap, lo <= lifted + table.gap))
    return out
