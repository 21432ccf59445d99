"""Bounded refutation games for distribution bisimulations.

The attacker picks a side, an action tag and a vertex of the successor
polytope; the defender must answer from the other side. A counterexample
is a finite tree ending in observation mismatches. The defender search is
restricted (vertices, an observation-matching LP point, and a joint
two-level LP), so a returned tree carries an ``exact`` flag: exact trees
are genuine refutations, the others only show that the restricted search
failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .automaton import Automaton, Dist, ensure_extended
from .errors import NotEnabled, RejectedInput
from .lifting import (SuccessorPolytope, canonical_split, dagger_choices, dagger_step, dist_step_vertices,
                      distributed_assignments, distributed_step_vertices, plain_assignments)
from .numerics import ONE, ZERO, fmt, hull_member, lp_feasible

SEMANTICS = ("plain", "late", "dagger", "distributed")


def check_semantics(name: str) -> str:
    if name not in SEMANTICS:
        raise RejectedInput(f"unknown semantics {name!r}; expected one of {', '.join(SEMANTICS)}")
    return name


def game_automaton(A: Automaton, semantics: str) -> Automaton:
    """The automaton a semantics is played on: extended for plain and distributed."""
    check_semantics(semantics)
    return ensure_extended(A) if semantics in ("plain", "distributed") else A


def action_sets(actions: Iterable[str]):
    acts = tuple(actions)
    for r in range(1, len(acts) + 1):
        for combo in combinations(acts, r):
            yield frozenset(combo)


def set_literal(A: Automaton, acts: frozenset) -> str:
    return ",".join(a for a in A.actions if a in acts)


class Observer:
    """Linear observation functionals, each a set of states whose mass is compared."""

    def __init__(self, A: Automaton, semantics: str):
        self.A = A
        self.semantics = semantics
        classes = sorted({A.label(s) for s in A.states}, key=A.label_key)
        funcs: list[tuple[str, frozenset]] = []
        seen = set()
        if semantics == "dagger":
            if len(A.actions) > 16:
                raise RejectedInput("dagger semantics supports at most 16 actions")
            for acts in action_sets(A.actions):
                for C in classes:
                    members = frozenset(s for s in A.states if A.label(s) == C and A.enabled(s) & acts)
                    if members and members not in seen:
                        seen.add(members)
                        funcs.append((f"mass of label {_lab(A, C)} enabling {{{set_literal(A, acts)}}}", members))
        else:
            for C in classes:
                members = frozenset(s for s in A.states if A.label(s) == C)
                funcs.append((f"mass of label {_lab(A, C)}", members))
        if semantics == "late":
            eas = sorted({A.enabled(s) for s in A.states}, key=lambda e: (len(e), sorted(A.actions.index(a) for a in e)))
            for E in eas:
                members = frozenset(s for s in A.states if A.enabled(s) == E)
                funcs.append((f"mass enabling exactly {{{set_literal(A, E)}}}", members))
        self.funcs = tuple(funcs)

    def values(self, mu) -> tuple[Fraction, ...]:
        return tuple(sum((p for s, p in mu.items() if s in members), ZERO) for _, members in self.funcs)

    def first_difference(self, mu, nu):
        for (name, members) in self.funcs:
            x = sum((p for s, p in mu.items() if s in members), ZERO)
            y = sum((p for s, p in nu.items() if s in members), ZERO)
            if x != y:
                return name, x, y
        return None


def _lab(A: Automaton, C: frozenset) -> str:
    return "{" + ",".join(p for p in A.ap if p in C) + "}"


# --------------------------------------------------------------------------
# counterexample trees


@dataclass(frozen=True)
class Mismatch:
    mu: Dist
    nu: Dist
    what: str
    left: Fraction
    right: Fraction
    exact: bool = True


@dataclass(frozen=True)
class SplitNode:
    mu: Dist
    nu: Dist
    weight: Fraction
    part: tuple[Dist, Dist]
    child: object

    @property
    def exact(self) -> bool:
        return self.child.exact


@dataclass(frozen=True)
class AttackNode:
    mu: Dist
    nu: Dist
    side: int  # 0: the first distribution moves, 1: the second
    tag: object
    vertex: Dist
    reason: str
    responses: tuple = ()  # (defender successor, failing subtree)
    exact: bool = True


def render(A: Automaton, node, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(node, Mismatch):
        return [f"{pad}mismatch {node.what}: {fmt(node.left)} vs {fmt(node.right)} "
                f"at ({node.mu.literal()}) / ({node.nu.literal()})"]
    if isinstance(node, SplitNode):
        out = [f"{pad}split weight {fmt(node.weight)}: ({node.part[0].literal()}) / ({node.part[1].literal()})"]
        return out + render(A, node.child, indent + 1)
    tag = node.tag if isinstance(node.tag, str) else "{" + set_literal(A, node.tag) + "}"
    mover = node.mu if node.side == 0 else node.nu
    out = [f"{pad}attack side {node.side} ({mover.literal()}) -{tag}-> ({node.vertex.literal()}) "
           f"[{node.reason}; {'exact' if node.exact else 'heuristic'}]"]
    for y, child in node.responses:
        out.append(f"{pad}  response ({y.literal()}):")
        out += render(A, child, indent + 2)
    return out


@dataclass
class Refutation:
    semantics: str
    refuted: bool
    depth: int | None
    tree: object = None
    exact: bool = False
    bound: int = 0

    @property
    def status(self) -> str:
        if not self.refuted:
            return f"no-violation-up-to-{self.bound}"
        return "refuted" if self.exact else "refuted-heuristic"


# --------------------------------------------------------------------------
# the game


def _key(d: Dist):
    return tuple(d.items())


class Game:
    def __init__(self, A: Automaton, semantics: str, sync: Iterable[str] = ()):
        self.semantics = check_semantics(semantics)
        self.A = game_automaton(A, semantics)
        self.sync = frozenset(sync)
        if semantics == "distributed" and not self.sync <= set(self.A.actions):
            raise RejectedInput("sync set outside the action set")
        self.obs = Observer(self.A, semantics)
        self.memo: dict = {}

    # moves -------------------------------------------------------------

    def tags(self, mu: Dist, nu: Dist):
        A = self.A
        if self.semantics == "dagger":
            union = sorted(set(mu.support) | set(nu.support))
            seen = set()
            for acts in action_sets(A.actions):
                sig = tuple(A.enabled(s) & acts for s in union)
                if any(sig) and sig not in seen:
                    seen.add(sig)
                    yield acts
        elif self.semantics == "late":
            common = None
            for s in mu:
                common = A.enabled(s) if common is None else common & A.enabled(s)
            yield from (a for a in A.actions if a in (common or ()))
        else:
            yield from A.actions

    def polytope(self, mu: Dist, tag) -> SuccessorPolytope | None:
        A = self.A
        try:
            if self.semantics == "dagger":
                return dagger_step(A, mu, tag)
            if self.semantics == "distributed":
                return distributed_step_vertices(A, mu, tag, self.sync)
            return dist_step_vertices(A, mu, tag)
        except NotEnabled:
            return None

    def assignments(self, states, tag):
        """Per-state raw targets for every choice function of ``states``."""
        A = self.A
        if self.semantics == "distributed":
            return [t for _, t in distributed_assignments(A, states, tag, self.sync)[1]]
        if self.semantics == "dagger":
            opts = {s: dagger_choices(A, s, tag) for s in states if A.enabled(s) & tag}
        else:
            opts = {s: A.choices(s, tag) for s in states}
            if any(not v for v in opts.values()):
                return []
        return plain_assignments(opts)

    def raw_options(self, s: str, tag):
        if self.semantics == "dagger":
            return dagger_choices(self.A, s, tag) if self.A.enabled(s) & tag else ()
        return self.A.choices(s, tag)

    # recursion ---------------------------------------------------------

    def violation(self, mu: Dist, nu: Dist, k: int):
        if mu == nu:
            return None
        key = (_key(mu), _key(nu), k)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = None  # provisional, guards against re-entry
        res = self._violation(mu, nu, k)
        self.memo[key] = res
        return res

    def _violation(self, mu, nu, k):
        diff = self.obs.first_difference(mu, nu)
        if diff is not None:
            return Mismatch(mu, nu, *diff)
        if self.semantics == "late":
            sm, sn = canonical_split(self.A, mu), canonical_split(self.A, nu)
            if len(sm.components) > 1:
                # class masses agree (checked above), so the partner split is forced
                for (w, part), sig in zip(sm.components, sm.signatures):
                    other = dict(zip(sn.signatures, sn.components))[sig][1]
                    child = self.violation(part, other, k)
                    if child is not None:
                        return SplitNode(mu, nu, w, (part, other), child)
                return None
        if k == 0:
            return None
        for side, (att, dfn) in enumerate(((mu, nu), (nu, mu))):
            for tag in self.tags(att, dfn):
                P = self.polytope(att, tag)
                if P is None:
                    continue
                Q = self.polytope(dfn, tag)
                for x in P.vertices:
                    if Q is None:
                        return AttackNode(mu, nu, side, tag, x, "defender cannot move")
                    fail = self.defend(x, dfn, Q, tag, k - 1)
                    if fail is not None:
                        reason, responses, exact = fail
                        return AttackNode(mu, nu, side, tag, x, reason, responses, exact)
        return None

    def defend(self, x: Dist, source: Dist, Q: SuccessorPolytope, tag, j: int):
        """None if the defender survives, else (reason, responses, exact)."""
        Y = Q.vertices
        if x in Y:
            return None
        support = sorted(set(x.support).union(*(y.support for y in Y)))
        if len(Y) > 1 and hull_member(x.vector(support), [y.vector(support) for y in Y]).accepted:
            return None
        lam = self._match_lp(x, Y)
        if lam is None:
            return "no defender successor matches the observations", (), True
        if j == 0:
            return None
        tried = []
        for y in Y:
            child = self.violation(x, y, j)
            if child is None:
                return None
            tried.append((y, child))
        ystar = Dist.mix((w, y) for w, y in zip(lam, Y) if w)
        if ystar not in Y:
            child = self.violation(x, ystar, j)
            if child is None:
                return None
            tried.append((ystar, child))
        if len(Y) == 1:
            return "single defender successor fails", tuple(tried), tried[0][1].exact
        if self.semantics != "late" and self._joint_lp_infeasible(x, Y, tag):
            return "no defender successor survives two levels (joint LP)", tuple(tried), True
        return "every tried defender successor fails", tuple(tried), False

    def _match_lp(self, x: Dist, Y):
        target = self.obs.values(x)
        rows = [self.obs.values(y) for y in Y]
        n = len(Y)
        eq = [([r[i] for r in rows], target[i]) for i in range(len(target))]
        eq.append(([ONE] * n, ONE))
        return lp_feasible(n, eq=eq)

    def _norm(self, d: Dist, tag) -> Fraction:
        if self.semantics != "dagger":
            return ONE
        return sum((p for s, p in d.items() if self.A.enabled(s) & tag), ZERO)

    def _joint_lp_infeasible(self, x: Dist, Y, tag) -> bool:
        """Can some point of hull(Y) match ``x`` for one more round of local checks?

        Variables: hull coefficients over ``Y``; for each next attack from
        ``x`` a per-state split of the defender's mass over its raw
        choices; for each next attack from the defender (a choice function
        over the union support) hull coefficients over ``x``'s successor
        vertices. Every constraint is necessary for survival, so an
        infeasible system is a proof of refutation.
        """
        obs = self.obs
        nobs = len(obs.funcs)
        U = sorted(set().union(*(y.support for y in Y)))
        cols: list = []  # variable descriptors, index = position
        lam = list(range(len(Y)))
        cols.extend(("lam", i) for i in lam)
        eq: list = []

        def ycoeffs(t):
            return {i: Y[i][t] for i in lam if Y[i][t]}

        # level-0 observation match and normalisation
        xo = obs.values(x)
        yo = [obs.values(y) for y in Y]
        base_eq = [({i: yo[i][r] for i in lam}, xo[r]) for r in range(nobs)]
        base_eq.append(({i: ONE for i in lam}, ONE))
        eq.extend(base_eq)
        for tag2 in self._next_tags(x, Y):
            P = self.polytope(x, tag2)
            if P is None:
                continue
            norm = self._norm(x, tag2)
            # attacks from x: per-state w variables
            for xp in P.vertices:
                target = obs.values(xp)
                obs_rows = [dict() for _ in range(nobs)]
                for t in U:
                    opts = self.raw_options(t, tag2)
                    if self.semantics == "dagger" and not opts:
                        continue
                    if not opts:
                        return False  # cannot model a stuck defender state; stay conservative
                    row = {}
                    for c, mu_c in enumerate(opts):
                        v = len(cols)
                        cols.append(("w", t, c))
                        row[v] = ONE
                        oc = obs.values(mu_c)
                        for r in range(nobs):
                            if oc[r]:
                                obs_rows[r][v] = oc[r]
                    # sum_c w_tc = y(t)
                    for i, val in ycoeffs(t).items():
                        row[i] = row.get(i, ZERO) - val
                    eq.append((row, ZERO))
                for r in range(nobs):
                    eq.append((obs_rows[r], norm * target[r]))
            # attacks from the defender: choice functions over U
            assigns = self.assignments(U, tag2)
            for assign in assigns:
                zvars = []
                for xv in P.vertices:
                    zvars.append(len(cols))
                    cols.append(("z", xv))
                eq.append(({v: ONE for v in zvars}, ONE))
                for r in range(nobs):
                    row = {}
                    for v, xv in zip(zvars, P.vertices):
                        o = obs.values(xv)[r]
                        if o:
                            row[v] = o * norm
                    for t, target_t in assign.items():
                        o = obs.values(target_t)[r]
                        if o:
                            for i, val in ycoeffs(t).items():
                                row[i] = row.get(i, ZERO) - val * o
                    eq.append((row, ZERO))
        n = len(cols)
        dense = [([row.get(i, ZERO) for i in range(n)], rhs) for row, rhs in eq]
        return lp_feasible(n, eq=dense) is None

    def _next_tags(self, x: Dist, Y):
        if self.semantics == "dagger":
            union = sorted(set(x.support).union(*(y.support for y in Y)))
            seen = set()
            for acts in action_sets(self.A.actions):
                sig = tuple(self.A.enabled(s) & acts for s in union)
                if any(sig) and sig not in seen:
                    seen.add(sig)
                    yield acts
        else:
            yield from self.A.actions


def dist_bisim_refute(A: Automaton, mu, nu, semantics: str, depth: int, sync: Iterable[str] = ()) -> Refutation:
    """Search for a counterexample of depth at most ``depth``, shallowest first."""
    if depth < 0:
        raise RejectedInput("depth must be nonnegative")
    game = Game(A, semantics, sync)
    mu, nu = game.A.dist(mu if not isinstance(mu, Dist) else dict(mu.items())), \
        game.A.dist(nu if not isinstance(nu, Dist) else dict(nu.items()))
    for d in range(depth + 1):
        node = game.violation(mu, nu, d)
        if node is not None:
            return Refutation(semantics, True, d, node, node.exact, depth)
    return Refutation(semantics, False, None, None, False, depth)
