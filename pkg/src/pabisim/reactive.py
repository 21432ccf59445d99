"""Language equivalence and word metrics for reactive automata.

A reactive automaton has exactly one transition per (state, action) and
labels in {empty, AP}; its accepting set is ``F = {s | L(s) = AP}``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automaton import Automaton, Dist, classify
from .errors import RejectedInput
from .numerics import ONE, ZERO, Subspace, forward_closure, to_rational


@dataclass(frozen=True)
class ReactiveMatrixForm:
    states: tuple[str, ...]
    actions: tuple[str, ...]
    matrices: dict  # action -> tuple of rows
    accepting: tuple[Fraction, ...]
    initial: tuple[Fraction, ...]

    def step(self, a: str, v):
        m = self.matrices[a]
        n = len(self.states)
        out = [ZERO] * n
        for i, x in enumerate(v):
            if x:
                row = m[i]
                for j in range(n):
                    if row[j]:
                        out[j] += x * row[j]
        return tuple(out)

    def accept(self, v) -> Fraction:
        return sum((x * f for x, f in zip(v, self.accepting)), ZERO)

    def vector(self, mu: Dist):
        return tuple(mu[s] for s in self.states)

    def word_value(self, word, v=None) -> Fraction:
        v = self.initial if v is None else v
        for a in word:
            v = self.step(a, v)
        return self.accept(v)

    def coaccessible(self) -> tuple[bool, ...]:
        """States from which some accepting state is reachable."""
        n = len(self.states)
        good = [bool(f) for f in self.accepting]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if not good[i] and any(m[i][j] and good[j] for m in self.matrices.values() for j in range(n)):
                    good[i] = changed = True
        return tuple(good)


def to_matrix_form(A: Automaton) -> ReactiveMatrixForm:
    rep = classify(A)
    if not rep.reactive:
        if not rep.input_enabled:
            why = "not input-enabled"
        elif not rep.deterministic:
            why = "not deterministic"
        else:
            why = "a label is neither empty nor AP"
        raise RejectedInput(f"automaton is not reactive: {why}")
    idx = A.index
    n = len(A.states)
    mats = {}
    for a in A.actions:
        rows = []
        for s in A.states:
            (mu,) = A.choices(s, a)
            row = [ZERO] * n
            for t, p in mu.items():
                row[idx[t]] = p
            rows.append(tuple(row))
        mats[a] = tuple(rows)
    full = frozenset(A.ap)
    acc = tuple(ONE if A.label(s) == full else ZERO for s in A.states)
    return ReactiveMatrixForm(A.states, A.actions, mats, acc, A.initial.vector(A.states))


@dataclass(frozen=True)
class EquivResult:
    equivalent: bool
    word: tuple[str, ...] | None
    basis: Subspace


def _stacked_closure(f1: ReactiveMatrixForm, f2: ReactiveMatrixForm, v1, v2) -> EquivResult:
    n1 = len(f1.states)

    def step(a, v):
        return f1.step(a, v[:n1]) + f2.step(a, v[n1:])

    def detect(v):
        # the second block carries the negated vector, so equal values cancel
        return f1.accept(v[:n1]) + f2.accept(v[n1:]) != 0

    start = tuple(v1) + tuple(-x for x in v2)
    space, word, _ = forward_closure(start, step, f1.actions, detect, limit=n1 + len(f2.states))
    return EquivResult(word is None, word, space)


def rabin_equiv(A1: Automaton, A2: Automaton) -> EquivResult:
    """Decide ``A1(w) = A2(w)`` for all words by forward closure."""
    if set(A1.actions) != set(A2.actions):
        raise RejectedInput("action sets differ")
    f1, f2 = to_matrix_form(A1), to_matrix_form(A2)
    f2 = ReactiveMatrixForm(f2.states, f1.actions, f2.matrices, f2.accepting, f2.initial)
    return _stacked_closure(f1, f2, f1.initial, f2.initial)


def doyen_bisim(A: Automaton, mu: Dist, nu: Dist) -> EquivResult:
    """Distribution bisimilarity of ``mu`` and ``nu`` inside one reactive automaton."""
    f = to_matrix_form(A)

    def detect(v):
        return f.accept(v) != 0

    start = tuple(x - y for x, y in zip(f.vector(mu), f.vector(nu)))
    space, word, _ = forward_closure(start, f.step, f.actions, detect, limit=len(f.states))
    return EquivResult(word is None, word, space)


# --------------------------------------------------------------------------
# word searches


@dataclass(frozen=True)
class DdResult:
    value: Fraction
    status: str  # exact | within-tol | depth-capped
    word: tuple[str, ...] | None
    depth: int


def equivalence_metric_Dd(A1: Automaton, A2: Automaton, gamma, tol, max_depth: int = 64) -> DdResult:
    """max over words of ``gamma^|w| * |A1(w) - A2(w)|`` by pruned breadth-first search.

    A node is pruned when even moving every co-accessible unit of mass
    into acceptance could not beat the running maximum. A vector pair met
    again at a greater depth is pruned too, since its subtree can only
    repeat values with a smaller discount.
    """
    gamma, tol = to_rational(gamma), to_rational(tol)
    if not 0 < gamma <= 1:
        raise RejectedInput("gamma must lie in (0, 1]")
    if set(A1.actions) != set(A2.actions):
        raise RejectedInput("action sets differ")
    f1, f2 = to_matrix_form(A1), to_matrix_form(A2)
    co1, co2 = f1.coaccessible(), f2.coaccessible()

    def ceiling(v1, v2):
        return max(sum((x for x, c in zip(v1, co1) if c), ZERO), sum((x for x, c in zip(v2, co2) if c), ZERO))

    best, best_word = ZERO, ()
    seen = set()
    frontier = [((), f1.initial, f2.initial)]
    depth = 0
    weight = ONE
    while frontier:
        nxt = []
        for word, v1, v2 in frontier:
            val = weight * abs(f1.accept(v1) - f2.accept(v2))
            if val > best:
                best, best_word = val, word
        for word, v1, v2 in frontier:
            if (v1, v2) in seen:
                continue
            seen.add((v1, v2))
            if weight * gamma * ceiling(v1, v2) <= best:
                continue
            for a in f1.actions:
                nxt.append((word + (a,), f1.step(a, v1), f2.step(a, v2)))
        if not nxt:
            return DdResult(best, "exact", best_word if best else None, depth)
        if depth >= max_depth:
            return DdResult(best, "depth-capped", best_word if best else None, depth)
        depth += 1
        weight *= gamma
        if gamma < 1 and weight <= tol:
            # every later term is at most weight <= tol
            tail = max(weight * ceiling(v1, v2) for _, v1, v2 in nxt)
            if tail <= best + tol:
                for word, v1, v2 in nxt:
                    val = weight * abs(f1.accept(v1) - f2.accept(v2))
                    if val > best:
                        best, best_word = val, word
                return DdResult(best, "within-tol", best_word if best else None, depth)
        frontier = nxt
    return DdResult(best, "exact", best_word if best else None, depth)


def eps_empty_search(A: Automaton, eps, max_len: int) -> tuple[str, ...] | None:
    """Shortest word with acceptance probability strictly above ``eps``."""
    eps = to_rational(eps)
    if not 0 < eps < 1:
        raise RejectedInput("epsilon must lie in (0, 1)")
    f = to_matrix_form(A)
    co = f.coaccessible()
    seen = set()
    queue = deque([((), f.initial)])
    while queue:
        word, v = queue.popleft()
        if f.accept(v) > eps:
            return word
        if len(word) >= max_len or v in seen:
            continue
        seen.add(v)
        if sum((x for x, c in zip(v, co) if c), ZERO) <= eps:
            continue
        for a in f.actions:
            queue.append((word + (a,), f.step(a, v)))
    return None
