"""Word probabilities under schedulers and bounded trace equivalences.

A scheduler picks one transition of the current state after every
history; a state without transitions halts. ``Pr(w)`` is the probability
that the produced trace starts with ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable

from .automaton import Automaton, Dist
from .errors import CapExceeded, RejectedInput
from .lifting import node_cap
from .numerics import ONE, ZERO, hull_member


def _dist(A: Automaton, mu) -> Dist:
    return mu if isinstance(mu, Dist) else A.dist(mu)


def _check_word(A: Automaton, word) -> tuple[str, ...]:
    word = tuple(word)
    for a in word:
        if a not in A.actions:
            raise RejectedInput(f"unknown action {a}")
    return word


def _backward(A: Automaton, a: str, v: dict, pick) -> dict:
    out = {}
    for s in A.states:
        vals = [sum((p * v[t] for t, p in c.items()), ZERO) for c in A.choices(s, a)]
        out[s] = pick(vals) if vals else ZERO
    return out


def _terminal(A: Automaton, target) -> dict:
    if target is None:
        return {s: ONE for s in A.states}
    target = set(target)
    return {s: ONE if s in target else ZERO for s in A.states}


def _word_prob(A, mu, word, target, pick) -> Fraction:
    mu = _dist(A, mu)
    word = _check_word(A, word)
    v = _terminal(A, target)
    for a in reversed(word):
        v = _backward(A, a, v, pick)
    return sum((p * v[s] for s, p in mu.items()), ZERO)


def max_word_prob(A: Automaton, mu, word, target: Iterable[str] | None = None) -> Fraction:
    """Largest probability, over schedulers, of performing ``word`` from ``mu``.

    With ``target`` the run must also end in one of the given states.
    """
    return _word_prob(A, mu, word, target, max)


def best_word(A: Automaton, mu, maxlen: int, target: Iterable[str] | None = None):
    """Word of length <= maxlen maximizing ``max_word_prob``; ties go to the
    shorter word, then to action order. Returns ``(value, word)``."""
    mu = _dist(A, mu)
    level = {(): _terminal(A, target)}
    best, arg = sum((p * level[()][s] for s, p in mu.items()), ZERO), ()
    for n in range(1, maxlen + 1):
        nxt = {}
        for word, v in level.items():
            for a in A.actions:
                nxt[(a,) + word] = _backward(A, a, v, max)
        for word in sorted(nxt, key=lambda w: [A.actions.index(a) for a in w]):
            val = sum((p * nxt[word][s] for s, p in mu.items()), ZERO)
            if val > best:
                best, arg = val, word
        level = nxt
    return best, arg


@dataclass(frozen=True)
class PrioResult:
    equal: bool
    word: tuple[str, ...] | None
    left: Fraction | None = None
    right: Fraction | None = None


def prio_equiv_bounded(A: Automaton, mu, nu, maxlen: int) -> PrioResult:
    """Compare the optimal word probabilities of both sides for every word up to ``maxlen``."""
    if maxlen < 0:
        raise RejectedInput("maxlen must be nonnegative")
    mu, nu = _dist(A, mu), _dist(A, nu)
    level = [()]
    for n in range(1, maxlen + 1):
        nxt = []
        for word in level:
            for a in A.actions:
                w = word + (a,)
                left, right = max_word_prob(A, mu, w), max_word_prob(A, nu, w)
                if left != right:
                    return PrioResult(False, w, left, right)
                if left:
                    nxt.append(w)  # a zero word stays zero when extended
        level = nxt
    return PrioResult(True, None)


# --------------------------------------------------------------------------
# deterministic schedulers and trace distributions


@dataclass(frozen=True)
class SchedulerTree:
    """One transition (action, distribution) at the root and a subtree per successor."""

    state: str
    action: str | None = None
    target: Dist | None = None
    children: tuple = ()  # (successor, SchedulerTree)

    def vector(self) -> dict[tuple[str, ...], Fraction]:
        if self.action is None:
            return {}
        out = {(self.action,): ONE}
        for t, sub in self.children:
            p = self.target[t]
            for w, q in sub.vector().items():
                key = (self.action,) + w
                out[key] = out.get(key, ZERO) + p * q
        return out


def _transitions(A: Automaton, s: str):
    return [(a, mu) for a in A.actions for mu in A.choices(s, a)]


def scheduler_count(A: Automaton, mu, k: int) -> int:
    """Number of depth-``k`` deterministic schedulers from ``mu``, computed analytically."""
    mu = _dist(A, mu)
    memo = {}

    def count(s, d):
        if (s, d) not in memo:
            trs = _transitions(A, s)
            if d == 0 or not trs:
                memo[(s, d)] = 1
            else:
                total = 0
                for _, nu in trs:
                    n = 1
                    for t in nu.support:
                        n *= count(t, d - 1)
                    total += n
                memo[(s, d)] = total
        return memo[(s, d)]

    n = 1
    for s in mu.support:
        n *= count(s, k)
    return n


def enumerate_schedulers(A: Automaton, s: str, k: int):
    """All depth-``k`` deterministic scheduler trees rooted at state ``s``."""
    trs = _transitions(A, s)
    if k == 0 or not trs:
        yield SchedulerTree(s)
        return
    for a, nu in trs:
        subs = [list(enumerate_schedulers(A, t, k - 1)) for t in nu.support]
        for combo in product(*subs):
            yield SchedulerTree(s, a, nu, tuple(zip(nu.support, combo)))


def _freeze(v: dict):
    return tuple(sorted(v.items()))


def trace_vectors(A: Automaton, mu, k: int) -> list[dict]:
    """Distinct length-<=k prefix-probability vectors of all deterministic schedulers."""
    mu = _dist(A, mu)
    cap = node_cap()
    memo: dict = {}
    made = [0]

    def vecs(s, d):
        if (s, d) in memo:
            return memo[(s, d)]
        trs = _transitions(A, s)
        if d == 0 or not trs:
            out = [{}]
        else:
            seen, out = set(), []
            for a, nu in trs:
                for combo in product(*(vecs(t, d - 1) for t in nu.support)):
                    made[0] += 1
                    if made[0] > cap:
                        raise CapExceeded(f"scheduler enumeration exceeded {cap} nodes "
                                          f"(state {s}, depth {d}, {len(out)} vectors so far)")
                    v = {(a,): ONE}
                    for t, sub in zip(nu.support, combo):
                        for w, q in sub.items():
                            v[(a,) + w] = v.get((a,) + w, ZERO) + nu[t] * q
                    key = _freeze(v)
                    if key not in seen:
                        seen.add(key)
                        out.append(v)
        memo[(s, d)] = out
        return out

    seen, result = set(), []
    for combo in product(*(vecs(s, k) for s in mu.support)):
        made[0] += 1
        if made[0] > cap:
            raise CapExceeded(f"scheduler enumeration exceeded {cap} nodes ({len(result)} vectors so far)")
        v: dict = {}
        for s, sub in zip(mu.support, combo):
            for w, q in sub.items():
                v[w] = v.get(w, ZERO) + mu[s] * q
        key = _freeze(v)
        if key not in seen:
            seen.add(key)
            result.append(v)
    return result


@dataclass(frozen=True)
class TraceResult:
    equal: bool
    k: int
    side: str | None = None  # "left" or "right": whose vector has no match
    witnesses: tuple = ()  # unmatched vectors, as dicts word -> probability

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None


def _unmatched(P: list[dict], Q: list[dict]) -> list[dict]:
    words = sorted(set().union(*P, *Q), key=lambda w: (len(w), w))
    qs = [tuple(q.get(w, ZERO) for w in words) for q in Q]
    qset = set(qs)
    out = []
    for p in P:
        x = tuple(p.get(w, ZERO) for w in words)
        if x in qset:
            continue
        if not hull_member(x, qs).accepted:
            out.append(p)
    return out


def trace_dist_equiv_bounded(A: Automaton, mu, nu, k: int) -> TraceResult:
    """Do both sides induce the same sets of length-<=k trace distributions?

    Randomized schedulers over a finite horizon induce exactly the convex
    hull of the deterministic ones, so each side's vectors are tested for
    membership in the other side's hull.
    """
    if k < 0:
        raise RejectedInput("k must be nonnegative")
    P, Q = trace_vectors(A, mu, k), trace_vectors(A, nu, k)
    bad = _unmatched(P, Q)
    if bad:
        return TraceResult(False, k, "left", tuple(bad))
    bad = _unmatched(Q, P)
    if bad:
        return TraceResult(False, k, "right", tuple(bad))
    return TraceResult(True, k)


def word_text(w: tuple[str, ...]) -> str:
    return "".join(w) if all(len(a) == 1 for a in w) else ".".join(w)
