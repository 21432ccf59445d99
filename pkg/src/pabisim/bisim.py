"""State bisimulation by partition refinement and exact distribution
bisimilarity for automata that are deterministic after extension."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .automaton import Automaton, Dist, classify, ensure_extended
from .errors import RejectedInput
from .numerics import ONE, ZERO, Subspace, forward_closure, lp_feasible, to_rational


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[str, ...], ...]

    def block_of(self, s: str) -> int:
        for i, b in enumerate(self.blocks):
            if s in b:
                return i
        raise KeyError(s)

    def same(self, s: str, t: str) -> bool:
        return self.block_of(s) == self.block_of(t)


def _block_masses(mu: Dist, where: dict[str, int], nblocks: int) -> tuple[Fraction, ...]:
    out = [ZERO] * nblocks
    for s, p in mu.items():
        out[where[s]] += p
    return tuple(out)


def _matches(A: Automaton, s: str, t: str, where: dict[str, int], nblocks: int) -> bool:
    """Every raw move of ``s`` is met by a combined move of ``t`` with equal block masses."""
    for a in A.actions:
        mine = A.choices(s, a)
        if not mine:
            continue
        theirs = A.choices(t, a)
        if not theirs:
            return False
        cols = [_block_masses(nu, where, nblocks) for nu in theirs]
        for mu in mine:
            target = _block_masses(mu, where, nblocks)
            if target in cols:
                continue
            if len(cols) == 1:
                return False
            eq = [([c[b] for c in cols], target[b]) for b in range(nblocks)]
            eq.append(([ONE] * len(cols), ONE))
            if lp_feasible(len(cols), eq=eq) is None:
                return False
    return True


def prob_bisim(A: Automaton) -> Partition:
    """Coarsest probabilistic bisimulation (combined transitions) by refinement.

    Mutual matching is an equivalence (matching is reflexive and, because a
    combination of combined transitions is combined, transitive), so each
    round splits every block into its mutual-matching classes.
    """
    by_label: dict[frozenset, list[str]] = {}
    for s in A.states:
        by_label.setdefault(A.label(s), []).append(s)
    blocks = [tuple(v) for v in by_label.values()]
    while True:
        where = {s: i for i, b in enumerate(blocks) for s in b}
        new = []
        for b in blocks:
            classes: list[list[str]] = []
            for s in b:
                for cls in classes:
                    r = cls[0]
                    if _matches(A, s, r, where, len(blocks)) and _matches(A, r, s, where, len(blocks)):
                        cls.append(s)
                        break
                else:
                    classes.append([s])
            new.extend(tuple(c) for c in classes)
        if len(new) == len(blocks):
            order = {s: i for i, s in enumerate(A.states)}
            return Partition(tuple(sorted(new, key=lambda b: order[b[0]])))
        blocks = new


# --------------------------------------------------------------------------
# deterministic distribution bisimilarity


@dataclass(frozen=True)
class DetBisimResult:
    bisimilar: bool
    word: tuple[str, ...] | None
    basis: Subspace
    states: tuple[str, ...]


def _det_steps(B: Automaton):
    """Per-action successor rows of an extended deterministic automaton."""
    rep = classify(B)
    if not rep.deterministic:
        raise RejectedInput("automaton is nondeterministic: use the refutation game or a certificate")
    return {a: {s: B.choices(s, a)[0] for s in B.states} for a in B.actions}


def det_step(B: Automaton, steps, v, a):
    idx = B.index
    out = [ZERO] * len(B.states)
    for i, x in enumerate(v):
        if x:
            for t, p in steps[a][B.states[i]].items():
                out[idx[t]] += x * p
    return tuple(out)


def dist_bisim_det(A: Automaton, mu, nu) -> DetBisimResult:
    """Decide distribution bisimilarity exactly when every step is unique.

    The closure of ``mu - nu`` under the per-action step maps must lie in
    the kernel of every label-class functional.
    """
    B = ensure_extended(A)
    steps = _det_steps(B)
    mu = mu if isinstance(mu, Dist) else B.dist(mu)
    nu = nu if isinstance(nu, Dist) else B.dist(nu)
    classes: dict[frozenset, list[int]] = {}
    for i, s in enumerate(B.states):
        classes.setdefault(B.label(s), []).append(i)
    funcs = list(classes.values())

    def detect(v):
        return any(sum((v[i] for i in f), ZERO) for f in funcs)

    start = tuple(a - b for a, b in zip(mu.vector(B.states), nu.vector(B.states)))
    space, word, _ = forward_closure(start, lambda a, v: det_step(B, steps, v, a), B.actions, detect,
                                     limit=len(B.states))
    return DetBisimResult(word is None, word, space, B.states)


# --------------------------------------------------------------------------
# approximate bisimilarity


@dataclass(frozen=True)
class ApproxAnswer:
    verdict: str  # yes | no | unknown
    lower: Fraction
    upper: Fraction
    status: str


def approx_bisim_query(A: Automaton, mu, nu, eps, gamma, tol, depth: int = 6) -> ApproxAnswer:
    """Is ``mu`` eps-bisimilar to ``nu``? Answered from metric bounds."""
    from .metrics import Df_bounds, Df_det

    eps, gamma, tol = to_rational(eps), to_rational(gamma), to_rational(tol)
    if eps < 0 or tol <= 0 or not 0 < gamma <= 1:
        raise RejectedInput("need eps >= 0, tol > 0 and gamma in (0, 1]")
    if eps >= 1:
        return ApproxAnswer("yes", ZERO, ONE, "trivial")
    B = ensure_extended(A)
    if classify(B).deterministic:
        r = Df_det(A, mu, nu, gamma, tol)
        lo, hi, status = r.value, r.upper, r.status
    else:
        b = Df_bounds(A, mu, nu, gamma, depth)
        lo, hi = b.lower, b.upper
        status = "heuristic-upper" if b.heuristic else "bounds"
        if b.heuristic:
            hi = ONE
    if hi <= eps:
        return ApproxAnswer("yes", lo, hi, status)
    if lo > eps:
        return ApproxAnswer("no", lo, hi, status)
    return ApproxAnswer("unknown", lo, hi, status)
