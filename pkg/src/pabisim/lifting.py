"""Lifted transitions between distributions.

Successor sets are convex polytopes; they are represented by the vertex
list obtained from enumerating one raw choice per support state.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .automaton import Automaton, Dist
from .errors import CapExceeded, NotEnabled, RejectedInput
from .numerics import ZERO

DEFAULT_CAP = 200_000


def node_cap() -> int:
    """Enumeration cap, overridable with ``PABISIM_MAX_NODES``."""
    raw = os.environ.get("PABISIM_MAX_NODES")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise RejectedInput(f"PABISIM_MAX_NODES must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise RejectedInput("PABISIM_MAX_NODES must be positive")
    return cap


def _check_cap(count: int, what: str) -> None:
    cap = node_cap()
    if count > cap:
        raise CapExceeded(f"{what}: {count} combinations exceed the cap of {cap}")


@dataclass(frozen=True)
class SuccessorPolytope:
    """Vertices of the set of lifted successors of ``source``.

    ``choices[k]`` records, for vertex ``k``, the choice index used at each
    state of ``keys`` (support states, or component states for the
    distributed step).
    """

    source: Dist
    tag: object
    vertices: tuple[Dist, ...]
    keys: tuple[str, ...] = ()
    choices: tuple[tuple[int, ...], ...] = ()


def state_choices(A: Automaton, s: str, a: str) -> list[Dist]:
    if s not in A.index:
        raise RejectedInput(f"unknown state {s}")
    return list(A.choices(s, a))


def _combine(weights: dict[str, Fraction], picks: dict[str, Dist], scale: Fraction = Fraction(1)) -> Dist:
    acc: dict[str, Fraction] = {}
    for s, w in weights.items():
        for t, p in picks[s].items():
            acc[t] = acc.get(t, ZERO) + w * p * scale
    return Dist(acc)


def _enumerate(mu_part: dict[str, Fraction], options: dict[str, Sequence[Dist]], scale=Fraction(1)):
    keys = tuple(sorted(mu_part))
    sizes = [len(options[s]) for s in keys]
    total = 1
    for n in sizes:
        total *= n
    _check_cap(total, "successor enumeration")
    verts: list[Dist] = []
    picks: list[tuple[int, ...]] = []
    seen = set()
    for combo in product(*(range(n) for n in sizes)):
        v = _combine(mu_part, {s: options[s][i] for s, i in zip(keys, combo)}, scale)
        if v not in seen:
            seen.add(v)
            verts.append(v)
            picks.append(combo)
    return keys, tuple(verts), tuple(picks)


def dist_step_vertices(A: Automaton, mu: Dist, a: str) -> SuccessorPolytope:
    """Vertices of ``{mu' : mu -a-> mu'}``; every support state must enable ``a``."""
    options = {}
    for s in mu:
        ch = A.choices(s, a)
        if not ch:
            raise NotEnabled(s, a)
        options[s] = ch
    keys, verts, picks = _enumerate(dict(mu.items()), options)
    return SuccessorPolytope(mu, a, verts, keys, picks)


def dagger_choices(A: Automaton, s: str, acts: frozenset) -> tuple[Dist, ...]:
    """Raw transitions of ``s`` under any action of ``acts``, in action order."""
    return tuple(mu for a in A.actions if a in acts for mu in A.choices(s, a))


def dagger_step(A: Automaton, mu: Dist, acts: Iterable[str]) -> SuccessorPolytope | None:
    """Action-set step normalised by the enabled mass; None when that mass is zero."""
    acts = frozenset(acts)
    if not acts:
        raise RejectedInput("action set must be nonempty")
    part = {s: p for s, p in mu.items() if A.enabled(s) & acts}
    mass = sum(part.values(), ZERO)
    if mass == 0:
        return None
    options = {s: dagger_choices(A, s, acts) for s in part}
    keys, verts, picks = _enumerate(part, options, 1 / mass)
    return SuccessorPolytope(mu, acts, verts, keys, picks)


# --------------------------------------------------------------------------
# distributed step on composed automata


def split_pair(name: str) -> tuple[str, str] | None:
    """Split a composed state name at its last ``|``."""
    if "|" not in name:
        return None
    l, _, r = name.rpartition("|")
    return l, r


def _marginals(mu: Dist):
    left: dict[str, Fraction] = {}
    right: dict[str, Fraction] = {}
    for s, p in mu.items():
        pr = split_pair(s)
        if pr is None:
            return None
        left[pr[0]] = left.get(pr[0], ZERO) + p
        right[pr[1]] = right.get(pr[1], ZERO) + p
    return Dist(left), Dist(right)


def component_choices(A: Automaton, a: str, sync: frozenset) -> tuple[dict, dict]:
    """Recover each component state's raw ``a``-choices from the composed automaton."""
    left: dict[str, list[Dist]] = {}
    right: dict[str, list[Dist]] = {}

    def add(table, key, d):
        lst = table.setdefault(key, [])
        if d not in lst:
            lst.append(d)

    for s, act, mu in A.transitions:
        if act != a:
            continue
        pr = split_pair(s)
        mg = _marginals(mu)
        if pr is None or mg is None:
            continue
        l, r = pr
        m0, m1 = mg
        if a in sync:
            add(left, l, m0)
            add(right, r, m1)
        else:
            if m1 == Dist.dirac(r):
                add(left, l, m0)
            if m0 == Dist.dirac(l):
                add(right, r, m1)
    return left, right


def distributed_assignments(A: Automaton, states: Iterable[str], a: str, sync: Iterable[str]):
    """Per-state targets of every distributed choice function over ``states``.

    Each component state picks one raw choice that is shared by every pair
    containing it. Pairs that cannot move under the component rules fall
    back to their own raw transitions (the dead-state transition after
    input-enabled extension). Non-pair states are their own component.

    Returns ``(keys, assignments)`` where each assignment is
    ``(combo, {state: Dist})`` and ``combo`` indexes the choices of ``keys``.
    """
    sync = frozenset(sync)
    left, right = component_choices(A, a, sync)
    plan: list[tuple[str, object]] = []
    comps: dict[tuple, tuple[Dist, ...]] = {}
    for s in sorted(states):
        pr = split_pair(s)
        if pr is not None:
            l, r = pr
            lc, rc = left.get(l, []), right.get(r, [])
            if a in sync and lc and rc and A.choices(s, a):
                comps[("L", l)] = tuple(lc)
                comps[("R", r)] = tuple(rc)
                plan.append((s, ("sync", l, r)))
                continue
            if a not in sync and (lc or rc):
                if lc:
                    comps[("L", l)] = tuple(lc)
                if rc:
                    comps[("R", r)] = tuple(rc)
                plan.append((s, ("inter", l, r)))
                continue
        raw = A.choices(s, a)
        if not raw:
            raise NotEnabled(s, a)
        comps[("S", s)] = raw
        plan.append((s, ("seq", s)))
    keys = tuple(sorted(comps))
    sizes = [len(comps[k]) for k in keys]
    sides = (0,) if a in sync else (0, 1)
    total = len(sides)
    for n in sizes:
        total *= n
    _check_cap(total, "distributed enumeration")
    out = []
    for side in sides:
        for combo in product(*(range(n) for n in sizes)):
            pick = {k: comps[k][i] for k, i in zip(keys, combo)}
            targets: dict[str, Dist] = {}
            for s, how in plan:
                if how[0] == "seq":
                    targets[s] = pick[("S", s)]
                    continue
                _, l, r = how
                if how[0] == "sync":
                    m0, m1 = pick[("L", l)], pick[("R", r)]
                elif ("L", l) in pick and (side == 0 or ("R", r) not in pick):
                    m0, m1 = pick[("L", l)], Dist.dirac(r)
                else:
                    m0, m1 = Dist.dirac(l), pick[("R", r)]
                targets[s] = Dist({f"{x}|{y}": q0 * q1 for x, q0 in m0.items() for y, q1 in m1.items()})
            out.append((combo, targets))
    tags = tuple(f"{k[1]}|" if k[0] == "L" else (f"|{k[1]}" if k[0] == "R" else k[1]) for k in keys)
    return tags, out


def distributed_step_vertices(A: Automaton, mu: Dist, a: str, sync: Iterable[str]) -> SuccessorPolytope:
    """Vertices of the distributed-scheduler step (see ``distributed_assignments``)."""
    tags, assignments = distributed_assignments(A, mu.support, a, sync)
    verts: list[Dist] = []
    picks: list[tuple[int, ...]] = []
    seen = set()
    for combo, targets in assignments:
        v = Dist.mix((mu[s], targets[s]) for s in mu)
        if v not in seen:
            seen.add(v)
            verts.append(v)
            picks.append(combo)
    return SuccessorPolytope(mu, a, tuple(verts), tags, tuple(picks))


def plain_assignments(options: dict[str, Sequence[Dist]]):
    """Every choice function picking one raw option per state."""
    keys = tuple(sorted(options))
    sizes = [len(options[s]) for s in keys]
    total = 1
    for n in sizes:
        total *= n
    _check_cap(total, "choice-function enumeration")
    return [dict(zip(keys, (options[s][i] for s, i in zip(keys, combo))))
            for combo in product(*(range(n) for n in sizes))]


# --------------------------------------------------------------------------
# consistency splitting


@dataclass(frozen=True)
class SplitResult:
    components: tuple[tuple[Fraction, Dist], ...]
    signatures: tuple[frozenset, ...]


def consistent(A: Automaton, mu: Dist) -> bool:
    return len({A.enabled(s) for s in mu}) <= 1


def canonical_split(A: Automaton, mu: Dist) -> SplitResult:
    """Group the support by enabled-action set."""
    groups: dict[frozenset, dict[str, Fraction]] = {}
    for s, p in mu.items():
        groups.setdefault(A.enabled(s), {})[s] = p
    pos = {a: i for i, a in enumerate(A.actions)}
    order = sorted(groups, key=lambda g: (len(g), sorted(pos[a] for a in g)))
    comps = []
    for g in order:
        part = groups[g]
        w = sum(part.values(), ZERO)
        comps.append((w, Dist({s: p / w for s, p in part.items()})))
    return SplitResult(tuple(comps), tuple(order))

