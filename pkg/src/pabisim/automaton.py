"""Probabilistic automata: data model, text format and structural operations."""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator

from .errors import ModelError, RejectedInput
from .numerics import ONE, ZERO, fmt, to_rational

DEAD = "dead"
_ID = re.compile(r"^[^\s,:{}()#]+$")


class Dist(Mapping):
    """Exact probability distribution over state names.

    Entries are strictly positive and sum to one. Instances are immutable
    and hashable; iteration order is sorted by state name.
    """

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, entries: Mapping | Iterable = ()):
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict[str, Fraction] = {}
        for s, p in pairs:
            p = to_rational(p)
            if p < 0:
                raise RejectedInput(f"negative mass {fmt(p)} on {s}")
            if p:
                acc[s] = acc.get(s, ZERO) + p
        total = sum(acc.values(), ZERO)
        if total != 1:
            raise RejectedInput(f"mass-not-one: distribution sums to {fmt(total)}")
        self._items = tuple(sorted(acc.items()))
        self._map = dict(self._items)
        self._hash = hash(self._items)

    @classmethod
    def dirac(cls, s: str) -> "Dist":
        return cls({s: ONE})

    @classmethod
    def mix(cls, parts: Iterable[tuple[Fraction, Mapping]]) -> "Dist":
        """Convex combination of weighted (sub)distributions."""
        acc: dict[str, Fraction] = {}
        for w, d in parts:
            for s, p in d.items():
                acc[s] = acc.get(s, ZERO) + w * p
        return cls(acc)

    def __getitem__(self, s):
        return self._map.get(s, ZERO)

    def __contains__(self, s):
        return s in self._map

    def __iter__(self) -> Iterator[str]:
        return (s for s, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, Dist):
            return self._items == other._items
        return NotImplemented

    def __hash__(self):
        return self._hash

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self._items)

    def vector(self, order: Iterable[str]) -> tuple[Fraction, ...]:
        return tuple(self[s] for s in order)

    def literal(self, order: Iterable[str] | None = None) -> str:
        keys = self.support if order is None else [s for s in order if s in self._map]
        return ",".join(f"{s}:{fmt(self._map[s])}" for s in keys)

    def __repr__(self):
        return f"Dist({self.literal()})"


def parse_dist(text: str, line: int | None = None) -> Dist:
    """Parse ``id:rational(,id:rational)*``."""
    entries = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        sid, sep, val = chunk.rpartition(":")
        if not sep or not _ID.match(sid.strip()):
            raise ModelError(f"malformed distribution entry {chunk!r}", line)
        try:
            entries.append((sid.strip(), to_rational(val)))
        except RejectedInput:
            raise ModelError(f"malformed rational {val.strip()!r}", line) from None
    names = [s for s, _ in entries]
    if len(set(names)) != len(names):
        raise ModelError("state listed twice in distribution", line)
    try:
        return Dist(entries)
    except RejectedInput as exc:
        raise ModelError(str(exc), line) from None


@dataclass(frozen=True)
class Automaton:
    """A finite probabilistic automaton.

    ``labels`` is aligned with ``states``. When ``labels_from_ea`` is set the
    labels are the enabled-action sets and ``ap`` equals ``actions``.
    """

    name: str
    ap: tuple[str, ...]
    actions: tuple[str, ...]
    states: tuple[str, ...]
    labels: tuple[frozenset, ...]
    transitions: tuple[tuple[str, str, Dist], ...]
    initial: Dist
    labels_from_ea: bool = False

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise RejectedInput("duplicate state")
        if len(self.labels) != len(self.states):
            raise RejectedInput("labels not aligned with states")
        known = set(self.states)
        aps = set(self.ap)
        acts = set(self.actions)
        for lab in self.labels:
            if not lab <= aps:
                raise RejectedInput(f"label {sorted(lab)} outside AP")
        seen = set()
        for s, a, mu in self.transitions:
            if s not in known or not set(mu.support) <= known:
                raise RejectedInput(f"unknown state in transition from {s}")
            if a not in acts:
                raise RejectedInput(f"unknown action {a}")
            if (s, a, mu) in seen:
                raise RejectedInput(f"duplicate transition {s} {a}")
            seen.add((s, a, mu))
        if not set(self.initial.support) <= known:
            raise RejectedInput("initial distribution mentions unknown state")

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def _choices(self) -> dict[tuple[str, str], tuple[Dist, ...]]:
        out: dict[tuple[str, str], list[Dist]] = {}
        for s, a, mu in self.transitions:
            out.setdefault((s, a), []).append(mu)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _labels(self) -> dict[str, frozenset]:
        return dict(zip(self.states, self.labels))

    def choices(self, s: str, a: str) -> tuple[Dist, ...]:
        return self._choices.get((s, a), ())

    def enabled(self, s: str) -> frozenset:
        return frozenset(a for a in self.actions if (s, a) in self._choices)

    def label(self, s: str) -> frozenset:
        return self._labels[s]

    def label_key(self, lab: frozenset) -> tuple:
        """Sort key for label sets following AP order."""
        pos = {p: i for i, p in enumerate(self.ap)}
        return (len(lab), tuple(sorted(pos[p] for p in lab)))

    @cached_property
    def bot(self) -> str | None:
        """The dead state added by input-enabled extension, if present."""
        if DEAD not in self.ap:
            return None
        for s in self.states:
            if self.label(s) == {DEAD} and all(self.choices(s, a) == (Dist.dirac(s),) for a in self.actions):
                return s
        return None

    def dist(self, text_or_map) -> Dist:
        """Build a distribution over this automaton's states."""
        d = parse_dist(text_or_map) if isinstance(text_or_map, str) else Dist(text_or_map)
        for s in d:
            if s not in self.index:
                raise RejectedInput(f"unknown state {s}")
        return d


def make_automaton(name, ap, actions, states, transitions, initial, labels=None,
                   labels_from_ea=False) -> Automaton:
    """Convenience constructor taking plain Python containers."""
    states = tuple(states)
    transitions = tuple((s, a, mu if isinstance(mu, Dist) else Dist(mu)) for s, a, mu in transitions)
    initial = initial if isinstance(initial, Dist) else Dist(initial)
    if labels_from_ea:
        ea: dict[str, set] = {s: set() for s in states}
        for s, a, _ in transitions:
            ea.setdefault(s, set()).add(a)
        labs = tuple(frozenset(ea[s]) for s in states)
        ap = tuple(actions)
    else:
        labels = labels or {}
        labs = tuple(frozenset(labels.get(s, ())) for s in states)
    return Automaton(name, tuple(ap), tuple(actions), states, labs, transitions, initial, labels_from_ea)


# --------------------------------------------------------------------------
# text format


def parse_model(text: str) -> Automaton:
    """Parse the line-oriented model format."""
    name = None
    ap: list[str] | None = None
    actions: list[str] | None = None
    from_ea = False
    states: list[str] = []
    state_line: dict[str, int] = {}
    labels: dict[str, tuple[str, ...]] = {}
    label_line: dict[str, int] = {}
    init = None
    init_line = None
    trans: list[tuple[str, str, Dist, int]] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        words = rest.split()
        if head == "automaton":
            if len(words) != 1:
                raise ModelError("expected: automaton <name>", no)
            name = words[0]
        elif head == "ap":
            ap = words
        elif head == "actions":
            if not words:
                raise ModelError("actions line needs at least one action", no)
            actions = words
        elif head == "option":
            if words != ["labels-from-ea"]:
                raise ModelError(f"unknown option {rest!r}", no)
            from_ea = True
        elif head == "state":
            if not words:
                raise ModelError("expected: state <id> [label <id>*]", no)
            sid = words[0]
            if sid in state_line:
                raise ModelError(f"duplicate state {sid}", no)
            if not _ID.match(sid):
                raise ModelError(f"bad identifier {sid!r}", no)
            if len(words) > 1 and words[1] != "label":
                raise ModelError("expected 'label' after state id", no)
            states.append(sid)
            state_line[sid] = no
            labels[sid] = tuple(words[2:])
            label_line[sid] = no
        elif head == "init":
            init = parse_dist(rest, no)
            init_line = no
        elif head == "trans":
            m = re.match(r"^(\S+)\s+(\S+)\s*->\s*(.+)$", rest)
            if not m:
                raise ModelError("expected: trans <src> <act> -> <dist>", no)
            trans.append((m.group(1), m.group(2), parse_dist(m.group(3), no), no))
        else:
            raise ModelError(f"unknown directive {head!r}", no)
    if name is None:
        raise ModelError("missing 'automaton' line")
    if actions is None:
        raise ModelError("missing 'actions' line")
    if len(set(actions)) != len(actions):
        raise ModelError("duplicate action")
    if init is None:
        raise ModelError("missing 'init' line")
    if from_ea:
        ap = list(actions)
    ap = ap or []
    known = set(states)
    for s, a, mu, no in trans:
        if s not in known:
            raise ModelError(f"unknown state {s}", no)
        if a not in actions:
            raise ModelError(f"unknown action {a}", no)
        for t in mu:
            if t not in known:
                raise ModelError(f"unknown state {t}", no)
    for t in init:
        if t not in known:
            raise ModelError(f"unknown state {t}", init_line)
    seen = set()
    for s, a, mu, no in trans:
        if (s, a, mu) in seen:
            raise ModelError(f"duplicate transition {s} {a}", no)
        seen.add((s, a, mu))
    if not from_ea:
        for s, lab in labels.items():
            for p in lab:
                if p not in ap:
                    raise ModelError(f"unknown atomic proposition {p}", label_line[s])
    elif any(labels.values()):
        bad = next(s for s, lab in labels.items() if lab)
        raise ModelError("explicit labels conflict with labels-from-ea", label_line[bad])
    return make_automaton(name, ap, actions, states, [(s, a, mu) for s, a, mu, _ in trans], init,
                          labels={s: set(v) for s, v in labels.items()}, labels_from_ea=from_ea)


def serialize_model(A: Automaton) -> str:
    order = A.states
    out = [f"automaton {A.name}", " ".join(["ap", *A.ap]).rstrip() if not A.labels_from_ea else None,
           " ".join(["actions", *A.actions])]
    if A.labels_from_ea:
        out.append("option labels-from-ea")
    out = [x for x in out if x is not None]
    for s, lab in zip(A.states, A.labels):
        if A.labels_from_ea or not lab:
            out.append(f"state {s}")
        else:
            out.append(f"state {s} label " + " ".join(p for p in A.ap if p in lab))
    out.append(f"init {A.initial.literal(order)}")
    for s, a, mu in A.transitions:
        out.append(f"trans {s} {a} -> {mu.literal(order)}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class ClassificationReport:
    input_enabled: bool
    deterministic: bool
    reactive: bool


def classify(A: Automaton) -> ClassificationReport:
    acts = frozenset(A.actions)
    enabled = all(A.enabled(s) == acts for s in A.states)
    det = all(len(v) <= 1 for v in A._choices.values())
    full = frozenset(A.ap)
    labels_ok = all(lab in (frozenset(), full) for lab in A.labels)
    return ClassificationReport(enabled, det, enabled and det and labels_ok)


def _fresh(base: str, taken) -> str:
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    return name


def extend_input_enabled(A: Automaton) -> Automaton:
    """Add a dead state absorbing every action a state cannot perform."""
    if DEAD in A.ap:
        raise RejectedInput(f"AP already contains {DEAD!r}")
    bot = _fresh("bot", A.index)
    trans = list(A.transitions)
    to_bot = Dist.dirac(bot)
    for s in A.states:
        ea = A.enabled(s)
        trans.extend((s, a, to_bot) for a in A.actions if a not in ea)
    trans.extend((bot, a, to_bot) for a in A.actions)
    return Automaton(A.name, A.ap + (DEAD,), A.actions, A.states + (bot,),
                     A.labels + (frozenset({DEAD}),), tuple(trans), A.initial)


def ensure_extended(A: Automaton) -> Automaton:
    """Input-enabled extension, skipped when ``A`` is already extended."""
    if A.bot is not None and classify(A).input_enabled:
        return A
    return extend_input_enabled(A)


def direct_sum(A1: Automaton, A2: Automaton) -> tuple[Automaton, dict[str, str], dict[str, str]]:
    """Disjoint union; states are renamed ``l.<s>`` and ``r.<s>``."""
    if set(A1.actions) != set(A2.actions):
        raise RejectedInput("direct sum needs equal action sets")
    m1 = {s: f"l.{s}" for s in A1.states}
    m2 = {s: f"r.{s}" for s in A2.states}

    def ren(mu, m):
        return Dist({m[s]: p for s, p in mu.items()})

    ap = A1.ap + tuple(p for p in A2.ap if p not in A1.ap)
    trans = [(m1[s], a, ren(mu, m1)) for s, a, mu in A1.transitions]
    trans += [(m2[s], a, ren(mu, m2)) for s, a, mu in A2.transitions]
    out = Automaton(f"{A1.name}+{A2.name}", ap, A1.actions,
                    tuple(m1.values()) + tuple(m2.values()), A1.labels + A2.labels,
                    tuple(trans), ren(A1.initial, m1), A1.labels_from_ea and A2.labels_from_ea)
    return out, m1, m2


def pair_name(l: str, r: str) -> str:
    return f"{l}|{r}"


def product_dist(mu0: Mapping, mu1: Mapping) -> Dist:
    return Dist({pair_name(l, r): p * q for l, p in mu0.items() for r, q in mu1.items()})


def parallel_compose(A0: Automaton, A1: Automaton, sync: Iterable[str]) -> Automaton:
    """Parallel composition synchronising on ``sync``; states are ``l|r``."""
    sync = frozenset(sync)
    if not sync <= set(A0.actions) & set(A1.actions):
        raise RejectedInput("sync set must lie in both action sets")
    actions = A0.actions + tuple(a for a in A1.actions if a not in A0.actions)
    ap = A0.ap + tuple(p for p in A1.ap if p not in A0.ap)
    states, labels, trans = [], [], []
    for l, r in product(A0.states, A1.states):
        s = pair_name(l, r)
        states.append(s)
        labels.append(A0.label(l) | A1.label(r))
        seen = set()
        for a in actions:
            if a in sync:
                targets = [product_dist(m0, m1) for m0 in A0.choices(l, a) for m1 in A1.choices(r, a)]
            else:
                targets = [product_dist(m0, Dist.dirac(r)) for m0 in A0.choices(l, a)]
                targets += [product_dist(Dist.dirac(l), m1) for m1 in A1.choices(r, a)]
            for mu in targets:
                if (a, mu) not in seen:
                    seen.add((a, mu))
                    trans.append((s, a, mu))
    return Automaton(f"{A0.name}|{A1.name}", ap, actions, tuple(states), tuple(labels),
                     tuple(trans), product_dist(A0.initial, A1.initial))


# --------------------------------------------------------------------------
# label masses


def class_masses(A: Automaton, mu: Mapping) -> dict[frozenset, Fraction]:
    """Mass per inhabited label class."""
    out: dict[frozenset, Fraction] = {}
    for s, p in mu.items():
        lab = A.label(s)
        out[lab] = out.get(lab, ZERO) + p
    return out


def label_mass(A: Automaton, mu: Mapping, labels: Iterable[str]) -> Fraction:
    target = frozenset(labels)
    if not target <= set(A.ap):
        raise RejectedInput("label set outside AP")
    return sum((p for s, p in mu.items() if A.label(s) == target), ZERO)


def action_label_mass(A: Automaton, mu: Mapping, acts: Iterable[str], labels: Iterable[str]) -> Fraction:
    acts = frozenset(acts)
    if not acts <= set(A.actions):
        raise RejectedInput("action set outside Act")
    target = frozenset(labels)
    return sum((p for s, p in mu.items() if A.label(s) == target and A.enabled(s) & acts), ZERO)
