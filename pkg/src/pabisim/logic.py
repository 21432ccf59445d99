"""The quantitative modal logic: syntax, evaluation and distance lower bounds.

Grammar (whitespace-insensitive)::

    phi ::= B{ {id*} (, {id*})* } | B{} | <act> phi | ! phi
          | phi (+) rational | AND(phi, phi, ...) | ( phi )

Prefix operators bind tighter than ``(+)``, which associates to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .automaton import Automaton, Dist, class_masses, classify, ensure_extended
from .errors import RejectedInput
from .numerics import ONE, ZERO, to_rational


class FormulaError(RejectedInput):
    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"position {pos}: {msg}")


@dataclass(frozen=True)
class ClassFamily:
    classes: frozenset  # of frozensets of AP ids


@dataclass(frozen=True)
class Shift:
    phi: object
    p: Fraction


@dataclass(frozen=True)
class Neg:
    phi: object


@dataclass(frozen=True)
class Conj:
    parts: tuple


@dataclass(frozen=True)
class Diamond:
    action: str
    phi: object


def family(*classes) -> ClassFamily:
    return ClassFamily(frozenset(frozenset(c) for c in classes))


def diamonds(word, phi):
    for a in reversed(tuple(word)):
        phi = Diamond(a, phi)
    return phi


# --------------------------------------------------------------------------
# printing and parsing


def _class_text(c: frozenset) -> str:
    return "{" + " ".join(sorted(c)) + "}"


def format_formula(phi, _prefix: bool = False) -> str:
    if isinstance(phi, ClassFamily):
        cs = sorted(phi.classes, key=lambda c: (len(c), sorted(c)))
        return "B{" + ", ".join(_class_text(c) for c in cs) + "}"
    if isinstance(phi, Diamond):
        return f"<{phi.action}>" + format_formula(phi.phi, True)
    if isinstance(phi, Neg):
        return "!" + format_formula(phi.phi, True)
    if isinstance(phi, Conj):
        return "AND(" + ", ".join(format_formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Shift):
        inner = format_formula(phi.phi) + f" (+) {phi.p}"
        return f"({inner})" if _prefix else inner
    raise TypeError(f"not a formula: {phi!r}")


_TOKEN = re.compile(r"\s*(?:(?P<shift>\(\+\))|(?P<and>AND\b)|(?P<B>B\{)|(?P<sym>[<>!(),{}])"
                    r"|(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z0-9_.'|\-]+))")


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                bad = len(text) - len(rest)
                raise FormulaError(f"unexpected character {text[bad]!r}", bad)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0
        self.end = len(text)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.end)

    def take(self, kind=None, value=None):
        k, v, p = self.peek()
        if k is None or (kind and k != kind) or (value is not None and v != value):
            want = value or kind or "token"
            got = "end of input" if k is None else repr(v)
            raise FormulaError(f"expected {want}, got {got}", p)
        self.i += 1
        return v, p

    def formula(self):
        phi = self.prefix()
        while self.peek()[0] == "shift":
            self.take("shift")
            k, v, p = self.peek()
            if k != "num":
                raise FormulaError("expected a rational after (+)", p)
            self.take()
            q = to_rational(v)
            if not 0 <= q <= 1:
                raise FormulaError("shift must lie in [0, 1]", p)
            phi = Shift(phi, q)
        return phi

    def prefix(self):
        k, v, p = self.peek()
        if k == "sym" and v == "<":
            self.take()
            a, _ = self.take("id")
            self.take("sym", ">")
            return Diamond(a, self.prefix())
        if k == "sym" and v == "!":
            self.take()
            return Neg(self.prefix())
        if k == "sym" and v == "(":
            self.take()
            phi = self.formula()
            self.take("sym", ")")
            return phi
        if k == "and":
            self.take()
            self.take("sym", "(")
            parts = [self.formula()]
            while self.peek()[1] == ",":
                self.take()
                parts.append(self.formula())
            self.take("sym", ")")
            return Conj(tuple(parts))
        if k == "B":
            self.take()
            classes = []
            if self.peek()[1] == "}":
                self.take()
                return ClassFamily(frozenset())
            while True:
                self.take("sym", "{")
                atoms = []
                while self.peek()[0] == "id" or self.peek()[1] == ",":
                    if self.peek()[1] == ",":
                        # commas are allowed between atoms inside a class
                        if not atoms:
                            raise FormulaError("expected an atom", self.peek()[2])
                        self.take()
                        continue
                    atoms.append(self.take("id")[0])
                self.take("sym", "}")
                classes.append(frozenset(atoms))
                if self.peek()[1] == ",":
                    self.take()
                    continue
                self.take("sym", "}")
                return ClassFamily(frozenset(classes))
        got = "end of input" if k is None else repr(v)
        raise FormulaError(f"expected a formula, got {got}", p)


def parse_formula(text: str):
    ps = _Parser(text)
    phi = ps.formula()
    k, v, p = ps.peek()
    if k is not None:
        raise FormulaError(f"trailing input {v!r}", p)
    return phi


# --------------------------------------------------------------------------
# evaluation


def _check_names(B: Automaton, phi) -> None:
    if isinstance(phi, ClassFamily):
        for c in phi.classes:
            for p in c:
                if p not in B.ap:
                    raise RejectedInput(f"unknown atomic proposition {p}")
    elif isinstance(phi, Diamond):
        if phi.action not in B.actions:
            raise RejectedInput(f"unknown action {phi.action}")
        _check_names(B, phi.phi)
    elif isinstance(phi, (Neg, Shift)):
        _check_names(B, phi.phi)
    elif isinstance(phi, Conj):
        if not phi.parts:
            raise RejectedInput("empty conjunction")
        for q in phi.parts:
            _check_names(B, q)
    else:
        raise TypeError(f"not a formula: {phi!r}")


def affine_violation(phi):
    """First node outside the ClassFamily/Neg/Diamond fragment, or None."""
    if isinstance(phi, ClassFamily):
        return None
    if isinstance(phi, (Neg, Diamond)):
        return affine_violation(phi.phi)
    return phi


def _gamma(gamma) -> Fraction:
    gamma = to_rational(gamma)
    if not 0 < gamma <= 1:
        raise RejectedInput("gamma must lie in (0, 1]")
    return gamma


def eval_det(A: Automaton, phi, mu, gamma) -> Fraction:
    """Exact value on an automaton whose extension is deterministic.

    On a nondeterministic automaton formulas of the affine fragment are
    handed to :func:`eval_affine`; anything else is rejected.
    """
    gamma = _gamma(gamma)
    B = ensure_extended(A)
    _check_names(B, phi)
    if not classify(B).deterministic:
        bad = affine_violation(phi)
        if bad is None:
            return eval_affine(A, phi, mu, gamma)
        raise RejectedInput(f"automaton is nondeterministic and {format_formula(bad)} is outside the "
                            "affine fragment: use eval_affine on a fragment formula")
    mu = mu if isinstance(mu, Dist) else B.dist(mu)
    step = {a: {s: B.choices(s, a)[0] for s in B.states} for a in B.actions}

    def val(f, m: Dist) -> Fraction:
        if isinstance(f, ClassFamily):
            return sum((p for s, p in m.items() if B.label(s) in f.classes), ZERO)
        if isinstance(f, Shift):
            return min(val(f.phi, m) + f.p, ONE)
        if isinstance(f, Neg):
            return 1 - val(f.phi, m)
        if isinstance(f, Conj):
            return min(val(q, m) for q in f.parts)
        nxt = Dist.mix((p, step[f.action][s]) for s, p in m.items())
        return gamma * val(f.phi, nxt)

    return val(phi, mu)


def _affine_vector(B: Automaton, phi, gamma) -> dict[str, Fraction]:
    if isinstance(phi, ClassFamily):
        return {s: ONE if B.label(s) in phi.classes else ZERO for s in B.states}
    g = _affine_vector(B, phi.phi, gamma)
    if isinstance(phi, Neg):
        return {s: 1 - v for s, v in g.items()}
    return _diamond_vector(B, phi.action, g, gamma)


def _diamond_vector(B: Automaton, a: str, g, gamma):
    return {s: gamma * max(sum((p * g[t] for t, p in c.items()), ZERO) for c in B.choices(s, a))
            for s in B.states}


def eval_affine(A: Automaton, phi, mu, gamma) -> Fraction:
    """Exact value of a ClassFamily/Neg/Diamond formula on any automaton."""
    gamma = _gamma(gamma)
    bad = affine_violation(phi)
    if bad is not None:
        raise RejectedInput(f"formula outside the affine fragment at {format_formula(bad)}")
    B = ensure_extended(A)
    _check_names(B, phi)
    mu = mu if isinstance(mu, Dist) else B.dist(mu)
    g = _affine_vector(B, phi, gamma)
    return sum((p * g[s] for s, p in mu.items()), ZERO)


def distance_lb(A: Automaton, mu, nu, gamma, depth: int):
    """Best value gap over Diamond strings of length <= depth.

    On deterministic extensions the terminator is the family of classes
    where ``mu`` carries more mass, which realizes ``d_AP`` at that word.
    Otherwise every inhabited single class and its negation are tried.
    Returns ``(bound, witness)``; the witness is None when the bound is 0.
    """
    gamma = _gamma(gamma)
    if depth < 0:
        raise RejectedInput("depth must be nonnegative")
    B = ensure_extended(A)
    mu = mu if isinstance(mu, Dist) else B.dist(mu)
    nu = nu if isinstance(nu, Dist) else B.dist(nu)
    best, witness = ZERO, None
    if mu == nu:
        return best, witness
    if classify(B).deterministic:
        step = {a: {s: B.choices(s, a)[0] for s in B.states} for a in B.actions}
        level = [((), mu, nu)]
        weight = ONE
        for n in range(depth + 1):
            for word, m, v in level:
                cm, cv = class_masses(B, m), class_masses(B, v)
                pos = [c for c in cm if cm[c] > cv.get(c, ZERO)]
                gap = weight * sum((cm[c] - cv.get(c, ZERO) for c in pos), ZERO)
                if gap > best:
                    best, witness = gap, diamonds(word, ClassFamily(frozenset(pos)))
            if n == depth:
                break
            level = [(w + (a,), Dist.mix((p, step[a][s]) for s, p in m.items()),
                      Dist.mix((p, step[a][s]) for s, p in v.items()))
                     for w, m, v in level for a in B.actions]
            weight *= gamma
        return best, witness
    inhabited = []
    for lab in B.labels:
        if lab not in inhabited:
            inhabited.append(lab)
    terminators = []
    for c in inhabited:
        f = ClassFamily(frozenset([c]))
        terminators += [f, Neg(f)]
    for n in range(depth + 1):
        for word in product(B.actions, repeat=n):
            for term in terminators:
                g = _affine_vector(B, term, gamma)
                for a in reversed(word):
                    g = _diamond_vector(B, a, g, gamma)
                gap = abs(sum((p * g[s] for s, p in mu.items()), ZERO) - sum((p * g[s] for s, p in nu.items()), ZERO))
                if gap > best:
                    best, witness = gap, diamonds(word, term)
    return best, witness
