"""Exact rational linear algebra: simplex LP, transport, subspaces, hulls.

Everything here works on ``fractions.Fraction`` values. Floats are rejected
wherever a value enters from outside, so every result is bit-reproducible.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from .errors import RejectedInput

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")

ZERO = Fraction(0)
ONE = Fraction(1)


def to_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``p/q`` strings to a Fraction.

    Floats are refused on purpose: a float has already lost exactness.
    """
    if isinstance(value, bool):
        raise RejectedInput(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL.match(text):
            raise RejectedInput(f"malformed rational: {value!r}")
        num, _, den = text.partition("/")
        if den and int(den) == 0:
            raise RejectedInput(f"malformed rational: {value!r}")
        return Fraction(int(num), int(den) if den else 1)
    raise RejectedInput(f"not a rational: {value!r}")


def fmt(q: Fraction) -> str:
    """Render as ``p/q`` or a bare integer."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# simplex


class LPError(RejectedInput):
    """Malformed linear program (dimension mismatch and similar)."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(rows: list[list[Fraction]], r: int, c: int) -> None:
    inv = 1 / rows[r][c]
    pr = [v * inv for v in rows[r]]
    rows[r] = pr
    for i, row in enumerate(rows):
        f = row[c]
        if i != r and f:
            rows[i] = [a - f * b for a, b in zip(row, pr)]


def _run(rows: list[list[Fraction]], basis: list[int], allowed: Sequence[int]) -> str:
    # Bland's rule: lowest entering index, lowest leaving basic index on ties.
    m = len(rows) - 1
    while True:
        obj = rows[-1]
        enter = next((j for j in allowed if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(rows, best[1], enter)
        basis[best[1]] = enter


def lp_solve(objective: Sequence, *, le: Iterable = (), ge: Iterable = (), eq: Iterable = (),
             sense: str = "max") -> LPResult:
    """Solve an LP over nonnegative variables with exact two-phase simplex.

    ``le``, ``ge`` and ``eq`` are iterables of ``(coefficients, rhs)`` pairs.
    The number of variables is ``len(objective)``; every coefficient row
    must have that length. Variables are implicitly constrained to be >= 0.
    """
    if sense not in ("max", "min"):
        raise LPError(f"unknown sense {sense!r}")
    c = [to_rational(v) for v in objective]
    n = len(c)
    cons: list[tuple[list[Fraction], Fraction, int]] = []
    for kind, group in ((1, le), (-1, ge), (0, eq)):
        for coeffs, rhs in group:
            row = [to_rational(v) for v in coeffs]
            if len(row) != n:
                raise LPError(f"constraint has {len(row)} coefficients, expected {n}")
            cons.append((row, to_rational(rhs), kind))
    nslack = sum(1 for _, _, k in cons if k)
    ncols = n + nslack
    m = len(cons)
    rows: list[list[Fraction]] = []
    s = n
    for i, (row, rhs, kind) in enumerate(cons):
        full = row + [ZERO] * nslack
        if kind:
            full[s] = Fraction(kind)
            s += 1
        if rhs < 0:
            full = [-v for v in full]
            rhs = -rhs
        art = [ZERO] * m
        art[i] = ONE
        rows.append(full + art + [rhs])
    # phase 1: minimise the sum of artificials
    obj = [ZERO] * (ncols + m + 1)
    for row in rows:
        for j in range(ncols):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    rows.append(obj)
    basis = list(range(ncols, ncols + m))
    _run(rows, basis, range(ncols + m))
    if rows[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(rows) - 1:
        if basis[i] >= ncols:
            j = next((j for j in range(ncols) if rows[i][j] != 0), None)
            if j is None:
                del rows[i]
                del basis[i]
                continue
            _pivot(rows, i, j)
            basis[i] = j
        i += 1
    # phase 2
    cmin = [-v for v in c] if sense == "max" else list(c)
    cmin += [ZERO] * nslack
    body = [row[:ncols] + [row[-1]] for row in rows[:-1]]
    obj = cmin + [ZERO]
    for row, b in zip(body, basis):
        cb = cmin[b]
        if cb:
            obj = [o - cb * v for o, v in zip(obj, row)]
    body.append(obj)
    status = _run(body, basis, range(ncols))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [ZERO] * ncols
    for row, b in zip(body, basis):
        x[b] = row[-1]
    xs = tuple(x[:n])
    value = sum((ci * xi for ci, xi in zip(c, xs)), ZERO)
    return LPResult("optimal", value, xs)


def lp_feasible(nvars: int, *, le: Iterable = (), ge: Iterable = (), eq: Iterable = ()) -> tuple[Fraction, ...] | None:
    """A feasible point of the constraint system, or None."""
    res = lp_solve([ZERO] * nvars, le=le, ge=ge, eq=eq, sense="min")
    return res.x if res.optimal else None


# --------------------------------------------------------------------------
# transport


def transport_cost(mu: Sequence, nu: Sequence, cost: Sequence[Sequence]) -> tuple[Fraction, tuple[tuple[Fraction, ...], ...]]:
    """Minimal expected cost over couplings of ``mu`` and ``nu``.

    Returns the optimum and an optimal coupling as a dense matrix whose row
    sums are ``mu`` and column sums are ``nu``.
    """
    mu = [to_rational(v) for v in mu]
    nu = [to_rational(v) for v in nu]
    if len(cost) != len(mu) or any(len(row) != len(nu) for row in cost):
        raise LPError("cost matrix does not match marginal dimensions")
    for vec in (mu, nu):
        if any(v < 0 for v in vec) or sum(vec) != 1:
            raise LPError("marginals must be probability vectors")
    rows = [i for i, v in enumerate(mu) if v]
    cols = [j for j, v in enumerate(nu) if v]
    pairs = [(i, j) for i in rows for j in cols]
    k = len(pairs)
    eq = []
    for i in rows:
        eq.append(([ONE if p[0] == i else ZERO for p in pairs], mu[i]))
    for j in cols:
        eq.append(([ONE if p[1] == j else ZERO for p in pairs], nu[j]))
    res = lp_solve([to_rational(cost[i][j]) for i, j in pairs], eq=eq, sense="min")
    assert res.optimal, res
    coupling = [[ZERO] * len(nu) for _ in mu]
    for (i, j), w in zip(pairs, res.x):
        coupling[i][j] = w
    return res.value, tuple(tuple(r) for r in coupling)


# --------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """Row space kept in reduced row-echelon form."""

    dim: int
    rows: tuple[tuple[Fraction, ...], ...] = ()
    pivots: tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence) -> tuple[Fraction, ...]:
        """Residual of ``v`` after eliminating every pivot column."""
        if len(v) != self.dim:
            raise LPError(f"vector of length {len(v)} in a {self.dim}-dimensional space")
        out = [to_rational(x) for x in v]
        for row, p in zip(self.rows, self.pivots):
            f = out[p]
            if f:
                out = [a - f * b for a, b in zip(out, row)]
        return tuple(out)

    def __contains__(self, v) -> bool:
        return not any(self.reduce(v))


def span_insert(space: Subspace, v: Sequence) -> tuple[Subspace, bool]:
    """Add ``v`` to the spanning set; ``changed`` is False iff it was in the span."""
    r = space.reduce(v)
    p = next((i for i, x in enumerate(r) if x), None)
    if p is None:
        return space, False
    lead = r[p]
    r = tuple(x / lead for x in r)
    rows = []
    for row in space.rows:
        f = row[p]
        rows.append(tuple(a - f * b for a, b in zip(row, r)) if f else row)
    order = sorted(range(len(rows) + 1), key=lambda i: (space.pivots + (p,))[i])
    allrows = rows + [r]
    allpiv = space.pivots + (p,)
    return Subspace(space.dim, tuple(allrows[i] for i in order), tuple(allpiv[i] for i in order)), True


def forward_closure(start: Sequence, step: Callable[[Hashable, tuple], tuple], letters: Sequence[Hashable],
                    detect: Callable[[tuple], object] | None = None, limit: int | None = None):
    """Breadth-first span closure of ``start`` under the maps ``step(letter, v)``.

    Vectors are only expanded when they enlarge the span. ``detect`` is
    called on every kept vector; the first truthy result stops the search
    and is returned with the word that produced it. Breadth-first order
    makes that word a shortest one.

    Returns ``(space, word, finding)`` where ``word`` is None on success.
    """
    start = tuple(to_rational(x) for x in start)
    space = Subspace(len(start))
    queue = deque([(start, ())])
    while queue:
        v, word = queue.popleft()
        space, changed = span_insert(space, v)
        if not changed:
            continue
        if detect is not None:
            found = detect(v)
            if found:
                return space, word, found
        if limit is not None and space.rank > limit:
            raise AssertionError("closure exceeded its dimension bound")
        for a in letters:
            queue.append((step(a, v), word + (a,)))
    return space, None, None


# --------------------------------------------------------------------------
# convex hulls


@dataclass(frozen=True)
class HullResult:
    accepted: bool
    coeffs: tuple[Fraction, ...] | None = None


def hull_member(point: Sequence, generators: Sequence[Sequence]) -> HullResult:
    """Decide whether ``point`` is a convex combination of ``generators``."""
    if not generators:
        raise LPError("empty generator list")
    d = len(point)
    if any(len(g) != d for g in generators):
        raise LPError("generator dimension mismatch")
    k = len(generators)
    eq = [([to_rational(g[i]) for g in generators], to_rational(point[i])) for i in range(d)]
    eq.append(([ONE] * k, ONE))
    x = lp_feasible(k, eq=eq)
    if x is None:
        return HullResult(False)
    return HullResult(True, x)
