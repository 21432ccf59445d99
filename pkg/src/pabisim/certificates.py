"""Coinductive certificates for positive bisimilarity claims.

A certificate lists distribution pairs and, for every pair, action tag and
attacker vertex, a defender response together with a decomposition of the
resulting successor pair into certified pairs, identity pairs and
dead-padded certified pairs. Checking is purely arithmetic.

Text format (``#`` comments)::

    certificate <plain|late|dagger|distributed>
    sync a b c                                   # distributed only
    pair <i> <dist> <dist>
    respond <i> <tag> <vertex#> : defender { s: c@k ... } decompose { w * j  w * id  w * pad(j, p) }
    split <i> : decompose { ... }                # late, inconsistent pairs

Tags are actions, or comma-separated action sets for dagger semantics.
Choice ``k`` indexes the raw transitions of ``s`` for the tag, in model
order (for action sets: by action order, then model order).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .automaton import Automaton, Dist, parse_dist
from .errors import ModelError, RejectedInput
from .lifting import consistent
from .numerics import ONE, ZERO, fmt, hull_member, to_rational
from .refute import Game, check_semantics, set_literal

_TERM = re.compile(r"([^\s*]+)\s*\*\s*(id|pad\(\s*\d+\s*,\s*[^\s)]+\s*\)|\d+)")
_DEF = re.compile(r"([^\s:{}]+)\s*:\s*([^\s@]+)@(\d+)")


@dataclass(frozen=True)
class Term:
    weight: Fraction
    kind: str  # pair | id | pad
    ref: int | None = None
    pad: Fraction | None = None


@dataclass
class Response:
    pair: int
    tag: object
    vertex: int
    coeffs: list  # (state, coeff, choice)
    terms: list
    line: int


@dataclass
class Certificate:
    semantics: str
    sync: frozenset = frozenset()
    pairs: list = field(default_factory=list)  # (Dist, Dist)
    responses: list = field(default_factory=list)
    splits: dict = field(default_factory=dict)  # pair -> (terms, line)


@dataclass(frozen=True)
class CertResult:
    accepted: bool
    reason: str = ""
    obligations: int = 0


def _terms(text: str, no: int) -> list[Term]:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ModelError("decomposition must be enclosed in braces", no)
    body = body[1:-1]
    terms = []
    pos = 0
    for m in _TERM.finditer(body):
        gap = body[pos:m.start()].strip()
        if gap not in ("", "+"):
            raise ModelError(f"unexpected text {gap!r} in decomposition", no)
        pos = m.end()
        try:
            w = to_rational(m.group(1))
        except RejectedInput:
            raise ModelError(f"malformed rational {m.group(1)!r}", no) from None
        what = m.group(2)
        if what == "id":
            terms.append(Term(w, "id"))
        elif what.startswith("pad"):
            k, p = what[4:-1].split(",")
            try:
                terms.append(Term(w, "pad", int(k), to_rational(p.strip())))
            except RejectedInput:
                raise ModelError(f"malformed rational {p.strip()!r}", no) from None
        else:
            terms.append(Term(w, "pair", int(what)))
    if body[pos:].strip():
        raise ModelError(f"unexpected text {body[pos:].strip()!r} in decomposition", no)
    if not terms:
        raise ModelError("empty decomposition", no)
    return terms


def parse_certificate(text: str, A: Automaton | None = None) -> Certificate:
    cert = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "certificate":
            try:
                cert = Certificate(check_semantics(rest))
            except RejectedInput as exc:
                raise ModelError(str(exc), no) from None
            continue
        if cert is None:
            raise ModelError("certificate must start with 'certificate <semantics>'", no)
        if head == "sync":
            cert.sync = frozenset(rest.split())
        elif head == "pair":
            words = rest.split()
            if len(words) != 3:
                raise ModelError("expected: pair <i> <dist> <dist>", no)
            if int(words[0]) != len(cert.pairs):
                raise ModelError(f"pairs must be numbered consecutively from 0, got {words[0]}", no)
            cert.pairs.append((parse_dist(words[1], no), parse_dist(words[2], no)))
        elif head == "respond":
            m = re.match(r"^(\d+)\s+(\S+)\s+(\d+)\s*:\s*defender\s*\{(.*?)\}\s*decompose\s*(\{.*\})$", rest)
            if not m:
                raise ModelError("expected: respond <i> <tag> <vertex#> : defender {...} decompose {...}", no)
            tag = m.group(2)
            if cert.semantics == "dagger":
                tag = frozenset(tag.split(","))
            coeffs = []
            body = m.group(4)
            pos = 0
            for d in _DEF.finditer(body):
                if body[pos:d.start()].strip():
                    raise ModelError(f"unexpected text {body[pos:d.start()].strip()!r} in defender", no)
                pos = d.end()
                try:
                    coeffs.append((d.group(1), to_rational(d.group(2)), int(d.group(3))))
                except RejectedInput:
                    raise ModelError(f"malformed rational {d.group(2)!r}", no) from None
            if body[pos:].strip():
                raise ModelError(f"unexpected text {body[pos:].strip()!r} in defender", no)
            cert.responses.append(Response(int(m.group(1)), tag, int(m.group(3)), coeffs, _terms(m.group(5), no), no))
        elif head == "split":
            m = re.match(r"^(\d+)\s*:\s*decompose\s*(\{.*\})$", rest)
            if not m:
                raise ModelError("expected: split <i> : decompose {...}", no)
            cert.splits[int(m.group(1))] = (_terms(m.group(2), no), no)
        else:
            raise ModelError(f"unknown directive {head!r}", no)
    if cert is None:
        raise ModelError("empty certificate")
    return cert


def serialize_certificate(cert: Certificate, A: Automaton | None = None) -> str:
    out = [f"certificate {cert.semantics}"]
    if cert.sync:
        out.append("sync " + " ".join(sorted(cert.sync)))
    for i, (m, n) in enumerate(cert.pairs):
        out.append(f"pair {i} {m.literal()} {n.literal()}")

    def terms(ts):
        parts = []
        for t in ts:
            what = "id" if t.kind == "id" else (f"pad({t.ref}, {fmt(t.pad)})" if t.kind == "pad" else str(t.ref))
            parts.append(f"{fmt(t.weight)} * {what}")
        return "{ " + "  ".join(parts) + " }"

    for r in cert.responses:
        tag = r.tag if isinstance(r.tag, str) else ",".join(sorted(r.tag))
        if A is not None and not isinstance(r.tag, str):
            tag = set_literal(A, r.tag)
        dfn = " ".join(f"{s}: {fmt(c)}@{k}" for s, c, k in r.coeffs)
        out.append(f"respond {r.pair} {tag} {r.vertex} : defender {{ {dfn} }} decompose {terms(r.terms)}")
    for i, (ts, _) in sorted(cert.splits.items()):
        out.append(f"split {i} : decompose {terms(ts)}")
    return "\n".join(out) + "\n"


class _Reject(Exception):
    pass


def _recompose(game: Game, cert: Certificate, terms, left: Dist, right: Dist, where: str, need_consistent=False):
    if any(t.weight <= 0 for t in terms):
        raise _Reject(f"{where}: decomposition weights must be positive")
    if sum((t.weight for t in terms), ZERO) != 1:
        raise _Reject(f"{where}: decomposition weights sum to {fmt(sum((t.weight for t in terms), ZERO))}")
    ids = [t for t in terms if t.kind == "id"]
    if len(ids) > 1:
        raise _Reject(f"{where}: at most one id term is allowed")
    L: dict = {}
    R: dict = {}
    bot = game.A.bot
    for t in terms:
        if t.kind == "id":
            continue
        if t.ref is None or not 0 <= t.ref < len(cert.pairs):
            raise _Reject(f"{where}: reference to unknown pair {t.ref}")
        m, n = cert.pairs[t.ref]
        if need_consistent and not consistent(game.A, m):
            raise _Reject(f"{where}: split part {t.ref} is not consistent")
        if t.kind == "pad":
            if bot is None:
                raise _Reject(f"{where}: pad needs the dead state, which this automaton lacks")
            if not 0 <= t.pad <= 1:
                raise _Reject(f"{where}: pad probability outside [0, 1]")
            parts = ((t.pad, m, n), (1 - t.pad, Dist.dirac(bot), Dist.dirac(bot)))
        else:
            parts = ((ONE, m, n),)
        for p, a, b in parts:
            for s, q in a.items():
                L[s] = L.get(s, ZERO) + t.weight * p * q
            for s, q in b.items():
                R[s] = R.get(s, ZERO) + t.weight * p * q
    resid_l = {s: left[s] - L.get(s, ZERO) for s in set(left.support) | set(L)}
    resid_r = {s: right[s] - R.get(s, ZERO) for s in set(right.support) | set(R)}
    if ids:
        w = ids[0].weight
        wl = {s: v / w for s, v in resid_l.items() if v}
        wr = {s: v / w for s, v in resid_r.items() if v}
        if any(v < 0 for v in wl.values()) or wl != wr:
            raise _Reject(f"{where}: identity residual is not one distribution on both sides")
    elif any(resid_l.values()) or any(resid_r.values()):
        raise _Reject(f"{where}: decomposition does not reconstruct the successor pair")


def _signature(game: Game, m: Dist, n: Dist, acts: frozenset):
    union = sorted(set(m.support) | set(n.support))
    return tuple(game.A.enabled(s) & acts for s in union)


def check_certificate(A: Automaton, cert: Certificate, mu, nu) -> CertResult:
    """Accept iff every obligation of the certificate is discharged exactly."""
    game = Game(A, cert.semantics, cert.sync)
    B = game.A
    try:
        mu = mu if isinstance(mu, Dist) else B.dist(mu)
        nu = nu if isinstance(nu, Dist) else B.dist(nu)
        for m, n in cert.pairs:
            for d in (m, n):
                for s in d:
                    if s not in B.index:
                        raise _Reject(f"unknown state {s} in certificate pair")
        if mu == nu:
            return CertResult(True, "identical distributions", 0)
        pairs = cert.pairs
        if (mu, nu) not in pairs:
            raise _Reject("the queried pair is not listed")
        for i, (m, n) in enumerate(pairs):
            if m != n and (n, m) not in pairs:
                raise _Reject(f"pair {i}: relation is not symmetric (reverse pair missing)")
        table: dict = {}
        for r in cert.responses:
            if not 0 <= r.pair < len(pairs):
                raise _Reject(f"line {r.line}: unknown pair {r.pair}")
            if cert.semantics == "dagger":
                if not r.tag or not r.tag <= set(B.actions):
                    raise _Reject(f"line {r.line}: bad action set")
                m, n = pairs[r.pair]
                key = (r.pair, _signature(game, m, n, r.tag), r.vertex)
            else:
                if r.tag not in B.actions:
                    raise _Reject(f"line {r.line}: unknown action {r.tag}")
                key = (r.pair, r.tag, r.vertex)
            table.setdefault(key, r)
        count = 0
        for i, (m, n) in enumerate(pairs):
            if m == n:
                continue
            diff = game.obs.first_difference(m, n)
            if diff is not None:
                raise _Reject(f"pair {i}: {diff[0]} differs ({fmt(diff[1])} vs {fmt(diff[2])})")
            if cert.semantics == "late" and not consistent(B, m):
                if i not in cert.splits:
                    raise _Reject(f"pair {i}: inconsistent distribution needs a split")
                terms, _ = cert.splits[i]
                _recompose(game, cert, terms, m, n, f"pair {i} split", need_consistent=True)
                count += 1
            for tag in game.tags(m, n):
                P = game.polytope(m, tag)
                if P is None:
                    continue
                Q = game.polytope(n, tag)
                tag_text = tag if isinstance(tag, str) else "{" + set_literal(B, tag) + "}"
                if Q is None:
                    raise _Reject(f"pair {i} tag {tag_text}: defender cannot move")
                for v, x in enumerate(P.vertices):
                    where = f"pair {i} tag {tag_text} vertex {v}"
                    key = (i, _signature(game, m, n, tag) if cert.semantics == "dagger" else tag, v)
                    r = table.get(key)
                    if r is None:
                        raise _Reject(f"{where}: no response")
                    y = _defender(game, n, tag, r, where)
                    if cert.semantics == "distributed":
                        if y not in Q.vertices:
                            raise _Reject(f"{where}: defender response is not a distributed transition")
                    else:
                        support = sorted(set(y.support).union(*(q.support for q in Q.vertices)))
                        if not hull_member(y.vector(support), [q.vector(support) for q in Q.vertices]).accepted:
                            raise _Reject(f"{where}: defender response outside the successor polytope")
                    _recompose(game, cert, r.terms, x, y, where)
                    count += 1
        return CertResult(True, "all obligations discharged", count)
    except _Reject as exc:
        return CertResult(False, str(exc))


def _defender(game: Game, n: Dist, tag, r: Response, where: str) -> Dist:
    states = [s for s in n if game.raw_options(s, tag)]
    per: dict = {}
    for s, c, k in r.coeffs:
        if s not in states:
            raise _Reject(f"{where}: defender names state {s} outside the moving support")
        opts = game.raw_options(s, tag)
        if not 0 <= k < len(opts):
            raise _Reject(f"{where}: state {s} has no choice {k}")
        if c < 0 or c > 1:
            raise _Reject(f"{where}: coefficient outside [0, 1]")
        per.setdefault(s, []).append((c, opts[k]))
    for s in states:
        if sum((c for c, _ in per.get(s, ())), ZERO) != 1:
            raise _Reject(f"{where}: coefficients of state {s} do not sum to 1")
    norm = sum((n[s] for s in states), ZERO)
    acc: dict = {}
    for s in states:
        for c, d in per[s]:
            for t, q in d.items():
                acc[t] = acc.get(t, ZERO) + n[s] * c * q / norm
    return Dist(acc)
