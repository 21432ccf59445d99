"""Command-line interface.

Exit codes: 0 when a verdict was computed (and is not negative), 1 for a
negative verdict (refuted, different, rejected certificate), 2 for usage
or input errors. ``--format kv`` prints one ``key: value`` line per field.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import automaton as am
from .errors import PabisimError
from .numerics import fmt, to_rational


class Output:
    def __init__(self, mode: str):
        self.mode = mode
        self.fields: list[tuple[str, str]] = []
        self.lines: list[str] = []

    def put(self, key: str, value) -> None:
        if isinstance(value, Fraction):
            value = fmt(value)
        elif isinstance(value, bool):
            value = "yes" if value else "no"
        elif value is None:
            value = "-"
        self.fields.append((key, str(value)))

    def say(self, line: str) -> None:
        self.lines.append(line)

    def emit(self) -> None:
        if self.mode == "kv":
            for k, v in self.fields:
                print(f"{k}: {v}")
        else:
            for line in self.lines:
                print(line)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise PabisimError(f"cannot read {path}: {exc.strerror}") from None


def _model(path: str) -> am.Automaton:
    return am.parse_model(_read(path))


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _word(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    if "." in text or " " in text or "," in text:
        return tuple(w for w in text.replace(",", " ").replace(".", " ").split() if w)
    return tuple(text)


def _word_text(w) -> str:
    if w is None:
        return "-"
    if not w:
        return "(empty)"
    return "".join(w) if all(len(a) == 1 for a in w) else ".".join(w)


def _sync(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(x for x in text.replace(",", " ").split() if x)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise PabisimError(f"--{n} is required here")


# --------------------------------------------------------------------------
# subcommands


def cmd_check(args, out: Output) -> int:
    from .bisim import dist_bisim_det, prob_bisim
    from .certificates import check_certificate, parse_certificate
    from .refute import dist_bisim_refute, game_automaton, render

    A = _model(args.model)
    rel = args.rel
    if rel == "pbisim":
        P = prob_bisim(A)
        out.put("blocks", len(P.blocks))
        for i, b in enumerate(P.blocks):
            out.put(f"block{i}", " ".join(b))
            out.say("{" + ", ".join(b) + "}")
        if args.mu and args.nu:
            s, t = args.mu, args.nu
            same = P.same(s, t)
            out.put("verdict", "bisimilar" if same else "separated")
            out.say(f"{s} {'~' if same else '!~'} {t}")
            return 0 if same else 1
        return 0
    _need(args, "mu", "nu")
    if rel == "dist" and not args.cert:
        B = am.ensure_extended(A)
        if am.classify(B).deterministic:
            r = dist_bisim_det(A, args.mu, args.nu)
            out.put("verdict", "bisimilar" if r.bisimilar else "different")
            out.put("word", _word_text(r.word))
            out.put("basis-rank", r.basis.rank)
            out.say("bisimilar" if r.bisimilar else f"different (word {_word_text(r.word)})")
            return 0 if r.bisimilar else 1
    sem = "plain" if rel == "dist" else rel
    sync = _sync(args.sync)
    if args.cert:
        cert = parse_certificate(_read(args.cert))
        if cert.semantics != sem:
            raise PabisimError(f"certificate is for {cert.semantics} semantics, not {sem}")
        r = check_certificate(A, cert, args.mu, args.nu)
        out.put("verdict", "certificate-accepted" if r.accepted else "certificate-rejected")
        out.put("reason", r.reason)
        out.put("obligations", r.obligations)
        out.say(("accepted: " if r.accepted else "rejected: ") + r.reason)
        return 0 if r.accepted else 1
    r = dist_bisim_refute(A, args.mu, args.nu, sem, args.depth, sync)
    out.put("verdict", r.status)
    out.put("depth", r.depth if r.refuted else args.depth)
    out.put("exact", r.exact if r.refuted else None)
    out.say(r.status + (f" at depth {r.depth}" if r.refuted else ""))
    if r.refuted:
        for line in render(game_automaton(A, sem), r.tree):
            out.say("  " + line)
        out.put("counterexample", " | ".join(l.strip() for l in render(game_automaton(A, sem), r.tree)))
    return 1 if r.refuted else 0


def cmd_metric(args, out: Output) -> int:
    from .bisim import approx_bisim_query
    from .logic import format_formula
    from .metrics import Df_bounds, Df_det, d_AP, lift_metric, state_metric_df
    from .reactive import equivalence_metric_Dd

    gamma, tol = to_rational(args.gamma), to_rational(args.tol)
    if args.kind == "dd":
        if not args.other:
            raise PabisimError("metric dd needs two models")
        r = equivalence_metric_Dd(_model(args.model), _model(args.other), gamma, tol, args.depth or 64)
        out.put("value", r.value)
        out.put("status", r.status)
        out.put("word", _word_text(r.word))
        out.say(f"{fmt(r.value)} {r.status}")
        return 0
    A = _model(args.model)
    if args.kind == "statedf":
        B = am.ensure_extended(A)
        T = state_metric_df(B, gamma, tol, args.max_iter)
        out.put("status", T.status)
        out.put("iterations", T.iterations)
        out.say(f"{T.status} after {T.iterations} iterations")
        for i, s in enumerate(T.states):
            for t in T.states[i + 1:]:
                out.put(f"d({s},{t})", T.get(s, t))
                out.say(f"d({s},{t}) = {fmt(T.get(s, t))}")
        if args.mu and args.nu:
            v = lift_metric(T, B.dist(args.mu), B.dist(args.nu))
            out.put("lifted", v)
            out.say(f"lifted {fmt(v)}")
        return 0
    _need(args, "mu", "nu")
    B = am.ensure_extended(A)
    if args.kind == "dap":
        v = d_AP(B, B.dist(args.mu), B.dist(args.nu))
        out.put("value", v)
        out.say(fmt(v))
        return 0
    if args.kind == "approx":
        _need(args, "eps")
        r = approx_bisim_query(A, args.mu, args.nu, args.eps, gamma, tol, args.depth or 6)
        out.put("verdict", r.verdict)
        out.put("lower", r.lower)
        out.put("upper", r.upper)
        out.put("status", r.status)
        out.say(f"{r.verdict} (D_f in [{fmt(r.lower)}, {fmt(r.upper)}], {r.status})")
        return 1 if r.verdict == "no" else 0
    if am.classify(B).deterministic:
        r = Df_det(A, args.mu, args.nu, gamma, tol)
        out.put("value", r.value)
        out.put("status", r.status)
        out.put("upper", r.upper)
        out.put("word", _word_text(r.word))
        out.say(f"{fmt(r.value)} {r.status}")
        return 0
    b = Df_bounds(A, args.mu, args.nu, gamma, args.depth or 4, tol)
    out.put("lower", b.lower)
    out.put("upper", b.upper)
    out.put("status", "heuristic-upper" if b.heuristic else "bounds")
    out.put("witness", format_formula(b.lower_witness) if b.lower_witness is not None else None)
    out.say(f"[{fmt(b.lower)}, {fmt(b.upper)}]" + (" heuristic-upper" if b.heuristic else ""))
    return 0


def cmd_equiv(args, out: Output) -> int:
    from .reactive import doyen_bisim, eps_empty_search, rabin_equiv

    A = _model(args.model)
    if args.eps_empty is not None:
        w = eps_empty_search(A, args.eps_empty, args.maxlen)
        out.put("verdict", "nonempty" if w is not None else "empty-up-to-maxlen")
        out.put("word", _word_text(w))
        out.say(f"witness {_word_text(w)}" if w is not None else f"no word up to length {args.maxlen}")
        return 0
    if args.other:
        r = rabin_equiv(A, _model(args.other))
    else:
        _need(args, "mu", "nu")
        r = doyen_bisim(A, A.dist(args.mu), A.dist(args.nu))
    out.put("verdict", "equivalent" if r.equivalent else "different")
    out.put("word", _word_text(r.word))
    out.put("basis-rank", r.basis.rank)
    out.say("equivalent" if r.equivalent else f"different (word {_word_text(r.word)})")
    return 0 if r.equivalent else 1


def cmd_trace(args, out: Output) -> int:
    from .traces import best_word, max_word_prob, prio_equiv_bounded, trace_dist_equiv_bounded

    A = _model(args.model)
    target = args.target.replace(",", " ").split() if args.target else None
    if args.kind == "max-word":
        _need(args, "mu")
        if args.word is None:
            v, w = best_word(A, A.dist(args.mu), args.maxlen, target)
            out.put("value", v)
            out.put("word", _word_text(w))
            out.say(f"{fmt(v)} via {_word_text(w)}")
        else:
            v = max_word_prob(A, A.dist(args.mu), _word(args.word), target)
            out.put("value", v)
            out.say(fmt(v))
        return 0
    _need(args, "mu", "nu")
    if args.kind == "prio":
        r = prio_equiv_bounded(A, args.mu, args.nu, args.maxlen)
        out.put("verdict", f"equal-up-to-{args.maxlen}" if r.equal else "different")
        out.put("word", _word_text(r.word))
        out.put("left", r.left)
        out.put("right", r.right)
        out.say(f"equal up to {args.maxlen}" if r.equal else
                f"different at {_word_text(r.word)}: {fmt(r.left)} vs {fmt(r.right)}")
        return 0 if r.equal else 1
    r = trace_dist_equiv_bounded(A, args.mu, args.nu, args.k)
    out.put("verdict", f"equal-up-to-{args.k}" if r.equal else "different")
    if not r.equal:
        out.put("side", r.side)
        vec = ", ".join(f"{_word_text(w)}={fmt(p)}" for w, p in sorted(r.witness.items(), key=lambda x: (len(x[0]), x[0])))
        out.put("witness", vec)
        out.say(f"different: {r.side} scheduler with trace vector {{{vec}}} is outside the other hull")
    else:
        out.say(f"equal up to {args.k}")
    return 0 if r.equal else 1


def cmd_logic(args, out: Output) -> int:
    from .logic import distance_lb, eval_affine, eval_det, format_formula, parse_formula

    A = _model(args.model)
    gamma = to_rational(args.gamma)
    if args.kind == "eval":
        _need(args, "formula", "mu")
        phi = parse_formula(args.formula)
        v = (eval_affine if args.affine else eval_det)(A, phi, args.mu, gamma)
        out.put("formula", format_formula(phi))
        out.put("value", v)
        out.say(fmt(v))
        return 0
    _need(args, "mu", "nu")
    b, w = distance_lb(A, args.mu, args.nu, gamma, args.depth)
    out.put("bound", b)
    out.put("witness", format_formula(w) if w is not None else None)
    out.say(f"{fmt(b)}" + (f" via {format_formula(w)}" if w is not None else ""))
    return 0


def cmd_compose(args, out: Output) -> int:
    C = am.parallel_compose(_model(args.model), _model(args.other), _sync(args.sync))
    _write(am.serialize_model(C), args.output)
    return 0


def cmd_gen(args, out: Output) -> int:
    from . import generators as g

    if args.kind == "clique":
        text = am.serialize_model(g.gen_clique(g.parse_graph(_read(args.input))))
    elif args.kind == "gadget":
        B, sink = g.gen_emptiness_gadget(_model(args.input))
        text = am.serialize_model(B)
    elif args.kind == "random":
        params = {}
        for item in args.param or ():
            k, _, v = item.partition("=")
            params[k.strip()] = v.lower() in ("true", "yes", "1") if k.strip() == "deterministic" else v
        for k in ("n_states", "n_actions", "max_choices", "label_classes", "max_support"):
            if k in params:
                params[k] = int(params[k])
        for k in ("reactive", "input_enabled"):
            if k in params:
                params[k] = str(params[k]).lower() in ("true", "yes", "1")
        text = am.serialize_model(g.gen_random(params, args.seed))
    else:
        c = g.corpus()
        name = args.input
        if name not in c:
            raise PabisimError(f"unknown fixture {name}; known: {', '.join(sorted(c))}")
        fx = c[name](args.eps1, args.eps2) if name == "exam1" else c[name]
        text = fx.model
    _write(text, args.output)
    return 0


def cmd_classify(args, out: Output) -> int:
    A = _model(args.model)
    r = am.classify(A)
    out.put("input-enabled", r.input_enabled)
    out.put("deterministic", r.deterministic)
    out.put("reactive", r.reactive)
    kinds = [k for k, v in (("input-enabled", r.input_enabled), ("deterministic", r.deterministic),
                            ("reactive", r.reactive)) if v]
    out.say(" ".join(kinds) if kinds else "general")
    return 0


def cmd_extend(args, out: Output) -> int:
    _write(am.serialize_model(am.extend_input_enabled(_model(args.model))), args.output)
    return 0


def cmd_verify_word(args, out: Output) -> int:
    """Re-evaluate a witness word; exit 0 when it does distinguish."""
    from .bisim import _det_steps
    from .automaton import Dist, class_masses
    from .reactive import to_matrix_form
    from .traces import max_word_prob

    A = _model(args.model)
    w = _word(args.word)
    if args.other:
        f1, f2 = to_matrix_form(A), to_matrix_form(_model(args.other))
        for a in w:
            if a not in f1.actions:
                raise PabisimError(f"unknown action {a}")
        left, right = f1.word_value(w), f2.word_value(w)
    else:
        _need(args, "mu", "nu")
        if args.kind == "max":
            left, right = max_word_prob(A, args.mu, w), max_word_prob(A, args.nu, w)
        else:
            B = am.ensure_extended(A)
            steps = _det_steps(B)
            m, n = B.dist(args.mu), B.dist(args.nu)
            for a in w:
                if a not in B.actions:
                    raise PabisimError(f"unknown action {a}")
                m = Dist.mix((p, steps[a][s]) for s, p in m.items())
                n = Dist.mix((p, steps[a][s]) for s, p in n.items())
            cm, cn = class_masses(B, m), class_masses(B, n)
            differs = {k: v for k, v in cm.items() if v} != {k: v for k, v in cn.items() if v}
            out.put("verdict", "distinguishes" if differs else "no-difference")
            out.say("distinguishes" if differs else "no difference")
            return 0 if differs else 1
    out.put("left", left)
    out.put("right", right)
    differs = left != right
    out.put("verdict", "distinguishes" if differs else "no-difference")
    out.say(f"{fmt(left)} vs {fmt(right)}: " + ("distinguishes" if differs else "no difference"))
    return 0 if differs else 1


def cmd_check_cert(args, out: Output) -> int:
    from .certificates import check_certificate, parse_certificate

    A = _model(args.model)
    r = check_certificate(A, parse_certificate(_read(args.cert)), args.mu, args.nu)
    out.put("verdict", "certificate-accepted" if r.accepted else "certificate-rejected")
    out.put("reason", r.reason)
    out.put("obligations", r.obligations)
    out.say(("accepted: " if r.accepted else "rejected: ") + r.reason)
    return 0 if r.accepted else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pabisim", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("human", "kv"), default="human")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, two=False):
        sp.add_argument("model")
        if two:
            sp.add_argument("other", nargs="?")
        sp.add_argument("--mu")
        sp.add_argument("--nu")

    sp = sub.add_parser("check", help="bisimilarity queries")
    common(sp)
    sp.add_argument("--rel", required=True, choices=("pbisim", "dist", "plain", "late", "dagger", "distributed"))
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--cert")
    sp.add_argument("--sync")
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("metric", help="distances")
    sp.add_argument("kind", choices=("df", "statedf", "dd", "dap", "approx"))
    common(sp, two=True)
    sp.add_argument("--gamma", default="1")
    sp.add_argument("--tol", default="1/1000")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--eps")
    sp.add_argument("--max-iter", type=int, default=1000)
    sp.set_defaults(run=cmd_metric)

    sp = sub.add_parser("equiv", help="language equivalence of reactive automata")
    common(sp, two=True)
    sp.add_argument("--eps-empty")
    sp.add_argument("--maxlen", type=int, default=8)
    sp.set_defaults(run=cmd_equiv)

    sp = sub.add_parser("trace", help="word probabilities and trace equivalences")
    sp.add_argument("kind", choices=("max-word", "prio", "tracedist"))
    common(sp)
    sp.add_argument("--word")
    sp.add_argument("--target")
    sp.add_argument("--maxlen", type=int, default=3)
    sp.add_argument("-k", type=int, default=2)
    sp.set_defaults(run=cmd_trace)

    sp = sub.add_parser("logic", help="formula evaluation and distance lower bounds")
    sp.add_argument("kind", choices=("eval", "distance-lb"))
    common(sp)
    sp.add_argument("--formula")
    sp.add_argument("--gamma", default="1")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--affine", action="store_true")
    sp.set_defaults(run=cmd_logic)

    sp = sub.add_parser("compose", help="parallel composition")
    sp.add_argument("model")
    sp.add_argument("other")
    sp.add_argument("--sync", default="")
    sp.add_argument("-o", "--output")
    sp.set_defaults(run=cmd_compose)

    sp = sub.add_parser("gen", help="generators")
    sp.add_argument("kind", choices=("clique", "gadget", "random", "corpus"))
    sp.add_argument("input", nargs="?")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--param", action="append")
    sp.add_argument("--eps1", default="0")
    sp.add_argument("--eps2", default="0")
    sp.add_argument("-o", "--output")
    sp.set_defaults(run=cmd_gen)

    sp = sub.add_parser("classify", help="structural classification")
    sp.add_argument("model")
    sp.set_defaults(run=cmd_classify)

    sp = sub.add_parser("extend", help="input-enabled extension")
    sp.add_argument("model")
    sp.add_argument("-o", "--output")
    sp.set_defaults(run=cmd_extend)

    sp = sub.add_parser("verify-word", help="re-check a distinguishing word")
    common(sp, two=True)
    sp.add_argument("--word", required=True)
    sp.add_argument("--kind", choices=("max", "labels"), default="max")
    sp.set_defaults(run=cmd_verify_word)

    sp = sub.add_parser("check-cert", help="check a bisimulation certificate")
    sp.add_argument("model")
    sp.add_argument("cert")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.set_defaults(run=cmd_check_cert)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "gen" and args.kind != "random" and not args.input:
        print(f"pabisim gen {args.kind}: missing input", file=sys.stderr)
        return 2
    out = Output(args.format)
    try:
        code = args.run(args, out)
    except (PabisimError, ValueError) as exc:
        print(f"pabisim {args.command}: {exc}", file=sys.stderr)
        return 2
    out.emit()
    return code


def main(argv=None) -> int:
    return run(argv)
