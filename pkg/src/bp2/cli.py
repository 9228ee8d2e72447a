"""Command-line front end: ``bp2 <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 when the computation
finishes but the property asked about fails (not positive, identity
violated, and so on).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass

from . import gns, kernel, partitions, semigroup, weights, wick
from .kernel import fmt

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE = 0, 1, 2
DEFAULT_MAX_POINTS = 12


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    weight: str | None = None
    output: str = "text"
    exact: bool = True
    tol: float = 1e-9
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        if self.output not in ("text", "json", "csv"):
            raise UsageError(f"unknown output mode {self.output!r}")
        if not self.exact and not self.tol > 0:
            raise UsageError("--tol must be > 0 in float mode")
        if self.max_points < 0:
            raise UsageError("BP2_MAX_POINTS must be >= 0")


def max_points() -> int:
    raw = os.environ.get("BP2_MAX_POINTS", str(DEFAULT_MAX_POINTS))
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BP2_MAX_POINTS must be an integer, got {raw!r}") from None


def _cap(points: int, cfg: RunConfig, what: str):
    if points > cfg.max_points:
        raise UsageError(f"truncation overflow: {what} needs {points} points, "
                         f"cap is {cfg.max_points} (BP2_MAX_POINTS)")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- output helpers -------------------------------------------------------------------

class Out:
    def __init__(self, cfg: RunConfig, stream):
        self.cfg = cfg
        self.stream = stream

    def line(self, text: str = ""):
        self.stream.write(text + "\n")

    def json(self, obj):
        self.stream.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")

    def table(self, header, rows):
        if self.cfg.output == "json":
            self.json([dict(zip(header, r)) for r in rows])
        elif self.cfg.output == "csv":
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(header)
            wr.writerows(rows)
            self.stream.write(buf.getvalue())
        else:
            for r in rows:
                self.line(" ".join(str(x) for x in r))

    def record(self, obj: dict, text: str | None = None):
        if self.cfg.output == "text" and text is not None:
            self.line(text)
        elif self.cfg.output == "csv":
            self.table(list(obj), [[_flat(v) for v in obj.values()]])
        else:
            self.json(obj)


def _flat(v):
    return json.dumps(v, ensure_ascii=False) if isinstance(v, (list, dict)) else v


def _weight(cfg: RunConfig) -> weights.Weight:
    if cfg.weight is None:
        raise UsageError("--weight is required")
    return weights.parse_weight(cfg.weight)


def _matrix_json(m) -> list[list[str]]:
    return [[fmt(x) for x in row] for row in m.rows]


def _parse_element(text: str):
    """A partition literal ``(1,3)(2,4)`` or a diagram literal ``BP{...}``."""
    if text.strip().startswith("BP"):
        return semigroup.parse_diagram(text)
    return partitions.PairPartition.parse(text)


# --- subcommands -------------------------------------------------------------------

def cmd_enumerate(args, cfg, out):
    _cap(args.n_points, cfg, "enumerate")
    rows = []
    for v in partitions.enumerate_partitions(args.n_points):
        npairs, nblocks, ncross = partitions.pair_stats(v.pairs)
        if args.noncrossing and ncross:
            continue
        rows.append([str(v), ncross, nblocks])
    out.table(["partition", "crossings", "blocks"], rows)
    return EXIT_OK


def cmd_stats(args, cfg, out):
    v = partitions.PairPartition.parse(args.partition)
    _cap(v.n_points, cfg, "stats")
    dec = partitions.blocks(v)
    obj = {"partition": str(v), "pairs": len(v), "crossings": partitions.crossings(v),
           "blocks": len(dec), "block_pairs": [[str(v.pairs[i]).replace(" ", "") for i in b]
                                               for b in dec.blocks]}
    out.record(obj, f"crossings={obj['crossings']} blocks={obj['blocks']}")
    return EXIT_OK


def cmd_eval(args, cfg, out):
    w = _weight(cfg)
    x = _parse_element(args.element)
    if isinstance(x, semigroup.Diagram):
        _cap(x.m, cfg, "eval")
        value = weights.evaluate_hat(w, x)
    else:
        _cap(x.n_points, cfg, "eval")
        value = weights.evaluate(w, x)
    out.record({"weight": str(w), "element": str(x), "value": fmt(value)}, fmt(value))
    return EXIT_OK


def cmd_moment(args, cfg, out):
    w = _weight(cfg)
    if (args.word is None) == (args.pattern is None):
        raise UsageError("give exactly one of --word (Gaussian) or --pattern (Fock)")
    if args.word is not None:
        labels = wick.parse_field_word(args.word)
        _cap(len(labels), cfg, "moment")
        kind, value, text = "gaussian", wick.gaussian_moment(w, labels), args.word
    else:
        pattern = wick.parse_pattern(args.pattern)
        _cap(len(pattern), cfg, "moment")
        kind, value, text = "fock", wick.fock_moment(w, pattern), wick.pattern_str(pattern)
    out.record({"weight": str(w), "state": kind, "word": text, "value": fmt(value)}, fmt(value))
    return EXIT_OK


def cmd_wick(args, cfg, out):
    if args.wick_cmd == "transform":
        mono = wick.parse_monomial(args.monomial)
        _cap(mono.n_points, cfg, "wick transform")
        expr = wick.wick_from_moments(mono) if args.to == "wick" else wick.moments_from_wick(mono)
        if cfg.output == "text":
            out.line(str(expr))
        else:
            out.table(["kind", "monomial", "coefficient"],
                      [[expr.kind, str(m), fmt(c)] for m, c in expr.terms])
        return EXIT_OK
    w = _weight(cfg)
    m1, m2 = wick.parse_monomial(args.left), wick.parse_monomial(args.right)
    _cap(m1.n_points + m2.n_points, cfg, "wick inner")
    if args.kind == "psi":
        value = wick.wick_inner_product(w, m1, m2)
    else:
        value = wick.moment_inner_product(w, m1, m2)
    out.record({"weight": str(w), "kind": args.kind, "left": str(m1), "right": str(m2),
                "value": fmt(value)}, fmt(value))
    return EXIT_OK


def _sector_args(args, cfg):
    if args.legs < 0 or args.max_pairs < 0:
        raise UsageError("--legs and --max-pairs must be >= 0")
    _cap(args.legs + 2 * args.max_pairs, cfg, "sector basis")


def cmd_gram(args, cfg, out):
    w = _weight(cfg)
    _sector_args(args, cfg)
    model = gns.gram_model(w, args.legs, args.max_pairs)
    obj = {"weight": str(w), "legs": args.legs, "max_pairs": args.max_pairs,
           "basis": [str(d) for d in model.basis], "gram": _matrix_json(model.gram),
           "rank": model.certificate.rank, "psd": model.certificate.psd}
    if cfg.output == "text":
        out.line(f"basis size {model.size}, rank {model.certificate.rank}, "
                 f"psd {str(model.certificate.psd).lower()}")
        for d, row in zip(model.basis, model.gram.rows):
            out.line(f"{d}  " + " ".join(fmt(x) for x in row))
    elif cfg.output == "csv":
        out.table(["basis"] + [str(i) for i in range(model.size)],
                  [[str(d)] + [fmt(x) for x in row] for d, row in zip(model.basis, model.gram.rows)])
    else:
        out.json(obj)
    return EXIT_OK


def cmd_psd(args, cfg, out):
    w = _weight(cfg)
    _sector_args(args, cfg)
    g = gns.gram_matrix(w, args.legs, args.max_pairs)
    head = {"weight": str(w), "legs": args.legs, "max_pairs": args.max_pairs, "size": g.nrows}
    if cfg.exact:
        cert = kernel.ldlt_psd_certificate(g)
        obj = {**head, "mode": "exact", "certificate": "PSD" if cert.psd else "INDEFINITE",
               **cert.to_json()}
        ok = cert.psd
    else:
        eigs = kernel.symmetric_eigs(g, tol=min(cfg.tol, 1e-12))
        ok = not eigs or eigs[-1] >= -cfg.tol
        rank = sum(1 for x in eigs if x > cfg.tol)
        obj = {**head, "mode": "float", "tol": cfg.tol, "certificate": "PSD" if ok else "NOT-POSITIVE",
               "psd": ok, "rank": rank, "min_eigenvalue": eigs[-1] if eigs else 0.0}
    out.json(obj) if cfg.output != "csv" else out.record(obj)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_theta(args, cfg, out):
    w = _weight(cfg)
    _sector_args(args, cfg)
    tol = cfg.tol
    try:
        if args.table:
            reps = gns.theta_table(w, args.legs, range(args.max_pairs + 1), tol)
            obj = {"weight": str(w), "legs": args.legs,
                   "table": [{"max_pairs": r.max_pairs, **r.to_json()} for r in reps]}
            rep = reps[-1]
        else:
            rep = gns.theta_matrix(w, args.legs, args.max_pairs, tol)
            obj = {"weight": str(w), "legs": args.legs, "max_pairs": args.max_pairs, **rep.to_json()}
    except gns.NotPositiveError as exc:
        out.json({"weight": str(w), "result": "NOT-POSITIVE", "reason": str(exc)})
        return EXIT_NEGATIVE
    except gns.GNSError as exc:
        out.json({"weight": str(w), "result": "NOT-TRACIAL", "reason": str(exc)})
        return EXIT_NEGATIVE
    out.json(obj)
    unique = rep.eig1_multiplicity == 1 and rep.theta_fixes_xi
    return EXIT_OK if unique else EXIT_NEGATIVE


def cmd_standard_form(args, cfg, out):
    v = partitions.PairPartition.parse(args.partition)
    _cap(v.n_points, cfg, "standard-form")
    word = semigroup.standard_form(v)
    rebuilt = semigroup.evaluate_word(word)
    obj = {"partition": str(v), "word": semigroup.word_to_str(word),
           "rebuilds": rebuilt == semigroup.Diagram.from_partition(v)}
    ok = obj["rebuilds"]
    if cfg.weight is not None:
        w = _weight(cfg)
        legs = max(1, _max_open_legs(v))
        ev = gns.WordEvaluator(gns.operator_chain(w, legs, args.max_pairs))
        got = ev.vacuum_expectation(word)
        want = weights.evaluate(w, v)
        obj.update({"weight": str(w), "expectation": fmt(got), "t": fmt(want), "agree": got == want})
        ok = ok and got == want
    out.record(obj, obj["word"] if cfg.weight is None else
               f"{obj['word']}\n<xi, word xi> = {obj['expectation']}  t = {obj['t']}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def _max_open_legs(v) -> int:
    partner = v.partner()
    open_, best = 0, 0
    for x in range(v.n_points, 0, -1):
        open_ += -1 if partner[x] > x else 1
        best = max(best, open_)
    return best


def cmd_fock_sim(args, cfg, out):
    w = _weight(cfg)
    if args.dim < 1 or args.levels < 0:
        raise UsageError("--dim must be >= 1 and --levels >= 0")
    _cap(args.levels + 2 * args.max_pairs, cfg, "fock-sim sector")
    model = gns.fock_model(w, args.dim, args.levels, args.max_pairs)
    head = {"weight": str(w), "dim": args.dim, "levels": args.levels, "max_pairs": args.max_pairs,
            "ranks": [model.rank(n) for n in range(args.levels + 1)]}
    if args.pattern is not None:
        pattern = wick.parse_pattern(args.pattern)
        pattern = tuple(wick.Op(op.kind, tuple(op.label) + (kernel.ZERO,) * (args.dim - len(op.label)))
                        for op in pattern)
        if any(len(op.label) > args.dim for op in pattern):
            raise UsageError(f"labels do not fit in dimension {args.dim}")
        got = model.vacuum_expectation(pattern)
        want = wick.fock_moment(w, pattern)
        obj = {**head, "pattern": wick.pattern_str(pattern), "matrix_model": fmt(got),
               "moment_formula": fmt(want), "agree": got == want}
        out.record(obj, fmt(got) if got == want else f"{fmt(got)} != {fmt(want)}")
        return EXIT_OK if got == want else EXIT_NEGATIVE
    rep = gns.creation_bounds(model, n_random=args.random, seed=args.seed)
    out.json({**head, "bounds": rep.to_json()}) if cfg.output != "text" else \
        out.line(f"bounds {'hold' if rep.holds else 'FAIL'}: checked={rep.checked} "
                 f"max_create={fmt(rep.max_ratio_create)} max_annihilate={fmt(rep.max_ratio_annihilate)}")
    return EXIT_OK if rep.holds else EXIT_NEGATIVE


def cmd_report(args, cfg, out):
    w = _weight(cfg)
    _sector_args(args, cfg)
    rep = gns.sector_report(w, args.legs, args.max_pairs, theta=not args.no_theta)
    out.json(rep)
    return EXIT_OK if rep["psd"] is True else EXIT_NEGATIVE


# --- check suites ------------------------------------------------------------------

def _suite_partitions(cfg, rng):
    n = min(cfg.max_points, 10)
    res = {}
    res["double_factorial_counts"] = all(len(partitions.enumerate_partitions(m)) == partitions.double_factorial(m - 1)
                                         for m in range(2, n + 1, 2))
    res["catalan_noncrossing"] = all(
        sum(1 for v in partitions.enumerate_partitions(2 * k) if partitions.crossings(v) == 0)
        == partitions.catalan(k) for k in range(1, n // 2 + 1))
    res["rotation_preserves_stats"] = all(
        partitions.pair_stats(v.pairs) == partitions.pair_stats(partitions.rotate(v).pairs)
        for m in range(2, min(n, 8) + 1, 2) for v in partitions.enumerate_partitions(m))
    return res


def _random_diagram(rng, max_m=6):
    m = rng.randint(0, max_m)
    pts = list(range(1, m + 1))
    rng.shuffle(pts)
    npairs = rng.randint(0, m // 2)
    pairs = [tuple(sorted(pts[2 * i:2 * i + 2])) for i in range(npairs)]
    rest = pts[2 * npairs:]
    cut = rng.randint(0, len(rest))
    return semigroup.Diagram(m, tuple(sorted(pairs)), tuple(rest[:cut]), tuple(rest[cut:]))


def _suite_semigroup(cfg, rng):
    mul, inv = semigroup.multiply, semigroup.involution
    triples = [(_random_diagram(rng), _random_diagram(rng), _random_diagram(rng)) for _ in range(200)]
    res = {"associativity": all(mul(mul(a, b), c) == mul(a, mul(b, c)) for a, b, c in triples),
           "involution_antihomomorphism": all(inv(mul(a, b)) == mul(inv(b), inv(a)) for a, b, _ in triples),
           "involution_involutive": all(inv(inv(a)) == a for a, _, _ in triples),
           "literal_round_trip": all(semigroup.parse_diagram(str(a)) == a for a, _, _ in triples)}
    res["standard_form_round_trip"] = all(
        semigroup.evaluate_word(semigroup.standard_form(v)) == semigroup.Diagram.from_partition(v)
        for m in range(0, min(cfg.max_points, 8) + 1, 2) for v in partitions.enumerate_partitions(m))
    return res


def _suite_weights(cfg, rng):
    w = weights.parse_weight(cfg.weight or "q:1/2")
    n = min(cfg.max_points, 8)
    return {f"multiplicative_upto_{n}": weights.is_multiplicative_upto(w, n).to_json(),
            f"tracial_upto_{n}": weights.is_rotation_invariant_upto(w, n).to_json()}


def _suite_wick(cfg, rng):
    w = weights.parse_weight(cfg.weight or "q:1/2")
    fam = wick.wick_family(1, 2, 2)
    ok = True
    for _ in range(40):
        mono = rng.choice(fam)
        back = wick.convert(wick.wick_from_moments(mono))
        ok = ok and back == wick.WickExpression.build("Psi", [(mono, 1)])
    g = wick.gaussian_gram(w, fam)
    f = wick.fock_gram(w, [wick.psi_pattern(m) for m in fam])
    return {"moebius_round_trip": ok, "gaussian_equals_fock_gram": g == f,
            "gram_symmetric": g.is_symmetric()}


def _suite_gns(cfg, rng):
    w = weights.parse_weight(cfg.weight or "q:1/2")
    res = {"j_isometry_sector_2": gns.j_isometry_check(w, 2, 1).to_json()}
    cert = gns.gram_model(w, 2, 1).certificate
    res["gram_psd_sector_2"] = True if cert.psd else {"witness": [fmt(x) for x in cert.witness]}
    if w.family == weights.BLOCK_Q_TAG:
        res["theta_quadratic_identity"] = gns.theta_quadratic_identity(w, 2, 1).to_json()
    return res


def _suite_kernel(cfg, rng):
    ok_agree = True
    for _ in range(60):
        n = rng.randint(1, 4)
        a = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        m = [[sum(a[k][i] * a[k][j] for k in range(n)) - (rng.randint(0, 1) if i == j else 0)
              for j in range(n)] for i in range(n)]
        cert = kernel.ldlt_psd_certificate(m)
        if cert.psd != kernel.float_psd(kernel.Matrix(m), 1e-9):
            ok_agree = False
        if not cert.psd and kernel.Matrix(m).quad(cert.witness) >= 0:
            ok_agree = False
    return {"exact_and_float_agree": ok_agree}


SUITES = {"partitions": _suite_partitions, "semigroup": _suite_semigroup, "weights": _suite_weights,
          "wick": _suite_wick, "gns": _suite_gns, "kernel": _suite_kernel}


def cmd_check(args, cfg, out):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = {}
    for name in names:
        rng = random.Random(args.seed)
        for key, val in SUITES[name](cfg, rng).items():
            results[f"{name}.{key}"] = "pass" if val is True or val == "pass" else (val or "fail")
    failed = [k for k, v in results.items() if v != "pass"]
    if cfg.output == "text":
        for k, v in results.items():
            out.line(f"{k}: {v if v == 'pass' else 'FAIL ' + json.dumps(v)}")
    else:
        out.table(["check", "result"], [[k, _flat(v)] for k, v in results.items()])
    return EXIT_NEGATIVE if failed else EXIT_OK


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--weight", help="bosonic | free | fermionic | q:<r> | qcr:<r>")
    common.add_argument("--format", dest="output", choices=["text", "json", "csv"], default=None)
    common.add_argument("--json", dest="output", action="store_const", const="json")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=True)
    mode.add_argument("--float", dest="exact", action="store_false")
    common.add_argument("--tol", type=float, default=1e-9)

    p = _Parser(prog="bp2", description="Pair partitions, Wick calculus and Gram positivity.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("enumerate", parents=[common], help="list pair partitions")
    s.add_argument("n_points", type=int)
    s.add_argument("--noncrossing", action="store_true")

    s = sub.add_parser("stats", parents=[common], help="crossings and blocks")
    s.add_argument("partition")

    s = sub.add_parser("eval", parents=[common], help="t(V) or t-hat of a diagram")
    s.add_argument("element")

    s = sub.add_parser("moment", parents=[common], help="Gaussian or Fock vacuum moment")
    s.add_argument("--word", help='field word, e.g. "w:e1 w:e1"')
    s.add_argument("--pattern", help='creation/annihilation word, e.g. "a:e1 c:e1"')

    s = sub.add_parser("wick", help="Wick product transforms and inner products")
    wsub = s.add_subparsers(dest="wick_cmd", required=True, parser_class=_Parser)
    t = wsub.add_parser("transform", parents=[common])
    t.add_argument("monomial", help='e.g. "(1,4) | 2:e1 3:e1"')
    t.add_argument("--to", choices=["wick", "moments"], default="wick")
    t = wsub.add_parser("inner", parents=[common])
    t.add_argument("left")
    t.add_argument("right")
    t.add_argument("--kind", choices=["psi", "moment"], default="psi")

    for name, helptext in (("gram", "Gram matrix of a sector"), ("psd", "positivity certificate"),
                           ("theta", "spectral probe of the underline operator"),
                           ("report", "sector summary")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--legs", type=int, required=True)
        s.add_argument("--max-pairs", type=int, required=True)
        if name == "theta":
            s.add_argument("--table", action="store_true", help="one report per max_pairs 0..P")
        if name == "report":
            s.add_argument("--no-theta", action="store_true")

    s = sub.add_parser("standard-form", parents=[common], help="generator word of a partition")
    s.add_argument("partition")
    s.add_argument("--max-pairs", type=int, default=1)

    s = sub.add_parser("fock-sim", parents=[common], help="finite Fock matrix model")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--levels", type=int, default=3)
    s.add_argument("--max-pairs", type=int, default=1)
    s.add_argument("--pattern")
    s.add_argument("--random", type=int, default=0, help="random vectors per level for bounds")
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("check", parents=[common], help="run a bundled property suite")
    s.add_argument("suite", choices=["all"] + list(SUITES))
    s.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"enumerate": cmd_enumerate, "stats": cmd_stats, "eval": cmd_eval, "moment": cmd_moment,
            "wick": cmd_wick, "gram": cmd_gram, "psd": cmd_psd, "theta": cmd_theta,
            "standard-form": cmd_standard_form, "fock-sim": cmd_fock_sim, "report": cmd_report,
            "check": cmd_check}

_INPUT_ERRORS = (partitions.PartitionError, semigroup.DiagramError, weights.WeightError,
                 wick.WickError, kernel.KernelError, gns.GNSError)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        default_out = "json" if args.subcommand in ("psd", "theta", "report") else "text"
        cfg = RunConfig(args.subcommand, getattr(args, "weight", None),
                        getattr(args, "output", None) or default_out,
                        getattr(args, "exact", True), getattr(args, "tol", 1e-9), max_points())
        return COMMANDS[args.subcommand](args, cfg, Out(cfg, stdout))
    except UsageError as exc:
        stderr.write(f"bp2: error: {exc}\n")
        return EXIT_USAGE
    except gns.NotPositiveError as exc:
        stderr.write(f"bp2: not positive: {exc}\n")
        return EXIT_NEGATIVE
    except _INPUT_ERRORS as exc:
        stderr.write(f"bp2: error: {exc}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


__all__ = ["RunConfig", "UsageError", "build_parser", "run", "main", "SUITES"]
