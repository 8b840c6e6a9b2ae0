"""Command-line front end: ``limitcoh VERB [input] [options]``.

Exit status: 0 when every verdict passes, 1 when a computed verdict fails,
2 on bad usage or bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .degeneration import (
    BUILTIN_NAMES, SIGN_CONVENTION, SemistableFiber, builtin_example, builtin_raw, chi_compare,
    clemens_schmid, limit_cohomology, self_duality, weight_basis_form,
)
from .errors import (
    LimitCohError, MismatchError, NotAComplex, ParseError, SignViolation, UnknownExample,
    UnsupportedWeilNumber, ValidationError,
)
from .exact import Field, Matrix, is_prime, weil_split
from .io import digest, parse_input
from .koszul import DEFAULT_NMAX, koszul_suite
from .phimod import PhiNModule, hom_ext_phi, hom_ext_phin, wm_check

DEFAULT_PRIME = 3

TSV_HELP = """TSV columns (--tsv), one row per entity and degree:
  limit     degree, dim, weights, n_rank
  wm        degree, center, passed, symmetric, ranks
  chi       degree, dim_fib_n, weights_fib_n, dim_cone, weights_cone
  cs        thread, position, node, degree, dim, exact
  ext       kind, ext0, ext1, ext2
  selftest  check, passed, detail
Weights are written as weight:multiplicity pairs joined by commas."""


class UsageError(Exception):
    pass


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _rational(text: str) -> Fraction:
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number") from None
    if not x:
        raise argparse.ArgumentTypeError("rescale factor must be nonzero")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="limitcoh",
        description="Exact (phi,N)-module and limit cohomology computations.",
        epilog=TSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"limitcoh {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=_prime, help="prime p (default: LIMITCOH_PRIME or 3)")
    common.add_argument("--tsv", action="store_true", help="tab-separated output")
    common.add_argument("--rescale", type=_rational, default=Fraction(1),
                        help="rescale N (change of pseudo-uniformizer), default 1")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    for verb, text in (("limit", "limit cohomology with weights and monodromy"),
                       ("cs", "Clemens-Schmid report"),
                       ("chi", "chi two ways: fib(N) and cone of the special-fiber map"),
                       ("wm", "weight-monodromy check")):
        sp = sub.add_parser(verb, parents=[common], help=text, epilog=TSV_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("input", nargs="?", help="fiber (or, for wm, module) description file")
        sp.add_argument("--example", help=f"builtin fiber: {', '.join(BUILTIN_NAMES)}")
        if verb == "wm":
            sp.add_argument("--center", type=int, help="center for a single module input")

    sp = sub.add_parser("ext", parents=[common], help="Hom/Ext between two modules")
    sp.add_argument("source")
    sp.add_argument("target")

    sp = sub.add_parser("example", parents=[common], help="print a builtin fiber description")
    sp.add_argument("name", nargs="?")

    sp = sub.add_parser("selftest", parents=[common], help="built-in identity checks")
    sp.add_argument("suite", choices=["koszul", "examples"])
    sp.add_argument("--nmax", type=int, default=DEFAULT_NMAX, help="truncation level (default 4)")
    return parser


def _env_prime() -> int:
    text = os.environ.get("LIMITCOH_PRIME")
    if text is None or not text.strip():
        return DEFAULT_PRIME
    try:
        return _prime(text.strip())
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"LIMITCOH_PRIME: {exc}") from None


# -- formatting ------------------------------------------------------------------------

def fmt_weights(dims: dict) -> str:
    return ",".join(f"{w}:{m}" if m != 1 else str(w) for w, m in sorted(dims.items())) or "-"


def fmt_matrix(M: Matrix) -> str:
    return "[" + ",".join("[" + ",".join(str(x) for x in row) + "]" for row in M.rows()) + "]"


class Report:
    def __init__(self, tsv: bool):
        self.tsv = tsv
        self.lines: list = []

    def table(self, header, rows):
        if self.tsv:
            self.lines.append("\t".join(header))
            self.lines.extend("\t".join(str(c) for c in r) for r in rows)
            return
        cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            self.lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())

    def text(self, line: str):
        if not self.tsv:
            self.lines.append(line)

    def footer(self, source: bytes, rescale: Fraction, p: int):
        prefix = "#"
        self.lines.append(f"{prefix} input-sha256 {digest(source)}")
        self.lines.append(f"{prefix} engine limitcoh {__version__}; signs {SIGN_CONVENTION}; p = {p}")
        self.lines.append(f"{prefix} monodromy normalized to the pseudo-uniformizer p; N rescaled by {rescale}")

    def emit(self, out):
        out.write("\n".join(self.lines) + "\n")


# -- verbs ---------------------------------------------------------------------------------

def _load(args, allow_module=False):
    if args.example and args.input:
        raise UsageError("give either an input file or --example, not both")
    if args.example:
        p = args.prime or _env_prime()
        raw = builtin_raw(args.example, p)
        return builtin_example(args.example, p), json.dumps(raw, sort_keys=True).encode()
    if not args.input:
        raise UsageError("an input file or --example is required")
    obj, raw = parse_input(args.input, args.prime, _env_prime())
    if isinstance(obj, PhiNModule) and not allow_module:
        raise UsageError(f"{args.input} describes a module; this verb needs a fiber")
    return obj, raw


def _title(rep: Report, verb: str, X: SemistableFiber):
    k = len(X.components)
    rep.text(f"{verb}: {X.name or 'fiber'} (p = {X.p}, relative dimension {X.d}, "
             f"{k} component{'' if k == 1 else 's'})")
    if X.conjectural and verb != "cs":  # the cs report carries its own note
        rep.text("note: conjectural normalization (more than two components)")


def cmd_limit(args, rep: Report) -> tuple:
    X, raw = _load(args)
    L = limit_cohomology(X, args.rescale)
    _title(rep, "limit", X)
    rows = [(n, P.dim, fmt_weights(weil_split(P.module.Phi).dims()), P.n_rank) for n, P in sorted(L.pieces.items())]
    rep.table(("degree", "dim", "weights", "n_rank"), rows)
    ok = L.ss.degenerates_at_e2
    rep.text(f"weight spectral sequence degenerates at E2: {'yes' if ok else 'no'}")
    for n, P in sorted(L.pieces.items()):
        for i, M in sorted(P.graded_N.items()):
            if M.nrows and M.ncols and not M.is_zero():
                rep.text(f"N on H^{n}: gr_{i} -> gr_{i - 2} = {fmt_matrix(M)}")
        if P.n_rank:
            _, Phi, N = weight_basis_form(P.module)
            rep.text(f"H^{n} in the weight basis: Phi = {fmt_matrix(Phi)}, N/scalar = {fmt_matrix(N)}")
    rep.text(f"verdict: {'pass' if ok else 'fail'}")
    return ok, raw, X.p


def cmd_wm(args, rep: Report) -> tuple:
    obj, raw = _load(args, allow_module=True)
    if isinstance(obj, PhiNModule):
        if args.center is None:
            raise UsageError("wm on a module needs --center")
        reports = {0: wm_check(obj, args.center)}
        p = obj.p
        rep.text(f"wm: module of dim {obj.dim} (p = {p})")
    else:
        L = limit_cohomology(obj, args.rescale)
        reports = {n: wm_check(P.module, n) for n, P in sorted(L.pieces.items())}
        p = obj.p
        _title(rep, "wm", obj)
    rows = []
    for n, r in sorted(reports.items()):
        ranks = ",".join(f"N^{k}:{v[0]}/{v[1]}" for k, v in sorted(r.ranks.items())) or "-"
        rows.append((n, r.center, "yes" if r.passed else "no", "yes" if r.symmetric else "no", ranks))
    rep.table(("degree", "center", "passed", "symmetric", "ranks"), rows)
    ok = all(r.passed for r in reports.values())
    rep.text(f"verdict: {'pass' if ok else 'fail'}")
    return ok, raw, p


def cmd_chi(args, rep: Report) -> tuple:
    X, raw = _load(args)
    r = chi_compare(X, args.rescale, raise_on_mismatch=False)
    _title(rep, "chi", X)
    degs = sorted(set(r.profile_monodromy) | set(r.profile_special_fiber))
    rows = []
    for n in degs:
        a, b = r.profile_monodromy.get(n, {}), r.profile_special_fiber.get(n, {})
        rows.append((n, sum(a.values()), fmt_weights(a), sum(b.values()), fmt_weights(b)))
    rep.table(("degree", "dim_fib_n", "weights_fib_n", "dim_cone", "weights_cone"), rows)
    rep.text(f"verdict: {'pass' if r.passed else 'fail'}")
    return r.passed, raw, X.p


def cmd_cs(args, rep: Report) -> tuple:
    X, raw = _load(args)
    r = clemens_schmid(X, args.rescale)
    _title(rep, "cs", X)
    rows = []
    for t in r.threads:
        for i, (node, ex) in enumerate(zip(t.nodes, t.exact)):
            rows.append(("even" if t.parity == 0 else "odd", i, node.name, node.degree, node.module.dim,
                         "yes" if ex else "no"))
    rep.table(("thread", "position", "node", "degree", "dim", "exact"), rows)
    for n, w in sorted(r.wm.items()):
        rep.text(f"wm H^{n} (center {n}): {'pass' if w.passed else 'fail'}")
    for note in r.notes:
        rep.text(f"note: {note}")
    rep.text(f"composites zero: {'yes' if r.composites_zero else 'no'}; exact: {'yes' if r.exact else 'no'}")
    rep.text(f"verdict: {'pass' if r.passed else 'fail'}")
    return r.passed, raw, X.p


def cmd_ext(args, rep: Report) -> tuple:
    D, raw_d = parse_input(args.source, args.prime, _env_prime())
    E, raw_e = parse_input(args.target, args.prime, _env_prime())
    if not isinstance(D, PhiNModule) or not isinstance(E, PhiNModule):
        raise UsageError("ext needs two module files")
    if D.p != E.p:
        raise UsageError(f"modules over different primes ({D.p}, {E.p})")
    hom, _, ext1 = hom_ext_phi(D, E)
    e0, e1, e2 = hom_ext_phin(D, E)
    rep.text(f"ext: {args.source} -> {args.target} (p = {D.p})")
    rep.table(("kind", "ext0", "ext1", "ext2"), [("phi", hom, ext1, 0), ("phi_n", e0, e1, e2)])
    rep.text("verdict: pass")
    return True, raw_d + b"\0" + raw_e, D.p


def cmd_example(args, rep: Report) -> tuple:
    p = args.prime or _env_prime()
    if not args.name:
        rep.table(("example",), [(n,) for n in BUILTIN_NAMES])
        return True, None, p
    raw = builtin_raw(args.name, p)
    builtin_example(args.name, p)
    text = json.dumps(raw, indent=2, sort_keys=True)
    rep.lines.extend(text.splitlines())
    return True, None, p


def cmd_selftest(args, rep: Report) -> tuple:
    p = args.prime or _env_prime()
    F = Field(p)
    rows = []
    if args.suite == "koszul":
        if args.nmax < 1:
            raise UsageError("--nmax must be >= 1")
        for v in koszul_suite(args.nmax, F):
            rows.append((v.name, "pass" if v.passed else "fail", v.detail))
    else:
        for name in ("good-elliptic", "tate-2gon", "tate-ngon(3)", "tate-ngon(4)", "tate-ngon(5)",
                     "two-component-surface"):
            X = builtin_example(name, p)
            L = limit_cohomology(X, args.rescale)
            rows.append((f"{name}/e2", "pass" if L.ss.degenerates_at_e2 else "fail", f"dims {L.dims()}"))
            ok = chi_compare(X, args.rescale, raise_on_mismatch=False).passed
            rows.append((f"{name}/chi", "pass" if ok else "fail", ""))
            cs = clemens_schmid(X, args.rescale)
            rows.append((f"{name}/cs", "pass" if cs.passed else "fail", ""))
            rows.append((f"{name}/self-dual", "pass" if self_duality(X)[0] else "fail", ""))
    rep.text(f"selftest {args.suite} (p = {p})")
    rep.table(("check", "passed", "detail"), rows)
    ok = all(r[1] == "pass" for r in rows)
    rep.text(f"verdict: {'pass' if ok else 'fail'}")
    return ok, f"selftest {args.suite} nmax={args.nmax} p={p}".encode(), p


VERBS = {"limit": cmd_limit, "wm": cmd_wm, "chi": cmd_chi, "cs": cmd_cs, "ext": cmd_ext,
         "example": cmd_example, "selftest": cmd_selftest}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Report(getattr(args, "tsv", False))
    try:
        ok, source, p = VERBS[args.verb](args, rep)
    except (UsageError, ParseError, ValidationError, UnknownExample, UnsupportedWeilNumber, OSError) as exc:
        err.write(f"limitcoh: error: {exc}\n")
        return 2
    except (SignViolation, NotAComplex, MismatchError) as exc:
        err.write(f"limitcoh: verdict failure: {exc}\n")
        return 1
    except LimitCohError as exc:
        err.write(f"limitcoh: error: {exc}\n")
        return 2
    if source is not None:
        rep.footer(source, getattr(args, "rescale", Fraction(1)), p)
    rep.emit(out)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())
