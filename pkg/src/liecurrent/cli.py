"""Command-line front end: liecurrent {verify, bd, trace, export}."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .errors import (BadConstantTerm, BadDegree, DegenerateParameters, DepthExceeded, LiecurrentError,
                     ObstructionNonzero, RankTooLarge, UnsupportedType, WindowTooSmall)
from .exact_arith import frac_str, parse_frac
from .lie_core import build_algebra
from .loop_double import CASES, CaseTag, build_W, classify_a_poly, manin_verify
from .orders_bd import enum_bd
from .rmatrix import (DrinfeldJimbo, FourTypes, build_r, cocycle_check, cybe_check, degree_bound_check,
                      dual_basis_verify, manin_cobracket_check, polynomiality_check, skew_check)
from .trace_ext import TraceExtension, normalize_automorphism

REPORT_VERSION = "report_v1"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    algebra: str = "sl2"
    case: Optional[CaseTag] = None
    window: Tuple[int, int] = (-10, 6)
    depth: int = 4
    output: Optional[str] = None
    format: str = "text"


# ---------------------------------------------------------------------------
# argument handling


def _normalize_argv(argv: Sequence[str]) -> List[str]:
    """Glue values starting with '-' to flags that expect them (``--window -10:6``)."""
    out: List[str] = []
    glue = {"--window", "--alpha", "--poly", "--m1", "--m2"}
    i = 0
    argv = list(argv)
    while i < len(argv):
        a = argv[i]
        if a in glue and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _parse_window(s: str) -> Tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*:\s*(-?\d+)\s*", s)
    if not m:
        raise ConfigError(f"window must look like -10:6, got {s!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if not lo < 0 < hi:
        raise ConfigError(f"window must satisfy min < 0 < max, got {lo}:{hi}")
    return lo, hi


def _parse_list(s: str) -> List[Fraction]:
    try:
        return [parse_frac(p.strip()) for p in s.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse rational list {s!r}: {exc}") from None


def _parse_q(s: Optional[str]) -> Optional[Fraction]:
    if s is None:
        return None
    try:
        return parse_frac(s)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a rational number: {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liecurrent", description="Exact checks for Lie bialgebra structures on g[x].")
    p.add_argument("--version", action="version", version=f"liecurrent {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, algebra=True):
        if algebra:
            sp.add_argument("--algebra", default="sl2", help="sl2, sl3, sp4 (B2) or g2")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--output", "-o", help="write the report to this file instead of stdout")

    v = sub.add_parser("verify", help="run the full suite for one double")
    v.add_argument("--case", required=True, help="one of " + ", ".join(CASES))
    v.add_argument("--m1")
    v.add_argument("--m2")
    v.add_argument("--window", default="-10:6", help="degree window min:max (default -10:6)")
    v.add_argument("--depth", type=int, default=4)
    v.add_argument("--cross-check", action="store_true",
                   help="also compare the cobracket of r with the one induced by W")
    common(v)

    b = sub.add_parser("bd", help="enumerate Belavin-Drinfeld triples (rank <= 2)")
    b.add_argument("--vertex", type=int, required=True)
    common(b)

    t = sub.add_parser("trace", help="trace extension utilities")
    tsub = t.add_subparsers(dest="trace_command", required=True)
    tn = tsub.add_parser("normalize", help="normalize the trace of A(n, alpha)")
    tn.add_argument("--n", type=int, required=True, choices=(0, 1, 2))
    tn.add_argument("--alpha", default="", help="comma separated alpha_{n-2}, alpha_{n-3}, ...")
    tn.add_argument("--order", type=int, default=6)
    common(tn, algebra=False)
    tc = tsub.add_parser("classify", help="classify 1/a(x) = 1 + b1 x + b2 x^2")
    tc.add_argument("--poly", required=True, help="coefficients 1,b1,b2")
    common(tc, algebra=False)

    e = sub.add_parser("export", help="write algebra or r-matrix data as JSON")
    e.add_argument("what", choices=("algebra", "r"))
    e.add_argument("--case", help="for r: " + ", ".join(CASES) + ", DJ, r1..r4")
    e.add_argument("--m1")
    e.add_argument("--m2")
    e.add_argument("--algebra", default="sl2")
    e.add_argument("--output", "-o")
    return p


def _case_from_args(args) -> CaseTag:
    name = args.case.strip().upper()
    if name not in CASES:
        raise ConfigError(f"unknown case {args.case!r}; expected one of {', '.join(CASES)}")
    m1, m2 = _parse_q(args.m1), _parse_q(args.m2)
    if name != "A4" and (m1 is not None or m2 is not None):
        raise ConfigError("--m1/--m2 apply to case A4 only")
    return CaseTag.parse(name, m1, m2)


# ---------------------------------------------------------------------------
# reports


def _check(name: str, status: bool, witness=None, **extra):
    obj = {"name": name, "status": "pass" if status else "fail", "witness": witness}
    obj.update(extra)
    return obj


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=True) + "\n"


def render_text(report: dict) -> str:
    lines = [f"# {report['command']} ({report['version']})"]
    for k, v in report.get("config", {}).items():
        lines.append(f"{k}: {v}")
    for c in report.get("checks", []):
        line = f"[{c['status'].upper()}] {c['name']}"
        if c.get("summary"):
            line += f" - {c['summary']}"
        lines.append(line)
        if c["status"] != "pass" and c.get("witness") is not None:
            lines.append("    witness: " + json.dumps(c["witness"], ensure_ascii=True, sort_keys=False))
    for key in ("result", "items"):
        if key in report:
            val = report[key]
            if isinstance(val, list):
                for item in val:
                    lines.append("  " + (item if isinstance(item, str) else json.dumps(item, ensure_ascii=True)))
            else:
                lines.append(f"{key}: {val}")
    for n in report.get("notes", []):
        lines.append(f"note: {n}")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"


def _emit(report: dict, fmt: str, output: Optional[str]):
    text = render_json(report) if fmt == "json" else render_text(report)
    if output:
        with open(output, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, config: dict, checks: list, notes: list, **extra) -> dict:
    status = "pass" if all(c["status"] == "pass" for c in checks) else "fail"
    rep = {"version": REPORT_VERSION, "command": command, "config": config, "checks": checks}
    rep.update(extra)
    rep["notes"] = notes
    rep["status"] = status
    return rep


# ---------------------------------------------------------------------------
# commands


def cmd_verify_case(cfg: RunConfig, cross_check: bool = False) -> Tuple[int, dict]:
    g = build_algebra(cfg.algebra)
    case = cfg.case
    notes: List[str] = []
    checks = []
    W = build_W(case, g)
    manin = manin_verify(W, case, g, cfg.window)
    for c in manin.checks:
        checks.append(_check(f"manin.{c.name}", c.status == "pass", c.witness))
    notes.extend(manin.notes)
    r = build_r(case, g)
    notes.extend(r.notes)
    cy = cybe_check(r, g)
    checks.append(_check("cybe", cy.is_zero, cy.witness))
    sk = skew_check(r, g)
    checks.append(_check("skew", sk.ok, sk.witness))
    for rep in (polynomiality_check(r, g, cfg.depth), degree_bound_check(r, g, cfg.depth),
                cocycle_check(r, g, min(cfg.depth, 3))):
        checks.append(_check(rep.name, rep.ok, rep.failures[0] if rep.failures else None,
                             checked=rep.checked))
    if case.family == "A":
        db = dual_basis_verify(case, g, cfg.depth)
        bad = [e for e in db.entries if e["kind"] == "root" and e["status"] != "match"]
        checks.append(_check("dual_basis", db.ok, bad[0] if bad else None,
                             summary=f"biorthonormal={db.biorthonormal}, r expansion={db.expansion_match}, "
                                     f"root entries match={db.root_entries_match}, "
                                     f"cartan entries: {db.cartan_summary}"))
        if db.uncovered:
            notes.append("monomials without a printed dual: " + ", ".join(db.uncovered))
        notes.extend(db.notes)
    if cross_check:
        mc = manin_cobracket_check(case, g, 2)
        checks.append(_check("manin_cobracket", mc.ok, mc.failures[0] if mc.failures else None,
                             checked=mc.checked))
    config = {"algebra": g.type, "case": str(case), "window": f"{cfg.window[0]}:{cfg.window[1]}",
              "depth": cfg.depth}
    rep = _report("verify", config, checks, notes)
    return (0 if rep["status"] == "pass" else 1), rep


def cmd_enum_bd(cfg: RunConfig, vertex: int) -> Tuple[int, dict]:
    g = build_algebra(cfg.algebra)
    triples = enum_bd(g, vertex)
    items = [t.to_json_obj() for t in triples]
    config = {"algebra": g.type, "vertex": vertex}
    rep = _report("bd", config, [], [], count=len(items), items=items)
    return 0, rep


def cmd_trace_normalize(n: int, alpha: List[Fraction], order: int) -> Tuple[int, dict]:
    if order < 1:
        raise ConfigError("--order must be at least 1")
    ks = list(range(2, order + 2)) if n == 0 else list(range(1, order + 1))
    need = max(n - 1 + max(ks), len(alpha))
    notes = []
    if len(alpha) < need:
        notes.append(f"alpha padded with zeros to depth {need}")
    ext = TraceExtension.finite(n, alpha, depth=need)
    config = {"n": n, "alpha": [frac_str(a) for a in alpha], "order": order}
    try:
        res = normalize_automorphism(ext, order)
    except ObstructionNonzero as exc:
        notes.append("for n = 2 a Lagrangian complement requires alpha_0 = 0")
        chk = _check("normalize", False, {"alpha_0": frac_str(exc.witness), "reason": str(exc)})
        return 1, _report("trace normalize", config, [chk], notes)
    chk = _check("resubstitution", res.ok, None if res.ok else res.to_json_obj()["residuals"],
                 summary=f"t(y^-k) = 0 for k in {res.checked[0]}..{res.checked[-1]}")
    rep = _report("trace normalize", config, [chk], notes,
                  result=" ".join(["eta:"] + [frac_str(c) for c in res.eta]),
                  eta=[frac_str(c) for c in res.eta], xi=[frac_str(c) for c in res.xi])
    return (0 if res.ok else 1), rep


def cmd_trace_classify(coeffs: List[Fraction]) -> Tuple[int, dict]:
    cls = classify_a_poly(coeffs)
    config = {"poly": [frac_str(c) for c in coeffs]}
    extra = {"result": str(cls), "case": cls.case}
    if cls.j is not None:
        extra["j"] = frac_str(cls.j)
    if cls.scale is not None:
        extra["scale"] = frac_str(cls.scale)
    return 0, _report("trace classify", config, [], [], **extra)


def cmd_export(args) -> Tuple[int, str]:
    g = build_algebra(args.algebra)
    if args.what == "algebra":
        return 0, g.to_json() + "\n"
    if not args.case:
        raise ConfigError("export r needs --case")
    name = args.case.strip()
    if name.upper() == "DJ":
        src = DrinfeldJimbo()
    elif re.fullmatch(r"r[1-4]", name):
        src = FourTypes(int(name[1]))
    else:
        src = _case_from_args(args)
    return 0, build_r(src, g).to_json(g) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = _normalize_argv(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            if args.depth < 1:
                raise ConfigError("--depth must be at least 1")
            cfg = RunConfig("verify", args.algebra, _case_from_args(args), _parse_window(args.window),
                            args.depth, args.output, args.format)
            code, rep = cmd_verify_case(cfg, args.cross_check)
            _emit(rep, cfg.format, cfg.output)
            return code
        if args.command == "bd":
            cfg = RunConfig("bd", args.algebra, output=args.output, format=args.format)
            code, rep = cmd_enum_bd(cfg, args.vertex)
            _emit(rep, cfg.format, cfg.output)
            return code
        if args.command == "trace":
            if args.trace_command == "normalize":
                code, rep = cmd_trace_normalize(args.n, _parse_list(args.alpha), args.order)
            else:
                code, rep = cmd_trace_classify(_parse_list(args.poly))
            _emit(rep, args.format, args.output)
            return code
        if args.command == "export":
            code, text = cmd_export(args)
            if args.output:
                with open(args.output, "w", encoding="ascii") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return code
    except (ConfigError, DegenerateParameters, RankTooLarge, UnsupportedType, WindowTooSmall,
            BadDegree, BadConstantTerm, DepthExceeded, ValueError) as exc:
        sys.stderr.write(f"liecurrent: error: {type(exc).__name__}: {exc}\n")
        return 2
    except LiecurrentError as exc:
        sys.stderr.write(f"liecurrent: {type(exc).__name__}: {exc}\n")
        return 1
    parser.error("unknown command")
    return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
