"""Command line: hom counts, materialized documents and verification runs.

    catwreath hom Δ 1 1
    catwreath build theta 2 --bounds 2,2 --out theta2.json
    catwreath verify bj --n 2 --inject-fault cosegal
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .fincat import dumps, jsonify, to_document
from .sites import ALIASES, materialize, site_hom, site_name

FORMATS = ("v1",)


@dataclass(frozen=True)
class RunConfig:
    command: str
    bounds: tuple = ()
    ambient: tuple = ()
    out: str | None = None
    format: str = "v1"

    def __post_init__(self):
        if any(b < 0 for b in self.bounds):
            raise ValueError(f"bounds must be non-negative, got {self.bounds}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; known: {', '.join(FORMATS)}")


def parse_bounds(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bounds {text!r}; expected a,b,...") from None


def _write(doc, out: str | None):
    text = dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _site(name: str) -> str:
    try:
        return site_name(name)
    except (KeyError, ValueError):
        raise SystemExit(f"unknown site {name!r}; known: {', '.join(sorted(set(ALIASES.values())))}") from None


def cmd_hom(args) -> int:
    RunConfig("hom", (args.n, args.m), (args.site,), None, args.format)
    site = _site(args.site)
    homs = site_hom(site, args.n, args.m)
    print(len(homs))
    if args.verbose:
        for p in homs:
            print(dumps(jsonify(p)), end="")
    return 0


def _category(what: str, args):
    from .wreath import M_of, Mop_of, cosegal_omega, cowreath, segal_gamma, star, theta, wreath
    b = args.bounds
    if what == "theta":
        n = args.n or len(b) or 1
        return theta(n, b or (2,) * n)
    if what == "wreath":
        a, c = (b + (2, 2))[:2]
        return wreath(segal_gamma(a), materialize("Δ", c))
    if what == "cowreath":
        a, c = (b + (2, 2))[:2]
        return cowreath(cosegal_omega(a + 1), materialize("Δ", c))
    base = star() if args.base in ("star", "*") else materialize(_site(args.base), args.window)
    k = args.max
    return M_of(base, k) if what == "M" else Mop_of(base, k)


def cmd_build(args) -> int:
    RunConfig("build", args.bounds, (), args.out, args.format)
    if args.what == "disks":
        from .disks import enumerate_disks
        n = args.n or 1
        disks = enumerate_disks(n, args.size, args.bounds or None)
        doc = {"format": args.format, "dim": n, "size": args.size,
               "disks": [X.to_json() for X in disks]}
    else:
        doc = to_document(_category(args.what, args))
    try:
        _write(doc, args.out)
    except OSError as e:
        print(f"build: cannot write {args.out or 'stdout'}: {e}", file=sys.stderr)
        return 1
    return 0


def _report(args):
    from . import duality, sieves
    if args.pipeline == "bj":
        return duality.verify_bj_duality(args.n, args.bounds or None, args.size, args.inject_fault)
    if args.pipeline == "crossed":
        ambients = [_site(a) for a in args.ambients.split(",")]
        return duality.verify_crossed_duality(ambients, args.bounds or (1,) * len(ambients))
    if args.pipeline == "sieves":
        return sieves.verify_sieves(args.n, args.window)
    return sieves.verify_segal_iso(args.max)


def cmd_verify(args) -> int:
    RunConfig("verify", args.bounds, tuple(args.ambients.split(",")), args.out, args.format)
    report = _report(args)
    print(report.summary())
    for note in report.notes:
        print(f"  note: {note}")
    if args.out:
        try:
            _write(report.to_document(), args.out)
        except OSError as e:
            print(f"verify: cannot write {args.out}: {e}", file=sys.stderr)
            return 1
    if not report.passed:
        print(f"failed stage: {report.failed_stage.name}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catwreath", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", default="v1", help="interchange format version")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hom", parents=[common], help="count morphisms [n] -> [m] in a site")
    h.add_argument("site")
    h.add_argument("n", type=int)
    h.add_argument("m", type=int)
    h.add_argument("--verbose", "-v", action="store_true", help="also list the payloads")
    h.set_defaults(func=cmd_hom)

    b = sub.add_parser("build", parents=[common], help="write a category or disk list document")
    b.add_argument("what", choices=["theta", "wreath", "cowreath", "M", "Mop", "disks"])
    b.add_argument("n", type=int, nargs="?", help="level for theta, dimension for disks")
    b.add_argument("--bounds", type=parse_bounds, default=())
    b.add_argument("--size", type=int, default=8, help="total size bound for disks")
    b.add_argument("--base", default="star", help="base category for M and Mop: star or a site")
    b.add_argument("--window", type=int, default=2, help="rank bound of a site base")
    b.add_argument("--max", type=int, default=3, help="index bound for M and Mop")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", parents=[common], help="run a verification pipeline")
    v.add_argument("pipeline", choices=["bj", "crossed", "sieves", "segal-iso"])
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--bounds", type=parse_bounds, default=())
    v.add_argument("--size", type=int, default=8)
    v.add_argument("--window", type=int)
    v.add_argument("--max", type=int, default=5, help="rank bound for segal-iso")
    v.add_argument("--ambients", default="Λ,Δ", help="comma separated sites for crossed")
    v.add_argument("--inject-fault", choices=["cosegal"])
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
