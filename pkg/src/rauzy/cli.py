"""Command line interface.

Exit codes: 0 on success, 1 when a verification fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from . import fractal, render, transform, verify
from .spectral import base_eigenvectors, classify
from .substitution import (
    Occurrence,
    Substitution,
    incidence_matrix,
    int_det,
    is_primitive,
    is_unimodular,
    occurrences,
    power,
    strong_coincidence,
)

log = logging.getLogger("rauzy")

SCHEMA = "rauzy-cli/1"


class ParseError(ValueError):
    pass


def parse_substitution(text: str) -> Substitution:
    """Parse ``"1->21; 2->31; 3->1"``.

    Images are runs of digits when there are at most 9 letters and
    comma-separated integers otherwise (``"1->10,2"``).
    """
    rules = {}
    pos = 0
    chunks = text.split(";")
    n = sum(1 for c in chunks if c.strip())
    for chunk in chunks:
        start = pos + len(chunk) - len(chunk.lstrip())
        pos += len(chunk) + 1
        if not chunk.strip():
            continue
        m = re.fullmatch(r"\s*(\d+)\s*->\s*([\d,\s]*?)\s*", chunk)
        if not m:
            raise ParseError(f"malformed rule {chunk.strip()!r} at offset {start}")
        left, right = int(m.group(1)), m.group(2)
        if left in rules:
            raise ParseError(f"duplicate rule for {left} at offset {start}")
        if not right:
            raise ParseError(f"empty image for {left} at offset {start} (substitutions are non-erasing)")
        if n > 9 or "," in right:
            image = tuple(int(x) for x in right.replace(" ", "").split(","))
        else:
            image = tuple(int(x) for x in right.replace(" ", ""))
        for x in (left,) + image:
            if not 1 <= x <= n:
                raise ParseError(f"letter {x} out of range 1..{n} in rule at offset {start}")
        rules[left] = image
    if not rules:
        raise ParseError("no rules")
    missing = sorted(set(range(1, n + 1)) - set(rules))
    if missing:
        raise ParseError(f"missing rules for {missing}")
    return Substitution.from_dict(rules)


def format_substitution(s: Substitution) -> str:
    return str(s)


def parse_occurrences(text: str) -> list[Occurrence]:
    """``"(1;24),(1;31)"``; commas inside the parentheses are accepted too."""
    found = re.findall(r"\(\s*(\d+)\s*[;,]\s*(\d+)\s*\)", text)
    if not found or re.sub(r"\(\s*\d+\s*[;,]\s*\d+\s*\)|[\s,;]", "", text):
        raise ParseError(f"cannot parse occurrences {text!r}; expected '(j;k),(j;k),...'")
    return [Occurrence(int(j), int(k)) for j, k in found]


def format_occurrences(occs) -> str:
    return ",".join(str(Occurrence(*o)) for o in occs)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=verify._json_default)


def cmd_check(args) -> int:
    s = parse_substitution(args.subst)
    doc = {
        "schema": SCHEMA,
        "substitution": str(s),
        "primitive": is_primitive(s),
        "det": int_det(incidence_matrix(s)),
        "unimodular": is_unimodular(s),
    }
    if doc["primitive"]:
        doc.update(classify(s).as_dict())
    sc = strong_coincidence(s, args.depth)
    doc["strong_coincidence"] = {"holds": sc.holds, "depth": sc.depth, "max_depth": sc.max_depth,
                                 "unresolved_pairs": [list(p) for p in sc.missing]}
    print(_dump(doc))
    return 0


def cmd_power(args) -> int:
    print(power(parse_substitution(args.subst), args.n))
    return 0


def cmd_occ(args) -> int:
    print(format_occurrences(occurrences(parse_substitution(args.subst), args.i)))
    return 0


def cmd_split(args) -> int:
    s = parse_substitution(args.subst)
    print(transform.split(s, transform.SplitSpec(args.a, parse_occurrences(args.I), s.n)))
    return 0


def cmd_conjugate(args) -> int:
    t = parse_substitution(args.subst)
    c = transform.preceding_letter(t, args.b)
    if c != args.c:
        raise transform.PreconditionError(f"occurrences of {args.b} are preceded by {c}, not {args.c}")
    print(transform.conjugate(t, transform.elementary(args.c, args.b, t.n)))
    return 0


def _drill_params(args) -> transform.DrillParams:
    params = transform.DrillParams(max_N=args.max_N)
    if args.seed_anchor:
        params.seed_anchor = tuple(int(x) for x in args.seed_anchor.split(","))
    if (args.force_N is None) != (args.force_I is None):
        raise ParseError("--force-N and --force-I go together")
    if args.force_N is not None:
        params.force_N = args.force_N
        params.force_I = tuple(parse_occurrences(args.force_I))
    return params


def cmd_drill(args) -> int:
    s = parse_substitution(args.subst)
    rec = transform.drill(s, args.k, _drill_params(args))
    print(rec.to_json())
    return 0


def _tiles(s, sd, method, points):
    if method == "prefix":
        return fractal.tiles_by_prefixes(s, sd, points)
    return fractal.tiles_by_gifs(s, sd, points)


def cmd_tiles(args) -> int:
    s = parse_substitution(args.subst)
    sd = base_eigenvectors(s)
    tiles = _tiles(s, sd, args.method, args.points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [fractal.export_csv(tiles[i], out / f"tile_{i}.csv") for i in sorted(tiles)]
    print(_dump({"schema": SCHEMA, "files": [str(p) for p in paths], "convention": sd.tag}))
    return 0


def cmd_render(args) -> int:
    s = parse_substitution(args.subst)
    sd = base_eigenvectors(s)
    tiles = fractal.tiles_by_gifs(s, sd, args.points)
    if args.subsub:
        layers = {}
        for i in sorted(tiles):
            for t in fractal.subsubtiles(s, sd, tiles, i):
                layers[t.label] = t
        palette = render.cycle_palette(list(layers))
    else:
        layers = tiles
        palette = render.default_palette(sorted(tiles), black=args.black)
    w, h = (int(x) for x in args.size.lower().split("x"))
    spec = render.RenderSpec(w, h, palette, point_radius=args.radius)
    out = Path(args.out)
    if sd.dim == 3:
        paths = render.export_3d(layers, out)
        print(_dump({"schema": SCHEMA, "files": [str(p) for p in paths]}))
        return 0
    if out.suffix.lower() == ".svg":
        out.write_text(render.render_svg(layers, spec))
    else:
        out.write_bytes(render.render_raster(layers, spec))
    print(_dump({"schema": SCHEMA, "file": str(out), "labels": [str(x) for x in layers]}))
    return 0


def run_verify(s: Substitution, args) -> dict:
    """Identity suite for the requested pipeline; returns the JSON document."""
    budget = args.points
    extra: dict = {"pipeline": args.pipeline, "substitution": str(s), "points_per_tile": budget,
                   "tol_fraction": verify.TOL_FRACTION}
    reports = []
    if args.pipeline == "gifs":
        sd = base_eigenvectors(s)
        tiles = fractal.tiles_by_gifs(s, sd, budget)
        reports += verify.check_gifs_identity(s, sd, tiles)
        prefix = fractal.tiles_by_prefixes(s, sd, _prefix_length(tiles, budget))
        tol = verify.default_tol(tiles)
        reports += [verify.compare(f"cross[{i}]", "prefix cloud = GIFS cloud", prefix[i], tiles[i], tol, 100_000)
                    for i in sorted(tiles)]
    elif args.pipeline == "split":
        if args.a is None or args.I is None:
            raise ParseError("split pipeline needs -a and -I")
        sd = base_eigenvectors(s)
        spec = transform.SplitSpec(args.a, parse_occurrences(args.I), s.n)
        tau = transform.split(s, spec)
        sd_tau = transform.split_spectral(sd, tau, args.a)
        base = fractal.tiles_by_gifs(s, sd, budget)
        reports += verify.check_split_identities(
            s, tau, sd, sd_tau, base, fractal.tiles_by_gifs(tau, sd_tau, budget), args.a, spec.I)
        extra["tau"] = str(tau)
    elif args.pipeline == "conjugate":
        if args.c is None or args.b is None:
            raise ParseError("conjugate pipeline needs -c and -b")
        sd = base_eigenvectors(s)
        rho = transform.elementary(args.c, args.b, s.n)
        theta = transform.conjugate(s, rho)
        sd_theta = transform.conjugate_spectral(sd, theta, rho)
        reports += verify.check_conjugation_identities(
            s, theta, sd, sd_theta, fractal.tiles_by_gifs(s, sd, budget),
            fractal.tiles_by_gifs(theta, sd_theta, budget), args.b, args.c)
        extra["theta"] = str(theta)
    elif args.pipeline == "drill":
        if args.k is None:
            raise ParseError("drill pipeline needs -k")
        rec = transform.drill(s, args.k, _drill_params(args))
        sN, sdN = rec.sigma_N, rec.sd_sigma_N
        base = fractal.tiles_by_gifs(sN, sdN, budget)
        tau_tiles = fractal.tiles_by_gifs(rec.tau, rec.sd_tau, budget)
        theta_tiles = fractal.tiles_by_gifs(rec.theta, rec.sd_theta, budget)
        tol = verify.default_tol(base)
        reports += verify.check_split_identities(sN, rec.tau, sdN, rec.sd_tau, base, tau_tiles, rec.a, rec.I, tol=tol)
        reports += verify.check_conjugation_identities(
            rec.tau, rec.theta, rec.sd_tau, rec.sd_theta, tau_tiles, theta_tiles, rec.b, rec.c, tol=tol)
        holes = {}
        for res in (verify.RASTER_RESOLUTION, 2 * verify.RASTER_RESOLUTION):
            holes[res] = verify.count_holes(verify.rasterize(list(theta_tiles.values()), res))
        extra["drill"] = rec.to_dict()
        extra["holes"] = {"expected": rec.K, "by_resolution": holes,
                          "passed": all(h == rec.K for h in holes.values()),
                          "dilation": verify.RASTER_DILATION, "margin": verify.RASTER_MARGIN}
    else:
        raise ParseError(f"unknown pipeline {args.pipeline!r}")
    doc = json.loads(verify.report_json(reports, extra))
    if "holes" in extra:
        doc["passed"] = doc["passed"] and extra["holes"]["passed"]
    return doc


def _prefix_length(tiles, budget) -> int:
    total = sum(len(t) for t in tiles.values())
    smallest = min(len(t) for t in tiles.values())
    return int(budget * total / smallest)


def cmd_verify(args) -> int:
    s = parse_substitution(args.subst)
    doc = run_verify(s, args)
    text = _dump(doc)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if doc["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rauzy", description="Rauzy fractals, splittings, conjugations and drilled holes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="classify a substitution")
    c.add_argument("subst")
    c.add_argument("--depth", type=int, default=8, help="strong coincidence search depth")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("power", help="print s^N")
    c.add_argument("subst")
    c.add_argument("-n", type=int, required=True)
    c.set_defaults(func=cmd_power)

    c = sub.add_parser("occ", help="occurrences of a letter")
    c.add_argument("subst")
    c.add_argument("-i", type=int, required=True)
    c.set_defaults(func=cmd_occ)

    c = sub.add_parser("split", help="split a letter into a new one")
    c.add_argument("subst")
    c.add_argument("-a", type=int, required=True)
    c.add_argument("-I", required=True, help='occurrences, e.g. "(1;1),(2;6)"')
    c.set_defaults(func=cmd_split)

    c = sub.add_parser("conjugate", help="conjugate by b -> c b")
    c.add_argument("subst")
    c.add_argument("-c", type=int, required=True)
    c.add_argument("-b", type=int, required=True)
    c.set_defaults(func=cmd_conjugate)

    def drill_opts(c, required_k):
        c.add_argument("-k", type=int, required=required_k)
        c.add_argument("--max-N", dest="max_N", type=int, default=8)
        c.add_argument("--seed-anchor", help="a,c")
        c.add_argument("--force-N", dest="force_N", type=int)
        c.add_argument("--force-I", dest="force_I")

    c = sub.add_parser("drill", help="build a substitution whose fractal has K holes")
    c.add_argument("subst")
    drill_opts(c, True)
    c.set_defaults(func=cmd_drill)

    c = sub.add_parser("tiles", help="write subtile clouds as CSV")
    c.add_argument("subst")
    c.add_argument("--method", choices=["prefix", "gifs"], default="gifs")
    c.add_argument("--points", type=int, default=fractal.PREVIEW_BUDGET)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_tiles)

    c = sub.add_parser("render", help="draw subtiles (PNG or SVG by extension)")
    c.add_argument("subst")
    c.add_argument("--subsub", action="store_true", help="colour subsubtiles instead of subtiles")
    c.add_argument("--size", default="800x800")
    c.add_argument("--points", type=int, default=fractal.PREVIEW_BUDGET)
    c.add_argument("--radius", type=int, default=0)
    c.add_argument("--black", type=int, help="letter drawn in black")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_render)

    c = sub.add_parser("verify", help="run an identity suite, write a JSON report")
    c.add_argument("subst")
    c.add_argument("--pipeline", choices=["gifs", "split", "conjugate", "drill"], default="gifs")
    c.add_argument("--points", type=int, default=fractal.VERIFY_BUDGET)
    c.add_argument("-a", type=int)
    c.add_argument("-I")
    c.add_argument("-c", type=int)
    c.add_argument("-b", type=int)
    drill_opts(c, False)
    c.add_argument("--out")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
