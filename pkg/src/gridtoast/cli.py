"""Command-line front door: build toasts, run pipelines, verify
certificates, render them, and reproduce the demo matrix.

Identical command lines and seeds yield byte-identical JSON outputs.
The GRIDTOAST_BUDGET environment variable caps oracle sizes and
GRIDTOAST_NUMBA=0 selects the pure-numpy kernels.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import serialization
from .edgecolor import run_edge_pipeline
from .hamilton import HamCertificate, run_ham_pipeline
from .homshift import FiniteGraph, HomCertificate, complete_graph, \
    run_hom_pipeline
from .markers import MarkerSet, build_markers, check_marker_property, \
    domino_family, entropy_estimate, filter_no_period, full_shift_family, \
    hom_shift_family
from .recttiling import RectCertificate, TileSet, dominoes, run_rect_pipeline
from .render import render
from .toast import Toast, ToastParams, build_toast, check_toast
from .edgecolor import EdgeColoring
from .verify import (
    validate_edge_certificate, validate_ham_certificate,
    validate_hom_certificate, validate_rect_certificate,
)

VALIDATORS = {"hom": validate_hom_certificate,
              "rect": validate_rect_certificate,
              "ham": validate_ham_certificate,
              "edge": validate_edge_certificate}

LOADERS = {"hom": HomCertificate.from_json,
           "rect": RectCertificate.from_json,
           "ham": HamCertificate.from_json,
           "edge": EdgeColoring.from_json}


def _fail(detail):
    print(json.dumps({"error": detail}), file=sys.stderr)
    return 2


def _load_toast(path):
    return Toast.from_json(serialization.load(path))


def _pattern_family(spec):
    """Parse a family spec: full:q, hom:q, or dominoes."""
    if spec == "dominoes":
        return domino_family()
    kind, _, arg = spec.partition(":")
    if kind == "full":
        return full_shift_family(int(arg or 2), 2)
    if kind == "hom":
        return hom_shift_family(int(arg or 3), 2)
    raise ValueError(f"unknown family spec {spec!r}; "
                     "use full:q, hom:q, or dominoes")


def _marker_defaults(family):
    """Deterministic a', a'' and layout for the supported families."""
    if family.name.startswith("full"):
        ap = filter_no_period(family.patterns(3), 1)[0]
        return {"a_prime": ap, "a_second": ap, "r": 6}, 21
    pats = family.enumerate_box((4, 4))

    def wrap_proper(a):
        return all(a[3, y] != a[0, y] for y in range(4)) and \
            all(a[x, 3] != a[x, 0] for x in range(4))

    ap = filter_no_period([a for a in pats if wrap_proper(a)], 1)[0]
    return {"a_prime": ap, "a_second": ap, "r": 6,
            "phases": [(0, 0), (1, 1), (2, 2)]}, 28


def cmd_toast(args):
    levels = tuple(int(r) for r in args.levels.split(",")) \
        if args.levels else ()
    params = ToastParams(args.d, args.L, args.delta, args.k, args.N,
                         args.n, levels, args.seed, strict=args.strict)
    toast = build_toast(params)
    probs = check_toast(toast)
    if probs:
        return _fail(f"toast invariants violated: {probs}")
    serialization.dump(toast.to_json(), args.output)
    print(f"toast: d={params.d} L={params.L} levels="
          f"{[len(lv) for lv in toast.levels]} -> {args.output}")
    return 0


def cmd_run(args):
    toast = _load_toast(args.toast)
    if args.family == "hom":
        H = FiniteGraph.from_json(serialization.load(args.graph)) \
            if args.graph else complete_graph(3)
        cert = run_hom_pipeline(toast, H, seed=args.seed)
    elif args.family == "rect":
        tiles = TileSet.from_json(serialization.load(args.tiles)) \
            if args.tiles else dominoes(toast.params.d)
        cert = run_rect_pipeline(toast, tiles, seed=args.seed)
    elif args.family == "ham":
        cert = run_ham_pipeline(toast, seed=args.seed)
    else:
        t = args.t if args.t is not None else 2 * toast.params.d
        cert = run_edge_pipeline(toast, t, seed=args.seed)
    with open(args.output, "w") as fh:
        fh.write(serialization.dumps(cert.to_json()))
        fh.write("\n")
    print(f"{args.family} certificate -> {args.output}")
    return 0


def cmd_verify(args):
    obj = serialization.load(args.certificate)
    family = args.family or obj.get("family")
    if family not in VALIDATORS:
        return _fail(f"unknown certificate family {family!r}")
    cert = LOADERS[family](obj)
    toast = None
    if args.boundary:
        if not args.toast:
            return _fail("--boundary needs --toast for the component data")
        toast = _load_toast(args.toast)
    res = VALIDATORS[family](cert, toast)
    print(json.dumps(res))
    return 0 if res.get("ok") else 1


def cmd_render(args):
    obj = serialization.load(args.certificate)
    render(obj, args.output, index=args.slice)
    print(f"render -> {args.output}")
    return 0


def cmd_markers(args):
    if args.action == "build":
        family = _pattern_family(args.family)
        params, t_default = _marker_defaults(family)
        if args.r is not None:
            params["r"] = args.r
        ms = build_markers(family, args.t or t_default, params)
        serialization.dump(ms.to_json(), args.output)
        print(f"markers: {len(ms)} patterns on side {ms.t * ms.k}, "
              f"tolerance {ms.r} -> {args.output}")
        return 0
    ms = MarkerSet.from_json(serialization.load(args.markers))
    res = check_marker_property(
        [np.asarray(p) for p in ms.patterns],
        args.r if args.r is not None else ms.r)
    print(json.dumps(res))
    return 0 if res["ok"] else 1


def cmd_entropy(args):
    family = _pattern_family(args.family)
    out = entropy_estimate(family, args.n_max, budget=args.budget)
    for n, count, est in out["entries"]:
        print(f"n={n} count={count} estimate={est:.6f}")
    if out["aborted_at"] is not None:
        print(f"budget exceeded at n={out['aborted_at']}; partial results "
              "above")
        return 1
    return 0


def cmd_demo(args):
    from .geometry import GridUnion
    from .tiling import tile_complement
    from .verify import validate_tiling

    results = []

    def case(name, fn):
        try:
            fn()
            results.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - demo table reports all
            results.append((name, False, str(exc)[:60]))

    toast = {}

    def build():
        toast["t"] = build_toast(ToastParams(2, 256, "1/2", 32, 4, 8, (), 0))
        probs = check_toast(toast["t"])
        if probs:
            raise ValueError(str(probs))

    case("toast build d=2 L=256", build)

    def layered():
        t = build_toast(ToastParams(2, 2048, "1/2", 16, 1, 20, (192,), 0))
        if check_toast(t):
            raise ValueError("invariants")
        toast["l"] = t

    case("toast build d=2 L=2048 one level", layered)

    def tiling_case():
        C = GridUnion(100, (-1, -1), frozenset(
            (x, y) for x in range(0, 500, 100) for y in range(0, 500, 100)))
        inner = GridUnion(100, (199, 199), frozenset({(0, 0)}))
        tl = tile_complement(C, [inner], 10, 10)
        res = validate_tiling(tl, k=10)
        if res != {"ok": True}:
            raise ValueError(str(res))

    case("tile_complement almost-10-boxes", tiling_case)

    def hom():
        cert = run_hom_pipeline(toast["l"], complete_graph(3), seed=0)
        res = validate_hom_certificate(cert, toast["l"])
        if res != {"ok": True}:
            raise ValueError(str(res))

    case("hom pipeline K_3 L=2048", hom)

    def rect():
        cert = run_rect_pipeline(toast["l"], dominoes(2), seed=0)
        res = validate_rect_certificate(cert, toast["l"])
        if res != {"ok": True}:
            raise ValueError(str(res))

    case("rect pipeline dominoes L=2048", rect)

    def ham():
        cert = run_ham_pipeline(toast["t"], seed=0)
        res = validate_ham_certificate(cert, toast["t"])
        if res != {"ok": True}:
            raise ValueError(str(res))

    case("ham pipeline L=256", ham)

    def edge():
        cert = run_edge_pipeline(toast["l"], 4, seed=0)
        res = validate_edge_certificate(cert, toast["l"])
        if res != {"ok": True}:
            raise ValueError(str(res))

    case("edge pipeline t=4 L=2048", edge)

    def markers_case():
        family = full_shift_family(2, 2)
        params, t = _marker_defaults(family)
        build_markers(family, t, params)

    case("markers full 2-shift", markers_case)

    def calibration():
        ent = entropy_estimate(full_shift_family(2, 2), 2)
        if ent["entries"][1][1] != 16:
            raise ValueError("2-shift count")
        if entropy_estimate(hom_shift_family(3, 2), 2)["entries"][1][1] != 18:
            raise ValueError("K_3 count")
        if entropy_estimate(domino_family(), 2)["entries"][1][1] != 36:
            raise ValueError("domino count")

    case("oracle calibration", calibration)

    width = max(len(n) for n, _, _ in results)
    ok = True
    for name, passed, detail in results:
        mark = "PASS" if passed else f"FAIL  {detail}"
        print(f"{name:<{width}}  {mark}")
        ok = ok and passed
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gridtoast",
        description="Toast decompositions, almost-box tilings, and "
                    "certified pattern constructors on finite Z^d windows.")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is "
                             "sequential and deterministic regardless")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("toast", help="build a toast decomposition")
    p.add_argument("action", choices=["build"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", default="1/2")
    p.add_argument("--levels", default="",
                   help="comma-separated r_1,r_2,... (empty for root only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true",
                   help="enforce the strict scale schedule")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_toast)

    p = sub.add_parser("run", help="run a pattern pipeline on a toast")
    p.add_argument("family", choices=["hom", "rect", "ham", "edge"])
    p.add_argument("--toast", required=True)
    p.add_argument("--graph", help="graph JSON for hom (default K_3)")
    p.add_argument("--tiles", help="tile-set JSON for rect "
                                   "(default dominoes)")
    p.add_argument("--t", type=int, help="colour count for edge "
                                         "(default 2d)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="validate a certificate file")
    p.add_argument("certificate")
    p.add_argument("--family", choices=["hom", "rect", "ham", "edge"])
    p.add_argument("--toast", help="toast JSON for component checks")
    p.add_argument("--boundary", action="store_true",
                   help="also check per-component boundary and period "
                        "constraints (needs --toast)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("render", help="render a certificate "
                                      "(SVG for d=2, ASCII for d=3)")
    p.add_argument("certificate")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--slice", type=int, help="axis-1 slice index for d=3")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("markers", help="build or check marker sets")
    p.add_argument("action", choices=["build", "check"])
    p.add_argument("markers", nargs="?",
                   help="marker JSON to check")
    p.add_argument("--family", default="full:2",
                   help="full:q, hom:q, or dominoes")
    p.add_argument("--t", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_markers)

    p = sub.add_parser("entropy", help="entropy estimates for a family")
    p.add_argument("--family", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("demo", help="run the demo matrix")
    p.add_argument("target", choices=["acceptance"])
    p.set_defaults(fn=cmd_demo)

    args = parser.parse_args(argv)
    if args.cmd == "markers":
        if args.action == "build" and not args.output:
            parser.error("markers build needs -o/--output")
        if args.action == "check" and not args.markers:
            parser.error("markers check needs a marker JSON path")
    try:
        return args.fn(args)
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
