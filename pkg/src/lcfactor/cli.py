"""Command-line interface: ``lcfactor {factorize,triangulate,krt,synth}``.

Scenes are read from a file argument or stdin and reports are written to
stdout or ``--output``. Exit codes: 0 success, 1 partial failure (errors
embedded in the report), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import scene as sc

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def _warn(msg: str) -> None:
    print(f"lcfactor: warning: {msg}", file=sys.stderr)


def _die(msg: str) -> int:
    print(f"lcfactor: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_scene(args) -> sc.SceneFile:
    return sc.loads_scene(_read_text(args.scene))


def _factor_options(args) -> dict:
    return {
        "mirror": args.mirror,
        "focal_sign": args.focal_sign,
        "tol": args.tol,
    }


def cmd_factorize(args) -> int:
    scene = _load_scene(args)
    report, failures = sc.factorization_report(
        scene, all_branches=args.all_branches, **_factor_options(args)
    )
    _write(sc.dumps(report), args.output)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_triangulate(args) -> int:
    scene = _load_scene(args)
    report, n_ok, n_failed = sc.triangulation_report(
        scene, drop_parallel=args.drop_parallel, warn=_warn, **_factor_options(args)
    )
    _write(sc.dumps(report), args.output)
    if args.truth:
        truth = json.loads(_read_text(args.truth))
        errs = sc.truth_errors(report, truth)
        if errs.size:
            print(
                f"lcfactor: {errs.size} points vs truth: "
                f"mean error {errs.mean():.6g}, max error {errs.max():.6g}",
                file=sys.stderr,
            )
    if n_ok == 0 and (n_failed or scene.tracks):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_krt(args) -> int:
    scene = _load_scene(args)
    report, failures = sc.krt_report(scene)
    _write(sc.dumps(report), args.output)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_synth(args) -> int:
    try:
        scene, truth = sc.synth_scene(
            seed=args.seed,
            n_cameras=args.n_cameras,
            n_points=args.n_points,
            camera_mix=args.camera_mix,
            noise=args.noise,
        )
    except ValueError as exc:
        return _die(str(exc))
    _write(sc.dumps(scene.to_json()), args.output)
    if args.truth:
        _write(sc.dumps(truth), args.truth)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcfactor",
        description="LC factorization of camera matrices and symmedian-point triangulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_io(p):
        p.add_argument("scene", nargs="?", default="-", help="scene JSON file (default: stdin)")
        p.add_argument("-o", "--output", help="write the report here instead of stdout")

    def factor_flags(p):
        p.add_argument("--mirror", choices=["plus", "minus"], default="plus",
                       help="mirror-plane variant (default: plus)")
        p.add_argument("--focal-sign", choices=["neg", "pos"], default="neg",
                       help="orientation of the focal length for pinhole cameras")
        p.add_argument("--tol", type=float, default=1e-8, help="acceptance tolerance")

    p = sub.add_parser("factorize", help="LC-factorize every camera of a scene")
    scene_io(p)
    factor_flags(p)
    p.add_argument("--all-branches", action="store_true",
                   help="also try the other mirror and focal sign and report every accepted branch")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("triangulate", help="symmedian-point triangulation of every track")
    scene_io(p)
    factor_flags(p)
    p.add_argument("--drop-parallel", action="store_true",
                   help="omit tracks whose projection lines are all parallel")
    p.add_argument("--truth", help="ground-truth sidecar; prints an error summary to stderr")
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("krt", help="KRt decomposition of pinhole cameras")
    scene_io(p)
    p.set_defaults(func=cmd_krt)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-cameras", type=int, default=5)
    p.add_argument("--n-points", type=int, default=20)
    p.add_argument("--camera-mix", choices=["pinhole", "affine", "mixed"], default="mixed")
    p.add_argument("--noise", type=float, default=0.0, help="pixel noise standard deviation")
    p.add_argument("-o", "--output", help="scene output path (default: stdout)")
    p.add_argument("--truth", help="ground-truth sidecar output path")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except sc.SceneError as exc:
        return _die(str(exc))
    except OSError as exc:
        return _die(str(exc))


if __name__ == "__main__":
    sys.exit(main())
