"""Command-line front end.

Subcommands: ``decompose``, ``accessibility``, ``classify``, ``simulate``,
``verify``. Reports are ``key = value`` lines on stdout. Exit codes: 0 ok,
1 a ``verify`` check failed, 2 usage or spec error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys as _sys

import numpy as np

from . import __version__
from .accessibility import aff2_accessible, gamma_rank
from .controllability import ClassifyOptions, classify, find_regular_pair
from .errors import DomainError, ModelError, NumericalError, PreconditionError, ResourceError, SpecError
from .reach import CloudConfig, duality_cloud_check, reach_cloud, system_digest, write_cloud_csv
from .spectral import closure_check, differential_at_identity, eigensplit, invariance_residual
from .specfile import PRESETS, load_preset, load_spec
from .system import reverse, translation_identity_residual

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SPEC = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, complex):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _emit(out, key: str, value) -> None:
    print(f"{key} = {_fmt(value)}", file=out)


def _load(args):
    if (args.system is None) == (args.preset is None):
        raise SpecError("give exactly one of --system or --preset")
    return load_preset(args.preset) if args.preset else load_spec(args.system)


def _header(sys, out) -> None:
    _emit(out, "system", sys.name)
    _emit(out, "family", sys.model.family)
    _emit(out, "dim", sys.dim)
    _emit(out, "digest", system_digest(sys))


def _parse_point(text, sys):
    if text is None:
        return sys.model.identity
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise SpecError(f"--point must be comma-separated numbers, got {text!r}") from None


def cmd_decompose(args, out) -> int:
    sys = _load(args)
    _header(sys, out)
    L = differential_at_identity(sys.model, sys.aut)
    tol = args.tol if args.tol is not None else 1e-9
    split = eigensplit(L, tol)
    ev = sorted(split.eigenvalues.tolist(), key=lambda z: (abs(z), z.real, z.imag))
    _emit(out, "df0", L.tolist())
    _emit(out, "eigenvalues", [complex(z) if abs(z.imag) > 0 else z.real for z in ev])
    _emit(out, "moduli", sorted(split.moduli.tolist()))
    _emit(out, "tol", tol)
    _emit(out, "dims", "{}/{}/{}".format(*split.dims))
    _emit(out, "dim_plus", split.dims[0])
    _emit(out, "dim_zero", split.dims[1])
    _emit(out, "dim_minus", split.dims[2])
    _emit(out, "boundary_warning", split.boundary_warning)
    _emit(out, "invariance_residual", max(invariance_residual(L, split.block(b)) for b in ("plus", "zero", "minus")))
    rep = closure_check(sys.model, split)
    for key, ok in rep.checks.items():
        _emit(out, f"closure.{key}", ok)
    return EXIT_OK


def cmd_accessibility(args, out) -> int:
    sys = _load(args)
    _header(sys, out)
    x = _parse_point(args.point, sys)
    tol = args.tol if args.tol is not None else 1e-7
    _emit(out, "point", x.tolist())
    for direction in ("plus", "minus"):
        rep = gamma_rank(sys, x, args.depth, args.samples, tol, direction, args.seed)
        _emit(out, f"gamma_{direction}.rank", f"{rep.rank}/{rep.dim}")
        _emit(out, f"gamma_{direction}.vectors_used", rep.vectors_used)
        _emit(out, f"gamma_{direction}.accessible", rep.accessible)
        _emit(out, f"gamma_{direction}.heuristic_negative", rep.heuristic_negative)
    max_k = args.max_k if args.max_k is not None else 2 * sys.dim
    pair = find_regular_pair(sys, max_k, tol, args.seed, args.samples)
    _emit(out, "regular_pair", pair.status)
    if pair.k is not None:
        _emit(out, "regular_pair.k", pair.k)
    if sys.aff2 is not None:
        p = sys.aff2
        _emit(out, "aff2_accessible", aff2_accessible(p.a, p.d, p.hp0, p.gp0))
    return EXIT_OK


def cmd_classify(args, out) -> int:
    sys = _load(args)
    _header(sys, out)
    opts = ClassifyOptions(
        max_k=args.max_k,
        tol=args.tol,
        seed=args.seed,
        samples=args.samples,
        depth=args.depth,
    )
    for line in classify(sys, opts).lines():
        print(line, file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    sys = _load(args)
    _header(sys, out)
    cfg = CloudConfig(
        steps=args.steps,
        controls_per_channel=args.lattice,
        prune_cell=args.cell,
        max_points=args.max_points,
        seed=args.seed,
    )
    cloud = reach_cloud(sys, cfg, args.direction)
    _emit(out, "direction", args.direction)
    _emit(out, "steps", cfg.steps)
    _emit(out, "controls", len(cloud.meta["controls"]))
    _emit(out, "points", len(cloud))
    _emit(out, "truncated", cloud.truncated)
    for k in range(cfg.steps + 1):
        _emit(out, f"new_at_k{k}", int(np.sum(cloud.k_reached == k)))
    if args.out:
        write_cloud_csv(cloud, args.out)
        _emit(out, "csv", args.out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    """Self-consistency checks of the loaded system; exit 1 if any fails."""
    sys = _load(args)
    _header(sys, out)
    rng = np.random.default_rng(args.seed)
    m = sys.model
    results = {}

    try:
        sys.aut.check(m, rng)
        results["automorphism"] = True
    except ModelError:
        results["automorphism"] = False

    if sys.range.is_box:
        lo, hi = sys.range.lo, sys.range.hi
        controls = rng.uniform(lo, hi, size=(5, sys.channels))
    else:
        controls = sys.range.points[rng.integers(0, len(sys.range.points), size=5)]
    g = m.random_element(rng, scale=0.5)
    res = translation_identity_residual(sys, len(controls), g, controls)
    _emit(out, "translation_residual", res)
    results["translation_identity"] = res <= 1e-10

    pts = m.random_element(rng, 20, scale=0.5)
    u = controls[0]
    inv_err = float(np.max(m.distance(sys.f_inv(u, sys.f(u, pts)), pts)))
    rev = reverse(sys)
    rev_err = float(np.max(m.distance(rev.f(u, pts), sys.f_inv(u, pts))))
    _emit(out, "inverse_residual", inv_err)
    _emit(out, "reversed_residual", rev_err)
    results["inverse_step"] = inv_err <= 1e-9
    results["reversed_step"] = rev_err <= 1e-9

    split = eigensplit(differential_at_identity(m, sys.aut), 1e-9)
    results["split_dims"] = sum(split.dims) == sys.dim
    results["closure"] = closure_check(m, split).ok

    if not sys.range.is_box:
        k = min(args.steps, 3)
        rep = duality_cloud_check(sys, k=k)
        results["duality"] = rep.equal

    for key, ok in results.items():
        _emit(out, f"check.{key}", ok)
    passed = all(results.values())
    _emit(out, "verify", "PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liectrl", description="Controllability analysis of linear systems on Lie groups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--system", help="path to a JSON system spec")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in system")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("decompose", help="spectral splitting of df0")
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("accessibility", help="rank of transported control fields")
    common(p)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--max-k", type=int, default=None)
    p.add_argument("--point", default=None, help="comma-separated chart coordinates (default: identity)")
    p.set_defaults(func=cmd_accessibility)

    p = sub.add_parser("classify", help="controllability verdict")
    common(p)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--max-k", type=int, default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="point cloud of the reachable set")
    common(p)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--lattice", type=int, default=5, help="controls per channel")
    p.add_argument("--cell", type=float, default=1e-3, help="pruning cell size")
    p.add_argument("--max-points", type=int, default=10**6)
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="self-consistency checks")
    common(p)
    p.add_argument("--steps", type=int, default=3)
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv=None, out=None) -> int:
    out = _sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_SPEC
    try:
        return args.func(args, out)
    except (SpecError, PreconditionError, DomainError, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_SPEC
    except (NumericalError, ResourceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
