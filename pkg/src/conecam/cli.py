"""Command-line front end.

Subcommands: phantom, forward, adjoint, normal, reconstruct, visibility,
probe-order, selftest.  Exit codes: 0 success, 1 I/O error, 2 config
error, 3 numerical self-test failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import arrayfile
from .config import DEFAULT_CONFIG, ConfigError, load_config, \
    load_config_text
from .errors import ConecamError
from .grids import VolumeGrid
from .microlocal import Covector, canonical_sample, recover_covector, \
    visibility_map
from .operator import adjoint, forward
from .phantoms import Ball, Composite, SmoothBump, make_phantom
from .reconstruct import SolverConfig, SymbolProbeConfig, apply_normal, \
    riesz_precondition, solve, symbol_order_probe


def _load_cfg(args):
    if args.config is None:
        return load_config_text(DEFAULT_CONFIG)
    return load_config(args.config)


def _check_volume_dims(vol, cfg):
    for axis, (a, b) in enumerate(zip(vol.dims, cfg.volume.dims)):
        if a != b:
            raise ConfigError(
                f"volume axis {axis}: file has {a} nodes, config has {b}")


def _check_data_dims(data, cfg):
    names = ("t", "theta", "psi") if data.is_restricted else \
        ("v1", "v2", "theta", "psi", "phi")
    for name, a, b in zip(names, data.shape, cfg.data_grid.shape):
        if a != b:
            raise ConfigError(
                f"data axis {name!r}: file has {a} nodes, config has {b}")


def _banner(cfg, out=sys.stdout):
    print(f"config_hash={cfg.config_hash} seed={cfg.seed}", file=out)


def cmd_phantom(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    parts = []
    for b in args.ball or []:
        cx, cy, cz, r, amp = [float(x) for x in b]
        parts.append(Ball((cx, cy, cz), r, amp))
    for b in args.bump or []:
        cx, cy, cz, inner, outer, amp = [float(x) for x in b]
        parts.append(SmoothBump((cx, cy, cz), inner, outer, amp))
    if not parts:
        raise ConfigError("phantom needs at least one --ball or --bump")
    spec = parts[0] if len(parts) == 1 else Composite(tuple(parts))
    vol = make_phantom(spec, cfg.volume.origin, cfg.volume.spacing,
                       cfg.volume.dims)
    arrayfile.write(args.out, vol)
    return 0


def cmd_forward(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    vol = arrayfile.read(args.infile)
    if not isinstance(vol, VolumeGrid):
        raise ConfigError("forward expects a volume input")
    _check_volume_dims(vol, cfg)
    out = forward(vol, cfg.data_grid, cfg.weight, cfg.quadrature)
    arrayfile.write(args.out, out)
    return 0


def cmd_adjoint(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    data = arrayfile.read(args.infile)
    if isinstance(data, VolumeGrid):
        raise ConfigError("adjoint expects cone data input")
    _check_data_dims(data, cfg)
    out = adjoint(data, cfg.volume, cfg.weight, cfg.quadrature)
    arrayfile.write(args.out, out)
    return 0


def cmd_normal(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    vol = arrayfile.read(args.infile)
    if not isinstance(vol, VolumeGrid):
        raise ConfigError("normal expects a volume input")
    _check_volume_dims(vol, cfg)
    out = apply_normal(vol, cfg.data_grid, cfg.weight, cfg.quadrature)
    arrayfile.write(args.out, out)
    return 0


def cmd_reconstruct(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    data = arrayfile.read(args.infile)
    if isinstance(data, VolumeGrid):
        raise ConfigError("reconstruct expects cone data input")
    _check_data_dims(data, cfg)
    mask = arrayfile.read(args.mask) if args.mask else None
    truth = arrayfile.read(args.truth) if args.truth else None
    solver = SolverConfig(
        max_iters=args.max_iters or cfg.solver.max_iters,
        rel_tol=args.tol or cfg.solver.rel_tol,
        preconditioner=args.precond or cfg.solver.preconditioner,
        visibility_mask=mask)
    vol, log = solve(data, solver, cfg.volume, cfg.weight, cfg.quadrature,
                     f_true=truth)
    arrayfile.write(args.out, vol)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("iter,residual,error\n")
            for rec in log:
                fh.write(f"{rec.iteration},{rec.residual!r},{rec.error!r}\n")
    print(f"iterations={log[-1].iteration} residual={log[-1].residual!r}")
    return 0


def cmd_visibility(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    vmap = visibility_map(cfg.detector, cfg.volume, cfg.weight,
                          n_dir=args.n_dir)
    arrayfile.write(args.out, vmap)
    return 0


def cmd_probe_order(args):
    cfg = _load_cfg(args)
    _banner(cfg)
    ladder = tuple(float(x) for x in args.ladder.split(","))
    probe = SymbolProbeConfig(center=tuple(float(x) for x in args.center),
                              window_radius=args.window_radius,
                              direction=tuple(float(x)
                                              for x in args.direction),
                              ladder=ladder)
    res = symbol_order_probe(probe, cfg.volume, cfg.data_grid, cfg.weight,
                             cfg.quadrature)
    lines = ["k,a_k"]
    for k, a in zip(res.ks, res.quotients):
        lines.append(f"{k!r},{a!r}")
    text = "\n".join(lines) + f"\nslope,{res.slope!r}\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _selftest_checks(cfg):
    rng = np.random.default_rng(cfg.seed)
    checks = []

    # matched-pair identity on small random fields
    f = cfg.volume.like(rng.standard_normal(cfg.volume.dims))
    g = cfg.data_grid.like(rng.standard_normal(cfg.data_grid.shape))
    Af = forward(f, cfg.data_grid, cfg.weight, cfg.quadrature)
    Atg = adjoint(g, cfg.volume, cfg.weight, cfg.quadrature)
    mismatch = abs(Af.inner(g) - f.inner(Atg)) / (f.norm() * g.norm())
    checks.append(("adjoint_identity", mismatch, mismatch < 1e-10))

    # canonical-relation roundtrip on random accessible covectors
    lo, hi = cfg.volume.box
    worst = 0.0
    tried = 0
    while tried < 25:
        z = lo + (hi - lo) * rng.random(3)
        zeta = rng.standard_normal(3)
        cv = Covector(z, zeta)
        try:
            pts = canonical_sample(cfg.detector, cv, n_u=2, n_phi=2)
        except ConecamError:
            continue
        tried += 1
        for cp in pts:
            rec, _ = recover_covector(cfg.detector, cp.u, cp.beta, cp.phi,
                                      cp.u_hat, cp.beta_hat, cp.phi_hat,
                                      cp.vertex_chart, cp.direction_chart)
            err = (np.linalg.norm(rec.z - cv.z) / (np.linalg.norm(cv.z) + 1)
                   + np.linalg.norm(rec.zeta - cv.zeta)
                   / np.linalg.norm(cv.zeta))
            worst = max(worst, err)
    checks.append(("canonical_roundtrip", worst, worst < 1e-9))

    # Riesz multiplier pairing
    h = cfg.volume.like(rng.standard_normal(cfg.volume.dims))
    back = riesz_precondition(riesz_precondition(h, 2.0), -2.0)
    pair = float(np.max(np.abs(back.values - h.values))
                 / np.max(np.abs(h.values)))
    checks.append(("riesz_pairing", pair, pair < 1e-12))
    return checks


def cmd_selftest(args):
    cfg = _load_cfg(args)
    lines = [f"config_hash={cfg.config_hash} seed={cfg.seed}"]
    checks = _selftest_checks(cfg)
    ok = True
    for name, value, passed in checks:
        lines.append(f"{name} value={value!r} {'PASS' if passed else 'FAIL'}")
        ok = ok and passed
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if ok else 3


def build_parser():
    p = argparse.ArgumentParser(prog="conecam",
                                description="Weighted cone transform "
                                "toolbox")
    p.add_argument("--config", default=None,
                   help="experiment config file (defaults to the shipped "
                        "sphere experiment)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("phantom", help="rasterize a phantom volume")
    sp.add_argument("--ball", nargs=5, action="append",
                    metavar=("CX", "CY", "CZ", "R", "AMP"))
    sp.add_argument("--bump", nargs=6, action="append",
                    metavar=("CX", "CY", "CZ", "INNER", "OUTER", "AMP"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_phantom)

    for name, func, inhelp in [("forward", cmd_forward, "volume file"),
                               ("adjoint", cmd_adjoint, "cone data file"),
                               ("normal", cmd_normal, "volume file")]:
        sp = sub.add_parser(name)
        sp.add_argument("--in", dest="infile", required=True, help=inhelp)
        sp.add_argument("--out", required=True)
        sp.set_defaults(func=func)

    sp = sub.add_parser("reconstruct", help="iterative inversion")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--max-iters", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--precond", choices=("none", "riesz"), default=None)
    sp.add_argument("--mask", default=None, help="visibility mask volume")
    sp.add_argument("--truth", default=None,
                    help="ground-truth volume for error logging")
    sp.add_argument("--log", default=None, help="CSV iteration log")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("visibility", help="per-voxel visibility fractions")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-dir", type=int, default=64)
    sp.set_defaults(func=cmd_visibility)

    sp = sub.add_parser("probe-order",
                        help="normal-operator frequency-decay slope")
    sp.add_argument("--center", nargs=3, default=["0.2", "-0.1", "0.15"])
    sp.add_argument("--direction", nargs=3, default=["0.3", "0.5", "0.81"])
    sp.add_argument("--window-radius", type=float, default=0.6)
    # default rungs stay below Nyquist/2 of the default 16^3 volume
    sp.add_argument("--ladder", default="0.8,1.05,1.4,1.8")
    sp.add_argument("--out", default=None, help="CSV output path")
    sp.set_defaults(func=cmd_probe_order)

    sp = sub.add_parser("selftest",
                        help="adjoint, roundtrip and multiplier checks")
    sp.add_argument("--log", default=None)
    sp.set_defaults(func=cmd_selftest)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except ConecamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
