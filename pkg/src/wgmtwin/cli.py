"""Command-line entry points: simulate, sweep, optimize, analytic, compare."""

import argparse
import configparser
import os
import sys

import numpy as np

from . import analytic, plotting, workflow
from .dipole import export_farfield
from .geometry import AlignmentOffset, DeviceGeometry
from .metrics import write_curve_csv, write_report_json
from .nearfield import (CavityMode, EmitterSpec, NearFieldSpec, emitter_preset,
                        import_nearfield)
from .workflow import RunConfig


class ConfigError(ValueError):
    """Config file problem, reported with its section and key."""


_GEOMETRY_KEYS = {"r_d", "h", "a1", "a2", "d1", "d2", "r_h1", "r_h2", "z1",
                  "z2", "n_diamond", "n_ox", "n_sio2", "lambda0", "alpha1",
                  "alpha2"}
_NEARFIELD_KEYS = {"variant", "file", "m", "rho_m", "w", "amp_rho", "amp_z",
                   "annulus_inner", "annulus_outer", "annulus"}
_EMITTER_KEYS = {"name", "branch", "fp", "q", "v", "n_eff"}
_RUN_KEYS = {"na", "eta_ex", "n_theta", "n_phi", "offset_u", "offset_v",
             "offset_layer", "max_radius", "include_direct", "seed", "out_dir"}


def _get(parser: configparser.ConfigParser, section: str, key: str, cast, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        if cast is bool:
            return parser.getboolean(section, key)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} "
                          f"as {cast.__name__}") from exc


def _check_keys(parser: configparser.ConfigParser, section: str, allowed: set) -> None:
    if not parser.has_section(section):
        return
    for key in parser.options(section):
        if key not in allowed:
            raise ConfigError(f"[{section}] {key}: unknown key "
                              f"(expected one of {sorted(allowed)})")


def load_config(path: str) -> RunConfig:
    """Build a RunConfig from an INI file with [geometry], [nearfield],
    [emitter], and [run] sections; every key is optional."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for section in parser.sections():
        if section not in ("geometry", "nearfield", "emitter", "run"):
            raise ConfigError(f"[{section}]: unknown section")
    _check_keys(parser, "geometry", _GEOMETRY_KEYS)
    _check_keys(parser, "nearfield", _NEARFIELD_KEYS)
    _check_keys(parser, "emitter", _EMITTER_KEYS)
    _check_keys(parser, "run", _RUN_KEYS)

    gdef = DeviceGeometry()
    gkw = {}
    for name in ("r_d", "h", "a1", "a2", "d1", "d2", "r_h1", "r_h2", "z1",
                 "z2", "n_diamond", "n_ox", "n_sio2", "lambda0"):
        gkw[name] = _get(parser, "geometry", name, float, getattr(gdef, name))
    for name in ("alpha1", "alpha2"):
        gkw[name] = _get(parser, "geometry", name, complex, getattr(gdef, name))
    try:
        geometry = DeviceGeometry(**gkw)
    except ValueError as exc:
        raise ConfigError(f"[geometry]: {exc}") from exc

    variant = _get(parser, "nearfield", "variant", str, "analytic").strip().lower()
    if variant == "imported":
        file_ = _get(parser, "nearfield", "file", str, None)
        if file_ is None:
            raise ConfigError("[nearfield] file: required for variant = imported")
        if not os.path.isabs(file_):
            file_ = os.path.join(os.path.dirname(os.path.abspath(path)), file_)
        if not os.path.isfile(file_):
            raise ConfigError(f"[nearfield] file: not found: {file_}")
        nearfield = import_nearfield(file_)
        annulus_default = None
    elif variant == "analytic":
        ndef = NearFieldSpec()
        try:
            nearfield = NearFieldSpec(
                variant="analytic",
                M=_get(parser, "nearfield", "m", int, ndef.M),
                rho_m=_get(parser, "nearfield", "rho_m", float, ndef.rho_m),
                w=_get(parser, "nearfield", "w", float, ndef.w),
                amp_rho=_get(parser, "nearfield", "amp_rho", complex, ndef.amp_rho),
                amp_z=_get(parser, "nearfield", "amp_z", complex, ndef.amp_z))
        except ValueError as exc:
            raise ConfigError(f"[nearfield]: {exc}") from exc
        annulus_default = (max(0.0, nearfield.rho_m - 2 * nearfield.w),
                           nearfield.rho_m + 2 * nearfield.w)
    else:
        raise ConfigError(f"[nearfield] variant: expected 'analytic' or "
                          f"'imported', got {variant!r}")
    annulus = annulus_default
    if parser.has_option("nearfield", "annulus"):
        if parser.get("nearfield", "annulus").strip().lower() != "none":
            raise ConfigError("[nearfield] annulus: only 'none' is accepted; "
                              "use annulus_inner/annulus_outer for a band")
        annulus = None
    inner = _get(parser, "nearfield", "annulus_inner", float, None)
    outer = _get(parser, "nearfield", "annulus_outer", float, None)
    if (inner is None) != (outer is None):
        raise ConfigError("[nearfield] annulus_inner/annulus_outer: "
                          "set both or neither")
    if inner is not None:
        annulus = (inner, outer)

    name = _get(parser, "emitter", "name", str, "snv").strip().lower()
    fp = _get(parser, "emitter", "fp", float, 0.0)
    try:
        if name == "custom":
            branch = _get(parser, "emitter", "branch", float, None)
            if branch is None:
                raise ConfigError("[emitter] branch: required for name = custom")
            emitter = EmitterSpec("custom", branch, fp)
        else:
            emitter = emitter_preset(name, fp)
            branch = _get(parser, "emitter", "branch", float, None)
            if branch is not None:
                emitter = EmitterSpec(emitter.name, branch, fp)
    except ValueError as exc:
        raise ConfigError(f"[emitter]: {exc}") from exc
    q = _get(parser, "emitter", "q", float, None)
    v = _get(parser, "emitter", "v", float, None)
    if (q is None) != (v is None):
        raise ConfigError("[emitter] q/v: set both or neither")
    try:
        mode = CavityMode(q, v, _get(parser, "emitter", "n_eff", float, 1.0)) \
            if q is not None else None
    except ValueError as exc:
        raise ConfigError(f"[emitter]: {exc}") from exc

    try:
        alignment = AlignmentOffset(
            _get(parser, "run", "offset_u", float, 0.0),
            _get(parser, "run", "offset_v", float, 0.0),
            _get(parser, "run", "offset_layer", int, 1))
        return RunConfig(
            geometry=geometry, nearfield=nearfield, alignment=alignment,
            emitter=emitter, mode=mode,
            n_theta=_get(parser, "run", "n_theta", int, 181),
            n_phi=_get(parser, "run", "n_phi", int, 256),
            na=_get(parser, "run", "na", float, 0.7),
            eta_ex=_get(parser, "run", "eta_ex", float, 1.0),
            annulus=annulus,
            max_radius=_get(parser, "run", "max_radius", float, None),
            include_direct=_get(parser, "run", "include_direct", bool, True),
            seed=_get(parser, "run", "seed", int, 0),
            out_dir=_get(parser, "run", "out_dir", str, "out"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[run]: {exc}") from exc


def write_geometry_ini(geom: DeviceGeometry, path) -> None:
    """Write the [geometry] section of an optimized device."""
    with open(path, "w") as fh:
        fh.write("[geometry]\n")
        for name in ("r_d", "h", "a1", "a2", "d1", "d2", "r_h1", "r_h2",
                     "z1", "z2", "n_diamond", "n_ox", "n_sio2", "lambda0"):
            fh.write(f"{name} = {getattr(geom, name):.12g}\n")
        for name in ("alpha1", "alpha2"):
            fh.write(f"{name} = {getattr(geom, name):.12g}\n")


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    import dataclasses

    changes = {}
    if args.na is not None:
        changes["na"] = args.na
    if args.eta_ex is not None:
        changes["eta_ex"] = args.eta_ex
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.hemisphere is not None:
        try:
            t, p = args.hemisphere.lower().split("x")
            changes["n_theta"], changes["n_phi"] = int(t), int(p)
        except ValueError:
            raise ConfigError(f"--hemisphere: expected TxP integers, "
                              f"got {args.hemisphere!r}") from None
    if args.layer2_only:
        changes["include_direct"] = False
    return dataclasses.replace(config, **changes) if changes else config


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _cmd_simulate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    os.makedirs(config.out_dir, exist_ok=True)
    report, fmap = workflow.run_pipeline(config)
    write_report_json(report, os.path.join(config.out_dir, "report.json"))
    write_curve_csv(report.curve, os.path.join(config.out_dir, "curve.csv"))
    export_farfield(fmap, os.path.join(config.out_dir, "farfield.csv"))
    plotting.plot_farfield(fmap, os.path.join(config.out_dir, "farfield.png"),
                           config.na)
    plotting.plot_curve(report.curve, os.path.join(config.out_dir, "curve.png"),
                        config.na)
    print(f"eta_col({_fmt(config.na)}) = {_fmt(report.eta_col)}")
    print(f"overlap_gauss = {_fmt(report.overlap_gauss)}")
    print(f"eta_zpl = {_fmt(report.eta_zpl)}")
    print(f"eta_tot = {_fmt(report.eta_tot)}")
    print(f"wrote {config.out_dir}/report.json")
    return 0


def _cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    os.makedirs(config.out_dir, exist_ok=True)
    try:
        na, nb = (int(v) for v in args.grid.lower().split("x"))
    except ValueError:
        raise ConfigError(f"--grid: expected NxN integers, got {args.grid!r}") from None
    if na != nb:
        raise ConfigError(f"--grid: sweep raster must be square, got {args.grid!r}")
    result = workflow.alignment_sweep(config, args.layer, grid_n=na,
                                      keep_maps=args.snapshots)
    write_path = os.path.join(config.out_dir, "sweep.csv")
    workflow.write_sweep_csv(result, write_path)
    plotting.plot_sweep(result, os.path.join(config.out_dir, "sweep.png"))
    if args.snapshots:
        for i, fmap in enumerate(result.maps):
            plotting.plot_farfield(
                fmap, os.path.join(config.out_dir, f"farfield_{i:03d}.png"),
                config.na)
    print(f"layer {args.layer} sweep over {len(result.offsets)} offsets")
    print(f"eta_col min = {_fmt(result.eta_col.min())}, "
          f"max = {_fmt(result.eta_col.max())}, "
          f"std = {_fmt(float(np.std(result.eta_col)))}")
    print(f"wrote {write_path}")
    return 0


def _cmd_optimize(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    os.makedirs(config.out_dir, exist_ok=True)
    best, trace = workflow.optimize_geometry(config, budget=args.budget,
                                             seed=args.seed)
    workflow.write_trace_csv(trace, os.path.join(config.out_dir, "trace.csv"))
    write_geometry_ini(best, os.path.join(config.out_dir, "optimized.ini"))
    plotting.plot_trace(trace, os.path.join(config.out_dir, "trace.png"))
    print(f"best objective = {_fmt(float(trace[:, -1].max()))} "
          f"after {len(trace)} evaluations")
    for name in workflow.OPT_PARAMS:
        print(f"{name} = {_fmt(getattr(best, name))}")
    print(f"wrote {config.out_dir}/optimized.ini")
    return 0


def _cmd_analytic(args) -> int:
    if not args.fig2:
        raise ConfigError("analytic: nothing to do (use --fig2)")
    out = args.out if args.out is not None else "out"
    os.makedirs(out, exist_ok=True)
    try:
        charges = [int(v) for v in args.charges.split(",")]
    except ValueError:
        raise ConfigError(f"--charges: expected comma-separated integers, "
                          f"got {args.charges!r}") from None
    table = analytic.fig2_profiles(charges)
    csv_path = os.path.join(out, "fig2_profiles.csv")
    analytic.write_fig2_csv(table, csv_path)
    plotting.plot_profiles(table, os.path.join(out, "fig2.png"))
    print(f"wrote {csv_path}")
    return 0


def _cmd_compare(args) -> int:
    out = args.out if args.out is not None else "out"
    os.makedirs(out, exist_ok=True)
    try:
        n_list = [int(v) for v in args.N.split(",")]
    except ValueError:
        raise ConfigError(f"--N: expected comma-separated integers, "
                          f"got {args.N!r}") from None
    table = workflow.model_compare(analytic.RingSpec(), n_list)
    csv_path = os.path.join(out, "compare.csv")
    workflow.write_compare_csv(table, csv_path)
    plotting.plot_convergence(table, os.path.join(out, "compare.png"))
    print("N rms_if rms_ff")
    for count, rms_if, rms_ff in table:
        print(f"{int(count)} {_fmt(rms_if)} {_fmt(rms_ff)}")
    print(f"wrote {csv_path}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--na", type=float, default=None,
                        help="NA of record (default 0.7)")
    parser.add_argument("--eta-ex", dest="eta_ex", type=float, default=None,
                        help="extraction efficiency multiplier")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--hemisphere", default=None, metavar="TxP",
                        help="hemisphere grid, e.g. 181x256")
    parser.add_argument("--layer2-only", action="store_true",
                        help="drop the direct layer-1 far field")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgmtwin",
        description="Dipole-superposition simulator for vertically emitting "
                    "microdisk devices with two perturbation grating layers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one end-to-end run from a config file")
    p.add_argument("config")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="alignment sweep of one grating layer")
    p.add_argument("config")
    p.add_argument("--layer", type=int, choices=(1, 2), required=True)
    p.add_argument("--grid", default="10x10", metavar="NxN",
                   help="reduced-domain raster order (default 10x10)")
    p.add_argument("--snapshots", action="store_true",
                   help="render a far-field snapshot per offset")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("optimize", help="derivative-free geometry search")
    p.add_argument("config")
    p.add_argument("--budget", type=int, default=100,
                   help="objective evaluation cap (default 100)")
    _add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("analytic", help="closed-form profile generation")
    p.add_argument("--fig2", action="store_true",
                   help="write intermediate/far-field cross sections vs NA")
    p.add_argument("--charges", default="0,1,2,3",
                   help="comma-separated winding charges (default 0,1,2,3)")
    _add_common(p)
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("compare", help="discrete rings vs closed forms")
    p.add_argument("--N", default="6,12,30,60,120",
                   help="comma-separated dipole counts (default 6,12,30,60,120)")
    _add_common(p)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
