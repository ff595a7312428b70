"""Command-line entry point: table dumps, single runs, and sweeps.

Configuration is a flat key = value text file with section prefixes
(machine., plant., controller., sweep.); every flag and trailing
key=value override maps onto the same keys, so any run is reproducible
from its sweep_meta echo.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .machine import MachineParams, OperatingPoint
from .metrics import MetricsReport
from .plant import PlantConfig
from .sweep import (SweepSpec, VariantSpec, run_single, run_sweep,
                    trace_filename, write_sweep_outputs)
from .vsi import build_vv_table, build_vvv_table, vv_table_csv, vvv_table_csv


@dataclass(frozen=True)
class RunManifest:
    """Parsed invocation: what to run, where, and with which overrides."""

    command: str
    config_path: str | None
    outdir: Path
    overrides: tuple[tuple[str, str], ...] = ()


class ConfigError(ValueError):
    """Carries every validation problem found in a configuration."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("\n".join(errors))


_MACHINE_KEYS = {"Rs", "Rr", "Lls", "Llr", "LM", "Jm", "P", "Vdc"}


@dataclass
class RunConfig:
    machine: MachineParams = field(default_factory=MachineParams)
    plant: PlantConfig = field(default_factory=PlantConfig)
    sweep: SweepSpec = field(default_factory=lambda: SweepSpec(
        variants=(VariantSpec("sv-zl"), VariantSpec("vvv"),
                  VariantSpec("sv-zl", lambda_xy=0.5),
                  VariantSpec("sv-zw", lambda_xy=0.72))))
    variant: VariantSpec = VariantSpec("sv-zl")
    fe: float = 50.0
    is_star: float = 1.0


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_variants(text: str) -> tuple[VariantSpec, ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        kind = parts[0]
        lxy = float(parts[1]) if len(parts) > 1 else 0.0
        lsc = float(parts[2]) if len(parts) > 2 else 0.0
        out.append(VariantSpec(kind, lambda_xy=lxy, lambda_sc=lsc))
    return tuple(out)


def parse_config_text(text: str,
                      overrides: tuple[tuple[str, str], ...] = ()) -> RunConfig:
    """Validate a configuration; collects every problem instead of stopping
    at the first one."""
    errors: list[str] = []
    entries: dict[str, tuple[str, str]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, val = line.partition("=")
        entries[key.strip()] = (val.strip(), f"line {lineno}")
    for key, val in overrides:
        entries[key.strip()] = (val.strip(), "override")

    machine_kw: dict = {}
    plant_kw: dict = {}
    sweep_kw: dict = {}
    single_kw: dict = {}

    converters = {
        "plant.ts": ("ts", float, plant_kw),
        "plant.substeps": ("substeps_per_ts", int, plant_kw),
        "plant.integrator": ("integrator", str, plant_kw),
        "sweep.fe": ("fe_list", _parse_float_list, sweep_kw),
        "sweep.is_list": ("is_list", _parse_float_list, sweep_kw),
        "sweep.is_levels": ("is_levels", int, sweep_kw),
        "sweep.is_min": ("is_min", float, sweep_kw),
        "sweep.is_margin": ("is_margin", float, sweep_kw),
        "sweep.warmup_periods": ("warmup_periods", int, sweep_kw),
        "sweep.measure_periods": ("measure_periods", int, sweep_kw),
        "sweep.slip": ("slip_fraction", float, sweep_kw),
        "sweep.variants": ("variants", _parse_variants, sweep_kw),
        "controller.variant": ("kind", str, single_kw),
        "controller.lambda_xy": ("lambda_xy", float, single_kw),
        "controller.lambda_sc": ("lambda_sc", float, single_kw),
        "controller.fe": ("fe", float, single_kw),
        "controller.is": ("is_star", float, single_kw),
    }

    for key, (val, where) in entries.items():
        if key.startswith("machine."):
            name = key.split(".", 1)[1]
            if name not in _MACHINE_KEYS:
                errors.append(f"{where}: unknown machine parameter {name!r}")
                continue
            try:
                machine_kw[name] = int(val) if name == "P" else float(val)
            except ValueError:
                errors.append(f"{where}: cannot parse {key} value {val!r}")
        elif key in converters:
            dest, conv, bucket = converters[key]
            try:
                bucket[dest] = conv(val)
            except ValueError as exc:
                errors.append(f"{where}: invalid {key}: {exc}")
        else:
            errors.append(f"{where}: unknown key {key!r}")

    cfg = RunConfig()
    try:
        cfg.machine = MachineParams(**machine_kw)
    except ValueError as exc:
        errors.append(f"machine: {exc}")
    try:
        cfg.plant = PlantConfig(**plant_kw)
    except ValueError as exc:
        errors.append(f"plant: {exc}")
    try:
        cfg.sweep = SweepSpec(**{**{"variants": cfg.sweep.variants}, **sweep_kw})
    except ValueError as exc:
        errors.append(f"sweep: {exc}")
    try:
        kind = single_kw.pop("kind", cfg.variant.kind)
        fe = single_kw.pop("fe", cfg.fe)
        is_star = single_kw.pop("is_star", cfg.is_star)
        cfg.variant = VariantSpec(kind, **single_kw)
        cfg.fe = fe
        cfg.is_star = is_star
        if fe <= 0:
            errors.append("controller.fe: must be > 0")
        if is_star < 0:
            errors.append("controller.is: must be >= 0")
    except ValueError as exc:
        errors.append(f"controller: {exc}")

    if errors:
        raise ConfigError(errors)
    return cfg


def validate_config(text: str,
                    overrides: tuple[tuple[str, str], ...] = ()) -> RunConfig:
    """Alias kept for symmetry with the command surface."""
    return parse_config_text(text, overrides)


def _load_config(manifest: RunManifest) -> RunConfig:
    text = ""
    if manifest.config_path:
        text = Path(manifest.config_path).read_text()
    return parse_config_text(text, manifest.overrides)


def _flag_overrides(args) -> list[tuple[str, str]]:
    pairs = []
    if getattr(args, "vdc", None) is not None:
        pairs.append(("machine.Vdc", repr(args.vdc)))
    if getattr(args, "ts", None) is not None:
        pairs.append(("plant.ts", repr(args.ts)))
    if getattr(args, "variant", None) is not None:
        pairs.append(("controller.variant", args.variant))
    if getattr(args, "lambda_xy", None) is not None:
        pairs.append(("controller.lambda_xy", repr(args.lambda_xy)))
    if getattr(args, "lambda_sc", None) is not None:
        pairs.append(("controller.lambda_sc", repr(args.lambda_sc)))
    if getattr(args, "fe", None) is not None:
        pairs.append(("controller.fe", repr(args.fe)))
    if getattr(args, "is_star", None) is not None:
        pairs.append(("controller.is", repr(args.is_star)))
    for item in getattr(args, "overrides", []) or []:
        if "=" not in item:
            raise ConfigError([f"override {item!r} is not of the form key=value"])
        key, _, val = item.partition("=")
        pairs.append((key, val))
    return pairs


def _cmd_tables(cfg: RunConfig, outdir: Path) -> int:
    vv = build_vv_table(cfg.machine.Vdc)
    vvv = build_vvv_table(vv)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "vv_table.csv").write_text(vv_table_csv(vv))
    (outdir / "vvv_table.csv").write_text(vvv_table_csv(vvv))
    print(f"wrote {outdir / 'vv_table.csv'} (32 rows) and "
          f"{outdir / 'vvv_table.csv'} (11 rows)")
    return 0


def _cmd_single(cfg: RunConfig, outdir: Path, want_trace: bool) -> int:
    op = OperatingPoint(fe=cfg.fe, is_star=cfg.is_star,
                        slip_fraction=cfg.sweep.slip_fraction)
    controller = cfg.variant.controller_config(cfg.plant.ts)
    report, trace = run_single(op, controller, cfg.machine, cfg.plant,
                               variant_tag=cfg.variant.tag,
                               warmup_periods=cfg.sweep.warmup_periods,
                               measure_periods=cfg.sweep.measure_periods,
                               want_trace=want_trace)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "single_metrics.csv").write_text(
        MetricsReport.CSV_HEADER + "\n" + report.csv_row() + "\n")
    if trace is not None:
        name = trace_filename(cfg.variant.tag, cfg.fe, cfg.is_star)
        (outdir / name).write_text(trace.to_csv())
        print(f"wrote {outdir / 'single_metrics.csv'} and {outdir / name}")
    else:
        print(f"wrote {outdir / 'single_metrics.csv'}")
    print(report.csv_row())
    return 0


def _cmd_sweep(cfg: RunConfig, outdir: Path,
               trace_points: list[str]) -> int:
    result = run_sweep(cfg.sweep, cfg.machine, cfg.plant)
    metrics_path = write_sweep_outputs(result, cfg.machine, cfg.plant, outdir)
    n_bad = sum(r.infeasible for r in result.reports)
    print(f"wrote {metrics_path}: {len(result.reports)} rows "
          f"({n_bad} infeasible)")

    for spec_str in trace_points:
        try:
            fe_s, is_s = spec_str.split(":")
            fe_req, is_req = float(fe_s), float(is_s)
        except ValueError:
            raise ConfigError([f"--trace expects fe:is, got {spec_str!r}"])
        fe = min(cfg.sweep.fe_list, key=lambda f: abs(f - fe_req))
        grid = cfg.sweep.is_grid(cfg.machine, fe)
        is_star = min(grid, key=lambda v: abs(v - is_req))
        for vs in cfg.sweep.variants:
            op = OperatingPoint(fe=fe, is_star=is_star,
                                slip_fraction=cfg.sweep.slip_fraction)
            controller = vs.controller_config(cfg.plant.ts)
            _, trace = run_single(op, controller, cfg.machine, cfg.plant,
                                  variant_tag=vs.tag,
                                  warmup_periods=cfg.sweep.warmup_periods,
                                  measure_periods=cfg.sweep.measure_periods,
                                  want_trace=True)
            name = trace_filename(vs.tag, fe, is_star)
            (Path(outdir) / name).write_text(trace.to_csv())
            print(f"wrote {Path(outdir) / name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pentadrive",
        description="FSMPC modulation analysis for a five-phase IM drive")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="configuration file path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--vdc", type=float, help="DC-link voltage override")
        p.add_argument("--ts", type=float, help="control period override (s)")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="additional configuration overrides")

    p_tables = sub.add_parser("tables", help="dump the VV/VVV tables as CSV")
    common(p_tables)

    p_single = sub.add_parser("single", help="run one operating point")
    common(p_single)
    p_single.add_argument("--variant", choices=("sv-zl", "sv-zw", "vvv"))
    p_single.add_argument("--lambda-xy", dest="lambda_xy", type=float)
    p_single.add_argument("--lambda-sc", dest="lambda_sc", type=float)
    p_single.add_argument("--fe", type=float, help="electrical frequency (Hz)")
    p_single.add_argument("--is", dest="is_star", type=float,
                          help="current reference amplitude (A)")
    p_single.add_argument("--trace", action=argparse.BooleanOptionalAction,
                          default=True, help="write the trace CSV")

    p_sweep = sub.add_parser("sweep", help="run an operating-point sweep")
    common(p_sweep)
    p_sweep.add_argument("--trace", action="append", default=[],
                         metavar="FE:IS",
                         help="dump traces for every variant at the grid "
                              "point nearest fe:is (repeatable)")
    return parser


def parse_and_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        manifest = RunManifest(command=args.command, config_path=args.config,
                               outdir=Path(args.out),
                               overrides=tuple(_flag_overrides(args)))
        cfg = _load_config(manifest)
        if args.command == "tables":
            return _cmd_tables(cfg, manifest.outdir)
        if args.command == "single":
            return _cmd_single(cfg, manifest.outdir, args.trace)
        return _cmd_sweep(cfg, manifest.outdir, args.trace)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
