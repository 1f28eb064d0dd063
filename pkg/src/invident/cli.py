"""Command-line interface.

::

    invident signal gen --kind square-chirp --f0 1 --f1 32 ... -o sig.csv
    invident plant simulate --fixture R1 --input sig.csv --seed 7 -o data.csv
    invident fit --data data.csv --curve fsi_voltvar --orders 2:5 -o model.json
    invident validate --model model.json --step 0.88:0.92 --oracle plant.json -o step_r1.csv

Every command writes ``<output>.manifest.json`` holding the fully resolved
arguments; ``--config <manifest>`` replays it (file values override flags).
Exit codes: 0 ok, 2 usage/parameter, 3 domain, 4 data, 5 model/coverage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, dataio, gsf, partition, plant, signals
from .exceptions import (
    DataError,
    DomainError,
    EstimationError,
    InvidentError,
    ModelError,
    ParameterError,
)
from .series import SampledSeries
from .sysid import fitpercent, parse_orders
from .sysid.estimate import NUISANCE_MODES
from .sysid.sweep import SELECTORS

log = logging.getLogger("invident")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_DATA, EXIT_MODEL = 0, 2, 3, 4, 5


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParameterError):
        return EXIT_USAGE
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    if isinstance(exc, (DataError, EstimationError, OSError)):
        return EXIT_DATA
    if isinstance(exc, ModelError):
        return EXIT_MODEL
    return 1


# -- helpers -----------------------------------------------------------------------


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _manifest(args, resolved: dict) -> None:
    out = Path(args.output)
    manifest = {
        "tool": "invident",
        "version": __version__,
        "command": args.command_path,
        "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command_path", "config")},
        "resolved": resolved,
    }
    _write_json(out.with_name(out.name + ".manifest.json"), manifest)


def _pair(text: str, name: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise ParameterError(f"{name} must look like a:b, got {text!r}") from None
    return a, b


def _dataset_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--input-unit", choices=dataio.UNITS, default="pu")
    g.add_argument("--voltage-base", type=float, default=dataio.DatasetConfig.voltage_base)
    g.add_argument("--frequency-base", type=float, default=60.0)
    g.add_argument("--sync-trim", type=float, default=110.0, help="seconds dropped at the start (default 110)")
    g.add_argument("--transient-trim", type=float, default=0.5, help="seconds dropped at each segment start")
    g.add_argument("--median-window", type=int, default=200, help="moving-median window in samples")
    g.add_argument("--split", type=float, default=0.7, help="training fraction of each segment")
    g.add_argument("--time-col", default="time")
    g.add_argument("--input-col", default="excitation")
    g.add_argument("--output-col", default="current")
    g.add_argument("--level-col", default="amplitude_level")


def _dataset_config(args) -> dataio.DatasetConfig:
    return dataio.DatasetConfig(
        column_map={"time": args.time_col, "input": args.input_col, "output": args.output_col, "level": args.level_col},
        input_unit=args.input_unit,
        voltage_base=args.voltage_base,
        frequency_base=args.frequency_base,
        sync_trim=args.sync_trim,
        segment_transient_trim=args.transient_trim,
        median_window=args.median_window,
        split_fraction=args.split,
    )


def _load_signal_csv(path) -> SampledSeries:
    cfg = dataio.DatasetConfig(column_map={"input": "excitation", "output": "excitation"})
    s = dataio.load_csv(path, cfg)
    chans = {"time": s["time"], "excitation": s["input"]}
    if "level" in s:
        chans["amplitude_level"] = s["level"]
    return SampledSeries(s.t0, s.dt, chans, {"time": "s", "excitation": "p.u.", "amplitude_level": "p.u."})


def _oracle(spec: str, seed: int) -> plant.PlantSpec:
    if Path(spec).exists():
        p = plant.load_plant(spec)
    else:
        p = plant.PlantSpec(tfs={spec: plant.published_fixture(spec)})
    return plant.PlantSpec(p.mode, p.tfs, p.curve, p.scheme, p.gain_scale, 0.0, seed, p.v_base)


# -- commands ----------------------------------------------------------------------


def cmd_signal_gen(args) -> int:
    for flag in ("f0", "f1"):
        if getattr(args, flag) is None:
            raise ParameterError(f"missing required flag --{flag}")
    spec = signals.ProbingSpec(
        kind=args.kind,
        f0=args.f0,
        f1=args.f1,
        sweep_time=args.sweep,
        amp_start=args.amp_start,
        amp_step=args.amp_step,
        amp_end=args.amp_end,
        dwell=args.dwell,
        fs=args.fs,
        depth=args.depth,
        bias=args.bias,
        lam=args.lam,
    )
    sig = signals.generate(spec)
    dataio.save_csv(sig, args.output, ["time", "amplitude_level", "excitation"])
    _manifest(args, {"probing": spec.to_dict(), "n_levels": spec.n_levels, "samples": len(sig)})
    print(f"wrote {args.output}: {len(sig)} samples, {spec.n_levels} levels, {spec.duration:g} s")
    return EXIT_OK


def cmd_plant_simulate(args) -> int:
    if (args.fixture is None) == (args.plant is None):
        raise ParameterError("give exactly one of --fixture or --plant")
    if args.fixture is not None:
        base = plant.PlantSpec(tfs={args.fixture: plant.published_fixture(args.fixture)})
    else:
        base = plant.load_plant(args.plant)
    spec = plant.PlantSpec(
        base.mode,
        base.tfs,
        base.curve,
        base.scheme,
        args.gain_scale if args.gain_scale is not None else base.gain_scale,
        args.noise if args.noise is not None else base.noise,
        args.seed,
        base.v_base,
    )
    sig = _load_signal_csv(args.input)
    out = plant.simulate(spec, sig)
    cols = ["time"] + (["amplitude_level"] if "amplitude_level" in out else []) + ["excitation", "current"]
    dataio.save_csv(out, args.output, cols)
    _manifest(args, {"plant": plant.plant_to_dict(spec), "clamped": out.meta["clamped"]})
    print(f"wrote {args.output}: {len(out)} samples, plant {spec.mode} ({', '.join(spec.tfs)}), clamped {out.meta['clamped']}")
    return EXIT_OK


def _sweep_options(args) -> dict:
    return {
        "orders": parse_orders(args.orders),
        "selector": args.selector,
        "n_jobs": args.jobs,
        "f_max": args.f_max,
        "nuisance": args.nuisance,
        "burn_in": args.burn_in,
    }


def cmd_fit(args) -> int:
    cfg = _dataset_config(args)
    series = dataio.load_csv(args.data, cfg)
    data = dataio.preprocess(series, cfg)
    curve = gsf.load_curve(args.curve) if args.curve else None
    base = {"voltage_base": cfg.voltage_base, "frequency_base": cfg.frequency_base, "input_unit": cfg.input_unit}
    opts = _sweep_options(args)
    if args.partition == "fixed":
        if args.curve is None:
            raise ParameterError("--partition fixed needs --curve")
        scheme = gsf.load_scheme(args.curve)
        model = partition.fit_fixed(scheme, data, curve=curve, base=base, **opts)
    else:
        span = _pair(args.span, "--span") if args.span else None
        model = partition.fit_adaptive(
            data, args.threshold, args.resolution, span=span, curve=curve, base=base, **opts
        )
    model.provenance["dataset"] = cfg.to_dict()
    partition.save_model(model, args.output)
    report = {
        "model": str(args.output),
        "segments": len(data),
        "skipped": data.meta.get("skipped", []),
        "ranges": [
            {"label": r.label, "lo": r.lo, "hi": r.hi, "hole": r.is_hole, "note": r.note, "fit": r.report.to_dict() if r.report else None}
            for r in model.ranges
        ],
    }
    report_path = args.report or str(Path(args.output).with_suffix(".report.json"))
    _write_json(report_path, report)
    _manifest(args, {"dataset": cfg.to_dict(), "sweep": partition._jsonable(opts)})
    print(f"wrote {args.output}: {len(model.ranges)} ranges from {len(data)} segments")
    for r in model.ranges:
        if r.is_hole:
            print(f"  [{r.lo:.4f}, {r.hi:.4f}]  no model ({r.note})")
        else:
            print(f"  [{r.lo:.4f}, {r.hi:.4f}]  np={r.report.n_poles} nz={r.report.n_zeros}  fit={r.report.test_fitpercent:.2f}%  G(0)={r.tf.dc_gain:.6g}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if not args.step and not args.data:
        raise ParameterError("give --step and/or --data")
    model = partition.load_model(args.model)
    report: dict = {"model": str(args.model), "steps": [], "data": None}
    rows = []
    for text in args.step or []:
        a, b = _pair(text, "--step")
        s = partition.step_series(a, b, 1.0 / args.fs, args.duration)
        res = partition.respond(model, s)
        entry = {"from": a, "to": b, "ranges": res.meta["ranges"], "final": float(res["output"][-1])}
        chans = {"time": res["time"], "input": res["input"], "output": res["output"]}
        if args.oracle:
            ref = plant.simulate(_oracle(args.oracle, args.seed), s)["current"]
            _, fit = fitpercent(ref, res["output"])
            entry["fitpercent"] = fit
            entry["oracle_final"] = float(ref[-1])
            chans["oracle"] = ref
        report["steps"].append(entry)
        rows.append(SampledSeries(s.t0, s.dt, chans))
    if args.data:
        cfg = _dataset_config(args)
        data = dataio.preprocess(dataio.load_csv(args.data, cfg), cfg)
        report["data"] = _score_dataset(model, data)
    if rows:
        if len(rows) == 1:
            dataio.save_csv(rows[0], args.output)
        else:
            for k, r in enumerate(rows, 1):
                out = Path(args.output)
                dataio.save_csv(r, out.with_name(f"{out.stem}_{k}{out.suffix}"))
    report_path = args.report or str(Path(args.output).with_suffix(".report.json"))
    _write_json(report_path, report)
    _manifest(args, {"report": report_path})
    for e in report["steps"]:
        extra = f"  fit={e['fitpercent']:.2f}%" if "fitpercent" in e else ""
        print(f"step {e['from']:g}->{e['to']:g}: ranges {','.join(e['ranges'])}  final={e['final']:.6g}{extra}")
    if report["data"]:
        for lbl, v in report["data"].items():
            print(f"range {lbl}: fit={v['fitpercent']:.2f}% over {v['segments']} segments")
    return EXIT_OK


def _score_dataset(model: partition.PartitionedModel, data: dataio.SegmentedDataset) -> dict:
    per: dict = {}
    for seg in data:
        u = np.concatenate([seg.train["input"], seg.test["input"]]) + seg.input_mean
        y = np.concatenate([seg.train["output"], seg.test["output"]]) + seg.output_mean
        s = SampledSeries(0.0, data.dt, {"excitation": u, "amplitude_level": np.full(len(u), seg.level)})
        res = partition.respond(model, s)
        label = res.meta["ranges"][0]
        ys, yh = per.setdefault(label, ([], []))
        ys.append(y)
        yh.append(res["output"])
    out = {}
    for label, (ys, yh) in per.items():
        _, fit = fitpercent(np.concatenate(ys), np.concatenate(yh))
        out[label] = {"fitpercent": fit, "segments": len(ys)}
    return out


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invident", description="Data-driven models of grid-support inverter functions.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sig = sub.add_parser("signal", help="probing signals").add_subparsers(dest="sub", required=True)
    p = sig.add_parser("gen", help="generate a probing signal CSV")
    p.add_argument("--kind", default="square-chirp", help="sine, square, sine-chirp or square-chirp")
    p.add_argument("--f0", type=float, default=None, help="start frequency (Hz), required")
    p.add_argument("--f1", type=float, default=None, help="end frequency (Hz), required")
    p.add_argument("--sweep", type=float, default=5.0, help="sweep time (s)")
    p.add_argument("--amp-start", type=float, default=0.88)
    p.add_argument("--amp-step", type=float, default=0.01)
    p.add_argument("--amp-end", type=float, default=1.10)
    p.add_argument("--dwell", type=float, default=15.0)
    p.add_argument("--fs", type=float, default=10_000.0)
    p.add_argument("--depth", type=float, default=None, help="peak deviation (default amp-step/2)")
    p.add_argument("--bias", type=float, default=None)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("-o", "--output", default="signal.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_signal_gen, command_path="signal gen")

    pl = sub.add_parser("plant", help="surrogate plant").add_subparsers(dest="sub", required=True)
    p = pl.add_parser("simulate", help="drive a plant with a signal CSV")
    p.add_argument("--fixture", default=None, help="published model label (R1, R2, R4a, R4b, R5)")
    p.add_argument("--plant", default=None, help="plant spec JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--noise", type=float, default=None, help="output noise std (A)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gain-scale", type=float, default=None)
    p.add_argument("-o", "--output", default="plant.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_plant_simulate, command_path="plant simulate")

    p = sub.add_parser("fit", help="fit a partitioned model")
    p.add_argument("--data", required=True)
    p.add_argument("--curve", default=None, help="curve JSON or built-in name")
    p.add_argument("--orders", default="2:5")
    p.add_argument("--selector", choices=SELECTORS, default="afpe")
    p.add_argument("--partition", choices=("fixed", "adaptive"), default="fixed")
    p.add_argument("--threshold", type=float, default=90.0)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--span", default=None, help="adaptive span lo:hi (default: data levels)")
    p.add_argument("--f-max", type=float, default=5.0, help="highest excitation frequency (Hz)")
    p.add_argument("--nuisance", choices=NUISANCE_MODES, default="offset", help="initial-condition handling")
    p.add_argument("--burn-in", type=float, default=0.0, help="seconds excluded from the cost at each segment start")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default="model.json")
    p.add_argument("--report", default=None)
    p.add_argument("--config", default=None)
    _dataset_args(p)
    p.set_defaults(func=cmd_fit, command_path="fit")

    p = sub.add_parser("validate", help="step or dataset validation of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--step", action="append", default=None, help="a:b step in p.u. (repeatable)")
    p.add_argument("--oracle", default=None, help="fixture label or plant spec JSON")
    p.add_argument("--data", default=None)
    p.add_argument("--fs", type=float, default=10_000.0)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="validate.csv")
    p.add_argument("--report", default=None)
    p.add_argument("--config", default=None)
    _dataset_args(p)
    p.set_defaults(func=cmd_validate, command_path="validate")
    return parser


def _apply_config(args, parser) -> None:
    if not getattr(args, "config", None):
        return
    try:
        d = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {args.config}: {exc}") from None
    values = d.get("args", d)
    for k, v in values.items():
        if k in ("func", "command_path", "config", "command", "sub"):
            continue
        if not hasattr(args, k):
            raise ParameterError(f"unknown config key {k!r}")
        setattr(args, k, v)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    try:
        _apply_config(args, parser)
        return args.func(args)
    except InvidentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
