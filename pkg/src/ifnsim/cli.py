"""Command-line front door.

Subcommands: ``waveform | stdp | run | pavlov | energy | calibrate``.
Every command resolves one JSON config (defaults <- --config file <-
repeated --set overrides), writes its outputs plus a ``manifest.json``
describing the resolved config, and exits 0 on success, 1 on validation
failure, 2 on I/O failure (one machine-parsable line on stderr).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    default_config,
    load_config,
    parse_network,
    parse_shape,
    parse_sim,
    parse_stimulus,
    parse_thresholds,
)
from .engine import run
from .errors import ConfigError, ContractError, ShapeError
from .model import config_hash, fmt_float as _fmt
from .neuron import NeuronParams
from .scenarios import (
    CalibrationTargets,
    PavlovSettings,
    calibrate_shape,
    default_stdp_grid,
    energy_report,
    run_pavlov,
    stdp_curve,
)
from .synapse import SynapseParams
from .waveform import spike_voltage, validate_shape, window_from_samples


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, command: str, doc: dict, inputs: list[str],
                    outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config": doc,
        "config_hash": config_hash(doc),
        "inputs": sorted(inputs),
        "outputs": sorted(outputs),
        "tool_version": __version__,
    }
    _write_json(out_dir / "manifest.json", manifest)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_valid_shape(doc: dict):
    shape = parse_shape(doc["shape"])
    thr = parse_thresholds(doc["thresholds"])
    violations = validate_shape(shape, thr)
    if violations:
        raise ConfigError("; ".join(violations))
    return shape, thr


def cmd_waveform(args, doc: dict) -> int:
    shape, thr = _require_valid_shape(doc)
    wf = doc["waveform_out"]
    h = float(wf["sample_dt"])
    margin = float(wf["t_margin"])
    delta_t = float(wf["pair_delta_t"])
    out = _out_dir(args)

    ts = np.arange(-margin, shape.t_spk + margin, h)
    vs = spike_voltage(shape, ts)
    _write_csv(out / "spike.csv", ["t_s", "v_spk_V"],
               ([_fmt(t), _fmt(v)] for t, v in zip(ts, vs)))

    t0 = min(0.0, delta_t) - margin
    t1 = max(shape.t_spk, delta_t + shape.t_spk) + margin
    tp = np.arange(t0, t1, h)
    v_pre = spike_voltage(shape, tp)
    v_post = spike_voltage(shape, tp - delta_t)
    v_net = v_post - v_pre
    _write_csv(
        out / "pair.csv",
        ["t_s", "v_pre_V", "v_post_V", "v_net_V"],
        ([_fmt(t), _fmt(a), _fmt(b), _fmt(c)]
         for t, a, b, c in zip(tp, v_pre, v_post, v_net)),
    )

    report = {
        "pair_delta_t_s": delta_t,
        "sample_dt_s": h,
        "v_tp_V": thr.v_tp,
        "v_tm_V": thr.v_tm,
        "over_threshold_window_s": window_from_samples(tp, v_net, thr.v_tp),
        "peak_v_net_V": float(v_net.max()),
        "v_refr_V": shape.v_refr,
    }
    _write_json(out / "waveform_report.json", report)
    _write_manifest(out, "waveform", doc, _inputs(args),
                    ["spike.csv", "pair.csv", "waveform_report.json"])
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_stdp(args, doc: dict) -> int:
    shape, thr = _require_valid_shape(doc)
    sd = doc["stdp"]
    syn = doc["synapse_defaults"]
    params = SynapseParams(
        g_min=float(syn["g_min"]), g_max=float(syn["g_max"]), thr=thr,
        eta_p=float(syn["eta_p"]), eta_d=float(syn["eta_d"]),
    )
    grid = default_stdp_grid(shape, float(sd["delta_t_step"]))
    curve = stdp_curve(shape, params, grid, float(sd["grid_step"]))
    out = _out_dir(args)
    _write_csv(out / "stdp.csv", ["delta_t_s", "delta_g_S"],
               ([_fmt(a), _fmt(b)] for a, b in curve.points()))
    _write_manifest(out, "stdp", doc, _inputs(args), ["stdp.csv"])
    print(f"stdp curve: {len(curve.delta_t)} points -> {out / 'stdp.csv'}")
    return 0


def cmd_run(args, doc: dict) -> int:
    network = parse_network(doc)
    stimulus = parse_stimulus(doc)
    sim = parse_sim(doc)
    trace = run(network, stimulus, sim, meta={"config_hash": config_hash(doc)})
    out = _out_dir(args)
    outputs = ["trace.csv"]
    trace.write_csv(out / "trace.csv")
    if sim.record.fires:
        trace.write_fires_csv(out / "fires.csv")
        outputs.append("fires.csv")
    _write_manifest(out, "run", doc, _inputs(args), outputs)
    print(f"run: {trace.meta['n_steps']} steps, {len(trace.fires)} fires -> {out}")
    return 0


def cmd_pavlov(args, doc: dict) -> int:
    pv = doc["pavlov"]
    shape, thr = _require_valid_shape(doc)
    nd = doc["neuron_defaults"]
    sd = doc["synapse_defaults"]
    neuron = NeuronParams(
        c_mem=float(nd["c_mem"]), r_leaky=float(nd["r_leaky"]),
        v_thr=float(nd["v_thr"]), v_refr=float(nd["v_refr"]),
        hysteresis=float(nd["hysteresis"]), shape=shape,
    )
    synapse = SynapseParams(
        g_min=float(sd["g_min"]), g_max=float(sd["g_max"]), thr=thr,
        eta_p=float(sd["eta_p"]), eta_d=float(sd["eta_d"]),
    )
    settings = PavlovSettings(
        synapse1_ohms=float(pv["synapse1_ohms"]),
        synapse2_ohms=float(pv["synapse2_ohms"]),
        max_trials=int(pv["max_trials"]),
        trial_interval=float(pv["trial_interval"]),
        n_before=int(pv["n_before"]),
        n_after=int(pv["n_after"]),
        dt=float(pv["dt"]),
        trace_decimation=int(pv["trace_decimation"]),
        shape=shape,
        neuron=neuron,
        synapse=synapse,
    )
    result = run_pavlov(settings)
    out = _out_dir(args)
    outputs = ["pavlov_report.json"]
    report = dataclasses.asdict(result.report)
    report["all_passed"] = result.report.all_passed
    _write_json(out / "pavlov_report.json", report)
    for name, trace in result.traces.items():
        trace.write_csv(out / f"{name}.csv")
        trace.write_fires_csv(out / f"{name}_fires.csv")
        outputs.extend([f"{name}.csv", f"{name}_fires.csv"])
    _write_manifest(out, "pavlov", doc, _inputs(args), outputs)
    r = result.report
    print(json.dumps({
        "before": r.passed_before, "training": r.passed_training,
        "after": r.passed_after, "trials_used": r.trials_used,
        "r2_initial_ohms": r.r2_initial_ohms, "r2_final_ohms": r.r2_final_ohms,
    }, sort_keys=True))
    return 0


def cmd_energy(args, doc: dict) -> int:
    shape, _ = _require_valid_shape(doc)
    en = doc["energy"]
    rep = energy_report(shape, float(en["r_load_ohms"]), int(en["n_synapses"]))
    payload = dataclasses.asdict(rep)
    print(json.dumps(payload, sort_keys=True))
    if args.out is not None:
        out = _out_dir(args)
        _write_json(out / "energy_report.json", payload)
        _write_manifest(out, "energy", doc, _inputs(args), ["energy_report.json"])
    return 0


def cmd_calibrate(args, doc: dict) -> int:
    cal = doc["calibrate"]
    targets = CalibrationTargets(
        v_tp=float(cal["v_tp"]), v_tm=float(cal["v_tm"]),
        delta_t=float(cal["delta_t"]), window=float(cal["window"]),
        window_tol=float(cal["window_tol"]), peak=float(cal["peak"]),
        t_plus=float(cal["t_plus"]), t_minus=float(cal["t_minus"]),
    )
    result = calibrate_shape(targets)
    payload = dataclasses.asdict(result)
    print(json.dumps(payload, sort_keys=True))
    if args.out is not None:
        out = _out_dir(args)
        _write_json(out / "calibration.json", payload)
        _write_manifest(out, "calibrate", doc, _inputs(args), ["calibration.json"])
    if not result.ok:
        print(f"error: validation: infeasible targets: {result.binding_constraint}",
              file=sys.stderr)
        return 1
    return 0


def _inputs(args) -> list[str]:
    return [args.config] if args.config else []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifnsim",
        description="Spiking-network simulator for dual-mode integrate-and-fire "
                    "neurons with resistive plastic synapses.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_out):
        p.add_argument("--config", help="JSON config file (partial; merged over defaults)")
        p.add_argument("--set", action="append", metavar="K=V",
                       help="dotted-path config override, e.g. sim.dt=5e-9")
        p.add_argument("--out", default=default_out, help="output directory")
        p.add_argument("--dt", type=float, help="simulation time step in seconds")
        p.add_argument("--decimate", type=int, help="trace row decimation factor")

    p = sub.add_parser("waveform", help="export spike and pair net-potential CSVs")
    common(p, "out_waveform")
    p.set_defaults(func=cmd_waveform)

    p = sub.add_parser("stdp", help="export the pair-response curve CSV")
    common(p, "out_stdp")
    p.set_defaults(func=cmd_stdp)

    p = sub.add_parser("run", help="simulate the configured network")
    common(p, "out_run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("pavlov", help="run the associative-learning experiment")
    common(p, "out_pavlov")
    p.set_defaults(func=cmd_pavlov)

    p = sub.add_parser("energy", help="per-spike load-dissipation report")
    common(p, None)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("calibrate", help="search spike-shape parameters for the pair targets")
    common(p, None)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_config(args.config, args.set or [])
        if args.dt is not None:
            doc["sim"]["dt"] = args.dt
            doc["pavlov"]["dt"] = args.dt
        if args.decimate is not None:
            doc["sim"]["trace_decimation"] = args.decimate
            doc["pavlov"]["trace_decimation"] = args.decimate
        return args.func(args, doc)
    except (ConfigError, ShapeError, ContractError, ValueError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
