"""JSON configuration: defaults, merging, overrides, and typed parsing.

One JSON document configures everything; SI units throughout, no unit
suffixes. Any subset may be given in a config file; missing keys fall
back to the built-in defaults below. ``--set a.b.c=value`` overrides use
dotted paths with JSON-parsed values.
"""
from __future__ import annotations

import dataclasses
import json
from typing import Any

from .errors import ConfigError
from .model import CurrentSegment, Network, RecordFlags, SimConfig, Stimulus, SynapseSpec
from .neuron import NeuronParams, default_neuron_params
from .synapse import SynapseParams, default_synapse_params
from .waveform import PlasticityThresholds, SpikeShape, default_shape, default_thresholds

SHAPE_FIELDS = [f.name for f in dataclasses.fields(SpikeShape)]


def default_config() -> dict:
    shape = default_shape()
    thr = default_thresholds()
    nrn = default_neuron_params()
    syn = default_synapse_params()
    return {
        "shape": {name: getattr(shape, name) for name in SHAPE_FIELDS},
        "thresholds": {"v_tp": thr.v_tp, "v_tm": thr.v_tm},
        "neuron_defaults": {
            "c_mem": nrn.c_mem,
            "r_leaky": nrn.r_leaky,
            "v_thr": nrn.v_thr,
            "v_refr": nrn.v_refr,
            "hysteresis": nrn.hysteresis,
        },
        "synapse_defaults": {
            "g_min": syn.g_min,
            "g_max": syn.g_max,
            "eta_p": syn.eta_p,
            "eta_d": syn.eta_d,
        },
        "network": {"neurons": [], "synapses": []},
        "stimulus": {"forced_spikes": {}, "currents": {}},
        "sim": {
            "dt": 10e-9,
            "t_end": 0.0,
            "trace_decimation": 1,
            "record": {"v_mem": True, "ports": False, "g": True, "fires": True},
        },
        "waveform_out": {
            "sample_dt": 1e-9,
            "pair_delta_t": 0.5e-6,
            "t_margin": 0.5e-6,
        },
        "stdp": {
            "delta_t_step": 1e-7,
            "grid_step": 1e-9,
            "g_init": 1e-5,
        },
        "pavlov": {
            "synapse1_ohms": 51e3,
            "synapse2_ohms": 1e6,
            "max_trials": 30,
            "trial_interval": 100e-6,
            "n_before": 3,
            "n_after": 3,
            "dt": 10e-9,
            "trace_decimation": 100,
        },
        "energy": {"r_load_ohms": 1e6, "n_synapses": 1000},
        "calibrate": {
            "v_tp": thr.v_tp,
            "v_tm": thr.v_tm,
            "delta_t": 0.5e-6,
            "window": 0.4e-6,
            "window_tol": 0.20,
            "peak": 0.400,
            "t_plus": shape.t_plus,
            "t_minus": shape.t_minus,
        },
    }


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_set(doc: dict, assignment: str) -> None:
    """Apply one ``path.to.key=value`` override in place."""
    if "=" not in assignment:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"--set has an empty key path: {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    for k in keys[:-1]:
        nxt = node.get(k)
        if not isinstance(nxt, dict):
            nxt = {}
            node[k] = nxt
        node = nxt
    node[keys[-1]] = value


def load_config(path: str | None = None, sets: list[str] | None = None) -> dict:
    """Defaults merged with an optional config file and --set overrides."""
    doc = default_config()
    if path is not None:
        with open(path) as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: invalid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"config file {path}: top level must be an object")
        doc = _deep_merge(doc, user)
    for assignment in sets or []:
        apply_set(doc, assignment)
    return doc


def _number(doc: dict, key: str, context: str) -> float:
    if key not in doc:
        raise ConfigError(f"{context}: missing {key!r}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: {key!r} must be a number, got {value!r}")
    return float(value)


def parse_shape(doc: dict, context: str = "shape") -> SpikeShape:
    extra = set(doc) - set(SHAPE_FIELDS)
    if extra:
        raise ConfigError(f"{context}: unknown fields {sorted(extra)}")
    return SpikeShape(**{name: _number(doc, name, context) for name in SHAPE_FIELDS})


def parse_thresholds(doc: dict, context: str = "thresholds") -> PlasticityThresholds:
    return PlasticityThresholds(
        v_tp=_number(doc, "v_tp", context), v_tm=_number(doc, "v_tm", context)
    )


def parse_record_flags(doc: dict) -> RecordFlags:
    base = RecordFlags()
    return RecordFlags(
        v_mem=bool(doc.get("v_mem", base.v_mem)),
        ports=bool(doc.get("ports", base.ports)),
        g=bool(doc.get("g", base.g)),
        fires=bool(doc.get("fires", base.fires)),
    )


def parse_sim(doc: dict) -> SimConfig:
    sim = doc.get("sim", {})
    return SimConfig(
        dt=_number(sim, "dt", "sim"),
        t_end=_number(sim, "t_end", "sim"),
        trace_decimation=int(_number(sim, "trace_decimation", "sim")),
        record=parse_record_flags(sim.get("record", {})),
    )


def _neuron_from(entry: dict, doc: dict, context: str) -> NeuronParams:
    defaults = doc.get("neuron_defaults", {})
    merged = _deep_merge(defaults, {k: v for k, v in entry.items() if k not in ("id", "shape")})
    shape_doc = _deep_merge(doc.get("shape", {}), entry.get("shape", {}))
    return NeuronParams(
        c_mem=_number(merged, "c_mem", context),
        r_leaky=_number(merged, "r_leaky", context),
        v_thr=_number(merged, "v_thr", context),
        v_refr=_number(merged, "v_refr", context),
        hysteresis=_number(merged, "hysteresis", context),
        shape=parse_shape(shape_doc, f"{context}.shape"),
    )


def _synapse_from(entry: dict, doc: dict, context: str) -> SynapseSpec:
    defaults = dict(doc.get("synapse_defaults", {}))
    thr_doc = _deep_merge(doc.get("thresholds", {}),
                          {k: entry[k] for k in ("v_tp", "v_tm") if k in entry})
    merged = _deep_merge(defaults, entry)
    params = SynapseParams(
        g_min=_number(merged, "g_min", context),
        g_max=_number(merged, "g_max", context),
        thr=parse_thresholds(thr_doc, f"{context}.thresholds"),
        eta_p=_number(merged, "eta_p", context),
        eta_d=_number(merged, "eta_d", context),
    )
    if "g_init" in entry:
        g_init = _number(entry, "g_init", context)
    elif "resistance_ohms" in entry:
        r = _number(entry, "resistance_ohms", context)
        if r <= 0:
            raise ConfigError(f"{context}: resistance_ohms must be > 0, got {r}")
        g_init = 1.0 / r
    else:
        raise ConfigError(f"{context}: needs g_init or resistance_ohms")
    for key in ("id", "pre", "post"):
        if key not in entry or not isinstance(entry[key], str):
            raise ConfigError(f"{context}: missing or non-string {key!r}")
    return SynapseSpec(
        id=entry["id"], pre_id=entry["pre"], post_id=entry["post"],
        params=params, g_init=g_init,
    )


def parse_network(doc: dict) -> Network:
    net = doc.get("network", {})
    neurons = []
    for i, entry in enumerate(net.get("neurons", [])):
        if "id" not in entry or not isinstance(entry["id"], str):
            raise ConfigError(f"network.neurons[{i}]: missing or non-string 'id'")
        neurons.append((entry["id"], _neuron_from(entry, doc, f"neuron {entry['id']!r}")))
    synapses = [
        _synapse_from(entry, doc, f"network.synapses[{i}]")
        for i, entry in enumerate(net.get("synapses", []))
    ]
    return Network(neurons=tuple(neurons), synapses=tuple(synapses))


def parse_stimulus(doc: dict) -> Stimulus:
    stim = doc.get("stimulus", {})
    forced = {}
    for nid, onsets in stim.get("forced_spikes", {}).items():
        if not isinstance(onsets, list):
            raise ConfigError(f"stimulus.forced_spikes[{nid!r}] must be a list of times")
        forced[nid] = tuple(float(t) for t in onsets)
    currents = {}
    for nid, segments in stim.get("currents", {}).items():
        segs = []
        for j, seg in enumerate(segments):
            if not (isinstance(seg, list) and len(seg) == 3):
                raise ConfigError(
                    f"stimulus.currents[{nid!r}][{j}] must be [t0, t1, amps]"
                )
            segs.append(CurrentSegment(t0=float(seg[0]), t1=float(seg[1]), amps=float(seg[2])))
        currents[nid] = tuple(segs)
    return Stimulus(forced_spikes=forced, currents=currents)
