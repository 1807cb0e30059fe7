"""Network topology, stimulus, simulation configuration, and traces."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigError
from .neuron import NeuronParams
from .synapse import SynapseParams


@dataclass(frozen=True)
class SynapseSpec:
    """One directed pre -> post synapse with its initial conductance."""

    id: str
    pre_id: str
    post_id: str
    params: SynapseParams
    g_init: float


@dataclass(frozen=True)
class Network:
    """Ordered neurons and directed synapses; ids are caller-chosen strings."""

    neurons: tuple[tuple[str, NeuronParams], ...]
    synapses: tuple[SynapseSpec, ...]

    @property
    def neuron_ids(self) -> list[str]:
        return [nid for nid, _ in self.neurons]

    @property
    def synapse_ids(self) -> list[str]:
        return [s.id for s in self.synapses]


@dataclass(frozen=True)
class CurrentSegment:
    """Constant injected current over the half-open interval [t0, t1)."""

    t0: float
    t1: float
    amps: float


@dataclass(frozen=True)
class Stimulus:
    """External drive: forced spike onsets and/or injected current segments.

    A forced spike puts the neuron into its normal firing phase at the
    given onset (it emits its own spike shape); onsets that land while the
    neuron is already firing are ignored.
    """

    forced_spikes: dict[str, tuple[float, ...]] = field(default_factory=dict)
    currents: dict[str, tuple[CurrentSegment, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class RecordFlags:
    v_mem: bool = True
    ports: bool = False
    g: bool = True
    fires: bool = True


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step run settings.

    ``trace_decimation`` thins recorded rows only; fire events are always
    recorded exactly.
    """

    dt: float = 10e-9
    t_end: float = 0.0
    trace_decimation: int = 1
    record: RecordFlags = field(default_factory=RecordFlags)


@dataclass
class FireEvent:
    neuron_id: str
    t_onset: float


@dataclass
class Trace:
    """Recorded run: decimated state rows plus exact fire events.

    Rows are states at ``t = k * dt``; row ``r`` is step ``r * decimation``.
    ``v_mem``/``mode``/``g``/``ports`` are 2-D arrays (row, entity) and may
    be empty when the corresponding record flag was off.
    """

    t: np.ndarray
    neuron_ids: list[str]
    synapse_ids: list[str]
    v_mem: np.ndarray
    mode: np.ndarray
    g: np.ndarray
    ports: np.ndarray
    fires: list[FireEvent]
    meta: dict

    def final_conductances(self) -> dict[str, float]:
        if self.g.size == 0:
            raise ConfigError("conductances were not recorded")
        return {sid: float(self.g[-1, j]) for j, sid in enumerate(self.synapse_ids)}

    def fire_times(self, neuron_id: str) -> list[float]:
        return [ev.t_onset for ev in self.fires if ev.neuron_id == neuron_id]

    def header(self) -> list[str]:
        cols = ["t_s"]
        if self.v_mem.size or not self.neuron_ids:
            for nid in self.neuron_ids:
                cols.append(f"v_mem_{nid}")
                cols.append(f"mode_{nid}")
        if self.g.size or not self.synapse_ids:
            for sid in self.synapse_ids:
                cols.append(f"g_S_{sid}")
        if self.ports.size:
            for nid in self.neuron_ids:
                cols.append(f"port_{nid}")
        return cols

    def rows(self) -> Iterable[list[str]]:
        have_state = bool(self.v_mem.size) or not self.neuron_ids
        have_g = bool(self.g.size) or not self.synapse_ids
        have_ports = bool(self.ports.size)
        for r in range(self.t.shape[0]):
            row = [_fmt(self.t[r])]
            if have_state:
                for j in range(len(self.neuron_ids)):
                    row.append(_fmt(self.v_mem[r, j]))
                    row.append(str(int(self.mode[r, j])))
            if have_g:
                for j in range(len(self.synapse_ids)):
                    row.append(_fmt(self.g[r, j]))
            if have_ports:
                for j in range(len(self.neuron_ids)):
                    row.append(_fmt(self.ports[r, j]))
            yield row

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            w.writerows(self.rows())

    def write_fires_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["neuron_id", "t_onset_s"])
            for ev in self.fires:
                w.writerow([ev.neuron_id, _fmt(ev.t_onset)])


def fmt_float(x) -> str:
    """Shortest round-trip decimal form; keeps CSVs byte-stable."""
    return repr(float(x))


_fmt = fmt_float


def config_hash(doc: dict) -> str:
    """Hash of the canonical JSON serialization of a config document."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def validate_network(network: Network) -> None:
    problems = []
    seen = set()
    for nid, params in network.neurons:
        if nid in seen:
            problems.append(f"duplicate neuron id {nid!r}")
        seen.add(nid)
        problems.extend(f"neuron {nid!r}: {v}" for v in params.violations())
    if not seen:
        problems.append("network has no neurons")
    syn_seen = set()
    for s in network.synapses:
        if s.id in syn_seen:
            problems.append(f"duplicate synapse id {s.id!r}")
        syn_seen.add(s.id)
        if s.pre_id not in seen:
            problems.append(f"synapse {s.id!r}: unknown pre neuron {s.pre_id!r}")
        if s.post_id not in seen:
            problems.append(f"synapse {s.id!r}: unknown post neuron {s.post_id!r}")
        if s.pre_id == s.post_id:
            problems.append(f"synapse {s.id!r}: self-loop on {s.pre_id!r}")
        problems.extend(f"synapse {s.id!r}: {v}" for v in s.params.violations())
        if not s.params.g_min <= s.g_init <= s.params.g_max:
            problems.append(
                f"synapse {s.id!r}: g_init {s.g_init} outside "
                f"[{s.params.g_min}, {s.params.g_max}]"
            )
    if problems:
        raise ConfigError("; ".join(problems))


def validate_stimulus(stimulus: Stimulus, network: Network) -> None:
    problems = []
    ids = set(network.neuron_ids)
    for nid, onsets in stimulus.forced_spikes.items():
        if nid not in ids:
            problems.append(f"forced spikes reference unknown neuron {nid!r}")
            continue
        for t in onsets:
            if t < 0.0:
                problems.append(f"forced spike on {nid!r} at negative time {t}")
    for nid, segments in stimulus.currents.items():
        if nid not in ids:
            problems.append(f"current segments reference unknown neuron {nid!r}")
            continue
        ordered = sorted(segments, key=lambda s: s.t0)
        prev_end = 0.0
        for i, seg in enumerate(ordered):
            if seg.t0 < 0.0 or seg.t1 <= seg.t0:
                problems.append(
                    f"current segment on {nid!r} has bad interval [{seg.t0}, {seg.t1})"
                )
            if i > 0 and seg.t0 < prev_end:
                problems.append(f"current segments on {nid!r} overlap at t={seg.t0}")
            prev_end = max(prev_end, seg.t1)
    if problems:
        raise ConfigError("; ".join(problems))


def validate_sim_config(config: SimConfig, network: Network) -> None:
    problems = []
    if not config.dt > 0.0:
        problems.append(f"dt must be > 0, got {config.dt}")
    if config.t_end < 0.0:
        problems.append(f"t_end must be >= 0, got {config.t_end}")
    if config.trace_decimation < 1:
        problems.append(f"trace_decimation must be >= 1, got {config.trace_decimation}")
    if config.dt > 0.0:
        for nid, params in network.neurons:
            if params.tau_m <= config.dt:
                problems.append(
                    f"neuron {nid!r}: leak time constant {params.tau_m} "
                    f"not greater than dt {config.dt}"
                )
    if problems:
        raise ConfigError("; ".join(problems))
