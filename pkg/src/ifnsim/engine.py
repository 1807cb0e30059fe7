"""Fixed-step simulation engine.

The engine owns the coupled neuron/synapse system and advances it on a
fixed time grid ``t_k = k * dt``. Each step applies one documented
sub-order (see ``_kernel_py`` for the exact sequence): port resolution,
synapse currents, plasticity, membrane integration, fire checks, phase
ends, recording. Everything is deterministic; repeated runs with the same
inputs produce bit-identical traces.

To keep the hot loop free of waveform math, each neuron's spike shape is
sampled once onto the step grid (via ``waveform.spike_voltage``, the
single source of truth) and firing ports become table lookups indexed by
``step - onset_step``. Stimulus schedules are converted to sorted integer
step events: a forced spike or current segment boundary at time ``t``
takes effect at the first grid point ``>= t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from .model import (
    FireEvent,
    Network,
    RecordFlags,
    SimConfig,
    Stimulus,
    Trace,
    validate_network,
    validate_sim_config,
    validate_stimulus,
)
from .neuron import leak_coefficients
from .waveform import spike_voltage

# Tolerance (in steps) when snapping event times onto the grid, so times
# that are exact grid multiples up to float rounding do not ceil upward.
_GRID_EPS = 1e-9


def steps_for(t: float, dt: float) -> int:
    """First step index whose grid time is >= t (up to float rounding)."""
    return max(0, int(math.ceil(t / dt - _GRID_EPS)))


@dataclass
class CompiledState:
    """Flat-array image of a network mid-run; consumed by the kernels."""

    dt: float
    decim: int
    # per neuron
    v_refr: np.ndarray
    v_thr: np.ndarray
    arm_level: np.ndarray
    gain: np.ndarray
    r_leaky: np.ndarray
    n_spk: np.ndarray
    tbl_off: np.ndarray
    tbl: np.ndarray
    # per synapse
    pre: np.ndarray
    post: np.ndarray
    g_min: np.ndarray
    g_max: np.ndarray
    v_tp: np.ndarray
    v_tm: np.ndarray
    eta_p: np.ndarray
    eta_d: np.ndarray
    # events
    cur_k: np.ndarray
    cur_n: np.ndarray
    cur_di: np.ndarray
    forced_k: np.ndarray
    forced_n: np.ndarray
    # mutable state
    mode: np.ndarray
    armed: np.ndarray
    v: np.ndarray
    fire_k0: np.ndarray
    g: np.ndarray
    i_stim: np.ndarray
    port_scratch: np.ndarray
    isum_scratch: np.ndarray
    cur_ptr: int = 0
    forced_ptr: int = 0
    k_next: int = 0
    # True when no synapse spans differing refractory levels, enabling the
    # kernels' idle fast path (all-quiet steps provably produce zero
    # current and zero plasticity).
    idle_skip_ok: bool = True
    # recording
    flag_state: bool = True
    flag_g: bool = True
    flag_ports: bool = False
    rec_v: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    rec_mode: np.ndarray = field(default_factory=lambda: np.empty((0, 0), dtype=np.int8))
    rec_g: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    rec_port: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))


def compile_network(
    network: Network, stimulus: Stimulus, config: SimConfig, n_steps: int
) -> CompiledState:
    dt = config.dt
    n = len(network.neurons)
    index = {nid: i for i, (nid, _) in enumerate(network.neurons)}

    v_refr = np.empty(n)
    v_thr = np.empty(n)
    arm_level = np.empty(n)
    gain = np.empty(n)
    r_leaky = np.empty(n)
    n_spk = np.empty(n, dtype=np.int64)
    tbl_off = np.empty(n, dtype=np.int64)

    # One waveform table per distinct shape, sampled on the step grid.
    tables: dict[tuple, int] = {}
    chunks: list[np.ndarray] = []
    total = 0
    for i, (nid, params) in enumerate(network.neurons):
        v_refr[i] = params.v_refr
        v_thr[i] = params.v_thr
        arm_level[i] = params.v_thr + params.hysteresis
        _, gain[i] = leak_coefficients(params, dt)
        r_leaky[i] = params.r_leaky
        shape = params.shape
        steps = max(1, steps_for(shape.t_spk, dt))
        key = (
            shape.v_refr, shape.v_a_plus, shape.v_a_minus, shape.t_plus,
            shape.t_minus, shape.tau_decay, shape.t_rise, shape.t_fall, steps,
        )
        if key not in tables:
            # Right-edge sampling: during step k a firing neuron drives the
            # waveform value at the end of that step, so the spike's current
            # starts acting in the onset step itself and refinement shifts
            # of fire times stay strictly below one step.
            samples = spike_voltage(shape, dt * (np.arange(steps) + 1.0))
            tables[key] = total
            chunks.append(np.asarray(samples, dtype=float))
            total += steps
        tbl_off[i] = tables[key]
        n_spk[i] = steps
    tbl = np.concatenate(chunks) if chunks else np.zeros(1)

    m = len(network.synapses)
    pre = np.empty(m, dtype=np.int64)
    post = np.empty(m, dtype=np.int64)
    g_min = np.empty(m)
    g_max = np.empty(m)
    v_tp = np.empty(m)
    v_tm = np.empty(m)
    eta_p = np.empty(m)
    eta_d = np.empty(m)
    g = np.empty(m)
    for j, s in enumerate(network.synapses):
        pre[j] = index[s.pre_id]
        post[j] = index[s.post_id]
        g_min[j] = s.params.g_min
        g_max[j] = s.params.g_max
        v_tp[j] = s.params.thr.v_tp
        v_tm[j] = s.params.thr.v_tm
        eta_p[j] = s.params.eta_p
        eta_d[j] = s.params.eta_d
        g[j] = s.g_init

    forced = []
    for nid, onsets in stimulus.forced_spikes.items():
        for t in onsets:
            k = steps_for(t, dt)
            if k <= n_steps:
                forced.append((k, index[nid]))
    forced.sort()
    forced_k = np.array([k for k, _ in forced], dtype=np.int64)
    forced_n = np.array([i for _, i in forced], dtype=np.int64)

    cur = []
    for nid, segments in stimulus.currents.items():
        for seg in segments:
            k0 = steps_for(seg.t0, dt)
            k1 = steps_for(seg.t1, dt)
            if k0 < n_steps and k1 > k0:
                cur.append((k0, index[nid], seg.amps))
                if k1 < n_steps:
                    cur.append((k1, index[nid], -seg.amps))
    cur.sort(key=lambda e: (e[0], e[1]))
    cur_k = np.array([k for k, _, _ in cur], dtype=np.int64)
    cur_n = np.array([i for _, i, _ in cur], dtype=np.int64)
    cur_di = np.array([d for _, _, d in cur], dtype=float)

    return CompiledState(
        dt=dt,
        decim=config.trace_decimation,
        v_refr=v_refr, v_thr=v_thr, arm_level=arm_level, gain=gain,
        r_leaky=r_leaky, n_spk=n_spk, tbl_off=tbl_off, tbl=tbl,
        pre=pre, post=post, g_min=g_min, g_max=g_max,
        v_tp=v_tp, v_tm=v_tm, eta_p=eta_p, eta_d=eta_d,
        cur_k=cur_k, cur_n=cur_n, cur_di=cur_di,
        forced_k=forced_k, forced_n=forced_n,
        mode=np.zeros(n, dtype=np.uint8),
        armed=np.ones(n, dtype=np.uint8),
        v=v_refr.copy(),
        fire_k0=np.full(n, -1, dtype=np.int64),
        g=g,
        i_stim=np.zeros(n),
        port_scratch=np.empty(n),
        isum_scratch=np.empty(n),
        idle_skip_ok=bool(np.all(v_refr[pre] == v_refr[post])),
    )


def resolve_ports(cs: CompiledState, k: int) -> np.ndarray:
    """Port voltages at grid time k*dt for the current state."""
    firing = cs.mode == 1
    idx = np.minimum(np.maximum(k - cs.fire_k0, 0), cs.n_spk - 1) + cs.tbl_off
    return np.where(firing, cs.tbl[idx], cs.v_refr)


def run(
    network: Network,
    stimulus: Stimulus | None = None,
    config: SimConfig | None = None,
    kernel=None,
    meta: dict | None = None,
) -> Trace:
    """Validate, compile, and advance the network; returns the trace.

    Deterministic: identical inputs give bit-identical traces (per
    kernel; both kernels match each other as well).
    """
    stimulus = stimulus or Stimulus()
    config = config or SimConfig()
    validate_network(network)
    validate_stimulus(stimulus, network)
    validate_sim_config(config, network)
    if kernel is None:
        kernel = _backend.active_kernel()

    dt = config.dt
    n_steps = steps_for(config.t_end, dt)
    cs = compile_network(network, stimulus, config, n_steps)

    n = len(network.neurons)
    m = len(network.synapses)
    decim = config.trace_decimation
    rows = n_steps // decim + 1
    flags: RecordFlags = config.record
    cs.flag_state = flags.v_mem
    cs.flag_g = flags.g
    cs.flag_ports = flags.ports
    if flags.v_mem:
        cs.rec_v = np.empty((rows, n))
        cs.rec_mode = np.empty((rows, n), dtype=np.int8)
    if flags.g:
        cs.rec_g = np.empty((rows, m))
    if flags.ports:
        cs.rec_port = np.empty((rows, n))

    fires: list[tuple[int, int]] = []
    # Forced onsets at t = 0 take effect in the initial state.
    while cs.forced_ptr < cs.forced_k.shape[0] and cs.forced_k[cs.forced_ptr] == 0:
        i = int(cs.forced_n[cs.forced_ptr])
        if cs.mode[i] == 0:
            cs.mode[i] = 1
            cs.fire_k0[i] = 0
            cs.v[i] = cs.v_refr[i]
            cs.armed[i] = 0
            fires.append((i, 0))
        cs.forced_ptr += 1

    if flags.v_mem:
        cs.rec_v[0] = cs.v
        cs.rec_mode[0] = cs.mode
    if flags.g:
        cs.rec_g[0] = cs.g

    kernel.advance(cs, n_steps, fires)

    if flags.ports and n_steps % decim == 0:
        cs.rec_port[n_steps // decim] = resolve_ports(cs, n_steps)

    neuron_ids = network.neuron_ids
    t = dt * decim * np.arange(rows)
    events = [FireEvent(neuron_ids[i], k * dt) for i, k in fires]
    info = {
        "kernel": kernel.name,
        "dt": dt,
        "n_steps": n_steps,
        "trace_decimation": decim,
    }
    if meta:
        info.update(meta)
    return Trace(
        t=t,
        neuron_ids=neuron_ids,
        synapse_ids=network.synapse_ids,
        v_mem=cs.rec_v if flags.v_mem else np.empty((0, 0)),
        mode=cs.rec_mode if flags.v_mem else np.empty((0, 0), dtype=np.int8),
        g=cs.rec_g if flags.g else np.empty((0, 0)),
        ports=cs.rec_port if flags.ports else np.empty((0, 0)),
        fires=events,
        meta=info,
    )
