"""Shared test oracles.

``piecewise_reference`` re-states the spike waveform definition directly
(independently of the package implementation) so waveform tests check
against a second derivation. ``reference_run`` drives a network with the
scalar per-neuron/per-synapse operations in the documented step order,
giving an independent wiring oracle for the array kernels.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from ifnsim.engine import steps_for
from ifnsim.model import Network, SimConfig, Stimulus
from ifnsim.neuron import (
    Mode,
    begin_fire,
    check_fire,
    end_fire,
    initial_state,
    integrate_step,
    rearm,
)
from ifnsim.synapse import SynapseState, apply_plasticity_step, synapse_current
from ifnsim.waveform import spike_voltage


def piecewise_reference(shape, t: float) -> float:
    """Straight transcription of the waveform's piecewise definition."""
    t_spk = shape.t_plus + shape.t_minus
    if t < 0.0 or t >= t_spk:
        return shape.v_refr
    if t < shape.t_rise:
        return shape.v_refr + shape.v_a_plus * t / shape.t_rise
    if t < shape.t_plus - shape.t_fall:
        return shape.v_refr + shape.v_a_plus
    if t < shape.t_plus:
        frac = (t - (shape.t_plus - shape.t_fall)) / shape.t_fall
        return shape.v_refr + shape.v_a_plus - (shape.v_a_plus + shape.v_a_minus) * frac
    return shape.v_refr - shape.v_a_minus * math.exp(-(t - shape.t_plus) / shape.tau_decay)


def reference_run(network: Network, stimulus: Stimulus, config: SimConfig):
    """Scalar-operation stepping oracle.

    Returns ``(v_hist, g_hist, fires)`` where the histories hold the state
    at every step time (no decimation) and fires are ``(neuron_id, step)``.
    Mirrors the engine's step sub-order exactly, including the convention
    that a fire beginning during step k has onset step k+1.
    """
    dt = config.dt
    n_steps = steps_for(config.t_end, dt)
    ids = network.neuron_ids
    params = dict(network.neurons)
    states = {nid: initial_state(params[nid]) for nid in ids}
    onset_step = {nid: -1 for nid in ids}
    n_spk = {nid: max(1, steps_for(params[nid].shape.t_spk, dt)) for nid in ids}
    syn_states = {s.id: SynapseState(g=s.g_init, pre_id=s.pre_id, post_id=s.post_id)
                  for s in network.synapses}
    syn_params = {s.id: s.params for s in network.synapses}

    forced: dict[int, list[str]] = {}
    for nid, onsets in stimulus.forced_spikes.items():
        for t in onsets:
            forced.setdefault(steps_for(t, dt), []).append(nid)
    segments = {
        nid: [(steps_for(seg.t0, dt), steps_for(seg.t1, dt), seg.amps) for seg in segs]
        for nid, segs in stimulus.currents.items()
    }

    def force(nid: str, k_on: int):
        if states[nid].mode is Mode.INTEGRATION:
            states[nid] = begin_fire(states[nid], params[nid], k_on * dt)
            onset_step[nid] = k_on
            fires.append((nid, k_on))

    fires: list[tuple[str, int]] = []
    for nid in sorted(forced.get(0, []), key=ids.index):
        force(nid, 0)

    v_hist = [[states[nid].v_mem for nid in ids]]
    g_hist = [[syn_states[s.id].g for s in network.synapses]]

    for k in range(n_steps):
        ports = {}
        for nid in ids:
            st = states[nid]
            if st.mode is Mode.FIRING:
                # right-edge sample: the value driven through step k
                ports[nid] = spike_voltage(params[nid].shape,
                                           dt * (k - onset_step[nid] + 1))
            else:
                ports[nid] = params[nid].v_refr

        i_sum = {nid: 0.0 for nid in ids}
        for s in network.synapses:
            st = syn_states[s.id]
            i_sum[s.post_id] += synapse_current(st.g, ports[s.pre_id], ports[s.post_id])
            v_net = ports[s.post_id] - ports[s.pre_id]
            syn_states[s.id] = apply_plasticity_step(st, syn_params[s.id], v_net, dt)

        for nid in ids:
            st = states[nid]
            if st.mode is Mode.INTEGRATION:
                i_tot = i_sum[nid]
                for (k0, k1, amps) in segments.get(nid, []):
                    if k0 <= k < k1:
                        i_tot = i_tot + amps
                st = integrate_step(st, params[nid], i_tot, dt)
                st = rearm(st, params[nid])
                if check_fire(st, params[nid]):
                    st = begin_fire(st, params[nid], (k + 1) * dt)
                    onset_step[nid] = k + 1
                    fires.append((nid, k + 1))
                states[nid] = st

        for nid in sorted(forced.get(k + 1, []), key=ids.index):
            force(nid, k + 1)

        for nid in ids:
            st = states[nid]
            if st.mode is Mode.FIRING and (k + 1 - onset_step[nid]) >= n_spk[nid]:
                states[nid] = end_fire(st, params[nid], (k + 1) * dt)

        v_hist.append([states[nid].v_mem for nid in ids])
        g_hist.append([syn_states[s.id].g for s in network.synapses])

    return np.array(v_hist), np.array(g_hist), fires


@pytest.fixture
def shape():
    from ifnsim.waveform import default_shape

    return default_shape()


@pytest.fixture
def thresholds():
    from ifnsim.waveform import default_thresholds

    return default_thresholds()
