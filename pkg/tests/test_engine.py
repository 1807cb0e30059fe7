"""Engine stepping, determinism, and convergence tests.

The engine is checked bit-exactly against the conftest reference stepper
(built from the scalar module operations), and quantitatively against
closed-form charge-balance oracles computed inside the tests.
"""
import math

import numpy as np
import pytest

from conftest import reference_run
from ifnsim.engine import run, steps_for
from ifnsim.errors import ConfigError
from ifnsim.model import (
    CurrentSegment,
    Network,
    RecordFlags,
    SimConfig,
    Stimulus,
    SynapseSpec,
)
from ifnsim.neuron import NeuronParams, default_neuron_params
from ifnsim.synapse import SynapseParams, default_synapse_params
from ifnsim.waveform import PlasticityThresholds, SpikeShape, default_shape


def two_neuron_net(r_ohms=51e3, syn_params=None):
    nparams = default_neuron_params()
    syn = syn_params or default_synapse_params()
    return Network(
        neurons=(("a", nparams), ("b", nparams)),
        synapses=(SynapseSpec("s", "a", "b", syn, 1.0 / r_ohms),),
    )


def first_fire_oracle(i_amps, params, dt):
    """Charge-balance prediction of the fire onset for plateau drive.

    Plateau current acts from the forced-onset step on (right-edge port
    sampling); detection happens at the end of the crossing step, so the
    onset is the analytic crossing time of the leaky exponential rounded
    up to the grid.
    """
    tau = params.tau_m
    depth = params.v_refr - params.v_thr
    x = depth / (i_amps * params.r_leaky)
    if x >= 1.0:
        return None
    t_cross = -tau * math.log(1.0 - x)  # measured from drive start
    return math.ceil(t_cross / dt - 1e-9) * dt


class TestIdleNetwork:
    def test_fixed_point(self):
        net = two_neuron_net()
        cfg = SimConfig(dt=1e-8, t_end=5e-6, trace_decimation=1)
        tr = run(net, Stimulus(), cfg)
        assert np.all(tr.v_mem == 0.0)
        assert np.all(tr.mode == 0)
        assert np.all(tr.g == tr.g[0])
        assert tr.fires == []


class TestSingleSpikeDrive:
    def test_strong_synapse_fires_within_pulse(self):
        net = two_neuron_net(51e3)
        cfg = SimConfig(dt=1e-8, t_end=5e-6, trace_decimation=1)
        tr = run(net, Stimulus(forced_spikes={"a": (0.0,)}), cfg)
        fires = tr.fire_times("b")
        assert len(fires) == 1
        # combined current during the pre plateau
        i = (1.0 / 51e3) * default_shape().v_a_plus
        expected = first_fire_oracle(i, default_neuron_params(), 1e-8)
        assert fires[0] == pytest.approx(expected, abs=1e-12)
        assert fires[0] < default_shape().t_plus  # inside the positive pulse

    def test_weak_synapse_does_not_fire(self):
        net = two_neuron_net(1e6)
        cfg = SimConfig(dt=1e-8, t_end=10e-6, trace_decimation=1)
        tr = run(net, Stimulus(forced_spikes={"a": (0.0,)}), cfg)
        assert tr.fire_times("b") == []
        v_b = tr.v_mem[:, 1]
        # closed form: -i * r_leaky * (1 - exp(-t_plus/tau_m)) ~ -15 mV
        params = default_neuron_params()
        i = default_shape().v_a_plus * 1e-6
        expected = -i * params.r_leaky * (1 - math.exp(-0.5e-6 / params.tau_m))
        assert v_b.min() == pytest.approx(expected, rel=5e-2)
        assert v_b.min() > params.v_thr / 2

    def test_weak_synapse_excursion_converges(self):
        net = two_neuron_net(1e6)
        cfg = SimConfig(dt=1e-9, t_end=3e-6, trace_decimation=10)
        tr = run(net, Stimulus(forced_spikes={"a": (0.0,)}), cfg)
        params = default_neuron_params()
        i = default_shape().v_a_plus * 1e-6
        expected = -i * params.r_leaky * (1 - math.exp(-0.5e-6 / params.tau_m))
        assert tr.v_mem[:, 1].min() == pytest.approx(expected, rel=5e-3)

    def test_forced_offgrid_onset_snaps_up(self):
        net = two_neuron_net(51e3)
        cfg = SimConfig(dt=1e-8, t_end=5e-6, trace_decimation=1)
        tr = run(net, Stimulus(forced_spikes={"a": (1.23e-8,)}), cfg)
        assert tr.fire_times("a") == [pytest.approx(2e-8)]


class TestReferenceEquality:
    @pytest.mark.parametrize("delta_t", [0.0, 0.5e-6, -0.3e-6])
    def test_forced_pair_matches_scalar_reference(self, delta_t):
        net = two_neuron_net(51e3)
        t_pre = max(0.0, -delta_t)
        stim = Stimulus(forced_spikes={"a": (t_pre,), "b": (t_pre + delta_t,)})
        cfg = SimConfig(dt=1e-8, t_end=8e-6, trace_decimation=1)
        tr = run(net, stim, cfg)
        v_ref, g_ref, fires_ref = reference_run(net, stim, cfg)
        np.testing.assert_array_equal(tr.v_mem, v_ref)
        np.testing.assert_array_equal(tr.g, g_ref)
        assert [(nid, k * cfg.dt) for nid, k in fires_ref] == [
            (ev.neuron_id, ev.t_onset) for ev in tr.fires
        ]

    def test_chain_with_currents_matches_reference(self):
        nparams = default_neuron_params()
        syn = default_synapse_params()
        net = Network(
            neurons=(("a", nparams), ("b", nparams), ("c", nparams)),
            synapses=(
                SynapseSpec("s1", "a", "b", syn, 1.0 / 60e3),
                SynapseSpec("s2", "b", "c", syn, 1.0 / 80e3),
            ),
        )
        stim = Stimulus(
            forced_spikes={"a": (0.0, 4e-6)},
            currents={"c": (CurrentSegment(1e-6, 2e-6, 5e-7),)},
        )
        cfg = SimConfig(dt=1e-8, t_end=10e-6, trace_decimation=1)
        tr = run(net, stim, cfg)
        v_ref, g_ref, fires_ref = reference_run(net, stim, cfg)
        np.testing.assert_array_equal(tr.v_mem, v_ref)
        np.testing.assert_array_equal(tr.g, g_ref)
        assert len(tr.fires) == len(fires_ref)


class TestCausality:
    def test_downstream_unaffected_until_after_onset(self):
        nparams = default_neuron_params()
        syn = default_synapse_params()
        net = Network(
            neurons=(("a", nparams), ("b", nparams), ("c", nparams)),
            synapses=(
                SynapseSpec("s1", "a", "b", syn, 1.0 / 51e3),
                SynapseSpec("s2", "b", "c", syn, 1.0 / 51e3),
            ),
        )
        cfg = SimConfig(dt=1e-8, t_end=3e-6, trace_decimation=1)
        tr = run(net, Stimulus(forced_spikes={"a": (0.0,)}), cfg)
        (t_b,) = tr.fire_times("b")
        k_b = round(t_b / cfg.dt)
        v_c = tr.v_mem[:, 2]
        # b crossed threshold during the step ending at t_b; its drive
        # reaches c during the next step, i.e. rows at and before t_b are
        # untouched and the row after it shows the dip
        assert np.all(v_c[: k_b + 1] == 0.0)
        assert v_c[k_b + 1] < 0.0


class TestRefractoryDiscard:
    def test_inputs_during_firing_leave_no_trace(self):
        short = SpikeShape(v_refr=0.0, v_a_plus=0.3, v_a_minus=0.1,
                           t_plus=0.2e-6, t_minus=0.5e-6, tau_decay=0.1e-6)
        nparams = default_neuron_params()
        a_params = NeuronParams(c_mem=10e-12, r_leaky=10e6, v_thr=-0.1,
                                v_refr=0.0, hysteresis=0.0, shape=short)
        # thresholds high enough that the pair never programs the synapse
        syn = SynapseParams(g_min=1e-9, g_max=1e-4,
                            thr=PlasticityThresholds(1.0, 1.0),
                            eta_p=48.0, eta_d=48.0)
        net = Network(
            neurons=(("a", a_params), ("c", nparams)),
            synapses=(SynapseSpec("s", "a", "c", syn, 1.0 / 51e3),),
        )
        cfg = SimConfig(dt=1e-8, t_end=8e-6, trace_decimation=1)
        # c fires at t=0; a's two short spikes land entirely inside c's
        # firing phase [0, 3 us)
        with_inputs = run(net, Stimulus(forced_spikes={"c": (0.0,),
                                                       "a": (0.5e-6, 1.5e-6)}), cfg)
        without = run(net, Stimulus(forced_spikes={"c": (0.0,)}), cfg)
        k_end = round(nparams.shape.t_spk / cfg.dt)
        np.testing.assert_array_equal(with_inputs.v_mem[k_end:, 1],
                                      without.v_mem[k_end:, 1])
        np.testing.assert_array_equal(with_inputs.g[k_end:], without.g[k_end:])
        assert with_inputs.fire_times("c") == without.fire_times("c")


class TestMonotonicity:
    def test_stronger_input_never_fires_later(self):
        onsets = []
        for r in (40e3, 51e3, 80e3, 120e3, 145e3, 200e3, 1e6):
            net = two_neuron_net(r)
            cfg = SimConfig(dt=1e-8, t_end=6e-6, trace_decimation=100)
            tr = run(net, Stimulus(forced_spikes={"a": (0.0,)}), cfg)
            fires = tr.fire_times("b")
            onsets.append(fires[0] if fires else math.inf)
        assert onsets == sorted(onsets)


class TestInjectedCurrent:
    def test_constant_segment_charge_balance(self):
        nparams = default_neuron_params()
        net = Network(neurons=(("n", nparams),), synapses=())
        stim = Stimulus(currents={"n": (CurrentSegment(0.0, 1e-6, 8e-7),)})
        cfg = SimConfig(dt=1e-8, t_end=1e-6, trace_decimation=100)
        tr = run(net, stim, cfg)
        tau = nparams.tau_m
        expected = -8e-7 * nparams.r_leaky * (1 - math.exp(-1e-6 / tau))
        assert tr.v_mem[-1, 0] == pytest.approx(expected, rel=1e-9)

    def test_current_into_firing_neuron_discarded(self):
        nparams = default_neuron_params()
        net = Network(neurons=(("n", nparams),), synapses=())
        forced = {"n": (0.0,)}
        seg = Stimulus(forced_spikes=forced,
                       currents={"n": (CurrentSegment(0.5e-6, 1.5e-6, 1e-6),)})
        bare = Stimulus(forced_spikes=forced)
        cfg = SimConfig(dt=1e-8, t_end=5e-6, trace_decimation=1)
        np.testing.assert_array_equal(run(net, seg, cfg).v_mem,
                                      run(net, bare, cfg).v_mem)


class TestDeterminism:
    def test_repeated_runs_byte_identical(self, tmp_path):
        net = two_neuron_net()
        stim = Stimulus(forced_spikes={"a": (0.0, 4e-6), "b": (2e-6,)})
        cfg = SimConfig(dt=1e-8, t_end=12e-6, trace_decimation=7,
                        record=RecordFlags(v_mem=True, ports=True, g=True, fires=True))
        payloads = []
        for i in range(2):
            tr = run(net, stim, cfg)
            p = tmp_path / f"t{i}.csv"
            f = tmp_path / f"f{i}.csv"
            tr.write_csv(p)
            tr.write_fires_csv(f)
            payloads.append(p.read_bytes() + f.read_bytes())
        assert payloads[0] == payloads[1]


class TestDtRefinement:
    def test_halving_dt_shifts_fires_less_than_dt(self):
        net = two_neuron_net(51e3)
        stim = Stimulus(forced_spikes={"a": (0.0,)})
        coarse = run(net, stim, SimConfig(dt=1e-8, t_end=6e-6, trace_decimation=600))
        fine = run(net, stim, SimConfig(dt=5e-9, t_end=6e-6, trace_decimation=1200))
        fc = coarse.fire_times("b")
        ff = fine.fire_times("b")
        assert len(fc) == len(ff) == 1
        assert abs(fc[0] - ff[0]) < 1e-8
        g_c = coarse.final_conductances()["s"]
        g_f = fine.final_conductances()["s"]
        assert abs(g_c - g_f) / g_f < 0.01


class TestTraceSemantics:
    def test_t_end_zero_initial_row_only(self):
        net = two_neuron_net()
        tr = run(net, Stimulus(), SimConfig(dt=1e-8, t_end=0.0))
        assert tr.t.shape == (1,)
        assert np.all(tr.v_mem == 0.0)

    def test_decimation_thins_rows_not_fires(self):
        net = two_neuron_net(51e3)
        stim = Stimulus(forced_spikes={"a": (0.0,)})
        full = run(net, stim, SimConfig(dt=1e-8, t_end=4e-6, trace_decimation=1))
        thin = run(net, stim, SimConfig(dt=1e-8, t_end=4e-6, trace_decimation=50))
        assert thin.t.shape[0] == full.t.shape[0] // 50 + 1
        assert thin.fires == full.fires
        np.testing.assert_array_equal(thin.v_mem, full.v_mem[::50])

    def test_fire_events_consistent_with_mode_rows(self):
        net = two_neuron_net(51e3)
        stim = Stimulus(forced_spikes={"a": (0.0,)})
        tr = run(net, stim, SimConfig(dt=1e-8, t_end=4e-6, trace_decimation=1))
        for ev in tr.fires:
            j = tr.neuron_ids.index(ev.neuron_id)
            k = round(ev.t_onset / 1e-8)
            assert tr.mode[k, j] == 1

    def test_ports_recorded_when_enabled(self):
        net = two_neuron_net(51e3)
        stim = Stimulus(forced_spikes={"a": (0.0,)})
        cfg = SimConfig(dt=1e-8, t_end=1e-6, trace_decimation=1,
                        record=RecordFlags(v_mem=True, ports=True, g=True, fires=True))
        tr = run(net, stim, cfg)
        # during a's plateau its port must sit at v_refr + v_a_plus
        k = 5  # 50 ns: inside the plateau
        assert tr.ports[k, 0] == pytest.approx(0.3, rel=1e-12)


class TestValidationErrors:
    def test_self_loop_rejected(self):
        nparams = default_neuron_params()
        syn = default_synapse_params()
        net = Network(neurons=(("a", nparams),),
                      synapses=(SynapseSpec("s", "a", "a", syn, 1e-6),))
        with pytest.raises(ConfigError, match="self-loop"):
            run(net, Stimulus(), SimConfig(t_end=0.0))

    def test_unknown_endpoint_rejected(self):
        nparams = default_neuron_params()
        syn = default_synapse_params()
        net = Network(neurons=(("a", nparams),),
                      synapses=(SynapseSpec("s", "a", "zz", syn, 1e-6),))
        with pytest.raises(ConfigError, match="zz"):
            run(net, Stimulus(), SimConfig(t_end=0.0))

    def test_duplicate_ids_rejected(self):
        nparams = default_neuron_params()
        net = Network(neurons=(("a", nparams), ("a", nparams)), synapses=())
        with pytest.raises(ConfigError, match="duplicate"):
            run(net, Stimulus(), SimConfig(t_end=0.0))

    def test_g_init_outside_bounds_rejected(self):
        nparams = default_neuron_params()
        syn = default_synapse_params()
        net = Network(neurons=(("a", nparams), ("b", nparams)),
                      synapses=(SynapseSpec("s", "a", "b", syn, 1.0),))
        with pytest.raises(ConfigError, match="g_init"):
            run(net, Stimulus(), SimConfig(t_end=0.0))

    def test_tau_m_not_above_dt_rejected(self):
        p = NeuronParams(c_mem=1e-12, r_leaky=1e3, v_thr=-0.1,
                         v_refr=0.0, hysteresis=0.0, shape=default_shape())
        net = Network(neurons=(("a", p),), synapses=())
        with pytest.raises(ConfigError, match="time constant"):
            run(net, Stimulus(), SimConfig(dt=1e-8, t_end=1e-6))

    def test_overlapping_segments_rejected(self):
        net = two_neuron_net()
        stim = Stimulus(currents={"a": (CurrentSegment(0.0, 2e-6, 1e-9),
                                        CurrentSegment(1e-6, 3e-6, 1e-9))})
        with pytest.raises(ConfigError, match="overlap"):
            run(net, stim, SimConfig(t_end=0.0))

    def test_negative_spike_time_rejected(self):
        net = two_neuron_net()
        stim = Stimulus(forced_spikes={"a": (-1e-6,)})
        with pytest.raises(ConfigError, match="negative"):
            run(net, stim, SimConfig(t_end=0.0))
