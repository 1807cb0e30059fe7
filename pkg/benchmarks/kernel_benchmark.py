#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the NumPy fallback.

Two workloads:

* small  -- the three-neuron associative-learning wiring under repeated
  co-stimulation (per-step overhead dominated);
* fanout -- one neuron driving 1000 resistive synapses (per-synapse
  throughput dominated).

Both kernels are run on identical inputs; traces are compared bit for bit
before timings are reported.

Usage: python benchmarks/kernel_benchmark.py [--model-time SECONDS]
"""
import argparse
import time

import numpy as np

from ifnsim import backend
from ifnsim.engine import run
from ifnsim.model import Network, RecordFlags, SimConfig, Stimulus, SynapseSpec
from ifnsim.neuron import default_neuron_params
from ifnsim.synapse import default_synapse_params


def small_case(t_end):
    nparams = default_neuron_params()
    syn = default_synapse_params()
    net = Network(
        neurons=(("ifn1", nparams), ("ifn2", nparams), ("ifn3", nparams)),
        synapses=(
            SynapseSpec("s1", "ifn1", "ifn3", syn, 1.0 / 51e3),
            SynapseSpec("s2", "ifn2", "ifn3", syn, 1.0 / 1e6),
        ),
    )
    onsets = tuple(np.arange(0.0, t_end, 100e-6))
    stim = Stimulus(forced_spikes={"ifn1": onsets, "ifn2": onsets})
    cfg = SimConfig(dt=10e-9, t_end=t_end, trace_decimation=1000)
    return net, stim, cfg


def fanout_case(t_end):
    nparams = default_neuron_params()
    syn = default_synapse_params()
    n_post = 1000
    neurons = [("pre", nparams)] + [(f"p{i:04d}", nparams) for i in range(n_post)]
    synapses = tuple(
        SynapseSpec(f"s{i:04d}", "pre", f"p{i:04d}", syn, 1e-6) for i in range(n_post)
    )
    net = Network(neurons=tuple(neurons), synapses=synapses)
    stim = Stimulus(forced_spikes={"pre": tuple(np.arange(0.0, t_end, 10e-6))})
    cfg = SimConfig(dt=10e-9, t_end=t_end, trace_decimation=10_000,
                    record=RecordFlags(v_mem=True, ports=False, g=False, fires=True))
    return net, stim, cfg


def bench(name, case, kernels):
    net, stim, cfg = case
    n_steps = round(cfg.t_end / cfg.dt)
    results = {}
    traces = {}
    for kernel in kernels:
        t0 = time.perf_counter()
        traces[kernel.name] = run(net, stim, cfg, kernel=kernel)
        results[kernel.name] = time.perf_counter() - t0
    names = list(results)
    if len(names) == 2:
        a, b = (traces[n] for n in names)
        same = (np.array_equal(a.v_mem, b.v_mem) and np.array_equal(a.g, b.g)
                and a.fires == b.fires)
        agreement = "bit-identical" if same else "MISMATCH"
    else:
        agreement = "single kernel"
    print(f"\n{name}: {n_steps} steps x {len(net.neurons)} neurons / "
          f"{len(net.synapses)} synapses  [{agreement}]")
    base = max(results.values())
    for kname, elapsed in results.items():
        rate = n_steps / elapsed
        print(f"  {kname:>8}: {elapsed:8.3f} s   {rate / 1e6:8.2f} Msteps/s   "
              f"x{base / elapsed:.1f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model-time", type=float, default=2e-3,
                        help="simulated seconds per workload (default 2 ms)")
    args = parser.parse_args()

    kernels = backend.available_kernels()
    print("kernels:", ", ".join(k.name for k in kernels))
    bench("small (3 neurons, 2 synapses)", small_case(args.model_time), kernels)
    bench("fanout (1 -> 1000 synapses)", fanout_case(args.model_time / 2), kernels)


if __name__ == "__main__":
    main()
