"""Dual-mode leaky integrate-and-fire neuron.

The neuron alternates between two modes:

* **Integration**: both of its synapse-facing ports are held at the
  refractory potential ``v_refr`` (virtual ground), and the summed input
  current charges the membrane. The integrator is inverting: positive
  injected current moves ``v_mem`` *down*. The membrane leaks back toward
  ``v_refr`` with time constant ``tau_m = r_leaky * c_mem``. Firing
  triggers on a *downward* crossing of ``v_thr`` (``v_thr < v_refr``).

* **Firing**: for exactly one spike duration the neuron drives its spike
  waveform on *both* ports (forward into its output synapses and backward
  into its input synapses, which is what lets a bare two-terminal synapse
  see the pre/post pair). The membrane capacitor is held discharged at
  ``v_refr`` and any input current is discarded.

Integration uses the exponential-Euler update, which is exact for a leaky
integrator under piecewise-constant input current:

    v_ss = v_refr - i_in * r_leaky
    v'   = v_ss + (v - v_ss) * exp(-dt / tau_m)

so the zero-input leak law holds to floating-point accuracy at any step
size, and charge balance is exact for constant current over a step.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import ContractError
from .waveform import SpikeShape, default_shape, spike_voltage


class Mode(enum.IntEnum):
    INTEGRATION = 0
    FIRING = 1


@dataclass(frozen=True)
class NeuronParams:
    """Electrical constants plus the spike shape this neuron emits."""

    c_mem: float
    r_leaky: float
    v_thr: float
    v_refr: float
    hysteresis: float
    shape: SpikeShape

    @property
    def tau_m(self) -> float:
        return self.r_leaky * self.c_mem

    def violations(self) -> list[str]:
        out = []
        if not self.c_mem > 0.0:
            out.append(f"c_mem must be > 0, got {self.c_mem}")
        if not self.r_leaky > 0.0:
            out.append(f"r_leaky must be > 0, got {self.r_leaky}")
        if not self.v_thr < self.v_refr:
            out.append(
                f"firing threshold must sit below the refractory potential "
                f"(downward crossing), got v_thr={self.v_thr} v_refr={self.v_refr}"
            )
        if self.hysteresis < 0.0:
            out.append(f"hysteresis must be >= 0, got {self.hysteresis}")
        out.extend(self.shape.structural_violations())
        if self.shape.v_refr != self.v_refr:
            out.append(
                f"spike shape baseline {self.shape.v_refr} differs from neuron "
                f"v_refr {self.v_refr}"
            )
        return out


@dataclass(frozen=True)
class NeuronState:
    """Runtime state of one neuron.

    ``armed`` implements comparator hysteresis: after a fire the comparator
    re-arms only once ``v_mem`` has recovered to ``v_thr + hysteresis``.
    With the default zero hysteresis and the post-fire reset to ``v_refr``
    re-arming is immediate.
    """

    mode: Mode = Mode.INTEGRATION
    v_mem: float = 0.0
    t_fire_onset: float = 0.0
    armed: bool = True


def initial_state(params: NeuronParams) -> NeuronState:
    return NeuronState(mode=Mode.INTEGRATION, v_mem=params.v_refr, armed=True)


def leak_coefficients(params: NeuronParams, dt: float) -> tuple[float, float]:
    """Per-step exponential-Euler constants ``(decay, gain)``.

    ``decay = exp(-dt/tau_m)`` and ``gain = 1 - decay`` (computed with
    ``expm1`` so huge leak resistances stay accurate); the update is
    ``v' = v + gain * (v_ss - v)``.
    """
    x = dt / params.tau_m
    gain = -math.expm1(-x)
    return 1.0 - gain, gain


def integrate_step(
    state: NeuronState, params: NeuronParams, i_in: float, dt: float
) -> NeuronState:
    """Advance the membrane by ``dt`` under total injected current ``i_in``.

    Positive current drives ``v_mem`` down (inverting summing node).
    """
    if state.mode is not Mode.INTEGRATION:
        raise ContractError("integrate_step called while firing")
    if not dt > 0.0:
        raise ContractError(f"dt must be > 0, got {dt}")
    _, gain = leak_coefficients(params, dt)
    v_ss = params.v_refr - i_in * params.r_leaky
    return replace(state, v_mem=state.v_mem + gain * (v_ss - state.v_mem))


def check_fire(state: NeuronState, params: NeuronParams) -> bool:
    """Whether the comparator triggers at the current membrane voltage.

    Boundary inclusive: ``v_mem == v_thr`` fires. Detection happens at step
    boundaries only; there is no sub-step crossing interpolation.
    """
    if state.mode is not Mode.INTEGRATION:
        raise ContractError("check_fire called while firing")
    if not state.armed:
        return False
    return state.v_mem <= params.v_thr


def rearm(state: NeuronState, params: NeuronParams) -> NeuronState:
    """Re-arm the comparator once the membrane has recovered past the band."""
    if state.armed or state.mode is not Mode.INTEGRATION:
        return state
    if state.v_mem >= params.v_thr + params.hysteresis:
        return replace(state, armed=True)
    return state


def begin_fire(state: NeuronState, params: NeuronParams, t_now: float) -> NeuronState:
    """Enter firing mode: discharge the membrane and start driving the spike."""
    if state.mode is not Mode.INTEGRATION:
        raise ContractError("begin_fire called while already firing")
    return NeuronState(
        mode=Mode.FIRING, v_mem=params.v_refr, t_fire_onset=t_now, armed=False
    )


def end_fire(state: NeuronState, params: NeuronParams, t_now: float) -> NeuronState:
    """Return to integration once the full spike duration has elapsed.

    The duration check carries a tiny relative tolerance so end times
    snapped onto a simulation grid cannot trip the contract by rounding.
    """
    if state.mode is not Mode.FIRING:
        raise ContractError("end_fire called while not firing")
    t_spk = params.shape.t_spk
    if t_now < state.t_fire_onset + t_spk * (1.0 - 1e-9):
        raise ContractError(
            f"end_fire at t={t_now} before spike end {state.t_fire_onset + t_spk}"
        )
    return NeuronState(
        mode=Mode.INTEGRATION, v_mem=params.v_refr, t_fire_onset=state.t_fire_onset,
        armed=state.armed,
    )


def port_voltage(state: NeuronState, params: NeuronParams, t_now: float) -> float:
    """Voltage every attached synapse sees on this neuron's side.

    Both ports carry the same value: ``v_refr`` during integration, the
    spike waveform (evaluated at the time since fire onset) while firing.
    """
    if state.mode is Mode.INTEGRATION:
        return params.v_refr
    return spike_voltage(params.shape, t_now - state.t_fire_onset)


def default_neuron_params() -> NeuronParams:
    """Default electrical constants.

    Chosen so that one default spike through 51 kohm depletes the membrane
    by ~0.29 V (well past the 0.1 V firing depth) while the same spike
    through 1 Mohm moves it only ~15 mV: a strong input synapse fires the
    downstream neuron, a weak one does not.
    """
    return NeuronParams(
        c_mem=10e-12,
        r_leaky=10e6,
        v_thr=-0.100,
        v_refr=0.0,
        hysteresis=0.0,
        shape=default_shape(),
    )
