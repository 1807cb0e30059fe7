"""Two-terminal resistive synapse: current conversion and plasticity.

A synapse is just a conductance ``g`` between a pre-neuron port and a
post-neuron port. It converts the port voltage difference into current
(``i = g * (v_pre - v_post)``, positive into the post-side summing node)
and its conductance moves whenever the instantaneous net potential
``v_net = v_post - v_pre`` exceeds the programming thresholds:

* ``v_net > +v_tp``  -> conductance up (resistance down, potentiation)
* ``v_net < -v_tm``  -> conductance down (depression)

The update magnitude is a linear overdrive-rate law: the conductance
change per unit time is the rate coefficient times the overdrive beyond
the threshold, hard-clamped to ``[g_min, g_max]``. The rate coefficients
are explicit configuration so other device laws can be swapped in.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError
from .waveform import (
    DEFAULT_GRID_STEP,
    PlasticityThresholds,
    SpikeShape,
    default_thresholds,
    overdrive_integrals,
)

# Default rate calibrated so the associative-learning scenario moves a
# synapse from 1 Mohm to firing sufficiency in well under 30 pairings
# (about 18 with the default shape; see ifnsim.scenarios.run_pavlov).
DEFAULT_RATE = 48.0


@dataclass(frozen=True)
class SynapseParams:
    """Conductance bounds, programming thresholds, and plasticity rates.

    ``eta_p``/``eta_d`` are in siemens per volt-second: conductance change
    per unit overdrive per unit time above/below threshold.
    """

    g_min: float
    g_max: float
    thr: PlasticityThresholds
    eta_p: float
    eta_d: float

    def violations(self) -> list[str]:
        out = self.thr.violations()
        if not 0.0 < self.g_min <= self.g_max:
            out.append(f"need 0 < g_min <= g_max, got g_min={self.g_min} g_max={self.g_max}")
        if self.eta_p < 0.0 or self.eta_d < 0.0:
            out.append(f"rates must be >= 0, got eta_p={self.eta_p} eta_d={self.eta_d}")
        return out


@dataclass(frozen=True)
class SynapseState:
    """Runtime state: current conductance plus endpoint neuron ids."""

    g: float
    pre_id: str
    post_id: str


def default_synapse_params() -> SynapseParams:
    return SynapseParams(
        g_min=1e-9,  # 1 Gohm, bottom of the device resistance range
        g_max=1e-4,  # 10 kohm, comfortably above the strongest scenario device
        thr=default_thresholds(),
        eta_p=DEFAULT_RATE,
        eta_d=DEFAULT_RATE,
    )


def synapse_current(g: float, v_pre_port: float, v_post_port: float) -> float:
    """Current through the synapse, positive into the post summing node."""
    return g * (v_pre_port - v_post_port)


def apply_plasticity_step(
    state: SynapseState, params: SynapseParams, v_net: float, dt: float
) -> SynapseState:
    """One time step of the threshold-gated conductance update.

    ``v_net`` is ``v_post_port - v_pre_port`` at this instant. Inside the
    dead zone ``[-v_tm, v_tp]`` the state is returned unchanged (no drift).
    """
    if not dt > 0.0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    over_p = v_net - params.thr.v_tp
    over_d = -v_net - params.thr.v_tm
    if over_p <= 0.0 and over_d <= 0.0:
        return state
    g = state.g
    if over_p > 0.0:
        g = g + params.eta_p * over_p * dt
    if over_d > 0.0:
        g = g - params.eta_d * over_d * dt
    g = min(max(g, params.g_min), params.g_max)
    return replace(state, g=g)


def pair_weight_change(
    params: SynapseParams,
    shape: SpikeShape,
    delta_t: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> float:
    """Closed-form conductance change for one spike pair, before clamping.

    ``eta_p * pot - eta_d * dep`` with the overdrive integrals evaluated by
    quadrature; this is the pair response the characterization sweep plots,
    and it matches a time-stepped accumulation of
    :func:`apply_plasticity_step` to integration tolerance.
    """
    pot, dep = overdrive_integrals(shape, params.thr, delta_t, grid_step)
    return params.eta_p * pot - params.eta_d * dep
