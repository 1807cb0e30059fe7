"""Spike waveform and spike-pair net-potential math.

The action potential used throughout the simulator is a circuit-friendly
shape: a short positive pulse of large amplitude followed by a longer,
slowly relaxing negative tail that decays back to the refractory level
with an RC time constant. Finite driver slew is modeled as linear edge
ramps folded into the positive pulse.

All quantities are SI (volts, seconds, ohms, joules). Amplitudes are
referenced to the refractory potential ``v_refr``: the waveform equals
``v_refr`` exactly outside ``[0, t_plus + t_minus)``.

When two neurons drive such spikes into the two terminals of a resistive
synapse with onset offset ``delta_t``, the difference
``v_net = v_post - v_pre`` is what programs the device: conductance moves
only while ``v_net`` exceeds ``+v_tp`` or drops below ``-v_tm``. The
functions here evaluate the waveform, the pair net potential, and the
threshold-overdrive exposure integrals the plasticity model consumes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

# Driver slew rates used to derive the default edge ramp durations (V/s).
SLEW_RISE = 784e6
SLEW_FALL = 500e6

# Default quadrature grid for overdrive integrals. The spike features are
# >= 100 ns wide, but the slew-limited edge ramps are sub-ns and put kinks
# inside grid cells; 0.25 ns keeps the halving-convergence of the
# integrals comfortably under 0.1%.
DEFAULT_GRID_STEP = 2.5e-10


@dataclass(frozen=True)
class SpikeShape:
    """Parameterized action-potential waveform relative to ``v_refr``.

    Piecewise definition over ``t`` in ``[0, t_plus + t_minus)``:

    * ``[0, t_rise)``              linear ramp up to ``v_refr + v_a_plus``
    * ``[t_rise, t_plus - t_fall)`` plateau at ``v_refr + v_a_plus``
    * ``[t_plus - t_fall, t_plus)`` linear ramp down to ``v_refr - v_a_minus``
    * ``[t_plus, t_plus + t_minus)`` tail ``v_refr - v_a_minus * exp(-(t - t_plus)/tau_decay)``

    and exactly ``v_refr`` everywhere else. The tail is truncated to
    ``v_refr`` at the end of the spike (one-shot tail window semantics);
    at the default decay constant the truncated residual is < 0.4 mV.
    """

    v_refr: float
    v_a_plus: float
    v_a_minus: float
    t_plus: float
    t_minus: float
    tau_decay: float
    t_rise: float = 0.0
    t_fall: float = 0.0

    @property
    def t_spk(self) -> float:
        """Total spike duration."""
        return self.t_plus + self.t_minus

    def structural_violations(self) -> list[str]:
        """Geometry problems that make the waveform ill-defined."""
        out = []
        if not self.v_a_plus >= 0.0:
            out.append(f"v_a_plus must be >= 0, got {self.v_a_plus}")
        if not self.v_a_minus >= 0.0:
            out.append(f"v_a_minus must be >= 0, got {self.v_a_minus}")
        if not self.t_plus > 0.0:
            out.append(f"t_plus must be > 0, got {self.t_plus}")
        if not self.t_minus >= 0.0:
            out.append(f"t_minus must be >= 0, got {self.t_minus}")
        if not self.tau_decay > 0.0:
            out.append(f"tau_decay must be > 0, got {self.tau_decay}")
        if not self.t_rise >= 0.0:
            out.append(f"t_rise must be >= 0, got {self.t_rise}")
        if not self.t_fall >= 0.0:
            out.append(f"t_fall must be >= 0, got {self.t_fall}")
        if self.t_rise >= 0.0 and self.t_fall >= 0.0 and self.t_rise + self.t_fall > self.t_plus:
            out.append(
                f"edge ramps do not fit inside the positive pulse: "
                f"t_rise + t_fall = {self.t_rise + self.t_fall} > t_plus = {self.t_plus}"
            )
        return out


@dataclass(frozen=True)
class PlasticityThresholds:
    """Programming thresholds of the resistive synapse.

    ``v_tp``: net potential above which resistance decreases (potentiation).
    ``v_tm``: net potential below ``-v_tm`` increases resistance (depression).
    """

    v_tp: float
    v_tm: float

    def violations(self) -> list[str]:
        out = []
        if not self.v_tp > 0.0:
            out.append(f"v_tp must be > 0, got {self.v_tp}")
        if not self.v_tm > 0.0:
            out.append(f"v_tm must be > 0, got {self.v_tm}")
        return out


def default_shape() -> SpikeShape:
    """The calibrated default spike shape shipped with the simulator.

    Amplitudes and decay constant come from the calibration search in
    ``ifnsim.scenarios.calibrate_shape`` (see its docstring for the targets
    and reproduction recipe): with 340 mV programming thresholds a single
    spike never programs a synapse, while a pair at 0.5 us offset peaks
    near 400 mV and stays over threshold for about 0.4 us. Edge ramps are
    the amplitude swings divided by the 784/500 V/us driver slew rates.
    """
    v_a_plus = 0.300
    v_a_minus = 0.100
    return SpikeShape(
        v_refr=0.0,
        v_a_plus=v_a_plus,
        v_a_minus=v_a_minus,
        t_plus=0.5e-6,
        t_minus=2.5e-6,
        tau_decay=4.36931e-7,
        t_rise=v_a_plus / SLEW_RISE,
        t_fall=(v_a_plus + v_a_minus) / SLEW_FALL,
    )


def default_thresholds() -> PlasticityThresholds:
    return PlasticityThresholds(v_tp=0.340, v_tm=0.340)


def validate_shape(shape: SpikeShape, thr: PlasticityThresholds) -> list[str]:
    """All violated invariants of a shape/threshold combination.

    Returns an empty list when the shape is structurally sound and a lone
    spike is guaranteed sub-threshold on both sides (so an unpaired spike
    can never program a synapse). Diagnostic only; nothing is raised.
    """
    out = shape.structural_violations()
    out.extend(thr.violations())
    if thr.v_tp > 0.0 and shape.v_a_plus >= thr.v_tp:
        out.append(
            f"lone spike would potentiate: v_a_plus = {shape.v_a_plus} >= v_tp = {thr.v_tp}"
        )
    if thr.v_tm > 0.0 and shape.v_a_minus >= thr.v_tm:
        out.append(
            f"lone spike would depress: v_a_minus = {shape.v_a_minus} >= v_tm = {thr.v_tm}"
        )
    return out


def _require_structural(shape: SpikeShape) -> None:
    violations = shape.structural_violations()
    if violations:
        raise ShapeError("; ".join(violations))


def spike_voltage(shape: SpikeShape, t):
    """Waveform value at time ``t`` (scalar or array) after spike onset at 0.

    Raises :class:`ShapeError` for structurally invalid shapes rather than
    evaluating a meaningless piecewise function.
    """
    _require_structural(shape)
    ts = np.asarray(t, dtype=float)
    out = _spike_voltage_checked(shape, ts)
    if np.isscalar(t) or ts.ndim == 0:
        return float(out)
    return out


def _spike_voltage_checked(shape: SpikeShape, ts: np.ndarray) -> np.ndarray:
    """Vectorized piecewise evaluation; assumes a structurally valid shape."""
    v0 = shape.v_refr
    up = shape.v_a_plus
    down = shape.v_a_minus
    fall_start = shape.t_plus - shape.t_fall

    out = np.full(ts.shape, v0, dtype=float)

    if shape.t_rise > 0.0:
        m = (ts >= 0.0) & (ts < shape.t_rise)
        out[m] = v0 + up * (ts[m] / shape.t_rise)

    m = (ts >= shape.t_rise) & (ts < fall_start)
    out[m] = v0 + up

    if shape.t_fall > 0.0:
        m = (ts >= fall_start) & (ts < shape.t_plus)
        out[m] = v0 + up - (up + down) * ((ts[m] - fall_start) / shape.t_fall)

    if shape.t_minus > 0.0:
        m = (ts >= shape.t_plus) & (ts < shape.t_spk)
        out[m] = v0 - down * np.exp(-(ts[m] - shape.t_plus) / shape.tau_decay)

    return out


def net_potential(shape: SpikeShape, delta_t: float, t):
    """Net potential ``v_post - v_pre`` across a synapse driven by a spike pair.

    The pre-synaptic spike starts at ``t = 0`` and the post-synaptic one at
    ``t = delta_t``, so positive ``delta_t`` means pre-before-post.
    """
    _require_structural(shape)
    ts = np.asarray(t, dtype=float)
    out = _spike_voltage_checked(shape, ts - delta_t) - _spike_voltage_checked(shape, ts)
    if np.isscalar(t) or ts.ndim == 0:
        return float(out)
    return out


def _pair_grid(shape: SpikeShape, delta_t: float, grid_step: float) -> np.ndarray:
    """Uniform sample grid covering the union of both spikes' supports."""
    if not grid_step > 0.0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")
    t0 = min(0.0, delta_t)
    t1 = max(shape.t_spk, delta_t + shape.t_spk)
    n = int(math.ceil((t1 - t0) / grid_step)) + 1
    return t0 + grid_step * np.arange(n + 1)


def overdrive_integrals(
    shape: SpikeShape,
    thr: PlasticityThresholds,
    delta_t: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> tuple[float, float]:
    """Threshold-overdrive exposure integrals of a spike pair.

    Returns ``(pot, dep)`` in volt-seconds, where
    ``pot = integral of max(0, v_net - v_tp) dt`` and
    ``dep = integral of max(0, -v_net - v_tm) dt`` over the union of both
    spikes' supports. Trapezoid rule on a fixed grid (``grid_step``).
    """
    _require_structural(shape)
    bad = thr.violations()
    if bad:
        raise ValueError("; ".join(bad))
    ts = _pair_grid(shape, delta_t, grid_step)
    vn = _spike_voltage_checked(shape, ts - delta_t) - _spike_voltage_checked(shape, ts)
    pot = float(np.trapezoid(np.maximum(vn - thr.v_tp, 0.0), dx=grid_step))
    dep = float(np.trapezoid(np.maximum(-vn - thr.v_tm, 0.0), dx=grid_step))
    return pot, dep


def over_threshold_window(
    shape: SpikeShape,
    thr: PlasticityThresholds,
    delta_t: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> float:
    """Total duration for which the pair net potential exceeds ``v_tp``.

    Measured on the quadrature grid with linear interpolation of the
    threshold crossings, so the result is accurate to well below one grid
    step for the piecewise-smooth waveforms used here.
    """
    _require_structural(shape)
    bad = thr.violations()
    if bad:
        raise ValueError("; ".join(bad))
    ts = _pair_grid(shape, delta_t, grid_step)
    f = (
        _spike_voltage_checked(shape, ts - delta_t)
        - _spike_voltage_checked(shape, ts)
        - thr.v_tp
    )
    return _positive_measure(ts, f)


def window_from_samples(ts, v_net, v_tp: float) -> float:
    """Over-threshold duration measured from already-sampled pair data.

    Same crossing-interpolation rule as :func:`over_threshold_window`, so
    a report computed from an exported CSV agrees with the direct
    evaluation to well under one sample period.
    """
    return _positive_measure(np.asarray(ts, dtype=float),
                             np.asarray(v_net, dtype=float) - v_tp)


def _positive_measure(ts: np.ndarray, f: np.ndarray) -> float:
    """Lebesgue measure of {t : f(t) > 0} for a sampled piecewise-linear f."""
    above = f > 0.0
    if not above.any():
        return 0.0
    total = 0.0
    # Segment [i, i+1): add full step when both ends above, otherwise the
    # linearly interpolated fraction on the crossing side.
    df = np.diff(f)
    h = np.diff(ts)
    a0 = above[:-1]
    a1 = above[1:]
    both = a0 & a1
    total += float(h[both].sum())
    enter = ~a0 & a1  # crossing upward inside the segment
    if enter.any():
        frac = f[1:][enter] / df[enter]
        total += float((h[enter] * frac).sum())
    leave = a0 & ~a1  # crossing downward inside the segment
    if leave.any():
        frac = f[:-1][leave] / (-df[leave])
        total += float((h[leave] * frac).sum())
    return total


def energy_into_load(shape: SpikeShape, r_load: float) -> float:
    """Energy one spike dissipates into a resistive load, in joules.

    Closed-form sum of the ramp, plateau, and exponential-tail terms of
    ``integral (v(t) - v_refr)^2 / r_load dt`` over the spike support.
    """
    _require_structural(shape)
    if not r_load > 0.0:
        raise ValueError(f"r_load must be > 0, got {r_load}")
    up = shape.v_a_plus
    down = shape.v_a_minus
    rise = up * up * shape.t_rise / 3.0
    plateau = up * up * (shape.t_plus - shape.t_rise - shape.t_fall)
    # Linear ramp between +up and -down: mean-square is (a^2 + a*b + b^2)/3.
    fall = shape.t_fall * (up * up - up * down + down * down) / 3.0
    tail = down * down * (shape.tau_decay / 2.0) * (
        -math.expm1(-2.0 * shape.t_minus / shape.tau_decay)
    )
    return (rise + plateau + fall + tail) / r_load


def energy_into_load_quadrature(
    shape: SpikeShape, r_load: float, grid_step: float = DEFAULT_GRID_STEP
) -> float:
    """Trapezoid-rule cross-check of :func:`energy_into_load`."""
    _require_structural(shape)
    if not r_load > 0.0:
        raise ValueError(f"r_load must be > 0, got {r_load}")
    n = int(math.ceil(shape.t_spk / grid_step)) + 1
    ts = grid_step * np.arange(n + 1)
    v = _spike_voltage_checked(shape, ts) - shape.v_refr
    return float(np.trapezoid(v * v, dx=grid_step)) / r_load
