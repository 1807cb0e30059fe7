"""Behavioral simulator for spiking networks of dual-mode integrate-and-fire
neurons coupled through two-terminal resistive synapses with
voltage-threshold plasticity.

The public surface:

* :mod:`ifnsim.waveform` -- the spike shape and pair net-potential math
* :mod:`ifnsim.synapse`  -- conductance/current conversion and plasticity
* :mod:`ifnsim.neuron`   -- the dual-mode leaky integrate-and-fire model
* :mod:`ifnsim.engine`   -- fixed-step network simulation (compiled kernel
  with a NumPy fallback, selected at import; see :mod:`ifnsim.backend`)
* :mod:`ifnsim.scenarios` -- pair characterization, calibration, energy,
  and the associative-learning experiment
* :mod:`ifnsim.cli`      -- the ``ifnsim`` command
"""

__version__ = "0.1.0"

from .backend import active_kernel, available_kernels
from .engine import run
from .errors import ConfigError, ContractError, IfnsimError, ShapeError
from .model import (
    CurrentSegment,
    FireEvent,
    Network,
    RecordFlags,
    SimConfig,
    Stimulus,
    SynapseSpec,
    Trace,
)
from .neuron import (
    Mode,
    NeuronParams,
    NeuronState,
    begin_fire,
    check_fire,
    default_neuron_params,
    end_fire,
    initial_state,
    integrate_step,
    port_voltage,
)
from .scenarios import (
    CalibrationTargets,
    PavlovSettings,
    calibrate_shape,
    energy_report,
    run_pavlov,
    stdp_curve,
)
from .synapse import (
    SynapseParams,
    SynapseState,
    apply_plasticity_step,
    default_synapse_params,
    pair_weight_change,
    synapse_current,
)
from .waveform import (
    PlasticityThresholds,
    SpikeShape,
    default_shape,
    default_thresholds,
    energy_into_load,
    net_potential,
    over_threshold_window,
    overdrive_integrals,
    spike_voltage,
    validate_shape,
)
