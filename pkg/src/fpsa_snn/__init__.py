"""Spiking-laser neuron simulator with time-multiplexed pattern classification.

Core pieces:

- :mod:`fpsa_snn.yamada` -- two-section laser rate equations and the RK4
  integrator (the physical neuron),
- :mod:`fpsa_snn.encoding` -- latency spike encoding and window multiplexing,
- :mod:`fpsa_snn.learning` -- kernel-weighted supervised spike learning,
- :mod:`fpsa_snn.network` -- single-neuron and cascaded inference,
- :mod:`fpsa_snn.estimator` -- scikit-learn style classifier facade,
- :mod:`fpsa_snn.cli` -- the ``fpsa-snn`` command line front end.
"""
from .encoding import (
    PixelPattern,
    PulseShape,
    WindowSpec,
    encode_pattern,
    demultiplex_response,
    synthesize_stimulus,
    time_multiplex,
)
from .errors import CalibrationError, ConfigError, NumericalFailure
from .learning import (
    KernelParams,
    LearningConfig,
    SimulationContext,
    TargetSpec,
    TrainResult,
    WeightMatrix,
    apply_update,
    delta_weight,
    kernel,
    train,
    train_epoch,
)
from .network import (
    CascadeConfig,
    InferenceResult,
    Topology,
    evaluate,
    infer,
    infer_cascaded,
)
from .characterize import (
    RegimeReport,
    calibrate_excitable_bias,
    classify_regime,
    find_pulse_threshold,
    pi_curve,
    pi_knee,
)
from .params import LaserParams
from .signals import SpikeTrain, StimulusWaveform, rectangular_pulses
from .spikes import SpikeDetectConfig, detect_spikes
from .yamada import (
    NeuronState,
    NoiseConfig,
    Trajectory,
    derivatives,
    integrate,
    integrate_batch,
    settle,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
