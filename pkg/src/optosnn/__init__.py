"""Optoelectronic spiking neuron simulator and photonic SNN toolkit.

Subsystems:

- ``izhikevich`` / ``neuron``: single-neuron dynamics (the reference
  two-variable model and the optoelectronic RC/laser behavioral model).
- ``presets`` / ``calibration``: committed parameter regimes and the
  accumulation-target parameter search.
- ``spikes``: spike-train construction, Poisson encoding, rate decoding.
- ``network``: clock-driven layered simulation (feedforward and WTA).
- ``ann`` / ``convert`` / ``stdp``: backprop training, ANN-to-SNN
  conversion, and unsupervised STDP, with scikit-learn style estimators.
- ``energy``: device energy/power accounting and mesh energy models.
- ``mnist`` / ``serialize`` / ``config`` / ``plots`` / ``cli``: data
  loading, file formats, experiment configs and the command-line harness.
"""

from .ann import AnnModel, MlpClassifier, train_ann
from .calibration import (
    CalibrationError,
    CalibrationTarget,
    calibrate_three_spike_threshold,
)
from .convert import ConversionConfig, SnnClassifier, convert_ann_to_snn
from .energy import (
    FOUNDRY,
    NANO,
    DeviceEnergyParams,
    EnergyReport,
    MeshEnergyParams,
    TaskEnergySpec,
    build_report,
)
from .evaluation import EvalResult, evaluate
from .izhikevich import IzhikevichParams, IzhikevichState, izhikevich_step
from .mnist import MnistDataset, load_mnist
from .network import (
    NetworkSimulator,
    SimConfig,
    Topology,
    build_feedforward,
    build_wta,
    run,
)
from .neuron import (
    DriveInput,
    NeuronTrace,
    OptoNeuronParams,
    OptoNeuronState,
    opto_step,
    scale_time,
    simulate_neuron,
)
from .presets import preset, preset_names
from .spikes import (
    EncodingConfig,
    GroupPattern,
    SpikeTrain,
    build_group_pattern,
    build_suppression_pattern,
    count_spikes_per_group,
    poisson_encode,
    rate_decode,
)
from .stdp import StdpClassifier, StdpConfig, stdp_update, train_stdp

__version__ = "0.1.0"

__all__ = [
    "AnnModel", "MlpClassifier", "train_ann",
    "CalibrationError", "CalibrationTarget", "calibrate_three_spike_threshold",
    "ConversionConfig", "SnnClassifier", "convert_ann_to_snn",
    "FOUNDRY", "NANO", "DeviceEnergyParams", "EnergyReport",
    "MeshEnergyParams", "TaskEnergySpec", "build_report",
    "EvalResult", "evaluate",
    "IzhikevichParams", "IzhikevichState", "izhikevich_step",
    "MnistDataset", "load_mnist",
    "NetworkSimulator", "SimConfig", "Topology",
    "build_feedforward", "build_wta", "run",
    "DriveInput", "NeuronTrace", "OptoNeuronParams", "OptoNeuronState",
    "opto_step", "scale_time", "simulate_neuron",
    "preset", "preset_names",
    "EncodingConfig", "GroupPattern", "SpikeTrain",
    "build_group_pattern", "build_suppression_pattern",
    "count_spikes_per_group", "poisson_encode", "rate_decode",
    "StdpClassifier", "StdpConfig", "stdp_update", "train_stdp",
    "__version__",
]
