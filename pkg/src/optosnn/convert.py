"""ANN-to-SNN conversion for rate-coded inference.

A trained rectifier network is normalized layer by layer (dividing by the
largest activation seen on a calibration batch, so every unit's activation
lands in [0, 1]) and its signed weights are transferred onto a feedforward
topology of optoelectronic neurons. Activations map onto firing rates:
pixel intensities become Poisson input rates, and a normalized activation
of 1.0 corresponds to a configured drive current. Biases fold into
constant per-neuron drive currents. Layer-to-layer weight factors account
for the neuron's measured firing rate at the reference drive, so each
stage sees comparable currents.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from . import presets
from .ann import AnnModel, forward
from .network import (
    NetworkSimulator,
    SimConfig,
    Topology,
    build_feedforward,
    run_batched_counts,
)
from .neuron import simulate_neuron
from .spikes import EncodingConfig, poisson_encode, rate_decode

__all__ = [
    "ConversionError",
    "ConversionConfig",
    "normalize_ann",
    "unit_rate",
    "convert_ann_to_snn",
    "SnnClassifier",
]


class ConversionError(RuntimeError):
    """Raised when a model cannot be normalized for rate coding."""


@dataclass(frozen=True)
class ConversionConfig:
    """Rate-coding settings for converted-network inference."""

    duration_s: float = 0.25
    max_rate_hz: float = 500.0
    drive_scale_a: float = 3.0e-4  # current for a normalized activation of 1.0
    dt_s: float = 5.0e-5
    pulse_width_s: float = presets.DEMO_PULSE_WIDTH_S
    pulse_amplitude_a: float = presets.DEMO_SPIKE_CURRENT_A
    calibration_size: int = 1000
    preset_name: str = "rate"
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.duration_s > 0 and self.max_rate_hz > 0):
            raise ValueError("duration and max_rate must be > 0")
        if not self.drive_scale_a > 0:
            raise ValueError("drive_scale_a must be > 0")


def normalize_ann(model: AnnModel, calibration_images) -> tuple[AnnModel, list[float]]:
    """Data-based max-activation normalization.

    Returns a model whose activations stay in [0, 1] on the calibration
    batch, plus the per-layer scale factors that were divided out. A layer
    that never activates on the batch cannot be normalized.
    """
    x = np.asarray(calibration_images, dtype=float)
    _, hidden = forward(model, x, return_hidden=True)
    logits = forward(model, x)
    scales = []
    for i, h in enumerate(hidden):
        peak = float(h.max())
        if peak <= 0:
            raise ConversionError(f"layer {i} has all-zero activations on the calibration batch")
    # scale factors chain: lambda_0 is the input ceiling (pixels already in [0,1])
    lambdas = [1.0] + [float(h.max()) for h in hidden] + [float(max(logits.max(), 0.0))]
    if lambdas[-1] <= 0:
        raise ConversionError("output layer has no positive logit on the calibration batch")
    weights, biases = [], []
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        weights.append(w * (lambdas[i] / lambdas[i + 1]))
        biases.append(b / lambdas[i + 1])
        scales.append(lambdas[i + 1])
    return AnnModel(weights=weights, biases=biases), scales


def unit_rate(cc: ConversionConfig, probe_duration_s: float = 1.0) -> float:
    """Firing rate of the conversion neuron at the reference drive current."""
    params = presets.preset(cc.preset_name)
    trace = simulate_neuron(
        [0.0], None, params, cc.dt_s, probe_duration_s,
        cc.drive_scale_a, probe_duration_s,
    )
    rate = len(trace.output_spikes) / probe_duration_s
    if rate <= 0:
        raise ConversionError(
            f"conversion neuron is silent at the reference drive "
            f"{cc.drive_scale_a:g} A; increase drive_scale_a"
        )
    return rate


def convert_ann_to_snn(
    model: AnnModel,
    cc: ConversionConfig,
    calibration_images,
) -> Topology:
    """Build the spiking topology carrying the normalized ANN weights.

    The signed, drive-calibrated weight matrices are split into the
    nonnegative excitatory/inhibitory pair; biases become constant drive.
    """
    normalized, _ = normalize_ann(model, calibration_images)
    r_unit = unit_rate(cc)
    mean_current_in = cc.pulse_amplitude_a * cc.pulse_width_s * cc.max_rate_hz
    mean_current_hidden = cc.pulse_amplitude_a * cc.pulse_width_s * r_unit
    factors = [cc.drive_scale_a / mean_current_in] + [
        cc.drive_scale_a / mean_current_hidden
    ] * (len(normalized.weights) - 1)
    signed = [w * f for w, f in zip(normalized.weights, factors)]
    return build_feedforward(
        normalized.layer_sizes,
        signed,
        params=presets.preset(cc.preset_name),
        biases=normalized.biases,
        bias_drive_scale=cc.drive_scale_a,
        pulse_width_s=cc.pulse_width_s,
        pulse_amplitude_a=cc.pulse_amplitude_a,
    )


class SnnClassifier(ClassifierMixin, BaseEstimator):
    """Rate-coded spiking classifier over a fixed topology.

    Prediction encodes each sample as Poisson trains, runs the clock-driven
    simulation, counts output-layer spikes and decodes the class with the
    highest count (ties to the lowest class index). Deterministic: sample i
    uses encoding seed ``seed + i``.
    """

    def __init__(self, topology: Topology | None = None,
                 conversion: ConversionConfig | None = None):
        self.topology = topology
        self.conversion = conversion

    @classmethod
    def from_ann(cls, model: AnnModel, cc: ConversionConfig, calibration_images):
        return cls(topology=convert_ann_to_snn(model, cc, calibration_images),
                   conversion=cc)

    def _require_ready(self):
        if self.topology is None or self.conversion is None:
            raise ValueError("SnnClassifier needs both a topology and a conversion config")

    def fit(self, X=None, y=None):
        """No-op; the topology is fixed at construction."""
        self._require_ready()
        return self

    def predict_counts(self, X, batch_size: int = 50) -> np.ndarray:
        """Output-layer spike counts per sample, shape (n, n_out).

        Samples run through the vectorized batch path in fixed-size chunks,
        so results are deterministic for a given X and seed.
        """
        self._require_ready()
        cc = self.conversion
        cfg = SimConfig(dt_s=cc.dt_s, duration_s=cc.duration_s)
        X = np.asarray(X, dtype=float)
        n_out = self.topology.layers[-1].size
        counts = np.zeros((len(X), n_out), dtype=int)
        for lo in range(0, len(X), batch_size):
            chunk = X[lo:lo + batch_size]
            batch_trains = [
                poisson_encode(x, EncodingConfig(
                    max_rate_hz=cc.max_rate_hz, duration_s=cc.duration_s,
                    seed=cc.seed + lo + j,
                ))
                for j, x in enumerate(chunk)
            ]
            out = run_batched_counts(self.topology, batch_trains, cfg)
            counts[lo:lo + len(chunk)] = out[-1]
        return counts

    def predict(self, X) -> np.ndarray:
        counts = self.predict_counts(X)
        labels = np.arange(counts.shape[1])
        return np.array([rate_decode(c, labels) for c in counts])
