"""Unsupervised trace-based STDP training for the winner-takes-all network.

Each input channel keeps a presynaptic trace that decays exponentially and
jumps by one on every spike. When an excitatory neuron fires, its incoming
weights move toward the current traces: channels that were recently active
strengthen, silent ones weaken, clamped to [0, w_max]. Two homeostatic
mechanisms keep the population competitive: divisive normalization of each
neuron's incoming weight sum after every sample, and an adaptive firing
threshold (an additive laser-threshold offset) bumped on every output
spike and decayed between samples.

After training, neurons are labeled by the class they respond to most; at
test time the class whose neurons fire most wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from . import presets
from .network import NetworkSimulator, SimConfig, Topology, build_wta
from .neuron import scale_time
from .spikes import EncodingConfig, poisson_encode, rate_decode

__all__ = [
    "StdpConfig",
    "stdp_update",
    "StdpPlasticity",
    "LabelAssignment",
    "train_stdp",
    "assign_labels",
    "StdpClassifier",
]


@dataclass(frozen=True)
class StdpConfig:
    """Post-synaptic trace rule plus homeostasis settings."""

    eta_post: float = 0.01
    x_tar: float = 0.5
    tau_trace_s: float = 0.02
    w_max: float = 1.0
    theta_plus_v: float = 2e-3
    tau_theta_s: float = 30.0
    norm_target: float = 15.0
    theta_max_v: float = 0.25

    def __post_init__(self) -> None:
        for name in ("eta_post", "x_tar", "tau_trace_s", "w_max",
                     "theta_plus_v", "tau_theta_s", "norm_target", "theta_max_v"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


def stdp_update(w, x_pre, cfg: StdpConfig):
    """One post-spike weight update: w + eta*(x_pre - x_tar), clamped."""
    return np.clip(w + cfg.eta_post * (np.asarray(x_pre) - cfg.x_tar), 0.0, cfg.w_max)


def normalize_incoming(w: np.ndarray, norm_target: float) -> None:
    """Divisively rescale each row (one neuron's incoming weights) in place."""
    sums = w.sum(axis=1)
    nonzero = sums > 0
    w[nonzero] *= (norm_target / sums[nonzero])[:, None]


class StdpPlasticity:
    """Network-simulator plugin applying the trace rule during a run."""

    def __init__(self, weights: np.ndarray, theta: np.ndarray, cfg: StdpConfig,
                 enabled: bool = True, theta_floor=None):
        self.weights = weights          # (n_exc, n_in), adjusted in place
        self.theta = theta              # (n_exc,) laser-threshold offsets
        self.cfg = cfg
        self.enabled = enabled
        self.theta_floor = (np.zeros(len(theta)) if theta_floor is None
                            else np.asarray(theta_floor, dtype=float))
        self.x_pre = np.zeros(weights.shape[1])
        self._decay = 1.0

    def begin_run(self, sim, sim_cfg: SimConfig) -> None:
        self.x_pre[:] = 0.0
        self._decay = float(np.exp(-sim_cfg.dt_s / self.cfg.tau_trace_s))

    def on_input_spikes(self, channels) -> None:
        np.add.at(self.x_pre, channels, 1.0)

    def on_step(self, dt: float) -> None:
        self.x_pre *= self._decay

    def on_layer_spikes(self, population: int, fired) -> None:
        if population != 0 or not self.enabled:
            return
        self.weights[fired] = stdp_update(self.weights[fired], self.x_pre, self.cfg)
        # cap keeps the laser threshold reachable below the supply rail,
        # so regulation slows a hot neuron without silencing it outright
        self.theta[fired] = np.minimum(
            self.theta[fired] + self.cfg.theta_plus_v,
            self.theta_floor[fired] + self.cfg.theta_max_v)


@dataclass
class LabelAssignment:
    """Neuron-to-class map with the mean response statistics behind it."""

    neuron_class: np.ndarray        # (n_exc,) class index per neuron
    mean_response: np.ndarray       # (n_classes, n_exc) mean spike counts

    def __post_init__(self) -> None:
        if self.neuron_class.shape[0] != self.mean_response.shape[1]:
            raise ValueError("neuron_class and mean_response disagree on neuron count")


def _encode_with_floor(x, enc: EncodingConfig, sim: NetworkSimulator,
                       cfg: SimConfig, plasticity, min_spikes: int,
                       max_boost: int = 3):
    """Run one sample, boosting input rates until the layer responds.

    Returns (run, boost_exponent). Samples that evoke fewer than
    ``min_spikes`` excitatory spikes are re-encoded at 1.5x the rate, up to
    ``max_boost`` times, so quiet samples still teach and label.
    """
    for boost in range(max_boost + 1):
        scaled = EncodingConfig(
            max_rate_hz=enc.max_rate_hz * (1.5 ** boost),
            duration_s=enc.duration_s,
            seed=enc.seed,
            intensity_scale=enc.intensity_scale,
        )
        trains = poisson_encode(x, scaled)
        out = sim.run(trains, cfg, plasticity=plasticity)
        if out.spike_counts[0].sum() >= min_spikes:
            return out, boost
    return out, max_boost


def train_stdp(
    topology: Topology,
    images,
    labels,
    cfg: StdpConfig,
    encoding: EncodingConfig,
    sim_cfg: SimConfig,
    label_images=None,
    label_labels=None,
    min_spikes: int = 5,
    theta_floor=None,
    progress=None,
) -> LabelAssignment:
    """Train the WTA topology's input weights in place, then label neurons.

    One pass over the samples: encode, simulate with plasticity, divisively
    normalize incoming weights, decay the adaptive thresholds. The labeling
    pass (defaulting to the training images) runs with plasticity frozen.
    """
    if topology.wta is None:
        raise ValueError("STDP training requires a WTA topology")
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(images) == 0:
        raise ValueError("training set is empty")
    layer = topology.layers[0]
    if layer.vth2_offset is None:
        layer.vth2_offset = np.zeros(layer.size)
    if theta_floor is None:
        theta_floor = np.zeros(layer.size)
    weights = topology.connections[0].w_exc
    plast = StdpPlasticity(weights, layer.vth2_offset, cfg, theta_floor=theta_floor)
    sim = NetworkSimulator(topology)
    theta_decay = float(np.exp(-sim_cfg.duration_s / cfg.tau_theta_s))
    normalize_incoming(weights, cfg.norm_target)
    for i, x in enumerate(images):
        enc = EncodingConfig(
            max_rate_hz=encoding.max_rate_hz,
            duration_s=sim_cfg.duration_s,
            seed=encoding.seed + i,
            intensity_scale=encoding.intensity_scale,
        )
        _encode_with_floor(x, enc, sim, sim_cfg, plast, min_spikes)
        normalize_incoming(weights, cfg.norm_target)
        layer.vth2_offset = theta_floor + (layer.vth2_offset - theta_floor) * theta_decay
        if progress is not None:
            progress(i)
    if label_images is None:
        label_images, label_labels = images, labels
    return assign_labels(topology, label_images, label_labels, encoding, sim_cfg,
                         min_spikes=min_spikes)


def assign_labels(
    topology: Topology,
    images,
    labels,
    encoding: EncodingConfig,
    sim_cfg: SimConfig,
    min_spikes: int = 5,
    seed_offset: int = 1_000_000,
) -> LabelAssignment:
    """Label each excitatory neuron with the class it responds to most."""
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_classes = int(labels.max()) + 1
    layer = topology.layers[0]
    if layer.vth2_offset is None:
        layer.vth2_offset = np.zeros(layer.size)
    plast = StdpPlasticity(topology.connections[0].w_exc, layer.vth2_offset,
                           StdpConfig(), enabled=False)
    sim = NetworkSimulator(topology)
    totals = np.zeros((n_classes, layer.size))
    counts = np.zeros(n_classes)
    for i, (x, y) in enumerate(zip(images, labels)):
        enc = EncodingConfig(
            max_rate_hz=encoding.max_rate_hz,
            duration_s=sim_cfg.duration_s,
            seed=encoding.seed + seed_offset + i,
            intensity_scale=encoding.intensity_scale,
        )
        out, _ = _encode_with_floor(x, enc, sim, sim_cfg, plast, min_spikes)
        totals[y] += out.spike_counts[0]
        counts[y] += 1
    mean = np.divide(totals, np.maximum(counts, 1)[:, None])
    return LabelAssignment(
        neuron_class=np.argmax(mean, axis=0),
        mean_response=mean,
    )


class StdpClassifier(ClassifierMixin, BaseEstimator):
    """Unsupervised WTA digit classifier with the estimator protocol.

    ``fit`` trains the input weights by STDP (labels are used only for the
    neuron-labeling pass); ``predict`` decodes the class whose labeled
    neurons respond most.
    """

    def __init__(
        self,
        n_exc: int = 100,
        inh_strength: float = 1.0,
        exc_to_inh: float = 5.0,
        eta_post: float = 0.01,
        x_tar: float = 0.5,
        tau_trace_s: float = 0.02,
        w_max: float = 1.0,
        theta_plus_v: float = 2e-3,
        tau_theta_s: float = 30.0,
        norm_target: float = 15.0,
        max_rate_hz: float = 100.0,
        duration_s: float = 0.25,
        dt_s: float = 2.5e-4,
        time_scale: float = 5.0,
        pulse_width_s: float = 1e-2,
        theta_jitter_v: float = 0.02,
        min_spikes: int = 5,
        label_samples: int = 1000,
        seed: int = 0,
    ):
        self.n_exc = n_exc
        self.inh_strength = inh_strength
        self.exc_to_inh = exc_to_inh
        self.eta_post = eta_post
        self.x_tar = x_tar
        self.tau_trace_s = tau_trace_s
        self.w_max = w_max
        self.theta_plus_v = theta_plus_v
        self.tau_theta_s = tau_theta_s
        self.norm_target = norm_target
        self.max_rate_hz = max_rate_hz
        self.duration_s = duration_s
        self.dt_s = dt_s
        self.time_scale = time_scale
        self.pulse_width_s = pulse_width_s
        self.theta_jitter_v = theta_jitter_v
        self.min_spikes = min_spikes
        self.label_samples = label_samples
        self.seed = seed

    def _stdp_config(self) -> StdpConfig:
        return StdpConfig(
            eta_post=self.eta_post, x_tar=self.x_tar, tau_trace_s=self.tau_trace_s,
            w_max=self.w_max, theta_plus_v=self.theta_plus_v,
            tau_theta_s=self.tau_theta_s, norm_target=self.norm_target,
        )

    def _sim_config(self) -> SimConfig:
        return SimConfig(dt_s=self.dt_s, duration_s=self.duration_s)

    def _encoding(self) -> EncodingConfig:
        return EncodingConfig(max_rate_hz=self.max_rate_hz,
                              duration_s=self.duration_s, seed=self.seed)

    def fit(self, X, y, progress=None):
        X, y = check_X_y(X, y)
        rng = np.random.default_rng(self.seed)
        n_in = X.shape[1]
        init = rng.uniform(0.2, 0.8, size=(self.n_exc, n_in))
        # slowed membranes integrate over many input pulses so competition
        # acts on smoothed drives; inhibitory partners recover twice as fast
        # as the excitatory cells, which keeps the lockout gap-free
        self.topology_ = build_wta(
            n_in, self.n_exc, init, self.inh_strength,
            params=scale_time(presets.preset("rate"), self.time_scale),
            inh_params=scale_time(presets.preset("fast"), self.time_scale / 2.0),
            exc_to_inh=self.exc_to_inh,
            pulse_width_s=self.pulse_width_s,
        )
        # frozen per-neuron threshold jitter breaks firing-step ties that
        # would otherwise lock neurons into identical weight trajectories
        self.theta_floor_ = rng.uniform(0.0, self.theta_jitter_v, self.n_exc)
        self.topology_.layers[0].vth2_offset = self.theta_floor_.copy()
        n_label = min(self.label_samples, len(X))
        self.labels_ = train_stdp(
            self.topology_, X, y, self._stdp_config(), self._encoding(),
            self._sim_config(),
            label_images=X[:n_label], label_labels=y[:n_label],
            min_spikes=self.min_spikes, theta_floor=self.theta_floor_,
            progress=progress,
        )
        self.classes_ = np.unique(y)
        return self

    def predict_counts(self, X) -> np.ndarray:
        sim = NetworkSimulator(self.topology_)
        plast = StdpPlasticity(
            self.topology_.connections[0].w_exc,
            self.topology_.layers[0].vth2_offset,
            self._stdp_config(), enabled=False,
        )
        cfg = self._sim_config()
        counts = np.zeros((len(X), self.n_exc), dtype=int)
        for i, x in enumerate(np.asarray(X, dtype=float)):
            enc = EncodingConfig(
                max_rate_hz=self.max_rate_hz, duration_s=self.duration_s,
                seed=self.seed + 2_000_000 + i,
            )
            out, _ = _encode_with_floor(x, enc, sim, cfg, plast, self.min_spikes)
            counts[i] = out.spike_counts[0]
        return counts

    def predict(self, X) -> np.ndarray:
        counts = self.predict_counts(X)
        return np.array([
            rate_decode(c, self.labels_.neuron_class) for c in counts
        ])
