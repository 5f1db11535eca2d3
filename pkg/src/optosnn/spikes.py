"""Spike-train construction and decoding.

Covers the grouped test patterns used by the single-neuron experiments,
co-timed inhibitory patterns that cancel selected threshold events,
Poisson rate encoding of images, and spike-count rate decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import presets
from .neuron import OptoNeuronParams, simulate_neuron

__all__ = [
    "SpikeTrain",
    "GroupPattern",
    "EncodingConfig",
    "build_group_pattern",
    "build_suppression_pattern",
    "count_spikes_per_group",
    "poisson_encode",
    "rate_decode",
]


@dataclass(frozen=True)
class SpikeTrain:
    """Timestamped spike events on one channel; times strictly increasing."""

    times: np.ndarray
    channel_id: int = 0

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1:
            raise ValueError("spike times must be a 1-D sequence")
        if len(t) and t[0] < 0:
            raise ValueError("spike times must be >= 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("spike times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class GroupPattern:
    """Groups of evenly spaced spikes separated by a guard gap.

    Spikes inside a group arrive at ``intra_group_rate``; the next group
    starts ``guard_time`` after the previous group's last spike onset.
    """

    group_sizes: tuple[int, ...] = presets.DEMO_GROUP_SIZES
    intra_group_rate: float = presets.DEMO_RATE_HZ
    guard_time: float = presets.DEMO_GUARD_S
    spike_width: float = presets.DEMO_PULSE_WIDTH_S

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.group_sizes)
        object.__setattr__(self, "group_sizes", sizes)
        if not sizes or any(n <= 0 for n in sizes):
            raise ValueError(f"group sizes must be positive, got {sizes}")
        if not self.intra_group_rate > 0:
            raise ValueError("intra_group_rate must be > 0")
        if not self.guard_time > 1.0 / self.intra_group_rate:
            raise ValueError(
                "guard_time must exceed the intra-group spike interval "
                f"({1.0 / self.intra_group_rate:g} s)"
            )

    def group_starts(self) -> np.ndarray:
        """Onset time of each group's first spike."""
        starts = []
        t0 = 0.0
        for n in self.group_sizes:
            starts.append(t0)
            t0 += (n - 1) / self.intra_group_rate + self.guard_time
        return np.asarray(starts)

    @property
    def total_duration(self) -> float:
        """Time of the last spike onset plus one guard gap."""
        last = self.group_starts()[-1] + (self.group_sizes[-1] - 1) / self.intra_group_rate
        return last + self.guard_time

    def group_index(self, t: float) -> int:
        """Group whose window [start, next start) contains time t."""
        starts = self.group_starts()
        return int(np.searchsorted(starts, t, side="right") - 1)


def build_group_pattern(gp: GroupPattern) -> SpikeTrain:
    """Spike train realizing the grouped pattern; count equals sum of sizes."""
    times = []
    for start, n in zip(gp.group_starts(), gp.group_sizes):
        times.extend(start + np.arange(n) / gp.intra_group_rate)
    return SpikeTrain(times=np.asarray(times))


def count_spikes_per_group(spike_times, gp: GroupPattern) -> list[int]:
    """Bin event times into the pattern's group windows.

    Window g spans [start_g, start_{g+1}); the last window is open-ended.
    """
    t = np.asarray(getattr(spike_times, "times", spike_times), dtype=float)
    starts = gp.group_starts()
    edges = np.append(starts[1:], np.inf)
    return [int(np.sum((t >= s) & (t < e))) for s, e in zip(starts, edges)]


def build_suppression_pattern(
    base: GroupPattern,
    suppress_events=(3, 5),
    params: OptoNeuronParams | None = None,
    spike_current_amplitude: float = presets.DEMO_SPIKE_CURRENT_A,
    dt: float = presets.DEMO_DT_S,
) -> SpikeTrain:
    """Inhibitory train that cancels selected threshold-crossing events.

    The excitatory pattern is first simulated alone (default: the "regular"
    preset) to locate its output events, numbered from 1. For each
    suppressed event, inhibitory spikes are co-timed with the excitatory
    spikes that feed it: the spikes after the previous event, restricted to
    the group in which the event occurs. Rendered at the same amplitude as
    the excitatory pulses, each pair cancels in the balanced detector, so
    the membrane never accumulates toward the suppressed event.
    """
    if params is None:
        params = presets.preset("regular")
    exc = build_group_pattern(base)
    trace = simulate_neuron(
        exc, None, params, dt, base.total_duration,
        spike_current_amplitude, base.spike_width,
    )
    events = trace.output_spikes
    targets = sorted(set(int(k) for k in suppress_events))
    if targets and (targets[0] < 1 or targets[-1] > len(events)):
        raise ValueError(
            f"event indices must be in 1..{len(events)}, got {targets}"
        )
    inhibit: list[float] = []
    starts = base.group_starts()
    edges = np.append(starts[1:], np.inf)
    for k in targets:
        t_event = events[k - 1]
        t_prev = events[k - 2] if k >= 2 else -np.inf
        g = base.group_index(t_event)
        in_window = (exc.times > t_prev) & (exc.times <= t_event)
        in_group = (exc.times >= starts[g]) & (exc.times < edges[g])
        inhibit.extend(exc.times[in_window & in_group])
    return SpikeTrain(times=np.unique(np.asarray(inhibit)))


@dataclass(frozen=True)
class EncodingConfig:
    """Poisson rate-encoding settings: pixel intensity -> firing rate."""

    max_rate_hz: float = 500.0
    duration_s: float = 0.2
    seed: int = 0
    intensity_scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.max_rate_hz > 0:
            raise ValueError("max_rate_hz must be > 0")
        if not self.duration_s > 0:
            raise ValueError("duration_s must be > 0")


def poisson_encode(image, cfg: EncodingConfig) -> list[SpikeTrain]:
    """Per-pixel homogeneous Poisson trains with rate = intensity * max_rate.

    Deterministic for a given (image, cfg): each channel's event count and
    times come from a single PCG64 stream seeded with cfg.seed, consumed in
    channel order.
    """
    pixels = np.asarray(image, dtype=float).ravel()
    if pixels.size and (pixels.min() < 0 or pixels.max() > 1):
        raise ValueError("pixel intensities must lie in [0, 1]")
    rates = np.clip(pixels * cfg.intensity_scale, 0.0, None) * cfg.max_rate_hz
    rng = np.random.default_rng(cfg.seed)
    counts = rng.poisson(rates * cfg.duration_s)
    trains = []
    for ch, n in enumerate(counts):
        if n:
            t = np.unique(rng.uniform(0.0, cfg.duration_s, size=int(n)))
        else:
            t = np.empty(0)
        trains.append(SpikeTrain(times=t, channel_id=ch))
    return trains


def rate_decode(counts, labels) -> int:
    """Class whose labeled channels have the highest mean spike count.

    ``labels`` maps channel index -> class index (array-like). Ties break
    toward the lowest class index so benchmarking stays deterministic.
    """
    counts = np.asarray(counts, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise ValueError("label map is empty")
    if counts.shape[0] != labels.shape[0]:
        raise ValueError(
            f"counts ({counts.shape[0]}) and labels ({labels.shape[0]}) disagree"
        )
    if np.any(counts < 0):
        raise ValueError("spike counts must be nonnegative")
    classes = np.unique(labels)
    means = np.array([counts[labels == c].mean() for c in classes])
    return int(classes[int(np.argmax(means))])
