"""Committed neuron parameter sets for the four qualitative spiking regimes.

The component values below are calibrated fixtures, not measured hardware:
each was produced by a search over the parameter space (see
``optosnn.calibration``) against the regime definitions, then frozen here.
All four are tuned for the millisecond-scale testbed convention: input
spikes rendered as 0.5 ms, 220 uA rectangular photocurrent pulses arriving
at up to 1 kHz.

regular  three consecutive inputs charge to threshold; under the standard
         14/5/3/1 four-group pattern it fires 3/1/1/0 times per group.
fast     lower laser/refractory thresholds, short recovery: strictly more
         output spikes than ``regular`` under the same pattern.
low      weaker photocurrent-to-voltage coupling (smaller r1): strictly
         fewer output spikes than ``regular``.
burst    low laser turn-on with a high refractory threshold: under a
         sustained 1 kHz train it emits clusters of >= 2 output spikes
         separated by long recovery gaps.
rate     monotone firing-rate response to drive current (fast, drive-
         independent reset), used as the activation for rate-coded
         network inference such as ANN-converted topologies.
"""

from __future__ import annotations

from .neuron import OptoNeuronParams

__all__ = [
    "preset",
    "preset_names",
    "DEMO_GROUP_SIZES",
    "DEMO_RATE_HZ",
    "DEMO_GUARD_S",
    "DEMO_PULSE_WIDTH_S",
    "DEMO_SPIKE_CURRENT_A",
    "DEMO_DT_S",
    "BURST_DRIVE_CURRENT_A",
]

# Shared demo-input convention (grouped test pattern at testbed time scale).
DEMO_GROUP_SIZES = (14, 5, 3, 1)
DEMO_RATE_HZ = 1000.0
DEMO_GUARD_S = 0.030
DEMO_PULSE_WIDTH_S = 5e-4
DEMO_SPIKE_CURRENT_A = 2.2e-4
DEMO_DT_S = 1e-5

# Reference drive for the burst regime: sustained train at DEMO_RATE_HZ.
BURST_DRIVE_CURRENT_A = 1.7e-4

_PRESETS: dict[str, OptoNeuronParams] = {
    "regular": OptoNeuronParams(
        r1=1.0e4, c1=3.0e-7, r2=1.0e4, c2=7.0e-7,
        k1=5.0, k2=0.04, k3=0.05,
        vth1=0.02, vth2=0.50, vth3=0.60, vd=1.0,
    ),
    "fast": OptoNeuronParams(
        r1=1.0e4, c1=3.0e-7, r2=1.0e4, c2=2.0e-7,
        k1=5.0, k2=0.04, k3=0.30,
        vth1=0.02, vth2=0.40, vth3=0.55, vd=1.0,
    ),
    "low": OptoNeuronParams(
        r1=7.0e3, c1=4.2857e-7, r2=1.0e4, c2=7.0e-7,
        k1=5.0, k2=0.04, k3=0.05,
        vth1=0.02, vth2=0.50, vth3=0.60, vd=1.0,
    ),
    "burst": OptoNeuronParams(
        r1=1.0e4, c1=2.0e-7, r2=1.0e4, c2=5.0e-7,
        k1=5.0, k2=0.04, k3=0.30,
        vth1=0.02, vth2=0.30, vth3=0.75, vd=1.0,
    ),
    "rate": OptoNeuronParams(
        r1=1.0e4, c1=3.0e-7, r2=1.0e4, c2=1.0e-7,
        k1=200.0, k2=0.04, k3=50.0,
        vth1=0.10, vth2=0.50, vth3=0.75, vd=1.0,
    ),
}


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def preset(name: str) -> OptoNeuronParams:
    """Return the committed parameter set for a named spiking regime."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(_PRESETS)}"
        ) from None
