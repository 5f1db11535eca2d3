"""Behavioral model of the optoelectronic spiking neuron.

Two coupled RC stages drive an output laser:

  membrane    r1*c1 * dv/dt = r1*(i_exc - i_inh) - r1*k1*max(0, u - vth1)^2 - v
  refractory  r2*c2 * du/dt = r2*k3*max(0, v - vth3 - u)^2 - u
  laser       i_vcsel        = k2*max(0, v - vth2)^2

Excitatory photocurrent charges the membrane stage; once the membrane
potential climbs past the laser turn-on voltage the output fires, which in
turn charges the refractory stage, whose voltage gates a drain transistor
that resets the membrane. Both state variables are clamped to [0, vd]
after every integration step (supply rails of the physical circuit).

All quantities are SI: volts, amperes, ohms, farads, seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "OptoNeuronParams",
    "OptoNeuronState",
    "DriveInput",
    "NeuronTrace",
    "opto_derivatives",
    "vcsel_current",
    "opto_step",
    "simulate_neuron",
    "scale_time",
    "detection_current",
    "step_index",
    "render_pulse_train",
    "STABILITY_DIVISOR",
    "DEFAULT_DETECT_FRACTION",
]

# Euler stability guard: dt must not exceed min(r1*c1, r2*c2) / STABILITY_DIVISOR.
STABILITY_DIVISOR = 20.0

# Output spikes are detected when i_vcsel rises above this fraction of the
# laser current at full supply rail (v = vd).
DEFAULT_DETECT_FRACTION = 0.1


@dataclass(frozen=True)
class OptoNeuronParams:
    """Component values of one optoelectronic neuron.

    r1/c1 form the membrane RC stage, r2/c2 the refractory RC stage.
    k1, k2, k3 are transconductance gains (A/V^2) of the drain, laser
    and refractory transistors; vth1/vth2/vth3 their gate thresholds.
    vd is the supply rail, which also clips both state variables.
    """

    r1: float
    c1: float
    r2: float
    c2: float
    k1: float
    k2: float
    k3: float
    vth1: float
    vth2: float
    vth3: float
    vd: float

    def __post_init__(self) -> None:
        for name in ("r1", "c1", "r2", "c2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("k1", "k2", "k3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("vth1", "vth2", "vth3"):
            th = getattr(self, name)
            if not 0 < th < self.vd:
                raise ValueError(
                    f"{name} must lie strictly between 0 and vd={self.vd}, got {th}"
                )

    @property
    def tau_membrane(self) -> float:
        return self.r1 * self.c1

    @property
    def tau_refractory(self) -> float:
        return self.r2 * self.c2

    @property
    def max_stable_dt(self) -> float:
        return min(self.tau_membrane, self.tau_refractory) / STABILITY_DIVISOR


@dataclass
class OptoNeuronState:
    """Membrane potential v and refractory potential u, both in [0, vd]."""

    v: float = 0.0
    u: float = 0.0


@dataclass(frozen=True)
class DriveInput:
    """Photocurrents from the excitatory and inhibitory detectors.

    Both are magnitudes (>= 0); the membrane equation applies the signs.
    """

    i_exc: float = 0.0
    i_inh: float = 0.0

    def __post_init__(self) -> None:
        if self.i_exc < 0 or self.i_inh < 0:
            raise ValueError(
                f"photocurrents must be >= 0, got i_exc={self.i_exc}, i_inh={self.i_inh}"
            )


def detection_current(
    params: OptoNeuronParams, fraction: float = DEFAULT_DETECT_FRACTION
) -> float:
    """Laser current level that counts as an output spike (rising edge)."""
    return fraction * params.k2 * (params.vd - params.vth2) ** 2


def _relu_sq(x):
    """max(0, x)^2, elementwise."""
    r = np.maximum(x, 0.0)
    return r * r


def opto_derivatives(
    state: OptoNeuronState, drive: DriveInput, params: OptoNeuronParams
) -> tuple[float, float]:
    """Instantaneous dv/dt and du/dt (V/s) of the two RC stages."""
    p = params
    dv_dt = (
        p.r1 * (drive.i_exc - drive.i_inh)
        - p.r1 * p.k1 * max(0.0, state.u - p.vth1) ** 2
        - state.v
    ) / (p.r1 * p.c1)
    du_dt = (
        p.r2 * p.k3 * max(0.0, state.v - p.vth3 - state.u) ** 2 - state.u
    ) / (p.r2 * p.c2)
    return dv_dt, du_dt


def vcsel_current(v: float, params: OptoNeuronParams):
    """Laser drive current for membrane potential v."""
    return params.k2 * _relu_sq(v - params.vth2)


def _derivs_arrays(v, u, i_exc, i_inh, p: OptoNeuronParams):
    """Vectorized right-hand sides of the two RC stages."""
    dv = (
        p.r1 * (i_exc - i_inh) - p.r1 * p.k1 * _relu_sq(u - p.vth1) - v
    ) / (p.r1 * p.c1)
    du = (p.r2 * p.k3 * _relu_sq(v - p.vth3 - u) - u) / (p.r2 * p.c2)
    return dv, du


def step_arrays(
    v,
    u,
    i_exc,
    i_inh,
    dt: float,
    params: OptoNeuronParams,
    method: str = "euler",
):
    """Advance state arrays one step; returns (v', u') clipped to [0, vd].

    Shared kernel for the scalar API, single-neuron simulation and network
    simulation, so all paths produce identical arithmetic.
    """
    p = params
    if method == "euler":
        dv, du = _derivs_arrays(v, u, i_exc, i_inh, p)
        v2 = v + dt * dv
        u2 = u + dt * du
    elif method == "rk4":
        k1v, k1u = _derivs_arrays(v, u, i_exc, i_inh, p)
        k2v, k2u = _derivs_arrays(v + 0.5 * dt * k1v, u + 0.5 * dt * k1u, i_exc, i_inh, p)
        k3v, k3u = _derivs_arrays(v + 0.5 * dt * k2v, u + 0.5 * dt * k2u, i_exc, i_inh, p)
        k4v, k4u = _derivs_arrays(v + dt * k3v, u + dt * k3u, i_exc, i_inh, p)
        v2 = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        u2 = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    else:
        raise ValueError(f"unknown integration method {method!r}")
    v2 = np.clip(v2, 0.0, p.vd)
    u2 = np.clip(u2, 0.0, p.vd)
    return v2, u2


def opto_step(
    state: OptoNeuronState,
    drive: DriveInput,
    dt: float,
    params: OptoNeuronParams,
    method: str = "euler",
) -> tuple[OptoNeuronState, float]:
    """One integration step; returns (new state, laser current after the step).

    dt must satisfy the stability guard dt <= min(r1*c1, r2*c2)/20.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if dt > params.max_stable_dt:
        raise ValueError(
            f"dt={dt:g} s exceeds the stability limit "
            f"{params.max_stable_dt:g} s (min RC / {STABILITY_DIVISOR:g})"
        )
    if not (math.isfinite(state.v) and math.isfinite(state.u)):
        raise ValueError("non-finite state")
    v2, u2 = step_arrays(
        np.float64(state.v),
        np.float64(state.u),
        np.float64(drive.i_exc),
        np.float64(drive.i_inh),
        dt,
        params,
        method=method,
    )
    new = OptoNeuronState(v=float(v2), u=float(u2))
    return new, float(vcsel_current(v2, params))


def scale_time(params: OptoNeuronParams, factor: float) -> OptoNeuronParams:
    """Stretch both RC time constants by `factor` (via the capacitors).

    Thresholds and gains are untouched, so dilating inputs and dt by the
    same factor reproduces the original trajectory sample for sample.
    """
    if not factor > 0:
        raise ValueError(f"factor must be > 0, got {factor}")
    return replace(params, c1=params.c1 * factor, c2=params.c2 * factor)


def step_index(t: float, dt: float) -> int:
    """First step index n with n*dt >= t, snapping near-integer quotients.

    The snap tolerance absorbs float noise so that time-dilated inputs land
    on the same grid indices as the originals.
    """
    q = t / dt
    r = round(q)
    if abs(q - r) <= 1e-9 * max(1.0, abs(q)):
        return int(r)
    return int(math.ceil(q))


def render_pulse_train(
    times, n_steps: int, dt: float, width: float, amplitude: float
) -> np.ndarray:
    """Rectangular-pulse current waveform sampled at the step grid.

    Each event time t contributes `amplitude` for grid points n*dt in
    [t, t + width); overlapping pulses sum. Returns an array of length
    n_steps + 1 (sample k = current at time k*dt).
    """
    delta = np.zeros(n_steps + 2)
    for t in times:
        s0 = step_index(t, dt)
        s1 = step_index(t + width, dt)
        if s0 > n_steps or s1 <= 0 or s1 <= s0:
            continue
        delta[max(s0, 0)] += amplitude
        delta[min(s1, n_steps + 1)] -= amplitude
    return np.cumsum(delta[: n_steps + 1])


@dataclass
class NeuronTrace:
    """Recorded single-neuron run: series sampled at k*dt, k = 0..n_steps."""

    dt: float
    v_series: np.ndarray
    u_series: np.ndarray
    i_vcsel_series: np.ndarray
    output_spikes: np.ndarray  # rising-edge times of the laser current

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.v_series)) * self.dt

    def __post_init__(self) -> None:
        n = len(self.v_series)
        if len(self.u_series) != n or len(self.i_vcsel_series) != n:
            raise ValueError("trace series must have equal lengths")
        if np.any(np.diff(self.output_spikes) <= 0):
            raise ValueError("output spike times must be strictly increasing")


def simulate_neuron(
    exc,
    inh,
    params: OptoNeuronParams,
    dt: float,
    duration: float,
    spike_current_amplitude: float,
    pulse_width: float,
    inh_current_amplitude: float | None = None,
    detect_fraction: float = DEFAULT_DETECT_FRACTION,
    method: str = "euler",
) -> NeuronTrace:
    """Simulate one neuron fed by excitatory/inhibitory spike trains.

    `exc` and `inh` are sequences of spike times (or objects with a
    `.times` attribute); each spike is rendered as a rectangular
    photocurrent pulse of the given width and amplitude. The inhibitory
    amplitude defaults to the excitatory one (balanced detector pair).

    Output spikes are the rising-edge crossings of the laser current
    above ``detect_fraction`` of its value at full rail.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if dt > params.max_stable_dt:
        raise ValueError(
            f"dt={dt:g} s exceeds the stability limit {params.max_stable_dt:g} s"
        )
    exc_times = getattr(exc, "times", exc)
    inh_times = getattr(inh, "times", inh) if inh is not None else []
    if inh_current_amplitude is None:
        inh_current_amplitude = spike_current_amplitude

    n_steps = int(round(duration / dt))
    i_exc = render_pulse_train(exc_times, n_steps, dt, pulse_width, spike_current_amplitude)
    i_inh = render_pulse_train(inh_times, n_steps, dt, pulse_width, inh_current_amplitude)

    v = np.zeros(n_steps + 1)
    u = np.zeros(n_steps + 1)
    i_out = np.zeros(n_steps + 1)
    detect = detection_current(params, detect_fraction)
    spikes = []
    vk = np.float64(0.0)
    uk = np.float64(0.0)
    prev_out = 0.0
    for k in range(n_steps):
        vk, uk = step_arrays(vk, uk, i_exc[k], i_inh[k], dt, params, method=method)
        out = float(vcsel_current(vk, params))
        v[k + 1] = vk
        u[k + 1] = uk
        i_out[k + 1] = out
        if out >= detect and prev_out < detect:
            spikes.append((k + 1) * dt)
        prev_out = out
    return NeuronTrace(
        dt=dt,
        v_series=v,
        u_series=u,
        i_vcsel_series=i_out,
        output_spikes=np.asarray(spikes, dtype=float),
    )
