"""Reference Izhikevich neuron model (quadratic membrane + linear recovery).

Uses the conventional units of the model: membrane potential in mV,
time in ms, so the classic coefficients (0.04, 5, 140) apply as-is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "IzhikevichParams",
    "IzhikevichState",
    "izhikevich_derivatives",
    "izhikevich_step",
    "simulate_izhikevich",
]


@dataclass(frozen=True)
class IzhikevichParams:
    """Constants of the two-variable quadratic spiking model.

    a: recovery time scale (1/ms), b: recovery coupling (dimensionless),
    c: reset potential (mV), d: recovery increment on spike (mV),
    v_threshold: firing threshold (mV).
    """

    a: float = 0.02
    b: float = 0.2
    c: float = -65.0
    d: float = 8.0
    v_threshold: float = 30.0

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.v_threshold > self.c:
            raise ValueError(
                f"v_threshold ({self.v_threshold}) must exceed reset c ({self.c})"
            )


@dataclass
class IzhikevichState:
    """Membrane potential v (mV) and recovery variable u (mV)."""

    v: float = -65.0
    u: float = -13.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.u)):
            raise ValueError(f"state must be finite, got v={self.v}, u={self.u}")


def izhikevich_derivatives(
    state: IzhikevichState, i: float, params: IzhikevichParams
) -> tuple[float, float]:
    """Right-hand sides dv/dt, du/dt (mV/ms) of the quadratic model."""
    v, u = state.v, state.u
    dv_dt = 0.04 * v * v + 5.0 * v + 140.0 - u + i
    du_dt = params.a * (params.b * v - u)
    return dv_dt, du_dt


def izhikevich_step(
    state: IzhikevichState, i: float, dt: float, params: IzhikevichParams
) -> tuple[IzhikevichState, bool]:
    """Forward-Euler update over dt (ms) with the hard reset rule.

    After the update, v >= v_threshold triggers a spike: v is set to c
    exactly and u incremented by d exactly. Returns (new state, fired).
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if not (math.isfinite(state.v) and math.isfinite(state.u)):
        raise ValueError("non-finite state")
    dv_dt, du_dt = izhikevich_derivatives(state, i, params)
    v = state.v + dt * dv_dt
    u = state.u + dt * du_dt
    if v >= params.v_threshold:
        return IzhikevichState(v=params.c, u=u + params.d), True
    return IzhikevichState(v=v, u=u), False


def simulate_izhikevich(
    i: float,
    duration_ms: float,
    dt_ms: float,
    params: IzhikevichParams,
    state: IzhikevichState | None = None,
) -> tuple[list[float], list[float], list[float]]:
    """Run the model under constant input current.

    Returns (v_series, u_series, spike_times_ms); series start with the
    initial state and have one extra sample per step.
    """
    if dt_ms <= 0:
        raise ValueError(f"dt must be > 0, got {dt_ms}")
    s = state if state is not None else IzhikevichState()
    n_steps = int(round(duration_ms / dt_ms))
    v_series = [s.v]
    u_series = [s.u]
    spikes: list[float] = []
    for k in range(n_steps):
        s, fired = izhikevich_step(s, i, dt_ms, params)
        v_series.append(s.v)
        u_series.append(s.u)
        if fired:
            spikes.append((k + 1) * dt_ms)
    return v_series, u_series, spikes
