"""Clock-driven simulation of layered optoelectronic neuron populations.

Weights are split into nonnegative excitatory and inhibitory matrices
(post x pre). Presynaptic spikes are rendered as rectangular current
pulses; a neuron's drive at each step is the weighted sum of the pulse
levels currently active on its inputs. Two wiring schemes are supported:
plain feedforward (signed weights split across both matrices) and a
winner-takes-all hidden layer where each excitatory neuron drives its own
inhibitory partner, which in turn suppresses all other excitatory neurons.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .neuron import (
    OptoNeuronParams,
    detection_current,
    step_arrays,
    step_index,
    vcsel_current,
)

__all__ = [
    "LayerSpec",
    "Connection",
    "WtaLinks",
    "Topology",
    "SimConfig",
    "NetworkRun",
    "NetworkSimulator",
    "build_feedforward",
    "build_wta",
    "run",
]


@dataclass
class LayerSpec:
    """One simulated population sharing a parameter set.

    vth2_offset holds optional per-neuron additive offsets on the laser
    threshold (used by adaptive-threshold training).
    """

    size: int
    params: OptoNeuronParams
    vth2_offset: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError(f"layer size must be > 0, got {self.size}")
        if self.vth2_offset is not None:
            off = np.asarray(self.vth2_offset, dtype=float)
            if off.shape != (self.size,):
                raise ValueError("vth2_offset must have one entry per neuron")
            self.vth2_offset = off


@dataclass
class Connection:
    """Nonnegative excitatory/inhibitory weight matrices, shape (post, pre)."""

    w_exc: np.ndarray
    w_inh: np.ndarray

    def __post_init__(self) -> None:
        self.w_exc = np.asarray(self.w_exc, dtype=float)
        self.w_inh = np.asarray(self.w_inh, dtype=float)
        if self.w_exc.shape != self.w_inh.shape or self.w_exc.ndim != 2:
            raise ValueError("w_exc and w_inh must be 2-D with equal shapes")
        if np.any(self.w_exc < 0) or np.any(self.w_inh < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def signed(self) -> np.ndarray:
        return self.w_exc - self.w_inh


@dataclass
class WtaLinks:
    """One-to-one excitatory->inhibitory pairing with all-but-self fan-back."""

    inh_params: OptoNeuronParams
    exc_to_inh: float
    inh_to_exc: float

    def __post_init__(self) -> None:
        if self.exc_to_inh < 0 or self.inh_to_exc < 0:
            raise ValueError("WTA link strengths must be nonnegative")

    def exc_to_inh_matrix(self, n: int) -> np.ndarray:
        return self.exc_to_inh * np.eye(n)

    def inh_to_exc_matrix(self, n: int) -> np.ndarray:
        return self.inh_to_exc * (np.ones((n, n)) - np.eye(n))


@dataclass
class Topology:
    """Layered network: input channels feeding simulated populations.

    connections[i] maps the previous stage (the input channels for i = 0)
    onto layers[i]. bias_exc/bias_inh are optional constant drive currents
    per layer. In WTA mode exactly one layer is allowed and the paired
    inhibitory population is implied with the same size.
    """

    input_size: int
    layers: list[LayerSpec]
    connections: list[Connection]
    wta: WtaLinks | None = None
    bias_exc: list[np.ndarray | None] = field(default_factory=list)
    bias_inh: list[np.ndarray | None] = field(default_factory=list)
    pulse_width_s: float = presets.DEMO_PULSE_WIDTH_S
    pulse_amplitude_a: float = presets.DEMO_SPIKE_CURRENT_A

    def __post_init__(self) -> None:
        if self.input_size <= 0:
            raise ValueError("input_size must be > 0")
        if len(self.connections) != len(self.layers):
            raise ValueError("need exactly one connection per layer")
        sizes = [self.input_size] + [l.size for l in self.layers]
        for i, conn in enumerate(self.connections):
            want = (sizes[i + 1], sizes[i])
            if conn.w_exc.shape != want:
                raise ValueError(
                    f"connection {i} has shape {conn.w_exc.shape}, expected {want}"
                )
        if self.wta is not None and len(self.layers) != 1:
            raise ValueError("WTA mode supports exactly one excitatory layer")
        if not self.bias_exc:
            self.bias_exc = [None] * len(self.layers)
        if not self.bias_inh:
            self.bias_inh = [None] * len(self.layers)
        if len(self.bias_exc) != len(self.layers) or len(self.bias_inh) != len(self.layers):
            raise ValueError("bias lists must have one entry per layer")

    @property
    def layer_sizes(self) -> list[int]:
        return [l.size for l in self.layers]


@dataclass(frozen=True)
class SimConfig:
    """Clock-driven run settings."""

    dt_s: float = presets.DEMO_DT_S
    duration_s: float = 0.1
    seed: int = 0
    record_traces: bool = False

    def __post_init__(self) -> None:
        if not self.dt_s > 0:
            raise ValueError("dt must be > 0")
        if self.duration_s < self.dt_s:
            raise ValueError("duration must cover at least one step")


@dataclass
class NetworkRun:
    """Result of one simulation: per-population spike rasters and counts."""

    dt: float
    n_steps: int
    population_names: list[str]
    rasters: list[list[np.ndarray]]  # [population][neuron] -> spike times
    spike_counts: list[np.ndarray]
    traces: list[dict[str, np.ndarray]] | None
    wall_clock_s: float

    def raster_events(self, population: int = 0) -> np.ndarray:
        """(channel, time) pairs sorted by time then channel."""
        rows = [
            (ch, t)
            for ch, times in enumerate(self.rasters[population])
            for t in times
        ]
        rows.sort(key=lambda r: (r[1], r[0]))
        return np.asarray(rows, dtype=float).reshape(-1, 2)


def build_feedforward(
    sizes,
    signed_weights,
    params: OptoNeuronParams | None = None,
    biases=None,
    pulse_width_s: float = presets.DEMO_PULSE_WIDTH_S,
    pulse_amplitude_a: float = presets.DEMO_SPIKE_CURRENT_A,
    bias_drive_scale: float = 0.0,
) -> Topology:
    """Feedforward topology from signed weight matrices.

    Positive entries land in w_exc, magnitudes of negative entries in
    w_inh, so w_exc - w_inh reconstructs the signed matrix exactly.
    Optional per-layer biases become constant drive currents scaled by
    ``bias_drive_scale`` (amps per unit bias).
    """
    if params is None:
        params = presets.preset("regular")
    sizes = [int(s) for s in sizes]
    if len(signed_weights) != len(sizes) - 1:
        raise ValueError("need one weight matrix per adjacent layer pair")
    conns = []
    for i, w in enumerate(signed_weights):
        w = np.asarray(w, dtype=float)
        if w.shape != (sizes[i + 1], sizes[i]):
            raise ValueError(
                f"weight matrix {i} has shape {w.shape}, expected {(sizes[i + 1], sizes[i])}"
            )
        conns.append(Connection(w_exc=np.maximum(w, 0.0), w_inh=np.maximum(-w, 0.0)))
    layers = [LayerSpec(size=s, params=params) for s in sizes[1:]]
    bias_exc: list[np.ndarray | None] = [None] * len(layers)
    bias_inh: list[np.ndarray | None] = [None] * len(layers)
    if biases is not None:
        for i, b in enumerate(biases):
            if b is None:
                continue
            b = np.asarray(b, dtype=float) * bias_drive_scale
            bias_exc[i] = np.maximum(b, 0.0)
            bias_inh[i] = np.maximum(-b, 0.0)
    return Topology(
        input_size=sizes[0],
        layers=layers,
        connections=conns,
        bias_exc=bias_exc,
        bias_inh=bias_inh,
        pulse_width_s=pulse_width_s,
        pulse_amplitude_a=pulse_amplitude_a,
    )


def build_wta(
    n_input: int,
    n_exc: int,
    input_weights,
    inh_strength: float,
    params: OptoNeuronParams | None = None,
    inh_params: OptoNeuronParams | None = None,
    exc_to_inh: float = 1.0,
    pulse_width_s: float = presets.DEMO_PULSE_WIDTH_S,
    pulse_amplitude_a: float = presets.DEMO_SPIKE_CURRENT_A,
) -> Topology:
    """Winner-takes-all topology: dense input->exc, paired exc<->inh links.

    Each excitatory neuron i drives only inhibitory neuron i, which feeds
    back with uniform ``inh_strength`` onto every other excitatory neuron.
    """
    if n_exc < 2:
        raise ValueError("WTA needs at least 2 excitatory neurons")
    if inh_strength < 0:
        raise ValueError("inh_strength must be nonnegative")
    if params is None:
        params = presets.preset("regular")
    if inh_params is None:
        inh_params = params
    w = np.asarray(input_weights, dtype=float)
    if w.shape != (n_exc, n_input):
        raise ValueError(f"input_weights must be ({n_exc}, {n_input}), got {w.shape}")
    if np.any(w < 0):
        raise ValueError("WTA input weights must be nonnegative")
    return Topology(
        input_size=n_input,
        layers=[LayerSpec(size=n_exc, params=params)],
        connections=[Connection(w_exc=w, w_inh=np.zeros_like(w))],
        wta=WtaLinks(inh_params=inh_params, exc_to_inh=exc_to_inh, inh_to_exc=inh_strength),
        pulse_width_s=pulse_width_s,
        pulse_amplitude_a=pulse_amplitude_a,
    )


def _input_events(trains, n_steps: int, dt: float, width: float):
    """Per-step +/- channel events for rectangular input pulses."""
    starts: list[list[int]] = [[] for _ in range(n_steps + 1)]
    stops: list[list[int]] = [[] for _ in range(n_steps + 1)]
    for ch, train in enumerate(trains):
        times = getattr(train, "times", train)
        for t in times:
            s0 = step_index(t, dt)
            s1 = step_index(t + width, dt)
            if s0 > n_steps or s1 <= 0 or s1 <= s0:
                continue
            starts[max(s0, 0)].append(ch)
            if s1 <= n_steps:
                stops[s1].append(ch)
    return starts, stops


class NetworkSimulator:
    """Stateful stepping context over an immutable wiring.

    Weight arrays are referenced, not copied, so training rules may adjust
    them between (or during) runs. ``reset`` returns every neuron to the
    resting state (0, 0) and clears all active pulses.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self._n_pop = len(topology.layers) + (1 if topology.wta else 0)
        self.population_names = [f"layer{i}" for i in range(len(topology.layers))]
        if topology.wta:
            self.population_names.append("wta_inh")
        self.reset()

    def _pop_sizes(self) -> list[int]:
        sizes = list(self.topology.layer_sizes)
        if self.topology.wta:
            sizes.append(self.topology.layers[0].size)
        return sizes

    def _pop_params(self) -> list[OptoNeuronParams]:
        ps = [l.params for l in self.topology.layers]
        if self.topology.wta:
            ps.append(self.topology.wta.inh_params)
        return ps

    def reset(self) -> None:
        sizes = self._pop_sizes()
        self.v = [np.zeros(n) for n in sizes]
        self.u = [np.zeros(n) for n in sizes]
        self.pulse_level = [np.zeros(n) for n in sizes]
        self.input_level = np.zeros(self.topology.input_size)
        self._pulse_offs: list[list[tuple[int, np.ndarray]]] = [[] for _ in sizes]
        self._prev_out = [np.zeros(n) for n in sizes]

    def run(
        self,
        input_trains,
        cfg: SimConfig,
        plasticity=None,
        reset: bool = True,
    ) -> NetworkRun:
        topo = self.topology
        if len(input_trains) != topo.input_size:
            raise ValueError(
                f"got {len(input_trains)} input trains for {topo.input_size} channels"
            )
        for p in self._pop_params():
            if cfg.dt_s > p.max_stable_dt:
                raise ValueError(
                    f"dt={cfg.dt_s:g} s exceeds stability limit {p.max_stable_dt:g} s"
                )
        if reset:
            self.reset()
        t_start = time.perf_counter()
        dt = cfg.dt_s
        n_steps = int(round(cfg.duration_s / dt))
        width_steps = max(step_index(topo.pulse_width_s, dt), 1)
        amp = topo.pulse_amplitude_a
        starts, stops = _input_events(input_trains, n_steps, dt, topo.pulse_width_s)

        n_layers = len(topo.layers)
        wta = topo.wta
        params = self._pop_params()
        detect = [detection_current(p) for p in params]
        offsets = [l.vth2_offset for l in topo.layers] + ([None] if wta else [])

        spike_steps: list[list[list[int]]] = [
            [[] for _ in range(n)] for n in self._pop_sizes()
        ]
        traces = None
        if cfg.record_traces:
            traces = [
                {"v": np.zeros((n_steps + 1, n)), "u": np.zeros((n_steps + 1, n))}
                for n in self._pop_sizes()
            ]

        if plasticity is not None:
            plasticity.begin_run(self, cfg)

        for k in range(n_steps):
            if starts[k]:
                np.add.at(self.input_level, starts[k], amp)
                if plasticity is not None:
                    plasticity.on_input_spikes(starts[k])
            if stops[k]:
                np.add.at(self.input_level, stops[k], -amp)

            # drives from current pulse levels (synchronous update)
            drives = []
            for i in range(n_layers):
                pre = self.input_level if i == 0 else self.pulse_level[i - 1]
                conn = topo.connections[i]
                i_exc = conn.w_exc @ pre
                i_inh = conn.w_inh @ pre
                if topo.bias_exc[i] is not None:
                    i_exc = i_exc + topo.bias_exc[i]
                if topo.bias_inh[i] is not None:
                    i_inh = i_inh + topo.bias_inh[i]
                drives.append((i_exc, i_inh))
            if wta:
                lev_inh = self.pulse_level[1]
                i_exc0, i_inh0 = drives[0]
                i_inh0 = i_inh0 + wta.inh_to_exc * (lev_inh.sum() - lev_inh)
                drives[0] = (i_exc0, i_inh0)
                drives.append((wta.exc_to_inh * self.pulse_level[0], np.zeros(len(lev_inh))))

            for pi in range(self._n_pop):
                i_exc, i_inh = drives[pi]
                self.v[pi], self.u[pi] = step_arrays(
                    self.v[pi], self.u[pi], i_exc, i_inh, dt, params[pi]
                )
                veff = self.v[pi]
                if offsets[pi] is not None:
                    veff = veff - offsets[pi]
                out = vcsel_current(veff, params[pi])
                fired = np.flatnonzero((out >= detect[pi]) & (self._prev_out[pi] < detect[pi]))
                self._prev_out[pi] = out
                if traces is not None:
                    traces[pi]["v"][k + 1] = self.v[pi]
                    traces[pi]["u"][k + 1] = self.u[pi]
                if fired.size:
                    for idx in fired:
                        spike_steps[pi][idx].append(k + 1)
                    np.add.at(self.pulse_level[pi], fired, amp)
                    self._pulse_offs[pi].append((k + 1 + width_steps, fired))
                    if plasticity is not None:
                        plasticity.on_layer_spikes(pi, fired)

            # expire finished output pulses (active for steps [k+1, k+1+width))
            for pi in range(self._n_pop):
                keep = []
                for off_step, idx in self._pulse_offs[pi]:
                    if off_step == k + 1:
                        np.add.at(self.pulse_level[pi], idx, -amp)
                    else:
                        keep.append((off_step, idx))
                self._pulse_offs[pi] = keep

            if plasticity is not None:
                plasticity.on_step(dt)

        rasters = [
            [np.asarray(s, dtype=float) * dt for s in pop]
            for pop in spike_steps
        ]
        counts = [np.asarray([len(s) for s in pop]) for pop in spike_steps]
        return NetworkRun(
            dt=dt,
            n_steps=n_steps,
            population_names=list(self.population_names),
            rasters=rasters,
            spike_counts=counts,
            traces=traces,
            wall_clock_s=time.perf_counter() - t_start,
        )


def run(topology: Topology, input_trains, cfg: SimConfig) -> NetworkRun:
    """Simulate from rest; deterministic for identical inputs and config."""
    return NetworkSimulator(topology).run(input_trains, cfg)


def run_batched_counts(
    topology: Topology,
    batch_trains,
    cfg: SimConfig,
) -> list[np.ndarray]:
    """Spike counts for a batch of independent samples, shape (B, n) per layer.

    Inference-only fast path for plain feedforward topologies (no WTA, no
    plasticity): all samples advance in lockstep through one vectorized
    state update, which is exactly the per-sample simulation run in
    parallel. Samples are independent, so results do not depend on which
    batch a sample lands in beyond floating-point reduction order.
    """
    if topology.wta is not None:
        raise ValueError("batched inference supports feedforward topologies only")
    B = len(batch_trains)
    if B == 0:
        return [np.zeros((0, n), dtype=int) for n in topology.layer_sizes]
    for p in [l.params for l in topology.layers]:
        if cfg.dt_s > p.max_stable_dt:
            raise ValueError(
                f"dt={cfg.dt_s:g} s exceeds stability limit {p.max_stable_dt:g} s"
            )
    dt = cfg.dt_s
    n_steps = int(round(cfg.duration_s / dt))
    width_steps = max(step_index(topology.pulse_width_s, dt), 1)
    amp = topology.pulse_amplitude_a

    starts: list[list[tuple[int, int]]] = [[] for _ in range(n_steps + 1)]
    stops: list[list[tuple[int, int]]] = [[] for _ in range(n_steps + 1)]
    for b, trains in enumerate(batch_trains):
        if len(trains) != topology.input_size:
            raise ValueError("each sample needs one train per input channel")
        for ch, train in enumerate(trains):
            for t in getattr(train, "times", train):
                s0 = step_index(t, dt)
                s1 = step_index(t + topology.pulse_width_s, dt)
                if s0 > n_steps or s1 <= 0 or s1 <= s0:
                    continue
                starts[max(s0, 0)].append((b, ch))
                if s1 <= n_steps:
                    stops[s1].append((b, ch))

    n_layers = len(topology.layers)
    params = [l.params for l in topology.layers]
    detect = [detection_current(p) for p in params]
    offsets = [l.vth2_offset for l in topology.layers]
    sizes = topology.layer_sizes
    level_in = np.zeros((B, topology.input_size))
    v = [np.zeros((B, n)) for n in sizes]
    u = [np.zeros((B, n)) for n in sizes]
    level = [np.zeros((B, n)) for n in sizes]
    prev_out = [np.zeros((B, n)) for n in sizes]
    pulse_offs: list[list[tuple[int, tuple[np.ndarray, np.ndarray]]]] = [
        [] for _ in sizes
    ]
    counts = [np.zeros((B, n), dtype=int) for n in sizes]

    for k in range(n_steps):
        if starts[k]:
            idx = tuple(np.asarray(starts[k]).T)
            np.add.at(level_in, idx, amp)
        if stops[k]:
            idx = tuple(np.asarray(stops[k]).T)
            np.add.at(level_in, idx, -amp)
        for i in range(n_layers):
            pre = level_in if i == 0 else level[i - 1]
            conn = topology.connections[i]
            i_exc = pre @ conn.w_exc.T
            i_inh = pre @ conn.w_inh.T
            if topology.bias_exc[i] is not None:
                i_exc = i_exc + topology.bias_exc[i]
            if topology.bias_inh[i] is not None:
                i_inh = i_inh + topology.bias_inh[i]
            v[i], u[i] = step_arrays(v[i], u[i], i_exc, i_inh, dt, params[i])
            veff = v[i] if offsets[i] is None else v[i] - offsets[i]
            out = vcsel_current(veff, params[i])
            fired = (out >= detect[i]) & (prev_out[i] < detect[i])
            prev_out[i] = out
            if fired.any():
                fb, fn = np.nonzero(fired)
                counts[i][fb, fn] += 1
                level[i][fb, fn] += amp
                pulse_offs[i].append((k + 1 + width_steps, (fb, fn)))
        for i in range(n_layers):
            keep = []
            for off_step, (fb, fn) in pulse_offs[i]:
                if off_step == k + 1:
                    level[i][fb, fn] -= amp
                else:
                    keep.append((off_step, (fb, fn)))
            pulse_offs[i] = keep
    return counts
