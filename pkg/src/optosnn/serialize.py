"""File formats: trace/raster CSV and JSON, topology JSON, weight sidecars.

CSV files follow RFC 4180 (CRLF line endings, mandatory header row) with
SI units spelled out in the column names. The weights sidecar is a flat
row-major little-endian float64 stream behind a 16-byte header: the magic
"OESNNWTS", a u32 format version, and a u32 value count.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .ann import AnnModel
from .network import Connection, LayerSpec, Topology, WtaLinks
from .neuron import NeuronTrace, OptoNeuronParams

__all__ = [
    "trace_to_csv",
    "raster_to_csv",
    "raster_from_csv",
    "raster_to_json",
    "raster_from_json",
    "topology_to_json",
    "topology_from_json",
    "save_weights_sidecar",
    "load_weights_sidecar",
    "save_ann",
    "load_ann",
]

SIDECAR_MAGIC = b"OESNNWTS"
SIDECAR_VERSION = 1
_EOL = "\r\n"


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def trace_to_csv(trace: NeuronTrace) -> str:
    """Single-neuron trace as CSV: time_s, v_V, u_V, i_vcsel_A."""
    lines = ["time_s,v_V,u_V,i_vcsel_A"]
    t = trace.times
    for k in range(len(t)):
        lines.append(",".join((
            _fmt(t[k]), _fmt(trace.v_series[k]),
            _fmt(trace.u_series[k]), _fmt(trace.i_vcsel_series[k]),
        )))
    return _EOL.join(lines) + _EOL


def raster_to_csv(events) -> str:
    """Spike events as CSV rows (channel_id, time_s).

    ``events`` is an iterable of (channel, time) pairs or an (n, 2) array.
    """
    lines = ["channel_id,time_s"]
    for ch, t in np.asarray(events, dtype=float).reshape(-1, 2):
        lines.append(f"{int(ch)},{_fmt(t)}")
    return _EOL.join(lines) + _EOL


def raster_from_csv(text: str) -> np.ndarray:
    rows = [r for r in text.split("\n") if r.strip()]
    header = rows[0].strip().rstrip("\r")
    if header != "channel_id,time_s":
        raise ValueError(f"unexpected raster CSV header {header!r}")
    out = []
    for row in rows[1:]:
        ch, t = row.strip().rstrip("\r").split(",")
        out.append((int(ch), float(t)))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def raster_to_json(events) -> str:
    ev = [[int(ch), float(t)] for ch, t in np.asarray(events, dtype=float).reshape(-1, 2)]
    return json.dumps(
        {"format": "spike-events", "version": 1, "events": ev},
        separators=(",", ":"),
    )


def raster_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    if doc.get("format") != "spike-events":
        raise ValueError("not a spike-events document")
    return np.asarray(doc["events"], dtype=float).reshape(-1, 2)


def _params_to_dict(p: OptoNeuronParams) -> dict:
    return {k: getattr(p, k) for k in (
        "r1", "c1", "r2", "c2", "k1", "k2", "k3", "vth1", "vth2", "vth3", "vd")}


def _params_from_dict(d: dict) -> OptoNeuronParams:
    return OptoNeuronParams(**d)


def topology_to_json(topo: Topology) -> str:
    """Topology as JSON; matrices inline as row-major nested lists."""
    doc = {
        "format": "optosnn-topology",
        "version": 1,
        "mode": "wta" if topo.wta else "feedforward",
        "input_size": topo.input_size,
        "pulse_width_s": topo.pulse_width_s,
        "pulse_amplitude_a": topo.pulse_amplitude_a,
        "layers": [
            {
                "size": l.size,
                "params": _params_to_dict(l.params),
                "vth2_offset": None if l.vth2_offset is None else l.vth2_offset.tolist(),
            }
            for l in topo.layers
        ],
        "connections": [
            {"w_exc": c.w_exc.tolist(), "w_inh": c.w_inh.tolist()}
            for c in topo.connections
        ],
        "bias_exc": [None if b is None else b.tolist() for b in topo.bias_exc],
        "bias_inh": [None if b is None else b.tolist() for b in topo.bias_inh],
        "wta": None if topo.wta is None else {
            "inh_params": _params_to_dict(topo.wta.inh_params),
            "exc_to_inh": topo.wta.exc_to_inh,
            "inh_to_exc": topo.wta.inh_to_exc,
        },
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def topology_from_json(text: str) -> Topology:
    doc = json.loads(text)
    if doc.get("format") != "optosnn-topology":
        raise ValueError("not an optosnn-topology document")
    layers = [
        LayerSpec(
            size=l["size"],
            params=_params_from_dict(l["params"]),
            vth2_offset=None if l["vth2_offset"] is None else np.asarray(l["vth2_offset"]),
        )
        for l in doc["layers"]
    ]
    conns = [
        Connection(w_exc=np.asarray(c["w_exc"]), w_inh=np.asarray(c["w_inh"]))
        for c in doc["connections"]
    ]
    wta = None
    if doc["wta"] is not None:
        wta = WtaLinks(
            inh_params=_params_from_dict(doc["wta"]["inh_params"]),
            exc_to_inh=doc["wta"]["exc_to_inh"],
            inh_to_exc=doc["wta"]["inh_to_exc"],
        )
    return Topology(
        input_size=doc["input_size"],
        layers=layers,
        connections=conns,
        wta=wta,
        bias_exc=[None if b is None else np.asarray(b) for b in doc["bias_exc"]],
        bias_inh=[None if b is None else np.asarray(b) for b in doc["bias_inh"]],
        pulse_width_s=doc["pulse_width_s"],
        pulse_amplitude_a=doc["pulse_amplitude_a"],
    )


def save_weights_sidecar(path, arrays) -> None:
    """Write arrays as one row-major little-endian float64 stream."""
    flats = [np.ascontiguousarray(a, dtype="<f8").ravel() for a in arrays]
    total = int(sum(len(f) for f in flats))
    with open(path, "wb") as fh:
        fh.write(SIDECAR_MAGIC)
        fh.write(struct.pack("<II", SIDECAR_VERSION, total))
        for f in flats:
            fh.write(f.tobytes())


def load_weights_sidecar(path, shapes) -> list[np.ndarray]:
    """Read back arrays given their shapes (in the order they were saved)."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:8] != SIDECAR_MAGIC:
            raise ValueError(f"{path}: not a weights sidecar (bad magic)")
        version, count = struct.unpack("<II", header[8:16])
        if version != SIDECAR_VERSION:
            raise ValueError(f"{path}: unsupported sidecar version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if len(data) != count:
        raise ValueError(f"{path}: expected {count} values, found {len(data)}")
    need = sum(int(np.prod(s)) for s in shapes)
    if need != count:
        raise ValueError(f"{path}: shapes need {need} values, sidecar holds {count}")
    out, offset = [], 0
    for s in shapes:
        n = int(np.prod(s))
        out.append(data[offset:offset + n].reshape(s).copy())
        offset += n
    return out


def save_ann(model: AnnModel, json_path, bin_path) -> None:
    """Model metadata as JSON plus all weights/biases in a sidecar."""
    doc = {
        "format": "optosnn-ann",
        "version": 1,
        "layer_sizes": model.layer_sizes,
        "sidecar": str(bin_path),
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
    save_weights_sidecar(bin_path, list(model.weights) + list(model.biases))


def load_ann(json_path, bin_path=None) -> AnnModel:
    with open(json_path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "optosnn-ann":
        raise ValueError(f"{json_path}: not an optosnn-ann document")
    sizes = doc["layer_sizes"]
    shapes = [(o, i) for i, o in zip(sizes[:-1], sizes[1:])]
    shapes += [(o,) for o in sizes[1:]]
    arrays = load_weights_sidecar(bin_path or doc["sidecar"], shapes)
    n = len(sizes) - 1
    return AnnModel(weights=arrays[:n], biases=arrays[n:])
