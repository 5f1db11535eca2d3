"""Deterministic SVG rendering of traces and rasters.

Hand-rolled SVG so output is byte-for-byte reproducible: fixed float
formatting, no timestamps, no generated ids. Trace plots stack the
membrane potential, refractory potential and laser current over time;
raster plots mark one tick per spike event.
"""

from __future__ import annotations

import numpy as np

from .neuron import NeuronTrace

__all__ = ["svg_trace", "svg_raster"]

_W, _H = 900, 480
_MARGIN = 55


def _f(x: float) -> str:
    return format(float(x), ".3f")


def _axis_box(x0, y0, x1, y1, label_x, label_y):
    parts = [
        f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<text x="{_f((x0 + x1) / 2)}" y="{_f(y1 + 35)}" text-anchor="middle" '
        f'font-size="13">{label_x}</text>',
        f'<text x="{_f(x0 - 40)}" y="{_f((y0 + y1) / 2)}" text-anchor="middle" '
        f'font-size="13" transform="rotate(-90 {_f(x0 - 40)} {_f((y0 + y1) / 2)})">'
        f'{label_y}</text>',
    ]
    return parts


def _polyline(xs, ys, color):
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>'


def _scale(vals, lo, hi, out_lo, out_hi):
    vals = np.asarray(vals, dtype=float)
    span = hi - lo if hi > lo else 1.0
    return out_lo + (vals - lo) / span * (out_hi - out_lo)


def svg_trace(trace: NeuronTrace, max_points: int = 4000) -> str:
    """Stacked v/u/i_vcsel panels over time."""
    t = trace.times
    stride = max(1, len(t) // max_points)
    t = t[::stride]
    series = [
        ("v (V)", trace.v_series[::stride], "#c8a400"),
        ("u (V)", trace.u_series[::stride], "#cc0000"),
        ("i_vcsel (A)", trace.i_vcsel_series[::stride], "#008800"),
    ]
    panel_h = (_H - 2 * _MARGIN) / 3
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    t_lo, t_hi = (float(t[0]), float(t[-1])) if len(t) else (0.0, 1.0)
    for i, (label, ys, color) in enumerate(series):
        y0 = _MARGIN + i * panel_h
        y1 = y0 + panel_h - 18
        lo = float(np.min(ys)) if len(ys) else 0.0
        hi = float(np.max(ys)) if len(ys) else 1.0
        if hi <= lo:
            hi = lo + 1.0
        parts += _axis_box(_MARGIN, y0, _W - _MARGIN, y1,
                           "time (s)" if i == 2 else "", label)
        xs = _scale(t, t_lo, t_hi, _MARGIN, _W - _MARGIN)
        yy = _scale(ys, lo, hi, y1, y0)
        if len(t):
            parts.append(_polyline(xs, yy, color))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_raster(events, duration_s: float | None = None, n_channels: int | None = None) -> str:
    """One tick mark per spike event; events are (channel, time) pairs."""
    ev = np.asarray(events, dtype=float).reshape(-1, 2)
    t_hi = duration_s if duration_s is not None else (float(ev[:, 1].max()) if len(ev) else 1.0)
    ch_hi = n_channels if n_channels is not None else (int(ev[:, 0].max()) + 1 if len(ev) else 1)
    x0, y0, x1, y1 = _MARGIN, _MARGIN, _W - _MARGIN, _H - _MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    parts += _axis_box(x0, y0, x1, y1, "time (s)", "channel")
    for ch, t in ev:
        x = x0 + (t / t_hi) * (x1 - x0) if t_hi > 0 else x0
        y = y1 - ((ch + 0.5) / ch_hi) * (y1 - y0)
        parts.append(
            f'<line x1="{_f(x)}" y1="{_f(y - 3)}" x2="{_f(x)}" y2="{_f(y + 3)}" '
            'stroke="black" stroke-width="1" class="spike"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
