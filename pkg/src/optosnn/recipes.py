"""Reproducible experiment recipes behind the command-line harness.

Each recipe consumes an ExperimentConfig, writes its artifacts under the
configured output directory, and returns a summary dict. The runner wraps
every recipe with a manifest (config hash, seed, versions, PRNG, output
list) sufficient to reproduce the run; no artifact embeds a timestamp.
"""

from __future__ import annotations

import json
import os
from dataclasses import replace

import numpy as np

from . import __version__, presets
from .ann import forward, train_ann
from .calibration import CalibrationTarget, calibrate_three_spike_threshold
from .config import ConfigError, ExperimentConfig
from .convert import ConversionConfig, SnnClassifier, convert_ann_to_snn
from .energy import (
    FOUNDRY,
    NANO,
    PUBLISHED_AVERAGE_POWER_W,
    TaskEnergySpec,
    build_report,
    report_table,
    si_format,
    spike_event_efficiency,
    task_energy,
)
from .evaluation import evaluate
from .mnist import find_mnist_dir, load_standard_split
from .network import SimConfig
from .neuron import OptoNeuronParams, simulate_neuron
from .plots import svg_raster, svg_trace
from .serialize import (
    load_ann,
    raster_to_csv,
    raster_to_json,
    save_ann,
    topology_from_json,
    topology_to_json,
    trace_to_csv,
)
from .spikes import (
    GroupPattern,
    build_group_pattern,
    build_suppression_pattern,
    count_spikes_per_group,
)
from .stdp import StdpClassifier

__all__ = ["RECIPES", "run_experiment", "default_config"]

# Efficiency points for this project's own hardware generations, as
# published: reported figures alongside the reciprocal-energy computation.
SELF_BENCHMARK_POINTS = [
    {"name": "testbed", "e_per_event_j": 1e-3 * 1e-3, "reported_gop_s_w": 1e-3},
    {"name": "foundry", "e_per_event_j": 21.09e-15, "reported_gop_s_w": 5e4},
    {"name": "nano", "e_per_event_j": 200e-18, "reported_gop_s_w": 1e6},
]


def default_config(name: str, seed: int = 0, output_dir: str | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    cfg.sections["experiment"] = {
        "name": name,
        "seed": str(seed),
        "output_dir": output_dir or os.path.join("out", name),
    }
    return cfg


def _outdir(cfg: ExperimentConfig) -> str:
    d = cfg.get_str("experiment", "output_dir",
                    os.path.join("out", cfg.get_str("experiment", "name")))
    os.makedirs(d, exist_ok=True)
    return d


def _write(outdir: str, written: list, name: str, data) -> str:
    path = os.path.join(outdir, name)
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(data)
    written.append(name)
    return path


def _pattern_from(cfg: ExperimentConfig) -> GroupPattern:
    sizes = cfg.get_str("pattern", "group_sizes", "14,5,3,1")
    return GroupPattern(
        group_sizes=tuple(int(s) for s in sizes.split(",")),
        intra_group_rate=cfg.get_float("pattern", "rate_hz", presets.DEMO_RATE_HZ),
        guard_time=cfg.get_float("pattern", "guard_s", presets.DEMO_GUARD_S),
        spike_width=cfg.get_float("pattern", "width_s", presets.DEMO_PULSE_WIDTH_S),
    )


_PARAM_KEYS = {
    "r1_ohms": "r1", "c1_farads": "c1", "r2_ohms": "r2", "c2_farads": "c2",
    "k1_a_per_v2": "k1", "k2_a_per_v2": "k2", "k3_a_per_v2": "k3",
    "vth1_volts": "vth1", "vth2_volts": "vth2", "vth3_volts": "vth3",
    "vd_volts": "vd",
}


def _params_from(cfg: ExperimentConfig, section: str = "neuron") -> OptoNeuronParams:
    params = presets.preset(cfg.get_str(section, "preset", "regular"))
    overrides = {}
    for key, field in _PARAM_KEYS.items():
        if key in cfg.sections.get(section, {}):
            overrides[field] = cfg.get_float(section, key)
    return replace(params, **overrides) if overrides else params


def _single_neuron_run(cfg: ExperimentConfig, inhibit=None):
    pattern = _pattern_from(cfg)
    params = _params_from(cfg)
    dt = cfg.get_float("neuron", "dt_s", presets.DEMO_DT_S)
    amp = cfg.get_float("neuron", "amplitude_a", presets.DEMO_SPIKE_CURRENT_A)
    exc = build_group_pattern(pattern)
    trace = simulate_neuron(exc, inhibit, params, dt, pattern.total_duration,
                            amp, pattern.spike_width)
    return pattern, params, exc, trace


def _emit_trace_artifacts(outdir, written, exc, trace, inhibit=None):
    _write(outdir, written, "trace.csv", trace_to_csv(trace))
    _write(outdir, written, "trace.svg", svg_trace(trace))
    events = [(0, t) for t in exc.times]
    if inhibit is not None:
        events += [(1, t) for t in getattr(inhibit, "times", inhibit)]
    events += [(2, t) for t in trace.output_spikes]
    events.sort(key=lambda r: (r[1], r[0]))
    _write(outdir, written, "raster.csv", raster_to_csv(events))
    _write(outdir, written, "raster.json", raster_to_json(events))
    _write(outdir, written, "raster.svg",
           svg_raster(events, n_channels=3))


def recipe_simulate_neuron(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    pattern, params, exc, trace = _single_neuron_run(cfg)
    counts = count_spikes_per_group(trace.output_spikes, pattern)
    _emit_trace_artifacts(outdir, written, exc, trace)
    return written, {"group_counts": counts,
                     "output_spike_times_s": trace.output_spikes.tolist()}


def recipe_fig5(cfg: ExperimentConfig):
    written, summary = recipe_simulate_neuron(cfg)
    summary["expected_group_counts"] = [3, 1, 1, 0]
    summary["matches_expected"] = summary["group_counts"] == [3, 1, 1, 0]
    return written, summary


def recipe_fig6(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    pattern = _pattern_from(cfg)
    events_txt = cfg.get_str("suppression", "events", "3,5")
    suppress = tuple(int(e) for e in events_txt.split(",") if e.strip())
    params = _params_from(cfg)
    dt = cfg.get_float("neuron", "dt_s", presets.DEMO_DT_S)
    amp = cfg.get_float("neuron", "amplitude_a", presets.DEMO_SPIKE_CURRENT_A)
    inhibit = build_suppression_pattern(pattern, suppress, params=params,
                                        spike_current_amplitude=amp, dt=dt)
    exc = build_group_pattern(pattern)
    base = simulate_neuron(exc, None, params, dt, pattern.total_duration, amp,
                           pattern.spike_width)
    trace = simulate_neuron(exc, inhibit, params, dt, pattern.total_duration, amp,
                            pattern.spike_width)
    _emit_trace_artifacts(outdir, written, exc, trace, inhibit=inhibit)
    kept = [
        int(k + 1) for k, t in enumerate(base.output_spikes)
        if np.any(np.abs(trace.output_spikes - t) < 2 * pattern.spike_width)
    ]
    return written, {
        "suppressed_events": list(suppress),
        "baseline_event_times_s": base.output_spikes.tolist(),
        "surviving_event_times_s": trace.output_spikes.tolist(),
        "surviving_event_indices": kept,
    }


def recipe_fig3_presets(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    pattern = _pattern_from(cfg)
    dt = cfg.get_float("neuron", "dt_s", presets.DEMO_DT_S)
    amp = cfg.get_float("neuron", "amplitude_a", presets.DEMO_SPIKE_CURRENT_A)
    exc = build_group_pattern(pattern)
    summary = {}
    for name in ("regular", "low", "burst", "fast"):
        params = presets.preset(name)
        trace = simulate_neuron(exc, None, params, dt, pattern.total_duration,
                                amp, pattern.spike_width)
        _write(outdir, written, f"trace_{name}.csv", trace_to_csv(trace))
        _write(outdir, written, f"trace_{name}.svg", svg_trace(trace))
        summary[name] = {
            "group_counts": count_spikes_per_group(trace.output_spikes, pattern),
            "total_spikes": int(len(trace.output_spikes)),
        }
    # burst regime is defined against sustained drive
    sustained = np.arange(80) / presets.DEMO_RATE_HZ
    btrace = simulate_neuron(sustained, None, presets.preset("burst"), dt, 0.1,
                             presets.BURST_DRIVE_CURRENT_A, presets.DEMO_PULSE_WIDTH_S)
    _write(outdir, written, "trace_burst_sustained.csv", trace_to_csv(btrace))
    _write(outdir, written, "trace_burst_sustained.svg", svg_trace(btrace))
    summary["burst_sustained_spike_count"] = int(len(btrace.output_spikes))
    return written, summary


def recipe_calibrate(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    target = CalibrationTarget(
        n_spikes=cfg.get_int("calibrate", "n_spikes", 3),
        rate_hz=cfg.get_float("calibrate", "rate_hz", presets.DEMO_RATE_HZ),
        amplitude_a=cfg.get_float("calibrate", "amplitude_a", presets.DEMO_SPIKE_CURRENT_A),
        pulse_width_s=cfg.get_float("calibrate", "width_s", presets.DEMO_PULSE_WIDTH_S),
        dt_s=cfg.get_float("calibrate", "dt_s", presets.DEMO_DT_S),
    )
    budget = cfg.get_int("calibrate", "budget", 500)
    params = calibrate_three_spike_threshold(target, budget=budget)
    lines = [f"{key} = {getattr(params, field)!r}"
             for key, field in _PARAM_KEYS.items()]
    _write(outdir, written, "calibrated_params.cfg",
           "[neuron]\n" + "\n".join(sorted(lines)) + "\n")
    return written, {
        "n_spikes": target.n_spikes,
        "params": {field: getattr(params, field) for field in _PARAM_KEYS.values()},
    }


def _mnist_or_fail(cfg: ExperimentConfig):
    mnist_dir = find_mnist_dir(cfg.get_str("mnist", "dir", "") or None)
    if mnist_dir is None:
        raise FileNotFoundError(
            "MNIST IDX files not found; set [mnist] dir, $OPTOSNN_MNIST_DIR, "
            "or place the four standard files under data/mnist"
        )
    return mnist_dir


def recipe_train_ann(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    mnist_dir = _mnist_or_fail(cfg)
    train = load_standard_split(mnist_dir, "train")
    test = load_standard_split(mnist_dir, "test")
    n_train = cfg.get_int("ann", "train_count", len(train))
    hidden = tuple(int(s) for s in cfg.get_str("ann", "hidden", "300,100").split(","))
    seed = cfg.get_int("experiment", "seed", 0)
    model = train_ann(
        train.normalized()[:n_train], train.labels[:n_train].astype(int),
        [784, *hidden, 10],
        epochs=cfg.get_int("ann", "epochs", 15),
        lr=cfg.get_float("ann", "lr", 0.1),
        batch_size=cfg.get_int("ann", "batch_size", 64),
        seed=seed,
    )
    res = evaluate(lambda X: np.argmax(forward(model, X), axis=1),
                   test.normalized(), test.labels.astype(int))
    save_ann(model, os.path.join(outdir, "ann.json"), os.path.join(outdir, "ann.bin"))
    written += ["ann.json", "ann.bin"]
    return written, {"test_accuracy": res.accuracy, "n_train": n_train,
                     "architecture": [784, *hidden, 10]}


def _conversion_from(cfg: ExperimentConfig) -> ConversionConfig:
    return ConversionConfig(
        duration_s=cfg.get_float("convert", "duration_s", 0.25),
        max_rate_hz=cfg.get_float("convert", "max_rate_hz", 1000.0),
        drive_scale_a=cfg.get_float("convert", "drive_a", 3e-4),
        dt_s=cfg.get_float("convert", "dt_s", 5e-5),
        pulse_width_s=cfg.get_float("convert", "width_s", 2e-3),
        calibration_size=cfg.get_int("convert", "calibration_size", 1000),
        seed=cfg.get_int("experiment", "seed", 0),
    )


def recipe_convert_ann(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    model_json = cfg.get_str("convert", "model_json")
    model = load_ann(model_json)
    mnist_dir = _mnist_or_fail(cfg)
    train = load_standard_split(mnist_dir, "train")
    cc = _conversion_from(cfg)
    topo = convert_ann_to_snn(model, cc, train.normalized()[:cc.calibration_size])
    _write(outdir, written, "topology.json", topology_to_json(topo))
    return written, {"layer_sizes": [topo.input_size] + topo.layer_sizes}


def recipe_infer(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    topo = topology_from_json(open(cfg.get_str("infer", "topology_json")).read())
    mnist_dir = _mnist_or_fail(cfg)
    test = load_standard_split(mnist_dir, "test")
    n = cfg.get_int("infer", "test_count", 1000)
    clf = SnnClassifier(topology=topo, conversion=_conversion_from(cfg))
    res = evaluate(clf, test.normalized()[:n], test.labels[:n].astype(int))
    _write(outdir, written, "confusion.csv",
           "true\\pred," + ",".join(map(str, range(10))) + "\r\n" +
           "\r\n".join(f"{i}," + ",".join(map(str, row))
                       for i, row in enumerate(res.confusion)) + "\r\n")
    return written, {"accuracy": res.accuracy, "n_samples": res.n_samples}


def recipe_train_stdp(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    mnist_dir = _mnist_or_fail(cfg)
    train = load_standard_split(mnist_dir, "train")
    test = load_standard_split(mnist_dir, "test")
    n_train = cfg.get_int("stdp", "train_count", 5000)
    n_test = cfg.get_int("stdp", "test_count", 1000)
    clf = StdpClassifier(
        n_exc=cfg.get_int("stdp", "n_exc", 100),
        inh_strength=cfg.get_float("stdp", "inh_strength", 1.0),
        eta_post=cfg.get_float("stdp", "eta_post", 0.01),
        x_tar=cfg.get_float("stdp", "x_tar", 1.0),
        norm_target=cfg.get_float("stdp", "norm_target", 10.0),
        max_rate_hz=cfg.get_float("stdp", "max_rate_hz", 500.0),
        duration_s=cfg.get_float("stdp", "duration_s", 0.2),
        label_samples=cfg.get_int("stdp", "label_samples", 1000),
        seed=cfg.get_int("experiment", "seed", 0),
    )
    clf.fit(train.normalized()[:n_train], train.labels[:n_train].astype(int))
    res = evaluate(clf, test.normalized()[:n_test], test.labels[:n_test].astype(int))
    _write(outdir, written, "topology.json", topology_to_json(clf.topology_))
    _write(outdir, written, "neuron_labels.json",
           json.dumps(clf.labels_.neuron_class.tolist()))
    return written, {"accuracy": res.accuracy, "n_train": n_train, "n_test": n_test}


def recipe_energy_report(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    sheets = {"foundry": FOUNDRY, "nano": NANO}
    which = cfg.get_str("energy", "sheet", "both")
    if which != "both":
        if which not in sheets:
            raise ConfigError(f"[energy] sheet must be foundry, nano or both, got {which!r}")
        sheets = {which: sheets[which]}
    _write(outdir, written, "energy_table.txt", report_table(sheets))
    doc = {}
    for name, params in sheets.items():
        r = build_report(params)
        doc[name] = {k: getattr(r, k) for k in r.__dataclass_fields__}
        published = PUBLISHED_AVERAGE_POWER_W.get(name)
        if published is not None:
            doc[name]["p_avg_published_w"] = published
        frac = cfg.get_float("energy", "task_activity_fraction", 0.086)
        p_avg = cfg.get_float("energy", f"{name}_task_p_avg_w", r.p_avg_w)
        duration = cfg.get_float("energy", f"{name}_task_duration_s", 0.5)
        power, en = task_energy(p_avg, TaskEnergySpec(frac, duration))
        doc[name]["task_power_w"] = power
        doc[name]["task_energy_j"] = en
    _write(outdir, written, "energy_report.json", json.dumps(doc, indent=2, sort_keys=True))
    return written, {name: {"p_avg": si_format(doc[name]["p_avg_w"], "W")} for name in doc}


def recipe_benchmark_points(cfg: ExperimentConfig):
    outdir, written = _outdir(cfg), []
    points = []
    for entry in SELF_BENCHMARK_POINTS:
        computed = spike_event_efficiency(entry["e_per_event_j"])
        points.append({
            "name": entry["name"],
            "e_per_event_j": entry["e_per_event_j"],
            "computed_gop_s_w": computed,
            "reported_gop_s_w": entry["reported_gop_s_w"],
        })
    _write(outdir, written, "benchmark_points.json",
           json.dumps({"points": points}, indent=2, sort_keys=True))
    csv = "name,e_per_event_j,computed_gop_s_w,reported_gop_s_w\r\n" + "\r\n".join(
        f"{p['name']},{p['e_per_event_j']!r},{p['computed_gop_s_w']!r},{p['reported_gop_s_w']!r}"
        for p in points) + "\r\n"
    _write(outdir, written, "benchmark_points.csv", csv)
    return written, {"n_points": len(points)}


RECIPES = {
    "simulate-neuron": recipe_simulate_neuron,
    "fig3-presets": recipe_fig3_presets,
    "fig5": recipe_fig5,
    "fig6": recipe_fig6,
    "calibrate": recipe_calibrate,
    "train-ann": recipe_train_ann,
    "convert-ann": recipe_convert_ann,
    "infer": recipe_infer,
    "train-stdp": recipe_train_stdp,
    "energy-report": recipe_energy_report,
    "benchmark-points": recipe_benchmark_points,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Dispatch to a recipe and write the reproducibility manifest."""
    name = cfg.get_str("experiment", "name")
    if name not in RECIPES:
        raise ConfigError(
            f"unknown experiment {name!r}; available: {', '.join(sorted(RECIPES))}"
        )
    outdir = _outdir(cfg)
    written, summary = RECIPES[name](cfg)
    manifest = {
        "experiment": name,
        "config_hash": cfg.hash(),
        "config": cfg.sections,
        "seed": cfg.get_int("experiment", "seed", 0),
        "prng": "numpy default_rng (PCG64)",
        "versions": {
            "optosnn": __version__,
            "numpy": np.__version__,
        },
        "outputs": written,
        "summary": summary,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest
