"""Acceptance suite: one test per shipped criterion, each printing a
PASS/FAIL line. The two MNIST training runs are marked slow; they need the
four standard IDX files (see optosnn.mnist.find_mnist_dir) and skip with a
message when the data is absent.
"""

import time

import numpy as np
import pytest

from optosnn import energy as en
from optosnn import presets
from optosnn.ann import forward, init_model, loss_and_gradients, train_ann
from optosnn.calibration import CalibrationTarget, calibrate_three_spike_threshold
from optosnn.convert import ConversionConfig, SnnClassifier, convert_ann_to_snn
from optosnn.evaluation import evaluate
from optosnn.izhikevich import IzhikevichParams, IzhikevichState, izhikevich_step
from optosnn.mnist import find_mnist_dir, load_standard_split
from optosnn.network import Connection, LayerSpec, SimConfig, Topology, build_wta, run
from optosnn.neuron import (
    DriveInput,
    OptoNeuronState,
    opto_derivatives,
    scale_time,
    simulate_neuron,
    step_arrays,
)
from optosnn.spikes import (
    EncodingConfig,
    GroupPattern,
    build_group_pattern,
    build_suppression_pattern,
    count_spikes_per_group,
    poisson_encode,
)
from optosnn.stdp import StdpClassifier, StdpConfig, normalize_incoming, stdp_update

REG = presets.preset("regular")
AMP = presets.DEMO_SPIKE_CURRENT_A
WIDTH = presets.DEMO_PULSE_WIDTH_S
DT = presets.DEMO_DT_S


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{criterion}: {detail}"


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_group_pattern_counts():
    t0 = time.perf_counter()
    gp = GroupPattern()
    train = build_group_pattern(gp)
    trace = simulate_neuron(train, None, REG, DT, gp.total_duration, AMP, WIDTH)
    counts = count_spikes_per_group(trace.output_spikes, gp)
    elapsed = time.perf_counter() - t0
    report("criterion 1 (excitatory group counts 3/1/1/0)",
           counts == [3, 1, 1, 0] and elapsed < 1.0,
           f"counts={counts} runtime={elapsed:.2f}s")


def test_criterion_02_suppression_of_events_three_and_five():
    gp = GroupPattern()
    exc = build_group_pattern(gp)
    inh = build_suppression_pattern(gp, (3, 5))
    base = simulate_neuron(exc, None, REG, DT, gp.total_duration, AMP, WIDTH)
    t0 = time.perf_counter()
    trace = simulate_neuron(exc, inh, REG, DT, gp.total_duration, AMP, WIDTH)
    elapsed = time.perf_counter() - t0
    expected = base.output_spikes[[0, 1, 3]]  # events 1, 2, 4 survive
    ok = (len(base.output_spikes) == 5 and len(trace.output_spikes) == 3
          and np.allclose(trace.output_spikes, expected, atol=2 * WIDTH)
          and elapsed < 1.0)
    report("criterion 2 (inhibition suppresses events #3 and #5)",
           ok, f"surviving={np.round(trace.output_spikes * 1e3, 2)}ms "
               f"runtime={elapsed:.2f}s")


def test_criterion_03_foundry_energy_column():
    r = en.build_report(en.FOUNDRY)
    checks = [
        ("Q", rel(r.q_threshold_c, 44.27e-15) < 1e-3),
        ("E_dyn_in", rel(r.e_dyn_in_j, 21.09e-15) < 5e-3),
        ("P_dyn_in", rel(r.p_dyn_in_w, 2.11e-3) < 0.01),
        ("E_dyn_out", rel(r.e_dyn_out_j, 211e-15) < 0.01),
        ("P_dyn_out", rel(r.p_dyn_out_w, 21.1e-3) < 0.01),
        ("P_static_off", rel(r.p_static_off_w, 6.36e-6) < 0.01),
        ("P_static_on", rel(r.p_static_on_w, 858e-6) < 0.01),
        ("P_avg formula", rel(r.p_avg_w, 737e-6) < 5e-3),
        # discrepancy note: the published average differs from the formula
        ("published P_avg retained", en.PUBLISHED_AVERAGE_POWER_W["foundry"] == 714e-6),
        ("discrepancy documented", rel(r.p_avg_w, 714e-6) > 0.01),
    ]
    failed = [name for name, ok in checks if not ok]
    report("criterion 3 (foundry energy column)", not failed,
           f"P_avg={en.si_format(r.p_avg_w, 'W')} failed={failed}")


def test_criterion_04_nano_energy_column():
    r = en.build_report(en.NANO)
    checks = [
        ("P_dyn_in", rel(r.p_dyn_in_w, 20e-6) < 0.01),
        ("E_dyn_out", rel(r.e_dyn_out_j, 2e-15) < 0.01),
        ("P_dyn_out", rel(r.p_dyn_out_w, 200e-6) < 0.01),
        ("P_static_off", rel(r.p_static_off_w, 14e-9) < 0.01),
        ("P_static_on", rel(r.p_static_on_w, 43.78e-6) < 0.01),
        ("P_avg", rel(r.p_avg_w, 8.14e-6) < 0.01),
        ("override in effect", r.e_dyn_in_j == 200e-18),
        ("computed value alongside", rel(r.e_dyn_in_computed_j, 20e-18) < 0.01),
    ]
    failed = [name for name, ok in checks if not ok]
    report("criterion 4 (nano energy column with override)", not failed,
           f"computed={en.si_format(r.e_dyn_in_computed_j, 'J')} failed={failed}")


def test_criterion_05_task_energy():
    power_f, _ = en.task_energy(714e-6, en.TaskEnergySpec(0.086, 1.0))
    duration_f = 31.3e-6 / power_f  # back-solved, documented
    _, energy_f = en.task_energy(714e-6, en.TaskEnergySpec(0.086, duration_f))
    r_nano = en.build_report(en.NANO)
    power_n, _ = en.task_energy(r_nano.p_avg_w, en.TaskEnergySpec(0.086, 1.0))
    duration_n = 253e-9 / power_n
    _, energy_n = en.task_energy(r_nano.p_avg_w, en.TaskEnergySpec(0.086, duration_n))
    checks = [
        ("foundry power 61.4uW", rel(power_f, 61.4e-6) < 0.01),
        ("foundry duration ~0.51s", abs(duration_f - 0.51) < 0.01),
        ("foundry energy 31.3uJ", rel(energy_f, 31.3e-6) < 0.02),
        ("nano power 0.7uW", rel(power_n, 0.7e-6) < 0.01),
        ("nano energy 253nJ", rel(energy_n, 253e-9) < 0.02),
    ]
    failed = [name for name, ok in checks if not ok]
    report("criterion 5 (task energies)", not failed,
           f"foundry {en.si_format(power_f, 'W')}/{en.si_format(energy_f, 'J')} "
           f"nano {en.si_format(power_n, 'W')}/{en.si_format(energy_n, 'J')} "
           f"failed={failed}")


def test_criterion_06_spike_event_efficiency_points():
    foundry = en.spike_event_efficiency(21.09e-15)
    nano = en.spike_event_efficiency(200e-18)
    checks = [
        ("foundry 4.74e4 GOP/s/W", rel(foundry, 4.742e4) < 0.01),
        ("foundry near 5e4", 0.8 < foundry / 5e4 < 1.2),
        ("nano 5e6 GOP/s/W", rel(nano, 5e6) < 0.01),
        ("nano over 1e6", nano > 1e6),
    ]
    failed = [name for name, ok in checks if not ok]
    report("criterion 6 (efficiency points)", not failed,
           f"foundry={foundry:.4g} nano={nano:.4g} failed={failed}")


@pytest.mark.slow
def test_criterion_07_ann_training_and_conversion_gap():
    mnist_dir = find_mnist_dir()
    if mnist_dir is None:
        pytest.skip("MNIST IDX files not found (set OPTOSNN_MNIST_DIR)")
    t0 = time.perf_counter()
    train = load_standard_split(mnist_dir, "train")
    test = load_standard_split(mnist_dir, "test")
    x_train, y_train = train.normalized(), train.labels.astype(int)
    x_sub, y_sub = test.normalized()[:1000], test.labels[:1000].astype(int)
    model = train_ann(x_train, y_train, [784, 300, 100, 10],
                      epochs=15, lr=0.1, batch_size=64, seed=0)
    ann_acc = evaluate(lambda X: np.argmax(forward(model, X), axis=1),
                       x_sub, y_sub).accuracy
    full_acc = evaluate(lambda X: np.argmax(forward(model, X), axis=1),
                        test.normalized(), test.labels.astype(int)).accuracy
    cc = ConversionConfig(duration_s=0.25, max_rate_hz=1000.0, drive_scale_a=3e-4,
                          dt_s=5e-5, pulse_width_s=2e-3, seed=0)
    clf = SnnClassifier(topology=convert_ann_to_snn(model, cc, x_train[:1000]),
                        conversion=cc)
    snn_acc = evaluate(clf, x_sub, y_sub).accuracy
    elapsed = time.perf_counter() - t0
    gap = abs(snn_acc - ann_acc)
    ok = full_acc >= 0.95 and gap <= 0.03 and elapsed < 1800
    report("criterion 7 (300-100-10 >= 95%, conversion gap <= 3pp)", ok,
           f"ann_full={full_acc:.4f} ann_1k={ann_acc:.4f} snn_1k={snn_acc:.4f} "
           f"gap={gap * 100:.2f}pp runtime={elapsed / 60:.1f}min")


@pytest.mark.slow
def test_criterion_08_stdp_desk_scale():
    mnist_dir = find_mnist_dir()
    if mnist_dir is None:
        pytest.skip("MNIST IDX files not found (set OPTOSNN_MNIST_DIR)")
    t0 = time.perf_counter()
    train = load_standard_split(mnist_dir, "train")
    test = load_standard_split(mnist_dir, "test")
    clf = StdpClassifier(n_exc=100, seed=0)
    clf.fit(train.normalized()[:5000], train.labels[:5000].astype(int))
    acc = evaluate(clf, test.normalized()[:1000],
                   test.labels[:1000].astype(int)).accuracy
    elapsed = time.perf_counter() - t0
    ok = acc >= 0.60 and elapsed < 4500
    report("criterion 8 (STDP 100 neurons, 5k train >= 60%)", ok,
           f"accuracy={acc:.4f} runtime={elapsed / 60:.1f}min")


class TestCriterion09Properties:
    def test_integrator_convergence_ratio(self):
        from optosnn.neuron import OptoNeuronParams
        p = OptoNeuronParams(r1=1e4, c1=3e-7, r2=1e4, c2=7e-7, k1=5.0, k2=0.04,
                             k3=0.05, vth1=0.9, vth2=0.95, vth3=0.9, vd=1.0)

        def v_end(dt):
            return simulate_neuron([0.0], None, p, dt, 0.01, 5e-5, 0.01).v_series[-1]

        ref = v_end(1e-6)
        ratio = abs(v_end(1e-5) - ref) / abs(v_end(5e-6) - ref)
        report("criterion 9a (convergence ratio in [1.5, 2.5])",
               1.5 <= ratio <= 2.5, f"ratio={ratio:.3f}")

    def test_clipping_over_one_million_steps(self):
        rng = np.random.default_rng(0)
        total, violations = 0, 0
        for _ in range(25):
            from optosnn.neuron import OptoNeuronParams
            p = OptoNeuronParams(
                r1=rng.uniform(1e3, 1e5), c1=rng.uniform(1e-8, 1e-6),
                r2=rng.uniform(1e3, 1e5), c2=rng.uniform(1e-8, 1e-6),
                k1=rng.uniform(0, 10), k2=rng.uniform(0, 1),
                k3=rng.uniform(0, 10), vth1=rng.uniform(0.01, 0.9),
                vth2=rng.uniform(0.01, 0.9), vth3=rng.uniform(0.01, 0.9), vd=1.0)
            v = rng.uniform(0, 1, 1000)
            u = rng.uniform(0, 1, 1000)
            for _ in range(40):
                v, u = step_arrays(v, u, rng.uniform(0, 1e-2, 1000),
                                   rng.uniform(0, 1e-2, 1000), p.max_stable_dt, p)
                total += 1000
                violations += int(np.sum((v < 0) | (v > p.vd) | (u < 0) | (u > p.vd)))
        report("criterion 9b (clipping bounds over 1e6 steps)",
               total >= 1_000_000 and violations == 0,
               f"steps={total} violations={violations}")

    def test_balanced_cancellation_at_rest(self):
        dv, du = opto_derivatives(OptoNeuronState(0.0, 0.0),
                                  DriveInput(i_exc=3e-4, i_inh=3e-4), REG)
        report("criterion 9c (balanced-input cancellation)", dv == 0.0 and du == 0.0,
               f"dv={dv} du={du}")

    def test_time_rescaling_identity(self):
        gp = GroupPattern()
        train = build_group_pattern(gp)
        base = simulate_neuron(train, None, REG, DT, gp.total_duration, AMP, WIDTH)
        scaled = simulate_neuron([t * 2 for t in train.times], None,
                                 scale_time(REG, 2.0), DT * 2,
                                 gp.total_duration * 2, AMP, WIDTH * 2)
        ok = (np.array_equal(base.v_series, scaled.v_series)
              and np.array_equal(base.u_series, scaled.u_series))
        report("criterion 9d (time-rescaling trace identity)", ok, "")

    def test_stdp_bounds_and_normalization(self):
        rng = np.random.default_rng(1)
        cfg = StdpConfig(eta_post=0.3, x_tar=0.8, w_max=1.0)
        w = rng.uniform(0, 1, (40, 200))
        in_bounds = True
        for _ in range(200):
            w = stdp_update(w, rng.exponential(1.0, 200), cfg)
            in_bounds &= bool(w.min() >= 0.0 and w.max() <= 1.0)
        normalize_incoming(w, 7.5)
        norm_err = np.max(np.abs(w.sum(axis=1) / 7.5 - 1.0))
        report("criterion 9e (STDP bounds + normalization 1e-9)",
               in_bounds and norm_err < 1e-9,
               f"norm_rel_err={norm_err:.2e}")

    def test_ann_gradient_check(self):
        rng = np.random.default_rng(2)
        model = init_model([4, 2, 2], seed=2)
        x = rng.normal(size=(5, 4))
        y = rng.integers(0, 2, 5)
        _, gw, gb = loss_and_gradients(model, x, y)
        eps, worst = 1e-6, 0.0
        for li in range(2):
            for arr, grad in ((model.weights[li], gw[li]), (model.biases[li], gb[li])):
                flat = arr.ravel()
                for idx in range(flat.size):
                    orig = flat[idx]
                    flat[idx] = orig + eps
                    lp, _, _ = loss_and_gradients(model, x, y)
                    flat[idx] = orig - eps
                    lm, _, _ = loss_and_gradients(model, x, y)
                    flat[idx] = orig
                    numeric = (lp - lm) / (2 * eps)
                    analytic = grad.ravel()[idx]
                    worst = max(worst, abs(numeric - analytic)
                                / max(abs(numeric), abs(analytic), 1e-8))
        report("criterion 9f (gradient check rel err < 1e-4)", worst < 1e-4,
               f"worst={worst:.2e}")

    def test_single_neuron_reduction(self):
        gp = GroupPattern()
        train = build_group_pattern(gp)
        topo = Topology(
            input_size=1, layers=[LayerSpec(size=1, params=REG)],
            connections=[Connection(w_exc=np.array([[1.0]]),
                                    w_inh=np.array([[0.0]]))])
        out = run(topo, [train], SimConfig(dt_s=DT, duration_s=0.12,
                                           record_traces=True))
        ref = simulate_neuron(train, None, REG, DT, 0.12, AMP, WIDTH)
        ok = (np.array_equal(out.rasters[0][0], ref.output_spikes)
              and np.array_equal(out.traces[0]["v"][:, 0], ref.v_series))
        report("criterion 9g (single-neuron network reduction)", ok, "")

    def test_determinism_replay(self):
        rng = np.random.default_rng(3)
        w = np.abs(rng.normal(size=(5, 4)))
        topo = build_wta(4, 5, w, 1.0, inh_params=presets.preset("fast"))
        trains = [poisson_encode(np.full(4, 0.8),
                                 EncodingConfig(max_rate_hz=400.0, duration_s=0.05,
                                                seed=9))[i] for i in range(4)]
        cfg = SimConfig(dt_s=1e-4, duration_s=0.05)
        a = run(topo, trains, cfg)
        b = run(topo, trains, cfg)
        identical = all(
            np.array_equal(ra, rb)
            for pa, pb in zip(a.rasters, b.rasters)
            for ra, rb in zip(pa, pb))
        report("criterion 9h (determinism replay)", identical, "")

    def test_izhikevich_reset_exactness(self):
        p = IzhikevichParams()
        s = IzhikevichState(v=-65.0, u=-13.0)
        exact = True
        fired_any = False
        for _ in range(30000):
            u_before = s.u
            from optosnn.izhikevich import izhikevich_derivatives
            _, du = izhikevich_derivatives(s, 10.0, p)
            s, fired = izhikevich_step(s, 10.0, 0.1, p)
            if fired:
                fired_any = True
                exact &= (s.v == p.c) and (s.u == u_before + 0.1 * du + p.d)
        report("criterion 9i (izhikevich reset exactness)", exact and fired_any, "")


def test_criterion_10_calibration():
    t0 = time.perf_counter()
    target = CalibrationTarget(n_spikes=3)
    params = calibrate_three_spike_threshold(target)
    three = simulate_neuron(np.arange(3) / target.rate_hz, None, params,
                            target.dt_s, 0.025, target.amplitude_a,
                            target.pulse_width_s)
    two = simulate_neuron(np.arange(2) / target.rate_hz, None, params,
                          target.dt_s, 0.025, target.amplitude_a,
                          target.pulse_width_s)
    elapsed = time.perf_counter() - t0
    ok = len(three.output_spikes) >= 1 and len(two.output_spikes) == 0 and elapsed < 60
    report("criterion 10 (three-spike calibration)", ok,
           f"outputs(3)={len(three.output_spikes)} outputs(2)={len(two.output_spikes)} "
           f"runtime={elapsed:.1f}s")
