import numpy as np
import pytest

from optosnn import presets
from optosnn.network import (
    Connection,
    LayerSpec,
    NetworkSimulator,
    SimConfig,
    Topology,
    WtaLinks,
    build_feedforward,
    build_wta,
    run,
    run_batched_counts,
)
from optosnn.neuron import simulate_neuron, step_arrays, vcsel_current, detection_current
from optosnn.spikes import GroupPattern, SpikeTrain, build_group_pattern

REG = presets.preset("regular")
AMP = presets.DEMO_SPIKE_CURRENT_A
WIDTH = presets.DEMO_PULSE_WIDTH_S
DT = presets.DEMO_DT_S


def demo_train():
    return build_group_pattern(GroupPattern())


class TestBuilders:
    def test_sign_split(self):
        w = np.array([[0.5, -0.25], [0.0, 1.0]])
        topo = build_feedforward([2, 2], [w])
        conn = topo.connections[0]
        assert conn.w_exc[0, 0] == 0.5 and conn.w_inh[0, 0] == 0.0
        assert conn.w_exc[0, 1] == 0.0 and conn.w_inh[0, 1] == 0.25
        np.testing.assert_array_equal(conn.signed, w)

    def test_round_trip_random(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=(7, 5))
        topo = build_feedforward([5, 7], [w])
        np.testing.assert_array_equal(topo.connections[0].signed, w)
        assert np.all(topo.connections[0].w_exc >= 0)
        assert np.all(topo.connections[0].w_inh >= 0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            build_feedforward([3, 2], [np.zeros((2, 4))])

    def test_wta_structure(self):
        topo = build_wta(4, 3, np.ones((3, 4)), inh_strength=0.7)
        m = topo.wta.inh_to_exc_matrix(3)
        assert np.all(np.diag(m) == 0)
        off = m[~np.eye(3, dtype=bool)]
        assert np.all(off == 0.7)
        eim = topo.wta.exc_to_inh_matrix(3)
        assert np.count_nonzero(eim) == 3

    def test_wta_link_counts_at_scale(self):
        topo = build_wta(784, 400, np.ones((400, 784)), inh_strength=1.0)
        assert np.count_nonzero(topo.wta.exc_to_inh_matrix(400)) == 400
        assert np.count_nonzero(topo.wta.inh_to_exc_matrix(400)) == 400 * 399

    def test_wta_requires_two_neurons(self):
        with pytest.raises(ValueError):
            build_wta(4, 1, np.ones((1, 4)), inh_strength=1.0)

    def test_negative_weights_rejected_in_connection(self):
        with pytest.raises(ValueError):
            Connection(w_exc=np.array([[-1.0]]), w_inh=np.array([[0.0]]))


class TestSingleNeuronReduction:
    def test_network_equals_simulate_neuron_exactly(self):
        train = demo_train()
        topo = Topology(
            input_size=1,
            layers=[LayerSpec(size=1, params=REG)],
            connections=[Connection(w_exc=np.array([[1.0]]), w_inh=np.array([[0.0]]))],
        )
        cfg = SimConfig(dt_s=DT, duration_s=0.12, record_traces=True)
        out = run(topo, [train], cfg)
        ref = simulate_neuron(train, None, REG, DT, 0.12, AMP, WIDTH)
        assert np.array_equal(out.rasters[0][0], ref.output_spikes)
        assert np.array_equal(out.traces[0]["v"][:, 0], ref.v_series)
        assert np.array_equal(out.traces[0]["u"][:, 0], ref.u_series)


class TestRunBasics:
    def test_zero_weights_keep_downstream_silent(self):
        topo = build_feedforward([1, 3, 2], [np.zeros((3, 1)), np.zeros((2, 3))])
        out = run(topo, [demo_train()], SimConfig(dt_s=DT, duration_s=0.05))
        assert out.spike_counts[0].sum() == 0
        assert out.spike_counts[1].sum() == 0

    def test_causality_from_rest(self):
        topo = build_feedforward([1, 1], [np.array([[1.0]])])
        train = SpikeTrain(times=[0.02])
        out = run(topo, [train], SimConfig(dt_s=DT, duration_s=0.06))
        spikes = out.rasters[0][0]
        assert np.all(spikes >= 0.02)

    def test_wrong_train_count_rejected(self):
        topo = build_feedforward([2, 1], [np.ones((1, 2))])
        with pytest.raises(ValueError):
            run(topo, [demo_train()], SimConfig(dt_s=DT, duration_s=0.01))

    def test_unstable_dt_rejected(self):
        topo = build_feedforward([1, 1], [np.ones((1, 1))])
        with pytest.raises(ValueError, match="stability"):
            run(topo, [demo_train()], SimConfig(dt_s=1e-3, duration_s=0.01))

    def test_determinism_replay(self):
        rng = np.random.default_rng(2)
        topo = build_feedforward([3, 4, 2], [rng.normal(size=(4, 3)),
                                             rng.normal(size=(2, 4))])
        trains = [SpikeTrain(times=np.sort(rng.uniform(0, 0.05, 8)), channel_id=i)
                  for i in range(3)]
        cfg = SimConfig(dt_s=DT, duration_s=0.06)
        a = run(topo, trains, cfg)
        b = run(topo, trains, cfg)
        for pa, pb in zip(a.rasters, b.rasters):
            for ra, rb in zip(pa, pb):
                assert np.array_equal(ra, rb)

    def test_reset_then_rerun_identical(self):
        topo = build_feedforward([1, 2], [np.array([[1.0], [0.6]])])
        sim = NetworkSimulator(topo)
        cfg = SimConfig(dt_s=DT, duration_s=0.05)
        train = demo_train()
        a = sim.run([train], cfg)
        sim.reset()
        assert all(np.all(v == 0.0) for v in sim.v)
        assert all(np.all(u == 0.0) for u in sim.u)
        b = sim.run([train], cfg)
        for ra, rb in zip(a.rasters[0], b.rasters[0]):
            assert np.array_equal(ra, rb)

    def test_reset_gives_silence_without_input(self):
        topo = build_feedforward([1, 1], [np.array([[1.0]])])
        out = run(topo, [SpikeTrain(times=[])], SimConfig(dt_s=DT, duration_s=0.02))
        assert out.spike_counts[0].sum() == 0


class TestDriveAssemblyLinearity:
    def test_doubling_pulse_levels_doubles_drive(self):
        rng = np.random.default_rng(4)
        w = np.abs(rng.normal(size=(6, 5)))
        levels = rng.uniform(0.0, 1e-3, 5)
        assert np.allclose(w @ (2 * levels), 2 * (w @ levels))

    def test_chain_spike_propagation_matches_scalar_oracle(self):
        # 3-neuron chain; oracle is an independent scalar reimplementation
        w1, w2 = 1.0, 0.8
        topo = build_feedforward([1, 1, 1],
                                 [np.array([[w1]]), np.array([[w2]])],
                                 params=REG)
        train = demo_train()
        cfg = SimConfig(dt_s=DT, duration_s=0.12, record_traces=True)
        out = run(topo, [train], cfg)

        # scalar oracle: rectangular pulse rendering + Euler update, plain floats
        p = REG
        n_steps = int(round(0.12 / DT))
        width_steps = int(round(WIDTH / DT))
        detect = 0.1 * p.k2 * (p.vd - p.vth2) ** 2
        starts = [int(np.ceil(round(t / DT, 9))) for t in train.times]
        level0 = np.zeros(n_steps + 1)
        for s in starts:
            level0[s:min(s + width_steps, n_steps + 1)] += AMP
        v = [0.0, 0.0]
        u = [0.0, 0.0]
        prev_i = [0.0, 0.0]
        pulse1_until = -1
        spikes = [[], []]
        for k in range(n_steps):
            drive = [w1 * level0[k], w2 * (AMP if k < pulse1_until else 0.0)]
            new_i = []
            fired1 = False
            for n in (0, 1):
                dv = (p.r1 * drive[n] - p.r1 * p.k1 * max(0.0, u[n] - p.vth1) ** 2
                      - v[n]) / (p.r1 * p.c1)
                du = (p.r2 * p.k3 * max(0.0, v[n] - p.vth3 - u[n]) ** 2
                      - u[n]) / (p.r2 * p.c2)
                v[n] = min(max(v[n] + DT * dv, 0.0), p.vd)
                u[n] = min(max(u[n] + DT * du, 0.0), p.vd)
                i_out = p.k2 * max(0.0, v[n] - p.vth2) ** 2
                if i_out >= detect and prev_i[n] < detect:
                    spikes[n].append((k + 1) * DT)
                    if n == 0:
                        fired1 = True
                prev_i[n] = i_out
                new_i.append(i_out)
            if fired1:
                pulse1_until = k + 1 + width_steps
        assert len(spikes[0]) > 0
        np.testing.assert_allclose(out.rasters[0][0], spikes[0], atol=1e-12)
        np.testing.assert_allclose(out.rasters[1][0], spikes[1], atol=1e-12)


class TestWtaBehavior:
    def test_zero_inhibition_equals_feedforward(self):
        rng = np.random.default_rng(6)
        w = np.abs(rng.normal(size=(3, 2)))
        wta_topo = build_wta(2, 3, w, inh_strength=0.0, exc_to_inh=1.0)
        ff_topo = build_feedforward([2, 3], [w])
        trains = [SpikeTrain(times=np.sort(rng.uniform(0, 0.05, 25)), channel_id=i)
                  for i in range(2)]
        cfg = SimConfig(dt_s=DT, duration_s=0.08)
        a = run(wta_topo, trains, cfg)
        b = run(ff_topo, trains, cfg)
        for ra, rb in zip(a.rasters[0], b.rasters[0]):
            assert np.array_equal(ra, rb)

    def test_inhibition_reduces_nonwinner_activity(self):
        rng = np.random.default_rng(7)
        w = np.abs(rng.normal(0.6, 0.1, size=(4, 3)))
        trains = [SpikeTrain(times=np.sort(rng.uniform(0, 0.1, 60)), channel_id=i)
                  for i in range(3)]
        cfg = SimConfig(dt_s=DT, duration_s=0.12)
        free = run(build_wta(3, 4, w, inh_strength=0.0), trains, cfg)
        curbed = run(build_wta(3, 4, w, inh_strength=2.0, exc_to_inh=5.0,
                               inh_params=presets.preset("fast")), trains, cfg)
        assert curbed.spike_counts[0].sum() < free.spike_counts[0].sum()

    def test_wta_rejects_multilayer(self):
        with pytest.raises(ValueError):
            Topology(
                input_size=2,
                layers=[LayerSpec(2, REG), LayerSpec(2, REG)],
                connections=[Connection(np.ones((2, 2)), np.zeros((2, 2))),
                             Connection(np.ones((2, 2)), np.zeros((2, 2)))],
                wta=WtaLinks(inh_params=REG, exc_to_inh=1.0, inh_to_exc=1.0),
            )


class TestBatchedInference:
    def test_batched_counts_match_sequential(self):
        rng = np.random.default_rng(8)
        topo = build_feedforward([4, 6, 3], [rng.normal(size=(6, 4)) * 0.8,
                                             rng.normal(size=(3, 6)) * 0.8])
        cfg = SimConfig(dt_s=DT, duration_s=0.05)
        batch = []
        for b in range(5):
            batch.append([
                SpikeTrain(times=np.sort(rng.uniform(0, 0.04, 30)), channel_id=i)
                for i in range(4)
            ])
        counts = run_batched_counts(topo, batch, cfg)
        for b in range(5):
            ref = run(topo, batch[b], cfg)
            np.testing.assert_array_equal(counts[0][b], ref.spike_counts[0])
            np.testing.assert_array_equal(counts[1][b], ref.spike_counts[1])

    def test_empty_batch(self):
        topo = build_feedforward([2, 2], [np.ones((2, 2))])
        counts = run_batched_counts(topo, [], SimConfig(dt_s=DT, duration_s=0.01))
        assert counts[0].shape == (0, 2)

    def test_wta_rejected(self):
        topo = build_wta(2, 2, np.ones((2, 2)), 1.0)
        with pytest.raises(ValueError):
            run_batched_counts(topo, [], SimConfig(dt_s=DT, duration_s=0.01))


class TestSerializationRoundTrip:
    def test_topology_json_round_trip(self):
        from optosnn.serialize import topology_from_json, topology_to_json
        rng = np.random.default_rng(9)
        topo = build_wta(3, 4, np.abs(rng.normal(size=(4, 3))), inh_strength=1.5)
        topo.layers[0].vth2_offset = rng.uniform(0, 0.01, 4)
        doc = topology_to_json(topo)
        back = topology_from_json(doc)
        assert back.input_size == topo.input_size
        np.testing.assert_array_equal(back.connections[0].w_exc,
                                      topo.connections[0].w_exc)
        np.testing.assert_array_equal(back.layers[0].vth2_offset,
                                      topo.layers[0].vth2_offset)
        assert back.wta.inh_to_exc == topo.wta.inh_to_exc
        assert topology_to_json(back) == doc
