import json

import numpy as np
import pytest

from driftfield.datasets import sample_prior
from driftfield.drift import DriftConfig, Scheme
from driftfield.errors import ConfigError, NumericalError
from driftfield.geometry import PointCloud, RngState
from driftfield.nnet import (
    Activation,
    AdamState,
    GeneratorParams,
    adam_step,
    drifting_loss_and_grad,
    forward,
    init_params,
    load_checkpoint,
    loss_and_grad_for_velocities,
    save_checkpoint,
    train,
)


def small_params(sizes, activation, seed):
    return init_params(list(sizes), activation, RngState(seed))


class TestGeneratorParams:
    def test_layer_chain_validation(self):
        with pytest.raises(ConfigError):
            GeneratorParams([np.zeros((2, 3)), np.zeros((4, 2))], [np.zeros(3), np.zeros(2)], Activation.RELU)
        with pytest.raises(ConfigError):
            GeneratorParams([np.zeros((2, 3))], [np.zeros(2)], Activation.RELU)
        with pytest.raises(ConfigError):
            GeneratorParams([], [], Activation.RELU)

    def test_rejects_non_finite(self):
        W = np.full((2, 2), np.nan)
        with pytest.raises(ConfigError):
            GeneratorParams([W], [np.zeros(2)], Activation.RELU)

    def test_shape_accessors(self):
        p = small_params([3, 8, 2], Activation.RELU, 1)
        assert p.d_in == 3 and p.d_out == 2
        assert p.layer_sizes == [3, 8, 2]

    def test_init_deterministic(self):
        a = small_params([2, 4, 2], Activation.TANH, 7)
        b = small_params([2, 4, 2], Activation.TANH, 7)
        for Wa, Wb in zip(a.weights, b.weights):
            assert np.array_equal(Wa, Wb)


class TestForward:
    def test_zero_params_give_zero_output(self):
        p = GeneratorParams(
            [np.zeros((2, 4)), np.zeros((4, 2))], [np.zeros(4), np.zeros(2)], Activation.RELU
        )
        E = PointCloud(np.random.default_rng(71).normal(size=(5, 2)))
        assert np.array_equal(forward(p, E).points, np.zeros((5, 2)))

    def test_single_identity_layer(self):
        p = GeneratorParams([np.eye(3)], [np.zeros(3)], Activation.RELU)
        E = PointCloud(np.random.default_rng(72).normal(size=(6, 3)))
        # single layer is the output layer: affine only, no activation
        assert np.array_equal(forward(p, E).points, E.points)

    @pytest.mark.parametrize("activation", list(Activation))
    def test_matches_per_neuron_loop(self, activation):
        p = small_params([3, 5, 2], activation, 73)
        E = PointCloud(np.random.default_rng(74).normal(size=(4, 3)))
        out = forward(p, E).points

        def act(z):
            return max(z, 0.0) if activation is Activation.RELU else np.tanh(z)

        for i in range(4):
            hidden = []
            for j in range(5):
                z = sum(E.points[i, k] * p.weights[0][k, j] for k in range(3)) + p.biases[0][j]
                hidden.append(act(z))
            for j in range(2):
                z = sum(hidden[k] * p.weights[1][k, j] for k in range(5)) + p.biases[1][j]
                assert out[i, j] == pytest.approx(z, rel=1e-12, abs=1e-14)

    def test_dimension_mismatch(self):
        p = small_params([3, 2], Activation.RELU, 1)
        with pytest.raises(ConfigError):
            forward(p, PointCloud(np.zeros((4, 2))))


class TestLossAndGrad:
    def test_loss_is_half_mean_squared_velocity(self):
        p = small_params([2, 6, 2], Activation.RELU, 75)
        E = PointCloud(np.random.default_rng(76).normal(size=(8, 2)))
        V = np.random.default_rng(77).normal(size=(8, 2))
        loss, _ = loss_and_grad_for_velocities(p, E, V)
        assert loss == 0.5 / 8 * np.sum(V * V)

    def test_zero_velocity_zero_gradients(self):
        p = small_params([2, 6, 2], Activation.TANH, 78)
        E = PointCloud(np.random.default_rng(79).normal(size=(5, 2)))
        loss, (gw, gb) = loss_and_grad_for_velocities(p, E, np.zeros((5, 2)))
        assert loss == 0.0
        assert all(np.all(g == 0.0) for g in gw)
        assert all(np.all(g == 0.0) for g in gb)

    def test_linear_layer_closed_form(self):
        W = np.random.default_rng(80).normal(size=(3, 2))
        p = GeneratorParams([W.copy()], [np.zeros(2)], Activation.RELU)
        gen = np.random.default_rng(81)
        E = PointCloud(gen.normal(size=(10, 3)))
        V = gen.normal(size=(10, 2))
        _, (gw, gb) = loss_and_grad_for_velocities(p, E, V)
        np.testing.assert_allclose(gw[0], -(E.points.T @ V) / 10, atol=1e-14)
        np.testing.assert_allclose(gb[0], -V.mean(axis=0), atol=1e-14)

    @pytest.mark.parametrize("activation", list(Activation))
    def test_matches_central_finite_differences(self, activation):
        p = small_params([3, 12, 2], activation, 82)
        gen = np.random.default_rng(83)
        E = PointCloud(gen.normal(size=(16, 3)))
        V = gen.normal(size=(16, 2))
        if activation is Activation.RELU:
            # finite differences need the hidden pre-activations away from the kink
            pre0 = E.points @ p.weights[0] + p.biases[0]
            assert np.abs(pre0).min() > 1e-4
        _, (gw, gb) = loss_and_grad_for_velocities(p, E, V)
        target = forward(p, E).points + V
        h = 1e-6

        def loss_at(params):
            out = forward(params, E).points
            return 0.5 / 16 * np.sum((out - target) ** 2)

        checked = 0
        for li in range(2):
            W = p.weights[li]
            coords = [(i, j) for i in range(W.shape[0]) for j in range(W.shape[1])]
            picks = gen.permutation(len(coords))[:20]
            for flat in picks:
                i, j = coords[flat]
                W[i, j] += h
                up = loss_at(p)
                W[i, j] -= 2 * h
                dn = loss_at(p)
                W[i, j] += h
                fd = (up - dn) / (2 * h)
                an = gw[li][i, j]
                assert abs(fd - an) <= 1e-5 * max(abs(fd), abs(an), 1e-8)
                checked += 1
            for j in gen.permutation(p.biases[li].shape[0])[:20]:
                p.biases[li][j] += h
                up = loss_at(p)
                p.biases[li][j] -= 2 * h
                dn = loss_at(p)
                p.biases[li][j] += h
                fd = (up - dn) / (2 * h)
                an = gb[li][j]
                assert abs(fd - an) <= 1e-5 * max(abs(fd), abs(an), 1e-8)
                checked += 1
        assert checked >= 40

    def test_stop_gradient_contract(self):
        # gradients depend on the drift only through its value: the same
        # injected V must give the same grads as the full pipeline
        p = small_params([2, 8, 2], Activation.RELU, 84)
        gen = np.random.default_rng(85)
        E = PointCloud(gen.normal(size=(12, 2)))
        Y = PointCloud(gen.normal(size=(12, 2)) + 1.0)
        cfg = DriftConfig(Scheme.ONE_SIDED, tau=0.5)
        loss_full, (gw_full, gb_full) = drifting_loss_and_grad(p, E, Y, cfg)

        from driftfield.drift import drift_field

        X = forward(p, E)
        V = drift_field(X, Y, X, cfg).velocities
        loss_inj, (gw_inj, gb_inj) = loss_and_grad_for_velocities(p, E, V)
        assert loss_full == loss_inj
        for a, b in zip(gw_full + gb_full, gw_inj + gb_inj):
            assert np.array_equal(a, b)

    def test_batch_size_mismatch(self):
        p = small_params([2, 2], Activation.RELU, 1)
        E = PointCloud(np.zeros((3, 2)))
        Y = PointCloud(np.zeros((4, 2)))
        with pytest.raises(ConfigError):
            drifting_loss_and_grad(p, E, Y, DriftConfig(Scheme.ONE_SIDED, tau=1.0))


class TestAdam:
    def test_first_step_is_signed_lr(self):
        p = GeneratorParams([np.array([[1.0]])], [np.array([0.5])], Activation.RELU)
        state = AdamState.init_like(p, lr=0.01)
        grads = ([np.array([[4.0]])], [np.array([-2.0])])
        adam_step(p, grads, state)
        # after one bias-corrected step the update is lr * g / (|g| + eps)
        assert p.weights[0][0, 0] == pytest.approx(1.0 - 0.01, rel=1e-6)
        assert p.biases[0][0] == pytest.approx(0.5 + 0.01, rel=1e-6)
        assert state.step == 1

    def test_accumulators_track_shapes(self):
        p = small_params([3, 5, 2], Activation.RELU, 86)
        state = AdamState.init_like(p)
        assert all(m.shape == W.shape for m, W in zip(state.m_w, p.weights))
        assert all(v.shape == b.shape for v, b in zip(state.v_b, p.biases))


class TestTrain:
    @staticmethod
    def gaussian_sampler(center):
        def sampler(n, rng):
            return PointCloud(rng.generator.normal(center, 0.3, size=(n, 2)))
        return sampler

    def test_zero_iterations_returns_params_unchanged(self):
        p = small_params([2, 4, 2], Activation.RELU, 87)
        before = [W.copy() for W in p.weights]
        cfg = DriftConfig(Scheme.ONE_SIDED, tau=0.5)
        out, records = train(p, self.gaussian_sampler(1.0), cfg, iters=0, batch_n=16,
                             lr=1e-3, eval_every=10, rng=RngState(1))
        assert records == []
        for W, W0 in zip(out.weights, before):
            assert np.array_equal(W, W0)

    def test_record_schedule_and_monotone_iterations(self):
        p = small_params([2, 8, 2], Activation.RELU, 88)
        cfg = DriftConfig(Scheme.ONE_SIDED, tau=0.5)
        _, records = train(p, self.gaussian_sampler(1.0), cfg, iters=25, batch_n=16,
                           lr=1e-3, eval_every=10, rng=RngState(2))
        assert [r.iteration for r in records] == [10, 20, 25]
        assert all(np.isfinite(r.loss) and np.isfinite(r.w2sq) for r in records)

    def test_seeded_determinism(self):
        cfg = DriftConfig(Scheme.SINKHORN, tau=0.5, T=7)
        runs = []
        for _ in range(2):
            p = small_params([2, 8, 2], Activation.RELU, 89)
            _, records = train(p, self.gaussian_sampler(2.0), cfg, iters=12, batch_n=20,
                               lr=1e-3, eval_every=5, rng=RngState(3))
            runs.append((p, records))
        (p1, r1), (p2, r2) = runs
        assert [(r.iteration, r.loss, r.w2sq) for r in r1] == [(r.iteration, r.loss, r.w2sq) for r in r2]
        for W1, W2 in zip(p1.weights, p2.weights):
            assert np.array_equal(W1, W2)

    def test_training_reduces_w2sq_on_easy_target(self):
        p = small_params([2, 16, 2], Activation.RELU, 90)
        cfg = DriftConfig(Scheme.SINKHORN, tau=0.5, T=11)
        _, records = train(p, self.gaussian_sampler(3.0), cfg, iters=400, batch_n=32,
                           lr=5e-3, eval_every=100, rng=RngState(4))
        assert records[-1].w2sq < 0.5 * records[0].w2sq

    def test_non_finite_loss_aborts_with_iteration(self, monkeypatch):
        def explode(params, E, Y, cfg):
            return float("nan"), None

        monkeypatch.setattr("driftfield.nnet.drifting_loss_and_grad", explode)
        p = small_params([2, 4, 2], Activation.RELU, 91)
        cfg = DriftConfig(Scheme.ONE_SIDED, tau=0.5)
        with pytest.raises(NumericalError, match="iteration 1"):
            train(p, self.gaussian_sampler(1.0), cfg, iters=5, batch_n=8,
                  lr=1e-3, eval_every=5, rng=RngState(5))

    def test_parameter_validation(self):
        p = small_params([2, 4, 2], Activation.RELU, 92)
        cfg = DriftConfig(Scheme.ONE_SIDED, tau=0.5)
        sampler = self.gaussian_sampler(1.0)
        with pytest.raises(ConfigError):
            train(p, sampler, cfg, iters=-1, batch_n=8, lr=1e-3, eval_every=5, rng=RngState(1))
        with pytest.raises(ConfigError):
            train(p, sampler, cfg, iters=1, batch_n=0, lr=1e-3, eval_every=5, rng=RngState(1))
        with pytest.raises(ConfigError):
            train(p, sampler, cfg, iters=1, batch_n=8, lr=1e-3, eval_every=0, rng=RngState(1))


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        p = small_params([3, 7, 2], Activation.TANH, 93)
        path = tmp_path / "ckpt.json"
        save_checkpoint(p, path)
        q = load_checkpoint(path)
        assert q.activation is Activation.TANH
        assert q.layer_sizes == p.layer_sizes
        for Wp, Wq in zip(p.weights, q.weights):
            assert np.array_equal(Wp, Wq)
        for bp, bq in zip(p.biases, q.biases):
            assert np.array_equal(bp, bq)

    def test_file_is_sorted_json(self, tmp_path):
        p = small_params([2, 3, 2], Activation.RELU, 94)
        path = tmp_path / "ckpt.json"
        save_checkpoint(p, path)
        payload = json.loads(path.read_text())
        assert list(payload) == sorted(payload)
        assert payload["layer_sizes"] == [2, 3, 2]

    def test_forward_agrees_after_reload(self, tmp_path):
        p = small_params([2, 5, 2], Activation.RELU, 95)
        path = tmp_path / "ckpt.json"
        save_checkpoint(p, path)
        q = load_checkpoint(path)
        E = sample_prior(10, 2, RngState(96))
        assert np.array_equal(forward(p, E).points, forward(q, E).points)
