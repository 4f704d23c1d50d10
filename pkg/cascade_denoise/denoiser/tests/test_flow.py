import numpy as np
from django.test import SimpleTestCase

from autodiff import ops
from autodiff.exceptions import DimensionError, ParameterError
from autodiff.gradcheck import grad_check
from autodiff.params import ParamSet
from autodiff.tensor import Tape, Tensor
from denoiser.flow import (
    FlowField, GruState, build_corr_pyramid, encode_context, encode_features, endpoint_error,
    gru_gates, gru_update, init_flow, lookup, refine_flow, upsample_flow,
)

from .factories import random_triplet, tiny_config


def flow_params(config, seed=0):
    params = ParamSet()
    init_flow(params, config, np.random.default_rng(seed))
    return params


class EncoderTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.params = flow_params(self.config)
        self.triplet = random_triplet(self.config)

    def test_feature_and_context_shapes(self):
        features = encode_features(self.triplet.ref_pre, self.triplet.ref_noisy, self.params)
        context = encode_context(self.triplet.ref_pre, self.params)
        self.assertEqual(features.shape, (1, 3, 4, 4))
        self.assertEqual(context.shape, (1, 2, 4, 4))
        self.assertTrue(np.all(context.data >= 0))

    def test_mismatched_inputs(self):
        with self.assertRaises(DimensionError):
            encode_features(self.triplet.ref_pre, Tensor(np.zeros((1, 6, 6))), self.params)

    def test_odd_extent_rejected(self):
        odd = Tensor(np.zeros((1, 7, 7)))
        with self.assertRaises(DimensionError):
            encode_features(odd, odd, self.params)


class CorrelationPyramidTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(4)
        self.f1 = Tensor(rng.standard_normal((1, 3, 4, 4)))
        self.f2 = Tensor(rng.standard_normal((1, 3, 4, 4)))

    def test_level_shapes(self):
        pyramid = build_corr_pyramid(self.f1, self.f2, levels=2)
        self.assertEqual([level.shape for level in pyramid.levels], [(16, 1, 4, 4), (16, 1, 2, 2)])

    def test_entries_are_inner_products(self):
        volume = build_corr_pyramid(self.f1, self.f2, levels=1).volume(0)
        a, b = self.f1.data[0], self.f2.data[0]
        for y, x, v, u in ((0, 0, 0, 0), (1, 2, 3, 0), (3, 3, 2, 1)):
            self.assertAlmostEqual(volume[y, x, v, u], float(a[:, y, x] @ b[:, v, u]), places=12)

    def test_swapping_features_transposes_volume(self):
        forward = build_corr_pyramid(self.f1, self.f2, levels=1).volume(0)
        backward = build_corr_pyramid(self.f2, self.f1, levels=1).volume(0)
        np.testing.assert_allclose(forward, backward.transpose(2, 3, 0, 1), rtol=1e-12)

    def test_all_ones_features(self):
        ones = Tensor(np.ones((1, 4, 4, 4)))
        pyramid = build_corr_pyramid(ones, ones, levels=3)
        for level in range(3):
            np.testing.assert_allclose(pyramid.volume(level), 4.0)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            build_corr_pyramid(self.f1, Tensor(np.zeros((1, 3, 2, 2))))


class LookupTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(8)
        self.f1 = Tensor(rng.standard_normal((1, 3, 4, 4)))
        self.f2 = Tensor(rng.standard_normal((1, 3, 4, 4)))
        self.pyramid = build_corr_pyramid(self.f1, self.f2, levels=2)

    def test_channel_count(self):
        out = lookup(self.pyramid, Tensor(np.zeros((1, 2, 4, 4))), 1)
        self.assertEqual(out.shape, (1, 2 * 9, 4, 4))

    def test_zero_flow_reads_neighbourhood(self):
        out = lookup(self.pyramid, Tensor(np.zeros((1, 2, 4, 4))), 1).data[0]
        volume = self.pyramid.volume(0)
        for y in (1, 2):
            for x in (1, 2):
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        channel = (dy + 1) * 3 + (dx + 1)
                        self.assertAlmostEqual(out[channel, y, x], volume[y, x, y + dy, x + dx], places=12)

    def test_integer_flow_shifts_centre(self):
        flow = np.zeros((1, 2, 4, 4))
        flow[:, 0] = 1.0
        out = lookup(self.pyramid, FlowField(flow=Tensor(flow), iteration=1), 1).data[0]
        volume = self.pyramid.volume(0)
        for y in range(4):
            for x in range(3):
                self.assertAlmostEqual(out[4, y, x], volume[y, x, y, x + 1], places=12)

    def test_linear_in_features(self):
        f2 = self.f2
        flow = Tensor(np.full((1, 2, 4, 4), 0.3))
        f1 = Tensor(self.f1.data.copy(), requires_grad=True)
        report = grad_check(lambda f: lookup(build_corr_pyramid(f, f2, 2), flow, 1), [f1], step=1e-4)
        self.assertTrue(report.passed, report.max_rel_errors)

    def test_radius_must_be_positive(self):
        with self.assertRaises(ParameterError):
            lookup(self.pyramid, Tensor(np.zeros((1, 2, 4, 4))), 0)


class GruTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.params = flow_params(self.config)
        rng = np.random.default_rng(2)
        self.h = Tensor(np.tanh(rng.standard_normal((1, 3, 4, 4))))
        inputs = self.config.lookup_channels + 2 + self.config.context_dim
        self.x = Tensor(rng.standard_normal((1, inputs, 4, 4)))

    def test_gates_in_unit_interval(self):
        z, r = gru_gates(self.h, self.x, self.params)
        for gate in (z, r):
            self.assertTrue(np.all((gate.data > 0) & (gate.data < 1)))

    def test_state_bounded(self):
        state, delta = gru_update(GruState(h=self.h, context=None), self.x, self.params, self.config)
        self.assertTrue(np.all(np.abs(state.h.data) <= 1))
        self.assertEqual(delta.shape, (1, 2, 4, 4))

    def test_closed_update_gate_keeps_state(self):
        self.params["flow.gru.z.weight"].data[:] = 0.0
        self.params["flow.gru.z.bias"].data[:] = -50.0
        state, _ = gru_update(GruState(h=self.h, context=None), self.x, self.params, self.config)
        np.testing.assert_allclose(state.h.data, self.h.data, atol=1e-15)

    def test_wrong_input_channels(self):
        with self.assertRaises(DimensionError):
            gru_update(GruState(h=self.h, context=None), Tensor(np.zeros((1, 5, 4, 4))), self.params, self.config)

    def test_gradients_match_finite_differences(self):
        config = tiny_config(hidden_dim=2, corr_levels=1)
        inputs = config.lookup_channels + 2 + config.context_dim
        names = ["flow.gru.z.weight", "flow.gru.r.weight", "flow.gru.h.weight", "flow.head.conv2.weight"]
        for seed in range(5):
            rng = np.random.default_rng(10 + seed)
            params = flow_params(config, seed)
            H, W = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            h = Tensor(np.tanh(rng.standard_normal((1, 2, H, W))), requires_grad=True)
            x = Tensor(rng.standard_normal((1, inputs, H, W)), requires_grad=True)

            def step(h, x, *weights):
                state, delta = gru_update(GruState(h=h, context=None), x, params, config)
                return ops.concat([state.h, delta], axis=1)

            report = grad_check(step, [h, x] + [params[name] for name in names], step=1e-5)
            self.assertTrue(report.passed, (seed, (H, W), report.max_rel_errors))


class RefineFlowTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.params = flow_params(self.config)
        self.triplet = random_triplet(self.config, seed=3)

    def test_one_sequence_per_supporting_frame(self):
        sequences = refine_flow(self.triplet, 3, self.params, self.config)
        self.assertEqual(len(sequences), 2)
        for sequence in sequences:
            self.assertEqual([f.iteration for f in sequence], [1, 2, 3])
            for field in sequence:
                self.assertEqual(field.flow.shape, (1, 2, 4, 4))
                self.assertTrue(np.all(np.isfinite(field.flow.data)))

    def test_deterministic(self):
        first = refine_flow(self.triplet, 2, self.params, self.config)
        second = refine_flow(self.triplet, 2, self.params, self.config)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a[-1].flow.data, b[-1].flow.data)

    def test_prefix_independent_of_iteration_count(self):
        short = refine_flow(self.triplet, 2, self.params, self.config)
        long = refine_flow(self.triplet, 4, self.params, self.config)
        np.testing.assert_array_equal(short[0][1].flow.data, long[0][1].flow.data)

    def test_weights_shared_across_iterations(self):
        before = self.params.count()
        self.params.zero_grad()
        with Tape() as tape:
            sequences = refine_flow(self.triplet, 4, self.params, self.config)
            tape.backward(sequences[0][-1].flow * 1.0 + sequences[1][-1].flow * 1.0,
                          np.ones((1, 2, 4, 4)))
        self.assertEqual(self.params.count(), before)
        for name in ("flow.gru.z.weight", "flow.head.conv2.weight", "flow.fnet.conv1.weight"):
            self.assertIsNotNone(self.params[name].grad, name)

    def test_needs_an_iteration(self):
        with self.assertRaises(ParameterError):
            refine_flow(self.triplet, 0, self.params, self.config)


class FlowHelperTests(SimpleTestCase):
    def test_upsample_doubles_extent_and_values(self):
        flow = np.zeros((1, 2, 3, 3))
        flow[:, 0], flow[:, 1] = 1.5, -0.5
        up = upsample_flow(Tensor(flow))
        self.assertEqual(up.shape, (1, 2, 6, 6))
        np.testing.assert_allclose(up.data[:, 0], 3.0)
        np.testing.assert_allclose(up.data[:, 1], -1.0)

    def test_endpoint_error(self):
        self.assertAlmostEqual(endpoint_error(Tensor(np.zeros((1, 2, 2, 2))), (3.0, 4.0)).item(), 5.0)

    def test_mean_magnitude(self):
        flow = np.zeros((1, 2, 2, 2))
        flow[:, 1] = 2.0
        self.assertEqual(FlowField(flow=Tensor(flow), iteration=1).mean_magnitude, 2.0)
