import numpy as np
from django.test import SimpleTestCase

from autodiff.exceptions import DomainError
from autodiff.params import ParamSet
from denoiser.optim import AdamState, adamw_step, clip_grad_norm, gradients
from denoiser.schemas import TrainConfig


class AdamWTests(SimpleTestCase):
    def setUp(self):
        self.params = ParamSet()
        self.params.add("w", np.array([1.0]))
        self.params.add("predenoise.w", np.array([1.0]))

    def test_first_step_moves_by_learning_rate(self):
        config = TrainConfig(lr=0.1, weight_decay=0.0)
        adamw_step(self.params, {"w": np.array([0.5])}, AdamState(), config)
        self.assertAlmostEqual(self.params["w"].data[0], 0.9, places=6)

    def test_decay_is_decoupled(self):
        config = TrainConfig(lr=0.1, weight_decay=0.1)
        adamw_step(self.params, {"w": np.array([0.0])}, AdamState(), config)
        self.assertAlmostEqual(self.params["w"].data[0], 0.99, places=12)

    def test_zero_learning_rate_is_a_no_op(self):
        config = TrainConfig(lr=0.0)
        adamw_step(self.params, {"w": np.array([3.0])}, AdamState(), config)
        self.assertEqual(self.params["w"].data[0], 1.0)

    def test_frozen_prefix_skipped(self):
        config = TrainConfig(lr=0.1)
        state = adamw_step(self.params, {"w": np.array([1.0]), "predenoise.w": np.array([1.0])},
                           AdamState(), config, frozen=("predenoise.",))
        self.assertEqual(self.params["predenoise.w"].data[0], 1.0)
        self.assertNotIn("predenoise.w", state.steps)
        self.assertEqual(state.steps["w"], 1)

    def test_step_counts_are_per_parameter(self):
        config = TrainConfig(lr=0.1)
        state = AdamState()
        adamw_step(self.params, {"w": np.array([1.0])}, state, config)
        adamw_step(self.params, {"w": np.array([1.0]), "predenoise.w": np.array([1.0])}, state, config)
        self.assertEqual(state.steps, {"w": 2, "predenoise.w": 1})

    def test_learning_rate_override(self):
        config = TrainConfig(lr=0.1, weight_decay=0.0)
        adamw_step(self.params, {"w": np.array([2.0])}, AdamState(), config, lr=0.01)
        self.assertAlmostEqual(self.params["w"].data[0], 0.99, places=6)

    def test_non_finite_gradient(self):
        with self.assertRaises(DomainError):
            adamw_step(self.params, {"w": np.array([np.nan])}, AdamState(), TrainConfig())


class GradientTests(SimpleTestCase):
    def test_clip_scales_to_max_norm(self):
        grads, norm = clip_grad_norm({"a": np.array([3.0]), "b": np.array([4.0])}, 1.0)
        self.assertEqual(norm, 5.0)
        np.testing.assert_allclose(grads["a"], [0.6])
        np.testing.assert_allclose(grads["b"], [0.8])

    def test_clip_leaves_small_gradients(self):
        grads, norm = clip_grad_norm({"a": np.array([0.3])}, 1.0)
        self.assertAlmostEqual(norm, 0.3)
        np.testing.assert_array_equal(grads["a"], [0.3])

    def test_clip_rejects_non_finite(self):
        with self.assertRaises(DomainError):
            clip_grad_norm({"a": np.array([np.inf])}, 1.0)

    def test_gradients_skips_missing(self):
        params = ParamSet()
        params.add("a", np.zeros(2))
        params.add("b", np.zeros(2))
        params["a"].grad = np.ones(2)
        self.assertEqual(list(gradients(params)), ["a"])
