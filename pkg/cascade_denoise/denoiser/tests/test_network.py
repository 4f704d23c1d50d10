import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from autodiff.exceptions import DimensionError
from autodiff.params import ParamSet
from autodiff.tensor import Tensor
from denoiser.network import CascadeModel
from autodiff.gradcheck import grad_check
from denoiser.predenoise import PreDenoiser, init_predenoiser, predenoise, predenoise_padded
from denoiser.schemas import ExitPolicy

from .factories import random_triplet, tiny_config


class PreDenoiserTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config(predenoise_depth=2)
        self.params = ParamSet()
        init_predenoiser(self.params, self.config, np.random.default_rng(0))

    def test_preserves_shape(self):
        frame = Tensor(np.random.default_rng(1).uniform(0, 1, (1, 8, 12)))
        self.assertEqual(predenoise(frame, self.params, self.config).shape, (1, 8, 12))

    def test_zero_output_layer_is_identity(self):
        self.params["predenoise.out.weight"].data[:] = 0.0
        self.params["predenoise.out.bias"].data[:] = 0.0
        frame = Tensor(np.random.default_rng(2).uniform(0, 1, (1, 8, 8)))
        np.testing.assert_array_equal(PreDenoiser(self.params, self.config)(frame).data, frame.data)

    def test_extents_must_divide_by_depth(self):
        with self.assertRaises(DimensionError):
            predenoise(Tensor(np.zeros((1, 6, 8))), self.params, self.config)

    def test_depth_property(self):
        self.assertEqual(PreDenoiser(self.params, self.config).depth, 2)

    def test_padded_matches_plain_on_divisible_extents(self):
        frame = Tensor(np.random.default_rng(3).uniform(0, 1, (1, 8, 12)))
        np.testing.assert_array_equal(predenoise_padded(frame, self.params, self.config).data,
                                      predenoise(frame, self.params, self.config).data)

    def test_padded_equals_edge_padded_crop(self):
        data = np.random.default_rng(4).uniform(0, 1, (1, 9, 10))
        out = predenoise_padded(Tensor(data), self.params, self.config)
        reference = predenoise(Tensor(np.pad(data, ((0, 0), (0, 3), (0, 2)), mode="edge")), self.params, self.config)
        self.assertEqual(out.shape, (1, 9, 10))
        np.testing.assert_allclose(out.data, reference.data[:, :9, :10], atol=1e-12)

    def test_padded_gradients(self):
        frame = Tensor(np.random.default_rng(5).uniform(0, 1, (1, 5, 6)), requires_grad=True)
        weight = self.params["predenoise.out.weight"]
        report = grad_check(lambda x, w: predenoise_padded(x, self.params, self.config), [frame, weight], step=1e-5)
        self.assertTrue(report.passed, report.max_rel_errors)


class CascadeModelTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.model = CascadeModel.initialize(self.config, seed=11)

    def test_initialization_is_seeded(self):
        other = CascadeModel.initialize(self.config, seed=11)
        for name in self.model.params:
            np.testing.assert_array_equal(other.params[name].data, self.model.params[name].data)

    def test_parameter_groups(self):
        names = self.model.params.names()
        for prefix in ("predenoise.", "flow.fnet.", "flow.cnet.", "flow.gru.", "recon.align.", "recon.fuse."):
            self.assertTrue(any(name.startswith(prefix) for name in names), prefix)

    def test_save_and_load_reproduce_outputs(self):
        triplet = random_triplet(self.config, seed=1)
        policy = ExitPolicy(enabled=False, max_iters=2)
        before, _ = self.model.forward(triplet, policy)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "model.params"
            self.model.save(path)
            self.assertTrue(CascadeModel.sidecar(path).is_file())
            loaded = CascadeModel.load(path)
        self.assertEqual(loaded.config, self.config)
        after, _ = loaded.forward(triplet, policy)
        np.testing.assert_array_equal(after[-1].s.data, before[-1].s.data)
        np.testing.assert_array_equal(after[-1].u.data, before[-1].u.data)

    def test_sidecar_name(self):
        self.assertEqual(CascadeModel.sidecar("runs/a.params").name, "a.params.json")
