import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from autodiff.exceptions import DimensionError, ParameterError, UndefinedCorrelationError
from autodiff.tensor import Tensor
from evaluation.heatmap import emit_heatmap, heatmap_image
from evaluation.metrics import format_metric, pearson, psnr, ssim
from frames.netpbm import read_frame


class PsnrTests(SimpleTestCase):
    def test_identical_is_infinite(self):
        a = np.random.default_rng(0).uniform(0, 1, (1, 4, 4))
        self.assertEqual(psnr(a, a), math.inf)

    def test_full_scale_error_is_zero_db(self):
        self.assertEqual(psnr(np.zeros((3, 3)), np.ones((3, 3))), 0.0)

    def test_known_mse(self):
        self.assertAlmostEqual(psnr(np.zeros((2, 2)), np.full((2, 2), 0.1)), 20.0, places=10)

    def test_symmetric_and_accepts_tensors(self):
        rng = np.random.default_rng(1)
        a, b = rng.uniform(0, 1, (2, 1, 5, 5))
        self.assertEqual(psnr(Tensor(a), Tensor(b)), psnr(b, a))

    def test_shape_and_peak_checks(self):
        with self.assertRaises(DimensionError):
            psnr(np.zeros((2, 2)), np.zeros((3, 3)))
        with self.assertRaises(ParameterError):
            psnr(np.zeros((2, 2)), np.ones((2, 2)), peak=0)


class SsimTests(SimpleTestCase):
    def test_identity_is_one(self):
        a = np.random.default_rng(2).uniform(0, 1, (1, 12, 10))
        self.assertAlmostEqual(ssim(a, a), 1.0, places=12)

    def test_constant_images_oracle(self):
        c1, c2 = 0.01 ** 2, 0.03 ** 2
        expected = ((2 * 0.2 * 0.6 + c1) * c2) / ((0.2 ** 2 + 0.6 ** 2 + c1) * c2)
        self.assertAlmostEqual(ssim(np.full((8, 8), 0.2), np.full((8, 8), 0.6)), expected, places=12)

    def test_anticorrelated_below_correlated(self):
        a = np.random.default_rng(3).uniform(0, 1, (10, 10))
        self.assertLess(ssim(a, 1.0 - a), ssim(a, 0.5 * a + 0.25))

    def test_negation_is_not_identical(self):
        a = np.random.default_rng(7).uniform(0, 1, (9, 9))
        self.assertLess(ssim(a, 1.0 - a), 1.0)

    def test_matches_direct_window_loop(self):
        rng = np.random.default_rng(8)
        a, b = rng.uniform(0, 1, (2, 11, 10))
        c1, c2 = 0.01 ** 2, 0.03 ** 2
        values = []
        for y in range(11 - 7):
            for x in range(10 - 7):
                wa, wb = a[y:y + 8, x:x + 8], b[y:y + 8, x:x + 8]
                cov = np.mean((wa - wa.mean()) * (wb - wb.mean()))
                values.append(((2 * wa.mean() * wb.mean() + c1) * (2 * cov + c2))
                              / ((wa.mean() ** 2 + wb.mean() ** 2 + c1) * (wa.var() + wb.var() + c2)))
        self.assertAlmostEqual(ssim(a, b), float(np.mean(values)), delta=1e-10)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        a, b = rng.uniform(0, 1, (2, 9, 9))
        self.assertAlmostEqual(ssim(a, b), ssim(b, a), places=12)

    def test_colour_uses_channel_mean(self):
        a = np.random.default_rng(5).uniform(0, 1, (3, 8, 8))
        b = np.repeat(a.mean(axis=0, keepdims=True), 3, axis=0)
        self.assertAlmostEqual(ssim(a, b), 1.0, places=12)

    def test_image_smaller_than_window(self):
        with self.assertRaises(DimensionError):
            ssim(np.zeros((4, 4)), np.zeros((4, 4)))


class PearsonTests(SimpleTestCase):
    def test_perfect_correlation(self):
        x = np.array([0.1, 0.4, 0.2, 0.9])
        self.assertAlmostEqual(pearson(x, 2 * x + 1), 1.0, places=12)
        self.assertAlmostEqual(pearson(x, -x), -1.0, places=12)

    def test_hand_computed(self):
        self.assertAlmostEqual(pearson([1, 2, 3], [1, 3, 2]), 0.5, places=12)

    def test_five_points(self):
        self.assertAlmostEqual(pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]), 0.8, places=12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(6)
        x, y = rng.standard_normal((2, 20))
        self.assertAlmostEqual(pearson(3 * x - 2, 0.5 * y + 7), pearson(x, y), places=12)

    def test_zero_variance(self):
        with self.assertRaises(UndefinedCorrelationError):
            pearson([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])

    def test_needs_two_points(self):
        with self.assertRaises(ParameterError):
            pearson([1.0], [2.0])
        with self.assertRaises(DimensionError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])


class FormatMetricTests(SimpleTestCase):
    def test_cells(self):
        self.assertEqual(format_metric(math.inf), "inf")
        self.assertEqual(format_metric(None), "")
        self.assertEqual(format_metric(0.1), "0.1")
        self.assertEqual(format_metric(3), "3.0")


class HeatmapTests(SimpleTestCase):
    def test_constant_grid_is_mid_grey(self):
        np.testing.assert_array_equal(heatmap_image(np.full((2, 3), 7.0)), 0.5)

    def test_normalised_and_upsampled(self):
        image = heatmap_image([[0.0, 2.0], [2.0, 0.0]], size=(4, 6))
        expected = np.array([[0, 0, 0, 1, 1, 1]] * 2 + [[1, 1, 1, 0, 0, 0]] * 2, dtype=np.float64)
        np.testing.assert_array_equal(image, expected)

    def test_emit_writes_a_frame(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = emit_heatmap([[1.0, 3.0]], Path(tmp) / "maps" / "u.pgm", size=(2, 4))
            frame = read_frame(path)
        self.assertEqual(frame.shape, (1, 2, 4))
        np.testing.assert_array_equal(frame.data[0], [[0, 0, 1, 1], [0, 0, 1, 1]])

    def test_rejects_non_grid(self):
        with self.assertRaises(ParameterError):
            heatmap_image([1.0, 2.0])
