import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from autodiff.exceptions import ParameterError, ParseError
from autodiff.params import ParamSet, init_conv


class ParamSetTests(SimpleTestCase):
    def make(self):
        params = ParamSet()
        init_conv(params, "enc.conv1", 2, 3, 3, np.random.default_rng(0))
        params.add("scalar", 1.25)
        return params

    def test_round_trip_is_bit_exact(self):
        params = self.make()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "params.bin"
            params.save(path)
            loaded = ParamSet.load(path)
        self.assertEqual(list(loaded), list(params))
        for name in params:
            self.assertEqual(loaded[name].shape, params[name].shape)
            self.assertEqual(loaded[name].data.tobytes(), params[name].data.tobytes())
            self.assertTrue(loaded[name].requires_grad)

    def test_names_are_unique(self):
        params = self.make()
        with self.assertRaises(ParameterError):
            params.add("scalar", 0.0)

    def test_init_bound(self):
        params = self.make()
        bound = np.sqrt(1.0 / (2 * 9))
        self.assertLessEqual(np.abs(params["enc.conv1.weight"].data).max(), bound)
        self.assertEqual(params.count(), 3 * 2 * 9 + 3 + 1)

    def test_truncated_file(self):
        params = self.make()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "params.bin"
            params.save(path)
            blob = path.read_bytes()
        with self.assertRaisesRegex(ParseError, "byte offset"):
            ParamSet.from_bytes(blob[:-5])

    def test_bad_magic(self):
        with self.assertRaises(ParseError):
            ParamSet.from_bytes(b"NOPE" + bytes(8))
