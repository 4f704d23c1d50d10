"""
Measured checks on a toy-scale training run. Slow; enabled with
CASCADE_DENOISE_ACCEPTANCE=1.
"""
import os
import unittest

import numpy as np
from django.test import SimpleTestCase

from denoiser.patch_match import PatchTriplet, assemble_triplets
from denoiser.schemas import ExitPolicy, TrainConfig
from denoiser.trainer import REFERENCE, TrainingSource, train
from evaluation.bench import sequence_quality
from evaluation.metrics import pearson, psnr
from evaluation.pipeline import denoise_video
from frames.schemas import GaussianNoise, SuiteSpec
from frames.synth import VideoSequence, add_noise, generate_suite, synth_sequence

ENABLED = os.environ.get("CASCADE_DENOISE_ACCEPTANCE") == "1"
MAX_ITERS = 4
SIGMAS = [0.02, 0.05, 0.1]


def mse(a, b):
    return float(np.mean((a - b) ** 2))


@unittest.skipUnless(ENABLED, "set CASCADE_DENOISE_ACCEPTANCE=1 to run")
class ToyTrainingAcceptanceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.config = TrainConfig(
            steps=1500, lr=1e-3, freeze_steps=100, predenoise_steps=300, max_iters=MAX_ITERS, seed=0, log_every=50,
            model={
                "patch_size": 16, "search_radius": 3, "predenoise_width": 4, "feature_dim": 8,
                "context_dim": 8, "hidden_dim": 8, "corr_levels": 3, "corr_radius": 2,
                "restoration_dim": 8, "offset_groups": 2, "fusion_blocks": 1,
            },
            data={"size": (32, 32), "max_shift": 3, "noise_sigmas": SIGMAS},
        )
        cls.model, cls.log = train(cls.config)
        clean = synth_sequence(12345, 3, (32, 32), (2, 1), "perlin")
        cls.clean, cls.noisy = clean, add_noise(clean, GaussianNoise(sigma=0.1), 54321)
        cls.held_out = cls._held_out_patches(n_samples=30)
        cls.suite = list(generate_suite(SuiteSpec(
            seed=777, n_sequences=18, n_frames=3, size=(32, 32), max_shift=3, noise_sigmas=SIGMAS,
            textures=["perlin", "checker"],
        )))
        cls.full = [denoise_video(noisy, cls.model, ExitPolicy(enabled=False, max_iters=MAX_ITERS), clean=clean)
                    for clean, noisy in cls.suite]

    @classmethod
    def _held_out_patches(cls, n_samples):
        """(triplet, clean patch, motion) from a sample stream the trainer never draws."""
        source = TrainingSource(cls.config)
        p = cls.config.model.patch_size
        patches = []
        for step in range(1, n_samples + 1):
            sample = source.sample(step, stream=99)
            pre = VideoSequence(frames=[cls.model.predenoise_frame(f) for f in sample.noisy.frames])
            for triplet in assemble_triplets(sample.noisy, pre, REFERENCE, p, p, cls.config.model.search_radius):
                x, y = triplet.ref_origin
                target = sample.clean.frames[REFERENCE].data[:, y:y + p, x:x + p]
                patches.append((triplet, target, sample.motion))
        return patches

    def _gated(self, threshold):
        policy = ExitPolicy(threshold=threshold, max_iters=MAX_ITERS)
        return [denoise_video(noisy, self.model, policy, clean=clean) for clean, noisy in self.suite]

    def test_loss_decreases(self):
        losses = self.log.losses
        self.assertLess(np.mean(losses[-50:]), np.mean(losses[:50]))

    def test_predenoiser_beats_noisy_input(self):
        pre = [self.model.predenoise_frame(f).data for f in self.noisy.frames]
        for out, noisy, clean in zip(pre, self.noisy.frames, self.clean.frames):
            self.assertLess(mse(out, clean.data), mse(noisy.data, clean.data))

    def test_predenoiser_noise_free_input_is_no_worse(self):
        for noisy, clean in zip(self.noisy.frames, self.clean.frames):
            from_clean = mse(self.model.predenoise_frame(clean).data, clean.data)
            from_noisy = mse(self.model.predenoise_frame(noisy).data, clean.data)
            self.assertLessEqual(from_clean, from_noisy)

    def test_output_closer_to_clean_than_input(self):
        result = denoise_video(self.noisy, self.model, ExitPolicy(enabled=False, max_iters=MAX_ITERS))
        out = np.stack([f.data for f in result.sequence.frames])
        noisy = np.stack([f.data for f in self.noisy.frames])
        clean = np.stack([f.data for f in self.clean.frames])
        self.assertLess(mse(out, clean), mse(noisy, clean))

    def test_output_beats_predenoiser_alone(self):
        static = synth_sequence(4242, 3, (32, 32), (0, 0), "perlin")
        result = denoise_video(static, self.model, ExitPolicy(enabled=False, max_iters=MAX_ITERS))
        pre = VideoSequence(frames=[self.model.predenoise_frame(f) for f in static.frames])
        self.assertGreater(sequence_quality(result.sequence, static)[0], sequence_quality(pre, static)[0])

    def test_flow_stays_small_on_identical_patches(self):
        magnitudes = []
        for triplet, _, _ in self.held_out[:40]:
            same = PatchTriplet(
                ref_noisy=triplet.ref_noisy, ref_pre=triplet.ref_pre,
                sup_noisy=(triplet.ref_noisy, triplet.ref_noisy), sup_pre=(triplet.ref_pre, triplet.ref_pre),
                ref_origin=triplet.ref_origin, sup_origins=(triplet.ref_origin, triplet.ref_origin), t=triplet.t,
            )
            for sequence in self.model.refine(same, 1):
                magnitudes.append(2.0 * sequence[0].mean_magnitude)
        self.assertLess(np.mean(magnitudes), 0.5)

    def test_final_flow_iterate_beats_first(self):
        self.assertGreaterEqual(len(self.held_out), 100)
        first, last = [], []
        for triplet, _, motion in self.held_out:
            flows = self.model.refine(triplet, MAX_ITERS)
            for sign, sequence, displacement in zip((-1, 1), flows, triplet.displacements):
                expected = (sign * motion[0] - displacement[0], sign * motion[1] - displacement[1])
                errors = [np.mean(np.linalg.norm(2.0 * f.flow.data - np.reshape(expected, (1, 2, 1, 1)), axis=1))
                          for f in (sequence[0], sequence[-1])]
                first.append(errors[0])
                last.append(errors[1])
        self.assertLess(np.mean(last), np.mean(first))

    def test_last_iteration_psnr_beats_first(self):
        self.assertGreaterEqual(len(self.held_out), 100)
        gains = []
        for triplet, target, _ in self.held_out:
            outputs, _ = self.model.forward(triplet, ExitPolicy(enabled=False, max_iters=MAX_ITERS))
            gains.append(psnr(outputs[-1].s.data, target) - psnr(outputs[0].s.data, target))
        self.assertGreater(np.mean(gains), 0.0)

    def test_uncertainty_tracks_error(self):
        patches = [p for result in self.full for p in result.patches]
        self.assertGreaterEqual(len(patches), 200)
        r = pearson([p.mean_abs_error for p in patches], [p.mean_uncertainty for p in patches])
        self.assertGreater(r, 0.5)

    def test_gating_saves_iterations_without_quality_loss(self):
        full_psnr = np.mean([sequence_quality(r.sequence, clean)[0] for r, (clean, _) in zip(self.full, self.suite)])
        variances = [p.mean_uncertainty for result in self.full for p in result.patches]
        chosen = None
        for q in (0.5, 0.25, 0.1):
            gated = self._gated(float(np.quantile(variances, q)))
            gated_psnr = np.mean([sequence_quality(r.sequence, clean)[0] for r, (clean, _) in zip(gated, self.suite)])
            mean_iterations = np.mean([p.exit_iteration for r in gated for p in r.patches])
            if full_psnr - gated_psnr < 0.1 and mean_iterations < MAX_ITERS:
                chosen = gated
                break
        self.assertIsNotNone(chosen, "no threshold kept the PSNR drop under 0.1 dB while saving iterations")

        by_sigma = {}
        for result, (_, noisy) in zip(chosen, self.suite):
            by_sigma.setdefault(noisy.noise_level[0], []).extend(p.exit_iteration for p in result.patches)
        self.assertLess(np.mean(by_sigma[0.02]), np.mean(by_sigma[0.1]))
