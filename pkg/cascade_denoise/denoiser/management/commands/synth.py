from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from denoiser.cli import command_errors
from frames.manifest import save_sequence
from frames.schemas import SequenceSpec
from frames.synth import add_noise, synth_sequence


class Command(BaseCommand):
    help = "Write a synthetic translating sequence (clean and noisy) with manifests"

    def add_arguments(self, parser):
        parser.add_argument("--out", required=True)
        parser.add_argument("--seed", type=int, default=settings.CASCADE_DENOISE["SEED"])
        parser.add_argument("--frames", type=int, default=5)
        parser.add_argument("--size", type=int, nargs=2, default=[64, 64], metavar=("H", "W"))
        parser.add_argument("--motion", type=float, nargs=2, default=[1.0, 0.0], metavar=("DX", "DY"))
        parser.add_argument("--texture", default="perlin")
        parser.add_argument("--sigma", type=float, default=0.05)
        parser.add_argument("--channels", type=int, default=1)
        parser.add_argument("--stem", default="frame")

    def handle(self, *args, **options):
        out = Path(options["out"])
        with command_errors():
            spec = SequenceSpec.model_validate({
                "seed": options["seed"],
                "n_frames": options["frames"],
                "size": options["size"],
                "motion": options["motion"],
                "texture": options["texture"],
                "channels": options["channels"],
                "noise": {"kind": "gaussian", "sigma": options["sigma"]},
                "noise_seed": options["seed"] + 1,
            })
            clean = synth_sequence(spec.seed, spec.n_frames, spec.size, spec.motion, spec.texture, spec.channels)
            noisy = add_noise(clean, spec.noise, spec.noise_seed)
            clean_manifest = save_sequence(clean, out / "clean", options["stem"])
            noisy_manifest = save_sequence(noisy, out / "noisy", options["stem"])
        self.stdout.write(self.style.SUCCESS(f"wrote {noisy_manifest} and {clean_manifest}"))
