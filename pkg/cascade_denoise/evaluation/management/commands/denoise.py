from pathlib import Path
import csv

from django.core.management.base import BaseCommand

from denoiser.cli import command_errors
from denoiser.network import CascadeModel
from denoiser.schemas import ExitPolicy
from evaluation.metrics import format_metric
from evaluation.pipeline import denoise_video
from frames.manifest import load_sequence, save_sequence


class Command(BaseCommand):
    help = "Denoise a frame sequence listed in a manifest"

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="manifest", required=True, help="manifest of noisy frames")
        parser.add_argument("--out", required=True, help="output directory")
        parser.add_argument("--params", required=True, help="parameter file written by train")
        parser.add_argument("--no-gate", action="store_true", help="run every iteration")
        parser.add_argument("--threshold", type=float, default=None)
        parser.add_argument("--max-iters", type=int, default=None)
        parser.add_argument("--stride", type=int, default=None)
        parser.add_argument("--gt", default=None, help="manifest of clean frames, enables per-patch error")

    def handle(self, *args, **options):
        out = Path(options["out"])
        with command_errors():
            defaults = ExitPolicy()
            policy = ExitPolicy(
                enabled=not options["no_gate"],
                threshold=defaults.threshold if options["threshold"] is None else options["threshold"],
                max_iters=defaults.max_iters if options["max_iters"] is None else options["max_iters"],
            )
            noisy = load_sequence(options["manifest"])
            clean = load_sequence(options["gt"]) if options["gt"] else None
            model = CascadeModel.load(options["params"])
            result = denoise_video(noisy, model, policy, stride=options["stride"], clean=clean)
            manifest = save_sequence(result.sequence, out, stem="denoised")
            self._write_patches(result, out / "patches.csv")
            self._write_summary(result, policy, out / "summary.csv")
        self.stdout.write(self.style.SUCCESS(
            f"{len(result.sequence)} frames -> {manifest}; mean iterations {result.mean_iterations:.2f}, "
            f"savings {result.savings:.3f}"
        ))

    def _write_patches(self, result, path):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["frame", "x", "y", "exit_iteration", "mean_uncertainty", "mean_abs_error"])
            for p in result.patches:
                writer.writerow([p.frame, p.origin[0], p.origin[1], p.exit_iteration,
                                 format_metric(p.mean_uncertainty), format_metric(p.mean_abs_error)])

    def _write_summary(self, result, policy, path):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["frames", "patches", "gated", "threshold", "max_iters", "mean_iterations", "savings"])
            writer.writerow([len(result.sequence), len(result.patches), policy.enabled, format_metric(policy.threshold),
                             policy.max_iters, format_metric(result.mean_iterations), format_metric(result.savings)])
