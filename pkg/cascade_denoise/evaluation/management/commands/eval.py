from pathlib import Path
import csv

import numpy as np
from django.core.management.base import BaseCommand

from autodiff.exceptions import DimensionError, ParseError
from denoiser.cli import command_errors
from evaluation.bench import EvalReport
from evaluation.api import store_report
from evaluation.metrics import format_metric, psnr, ssim
from frames.manifest import load_sequence


def find_manifest(path):
    """A manifest file, or the single ``*.txt`` manifest inside a directory."""
    path = Path(path)
    if path.is_file():
        return path
    candidates = sorted(path.glob("*.txt")) if path.is_dir() else []
    if len(candidates) != 1:
        raise ParseError(f"expected exactly one manifest in {path}, found {len(candidates)}")
    return candidates[0]


class Command(BaseCommand):
    help = "Score predicted frames against ground truth (PSNR, SSIM)"

    def add_arguments(self, parser):
        parser.add_argument("--pred", required=True, help="directory or manifest of predicted frames")
        parser.add_argument("--gt", required=True, help="directory or manifest of clean frames")
        parser.add_argument("--report", required=True, help="CSV output")
        parser.add_argument("--name", default="eval")

    def handle(self, *args, **options):
        with command_errors():
            predicted = load_sequence(find_manifest(options["pred"]))
            truth = load_sequence(find_manifest(options["gt"]))
            if len(predicted) != len(truth):
                raise DimensionError(f"{len(predicted)} predicted frames vs {len(truth)} ground-truth frames")
            rows = [(i, psnr(a, b), ssim(a, b)) for i, (a, b) in enumerate(zip(predicted.frames, truth.frames))]
            joint = psnr(np.stack([f.data for f in predicted.frames]), np.stack([f.data for f in truth.frames]))
            mean_ssim = float(np.mean([row[2] for row in rows]))
            report_path = Path(options["report"])
            report_path.parent.mkdir(parents=True, exist_ok=True)
            with open(report_path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["frame", "psnr", "ssim"])
                for index, value_psnr, value_ssim in rows:
                    writer.writerow([index, format_metric(value_psnr), format_metric(value_ssim)])
                writer.writerow(["all", format_metric(joint), format_metric(mean_ssim)])
        store_report(options["name"], EvalReport(
            sequence=str(options["pred"]), mode="eval", psnr=joint, ssim=mean_ssim,
            pearson_r=None, mean_iterations=None, savings=None,
        ), report_path)
        self.stdout.write(self.style.SUCCESS(f"psnr {format_metric(joint)} ssim {mean_ssim:.4f} -> {report_path}"))
