"""
Compute-savings benchmark over a mixed-noise synthetic suite.

Every sequence is denoised once per mode. ``gate_off`` runs all iterations,
``gate_on`` applies the exit policy; with ablations enabled ``single_iter``
stops after one block and ``no_match`` skips patch matching.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional
import csv
import logging

import numpy as np

from autodiff.exceptions import UndefinedCorrelationError
from denoiser.uncertainty import compute_savings
from frames.schemas import SuiteSpec
from frames.synth import generate_suite

from .heatmap import emit_heatmap
from .metrics import format_metric, pearson, psnr, ssim
from .pipeline import PatchResult, denoise_video, patch_grid
from .scatter import emit_scatter
from .schemas import BenchConfig

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["sequence", "mode", "noise_sigma", "psnr", "ssim", "pearson_r", "mean_iterations", "savings"]
PATCH_COLUMNS = ["sequence", "mode", "frame", "x", "y", "exit_iteration", "mean_abs_error", "mean_uncertainty"]


@dataclass
class BenchMode:
    name: str
    gated: bool
    max_iters: int
    match: bool = True


@dataclass
class EvalReport:
    sequence: str
    mode: str
    psnr: float
    ssim: float
    pearson_r: Optional[float]
    mean_iterations: float
    savings: float
    noise_sigma: Optional[float] = None
    patches: List[PatchResult] = field(default_factory=list)


def bench_modes(config: BenchConfig):
    modes = [BenchMode("gate_off", False, config.max_iters), BenchMode("gate_on", True, config.max_iters)]
    if config.ablations:
        modes += [BenchMode("single_iter", False, 1), BenchMode("no_match", False, config.max_iters, match=False)]
    return modes


def sequence_quality(predicted, clean):
    """PSNR over all frames jointly and the mean per-frame SSIM."""
    pred = np.stack([f.data for f in predicted.frames])
    ref = np.stack([f.data for f in clean.frames])
    return psnr(pred, ref), float(np.mean([ssim(a, b) for a, b in zip(predicted.frames, clean.frames)]))


def error_uncertainty_correlation(patches):
    try:
        return pearson([p.mean_abs_error for p in patches], [p.mean_uncertainty for p in patches])
    except UndefinedCorrelationError as exc:
        logger.warning(f"pearson r undefined: {exc}")
        return None


def evaluate_sequence(clean, noisy, model, config: BenchConfig, mode: BenchMode):
    policy = config.policy(enabled=mode.gated, max_iters=mode.max_iters)
    result = denoise_video(noisy, model, policy, stride=config.stride, clean=clean, match=mode.match)
    quality_psnr, quality_ssim = sequence_quality(result.sequence, clean)
    mean_iterations = result.mean_iterations
    return EvalReport(
        sequence=noisy.name,
        mode=mode.name,
        psnr=quality_psnr,
        ssim=quality_ssim,
        pearson_r=error_uncertainty_correlation(result.patches),
        mean_iterations=mean_iterations,
        savings=compute_savings([p.decision for p in result.patches], config.max_iters),
        noise_sigma=noisy.noise_level[0] if noisy.noise_level else None,
        patches=result.patches,
    )


def write_report_csv(reports, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for r in reports:
            writer.writerow([r.sequence, r.mode, format_metric(r.noise_sigma), format_metric(r.psnr),
                             format_metric(r.ssim), format_metric(r.pearson_r),
                             format_metric(r.mean_iterations), format_metric(r.savings)])
    return path


def write_patch_csv(reports, path):
    path = Path(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PATCH_COLUMNS)
        for r in reports:
            for p in r.patches:
                writer.writerow([r.sequence, r.mode, p.frame, p.origin[0], p.origin[1], p.exit_iteration,
                                 format_metric(p.mean_abs_error), format_metric(p.mean_uncertainty)])
    return path


def patch_csv_path(report_path):
    report_path = Path(report_path)
    return report_path.with_name(f"{report_path.stem}_patches.csv")


def run_bench(config: BenchConfig, model, report_path, heatmap_dir=None):
    """Returns the list of EvalReport rows, one per (sequence, mode), and writes the CSVs."""
    spec = SuiteSpec(
        seed=config.seed, n_sequences=config.n_sequences, n_frames=config.n_frames, size=config.size,
        max_shift=config.max_shift, textures=config.textures, noise_sigmas=config.noise_sigmas,
        channels=model.config.channels,
    )
    heatmap_dir = Path(heatmap_dir) if heatmap_dir else Path(report_path).parent / "heatmaps"
    modes = bench_modes(config)
    reports = []
    for clean, noisy in generate_suite(spec):
        for mode in modes:
            report = evaluate_sequence(clean, noisy, model, config, mode)
            reports.append(report)
            logger.info(f"{report.sequence} {mode.name}: psnr {format_metric(report.psnr)} "
                        f"ssim {report.ssim:.4f} iterations {report.mean_iterations:.2f}")
            if config.heatmaps and mode.name == "gate_on":
                middle = len(clean.frames) // 2
                _emit_patch_heatmaps([p for p in report.patches if p.frame == middle], clean.frames[middle].shape[1:],
                                     heatmap_dir / f"{report.sequence}_{mode.name}")
    write_report_csv(reports, report_path)
    write_patch_csv(reports, patch_csv_path(report_path))
    if config.heatmaps:
        gated = [r for r in reports if r.mode == "gate_on"]
        r = error_uncertainty_correlation([p for report in gated for p in report.patches])
        emit_scatter(gated, heatmap_dir / "gate_on_scatter.png", r)
    for mode in modes:
        rows = [r for r in reports if r.mode == mode.name]
        logger.info(f"{mode.name}: mean psnr {np.mean([r.psnr for r in rows]):.3f} "
                    f"mean iterations {np.mean([r.mean_iterations for r in rows]):.2f}")
    return reports


def _emit_patch_heatmaps(patches, size, stem):
    emit_heatmap(patch_grid(patches, "mean_abs_error"), stem.with_name(f"{stem.name}_error.pgm"), size)
    emit_heatmap(patch_grid(patches, "mean_uncertainty"), stem.with_name(f"{stem.name}_uncertainty.pgm"), size)
