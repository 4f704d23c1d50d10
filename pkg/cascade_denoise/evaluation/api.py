import math

from rest_framework.views import APIView
from rest_framework.response import Response
from django.shortcuts import get_object_or_404

from .models import EvalReport, PatchRecord
import logging

logger = logging.getLogger(__name__)


def _finite(value):
    if value is None:
        return None
    return "inf" if math.isinf(value) else value


def store_report(name, report, report_path=None):
    """Mirror one EvalReport row (and its patches) into the database."""
    row = EvalReport.objects.create(
        name=name,
        mode=report.mode,
        sequence=report.sequence,
        noise_sigma=report.noise_sigma,
        psnr=report.psnr,
        ssim=report.ssim,
        pearson_r=report.pearson_r,
        mean_iterations=report.mean_iterations,
        savings=report.savings,
        report_path=str(report_path) if report_path else None,
    )
    PatchRecord.objects.bulk_create([
        PatchRecord(
            report=row,
            frame=p.frame,
            origin_x=p.origin[0],
            origin_y=p.origin[1],
            exit_iteration=p.exit_iteration,
            mean_abs_error=p.mean_abs_error,
            mean_uncertainty=p.mean_uncertainty,
        )
        for p in report.patches
    ])
    return row


def report_payload(report, with_patches=False):
    payload = {
        "id": report.pk,
        "name": report.name,
        "mode": report.mode,
        "sequence": report.sequence,
        "noise_sigma": report.noise_sigma,
        "psnr": _finite(report.psnr),
        "ssim": report.ssim,
        "pearson_r": report.pearson_r,
        "mean_iterations": report.mean_iterations,
        "savings": report.savings,
        "report_path": report.report_path,
        "created_at": report.created_at.isoformat(),
    }
    if with_patches:
        payload["patches"] = [
            {
                "frame": p.frame,
                "origin": [p.origin_x, p.origin_y],
                "exit_iteration": p.exit_iteration,
                "mean_abs_error": p.mean_abs_error,
                "mean_uncertainty": p.mean_uncertainty,
            }
            for p in report.patches.order_by("frame", "origin_y", "origin_x")
        ]
    return payload


class EvalReportListView(APIView):
    def get(self, request):
        reports = EvalReport.objects.order_by("-created_at", "-id")
        mode = request.query_params.get("mode")
        if mode:
            reports = reports.filter(mode=mode)
        return Response([report_payload(r) for r in reports])


class EvalReportDetailView(APIView):
    def get(self, request, pk):
        report = get_object_or_404(EvalReport, pk=pk)
        return Response(report_payload(report, with_patches=True))
