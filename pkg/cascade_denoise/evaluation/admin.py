from django.contrib import admin

from .models import EvalReport, PatchRecord


@admin.register(EvalReport)
class EvalReportAdmin(admin.ModelAdmin):
    list_display = ("id", "name", "mode", "sequence", "psnr", "ssim", "mean_iterations", "savings")
    list_filter = ("mode",)


admin.site.register(PatchRecord)
