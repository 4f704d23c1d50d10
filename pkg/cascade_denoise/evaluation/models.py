from django.db import models


class EvalReport(models.Model):
    name = models.CharField(max_length=128)
    mode = models.CharField(max_length=32)
    sequence = models.CharField(max_length=128, blank=True, null=True)
    noise_sigma = models.FloatField(blank=True, null=True)

    psnr = models.FloatField(blank=True, null=True)
    ssim = models.FloatField(blank=True, null=True)
    pearson_r = models.FloatField(blank=True, null=True)
    mean_iterations = models.FloatField(blank=True, null=True)
    savings = models.FloatField(blank=True, null=True)
    report_path = models.CharField(max_length=512, blank=True, null=True)

    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.name} [{self.mode}] {self.sequence or ''}"


class PatchRecord(models.Model):
    report = models.ForeignKey(EvalReport, on_delete=models.CASCADE, related_name="patches")
    frame = models.IntegerField()
    origin_x = models.IntegerField()
    origin_y = models.IntegerField()
    exit_iteration = models.IntegerField()
    mean_abs_error = models.FloatField(blank=True, null=True)
    mean_uncertainty = models.FloatField()

    def __str__(self):
        return f"Patch ({self.origin_x}, {self.origin_y}) frame {self.frame} exit {self.exit_iteration}"
