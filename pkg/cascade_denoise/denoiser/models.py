from django.db import models


class TrainingRun(models.Model):
    STATUS_CHOICES = [
        ("running", "running"),
        ("finished", "finished"),
        ("failed", "failed"),
    ]

    name = models.CharField(max_length=128)
    config_json = models.JSONField()
    seed = models.IntegerField()
    steps = models.IntegerField()
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default="running")
    params_path = models.CharField(max_length=512, blank=True, null=True)
    log_path = models.CharField(max_length=512, blank=True, null=True)
    final_loss = models.FloatField(blank=True, null=True)
    error = models.TextField(blank=True, null=True)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    def __str__(self):
        return f"{self.name} (seed {self.seed}, {self.status})"


class TrainingStep(models.Model):
    run = models.ForeignKey(TrainingRun, on_delete=models.CASCADE, related_name="step_records")
    timestamp = models.DateTimeField(auto_now_add=True)

    step = models.IntegerField()
    loss = models.FloatField()
    iteration_losses = models.JSONField()
    flow_loss = models.FloatField()
    grad_norm = models.FloatField()
    exit_iteration = models.FloatField()

    class Meta:
        ordering = ["step"]
        constraints = [models.UniqueConstraint(fields=["run", "step"], name="unique_run_step")]

    def __str__(self):
        return f"Step {self.step} of run {self.run_id}: {self.loss:.6f}"
