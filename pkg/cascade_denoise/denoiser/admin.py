from django.contrib import admin

from .models import TrainingRun, TrainingStep


@admin.register(TrainingRun)
class TrainingRunAdmin(admin.ModelAdmin):
    list_display = ("id", "name", "seed", "steps", "status", "final_loss", "created_at")
    list_filter = ("status",)


@admin.register(TrainingStep)
class TrainingStepAdmin(admin.ModelAdmin):
    list_display = ("run", "step", "loss", "grad_norm", "exit_iteration")
