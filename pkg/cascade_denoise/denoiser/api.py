from rest_framework.views import APIView
from rest_framework.response import Response
from django.conf import settings
from django.shortcuts import get_object_or_404

from .models import TrainingRun, TrainingStep
from channels.layers import get_channel_layer
from asgiref.sync import async_to_sync
import logging

logger = logging.getLogger(__name__)


def send_step_to_ws(run, record):
    if not settings.CASCADE_DENOISE.get("PUSH_PROGRESS", True):
        return
    channel_layer = get_channel_layer()
    if channel_layer is None:
        logger.warning("no channel layer configured, progress push skipped")
        return
    group_name = f'run_{run.pk}'

    async_to_sync(channel_layer.group_send)(
        group_name,
        {
            'type': 'training_step',
            'data': {
                'step': record.step,
                'loss': record.loss,
                'iteration_losses': record.iteration_losses,
                'grad_norm': record.grad_norm,
                'exit_iteration': record.exit_iteration,
            }
        }
    )


def record_step(run, record):
    step = TrainingStep.objects.create(
        run=run,
        step=record.step,
        loss=record.loss,
        iteration_losses=record.iteration_losses,
        flow_loss=record.flow_loss,
        grad_norm=record.grad_norm,
        exit_iteration=record.exit_iteration,
    )
    send_step_to_ws(run, record)
    return step


def run_payload(run, with_steps=False):
    payload = {
        "id": run.pk,
        "name": run.name,
        "seed": run.seed,
        "steps": run.steps,
        "status": run.status,
        "final_loss": run.final_loss,
        "params_path": run.params_path,
        "log_path": run.log_path,
        "created_at": run.created_at.isoformat(),
    }
    if with_steps:
        payload["config"] = run.config_json
        payload["error"] = run.error
        payload["step_records"] = [
            {
                "step": s.step,
                "loss": s.loss,
                "iteration_losses": s.iteration_losses,
                "flow_loss": s.flow_loss,
                "grad_norm": s.grad_norm,
                "exit_iteration": s.exit_iteration,
            }
            for s in run.step_records.all()
        ]
    return payload


class TrainingRunListView(APIView):
    def get(self, request):
        runs = TrainingRun.objects.order_by("-created_at")
        return Response([run_payload(run) for run in runs])


class TrainingRunDetailView(APIView):
    def get(self, request, pk):
        run = get_object_or_404(TrainingRun, pk=pk)
        return Response(run_payload(run, with_steps=True))
