from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from denoiser.api import record_step
from denoiser.cli import command_errors
from denoiser.configfile import load_config
from denoiser.models import TrainingRun
from denoiser.schemas import TrainConfig
from denoiser.trainer import train


class Command(BaseCommand):
    help = "Train the cascade denoiser on synthetic sequences"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="key=value run configuration")
        parser.add_argument("--out", default=None, help="output directory (parameters and log CSV)")
        parser.add_argument("--name", default=None)
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--threshold", type=float, default=None)
        parser.add_argument("--max-iters", type=int, default=None)

    def handle(self, *args, **options):
        with command_errors():
            config = load_config(options["config"], TrainConfig, {
                "seed": options["seed"],
                "threshold": options["threshold"],
                "max_iters": options["max_iters"],
            })
            out = Path(options["out"] or settings.CASCADE_DENOISE["OUTPUT_DIR"])
            out.mkdir(parents=True, exist_ok=True)
        name = options["name"] or Path(options["config"]).stem

        run = TrainingRun.objects.create(
            name=name, config_json=config.model_dump(mode="json"), seed=config.seed, steps=config.steps,
        )

        def on_step(record):
            if record.step % config.log_every == 0 or record.step == config.steps:
                record_step(run, record)

        try:
            with command_errors():
                model, log = train(config, on_step=on_step)
        except Exception as exc:
            run.status = "failed"
            run.error = str(exc)
            run.save(update_fields=["status", "error", "updated_at"])
            raise

        params_path = out / f"{name}.params"
        log_path = out / f"{name}_log.csv"
        with command_errors():
            model.save(params_path)
            log.to_csv(log_path)
        run.status = "finished"
        run.params_path = str(params_path)
        run.log_path = str(log_path)
        run.final_loss = log.records[-1].loss
        run.save(update_fields=["status", "params_path", "log_path", "final_loss", "updated_at"])
        self.stdout.write(self.style.SUCCESS(
            f"run {run.pk}: {config.steps} steps, final loss {run.final_loss:.6f}, parameters in {params_path}"
        ))
