from pathlib import Path
import logging

from django.core.management.base import BaseCommand

from denoiser.cli import command_errors
from denoiser.configfile import load_config
from denoiser.network import CascadeModel
from evaluation.api import store_report
from evaluation.bench import run_bench
from evaluation.metrics import format_metric
from evaluation.schemas import BenchConfig

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Benchmark gating on/off (and ablations) on a mixed-noise synthetic suite"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True)
        parser.add_argument("--report", required=True, help="CSV output; per-patch rows go next to it")
        parser.add_argument("--params", default=None, help="overrides params= from the config")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--threshold", type=float, default=None)
        parser.add_argument("--max-iters", type=int, default=None)

    def handle(self, *args, **options):
        with command_errors():
            config = load_config(options["config"], BenchConfig, {
                "seed": options["seed"],
                "threshold": options["threshold"],
                "max_iters": options["max_iters"],
                "params": options["params"],
            })
            if config.params:
                model = CascadeModel.load(config.params)
            else:
                logger.warning("no params given, benchmarking an untrained model")
                model = CascadeModel.initialize(config.model, config.seed)
            reports = run_bench(config, model, options["report"])
        name = Path(options["config"]).stem
        for report in reports:
            store_report(name, report, options["report"])
        for report in reports:
            self.stdout.write(f"{report.sequence:<28} {report.mode:<12} psnr {format_metric(report.psnr):>22} "
                              f"iterations {report.mean_iterations:.2f} savings {report.savings:.3f}")
        self.stdout.write(self.style.SUCCESS(f"{len(reports)} rows -> {options['report']}"))
