from pathlib import Path
import json
import logging

import numpy as np

from autodiff.params import ParamSet

from .flow import init_flow, refine_flow
from .predenoise import init_predenoiser, predenoise, predenoise_padded
from .recon import init_recon, run_cascade
from .schemas import ExitPolicy, ModelConfig

logger = logging.getLogger(__name__)


class CascadeModel:
    """Pre-denoiser, flow refinement and reconstruction cascade sharing one ParamSet."""

    def __init__(self, config: ModelConfig, params: ParamSet):
        self.config = config
        self.params = params

    @classmethod
    def initialize(cls, config: ModelConfig, seed=0):
        rng = np.random.default_rng(seed)
        params = ParamSet()
        init_predenoiser(params, config, rng)
        init_flow(params, config, rng)
        init_recon(params, config, rng)
        logger.info(f"initialized model with {len(params)} tensors, {params.count()} parameters")
        return cls(config, params)

    def predenoise(self, frame):
        return predenoise(frame, self.params, self.config)

    def predenoise_frame(self, frame):
        return predenoise_padded(frame, self.params, self.config)

    def refine(self, triplet, n_iters):
        return refine_flow(triplet, n_iters, self.params, self.config)

    def cascade(self, triplet, flows, max_iters, policy: ExitPolicy):
        return run_cascade(triplet, flows, max_iters, self.params, self.config, policy)

    def forward(self, triplet, policy: ExitPolicy, max_iters=None):
        """Flow iterates are computed up front, then consumed block by block."""
        n = policy.max_iters if max_iters is None else max_iters
        flows = self.refine(triplet, n)
        return self.cascade(triplet, flows, n, policy), flows

    @staticmethod
    def sidecar(path):
        path = Path(path)
        return path.with_name(path.name + ".json")

    def save(self, path):
        self.params.save(path)
        self.sidecar(path).write_text(self.config.model_dump_json(indent=2))

    @classmethod
    def load(cls, path, config: ModelConfig = None):
        sidecar = cls.sidecar(path)
        if config is None:
            config = ModelConfig.model_validate(json.loads(sidecar.read_text())) if sidecar.exists() else ModelConfig()
        return cls(config, ParamSet.load(path))
