"""
Toy-scale end-to-end training on synthetic translating sequences.

Each step draws one three-frame sequence from a generator seeded by
(seed, step), so runs are reproducible and steps are independent of each
other's sampling.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional
import csv
import logging

import numpy as np

from autodiff import ops
from autodiff.exceptions import DivergenceError, DomainError
from autodiff.tensor import Tape, Tensor
from frames.schemas import GaussianNoise
from frames.synth import VideoSequence, add_noise, synth_sequence

from .flow import endpoint_error
from .network import CascadeModel
from .optim import AdamState, adamw_step, clip_grad_norm, gradients
from .patch_match import assemble_triplets
from .schemas import ExitPolicy, TrainConfig
from .uncertainty import decide_exit, eu_loss, total_loss

logger = logging.getLogger(__name__)

REFERENCE = 1


@dataclass
class TrainingSample:
    clean: VideoSequence
    noisy: VideoSequence
    motion: tuple
    sigma: float


class TrainingSource:
    def __init__(self, config: TrainConfig):
        self.config = config

    def sample(self, step, stream=0):
        data, model = self.config.data, self.config.model
        rng = np.random.default_rng([self.config.seed, stream, step])
        texture = data.textures[int(rng.integers(len(data.textures)))]
        sigma = data.noise_sigmas[int(rng.integers(len(data.noise_sigmas)))]
        motion = tuple(int(v) for v in rng.integers(-data.max_shift, data.max_shift + 1, size=2))
        seed = int(rng.integers(0, 2**31 - 1))
        clean = synth_sequence(seed, 3, data.size, motion, texture, model.channels)
        noisy = add_noise(clean, GaussianNoise(sigma=sigma), seed + 1)
        return TrainingSample(clean=clean, noisy=noisy, motion=motion, sigma=sigma)


@dataclass
class StepRecord:
    step: int
    loss: float
    iteration_losses: List[float]
    flow_loss: float
    grad_norm: float
    exit_iteration: float


@dataclass
class TrainLog:
    records: List[StepRecord] = field(default_factory=list)
    predenoise_losses: List[float] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def losses(self):
        return [record.loss for record in self.records]

    def to_csv(self, path):
        n = max((len(r.iteration_losses) for r in self.records), default=0)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["step", "loss", "flow_loss", "grad_norm", "exit_iteration"] + [f"iter_{k}" for k in range(1, n + 1)])
            for r in self.records:
                writer.writerow([r.step, repr(r.loss), repr(r.flow_loss), repr(r.grad_norm), repr(r.exit_iteration)]
                                + [repr(v) for v in r.iteration_losses])
        return Path(path)


def train_predenoiser(config: TrainConfig, model: CascadeModel, source: TrainingSource, log: TrainLog):
    """Single-frame MSE training of the pre-denoiser on the middle frame of each sample."""
    state = AdamState()
    for step in range(1, config.predenoise_steps + 1):
        sample = source.sample(step, stream=1)
        clean = sample.clean.frames[REFERENCE]
        model.params.zero_grad()
        with Tape() as tape:
            residual = model.predenoise_frame(sample.noisy.frames[REFERENCE]) - clean
            loss = ops.mean(residual * residual)
            tape.backward(loss)
        grads = {name: g for name, g in gradients(model.params).items() if name.startswith("predenoise.")}
        grads, _ = clip_grad_norm(grads, config.clip_norm)
        adamw_step(model.params, grads, state, config, lr=config.predenoise_lr)
        log.predenoise_losses.append(loss.item())
        if step % config.log_every == 0:
            logger.info(f"predenoise step {step}/{config.predenoise_steps} mse {loss.item():.6f}")
    model.params.zero_grad()


def _would_exit(outputs, policy: ExitPolicy):
    for output in outputs:
        if decide_exit(output.u, policy, output.iteration).exit:
            return output.iteration
    return outputs[-1].iteration


def _patch_loss(model, triplet, clean, sample, config: TrainConfig):
    outputs, flows = model.forward(triplet, config.policy, config.max_iters)
    x, y = triplet.ref_origin
    p = triplet.patch_size
    target = Tensor(clean.data[:, y:y + p, x:x + p])
    iteration_losses = [eu_loss(o.s, target, o.u, config.loss_form) for o in outputs]
    loss = total_loss(iteration_losses, config.gamma, config.max_iters)

    flow_terms = []
    if config.flow_weight > 0:
        for sign, sequence, displacement in zip((-1, 1), flows, triplet.displacements):
            expected = (sign * sample.motion[0] - displacement[0], sign * sample.motion[1] - displacement[1])
            terms = [endpoint_error(field.flow * 2.0, expected) for field in sequence]
            flow_terms.append(total_loss(terms, config.gamma))
        loss = loss + config.flow_weight * (0.5 * (flow_terms[0] + flow_terms[1]))
    flow_value = 0.5 * float(sum(term.item() for term in flow_terms)) if flow_terms else 0.0
    gated = config.policy.model_copy(update={"enabled": True})
    return loss, [v.item() for v in iteration_losses], flow_value, _would_exit(outputs, gated)


def train(config: TrainConfig, source: Optional[TrainingSource] = None,
          on_step: Optional[Callable[[StepRecord], None]] = None, model: Optional[CascadeModel] = None):
    """
    Returns (model, log). The gate is disabled so every step unrolls all
    ``max_iters`` blocks; pre-denoiser parameters stay fixed for the first
    ``freeze_steps`` steps.
    """
    source = source or TrainingSource(config)
    model = model or CascadeModel.initialize(config.model, config.seed)
    log = TrainLog()
    if config.predenoise_steps:
        train_predenoiser(config, model, source, log)

    p = config.model.patch_size
    state = AdamState()
    for step in range(1, config.steps + 1):
        sample = source.sample(step)
        frozen = ("predenoise.",) if step <= config.freeze_steps else ()
        rng = np.random.default_rng([config.seed, 2, step])
        model.params.zero_grad()
        try:
            if frozen:
                pre = [model.predenoise_frame(frame) for frame in sample.noisy.frames]
            with Tape() as tape:
                if not frozen:
                    pre = [model.predenoise_frame(frame) for frame in sample.noisy.frames]
                triplets = assemble_triplets(
                    sample.noisy, VideoSequence(frames=pre), REFERENCE, p, p,
                    config.model.search_radius, match=config.data.match,
                )
                chosen = rng.choice(len(triplets), size=config.batch, replace=config.batch > len(triplets))
                results = [_patch_loss(model, triplets[i], sample.clean.frames[REFERENCE], sample, config) for i in chosen]
                loss = results[0][0]
                for result in results[1:]:
                    loss = loss + result[0]
                loss = loss * (1.0 / config.batch)
                if not np.isfinite(loss.item()):
                    raise DivergenceError(step, loss.item())
                tape.backward(loss)
            grads, norm = clip_grad_norm(gradients(model.params), config.clip_norm)
        except DomainError as exc:
            raise DivergenceError(step, float("nan")) from exc

        adamw_step(model.params, grads, state, config, frozen=frozen)
        record = StepRecord(
            step=step,
            loss=loss.item(),
            iteration_losses=[float(v) for v in np.mean([r[1] for r in results], axis=0)],
            flow_loss=float(np.mean([r[2] for r in results])),
            grad_norm=norm,
            exit_iteration=float(np.mean([r[3] for r in results])),
        )
        log.records.append(record)
        if step % config.log_every == 0 or step == config.steps:
            logger.info(f"step {step}/{config.steps} loss {record.loss:.6f} grad_norm {norm:.4f} "
                        f"exit_iteration {record.exit_iteration:.2f}")
        if on_step is not None:
            on_step(record)
    model.params.zero_grad()
    return model, log
