from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from denoiser.schemas import ExitPolicy, FloatList, ModelConfig, Size, TextureList


class BenchConfig(BaseModel):
    """Mixed-noise synthetic benchmark comparing gating off and on (and optional ablations)."""
    seed: int = 0
    n_sequences: int = Field(default=6, ge=1)
    n_frames: int = Field(default=3, ge=3)
    size: Size = (64, 64)
    max_shift: int = Field(default=3, ge=0)
    textures: TextureList = ["perlin", "checker", "gradient"]
    noise_sigmas: FloatList = [0.02, 0.05, 0.1]
    threshold: float = Field(default=0.002, ge=0)
    max_iters: int = Field(default=12, ge=1)
    exit_on: Literal["low", "high"] = "low"
    stride: Optional[int] = Field(default=None, ge=1)
    ablations: bool = False
    heatmaps: bool = True
    params: Optional[str] = None
    model: ModelConfig = ModelConfig()

    @model_validator(mode="after")
    def check_frame_fits_patch(self):
        if min(self.size) < self.model.patch_size:
            raise ValueError(f"size {self.size} smaller than patch_size {self.model.patch_size}")
        return self

    def policy(self, enabled=True, max_iters=None):
        return ExitPolicy(enabled=enabled, threshold=self.threshold,
                          max_iters=max_iters or self.max_iters, exit_on=self.exit_on)
