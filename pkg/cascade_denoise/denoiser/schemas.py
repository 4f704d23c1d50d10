from typing import Annotated, List, Literal, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, Field, model_validator


def _split_commas(value):
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


FloatList = Annotated[List[float], BeforeValidator(_split_commas)]
Size = Annotated[Tuple[int, int], BeforeValidator(_split_commas)]
TextureList = Annotated[List[Literal["gradient", "checker", "perlin"]], BeforeValidator(_split_commas)]


class ModelConfig(BaseModel):
    channels: int = Field(default=1, ge=1)
    patch_size: int = 32
    search_radius: int = Field(default=8, ge=0)
    predenoise_depth: int = Field(default=2, ge=1)
    predenoise_width: int = Field(default=8, ge=1)
    feature_dim: int = Field(default=32, ge=1)
    context_dim: int = Field(default=32, ge=1)
    hidden_dim: int = Field(default=48, ge=1)
    corr_levels: int = Field(default=4, ge=1)
    corr_radius: int = Field(default=3, ge=1)
    restoration_dim: int = Field(default=32, ge=1)
    offset_groups: int = Field(default=4, ge=1)
    deform_kernel: int = 3
    fusion_blocks: int = Field(default=2, ge=0)
    max_offset: Optional[float] = None

    @model_validator(mode="after")
    def check_extents(self):
        pyramid = 2 * 2 ** (self.corr_levels - 1)
        if self.patch_size % pyramid:
            raise ValueError(f"patch_size {self.patch_size} must be divisible by {pyramid}")
        if self.patch_size % 2 ** self.predenoise_depth:
            raise ValueError(f"patch_size {self.patch_size} must be divisible by 2**predenoise_depth")
        if self.restoration_dim % self.offset_groups:
            raise ValueError("restoration_dim must be divisible by offset_groups")
        if self.deform_kernel % 2 == 0:
            raise ValueError("deform_kernel must be odd")
        return self

    @property
    def feature_size(self):
        return self.patch_size // 2

    @property
    def offset_limit(self):
        return self.max_offset if self.max_offset is not None else self.patch_size / 2

    @property
    def lookup_channels(self):
        return self.corr_levels * (2 * self.corr_radius + 1) ** 2


class ExitPolicy(BaseModel):
    enabled: bool = True
    threshold: float = Field(default=0.002, ge=0)
    max_iters: int = Field(default=12, ge=1)
    exit_on: Literal["low", "high"] = "low"


class DataConfig(BaseModel):
    """Synthetic training stream: random texture, integer motion and one noise level per sample."""
    size: Size = (64, 64)
    max_shift: int = Field(default=3, ge=0)
    textures: TextureList = ["perlin", "checker", "gradient"]
    noise_sigmas: FloatList = [0.1]
    match: bool = True


class TrainConfig(BaseModel):
    steps: int = Field(default=2000, ge=1)
    lr: float = Field(default=0.00002, ge=0)
    batch: int = Field(default=1, ge=1)
    freeze_steps: int = Field(default=300, ge=0)
    seed: int = 0
    gamma: float = Field(default=0.8, gt=0, le=1)
    max_iters: int = Field(default=12, ge=1)
    threshold: float = Field(default=0.002, ge=0)
    exit_on: Literal["low", "high"] = "low"
    weight_decay: float = Field(default=1e-4, ge=0)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = Field(default=1.0, gt=0)
    predenoise_steps: int = Field(default=200, ge=0)
    predenoise_lr: float = Field(default=1e-3, ge=0)
    flow_weight: float = Field(default=0.1, ge=0)
    loss_form: Literal["printed", "laplace"] = "printed"
    log_every: int = Field(default=10, ge=1)
    model: ModelConfig = ModelConfig()
    data: DataConfig = DataConfig()

    @model_validator(mode="after")
    def check_frame_fits_patch(self):
        if min(self.data.size) < self.model.patch_size:
            raise ValueError(f"data.size {self.data.size} smaller than patch_size {self.model.patch_size}")
        return self

    @property
    def policy(self):
        return ExitPolicy(enabled=False, threshold=self.threshold, max_iters=self.max_iters, exit_on=self.exit_on)
