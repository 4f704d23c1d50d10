from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


class GaussianNoise(BaseModel):
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(ge=0)


class PoissonGaussianNoise(BaseModel):
    kind: Literal["poisson_gaussian"] = "poisson_gaussian"
    a: float = Field(ge=0)
    b: float = Field(ge=0)


class SigmaMapNoise(BaseModel):
    """Gaussian noise whose standard deviation varies per pixel ([H][W] nested lists or an array)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["sigma_map"] = "sigma_map"
    sigma_map: object


NoiseModel = Union[GaussianNoise, PoissonGaussianNoise, SigmaMapNoise]


class SequenceSpec(BaseModel):
    """Arguments of one synthetic sequence."""
    seed: int = 0
    n_frames: int = Field(default=3, ge=3)
    size: Tuple[int, int] = (64, 64)
    motion: Tuple[float, float] = (0.0, 0.0)
    texture: Literal["gradient", "checker", "perlin"] = "perlin"
    channels: int = Field(default=1, ge=1)
    noise: Optional[NoiseModel] = Field(default=None, discriminator="kind")
    noise_seed: int = 0


class SuiteSpec(BaseModel):
    """A family of sequences with random motion and noise drawn from ``noise_sigmas``."""
    seed: int = 0
    n_sequences: int = Field(default=4, ge=1)
    n_frames: int = Field(default=3, ge=3)
    size: Tuple[int, int] = (64, 64)
    max_shift: int = Field(default=3, ge=0)
    textures: List[Literal["gradient", "checker", "perlin"]] = ["perlin", "checker", "gradient"]
    noise_sigmas: List[float] = [0.1]
    channels: int = Field(default=1, ge=1)
