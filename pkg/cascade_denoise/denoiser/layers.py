from autodiff import ops
from autodiff.params import init_conv


def conv(params, name, x, stride=1):
    weight = params[f"{name}.weight"]
    return ops.conv2d(x, weight, params[f"{name}.bias"], stride=stride, padding=weight.shape[-1] // 2)


def init_residual_block(params, name, channels, rng):
    init_conv(params, f"{name}.conv1", channels, channels, 3, rng)
    init_conv(params, f"{name}.conv2", channels, channels, 3, rng)


def residual_block(params, name, x):
    return x + conv(params, f"{name}.conv2", ops.relu(conv(params, f"{name}.conv1", x)))


def batched(x):
    """[C,H,W] -> [1,C,H,W]."""
    return ops.reshape(x, (1,) + tuple(x.shape))
