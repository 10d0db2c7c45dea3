"""Layer implementations with explicit forward/backward passes.

Every layer follows the same protocol:

    y, cache = layer.forward(x)
    grad_in, param_grads = layer.backward(cache, grad_out)

``cache`` carries whatever the backward pass needs, so layers themselves stay
stateless and a frozen network can be evaluated from many threads at once.
``backward`` applies the exact chain rule with no hidden scaling: whatever
normalization the loss uses (e.g. a mean over the batch) must already be part
of ``grad_out``. All arithmetic is float64.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, ShapeError

Shape = tuple[int, ...]


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer; a Network is a list of these.

    ``kind`` is one of dense, conv2d, maxpool2x2, relu, flatten. Only the
    fields relevant to the kind are meaningful.
    """

    kind: str
    in_units: int = 0
    out_units: int = 0
    in_channels: int = 0
    out_channels: int = 0
    kernel: int = 5


def dense(in_units: int, out_units: int) -> LayerSpec:
    return LayerSpec("dense", in_units=in_units, out_units=out_units)


def conv2d(in_channels: int, out_channels: int, kernel: int = 5) -> LayerSpec:
    return LayerSpec("conv2d", in_channels=in_channels, out_channels=out_channels, kernel=kernel)


def maxpool2x2() -> LayerSpec:
    return LayerSpec("maxpool2x2")


def relu() -> LayerSpec:
    return LayerSpec("relu")


def flatten() -> LayerSpec:
    return LayerSpec("flatten")


def _glorot_uniform(rng: np.random.Generator, shape: Shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)


class Layer:
    """Base class; parameterized layers override params()."""

    spec: LayerSpec

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def out_shape(self, in_shape: Shape) -> Shape:
        raise NotImplementedError

    def forward(self, x: np.ndarray):
        raise NotImplementedError

    def backward(self, cache, grad_out: np.ndarray):
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, spec: LayerSpec, rng: np.random.Generator):
        self.spec = spec
        self.weight = _glorot_uniform(rng, (spec.in_units, spec.out_units), spec.in_units, spec.out_units)
        self.bias = np.zeros(spec.out_units, dtype=np.float64)

    def params(self):
        return {"weight": self.weight, "bias": self.bias}

    def out_shape(self, in_shape):
        if len(in_shape) != 1 or in_shape[0] != self.spec.in_units:
            raise ShapeError(f"dense expects flat input of {self.spec.in_units} units, got {in_shape}")
        return (self.spec.out_units,)

    def forward(self, x):
        return x @ self.weight + self.bias, x

    def backward(self, cache, grad_out):
        x = cache
        grad_w = x.T @ grad_out
        grad_b = grad_out.sum(axis=0)
        grad_in = grad_out @ self.weight.T
        return grad_in, {"weight": grad_w, "bias": grad_b}


def _window_cols(x: np.ndarray, k: int) -> np.ndarray:
    """Gather all k-by-k windows of an NCHW array into a patch matrix.

    Returns (N, H_out, W_out, C*k*k); the reduction axis is laid out so a
    single matmul against the reshaped kernel computes the correlation.
    """
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    n, c, ho, wo = win.shape[:4]
    return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(n, ho, wo, c * k * k)


class Conv2d(Layer):
    """Valid (no padding) stride-1 cross-correlation.

    Forward builds an im2col patch matrix and runs one matmul per batch.
    Backward reuses the cached patches for the kernel gradient; the input
    gradient is the full correlation of the upstream gradient with the
    spatially flipped, channel-transposed kernel, computed with the same
    im2col machinery on a zero-padded gradient.
    """

    def __init__(self, spec: LayerSpec, rng: np.random.Generator):
        self.spec = spec
        k = spec.kernel
        fan_in = spec.in_channels * k * k
        fan_out = spec.out_channels * k * k
        self.weight = _glorot_uniform(rng, (spec.out_channels, spec.in_channels, k, k), fan_in, fan_out)
        self.bias = np.zeros(spec.out_channels, dtype=np.float64)

    def params(self):
        return {"weight": self.weight, "bias": self.bias}

    def out_shape(self, in_shape):
        k = self.spec.kernel
        if len(in_shape) != 3 or in_shape[0] != self.spec.in_channels:
            raise ShapeError(f"conv2d expects ({self.spec.in_channels}, H, W) input, got {in_shape}")
        c, h, w = in_shape
        if h < k or w < k:
            raise ShapeError(f"conv2d kernel {k}x{k} does not fit input {in_shape}")
        return (self.spec.out_channels, h - k + 1, w - k + 1)

    def forward(self, x):
        k = self.spec.kernel
        cols = _window_cols(x, k)
        wmat = self.weight.reshape(self.spec.out_channels, -1)
        y = cols @ wmat.T + self.bias
        return y.transpose(0, 3, 1, 2), (x.shape, cols)

    def backward(self, cache, grad_out):
        x_shape, cols = cache
        k = self.spec.kernel
        c_out = self.spec.out_channels
        c_in = self.spec.in_channels

        g = np.ascontiguousarray(grad_out.transpose(0, 2, 3, 1))  # (N, Ho, Wo, Cout)
        grad_w = (g.reshape(-1, c_out).T @ cols.reshape(-1, c_in * k * k)).reshape(self.weight.shape)
        grad_b = g.sum(axis=(0, 1, 2))

        pad = k - 1
        gpad = np.pad(grad_out, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        gcols = _window_cols(gpad, k)  # (N, H, W, Cout*k*k)
        wflip = self.weight[:, :, ::-1, ::-1].transpose(1, 0, 2, 3).reshape(c_in, -1)
        grad_in = (gcols @ wflip.T).transpose(0, 3, 1, 2)
        assert grad_in.shape == x_shape
        return grad_in, {"weight": grad_w, "bias": grad_b}


class MaxPool2x2(Layer):
    """2x2 max pooling with stride 2.

    Odd trailing rows/columns are dropped. Backward routes each upstream
    gradient entry to exactly one input position (the argmax of its window;
    ties go to the first position in row-major order), so the routed gradient
    mass equals the upstream mass.
    """

    def __init__(self, spec: LayerSpec):
        self.spec = spec

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"maxpool2x2 expects (C, H, W) input, got {in_shape}")
        c, h, w = in_shape
        if h < 2 or w < 2:
            raise ShapeError(f"maxpool2x2 needs at least 2x2 input, got {in_shape}")
        return (c, h // 2, w // 2)

    def forward(self, x):
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        v = (
            x[:, :, : h2 * 2, : w2 * 2]
            .reshape(n, c, h2, 2, w2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h2, w2, 4)
        )
        idx = v.argmax(axis=-1)
        y = np.take_along_axis(v, idx[..., None], axis=-1)[..., 0]
        return y, (x.shape, idx)

    def backward(self, cache, grad_out):
        (n, c, h, w), idx = cache
        h2, w2 = h // 2, w // 2
        buf = np.zeros((n, c, h2, w2, 4), dtype=np.float64)
        np.put_along_axis(buf, idx[..., None], grad_out[..., None], axis=-1)
        grad_in = np.zeros((n, c, h, w), dtype=np.float64)
        grad_in[:, :, : h2 * 2, : w2 * 2] = (
            buf.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2 * 2, w2 * 2)
        )
        return grad_in, None


class ReLU(Layer):
    def __init__(self, spec: LayerSpec):
        self.spec = spec

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        mask = x > 0
        return x * mask, mask

    def backward(self, cache, grad_out):
        return grad_out * cache, None


class Flatten(Layer):
    def __init__(self, spec: LayerSpec):
        self.spec = spec

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache, grad_out):
        return grad_out.reshape(cache), None


def make_layer(spec: LayerSpec, rng: np.random.Generator) -> Layer:
    if spec.kind == "dense":
        return Dense(spec, rng)
    if spec.kind == "conv2d":
        return Conv2d(spec, rng)
    if spec.kind == "maxpool2x2":
        return MaxPool2x2(spec)
    if spec.kind == "relu":
        return ReLU(spec)
    if spec.kind == "flatten":
        return Flatten(spec)
    raise InvalidArgumentError(f"unknown layer kind: {spec.kind!r}")
