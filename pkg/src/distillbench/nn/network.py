"""Network container: an ordered layer stack with explicit backprop.

Shape compatibility between consecutive layers is validated once at
construction, so a successfully built network can always run a forward pass
on a well-shaped batch. Weights are drawn from a seeded generator in layer
order, which makes parameter initialization a pure function of
(architecture, seed).
"""

import hashlib
import re

import numpy as np

from ..errors import InvalidArgumentError, ShapeError, StateError
from .layers import LayerSpec, Shape, conv2d, dense, flatten, make_layer, maxpool2x2, relu

ROLES = ("teacher", "student")


class Network:
    def __init__(self, specs: list[LayerSpec], input_shape: Shape, role: str = "student", seed: int = 0):
        if role not in ROLES:
            raise InvalidArgumentError(f"role must be one of {ROLES}, got {role!r}")
        if not specs:
            raise InvalidArgumentError("network needs at least one layer")
        self.specs = list(specs)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.role = role
        self.seed = int(seed)
        self.architecture = ""  # set by build_network for named architectures
        self.trained_regime = ""  # provenance filled in when loaded from a checkpoint

        rng = np.random.default_rng(seed)
        self.layers = [make_layer(s, rng) for s in self.specs]

        shape = self.input_shape
        self.shape_chain = [shape]
        for i, layer in enumerate(self.layers):
            try:
                shape = layer.out_shape(shape)
            except ShapeError as exc:
                raise ShapeError(f"layer {i} ({layer.spec.kind}): {exc}") from None
            self.shape_chain.append(shape)
        if len(shape) != 1:
            raise ShapeError(f"network must end in a flat logit vector, got output shape {shape}")

        self._tape: list | None = None
        self._tape_batch: int | None = None

    # -- introspection -----------------------------------------------------

    @property
    def output_dim(self) -> int:
        return self.shape_chain[-1][0]

    def parameter_names(self) -> list[str]:
        names = []
        for i, layer in enumerate(self.layers):
            for key in layer.params():
                names.append(f"layer{i}.{key}")
        return names

    def parameters(self) -> list[np.ndarray]:
        """Live parameter arrays in a stable order; mutate in place to update."""
        out = []
        for layer in self.layers:
            out.extend(layer.params().values())
        return out

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def param_bytes(self) -> bytes:
        return b"".join(np.ascontiguousarray(p).tobytes() for p in self.parameters())

    def param_hash(self) -> str:
        return hashlib.sha256(self.param_bytes()).hexdigest()

    # -- passes ------------------------------------------------------------

    def _check_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != len(self.input_shape) + 1 or x.shape[1:] != self.input_shape:
            raise ShapeError(f"batch shape {x.shape} does not match input shape (N, {self.input_shape})")
        return x

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Run the stack and remember activations for a following backward()."""
        x = self._check_batch(x)
        tape = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            tape.append(cache)
        self._tape = tape
        self._tape_batch = x.shape[0]
        return x

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Forward pass that leaves no state behind; safe on frozen networks."""
        x = self._check_batch(x)
        for layer in self.layers:
            x, _ = layer.forward(x)
        return x

    def backward(self, grad_logits: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Chain-rule pass over the most recent forward().

        ``grad_logits`` is the gradient of the scalar loss with respect to the
        logits, including any batch reduction factor. Returns per-parameter
        gradients (aligned with parameters()) and the gradient with respect to
        the network input.
        """
        if self._tape is None:
            raise StateError("backward() requires a preceding forward() on the same batch")
        g = np.asarray(grad_logits, dtype=np.float64)
        expected = (self._tape_batch, self.output_dim)
        if g.shape != expected:
            raise ShapeError(f"grad_logits shape {g.shape} does not match logits shape {expected}")

        grads_rev = []
        for layer, cache in zip(reversed(self.layers), reversed(self._tape)):
            g, param_grads = layer.backward(cache, g)
            if param_grads is not None:
                grads_rev.extend(reversed(list(param_grads.values())))
        return list(reversed(grads_rev)), g


# -- architecture registry --------------------------------------------------

_MLP_RE = re.compile(r"^mlp:(\d+(?:-\d+)+)$")


def lenet5_specs(num_classes: int = 10) -> list[LayerSpec]:
    return [
        conv2d(1, 6), relu(), maxpool2x2(),
        conv2d(6, 16), relu(), maxpool2x2(),
        flatten(),
        dense(256, 120), relu(),
        dense(120, 84), relu(),
        dense(84, num_classes),
    ]


def lenet5_half_specs(num_classes: int = 10) -> list[LayerSpec]:
    # Every channel/unit count of the full model halved, rounding up.
    return [
        conv2d(1, 3), relu(), maxpool2x2(),
        conv2d(3, 8), relu(), maxpool2x2(),
        flatten(),
        dense(128, 60), relu(),
        dense(60, 42), relu(),
        dense(42, num_classes),
    ]


def build_network(architecture: str, role: str = "student", seed: int = 0) -> Network:
    """Instantiate a named architecture.

    Supported names: ``lenet5`` and ``lenet5_half`` (28x28 single-channel
    inputs, 10 classes) and ``mlp:<d0>-<d1>-...-<dk>`` where d0 is the input
    width, dk the number of classes, and interior sizes are hidden layers
    with relu activations.
    """
    net = None
    if architecture == "lenet5":
        net = Network(lenet5_specs(), (1, 28, 28), role=role, seed=seed)
    elif architecture == "lenet5_half":
        net = Network(lenet5_half_specs(), (1, 28, 28), role=role, seed=seed)
    else:
        m = _MLP_RE.match(architecture)
        if m:
            sizes = [int(s) for s in m.group(1).split("-")]
            if any(s < 1 for s in sizes):
                raise InvalidArgumentError(f"mlp sizes must be positive: {architecture}")
            specs: list[LayerSpec] = []
            for a, b in zip(sizes[:-1], sizes[1:]):
                specs.append(dense(a, b))
                specs.append(relu())
            specs.pop()  # logits layer has no activation
            net = Network(specs, (sizes[0],), role=role, seed=seed)
    if net is None:
        raise InvalidArgumentError(f"unknown architecture {architecture!r}")
    net.architecture = architecture
    return net
