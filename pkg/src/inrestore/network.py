"""Coordinate network: construction, forward evaluation, exact gradients.

The network maps 2-D pixel coordinates to RGB values through ``depth``
hidden layers of one activation kind plus a final linear layer.  Sine
hidden layers compute ``sin(omega0 * (W x + b))`` with the matched uniform
initialization (first layer ``U(-1/fan_in, 1/fan_in)``, every later layer
``U(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0)``); the other kinds use
a plain fan-in scheme ``U(-sqrt(6/fan_in), +sqrt(6/fan_in))``.  Biases start
at zero.

``forward`` records everything ``backward`` needs in a :class:`ForwardTape`.
Passing a previously returned tape back into ``forward`` reuses its buffers
(the hot loop allocates nothing); doing so invalidates outputs returned from
the earlier call, so copy anything you keep.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .numerics import Rng

__all__ = [
    "Activation",
    "RawCoords",
    "PositionalEncoding",
    "LayerParams",
    "Network",
    "ForwardTape",
    "encode",
    "init_network",
    "forward",
    "backward",
]

# Standard SeLU constants (Klambauer et al.).
_SELU_ALPHA = 1.6732632423543772
_SELU_LAMBDA = 1.0507009873554805


class Activation(enum.Enum):
    SINE = "sine"
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    SELU = "selu"


class RawCoords:
    """Identity encoding: the network sees the normalized coordinates."""

    def encoded_dim(self, in_dim: int) -> int:
        return in_dim

    def encode(self, coords: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is not None:
            np.copyto(out, coords)
            return out
        return coords

    def __repr__(self) -> str:
        return "RawCoords()"

    def __eq__(self, other) -> bool:
        return isinstance(other, RawCoords)


@dataclass(frozen=True)
class PositionalEncoding:
    """Multi-frequency sine/cosine lift of each coordinate.

    Each scalar p expands to 2*num_frequencies values, ordered
    sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^(L-1) pi p), cos(2^(L-1) pi p);
    blocks for the coordinates are concatenated in column order, so an
    N x 2 input becomes N x 4L.  The raw coordinate is not included.
    """

    num_frequencies: int

    def encoded_dim(self, in_dim: int) -> int:
        return 2 * self.num_frequencies * in_dim

    def encode(self, coords: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        n, in_dim = coords.shape
        L = self.num_frequencies
        freqs = np.pi * (2.0 ** np.arange(L))
        # column order of args is coordinate-major, then frequency
        args = np.ascontiguousarray(
            (coords[:, :, None] * freqs[None, None, :]).reshape(n, in_dim * L)
        )
        if out is None:
            out = np.empty((n, 2 * in_dim * L), dtype=np.float64)
        out[:, 0::2] = K.sin(args)
        out[:, 1::2] = K.cos(args)
        return out


def encode(encoding, coords: np.ndarray) -> np.ndarray:
    """Apply an input encoding to an N x in_dim coordinate batch."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2:
        raise ValueError(f"coords must be 2-D, got shape {coords.shape}")
    return encoding.encode(coords)


@dataclass
class LayerParams:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)


@dataclass
class Network:
    layers: list[LayerParams]
    activation: Activation
    encoding: RawCoords | PositionalEncoding
    omega0: float
    in_dim: int
    out_dim: int

    @property
    def n_params(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)


@dataclass
class ForwardTape:
    """Per-layer caches from one forward pass, consumed by ``backward``.

    ``zs`` holds the pre-activations (already scaled by omega0 for sine
    layers) and ``hs`` the activations; ``x_enc`` is the encoded input.
    """

    net: Network
    n: int
    x_enc: np.ndarray | None = None
    zs: list[np.ndarray] = field(default_factory=list)
    hs: list[np.ndarray] = field(default_factory=list)
    out: np.ndarray | None = None
    _genc: np.ndarray | None = None  # backward scratch, lazily allocated
    _gz: np.ndarray | None = None

    @property
    def depth(self) -> int:
        return len(self.zs)

    def _matches(self, net: Network, n: int) -> bool:
        if self.n != n or len(self.zs) != len(net.layers) - 1:
            return False
        for z, layer in zip(self.zs, net.layers):
            if z.shape != (n, layer.weights.shape[0]):
                return False
        return self.out is not None and self.out.shape == (n, net.out_dim)


def _allocate_tape(net: Network, n: int) -> ForwardTape:
    tape = ForwardTape(net=net, n=n)
    for layer in net.layers[:-1]:
        width = layer.weights.shape[0]
        tape.zs.append(np.empty((n, width), dtype=np.float64))
        tape.hs.append(np.empty((n, width), dtype=np.float64))
    tape.out = np.empty((n, net.out_dim), dtype=np.float64)
    return tape


def init_network(
    rng: Rng,
    depth: int,
    width: int,
    in_dim: int = 2,
    out_dim: int = 3,
    omega0: float = 30.0,
    activation: Activation = Activation.SINE,
    encoding: RawCoords | PositionalEncoding | None = None,
) -> Network:
    """Build and initialize a network with ``depth`` hidden layers.

    ``depth`` counts hidden layers only; a final linear layer to ``out_dim``
    is always appended.
    """
    if depth < 1 or width < 1 or in_dim < 1 or out_dim < 1:
        raise ValueError(
            f"depth, width and dims must be >= 1, got depth={depth}, "
            f"width={width}, in_dim={in_dim}, out_dim={out_dim}"
        )
    if omega0 <= 0:
        raise ValueError(f"omega0 must be > 0, got {omega0}")
    encoding = encoding if encoding is not None else RawCoords()

    dims = [encoding.encoded_dim(in_dim)] + [width] * depth + [out_dim]
    layers = []
    for k in range(len(dims) - 1):
        fan_in, fan_out = dims[k], dims[k + 1]
        if activation is Activation.SINE:
            bound = 1.0 / fan_in if k == 0 else np.sqrt(6.0 / fan_in) / omega0
        else:
            bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(fan_out * fan_in, -bound, bound).reshape(fan_out, fan_in)
        layers.append(LayerParams(w, np.zeros(fan_out, dtype=np.float64)))
    return Network(layers, activation, encoding, float(omega0), in_dim, out_dim)


def _act_forward(kind: Activation, z: np.ndarray, out: np.ndarray) -> np.ndarray:
    if kind is Activation.SINE:
        return K.sin(z, out=out)
    if kind is Activation.RELU:
        return np.maximum(z, 0.0, out=out)
    if kind is Activation.TANH:
        return np.tanh(z, out=out)
    if kind is Activation.SIGMOID:
        np.negative(z, out=out)
        np.exp(out, out=out)
        out += 1.0
        np.reciprocal(out, out=out)
        return out
    if kind is Activation.SELU:
        np.exp(np.minimum(z, 0.0), out=out)
        out -= 1.0
        out *= _SELU_ALPHA
        np.maximum(out, z, out=out)  # z > 0 branch: z itself exceeds alpha*(e^z-1)
        out *= _SELU_LAMBDA
        return out
    raise ValueError(f"unknown activation {kind}")


def _act_deriv(
    kind: Activation, z: np.ndarray, h: np.ndarray, out: np.ndarray
) -> np.ndarray:
    """d(activation)/d(pre-activation) for the non-sine kinds.

    Sine is handled inline in ``backward``: its omega0 factor is folded
    into the (much smaller) per-layer gradient matrices instead of the
    N x width buffers.
    """
    if kind is Activation.SINE:
        raise ValueError("sine derivative is handled inline in backward")
    if kind is Activation.RELU:
        out[:] = z > 0.0
        return out
    if kind is Activation.TANH:
        np.multiply(h, h, out=out)
        np.subtract(1.0, out, out=out)
        return out
    if kind is Activation.SIGMOID:
        np.subtract(1.0, h, out=out)
        out *= h
        return out
    if kind is Activation.SELU:
        # z <= 0: lambda*alpha*e^z == h + lambda*alpha; z > 0: lambda
        np.add(h, _SELU_LAMBDA * _SELU_ALPHA, out=out)
        np.minimum(out, _SELU_LAMBDA, out=out)
        return out
    raise ValueError(f"unknown activation {kind}")


def forward(
    net: Network, coords: np.ndarray, tape: ForwardTape | None = None
) -> tuple[np.ndarray, ForwardTape]:
    """Evaluate the network on an N x in_dim coordinate batch.

    Returns the raw (unclamped) N x out_dim outputs and the tape for
    ``backward``.  Pass the returned tape back in to reuse its buffers on
    the next call with the same batch shape.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != net.in_dim:
        raise ValueError(
            f"coords must be N x {net.in_dim}, got shape {coords.shape}"
        )
    if not np.all(np.isfinite(coords)):
        raise ValueError("coords contain non-finite values")
    n = coords.shape[0]
    if tape is None or not tape._matches(net, n):
        tape = _allocate_tape(net, n)
    tape.net = net

    sine = net.activation is Activation.SINE
    if isinstance(net.encoding, RawCoords):
        x = coords
    else:
        d = net.encoding.encoded_dim(net.in_dim)
        buf = tape.x_enc
        if buf is None or buf.shape != (n, d):
            buf = None
        x = net.encoding.encode(coords, out=buf)
    tape.x_enc = x

    h = x
    om = net.omega0
    for i, layer in enumerate(net.layers[:-1]):
        if sine:  # z = omega0*(Wx+b), with the scale folded into the affine map
            z = K.linear(h, om * layer.weights, om * layer.bias, out=tape.zs[i])
        else:
            z = K.linear(h, layer.weights, layer.bias, out=tape.zs[i])
        h = _act_forward(net.activation, z, out=tape.hs[i])
    last = net.layers[-1]
    out = K.linear(h, last.weights, last.bias, out=tape.out)
    return out, tape


def backward(
    net: Network, tape: ForwardTape, grad_outputs: np.ndarray
) -> list[LayerParams]:
    """Exact reverse-mode gradients of sum(grad_outputs * outputs).

    Returns one :class:`LayerParams` of gradients per layer, in layer order.
    """
    if tape.net is not net:
        raise ValueError("tape was produced by a different network")
    grad_outputs = np.asarray(grad_outputs, dtype=np.float64)
    if grad_outputs.shape != tape.out.shape:
        raise ValueError(
            f"grad_outputs shape {grad_outputs.shape} does not match "
            f"outputs shape {tape.out.shape}"
        )
    n_hidden = len(net.layers) - 1
    grads: list[LayerParams | None] = [None] * len(net.layers)

    # final linear layer
    h_last = tape.hs[-1] if n_hidden else tape.x_enc
    g = np.ascontiguousarray(grad_outputs)
    grads[-1] = LayerParams(K.mm(g.T, h_last), g.sum(axis=0))

    if n_hidden:
        sine = net.activation is Activation.SINE
        om = net.omega0
        width = net.layers[-2].weights.shape[0]
        if tape._genc is None or tape._genc.shape != (tape.n, width):
            tape._genc = np.empty((tape.n, width), dtype=np.float64)
            tape._gz = np.empty((tape.n, width), dtype=np.float64)
        gh = K.mm(g, net.layers[-1].weights, out=tape._genc)
        for i in range(n_hidden - 1, -1, -1):
            if sine:
                gz = K.cos(tape.zs[i], out=tape._gz)
            else:
                gz = _act_deriv(net.activation, tape.zs[i], tape.hs[i], out=tape._gz)
            gz *= gh
            xin = tape.x_enc if i == 0 else tape.hs[i - 1]
            dw = K.mm(gz.T, xin)
            db = gz.sum(axis=0)
            if sine:  # gz omitted the omega0 chain factor; apply it here
                dw *= om
                db *= om
            grads[i] = LayerParams(dw, db)
            if i > 0:
                w_prop = om * net.layers[i].weights if sine else net.layers[i].weights
                gh = K.mm(gz, w_prop, out=tape._genc)
    return grads
