"""The fitting engine: task losses, Adam updates, and training traces.

A restoration run fits one coordinate network to one or more corrupted
observations of the same scene.  Each task contributes
``weight * meanSq(op.apply(render) - observed)`` to the loss; for mask
operators the mean runs over kept elements only.  Gradients reach the
network by chaining each operator's exact adjoint into reverse mode.

The loss uses the mean (not sum) of squared residuals so the default
learning rate is meaningful across image sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .degradations import CoordGrid, DegradationOp, Mask, make_coord_grid
from .network import (
    Activation,
    ForwardTape,
    LayerParams,
    Network,
    PositionalEncoding,
    RawCoords,
    backward,
    forward,
    init_network,
)
from .numerics import Rng

__all__ = [
    "TaskSpec",
    "TrainConfig",
    "AdamState",
    "TraceRow",
    "TrainTrace",
    "RestorationResult",
    "NonFiniteLossError",
    "LossResult",
    "render",
    "loss_and_grads",
    "adam_step",
    "restore",
]


class NonFiniteLossError(FloatingPointError):
    """Raised when the training loss stops being finite."""

    def __init__(self, iteration: int, loss: float):
        super().__init__(f"non-finite loss {loss} at iteration {iteration}")
        self.iteration = iteration
        self.loss = loss


@dataclass
class TaskSpec:
    """One observation with the operator that produced it and its loss weight."""

    observed: np.ndarray  # (H_obs, W_obs, C)
    op: DegradationOp
    weight: float = 1.0

    def __post_init__(self):
        self.observed = np.asarray(self.observed, dtype=np.float64)
        if self.observed.ndim != 3:
            raise ValueError(
                f"observed must be H x W x C, got shape {self.observed.shape}"
            )
        if self.op.out_shape != self.observed.shape[:2]:
            raise ValueError(
                f"operator output {self.op.out_shape} does not match "
                f"observed image {self.observed.shape[:2]}"
            )
        if not self.weight > 0:
            raise ValueError(f"task weight must be > 0, got {self.weight}")


@dataclass
class TrainConfig:
    canonical_size: tuple[int, int]
    iterations: int = 500
    learning_rate: float = 1e-4
    seed: int = 0
    width: int = 256
    depth: int = 6
    omega0: float = 30.0
    activation: Activation = Activation.SINE
    encoding: RawCoords | PositionalEncoding = field(default_factory=RawCoords)
    snapshot_every: int = 10
    reference: np.ndarray | None = None  # clean image, evaluation only


@dataclass
class AdamState:
    m: list[LayerParams]
    v: list[LayerParams]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initial(cls, layers: list[LayerParams]) -> "AdamState":
        zeros = lambda l: LayerParams(np.zeros_like(l.weights), np.zeros_like(l.bias))
        return cls(m=[zeros(l) for l in layers], v=[zeros(l) for l in layers])


def adam_step(
    state: AdamState,
    params: list[LayerParams],
    grads: list[LayerParams],
    lr: float,
) -> tuple[list[LayerParams], AdamState]:
    """One bias-corrected Adam update; returns new parameters and state."""
    if lr <= 0:
        raise ValueError(f"learning rate must be > 0, got {lr}")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state must have matching layer counts")
    t = state.t + 1
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.weights.shape != g.weights.shape or p.bias.shape != g.bias.shape:
            raise ValueError(
                f"gradient shape {g.weights.shape} does not match "
                f"parameter shape {p.weights.shape}"
            )
        updated = []
        for pa, ga, ma, va in (
            (p.weights, g.weights, m.weights, v.weights),
            (p.bias, g.bias, m.bias, v.bias),
        ):
            m2 = state.beta1 * ma + (1.0 - state.beta1) * ga
            v2 = state.beta2 * va + (1.0 - state.beta2) * ga * ga
            step = (lr / c1) * m2 / (np.sqrt(v2 / c2) + state.eps)
            updated.append((pa - step, m2, v2))
        new_params.append(LayerParams(updated[0][0], updated[1][0]))
        new_m.append(LayerParams(updated[0][1], updated[1][1]))
        new_v.append(LayerParams(updated[0][2], updated[1][2]))
    return new_params, AdamState(
        new_m, new_v, t, state.beta1, state.beta2, state.eps
    )


def render(net: Network, grid: CoordGrid) -> np.ndarray:
    """One raw (unclamped) H x W x C image from a full forward pass."""
    out, _ = forward(net, grid.coords)
    return out.reshape(grid.height, grid.width, net.out_dim)


@dataclass
class LossResult:
    loss: float
    task_losses: tuple[float, ...]
    grads: list[LayerParams]
    render: np.ndarray  # view into tape buffers; copy before reusing the tape
    tape: ForwardTape


def loss_and_grads(
    net: Network,
    grid: CoordGrid,
    tasks: list[TaskSpec],
    tape: ForwardTape | None = None,
) -> LossResult:
    """Weighted multi-task loss and exact parameter gradients.

    For each task: weight * mean of squared residuals between the
    operator-degraded render and the observation; mask tasks average over
    kept elements only, so values hidden by the mask never train.
    """
    if not tasks:
        raise ValueError("at least one task is required")
    h, w = grid.height, grid.width
    for task in tasks:
        if task.op.in_shape != (h, w):
            raise ValueError(
                f"operator input {task.op.in_shape} does not match grid {h}x{w}"
            )
    out, tape = forward(net, grid.coords, tape=tape)
    img = out.reshape(h, w, net.out_dim)

    total = 0.0
    task_losses = []
    grad_img = np.zeros_like(img)
    for task in tasks:
        pred = task.op.apply(img)
        residual = pred - task.observed
        if isinstance(task.op, Mask):
            residual = task.op.apply(residual)
            n_eff = task.op.kept_pixels * img.shape[2]
            if n_eff == 0:
                raise ValueError("mask keeps no pixels; nothing to fit")
        else:
            n_eff = residual.size
        l = float(np.vdot(residual, residual)) / n_eff
        task_losses.append(l)
        total += task.weight * l
        grad_img += task.weight * task.op.adjoint(residual * (2.0 / n_eff))

    grads = backward(net, tape, grad_img.reshape(out.shape))
    return LossResult(float(total), tuple(task_losses), grads, img, tape)


@dataclass
class TraceRow:
    iteration: int
    loss: float
    task_losses: tuple[float, ...]
    psnr_ref: float | None
    psnr_obs: tuple[float, ...]


@dataclass
class TrainTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class RestorationResult:
    final: np.ndarray
    best: np.ndarray | None
    best_iteration: int
    trace: TrainTrace


def restore(config: TrainConfig, tasks: list[TaskSpec]) -> RestorationResult:
    """Fit a fresh network to the tasks for exactly ``config.iterations`` steps.

    The trace logs the initial state, every ``snapshot_every``-th iterate and
    the final state.  When a reference image is supplied, the snapshot with
    the highest PSNR against it is kept as ``best`` (evaluation only; it
    never steers training).
    """
    if config.iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {config.iterations}")
    if config.snapshot_every < 1:
        raise ValueError(f"snapshot_every must be >= 1, got {config.snapshot_every}")
    if not tasks:
        raise ValueError("at least one task is required")
    channels = tasks[0].observed.shape[2]
    for task in tasks:
        if task.observed.shape[2] != channels:
            raise ValueError("all tasks must share a channel count")
    h, w = config.canonical_size
    if config.reference is not None:
        ref = np.asarray(config.reference, dtype=np.float64)
        if ref.shape != (h, w, channels):
            raise ValueError(
                f"reference shape {ref.shape} does not match canonical "
                f"{h}x{w}x{channels}"
            )
        config = replace(config, reference=ref)

    grid = make_coord_grid(h, w)
    rng = Rng(config.seed)
    net = init_network(
        rng,
        depth=config.depth,
        width=config.width,
        in_dim=2,
        out_dim=channels,
        omega0=config.omega0,
        activation=config.activation,
        encoding=config.encoding,
    )
    state = AdamState.initial(net.layers)

    trace = TrainTrace()
    best_img: np.ndarray | None = None
    best_psnr = -math.inf
    best_iter = 0

    def log_row(iteration: int, res: LossResult) -> None:
        nonlocal best_img, best_psnr, best_iter
        p_ref = None
        if config.reference is not None:
            p_ref = metrics.psnr(res.render, config.reference)
            if p_ref > best_psnr:
                best_psnr = p_ref
                best_img = res.render.copy()
                best_iter = iteration
        p_obs = tuple(
            metrics.psnr(t.op.apply(res.render), t.observed) for t in tasks
        )
        trace.rows.append(
            TraceRow(iteration, res.loss, res.task_losses, p_ref, p_obs)
        )

    tape = None
    for step in range(1, config.iterations + 1):
        res = loss_and_grads(net, grid, tasks, tape=tape)
        tape = res.tape
        if not math.isfinite(res.loss):
            raise NonFiniteLossError(step - 1, res.loss)
        if (step - 1) % config.snapshot_every == 0:
            log_row(step - 1, res)
        new_layers, state = adam_step(
            state, net.layers, res.grads, config.learning_rate
        )
        net = replace(net, layers=new_layers)

    if config.iterations == 0:
        return RestorationResult(render(net, grid), None, 0, trace)

    res = loss_and_grads(net, grid, tasks, tape=tape)
    if not math.isfinite(res.loss):
        raise NonFiniteLossError(config.iterations, res.loss)
    log_row(config.iterations, res)
    final = res.render.copy()
    return RestorationResult(final, best_img, best_iter, trace)
