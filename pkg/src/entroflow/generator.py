"""The hybrid generator: a frozen inner model steered by a tiny outer model.

A 200-value window of physical samples is pushed through repeated cycles:

1. The outer model (one scale and one offset per adjusted position) takes
   a gradient step that moves the inner model's output toward 0.5.
2. Collapse-and-inject: the adjusted values are written back into the
   window, clamped to [0, 1), and the outer parameters reset to identity.
   The learned effect lives in the data, not in the weights.
3. The window shifts left one slot and a fresh physical sample enters on
   the right from the reseed buffer.

Every ``cycles_per_emission`` cycles the window is emitted as one output
sequence.  The inner model stays frozen throughout; only the data and the
four outer scalars move.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import nnet
from .errors import GeneratorDiverged, InsufficientData, ReseedRequired, ShapeError
from .seedsrc import FLOAT32_BELOW_ONE, SEQUENCE_LEN, FloatSequence

__all__ = [
    "GeneratorConfig",
    "OuterModel",
    "GeneratorState",
    "init_state",
    "outer_train_step",
    "collapse_and_inject",
    "shift_left",
    "generate_sequence",
    "generate_stream",
    "reseed",
    "seed_cost",
    "scale_to_units",
]


@dataclass
class GeneratorConfig:
    """Outer-loop knobs.  Positions are 1-based window slots."""

    eta_outer: float = 0.05
    train_steps_per_cycle: int = 1
    cycles_per_emission: int = 50
    positions: tuple = (50, 100, 150, 200)
    target: float = 0.5

    def __post_init__(self) -> None:
        pos = tuple(int(p) for p in self.positions)
        if len(set(pos)) != len(pos) or any(not 1 <= p <= SEQUENCE_LEN for p in pos):
            raise ShapeError("positions must be distinct slots in 1..200")
        self.positions = pos
        if self.eta_outer < 0:
            raise ShapeError("eta_outer must be non-negative")
        if self.train_steps_per_cycle < 1 or self.cycles_per_emission < 1:
            raise ShapeError("cycle counts must be positive")

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.intp) - 1


@dataclass
class OuterModel:
    """Diagonal affine map over the adjusted positions: s -> w*s + b."""

    scale: np.ndarray  # w, one per adjusted position
    offset: np.ndarray  # b, one per adjusted position

    @classmethod
    def identity(cls, k: int) -> "OuterModel":
        return cls(scale=np.ones(k, dtype=np.float64), offset=np.zeros(k, dtype=np.float64))

    def reset(self) -> None:
        self.scale[:] = 1.0
        self.offset[:] = 0.0


@dataclass
class GeneratorState:
    window: np.ndarray  # float32, shape (200,)
    inner: nnet.Network
    outer: OuterModel
    config: GeneratorConfig
    buffer: deque = field(default_factory=deque)  # pending float32 refills
    cycle_count: int = 0
    shift_count: int = 0
    emission_count: int = 0


def init_state(
    inner: nnet.Network, seed: FloatSequence, config: GeneratorConfig | None = None
) -> GeneratorState:
    """Start a generator run from one seed sequence.

    The inner model must be frozen.  The reseed buffer starts empty; feed
    it with reseed() before generating.
    """
    nnet.require_frozen(inner)
    if inner.input_dim != SEQUENCE_LEN or inner.output_dim != 1:
        raise ShapeError("inner model must map a 200-value window to a scalar")
    cfg = config or GeneratorConfig()
    return GeneratorState(
        window=seed.values.copy(), inner=inner, outer=OuterModel.identity(len(cfg.positions)), config=cfg
    )


def reseed(state: GeneratorState, fresh: FloatSequence) -> None:
    """Queue 200 fresh physical samples for the right edge of the window."""
    state.buffer.extend(np.asarray(fresh.values, dtype=np.float32))


def seed_cost(n_sequences: int, config: GeneratorConfig | None = None) -> int:
    """Seed sequences consumed to emit n_sequences (one to start, then refills)."""
    cfg = config or GeneratorConfig()
    refills = cfg.cycles_per_emission * n_sequences  # one buffer value per shift
    return 1 + -(-refills // SEQUENCE_LEN)


def _candidates(state: GeneratorState) -> np.ndarray:
    """float32 values the affine map would inject at the adjusted slots."""
    idx = state.config.indices
    s = state.window[idx].astype(np.float64)
    return (state.outer.scale * s + state.outer.offset).astype(np.float32)


def _window_with(state: GeneratorState, cand: np.ndarray) -> np.ndarray:
    w = state.window.astype(np.float64)
    w[state.config.indices] = cand.astype(np.float64)
    return w


def outer_train_step(state: GeneratorState) -> tuple:
    """One gradient step on the outer scalars; returns (loss_before, loss_after).

    The loss is |inner(window-with-adjustments) - target|.  Gradients flow
    through the inner model to the adjusted inputs and then to the scale
    and offset of each adjusted position.
    """
    cfg = state.config
    idx = cfg.indices
    s = state.window[idx].astype(np.float64)

    cand = _candidates(state)
    adjusted = _window_with(state, cand)
    pred = nnet.forward(state.inner, adjusted)
    loss_before = abs(pred - cfg.target)

    g_full = nnet.grad_inputs(state.inner, adjusted, cfg.target)
    g = g_full[idx]
    state.outer.scale -= cfg.eta_outer * g * s
    state.outer.offset -= cfg.eta_outer * g

    loss_after = abs(nnet.forward(state.inner, _window_with(state, _candidates(state))) - cfg.target)
    return loss_before, loss_after


def collapse_and_inject(state: GeneratorState) -> None:
    """Write the adjusted values into the window; reset the outer model.

    Values are clamped to [0, largest float32 below 1].  When no clamping
    occurs the injected window is exactly the one the last train step
    evaluated, so the inner output is unchanged by the collapse.
    """
    cand = _candidates(state)
    if not np.all(np.isfinite(cand)):
        raise GeneratorDiverged("outer model produced a non-finite value")
    np.clip(cand, np.float32(0.0), FLOAT32_BELOW_ONE, out=cand)
    state.window[state.config.indices] = cand
    state.outer.reset()


def shift_left(state: GeneratorState) -> None:
    """Age the window one slot; the newest slot takes a buffered sample."""
    if not state.buffer:
        raise ReseedRequired("reseed buffer is empty")
    state.window[:-1] = state.window[1:]
    state.window[-1] = state.buffer.popleft()
    state.shift_count += 1


def generate_sequence(state: GeneratorState) -> FloatSequence:
    """Run cycles_per_emission full cycles and emit a copy of the window."""
    cfg = state.config
    for _ in range(cfg.cycles_per_emission):
        for _ in range(cfg.train_steps_per_cycle):
            outer_train_step(state)
        collapse_and_inject(state)
        shift_left(state)
        state.cycle_count += 1
    if not np.all(np.isfinite(state.window)):
        raise GeneratorDiverged("window holds a non-finite value")
    state.emission_count += 1
    return FloatSequence(values=state.window.copy(), origin="generated")


def generate_stream(
    inner: nnet.Network,
    seeds,
    n_sequences: int,
    config: GeneratorConfig | None = None,
) -> list:
    """Emit n_sequences, reseeding from a list of seed sequences as needed.

    seeds[0] becomes the initial window; later entries refill the buffer.
    Raises InsufficientData up front when the seed corpus cannot cover the
    request.
    """
    cfg = config or GeneratorConfig()
    seeds = list(seeds)
    need = seed_cost(n_sequences, cfg)
    if len(seeds) < need:
        raise InsufficientData(
            f"{n_sequences} emissions need {need} seed sequences, got {len(seeds)}"
        )
    state = init_state(inner, seeds[0], cfg)
    next_seed = 1
    out = []
    for _ in range(n_sequences):
        while len(state.buffer) < cfg.cycles_per_emission:
            reseed(state, seeds[next_seed])
            next_seed += 1
        out.append(generate_sequence(state))
    return out


def scale_to_units(values) -> np.ndarray:
    """Map [0, 1) floats to integers in [0, 1000) by floor(v * 1000)."""
    v = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if v.size and (v.min() < 0.0 or v.max() >= 1.0):
        raise ShapeError("scale_to_units expects values in [0, 1)")
    return np.floor(v * 1000.0).astype(np.int32)
