"""Sliding-window reduction of encoder states to a sparser time resolution.

A sequence of T hidden vectors is cut into windows of ``length`` frames
advancing by ``stride`` frames (the tail window may be shorter), and each
window is combined into a single vector by one of three strategies:

* ``ae`` - plain average of the window's frames,
* ``lc`` - learned per-position coefficients (a short tail uses the prefix),
* ``sa`` - attention: softmax over per-frame scores from a shared projection.

This shrinks every downstream per-frame cost from T to floor((T-1)/stride)+1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EmptyInputError
from .tensor import Tensor, softmax, stack

STRATEGIES = ("ae", "lc", "sa")


@dataclass(frozen=True)
class WindowConfig:
    length: int = 1
    stride: int = 1
    strategy: str = "ae"

    def __post_init__(self):
        if self.length < 1 or self.stride < 1:
            raise ContractError(
                f"window length and stride must be >= 1, got {self.length} and {self.stride}")
        if self.strategy not in STRATEGIES:
            raise ContractError(
                f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}")


def sparse_length(n_frames: int, stride: int) -> int:
    """Window count for a sequence: floor((n_frames - 1) / stride) + 1."""
    if n_frames < 1:
        raise EmptyInputError("need at least one frame")
    return (n_frames - 1) // stride + 1


@dataclass
class SparseParams:
    """Trainable state of the combination strategies (plain averaging has none)."""
    coeffs: Tensor | None = None    # (length,) per-position weights, lc
    score_w: Tensor | None = None   # (hidden_dim,) frame-scoring projection, sa
    score_b: Tensor | None = None   # () scoring bias, sa

    @classmethod
    def uniform(cls, cfg: WindowConfig, hidden_dim: int) -> "SparseParams":
        """Parameters at which every full window reduces to the plain average
        (a short tail under lc keeps its unnormalized coefficient prefix)."""
        return cls(
            coeffs=Tensor(np.full(cfg.length, 1.0 / cfg.length), requires_grad=True),
            score_w=Tensor(np.zeros(hidden_dim), requires_grad=True),
            score_b=Tensor(0.0, requires_grad=True),
        )

    @classmethod
    def init(cls, cfg: WindowConfig, hidden_dim: int, rng: np.random.Generator) -> "SparseParams":
        """Training start: near-uniform coefficients, small random scoring."""
        if cfg.strategy == "ae":
            return cls()
        if cfg.strategy == "lc":
            coeffs = 1.0 / cfg.length + 0.01 * rng.uniform(-1.0, 1.0, size=cfg.length)
            return cls(coeffs=Tensor(coeffs, requires_grad=True))
        bound = 1.0 / np.sqrt(hidden_dim)
        return cls(
            score_w=Tensor(rng.uniform(-bound, bound, size=hidden_dim), requires_grad=True),
            score_b=Tensor(0.0, requires_grad=True),
        )


def decompose(hidden: Tensor, cfg: WindowConfig) -> list[Tensor]:
    """Cut (T, d) hidden states into windows; window i covers
    frames [i*stride, min(i*stride + length, T))."""
    n = hidden.shape[0]
    count = sparse_length(n, cfg.stride)
    return [hidden[i * cfg.stride: min(i * cfg.stride + cfg.length, n)]
            for i in range(count)]


def combine_ae(window: Tensor) -> Tensor:
    """Plain average of the window's frames."""
    n = window.shape[0]
    if n < 1:
        raise EmptyInputError("empty window")
    return window.sum(axis=0) * (1.0 / n)


def combine_lc(window: Tensor, coeffs: Tensor) -> Tensor:
    """Weighted sum with one coefficient per window position; a short tail
    window uses the coefficient prefix.  Weights are not normalized."""
    n = window.shape[0]
    if n < 1:
        raise EmptyInputError("empty window")
    if n > coeffs.shape[0]:
        raise ContractError(
            f"window of {n} frames exceeds the {coeffs.shape[0]} coefficients")
    return coeffs[:n] @ window


def combine_sa(window: Tensor, params: SparseParams) -> Tensor:
    """Convex combination of the window's frames, weighted by a softmax over
    per-frame scores from a single shared projection."""
    n = window.shape[0]
    if n < 1:
        raise EmptyInputError("empty window")
    scores = window @ params.score_w + params.score_b
    return softmax(scores) @ window


def sparsify(hidden: Tensor, cfg: WindowConfig, params: SparseParams | None = None) -> Tensor:
    """Reduce (T, d) hidden states to (T', d) by windowed combination.

    With length == stride == 1 this is the identity map for ``ae`` and ``sa``
    regardless of parameter values (a singleton softmax is exactly [1.0]),
    and for ``lc`` whenever the single coefficient is exactly 1.0.
    """
    windows = decompose(hidden, cfg)
    if cfg.strategy == "ae":
        combined = [combine_ae(w) for w in windows]
    elif cfg.strategy == "lc":
        if params is None or params.coeffs is None:
            raise ContractError("lc strategy needs coefficient parameters")
        combined = [combine_lc(w, params.coeffs) for w in windows]
    else:
        if params is None or params.score_w is None or params.score_b is None:
            raise ContractError("sa strategy needs scoring parameters")
        combined = [combine_sa(w, params) for w in windows]
    return stack(combined)
