"""Exact transducer negative log-likelihood over the decoding lattice.

A label sequence of length U aligned against T' (possibly time-sparse)
encoder states admits many monotone alignments: at lattice point (t, u) the
model either advances time by emitting blank or emits the next label and
stays on the same frame.  The loss sums the probability of every alignment
with a log-space forward recursion; ``brute_force_nll`` recomputes it by
explicit path enumeration on small grids and exists purely to cross-check
the recursion.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import ContractError, EmptyInputError
from .model import BLANK, START, TransducerModel, joint, predict_step
from .tensor import Tensor, logsumexp, stack


def _check_labels(labels, vocab_size: int) -> None:
    for lab in labels:
        if not 1 <= lab < vocab_size:
            raise ContractError(
                f"label {lab} outside 1..{vocab_size - 1} (blank cannot be a target)")


@dataclass
class Lattice:
    """Grid of per-(frame, emitted-count) log-distributions.

    ``lp(t, u)`` uses 1-based frame index t (1..n_frames) and 0-based emitted
    count u (0..n_labels), mirroring the forward recursion it feeds.
    """
    logprobs: list[list[Tensor]]    # [frame][emitted] -> (vocab,) log-probs
    n_frames: int
    n_labels: int
    vocab_size: int

    def lp(self, t: int, u: int) -> Tensor:
        return self.logprobs[t - 1][u]


def build_lattice(model: TransducerModel, hidden: Tensor, labels) -> Lattice:
    """Materialize the joint output at every lattice point: n_frames *
    (n_labels + 1) joint evaluations, the quantity the window stride shrinks."""
    n = hidden.shape[0]
    if n == 0:
        raise EmptyInputError("lattice needs at least one frame")
    _check_labels(labels, model.vocab.size)
    contexts = []
    g, state = predict_step(model.prediction, START)
    contexts.append(g)
    for lab in labels:
        g, state = predict_step(model.prediction, int(lab), state)
        contexts.append(g)
    grid = [[joint(hidden[t], g, model.joint) for g in contexts] for t in range(n)]
    return Lattice(grid, n, len(labels), model.vocab.size)


def forward_table(lattice: Lattice, labels) -> list[list[Tensor]]:
    """Log forward variables alpha[t][u]; alpha[1][0] = 0 and row/column
    borders accumulate pure-blank / pure-emit prefixes."""
    T, U = lattice.n_frames, lattice.n_labels
    if len(labels) != U:
        raise ContractError(f"lattice was built for {U} labels, got {len(labels)}")
    _check_labels(labels, lattice.vocab_size)
    alpha: list[list[Tensor | None]] = [[None] * (U + 1) for _ in range(T + 1)]
    alpha[1][0] = Tensor(0.0)
    for t in range(2, T + 1):
        alpha[t][0] = alpha[t - 1][0] + lattice.lp(t - 1, 0)[BLANK]
    for u in range(1, U + 1):
        alpha[1][u] = alpha[1][u - 1] + lattice.lp(1, u - 1)[int(labels[u - 1])]
    for t in range(2, T + 1):
        for u in range(1, U + 1):
            advance = alpha[t - 1][u] + lattice.lp(t - 1, u)[BLANK]
            emit = alpha[t][u - 1] + lattice.lp(t, u - 1)[int(labels[u - 1])]
            alpha[t][u] = logsumexp(stack([advance, emit]))
    return alpha


def transducer_nll(lattice: Lattice, labels) -> Tensor:
    """Negative log-probability of the labels, summed over all alignments;
    differentiable through the lattice back to every parameter."""
    alpha = forward_table(lattice, labels)
    T, U = lattice.n_frames, lattice.n_labels
    return -(alpha[T][U] + lattice.lp(T, U)[BLANK])


def alignment_paths(n_frames: int, n_labels: int):
    """All ways to place the label emissions among the pre-final moves."""
    yield from itertools.combinations(range(n_frames - 1 + n_labels), n_labels)


def brute_force_nll(lattice: Lattice, labels) -> float:
    """Loss by explicit enumeration of every monotone alignment.

    Path probabilities are summed in linear space with math.fsum.  Grids are
    capped at 6 frames x 4 labels; beyond that the enumeration has no value
    as an oracle.
    """
    T, U = lattice.n_frames, lattice.n_labels
    if T > 6 or U > 4:
        raise ContractError(f"brute force is capped at 6 frames x 4 labels, got {T} x {U}")
    if len(labels) != U:
        raise ContractError(f"lattice was built for {U} labels, got {len(labels)}")
    _check_labels(labels, lattice.vocab_size)
    probs = []
    for emit_slots in alignment_paths(T, U):
        slots = set(emit_slots)
        t, u = 1, 0
        logp = 0.0
        for slot in range(T - 1 + U):
            if slot in slots:
                logp += float(lattice.lp(t, u).data[int(labels[u])])
                u += 1
            else:
                logp += float(lattice.lp(t, u).data[BLANK])
                t += 1
        logp += float(lattice.lp(T, U).data[BLANK])
        probs.append(math.exp(logp))
    return -math.log(math.fsum(probs))
