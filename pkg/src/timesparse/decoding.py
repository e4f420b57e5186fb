"""Greedy and beam-search inference over (time-sparse) hidden states.

Both decoders are frame-synchronous: within a frame a hypothesis may emit up
to ``max_emit_per_frame`` labels and then must advance.  Advancing on blank
consumes the blank's log-probability; the forced advance at the emission cap
consumes nothing.  Decoding never builds gradient graph nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EmptyInputError
from .model import BLANK, START, TransducerModel, joint, predict_step
from .tensor import Tensor, no_grad


@dataclass(frozen=True)
class DecodeConfig:
    beam_width: int = 4
    max_emit_per_frame: int = 10

    def __post_init__(self):
        if self.beam_width < 1:
            raise ContractError(f"beam width must be >= 1, got {self.beam_width}")
        if self.max_emit_per_frame < 1:
            raise ContractError(
                f"per-frame emission cap must be >= 1, got {self.max_emit_per_frame}")


@dataclass
class Hypothesis:
    labels: tuple[int, ...]
    log_score: float
    pred_state: object = None


@dataclass
class DecodeStats:
    joint_calls: int = 0


class _Entry:
    __slots__ = ("labels", "score", "g", "state")

    def __init__(self, labels, score, g, state):
        self.labels = labels
        self.score = score
        self.g = g
        self.state = state


def greedy_decode(hidden: Tensor, model: TransducerModel,
                  cfg: DecodeConfig = DecodeConfig(), stats: DecodeStats | None = None) -> Hypothesis:
    """Frame-synchronous argmax walk; ties go to the lowest index, so an
    exact tie with blank advances the frame."""
    n = hidden.shape[0]
    if n == 0:
        raise EmptyInputError("decode needs at least one frame")
    with no_grad():
        g, state = predict_step(model.prediction, START)
        labels: list[int] = []
        score = 0.0
        for t in range(n):
            h = hidden[t]
            for _ in range(cfg.max_emit_per_frame):
                lp = joint(h, g, model.joint).data
                if stats is not None:
                    stats.joint_calls += 1
                k = int(np.argmax(lp))
                score += float(lp[k])
                if k == BLANK:
                    break
                labels.append(k)
                g, state = predict_step(model.prediction, k, state)
            # emission cap reached: forced advance, no blank factor
    return Hypothesis(labels=tuple(labels), log_score=score, pred_state=state)


def beam_decode(hidden: Tensor, model: TransducerModel,
                cfg: DecodeConfig = DecodeConfig(), stats: DecodeStats | None = None) -> Hypothesis:
    """Width-bounded frame-synchronous search.

    Hypotheses with identical label sequences merge by log-sum of their
    scores, separately among the frame-finished and the still-emitting rows.
    After every expansion step the distinct label sequences are pruned to
    the top ``beam_width`` by pooled mass across both rows, which makes
    width 1 follow the greedy argmax walk exactly and keeps a wide beam
    from splitting a hypothesis against itself.
    """
    n = hidden.shape[0]
    if n == 0:
        raise EmptyInputError("decode needs at least one frame")
    vocab = model.vocab.size
    with no_grad():
        g0, s0 = predict_step(model.prediction, START)
        beams: dict[tuple, _Entry] = {(): _Entry((), 0.0, g0, s0)}
        for t in range(n):
            h = hidden[t]
            finished: dict[tuple, _Entry] = {}
            alive = beams
            for _ in range(cfg.max_emit_per_frame):
                if not alive:
                    break
                grown: dict[tuple, _Entry] = {}
                for ent in alive.values():
                    lp = joint(h, ent.g, model.joint).data
                    if stats is not None:
                        stats.joint_calls += 1
                    _merge(finished, ent.labels, ent.score + float(lp[BLANK]), ent.g, ent.state)
                    for k in range(1, vocab):
                        ng, ns = predict_step(model.prediction, k, ent.state)
                        _merge(grown, ent.labels + (k,), ent.score + float(lp[k]), ng, ns)
                finished, alive = _prune(finished, grown, cfg.beam_width)
            for ent in alive.values():     # emission cap: forced advance
                _merge(finished, ent.labels, ent.score, ent.g, ent.state)
            beams, _ = _prune(finished, {}, cfg.beam_width)
        best = min(beams.values(), key=lambda e: (-e.score, e.labels))
    return Hypothesis(labels=best.labels, log_score=best.score, pred_state=best.state)


def _merge(pool: dict, labels: tuple, score: float, g, state) -> None:
    held = pool.get(labels)
    if held is None:
        pool[labels] = _Entry(labels, score, g, state)
    else:
        held.score = float(np.logaddexp(held.score, score))


def _prune(finished: dict, alive: dict, width: int):
    """Keep the ``width`` best label sequences by pooled mass.

    Mid-frame a sequence may hold two rows (already advanced, or still
    emitting); ranking pools them so a hypothesis never competes against
    itself, and a surviving sequence keeps both rows.  Ties resolve to the
    shorter / lexicographically smaller sequence, which is what makes width
    1 reproduce the greedy walk's blank-on-tie behavior.
    """
    totals: dict[tuple, float] = {k: e.score for k, e in finished.items()}
    for k, e in alive.items():
        held = totals.get(k)
        totals[k] = e.score if held is None else float(np.logaddexp(held, e.score))
    kept = set(sorted(totals, key=lambda k: (-totals[k], k))[:width])
    return ({k: e for k, e in finished.items() if k in kept},
            {k: e for k, e in alive.items() if k in kept})
