"""Synthetic utterances and JSONL dataset I/O.

Each label paints ``frames_per_label`` consecutive frames with its fixed
prototype vector (one-hot at label-1, zero-padded to the feature dim) plus
i.i.d. Gaussian noise.  With frames_per_label equal to the window stride,
each pooling window sees exactly one label's frames, which makes the tasks
learnable at toy scale while still exercising the full pipeline.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParseError, SchemaError
from .tensor import make_rng


@dataclass
class Utterance:
    id: str
    features: np.ndarray        # (n_frames, feature_dim) float64
    labels: tuple[int, ...]


@dataclass(frozen=True)
class TaskSpec:
    vocab_size: int = 6
    feature_dim: int = 8
    frames_per_label: int = 4
    noise_sigma: float = 0.1
    n_utterances: int = 100
    min_labels: int = 3
    max_labels: int = 8

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ContractError(f"vocab_size must be >= 2, got {self.vocab_size}")
        if self.frames_per_label < 1:
            raise ContractError(f"frames_per_label must be >= 1, got {self.frames_per_label}")
        if self.noise_sigma < 0:
            raise ContractError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 1 <= self.min_labels <= self.max_labels:
            raise ContractError(
                f"need 1 <= min_labels <= max_labels, got {self.min_labels}..{self.max_labels}")


def prototype(label: int, vocab_size: int, feature_dim: int) -> np.ndarray:
    """Fixed class vector for a label: one-hot at label-1 in feature space."""
    if vocab_size - 1 > feature_dim:
        raise ContractError(
            f"{vocab_size - 1} labels do not fit one-hot into {feature_dim} feature dims")
    if not 1 <= label < vocab_size:
        raise ContractError(f"label {label} outside 1..{vocab_size - 1}")
    v = np.zeros(feature_dim)
    v[label - 1] = 1.0
    return v


def generate(task: TaskSpec, seed: int) -> list[Utterance]:
    """Deterministic dataset: one seed pins every label draw and noise sample."""
    rng = make_rng(seed)
    protos = np.stack([prototype(k, task.vocab_size, task.feature_dim)
                       for k in range(1, task.vocab_size)])
    utts = []
    for i in range(task.n_utterances):
        count = int(rng.integers(task.min_labels, task.max_labels + 1))
        labels = rng.integers(1, task.vocab_size, size=count)
        clean = np.repeat(protos[labels - 1], task.frames_per_label, axis=0)
        noise = task.noise_sigma * rng.standard_normal(clean.shape)
        utts.append(Utterance(id=f"utt{i:04d}", features=clean + noise,
                              labels=tuple(int(x) for x in labels)))
    return utts


def save_jsonl(path: str, utts: list[Utterance]) -> None:
    """One JSON object per line; float repr round-trips values exactly."""
    with open(path, "w") as fh:
        for utt in utts:
            fh.write(json.dumps({
                "id": utt.id,
                "features": [[float(x) for x in row] for row in utt.features],
                "labels": list(utt.labels),
            }) + "\n")


def load_jsonl(path: str) -> list[Utterance]:
    """Parse a dataset; an empty file is an empty dataset.  Malformed JSON
    raises ParseError naming the line; valid JSON with bad content raises
    SchemaError."""
    utts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: {exc.msg}") from exc
            utts.append(_to_utterance(obj, lineno))
    return utts


def _to_utterance(obj, lineno: int) -> Utterance:
    where = f"line {lineno}"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in ("id", "features", "labels"):
        if key not in obj:
            raise SchemaError(f"{where}: missing key {key!r}")
    feats = obj["features"]
    if not isinstance(feats, list) or not feats or not all(isinstance(r, list) for r in feats):
        raise SchemaError(f"{where}: features must be a non-empty list of rows")
    width = len(feats[0])
    if any(len(r) != width for r in feats):
        raise SchemaError(f"{where}: ragged feature rows")
    labels = obj["labels"]
    if not isinstance(labels, list):
        raise SchemaError(f"{where}: labels must be a list")
    for lab in labels:
        if not isinstance(lab, int) or isinstance(lab, bool) or lab < 1:
            raise SchemaError(f"{where}: label {lab!r} is not a positive integer "
                              "(0 is reserved for blank)")
    if len(feats) < len(labels):
        raise SchemaError(f"{where}: {len(feats)} frames cannot carry {len(labels)} labels")
    try:
        features = np.asarray(feats, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: non-numeric feature value") from exc
    return Utterance(id=str(obj["id"]), features=features, labels=tuple(labels))
