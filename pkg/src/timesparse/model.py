"""Encoder, prediction, and joint networks of a toy-scale neural transducer.

The encoder is a 1- or 2-layer tanh recurrence over input frames.  The
prediction network conditions on the previous non-blank label (stateless
embedding lookup, or one recurrence step over it).  The joint network fuses
one encoder state with one prediction state into a log-distribution over the
vocabulary, whose index 0 is the blank (advance) symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, EmptyInputError
from .pooling import SparseParams, WindowConfig, sparsify
from .tensor import Tensor, log_softmax, make_rng, stack

BLANK = 0
START = None  # fed to the prediction network before any emission

ACTIVATIONS = ("tanh", "relu")
PREDICTION_KINDS = ("stateless", "recurrent")


@dataclass(frozen=True)
class Vocabulary:
    """Output alphabet; index 0 is blank, labels are 1..size-1."""
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ContractError(f"vocabulary needs blank plus at least one label, got size {self.size}")

    @property
    def labels(self) -> range:
        return range(1, self.size)


@dataclass
class EncoderLayer:
    w_in: Tensor    # (d_prev, d_hidden)
    w_rec: Tensor   # (d_hidden, d_hidden)
    bias: Tensor    # (d_hidden,)


@dataclass
class EncoderParams:
    layers: list[EncoderLayer]

    def __post_init__(self):
        if not 1 <= len(self.layers) <= 2:
            raise ContractError(f"encoder supports 1 or 2 layers, got {len(self.layers)}")

    @property
    def hidden_dim(self) -> int:
        return self.layers[-1].bias.shape[0]


def encode(features: Tensor, params: EncoderParams) -> Tensor:
    """Run the recurrence over (T, d_in) frames; returns (T, d_hidden),
    one hidden row per input frame, initial state zero."""
    n = features.shape[0]
    if n == 0:
        raise EmptyInputError("encode needs at least one frame")
    seq = features
    for layer in params.layers:
        state = Tensor(np.zeros(layer.bias.shape[0]))
        rows = []
        for t in range(n):
            state = (seq[t] @ layer.w_in + state @ layer.w_rec + layer.bias).tanh()
            rows.append(state)
        seq = stack(rows)
    return seq


@dataclass
class PredictionParams:
    kind: str
    embedding: Tensor               # (vocab, d_pred); row 0 is never read
    sos: Tensor                     # (d_pred,) start-of-sequence embedding
    w_in: Tensor | None = None      # recurrent only
    w_rec: Tensor | None = None
    bias: Tensor | None = None

    def __post_init__(self):
        if self.kind not in PREDICTION_KINDS:
            raise ContractError(f"unknown prediction kind {self.kind!r}")
        if self.kind == "recurrent" and (self.w_in is None or self.w_rec is None or self.bias is None):
            raise ContractError("recurrent prediction needs w_in, w_rec and bias")


def predict_step(params: PredictionParams, prev_label, state=None):
    """One prediction-network step; returns (output, new_state).

    ``prev_label`` is START before any emission, otherwise a label in
    1..vocab-1.  Blank never enters the prediction network.
    """
    if prev_label is START:
        emb = params.sos
    else:
        if prev_label == BLANK:
            raise ContractError("blank cannot feed the prediction network")
        if not 1 <= prev_label < params.embedding.shape[0]:
            raise ContractError(
                f"label {prev_label} outside 1..{params.embedding.shape[0] - 1}")
        emb = params.embedding[int(prev_label)]
    if params.kind == "stateless":
        return emb, None
    prev = state if state is not None else Tensor(np.zeros(params.sos.shape[0]))
    out = (emb @ params.w_in + prev @ params.w_rec + params.bias).tanh()
    return out, out


@dataclass
class JointParams:
    w_enc: Tensor       # (d_hidden, d_joint)
    w_pred: Tensor      # (d_pred, d_joint)
    bias: Tensor        # (d_joint,)
    out_proj: Tensor    # (d_joint, vocab)
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ContractError(f"unknown activation {self.activation!r}")


def joint(h: Tensor, g: Tensor, params: JointParams) -> Tensor:
    """Log-distribution over the vocabulary for one (frame, context) pair."""
    z = h @ params.w_enc + g @ params.w_pred + params.bias
    z = z.tanh() if params.activation == "tanh" else z.relu()
    return log_softmax(z @ params.out_proj)


@dataclass
class TransducerModel:
    vocab: Vocabulary
    encoder: EncoderParams
    prediction: PredictionParams
    joint: JointParams
    window: WindowConfig = field(default_factory=WindowConfig)
    sparse: SparseParams = field(default_factory=SparseParams)

    def hidden_states(self, features: Tensor) -> Tensor:
        """Encoder output reduced to the sparse time resolution."""
        return sparsify(encode(features, self.encoder), self.window, self.sparse)

    def named_parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for i, layer in enumerate(self.encoder.layers):
            out[f"encoder.{i}.w_in"] = layer.w_in
            out[f"encoder.{i}.w_rec"] = layer.w_rec
            out[f"encoder.{i}.bias"] = layer.bias
        out["prediction.embedding"] = self.prediction.embedding
        out["prediction.sos"] = self.prediction.sos
        if self.prediction.kind == "recurrent":
            out["prediction.w_in"] = self.prediction.w_in
            out["prediction.w_rec"] = self.prediction.w_rec
            out["prediction.bias"] = self.prediction.bias
        out["joint.w_enc"] = self.joint.w_enc
        out["joint.w_pred"] = self.joint.w_pred
        out["joint.bias"] = self.joint.bias
        out["joint.out_proj"] = self.joint.out_proj
        if self.sparse.coeffs is not None:
            out["sparse.coeffs"] = self.sparse.coeffs
        if self.sparse.score_w is not None:
            out["sparse.score_w"] = self.sparse.score_w
            out["sparse.score_b"] = self.sparse.score_b
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> Tensor:
    bound = 1.0 / math.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def build_model(*, vocab_size: int, input_dim: int, hidden_dim: int,
                pred_dim: int, joint_dim: int, window: WindowConfig | None = None,
                pred_kind: str = "stateless", activation: str = "tanh",
                encoder_layers: int = 1, seed: int = 0) -> TransducerModel:
    """Fresh model with all weights uniform in +-1/sqrt(fan_in) from one
    seeded stream; the draw order is fixed, so a seed pins every weight."""
    window = window or WindowConfig()
    rng = make_rng(seed)
    layers = []
    d_prev = input_dim
    for _ in range(encoder_layers):
        layers.append(EncoderLayer(
            w_in=_uniform(rng, (d_prev, hidden_dim), d_prev),
            w_rec=_uniform(rng, (hidden_dim, hidden_dim), hidden_dim),
            bias=_uniform(rng, (hidden_dim,), d_prev),
        ))
        d_prev = hidden_dim
    encoder = EncoderParams(layers)
    if pred_kind == "stateless":
        prediction = PredictionParams(
            kind="stateless",
            embedding=_uniform(rng, (vocab_size, pred_dim), pred_dim),
            sos=_uniform(rng, (pred_dim,), pred_dim),
        )
    else:
        prediction = PredictionParams(
            kind="recurrent",
            embedding=_uniform(rng, (vocab_size, pred_dim), pred_dim),
            sos=_uniform(rng, (pred_dim,), pred_dim),
            w_in=_uniform(rng, (pred_dim, pred_dim), pred_dim),
            w_rec=_uniform(rng, (pred_dim, pred_dim), pred_dim),
            bias=_uniform(rng, (pred_dim,), pred_dim),
        )
    joint_params = JointParams(
        w_enc=_uniform(rng, (hidden_dim, joint_dim), hidden_dim),
        w_pred=_uniform(rng, (pred_dim, joint_dim), pred_dim),
        bias=_uniform(rng, (joint_dim,), hidden_dim),
        out_proj=_uniform(rng, (joint_dim, vocab_size), joint_dim),
        activation=activation,
    )
    sparse = SparseParams.init(window, hidden_dim, rng)
    return TransducerModel(
        vocab=Vocabulary(vocab_size),
        encoder=encoder,
        prediction=prediction,
        joint=joint_params,
        window=window,
        sparse=sparse,
    )
