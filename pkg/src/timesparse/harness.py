"""Run orchestration: flat-file config, training loop, evaluation, sweeps.

Config precedence, lowest to highest: dataclass defaults, config file, the
TST_SEED environment variable, explicit overrides (CLI flags).  Training is
plain SGD with momentum over shuffled mini-batches of whole utterances; a
non-finite loss aborts with the failing step in the message.
"""
from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
import os
import time
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .data import Utterance, load_jsonl
from .decoding import DecodeConfig, DecodeStats, beam_decode, greedy_decode
from .errors import ContractError, ParseError, TrainingDiverged
from .loss import build_lattice, transducer_nll
from .metrics import EvalReport, append_report, cer, rtf
from .model import TransducerModel, build_model
from .pooling import WindowConfig
from .tensor import Tensor, make_rng, no_grad

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    # model
    vocab_size: int = 6
    input_dim: int = 8
    hidden_dim: int = 16
    pred_dim: int = 8
    joint_dim: int = 16
    encoder_layers: int = 1
    pred_kind: str = "stateless"
    activation: str = "tanh"
    # window
    window_length: int = 1
    window_stride: int = 1
    strategy: str = "ae"
    # decoding
    decoder: str = "greedy"
    beam_width: int = 4
    max_emit_per_frame: int = 10
    # optimization
    lr: float = 0.05
    momentum: float = 0.9
    steps: int = 300
    batch_size: int = 8
    log_every: int = 20
    seed: int = 0
    # paths
    dataset: str = ""
    eval_dataset: str = ""
    checkpoint: str = ""
    report: str = ""

    def window_config(self) -> WindowConfig:
        return WindowConfig(self.window_length, self.window_stride, self.strategy)

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(self.beam_width, self.max_emit_per_frame)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; blank lines and # comments are skipped."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ParseError(f"{path} line {lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            raw[key.strip()] = value.strip()
    return raw


def _coerce(key: str, value) -> object:
    if key not in _FIELD_TYPES:
        raise ContractError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    if isinstance(value, str):
        try:
            if kind in ("int", int):
                return int(value)
            if kind in ("float", float):
                return float(value)
        except ValueError as exc:
            raise ContractError(f"config key {key!r}: cannot parse {value!r}") from exc
        return value
    return value


def load_config(path: str | None = None, overrides: dict | None = None,
                env: dict | None = None) -> RunConfig:
    """Defaults, then file, then TST_SEED, then explicit overrides."""
    env = os.environ if env is None else env
    merged: dict[str, object] = {}
    if path:
        for key, value in parse_config_file(path).items():
            merged[key] = _coerce(key, value)
    if "TST_SEED" in env:
        merged["seed"] = _coerce("seed", env["TST_SEED"])
    for key, value in (overrides or {}).items():
        merged[key] = _coerce(key, value)
    return RunConfig(**merged)


def build_model_from_config(cfg: RunConfig) -> TransducerModel:
    return build_model(
        vocab_size=cfg.vocab_size, input_dim=cfg.input_dim, hidden_dim=cfg.hidden_dim,
        pred_dim=cfg.pred_dim, joint_dim=cfg.joint_dim, window=cfg.window_config(),
        pred_kind=cfg.pred_kind, activation=cfg.activation,
        encoder_layers=cfg.encoder_layers, seed=cfg.seed)


def config_id(cfg: RunConfig) -> str:
    """Hash of the fields that determine a trained model (not decode/output
    settings); the sweep cache and CSV rows are keyed by it."""
    relevant = ("vocab_size", "input_dim", "hidden_dim", "pred_dim", "joint_dim",
                "encoder_layers", "pred_kind", "activation", "window_length",
                "window_stride", "strategy", "lr", "momentum", "steps",
                "batch_size", "seed", "dataset")
    text = "|".join(f"{k}={getattr(cfg, k)}" for k in relevant)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def utterance_nll(model: TransducerModel, utt: Utterance) -> Tensor:
    hidden = model.hidden_states(Tensor(utt.features))
    lattice = build_lattice(model, hidden, utt.labels)
    return transducer_nll(lattice, utt.labels)


def train(cfg: RunConfig, dataset: list[Utterance] | None = None):
    """SGD with momentum on the mean utterance loss per mini-batch.

    Returns (model, per-step losses).  Model init draws from seed; the
    shuffle order draws from an independent stream (seed + 1) so changing
    the step budget never changes initialization.
    """
    utts = dataset if dataset is not None else load_jsonl(cfg.dataset)
    if not utts:
        raise ContractError("training needs a non-empty dataset")
    model = build_model_from_config(cfg)
    params = model.parameters()
    velocity = [np.zeros_like(p.data) for p in params]
    shuffle_rng = make_rng(cfg.seed + 1)
    order = np.arange(len(utts))
    pos = len(utts)  # forces a shuffle on the first step
    losses: list[float] = []
    for step in range(cfg.steps):
        if pos >= len(utts):
            shuffle_rng.shuffle(order)
            pos = 0
        batch = [utts[j] for j in order[pos:pos + cfg.batch_size]]
        pos += cfg.batch_size
        for p in params:
            p.zero_grad()
        total = utterance_nll(model, batch[0])
        for utt in batch[1:]:
            total = total + utterance_nll(model, utt)
        loss = total * (1.0 / len(batch))
        value = loss.item()
        if not math.isfinite(value):
            raise TrainingDiverged(f"loss became non-finite at step {step}")
        losses.append(value)
        loss.backward()
        for p, v in zip(params, velocity):
            v *= cfg.momentum
            v -= cfg.lr * p.grad
            p.data = p.data + v
        if cfg.log_every and (step % cfg.log_every == 0 or step == cfg.steps - 1):
            log.info("step %d loss %.4f", step, value)
    if cfg.checkpoint:
        save_checkpoint(cfg.checkpoint, model)
    return model, losses


def evaluate(cfg: RunConfig, model: TransducerModel,
             utts: list[Utterance]) -> EvalReport:
    """Decode every utterance and report CER, RTF, and lattice cost.

    Wall time covers only the decode calls; hidden-state computation and
    metric bookkeeping stay outside the clock.  Results are deterministic
    for a fixed model and dataset (only the timing columns may vary).
    """
    if not utts:
        raise ContractError("evaluation needs a non-empty dataset")
    if cfg.decoder not in ("greedy", "beam"):
        raise ContractError(f"unknown decoder {cfg.decoder!r}")
    decode = greedy_decode if cfg.decoder == "greedy" else beam_decode
    dec_cfg = cfg.decode_config()
    stats = DecodeStats()
    refs, hyps = [], []
    wall = 0.0
    frames = 0
    cells = 0
    for utt in utts:
        with no_grad():
            hidden = model.hidden_states(Tensor(utt.features))
        t0 = time.perf_counter()
        hyp = decode(hidden, model, dec_cfg, stats)
        wall += time.perf_counter() - t0
        frames += utt.features.shape[0]
        cells += hidden.shape[0] * (len(utt.labels) + 1)
        refs.append(utt.labels)
        hyps.append(hyp.labels)
    report = EvalReport(
        config_id=config_id(cfg),
        window_length=cfg.window_length,
        window_stride=cfg.window_stride,
        strategy=cfg.strategy,
        decoder=cfg.decoder,
        beam=cfg.beam_width if cfg.decoder == "beam" else 1,
        cer_percent=cer(refs, hyps),
        rtf=rtf(wall, frames),
        lattice_cells=cells,
        joint_calls=stats.joint_calls,
        wall_ms=wall * 1000.0,
    )
    if cfg.report:
        append_report(cfg.report, report)
    return report


def evaluate_checkpoint(cfg: RunConfig) -> EvalReport:
    """Config-driven evaluation: build the model, load cfg.checkpoint into
    it, decode cfg.eval_dataset (falling back to cfg.dataset)."""
    model = build_model_from_config(cfg)
    if cfg.checkpoint:
        load_checkpoint(cfg.checkpoint, model)
    utts = load_jsonl(cfg.eval_dataset or cfg.dataset)
    return evaluate(cfg, model, utts)


def sweep(cfg: RunConfig, lengths, strides, strategies, cache_dir: str,
          dataset: list[Utterance] | None = None,
          eval_dataset: list[Utterance] | None = None) -> list[EvalReport]:
    """Train/evaluate the full (length, stride, strategy) grid.

    Checkpoints are cached per config hash, so a rerun (or a crashed run
    resumed) retrains nothing; an unreadable cache entry is retrained with
    a warning rather than failing the sweep.
    """
    os.makedirs(cache_dir, exist_ok=True)
    train_utts = dataset if dataset is not None else load_jsonl(cfg.dataset)
    eval_utts = eval_dataset if eval_dataset is not None else load_jsonl(
        cfg.eval_dataset or cfg.dataset)
    reports = []
    for strategy in strategies:
        for length in lengths:
            for stride in strides:
                point = replace(cfg, window_length=length, window_stride=stride,
                                strategy=strategy, checkpoint="")
                path = os.path.join(cache_dir, f"{config_id(point)}.ckpt")
                model = None
                if os.path.exists(path):
                    model = build_model_from_config(point)
                    try:
                        load_checkpoint(path, model)
                    except Exception as exc:
                        warnings.warn(f"discarding unreadable cache entry {path}: {exc}")
                        model = None
                if model is None:
                    model, _ = train(point, dataset=train_utts)
                    save_checkpoint(path, model)
                reports.append(evaluate(point, model, eval_utts))
    return reports


def losscheck(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Self-contained correctness spot-checks; returns (name, ok, detail)."""
    from .loss import Lattice, brute_force_nll
    from .tensor import log_softmax
    results = []
    rng = make_rng(seed)

    worst = 0.0
    for _ in range(50):
        T = int(rng.integers(1, 6))
        U = int(rng.integers(0, 4))
        V = int(rng.integers(2, 5))
        grid = [[log_softmax(Tensor(rng.normal(size=V), requires_grad=True))
                 for _ in range(U + 1)] for _ in range(T)]
        lattice = Lattice(grid, T, U, V)
        labels = [int(rng.integers(1, V)) for _ in range(U)]
        gap = abs(transducer_nll(lattice, labels).item() - brute_force_nll(lattice, labels))
        worst = max(worst, gap)
    results.append(("loss-dp-vs-enumeration", worst < 1e-9, f"max gap {worst:.2e} over 50 grids"))

    model = build_model(vocab_size=4, input_dim=3, hidden_dim=4, pred_dim=3,
                        joint_dim=4, window=WindowConfig(2, 2, "sa"), seed=seed + 1)
    feats = rng.normal(size=(6, 3))
    labels = (1, 3)

    def loss_value() -> float:
        hidden = model.hidden_states(Tensor(feats))
        return transducer_nll(build_lattice(model, hidden, labels), labels).item()

    loss = transducer_nll(
        build_lattice(model, model.hidden_states(Tensor(feats)), labels), labels)
    loss.backward()
    worst = 0.0
    for param in model.parameters():
        flat = param.data.ravel()
        grad = param.grad.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + 1e-6
            hi = loss_value()
            flat[i] = keep - 1e-6
            lo = loss_value()
            flat[i] = keep
            fd = (hi - lo) / 2e-6
            worst = max(worst, abs(grad[i] - fd) / max(abs(grad[i]), abs(fd), 1e-3))
    results.append(("loss-gradient-vs-fd", worst < 1e-4, f"max rel err {worst:.2e}"))

    mismatches = 0
    for trial in range(20):
        m = build_model(vocab_size=int(rng.integers(2, 5)), input_dim=3, hidden_dim=4,
                        pred_dim=3, joint_dim=4, seed=seed + 100 + trial)
        hidden = m.hidden_states(Tensor(rng.normal(size=(5, 3))))
        dec = DecodeConfig(beam_width=1, max_emit_per_frame=3)
        if beam_decode(hidden, m, dec).labels != greedy_decode(hidden, m, dec).labels:
            mismatches += 1
    results.append(("beam1-equals-greedy", mismatches == 0, f"{mismatches} mismatches in 20 runs"))
    return results
