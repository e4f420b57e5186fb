"""Neural transducer with sliding-window time-sparse pooling.

The package is organized bottom-up: ``tensor`` (autodiff core), ``model``
(encoder / prediction / joint networks), ``pooling`` (the sliding-window
reduction that makes decoding and the loss lattice cheaper), ``loss`` (exact
lattice NLL plus a brute-force cross-check), ``decoding`` (greedy and beam),
``metrics`` / ``data`` / ``harness`` (evaluation, synthetic tasks, training
and sweeps), and a small CLI.
"""
from .data import TaskSpec, Utterance, generate, load_jsonl, save_jsonl
from .decoding import DecodeConfig, DecodeStats, Hypothesis, beam_decode, greedy_decode
from .errors import (CheckpointError, ContractError, DomainError, EmptyInputError,
                     ParseError, SchemaError, ShapeError, TimesparseError,
                     TrainingDiverged)
from .harness import (RunConfig, build_model_from_config, config_id, evaluate,
                      evaluate_checkpoint, load_config, losscheck, sweep, train,
                      utterance_nll)
from .loss import Lattice, alignment_paths, brute_force_nll, build_lattice, forward_table, transducer_nll
from .metrics import EditStats, EvalReport, append_report, cer, edit_distance, lattice_cost, rtf
from .model import (BLANK, START, EncoderLayer, EncoderParams, JointParams,
                    PredictionParams, TransducerModel, Vocabulary, build_model,
                    encode, joint, predict_step)
from .checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from .pooling import (STRATEGIES, SparseParams, WindowConfig, combine_ae, combine_lc,
                      combine_sa, decompose, sparse_length, sparsify)
from .tensor import Tensor, log_softmax, logsumexp, make_rng, no_grad, softmax, stack

__version__ = "0.1.0"
