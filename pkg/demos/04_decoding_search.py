"""
Greedy walks and beam search
============================

Both decoders are frame-synchronous: within each frame a hypothesis may
emit labels (up to a cap) and then advances.  Greedy commits to the argmax
at every step; the beam keeps the best ``beam_width`` label sequences,
merging the scores of hypotheses that reach the same sequence through
different alignments.
"""
import math

import numpy as np

from timesparse import (DecodeConfig, DecodeStats, Tensor, beam_decode,
                        build_model, greedy_decode, make_rng)

rng = make_rng(3)
model = build_model(vocab_size=5, input_dim=4, hidden_dim=6, pred_dim=4,
                    joint_dim=6, pred_kind="recurrent", seed=3)
hidden = Tensor(rng.normal(size=(7, 6)))

# ---------------------------------------------------------------------------
# Greedy: one pass, counting joint evaluations
# ---------------------------------------------------------------------------
stats = DecodeStats()
hyp = greedy_decode(hidden, model, DecodeConfig(), stats)
print("greedy labels:", hyp.labels[:8], f"... ({len(hyp.labels)} total; an")
print("untrained model happily spams the per-frame emission cap)")
print("greedy log-score:", round(hyp.log_score, 4), "joint calls:", stats.joint_calls)

# ---------------------------------------------------------------------------
# Beam width 1 is exactly the greedy walk
# ---------------------------------------------------------------------------
b1 = beam_decode(hidden, model, DecodeConfig(beam_width=1))
print("beam(1) == greedy:", b1.labels == hyp.labels and b1.log_score == hyp.log_score)

# ---------------------------------------------------------------------------
# Wider beams can only raise the winning (merged) score
# ---------------------------------------------------------------------------
last = -math.inf
for width in (1, 2, 4, 8, 16):
    hyp = beam_decode(hidden, model, DecodeConfig(beam_width=width))
    print(f"width {width:>2}: score {hyp.log_score:>11.6f}  ({len(hyp.labels)} labels)")
    assert hyp.log_score >= last - 1e-12
    last = hyp.log_score

# ---------------------------------------------------------------------------
# Merging in action: with near-tied blank/emit odds, the single sequence
# (1,) collects probability from several alignments and overtakes the
# all-blank walk that greedy locks onto
# ---------------------------------------------------------------------------
from timesparse import (EncoderLayer, EncoderParams, JointParams,
                        PredictionParams, TransducerModel, Vocabulary)

rows = np.log(np.array([[0.55, 0.45], [0.99, 0.01]]))
toy = TransducerModel(
    vocab=Vocabulary(2),
    encoder=EncoderParams([EncoderLayer(w_in=Tensor(np.zeros((1, 2))),
                                        w_rec=Tensor(np.zeros((2, 2))),
                                        bias=Tensor(np.zeros(2)))]),
    prediction=PredictionParams(kind="stateless", embedding=Tensor(np.eye(2)),
                                sos=Tensor(np.eye(2)[0])),
    joint=JointParams(w_enc=Tensor(np.zeros((2, 2))), w_pred=Tensor(rows),
                      bias=Tensor(np.full(2, 10.0)), out_proj=Tensor(np.eye(2)),
                      activation="relu"),
)
frames = Tensor(np.zeros((2, 2)))
g = greedy_decode(frames, toy, DecodeConfig(max_emit_per_frame=2))
b = beam_decode(frames, toy, DecodeConfig(beam_width=2, max_emit_per_frame=2))
print("greedy:", g.labels, "p =", round(math.exp(g.log_score), 6))
print("beam 2:", b.labels, "p =", round(math.exp(b.log_score), 6))
