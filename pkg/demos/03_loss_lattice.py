"""
The transducer loss, two ways
=============================

The training loss marginalizes over every monotone alignment of the label
sequence to the (pooled) frames.  The dynamic program does it in
O(T' * U) log-space additions; on tiny instances we can also enumerate
every alignment path outright and compare.
"""
import numpy as np

from timesparse import (Tensor, WindowConfig, alignment_paths, brute_force_nll,
                        build_lattice, build_model, make_rng, transducer_nll)

rng = make_rng(2)

# A small model with an overlapping sa window and a 6-frame utterance
model = build_model(vocab_size=4, input_dim=3, hidden_dim=5, pred_dim=3,
                    joint_dim=5, window=WindowConfig(3, 2, "sa"), seed=2)
feats = Tensor(rng.normal(size=(6, 3)))
labels = (1, 3)

hidden = model.hidden_states(feats)
print("frames in, pooled out:", feats.shape[0], "->", hidden.shape[0])

# ---------------------------------------------------------------------------
# The lattice holds one log-distribution per (frame, labels-emitted) cell
# ---------------------------------------------------------------------------
lattice = build_lattice(model, hidden, labels)
print("lattice cells:", lattice.n_frames * (lattice.n_labels + 1))

# ---------------------------------------------------------------------------
# Dynamic program vs. exhaustive enumeration
# ---------------------------------------------------------------------------
loss = transducer_nll(lattice, labels)
print("dp loss         :", loss.item())
print("enumerated loss :", brute_force_nll(lattice, labels))

paths = list(alignment_paths(lattice.n_frames, len(labels)))
print("alignments summed:", len(paths))    # C(T'-1+U, U)

# ---------------------------------------------------------------------------
# The loss node is differentiable end to end, through pooling and encoder
# ---------------------------------------------------------------------------
loss.backward()
name, param = next(iter(model.named_parameters().items()))
print("gradient flows back to", name, "norm", float(np.linalg.norm(param.grad)))
