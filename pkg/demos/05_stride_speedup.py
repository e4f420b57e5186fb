"""
What the stride buys
====================

Pooling with stride S leaves T' = floor((T-1)/S) + 1 frames, so the decoder
and the loss lattice shrink by roughly 1/S.  This script measures both: the
analytic lattice-cell ratio and the wall-clock decode time on a batch of
long synthetic utterances.
"""
import dataclasses
import statistics
import time

from timesparse import (RunConfig, TaskSpec, Tensor, WindowConfig,
                        build_model_from_config, generate, greedy_decode,
                        lattice_cost, no_grad, rtf)

# ---------------------------------------------------------------------------
# Analytic part: lattice cells for T=100, U=7 across a stride grid
# ---------------------------------------------------------------------------
print("stride  T'   cells  ratio")
for stride in (1, 2, 4, 6, 8, 10):
    frames, cells, ratio = lattice_cost(100, 7, WindowConfig(stride, stride, "ae"))
    print(f"{stride:>6} {frames:>4} {cells:>6}  {ratio:.3f}")

# ---------------------------------------------------------------------------
# Measured part: greedy decode wall time on 30 utterances of 200 frames
# ---------------------------------------------------------------------------
task = TaskSpec(vocab_size=6, feature_dim=8, frames_per_label=4, noise_sigma=0.1,
                n_utterances=30, min_labels=50, max_labels=50)
utts = generate(task, seed=4)

print("\nstride  median ms   rtf")
base = None
for stride in (1, 2, 4, 10):
    cfg = RunConfig(window_length=stride, window_stride=stride, strategy="sa",
                    pred_kind="recurrent", seed=4)
    model = build_model_from_config(cfg)
    walls = []
    for utt in utts:
        with no_grad():
            hidden = model.hidden_states(Tensor(utt.features))
        t0 = time.perf_counter()
        greedy_decode(hidden, model, cfg.decode_config())
        walls.append(time.perf_counter() - t0)
    med = statistics.median(walls)
    base = base or med
    print(f"{stride:>6} {med * 1000:>10.2f}   {rtf(med, 200):.4f}"
          f"   ({med / base:.2f}x stride 1)")
