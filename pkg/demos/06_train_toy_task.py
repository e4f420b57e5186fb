"""
End to end on the synthetic task
================================

Generate a small labels-to-noisy-prototype-frames dataset, train a compact
transducer with a stride-4 self-attention window, and look at what it
decodes.  The budget here is deliberately tiny so the script finishes in
about a minute; the test suite's acceptance runs use larger ones.
"""
import dataclasses

from timesparse import (RunConfig, TaskSpec, Tensor, cer, evaluate, generate,
                        greedy_decode, no_grad, train)

task = TaskSpec(vocab_size=6, feature_dim=8, frames_per_label=4, noise_sigma=0.1,
                n_utterances=120, min_labels=3, max_labels=6)
train_utts = generate(task, seed=10)
eval_utts = generate(dataclasses.replace(task, n_utterances=30), seed=11)

cfg = RunConfig(pred_kind="recurrent", pred_dim=16,
                window_length=4, window_stride=4, strategy="sa",
                lr=0.01, momentum=0.9, steps=250, batch_size=8, log_every=50)

print("training", cfg.steps, "steps on", len(train_utts), "utterances ...")
model, losses = train(cfg, dataset=train_utts)
print(f"loss: {losses[0]:.2f} -> {losses[-1]:.2f}")

report = evaluate(cfg, model, eval_utts)
print(f"eval CER {report.cer_percent:.2f}%  rtf {report.rtf:.4f}  "
      f"lattice cells {report.lattice_cells}")

print("\nsample decodes (ref -> hyp):")
hyps = []
for utt in eval_utts[:5]:
    with no_grad():
        hidden = model.hidden_states(Tensor(utt.features))
    hyp = greedy_decode(hidden, model, cfg.decode_config())
    hyps.append(hyp.labels)
    mark = "" if hyp.labels == utt.labels else "   <- differs"
    print(f"  {utt.labels} -> {hyp.labels}{mark}")
print(f"CER of the samples: {cer([u.labels for u in eval_utts[:5]], hyps):.2f}%")
