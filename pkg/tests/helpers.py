"""Shared test oracles: finite differences, tolerance helpers, and a plain
numpy re-implementation of the decoder semantics kept independent of the
package's autodiff."""
import math
from collections import defaultdict
from functools import lru_cache

import numpy as np


def brute_edit(a, b):
    """Textbook recursive Levenshtein distance, memoized per pair."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(go(i - 1, j) + 1, go(i, j - 1) + 1,
                   go(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return go(len(a), len(b))


def finite_diff(f, leaf, eps=1e-6):
    """Central-difference gradient of a scalar-valued rebuild-and-eval
    callable with respect to leaf.data (perturbed in place)."""
    flat = leaf.data.ravel()
    out = np.zeros(flat.size)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        hi = f()
        flat[i] = keep - eps
        lo = f()
        flat[i] = keep
        out[i] = (hi - lo) / (2.0 * eps)
    return out.reshape(leaf.data.shape)


def max_rel_err(analytic, numeric, floor=1e-3):
    """Worst per-element relative error; entries below ``floor`` in both
    arrays are compared on an absolute scale so finite-difference noise on
    near-zero gradients does not dominate."""
    a = np.asarray(analytic, dtype=float).ravel()
    b = np.asarray(numeric, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))


def np_context(model, prev_label, state):
    p = model.prediction
    emb = p.sos.data if prev_label is None else p.embedding.data[prev_label]
    if p.kind == "stateless":
        return emb, None
    prev = state if state is not None else np.zeros(p.sos.data.shape[0])
    out = np.tanh(emb @ p.w_in.data + prev @ p.w_rec.data + p.bias.data)
    return out, out


def np_joint(model, h, g):
    p = model.joint
    z = h @ p.w_enc.data + g @ p.w_pred.data + p.bias.data
    z = np.tanh(z) if p.activation == "tanh" else np.maximum(z, 0.0)
    logits = z @ p.out_proj.data
    return logits - (logits.max() + np.log(np.exp(logits - logits.max()).sum()))


def np_greedy(hidden, model, e_max):
    g, state = np_context(model, None, None)
    labels, score = [], 0.0
    for t in range(hidden.shape[0]):
        for _ in range(e_max):
            lp = np_joint(model, hidden[t], g)
            k = int(np.argmax(lp))
            score += lp[k]
            if k == 0:
                break
            labels.append(k)
            g, state = np_context(model, k, state)
    return tuple(labels), score


def np_exhaustive(hidden, model, e_max):
    """Total probability of every label sequence (stateless prediction only),
    then the argmax with the decoder's tie order."""
    assert model.prediction.kind == "stateless"
    vocab = model.vocab.size
    contexts = [np_context(model, None, None)[0]] + [
        np_context(model, k, None)[0] for k in range(1, vocab)]
    table = [[np_joint(model, hidden[t], g) for g in contexts]
             for t in range(hidden.shape[0])]
    acc = defaultdict(list)

    def walk(t, ctx, emitted, labels, logp):
        if t == hidden.shape[0]:
            acc[labels].append(logp)
            return
        if emitted == e_max:
            walk(t + 1, ctx, 0, labels, logp)   # forced advance, no factor
            return
        lp = table[t][ctx]
        walk(t + 1, ctx, 0, labels, logp + lp[0])
        for k in range(1, vocab):
            walk(t, k, emitted + 1, labels + (k,), logp + lp[k])

    walk(0, 0, 0, (), 0.0)
    scored = {lab: math.log(math.fsum(math.exp(v) for v in vals))
              for lab, vals in acc.items()}
    return min(scored.items(), key=lambda kv: (-kv[1], kv[0]))
