"""
Sliding-window time pooling
===========================

The time-sparse block cuts a (T, d) hidden sequence into windows of
``length`` frames every ``stride`` frames and combines each window into a
single vector.  Three combination strategies share that skeleton:

  ae : plain average
  lc : learned per-position coefficients (unnormalized)
  sa : softmax over learned per-frame scores (a convex combination)
"""
import numpy as np

from timesparse import (SparseParams, Tensor, WindowConfig, decompose,
                        make_rng, sparse_length, sparsify)

rng = make_rng(1)
hidden = Tensor(rng.normal(size=(10, 4)))

# ---------------------------------------------------------------------------
# The length law: T' = floor((T - 1) / S) + 1, tail windows may be short
# ---------------------------------------------------------------------------
cfg = WindowConfig(length=4, stride=3, strategy="ae")
windows = decompose(hidden, cfg)
print("T=10, L=4, S=3  ->  T' =", sparse_length(10, cfg.stride))
print("window sizes:", [w.shape[0] for w in windows])   # the tail has 1 frame

pooled = sparsify(hidden, cfg)
print("pooled shape:", pooled.shape)

# ---------------------------------------------------------------------------
# With length == stride == 1 pooling is the identity map
# ---------------------------------------------------------------------------
unit = WindowConfig(1, 1, "sa")
params = SparseParams.init(unit, hidden_dim=4, rng=rng)
same = sparsify(hidden, unit, params)
print("unit window is exact:", np.array_equal(same.data, hidden.data))

# ---------------------------------------------------------------------------
# At uniform parameters lc and sa reproduce the average on full windows;
# a short lc tail keeps its unnormalized coefficient prefix instead
# ---------------------------------------------------------------------------
cfg = WindowConfig(4, 3, "lc")
uniform = SparseParams.uniform(cfg, hidden_dim=4)
ae = sparsify(hidden, WindowConfig(4, 3, "ae"))
lc = sparsify(hidden, cfg, uniform)
sa = sparsify(hidden, WindowConfig(4, 3, "sa"), uniform)
print("sa == ae everywhere:      ", np.allclose(sa.data, ae.data, atol=1e-12))
print("lc == ae on full windows: ", np.allclose(lc.data[:-1], ae.data[:-1], atol=1e-12))
print("lc tail = (n/L) * average:", np.allclose(lc.data[-1], ae.data[-1] * (1 / 4), atol=1e-12))

# ---------------------------------------------------------------------------
# sa weights are data dependent: a spiky scoring vector picks out frames
# ---------------------------------------------------------------------------
spiky = SparseParams(score_w=Tensor(np.array([8.0, 0.0, 0.0, 0.0])),
                     score_b=Tensor(0.0))
picked = sparsify(hidden, WindowConfig(4, 4, "sa"), spiky)
print("sa output stays inside each window's coordinate-wise hull:",
      bool(np.all(picked.data[0] <= hidden.data[:4].max(axis=0) + 1e-12)
           and np.all(picked.data[0] >= hidden.data[:4].min(axis=0) - 1e-12)))
