"""
Autodiff in one sitting
=======================

The whole library runs on one small reverse-mode Tensor class: float64
numpy storage, a closure per operation, and a topological backward pass.
This walk-through builds a few graphs by hand and cross-checks a gradient
against central finite differences.
"""
import numpy as np

from timesparse import Tensor, log_softmax, make_rng, no_grad

# ---------------------------------------------------------------------------
# A scalar chain: y = log(softmax(Wx)[0]) and its gradient
# ---------------------------------------------------------------------------
rng = make_rng(0)
W = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
x = Tensor(rng.normal(size=3))

y = log_softmax(x @ W)[0]
y.backward()
print("y           =", y.item())
print("dL/dW row 0 =", W.grad[:, 0])

# ---------------------------------------------------------------------------
# The same derivative by central differences
# ---------------------------------------------------------------------------
eps = 1e-6
fd = np.zeros_like(W.data)
flat, grad = W.data.ravel(), fd.ravel()
for i in range(flat.size):
    keep = flat[i]
    flat[i] = keep + eps
    hi = log_softmax(x @ W)[0].item()
    flat[i] = keep - eps
    lo = log_softmax(x @ W)[0].item()
    flat[i] = keep
    grad[i] = (hi - lo) / (2 * eps)
print("max |analytic - fd| =", np.abs(W.grad - fd).max())

# ---------------------------------------------------------------------------
# Gradients accumulate across backward calls until zero_grad
# ---------------------------------------------------------------------------
v = Tensor(np.ones(2), requires_grad=True)
(v * 3.0).sum().backward()
(v * 3.0).sum().backward()
print("accumulated grad:", v.grad)   # 6, 6
v.zero_grad()

# ---------------------------------------------------------------------------
# no_grad() skips graph building entirely, which is what decoding uses
# ---------------------------------------------------------------------------
with no_grad():
    quiet = (v * 5.0).sum()
print("inside no_grad the result is a plain value:", quiet.item())
print("and backward on it is refused (no graph):", end=" ")
try:
    quiet.backward()
except Exception as exc:
    print(type(exc).__name__)
