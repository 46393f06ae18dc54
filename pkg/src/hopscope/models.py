"""Dense forward/backward kernels for the aggregation architectures.

Five architectures share one layer vocabulary:

* ``k_layer_gcn`` — k aggregation layers on the (normalized) adjacency;
* ``k_layer_gcn_selfloop`` — same with +I applied before normalizing;
* ``one_layer_power_k`` — a single aggregation layer whose matrix is the
  normalized k-th power;
* ``hybrid_power_plus_linear`` — one aggregation on the k-th power
  followed by k-1 plain linear layers (parameter count matches the deep
  model while the aggregation matches the single-layer one);
* ``graphsage`` — k layers of ``act(Â H W1 + H W0 + b)``.

Hidden layers apply the activation; the final layer always emits raw
logits. Feature and hidden matrices are plain float64 ndarrays. All
kernels are pure: dropout enters only through explicit mask arguments so
a given (params, masks) pair always reproduces the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import InputError, NumericError
from .graphs import SparseCountMatrix, add_self_loops, degrees, symmetrize, transpose
from .hops import mat_power_count
from .normalization import NORM_SCHEMES, WeightedAdjacency, normalize

__all__ = [
    "ARCHITECTURES",
    "PROPAGATIONS",
    "ACTIVATIONS",
    "LayerParams",
    "SageLayerParams",
    "ModelSpec",
    "uniform_features",
    "degree_features",
    "gcn_layer_forward",
    "sage_layer_forward",
    "build_aggregation",
    "init_params",
    "model_forward",
    "model_backward",
    "collapse_linear",
    "finite_difference_gradients",
    "max_relative_error",
    "gradient_check",
    "relu_kink_risk",
]

ARCHITECTURES = (
    "k_layer_gcn",
    "k_layer_gcn_selfloop",
    "one_layer_power_k",
    "hybrid_power_plus_linear",
    "graphsage",
)
PROPAGATIONS = ("forward", "reverse", "bidirectional")
ACTIVATIONS = ("relu", "identity")


@dataclass(frozen=True)
class LayerParams:
    """Weight and bias of a GCN or plain linear layer."""

    W: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class SageLayerParams:
    """Self weight, neighbor weight, and bias of a SAGE-style layer."""

    W0: np.ndarray
    W1: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    arch: str
    k: int
    hidden_width: int = 16
    activation: str = "relu"
    norm: str = "sym"
    propagation: str = "forward"

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise InputError(f"unknown architecture {self.arch!r}")
        if self.k < 1:
            raise InputError("k must be at least 1")
        if self.hidden_width < 1:
            raise InputError("hidden_width must be at least 1")
        if self.activation not in ACTIVATIONS:
            raise InputError(f"unknown activation {self.activation!r}")
        if self.norm not in NORM_SCHEMES:
            raise InputError(f"unknown normalization {self.norm!r}")
        if self.propagation not in PROPAGATIONS:
            raise InputError(f"unknown propagation {self.propagation!r}")

    @property
    def n_layers(self) -> int:
        return 1 if self.arch == "one_layer_power_k" else self.k

    def layer_kinds(self) -> list[str]:
        if self.arch == "graphsage":
            return ["sage"] * self.n_layers
        if self.arch == "hybrid_power_plus_linear":
            return ["gcn"] + ["linear"] * (self.k - 1)
        return ["gcn"] * self.n_layers


# ---------------------------------------------------------------------------
# features


def uniform_features(n: int, d: int = 1) -> np.ndarray:
    """All-ones feature matrix (the no-feature setting)."""
    return np.ones((n, d), dtype=np.float64)


def degree_features(a: SparseCountMatrix, which: str = "both") -> np.ndarray:
    """Degree columns as real features; ``both`` gives (in, out)."""
    if which not in ("in", "out", "both"):
        raise InputError(f"which must be in/out/both, got {which!r}")
    cols = []
    if which in ("in", "both"):
        cols.append(degrees(a, "in").values.astype(np.float64))
    if which in ("out", "both"):
        cols.append(degrees(a, "out").values.astype(np.float64))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# single-layer kernels


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) if name == "relu" else z


def _act_grad(name: str, z: np.ndarray) -> np.ndarray:
    return (z > 0).astype(np.float64) if name == "relu" else np.ones_like(z)


def _check_finite(h: np.ndarray, where: str):
    if not np.all(np.isfinite(h)):
        raise NumericError(f"non-finite values in {where}")


def gcn_layer_forward(
    ahat: WeightedAdjacency, h: np.ndarray, p: LayerParams, act: str = "relu"
) -> np.ndarray:
    """``act(Â H W + b)`` with the bias broadcast across rows."""
    if ahat.n_cols != h.shape[0]:
        raise InputError(f"shape mismatch: Â is {ahat.n_rows}x{ahat.n_cols}, H has {h.shape[0]} rows")
    if h.shape[1] != p.W.shape[0]:
        raise InputError(f"shape mismatch: H has {h.shape[1]} cols, W expects {p.W.shape[0]}")
    z = ahat.to_scipy() @ h @ p.W + p.b
    out = _act(act, z)
    _check_finite(out, "gcn layer output")
    return out


def sage_layer_forward(
    ahat: WeightedAdjacency, h: np.ndarray, p: SageLayerParams, act: str = "relu"
) -> np.ndarray:
    """``act(Â H W1 + H W0 + b)``; with a zero Â this is a plain MLP layer."""
    if ahat.n_cols != h.shape[0]:
        raise InputError(f"shape mismatch: Â is {ahat.n_rows}x{ahat.n_cols}, H has {h.shape[0]} rows")
    if h.shape[1] != p.W1.shape[0] or h.shape[1] != p.W0.shape[0]:
        raise InputError("shape mismatch between H and SAGE weights")
    z = ahat.to_scipy() @ h @ p.W1 + h @ p.W0 + p.b
    out = _act(act, z)
    _check_finite(out, "sage layer output")
    return out


# ---------------------------------------------------------------------------
# whole-model plumbing


def _propagated(a: SparseCountMatrix, propagation: str) -> SparseCountMatrix:
    if propagation == "forward":
        return a
    if propagation == "reverse":
        return transpose(a)
    return symmetrize(a)


def build_aggregation(spec: ModelSpec, a: SparseCountMatrix) -> WeightedAdjacency:
    """The single Â a model uses, built once from the raw adjacency.

    Order: propagation transform, optional self-loops, optional k-th
    power (for the power architectures), then normalization using the
    degrees of whatever matrix came out of the structural steps.
    """
    p = _propagated(a, spec.propagation)
    if spec.arch == "k_layer_gcn_selfloop":
        p = add_self_loops(p)
    if spec.arch in ("one_layer_power_k", "hybrid_power_plus_linear"):
        p = mat_power_count(p, spec.k)
    return normalize(p, spec.norm)


def _layer_dims(spec: ModelSpec, in_dim: int, n_classes: int) -> list[tuple[int, int]]:
    n_layers = spec.n_layers
    dims = []
    for i in range(n_layers):
        d_in = in_dim if i == 0 else spec.hidden_width
        d_out = n_classes if i == n_layers - 1 else spec.hidden_width
        dims.append((d_in, d_out))
    return dims


def _glorot(rng: np.random.Generator, d_in: int, d_out: int) -> np.ndarray:
    lim = np.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-lim, lim, size=(d_in, d_out))


def init_params(spec: ModelSpec, in_dim: int, n_classes: int, rng: np.random.Generator):
    """Glorot-uniform weights and zero biases for every layer."""
    params = []
    for kind, (d_in, d_out) in zip(spec.layer_kinds(), _layer_dims(spec, in_dim, n_classes)):
        if kind == "sage":
            params.append(
                SageLayerParams(
                    W0=_glorot(rng, d_in, d_out),
                    W1=_glorot(rng, d_in, d_out),
                    b=np.zeros(d_out),
                )
            )
        else:
            params.append(LayerParams(W=_glorot(rng, d_in, d_out), b=np.zeros(d_out)))
    return params


def _resolve_ahat(spec: ModelSpec, a) -> WeightedAdjacency:
    if isinstance(a, WeightedAdjacency):
        return a
    return build_aggregation(spec, a)


def _forward_pass(spec, ahat_sp, x, params, hidden_masks):
    """Shared forward; returns logits plus per-layer caches for backward."""
    kinds = spec.layer_kinds()
    if len(params) != len(kinds):
        raise InputError(f"{spec.arch} with k={spec.k} needs {len(kinds)} layers, got {len(params)}")
    h = x
    caches = []
    n_layers = len(kinds)
    for i, (kind, p) in enumerate(zip(kinds, params)):
        last = i == n_layers - 1
        if kind == "gcn":
            m = ahat_sp @ h
            z = m @ p.W + p.b
        elif kind == "linear":
            m = None
            z = h @ p.W + p.b
        else:  # sage
            m = ahat_sp @ h
            z = m @ p.W1 + h @ p.W0 + p.b
        out = z if last else _act(spec.activation, z)
        mask = None
        if not last and hidden_masks is not None and hidden_masks[i] is not None:
            mask = hidden_masks[i]
            out = out * mask
        _check_finite(out, f"layer {i} output")
        caches.append({"kind": kind, "h": h, "m": m, "z": z, "mask": mask, "last": last})
        h = out
    return h, caches


def model_forward(spec: ModelSpec, a, x: np.ndarray, params, hidden_masks=None) -> np.ndarray:
    """Logits of the whole model; ``a`` is a raw count matrix or a
    prebuilt aggregation from :func:`build_aggregation`."""
    ahat = _resolve_ahat(spec, a)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != ahat.n_rows:
        raise InputError(f"feature matrix must be ({ahat.n_rows}, d)")
    logits, _ = _forward_pass(spec, ahat.to_scipy(), x, params, hidden_masks)
    return logits


def model_backward(spec: ModelSpec, a, x: np.ndarray, params, upstream_grad: np.ndarray, hidden_masks=None):
    """Exact reverse-mode gradients of ``sum(upstream * logits)``.

    Returns ``(grads, layer_grad_norms)`` where ``grads`` mirrors the
    structure of ``params`` and each norm is the Frobenius norm of that
    layer's stacked weight/bias gradients (the vanishing-gradient
    diagnostic).
    """
    ahat = _resolve_ahat(spec, a)
    x = np.asarray(x, dtype=np.float64)
    ahat_sp = ahat.to_scipy()
    logits, caches = _forward_pass(spec, ahat_sp, x, params, hidden_masks)
    upstream_grad = np.asarray(upstream_grad, dtype=np.float64)
    if upstream_grad.shape != logits.shape:
        raise InputError(f"upstream gradient must have shape {logits.shape}")
    ahat_t = ahat_sp.T.tocsr()

    grads: list = [None] * len(params)
    g = upstream_grad
    for i in range(len(params) - 1, -1, -1):
        c = caches[i]
        p = params[i]
        if c["mask"] is not None:
            g = g * c["mask"]
        gz = g if c["last"] else g * _act_grad(spec.activation, c["z"])
        db = gz.sum(axis=0)
        if c["kind"] == "gcn":
            dW = c["m"].T @ gz
            g = ahat_t @ (gz @ p.W.T)
            grads[i] = LayerParams(W=dW, b=db)
        elif c["kind"] == "linear":
            dW = c["h"].T @ gz
            g = gz @ p.W.T
            grads[i] = LayerParams(W=dW, b=db)
        else:
            dW1 = c["m"].T @ gz
            dW0 = c["h"].T @ gz
            g = ahat_t @ (gz @ p.W1.T) + gz @ p.W0.T
            grads[i] = SageLayerParams(W0=dW0, W1=dW1, b=db)

    norms = []
    for gp in grads:
        if isinstance(gp, SageLayerParams):
            sq = np.sum(gp.W0**2) + np.sum(gp.W1**2) + np.sum(gp.b**2)
        else:
            sq = np.sum(gp.W**2) + np.sum(gp.b**2)
        norms.append(float(np.sqrt(sq)))
    return grads, norms


def collapse_linear(a: SparseCountMatrix, x: np.ndarray, params, k: int) -> np.ndarray:
    """Direct evaluation of ``A^k X (W1 ... Wk)`` as dense float algebra.

    This is the closed form a k-layer aggregation collapses to when the
    activation is the identity, biases are zero, and the raw counts are
    used unnormalized; it is computed by an independent dense route
    (numpy matrix_power) so it can act as the equivalence oracle.
    """
    if len(params) != k:
        raise InputError(f"need {k} weight layers, got {len(params)}")
    for p in params:
        if np.any(p.b != 0):
            raise InputError("collapse_linear requires zero biases")
    ad = a.to_dense().astype(np.float64)
    out = np.linalg.matrix_power(ad, k) @ np.asarray(x, dtype=np.float64)
    for p in params:
        out = out @ p.W
    return out


# ---------------------------------------------------------------------------
# gradient verification


def _param_arrays(p):
    if isinstance(p, SageLayerParams):
        return ("W0", "W1", "b")
    return ("W", "b")


def finite_difference_gradients(spec: ModelSpec, a, x, params, upstream_grad, step: float = 1e-4):
    """Central-difference gradients of ``sum(upstream * logits)``."""
    ahat = _resolve_ahat(spec, a)

    def objective(ps):
        logits = model_forward(spec, ahat, x, ps)
        return float(np.sum(upstream_grad * logits))

    grads = []
    for li, p in enumerate(params):
        pieces = {}
        for name in _param_arrays(p):
            arr = getattr(p, name)
            g = np.zeros_like(arr)
            flat = arr.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                for sign in (+1.0, -1.0):
                    bumped = arr.copy()
                    bumped.ravel()[idx] = orig + sign * step
                    trial = list(params)
                    trial[li] = replace(p, **{name: bumped})
                    val = objective(trial)
                    g.ravel()[idx] += sign * val
            pieces[name] = g / (2.0 * step)
        grads.append(replace(p, **pieces))
    return grads


def max_relative_error(got, want) -> float:
    """Largest absolute discrepancy scaled by the largest magnitude seen."""
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    scale = max(np.abs(got).max(initial=0.0), np.abs(want).max(initial=0.0), 1e-12)
    return float(np.abs(got - want).max(initial=0.0) / scale)


def relu_kink_risk(spec: ModelSpec, a, x, params, tol: float = 1e-3) -> bool:
    """True if any hidden pre-activation sits within ``tol`` of the ReLU kink."""
    if spec.activation != "relu":
        return False
    ahat = _resolve_ahat(spec, a)
    _, caches = _forward_pass(spec, ahat.to_scipy(), np.asarray(x, dtype=np.float64), params, None)
    for c in caches:
        if not c["last"] and np.any(np.abs(c["z"]) < tol):
            return True
    return False


def gradient_check(spec: ModelSpec, a, x, params, upstream_grad, step: float = 1e-4) -> float:
    """Max relative error between analytic and finite-difference gradients."""
    ahat = _resolve_ahat(spec, a)
    analytic, _ = model_backward(spec, ahat, x, params, upstream_grad)
    numeric = finite_difference_gradients(spec, ahat, x, params, upstream_grad, step=step)
    worst = 0.0
    all_got, all_want = [], []
    for ga, gn in zip(analytic, numeric):
        for name in _param_arrays(ga):
            all_got.append(getattr(ga, name).ravel())
            all_want.append(getattr(gn, name).ravel())
    return max(worst, max_relative_error(np.concatenate(all_got), np.concatenate(all_want)))
