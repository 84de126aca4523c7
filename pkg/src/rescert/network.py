"""Fully connected tanh network evaluated in jet space.

One batched forward pass propagates packed derivative jets (order 0 to 3)
through every layer, so the network value, gradient, Hessian and third
derivatives at all nodes come out together.  The companion backward pass
reverse-accumulates a cotangent on the output jets into a gradient with
respect to every weight and bias; there is no general-purpose tape, just the
fixed layer -> jet-activation -> layer structure.

Parameter vector convention: layer-major, each layer contributing its weight
matrix in row-major order followed by its bias vector.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .jets import coeff_layout

_BYTE_ORDER = "little"  # parameters serialize as little-endian IEEE-754 float64


@dataclass
class NetworkParams:
    """Weights/biases of a tanh multilayer perceptron."""

    widths: tuple[int, ...]  # (input_dim, hidden..., 1)
    weights: list[np.ndarray] = field(repr=False)
    biases: list[np.ndarray] = field(repr=False)
    activation: str = "tanh"
    seed: int | None = None  # initialization seed, recorded for provenance

    def __post_init__(self):
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if len(self.widths) < 2:
            raise ValueError("network needs at least an input and an output layer")
        if len(self.weights) != len(self.widths) - 1 or len(self.biases) != len(self.widths) - 1:
            raise ValueError("one weight matrix and bias vector per layer expected")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.widths[l + 1], self.widths[l])
            if w.shape != want:
                raise ValueError(f"layer {l} weight shape {w.shape}, expected {want}")
            if b.shape != (self.widths[l + 1],):
                raise ValueError(f"layer {l} bias shape {b.shape}, expected ({self.widths[l + 1]},)")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    @classmethod
    def xavier(cls, widths, seed: int = 0) -> "NetworkParams":
        """Xavier-uniform initialisation from a fixed seed."""
        widths = tuple(int(w) for w in widths)
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(widths, weights, biases, seed=seed)

    @classmethod
    def zeros(cls, widths) -> "NetworkParams":
        widths = tuple(int(w) for w in widths)
        weights = [np.zeros((o, i)) for i, o in zip(widths[:-1], widths[1:])]
        biases = [np.zeros(o) for o in widths[1:]]
        return cls(widths, weights, biases)

    def flatten(self) -> np.ndarray:
        chunks = []
        for w, b in zip(self.weights, self.biases):
            chunks.append(w.ravel(order="C"))
            chunks.append(b)
        return np.concatenate(chunks)

    def with_flat(self, vec) -> "NetworkParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {vec.shape}")
        weights, biases = [], []
        k = 0
        for i, o in zip(self.widths[:-1], self.widths[1:]):
            weights.append(vec[k:k + o * i].reshape(o, i).copy())
            k += o * i
            biases.append(vec[k:k + o].copy())
            k += o
        return NetworkParams(self.widths, weights, biases, self.activation, self.seed)


# -- serialization ------------------------------------------------------------


def _header_lines(params: NetworkParams, extra: dict | None = None) -> list[str]:
    lines = [
        "rescert-params v1",
        "widths: " + ",".join(str(w) for w in params.widths),
        f"activation: {params.activation}",
        f"seed: {'' if params.seed is None else params.seed}",
        f"dtype: float64-{_BYTE_ORDER}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v}")
    return lines


def save_params(path, params: NetworkParams, extra_arrays: dict | None = None,
                extra_header: dict | None = None) -> None:
    """Text header, blank line, then the flat parameter vector (and any extra
    arrays, in sorted key order) as little-endian float64."""
    extra_arrays = {k: np.asarray(v, dtype=float).ravel()
                    for k, v in (extra_arrays or {}).items()}
    spec = ",".join(f"{k}:{extra_arrays[k].size}" for k in sorted(extra_arrays))
    header = _header_lines(params, dict(extra_header or {}, arrays=spec))
    buf = io.BytesIO()
    buf.write(("\n".join(header) + "\n\n").encode("ascii"))
    buf.write(params.flatten().astype("<f8").tobytes())
    for k in sorted(extra_arrays):
        buf.write(extra_arrays[k].astype("<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_params(path):
    """Inverse of save_params; returns (NetworkParams, extra_arrays, header)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    sep = raw.index(b"\n\n")
    header_text = raw[:sep].decode("ascii")
    lines = header_text.splitlines()
    if lines[0] != "rescert-params v1":
        raise ValueError(f"unrecognised parameter file header {lines[0]!r}")
    meta = {}
    for line in lines[1:]:
        k, _, v = line.partition(":")
        meta[k.strip()] = v.strip()
    widths = tuple(int(w) for w in meta["widths"].split(","))
    seed = int(meta["seed"]) if meta.get("seed") else None
    template = NetworkParams.zeros(widths)
    template.seed = seed
    n = template.n_params
    body = np.frombuffer(raw[sep + 2:], dtype="<f8")
    params = template.with_flat(body[:n])
    extra = {}
    k = n
    for item in (a for a in meta.get("arrays", "").split(",") if a):
        name, _, size = item.partition(":")
        size = int(size)
        extra[name] = np.array(body[k:k + size])
        k += size
    return params, extra, meta


# -- jet-space forward / backward ---------------------------------------------
#
# Jet batches are arrays (N, C, width): one packed coefficient layout per
# coefficient slot c, so linear layers are a single matmul over the width
# axis and activations act on (N, width) slices per coefficient.


def input_jets(X, order: int, scale, shift) -> np.ndarray:
    """Jets of the affine input map z_i = scale_i * x_i + shift_i."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    lay = coeff_layout(d, order)
    A = np.zeros((n, lay.size, d))
    A[:, 0, :] = X * scale + shift
    if order >= 1:
        for i in range(d):
            A[:, 1 + i, i] = scale[i]
    return A


def _tanh_derivs(t):
    f1 = 1.0 - t * t
    f2 = -2.0 * t * f1
    f3 = f1 * (6.0 * t * t - 2.0)
    f4 = f1 * (16.0 * t - 24.0 * t**3)
    return f1, f2, f3, f4


def _tanh_jet_forward(Z, lay, order):
    t = np.tanh(Z[:, 0, :])
    f1, f2, f3, _ = _tanh_derivs(t)
    Y = np.empty_like(Z)
    Y[:, 0, :] = t
    d = lay.dim
    if order >= 1:
        Y[:, 1:1 + d, :] = f1[:, None, :] * Z[:, 1:1 + d, :]
    if order >= 2:
        for c, (i, j) in enumerate(lay.pairs(), start=lay.hess_offset):
            Y[:, c, :] = f1 * Z[:, c, :] + f2 * Z[:, 1 + i, :] * Z[:, 1 + j, :]
    if order >= 3:
        pos = lay.position
        for c, (i, j, k) in enumerate(lay.triples(), start=lay.third_offset):
            gi, gj, gk = Z[:, 1 + i, :], Z[:, 1 + j, :], Z[:, 1 + k, :]
            Y[:, c, :] = (
                f1 * Z[:, c, :]
                + f2 * (gi * Z[:, pos((j, k)), :]
                        + gj * Z[:, pos((i, k)), :]
                        + gk * Z[:, pos((i, j)), :])
                + f3 * gi * gj * gk
            )
    return Y, t


def _tanh_jet_backward(Z, t, Ybar, lay, order):
    f1, f2, f3, f4 = _tanh_derivs(t)
    Zbar = np.zeros_like(Z)
    z0bar = Ybar[:, 0, :] * f1
    d = lay.dim
    if order >= 1:
        g = Z[:, 1:1 + d, :]
        gb = Ybar[:, 1:1 + d, :]
        Zbar[:, 1:1 + d, :] += f1[:, None, :] * gb
        z0bar += f2 * np.sum(gb * g, axis=1)
    if order >= 2:
        for c, (i, j) in enumerate(lay.pairs(), start=lay.hess_offset):
            yb = Ybar[:, c, :]
            gi, gj = Z[:, 1 + i, :], Z[:, 1 + j, :]
            Zbar[:, c, :] += f1 * yb
            Zbar[:, 1 + i, :] += f2 * gj * yb
            Zbar[:, 1 + j, :] += f2 * gi * yb
            z0bar += yb * (f2 * Z[:, c, :] + f3 * gi * gj)
    if order >= 3:
        pos = lay.position
        for c, (i, j, k) in enumerate(lay.triples(), start=lay.third_offset):
            yb = Ybar[:, c, :]
            gi, gj, gk = Z[:, 1 + i, :], Z[:, 1 + j, :], Z[:, 1 + k, :]
            Zbar[:, c, :] += f1 * yb
            hsum = np.zeros_like(yb)
            for p, (r1, r2) in ((i, (j, k)), (j, (i, k)), (k, (i, j))):
                hc = pos((r1, r2))
                Zbar[:, 1 + p, :] += f2 * Z[:, hc, :] * yb
                Zbar[:, hc, :] += f2 * Z[:, 1 + p, :] * yb
                hsum += Z[:, 1 + p, :] * Z[:, hc, :]
            Zbar[:, 1 + i, :] += f3 * gj * gk * yb
            Zbar[:, 1 + j, :] += f3 * gi * gk * yb
            Zbar[:, 1 + k, :] += f3 * gi * gj * yb
            z0bar += yb * (f2 * Z[:, c, :] + f3 * hsum + f4 * gi * gj * gk)
    Zbar[:, 0, :] += z0bar
    return Zbar


def _linear(A, W, b=None):
    n, c, i = A.shape
    Z = (A.reshape(n * c, i) @ W.T).reshape(n, c, W.shape[0])
    if b is not None:
        Z[:, 0, :] += b
    return Z


def forward_jets(params: NetworkParams, X, order: int, scale, shift, need_cache=False):
    """Packed output jets (N, C) of the scalar network at every node.

    With need_cache=True also returns the per-layer intermediates consumed by
    ``backward_jets``.
    """
    d = params.widths[0]
    X = np.asarray(X, dtype=float)
    if X.shape[1] != d:
        raise ValueError(f"network expects {d}-dimensional inputs, got {X.shape[1]}")
    lay = coeff_layout(d, order)
    A = input_jets(X, order, scale, shift)
    cache = []
    last = params.n_layers - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        Z = _linear(A, W, b)
        if l == last:
            if need_cache:
                cache.append((A, None, None))
            A = Z
        else:
            Y, t = _tanh_jet_forward(Z, lay, order)
            if need_cache:
                cache.append((A, Z, t))
            A = Y
    out = A[:, :, 0]
    return (out, cache) if need_cache else out


def backward_jets(params: NetworkParams, cache, out_bar, order: int) -> np.ndarray:
    """Flat parameter gradient from a cotangent on the output jets (N, C)."""
    lay = coeff_layout(params.widths[0], order)
    grads_w = [None] * params.n_layers
    grads_b = [None] * params.n_layers
    Abar = np.asarray(out_bar)[:, :, None]
    for l in range(params.n_layers - 1, -1, -1):
        A_in, Z, t = cache[l]
        Zbar = Abar if Z is None else _tanh_jet_backward(Z, t, Abar, lay, order)
        n, c, o = Zbar.shape
        i = A_in.shape[2]
        grads_w[l] = Zbar.reshape(n * c, o).T @ A_in.reshape(n * c, i)
        grads_b[l] = Zbar[:, 0, :].sum(axis=0)
        Abar = (Zbar.reshape(n * c, o) @ params.weights[l]).reshape(n, c, i)
    chunks = []
    for gw, gb in zip(grads_w, grads_b):
        chunks.append(gw.ravel(order="C"))
        chunks.append(gb)
    return np.concatenate(chunks)
