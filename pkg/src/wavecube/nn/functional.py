"""Differentiable ops over 5D activations (batch, channels, z, y, x).

Every op computes its forward result eagerly and registers an adjoint
closure on the active gradient tape.  Adjoints are exact transposes of the
forward linear maps (convolutions scatter through the same windows, the
DWT layer's backward is synthesis with the decomposition filters, etc.).
"""

from __future__ import annotations

from itertools import product

import numpy as np

from ..errors import ChannelMismatchError, OddExtentError, ShapeMismatchError
from ..filters import SUBBAND_TAGS, FilterBank
from ..transform import _forward3, _inverse3
from .autograd import Tensor, as_tensor, record, wants_grad

HIGH_TAGS = SUBBAND_TAGS[1:]


def _check_5d(x: Tensor, name: str = "input") -> None:
    if x.data.ndim != 5:
        raise ShapeMismatchError(f"{name} must be 5D (b, c, z, y, x), got {x.data.shape}")


def _check_even_spatial(x: Tensor, what: str) -> None:
    for ext in x.data.shape[2:]:
        if ext % 2 != 0:
            raise OddExtentError(f"{what} requires even spatial extents, got {x.data.shape[2:]}")


# ---------------------------------------------------------------------------
# convolution family
# ---------------------------------------------------------------------------

def _offset_slices(k: int, stride: int, out_sp: tuple[int, int, int]):
    do, mo, no = out_sp
    for i, j, l in product(range(k), range(k), range(k)):
        yield (slice(i, i + do * stride, stride),
               slice(j, j + mo * stride, stride),
               slice(l, l + no * stride, stride))


def _im2col(xp: np.ndarray, k: int, stride: int, out_sp: tuple[int, int, int]) -> np.ndarray:
    """(B, Ci, padded spatial) -> (B, Ci*k^3, P) copy, P = prod(out_sp)."""
    b, ci = xp.shape[:2]
    cols = np.empty((b, ci, k ** 3) + out_sp, dtype=xp.dtype)
    for o, sl in enumerate(_offset_slices(k, stride, out_sp)):
        cols[:, :, o] = xp[:, :, sl[0], sl[1], sl[2]]
    return cols.reshape(b, ci * k ** 3, int(np.prod(out_sp)))


def conv3(x, weight: Tensor, bias: Tensor | None = None, stride: int = 1,
          padding: int | None = None) -> Tensor:
    """3D convolution; kernel is cubic, default padding keeps extents (stride 1)
    or halves them exactly (stride 2, even inputs)."""
    x = as_tensor(x)
    _check_5d(x)
    co, ci, k = weight.data.shape[0], weight.data.shape[1], weight.data.shape[2]
    if x.data.shape[1] != ci:
        raise ChannelMismatchError(
            f"conv3 expected {ci} input channels, got {x.data.shape[1]}")
    if padding is None:
        padding = (k - 1) // 2
    if stride == 2:
        _check_even_spatial(x, "conv3 with stride 2")
    elif stride != 1:
        raise ValueError(f"stride must be 1 or 2, got {stride}")

    b = x.data.shape[0]
    sp = x.data.shape[2:]
    out_sp = tuple((e + 2 * padding - k) // stride + 1 for e in sp)
    pad = ((0, 0), (0, 0)) + ((padding, padding),) * 3
    xp = np.pad(x.data, pad) if padding else x.data
    cols = _im2col(xp, k, stride, out_sp)  # (B, K, P)
    wmat = weight.data.reshape(co, ci * k ** 3)
    out = (wmat @ cols).reshape((b, co) + out_sp)
    if bias is not None:
        out += bias.data[None, :, None, None, None]
    result = Tensor(out)

    def adjoint(grads):
        g = grads[0]
        gmat = g.reshape(b, co, -1)  # (B, Co, P)
        if bias is not None and wants_grad(bias):
            bias._accumulate(g.sum(axis=(0, 2, 3, 4)))
        if wants_grad(weight):
            gw = np.zeros((co, ci * k ** 3), dtype=wmat.dtype)
            for bi in range(b):  # per-sample gemm avoids tensordot copies
                gw += gmat[bi] @ cols[bi].T
            weight._accumulate(gw.reshape(weight.data.shape))
        if wants_grad(x):
            gcols = wmat.T @ gmat  # (B, K, P)
            gcols = gcols.reshape((b, ci, k ** 3) + out_sp)
            gpad = np.zeros_like(xp)
            for o, sl in enumerate(_offset_slices(k, stride, out_sp)):
                gpad[:, :, sl[0], sl[1], sl[2]] += gcols[:, :, o]
            if padding:
                gpad = gpad[:, :, padding:-padding, padding:-padding, padding:-padding]
            x._accumulate(gpad)

    record(result, adjoint)
    return result


def sconv2(x, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Strided 2x2x2 convolution (stride 2, no padding): exact halving."""
    x = as_tensor(x)
    _check_5d(x)
    _check_even_spatial(x, "sconv2")
    co, ci = weight.data.shape[:2]
    if x.data.shape[1] != ci:
        raise ChannelMismatchError(
            f"sconv2 expected {ci} input channels, got {x.data.shape[1]}")
    b, _, d, m, n = x.data.shape
    d2, m2, n2 = d // 2, m // 2, n // 2
    xw = x.data.reshape(b, ci, d2, 2, m2, 2, n2, 2)
    # (B, Ci, 2,2,2, D2, M2, N2)
    xw = xw.transpose(0, 1, 3, 5, 7, 2, 4, 6)
    out = np.einsum("bcxyzdmn,ocxyz->bodmn", xw, weight.data, optimize=True)
    if bias is not None:
        out += bias.data[None, :, None, None, None]
    result = Tensor(np.ascontiguousarray(out))

    def adjoint(grads):
        g = grads[0]
        if bias is not None and wants_grad(bias):
            bias._accumulate(g.sum(axis=(0, 2, 3, 4)))
        if wants_grad(weight):
            gw = np.einsum("bodmn,bcxyzdmn->ocxyz", g, xw, optimize=True)
            weight._accumulate(gw)
        if wants_grad(x):
            gx = np.einsum("bodmn,ocxyz->bcxyzdmn", g, weight.data, optimize=True)
            gx = gx.transpose(0, 1, 5, 2, 6, 3, 7, 4).reshape(b, ci, d, m, n)
            x._accumulate(gx)

    record(result, adjoint)
    return result


def deconv3(x, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Transposed 2x2x2 convolution, stride 2: exact doubling, no overlap."""
    x = as_tensor(x)
    _check_5d(x)
    ci, co = weight.data.shape[:2]
    if x.data.shape[1] != ci:
        raise ChannelMismatchError(
            f"deconv3 expected {ci} input channels, got {x.data.shape[1]}")
    b, _, d, m, n = x.data.shape
    out = np.einsum("bcdmn,coxyz->bodxmynz", x.data, weight.data, optimize=True)
    out = out.reshape(b, co, 2 * d, 2 * m, 2 * n)
    if bias is not None:
        out += bias.data[None, :, None, None, None]
    result = Tensor(out)

    def adjoint(grads):
        g = grads[0]
        gw = g.reshape(b, co, d, 2, m, 2, n, 2)
        if bias is not None and wants_grad(bias):
            bias._accumulate(g.sum(axis=(0, 2, 3, 4)))
        if wants_grad(weight):
            grad_w = np.einsum("bcdmn,bodxmynz->coxyz", x.data, gw, optimize=True)
            weight._accumulate(grad_w)
        if wants_grad(x):
            gx = np.einsum("bodxmynz,coxyz->bcdmn", gw, weight.data, optimize=True)
            x._accumulate(gx)

    record(result, adjoint)
    return result


# ---------------------------------------------------------------------------
# normalization / activation / combination
# ---------------------------------------------------------------------------

def batchnorm(x, gamma: Tensor, beta: Tensor, running_mean: np.ndarray,
              running_var: np.ndarray, training: bool, momentum: float = 0.1,
              eps: float = 1e-5) -> Tensor:
    """Per-channel batch normalization.

    Train mode normalizes with batch statistics and updates the running
    buffers in place; eval mode uses the buffers.
    """
    x = as_tensor(x)
    _check_5d(x)
    axes = (0, 2, 3, 4)
    if training:
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        count = x.data.size // x.data.shape[1]
        unbias = count / max(count - 1, 1)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu
        running_var *= 1.0 - momentum
        running_var += momentum * var * unbias
    else:
        mu = running_mean.astype(x.data.dtype, copy=False)
        var = running_var.astype(x.data.dtype, copy=False)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu[None, :, None, None, None]) * inv_std[None, :, None, None, None]
    out = gamma.data[None, :, None, None, None] * xhat + beta.data[None, :, None, None, None]
    result = Tensor(out)

    def adjoint(grads):
        g = grads[0]
        if wants_grad(beta):
            beta._accumulate(g.sum(axis=axes))
        if wants_grad(gamma):
            gamma._accumulate((g * xhat).sum(axis=axes))
        if wants_grad(x):
            gxhat = g * gamma.data[None, :, None, None, None]
            if training:
                count = x.data.size // x.data.shape[1]
                sum_g = gxhat.sum(axis=axes)
                sum_gx = (gxhat * xhat).sum(axis=axes)
                gx = (gxhat - (sum_g[None, :, None, None, None]
                               + xhat * sum_gx[None, :, None, None, None]) / count)
                gx *= inv_std[None, :, None, None, None]
            else:
                gx = gxhat * inv_std[None, :, None, None, None]
            x._accumulate(gx)

    record(result, adjoint)
    return result


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    result = Tensor(np.where(mask, x.data, np.zeros((), dtype=x.data.dtype)))

    def adjoint(grads):
        if wants_grad(x):
            x._accumulate(grads[0] * mask)

    record(result, adjoint)
    return result


def concat_channels(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_5d(a, "concat lhs")
    _check_5d(b, "concat rhs")
    sa, sb = a.data.shape, b.data.shape
    if sa[0] != sb[0] or sa[2:] != sb[2:]:
        raise ShapeMismatchError(f"concat_channels batch/spatial mismatch: {sa} vs {sb}")
    split = sa[1]
    result = Tensor(np.concatenate([a.data, b.data], axis=1))

    def adjoint(grads):
        g = grads[0]
        if wants_grad(a):
            a._accumulate(g[:, :split])
        if wants_grad(b):
            b._accumulate(g[:, split:])

    record(result, adjoint)
    return result


def hard_shrink_layer(x, threshold: float) -> Tensor:
    """Hard shrinkage as a layer: zero where |x| <= threshold, identity outside.

    Gradient passes through kept coefficients and is zero elsewhere."""
    x = as_tensor(x)
    mask = np.abs(x.data) > threshold
    result = Tensor(np.where(mask, x.data, np.zeros((), dtype=x.data.dtype)))

    def adjoint(grads):
        if wants_grad(x):
            x._accumulate(grads[0] * mask)

    record(result, adjoint)
    return result


# ---------------------------------------------------------------------------
# pooling / unpooling
# ---------------------------------------------------------------------------

def maxpool2_with_indices(x) -> tuple[Tensor, np.ndarray]:
    """2x2x2 max-pool with stride 2; indices are block-local (0..7)."""
    x = as_tensor(x)
    _check_5d(x)
    _check_even_spatial(x, "maxpool2")
    b, c, d, m, n = x.data.shape
    d2, m2, n2 = d // 2, m // 2, n // 2
    blocks = (x.data.reshape(b, c, d2, 2, m2, 2, n2, 2)
              .transpose(0, 1, 2, 4, 6, 3, 5, 7)
              .reshape(b, c, d2, m2, n2, 8))
    indices = blocks.argmax(axis=-1)
    pooled = np.take_along_axis(blocks, indices[..., None], axis=-1)[..., 0]
    result = Tensor(pooled)

    def adjoint(grads):
        if wants_grad(x):
            x._accumulate(_scatter_blocks(grads[0], indices))

    record(result, adjoint)
    return result, indices


def _scatter_blocks(values: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Place per-block values at their recorded in-block positions."""
    b, c, d2, m2, n2 = values.shape
    blocks = np.zeros((b, c, d2, m2, n2, 8), dtype=values.dtype)
    np.put_along_axis(blocks, indices[..., None], values[..., None], axis=-1)
    return (blocks.reshape(b, c, d2, m2, n2, 2, 2, 2)
            .transpose(0, 1, 2, 5, 3, 6, 4, 7)
            .reshape(b, c, 2 * d2, 2 * m2, 2 * n2))


def maxunpool2(x, indices: np.ndarray) -> Tensor:
    """Scatter pooled values back to their argmax positions, zeros elsewhere."""
    x = as_tensor(x)
    _check_5d(x)
    if x.data.shape != indices.shape:
        raise ShapeMismatchError(
            f"maxunpool2 values/indices mismatch: {x.data.shape} vs {indices.shape}")
    result = Tensor(_scatter_blocks(x.data, indices))

    def adjoint(grads):
        if wants_grad(x):
            g = grads[0]
            b, c, do, mo, no = g.shape
            blocks = (g.reshape(b, c, do // 2, 2, mo // 2, 2, no // 2, 2)
                      .transpose(0, 1, 2, 4, 6, 3, 5, 7)
                      .reshape(b, c, do // 2, mo // 2, no // 2, 8))
            x._accumulate(np.take_along_axis(blocks, indices[..., None], axis=-1)[..., 0])

    record(result, adjoint)
    return result


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def _linear_up_last(a: np.ndarray) -> np.ndarray:
    """Double the last axis: even outputs copy inputs, odd outputs average
    neighbours (last one clamps to the edge value)."""
    n = a.shape[-1]
    out = np.empty(a.shape[:-1] + (2 * n,), dtype=a.dtype)
    out[..., 0::2] = a
    out[..., 1:-1:2] = 0.5 * (a[..., :-1] + a[..., 1:])
    out[..., -1] = a[..., -1]
    return out


def _linear_up_last_adjoint(g: np.ndarray) -> np.ndarray:
    ge = g[..., 0::2]
    go = g[..., 1::2]
    out = ge.astype(g.dtype, copy=True)
    out[..., :-1] += 0.5 * go[..., :-1]
    out[..., 1:] += 0.5 * go[..., :-1]
    out[..., -1] += go[..., -1]
    return out


def _interp_axis(x: Tensor, axis: int) -> Tensor:
    result = Tensor(np.moveaxis(_linear_up_last(np.moveaxis(x.data, axis, -1)), -1, axis))

    def adjoint(grads):
        if wants_grad(x):
            g = np.moveaxis(grads[0], axis, -1)
            x._accumulate(np.moveaxis(_linear_up_last_adjoint(g), -1, axis))

    record(result, adjoint)
    return result


def interpolate2(x) -> Tensor:
    """Trilinear upsampling by 2.

    Convention: output index maps to input coordinate j/2 with edge clamp,
    so even outputs copy inputs and odd interior outputs are neighbour
    midpoints (separable per axis)."""
    x = as_tensor(x)
    _check_5d(x)
    for axis in (2, 3, 4):
        x = _interp_axis(x, axis)
    return x


# ---------------------------------------------------------------------------
# wavelet layers
# ---------------------------------------------------------------------------

def dwt_layer(x, bank: FilterBank) -> tuple[Tensor, dict[str, Tensor]]:
    """Per-channel 3D DWT; returns (low, {tag: high}) at half resolution.

    Backward is the exact adjoint: synthesis with the decomposition
    filters (equal to the inverse for orthogonal banks)."""
    x = as_tensor(x)
    _check_5d(x)
    _check_even_spatial(x, "dwt_layer")
    parts = _forward3(x.data, bank.lo_dec, bank.hi_dec)
    low = Tensor(parts["lll"])
    highs = {t: Tensor(parts[t]) for t in HIGH_TAGS}
    outputs = (low,) + tuple(highs[t] for t in HIGH_TAGS)

    def adjoint(grads):
        if wants_grad(x):
            gsub = {"lll": grads[0]}
            gsub.update({t: grads[i + 1] for i, t in enumerate(HIGH_TAGS)})
            x._accumulate(_inverse3(gsub, bank.lo_dec, bank.hi_dec))

    record(outputs, adjoint)
    return low, highs


def idwt_layer(low, highs: dict[str, Tensor], bank: FilterBank) -> Tensor:
    """Per-channel 3D IDWT from (low, highs); doubles spatial extents.

    Backward is analysis with the reconstruction filters."""
    low = as_tensor(low)
    _check_5d(low, "idwt low")
    ordered = [low] + [as_tensor(highs[t]) for t in HIGH_TAGS]
    shapes = {t.data.shape for t in ordered}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"idwt_layer subband shapes differ: {sorted(shapes)}")
    sub = {"lll": low.data}
    sub.update({t: ordered[i + 1].data for i, t in enumerate(HIGH_TAGS)})
    result = Tensor(_inverse3(sub, bank.lo_rec, bank.hi_rec))

    def adjoint(grads):
        gsub = _forward3(grads[0], bank.lo_rec, bank.hi_rec)
        for i, tag in enumerate(SUBBAND_TAGS):
            t = ordered[i]
            if wants_grad(t):
                t._accumulate(gsub[tag])

    record(result, adjoint)
    return result


# ---------------------------------------------------------------------------
# reductions (used by the loss and by tests)
# ---------------------------------------------------------------------------

def tensor_sum(x) -> Tensor:
    x = as_tensor(x)
    result = Tensor(np.asarray(x.data.sum(), dtype=x.data.dtype))

    def adjoint(grads):
        if wants_grad(x):
            x._accumulate(np.broadcast_to(grads[0], x.data.shape).astype(x.data.dtype))

    record(result, adjoint)
    return result


def tensor_dot(x, const) -> Tensor:
    """Scalar inner product with a constant array (adjoint probe helper)."""
    x = as_tensor(x)
    c = np.asarray(const, dtype=x.data.dtype)
    result = Tensor(np.asarray((x.data * c).sum(), dtype=x.data.dtype))

    def adjoint(grads):
        if wants_grad(x):
            x._accumulate(grads[0] * c)

    record(result, adjoint)
    return result


def tensor_add(a, b) -> Tensor:
    """Elementwise addition of equal-shape tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"add shapes differ: {a.data.shape} vs {b.data.shape}")
    result = Tensor(a.data + b.data)

    def adjoint(grads):
        if wants_grad(a):
            a._accumulate(grads[0])
        if wants_grad(b):
            b._accumulate(grads[0])

    record(result, adjoint)
    return result
