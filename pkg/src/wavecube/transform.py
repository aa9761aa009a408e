"""Single-level separable 3D DWT/IDWT, naive resamplers, hard shrinkage.

Convention (fixed package-wide): analysis is phase-0 periodic correlation

    a[i] = sum_j f[j] * x[(2*i + j) mod N]

applied along z, then y, then x; synthesis is periodic convolution of the
zero-upsampled subbands

    x[n] = sum_j f~[j] * up2(a)[(n - j) mod N].

The built-in banks are aligned so synthesis exactly inverts analysis on any
even-length signal.  The adjoint of analysis is synthesis with the *same*
filters (and vice versa), which the network layers rely on for backprop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeMismatchError
from .filters import SUBBAND_TAGS, FilterBank
from .validation import as_volume, check_even_extents

HIGH_TAGS = SUBBAND_TAGS[1:]  # llh..hhh


@dataclass(frozen=True)
class ShrinkConfig:
    """Hard-shrinkage threshold; coefficients with |x| <= threshold are zeroed."""

    threshold: float = 0.25

    def __post_init__(self):
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")


@dataclass
class SubbandSet:
    """The eight half-resolution components of one 3D DWT level."""

    arrays: dict[str, np.ndarray]
    wavelet: str

    def __post_init__(self):
        missing = [t for t in SUBBAND_TAGS if t not in self.arrays]
        if missing:
            raise ShapeMismatchError(f"subband set missing tags {missing}")
        shapes = {self.arrays[t].shape for t in SUBBAND_TAGS}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"subbands differ in shape: {sorted(shapes)}")

    def __getitem__(self, tag: str) -> np.ndarray:
        return self.arrays[tag]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.arrays["lll"].shape

    def map(self, fn) -> "SubbandSet":
        return SubbandSet({t: fn(t, a) for t, a in self.arrays.items()}, self.wavelet)


# ---------------------------------------------------------------------------
# 1D primitives (operate on the last axis, any number of leading axes)
# ---------------------------------------------------------------------------

def _analyze_1d(x: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Periodic correlate-and-downsample along the last axis."""
    n = x.shape[-1]
    L = len(lo)
    taps = np.stack([lo, hi]).astype(x.dtype, copy=False)  # (2, L)
    # wrap enough tail for windows starting at n-2 reaching n-2+L-1
    reps = [x]
    need = L - 1
    while need > 0:
        take = min(need, n)
        reps.append(x[..., :take])
        need -= take
    xp = np.concatenate(reps, axis=-1)
    win = sliding_window_view(xp, L, axis=-1)[..., 0 : n - 1 : 2, :]  # (..., n//2, L)
    out = win @ taps.T  # (..., n//2, 2)
    return out[..., 0], out[..., 1]


def _synthesize_1d(lo_sub: np.ndarray, hi_sub: np.ndarray,
                   lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Zero-upsample and periodically convolve along the last axis."""
    m = lo_sub.shape[-1]
    dtype = lo_sub.dtype
    out = np.zeros(lo_sub.shape[:-1] + (2 * m,), dtype=dtype)
    even = out[..., 0::2]
    odd = out[..., 1::2]
    # even output indices receive even filter taps, odd indices the odd taps
    for k in range(len(lo) // 2):
        la, lb = lo[2 * k], lo[2 * k + 1]
        ha, hb = hi[2 * k], hi[2 * k + 1]
        ls = np.roll(lo_sub, k, axis=-1)
        hs = np.roll(hi_sub, k, axis=-1)
        if la:
            even += dtype.type(la) * ls
        if ha:
            even += dtype.type(ha) * hs
        if lb:
            odd += dtype.type(lb) * ls
        if hb:
            odd += dtype.type(hb) * hs
    return out


def _apply_axis(fn, axis, *arrays, **kw):
    moved = [np.moveaxis(a, axis, -1) for a in arrays]
    out = fn(*moved, **kw)
    if isinstance(out, tuple):
        return tuple(np.moveaxis(o, -1, axis) for o in out)
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# separable 3D transform over the last three axes (leading axes pass through)
# ---------------------------------------------------------------------------

def _forward3(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> dict[str, np.ndarray]:
    """One analysis level along z, y, x; returns all eight components."""
    lo = lo.astype(x.dtype, copy=False)
    hi = hi.astype(x.dtype, copy=False)
    pieces = {"": x}
    for axis in (-3, -2, -1):
        nxt = {}
        for tag, arr in pieces.items():
            a, d = _apply_axis(_analyze_1d, axis, arr, lo=lo, hi=hi)
            nxt[tag + "l"] = a
            nxt[tag + "h"] = d
        pieces = nxt
    return pieces


def _inverse3(subbands: dict[str, np.ndarray], lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Synthesis inverse of `_forward3` with the given 1D pair."""
    ref = subbands["lll"]
    lo = lo.astype(ref.dtype, copy=False)
    hi = hi.astype(ref.dtype, copy=False)
    pieces = dict(subbands)
    for axis in (-1, -2, -3):
        nxt = {}
        prefixes = sorted({t[:-1] for t in pieces})
        for p in prefixes:
            nxt[p] = _apply_axis(
                _synthesize_1d, axis, pieces[p + "l"], pieces[p + "h"], lo=lo, hi=hi
            )
        pieces = nxt
    return pieces[""]


# ---------------------------------------------------------------------------
# public volume-level operations
# ---------------------------------------------------------------------------

def dwt3(x: np.ndarray, bank: FilterBank) -> SubbandSet:
    """Decompose a 3D volume into its eight half-resolution subbands.

    Extents must be even (and >= 2); periodic wrap makes any even extent
    valid regardless of filter length.
    """
    x = as_volume(x)
    check_even_extents(x.shape)
    return SubbandSet(_forward3(x, bank.lo_dec, bank.hi_dec), bank.name)


def idwt3(s: SubbandSet, bank: FilterBank) -> np.ndarray:
    """Reconstruct the volume from a subband set (exact inverse of dwt3)."""
    return _inverse3(s.arrays, bank.lo_rec, bank.hi_rec)


def dwt3_adjoint(subbands: dict[str, np.ndarray], bank: FilterBank) -> np.ndarray:
    """Adjoint of dwt3: synthesis with the decomposition filters."""
    return _inverse3(subbands, bank.lo_dec, bank.hi_dec)


def idwt3_adjoint(x: np.ndarray, bank: FilterBank) -> dict[str, np.ndarray]:
    """Adjoint of idwt3: analysis with the reconstruction filters."""
    return _forward3(x, bank.lo_rec, bank.hi_rec)


def downsample2(x: np.ndarray) -> np.ndarray:
    """Keep every second voxel: out[i,j,k] = x[2i,2j,2k], extents floor-halved."""
    d, m, n = x.shape[-3:]
    return np.ascontiguousarray(
        x[..., 0 : 2 * (d // 2) : 2, 0 : 2 * (m // 2) : 2, 0 : 2 * (n // 2) : 2])


def upsample2(x: np.ndarray) -> np.ndarray:
    """Double every extent, placing x on the even lattice and zeros elsewhere."""
    d, m, n = x.shape[-3:]
    out = np.zeros(x.shape[:-3] + (2 * d, 2 * m, 2 * n), dtype=x.dtype)
    out[..., ::2, ::2, ::2] = x
    return out


def hard_shrink_array(x: np.ndarray, threshold: float) -> np.ndarray:
    """Zero every coefficient with |x| <= threshold (strict keep outside)."""
    return np.where(np.abs(x) > threshold, x, np.zeros((), dtype=x.dtype))


def hard_shrink(s: SubbandSet, cfg: ShrinkConfig = ShrinkConfig()) -> SubbandSet:
    """Apply hard shrinkage to the seven high-frequency subbands; lll passes."""
    return s.map(lambda t, a: a if t == "lll" else hard_shrink_array(a, cfg.threshold))
