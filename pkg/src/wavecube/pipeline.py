"""Whole-volume inference: partition into cubes, segment, assemble, score.

Tiling is deterministic: zero-pad the volume at the high end to cube-shape
multiples, emit non-overlapping cubes in z-major origin order; assembly is
origin-keyed, so cube processing order (or worker count) never changes the
output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data.cubes import pad_to_multiple
from .errors import ShapeMismatchError
from .validation import check_same_shape


@dataclass(frozen=True)
class CubeGrid:
    original_extents: tuple
    padded_extents: tuple
    cube_shape: tuple
    origins: tuple  # z-major ordered (z, y, x) tuples


@dataclass
class SegmentationResult:
    labels: np.ndarray
    provenance: dict = field(default_factory=dict)
    cube_logits: dict | None = None


def partition(volume: np.ndarray, cube_shape=(32, 128, 128)):
    """Tile a volume; returns (CubeGrid, list of (origin, cube))."""
    if any(c % 16 != 0 for c in cube_shape):
        raise ValueError(f"cube shape {cube_shape} must be divisible by 16 per axis")
    padded = pad_to_multiple(volume, cube_shape)
    cd, cm, cn = cube_shape
    origins = tuple(
        (z, y, x)
        for z in range(0, padded.shape[0], cd)
        for y in range(0, padded.shape[1], cm)
        for x in range(0, padded.shape[2], cn)
    )
    grid = CubeGrid(volume.shape, padded.shape, tuple(cube_shape), origins)
    cubes = [
        (o, padded[o[0]:o[0] + cd, o[1]:o[1] + cm, o[2]:o[2] + cn].copy())
        for o in origins
    ]
    return grid, cubes


def assemble(grid: CubeGrid, cubes) -> np.ndarray:
    """Inverse of partition: place cubes by origin, crop the padding.

    `cubes` is an iterable of (origin, array) in any order, or a mapping
    origin -> array; exactly one cube per grid origin is required.
    """
    items = cubes.items() if isinstance(cubes, dict) else list(cubes)
    by_origin = {}
    for origin, cube in items:
        origin = tuple(origin)
        if origin in by_origin:
            raise ShapeMismatchError(f"duplicate cube for origin {origin}")
        by_origin[origin] = np.asarray(cube)
    missing = [o for o in grid.origins if o not in by_origin]
    extra = [o for o in by_origin if o not in set(grid.origins)]
    if missing or extra:
        raise ShapeMismatchError(
            f"cube set does not match grid (missing {missing[:3]}, extra {extra[:3]})")

    sample = by_origin[grid.origins[0]]
    if sample.shape != grid.cube_shape:
        raise ShapeMismatchError(
            f"cube shape {sample.shape} does not match grid cube {grid.cube_shape}")
    out = np.zeros(grid.padded_extents, dtype=sample.dtype)
    cd, cm, cn = grid.cube_shape
    for o in grid.origins:
        cube = by_origin[o]
        if cube.shape != grid.cube_shape:
            raise ShapeMismatchError(f"cube at {o} has shape {cube.shape}")
        out[o[0]:o[0] + cd, o[1]:o[1] + cm, o[2]:o[2] + cn] = cube
    d, m, n = grid.original_extents
    return out[:d, :m, :n]


def segment_volume(volume: np.ndarray, network, cube_shape=(32, 128, 128),
                   workers: int = 1, retain_logits: bool = False) -> SegmentationResult:
    """Per-cube argmax segmentation of an arbitrary-extent volume.

    Argmax ties resolve to the lower class index (background).  Cubes are
    independent, so any worker count produces bitwise-identical output.
    """
    grid, cubes = partition(np.asarray(volume, dtype=np.float32), cube_shape)

    def run(item):
        origin, cube = item
        try:
            logits = network.forward(cube[None, None], training=False).data[0]
        except Exception as exc:
            raise type(exc)(f"cube at origin {origin}: {exc}") from exc
        return origin, logits

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cubes))
    else:
        results = [run(item) for item in cubes]

    label_cubes = {o: np.argmax(lg, axis=0).astype(np.uint8) for o, lg in results}
    labels = assemble(grid, label_cubes)
    prov = {
        "arch": network.spec.dual_structure,
        "wavelet": network.spec.wavelet or "none",
        "cube_shape": tuple(cube_shape),
        "workers": workers,
    }
    logits_map = {o: lg for o, lg in results} if retain_logits else None
    return SegmentationResult(labels, prov, logits_map)


def iou(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float, float]:
    """(background IoU, foreground IoU, mean IoU) of two binary volumes.

    A class absent from both volumes scores 1.0; the mean is the unweighted
    two-class average.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    check_same_shape(pred, truth, "pred and truth")
    scores = []
    for cls in (0, 1):
        p = pred == cls
        t = truth == cls
        union = np.count_nonzero(p | t)
        if union == 0:
            scores.append(1.0)
        else:
            scores.append(np.count_nonzero(p & t) / union)
    return float(scores[0]), float(scores[1]), float((scores[0] + scores[1]) / 2.0)
