"""Estimator-style facade: fit/predict over cube stacks, sklearn conventions.

Duck-typed to compose with the wider ecosystem (get_params/set_params,
fit returns self) without importing scikit-learn.  X is a stack of image
cubes shaped (n_cubes, d, m, n); y holds the matching binary label cubes.
"""

from __future__ import annotations

import numpy as np

from .arch import NetworkSpec, WAVELET_STRUCTURES
from .pipeline import segment_volume
from .train import TrainConfig, evaluate_iou, fit


def _check_cube_stack(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 4:
        raise ValueError(f"{name} must be (n_cubes, d, m, n), got shape {X.shape}")
    return X


class WaveUNetSegmenter:
    """Volumetric segmentation estimator wrapping one of the seven networks."""

    _PARAM_NAMES = ("arch", "wavelet", "epochs", "base_lr", "momentum",
                    "weight_decay", "batch_size", "class_weights", "poly_power",
                    "seed", "val_fraction", "shrink_threshold")

    def __init__(self, arch: str = "DIDn", wavelet: str | None = "haar",
                 epochs: int = 10, base_lr: float = 0.1, momentum: float = 0.9,
                 weight_decay: float = 0.0001, batch_size: int = 4,
                 class_weights: tuple = (1.0, 5.0), poly_power: float = 0.9,
                 seed: int = 0, val_fraction: float = 0.1,
                 shrink_threshold: float = 0.25):
        self.arch = arch
        self.wavelet = wavelet
        self.epochs = epochs
        self.base_lr = base_lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.class_weights = class_weights
        self.poly_power = poly_power
        self.seed = seed
        self.val_fraction = val_fraction
        self.shrink_threshold = shrink_threshold

    # -- sklearn plumbing ----------------------------------------------------
    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params) -> "WaveUNetSegmenter":
        for key, val in params.items():
            if key not in self._PARAM_NAMES:
                raise ValueError(f"invalid parameter {key!r} for WaveUNetSegmenter")
            setattr(self, key, val)
        return self

    def _spec(self) -> NetworkSpec:
        wavelet = self.wavelet if self.arch in WAVELET_STRUCTURES else None
        return NetworkSpec(dual_structure=self.arch, wavelet=wavelet,
                           shrink_threshold=self.shrink_threshold)

    # -- estimator API ---------------------------------------------------
    def fit(self, X, y, out_dir=None) -> "WaveUNetSegmenter":
        X = _check_cube_stack(X)
        y = _check_cube_stack(np.asarray(y), "y")
        if X.shape != y.shape:
            raise ValueError(f"X and y shapes differ: {X.shape} vs {y.shape}")
        cfg = TrainConfig(
            epochs=self.epochs, base_lr=self.base_lr, momentum=self.momentum,
            weight_decay=self.weight_decay, batch_size=self.batch_size,
            class_weights=tuple(self.class_weights), poly_power=self.poly_power,
            seed=self.seed, val_fraction=self.val_fraction)
        dataset = [(X[i], y[i]) for i in range(X.shape[0])]
        result = fit(self._spec(), dataset, cfg, out_dir=out_dir)
        self.network_ = result.network
        self.history_ = result.history
        return self

    def _require_fitted(self):
        if not hasattr(self, "network_"):
            raise RuntimeError("this WaveUNetSegmenter is not fitted yet")

    def predict(self, X) -> np.ndarray:
        """Binary label cube per input cube (argmax over class logits)."""
        self._require_fitted()
        X = _check_cube_stack(X)
        out = np.empty(X.shape, dtype=np.uint8)
        bs = max(1, self.batch_size)
        for start in range(0, X.shape[0], bs):
            chunk = X[start:start + bs].astype(self.network_.dtype)[:, None]
            logits = self.network_.forward(chunk, training=False).data
            out[start:start + bs] = np.argmax(logits, axis=1).astype(np.uint8)
        return out

    def predict_volume(self, volume, cube_shape=(32, 128, 128), workers: int = 1):
        """Segment an arbitrary-extent volume via the tiling pipeline."""
        self._require_fitted()
        return segment_volume(volume, self.network_, cube_shape, workers)

    def score(self, X, y) -> float:
        """Mean two-class IoU aggregated over the given cubes."""
        self._require_fitted()
        X = _check_cube_stack(X)
        y = _check_cube_stack(np.asarray(y), "y")
        dataset = [(X[i], y[i]) for i in range(X.shape[0])]
        return evaluate_iou(self.network_, dataset, self.batch_size)[2]
