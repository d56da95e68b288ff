"""Generative PCA classifier: one affine subspace per class.

A sample is assigned to the class whose affine subspace reconstructs it
with the smallest residual norm (the "approximation error").
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureTensor
from .grid import FractionalOrderPair

__all__ = [
    "DEFAULT_PCA_DIMS",
    "PcaClassModel",
    "EvalProtocol",
    "ErrorTable",
    "SplitError",
    "train_pca",
    "train_models",
    "classify",
    "approximation_errors",
    "stratified_split",
    "evaluate",
]

DEFAULT_PCA_DIMS = (10, 15, 20, 25, 30, 35, 40, 45, 50, 60, 70, 80)


class SplitError(ValueError):
    """A class has too few samples for the requested protocol."""

    def __init__(self, message: str, class_id: int):
        super().__init__(message)
        self.class_id = class_id


@dataclass
class PcaClassModel:
    class_id: int
    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @property
    def L(self) -> int:
        return self.mean.shape[0]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def train_pca(features, d: int, class_id: int = 0) -> PcaClassModel:
    """Fit the mean and the top-``d`` principal directions of one class.

    ``features`` is (N_c, L): one row per training sample.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"class {class_id}: features must be (N_c, L), got {X.shape}")
    n, L = X.shape
    if n < 2:
        raise SplitError(f"class {class_id} has {n} training sample(s); need at least 2", class_id)
    if not 1 <= d <= min(L, n - 1):
        raise ValueError(
            f"class {class_id}: d={d} must lie in [1, min(L={L}, N_c-1={n - 1})]"
        )
    mean = X.mean(axis=0)
    centered = X - mean
    if not np.any(centered):
        raise SplitError(f"class {class_id} is degenerate: all training samples identical", class_id)
    # right singular vectors stay orthonormal even past the numerical rank
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    basis = _fix_signs(vt[:d].T.copy())
    return PcaClassModel(int(class_id), mean, basis, sing[:d] ** 2 / (n - 1))


def approximation_errors(X, models) -> np.ndarray:
    """(N, C) residual norms of each row of ``X`` against each model."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty((X.shape[0], len(models)))
    for c, m in enumerate(models):
        if X.shape[1] != m.L:
            raise ValueError(f"feature length {X.shape[1]} != model length {m.L} (class {m.class_id})")
        r = X - m.mean
        r = r - (r @ m.basis) @ m.basis.T
        out[:, c] = np.linalg.norm(r, axis=1)
    return out


def classify(x, models) -> tuple[int, np.ndarray]:
    """Label of the smallest approximation error; ties go to the lowest class id."""
    models = sorted(models, key=lambda m: m.class_id)
    if not models:
        raise ValueError("need at least one model")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    errs = approximation_errors(x[None], models)[0]
    return models[int(np.argmin(errs))].class_id, errs


def predict(X, models) -> tuple[np.ndarray, np.ndarray]:
    models = sorted(models, key=lambda m: m.class_id)
    errs = approximation_errors(X, models)
    ids = np.array([m.class_id for m in models])
    return ids[np.argmin(errs, axis=1)], errs


def truncate(model: PcaClassModel, d: int) -> PcaClassModel:
    """The same model keeping at most ``d`` leading directions."""
    ev = None if model.eigenvalues is None else model.eigenvalues[:d]
    return PcaClassModel(model.class_id, model.mean, model.basis[:, :d], ev)


def train_models(X, y, d: int) -> list[PcaClassModel]:
    """One model per class; ``d`` is clipped to what each class can support.

    A class whose training samples are all identical gets a zero-dimensional
    model (its mean alone) instead of an error, so degenerate data still
    produces a deterministic table.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    models = []
    for c in np.unique(y):
        Xc = X[y == c]
        if len(Xc) < 2:
            raise SplitError(f"class {c} has {len(Xc)} training sample(s); need at least 2", int(c))
        if not np.any(Xc - Xc[0]):
            models.append(PcaClassModel(int(c), Xc[0].copy(), np.zeros((X.shape[1], 0)), np.zeros(0)))
            continue
        models.append(train_pca(Xc, min(d, X.shape[1], len(Xc) - 1), int(c)))
    return models


@dataclass(frozen=True)
class EvalProtocol:
    train_ratio: float = 0.5
    repetitions: int = 5
    pca_dims: tuple[int, ...] = DEFAULT_PCA_DIMS
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_ratio < 1:
            raise ValueError(f"train_ratio must be in (0, 1), got {self.train_ratio}")
        if int(self.repetitions) < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        dims = tuple(int(d) for d in self.pca_dims)
        if not dims or min(dims) < 1:
            raise ValueError(f"pca_dims must be nonempty positive integers, got {self.pca_dims}")
        object.__setattr__(self, "pca_dims", dims)


def stratified_split(labels, train_ratio: float, rng: np.random.Generator):
    """Index arrays (train, test) preserving each class's share."""
    labels = np.asarray(labels)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        k = int(round(train_ratio * len(idx)))
        if k < 2:
            raise SplitError(
                f"class {c} has {len(idx)} sample(s): {k} after a {train_ratio:g} split, need at least 2 to train",
                int(c),
            )
        if k == len(idx):
            k -= 1
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass
class ErrorTable:
    """Mean test error rate per (order setting, PCA dimension)."""

    order_grid: list[FractionalOrderPair]
    pca_dims: tuple[int, ...]
    errors: np.ndarray  # (D, P), mean over repetitions
    per_repetition: np.ndarray  # (R, D, P)

    @property
    def best_per_order(self) -> np.ndarray:
        return self.errors.min(axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha1", "alpha2", *[f"pca{d}" for d in self.pca_dims], "min"])
            for o, row, best in zip(self.order_grid, self.errors, self.best_per_order):
                w.writerow([f"{o.alpha1:g}", f"{o.alpha2:g}", *[repr(float(v)) for v in row], repr(float(best))])


def evaluate(tensor: FeatureTensor, protocol: EvalProtocol) -> ErrorTable:
    """Repeated stratified splits; PCA models per order slice and dimension."""
    classes = np.unique(tensor.labels)
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, tensor has {len(classes)}")
    rng = np.random.default_rng(protocol.seed)
    R, D, P = protocol.repetitions, tensor.D, len(protocol.pca_dims)
    per_rep = np.empty((R, D, P))
    for r in range(R):
        tr, te = stratified_split(tensor.labels, protocol.train_ratio, rng)
        for d in range(D):
            X = tensor.order_slice(d)
            # one fit at the largest dimension; smaller ones are its leading columns
            full = train_models(X[tr], tensor.labels[tr], max(protocol.pca_dims))
            for p, dim in enumerate(protocol.pca_dims):
                models = [truncate(m, dim) for m in full]
                pred, _ = predict(X[te], models)
                per_rep[r, d, p] = float(np.mean(pred != tensor.labels[te]))
    return ErrorTable(list(tensor.order_grid), protocol.pca_dims, per_rep.mean(axis=0), per_rep)
