"""Ranking recognizers over eigenspace coordinates: Mahalanobis K-NN and linear SVM."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .eigenspace import EigenModel
from .errors import ConfigError, DataError

DEFAULT_KNN_EPSILON = 1e-8  # relative to the largest eigenvalue
DEFAULT_SVM_C = 1.0
SVM_TOL = 1e-3
UPDATES_PER_SAMPLE = 2000  # coordinate-update cap per binary problem, per sample


class Metric(str, enum.Enum):
    MAHALANOBIS = "mahalanobis"
    SVM_MARGIN = "svm_margin"


@dataclass(frozen=True)
class RankedMatches:
    entries: tuple[tuple[str, float], ...]
    metric: Metric

    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]

    def position(self, label: str) -> Optional[int]:
        """1-based rank of ``label``, or None if absent."""
        for i, (name, _) in enumerate(self.entries):
            if name == label:
                return i + 1
        return None

    def top(self, n: int) -> RankedMatches:
        return RankedMatches(self.entries[:n], self.metric)


def mahalanobis_distance(x, y, eigenvalues, epsilon: float = 0.0) -> float:
    """Distance under a diagonal covariance given by the PCA eigenvalues."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if not (x.shape == y.shape == lam.shape):
        raise DataError(f"length mismatch: {x.size}, {y.size}, {lam.size} eigenvalues")
    if np.any(lam < 0):
        raise DataError("eigenvalues must be non-negative")
    d = x - y
    return math.sqrt(float(np.sum(d * d / (lam + epsilon))))


def default_epsilon(eigenvalues) -> float:
    lam = np.asarray(eigenvalues)
    return DEFAULT_KNN_EPSILON * float(lam.max()) if lam.size else 0.0


def knn_rank(model: EigenModel, probe, epsilon: Optional[float] = None) -> RankedMatches:
    """Rank all gallery identities by Mahalanobis distance to ``probe``.

    Ties keep gallery insertion order. A label enrolled more than once is
    listed at its best position only.
    """
    if len(model.gallery_labels) == 0:
        raise DataError("gallery is empty")
    if epsilon is None:
        epsilon = default_epsilon(model.eigenvalues)
    probe = np.asarray(probe, dtype=np.float64)
    scores = [
        mahalanobis_distance(probe, coords, model.eigenvalues, epsilon)
        for coords in model.gallery_coords
    ]
    order = sorted(range(len(scores)), key=lambda i: scores[i])  # stable
    seen = set()
    entries = []
    for i in order:
        label = model.gallery_labels[i]
        if label not in seen:
            seen.add(label)
            entries.append((label, scores[i]))
    return RankedMatches(tuple(entries), Metric.MAHALANOBIS)


@dataclass(frozen=True, eq=False)
class BinarySvmResult:
    w: np.ndarray
    b: float
    alpha: np.ndarray
    kkt_violation: float
    updates: int


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    labels: tuple[str, ...]
    weights: np.ndarray  # n_classes x K
    biases: np.ndarray
    C: float = DEFAULT_SVM_C
    kkt_violations: Optional[np.ndarray] = None

    def scores(self, probe) -> np.ndarray:
        return self.weights @ np.asarray(probe, dtype=np.float64) + self.biases


def _projected_gradient(g: np.ndarray, alpha: np.ndarray, C: float) -> np.ndarray:
    pg = g.copy()
    at_lower = alpha <= 0.0
    at_upper = alpha >= C
    pg[at_lower] = np.minimum(g[at_lower], 0.0)
    pg[at_upper] = np.maximum(g[at_upper], 0.0)
    return pg


def train_binary_svm(
    X: np.ndarray, y: np.ndarray, C: float, tol: float = SVM_TOL, max_updates: Optional[int] = None
) -> BinarySvmResult:
    """Soft-margin linear SVM (hinge loss) by dual coordinate ascent.

    Samples are augmented with a constant feature so the bias lives in the
    weight vector and the dual keeps only the box constraints. The constant
    equals the largest sample norm, which keeps the problem equivariant to
    rescaling the data. The dual is: maximize
    ``sum(a) - 0.5 * ||sum(a_i y_i x_i)||^2`` subject to ``0 <= a_i <= C``,
    cycling over samples in index order. Stops when the largest
    projected-gradient magnitude falls below ``tol`` or after
    ``max_updates`` coordinate updates.

    The returned bias averages ``y_i - w.x_i`` over free support vectors,
    falling back to the midpoint of the extreme class margins.
    """
    X = np.asarray(X, dtype=np.float64)
    bias_feature = float(np.max(np.linalg.norm(X, axis=1), initial=0.0)) or 1.0
    X = np.hstack([X, np.full((X.shape[0], 1), bias_feature)])
    M = X.shape[0]
    if max_updates is None:
        max_updates = UPDATES_PER_SAMPLE * M
    sq_norms = np.einsum("ij,ij->i", X, X)
    alpha = np.zeros(M)
    w = np.zeros(X.shape[1])
    updates = 0

    def gradient() -> np.ndarray:
        return y * (X @ w) - 1.0

    violation = float(np.max(np.abs(_projected_gradient(gradient(), alpha, C))))
    while violation >= tol and updates < max_updates:
        for i in range(M):
            if updates >= max_updates:
                break
            updates += 1
            if sq_norms[i] == 0.0:
                # zero sample: the objective grows linearly in a_i
                alpha[i] = C
                continue
            g = y[i] * float(X[i] @ w) - 1.0
            new = min(max(alpha[i] - g / sq_norms[i], 0.0), C)
            delta = new - alpha[i]
            if delta != 0.0:
                w += delta * y[i] * X[i]
                alpha[i] = new
        violation = float(np.max(np.abs(_projected_gradient(gradient(), alpha, C))))

    w = w[:-1]
    margins = X[:, :-1] @ w
    free = (alpha > 0.0) & (alpha < C)
    if np.any(free):
        b = float(np.mean(y[free] - margins[free]))
    else:
        pos, neg = margins[y > 0], margins[y < 0]
        b = -0.5 * (float(pos.min()) + float(neg.max()))
    return BinarySvmResult(w=w, b=b, alpha=alpha, kkt_violation=violation, updates=updates)


def svm_train(
    gallery: Sequence[tuple[str, np.ndarray]], C: float = DEFAULT_SVM_C, tol: float = SVM_TOL
) -> LinearSvmModel:
    """One-vs-rest linear SVMs, one per distinct label (first-seen order)."""
    if not gallery:
        raise DataError("gallery is empty")
    if not C > 0:
        raise ConfigError(f"C must be positive, got {C}")
    names = [label for label, _ in gallery]
    X = np.stack([np.asarray(c, dtype=np.float64) for _, c in gallery])
    classes = tuple(dict.fromkeys(names))
    if len(classes) < 2:
        raise DataError("SVM training needs at least two distinct labels")

    weights, biases, violations = [], [], []
    for cls in classes:
        y = np.where(np.array(names) == cls, 1.0, -1.0)
        res = train_binary_svm(X, y, C, tol=tol)
        weights.append(res.w)
        biases.append(res.b)
        violations.append(res.kkt_violation)
    return LinearSvmModel(
        labels=classes,
        weights=np.array(weights),
        biases=np.array(biases),
        C=C,
        kkt_violations=np.array(violations),
    )


def svm_rank(model: LinearSvmModel, probe) -> RankedMatches:
    """Classes by decision value, highest first; ties by label."""
    probe = np.asarray(probe, dtype=np.float64)
    if probe.shape != (model.weights.shape[1],):
        raise DataError(f"expected {model.weights.shape[1]} coordinates, got {probe.size}")
    scores = model.scores(probe)
    order = sorted(range(len(model.labels)), key=lambda i: (-scores[i], model.labels[i]))
    return RankedMatches(
        tuple((model.labels[i], float(scores[i])) for i in order), Metric.SVM_MARGIN
    )
