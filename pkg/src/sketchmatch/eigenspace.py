"""Eigenspace (PCA) features with a cyclic Jacobi eigensolver."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, NumericError
from .modality import OffsetI

DEFAULT_EIGEN_THRESHOLD = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10


class CenteringMode(str, enum.Enum):
    PER_IMAGE_SCALAR = "per_image_scalar"
    GLOBAL_MEAN_VECTOR = "global_mean_vector"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise DataError(f"feature vector {self.label!r} has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class SymmetricEigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    sweeps: int = 0


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is non-negative."""
    vectors = np.array(vectors, dtype=np.float64)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def eig_symmetric(
    A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> SymmetricEigenResult:
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Iterates row-by-row sweeps over the upper triangle until every
    off-diagonal entry is at most ``tol * ||A||_F``. Eigenpairs are returned
    in descending eigenvalue order with the sign convention of
    :func:`fix_signs`.
    """
    a = np.array(A, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    norm = float(np.linalg.norm(a))
    if not math.isfinite(norm):
        raise DataError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * max(norm, np.finfo(float).tiny):
        raise DataError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    threshold = tol * norm

    def max_offdiag() -> float:
        if n < 2:
            return 0.0
        return float(np.max(np.abs(a - np.diag(np.diag(a)))))

    sweeps = 0
    while max_offdiag() > threshold:
        if sweeps >= max_sweeps:
            raise NumericError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return SymmetricEigenResult(eigenvalues[order], fix_signs(v[:, order]), sweeps)


def center(v, mode: CenteringMode | str, global_mean=None) -> np.ndarray:
    x = np.asarray(getattr(v, "values", v), dtype=np.float64)
    mode = CenteringMode(mode)
    if mode is CenteringMode.PER_IMAGE_SCALAR:
        return x - x.mean()
    if global_mean is None:
        raise DataError("global centering needs a mean vector")
    mean = np.asarray(global_mean, dtype=np.float64)
    if mean.shape != x.shape:
        raise DataError(f"length mismatch: vector {x.size}, mean {mean.size}")
    return x - mean


@dataclass(frozen=True, eq=False)
class EigenModel:
    """Trained eigenspace plus the projected gallery."""

    dim: int
    centering_mode: CenteringMode
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # D x K, orthonormal columns
    gallery_labels: tuple[str, ...]
    gallery_coords: np.ndarray  # N x K
    global_mean: Optional[np.ndarray] = None
    offset_I: OffsetI = field(default_factory=OffsetI)

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size

    def project(self, v) -> np.ndarray:
        return project(self, v)


def _retain(eigenvalues: np.ndarray, eigen_threshold: float) -> int:
    lam_max = eigenvalues[0] if eigenvalues.size else 0.0
    if not lam_max > 0.0:
        raise NumericError("no positive eigenvalue: training features carry no variance")
    return int(np.count_nonzero(eigenvalues > eigen_threshold * lam_max))


def principal_axes(
    Q: np.ndarray, eigen_threshold: float = DEFAULT_EIGEN_THRESHOLD, route: str = "auto"
) -> tuple[np.ndarray, np.ndarray]:
    """Leading eigenpairs of ``Q Q^T`` for a D x M data matrix ``Q``.

    ``route`` picks the D x D covariance ("covariance"), the M x M Gram
    matrix ("gram"), or the smaller of the two ("auto").
    """
    D, M = Q.shape
    if route == "auto":
        route = "covariance" if D <= M else "gram"
    if route == "covariance":
        res = eig_symmetric(Q @ Q.T)
        k = _retain(res.eigenvalues, eigen_threshold)
        return res.eigenvalues[:k], res.eigenvectors[:, :k]
    if route == "gram":
        res = eig_symmetric(Q.T @ Q)
        k = _retain(res.eigenvalues, eigen_threshold)
        lam = res.eigenvalues[:k]
        vecs = Q @ res.eigenvectors[:, :k]
        vecs /= np.linalg.norm(vecs, axis=0)
        return lam, fix_signs(vecs)
    raise ValueError(f"unknown route {route!r}")


def train(
    features: Sequence[FeatureVector],
    centering_mode: CenteringMode | str = CenteringMode.PER_IMAGE_SCALAR,
    eigen_threshold: float = DEFAULT_EIGEN_THRESHOLD,
    offset_I: OffsetI = OffsetI(0),
    route: str = "auto",
) -> EigenModel:
    mode = CenteringMode(centering_mode)
    if len(features) < 2:
        raise DataError(f"need at least 2 training vectors, got {len(features)}")
    D = len(features[0])
    if any(len(f) != D for f in features):
        raise DataError("training vectors have inconsistent lengths")
    X = np.stack([f.values for f in features], axis=1)  # D x M
    if np.all(X == X[:, :1]):
        raise NumericError("no positive eigenvalue: all training vectors are identical")

    mean = X.mean(axis=1) if mode is CenteringMode.GLOBAL_MEAN_VECTOR else None
    Q = np.stack([center(X[:, i], mode, mean) for i in range(X.shape[1])], axis=1)
    eigenvalues, eigenvectors = principal_axes(Q, eigen_threshold, route)
    coords = (eigenvectors.T @ Q).T
    return EigenModel(
        dim=D,
        centering_mode=mode,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        gallery_labels=tuple(f.label for f in features),
        gallery_coords=coords,
        global_mean=mean,
        offset_I=offset_I,
    )


def project(model: EigenModel, v) -> np.ndarray:
    x = np.asarray(getattr(v, "values", v), dtype=np.float64).reshape(-1)
    if x.size != model.dim:
        raise DataError(f"expected a vector of length {model.dim}, got {x.size}")
    return model.eigenvectors.T @ center(x, model.centering_mode, model.global_mean)
