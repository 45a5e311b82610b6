"""Eigenface baseline: mean face, small-matrix eigenvector trick, KLT projection.

The covariance of the vectorized gallery is never formed at full size.
Diagonalizing the M x M Gram matrix of the mean-removed images yields the same
nonzero spectrum, and its eigenvectors lift to image-space eigenfaces as
linear combinations of the training residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Image
from .transforms import KLT, FeatureVector

# eigenvalues at or below max_eigenvalue * RANK_RTOL count as rank deficiency
RANK_RTOL = 1e-10


class RankError(ValueError):
    """Requested more eigenfaces than the gallery's rank supports."""

    def __init__(self, requested: int, attainable: int):
        self.requested = requested
        self.attainable = attainable
        super().__init__(
            f"requested {requested} eigenfaces but the gallery supports only "
            f"{attainable} (rank after mean removal)"
        )


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Mean face plus unit-norm eigenfaces in descending-eigenvalue order."""

    mean_face: np.ndarray   # (P,)
    eigenfaces: np.ndarray  # (m', P), rows are unit L2
    eigenvalues: np.ndarray  # (m',) descending, > 0
    rows: int
    cols: int

    @property
    def n_components(self) -> int:
        return self.eigenfaces.shape[0]


def train_eigenbasis(gallery: list[Image], m_prime: int) -> EigenBasis:
    """Fit the mean face and the ``m_prime`` leading eigenfaces of a gallery.

    Zero-eigenvalue directions (the rank lost to mean removal, or worse for
    degenerate galleries) are excluded before counting ``m_prime``; asking for
    more raises :class:`RankError` carrying the attainable count.
    """
    if not gallery:
        raise ValueError("gallery must be nonempty")
    shapes = {im.shape for im in gallery}
    if len(shapes) != 1:
        raise ValueError(f"gallery images must share dimensions, got {sorted(shapes)}")
    m = len(gallery)
    if not 1 <= m_prime <= m:
        raise ValueError(f"m_prime must be in 1..{m}, got {m_prime}")
    rows, cols = shapes.pop()

    x = np.stack([im.pixels.ravel() for im in gallery])  # (M, P)
    mean_face = x.mean(axis=0)
    phi = x - mean_face

    # Gram matrix (A^T A)/M shares C's nonzero eigenvalues at a fraction of the size
    gram = (phi @ phi.T) / m
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    order = np.argsort(-eigenvalues, kind="stable")  # descending, ties by index
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    cutoff = max(eigenvalues[0], 0.0) * RANK_RTOL
    attainable = int(np.sum(eigenvalues > cutoff))
    if m_prime > attainable:
        raise RankError(requested=m_prime, attainable=attainable)

    faces = eigenvectors[:, :m_prime].T @ phi  # u_l = sum_k v_lk Phi_k
    faces /= np.linalg.norm(faces, axis=1, keepdims=True)
    # deterministic sign: largest-magnitude component made positive
    flip = faces[np.arange(m_prime), np.argmax(np.abs(faces), axis=1)] < 0
    faces[flip] *= -1.0

    return EigenBasis(
        mean_face=mean_face,
        eigenfaces=faces,
        eigenvalues=eigenvalues[:m_prime].copy(),
        rows=rows,
        cols=cols,
    )


def attainable_rank(gallery: list[Image]) -> int:
    """Number of eigenfaces the gallery can actually supply."""
    if not gallery:
        raise ValueError("gallery must be nonempty")
    x = np.stack([im.pixels.ravel() for im in gallery])
    phi = x - x.mean(axis=0)
    eigenvalues = np.linalg.eigvalsh((phi @ phi.T) / len(gallery))
    top = max(eigenvalues.max(), 0.0)
    return int(np.sum(eigenvalues > top * RANK_RTOL))


def project(image: Image | np.ndarray, basis: EigenBasis) -> FeatureVector:
    """Weights of the mean-removed image on the basis directions."""
    pixels = image.pixels if isinstance(image, Image) else np.asarray(image, dtype=np.float64)
    if pixels.shape != (basis.rows, basis.cols):
        raise ValueError(
            f"image dims {pixels.shape} do not match basis {(basis.rows, basis.cols)}"
        )
    weights = basis.eigenfaces @ (pixels.ravel() - basis.mean_face)
    if isinstance(image, Image):
        return FeatureVector(coeffs=weights, source=KLT,
                             label=image.subject_id, sample_id=image.sample_id)
    return FeatureVector(coeffs=weights, source=KLT)


def reconstruct(weights: FeatureVector | np.ndarray, basis: EigenBasis) -> np.ndarray:
    """Mean face plus the weighted eigenface sum, reshaped to image dims."""
    w = weights.coeffs if isinstance(weights, FeatureVector) else np.asarray(weights)
    if w.size != basis.n_components:
        raise ValueError(f"expected {basis.n_components} weights, got {w.size}")
    return (basis.mean_face + w @ basis.eigenfaces).reshape(basis.rows, basis.cols)


# ---------------------------------------------------------------------------
# Serialization

_FORMAT_VERSION = 1


def save_basis(basis: EigenBasis, path: str | Path) -> None:
    """Write a basis as a self-describing npz archive (bit-exact round trip)."""
    np.savez(
        Path(path),
        format_version=np.array(_FORMAT_VERSION),
        dims=np.array([basis.rows, basis.cols]),
        n_components=np.array(basis.n_components),
        eigenvalues=basis.eigenvalues,
        mean_face=basis.mean_face,
        eigenfaces=basis.eigenfaces,
    )


def load_basis(path: str | Path) -> EigenBasis:
    with np.load(Path(path)) as data:
        version = int(data["format_version"])
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported basis format version {version}")
        rows, cols = (int(v) for v in data["dims"])
        return EigenBasis(
            mean_face=data["mean_face"],
            eigenfaces=data["eigenfaces"],
            eigenvalues=data["eigenvalues"],
            rows=rows,
            cols=cols,
        )
