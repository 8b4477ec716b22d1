"""Pointwise linear algebra of the sigma_k calculus on 4x4 symmetric matrices.

Elementary symmetric functions of eigenvalue spectra, Newton transforms,
positivity-cone classification, and reconstruction of the Ricci tensor from
the conformal curvature tensor (dimension 4 throughout).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CONE_TOL",
    "ConeStatus",
    "as_spectrum",
    "as_symmetric",
    "cone_membership",
    "elementary_symmetric",
    "eigenvalues",
    "newton_transform",
    "ricci_from_schouten",
    "sigma_batch",
]

# Default margin separating "interior"/"boundary"/"outside": finite-difference
# noise floor at the default grid resolutions.
CONE_TOL = 1e-10


def as_spectrum(values) -> np.ndarray:
    """Validate and return a spectrum: exactly 4 finite reals."""
    s = np.asarray(values, dtype=float).reshape(-1)
    if s.shape != (4,):
        raise ValueError(f"spectrum must have exactly 4 entries, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("spectrum entries must be finite")
    return s


def as_symmetric(a) -> np.ndarray:
    """Validate a 4x4 symmetric matrix; returns an exactly symmetric copy.

    The upper triangle is authoritative: the lower triangle is mirrored from
    it, so the result is symmetric to working precision zero.
    """
    m = np.asarray(a, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if np.max(np.abs(m - m.T)) > 1e-8 * max(1.0, np.max(np.abs(m))):
        raise ValueError("matrix is not symmetric")
    return np.triu(m) + np.triu(m, 1).T


def eigenvalues(a) -> np.ndarray:
    """Ascending eigenvalues of a 4x4 symmetric matrix (or a stack of them).

    Uses the LAPACK symmetric solver. One decomposition serves every
    sigma_k and the Newton transforms downstream.
    """
    m = np.asarray(a, dtype=float)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"expected trailing 4x4 axes, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("eigen-decomposition requires finite entries")
    return np.linalg.eigvalsh(m)


def elementary_symmetric(k: int, spectrum) -> float:
    """k-th elementary symmetric function of a 4-entry spectrum.

    Sum over all k-subsets of products of the entries; k=0 returns 1.
    """
    if not 0 <= k <= 4:
        raise ValueError(f"k must be in 0..4, got {k}")
    s = as_spectrum(spectrum)
    if k == 0:
        return 1.0
    return float(sum(np.prod(c) for c in itertools.combinations(s, k)))


def sigma_batch(eigs: np.ndarray) -> np.ndarray:
    """All of sigma_0..sigma_4 for a stack of spectra, shape (..., 4) -> (..., 5).

    Vectorized expansion of the 4-variable elementary symmetric polynomials;
    used by the field sweeps where per-point itertools would be too slow.
    """
    e = np.asarray(eigs, dtype=float)
    a, b, c, d = e[..., 0], e[..., 1], e[..., 2], e[..., 3]
    s1 = a + b + c + d
    s2 = a * b + a * c + a * d + b * c + b * d + c * d
    s3 = a * b * c + a * b * d + a * c * d + b * c * d
    s4 = a * b * c * d
    return np.stack([np.ones_like(s1), s1, s2, s3, s4], axis=-1)


def newton_transform(j: int, a) -> np.ndarray:
    """j-th Newton transform T_j(A) = sum_{i=0..j} (-1)^i sigma_{j-i}(A) A^i.

    T_0 is the identity.  T_1 = sigma_1 I - A is the coefficient tensor of
    the divergence structure; it is positive definite whenever A lies in the
    interior of the order-2 positivity cone.
    """
    if j not in (0, 1, 2, 3):
        raise ValueError(f"j must be in 0..3, got {j}")
    m = as_symmetric(a)
    sig = sigma_batch(eigenvalues(m))
    out = np.zeros((4, 4))
    power = np.eye(4)  # A^i, starting at i=0
    for i in range(j + 1):
        out += (-1.0) ** i * sig[j - i] * power
        power = power @ m
    return out


@dataclass(frozen=True)
class ConeStatus:
    """Classification of a matrix against the Gamma_k^+ positivity cone.

    tag is "interior" iff every sigma_j margin (j=1..k) exceeds tol,
    "boundary" iff the smallest margin lies within [-tol, tol], and
    "outside" otherwise.
    """

    tag: str
    margins: list[float] = field(default_factory=list)

    @property
    def is_interior(self) -> bool:
        return self.tag == "interior"


def cone_membership(k: int, a, tol: float = CONE_TOL) -> ConeStatus:
    """Classify A against Gamma_k^+ (sigma_j > 0 for all 1 <= j <= k)."""
    if not 1 <= k <= 4:
        raise ValueError(f"k must be in 1..4, got {k}")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    m = np.asarray(a, dtype=float)
    if m.shape == (4,):
        eigs = as_spectrum(m)
    else:
        eigs = eigenvalues(as_symmetric(m))
    sig = sigma_batch(eigs)
    margins = [float(sig[j]) for j in range(1, k + 1)]
    lo = min(margins)
    if lo > tol:
        tag = "interior"
    elif lo >= -tol:
        tag = "boundary"
    else:
        tag = "outside"
    return ConeStatus(tag=tag, margins=margins)


def ricci_from_schouten(a) -> np.ndarray:
    """Ricci tensor reconstructed from the conformal curvature tensor (n=4).

    Ric = 2 A + sigma_1(A) I; the scalar curvature is R = 6 sigma_1(A).
    For A in the interior of Gamma_2^+ the result is positive definite.
    """
    m = as_symmetric(a)
    return 2.0 * m + float(np.trace(m)) * np.eye(4)
