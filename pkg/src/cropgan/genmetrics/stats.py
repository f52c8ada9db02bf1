"""Gaussian feature statistics and the Fréchet distance between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import NumericalError, ShapeError

NEG_EIGENVALUE_TOL = -1e-8
SQRT_RESIDUAL_RTOL = 1e-6
FID_NEGATIVE_CLIP = -1e-6


@dataclass
class FeatureStats:
    """Mean vector and covariance matrix of an embedded image set."""

    mu: np.ndarray
    sigma: np.ndarray
    n: int

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        d = self.mu.shape[0]
        if self.sigma.shape != (d, d):
            raise ShapeError(f"sigma shape {self.sigma.shape} does not match mu dim {d}")
        asym = np.abs(self.sigma - self.sigma.T).max() if d else 0.0
        if asym > 1e-9 * max(1.0, np.abs(self.sigma).max()):
            raise NumericalError(f"sigma is not symmetric (max asymmetry {asym:.3e})")


def fit_gaussian(features: np.ndarray) -> FeatureStats:
    """Column means and unbiased (n-1) covariance, symmetrized."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError(f"expected an n x d feature matrix, got shape {features.shape}")
    n = features.shape[0]
    if n < 2:
        raise NumericalError(f"need n >= 2 samples for a covariance, got {n}")
    mu = features.mean(axis=0)
    centered = features - mu
    sigma = centered.T @ centered / (n - 1)
    sigma = (sigma + sigma.T) / 2.0
    return FeatureStats(mu=mu, sigma=sigma, n=n)


def matrix_sqrt_psd(a: np.ndarray,
                    neg_tol: float = NEG_EIGENVALUE_TOL,
                    residual_rtol: float = SQRT_RESIDUAL_RTOL) -> np.ndarray:
    """Square root of a matrix with real non-negative spectrum.

    Symmetric inputs go through an eigendecomposition; eigenvalues in
    [neg_tol, 0] are clipped to zero and anything below neg_tol is an
    error. Non-symmetric inputs (products of PSD factors) fall back to a
    Schur-based square root. Both paths verify S @ S against the input.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix square root needs a square matrix, got {a.shape}")
    norm_a = float(np.linalg.norm(a))
    scale = max(1.0, np.abs(a).max()) if a.size else 1.0
    symmetric = np.abs(a - a.T).max() <= 1e-12 * scale if a.size else True

    if symmetric:
        w, v = np.linalg.eigh((a + a.T) / 2.0)
        if w.min(initial=0.0) < neg_tol:
            raise NumericalError(
                f"matrix has negative eigenvalue {w.min():.3e} below tolerance {neg_tol:.0e}"
            )
        w = np.clip(w, 0.0, None)
        root = (v * np.sqrt(w)) @ v.T
    else:
        root = scipy.linalg.sqrtm(a)
        if np.iscomplexobj(root):
            if np.abs(root.imag).max() > 1e-8 * max(1.0, np.abs(root.real).max()):
                raise NumericalError("matrix square root has a large imaginary part")
            root = root.real

    residual = float(np.linalg.norm(root @ root - a))
    if residual > residual_rtol * max(norm_a, 1e-30):
        raise NumericalError(
            f"square-root residual {residual:.3e} exceeds {residual_rtol:.0e} * ||A||"
        )
    return root


def trace_sqrt_product(sigma_r: np.ndarray, sigma_g: np.ndarray) -> float:
    """Tr((sigma_r sigma_g)^(1/2)) via the symmetric reduction.

    Uses Tr((Sr Sg)^(1/2)) = Tr((Sr^(1/2) Sg Sr^(1/2))^(1/2)), which keeps
    every eigendecomposition on a symmetric matrix.
    """
    root_r = matrix_sqrt_psd(sigma_r)
    inner = root_r @ sigma_g @ root_r
    inner = (inner + inner.T) / 2.0
    return float(np.trace(matrix_sqrt_psd(inner)))


def fid(real: FeatureStats, gen: FeatureStats) -> float:
    """Fréchet distance between two Gaussian feature fits.

    ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2)); tiny negative
    results from floating point are clipped to zero.
    """
    if real.mu.shape != gen.mu.shape:
        raise ShapeError(
            f"feature dimensions differ: {real.mu.shape[0]} vs {gen.mu.shape[0]}"
        )
    diff = real.mu - gen.mu
    value = float(diff @ diff)
    value += float(np.trace(real.sigma) + np.trace(gen.sigma))
    value -= 2.0 * trace_sqrt_product(real.sigma, gen.sigma)
    if value < 0.0:
        if value < FID_NEGATIVE_CLIP:
            raise NumericalError(f"FID came out {value:.3e}; numerical failure")
        value = 0.0
    return value
