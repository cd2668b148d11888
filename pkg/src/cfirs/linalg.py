"""Thin, contract-checked wrappers around the dense complex linear algebra
used elsewhere: Hermitian eigendecomposition, Gram-system solves for the
ZF precoder, and Gaussian sampling with a prescribed covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # orthonormal columns


def hermitian_eig(A: np.ndarray, herm_tol: float = 1e-8) -> HermitianEig:
    """Full eigendecomposition of a Hermitian matrix (ascending order)."""
    A = np.asarray(A)
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(A - A.conj().T).max() > herm_tol * scale:
        raise NumericalError("matrix is not Hermitian within tolerance")
    w, V = scipy.linalg.eigh(0.5 * (A + A.conj().T))
    return HermitianEig(eigenvalues=w, eigenvectors=V)


def solve_gram(H: np.ndarray, max_cond: float = 1e12) -> np.ndarray:
    """Return X = (H^H H)^(-1) via a Cholesky solve (no explicit inverse
    of H itself).  Raises if the Gram matrix is too ill-conditioned."""
    H = np.asarray(H)
    G = H.conj().T @ H
    G = 0.5 * (G + G.conj().T)
    w = scipy.linalg.eigvalsh(G)
    if w[0] <= 0 or w[-1] / w[0] > max_cond:
        cond = np.inf if w[0] <= 0 else w[-1] / w[0]
        raise NumericalError(
            f"rank-deficient channel: Gram condition number {cond:.3e}")
    c, low = scipy.linalg.cho_factor(G)
    return scipy.linalg.cho_solve((c, low), np.eye(G.shape[0], dtype=G.dtype))


def sample_gaussian(cov: np.ndarray, rng: np.random.Generator,
                    size: int = 1, psd_tol: float = 1e-8) -> np.ndarray:
    """Zero-mean circularly-symmetric complex Gaussian draws with the given
    covariance; returns shape (size, n).  Uses an eigenvalue factor so that
    rank-deficient covariances are supported."""
    cov = np.asarray(cov)
    eig = hermitian_eig(cov)
    scale = max(eig.eigenvalues[-1], 0.0)
    if eig.eigenvalues[0] < -psd_tol * max(scale, 1.0):
        raise NumericalError("covariance is not PSD within tolerance")
    lam = np.clip(eig.eigenvalues, 0.0, None)
    fac = eig.eigenvectors * np.sqrt(lam)[None, :]
    n = cov.shape[0]
    z = (rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))) \
        / np.sqrt(2.0)
    # rows are F z with F = V sqrt(lam), so E{x x^H} = F F^H = cov
    return z @ fac.T
