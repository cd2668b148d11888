"""Brute-force oracle: exhaustive phase-grid search of the max-min
average-gain objective on tiny instances.  Used to sanity-check the SDP
relaxation and the randomized extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gain import QuadraticForm

MAX_DIMENSION = 6
MAX_LEVELS = 16


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridResult:
    value: float          # grid optimum of min_k gain
    theta: np.ndarray     # best grid point
    evaluations: int


def grid_search(forms: list[QuadraticForm], levels: int = 16) -> GridResult:
    """Evaluate min_k(theta^H A_k theta + 2 Re(theta^H b_k) + c_k) on the
    full grid of `levels` phases per element and return the maximum."""
    n = forms[0].n
    if n > MAX_DIMENSION:
        raise OracleTooLarge(f"grid search limited to {MAX_DIMENSION} elements")
    if not (2 <= levels <= MAX_LEVELS):
        raise OracleTooLarge(f"levels must be in [2, {MAX_LEVELS}]")
    total = levels ** n
    phases = 2.0 * np.pi * np.arange(levels) / levels
    # enumerate all grid points as an (levels^n, n) phase matrix
    grids = np.meshgrid(*([phases] * n), indexing="ij")
    thetas = np.exp(1j * np.stack([g.ravel() for g in grids], axis=1))
    best_vals = np.full(total, np.inf)
    for qf in forms:
        quad = np.real(np.einsum("ti,ij,tj->t", thetas.conj(), qf.A, thetas))
        lin = 2.0 * np.real(thetas.conj() @ qf.b)
        np.minimum(best_vals, quad + lin + qf.c, out=best_vals)
    best = int(np.argmax(best_vals))
    return GridResult(value=float(best_vals[best]), theta=thetas[best],
                      evaluations=total)
