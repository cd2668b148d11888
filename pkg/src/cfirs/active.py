"""Active beamforming: ZF precoding on instantaneous channels, Monte Carlo
estimation of the per-AP precoder power, and the closed-form max-min
long-term power allocation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ChannelStatistics, assemble_overall, \
    draw_realization
from .linalg import NumericalError, solve_gram


@dataclass(frozen=True)
class Precoder:
    """ZF precoder W = H (H^H H)^(-1); rows grouped by AP (M each)."""

    W: np.ndarray  # (L*M, K)
    M: int         # antennas per AP

    def block(self, l: int) -> np.ndarray:
        return self.W[l * self.M:(l + 1) * self.M, :]

    @property
    def L(self) -> int:
        return self.W.shape[0] // self.M

    def block_power(self) -> np.ndarray:
        """(L, K) array of ||w_{l,k}||^2."""
        L, K = self.L, self.W.shape[1]
        blocks = self.W.reshape(L, self.M, K)
        return np.sum(np.abs(blocks) ** 2, axis=1)


def zf_precoder(H: np.ndarray, M: int | None = None) -> Precoder:
    """Zero-forcing precoder; raises NumericalError with the condition
    number if H is (numerically) rank deficient — never regularizes."""
    H = np.asarray(H)
    gram_inv = solve_gram(H)
    W = H @ gram_inv
    return Precoder(W=W, M=M if M is not None else H.shape[0])


@dataclass(frozen=True)
class PowerEstimate:
    """Sample-mean estimate of E{||w_{l,k}||^2} over T realizations."""

    E: np.ndarray  # (L, K), nonnegative
    T: int
    redraws: int = 0


def precoder_power_from_realizations(realizations, theta: np.ndarray,
                                     M: int) -> PowerEstimate:
    """Average ZF block powers over an iterable of channel realizations."""
    total = None
    T = 0
    for real in realizations:
        H = assemble_overall(real, theta)
        bp = zf_precoder(H, M).block_power()
        total = bp if total is None else total + bp
        T += 1
    if T == 0:
        raise ValueError("need at least one realization")
    return PowerEstimate(E=total / T, T=T)


def estimate_precoder_power(stats: ChannelStatistics, theta: np.ndarray,
                            T: int, rng: np.random.Generator) -> PowerEstimate:
    """Monte Carlo estimate of the long-term per-AP precoder power for a
    fixed passive beamformer.  Rank-deficient draws are re-drawn and
    counted; more than 1% failures aborts."""
    if T < 1:
        raise ValueError("T must be >= 1")
    total = np.zeros((stats.L, stats.K))
    redraws = 0
    done = 0
    while done < T:
        real = draw_realization(stats, rng)
        H = assemble_overall(real, theta)
        try:
            bp = zf_precoder(H, stats.M).block_power()
        except NumericalError:
            redraws += 1
            if redraws > max(1, T // 100):
                raise
            continue
        total += bp
        done += 1
    return PowerEstimate(E=total / T, T=T, redraws=redraws)


@dataclass(frozen=True)
class PowerAllocation:
    """Equal per-UE power p (linear watts) and the binding AP index."""

    p: float
    K: int
    binding_ap: int

    def per_ue(self) -> np.ndarray:
        return np.full(self.K, self.p)


def allocate_power(estimate: PowerEstimate, P_bar: float) -> PowerAllocation:
    """p_opt = min_l P_bar / sum_k E[l][k]; the AP consuming the largest
    precoder power binds the constraint.  All-zero rows contribute no
    constraint."""
    row_sums = estimate.E.sum(axis=1)
    if not np.all(np.isfinite(row_sums)):
        raise ValueError("power estimate contains non-finite entries")
    active = row_sums > 0
    if not active.any():
        raise ValueError("all power-estimate rows are zero")
    ratios = np.where(active, P_bar / np.where(active, row_sums, 1.0), np.inf)
    binding = int(np.argmin(ratios))
    return PowerAllocation(p=float(ratios[binding]), K=estimate.E.shape[1],
                           binding_ap=binding)


def min_rate(allocation: PowerAllocation, sigma2: float) -> float:
    """log2(1 + p/sigma^2): under ZF with equal power this is every UE's
    achievable rate, hence also the minimum."""
    return float(np.log2(1.0 + allocation.p / sigma2))
