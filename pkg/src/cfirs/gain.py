"""Closed-form quadratic representation of the average channel gain.

For each UE the long-term average of sum_l ||h_{l,k}||^2 is an explicit
quadratic in the stacked passive-beamforming vector:

    theta^H A_k theta + 2 Re(theta^H b_k) + c_k,

with A_k Hermitian PSD.  The per-AP term decomposes as a low-rank part
(LoS reflections) plus a diagonal part (NLoS power), which the SDP solver
exploits; the dense matrix is kept as the contractual representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelStatistics


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian quadratic form theta^H A theta + 2 Re(theta^H b) + c."""

    A: np.ndarray           # (RN, RN) Hermitian PSD
    b: np.ndarray           # (RN,)
    c: float                # > 0
    # Structured decomposition A = diag(diag_part) + factor @ factor^H.
    diag_part: np.ndarray | None = field(default=None, compare=False)
    factor: np.ndarray | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def value(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta)
        quad = np.real(theta.conj() @ self.A @ theta)
        return float(quad + 2.0 * np.real(theta.conj() @ self.b) + self.c)

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        diag_part = factor = None
        if self.diag_part is not None and other.diag_part is not None:
            diag_part = self.diag_part + other.diag_part
            factor = np.concatenate([self.factor, other.factor], axis=1)
        return QuadraticForm(A=self.A + other.A, b=self.b + other.b,
                             c=self.c + other.c,
                             diag_part=diag_part, factor=factor)


def build_quadratic_link(stats: ChannelStatistics, l: int,
                         k: int) -> QuadraticForm:
    """Quadratic form of E{||h_{l,k}||^2} for one AP-UE pair.

    A_{l,k} = Vbar_k^H (Gbar_l Gbar_l^H + M/(1+beta_G) Xi_l^G (x) I_N) Vbar_k
              + (1/(1+beta_v) Xi_k^v (x) I_N) (.) (Gbar_l Gbar_l^H)
              + M / ((1+beta_G)(1+beta_v)) Xi_k^v Xi_l^G (x) I_N
    b_{l,k} = Vbar_k^H Gbar_l dbar_{l,k}
    c_{l,k} = ||dbar_{l,k}||^2 + M xi_d / (1+beta_d)

    Kronecker factors with I_N are realized as per-element scalar
    inflation, and the Hadamard masking by the diagonal Xi (x) I_N term
    keeps only the diagonal of Gbar Gbar^H; no dense Kronecker products
    are materialized.  Blocked AP-IRS links contribute neither LoS nor
    NLoS power, so their path loss is zeroed here.
    """
    L, R, K, M, N = stats.L, stats.R, stats.K, stats.M, stats.N
    if not (0 <= l < L and 0 <= k < K):
        raise IndexError(f"invalid link index (l={l}, k={k})")
    n = R * N

    vbar = stats.v_bar[:, k, :].reshape(n)           # concatenated over IRSs
    Gbar = stats.G_bar[l].reshape(n, M)
    dbar = stats.d_bar[l, k]
    # per-element path-loss vectors (Xi (x) I_N as scalar inflation)
    xi_G_eff = stats.xi_G_effective()[l]              # (R,), blocked zeroed
    dG = np.repeat(xi_G_eff, N)
    dv = np.repeat(stats.xi_v[:, k] * (~stats.v_blocked), N)

    g_nlos = M / (1.0 + stats.beta_G)
    v_nlos = 1.0 / (1.0 + stats.beta_v)

    GG = Gbar @ Gbar.conj().T                        # (n, n), rank <= R
    diag_part = (np.abs(vbar) ** 2) * g_nlos * dG \
        + v_nlos * dv * np.real(np.diag(GG)) \
        + v_nlos * g_nlos * dv * dG
    factor = vbar.conj()[:, None] * Gbar             # Vbar^H Gbar_l, (n, M)
    A = vbar.conj()[:, None] * GG * vbar[None, :] + np.diag(diag_part)
    b = vbar.conj() * (Gbar @ dbar)
    c = float(np.linalg.norm(dbar) ** 2
              + M * stats.xi_d[l, k] / (1.0 + stats.beta_d))
    return QuadraticForm(A=A, b=b, c=c, diag_part=diag_part, factor=factor)


def build_quadratic_ue(stats: ChannelStatistics, k: int) -> QuadraticForm:
    """Sum of the per-AP forms over all APs for UE k."""
    if not (0 <= k < stats.K):
        raise IndexError(f"invalid UE index k={k}")
    total = build_quadratic_link(stats, 0, k)
    for l in range(1, stats.L):
        total = total + build_quadratic_link(stats, l, k)
    return total


def build_all_forms(stats: ChannelStatistics) -> list[QuadraticForm]:
    return [build_quadratic_ue(stats, k) for k in range(stats.K)]
