"""Rician channel synthesis for all AP-UE, AP-IRS and IRS-UE links.

Statistical CSI holds the LoS components (steering structure scaled by
path loss and the Rician factor) together with the path-loss scalars;
instantaneous realizations add i.i.d. CN(0, 1) NLoS components scaled by
sqrt(xi / (1 + beta)).

Conventions (the reference model leaves these open, so they are fixed
here deterministically):
  * AP arrays are ULAs with half-wavelength spacing, axis along the
    nearest service-area edge (x-axis wins ties, e.g. at corners).
  * IRS panels are UPAs factored close to square (N1 = 2^floor(log2 N / 2)),
    first axis horizontal in the facing plane, second axis vertical.
  * The AP-IRS LoS matrix is rank one: outer product of the IRS steering
    vector toward the AP and the AP steering vector toward the IRS.
  * The stacked passive-beamforming vector ``theta`` follows the
    theta = Theta^H 1 convention, i.e. it holds the conjugated reflection
    coefficients, so that h_{l,k} = G_l^H diag(v_k) theta + d_{l,k}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import ScenarioConfig
from .geometry import NetworkGeometry, path_loss


def upa_shape(N: int) -> tuple[int, int]:
    """Close-to-square factorization N = N1 x N2 with N1 = 2^floor(log2(N)/2)
    when that divides N; otherwise the largest divisor <= sqrt(N)."""
    if N < 1:
        raise ValueError("N must be positive")
    n1 = 2 ** int(math.floor(math.log2(N) / 2)) if N > 1 else 1
    if N % n1 != 0:
        n1 = max(i for i in range(1, int(math.isqrt(N)) + 1) if N % i == 0)
    return n1, N // n1


def steering_ula(M: int, angle: float, spacing: float = 0.5) -> np.ndarray:
    """ULA steering vector, entry m = exp(j*2*pi*spacing*m*sin(angle))."""
    if M < 1:
        raise ValueError("M must be positive")
    m = np.arange(M)
    return np.exp(2j * np.pi * spacing * m * np.sin(angle))


def steering_upa(N1: int, N2: int, azimuth: float, elevation: float,
                 spacing: float = 0.5) -> np.ndarray:
    """UPA steering vector as the Kronecker product of two ULA factors.

    The first (length-N1) factor uses the horizontal direction cosine
    sin(azimuth)*cos(elevation), the second (length-N2) the vertical one
    sin(elevation).  Broadside (0, 0) gives the all-ones vector.
    """
    ch = np.sin(azimuth) * np.cos(elevation)
    cv = np.sin(elevation)
    f1 = np.exp(2j * np.pi * spacing * np.arange(N1) * ch)
    f2 = np.exp(2j * np.pi * spacing * np.arange(N2) * cv)
    return np.kron(f1, f2)


def _ap_array_axes(ap_positions: np.ndarray, D: float) -> np.ndarray:
    """ULA axis per AP: along the nearest service-area edge (x on ties)."""
    axes = np.zeros((len(ap_positions), 3))
    for i, (x, y, _z) in enumerate(ap_positions):
        if min(y, D - y) <= min(x, D - x):
            axes[i] = (1.0, 0.0, 0.0)
        else:
            axes[i] = (0.0, 1.0, 0.0)
    return axes


def _irs_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (horizontal, vertical) axes of the IRS facing plane."""
    h = np.array([normal[1], -normal[0], 0.0])
    h /= np.linalg.norm(h)
    v = np.array([0.0, 0.0, 1.0])
    return h, v


def _upa_toward(normal: np.ndarray, source: np.ndarray, target: np.ndarray,
                N1: int, N2: int, spacing: float) -> np.ndarray:
    """UPA steering at an IRS (at `source`, facing `normal`) toward `target`."""
    u = target - source
    u = u / np.linalg.norm(u)
    h, v = _irs_basis(normal)
    az = math.atan2(float(u @ h), float(u @ normal))
    el = math.asin(np.clip(float(u @ v), -1.0, 1.0))
    return steering_upa(N1, N2, az, el, spacing)


def _ula_toward(axis: np.ndarray, source: np.ndarray, target: np.ndarray,
                M: int, spacing: float) -> np.ndarray:
    u = target - source
    u = u / np.linalg.norm(u)
    angle = math.asin(np.clip(float(u @ axis), -1.0, 1.0))
    return steering_ula(M, angle, spacing)


@dataclass(frozen=True)
class ChannelStatistics:
    """S-CSI: LoS components, path losses and Rician factors of all links."""

    d_bar: np.ndarray     # (L, K, M) LoS AP-UE, includes sqrt(xi*beta/(1+beta))
    G_bar: np.ndarray     # (L, R, N, M) LoS AP-IRS, rank one per link
    v_bar: np.ndarray     # (R, K, N) LoS IRS-UE
    xi_d: np.ndarray      # (L, K) linear path loss
    xi_G: np.ndarray      # (L, R)
    xi_v: np.ndarray      # (R, K)
    beta_d: float         # linear Rician factors
    beta_G: float
    beta_v: float
    blockage: np.ndarray  # (L, R) bool; blocked AP-IRS links are zero
    v_blocked: np.ndarray  # (R,) bool; True disables IRS-UE links entirely

    @property
    def L(self) -> int:
        return self.d_bar.shape[0]

    @property
    def K(self) -> int:
        return self.d_bar.shape[1]

    @property
    def M(self) -> int:
        return self.d_bar.shape[2]

    @property
    def R(self) -> int:
        return self.G_bar.shape[1]

    @property
    def N(self) -> int:
        return self.G_bar.shape[2]

    def xi_G_effective(self) -> np.ndarray:
        """(L, R) path losses with blocked links zeroed."""
        return np.where(self.blockage | self.v_blocked[None, :], 0.0, self.xi_G)

    def without_reflections(self) -> "ChannelStatistics":
        """No-IRS variant: every reflection link (LoS and NLoS) is zero.

        Random-draw streams stay aligned with the original statistics
        because realizations always consume the same number of variates
        and mask afterwards.
        """
        return replace(
            self,
            G_bar=np.zeros_like(self.G_bar),
            v_bar=np.zeros_like(self.v_bar),
            blockage=np.ones_like(self.blockage),
            v_blocked=np.ones_like(self.v_blocked),
        )


def build_statistics(config: ScenarioConfig,
                     geometry: NetworkGeometry) -> ChannelStatistics:
    """Assemble the LoS components and path losses for one UE drop."""
    L, R, K, M, N = geometry.L, geometry.R, geometry.K, config.M, config.N
    N1, N2 = upa_shape(N)
    sp = config.spacing
    beta_d, beta_G, beta_v = config.beta_d, config.beta_G, config.beta_v
    axes = _ap_array_axes(geometry.ap_positions, config.D)

    def dist(a, b):
        return float(np.linalg.norm(a - b))

    xi_d = np.empty((L, K))
    xi_G = np.empty((L, R))
    xi_v = np.empty((R, K))
    d_bar = np.zeros((L, K, M), complex)
    G_bar = np.zeros((L, R, N, M), complex)
    v_bar = np.zeros((R, K, N), complex)

    for l in range(L):
        ap = geometry.ap_positions[l]
        for k in range(K):
            ue = geometry.ue_positions[k]
            xi_d[l, k] = path_loss(config.xi0_db, config.alpha_d, dist(ap, ue))
            scale = math.sqrt(xi_d[l, k] * beta_d / (1.0 + beta_d))
            d_bar[l, k] = scale * _ula_toward(axes[l], ap, ue, M, sp)
        for r in range(R):
            irs = geometry.irs_positions[r]
            xi_G[l, r] = path_loss(config.xi0_db, config.alpha_G, dist(ap, irs))
            if geometry.blockage[l, r]:
                continue
            a_irs = _upa_toward(geometry.irs_normals[r], irs, ap, N1, N2, sp)
            a_ap = _ula_toward(axes[l], ap, irs, M, sp)
            scale = math.sqrt(xi_G[l, r] * beta_G / (1.0 + beta_G))
            G_bar[l, r] = scale * np.outer(a_irs, a_ap.conj())

    for r in range(R):
        irs = geometry.irs_positions[r]
        for k in range(K):
            ue = geometry.ue_positions[k]
            xi_v[r, k] = path_loss(config.xi0_db, config.alpha_v, dist(irs, ue))
            scale = math.sqrt(xi_v[r, k] * beta_v / (1.0 + beta_v))
            v_bar[r, k] = scale * _upa_toward(geometry.irs_normals[r], irs, ue,
                                              N1, N2, sp)

    return ChannelStatistics(
        d_bar=d_bar, G_bar=G_bar, v_bar=v_bar,
        xi_d=xi_d, xi_G=xi_G, xi_v=xi_v,
        beta_d=beta_d, beta_G=beta_G, beta_v=beta_v,
        blockage=geometry.blockage.copy(),
        v_blocked=np.zeros(R, dtype=bool),
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One instantaneous draw of every link."""

    d: np.ndarray  # (L, K, M)
    G: np.ndarray  # (L, R, N, M)
    v: np.ndarray  # (R, K, N)


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) array."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / math.sqrt(2.0)


def draw_realization(stats: ChannelStatistics,
                     rng: np.random.Generator) -> ChannelRealization:
    """LoS + scaled NLoS draw for every link.

    The draw order (d, then G, then v) and count are fixed regardless of
    blockage, so paired scheme variants built from masked statistics see
    identical NLoS variates.
    """
    L, R, K, M, N = stats.L, stats.R, stats.K, stats.M, stats.N
    d = stats.d_bar + np.sqrt(stats.xi_d / (1.0 + stats.beta_d))[:, :, None] \
        * _cn(rng, (L, K, M))
    G = stats.G_bar + np.sqrt(stats.xi_G / (1.0 + stats.beta_G))[:, :, None, None] \
        * _cn(rng, (L, R, N, M))
    G[stats.blockage | stats.v_blocked[None, :]] = 0.0
    v = stats.v_bar + np.sqrt(stats.xi_v / (1.0 + stats.beta_v))[:, :, None] \
        * _cn(rng, (R, K, N))
    v[stats.v_blocked] = 0.0
    return ChannelRealization(d=d, G=G, v=v)


def assemble_overall(real: ChannelRealization, theta: np.ndarray) -> np.ndarray:
    """Overall (L*M, K) channel matrix H for a given passive beamformer.

    Column k stacks h_{l,k} = G_l^H diag(v_k) theta + d_{l,k} over APs,
    where G_l stacks the per-IRS blocks and v_k concatenates the IRS-UE
    vectors.
    """
    theta = np.asarray(theta)
    L, R, K, M, N = (real.d.shape[0], real.G.shape[1], real.d.shape[1],
                     real.d.shape[2], real.G.shape[2])
    if theta.shape != (R * N,):
        raise ValueError(f"theta must have length R*N={R * N}, got {theta.shape}")
    G_stack = real.G.transpose(0, 1, 2, 3).reshape(L, R * N, M)
    v_stack = real.v.transpose(1, 0, 2).reshape(K, R * N)
    # h[l, k] = G_l^H (v_k * theta) + d[l, k]
    w = v_stack * theta[None, :]                       # (K, RN)
    refl = np.einsum("lnm,kn->lkm", G_stack.conj(), w)  # (L, K, M)
    H = (refl + real.d).transpose(0, 2, 1).reshape(L * M, K)
    return H


def assemble_overall_sum(real: ChannelRealization,
                         theta: np.ndarray) -> np.ndarray:
    """Reference assembly via the per-IRS sum h^H = d^H + sum_r v^H Theta_r G,
    with Theta_r = diag(conj(theta_r)) per the theta = Theta^H 1 convention.
    Used to cross-check :func:`assemble_overall`."""
    L, R, K, M, N = (real.d.shape[0], real.G.shape[1], real.d.shape[1],
                     real.d.shape[2], real.G.shape[2])
    H = np.zeros((L * M, K), complex)
    for k in range(K):
        for l in range(L):
            h_row = real.d[l, k].conj()
            for r in range(R):
                Theta_r = np.diag(theta[r * N:(r + 1) * N].conj())
                h_row = h_row + real.v[r, k].conj() @ Theta_r @ real.G[l, r]
            H[l * M:(l + 1) * M, k] = h_row.conj()
    return H
