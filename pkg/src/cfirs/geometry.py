"""Node placement, AP-IRS blockage and distance-dependent path loss.

APs sit on the perimeter of a D x D square (at the four corners for L=4),
IRSs on a circle of radius r around the hotspot center (d, d), UEs are
dropped uniformly inside that circle.  Each IRS faces the hotspot center;
an AP that lies strictly behind the vertical plane through an IRS cannot
reach it, and the corresponding AP-IRS channel is identically zero.

IRS index 1 is placed at azimuth 5*pi/4 (pointing from the hotspot center
toward the AP at the origin), subsequent IRSs counterclockwise.  With the
default geometry this makes the origin AP blocked toward IRSs {1, 2, 8},
matching the reference deployment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, ScenarioConfig, db_to_linear


@dataclass(frozen=True)
class NetworkGeometry:
    """Static node layout for one UE drop."""

    ap_positions: np.ndarray    # (L, 3) [m]
    irs_positions: np.ndarray   # (R, 3) [m]
    irs_normals: np.ndarray     # (R, 3) unit vectors, horizontal, face hotspot
    ue_positions: np.ndarray    # (K, 3) [m]
    blockage: np.ndarray        # (L, R) bool, True = AP->IRS link blocked

    def __post_init__(self):
        norms = np.linalg.norm(self.irs_normals, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            raise ValueError("IRS normals must have unit length")
        L, R = self.ap_positions.shape[0], self.irs_positions.shape[0]
        if self.blockage.shape != (L, R):
            raise ValueError("blockage matrix shape mismatch")

    @property
    def L(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def R(self) -> int:
        return self.irs_positions.shape[0]

    @property
    def K(self) -> int:
        return self.ue_positions.shape[0]


def _ap_layout(L: int, D: float, height: float) -> np.ndarray:
    """APs evenly spaced along the square perimeter, starting at (0, 0)."""
    corners = np.array([[0, 0], [D, 0], [D, D], [0, D]], dtype=float)
    if L == 4:
        xy = corners
    else:
        # walk the perimeter counterclockwise
        perim = 4.0 * D
        xy = np.empty((L, 2))
        for i in range(L):
            s = i * perim / L
            edge, off = int(s // D), s % D
            if edge == 0:
                xy[i] = (off, 0.0)
            elif edge == 1:
                xy[i] = (D, off)
            elif edge == 2:
                xy[i] = (D - off, D)
            else:
                xy[i] = (0.0, D - off)
    pos = np.column_stack([xy, np.full(len(xy), height)])
    return pos


def compute_blockage(ap_positions: np.ndarray, irs_positions: np.ndarray,
                     irs_normals: np.ndarray) -> np.ndarray:
    """AP l is blocked toward IRS r iff it lies strictly behind the
    vertical plane through IRS r with the given facing normal."""
    delta = ap_positions[:, None, :2] - irs_positions[None, :, :2]
    proj = np.einsum("lrx,rx->lr", delta, irs_normals[:, :2])
    return proj < 0.0


def place_nodes(config: ScenarioConfig, rng_seed: int) -> NetworkGeometry:
    """Deterministic AP/IRS layout plus one random uniform UE drop."""
    ap_positions = _ap_layout(config.L, config.D, config.ap_height)

    angles = config.irs_start_angle + 2.0 * np.pi * np.arange(config.R) / config.R
    center = np.array([config.d, config.d])
    irs_xy = center + config.r_hotspot * np.column_stack([np.cos(angles), np.sin(angles)])
    irs_positions = np.column_stack([irs_xy, np.full(config.R, config.irs_height)])
    normals_xy = center - irs_xy
    normals_xy /= np.linalg.norm(normals_xy, axis=1, keepdims=True)
    irs_normals = np.column_stack([normals_xy, np.zeros(config.R)])

    rng = np.random.default_rng(rng_seed)
    rad = config.r_hotspot * np.sqrt(rng.uniform(size=config.K))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=config.K)
    ue_xy = center + np.column_stack([rad * np.cos(phi), rad * np.sin(phi)])
    ue_positions = np.column_stack([ue_xy, np.full(config.K, config.ue_height)])

    blockage = compute_blockage(ap_positions, irs_positions, irs_normals)
    return NetworkGeometry(ap_positions, irs_positions, irs_normals,
                           ue_positions, blockage)


_SUBSETS = {2: (0, 4), 4: (0, 2, 4, 6), 8: tuple(range(8))}


def irs_subset(geometry: NetworkGeometry, R_active: int) -> NetworkGeometry:
    """Restrict a geometry built with R=8 to the standard IRS subsets:
    {1, 5} for R_active=2, the odd-numbered IRSs for R_active=4."""
    if R_active not in _SUBSETS:
        raise ConfigError(f"unsupported R_active={R_active}, must be 2, 4 or 8")
    if geometry.R != 8:
        raise ConfigError("irs_subset expects a geometry built with R=8")
    idx = list(_SUBSETS[R_active])
    return replace(
        geometry,
        irs_positions=geometry.irs_positions[idx],
        irs_normals=geometry.irs_normals[idx],
        blockage=geometry.blockage[:, idx],
    )


def path_loss(xi0_db: float, alpha: float, d_link) -> float:
    """Linear path-loss gain xi0 * d_link^(-alpha); d_link is the 3-D
    link distance in meters."""
    d_link = np.asarray(d_link, dtype=float)
    if np.any(d_link <= 0):
        raise ValueError("link distance must be positive")
    out = db_to_linear(xi0_db) * d_link ** (-alpha)
    return out if out.ndim else float(out)
