"""Shared fixtures and independent Monte Carlo helpers for the test suite."""

import numpy as np
import pytest

from cfirs.channel import build_statistics
from cfirs.config import ScenarioConfig
from cfirs.gain import QuadraticForm, build_all_forms
from cfirs.geometry import place_nodes


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_cfg():
    return ScenarioConfig(L=2, R=2, K=2, M=2, N=4)


@pytest.fixture(scope="session")
def small_stats(small_cfg):
    return build_statistics(small_cfg, place_nodes(small_cfg, 7))


@pytest.fixture(scope="session")
def small_forms(small_stats):
    return build_all_forms(small_stats)


def random_forms(rng, n, K, c=1.0):
    """Synthetic max-min instances: random PSD quadratics with offsets."""
    forms = []
    for _ in range(K):
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = X @ X.conj().T / n
        b = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.3
        forms.append(QuadraticForm(A=A, b=b, c=c))
    return forms


def mc_average_gain(stats, theta, draws, rng, chunk=20000):
    """Batched Monte Carlo estimate of sum_l E{||h_{l,k}||^2} per UE.

    Deliberately independent of ``draw_realization``/``assemble_overall``:
    the batched LoS + NLoS synthesis and the channel assembly are written
    from scratch so this can serve as an oracle for the closed form.
    """
    L, R, K, M, N = stats.L, stats.R, stats.K, stats.M, stats.N
    n = R * N
    theta = np.asarray(theta)
    G_mask = ~(stats.blockage | stats.v_blocked[None, :])  # (L, R)
    v_mask = ~stats.v_blocked                              # (R,)
    sd = np.sqrt(stats.xi_d / (1.0 + stats.beta_d))        # (L, K)
    sG = np.sqrt(stats.xi_G / (1.0 + stats.beta_G))        # (L, R)
    sv = np.sqrt(stats.xi_v / (1.0 + stats.beta_v))        # (R, K)

    def cn(shape):
        return (rng.standard_normal(shape)
                + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    acc = np.zeros(K)
    left = draws
    while left > 0:
        t = min(chunk, left)
        left -= t
        d = stats.d_bar[None] + sd[None, :, :, None] * cn((t, L, K, M))
        G = stats.G_bar[None] + sG[None, :, :, None, None] * cn((t, L, R, N, M))
        G *= G_mask[None, :, :, None, None]
        v = stats.v_bar[None] + sv[None, :, :, None] * cn((t, R, K, N))
        v *= v_mask[None, :, None, None]
        # h[t, l, k, :] = G_l^H (v_k * theta) + d
        Gs = G.reshape(t, L, n, M)
        vs = v.transpose(0, 2, 1, 3).reshape(t, K, n)
        w = vs * theta[None, None, :]
        h = np.einsum("tlnm,tkn->tlkm", Gs.conj(), w) + d
        acc += np.sum(np.abs(h) ** 2, axis=(1, 3)).sum(axis=0)
    return acc / draws
