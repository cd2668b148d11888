"""Passive beamformer design: lift the per-UE average-gain quadratic forms
into the unit-diagonal max-min SDP, solve it, and extract a feasible
unit-modulus phase vector by principal eigenvector or Gaussian
randomization followed by phase-only recovery."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .gain import QuadraticForm
from .linalg import hermitian_eig, sample_gaussian
from .sdp import MaxMinSdpProblem, PsiStructure, SdpSolution


@dataclass(frozen=True)
class PassiveBeamformer:
    """Stacked unit-modulus phase vector (theta = Theta^H 1 convention)."""

    theta: np.ndarray  # (R*N,) complex, |theta_i| = 1

    def __post_init__(self):
        dev = np.abs(np.abs(self.theta) - 1.0).max() if self.theta.size else 0.0
        if dev > 1e-9:
            raise ValueError(f"theta entries must be unit-modulus (dev {dev:.2e})")

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    def phases(self) -> np.ndarray:
        return np.angle(self.theta)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"phases": self.phases().tolist()}, fh)

    @classmethod
    def load(cls, path) -> "PassiveBeamformer":
        with open(path) as fh:
            phases = np.asarray(json.load(fh)["phases"], dtype=float)
        return cls(theta=np.exp(1j * phases))


def build_p2(forms: list[QuadraticForm]) -> MaxMinSdpProblem:
    """Lifted SDP: Psi_k = [[A_k, b_k], [b_k^H, 0]], c_k offsets.

    Psi_k is Hermitian but in general indefinite when b_k != 0; the SDP
    does not require Psi_k PSD, so no PSD repair is attempted.
    """
    if not forms:
        raise ValueError("need at least one quadratic form")
    m = forms[0].n
    Psis, structs, cs = [], [], []
    for qf in forms:
        if qf.n != m:
            raise ValueError("quadratic forms have inconsistent dimensions")
        P = np.zeros((m + 1, m + 1), complex)
        P[:m, :m] = qf.A
        P[:m, m] = qf.b
        P[m, :m] = qf.b.conj()
        Psis.append(P)
        cs.append(qf.c)
        if structs is not None and qf.diag_part is not None:
            structs.append(PsiStructure(diag=qf.diag_part, factor=qf.factor,
                                        border=qf.b))
        else:
            # structure is all-or-nothing; fall back to dense matrices
            structs = None
    return MaxMinSdpProblem(Psis, cs, structure=structs)


def min_gain(forms: list[QuadraticForm], theta: np.ndarray) -> float:
    """min_k of the average-gain quadratic at a given phase vector."""
    return min(qf.value(theta) for qf in forms)


def _recover(theta_bar: np.ndarray, m: int) -> np.ndarray:
    """Phase-only recovery theta = exp(j*angle(theta_bar[:m] / last)).

    Falls back to aligning against the largest-magnitude entry when the
    last coordinate is numerically zero."""
    last = theta_bar[m]
    if np.abs(last) < 1e-12 * max(np.abs(theta_bar).max(), 1e-300):
        ref = theta_bar[np.argmax(np.abs(theta_bar))]
        last = ref / np.abs(ref)
    return np.exp(1j * np.angle(theta_bar[:m] / last))


RANK_ONE_RATIO = 1e-6
DEFAULT_RANDOMIZATIONS = 200


def extract_theta(solution: SdpSolution, forms: list[QuadraticForm],
                  num_randomizations: int = DEFAULT_RANDOMIZATIONS,
                  rng: np.random.Generator | None = None) -> PassiveBeamformer:
    """Feasible unit-modulus phases from a (possibly high-rank) SDP iterate.

    A numerically rank-one Theta_bar yields its principal eigenvector
    directly.  Otherwise the principal eigenvector plus
    ``num_randomizations`` Gaussian candidates drawn with covariance
    Theta_bar are pushed through phase recovery and scored by the max-min
    objective; the best candidate wins, ties broken by lowest index."""
    m = forms[0].n
    Theta = solution.Theta_bar
    if Theta.shape != (m + 1, m + 1):
        raise ValueError("solution dimension does not match the forms")
    eig = hermitian_eig(Theta)
    lam = eig.eigenvalues
    principal = eig.eigenvectors[:, -1]
    if lam[-1] <= 0:
        raise ValueError("SDP iterate has no positive eigenvalue")
    if lam[-2] / lam[-1] < RANK_ONE_RATIO:
        return PassiveBeamformer(theta=_recover(principal, m))

    if rng is None:
        rng = np.random.default_rng(0)
    candidates = [_recover(principal, m)]
    if num_randomizations > 0:
        draws = sample_gaussian(Theta, rng, size=num_randomizations)
        candidates.extend(_recover(x, m) for x in draws)
    scores = [min_gain(forms, th) for th in candidates]
    best = int(np.argmax(scores))  # argmax takes the first max: lowest index
    return PassiveBeamformer(theta=candidates[best])


def random_theta(length: int, rng: np.random.Generator) -> PassiveBeamformer:
    """i.i.d. uniform phases on [0, 2*pi) — the random-passive benchmark."""
    phases = rng.uniform(0.0, 2.0 * np.pi, size=length)
    return PassiveBeamformer(theta=np.exp(1j * phases))
