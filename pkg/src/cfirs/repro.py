"""Derived-values ledger: every hand- or oracle-computed expected value
frozen in the test suite is also recorded in a versioned JSON ledger
together with the command that regenerates it.  ``regenerate_derived_values``
re-runs each oracle and diffs against the ledger."""

from __future__ import annotations

import datetime
import json
from pathlib import Path

import numpy as np

LEDGER_PATH = Path(__file__).resolve().parents[2] / "docs" / "derived_values.json"


def _as_jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _pl(xi0, alpha, dist):
    from .geometry import path_loss
    return path_loss(xi0, alpha, dist)


def _steering_endfire():
    from .channel import steering_ula
    v = steering_ula(2, np.pi / 2, 0.5)
    return [v[0].real, v[0].imag, v[1].real, v[1].imag]


def _allocate_two_rows():
    from .active import PowerEstimate, allocate_power
    est = PowerEstimate(E=np.array([[0.25, 0.25], [0.5, 0.5]]), T=1)
    return allocate_power(est, 1.0).p


def _sdp_offdiag():
    # n=2, K=1, Psi = [[0, 1/2], [1/2, 0]]: optimum Theta = all-ones, obj 1
    from .sdp import MaxMinSdpProblem, solve
    prob = MaxMinSdpProblem([np.array([[0, 0.5], [0.5, 0]], complex)], [0.0])
    return solve(prob, method="splitting").objective

def _zf_k1():
    from .active import zf_precoder
    rng = np.random.default_rng(7)
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    W = zf_precoder(h[:, None], M=3).W[:, 0]
    return float(np.abs(W - h / np.linalg.norm(h) ** 2).max())


def _irs1_position():
    from .config import ScenarioConfig
    from .geometry import place_nodes
    geom = place_nodes(ScenarioConfig(R=8), 0)
    return geom.irs_positions[0].tolist()


def _ap1_blocked_set():
    from .config import ScenarioConfig
    from .geometry import place_nodes
    geom = place_nodes(ScenarioConfig(R=8), 0)
    return sorted(int(r) + 1 for r in np.nonzero(geom.blockage[0])[0])


def _toy_grid_optimum():
    from .gain import QuadraticForm
    from .oracle import grid_search
    rng = np.random.default_rng(0)
    forms = []
    for _ in range(2):
        X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        A = X @ X.conj().T / 4.0
        b = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 0.2
        forms.append(QuadraticForm(A=A, b=b, c=1.0))
    return grid_search(forms, levels=16).value


def _mean_power_ratio():
    # sample mean of ||d||^2 over draws vs M * xi (LoS + NLoS decomposition)
    from .channel import build_statistics, draw_realization
    from .config import ScenarioConfig
    from .geometry import place_nodes
    cfg = ScenarioConfig(L=2, R=2, K=2, M=2, N=4)
    stats = build_statistics(cfg, place_nodes(cfg, 1))
    rng = np.random.default_rng(5)
    acc = 0.0
    T = 100_000
    for _ in range(T):
        real = draw_realization(stats, rng)
        acc += np.abs(real.d[0, 0]) ** 2 / T
    return float(np.sum(acc) / (cfg.M * stats.xi_d[0, 0]))


REGISTRY = {
    "path_loss_100m_alpha2.2": {
        "fn": lambda: _pl(-30.0, 2.2, 100.0),
        "tolerance": 1e-12,
        "command": "cfirs.geometry.path_loss(-30, 2.2, 100)",
    },
    "path_loss_10m_alpha3.4": {
        "fn": lambda: _pl(-30.0, 3.4, 10.0),
        "tolerance": 1e-12,
        "command": "cfirs.geometry.path_loss(-30, 3.4, 10)",
    },
    "steering_ula_M2_endfire": {
        "fn": _steering_endfire,
        "tolerance": 1e-12,
        "command": "cfirs.channel.steering_ula(2, pi/2, 0.5)",
    },
    "allocate_power_rows_0.5_1.0": {
        "fn": _allocate_two_rows,
        "tolerance": 1e-12,
        "command": "allocate_power(E=[[.25,.25],[.5,.5]], P_bar=1)",
    },
    "sdp_n2_offdiag_optimum": {
        "fn": _sdp_offdiag,
        "tolerance": 1e-4,
        "command": "sdp.solve(K=1, Psi=[[0,1/2],[1/2,0]], c=0)",
    },
    "zf_single_ue_matched_filter_error": {
        "fn": _zf_k1,
        "tolerance": 1e-9,
        "command": "zf_precoder(h) vs h/||h||^2 at seed 7",
    },
    "irs1_position_default_geometry": {
        "fn": _irs1_position,
        "tolerance": 1e-9,
        "command": "place_nodes(ScenarioConfig(R=8), 0).irs_positions[0]",
    },
    "ap1_blocked_irs_set": {
        "fn": _ap1_blocked_set,
        "tolerance": 0,
        "command": "place_nodes(ScenarioConfig(R=8), 0).blockage[0]",
    },
    "toy_grid_optimum_seed0": {
        "fn": _toy_grid_optimum,
        "tolerance": 1e-9,
        "command": "oracle.grid_search(seeded 4-element instance, 16 levels)",
    },
    "link_power_decomposition_ratio": {
        "fn": _mean_power_ratio,
        "tolerance": 0.01,
        "command": "mean ||d||^2 / (M xi_d) over 1e5 draws, seed 5",
    },
}


def generate_ledger(path=LEDGER_PATH) -> dict:
    records = {}
    for ident, spec in REGISTRY.items():
        records[ident] = {
            "command": spec["command"],
            "value": _as_jsonable(spec["fn"]()),
            "tolerance": spec["tolerance"],
            "date": datetime.date.today().isoformat(),
        }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
    return records


def _mismatch(expected, actual, tolerance) -> bool:
    exp = np.asarray(expected, dtype=float)
    act = np.asarray(actual, dtype=float)
    if exp.shape != act.shape:
        return True
    return bool(np.any(np.abs(exp - act) > tolerance))


def regenerate_derived_values(path=LEDGER_PATH) -> list[dict]:
    """Recompute every ledger entry and report pass/fail per record."""
    with open(path) as fh:
        records = json.load(fh)
    report = []
    for ident, spec in REGISTRY.items():
        entry = {"id": ident, "command": spec["command"]}
        if ident not in records:
            entry.update(status="missing-from-ledger")
            report.append(entry)
            continue
        actual = _as_jsonable(spec["fn"]())
        expected = records[ident]["value"]
        tol = records[ident]["tolerance"]
        ok = not _mismatch(expected, actual, tol)
        entry.update(status="pass" if ok else "fail",
                     expected=expected, actual=actual, tolerance=tol)
        report.append(entry)
    for ident in records:
        if ident not in REGISTRY:
            report.append({"id": ident, "status": "unknown-record"})
    return report
