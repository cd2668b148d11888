"""Monte Carlo orchestration: run the two-timescale pipeline over UE drops,
compare schemes under paired seeding, and aggregate min-rate statistics.

Seed discipline: the campaign seed feeds a ``numpy.random.SeedSequence``;
each drop spawns a child, and every drop splits into four independent
sub-streams (UE placement, power estimation, evaluation, randomization).
Schemes within a drop share the same sub-streams, and channel draws always
consume the same number of variates regardless of scheme, so NLoS draws
and UE positions are identical across schemes — only the passive
beamformer differs."""

from __future__ import annotations

import concurrent.futures
import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import active, passive, sdp
from .channel import build_statistics
from .config import ScenarioConfig
from .gain import build_all_forms
from .geometry import place_nodes

SCHEMES = ("proposed", "no-irs", "random-passive")

DEFAULT_REALIZATIONS = 200
DEFAULT_DROPS = 200
CAMPAIGN_SDP_GAP = 1e-3  # plenty for rate statistics; tighten via argument


class CampaignError(RuntimeError):
    pass


@dataclass(frozen=True)
class DropSeeds:
    """The four per-drop sub-streams."""

    placement: np.random.SeedSequence
    estimation: np.random.SeedSequence
    evaluation: np.random.SeedSequence
    randomization: np.random.SeedSequence

    @classmethod
    def from_sequence(cls, drop_ss: np.random.SeedSequence) -> "DropSeeds":
        children = drop_ss.spawn(4)
        return cls(*children)

    @classmethod
    def for_drop(cls, campaign_seed: int, drop_index: int) -> "DropSeeds":
        root = np.random.SeedSequence(campaign_seed)
        return cls.from_sequence(root.spawn(drop_index + 1)[drop_index])


@dataclass(frozen=True)
class DropResult:
    min_rate: float
    p_opt: float
    binding_ap: int
    theta_phases: np.ndarray | None
    sdp_status: str | None


def run_drop(config: ScenarioConfig, geometry, scheme: str, seeds: DropSeeds,
             T: int = DEFAULT_REALIZATIONS,
             num_randomizations: int = passive.DEFAULT_RANDOMIZATIONS,
             sdp_gap: float = CAMPAIGN_SDP_GAP,
             sdp_method: str = "auto") -> DropResult:
    """One UE drop under one scheme: statistics -> passive beamformer ->
    precoder-power estimate -> power allocation -> min rate."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    stats = build_statistics(config, geometry)
    rn = config.R * config.N
    sdp_status = None

    if scheme == "no-irs":
        stats = stats.without_reflections()
        beam = passive.PassiveBeamformer(theta=np.ones(rn, complex))
    elif scheme == "random-passive":
        rng = np.random.default_rng(seeds.randomization)
        beam = passive.random_theta(rn, rng)
    else:
        forms = build_all_forms(stats)
        problem = passive.build_p2(forms)
        solution = sdp.solve(problem,
                             tolerances=sdp.SdpTolerances(gap=sdp_gap),
                             method=sdp_method)
        sdp_status = solution.status
        rng = np.random.default_rng(seeds.randomization)
        beam = passive.extract_theta(solution, forms, num_randomizations, rng)

    est_rng = np.random.default_rng(seeds.estimation)
    estimate = active.estimate_precoder_power(stats, beam.theta, T, est_rng)
    alloc = active.allocate_power(estimate, config.P_bar_watts)
    rate = active.min_rate(alloc, config.sigma2_watts)
    return DropResult(min_rate=rate, p_opt=alloc.p, binding_ap=alloc.binding_ap,
                      theta_phases=None if scheme == "no-irs" else beam.phases(),
                      sdp_status=sdp_status)


@dataclass
class SimulationResult:
    """Per-drop min rates plus CDF summaries for each scheme."""

    schemes: tuple
    per_drop_min_rate: dict          # scheme -> (drops,) float array
    cdf: dict                        # scheme -> (values, probabilities)
    medians: dict
    means: dict
    metadata: dict
    theta_phases: dict = field(default_factory=dict)  # scheme -> list per drop

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scheme", "drop", "min_rate"])
            for scheme in self.schemes:
                for i, rate in enumerate(self.per_drop_min_rate[scheme]):
                    writer.writerow([scheme, i, f"{rate:.17g}"])

    def summary(self) -> dict:
        return {
            "schemes": list(self.schemes),
            "medians": {s: float(v) for s, v in self.medians.items()},
            "means": {s: float(v) for s, v in self.means.items()},
            "metadata": self.metadata,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def _empirical_cdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = np.sort(values)
    probs = np.arange(1, len(v) + 1) / len(v)
    return v, probs


def _drop_task(args):
    (config, campaign_seed_ss, index, schemes, T, num_randomizations,
     sdp_gap) = args
    seeds = DropSeeds.from_sequence(campaign_seed_ss)
    geometry = place_nodes(config, seeds.placement)
    out = {}
    for scheme in schemes:
        out[scheme] = run_drop(config, geometry, scheme, seeds, T=T,
                               num_randomizations=num_randomizations,
                               sdp_gap=sdp_gap)
    return index, out


def run_campaign(config: ScenarioConfig, drops: int = DEFAULT_DROPS,
                 schemes=SCHEMES, seed: int = 0,
                 T: int = DEFAULT_REALIZATIONS,
                 num_randomizations: int = passive.DEFAULT_RANDOMIZATIONS,
                 sdp_gap: float = CAMPAIGN_SDP_GAP, jobs: int = 1,
                 keep_thetas: bool = False,
                 progress: bool = False) -> SimulationResult:
    """Iterate paired drops and aggregate per-scheme CDFs and summaries."""
    if drops < 1:
        raise ValueError("drops must be >= 1")
    schemes = tuple(schemes)
    for s in schemes:
        if s not in SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    root = np.random.SeedSequence(seed)
    drop_sequences = root.spawn(drops)
    tasks = [(config, drop_sequences[i], i, schemes, T, num_randomizations,
              sdp_gap) for i in range(drops)]

    results: dict[int, dict] = {}
    failures: list[tuple[int, str]] = []

    def record(index, outcome, error=None):
        if error is not None:
            failures.append((index, f"drop {index}: {error}"))
        else:
            results[index] = outcome
        if progress:
            done = len(results) + len(failures)
            if done % 10 == 0 or done == drops:
                print(f"  drops {done}/{drops}", flush=True)

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_drop_task, t): t[2] for t in tasks}
            for fut in concurrent.futures.as_completed(futures):
                idx = futures[fut]
                try:
                    record(*fut.result())
                except Exception as exc:  # noqa: BLE001 — recorded per drop
                    record(idx, None, error=exc)
    else:
        for t in tasks:
            try:
                record(*_drop_task(t))
            except Exception as exc:  # noqa: BLE001
                record(t[2], None, error=exc)

    if len(failures) > max(0, drops // 100):
        detail = "; ".join(msg for _, msg in failures[:5])
        raise CampaignError(
            f"{len(failures)}/{drops} drops failed (limit 1%): {detail}")

    ok = sorted(results)
    per_drop = {s: np.array([results[i][s].min_rate for i in ok])
                for s in schemes}
    sdp_statuses: dict[str, int] = {}
    if "proposed" in schemes:
        for i in ok:
            st = results[i]["proposed"].sdp_status
            if st:
                sdp_statuses[st] = sdp_statuses.get(st, 0) + 1
    metadata = {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "seed": seed,
        "drops": drops,
        "realizations": T,
        "num_randomizations": num_randomizations,
        "sdp_gap": sdp_gap,
        "failed_drops": [i for i, _ in failures],
        "sdp_statuses": sdp_statuses,
    }
    result = SimulationResult(
        schemes=schemes,
        per_drop_min_rate=per_drop,
        cdf={s: _empirical_cdf(v) for s, v in per_drop.items()},
        medians={s: float(np.median(v)) for s, v in per_drop.items()},
        means={s: float(np.mean(v)) for s, v in per_drop.items()},
        metadata=metadata,
    )
    if keep_thetas:
        result.theta_phases = {
            s: [results[i][s].theta_phases for i in ok]
            for s in schemes if s != "no-irs"}
    return result


SWEEP_AXES = ("N", "M", "R", "d", "P_bar")


def sweep(config: ScenarioConfig, axis: str, values, drops: int = DEFAULT_DROPS,
          schemes=SCHEMES, seed: int = 0, **campaign_kwargs
          ) -> list[SimulationResult]:
    """Paired campaigns along one scenario axis (same seed per value)."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    field_name = {"P_bar": "P_bar_dbm"}.get(axis, axis)
    out = []
    for value in values:
        cfg = config.replace(**{field_name: value})
        res = run_campaign(cfg, drops=drops, schemes=schemes, seed=seed,
                           **campaign_kwargs)
        res.metadata["sweep_axis"] = axis
        res.metadata["sweep_value"] = value
        out.append(res)
    return out
