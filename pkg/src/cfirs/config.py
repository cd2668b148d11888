"""Scenario configuration: geometry sizes, power budgets, fading constants.

A ``ScenarioConfig`` is the single source of truth for one experiment.  All
distances are in meters, powers in dBm, gains in dB; linear-scale versions
are exposed through properties.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised when a configuration violates the scenario invariants."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Network sizes, hotspot geometry and channel constants.

    Defaults reproduce the baseline hotspot deployment: 4 corner APs with
    8 antennas each, IRSs on a 30 m circle around the hotspot center
    (40, 40), 4 single-antenna UEs inside the circle.
    """

    L: int = 4              # number of APs
    R: int = 4              # number of IRSs
    K: int = 4              # number of UEs
    M: int = 8              # antennas per AP
    N: int = 64             # elements per IRS
    D: float = 300.0        # service-area side length [m]
    d: float = 40.0         # hotspot center coordinate (d, d) [m]
    r_hotspot: float = 30.0  # hotspot radius [m]
    P_bar_dbm: float = 20.0  # per-AP max transmit power [dBm]
    sigma2_dbm: float = -97.0  # noise power [dBm]
    xi0_db: float = -30.0   # path loss at 1 m reference distance [dB]
    alpha_d: float = 3.4    # AP-UE path-loss exponent
    alpha_G: float = 2.2    # AP-IRS path-loss exponent
    alpha_v: float = 2.2    # IRS-UE path-loss exponent
    beta_d_db: float = -5.0  # AP-UE Rician factor [dB]
    beta_G_db: float = 5.0  # AP-IRS Rician factor [dB]
    beta_v_db: float = 5.0  # IRS-UE Rician factor [dB]
    ap_height: float = 10.0
    irs_height: float = 5.0
    ue_height: float = 1.5
    spacing: float = 0.5    # antenna/element spacing [wavelengths]
    # Azimuth of IRS index 1 on the hotspot circle, measured ccw from east.
    # 5*pi/4 points at the first AP (origin corner); this is the unique
    # choice under which the first AP is blocked toward IRSs {1, 2, 8}.
    irs_start_angle: float = 3.9269908169872414  # 5*pi/4

    def __post_init__(self):
        if min(self.L, self.R, self.K, self.M, self.N) < 1:
            raise ConfigError("all counts (L, R, K, M, N) must be positive")
        if self.L * self.M < self.K:
            raise ConfigError(
                f"ZF needs L*M >= K, got L*M={self.L * self.M} < K={self.K}")
        if not (0 < self.r_hotspot < self.d):
            raise ConfigError("need 0 < r_hotspot < d")
        if self.d + self.r_hotspot > self.D:
            raise ConfigError("hotspot circle must fit inside the area: d + r <= D")
        for name in ("D", "ap_height", "irs_height", "ue_height", "spacing"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    # -- linear-scale accessors -------------------------------------------
    @property
    def P_bar_watts(self) -> float:
        return dbm_to_watts(self.P_bar_dbm)

    @property
    def sigma2_watts(self) -> float:
        return dbm_to_watts(self.sigma2_dbm)

    @property
    def beta_d(self) -> float:
        return db_to_linear(self.beta_d_db)

    @property
    def beta_G(self) -> float:
        return db_to_linear(self.beta_G_db)

    @property
    def beta_v(self) -> float:
        return db_to_linear(self.beta_v_db)

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        """Stable hash of the full configuration, for result metadata."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"L", "R", "K", "M", "N"}


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, val in tree.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            flat.update(_flatten(val, f"{name}."))
        else:
            flat[name] = val
    return flat


def config_from_dict(tree: dict) -> ScenarioConfig:
    """Build a config from a (possibly nested) dict; unknown keys rejected.

    Nested sections are allowed purely for file organization; the leaf key
    must match a ``ScenarioConfig`` field name.
    """
    kwargs = {}
    for dotted, val in _flatten(tree).items():
        leaf = dotted.rsplit(".", 1)[-1]
        if leaf not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key: {dotted!r}")
        if leaf in kwargs:
            raise ConfigError(f"duplicate configuration key: {leaf!r}")
        kwargs[leaf] = coerce_value(leaf, val)
    return ScenarioConfig(**kwargs)


def coerce_value(name: str, val) -> float | int:
    """Type-check one config value against the schema."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key: {name!r}")
    if isinstance(val, bool):
        raise ConfigError(f"{name}: boolean is not a valid value")
    if name in _INT_FIELDS:
        if isinstance(val, str):
            try:
                val = int(val)
            except ValueError:
                raise ConfigError(f"{name}: expected an integer, got {val!r}")
        if not isinstance(val, int):
            raise ConfigError(f"{name}: expected an integer, got {val!r}")
        return val
    if isinstance(val, str):
        try:
            val = float(val)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {val!r}")
    if not isinstance(val, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {val!r}")
    return float(val)


def load_config(path) -> ScenarioConfig:
    """Load a ScenarioConfig from a TOML file."""
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(tree)
