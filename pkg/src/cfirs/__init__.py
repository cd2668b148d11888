"""Max-min achievable-rate simulation of IRS-assisted cell-free MIMO with
two-timescale beamforming: statistical-CSI passive beamforming via
semidefinite relaxation, short-term ZF precoding, and long-term max-min
power allocation."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config  # noqa: F401
from .geometry import NetworkGeometry, irs_subset, path_loss, place_nodes  # noqa: F401
