"""Secret-key rate of entanglement-based BB84 over dispersive fiber links
without a shared time reference, and the settings that maximize secure distance."""

__version__ = "0.1.0"

from .devices import DEFAULT_CATALOG, DispersiveDevice, device_locus, dispersion_to_delay
from .optimize import (
    DistanceSearch,
    Scenario,
    ScanSpec,
    SweepGrid,
    max_secure_distance,
    optimal_alice_length,
    optimize_window,
    sweep,
)
from .physics import (
    FiberLink,
    SourceParams,
    biphoton_intensity,
    channel_transmittance,
    dimensionless_dispersion,
    g_factor,
    heralded_width,
    heralded_width_quadrature,
)
from .security import (
    ClickStats,
    DetectorParams,
    KeyRateResult,
    acceptance_probability,
    binary_entropy,
    click_probabilities,
    key_rate,
    qber,
)

__all__ = [
    "DEFAULT_CATALOG",
    "ClickStats",
    "DetectorParams",
    "DispersiveDevice",
    "DistanceSearch",
    "FiberLink",
    "KeyRateResult",
    "Scenario",
    "ScanSpec",
    "SourceParams",
    "SweepGrid",
    "acceptance_probability",
    "binary_entropy",
    "biphoton_intensity",
    "channel_transmittance",
    "click_probabilities",
    "device_locus",
    "dimensionless_dispersion",
    "dispersion_to_delay",
    "g_factor",
    "heralded_width",
    "heralded_width_quadrature",
    "key_rate",
    "max_secure_distance",
    "optimal_alice_length",
    "optimize_window",
    "qber",
    "sweep",
]
