"""Dispersive elements for Alice's arm and their (dispersion, loss) loci."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import yaml

from .optimize import ScanSpec, alice_link, optimize_window
from .physics import FiberLink, SourceParams
from .security import DetectorParams

SPEED_OF_LIGHT = 299_792_458.0  # m/s

KINDS = ("continuous-fiber", "discrete-module")


@dataclass(frozen=True)
class DispersiveDevice:
    """A fiber (per-km parameters) or a discrete module (per-unit parameters).

    ``beta`` is signed relative to Bob's fiber: positive means the same sign
    as the dispersion of Bob's link. ``assumed`` marks catalog values that are
    stand-ins rather than measured data.
    """

    name: str
    kind: str
    alpha: float
    beta: float
    assumed: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"device {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")
        if not self.alpha >= 0:
            raise ValueError(f"device {self.name!r}: alpha must be >= 0, got {self.alpha!r}")
        if not math.isfinite(self.beta):
            raise ValueError(f"device {self.name!r}: beta must be finite, got {self.beta!r}")


DEFAULT_CATALOG = (
    DispersiveDevice("SMF", "continuous-fiber", 0.2, 1.15e-23, assumed=False),
    DispersiveDevice("high-dispersion fiber", "continuous-fiber", 0.5, 1.15e-22, assumed=True),
    DispersiveDevice("dispersion module", "discrete-module", 4.0, 1.27e-21, assumed=True),
)


def device_locus(dev: DispersiveDevice, amounts: Iterable[float]) -> list[tuple[float, float]]:
    """(dispersion in s^2, loss in dB) for each fiber length in km or module count."""
    points = []
    for amount in amounts:
        if amount < 0:
            raise ValueError(f"device {dev.name!r}: amount must be >= 0, got {amount!r}")
        if dev.kind == "discrete-module" and int(amount) != amount:
            raise ValueError(f"device {dev.name!r}: module count must be an integer, got {amount!r}")
        points.append((dev.beta * amount, dev.alpha * amount))
    return points


def dispersion_to_delay(beta_l: float, wavelength: float) -> float:
    """Accumulated dispersion (s^2) to group-delay spread per wavelength (s/m).

    Multiply by 1e3 to get ps/nm.
    """
    if not wavelength > 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength!r}")
    return 2.0 * math.pi * SPEED_OF_LIGHT / wavelength**2 * abs(beta_l)


def locus_key_rates(
    dev: DispersiveDevice,
    amounts: Iterable[float],
    source: SourceParams,
    link_b: FiberLink,
    det: DetectorParams,
    spec: ScanSpec | None = None,
) -> list[tuple[float, float, float]]:
    """Optimized key rate along a device locus as (dispersion, loss, K) triples."""
    rows = []
    for dispersion, loss in device_locus(dev, amounts):
        res = optimize_window(source, alice_link(dispersion, loss, link_b), link_b, det, spec)
        rows.append((dispersion, loss, res.key_rate))
    return rows


def load_catalog(path: str | Path) -> tuple[DispersiveDevice, ...]:
    """Read a YAML catalog: a top-level ``devices`` list of name/kind/alpha/beta records."""
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or set(doc) != {"devices"} or not isinstance(doc["devices"], list):
        raise ValueError(f"{path}: catalog must be a mapping with a single 'devices' list")
    devices = []
    allowed = {"name", "kind", "alpha", "beta", "assumed"}
    for i, rec in enumerate(doc["devices"]):
        if not isinstance(rec, dict):
            raise ValueError(f"{path}: devices[{i}] must be a mapping")
        unknown = set(rec) - allowed
        if unknown:
            raise ValueError(f"{path}: devices[{i}]: unknown key(s) {sorted(unknown)}")
        missing = {"name", "kind", "alpha", "beta"} - set(rec)
        if missing:
            raise ValueError(f"{path}: devices[{i}]: missing key(s) {sorted(missing)}")
        devices.append(
            DispersiveDevice(
                name=str(rec["name"]),
                kind=str(rec["kind"]),
                alpha=float(rec["alpha"]),
                beta=float(rec["beta"]),
                assumed=bool(rec.get("assumed", False)),
            )
        )
    return tuple(devices)


def catalog_metadata(devices: Iterable[DispersiveDevice]) -> list[dict]:
    return [asdict(d) for d in devices]
