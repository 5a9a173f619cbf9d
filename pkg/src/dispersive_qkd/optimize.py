"""Window optimization, secure-distance search and parameter sweeps."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .physics import FiberLink, SourceParams, channel_transmittance, heralded_width
from .security import DetectorParams, KeyRateResult, _result_from_width, key_rate, key_rate_curve

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScanSpec:
    """Coarse log scan over the window factor followed by golden-section refinement."""

    xi_min: float = 1e-2
    xi_max: float = 1e2
    coarse_points: int = 200
    refine_tol: float = 1e-4

    def __post_init__(self) -> None:
        if not 0 < self.xi_min < self.xi_max:
            raise ValueError(f"need 0 < xi_min < xi_max, got {self.xi_min!r}, {self.xi_max!r}")
        if int(self.coarse_points) != self.coarse_points or self.coarse_points < 3:
            raise ValueError(f"coarse_points must be an integer >= 3, got {self.coarse_points!r}")
        if not self.refine_tol > 0:
            raise ValueError(f"refine_tol must be > 0, got {self.refine_tol!r}")


@dataclass(frozen=True)
class DistanceSearch:
    """Upward stepping in Bob's length, then bisection on the last bracket (all km)."""

    lb_hi: float = 400.0
    step: float = 5.0
    tol: float = 0.1

    def __post_init__(self) -> None:
        if not self.lb_hi > 0:
            raise ValueError(f"lb_hi must be > 0, got {self.lb_hi!r}")
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol!r}")


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _optimize_from_width(tau_h, t_a, t_b, det, rep_rate, spec: ScanSpec) -> KeyRateResult:
    xs = np.geomspace(spec.xi_min, spec.xi_max, int(spec.coarse_points))
    values = key_rate_curve(tau_h, t_a, t_b, det, rep_rate, xs)
    # ties (e.g. a saturated acceptance without noise) go to the wider window
    i = len(xs) - 1 - int(np.argmax(values[::-1]))
    best_xi, best_val = float(xs[i]), float(values[i])
    if best_val > 0:

        def objective(xi: float) -> float:
            return float(key_rate_curve(tau_h, t_a, t_b, det, rep_rate, xi))

        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        xi_ref, val_ref = golden_section_max(objective, float(lo), float(hi), spec.refine_tol)
        if val_ref > best_val:
            best_xi = xi_ref
    return _result_from_width(tau_h, t_a, t_b, det, rep_rate, best_xi)


def optimize_window(
    source: SourceParams,
    link_a: FiberLink,
    link_b: FiberLink,
    det: DetectorParams,
    spec: ScanSpec | None = None,
) -> KeyRateResult:
    """Key rate at the window factor that maximizes it.

    When no window gives a positive rate the result has ``key_rate == 0`` and
    ``xi`` at the coarse-scan maximum of the unclamped bound.
    """
    spec = spec or ScanSpec()
    tau_h = heralded_width(source, link_a, link_b)
    return _optimize_from_width(
        tau_h, channel_transmittance(link_a), channel_transmittance(link_b), det, source.rep_rate, spec
    )


def max_secure_distance(
    source: SourceParams,
    link_a: FiberLink,
    det: DetectorParams,
    spec: ScanSpec | None = None,
    search: DistanceSearch | None = None,
    bob_fiber: FiberLink | None = None,
    xi: float | None = None,
) -> float:
    """Largest length of Bob's fiber (km) with a positive optimized key rate.

    ``bob_fiber`` supplies attenuation and dispersion; its length is ignored.
    Passing ``xi`` holds the window factor fixed instead of optimizing it.
    Returns 0 when even a zero-length link gives no key, and ``search.lb_hi``
    when the rate stays positive up to the ceiling.
    """
    spec = spec or ScanSpec()
    search = search or DistanceSearch()
    bob_fiber = bob_fiber or FiberLink()

    def secure(length: float) -> bool:
        link_b = replace(bob_fiber, length=length)
        if xi is not None:
            return key_rate(source, link_a, link_b, det, xi).key_rate > 0
        return optimize_window(source, link_a, link_b, det, spec).key_rate > 0

    if not secure(0.0):
        return 0.0
    lo = 0.0
    while lo < search.lb_hi:
        hi = min(lo + search.step, search.lb_hi)
        if not secure(hi):
            break
        lo = hi
    else:
        return search.lb_hi

    while hi - lo > search.tol:
        mid = 0.5 * (lo + hi)
        if secure(mid):
            lo = mid
        else:
            hi = mid
    return lo


def optimal_alice_length(
    source: SourceParams,
    alpha_a: float,
    beta_a: float,
    link_b: FiberLink,
    det: DetectorParams,
    spec: ScanSpec | None = None,
    la_grid: Sequence[float] = tuple(range(0, 201, 2)),
) -> tuple[float, float]:
    """Grid argmax of the optimized key rate over Alice's fiber length.

    Ties go to the shorter fiber.
    """
    if len(la_grid) == 0:
        raise ValueError("la_grid must not be empty")
    best_la, best_k = None, -1.0
    for la in la_grid:
        link_a = FiberLink(length=float(la), attenuation=alpha_a, beta=beta_a)
        k = optimize_window(source, link_a, link_b, det, spec).key_rate
        if k > best_k:
            best_la, best_k = float(la), k
    return best_la, best_k


def best_alice_length_for_distance(
    source: SourceParams,
    alpha_a: float,
    beta_a: float,
    det: DetectorParams,
    la_grid: Sequence[float],
    spec: ScanSpec | None = None,
    search: DistanceSearch | None = None,
    bob_fiber: FiberLink | None = None,
) -> tuple[float, float]:
    """Alice's fiber length on ``la_grid`` that maximizes Bob's secure distance.

    Returns ``(L_A, max L_B)``; ties go to the shorter fiber.
    """
    best = (None, -1.0)
    for la in la_grid:
        link_a = FiberLink(length=float(la), attenuation=alpha_a, beta=beta_a)
        dist = max_secure_distance(source, link_a, det, spec, search, bob_fiber)
        if dist > best[1]:
            best = (float(la), dist)
    return best


# ---------------------------------------------------------------- sweeps

AXIS_NAMES = ("L_A", "L_B", "rho", "beta_A", "loss_A", "dispersion_A", "e", "xi")
MODES = ("optimized", "fixed")
RESULT_COLUMNS = ("tau_h", "xi", "window", "p_exp", "qber", "key_rate", "flags", "error")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one configuration."""

    source: SourceParams = field(default_factory=SourceParams)
    link_a: FiberLink = field(default_factory=lambda: FiberLink(length=1.0))
    link_b: FiberLink = field(default_factory=lambda: FiberLink(length=100.0))
    detector: DetectorParams = field(default_factory=DetectorParams)
    scan: ScanSpec = field(default_factory=ScanSpec)


@dataclass(frozen=True)
class SweepGrid:
    """Named axes evaluated as a full Cartesian product in lexicographic order.

    With no axes the grid is the single base point.

    ``loss_A`` (dB) and ``dispersion_A`` (s^2) replace Alice's fiber by a lumped
    element. ``dispersion_A`` is measured relative to Bob's fiber: positive
    values have the same sign as Bob's ``beta``.
    """

    axes: dict[str, tuple[float, ...]]
    mode: str = "optimized"
    xi: float = 6.0

    def __post_init__(self) -> None:
        axes = {}
        for name, values in self.axes.items():
            if name not in AXIS_NAMES:
                raise ValueError(f"grid.axes.{name}: unknown axis (allowed: {', '.join(AXIS_NAMES)})")
            values = tuple(float(v) for v in values)
            if not values:
                raise ValueError(f"grid.axes.{name}: axis is empty")
            diffs = np.diff(values)
            if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValueError(f"grid.axes.{name}: values must be strictly monotone")
            axes[name] = values
        object.__setattr__(self, "axes", axes)
        if self.mode not in MODES:
            raise ValueError(f"grid.mode: must be one of {MODES}, got {self.mode!r}")
        if "xi" in self.axes and self.mode != "fixed":
            raise ValueError("grid.axes.xi: an xi axis requires mode 'fixed'")
        if "L_A" in self.axes and ({"loss_A", "dispersion_A"} & self.axes.keys()):
            raise ValueError("grid.axes: L_A cannot be combined with loss_A/dispersion_A")
        if not self.xi > 0:
            raise ValueError(f"grid.xi must be > 0, got {self.xi!r}")

    def points(self) -> list[dict[str, float]]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]


def _relative_sign(bob: FiberLink) -> float:
    return -1.0 if bob.beta < 0 else 1.0


def alice_link(dispersion: float, loss: float, bob: FiberLink) -> FiberLink:
    """Lumped Alice arm; ``dispersion`` is taken relative to Bob's dispersion sign."""
    return FiberLink.lumped(_relative_sign(bob) * dispersion, loss)


def scenario_at(base: Scenario, point: dict[str, float]) -> tuple[Scenario, float | None]:
    """Apply one grid point to ``base``; returns the scenario and any fixed xi."""
    source, link_a, link_b, det = base.source, base.link_a, base.link_b, base.detector
    if "rho" in point:
        source = replace(source, rho=point["rho"])
    if "L_B" in point:
        link_b = replace(link_b, length=point["L_B"])
    if "L_A" in point:
        link_a = replace(link_a, length=point["L_A"])
    if "beta_A" in point:
        link_a = replace(link_a, beta=point["beta_A"])
    if "e" in point:
        det = replace(det, misalignment=point["e"])
    if "loss_A" in point or "dispersion_A" in point:
        dispersion = point.get("dispersion_A", _relative_sign(link_b) * link_a.dispersion)
        loss = point.get("loss_A", link_a.loss)
        link_a = alice_link(dispersion, loss, link_b)
    return Scenario(source, link_a, link_b, det, base.scan), point.get("xi")


def evaluate_point(grid: SweepGrid, base: Scenario, point: dict[str, float]) -> dict:
    row: dict = dict(point)
    try:
        sc, xi = scenario_at(base, point)
        if grid.mode == "fixed":
            res = key_rate(sc.source, sc.link_a, sc.link_b, sc.detector, grid.xi if xi is None else xi)
        else:
            res = optimize_window(sc.source, sc.link_a, sc.link_b, sc.detector, sc.scan)
    except (ValueError, ArithmeticError) as exc:
        row.update({c: math.nan for c in RESULT_COLUMNS[:-2]})
        row.update(flags="", error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(
        tau_h=res.tau_h,
        xi=res.xi,
        window=res.window,
        p_exp=res.stats.p_exp,
        qber=res.qber,
        key_rate=res.key_rate,
        flags=";".join(res.flags),
        error="",
    )
    return row


def ordered_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep(grid: SweepGrid, base: Scenario, workers: int = 1) -> list[dict]:
    """Evaluate every grid point; rows come back in lexicographic grid order."""
    return ordered_map(lambda point: evaluate_point(grid, base, point), grid.points(), workers)
