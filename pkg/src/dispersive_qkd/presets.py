"""Data tables behind each figure, plus the generic point/sweep/maxdist runs.

Every runner takes a :class:`RunConfig` and returns a list of tables
``(suffix, columns, rows)``; the first table has an empty suffix and goes to
the main output path.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Callable

import numpy as np

from .config import ConfigError, RunConfig
from .devices import DispersiveDevice, locus_key_rates
from .optimize import (
    RESULT_COLUMNS,
    Scenario,
    SweepGrid,
    evaluate_point,
    max_secure_distance,
    optimize_window,
    ordered_map,
    scenario_at,
    sweep,
)
from .security import key_rate

Table = tuple[str, list[str], list[dict]]

AXIS_COLUMNS = {
    "L_A": "L_A_km",
    "L_B": "L_B_km",
    "rho": "rho",
    "beta_A": "beta_A_s2_per_km",
    "loss_A": "loss_A_dB",
    "dispersion_A": "dispersion_A_s2",
    "e": "e",
    "xi": "xi",
}
FIG2_WINDOWS = (1.0, 3.0, 6.0, 12.0)
FIG3_BOB_LENGTHS = (190.0, 200.0, 205.0, 210.0, 215.0)
FIG4_RHOS = (-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9)
FIG5_BOB_LENGTHS = (202.0, 210.0, 217.0)
APPENDIX_MISALIGNMENT = 0.05

OUTCOME = ["xi", "tau_h", "window", "p_exp", "qber", "key_rate", "flags"]


def _axis(cfg: RunConfig, name: str, default) -> tuple[float, ...]:
    values = cfg.grid.axes.get(name)
    return tuple(values) if values is not None else tuple(float(v) for v in default)


def _frange(start: float, stop: float, step: float) -> tuple[float, ...]:
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))


def _scenario(cfg: RunConfig) -> Scenario:
    return Scenario(cfg.source, cfg.link_a, cfg.link_b, cfg.detector, cfg.scan)


def _outcome(res) -> dict:
    return {
        "xi": res.xi,
        "tau_h": res.tau_h,
        "window": res.window,
        "p_exp": res.stats.p_exp,
        "qber": res.qber,
        "key_rate": res.key_rate,
        "flags": ";".join(res.flags),
    }


def _rename(row: dict, axes) -> dict:
    return {AXIS_COLUMNS.get(k, k) if k in axes else k: v for k, v in row.items()}


def _sweep_columns(axes) -> list[str]:
    cols = [AXIS_COLUMNS[a] for a in axes]
    return cols + [c for c in RESULT_COLUMNS if c not in cols]


# ---------------------------------------------------------------- generic runs

def run_point(cfg: RunConfig, catalog) -> list[Table]:
    grid = SweepGrid(axes={}, mode=cfg.grid.mode, xi=cfg.grid.xi)
    row = evaluate_point(grid, _scenario(cfg), {})
    row = {
        "L_A_km": cfg.link_a.length,
        "L_B_km": cfg.link_b.length,
        "rho": cfg.source.rho,
        "e": cfg.detector.misalignment,
        "mode": cfg.grid.mode,
        **row,
    }
    return [("", ["L_A_km", "L_B_km", "rho", "e", "mode", *RESULT_COLUMNS], [row])]


def run_sweep(cfg: RunConfig, catalog) -> list[Table]:
    rows = sweep(cfg.grid, _scenario(cfg), cfg.workers)
    axes = list(cfg.grid.axes)
    return [("", _sweep_columns(axes), [_rename(r, axes) for r in rows])]


def run_maxdist(cfg: RunConfig, catalog) -> list[Table]:
    if "L_B" in cfg.grid.axes or "xi" in cfg.grid.axes:
        raise ConfigError("grid.axes: maxdist does not take L_B or xi axes")
    base = _scenario(cfg)

    def task(point: dict) -> dict:
        sc, _ = scenario_at(base, point)
        row = {AXIS_COLUMNS[k]: v for k, v in point.items()}
        row["max_L_B_km"] = max_secure_distance(
            sc.source, sc.link_a, sc.detector, sc.scan, cfg.search, sc.link_b
        )
        return row

    rows = ordered_map(task, cfg.grid.points(), cfg.workers)
    return [("", [AXIS_COLUMNS[a] for a in cfg.grid.axes] + ["max_L_B_km"], rows)]


# ---------------------------------------------------------------- figures

def run_fig2(cfg: RunConfig, catalog) -> list[Table]:
    """Key rate vs Bob's length for fixed windows and the optimized window."""
    lengths = _axis(cfg, "L_B", _frange(0.0, 220.0, 2.0))
    windows = _axis(cfg, "xi", FIG2_WINDOWS)
    modes = [(f"{w:g}", w) for w in windows] + [("opt", None)]

    def task(lb: float) -> list[dict]:
        link_b = replace(cfg.link_b, length=lb)
        out = []
        for label, xi in modes:
            if xi is None:
                res = optimize_window(cfg.source, cfg.link_a, link_b, cfg.detector, cfg.scan)
            else:
                res = key_rate(cfg.source, cfg.link_a, link_b, cfg.detector, xi)
            out.append({"L_B_km": lb, "xi_mode": label, **_outcome(res)})
        return out

    rows = [r for chunk in ordered_map(task, lengths, cfg.workers) for r in chunk]
    return [("", ["L_B_km", "xi_mode", *OUTCOME], rows)]


def _alice_scan(cfg: RunConfig) -> list[Table]:
    bob_lengths = _axis(cfg, "L_B", FIG3_BOB_LENGTHS)
    alice_lengths = _axis(cfg, "L_A", _frange(0.0, 200.0, 2.0))
    points = [(lb, la) for lb in bob_lengths for la in alice_lengths]

    def task(point) -> dict:
        lb, la = point
        res = optimize_window(
            cfg.source,
            replace(cfg.link_a, length=la),
            replace(cfg.link_b, length=lb),
            cfg.detector,
            cfg.scan,
        )
        return {"L_B_km": lb, "L_A_km": la, **_outcome(res)}

    rows = ordered_map(task, points, cfg.workers)
    return [("", ["L_B_km", "L_A_km", *OUTCOME], rows)]


def run_fig3(cfg: RunConfig, catalog) -> list[Table]:
    """Key rate vs Alice's length for several Bob lengths."""
    return _alice_scan(cfg)


def appendix_config(cfg: RunConfig) -> RunConfig:
    return replace(cfg, detector=replace(cfg.detector, misalignment=APPENDIX_MISALIGNMENT))


def run_figA1(cfg: RunConfig, catalog) -> list[Table]:
    """The fig3 scan with 5% basis misalignment."""
    return _alice_scan(appendix_config(cfg))


def run_fig4(cfg: RunConfig, catalog) -> list[Table]:
    """Maximal secure Bob length over Alice's length and the correlation coefficient."""
    rhos = _axis(cfg, "rho", FIG4_RHOS)
    alice_lengths = _axis(cfg, "L_A", _frange(0.0, 200.0, 10.0))
    points = [(rho, la) for rho in rhos for la in alice_lengths]

    def task(point) -> dict:
        rho, la = point
        dist = max_secure_distance(
            replace(cfg.source, rho=rho),
            replace(cfg.link_a, length=la),
            cfg.detector,
            cfg.scan,
            cfg.search,
            cfg.link_b,
        )
        return {"rho": rho, "L_A_km": la, "max_L_B_km": dist}

    rows = ordered_map(task, points, cfg.workers)
    return [("", ["rho", "L_A_km", "max_L_B_km"], rows)]


def run_fig5(cfg: RunConfig, catalog: tuple[DispersiveDevice, ...]) -> list[Table]:
    """Key rate over Alice's (dispersion, loss) plane with device loci overlaid."""
    bob_lengths = _axis(cfg, "L_B", FIG5_BOB_LENGTHS)
    dispersions = _axis(cfg, "dispersion_A", _frange(0.0, 3.0e-21, 1.0e-22))
    losses = _axis(cfg, "loss_A", _frange(0.0, 30.0, 1.0))
    grid = SweepGrid(axes={"L_B": bob_lengths, "dispersion_A": dispersions, "loss_A": losses})
    rows = sweep(grid, _scenario(cfg), cfg.workers)
    plane = ("", _sweep_columns(grid.axes), [_rename(r, grid.axes) for r in rows])

    max_disp, max_loss = max(dispersions), max(losses)
    device_rows = []
    for lb in bob_lengths:
        link_b = replace(cfg.link_b, length=lb)
        for dev in catalog:
            amounts = _device_amounts(dev, max_disp, max_loss)
            for amount, (disp, loss, k) in zip(
                amounts, locus_key_rates(dev, amounts, cfg.source, link_b, cfg.detector, cfg.scan)
            ):
                device_rows.append({
                    "L_B_km": lb,
                    "device": dev.name,
                    "kind": dev.kind,
                    "assumed": dev.assumed,
                    "amount": amount,
                    "dispersion_A_s2": disp,
                    "loss_A_dB": loss,
                    "key_rate": k,
                })
    devices = (
        "devices",
        ["L_B_km", "device", "kind", "assumed", "amount", "dispersion_A_s2", "loss_A_dB", "key_rate"],
        device_rows,
    )
    return [plane, devices]


def _device_amounts(dev: DispersiveDevice, max_disp: float, max_loss: float) -> list[float]:
    """Amounts that keep the locus inside the plotted window."""
    limits = []
    if dev.beta > 0:
        limits.append(max_disp / dev.beta)
    if dev.alpha > 0:
        limits.append(max_loss / dev.alpha)
    limit = min(limits) if limits else 0.0
    if dev.kind == "discrete-module":
        return [float(n) for n in range(int(np.floor(limit + 1e-9)) + 1)]
    return [float(a) for a in np.linspace(0.0, limit, 101)]


PRESETS: dict[str, Callable[[RunConfig, tuple], list[Table]]] = {
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "figA1": run_figA1,
    "point": run_point,
    "maxdist": run_maxdist,
    "sweep": run_sweep,
}
