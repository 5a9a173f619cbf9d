"""BB84 detection statistics under temporal filtering and the asymptotic key rate."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .physics import FiberLink, SourceParams, channel_transmittance, heralded_width

# Two detectors per party.
_PAIR_DETECTORS = 4
_PARTY_DETECTORS = 2


class NoSignalError(ArithmeticError):
    """Raised when no event at all is accepted (p_exp == 0)."""


@dataclass(frozen=True)
class DetectorParams:
    dark_rate: float = 1.0e3
    misalignment: float = 0.0

    def __post_init__(self) -> None:
        if not self.dark_rate >= 0:
            raise ValueError(f"dark_rate must be >= 0, got {self.dark_rate!r}")
        if not 0.0 <= self.misalignment <= 0.5:
            raise ValueError(f"misalignment must lie in [0, 0.5], got {self.misalignment!r}")


@dataclass(frozen=True)
class ClickStats:
    """Per-emission probabilities of the accepted event classes.

    ``p_sign``: both photons detected inside the window; ``p_dc``: both
    photons arrive but the accepted pair involves a dark count; ``p_plus_minus``
    / ``p_minus_plus``: one photon lost and replaced by a dark count;
    ``p_both_lost``: two coincident dark counts.
    """

    p_sign: float
    p_dc: float
    p_plus_minus: float
    p_minus_plus: float
    p_both_lost: float
    p_exp: float
    clamped: bool = False


@dataclass(frozen=True)
class KeyRateResult:
    xi: float
    tau_h: float
    window: float
    stats: ClickStats
    qber: float
    key_rate: float
    flags: tuple[str, ...] = ()


def binary_entropy(x):
    """Shannon entropy of a Bernoulli(x) variable in bits, with 0 log 0 = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise ValueError(f"binary_entropy argument must lie in [0, 1], got {x!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1.0 - arr) * np.log2(1.0 - arr)
    h = np.where((arr == 0.0) | (arr == 1.0), 0.0, h)
    return float(h) if h.ndim == 0 else h


def acceptance_probability(xi):
    """Probability that a signal pair falls inside a window of ``xi`` widths."""
    arr = np.asarray(xi, dtype=float)
    if np.any(~(arr >= 0.0)):
        raise ValueError(f"xi must be >= 0, got {xi!r}")
    eta = erf(arr / (2.0 * math.sqrt(2.0)))
    return float(eta) if eta.ndim == 0 else eta


def _terms(tau_h, t_a, t_b, dark_rate, rep_rate, xi):
    """Raw (unclamped) event probabilities; broadcasts over ``xi``."""
    eta = acceptance_probability(xi)
    p_h = dark_rate * xi * tau_h
    p_sign = t_a * t_b * eta
    p_dc = _PAIR_DETECTORS * t_a * t_b * (1.0 - eta) * p_h
    p_pm = _PARTY_DETECTORS * t_a * (1.0 - t_b) * p_h
    p_mp = _PARTY_DETECTORS * (1.0 - t_a) * t_b * p_h
    p_mm = (1.0 - t_a) * (1.0 - t_b) * (2.0 * dark_rate / rep_rate) * 2.0 * p_h
    return p_sign, p_dc, p_pm, p_mp, p_mm


def click_probabilities(
    source: SourceParams,
    link_a: FiberLink,
    link_b: FiberLink,
    det: DetectorParams,
    xi: float,
) -> ClickStats:
    if not xi > 0:
        raise ValueError(f"xi must be > 0, got {xi!r}")
    tau_h = heralded_width(source, link_a, link_b)
    return _stats_from_width(
        tau_h, channel_transmittance(link_a), channel_transmittance(link_b), det, source.rep_rate, xi
    )


def _stats_from_width(tau_h, t_a, t_b, det, rep_rate, xi) -> ClickStats:
    raw = _terms(tau_h, t_a, t_b, det.dark_rate, rep_rate, xi)
    terms = [min(max(float(p), 0.0), 1.0) for p in raw]
    clamped = any(p != float(r) for p, r in zip(terms, raw))
    p_sign, p_dc, p_pm, p_mp, p_mm = terms
    p_exp = p_sign + p_dc + p_pm + p_mp + p_mm
    if p_exp > 1.0:
        clamped = True
    if clamped:
        warnings.warn(
            f"linearized dark-count probabilities left [0, 1] at xi={xi!r}, tau_h={tau_h!r}",
            RuntimeWarning,
            stacklevel=3,
        )
    return ClickStats(p_sign, p_dc, p_pm, p_mp, p_mm, p_exp, clamped)


def qber(stats: ClickStats, det: DetectorParams) -> float:
    """Error rate of accepted events, including basis misalignment."""
    if not stats.p_exp > 0:
        raise NoSignalError("no accepted events (p_exp == 0)")
    value = (stats.p_exp - stats.p_sign) / (2.0 * stats.p_exp)
    value += det.misalignment * stats.p_sign / stats.p_exp
    return min(max(value, 0.0), 0.5)


def _bound(p_exp, error_rate):
    return p_exp * (1.0 - 2.0 * binary_entropy(error_rate))


def key_rate(
    source: SourceParams,
    link_a: FiberLink,
    link_b: FiberLink,
    det: DetectorParams,
    xi: float,
) -> KeyRateResult:
    """Secret bits per emission for a window of ``xi`` heralded widths."""
    if not xi > 0:
        raise ValueError(f"xi must be > 0, got {xi!r}")
    tau_h = heralded_width(source, link_a, link_b)
    return _result_from_width(
        tau_h, channel_transmittance(link_a), channel_transmittance(link_b), det, source.rep_rate, xi
    )


def _result_from_width(tau_h, t_a, t_b, det, rep_rate, xi) -> KeyRateResult:
    stats = _stats_from_width(tau_h, t_a, t_b, det, rep_rate, xi)
    flags = ["clamped"] if stats.clamped else []
    try:
        error_rate = qber(stats, det)
    except NoSignalError:
        flags.append("no_signal")
        return KeyRateResult(xi, tau_h, xi * tau_h, stats, 0.5, 0.0, tuple(flags))
    rate = max(0.0, _bound(stats.p_exp, error_rate))
    return KeyRateResult(xi, tau_h, xi * tau_h, stats, error_rate, rate, tuple(flags))


def key_rate_curve(tau_h, t_a, t_b, det: DetectorParams, rep_rate, xi) -> np.ndarray:
    """Unclamped key-rate bound over an array of window factors.

    Used for window scans; the zero clamp is left to the caller so that a
    scan over an all-insecure range still has a meaningful argmax.
    """
    xi = np.asarray(xi, dtype=float)
    p_sign, p_dc, p_pm, p_mp, p_mm = (np.clip(p, 0.0, 1.0) for p in _terms(
        tau_h, t_a, t_b, det.dark_rate, rep_rate, xi))
    p_exp = p_sign + p_dc + p_pm + p_mp + p_mm
    with np.errstate(divide="ignore", invalid="ignore"):
        error_rate = (p_exp - p_sign) / (2.0 * p_exp) + det.misalignment * p_sign / p_exp
    error_rate = np.where(p_exp > 0, np.clip(error_rate, 0.0, 0.5), 0.5)
    return _bound(p_exp, error_rate)
