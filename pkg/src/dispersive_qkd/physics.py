"""Temporal model of a dispersed SPDC photon pair.

Units used throughout: spectral widths in s^-1, lengths in km, attenuation in
dB/km, dispersion half-parameter ``beta`` in s^2/km (the fiber GVD is
``2 * beta``), times in s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SourceParams:
    """Gaussian joint spectrum of the photon pair and the pump repetition rate."""

    sigma_a: float = 1.5e12
    sigma_b: float = 1.5e12
    rho: float = 0.9
    rep_rate: float = 2.0e8

    def __post_init__(self) -> None:
        if not self.sigma_a > 0:
            raise ValueError(f"sigma_a must be > 0, got {self.sigma_a!r}")
        if not self.sigma_b > 0:
            raise ValueError(f"sigma_b must be > 0, got {self.sigma_b!r}")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in the open interval (-1, 1), got {self.rho!r}")
        if not self.rep_rate > 0:
            raise ValueError(f"rep_rate must be > 0, got {self.rep_rate!r}")


@dataclass(frozen=True)
class FiberLink:
    """One arm between the source and a detection station."""

    length: float = 0.0
    attenuation: float = 0.2
    beta: float = -1.15e-23

    def __post_init__(self) -> None:
        if not self.length >= 0:
            raise ValueError(f"length must be >= 0, got {self.length!r}")
        if not self.attenuation >= 0:
            raise ValueError(f"attenuation must be >= 0, got {self.attenuation!r}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta!r}")

    @classmethod
    def lumped(cls, dispersion: float, loss: float) -> "FiberLink":
        """A 1 km link carrying the given total dispersion (s^2) and loss (dB)."""
        return cls(length=1.0, attenuation=loss, beta=dispersion)

    @property
    def dispersion(self) -> float:
        """Accumulated dispersion ``beta * length`` in s^2."""
        return self.beta * self.length

    @property
    def loss(self) -> float:
        """Total attenuation in dB."""
        return self.attenuation * self.length


def dimensionless_dispersion(sigma: float, link: FiberLink) -> float:
    """``2 sigma^2 beta L`` for one arm; the sign follows ``beta``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    return 2.0 * sigma**2 * link.beta * link.length


def g_factor(x, rho: float):
    return 1.0 + x * (1.0 - rho**2)


def _check_rho(rho: float) -> None:
    if not -1.0 < rho < 1.0:
        raise ValueError(f"rho must lie in the open interval (-1, 1), got {rho!r}")


def _z_coefficients(source: SourceParams, link_a: FiberLink, link_b: FiberLink):
    # The t1^2 coefficient carries Bob's accumulated dispersion and vice versa;
    # this is what the Fourier transform of the dispersed spectrum gives and
    # what keeps |psi|^2 normalized.
    s2 = source.sigma_a**2 * source.sigma_b**2
    one_m_r2 = 1.0 - source.rho**2
    z_a = 2j * s2 * link_b.beta * link_b.length * one_m_r2 + source.sigma_a**2
    z_b = 2j * s2 * link_a.beta * link_a.length * one_m_r2 + source.sigma_b**2
    return z_a, z_b


def _denominator(source: SourceParams, link_a: FiberLink, link_b: FiberLink) -> complex:
    x_a = dimensionless_dispersion(source.sigma_a, link_a)
    x_b = dimensionless_dispersion(source.sigma_b, link_b)
    return g_factor(-x_a * x_b, source.rho) + 1j * (x_a + x_b)


def biphoton_amplitude(source: SourceParams, link_a: FiberLink, link_b: FiberLink, t1, t2):
    """Propagated two-photon temporal wavefunction ``psi(t1, t2)``.

    ``t1`` is the detection time at Alice, ``t2`` at Bob; both broadcast as
    numpy arrays. The amplitude is normalized over the (t1, t2) plane.
    """
    _check_rho(source.rho)
    sa, sb, rho = source.sigma_a, source.sigma_b, source.rho
    z_a, z_b = _z_coefficients(source, link_a, link_b)
    denom = _denominator(source, link_a, link_b)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    prefactor = 1j * np.sqrt(sa * sb) * (1.0 - rho**2) ** 0.25 / np.sqrt(-np.pi * denom + 0j)
    quad = z_a * t1**2 + z_b * t2**2 + 2.0 * sa * sb * rho * t1 * t2
    return prefactor * np.exp(-quad / (2.0 * denom))


def biphoton_intensity(source: SourceParams, link_a: FiberLink, link_b: FiberLink, t1, t2):
    """Joint detection-time density ``|psi(t1, t2)|^2``."""
    amp = biphoton_amplitude(source, link_a, link_b, t1, t2)
    return amp.real**2 + amp.imag**2


def heralded_width(source: SourceParams, link_a: FiberLink, link_b: FiberLink) -> float:
    """Width of Bob's arrival time relative to Alice's detection, in seconds.

    Closed form for the standard deviation of ``t2 - t1``; symmetric under
    exchanging the two arms.
    """
    _check_rho(source.rho)
    sa, sb, rho = source.sigma_a, source.sigma_b, source.rho
    x_a = dimensionless_dispersion(sa, link_a)
    x_b = dimensionless_dispersion(sb, link_b)
    g_aa = g_factor(x_a * x_a, rho)
    g_bb = g_factor(x_b * x_b, rho)
    g_ab = g_factor(-(x_a * x_b), rho)

    numerator = g_aa * sb**2 + g_bb * sa**2 + 2.0 * g_ab * (sa * sb) * rho
    denominator = 2.0 * (sa * sa) * (sb * sb) * (g_aa * g_bb - g_ab**2 * rho**2)
    spread = g_ab**2 + (x_a + x_b) ** 2
    radicand = numerator / denominator * spread
    if not (radicand > 0 and math.isfinite(radicand)):
        raise ValueError(f"heralded width radicand is not positive: {radicand!r}")
    return math.sqrt(radicand)


def channel_transmittance(link: FiberLink) -> float:
    return 10.0 ** (-link.attenuation * link.length / 10.0)


def _quadratic_form(source: SourceParams, link_a: FiberLink, link_b: FiberLink) -> np.ndarray:
    """Real matrix M with ``|psi|^2 ~ exp(-t^T M t)``."""
    z_a, z_b = _z_coefficients(source, link_a, link_b)
    denom = _denominator(source, link_a, link_b)
    cross = source.sigma_a * source.sigma_b * source.rho
    return np.array(
        [[(z_a / denom).real, (cross / denom).real],
         [(cross / denom).real, (z_b / denom).real]]
    )


def heralded_width_quadrature(
    source: SourceParams,
    link_a: FiberLink,
    link_b: FiberLink,
    points: int = 2001,
    span: float = 8.0,
) -> tuple[float, float]:
    """Brute-force check of :func:`heralded_width`.

    Integrates ``|psi|^2`` with the trapezoid rule on a ``points x points``
    grid in the rotated frame ``u = (t2 - t1)/sqrt(2)``, ``v = (t2 + t1)/sqrt(2)``.
    The u axis spans ``+-span`` marginal widths. At each u the v axis spans
    ``+-span`` conditional widths around the conditional mean, so strongly
    elongated densities stay resolved. Only the quadratic form of the density
    is used to place the grid. Returns the standard deviation of ``t2 - t1``
    and the total probability.
    """
    rot = np.array([[-1.0, 1.0], [1.0, 1.0]]) / math.sqrt(2.0)  # rows: u, v
    m_uv = rot @ _quadratic_form(source, link_a, link_b) @ rot.T
    cov_uv = np.linalg.inv(2.0 * m_uv)
    width_u = math.sqrt(cov_uv[0, 0])
    width_v_cond = math.sqrt(1.0 / (2.0 * m_uv[1, 1]))
    slope = -m_uv[0, 1] / m_uv[1, 1]  # E[v | u] = slope * u

    u = np.linspace(-span * width_u, span * width_u, points)
    s = np.linspace(-span, span, points)
    uu, ss = np.meshgrid(u, s, indexing="ij")
    vv = slope * uu + width_v_cond * ss
    t1 = (vv - uu) / math.sqrt(2.0)
    t2 = (vv + uu) / math.sqrt(2.0)
    density = biphoton_intensity(source, link_a, link_b, t1, t2)

    # rotation has unit Jacobian, the shear contributes width_v_cond
    marginal_u = np.trapezoid(density, s, axis=1) * width_v_cond
    norm = float(np.trapezoid(marginal_u, u))
    mean_u = float(np.trapezoid(u * marginal_u, u)) / norm
    var_u = float(np.trapezoid((u - mean_u) ** 2 * marginal_u, u)) / norm
    return math.sqrt(2.0 * var_u), norm
