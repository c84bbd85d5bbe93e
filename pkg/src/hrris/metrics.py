"""Spectral efficiency with colored noise, water-filling, and the power ledger."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .surface import CoeffProfile, element_noise_weight

LN2 = math.log(2.0)


@dataclass(frozen=True)
class NoiseModel:
    """Thermal noise and self-interference parameters.

    sigma_r2 (active-element input noise) defaults to PSD x bandwidth, the
    same floor as the MS receiver.  SI gains are linear power ratios.
    """

    noise_psd_dbm_hz: float = -170.0
    bandwidth_hz: float = 1e7
    sigma_r2: Optional[float] = None
    sigma_si2_surface: float = 1e-7  # -70 dB
    sigma_si2_relay: float = 10.0 ** -9.5  # -95 dB

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        for g in (self.sigma_si2_surface, self.sigma_si2_relay):
            if not 0.0 <= g < 1.0:
                raise ValueError("SI gains must lie in [0, 1)")
        if self.sigma_r2 is None:
            object.__setattr__(self, "sigma_r2", self.sigma2)

    @property
    def sigma2(self) -> float:
        """Receiver noise power in watts: PSD x bandwidth."""
        return 10.0 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz


@dataclass(frozen=True)
class PowerModel:
    """Transmit and circuit power constants (watts)."""

    bs_tx_power: float = 0.1  # 20 dBm
    pa_efficiency: float = 0.5
    bs_circuit: float = 1.0
    ms_circuit: float = 0.1
    passive_element: float = 5e-3
    active_element_circuit: float = 20e-3
    relay_element: float = 100e-3

    def __post_init__(self):
        if not 0.0 < self.pa_efficiency <= 1.0:
            raise ValueError("pa_efficiency must be in (0, 1]")
        for p in (
            self.bs_tx_power, self.bs_circuit, self.ms_circuit,
            self.passive_element, self.active_element_circuit, self.relay_element,
        ):
            if p < 0:
                raise ValueError("powers must be non-negative")


@dataclass(frozen=True)
class RateResult:
    """Outcome of one optimized trial."""

    se: float  # bits/s/Hz
    ee: float  # bits/joule
    total_power: float  # watts
    iterations: int
    converged: bool

    def __post_init__(self):
        if self.se < 0:
            raise ValueError("SE must be non-negative")
        if self.total_power <= 0:
            raise ValueError("total power must be positive")


def incident_powers(h1: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-element incident signal power: diag(h1 q h1^H)."""
    return np.einsum("ni,ij,nj->n", h1, q, h1.conj()).real


def noise_covariance(
    h2: np.ndarray,
    p: CoeffProfile,
    incident: np.ndarray,
    noise: NoiseModel,
) -> np.ndarray:
    """Receive noise covariance: thermal floor plus amplified noise/SI from
    active elements, each arriving through its own hop-2 column."""
    nr = h2.shape[0]
    c = noise.sigma2 * np.eye(nr, dtype=complex)
    for n in p.active_set:
        w = element_noise_weight(
            float(p.amplitudes[n]), float(incident[n]),
            noise.sigma_r2, noise.sigma_si2_surface,
        )
        col = h2[:, n]
        c += w * np.outer(col, col.conj())
    return c


def spectral_efficiency(
    h1: np.ndarray,
    h2: np.ndarray,
    p: CoeffProfile,
    q: np.ndarray,
    noise: NoiseModel,
) -> float:
    """log2 det(I + C^-1 G q G^H) with G = h2 diag(coeffs) h1.

    Incident powers feeding the active-element noise model are computed from
    the same q being scored, so the evaluation is self-consistent.
    """
    if noise.sigma2 <= 0:
        raise ValueError("receiver noise power must be positive (singular covariance)")
    s = incident_powers(h1, q)
    c = noise_covariance(h2, p, s, noise)
    g = (h2 * p.coeffs[np.newaxis, :]) @ h1
    return se_from_parts(g, q, c)


def se_from_parts(g: np.ndarray, q: np.ndarray, c: np.ndarray) -> float:
    """log2 det(C + G q G^H) - log2 det(C) for Hermitian PD C."""
    signal = g @ q @ g.conj().T
    sign, logdet_full = np.linalg.slogdet(c + signal)
    _, logdet_noise = np.linalg.slogdet(c)
    if sign.real <= 0:
        raise ValueError("covariance lost positive definiteness")
    return max((logdet_full - logdet_noise) / LN2, 0.0)


@dataclass(frozen=True)
class WaterFillResult:
    q: np.ndarray  # transmit covariance, original coordinates
    mode_gains: np.ndarray  # eigenvalues of the whitened channel (lambda_i)
    allocations: np.ndarray  # per-mode powers p_i
    water_level: float
    zero_channel: bool


def water_filling(
    channel: np.ndarray,
    noise_cov: np.ndarray,
    power: float,
    gain_floor: float = 1e-30,
) -> WaterFillResult:
    """Capacity-achieving transmit covariance against a colored-noise receiver.

    Whitens by the Cholesky factor of noise_cov, SVDs the whitened channel,
    and water-fills p_i = max(0, mu - 1/lambda_i) with sum(p_i) = power.
    A numerically zero channel (or zero power) yields a zero covariance with
    the zero_channel flag set.
    """
    if power < 0:
        raise ValueError("power must be non-negative")
    nt = channel.shape[1]
    l = np.linalg.cholesky(noise_cov)
    white = np.linalg.solve(l, channel)
    _, sv, vh = np.linalg.svd(white, full_matrices=False)
    lam = sv * sv  # descending
    if power == 0.0 or lam.size == 0 or lam[0] <= gain_floor:
        return WaterFillResult(
            q=np.zeros((nt, nt), dtype=complex),
            mode_gains=lam,
            allocations=np.zeros_like(lam),
            water_level=0.0,
            zero_channel=True,
        )
    usable = lam > gain_floor
    lam_u = lam[usable]
    inv = 1.0 / lam_u
    mu = 0.0
    m_active = 0
    for m in range(len(lam_u), 0, -1):
        mu = (power + inv[:m].sum()) / m
        if mu > inv[m - 1]:
            m_active = m
            break
    alloc = np.zeros_like(lam)
    alloc[:m_active] = mu - inv[:m_active]
    # mu - inv cancels badly when 1/lambda >> power; rescale so the budget
    # is met to machine precision
    alloc[:m_active] *= power / alloc[:m_active].sum()
    v = vh.conj().T
    q = (v[:, :m_active] * alloc[:m_active]) @ v[:, :m_active].conj().T
    return WaterFillResult(
        q=q, mode_gains=lam, allocations=alloc, water_level=mu, zero_channel=False
    )


def total_power_consumption(
    scheme: str,
    n_passive: int,
    n_active: int,
    active_radiated: float,
    pm: PowerModel,
) -> float:
    """System power ledger: BS PA draw, circuits, element circuits, and the
    PA draw behind the actively radiated power."""
    if scheme not in ("ris", "hrris", "relay"):
        raise ValueError(f"unknown scheme class: {scheme!r}")
    if n_passive < 0 or n_active < 0:
        raise ValueError("element counts must be non-negative")
    per_active = pm.relay_element if scheme == "relay" else pm.active_element_circuit
    return (
        pm.bs_tx_power / pm.pa_efficiency
        + pm.bs_circuit
        + pm.ms_circuit
        + n_passive * pm.passive_element
        + n_active * per_active
        + active_radiated / pm.pa_efficiency
    )


def energy_efficiency(se: float, bandwidth: float, total_power: float) -> float:
    """Bits per joule: B * SE / P_total."""
    if total_power <= 0:
        raise ValueError("total power must be positive")
    return bandwidth * se / total_power
