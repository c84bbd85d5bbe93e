"""Full-duplex amplify-and-forward relay benchmark with SVD precoding.

The relay sits at the surface position with K antennas.  Its precoder
aligns the receive and transmit eigenmodes of the two hops, splits power
over the product-channel modes water-filling style, and is normalized so
the total transmit power (signal + amplified noise + the self-interference
fixed point, mirroring the surface loop model) equals the relay budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .channel import ChannelPair
from .metrics import (
    NoiseModel,
    PowerModel,
    RateResult,
    energy_efficiency,
    se_from_parts,
    total_power_consumption,
    water_filling,
)
from .surface import UnstableLoopError


@dataclass(frozen=True)
class RelayConfig:
    """Relay antenna count, transmit power, and residual SI after suppression."""

    n_antennas: int = 4
    relay_power: float = 1e-3  # 0 dBm
    sigma_si2: float = 10.0 ** -9.5  # -95 dB, analog + digital suppression

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError("relay needs at least one antenna")
        if self.relay_power < 0:
            raise ValueError("relay_power must be >= 0")
        if not 0.0 <= self.sigma_si2 < 1.0:
            raise ValueError("SI gain must lie in [0, 1)")


def _water_fill_fractions(gains: np.ndarray, gain_floor: float = 1e-30) -> np.ndarray:
    """Water-filling power fractions (summing to 1) over parallel gains."""
    usable = gains > gain_floor
    if not usable.any():
        raise ValueError("zero channel: no usable relay mode")
    lam = gains[usable]
    order = np.argsort(lam)[::-1]
    inv = 1.0 / lam[order]
    m_active = 1
    for m in range(len(inv), 0, -1):
        mu = (1.0 + inv[:m].sum()) / m
        if mu > inv[m - 1]:
            m_active = m
            break
    alloc = np.zeros(len(inv))
    alloc[:m_active] = mu - inv[:m_active]
    out = np.zeros(len(gains))
    idx = np.flatnonzero(usable)[order]
    out[idx] = alloc
    return out


def relay_transmit_power(
    w: np.ndarray,
    h1r: np.ndarray,
    q: np.ndarray,
    sigma_r2: float,
    sigma_si2: float,
) -> float:
    """Total relay output power with the SI echo closed isotropically.

    P = tr(W (h1r q h1r^H + sigma_r2 I) W^H) / (1 - sigma_si2 tr(W W^H)/K).
    """
    k = w.shape[0]
    s_in = h1r @ q @ h1r.conj().T + sigma_r2 * np.eye(k)
    direct = np.trace(w @ s_in @ w.conj().T).real
    loop = sigma_si2 * np.trace(w @ w.conj().T).real / k
    if loop >= 1.0:
        raise UnstableLoopError(f"relay loop gain {loop:.3g} >= 1")
    return direct / (1.0 - loop)


def relay_precoder(
    h1r: np.ndarray,
    h2r: np.ndarray,
    q: np.ndarray,
    cfg: RelayConfig,
    noise: NoiseModel,
) -> np.ndarray:
    """SVD relay precoder W = V2 Gamma U1^H scaled to the relay power budget.

    Mode gains follow a water-filling split over the product channel
    Sigma2 * Sigma1; the global scale solves the transmit-power fixed point
    in closed form, so the constraint holds to machine precision.
    """
    k = cfg.n_antennas
    if h1r.shape[0] != k or h2r.shape[1] != k:
        raise ValueError("channel dimensions do not match the relay antenna count")
    u1, s1, _ = np.linalg.svd(h1r, full_matrices=True)
    _, s2, v2h = np.linalg.svd(h2r, full_matrices=True)
    v2 = v2h.conj().T
    m = min(len(s1), len(s2))
    prod = np.zeros(k)
    prod[:m] = (s1[:m] * s2[:m]) ** 2
    if prod.max(initial=0.0) <= 0.0:
        raise ValueError("zero channel: relay precoder undefined")
    frac = _water_fill_fractions(prod)
    w0 = v2 @ np.diag(np.sqrt(frac)) @ u1.conj().T

    s_in = h1r @ q @ h1r.conj().T + noise.sigma_r2 * np.eye(k)
    a0 = np.trace(w0 @ s_in @ w0.conj().T).real
    t0 = np.trace(w0 @ w0.conj().T).real
    p_r = cfg.relay_power
    c2 = p_r / (a0 + cfg.sigma_si2 * p_r * t0 / k)
    return math.sqrt(c2) * w0


def relay_rate(
    h1r: np.ndarray,
    h2r: np.ndarray,
    w: np.ndarray,
    q: np.ndarray,
    noise: NoiseModel,
) -> float:
    """End-to-end log-det rate through the AF relay with amplified noise + SI."""
    if noise.sigma2 <= 0:
        raise ValueError("receiver noise power must be positive")
    k = w.shape[0]
    nr = h2r.shape[0]
    p_t = relay_transmit_power(w, h1r, q, noise.sigma_r2, noise.sigma_si2_relay)
    hw = h2r @ w
    c = noise.sigma2 * np.eye(nr, dtype=complex) \
        + (noise.sigma_r2 + noise.sigma_si2_relay * p_t / k) * (hw @ hw.conj().T)
    g = hw @ h1r
    return se_from_parts(g, q, c)


def relay_experiment(
    channels: ChannelPair,
    cfg: RelayConfig,
    noise: NoiseModel,
    pm: PowerModel,
    max_iters: int = 6,
    rel_tolerance: float = 1e-4,
) -> Tuple[RateResult, np.ndarray, np.ndarray]:
    """Optimize the BS covariance against the relay chain and report metrics.

    ``channels`` holds the relay-sized hops (h1: K x Nt, h2: Nr x K).  The
    BS water-fills against the relay-induced noise covariance under the same
    non-decreasing guard as the surface optimizers.  Returns the rate result
    together with the final precoder and covariance.
    """
    h1r, h2r = channels.h1, channels.h2
    noise_r = noise
    if noise.sigma_si2_relay != cfg.sigma_si2:
        noise_r = NoiseModel(
            noise_psd_dbm_hz=noise.noise_psd_dbm_hz,
            bandwidth_hz=noise.bandwidth_hz,
            sigma_r2=noise.sigma_r2,
            sigma_si2_surface=noise.sigma_si2_surface,
            sigma_si2_relay=cfg.sigma_si2,
        )
    nt = h1r.shape[1]
    power = pm.bs_tx_power
    q = (power / nt) * np.eye(nt, dtype=complex)
    w = relay_precoder(h1r, h2r, q, cfg, noise_r)
    se = relay_rate(h1r, h2r, w, q, noise_r)
    iters = 0
    converged = False
    for _ in range(max_iters):
        iters += 1
        p_t = relay_transmit_power(w, h1r, q, noise_r.sigma_r2, noise_r.sigma_si2_relay)
        hw = h2r @ w
        c = noise_r.sigma2 * np.eye(h2r.shape[0], dtype=complex) \
            + (noise_r.sigma_r2 + noise_r.sigma_si2_relay * p_t / cfg.n_antennas) \
            * (hw @ hw.conj().T)
        cand_q = water_filling(hw @ h1r, c, power).q
        cand_w = relay_precoder(h1r, h2r, cand_q, cfg, noise_r)
        cand_se = relay_rate(h1r, h2r, cand_w, cand_q, noise_r)
        if cand_se >= se:
            gain = cand_se - se
            q, w, se = cand_q, cand_w, cand_se
            if gain <= rel_tolerance * max(se, 1e-12):
                converged = True
                break
        else:
            converged = True
            break
    total = total_power_consumption("relay", 0, cfg.n_antennas, cfg.relay_power, pm)
    result = RateResult(
        se=se,
        ee=energy_efficiency(se, noise_r.bandwidth_hz, total),
        total_power=total,
        iterations=iters,
        converged=converged,
    )
    return result, w, q
