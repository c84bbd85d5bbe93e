"""Full-duplex AF relay precoder, power normalization, and rate."""

import math

import numpy as np
import pytest

from hrris.channel import ChannelPair
from hrris.metrics import NoiseModel, PowerModel, se_from_parts
from hrris.relay import (
    RelayConfig,
    relay_experiment,
    relay_precoder,
    relay_rate,
    relay_transmit_power,
)


def _noise(**kw):
    return NoiseModel(bandwidth_hz=1e7, **kw)


def _random_hops(rng, k=4, nt=3, nr=2, scale=1e-3):
    h1r = (rng.standard_normal((k, nt)) + 1j * rng.standard_normal((k, nt))) * scale
    h2r = (rng.standard_normal((nr, k)) + 1j * rng.standard_normal((nr, k))) * scale
    return h1r, h2r


def test_scalar_gain_satisfies_budget_equation():
    # K=1: beta^2 (s + sigma_r2 + sigma_si2 * p) = P_r with p the fixed point
    noise = _noise(sigma_r2=1e-13)
    cfg = RelayConfig(n_antennas=1)
    h1r = np.array([[1e-3 + 0j]])
    h2r = np.array([[2e-3 + 0j]])
    q = np.array([[0.1 + 0j]])
    w = relay_precoder(h1r, h2r, q, cfg, noise)
    beta2 = abs(w[0, 0]) ** 2
    s = abs(h1r[0, 0]) ** 2 * 0.1
    p = relay_transmit_power(w, h1r, q, noise.sigma_r2, cfg.sigma_si2)
    assert beta2 * (s + noise.sigma_r2 + cfg.sigma_si2 * p) == pytest.approx(
        cfg.relay_power, rel=1e-9
    )


def test_precoder_power_constraint():
    rng = np.random.default_rng(0)
    noise = _noise()
    for _ in range(10):
        h1r, h2r = _random_hops(rng)
        cfg = RelayConfig(n_antennas=4)
        q = np.eye(3, dtype=complex) * (0.1 / 3)
        w = relay_precoder(h1r, h2r, q, cfg, noise)
        p = relay_transmit_power(w, h1r, q, noise.sigma_r2, cfg.sigma_si2)
        assert p == pytest.approx(cfg.relay_power, rel=1e-9)


def test_precoder_unitary_for_identity_channels():
    noise = _noise()
    cfg = RelayConfig(n_antennas=3)
    eye = np.eye(3, dtype=complex)
    w = relay_precoder(eye, eye, eye * (0.1 / 3), cfg, noise)
    # equal singular values -> equal water-filling split -> scaled unitary
    wh_w = w.conj().T @ w
    scale = wh_w[0, 0].real
    assert np.allclose(wh_w, scale * np.eye(3), atol=scale * 1e-9)


def test_rate_zero_precoder():
    noise = _noise()
    h1r, h2r = _random_hops(np.random.default_rng(1))
    w = np.zeros((4, 4), dtype=complex)
    q = np.eye(3, dtype=complex) * (0.1 / 3)
    assert relay_rate(h1r, h2r, w, q, noise) == 0.0


def test_rate_noiseless_relay_equals_cascade_capacity():
    rng = np.random.default_rng(2)
    noise = NoiseModel(bandwidth_hz=1e7, sigma_r2=0.0, sigma_si2_relay=0.0)
    h1r, h2r = _random_hops(rng)
    w = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) * 0.5
    q = np.eye(3, dtype=complex) * (0.1 / 3)
    g = h2r @ w @ h1r
    direct = se_from_parts(g, q, noise.sigma2 * np.eye(2, dtype=complex))
    assert relay_rate(h1r, h2r, w, q, noise) == pytest.approx(direct, rel=1e-10)


def test_rate_scalar_chain_example():
    # |g1|^2 = |g2|^2 = beta^2 = q = 1, sigma^2 = sigma_r2 = 1, no SI:
    # SNR = 1 / (1 + 1) -> log2(1.5)
    noise = NoiseModel(
        noise_psd_dbm_hz=30.0, bandwidth_hz=1.0, sigma_r2=1.0, sigma_si2_relay=0.0
    )
    assert noise.sigma2 == pytest.approx(1.0)
    one = np.array([[1.0 + 0j]])
    rate = relay_rate(one, one, one, one, noise)
    assert rate == pytest.approx(math.log2(1.5), abs=1e-9)


def test_experiment_end_to_end():
    rng = np.random.default_rng(3)
    h1r, h2r = _random_hops(rng)
    res, w, q = relay_experiment(
        ChannelPair(h1r, h2r), RelayConfig(n_antennas=4), _noise(), PowerModel()
    )
    assert res.se > 0
    assert res.total_power == pytest.approx(1.702)
    assert res.ee == pytest.approx(1e7 * res.se / 1.702)
    assert np.trace(q).real == pytest.approx(0.1, rel=1e-9)


def test_experiment_se_non_decreasing_in_antennas():
    # paired channels: the K=2 relay contains the K=1 relay's hop rows
    rng = np.random.default_rng(4)
    ses = {1: [], 2: []}
    for _ in range(10):
        h1r, h2r = _random_hops(rng, k=2)
        for k in (1, 2):
            pair = ChannelPair(h1r[:k, :], h2r[:, :k])
            res, _, _ = relay_experiment(
                pair, RelayConfig(n_antennas=k), _noise(), PowerModel()
            )
            ses[k].append(res.se)
    assert np.mean(ses[2]) >= np.mean(ses[1])


def test_config_validation():
    with pytest.raises(ValueError):
        RelayConfig(n_antennas=0)
    with pytest.raises(ValueError):
        RelayConfig(sigma_si2=1.5)
