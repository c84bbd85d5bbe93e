"""Rate, water-filling, and power-ledger numerics."""

import math

import numpy as np
import pytest

from hrris.metrics import (
    NoiseModel,
    PowerModel,
    energy_efficiency,
    incident_powers,
    noise_covariance,
    se_from_parts,
    spectral_efficiency,
    total_power_consumption,
    water_filling,
)
from hrris.surface import CoeffProfile


def test_noise_model_default_floor():
    noise = NoiseModel(bandwidth_hz=1e7)
    assert noise.sigma2 == pytest.approx(1e-13, rel=1e-12)
    assert noise.sigma_r2 == pytest.approx(1e-13, rel=1e-12)


def test_noise_model_explicit_relay_floor():
    noise = NoiseModel(sigma_r2=5e-13)
    assert noise.sigma_r2 == 5e-13


def test_incident_powers_diagonal_identity():
    h1 = np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex)
    q = np.eye(2, dtype=complex) * 0.5
    assert np.allclose(incident_powers(h1, q), [0.5, 2.0])


def test_noise_covariance_passive_is_thermal():
    noise = NoiseModel(bandwidth_hz=1e7)
    p = CoeffProfile.all_passive(np.zeros(5))
    h2 = np.ones((2, 5), dtype=complex)
    c = noise_covariance(h2, p, np.ones(5), noise)
    assert np.allclose(c, noise.sigma2 * np.eye(2))


def test_noise_covariance_single_active_example():
    # alpha=2, sigma_r2=1, no SI, h2 column (1,0): C = sigma^2 I + diag(4, 0)
    noise = NoiseModel(sigma_r2=1.0, sigma_si2_surface=0.0)
    p = CoeffProfile(
        amplitudes=np.array([2.0]), phases=np.zeros(1), active_set=(0,)
    )
    h2 = np.array([[1.0], [0.0]], dtype=complex)
    c = noise_covariance(h2, p, np.zeros(1), noise)
    assert np.allclose(c, noise.sigma2 * np.eye(2) + np.diag([4.0, 0.0]))


def test_noise_covariance_hermitian_pd():
    rng = np.random.default_rng(0)
    noise = NoiseModel(sigma_r2=1e-13)
    h2 = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
    amps = np.ones(6)
    amps[1], amps[4] = 3.0, 7.0
    p = CoeffProfile(amplitudes=amps, phases=np.zeros(6), active_set=(1, 4))
    c = noise_covariance(h2, p, np.abs(rng.standard_normal(6)) * 1e-9, noise)
    assert np.allclose(c, c.conj().T)
    assert np.all(np.linalg.eigvalsh(c) > 0)


def test_se_zero_channel():
    noise = NoiseModel()
    p = CoeffProfile.all_passive(np.zeros(3))
    h1 = np.zeros((3, 2), dtype=complex)
    h2 = np.ones((2, 3), dtype=complex)
    q = np.eye(2, dtype=complex)
    assert spectral_efficiency(h1, h2, p, q, noise) == 0.0


def test_se_scalar_case():
    # |g|^2 = 3, q = 1, sigma^2 = 1 -> log2(4) = 2
    g = np.array([[math.sqrt(3.0)]], dtype=complex)
    q = np.array([[1.0]], dtype=complex)
    c = np.array([[1.0]], dtype=complex)
    assert se_from_parts(g, q, c) == pytest.approx(2.0)


def test_se_matches_direct_determinant():
    rng = np.random.default_rng(5)
    h1 = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    h2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    p = CoeffProfile.all_passive(np.array([0.0, math.pi]))
    noise = NoiseModel(bandwidth_hz=1e7)
    q = np.eye(3, dtype=complex) * 0.05
    g = h2 @ np.diag(p.coeffs) @ h1
    c = noise.sigma2 * np.eye(2)
    direct = math.log2(
        np.linalg.det(np.eye(2) + np.linalg.inv(c) @ g @ q @ g.conj().T).real
    )
    assert spectral_efficiency(h1, h2, p, q, noise) == pytest.approx(direct, rel=1e-10)


def test_water_filling_worked_example():
    # whitened eigenvalues {4, 1}, P = 1: mu = 1.125, p = (0.875, 0.125)
    channel = np.diag([2.0, 1.0]).astype(complex)
    res = water_filling(channel, np.eye(2, dtype=complex), 1.0)
    assert res.water_level == pytest.approx(1.125)
    assert np.allclose(res.allocations, [0.875, 0.125])
    cap = se_from_parts(channel, res.q, np.eye(2, dtype=complex))
    assert cap == pytest.approx(2.33985, abs=1e-4)


def test_water_filling_single_mode():
    channel = np.array([[3.0, 0.0]], dtype=complex)
    res = water_filling(channel, np.eye(1, dtype=complex), 2.0)
    assert res.allocations[0] == pytest.approx(2.0)
    assert res.q[0, 0].real == pytest.approx(2.0)
    assert abs(res.q[1, 1]) < 1e-15


def test_water_filling_vanishing_power():
    channel = np.diag([2.0, 1.0]).astype(complex)
    res = water_filling(channel, np.eye(2, dtype=complex), 1e-9)
    assert res.allocations[1] == 0.0
    assert res.allocations[0] == pytest.approx(1e-9)


def test_water_filling_zero_channel_flag():
    res = water_filling(np.zeros((2, 2), complex), np.eye(2, dtype=complex), 1.0)
    assert res.zero_channel
    assert np.allclose(res.q, 0.0)


def test_water_filling_kkt_random():
    rng = np.random.default_rng(17)
    for _ in range(50):
        nt = int(rng.integers(2, 5))
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        noise_cov = a @ a.conj().T + np.eye(2)
        h = rng.standard_normal((2, nt)) + 1j * rng.standard_normal((2, nt))
        power = float(rng.uniform(0.1, 10.0))
        res = water_filling(h, noise_cov, power)
        assert res.allocations.sum() == pytest.approx(power, rel=1e-9)
        # complementary slackness: p_i > 0 -> mu - 1/lam_i = p_i
        for lam, p in zip(res.mode_gains, res.allocations):
            if p > 0:
                assert abs(res.water_level - 1.0 / lam - p) < 1e-9


def test_power_ledger_hrris_example():
    pm = PowerModel()
    total = total_power_consumption("hrris", 96, 4, 1e-3, pm)
    assert total == pytest.approx(1.862)


def test_power_ledger_ris_example():
    assert total_power_consumption("ris", 100, 0, 0.0, PowerModel()) == pytest.approx(1.8)


def test_power_ledger_relay_example():
    assert total_power_consumption("relay", 0, 4, 1e-3, PowerModel()) == pytest.approx(1.702)


def test_power_ledger_unknown_scheme():
    with pytest.raises(ValueError):
        total_power_consumption("afrelay", 0, 4, 1e-3, PowerModel())


def test_ee_direct_division():
    assert energy_efficiency(10.0, 1e7, 2.0) == pytest.approx(5e7)


def test_ee_zero_rate():
    assert energy_efficiency(0.0, 1e7, 2.0) == 0.0


def test_ee_inverse_in_power():
    assert energy_efficiency(4.0, 1e7, 2.0) == 2.0 * energy_efficiency(4.0, 1e7, 4.0)
