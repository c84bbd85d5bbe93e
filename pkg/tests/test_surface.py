"""Coefficient profiles, phase quantization, and the active-element loop."""

import math

import numpy as np
import pytest

from hrris.metrics import NoiseModel
from hrris.surface import (
    BudgetReport,
    CoeffProfile,
    PhaseCodebook,
    SurfaceConfig,
    UnstableLoopError,
    budget_check,
    coeff_matrix,
    element_noise_weight,
    element_output_power,
    max_stable_amplitude,
    quantize_phase,
)


def test_codebook_two_bits():
    book = PhaseCodebook.from_bits(2)
    assert np.allclose(book.values, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])


def test_codebook_rejects_unsorted():
    with pytest.raises(ValueError):
        PhaseCodebook(values=np.array([1.0, 0.5]))


def test_quantize_near_zero():
    book = PhaseCodebook.from_bits(2)
    assert quantize_phase(0.4, book) == 0.0


def test_quantize_between_points():
    book = PhaseCodebook.from_bits(2)
    assert quantize_phase(2.0, book) == math.pi / 2


def test_quantize_circular_wrap():
    book = PhaseCodebook.from_bits(2)
    assert quantize_phase(6.0, book) == 0.0


def test_coeff_matrix_identity():
    p = CoeffProfile.all_passive(np.zeros(3))
    assert np.allclose(coeff_matrix(p), np.eye(3))


def test_coeff_matrix_active_example():
    p = CoeffProfile(
        amplitudes=np.array([2.0, 1.0]),
        phases=np.array([math.pi, 0.0]),
        active_set=(0,),
    )
    assert np.allclose(coeff_matrix(p), np.diag([-2.0, 1.0]))


def test_profile_rejects_passive_amplification():
    with pytest.raises(ValueError):
        CoeffProfile(
            amplitudes=np.array([1.5, 1.0]), phases=np.zeros(2), active_set=(1,)
        )


def test_output_power_off():
    assert element_output_power(0.0, 1.0, 0.1, 0.01) == 0.0


def test_output_power_loop_fixed_point():
    # p = 4 (1 + 0.01 p)  ->  p = 4 / 0.96
    p = element_output_power(2.0, 0.9, 0.1, 0.01)
    assert p == pytest.approx(4.16667, abs=1e-5)


def test_output_power_no_loop():
    assert element_output_power(3.0, 0.5, 0.5, 0.0) == pytest.approx(9.0)


def test_output_power_unstable():
    with pytest.raises(UnstableLoopError):
        element_output_power(10.0, 1.0, 0.1, 0.01)


def test_noise_weight_is_output_minus_signal():
    alpha, s, sr2, si2 = 3.0, 0.7, 0.05, 0.02
    p = element_output_power(alpha, s, sr2, si2)
    w = element_noise_weight(alpha, s, sr2, si2)
    assert w == pytest.approx(p - alpha * alpha * s)


def test_max_stable_amplitude_meets_budget():
    s, sr2, si2, r = 1e-8, 1e-13, 1e-7, 1e-3
    a = max_stable_amplitude(r, s, sr2, si2)
    assert a * a * si2 < 1.0
    assert element_output_power(a, s, sr2, si2) == pytest.approx(r, rel=1e-12)


def test_max_stable_amplitude_zero_budget():
    assert max_stable_amplitude(0.0, 1e-8, 1e-13, 1e-7) == 0.0


def _noise():
    return NoiseModel(sigma_r2=1e-13)


def test_budget_empty_active_set():
    p = CoeffProfile.all_passive(np.zeros(4))
    cfg = SurfaceConfig(n_elements=4, n_active_chains=0, active_power_budget=1e-3)
    rep = budget_check(p, np.ones(4), _noise(), cfg)
    assert rep == BudgetReport(feasible=True, total_active_power=0.0)


def test_budget_two_elements_sum():
    noise = NoiseModel(sigma_r2=0.0, sigma_si2_surface=0.0)
    s = np.array([1.0, 1.0])
    # alpha^2 * s = 0.4 mW each
    a = math.sqrt(4e-4)
    p = CoeffProfile(
        amplitudes=np.array([a, a]), phases=np.zeros(2), active_set=(0, 1)
    )
    cfg = SurfaceConfig(n_elements=2, n_active_chains=2, active_power_budget=1e-3)
    rep = budget_check(p, s, noise, cfg)
    assert rep.feasible
    assert rep.total_active_power == pytest.approx(8e-4)


def test_budget_propagates_unstable_loop():
    noise = NoiseModel(sigma_si2_surface=0.25, sigma_r2=1.0)
    p = CoeffProfile(
        amplitudes=np.array([2.0]), phases=np.zeros(1), active_set=(0,)
    )
    cfg = SurfaceConfig(n_elements=1, n_active_chains=1)
    with pytest.raises(UnstableLoopError):
        budget_check(p, np.ones(1), noise, cfg)


def test_surface_config_default_active_indices():
    cfg = SurfaceConfig(n_elements=10, n_active_chains=3, architecture="fixed")
    assert cfg.active_indices() == (0, 1, 2)


def test_surface_config_rejects_bad_fixed_set():
    with pytest.raises(ValueError):
        SurfaceConfig(
            n_elements=10, n_active_chains=2, architecture="fixed",
            fixed_active_indices=(1, 1),
        )
