"""Alternating optimization of surface coefficients and the BS covariance.

The coordinate sweep (see ``hrris.kernels``) improves one element at a time
with the incumbent always among the candidates; the transmit covariance is
refreshed by a guarded water-filling step that keeps the previous covariance
whenever the candidate would lower the self-consistent spectral efficiency.
Both pieces are monotone, so every optimizer trace is non-decreasing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .channel import ChannelPair
from .metrics import (
    NoiseModel,
    PowerModel,
    incident_powers,
    noise_covariance,
    se_from_parts,
    spectral_efficiency,
    water_filling,
)
from .surface import (
    CoeffProfile,
    PhaseCodebook,
    SurfaceConfig,
    element_noise_weight,
    element_output_power,
    max_stable_amplitude,
)


class SearchSpaceTooLarge(ValueError):
    """The brute-force search space exceeds the configured evaluation cap."""


@dataclass(frozen=True)
class AOConfig:
    """Loop controls for the alternating optimizer."""

    max_outer_iters: int = 30
    rel_tolerance: float = 1e-4
    amplitude_grid: int = 16
    restarts: int = 0
    init: str = "all-zero-phase"  # or "random-phase"

    def __post_init__(self):
        if self.rel_tolerance <= 0:
            raise ValueError("rel_tolerance must be positive")
        if self.amplitude_grid < 2:
            raise ValueError("amplitude_grid must be >= 2")
        if self.init not in ("all-zero-phase", "random-phase"):
            raise ValueError(f"unknown init mode: {self.init!r}")
        if self.max_outer_iters < 1 or self.restarts < 0:
            raise ValueError("max_outer_iters >= 1 and restarts >= 0 required")


@dataclass
class OptResult:
    """Converged profile, covariance, and the per-iteration objective trace."""

    profile: CoeffProfile
    q: np.ndarray
    se: float
    trace: List[float]
    converged: bool
    iterations: int
    diagnostics: Dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# internal machinery


def _se_arrays(
    h1: np.ndarray,
    h2: np.ndarray,
    alphas: np.ndarray,
    thetas: np.ndarray,
    amp_mask: np.ndarray,
    q: np.ndarray,
    noise: NoiseModel,
) -> float:
    """Canonical self-consistent SE without building a CoeffProfile."""
    s = incident_powers(h1, q)
    nr = h2.shape[0]
    c = noise.sigma2 * np.eye(nr, dtype=complex)
    for n in np.flatnonzero(amp_mask):
        w = element_noise_weight(
            float(alphas[n]), float(s[n]), noise.sigma_r2, noise.sigma_si2_surface
        )
        col = h2[:, n]
        c += w * np.outer(col, col.conj())
    g = (h2 * (alphas * np.exp(1j * thetas))[np.newaxis, :]) @ h1
    return se_from_parts(g, q, c)


def _factor_cov(q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """F with q = F F^H, columns restricted to numerically nonzero modes."""
    w, v = np.linalg.eigh(q)
    w = np.clip(w.real, 0.0, None)
    top = w.max(initial=0.0)
    keep = w > top * tol
    if not keep.any():
        return np.zeros((q.shape[0], 1), dtype=complex)
    return v[:, keep] * np.sqrt(w[keep])


def _uniform_cov(nt: int, power: float) -> np.ndarray:
    return (power / nt) * np.eye(nt, dtype=complex)


def _guarded_step(
    h1: np.ndarray,
    h2: np.ndarray,
    alphas: np.ndarray,
    thetas: np.ndarray,
    amp_mask: np.ndarray,
    q: np.ndarray,
    se_now: float,
    power: float,
    noise: NoiseModel,
) -> Tuple[np.ndarray, float, bool]:
    s = incident_powers(h1, q)
    nr = h2.shape[0]
    c = noise.sigma2 * np.eye(nr, dtype=complex)
    for n in np.flatnonzero(amp_mask):
        w = element_noise_weight(
            float(alphas[n]), float(s[n]), noise.sigma_r2, noise.sigma_si2_surface
        )
        col = h2[:, n]
        c += w * np.outer(col, col.conj())
    g = (h2 * (alphas * np.exp(1j * thetas))[np.newaxis, :]) @ h1
    cand = water_filling(g, c, power)
    se_cand = _se_arrays(h1, h2, alphas, thetas, amp_mask, cand.q, noise)
    if se_cand >= se_now:
        return cand.q, se_cand, True
    return q, se_now, False


def guarded_q_update(
    h1: np.ndarray,
    h2: np.ndarray,
    profile: CoeffProfile,
    q: np.ndarray,
    power: float,
    noise: NoiseModel,
) -> Tuple[np.ndarray, float, bool]:
    """Water-fill against the profile-induced noise covariance; accept the
    candidate only if the self-consistent SE does not decrease.

    Returns (q, se, accepted)."""
    mask = profile.active_mask()
    se_now = spectral_efficiency(h1, h2, profile, q, noise)
    return _guarded_step(
        h1, h2, profile.amplitudes, profile.phases, mask, q, se_now, power, noise
    )


def _equal_split_alphas(
    s: np.ndarray,
    amp_mask: np.ndarray,
    noise: NoiseModel,
    budget: float,
) -> np.ndarray:
    """Amplitudes that split the output-power budget evenly across the
    amplitude-free elements (a hog-free starting point for the sweep)."""
    alphas = np.ones(len(s))
    idx = np.flatnonzero(amp_mask)
    if len(idx) == 0 or budget <= 0.0:
        alphas[idx] = 1.0 if budget > 0.0 else 0.0
        return alphas
    share = budget / len(idx)
    for n in idx:
        alphas[n] = max_stable_amplitude(
            share, float(s[n]), noise.sigma_r2, noise.sigma_si2_surface
        )
    return alphas


@dataclass
class _AOState:
    alphas: np.ndarray
    thetas: np.ndarray
    q: np.ndarray
    se: float
    trace: List[float]
    converged: bool
    iterations: int


def _ao_run(
    h1: np.ndarray,
    h2: np.ndarray,
    book: PhaseCodebook,
    noise: NoiseModel,
    power: float,
    budget: float,
    ao: AOConfig,
    amp_mask: np.ndarray,
    thetas0: np.ndarray,
    alphas0: np.ndarray,
    q0: Optional[np.ndarray] = None,
) -> _AOState:
    uT = np.ascontiguousarray(h2.T, dtype=complex)
    alphas = np.ascontiguousarray(alphas0, dtype=float).copy()
    thetas = np.ascontiguousarray(thetas0, dtype=float).copy()
    mask_u8 = np.ascontiguousarray(amp_mask, dtype=np.uint8)
    codebook = np.ascontiguousarray(book.values, dtype=float)

    if q0 is None:
        q = _uniform_cov(h1.shape[1], power)
        q, se_now, _ = _guarded_step(
            h1, h2, alphas, thetas, amp_mask, q,
            _se_arrays(h1, h2, alphas, thetas, amp_mask, q, noise),
            power, noise,
        )
    else:
        q = q0
        se_now = _se_arrays(h1, h2, alphas, thetas, amp_mask, q, noise)

    trace = [se_now]
    converged = False
    iters = 0
    for _ in range(ao.max_outer_iters):
        iters += 1
        f = _factor_cov(q)
        rows = np.ascontiguousarray(h1 @ f, dtype=complex)
        s = np.ascontiguousarray((np.abs(rows) ** 2).sum(axis=1), dtype=float)
        kernels.sweep(
            uT, rows, s, alphas, thetas, mask_u8, codebook,
            noise.sigma2, noise.sigma_r2, noise.sigma_si2_surface,
            budget, ao.amplitude_grid,
        )
        se_now = _se_arrays(h1, h2, alphas, thetas, amp_mask, q, noise)
        q, se_now, _ = _guarded_step(
            h1, h2, alphas, thetas, amp_mask, q, se_now, power, noise
        )
        gain = se_now - trace[-1]
        trace.append(se_now)
        if gain <= ao.rel_tolerance * max(trace[-2], 1e-12):
            converged = True
            break
    return _AOState(alphas, thetas, q, trace[-1], trace, converged, iters)


def _init_thetas(
    n: int, book: PhaseCodebook, mode: str, rng: np.random.Generator
) -> np.ndarray:
    if mode == "all-zero-phase":
        return np.zeros(n)
    return book.values[rng.integers(0, len(book.values), size=n)]


def _state_to_result(
    state: _AOState, amp_mask: np.ndarray, extra: Optional[Dict] = None
) -> OptResult:
    active = tuple(int(i) for i in np.flatnonzero(amp_mask))
    profile = CoeffProfile(
        amplitudes=state.alphas, phases=state.thetas, active_set=active
    )
    return OptResult(
        profile=profile,
        q=state.q,
        se=state.se,
        trace=state.trace,
        converged=state.converged,
        iterations=state.iterations,
        diagnostics=dict(extra or {}),
    )


def _passive_run(
    channels: ChannelPair,
    book: PhaseCodebook,
    noise: NoiseModel,
    power: float,
    ao: AOConfig,
    rng: np.random.Generator,
) -> OptResult:
    n = channels.n_elements
    mask = np.zeros(n, dtype=bool)
    best: Optional[_AOState] = None
    for r in range(ao.restarts + 1):
        mode = ao.init if r == 0 else "random-phase"
        thetas0 = _init_thetas(n, book, mode, rng)
        state = _ao_run(
            channels.h1, channels.h2, book, noise, power, 0.0, ao,
            mask, thetas0, np.ones(n),
        )
        if best is None or state.se > best.se:
            best = state
    return _state_to_result(best, mask)


# ---------------------------------------------------------------------------
# public optimizers


def optimize_passive(
    channels: ChannelPair,
    cfg: SurfaceConfig,
    noise: NoiseModel,
    pm: PowerModel,
    ao: AOConfig,
    rng: Optional[np.random.Generator] = None,
) -> OptResult:
    """Coordinate ascent over codebook phases for a fully passive surface."""
    if cfg.n_active_chains != 0:
        raise ValueError("optimize_passive requires K = 0")
    rng = rng if rng is not None else np.random.default_rng(0)
    return _passive_run(
        channels, cfg.codebook(), noise, pm.bs_tx_power, ao, rng
    )


def optimize_fixed_hrris(
    channels: ChannelPair,
    cfg: SurfaceConfig,
    noise: NoiseModel,
    pm: PowerModel,
    ao: AOConfig,
    rng: Optional[np.random.Generator] = None,
    passive_result: Optional[OptResult] = None,
) -> OptResult:
    """Semi-passive optimization with a predefined active index set.

    The first start is warm: passive phases and covariance with the budget
    split evenly across the active elements.  The passive solution remains a
    valid configuration (active chains off), so the returned SE never falls
    below it.  With K = 0 or a zero budget the active elements are
    deactivated and the result is exactly the passive one.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    book = cfg.codebook()
    indices = cfg.active_indices()
    if len(indices) == 0 or cfg.active_power_budget == 0.0:
        # Zero chains or zero budget: the actives reflect passively, and the
        # result reduces exactly to the passive optimizer (same rng stream).
        if passive_result is None:
            passive_result = _passive_run(
                channels, book, noise, pm.bs_tx_power, ao, rng
            )
        passive_result.diagnostics["reduced_to_passive"] = True
        return passive_result
    rng_passive, rng_active = rng.spawn(2)
    if passive_result is None:
        passive_result = _passive_run(
            channels, book, noise, pm.bs_tx_power, ao, rng_passive
        )

    n = channels.n_elements
    mask = np.zeros(n, dtype=bool)
    mask[list(indices)] = True
    budget = cfg.active_power_budget
    if cfg.per_element_budget:
        budget = cfg.active_power_budget * len(indices)

    s_warm = incident_powers(channels.h1, passive_result.q)
    best: Optional[_AOState] = None
    for r in range(ao.restarts + 1):
        if r == 0:
            thetas0 = passive_result.profile.phases
            alphas0 = _equal_split_alphas(s_warm, mask, noise, budget)
            q0 = passive_result.q
        else:
            thetas0 = _init_thetas(n, book, "random-phase", rng_active)
            s0 = incident_powers(channels.h1, _uniform_cov(channels.h1.shape[1], pm.bs_tx_power))
            alphas0 = _equal_split_alphas(s0, mask, noise, budget)
            q0 = None
        state = _ao_run(
            channels.h1, channels.h2, book, noise, pm.bs_tx_power, budget,
            ao, mask, thetas0, alphas0, q0,
        )
        if best is None or state.se > best.se:
            best = state
    if passive_result.se > best.se:
        out = _state_to_result(
            _AOState(
                passive_result.profile.amplitudes.copy(),
                passive_result.profile.phases.copy(),
                passive_result.q,
                passive_result.se,
                list(passive_result.trace),
                passive_result.converged,
                passive_result.iterations,
            ),
            np.zeros(n, dtype=bool),
            {"fell_back_to_passive": True},
        )
        return out
    return _state_to_result(best, mask, {"passive_se": passive_result.se})


def select_active_elements(
    amplitudes: Sequence[float],
    k: int,
    scores: Optional[Sequence[float]] = None,
) -> Tuple[int, ...]:
    """Dynamic activation rule: only elements whose optimized amplitude
    exceeds unity qualify; at most k are kept, ranked by ``scores`` when
    given (SE contribution) and by amplitude otherwise.  Ties prefer the
    lower element index."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    rank = np.asarray(scores, dtype=float) if scores is not None else amplitudes
    candidates = [n for n in range(len(amplitudes)) if amplitudes[n] > 1.0]
    candidates.sort(key=lambda n: (-rank[n], n))
    return tuple(sorted(candidates[:k]))


def optimize_dynamic_hrris(
    channels: ChannelPair,
    cfg: SurfaceConfig,
    noise: NoiseModel,
    pm: PowerModel,
    ao: AOConfig,
    rng: Optional[np.random.Generator] = None,
    passive_result: Optional[OptResult] = None,
) -> OptResult:
    """Dynamic architecture: relax all elements to amplitude-free under the
    total budget, activate the best amplified elements (at most K chains),
    then re-optimize on the selected set.

    Phase 1 splits the budget evenly over all N elements, so the relaxed
    amplitudes are untainted by sweep-order budget grabbing; the selection
    ranks qualifying elements by their SE contribution in the relaxed
    solution.  If nothing qualifies the surface degenerates to passive."""
    if cfg.n_active_chains < 1:
        raise ValueError("dynamic optimization requires K >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    book = cfg.codebook()
    n = channels.n_elements
    budget = cfg.active_power_budget
    if cfg.per_element_budget:
        budget = cfg.active_power_budget * cfg.n_active_chains
    if passive_result is None:
        passive_result = _passive_run(
            channels, book, noise, pm.bs_tx_power, ao, rng
        )
    if budget == 0.0:
        passive_result.diagnostics["reduced_to_passive"] = True
        return passive_result

    # Phase 1: every element amplitude-free under the shared budget.
    all_mask = np.ones(n, dtype=bool)
    s_warm = incident_powers(channels.h1, passive_result.q)
    relaxed = _ao_run(
        channels.h1, channels.h2, book, noise, pm.bs_tx_power, budget, ao,
        all_mask, passive_result.profile.phases,
        _equal_split_alphas(s_warm, all_mask, noise, budget),
        passive_result.q,
    )

    # Per-element SE contribution of the amplification (drop to passive).
    scores = np.zeros(n)
    for m in np.flatnonzero(relaxed.alphas > 1.0):
        a_drop = relaxed.alphas.copy()
        a_drop[m] = 1.0
        m_drop = all_mask.copy()
        m_drop[m] = False
        scores[m] = relaxed.se - _se_arrays(
            channels.h1, channels.h2, a_drop, relaxed.thetas, m_drop,
            relaxed.q, noise,
        )

    selected = select_active_elements(relaxed.alphas, cfg.n_active_chains, scores)
    diag = {
        "relaxed_trace": relaxed.trace,
        "relaxed_iterations": relaxed.iterations,
        "selected": selected,
        "passive_se": passive_result.se,
    }
    if not selected:
        passive_result.diagnostics.update(diag)
        return passive_result

    # Phase 3: fixed-style re-optimization on the selected set, warm-started
    # from the projected relaxed solution.
    mask = np.zeros(n, dtype=bool)
    mask[list(selected)] = True
    # Re-split the full budget evenly over the selected set: the relaxed
    # amplitudes only carry 1/N shares each, and starting that far under
    # budget lets the first swept element hog the entire residual.
    s_sel = incident_powers(channels.h1, relaxed.q)
    alphas0 = _equal_split_alphas(s_sel, mask, noise, budget)
    final = _ao_run(
        channels.h1, channels.h2, book, noise, pm.bs_tx_power, budget, ao,
        mask, relaxed.thetas, alphas0, relaxed.q,
    )
    if passive_result.se > final.se:
        passive_result.diagnostics.update(diag)
        passive_result.diagnostics["fell_back_to_passive"] = True
        return passive_result
    result = _state_to_result(final, mask, diag)
    result.iterations += relaxed.iterations
    return result


def brute_force_oracle(
    channels: ChannelPair,
    cfg: SurfaceConfig,
    noise: NoiseModel,
    pm: PowerModel,
    amp_grid: int = 16,
    max_points: int = 10_000_000,
    q_iters: int = 5,
) -> OptResult:
    """Exhaustive search over the phase codebook (and an amplitude grid on
    the active indices) for validation at desk scale.

    For each candidate profile the BS covariance is obtained by the same
    guarded water-filling iteration the optimizers use, so the objective is
    directly comparable.  Budget-infeasible grid points are skipped."""
    book = cfg.codebook()
    n = channels.n_elements
    indices = cfg.active_indices()
    k = len(indices)
    n_phase = len(book.values) ** n
    n_amp = amp_grid ** k if k else 1
    if n_phase * n_amp > max_points:
        raise SearchSpaceTooLarge(
            f"{n_phase} x {n_amp} exceeds the {max_points:.0e} evaluation cap"
        )

    h1, h2 = channels.h1, channels.h2
    power = pm.bs_tx_power
    budget = cfg.active_power_budget
    s_probe = incident_powers(h1, _uniform_cov(h1.shape[1], power))
    mask = np.zeros(n, dtype=bool)
    mask[list(indices)] = True

    amp_axes = []
    for idx in indices:
        a_max = max_stable_amplitude(
            budget, float(s_probe[idx]), noise.sigma_r2, noise.sigma_si2_surface
        )
        amp_axes.append(np.linspace(0.0, a_max, amp_grid))

    best_se = -1.0
    best = None
    evaluated = 0
    for phase_idx in itertools.product(range(len(book.values)), repeat=n):
        thetas = book.values[list(phase_idx)]
        for amps in itertools.product(*amp_axes) if k else [()]:
            alphas = np.ones(n)
            total = 0.0
            for idx, a in zip(indices, amps):
                alphas[idx] = a
                total += element_output_power(
                    a, float(s_probe[idx]), noise.sigma_r2, noise.sigma_si2_surface
                )
            if total > budget * (1.0 + 1e-12):
                continue
            evaluated += 1
            q = _uniform_cov(h1.shape[1], power)
            se = _se_arrays(h1, h2, alphas, thetas, mask, q, noise)
            for _ in range(q_iters):
                q, se, accepted = _guarded_step(
                    h1, h2, alphas, thetas, mask, q, se, power, noise
                )
                if not accepted:
                    break
            if se > best_se:
                best_se = se
                best = (alphas, thetas, q)
    alphas, thetas, q = best
    state = _AOState(alphas, thetas, q, best_se, [best_se], True, evaluated)
    return _state_to_result(state, mask, {"evaluations": evaluated})
