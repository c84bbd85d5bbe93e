"""Surface coefficient model: quantized phases, active-element amplification,
and the self-interference feedback loop of an active element.

The surface applies a diagonal coefficient matrix diag(alpha_n * exp(j*theta_n)).
Passive elements have alpha pinned to exactly 1; active elements draw from a
shared output-power budget and amplify their own receiver noise, with the
transmit echo re-entering the element at gain sigma_si2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Relative slack on the budget comparison (floating point headroom only).
BUDGET_REL_TOL = 1e-12


class UnstableLoopError(RuntimeError):
    """The amplification loop gain alpha^2 * sigma_si2 reached or exceeded 1."""


@dataclass(frozen=True)
class PhaseCodebook:
    """The 2^b uniformly spaced phases realizable by a b-bit phase shifter."""

    values: np.ndarray

    @classmethod
    def from_bits(cls, bits: int) -> "PhaseCodebook":
        if bits < 1:
            raise ValueError("phase_bits must be >= 1")
        m = 1 << bits
        return cls(values=np.arange(m) * (TWO_PI / m))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("codebook must be a non-empty vector")
        if not (np.all(np.diff(v) > 0) if len(v) > 1 else True):
            raise ValueError("codebook values must be sorted and distinct")
        if v[0] < 0 or v[-1] >= TWO_PI:
            raise ValueError("codebook values must lie in [0, 2*pi)")
        object.__setattr__(self, "values", v)

    def contains(self, theta: float) -> bool:
        return bool(np.any(self.values == theta))


def quantize_phase(theta: float, book: PhaseCodebook) -> float:
    """Nearest codebook phase in circular distance; ties go to the smaller value."""
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    t = theta % TWO_PI
    best = book.values[0]
    best_d = _circ_dist(t, best)
    for v in book.values[1:]:
        d = _circ_dist(t, v)
        if d < best_d:
            best, best_d = v, d
    return float(best)


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class SurfaceConfig:
    """Element count, active-chain count, architecture, and budgets."""

    n_elements: int = 100
    n_active_chains: int = 4
    architecture: str = "dynamic"  # "fixed" or "dynamic"
    fixed_active_indices: Optional[Tuple[int, ...]] = None  # fixed arch; None = first K
    phase_bits: int = 2
    active_power_budget: float = 1e-3  # watts, total across active elements
    per_element_budget: bool = False  # interpret budget per element instead of total

    def __post_init__(self):
        if not 0 <= self.n_active_chains <= self.n_elements:
            raise ValueError("need 0 <= K <= N")
        if self.architecture not in ("fixed", "dynamic"):
            raise ValueError(f"unknown architecture: {self.architecture!r}")
        if self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1")
        if self.active_power_budget < 0:
            raise ValueError("active_power_budget must be >= 0")
        if self.fixed_active_indices is not None:
            idx = tuple(int(i) for i in self.fixed_active_indices)
            if len(idx) != self.n_active_chains or len(set(idx)) != len(idx):
                raise ValueError("fixed_active_indices must be K distinct indices")
            if any(not 0 <= i < self.n_elements for i in idx):
                raise ValueError("fixed_active_indices out of range")
            object.__setattr__(self, "fixed_active_indices", idx)

    def active_indices(self) -> Tuple[int, ...]:
        """The fixed architecture's active positions (first K by default)."""
        if self.fixed_active_indices is not None:
            return self.fixed_active_indices
        return tuple(range(self.n_active_chains))

    def codebook(self) -> PhaseCodebook:
        return PhaseCodebook.from_bits(self.phase_bits)


@dataclass(frozen=True)
class CoeffProfile:
    """Per-element amplitudes/phases plus the active index set.

    Invariant: amplitude is exactly 1 on every passive element.  Phase
    codebook membership is checked separately (``validate_phases``) because
    the profile does not carry the codebook.
    """

    amplitudes: np.ndarray
    phases: np.ndarray
    active_set: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=float)
        ph = np.asarray(self.phases, dtype=float)
        if amp.shape != ph.shape or amp.ndim != 1:
            raise ValueError("amplitudes and phases must be equal-length vectors")
        if np.any(amp < 0) or not np.isfinite(amp).all():
            raise ValueError("amplitudes must be finite and non-negative")
        if np.any(ph < 0) or np.any(ph >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")
        active = tuple(sorted(int(i) for i in self.active_set))
        if len(set(active)) != len(active):
            raise ValueError("active_set has duplicates")
        if any(not 0 <= i < len(amp) for i in active):
            raise ValueError("active_set index out of range")
        passive = np.ones(len(amp), dtype=bool)
        passive[list(active)] = False
        if np.any(amp[passive] != 1.0):
            raise ValueError("passive elements must have amplitude exactly 1")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "active_set", active)

    @property
    def n_elements(self) -> int:
        return len(self.amplitudes)

    @property
    def coeffs(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)

    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_elements, dtype=bool)
        mask[list(self.active_set)] = True
        return mask

    def validate_phases(self, book: PhaseCodebook) -> None:
        for th in self.phases:
            if not book.contains(float(th)):
                raise ValueError(f"phase {th} is not a codebook member")

    @classmethod
    def all_passive(cls, phases: Sequence[float]) -> "CoeffProfile":
        ph = np.asarray(phases, dtype=float)
        return cls(amplitudes=np.ones_like(ph), phases=ph, active_set=())


def coeff_matrix(p: CoeffProfile) -> np.ndarray:
    """The diagonal coefficient matrix diag(alpha_n * exp(j*theta_n))."""
    return np.diag(p.coeffs)


def element_output_power(
    alpha: float,
    incident_power: float,
    sigma_r2: float,
    sigma_si2: float,
) -> float:
    """Steady-state output power of one active element with a closed SI loop.

    The element retransmits the incident signal plus its own input noise, and
    a fraction sigma_si2 of its output re-enters its input.  The fixed point
    is p = alpha^2 * (s + sigma_r2) / (1 - alpha^2 * sigma_si2).
    """
    loop = alpha * alpha * sigma_si2
    if loop >= 1.0:
        raise UnstableLoopError(
            f"loop gain alpha^2*sigma_si2 = {loop:.3g} >= 1 (unstable amplification loop)"
        )
    return alpha * alpha * (incident_power + sigma_r2) / (1.0 - loop)


def element_noise_weight(
    alpha: float,
    incident_power: float,
    sigma_r2: float,
    sigma_si2: float,
) -> float:
    """Noise + self-interference share of an active element's output power.

    Equals element_output_power minus the relayed-signal part alpha^2 * s.
    """
    loop = alpha * alpha * sigma_si2
    if loop >= 1.0:
        raise UnstableLoopError(
            f"loop gain alpha^2*sigma_si2 = {loop:.3g} >= 1 (unstable amplification loop)"
        )
    return alpha * alpha * (sigma_r2 + loop * incident_power) / (1.0 - loop)


def max_stable_amplitude(
    residual_budget: float,
    incident_power: float,
    sigma_r2: float,
    sigma_si2: float,
) -> float:
    """Largest amplitude whose loop output power stays within the residual budget.

    Solving p(alpha) <= R gives alpha^2 <= R / (s + sigma_r2 + R*sigma_si2),
    which is automatically inside the stable region.
    """
    r = max(residual_budget, 0.0)
    denom = incident_power + sigma_r2 + r * sigma_si2
    if denom <= 0.0:
        return 0.0
    return math.sqrt(r / denom)


@dataclass(frozen=True)
class BudgetReport:
    feasible: bool
    total_active_power: float


def budget_check(
    p: CoeffProfile,
    incident_powers: np.ndarray,
    noise,  # NoiseModel; typed loosely to avoid a circular import
    cfg: SurfaceConfig,
) -> BudgetReport:
    """Sum active output powers and compare against the configured budget."""
    total = 0.0
    per_element_ok = True
    for n in p.active_set:
        pw = element_output_power(
            float(p.amplitudes[n]),
            float(incident_powers[n]),
            noise.sigma_r2,
            noise.sigma_si2_surface,
        )
        if cfg.per_element_budget:
            limit = cfg.active_power_budget
            per_element_ok &= pw <= limit + BUDGET_REL_TOL * limit
        total += pw
    if cfg.per_element_budget:
        feasible = per_element_ok
    else:
        limit = cfg.active_power_budget
        feasible = total <= limit + BUDGET_REL_TOL * limit
    return BudgetReport(feasible=bool(feasible), total_active_power=total)
