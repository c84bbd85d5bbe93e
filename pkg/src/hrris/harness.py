"""Experiment harness: configuration, seeding, scheme dispatch, CSV output.

One experiment sweeps a set of schemes over the active-chain counts in
``k_values`` for ``trials`` Monte Carlo channel draws.  All randomness is
derived from ``master_seed`` through named SeedSequence streams, so a run
is reproducible bit-for-bit and schemes are paired on identical channels.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import (
    ChannelPair,
    FadingSpec,
    Geometry,
    PathLossModel,
    gen_channel_pair,
)
from .metrics import (
    NoiseModel,
    PowerModel,
    energy_efficiency,
    incident_powers,
    total_power_consumption,
)
from .optimize import (
    AOConfig,
    OptResult,
    optimize_dynamic_hrris,
    optimize_fixed_hrris,
    optimize_passive,
)
from .relay import RelayConfig, relay_experiment
from .surface import SurfaceConfig, budget_check

SCHEMES = ("ris-n", "ris-n-minus-k", "hrris-fixed", "hrris-dynamic", "relay")

# Schemes whose BS power is raised in equal-power mode (the reference scheme
# itself is never adjusted, nor is the other semi-passive architecture).
_EQUAL_POWER_ADJUSTED = ("ris-n", "ris-n-minus-k", "relay")

# SeedSequence stream tags; never renumber, or old results stop reproducing.
_STREAM_HOP1 = 0
_STREAM_HOP2 = 1
_STREAM_RELAY_HOP1 = 2
_STREAM_RELAY_HOP2 = 3
_STREAM_OPT = 4

CSV_HEADER = (
    "scheme,n,k,trial,seed,se_bps_hz,ee_bits_per_joule,p_total_w,"
    "iters,converged,flags"
)
AGG_HEADER = "scheme,n,k,trials,se_mean,se_stderr,ee_mean,ee_stderr,p_total_mean,failed"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one sweep needs; mirrors the JSON config field-for-field."""

    # channel / geometry
    n_elements: int = 100
    bs_antennas: int = 8
    ms_antennas: int = 2
    hop1_kind: str = "rician"
    rician_kappa_db: float = 10.0
    element_spacing: float = 0.5
    bs_pos: Tuple[float, float] = (0.0, 0.0)
    ms_pos: Tuple[float, float] = (100.0, 0.0)
    surface_pos: Tuple[float, float] = (95.0, 1.0)
    ref_loss_db: float = -30.0
    ref_distance: float = 1.0
    exponent_hop1: float = 2.0
    exponent_hop2: float = 2.8
    # noise.  The default bandwidth sets the thermal floor that reproduces the
    # published semi-passive-vs-passive gain (~43% at K=4); narrower bands
    # leave the link SNR-rich and compress the relative gain.
    noise_psd_dbm_hz: float = -170.0
    bandwidth_hz: float = 8e7
    sigma_r2: Optional[float] = None
    sigma_si2_surface: float = 1e-7
    sigma_si2_relay: float = 10.0 ** -9.5
    # power
    bs_tx_power: float = 0.1
    pa_efficiency: float = 0.5
    bs_circuit: float = 1.0
    ms_circuit: float = 0.1
    passive_element_power: float = 5e-3
    active_element_circuit: float = 20e-3
    relay_element_power: float = 100e-3
    active_power_budget: float = 1e-3
    per_element_budget: bool = False
    relay_power: float = 1e-3
    # surface / optimizer
    phase_bits: int = 2
    max_outer_iters: int = 30
    rel_tolerance: float = 1e-4
    amplitude_grid: int = 16
    restarts: int = 0
    init: str = "all-zero-phase"
    # sweep
    schemes: Tuple[str, ...] = SCHEMES
    k_values: Tuple[int, ...] = (1, 4, 10, 20)
    trials: int = 500
    master_seed: int = 1
    equal_power: bool = False

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "bs_pos", tuple(self.bs_pos))
        object.__setattr__(self, "ms_pos", tuple(self.ms_pos))
        object.__setattr__(self, "surface_pos", tuple(self.surface_pos))
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes contains duplicates")
        if not self.k_values:
            raise ValueError("k_values must not be empty")
        for k in self.k_values:
            if not 1 <= k < self.n_elements:
                raise ValueError(f"k = {k} must satisfy 1 <= k < N = {self.n_elements}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.equal_power and self.equal_power_reference() is None:
            raise ValueError(
                "equal-power mode needs hrris-dynamic or hrris-fixed in schemes"
            )

    # -- typed sub-configs ---------------------------------------------------

    def geometry(self) -> Geometry:
        return Geometry(self.bs_pos, self.ms_pos, self.surface_pos)

    def path_loss(self) -> PathLossModel:
        return PathLossModel(
            self.ref_loss_db, self.ref_distance, self.exponent_hop1, self.exponent_hop2
        )

    def fading(self, surface_elements: Optional[int] = None) -> FadingSpec:
        return FadingSpec(
            hop1_kind=self.hop1_kind,
            rician_kappa_db=self.rician_kappa_db,
            bs_antennas=self.bs_antennas,
            ms_antennas=self.ms_antennas,
            surface_elements=surface_elements or self.n_elements,
            carrier_spacing=self.element_spacing,
        )

    def noise(self) -> NoiseModel:
        return NoiseModel(
            noise_psd_dbm_hz=self.noise_psd_dbm_hz,
            bandwidth_hz=self.bandwidth_hz,
            sigma_r2=self.sigma_r2,
            sigma_si2_surface=self.sigma_si2_surface,
            sigma_si2_relay=self.sigma_si2_relay,
        )

    def power(self, bs_tx_power: Optional[float] = None) -> PowerModel:
        return PowerModel(
            bs_tx_power=self.bs_tx_power if bs_tx_power is None else bs_tx_power,
            pa_efficiency=self.pa_efficiency,
            bs_circuit=self.bs_circuit,
            ms_circuit=self.ms_circuit,
            passive_element=self.passive_element_power,
            active_element_circuit=self.active_element_circuit,
            relay_element=self.relay_element_power,
        )

    def ao(self) -> AOConfig:
        return AOConfig(
            max_outer_iters=self.max_outer_iters,
            rel_tolerance=self.rel_tolerance,
            amplitude_grid=self.amplitude_grid,
            restarts=self.restarts,
            init=self.init,
        )

    def surface_config(self, k: int, architecture: str) -> SurfaceConfig:
        return SurfaceConfig(
            n_elements=self.n_elements,
            n_active_chains=k,
            architecture=architecture,
            phase_bits=self.phase_bits,
            active_power_budget=self.active_power_budget,
            per_element_budget=self.per_element_budget,
        )

    def relay_config(self, k: int) -> RelayConfig:
        return RelayConfig(
            n_antennas=k, relay_power=self.relay_power, sigma_si2=self.sigma_si2_relay
        )

    def equal_power_reference(self) -> Optional[str]:
        if "hrris-dynamic" in self.schemes:
            return "hrris-dynamic"
        if "hrris-fixed" in self.schemes:
            return "hrris-fixed"
        return None


def load_experiment_spec(path) -> ExperimentSpec:
    """Strict JSON config loader; any key not in ExperimentSpec is an error."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return ExperimentSpec(**raw)


@dataclass(frozen=True)
class TrialResult:
    """One (scheme, k, trial) row of the sweep."""

    scheme: str
    n: int
    k: int
    trial: int
    seed: int
    se: float
    ee: float
    p_total: float
    iters: int
    converged: bool
    flags: Tuple[str, ...] = ()


@dataclass(frozen=True)
class AggregateRow:
    scheme: str
    n: int
    k: int
    trials: int
    se_mean: float
    se_stderr: float
    ee_mean: float
    ee_stderr: float
    p_total_mean: float
    failed: int


@dataclass
class SweepResult:
    spec: ExperimentSpec
    rows: List[TrialResult]
    aggregates: List[AggregateRow]


# ---------------------------------------------------------------------------
# seeding and channel generation


def _stream(spec: ExperimentSpec, trial: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((spec.master_seed, trial, *tags))
    )


def trial_seed(spec: ExperimentSpec, trial: int) -> int:
    """The per-trial seed recorded in the CSV (derived, not user-chosen)."""
    return int(np.random.SeedSequence((spec.master_seed, trial)).generate_state(1)[0])


def trial_channels(spec: ExperimentSpec, trial: int) -> Tuple[ChannelPair, ChannelPair]:
    """Surface channels (N elements) and relay channels (max(k_values) antennas).

    The relay pair is drawn once at the largest antenna count; smaller relays
    use its leading sub-block, so results are nested across k.
    """
    geom, pl = spec.geometry(), spec.path_loss()
    surface = gen_channel_pair(
        spec.fading(), geom, pl,
        _stream(spec, trial, _STREAM_HOP1),
        _stream(spec, trial, _STREAM_HOP2),
    )
    k_max = max(spec.k_values)
    relay = gen_channel_pair(
        spec.fading(surface_elements=k_max), geom, pl,
        _stream(spec, trial, _STREAM_RELAY_HOP1),
        _stream(spec, trial, _STREAM_RELAY_HOP2),
    )
    return surface, relay


# ---------------------------------------------------------------------------
# per-scheme execution


def _base_total(
    spec: ExperimentSpec,
    scheme: str,
    k: int,
    n_active: Optional[int] = None,
    radiated: Optional[float] = None,
) -> float:
    """Ledger total at the nominal BS power for one scheme/k combination."""
    pm = spec.power()
    n = spec.n_elements
    if scheme == "ris-n":
        return total_power_consumption("ris", n, 0, 0.0, pm)
    if scheme == "ris-n-minus-k":
        return total_power_consumption("ris", n - k, 0, 0.0, pm)
    if scheme == "relay":
        return total_power_consumption("relay", 0, k, spec.relay_power, pm)
    if scheme in ("hrris-fixed", "hrris-dynamic"):
        n_act = k if n_active is None else n_active
        rad = spec.active_power_budget if radiated is None else radiated
        if scheme == "hrris-fixed":
            n_act = k  # hardware is installed whether or not it amplifies
        return total_power_consumption("hrris", n - n_act, n_act, rad, pm)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class _RunOutcome:
    se: float
    iters: int
    converged: bool
    n_active: int
    radiated: float
    flags: Tuple[str, ...]


def _run_surface_scheme(
    spec: ExperimentSpec,
    scheme: str,
    k: int,
    trial: int,
    channels: ChannelPair,
    bs_power: float,
    passive_cache: Dict,
) -> _RunOutcome:
    noise = spec.noise()
    pm = spec.power(bs_power)
    ao = spec.ao()
    flags: List[str] = []

    def passive(pair: ChannelPair, dropped: int) -> OptResult:
        key = (trial, dropped, bs_power)
        if key not in passive_cache:
            cfg = SurfaceConfig(
                n_elements=pair.n_elements,
                n_active_chains=0,
                architecture="fixed",
                phase_bits=spec.phase_bits,
                active_power_budget=0.0,
            )
            rng = _stream(spec, trial, _STREAM_OPT, 0, dropped)
            passive_cache[key] = optimize_passive(pair, cfg, noise, pm, ao, rng)
        return passive_cache[key]

    if scheme == "ris-n":
        res = passive(channels, 0)
        return _RunOutcome(res.se, res.iterations, res.converged, 0, 0.0, ())
    if scheme == "ris-n-minus-k":
        res = passive(channels.drop_first_elements(k), k)
        return _RunOutcome(res.se, res.iterations, res.converged, 0, 0.0, ())

    cfg = spec.surface_config(k, "fixed" if scheme == "hrris-fixed" else "dynamic")
    warm = passive(channels, 0)
    rng = _stream(spec, trial, _STREAM_OPT, SCHEMES.index(scheme), k)
    if scheme == "hrris-fixed":
        res = optimize_fixed_hrris(
            channels, cfg, noise, pm, ao, rng, passive_result=warm
        )
    else:
        res = optimize_dynamic_hrris(
            channels, cfg, noise, pm, ao, rng, passive_result=warm
        )
    if res.diagnostics.get("fell_back_to_passive"):
        flags.append("fell_back_to_passive")
    s = incident_powers(channels.h1, res.q)
    report = budget_check(res.profile, s, noise, cfg)
    if not report.feasible:
        flags.append("budget_violation")
    return _RunOutcome(
        se=res.se,
        iters=res.iterations,
        converged=res.converged,
        n_active=len(res.profile.active_set),
        radiated=report.total_active_power,
        flags=tuple(flags),
    )


def _run_relay_scheme(
    spec: ExperimentSpec,
    k: int,
    relay_channels: ChannelPair,
    bs_power: float,
) -> _RunOutcome:
    pair = ChannelPair(relay_channels.h1[:k, :], relay_channels.h2[:, :k])
    cfg = spec.relay_config(k)
    res, _, _ = relay_experiment(pair, cfg, spec.noise(), spec.power(bs_power))
    return _RunOutcome(res.se, res.iterations, res.converged, k, spec.relay_power, ())


def _execute(
    spec: ExperimentSpec,
    scheme: str,
    k: int,
    trial: int,
    surface: ChannelPair,
    relay: ChannelPair,
    passive_cache: Dict,
    bs_power: float,
    raw_increment: float,
    extra_flags: Tuple[str, ...],
) -> TrialResult:
    seed = trial_seed(spec, trial)
    try:
        if scheme == "relay":
            out = _run_relay_scheme(spec, k, relay, bs_power)
        else:
            out = _run_surface_scheme(
                spec, scheme, k, trial, surface, bs_power, passive_cache
            )
        total = _base_total(spec, scheme, k, out.n_active, out.radiated) + raw_increment
        ee = energy_efficiency(out.se, spec.bandwidth_hz, total)
        return TrialResult(
            scheme=scheme, n=spec.n_elements, k=k, trial=trial, seed=seed,
            se=out.se, ee=ee, p_total=total, iters=out.iters,
            converged=out.converged, flags=extra_flags + out.flags,
        )
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return TrialResult(
            scheme=scheme, n=spec.n_elements, k=k, trial=trial, seed=seed,
            se=math.nan, ee=math.nan, p_total=math.nan, iters=0, converged=False,
            flags=extra_flags + (f"failed:{type(exc).__name__}",),
        )


# ---------------------------------------------------------------------------
# equal-power mode


@dataclass(frozen=True)
class EqualPowerPlan:
    """BS power adjustment handed to one non-reference scheme."""

    scheme: str
    k: int
    bs_tx_power: float
    increment: float  # watts, added raw to both BS power and the ledger total
    total: float
    floored: bool


def _equal_power_plan(
    spec: ExperimentSpec, scheme: str, k: int, ref_total: float
) -> EqualPowerPlan:
    base = _base_total(spec, scheme, k)
    inc = ref_total - base
    bs = spec.bs_tx_power + inc
    floored = bs < 0.0
    if floored:
        inc = -spec.bs_tx_power
        bs = 0.0
    return EqualPowerPlan(scheme, k, bs, inc, base + inc, floored)


def apply_equal_power_mode(spec: ExperimentSpec) -> Dict[int, Dict[str, EqualPowerPlan]]:
    """Nominal equal-power preview, one plan per (k, adjusted scheme).

    The reference total assumes the surface radiates its full budget (and the
    dynamic architecture fills all K chains); inside a sweep the adjustment is
    recomputed per trial from the reference scheme's realized total.
    """
    ref = spec.equal_power_reference()
    if ref is None:
        raise ValueError("no reference scheme: include hrris-dynamic or hrris-fixed")
    plans: Dict[int, Dict[str, EqualPowerPlan]] = {}
    for k in spec.k_values:
        ref_total = _base_total(spec, ref, k)
        plans[k] = {
            s: _equal_power_plan(spec, s, k, ref_total)
            for s in spec.schemes
            if s in _EQUAL_POWER_ADJUSTED
        }
    return plans


# ---------------------------------------------------------------------------
# sweep driver


def run_trial(spec: ExperimentSpec, scheme: str, k: int, trial: int) -> TrialResult:
    """One scheme at one sweep point, at the nominal BS power.

    Equal-power adjustments are applied only by ``run_sweep``, which knows
    the reference scheme's realized total for the trial.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    surface, relay = trial_channels(spec, trial)
    return _execute(
        spec, scheme, k, trial, surface, relay, {}, spec.bs_tx_power, 0.0, ()
    )


def run_sweep(
    spec: ExperimentSpec,
    progress: Optional[Callable[[str], None]] = None,
) -> SweepResult:
    """Run every (scheme, k, trial) point and aggregate per (scheme, k).

    Failed trials become rows flagged ``failed:<error>`` with NaN metrics and
    are excluded from (but counted next to) the aggregates.
    """
    rows: List[TrialResult] = []
    ref = spec.equal_power_reference() if spec.equal_power else None
    for trial in range(spec.trials):
        surface, relay = trial_channels(spec, trial)
        passive_cache: Dict = {}
        for k in spec.k_values:
            ordered = list(spec.schemes)
            if ref is not None:
                ordered.remove(ref)
                ordered.insert(0, ref)
            ref_total: Optional[float] = None
            for scheme in ordered:
                bs_power, inc, flags = spec.bs_tx_power, 0.0, ()
                if ref is not None and scheme in _EQUAL_POWER_ADJUSTED:
                    if ref_total is None:
                        raise RuntimeError("reference scheme failed; cannot equalize")
                    plan = _equal_power_plan(spec, scheme, k, ref_total)
                    bs_power, inc = plan.bs_tx_power, plan.increment
                    if plan.floored:
                        flags = ("bs_power_floored",)
                row = _execute(
                    spec, scheme, k, trial, surface, relay, passive_cache,
                    bs_power, inc, flags,
                )
                rows.append(row)
                if scheme == ref and math.isfinite(row.p_total):
                    ref_total = row.p_total
        if progress is not None:
            progress(f"trial {trial + 1}/{spec.trials} done")
    rows.sort(key=lambda r: (r.scheme, r.k, r.trial))
    return SweepResult(spec=spec, rows=rows, aggregates=aggregate(spec, rows))


def aggregate(spec: ExperimentSpec, rows: Sequence[TrialResult]) -> List[AggregateRow]:
    groups: Dict[Tuple[str, int], List[TrialResult]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.k), []).append(r)
    out = []
    for (scheme, k) in sorted(groups):
        grp = groups[(scheme, k)]
        ok = [r for r in grp if math.isfinite(r.se)]
        se = np.array([r.se for r in ok])
        ee = np.array([r.ee for r in ok])
        pt = np.array([r.p_total for r in ok])
        n_ok = len(ok)

        def stderr(x: np.ndarray) -> float:
            if len(x) < 2:
                return 0.0
            return float(x.std(ddof=1) / math.sqrt(len(x)))

        out.append(AggregateRow(
            scheme=scheme, n=spec.n_elements, k=k, trials=n_ok,
            se_mean=float(se.mean()) if n_ok else math.nan,
            se_stderr=stderr(se),
            ee_mean=float(ee.mean()) if n_ok else math.nan,
            ee_stderr=stderr(ee),
            p_total_mean=float(pt.mean()) if n_ok else math.nan,
            failed=len(grp) - n_ok,
        ))
    return out


# ---------------------------------------------------------------------------
# output


def write_results(result: SweepResult, path) -> Tuple[Path, Path]:
    """Write per-trial rows to ``path`` and aggregates to ``path`` with the
    suffix replaced by ``.agg.csv``.  Floats use repr (shortest round-trip),
    so identical runs produce byte-identical files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER.split(","))
        for r in result.rows:
            w.writerow([
                r.scheme, r.n, r.k, r.trial, r.seed,
                repr(float(r.se)), repr(float(r.ee)), repr(float(r.p_total)),
                r.iters, int(r.converged), ";".join(r.flags),
            ])
    agg_path = path.with_suffix(".agg.csv")
    with open(agg_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AGG_HEADER.split(","))
        for a in result.aggregates:
            w.writerow([
                a.scheme, a.n, a.k, a.trials,
                repr(a.se_mean), repr(a.se_stderr),
                repr(a.ee_mean), repr(a.ee_stderr),
                repr(a.p_total_mean), a.failed,
            ])
    return path, agg_path
