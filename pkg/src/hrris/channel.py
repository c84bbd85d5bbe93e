"""Two-hop channel generation: geometry, path loss, and fading models.

The link is BS -> surface -> MS with no direct path.  Hop 1 (BS to surface)
is LoS-dominated (Rician, optionally pure LoS), hop 2 (surface to MS) is
i.i.d. Rayleigh.  Path loss is embedded in the channel matrices so that
downstream code works in absolute power units (watts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

Point = Tuple[float, float]


@dataclass(frozen=True)
class Geometry:
    """Deployment positions (2D, meters) of BS, MS, and the surface."""

    bs_pos: Point = (0.0, 0.0)
    ms_pos: Point = (100.0, 0.0)
    surface_pos: Point = (95.0, 1.0)

    def __post_init__(self):
        pts = (self.bs_pos, self.ms_pos, self.surface_pos)
        for p in pts:
            if not all(math.isfinite(c) for c in p):
                raise ValueError(f"non-finite coordinate: {p}")
        if len({tuple(p) for p in pts}) != 3:
            raise ValueError("BS, MS, and surface positions must be pairwise distinct")


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss, anchored at a reference distance."""

    ref_loss_db: float = -30.0
    ref_distance: float = 1.0
    exponent_hop1: float = 2.0
    exponent_hop2: float = 2.8

    def __post_init__(self):
        if self.ref_distance <= 0:
            raise ValueError("ref_distance must be positive")
        if self.exponent_hop1 < 0 or self.exponent_hop2 < 0:
            raise ValueError("path loss exponents must be non-negative")


@dataclass(frozen=True)
class FadingSpec:
    """Antenna counts and small-scale fading kinds for the two hops.

    hop1_kind is "rician" (with factor ``rician_kappa_db``) or "pure-los";
    hop2 is always Rayleigh.  ``carrier_spacing`` is the array element
    spacing in wavelengths.
    """

    hop1_kind: str = "rician"
    rician_kappa_db: float = 10.0
    hop2_kind: str = "rayleigh"
    bs_antennas: int = 8
    ms_antennas: int = 2
    surface_elements: int = 100
    carrier_spacing: float = 0.5

    def __post_init__(self):
        if self.hop1_kind not in ("rician", "pure-los"):
            raise ValueError(f"unknown hop1_kind: {self.hop1_kind!r}")
        if self.hop2_kind != "rayleigh":
            raise ValueError(f"unknown hop2_kind: {self.hop2_kind!r}")
        if min(self.bs_antennas, self.ms_antennas, self.surface_elements) < 1:
            raise ValueError("antenna/element counts must be >= 1")
        if not math.isfinite(self.rician_kappa_db):
            raise ValueError("rician_kappa_db must be finite")
        if self.carrier_spacing <= 0:
            raise ValueError("carrier_spacing must be positive")


@dataclass(frozen=True)
class ChannelPair:
    """The two hop matrices, path loss included.

    h1: (N, Nt) BS -> surface.  h2: (Nr, N) surface -> MS.
    """

    h1: np.ndarray
    h2: np.ndarray

    def __post_init__(self):
        if self.h1.ndim != 2 or self.h2.ndim != 2:
            raise ValueError("h1 and h2 must be matrices")
        if self.h1.shape[0] != self.h2.shape[1]:
            raise ValueError(
                f"surface dimension mismatch: h1 {self.h1.shape}, h2 {self.h2.shape}"
            )
        if not (np.isfinite(self.h1).all() and np.isfinite(self.h2).all()):
            raise ValueError("channel entries must be finite")

    @property
    def n_elements(self) -> int:
        return self.h1.shape[0]

    def drop_first_elements(self, k: int) -> "ChannelPair":
        """Sub-surface with the first k elements removed (smaller passive RIS)."""
        if not 0 <= k < self.n_elements:
            raise ValueError(f"cannot drop {k} of {self.n_elements} elements")
        return ChannelPair(self.h1[k:, :], self.h2[:, k:])


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two 2D points."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def path_loss_db(d: float, exponent: float, model: PathLossModel) -> float:
    """Path loss in dB at distance d meters; rejects d inside the reference distance."""
    if d < model.ref_distance:
        raise ValueError(
            f"distance {d} m is inside the reference distance "
            f"{model.ref_distance} m (near field, model invalid)"
        )
    return model.ref_loss_db - 10.0 * exponent * math.log10(d / model.ref_distance)


def path_loss_linear(d: float, exponent: float, model: PathLossModel) -> float:
    return 10.0 ** (path_loss_db(d, exponent, model) / 10.0)


def ula_steering(n: int, angle: float, spacing: float) -> np.ndarray:
    """Uniform-linear-array response for a wave at ``angle`` off broadside."""
    k = np.arange(n)
    return np.exp(2j * np.pi * spacing * k * math.sin(angle))


def _bearing(src: Point, dst: Point) -> float:
    return math.atan2(dst[1] - src[1], dst[0] - src[0])


def gen_hop1(
    spec: FadingSpec,
    geom: Geometry,
    pl: PathLossModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """BS -> surface channel (N, Nt): Rician or pure LoS, path loss embedded.

    The LoS part is the outer product of the ULA steering responses at the
    geometry-derived departure/arrival angles, so it has rank one and
    unit-modulus entries.
    """
    n, nt = spec.surface_elements, spec.bs_antennas
    d = distance(geom.bs_pos, geom.surface_pos)
    amp = math.sqrt(path_loss_linear(d, pl.exponent_hop1, model=pl))

    a_surf = ula_steering(n, _bearing(geom.surface_pos, geom.bs_pos), spec.carrier_spacing)
    a_bs = ula_steering(nt, _bearing(geom.bs_pos, geom.surface_pos), spec.carrier_spacing)
    h_los = np.outer(a_surf, a_bs.conj())

    if spec.hop1_kind == "pure-los":
        return amp * h_los

    kappa = 10.0 ** (spec.rician_kappa_db / 10.0)
    scatter = _circular_gaussian(rng, (n, nt))
    h = math.sqrt(kappa / (1.0 + kappa)) * h_los + math.sqrt(1.0 / (1.0 + kappa)) * scatter
    return amp * h


def gen_hop2(
    spec: FadingSpec,
    geom: Geometry,
    pl: PathLossModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """Surface -> MS channel (Nr, N): i.i.d. Rayleigh, path loss embedded."""
    d = distance(geom.surface_pos, geom.ms_pos)
    amp = math.sqrt(path_loss_linear(d, pl.exponent_hop2, model=pl))
    return amp * _circular_gaussian(rng, (spec.ms_antennas, spec.surface_elements))


def gen_channel_pair(
    spec: FadingSpec,
    geom: Geometry,
    pl: PathLossModel,
    rng_hop1: np.random.Generator,
    rng_hop2: np.random.Generator,
) -> ChannelPair:
    """Draw one realization of both hops from independent seeded streams."""
    return ChannelPair(
        h1=gen_hop1(spec, geom, pl, rng_hop1),
        h2=gen_hop2(spec, geom, pl, rng_hop2),
    )


def _circular_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
