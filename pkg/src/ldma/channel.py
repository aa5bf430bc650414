"""Array response vectors and stochastic multipath channel synthesis.

Far-field responses (beam steering vectors) depend on angle only; near-field
responses (beam focusing vectors) depend on both angle and range. Multipath
channels follow a Rician model: one line-of-sight path plus L non-line-of-sight
paths with the power split kappa/(kappa+1) vs 1/(kappa+1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ArrayConfig,
    Location,
    element_distance_exact,
    element_distance_second_order,
)

DISTANCE_MODES = ("exact", "second_order", "first_order")


def steering_vector(cfg: ArrayConfig, angle: float) -> np.ndarray:
    """Far-field array response for a plane wave from ``angle``.

    Entry n is exp(j k n d sin(angle)) / sqrt(N) over centered indices, so the
    vector has unit norm and the center element carries zero phase.
    """
    n = cfg.element_indices()
    phase = cfg.wavenumber * cfg.element_spacing * np.sin(angle) * n
    return np.exp(1j * phase) / np.sqrt(cfg.num_antennas)


def focusing_vector(cfg: ArrayConfig, loc: Location, distance_mode: str = "exact") -> np.ndarray:
    """Near-field array response focusing energy at ``loc``.

    Entry n is exp(-j k (r_n - r)) / sqrt(N) where r_n is the distance from
    element n to the focal point. ``distance_mode`` selects the exact
    per-element distance or its quadratic approximation; ``first_order``
    truncates the distance to the linear term, which reduces the response to
    the plain steering vector (kept for validating that degeneration).
    """
    if distance_mode not in DISTANCE_MODES:
        raise ValueError(f"distance_mode must be one of {DISTANCE_MODES}, got {distance_mode!r}")
    n = cfg.element_indices()
    if distance_mode == "first_order":
        # r_n - r = -n d sin(phi): the quadratic term is dropped entirely.
        phase = cfg.wavenumber * cfg.element_spacing * np.sin(loc.angle) * n
        return np.exp(1j * phase) / np.sqrt(cfg.num_antennas)
    if distance_mode == "exact":
        rn = element_distance_exact(loc, n, cfg)
    else:
        rn = element_distance_second_order(loc, n, cfg)
    return np.exp(-1j * cfg.wavenumber * (rn - loc.distance)) / np.sqrt(cfg.num_antennas)


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: complex gain plus its source point.

    ``distance is None`` marks a far-field path (plane wave, angle only);
    otherwise the path radiates from the given (distance, angle) point.
    """

    gain: complex
    angle: float
    distance: float | None = None

    def response(self, cfg: ArrayConfig, distance_mode: str = "exact") -> np.ndarray:
        if self.distance is None:
            return steering_vector(cfg, self.angle)
        return focusing_vector(cfg, Location(self.distance, self.angle), distance_mode)


@dataclass(frozen=True)
class ScatterRegion:
    """Rectangle in (distance, angle) from which NLoS scatterers are drawn."""

    r_min: float
    r_max: float
    angle_min: float
    angle_max: float

    def __post_init__(self):
        if not (0 < self.r_min <= self.r_max):
            raise ValueError(f"need 0 < r_min <= r_max, got [{self.r_min}, {self.r_max}]")
        if not (-np.pi / 2 < self.angle_min <= self.angle_max < np.pi / 2):
            raise ValueError(
                f"angle range must sit inside (-pi/2, pi/2), got [{self.angle_min}, {self.angle_max}]"
            )

    def sample(self, rng: np.random.Generator, size: int):
        """Uniform draws in distance and in angle."""
        r = rng.uniform(self.r_min, self.r_max, size)
        a = rng.uniform(self.angle_min, self.angle_max, size)
        return r, a


@dataclass(frozen=True)
class ChannelRealization:
    """A user channel vector together with the paths that generated it."""

    h: np.ndarray
    paths: tuple[PathComponent, ...]
    num_nlos: int
    model_tag: str  # "far" or "near"


def channel_from_paths(cfg: ArrayConfig, paths, model_tag: str) -> ChannelRealization:
    """Assemble h = sqrt(N) a0 v0 + sqrt(N/L) sum_l a_l v_l from path components.

    ``paths[0]`` is the LoS component; the remaining entries are NLoS.
    """
    if model_tag not in ("far", "near"):
        raise ValueError(f"model_tag must be 'far' or 'near', got {model_tag!r}")
    paths = tuple(paths)
    if not paths:
        raise ValueError("at least the LoS path component is required")
    for p in paths:
        if model_tag == "far" and p.distance is not None:
            raise ValueError("far-field paths must have distance=None")
        if model_tag == "near" and p.distance is None:
            raise ValueError("near-field paths require a finite distance")
    n_ant = cfg.num_antennas
    los = paths[0]
    h = np.sqrt(n_ant) * los.gain * los.response(cfg)
    nlos = paths[1:]
    if nlos:
        scale = np.sqrt(n_ant / len(nlos))
        for p in nlos:
            h = h + scale * p.gain * p.response(cfg)
    return ChannelRealization(h=h, paths=paths, num_nlos=len(nlos), model_tag=model_tag)


def complex_normal(rng: np.random.Generator, variance: float, size=None):
    """Circularly symmetric complex Gaussian draws with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _rician_variances(num_nlos: int, rician_factor: float):
    if num_nlos < 0:
        raise ValueError(f"num_nlos must be >= 0, got {num_nlos}")
    if rician_factor < 0:
        raise ValueError(f"rician_factor must be >= 0, got {rician_factor}")
    if num_nlos == 0 and rician_factor == 0:
        raise ValueError("num_nlos = 0 with rician_factor = 0 leaves the channel with no power")
    los_var = rician_factor / (rician_factor + 1.0)
    nlos_var = 1.0 / (rician_factor + 1.0)
    return los_var, nlos_var


def sample_far_channel(
    cfg: ArrayConfig,
    los_angle: float,
    num_nlos: int,
    rician_factor: float,
    rng: np.random.Generator,
    nlos_angle_range: tuple[float, float] = (-np.pi / 3, np.pi / 3),
) -> ChannelRealization:
    """Draw one far-field Rician channel; NLoS angles are uniform in the sector."""
    los_var, nlos_var = _rician_variances(num_nlos, rician_factor)
    los = PathComponent(gain=complex(complex_normal(rng, los_var)), angle=float(los_angle))
    paths = [los]
    for _ in range(num_nlos):
        angle = float(rng.uniform(*nlos_angle_range))
        paths.append(PathComponent(gain=complex(complex_normal(rng, nlos_var)), angle=angle))
    return channel_from_paths(cfg, paths, "far")


def sample_near_channel(
    cfg: ArrayConfig,
    los_location: Location,
    num_nlos: int,
    rician_factor: float,
    scatter_region: ScatterRegion,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one near-field Rician channel; scatterers are uniform over the region."""
    los_var, nlos_var = _rician_variances(num_nlos, rician_factor)
    los = PathComponent(
        gain=complex(complex_normal(rng, los_var)),
        angle=los_location.angle,
        distance=los_location.distance,
    )
    paths = [los]
    if num_nlos:
        radii, angles = scatter_region.sample(rng, num_nlos)
        for r, a in zip(radii, angles):
            paths.append(
                PathComponent(gain=complex(complex_normal(rng, nlos_var)), angle=float(a), distance=float(r))
            )
    return channel_from_paths(cfg, paths, "near")


def stack_channels(channels) -> np.ndarray:
    """K x N matrix whose row k is user k's channel vector."""
    if isinstance(channels, np.ndarray):
        return channels
    return np.stack([ch.h if isinstance(ch, ChannelRealization) else np.asarray(ch) for ch in channels])
