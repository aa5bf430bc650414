"""Uniform linear array geometry and the far/near-field boundary.

Elements are indexed symmetrically around the array center, n = -N~ .. N~,
which requires an odd antenna count. All angles are radians, all lengths
meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ArrayConfig:
    """Half-open description of a ULA: element count, spacing, carrier.

    Derived quantities (wavelength, wavenumber, centered max index and
    aperture) are exposed as properties so they can never drift out of
    sync with the primary fields.
    """

    num_antennas: int
    element_spacing: float
    carrier_frequency: float

    def __post_init__(self):
        n = self.num_antennas
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ValueError(f"num_antennas must be an integer, got {n!r}")
        if n < 1 or n % 2 == 0:
            raise ValueError(f"num_antennas must be positive and odd, got {n}")
        if not (np.isfinite(self.element_spacing) and self.element_spacing > 0):
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing!r}")
        if not (np.isfinite(self.carrier_frequency) and self.carrier_frequency > 0):
            raise ValueError(f"carrier_frequency must be > 0, got {self.carrier_frequency!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def max_index(self) -> int:
        return (self.num_antennas - 1) // 2

    @property
    def aperture(self) -> float:
        return (self.num_antennas - 1) * self.element_spacing

    def element_indices(self) -> np.ndarray:
        """Signed centered element indices, -max_index .. max_index."""
        return np.arange(-self.max_index, self.max_index + 1)

    @classmethod
    def half_wavelength(cls, num_antennas: int, carrier_frequency: float) -> "ArrayConfig":
        """ULA with d = lambda/2 at the given carrier."""
        wavelength = SPEED_OF_LIGHT / carrier_frequency
        return cls(num_antennas, wavelength / 2.0, carrier_frequency)


@dataclass(frozen=True)
class Location:
    """A point in the array plane, polar: range from the array center plus
    azimuth off broadside.

    Endfire (|angle| = pi/2) is rejected: the ULA distance model degenerates
    there, so the angle must lie strictly inside (-pi/2, pi/2).
    """

    distance: float
    angle: float

    def __post_init__(self):
        if not (np.isfinite(self.distance) and self.distance > 0):
            raise ValueError(f"distance must be > 0 and finite, got {self.distance!r}")
        if not (np.isfinite(self.angle) and abs(self.angle) < np.pi / 2):
            raise ValueError(f"angle must lie strictly inside (-pi/2, pi/2), got {self.angle!r}")

    def mirrored(self) -> "Location":
        """Reflection across broadside (angle sign flip)."""
        return Location(self.distance, -self.angle)


def rayleigh_distance(cfg: ArrayConfig) -> float:
    """Far/near-field boundary 2 D^2 / lambda for the array aperture D."""
    d = cfg.aperture
    return 2.0 * d * d / cfg.wavelength


def _check_indices(n, cfg: ArrayConfig) -> np.ndarray:
    n = np.asarray(n)
    if n.size and np.max(np.abs(n)) > cfg.max_index:
        raise ValueError(
            f"element index out of range: |n| <= {cfg.max_index} required, got max {np.max(np.abs(n))}"
        )
    return n


def element_distance_exact(loc: Location, n, cfg: ArrayConfig):
    """Euclidean distance from element n to the point at ``loc``.

    Accepts a scalar index or an array of indices.
    """
    n = _check_indices(n, cfg)
    nd = n * cfg.element_spacing
    r = loc.distance
    return np.sqrt(r * r + nd * nd - 2.0 * nd * r * np.sin(loc.angle))


def element_distance_second_order(loc: Location, n, cfg: ArrayConfig):
    """Quadratic (Fresnel) approximation of the element distance.

    r - n d sin(phi) + n^2 d^2 cos^2(phi) / (2 r); accurate whenever the
    aperture is small relative to the range.
    """
    n = _check_indices(n, cfg)
    nd = n * cfg.element_spacing
    r = loc.distance
    sin_phi = np.sin(loc.angle)
    cos_phi = np.cos(loc.angle)
    return r - nd * sin_phi + nd * nd * cos_phi * cos_phi / (2.0 * r)
