"""Spectrum-efficiency evaluation and closed-form rate bounds.

All rates are bits/s/Hz. The closed forms cover single-path users served by
matched focusing columns with zero-forcing: the achieved SINR of user k is
(P / (K sigma^2)) N |alpha_k|^2 / [(B^H B)^{-1}]_kk, and for users strung
along one ray the Gram matrix is approximately tridiagonal Toeplitz, whose
inverse diagonal has an explicit form used for the upper bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import stack_channels
from .correlation import (
    correlation_beta,
    focusing_correlation_exact,
    focusing_correlation_gap,
    fresnel_ratio_envelope,
)
from .errors import NumericalRegimeError
from .geometry import ArrayConfig, Location
from .precoding import CONDITION_LIMIT, PrecoderSet, SystemConfig


@dataclass(frozen=True)
class RateReport:
    """Per-user rates, their sum, and the SINRs they came from."""

    per_user_rates: np.ndarray
    sum_rate: float
    sinr: np.ndarray


@dataclass(frozen=True)
class BoundReport:
    """A closed-form rate (or rate bound) plus its intermediate quantities."""

    bound_kind: str
    value: float
    params: dict


def spectrum_efficiency(channels, precoders: PrecoderSet, sys: SystemConfig) -> RateReport:
    """Sum of log2(1 + SINR_k) under the given precoders and power split."""
    h_mat = stack_channels(channels)
    coupling = h_mat.conj() @ precoders.effective  # [k, l] = h_k^H F_A f_{D,l}
    p = sys.power_allocation
    powers = np.abs(coupling) ** 2 * p  # weighted by the transmit power of stream l
    signal = np.diag(powers).copy()
    interference = powers.sum(axis=1) - signal
    sinr = signal / (sys.noise_variance + interference)
    rates = np.log2(1.0 + sinr)
    return RateReport(per_user_rates=rates, sum_rate=float(rates.sum()), sinr=sinr)


def zf_gram_se(columns: np.ndarray, gains, sys: SystemConfig) -> BoundReport:
    """ZF spectrum efficiency of single-path users from the column Gram matrix.

    ``columns`` holds one unit-norm array response per user (N x K); user k's
    channel is sqrt(N) gains[k] columns[:, k] and the analog precoder equals
    the columns themselves.
    """
    gains = np.asarray(gains)
    num_antennas, k_users = columns.shape
    if gains.shape != (k_users,):
        raise ValueError(f"gains must have shape ({k_users},)")
    gram = columns.conj().T @ columns
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NumericalRegimeError(
            f"response Gram matrix is near-singular (condition number {cond:.3e})"
        )
    inv_diag = np.real(np.diag(np.linalg.inv(gram)))
    sinr = (
        sys.total_power
        / (k_users * sys.noise_variance)
        * num_antennas
        * np.abs(gains) ** 2
        / inv_diag
    )
    rates = np.log2(1.0 + sinr)
    return BoundReport(
        bound_kind="zf_gram",
        value=float(rates.sum()),
        params={"gram_inverse_diagonal": inv_diag, "per_user_rates": rates},
    )


def ideal_se(gains, sys: SystemConfig, num_antennas: int) -> BoundReport:
    """Interference-free spectrum efficiency: every user sees its full gain."""
    gains = np.asarray(gains)
    sinr = (
        sys.total_power
        / (sys.num_users * sys.noise_variance)
        * num_antennas
        * np.abs(gains) ** 2
    )
    rates = np.log2(1.0 + sinr)
    return BoundReport(
        bound_kind="ideal",
        value=float(rates.sum()),
        params={"per_user_rates": rates},
    )


def beta_for_gap(cfg: ArrayConfig, angle: float, inv_distance_gap: float) -> float:
    """Correlation argument for two same-angle points spaced ``gap`` apart in 1/r."""
    d = cfg.element_spacing
    cos_phi = math.cos(angle)
    return cfg.num_antennas * math.sqrt(
        d * d * cos_phi * cos_phi / (2.0 * cfg.wavelength) * abs(inv_distance_gap)
    )


def adjacent_coherence(cfg: ArrayConfig, angle: float, inv_distance_gap: float) -> float:
    """Envelope coherence of two same-angle responses at an inverse-distance gap.

    This is the oscillation-free decreasing curve the placement bounds assume;
    its monotonicity/convexity premise is itself checked in the test suite.
    """
    return float(fresnel_ratio_envelope(beta_for_gap(cfg, angle, inv_distance_gap)))


def three_user_upper_bound(
    cfg: ArrayConfig,
    angle: float,
    r_inner: float,
    r_outer: float,
    sys: SystemConfig,
    gain_magnitude: float = 1.0,
) -> BoundReport:
    """Best-case sum rate of three equal-gain users pinned to one ray.

    The inner and outer users are fixed; the middle user sits at the midpoint
    in inverse distance, which balances both adjacent coherences. Non-adjacent
    coupling is neglected, so the middle user's rate uses the full tridiagonal
    discount and the two edge users a milder one.
    """
    if not (0 < r_inner < r_outer):
        raise ValueError(f"need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")
    if sys.num_users != 3:
        raise ValueError("this bound is defined for exactly three users")
    u_span = 1.0 / r_inner - 1.0 / r_outer
    x_hat = u_span / 2.0
    delta = adjacent_coherence(cfg, angle, x_hat)
    g = delta * delta
    if g >= 0.5:
        raise NumericalRegimeError(
            f"adjacent coherence {delta:.4f} puts the tridiagonal Gram outside its valid regime"
        )
    c = (
        sys.total_power
        / (sys.num_users * sys.noise_variance)
        * cfg.num_antennas
        * gain_magnitude**2
    )
    value = 2.0 * math.log2(1.0 + c * (1.0 - 2.0 * g) / (1.0 - g)) + math.log2(
        1.0 + c * (1.0 - 2.0 * g)
    )
    return BoundReport(
        bound_kind="three_user_upper_bound",
        value=float(value),
        params={
            "x_hat": x_hat,
            "u_span": u_span,
            "delta": delta,
            "g": g,
            "beta": beta_for_gap(cfg, angle, x_hat),
        },
    )


def tridiagonal_inverse_diagonal(k_users: int, coherence: float) -> np.ndarray:
    """Diagonal of the inverse of the K x K tridiagonal Toeplitz Gram matrix.

    The matrix has unit diagonal and off-diagonal magnitude ``coherence``.
    Closed form built from the roots of x^2 - x + coherence^2 = 0; complex
    root pairs (coherence > 1/2) are carried in complex arithmetic and must
    cancel to a real result.
    """
    if k_users < 1:
        raise ValueError(f"need at least one user, got {k_users}")
    if coherence < 0:
        raise ValueError(f"coherence must be >= 0, got {coherence}")
    if coherence == 0.0:
        return np.ones(k_users)
    disc = complex(1.0 - 4.0 * coherence * coherence)
    root = np.sqrt(disc)
    if abs(root) < 1e-12:
        raise NumericalRegimeError("repeated root at coherence = 1/2; the closed form degenerates")
    x1 = (1.0 - root) / 2.0
    x2 = (1.0 + root) / 2.0
    chi1 = -x1 * x1 / (x2 - x1)
    chi2 = x2 * x2 / (x2 - x1)

    def combo(exponent: int) -> complex:
        # A zero coefficient kills its term before exponentiation, which is
        # what makes the negative exponents at the edges harmless.
        total = 0.0 + 0.0j
        if chi1 != 0:
            total += chi1 * x1**exponent
        if chi2 != 0:
            total += chi2 * x2**exponent
        return total

    denominator = combo(k_users - 1)
    gamma = np.empty(k_users, dtype=complex)
    for k in range(1, k_users + 1):
        gamma[k - 1] = combo(k - 2) * combo(k_users - k - 1) / denominator
    residue = float(np.max(np.abs(gamma.imag)))
    if residue > 1e-9:
        raise NumericalRegimeError(
            f"inverse-diagonal values are not numerically real (imaginary residue {residue:.3e})"
        )
    gamma = gamma.real
    if np.any(gamma <= 0):
        raise NumericalRegimeError(
            "inverse-diagonal values are non-positive; the Gram matrix is outside its PD regime"
        )
    return gamma


def linear_upper_bound(
    k_users: int,
    coherence: float,
    sys: SystemConfig,
    gains,
    num_antennas: int,
) -> BoundReport:
    """Approximate sum-rate upper bound for users strung along one ray.

    Adjacent users share the min-max coherence; non-adjacent coupling is
    neglected, giving a tridiagonal Toeplitz Gram whose inverse diagonal
    discounts each user's interference-free SINR.
    """
    gains = np.asarray(gains)
    if gains.shape != (k_users,):
        raise ValueError(f"gains must have shape ({k_users},)")
    gamma = tridiagonal_inverse_diagonal(k_users, coherence)
    sinr = (
        sys.total_power
        / (k_users * sys.noise_variance)
        * num_antennas
        * np.abs(gains) ** 2
        / gamma
    )
    rates = np.log2(1.0 + sinr)
    return BoundReport(
        bound_kind="linear_upper_bound",
        value=float(rates.sum()),
        params={"gamma": gamma, "coherence": coherence, "per_user_rates": rates},
    )


@dataclass(frozen=True)
class MinMaxPlacement:
    """Result of the min-max coherence placement search on a ray.

    ``delta`` is the achieved maximum pairwise correlation measured on the
    exact responses; ``delta_design`` is the envelope value of the adjacent
    spacing the search optimized. ``feasible`` flags whether the users could
    be separated at all (delta below 0.99).
    """

    delta: float
    delta_design: float
    distances: np.ndarray
    feasible: bool


@lru_cache(maxsize=4)
def _ray_candidate_correlations(
    num_antennas: int,
    element_spacing: float,
    carrier_frequency: float,
    angle: float,
    u_lo: float,
    u_hi: float,
    grid_points: int,
):
    """Inverse-distance grid on a ray plus its pairwise correlation table."""
    from .channel import focusing_vector  # local import to avoid a cycle at load

    cfg = ArrayConfig(num_antennas, element_spacing, carrier_frequency)
    grid = np.linspace(u_lo, u_hi, grid_points)
    vectors = np.stack([focusing_vector(cfg, Location(1.0 / u, angle)) for u in grid], axis=1)
    table = np.abs(vectors.conj().T @ vectors)
    return grid, table


def min_max_correlation(
    cfg: ArrayConfig,
    angle: float,
    r_range: tuple[float, float],
    k_users: int,
    grid_points: int = 400,
    passes: int = 10,
) -> MinMaxPlacement:
    """Place K users on a ray to minimize their worst pairwise correlation.

    Coordinate-descent grid search over inverse distance, initialized at
    uniform inverse-distance spacing. The objective is the measured pairwise
    correlation, which oscillates around its decreasing envelope, so the
    final placement typically sits near (not exactly on) the balanced
    spacing and exploits correlation dips. Fully deterministic.
    """
    if k_users < 2:
        raise ValueError(f"need at least two users, got {k_users}")
    if grid_points < k_users:
        raise ValueError(f"grid_points={grid_points} cannot host {k_users} distinct users")
    r_min, r_max = r_range
    if not (0 < r_min < r_max):
        raise ValueError(f"invalid distance range {r_range}")
    u_lo, u_hi = 1.0 / r_max, 1.0 / r_min
    grid, table = _ray_candidate_correlations(
        cfg.num_antennas, cfg.element_spacing, cfg.carrier_frequency, angle, u_lo, u_hi, grid_points
    )
    init = np.linspace(u_hi, u_lo, k_users)
    idx = np.array([int(np.argmin(np.abs(grid - u))) for u in init])

    for _ in range(passes):
        moved = False
        for k in range(k_users):
            others = np.delete(idx, k)
            objective = table[:, others].max(axis=1)
            best = int(np.argmin(objective))
            if objective[best] < objective[idx[k]] - 1e-15:
                idx[k] = best
                moved = True
        if not moved:
            break

    idx = np.sort(idx)[::-1]  # descending u = ascending distance
    delta = 0.0
    for i, j in itertools.combinations(range(k_users), 2):
        delta = max(delta, float(table[idx[i], idx[j]]))
    placements = grid[idx]
    adjacent_gaps = -np.diff(placements)
    scale = beta_for_gap(cfg, angle, 1.0)  # beta = scale * sqrt(gap)
    delta_design = float(np.max(fresnel_ratio_envelope(scale * np.sqrt(adjacent_gaps))))
    return MinMaxPlacement(
        delta=delta,
        delta_design=delta_design,
        distances=1.0 / placements,
        feasible=delta < 0.99,
    )


def gap_gram_matrix(cfg: ArrayConfig, angle: float, inv_distances: np.ndarray) -> np.ndarray:
    """Gram matrix of same-angle responses under the quadratic-distance model."""
    u = np.asarray(inv_distances, dtype=float)
    gaps = u[:, None] - u[None, :]
    return focusing_correlation_gap(cfg, angle, gaps)
