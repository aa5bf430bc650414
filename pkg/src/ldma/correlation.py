"""Correlation of steering and focusing vectors, exact and in closed form.

The far-field correlation is a Dirichlet sinc of the sin-angle offset. The
near-field, same-angle correlation is approximated by |C(b) + j S(b)| / b
with Fresnel integrals C, S and b an aperture/range parameter; that ratio
oscillates, so a monotone decreasing majorant ("envelope") is also provided
for codebook spacing and placement searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import focusing_vector
from .geometry import ArrayConfig, Location

_SERIES_CUTOFF = 1.6
_LENTZ_TINY = 1e-300
_LENTZ_EPS = 1e-15
_LENTZ_MAX_ITERS = 200


@dataclass(frozen=True)
class FresnelPair:
    """Values of the Fresnel cosine and sine integrals at a common argument."""

    C: float | np.ndarray
    S: float | np.ndarray


def _fresnel_series(ax: np.ndarray):
    # Maclaurin series of int_0^x exp(j pi t^2 / 2) dt; term m carries
    # x (pi x^2 / 2)^m / m!, routed to C or S by the power of j.
    f = 0.5 * np.pi * ax * ax
    term = ax.copy()
    c = np.zeros_like(ax)
    s = np.zeros_like(ax)
    for m in range(80):
        contrib = term / (2 * m + 1)
        q = m % 4
        if q == 0:
            c += contrib
        elif q == 1:
            s += contrib
        elif q == 2:
            c -= contrib
        else:
            s -= contrib
        if np.all(np.abs(contrib) < 1e-18):
            break
        term = term * f / (m + 1)
    return c, s


def _fresnel_continued_fraction(ax: np.ndarray):
    # Modified Lentz evaluation of the continued fraction for the scaled
    # complementary error function of (1 - j) sqrt(pi)/2 x, folded back to
    # C + jS. Converges quickly for |x| above ~1.5.
    pix2 = np.pi * ax * ax
    b = 1.0 - 1j * pix2
    cc = np.full_like(b, 1.0 / _LENTZ_TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(ax.shape, dtype=bool)
    for k in range(1, _LENTZ_MAX_ITERS):
        a = -(2 * k - 1) * (2 * k)
        b = b + 4.0
        d_new = 1.0 / (a * d + b)
        cc_new = b + a / cc
        delta = cc_new * d_new
        d = np.where(active, d_new, d)
        cc = np.where(active, cc_new, cc)
        h = np.where(active, h * delta, h)
        active = active & (np.abs(delta - 1.0) >= _LENTZ_EPS)
        if not active.any():
            break
    else:
        raise RuntimeError("Fresnel continued fraction failed to converge")
    h = (ax - 1j * ax) * h
    cs = (0.5 + 0.5j) * (1.0 - (np.cos(0.5 * pix2) + 1j * np.sin(0.5 * pix2)) * h)
    return cs.real.copy(), cs.imag.copy()


def fresnel(x) -> FresnelPair:
    """Fresnel integrals C(x) = int_0^x cos(pi t^2/2) dt and S likewise.

    Accepts scalars or arrays; both integrals are odd in x. Power series
    below |x| = 1.6, continued fraction above, absolute accuracy well inside
    1e-8 everywhere.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    ax = np.abs(flat)
    c = np.empty_like(ax)
    s = np.empty_like(ax)
    small = ax <= _SERIES_CUTOFF
    if small.any():
        c[small], s[small] = _fresnel_series(ax[small])
    big = ~small
    if big.any():
        c[big], s[big] = _fresnel_continued_fraction(ax[big])
    sign = np.sign(flat)
    c, s = sign * c, sign * s
    if scalar:
        return FresnelPair(float(c[0]), float(s[0]))
    shape = arr.shape
    return FresnelPair(c.reshape(shape), s.reshape(shape))


def fresnel_ratio(beta):
    """|C(b) + j S(b)| / b, the closed-form same-angle focusing correlation.

    Continuously extended to 1 at b = 0.
    """
    arr = np.asarray(beta, dtype=float)
    scalar = arr.ndim == 0
    b = np.abs(np.atleast_1d(arr).astype(float))
    pair = fresnel(b)
    mag = np.hypot(pair.C, pair.S)
    out = np.ones_like(b)
    nonzero = b > 0
    out[nonzero] = mag[nonzero] / b[nonzero]
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


_ENVELOPE_BETA_MAX = 64.0
_ENVELOPE_STEP = 5e-4


def _envelope_tail(beta):
    # Upper bound for large arguments: the Fresnel spiral stays within
    # 1/(pi b) of (0.5, 0.5), so |G| <= (sqrt(1/2) + 1/(pi b)) / b.
    return (np.sqrt(0.5) + 1.0 / (np.pi * beta)) / beta


@lru_cache(maxsize=1)
def _envelope_table():
    grid = np.arange(0.0, _ENVELOPE_BETA_MAX + _ENVELOPE_STEP, _ENVELOPE_STEP)
    vals = fresnel_ratio(grid)
    # Anchor the table end at the analytic tail bound so the suffix maximum
    # accounts for everything beyond the grid, then sweep right-to-left.
    vals[-1] = max(vals[-1], _envelope_tail(grid[-1]))
    env = np.maximum.accumulate(vals[::-1])[::-1]
    return grid, np.minimum(env, 1.0)


def fresnel_ratio_envelope(beta):
    """Monotone non-increasing majorant of ``fresnel_ratio``.

    Equals the ratio wherever it is locally decreasing and bridges its
    oscillation dips; used wherever a single-valued "coherence vs spacing"
    curve is needed (codebook ring spacing, placement searches).
    """
    arr = np.asarray(beta, dtype=float)
    scalar = arr.ndim == 0
    b = np.abs(np.atleast_1d(arr).astype(float))
    grid, env = _envelope_table()
    out = np.interp(b, grid, env)
    beyond = b > grid[-1]
    if beyond.any():
        out[beyond] = _envelope_tail(b[beyond])
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


def solve_envelope_beta(target: float) -> float:
    """Smallest beta at which the envelope has decayed to ``target``.

    Bisection on the monotone envelope; target must lie strictly in (0, 1).
    """
    if not (0.0 < target < 1.0):
        raise ValueError(f"target must lie in (0, 1), got {target!r}")
    grid, env = _envelope_table()
    if target < env[-1]:
        # Invert the analytic tail: t b^2 - a b - c = 0.
        a = np.sqrt(0.5)
        c = 1.0 / np.pi
        return float((a + np.sqrt(a * a + 4.0 * target * c)) / (2.0 * target))
    lo, hi = 0.0, float(grid[-1])
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if np.interp(mid, grid, env) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dirichlet_sinc(num_antennas: int, alpha: float) -> float:
    """sin(N pi a / 2) / (N sin(pi a / 2)) with removable singularities filled.

    The argument is in normalized spatial frequency units: the brute-force
    equivalent is the centered sum (1/N) sum_n exp(j n pi a). The function is
    evaluated on the folded argument so large inputs stay accurate; for odd N
    it is 2-periodic and equals 1 at every a = 2m.
    """
    n_ant = int(num_antennas)
    if n_ant < 1:
        raise ValueError(f"num_antennas must be >= 1, got {num_antennas!r}")
    rem = math.remainder(alpha, 2.0)
    m = int(round((alpha - rem) / 2.0))
    sign = -1.0 if (m % 2) and ((n_ant - 1) % 2) else 1.0
    if rem == 0.0:
        return sign
    return sign * math.sin(0.5 * n_ant * math.pi * rem) / (n_ant * math.sin(0.5 * math.pi * rem))


def steering_correlation(cfg: ArrayConfig, angle_l: float, angle_m: float) -> float:
    """|a(angle_l)^H a(angle_m)| via the Dirichlet sinc closed form."""
    alpha = (
        cfg.wavenumber
        * cfg.element_spacing
        / np.pi
        * (math.sin(angle_m) - math.sin(angle_l))
    )
    return abs(dirichlet_sinc(cfg.num_antennas, alpha))


def focusing_correlation_exact(
    cfg: ArrayConfig, loc_l: Location, loc_m: Location, distance_mode: str = "exact"
) -> float:
    """|b(loc_l)^H b(loc_m)| by direct inner product."""
    bl = focusing_vector(cfg, loc_l, distance_mode)
    bm = focusing_vector(cfg, loc_m, distance_mode)
    return float(abs(np.vdot(bl, bm)))


def correlation_beta(cfg: ArrayConfig, r_l: float, r_m: float, angle: float) -> float:
    """Closed-form argument N sqrt(d^2 cos^2(phi) / (2 lambda) |1/r_l - 1/r_m|)."""
    if not (r_l > 0 and r_m > 0):
        raise ValueError("distances must be positive")
    d = cfg.element_spacing
    cos_phi = math.cos(angle)
    gap = abs(1.0 / r_l - 1.0 / r_m)
    return cfg.num_antennas * math.sqrt(d * d * cos_phi * cos_phi / (2.0 * cfg.wavelength) * gap)


def focusing_correlation_gap(cfg: ArrayConfig, angle: float, inv_distance_gap) -> complex | np.ndarray:
    """Same-angle focusing correlation under the quadratic-distance model.

    With quadratic per-element distances the inner product
    b(r_l)^H b(r_m) collapses to (1/N) sum_n exp(j k n^2 d^2 cos^2(phi)/2 * g)
    with g = 1/r_l - 1/r_m, i.e. it depends on the inverse-distance gap only.
    Vectorized over ``inv_distance_gap``; conjugate-symmetric in the gap sign.
    """
    gap = np.asarray(inv_distance_gap, dtype=float)
    n = cfg.element_indices()
    quad = 0.5 * cfg.wavenumber * (n * cfg.element_spacing * math.cos(angle)) ** 2
    vals = np.exp(1j * np.multiply.outer(gap, quad)).sum(axis=-1) / cfg.num_antennas
    if gap.ndim == 0:
        return complex(vals)
    return vals


@dataclass(frozen=True)
class CorrelationReport:
    """Same-angle focusing correlation: measured value vs closed form."""

    exact: float
    approx_beta: float
    approx_value: float
    abs_error: float


def focusing_correlation_approx(
    cfg: ArrayConfig, r_l: float, r_m: float, angle: float
) -> CorrelationReport:
    """Closed-form same-angle correlation plus its measured counterpart.

    The measured value uses the quadratic-distance responses, which is the
    regime the closed form describes; the full-geometry comparison is left to
    callers that want it.
    """
    beta = correlation_beta(cfg, r_l, r_m, angle)
    approx = fresnel_ratio(beta)
    exact = focusing_correlation_exact(
        cfg, Location(r_l, angle), Location(r_m, angle), distance_mode="second_order"
    )
    return CorrelationReport(
        exact=exact, approx_beta=beta, approx_value=approx, abs_error=abs(exact - approx)
    )
