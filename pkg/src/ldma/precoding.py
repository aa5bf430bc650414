"""Hybrid precoding: effective channels, zero-forcing, WMMSE, and the
fully-digital zero-forcing baseline.

Column convention: the analog matrix F_A is N x K with unit-norm codeword
columns; the digital matrix F_D is K x K and every effective column
F_A f_{D,k} is normalized to unit power, with per-user transmit powers kept
separately in the system configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import stack_channels
from .errors import NumericalRegimeError

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SystemConfig:
    """Multi-user downlink bookkeeping: K users, power budget, noise floor.

    ``power_allocation`` defaults to the equal split P/K. Its sum may fall
    below the budget (an optimizer is allowed to leave power unused) but can
    never exceed it.
    """

    num_users: int
    total_power: float
    noise_variance: float
    num_rf_chains: int | None = None
    power_allocation: np.ndarray | None = None

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError(f"num_users must be >= 1, got {self.num_users}")
        if self.num_rf_chains is None:
            object.__setattr__(self, "num_rf_chains", self.num_users)
        if self.num_rf_chains != self.num_users:
            raise ValueError(
                f"one RF chain per user is assumed: num_rf_chains={self.num_rf_chains} != num_users={self.num_users}"
            )
        if not self.total_power > 0:
            raise ValueError(f"total_power must be > 0, got {self.total_power}")
        if not self.noise_variance > 0:
            raise ValueError(f"noise_variance must be > 0, got {self.noise_variance}")
        if self.power_allocation is None:
            alloc = np.full(self.num_users, self.total_power / self.num_users)
        else:
            alloc = np.asarray(self.power_allocation, dtype=float).copy()
            if alloc.shape != (self.num_users,):
                raise ValueError(f"power_allocation must have shape ({self.num_users},)")
            if np.any(alloc < 0):
                raise ValueError("power_allocation entries must be non-negative")
            if alloc.sum() > self.total_power * (1 + 1e-9):
                raise ValueError(
                    f"power_allocation sums to {alloc.sum()!r}, above the budget {self.total_power!r}"
                )
        alloc.setflags(write=False)
        object.__setattr__(self, "power_allocation", alloc)

    @property
    def snr(self) -> float:
        return self.total_power / self.noise_variance

    def with_allocation(self, power_allocation) -> "SystemConfig":
        return SystemConfig(
            num_users=self.num_users,
            total_power=self.total_power,
            noise_variance=self.noise_variance,
            num_rf_chains=self.num_rf_chains,
            power_allocation=power_allocation,
        )


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-user channels seen through the analog precoder.

    ``vectors`` stores row k = the effective channel vector of user k; the
    stacked matrix used by the digital designs has row k equal to its
    conjugate (the Hermitian of the column vector).
    """

    vectors: np.ndarray  # K x K, row k = effective channel of user k

    @property
    def stacked(self) -> np.ndarray:
        return self.vectors.conj()

    @property
    def num_users(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class PrecoderSet:
    """Analog + digital precoder pair with the diagonal used to normalize it.

    Every effective column F_A f_{D,k} has unit norm; ``power_diag`` records
    the per-stream amplitude diagonal that the construction folded in.
    """

    analog: np.ndarray  # N x K
    digital: np.ndarray  # K x K
    power_diag: np.ndarray  # K, real

    def __post_init__(self):
        effective = self.analog @ self.digital
        norms = np.linalg.norm(effective, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError(f"effective precoder columns must be unit-norm, got norms {norms}")

    @property
    def effective(self) -> np.ndarray:
        """N x K combined precoder F_A F_D."""
        return self.analog @ self.digital


def _matrix_to_pairs(matrix: np.ndarray) -> list:
    # Row-major [real, imag] pairs at 17 significant digits: lossless for
    # doubles, so golden files compare exactly.
    return [
        [float(format(v.real, ".17g")), float(format(v.imag, ".17g"))]
        for v in np.asarray(matrix, dtype=complex).ravel(order="C")
    ]


def _pairs_to_matrix(pairs, shape) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(shape, order="C")


def precoder_set_to_json(pset: PrecoderSet) -> dict:
    """JSON document for golden-file comparisons of a precoder pair."""
    n, k = pset.analog.shape
    return {
        "num_antennas": int(n),
        "num_users": int(k),
        "analog": _matrix_to_pairs(pset.analog),
        "digital": _matrix_to_pairs(pset.digital),
        "power_diag": [float(format(v, ".17g")) for v in np.asarray(pset.power_diag)],
    }


def precoder_set_from_json(doc: dict) -> PrecoderSet:
    n, k = int(doc["num_antennas"]), int(doc["num_users"])
    return PrecoderSet(
        analog=_pairs_to_matrix(doc["analog"], (n, k)),
        digital=_pairs_to_matrix(doc["digital"], (k, k)),
        power_diag=np.asarray(doc["power_diag"], dtype=float),
    )


def estimate_effective_channel(
    analog: np.ndarray,
    channels,
    pilot_noise_variance: float = 0.0,
    rng: np.random.Generator | None = None,
) -> EffectiveChannel:
    """Effective channel F_A^H (h_k + n_k) from one uplink pilot per user.

    Zero pilot noise gives the noiseless projection; otherwise the per-antenna
    noise is complex Gaussian with the given variance and requires a
    generator.
    """
    if pilot_noise_variance < 0:
        raise ValueError(f"pilot_noise_variance must be >= 0, got {pilot_noise_variance}")
    h_mat = stack_channels(channels)
    vectors = h_mat @ analog.conj()
    if pilot_noise_variance > 0:
        if rng is None:
            raise ValueError("a generator is required when pilot_noise_variance > 0")
        scale = np.sqrt(pilot_noise_variance / 2.0)
        noise = scale * (
            rng.standard_normal(h_mat.shape) + 1j * rng.standard_normal(h_mat.shape)
        )
        vectors = vectors + noise @ analog.conj()
    return EffectiveChannel(vectors=vectors)


def _as_stacked(eff) -> np.ndarray:
    if isinstance(eff, EffectiveChannel):
        return eff.stacked
    return np.asarray(eff)


def zf_precoder(eff, sys: SystemConfig, analog: np.ndarray) -> PrecoderSet:
    """Zero-forcing digital precoder H^H (H H^H)^{-1} with unit-column scaling."""
    h_bar = _as_stacked(eff)
    cond = np.linalg.cond(h_bar)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NumericalRegimeError(
            f"effective channel is too ill-conditioned for zero forcing (condition number {cond:.3e})"
        )
    gram = h_bar @ h_bar.conj().T
    base = h_bar.conj().T @ np.linalg.solve(gram, np.eye(sys.num_users, dtype=complex))
    scale = 1.0 / np.linalg.norm(analog @ base, axis=0)
    digital = base * scale
    return PrecoderSet(analog=analog, digital=digital, power_diag=scale)


def fully_digital_zf(channels, sys: SystemConfig) -> np.ndarray:
    """Unconstrained zero-forcing precoder, one unit-norm column per user."""
    h_mat = stack_channels(channels)
    cond = np.linalg.cond(h_mat)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NumericalRegimeError(
            f"channel matrix is rank deficient or near-singular (condition number {cond:.3e})"
        )
    # The receive model uses h_k^H, so the stacked matrix here is conj(h_mat).
    gram = h_mat.conj() @ h_mat.T
    base = h_mat.T @ np.linalg.solve(gram, np.eye(sys.num_users, dtype=complex))
    return base / np.linalg.norm(base, axis=0)


@dataclass
class WmmseResult:
    """Converged (or best-iterate) WMMSE design.

    ``power_allocation`` carries the per-user powers the optimizer settled
    on; the precoder columns themselves are unit-power like every other
    PrecoderSet.
    """

    precoders: PrecoderSet
    power_allocation: np.ndarray
    converged: bool
    iterations: int
    surrogate: np.ndarray = field(repr=False)


def _power_given_multiplier(coeff_sq: np.ndarray, eigvals: np.ndarray, mu: float) -> float:
    # coeff_sq rows follow the eigenvalues, columns the users.
    return float(np.sum(coeff_sq / ((eigvals + mu) ** 2)[:, None]))


def wmmse_precoder(
    eff,
    sys: SystemConfig,
    analog: np.ndarray,
    max_iters: int = 200,
    tol: float = 1e-6,
    init: str = "zf",
) -> WmmseResult:
    """Weighted-MMSE digital precoder for the K x K effective channel.

    Alternates MMSE receive scalars, MSE weights, and the digital columns
    under the total-power constraint sum_k ||F_A v_k||^2 <= P, with the
    power multiplier found by bisection each round. The tracked surrogate
    (weighted MSE minus log-weights) never increases; iteration stops once
    its improvement drops below ``tol``.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if init not in ("zf", "matched"):
        raise ValueError(f"init must be 'zf' or 'matched', got {init!r}")

    h_bar = _as_stacked(eff)  # rows are effective h_k^H
    k_users = sys.num_users
    power = sys.total_power
    noise = sys.noise_variance
    gram_analog = analog.conj().T @ analog  # K x K, Hermitian positive definite

    def column_powers(v: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("ik,ij,jk->k", v.conj(), gram_analog, v))

    v = None
    if init == "zf":
        try:
            zf = zf_precoder(h_bar, sys, analog)
            v = zf.digital * np.sqrt(power / k_users)
        except NumericalRegimeError:
            v = None
    if v is None:
        # Matched columns, equal power split.
        v = h_bar.conj().T.copy()
        norms = np.sqrt(column_powers(v))
        norms[norms == 0] = 1.0
        v = v * (np.sqrt(power / k_users) / norms)

    chol = np.linalg.cholesky(gram_analog)
    eye = np.eye(k_users, dtype=complex)

    surrogate = []
    best_v = v
    best_obj = np.inf
    converged = False
    iterations = 0

    for iteration in range(max_iters):
        iterations = iteration + 1
        y = h_bar @ v  # y[k, l] = h_k^H v_l
        signal = np.diag(y)
        total = noise + np.sum(np.abs(y) ** 2, axis=1)
        mmse = 1.0 - np.abs(signal) ** 2 / total
        mmse = np.clip(mmse, 1e-300, None)
        u = signal / total
        w = 1.0 / mmse
        obj = float(k_users + np.sum(np.log(mmse)))  # sum_k (w e - ln w) at the w-update
        surrogate.append(obj)
        if obj < best_obj - 0.0:
            best_obj = obj
            best_v = v
        if iteration > 0 and surrogate[-2] - obj < tol:
            converged = True
            break

        # Quadratic block update: v_l = (A + mu M)^{-1} w_l u_l hbar_l with A
        # the weighted downlink covariance; solved through the generalized
        # eigenbasis of (A, M) so the power multiplier is a scalar bisection.
        g_cols = h_bar.conj().T  # column l = effective channel of user l
        scaled = g_cols * np.sqrt(w * np.abs(u) ** 2)
        a_mat = scaled @ scaled.conj().T
        rhs = g_cols * (w * u)
        l_inv_a = np.linalg.solve(chol, a_mat)
        a_tilde = np.linalg.solve(chol, l_inv_a.conj().T).conj().T
        a_tilde = 0.5 * (a_tilde + a_tilde.conj().T)
        eigvals, eigvecs = np.linalg.eigh(a_tilde)
        eigvals = np.clip(eigvals, 0.0, None)
        b_tilde = eigvecs.conj().T @ np.linalg.solve(chol, rhs)
        coeff_sq = np.abs(b_tilde) ** 2

        if eigvals.min() > 0 and _power_given_multiplier(coeff_sq, eigvals, 0.0) <= power:
            mu = 0.0
        else:
            hi = np.sqrt(coeff_sq.sum() / power)
            lo = 0.0
            for _ in range(120):
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                if _power_given_multiplier(coeff_sq, eigvals, mid) > power:
                    lo = mid
                else:
                    hi = mid
            mu = hi
        v = np.linalg.solve(chol.conj().T, eigvecs @ (b_tilde / (eigvals + mu)[:, None]))

    # Final normalization: unit effective columns, power folded into the
    # returned allocation.
    y = h_bar @ best_v
    powers = column_powers(best_v)
    norms = np.sqrt(np.maximum(powers, 0.0))
    digital = np.empty_like(best_v)
    for k in range(k_users):
        if norms[k] > 1e-12 * np.sqrt(power):
            digital[:, k] = best_v[:, k] / norms[k]
        else:
            # User carries no power; keep a valid unit direction so the
            # precoder stays well formed.
            direction = h_bar.conj().T[:, k]
            if np.linalg.norm(direction) == 0:
                direction = eye[:, k]
            digital[:, k] = direction / np.linalg.norm(analog @ direction)
            powers[k] = 0.0
    pset = PrecoderSet(analog=analog, digital=digital, power_diag=norms)
    return WmmseResult(
        precoders=pset,
        power_allocation=np.maximum(powers, 0.0),
        converged=converged,
        iterations=iterations,
        surrogate=np.asarray(surrogate),
    )
