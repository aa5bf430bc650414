"""Scenario runner: seeded Monte Carlo experiments emitting CSV + manifest.

Four scenario kinds are supported:

* ``correlation_sweep``   - same-angle beam correlation vs array size,
  measured exactly and via the closed form.
* ``linear_bound``        - users on one ray: closed-form upper bound,
  reachable/exhaustive/random placements, and the far-field single-user
  baseline, swept over the user count.
* ``linear_multipath``    - multipath users on one ray, hybrid precoding
  method grid over an SNR sweep.
* ``uniform_cell``        - multipath users uniform over the cell sector,
  same method grid.

Every run is deterministic given (config, seed): per-trial generators are
spawned from ``[seed, trial_index]`` and aggregation is in fixed trial
order, so the emitted CSV is bit-identical regardless of worker count.
"""

from __future__ import annotations

import copy
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, islice
from pathlib import Path

import numpy as np

from .channel import ScatterRegion, focusing_vector, sample_near_channel
from .codebook import analog_precoder, build_dft_codebook, build_polar_codebook, sweep_assign
from .correlation import correlation_beta, focusing_correlation_exact, focusing_correlation_gap, fresnel_ratio
from .errors import ConfigError, NumericalRegimeError
from .geometry import ArrayConfig, Location
from .performance import (
    gap_gram_matrix,
    linear_upper_bound,
    min_max_correlation,
    spectrum_efficiency,
    zf_gram_se,
)
from .precoding import (
    SystemConfig,
    estimate_effective_channel,
    fully_digital_zf,
    wmmse_precoder,
    zf_precoder,
)
from .precoding import PrecoderSet

CSV_COLUMNS = (
    "scenario_id",
    "sweep_name",
    "sweep_value",
    "method",
    "mean",
    "std_error",
    "num_trials",
    "seed",
)

SCENARIO_KINDS = ("correlation_sweep", "linear_bound", "linear_multipath", "uniform_cell")

MULTIPATH_METHODS = ("ldma_zf", "ldma_wmmse", "sdma_zf", "sdma_wmmse", "fully_digital_zf")

# Config-file spelling of the method selector -> CSV label.
PRECODER_CHOICES = {
    "zf": "ldma_zf",
    "wmmse": "ldma_wmmse",
    "sdma_dft_zf": "sdma_zf",
    "sdma_dft_wmmse": "sdma_wmmse",
    "fully_digital_zf": "fully_digital_zf",
}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunRow:
    scenario_id: str
    sweep_name: str
    sweep_value: float
    method: str
    mean: float
    std_error: float
    num_trials: int
    seed: int

    def as_csv(self) -> str:
        return ",".join(
            (
                self.scenario_id,
                self.sweep_name,
                _fmt(self.sweep_value),
                self.method,
                _fmt(self.mean),
                _fmt(self.std_error),
                str(self.num_trials),
                str(self.seed),
            )
        )


@dataclass
class RunResult:
    scenario_id: str
    rows: list[RunRow]
    config: dict
    seed: int
    wall_time_s: float = 0.0

    def csv_bytes(self) -> bytes:
        lines = [",".join(CSV_COLUMNS)]
        lines.extend(row.as_csv() for row in self.rows)
        return ("\n".join(lines) + "\n").encode("utf-8")

    def manifest(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "git_describe": _git_describe(),
            "wall_time_s": self.wall_time_s,
        }

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.scenario_id}.csv"
        manifest_path = out / f"{self.scenario_id}_manifest.json"
        csv_path.write_bytes(self.csv_bytes())
        manifest_path.write_text(json.dumps(self.manifest(), indent=1) + "\n", encoding="utf-8")
        return csv_path, manifest_path

    def methods(self) -> set[str]:
        return {row.method for row in self.rows}


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

_ARRAY_DEFAULTS = {"num_antennas": 257, "element_spacing": None, "carrier_frequency": 30e9}

_DEFAULTS: dict[str, dict] = {
    "correlation_sweep": {
        "scenario_kind": "correlation_sweep",
        "seed": 1,
        "carrier_frequency": 30e9,
        "element_spacing": None,
        "antenna_grid": [65, 129, 193, 257, 385, 513, 769, 1025],
        "location_pair": [[5.0, math.pi / 6], [15.0, math.pi / 6]],
    },
    "linear_bound": {
        "scenario_kind": "linear_bound",
        "seed": 1,
        "array": dict(_ARRAY_DEFAULTS),
        "angle": 0.0,
        "distance_range": [4.0, 150.0],
        "snr_grid": [12.0],
        "total_power": 1.0,
        "gain_magnitude": 1.0,
        "k_max": 14,
        "num_trials": 100,
        "distance_distribution": "uniform_inverse",
        "exhaustive_k_limit": 6,
        "exhaustive_grid_points": 60,
        "search_grid_points": 400,
        "search_passes": 10,
    },
    "linear_multipath": {
        "scenario_kind": "linear_multipath",
        "seed": 1,
        "array": dict(_ARRAY_DEFAULTS),
        "sys": {"num_users": 4, "num_rf_chains": None, "total_power": 1.0},
        "kappa": 31.6,
        "num_nlos": 5,
        "user_region": {
            "angle_set": [0.0],
            "distance_range": [4.0, 100.0],
            "distance_distribution": "uniform_inverse",
        },
        "scatter_region": {
            "angle_range": [-math.pi / 3, math.pi / 3],
            "distance_range": [4.0, 100.0],
        },
        "snr_grid": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        "num_trials": 200,
        "precoder": "all",
        "codebook": {"kind": "polar", "coherence_target": 0.7, "r_min": None},
        "pilot_noise_variance": 0.0,
        "wmmse_max_iters": 200,
        "wmmse_tol": 1e-6,
    },
    "uniform_cell": {
        "scenario_kind": "uniform_cell",
        "seed": 1,
        "array": dict(_ARRAY_DEFAULTS),
        "sys": {"num_users": 10, "num_rf_chains": None, "total_power": 1.0},
        "kappa": 31.6,
        "num_nlos": 5,
        "user_region": {
            "angle_range": [-math.pi / 3, math.pi / 3],
            "distance_range": [4.0, 100.0],
            "distance_distribution": "uniform_inverse",
        },
        "scatter_region": {
            "angle_range": [-math.pi / 3, math.pi / 3],
            "distance_range": [4.0, 100.0],
        },
        "snr_grid": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        "num_trials": 200,
        "precoder": "all",
        "codebook": {"kind": "polar", "coherence_target": 0.7, "r_min": None},
        "pilot_noise_variance": 0.0,
        "wmmse_max_iters": 200,
        "wmmse_tol": 1e-6,
    },
}


def _merge_strict(defaults, override, path=""):
    """Defaults overwritten by override; any key absent from defaults errors."""
    if not isinstance(override, dict):
        raise ConfigError(f"section '{path or '<root>'}' must be an object")
    merged = copy.deepcopy(defaults)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(defaults[key], dict) and defaults[key]:
            merged[key] = _merge_strict(defaults[key], value, where)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _require_number(cfg, key, positive=False):
    value = cfg[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ConfigError(f"'{key}' must be a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"'{key}' must be > 0, got {value!r}")
    return float(value)


def resolve_config(raw: dict) -> dict:
    """Validate a raw config mapping and fill defaults; strict on unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("scenario_kind")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"scenario_kind must be one of {SCENARIO_KINDS}, got {kind!r}")
    cfg = _merge_strict(_DEFAULTS[kind], raw)

    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        raise ConfigError(f"'seed' must be a non-negative integer, got {cfg['seed']!r}")

    if kind == "correlation_sweep":
        grid = cfg["antenna_grid"]
        if not isinstance(grid, list) or not grid:
            raise ConfigError("'antenna_grid' must be a non-empty list")
        for n in grid:
            if not isinstance(n, int) or n < 1 or n % 2 == 0:
                raise ConfigError(f"antenna counts must be positive odd integers, got {n!r}")
        pair = cfg["location_pair"]
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or any(not isinstance(p, list) or len(p) != 2 for p in pair)
        ):
            raise ConfigError("'location_pair' must be [[r_l, angle], [r_m, angle]]")
        if abs(pair[0][1] - pair[1][1]) > 1e-12:
            raise ConfigError("the closed-form sweep needs both locations on a common angle")
        _require_number(cfg, "carrier_frequency", positive=True)
        return cfg

    array = cfg["array"]
    if not isinstance(array["num_antennas"], int) or array["num_antennas"] % 2 == 0:
        raise ConfigError("'array.num_antennas' must be a positive odd integer")
    if array["element_spacing"] is not None and array["element_spacing"] <= 0:
        raise ConfigError("'array.element_spacing' must be > 0 or null for half-wavelength")

    snr_grid = cfg["snr_grid"]
    if not isinstance(snr_grid, list) or not snr_grid:
        raise ConfigError("'snr_grid' must be a non-empty list of dB values")
    if not isinstance(cfg["num_trials"], int) or cfg["num_trials"] < 1:
        raise ConfigError("'num_trials' must be an integer >= 1")

    if kind == "linear_bound":
        if len(snr_grid) != 1:
            raise ConfigError("linear_bound sweeps the user count at a single SNR point")
        lo, hi = cfg["distance_range"]
        if not (0 < lo < hi):
            raise ConfigError(f"'distance_range' must satisfy 0 < min < max, got {cfg['distance_range']}")
        if cfg["k_max"] < 1:
            raise ConfigError("'k_max' must be >= 1")
        if cfg["distance_distribution"] not in ("uniform_inverse", "uniform"):
            raise ConfigError("'distance_distribution' must be 'uniform_inverse' or 'uniform'")
        return cfg

    # Multipath scenarios.
    sys_cfg = cfg["sys"]
    if not isinstance(sys_cfg["num_users"], int) or sys_cfg["num_users"] < 1:
        raise ConfigError("'sys.num_users' must be an integer >= 1")
    if sys_cfg["num_rf_chains"] is not None and sys_cfg["num_rf_chains"] != sys_cfg["num_users"]:
        raise ConfigError("'sys.num_rf_chains' must equal num_users (or null)")
    if cfg["kappa"] < 0:
        raise ConfigError("'kappa' must be >= 0")
    if not isinstance(cfg["num_nlos"], int) or cfg["num_nlos"] < 0:
        raise ConfigError("'num_nlos' must be an integer >= 0")
    region = cfg["user_region"]
    has_set = "angle_set" in region and region.get("angle_set") is not None
    has_range = "angle_range" in region and region.get("angle_range") is not None
    if has_set == has_range:
        raise ConfigError("'user_region' needs exactly one of angle_set / angle_range")
    lo, hi = region["distance_range"]
    if not (0 < lo < hi):
        raise ConfigError("'user_region.distance_range' must satisfy 0 < min < max")
    if region["distance_distribution"] not in ("uniform", "uniform_inverse"):
        raise ConfigError("'user_region.distance_distribution' must be 'uniform' or 'uniform_inverse'")
    if cfg["precoder"] != "all" and cfg["precoder"] not in PRECODER_CHOICES:
        raise ConfigError(
            f"'precoder' must be 'all' or one of {sorted(PRECODER_CHOICES)}, got {cfg['precoder']!r}"
        )
    cb = cfg["codebook"]
    if cb["kind"] not in ("polar", "dft"):
        raise ConfigError("'codebook.kind' must be 'polar' or 'dft'")
    if cb["kind"] == "polar" and not (cb["coherence_target"] is None or 0 < cb["coherence_target"] < 1):
        raise ConfigError("'codebook.coherence_target' must lie in (0, 1)")
    if cfg["pilot_noise_variance"] < 0:
        raise ConfigError("'pilot_noise_variance' must be >= 0")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return resolve_config(raw)


def default_config(scenario_kind: str) -> dict:
    if scenario_kind not in SCENARIO_KINDS:
        raise ConfigError(f"scenario_kind must be one of {SCENARIO_KINDS}, got {scenario_kind!r}")
    return copy.deepcopy(_DEFAULTS[scenario_kind])


def _array_from(cfg_array: dict, num_antennas: int | None = None) -> ArrayConfig:
    n = num_antennas if num_antennas is not None else cfg_array["num_antennas"]
    f = cfg_array["carrier_frequency"]
    d = cfg_array["element_spacing"]
    if d is None:
        return ArrayConfig.half_wavelength(n, f)
    return ArrayConfig(n, d, f)


# ---------------------------------------------------------------------------
# correlation_sweep
# ---------------------------------------------------------------------------


def run_correlation_sweep(config: dict, workers: int = 1) -> RunResult:
    cfg = resolve_config(config)
    started = time.monotonic()
    (r_l, angle), (r_m, _) = cfg["location_pair"]
    seed = cfg["seed"]
    rows: list[RunRow] = []
    for n in cfg["antenna_grid"]:
        array = _array_from(
            {"carrier_frequency": cfg["carrier_frequency"], "element_spacing": cfg["element_spacing"]},
            num_antennas=n,
        )
        loc_l, loc_m = Location(r_l, angle), Location(r_m, angle)
        exact = focusing_correlation_exact(array, loc_l, loc_m, "exact")
        second = focusing_correlation_exact(array, loc_l, loc_m, "second_order")
        beta = correlation_beta(array, r_l, r_m, angle)
        closed = fresnel_ratio(beta)
        values = {
            "exact": exact,
            "exact_second_order": second,
            "closed_form": closed,
            "beta": beta,
            "abs_error": abs(exact - closed),
            "abs_error_second_order": abs(second - closed),
        }
        for method, value in values.items():
            rows.append(
                RunRow("correlation_sweep", "num_antennas", float(n), method, value, 0.0, 1, seed)
            )
    return RunResult("correlation_sweep", rows, cfg, seed, time.monotonic() - started)


# ---------------------------------------------------------------------------
# linear_bound
# ---------------------------------------------------------------------------


def _exhaustive_linear_max(array, angle, u_lo, u_hi, k_users, sys, gain_mag, grid_points):
    """Grid search over user placements, exact up to the quadratic model.

    Under the quadratic-distance model the Gram matrix depends only on the
    inverse-distance gaps, so the first user is pinned to the near end of the
    grid and only the K-1 gap positions are enumerated.
    """
    step = (u_hi - u_lo) / (grid_points - 1)
    table = focusing_correlation_gap(array, angle, np.arange(grid_points) * step)
    c = sys.total_power / (k_users * sys.noise_variance) * array.num_antennas * gain_mag**2
    best_se = -np.inf
    best_positions = None
    combo_iter = combinations(range(1, grid_points), k_users - 1)
    chunk_size = 100_000
    while True:
        chunk = list(islice(combo_iter, chunk_size))
        if not chunk:
            break
        positions = np.zeros((len(chunk), k_users), dtype=np.int64)
        positions[:, 1:] = np.asarray(chunk, dtype=np.int64)
        delta = positions[:, None, :] - positions[:, :, None]
        gram = np.where(delta >= 0, table[np.abs(delta)], np.conj(table[np.abs(delta)]))
        inv_diag = np.real(np.einsum("bii->bi", np.linalg.inv(gram)))
        valid = np.all(inv_diag > 0, axis=1)
        se = np.where(
            valid, np.log2(1.0 + c / np.where(valid[:, None], inv_diag, 1.0)).sum(axis=1), -np.inf
        )
        idx = int(np.argmax(se))
        if se[idx] > best_se:
            best_se = float(se[idx])
            best_positions = positions[idx].copy()
    return u_hi - best_positions * step  # anchored at the near end


def _coordinate_descent_max(array, angle, u_lo, u_hi, sys, gain_mag, init_u, grid_points, passes):
    """Maximize the gap-model ZF rate one user coordinate at a time."""
    k_users = init_u.size
    c = sys.total_power / (k_users * sys.noise_variance) * array.num_antennas * gain_mag**2
    candidates = np.linspace(u_lo, u_hi, grid_points)
    u = init_u.copy()

    def se_of(u_vec):
        gram = gap_gram_matrix(array, angle, u_vec)
        inv_diag = np.real(np.diag(np.linalg.inv(gram)))
        if np.any(inv_diag <= 0):
            return -np.inf
        return float(np.log2(1.0 + c / inv_diag).sum())

    for _ in range(passes):
        moved = False
        for k in range(k_users):
            others = np.delete(u, k)
            # Candidates colliding with another user make the Gram singular.
            usable = np.min(np.abs(candidates[:, None] - others[None, :]), axis=1) > 1e-15
            base_gram = gap_gram_matrix(array, angle, u)
            grams = np.broadcast_to(base_gram, (int(usable.sum()), k_users, k_users)).copy()
            row = focusing_correlation_gap(
                array, angle, candidates[usable][:, None] - u[None, :]
            )  # (usable, K)
            grams[:, k, :] = row
            grams[:, :, k] = np.conj(row)
            grams[:, k, k] = 1.0
            inv_diag = np.real(np.einsum("bii->bi", np.linalg.inv(grams)))
            valid = np.all(inv_diag > 0, axis=1)
            se = np.full(grid_points, -np.inf)
            se[usable] = np.where(
                valid,
                np.log2(1.0 + c / np.where(valid[:, None], inv_diag, 1.0)).sum(axis=1),
                -np.inf,
            )
            best = int(np.argmax(se))
            if se[best] > se_of(u) + 1e-12:
                u[k] = candidates[best]
                moved = True
        if not moved:
            break
    return u


def _exact_placement_se(array, angle, inv_distances, sys, gain_mag) -> float:
    """ZF rate of single-path users at the given placement.

    Placements the array cannot resolve (Gram past the condition guard)
    score 0: zero forcing cannot serve them.
    """
    locs = [Location(1.0 / float(ui), angle) for ui in inv_distances]
    columns = np.stack([focusing_vector(array, loc) for loc in locs], axis=1)
    gains = np.full(len(locs), gain_mag)
    try:
        return zf_gram_se(columns, gains, sys).value
    except NumericalRegimeError:
        return 0.0


def run_linear_bound(config: dict, workers: int = 1) -> RunResult:
    cfg = resolve_config(config)
    started = time.monotonic()
    array = _array_from(cfg["array"])
    seed = cfg["seed"]
    angle = cfg["angle"]
    r_min, r_max = cfg["distance_range"]
    u_lo, u_hi = 1.0 / r_max, 1.0 / r_min
    snr_db = cfg["snr_grid"][0]
    power = cfg["total_power"]
    noise = power / 10 ** (snr_db / 10)
    gain_mag = cfg["gain_magnitude"]
    trials = cfg["num_trials"]
    rows: list[RunRow] = []

    for k_users in range(1, cfg["k_max"] + 1):
        sys = SystemConfig(num_users=k_users, total_power=power, noise_variance=noise)
        # Far-field SDMA collapses on a shared ray: a single user is served.
        # The equal power split of the scenario is kept, so the served user
        # transmits with P/K like everyone else in this figure.
        sdma_rate = math.log2(
            1.0 + power / (k_users * noise) * array.num_antennas * gain_mag**2
        )
        if k_users == 1:
            for method in ("upper_bound", "minmax_reachable", "exhaustive_max", "far_field_sdma"):
                rows.append(
                    RunRow("linear_bound", "num_users", 1.0, method, sdma_rate, 0.0, 1, seed)
                )
            rows.append(
                RunRow(
                    "linear_bound",
                    "num_users",
                    1.0,
                    "random_placement",
                    sdma_rate,
                    0.0,
                    trials,
                    seed,
                )
            )
            continue

        placement = min_max_correlation(
            array,
            angle,
            (r_min, r_max),
            k_users,
            grid_points=cfg["search_grid_points"],
            passes=cfg["search_passes"],
        )
        gains = np.full(k_users, gain_mag)
        try:
            bound = linear_upper_bound(
                k_users, placement.delta, sys, gains, array.num_antennas
            ).value
        except NumericalRegimeError:
            bound = None  # coherence too high for the tridiagonal closed form
        if bound is not None:
            rows.append(
                RunRow("linear_bound", "num_users", float(k_users), "upper_bound", bound, 0.0, 1, seed)
            )

        reachable = _exact_placement_se(array, angle, 1.0 / placement.distances, sys, gain_mag)
        rows.append(
            RunRow(
                "linear_bound", "num_users", float(k_users), "minmax_reachable", reachable, 0.0, 1, seed
            )
        )

        if k_users <= cfg["exhaustive_k_limit"]:
            best_u = _exhaustive_linear_max(
                array, angle, u_lo, u_hi, k_users, sys, gain_mag, cfg["exhaustive_grid_points"]
            )
        else:
            best_u = _coordinate_descent_max(
                array,
                angle,
                u_lo,
                u_hi,
                sys,
                gain_mag,
                np.sort(1.0 / placement.distances)[::-1],
                cfg["search_grid_points"],
                cfg["search_passes"],
            )
        exhaustive = _exact_placement_se(array, angle, best_u, sys, gain_mag)
        rows.append(
            RunRow(
                "linear_bound", "num_users", float(k_users), "exhaustive_max", exhaustive, 0.0, 1, seed
            )
        )

        samples = np.empty(trials)
        for trial in range(trials):
            rng = np.random.default_rng([seed, trial, k_users])
            if cfg["distance_distribution"] == "uniform_inverse":
                u = rng.uniform(u_lo, u_hi, k_users)
            else:
                u = 1.0 / rng.uniform(r_min, r_max, k_users)
            samples[trial] = _exact_placement_se(array, angle, u, sys, gain_mag)
        std_error = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        rows.append(
            RunRow(
                "linear_bound",
                "num_users",
                float(k_users),
                "random_placement",
                float(samples.mean()),
                std_error,
                trials,
                seed,
            )
        )

        rows.append(
            RunRow(
                "linear_bound",
                "num_users",
                float(k_users),
                "far_field_sdma",
                sdma_rate,
                0.0,
                1,
                seed,
            )
        )

    return RunResult("linear_bound", rows, cfg, seed, time.monotonic() - started)


# ---------------------------------------------------------------------------
# Multipath scenarios (linear_multipath, uniform_cell)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _cached_dft_codebook(num_antennas, element_spacing, carrier_frequency):
    return build_dft_codebook(ArrayConfig(num_antennas, element_spacing, carrier_frequency))


@lru_cache(maxsize=8)
def _cached_polar_codebook(num_antennas, element_spacing, carrier_frequency, r_min, target):
    cfg = ArrayConfig(num_antennas, element_spacing, carrier_frequency)
    return build_polar_codebook(cfg, r_min, target)


def _draw_users(cfg: dict, rng: np.random.Generator) -> list[Location]:
    region = cfg["user_region"]
    k_users = cfg["sys"]["num_users"]
    if region.get("angle_set"):
        angle_set = region["angle_set"]
        if len(angle_set) == 1:
            angles = np.full(k_users, angle_set[0])
        else:
            angles = rng.choice(np.asarray(angle_set, dtype=float), size=k_users)
    else:
        lo, hi = region["angle_range"]
        angles = rng.uniform(lo, hi, k_users)
    r_lo, r_hi = region["distance_range"]
    if region["distance_distribution"] == "uniform":
        distances = rng.uniform(r_lo, r_hi, k_users)
    else:
        distances = 1.0 / rng.uniform(1.0 / r_hi, 1.0 / r_lo, k_users)
    return [Location(float(r), float(a)) for r, a in zip(distances, angles)]


def _multipath_trial(cfg: dict, trial: int) -> np.ndarray:
    """One seeded channel draw evaluated over the SNR grid and method list.

    Returns sum rates with shape (len(snr_grid), len(MULTIPATH_METHODS));
    methods not selected by the config stay NaN.
    """
    array = _array_from(cfg["array"])
    k_users = cfg["sys"]["num_users"]
    power = cfg["sys"]["total_power"]
    rng = np.random.default_rng([cfg["seed"], trial])

    users = _draw_users(cfg, rng)
    scatter = ScatterRegion(
        cfg["scatter_region"]["distance_range"][0],
        cfg["scatter_region"]["distance_range"][1],
        cfg["scatter_region"]["angle_range"][0],
        cfg["scatter_region"]["angle_range"][1],
    )
    channels = [
        sample_near_channel(array, loc, cfg["num_nlos"], cfg["kappa"], scatter, rng)
        for loc in users
    ]

    wanted = (
        set(MULTIPATH_METHODS)
        if cfg["precoder"] == "all"
        else {PRECODER_CHOICES[cfg["precoder"]]}
    )

    cb_cfg = cfg["codebook"]
    r_min_default = cfg["user_region"]["distance_range"][0]
    analogs = {}
    if wanted & {"ldma_zf", "ldma_wmmse"}:
        if cb_cfg["kind"] == "polar":
            codebook = _cached_polar_codebook(
                array.num_antennas,
                array.element_spacing,
                array.carrier_frequency,
                cb_cfg["r_min"] if cb_cfg["r_min"] is not None else r_min_default,
                cb_cfg["coherence_target"],
            )
        else:
            codebook = _cached_dft_codebook(
                array.num_antennas, array.element_spacing, array.carrier_frequency
            )
        assignment = sweep_assign(channels, codebook)
        analogs["ldma"] = analog_precoder(codebook, assignment, k_users)
    if wanted & {"sdma_zf", "sdma_wmmse"}:
        dft = _cached_dft_codebook(array.num_antennas, array.element_spacing, array.carrier_frequency)
        assignment = sweep_assign(channels, dft)
        analogs["sdma"] = analog_precoder(dft, assignment, k_users)

    pilot_var = cfg["pilot_noise_variance"]
    effectives = {
        label: estimate_effective_channel(analog, channels, pilot_var, rng)
        for label, analog in analogs.items()
    }

    results = np.full((len(cfg["snr_grid"]), len(MULTIPATH_METHODS)), np.nan)
    for si, snr_db in enumerate(cfg["snr_grid"]):
        sys = SystemConfig(num_users=k_users, total_power=power, noise_variance=power / 10 ** (snr_db / 10))
        for mi, method in enumerate(MULTIPATH_METHODS):
            if method not in wanted:
                continue
            if method == "fully_digital_zf":
                try:
                    digital = fully_digital_zf(channels, sys)
                except NumericalRegimeError:
                    results[si, mi] = 0.0
                    continue
                pset = PrecoderSet(
                    analog=digital, digital=np.eye(k_users, dtype=complex), power_diag=np.ones(k_users)
                )
                results[si, mi] = spectrum_efficiency(channels, pset, sys).sum_rate
                continue
            label = "ldma" if method.startswith("ldma") else "sdma"
            eff, analog = effectives[label], analogs[label]
            if method.endswith("_zf"):
                try:
                    pset = zf_precoder(eff, sys, analog)
                except NumericalRegimeError:
                    results[si, mi] = 0.0  # degenerate effective channel
                    continue
                results[si, mi] = spectrum_efficiency(channels, pset, sys).sum_rate
            else:
                res = wmmse_precoder(
                    eff,
                    sys,
                    analog,
                    max_iters=cfg["wmmse_max_iters"],
                    tol=cfg["wmmse_tol"],
                )
                results[si, mi] = spectrum_efficiency(
                    channels, res.precoders, sys.with_allocation(res.power_allocation)
                ).sum_rate
    return results


def _run_multipath(cfg: dict, workers: int) -> RunResult:
    started = time.monotonic()
    trials = cfg["num_trials"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_multipath_trial, [cfg] * trials, range(trials), chunksize=8))
    else:
        per_trial = [_multipath_trial(cfg, trial) for trial in range(trials)]
    stacked = np.stack(per_trial)  # (trials, snr, methods)

    seed = cfg["seed"]
    scenario_id = cfg["scenario_kind"]
    rows: list[RunRow] = []
    for si, snr_db in enumerate(cfg["snr_grid"]):
        for mi, method in enumerate(MULTIPATH_METHODS):
            values = stacked[:, si, mi]
            if np.isnan(values).all():
                continue
            std_error = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            rows.append(
                RunRow(
                    scenario_id,
                    "snr_db",
                    float(snr_db),
                    method,
                    float(values.mean()),
                    std_error,
                    trials,
                    seed,
                )
            )
    return RunResult(scenario_id, rows, cfg, seed, time.monotonic() - started)


def run_linear_multipath(config: dict, workers: int = 1) -> RunResult:
    cfg = resolve_config(config)
    if cfg["scenario_kind"] != "linear_multipath":
        raise ConfigError("config is not a linear_multipath scenario")
    return _run_multipath(cfg, workers)


def run_uniform_cell(config: dict, workers: int = 1) -> RunResult:
    cfg = resolve_config(config)
    if cfg["scenario_kind"] != "uniform_cell":
        raise ConfigError("config is not a uniform_cell scenario")
    return _run_multipath(cfg, workers)


_RUNNERS = {
    "correlation_sweep": run_correlation_sweep,
    "linear_bound": run_linear_bound,
    "linear_multipath": run_linear_multipath,
    "uniform_cell": run_uniform_cell,
}


def run_scenario(config: dict, workers: int = 1) -> RunResult:
    cfg = resolve_config(config)
    return _RUNNERS[cfg["scenario_kind"]](cfg, workers)
