"""Beam codebooks and sweep-based codeword assignment.

The far-field codebook is the orthogonal DFT grid in sin-angle. The
location (polar) codebook reuses that angle grid and adds distance rings per
angle, spaced uniformly in inverse distance so adjacent rings meet a target
coherence; the outermost "ring" of every angle is the plain steering vector,
so the location codebook contains the DFT codebook as a subset.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import focusing_vector, stack_channels, steering_vector
from .correlation import solve_envelope_beta
from .geometry import ArrayConfig, Location


@dataclass(frozen=True)
class Codebook:
    """Unit-norm codeword columns plus the (angle, distance) label of each.

    ``distance is None`` labels a far-field codeword. Codewords are always
    regenerable from labels and the array geometry, which is what the JSON
    round trip relies on.
    """

    codewords: np.ndarray  # N x M, unit-norm columns
    labels: tuple[tuple[float, float | None], ...]
    kind: str  # "dft" or "polar"
    coherence_target: float
    array: ArrayConfig

    @property
    def size(self) -> int:
        return self.codewords.shape[1]


def dft_angle_grid(cfg: ArrayConfig) -> np.ndarray:
    """Angles of the N-point DFT grid, uniform in sin: (2m - N + 1)/N."""
    n_ant = cfg.num_antennas
    return np.arcsin((2.0 * np.arange(n_ant) - n_ant + 1.0) / n_ant)


def build_dft_codebook(cfg: ArrayConfig) -> Codebook:
    """N steering-vector codewords on the DFT angle grid."""
    angles = dft_angle_grid(cfg)
    codewords = np.stack([steering_vector(cfg, a) for a in angles], axis=1)
    labels = tuple((float(a), None) for a in angles)
    return Codebook(codewords=codewords, labels=labels, kind="dft", coherence_target=1.0, array=cfg)


def polar_ring_distances(cfg: ArrayConfig, angle: float, r_min: float, beta_star: float) -> list[float]:
    """Finite distance rings for one angle, farthest first.

    Rings sit at 1/r = s * du for s = 1, 2, ... with du chosen so adjacent
    rings (including the far-field ring at 1/r = 0) are beta_star apart in
    the correlation argument; the ladder stops at the last ring outside
    r_min, leaving no coverage hole anywhere on [r_min, infinity).
    """
    cos_phi = math.cos(angle)
    n_ant = cfg.num_antennas
    du = (
        2.0
        * cfg.wavelength
        * beta_star
        * beta_star
        / (n_ant * n_ant * cfg.element_spacing**2 * cos_phi * cos_phi)
    )
    u0 = 1.0 / r_min
    count = int(math.floor(u0 / du)) if du > 0 else 0
    return [1.0 / (s * du) for s in range(1, count + 1)]


def build_polar_codebook(cfg: ArrayConfig, r_min: float, coherence_target: float) -> Codebook:
    """Angle grid identical to the DFT codebook, distance rings per angle.

    Adjacent rings on one angle have correlation close to ``coherence_target``
    (solved on the monotone envelope of the closed-form correlation). Ring
    counts vary with angle: the spacing grows as 1/cos^2, so oblique angles
    carry fewer rings.
    """
    if not (0.0 < coherence_target < 1.0):
        raise ValueError(f"coherence_target must lie in (0, 1), got {coherence_target!r}")
    if not r_min > 0:
        raise ValueError(f"r_min must be > 0, got {r_min!r}")
    beta_star = solve_envelope_beta(coherence_target)
    columns = []
    labels = []
    for angle in dft_angle_grid(cfg):
        angle = float(angle)
        for r in polar_ring_distances(cfg, angle, r_min, beta_star):
            columns.append(focusing_vector(cfg, Location(r, angle), "exact"))
            labels.append((angle, float(r)))
        columns.append(steering_vector(cfg, angle))
        labels.append((angle, None))
    codewords = np.stack(columns, axis=1)
    return Codebook(
        codewords=codewords,
        labels=tuple(labels),
        kind="polar",
        coherence_target=float(coherence_target),
        array=cfg,
    )


def codebook_to_json(cb: Codebook) -> dict:
    """JSON document with geometry and labels only; vectors are regenerated."""
    return {
        "kind": cb.kind,
        "N": cb.array.num_antennas,
        "d": cb.array.element_spacing,
        "frequency": cb.array.carrier_frequency,
        "coherence_target": cb.coherence_target,
        "entries": [{"angle": a, "distance": r} for a, r in cb.labels],
    }


def codebook_from_json(doc: dict) -> Codebook:
    """Rebuild a codebook bit-exactly from its geometry and labels."""
    required = {"kind", "N", "d", "frequency", "coherence_target", "entries"}
    missing = required - doc.keys()
    if missing:
        raise ValueError(f"codebook document missing keys: {sorted(missing)}")
    cfg = ArrayConfig(int(doc["N"]), float(doc["d"]), float(doc["frequency"]))
    columns = []
    labels = []
    for entry in doc["entries"]:
        angle = float(entry["angle"])
        dist = entry["distance"]
        if dist is None:
            columns.append(steering_vector(cfg, angle))
            labels.append((angle, None))
        else:
            columns.append(focusing_vector(cfg, Location(float(dist), angle), "exact"))
            labels.append((angle, float(dist)))
    return Codebook(
        codewords=np.stack(columns, axis=1),
        labels=tuple(labels),
        kind=str(doc["kind"]),
        coherence_target=float(doc["coherence_target"]),
        array=cfg,
    )


def save_codebook(cb: Codebook, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(codebook_to_json(cb), fh, indent=1)
        fh.write("\n")


def load_codebook(path) -> Codebook:
    with open(path, "r", encoding="utf-8") as fh:
        return codebook_from_json(json.load(fh))


@dataclass(frozen=True)
class BeamAssignment:
    """Injective user -> codeword map from beam sweeping, with the swept gains."""

    user_to_codeword: dict[int, int]
    gains: np.ndarray  # per user, |w^H h| of the assigned codeword


def sweep_assign(channels, cb: Codebook) -> BeamAssignment:
    """Greedy injective assignment of codewords by swept gain.

    Users are processed in descending order of their best-vs-second-best gain
    margin over the still-available codewords, so a user whose favourite beam
    is contested by a clearly better competitor falls back to its runner-up.
    Deterministic: ties break toward the lower user then codeword index.
    """
    h_mat = stack_channels(channels)
    num_users = h_mat.shape[0]
    if num_users > cb.size:
        raise ValueError(f"{num_users} users exceed the {cb.size} available codewords")
    gain_table = np.abs(h_mat.conj() @ cb.codewords)  # K x M, |w^H h|
    available = np.ones(cb.size, dtype=bool)
    unassigned = list(range(num_users))
    assignment: dict[int, int] = {}
    while unassigned:
        best_user = None
        best_key = None
        for user in unassigned:
            gains = gain_table[user]
            order = np.argsort(gains[available])
            avail_idx = np.flatnonzero(available)
            top = gains[avail_idx[order[-1]]]
            second = gains[avail_idx[order[-2]]] if order.size > 1 else -math.inf
            margin = top - second
            key = (margin, top, -user)
            if best_key is None or key > best_key:
                best_key = key
                best_user = user
        gains = np.where(available, gain_table[best_user], -np.inf)
        codeword = int(np.argmax(gains))
        assignment[best_user] = codeword
        available[codeword] = False
        unassigned.remove(best_user)
    gains = np.array([gain_table[u, assignment[u]] for u in range(num_users)])
    return BeamAssignment(user_to_codeword=assignment, gains=gains)


def analog_precoder(cb: Codebook, assignment: BeamAssignment, num_users: int | None = None) -> np.ndarray:
    """N x K analog matrix whose column k is user k's assigned codeword."""
    if num_users is None:
        num_users = len(assignment.user_to_codeword)
    cols = [assignment.user_to_codeword[k] for k in range(num_users)]
    return cb.codewords[:, cols]
