import numpy as np
import pytest

from ldma.channel import PathComponent, channel_from_paths
from ldma.codebook import (
    analog_precoder,
    build_dft_codebook,
    build_polar_codebook,
    codebook_from_json,
    codebook_to_json,
    load_codebook,
    save_codebook,
    sweep_assign,
)
from ldma.correlation import focusing_correlation_exact
from ldma.geometry import ArrayConfig, Location


class TestDftCodebook:
    def test_single_antenna(self):
        cb = build_dft_codebook(ArrayConfig(1, 0.005, 30e9))
        assert cb.size == 1
        assert np.allclose(cb.codewords, 1.0)

    def test_orthogonal_grid(self, cfg257):
        cb = build_dft_codebook(cfg257)
        assert cb.size == 257
        gram = np.abs(cb.codewords.conj().T @ cb.codewords)
        np.fill_diagonal(gram, 0.0)
        assert gram.max() < 1e-10

    def test_unit_columns(self, cfg257):
        cb = build_dft_codebook(cfg257)
        assert np.allclose(np.linalg.norm(cb.codewords, axis=0), 1.0, atol=1e-12)

    def test_labels_are_far_field(self, cfg257):
        cb = build_dft_codebook(cfg257)
        assert all(r is None for _, r in cb.labels)


class TestPolarCodebook:
    def test_adjacent_ring_correlation_near_target(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        rings = [r for a, r in cb.labels if abs(a) < 1e-12 and r is not None]
        assert len(rings) >= 2
        for r1, r2 in zip(rings, rings[1:]):
            corr = focusing_correlation_exact(cfg257, Location(r1, 0.0), Location(r2, 0.0))
            assert 0.45 <= corr <= 0.55

    def test_ring_transition_to_far_field_near_target(self, cfg257):
        # The farthest finite ring is one spacing step from the steering
        # vector, so that pair also meets the coherence target.
        from ldma.channel import focusing_vector, steering_vector

        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        rings = [r for a, r in cb.labels if abs(a) < 1e-12 and r is not None]
        farthest = max(rings)
        corr = abs(
            np.vdot(focusing_vector(cfg257, Location(farthest, 0.0)), steering_vector(cfg257, 0.0))
        )
        assert 0.45 <= corr <= 0.55

    def test_no_coverage_hole_across_the_span(self, cfg257):
        # Any point in [r_min, 10 r_max-ish] finds a codeword within the
        # half-spacing coherence, i.e. well above the adjacent-ring target.
        from ldma.channel import focusing_vector

        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        broadside = [i for i, (a, _) in enumerate(cb.labels) if abs(a) < 1e-12]
        columns = cb.codewords[:, broadside]
        for r in np.geomspace(4.0, 1000.0, 40):
            b = focusing_vector(cfg257, Location(float(r), 0.0))
            best = np.max(np.abs(columns.conj().T @ b))
            assert best > 0.7

    def test_ring_count_grows_with_target(self, cfg257):
        # Rings pack denser when more mutual coherence is tolerated, so the
        # codebook grows with the target (and collapses toward the DFT grid
        # as the target heads to zero).
        sizes = {t: build_polar_codebook(cfg257, 4.0, t).size for t in (0.3, 0.5, 0.7)}
        assert sizes[0.3] < sizes[0.5] < sizes[0.7]

    def test_small_target_collapses_to_dft(self, cfg257):
        # Demanding near-orthogonal rings forces spacing beyond 1/r_min: only
        # the far-field ring survives on every angle.
        cb = build_polar_codebook(cfg257, 4.0, 0.05)
        assert cb.size == 257
        assert all(r is None for _, r in cb.labels)

    def test_contains_dft_subset(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        dft = build_dft_codebook(cfg257)
        far_columns = cb.codewords[:, [i for i, (_, r) in enumerate(cb.labels) if r is None]]
        assert np.array_equal(far_columns, dft.codewords)

    def test_unit_columns(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.4)
        assert np.allclose(np.linalg.norm(cb.codewords, axis=0), 1.0, atol=1e-12)

    def test_oblique_angles_have_fewer_rings(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        counts = {}
        for a, r in cb.labels:
            if r is not None:
                counts[a] = counts.get(a, 0) + 1
        angles = sorted(set(a for a, _ in cb.labels), key=abs)
        broadside, edge = angles[0], angles[-1]
        assert counts.get(broadside, 0) > counts.get(edge, 0)

    @pytest.mark.parametrize("target", [0.0, 1.0, -0.3, 1.7])
    def test_rejects_bad_target(self, cfg257, target):
        with pytest.raises(ValueError):
            build_polar_codebook(cfg257, 4.0, target)

    def test_rejects_bad_r_min(self, cfg257):
        with pytest.raises(ValueError):
            build_polar_codebook(cfg257, 0.0, 0.5)


class TestCodebookSerialization:
    def test_round_trip_bit_exact(self, cfg257, tmp_path):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        path = tmp_path / "codebook.json"
        save_codebook(cb, path)
        loaded = load_codebook(path)
        assert np.array_equal(loaded.codewords, cb.codewords)
        assert loaded.labels == cb.labels
        assert loaded.kind == cb.kind

    def test_document_schema(self, cfg257):
        doc = codebook_to_json(build_dft_codebook(cfg257))
        assert set(doc) == {"kind", "N", "d", "frequency", "coherence_target", "entries"}
        assert all(set(e) == {"angle", "distance"} for e in doc["entries"])

    def test_missing_keys_rejected(self):
        with pytest.raises(ValueError):
            codebook_from_json({"kind": "dft"})


def single_path_user(cfg, r, phi, gain=1.0 + 0j):
    return channel_from_paths(cfg, [PathComponent(gain, phi, r)], "near")


class TestSweepAssign:
    def test_single_user_gets_global_argmax(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        ch = single_path_user(cfg257, 6.0, 0.0)
        assignment = sweep_assign([ch], cb)
        table = np.abs(ch.h.conj() @ cb.codewords)
        assert assignment.user_to_codeword[0] == int(np.argmax(table))

    def test_grid_point_user_picks_its_codeword(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        idx = next(i for i, (a, r) in enumerate(cb.labels) if abs(a) < 1e-12 and r is not None)
        angle, r = cb.labels[idx]
        ch = single_path_user(cfg257, r, angle)
        assignment = sweep_assign([ch], cb)
        assert assignment.user_to_codeword[0] == idx

    def test_conflict_resolution(self, cfg257):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        strong = single_path_user(cfg257, 6.0, 0.0, gain=2.0 + 0j)
        weak = single_path_user(cfg257, 6.0, 0.0, gain=1.0 + 0j)
        assignment = sweep_assign([strong, weak], cb)
        table = np.abs(np.stack([strong.h, weak.h]).conj() @ cb.codewords)
        favourite = int(np.argmax(table[0]))
        assert assignment.user_to_codeword[0] == favourite
        second_best = int(np.argmax(np.where(np.arange(cb.size) == favourite, -np.inf, table[1])))
        assert assignment.user_to_codeword[1] == second_best

    def test_injective(self, cfg257, rng):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        users = [
            single_path_user(cfg257, rng.uniform(4, 100), rng.uniform(-1.0, 1.0))
            for _ in range(8)
        ]
        assignment = sweep_assign(users, cb)
        picked = list(assignment.user_to_codeword.values())
        assert len(set(picked)) == len(picked)

    def test_full_matching_when_users_equal_codewords(self):
        cfg = ArrayConfig.half_wavelength(9, 30e9)
        cb = build_dft_codebook(cfg)
        rng = np.random.default_rng(3)
        users = [single_path_user(cfg, rng.uniform(50, 100), rng.uniform(-1.0, 1.0)) for _ in range(9)]
        assignment = sweep_assign(users, cb)
        assert sorted(assignment.user_to_codeword.values()) == list(range(9))

    def test_too_many_users_rejected(self):
        cfg = ArrayConfig.half_wavelength(9, 30e9)
        cb = build_dft_codebook(cfg)
        users = [single_path_user(cfg, 10.0, 0.1 * k - 0.4) for k in range(10)]
        with pytest.raises(ValueError):
            sweep_assign(users, cb)

    def test_deterministic(self, cfg257, rng):
        cb = build_polar_codebook(cfg257, 4.0, 0.5)
        users = [
            single_path_user(cfg257, rng.uniform(4, 100), rng.uniform(-1.0, 1.0))
            for _ in range(4)
        ]
        first = sweep_assign(users, cb)
        second = sweep_assign(users, cb)
        assert first.user_to_codeword == second.user_to_codeword

    def test_analog_precoder_columns(self, cfg257):
        cb = build_dft_codebook(cfg257)
        users = [single_path_user(cfg257, 60.0, -0.5), single_path_user(cfg257, 70.0, 0.5)]
        assignment = sweep_assign(users, cb)
        f_a = analog_precoder(cb, assignment)
        for k in range(2):
            assert np.array_equal(f_a[:, k], cb.codewords[:, assignment.user_to_codeword[k]])
