import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from onsager2d.errors import AliasingError, DivergenceError, ValidationError
from onsager2d.flux import (
    CSV_COLUMNS,
    GRID,
    SPARSE,
    GridFluxEngine,
    decay_summary,
    default_q_range,
    flux,
    flux_profile,
    trilinear_check,
)
from onsager2d.littlewood_paley import DEFAULT_PROFILE, QUINTIC_PROFILE, default_q_max
from onsager2d.spectral import SparseSpectralField, leray_project, to_grid
from onsager2d.zoo import SkeletonSpec, power_law_field, shear_field, skeleton_field, skeleton_triple

HAND_VALUE = oracles.skeleton_flux_by_hand()


def random_div_free(seed, kmax=5, density=0.5):
    rng = np.random.default_rng(seed)
    m = {}
    for a1 in range(-kmax, kmax + 1):
        for a2 in range(-kmax, kmax + 1):
            if (a1, a2) == (0, 0) or (a1, a2) in m or rng.random() > density:
                continue
            c = rng.normal(size=2) + 1j * rng.normal(size=2)
            m[(a1, a2)] = c
            m[(-a1, -a2)] = np.conj(c)
    return leray_project(SparseSpectralField.from_dict(m))


class TestSkeletonFlux:
    @pytest.mark.parametrize("q", [2, 3, 5, 8, 13, 20])
    def test_triple_matches_hand_value(self, q):
        rec = flux(skeleton_triple(q), q)
        assert rec.value == pytest.approx(HAND_VALUE, abs=1e-12)
        assert rec.method == SPARSE

    @pytest.mark.parametrize("q", [3, 4, 6])
    def test_triple_matches_bruteforce(self, q):
        u = skeleton_triple(q)
        for qq in range(1, q + 3):
            assert flux(u, qq).value == pytest.approx(oracles.flux_bruteforce(u, qq), abs=1e-12)

    def test_profile_independent(self):
        u = skeleton_field(SkeletonSpec((3, 8, 13)))
        for prof in (DEFAULT_PROFILE, QUINTIC_PROFILE):
            for q in (3, 8, 13):
                assert flux(u, q, prof).value == pytest.approx(HAND_VALUE, abs=1e-12)

    def test_superposition_equals_single_triple(self):
        U = skeleton_field(SkeletonSpec((3, 8, 13)))
        for q in (3, 8, 13):
            assert flux(U, q).value == flux(skeleton_triple(q), q).value

    def test_well_separated_scales_vanish(self):
        qs = (3, 8, 13)
        U = skeleton_field(SkeletonSpec(qs))
        for q in (1, 5, 6, 10, 11, 15, 16):
            # beyond the top scale both truncations are the identity and the
            # flux is a cancelling sum of O(1) terms
            assert abs(flux(U, q).value) < 1e-12

    def test_neighbouring_scale_is_small_but_nonzero(self):
        # the (L, l) mode sits at radius 0.56 lambda_{q+1}, inside the transition band
        u = skeleton_triple(5)
        v = flux(u, 6).value
        assert v == pytest.approx(oracles.flux_bruteforce(u, 6), abs=1e-14)
        assert 0 < abs(v) < 0.01 * abs(HAND_VALUE)

    def test_tensor_form(self):
        U = skeleton_field(SkeletonSpec((3, 8)))
        for q in range(1, 11):
            rec = flux(U, q)
            assert rec.tensor_value == pytest.approx(rec.value, rel=1e-10, abs=1e-13)

    def test_grid_agrees(self):
        u = skeleton_triple(4)
        n = 64  # 3K + 1 = 49
        for q in (3, 4, 5):
            a = flux(u, q).value
            b = flux(u, q, method=GRID, n=n).value
            assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


class TestGenericFlux:
    def test_random_field_sparse_vs_grid(self):
        u = random_div_free(0)
        eng = GridFluxEngine(u, 32)
        for q in range(0, 5):
            a = flux(u, q)
            b = flux(u, q, method=GRID, engine=eng)
            assert b.value == pytest.approx(a.value, rel=1e-8, abs=1e-10)
            assert b.tensor_value == pytest.approx(b.value, rel=1e-10, abs=1e-10)
            assert b.resolution == 32

    def test_random_field_matches_bruteforce(self):
        u = random_div_free(1, kmax=3)
        for q in range(0, 4):
            assert flux(u, q).value == pytest.approx(oracles.flux_bruteforce(u, q), rel=1e-11, abs=1e-11)

    def test_grid_input(self):
        u = random_div_free(2, kmax=4)
        g = to_grid(u, 16)
        for q in (1, 2, 3):
            assert flux(g, q, method=GRID).value == pytest.approx(flux(u, q).value, rel=1e-9, abs=1e-11)

    def test_beyond_radius_vanishes(self):
        u = random_div_free(3)
        q = default_q_max(u) + 1
        rec = flux(u, q)
        assert abs(rec.value) < 1e-12 * (u.l2_norm() ** 3 * 2 * math.pi * 8)

    def test_shear_is_zero(self):
        u = shear_field({1: 0.4, 3: 0.2j, 5: -0.1})
        for q in range(0, 5):
            assert flux(u, q).value == 0.0

    def test_single_mode_is_zero(self):
        u = SparseSpectralField([[2, 1], [-2, -1]], [[1.0, -2.0], [1.0, -2.0]])
        assert all(r.value == 0.0 for r in flux_profile(u))

    def test_zero_field(self):
        assert flux(SparseSpectralField.zero(2), 3).value == 0.0

    def test_rejects_divergent(self):
        u = SparseSpectralField([[1, 0], [-1, 0]], [[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(DivergenceError):
            flux(u, 1)

    def test_aliasing_guard(self):
        u = random_div_free(4, kmax=8)
        with pytest.raises(AliasingError):
            GridFluxEngine(u, 24)

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            flux(skeleton_triple(3), 3, method="spectral")


class TestTrilinear:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 100_000))
    def test_cancellation_sparse(self, seed):
        u = random_div_free(seed, kmax=4)
        for q in range(0, 4):
            assert trilinear_check(u, q, relative=True) < 1e-10

    def test_cancellation_grid(self):
        u = random_div_free(7, kmax=6)
        g = to_grid(u, 32)
        for q in range(0, 4):
            assert trilinear_check(g, q, relative=True) < 1e-10

    def test_skeleton(self):
        for q in (3, 8):
            assert trilinear_check(skeleton_triple(q), q) < 1e-10

    def test_zero(self):
        assert trilinear_check(SparseSpectralField.zero(2), 2) == 0.0


class TestProfile:
    def test_default_range(self):
        u = skeleton_triple(3)
        assert list(default_q_range(u)) == [1, 2, 3, 4, 5]

    def test_power_law_decay(self):
        u = power_law_field(8.0 / 3.0 + 0.5, 48, seed=0)
        recs = flux_profile(u, method=GRID, n=256)
        s = decay_summary(recs)
        assert s["ratio"] < 0.1
        assert s["overall_max"] > 0

    def test_csv_row(self):
        rec = flux(skeleton_triple(3), 3)
        row = rec.row()
        assert list(row) == CSV_COLUMNS
        assert row["lambda_q"] == 8
        assert float(row["flux_value"]) == rec.value

    def test_decay_summary_empty(self):
        assert decay_summary([])["ratio"] == 0.0
