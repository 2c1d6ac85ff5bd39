import math

import numpy as np
import pytest

import oracles
from onsager2d.errors import BlockOverlapError, GapRuleError, ValidationError
from onsager2d.spectral import lp_norm
from onsager2d.zoo import (
    LatticeSpec,
    SkeletonSpec,
    default_q_list,
    dirichlet_kernel,
    dirichlet_lp_norm,
    lattice_field,
    lattice_triple,
    loglog_slope,
    power_law_field,
    projection_factor,
    shear_field,
    skeleton_field,
    skeleton_triple,
    taylor_green,
)
from onsager2d.zoo import _check_disjoint


class TestSkeleton:
    def test_triple_modes(self):
        u = skeleton_triple(4)
        assert u.support() == {(0, 8), (0, -8), (16, 0), (-16, 0), (16, 8), (-16, -8)}
        assert u.is_divergence_free(0.0)
        u.check_real()

    def test_amplitudes(self):
        q = 6
        u = skeleton_triple(q)
        a, b = 32 ** (-1 / 3), 64 ** (-1 / 3)
        assert u.coefficient((0, 32))[0] == pytest.approx(1j * a)
        assert np.allclose(u.coefficient((64, 32)), [-b, 2 * b])

    def test_pointwise_formula(self):
        # v = -2a sin(2 pi l x2) e1, w = 2b cos(2 pi L x1) e2 + 2b cos(2 pi (L x1 + l x2)) (-1, 2)
        q = 3
        L, l = 8, 4
        a, b = l ** (-1 / 3), L ** (-1 / 3)
        rng = np.random.default_rng(0)
        x1, x2 = rng.random(20), rng.random(20)
        got = oracles.evaluate(skeleton_triple(q), x1, x2).real
        c = np.cos(2 * np.pi * (L * x1 + l * x2))
        want1 = -2 * a * np.sin(2 * np.pi * l * x2) - 2 * b * c
        want2 = 2 * b * np.cos(2 * np.pi * L * x1) + 4 * b * c
        assert np.allclose(got[0], want1) and np.allclose(got[1], want2)

    def test_gap_rule(self):
        SkeletonSpec((3, 6))
        with pytest.raises(GapRuleError):
            SkeletonSpec((3, 5))
        with pytest.raises(ValidationError):
            SkeletonSpec((1, 5))
        with pytest.raises(ValidationError):
            SkeletonSpec(())

    def test_field_is_sum(self):
        U = skeleton_field(SkeletonSpec(default_q_list(3, 3)))
        assert len(U) == 18
        assert U.max_freq == 2**13

    def test_l2_norm(self):
        # 2a^2 + 2b^2 + 10b^2 for one triple
        q = 5
        a2, b2 = 16 ** (-2 / 3), 32 ** (-2 / 3)
        assert skeleton_triple(q).l2_norm() == pytest.approx(math.sqrt(2 * a2 + 12 * b2), rel=1e-14)

    def test_default_q_list(self):
        assert default_q_list(3, 3) == (3, 8, 13)
        assert default_q_list(4, 2, gap=4) == (4, 8)


class TestLattice:
    def test_mode_count(self):
        q, eps = 6, 1 / 8
        u = lattice_triple(q, eps, project=False)
        mv, mw = int(eps * 32), int(eps * 64)
        assert len(u) == 2 * (2 * mv + 1) ** 2 + 4 * (2 * mw + 1) ** 2

    def test_raw_l2(self):
        q, eps = 5, 1 / 8
        mv, mw = 2, 4
        cv, cw = 16 ** (-5 / 3), 32 ** (-5 / 3)
        want = 2 * (2 * mv + 1) ** 2 * cv**2 + 12 * (2 * mw + 1) ** 2 * cw**2
        assert lattice_triple(q, eps, project=False).l2_norm() ** 2 == pytest.approx(want, rel=1e-13)

    def test_projected_is_solenoidal_and_real(self):
        u = lattice_triple(7, 1 / 16)
        assert u.is_divergence_free(1e-14)
        u.check_real()
        assert 0.8 < projection_factor(7, 1 / 16) <= 1.0

    def test_degenerates_to_skeleton_shape(self):
        # very small eps: single-mode blocks with amplitudes lambda^-5/3
        u = lattice_triple(4, 1 / 64, project=False)
        assert u.support() == skeleton_triple(4).support()

    def test_field_blocks_disjoint(self):
        U = lattice_field(LatticeSpec((3, 6, 9), eps=1 / 8))
        assert len(U) == sum(len(lattice_triple(q, 1 / 8)) for q in (3, 6, 9))

    def test_overlap_detected(self):
        with pytest.raises(BlockOverlapError):
            _check_disjoint([((0, 4), 2, None), ((0, 6), 1, None)])
        with pytest.raises(BlockOverlapError):
            _check_disjoint([((0, 1), 1, None)])

    def test_eps_range(self):
        with pytest.raises(ValidationError):
            LatticeSpec((3, 6), eps=0.25)


class TestDirichlet:
    def test_kernel_values(self):
        x, d = dirichlet_kernel(5)
        for i in (0, 3, 17, 100):
            assert d[i] == pytest.approx(oracles.dirichlet_value(5, x[i]), abs=1e-11)

    def test_l1_growth_is_logarithmic(self):
        v = [dirichlet_lp_norm(n, 1.0) for n in (64, 128, 256)]
        # Lebesgue constants grow by (4 / pi^2) log 2 per doubling
        for a, b in zip(v, v[1:]):
            assert b - a == pytest.approx(4 / math.pi**2 * math.log(2), rel=0.05)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_slope(self, p):
        ns = [64, 128, 256, 512]
        s = loglog_slope(ns, [dirichlet_lp_norm(n, p) for n in ns])
        assert s == pytest.approx(1 - 1 / p, rel=0.02)

    def test_l2_exact(self):
        assert dirichlet_lp_norm(20, 2.0) == pytest.approx(math.sqrt(41), rel=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            dirichlet_kernel(10, samples=16)


class TestRegularFields:
    def test_power_law_amplitudes(self):
        u = power_law_field(2.0, 6, seed=3)
        mag = np.linalg.norm(u.c, axis=1)
        assert np.allclose(mag, np.hypot(*u.k.T) ** -2.0)
        assert u.is_divergence_free(1e-14)

    def test_power_law_seeded(self):
        assert power_law_field(2.0, 6, seed=1) == power_law_field(2.0, 6, seed=1)
        assert not power_law_field(2.0, 6, seed=1) == power_law_field(2.0, 6, seed=2)

    def test_shear(self):
        u = shear_field({2: 0.5})
        x2 = np.linspace(0, 1, 7)
        got = oracles.evaluate(u, np.zeros_like(x2), x2).real
        assert np.allclose(got[0], np.cos(4 * np.pi * x2)) and np.allclose(got[1], 0)

    def test_taylor_green(self):
        u = taylor_green()
        rng = np.random.default_rng(1)
        x1, x2 = rng.random(10), rng.random(10)
        got = oracles.evaluate(u, x1, x2).real
        s, c = np.sin, np.cos
        assert np.allclose(got[0], s(2 * np.pi * x1) * c(2 * np.pi * x2))
        assert np.allclose(got[1], -c(2 * np.pi * x1) * s(2 * np.pi * x2))
        assert lp_norm(u, 2.0) == pytest.approx(math.sqrt(0.5), rel=1e-12)
