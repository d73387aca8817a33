import numpy as np
import pytest

from cvqkd.fock import beamsplitter_5050, displace, number_state, vacuum
from cvqkd.quadrature import (
    Density,
    Grid1D,
    GridTooNarrowError,
    default_grid,
    joint_quadrature_density,
    marginal,
    wigner,
    wigner_grid,
)
from cvqkd.states import Family, StateSpec, build_state

from _oracles import wigner_direct

TWO_OVER_PI = 2.0 / np.pi


@pytest.fixture(scope="module")
def grid():
    return default_grid()


def family_state(family, alpha=1.0, r=0.0, dim=64):
    state, _ = build_state(StateSpec(family, alpha=alpha, r=r), dim=dim)
    return state


class TestGrid:
    def test_point_count(self):
        assert Grid1D(-8, 8, 0.01).size == 1601

    def test_non_integer_step_rejected(self):
        with pytest.raises(ValueError):
            Grid1D(-1, 1, 0.3)

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            Grid1D(2, -2, 0.1)


class TestDensity:
    def test_tiny_negatives_clipped(self):
        g = Grid1D(0, 1, 0.5)
        d = Density(g, [-1e-13, 0.1, 0.2], require_normalized=False)
        assert d.values[0] == 0.0

    def test_large_negatives_rejected(self):
        g = Grid1D(0, 1, 0.5)
        with pytest.raises(ValueError):
            Density(g, [-1e-3, 0.1, 0.2], require_normalized=False)

    def test_normalization_enforced(self):
        g = Grid1D(-1, 1, 0.1)
        with pytest.raises(GridTooNarrowError):
            Density(g, np.full(g.size, 0.1))

    def test_quantile_inverts_cdf(self, grid):
        dens = marginal(family_state(Family.COHERENT), "z1", grid)
        us = np.linspace(0.05, 0.95, 19)
        zs = dens.quantile(us)
        back = np.array([dens.prob_below(z) for z in zs])
        assert np.max(np.abs(back - us)) < 1e-6


class TestMarginal:
    def test_coherent_gaussian(self, grid):
        dens = marginal(family_state(Family.COHERENT), "z1", grid)
        at_one = np.interp(1.0, grid.points, dens.values)
        assert at_one == pytest.approx(np.sqrt(2 / np.pi), abs=1e-9)
        assert dens.mean() == pytest.approx(1.0, abs=1e-9)
        assert dens.variance() == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("family", list(Family))
    def test_unit_mass(self, family, grid):
        dens = marginal(family_state(family, r=0.2), "z1", grid)
        assert dens.integral() == pytest.approx(1.0, abs=1e-4)

    def test_z2_axis_sees_imaginary_displacement(self, grid):
        state, _ = build_state(StateSpec(Family.COHERENT, alpha=1.0,
                                         phase=np.pi / 2))
        dens = marginal(state, "z2", grid)
        assert dens.mean() == pytest.approx(1.0, abs=1e-9)
        dens1 = marginal(state, "z1", grid)
        assert dens1.mean() == pytest.approx(0.0, abs=1e-9)

    def test_reflection_symmetry(self, grid):
        plus = family_state(Family.ADDED_SUBTRACTED_SQUEEZED, r=0.2)
        minus, _ = build_state(
            StateSpec(Family.ADDED_SUBTRACTED_SQUEEZED, alpha=-1.0, r=0.2))
        p = marginal(plus, "z1", grid).values
        m = marginal(minus, "z1", grid).values
        assert np.max(np.abs(m - p[::-1])) < 1e-10

    def test_narrow_grid_rejected(self):
        with pytest.raises(GridTooNarrowError):
            marginal(family_state(Family.COHERENT, alpha=2.0), "z1",
                     Grid1D(-1, 1, 0.01))

    def test_bad_axis(self, grid):
        with pytest.raises(ValueError):
            marginal(family_state(Family.COHERENT), "z3", grid)


class TestWigner:
    def test_vacuum_peak(self):
        assert wigner(vacuum(32), 0.0) == pytest.approx(TWO_OVER_PI, abs=1e-10)

    def test_single_photon_negative_peak(self):
        assert wigner(number_state(1, 32), 0.0) == pytest.approx(
            -TWO_OVER_PI, abs=1e-10)

    def test_coherent_displaced_peak(self):
        state = displace(vacuum(64), 1.0)
        assert wigner(state, 1.0) == pytest.approx(TWO_OVER_PI, abs=1e-9)
        assert wigner(state, 0.0) == pytest.approx(
            TWO_OVER_PI * np.exp(-2.0), abs=1e-9)

    def test_spasscs_negative_region(self):
        state = family_state(Family.ADDED_SUBTRACTED_SQUEEZED, r=0.5, dim=128)
        g = Grid1D(-4, 4, 0.05)
        assert wigner_grid(state, g, g).min() < -0.01

    @pytest.mark.parametrize("family", [Family.COHERENT, Family.SQUEEZED])
    def test_gaussian_families_nonnegative(self, family):
        state = family_state(family, r=0.5, dim=128)
        g = Grid1D(-4, 4, 0.05)
        assert wigner_grid(state, g, g).min() > -1e-8

    @pytest.mark.parametrize("family,r", [(f, r) for f in Family
                                          for r in (0.0, 0.2, 0.5)])
    def test_bound_and_normalization(self, family, r):
        state = family_state(family, r=r, dim=128)
        g = Grid1D(-6, 6, 0.1)
        values = wigner_grid(state, g, g)
        assert np.max(np.abs(values)) <= TWO_OVER_PI + 1e-8
        total = np.trapezoid(np.trapezoid(values, g.points, axis=1), g.points)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_marginal_consistency(self):
        state = family_state(Family.ADDED_SUBTRACTED_SQUEEZED, r=0.2, dim=128)
        g = Grid1D(-6, 6, 0.05)
        values = wigner_grid(state, g, g)
        from_wigner = np.trapezoid(values, g.points, axis=1)
        direct = marginal(state, "z1", g).values
        assert np.max(np.abs(from_wigner - direct)) < 1e-5

    @pytest.mark.parametrize("family,r", [(Family.COHERENT, 0.0),
                                          (Family.SQUEEZED, 0.3),
                                          (Family.ADDED_SUBTRACTED_SQUEEZED, 0.2)])
    def test_matches_direct_integral(self, family, r):
        state = family_state(family, r=r)
        rng = np.random.default_rng(99)
        betas = rng.uniform(-1.5, 1.5, 5) + 1j * rng.uniform(-1.5, 1.5, 5)
        for beta in betas:
            reference = wigner_direct(state.amps, complex(beta))
            assert wigner(state, beta) == pytest.approx(reference, abs=1e-4)


class TestJointDensity:
    def test_two_mode_vacuum_factorizes(self):
        g = Grid1D(-4, 4, 0.05)
        tm = beamsplitter_5050(vacuum(16), vacuum(16))
        dens = joint_quadrature_density(tm, g, g)
        peak = dens.values[g.size // 2, g.size // 2]
        assert peak == pytest.approx(TWO_OVER_PI, abs=1e-9)

    def test_split_coherent_peak_location(self):
        g = Grid1D(-4, 4, 0.02)
        tm = beamsplitter_5050(displace(vacuum(48), 1.0), vacuum(48))
        dens = joint_quadrature_density(tm, g, g)
        i, j = np.unravel_index(np.argmax(dens.values), dens.values.shape)
        assert g.points[i] == pytest.approx(1 / np.sqrt(2), abs=0.02)
        assert g.points[j] == pytest.approx(1 / np.sqrt(2), abs=0.02)

    def test_split_coherent_factorizes(self):
        g = Grid1D(-4, 4, 0.05)
        tm = beamsplitter_5050(displace(vacuum(48), 1.0), vacuum(48))
        dens = joint_quadrature_density(tm, g, g)
        prod = np.outer(dens.marginal_z().values, dens.marginal_x().values)
        assert np.max(np.abs(dens.values - prod)) < 1e-6

    def test_split_spasscs_is_correlated(self):
        g = Grid1D(-5, 5, 0.05)
        state = family_state(Family.ADDED_SUBTRACTED_SQUEEZED, r=1.0, dim=128)
        tm = beamsplitter_5050(state, vacuum(state.dim))
        dens = joint_quadrature_density(tm, g, g)
        prod = np.outer(dens.marginal_z().values, dens.marginal_x().values)
        assert np.max(np.abs(dens.values - prod)) > 1e-3

    def test_unit_mass(self):
        g = Grid1D(-5, 5, 0.05)
        tm = beamsplitter_5050(displace(vacuum(48), 1.0), vacuum(48))
        assert joint_quadrature_density(tm, g, g).integral() == pytest.approx(
            1.0, abs=1e-4)
