import numpy as np
import pytest

from cvqkd.fock import (
    FockState,
    UnderTruncationError,
    apply_ladder,
    beamsplitter,
    beamsplitter_5050,
    displace,
    hermite_functions,
    number_state,
    quadrature_wavefunction,
    rotate,
    squeeze,
    vacuum,
)


def random_state(seed, dim=64, support=40, decay=0.35):
    rng = np.random.default_rng(seed)
    amps = np.zeros(dim, dtype=complex)
    envelope = np.exp(-decay * np.arange(support))
    amps[:support] = envelope * (rng.normal(size=support)
                                 + 1j * rng.normal(size=support))
    return FockState(amps).normalized()


class TestLadder:
    def test_create_vacuum(self):
        out, norm_sq = apply_ladder(vacuum(16), "create")
        assert norm_sq == pytest.approx(1.0)
        assert out.amps[1] == pytest.approx(1.0)

    def test_annihilate_vacuum_is_zero(self):
        out, norm_sq = apply_ladder(vacuum(16), "annihilate")
        assert norm_sq == 0.0
        assert np.all(out.amps == 0)

    def test_add_then_subtract_vacuum(self):
        mid, _ = apply_ladder(vacuum(16), "create")
        out, norm_sq = apply_ladder(mid, "annihilate")
        assert norm_sq == pytest.approx(1.0)
        assert out.amps[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_commutator_is_identity(self, seed):
        state = random_state(seed)
        created, _ = apply_ladder(state, "create")
        ca, _ = apply_ladder(created, "annihilate")
        annihilated, _ = apply_ladder(state, "annihilate")
        ac, _ = apply_ladder(annihilated, "create")
        diff = ca.amps - ac.amps
        assert np.max(np.abs(diff - state.amps)) < 1e-8

    def test_create_on_full_top_level_raises(self):
        with pytest.raises(UnderTruncationError):
            apply_ladder(number_state(15, 16), "create")


class TestDisplace:
    def test_coherent_amplitudes(self):
        state = displace(vacuum(64), 1.0)
        from scipy.special import factorial

        n = np.arange(10)
        expected = np.exp(-0.5) / np.sqrt(factorial(n))
        assert np.allclose(state.amps[:10], expected, atol=1e-12)

    def test_zero_is_identity(self):
        state = random_state(3)
        assert displace(state, 0.0) is state

    def test_inverse(self):
        state = displace(displace(vacuum(64), 1.0), -1.0)
        assert abs(state.overlap(vacuum(64))) > 1 - 1e-8

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0, 1.0 + 0.7j])
    def test_norm_preserved(self, alpha):
        state = random_state(7, support=30)
        out = displace(state, alpha)
        assert abs(out.norm_sq() - 1.0) < 1e-6

    def test_under_truncation(self):
        with pytest.raises(UnderTruncationError):
            displace(vacuum(16), 3.5)


class TestSqueeze:
    def test_squeezed_vacuum_amplitudes(self):
        state = squeeze(vacuum(64), 0.5)
        c = np.cosh(0.5)
        t = np.tanh(0.5)
        assert state.amps[0].real == pytest.approx(1 / np.sqrt(c), abs=1e-10)
        assert np.max(np.abs(state.amps[1::2])) < 1e-12
        assert state.amps[2].real == pytest.approx(np.sqrt(2) * t / (2 * np.sqrt(c)),
                                                   abs=1e-10)

    def test_zero_is_identity(self):
        state = random_state(5)
        assert squeeze(state, 0.0) is state

    def test_inverse(self):
        state = squeeze(squeeze(vacuum(64), 0.4), -0.4)
        assert abs(state.overlap(vacuum(64))) > 1 - 1e-8

    @pytest.mark.parametrize("r", [-1.0, -0.3, 0.3, 1.0])
    def test_norm_preserved(self, r):
        state = random_state(11, support=8)
        out = squeeze(state, r)
        assert abs(out.norm_sq() - 1.0) < 1e-6

    def test_under_truncation(self):
        # odd truncation so the guard band holds an even level
        with pytest.raises(UnderTruncationError):
            squeeze(vacuum(17), 1.4)

    def test_quadrature_variances(self):
        # the generator sign stretches z1 and narrows z2 for r > 0
        from cvqkd.quadrature import Grid1D, marginal

        grid = Grid1D(-8, 8, 0.01)
        state = squeeze(vacuum(64), 0.4)
        assert marginal(state, "z1", grid).variance() == pytest.approx(
            np.exp(0.8) / 4, abs=1e-6)
        assert marginal(state, "z2", grid).variance() == pytest.approx(
            np.exp(-0.8) / 4, abs=1e-6)


class TestRotate:
    def test_pi_rotation_is_parity(self):
        state = displace(vacuum(64), 1.0)
        flipped = rotate(state, np.pi)
        direct = displace(vacuum(64), -1.0)
        assert np.allclose(flipped.amps, direct.amps, atol=1e-10)


class TestBeamsplitter:
    def test_coherent_splits_into_coherent_pair(self):
        alpha = 1.0
        tm = beamsplitter_5050(displace(vacuum(48), alpha), vacuum(48))
        arm = displace(vacuum(48), alpha / np.sqrt(2)).amps
        expected = np.outer(arm, arm)
        overlap = abs(np.vdot(expected, tm.amps))
        assert overlap > 1 - 1e-8

    def test_vacuum_inputs(self):
        tm = beamsplitter_5050(vacuum(16), vacuum(16))
        assert tm.amps[0, 0] == pytest.approx(1.0)
        assert tm.norm_sq() == pytest.approx(1.0)

    def test_single_photon_splits_evenly(self):
        tm = beamsplitter_5050(number_state(1, 16), vacuum(16))
        p10 = abs(tm.amps[1, 0]) ** 2
        p01 = abs(tm.amps[0, 1]) ** 2
        assert p10 == pytest.approx(0.5, abs=1e-12)
        assert p01 == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_energy_conservation(self, seed):
        a = random_state(seed, dim=32, support=10)
        b = random_state(seed + 100, dim=32, support=8)
        tm = beamsplitter_5050(a, b)
        na, nb = tm.mean_photon_numbers()
        assert na + nb == pytest.approx(
            a.mean_photon_number() + b.mean_photon_number(), abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            beamsplitter_5050(vacuum(16), vacuum(32))

    def test_general_transmission_coherent(self):
        t = np.sqrt(0.7)
        tm = beamsplitter(displace(vacuum(48), 1.0), vacuum(48), t)
        bob = displace(vacuum(48), t).amps
        eve = displace(vacuum(48), np.sqrt(0.3)).amps
        overlap = abs(np.vdot(np.outer(bob, eve), tm.amps))
        assert overlap > 1 - 1e-8

    def test_truncation_loss_raises(self):
        with pytest.raises(UnderTruncationError):
            beamsplitter_5050(number_state(7, 8), number_state(7, 8))


class TestQuadratureWavefunction:
    def test_ground_state_peak(self):
        assert quadrature_wavefunction(0, 0.0) == pytest.approx(
            (2 / np.pi) ** 0.25, abs=1e-12)

    def test_odd_parity_zero(self):
        assert quadrature_wavefunction(1, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_unit_norm_level_three(self):
        z = np.arange(-8, 8 + 1e-12, 0.01)
        vals = quadrature_wavefunction(3, z)
        assert np.trapezoid(vals**2, z) == pytest.approx(1.0, abs=1e-8)

    def test_orthonormality(self):
        z = np.arange(-8, 8 + 1e-12, 0.01)
        table = hermite_functions(z, 21)
        gram = table.T @ table * 0.01
        # trapezoid end corrections are negligible here
        assert np.max(np.abs(gram - np.eye(21))) < 1e-6
