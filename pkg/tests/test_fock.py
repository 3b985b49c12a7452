"""
Tests for Fock states, kets, mode transforms and the permanent oracle.
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourphoton.constants import MAX_INTERNAL_MODES
from fourphoton.fock import (
    FockState,
    Ket,
    ModeId,
    ModeTransform,
    annihilate,
    apply_internal_isometry,
    apply_mode_transform,
    create,
    inner,
    make_fock,
    permanent,
    random_unitary,
    transition_amplitude,
)
from fourphoton.optics import BeamSplitter


def splitter(t):
    """Two-channel splitter transform."""
    return BeamSplitter(t).transform()


def fock(*counts):
    """Normalized single-internal-mode Fock ket."""
    return Ket.basis(FockState.from_counts(counts))


def random_ket(rng, photons, channels, internal):
    """Random normalized superposition of all states with a photon number."""
    modes = [ModeId(e, i) for e in range(channels) for i in range(internal)]
    states = [
        FockState(zip(modes, counts, strict=True))
        for counts in itertools.product(range(photons + 1), repeat=len(modes))
        if sum(counts) == photons
    ]
    amplitudes = rng.standard_normal(len(states)) + 1j * rng.standard_normal(
        len(states)
    )
    return Ket(zip(states, amplitudes, strict=True)).normalized()


class TestFockState:
    """Test canonical Fock states."""

    def test_canonical_merges_and_sorts(self):
        """Test that repeated modes merge and zero counts vanish."""
        state = make_fock(
            [(ModeId(1), 1), (ModeId(0), 2), (ModeId(1), 1), (ModeId(2), 0)]
        )
        assert state.occupations == ((ModeId(0), 2), (ModeId(1), 2))
        assert state.total_n == 4

    def test_equal_states_hash_equal(self):
        """Test that order of construction does not matter."""
        a = FockState([(ModeId(0), 1), (ModeId(1, 1), 1)])
        b = FockState([(ModeId(1, 1), 1), (ModeId(0), 1)])
        assert a == b
        assert hash(a) == hash(b)

    def test_negative_count_rejected(self):
        """Test that negative occupations raise."""
        with pytest.raises(ValueError, match="non-negative"):
            make_fock([(ModeId(0), -1)])

    def test_negative_mode_index_rejected(self):
        """Test that negative mode indices raise."""
        with pytest.raises(ValueError):
            ModeId(-1)

    def test_internal_index_limit(self):
        """Test that internal modes stay below the engine limit."""
        assert ModeId(0, MAX_INTERNAL_MODES - 1).internal == MAX_INTERNAL_MODES - 1
        with pytest.raises(ValueError, match="below"):
            ModeId(0, MAX_INTERNAL_MODES)

    def test_from_counts_and_pattern(self):
        """Test per-channel construction and internal-blind pattern."""
        state = FockState.from_counts((2, 1))
        assert state.count(ModeId(0)) == 2
        assert state.count(ModeId(5)) == 0
        mixed = FockState([(ModeId(0, 0), 1), (ModeId(0, 3), 1), (ModeId(1, 1), 2)])
        assert mixed.pattern(2) == (2, 2)
        assert mixed.pattern(3) == (2, 2, 0)
        assert mixed.max_internal == 3
        assert mixed.max_external == 1

    def test_vacuum(self):
        """Test the empty state."""
        vac = FockState()
        assert vac.total_n == 0
        assert vac.max_external == -1
        assert str(vac) == "|vac>"

    def test_factorial_product(self):
        """Test the product of occupation factorials."""
        assert FockState.from_counts((2, 3)).factorial_product() == 12


class TestKet:
    """Test sparse kets."""

    def test_basis_is_normalized(self):
        """Test a single basis ket."""
        ket = Ket.basis(FockState.from_counts((1, 1)))
        assert ket.is_normalized()
        assert ket.photon_number == 2
        assert len(ket) == 1

    def test_repeated_terms_sum_and_prune(self):
        """Test that duplicates are summed and cancelled terms dropped."""
        s = FockState.from_counts((1, 0))
        t = FockState.from_counts((0, 1))
        ket = Ket([(s, 0.5), (s, -0.5), (t, 1.0)])
        assert len(ket) == 1
        assert ket.amplitude(s) == 0j

    def test_mixed_photon_numbers_rejected(self):
        """Test that kets keep a single photon number."""
        with pytest.raises(ValueError, match="photon number"):
            Ket(
                [
                    (FockState.from_counts((1,)), 1.0),
                    (FockState.from_counts((2,)), 1.0),
                ]
            )

    def test_normalized(self):
        """Test normalization of a superposition."""
        ket = Ket(
            [
                (FockState.from_counts((1, 0)), 3.0),
                (FockState.from_counts((0, 1)), 4.0j),
            ]
        ).normalized()
        assert ket.squared_norm == pytest.approx(1.0)
        assert ket.amplitude(FockState.from_counts((1, 0))) == pytest.approx(0.6)

    def test_zero_vector_cannot_be_normalized(self):
        """Test that the zero vector raises."""
        with pytest.raises(ValueError):
            Ket([]).normalized()

    def test_arithmetic_and_inner(self):
        """Test addition, scaling and the inner product."""
        a = Ket.basis(FockState.from_counts((1, 0)))
        b = Ket.basis(FockState.from_counts((0, 1)))
        psi = (a + 1j * b) * (1 / math.sqrt(2))
        assert inner(psi, psi) == pytest.approx(1.0)
        assert inner(a, psi) == pytest.approx(1 / math.sqrt(2))
        assert inner(b, psi) == pytest.approx(1j / math.sqrt(2))

    def test_terms_are_read_only(self):
        """Test that the amplitude view cannot be mutated."""
        ket = Ket.vacuum()
        with pytest.raises(TypeError):
            ket.terms[FockState()] = 2.0


class TestModeTransform:
    """Test unitary mode transforms."""

    def test_non_unitary_rejected(self):
        """Test unitarity validation."""
        with pytest.raises(ValueError, match="not unitary"):
            ModeTransform(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_non_square_rejected(self):
        """Test shape validation."""
        with pytest.raises(ValueError, match="square"):
            ModeTransform(np.ones((2, 3)))

    def test_then_composes_in_order(self):
        """Test that composition applies self first."""
        rng = np.random.default_rng(1)
        u, v = random_unitary(3, rng), random_unitary(3, rng)
        assert np.allclose(u.then(v).matrix, v.matrix @ u.matrix)

    def test_identity_leaves_state(self):
        """Test the identity transform."""
        ket = Ket.basis(FockState.from_counts((2, 2)))
        assert apply_mode_transform(ket, ModeTransform.identity(2)).isclose(ket)

    def test_channel_outside_transform_rejected(self):
        """Test that a state on channel 2 cannot pass a 2-channel transform."""
        ket = Ket.basis(FockState.from_counts((0, 0, 1)))
        with pytest.raises(ValueError, match="channel"):
            apply_mode_transform(ket, ModeTransform.identity(2))


class TestBeamSplitterExpansion:
    """Test the two-pair splitter expansion against closed forms."""

    @given(st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=50, deadline=None)
    def test_two_pair_coefficients(self, t):
        """Test the |2,2> output coefficients for any transmissivity."""
        r = 1.0 - t
        out = apply_mode_transform(fock(2, 2), splitter(t))
        patterns = [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]
        amp = {c: out.amplitude(FockState.from_counts(c)) for c in patterns}
        assert abs(amp[(4, 0)] - math.sqrt(6) * t * r) < 1e-12
        assert abs(amp[(0, 4)] - math.sqrt(6) * t * r) < 1e-12
        assert abs(amp[(3, 1)] - math.sqrt(6 * t * r) * (t - r)) < 1e-12
        assert abs(amp[(1, 3)] + math.sqrt(6 * t * r) * (t - r)) < 1e-12
        assert abs(amp[(2, 2)] - ((t - r) ** 2 - 2 * t * r)) < 1e-12

    def test_hong_ou_mandel(self):
        """Test that |1,1> never leaves one photon per port at T=1/2."""
        out = apply_mode_transform(fock(1, 1), splitter(0.5))
        assert abs(out.amplitude(FockState.from_counts((1, 1)))) < 1e-15

    @given(st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=30, deadline=None)
    def test_norm_and_photon_number_preserved(self, t):
        """Test that the splitter is unitary on Fock space."""
        out = apply_mode_transform(fock(3, 1), splitter(t))
        assert out.photon_number == 4
        assert out.squared_norm == pytest.approx(1.0, abs=1e-12)

    def test_internal_modes_do_not_interfere(self):
        """Test that orthogonal internal modes split independently."""
        state = Ket.basis(FockState([(ModeId(0, 0), 1), (ModeId(1, 1), 1)]))
        out = apply_mode_transform(state, splitter(0.5))
        coincidences = sum(
            abs(a) ** 2 for s, a in out if s.pattern(2) == (1, 1)
        )
        assert coincidences == pytest.approx(0.5)


class TestLadderOperators:
    """Test creation and annihilation operators."""

    def test_create_then_annihilate(self):
        """Test a^dag on |n> gives sqrt(n+1)|n+1>."""
        mode = ModeId(0)
        ket = Ket.basis(FockState.from_counts((2,)))
        raised = create(ket, mode)
        three = FockState.from_counts((3,))
        assert raised.amplitude(three) == pytest.approx(math.sqrt(3))
        lowered = annihilate(raised, mode)
        assert lowered.amplitude(FockState.from_counts((2,))) == pytest.approx(3.0)

    def test_annihilate_empty_mode(self):
        """Test that lowering an empty mode gives the zero vector."""
        ket = Ket.basis(FockState.from_counts((0, 1)))
        assert len(annihilate(ket, ModeId(0))) == 0


class TestInternalIsometry:
    """Test internal-mode maps."""

    def test_partial_overlap_split(self):
        """Test mapping internal 0 on channel 0 to a two-mode combination."""
        eta = 0.6
        images = {0: [(0, eta), (1, math.sqrt(1 - eta**2))]}
        ket = Ket.basis(FockState([(ModeId(0, 0), 1), (ModeId(1, 0), 1)]))
        out = apply_internal_isometry(ket, 0, images)
        kept = FockState([(ModeId(0, 0), 1), (ModeId(1, 0), 1)])
        assert out.amplitude(kept) == pytest.approx(eta)
        assert out.squared_norm == pytest.approx(1.0)

    def test_non_orthonormal_images_rejected(self):
        """Test that images must be orthonormal."""
        ket = Ket.basis(FockState.from_counts((1,)))
        with pytest.raises(ValueError, match="orthonormal"):
            apply_internal_isometry(ket, 0, {0: [(0, 0.5)]})


class TestPermanent:
    """Test the Ryser permanent and transition amplitudes."""

    def test_small_matrices(self):
        """Test hand-computed permanents."""
        assert permanent(np.zeros((0, 0))) == 1.0
        assert permanent([[2.0]]) == 2.0
        assert permanent([[1, 2], [3, 4]]) == pytest.approx(10.0)
        assert permanent(np.ones((4, 4))) == pytest.approx(24.0)

    def test_identity_permanent(self):
        """Test that per(I) = 1."""
        assert permanent(np.eye(6)) == pytest.approx(1.0)

    def test_rejects_non_square_and_oversized(self):
        """Test size validation."""
        with pytest.raises(ValueError, match="square"):
            permanent(np.ones((2, 3)))
        with pytest.raises(ValueError, match="limited"):
            permanent(np.ones((21, 21)))

    def test_oracle_matches_expansion(self):
        """Test permanent amplitudes against the polynomial expansion."""
        rng = np.random.default_rng(7)
        for _ in range(10):
            u = random_unitary(3, rng)
            source = FockState.from_counts((2, 1, 1))
            out = apply_mode_transform(Ket.basis(source), u)
            for counts in [(4, 0, 0), (2, 1, 1), (1, 2, 1), (0, 0, 4), (1, 1, 2)]:
                target = FockState.from_counts(counts)
                assert transition_amplitude(source, target, u) == pytest.approx(
                    out.amplitude(target), abs=1e-10
                )

    def test_photon_number_mismatch(self):
        """Test that different photon numbers raise."""
        with pytest.raises(ValueError, match="mismatch"):
            transition_amplitude(
                FockState.from_counts((1, 1)),
                FockState.from_counts((1, 0)),
                ModeTransform.identity(2),
            )

    def test_multiple_internal_modes_rejected(self):
        """Test that the oracle needs one internal mode."""
        source = FockState([(ModeId(0, 0), 1), (ModeId(1, 1), 1)])
        with pytest.raises(ValueError, match="internal"):
            transition_amplitude(source, source, ModeTransform.identity(2))


class TestRandomUnitary:
    """Test Haar sampling."""

    def test_is_unitary_and_deterministic(self):
        """Test unitarity and seed reproducibility."""
        u = random_unitary(4, np.random.default_rng(3))
        v = random_unitary(4, np.random.default_rng(3))
        assert np.allclose(u.matrix @ u.matrix.conj().T, np.eye(4))
        assert np.array_equal(u.matrix, v.matrix)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_four_photon_norm_preserved(self, seed):
        """Test that any unitary keeps a random four-photon ket normalized."""
        rng = np.random.default_rng(seed)
        ket = random_ket(rng, photons=4, channels=2, internal=2)
        out = apply_mode_transform(ket, random_unitary(2, rng))
        assert out.photon_number == 4
        assert abs(out.squared_norm - 1.0) < 1e-12

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=15, deadline=None)
    def test_three_channel_norm_preserved(self, seed):
        """Test norm preservation on three channels with one internal mode."""
        rng = np.random.default_rng(seed)
        ket = random_ket(rng, photons=4, channels=3, internal=1)
        out = apply_mode_transform(ket, random_unitary(3, rng))
        assert abs(out.squared_norm - 1.0) < 1e-12
