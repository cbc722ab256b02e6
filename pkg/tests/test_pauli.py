import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

import oracles
from rlgst.exceptions import ValidationError
from rlgst.pauli import (
    Superop,
    check_structure,
    compose,
    digits_to_index,
    from_coords,
    index_to_digits,
    is_orthogonal,
    pauli_basis,
    pauli_label,
    tensor,
    unitary_to_superop,
    vectorize,
)

SQ2 = np.sqrt(2)


def ptm_oracle(U):
    return oracles.ptm_from_map(oracles.kraus_map([U]), int(np.log2(U.shape[0])))


def random_hermitian(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return A + A.conj().T


class TestIndexing:
    def test_big_endian_digits(self):
        assert index_to_digits(0, 2) == (0, 0)
        assert index_to_digits(1, 2) == (0, 1)
        assert index_to_digits(4, 2) == (1, 0)
        assert index_to_digits(15, 2) == (3, 3)

    @given(st.integers(1, 3), st.data())
    def test_roundtrip(self, n, data):
        i = data.draw(st.integers(0, 4**n - 1))
        assert digits_to_index(index_to_digits(i, n)) == i

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            index_to_digits(16, 2)
        with pytest.raises(ValidationError):
            digits_to_index((0, 4))

    def test_labels(self):
        assert pauli_label(0, 1) == "I"
        assert pauli_label(7, 2) == "XZ"

    @pytest.mark.parametrize("n", [1, 2])
    def test_basis_matches_oracle_and_is_orthonormal(self, n):
        B = pauli_basis(n)
        ref = oracles.basis(n)
        assert np.allclose(B, np.array(ref), atol=1e-15)
        gram = np.einsum("aij,bji->ab", B, B)
        assert np.allclose(gram, np.eye(4**n), atol=1e-14)

    def test_basis_is_read_only(self):
        with pytest.raises(ValueError):
            pauli_basis(1)[0, 0, 0] = 2


class TestVectorize:
    def test_zero_projector(self):
        rho = np.diag([1.0, 0.0])
        assert np.allclose(vectorize(rho).coords, np.array([1, 0, 0, 1]) / SQ2, atol=1e-15)

    def test_maximally_mixed(self):
        assert np.allclose(vectorize(np.eye(2) / 2).coords, [1 / SQ2, 0, 0, 0], atol=1e-15)

    def test_prep_state_matches_trace_oracle(self):
        # coords[a] = tr(sigma_a rho) / sqrt(2); the Bloch vector is (sqrt2 a, sqrt2 a, 1 - sqrt2 a)
        rho = oracles.offset_rho(0.01)
        direct = [np.trace(s @ rho).real / SQ2 for s in oracles.PAULIS]
        got = vectorize(rho).coords
        assert np.allclose(got, direct, atol=1e-15)
        assert np.allclose(got, [0.70711, 0.01, 0.01, 0.69711], atol=5e-6)

    def test_unit_trace_state_has_leading_coord(self):
        rng = np.random.default_rng(1)
        A = random_hermitian(rng, 4)
        rho = A @ A / np.trace(A @ A).real
        assert vectorize(rho).coords[0] == pytest.approx(0.5, abs=1e-14)

    def test_non_hermitian_rejected_with_magnitude(self):
        with pytest.raises(ValidationError, match="asymmetry"):
            vectorize(np.array([[0, 1], [0, 0]]))

    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        A = random_hermitian(rng, 4)
        assert np.allclose(from_coords(vectorize(A).coords, 2), A, atol=1e-13)

    def test_hilbert_schmidt_consistency(self):
        rng = np.random.default_rng(4)
        for d in (2, 4):
            A, B = random_hermitian(rng, d), random_hermitian(rng, d)
            lhs = vectorize(A).coords @ vectorize(B).coords
            assert lhs == pytest.approx(np.trace(A.conj().T @ B).real, abs=1e-10)


class TestUnitaryToSuperop:
    def test_x(self):
        assert np.allclose(unitary_to_superop(oracles.X).matrix, np.diag([1, 1, -1, -1]), atol=1e-15)

    def test_hadamard(self):
        H = oracles.UNITARIES_1Q["i_h_t"]["H"]
        expect = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0]])
        assert np.allclose(unitary_to_superop(H).matrix, expect, atol=1e-15)

    def test_t_gate_matches_oracle(self):
        T = oracles.UNITARIES_1Q["i_h_t"]["T"]
        got = unitary_to_superop(T).matrix
        assert np.allclose(got, ptm_oracle(T), atol=1e-14)
        c = np.cos(np.pi / 4)
        assert np.allclose(got[1:3, 1:3], [[c, -c], [c, c]], atol=1e-15)
        assert got[0, 0] == pytest.approx(1) and got[3, 3] == pytest.approx(1)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValidationError, match="not unitary"):
            unitary_to_superop(np.array([[1, 0], [0, 2]]))

    @pytest.mark.parametrize("d", [2, 4])
    def test_random_unitaries(self, d):
        for seed in range(10):
            U = unitary_group.rvs(d, random_state=seed)
            g = unitary_to_superop(U)
            assert np.allclose(g.matrix, ptm_oracle(U), atol=1e-12)
            assert is_orthogonal(g)
            assert check_structure(g).is_tp

    def test_homomorphism(self):
        U1 = unitary_group.rvs(4, random_state=11)
        U2 = unitary_group.rvs(4, random_state=12)
        lhs = compose(unitary_to_superop(U2), unitary_to_superop(U1)).matrix
        assert np.allclose(lhs, unitary_to_superop(U2 @ U1).matrix, atol=1e-10)


class TestComposeTensor:
    def test_identity_left(self):
        g = unitary_to_superop(oracles.UNITARIES_1Q["i_x90_y90"]["Gx"])
        assert np.allclose(compose(Superop.identity(1), g).matrix, g.matrix)

    def test_hadamard_squared(self):
        h = unitary_to_superop(oracles.UNITARIES_1Q["i_h_t"]["H"])
        assert np.allclose((h @ h).matrix, np.eye(4), atol=1e-14)

    def test_tensor_kron_consistency(self):
        lhs = tensor(unitary_to_superop(oracles.X), unitary_to_superop(oracles.I2))
        rhs = unitary_to_superop(np.kron(oracles.X, oracles.I2))
        assert np.allclose(lhs.matrix, rhs.matrix, atol=1e-14)

    def test_mixed_product(self):
        us = [unitary_to_superop(unitary_group.rvs(2, random_state=s)) for s in range(4)]
        g2, g1, h2, h1 = us
        lhs = tensor(g2, g1) @ tensor(h2, h1)
        assert np.allclose(lhs.matrix, tensor(g2 @ h2, g1 @ h1).matrix, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            compose(Superop.identity(1), Superop.identity(2))


class TestStructure:
    def test_identity(self):
        r = check_structure(Superop.identity(1))
        assert r.is_tp and r.is_unital and r.max_row0_deviation == 0

    def test_bad_first_row(self):
        m = np.eye(4)
        m[0, 1] = 0.1
        r = check_structure(Superop(m, 1))
        assert not r.is_tp
        assert r.max_row0_deviation == pytest.approx(0.1)

    def test_superop_rejects_complex_residue(self):
        with pytest.raises(ValidationError, match="imaginary"):
            Superop(np.eye(4) + 1e-9j, 1)

    def test_superop_rejects_wrong_shape(self):
        with pytest.raises(ValidationError):
            Superop(np.eye(3), 1)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 1))
    def test_amplitude_damping_oracle_is_tp(self, e0):
        R = oracles.ptm_from_map(oracles.kraus_map(oracles.ad_kraus(e0)), 1)
        assert check_structure(Superop(R, 1)).is_tp
