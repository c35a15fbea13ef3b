import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qerasure.coherence import (
    MeasurementBasis,
    average_conditional_coherence,
    check_density_matrix,
    conditional_qubit_state,
    decompose_blocks,
    optimal_erasure_basis,
    pure_pair_coherence,
    qubit_coherence,
    recoverable_coherence,
    trace_norm,
)
from qerasure.errors import InternalError, InvalidStateError, OutcomeImpossibleError
from qerasure.rng import RngStream, sample_cross_product, sample_induced_density

from conftest import haar_unitary, random_density

PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)

_floats = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def complex_matrices(n):
    return st.tuples(arrays(float, (n, n), elements=_floats), arrays(float, (n, n), elements=_floats)).map(
        lambda p: p[0] + 1j * p[1]
    )


def unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def pair_state(alpha, beta, s0, s1):
    """Density matrix of alpha|0,s0> + beta|1,s1> in the qubit-slow index order."""
    psi = np.concatenate([alpha * s0, beta * s1])
    return np.outer(psi, psi.conj())


class TestDecomposeBlocks:
    def test_diagonal_qubit(self):
        blocks = decompose_blocks(np.diag([0.3, 0.7]), 1)
        assert blocks.X[0, 0] == 0

    def test_shared_environment_vector(self):
        e = unit([1, 2j, -1])
        alpha, beta = np.sqrt(0.4), np.sqrt(0.6) * np.exp(0.3j)
        blocks = decompose_blocks(pair_state(alpha, beta, e, e), 3)
        np.testing.assert_allclose(blocks.X, alpha * np.conj(beta) * np.outer(e, e.conj()), atol=1e-15)

    def test_reassembly(self):
        rho = random_density(3, 2, 17)
        blocks = decompose_blocks(rho, 3)
        np.testing.assert_array_equal(blocks.assemble(), rho)
        assert abs(np.trace(blocks.R0) + np.trace(blocks.R1) - 1) <= 1e-12
        for R in (blocks.R0, blocks.R1):
            assert np.linalg.eigvalsh(R)[0] >= -1e-10

    def test_odd_dimension(self):
        with pytest.raises(InvalidStateError):
            decompose_blocks(np.eye(3) / 3, 1)

    def test_A_mismatch(self):
        with pytest.raises(InvalidStateError):
            decompose_blocks(np.eye(4) / 4, 1)


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(2)) == pytest.approx(2.0, abs=1e-15)

    def test_signed_diagonal(self):
        assert trace_norm(np.diag([3.0, -4.0])) == pytest.approx(7.0, abs=1e-14)

    def test_eigenvalue_oracle(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        lam = np.linalg.eigvalsh(X.conj().T @ X)
        assert trace_norm(X) == pytest.approx(np.sqrt(np.clip(lam, 0, None)).sum(), abs=1e-10)

    def test_non_square(self):
        with pytest.raises(ValueError):
            trace_norm(np.ones((2, 3)))

    @given(complex_matrices(3), st.integers(0, 2**32))
    def test_unitary_invariance(self, X, seed):
        rng = np.random.default_rng(seed)
        U, V = haar_unitary(3, rng), haar_unitary(3, rng)
        assert abs(trace_norm(U @ X @ V) - trace_norm(X)) <= 1e-10 * max(1.0, trace_norm(X))

    @given(complex_matrices(3), _floats, _floats)
    def test_homogeneity(self, X, re, im):
        c = complex(re, im)
        lhs, rhs = trace_norm(c * X), abs(c) * trace_norm(X)
        assert abs(lhs - rhs) <= 1e-12 * max(rhs, 1e-300) + 1e-300 or abs(lhs - rhs) <= 1e-13

    @given(complex_matrices(3), complex_matrices(3))
    def test_triangle(self, X, Y):
        assert trace_norm(X + Y) <= trace_norm(X) + trace_norm(Y) + 1e-10

    @given(complex_matrices(4), st.integers(0, 2**32))
    def test_diagonal_bound_any_basis(self, X, seed):
        Z = haar_unitary(4, np.random.default_rng(seed))
        diag = np.einsum("ij,jk,ki->i", Z.conj().T, X, Z)
        assert np.abs(diag).sum() <= trace_norm(X) + 1e-10


class TestRecoverableCoherence:
    @pytest.mark.parametrize("A", [1, 2, 5])
    def test_plus_state_times_pure_environment(self, A):
        e = unit(np.arange(1, A + 1) + 1j)
        assert recoverable_coherence(np.kron(PLUS, np.outer(e, e.conj())), A) == pytest.approx(1.0, abs=1e-12)

    def test_mixed_qubit_gives_zero(self):
        sigma = random_density(1, 3, 5)  # any 2x2 environment state
        assert recoverable_coherence(np.kron(np.eye(2) / 2, sigma), 2) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("overlap_angle", [0.0, 0.4, np.pi / 2])
    def test_full_access_restores_two_alpha_beta(self, overlap_angle):
        s0 = np.array([1, 0, 0], dtype=complex)
        s1 = np.array([np.cos(overlap_angle), np.sin(overlap_angle) * 1j, 0])
        alpha, beta = np.sqrt(0.3), np.sqrt(0.7)
        c = recoverable_coherence(pair_state(alpha, beta, s0, s1), 3)
        assert c == pytest.approx(2 * np.sqrt(0.21), abs=1e-10)
        assert c == pytest.approx(0.9165, abs=1e-4)

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32))
    def test_range(self, A, K, seed):
        c = recoverable_coherence(random_density(A, K, seed), A)
        assert 0.0 <= c <= 1.0 + 1e-10

    def test_rejects_invalid_state(self):
        with pytest.raises(InvalidStateError):
            recoverable_coherence(np.eye(4) / 2, 2)
        with pytest.raises(InvalidStateError):
            recoverable_coherence(np.diag([1.5, -0.5]), 1)
        with pytest.raises(InvalidStateError):
            recoverable_coherence(np.array([[0.5, 1], [0, 0.5]]), 1)

    def test_consistency_error_above_one(self, monkeypatch):
        import qerasure.coherence as core

        monkeypatch.setattr(core, "trace_norm", lambda X: 0.6)
        with pytest.raises(InternalError):
            core.recoverable_coherence(PLUS, 1)

    @given(st.floats(0.01, 0.99), st.floats(0, 2 * np.pi), st.floats(0, 1), st.floats(0, 2 * np.pi))
    def test_pure_case_any_overlap(self, p, phase, mag, ophase):
        s0 = np.array([1, 0], dtype=complex)
        s1 = np.array([mag * np.exp(1j * ophase), np.sqrt(1 - mag**2)])
        alpha, beta = np.sqrt(p), np.sqrt(1 - p) * np.exp(1j * phase)
        rho = pair_state(alpha, beta, s0, s1)
        rho = 0.5 * (rho + rho.conj().T)
        assert recoverable_coherence(rho, 2) == pytest.approx(2 * abs(alpha * beta), abs=1e-10)


class TestPurePairCoherence:
    def test_balanced_identical(self):
        assert pure_pair_coherence(1 / np.sqrt(2), 1 / np.sqrt(2), 1.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.8])
    def test_orthogonal_environment(self, p):
        assert pure_pair_coherence(np.sqrt(p), np.sqrt(1 - p), 0.0) == 0.0

    def test_matches_reduced_matrix(self):
        alpha, beta, overlap = np.sqrt(0.3), np.sqrt(0.7), 0.5
        value = pure_pair_coherence(alpha, beta, overlap)
        assert value == pytest.approx(2 * np.sqrt(0.21) * 0.5, abs=1e-15)
        assert value == pytest.approx(0.4583, abs=1e-4)
        # qubit reduced matrix: off-diagonal alpha beta* <s1|s0>
        s0 = np.array([1, 0], dtype=complex)
        s1 = np.array([overlap, np.sqrt(1 - overlap**2)])
        rho_q = np.array(
            [[abs(alpha) ** 2, alpha * np.conj(beta) * np.vdot(s1, s0)],
             [np.conj(alpha) * beta * np.vdot(s0, s1), abs(beta) ** 2]]
        )
        assert value == pytest.approx(qubit_coherence(rho_q), abs=1e-14)

    def test_unnormalized(self):
        with pytest.raises(InvalidStateError):
            pure_pair_coherence(1.0, 1.0, 0.5)


class TestOptimalBasis:
    @pytest.mark.parametrize("diag", [[0.3, 0.2], [0.25, -0.25]])
    def test_diagonal_cases_use_standard_basis(self, diag):
        X = np.diag(diag).astype(complex)
        basis = optimal_erasure_basis(X)
        overlap = np.abs(basis.vectors.conj().T @ np.eye(2))
        np.testing.assert_allclose(np.sort(overlap.max(axis=1)), [1.0, 1.0], atol=1e-12)
        diag_elems = np.einsum("ij,jk,ki->i", basis.vectors.conj().T, X, basis.vectors)
        assert np.abs(diag_elems).sum() == pytest.approx(0.5, abs=1e-12)
        assert trace_norm(X) == pytest.approx(0.5, abs=1e-12)

    def test_attains_on_cross_product(self):
        X = sample_cross_product(4, 4, RngStream(44))
        X = X / (4 * np.abs(X).sum())  # scale into a valid off-diagonal block
        A = 4
        rho = np.block([[np.eye(A) / (2 * A), X], [X.conj().T, np.eye(A) / (2 * A)]])
        basis = optimal_erasure_basis(X)
        assert average_conditional_coherence(rho, A, basis) == pytest.approx(2 * trace_norm(X), abs=1e-9)

    def test_rank_deficient(self):
        e = unit([1, 1j, 0, 2])
        X = 0.3 * np.outer(e, e.conj())
        basis = optimal_erasure_basis(X)
        diag_elems = np.einsum("ij,jk,ki->i", basis.vectors.conj().T, X, basis.vectors)
        assert np.abs(diag_elems).sum() == pytest.approx(trace_norm(X), abs=1e-12)

    def test_degenerate_unitary_stays_orthonormal(self):
        basis = optimal_erasure_basis(np.eye(5) * 0.1)
        np.testing.assert_allclose(basis.vectors.conj().T @ basis.vectors, np.eye(5), atol=1e-12)

    @pytest.mark.parametrize("A,K", [(1, 1), (2, 3), (5, 2), (6, 6)])
    def test_attainment_random_states(self, A, K):
        for seed in range(20):
            rho = random_density(A, K, seed)
            X = decompose_blocks(rho, A).X
            value = average_conditional_coherence(rho, A, optimal_erasure_basis(X))
            assert value == pytest.approx(2 * trace_norm(X), abs=1e-9)

    def test_non_square(self):
        with pytest.raises(ValueError):
            optimal_erasure_basis(np.ones((2, 3)))


class TestConditionalStates:
    def test_product_state_projection(self):
        e = unit([1, -1j, 2])
        rho_q = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
        blocks = decompose_blocks(np.kron(rho_q, np.outer(e, e.conj())), 3)
        out = conditional_qubit_state(blocks, e)
        assert out.probability == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(out.rho2, rho_q, atol=1e-12)

    @pytest.mark.parametrize("A", [1, 3])
    def test_maximally_mixed(self, A):
        blocks = decompose_blocks(np.eye(2 * A) / (2 * A), A)
        u = unit(np.arange(A) + 1j)
        out = conditional_qubit_state(blocks, u)
        assert out.probability == pytest.approx(1 / A, abs=1e-12)
        np.testing.assert_allclose(out.rho2, np.eye(2) / 2, atol=1e-12)

    def test_completeness_with_optimal_basis(self):
        rho = random_density(2, 2, 8)
        blocks = decompose_blocks(rho, 2)
        basis = optimal_erasure_basis(blocks.X)
        total = sum(conditional_qubit_state(blocks, u).probability for u in basis)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_outcome_average_matches_sum_over_conditionals(self):
        rho = random_density(3, 2, 19)
        blocks = decompose_blocks(rho, 3)
        basis = optimal_erasure_basis(blocks.X)
        direct = sum(o.probability * o.coherence for o in (conditional_qubit_state(blocks, u) for u in basis))
        assert average_conditional_coherence(rho, 3, basis) == pytest.approx(direct, abs=1e-12)

    def test_zero_probability(self):
        blocks = decompose_blocks(np.kron(PLUS, np.diag([1.0, 0.0])), 2)
        with pytest.raises(OutcomeImpossibleError):
            conditional_qubit_state(blocks, np.array([0, 1.0]))
        # the impossible outcome is skipped in the average
        assert average_conditional_coherence(np.kron(PLUS, np.diag([1.0, 0.0])), 2, MeasurementBasis(np.eye(2))) == pytest.approx(1.0)

    def test_unnormalized_vector(self):
        blocks = decompose_blocks(np.eye(4) / 4, 2)
        with pytest.raises(InvalidStateError):
            conditional_qubit_state(blocks, np.array([1.0, 1.0]))


class TestAverageConditionalCoherence:
    @given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32))
    def test_never_exceeds_supremum(self, A, K, seed):
        rho = random_density(A, K, seed)
        basis = MeasurementBasis(haar_unitary(A, np.random.default_rng(seed)))
        assert average_conditional_coherence(rho, A, basis) <= recoverable_coherence(rho, A) + 1e-9

    def test_zero_cross_block(self):
        rho = np.kron(np.diag([0.4, 0.6]), random_density(1, 2, 1))
        for seed in range(5):
            basis = MeasurementBasis(haar_unitary(2, np.random.default_rng(seed)))
            assert average_conditional_coherence(rho, 2, basis) == pytest.approx(0.0, abs=1e-15)

    def test_optimal_equals_recoverable(self):
        rho = random_density(4, 3, 2)
        basis = optimal_erasure_basis(decompose_blocks(rho, 4).X)
        assert average_conditional_coherence(rho, 4, basis) == pytest.approx(recoverable_coherence(rho, 4), abs=1e-9)

    def test_invalid_basis(self):
        rho = random_density(2, 2, 3)
        with pytest.raises(InvalidStateError):
            average_conditional_coherence(rho, 2, np.array([[1, 1], [0, 1]]))


class TestQubitCoherence:
    def test_plus(self):
        assert qubit_coherence(PLUS) == pytest.approx(1.0)

    def test_mixed(self):
        assert qubit_coherence(np.eye(2) / 2) == 0.0

    @pytest.mark.parametrize("z", [-0.8, 0.0, 0.5, 0.866])
    def test_bloch_transverse_length(self, z):
        x, y = 0.3, 0.4
        rho = 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])
        assert qubit_coherence(rho) == pytest.approx(0.5, abs=1e-15)

    def test_invalid(self):
        with pytest.raises(InvalidStateError):
            qubit_coherence(np.eye(4) / 4)
        with pytest.raises(InvalidStateError):
            check_density_matrix(np.array([[0.5, 0.7], [0.7, 0.5]]))
