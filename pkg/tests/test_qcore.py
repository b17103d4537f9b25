import numpy as np
import pytest

from hardycert.hardy import HardyPoint, MeasurementAngles, angles_from_point, hardy_state
from hardycert.qcore import (
    ObservablePair,
    behavior_from_model,
    born_probability,
    check_density,
    check_projector,
    fidelity,
    partial_trace,
    projector,
    qubit_observables,
    tensor,
)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def kron_oracle(a, b):
    # direct entrywise definition, independent of np.kron
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(m):
                for l in range(m):
                    out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


class TestTensor:
    def test_identity(self):
        assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0
        assert np.array_equal(tensor(p0, p1), expected)

    def test_matches_entrywise_oracle(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert np.allclose(tensor(a, b), kron_oracle(a, b), atol=1e-14)
        assert np.trace(tensor(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)

    def test_associative_up_to_reshuffle(self):
        rng = np.random.default_rng(1)
        a, b, c = (rng.normal(size=(2, 2)) for _ in range(3))
        assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-14)


class TestBornProbability:
    def test_eigenstate(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0
        p0 = np.diag([1.0, 0.0])
        assert born_probability(rho, p0, p0) == 1.0

    def test_orthogonal(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([0.0, 1.0])
        assert born_probability(rho, p1, p0) == 0.0

    def test_hardy_success_entry(self):
        pt = HardyPoint(0.5, 0.5)
        rho = projector(hardy_state(pt))
        alice, bob = qubit_observables(angles_from_point(pt))
        p = born_probability(rho, alice[0].plus, bob[0].plus)
        assert p == pytest.approx(1 / 12, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            born_probability(np.eye(4) / 4, np.eye(3), np.eye(2))

    def test_linear_in_rho(self):
        rng = np.random.default_rng(2)
        pa = check_projector(np.diag([1.0, 0.0]))
        pb = check_projector(np.diag([0.0, 1.0]))
        for _ in range(20):
            r1, r2 = random_density(rng, 4), random_density(rng, 4)
            lam = rng.uniform()
            mixed = lam * r1 + (1 - lam) * r2
            expected = (lam * born_probability(r1, pa, pb)
                        + (1 - lam) * born_probability(r2, pa, pb))
            assert born_probability(mixed, pa, pb) == pytest.approx(expected, abs=1e-12)


class TestBehaviorFromModel:
    def test_product_eigenstate_deterministic(self):
        ang = MeasurementAngles(alpha=0.0, beta=0.0)
        alice, bob = qubit_observables(ang)
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0
        b = behavior_from_model(rho, alice, bob)
        for x in range(2):
            for y in range(2):
                assert b.p(x, y, 0, 0) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_uniform(self):
        alice, bob = qubit_observables(MeasurementAngles(alpha=1.1, beta=0.4, phi=0.3))
        b = behavior_from_model(np.eye(4) / 4, alice, bob)
        assert np.allclose(b.probs, 0.25, atol=1e-12)

    def test_contexts_normalized_for_random_states(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            rho = random_density(rng, 4)
            rho = check_density(rho)
            ang = MeasurementAngles(alpha=rng.uniform(0, np.pi),
                                    beta=rng.uniform(0, np.pi),
                                    phi=rng.uniform(0, 2 * np.pi))
            alice, bob = qubit_observables(ang)
            b = behavior_from_model(rho, alice, bob)
            for x in range(2):
                for y in range(2):
                    assert b.context(x, y).sum() == pytest.approx(1.0, abs=1e-10)
            assert not b.validity_errors()


class TestObservablePair:
    def test_valid_pair(self):
        pair = ObservablePair(plus=np.diag([1.0, 0.0]), minus=np.diag([0.0, 1.0]))
        assert np.array_equal(pair.observable(), np.diag([1.0, -1.0]))

    def test_incomplete_pair_rejected(self):
        with pytest.raises(ValueError):
            ObservablePair(plus=np.diag([1.0, 0.0]), minus=np.diag([0.0, 0.5]))

    def test_nonorthogonal_rejected(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        with pytest.raises(ValueError):
            ObservablePair(plus=projector(v), minus=np.diag([0.0, 1.0]))

    def test_nonprojector_rejected(self):
        with pytest.raises(ValueError):
            check_projector(np.array([[0.5, 0.0], [0.0, 1.0]]))


class TestFidelity:
    def test_self_fidelity(self):
        psi = hardy_state(HardyPoint(0.42, 0.17))
        assert fidelity(psi, projector(psi)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        zero = np.array([1.0, 0.0])
        one = np.array([0.0, 1.0])
        assert fidelity(zero, projector(one)) == 0.0

    def test_maximally_mixed(self):
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        assert fidelity(plus, np.eye(2) / 2) == pytest.approx(0.5, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            fidelity(np.array([1.0, 1.0]), np.eye(2) / 2)


def partial_trace_oracle(rho, dims, keep):
    """Direct index-summation definition for two factors."""
    d0, d1 = dims
    if keep == [0]:
        out = np.zeros((d0, d0), dtype=complex)
        for i in range(d0):
            for j in range(d0):
                out[i, j] = sum(rho[i * d1 + k, j * d1 + k] for k in range(d1))
    else:
        out = np.zeros((d1, d1), dtype=complex)
        for i in range(d1):
            for j in range(d1):
                out[i, j] = sum(rho[k * d1 + i, k * d1 + j] for k in range(d0))
    return out


class TestPartialTrace:
    def test_product_state(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0
        reduced = partial_trace(rho, keep=[0], dims=[2, 2])
        assert np.allclose(reduced, np.diag([1.0, 0.0]), atol=1e-14)

    def test_maximally_entangled(self):
        bell = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
        reduced = partial_trace(projector(bell), keep=[0], dims=[2, 2])
        assert np.allclose(reduced, np.eye(2) / 2, atol=1e-14)

    def test_matches_summation_oracle(self):
        rng = np.random.default_rng(4)
        rho = random_density(rng, 8)
        for keep in ([0], [1]):
            got = partial_trace(rho, keep=keep, dims=[4, 2])
            want = partial_trace_oracle(rho, [4, 2], keep)
            assert np.allclose(got, want, atol=1e-13)
            assert np.trace(got).real == pytest.approx(1.0, abs=1e-12)

    def test_keep_order_transposes(self):
        rng = np.random.default_rng(5)
        rho = random_density(rng, 6)
        ab = partial_trace(rho, keep=[0, 1], dims=[2, 3])
        ba = partial_trace(rho, keep=[1, 0], dims=[2, 3])
        assert np.allclose(ab, ab.conj().T, atol=1e-13)
        # swapping factors is a permutation of the index pairs
        perm = [a * 3 + b for b in range(3) for a in range(2)]
        assert np.allclose(ba, ab[np.ix_(perm, perm)], atol=1e-13)

    def test_inconsistent_dims(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(6) / 6, keep=[0], dims=[2, 2])
