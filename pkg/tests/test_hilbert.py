"""Unit tests for the truncated-Fock-space linear algebra."""

import numpy as np
import pytest

from ionsense import hilbert
from ionsense.hilbert import (
    ContractViolation,
    FockSpace,
    coherent_state,
    evolve_unitary,
    fock_operators,
    tensor,
)


def test_fock_smallest_truncation():
    a, adag, num = fock_operators(1)
    expect = np.zeros((2, 2))
    expect[0, 1] = 1.0
    np.testing.assert_array_equal(a, expect)
    np.testing.assert_array_equal(adag, expect.T)


def test_ladder_commutator_interior():
    n_max = 9
    a, adag, _ = fock_operators(n_max)
    comm = a @ adag - adag @ a
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0, atol=1e-15)
    # truncation corrupts only the last diagonal entry
    assert comm[n_max, n_max] == pytest.approx(-n_max)
    proj = np.eye(n_max + 1)
    proj[n_max, n_max] = 0.0
    np.testing.assert_allclose(proj @ comm @ proj, proj, atol=1e-15)


def test_number_equals_create_annihilate():
    # exact up to the single rounding of sqrt(n)^2 in each diagonal entry
    a, adag, num = fock_operators(7)
    np.testing.assert_allclose(adag @ a, num, rtol=0, atol=4e-15)


def test_fock_rejects_tiny_truncation():
    with pytest.raises(ValueError):
        fock_operators(0)
    with pytest.raises(ValueError):
        FockSpace(0)


def test_tensor_identities():
    np.testing.assert_array_equal(tensor(np.eye(3), np.eye(2)), np.eye(6))
    np.testing.assert_array_equal(
        tensor(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), np.diag([3.0, 4.0, 6.0, 8.0]))


def test_tensor_factorizes_action():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    np.testing.assert_allclose(
        tensor(a, b) @ np.kron(u, v), np.kron(a @ u, b @ v), atol=1e-12)


def test_evolve_at_zero_time():
    h = np.diag([1.0, 2.0, 3.0]).astype(complex)
    np.testing.assert_allclose(evolve_unitary(h, 0.0), np.eye(3), atol=1e-15)


def test_evolve_diagonal_phases():
    h = np.diag([0.7, -1.3]).astype(complex)
    u = evolve_unitary(h, 2.5)
    np.testing.assert_allclose(
        np.diag(u), [np.exp(-1j * 0.7 * 2.5), np.exp(1j * 1.3 * 2.5)], atol=1e-14)


def test_evolve_group_law_random_hermitian():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = m + m.conj().T
    u1 = evolve_unitary(h, 0.4)
    u2 = evolve_unitary(h, 1.1)
    u12 = evolve_unitary(h, 1.5)
    np.testing.assert_allclose(u1 @ u2, u12, atol=1e-12)
    assert hilbert.check_unitary(u12) <= 1e-12


def test_evolve_conserves_norm():
    rng = np.random.default_rng(6)
    m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h = m + m.conj().T
    psi = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi /= np.linalg.norm(psi)
    out = evolve_unitary(h, 0.9) @ psi
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-12


def test_evolve_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        evolve_unitary(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex), 1.0)


def test_coherent_vacuum_limit():
    space = FockSpace(10)
    np.testing.assert_array_equal(coherent_state(0.0, space), hilbert.vacuum(space))


def test_coherent_poisson_mean():
    space = FockSpace(30)
    psi = coherent_state(1.0, space)
    _, _, num = fock_operators(30)
    mean = np.real(np.vdot(psi, num @ psi))
    assert mean == pytest.approx(1.0, abs=1e-10)


def test_coherent_norm_exact():
    psi = coherent_state(0.7 * np.exp(1j * 1.2), FockSpace(20))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-15)


def test_coherent_truncation_warning():
    with pytest.warns(UserWarning):
        coherent_state(2.0, FockSpace(4))
