import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrocross.channels import SIGMA_X, SiteMap, apply_channel, depolarizing
from metrocross.errors import NonHermitianInput, NotPSD
from metrocross.numerics import (
    clip_spectrum,
    eigh,
    kron,
    kron_all,
    matrix_sqrt_psd,
    random_density_matrix,
    random_hermitian,
)

from conftest import bell, dm


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_basis_permutation():
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(kron(SIGMA_X, np.eye(2)) @ ket00, [0, 0, 1, 0])


def test_kron_diagonal_phases():
    phi = 0.83
    u = np.diag([1, np.exp(1j * phi)])
    assert np.allclose(np.diag(kron(u, u)), [1, np.exp(1j * phi), np.exp(1j * phi), np.exp(2j * phi)])


def test_kron_associative(rng):
    a, b, c = (random_hermitian(2, rng) for _ in range(3))
    assert np.array_equal(kron(kron(a, b), c), kron_all(a, b, c))
    assert np.allclose(kron(a, kron(b, c)), kron(kron(a, b), c), atol=1e-15, rtol=0)


def test_eigh_diagonal():
    w, v = eigh(np.diag([0.25, 0.75]))
    assert np.allclose(w, [0.75, 0.25])
    assert np.allclose(np.abs(v), [[0, 1], [1, 0]])


def test_eigh_rank_one_projector():
    w, _ = eigh(0.5 * np.ones((2, 2)))
    assert np.allclose(w, [1, 0], atol=1e-14)


def test_eigh_depolarized_bell_against_characteristic_polynomial():
    rho = apply_channel(dm(bell()), depolarizing(0.5), SiteMap(2, (0,)))
    w, _ = eigh(rho)
    roots = np.sort(np.roots(np.poly(rho)).real)[::-1]
    assert np.allclose(w, roots, atol=1e-7)
    # closed form: weight 1 - 3 eta/4 on the Bell state, eta/4 on the others
    assert np.allclose(w, [0.625, 0.125, 0.125, 0.125], atol=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        eigh(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_eigh_reconstruction_and_orthonormality(n, seed):
    a = random_hermitian(2**n, np.random.default_rng(seed))
    w, v = eigh(a)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - a)) <= 1e-10
    assert np.max(np.abs(v.conj().T @ v - np.eye(2**n))) <= 1e-10
    assert np.all(np.diff(w) <= 0)


def test_sqrt_identity_and_diagonal():
    assert np.allclose(matrix_sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(matrix_sqrt_psd(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]))


def test_sqrt_squares_back(rng):
    rho = random_density_matrix(8, rng)
    b = matrix_sqrt_psd(rho)
    assert np.max(np.abs(b @ b - rho)) <= 1e-9
    assert np.max(np.abs(b - b.conj().T)) <= 1e-12
    assert np.min(np.linalg.eigvalsh(b)) >= -1e-12


def test_sqrt_rejects_negative():
    with pytest.raises(NotPSD):
        matrix_sqrt_psd(np.diag([1.0, -1e-6]))


def test_clip_spectrum_tolerance():
    assert np.array_equal(clip_spectrum(np.array([0.5, -5e-11])), [0.5, 0.0])
    with pytest.raises(NotPSD):
        clip_spectrum(np.array([0.5, -1e-9]))
