import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrocross.channels import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    PhaseCovariantParams,
    SiteMap,
    amplitude_damping,
    apply_channel,
    cptp_conditions_hold,
    depolarizing,
    identity_channel,
    make_channel,
    pauli_xy,
    phase_covariant,
    phase_unitary,
    superoperator,
)
from metrocross.errors import DimensionMismatch, NotCPTP, ParamOutOfRange, UnknownChannelKind
from metrocross.numerics import kron_all, random_density_matrix, random_pure_state

from conftest import bell, dm

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
ZERO = np.array([1, 0], dtype=complex)
ONE = np.array([0, 1], dtype=complex)


def full_register_oracle(rho, ch, sites):
    """Apply the channel with explicitly built tensor-product Kraus operators."""
    n = sites.n_qubits
    out = rho
    for s in sorted(sites.noisy_sites):
        ops = [kron_all(*[k if q == s else I2 for q in range(n)]) for k in ch.kraus_ops]
        out = sum(k @ out @ k.conj().T for k in ops)
    return out


def test_pauli_xy_limits(rng):
    rho = random_density_matrix(2, rng)
    assert np.allclose(pauli_xy(0)(rho), rho)
    assert np.allclose(pauli_xy(1)(dm(ZERO)), dm(ONE))


def test_pauli_xy_matches_hand_expansion():
    eta = 0.5
    rho = dm(PLUS)
    expected = (1 - eta) * rho + eta / 2 * (SIGMA_X @ rho @ SIGMA_X + SIGMA_Y @ rho @ SIGMA_Y)
    # |+><+| has Bloch vector x; X keeps it and Y flips it, so the coherence is scaled by 1 - eta
    assert np.allclose(expected, [[0.5, 0.25], [0.25, 0.5]])
    assert np.allclose(pauli_xy(eta)(rho), expected)


def test_depolarizing_action(rng):
    rho = dm(random_pure_state(2, rng))
    assert np.allclose(depolarizing(1)(rho), I2 / 2)
    assert np.allclose(depolarizing(0)(rho), rho)
    assert np.allclose(depolarizing(0.4)(dm(ZERO)), np.diag([0.8, 0.2]))
    for eta in (0.13, 0.77):
        assert np.allclose(depolarizing(eta)(rho), (1 - eta) * rho + eta * I2 / 2)


def test_depolarizing_symbol_label():
    assert depolarizing(0.3, symbol="t").param_name == "t"
    assert depolarizing(0.3).param_name == "eta"
    with pytest.raises(ValueError):
        depolarizing(0.3, symbol="p")


def test_amplitude_damping_kraus_and_limits(rng):
    ch = amplitude_damping(0.37)
    k1, k2 = ch.kraus_ops
    assert np.allclose(k1, np.diag([1, np.sqrt(0.63)]))
    assert np.allclose(k2, [[0, np.sqrt(0.37)], [0, 0]])
    assert ch.completeness_error() <= 1e-15
    rho = random_density_matrix(2, rng)
    assert np.allclose(amplitude_damping(0)(rho), rho)
    assert np.allclose(amplitude_damping(1)(dm(ONE)), dm(ZERO))


@pytest.mark.parametrize("ctor", [pauli_xy, depolarizing, amplitude_damping])
def test_parameter_range(ctor):
    for bad in (-0.01, 1.01):
        with pytest.raises(ParamOutOfRange):
            ctor(bad)


@pytest.mark.parametrize("ctor", [pauli_xy, depolarizing, amplitude_damping])
def test_completeness_on_grid(ctor):
    for eta in np.linspace(0, 1, 50):
        assert ctor(eta).completeness_error() <= 1e-10


def admissible_params(draw_kappa, draw_par, draw_perp):
    kappa = draw_kappa
    eta_par = draw_par * (1 - abs(kappa))
    cap = min(np.sqrt(max((1 + eta_par) ** 2 - kappa**2, 0.0)) / 2, 1.0)
    eta_perp = max(draw_perp * cap, 1e-6)
    return kappa, eta_par, eta_perp


def test_phase_covariant_completeness_on_grid():
    for kappa in np.linspace(-0.95, 0.95, 7):
        for frac in np.linspace(0, 1, 5):
            for perp_frac in (0.2, 0.6, 0.999):
                k, ep, eperp = admissible_params(kappa, frac, perp_frac)
                if not cptp_conditions_hold(k, ep, eperp) or eperp >= 1:
                    continue
                ch = phase_covariant(PhaseCovariantParams(k, ep, eperp))
                assert ch.completeness_error() <= 1e-10


def bloch_map(ch, rho):
    out = ch(rho)
    return np.real([np.trace(out @ s) for s in (SIGMA_X, SIGMA_Y, np.diag([1, -1]))])


def test_phase_covariant_bloch_action(rng):
    # x, y scaled by eta_perp, z scaled by eta_par and shifted by kappa
    k, ep, eperp = 0.2, 0.5, 0.6
    ch = phase_covariant(PhaseCovariantParams(k, ep, eperp))
    rho = dm(random_pure_state(2, rng))
    r = np.real([np.trace(rho @ s) for s in (SIGMA_X, SIGMA_Y, np.diag([1, -1]))])
    assert np.allclose(bloch_map(ch, rho), [eperp * r[0], eperp * r[1], k + ep * r[2]])


def test_phase_covariant_noiseless_corner(rng):
    ch = phase_covariant(PhaseCovariantParams(0.0, 1.0, 1 - 1e-12))
    rho = random_density_matrix(2, rng)
    assert np.allclose(ch(rho), rho, atol=1e-10)


def test_phase_covariant_full_relaxation_corner():
    ch = phase_covariant(PhaseCovariantParams(1.0, 0.0, 1e-12))
    assert np.allclose(ch(dm(ONE)), dm(ZERO), atol=1e-10)


def test_phase_covariant_rejects_non_cptp():
    with pytest.raises(NotCPTP):
        PhaseCovariantParams(0.5, 0.7, 0.3)
    with pytest.raises(NotCPTP):
        PhaseCovariantParams(0.0, 0.0, 0.9)
    with pytest.raises(ParamOutOfRange):
        PhaseCovariantParams(0.0, 0.5, 0.0)


@settings(max_examples=30, deadline=None)
@given(
    kappa=st.floats(-0.99, 0.99),
    frac=st.floats(0, 1),
    perp=st.floats(0.01, 0.99),
    phi=st.floats(-np.pi, np.pi),
    seed=st.integers(0, 2**31),
)
def test_phase_covariance_general_family(kappa, frac, perp, phi, seed):
    k, ep, eperp = admissible_params(kappa, frac, perp)
    if not cptp_conditions_hold(k, ep, eperp) or not 0 < eperp < 1:
        return
    ch = phase_covariant(PhaseCovariantParams(k, ep, eperp))
    rho = random_density_matrix(2, np.random.default_rng(seed))
    u = phase_unitary(phi)
    assert np.max(np.abs(ch(u @ rho @ u.conj().T) - u @ ch(rho) @ u.conj().T)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(
    kind=st.sampled_from(["pauli-xy", "depolarizing", "amplitude-damping"]),
    eta=st.floats(0, 1),
    phi=st.floats(-np.pi, np.pi),
    seed=st.integers(0, 2**31),
)
def test_phase_covariance_single_parameter_channels(kind, eta, phi, seed):
    ch = make_channel(kind, eta)
    rho = random_density_matrix(2, np.random.default_rng(seed))
    u = phase_unitary(phi)
    assert np.max(np.abs(ch(u @ rho @ u.conj().T) - u @ ch(rho) @ u.conj().T)) <= 1e-10


def test_phase_unitary():
    assert np.allclose(phase_unitary(0), I2)
    assert np.allclose(phase_unitary(np.pi), np.diag([1, -1]))
    assert np.allclose(phase_unitary(1.234) @ phase_unitary(-1.234), I2)


def test_make_channel_unknown():
    with pytest.raises(UnknownChannelKind):
        make_channel("dephasing", 0.1)


def test_apply_identity(rng):
    rho = random_density_matrix(8, rng)
    assert np.allclose(apply_channel(rho, identity_channel(), SiteMap(3, (0, 1, 2))), rho)


def test_apply_depolarizing_to_bell_half():
    out = apply_channel(dm(bell()), depolarizing(1), SiteMap(2, (0,)))
    assert np.allclose(out, np.eye(4) / 4)


def test_apply_pauli_to_bell_populations():
    eta = 0.3
    out = apply_channel(dm(bell()), pauli_xy(eta), SiteMap(2, (0,)))
    assert np.allclose(np.diag(out).real, [(1 - eta) / 2, eta / 2, eta / 2, (1 - eta) / 2])


@settings(max_examples=20, deadline=None)
@given(
    kind=st.sampled_from(["pauli-xy", "depolarizing", "amplitude-damping"]),
    eta=st.floats(0, 1),
    n=st.integers(1, 4),
    seed=st.integers(0, 2**31),
)
def test_apply_matches_tensor_oracle_and_preserves_trace(kind, eta, n, seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(2**n, rng)
    sites = SiteMap(n, rng.choice(n, size=rng.integers(1, n + 1), replace=False))
    ch = make_channel(kind, eta)
    out = apply_channel(rho, ch, sites)
    assert np.max(np.abs(out - full_register_oracle(rho, ch, sites))) <= 1e-12
    assert abs(np.trace(out) - 1) <= 1e-10
    assert np.max(np.abs(out - out.conj().T)) <= 1e-10
    assert np.min(np.linalg.eigvalsh(out)) >= -1e-10


def test_apply_dimension_errors(rng):
    with pytest.raises(DimensionMismatch):
        apply_channel(np.eye(4) / 4, pauli_xy(0.1), SiteMap(3, (0,)))
    with pytest.raises(DimensionMismatch):
        SiteMap(2, (2,))


def test_superoperator_matches_apply(rng):
    sites = SiteMap(3, (0, 2))
    ch = amplitude_damping(0.3)
    rho = random_density_matrix(8, rng)
    s = superoperator(ch, sites)
    assert np.allclose((s @ rho.ravel()).reshape(8, 8), apply_channel(rho, ch, sites))
