"""Wave integration, Bloch forms and the elliptic function kernel."""

import numpy as np
import numpy.testing as npt
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

import nlqm
from nlqm import (
    BlochParams,
    IntegrationError,
    ValidationError,
    bilinear,
    canonical_solution,
    default_timestep,
    ellipk,
    integrate_bloch,
    integrate_nls,
    jacobi_elliptic,
    moment_power,
    neo_hamiltonian,
    nonlinear_operator,
)

modulus_strategy = st.floats(0.0, 0.99, allow_nan=False)
argument_strategy = st.floats(-8.0, 8.0, allow_nan=False)


def _diagonal_builder(e_levels, eps_levels):
    obs = (bilinear(np.diag(np.asarray(e_levels, dtype=complex)))
           + moment_power(np.diag(np.asarray(eps_levels, dtype=complex)), 2))
    return lambda z: nonlinear_operator(obs, z)


# ---------------------------------------------------------------------------
# RK4 wave integration


def test_rk4_matches_the_diagonal_closed_form():
    e_levels, eps_levels = [0.0, 1.0], [0.5, -0.5]
    z0 = np.array([0.8, 0.6j])
    traj = integrate_nls(_diagonal_builder(e_levels, eps_levels), z0, t_end=10.0, dt=0.01)
    exact = canonical_solution(e_levels, eps_levels, z0, traj.times)
    dev = max(np.max(np.abs(a.amplitudes - b.amplitudes))
              for a, b in zip(traj.states, exact.states))
    assert dev < 1e-8


def test_norm_and_energy_are_recorded_and_conserved():
    z0 = np.array([0.8, 0.6j])
    traj = integrate_nls(_diagonal_builder([0.0, 1.0], [0.5, -0.5]), z0,
                         t_end=10.0, dt=0.01)
    assert set(traj.recorded) >= {"norm", "hvalue"}
    assert np.max(np.abs(traj.recorded["norm"] - 1.0)) < 1e-10
    h = traj.recorded["hvalue"]
    assert np.max(np.abs(h - h[0])) < 1e-10


def test_record_callables_are_sampled():
    z0 = np.array([1.0, 0.0j])
    traj = integrate_nls(_diagonal_builder([0.0, 1.0], [0.2, -0.2]), z0, t_end=1.0,
                         dt=0.1, record={"s3": lambda t, z: np.real(np.vdot(z, nlqm.sigma3 @ z))})
    assert traj.recorded["s3"].shape == traj.times.shape
    assert traj.recorded["s3"][0] == pytest.approx(1.0, abs=1e-12)


def test_default_timestep_resolves_the_fastest_scale():
    builder = lambda z: np.diag([50.0, -50.0]).astype(complex)
    dt = default_timestep(builder, np.array([1.0, 0.0j]))
    assert dt <= (2.0 * np.pi / 200.0) / 50.0 * 1.0001


def test_non_hermitian_builder_is_rejected():
    builder = lambda z: np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(IntegrationError, match="[Hh]ermitian"):
        integrate_nls(builder, np.array([1.0, 0.0j]), t_end=1.0, dt=0.1)


def test_norm_drift_budget_aborts_unstable_steps():
    # dt far outside the RK4 stability region for |eig| = 40
    builder = lambda z: np.diag([40.0, -40.0]).astype(complex)
    with pytest.raises(IntegrationError, match="norm drift|blew up"):
        integrate_nls(builder, np.array([1.0, 1.0j]) / np.sqrt(2.0), t_end=40.0, dt=0.5)


def test_validation_of_step_arguments():
    builder = _diagonal_builder([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValidationError):
        integrate_nls(builder, np.array([1.0, 0.0j]), t_end=1.0, dt=-0.1)


# ---------------------------------------------------------------------------
# Jacobi elliptic kernel against an independent implementation


def test_ellipk_against_scipy():
    for k in (0.0, 0.1, 0.5, 0.9, 0.99, 0.9999):
        npt.assert_allclose(ellipk(k), scipy.special.ellipk(k ** 2),
                            rtol=1e-13, err_msg=f"k={k}")
    with pytest.raises(ValidationError):
        ellipk(1.0)


def test_jacobi_elliptic_against_scipy_grid():
    worst = 0.0
    for k in (0.0, 0.1, 0.5, 0.9, 0.99, 0.9999):
        u = np.linspace(-12.0, 12.0, 241)
        sn, cn, dn = jacobi_elliptic(u, k)
        sn_s, cn_s, dn_s, _ = scipy.special.ellipj(u, k ** 2)
        worst = max(worst,
                    np.max(np.abs(sn - sn_s)),
                    np.max(np.abs(cn - cn_s)),
                    np.max(np.abs(dn - dn_s)))
    assert worst < 1e-10


def test_jacobi_limits():
    u = np.linspace(-5.0, 5.0, 101)
    sn, cn, dn = jacobi_elliptic(u, 0.0)
    npt.assert_allclose(sn, np.sin(u), atol=1e-14)
    npt.assert_allclose(cn, np.cos(u), atol=1e-14)
    npt.assert_allclose(dn, np.ones_like(u), atol=1e-14)
    sn, cn, dn = jacobi_elliptic(u, 1.0 - 1e-15)
    npt.assert_allclose(sn, np.tanh(u), atol=1e-7)
    npt.assert_allclose(cn, 1.0 / np.cosh(u), atol=1e-7)


def test_cn_vanishes_at_the_quarter_period():
    k = 0.5
    _, cn, _ = jacobi_elliptic(np.array([ellipk(k)]), k)
    assert abs(cn[0]) < 1e-12


@given(u=argument_strategy, k=modulus_strategy)
@settings(max_examples=200, deadline=None)
def test_jacobi_identities(u, k):
    sn, cn, dn = jacobi_elliptic(np.array([u]), k)
    assert abs(sn[0] ** 2 + cn[0] ** 2 - 1.0) < 1e-10
    assert abs(dn[0] ** 2 + k ** 2 * sn[0] ** 2 - 1.0) < 1e-10


@given(u=argument_strategy, k=st.floats(0.05, 0.95))
@settings(max_examples=100, deadline=None)
def test_cn_periodicity(u, k):
    period = 4.0 * ellipk(k)
    _, cn1, _ = jacobi_elliptic(np.array([u]), k)
    _, cn2, _ = jacobi_elliptic(np.array([u + period]), k)
    assert abs(cn1[0] - cn2[0]) < 1e-9


# ---------------------------------------------------------------------------
# Bloch forms


def test_bloch_length_is_conserved_without_damping():
    for mode in (False, True):
        p = BlochParams(delta=0.2, omega=1.0, a=0.0, eps=0.3, rotating_frame=mode)
        tr = integrate_bloch(p, [0.6, 0.0, -0.8], t_end=20.0, dt=0.01)
        L = tr.length_squared()
        assert np.max(np.abs(L - L[0])) < 1e-9


def test_fixed_frame_damping_law():
    """|r|^2 shrinks at the closed-form rate -2 a w v^2 in the fixed frame."""
    p = BlochParams(delta=0.0, omega=1.0, a=0.2, eps=0.3, rotating_frame=False)
    dt = 0.01
    tr = integrate_bloch(p, [0.0, 0.0, -1.0], t_end=20.0, dt=dt)
    L = tr.length_squared()
    dL = (-L[4:] + 8 * L[3:-1] - 8 * L[1:-3] + L[:-4]) / (12 * dt)
    v, w = tr.r[2:-2, 1], tr.r[2:-2, 2]
    assert np.max(np.abs(dL + 2 * p.a * w * v ** 2)) < 1e-6


def test_rotating_frame_keeps_length_even_with_damping_terms():
    p = BlochParams(delta=0.0, omega=1.0, a=0.2, eps=0.3, rotating_frame=True)
    tr = integrate_bloch(p, [0.0, 0.0, -1.0], t_end=20.0, dt=0.01)
    L = tr.length_squared()
    assert np.max(np.abs(L - L[0])) < 1e-9


def test_the_two_frames_differ_when_damped():
    r0 = [0.0, 0.0, -1.0]
    a = integrate_bloch(BlochParams(0.0, 1.0, 0.2, 0.3, rotating_frame=False), r0, 20.0, 0.01)
    b = integrate_bloch(BlochParams(0.0, 1.0, 0.2, 0.3, rotating_frame=True), r0, 20.0, 0.01)
    assert np.max(np.abs(a.r - b.r)) > 0.01


def test_neo_hamiltonian_wave_flow_reproduces_rotating_bloch():
    delta, omega, a, eps = 0.3, 1.0, 0.2, 0.3
    base = 0.5 * (delta * nlqm.sigma3 - omega * nlqm.sigma1)
    builder = neo_hamiltonian(a, eps, base=base)
    theta, phi = 2.2, 0.7
    psi0 = np.array([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phi)])
    traj = integrate_nls(builder, psi0, t_end=20.0, dt=0.01)
    amps = traj.amplitudes()
    norms = np.sum(np.abs(amps) ** 2, axis=1)
    u = 2 * np.real(amps[:, 0].conj() * amps[:, 1]) / norms
    v = 2 * np.imag(amps[:, 0].conj() * amps[:, 1]) / norms
    w = (np.abs(amps[:, 0]) ** 2 - np.abs(amps[:, 1]) ** 2) / norms
    tr = integrate_bloch(BlochParams(delta, omega, a, eps, rotating_frame=True),
                         [u[0], v[0], w[0]], 20.0, 0.01)
    assert np.max(np.abs(np.stack([u, v, w], axis=1) - tr.r)) < 1e-6
