import math

import numpy as np
import pytest
import scipy.integrate

import rtspec as rt
from rtspec.discretization import (
    assemble_boundary_forms,
    assemble_h2_form,
    assemble_weighted_gradient_form,
    assemble_weighted_mass,
    boundary_quotient_form,
    quadrature,
    tau_decay,
)
from rtspec.errors import ConfigError


def constant_vector(mesh, value=1.0):
    c = np.zeros(mesh.dof_count)
    c[0::2] = value
    return c


def linear_vector(mesh):
    c = np.empty(mesh.dof_count)
    c[0::2] = mesh.nodes
    c[1::2] = 1.0
    return c


def test_build_mesh_geometry():
    mesh = rt.build_mesh(1.0, 4)
    assert np.allclose(mesh.nodes, [-1.0, -0.75, -0.5, -0.25, 0.0])
    assert mesh.dof_count == 10
    assert rt.build_mesh(2.0, 2).h == 1.0


def test_build_mesh_validation():
    with pytest.raises(ConfigError):
        rt.build_mesh(1.0, 1)
    with pytest.raises(ConfigError):
        rt.build_mesh(0.0, 4)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_h2_form_on_polynomials(k):
    mesh = rt.build_mesh(1.0, 8)
    h2 = assemble_h2_form(mesh, k)
    a = mesh.a
    one = constant_vector(mesh)
    assert h2(one) == pytest.approx(k**4 * a, rel=1e-13)
    lin = linear_vector(mesh)
    assert h2(lin) == pytest.approx(2 * k**2 * a + k**4 * a**3 / 3, rel=1e-13)
    assert np.abs(h2.matrix - h2.matrix.T).max() == 0.0


def test_h2_form_requires_positive_wavenumber(mesh64):
    with pytest.raises(ValueError):
        assemble_h2_form(mesh64, 0.0)


def test_weighted_gradient_uniform_density(degenerate_profile):
    mesh = rt.build_mesh(1.0, 8)
    k = 1.3
    wgrad = assemble_weighted_gradient_form(mesh, degenerate_profile, k)
    assert wgrad(constant_vector(mesh)) == pytest.approx(k**2, rel=1e-13)
    assert wgrad(linear_vector(mesh)) == pytest.approx(1.0 + k**2 / 3, rel=1e-13)


def test_weighted_forms_against_adaptive_quadrature(profile, mesh64):
    # independent oracle: scipy adaptive quadrature on the piecewise cubic
    k = 1.0
    wgrad = assemble_weighted_gradient_form(mesh64, profile, k)
    wmass = assemble_weighted_mass(mesh64, profile)
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = rng.standard_normal(mesh64.dof_count)
        f = rt.HermiteFunction(mesh64, c)

        def grad_integrand(x):
            return profile.rho0(x) * (k**2 * f(x) ** 2 + f(x, 1) ** 2)

        def mass_integrand(x):
            return profile.drho0(x) * f(x) ** 2

        pieces = np.linspace(-1.0, 0.0, 9)
        expected_g = sum(scipy.integrate.quad(grad_integrand, lo, hi,
                                              epsabs=1e-13, limit=100)[0]
                         for lo, hi in zip(pieces[:-1], pieces[1:]))
        expected_m = sum(scipy.integrate.quad(mass_integrand, lo, hi,
                                              epsabs=1e-13, limit=100)[0]
                         for lo, hi in zip(pieces[:-1], pieces[1:]))
        assert wgrad(c) == pytest.approx(expected_g, rel=1e-10)
        assert wmass(c) == pytest.approx(expected_m, rel=1e-10)


def test_weighted_mass_basics(profile, degenerate_profile, mesh64):
    zero = assemble_weighted_mass(rt.build_mesh(1.0, 16), degenerate_profile)
    assert np.abs(zero.matrix).max() == 0.0
    wm = assemble_weighted_mass(mesh64, profile)
    assert wm(constant_vector(mesh64)) == pytest.approx(1.0, rel=1e-12)
    eigs = np.linalg.eigvalsh(wm.matrix)
    assert eigs.min() >= -1e-12 * np.abs(wm.matrix).max()


def test_tau_decay_value():
    assert tau_decay(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0),
                                                          rel=1e-15)


def test_boundary_forms_structure(profile, params, mesh64):
    k, lam = 1.2, 0.4
    bv0, bva = assemble_boundary_forms(mesh64, k, lam, params, profile)
    for form in (bv0, bva):
        assert np.abs(form.matrix - form.matrix.T).max() == 0.0
        assert np.linalg.matrix_rank(form.matrix) <= 2
    # BV0 touches only surface DOFs, BVA only bottom DOFs
    interior = np.ones(mesh64.dof_count, bool)
    interior[[0, 1, -2, -1]] = False
    assert np.abs(bv0.matrix[interior]).max() == 0.0
    assert np.abs(bva.matrix[interior]).max() == 0.0
    with pytest.raises(ValueError):
        assemble_boundary_forms(mesh64, k, 0.0, params, profile)


def test_bottom_form_completed_square_identity(profile, params, mesh64):
    # expansion oracle: (k+t)(y + k(k-t)/(k+t) x)^2
    #   + k(t(k+t)^2 - k(k-t)^2)/(k+t) x^2 - 2 k^2 x y  ==  BVA(x, y)/mu
    k, lam = 0.7, 0.9
    t = tau_decay(k, lam, profile.rho_minus, params.mu)
    _, bva = assemble_boundary_forms(mesh64, k, lam, params, profile)
    rng = np.random.default_rng(5)
    for _ in range(10):
        x, y = rng.standard_normal(2)
        c = np.zeros(mesh64.dof_count)
        c[0], c[1] = x, y
        expanded = ((k + t) * (y + k * (k - t) / (k + t) * x) ** 2
                    + k * (t * (k + t) ** 2 - k * (k - t) ** 2) / (k + t) * x**2
                    - 2 * k**2 * x * y)
        assert bva(c) == pytest.approx(params.mu * expanded, rel=1e-12)
        # the bound used for coercivity
        assert bva(c) / params.mu >= -2 * k**2 * x * y - 1e-12


def test_bottom_form_value_at_pure_slow_branch(profile, params, mesh64):
    k, lam = 1.0, 0.5
    t = tau_decay(k, lam, profile.rho_minus, params.mu)
    _, bva = assemble_boundary_forms(mesh64, k, lam, params, profile)
    c = np.zeros(mesh64.dof_count)
    c[0], c[1] = 1.0, k
    expected = params.mu * (k * t * (k + t) - 2 * k**2 * t + k**2 * (k + t))
    assert bva(c) == pytest.approx(expected, rel=1e-13)


def test_boundary_quotient_form(mesh64):
    k = 1.0
    q = boundary_quotient_form(mesh64, k)
    assert np.linalg.matrix_rank(q.matrix) == 4
    # oracle: direct endpoint evaluation for the cosh interpolant
    c = np.empty(mesh64.dof_count)
    c[0::2] = np.cosh(k * mesh64.nodes)
    c[1::2] = k * np.sinh(k * mesh64.nodes)
    direct = 2 * k**2 * (c[-1] * c[-2] - c[1] * c[0])
    assert q(c) == pytest.approx(direct, rel=1e-13)
    # interior-supported vector sees nothing
    rng = np.random.default_rng(1)
    c = rng.standard_normal(mesh64.dof_count)
    c[[0, 1, -2, -1]] = 0.0
    assert q(c) == 0.0


def test_form_values_converge_at_fourth_order(profile):
    # fixed smooth target, interpolated per mesh; form error = O(h^4)
    k = 1.0

    def f(x):
        return np.sin(2.0 * x) * np.exp(x)

    def df(x):
        return (2.0 * np.cos(2.0 * x) + np.sin(2.0 * x)) * np.exp(x)

    def integrand(x):
        ddf = (4.0 * np.cos(2.0 * x) - 3.0 * np.sin(2.0 * x)) * np.exp(x)
        return ddf**2 + 2 * k**2 * df(x) ** 2 + k**4 * f(x) ** 2

    exact = scipy.integrate.quad(integrand, -1.0, 0.0, epsabs=1e-14)[0]
    errors = []
    for n in (8, 16, 32):
        mesh = rt.build_mesh(1.0, n)
        c = np.empty(mesh.dof_count)
        c[0::2] = f(mesh.nodes)
        c[1::2] = df(mesh.nodes)
        errors.append(abs(assemble_h2_form(mesh, k)(c) - exact))
    rate1 = math.log2(errors[0] / errors[1])
    rate2 = math.log2(errors[1] / errors[2])
    assert rate1 > 3.7
    assert rate2 > 3.7


def test_hermite_function_evaluation(mesh64):
    rng = np.random.default_rng(9)
    c = rng.standard_normal(mesh64.dof_count)
    f = rt.HermiteFunction(mesh64, c)
    # nodal DOFs are reproduced exactly
    assert f(mesh64.nodes[3]) == pytest.approx(c[6], abs=1e-14)
    assert f(mesh64.nodes[3], 1) == pytest.approx(c[7], abs=1e-14)
    # derivatives consistent with finite differences mid-element
    x = float(mesh64.nodes[10]) + 0.4 * mesh64.h
    h = 1e-6
    fd = (f(x + h) - f(x - h)) / (2 * h)
    assert f(x, 1) == pytest.approx(fd, rel=1e-7)
    with pytest.raises(ValueError):
        f(0.5)
    with pytest.raises(ValueError):
        f(0.0, 4)


def test_interior_forms_positive_definite(profile, mesh64):
    for k in (0.5, 1.0, 2.0):
        np.linalg.cholesky(assemble_h2_form(mesh64, k).matrix)
        np.linalg.cholesky(
            assemble_weighted_gradient_form(mesh64, profile, k).matrix)


def test_quadrature_weights_integrate_exactly(mesh64):
    pts, wts = quadrature(mesh64)
    assert wts.sum() == pytest.approx(mesh64.a, rel=1e-14)
    assert (wts * pts).sum() == pytest.approx(-mesh64.a**2 / 2, rel=1e-13)
