"""Full normal-mode reconstruction from an interior eigenfunction.

A converged growth-rate branch gives the vertical-velocity amplitude phi
on the stratified layer [-a, 0] as a C1 element function.  This module
glues on the closed-form decaying tail A1 e^{k x} + A2 e^{tau x} below
the layer, derives the pressure amplitude, solves the horizontal-velocity
amplitudes on a truncated half line, and packages the density and
surface amplitudes that close the mode.  A small Poisson-extension
toolkit for surface data lives here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.integrate

from .discretization import (
    HermiteFunction,
    Mesh,
    build_mesh,
    hermite_shapes,
    quadrature,
    tau_decay,
)
from .equilibria import DensityProfile, PhysicalParams
from .errors import NoUnstableBranchError, NumericalError
from .growth_solver import GrowthRecord, SolverSettings, solve_lambda_n
from .spectral_core import FormCache, assemble_B, gamma_spectrum

DEFAULT_DOMAIN_FACTOR = 10.0
DEFAULT_SAMPLES = 512


def outer_coefficients(phi_at_a: float, dphi_at_a: float, k: float,
                       tau: float) -> tuple[float, float]:
    """Tail coefficients (A1, A2) from C1 matching data at the layer bottom.

    The tail A1 e^{k(x+a)} + A2 e^{tau(x+a)} matches value and slope; tau
    exceeds k strictly for any positive rate, so the system is regular.
    """
    if not tau > k:
        raise ValueError("outer decay rate tau must exceed k (requires lam > 0)")
    den = tau - k
    a1 = (tau * phi_at_a - dphi_at_a) / den
    a2 = (dphi_at_a - k * phi_at_a) / den
    return a1, a2


# -- truncated-domain BVP for the horizontal amplitudes ----------------------

def _banded_assemble(mesh: Mesh, coef0: np.ndarray, coef1: float) -> np.ndarray:
    """Upper-banded matrix of integral(coef1 v'w' + coef0 v w), bandwidth 3."""
    pts, wts = quadrature(mesh)
    t = (pts - mesh.nodes[:-1, None]) / mesh.h
    n = hermite_shapes(t[0], mesh.h)  # uniform mesh: same reference points per element
    local = np.einsum("eq,iq,jq->eij", coef0 * wts, n[0], n[0])
    local += coef1 * np.einsum("eq,iq,jq->eij", wts, n[1], n[1])
    ab = np.zeros((4, mesh.dof_count))
    base = 2 * np.arange(mesh.n_elements)
    for i in range(4):
        for j in range(4):
            if i > j:
                continue
            np.add.at(ab[3 + i - j], base + j, local[:, i, j])
    return ab


def horizontal_velocity(pressure, phi0: float, k_component: float, k: float,
                        lam: float, profile: DensityProfile,
                        params: PhysicalParams, interior_mesh: Mesh,
                        domain_factor: float = DEFAULT_DOMAIN_FACTOR) -> HermiteFunction:
    """Solve -mu w'' + (lam rho0 + mu k^2) w = k_component * pressure.

    Posed on the truncated half line (-X, 0) with X = a + domain_factor/k
    rounded up to the interior element width, slope data
    w'(0) = k_component * phi(0), and the decay condition w' = tau w at the
    truncation depth.  ``pressure`` is a callable on x <= 0.
    """
    mu = params.mu
    a = profile.a
    h = interior_mesh.h
    n_out = max(2, math.ceil(domain_factor / (k * h)))
    n_total = interior_mesh.n_elements + n_out
    ext = build_mesh(a + n_out * h, n_total,
                     quadrature_points=interior_mesh.quadrature_points)
    pts, wts = quadrature(ext)
    coef0 = lam * profile.rho0(pts) + mu * k * k
    ab = _banded_assemble(ext, coef0, mu)
    tau = tau_decay(k, lam, profile.rho_minus, mu)
    ab[3, ext.left_value_dof] += mu * tau

    rhs = np.zeros(ext.dof_count)
    n = hermite_shapes((pts[0] - ext.nodes[0]) / h, h)[0]
    load = np.einsum("eq,iq->ei", k_component * np.asarray(pressure(pts)) * wts, n)
    np.add.at(rhs, np.stack([2 * np.arange(n_total) + i for i in range(4)], axis=1),
              load)
    rhs[ext.right_value_dof] += mu * k_component * phi0

    try:
        sol = sla.solveh_banded(ab, rhs, lower=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("horizontal-velocity solve failed") from exc
    return HermiteFunction(ext, sol)


# -- the assembled mode -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormalMode:
    """All amplitude profiles of one growing normal mode.

    phi is normalized to max |phi| = 1 on the layer; omega and the surface
    amplitude nu follow the closures omega = -drho0 phi / lambda and
    nu = phi(0) / lambda.
    """

    k_vec: tuple[float, float]
    k: float
    n: int
    lambda_n: float
    mesh: Mesh
    profile: DensityProfile
    params: PhysicalParams
    coeffs: np.ndarray
    A1: float
    A2: float
    tau_minus: float
    nu: float
    psi: HermiteFunction
    varphi: HermiteFunction
    record: GrowthRecord

    @property
    def interior(self) -> HermiteFunction:
        return HermiteFunction(self.mesh, self.coeffs)

    def phi(self, x, deriv: int = 0):
        """Vertical-velocity amplitude (or derivative up to 3) on x <= 0."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x > 0.0):
            raise ValueError("mode profiles are defined on x3 <= 0 only")
        out = np.empty_like(x)
        inner = x >= -self.profile.a
        if inner.any():
            out[inner] = self.interior(x[inner], deriv)
        if (~inner).any():
            xo = x[~inner] + self.profile.a
            k, tau = self.k, self.tau_minus
            out[~inner] = (self.A1 * k**deriv * np.exp(k * xo)
                           + self.A2 * tau**deriv * np.exp(tau * xo))
        return float(out[0]) if scalar else out

    def pressure(self, x):
        """Pressure amplitude; closed form below the layer, elementwise above.

        The interior third derivative comes from the cubic basis (piecewise
        constant), so the pressure carries one order less accuracy than phi.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x > 0.0):
            raise ValueError("mode profiles are defined on x3 <= 0 only")
        lam, k, mu = self.lambda_n, self.k, self.params.mu
        out = np.empty_like(x)
        inner = x >= -self.profile.a
        if inner.any():
            xi = x[inner]
            f = self.interior
            out[inner] = -(lam * self.profile.rho0(xi) * f(xi, 1)
                           + mu * (k * k * f(xi, 1) - f(xi, 3))) / k**2
        if (~inner).any():
            xo = x[~inner] + self.profile.a
            out[~inner] = -(lam * self.profile.rho_minus / k) * self.A1 * np.exp(k * xo)
        return float(out[0]) if scalar else out

    def omega(self, x):
        """Density amplitude -drho0 phi / lambda; supported on [-a, 0]."""
        return -self.profile.drho0(x) * self.phi(x) / self.lambda_n


def build_normal_mode(mesh: Mesh, profile: DensityProfile, params: PhysicalParams,
                      k_vec: tuple[float, float], n: int,
                      settings: SolverSettings = SolverSettings(),
                      domain_factor: float = DEFAULT_DOMAIN_FACTOR,
                      record: GrowthRecord | None = None) -> NormalMode:
    """Assemble the full mode for lattice wavenumber k_vec and branch n."""
    k1, k2 = float(k_vec[0]), float(k_vec[1])
    k = math.hypot(k1, k2)
    if k == 0.0:
        raise ValueError("zero wavenumber excluded")
    cache = FormCache(mesh, profile, params)
    if record is None:
        record = solve_lambda_n(mesh, profile, params, k, n, settings, cache=cache)
    if not record.converged:
        raise NoUnstableBranchError(
            f"no converged growth rate for |k|={k}, n={n} ({record.reason})")
    lam = record.lambda_n
    spectrum = gamma_spectrum(assemble_B(mesh, profile, params, k, lam,
                                         cache=cache), n)
    if len(spectrum) < n:
        raise NoUnstableBranchError(f"branch n={n} absent at lam={lam}")
    coeffs = spectrum.vectors[:, n - 1].copy()

    f = HermiteFunction(mesh, coeffs)
    sub = np.linspace(0.0, 1.0, 9)
    pts = (mesh.nodes[:-1, None] + mesh.h * sub[None, :]).ravel()
    vals = f(pts)
    peak = np.argmax(np.abs(vals))
    coeffs /= vals[peak]

    tau = tau_decay(k, lam, profile.rho_minus, params.mu)
    a1, a2 = outer_coefficients(coeffs[0], coeffs[1], k, tau)
    nu = coeffs[-2] / lam

    partial = NormalMode(k_vec=(k1, k2), k=k, n=n, lambda_n=lam, mesh=mesh,
                         profile=profile, params=params, coeffs=coeffs,
                         A1=a1, A2=a2, tau_minus=tau, nu=nu,
                         psi=None, varphi=None, record=record)
    phi0 = coeffs[-2]
    psi = horizontal_velocity(partial.pressure, phi0, k1, k, lam, profile,
                              params, mesh, domain_factor)
    varphi = horizontal_velocity(partial.pressure, phi0, k2, k, lam, profile,
                                 params, mesh, domain_factor)
    return NormalMode(k_vec=(k1, k2), k=k, n=n, lambda_n=lam, mesh=mesh,
                      profile=profile, params=params, coeffs=coeffs,
                      A1=a1, A2=a2, tau_minus=tau, nu=nu,
                      psi=psi, varphi=varphi, record=record)


@dataclass(frozen=True)
class FieldSample:
    zeta: float
    u1: float
    u2: float
    u3: float
    q: float
    eta: float


def evaluate_field(mode: NormalMode, t: float, x) -> FieldSample:
    """Physical perturbation fields of the mode at time t and point x."""
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    if x3 > 0.0:
        raise ValueError("field points must satisfy x3 <= 0")
    k1, k2 = mode.k_vec
    phase = k1 * x1 + k2 * x2
    growth = math.exp(mode.lambda_n * t)
    s, c = math.sin(phase), math.cos(phase)
    lo = -mode.psi.mesh.a
    if x3 >= lo:
        psi_v, var_v = mode.psi(x3), mode.varphi(x3)
    else:
        # below the truncation depth, continue with the slow decay branch
        decay = math.exp(mode.tau_minus * (x3 - lo))
        psi_v, var_v = decay * mode.psi(lo), decay * mode.varphi(lo)
    return FieldSample(
        zeta=growth * c * mode.omega(x3),
        u1=growth * s * psi_v,
        u2=growth * s * var_v,
        u3=growth * c * mode.phi(x3),
        q=growth * c * mode.pressure(x3),
        eta=growth * c * mode.nu,
    )


# -- Poisson extension of surface data ----------------------------------------

@dataclass(frozen=True)
class SurfaceSeries:
    """Finite Fourier series of zero-mean surface data on the torus.

    ``terms`` maps lattice wavevectors (k1, k2) to complex amplitudes; the
    represented field is Re sum c exp(i k . x_h).  The mean mode (0, 0) is
    excluded by the zero-average convention.
    """

    L1: float
    L2: float
    terms: tuple[tuple[tuple[float, float], complex], ...]

    def __post_init__(self) -> None:
        for (k1, k2), _ in self.terms:
            if k1 == 0.0 and k2 == 0.0:
                raise ValueError("surface series must have zero average "
                                 "(mode (0,0) excluded)")

    def eval(self, x1: float, x2: float) -> float:
        return sum((c * np.exp(1j * (k1 * x1 + k2 * x2))).real
                   for (k1, k2), c in self.terms)


def poisson_extend(series: SurfaceSeries, x) -> float:
    """Harmonic-type extension of the surface series at x = (x1, x2, x3 <= 0)."""
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    if x3 > 0.0:
        raise ValueError("extension is defined on x3 <= 0 only")
    total = 0.0
    for (k1, k2), c in series.terms:
        mag = math.hypot(k1, k2)
        total += (c * np.exp(1j * (k1 * x1 + k2 * x2))).real * math.exp(mag * x3)
    return total


def poisson_gradient_l2(series: SurfaceSeries) -> float:
    """Squared L2 norm of the extension gradient over the half space.

    Horizontal integrals are exact by mode orthogonality (terms are assumed
    to have pairwise distinct wavevectors, none opposite); the vertical
    factor integral of exp(2|k| x3) is evaluated numerically.
    """
    area = 4.0 * math.pi**2 * series.L1 * series.L2
    total = 0.0
    for (k1, k2), c in series.terms:
        mag = math.hypot(k1, k2)
        vert, _ = scipy.integrate.quad(lambda s: math.exp(2.0 * mag * s),
                                       -np.inf, 0.0, epsabs=1e-14, epsrel=1e-13)
        total += abs(c) ** 2 * area * mag**2 * vert
    return total


def surface_l2(series: SurfaceSeries) -> float:
    """Squared L2 norm of the surface data itself (exact by orthogonality)."""
    area = 4.0 * math.pi**2 * series.L1 * series.L2
    return sum(abs(c) ** 2 for _, c in series.terms) * area / 2.0


# -- mode table for file output ------------------------------------------------

MODE_COLUMNS = ("x3", "phi", "dphi", "psi", "varphi", "pi", "omega")


def mode_table(mode: NormalMode, samples: int = DEFAULT_SAMPLES) -> tuple[dict, np.ndarray]:
    """Header fields and sampled profile rows for mode-file emission."""
    header = {
        "k1": mode.k_vec[0], "k2": mode.k_vec[1], "n": mode.n,
        "lambda": mode.lambda_n, "A1": mode.A1, "A2": mode.A2,
        "tau_minus": mode.tau_minus, "nu": mode.nu,
    }
    depth = mode.psi.mesh.a
    x = np.linspace(-depth, 0.0, samples)
    rows = np.column_stack([
        x,
        mode.phi(x),
        mode.phi(x, 1),
        mode.psi(x),
        mode.varphi(x),
        mode.pressure(x),
        mode.omega(x),
    ])
    return header, rows
