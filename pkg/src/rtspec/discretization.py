"""C1 finite elements on (-a, 0): mesh, cubic Hermite basis, assembly.

Every symmetric form the stability operator needs lives here: the H2
energy form, the density-weighted gradient and mass forms, the two
boundary forms (surface and matching depth), and the endpoint quotient
form whose pencil eigenvalues have closed-form values.

Degrees of freedom are interleaved (value, slope) per node, so the four
endpoint DOFs that all boundary terms touch are rows/columns
0, 1 (at x = -a) and -2, -1 (at x = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibria import DensityProfile, PhysicalParams
from .errors import ConfigError

DEFAULT_QUADRATURE_POINTS = 10


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform mesh on [-a, 0] with two DOFs (value, slope) per node."""

    a: float
    n_elements: int
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS
    nodes: np.ndarray = field(repr=False, default=None)

    @property
    def h(self) -> float:
        return self.a / self.n_elements

    @property
    def dof_count(self) -> int:
        return 2 * (self.n_elements + 1)

    @property
    def left_value_dof(self) -> int:
        return 0

    @property
    def left_slope_dof(self) -> int:
        return 1

    @property
    def right_value_dof(self) -> int:
        return self.dof_count - 2

    @property
    def right_slope_dof(self) -> int:
        return self.dof_count - 1


def build_mesh(a: float, n_elements: int,
               quadrature_points: int = DEFAULT_QUADRATURE_POINTS) -> Mesh:
    """Uniform mesh covering [-a, 0]; at least 2 elements."""
    if not a > 0.0:
        raise ConfigError("mesh depth a must be strictly positive")
    if n_elements < 2:
        raise ConfigError("mesh.n_elements must be at least 2")
    if quadrature_points < 4:
        raise ConfigError("mesh.quadrature_points must be at least 4")
    nodes = np.linspace(-a, 0.0, n_elements + 1)
    return Mesh(a=a, n_elements=n_elements,
                quadrature_points=quadrature_points, nodes=nodes)


@dataclass(frozen=True)
class SymForm:
    """Symmetric matrix of a bilinear form in the Hermite basis."""

    matrix: np.ndarray
    tag: str

    def __call__(self, v: np.ndarray, w: np.ndarray | None = None) -> float:
        if w is None:
            w = v
        return float(v @ self.matrix @ w)


# -- Hermite shape functions ------------------------------------------------

def hermite_shapes(xi: np.ndarray, h: float) -> np.ndarray:
    """Shape values and x-derivatives up to third order on one element.

    Returns array of shape (4, 4, len(xi)): [derivative order, local DOF,
    point].  Local DOFs are (value left, slope left, value right, slope
    right); xi is the reference coordinate in [0, 1].
    """
    xi = np.asarray(xi, dtype=float)
    one = np.ones_like(xi)
    n = np.empty((4, 4, xi.size))
    # values
    n[0, 0] = 1.0 - 3.0 * xi**2 + 2.0 * xi**3
    n[0, 1] = h * (xi - 2.0 * xi**2 + xi**3)
    n[0, 2] = 3.0 * xi**2 - 2.0 * xi**3
    n[0, 3] = h * (xi**3 - xi**2)
    # first derivatives
    n[1, 0] = (-6.0 * xi + 6.0 * xi**2) / h
    n[1, 1] = 1.0 - 4.0 * xi + 3.0 * xi**2
    n[1, 2] = (6.0 * xi - 6.0 * xi**2) / h
    n[1, 3] = 3.0 * xi**2 - 2.0 * xi
    # second derivatives
    n[2, 0] = (-6.0 + 12.0 * xi) / h**2
    n[2, 1] = (-4.0 + 6.0 * xi) / h
    n[2, 2] = (6.0 - 12.0 * xi) / h**2
    n[2, 3] = (6.0 * xi - 2.0) / h
    # third derivatives (constant per element)
    n[3, 0] = 12.0 / h**3 * one
    n[3, 1] = 6.0 / h**2 * one
    n[3, 2] = -12.0 / h**3 * one
    n[3, 3] = 6.0 / h**2 * one
    return n


def _quad_rule(mesh: Mesh):
    """Reference quadrature (xi in [0,1], weights including the h/2 factor)."""
    t, w = np.polynomial.legendre.leggauss(mesh.quadrature_points)
    return 0.5 * (t + 1.0), 0.5 * w * mesh.h


def element_quad_points(mesh: Mesh) -> np.ndarray:
    """Physical quadrature points, shape (n_elements, n_quad)."""
    xi, _ = _quad_rule(mesh)
    return mesh.nodes[:-1, None] + mesh.h * xi[None, :]


def quadrature(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature points and weights, each shape (n_elements, n_quad)."""
    xi, wq = _quad_rule(mesh)
    pts = mesh.nodes[:-1, None] + mesh.h * xi[None, :]
    return pts, np.broadcast_to(wq, pts.shape).copy()


def _element_dofs(mesh: Mesh) -> np.ndarray:
    e = np.arange(mesh.n_elements)
    return np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], axis=1)


def _scatter(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    """Accumulate per-element 4x4 blocks into the global matrix."""
    dofs = _element_dofs(mesh)
    full = np.zeros((mesh.dof_count, mesh.dof_count))
    if local.ndim == 2:
        local = np.broadcast_to(local, (mesh.n_elements, 4, 4))
    np.add.at(full, (dofs[:, :, None], dofs[:, None, :]), local)
    return 0.5 * (full + full.T)


def _interior_form(mesh: Mesh, coeffs: dict[int, np.ndarray | float]) -> np.ndarray:
    """Assemble sum_m integral c_m(x) * d^m v * d^m w over the mesh.

    ``coeffs`` maps derivative order to either a constant or a per
    (element, quad point) coefficient array.
    """
    xi, wq = _quad_rule(mesh)
    shapes = hermite_shapes(xi, mesh.h)
    local = np.zeros((mesh.n_elements, 4, 4))
    for order, c in coeffs.items():
        n = shapes[order]
        if np.ndim(c) == 0:
            weight = np.broadcast_to(float(c) * wq, (mesh.n_elements, xi.size))
        else:
            weight = np.asarray(c, dtype=float) * wq[None, :]
        local = local + np.einsum("eq,iq,jq->eij", weight, n, n)
    return _scatter(mesh, local)


# -- assembled forms ---------------------------------------------------------

def assemble_h2_form(mesh: Mesh, k: float) -> SymForm:
    """Matrix of integral(v'' w'' + 2 k^2 v' w' + k^4 v w); positive definite."""
    if not k > 0.0:
        raise ValueError("wavenumber k must be strictly positive")
    return SymForm(_interior_form(mesh, {2: 1.0, 1: 2.0 * k**2, 0: k**4}), "H2")


def assemble_weighted_gradient_form(mesh: Mesh, profile: DensityProfile,
                                    k: float) -> SymForm:
    """Matrix of integral rho0 (k^2 v w + v' w'); positive definite."""
    if not k > 0.0:
        raise ValueError("wavenumber k must be strictly positive")
    rho = profile.rho0(element_quad_points(mesh))
    return SymForm(_interior_form(mesh, {0: k**2 * rho, 1: rho}), "WGRAD")


def assemble_weighted_mass(mesh: Mesh, profile: DensityProfile) -> SymForm:
    """Matrix of integral drho0 v w; positive semidefinite."""
    drho = profile.drho0(element_quad_points(mesh))
    return SymForm(_interior_form(mesh, {0: drho}), "WMASS")


def tau_decay(k: float, lam: float, rho_minus: float, mu: float) -> float:
    """Decay rate of the slower outer branch: sqrt(k^2 + lam * rho_minus / mu)."""
    return float(np.sqrt(k**2 + lam * rho_minus / mu))


def assemble_boundary_forms(mesh: Mesh, k: float, lam: float,
                            params: PhysicalParams,
                            profile: DensityProfile) -> tuple[SymForm, SymForm]:
    """Rank <= 4 endpoint forms (surface form BV0, matching-depth form BVA)."""
    if not lam > 0.0:
        raise ValueError("rate lam must be strictly positive")
    if not k > 0.0:
        raise ValueError("wavenumber k must be strictly positive")
    mu, g = params.mu, params.g
    tau = tau_decay(k, lam, profile.rho_minus, mu)
    n = mesh.dof_count
    v0, d0 = mesh.right_value_dof, mesh.right_slope_dof
    va, da = mesh.left_value_dof, mesh.left_slope_dof

    bv0 = np.zeros((n, n))
    bv0[d0, v0] += mu * k**2
    bv0[v0, d0] += mu * k**2
    bv0[v0, v0] += g * k**2 * profile.rho_plus / lam

    bva = np.zeros((n, n))
    bva[va, va] += mu * k * tau * (k + tau)
    bva[da, va] += -mu * k * tau
    bva[va, da] += -mu * k * tau
    bva[da, da] += mu * (k + tau)
    return SymForm(bv0, "BV0"), SymForm(bva, "BVA")


def boundary_quotient_form(mesh: Mesh, k: float) -> SymForm:
    """Endpoint quotient numerator: k^2 (v'w + vw')(0) - k^2 (v'w + vw')(-a).

    Rank exactly 4: touches only the four endpoint DOFs.
    """
    if not k > 0.0:
        raise ValueError("wavenumber k must be strictly positive")
    n = mesh.dof_count
    q = np.zeros((n, n))
    v0, d0 = mesh.right_value_dof, mesh.right_slope_dof
    va, da = mesh.left_value_dof, mesh.left_slope_dof
    q[d0, v0] += k**2
    q[v0, d0] += k**2
    q[da, va] -= k**2
    q[va, da] -= k**2
    return SymForm(q, "BDRYQ")


# -- coefficient-vector evaluation -------------------------------------------

class HermiteFunction:
    """A function in the C1 element space, evaluated from its DOF vector."""

    def __init__(self, mesh: Mesh, coeffs: np.ndarray):
        if coeffs.shape != (mesh.dof_count,):
            raise ValueError("coefficient vector does not match mesh DOF count")
        self.mesh = mesh
        self.coeffs = np.asarray(coeffs, dtype=float)

    def __call__(self, x, deriv: int = 0):
        """Value (or x-derivative up to order 3) at points of [-a, 0]."""
        if deriv not in (0, 1, 2, 3):
            raise ValueError("deriv must be 0..3")
        mesh = self.mesh
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x < -mesh.a - 1e-12) or np.any(x > 1e-12):
            raise ValueError("evaluation point outside [-a, 0]")
        elem = np.clip(((x + mesh.a) / mesh.h).astype(int), 0,
                       mesh.n_elements - 1)
        xi = (x - mesh.nodes[elem]) / mesh.h
        n = hermite_shapes(xi, mesh.h)[deriv]
        dofs = _element_dofs(mesh)[elem]
        out = np.einsum("pi,ip->p", self.coeffs[dofs], n)
        return float(out[0]) if scalar else out

    def max_abs(self, samples_per_element: int = 8) -> float:
        sub = np.linspace(0.0, 1.0, samples_per_element + 1)
        pts = (self.mesh.nodes[:-1, None] + self.mesh.h * sub[None, :]).ravel()
        return float(np.abs(self(pts)).max())
