"""Independent Chebyshev-collocation oracle for cross-validating the solver.

Collocates the quartic stability ODE as a coupled second-order system in
(phi, phi'') on Chebyshev nodes, with the four boundary rows imposed
strongly.  Keeping only second-derivative matrices avoids the notorious
conditioning of spectral fourth-derivative operators; rows are
equilibrated before the QZ solve.  Nothing here shares code with the
package's Galerkin path: different basis, different grid, different
eigensolver, strong rather than weak boundary conditions.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from rtspec import DensityProfile, PhysicalParams, char_length

DEFAULT_POINTS = 96


def chebyshev_diff(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Differentiation matrix and nodes on [-1, 1], nodes descending."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def collocation_pencil(profile: DensityProfile, params: PhysicalParams,
                       k: float, lam: float,
                       n_points: int = DEFAULT_POINTS):
    """Row-equilibrated (B, A) with B phi = gamma A phi on the layer."""
    a, mu, g = profile.a, params.mu, params.g
    D, t = chebyshev_diff(n_points)
    x = a * (t - 1.0) / 2.0  # t=1 -> x=0, t=-1 -> x=-a
    D = D * (2.0 / a)
    D2 = D @ D
    m = n_points + 1
    rho = profile.rho0(x)
    drho = profile.drho0(x)
    eye = np.eye(m)
    tau = np.sqrt(k**2 + lam * profile.rho_minus / mu)

    A = np.zeros((2 * m, 2 * m))
    B = np.zeros((2 * m, 2 * m))
    # block 1: definition of the auxiliary variable v = phi''
    A[:m, :m] = -D2
    A[:m, m:] = eye
    # block 2: lam(k^2 rho phi - drho phi' - rho v) + mu(v'' - 2k^2 v + k^4 phi)
    A[m:, :m] = lam * (k**2 * np.diag(rho) - np.diag(drho) @ D) + mu * k**4 * eye
    A[m:, m:] = -lam * np.diag(rho) + mu * (D2 - 2.0 * k**2 * eye)
    B[m:, :m] = np.diag(drho)
    # boundary rows replace the nearest equation rows at each end
    for row in (0, m - 1, m, 2 * m - 1):
        A[row] = 0.0
        B[row] = 0.0
    # surface x=0 (node 0): k^2 phi + v = 0
    A[0, :m] = k**2 * eye[0]
    A[0, m:] = eye[0]
    # surface: -lam mu v' + (3 lam mu k^2 + lam^2 rho_plus) phi' + g k^2 rho_plus phi = 0
    A[m, :m] = ((3.0 * lam * mu * k**2 + lam**2 * profile.rho_plus) * D[0]
                + g * k**2 * profile.rho_plus * eye[0])
    A[m, m:] = -lam * mu * D[0]
    # bottom x=-a (node m-1): k tau phi - (k + tau) phi' + v = 0
    A[m - 1, :m] = k * tau * eye[-1] - (k + tau) * D[-1]
    A[m - 1, m:] = eye[-1]
    # bottom: k tau (k + tau) phi - (k^2 + k tau + tau^2) phi' + v' = 0
    A[2 * m - 1, :m] = (k * tau * (k + tau) * eye[-1]
                        - (k**2 + k * tau + tau**2) * D[-1])
    A[2 * m - 1, m:] = D[-1]

    scale = 1.0 / np.abs(A).max(axis=1)
    return B * scale[:, None], A * scale[:, None]


def oracle_gammas(profile: DensityProfile, params: PhysicalParams, k: float,
                  lam: float, n_max: int,
                  n_points: int = DEFAULT_POINTS) -> np.ndarray:
    """Largest n_max eigenvalues gamma_n(lam, k), sorted decreasing."""
    B, A = collocation_pencil(profile, params, k, lam, n_points)
    vals = sla.eig(B, A, right=False)
    vals = vals[np.isfinite(vals)]
    real = vals[np.abs(vals.imag) < 1e-9 * (1.0 + np.abs(vals))].real
    pos = np.sort(real[real > 0.0])[::-1]
    return pos[:n_max]


def oracle_lambda(profile: DensityProfile, params: PhysicalParams, k: float,
                  n: int, n_points: int = DEFAULT_POINTS) -> float:
    """Root of g k^2 gamma_n(lam) = lam via bracketing on (0, sqrt(g/L0)]."""
    _, cap = char_length(profile, params.g)

    def f(lam: float) -> float:
        gam = oracle_gammas(profile, params, k, lam, n, n_points)
        return params.g * k * k * gam[n - 1] - lam

    return brentq(f, 1e-10 * cap, cap, xtol=1e-15, rtol=8.9e-16)
