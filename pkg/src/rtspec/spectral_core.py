"""Operator assembly and generalized eigensolves at fixed (rate, wavenumber).

The stability operator at rate lam > 0 and wavenumber k > 0 is
``K = lam * WGRAD + mu * H2 + BV0(lam) + BVA(lam)``: symmetric positive
definite as long as lam stays in the validated range.  The unstable
branches are the positive eigenvalues gamma of the singular pencil
``WMASS x = gamma K x`` (largest first); the SPD side carries the
Cholesky reduction, since the stratification mass WMASS is rank
deficient wherever drho0 vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._threads import single_threaded_blas
from .discretization import (
    Mesh,
    SymForm,
    assemble_boundary_forms,
    assemble_h2_form,
    assemble_weighted_gradient_form,
    assemble_weighted_mass,
    boundary_quotient_form,
)
from .equilibria import DensityProfile, PhysicalParams, char_length
from .errors import CoercivityError

# Eigenvalues at or below this fraction of the largest one are treated as
# the rank-deficient zero block of WMASS.
DROP_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PencilAssembly:
    """Full operator matrix K and stratification mass Mw at fixed (lam, k)."""

    K: SymForm
    Mw: SymForm
    lam: float
    k: float


@dataclass(frozen=True)
class SpectrumResult:
    """Leading eigenpairs of Mw x = gamma K x, sorted by decreasing gamma.

    Vectors are K-orthonormal columns.  ``complete`` is False when fewer
    positive eigenvalues exist than were requested.
    """

    gammas: np.ndarray
    vectors: np.ndarray
    n_max: int
    complete: bool
    max_residual: float

    def __len__(self) -> int:
        return self.gammas.size


class FormCache:
    """Per-(mesh, profile) cache of the k-dependent interior forms.

    Boundary forms are rate-dependent and cheap, so only H2 / WGRAD /
    WMASS are cached.  Immutable inputs make this safe to share.
    """

    def __init__(self, mesh: Mesh, profile: DensityProfile,
                 params: PhysicalParams):
        self.mesh = mesh
        self.profile = profile
        self.params = params
        self._by_k: dict[float, tuple[SymForm, SymForm]] = {}
        self._wmass: SymForm | None = None

    def wmass(self) -> SymForm:
        if self._wmass is None:
            self._wmass = assemble_weighted_mass(self.mesh, self.profile)
        return self._wmass

    def interior(self, k: float) -> tuple[SymForm, SymForm]:
        if k not in self._by_k:
            self._by_k[k] = (assemble_h2_form(self.mesh, k),
                             assemble_weighted_gradient_form(self.mesh, self.profile, k))
        return self._by_k[k]

    @property
    def growth_cap(self) -> float:
        if not hasattr(self, "_cap"):
            self._cap = char_length(self.profile, self.params.g)[1]
        return self._cap


def assemble_B(mesh: Mesh, profile: DensityProfile, params: PhysicalParams,
               k: float, lam: float, cache: FormCache | None = None) -> PencilAssembly:
    """Assemble the SPD operator K and mass Mw; Cholesky-checks K."""
    if cache is None:
        cache = FormCache(mesh, profile, params)
    h2, wgrad = cache.interior(k)
    bv0, bva = assemble_boundary_forms(mesh, k, lam, params, profile)
    kmat = lam * wgrad.matrix + params.mu * h2.matrix + bv0.matrix + bva.matrix
    kmat = 0.5 * (kmat + kmat.T)
    try:
        with single_threaded_blas():
            np.linalg.cholesky(kmat)
    except np.linalg.LinAlgError as exc:
        raise CoercivityError(
            f"operator matrix lost positive definiteness at lam={lam}, k={k}"
        ) from exc
    return PencilAssembly(K=SymForm(kmat, "B"), Mw=cache.wmass(), lam=lam, k=k)


def gamma_spectrum(pencil: PencilAssembly, n_max: int) -> SpectrumResult:
    """Largest n_max eigenvalues of Mw x = gamma K x with K-orthonormal vectors.

    Zero and negative-by-roundoff eigenvalues of the rank-deficient mass
    are dropped; fewer than n_max positive branches sets complete=False.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    with single_threaded_blas():
        vals, vecs = sla.eigh(pencil.Mw.matrix, pencil.K.matrix)
    top = vals[-1] if vals.size else 0.0
    keep = vals > max(0.0, DROP_THRESHOLD * top)
    vals, vecs = vals[keep][::-1], vecs[:, keep][:, ::-1]
    count = min(n_max, vals.size)
    gammas, vectors = vals[:count].copy(), vecs[:, :count].copy()
    if count:
        res = pencil.Mw.matrix @ vectors - pencil.K.matrix @ vectors * gammas
        scale = np.maximum(np.linalg.norm(pencil.Mw.matrix @ vectors, axis=0),
                           gammas * np.linalg.norm(pencil.K.matrix @ vectors, axis=0))
        max_residual = float((np.linalg.norm(res, axis=0) / scale).max())
    else:
        max_residual = 0.0
    return SpectrumResult(gammas=gammas, vectors=vectors, n_max=n_max,
                          complete=count == n_max, max_residual=max_residual)


def gamma_values(pencil: PencilAssembly, n_max: int) -> np.ndarray:
    """Largest n_max eigenvalues only (no vectors); cheap path for root finding."""
    dof = pencil.K.matrix.shape[0]
    lo = max(0, dof - n_max)
    with single_threaded_blas():
        vals = sla.eigh(pencil.Mw.matrix, pencil.K.matrix, eigvals_only=True,
                        subset_by_index=(lo, dof - 1))
    top = vals[-1] if vals.size else 0.0
    vals = vals[vals > max(0.0, DROP_THRESHOLD * top)]
    return vals[::-1]


def boundary_quotient_spectrum(mesh: Mesh, k: float,
                               magnitude_floor: float = 1e-10) -> np.ndarray:
    """Nonzero stationary values of the endpoint quotient, sorted decreasing.

    These are the eigenvalues of the rank-4 pencil BDRYQ x = beta H2 x; at
    most four survive the magnitude floor.  Closed forms exist: 1 (twice)
    and two negative values determined by sinh(ka) and ka.
    """
    q = boundary_quotient_form(mesh, k)
    h2 = assemble_h2_form(mesh, k)
    with single_threaded_blas():
        vals = sla.eigh(q.matrix, h2.matrix, eigvals_only=True)
    vals = vals[np.abs(vals) > magnitude_floor]
    return np.sort(vals)[::-1]


def coercivity_ratio(mesh: Mesh, profile: DensityProfile, params: PhysicalParams,
                     k: float, lam: float, cache: FormCache | None = None) -> float:
    """Smallest eigenvalue of (K/mu) x = r H2 x.

    Bounded below by 2(sinh(ka) - ka)/(3 sinh(ka) - ka) uniformly in the
    rate and in the stratification shape.
    """
    pencil = assemble_B(mesh, profile, params, k, lam, cache=cache)
    h2 = (cache.interior(k)[0] if cache is not None
          else assemble_h2_form(mesh, k))
    with single_threaded_blas():
        vals = sla.eigh(pencil.K.matrix / params.mu, h2.matrix,
                        eigvals_only=True, subset_by_index=(0, 0))
    return float(vals[0])


def coercivity_bound(ka: float) -> float:
    """Closed-form lower bound 2(sinh(ka) - ka)/(3 sinh(ka) - ka)."""
    s = math.sinh(ka)
    return 2.0 * (s - ka) / (3.0 * s - ka)


def quotient_stationary_values(ka: float) -> np.ndarray:
    """Closed-form stationary values of the endpoint quotient, decreasing.

    1 has multiplicity two; the remaining two roots are
    -(sinh(ka) - ka)/(3 sinh(ka) + ka) and -(sinh(ka) + ka)/(3 sinh(ka) - ka).
    """
    s = math.sinh(ka)
    return np.array([1.0, 1.0,
                     -(s - ka) / (3.0 * s + ka),
                     -(s + ka) / (3.0 * s - ka)])
