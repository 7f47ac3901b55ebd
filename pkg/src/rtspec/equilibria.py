"""Equilibrium density profiles for a stably-heavy-on-top stratified layer.

The equilibrium is a nondecreasing density rho0(x3) on the lower half line
x3 <= 0: constant rho_minus below depth -a, rising smoothly to rho_plus at
the surface x3 = 0, with all the variation (drho0 >= 0) supported on
[-a, 0].  Two derivative shapes are provided: an infinitely smooth bump
and a quintic smoothstep (cheap quadrature, cross-checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError

PROFILE_KINDS = ("bump", "quintic")

# Master integration table for the bump CDF: panels over y in [-1, 1],
# Gauss-Legendre nodes per panel.  Partial panels at query points stay
# below the panel width, so every query is resolved to machine precision.
_BUMP_PANELS = 2048
_BUMP_GL_POINTS = 16


def _bump_shape(y: np.ndarray) -> np.ndarray:
    """exp(-1/(1-y^2)) on (-1, 1), zero outside; all derivatives vanish at +-1."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi * yi))
    return out


@dataclass(frozen=True)
class PhysicalParams:
    """Fluid constants: viscosity mu, gravity g, torus half-period scales L1, L2."""

    mu: float
    g: float
    L1: float = 1.0
    L2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("mu", "g", "L1", "L2"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"params.{name} must be strictly positive")


@dataclass(frozen=True)
class DensityProfile:
    """Equilibrium density: rho_minus below -a, rho_plus at the surface.

    ``rho_plus == rho_minus`` is allowed and yields the degenerate profile
    with drho0 identically zero (no stratification jump, hence no unstable
    spectrum); it is useful as a control case.
    """

    rho_minus: float
    rho_plus: float
    a: float
    kind: str = "bump"

    def __post_init__(self) -> None:
        if not self.rho_minus > 0.0:
            raise ConfigError("profile.rho_minus must be strictly positive")
        if self.rho_plus < self.rho_minus:
            raise ConfigError("profile.rho_plus must be >= profile.rho_minus")
        if not self.a > 0.0:
            raise ConfigError("profile.a must be strictly positive")
        if self.kind not in PROFILE_KINDS:
            raise ConfigError(
                f"profile.kind must be one of {PROFILE_KINDS}, got {self.kind!r}"
            )

    @property
    def delta(self) -> float:
        return self.rho_plus - self.rho_minus

    # -- bump integration tables ------------------------------------------

    @cached_property
    def _gl_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.polynomial.legendre.leggauss(_BUMP_GL_POINTS)

    @cached_property
    def _bump_table(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(panel edges, cumulative integral at edges, total) for the bump shape."""
        edges = np.linspace(-1.0, 1.0, _BUMP_PANELS + 1)
        t, w = self._gl_nodes
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = mid[:, None] + half[:, None] * t[None, :]
        panel = (half[:, None] * w[None, :] * _bump_shape(nodes)).sum(axis=1)
        cum = np.concatenate(([0.0], np.cumsum(panel)))
        return edges, cum, float(cum[-1])

    def _bump_cdf(self, y: np.ndarray) -> np.ndarray:
        """Normalized integral of the bump shape from -1 to y, clipped to [0, 1]."""
        edges, cum, total = self._bump_table
        y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
        idx = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, _BUMP_PANELS - 1)
        left = edges[idx]
        t, w = self._gl_nodes
        mid = 0.5 * (left + y)
        half = 0.5 * (y - left)
        nodes = mid[..., None] + half[..., None] * t
        partial = (half[..., None] * w * _bump_shape(nodes)).sum(axis=-1)
        return np.clip((cum[idx] + partial) / total, 0.0, 1.0)

    # -- evaluation --------------------------------------------------------

    def _check_domain(self, x3: np.ndarray) -> np.ndarray:
        x3 = np.asarray(x3, dtype=float)
        if np.any(x3 > 0.0):
            raise ValueError("density profile is defined on x3 <= 0 only")
        return x3

    def rho0(self, x3):
        """Equilibrium density at x3 <= 0 (scalar or array)."""
        x = self._check_domain(x3)
        if self.kind == "quintic":
            t = np.clip((x + self.a) / self.a, 0.0, 1.0)
            f = t**3 * (6.0 * t**2 - 15.0 * t + 10.0)
        else:
            f = self._bump_cdf((2.0 * x + self.a) / self.a)
        out = self.rho_minus + self.delta * f
        return out if out.ndim else float(out)

    def drho0(self, x3):
        """Density gradient at x3 <= 0; nonnegative, zero outside [-a, 0]."""
        x = self._check_domain(x3)
        if self.delta == 0.0:
            out = np.zeros_like(x)
        elif self.kind == "quintic":
            t = (x + self.a) / self.a
            inside = (t > 0.0) & (t < 1.0)
            out = np.zeros_like(x)
            ti = t[inside]
            out[inside] = 30.0 * self.delta / self.a * ti**2 * (1.0 - ti) ** 2
        else:
            _, _, total = self._bump_table
            scale = 2.0 * self.delta / (self.a * total)
            out = scale * _bump_shape((2.0 * x + self.a) / self.a)
        return out if out.ndim else float(out)


def char_length(profile: DensityProfile, g: float, n_grid: int = 100_000):
    """Characteristic length L0 and the universal growth-rate cap sqrt(g/L0).

    1/L0 is the maximum of drho0/rho0, located by dense grid search on
    [-a, 0] (the ratio has no closed-form maximizer).  A profile with
    drho0 identically zero returns (inf, 0.0).
    """
    grid = np.linspace(-profile.a, 0.0, n_grid)
    ratio = profile.drho0(grid) / profile.rho0(grid)
    peak = float(ratio.max())
    if peak == 0.0:
        return math.inf, 0.0
    return 1.0 / peak, math.sqrt(g * peak)
