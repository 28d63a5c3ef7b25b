"""Grand resistance matrix, shape coupling matrix, and its shape derivatives.

Everything is computed at the reference sphere.  The first-order model used
throughout the package is

    M(s) ~ M(0),    N(s) ~ N(0) + sum_k s_k dN_k,

with N(0) = 0 for any self-propelled mode family.  Each derivative dN_k is
assembled column by column from the domain-derivative rule: if u_j solves
the exterior problem with mode-j boundary data, the perturbed wrench equals
the wrench of the solution u' whose boundary data is -grad(u_j) V_k on the
sphere, with V_k the full mode-k vector field evaluated at the surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lamb, sphgrid
from .errors import DomainError

DEFAULT_MAX_DEGREE = 6
DEFAULT_QUADRATURE_DEGREE = 24


@dataclass(frozen=True)
class DeformationMode:
    """Elementary radial deformation a * (Re/Im Y_nm) e_rho.

    `radial_exponent` records the decay power of the off-sphere extension;
    the dynamics only ever consume surface restrictions, so it is metadata,
    pinned to -(degree+1) for the paper-faithful family.
    """

    harmonic: sphgrid.HarmonicIndex
    radial_exponent: int | None = None
    amplitude: float = 1.0
    convention: str = "orthonormal"

    def __post_init__(self):
        expected = -(self.harmonic.degree + 1)
        if self.radial_exponent is None:
            object.__setattr__(self, "radial_exponent", expected)
        elif self.radial_exponent != expected:
            raise DomainError(
                f"radial exponent {self.radial_exponent} != -(n+1) = {expected}")
        if self.convention not in sphgrid.CONVENTIONS:
            raise DomainError(f"unknown convention {self.convention!r}")

    def surface_values(self, quadrature):
        return sphgrid.radial_harmonic_field(
            self.harmonic, quadrature, self.amplitude, self.convention).values

    def rescaled(self, a):
        return DeformationMode(self.harmonic, self.radial_exponent,
                               a * self.amplitude, self.convention)


@dataclass(frozen=True)
class CompositeRadialMode:
    """Sum of radial harmonic patterns; used by perturbation search."""

    terms: tuple  # of (HarmonicIndex, float)
    convention: str = "orthonormal"

    def surface_values(self, quadrature):
        out = np.zeros((quadrature.node_count, 3))
        for idx, coeff in self.terms:
            out += sphgrid.radial_harmonic_field(
                idx, quadrature, coeff, self.convention).values
        return out

    def rescaled(self, a):
        return CompositeRadialMode(
            tuple((idx, a * c) for idx, c in self.terms), self.convention)


@dataclass(frozen=True)
class SurfaceMode:
    """Arbitrary boundary field pinned to one grid (no golden values)."""

    field: sphgrid.SurfaceField

    def surface_values(self, quadrature):
        if quadrature is not self.field.quadrature:
            raise DomainError("surface mode is pinned to a different grid")
        return self.field.values


def paper_modes(convention="orthonormal"):
    """The four elementary deformations: Re Y31, Im Y31, Re Y32, Re Y42."""
    H = sphgrid.HarmonicIndex
    return [DeformationMode(H(3, 1, "re"), convention=convention),
            DeformationMode(H(3, 1, "im"), convention=convention),
            DeformationMode(H(3, 2, "re"), convention=convention),
            DeformationMode(H(4, 2, "re"), convention=convention)]


def rigid_boundary_field(i, quadrature):
    """Rigid velocity e_i x x (i = 1..3) or e_(i-3) (i = 4..6) on the grid."""
    if not 1 <= i <= 6:
        raise DomainError(f"rigid field index must be in 1..6, got {i}")
    if i <= 3:
        e = np.zeros(3)
        e[i - 1] = 1.0
        values = np.cross(e, quadrature.xyz)
    else:
        values = np.tile(np.eye(3)[i - 4], (quadrature.node_count, 1))
    return sphgrid.SurfaceField(quadrature, values)


def grand_resistance_sphere(quadrature, max_degree=DEFAULT_MAX_DEGREE, mu=1.0):
    """6x6 resistance of the unit sphere: diag(8 pi mu I3, 6 pi mu I3)."""
    M = np.empty((6, 6))
    for j in range(1, 7):
        sol = lamb.solve_boundary(rigid_boundary_field(j, quadrature),
                                  max_degree, mu)
        M[:, j - 1] = lamb.force_torque(sol).as_vector()
    return M


def _mode_solutions(modes, quadrature, max_degree, mu):
    fields = [sphgrid.SurfaceField(quadrature, m.surface_values(quadrature))
              for m in modes]
    sols = [lamb.solve_boundary(f, max_degree, mu) for f in fields]
    return fields, sols


def coupling_matrix(modes, quadrature, max_degree=DEFAULT_MAX_DEGREE, mu=1.0):
    """6xn wrench coupling of the mode rates at the reference sphere."""
    N = np.zeros((6, len(modes)))
    _, sols = _mode_solutions(modes, quadrature, max_degree, mu)
    for j, sol in enumerate(sols):
        N[:, j] = lamb.force_torque(sol).as_vector()
    return N


def coupling_derivative(k, modes, quadrature, max_degree=DEFAULT_MAX_DEGREE,
                        mu=1.0, _sols=None):
    """Shape derivative of the coupling matrix along mode k (1-based).

    Column j holds the wrench of the solution driven by the perturbation
    data -grad(u_j) V_k sampled on the sphere.
    """
    if not 1 <= k <= len(modes):
        raise DomainError(f"mode index {k} outside 1..{len(modes)}")
    if _sols is None:
        _, _sols = _mode_solutions(modes, quadrature, max_degree, mu)
    Vk = modes[k - 1].surface_values(quadrature)
    dN = np.zeros((6, len(modes)))
    for j, sol in enumerate(_sols):
        grad = lamb.eval_velocity_gradient(sol, quadrature.xyz)
        data = -np.einsum("kil,kl->ki", grad, Vk)
        pert = lamb.solve_boundary(sphgrid.SurfaceField(quadrature, data),
                                   max_degree, mu)
        dN[:, j] = lamb.force_torque(pert).as_vector()
    return dN


def first_order_twist(delta_values, rate_values, quadrature, M_inv,
                      max_degree=DEFAULT_MAX_DEGREE, mu=1.0):
    """Rigid twist (Omega, v) induced by an allowable deformation state.

    `delta_values` is the boundary displacement away from the sphere and
    `rate_values` its time derivative, both sampled on the grid.  Applies
    the same first-order rule as the dN assembly: wrench of the rate data
    plus wrench of the domain-derivative correction -grad(u_rate) delta.
    """
    sol = lamb.solve_boundary(
        sphgrid.SurfaceField(quadrature, rate_values), max_degree, mu)
    w = lamb.force_torque(sol).as_vector()
    grad = lamb.eval_velocity_gradient(sol, quadrature.xyz)
    corr = -np.einsum("kil,kl->ki", grad, delta_values)
    sol2 = lamb.solve_boundary(
        sphgrid.SurfaceField(quadrature, corr), max_degree, mu)
    w = w + lamb.force_torque(sol2).as_vector()
    return -M_inv @ w


@dataclass
class ResistanceSet:
    """Bundle of M, N and the n shape derivatives dN at the reference shape."""

    M: np.ndarray
    N: np.ndarray
    dN: list = field(repr=False)
    mu: float = 1.0

    def __post_init__(self):
        sym = np.abs(self.M - self.M.T).max()
        if sym > 1e-10 * max(1.0, np.abs(self.M).max()):
            raise DomainError(f"resistance matrix not symmetric (defect {sym:.2e})")
        eigs = np.linalg.eigvalsh(0.5 * (self.M + self.M.T))
        if eigs.min() <= 0.0:
            raise DomainError("resistance matrix not positive definite")
        self.M_inv = np.linalg.inv(self.M)
        self.dN_stack = np.stack(self.dN) if self.dN else np.zeros(
            (0, 6, self.N.shape[1]))

    @property
    def n_modes(self):
        return self.N.shape[1]


def resistance_set(modes, quadrature=None, max_degree=DEFAULT_MAX_DEGREE,
                   mu=1.0):
    """Assemble M, N and all dN_k for a mode family."""
    if quadrature is None:
        quadrature = sphgrid.build_quadrature(DEFAULT_QUADRATURE_DEGREE)
    M = grand_resistance_sphere(quadrature, max_degree, mu)
    _, sols = _mode_solutions(modes, quadrature, max_degree, mu)
    N = np.zeros((6, len(modes)))
    for j, sol in enumerate(sols):
        N[:, j] = lamb.force_torque(sol).as_vector()
    dN = [coupling_derivative(k, modes, quadrature, max_degree, mu, _sols=sols)
          for k in range(1, len(modes) + 1)]
    return ResistanceSet(M=M, N=N, dN=dN, mu=mu)
