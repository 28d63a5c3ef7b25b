"""Spherical harmonics, exact sphere quadrature, and surface projections.

Basis layer for the exterior-flow solver.  Complex harmonics Y_nm are
orthonormal on the unit sphere and carry the Condon-Shortley phase, so
Y_{n,-m} = (-1)^m conj(Y_{n,m}).  Alternative normalizations ("4pi",
"schmidt") are available as a convention switch on the user-facing
evaluators; all internal machinery works in the orthonormal basis.

Decaying solid harmonics I_nm(x) = rho^-(n+1) Y_nm(x^) are differentiated
through exact Cartesian ladder identities, which keeps every evaluation
well defined on the polar axis (no 1/sin(beta) terms ever appear).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONVENTIONS = ("orthonormal", "4pi", "schmidt")


class SphereGridError(ValueError):
    """Invalid index, insufficient quadrature order, or malformed field."""


def convention_scale(convention, n):
    """Scale factor s(n) such that Y^conv = s(n) * Y^orthonormal."""
    if convention == "orthonormal":
        return np.ones_like(np.asarray(n, dtype=float))
    if convention == "4pi":
        return np.full_like(np.asarray(n, dtype=float), np.sqrt(4.0 * np.pi))
    if convention == "schmidt":
        return np.sqrt(4.0 * np.pi / (2.0 * np.asarray(n, dtype=float) + 1.0))
    raise SphereGridError(f"unknown harmonic convention {convention!r}")


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order/part selector for a real-valued harmonic pattern."""

    degree: int
    order: int
    part: str = "re"

    def __post_init__(self):
        if self.degree < 0:
            raise SphereGridError(f"degree must be >= 0, got {self.degree}")
        if abs(self.order) > self.degree:
            raise SphereGridError(
                f"|order| <= degree violated: n={self.degree}, m={self.order}")
        if self.part not in ("re", "im"):
            raise SphereGridError(f"part must be 're' or 'im', got {self.part!r}")
        if self.part == "im" and self.order < 1:
            raise SphereGridError(
                "imaginary part requires order >= 1 (Im Y_n0 vanishes identically)")


def legendre_table(nmax, x, s=None):
    """Fully normalized associated Legendre functions Pbar_n^m(x).

    Returns array of shape (nmax+1, nmax+1, *x.shape) indexed [n, m]; the
    normalization includes the sqrt((2n+1)/4pi * (n-m)!/(n+m)!) factor and
    the Condon-Shortley phase, so Y_nm = Pbar_n^m(cos beta) e^(i m alpha).
    Pass s = sin(beta) explicitly when a cancellation-free value is known.
    """
    x = np.asarray(x, dtype=float)
    if s is None:
        s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    P = np.zeros((nmax + 1, nmax + 1) + x.shape)
    P[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, nmax + 1):
        P[m, m] = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * P[m - 1, m - 1]
    for m in range(0, nmax):
        P[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * P[m, m]
    for m in range(0, nmax + 1):
        for n in range(m + 2, nmax + 1):
            a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
            P[n, m] = a * (x * P[n - 1, m] - b * P[n - 2, m])
    return P


def _harmonic_table_cs(nmax, cosb, sinb, expia):
    """Y_nm table from cos(beta), sin(beta) and the unit phase e^(i alpha)."""
    P = legendre_table(nmax, cosb, sinb)
    Y = np.zeros((nmax + 1, 2 * nmax + 1) + np.shape(cosb), dtype=complex)
    phase = np.ones_like(expia)
    for m in range(0, nmax + 1):
        for n in range(m, nmax + 1):
            Y[n, nmax + m] = P[n, m] * phase
            if m > 0:
                Y[n, nmax - m] = (-1) ** m * np.conj(Y[n, nmax + m])
        phase = phase * expia
    return Y


def harmonic_table(nmax, alpha, beta):
    """Orthonormal Y_nm at the given angles.

    Returns complex array of shape (nmax+1, 2*nmax+1, *pts) with the order
    stored at column m + nmax; entries with |m| > n are zero.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return _harmonic_table_cs(nmax, np.cos(beta), np.sin(beta),
                              np.exp(1j * alpha))


def eval_harmonic(idx, alpha, beta, convention="orthonormal"):
    """Complex Y_nm(cos beta, alpha) in the selected normalization."""
    scale = convention_scale(convention, idx.degree)
    Y = harmonic_table(idx.degree, np.asarray(alpha, float), np.asarray(beta, float))
    return scale * Y[idx.degree, idx.degree + idx.order]


def real_harmonic(idx, alpha, beta, convention="orthonormal"):
    """Re or Im part of Y_nm per the index selector."""
    y = eval_harmonic(idx, alpha, beta, convention)
    return y.real if idx.part == "re" else y.imag


# ---------------------------------------------------------------------------
# Decaying solid harmonics I_nm = rho^-(n+1) Y_nm and their Cartesian ladders
# ---------------------------------------------------------------------------

def irregular_table(nmax, xyz):
    """I_nm(x) = rho^-(n+1) Y_nm(x^) at Cartesian points, shape (K, 3).

    Returns complex array (nmax+1, 2*nmax+1, K).  Safe on the polar axis.
    """
    xyz = np.atleast_2d(np.asarray(xyz, dtype=float))
    rho = np.linalg.norm(xyz, axis=1)
    if np.any(rho == 0.0):
        raise SphereGridError("solid harmonics are singular at the origin")
    cosb = xyz[:, 2] / rho
    r_xy = np.hypot(xyz[:, 0], xyz[:, 1])
    sinb = r_xy / rho
    safe = np.where(r_xy > 0.0, r_xy, 1.0)
    expia = np.where(r_xy > 0.0, (xyz[:, 0] + 1j * xyz[:, 1]) / safe, 1.0 + 0j)
    Y = _harmonic_table_cs(nmax, cosb, sinb, expia)
    radial = rho[None, :] ** -(np.arange(nmax + 1)[:, None] + 1.0)
    return Y * radial[:, None, :]


def _ladder_c0(n, m):
    return np.sqrt(((n + 1.0) ** 2 - m * m) * (2.0 * n + 1.0) / (2.0 * n + 3.0))


def _ladder_cp(n, m):
    return np.sqrt((n + m + 1.0) * (n + m + 2.0) * (2.0 * n + 1.0) / (2.0 * n + 3.0))


def _ladder_cm(n, m):
    return np.sqrt((n - m + 1.0) * (n - m + 2.0) * (2.0 * n + 1.0) / (2.0 * n + 3.0))


def grad_coeffs(c):
    """Cartesian gradient of an expansion in decaying solid harmonics.

    `c` has shape (N+1, 2N+1) with order m stored at column m+N.  Returns
    (cx, cy, cz) of shape (N+2, 2N+3): one degree higher, same layout.
    The underlying identities are

        dz I_nm       = -sqrt(((n+1)^2-m^2)(2n+1)/(2n+3)) I_(n+1,m)
        (dx+i dy)I_nm = +sqrt((n+m+1)(n+m+2)(2n+1)/(2n+3)) I_(n+1,m+1)
        (dx-i dy)I_nm = -sqrt((n-m+1)(n-m+2)(2n+1)/(2n+3)) I_(n+1,m-1)
    """
    N = c.shape[0] - 1
    cp_out = np.zeros((N + 2, 2 * N + 3), dtype=complex)  # (dx + i dy) c
    cm_out = np.zeros((N + 2, 2 * N + 3), dtype=complex)  # (dx - i dy) c
    cz_out = np.zeros((N + 2, 2 * N + 3), dtype=complex)
    for n in range(N + 1):
        m = np.arange(-n, n + 1)
        row = c[n, N - n:N + n + 1]
        cz_out[n + 1, (N + 1) + m] += -_ladder_c0(n, m) * row
        cp_out[n + 1, (N + 1) + m + 1] += _ladder_cp(n, m) * row
        cm_out[n + 1, (N + 1) + m - 1] += -_ladder_cm(n, m) * row
    cx = 0.5 * (cp_out + cm_out)
    cy = (cp_out - cm_out) / 2j
    return cx, cy, cz_out


def eval_expansion(c, xyz, table=None):
    """Evaluate sum_nm c[n,m] I_nm at points (K, 3) -> complex (K,)."""
    N = c.shape[0] - 1
    if c.shape[1] != 2 * N + 1:
        raise SphereGridError(f"coefficient array {c.shape} is not (N+1, 2N+1)")
    if table is None:
        table = irregular_table(N, xyz)
    off = (table.shape[1] - 1) // 2
    return np.einsum("nm,nmk->k", c, table[:N + 1, off - N:off + N + 1, :])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

class SphereQuadrature:
    """Gauss-Legendre x uniform-azimuth product rule on the unit sphere.

    Exact for spherical polynomials of degree <= max_exact_degree.  Node
    angles are (alpha, beta); `xyz` holds the Cartesian unit vectors.
    Harmonic tables on the grid are cached per requested degree.
    """

    def __init__(self, alpha, beta, weights, max_exact_degree):
        self.alpha = np.asarray(alpha, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.max_exact_degree = int(max_exact_degree)
        if np.any(self.weights <= 0.0):
            raise SphereGridError("quadrature weights must be strictly positive")
        if abs(self.weights.sum() - 4.0 * np.pi) > 1e-12 * 4.0 * np.pi:
            raise SphereGridError("quadrature weights do not sum to 4*pi")
        sb = np.sin(self.beta)
        self.xyz = np.stack(
            [sb * np.cos(self.alpha), sb * np.sin(self.alpha), np.cos(self.beta)],
            axis=1)
        self._cache = {}

    @property
    def node_count(self):
        return self.weights.size

    def integrate(self, values):
        """Surface integral of scalar or vector samples (K,) or (K, d)."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def harmonics(self, nmax):
        """Cached table Y[n, nmax+m, node] on the grid."""
        key = ("Y", nmax)
        if key not in self._cache:
            self._cache[key] = harmonic_table(nmax, self.alpha, self.beta)
        return self._cache[key]

    def surface_gradients(self, nmax):
        """Cached tangential gradients grad_s Y_nm, shape (n, m, node, 3).

        Uses grad_s Y = grad I_nm |_(rho=1) + (n+1) Y e_rho, so the only
        differentiation happens through the exact Cartesian ladders.
        """
        key = ("gradY", nmax)
        if key not in self._cache:
            table = irregular_table(nmax + 1, self.xyz)
            Y = self.harmonics(nmax)
            out = np.zeros((nmax + 1, 2 * nmax + 1, self.node_count, 3),
                           dtype=complex)
            for n in range(1, nmax + 1):
                c = np.zeros((n + 1, 2 * n + 1), dtype=complex)
                for col in range(2 * n + 1):
                    m = col - n
                    c[:] = 0.0
                    c[n, col] = 1.0
                    cx, cy, cz = grad_coeffs(c)
                    sub = table[:n + 2, (nmax + 1) - (n + 1):(nmax + 1) + (n + 2), :]
                    gx = np.einsum("nm,nmk->k", cx, sub)
                    gy = np.einsum("nm,nmk->k", cy, sub)
                    gz = np.einsum("nm,nmk->k", cz, sub)
                    grad = np.stack([gx, gy, gz], axis=1)
                    out[n, nmax + m] = grad + (n + 1.0) * (
                        Y[n, nmax + m][:, None] * self.xyz)
            self._cache[key] = out
        return self._cache[key]


def build_quadrature(L):
    """Product quadrature exact for spherical polynomials of degree <= L."""
    if L < 2:
        raise SphereGridError(f"quadrature degree must be >= 2, got {L}")
    n_polar = (L + 2) // 2  # ceil((L+1)/2)
    x, w = np.polynomial.legendre.leggauss(n_polar)
    n_az = 2 * L + 1
    az = 2.0 * np.pi * np.arange(n_az) / n_az
    beta = np.arccos(x)
    alpha_grid, beta_grid = np.meshgrid(az, beta)
    w_grid = np.broadcast_to((w * 2.0 * np.pi / n_az)[:, None], alpha_grid.shape)
    return SphereQuadrature(alpha_grid.ravel(), beta_grid.ravel(),
                            w_grid.ravel(), L)


# ---------------------------------------------------------------------------
# Surface fields and projections
# ---------------------------------------------------------------------------

@dataclass
class SurfaceField:
    """Cartesian 3-vector samples of a velocity on the unit sphere grid."""

    quadrature: SphereQuadrature
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.quadrature.node_count, 3):
            raise SphereGridError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.quadrature.node_count}, 3)")
        if not np.all(np.isfinite(self.values)):
            raise SphereGridError("surface field contains non-finite entries")


def radial_harmonic_field(idx, quadrature, amplitude=1.0, convention="orthonormal"):
    """Purely radial field a * (Re/Im Y_nm) e_rho sampled on the grid."""
    Y = quadrature.harmonics(idx.degree)
    y = convention_scale(convention, idx.degree) * Y[idx.degree, idx.degree + idx.order]
    pattern = y.real if idx.part == "re" else y.imag
    return SurfaceField(quadrature, amplitude * pattern[:, None] * quadrature.xyz)


@dataclass
class ProjectionTable:
    """Per-(n, m) surface projections of a field; columns store m + nmax."""

    nmax: int
    radial: np.ndarray
    divergence: np.ndarray
    curl: np.ndarray

    def entry(self, n, m):
        return (self.radial[n, self.nmax + m],
                self.divergence[n, self.nmax + m],
                self.curl[n, self.nmax + m])


def surface_projections(f, L):
    """Radial, surface-divergence, and surface-curl projections up to degree L.

    For each (n, m) with n <= L returns <Y_nm, f.e_rho>, <Y_nm, div_s f> and
    <Y_nm, e_rho . curl_s f>.  Tangential derivatives are applied spectrally
    through the harmonic expansions (no finite differences on the grid); the
    surface divergence of the normal component uses div_s e_rho = 2, and the
    curl projection is the pairing -<e_rho x grad_s Y_nm, f>.
    """
    quad = f.quadrature
    if quad.max_exact_degree < 2 * L:
        raise SphereGridError(
            f"projections up to degree {L} need quadrature exactness >= {2 * L}, "
            f"grid provides {quad.max_exact_degree}")
    Y = quad.harmonics(L)
    gradY = quad.surface_gradients(L)
    w = quad.weights
    f_rad = np.einsum("kd,kd->k", f.values, quad.xyz)
    radial = np.einsum("nmk,k,k->nm", np.conj(Y), w, f_rad)
    pair_grad = np.einsum("nmkd,k,kd->nm", np.conj(gradY), w, f.values)
    pair_curl = np.einsum("nmkd,k,kd->nm", np.conj(np.cross(
        quad.xyz[None, None, :, :], gradY)), w, f.values)
    divergence = 2.0 * radial - pair_grad
    curl = -pair_curl
    return ProjectionTable(L, radial, divergence, curl)


def vector_harmonic_coefficients(f, nmax):
    """Decompose f = sum A Y e_rho + B grad_s Y + C (e_rho x grad_s Y).

    Returns complex arrays (A, B, C) of shape (nmax+1, 2*nmax+1); B and C
    are zero at n = 0.  This is the solver-facing form of the projections.
    """
    quad = f.quadrature
    if quad.max_exact_degree < 2 * nmax + 2:
        raise SphereGridError(
            f"decomposition to degree {nmax} needs quadrature exactness "
            f">= {2 * nmax + 2}, grid provides {quad.max_exact_degree}")
    Y = quad.harmonics(nmax)
    gradY = quad.surface_gradients(nmax)
    w = quad.weights
    f_rad = np.einsum("kd,kd->k", f.values, quad.xyz)
    A = np.einsum("nmk,k,k->nm", np.conj(Y), w, f_rad)
    B = np.einsum("nmkd,k,kd->nm", np.conj(gradY), w, f.values)
    C = np.einsum("nmkd,k,kd->nm", np.conj(np.cross(
        quad.xyz[None, None, :, :], gradY)), w, f.values)
    norms = np.arange(nmax + 1, dtype=float) * (np.arange(nmax + 1) + 1.0)
    norms[0] = 1.0
    B /= norms[:, None]
    C /= norms[:, None]
    return A, B, C
