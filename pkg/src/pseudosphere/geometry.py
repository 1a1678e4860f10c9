"""Extrinsic and intrinsic geometry of sampled immersions.

All operations act on whole fields: per-node tensor algebra is batched
with einsum, derivatives go through the fieldcalc stencils.  Index
conventions follow the classical submanifold equations: the Gauss
equation is checked in the form

    R_ijkl = b^1_ik b^1_jl - b^1_il b^1_jk + b^2_ik b^2_jl - b^2_il b^2_jk,

so the stored curvature components satisfy
K(plane i,j) = R_ijij / (g_ii g_jj - g_ij^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fieldcalc as fc
from .errors import DegenerateImmersion, NonFiniteEntry, SeedDegenerate

ORTHONORMALITY_TOL = 1e-8


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass
class MetricField:
    grid: fc.Grid2
    g: np.ndarray        # grid.shape + (m, m)

    def __post_init__(self):
        if not np.all(np.isfinite(self.g)):
            raise NonFiniteEntry("metric contains non-finite entries")
        self.g_inv = np.linalg.inv(self.g)

    @property
    def m(self):
        return self.g.shape[-1]

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(self.g)))


@dataclass
class ChristoffelField:
    grid: fc.Grid2
    gamma: np.ndarray    # grid.shape + (m, m, m), Gamma^k_ij = gamma[..., k, i, j]


@dataclass
class CurvatureField:
    grid: fc.Grid2
    riemann: np.ndarray  # grid.shape + (m, m, m, m), fully covariant R_ijkl
    metric: MetricField

    def sectional(self, i, j):
        """Sectional curvature of the coordinate plane (i, j)."""
        g = self.metric.g
        denom = g[..., i, i] * g[..., j, j] - g[..., i, j] ** 2
        return self.riemann[..., i, j, i, j] / denom

    def sectional_plane(self, X, Y):
        """Sectional curvature of the plane spanned by per-node vectors X, Y."""
        g = self.metric.g
        num = np.einsum("...ijkl,...i,...j,...k,...l->...",
                        self.riemann, X, Y, X, Y)
        xx = np.einsum("...ij,...i,...j->...", g, X, X)
        yy = np.einsum("...ij,...i,...j->...", g, Y, Y)
        xy = np.einsum("...ij,...i,...j->...", g, X, Y)
        return num / (xx * yy - xy ** 2)


@dataclass
class NormalFrameField:
    grid: fc.Grid2
    normals: np.ndarray  # grid.shape + (codim, ambient_dim)

    @property
    def codim(self):
        return self.normals.shape[-2]


@dataclass
class SecondFormField:
    grid: fc.Grid2
    b: np.ndarray        # grid.shape + (codim, m, m), b[..., s, i, j] = b^{s+1}_ij


@dataclass
class TorsionField:
    grid: fc.Grid2
    mu12: np.ndarray     # grid.shape + (m,), mu_{12|i}

    def mu(self, sigma, nu):
        """mu_{sigma nu | i}; antisymmetric in (sigma, nu), 1-based indices."""
        if sigma == nu:
            return np.zeros_like(self.mu12)
        return self.mu12 if (sigma, nu) == (1, 2) else -self.mu12


# ---------------------------------------------------------------------------
# derivative helpers
# ---------------------------------------------------------------------------

def hessian(x: fc.Field) -> np.ndarray:
    """Second partials d_i d_j of a field by composed first-derivative
    stencils; symmetrized.  Shape grid.shape + comp + (m, m)."""
    m = x.grid.ndim
    firsts = [fc.partial(x, i, 1) for i in range(m)]
    comp = x.values.shape[x.grid.ndim:]
    out = np.zeros(x.grid.shape + comp + (m, m))
    for i in range(m):
        for j in range(i, m):
            hij = fc.partial(firsts[i], j, 1).values
            if i == j:
                out[..., i, i] = hij
            else:
                hji = fc.partial(firsts[j], i, 1).values
                sym = 0.5 * (hij + hji)
                out[..., i, j] = sym
                out[..., j, i] = sym
    return out


# ---------------------------------------------------------------------------
# intrinsic geometry
# ---------------------------------------------------------------------------

def induced_metric(x: fc.ImmersionField, eig_floor: float = 1e-10) -> MetricField:
    """First fundamental form g_ij = <d_i x, d_j x>."""
    J = fc.jacobian(x)
    g = np.einsum("...ai,...aj->...ij", J, J)
    metric = MetricField(x.grid, g)
    if metric.min_eigenvalue() <= eig_floor:
        raise DegenerateImmersion(
            f"metric min eigenvalue {metric.min_eigenvalue():.3e} <= {eig_floor:.1e}")
    return metric


def christoffel(g: MetricField) -> ChristoffelField:
    """Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    m = g.m
    dg = np.stack(
        [fc.diff_values(g.g, g.grid, i, 1) for i in range(m)], axis=-3)
    # dg[..., l, i, j] = d_l g_ij; loop construction, m <= 3 so this is cheap
    gam = np.zeros(g.g.shape[:-2] + (m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(m):
                s = 0.0
                for l in range(m):
                    s = s + g.g_inv[..., k, l] * (
                        dg[..., i, j, l] + dg[..., j, i, l] - dg[..., l, i, j])
                gam[..., k, i, j] = 0.5 * s
    return ChristoffelField(g.grid, gam)


def riemann(g: MetricField) -> CurvatureField:
    """Fully covariant curvature tensor of the metric.

    Built from R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik
    + Gamma^l_is Gamma^s_jk - Gamma^l_js Gamma^s_ik, then lowered and
    reordered so the Gauss-equation index pattern holds (see module
    docstring).
    """
    m = g.m
    gam = christoffel(g).gamma
    dgam = np.stack(
        [fc.diff_values(gam, g.grid, i, 1) for i in range(m)], axis=-4)
    # dgam[..., i, l, j, k] = d_i Gamma^l_jk
    r_up = (np.einsum("...iljk->...lkij", dgam)
            - np.einsum("...jlik->...lkij", dgam)
            + np.einsum("...lis,...sjk->...lkij", gam, gam)
            - np.einsum("...ljs,...sik->...lkij", gam, gam))
    # r_up[..., l, k, i, j] = R^l_kij  (curvature operator on plane (i, j))
    riem = np.einsum("...ml,...lkij->...mkij", g.g, r_up)
    # riem[..., i, j, k, l] = g(R(e_k, e_l) e_j, e_i), which pairs as
    # (ik)(jl) in the Gauss equation and gives K = riem[i,j,i,j] / (gg - g^2).
    # Project onto the algebraic symmetry class so the skew/pair identities
    # hold exactly, not just to discretization error.
    riem = 0.5 * (riem - riem.swapaxes(-4, -3))
    riem = 0.5 * (riem - riem.swapaxes(-2, -1))
    riem = 0.5 * (riem + np.einsum("...ijkl->...klij", riem))
    return CurvatureField(g.grid, riem, g)


# ---------------------------------------------------------------------------
# extrinsic geometry
# ---------------------------------------------------------------------------

def normal_frame(x: fc.ImmersionField, seed: np.ndarray | None = None,
                 tol: float = 1e-6) -> NormalFrameField:
    """Orthonormal normal frame by Gram-Schmidt of a fixed seed basis
    against the tangent space.  Deterministic; continuous wherever the
    accepted seed set does not change."""
    J = fc.jacobian(x)
    d = x.ambient_dim
    m = x.grid.ndim
    codim = d - m
    if seed is None:
        seed = np.eye(d)
    Q, _ = np.linalg.qr(J)                     # orthonormal tangent basis
    accepted = []
    for s in np.asarray(seed, dtype=float):
        r = np.broadcast_to(s, J.shape[:-2] + (d,)).copy()
        r -= np.einsum("...ak,...bk,...b->...a", Q, Q, r)
        for n_prev in accepted:
            r -= np.einsum("...a,...a->...", n_prev, r)[..., None] * n_prev
        norm = np.linalg.norm(r, axis=-1)
        if np.min(norm) < tol:
            continue                           # seed vector (nearly) tangent somewhere
        accepted.append(r / norm[..., None])
        if len(accepted) == codim:
            break
    if len(accepted) < codim:
        raise SeedDegenerate(
            f"seed basis yields {len(accepted)} normals, need {codim}")
    return NormalFrameField(x.grid, np.stack(accepted, axis=-2))


def frame_orthonormality_error(x: fc.ImmersionField, frame: NormalFrameField):
    """(max |<n_s, d_i x>|, max |<n_s, n_t> - delta|) over all nodes."""
    J = fc.jacobian(x)
    tang = np.einsum("...sa,...ai->...si", frame.normals, J)
    gram = np.einsum("...sa,...ta->...st", frame.normals, frame.normals)
    eye = np.eye(frame.codim)
    return float(np.max(np.abs(tang))), float(np.max(np.abs(gram - eye)))


def second_forms(x: fc.ImmersionField, frame: NormalFrameField) -> SecondFormField:
    """b^s_ij = <d_i d_j x, n_s>."""
    H = hessian(x)                             # grid + (d, m, m)
    b = np.einsum("...sa,...aij->...sij", frame.normals, H)
    return SecondFormField(x.grid, b)


def torsion(frame: NormalFrameField) -> TorsionField:
    """mu_{12|i} = <d_i n_1, n_2> by finite differences of the frame."""
    if frame.codim != 2:
        raise ValueError("torsion needs a codimension-2 frame")
    grid = frame.grid
    n1 = frame.normals[..., 0, :]
    n2 = frame.normals[..., 1, :]
    mu = np.stack(
        [np.einsum("...a,...a->...", fc.diff_values(n1, grid, i, 1), n2)
         for i in range(grid.ndim)], axis=-1)
    return TorsionField(grid, mu)


# ---------------------------------------------------------------------------
# Gauss-Codazzi-Ricci residuals
# ---------------------------------------------------------------------------

@dataclass
class GCRResiduals:
    gauss: np.ndarray       # grid.shape + (m, m, m, m)
    codazzi: np.ndarray     # grid.shape + (codim, m, m, m)
    ricci: np.ndarray       # grid.shape + (m, m), flat-connection form
    ricci_full: np.ndarray  # grid.shape + (m, m), with the d(mu) terms

    def sup_norms(self, mask=None):
        def sup(a):
            flat = a.reshape(a.shape[: mask.ndim] + (-1,)) if mask is not None else a
            if mask is not None:
                flat = flat[mask]
            return float(np.max(np.abs(flat)))
        return {"gauss": sup(self.gauss), "codazzi": sup(self.codazzi),
                "ricci": sup(self.ricci), "ricci_full": sup(self.ricci_full)}


def gcr_residuals(g: MetricField, b: SecondFormField, mu: TorsionField,
                  curvature: CurvatureField | None = None) -> GCRResiduals:
    """Pointwise residuals of the Gauss, Codazzi, and (flat-connection)
    Ricci equations for a codimension-2 immersion."""
    m = g.m
    if curvature is None:
        curvature = riemann(g)
    R = curvature.riemann
    bb = b.b                                   # (..., s, i, j)

    gauss = R - (np.einsum("...sik,...sjl->...ijkl", bb, bb)
                 - np.einsum("...sil,...sjk->...ijkl", bb, bb))

    gam = christoffel(g).gamma
    db = np.stack(
        [fc.diff_values(bb, g.grid, k, 1) for k in range(m)], axis=-1)
    # db[..., s, i, j, k] = d_k b^s_ij
    # mu_{nu sigma | k} b^nu_ij summed over nu: for sigma=1 the nu=2 term
    # carries mu_{21|k} = -mu_{12|k}; for sigma=2 the nu=1 term carries +mu_{12|k}.
    mu_k = mu.mu12                             # (..., k)
    mu_term = np.empty_like(db)
    mu_term[..., 0, :, :, :] = -np.einsum("...k,...ij->...ijk", mu_k, bb[..., 1, :, :])
    mu_term[..., 1, :, :, :] = np.einsum("...k,...ij->...ijk", mu_k, bb[..., 0, :, :])

    gam_term = np.einsum("...hij,...shk->...sijk", gam, bb)
    lhs = db + gam_term + mu_term              # (..., s, i, j, k)
    codazzi = lhs - np.swapaxes(lhs, -1, -2)   # antisymmetrize in (j, k)

    A = np.einsum("...is,...sl,...jl->...ij",
                  bb[..., 0, :, :], g.g_inv, bb[..., 1, :, :])
    ricci = A - np.swapaxes(A, -1, -2)
    # Full Ricci equation: normal curvature d(mu) balances the asymmetry of
    # A; with codim 2 the quadratic mu*mu terms cancel identically.
    dmu = np.stack(
        [fc.diff_values(mu.mu12, g.grid, j, 1) for j in range(m)], axis=-1)
    # dmu[..., i, j] = d_j mu_{12|i}
    curl_mu = dmu - np.swapaxes(dmu, -1, -2)
    ricci_full = curl_mu - ricci
    return GCRResiduals(gauss=gauss, codazzi=codazzi, ricci=ricci,
                        ricci_full=ricci_full)


# ---------------------------------------------------------------------------
# surfaces in R^3
# ---------------------------------------------------------------------------

def shape_operator(x: fc.ImmersionField):
    """Shape operator W = g^{-1} b and Gauss curvature det W of a
    2-D immersion in R^3.  Returns (W field, K field)."""
    if x.grid.ndim != 2 or x.ambient_dim != 3:
        raise ValueError("shape_operator expects a 2-D immersion in R^3")
    g = induced_metric(x)
    J = fc.jacobian(x)
    n = np.cross(J[..., 0], J[..., 1])
    n /= np.linalg.norm(n, axis=-1)[..., None]
    H = hessian(x)
    b = np.einsum("...a,...aij->...ij", n, H)
    W = np.einsum("...ik,...kj->...ij", g.g_inv, b)
    K = np.linalg.det(W)
    return W, K
