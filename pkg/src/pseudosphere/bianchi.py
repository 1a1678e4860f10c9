"""Bianchi transformation, kernel analysis, aligned frames, holonomicity.

The transformation x -> x + d x / d u1 is defined for an immersion sampled
on a chart whose first coordinate is horospherical (g11 = 1, g1j = 0).
For the shipped submanifolds its differential drops to rank 2; this module
extracts the per-node rank profile and the kernel direction, rotates the
normal frame so the first normal carries no mixed second-form entries,
builds the distinguished tangent distributions, and runs the holonomicity
and null-curve diagnostics on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import fieldcalc as fc
from .errors import (
    DomainViolation,
    KernelVanishes,
    LeftDomain,
    NoDegeneracy,
    NotHorospherical,
    RankAmbiguous,
)
from .geometry import (
    MetricField,
    NormalFrameField,
    SecondFormField,
    induced_metric,
    second_forms,
)

HOROSPHERICAL_TOL = 1e-4
AMBIGUOUS_BAND = 10.0  # sigma2/sigma1 in [tau, 10 tau) cannot be classified


# ---------------------------------------------------------------------------
# the transformation
# ---------------------------------------------------------------------------

@dataclass
class BianchiResult:
    source: fc.ImmersionField
    image: fc.ImmersionField
    ranks: fc.RankProfile
    kernel: np.ndarray      # grid.shape + (grid.ndim,), unit chart vectors

    @property
    def grid(self):
        return self.source.grid


def horospherical_error(x: fc.ImmersionField) -> float:
    """Sup deviation of the induced metric's first row from (1, 0, ...)."""
    g = induced_metric(x).g
    err = np.abs(g[..., 0, 0] - 1.0)
    for j in range(1, g.shape[-1]):
        err = np.maximum(err, np.abs(g[..., 0, j]))
    return float(np.max(err))


def bianchi_transform(x: fc.ImmersionField,
                      tau: float = fc.DEFAULT_RANK_TAU,
                      metric_tol: float = HOROSPHERICAL_TOL) -> BianchiResult:
    """Apply x -> x + d1 x and analyse the differential of the image.

    The kernel field is the right-singular vector of the smallest singular
    value, normalized and oriented so its second chart component is
    nonnegative (ties broken by the third component).  Nodes whose
    sigma2/sigma1 ratio falls inside [tau, 10 tau) are rejected: there the
    rank-1/rank-2 distinction is below the resolution of the threshold.
    """
    err = horospherical_error(x)
    if err > metric_tol:
        raise NotHorospherical(
            f"first metric row deviates by {err:.3e} > {metric_tol:g}")
    image = fc.ImmersionField(x.grid, x.values + fc.partial(x, 0).values)
    J = fc.jacobian(image)
    ranks = fc.rank_profile(J, tau)

    sig = ranks.sigmas
    lead = np.where(sig[..., 0] > 0.0, sig[..., 0], 1.0)
    ratio2 = sig[..., 1] / lead
    band = (ratio2 >= tau) & (ratio2 < AMBIGUOUS_BAND * tau)
    if np.any(band):
        frac = float(np.mean(band))
        raise RankAmbiguous(
            f"sigma2/sigma1 inside [{tau:g}, {AMBIGUOUS_BAND * tau:g}) at "
            f"{100 * frac:.2f}% of nodes")

    _, _, Vt = np.linalg.svd(J)
    kernel = Vt[..., -1, :]
    # deterministic orientation for curve integration
    lead_c = kernel[..., 1]
    tie = np.abs(lead_c) < 1e-6
    if kernel.shape[-1] > 2:
        lead_c = np.where(tie, kernel[..., 2], lead_c)
    flip = lead_c < 0.0
    kernel = np.where(flip[..., None], -kernel, kernel)
    return BianchiResult(source=x, image=image, ranks=ranks, kernel=kernel)


def image_surface(result: BianchiResult,
                  fiber_tol: float = 1e-6,
                  flat_tol: float = 1e-8) -> fc.ImmersionField:
    """Collapse a rank-2 image over a Grid3 to a surface over the base Grid2.

    Checks that the image is constant along the third chart axis and that
    its last two ambient components vanish, then returns the first three
    components on the (v1, v2) grid.
    """
    grid = result.grid
    if not isinstance(grid, fc.Grid3):
        raise DomainViolation("image_surface expects a Grid3 result")
    vals = result.image.values
    spread = float(np.max(np.ptp(vals, axis=2)))
    if spread > fiber_tol:
        raise DomainViolation(
            f"image varies by {spread:.3e} > {fiber_tol:g} along the fiber axis")
    tail = float(np.max(np.abs(vals[..., 3:])))
    if tail > flat_tol:
        raise DomainViolation(
            f"image components 4,5 reach {tail:.3e} > {flat_tol:g}")
    base = fc.Grid2(grid.v1_min, grid.v1_max, grid.v2_min, grid.v2_max,
                    grid.n1, grid.n2)
    mid = grid.n3 // 2
    return fc.ImmersionField(base, vals[:, :, mid, :3])


# ---------------------------------------------------------------------------
# aligned normal frame
# ---------------------------------------------------------------------------

def align_frame(x: fc.ImmersionField, frame: NormalFrameField,
                degeneracy_tol: float = 1e-8) -> NormalFrameField:
    """Rotate a codimension-2 normal frame so b^1_{12} = b^1_{13} = 0.

    The rotation angle is determined per node from the two mixed
    second-form rows m_s = (b^s_{12}, b^s_{13}); the rank-1 degeneracy of
    the mixed block makes a single angle kill both entries.  The sign is
    fixed so the rotation is the identity on an already-aligned frame.
    """
    if frame.codim != 2:
        raise DomainViolation("align_frame expects a codimension-2 frame")
    b = second_forms(x, frame).b
    m = b[..., :, 0, 1:]                      # (..., 2, m-1) mixed rows
    norms = np.linalg.norm(m, axis=-1)        # (..., 2)
    scale = max(float(np.max(np.abs(b))), 1.0)
    if np.min(np.max(norms, axis=-1)) < degeneracy_tol * scale:
        raise NoDegeneracy(
            "mixed second-form rows vanish at some node; "
            "no distinguished normal direction")
    pick = (norms[..., 1] >= norms[..., 0])
    d = np.where(pick[..., None], m[..., 1, :], m[..., 0, :])
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    alpha = np.einsum("...c,...c->...", m[..., 0, :], d)
    beta = np.einsum("...c,...c->...", m[..., 1, :], d)
    r = np.hypot(alpha, beta)
    c, s = beta / r, -alpha / r
    neg = (c < 0.0) | ((c == 0.0) & (s < 0.0))
    c = np.where(neg, -c, c)
    s = np.where(neg, -s, s)
    n1, n2 = frame.normals[..., 0, :], frame.normals[..., 1, :]
    out = np.empty_like(frame.normals)
    out[..., 0, :] = c[..., None] * n1 + s[..., None] * n2
    out[..., 1, :] = -s[..., None] * n1 + c[..., None] * n2
    return NormalFrameField(frame.grid, out)


# ---------------------------------------------------------------------------
# distinguished distributions
# ---------------------------------------------------------------------------

@dataclass
class DistributionTriple:
    grid: fc.Grid2
    xi: np.ndarray          # grid.shape + (3, m): xi[..., k, :] = xi_{k+1}
    orthogonality_error: float

    def vector(self, k):
        """xi_k, 1-based."""
        return self.xi[..., k - 1, :]


def distribution_triple(b: SecondFormField, g: MetricField,
                        tau: float = 1e-10) -> DistributionTriple:
    """Unit fields xi1 = d/du1, xi2 ~ (0, p, q), xi3 ~ (0, -q, p) with
    (p, q) = (b^2_{12}, b^2_{13}) of an aligned frame, normalized in g."""
    p = b.b[..., 1, 0, 1]
    q = b.b[..., 1, 0, 2]
    mag = np.hypot(p, q)
    scale = max(float(np.max(mag)), 1.0)
    if np.min(mag) < tau * scale:
        raise KernelVanishes(
            "(b^2_12)^2 + (b^2_13)^2 vanishes at some node")
    shape = b.b.shape[:-3]
    xi = np.zeros(shape + (3, 3))
    xi[..., 0, 0] = 1.0
    xi[..., 1, 1], xi[..., 1, 2] = p, q
    xi[..., 2, 1], xi[..., 2, 2] = -q, p
    norm = np.sqrt(np.einsum("...ki,...ij,...kj->...k", xi, g.g, xi))
    xi = xi / norm[..., None]
    dots = np.einsum("...ki,...ij,...lj->...kl", xi, g.g, xi)
    off = np.abs(dots - np.eye(3))[b.grid.interior()]
    return DistributionTriple(grid=b.grid, xi=xi,
                              orthogonality_error=float(np.max(off)))


def frobenius_residuals(triple: DistributionTriple, g: MetricField) -> dict:
    """Out-of-span component of [xi_i, xi_j] for each pair, sup over the
    interior.  The complement of span(xi_i, xi_j) is the g-line of xi_k."""
    grid = triple.grid
    inter = grid.interior()
    dxi = np.stack(
        [fc.diff_values(triple.xi, grid, axis) for axis in range(grid.ndim)],
        axis=-1)                               # (..., 3, m, ndim)
    out = {}
    for (i, j, k) in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        Xi, Xj = triple.xi[..., i, :], triple.xi[..., j, :]
        bracket = (np.einsum("...m,...cm->...c", Xi, dxi[..., j, :, :])
                   - np.einsum("...m,...cm->...c", Xj, dxi[..., i, :, :]))
        comp = np.einsum("...c,...cd,...d->...", bracket, g.g,
                         triple.xi[..., k, :])
        out[f"xi{i + 1}_xi{j + 1}"] = float(np.max(np.abs(comp[inter])))
    return out


# ---------------------------------------------------------------------------
# holonomicity
# ---------------------------------------------------------------------------

@dataclass
class HolonomicityReport:
    residual: np.ndarray
    sup: float
    verdict: bool


def holonomicity_residual(grid, b12, b13):
    """(d1 b^2_12) b^2_13 - (d1 b^2_13) b^2_12, normalized by the squared
    magnitude of (b^2_12, b^2_13)."""
    mag2 = b12 ** 2 + b13 ** 2
    if np.min(mag2) == 0.0:
        raise KernelVanishes("(b^2_12, b^2_13) vanishes at some node")
    d1_b12 = fc.diff_values(b12, grid, 0)
    d1_b13 = fc.diff_values(b13, grid, 0)
    return (d1_b12 * b13 - d1_b13 * b12) / mag2


def holonomicity_test(b: SecondFormField, tol: float = 5e-4) -> HolonomicityReport:
    """Degeneracy-direction independence of u1: the ratio b^2_13 / b^2_12
    must not drift along u1.  Requires an aligned frame on a chart whose
    first axis is horospherical."""
    res = holonomicity_residual(b.grid, b.b[..., 1, 0, 1], b.b[..., 1, 0, 2])
    sup = float(np.max(np.abs(res[b.grid.interior()])))
    return HolonomicityReport(residual=res, sup=sup, verdict=sup < tol)


# ---------------------------------------------------------------------------
# null-curve diagnostics
# ---------------------------------------------------------------------------

@dataclass
class NullCurveReport:
    seeds: np.ndarray          # (k, ndim) chart starting points
    drift: np.ndarray          # (k,) per-unit-length drift (mode-specific)
    closure: np.ndarray | None # (k,) circle-closure error, circles only
    verdict: bool
    left_domain: bool = False  # a trajectory exited the grid (reported, not fatal)


def _kernel_interpolator(grid, kernel, metric, fold_tol=5e-4):
    """Unit-speed (in g) kernel field sampled continuously on the chart.

    The field is v3-independent for every shipped case (up to metric
    truncation noise), so on a Grid3 it is averaged along v3 and sampled
    on (v1, v2) only -- curves may then wind in v3 without ever leaving
    the sampled window.  A guard refuses fields that genuinely vary
    along v3.
    """
    speed = np.sqrt(np.einsum("...i,...ij,...j->...", kernel, metric.g, kernel))
    unit = kernel / speed[..., None]
    if grid.ndim == 3:
        variation = float(np.max(np.ptp(unit, axis=2)))
        if variation > fold_tol:
            raise DomainViolation(
                f"kernel varies by {variation:.3e} along v3; cannot reduce")
        unit = unit.mean(axis=2)
        axes = grid.axes()[:2]
    else:
        axes = grid.axes()
    rgi = RegularGridInterpolator(axes, unit, method="linear",
                                  bounds_error=False, fill_value=None)
    lows = np.array([a[0] for a in axes])
    highs = np.array([a[-1] for a in axes])
    k = len(axes)

    def eval_field(pts):
        check = pts[..., :k]
        if np.any(check < lows - 1e-9) or np.any(check > highs + 1e-9):
            raise LeftDomain("null curve exited the sampled chart window")
        return rgi(check)

    return eval_field


def _integrate_curves(field, seeds, lengths, step):
    """Batched RK4 arclength integration; returns (endpoints, sup |dv2|)."""
    pts = np.array(seeds, dtype=float)
    s = np.zeros(len(pts))
    target = np.asarray(lengths, dtype=float)
    max_dev = np.zeros(len(pts))
    start = pts.copy()
    while np.any(s < target):
        h = np.minimum(step, target - s)
        h = np.where(h > 0.0, h, 0.0)
        k1 = field(pts)
        k2 = field(pts + h[:, None] / 2 * k1)
        k3 = field(pts + h[:, None] / 2 * k2)
        k4 = field(pts + h[:, None] * k3)
        pts = pts + h[:, None] / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = s + h
        max_dev = np.maximum(max_dev, np.abs(pts[:, 1] - start[:, 1]))
    return pts, max_dev


def default_seeds(grid, count=9):
    """A deterministic spread of interior chart points."""
    fracs = np.linspace(0.25, 0.75, count)
    seeds = np.empty((count, grid.ndim))
    axes = grid.axes()
    for d in range(grid.ndim):
        lo, hi = axes[d][0], axes[d][-1]
        seeds[:, d] = lo + fracs * (hi - lo)
    return seeds


def null_curve_check(result: BianchiResult, mode: str,
                     seeds=None, length: float = 1.0,
                     drift_tol: float = 1e-4, closure_tol: float = 1e-3,
                     kernel_override=None) -> NullCurveReport:
    """Integrate the kernel field at unit g-speed and test its geometry.

    mode "line": after `length` of arclength the first two chart
    coordinates must each have drifted less than drift_tol * length.
    mode "circle": the second coordinate (polar radius) must stay within
    drift_tol of its start, and after arclength 2 pi e^{-v1} v2 the curve
    must close (chart-metric endpoint distance below closure_tol).
    """
    if mode not in ("line", "circle"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = result.grid
    metric = induced_metric(result.source)
    kernel = result.kernel if kernel_override is None else kernel_override
    field = _kernel_interpolator(grid, kernel, metric)
    if seeds is None:
        seeds = default_seeds(grid)
    seeds = np.asarray(seeds, dtype=float)
    step = min(grid.spacings) / 2.0

    if mode == "line":
        try:
            ends, _ = _integrate_curves(field, seeds,
                                        np.full(len(seeds), length), step)
        except LeftDomain:
            return NullCurveReport(seeds=seeds,
                                   drift=np.full(len(seeds), np.inf),
                                   closure=None, verdict=False,
                                   left_domain=True)
        drift = np.max(np.abs(ends[:, :2] - seeds[:, :2]), axis=1) / length
        return NullCurveReport(seeds=seeds, drift=drift, closure=None,
                               verdict=bool(np.all(drift < drift_tol)))

    lengths = 2.0 * math.pi * np.exp(-seeds[:, 0]) * seeds[:, 1]
    try:
        ends, radial_dev = _integrate_curves(field, seeds, lengths, step)
    except LeftDomain:
        return NullCurveReport(seeds=seeds,
                               drift=np.full(len(seeds), np.inf),
                               closure=np.full(len(seeds), np.inf),
                               verdict=False, left_domain=True)
    # compare endpoints with the angular coordinate unwound by one turn
    shifted = ends.copy()
    shifted[:, 2] -= 2.0 * math.pi
    delta = shifted - seeds
    E = np.exp(-2.0 * seeds[:, 0])
    closure = np.sqrt(E * delta[:, 1] ** 2
                      + E * seeds[:, 1] ** 2 * delta[:, 2] ** 2
                      + delta[:, 0] ** 2)
    ok = np.all(radial_dev < drift_tol) and np.all(closure < closure_tol)
    return NullCurveReport(seeds=seeds, drift=radial_dev, closure=closure,
                           verdict=bool(ok))


# ---------------------------------------------------------------------------
# classical control surface
# ---------------------------------------------------------------------------

def beltrami_surface(grid: fc.Grid2) -> fc.ImmersionField:
    """Tractrix surface of revolution in horospherical parameters (u, v):

        x = (e^{-u} cos v, e^{-u} sin v, artanh(w) - w),  w = sqrt(1 - e^{-2u})

    with induced metric du^2 + e^{-2u} dv^2.  Requires u > 0."""
    if grid.v1_min <= 0.0:
        raise DomainViolation("tractrix parameter u must be positive")
    u, v = grid.meshes()
    w = np.sqrt(1.0 - np.exp(-2.0 * u))
    vals = np.stack([np.exp(-u) * np.cos(v),
                     np.exp(-u) * np.sin(v),
                     np.arctanh(w) - w], axis=-1)
    return fc.ImmersionField(grid, vals)
