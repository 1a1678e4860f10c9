"""Lift of a base surface in R^3 to a 3-submanifold of R^5.

The lifted immersion appends an explicit trigonometric pair to the base
surface: (x_bar, e^{-v1} cos v3, e^{-v1} sin v3) for the first family and
(x_bar, (1/a) e^{-v1} v2 cos(a v3), (1/a) e^{-v1} v2 sin(a v3)) for the
second.  This module also supplies the polar <-> Cartesian chart change
on the horospheres and the closed-form reference fundamental forms used
to cross-validate the numerically computed geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator, make_interp_spline

from . import fieldcalc as fc
from .codazzi import EXAMPLE1, EXAMPLE2, BuiltSurface, CodazziSolution, SurfaceSpec
from .errors import DomainViolation, OriginSingularity, SpecMismatch

DEFAULT_V3_RANGE = (0.3, 1.1)
DEFAULT_N3 = 17


@dataclass
class LiftedSubmanifold:
    x: fc.ImmersionField      # over a Grid3 in the v-chart, values in R^5
    spec: SurfaceSpec
    base: BuiltSurface

    @property
    def grid(self) -> fc.Grid3:
        return self.x.grid


def make_lift_grid(base_grid: fc.Grid2, v3_range=DEFAULT_V3_RANGE,
                   n3: int = DEFAULT_N3) -> fc.Grid3:
    return fc.Grid3(base_grid.v1_min, base_grid.v1_max,
                    base_grid.v2_min, base_grid.v2_max,
                    base_grid.n1, base_grid.n2,
                    v3_range[0], v3_range[1], n3)


def lift(base: BuiltSurface, spec: SurfaceSpec,
         v3_range=DEFAULT_V3_RANGE, n3: int = DEFAULT_N3) -> LiftedSubmanifold:
    """Append the exact trigonometric pair to the base surface."""
    if base.spec is not spec and base.spec.to_dict() != spec.to_dict():
        raise SpecMismatch("base surface was built from a different spec")
    grid3 = make_lift_grid(spec.domain, v3_range, n3)
    v1, v2, v3 = grid3.meshes()
    vals = np.empty(grid3.shape + (5,))
    vals[..., :3] = base.x.values[:, :, None, :]
    if spec.case == EXAMPLE1:
        vals[..., 3] = np.exp(-v1) * np.cos(v3)
        vals[..., 4] = np.exp(-v1) * np.sin(v3)
    else:
        a = spec.a
        vals[..., 3] = np.exp(-v1) * v2 * np.cos(a * v3) / a
        vals[..., 4] = np.exp(-v1) * v2 * np.sin(a * v3) / a
    return LiftedSubmanifold(x=fc.ImmersionField(grid3, vals), spec=spec, base=base)


def lift_metric_reference(spec: SurfaceSpec, grid3: fc.Grid3) -> np.ndarray:
    """Closed-form first fundamental form of the lift in the v-chart."""
    v1, v2, _v3 = grid3.meshes()
    E = np.exp(-2.0 * v1)
    g = np.zeros(grid3.shape + (3, 3))
    g[..., 0, 0] = 1.0
    g[..., 1, 1] = E
    g[..., 2, 2] = E if spec.case == EXAMPLE1 else E * v2 ** 2
    return g


def normal_frame_reference(lifted: LiftedSubmanifold) -> np.ndarray:
    """Closed-form orthonormal normal frame (n1, n2); shape grid+(2, 5).

    n1 mixes the base tangents with the trigonometric directions; n2 is
    the base-surface normal padded by zeros.
    """
    spec = lifted.spec
    grid3 = lifted.grid
    base = lifted.base
    v1, v2, v3 = grid3.meshes()
    t1 = base.tangents[:, :, None, 0, :]      # d x_bar / d v1
    t2 = base.tangents[:, :, None, 1, :]      # d x_bar / d v2
    nbar = base.normal[:, :, None, :]
    out = np.zeros(grid3.shape + (2, 5))
    if spec.case == EXAMPLE1:
        E = np.exp(-2.0 * v1)
        root = np.sqrt(1.0 - E)
        out[..., 0, :3] = (np.exp(-v1) / root)[..., None] * t1
        out[..., 0, 3] = root * np.cos(v3)
        out[..., 0, 4] = root * np.sin(v3)
    else:
        a = spec.a
        D = spec.f0 - np.exp(-2.0 * v1) * v2 ** 2
        root = np.sqrt(D)
        mix = (np.exp(-v1) * v2)[..., None] * t1 - np.exp(v1)[..., None] * t2
        out[..., 0, :3] = mix / root[..., None]
        out[..., 0, 3] = root / a * np.cos(a * v3)
        out[..., 0, 4] = root / a * np.sin(a * v3)
    out[..., 1, :3] = np.broadcast_to(nbar, grid3.shape + (3,))
    return out


# ---------------------------------------------------------------------------
# closed-form reference fundamental forms
# ---------------------------------------------------------------------------

def _resample_b(sol: CodazziSolution, grid3: fc.Grid3):
    """Solved base second form broadcast along v3; (b11, b12, b22)."""
    if sol.spec.domain.shape != (grid3.n1, grid3.n2):
        raise DomainViolation("solution grid does not match the lift grid")
    b11 = sol.b11.values[:, :, None]
    b12 = sol.b12.values[:, :, None]
    b22 = sol.b22.values[:, :, None]
    return b11, b12, b22


def reference_forms(spec: SurfaceSpec, sol: CodazziSolution, grid3: fc.Grid3,
                    variant: str = "example") -> dict:
    """Closed-form {b1, b2, mu} of the lift in the v-chart.

    `variant` selects between the two equivalent published expressions:
    "example" uses the construction-side formulas, "canonical" the
    classification-side normal forms (f == 1, respectively f = f0/v2^2
    with a33 = v2^2).  The two agree algebraically; emitting both lets
    tests confirm the identification numerically.
    """
    if variant not in ("example", "canonical"):
        raise ValueError(f"unknown variant {variant!r}")
    v1, v2, _v3 = grid3.meshes()
    E = np.exp(-2.0 * v1)
    b11, b12, b22 = _resample_b(sol, grid3)

    b1 = np.zeros(grid3.shape + (3, 3))
    b2 = np.zeros(grid3.shape + (3, 3))
    mu = np.zeros(grid3.shape + (3,))
    b2[..., 0, 0] = b11
    b2[..., 0, 1] = b2[..., 1, 0] = b12
    b2[..., 1, 1] = b22

    if spec.case == EXAMPLE1:
        if variant == "example":
            root = np.sqrt(1.0 - E)
            b1_11 = np.exp(-v1) / root
            b1_22 = np.exp(-3.0 * v1) / root
            b1_33 = -np.exp(-v1) * root
            mu_coeff = np.exp(-v1) / root
        else:
            # canonical Case 1: f == 1, a33 == 1
            root = np.sqrt(np.exp(2.0 * v1) - 1.0)
            b1_11 = 1.0 / root
            b1_22 = E / root
            b1_33 = -E * root
            mu_coeff = 1.0 / root
        mu[..., 0] = mu_coeff * b11
        mu[..., 1] = mu_coeff * b12
    else:
        f0 = spec.f0
        if variant == "example":
            D = f0 - E * v2 ** 2
            root = np.sqrt(D)
            b1_11 = np.exp(-v1) * v2 / root
            b1_22 = np.exp(-3.0 * v1) * v2 / root
            b1_33 = -np.exp(-v1) * v2 * root
            mu[..., 0] = (np.exp(-v1) * v2 * b11 - np.exp(v1) * b12) / root
            mu[..., 1] = (np.exp(-v1) * v2 * b12 - np.exp(v1) * b22) / root
        else:
            # canonical Case 2: f = f0 / v2^2, a33 = v2^2
            R = np.sqrt(f0 * np.exp(2.0 * v1) - v2 ** 2)
            b1_11 = v2 / R
            b1_22 = E * v2 / R
            b1_33 = -E * v2 * R
            mu[..., 0] = (v2 * b11 - np.exp(2.0 * v1) * b12) / R
            mu[..., 1] = (v2 * b12 - np.exp(2.0 * v1) * b22) / R
    b1[..., 0, 0] = b1_11
    b1[..., 1, 1] = b1_22
    b1[..., 2, 2] = b1_33
    return {"b1": b1, "b2": b2, "mu": mu}


# ---------------------------------------------------------------------------
# polar <-> Cartesian horosphere chart
# ---------------------------------------------------------------------------

def v_to_u(v2, v3):
    """Chart map on the horospheres: (u2, u3) = (v2 cos v3, v2 sin v3)."""
    v2 = np.asarray(v2, float)
    v3 = np.asarray(v3, float)
    return v2 * np.cos(v3), v2 * np.sin(v3)


def u_to_v(u2, u3, radius_floor: float = 1e-12):
    """Inverse chart map; raises OriginSingularity near the polar origin."""
    u2 = np.asarray(u2, float)
    u3 = np.asarray(u3, float)
    r = np.hypot(u2, u3)
    if np.min(r) < radius_floor:
        raise OriginSingularity("requested points reach the polar origin")
    return r, np.arctan2(u3, u2)


def _box_inside_sector(b2_lo, b2_hi, b3_lo, b3_hi, r0, r1, t0, t1):
    """Axis-aligned box inside {r in [r0, r1], theta in [t0, t1]}?"""
    corners = np.array([[b2_lo, b3_lo], [b2_lo, b3_hi],
                        [b2_hi, b3_lo], [b2_hi, b3_hi]])
    r = np.hypot(corners[:, 0], corners[:, 1])
    th = np.arctan2(corners[:, 1], corners[:, 0])
    if np.max(r) > r1 or np.min(th) < t0 or np.max(th) > t1:
        return False
    # nearest point of the box to the origin must stay outside radius r0
    near2 = min(max(b2_lo, 0.0), b2_hi)
    near3 = min(max(b3_lo, 0.0), b3_hi)
    return math.hypot(near2, near3) >= r0


def inscribed_u_box(grid3: fc.Grid3, shrink: float = 0.98):
    """Largest centered axis-aligned box in the u-image of the v-domain.

    The v-domain maps to an annular sector; the box is grown from the
    sector's midpoint by bisection on a scale factor and then shrunk by
    a small safety margin so interpolation never extrapolates.
    """
    r0, r1 = grid3.v2_min, grid3.v2_max
    t0, t1 = grid3.v3_min, grid3.v3_max
    if r0 <= 0.0:
        raise OriginSingularity("polar radius must be positive")
    rc, tc = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
    c2, c3 = rc * math.cos(tc), rc * math.sin(tc)
    # aspect from the sector's rough extents
    half2 = 0.5 * (r1 - r0) * abs(math.cos(tc)) + 1e-3
    half3 = 0.5 * rc * (t1 - t0) * abs(math.cos(tc)) + 1e-3
    lo, hi = 0.0, 4.0
    for _ in range(60):
        s = 0.5 * (lo + hi)
        if _box_inside_sector(c2 - s * half2, c2 + s * half2,
                              c3 - s * half3, c3 + s * half3,
                              r0, r1, t0, t1):
            lo = s
        else:
            hi = s
    s = lo * shrink
    return (c2 - s * half2, c2 + s * half2, c3 - s * half3, c3 + s * half3)


def u_chart_immersion(lifted: LiftedSubmanifold, u_grid: fc.Grid3 = None,
                      n2: int = None, n3: int = None) -> fc.ImmersionField:
    """The lifted immersion resampled on a rectangular u-chart grid.

    Unlike the generic `polar_to_cartesian_chart`, this exploits the lift
    structure: the base components depend on (v1, v2) only and are
    interpolated by a one-dimensional quintic spline in v2, while the
    appended trigonometric pair is evaluated exactly at the polar radius
    and angle of each u-node.  Re-differentiating the result keeps the
    horospherical metric to well below 1e-5, which the generic tensor
    resampling does not achieve.
    """
    grid3 = lifted.grid
    if u_grid is None:
        b2_lo, b2_hi, b3_lo, b3_hi = inscribed_u_box(grid3)
        u_grid = fc.Grid3(grid3.v1_min, grid3.v1_max, b2_lo, b2_hi,
                          grid3.n1, n2 or grid3.n2, b3_lo, b3_hi,
                          n3 or grid3.n3)
    u2, u3 = np.meshgrid(u_grid.axis(1), u_grid.axis(2), indexing="ij")
    r, th = u_to_v(u2, u3)
    if np.min(r) < grid3.v2_min - 1e-12 or np.max(r) > grid3.v2_max + 1e-12:
        raise OriginSingularity("u-grid leaves the sampled polar radius range")
    base_grid = lifted.base.x.grid
    spl = make_interp_spline(base_grid.axis(1), lifted.base.x.values,
                             k=min(5, base_grid.n2 - 1), axis=1)
    xbar = spl(r.reshape(-1))                       # (n1, nu2*nu3, 3)
    xbar = np.moveaxis(xbar, 0, -2).reshape(r.shape + (base_grid.n1, 3))
    xbar = np.moveaxis(xbar, 2, 0)                  # (n1, nu2, nu3, 3)
    vals = np.empty(u_grid.shape + (5,))
    vals[..., :3] = xbar
    v1 = u_grid.meshes()[0]
    if lifted.spec.case == EXAMPLE1:
        vals[..., 3] = np.exp(-v1) * np.cos(th)[None, ...]
        vals[..., 4] = np.exp(-v1) * np.sin(th)[None, ...]
    else:
        a = lifted.spec.a
        vals[..., 3] = np.exp(-v1) * (r * np.cos(a * th))[None, ...] / a
        vals[..., 4] = np.exp(-v1) * (r * np.sin(a * th))[None, ...] / a
    return fc.ImmersionField(u_grid, vals)


def polar_to_cartesian_chart(field: fc.Field, u_grid: fc.Grid3 = None,
                             n2: int = None, n3: int = None) -> fc.Field:
    """Resample a v-chart field onto a rectangular u-chart grid.

    Components are interpolated per v1-level with a quintic tensor
    spline in (v2, v3).  Scalar and immersion components resample
    directly; tensor components would need a change-of-basis and are
    not supported here.
    """
    grid = field.grid
    if not isinstance(grid, fc.Grid3):
        raise DomainViolation("chart conversion expects a Grid3 field")
    if u_grid is None:
        b2_lo, b2_hi, b3_lo, b3_hi = inscribed_u_box(grid)
        u_grid = fc.Grid3(grid.v1_min, grid.v1_max, b2_lo, b2_hi,
                          grid.n1, n2 or grid.n2, b3_lo, b3_hi, n3 or grid.n3)
    u2, u3 = np.meshgrid(u_grid.axis(1), u_grid.axis(2), indexing="ij")
    v2q, v3q = u_to_v(u2, u3)
    if (np.min(v2q) < grid.v2_min - 1e-12 or np.max(v2q) > grid.v2_max + 1e-12
            or np.min(v3q) < grid.v3_min - 1e-12
            or np.max(v3q) > grid.v3_max + 1e-12):
        raise OriginSingularity("u-grid leaves the sampled polar sector")
    # move v1 (and component axes) to trailing positions for one interpolant
    vals = np.moveaxis(field.values, 0, -1 - len(field.component_shape))
    method = "quintic" if min(grid.n2, grid.n3) >= 6 else "cubic"
    rgi = RegularGridInterpolator((grid.axis(1), grid.axis(2)), vals,
                                  method=method)
    out = rgi(np.stack([v2q, v3q], axis=-1))     # (nu2, nu3, n1, *comp)
    out = np.moveaxis(out, 2, 0)
    return type(field)(u_grid, out)
