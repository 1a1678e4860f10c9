"""Reduced Gauss-Codazzi solver and moving-frame surface reconstruction.

The base surface has a prescribed first fundamental form (one closed-form
family per example case).  Its second fundamental form (b11, b12, b22) is
found by a method-of-lines evolution in v1: v2 is discretized with the
fieldcalc stencils, (b12, b22) are advanced by classical RK4, and b11 is
pinned to the Gauss constraint

    b11 b22 - b12^2 = G(v1, v2)

by an algebraic solve (pivot on b22) after every step.  The surface itself
is then rebuilt by integrating the Gauss-Weingarten frame system along
grid lines with per-step Gram correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline

from . import fieldcalc as fc
from .errors import (
    BlowUp,
    DomainViolation,
    PathInconsistency,
    PivotLoss,
)

EXAMPLE1 = "example1"
EXAMPLE2 = "example2"

PIVOT_FLOOR = 1e-8
BLOWUP_BOUND = 1e6
V1_MIN_GUARD = 0.2     # example 1: keeps 1 - e^{-2 v1} well away from 0
CONE_MARGIN = 0.1      # example 2: margin inside v2 e^{-v1} < sqrt(a^2-1)


# ---------------------------------------------------------------------------
# surface specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSpec:
    """Selects one of the two base-surface families and its domain.

    `initial_b12` / `initial_b22` are optional callables of v2 giving the
    second-form data on the v1 = v1_min line.  By default b22 = 0.5 and
    b12 is the positive root of the Gauss constraint with b11 = 0.
    """

    case: str
    domain: fc.Grid2
    a: float = 2.0
    initial_b12: object = None
    initial_b22: object = None
    # initial b22 level; None resolves per case: 1.0 for the first family
    # (keeps b11 = (G + b12^2)/b22 gentle, which sharpens the closed-form
    # agreement), 0.5 for the second (larger levels drive b22 through zero
    # and kill the constraint pivot for small parameter values)
    c0: float = None

    def __post_init__(self):
        if self.case not in (EXAMPLE1, EXAMPLE2):
            raise DomainViolation(f"unknown case {self.case!r}")
        if self.c0 is None:
            object.__setattr__(
                self, "c0", 1.0 if self.case == EXAMPLE1 else 0.5)
        d = self.domain
        if self.case == EXAMPLE1:
            if d.v1_min < V1_MIN_GUARD:
                raise DomainViolation(
                    f"example 1 needs v1_min >= {V1_MIN_GUARD}, got {d.v1_min}")
        else:
            if not self.a > 1.0:
                raise DomainViolation(f"example 2 needs a > 1, got {self.a}")
            if d.v2_min <= 0.0:
                raise DomainViolation("example 2 needs v2 > 0 (polar radius)")
            reach = d.v2_max * math.exp(-d.v1_min)
            limit = math.sqrt(self.a ** 2 - 1.0) - CONE_MARGIN
            if reach >= limit:
                raise DomainViolation(
                    f"example 2 cone guard: v2_max e^(-v1_min) = {reach:.4f} "
                    f">= sqrt(a^2-1) - {CONE_MARGIN} = {limit:.4f}")

    @property
    def f0(self):
        return self.a ** 2 - 1.0

    # -- closed-form metric data ------------------------------------------

    def metric(self, v1, v2):
        """Prescribed 2x2 metric at (v1, v2); broadcasts."""
        v1, v2 = np.broadcast_arrays(np.asarray(v1, float), np.asarray(v2, float))
        E = np.exp(-2.0 * v1)
        g = np.empty(v1.shape + (2, 2))
        if self.case == EXAMPLE1:
            g[..., 0, 0] = 1.0 - E
            g[..., 0, 1] = g[..., 1, 0] = 0.0
            g[..., 1, 1] = E
        else:
            a2 = self.a ** 2
            g[..., 0, 0] = 1.0 - E * v2 ** 2 / a2
            g[..., 0, 1] = g[..., 1, 0] = E * v2 / a2
            g[..., 1, 1] = E * (1.0 - 1.0 / a2)
        return g

    def metric_deriv(self, v1, v2):
        """(d_1 g, d_2 g) of the prescribed metric; exact."""
        v1, v2 = np.broadcast_arrays(np.asarray(v1, float), np.asarray(v2, float))
        E = np.exp(-2.0 * v1)
        d1 = np.zeros(v1.shape + (2, 2))
        d2 = np.zeros(v1.shape + (2, 2))
        if self.case == EXAMPLE1:
            d1[..., 0, 0] = 2.0 * E
            d1[..., 1, 1] = -2.0 * E
        else:
            a2 = self.a ** 2
            d1[..., 0, 0] = 2.0 * E * v2 ** 2 / a2
            d1[..., 0, 1] = d1[..., 1, 0] = -2.0 * E * v2 / a2
            d1[..., 1, 1] = -2.0 * E * (1.0 - 1.0 / a2)
            d2[..., 0, 0] = -2.0 * E * v2 / a2
            d2[..., 0, 1] = d2[..., 1, 0] = E / a2
        return d1, d2

    def christoffel(self, v1, v2):
        """Gamma^k_ij of the prescribed metric; exact.  Shape (..., 2, 2, 2)."""
        g = self.metric(v1, v2)
        g_inv = np.linalg.inv(g)
        d1, d2 = self.metric_deriv(v1, v2)
        dg = np.stack([d1, d2], axis=-3)      # dg[..., l, i, j] = d_l g_ij
        gam = np.zeros(g.shape[:-2] + (2, 2, 2))
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    s = 0.0
                    for l in range(2):
                        s = s + g_inv[..., k, l] * (
                            dg[..., i, j, l] + dg[..., j, i, l] - dg[..., l, i, j])
                    gam[..., k, i, j] = 0.5 * s
        return gam

    def gauss_rhs(self, v1, v2):
        """G(v1, v2) with b11 b22 - b12^2 = G."""
        v1, v2 = np.broadcast_arrays(np.asarray(v1, float), np.asarray(v2, float))
        E = np.exp(-2.0 * v1)
        if self.case == EXAMPLE1:
            return -E / (1.0 - E)
        D = self.f0 - v2 ** 2 * E
        return -self.f0 * E / D

    def gauss_rhs_d1(self, v1, v2):
        """d G / d v1, exact."""
        v1, v2 = np.broadcast_arrays(np.asarray(v1, float), np.asarray(v2, float))
        E = np.exp(-2.0 * v1)
        if self.case == EXAMPLE1:
            return 2.0 * E / (1.0 - E) ** 2
        D = self.f0 - v2 ** 2 * E
        return 2.0 * E * self.f0 ** 2 / D ** 2

    def base_curvature(self, v1, v2):
        """Gauss curvature of the prescribed metric, closed form."""
        v1, v2 = np.broadcast_arrays(np.asarray(v1, float), np.asarray(v2, float))
        E = np.exp(-2.0 * v1)
        if self.case == EXAMPLE1:
            return -1.0 / (1.0 - E) ** 2
        a2 = self.a ** 2
        return -a2 * (a2 - 1.0) / (a2 - 1.0 - v2 ** 2 * E) ** 2

    def to_dict(self):
        d = {"case": self.case, "domain": self.domain.to_dict(), "c0": self.c0}
        if self.case == EXAMPLE2:
            d["a"] = self.a
            d["f0"] = self.f0
        return d


DEFAULT_DOMAINS = {
    EXAMPLE1: (1.0, 2.0, 0.0, 1.0),
    EXAMPLE2: (1.0, 1.5, 0.5, 2.0),
}


def default_spec(case: str, a: float = 2.0,
                 n1: int = 129, n2: int = 129) -> SurfaceSpec:
    """Shipped default domain for either case."""
    if case not in DEFAULT_DOMAINS:
        raise DomainViolation(f"unknown case {case!r}")
    lo1, hi1, lo2, hi2 = DEFAULT_DOMAINS[case]
    if case == EXAMPLE2:
        if not a > 1.0:
            raise DomainViolation(f"example 2 needs a > 1, got {a}")
        # keep the window at no more than half the cone radius; nearer the
        # cone the reduced system focuses into a genuine blow-up
        cone = math.sqrt(a ** 2 - 1.0) * math.exp(lo1)
        hi2 = min(hi2, 0.5 * cone)
        if hi2 <= lo2:
            raise DomainViolation(
                f"parameter a = {a} leaves no room between v2 = {lo2} "
                f"and half the cone radius {0.5 * cone:.4f}")
    return SurfaceSpec(case, fc.Grid2(lo1, hi1, lo2, hi2, n1, n2), a=a)


def prescribed_metric(spec: SurfaceSpec):
    """Prescribed metric sampled over the spec's grid."""
    from .geometry import MetricField
    v1, v2 = spec.domain.meshes()
    return MetricField(spec.domain, spec.metric(v1, v2))


# ---------------------------------------------------------------------------
# reduced Codazzi evolution
# ---------------------------------------------------------------------------

@dataclass
class CodazziSolution:
    spec: SurfaceSpec
    b11: fc.ScalarField
    b12: fc.ScalarField
    b22: fc.ScalarField
    gauss_residual: fc.ScalarField    # pre-projection constraint drift

    def min_abs_b12(self):
        return float(np.min(np.abs(self.b12.values)))

    def min_abs_b22(self):
        return float(np.min(np.abs(self.b22.values)))


def _solver_diff(a, h):
    """v2 derivative used inside the evolution: 4th-order upwind-biased.

    Written as d_1 U = A d_2 U, the reduced system has A-eigenvalues
    (b12 +/- sqrt(-G)) / b22 >= 0 for the shipped data, so characteristics
    run toward smaller v2 as v1 grows and the upwind side is +v2.  The
    5-point stencil biased one node upwind (offsets -1..3) is degree-4
    exact and spectrally stable under RK4.  The bottom row slides the
    window (still degree-4); the top three rows are an inflow boundary
    with no data, so they drop to damped low-order stencils -- the
    determinacy pad (see `_padded_axis`) keeps their influence away from
    the requested window.
    """
    n = a.shape[0]
    out = np.empty_like(a)
    # interior rows 1 .. n-4: offsets (-1, 0, 1, 2, 3)
    c = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    acc = c[0] * a[0:n - 4]
    for k in range(1, 5):
        acc = acc + c[k] * a[k:n - 4 + k]
    out[1:n - 3] = acc
    w0 = fc.fd_weights((0, 1, 2, 3, 4), 1)
    out[0] = np.tensordot(w0, a[0:5], axes=(0, 0))
    out[n - 3] = (a[n - 2] - a[n - 4]) / 2.0
    out[n - 2] = (a[n - 1] - a[n - 3]) / 2.0
    out[n - 1] = 1.5 * a[n - 1] - 2.0 * a[n - 2] + 0.5 * a[n - 3]
    return out / h


def _codazzi_rates(spec, v1, v2, b12, b22, h2):
    """(db12, db22, b11) of the reduced system at level v1."""
    G = spec.gauss_rhs(v1, v2)
    if np.min(np.abs(b22)) < PIVOT_FLOOR:
        raise PivotLoss(
            f"|b22| fell below {PIVOT_FLOOR:g} at v1 = {v1:.6f}")
    b11 = (G + b12 ** 2) / b22
    d2_b11 = _solver_diff(b11, h2)
    d2_b12 = _solver_diff(b12, h2)
    E = math.exp(-2.0 * v1)
    if spec.case == EXAMPLE1:
        coeff = 1.0 / (1.0 - E)
        db12 = d2_b11 + coeff * b12
        db22 = d2_b12 - coeff * E * b11 - b22
    else:
        f0 = spec.f0
        D = f0 - v2 ** 2 * E
        db12 = d2_b11 + (f0 * b12 - v2 * b22) / D
        db22 = d2_b12 - E * (f0 * b11 - v2 * b12) / D - b22
    return db12, db22, b11


def _char_speed(spec, v1, v2, b12, b22):
    """Largest characteristic speed of the linearized evolution."""
    G = spec.gauss_rhs(v1, v2)
    root = np.sqrt(np.maximum(-G, 0.0))
    return float(np.max((np.abs(b12) + root) / np.abs(b22)))


CONE_PAD_CLAMP = 0.65  # padded axis stays within this fraction of the cone


def _padded_axis(spec, pad_scale):
    """v2 sample axis extended beyond the requested window.

    Characteristics of the v1-evolution travel toward smaller v2 with
    speed lambda = (b12 + sqrt(-G)) / b22, so every node's domain of
    dependence reaches *upward* from the initial line.  Padding the axis
    above the window by about the swept width (pad_scale times the
    v1-span covers the shipped data comfortably) makes the kept window
    depend only on genuine initial data, never on the artificial inflow
    closure at the padded top edge.  A small lower pad keeps the window
    off the one-sided bottom row.

    For example 2 the padded edges are clamped to 65% of the cone radius
    sqrt(a^2-1) e^{v1_min}: the reduced system focuses violently near the
    cone and padding into that region triggers a genuine blow-up.
    """
    grid = spec.domain
    h2 = grid.h2
    span1 = grid.v1_max - grid.v1_min
    pad_hi = math.ceil(pad_scale * span1 / h2)
    pad_lo = math.ceil(0.25 * span1 / h2)
    if spec.case == EXAMPLE2:
        limit = CONE_PAD_CLAMP * math.sqrt(spec.f0) * math.exp(grid.v1_min)
        pad_hi = min(pad_hi, max(0, math.floor((limit - grid.v2_max) / h2)))
        pad_lo = min(pad_lo, max(0, math.floor((grid.v2_min + limit) / h2)))
    v2 = grid.v2_min + h2 * np.arange(-pad_lo, grid.n2 + pad_hi)
    return v2, pad_lo


def default_initial_data(spec: SurfaceSpec):
    """Shipped defaults: b11 = 0 on the initial line, b22 = c0, b12 the
    positive Gauss-constraint root."""
    v2 = spec.domain.axis(1)
    b22 = np.full_like(v2, spec.c0)
    G = spec.gauss_rhs(spec.domain.v1_min, v2)
    b12 = np.sqrt(-G)
    return b12, b22


def solve_codazzi(spec: SurfaceSpec, cfl: float = 1.0,
                  pad_scale: float = 2.2) -> CodazziSolution:
    """Method-of-lines solve of the reduced Gauss-Codazzi system.

    RK4 in v1 with internal substeps capped at h2/4 and at the advective
    stability limit; b11 re-solved from the Gauss constraint after every
    stored step (the pre-projection drift is recorded).  The v2 axis is
    padded during the solve (see `_padded_axis`); initial-data callables
    are evaluated on the padded axis.
    """
    grid = spec.domain
    v1_axis = grid.axis(0)
    v2, pad_lo = _padded_axis(spec, pad_scale)
    keep = slice(pad_lo, pad_lo + grid.n2)
    h1, h2 = grid.h1, grid.h2

    if spec.initial_b12 is not None:
        b12 = np.asarray(spec.initial_b12(v2), dtype=float)
    else:
        b12 = np.sqrt(-spec.gauss_rhs(grid.v1_min, v2))
    if spec.initial_b22 is not None:
        b22 = np.asarray(spec.initial_b22(v2), dtype=float)
    else:
        b22 = np.full_like(v2, spec.c0)
    if np.min(np.abs(b12)) == 0.0:
        raise DomainViolation("initial b12 must be non-vanishing")
    if np.min(np.abs(b22)) < PIVOT_FLOOR:
        raise PivotLoss("initial b22 violates the constraint pivot")

    n1, n2 = grid.shape
    B11 = np.empty((n1, n2))
    B12 = np.empty((n1, n2))
    B22 = np.empty((n1, n2))
    DRIFT = np.zeros((n1, n2))

    G0 = spec.gauss_rhs(v1_axis[0], v2)
    b11 = (G0 + b12 ** 2) / b22
    B12[0], B22[0], B11[0] = b12[keep], b22[keep], b11[keep]

    # b11 is carried through the stages via the differentiated constraint so
    # the recorded drift measures genuine integration error.

    def rhs(v1, state):
        b12, b22, b11_c = state
        db12, db22, b11_alg = _codazzi_rates(spec, v1, v2, b12, b22, h2)
        dG = spec.gauss_rhs_d1(v1, v2)
        db11 = (dG + 2.0 * b12 * db12 - b11_c * db22) / b22
        return np.stack([db12, db22, db11])

    for lev in range(n1 - 1):
        v1 = v1_axis[lev]
        speed = _char_speed(spec, v1, v2, b12, b22)
        # RK4 with the upwind-biased stencil is stable to CFL ~ 1; run at 0.8
        h_stab = 0.8 * h2 / max(speed, 1e-12)
        h_target = min(h2 / 4.0, cfl * h_stab)
        k = max(1, math.ceil(h1 / h_target))
        h = h1 / k
        state = np.stack([b12, b22, b11])
        t = v1
        for _ in range(k):
            k1 = rhs(t, state)
            k2 = rhs(t + h / 2, state + h / 2 * k1)
            k3 = rhs(t + h / 2, state + h / 2 * k2)
            k4 = rhs(t + h, state + h * k3)
            state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
            if np.max(np.abs(state)) > BLOWUP_BOUND:
                raise BlowUp(f"fields exceeded {BLOWUP_BOUND:g} at v1 = {t:.4f}")
        b12, b22, b11 = state
        v1_next = v1_axis[lev + 1]
        G = spec.gauss_rhs(v1_next, v2)
        DRIFT[lev + 1] = (b11 * b22 - b12 ** 2 - G)[keep]
        if np.min(np.abs(b22[keep])) < PIVOT_FLOOR:
            raise PivotLoss(f"|b22| fell below {PIVOT_FLOOR:g} at v1 = {v1_next:.6f}")
        b11 = (G + b12 ** 2) / b22           # projection
        B12[lev + 1], B22[lev + 1], B11[lev + 1] = b12[keep], b22[keep], b11[keep]

    return CodazziSolution(
        spec=spec,
        b11=fc.ScalarField(grid, B11),
        b12=fc.ScalarField(grid, B12),
        b22=fc.ScalarField(grid, B22),
        gauss_residual=fc.ScalarField(grid, DRIFT),
    )


def reduced_residuals(sol: CodazziSolution):
    """Independent finite-difference residuals of the three reduced
    equations on the stored solution fields."""
    spec = sol.spec
    grid = spec.domain
    v1, v2 = grid.meshes()
    b11, b12, b22 = sol.b11.values, sol.b12.values, sol.b22.values
    E = np.exp(-2.0 * v1)
    r1 = b11 * b22 - b12 ** 2 - spec.gauss_rhs(v1, v2)
    d1_b12 = fc.diff_values(b12, grid, 0)
    d1_b22 = fc.diff_values(b22, grid, 0)
    d2_b11 = fc.diff_values(b11, grid, 1)
    d2_b12 = fc.diff_values(b12, grid, 1)
    if spec.case == EXAMPLE1:
        coeff = 1.0 / (1.0 - E)
        r2 = d2_b11 - d1_b12 + coeff * b12
        r3 = d2_b12 - d1_b22 - coeff * E * b11 - b22
    else:
        f0 = spec.f0
        D = f0 - v2 ** 2 * E
        r2 = d2_b11 - d1_b12 + (f0 * b12 - v2 * b22) / D
        r3 = d2_b12 - d1_b22 - E * (f0 * b11 - v2 * b12) / D - b22
    return {"gauss": r1, "codazzi_1": r2, "codazzi_2": r3}


# ---------------------------------------------------------------------------
# moving-frame surface reconstruction
# ---------------------------------------------------------------------------

@dataclass
class BuiltSurface:
    spec: SurfaceSpec
    solution: CodazziSolution
    x: fc.ImmersionField               # the surface in R^3
    tangents: np.ndarray               # grid.shape + (2, 3)
    normal: np.ndarray                 # grid.shape + (3,)
    metric_residual: float
    codazzi_residual: float
    path_deviation: float


def _gram_target(spec, v1, v2):
    """Target Gram matrix of (e1, e2, n) at (v1, v2)."""
    g = spec.metric(v1, v2)
    G = np.zeros(np.shape(g)[:-2] + (3, 3))
    G[..., :2, :2] = g
    G[..., 2, 2] = 1.0
    return G


def _gram_correct(F, G_target):
    """Nearest frame with Gram matrix G_target: F <- F A^{-1/2} G^{1/2}."""
    A = np.einsum("...ka,...kb->...ab", F, F)

    def sym_pow(M, p):
        w, V = np.linalg.eigh(M)
        return np.einsum("...ab,...b,...cb->...ac", V, w ** p, V)

    T = np.einsum("...ab,...bc->...ac", sym_pow(A, -0.5), sym_pow(G_target, 0.5))
    return np.einsum("...ka,...ab->...kb", F, T)


def _frame_rate(spec, sol_interp, direction, v1, v2, state):
    """Gauss-Weingarten rate along one chart direction.

    state[..., 0, :] = x, state[..., 1:3, :] = (e1, e2), state[..., 3, :] = n.
    """
    gam = spec.christoffel(v1, v2)            # (..., 2, 2, 2)
    g_inv = np.linalg.inv(spec.metric(v1, v2))
    b = sol_interp(v1, v2)                    # (..., 2, 2)
    e = state[..., 1:3, :]
    n = state[..., 3, :]
    i = direction
    dx = e[..., i, :]
    de = (np.einsum("...kj,...kc->...jc", gam[..., :, i, :], e)
          + b[..., i, :, None] * n[..., None, :])
    dn = -np.einsum("...j,...jk,...kc->...c", b[..., i, :], g_inv, e)
    out = np.empty_like(state)
    out[..., 0, :] = dx
    out[..., 1:3, :] = de
    out[..., 3, :] = dn
    return out


def _rk4_path(spec, sol_interp, direction, coords, fixed, state, renorm_every=1):
    """Integrate the frame system along one chart axis.

    `coords` are the moving-axis sample values, `fixed` the frozen value of
    the other axis (scalar or per-column array).  Returns states at every
    sample, stacked on a new leading axis.
    """
    states = [state]
    for k in range(len(coords) - 1):
        t0, t1 = coords[k], coords[k + 1]
        h = t1 - t0

        def f(t, s):
            if direction == 0:
                return _frame_rate(spec, sol_interp, 0, t, fixed, s)
            return _frame_rate(spec, sol_interp, 1, fixed, t, s)

        k1 = f(t0, state)
        k2 = f(t0 + h / 2, state + h / 2 * k1)
        k3 = f(t0 + h / 2, state + h / 2 * k2)
        k4 = f(t1, state + h * k3)
        state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % renorm_every == 0:
            if direction == 0:
                Gt = _gram_target(spec, t1, fixed)
            else:
                Gt = _gram_target(spec, fixed, t1)
            frame = _gram_correct(state[..., 1:4, :].swapaxes(-1, -2), Gt)
            state = state.copy()
            state[..., 1:4, :] = frame.swapaxes(-1, -2)
        states.append(state)
    return np.stack(states, axis=0)


def _initial_state(spec):
    """Frame at the (v1_min, v2_min) corner adapted to the metric."""
    g = spec.metric(spec.domain.v1_min, spec.domain.v2_min)
    e1 = np.array([math.sqrt(g[0, 0]), 0.0, 0.0])
    e2 = np.array([g[0, 1] / math.sqrt(g[0, 0]),
                   math.sqrt(g[1, 1] - g[0, 1] ** 2 / g[0, 0]), 0.0])
    n = np.array([0.0, 0.0, 1.0])
    state = np.zeros((4, 3))
    state[1], state[2], state[3] = e1, e2, n
    return state


def _pack_b(comp):
    out = np.empty(np.shape(comp)[:-1] + (2, 2))
    out[..., 0, 0] = comp[..., 0]
    out[..., 0, 1] = out[..., 1, 0] = comp[..., 1]
    out[..., 1, 1] = comp[..., 2]
    return out


def _b_interpolator(sol: CodazziSolution):
    """b at (v1, full v2 axis): quintic spline of the columns in v1."""
    grid = sol.spec.domain
    b = np.stack([sol.b11.values, sol.b12.values, sol.b22.values], axis=-1)
    spl_v1 = make_interp_spline(grid.axis(0), b, k=min(5, grid.n1 - 1), axis=0)

    def interp(v1, v2):
        return _pack_b(spl_v1(float(np.asarray(v1, float))))

    return interp


def integrate_frame(spec: SurfaceSpec, sol: CodazziSolution,
                    path_tol: float = 1e-3) -> BuiltSurface:
    """Reconstruct the base surface from the prescribed metric and the
    solved second form by Gauss-Weingarten integration along grid lines.

    The frame is integrated along the v2 = v2_min edge first and then up
    every v1 line (all columns in one batched sweep); the transposed order
    is integrated as well and used as a path-independence check.
    """
    grid = spec.domain
    v1_axis, v2_axis = grid.axis(0), grid.axis(1)
    interp = _b_interpolator(sol)

    corner = _initial_state(spec)

    def sweep(first_axis):
        if first_axis == 1:
            # along v2 at v1_min, then along v1 for every column
            edge = _rk4_path(spec, _edge_interp(sol, axis=1), 1,
                             v2_axis, grid.v1_min, corner)
            cols = _rk4_path(spec, interp, 0, v1_axis, v2_axis, edge)
            return cols                       # (n1, n2, 4, 3)
        edge = _rk4_path(spec, _edge_interp(sol, axis=0), 0,
                         v1_axis, grid.v2_min, corner)
        rows = _rk4_path(spec, _row_interp(sol), 1, v2_axis, v1_axis, edge)
        return rows.swapaxes(0, 1)            # (n1, n2, 4, 3)

    states = sweep(first_axis=1)
    states_t = sweep(first_axis=0)
    path_dev = float(np.max(np.linalg.norm(
        states[..., 0, :] - states_t[..., 0, :], axis=-1)))
    if path_dev > path_tol:
        raise PathInconsistency(
            f"path orders differ by {path_dev:.3e} > {path_tol:g}")

    x = fc.ImmersionField(grid, states[..., 0, :])
    tangents = states[..., 1:3, :]
    normal = states[..., 3, :]

    from .geometry import induced_metric
    g_num = induced_metric(x).g
    g_ref = spec.metric(*grid.meshes())
    inter = grid.interior()
    metric_residual = float(np.max(np.abs(g_num - g_ref)[inter]))
    red = reduced_residuals(sol)
    codazzi_residual = float(max(np.max(np.abs(r[inter])) for r in red.values()))

    return BuiltSurface(
        spec=spec, solution=sol, x=x, tangents=tangents, normal=normal,
        metric_residual=metric_residual, codazzi_residual=codazzi_residual,
        path_deviation=path_dev,
    )


def _edge_interp(sol, axis):
    """Interpolator of b along one boundary edge (other axis frozen)."""
    grid = sol.spec.domain
    b = np.stack([sol.b11.values, sol.b12.values, sol.b22.values], axis=-1)
    if axis == 1:
        line, ax = b[0], grid.axis(1)
    else:
        line, ax = b[:, 0], grid.axis(0)
    k = min(5, len(ax) - 1)
    spl = make_interp_spline(ax, line, k=k, axis=0)

    def interp(v1, v2):
        t = v2 if axis == 1 else v1
        return _pack_b(spl(np.asarray(t, float)))

    return interp


def _row_interp(sol):
    """Interpolator in v2, batched over all v1 rows."""
    grid = sol.spec.domain
    b = np.stack([sol.b11.values, sol.b12.values, sol.b22.values], axis=-1)
    k = min(5, grid.n2 - 1)
    spl = make_interp_spline(grid.axis(1), b, k=k, axis=1)

    def interp(v1, v2):
        return _pack_b(spl(float(np.asarray(v2, float))))   # (n1, 2, 2)

    return interp


def build_surface(spec: SurfaceSpec) -> BuiltSurface:
    """Convenience: solve the reduced system and reconstruct the surface."""
    return integrate_frame(spec, solve_codazzi(spec))
