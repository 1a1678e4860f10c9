"""Grids, sampled fields and finite-difference / linear-algebra primitives.

Fields live on rectangular lattices.  Values are stored row-major with the
axis order (v1, v2[, v3]) first and component axes trailing, so a scalar
field on a Grid2 is an (n1, n2) array and an R^5 immersion on a Grid3 is an
(n1, n2, n3, 5) array.

First derivatives use the 5-point 4th-order central stencil in the
interior.  Within two nodes of a boundary, 5-point biased stencils are
used; these are exact on polynomials of degree <= 4, which keeps
differentiation exact (to round-off) on quartics everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    AxisOutOfRange,
    GridTooSmall,
    NonFiniteEntry,
    TooFewPoints,
)

MIN_NODES = 5  # stencil width


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid2:
    """Rectangular lattice in chart coordinates (v1, v2)."""

    v1_min: float
    v1_max: float
    v2_min: float
    v2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        for lo, hi, n, name in self._axis_specs():
            if n < MIN_NODES:
                raise GridTooSmall(f"axis {name}: {n} nodes < {MIN_NODES}")
            if not hi > lo:
                raise GridTooSmall(f"axis {name}: empty range [{lo}, {hi}]")

    def _axis_specs(self):
        return [
            (self.v1_min, self.v1_max, self.n1, "v1"),
            (self.v2_min, self.v2_max, self.n2, "v2"),
        ]

    @property
    def ndim(self):
        return len(self._axis_specs())

    @property
    def shape(self):
        return tuple(n for _, _, n, _ in self._axis_specs())

    @property
    def spacings(self):
        return tuple((hi - lo) / (n - 1) for lo, hi, n, _ in self._axis_specs())

    @property
    def h1(self):
        return self.spacings[0]

    @property
    def h2(self):
        return self.spacings[1]

    def axis(self, i):
        lo, hi, n, _ = self._axis_specs()[i]
        return np.linspace(lo, hi, n)

    def axes(self):
        return tuple(self.axis(i) for i in range(self.ndim))

    def meshes(self):
        """Coordinate arrays of full grid shape, one per axis."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def node_count(self):
        return int(np.prod(self.shape))

    def interior(self, width=2):
        """Boolean mask of nodes at least `width` nodes from every face."""
        mask = np.zeros(self.shape, dtype=bool)
        sl = tuple(slice(width, n - width) for n in self.shape)
        mask[sl] = True
        return mask

    def to_dict(self):
        d = {"type": f"Grid{self.ndim}"}
        for lo, hi, n, name in self._axis_specs():
            d[f"{name}_min"] = lo
            d[f"{name}_max"] = hi
            d[f"n{name[-1]}"] = n
        return d


@dataclass(frozen=True)
class Grid3(Grid2):
    """Grid2 extended by a third chart axis v3."""

    v3_min: float = 0.0
    v3_max: float = 1.0
    n3: int = MIN_NODES

    def _axis_specs(self):
        return super()._axis_specs() + [
            (self.v3_min, self.v3_max, self.n3, "v3"),
        ]

    @property
    def h3(self):
        return self.spacings[2]


def grid_from_dict(d):
    if d["type"] == "Grid2":
        return Grid2(d["v1_min"], d["v1_max"], d["v2_min"], d["v2_max"],
                     d["n1"], d["n2"])
    if d["type"] == "Grid3":
        return Grid3(d["v1_min"], d["v1_max"], d["v2_min"], d["v2_max"],
                     d["n1"], d["n2"], d["v3_min"], d["v3_max"], d["n3"])
    raise ValueError(f"unknown grid type {d['type']!r}")


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass
class Field:
    """Sampled field: grid plus a value array with leading grid axes."""

    grid: Grid2
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        gs = self.grid.shape
        if self.values.shape[: len(gs)] != gs:
            raise ValueError(
                f"value shape {self.values.shape} does not start with grid shape {gs}")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteEntry("field contains non-finite values")

    @property
    def component_shape(self):
        return self.values.shape[self.grid.ndim:]

    def like(self, values):
        return type(self)(self.grid, values)


class ScalarField(Field):
    def __post_init__(self):
        super().__post_init__()
        if self.component_shape != ():
            raise ValueError("scalar field must have no component axes")


class VectorField(Field):
    def __post_init__(self):
        super().__post_init__()
        if len(self.component_shape) != 1:
            raise ValueError("vector field must have exactly one component axis")


class ImmersionField(VectorField):
    """Map from the grid into R^n, n in {2, 3, 5}."""

    @property
    def ambient_dim(self):
        return self.component_shape[0]


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def fd_weights(offsets, order):
    """Stencil weights for the `order`-th derivative at offset 0.

    Solves the Vandermonde moment system; the returned weights are exact
    on polynomials of degree <= len(offsets) - 1 (in units of the spacing).
    """
    offsets = np.array(offsets, dtype=float)
    m = len(offsets)
    A = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


def _boundary_offsets(order):
    # 5 nodes suffice for degree-4 exactness of d/dv; use 6 for d2/dv2 so
    # the truncation order matches the interior stencil.
    width = 5 if order == 1 else 6
    return width


def _diff_along_axis0(a, h, order):
    """Differentiate leading axis of `a`; interior central, edges biased."""
    n = a.shape[0]
    width = _boundary_offsets(order)
    if n < max(MIN_NODES, width):
        raise GridTooSmall(f"axis has {n} nodes, need {max(MIN_NODES, width)}")
    out = np.empty_like(a)

    if order == 1:
        c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    else:
        c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    acc = c[0] * a[0:n - 4]
    for k in range(1, 5):
        acc = acc + c[k] * a[k:n - 4 + k]
    out[2:n - 2] = acc

    for row in (0, 1):
        offs = tuple(np.arange(width) - row)
        w = fd_weights(offs, order)
        out[row] = np.tensordot(w, a[0:width], axes=(0, 0))
    for row in (n - 2, n - 1):
        offs = tuple(np.arange(width) - (width - (n - row)))
        w = fd_weights(offs, order)
        out[row] = np.tensordot(w, a[n - width:n], axes=(0, 0))

    return out / h ** order


def partial(f: Field, axis: int, order: int = 1) -> Field:
    """Finite-difference partial derivative of a sampled field.

    4th-order central stencil in the interior, degree-4-exact biased
    stencils in the two-node boundary bands.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if not 0 <= axis < f.grid.ndim:
        raise AxisOutOfRange(f"axis {axis} on a {f.grid.ndim}-axis grid")
    h = f.grid.spacings[axis]
    vals = np.moveaxis(f.values, axis, 0)
    dvals = _diff_along_axis0(vals, h, order)
    return f.like(np.moveaxis(dvals, 0, axis))


def diff_values(values, grid, axis, order=1):
    """As `partial`, for a bare ndarray with leading grid axes."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if not 0 <= axis < grid.ndim:
        raise AxisOutOfRange(f"axis {axis} on a {grid.ndim}-axis grid")
    h = grid.spacings[axis]
    vals = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    return np.moveaxis(_diff_along_axis0(vals, h, order), 0, axis)


def diff_line(values, h, order=1):
    """Differentiate a 1-D sample line (leading axis) with spacing h."""
    return _diff_along_axis0(np.asarray(values, dtype=float), h, order)


def jacobian(x: ImmersionField) -> np.ndarray:
    """Per-node Jacobian; shape grid.shape + (ambient_dim, grid.ndim)."""
    cols = [partial(x, i, 1).values for i in range(x.grid.ndim)]
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# rank / span analysis
# ---------------------------------------------------------------------------

DEFAULT_RANK_TAU = 1e-6


@dataclass
class RankProfile:
    """Per-node singular values and numeric ranks of a matrix field."""

    sigmas: np.ndarray      # grid.shape + (min(n, m),), non-increasing
    ranks: np.ndarray       # grid.shape, int
    tau_rel: float

    def rank_fraction(self, rank, mask=None):
        r = self.ranks if mask is None else self.ranks[mask]
        return float(np.mean(r == rank))


def rank_profile(J: np.ndarray, tau_rel: float = DEFAULT_RANK_TAU) -> RankProfile:
    """Numeric rank of each node's matrix under a relative SVD threshold."""
    if not 0.0 < tau_rel < 1.0:
        raise ValueError(f"tau_rel must be in (0, 1), got {tau_rel}")
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        raise NonFiniteEntry("matrix field contains non-finite entries")
    sig = np.linalg.svd(J, compute_uv=False)
    lead = sig[..., :1]
    ranks = np.sum(sig >= tau_rel * np.where(lead > 0.0, lead, 1.0), axis=-1)
    ranks[np.squeeze(lead, -1) == 0.0] = 0
    return RankProfile(sigmas=sig, ranks=ranks, tau_rel=tau_rel)


def affine_span_dim(points: np.ndarray, tau_rel: float = DEFAULT_RANK_TAU) -> int:
    """Dimension of the affine hull of a point cloud, by centered SVD."""
    pts = np.asarray(points, dtype=float).reshape(-1, np.shape(points)[-1])
    if pts.shape[0] < 2:
        raise TooFewPoints(f"need >= 2 points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise NonFiniteEntry("point cloud contains non-finite entries")
    centered = pts - pts.mean(axis=0)
    sig = np.linalg.svd(centered, compute_uv=False)
    if sig[0] == 0.0:
        return 0
    return int(np.sum(sig >= tau_rel * sig[0]))
