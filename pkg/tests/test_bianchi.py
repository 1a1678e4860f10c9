"""Bianchi transformation, kernel geometry, frames, and controls."""

import numpy as np
import pytest

import pseudosphere.bianchi as bt
import pseudosphere.fieldcalc as fc
import pseudosphere.geometry as gm
import pseudosphere.lift as lf
from pseudosphere.errors import (
    KernelVanishes,
    NoDegeneracy,
    NotHorospherical,
    RankAmbiguous,
)


def horospherical_plane(n=17):
    """Flat chart (v1, v2, v3) -> (v1, v2, v3, 0, 0): identity metric."""
    g = fc.Grid3(0.5, 1.5, 0.0, 1.0, n, n, 0.0, 1.0, n)
    v1, v2, v3 = g.meshes()
    z = np.zeros_like(v1)
    return fc.ImmersionField(g, np.stack([v1, v2, v3, z, z], axis=-1))


# ---------------------------------------------------------------------------
# the transformation and its gates
# ---------------------------------------------------------------------------

def test_not_horospherical_rejected():
    grid = fc.Grid2(0.5, 2.0, 0.0, 1.0, 65, 65)
    x = bt.beltrami_surface(grid)
    scaled = fc.ImmersionField(grid, 2.0 * x.values)
    assert bt.horospherical_error(x) < 1e-4
    with pytest.raises(NotHorospherical):
        bt.bianchi_transform(scaled)


def test_rank_ambiguous_band_rejected():
    # perturb the tractrix so the image picks up a second singular value
    # right inside the unclassifiable band [tau, 10 tau)
    grid = fc.Grid2(0.5, 2.0, 0.0, 1.0, 65, 65)
    vals = bt.beltrami_surface(grid).values.copy()
    eps = 3e-6
    vals[..., 0] += eps * grid.meshes()[1]
    x = fc.ImmersionField(grid, vals)
    assert bt.horospherical_error(x) < 1e-4
    with pytest.raises(RankAmbiguous):
        bt.bianchi_transform(x)


def test_transform_rank_and_kernel(bianchi1, bianchi2):
    for res in (bianchi1, bianchi2):
        inter = res.grid.interior()
        assert res.ranks.rank_fraction(2, inter) == 1.0
        sig = res.ranks.sigmas
        assert np.max((sig[..., 2] / sig[..., 0])[inter]) < 1e-6
        # kernel is a unit chart vector with no v1 component,
        # annihilated by the image differential
        assert np.max(np.abs(np.linalg.norm(res.kernel, axis=-1) - 1.0)) < 1e-12
        assert np.max(np.abs(res.kernel[..., 0])[inter]) < 1e-6
        J = fc.jacobian(res.image)
        Jk = np.einsum("...ai,...i->...a", J, res.kernel)
        assert np.max(np.linalg.norm(Jk, axis=-1)[inter]) < 1e-5


def test_image_flattening(bianchi1, bianchi2):
    for res in (bianchi1, bianchi2):
        inter = res.grid.interior()
        assert np.max(np.abs(res.image.values[..., 3:])) < 1e-8
        assert fc.affine_span_dim(res.image.values[inter]) <= 3


def test_image_surface_collapse(bianchi1):
    surf = bt.image_surface(bianchi1)
    grid3 = bianchi1.grid
    assert surf.grid.shape == (grid3.n1, grid3.n2)
    mid = grid3.n3 // 2
    assert np.array_equal(surf.values,
                          bianchi1.image.values[:, :, mid, :3])


def test_image_surface_rejects_varying_fiber(bianchi1):
    bad = bt.BianchiResult(
        source=bianchi1.source,
        image=fc.ImmersionField(
            bianchi1.grid,
            bianchi1.image.values
            + 1e-3 * bianchi1.grid.meshes()[2][..., None]),
        ranks=bianchi1.ranks, kernel=bianchi1.kernel)
    with pytest.raises(Exception):
        bt.image_surface(bad)


# ---------------------------------------------------------------------------
# aligned frame
# ---------------------------------------------------------------------------

def test_align_frame_recovers_rotation(lifted1):
    ref = gm.NormalFrameField(lifted1.grid, lf.normal_frame_reference(lifted1))
    aligned_ref = bt.align_frame(lifted1.x, ref)
    # identity on an already-aligned frame
    again = bt.align_frame(lifted1.x, aligned_ref)
    assert np.max(np.abs(again.normals - aligned_ref.normals)) < 1e-5
    # undo an artificial constant rotation
    theta = 0.7
    c, s = np.cos(theta), np.sin(theta)
    n1 = ref.normals[..., 0, :]
    n2 = ref.normals[..., 1, :]
    twisted = np.stack([c * n1 + s * n2, -s * n1 + c * n2], axis=-2)
    recovered = bt.align_frame(lifted1.x, gm.NormalFrameField(lifted1.grid, twisted))
    b = gm.second_forms(lifted1.x, recovered)
    inter = lifted1.grid.interior()
    assert np.max(np.abs(b.b[..., 0, 0, 1:])[inter]) < 1e-6


def test_align_frame_no_degeneracy():
    x = horospherical_plane()
    frame = gm.normal_frame(x)
    with pytest.raises(NoDegeneracy):
        bt.align_frame(x, frame)


# ---------------------------------------------------------------------------
# distributions and holonomicity
# ---------------------------------------------------------------------------

def identity_metric(grid):
    g = np.zeros(grid.shape + (3, 3))
    g[..., 0, 0] = g[..., 1, 1] = g[..., 2, 2] = 1.0
    return gm.MetricField(grid, g)


def synthetic_forms(grid, p, q):
    b = np.zeros(grid.shape + (2, 3, 3))
    b[..., 1, 0, 1] = b[..., 1, 1, 0] = p
    b[..., 1, 0, 2] = b[..., 1, 2, 0] = q
    return gm.SecondFormField(grid, b)


def test_distribution_triple_synthetic():
    grid = fc.Grid3(0.5, 1.5, 0.0, 1.0, 9, 9, 0.0, 1.0, 9)
    ones = np.ones(grid.shape)
    trip = bt.distribution_triple(synthetic_forms(grid, ones, ones),
                                  identity_metric(grid))
    r = 1.0 / np.sqrt(2.0)
    assert np.max(np.abs(trip.vector(1) - np.array([1.0, 0.0, 0.0]))) < 1e-12
    assert np.max(np.abs(trip.vector(2) - np.array([0.0, r, r]))) < 1e-12
    assert np.max(np.abs(trip.vector(3) - np.array([0.0, -r, r]))) < 1e-12
    assert trip.orthogonality_error < 1e-12


def test_distribution_triple_kernel_vanishes():
    grid = fc.Grid3(0.5, 1.5, 0.0, 1.0, 9, 9, 0.0, 1.0, 9)
    zeros = np.zeros(grid.shape)
    with pytest.raises(KernelVanishes):
        bt.distribution_triple(synthetic_forms(grid, zeros, zeros),
                               identity_metric(grid))


def test_frobenius_constant_distributions():
    grid = fc.Grid3(0.5, 1.5, 0.0, 1.0, 9, 9, 0.0, 1.0, 9)
    ones = np.ones(grid.shape)
    met = identity_metric(grid)
    trip = bt.distribution_triple(synthetic_forms(grid, ones, ones), met)
    res = bt.frobenius_residuals(trip, met)
    assert max(res.values()) < 1e-12


def test_holonomicity_verdicts():
    grid = fc.Grid3(0.5, 1.5, 0.0, 1.0, 9, 9, 0.0, 1.0, 9)
    v1 = grid.meshes()[0]
    ones = np.ones(grid.shape)
    # ratio q/p independent of v1 -> holonomic
    good = bt.holonomicity_test(synthetic_forms(grid, ones, 0.5 * ones))
    assert good.verdict and good.sup < 1e-12
    # ratio drifting with v1 -> rejected
    bad = bt.holonomicity_test(synthetic_forms(grid, ones, v1))
    assert not bad.verdict and bad.sup > 1e-2
    with pytest.raises(KernelVanishes):
        bt.holonomicity_residual(grid, np.zeros(grid.shape), np.zeros(grid.shape))


# ---------------------------------------------------------------------------
# null curves
# ---------------------------------------------------------------------------

def test_null_curves_lines(bianchi1):
    report = bt.null_curve_check(bianchi1, "line")
    assert report.verdict
    assert np.max(report.drift) < 1e-4
    assert report.closure is None and not report.left_domain


def test_null_curves_circles(bianchi2):
    report = bt.null_curve_check(bianchi2, "circle")
    assert report.verdict
    assert np.max(report.drift) < 1e-4
    assert np.max(report.closure) < 1e-3


def test_null_curves_synthetic_control(bianchi1):
    # a v1-directed field is not a null direction: trajectories drift and
    # exit the window, which is reported rather than raised
    fake = np.zeros_like(bianchi1.kernel)
    fake[..., 0] = 1.0
    report = bt.null_curve_check(bianchi1, "line", kernel_override=fake)
    assert not report.verdict
    assert report.left_domain


def test_null_curve_mode_guard(bianchi1):
    with pytest.raises(ValueError):
        bt.null_curve_check(bianchi1, "spiral")


# ---------------------------------------------------------------------------
# classical control
# ---------------------------------------------------------------------------

def test_beltrami_collapse():
    grid = fc.Grid2(0.5, 2.0, 0.0, 2.0 * np.pi, 65, 65)
    x = bt.beltrami_surface(grid)
    res = bt.bianchi_transform(x)
    assert res.ranks.rank_fraction(1) == 1.0
    assert fc.affine_span_dim(res.image.values) == 1
    with pytest.raises(Exception):
        bt.beltrami_surface(fc.Grid2(-0.5, 1.0, 0.0, 1.0, 9, 9))
