"""Intrinsic and extrinsic geometry on analytic reference immersions."""

import numpy as np
import pytest

import pseudosphere.fieldcalc as fc
import pseudosphere.geometry as gm
from pseudosphere.errors import DegenerateImmersion, SeedDegenerate


def unit_sphere(n=65):
    g = fc.Grid2(0.4, 2.6, 0.0, 1.5, n, n)
    t, p = g.meshes()
    vals = np.stack([np.sin(t) * np.cos(p),
                     np.sin(t) * np.sin(p),
                     np.cos(t)], axis=-1)
    return fc.ImmersionField(g, vals)


def flat_torus(n=33):
    g = fc.Grid2(0.0, 1.5, 0.0, 1.5, n, n)
    u, v = g.meshes()
    vals = np.stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)], axis=-1)
    return fc.ImmersionField(g, vals)


# ---------------------------------------------------------------------------
# intrinsic
# ---------------------------------------------------------------------------

def test_sphere_metric_and_curvature():
    x = unit_sphere()
    g = gm.induced_metric(x)
    t = x.grid.meshes()[0]
    assert np.max(np.abs(g.g[..., 0, 0] - 1.0)) < 1e-5
    assert np.max(np.abs(g.g[..., 1, 1] - np.sin(t) ** 2)) < 1e-5
    K = gm.riemann(g).sectional(0, 1)
    assert np.max(np.abs(K - 1.0)[x.grid.interior()]) < 5e-4


def test_sphere_shape_operator():
    x = unit_sphere()
    _, K = gm.shape_operator(x)
    assert np.max(np.abs(np.abs(K) - 1.0)[x.grid.interior()]) < 1e-4


def test_riemann_symmetries():
    x = unit_sphere(33)
    R = gm.riemann(gm.induced_metric(x)).riemann
    assert np.max(np.abs(R + R.swapaxes(-4, -3))) < 1e-12
    assert np.max(np.abs(R + R.swapaxes(-2, -1))) < 1e-12
    assert np.max(np.abs(R - np.einsum("...ijkl->...klij", R))) < 1e-12


def test_sectional_plane_matches_coordinate_plane():
    x = unit_sphere(33)
    curv = gm.riemann(gm.induced_metric(x))
    K1 = curv.sectional(0, 1)
    K2 = curv.sectional_plane(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert np.max(np.abs(K1 - K2)) < 1e-12


def test_degenerate_immersion_rejected():
    g = fc.Grid2(0.0, 1.0, 0.0, 1.0, 9, 9)
    v1, v2 = g.meshes()
    x = fc.ImmersionField(g, np.stack([v1, 1e-6 * v2, 0 * v1], axis=-1))
    with pytest.raises(DegenerateImmersion):
        gm.induced_metric(x)


# ---------------------------------------------------------------------------
# normal frames
# ---------------------------------------------------------------------------

def test_normal_frame_plane_in_r4():
    g = fc.Grid2(0.0, 1.0, 0.0, 1.0, 9, 9)
    v1, v2 = g.meshes()
    x = fc.ImmersionField(
        g, np.stack([v1, v2, 0 * v1, 0 * v1], axis=-1))
    frame = gm.normal_frame(x)
    assert frame.codim == 2
    tang, gram = gm.frame_orthonormality_error(x, frame)
    assert tang < 1e-10 and gram < 1e-10
    # the tangent seed vectors must have been skipped
    assert np.max(np.abs(np.abs(frame.normals[..., 0, 2]) - 1.0)) < 1e-10


def test_normal_frame_seed_degenerate():
    g = fc.Grid2(0.0, 1.0, 0.0, 1.0, 9, 9)
    v1, v2 = g.meshes()
    x = fc.ImmersionField(
        g, np.stack([v1, v2, 0 * v1, 0 * v1], axis=-1))
    seed = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
    with pytest.raises(SeedDegenerate):
        gm.normal_frame(x, seed=seed)


def test_torsion_of_rotating_frame():
    g = fc.Grid2(0.0, 1.0, 0.0, 1.0, 17, 17)
    u, _ = g.meshes()
    phi = 0.3 * u
    zeros = np.zeros_like(u)
    n1 = np.stack([np.cos(phi), np.sin(phi), zeros, zeros], axis=-1)
    n2 = np.stack([-np.sin(phi), np.cos(phi), zeros, zeros], axis=-1)
    frame = gm.NormalFrameField(g, np.stack([n1, n2], axis=-2))
    mu = gm.torsion(frame)
    assert np.max(np.abs(mu.mu12[..., 0] - 0.3)) < 1e-8
    assert np.max(np.abs(mu.mu12[..., 1])) < 1e-10
    assert np.max(np.abs(mu.mu(1, 2) + mu.mu(2, 1))) == 0.0
    assert np.max(np.abs(mu.mu(1, 1))) == 0.0


# ---------------------------------------------------------------------------
# integrability residuals
# ---------------------------------------------------------------------------

def test_gcr_residuals_flat_torus():
    x = flat_torus()
    g = gm.induced_metric(x)
    frame = gm.normal_frame(x)
    b = gm.second_forms(x, frame)
    mu = gm.torsion(frame)
    sup = gm.gcr_residuals(g, b, mu).sup_norms(x.grid.interior())
    assert max(sup.values()) < 1e-4


def test_gcr_residuals_detect_perturbation():
    x = flat_torus()
    g = gm.induced_metric(x)
    frame = gm.normal_frame(x)
    b = gm.second_forms(x, frame)
    mu = gm.torsion(frame)
    b.b[..., 0, 0, 1] += 0.1
    b.b[..., 0, 1, 0] += 0.1
    sup = gm.gcr_residuals(g, b, mu).sup_norms(x.grid.interior())
    assert sup["gauss"] > 1e-2
