"""Lift to R^5, closed-form references, and the horosphere chart change."""

import numpy as np
import pytest

import pseudosphere.codazzi as cz
import pseudosphere.fieldcalc as fc
import pseudosphere.geometry as gm
import pseudosphere.lift as lf
from pseudosphere.errors import OriginSingularity, SpecMismatch


# ---------------------------------------------------------------------------
# lift structure
# ---------------------------------------------------------------------------

def test_lift_metric_closed_form(surf1, surf2):
    # the 1e-6 agreement needs n3 = 33: the angular truncation error scales
    # like (a h3)^4 and the default n3 = 17 leaves a few 1e-6 on family 2
    for surf in (surf1, surf2):
        lifted = lf.lift(surf, surf.spec, n3=33)
        g = gm.induced_metric(lifted.x).g
        ref = lf.lift_metric_reference(surf.spec, lifted.grid)
        err = np.max(np.abs(g - ref)[lifted.grid.interior()])
        assert err < 1e-6


def test_lift_base_constant_along_fiber(lifted1, lifted2):
    for lifted in (lifted1, lifted2):
        spread = np.max(np.ptp(lifted.x.values[..., :3], axis=2))
        assert spread < 1e-10


def test_lift_spec_mismatch(surf1_small, spec2_small):
    with pytest.raises(SpecMismatch):
        lf.lift(surf1_small, spec2_small)


def test_lift_flat_base_is_not_pseudospherical(spec1_small, surf1_small):
    # negative control: replacing the base by a flat strip must destroy the
    # constant -1 sectional curvature of the lift
    grid = spec1_small.domain
    v1, v2 = grid.meshes()
    plane = fc.ImmersionField(grid, np.stack([v1, v2, 0 * v1], axis=-1))
    fake = cz.BuiltSurface(
        spec=spec1_small, solution=surf1_small.solution, x=plane,
        tangents=surf1_small.tangents, normal=surf1_small.normal,
        metric_residual=0.0, codazzi_residual=0.0, path_deviation=0.0)
    lifted = lf.lift(fake, spec1_small)
    K = gm.riemann(gm.induced_metric(lifted.x)).sectional(0, 1)
    assert np.max(np.abs(K + 1.0)[lifted.grid.interior()]) > 0.5


# ---------------------------------------------------------------------------
# closed-form reference forms
# ---------------------------------------------------------------------------

def test_variant_identity(surf1_small, surf2_small):
    for surf in (surf1_small, surf2_small):
        grid3 = lf.make_lift_grid(surf.spec.domain, n3=5)
        ex = lf.reference_forms(surf.spec, surf.solution, grid3, "example")
        ca = lf.reference_forms(surf.spec, surf.solution, grid3, "canonical")
        for k in ("b1", "b2", "mu"):
            assert np.max(np.abs(ex[k] - ca[k])) < 1e-10
    with pytest.raises(ValueError):
        lf.reference_forms(surf.spec, surf.solution, grid3, "other")


def test_reference_form_structure(surf1_small, surf2_small):
    for surf, a33 in ((surf1_small, None), (surf2_small, None)):
        grid3 = lf.make_lift_grid(surf.spec.domain, n3=5)
        ref = lf.reference_forms(surf.spec, surf.solution, grid3, "canonical")
        b1 = ref["b1"]
        # b1 diagonal; third torsion component identically zero
        off = b1 - b1 * np.eye(3)
        assert np.max(np.abs(off)) == 0.0
        assert np.max(np.abs(ref["mu"][..., 2])) == 0.0
        # determinant identity of the degenerate direction:
        # b1_11 * b1_33 = -E * a33 with a33 = 1 resp. v2^2
        v1, v2, _ = grid3.meshes()
        E = np.exp(-2.0 * v1)
        a33_vals = np.ones_like(v2) if surf.spec.case == cz.EXAMPLE1 else v2 ** 2
        prod = b1[..., 0, 0] * b1[..., 2, 2]
        assert np.max(np.abs(prod + E * a33_vals)) < 1e-12
        # b2 embeds the solved base second form
        assert np.max(np.abs(ref["b2"][..., 0, 0]
                             - surf.solution.b11.values[:, :, None])) == 0.0
        assert np.max(np.abs(ref["b2"][..., 2, 2])) == 0.0


def test_normal_frame_reference_orthonormal(lifted1, lifted2):
    for lifted in (lifted1, lifted2):
        frame = gm.NormalFrameField(lifted.grid, lf.normal_frame_reference(lifted))
        tang, gram = gm.frame_orthonormality_error(lifted.x, frame)
        assert tang < 5e-4 and gram < 5e-4


# ---------------------------------------------------------------------------
# polar <-> Cartesian chart
# ---------------------------------------------------------------------------

def test_chart_maps_round_trip():
    u2, u3 = lf.v_to_u(1.0, 0.0)
    assert u2 == pytest.approx(1.0) and u3 == pytest.approx(0.0)
    rng = np.random.default_rng(1)
    v2 = 0.5 + rng.random(20)
    v3 = 0.2 + rng.random(20)
    r, th = lf.u_to_v(*lf.v_to_u(v2, v3))
    assert np.max(np.abs(r - v2)) < 1e-12
    assert np.max(np.abs(th - v3)) < 1e-12
    with pytest.raises(OriginSingularity):
        lf.u_to_v(0.0, 0.0)


def test_inscribed_u_box_inside_sector():
    grid3 = fc.Grid3(1.0, 1.5, 0.5, 1.2, 9, 9, 0.3, 1.1, 9)
    b2_lo, b2_hi, b3_lo, b3_hi = lf.inscribed_u_box(grid3)
    corners = np.array([[b2_lo, b3_lo], [b2_lo, b3_hi],
                        [b2_hi, b3_lo], [b2_hi, b3_hi]])
    r = np.hypot(corners[:, 0], corners[:, 1])
    th = np.arctan2(corners[:, 1], corners[:, 0])
    assert np.all(r >= 0.5) and np.all(r <= 1.2)
    assert np.all(th >= 0.3) and np.all(th <= 1.1)
    with pytest.raises(OriginSingularity):
        lf.inscribed_u_box(fc.Grid3(1.0, 1.5, 0.0, 1.0, 9, 9, 0.3, 1.1, 9))


def test_polar_to_cartesian_chart_scalar():
    grid3 = fc.Grid3(1.0, 1.5, 0.5, 1.2, 9, 65, 0.3, 1.1, 65)
    _, v2, v3 = grid3.meshes()
    f = fc.ScalarField(grid3, v2 ** 2 * np.sin(v3))
    out = lf.polar_to_cartesian_chart(f)
    u2, u3 = np.meshgrid(out.grid.axis(1), out.grid.axis(2), indexing="ij")
    r, th = lf.u_to_v(u2, u3)
    expect = (r ** 2 * np.sin(th))[None, :, :]
    assert np.max(np.abs(out.values - expect)) < 1e-4


def test_u_chart_immersion_horospherical(lifted2):
    from pseudosphere.bianchi import horospherical_error
    xu = lf.u_chart_immersion(lifted2)
    assert horospherical_error(xu) < 1e-4


def test_u_chart_rejects_external_grid(lifted2):
    grid3 = lifted2.grid
    bad = fc.Grid3(grid3.v1_min, grid3.v1_max, 0.01, 0.05,
                   9, 9, 0.01, 0.05, 9)
    with pytest.raises(OriginSingularity):
        lf.u_chart_immersion(lifted2, u_grid=bad)
