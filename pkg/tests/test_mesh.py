"""Surface meshes and graph geodesics.

Frozen values were measured once on this construction and are deterministic:
the plane diagonal between (t,0,0) and (0,t,0) at t = 2^-6, resolution t/32,
came out 0.022108936 against the exact sqrt(2)*t = 0.022097087 (+0.054%),
and halving the resolution moved it by -0.021%.

Every graph path is a polyline of straight segments from x to y, so the
reported distance can never drop below the Euclidean one.  On germs with
several sheets the opposite failure mode exists by construction: gluing
within half a resolution shortcuts regions where sheets nearly touch, so
cusp and horn values sit a bounded factor below the true inner distance.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from arcmetric import MeshError, builtin, inner_distance_numeric, mesh_at_scale

F = Fraction


def plane_diag(t, div):
    mesh = mesh_at_scale(builtin("plane"), t, t / div)
    return mesh.distance(np.array([t, 0.0, 0.0]), np.array([0.0, t, 0.0]))


# -- plane oracle ---------------------------------------------------------------

def test_plane_diagonal_frozen_value():
    assert plane_diag(2.0**-6, 32) == pytest.approx(0.022108936, rel=1e-6)

def test_plane_diagonal_tracks_euclidean_across_scales():
    for k in (4, 7, 10):
        t = 2.0**-k
        d = plane_diag(t, 32)
        assert abs(d / (math.sqrt(2.0) * t) - 1.0) < 0.005

def test_plane_halving_resolution_is_stable():
    t = 2.0**-6
    d32, d64 = plane_diag(t, 32), plane_diag(t, 64)
    assert abs(d64 / d32 - 1.0) < 0.01

def test_plane_interior_pair_stays_in_octagonal_band():
    # Grid edges run at multiples of 45 degrees, so a skew segment picks up
    # at most the octagonal-norm factor 1/cos(pi/8) ~ 1.0824 over Euclidean.
    t = 2.0**-5
    mesh = mesh_at_scale(builtin("plane"), t, t / 32)
    x = np.array([t, t / 2, 0.0])
    y = np.array([-t / 2, t / 4, 0.0])
    d = mesh.distance(x, y)
    straight = float(np.linalg.norm(x - y))
    assert straight - 1e-12 <= d <= 1.085 * straight


# -- path-length invariants -------------------------------------------------------

def test_distance_never_beats_euclidean():
    for germ, mk in [
        (builtin("plane"), lambda t: (np.array([t, 0, 0.0]), np.array([0, t, 0.0]))),
        (builtin("cusp", 3, 2),
         lambda t: (np.array([t**1.5, t]), np.array([-(t**1.5), t]))),
        (builtin("horn", F(2)),
         lambda t: (np.array([t**2, 0.0, t]), np.array([-(t**2), 0.0, t]))),
    ]:
        t = 2.0**-5
        mesh = mesh_at_scale(germ, t, t / 32)
        x, y = mk(t)
        assert mesh.distance(x, y) >= float(np.linalg.norm(x - y)) - 1e-12

def test_distance_is_symmetric_and_zero_on_self():
    t = 2.0**-5
    mesh = mesh_at_scale(builtin("cusp", 3, 2), t, t / 32)
    x = np.array([t**1.5, t])
    y = np.array([-(t**1.5), t])
    assert mesh.distance(x, y) == pytest.approx(mesh.distance(y, x), rel=1e-12)
    assert mesh.distance(x, x) == 0.0


# -- singular germs ---------------------------------------------------------------

def test_cusp_branches_are_connected_through_the_origin():
    t = 2.0**-4
    mesh = mesh_at_scale(builtin("cusp", 3, 2), t, t / 32)
    a = np.array([t**1.5, t])
    b = np.array([-(t**1.5), t])
    d = mesh.distance(a, b)
    through = float(np.linalg.norm(a) + np.linalg.norm(b))
    # Well above the chord, at most the through-origin polyline.
    assert float(np.linalg.norm(a - b)) < d <= 1.05 * through
    assert d > 3.0 * float(np.linalg.norm(a - b))

def test_horn_ring_distance_band():
    t = 2.0**-4
    mesh = mesh_at_scale(builtin("horn", F(2)), t, t / 32)
    a = np.array([t**2, 0.0, t])
    b = np.array([-(t**2), 0.0, t])
    d = mesh.distance(a, b)
    half_ring = math.pi * t**2
    assert float(np.linalg.norm(a - b)) <= d <= 1.05 * half_ring
    # The flat route around the ring is far shorter than dipping to the tip.
    assert d < 0.5 * (2.0 * t)


# -- construction and caching ------------------------------------------------------

def test_scale_validation():
    plane = builtin("plane")
    with pytest.raises(ValueError, match="outside"):
        mesh_at_scale(plane, 0.6, 0.01)  # radius is 1/2
    with pytest.raises(ValueError, match="outside"):
        mesh_at_scale(plane, 0.0, 0.001)
    with pytest.raises(ValueError, match="resolution"):
        mesh_at_scale(plane, 0.1, 0.1)  # needs resolution <= t/8
    with pytest.raises(ValueError, match="resolution"):
        mesh_at_scale(plane, 0.1, -0.001)

def test_far_point_is_rejected():
    t = 2.0**-5
    mesh = mesh_at_scale(builtin("plane"), t, t / 32)
    with pytest.raises(MeshError, match="from the mesh"):
        mesh.distance(np.array([t, 0.0, 0.3]), np.array([0.0, t, 0.0]))

def test_meshes_are_cached_per_germ():
    germ = builtin("plane")
    t = 2.0**-5
    assert mesh_at_scale(germ, t, t / 32) is mesh_at_scale(germ, t, t / 32)
    assert mesh_at_scale(germ, t, t / 32) is not mesh_at_scale(germ, t, t / 64)

def test_inner_distance_numeric_matches_method():
    germ = builtin("plane")
    t = 2.0**-5
    x = np.array([t, 0.0, 0.0])
    y = np.array([0.0, t, 0.0])
    direct = mesh_at_scale(germ, t, t / 32).distance(x, y)
    assert inner_distance_numeric(germ, x, y, t, t / 32) == direct

def test_vertices_lie_on_the_germ():
    germ = builtin("horn", F(2))
    t = 2.0**-5
    mesh = mesh_at_scale(germ, t, t / 16)
    sample = mesh.points[:: max(1, len(mesh.points) // 50)]
    for x in sample:
        assert abs(x[0] ** 2 + x[1] ** 2 - x[2] ** 4) < 1e-12
