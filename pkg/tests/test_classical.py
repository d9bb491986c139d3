import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickedtop.classical import (
    angles_to_xyz,
    classical_step,
    CartesianState,
    inverse_map_xyz,
    iterate_angles,
    map_angles,
    map_xyz,
    phase_portrait,
    uniform_seeds,
    xyz_to_angles,
)
from kickedtop.spin import SphericalPoint

PI = math.pi


def literal_map(x, y, z, alpha, beta):
    """Rotation about x, then a z-dependent rotation about z, written out term by term."""
    zp = y * math.sin(alpha) + z * math.cos(alpha)
    xp = x * math.cos(beta * zp) - (y * math.cos(alpha) - z * math.sin(alpha)) * math.sin(beta * zp)
    yp = x * math.sin(beta * zp) + (y * math.cos(alpha) - z * math.sin(alpha)) * math.cos(beta * zp)
    return xp, yp, zp


def random_sphere(rng, n):
    u = rng.uniform(-1, 1, n)
    ph = rng.uniform(0, 2 * PI, n)
    s = np.sqrt(1 - u * u)
    return s * np.cos(ph), s * np.sin(ph), u


def test_matches_literal_formula(rng):
    x, y, z = random_sphere(rng, 200)
    for i in range(200):
        a, b = rng.uniform(0, 2 * PI), rng.uniform(-10, 10)
        got = map_xyz(x[i], y[i], z[i], a, b)
        want = literal_map(x[i], y[i], z[i], a, b)
        assert np.allclose(got, want, atol=1e-13)


def test_new_z_formula():
    p = SphericalPoint(0.8 * PI, 0.3 * PI)
    _, _, z = map_xyz(*p.cartesian(), 1.0, 2.0)
    want = math.sin(0.8 * PI) * math.sin(0.3 * PI) * math.sin(1.0) + math.cos(0.8 * PI) * math.cos(1.0)
    assert abs(z - want) < 1e-14


def test_pole_fixed_when_no_rotation():
    q = map_angles(SphericalPoint(0.0, 0.0), 0.0, 5.0)
    assert q.theta < 1e-12


def test_beta_zero_is_rigid_rotation():
    th, ph = iterate_angles(1.0, 0.5, 0.3, 0.0, 24)
    x, y, z = angles_to_xyz(th[:, 0], ph[:, 0])
    assert np.allclose(x, x[0], atol=1e-12)
    # angle about x advances by alpha each step
    ang = np.unwrap(np.arctan2(z, y))
    assert np.allclose(np.diff(ang), 0.3, atol=1e-12)


def test_norm_preserved_million_points(rng):
    x, y, z = random_sphere(rng, 10**6)
    a = rng.uniform(0, 2 * PI)
    b = rng.uniform(-20, 20)
    xn, yn, zn = map_xyz(x, y, z, a, b)
    assert np.abs(xn * xn + yn * yn + zn * zn - 1).max() < 1e-12


def test_inverse_map(rng):
    x, y, z = random_sphere(rng, 1000)
    a, b = 1.3, 4.7
    back = inverse_map_xyz(*map_xyz(x, y, z, a, b), a, b)
    assert np.abs(np.array(back) - np.array([x, y, z])).max() < 1e-12


def test_half_pi_symmetries_random(rng):
    n = 10**4
    x, y, z = random_sphere(rng, n)
    betas = rng.uniform(-10, 10, n)
    a = PI / 2
    xp, yp, zp = map_xyz(x, y, z, a, betas)
    # (theta, phi + pi) -> (pi - theta', pi - phi')
    r1 = np.array(map_xyz(-x, -y, z, a, betas)) - np.array([-xp, yp, -zp])
    # (pi - theta, pi - phi) -> (theta', phi' + pi)
    r2 = np.array(map_xyz(-x, y, -z, a, betas)) - np.array([-xp, -yp, zp])
    # (pi - theta, 2pi - phi) -> (pi - theta', 2pi - phi')
    r3 = np.array(map_xyz(x, -y, -z, a, betas)) - np.array([xp, -yp, -zp])
    for r in (r1, r2, r3):
        assert np.abs(r).max() < 1e-12


def test_angles_round_trip(rng):
    th = np.arccos(rng.uniform(-1, 1, 500))
    ph = rng.uniform(0, 2 * PI, 500)
    t2, p2 = xyz_to_angles(*angles_to_xyz(th, ph))
    assert np.abs(t2 - th).max() < 1e-7
    dphi = np.abs((p2 - ph + PI) % (2 * PI) - PI)
    assert dphi.max() < 1e-7


@given(st.floats(0, PI), st.floats(0, 2 * PI), st.floats(-PI, PI), st.floats(-8, 8))
@settings(max_examples=300, deadline=None)
def test_map_angles_canonical(theta, phi, alpha, beta):
    q = map_angles(SphericalPoint(theta, phi), alpha, beta)
    assert 0 <= q.theta <= PI and 0 <= q.phi < 2 * PI


def test_cartesian_state_step():
    s = CartesianState.from_point(SphericalPoint(1.0, 2.0))
    t = classical_step(s, 0.4, 1.5)
    assert abs(t.norm - 1) < 1e-14


def test_uniform_seeds_grid_and_random(rng):
    seeds = uniform_seeds(100)
    assert len(seeds) == 100
    z = np.array([math.cos(p.theta) for p in seeds])
    assert abs(z.mean()) < 1e-12
    rs = uniform_seeds(50, rng)
    assert len(rs) == 50


def test_phase_portrait_shapes():
    trajs = phase_portrait(PI / 2, 2.0, uniform_seeds(9), 20)
    assert len(trajs) == 9
    assert all(t.as_array().shape == (21, 2) for t in trajs)
    with pytest.raises(ValueError):
        phase_portrait(PI / 2, 2.0, uniform_seeds(2), 0)
