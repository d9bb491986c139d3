import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickedtop.classical import angles_to_xyz, iterate_angles
from kickedtop.pseudo import (
    CASE1_SIGNS,
    PointCountExceeded,
    ResonanceOffset,
    WeightedPointSet,
    build_branch_table,
    gaussian_sums,
    merge_points,
    predict_sync,
    predict_sync_case1,
    predict_sync_case2,
    pseudo_evolve,
    pseudo_expectations,
    pseudo_step,
    verify_splitting_identity,
)
from kickedtop.spin import SphericalPoint, build_spin_space

from conftest import random_point

PI = math.pi
H = math.sqrt(2) / 2


def brute_gauss(r, s):
    return [sum(cmath.exp(-2j * PI * r * k * (k - l) / s) for k in range(s)) / s for l in range(s)]


# frozen from the brute-force sum above, evaluated once with cmath
G_1_3 = [complex(0.0, -0.577350269189626), complex(0.5, 0.288675134594813), complex(0.5, 0.288675134594813)]
G_2_5 = [
    complex(-0.447213595499958, 0.0),
    complex(0.361803398874989, 0.262865556059567),
    complex(0.36180339887499, -0.262865556059567),
    complex(0.361803398874989, -0.262865556059567),
    complex(0.36180339887499, 0.262865556059567),
]


@pytest.mark.parametrize("r,s,frozen", [(1, 3, G_1_3), (2, 5, G_2_5)])
def test_gauss_sums_frozen(r, s, frozen):
    assert np.abs(gaussian_sums(r, s) - np.array(frozen)).max() < 1e-12


@pytest.mark.parametrize("r,s", [(1, 1), (1, 2), (3, 4), (5, 7), (7, 12), (11, 30), (13, 64)])
def test_gauss_sums_brute_force(r, s):
    assert np.abs(gaussian_sums(r, s) - np.array(brute_gauss(r, s))).max() < 1e-12


def test_gauss_sums_known_tables():
    assert np.allclose(gaussian_sums(1, 2), [0, 1], atol=1e-12)
    assert np.allclose(gaussian_sums(1, 4), [H * cmath.exp(-1j * PI / 4), 0, H * cmath.exp(1j * PI / 4), 0], atol=1e-12)
    assert np.allclose(gaussian_sums(1, 1), [1])


def test_gauss_rejects_non_coprime():
    with pytest.raises(ValueError):
        gaussian_sums(2, 4)
    with pytest.raises(ValueError):
        ResonanceOffset(3, 9, 0.1)
    with pytest.raises(ValueError):
        ResonanceOffset(1, 2, float("nan"))


def test_branch_tables():
    t = build_branch_table(1, 2)
    assert t.n_branches == 1 and np.allclose(t.shifts, [PI]) and np.allclose(t.amps, [1])
    t = build_branch_table(1, 4)
    assert t.n_branches == 2
    assert np.allclose(t.shifts, [0, PI])
    assert np.allclose(t.amps, [(1 - 1j) / 2, (1 + 1j) / 2], atol=1e-12)
    t = build_branch_table(1, 3)
    assert t.n_branches == 3
    assert np.allclose(t.shifts, [0, 2 * PI / 3, 4 * PI / 3])
    assert np.allclose(t.amps, G_1_3, atol=1e-12)


def test_branch_weight_over_all_coprime_pairs():
    for s in range(1, 65):
        for r in range(1, s + 1):
            if math.gcd(r, s) != 1:
                continue
            t = build_branch_table(r, s)
            assert abs(np.sum(np.abs(t.amps) ** 2) - 1) < 1e-12, (r, s)
            assert np.all(np.diff(t.shifts) > 0)
            assert np.all((t.shifts >= 0) & (t.shifts < 2 * PI))


def test_resonance_offset_beta():
    assert ResonanceOffset(1, 2, 2.0).beta(400) == pytest.approx(800 * PI + 2)


def test_merge_cancellation_and_sum():
    out = merge_points([1.0, 1.0], [2.0, 2.0], [cmath.exp(-1j * PI / 4) / 2, cmath.exp(3j * PI / 4) / 2])
    assert len(out) == 0
    a = 1 / (2 * math.sqrt(2))
    out = merge_points([1.0, 1.0 + 1e-12, 2.0], [2.0, 2.0, 1.0], [a, a, 1 / math.sqrt(2)])
    assert len(out) == 2
    assert abs(out.amp[0] - 2 * a) < 1e-15


def test_merge_sorted_and_renormalised(rng):
    th = rng.uniform(0.1, 3.0, 20)
    ph = rng.uniform(0, 6.0, 20)
    out = merge_points(th, ph, np.full(20, 0.3))
    assert abs(out.total_weight - 1) < 1e-12
    keys = list(zip(out.theta, out.phi))
    assert keys == sorted(keys)


def test_single_point_case1_step():
    p = SphericalPoint(0.8 * PI, 0.3 * PI)
    out = pseudo_step(WeightedPointSet.single(p), 1.0, 2.0, build_branch_table(1, 2))
    th, ph = iterate_angles(p.theta, p.phi, 1.0, 2.0, 1)
    assert len(out) == 1 and abs(abs(out.amp[0]) - 1) < 1e-12
    assert abs(out.theta[0] - th[1, 0]) < 1e-12
    assert abs(out.phi[0] - (ph[1, 0] + PI) % (2 * PI)) < 1e-12


def test_case2_first_step_amplitudes():
    p = SphericalPoint(0.7 * PI, 0.3 * PI)
    out = pseudo_step(WeightedPointSet.single(p), PI / 2, 2.0, build_branch_table(1, 4))
    _, ph = iterate_angles(p.theta, p.phi, PI / 2, 2.0, 1)
    by_shift = {round((q.phi - ph[1, 0]) % (2 * PI), 6): a for q, a in out.entries}
    assert abs(by_shift[0.0] - H * cmath.exp(-1j * PI / 4)) < 1e-12
    assert abs(by_shift[round(PI, 6)] - H * cmath.exp(1j * PI / 4)) < 1e-12


def test_case2_point_counts_and_weight():
    states = pseudo_evolve(SphericalPoint(0.7 * PI, 0.3 * PI), PI / 2, 2.0, build_branch_table(1, 4), 16)
    assert [len(s) for s in states] == [1, 2, 4, 2] * 4 + [1]
    assert all(abs(s.total_weight - 1) < 1e-9 for s in states)


def _close_on_sphere(pts, theta, phi, tol):
    a = np.array(angles_to_xyz(pts.theta[0], pts.phi[0]))
    b = np.array(angles_to_xyz(theta, phi))
    return np.abs(a - b).max() < tol


def test_case1_four_step_coincidence():
    p = SphericalPoint(0.7 * PI, 0.3 * PI)
    states = pseudo_evolve(p, PI / 2, 2.0, build_branch_table(1, 2), 20)
    th, ph = iterate_angles(p.theta, p.phi, PI / 2, 2.0, 20)
    for n in range(0, 21, 4):
        assert len(states[n]) == 1
        assert _close_on_sphere(states[n], th[n, 0], ph[n, 0], 1e-10)


def test_case2_four_and_eight_step_points():
    p = SphericalPoint(0.7 * PI, 0.3 * PI)
    states = pseudo_evolve(p, PI / 2, 2.0, build_branch_table(1, 4), 24)
    th, ph = iterate_angles(p.theta, p.phi, PI / 2, 2.0, 24)
    for n in (8, 16, 24):
        assert _close_on_sphere(states[n], th[n, 0], ph[n, 0], 1e-10)
    # at n = 4 the lone survivor is the mirrored point
    assert _close_on_sphere(states[4], PI - th[4, 0], 2 * PI - ph[4, 0], 1e-10)


def test_case2_expectations_vanish_at_two_mod_eight():
    states = pseudo_evolve(SphericalPoint(0.7 * PI, 0.3 * PI), PI / 2, 2.0, build_branch_table(1, 4), 18)
    for n in (2, 6, 10, 14, 18):
        assert np.abs(pseudo_expectations(states[n], 400)).max() < 1e-9


def test_single_point_expectations():
    p = SphericalPoint(1.0, 2.0)
    assert np.allclose(pseudo_expectations(WeightedPointSet.single(p), 10), 10 * np.array(p.cartesian()))


def test_point_cap_aborts():
    with pytest.raises(PointCountExceeded, match="cap 8"):
        pseudo_evolve(SphericalPoint(0.8 * PI, 0.3 * PI), 1.0, 2.0, build_branch_table(1, 4), 10, max_points=8)


def test_splitting_examples(rng):
    sp = build_spin_space(20)
    assert verify_splitting_identity(sp, SphericalPoint(0.8 * PI, 0.3 * PI), 1, 2) <= 1e-8
    assert verify_splitting_identity(sp, random_point(rng), 1, 4) <= 1e-8
    assert verify_splitting_identity(sp, random_point(rng), 2, 5) <= 1e-8


def test_splitting_random_triples(rng):
    sp = build_spin_space(20)
    for _ in range(50):
        s = int(rng.integers(1, 17))
        r = int(rng.integers(1, s + 1))
        while math.gcd(r, s) != 1:
            r = int(rng.integers(1, s + 1))
        assert verify_splitting_identity(sp, random_point(rng), r, s) <= 1e-8


def test_splitting_rejects_large_j():
    with pytest.raises(ValueError):
        verify_splitting_identity(build_spin_space(101), SphericalPoint(1, 1), 1, 2)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)), min_size=8, max_size=8))
@settings(max_examples=50, deadline=None)
def test_sync_tables(rows):
    ref = np.array(rows)
    assert predict_sync_case1(ref, 0) == tuple(ref[0])
    assert predict_sync_case1(ref, 1) == (-ref[1, 0], -ref[1, 1], ref[1, 2])
    assert predict_sync_case1(ref, 2) == (ref[2, 0], -ref[2, 1], -ref[2, 2])
    assert predict_sync_case2(ref, 0) == tuple(ref[0])
    assert predict_sync_case2(ref, 4) == (ref[4, 0], -ref[4, 1], -ref[4, 2])
    assert predict_sync_case2(ref, 2) == (0, 0, 0)
    assert np.array_equal(predict_sync("case1", ref)[:4], CASE1_SIGNS * ref[:4])


def test_sync_rejects_other_alpha():
    with pytest.raises(ValueError):
        predict_sync_case1(np.zeros((2, 3)), 1, alpha=1.0)
    with pytest.raises(ValueError):
        predict_sync_case2(np.zeros((2, 3)), 1, alpha=1.0)
