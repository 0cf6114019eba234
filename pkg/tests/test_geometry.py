import math

import numpy as np
import pytest

from mmslab import cheeger, perimeter, two_point_space
from helpers import random_euclidean_space


def test_perimeter_trivial_sets(circle256):
    assert perimeter(circle256, np.array([], dtype=int)) == 0.0
    assert perimeter(circle256, np.arange(circle256.n)) == 0.0


def test_perimeter_arc_exact(circle256):
    assert perimeter(circle256, np.arange(64)) == 2.0


def test_perimeter_two_point():
    assert perimeter(two_point_space(1.0), [0]) == 1.0


def test_perimeter_torus_band(torus8):
    half = np.arange(32)  # four full grid rows: two boundary circles
    assert perimeter(torus8, half) == pytest.approx(2 * (2 * math.pi), rel=1e-12)


def test_perimeter_complement_symmetry(rng):
    space = random_euclidean_space(rng, 14)
    for _ in range(100):
        mask = rng.random(space.n) < rng.uniform(0.2, 0.8)
        assert perimeter(space, mask) == perimeter(space, ~mask)


def test_perimeter_subadditive_on_disjoint(rng):
    space = random_euclidean_space(rng, 12)
    for _ in range(50):
        labels = rng.integers(0, 3, space.n)
        a = labels == 0
        b = labels == 1
        assert perimeter(space, a | b) <= perimeter(space, a) + perimeter(space, b) + 1e-12


def test_perimeter_input_validation(circle16):
    with pytest.raises(ValueError):
        perimeter(circle16, [99])
    with pytest.raises(ValueError):
        perimeter(circle16, np.zeros(5, dtype=bool))


def test_cheeger_two_point_exact():
    est = cheeger(two_point_space(1.0), "exact")
    assert est.lower == est.upper == 1.0
    assert est.method == "brute_force"
    assert est.witness_set.tolist() in ([0], [1])


def test_cheeger_circle16_exact(circle16):
    est = cheeger(circle16, "exact")
    assert est.upper == pytest.approx(2 / math.pi, rel=1e-12)
    assert est.lower == est.upper
    # witness achieves the ratio within the admissible mass range
    mass = float(np.sum(circle16.measure[est.witness_set]))
    assert 0 < mass <= circle16.total_mass / 2 + 1e-12
    assert perimeter(circle16, est.witness_set) / mass == pytest.approx(est.upper, rel=1e-12)


def test_cheeger_sweep_circle(circle256):
    est = cheeger(circle256, "sweep")
    assert est.method == "sweep_cut"
    truth = 2 / math.pi
    assert est.upper == pytest.approx(truth, rel=0.05)
    assert est.lower <= truth <= est.upper + 1e-12
    # the witness realizes the reported upper bound in the admissible range
    mass = float(np.sum(circle256.measure[est.witness_set]))
    assert 0 < mass <= circle256.total_mass / 2 + 1e-12
    assert perimeter(circle256, est.witness_set) / mass == pytest.approx(est.upper,
                                                                         rel=1e-12)


def test_cheeger_sweep_brackets_brute_force(rng):
    for trial in range(20):
        space = random_euclidean_space(rng, int(rng.integers(6, 17)))
        exact = cheeger(space, "exact")
        swept = cheeger(space, "sweep")
        assert swept.lower <= exact.upper * (1 + 1e-12)
        assert swept.upper >= exact.upper * (1 - 1e-12)


def test_cheeger_mode_errors(circle64, circle16):
    with pytest.raises(ValueError):
        cheeger(circle64, "exact")
    with pytest.raises(ValueError):
        cheeger(circle16, "bogus")


def test_cheeger_auto_dispatch(circle16, circle64):
    assert cheeger(circle16).method == "brute_force"
    assert cheeger(circle64).method == "sweep_cut"
