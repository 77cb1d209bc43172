import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfgp.data import GradObservationSet, MultiFidelityData, nesting_map
from mfgp.errors import DimensionMismatch, DuplicateLocations, MissingGradients, NotNested


def test_shapes_and_accessors():
    s = GradObservationSet([0.0, 0.5, 1.0], [1.0, 2.0, 3.0], [0.1, 0.2, 0.3])
    assert s.n == 3 and s.dim == 1 and s.has_grads
    np.testing.assert_array_equal(s.augmented_values(), [1, 2, 3, 0.1, 0.2, 0.3])
    np.testing.assert_array_equal(s.gradient_component(0).y, [0.1, 0.2, 0.3])
    assert not s.without_grads().has_grads
    with pytest.raises(MissingGradients):
        s.without_grads().gradient_component(0)


def test_2d_augmented_values_are_location_major():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    s = GradObservationSet(X, [1.0, 2.0], [[10.0, 11.0], [20.0, 21.0]])
    np.testing.assert_array_equal(s.augmented_values(), [1, 2, 10, 11, 20, 21])


def test_validation():
    with pytest.raises(DimensionMismatch):
        GradObservationSet([0.0, 1.0], [1.0])
    with pytest.raises(DimensionMismatch):
        GradObservationSet(np.zeros((2, 2)) + [[0, 0], [1, 1]], [1.0, 2.0], np.zeros((2, 3)))
    with pytest.raises(ValueError):
        GradObservationSet([0.0, np.nan], [1.0, 2.0])
    with pytest.raises(DuplicateLocations):
        GradObservationSet([0.0, 0.5, 1e-13], [1.0, 2.0, 3.0])
    # distinct at 1e-11 is fine
    GradObservationSet([0.0, 1e-11], [1.0, 2.0])


def test_arrays_read_only():
    s = GradObservationSet([0.0, 1.0], [1.0, 2.0], [0.0, 0.0])
    for a in (s.X, s.y, s.grads):
        with pytest.raises(ValueError):
            a[0] = 5


def test_nesting():
    low = GradObservationSet([0.0, 0.2, 0.4, 0.6], [1.0, 2.0, 3.0, 4.0])
    high = GradObservationSet([0.6, 0.2], [0.0, 0.0])
    d = MultiFidelityData(low, high)
    np.testing.assert_array_equal(d.nesting, [3, 1])
    with pytest.raises(NotNested, match=r"high-fidelity location \(0\.3\) has no low-fidelity match"):
        MultiFidelityData(low, GradObservationSet([0.3], [0.0]))
    with pytest.raises(DimensionMismatch):
        MultiFidelityData(low, GradObservationSet(np.array([[0.2, 0.0]]), [0.0]))


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=2, max_size=30, unique=True), st.data())
def test_nesting_map_recovers_subset(points, data):
    X = np.array(points, dtype=float) / 50
    k = data.draw(st.integers(1, len(points)))
    idx = data.draw(st.permutations(range(len(points))))[:k]
    m = nesting_map(X, X[idx])
    np.testing.assert_array_equal(m, idx)
