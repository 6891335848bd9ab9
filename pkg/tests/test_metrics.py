import numpy as np
import pytest

from damc import Alphabet, IndexSet, alphabet_project, apply_mask, nmse
from damc.errors import MetricError

RATINGS = Alphabet([1.0, 2.0, 3.0, 4.0, 5.0])


def test_nmse_zero_on_agreement():
    O = np.arange(1.0, 7.0).reshape(2, 3)
    S = IndexSet((2, 3), [(0, 0), (1, 2)])
    assert nmse(O.copy(), O, S) == 0.0


def test_nmse_zero_fill_is_one():
    O = np.full((3, 3), 2.0)
    S = IndexSet.full((3, 3))
    assert nmse(np.zeros((3, 3)), O, S) == pytest.approx(1.0)


def test_nmse_direct_arithmetic():
    # differences [1, 1] against reference [2, 2] on the eval set: 2 / 8
    O = np.array([[2.0, 2.0], [9.0, 9.0]])
    X = np.array([[3.0, 3.0], [0.0, 0.0]])
    S = IndexSet((2, 2), [(0, 0), (0, 1)])
    assert nmse(X, O, S) == pytest.approx(0.25)


def test_nmse_restriction_consistency():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 6))
    O = rng.standard_normal((6, 6)) + 2.0
    S = IndexSet.from_mask(rng.random((6, 6)) < 0.5)
    full = nmse(apply_mask(X, S), apply_mask(O, S), S)
    assert nmse(X, O, S) == pytest.approx(full, rel=1e-12)


def test_nmse_empty_eval_set():
    with pytest.raises(MetricError):
        nmse(np.zeros((2, 2)), np.ones((2, 2)), IndexSet((2, 2)))


def test_nmse_zero_denominator():
    S = IndexSet((2, 2), [(0, 0)])
    with pytest.raises(MetricError):
        nmse(np.ones((2, 2)), np.zeros((2, 2)), S)


def test_alphabet_project_nearest():
    X = np.array([[2.4, 2.5], [2.51, 0.2]])
    out = alphabet_project(X, RATINGS, IndexSet.full((2, 2)))
    assert np.array_equal(out, [[2.0, 2.0], [3.0, 1.0]])


def test_alphabet_project_only_touches_given_set():
    X = np.array([[2.4, 2.4]])
    out = alphabet_project(X, RATINGS, IndexSet((1, 2), [(0, 1)]))
    assert out[0, 0] == 2.4 and out[0, 1] == 2.0


def test_alphabet_project_fixed_on_letters():
    X = np.array([[1.0, 5.0], [3.0, 4.0]])
    out = alphabet_project(X, RATINGS, IndexSet.full((2, 2)))
    assert np.array_equal(out, X)


def test_alphabet_project_range():
    rng = np.random.default_rng(1)
    X = rng.uniform(-10.0, 20.0, (10, 10))
    out = alphabet_project(X, RATINGS, IndexSet.full((10, 10)))
    assert out.min() >= 1.0 and out.max() <= 5.0
