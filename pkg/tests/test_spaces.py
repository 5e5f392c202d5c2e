import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from banachpolar import (
    InvalidSpaceError,
    LpSpace,
    QuadraticSpace,
    dual_norm,
    duality_map,
    inverse_duality_map,
    norm,
    pairing,
    validate_space,
)
from banachpolar.spaces import require_valid

from conftest import SPACES


def test_validate_examples():
    assert validate_space(LpSpace(3, 2)) == []
    assert validate_space(LpSpace(3, 1)) == ["p must satisfy 1<p<∞"]
    assert validate_space(QuadraticSpace(np.diag([1.0, -1.0, 1.0]))) == ["matrix not positive definite"]


@pytest.mark.parametrize(
    "space, message",
    [
        (LpSpace(1, 2.0), "dimension"),
        (LpSpace(3, float("inf")), "p must satisfy"),
        (LpSpace(3, 0.5), "p must satisfy"),
        (QuadraticSpace(np.ones((2, 3))), "square"),
        (QuadraticSpace([[1.0, 0.5], [0.0, 1.0]]), "symmetric"),
        (QuadraticSpace([[1.0, np.nan], [np.nan, 1.0]]), "non-finite"),
        (QuadraticSpace(np.zeros((3, 3))), "positive definite"),
    ],
)
def test_validate_rejects(space, message):
    errors = validate_space(space)
    assert errors and any(message in e for e in errors)
    with pytest.raises(InvalidSpaceError):
        require_valid(space)


def test_symmetry_tolerance_is_relative():
    A = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]]) * 1e6
    assert validate_space(QuadraticSpace(A)) == []


def test_norm_examples():
    assert norm(LpSpace(3, 2), [3, 4, 0]) == pytest.approx(5.0, rel=1e-15)
    assert norm(LpSpace(3, 3), [1, 1, 1]) == pytest.approx(3 ** (1 / 3), rel=1e-15)
    assert norm(QuadraticSpace(np.eye(3)), [1, 2, 2]) == pytest.approx(3.0, rel=1e-15)


def test_dual_norm_examples():
    assert dual_norm(LpSpace(3, 2), [0, 3, 4]) == pytest.approx(5.0, rel=1e-15)
    assert dual_norm(LpSpace(2, 3), [1, 1]) == pytest.approx(2 ** (2 / 3), rel=1e-15)
    assert dual_norm(QuadraticSpace(np.diag([4.0, 1.0])), [2, 0]) == pytest.approx(1.0, rel=1e-15)


def test_pairing_examples():
    assert pairing([1, 0, 0], [5, 7, 9]) == 5
    assert pairing(np.zeros(3), [5, 7, 9]) == 0
    q = 2.0
    assert pairing([1, 1, 2], [1, 1, 2 ** (q - 1)]) == pytest.approx(6.0)


def test_dimension_mismatch():
    sp = LpSpace(3, 3.0)
    with pytest.raises(ValueError, match="dimension"):
        norm(sp, [1.0, 2.0])
    with pytest.raises(ValueError, match="dimension"):
        duality_map(sp, np.ones(4))
    with pytest.raises(ValueError, match="dimension"):
        pairing(np.ones(3), np.ones(2))
    with pytest.raises(ValueError, match="dimension"):
        inverse_duality_map(QuadraticSpace(np.eye(2)), np.ones(3))


def test_duality_map_examples(rng):
    x = rng.standard_normal((20, 4))
    np.testing.assert_array_equal(duality_map(LpSpace(4, 2.0), x), x)
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    y = rng.standard_normal((10, 2))
    np.testing.assert_allclose(duality_map(QuadraticSpace(A), y), y @ A, rtol=1e-15)
    np.testing.assert_allclose(duality_map(LpSpace(3, 3.0), [1.0, 0.0, 0.0]), [1.0, 0.0, 0.0], atol=1e-15)


def test_inverse_duality_map_examples():
    # p = 2: J* is the identity, so the image of (0,1,1) points along (0,1,1)
    img = inverse_duality_map(LpSpace(3, 2.0), [0.0, 1.0, 1.0])
    np.testing.assert_allclose(img, [0.0, 1.0, 1.0])
    for p in (1.5, 3.0, 4.0):
        sp = LpSpace(3, p)
        img = inverse_duality_map(sp, [1.0, 1.0, 2.0])
        target = np.array([1.0, 1.0, 2 ** (sp.q - 1)])
        assert img[0] > 0
        np.testing.assert_allclose(img / img[0], target, rtol=1e-13)
    np.testing.assert_allclose(inverse_duality_map(QuadraticSpace(np.diag([2.0, 1.0])), [2.0, 3.0]), [1.0, 3.0])


def test_zero_maps_to_zero(space):
    z = np.zeros(space.dim)
    assert norm(space, z) == 0
    np.testing.assert_array_equal(duality_map(space, z), z)
    np.testing.assert_array_equal(inverse_duality_map(space, z), z)


def test_zero_coordinates_with_small_p():
    sp = LpSpace(3, 1.25)
    x = np.array([0.0, -2.0, 0.5])
    Jx = duality_map(sp, x)
    assert Jx[0] == 0 and np.all(np.isfinite(Jx))
    assert pairing(Jx, x) == pytest.approx(norm(sp, x) ** 2, rel=1e-12)


def test_definition_identities(space, rng):
    x = rng.standard_normal((1000, space.dim)) * rng.choice([1e-3, 1.0, 1e3], size=(1000, 1))
    nx = norm(space, x)
    Jx = duality_map(space, x)
    assert np.all(np.abs(pairing(Jx, x) - nx**2) <= 1e-10 * np.maximum(1, nx**2))
    assert np.all(np.abs(dual_norm(space, Jx) - nx) <= 1e-10 * np.maximum(1, nx))


def test_round_trips(space, rng):
    x = rng.standard_normal((1000, space.dim))
    back = inverse_duality_map(space, duality_map(space, x))
    assert np.all(norm(space, back - x) <= 1e-8 * np.maximum(1, norm(space, x)))
    a = rng.standard_normal((1000, space.dim))
    back = duality_map(space, inverse_duality_map(space, a))
    assert np.all(dual_norm(space, back - a) <= 1e-8 * np.maximum(1, dual_norm(space, a)))


@pytest.mark.parametrize("t", [0.5, 2.0, 10.0])
def test_homogeneity(space, rng, t):
    x = rng.standard_normal((200, space.dim))
    diff = dual_norm(space, duality_map(space, t * x) - t * duality_map(space, x))
    assert np.all(diff <= 1e-10 * t * norm(space, x))


def test_hilbert_degeneration(rng):
    x = rng.standard_normal((50, 5))
    for sp in (LpSpace(5, 2.0), QuadraticSpace(np.eye(5))):
        np.testing.assert_allclose(duality_map(sp, x), x, rtol=1e-14)
        np.testing.assert_allclose(inverse_duality_map(sp, x), x, rtol=1e-14)


vec3 = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(a=vec3, x=vec3, p=st.floats(1.05, 12.0))
def test_holder(a, x, p):
    sp = LpSpace(3, p)
    assert abs(pairing(a, x)) <= dual_norm(sp, a) * norm(sp, x) * (1 + 1e-12) + 1e-300


@settings(max_examples=200, deadline=None)
@given(x=vec3, p=st.floats(1.1, 10.0))
def test_duality_map_is_supporting_functional(x, p):
    sp = LpSpace(3, p)
    nx = norm(sp, x)
    Jx = duality_map(sp, x)
    assert abs(pairing(Jx, x) - nx**2) <= 1e-10 * max(1.0, nx**2)
    assert abs(dual_norm(sp, Jx) - nx) <= 1e-10 * max(1.0, nx)


def test_duality_derivative_matches_finite_differences(rng):
    for sp in (LpSpace(4, 3.0), LpSpace(4, 1.5), QuadraticSpace(np.diag([1.0, 2.0, 3.0, 4.0]))):
        x = rng.standard_normal(4) + 0.5
        H = sp.duality_derivative(x)
        h = 1e-6
        fd = np.array([(sp.duality_map(x + h * e) - sp.duality_map(x - h * e)) / (2 * h) for e in np.eye(4)]).T
        np.testing.assert_allclose(H, fd, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(H, H.T, atol=1e-12)


def test_spaces_are_immutable():
    sp = QuadraticSpace(np.eye(2))
    with pytest.raises(ValueError):
        sp.matrix[0, 0] = 5.0
    with pytest.raises(AttributeError):
        LpSpace(3, 2.0).p = 3.0


def test_all_test_spaces_valid():
    for sp in SPACES:
        assert validate_space(sp) == []
