import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcbalance.errors import OutOfDomainError, ShapeError
from mcbalance.grid import GridSpace


def test_point_counts_inclusive_endpoints():
    sp = GridSpace(1, -10.0, 10.0, 0.1)
    assert sp.n_points[0] == 201
    assert sp.m == 201
    sp2 = GridSpace(2, (-10.0, -10.0), (10.0, 10.0), 0.1)
    assert sp2.m == 201 * 201


def test_point_count_robust_to_float_division():
    # 0.1 is not representable; the count must still land on 61, not 60
    sp = GridSpace(1, -3.0, 3.0, 0.1)
    assert sp.n_points[0] == 61


def test_axis_values_span_bounds():
    sp = GridSpace(1, -2.0, 2.0, 0.5)
    vals = sp.axis_values(0)
    assert vals[0] == -2.0
    assert vals[-1] == pytest.approx(2.0)
    assert len(vals) == 9


def test_snap_rounds_to_nearest():
    sp = GridSpace(1, 0.0, 10.0, 1.0)
    assert sp.snap_index(3.2, 0) == 3
    assert sp.snap_index(3.8, 0) == 4


def test_snap_tie_goes_away_from_zero():
    sp = GridSpace(1, -5.0, 5.0, 1.0)
    # -0.5 and 0.5 sit exactly between grid points
    assert sp.values(np.array([sp.snap_index(0.5, 0)]))[0] == 1.0
    assert sp.values(np.array([sp.snap_index(-0.5, 0)]))[0] == -1.0


def test_snap_rejects_out_of_box_values():
    sp = GridSpace(1, 0.0, 4.0, 1.0)
    with pytest.raises(OutOfDomainError):
        sp.snap_index(-3.0, 0)
    with pytest.raises(OutOfDomainError):
        sp.snap_index(99.0, 0)


def test_encode_decode_known_point():
    sp = GridSpace(2, (0.0, 0.0), (2.0, 3.0), 1.0)
    flat = sp.encode((1.0, 2.0))
    assert sp.decode_multi(flat).tolist() == [1, 2]
    np.testing.assert_allclose(sp.decode(flat), [1.0, 2.0])


def test_flatten_row_major_last_dim_fastest():
    sp = GridSpace(2, (0.0, 0.0), (1.0, 2.0), 1.0)
    # 2 x 3 grid: (i, j) -> 3i + j
    assert sp.flatten([0, 0]) == 0
    assert sp.flatten([0, 2]) == 2
    assert sp.flatten([1, 0]) == 3


def test_flatten_rejects_bad_shape_and_range():
    sp = GridSpace(2, (0.0, 0.0), (1.0, 1.0), 1.0)
    with pytest.raises(ShapeError):
        sp.flatten([0])
    with pytest.raises(OutOfDomainError):
        sp.flatten([0, 5])
    with pytest.raises(OutOfDomainError):
        sp.decode_multi(sp.m)


def test_contains_multi():
    sp = GridSpace(2, (0.0, 0.0), (1.0, 1.0), 1.0)
    assert sp.contains_multi(np.array([1, 1]))
    assert not sp.contains_multi(np.array([1, 2]))
    assert not sp.contains_multi(np.array([-1, 0]))


def test_constructor_validation():
    with pytest.raises(ValueError):
        GridSpace(0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        GridSpace(1, 0.0, 1.0, -0.5)
    with pytest.raises(ValueError):
        GridSpace(1, 1.0, 0.0, 0.5)


@given(st.integers(min_value=0, max_value=201 * 201 - 1))
def test_flat_roundtrip(flat):
    sp = GridSpace(2, (-10.0, -10.0), (10.0, 10.0), 0.1)
    assert sp.flatten(sp.decode_multi(flat)) == flat


@settings(max_examples=200)
@given(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
def test_snap_error_at_most_half_width(v):
    """Snapping never moves a value by more than half a cell."""
    sp = GridSpace(1, -10.0, 10.0, 0.1)
    idx = sp.snap_index(v, 0)
    snapped = sp.values(np.array([idx]))[0]
    assert abs(snapped - v) <= 0.05 + 1e-12


@given(
    st.tuples(
        st.floats(min_value=-5.0, max_value=4.0, allow_nan=False),
        st.floats(min_value=0.1, max_value=3.0, allow_nan=False),
    )
)
def test_grid_point_snaps_to_itself(lo_span):
    lo, span = lo_span
    sp = GridSpace(1, lo, lo + span, span / 7)
    n = int(sp.n_points[0])
    # the last axis value can drift a hair above `upper`, so test it via the
    # exact bound instead
    for idx in range(n - 1):
        v = float(sp.axis_values(0)[idx])
        assert sp.snap_index(v, 0) == idx
    assert sp.snap_index(lo + span, 0) == n - 1
