import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from suq2.fock import (
    DOWN,
    UP,
    InvalidKetError,
    SparseVector,
    Spin,
    SpinKet,
    XYKet,
    dimension,
    enumerate_basis,
    from_xy,
    is_valid,
    to_xy,
)


def brute_force_count(max2j):
    n = 0
    for j2 in range(max2j + 1):
        for mu2, n2 in itertools.product(range(-j2 - 2, j2 + 3), repeat=2):
            n += int(is_valid(j2, mu2, n2, UP)) + int(is_valid(j2, mu2, n2, DOWN))
    return n


def test_small_dimensions():
    assert [dimension(k) for k in range(3)] == [2, 10, 28]
    assert enumerate_basis(0).dim == 2


def test_dimension_formula_matches_enumeration():
    for k in range(21):
        assert dimension(k) == brute_force_count(k) == sum(2 * (i + 1) ** 2 for i in range(k + 1))


def test_ket_validity():
    SpinKet("0", "0", "-1/2", Spin.up)
    with pytest.raises(InvalidKetError):
        SpinKet("0", "0", "0", Spin.down)  # down spinors start at j = 1/2
    with pytest.raises(InvalidKetError):
        SpinKet("1/2", "1/2", "1/2", Spin.down)
    with pytest.raises(InvalidKetError):
        SpinKet("1", "1/2", "1/2", Spin.up)


def test_xy_relabelling_examples():
    v = to_xy(SpinKet("0", "0", "-1/2", Spin.up))
    assert (v.j.twice, v.x, v.y, v.spin) == (0, 0, 0, Spin.up)
    v = to_xy(SpinKet("1/2", "-1/2", "0", Spin.down))
    assert (v.j.twice, v.x, v.y, v.spin) == (1, 0, 0, Spin.down)
    with pytest.raises(InvalidKetError):
        XYKet("1/2", 0, 1, Spin.down)


def test_index_is_a_bijection():
    space = enumerate_basis(8)
    idx = space.index_of(space.j2, space.mu2, space.n2, space.spin)
    assert np.array_equal(idx, np.arange(space.dim))
    for i in range(0, space.dim, 7):
        assert space.index(space.ket(i)) == i


def test_index_of_flags_invalid_and_out_of_range():
    space = enumerate_basis(3)
    assert space.index_of(np.array([0]), np.array([0]), np.array([0]), DOWN)[0] == -1
    assert space.index_of(np.array([4]), np.array([0]), np.array([1]), UP)[0] == -1


def test_level_slices_partition_the_space():
    space = enumerate_basis(6)
    for k in range(7):
        up, dn = space.level_slice(k, UP), space.level_slice(k, DOWN)
        assert np.all(space.j2[space.level_slice(k)] == k)
        assert np.all(space.spin[up] == UP) and np.all(space.spin[dn] == DOWN)
        assert up.stop - up.start == (k + 1) * (k + 2)
        assert dn.stop - dn.start == (k + 1) * k


def test_sparse_vector_normalisation():
    v = SparseVector({0: 3.0, 1: 4.0, 2: 1e-17}).prune()
    assert 2 not in v
    n = v.normalized()
    assert n.norm() == pytest.approx(1.0)
    assert np.allclose(n.to_dense(3), [0.6, 0.8, 0.0])


@st.composite
def kets(draw):
    j2 = draw(st.integers(0, 30))
    spin = draw(st.sampled_from([Spin.up, Spin.down]) if j2 > 0 else st.just(Spin.up))
    mu2 = draw(st.integers(0, j2)) * 2 - j2
    width = j2 + 1 if spin == Spin.up else j2 - 1
    n2 = draw(st.integers(0, width)) * 2 - width
    return SpinKet(j2 / 2, mu2 / 2, n2 / 2, spin)


@given(kets())
def test_xy_round_trip(k):
    v = to_xy(k)
    assert from_xy(v) == k
    assert v.j == k.j and v.spin == k.spin


@given(kets())
def test_every_ket_is_indexed(k):
    space = enumerate_basis(30)
    assert space.ket(space.index(k)) == k
