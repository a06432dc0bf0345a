"""Polynomial lattice point sets against a definitional construction."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plrquad.errors import DimensionError, InvalidArgumentError, TooLargeError
from plrquad.gfpoly import Poly, find_irreducible
from plrquad.polylattice import (
    GeneratingVector,
    PointSet,
    box_counts,
    generate_points,
    net_strength,
)


def _clmul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _polymod(a, p):
    while a and a.bit_length() >= p.bit_length():
        a ^= p << (a.bit_length() - p.bit_length())
    return a


def _definitional_point(i, q, p, m):
    """Coordinate of point ``i``: the first ``m`` digits of (i q mod p) / p, as a Fraction."""
    r = _polymod(_clmul(i, q), p)
    value = Fraction(0)
    for k in range(1, m + 1):
        r <<= 1
        if r.bit_length() == p.bit_length():
            value += Fraction(1, 2**k)
            r ^= p
    return value


def _brute_t(x, m):
    """Smallest t such that every elementary box of volume 2^(t-m) holds 2^t points (float boxes)."""
    n, s = x.shape
    for t in range(m + 1):
        ok = True
        for d in itertools.product(range(m - t + 1), repeat=s):
            if sum(d) != m - t:
                continue
            idx = np.zeros(n, dtype=np.int64)
            for j, dj in enumerate(d):
                idx = idx * 2**dj + np.floor(x[:, j] * 2**dj).astype(np.int64)
            if not np.all(np.bincount(idx, minlength=2 ** (m - t)) == 2**t):
                ok = False
                break
        if ok:
            return t
    raise AssertionError("unreachable")


@st.composite
def vectors(draw, max_m=8, max_s=4):
    m = draw(st.integers(min_value=1, max_value=max_m))
    s = draw(st.integers(min_value=1, max_value=max_s))
    qs = draw(st.lists(st.integers(min_value=1, max_value=(1 << m) - 1), min_size=s, max_size=s))
    return GeneratingVector(m, find_irreducible(m), tuple(Poly(q) for q in qs))


class TestGeneratingVector:
    def test_validation(self):
        p = Poly(0x7)
        with pytest.raises(InvalidArgumentError):
            GeneratingVector(2, Poly(0x5), (Poly(1),))  # reducible
        with pytest.raises(InvalidArgumentError):
            GeneratingVector(3, p, (Poly(1),))  # degree mismatch
        with pytest.raises(InvalidArgumentError):
            GeneratingVector(2, p, (Poly(0),))
        with pytest.raises(InvalidArgumentError):
            GeneratingVector(2, p, (Poly(0x4),))
        with pytest.raises(InvalidArgumentError):
            GeneratingVector(2, p, (Poly(1),), b=3)

    def test_prefix(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1), Poly(2)))
        assert g.prefix(1).q == (Poly(1),)
        assert g.n == 4 and g.s == 2
        with pytest.raises(DimensionError):
            g.prefix(3)


class TestGeneratePoints:
    def test_hand_example(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1), Poly(0x2)))
        ps = generate_points(g)
        expected = {(0.0, 0.0), (0.25, 0.75), (0.75, 0.5), (0.5, 0.25)}
        assert {tuple(row) for row in ps.values} == expected
        np.testing.assert_array_equal(ps.values, [[0, 0], [0.25, 0.75], [0.75, 0.5], [0.5, 0.25]])

    def test_one_dimensional_grid(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1),))
        assert sorted(generate_points(g).values[:, 0]) == [0, 0.25, 0.5, 0.75]

    @settings(max_examples=60)
    @given(vectors())
    def test_matches_definition(self, g):
        ps = generate_points(g)
        for j, q in enumerate(g.q):
            expected = [_definitional_point(i, q.bits, g.p.bits, g.m) for i in range(g.n)]
            got = [Fraction(int(v), 2**g.m) for v in ps.ints[:, j]]
            assert got == expected

    @settings(max_examples=40)
    @given(vectors(max_m=6))
    def test_xor_group(self, g):
        ps = generate_points(g)
        rows = {tuple(r) for r in ps.ints.tolist()}
        assert len(rows) == g.n
        for a, b in itertools.product(ps.ints[:8], ps.ints):
            assert tuple((a ^ b).tolist()) in rows

    @settings(max_examples=40)
    @given(vectors(max_m=10))
    def test_projections_are_grids(self, g):
        ps = generate_points(g)
        for j in range(g.s):
            assert np.array_equal(np.sort(ps.ints[:, j]), np.arange(g.n, dtype=np.uint64))

    def test_digits_layout(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1), Poly(0x2)))
        ps = generate_points(g)
        assert ps.digits.shape == (4, 2, 2)
        np.testing.assert_array_equal(ps.digits[1, 1], [1, 1])  # 3/4 = 0.11
        np.testing.assert_array_equal(ps.digits[2, 1], [1, 0])  # 1/2 = 0.10

    def test_prefix_dimension(self):
        g = GeneratingVector(3, Poly(0xB), (Poly(1), Poly(3), Poly(5)))
        assert generate_points(g, 2) == PointSet(3, generate_points(g).ints[:, :2])
        with pytest.raises(DimensionError):
            generate_points(g, 4)

    def test_read_only(self):
        ps = generate_points(GeneratingVector(2, Poly(0x7), (Poly(1),)))
        with pytest.raises(ValueError):
            ps.ints[0, 0] = 1


class TestNetStrength:
    def test_hand_example(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1), Poly(0x2)))
        assert net_strength(generate_points(g)) == 0

    @pytest.mark.parametrize("m", range(1, 8))
    def test_one_dimensional_rules(self, m):
        p = find_irreducible(m)
        for q in range(1, 1 << m):
            ps = generate_points(GeneratingVector(m, p, (Poly(q),)))
            assert net_strength(ps) == 0

    def test_identical_points(self):
        ps = PointSet(3, np.zeros((8, 2), dtype=np.uint64))
        assert net_strength(ps) == 3

    def test_bad_q_gives_large_t(self):
        # q_1 = q_2 puts every point on the diagonal; only boxes split in a
        # single coordinate are fair, so t = m - 1
        g = GeneratingVector(4, Poly(0x13), (Poly(3), Poly(3)))
        ps = generate_points(g)
        assert net_strength(ps) == 3 == _brute_t(ps.values, 4)

    @settings(max_examples=40, deadline=None)
    @given(vectors(max_m=6, max_s=3))
    def test_matches_brute_force(self, g):
        ps = generate_points(g)
        assert net_strength(ps) == _brute_t(ps.values, g.m)

    def test_guard(self):
        g = GeneratingVector(20, find_irreducible(20), (Poly(1),) * 12)
        with pytest.raises(TooLargeError):
            net_strength(generate_points(g))

    def test_box_counts(self):
        g = GeneratingVector(2, Poly(0x7), (Poly(1), Poly(0x2)))
        ps = generate_points(g)
        np.testing.assert_array_equal(box_counts(ps.ints, 2, (1, 1)), [1, 1, 1, 1])
        np.testing.assert_array_equal(box_counts(ps.ints, 2, (2, 0)), [1, 1, 1, 1])
