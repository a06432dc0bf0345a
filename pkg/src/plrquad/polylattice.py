"""Polynomial lattice point sets in base 2.

Point ``i`` has coordinate ``j`` equal to the first ``m`` Laurent digits of
``i(x) q_j(x) / p(x)``.  The map is linear over GF(2) in the binary digits of
``i``, so each coordinate is generated from ``m`` generator columns by XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidArgumentError, TooLargeError
from .gfpoly import Poly, _is_irreducible_int, _laurent_int

#: Work guard for :func:`net_strength`: ``2^m`` times the number of compositions.
NET_STRENGTH_GUARD = 10**7


@dataclass(frozen=True)
class GeneratingVector:
    """Modulus ``p`` of degree ``m`` and generating polynomials ``q_1, ..., q_s``."""

    m: int
    p: Poly
    q: tuple[Poly, ...]
    b: int = 2

    def __post_init__(self):
        if self.b != 2:
            raise InvalidArgumentError(f"only base 2 is supported, got b={self.b}")
        if self.m < 1:
            raise InvalidArgumentError(f"m must be >= 1, got {self.m}")
        if self.p.degree != self.m:
            raise InvalidArgumentError(f"modulus degree {self.p.degree} != m={self.m}")
        if not _is_irreducible_int(self.p.bits):
            raise InvalidArgumentError(f"modulus {self.p.hex()} is reducible")
        object.__setattr__(self, "q", tuple(self.q))
        for j, qj in enumerate(self.q, start=1):
            if qj.is_zero() or qj.degree >= self.m:
                raise InvalidArgumentError(f"q_{j}={qj.hex()} must be nonzero with degree < m")

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def s(self) -> int:
        return len(self.q)

    def prefix(self, s: int) -> "GeneratingVector":
        if s > self.s:
            raise DimensionError(f"vector has {self.s} components, {s} requested")
        return GeneratingVector(self.m, self.p, self.q[:s])


@dataclass(frozen=True, eq=False)
class PointSet:
    """Digit representation of ``n = 2^m`` points in ``[0, 1)^s``.

    ``ints[i, j]`` packs the ``m`` digits of coordinate ``j`` of point ``i``
    with the first digit as the most significant bit, so the coordinate
    value is ``ints[i, j] / 2^m``.
    """

    m: int
    ints: np.ndarray

    def __post_init__(self):
        ints = np.ascontiguousarray(self.ints, dtype=np.uint64)
        if ints.ndim != 2:
            raise DimensionError("ints must be a 2-d array")
        ints.setflags(write=False)
        object.__setattr__(self, "ints", ints)

    @property
    def n(self) -> int:
        return self.ints.shape[0]

    @property
    def s(self) -> int:
        return self.ints.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self.ints.astype(np.float64) * 2.0**-self.m

    @property
    def digits(self) -> np.ndarray:
        """Array of shape ``(n, s, m)``; ``digits[..., l]`` is digit ``l + 1``."""
        shifts = np.arange(self.m - 1, -1, -1, dtype=np.uint64)
        return ((self.ints[:, :, None] >> shifts) & np.uint64(1)).astype(np.uint8)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.ints, other.ints)

    __hash__ = None


def generator_columns(q: int, p: int, m: int) -> list[int]:
    """Generator columns of one coordinate as packed ``m``-digit integers.

    Column ``k`` holds the digits of ``x^k q(x) / p(x)``.  These are digits
    ``k+1, ..., k+m`` of the expansion of ``q / p`` (Hankel structure).
    """
    u = _laurent_int(q, p, 2 * m)
    mask = (1 << m) - 1
    return [(u >> (m - k)) & mask for k in range(m)]


def _span(cols: Sequence[int], m: int) -> np.ndarray:
    out = np.zeros(1 << m, dtype=np.uint64)
    size = 1
    for k in range(m):
        out[size : 2 * size] = out[:size] ^ np.uint64(cols[k])
        size *= 2
    return out


def generate_points(g: GeneratingVector, s: int | None = None) -> PointSet:
    """Deterministic point set of the rule, indexed ``i = 0, ..., 2^m - 1``."""
    if s is None:
        s = g.s
    if s < 0 or s > g.s:
        raise DimensionError(f"generating vector has {g.s} components, {s} requested")
    ints = np.empty((g.n, s), dtype=np.uint64)
    for j in range(s):
        ints[:, j] = _span(generator_columns(g.q[j].bits, g.p.bits, g.m), g.m)
    return PointSet(g.m, ints)


def box_counts(ints: np.ndarray, m: int, resolution: Sequence[int]) -> np.ndarray:
    """Occupancy of each elementary box with side ``2^-d_j`` in coordinate ``j``.

    ``ints`` holds at least ``max(d_j)`` leading digits packed in ``m`` bits.
    """
    ints = np.asarray(ints, dtype=np.uint64)
    index = np.zeros(ints.shape[0], dtype=np.int64)
    for j, d in enumerate(resolution):
        if d:
            top = (ints[:, j] >> np.uint64(m - d)).astype(np.int64)
            index = (index << d) | top
    total = 1 << int(sum(resolution))
    return np.bincount(index, minlength=total)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def net_strength(ps: PointSet) -> int:
    """Smallest ``t`` for which ``ps`` is a ``(t, m, s)``-net in base 2.

    Every composition ``d_1 + ... + d_s = m - t`` is enumerated and each
    elementary box is checked to hold exactly ``2^t`` points.
    """
    m, s = ps.m, ps.s
    if ps.n != 1 << m:
        raise DimensionError(f"point set has {ps.n} points, expected 2^{m}")
    if s == 0:
        return 0
    work = (1 << m) * comb(m + s - 1, s - 1)
    if work > NET_STRENGTH_GUARD:
        raise TooLargeError(f"net_strength needs {work} box checks (guard {NET_STRENGTH_GUARD})")
    for t in range(m + 1):
        target = 1 << t
        if all(
            np.all(box_counts(ps.ints, m, d) == target) for d in _compositions(m - t, s)
        ):
            return t
    return m
