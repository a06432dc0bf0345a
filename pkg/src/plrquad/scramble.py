"""Randomization of polynomial lattice point sets.

Two scramblers are provided.

``owen``
    Nested (Owen) scrambling.  The flip applied to digit ``l`` of a
    coordinate is a pseudorandom bit of the node of the binary tree reached
    by the first ``l - 1`` original digits.  Trees are never materialized:
    bits come from a counter-based hash of ``(seed, replicate_id,
    coordinate, node)``.  Below the ``m`` digits of the base set every point
    owns its own subtree, so the remaining ``depth - m`` scrambled digits
    and the uniform fill below ``depth`` come from one hash of the leaf.

``linear_shift``
    Random nonsingular lower-triangular digit matrix followed by a digital
    shift (Matousek's linear scrambling), keyed the same way.

Values are assembled as 53-bit integers, so every scrambled coordinate is
exactly representable and strictly below 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from . import _prf
from .errors import InvalidArgumentError, InvalidDepthError
from .polylattice import PointSet

KINDS = ("owen", "linear_shift")
DEFAULT_DEPTH = 31
_MAX_DEPTH = 53

_TAIL_SALT = np.uint64(0x5851F42D4C957F2D)
_FILL_SALT = np.uint64(0x14057B7EF767814F)
_LMS_SALT = 0x4C4D53


@dataclass(frozen=True)
class ScrambleSpec:
    kind: str = "owen"
    depth: int = DEFAULT_DEPTH
    seed: int = 0
    replicate_id: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown scramble kind {self.kind!r}; expected one of {KINDS}")
        if not 1 <= self.depth <= _MAX_DEPTH:
            raise InvalidDepthError(f"depth must lie in [1, {_MAX_DEPTH}], got {self.depth}")
        if self.seed < 0 or self.replicate_id < 0:
            raise InvalidArgumentError("seed and replicate_id must be non-negative")


@dataclass(frozen=True, eq=False)
class ScrambledPointSet:
    base: PointSet
    spec: ScrambleSpec
    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self.points

    def leading_ints(self, d: int) -> np.ndarray:
        """First ``d`` scrambled digits of every coordinate, packed."""
        return np.floor(self.points * 2.0**d).astype(np.uint64)


def _u64(x: int) -> np.uint64:
    return np.uint64(x)


_GOLD = np.uint64(_prf.GOLDEN)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True)
def _owen_top(v, keys, m):
    n, s = v.shape
    out = np.empty_like(v)
    one = np.uint64(1)
    for i in range(n):
        for j in range(s):
            x = v[i, j]
            key = keys[j]
            acc = np.uint64(0)
            for level in range(1, m + 1):
                node = (one << np.uint64(level - 1)) | (x >> np.uint64(m - level + 1))
                z = (key ^ (node * _GOLD)) + _GOLD
                z = (z ^ (z >> np.uint64(30))) * _MIX1
                z = (z ^ (z >> np.uint64(27))) * _MIX2
                z = z ^ (z >> np.uint64(31))
                digit = (x >> np.uint64(m - level)) & one
                acc = (acc << one) | (digit ^ (z >> np.uint64(63)))
            out[i, j] = acc
    return out


def _linear_top(v: np.ndarray, seed: int, replicate_id: int, m: int, depth: int) -> np.ndarray:
    s = v.shape[1]
    keys = _prf.coordinate_keys(seed, replicate_id, s, salt=_LMS_SALT)
    out = np.zeros_like(v)
    for k in range(1, m + 1):
        # column k of the D x m matrix: unit on row k, random below it
        rnd = _prf.mix(keys ^ _u64((k * _prf.GOLDEN) & 0xFFFFFFFFFFFFFFFF))
        below = depth - k
        col = _u64(1) << _u64(below)
        if below:
            col = col | (rnd >> _u64(64 - below))
        bit = (v >> _u64(m - k)) & _u64(1)
        out ^= bit * col
    shift = _prf.mix(keys ^ _u64(0xD1B54A32D192ED03)) >> _u64(64 - depth)
    return out ^ shift


def scramble(ps: PointSet, spec: ScrambleSpec) -> ScrambledPointSet:
    """Randomize ``ps`` according to ``spec``."""
    m, depth = ps.m, spec.depth
    if depth < m:
        raise InvalidDepthError(f"scrambling depth {depth} < m={m}")
    v = ps.ints
    keys = _prf.coordinate_keys(spec.seed, spec.replicate_id, ps.s)
    if spec.kind == "owen":
        top = _owen_top(v, keys, m)
        extra = depth - m
        leaf = _prf.mix(keys ^ _prf.mix(((_u64(1) << _u64(m)) | v) ^ _TAIL_SALT))
        if extra:
            top = (top << _u64(extra)) | (leaf >> _u64(64 - extra))
    else:
        top = _linear_top(v, spec.seed, spec.replicate_id, m, depth)
        leaf = _prf.mix(keys ^ _prf.mix(v ^ _TAIL_SALT))
    fill_bits = _MAX_DEPTH - depth
    packed = top << _u64(fill_bits)
    if fill_bits:
        packed = packed | (_prf.mix(leaf ^ _FILL_SALT) >> _u64(64 - fill_bits))
    points = packed.astype(np.float64) * 2.0**-_MAX_DEPTH
    points.setflags(write=False)
    return ScrambledPointSet(ps, spec, points)


def quadrature(points, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Equal-weight average of ``f`` over a point set.

    ``points`` may be a :class:`ScrambledPointSet`, a :class:`PointSet` or an
    ``(n, s)`` array; ``f`` maps an ``(n, s)`` array to ``n`` values.
    """
    x = points.values if hasattr(points, "values") else np.asarray(points, dtype=np.float64)
    vals = np.asarray(f(x), dtype=np.float64)
    if vals.shape != (x.shape[0],):
        vals = np.broadcast_to(vals, (x.shape[0],))
    return float(np.sum(vals) / x.shape[0])
