"""Component-by-component construction of polynomial lattice rules.

Two figures of merit are supported.

``wce``
    Squared worst-case error of the deterministic rule in ``H(K_{1:s})``,

        e^2 = -1 + (1/n^2) sum_{i,h} prod_j (1 + gamma_j k(x_ij, x_hj)),

    which holds because the kernel integrates to one in each argument.
    A candidate costs ``O(n^2)``; the ``n x n`` matrix of partial products
    is cached between dimensions.

``scrambled``
    Expected squared worst-case error of the Owen-scrambled rule.  For a
    scrambled pair with digit difference ``v`` the kernel has mean
    ``phi(v) = 1/6 - 2^(bitlen(v) - m) / 4`` (``1/6`` when ``v = 0``), and
    because the point set is a group under digitwise XOR

        E e^2 = -1 + (1/n) sum_i prod_j (1 + gamma_j phi(x_ij)),

    which costs ``O(n)`` per candidate.

Both caches store ``prod - 1`` so that small errors keep their relative
accuracy.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, InvalidArgumentError, TooLargeError
from .gfpoly import Poly, find_irreducible
from .polylattice import GeneratingVector, PointSet
from .wspace import WeightSequence

logger = logging.getLogger(__name__)

CRITERIA = ("wce", "scrambled")
DEFAULT_RANDOM_CANDIDATES = 512
#: Largest m for which the O(n^2)-memory deterministic criterion is allowed.
MAX_WCE_M = 12
#: ``auto`` uses the deterministic criterion while candidates * n^2 * s / 2 stays below this.
AUTO_WCE_WORK = 5e9
# scores within this relative distance of the minimum count as ties
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Search:
    kind: str = "full"
    candidates: int = DEFAULT_RANDOM_CANDIDATES

    @classmethod
    def parse(cls, text: "str | Search") -> "Search":
        if isinstance(text, Search):
            return text
        t = text.strip().lower()
        if t == "full":
            return cls("full")
        match = re.fullmatch(r"random(?:[(:](\d+)\)?)?", t)
        if not match:
            raise InvalidArgumentError(f"search must be 'full' or 'random(C)', got {text!r}")
        c = int(match.group(1)) if match.group(1) else DEFAULT_RANDOM_CANDIDATES
        if c < 1:
            raise InvalidArgumentError("random search needs at least one candidate")
        return cls("random", c)

    def __str__(self) -> str:
        return "full" if self.kind == "full" else f"random({self.candidates})"

    def count(self, m: int) -> int:
        total = (1 << m) - 1
        return total if self.kind == "full" else min(total, self.candidates)


@dataclass(frozen=True)
class MeritReport:
    """Per-dimension outcome of a CBC run."""

    q: tuple[Poly, ...]
    e2: tuple[float, ...]
    seconds: tuple[float, ...]
    scanned_min: tuple[float, ...]
    criterion: str
    search: str


def _gamma_array(ws, s: int) -> np.ndarray:
    if isinstance(ws, WeightSequence):
        return ws.gammas(s)
    gam = np.asarray(ws, dtype=np.float64)
    if gam.shape[0] < s:
        raise DimensionError(f"{gam.shape[0]} weights given for dimension {s}")
    return gam[:s]


def wce_squared(points, ws, s: int | None = None) -> float:
    """Squared worst-case error of an equal-weight rule in ``H(K_{1:s})``.

    Parameters
    ----------
    points : PointSet, ScrambledPointSet or array of shape (n, s')
    ws : WeightSequence or sequence of weights
    s : int, optional
        Number of leading coordinates used (default: all).
    """
    x = points.values if hasattr(points, "values") else np.asarray(points, dtype=np.float64)
    x = np.atleast_2d(x)
    if s is None:
        s = x.shape[1]
    if s > x.shape[1]:
        raise DimensionError(f"points have {x.shape[1]} coordinates, {s} requested")
    gam = _gamma_array(ws, s)
    return max(0.0, float(_kernels.wce_double_sum(np.ascontiguousarray(x[:, :s]), gam)))


def scrambled_kernel_mean(diff: np.ndarray, m: int) -> np.ndarray:
    """Mean of ``k`` over Owen scramblings of a pair whose ``m`` leading digits differ by ``diff``."""
    v = np.asarray(diff, dtype=np.float64)
    _, bitlen = np.frexp(v)
    return np.where(v == 0, 1.0 / 6.0, 1.0 / 6.0 - 0.25 * np.ldexp(1.0, bitlen - m))


def scrambled_wce_squared(ps: PointSet, ws, s: int | None = None) -> float:
    """Mean of :func:`wce_squared` over Owen scramblings of a digital net ``ps``."""
    if s is None:
        s = ps.s
    if s > ps.s:
        raise DimensionError(f"point set has {ps.s} coordinates, {s} requested")
    gam = _gamma_array(ws, s)
    E = np.zeros(ps.n)
    for j in range(s):
        phi = scrambled_kernel_mean(ps.ints[:, j], ps.m)
        E += gam[j] * phi * (1.0 + E)
    return max(0.0, float(np.mean(E)))


def choose_criterion(m: int, s_max: int, search: Search) -> str:
    if m > MAX_WCE_M:
        return "scrambled"
    work = search.count(m) * (1 << m) ** 2 / 2 * s_max
    return "wce" if work <= AUTO_WCE_WORK else "scrambled"


def _candidates(m: int, search: Search, seed: int, j: int) -> np.ndarray:
    total = (1 << m) - 1
    if search.kind == "full" or search.candidates >= total:
        return np.arange(1, total + 1, dtype=np.int64)
    rng = np.random.default_rng([seed, j])
    picks = rng.choice(total, size=search.candidates, replace=False) + 1
    return np.sort(picks).astype(np.int64)


def _argmin_tiebreak(scores: np.ndarray, cands: np.ndarray) -> int:
    best = scores.min()
    tol = _TIE_RTOL * float(np.max(np.abs(scores)))
    return int(np.flatnonzero(scores <= best + tol)[0])  # cands are sorted ascending


def cbc_construct(
    m: int,
    s_max: int,
    ws: WeightSequence,
    search: "str | Search" = "full",
    criterion: str = "wce",
    seed: int = 0,
    start: GeneratingVector | None = None,
) -> tuple[GeneratingVector, MeritReport]:
    """Build a generating vector one coordinate at a time.

    The modulus is the smallest irreducible polynomial of degree ``m``.  For
    each dimension the candidate minimizing the chosen criterion is kept,
    ties going to the smallest encoding.  ``start`` resumes from an existing
    vector built with the same settings.
    """
    if m < 1 or s_max < 1:
        raise InvalidArgumentError(f"need m >= 1 and s_max >= 1, got m={m}, s_max={s_max}")
    search = Search.parse(search)
    if criterion == "auto":
        criterion = choose_criterion(m, s_max, search)
    if criterion not in CRITERIA:
        raise InvalidArgumentError(f"criterion must be one of {CRITERIA + ('auto',)}, got {criterion!r}")
    if criterion == "wce" and m > MAX_WCE_M:
        raise TooLargeError(f"deterministic criterion needs an n x n cache; m={m} > {MAX_WCE_M}")

    p = find_irreducible(m)
    gam = ws.gammas(s_max)
    n = 1 << m
    if criterion == "wce":
        E = np.zeros((n, n))
        scan, update = _kernels.scan_wce, _kernels.update_wce
    else:
        E = np.zeros(n)
        scan, update = _kernels.scan_scrambled, _kernels.update_scrambled

    qs: list[int] = []
    e2s: list[float] = []
    secs: list[float] = []
    mins: list[float] = []
    if start is not None:
        if start.m != m or start.p != p:
            raise InvalidArgumentError("start vector was built for a different modulus")
        for j, qj in enumerate(start.q[:s_max]):
            e2s.append(max(0.0, update(qj.bits, p.bits, m, gam[j], E)))
            qs.append(qj.bits)
            secs.append(0.0)
            mins.append(float("nan"))

    for j in range(len(qs), s_max):
        t0 = time.perf_counter()
        if j == 0 or gam[j] == 0.0:
            # the 1-d projection is the full grid for every candidate
            q, smin = 1, 0.0
        else:
            cands = _candidates(m, search, seed, j)
            scores = scan(cands, p.bits, m, E)
            k = _argmin_tiebreak(scores, cands)
            q, smin = int(cands[k]), float(scores.min())
            assert scores[k] <= smin + _TIE_RTOL * float(np.max(np.abs(scores)))
        e2s.append(max(0.0, update(q, p.bits, m, gam[j], E)))
        qs.append(q)
        mins.append(smin)
        secs.append(time.perf_counter() - t0)
        logger.debug("cbc m=%d dim=%d q=%#x e2=%.6g", m, j + 1, q, e2s[-1])

    polys = tuple(Poly(q) for q in qs)
    vector = GeneratingVector(m, p, polys)
    report = MeritReport(polys, tuple(e2s), tuple(secs), tuple(mins), criterion, str(search))
    return vector, report
