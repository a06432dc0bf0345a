"""Fixed-subspace and multilevel algorithms for integrands of infinitely many variables.

A fixed algorithm samples the first ``s`` coordinates with a scrambled
``n``-point polynomial lattice rule and pins the rest to the anchor ``a``.
The multilevel algorithm telescopes over nested truncations
``s_1 < ... < s_L``, integrating each difference with its own independently
scrambled rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _prf
from .errors import ConfigurationError, OutOfRegimeError, PlanError
from .polylattice import GeneratingVector, PointSet, generate_points
from .scramble import DEFAULT_DEPTH, ScrambleSpec, quadrature, scramble
from .wspace import ProductIntegrand, shape_fn


def _floor_pow2(x: float) -> int:
    if x < 1:
        return 0
    return 1 << int(math.floor(math.log2(x) + 1e-12))


# ---- plans -------------------------------------------------------------------


@dataclass(frozen=True)
class FixedPlan:
    N: float
    n: int
    s: int
    anchor: float = 0.5
    alpha: float | None = None
    eps: float | None = None
    n_raw: float | None = None
    s_raw: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise PlanError(f"a fixed plan needs n >= 2, got {self.n}")
        if self.s < 0:
            raise PlanError(f"dimension must be non-negative, got {self.s}")
        if not 0 <= self.anchor <= 1:
            raise PlanError(f"anchor must lie in [0, 1], got {self.anchor}")

    @property
    def n_eff(self) -> int:
        return _floor_pow2(self.n)

    @property
    def m(self) -> int:
        return self.n_eff.bit_length() - 1

    @property
    def cost(self) -> int:
        return cost_fixed(self)

    @property
    def slack(self) -> float:
        """Unused budget ``N - cost``."""
        return self.N - self.cost


@dataclass(frozen=True)
class MultilevelPlan:
    N: float
    dims: tuple[int, ...]
    points: tuple[int, ...]
    anchor: float = 0.5
    alpha: float | None = None
    eps: float | None = None
    target_levels: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(s) for s in self.dims))
        object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        if not self.dims or len(self.dims) != len(self.points):
            raise PlanError("need one point count per level and at least one level")
        if any(b <= a for a, b in zip(self.dims, self.dims[1:])) or self.dims[0] < 1:
            raise PlanError(f"level dimensions must be positive and strictly increasing, got {self.dims}")
        if any(n < 2 for n in self.points):
            raise PlanError(f"every level needs at least 2 points, got {self.points}")
        if not 0 <= self.anchor <= 1:
            raise PlanError(f"anchor must lie in [0, 1], got {self.anchor}")

    @property
    def L(self) -> int:
        return len(self.dims)

    @property
    def n_eff(self) -> tuple[int, ...]:
        return tuple(_floor_pow2(n) for n in self.points)

    @property
    def ms(self) -> tuple[int, ...]:
        return tuple(n.bit_length() - 1 for n in self.n_eff)

    @property
    def rho1(self) -> float | None:
        if self.alpha is None or self.eps is None:
            return None
        return (self.alpha - 1) / (3 - self.eps / 2)

    @property
    def rho2(self) -> float | None:
        if self.alpha is None or self.eps is None:
            return None
        return (self.alpha - 4 - self.eps) / (3 - self.eps / 2)

    @property
    def cost(self) -> int:
        return cost_variable(self)

    @property
    def slack(self) -> float:
        return self.N - self.cost


def cost_fixed(plan: FixedPlan) -> int:
    return plan.n_eff * plan.s


def cost_variable(plan: MultilevelPlan) -> int:
    return sum(s * n for s, n in zip(plan.dims, plan.n_eff))


def fixed_exponents(alpha: float, eps: float) -> tuple[float, float]:
    """Exponents of ``N`` for the point count and the dimension."""
    d = alpha + 2 - eps
    return (alpha - 1) / d, (3 - eps) / d


def plan_fixed(
    N: float,
    alpha: float,
    eps: float,
    anchor: float = 0.5,
    c_n: float = 1.0,
    c_s: float = 1.0,
) -> FixedPlan:
    """Point count and truncation dimension for a cost budget ``N``.

    ``n`` is ``c_n N^((alpha-1)/(alpha+2-eps))`` rounded down to a power of
    two and ``s`` is ``c_s N^((3-eps)/(alpha+2-eps))`` rounded up, then
    capped at ``N // n`` so that ``n s <= N``.
    """
    if alpha < 3:
        raise OutOfRegimeError(f"fixed-subspace rate needs alpha >= 3, got {alpha}")
    if eps <= 0:
        raise OutOfRegimeError(f"eps must be positive, got {eps}")
    if c_n <= 0 or c_s <= 0:
        raise ConfigurationError("tuning constants must be positive")
    if N < 2:
        raise ConfigurationError(f"budget too small: N={N}")
    en, es = fixed_exponents(alpha, eps)
    n_raw = c_n * N**en
    s_raw = c_s * N**es
    n = min(max(2, _floor_pow2(n_raw)), _floor_pow2(N))
    s = min(max(1, math.ceil(s_raw - 1e-9)), int(N // n))
    return FixedPlan(N, n, s, anchor, alpha, eps, n_raw, s_raw)


def multilevel_target_levels(N: float, alpha: float, eps: float) -> int:
    return math.ceil((3 - eps) * math.log2(N) * max(1 / (alpha - 1), 1 / 9) - 1e-12)


def plan_multilevel(
    N: float,
    alpha: float,
    eps: float,
    anchor: float = 0.5,
    lam: float | None = None,
) -> MultilevelPlan:
    """Geometric-dimension multilevel schedule with cost-constrained allocation.

    ``s_l = 2^l`` for ``l = 1..L``.  With the level variance model
    ``v_1 = 1``, ``v_l = s_{l-1}^-(alpha-1)``, the point counts are
    ``n_l = 2^floor(log2(lam (v_l / s_l)^(1/(4-eps))))``, where ``lam`` is
    the largest scalar keeping ``sum s_l n_l <= N``.  Levels with fewer than
    two points are dropped; they always sit at the top.
    """
    if alpha <= 3:
        raise OutOfRegimeError(f"multilevel rate needs alpha > 3, got {alpha}")
    if not 0 < eps < min(6, alpha - 3):
        raise OutOfRegimeError(f"eps must lie in (0, min(6, alpha - 3)), got {eps}")
    if N < 4:
        raise ConfigurationError(f"budget too small: N={N}")
    L = max(1, multilevel_target_levels(N, alpha, eps))
    dims = np.array([2**l for l in range(1, L + 1)], dtype=np.float64)
    logv = np.zeros(L)
    logv[1:] = -(alpha - 1) * np.log2(dims[:-1])
    logw = (logv - np.log2(dims)) / (4 - eps)

    def config(mu: float):
        k = np.floor(mu + logw + 1e-12).astype(np.int64)
        keep = int(np.sum(k >= 1))  # k is nonincreasing, so kept levels form a prefix
        k = k[:keep]
        return keep, k, float(np.sum(dims[:keep] * 2.0**k))

    if lam is not None:
        if lam <= 0:
            raise ConfigurationError("lam must be positive")
        keep, k, _ = config(math.log2(lam))
    else:
        lo = 1 - logw[0]
        if config(lo)[2] > N:
            raise ConfigurationError(f"budget N={N} cannot fund a single level")
        hi = math.log2(N) - logw[0] + 1
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if config(mid)[2] <= N:
                lo = mid
            else:
                hi = mid
        keep, k, _ = config(lo)
    if keep == 0:
        raise ConfigurationError(f"lam={lam} leaves no level with at least 2 points")
    return MultilevelPlan(
        N,
        tuple(int(d) for d in dims[:keep]),
        tuple(int(2**int(kk)) for kk in k),
        anchor,
        alpha,
        eps,
        target_levels=L,
    )


# ---- truncation ----------------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    """``x -> f(x_1, ..., x_s, a, a, ...)`` evaluated on the rows of an array."""

    f: ProductIntegrand
    s: int
    a: float

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.s == 0:
            return np.full(x.shape[0], self.f.scale * self.f.tail(0, self.a))
        if x.shape[1] < self.s:
            raise ConfigurationError(f"evaluator needs {self.s} coordinates, got {x.shape[1]}")
        return self.f.eval_prefix(x[:, : self.s], self.a)

    def integral(self) -> float:
        return self.f.scale * self.f.tail(self.s, self.a)


def truncate(f: ProductIntegrand, s: int, a: float) -> Truncation:
    if not 0 <= a <= 1:
        raise ConfigurationError(f"anchor must lie in [0, 1], got {a}")
    if s < 0:
        raise ConfigurationError(f"dimension must be non-negative, got {s}")
    return Truncation(f, s, a)


@dataclass(frozen=True)
class LevelDifference:
    """``Psi_{1:s} f - Psi_{1:s_prev} f`` as an ``s``-variate evaluator.

    Computed as ``P(x) T(s) (prod_new(x) - prod_new(a))`` with the bracket
    evaluated through ``expm1`` of a difference of log sums, so that tiny
    differences keep their relative accuracy.
    """

    f: ProductIntegrand
    s_prev: int
    s: int
    a: float
    _log_anchor: float = field(init=False, repr=False)
    _tail: float = field(init=False, repr=False)
    _stable: bool = field(init=False, repr=False)

    def __post_init__(self):
        coef = self.f.coefficients(self.s)[self.s_prev :]
        ga = shape_fn(self.f.shape, self.a)
        # |g| <= 1/2 on [0, 1] for both shapes
        stable = bool(np.all(np.abs(coef) * 0.5 < 1.0))
        object.__setattr__(self, "_stable", stable)
        object.__setattr__(self, "_tail", self.f.tail(self.s, self.a))
        object.__setattr__(self, "_log_anchor", float(np.sum(np.log1p(coef * ga))) if stable else 0.0)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if not self._stable:
            return Truncation(self.f, self.s, self.a)(x) - Truncation(self.f, self.s_prev, self.a)(x)
        head = self.f.prefix_product(x[:, : self.s_prev]) if self.s_prev else 1.0
        logx = self.f.log_factors(x[:, self.s_prev : self.s], start=self.s_prev)
        bracket = math.exp(self._log_anchor) * np.expm1(logx - self._log_anchor)
        return self.f.scale * self._tail * head * bracket

    def integral(self) -> float:
        return self.f.scale * (self.f.tail(self.s, self.a) - self.f.tail(self.s_prev, self.a))


def level_integrand(f: ProductIntegrand, plan: MultilevelPlan, level: int):
    """Evaluator integrated at ``level`` (0-based) of a multilevel plan."""
    s = plan.dims[level]
    if level == 0:
        return truncate(f, s, plan.anchor)
    return LevelDifference(f, plan.dims[level - 1], s, plan.anchor)


# ---- estimators ----------------------------------------------------------------


def _check_vector(g: GeneratingVector, m: int, s: int, where: str) -> None:
    if g.m != m:
        raise ConfigurationError(f"{where}: vector has m={g.m}, plan needs m={m}")
    if g.s < s:
        raise ConfigurationError(f"{where}: vector has {g.s} components, plan needs {s}")


def fixed_estimate(f, plan: FixedPlan, g: GeneratingVector, spec: ScrambleSpec) -> float:
    """One randomized estimate of the integral of ``f`` under a fixed plan."""
    _check_vector(g, plan.m, plan.s, "fixed plan")
    ps = generate_points(g, plan.s)
    return quadrature(scramble(ps, spec), truncate(f, plan.s, plan.anchor))


def level_seed(seed: int, level: int) -> int:
    """Scrambling seed of a multilevel level; distinct levels get independent streams."""
    return _prf.derive_key(seed, level, 0x4C56)


def ml_level_estimates(
    f,
    plan: MultilevelPlan,
    vectors: Sequence[GeneratingVector],
    seed: int,
    replicate_id: int = 0,
    kind: str = "owen",
    depth: int = DEFAULT_DEPTH,
    _points: Sequence[PointSet] | None = None,
) -> np.ndarray:
    """Per-level estimates ``Q_l(Psi_{s_l} f - Psi_{s_{l-1}} f)``."""
    if len(vectors) != plan.L:
        raise ConfigurationError(f"plan has {plan.L} levels, {len(vectors)} vectors given")
    out = np.empty(plan.L)
    for l in range(plan.L):
        g = vectors[l]
        _check_vector(g, plan.ms[l], plan.dims[l], f"level {l + 1}")
        ps = _points[l] if _points is not None else generate_points(g, plan.dims[l])
        spec = ScrambleSpec(kind, depth, level_seed(seed, l), replicate_id)
        out[l] = quadrature(scramble(ps, spec), level_integrand(f, plan, l))
    return out


def ml_estimate(
    f,
    plan: MultilevelPlan,
    vectors: Sequence[GeneratingVector],
    seed: int,
    replicate_id: int = 0,
    kind: str = "owen",
    depth: int = DEFAULT_DEPTH,
) -> float:
    """One randomized multilevel estimate: the sum of the level estimates."""
    return math.fsum(ml_level_estimates(f, plan, vectors, seed, replicate_id, kind, depth))


class FixedAlgorithm:
    """Fixed-subspace algorithm with cached deterministic points."""

    regime = "fixed"

    def __init__(self, plan: FixedPlan, vector: GeneratingVector, kind: str = "owen", depth: int = DEFAULT_DEPTH):
        _check_vector(vector, plan.m, plan.s, "fixed plan")
        self.plan = plan
        self.vector = vector
        self.kind = kind
        self.depth = depth
        self.points = generate_points(vector, plan.s)

    @property
    def cost(self) -> int:
        return cost_fixed(self.plan)

    def estimate(self, f, seed: int, replicate_id: int) -> float:
        spec = ScrambleSpec(self.kind, self.depth, seed, replicate_id)
        return quadrature(scramble(self.points, spec), truncate(f, self.plan.s, self.plan.anchor))

    def unscrambled_estimate(self, f) -> float:
        return quadrature(self.points, truncate(f, self.plan.s, self.plan.anchor))


class MultilevelAlgorithm:
    """Multilevel algorithm with cached deterministic points per level."""

    regime = "ml"

    def __init__(self, plan: MultilevelPlan, vectors: Sequence[GeneratingVector], kind: str = "owen", depth: int = DEFAULT_DEPTH):
        if len(vectors) != plan.L:
            raise ConfigurationError(f"plan has {plan.L} levels, {len(vectors)} vectors given")
        for l, g in enumerate(vectors):
            _check_vector(g, plan.ms[l], plan.dims[l], f"level {l + 1}")
        self.plan = plan
        self.vectors = list(vectors)
        self.kind = kind
        self.depth = depth
        self.points = [generate_points(g, s) for g, s in zip(vectors, plan.dims)]

    @property
    def cost(self) -> int:
        return cost_variable(self.plan)

    def level_estimates(self, f, seed: int, replicate_id: int) -> np.ndarray:
        return ml_level_estimates(
            f, self.plan, self.vectors, seed, replicate_id, self.kind, self.depth, _points=self.points
        )

    def estimate(self, f, seed: int, replicate_id: int) -> float:
        return math.fsum(self.level_estimates(f, seed, replicate_id))
