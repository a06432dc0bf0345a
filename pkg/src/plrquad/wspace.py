"""Weighted reproducing-kernel spaces and product test integrands.

The univariate kernel is ``k(x, y) = 1/3 + (x^2 + y^2)/2 - max(x, y)``,
which integrates to zero in either argument.  With product weights the
kernel of the ``s``-variate space is ``prod_j (1 + gamma_j k(x_j, y_j))``.

Test integrands are mean-one products

    f(x) = scale * prod_{j >= 1} (1 + gamma_j beta_j g(x_j))

with ``g`` either ``x - 1/2`` (linear) or ``x^2 - x + 1/6`` (quadratic).
Their integrals, anchored truncations and norms are available in closed
form; infinite tails are summed with Hurwitz zeta power sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .errors import DimensionError, InvalidArgumentError, UnsupportedWeightsError

SHAPES = ("linear", "quadratic")
# integral of g'(x)^2 over [0, 1]
KAPPA = {"linear": 1.0, "quadratic": 1.0 / 3.0}

# factors with |t_j| above this are multiplied explicitly, the rest go to the series
_SERIES_THRESHOLD = 1e-3
_MAX_EXPLICIT_TERMS = 10**7


def shape_fn(shape: str, x):
    if shape == "linear":
        return x - 0.5
    if shape == "quadratic":
        return x * x - x + 1.0 / 6.0
    raise InvalidArgumentError(f"unknown shape {shape!r}; expected one of {SHAPES}")


# ---- weights -----------------------------------------------------------------


class WeightSequence:
    """Product weights ``gamma_1 >= gamma_2 >= ... > 0``."""

    def gamma(self, j: int) -> float:
        return float(self.gammas(j)[-1])

    def gammas(self, s: int) -> np.ndarray:
        """Array ``[gamma_1, ..., gamma_s]``."""
        raise NotImplementedError

    @property
    def summable(self) -> bool:
        raise NotImplementedError

    def tail_power_sum(self, start: int, k: int) -> float:
        """``sum_{j > start} gamma_j^k``."""
        raise NotImplementedError

    def power_tail(self):
        """``(c, alpha, J)`` with ``gamma_j = c j^-alpha`` for ``j > J``, or ``None``."""
        raise NotImplementedError

    def support(self) -> int | None:
        """Index of the last nonzero weight, ``None`` when infinite."""
        return None


@dataclass(frozen=True)
class PowerWeights(WeightSequence):
    """``gamma_j = c * j^-alpha``."""

    alpha: float
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidArgumentError(f"weight scale must be positive, got {self.c}")
        if self.alpha < 0:
            raise InvalidArgumentError(f"decay exponent must be non-negative, got {self.alpha}")

    def gammas(self, s: int) -> np.ndarray:
        j = np.arange(1, s + 1, dtype=np.float64)
        return self.c * j**-self.alpha

    @property
    def summable(self) -> bool:
        return self.alpha > 1

    def tail_power_sum(self, start: int, k: int) -> float:
        if k * self.alpha <= 1:
            return math.inf
        return self.c**k * float(zeta(k * self.alpha, start + 1))

    def power_tail(self):
        return (self.c, self.alpha, 0)


@dataclass(frozen=True)
class ExplicitWeights(WeightSequence):
    """Finite list of weights, optionally continued by a power-law tail.

    Without ``tail_alpha`` all weights past the list are zero (finitely many
    active variables).  With it, ``gamma_j = gamma_J (j / J)^-tail_alpha`` for
    ``j > J = len(values)``.
    """

    values: tuple[float, ...]
    tail_alpha: float | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise InvalidArgumentError("explicit weights need at least one value")
        if any(v < 0 for v in vals):
            raise InvalidArgumentError("weights must be non-negative")
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise InvalidArgumentError("weights must be nonincreasing")
        if self.tail_alpha is not None and self.tail_alpha < 0:
            raise InvalidArgumentError("tail decay exponent must be non-negative")

    def gammas(self, s: int) -> np.ndarray:
        out = np.zeros(s, dtype=np.float64)
        J = len(self.values)
        head = min(s, J)
        out[:head] = self.values[:head]
        if s > J and self.tail_alpha is not None:
            j = np.arange(J + 1, s + 1, dtype=np.float64)
            out[J:] = self.values[-1] * (j / J) ** -self.tail_alpha
        return out

    @property
    def summable(self) -> bool:
        return self.tail_alpha is None or self.tail_alpha > 1 or self.values[-1] == 0

    def tail_power_sum(self, start: int, k: int) -> float:
        J = len(self.values)
        head = float(np.sum(np.asarray(self.values[start:]) ** k)) if start < J else 0.0
        if self.tail_alpha is None or self.values[-1] == 0:
            return head
        if k * self.tail_alpha <= 1:
            return math.inf
        c = self.values[-1] * J**self.tail_alpha
        return head + c**k * float(zeta(k * self.tail_alpha, max(start, J) + 1))

    def power_tail(self):
        if self.tail_alpha is None or self.values[-1] == 0:
            return None
        J = len(self.values)
        return (self.values[-1] * J**self.tail_alpha, self.tail_alpha, J)

    def support(self) -> int | None:
        if self.tail_alpha is not None and self.values[-1] > 0:
            return None
        nz = [i for i, v in enumerate(self.values, start=1) if v > 0]
        return nz[-1] if nz else 0


def theorem1_condition(ws: WeightSequence, eps: float) -> bool:
    """Whether ``sum_j gamma_j^(1/(3-eps))`` is finite.

    ``eps = 0`` is accepted as the boundary case.
    """
    if not 0 <= eps < 3:
        raise InvalidArgumentError(f"eps must lie in [0, 3), got {eps}")
    tail = ws.power_tail()
    if tail is None:
        return True
    _, alpha, _ = tail
    return alpha / (3 - eps) > 1


# ---- kernels -----------------------------------------------------------------


def kernel(x, y):
    """Vectorized univariate kernel without domain checks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return 1.0 / 3.0 + (x * x + y * y) / 2.0 - np.maximum(x, y)


def kernel_eval(x: float, y: float) -> float:
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise InvalidArgumentError(f"kernel arguments must lie in [0, 1], got ({x}, {y})")
    return 1.0 / 3.0 + (x * x + y * y) / 2.0 - max(x, y)


@dataclass(frozen=True)
class KernelSpace:
    weights: WeightSequence

    def product_kernel(self, x, y, s: int) -> float:
        return product_kernel_eval(self, x, y, s)


def product_kernel_eval(ks: KernelSpace, x, y, s: int) -> float:
    """``prod_{j <= s} (1 + gamma_j k(x_j, y_j))``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if s == 0:
        return 1.0
    if x.shape != (s,) or y.shape != (s,):
        raise DimensionError(f"points must have {s} coordinates, got {x.shape} and {y.shape}")
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
        raise InvalidArgumentError("kernel arguments must lie in [0, 1]")
    return float(np.prod(1.0 + ks.weights.gammas(s) * kernel(x, y)))


# ---- tail products -------------------------------------------------------------


def _log_tail_series(ws: WeightSequence, start: int, mult: float) -> float:
    """``sum_{j > start} log(1 + mult gamma_j)`` assuming ``|mult gamma_j| < 1e-3``."""
    total = 0.0
    for k in range(1, 40):
        ps = ws.tail_power_sum(start, k)
        term = (-1) ** (k + 1) * mult**k * ps / k
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def tail_product(ws: WeightSequence, start: int, mult: float | np.ndarray) -> float:
    """``prod_{j > start} (1 + mult_j gamma_j)``.

    ``mult`` is either a scalar (same multiplier for all ``j``) or an array
    holding ``mult_1, mult_2, ...``, zero past its end.
    """
    if np.ndim(mult) > 0:
        mult = np.asarray(mult, dtype=np.float64)
        if start >= mult.size:
            return 1.0
        g = ws.gammas(mult.size)[start:]
        return float(np.prod(1.0 + mult[start:] * g))
    mult = float(mult)
    if mult == 0.0:
        return 1.0
    support = ws.support()
    if support is not None:
        if start >= support:
            return 1.0
        return float(np.prod(1.0 + mult * ws.gammas(support)[start:]))
    if not ws.summable:
        raise UnsupportedWeightsError("weights are not summable; the tail product diverges")
    c, alpha, J = ws.power_tail()
    # first index past which |mult| gamma_j drops below the series threshold
    cut = max(start, J, math.ceil((abs(mult) * c / _SERIES_THRESHOLD) ** (1.0 / alpha)))
    if cut - start > _MAX_EXPLICIT_TERMS:
        raise UnsupportedWeightsError("tail converges too slowly for the explicit product")
    explicit = 1.0
    if cut > start:
        explicit = float(np.prod(1.0 + mult * ws.gammas(cut)[start:]))
    return explicit * math.exp(_log_tail_series(ws, cut, mult))


# ---- product integrands ---------------------------------------------------------


@dataclass(frozen=True)
class ProductIntegrand:
    """``scale * prod_j (1 + gamma_j beta_j g(x_j))``.

    ``beta`` is a scalar applied to every coordinate or a finite sequence
    (zero past its end).
    """

    weights: WeightSequence
    shape: str = "linear"
    beta: float | tuple[float, ...] = 1.0
    scale: float = 1.0
    _beta_arr: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidArgumentError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if np.ndim(self.beta) > 0:
            beta = tuple(float(b) for b in self.beta)
            object.__setattr__(self, "beta", beta)
            object.__setattr__(self, "_beta_arr", np.asarray(beta))
        else:
            object.__setattr__(self, "beta", float(self.beta))
            if self.beta != 0 and not self.weights.summable:
                raise UnsupportedWeightsError("product integrand needs summable weights")

    @property
    def kappa(self) -> float:
        return KAPPA[self.shape]

    def betas(self, s: int) -> np.ndarray:
        if self._beta_arr is None:
            return np.full(s, self.beta)
        b = np.zeros(s)
        k = min(s, self._beta_arr.size)
        b[:k] = self._beta_arr[:k]
        return b

    def coefficients(self, s: int) -> np.ndarray:
        """``gamma_j beta_j`` for ``j = 1..s``."""
        return self.weights.gammas(s) * self.betas(s)

    def _tail_mult(self, value: float):
        return self.beta * value if self._beta_arr is None else self._beta_arr * value

    def tail(self, s: int, a: float) -> float:
        """``T(s, a) = prod_{j > s} (1 + gamma_j beta_j g(a))`` (unscaled)."""
        return tail_product(self.weights, s, self._tail_mult(shape_fn(self.shape, a)))

    def prefix_product(self, x: np.ndarray, start: int = 0) -> np.ndarray:
        """``prod_{start < j <= start + x.shape[1]} (1 + gamma_j beta_j g(x_j))`` per row."""
        x = np.asarray(x, dtype=np.float64)
        stop = start + x.shape[1]
        coef = self.coefficients(stop)[start:]
        return np.prod(1.0 + coef * shape_fn(self.shape, x), axis=1)

    def log_factors(self, x: np.ndarray, start: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        stop = start + x.shape[1]
        coef = self.coefficients(stop)[start:]
        return np.sum(np.log1p(coef * shape_fn(self.shape, x)), axis=1)

    def eval_prefix(self, x: np.ndarray, a: float) -> np.ndarray:
        """Vectorized :func:`integrand_eval` over the rows of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return self.scale * self.tail(x.shape[1], a) * self.prefix_product(x)

    def __call__(self, x: np.ndarray, a: float = 0.5) -> np.ndarray:
        return self.eval_prefix(x, a)

    def norm(self) -> float:
        mult = self.beta**2 * self.kappa if self._beta_arr is None else self._beta_arr**2 * self.kappa
        return abs(self.scale) * math.sqrt(tail_product(self.weights, 0, mult))

    def truncated_norm(self, s: int, a: float) -> float:
        """Norm of the anchored truncation to ``s`` variables in ``H(K_{1:s})``."""
        sq = np.prod(1.0 + self.weights.gammas(s) * self.betas(s) ** 2 * self.kappa)
        return abs(self.scale * self.tail(s, a)) * math.sqrt(float(sq))

    def normalized(self) -> "ProductIntegrand":
        """Copy rescaled to unit norm."""
        return replace(self, scale=self.scale / self.norm())

    def describe(self) -> str:
        return self.shape


def integrand_eval(f: ProductIntegrand, prefix: Sequence[float], a: float) -> float:
    """Value of ``f`` at ``(x_1, ..., x_s, a, a, ...)``."""
    x = np.asarray(prefix, dtype=np.float64).reshape(1, -1)
    if np.any((x < 0) | (x > 1)) or not 0 <= a <= 1:
        raise InvalidArgumentError("coordinates and anchor must lie in [0, 1]")
    return float(f.eval_prefix(x, a)[0])


def exact_integral(f: ProductIntegrand) -> float:
    return f.scale


def truncated_integral(f: ProductIntegrand, s: int, a: float) -> float:
    """Integral of the anchored truncation of ``f`` to the first ``s`` variables."""
    return f.scale * f.tail(s, a)


def norm_in_K(f: ProductIntegrand) -> float:
    return f.norm()
