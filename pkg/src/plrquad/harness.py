"""RMSE estimation over independent scrambles and error-versus-cost sweeps.

The RMSE of one unit-norm integrand is a lower bound on the worst-case
error over the unit ball, so sweeps estimate convergence *rates*; the
constants are not meaningful.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .cbc import Search, cbc_construct, choose_criterion, wce_squared
from .errors import ConfigurationError, InsufficientReplicatesError, InvalidArgumentError
from .infdim import FixedAlgorithm, MultilevelAlgorithm, plan_fixed, plan_multilevel
from .io import open_output
from .polylattice import GeneratingVector
from .wspace import PowerWeights, ProductIntegrand, WeightSequence

logger = logging.getLogger(__name__)

MIN_REPLICATES = 8
DEFAULT_REPLICATES = 32
CSV_COLUMNS = (
    "regime", "N", "cost", "n_or_levels", "s_or_dims", "rmse", "stderr",
    "reps", "seed", "alpha", "eps", "anchor", "shape",
)
#: Largest ``n^2 s`` for which sweeps check the unscrambled error against the worst-case bound.
WCE_CHECK_WORK = 2**27


@dataclass(frozen=True)
class ConvergenceRecord:
    regime: str
    N: float
    cost: int
    n_or_levels: str
    s_or_dims: str
    rmse: float
    stderr: float
    reps: int
    seed: int
    alpha: float
    eps: float
    anchor: float
    shape: str

    def as_row(self) -> list[str]:
        return [_fmt(getattr(self, name)) for name in CSV_COLUMNS]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def predicted_slope(regime: str, alpha: float, eps: float) -> float:
    """Exponent of ``N`` in the error bound for the given regime."""
    if regime == "fixed":
        return -(3 - eps) / 2 * (alpha - 1) / (alpha + 2 - eps)
    if regime == "ml":
        return -(3 - eps) / 2 if alpha >= 10 else -(3 - eps) / 2 * (alpha - 1) / 9
    raise InvalidArgumentError(f"unknown regime {regime!r}")


def rmse(algorithm, f: ProductIntegrand, R: int, master_seed: int) -> tuple[float, float]:
    """Root-mean-square error of ``algorithm`` on ``f`` over ``R`` scrambles.

    Replicate ``r`` uses ``replicate_id = r`` under ``master_seed``.  The
    standard error comes from the delta method applied to the sample
    variance of the squared errors.
    """
    if R < MIN_REPLICATES:
        raise InsufficientReplicatesError(f"need at least {MIN_REPLICATES} replicates, got {R}")
    exact = f.scale
    sq = np.array([(exact - algorithm.estimate(f, master_seed, r)) ** 2 for r in range(R)])
    msq = math.fsum(sq) / R
    value = math.sqrt(msq)
    if value == 0.0:
        return 0.0, 0.0
    se_msq = float(np.std(sq, ddof=1)) / math.sqrt(R)
    return value, se_msq / (2 * value)


class VectorCache:
    """CBC vectors keyed by ``(m, weights, criterion, search)``.

    CBC is greedy, so a vector built for ``s`` dimensions is a prefix of the
    one built for more; requests for more dimensions resume the search.
    """

    def __init__(self, weights: WeightSequence, criterion: str = "auto", search: str | None = None, seed: int = 0):
        self.weights = weights
        self.criterion = criterion
        self.search = search
        self.seed = seed
        self._store: dict[tuple, GeneratingVector] = {}
        self._criterion_for_m: dict[int, str] = {}

    def _search_for(self, m: int) -> Search:
        if self.search is not None:
            return Search.parse(self.search)
        # full scans up to m = 10, random(512) above
        return Search("full") if m <= 10 else Search("random", 512)

    def get(self, m: int, s: int) -> GeneratingVector:
        search = self._search_for(m)
        crit = self.criterion
        if crit == "auto":
            # decided once per m, at the first (largest, via reserve) request
            crit = self._criterion_for_m.setdefault(m, choose_criterion(m, s, search))
        key = (m, crit, str(search))
        have = self._store.get(key)
        if have is not None and have.s >= s:
            return have.prefix(s)
        vector, _ = cbc_construct(m, s, self.weights, search, crit, self.seed, start=have)
        self._store[key] = vector
        return vector

    def reserve(self, requests: Iterable[tuple[int, int]]) -> None:
        """Build each ``m`` once at the largest requested dimension."""
        need: dict[int, int] = {}
        for m, s in requests:
            need[m] = max(need.get(m, 0), s)
        for m, s in sorted(need.items()):
            self.get(m, s)


def make_integrand(alpha: float, shape: str = "linear", beta=1.0, c: float = 1.0) -> ProductIntegrand:
    """Unit-norm product integrand whose weights match the space."""
    return ProductIntegrand(PowerWeights(alpha, c), shape, beta).normalized()


def _check_budgets(budgets: Sequence[float]) -> list[float]:
    budgets = list(budgets)
    if len(budgets) < 3:
        raise ConfigurationError("a sweep needs at least 3 budgets")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigurationError("budgets must be strictly increasing")
    return budgets


def build_algorithm(regime: str, N: float, alpha: float, eps: float, anchor: float, cache: VectorCache, kind: str = "owen"):
    if regime == "fixed":
        plan = plan_fixed(N, alpha, eps, anchor)
        return FixedAlgorithm(plan, cache.get(plan.m, plan.s), kind)
    if regime == "ml":
        plan = plan_multilevel(N, alpha, eps, anchor)
        vectors = [cache.get(m, s) for m, s in zip(plan.ms, plan.dims)]
        return MultilevelAlgorithm(plan, vectors, kind)
    raise ConfigurationError(f"unknown regime {regime!r}; expected 'fixed' or 'ml'")


def _check_wce_bound(alg: FixedAlgorithm, f: ProductIntegrand, weights: WeightSequence) -> None:
    plan = alg.plan
    if plan.n_eff**2 * plan.s > WCE_CHECK_WORK:
        return
    trunc_integral = f.scale * f.tail(plan.s, plan.anchor)
    err = abs(trunc_integral - alg.unscrambled_estimate(f))
    bound = math.sqrt(wce_squared(alg.points, weights, plan.s)) * f.truncated_norm(plan.s, plan.anchor)
    if err > bound * (1 + 1e-9) + 1e-15:
        raise AssertionError(f"unscrambled error {err:.3e} exceeds worst-case bound {bound:.3e} at N={plan.N}")


def sweep(
    regime: str,
    budgets: Sequence[float],
    alpha: float,
    eps: float,
    anchor: float = 0.5,
    shape: str = "linear",
    R: int = DEFAULT_REPLICATES,
    master_seed: int = 0,
    criterion: str = "auto",
    search: str | None = None,
    c: float = 1.0,
    check_wce: bool = True,
) -> list[ConvergenceRecord]:
    """Error-versus-cost records, one per budget, in budget order."""
    budgets = _check_budgets(budgets)
    weights = PowerWeights(alpha, c)
    f = make_integrand(alpha, shape, c=c)
    cache = VectorCache(weights, criterion, search)
    # plan everything first so each m is constructed once, at its largest dimension
    if regime == "fixed":
        plans = [plan_fixed(N, alpha, eps, anchor) for N in budgets]
        cache.reserve((p.m, p.s) for p in plans)
    elif regime == "ml":
        plans = [plan_multilevel(N, alpha, eps, anchor) for N in budgets]
        cache.reserve(pair for p in plans for pair in zip(p.ms, p.dims))
    else:
        raise ConfigurationError(f"unknown regime {regime!r}; expected 'fixed' or 'ml'")

    records = []
    for N in budgets:
        alg = build_algorithm(regime, N, alpha, eps, anchor, cache)
        if regime == "fixed" and check_wce:
            _check_wce_bound(alg, f, weights)
        value, se = rmse(alg, f, R, master_seed)
        plan = alg.plan
        if regime == "fixed":
            n_col, s_col = str(plan.n_eff), str(plan.s)
        else:
            n_col = ";".join(map(str, plan.n_eff))
            s_col = ";".join(map(str, plan.dims))
        rec = ConvergenceRecord(
            regime, float(N), alg.cost, n_col, s_col, value, se, R, master_seed,
            float(alpha), float(eps), float(anchor), shape,
        )
        logger.info("%s N=%g cost=%d rmse=%.4e +- %.2e", regime, N, alg.cost, value, se)
        records.append(rec)
    return records


def fit_slope(records: Sequence[ConvergenceRecord]) -> tuple[float, float, float]:
    """Least-squares fit of ``log2(rmse)`` against ``log2(N)``.

    Returns ``(slope, intercept, r_squared)``.  Records with zero RMSE are
    dropped with a warning.
    """
    kept = [r for r in records if r.rmse > 0]
    if len(kept) < len(records):
        warnings.warn(f"dropped {len(records) - len(kept)} record(s) with zero rmse", stacklevel=2)
    if len(kept) < 3:
        raise InvalidArgumentError(f"need at least 3 records with positive rmse, got {len(kept)}")
    x = np.log2([r.N for r in kept])
    y = np.log2([r.rmse for r in kept])
    res = stats.linregress(x, y)
    return float(res.slope), float(res.intercept), float(res.rvalue**2)


def write_records(path, records: Sequence[ConvergenceRecord]) -> None:
    with open_output(path, newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.as_row())


def read_records(path) -> list[ConvergenceRecord]:
    types = {f.name: f.type for f in fields(ConvergenceRecord)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigurationError(f"unexpected CSV columns {reader.fieldnames}")
        for row in reader:
            kwargs = {}
            for name in CSV_COLUMNS:
                t = types[name]
                raw = row[name]
                kwargs[name] = int(raw) if t == "int" else float(raw) if t == "float" else raw
            out.append(ConvergenceRecord(**kwargs))
    return out
