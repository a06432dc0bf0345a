"""Text file formats: generating vectors, merit sidecars, points, plans and configs.

All files are ASCII and newline-terminated.  Key-value files use one
``key=value`` per line; blank lines and lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

import contextlib
import csv
from typing import Iterable, Sequence

import numpy as np

from .cbc import MeritReport
from .errors import ConfigurationError
from .gfpoly import Poly
from .infdim import FixedPlan, MultilevelPlan
from .polylattice import GeneratingVector
from .scramble import ScrambledPointSet
from .wspace import SHAPES, ExplicitWeights, PowerWeights, ProductIntegrand, WeightSequence


@contextlib.contextmanager
def open_output(target, newline=None):
    # a path, or an already-open text stream such as sys.stdout
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", encoding="ascii", newline=newline) as fh:
            yield fh


def _lines(path) -> list[tuple[int, str]]:
    with open(path, encoding="ascii") as fh:
        out = []
        for k, raw in enumerate(fh, 1):
            line = raw.strip()
            if line and not line.startswith("#"):
                out.append((k, line))
        return out


def _split(line: str, k: int, path) -> tuple[str, str]:
    key, sep, value = line.partition("=")
    if not sep:
        raise ConfigurationError(f"{path}:{k}: expected key=value, got {line!r}")
    return key.strip(), value.strip()


def _number(value: str, what: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigurationError(f"{what}: cannot parse {value!r}") from None


# ---- generating vectors -------------------------------------------------------


def write_vector(path, g: GeneratingVector) -> None:
    with open_output(path) as fh:
        fh.write(f"b={g.b}\nm={g.m}\np={g.p.hex()}\n")
        for q in g.q:
            fh.write(f"q={q.hex()}\n")


def read_vector(path) -> GeneratingVector:
    b = m = p = None
    qs: list[Poly] = []
    for k, line in _lines(path):
        key, value = _split(line, k, path)
        where = f"{path}:{k}"
        if key == "b":
            b = _number(value, where, int)
        elif key == "m":
            m = _number(value, where, int)
        elif key == "p":
            p = Poly.from_hex(value)
        elif key == "q":
            qs.append(Poly.from_hex(value))
        else:
            raise ConfigurationError(f"{where}: unknown key {key!r}")
    if b is None or m is None or p is None:
        raise ConfigurationError(f"{path}: missing b, m or p")
    if not qs:
        raise ConfigurationError(f"{path}: no q lines")
    return GeneratingVector(m, p, tuple(qs), b)


def write_merit(path, report: MeritReport) -> None:
    with open_output(path, newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("dimension", "q_hex", "e2"))
        for j, (q, e2) in enumerate(zip(report.q, report.e2), 1):
            writer.writerow((j, q.hex(), repr(float(e2))))


def read_merit(path) -> list[tuple[int, Poly, float]]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["dimension"]), Poly.from_hex(r["q_hex"]), float(r["e2"])) for r in reader]


# ---- points --------------------------------------------------------------------


def write_points(path, points, header: Iterable[str] = ()) -> None:
    """Write one point per row; ``%.17g`` round-trips every double exactly."""
    x = points.values if hasattr(points, "values") else np.asarray(points, dtype=np.float64)
    with open_output(path) as fh:
        for line in header:
            fh.write(f"# {line}\n")
        np.savetxt(fh, np.atleast_2d(x), fmt="%.17g", delimiter=",")


def scramble_header(sp: ScrambledPointSet) -> list[str]:
    spec = sp.spec
    return [f"kind={spec.kind} depth={spec.depth} seed={spec.seed} replicate_id={spec.replicate_id}"]


def read_points(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#", dtype=np.float64))


# ---- plans ---------------------------------------------------------------------


def _opt(value) -> str:
    return "" if value is None else repr(float(value))


def write_plan(path, plan: FixedPlan | MultilevelPlan) -> None:
    kind = "fixed" if isinstance(plan, FixedPlan) else "ml"
    lines = [
        f"type={kind}",
        f"N={plan.N!r}",
        f"alpha={_opt(plan.alpha)}",
        f"eps={_opt(plan.eps)}",
        f"anchor={plan.anchor!r}",
    ]
    if kind == "fixed":
        lines += [f"n={plan.n}", f"s={plan.s}"]
    else:
        lines += [f"level {l}: s={s} n={n}" for l, (s, n) in enumerate(zip(plan.dims, plan.points), 1)]
    with open_output(path) as fh:
        fh.write("\n".join(lines) + "\n")


def _level_line(line: str, k: int, path) -> tuple[int, int, int]:
    head, _, rest = line.partition(":")
    try:
        level = int(head.split()[1])
        kv = dict(item.split("=", 1) for item in rest.split())
        return level, int(kv["s"]), int(kv["n"])
    except (IndexError, KeyError, ValueError):
        raise ConfigurationError(f"{path}:{k}: bad level line {line!r}") from None


def read_plan(path) -> FixedPlan | MultilevelPlan:
    meta: dict[str, str] = {}
    levels: list[tuple[int, int, int]] = []
    for k, line in _lines(path):
        if line.startswith("level"):
            levels.append(_level_line(line, k, path))
            continue
        key, value = _split(line, k, path)
        if key not in {"type", "N", "alpha", "eps", "anchor", "n", "s"}:
            raise ConfigurationError(f"{path}:{k}: unknown key {key!r}")
        meta[key] = value
    kind = meta.get("type")
    if kind not in ("fixed", "ml"):
        raise ConfigurationError(f"{path}: type must be 'fixed' or 'ml', got {kind!r}")
    if "N" not in meta:
        raise ConfigurationError(f"{path}: missing N")
    N = _number(meta["N"], f"{path}: N")
    anchor = _number(meta.get("anchor", "0.5"), f"{path}: anchor")
    alpha = _number(meta["alpha"], f"{path}: alpha") if meta.get("alpha") else None
    eps = _number(meta["eps"], f"{path}: eps") if meta.get("eps") else None
    if kind == "fixed":
        if "n" not in meta or "s" not in meta:
            raise ConfigurationError(f"{path}: fixed plan needs n and s")
        n = _number(meta["n"], f"{path}: n", int)
        s = _number(meta["s"], f"{path}: s", int)
        return FixedPlan(N, n, s, anchor, alpha, eps)
    if not levels:
        raise ConfigurationError(f"{path}: multilevel plan has no level lines")
    levels.sort()
    if [l for l, _, _ in levels] != list(range(1, len(levels) + 1)):
        raise ConfigurationError(f"{path}: levels must be numbered 1..L")
    return MultilevelPlan(N, tuple(s for _, s, _ in levels), tuple(n for _, _, n in levels), anchor, alpha, eps)


# ---- weight and integrand configuration -----------------------------------------


def parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse number list {text!r}") from None


def read_config(path) -> dict[str, str]:
    """Key-value configuration block (``alpha``, ``cscale``, ``gamma``, ``shape``, ``beta``)."""
    allowed = {"alpha", "cscale", "gamma", "shape", "beta"}
    out = {}
    for k, line in _lines(path):
        key, value = _split(line, k, path)
        if key not in allowed:
            raise ConfigurationError(f"{path}:{k}: unknown key {key!r}")
        out[key] = value
    return out


def weights_from_config(alpha: float | None = None, cscale: float = 1.0, gamma: Sequence[float] | None = None) -> WeightSequence:
    if gamma is not None:
        if alpha is not None:
            raise ConfigurationError("give either alpha or gamma, not both")
        return ExplicitWeights(gamma)
    if alpha is None:
        raise ConfigurationError("weights need alpha or gamma")
    return PowerWeights(alpha, cscale)


def integrand_from_config(weights: WeightSequence, shape: str = "linear", beta: "float | Sequence[float]" = 1.0) -> ProductIntegrand:
    if shape not in SHAPES:
        raise ConfigurationError(f"shape must be one of {SHAPES}, got {shape!r}")
    if not np.isscalar(beta):
        beta = tuple(float(b) for b in beta)
    return ProductIntegrand(weights, shape, beta).normalized()
