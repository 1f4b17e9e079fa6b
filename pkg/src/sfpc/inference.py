"""Self-normalised importance sampling over the weighted evaluator."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from sfpc.evaluator import (
    DEFAULT_FUEL, Converged, EvalOutcome, Fresh, MeasureZero, derive_seed, eval_indexed,
    with_deep_stack,
)
from sfpc.printer import pretty_print
from sfpc.syntax import RealLit

ZERO_WEIGHT_DROPPED = "zero-weight-dropped"

Runner = Callable[[object, int, Fresh], EvalOutcome]


@dataclass(frozen=True)
class WeightedSample:
    index: int
    weight: float
    value: object
    draws: tuple[float, ...] = ()
    clamped: bool = False


@dataclass
class WeightedSampleSet:
    """Converged samples plus counts of everything else.

    ``len(samples) + sum(zero_counts.values()) == n`` always holds; zero-weight
    samples beyond ``zero_weight_cap`` are counted under
    ``ZERO_WEIGHT_DROPPED`` instead of being stored.
    """

    samples: list[WeightedSample]
    zero_counts: dict[str, int]
    n: int
    seed: int
    fuel_cap: int

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.samples], dtype=float)

    @property
    def values(self) -> list:
        return [s.value for s in self.samples]

    @property
    def clamped(self) -> bool:
        return any(s.clamped for s in self.samples)

    @property
    def total_weight(self) -> float:
        return math.fsum(s.weight for s in self.samples)

    def check(self) -> None:
        counted = len(self.samples) + sum(self.zero_counts.values())
        if counted != self.n:
            raise AssertionError(f"sample set accounts for {counted} of {self.n} traces")


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("SFPC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"SFPC_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _run_chunk(t, start: int, stop: int, seed: int, fuel_cap: int, runner) -> list[EvalOutcome]:
    def work():
        return [runner(t, fuel_cap, Fresh(derive_seed(seed, i))) for i in range(start, stop)]

    return with_deep_stack(work)


def run_outcomes(t, n: int, seed: int = 0, fuel_cap: int = DEFAULT_FUEL,
                 workers: int | None = None, runner: Runner = eval_indexed) -> list[EvalOutcome]:
    """Outcomes of traces ``0..n-1``, in index order, whatever the worker count."""
    workers = min(resolve_workers(workers), max(1, n))
    if workers == 1 or n < 256:
        return _run_chunk(t, 0, n, seed, fuel_cap, runner)
    bounds = np.linspace(0, n, workers * 4 + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, t, int(a), int(b), seed, fuel_cap, runner)
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        out: list[EvalOutcome] = []
        for fut in futures:
            out.extend(fut.result())
    return out


def run_importance(t, n: int, seed: int = 0, fuel_cap: int = DEFAULT_FUEL, *,
                   workers: int | None = None, zero_weight_cap: int | None = None,
                   runner: Runner = eval_indexed) -> WeightedSampleSet:
    """Evaluate ``n`` independent traces with seeds ``derive_seed(seed, i)``.

    ``runner`` defaults to the SFPC evaluator; pass
    ``evaluator.church_eval_direct`` to sample a Church term directly.
    """
    if n < 0:
        raise ValueError("number of samples must be non-negative")
    outcomes = run_outcomes(t, n, seed, fuel_cap, workers, runner)
    samples: list[WeightedSample] = []
    zero_counts: dict[str, int] = {}
    zero_kept = 0
    for i, out in enumerate(outcomes):
        if isinstance(out, MeasureZero):
            zero_counts[out.reason] = zero_counts.get(out.reason, 0) + 1
            continue
        if out.weight == 0.0:
            if zero_weight_cap is not None and zero_kept >= zero_weight_cap:
                zero_counts[ZERO_WEIGHT_DROPPED] = zero_counts.get(ZERO_WEIGHT_DROPPED, 0) + 1
                continue
            zero_kept += 1
        samples.append(WeightedSample(i, out.weight, out.value, out.trace.draws, out.clamped))
    ws = WeightedSampleSet(samples, zero_counts, n, seed, fuel_cap)
    ws.check()
    return ws


# --------------------------------------------------------------------------
# Normalisation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Bottom:
    """Zero total measure."""


@dataclass(frozen=True)
class Top:
    """Infinite total measure, detected as a clamped weight overflow."""


@dataclass(frozen=True)
class Posterior:
    z_hat: float
    weights: tuple[float, ...]
    values: tuple
    source: WeightedSampleSet = field(compare=False, repr=False)


NormalizationResult = Bottom | Top | Posterior


def normalize(ws: WeightedSampleSet) -> NormalizationResult:
    if ws.clamped:
        return Top()
    total = ws.total_weight
    if total == 0.0:
        return Bottom()
    return Posterior(total / ws.n, tuple(s.weight / total for s in ws.samples),
                     tuple(ws.values), ws)


# --------------------------------------------------------------------------
# Summaries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    estimates: dict[str, float]
    ess: float
    z_hat: float
    n: int
    converged: int


def real_of(v) -> float:
    if isinstance(v, RealLit):
        return v.value
    if isinstance(v, (int, float)):
        return float(v)
    value = getattr(v, "value", None)  # Church reals
    if isinstance(value, float):
        return value
    raise TypeError(f"moment statistics need Real results, got {pretty_value(v)}")


def effective_sample_size(weights: Iterable[float]) -> float:
    w = np.asarray(list(weights), dtype=float)
    sq = float(np.dot(w, w))
    return 0.0 if sq == 0.0 else float(w.sum()) ** 2 / sq


def summarize(ws: WeightedSampleSet,
              test_functions: Mapping[str, Callable[[float], float]] | None = None) -> Summary:
    """Self-normalised estimates of ``E[f]`` for each test function, plus ESS.

    Without ``test_functions`` the result carries ``mean`` and ``sd`` of a
    Real-valued program.
    """
    w = ws.weights
    total = float(w.sum())
    ess = effective_sample_size(w)
    z_hat = math.fsum(w) / ws.n if ws.n else 0.0
    estimates: dict[str, float] = {}
    if total > 0.0:
        xs = [real_of(v) for v in ws.values]
        total = math.fsum(w)

        def expect(fx) -> float:
            return math.fsum(wi * y for wi, y in zip(w, fx)) / total

        if test_functions is None:
            mean = expect(xs)
            estimates["mean"] = mean
            estimates["sd"] = math.sqrt(max(expect([(x - mean) ** 2 for x in xs]), 0.0))
        else:
            for name, f in test_functions.items():
                estimates[name] = expect([f(x) for x in xs])
    return Summary(estimates, ess, z_hat, ws.n, len(ws.samples))


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def pretty_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, RealLit):
        return repr(v.value)
    try:
        return pretty_print(v)
    except TypeError:
        from sfpc.church import pretty_church

        return pretty_church(v)


def _weighted_quantile(xs: np.ndarray, p: np.ndarray, q: float) -> float:
    order = np.argsort(xs, kind="stable")
    cdf = np.cumsum(p[order])
    i = int(np.searchsorted(cdf, q * cdf[-1], side="left"))
    return float(xs[order][min(i, len(xs) - 1)])


def histogram_edges(xs: np.ndarray, p: np.ndarray, bins: int | None = None,
                    max_bins: int = 1000) -> np.ndarray:
    """Bin edges over the support of positive-mass samples.

    The default width is Freedman-Diaconis with the weighted interquartile
    range and the effective sample size in place of ``n``.
    """
    lo, hi = float(xs.min()), float(xs.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    if bins is None:
        iqr = _weighted_quantile(xs, p, 0.75) - _weighted_quantile(xs, p, 0.25)
        ess = effective_sample_size(p)
        width = 2.0 * iqr / ess ** (1.0 / 3.0) if ess > 0 else 0.0
        bins = max_bins if width <= 0 else int(math.ceil((hi - lo) / width))
        bins = min(max(bins, 1), max_bins)
    return np.linspace(lo, hi, bins + 1)


def histogram(result: WeightedSampleSet | Posterior, bins: int | None = None):
    """``(edges, masses)`` of the normalised weighted empirical distribution."""
    if isinstance(result, WeightedSampleSet):
        post = normalize(result)
        if not isinstance(post, Posterior):
            raise ValueError(f"cannot build a histogram of a {type(post).__name__} result")
        result = post
    xs = np.array([real_of(v) for v in result.values], dtype=float)
    p = np.array(result.weights, dtype=float)
    keep = p > 0
    xs, p = xs[keep], p[keep]
    edges = histogram_edges(xs, p, bins)
    masses, _ = np.histogram(xs, bins=edges, weights=p)
    return edges, masses / masses.sum()


def emit(result: WeightedSampleSet | Posterior, path: str | os.PathLike, format: str = "csv",
         bins: int | None = None) -> None:
    """Write samples as CSV (``weight,value``) or a normalised histogram."""
    if format not in ("csv", "hist", "histogram"):
        raise ValueError(f"unknown output format {format!r}")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if format == "csv":
                if isinstance(result, Posterior):
                    rows = zip(result.weights, result.values)
                else:
                    rows = ((s.weight, s.value) for s in result.samples)
                rows = list(rows)
                real = all(isinstance(v, RealLit) for _, v in rows)
                writer.writerow(["weight", "value" if real else "value_text"])
                for w, v in rows:
                    writer.writerow([repr(float(w)), pretty_value(v)])
            else:
                edges, masses = histogram(result, bins)
                writer.writerow(["bin_left", "bin_right", "normalized_mass"])
                for a, b, m in zip(edges[:-1], edges[1:], masses):
                    writer.writerow([repr(float(a)), repr(float(b)), repr(float(m))])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path: str | os.PathLike) -> list[tuple[float, str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [(float(w), v) for w, v in reader]


def dump_traces(t, n: int, path: str | os.PathLike, seed: int = 0,
                fuel_cap: int = DEFAULT_FUEL, *, workers: int | None = None,
                runner: Runner = eval_indexed) -> None:
    """One line per trace: ``trace_index,weight,value_text,draws...``."""
    outcomes = run_outcomes(t, n, seed, fuel_cap, workers, runner)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for i, out in enumerate(outcomes):
            if isinstance(out, Converged):
                row = [i, repr(out.weight), pretty_value(out.value)]
            else:
                row = [i, repr(0.0), f"<{out.reason}>"]
            writer.writerow(row + [repr(u) for u in out.trace.draws])


__all__ = [
    "ZERO_WEIGHT_DROPPED", "WeightedSample", "WeightedSampleSet", "run_outcomes",
    "run_importance", "resolve_workers", "Bottom", "Top", "Posterior", "normalize",
    "Summary", "summarize", "effective_sample_size", "real_of", "pretty_value",
    "histogram_edges", "histogram", "emit", "read_csv", "dump_traces",
]
