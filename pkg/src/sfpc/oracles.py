"""Deterministic ground truth and statistical comparison of programs.

Trace-cube coordinates are the draws in evaluation order.  Two programs
that differ by reordering independent draws integrate over permuted
coordinates, which the midpoint grid treats symmetrically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from sfpc import prims
from sfpc.evaluator import (
    DEFAULT_FUEL, Converged, Replay, derive_seed, eval_indexed, with_deep_stack,
)
from sfpc.inference import effective_sample_size, run_importance
from sfpc.syntax import (
    App, Function, IfZero, Inj, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant, Mu,
    Pair, Placeholder, Prim, Product, RealLit, Roll, Sample, Score, Term, Type, UnitVal,
    Variant, lambda_class_key, subst_closed, subterms, type_alpha_eq,
)
from sfpc.typecheck import infer_type

# --------------------------------------------------------------------------
# Static bound on the number of draws
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Bounded:
    d: int


@dataclass(frozen=True)
class Unbounded:
    reason: str = ""


SampleBound = Bounded | Unbounded


def _annotations(t: Term):
    for s in subterms(t):
        if isinstance(s, (Lam, Inj, Roll)):
            yield s.ty


def _types_within(ty: Type):
    yield ty
    if isinstance(ty, (Product,)):
        yield from _types_within(ty.left)
        yield from _types_within(ty.right)
    elif isinstance(ty, Function):
        yield from _types_within(ty.dom)
        yield from _types_within(ty.cod)
    elif isinstance(ty, Variant):
        for _, p in ty.cases:
            yield from _types_within(p)
    elif isinstance(ty, Mu):
        yield from _types_within(ty.body)


def _self_applicable(t: Term) -> bool:
    """Whether some annotation mentions a recursive type with a function inside.

    Only such types can encode self-application; without them every
    program terminates.
    """
    for ty in _annotations(t):
        for inner in _types_within(ty):
            if isinstance(inner, Mu) and any(isinstance(x, Function) for x in _types_within(inner.body)):
                return True
    return False


_ANY = Placeholder(0)  # an unknown real in the abstract interpreter


class _BudgetExceeded(Exception):
    pass


class _Abstract:
    """Explores every branch, treating sampled reals as unknown."""

    def __init__(self, budget: int):
        self.budget = budget
        self.max_draws = 0

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise _BudgetExceeded

    def ev(self, t: Term, k: int) -> set[tuple[int, Term]]:
        self.tick()
        if isinstance(t, (RealLit, UnitVal, Lam, Placeholder)):
            return {(k, t)}
        if isinstance(t, Sample):
            self.max_draws = max(self.max_draws, k + 1)
            return {(k + 1, _ANY)}
        if isinstance(t, Prim):
            out = set()
            for k2, args in self.seq(list(t.args), k):
                if any(a == _ANY for a in args):
                    out.add((k2, _ANY))
                    continue
                r = prims.prim_apply(prims.lookup(t.name), [a.value for a in args])
                if r is not None:
                    out.add((k2, RealLit(r)))
            return out
        if isinstance(t, Score):
            return {(k2, UnitVal()) for k2, _ in self.ev(t.arg, k)}
        if isinstance(t, IfZero):
            out = set()
            for k2, c in self.ev(t.cond, k):
                if c == _ANY or c.value == 0.0:
                    out |= self.ev(t.zero, k2)
                if c == _ANY or c.value != 0.0:
                    out |= self.ev(t.nonzero, k2)
            return out
        if isinstance(t, Pair):
            return {(k2, Pair(a, b)) for k2, (a, b) in self.seq([t.fst, t.snd], k)}
        if isinstance(t, Inj):
            return {(k2, Inj(t.ty, t.label, v)) for k2, v in self.ev(t.arg, k)}
        if isinstance(t, Roll):
            return {(k2, Roll(t.ty, v)) for k2, v in self.ev(t.arg, k)}
        if isinstance(t, App):
            out = set()
            for k2, (f, v) in self.seq([t.fn, t.arg], k):
                out |= self.ev(subst_closed(f.body, f.var, v), k2)
            return out
        if isinstance(t, MatchUnit):
            out = set()
            for k2, _ in self.ev(t.scrut, k):
                out |= self.ev(t.body, k2)
            return out
        if isinstance(t, MatchPair):
            out = set()
            for k2, v in self.ev(t.scrut, k):
                body = subst_closed(t.body, t.snd, v.snd)
                if t.fst != t.snd:
                    body = subst_closed(body, t.fst, v.fst)
                out |= self.ev(body, k2)
            return out
        if isinstance(t, MatchVariant):
            out = set()
            for k2, v in self.ev(t.scrut, k):
                br = t.branch(v.label)
                out |= self.ev(subst_closed(br.body, br.var, v.arg), k2)
            return out
        if isinstance(t, MatchRoll):
            out = set()
            for k2, v in self.ev(t.scrut, k):
                out |= self.ev(subst_closed(t.body, t.var, v.arg), k2)
            return out
        raise TypeError(f"cannot analyse {t!r}")

    def seq(self, terms: list[Term], k: int):
        """All outcomes of evaluating ``terms`` left to right."""
        states: set[tuple[int, tuple]] = {(k, ())}
        for s in terms:
            nxt = set()
            for k1, vals in states:
                for k2, v in self.ev(s, k1):
                    nxt.add((k2, vals + (v,)))
            states = nxt
        return states


def static_sample_bound(t: Term, budget: int = 200_000) -> SampleBound:
    """A conservative bound on the draws any trace of closed ``t`` consumes."""
    if _self_applicable(t):
        return Unbounded("recursive type with a function component")
    analyser = _Abstract(budget)
    try:
        with_deep_stack(analyser.ev, t, 0)
    except _BudgetExceeded:
        return Unbounded("analysis budget exhausted")
    return Bounded(analyser.max_draws)


# --------------------------------------------------------------------------
# Midpoint quadrature over the trace cube
# --------------------------------------------------------------------------


class OracleError(ValueError):
    pass


def _as_observable(v):
    return v.value if isinstance(v, RealLit) else v


def default_grid(d: int, cells: int = 1 << 14) -> int:
    return max(1, int(math.floor(cells ** (1.0 / d) + 1e-9))) if d else 1


def grid_outcomes(t: Term, m: int, fuel_cap: int = DEFAULT_FUEL, d: int | None = None):
    """Outcomes at the midpoints of the ``m^d`` grid, in lexicographic order."""
    if d is None:
        bound = static_sample_bound(t)
        if isinstance(bound, Unbounded):
            raise OracleError(f"quadrature needs a bounded number of draws ({bound.reason})")
        d = bound.d
    mids = [(i + 0.5) / m for i in range(m)]

    def work():
        return [eval_indexed(t, fuel_cap, Replay(u)) for u in itertools.product(mids, repeat=d)]

    return d, with_deep_stack(work)


def quadrature_expectation(t: Term, f: Callable = lambda x: x, m: int | None = None,
                           fuel_cap: int = DEFAULT_FUEL) -> float:
    """Midpoint rule for the integral of ``weight * f(value)`` over the trace cube.

    Real results are passed to ``f`` as floats, other results as value terms.
    """
    bound = static_sample_bound(t)
    if isinstance(bound, Unbounded):
        raise OracleError(f"quadrature needs a bounded number of draws ({bound.reason})")
    if m is None:
        m = default_grid(bound.d)
    _, outs = grid_outcomes(t, m, fuel_cap, bound.d)
    cell = 1.0 / m ** bound.d
    return math.fsum(o.weight * f(_as_observable(o.value)) * cell
                     for o in outs if isinstance(o, Converged))


# --------------------------------------------------------------------------
# Conjugate normal regression through the origin
# --------------------------------------------------------------------------


def conjugate_normal_posterior(mu0: float, sigma0: float,
                               observations: Sequence[tuple[float, float, float]]
                               ) -> tuple[float, float]:
    """Posterior of ``a ~ N(mu0, sigma0)`` given ``y ~ N(a x, sigma)`` per observation."""
    if sigma0 <= 0 or any(s <= 0 for _, _, s in observations):
        raise ValueError("standard deviations must be positive")
    precision = 1.0 / sigma0 ** 2 + math.fsum(x * x / s ** 2 for x, _, s in observations)
    weighted = mu0 / sigma0 ** 2 + math.fsum(x * y / s ** 2 for x, y, s in observations)
    return weighted / precision, precision ** -0.5


# --------------------------------------------------------------------------
# Comparing programs
# --------------------------------------------------------------------------

KS_ALPHA = 0.01
KS_C_ALPHA = math.sqrt(-math.log(KS_ALPHA / 2.0) / 2.0)
Z_CRITICAL = 2.5758293035489004  # two-sided normal quantile at 0.01
QUAD_THRESHOLD = 1e-6
N_DYADIC = 64


@dataclass(frozen=True)
class ComparisonReport:
    statistic: str
    value: float
    threshold: float
    passed: bool
    sizes: tuple
    details: tuple["ComparisonReport", ...] = field(default=())

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [f"{verdict} {self.statistic} = {self.value:.6g} (threshold {self.threshold:.6g}; "
                 f"sizes {', '.join(str(s) for s in self.sizes)})"]
        for d in self.details:
            lines.append("  " + str(d).replace("\n", "\n  "))
        return "\n".join(lines)


def _report(statistic, value, threshold, sizes, details=()) -> ComparisonReport:
    return ComparisonReport(statistic, float(value), float(threshold), bool(value <= threshold),
                            tuple(sizes), tuple(details))


class ComparisonTypeError(TypeError):
    pass


def _common_type(t1: Term, t2: Term) -> Type:
    ty1, ty2 = infer_type({}, t1), infer_type({}, t2)
    if not type_alpha_eq(ty1, ty2):
        from sfpc.printer import print_type

        raise ComparisonTypeError(
            f"programs have different types: {print_type(ty1)} vs {print_type(ty2)}")
    return ty1


def _is_real(ty: Type) -> bool:
    from sfpc.syntax import RealType

    return isinstance(ty, RealType)


def _dyadic_edges(values: list[float]) -> np.ndarray:
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    # widen slightly so the maximum falls strictly inside the last interval
    span = hi - lo
    return np.linspace(lo, hi + span * 1e-9, N_DYADIC + 1)


def _integrals_real(weighted: list[tuple[float, float]], edges: np.ndarray) -> list[float]:
    xs = np.array([x for _, x in weighted], dtype=float)
    ws = np.array([w for w, _ in weighted], dtype=float)
    idx = np.clip(np.searchsorted(edges, xs, side="right") - 1, 0, len(edges) - 2)
    out = []
    for b in range(len(edges) - 1):
        out.append(math.fsum(ws[idx == b]))
    out.append(math.fsum(ws))
    return out


def _integrals_class(weighted: list[tuple[float, object]], keys: list) -> list[float]:
    totals = {k: [] for k in keys}
    for w, v in weighted:
        totals[lambda_class_key(v)].append(w)
    return [math.fsum(totals[k]) for k in keys] + [math.fsum(w for w, _ in weighted)]


def _quad_compare(t1, t2, ty, m, fuel_cap) -> ComparisonReport:
    b1, b2 = static_sample_bound(t1), static_sample_bound(t2)
    if isinstance(b1, Unbounded) or isinstance(b2, Unbounded):
        raise OracleError("quadrature comparison needs both programs to have bounded draws")
    d = max(b1.d, b2.d)
    m = m or default_grid(d)
    cell = 1.0 / m ** d
    sides = []
    for t in (t1, t2):
        _, outs = grid_outcomes(t, m, fuel_cap, d)
        sides.append([(o.weight * cell, o.value) for o in outs if isinstance(o, Converged)])
    if _is_real(ty):
        reals = [[(w, v.value) for w, v in side] for side in sides]
        support = [x for side in reals for w, x in side if w > 0]
        edges = _dyadic_edges(support) if support else np.array([0.0, 1.0])
        i1, i2 = (_integrals_real(side, edges) for side in reals)
    else:
        keys = sorted({lambda_class_key(v) for side in sides for _, v in side}, key=repr)
        i1, i2 = (_integrals_class(side, keys) for side in sides)
    diff = max(abs(a - b) for a, b in zip(i1, i2))
    return _report("quadrature max |E1[f] - E2[f]|", diff, QUAD_THRESHOLD, (f"m={m}", f"d={d}"))


def _weighted_ks(x1, w1, x2, w2) -> float:
    xs = np.concatenate([x1, x2])
    grid = np.unique(xs)

    def cdf(x, w):
        order = np.argsort(x, kind="stable")
        xs_sorted, cum = x[order], np.cumsum(w[order])
        idx = np.searchsorted(xs_sorted, grid, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    return float(np.max(np.abs(cdf(x1, w1) - cdf(x2, w2)))) if len(grid) else 0.0


def _z_report(ws1, ws2) -> ComparisonReport:
    w1, w2 = ws1.weights, ws2.weights
    full1 = np.concatenate([w1, np.zeros(ws1.n - len(w1))])
    full2 = np.concatenate([w2, np.zeros(ws2.n - len(w2))])
    z1, z2 = full1.mean() if len(full1) else 0.0, full2.mean() if len(full2) else 0.0
    se = math.sqrt(full1.var() / max(ws1.n, 1) + full2.var() / max(ws2.n, 1))
    diff = abs(z1 - z2)
    stat = 0.0 if diff == 0.0 else (math.inf if se == 0.0 else diff / se)
    return _report("normalizing-constant z", stat, Z_CRITICAL, (ws1.n, ws2.n))


def _mc_compare(t1, t2, ty, n, seed, fuel_cap, workers) -> ComparisonReport:
    ws1 = run_importance(t1, n, seed, fuel_cap, workers=workers)
    ws2 = run_importance(t2, n, seed, fuel_cap, workers=workers)
    zrep = _z_report(ws1, ws2)
    w1, w2 = ws1.weights, ws2.weights
    tot1, tot2 = w1.sum(), w2.sum()
    if tot1 == 0.0 or tot2 == 0.0:
        both = tot1 == 0.0 and tot2 == 0.0
        shape = _report("shape (zero mass)", 0.0 if both else 1.0, 0.0, (ws1.n, ws2.n))
    else:
        p1, p2 = w1 / tot1, w2 / tot2
        e1, e2 = effective_sample_size(w1), effective_sample_size(w2)
        crit = KS_C_ALPHA * math.sqrt((e1 + e2) / (e1 * e2))
        if _is_real(ty):
            x1 = np.array([v.value for v in ws1.values])
            x2 = np.array([v.value for v in ws2.values])
            stat = _weighted_ks(x1, p1, x2, p2)
            name = "weighted KS"
        else:
            k1 = [lambda_class_key(v) for v in ws1.values]
            k2 = [lambda_class_key(v) for v in ws2.values]
            freq: dict = {}
            for k, p in zip(k1, p1):
                freq[k] = freq.get(k, 0.0) + p
            for k, p in zip(k2, p2):
                freq[k] = freq.get(k, 0.0) - p
            stat = max(abs(v) for v in freq.values())
            name = "weighted class-frequency L-inf"
        shape = _report(name, stat, crit, (f"ess={e1:.1f}", f"ess={e2:.1f}"))
    ratios = [r.value / r.threshold if r.threshold > 0 else (0.0 if r.value == 0 else math.inf)
              for r in (shape, zrep)]
    return _report("max normalised statistic", max(ratios), 1.0, (n, n), (shape, zrep))


def compare_programs(t1: Term, t2: Term, mode: str = "quad", *, m: int | None = None,
                     n: int = 100_000, seed: int = 0, fuel_cap: int = DEFAULT_FUEL,
                     workers: int | None = None) -> ComparisonReport:
    """Test whether two closed programs of the same type denote the same measure.

    ``quad`` integrates 64 dyadic-interval indicators (or lambda-class
    indicators for non-Real results) plus the total mass over the shared
    trace cube.  ``mc`` runs both programs on the same seeds and combines a
    weighted two-sample KS test with a test on the normalizing constants.
    """
    ty = _common_type(t1, t2)
    if mode in ("quad", "quadrature"):
        return _quad_compare(t1, t2, ty, m, fuel_cap)
    if mode in ("mc", "monte_carlo"):
        return _mc_compare(t1, t2, ty, n, seed, fuel_cap, workers)
    raise ValueError(f"unknown comparison mode {mode!r}")


__all__ = [
    "Bounded", "Unbounded", "SampleBound", "static_sample_bound", "OracleError",
    "grid_outcomes", "default_grid", "quadrature_expectation", "conjugate_normal_posterior",
    "ComparisonReport", "ComparisonTypeError", "compare_programs",
    "KS_ALPHA", "KS_C_ALPHA", "Z_CRITICAL", "QUAD_THRESHOLD", "N_DYADIC",
]
