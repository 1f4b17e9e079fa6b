"""Weighted big-step evaluation with an explicit evaluation index.

``eval_indexed(t, n, rng)`` implements the relation ``t ⇓n (w, v)``.  At
index 0 nothing converges.  Only the four eliminators (application and
pair, variant and roll matches) continue their substituted bodies at
``n - 1``; every other form evaluates its subterms at ``n``.  Each ``sample``
consumes one uniform draw from a :class:`RandomSource`, and ``score(r)``
multiplies the aggregate weight by ``|r|``.

Evaluation is substitution based and recursive.  Deep recursion runs on a
dedicated thread with a large stack (see :func:`with_deep_stack`).
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

from sfpc import prims
from sfpc.church import CApp, CFactor, CIfz, CKernel, CLam, CReal, CVar, ChurchTerm
from sfpc.syntax import (
    App, Inj, IfZero, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant, Pair, Prim,
    RealLit, Roll, Sample, Score, Term, UnitVal, Var, subst_closed,
)

PRIM_UNDEFINED = "prim-undefined"
FUEL_EXHAUSTED = "fuel-exhausted"
MAX_WEIGHT = sys.float_info.max
DEFAULT_FUEL = 10_000

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-trace seed ``mix(seed, index)``; independent of scheduling."""
    return _mix64((_mix64(seed & _MASK) + (index + 1) * _GOLDEN) & _MASK)


# --------------------------------------------------------------------------
# Randomness
# --------------------------------------------------------------------------


class ReplayExhausted(Exception):
    """A replayed evaluation asked for more draws than were recorded."""


@dataclass(frozen=True)
class Trace:
    draws: tuple[float, ...] = ()
    cursor: int = 0

    def __len__(self) -> int:
        return len(self.draws)


class RandomSource:
    def draw(self) -> float:
        raise NotImplementedError


class Fresh(RandomSource):
    """Counter-based SplitMix64 stream: draw ``i`` depends only on ``(seed, i)``."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self.counter = 0

    def draw(self) -> float:
        self.counter += 1
        z = _mix64((self.seed + self.counter * _GOLDEN) & _MASK)
        return (z >> 11) * (1.0 / 9007199254740992.0)


class Replay(RandomSource):
    def __init__(self, draws: Trace | Sequence[float]):
        if isinstance(draws, Trace):
            draws = draws.draws
        for u in draws:
            if not 0.0 <= u < 1.0:
                raise ValueError(f"replayed draw {u!r} is outside [0, 1)")
        self.draws = tuple(float(u) for u in draws)
        self.pos = 0

    def draw(self) -> float:
        if self.pos >= len(self.draws):
            raise ReplayExhausted(f"trace has only {len(self.draws)} draws")
        u = self.draws[self.pos]
        self.pos += 1
        return u


# --------------------------------------------------------------------------
# Outcomes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Converged:
    weight: float
    value: object
    trace: Trace
    clamped: bool = False
    scores: tuple[float, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class MeasureZero:
    reason: str
    trace: Trace = Trace()
    weight = 0.0


EvalOutcome = Converged | MeasureZero


class EvaluationError(Exception):
    """Internal invariant violation: open or ill-typed term reached the evaluator."""


class _Diverge(Exception):
    def __init__(self, reason: str):
        self.reason = reason


# --------------------------------------------------------------------------
# Deep recursion support
# --------------------------------------------------------------------------

_STACK_BYTES = 512 * 1024 * 1024
_RECURSION_LIMIT = 1_000_000
_deep = threading.local()

# The limit is process wide; deep evaluations only happen on the big-stack thread.
if sys.getrecursionlimit() < _RECURSION_LIMIT:
    sys.setrecursionlimit(_RECURSION_LIMIT)

R = TypeVar("R")


def with_deep_stack(fn: Callable[..., R], *args, **kwargs) -> R:
    """Run ``fn`` on a thread with a large C stack and raised recursion limit."""
    if getattr(_deep, "active", False):
        return fn(*args, **kwargs)
    box: dict = {}

    def target():
        _deep.active = True
        try:
            box["result"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    old_size = threading.stack_size()
    threading.stack_size(_STACK_BYTES)
    try:
        worker = threading.Thread(target=target, name="sfpc-eval")
        worker.start()
    finally:
        threading.stack_size(old_size)
    worker.join()
    if "error" in box:
        raise box["error"]
    return box["result"]


# --------------------------------------------------------------------------
# SFPC evaluator
# --------------------------------------------------------------------------


class _Machine:
    __slots__ = ("rng", "draws", "weight", "clamped", "scores", "table")

    def __init__(self, rng: RandomSource):
        self.rng = rng
        self.draws: list[float] = []
        self.weight = 1.0
        self.clamped = False
        self.scores: list[float] = []
        self.table = {
            RealLit: self._value, UnitVal: self._value, Lam: self._value,
            Var: self._var, Prim: self._prim, Sample: self._sample, Score: self._score,
            IfZero: self._ifz, Pair: self._pair, Inj: self._inj, Roll: self._roll,
            App: self._app, MatchUnit: self._match_unit, MatchPair: self._match_pair,
            MatchVariant: self._match_variant, MatchRoll: self._match_roll,
        }

    def ev(self, t: Term, n: int) -> Term:
        if n <= 0:
            raise _Diverge(FUEL_EXHAUSTED)
        try:
            rule = self.table[type(t)]
        except KeyError:
            raise EvaluationError(f"cannot evaluate {t!r}") from None
        return rule(t, n)

    def _value(self, t, n):
        return t

    def _var(self, t, n):
        raise EvaluationError(f"free variable {t.name!r} during evaluation")

    def _real(self, t, n, what: str) -> float:
        v = self.ev(t, n)
        if type(v) is not RealLit:
            raise EvaluationError(f"{what} evaluated to a non-real {v!r}")
        return v.value

    def _prim(self, t, n):
        spec = prims.lookup(t.name)
        if not isinstance(spec, prims.PrimSpec):
            raise EvaluationError(f"{t.name!r} is not a primitive")
        args = [self._real(a, n, f"argument of {t.name}") for a in t.args]
        r = prims.prim_apply(spec, args)
        if r is None:
            raise _Diverge(PRIM_UNDEFINED)
        return RealLit(r)

    def _sample(self, t, n):
        u = self.rng.draw()
        self.draws.append(u)
        return RealLit(u)

    def _score(self, t, n):
        r = self._real(t.arg, n, "score argument")
        self.multiply(abs(r))
        return UnitVal()

    def multiply(self, factor: float) -> None:
        self.scores.append(factor)
        w = self.weight * factor
        if w > MAX_WEIGHT:
            w = MAX_WEIGHT
            self.clamped = True
        self.weight = w

    def _ifz(self, t, n):
        c = self._real(t.cond, n, "ifz scrutinee")
        return self.ev(t.zero if c == 0.0 else t.nonzero, n)

    def _pair(self, t, n):
        return Pair(self.ev(t.fst, n), self.ev(t.snd, n))

    def _inj(self, t, n):
        return Inj(t.ty, t.label, self.ev(t.arg, n))

    def _roll(self, t, n):
        return Roll(t.ty, self.ev(t.arg, n))

    def _app(self, t, n):
        f = self.ev(t.fn, n)
        v = self.ev(t.arg, n)
        if type(f) is not Lam:
            raise EvaluationError(f"applying a non-function {f!r}")
        return self.ev(subst_closed(f.body, f.var, v), n - 1)

    def _match_unit(self, t, n):
        self.ev(t.scrut, n)
        return self.ev(t.body, n)

    def _match_pair(self, t, n):
        v = self.ev(t.scrut, n)
        if type(v) is not Pair:
            raise EvaluationError(f"pair match on {v!r}")
        body = subst_closed(t.body, t.snd, v.snd)
        if t.fst != t.snd:
            body = subst_closed(body, t.fst, v.fst)
        return self.ev(body, n - 1)

    def _match_variant(self, t, n):
        v = self.ev(t.scrut, n)
        if type(v) is not Inj:
            raise EvaluationError(f"variant match on {v!r}")
        br = t.branch(v.label)
        if br is None:
            raise EvaluationError(f"no branch for label {v.label!r}")
        return self.ev(subst_closed(br.body, br.var, v.arg), n - 1)

    def _match_roll(self, t, n):
        v = self.ev(t.scrut, n)
        if type(v) is not Roll:
            raise EvaluationError(f"roll match on {v!r}")
        return self.ev(subst_closed(t.body, t.var, v.arg), n - 1)

    def trace(self) -> Trace:
        return Trace(tuple(self.draws), len(self.draws))


def _run(machine, t, n: int) -> EvalOutcome:
    try:
        v = machine.ev(t, n)
    except _Diverge as d:
        return MeasureZero(d.reason, machine.trace())
    except RecursionError:
        raise EvaluationError("evaluation nested too deeply for the interpreter stack") from None
    return Converged(machine.weight, v, machine.trace(), machine.clamped, tuple(machine.scores))


def eval_indexed(t: Term, n: int, rng: RandomSource) -> EvalOutcome:
    """Evaluate closed, well-typed ``t`` at index ``n``."""
    return with_deep_stack(_run, _Machine(rng), t, n)


def eval(t: Term, fuel_cap: int = DEFAULT_FUEL, rng: RandomSource | None = None) -> EvalOutcome:
    """Approximate the limit over all indices by a fixed cap.

    A ``Converged`` result is final; ``MeasureZero(fuel-exhausted)`` only
    means no convergence within ``fuel_cap``.
    """
    return eval_indexed(t, fuel_cap, rng if rng is not None else Fresh(0))


def eval_traced(t: Term, fuel_cap: int = DEFAULT_FUEL, seed: int = 0) -> EvalOutcome:
    """Evaluate with a fresh stream; replaying ``outcome.trace`` reproduces it."""
    return eval_indexed(t, fuel_cap, Fresh(seed))


# --------------------------------------------------------------------------
# Direct call-by-value evaluation of Idealised Church
# --------------------------------------------------------------------------


def church_subst(t: ChurchTerm, name: str, value: ChurchTerm) -> ChurchTerm:
    """``t[name := value]`` for a closed ``value``."""
    if isinstance(t, CVar):
        return value if t.name == name else t
    if isinstance(t, CReal):
        return t
    if isinstance(t, CLam):
        return t if t.var == name else CLam(t.var, church_subst(t.body, name, value))
    if isinstance(t, CApp):
        return CApp(church_subst(t.fn, name, value), church_subst(t.arg, name, value))
    if isinstance(t, CKernel):
        return CKernel(t.name, tuple(church_subst(a, name, value) for a in t.args))
    if isinstance(t, CIfz):
        return CIfz(church_subst(t.cond, name, value), church_subst(t.zero, name, value),
                    church_subst(t.nonzero, name, value))
    if isinstance(t, CFactor):
        return CFactor(church_subst(t.arg, name, value))
    raise TypeError(f"not a Church term: {t!r}")


class _ChurchMachine(_Machine):
    """Shares the draw, weight and clamping bookkeeping with the SFPC machine."""

    __slots__ = ()

    def __init__(self, rng: RandomSource):
        super().__init__(rng)
        self.table = {
            CReal: self._value, CLam: self._value, CVar: self._cvar, CApp: self._capp,
            CKernel: self._ckernel, CIfz: self._cifz, CFactor: self._cfactor,
        }

    def _cvar(self, t, n):
        raise EvaluationError(f"free Church variable {t.name!r}")

    def _val(self, t, n) -> float:
        v = self.ev(t, n)
        if type(v) is not CReal:
            raise _Diverge(FUEL_EXHAUSTED)  # a function where a real is needed
        return v.value

    def _capp(self, t, n):
        f = self.ev(t.fn, n)
        if type(f) is not CLam:
            raise _Diverge(FUEL_EXHAUSTED)  # a real in function position
        v = self.ev(t.arg, n)
        return self.ev(church_subst(f.body, f.var, v), n - 1)

    def _ckernel(self, t, n):
        spec = prims.lookup(t.name)
        xs = [self._val(a, n) for a in t.args]
        if isinstance(spec, prims.KernelSpec):
            u = self._sample(None, n).value
            r = prims.randomize_apply(spec, xs, u)
        elif isinstance(spec, prims.PrimSpec):
            r = prims.prim_apply(spec, xs)
        else:
            raise EvaluationError(f"unknown kernel {t.name!r}")
        if r is None:
            raise _Diverge(PRIM_UNDEFINED)
        return CReal(r)

    def _cifz(self, t, n):
        c = self._val(t.cond, n)
        return self.ev(t.zero if c == 0.0 else t.nonzero, n)

    def _cfactor(self, t, n):
        r = self._val(t.arg, n)
        self.multiply(abs(r))
        return CReal(r)


def church_eval_direct(t: ChurchTerm, fuel_cap: int = DEFAULT_FUEL,
                       rng: RandomSource | None = None) -> EvalOutcome:
    """Evaluate a closed Church term call-by-value.

    Tag mismatches (applying a real, branching on a function) diverge, as the
    translation's mismatch branches do.
    """
    machine = _ChurchMachine(rng if rng is not None else Fresh(0))
    return with_deep_stack(_run, machine, t, fuel_cap)


__all__ = [
    "PRIM_UNDEFINED", "FUEL_EXHAUSTED", "MAX_WEIGHT", "DEFAULT_FUEL",
    "Trace", "RandomSource", "Fresh", "Replay", "ReplayExhausted",
    "Converged", "MeasureZero", "EvalOutcome", "EvaluationError",
    "derive_seed", "with_deep_stack", "eval_indexed", "eval", "eval_traced",
    "church_subst", "church_eval_direct",
]
