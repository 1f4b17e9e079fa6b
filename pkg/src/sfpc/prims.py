"""Measurable partial primitives and randomised probability kernels.

A primitive ``f : R^n -> R`` is partial: :func:`prim_apply` returns ``None``
off its domain, and the evaluator gives such traces measure zero.  A kernel
``k : R^n ~> R`` is represented by its randomiser, a primitive of arity
``n + 1`` whose last argument is a uniform draw; pushing the uniform
distribution forward through it yields the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

__all__ = [
    "PrimSpec",
    "KernelSpec",
    "PrimitiveArityError",
    "builtin_registry",
    "lookup",
    "prim_apply",
    "randomize_apply",
    "normal_cdf",
    "normal_ppf",
]


class PrimitiveArityError(Exception):
    """A primitive was applied to the wrong number of arguments."""


@dataclass(frozen=True)
class PrimSpec:
    name: str
    arity: int
    fn: Callable[..., float]
    domain: str = "R^n"

    def __call__(self, *args: float) -> float | None:
        return prim_apply(self, args)


@dataclass(frozen=True)
class KernelSpec:
    name: str
    arity: int
    randomizer: PrimSpec
    doc: str = ""

    @property
    def randomizer_name(self) -> str:
        return self.randomizer.name


# ---------------------------------------------------------------------------
# Standard normal CDF and its inverse
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error below 1.15e-9.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549671010115562e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_ppf(u: float) -> float:
    """Inverse of the standard normal CDF on the open interval (0, 1).

    Acklam's approximation followed by one Halley correction step, which
    brings the result to near machine precision.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"normal_ppf requires 0 < u < 1, got {u!r}")
    if u < _P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif u <= 1.0 - _P_LOW:
        q = u - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log1p(-u))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Halley step against the erfc-based CDF
    e = normal_cdf(x) - u
    step = e * _SQRT2PI * math.exp(0.5 * x * x)
    return x - step / (1.0 + 0.5 * x * step)


# ---------------------------------------------------------------------------
# Primitive implementations.  Raising ValueError/ZeroDivisionError/OverflowError
# signals "undefined here"; prim_apply turns that into None.
# ---------------------------------------------------------------------------


def _div(x, y):
    return x / y


def _log(x):
    if x <= 0:
        raise ValueError("log domain")
    return math.log(x)


def _sqrt(x):
    if x < 0:
        raise ValueError("sqrt domain")
    return math.sqrt(x)


def _pow(x, y):
    return math.pow(x, y)


def _normal_pdf(x, mu, sigma):
    if not sigma > 0:
        raise ValueError("normal_pdf needs sigma > 0")
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (sigma * _SQRT2PI)


def _randomize_normal(mu, sigma, u):
    if sigma < 0:
        raise ValueError("normal_rng needs sigma >= 0")
    return mu + sigma * normal_ppf(u)


def _randomize_uniform(a, b, u):
    if not a <= b:
        raise ValueError("uniform_rng needs a <= b")
    return a + (b - a) * u


def _randomize_bernoulli(p, u):
    if not 0.0 <= p <= 1.0:
        raise ValueError("bernoulli_rng needs 0 <= p <= 1")
    return 1.0 if u < p else 0.0


def _randomize_exponential(rate, u):
    if not rate > 0:
        raise ValueError("exponential_rng needs rate > 0")
    return -math.log1p(-u) / rate


_PRIMS = [
    PrimSpec("add", 2, lambda x, y: x + y),
    PrimSpec("sub", 2, lambda x, y: x - y),
    PrimSpec("mul", 2, lambda x, y: x * y),
    PrimSpec("div", 2, _div, "y != 0"),
    PrimSpec("neg", 1, lambda x: -x),
    PrimSpec("abs", 1, abs),
    PrimSpec("exp", 1, math.exp, "result finite"),
    PrimSpec("log", 1, _log, "x > 0"),
    PrimSpec("sqrt", 1, _sqrt, "x >= 0"),
    PrimSpec("pow", 2, _pow, "real-valued x^y"),
    PrimSpec("min", 2, min),
    PrimSpec("max", 2, max),
    PrimSpec("leq01", 2, lambda x, y: 1.0 if x <= y else 0.0, "1 if x <= y else 0"),
    PrimSpec("lt01", 2, lambda x, y: 1.0 if x < y else 0.0, "1 if x < y else 0"),
    PrimSpec("eq01", 2, lambda x, y: 1.0 if x == y else 0.0, "1 if x == y else 0"),
    PrimSpec("normal_pdf", 3, _normal_pdf, "sigma > 0; density of N(mu, sigma) at x"),
]

_KERNELS = [
    KernelSpec("normal_rng", 2,
               PrimSpec("randomize_normal", 3, _randomize_normal, "sigma >= 0, 0 < u < 1"),
               "N(mu, sigma) via mu + sigma * inverse-normal-cdf(u)"),
    KernelSpec("uniform_rng", 2,
               PrimSpec("randomize_uniform", 3, _randomize_uniform, "a <= b"),
               "U[a, b] via a + (b - a) u"),
    KernelSpec("bernoulli_rng", 1,
               PrimSpec("randomize_bernoulli", 2, _randomize_bernoulli, "0 <= p <= 1"),
               "Bernoulli(p) via [u < p]"),
    KernelSpec("exponential_rng", 1,
               PrimSpec("randomize_exponential", 2, _randomize_exponential, "rate > 0"),
               "Exp(rate) via -log(1 - u) / rate"),
]


def _build() -> Mapping[str, PrimSpec | KernelSpec]:
    table: dict[str, PrimSpec | KernelSpec] = {}
    for p in _PRIMS:
        table[p.name] = p
    for k in _KERNELS:
        table[k.name] = k
        table[k.randomizer.name] = k.randomizer
    return MappingProxyType(table)


_REGISTRY = _build()


def builtin_registry() -> Mapping[str, PrimSpec | KernelSpec]:
    """The fixed, read-only table of primitives and kernels."""
    return _REGISTRY


def lookup(name: str) -> PrimSpec | KernelSpec | None:
    return _REGISTRY.get(name)


def prim_apply(p: PrimSpec, args: Sequence[float]) -> float | None:
    """Apply ``p``; ``None`` means the arguments lie outside its domain."""
    if len(args) != p.arity:
        raise PrimitiveArityError(f"{p.name} expects {p.arity} arguments, got {len(args)}")
    try:
        result = p.fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError):
        return None
    result = float(result)
    if not math.isfinite(result):
        return None
    return result


def randomize_apply(k: KernelSpec, params: Sequence[float], u: float) -> float | None:
    if len(params) != k.arity:
        raise PrimitiveArityError(f"{k.name} expects {k.arity} parameters, got {len(params)}")
    return prim_apply(k.randomizer, [*params, u])
