"""Scalar backends.

Exact scalars are Gaussian rationals (elements of ``QQ_I`` from sympy's
polynomial domains, backed by gmpy2 ``mpq``).  Approximate scalars are plain
Python ``complex``.  Containers never mix the two: code paths pick a backend
by looking at the entries they receive.

Note that ``QQ_I(0, 0) == 0`` is False in sympy, so zero tests always go
through :func:`is_zero`.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Any

import gmpy2
from sympy.polys.domains import QQ_I

GaussianRational = type(QQ_I(0, 0))

ZERO = QQ_I(0, 0)
ONE = QQ_I(1, 0)
I_UNIT = QQ_I(0, 1)

DEFAULT_TOL = 1e-9


def _mpq(value: Any) -> Any:
    if isinstance(value, Fraction):
        return gmpy2.mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return gmpy2.mpq(value.strip())
    if isinstance(value, (int, type(gmpy2.mpq(0)), type(gmpy2.mpz(0)))):
        return gmpy2.mpq(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def exact(value: Any) -> GaussianRational:
    """Convert ``value`` to an exact Gaussian rational.

    Accepts ints, ``Fraction``, ``mpq``, strings like ``"-3/4"``, existing
    Gaussian rationals, and ``{"re": ..., "im": ...}`` mappings.
    """
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, dict):
        return QQ_I(_mpq(value.get("re", 0)), _mpq(value.get("im", 0)))
    if isinstance(value, (float, complex)):
        raise TypeError(f"{value!r} is not exact")
    return QQ_I(_mpq(value), gmpy2.mpq(0))


def is_exact(value: Any) -> bool:
    return isinstance(value, GaussianRational)


def to_complex(value: Any) -> complex:
    if isinstance(value, GaussianRational):
        return complex(float(value.x), float(value.y))
    return complex(value)


def is_zero(value: Any, tol: float | None = None) -> bool:
    if isinstance(value, GaussianRational):
        return not value
    return abs(value) <= (DEFAULT_TOL if tol is None else tol)


def is_real(value: GaussianRational) -> bool:
    return not value.y


def format_exact(value: GaussianRational) -> str | dict[str, str]:
    """Serialize an exact scalar as ``"num/den"`` or a ``{"re", "im"}`` dict."""

    def rat(q) -> str:
        q = gmpy2.mpq(q)
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"

    if not value.y:
        return rat(value.x)
    return {"re": rat(value.x), "im": rat(value.y)}


def format_scalar(value: Any) -> Any:
    if isinstance(value, GaussianRational):
        return format_exact(value)
    z = complex(value)
    return {"re": repr(z.real), "im": repr(z.imag)}


def random_rational(rng: random.Random, bound: int = 9) -> GaussianRational:
    """Numerator uniform in [-bound, bound], denominator in the same range minus 0."""
    num = rng.randint(-bound, bound)
    den = 0
    while den == 0:
        den = rng.randint(-bound, bound)
    return QQ_I(gmpy2.mpq(num, den), gmpy2.mpq(0))


def random_nonzero_rational(rng: random.Random, bound: int = 9) -> GaussianRational:
    while True:
        q = random_rational(rng, bound)
        if q:
            return q
