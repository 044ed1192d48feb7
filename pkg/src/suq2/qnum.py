"""Exact half-integers, q-numbers and Hurwitz zeta values.

Everything here is a pure function of its arguments. The residue engine
only ever needs zeta values at a handful of real points, so the Hurwitz
implementation is a plain Euler-Maclaurin sum plus the Bernoulli closed
form at non-positive integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "HalfInt",
    "DeformParam",
    "ZetaPoleError",
    "ResidueFitError",
    "ResidueWeights",
    "PolynomialTail",
    "as_q",
    "q_number",
    "bernoulli_number",
    "bernoulli_poly",
    "hurwitz_zeta",
    "fit_level_polynomial",
    "residue_weights",
]


class ZetaPoleError(ArithmeticError):
    """Raised when the zeta function is evaluated at its pole s = 1."""


class ResidueFitError(ValueError):
    """Raised when a level sequence does not look like polynomial + rapid decay."""


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer stored as twice its value."""

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            value = Fraction(value)
        frac = Fraction(value)
        doubled = 2 * frac
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).twice - self.twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __float__(self) -> float:
        return self.twice / 2

    def __int__(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice, 2)

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


@dataclass(frozen=True)
class DeformParam:
    """The deformation parameter, 0 < q < 1.

    ``exact`` is a rational representative used by the symbolic side: a
    float such as 0.3 is read through its decimal repr so that 3/10, not
    the nearest dyadic, drives the exact computations.
    """

    q: float | Fraction

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError(f"deformation parameter must satisfy 0 < q < 1, got {self.q}")

    @property
    def value(self) -> float:
        return float(self.q)

    @property
    def exact(self) -> Fraction:
        if isinstance(self.q, Rational):
            return Fraction(self.q)
        return Fraction(repr(float(self.q)))


def as_q(q) -> DeformParam:
    return q if isinstance(q, DeformParam) else DeformParam(q)


def q_number(N, q):
    """The q-integer [N] = (q^-N - q^N) / (q^-1 - q).

    ``N`` may be a number, a HalfInt or a numpy array; ``q`` a float or
    DeformParam.
    """
    qv = as_q(q).value
    if isinstance(N, HalfInt):
        N = float(N)
    N = np.asarray(N, dtype=float) if not np.isscalar(N) else float(N)
    out = (qv ** (-N) - qv ** N) / (1.0 / qv - qv)
    return out


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """Bernoulli numbers with the B_1 = -1/2 convention."""
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(n):
        total += math.comb(n + 1, k) * bernoulli_number(k)
    return -total / (n + 1)


def bernoulli_poly(n: int, x) -> Fraction | float:
    x = Fraction(x) if isinstance(x, (int, Fraction)) else x
    return sum(math.comb(n, k) * bernoulli_number(k) * x ** (n - k) for k in range(n + 1))


def _exact_offset(a) -> Fraction:
    if isinstance(a, Rational):
        return Fraction(a)
    return Fraction(repr(float(a)))


def hurwitz_zeta(s, a, precision: str = "standard"):
    """Hurwitz zeta sum_{k>=0} (k + a)^-s for real s != 1 and a > 0.

    Non-positive integers use -B_{n+1}(a)/(n+1); other points go through
    Euler-Maclaurin. ``precision="extended"`` returns an mpmath value with
    34 significant digits.
    """
    if a <= 0:
        raise ValueError("offset a must be positive")
    if s == 1:
        raise ZetaPoleError("Hurwitz zeta has a pole at s = 1")
    if float(s).is_integer() and s <= 0:
        n = int(-s)
        value = -bernoulli_poly(n + 1, _exact_offset(a)) / (n + 1)
        if precision == "extended":
            import mpmath

            with mpmath.workdps(34):
                return mpmath.mpf(value.numerator) / value.denominator
        return float(value)
    if precision == "extended":
        import mpmath

        with mpmath.workdps(34):
            return +mpmath.zeta(mpmath.mpf(s), mpmath.mpf(_exact_offset(a).numerator) / _exact_offset(a).denominator)
    return _euler_maclaurin(float(s), float(a))


def _euler_maclaurin(s: float, a: float, n_direct: int = 24, n_corr: int = 12) -> float:
    head = math.fsum((k + a) ** (-s) for k in range(n_direct))
    x = n_direct + a
    tail = x ** (1 - s) / (s - 1) + 0.5 * x ** (-s)
    # rising factorial s(s+1)...(s+2j-2) built incrementally
    rising = s
    power = x ** (-s - 1)
    corr = []
    for j in range(1, n_corr + 1):
        corr.append(float(bernoulli_number(2 * j)) / math.factorial(2 * j) * rising * power)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= x * x
    return head + tail + math.fsum(corr)


class PolynomialTail(NamedTuple):
    """Polynomial part (ascending coefficients in h) and remainder of a level sequence."""

    coeffs: np.ndarray
    remainder: np.ndarray
    offset: float

    def value_at_zero(self, precision: str = "standard"):
        """sum_k t_k h_k^-z continued to z = 0."""
        if precision == "extended":
            import mpmath

            with mpmath.workdps(34):
                total = mpmath.fsum(self.remainder)
                for p, c in enumerate(self.coeffs):
                    total += c * hurwitz_zeta(-p, self.offset, precision)
                return total
        total = math.fsum(self.remainder)
        for p, c in enumerate(self.coeffs):
            if c != 0:
                total += c * hurwitz_zeta(-p, self.offset, precision)
        return total


class ResidueWeights(NamedTuple):
    c2: float
    c1: float
    c0: float
    f0: float


def fit_level_polynomial(
    level_trace: Sequence[float],
    offset: float,
    degree: int = 2,
    rtol: float = 1e-7,
    precision: str = "standard",
    magnitude: Sequence[float] | None = None,
) -> PolynomialTail:
    """Fit t_k = sum_p c_p h^p + r_k, h = k + offset, on a tail window.

    The window starts at the first level past which the (degree+1)-th
    differences of t are at rounding level. The remainder
    must be negligible on the upper half of the sequence (relative size
    below ``rtol``); otherwise ResidueFitError is raised.

    With ``precision="extended"`` the input may hold mpmath numbers and
    the whole fit runs at 34 digits. ``magnitude`` gives the per-level size
    of the summands behind t_k when the sum itself cancels; it sets the
    rounding floor.
    """
    if precision == "extended":
        return _fit_level_polynomial_mp(level_trace, offset, degree, rtol)
    t = np.asarray(level_trace, dtype=float)
    K = len(t) - 1
    if K + 1 < 6 * (degree + 1):
        raise ResidueFitError(f"need at least {6 * (degree + 1)} levels, got {K + 1}")
    h = np.arange(K + 1) + offset
    # (degree+1)-th differences kill the polynomial part and expose the
    # remainder; start the fit where they sink into rounding noise
    diffs = np.abs(np.diff(t, degree + 1))
    size = np.abs(t) if magnitude is None else np.maximum(np.abs(t), np.asarray(magnitude, dtype=float))
    local = np.lib.stride_tricks.sliding_window_view(size, degree + 2).max(axis=1)
    noise = 2.0 ** (degree + 1) * 16 * np.finfo(float).eps * np.maximum(local, 1.0)
    loud = np.nonzero(diffs > noise)[0]
    lo = int(loud[-1]) + 1 if len(loud) else 0
    if lo > K + 1 - 3 * (degree + 1):
        raise ResidueFitError(
            f"no quiet tail: difference {diffs[-1]:.3e} still above rounding floor {noise[-1]:.3e}"
        )
    # differences damp a slow geometric remainder by (1 - r)^(degree+1), so
    # move the window up until the fitted remainder itself is at rounding level
    floor = 64 * np.finfo(float).eps * np.maximum(size, 1.0)
    for _ in range(4):
        coeffs = _poly_fit(h[lo:], t[lo:], degree)
        remainder = t - np.polynomial.polynomial.polyval(h, coeffs)
        loud = np.nonzero(np.abs(remainder) > floor)[0]
        new_lo = int(loud[-1]) + 1 if len(loud) else 0
        if new_lo <= lo or new_lo > K + 1 - 3 * (degree + 1):
            break
        lo = new_lo
    _check_decay(remainder, t, K, rtol)
    return PolynomialTail(coeffs, remainder, float(offset))


def _poly_fit(h, t, degree):
    coeffs = np.polynomial.Polynomial.fit(h, t, degree).convert().coef
    return np.concatenate([coeffs, np.zeros(degree + 1 - len(coeffs))])


def _check_decay(remainder, t, K, rtol):
    scale = max(1.0, float(max(abs(v) for v in t[K // 2:])))
    worst = float(max(abs(v) for v in remainder[(3 * K) // 4:]))
    if worst > rtol * scale:
        raise ResidueFitError(f"remainder {worst:.3e} does not decay (scale {scale:.3e})")


def _fit_level_polynomial_mp(level_trace, offset, degree, rtol) -> PolynomialTail:
    import mpmath

    with mpmath.workdps(34):
        t = [mpmath.mpf(v) for v in level_trace]
        K = len(t) - 1
        off = mpmath.mpf(_exact_offset(offset).numerator) / _exact_offset(offset).denominator
        h = [k + off for k in range(K + 1)]
        d = t
        for _ in range(degree + 1):
            d = [d[i + 1] - d[i] for i in range(len(d) - 1)]
        # binary64 input carries its own rounding floor; only exact or mpf input goes to 1e-30
        exact_input = all(isinstance(v, (mpmath.mpf, int, Fraction)) for v in level_trace)
        eps = mpmath.mpf(10) ** -30 if exact_input else mpmath.mpf(2.0 ** (degree + 1) * 16 * np.finfo(float).eps)
        size = [max(abs(v) for v in t[i : i + degree + 2]) for i in range(len(d))]
        loud = [i for i, v in enumerate(d) if abs(v) > eps * max(1, size[i])]
        lo = loud[-1] + 1 if loud else 0
        if lo > K + 1 - 3 * (degree + 1):
            raise ResidueFitError("no quiet tail at extended precision")

        def solve(lo):
            A = mpmath.matrix([[h[k] ** p for p in range(degree + 1)] for k in range(lo, K + 1)])
            sol, _ = mpmath.qr_solve(A, mpmath.matrix(t[lo:]))
            coeffs = [sol[p] for p in range(degree + 1)]
            return coeffs, [t[k] - sum(c * h[k] ** p for p, c in enumerate(coeffs)) for k in range(K + 1)]

        coeffs, remainder = solve(lo)
        # move the window past the levels whose remainder still shows above the rounding floor
        floor = eps if exact_input else mpmath.mpf(64 * np.finfo(float).eps)
        for _ in range(4):
            noisy = [k for k in range(K + 1) if abs(remainder[k]) > floor * max(1, abs(t[k]))]
            new_lo = noisy[-1] + 1 if noisy else 0
            if new_lo <= lo or new_lo > K + 1 - 3 * (degree + 1):
                break
            lo = new_lo
            coeffs, remainder = solve(lo)
        _check_decay(remainder, t, K, rtol)
        return PolynomialTail(np.array(coeffs, dtype=object), np.array(remainder, dtype=object), float(offset))


def residue_weights(
    level_trace: Sequence[float],
    offset: float,
    rtol: float = 1e-7,
    precision: str = "standard",
    magnitude: Sequence[float] | None = None,
) -> ResidueWeights:
    """Quadratic-plus-rapid-decay decomposition of a level trace.

    With sum_k h^{p-z} = zeta(z - p, offset), the returned c2, c1, c0 are the
    residues at z = 3, 2, 1 and f0 is the continued value at z = 0.
    """
    tail = fit_level_polynomial(level_trace, offset, 2, rtol, precision, magnitude)
    c0, c1, c2 = (float(c) for c in tail.coeffs)
    return ResidueWeights(c2, c1, c0, float(tail.value_at_zero(precision)))
