"""PBW normal forms for the coordinate algebra of SU_q(2) and its quantum disks.

Elements of the coordinate algebra are stored on the basis a^l b^m (b*)^n
with l an integer (a^{-l} meaning (a*)^l), elements of a disk on a^k b^m.
Coefficients live in whatever field q lives in: pass a Fraction for exact
rational arithmetic, a float for speed.

Rewriting rules, all moving a-powers to the left::

    b a = q a b        b* a = q a b*       b a* = q^-1 a* b      b* a* = q^-1 a* b*
    a a* = 1 - b b*    a* a = 1 - q^2 b b*

On a disk b* = b and the same rules hold with b b* replaced by b^2.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

from .qnum import DeformParam, as_q

__all__ = [
    "AlgebraElement",
    "DiskElement",
    "SUq2",
    "normal_form",
    "parse",
    "ParseError",
]

# underflow guard for float coefficients; exact types are never dropped
DROP = 1e-300


def _is_zero(c) -> bool:
    if isinstance(c, float):
        return abs(c) < DROP
    if isinstance(c, complex):
        return abs(c) < DROP
    return c == 0


def _conj(c):
    return c.conjugate() if hasattr(c, "conjugate") else c


def _pow(q, e: int):
    return q ** e


@lru_cache(maxsize=4096)
def _a_product(l1: int, l2: int, q) -> tuple[tuple[int, int, object], ...]:
    """a^l1 a^l2 as sum c a^L beta^e, beta = b b* (or b^2 on a disk)."""
    if l1 >= 0 and l2 >= 0 or l1 <= 0 and l2 <= 0:
        return ((l1 + l2, 0, 1),)
    out: dict[tuple[int, int], object] = {}
    if l1 > 0:
        # a^l1 a*^k = P - q^{-2(k-1)} P beta,  P = a^{l1-1} a*^{k-1}
        k = -l2
        factor = -_pow(q, -2 * (k - 1))
        inner = _a_product(l1 - 1, l2 + 1, q)
    else:
        # a*^k a^l2 = P - q^2 q^{2(l2-1)} P beta,  P = a*^{k-1} a^{l2-1}
        factor = -_pow(q, 2 * l2)
        inner = _a_product(l1 + 1, l2 - 1, q)
    for L, e, c in inner:
        out[(L, e)] = out.get((L, e), 0) + c
        out[(L, e + 1)] = out.get((L, e + 1), 0) + factor * c
    return tuple((L, e, c) for (L, e), c in sorted(out.items()) if not _is_zero(c))


class _Element:
    """Shared linear-combination plumbing."""

    __slots__ = ("terms", "q")

    def __init__(self, terms: Mapping, q):
        self.q = q
        self.terms = {k: v for k, v in terms.items() if not _is_zero(v)}

    def _new(self, terms):
        return type(self)(terms, self.q)

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, Number):
            return self._new({self._unit_key(): other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._new({k: v * other for k, v in self.terms.items()})
        if not isinstance(other, type(self)):
            return NotImplemented
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                for k, c in self._mono_product(k1, k2):
                    out[k] = out.get(k, 0) + v1 * v2 * c
        return self._new(out)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self._new({k: other * v for k, v in self.terms.items()})
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = self._new({self._unit_key(): 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, key):
        return self.terms.get(key, 0)

    def max_abs_difference(self, other) -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({v})*{self._key_str(k)}" for k, v in sorted(self.terms.items()))


class AlgebraElement(_Element):
    """Element of the coordinate algebra in the basis a^l b^m (b*)^n."""

    __slots__ = ()

    @staticmethod
    def _unit_key():
        return (0, 0, 0)

    def _mono_product(self, k1, k2):
        l1, m1, n1 = k1
        l2, m2, n2 = k2
        move = _pow(self.q, (m1 + n1) * l2)
        for L, e, c in _a_product(l1, l2, self.q):
            yield (L, m1 + m2 + e, n1 + n2 + e), move * c

    def star(self) -> "AlgebraElement":
        # (a^l b^m b*^n)* = b^n b*^m a^{-l} = q^{-(m+n) l} a^{-l} b^n b*^m
        out = {}
        for (l, m, n), v in self.terms.items():
            key = (-l, n, m)
            out[key] = out.get(key, 0) + _conj(v) * _pow(self.q, -(m + n) * l)
        return self._new(out)

    @staticmethod
    def _key_str(k):
        l, m, n = k
        parts = []
        if l:
            parts.append(f"a^{l}" if l > 0 else f"a*^{-l}")
        if m:
            parts.append(f"b^{m}")
        if n:
            parts.append(f"b*^{n}")
        return "".join(parts) or "1"

    def degree(self) -> int:
        return max((abs(l) + m + n for l, m, n in self.terms), default=0)

    def restrict_disk(self) -> "DiskElement":
        """Image in a quantum disk: b* -> b (the same on both disks)."""
        out = {}
        for (l, m, n), v in self.terms.items():
            out[(l, m + n)] = out.get((l, m + n), 0) + v
        return DiskElement(out, self.q)


class DiskElement(_Element):
    """Element of a quantum disk in the basis a^k b^m (b self-adjoint)."""

    __slots__ = ()

    @staticmethod
    def _unit_key():
        return (0, 0)

    def _mono_product(self, k1, k2):
        l1, m1 = k1
        l2, m2 = k2
        move = _pow(self.q, m1 * l2)
        for L, e, c in _a_product(l1, l2, self.q):
            yield (L, m1 + m2 + 2 * e), move * c

    def star(self) -> "DiskElement":
        # (a^k b^m)* = b^m a^{-k} = q^{-mk} a^{-k} b^m
        out = {}
        for (k, m), v in self.terms.items():
            out[(-k, m)] = out.get((-k, m), 0) + _conj(v) * _pow(self.q, -m * k)
        return self._new(out)

    @staticmethod
    def _key_str(k):
        l, m = k
        parts = []
        if l:
            parts.append(f"a^{l}" if l > 0 else f"a*^{-l}")
        if m:
            parts.append(f"b^{m}")
        return "".join(parts) or "1"

    def circle_symbol(self) -> dict[int, object]:
        """Laurent polynomial {power of u: coefficient}: a -> u, b -> 0."""
        out: dict[int, object] = {}
        for (k, m), v in self.terms.items():
            if m == 0:
                out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if not _is_zero(v)}


class SUq2:
    """Factory for elements over a fixed q.

    ``exact=True`` (the default) runs the coefficient arithmetic in
    Fractions.
    """

    def __init__(self, q, exact: bool = True):
        self.param = as_q(q)
        self.q = self.param.exact if exact else self.param.value

    def monomial(self, l: int = 0, m: int = 0, n: int = 0, coeff=1) -> AlgebraElement:
        return AlgebraElement({(l, m, n): coeff}, self.q)

    def scalar(self, c) -> AlgebraElement:
        return self.monomial(coeff=c)

    @property
    def one(self):
        return self.monomial()

    @property
    def a(self):
        return self.monomial(1)

    @property
    def a_star(self):
        return self.monomial(-1)

    @property
    def b(self):
        return self.monomial(0, 1)

    @property
    def b_star(self):
        return self.monomial(0, 0, 1)

    def disk(self, k: int = 0, m: int = 0, coeff=1) -> DiskElement:
        return DiskElement({(k, m): coeff}, self.q)

    def letter(self, name: str) -> AlgebraElement:
        return {"a": self.a, "a*": self.a_star, "b": self.b, "b*": self.b_star}[name]

    def word(self, letters: Iterable[str]) -> AlgebraElement:
        return normal_form(letters, self)

    def lattice(self, max_degree: int = 2) -> list[AlgebraElement]:
        """Normal-form monomials a^l b^m b*^n with |l| + m + n <= max_degree."""
        out = []
        for d in range(max_degree + 1):
            for l in range(-d, d + 1):
                for m in range(d - abs(l) + 1):
                    n = d - abs(l) - m
                    out.append(self.monomial(l, m, n))
        return out

    def parse(self, text: str) -> AlgebraElement:
        return parse(text, self)


def normal_form(word, algebra: SUq2) -> AlgebraElement:
    """Normal form of a word, given as a string or a sequence of letters a, a*, b, b*."""
    if isinstance(word, str):
        return parse(word, algebra)
    out = algebra.one
    for letter in word:
        out = out * algebra.letter(letter)
    return out


class ParseError(ValueError):
    pass




def _tokenize(text: str, names: Iterable[str]):
    names = sorted(names, key=len, reverse=True)
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        c = text[pos]
        m = re.match(r"\d+", text[pos:])
        if m:
            tokens.append(("int", int(m.group())))
            pos += m.end()
            continue
        if c == "^":
            m = re.match(r"\^\s*(?:\{\s*(-?\d+)\s*\}|(-?\d+))", text[pos:])
            if not m:
                raise ParseError(f"bad exponent at {text[pos:]!r}")
            tokens.append(("pow", int(m.group(1) or m.group(2))))
            pos += m.end()
            continue
        for name in names:
            if text.startswith(name, pos):
                tokens.append(("gen", name))
                pos += len(name)
                break
        else:
            if c == "q":
                tokens.append(("q", None))
                pos += 1
            elif c in "()+-*":
                tokens.append((c, None))
                pos += 1
            else:
                raise ParseError(f"unexpected character {c!r} in {text!r}")
    return tokens


def parse(text: str, algebra, generators: Mapping[str, object] | None = None):
    """Parse a word expression into an algebra.

    Grammar: ``expr := term (('+'|'-') term)*``, ``term := factor*``,
    ``factor := atom ('*')? ('^' int)?``, ``atom := int | q | generator | '(' expr ')'``.
    Juxtaposition is the product, a star suffix is the adjoint. Exponents
    may be written ``q^-2`` or ``q^{-2}``.
    """
    if generators is None:
        generators = {"a": algebra.a, "b": algebra.b}
    one = algebra.one
    q = algebra.q
    tokens = _tokenize(text, generators)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def expr():
        nonlocal pos
        sign = 1
        if peek()[0] in ("+", "-"):
            sign = -1 if peek()[0] == "-" else 1
            pos += 1
        out = term() * sign
        while peek()[0] in ("+", "-"):
            sign = -1 if peek()[0] == "-" else 1
            pos += 1
            out = out + term() * sign
        return out

    def term():
        out = None
        while peek()[0] in ("int", "q", "gen", "("):
            f = factor()
            out = f if out is None else out * f
        if out is None:
            raise ParseError(f"expected a factor in {text!r}")
        return out

    def factor():
        nonlocal pos
        kind, val = peek()
        pos += 1
        if kind == "int":
            atom = one * val
        elif kind == "q":
            atom = one * q
            if peek()[0] == "pow":
                atom = one * q ** peek()[1]
                pos += 1
                return atom
        elif kind == "gen":
            atom = generators[val]
        else:
            atom = expr()
            if peek()[0] != ")":
                raise ParseError(f"unbalanced parentheses in {text!r}")
            pos += 1
        if peek()[0] == "*":
            atom = atom.star()
            pos += 1
        if peek()[0] == "pow":
            n = peek()[1]
            pos += 1
            atom = atom ** n
        return atom

    out = expr()
    if pos != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return out
