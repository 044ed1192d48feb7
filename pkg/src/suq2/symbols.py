"""Cosphere symbols.

The diagonal (spin-preserving) parts of the shift components of a and b
generate, together with the two off-diagonal corners, an algebra B of
operators. Its words are mapped by ``rho`` to the cosphere algebra

    disk(+) (x) disk(-) (x) circle,

whose elements are sums of X (x) Y (x) u^w with X, Y disk monomials and
w the winding. Letters of B:

    at+  at-  bt+  bt-       diagonal parts of a+, a-, b+, b-
    oa   ob                  off-diagonal corners of a and b
    and the starred versions of all six.

On a B word, |D|-commutators act by the winding; the off-diagonal
letters commute with |D| and are killed by rho.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from .algebra import AlgebraElement, DiskElement, SUq2, _conj, _is_zero, parse
from .fock import UP, DOWN, is_valid
from .qnum import as_q
from .spectral import ShiftOperator, proj_dn, proj_up, spin_rep

__all__ = [
    "LETTERS",
    "BElement",
    "BAlgebra",
    "CosphereElement",
    "rho",
    "degree0",
    "symbol_of_pi",
    "pi_in_b",
    "b_operator",
    "symbol_operator",
    "symbol_deviation",
]

BASE_LETTERS = ("at+", "at-", "bt+", "bt-", "oa", "ob")
LETTERS = BASE_LETTERS + tuple(x + "*" for x in BASE_LETTERS)

# winding of each letter; off-diagonal letters commute with |D|
WINDING = {"at+": 1, "at-": -1, "bt+": 1, "bt-": -1, "oa": 0, "ob": 0}
WINDING.update({x + "*": -w for x, w in list(WINDING.items())})

ALIASES = {"ã+": "at+", "ã-": "at-", "b̃+": "bt+", "b̃-": "bt-", "ã−": "at-", "b̃−": "bt-"}


def _star_letter(x: str) -> str:
    return x[:-1] if x.endswith("*") else x + "*"


class BElement:
    """Noncommutative polynomial in the letters of B: {word tuple: coefficient}."""

    __slots__ = ("terms", "q")

    def __init__(self, terms: Mapping[tuple, object], q):
        self.q = q
        self.terms = {w: c for w, c in terms.items() if not _is_zero(c)}

    @classmethod
    def letter(cls, name: str, q) -> "BElement":
        name = ALIASES.get(name, name)
        if name not in LETTERS:
            raise KeyError(f"unknown letter {name!r}")
        return cls({(name,): 1}, q)

    def _coerce(self, other):
        if isinstance(other, BElement):
            return other
        if isinstance(other, Number):
            return BElement({(): other}, self.q)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return BElement(out, self.q)

    __radd__ = __add__

    def __neg__(self):
        return BElement({w: -c for w, c in self.terms.items()}, self.q)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, Number):
            return BElement({w: c * other for w, c in self.terms.items()}, self.q)
        if not isinstance(other, BElement):
            return NotImplemented
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out[w1 + w2] = out.get(w1 + w2, 0) + c1 * c2
        return BElement(out, self.q)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        out = BElement({(): 1}, self.q)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        return other is not NotImplemented and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def star(self) -> "BElement":
        return BElement(
            {tuple(_star_letter(x) for x in reversed(w)): _conj(c) for w, c in self.terms.items()}, self.q
        )

    def delta(self, order: int = 1) -> "BElement":
        """|D|-commutator: each word is multiplied by its winding."""
        out = {}
        for w, c in self.terms.items():
            k = sum(WINDING[x] for x in w)
            out[w] = c * k ** order
        return BElement(out, self.q)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{' '.join(w) or '1'}" for w, c in sorted(self.terms.items()))


class BAlgebra:
    """Factory with ``one`` and ``q``, so words can be parsed."""

    def __init__(self, q, exact: bool = True):
        param = as_q(q)
        self.q = param.exact if exact else param.value

    @property
    def one(self) -> BElement:
        return BElement({(): 1}, self.q)

    def letter(self, name: str) -> BElement:
        return BElement.letter(name, self.q)

    def parse(self, text: str) -> BElement:
        gens = {name: self.letter(name) for name in BASE_LETTERS}
        gens.update({alias: self.letter(name) for alias, name in ALIASES.items()})
        return parse(text, self, gens)


def pi_in_b(x: AlgebraElement) -> BElement:
    """pi(x) written in B: a -> at+ + at- + oa, b -> bt+ + bt- + ob."""
    q = x.q
    a = BElement({("at+",): 1, ("at-",): 1, ("oa",): 1}, q)
    b = BElement({("bt+",): 1, ("bt-",): 1, ("ob",): 1}, q)
    a_star, b_star = a.star(), b.star()
    out = BElement({}, q)
    for (l, m, n), c in x.terms.items():
        out = out + (a if l >= 0 else a_star) ** abs(l) * b ** m * b_star ** n * c
    return out


class CosphereElement:
    """Sum of c * (a^k1 b^m1) (x) (a^k2 b^m2) (x) u^w."""

    __slots__ = ("terms", "q")

    def __init__(self, terms: Mapping[tuple, object], q):
        self.q = q
        self.terms = {k: c for k, c in terms.items() if not _is_zero(c)}

    @classmethod
    def unit(cls, q) -> "CosphereElement":
        return cls({((0, 0), (0, 0), 0): 1}, q)

    @classmethod
    def simple(cls, plus: DiskElement, minus: DiskElement, w: int, q) -> "CosphereElement":
        out = {}
        for k1, c1 in plus.terms.items():
            for k2, c2 in minus.terms.items():
                out[(k1, k2, w)] = out.get((k1, k2, w), 0) + c1 * c2
        return cls(out, q)

    def _coerce(self, other):
        if isinstance(other, CosphereElement):
            return other
        if isinstance(other, Number):
            return CosphereElement.unit(self.q) * other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return CosphereElement(out, self.q)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, Number):
            return CosphereElement({k: c * other for k, c in self.terms.items()}, self.q)
        if not isinstance(other, CosphereElement):
            return NotImplemented
        return self._product(other, None)

    def mul_degree0(self, other: "CosphereElement") -> "CosphereElement":
        """degree0(self * other), skipping the products that cannot land in winding 0."""
        return self._product(other, 0)

    def _product(self, other, winding):
        out: dict = {}
        q = self.q
        for (p1, m1, w1), c1 in self.terms.items():
            for (p2, m2, w2), c2 in other.terms.items():
                w = w1 + w2
                if winding is not None and w != winding:
                    continue
                c = c1 * c2
                for kp, cp in _disk_product(p1, p2, q):
                    for km, cm in _disk_product(m1, m2, q):
                        key = (kp, km, w)
                        out[key] = out.get(key, 0) + c * cp * cm
        return CosphereElement(out, q)

    def by_winding(self) -> dict[int, "CosphereElement"]:
        out: dict[int, dict] = {}
        for k, c in self.terms.items():
            out.setdefault(k[2], {})[k] = c
        return {w: CosphereElement(t, self.q) for w, t in sorted(out.items())}

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n: int):
        out = CosphereElement.unit(self.q)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        return other is not NotImplemented and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def star(self) -> "CosphereElement":
        out = CosphereElement({}, self.q)
        for (p, m, w), c in self.terms.items():
            plus = DiskElement({p: 1}, self.q).star()
            minus = DiskElement({m: 1}, self.q).star()
            out = out + CosphereElement.simple(plus, minus, -w, self.q) * _conj(c)
        return out

    def delta(self, order: int = 1) -> "CosphereElement":
        return CosphereElement({k: c * k[2] ** order for k, c in self.terms.items()}, self.q)

    def windings(self) -> list[int]:
        return sorted({k[2] for k in self.terms})

    def drop_circle(self) -> dict[tuple, object]:
        """Forget the circle leg: {((k1, m1), (k2, m2)): coefficient}."""
        out: dict = {}
        for (p, m, _), c in self.terms.items():
            out[(p, m)] = out.get((p, m), 0) + c
        return {k: v for k, v in out.items() if not _is_zero(v)}

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        s = DiskElement._key_str
        return " + ".join(f"({c})*{s(p)}(x){s(m)}(x)u^{w}" for (p, m, w), c in sorted(self.terms.items()))


@lru_cache(maxsize=1 << 16)
def _disk_product(k1, k2, q):
    return tuple((DiskElement({k1: 1}, q) * DiskElement({k2: 1}, q)).terms.items())


def degree0(x: CosphereElement) -> CosphereElement:
    return CosphereElement({k: c for k, c in x.terms.items() if k[2] == 0}, x.q)


@lru_cache(maxsize=64)
def _letter_symbols(q) -> dict[str, CosphereElement]:
    def d(k, m, c=1):
        return DiskElement({(k, m): c}, q)

    base = {
        "at+": CosphereElement.simple(d(1, 0), d(1, 0), 1, q),
        "at-": CosphereElement.simple(d(0, 1, -q), d(0, 1), -1, q),
        "bt+": CosphereElement.simple(d(1, 0, -1), d(0, 1), 1, q),
        "bt-": CosphereElement.simple(d(0, 1, -1), d(-1, 0), -1, q),
        "oa": CosphereElement({}, q),
        "ob": CosphereElement({}, q),
    }
    out = dict(base)
    for name, v in base.items():
        out[name + "*"] = v.star()
    return out


def rho(x: BElement) -> CosphereElement:
    """The cosphere image of a B polynomial (a *-homomorphism)."""
    symbols = _letter_symbols(x.q)
    out = CosphereElement({}, x.q)
    cache: dict[tuple, CosphereElement] = {(): CosphereElement.unit(x.q)}

    def word_image(w):
        if w not in cache:
            cache[w] = word_image(w[:-1]) * symbols[w[-1]]
        return cache[w]

    for w, c in x.terms.items():
        if any(l in ("oa", "ob", "oa*", "ob*") for l in w):
            continue
        out = out + word_image(w) * c
    return out


def symbol_of_pi(x: AlgebraElement) -> CosphereElement:
    """rho of the diagonal part of pi(x); multiplicative on the algebra."""
    out = CosphereElement({}, x.q)
    for key, c in x.terms.items():
        out = out + _monomial_symbol(key, x.q) * c
    return out


@lru_cache(maxsize=4096)
def _monomial_symbol(key, q) -> CosphereElement:
    l, m, n = key
    if key == (0, 0, 0):
        return CosphereElement.unit(q)
    s = _letter_symbols(q)
    a = s["at+"] + s["at-"]
    b = s["bt+"] + s["bt-"]
    # peel one generator off the right: a^l b^m b*^n = (a^l b^m b*^(n-1)) b* etc.
    if n:
        return _monomial_symbol((l, m, n - 1), q) * b.star()
    if m:
        return _monomial_symbol((l, m - 1, 0), q) * b
    step = 1 if l > 0 else -1
    return _monomial_symbol((l - step, 0, 0), q) * (a if l > 0 else a.star())


# -- operator realisations ----------------------------------------------------


def _diag_part(op: ShiftOperator) -> ShiftOperator:
    P, Q = proj_up().as_shift(), proj_dn().as_shift()
    return P @ op @ P + Q @ op @ Q


def b_operator(name: str, q) -> ShiftOperator:
    """The operator of a single B letter."""
    star = name.endswith("*")
    base = _star_letter(name) if star else name
    base = ALIASES.get(base, base)
    P, Q = proj_up().as_shift(), proj_dn().as_shift()
    if base in ("at+", "at-", "bt+", "bt-"):
        op = _diag_part(spin_rep(base[0] + base[2], q))
    elif base in ("oa", "ob"):
        g = base[1]
        op = Q @ spin_rep(g + "+", q) @ P + P @ spin_rep(g + "-", q) @ Q
    else:
        raise KeyError(f"unknown letter {name!r}")
    return op.adjoint() if star else op


def _disk_amplitude(k: int, m: int, x, sign: float, qv: float):
    """<x + k | pi(a^k b^m) | x> in a disk representation (b -> sign q^x)."""
    x = np.asarray(x, dtype=float)
    amp = (sign * qv ** x) ** m
    if k > 0:
        for i in range(k):
            amp = amp * np.sqrt(np.maximum(1.0 - qv ** (2 * (x + i) + 2), 0.0))
    elif k < 0:
        for i in range(-k):
            amp = amp * np.sqrt(np.maximum(1.0 - qv ** (2 * (x - i)), 0.0))
    return amp


class _SymbolCoeff:
    __slots__ = ("parts", "shift", "qv")

    def __init__(self, parts, shift, qv):
        self.parts, self.shift, self.qv = parts, shift, qv

    def __call__(self, j2, mu2, n2):
        dj = self.shift[0]
        res = np.zeros(np.shape(j2) + (2, 2))
        for s, dy in ((UP, 1), (DOWN, -1)):
            x = (mu2 + j2) / 2
            y = (n2 + j2 + dy) / 2
            tgt = is_valid(j2 + dj, mu2 + self.shift[1], n2 + self.shift[2], s)
            val = 0.0
            for (k1, m1), (k2, m2), c in self.parts:
                val = val + c * _disk_amplitude(k1, m1, x, 1.0, self.qv) * _disk_amplitude(k2, m2, y, -1.0, self.qv)
            res[..., s, s] = np.where(tgt, val, 0.0)
        return res


def symbol_operator(x: CosphereElement, q=None) -> ShiftOperator:
    """Q (rho (x) 1) Q: the cosphere element acting on relabelled kets.

    On v^j_{xy} the first leg acts on x through the + disk, the second on y
    through the - disk and u^w raises 2j by w; the result is compressed
    onto valid kets.
    """
    qv = as_q(q if q is not None else x.q).value
    grouped: dict = {}
    for ((k1, m1), (k2, m2), w), c in x.terms.items():
        shift = (w, 2 * k1 - w, 2 * k2 - w)
        grouped.setdefault(shift, []).append(((k1, m1), (k2, m2), complex(c) if isinstance(c, complex) else float(c)))
    return ShiftOperator({s: _SymbolCoeff(p, s, qv) for s, p in grouped.items()}, 1)


def symbol_deviation(x: AlgebraElement, max2j: int) -> np.ndarray:
    """Per-level sup entry of diag(pi(x)) - Q(symbol (x) 1)Q, levels 0..max2j-1."""
    from .spectral import materialize, represent
    from .fock import enumerate_basis

    space = enumerate_basis(max2j)
    diff = materialize(_diag_part(represent(x)) - symbol_operator(symbol_of_pi(x)), space)
    col = np.asarray(abs(diff).max(axis=0).todense()).ravel()
    return np.array([col[space.level_slice(k)].max() for k in range(max2j)])
