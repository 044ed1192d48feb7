"""Shift operators on the spinor basis.

Every operator built here is a finite sum of terms that move the labels
(2j, 2mu, 2n) by a fixed shift and act on the spin index by a 2x2 matrix
depending on the source labels. A term is stored as a vectorised function
``coeff(j2, mu2, n2) -> (..., 2, 2)`` indexed [target spin, source spin];
products compose these lazily, so the same operator can be evaluated on
any label set without building a matrix.

Source columns that are not valid kets are always masked to zero, so
coefficient formulas may produce garbage there.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .fock import DOWN, UP, TruncatedSpace, enumerate_basis, is_valid, level_offset
from .qnum import as_q, q_number

__all__ = [
    "Shift",
    "ShiftOperator",
    "DiagonalOperator",
    "TruncationError",
    "CompositionDepthError",
    "spin_rep",
    "approx_rep",
    "represent",
    "dirac",
    "abs_dirac",
    "sign_f",
    "proj_up",
    "proj_dn",
    "delta",
    "nabla",
    "commutator_d",
    "commutator_f",
    "materialize",
    "level_traces",
    "binomial_expansion_check",
    "GENERATORS",
]

Shift = tuple[int, int, int]
Coeff = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

MAX_DEPTH = 16

GENERATORS = ("a+", "a-", "b+", "b-", "a", "b", "a*", "b*")


class TruncationError(RuntimeError):
    """An operator maps a ket inside the truncation to one outside it."""


class CompositionDepthError(RuntimeError):
    pass


def _source_mask(j2, mu2, n2):
    up = is_valid(j2, mu2, n2, UP)
    dn = is_valid(j2, mu2, n2, DOWN)
    return np.stack([up, dn], axis=-1)[..., None, :]


def _target_mask(j2, mu2, n2):
    up = is_valid(j2, mu2, n2, UP)
    dn = is_valid(j2, mu2, n2, DOWN)
    return np.stack([up, dn], axis=-1)[..., :, None]


class _Sum:
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(parts)

    def __call__(self, j2, mu2, n2):
        out = self.parts[0](j2, mu2, n2)
        for f in self.parts[1:]:
            out = out + f(j2, mu2, n2)
        return out


class _Compose:
    """Coefficient of (outer shifted by s_in) @ inner."""

    __slots__ = ("outer", "inner", "shift")

    def __init__(self, outer, inner, shift):
        self.outer, self.inner, self.shift = outer, inner, shift

    def __call__(self, j2, mu2, n2):
        dj, dm, dn = self.shift
        inner = self.inner(j2, mu2, n2) * _source_mask(j2, mu2, n2)
        return _masked(self.outer, j2 + dj, mu2 + dm, n2 + dn) @ inner


class _Scaled:
    __slots__ = ("f", "c")

    def __init__(self, f, c):
        self.f, self.c = f, c

    def __call__(self, j2, mu2, n2):
        return self.c * self.f(j2, mu2, n2)


class _Adjoint:
    """Coefficient of T* on the term with shift -d: C_d(src - d)^H."""

    __slots__ = ("f", "shift")

    def __init__(self, f, shift):
        self.f, self.shift = f, shift

    def __call__(self, j2, mu2, n2):
        dj, dm, dn = self.shift
        src = (j2 - dj, mu2 - dm, n2 - dn)
        c = _masked(self.f, *src) * _target_mask(j2, mu2, n2)
        return np.conj(np.swapaxes(c, -1, -2))


class _Bracket:
    """Coefficient multiplied by lam(target) - lam(source) for a diagonal lam."""

    __slots__ = ("f", "shift", "lam")

    def __init__(self, f, shift, lam):
        self.f, self.shift, self.lam = f, shift, lam

    def __call__(self, j2, mu2, n2):
        lt = self.lam(j2 + self.shift[0])
        ls = self.lam(j2)
        return self.f(j2, mu2, n2) * (lt[..., :, None] - ls[..., None, :])


class _Tabulated:
    """Coefficient frozen on the kets of a truncation; zero outside it."""

    __slots__ = ("space", "table")

    def __init__(self, f, space: TruncatedSpace):
        self.space = space
        self.table = _masked(f, space.j2, space.mu2, space.n2)

    def __call__(self, j2, mu2, n2):
        j2, mu2, n2 = np.broadcast_arrays(j2, mu2, n2)
        out = np.zeros(j2.shape + (2, 2), dtype=self.table.dtype)
        for s in (UP, DOWN):
            idx = self.space.index_of(j2, mu2, n2, s)
            ok = idx >= 0
            out[ok, :, s] = self.table[idx[ok], :, s]
        return out


def _masked(f, j2, mu2, n2):
    with np.errstate(all="ignore"):
        c = f(j2, mu2, n2)
    return np.where(_source_mask(j2, mu2, n2), c, 0.0)


class ShiftOperator:
    """Finite sum of shift terms.

    ``terms`` maps a doubled shift (d2j, d2mu, d2n) to a coefficient
    function. ``depth`` counts how many generator factors are stacked in
    the lazily composed coefficients.
    """

    __slots__ = ("terms", "depth", "label")

    def __init__(self, terms: Mapping[Shift, Coeff], depth: int = 1, label: str = ""):
        self.terms = dict(terms)
        self.depth = depth
        self.label = label

    # -- algebra ---------------------------------------------------------

    @staticmethod
    def zero() -> "ShiftOperator":
        return ShiftOperator({}, 0, "0")

    @staticmethod
    def identity() -> "ShiftOperator":
        return DiagonalOperator(lambda j2: np.ones(np.shape(j2) + (2,)), "1").as_shift()

    def __add__(self, other):
        if isinstance(other, DiagonalOperator):
            other = other.as_shift()
        if not isinstance(other, ShiftOperator):
            return NotImplemented
        terms: dict[Shift, list] = {}
        for op in (self, other):
            for k, f in op.terms.items():
                terms.setdefault(k, []).append(f)
        merged = {k: fs[0] if len(fs) == 1 else _Sum(fs) for k, fs in terms.items()}
        return ShiftOperator(merged, max(self.depth, other.depth))

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return ShiftOperator({k: _Scaled(f, c) for k, f in self.terms.items()}, self.depth)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, DiagonalOperator):
            other = other.as_shift()
        if not isinstance(other, ShiftOperator):
            return NotImplemented
        depth = self.depth + other.depth
        if depth > MAX_DEPTH:
            raise CompositionDepthError(
                f"composition depth {depth} exceeds {MAX_DEPTH}; tabulate a factor with .flatten(space)"
            )
        terms: dict[Shift, list] = {}
        for k2, f2 in other.terms.items():
            for k1, f1 in self.terms.items():
                key = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                terms.setdefault(key, []).append(_Compose(f1, f2, k2))
        merged = {k: fs[0] if len(fs) == 1 else _Sum(fs) for k, fs in terms.items()}
        return ShiftOperator(merged, depth)

    def __rmatmul__(self, other):
        if isinstance(other, DiagonalOperator):
            return other.as_shift() @ self
        return NotImplemented

    def adjoint(self) -> "ShiftOperator":
        terms = {(-k[0], -k[1], -k[2]): _Adjoint(f, k) for k, f in self.terms.items()}
        return ShiftOperator(terms, self.depth)

    @property
    def H(self) -> "ShiftOperator":
        return self.adjoint()

    def flatten(self, space: TruncatedSpace) -> "ShiftOperator":
        """Freeze every coefficient on ``space``; resets the composition depth."""
        return ShiftOperator({k: _Tabulated(f, space) for k, f in self.terms.items()}, 1)

    # -- evaluation --------------------------------------------------------

    def coefficient(self, shift: Shift, j2, mu2, n2) -> np.ndarray:
        f = self.terms.get(tuple(shift))
        j2, mu2, n2 = np.broadcast_arrays(*(np.asarray(v, dtype=np.int64) for v in (j2, mu2, n2)))
        if f is None:
            return np.zeros(j2.shape + (2, 2))
        return _masked(f, j2, mu2, n2)

    def shifts(self) -> list[Shift]:
        return sorted(self.terms)

    def __repr__(self):
        return f"ShiftOperator({self.label or len(self.terms)} terms={self.shifts()}, depth={self.depth})"


@dataclass(frozen=True)
class DiagonalOperator:
    """Operator diagonal in the spinor basis with eigenvalues depending on (2j, spin).

    ``values(j2)`` returns (..., 2): [up, down].
    """

    values: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def eigen(self, j2) -> np.ndarray:
        return self.values(np.asarray(j2))

    def as_shift(self) -> ShiftOperator:
        vals = self.values

        def coeff(j2, mu2, n2):
            v = vals(np.asarray(j2))
            out = np.zeros(np.shape(j2) + (2, 2), dtype=v.dtype)
            out[..., 0, 0] = v[..., 0]
            out[..., 1, 1] = v[..., 1]
            return out

        return ShiftOperator({(0, 0, 0): coeff}, 1, self.label)

    def power(self, z: float) -> "DiagonalOperator":
        vals = self.values

        def powered(j2):
            v = vals(j2)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(v != 0, np.abs(v) ** z * np.sign(v) ** (z % 2 if float(z).is_integer() else 0), 0.0)
            return out

        return DiagonalOperator(powered, f"{self.label}^{z}")

    def __matmul__(self, other):
        if isinstance(other, DiagonalOperator):
            a, b = self.values, other.values
            return DiagonalOperator(lambda j2: a(j2) * b(j2), f"{self.label}{other.label}")
        return self.as_shift() @ other

    def __mul__(self, c):
        vals = self.values
        return DiagonalOperator(lambda j2: c * vals(j2), self.label)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, DiagonalOperator):
            a, b = self.values, other.values
            return DiagonalOperator(lambda j2: a(j2) + b(j2))
        return self.as_shift() + other


def _dirac_values(j2):
    j2 = np.asarray(j2, dtype=float)
    return np.stack([j2 + 1.5, -j2 - 0.5], axis=-1)


def _abs_dirac_values(j2):
    j2 = np.asarray(j2, dtype=float)
    return np.stack([j2 + 1.5, j2 + 0.5], axis=-1)


def _const(up, dn):
    def values(j2):
        shape = np.shape(j2)
        return np.stack([np.full(shape, float(up)), np.full(shape, float(dn))], axis=-1)

    return values


def dirac() -> DiagonalOperator:
    """D with eigenvalue 2j + 3/2 on up kets and -2j - 1/2 on down kets."""
    return DiagonalOperator(_dirac_values, "D")


def abs_dirac() -> DiagonalOperator:
    return DiagonalOperator(_abs_dirac_values, "|D|")


def sign_f() -> DiagonalOperator:
    return DiagonalOperator(_const(1, -1), "F")


def proj_up() -> DiagonalOperator:
    return DiagonalOperator(_const(1, 0), "P")


def proj_dn() -> DiagonalOperator:
    return DiagonalOperator(_const(0, 1), "1-P")


# -- representation ---------------------------------------------------------


def _coeff_tables(qv: float):
    def qn(x):
        return q_number(x, qv)

    def sq(x):
        return np.sqrt(np.maximum(qn(x), 0.0))

    def den(x):
        return np.where(x == 0, 1.0, x)

    def labels(j2, mu2, n2):
        return j2 / 2.0, mu2 / 2.0, n2 / 2.0

    def empty(j):
        return np.zeros(np.shape(j) + (2, 2))

    def a_plus(j2, mu2, n2):
        j, mu, n = labels(j2, mu2, n2)
        pref = qv ** ((mu + n - 0.5) / 2) * sq(j + mu + 1)
        c = empty(j)
        c[..., 0, 0] = pref * qv ** (-j - 0.5) * sq(j + n + 1.5) / den(qn(2 * j + 2))
        c[..., 1, 0] = pref * qv ** 0.5 * sq(j - n + 0.5) / den(qn(2 * j + 1) * qn(2 * j + 2))
        c[..., 1, 1] = pref * qv ** (-j) * sq(j + n + 0.5) / den(qn(2 * j + 1))
        return c

    def a_minus(j2, mu2, n2):
        j, mu, n = labels(j2, mu2, n2)
        pref = qv ** ((mu + n - 0.5) / 2) * sq(j - mu)
        c = empty(j)
        c[..., 0, 0] = pref * qv ** (j + 1) * sq(j - n + 0.5) / den(qn(2 * j + 1))
        c[..., 0, 1] = -pref * qv ** 0.5 * sq(j + n + 0.5) / den(qn(2 * j) * qn(2 * j + 1))
        c[..., 1, 1] = pref * qv ** (j + 0.5) * sq(j - n - 0.5) / den(qn(2 * j))
        return c

    def b_plus(j2, mu2, n2):
        j, mu, n = labels(j2, mu2, n2)
        pref = qv ** ((mu + n - 0.5) / 2) * sq(j + mu + 1)
        c = empty(j)
        c[..., 0, 0] = pref * sq(j - n + 1.5) / den(qn(2 * j + 2))
        c[..., 1, 0] = -pref * qv ** (-j - 1) * sq(j + n + 0.5) / den(qn(2 * j + 1) * qn(2 * j + 2))
        c[..., 1, 1] = pref * qv ** -0.5 * sq(j - n + 0.5) / den(qn(2 * j + 1))
        return c

    def b_minus(j2, mu2, n2):
        j, mu, n = labels(j2, mu2, n2)
        pref = qv ** ((mu + n - 0.5) / 2) * sq(j - mu)
        c = empty(j)
        c[..., 0, 0] = -pref * qv ** -0.5 * sq(j + n + 0.5) / den(qn(2 * j + 1))
        c[..., 0, 1] = -pref * qv ** j * sq(j - n + 0.5) / den(qn(2 * j) * qn(2 * j + 1))
        c[..., 1, 1] = -pref * sq(j + n - 0.5) / den(qn(2 * j))
        return c

    return {
        "a+": ((1, 1, 1), a_plus),
        "a-": ((-1, 1, 1), a_minus),
        "b+": ((1, 1, -1), b_plus),
        "b-": ((-1, 1, -1), b_minus),
    }


def _approx_tables(qv: float):
    def root(x):
        return np.sqrt(np.maximum(1.0 - qv ** x, 0.0))

    def diag(up, dn):
        up, dn = np.broadcast_arrays(up, dn)
        c = np.zeros(up.shape + (2, 2))
        c[..., 0, 0] = up
        c[..., 1, 1] = dn
        return c

    def a_plus(j2, mu2, n2):
        s = root(j2 + mu2 + 2)
        return diag(s * root(j2 + n2 + 3), s * root(j2 + n2 + 1))

    def a_minus(j2, mu2, n2):
        e = qv ** (j2 + (mu2 + n2) / 2 + 0.5)
        return diag(e * qv, e)

    def b_plus(j2, mu2, n2):
        e = qv ** ((j2 + n2) / 2 - 0.5) * root(j2 + mu2 + 2)
        return diag(e * qv, e)

    def b_minus(j2, mu2, n2):
        e = -(qv ** ((j2 + mu2) / 2))
        return diag(e * root(j2 + n2 + 1), e * root(j2 + n2 - 1))

    return {
        "a+": ((1, 1, 1), a_plus),
        "a-": ((-1, 1, 1), a_minus),
        "b+": ((1, 1, -1), b_plus),
        "b-": ((-1, 1, -1), b_minus),
    }


class _TargetCompressed:
    __slots__ = ("f", "shift")

    def __init__(self, f, shift):
        self.f, self.shift = f, shift

    def __call__(self, j2, mu2, n2):
        dj, dm, dn = self.shift
        return self.f(j2, mu2, n2) * _target_mask(j2 + dj, mu2 + dm, n2 + dn)


def _letter(table, name: str) -> ShiftOperator:
    star = name.endswith("*")
    base = name[:-1] if star else name
    if base in ("a", "b"):
        op = _letter(table, base + "+") + _letter(table, base + "-")
        op.label = name
        return op.adjoint() if star else op
    if base not in table:
        raise KeyError(f"unknown generator {name!r}")
    shift, f = table[base]
    op = ShiftOperator({shift: f}, 1, base)
    return op.adjoint() if star else op


def spin_rep(name: str, q) -> ShiftOperator:
    """Exact representation of a generator.

    ``name`` is one of a, b, a*, b* or a shift component a+, a-, b+, b-
    (optionally starred).
    """
    return _letter(_coeff_tables(as_q(q).value), name)


def approx_rep(name: str, q) -> ShiftOperator:
    """Diagonal approximation of a generator, compressed onto valid targets.

    The full letters a, b are the sum of their two shift components; the
    off-diagonal spin parts of the exact representation are dropped.
    """
    table = {
        k: (shift, _TargetCompressed(f, shift)) for k, (shift, f) in _approx_tables(as_q(q).value).items()
    }
    return _letter(table, name)


def represent(x, q=None) -> ShiftOperator:
    """The operator of an algebra element in the spinor representation."""
    qv = as_q(q if q is not None else x.q).value
    a = spin_rep("a", qv)
    a_star = a.adjoint()
    b = spin_rep("b", qv)
    b_star = b.adjoint()
    out = ShiftOperator.zero()
    for (l, m, n), c in sorted(x.terms.items()):
        op = ShiftOperator.identity()
        for factor, power in ((a if l >= 0 else a_star, abs(l)), (b, m), (b_star, n)):
            for _ in range(power):
                op = op @ factor
        out = out + op * complex(c) if isinstance(c, complex) else out + op * float(c)
    return out


# -- derivations ------------------------------------------------------------


def _bracket(T: ShiftOperator, lam) -> ShiftOperator:
    return ShiftOperator({k: _Bracket(f, k, lam) for k, f in T.terms.items()}, T.depth)


def delta(T: ShiftOperator, order: int = 1) -> ShiftOperator:
    """[|D|, T], iterated ``order`` times."""
    for _ in range(order):
        T = _bracket(T, _abs_dirac_values)
    return T


def nabla(T: ShiftOperator) -> ShiftOperator:
    """[D^2, T]."""
    return _bracket(T, lambda j2: _dirac_values(j2) ** 2)


def commutator_d(T: ShiftOperator) -> ShiftOperator:
    """[D, T]."""
    return _bracket(T, _dirac_values)


def commutator_f(T: ShiftOperator) -> ShiftOperator:
    """[F, T]."""
    return _bracket(T, _const(1, -1))


# -- materialisation --------------------------------------------------------


def materialize(
    op, space: TruncatedSpace | int, strict: bool = False, dtype=float, max_source_2j: int | None = None
) -> sp.csc_matrix:
    """Sparse matrix of ``op`` on a truncation.

    Entries landing outside the truncation are dropped, or raise
    TruncationError when ``strict``. With ``max_source_2j`` only the
    columns of kets with 2j <= max_source_2j are filled.
    """
    if isinstance(space, int):
        space = enumerate_basis(space)
    if isinstance(op, DiagonalOperator):
        op = op.as_shift()
    rows, cols, vals = [], [], []
    top = space.max2j if max_source_2j is None else min(max_source_2j, space.max2j)
    src = np.arange(int(level_offset(top + 1)))
    j2, mu2, n2, s_spin = (space.j2[src], space.mu2[src], space.n2[src], space.spin[src])
    for shift in op.shifts():
        c = op.coefficient(shift, j2, mu2, n2)
        c = c[src, :, s_spin]  # column of the source spin: (n, 2 targets)
        tj, tm, tn = j2 + shift[0], mu2 + shift[1], n2 + shift[2]
        for t in (UP, DOWN):
            v = c[:, t]
            nz = v != 0
            if not nz.any():
                continue
            idx = space.index_of(tj[nz], tm[nz], tn[nz], t)
            lost = idx < 0
            if lost.any():
                outside = is_valid(tj[nz][lost], tm[nz][lost], tn[nz][lost], t) & (tj[nz][lost] > space.max2j)
                if strict and outside.any():
                    raise TruncationError(f"shift {shift} leaves the truncation 2j <= {space.max2j}")
            rows.append(idx[~lost])
            cols.append(src[nz][~lost])
            vals.append(v[nz][~lost])
    if rows:
        rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        rows = cols = np.zeros(0, int)
        vals = np.zeros(0)
    return sp.csc_matrix((vals.astype(dtype), (rows, cols)), shape=(space.dim, space.dim))


def _level_labels(k: int, spin: int):
    if spin == UP:
        width, dy = k + 2, 1
    else:
        width, dy = k, -1
    if width == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    x, y = np.divmod(np.arange((k + 1) * width, dtype=np.int64), width)
    return np.full(len(x), k, dtype=np.int64), 2 * x - k, 2 * y - k - dy


def _one_level(op: ShiftOperator, k: int, spins):
    total = 0.0
    size = 0.0
    f = op.terms.get((0, 0, 0))
    if f is None:
        return 0.0, 0.0
    for s in spins:
        j2, mu2, n2 = _level_labels(k, s)
        if len(j2) == 0:
            continue
        d = _masked(f, j2, mu2, n2)[:, s, s]
        total += math.fsum(d.real) + (1j * math.fsum(d.imag) if np.iscomplexobj(d) else 0.0)
        size += float(np.abs(d).sum())
    return total, size


def level_traces(op, max2j: int, spin: int | None = None, workers: int = 1, with_magnitude: bool = False):
    """Per-level traces t_k = sum over kets with 2j = k of <ket|op|ket>.

    ``spin`` restricts to up or down kets. Levels are independent, so
    ``workers > 1`` spreads them over threads; the result does not depend
    on the worker count.
    """
    if isinstance(op, DiagonalOperator):
        op = op.as_shift()
    spins = (UP, DOWN) if spin is None else (spin,)
    levels = range(max2j + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda k: _one_level(op, k, spins), levels))
    else:
        results = [_one_level(op, k, spins) for k in levels]
    traces = np.array([r[0] for r in results])
    if with_magnitude:
        return traces, np.array([r[1] for r in results])
    return traces


def _binomial(z: float, k: int) -> float:
    """Generalised binomial coefficient z (z-1) ... (z-k+1) / k!."""
    return math.prod(z - i for i in range(k)) / math.factorial(k)


def binomial_expansion_check(T: ShiftOperator, z: float, order: int, max2j: int) -> np.ndarray:
    """Per-level sup norm of |D|^z T - sum_{k<=order} C(z,k) delta^k(T) |D|^{z-k}.

    Each column of the difference is measured on source level 2j; the top
    level is skipped because its image is cut by the truncation. The
    remainder should fall off like j^{z-order-1}.
    """
    space = enumerate_basis(max2j)
    Dz = abs_dirac().power(z)
    lhs = Dz.as_shift() @ T
    rhs = ShiftOperator.zero()
    dk = T
    for k in range(order + 1):
        rhs = rhs + (dk @ abs_dirac().power(z - k).as_shift()) * _binomial(z, k)
        dk = delta(dk)
    R = abs(materialize(lhs - rhs, space)).tocsc()
    col_max = np.asarray(R.max(axis=0).todense()).ravel()
    out = np.zeros(max2j)
    for k in range(max2j):
        sl = space.level_slice(k)
        out[k] = col_max[sl].max()
    return out
