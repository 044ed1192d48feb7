"""Index cocycles and the Fredholm index of the fundamental unitary.

Closed-form cochains evaluate residues through cosphere symbols and the
tau functionals, so with an exact q they return exact rationals. The
``*_numeric`` variants fit level traces of the actual operators and serve
as an independent check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import AlgebraElement, SUq2
from .fock import UP, enumerate_basis
from .qnum import as_q
from .residues import nc_integral_f, nc_integral_up, numeric_residues, sector_fits, zeta_at_zero
from .spectral import (
    ShiftOperator,
    commutator_d,
    commutator_f,
    delta,
    level_traces,
    materialize,
    nabla,
    proj_up,
    represent,
    sign_f,
)
from .symbols import CosphereElement, symbol_of_pi

__all__ = [
    "UnitaryMatrix",
    "NotUnitaryError",
    "IllConditionedKernelWarning",
    "psi1",
    "psi1_numeric",
    "phi1",
    "phi1_numeric",
    "phi1_nabla",
    "phi3",
    "phi3_numeric",
    "phi2",
    "phi2_prime",
    "phi2_numeric",
    "phi0",
    "phi0_prime",
    "beta",
    "b_beta",
    "chi1_numeric",
    "tau_odd",
    "matrix_pairing",
    "KernelResult",
    "fredholm_index_kernel",
    "fredholm_index_trace",
    "PairingReport",
    "pairing_report",
]


class NotUnitaryError(ValueError):
    pass


class IllConditionedKernelWarning(RuntimeWarning):
    pass


def _frac(num, den, like):
    return Fraction(num, den) if isinstance(like, Fraction) else num / den


class UnitaryMatrix:
    """2x2 matrix of algebra elements; by default the K1 generator [[a, b], [-q b*, a*]]."""

    def __init__(self, q, entries=None, exact: bool = True):
        self.algebra = SUq2(q, exact)
        A = self.algebra
        if entries is None:
            entries = [[A.a, A.b], [-A.q * A.b_star, A.a_star]]
        self.entries = [[e if isinstance(e, AlgebraElement) else A.scalar(e) for e in row] for row in entries]

    @property
    def q(self):
        return self.algebra.q

    def __getitem__(self, kl):
        k, l = kl
        return self.entries[k][l]

    def star(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.algebra.param.q, [[self.entries[l][k].star() for l in range(2)] for k in range(2)])

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        e = [[self[k, 0] * other[0, l] + self[k, 1] * other[1, l] for l in range(2)] for k in range(2)]
        return UnitaryMatrix(self.algebra.param.q, e)

    def is_identity(self) -> bool:
        one = self.algebra.one
        return all(self[k, l] == (one if k == l else one * 0) for k in range(2) for l in range(2))

    def is_unitary(self) -> bool:
        s = self.star()
        return (s @ self).is_identity() and (self @ s).is_identity()

    def check_unitary(self):
        if not self.is_unitary():
            raise NotUnitaryError("U*U = UU* = 1 fails in normal form")

    def pairs(self) -> list[tuple[AlgebraElement, AlgebraElement]]:
        """(U*_kl, U_lk) for k, l = 0, 1: the arguments of a 1-cochain paired with U."""
        s = self.star()
        return [(s[k, l], self[l, k]) for k in range(2) for l in range(2)]


def matrix_pairing(cochain, U: UnitaryMatrix):
    """sum_{k,l} phi(U*_kl, U_lk)."""
    total = 0
    for x, y in U.pairs():
        total = total + cochain(x, y)
    return total


# -- closed-form (symbol) cochains ---------------------------------------------


def _sym(x) -> CosphereElement:
    return x if isinstance(x, CosphereElement) else symbol_of_pi(x)


def _moments(s0: CosphereElement, s1: CosphereElement, powers) -> dict[int, CosphereElement]:
    """degree0(s0 delta^k(s1)) for each k, sharing the products across k."""
    parts = {w: s0.mul_degree0(c) for w, c in s1.by_winding().items() if w}
    out = {}
    for k in powers:
        acc = CosphereElement({}, s0.q)
        for w, p in parts.items():
            acc = acc + p * w ** k
        out[k] = acc
    return out


def psi1(a0, a1):
    """2 int a0 d(a1) P|D|^-1 - int a0 d^2(a1) P|D|^-2 + 2/3 int a0 d^3(a1) P|D|^-3."""
    s0 = _sym(a0)
    m = _moments(s0, _sym(a1), (1, 2, 3))
    return 2 * nc_integral_up(m[1], 1) - nc_integral_up(m[2], 2) + _frac(2, 3, s0.q) * nc_integral_up(m[3], 3)


def phi1(a0, a1):
    """int a0 d(a1) F|D|^-1 - 1/2 int a0 d^2(a1) F|D|^-2 + 1/4 int a0 d^3(a1) F|D|^-3."""
    s0 = _sym(a0)
    m = _moments(s0, _sym(a1), (1, 2, 3))
    q = s0.q
    return nc_integral_f(m[1], 1) - _frac(1, 2, q) * nc_integral_f(m[2], 2) + _frac(1, 4, q) * nc_integral_f(m[3], 3)


def phi3(a0, a1, a2, a3):
    """1/12 int a0 d(a1) d(a2) d(a3) F|D|^-3."""
    s = [_sym(x) for x in (a0, a1, a2, a3)]
    head = s[0] * s[1].delta() * s[2].delta()
    return _frac(1, 12, s[0].q) * nc_integral_f(_moments(head, s[3], (1,))[1], 3)


def phi2(a0, a1, a2):
    """1/24 int a0 d(a1) d^2(a2) F|D|^-3."""
    s = [_sym(x) for x in (a0, a1, a2)]
    head = s[0] * s[1].delta()
    return _frac(1, 24, s[0].q) * nc_integral_f(_moments(head, s[2], (2,))[2], 3)


def phi2_prime(a0, a1, a2):
    return -phi2(a0, a1, a2)


# -- numeric (trace) cochains ---------------------------------------------------


def _op(x) -> ShiftOperator:
    return x if isinstance(x, ShiftOperator) else represent(x)


def psi1_numeric(a0, a1, max2j: int = 60, workers: int = 1):
    A0, A1 = _op(a0), _op(a1)
    r = [numeric_residues(A0 @ delta(A1, k), max2j, "up", workers)[3 - k] for k in (1, 2, 3)]
    return 2 * r[0] - r[1] + 2 / 3 * r[2]


def phi1_numeric(a0, a1, max2j: int = 60, workers: int = 1):
    A0, A1 = _op(a0), _op(a1)
    r = [numeric_residues(A0 @ delta(A1, k), max2j, "F", workers)[3 - k] for k in (1, 2, 3)]
    return r[0] - 0.5 * r[1] + 0.25 * r[2]


def phi1_nabla(a0, a1, max2j: int = 60, workers: int = 1):
    """int a0 [D,a1] |D|^-1 - 1/4 int a0 nabla([D,a1]) |D|^-3 + 1/8 int a0 nabla^2([D,a1]) |D|^-5."""
    A0, A1 = _op(a0), _op(a1)
    c = commutator_d(A1)
    terms = ((A0 @ c, 1, 2, 1.0), (A0 @ nabla(c), 3, 3, -0.25), (A0 @ nabla(nabla(c)), 5, 4, 0.125))
    total = 0.0
    for T, k, deg, w in terms:
        total += w * sector_fits(T, max2j, deg, workers).residue(k)
    return total


def phi3_numeric(a0, a1, a2, a3, max2j: int = 60, workers: int = 1):
    A = [_op(x) for x in (a0, a1, a2, a3)]
    T = A[0] @ delta(A[1]) @ delta(A[2]) @ delta(A[3])
    return numeric_residues(T, max2j, "F", workers).res3 / 12


def phi2_numeric(a0, a1, a2, max2j: int = 60, workers: int = 1):
    A = [_op(x) for x in (a0, a1, a2)]
    T = A[0] @ delta(A[1]) @ delta(A[2], 2)
    return numeric_residues(T, max2j, "F", workers).res3 / 24


def phi0(a, max2j: int = 60, workers: int = 1):
    """Tr(F a |D|^-z) at z = 0."""
    return zeta_at_zero(_op(a), "F", max2j, workers)


def phi0_prime(a, max2j: int = 60, workers: int = 1):
    """Tr(a |D|^-z) at z = 0."""
    return zeta_at_zero(_op(a), None, max2j, workers)


def beta(a, max2j: int = 60, workers: int = 1):
    """2 Tr(P a |D|^-z) at z = 0."""
    return 2 * zeta_at_zero(_op(a), "up", max2j, workers)


def b_beta(a0, a1, max2j: int = 60, workers: int = 1):
    return beta(a0 * a1, max2j, workers) - beta(a1 * a0, max2j, workers)


def chi1_numeric(a0, a1, max2j: int = 60, workers: int = 1):
    """Truncated trace of a0 [F, a1]."""
    T = _op(a0) @ commutator_f(_op(a1))
    t = level_traces(T, max2j, workers=workers)
    return float(np.real_if_close(np.sum(t)))


# -- the Masuda-Nakagami-Watanabe cocycle ------------------------------------------


def _tau_odd_monomial(m1, m2, q):
    l, m, n = m1
    l2, m2_, n2 = m2
    if n + n2 != m + m2_ or l != -l2:
        return 0
    if l < 0:
        return -_tau_odd_monomial(m2, m1, q)
    if n == m:
        return 0
    num = (n - m) * q ** (l * (m2_ + n2))
    for i in range(1, l + 1):
        num *= 1 - q ** (2 * i)
    den = 1
    for i in range(l + 1):
        den *= 1 - q ** (2 * i + 2 * n + 2 * n2)
    return num / den


def tau_odd(x, y, q=None):
    """The cyclic 1-cocycle on PBW monomials, extended bilinearly.

    Arguments are AlgebraElements or monomial triples (l, m, n); for l < 0
    the value is fixed by antisymmetry.
    """
    if q is None and not isinstance(x, AlgebraElement) and not isinstance(y, AlgebraElement):
        raise ValueError("q is required when both arguments are monomial triples")
    if not isinstance(x, AlgebraElement):
        x = AlgebraElement({tuple(x): 1}, q if q is not None else y.q)
    if not isinstance(y, AlgebraElement):
        y = AlgebraElement({tuple(y): 1}, q if q is not None else x.q)
    qq = x.q
    total = 0
    for k1, c1 in x.terms.items():
        for k2, c2 in y.terms.items():
            v = _tau_odd_monomial(k1, k2, qq)
            if v:
                total += c1 * c2 * v
    return total


# -- Fredholm index -------------------------------------------------------------


@dataclass
class KernelResult:
    dim_kernel: int
    dim_cokernel_side: int
    index: int
    kernel_vectors: list = field(default_factory=list, repr=False)
    gap_ratio: float = float("inf")
    smallest_kept: float = float("inf")


def _up_columns(space_max: int, space_dom: int):
    big = enumerate_basis(space_max)
    up = np.nonzero(big.spin == UP)[0]
    rows = up
    cols = up[big.j2[up] <= space_dom]
    return big, rows, cols


def _compressed(U: UnitaryMatrix, max2j: int):
    """P U P as a map from up kets (2j <= max2j) to up kets (2j <= max2j + 1), both x C^2."""
    big, rows, cols = _up_columns(max2j + 1, max2j)
    qv = as_q(U.q).value
    blocks = [[None, None], [None, None]]
    for k in range(2):
        for l in range(2):
            M = materialize(represent(U[k, l], qv), big).tocsr()
            blocks[k][l] = M[rows][:, cols]
    M = sp.bmat(blocks, format="csc")
    grade_r = np.concatenate([(big.mu2[rows] - big.n2[rows]) // 2 + c for c in (0, 1)])
    grade_c = np.concatenate([(big.mu2[cols] - big.n2[cols]) // 2 + c for c in (0, 1)])
    return big, rows, cols, M, grade_r, grade_c


def _kernel(M, grade_r, grade_c, tol):
    dim = 0
    vectors = []
    zero_max, kept_min = 0.0, np.inf
    for g in np.unique(grade_c):
        ci = np.nonzero(grade_c == g)[0]
        ri = np.nonzero(grade_r == g)[0]
        block = M[ri][:, ci].toarray()
        if block.shape[0] == 0:
            dim += len(ci)
            continue
        _, s, vh = np.linalg.svd(block)
        s_full = np.zeros(len(ci))
        s_full[: len(s)] = s
        small = s_full < tol
        dim += int(small.sum())
        if small.any():
            zero_max = max(zero_max, float(s_full[small].max()))
            for i in np.nonzero(small)[0]:
                v = np.zeros(M.shape[1])
                v[ci] = vh[i] if i < vh.shape[0] else 0.0
                vectors.append(v)
        if (~small).any():
            kept_min = min(kept_min, float(s_full[~small].min()))
    return dim, vectors, zero_max, kept_min


def fredholm_index_kernel(U: UnitaryMatrix | None = None, max2j: int = 8, tol: float = 1e-8, q=0.5) -> KernelResult:
    """dim ker PUP - dim ker PU*P on the truncated up spinors (x) C^2.

    The compressed operators are taken as maps from levels <= max2j into
    levels <= max2j + 1, which they reach exactly, and split into blocks
    of the conserved grading mu - n + component.
    """
    if max2j < 4:
        raise ValueError("max2j must be at least 4")
    U = U if U is not None else UnitaryMatrix(q)
    U.check_unitary()
    big, rows, cols, M, gr, gc = _compressed(U, max2j)
    dim_u, vecs, z1, k1 = _kernel(M, gr, gc, tol)
    _, _, _, Ms, gr2, gc2 = _compressed(U.star(), max2j)
    dim_s, _, z2, k2 = _kernel(Ms, gr2, gc2, tol)
    zero_max, kept_min = max(z1, z2), min(k1, k2)
    ratio = kept_min / zero_max if zero_max > 0 else float("inf")
    if zero_max > 0 and ratio < 10:
        warnings.warn(f"singular value gap ratio {ratio:.3g} below 10", IllConditionedKernelWarning)
    # express kernel vectors as ((index, component) -> amplitude) over the full truncation
    n = len(cols)
    lifted = []
    for v in vecs:
        w = np.zeros((2, big.dim))
        w[0, cols] = v[:n]
        w[1, cols] = v[n:]
        lifted.append(w)
    return KernelResult(dim_u, dim_s, dim_u - dim_s, lifted, ratio, kept_min)


def fredholm_index_trace(U: UnitaryMatrix | None = None, max2j: int = 60, q=0.5, workers: int = 1) -> float:
    """Tr(P - P U* P U P) - Tr(P - P U P U* P), summed over levels <= max2j."""
    U = U if U is not None else UnitaryMatrix(q)
    U.check_unitary()
    qv = as_q(U.q).value
    P = proj_up().as_shift()
    ops = {(k, l): represent(U[k, l], qv) for k in range(2) for l in range(2)}
    adj = {(k, l): ops[(l, k)].adjoint() for k in range(2) for l in range(2)}
    X = ShiftOperator.zero()
    for i in range(2):
        for l in range(2):
            X = X + P @ ops[(i, l)] @ P @ adj[(l, i)] @ P - P @ adj[(i, l)] @ P @ ops[(l, i)] @ P
    t = level_traces(X, max2j, spin=UP, workers=workers)
    return float(np.sum(t))


@dataclass
class PairingReport:
    q: float
    max2j: int
    psi1_value: object
    psi1_numeric: float
    chi1_value: float
    b_beta_total: float
    index_kernel: int
    index_trace: float
    degree0_symbol: CosphereElement
    breakdown: dict


def pairing_report(q=0.5, max2j: int = 60, kernel_2j: int = 8, workers: int = 1, tol: float = 1e-8) -> PairingReport:
    U = UnitaryMatrix(q)
    Uf = UnitaryMatrix(as_q(q).value, exact=False)
    total = None
    for x, y in U.pairs():
        term = symbol_of_pi(x) * symbol_of_pi(y).delta()
        total = term if total is None else total + term
    from .symbols import degree0

    d0 = degree0(total)
    breakdown = {
        "2 int X P|D|^-1": 2 * sum(nc_integral_up(symbol_of_pi(x) * symbol_of_pi(y).delta(1), 1) for x, y in U.pairs()),
        "-int X' P|D|^-2": -sum(nc_integral_up(symbol_of_pi(x) * symbol_of_pi(y).delta(2), 2) for x, y in U.pairs()),
        "2/3 int X'' P|D|^-3": Fraction(2, 3)
        * sum(nc_integral_up(symbol_of_pi(x) * symbol_of_pi(y).delta(3), 3) for x, y in U.pairs()),
    }
    return PairingReport(
        q=as_q(q).value,
        max2j=max2j,
        psi1_value=matrix_pairing(psi1, U),
        psi1_numeric=sum(psi1_numeric(x, y, max2j, workers) for x, y in Uf.pairs()),
        chi1_value=sum(chi1_numeric(x, y, max2j, workers) for x, y in Uf.pairs()),
        b_beta_total=sum(b_beta(x, y, max2j, workers) for x, y in Uf.pairs()),
        index_kernel=fredholm_index_kernel(U, kernel_2j, tol).index,
        index_trace=fredholm_index_trace(U, max2j, workers=workers),
        degree0_symbol=d0,
        breakdown=breakdown,
    )
