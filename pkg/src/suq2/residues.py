"""Trace functionals on the quantum disks and residues of zeta functions.

For a disk element x the truncated traces Tr_N(pi(x)) behave like

    (N + 3/2) tau1(x) + tau0_up(x) = (N + 1/2) tau1(x) + tau0_dn(x)

up to rapidly decaying terms. Residues of Tr(T |D|^-z) at z = 1, 2, 3
are then bilinear combinations of these functionals applied to the
winding-zero part of the cosphere symbol of T, with the circle leg
dropped. The numeric path instead fits per-level traces of the operator
itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp

from .algebra import AlgebraElement, DiskElement, _is_zero
from .fock import DOWN, UP
from .qnum import ResidueFitError, as_q, fit_level_polynomial, hurwitz_zeta
from .spectral import DiagonalOperator, ShiftOperator, level_traces, represent
from .symbols import BElement, CosphereElement, degree0, rho, symbol_of_pi

__all__ = [
    "TauValue",
    "ResidueTriple",
    "SectorFit",
    "disk_rep",
    "tau_closed",
    "tau_numeric",
    "symbol_of",
    "nc_integral",
    "nc_integral_up",
    "nc_integral_dn",
    "nc_integral_f",
    "sector_fits",
    "numeric_residues",
    "zeta_at_zero",
    "SECTOR_OFFSET",
]

PLUS, MINUS = "+", "-"

# |D| eigenvalue on level k = 2j is k + offset
SECTOR_OFFSET = {UP: 1.5, DOWN: 0.5}


class TauValue(NamedTuple):
    tau1: object
    tau0_up: object
    tau0_dn: object


class ResidueTriple(NamedTuple):
    res3: object
    res2: object
    res1: object
    value_at_0: object = None


def _sign(side: str) -> int:
    if side not in (PLUS, MINUS):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    return 1 if side == PLUS else -1


def disk_rep(side: str, x: DiskElement, cutoff: int) -> sp.csr_matrix:
    """pi_+-(x) on span(e_0..e_cutoff): a e_x = sqrt(1 - q^(2x+2)) e_(x+1), b e_x = +-q^x e_x."""
    sign = _sign(side)
    qv = float(x.q)
    n = cutoff + 1
    xs = np.arange(n, dtype=float)
    a = sp.diags(np.sqrt(1.0 - qv ** (2 * xs[:-1] + 2)), -1, shape=(n, n), format="csr")
    a_star = a.T.tocsr()
    b = sp.diags(sign * qv ** xs, 0, format="csr")
    out = sp.csr_matrix((n, n))
    for (k, m), c in x.terms.items():
        g = a if k >= 0 else a_star
        mono = sp.identity(n, format="csr")
        for _ in range(abs(k)):
            mono = mono @ g
        for _ in range(m):
            mono = mono @ b
        out = out + complex(c) * mono if isinstance(c, complex) else out + float(c) * mono
    return out


def _as_disk(x, q=None) -> DiskElement:
    if isinstance(x, DiskElement):
        return x
    if isinstance(x, AlgebraElement):
        return x.restrict_disk()
    raise TypeError(f"expected a disk element, got {type(x).__name__}")


def tau_closed(x, side: str) -> TauValue:
    """Closed forms: tau1(a^k b^m) = [k=m=0]; tau0(b^m) = (+-1)^m / (1 - q^m); tau0_up(1) = -1/2."""
    x = _as_disk(x)
    sign = _sign(side)
    q = x.q
    half = Fraction(1, 2) if isinstance(q, Fraction) else 0.5
    t1 = t_up = t_dn = 0
    for (k, m), c in x.terms.items():
        if k != 0:
            continue
        if m == 0:
            t1 += c
            t_up += -half * c
            t_dn += half * c
        else:
            v = c * sign ** m / (1 - q ** m)
            t_up += v
            t_dn += v
    return TauValue(t1, t_up, t_dn)


def tau_numeric(x, side: str, n_max: int = 200) -> TauValue:
    """Fit Tr_N = (N + 3/2) tau1 + tau0_up over the upper half of N <= n_max."""
    x = _as_disk(x)
    x = DiskElement({k: complex(c) if isinstance(c, complex) else float(c) for k, c in x.terms.items()}, float(x.q))
    diag = disk_rep(side, x, n_max).diagonal()
    partial = np.cumsum(diag)
    N = np.arange(n_max + 1)
    lo = n_max // 2
    A = np.stack([N[lo:] + 1.5, np.ones(n_max + 1 - lo)], axis=1)
    (t1, t_up), *_ = np.linalg.lstsq(A, partial[lo:], rcond=None)
    resid = partial[lo:] - A @ np.array([t1, t_up])
    if np.max(np.abs(resid)) > 1e-9 * max(1.0, np.max(np.abs(partial[lo:]))):
        raise ResidueFitError("truncated traces are not affine in N on the upper half")
    t1, t_up = float(np.real_if_close(t1)), float(np.real_if_close(t_up))
    return TauValue(t1, t_up, t_up + t1)


# -- residue formulas -----------------------------------------------------------


def symbol_of(T) -> CosphereElement:
    if isinstance(T, CosphereElement):
        return T
    if isinstance(T, BElement):
        return rho(T)
    if isinstance(T, AlgebraElement):
        return symbol_of_pi(T)
    raise TypeError(f"no cosphere symbol for {type(T).__name__}")


@lru_cache(maxsize=1 << 14)
def _tau_table(disk_key, side, q):
    return tau_closed(DiskElement({disk_key: 1}, q), side)


def _pair(T, pairs) -> object:
    """sum over pairs (f, g) of (f (x) g)(r rho(T)^0); f, g index TauValue fields."""
    c = symbol_of(T)
    total = 0
    for (p, m), coeff in degree0(c).drop_circle().items():
        tp = _tau_table(p, PLUS, c.q)
        tm = _tau_table(m, MINUS, c.q)
        for f, g in pairs:
            total += coeff * tp[f] * tm[g]
    return total


T1, UP0, DN0 = 0, 1, 2

_FULL = {3: ((T1, T1), (T1, T1)), 2: ((T1, UP0), (T1, DN0), (UP0, T1), (DN0, T1)), 1: ((UP0, DN0), (DN0, UP0))}
_UP = {3: ((T1, T1),), 2: ((T1, DN0), (UP0, T1)), 1: ((UP0, DN0),)}
_DN = {3: ((T1, T1),), 2: ((T1, UP0), (DN0, T1)), 1: ((DN0, UP0),)}


def _check_order(k):
    if k not in (1, 2, 3):
        raise ValueError(f"residue order must be 1, 2 or 3, got {k}")


def nc_integral(T, k: int):
    """Residue of Tr(T |D|^-z) at z = k, from the cosphere symbol of T."""
    _check_order(k)
    return _pair(T, _FULL[k])


def nc_integral_up(T, k: int):
    """Same with T compressed to the up spinors."""
    _check_order(k)
    return _pair(T, _UP[k])


def nc_integral_dn(T, k: int):
    _check_order(k)
    return _pair(T, _DN[k])


def nc_integral_f(T, k: int):
    """Residue of Tr(T F |D|^-z) at z = k."""
    return nc_integral_up(T, k) - nc_integral_dn(T, k)


# -- numeric path -------------------------------------------------------------


@dataclass(frozen=True)
class SectorFit:
    """Polynomial-plus-remainder fits of the up and down level traces."""

    up: object
    down: object

    def residue(self, k: int, weights=(1, 1)):
        """Residue at z = k of sum_s w_s sum_levels t_s h_s^-z (the h^(k-1) coefficient)."""
        out = 0.0
        for w, fit in zip(weights, (self.up, self.down)):
            if w and fit is not None:
                out += w * (float(fit.coeffs[k - 1]) if k - 1 < len(fit.coeffs) else 0.0)
        return out

    def value_at_zero(self, weights=(1, 1), precision="standard"):
        out = 0.0
        for w, fit in zip(weights, (self.up, self.down)):
            if w and fit is not None:
                out += w * float(fit.value_at_zero(precision))
        return out


def _as_operator(T, q=None):
    if isinstance(T, AlgebraElement):
        return represent(T, q)
    if isinstance(T, DiagonalOperator):
        return T.as_shift()
    return T


def sector_fits(
    T,
    max2j: int = 60,
    degree: int = 2,
    workers: int = 1,
    rtol: float = 1e-7,
    precision: str = "standard",
    sectors=(UP, DOWN),
) -> SectorFit:
    """Fit the per-level traces of T on each spin sector."""
    op = _as_operator(T)
    fits = {}
    for s in (UP, DOWN):
        if s not in sectors:
            fits[s] = None
            continue
        t, mag = level_traces(op, max2j, spin=s, workers=workers, with_magnitude=True)
        t = np.real_if_close(t)
        if np.iscomplexobj(t):
            raise ResidueFitError("level traces are not real")
        fits[s] = fit_level_polynomial(t, SECTOR_OFFSET[s], degree, rtol, precision, magnitude=mag)
    return SectorFit(fits[UP], fits[DOWN])


_WEIGHTS = {None: (1, 1), "up": (1, 0), "dn": (0, 1), "F": (1, -1)}


def numeric_residues(
    T, max2j: int = 60, projector=None, workers: int = 1, precision: str = "standard", degree: int = 2
) -> ResidueTriple:
    """Residues at z = 3, 2, 1 and the value at z = 0 from fitted level traces.

    ``projector`` is None, "up", "dn" or "F" (T multiplied by P_up, P_dn or F).
    """
    w = _WEIGHTS[projector]
    sectors = tuple(s for s, x in zip((UP, DOWN), w) if x)
    fit = sector_fits(T, max2j, degree, workers, precision=precision, sectors=sectors)
    return ResidueTriple(fit.residue(3, w), fit.residue(2, w), fit.residue(1, w), fit.value_at_zero(w, precision))


def zeta_at_zero(T, projector=None, max2j: int = 60, workers: int = 1, precision: str = "standard") -> float:
    """Value at z = 0 of Tr(T |D|^-z), continued through the Hurwitz decomposition."""
    op = _as_operator(T)
    if isinstance(op, ShiftOperator) and (0, 0, 0) not in op.terms:
        return 0.0
    return numeric_residues(op, max2j, projector, workers, precision).value_at_0
