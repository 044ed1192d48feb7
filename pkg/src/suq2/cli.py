"""Command-line verification campaigns with machine-readable reports.

Each suite returns rows {name, anchor, target, computed, residual, pass};
a row passes when its residual is within the row tolerance. The process
exits 0 when every row passes, 1 otherwise and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import itertools
import json
import math
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable

import numpy as np

__all__ = ["RunConfig", "ConfigError", "SUITES", "run", "format_report", "load_config", "main"]


class ConfigError(ValueError):
    """Invalid run configuration (usage error)."""


@dataclass
class RunConfig:
    q: float = 0.5
    max2j: int = 40
    trace_2j: int = 60
    kernel_2j: int = 12
    tol_kernel: float = 1e-8
    tol_check: float = 1e-6
    precision: str = "standard"
    output: str = "json"
    out_file: str | None = None
    seed: int = 0
    workers: int = 1
    strict_truncation: bool = False

    def validate(self) -> "RunConfig":
        if not 0 < self.q < 1:
            raise ConfigError(f"q must lie in (0, 1), got {self.q}")
        if self.max2j < 4:
            raise ConfigError(f"max2j must be at least 4 (interior region is empty), got {self.max2j}")
        if self.trace_2j < 10:
            raise ConfigError(f"trace_2j must be at least 10, got {self.trace_2j}")
        if self.kernel_2j < 4:
            raise ConfigError(f"kernel_2j must be at least 4, got {self.kernel_2j}")
        if not (self.tol_kernel > 0 and self.tol_check > 0):
            raise ConfigError("tolerances must be positive")
        if self.precision not in ("standard", "extended"):
            raise ConfigError(f"precision must be standard or extended, got {self.precision!r}")
        if self.output not in ("json", "csv", "text"):
            raise ConfigError(f"output must be json, csv or text, got {self.output!r}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_KEY_ALIASES = {"max_2j": "max2j", "tol": "tol_check"}


def _coerce_field(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    return raw


def load_config(path: str) -> dict:
    """Read key=value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            key = _KEY_ALIASES.get(key, key)
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce_field(key, value)
    return out


# -- rows ---------------------------------------------------------------------


def _plain(x):
    """JSON-friendly scalar: exact rationals and real complexes become floats, non-finite floats strings."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, complex) or np.iscomplexobj(x):
        x = complex(x)
        if x.imag != 0:
            return f"{x.real!r}{x.imag:+}j"
        x = x.real
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return x


def _row(name: str, anchor: str, target, computed, residual: float, tol: float) -> dict:
    return {
        "name": name,
        "anchor": anchor,
        "target": _plain(target),
        "computed": _plain(computed),
        "residual": _plain(residual),
        "pass": bool(residual <= tol),
    }


def _error_row(name: str, anchor: str, target, exc: Exception) -> dict:
    return {
        "name": name,
        "anchor": anchor,
        "target": _plain(target),
        "computed": f"{type(exc).__name__}: {exc}",
        "residual": None,
        "pass": False,
    }


class _Rows(list):
    """Row collector; a check that raises becomes a failing row."""

    def check(self, name: str, anchor: str, target, fn: Callable[[], tuple], tol: float):
        """fn returns (computed, residual)."""
        try:
            computed, residual = fn()
        except Exception as exc:  # noqa: BLE001 - reported as a failing row
            self.append(_error_row(name, anchor, target, exc))
            return
        self.append(_row(name, anchor, target, computed, float(residual), tol))

    def close_to(self, name: str, anchor: str, target, fn: Callable[[], object], tol: float):
        def inner():
            v = fn()
            return v, abs(complex(v) - complex(target))

        self.check(name, anchor, target, inner, tol)


# -- suites -------------------------------------------------------------------


def suite_relations(cfg: RunConfig) -> list[dict]:
    from .fock import enumerate_basis
    from .spectral import (
        ShiftOperator,
        commutator_d,
        delta,
        materialize,
        proj_dn,
        proj_up,
        spin_rep,
    )

    rows = _Rows()
    q = cfg.q
    space = enumerate_basis(cfg.max2j)
    interior = cfg.max2j - 2  # two generators move 2j by at most 2

    def sup(op, reach=interior):
        M = materialize(op, space, strict=cfg.strict_truncation, max_source_2j=reach)
        return float(abs(M).max()) if M.nnz else 0.0

    a, b = spin_rep("a", q), spin_rep("b", q)
    a_s, b_s = a.adjoint(), b.adjoint()
    one = ShiftOperator.identity()
    relations = [
        ("ba - q ab", "relation ba = q ab", b @ a - (a @ b) * q),
        ("b*a - q ab*", "relation b*a = q ab*", b_s @ a - (a @ b_s) * q),
        ("bb* - b*b", "relation bb* = b*b", b @ b_s - b_s @ b),
        ("a*a + q^2 bb* - 1", "relation a*a + q^2 bb* = 1", a_s @ a + (b @ b_s) * (q * q) - one),
        ("aa* + bb* - 1", "relation aa* + bb* = 1", a @ a_s + b @ b_s - one),
    ]
    for name, anchor, op in relations:
        rows.check(name, anchor, 0, lambda op=op: (r := sup(op), r), 1e-12)

    for g in ("a", "b"):
        def adj(g=g):
            M = materialize(spin_rep(g, q), space, max_source_2j=interior)
            S = materialize(spin_rep(g + "*", q), space, max_source_2j=interior + 1)
            keep = np.nonzero(space.j2 <= interior)[0]
            r = float(abs(M.T.tocsc()[keep][:, keep] - S[keep][:, keep]).max())
            return r, r

        rows.check(f"pi({g})^T = pi({g}*)", "adjoint consistency of the representation", 0, adj, 1e-13)

    P, Q = proj_up().as_shift(), proj_dn().as_shift()
    for g in ("a", "b"):
        for side, sign in (("+", 1), ("-", -1)):
            x = spin_rep(g + side, q)
            diag = P @ x @ P + Q @ x @ Q
            graded = P @ x @ P - Q @ x @ Q
            rows.check(
                f"delta({g}{side}) = {'+' if sign > 0 else '-'}(P{g}{side}P + Q{g}{side}Q)",
                "delta of a shift component is its signed diagonal part",
                0,
                lambda x=x, d=diag, s=sign: (r := sup(delta(x) - d * s, cfg.max2j - 1), r),
                1e-13,
            )
            rows.check(
                f"delta([D,{g}{side}]) = P{g}{side}P - Q{g}{side}Q",
                "delta of [D, shift component] is its graded diagonal part",
                0,
                lambda x=x, g_=graded: (r := sup(delta(commutator_d(x)) - g_, cfg.max2j - 1), r),
                1e-13,
            )
    return rows


def _level_sup(M, space, levels) -> np.ndarray:
    col = np.asarray(abs(M).max(axis=0).todense()).ravel()
    return np.array([col[space.level_slice(k)].max() for k in levels])


def suite_smoothing(cfg: RunConfig) -> list[dict]:
    from .fock import enumerate_basis
    from .spectral import ShiftOperator, abs_dirac, approx_rep, binomial_expansion_check, materialize, proj_up, spin_rep

    rows = _Rows()
    q = cfg.q
    space = enumerate_basis(cfg.max2j)
    levels = list(range(10, min(30, cfg.max2j - 1) + 1))
    D5 = abs_dirac().power(5).as_shift()
    for g in ("a", "b", "a*", "b*"):
        def mono(g=g):
            if len(levels) < 2:
                raise ConfigError("smoothing window 2j in [10, 30] needs max2j >= 12")
            M = materialize((spin_rep(g, q) - approx_rep(g, q)) @ D5, space)
            s = _level_sup(M, space, levels)
            bad = int(np.sum(np.diff(s) >= 0))
            return bad, bad

        rows.check(
            f"(pi({g}) - pi_approx({g})) |D|^5 decreasing on 2j in [{levels[0]}, {levels[-1] if levels else 10}]",
            "approximate representation differs by a smoothing operator",
            0,
            mono,
            0,
        )

    top = min(cfg.max2j, 32)
    fit_levels = np.arange(10, top)
    P = proj_up().as_shift()
    cases = (
        ("pi(a)", lambda: spin_rep("a", q), -1.0, 3),
        ("P pi(a) P", lambda: P @ spin_rep("a", q) @ P, -2.0, 2),
    )
    for label, build, z, order in cases:
        target = z - order - 1

        def slope(build=build, z=z, order=order, target=target):
            if len(fit_levels) < 4:
                raise ConfigError("binomial expansion fit needs max2j >= 14")
            r = binomial_expansion_check(build(), z, order, top)[fit_levels]
            s = float(np.polyfit(np.log(fit_levels + 1.5), np.log(r), 1)[0])
            return s, max(0.0, s - target)

        rows.check(
            f"binomial expansion remainder of |D|^{z:g} {label}, order {order}: log-log slope",
            "asymptotic expansion of |D|^z T in powers of delta",
            target,
            slope,
            0.25,
        )

    def ident():
        r = float(binomial_expansion_check(ShiftOperator.identity(), -1.0, 3, min(cfg.max2j, 12)).max())
        return r, r

    rows.check("binomial expansion remainder of the identity", "asymptotic expansion of |D|^z T in powers of delta", 0, ident, 1e-13)
    return rows


def _random_b_element(rng: random.Random, ba, letters):
    out = ba.one * 0
    for _ in range(rng.randint(1, 2)):
        word = ba.one * rng.choice((1, -1, 2, Fraction(1, 2)))
        for _ in range(rng.randint(1, 3)):
            word = word * ba.letter(rng.choice(letters))
        out = out + word
    return out


def suite_symbols(cfg: RunConfig) -> list[dict]:
    from .algebra import SUq2, normal_form
    from .fock import enumerate_basis
    from .index import UnitaryMatrix
    from .spectral import ShiftOperator, materialize, represent, spin_rep
    from .symbols import LETTERS, BAlgebra, CosphereElement, degree0, pi_in_b, rho, symbol_deviation, symbol_of_pi

    rows = _Rows()
    A = SUq2(cfg.q)
    q = A.q
    ba = BAlgebra(cfg.q)
    rng = random.Random(cfg.seed)

    def multiplicative():
        bad = 0
        for _ in range(200):
            x, y = _random_b_element(rng, ba, LETTERS), _random_b_element(rng, ba, LETTERS)
            bad += rho(x * y) != rho(x) * rho(y)
        return bad, bad

    rows.check("rho(xy) = rho(x) rho(y) on 200 sampled pairs (failures)", "symbol map is multiplicative", 0, multiplicative, 0)

    def star():
        bad = 0
        for _ in range(100):
            x = _random_b_element(rng, ba, LETTERS)
            bad += rho(x.star()) != rho(x).star()
        return bad, bad

    rows.check("rho(x*) = rho(x)* on 100 sampled elements (failures)", "symbol map is a *-morphism", 0, star, 0)

    def degree_zero():
        U = UnitaryMatrix(q)
        total = None
        for x, y in U.pairs():
            term = symbol_of_pi(x) * symbol_of_pi(y).delta()
            total = term if total is None else total + term
        expected = CosphereElement.simple(A.disk(0, 0), A.disk(0, 2), 0, q) * (2 * (1 - q**2))
        diff = degree0(total) - expected
        r = max((abs(c) for c in diff.terms.values()), default=0)
        return float(r), float(r)

    rows.check("sum degree0 rho(U*_kl delta U_lk) - 2(1-q^2) 1 (x) b^2", "degree-zero symbol of the pairing operand", 0, degree_zero, 0)

    def delta_sq():
        bad = sum(rho(pi_in_b(A.letter(g)).delta(2)) != rho(pi_in_b(A.letter(g))) for g in ("a", "b", "a*", "b*"))
        return bad, bad

    rows.check("rho(delta^2 x) = rho(x) for the generators (failures)", "delta squared acts trivially on generator symbols", 0, delta_sq, 0)

    def normal_forms():
        space = enumerate_basis(8)
        reps = {g: spin_rep(g, cfg.q) for g in ("a", "a*", "b", "b*")}
        worst = 0.0
        for _ in range(40):
            word = [rng.choice(("a", "a*", "b", "b*")) for _ in range(rng.randint(1, 4))]
            op = ShiftOperator.identity()
            for g in word:
                op = op @ reps[g]
            nf = normal_form(word, A)
            diff = materialize(op - represent(nf, cfg.q), space, max_source_2j=8 - len(word))
            if diff.nnz:
                worst = max(worst, float(abs(diff).max()))
        return worst, worst

    rows.check("normal form vs operator product at 2J=8 (40 words)", "normal ordering is faithful to the representation", 0, normal_forms, 1e-12)

    top = min(cfg.max2j, 30)
    for g in ("a", "b", "a*", "b*"):
        def decay(g=g):
            d = symbol_deviation(A.letter(g), top)
            k = np.arange(6, top)
            rate = float(np.exp(np.polyfit(k, np.log(d[k]), 1)[0]))
            return rate, max(0.0, rate - float(q))

        rows.check(
            f"diag pi({g}) - symbol operator: decay rate per level",
            "symbol reproduces the diagonal part up to rapid decay",
            float(q),
            decay,
            1e-3,
        )
    return rows


def suite_tau(cfg: RunConfig) -> list[dict]:
    from .algebra import SUq2
    from .residues import disk_rep, tau_closed, tau_numeric

    rows = _Rows()
    A = SUq2(cfg.q)
    q = A.q
    half = Fraction(1, 2)
    one = A.disk(0, 0)
    for side in ("+", "-"):
        sgn = 1 if side == "+" else -1
        rows.close_to(f"tau1(1) [{side}]", "basic equality tau1(1) = 1", 1, lambda s=side: tau_closed(one, s).tau1, 0)
        rows.close_to(f"tau0_up(1) [{side}]", "basic equality tau0_up(1) = -1/2", -half, lambda s=side: tau_closed(one, s).tau0_up, 0)
        rows.close_to(f"tau0_dn(1) [{side}]", "basic equality tau0_dn(1) = 1/2", half, lambda s=side: tau_closed(one, s).tau0_dn, 0)
        for n in (1, 2, 3):
            bn = A.disk(0, n)
            rows.close_to(f"tau1(b^{n}) [{side}]", "basic equality tau1(b^n) = 0", 0, lambda s=side, x=bn: tau_closed(x, s).tau1, 0)
            target = Fraction(sgn**n) / (1 - q**n)
            rows.close_to(
                f"tau0_up(b^{n}) [{side}]", "basic equality tau0(b^n) = (+-1)^n/(1-q^n)", target, lambda s=side, x=bn: tau_closed(x, s).tau0_up, 0
            )
            rows.close_to(
                f"tau0_dn(b^{n}) [{side}]", "basic equality tau0(b^n) = (+-1)^n/(1-q^n)", target, lambda s=side, x=bn: tau_closed(x, s).tau0_dn, 0
            )

    def numeric_vs_closed():
        worst = 0.0
        for side in ("+", "-"):
            for k in range(-2, 3):
                for m in range(4):
                    x = A.disk(k, m)
                    c, n = tau_closed(x, side), tau_numeric(x, side, 200)
                    worst = max(worst, *(abs(float(c[i]) - n[i]) for i in range(3)))
        return worst, worst

    rows.check("truncated-trace fits vs closed forms, N=200 (a^k b^m, |k|<=2, m<=3)", "tau functionals from Tr_N asymptotics", 0, numeric_vs_closed, 1e-10)

    def disk_relation():
        x = A.disk(-1, 0) * A.disk(1, 0) + A.disk(0, 2) * q**2
        worst = 0.0
        for side in ("+", "-"):
            M = disk_rep(side, x, 60).toarray()
            worst = max(worst, float(np.abs(M[:-1, :-1] - np.eye(60)).max()))
        return worst, worst

    rows.check("pi_+-(a*a + q^2 b^2) = 1", "disk representations respect the relations", 0, disk_relation, 1e-14)
    return rows


def _hurwitz_residue(k: int) -> float:
    """(z - k) zeta_D(z) at z = k + eps from the Hurwitz decomposition of the spectrum."""
    import mpmath

    with mpmath.workdps(40):
        eps = mpmath.mpf(10) ** -20
        z = k + eps
        total = 0
        for a in (mpmath.mpf(3) / 2, mpmath.mpf(1) / 2):
            # multiplicity (h - 1/2)(h + 1/2) = h^2 - 1/4 on both spin sectors
            total += mpmath.zeta(z - 2, a) - mpmath.zeta(z, a) / 4
        return float(eps * total)


def suite_residues(cfg: RunConfig) -> list[dict]:
    from .algebra import SUq2
    from .index import UnitaryMatrix
    from .residues import nc_integral, nc_integral_dn, nc_integral_up, numeric_residues, zeta_at_zero
    from .spectral import ShiftOperator, delta, represent
    from .symbols import CosphereElement, symbol_of_pi

    rows = _Rows()
    A = SUq2(cfg.q)
    n2j, w, prec = cfg.trace_2j, cfg.workers, cfg.precision
    one_op = ShiftOperator.identity()
    expected = {3: 2, 2: 0, 1: Fraction(-1, 2)}

    cache = {}

    def res_one():
        if "one" not in cache:
            cache["one"] = numeric_residues(one_op, n2j, None, w, prec)
        return cache["one"]

    for k, field in ((3, 0), (2, 1), (1, 2)):
        rows.close_to(f"Res_(z={k}) Tr |D|^-z (level fit)", "dimension spectrum of |D|", expected[k], lambda f=field: res_one()[f], 1e-8)
    for k in (3, 2, 1):
        rows.close_to(f"Res_(z={k}) Tr |D|^-z (Hurwitz oracle)", "dimension spectrum of |D|", expected[k], lambda k=k: _hurwitz_residue(k), 1e-8)
    unit = CosphereElement.unit(A.q)
    for k in (3, 2, 1):
        rows.close_to(f"Res_(z={k}) Tr |D|^-z (symbol formula)", "residue formulas on the cosphere", expected[k], lambda k=k: nc_integral(unit, k), 1e-12)

    U = UnitaryMatrix(A.q)
    Uf = UnitaryMatrix(cfg.q, exact=False)
    operand_sym = {}
    for p in (1, 2, 3):
        s = None
        for x, y in U.pairs():
            t = symbol_of_pi(x) * symbol_of_pi(y).delta(p)
            s = t if s is None else s + t
        operand_sym[p] = s
    cases = [
        ("pi(bb*)", A.b * A.b_star, None),
        ("pi(b^2 b*^2)", A.b**2 * A.b_star**2, None),
        ("pi(a*a)", A.a_star * A.a, None),
    ]
    for label, x, _ in cases:
        def cmp(x=x):
            r = numeric_residues(represent(x, cfg.q), n2j, None, w, prec)
            c = [float(nc_integral(x, k)) for k in (3, 2, 1)]
            d = max(abs(r[i] - c[i]) for i in range(3))
            return d, d

        rows.check(f"{label}: level-fit residues vs symbol formula", "residue formulas on the cosphere", 0, cmp, cfg.tol_check)

    for p in (1, 2, 3):
        def cmp_up(p=p):
            # fitted pair by pair: the summed operand cancels down to the rounding floor
            r = sum(numeric_residues(represent(x) @ delta(represent(y), p), n2j, "up", w, prec)[3 - p] for x, y in Uf.pairs())
            c = float(nc_integral_up(operand_sym[p], p))
            return r, abs(r - c)

        rows.check(
            f"sum U*_kl delta^{p}(U_lk) P: Res_(z={p}) level fit vs symbol formula",
            "residue formulas with the up projection",
            float(nc_integral_up(operand_sym[p], p)),
            cmp_up,
            cfg.tol_check,
        )

    def split():
        worst = 0.0
        for x in (A.b * A.b_star, A.b**2 * A.b_star**2, A.a_star * A.a):
            for k in (1, 2, 3):
                worst = max(worst, abs(float(nc_integral_up(x, k) + nc_integral_dn(x, k) - nc_integral(x, k))))
        return worst, worst

    rows.check("up + down residues = full residues", "spin sectors split the residues", 0, split, 0)
    rows.close_to("Tr P_up |D|^-z at z = 0", "zeta value at the origin", 0, lambda: zeta_at_zero(one_op, "up", n2j, w, prec), 1e-8)

    def off_diagonal():
        r = numeric_residues(represent(A.a, cfg.q), n2j, None, w, prec)
        m = max(abs(v) for v in r)
        return m, m

    rows.check("residues of pi(a)", "off-diagonal operators have no residues", 0, off_diagonal, 1e-12)
    return rows


def suite_cocycles(cfg: RunConfig) -> list[dict]:
    from .algebra import AlgebraElement, SUq2
    from .cyclic import cocycle_suite
    from .index import tau_odd

    rows = _Rows()
    try:
        results = cocycle_suite(cfg.q, cfg.trace_2j, cfg.seed, workers=cfg.workers, tol=cfg.tol_check)
    except Exception as exc:  # noqa: BLE001
        rows.append(_error_row("cocycle identities", "(b, B) bicomplex identities", 0, exc))
        results = []
    for r in results:
        rows.append(_row(r.name, r.anchor, r.target, r.computed, float(r.residual), r.tol))

    A = SUq2(cfg.q)
    q = A.q
    rows.close_to("tau_odd(b, b*)", "odd cocycle on a monomial pair", -1 / (1 - q**2), lambda: tau_odd(A.b, A.b_star), 0)
    rows.close_to("tau_odd(1, 1)", "odd cocycle on a monomial pair", 0, lambda: tau_odd(A.one, A.one), 0)

    rng = random.Random(cfg.seed)

    def mono():
        return (rng.randint(-3, 3), rng.randint(0, 3), rng.randint(0, 3))

    def selection():
        bad = 0
        for _ in range(1000):
            m1, m2 = mono(), mono()
            v = tau_odd(m1, m2, q)
            if v != 0 and (m1[1] + m2[1] != m1[2] + m2[2] or m1[0] != -m2[0]):
                bad += 1
        return bad, bad

    rows.check("tau_odd selection rules on 1000 random monomial pairs (violations)", "odd cocycle Kronecker deltas", 0, selection, 0)

    def bilinear():
        bad = 0
        for _ in range(200):
            x = AlgebraElement({mono(): rng.randint(1, 3), mono(): rng.randint(-3, -1)}, q)
            y = AlgebraElement({mono(): 1, mono(): rng.randint(1, 3)}, q)
            c = rng.randint(-3, 3)
            z = AlgebraElement({mono(): 1}, q)
            bad += tau_odd(x + y * c, z) != tau_odd(x, z) + c * tau_odd(y, z)
            bad += tau_odd(z, x + y * c) != tau_odd(z, x) + c * tau_odd(z, y)
        return bad, bad

    rows.check("tau_odd bilinearity on 200 random triples (failures)", "odd cocycle is bilinear", 0, bilinear, 0)
    return rows


def suite_pairing(cfg: RunConfig) -> list[dict]:
    from .index import (
        UnitaryMatrix,
        b_beta,
        chi1_numeric,
        fredholm_index_kernel,
        matrix_pairing,
        psi1,
        psi1_numeric,
    )
    from .residues import nc_integral_up
    from .symbols import symbol_of_pi

    rows = _Rows()
    U = UnitaryMatrix(cfg.q)
    Uf = UnitaryMatrix(cfg.q, exact=False)
    n2j, w = cfg.trace_2j, cfg.workers
    rows.close_to("psi1(U^{-1},U)", "local index cocycle paired with U", -2, lambda: matrix_pairing(psi1, U), 1e-12)
    rows.close_to(
        "psi1(U^{-1},U) (level-fit residues)",
        "local index cocycle paired with U",
        -2,
        lambda: sum(psi1_numeric(x, y, n2j, w) for x, y in Uf.pairs()),
        cfg.tol_check,
    )
    rows.close_to(
        "chi1(U^{-1},U) (truncated trace)",
        "Chern character of the Fredholm module paired with U",
        -2,
        lambda: sum(chi1_numeric(x, y, n2j, w) for x, y in Uf.pairs()),
        1e-8,
    )
    rows.close_to(
        "b beta(U^{-1},U)",
        "coboundary relating psi1 and chi1 pairs trivially",
        0,
        lambda: sum(b_beta(x, y, n2j, w) for x, y in Uf.pairs()),
        cfg.tol_check,
    )
    weights = {1: (2, 1), 2: (-1, 2), 3: (Fraction(2, 3), 3)}
    targets = {1: -2, 2: 0, 3: 0}
    for p, (c, k) in weights.items():
        rows.close_to(
            f"{c} sum int U*_kl delta^{p}(U_lk) P |D|^-{k}",
            "term of psi1(U^{-1},U)",
            targets[p],
            lambda p=p, c=c, k=k: c * sum(nc_integral_up(symbol_of_pi(x) * symbol_of_pi(y).delta(p), k) for x, y in U.pairs()),
            1e-12,
        )

    def index_relation():
        ind = fredholm_index_kernel(U, cfg.kernel_2j, cfg.tol_kernel).index
        v = -matrix_pairing(psi1, U) / 2
        return float(v), abs(float(v) - ind)

    rows.check("-1/2 psi1(U^{-1},U) = ind(PUP)", "index theorem", 1, index_relation, 1e-12)
    return rows


def suite_index(cfg: RunConfig) -> list[dict]:
    import warnings

    from .fock import UP
    from .index import IllConditionedKernelWarning, UnitaryMatrix, fredholm_index_kernel, fredholm_index_trace

    rows = _Rows()
    U = UnitaryMatrix(cfg.q)
    cache = {}

    def kernel():
        if "k" not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IllConditionedKernelWarning)
                cache["k"] = fredholm_index_kernel(U, cfg.kernel_2j, cfg.tol_kernel)
        return cache["k"]

    rows.check("ind(PUP)", "index of the Toeplitz operator of U", 1, lambda: (kernel().index, abs(kernel().index - 1)), 0)
    rows.check("dim ker PUP", "kernel of the Toeplitz operator", 1, lambda: (kernel().dim_kernel, abs(kernel().dim_kernel - 1)), 0)
    rows.check("dim ker PU*P", "kernel of the adjoint Toeplitz operator", 0, lambda: (kernel().dim_cokernel_side, kernel().dim_cokernel_side), 0)

    def overlap():
        from .fock import enumerate_basis

        res = kernel()
        if len(res.kernel_vectors) != 1:
            raise RuntimeError(f"expected one kernel vector, found {len(res.kernel_vectors)}")
        space = enumerate_basis(cfg.kernel_2j + 1)
        qv = float(cfg.q)
        ref = np.zeros((2, space.dim))
        ref[0, space.index_of(0, 0, -1, UP)] = 1.0
        ref[1, space.index_of(0, 0, 1, UP)] = -1.0 / qv
        v = res.kernel_vectors[0]
        o = abs(float(np.sum(v * ref))) / (np.linalg.norm(v) * np.linalg.norm(ref))
        return o, 1 - o

    rows.check("kernel vector overlap with (|0,0,-1/2,up>, -1/q |0,0,1/2,up>)", "kernel of the Toeplitz operator", 1, overlap, 1e-10)

    def gap():
        r = kernel().gap_ratio
        return r, max(0.0, 10 - r)

    rows.check("singular value gap ratio (kept / zero)", "numerical rank separation", 10, gap, 0)
    rows.close_to(
        "ind(PUP) (parametrix trace formula)",
        "index as a difference of traces",
        1,
        lambda: fredholm_index_trace(U, cfg.trace_2j, workers=cfg.workers),
        1e-6,
    )
    return rows


SUITES: dict[str, Callable[[RunConfig], list[dict]]] = {
    "relations": suite_relations,
    "smoothing": suite_smoothing,
    "symbols": suite_symbols,
    "tau": suite_tau,
    "residues": suite_residues,
    "cocycles": suite_cocycles,
    "pairing": suite_pairing,
    "index": suite_index,
}
COMMANDS = tuple(SUITES) + ("report-all",)


def run(command: str, cfg: RunConfig) -> list[dict]:
    """Execute a suite (or all of them, in order) and return its rows."""
    cfg.validate()
    if command == "report-all":
        return list(itertools.chain.from_iterable(SUITES[name](cfg) for name in SUITES))
    if command not in SUITES:
        raise ConfigError(f"unknown command {command!r}")
    return SUITES[command](cfg)


COLUMNS = ("name", "anchor", "target", "computed", "residual", "pass")


def format_report(rows: list[dict], output: str = "json") -> str:
    if output == "json":
        return json.dumps(rows, indent=2) + "\n"
    if output == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if output == "text":
        cells = [[("PASS" if r["pass"] else "FAIL") if c == "pass" else _text(r[c]) for c in COLUMNS] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(COLUMNS)]
        lines = ["  ".join(c.ljust(wd) for c, wd in zip(COLUMNS, widths)).rstrip()]
        lines += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)).rstrip() for row in cells]
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown output format {output!r}")


def _text(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="suq2", description="Verification campaigns for the Dirac operator on quantum SU(2).")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--q", type=float)
    p.add_argument("--max-2j", dest="max2j", type=int, help="truncation for materialized checks")
    p.add_argument("--trace-2j", dest="trace_2j", type=int, help="levels used by trace fits")
    p.add_argument("--kernel-2j", dest="kernel_2j", type=int, help="truncation for the kernel computation")
    p.add_argument("--tol", dest="tol_check", type=float, help="tolerance of numeric identity checks")
    p.add_argument("--tol-kernel", dest="tol_kernel", type=float, help="singular value cut for kernels")
    p.add_argument("--precision", choices=("standard", "extended"))
    p.add_argument("--output", choices=("json", "csv", "text"))
    p.add_argument("--out-file", dest="out_file")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--strict-truncation", dest="strict_truncation", action="store_const", const=True)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        values = load_config(args.config) if args.config else {}
        for key in _FIELD_TYPES:
            v = getattr(args, key, None)
            if v is not None:
                values[key] = v
        cfg = RunConfig(**values).validate()
    except (ConfigError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    rows = run(args.command, cfg)
    text = format_report(rows, cfg.output)
    if cfg.out_file:
        with open(cfg.out_file, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [r for r in rows if not r["pass"]]
    if failed and cfg.out_file:
        for r in failed:
            print(f"FAIL {r['name']}: computed {r['computed']}, residual {r['residual']}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
