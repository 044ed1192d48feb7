"""The (b, B) bicomplex on evaluable cochains, and the cocycle checks.

A cochain of degree n is a function of n + 1 algebra elements. Cochains
are never tabulated: b, B and lambda build new evaluators from old ones.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import AlgebraElement, SUq2

__all__ = [
    "Cochain",
    "hochschild_b",
    "connes_B",
    "lambda_op",
    "monomial_linear",
    "CheckResult",
    "evaluate_residual",
    "cocycle_suite",
]


class Cochain:
    """An (n+1)-linear functional, given by its evaluator."""

    def __init__(self, degree: int, evaluator: Callable, label: str = ""):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.degree = degree
        self.evaluator = evaluator
        self.label = label

    def __call__(self, *args):
        if len(args) != self.degree + 1:
            raise TypeError(f"{self.label or 'cochain'} of degree {self.degree} takes {self.degree + 1} arguments")
        return self.evaluator(*args)

    def __add__(self, other: "Cochain") -> "Cochain":
        if other.degree != self.degree:
            raise ValueError("cannot add cochains of different degree")
        return Cochain(self.degree, lambda *a: self(*a) + other(*a), f"({self.label} + {other.label})")

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, lambda *a: -self(*a), f"-{self.label}")

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __mul__(self, c) -> "Cochain":
        return Cochain(self.degree, lambda *a: c * self(*a), f"{c}*{self.label}")

    __rmul__ = __mul__

    def __repr__(self):
        return f"Cochain(degree={self.degree}, {self.label})"


def _unit(args) -> AlgebraElement:
    return AlgebraElement({(0, 0, 0): 1}, args[0].q)


def hochschild_b(phi: Cochain) -> Cochain:
    n = phi.degree

    def ev(*a):
        total = 0
        for j in range(n + 1):
            args = a[:j] + (a[j] * a[j + 1],) + a[j + 2 :]
            total = total + (-1) ** j * phi(*args)
        return total + (-1) ** (n + 1) * phi(a[n + 1] * a[0], *a[1 : n + 1])

    return Cochain(n + 1, ev, f"b{phi.label}")


def connes_B(phi: Cochain) -> Cochain:
    """B = N B0, with B0 phi = phi(1, ...) - (-1)^n phi(..., 1) and N the signed cyclic sum."""
    n = phi.degree
    if n < 1:
        raise ValueError("B needs a cochain of degree at least 1")

    def b0(*a):
        one = _unit(a)
        return phi(one, *a) - (-1) ** n * phi(*a, one)

    def ev(*a):
        total = 0
        for j in range(n):
            total = total + (-1) ** ((n - 1) * j) * b0(*(a[j:] + a[:j]))
        return total

    return Cochain(n - 1, ev, f"B{phi.label}")


def lambda_op(phi: Cochain) -> Cochain:
    """(lambda phi)(a0, ..., an) = (-1)^n phi(an, a0, ..., a_{n-1})."""
    n = phi.degree
    return Cochain(n, lambda *a: (-1) ** n * phi(a[n], *a[:n]), f"lambda{phi.label}")


def monomial_linear(f: Callable[[AlgebraElement], object]) -> Callable[[AlgebraElement], object]:
    """Extend a functional from PBW monomials by linearity, caching monomial values."""
    cache: dict = {}

    def ev(x: AlgebraElement):
        total = 0
        for key, c in x.terms.items():
            if key not in cache:
                cache[key] = f(AlgebraElement({key: 1}, x.q))
            total = total + c * cache[key]
        return total

    return ev


@dataclass
class CheckResult:
    name: str
    anchor: str
    target: object
    computed: object
    residual: float
    tol: float
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.residual < self.tol


def evaluate_residual(phi: Cochain, tuples) -> tuple[float, int]:
    """max |phi| over the given argument tuples."""
    worst, count = 0.0, 0
    for args in tuples:
        worst = max(worst, abs(float(phi(*args))))
        count += 1
    return worst, count


def _tuples(lattice, arity: int, limit: int | None, rng: random.Random):
    full = len(lattice) ** arity
    if limit is None or full <= limit:
        return list(itertools.product(lattice, repeat=arity))
    picks = set()
    while len(picks) < limit:
        picks.add(tuple(rng.randrange(len(lattice)) for _ in range(arity)))
    return [tuple(lattice[i] for i in p) for p in sorted(picks)]


def cocycle_suite(
    q=0.5,
    max2j: int = 60,
    seed: int = 0,
    max_tuples: int = 400,
    numeric: bool = True,
    workers: int = 1,
    tol: float = 1e-6,
    numeric_quads: int = 4,
) -> list[CheckResult]:
    """Cocycle and coboundary identities on the degree <= 2 monomial lattice.

    Pairs run over the full lattice; larger arities use a seeded sample of
    at most ``max_tuples`` tuples.
    """
    from . import index as ix

    A = SUq2(q)
    Af = SUq2(q, exact=False)
    lattice = A.lattice(2)
    rng = random.Random(seed)
    pairs = _tuples(lattice, 2, None, rng)
    triples = _tuples(lattice, 3, max_tuples, rng)
    quads = _tuples(lattice, 4, max_tuples, rng)

    psi1 = Cochain(1, ix.psi1, "psi1")
    phi1 = Cochain(1, ix.phi1, "phi1")
    phi2 = Cochain(2, ix.phi2, "phi2")
    phi2p = Cochain(2, ix.phi2_prime, "phi2'")
    phi3 = Cochain(3, ix.phi3, "phi3")
    tau = Cochain(1, ix.tau_odd, "tau_odd")
    # a non-cyclic 2-cochain with no special structure, to exercise the operator identities
    generic = Cochain(2, lambda a0, a1, a2: ix.psi1(a0 * a1, a2) + ix.tau_odd(a1, a2 * a0), "generic")

    out: list[CheckResult] = []

    def add(name, anchor, phi, tuples, target=0):
        r, n = evaluate_residual(phi, tuples)
        out.append(CheckResult(name, anchor, target, r, r, tol, n))

    add("phi3 = b phi2", "eta cochain: phi3 - b phi2", phi3 - hochschild_b(phi2), quads)
    add("phi3 + b phi2' = 0", "local cocycle: phi3 + b phi2'", phi3 + hochschild_b(phi2p), quads)
    add("b psi1 = 0", "psi1 Hochschild cocycle", hochschild_b(psi1), triples)
    add("B psi1 = 0", "psi1 B cocycle", connes_B(psi1), [(x,) for x in lattice])
    add("lambda psi1 = psi1", "psi1 cyclic", lambda_op(psi1) - psi1, pairs)
    add("bB + Bb = 0 (degree 1)", "bicomplex anticommutation", hochschild_b(connes_B(psi1)) + connes_B(hochschild_b(psi1)), pairs)
    add("bB + Bb = 0 (degree 2)", "bicomplex anticommutation", hochschild_b(connes_B(generic)) + connes_B(hochschild_b(generic)), triples)
    add("b b = 0", "Hochschild coboundary squares to zero", hochschild_b(hochschild_b(psi1)), quads)
    add("B B = 0", "cyclic boundary squares to zero", connes_B(connes_B(generic)), [(x,) for x in lattice])
    add("b tau_odd = 0", "tau_odd Hochschild cocycle", hochschild_b(tau), triples)
    add("lambda tau_odd = tau_odd", "tau_odd cyclic", lambda_op(tau) - tau, pairs)

    if numeric:
        qf = Af.q
        phi0p_mono = monomial_linear(lambda x: ix.phi0_prime(_to_float(x, qf), max2j, workers))
        phi0p = Cochain(0, phi0p_mono, "phi0'")
        lhs = phi1 + hochschild_b(phi0p) + connes_B(phi2p)
        add("phi1 + b phi0' + B phi2' = psi1", "local cocycle: first component", lhs - psi1, pairs)

        gens = [A.a, A.a_star, A.b, A.b_star]
        # only words with as many a as a* and b as b* have a diagonal part to trace
        balanced = [t for t in itertools.product(range(4), repeat=4) if t.count(0) == t.count(1) and t.count(2) == t.count(3)]
        gen_quads = [tuple(gens[i] for i in t) for t in rng.sample(balanced, numeric_quads)]
        worst = 0.0
        for t in gen_quads:
            tf = [_to_float(x, qf) for x in t]
            closed = float(ix.phi3(*t))
            bphi2_num = _b_numeric(ix.phi2_numeric, tf, max2j, workers)
            worst = max(worst, abs(ix.phi3_numeric(*tf, max2j=max2j, workers=workers) - closed), abs(bphi2_num - closed))
        out.append(CheckResult("phi3 = b phi2 (trace realisation)", "eta cochain: phi3 - b phi2", 0, worst, worst, tol, len(gen_quads)))

        a_star, a = _to_float(A.a_star, qf), _to_float(A.a, qf)
        d = abs(ix.phi1_nabla(a_star, a, max2j, workers) - float(ix.phi1(A.a_star, A.a)))
        out.append(CheckResult("phi1 nabla form = delta form on (a*, a)", "phi1 rewritten with F", 0, d, d, 1e-8, 1))

    return out


def _to_float(x: AlgebraElement, qf: float) -> AlgebraElement:
    return AlgebraElement({k: float(c) for k, c in x.terms.items()}, qf)


def _b_numeric(phi2_numeric, args, max2j, workers):
    """b phi2 evaluated with the trace realisation of phi2."""
    a0, a1, a2, a3 = args
    return (
        phi2_numeric(a0 * a1, a2, a3, max2j, workers)
        - phi2_numeric(a0, a1 * a2, a3, max2j, workers)
        + phi2_numeric(a0, a1, a2 * a3, max2j, workers)
        - phi2_numeric(a3 * a0, a1, a2, max2j, workers)
    )
