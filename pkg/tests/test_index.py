from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from suq2 import index as ix
from suq2.algebra import SUq2
from suq2.fock import UP, enumerate_basis
from suq2.spectral import materialize, proj_up, represent

HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def A():
    return SUq2(HALF)


@pytest.fixture(scope="module")
def Af():
    return SUq2(0.5, exact=False)


# -- the pairing with the fundamental unitary ----------------------------------


@pytest.mark.parametrize("q", [Fraction(3, 10), HALF, Fraction(4, 5)])
def test_psi1_pairing_is_exactly_minus_two(q):
    assert ix.matrix_pairing(ix.psi1, ix.UnitaryMatrix(q)) == -2


def test_psi1_pairing_is_q_independent_in_floating_point():
    vals = [float(ix.matrix_pairing(ix.psi1, ix.UnitaryMatrix(q, exact=False))) for q in (0.3, 0.5, 0.8)]
    assert max(vals) - min(vals) < 1e-9
    assert vals[0] == pytest.approx(-2, abs=1e-12)


def test_psi1_vanishes_on_units(A):
    assert ix.psi1(A.one, A.one) == 0
    assert ix.psi1(A.one, A.a) == 0


def test_psi1_closed_matches_trace_realisation(A, Af):
    closed = float(ix.psi1(A.a_star, A.a))
    assert closed == pytest.approx(1 / 6, abs=1e-14)
    assert ix.psi1_numeric(Af.a_star, Af.a, 60) == pytest.approx(closed, abs=1e-6)


def test_phi1_nabla_form_matches_delta_form(A, Af):
    assert ix.phi1_nabla(Af.a_star, Af.a, 60) == pytest.approx(float(ix.phi1(A.a_star, A.a)), abs=1e-8)


@pytest.mark.parametrize("args", [("a", "b", "a_star"), ("b", "b_star", "a"), ("a_star", "a", "b")])
def test_phi2_prime_is_minus_phi2(A, args):
    xs = [getattr(A, n) for n in args]
    assert ix.phi2_prime(*xs) == -ix.phi2(*xs)


# -- chi1 and the coboundary term ----------------------------------------------


@pytest.fixture(scope="module")
def chi_total():
    Uf = ix.UnitaryMatrix(0.5, exact=False)
    return sum(ix.chi1_numeric(x, y, 60) for x, y in Uf.pairs())


def test_chi1_pairing_total(chi_total):
    assert chi_total == pytest.approx(-2, abs=1e-8)


def test_chi1_vanishes_with_unit_first(Af):
    for x in (Af.a, Af.b_star, Af.a_star * Af.a):
        assert abs(ix.chi1_numeric(Af.one, x, 40)) < 1e-12


def test_chi1_antisymmetric(Af):
    for x, y in [(Af.a_star, Af.a), (Af.b, Af.b_star), (Af.a, Af.b_star * Af.a_star)]:
        assert ix.chi1_numeric(x, y, 40) == pytest.approx(-ix.chi1_numeric(y, x, 40), abs=1e-10)


def test_chi1_equals_psi1_minus_b_beta(A, Af):
    chi = ix.chi1_numeric(Af.a_star, Af.a, 60)
    rhs = float(ix.psi1(A.a_star, A.a)) - ix.b_beta(Af.a_star, Af.a, 60)
    assert chi == pytest.approx(rhs, abs=1e-6)


def test_beta_vanishes_off_diagonal(Af):
    assert ix.beta(Af.a, 40) == 0
    assert abs(ix.b_beta(Af.one, Af.one, 40)) < 1e-8


# -- the odd cyclic cocycle --------------------------------------------------------


def test_tau_odd_hand_values(A):
    q = HALF
    assert ix.tau_odd(A.b, A.b_star) == -1 / (1 - q**2)
    assert ix.tau_odd((1, 1, 0), (-1, 0, 1), q) == -q / (1 - q**4)
    assert ix.tau_odd((1, 0, 0), (-1, 0, 1), q) == 0
    assert ix.tau_odd((2, 0, 0), (-2, 1, 1), q) == 0
    assert ix.tau_odd(A.one, A.one) == 0


@pytest.mark.parametrize("q", [Fraction(3, 10), HALF, Fraction(4, 5)])
def test_tau_odd_pairing_with_fundamental_unitary(q):
    # q^2 tau(b, b*) + tau(b*, b) = (1 - q^2) / (1 - q^2); the a*, a terms vanish
    assert ix.matrix_pairing(ix.tau_odd, ix.UnitaryMatrix(q)) == 1


def test_tau_odd_needs_q_for_bare_triples():
    with pytest.raises(ValueError):
        ix.tau_odd((0, 1, 0), (0, 0, 1))


_mono = st.tuples(st.integers(-2, 2), st.integers(0, 2), st.integers(0, 2))


@given(_mono, _mono)
@settings(max_examples=200, deadline=None)
def test_tau_odd_antisymmetric(m1, m2):
    assert ix.tau_odd(m1, m2, HALF) == -ix.tau_odd(m2, m1, HALF)


@given(_mono, _mono)
@settings(max_examples=200, deadline=None)
def test_tau_odd_selection_rules(m1, m2):
    (l, m, n), (l2, m2_, n2) = m1, m2
    if l + l2 != 0 or n + n2 != m + m2_:
        assert ix.tau_odd(m1, m2, HALF) == 0


# -- Fredholm index ---------------------------------------------------------------


@pytest.fixture(scope="module")
def kernel():
    return ix.fredholm_index_kernel(max2j=8, q=HALF)


def test_kernel_dimensions(kernel):
    assert kernel.dim_kernel == 1
    assert kernel.dim_cokernel_side == 0
    assert kernel.index == 1
    assert kernel.gap_ratio >= 10


def test_kernel_vector_is_annihilated(kernel):
    # PUP applied to the reference vector, built independently of the kernel search
    space = enumerate_basis(9)
    ref = np.zeros((2, space.dim))
    ref[0, space.index_of(0, 0, -1, UP)] = 1.0
    ref[1, space.index_of(0, 0, 1, UP)] = -2.0
    U = ix.UnitaryMatrix(0.5, exact=False)
    P = materialize(proj_up(), space)
    out = [sum(P @ materialize(represent(U[k, l], 0.5), space) @ ref[l] for l in range(2)) for k in range(2)]
    assert max(np.abs(o).max() for o in out) < 1e-14
    v = kernel.kernel_vectors[0]
    overlap = abs(np.sum(v * ref)) / (np.linalg.norm(v) * np.linalg.norm(ref))
    assert overlap == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("q", [Fraction(3, 10), Fraction(4, 5)])
def test_kernel_index_other_q(q):
    assert ix.fredholm_index_kernel(max2j=6, q=q).index == 1


def test_trace_index():
    assert ix.fredholm_index_trace(max2j=60, q=HALF) == pytest.approx(1, abs=1e-6)


def test_identity_has_index_zero():
    I = ix.UnitaryMatrix(HALF, [[1, 0], [0, 1]])
    assert ix.fredholm_index_trace(I, max2j=20) == 0
    assert ix.fredholm_index_kernel(I, max2j=6).index == 0


def test_non_unitary_rejected(A):
    bad = ix.UnitaryMatrix(HALF, [[A.a, 0], [0, 1]])
    assert not bad.is_unitary()
    with pytest.raises(ix.NotUnitaryError):
        ix.fredholm_index_kernel(bad)
    with pytest.raises(ix.NotUnitaryError):
        ix.fredholm_index_trace(bad, max2j=10)


def test_fundamental_unitary_is_unitary():
    U = ix.UnitaryMatrix(HALF)
    assert U.is_unitary()
    assert U.star().is_unitary()
    assert (U @ U.star()).is_identity()


def test_pairing_report_consistent():
    r = ix.pairing_report(q=0.5, max2j=60, kernel_2j=6)
    assert r.psi1_value == -2
    assert r.index_kernel == 1
    assert -r.psi1_value / 2 == r.index_kernel
    assert r.psi1_numeric == pytest.approx(-2, abs=1e-6)
    assert r.chi1_value == pytest.approx(-2, abs=1e-8)
    assert r.b_beta_total == pytest.approx(0, abs=1e-6)
    assert r.breakdown["2 int X P|D|^-1"] == -2
