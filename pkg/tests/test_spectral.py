import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from suq2.fock import DOWN, UP, enumerate_basis
from suq2.spectral import (
    MAX_DEPTH,
    CompositionDepthError,
    ShiftOperator,
    TruncationError,
    abs_dirac,
    approx_rep,
    binomial_expansion_check,
    commutator_d,
    commutator_f,
    delta,
    dirac,
    level_traces,
    materialize,
    nabla,
    proj_dn,
    proj_up,
    sign_f,
    spin_rep,
)

Q = 0.5
SPACE = enumerate_basis(10)
GENS = ("a", "b", "a*", "b*")


def interior_sup(op, space=SPACE, reach=None):
    reach = space.max2j - 2 if reach is None else reach
    M = materialize(op, space, max_source_2j=reach)
    return float(abs(M).max()) if M.nnz else 0.0


def test_a_plus_matrix_entry_at_the_bottom_ket():
    # [1] = 1, [2] = q^-1 + q; column of |0,0,-1/2,up>
    M = materialize(spin_rep("a+", Q), SPACE)
    src = SPACE.index_of(0, 0, -1, UP)
    up = SPACE.index_of(1, 1, 0, UP)
    dn = SPACE.index_of(1, 1, 0, DOWN)
    assert M[up, src] == pytest.approx(1 / (1 + Q**2), abs=1e-15)
    assert M[dn, src] == pytest.approx(Q / (1 + Q**2), abs=1e-15)
    assert M[:, src].nnz == 2


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_defining_relations_on_interior_kets(q):
    a, b = spin_rep("a", q), spin_rep("b", q)
    one = ShiftOperator.identity()
    for r in (
        b @ a - (a @ b) * q,
        b.H @ a - (a @ b.H) * q,
        b @ b.H - b.H @ b,
        a.H @ a + (b @ b.H) * q**2 - one,
        a @ a.H + b @ b.H - one,
    ):
        assert interior_sup(r) < 1e-12


@pytest.mark.parametrize("g", ["a", "b"])
def test_adjoint_matches_transpose(g):
    M = materialize(spin_rep(g, Q), SPACE)
    S = materialize(spin_rep(g + "*", Q), SPACE)
    keep = np.nonzero(SPACE.j2 <= SPACE.max2j - 1)[0]
    assert abs(M.T.tocsc()[keep][:, keep] - S[keep][:, keep]).max() < 1e-13


def test_materialize_identity_and_sparsity():
    I = materialize(ShiftOperator.identity(), SPACE)
    assert abs(I - sp.identity(SPACE.dim)).max() == 0
    assert materialize(spin_rep("a", Q), SPACE).nnz <= 8 * SPACE.dim


def test_generators_never_reach_invalid_kets():
    # boundary coefficients vanish analytically
    for name in ("a+", "a-", "b+", "b-"):
        op = spin_rep(name, Q)
        for shift in op.shifts():
            c = op.terms[shift](SPACE.j2, SPACE.mu2, SPACE.n2)
            src = c[np.arange(SPACE.dim), :, SPACE.spin]
            for t in (UP, DOWN):
                tj, tm, tn = SPACE.j2 + shift[0], SPACE.mu2 + shift[1], SPACE.n2 + shift[2]
                big = enumerate_basis(SPACE.max2j + 1)
                invalid = big.index_of(tj, tm, tn, t) < 0
                assert np.abs(src[invalid, t]).max(initial=0.0) < 1e-14


def test_diagonal_operators():
    assert dirac().eigen(0)[UP] == 1.5
    assert tuple(dirac().eigen(2)) == (3.5, -2.5)
    assert tuple(abs_dirac().eigen(2)) == (3.5, 2.5)
    F = materialize(sign_f(), SPACE)
    assert abs(F @ F - sp.identity(SPACE.dim)).max() == 0
    P = materialize(proj_up() + proj_dn(), SPACE)
    assert abs(P - sp.identity(SPACE.dim)).max() == 0


@pytest.mark.parametrize("g", ["a", "b"])
@pytest.mark.parametrize("side,sign", [("+", 1), ("-", -1)])
def test_delta_of_shift_components(g, side, sign):
    x = spin_rep(g + side, Q)
    P, Qd = proj_up().as_shift(), proj_dn().as_shift()
    assert interior_sup(delta(x) - (P @ x @ P + Qd @ x @ Qd) * sign) < 1e-13
    assert interior_sup(delta(commutator_d(x)) - (P @ x @ P - Qd @ x @ Qd)) < 1e-13


def block_norm(M, grade):
    """Spectral norm of an operator that preserves ``grade``."""
    M = M.tocsr()
    out = 0.0
    for g in np.unique(grade):
        idx = np.nonzero(grade == g)[0]
        out = max(out, np.linalg.norm(M[idx][:, idx].toarray(), 2))
    return out


def test_delta_is_bounded_by_the_operator():
    space = enumerate_basis(20)
    # a shifts mu and n alike, b shifts them oppositely
    for g, grade in (("a", space.mu2 - space.n2), ("b", space.mu2 + space.n2)):
        na = block_norm(materialize(spin_rep(g, Q), space), grade)
        nd = block_norm(materialize(delta(spin_rep(g, Q)), space), grade)
        assert 0.5 < na <= 1 + 1e-12
        assert nd <= na + 1e-12


def test_approximate_representation_amplitudes():
    x, y = SPACE.xy()
    for name, shift in (("a+", (1, 1, 1)), ("a-", (-1, 1, 1))):
        M = materialize(approx_rep(name, Q), SPACE)
        for i in range(0, SPACE.dim, 11):
            t = SPACE.index_of(SPACE.j2[i] + shift[0], SPACE.mu2[i] + shift[1], SPACE.n2[i] + shift[2], SPACE.spin[i])
            if t < 0:
                assert M[:, i].nnz == 0
                continue
            assert (x[t], y[t]) == ((x[i] + 1, y[i] + 1) if name == "a+" else (x[i], y[i]))
            if name == "a+":
                expect = np.sqrt(1 - Q ** (2 * x[i] + 2)) * np.sqrt(1 - Q ** (2 * y[i] + 2))
            else:
                expect = Q ** (x[i] + y[i] + 1)
            assert M[t, i] == pytest.approx(expect, abs=1e-14)


def test_approximate_generators_commute_with_f():
    for name in ("a+", "a-", "b+", "b-"):
        assert interior_sup(commutator_f(approx_rep(name, Q))) == 0


def test_commutators_of_approximate_a():
    a = approx_rep("a", Q)
    diff = approx_rep("a+", Q) - approx_rep("a-", Q)
    assert interior_sup(delta(a) - diff) < 1e-13
    assert interior_sup(commutator_d(a) - sign_f().as_shift() @ diff) < 1e-13


def test_nabla_raises_order_by_one():
    space = enumerate_basis(24)
    M = materialize(nabla(spin_rep("a", Q)), space)
    col = np.asarray(abs(M).max(axis=0).todense()).ravel()
    sup = np.array([col[space.level_slice(k)].max() for k in (10, 20)])
    assert sup[1] / sup[0] == pytest.approx(2, rel=0.15)
    assert interior_sup(nabla(ShiftOperator.identity())) == 0


def test_delta_is_a_derivation():
    for s, t in (("a", "b"), ("b*", "a"), ("a*", "a")):
        S, T = spin_rep(s, Q), spin_rep(t, Q)
        assert interior_sup(delta(S @ T) - delta(S) @ T - S @ delta(T)) < 1e-13


def test_binomial_expansion():
    assert binomial_expansion_check(ShiftOperator.identity(), -1.0, 3, 10).max() == 0
    r = binomial_expansion_check(spin_rep("a", Q), -1.0, 3, 32)
    k = np.arange(10, 32)
    slope = np.polyfit(np.log(k + 1.5), np.log(r[k]), 1)[0]
    assert slope < -5


def test_strict_truncation_and_depth_guard():
    with pytest.raises(TruncationError):
        materialize(spin_rep("a", Q), enumerate_basis(3), strict=True)
    materialize(spin_rep("a", Q), enumerate_basis(3), strict=True, max_source_2j=2)
    a = spin_rep("a", Q)
    op = ShiftOperator.identity()
    with pytest.raises(CompositionDepthError):
        for _ in range(MAX_DEPTH + 1):
            op = op @ a
    flat = (a @ a).flatten(SPACE)
    assert flat.depth == 1
    assert interior_sup(flat - a @ a) < 1e-15


def test_level_traces_independent_of_workers():
    T = spin_rep("a*", Q) @ spin_rep("a", Q)
    assert np.array_equal(level_traces(T, 20), level_traces(T, 20, workers=4))


def test_level_traces_match_matrix_trace():
    T = spin_rep("b", Q) @ spin_rep("b*", Q)
    M = materialize(T, SPACE)
    t = level_traces(T, SPACE.max2j - 1)
    d = M.diagonal()
    for k in range(SPACE.max2j):
        assert t[k] == pytest.approx(d[SPACE.level_slice(k)].sum(), abs=1e-13)


words = st.lists(st.sampled_from(GENS), min_size=1, max_size=3)


@given(words, st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_adjoint_of_products(w, c):
    op = ShiftOperator.identity()
    for g in w:
        op = op @ spin_rep(g, Q)
    op = op * c
    A = materialize(op, SPACE, max_source_2j=SPACE.max2j - len(w))
    B = materialize(op.H, SPACE, max_source_2j=SPACE.max2j - len(w))
    keep = np.nonzero(SPACE.j2 <= SPACE.max2j - len(w))[0]
    D = A.T.tocsc()[keep][:, keep] - B[keep][:, keep]
    assert (abs(D).max() if D.nnz else 0) < 1e-13
    assert interior_sup(op.H.H - op, reach=SPACE.max2j - len(w)) < 1e-15
