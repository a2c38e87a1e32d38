from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from dualroot.exactmath import (
    ExactMathError,
    InconsistentSystemError,
    ModularEchelon,
    SingularMatrixError,
    det_int,
    det_q,
    format_rational,
    inverse_q,
    is_positive_definite,
    ldl_decomposition,
    leading_minors,
    matmul,
    matvec,
    modular_primes,
    nullspace_q,
    parse_rational,
    primitive_int_vector,
    qmatrix,
    rank_exact_int,
    rank_int,
    rank_q,
    rational_reconstruction,
    solve_int_multimodular,
    solve_q,
    transpose,
)

small = st.integers(-6, 6)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def int_matrices(max_rows=6, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def square(n_max=5, elems=small):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.lists(elems, min_size=n, max_size=n), min_size=n, max_size=n))


def sym(m):
    return sympy.Matrix(m)


# -- serialization ------------------------------------------------------------

@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("-2", Fraction(-2)), ("6/8", Fraction(3, 4)),
                                        (" 5 ", Fraction(5)), (7, Fraction(7)), ("1/-2", Fraction(-1, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "x", "1.5", True, None, 0.5])
def test_parse_rational_rejects(bad):
    with pytest.raises(ExactMathError):
        parse_rational(bad)


@given(rationals)
def test_format_parse_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


def test_format_canonical():
    assert format_rational(Fraction(-6, 8)) == "-3/4"
    assert format_rational(Fraction(4, 2)) == "2"


# -- ranks and determinants ---------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(int_matrices())
def test_rank_agrees_with_sympy(m):
    r = sym(m).rank()
    assert rank_q(qmatrix(m)) == r
    assert rank_exact_int(m) == r
    assert rank_int(m, len(m[0])) == r


@settings(max_examples=60, deadline=None)
@given(int_matrices(), st.integers(1, 6))
def test_rank_int_early_exit_is_exact(m, bound):
    r = rank_exact_int(m)
    got = rank_int(m, len(m[0]), upper_bound=bound)
    assert got == r or (got == bound and r >= bound)


def test_rank_int_detects_large_entry_dependency():
    # rows independent mod many small primes only if entries are large
    p = 2**61 - 1
    m = [[1, p], [2, 2 * p], [0, 1]]
    assert rank_int(m, 2) == 2
    assert rank_int([[1, p], [2, 2 * p]], 2) == 1


@settings(max_examples=80, deadline=None)
@given(square())
def test_det_agrees_with_sympy(m):
    d = sym(m).det()
    assert det_int(m) == d
    assert det_q(qmatrix(m)) == d


@settings(max_examples=40, deadline=None)
@given(square(4, rationals))
def test_det_rational(m):
    assert det_q(qmatrix(m)) == sym(m).det()


def test_det_errors():
    with pytest.raises(ExactMathError):
        det_q(qmatrix([[1, 2]]))
    with pytest.raises(ExactMathError):
        det_int([[1, 2]])
    assert det_int([]) == 1


# -- solving ------------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(int_matrices(5, 5), st.data())
def test_solve_q_consistent(m, data):
    x0 = data.draw(st.lists(rationals, min_size=len(m[0]), max_size=len(m[0])))
    a = qmatrix(m)
    b = matvec(a, x0)
    x = solve_q(a, b)
    assert matvec(a, x) == b


def test_solve_q_inconsistent():
    with pytest.raises(InconsistentSystemError):
        solve_q(qmatrix([[1, 1], [2, 2]]), [1, 3])


def test_solve_q_free_variables_zero():
    assert solve_q(qmatrix([[1, 1]]), [2]) == (2, 0)


@settings(max_examples=60, deadline=None)
@given(square(5))
def test_inverse(m):
    a = qmatrix(m)
    if sym(m).det() == 0:
        with pytest.raises(SingularMatrixError):
            inverse_q(a)
    else:
        inv = inverse_q(a)
        assert matmul(a, inv) == qmatrix(np.eye(len(m), dtype=int).tolist())
        assert inv == qmatrix(sym(m).inv().tolist())


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_nullspace(m):
    a = qmatrix(m)
    basis = nullspace_q(a)
    assert len(basis) == len(m[0]) - sym(m).rank()
    for v in basis:
        assert all(x == 0 for x in matvec(a, v))
    if basis:
        assert rank_q(qmatrix(basis)) == len(basis)


@settings(max_examples=60, deadline=None)
@given(square(6, st.integers(-40, 40)), st.data())
def test_multimodular_solve(m, data):
    n = len(m)
    b = data.draw(st.lists(rationals, min_size=n, max_size=n))
    if sym(m).det() == 0:
        with pytest.raises(SingularMatrixError):
            solve_int_multimodular(m, b)
    else:
        assert solve_int_multimodular(m, b) == solve_q(qmatrix(m), b)


def test_multimodular_solve_big_solution():
    # solution entries far beyond a single 26-bit prime
    m = [[10**9, 1], [1, 10**9 + 7]]
    b = [Fraction(1, 3), Fraction(-5, 7)]
    assert solve_int_multimodular(m, b) == solve_q(qmatrix(m), b)


@given(st.integers(-1000, 1000), st.integers(1, 1000))
def test_rational_reconstruction(num, den):
    x = Fraction(num, den)
    mod = next(modular_primes()) * 1000003
    if den % 1000003 == 0:
        return
    u = x.numerator * pow(x.denominator, -1, mod) % mod
    assert rational_reconstruction(u, mod) == x


def test_primes_are_prime_and_decreasing():
    gen = modular_primes()
    ps = [next(gen) for _ in range(50)]
    assert ps == sorted(ps, reverse=True) and len(set(ps)) == 50
    assert all(sympy.isprime(p) for p in ps)
    assert ps[0] < 1 << 26


@settings(max_examples=40, deadline=None)
@given(int_matrices(6, 6))
def test_modular_echelon_rank(m):
    p = next(modular_primes())
    e = ModularEchelon(len(m[0]), p)
    for row in m:
        e.add(row)
    # the entries are far smaller than p, so this is generic
    assert e.rank <= sym(m).rank()


# -- definiteness -------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(square(5))
def test_positive_definite_via_gram(m):
    a = qmatrix(m)
    g = matmul(transpose(a), a)
    assert is_positive_definite(g) == (sym(m).det() != 0)
    if sym(m).det() != 0:
        lower, d = ldl_decomposition(g)
        diag = qmatrix([[d[i] if i == j else 0 for j in range(len(d))] for i in range(len(d))])
        assert matmul(matmul(qmatrix(lower), diag), transpose(qmatrix(lower))) == g


@settings(max_examples=40, deadline=None)
@given(square(5))
def test_leading_minors(m):
    s = [[x + y for x, y in zip(r, c)] for r, c in zip(m, transpose(qmatrix(m)))]
    expect = [sym(s)[:k, :k].det() for k in range(1, len(s) + 1)]
    assert leading_minors(qmatrix(s)) == expect


def test_not_positive_definite_examples():
    assert not is_positive_definite(qmatrix([[1, 2], [2, 1]]))
    assert not is_positive_definite(qmatrix([[0, 0], [0, 1]]))
    assert not is_positive_definite(qmatrix([[1, 0], [1, 1]]))
    with pytest.raises(ExactMathError):
        ldl_decomposition(qmatrix([[1, 2], [2, 1]]))


def test_primitive_int_vector():
    assert primitive_int_vector([Fraction(1, 2), Fraction(-3, 4), 0]) == (2, -3, 0)
