"""Exact rational scalars, vectors and matrices.

Scalars are :class:`fractions.Fraction`.  Matrices are tuples of row tuples.
Every routine here is exact; nothing is ever rounded.

Besides the plain rational kernels (``rank_q``, ``solve_q``, ``inverse_q``)
the module carries a multi-modular rank for integer matrices.  That routine
is still exact: the rank over Q equals the largest rank modulo a family of
primes whose product exceeds the Hadamard bound of the matrix.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction
QVector = tuple
QMatrix = tuple


class ExactMathError(ValueError):
    pass


class InconsistentSystemError(ExactMathError):
    pass


class SingularMatrixError(ExactMathError):
    pass


# -- serialization ----------------------------------------------------------

def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (ints are accepted too)."""
    if isinstance(text, bool):
        raise ExactMathError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ExactMathError(f"not a rational: {text!r}")
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        try:
            num, den = int(p), int(q)
        except ValueError:
            raise ExactMathError(f"not a rational: {text!r}") from None
        if den == 0:
            raise ExactMathError(f"zero denominator: {text!r}")
        return Fraction(num, den)
    try:
        return Fraction(int(s))
    except ValueError:
        raise ExactMathError(f"not a rational: {text!r}") from None


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# -- construction helpers ---------------------------------------------------

def qvector(values: Iterable) -> QVector:
    return tuple(Fraction(v) for v in values)


def qmatrix(rows: Iterable[Iterable]) -> QMatrix:
    m = tuple(tuple(Fraction(v) for v in row) for row in rows)
    if m and len({len(r) for r in m}) != 1:
        raise ExactMathError("ragged matrix")
    return m


def identity_q(n: int) -> QMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros_q(rows: int, cols: int) -> QMatrix:
    return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))


def shape(m: QMatrix) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def transpose(m: QMatrix) -> QMatrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matvec(a: QMatrix, v: Sequence) -> QVector:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def add(a: QMatrix, b: QMatrix) -> QMatrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(a: QMatrix, c) -> QMatrix:
    c = Fraction(c)
    return tuple(tuple(c * x for x in row) for row in a)


def quad_form(g: QMatrix, v: Sequence) -> Fraction:
    """``v^T g v``."""
    total = Fraction(0)
    n = len(v)
    for i in range(n):
        if v[i]:
            row = g[i]
            s = sum((row[j] * v[j] for j in range(n) if v[j]), Fraction(0))
            total += v[i] * s
    return total


def bilinear(g: QMatrix, u: Sequence, v: Sequence) -> Fraction:
    return sum((u[i] * sum((g[i][j] * v[j] for j in range(len(v)) if v[j]), Fraction(0))
                for i in range(len(u)) if u[i]), Fraction(0))


def is_symmetric(m: QMatrix) -> bool:
    n, c = shape(m)
    return n == c and all(m[i][j] == m[j][i] for i in range(n) for j in range(i))


# -- elimination ------------------------------------------------------------

def _echelon(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form in place; returns pivot columns.

    Pivot choice is the first row (at or below the current one) with a
    nonzero entry in the current column.
    """
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            for j in range(c, ncols):
                if prow[j]:
                    prow[j] *= inv
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    row = rows[i]
                    for j in range(c, ncols):
                        if prow[j]:
                            row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return pivots


def rank_q(m: QMatrix) -> int:
    """Rank over Q."""
    if not m:
        return 0
    rows = [list(map(Fraction, r)) for r in m]
    return len(_echelon(rows, len(rows[0])))


def det_q(m: QMatrix) -> Fraction:
    n, c = shape(m)
    if n != c:
        raise ExactMathError("determinant of a non-square matrix")
    a = [list(map(Fraction, r)) for r in m]
    det = Fraction(1)
    for col in range(n):
        p = next((i for i in range(col, n) if a[i][col] != 0), None)
        if p is None:
            return Fraction(0)
        if p != col:
            a[col], a[p] = a[p], a[col]
            det = -det
        piv = a[col][col]
        det *= piv
        for i in range(col + 1, n):
            f = a[i][col] / piv
            if f:
                for j in range(col, n):
                    a[i][j] -= f * a[col][j]
    return det


def _bareiss(a: list[list[int]]) -> tuple[int, int]:
    """Fraction-free elimination in place; returns (rank, signed last pivot)."""
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    prev, sign, r = 1, 1, 0
    for col in range(ncols):
        p = next((i for i in range(r, nrows) if a[i][col]), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
            sign = -sign
        piv = a[r][col]
        for i in range(r + 1, nrows):
            ai = a[i]
            f = ai[col]
            for j in range(col + 1, ncols):
                ai[j] = (piv * ai[j] - f * a[r][j]) // prev
            ai[col] = 0
        prev = piv
        r += 1
        if r == nrows:
            break
    return r, sign * prev


def rank_exact_int(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by Bareiss elimination."""
    if not rows:
        return 0
    return _bareiss([list(map(int, r)) for r in rows])[0]


def det_int(m: Sequence[Sequence[int]]) -> int:
    n = len(m)
    if any(len(r) != n for r in m):
        raise ExactMathError("determinant of a non-square matrix")
    if n == 0:
        return 1
    r, d = _bareiss([list(map(int, row)) for row in m])
    return d if r == n else 0


def solve_q(a: QMatrix, b: Sequence) -> QVector:
    """One exact solution of ``a x = b``.

    Free variables are set to zero, so underdetermined systems give a
    deterministic answer.  Raises :class:`InconsistentSystemError`.
    """
    nrows, ncols = shape(a)
    if nrows != len(b):
        raise ExactMathError("dimension mismatch in solve_q")
    if nrows == 0:
        return tuple(Fraction(0) for _ in range(ncols))
    rows = [list(map(Fraction, r)) + [Fraction(bv)] for r, bv in zip(a, b)]
    pivots = _echelon(rows, ncols + 1)
    if pivots and pivots[-1] == ncols:
        raise InconsistentSystemError("inconsistent system")
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        x[c] = rows[r][ncols]
    return tuple(x)


def inverse_q(m: QMatrix) -> QMatrix:
    n, c = shape(m)
    if n != c:
        raise ExactMathError("inverse of a non-square matrix")
    rows = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    pivots = _echelon(rows, 2 * n)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("singular matrix")
    return tuple(tuple(rows[i][n:]) for i in range(n))


def nullspace_q(m: QMatrix, ncols: int | None = None) -> list[QVector]:
    """Basis of ``{x : m x = 0}``, one vector per free column."""
    if ncols is None:
        ncols = shape(m)[1]
    if not m:
        return [tuple(Fraction(int(i == j)) for i in range(ncols)) for j in range(ncols)]
    rows = [list(map(Fraction, r)) for r in m]
    pivots = _echelon(rows, ncols)
    basis = []
    for f in (c for c in range(ncols) if c not in set(pivots)):
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, c in enumerate(pivots):
            x[c] = -rows[r][f]
        basis.append(tuple(x))
    return basis


def leading_minors(m: QMatrix) -> list[Fraction]:
    """All leading principal minors, from one fraction-free pass."""
    n = len(m)
    a = [list(map(Fraction, r)) for r in m]
    minors = []
    det = Fraction(1)
    for k in range(n):
        piv = a[k][k]
        det *= piv
        minors.append(det)
        if piv == 0:
            # Later minors need a genuine computation.
            minors.extend(det_q(tuple(tuple(r[:j]) for r in m[:j])) for j in range(k + 2, n + 1))
            return minors
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return minors


def is_positive_definite(m: QMatrix) -> bool:
    """Sylvester's criterion on a symmetric matrix."""
    if not m or not is_symmetric(m):
        return False
    return all(x > 0 for x in leading_minors(m))


def ldl_decomposition(g: QMatrix) -> tuple[list[list[Fraction]], list[Fraction]]:
    """``g = L diag(d) L^T`` with unit lower-triangular L (positive-definite g)."""
    n = len(g)
    lower = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for j in range(n):
        s = g[j][j] - sum((lower[j][k] ** 2 * d[k] for k in range(j)), Fraction(0))
        if s <= 0:
            raise ExactMathError("matrix is not positive definite")
        d[j] = s
        lower[j][j] = Fraction(1)
        for i in range(j + 1, n):
            t = g[i][j] - sum((lower[i][k] * lower[j][k] * d[k] for k in range(j)), Fraction(0))
            lower[i][j] = t / s
    return lower, d


def common_denominator(values: Iterable) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, Fraction(v).denominator)
    return den


def integer_scaled(m: QMatrix) -> tuple[tuple[tuple[int, ...], ...], int]:
    """Return ``(M, s)`` with integer ``M = s * m``."""
    s = common_denominator(x for row in m for x in row)
    return tuple(tuple(int(x * s) for x in row) for row in m), s


def primitive_int_vector(v: Sequence) -> tuple[int, ...]:
    """Clear denominators and divide out the content of a rational vector."""
    den = common_denominator(v)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


# -- modular rank -----------------------------------------------------------

PRIME_LIMIT = 1 << 26   # products of two residues stay far inside int64


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7):
        if n % q == 0:
            return n == q
    # deterministic Miller-Rabin for n < 3.2e9 with these bases
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def modular_primes():
    """Primes below PRIME_LIMIT, largest first."""
    n = PRIME_LIMIT - 1
    while n > 2:
        if _is_prime(n):
            yield n
        n -= 2


class ModularEchelon:
    """Incremental reduced echelon basis over GF(p) backed by numpy.

    Rows are integer vectors.  ``add`` returns True when the row increased
    the rank.
    """

    def __init__(self, ncols: int, p: int = 67108859):
        self.ncols = ncols
        self.p = p
        self._basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row) -> np.ndarray:
        p = self.p
        r = np.asarray(row, dtype=np.int64) % p
        if self.pivots:
            coeffs = r[self.pivots]
            nz = np.nonzero(coeffs)[0]
            if nz.size:
                # Chunk the dot products so sums never leave int64.
                for start in range(0, nz.size, 1024):
                    idx = nz[start:start + 1024]
                    r = (r - coeffs[idx] @ self._basis[idx]) % p
        return r

    def add(self, row) -> bool:
        r = self.reduce(row)
        nz = np.nonzero(r)[0]
        if nz.size == 0:
            return False
        c = int(nz[0])
        inv = pow(int(r[c]), -1, self.p)
        r = (r * inv) % self.p
        if self.pivots:
            col = self._basis[:, c].copy()
            hit = np.nonzero(col)[0]
            if hit.size:
                self._basis[hit] = (self._basis[hit] - np.outer(col[hit], r)) % self.p
        self._basis = np.vstack([self._basis, r[None, :]])
        self.pivots.append(c)
        return True


def hadamard_log2_bound(rows: Sequence[Sequence[int]], r: int) -> float:
    """log2 of an upper bound for any r x r minor of an integer matrix."""
    norms = sorted((sum(x * x for x in row) for row in rows), reverse=True)[:r]
    return sum(0.5 * math.log2(n) for n in norms if n > 0)


def rank_int(rows: Sequence[Sequence[int]], ncols: int | None = None,
             upper_bound: int | None = None) -> int:
    """Exact rank over Q of an integer matrix, by multi-modular elimination.

    ``rank_p <= rank_Q`` for every prime p, and a nonzero r x r minor is
    nonzero modulo at least one prime of any family whose product exceeds
    its absolute value.  So the maximum over enough primes is exact.  When
    ``upper_bound`` (a known bound on the rank) is reached we stop early.
    """
    rows = [list(map(int, r)) for r in rows]
    if not rows:
        return 0
    if ncols is None:
        ncols = len(rows[0])
    best = 0
    covered = 0.0
    for p in modular_primes():
        ech = ModularEchelon(ncols, p)
        for row in rows:
            ech.add(row)
            if upper_bound is not None and ech.rank >= upper_bound:
                return ech.rank
        best = max(best, ech.rank)
        covered += math.log2(p)
        # A minor of size best+1 would have to vanish modulo all primes used.
        if covered > hadamard_log2_bound(rows, best + 1) + 1:
            return best
    raise ExactMathError("ran out of primes")  # pragma: no cover


def solve_mod_p(m: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Solution of a square system modulo p, or None if singular mod p."""
    n = m.shape[0]
    a = np.concatenate([m % p, (b % p)[:, None]], axis=1).astype(np.int64)
    for col in range(n):
        nz = np.nonzero(a[col:, col])[0]
        if nz.size == 0:
            return None
        r = col + int(nz[0])
        if r != col:
            a[[col, r]] = a[[r, col]]
        a[col] = a[col] * pow(int(a[col, col]), -1, p) % p
        f = a[:, col].copy()
        f[col] = 0
        hit = np.nonzero(f)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(f[hit], a[col])) % p
    return a[:, n]


def rational_reconstruction(u: int, mod: int) -> Fraction | None:
    """r/s with r = s*u (mod mod), |r|, s <= sqrt(mod/2), if one exists."""
    bound = math.isqrt(mod // 2)
    r0, r1 = mod, u % mod
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def solve_int_multimodular(m: Sequence[Sequence[int]], b: Sequence) -> QVector:
    """Exact solution of a nonsingular square integer system with rational
    right-hand side, by Chinese remaindering and rational reconstruction.
    The answer is verified exactly before it is returned."""
    n = len(m)
    den = common_denominator(b)
    bi = [int(x * den) for x in b]
    sparse = [[(j, int(v)) for j, v in enumerate(row) if v] for row in m]
    # Cramer: numerators and denominators are bounded by Hadamard products.
    cols = [[int(m[i][j]) for i in range(n)] for j in range(n)] + [bi]
    need = 2 * (hadamard_log2_bound(cols, n) + 2) + 2
    det_bits = hadamard_log2_bound([[int(v) for v in row] for row in m], n) + 1
    residues: list[int] = [0] * n
    modulus, bits, bad_bits = 1, 0.0, 0.0
    for p in modular_primes():
        mp = np.array([[int(v) % p for v in row] for row in m], dtype=np.int64)
        bp = np.array([x % p for x in bi], dtype=np.int64)
        sol = solve_mod_p(mp, bp, p)
        if sol is None:
            # det vanishes mod primes whose product exceeds |det|: det = 0
            bad_bits += math.log2(p)
            if bad_bits > det_bits:
                break
            continue
        # CRT update
        inv = pow(modulus % p, -1, p)
        residues = [r + modulus * (((int(s) - r) * inv) % p) for r, s in zip(residues, sol)]
        modulus *= p
        bits += math.log2(p)
        cand = [rational_reconstruction(r, modulus) for r in residues]
        if all(c is not None for c in cand):
            if all(sum(v * cand[j] for j, v in row) == bi[i] for i, row in enumerate(sparse)):
                return tuple(c / den for c in cand)
        if bits > need:
            break
    raise SingularMatrixError("singular matrix")
