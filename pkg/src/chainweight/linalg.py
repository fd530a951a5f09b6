"""Exact dense linear algebra over Z and F_p.

Matrices are immutable, row-major, and carry their ring.  All the
higher layers (complexes, weights, cells, K_0) reduce their questions
to the operations here: Smith normal form, kernels, cokernel
invariants, solving, and one-sided inverses.

Arbitrary-precision integers are mandatory; nothing in this file may
assume entries fit a machine word.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionError, PreconditionError, RingMismatchError
from .kernel import snf_raw


def _is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class RingSpec:
    """Base ring: the integers ("Z") or a prime field ("Fp")."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind == "Z":
            if self.p:
                raise PreconditionError("integer ring carries no modulus")
        elif self.kind == "Fp":
            if not _is_prime(self.p):
                raise PreconditionError("modulus %r is not prime" % (self.p,))
        else:
            raise PreconditionError("unknown ring kind %r" % (self.kind,))

    @property
    def is_field(self):
        return self.kind == "Fp"

    def reduce(self, x):
        return x % self.p if self.p else x

    def is_unit(self, x):
        if self.p:
            return x % self.p != 0
        return x in (1, -1)

    def inverse(self, x):
        if self.p:
            if x % self.p == 0:
                raise ZeroDivisionError("zero is not a unit")
            return pow(x, self.p - 2, self.p)
        if x not in (1, -1):
            raise ZeroDivisionError("%d is not a unit in Z" % x)
        return x

    def __str__(self):
        return "Z" if self.kind == "Z" else "F%d" % self.p


ZZ = RingSpec("Z")


def GF(p):
    return RingSpec("Fp", p)


@dataclass(frozen=True)
class Matrix:
    ring: RingSpec
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                "expected %d entries, got %d"
                % (self.rows * self.cols, len(self.entries))
            )
        if self.ring.p:
            p = self.ring.p
            if any(not (0 <= x < p) for x in self.entries):
                object.__setattr__(
                    self, "entries", tuple(x % p for x in self.entries)
                )

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_rows(ring, rows):
        n = len(rows[0]) if rows else 0
        if any(len(r) != n for r in rows):
            raise DimensionError("ragged rows")
        return Matrix(ring, len(rows), n, tuple(x for r in rows for x in r))

    @staticmethod
    def zero(ring, rows, cols):
        return Matrix(ring, rows, cols, (0,) * (rows * cols))

    @staticmethod
    def identity(ring, n):
        return Matrix(
            ring, n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n))
        )

    @staticmethod
    def column(ring, values):
        return Matrix(ring, len(values), 1, tuple(values))

    @staticmethod
    def diagonal(ring, rows, cols, values):
        ent = [0] * (rows * cols)
        for i, v in enumerate(values):
            ent[i * cols + i] = v
        return Matrix(ring, rows, cols, tuple(ent))

    # -- access -------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise DimensionError("index (%d, %d) out of range" % (i, j))
        return self.entries[i * self.cols + j]

    def row_list(self, i):
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_lists(self):
        return [self.row_list(i) for i in range(self.rows)]

    def column_vector(self, j):
        return Matrix(
            self.ring, self.rows, 1, tuple(self[i, j] for i in range(self.rows))
        )

    @property
    def is_zero(self):
        return all(x == 0 for x in self.entries)

    # -- arithmetic ---------------------------------------------------

    def _same_ring(self, other):
        if self.ring != other.ring:
            raise RingMismatchError("%s vs %s" % (self.ring, other.ring))

    def __add__(self, other):
        self._same_ring(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch in addition")
        red = self.ring.reduce
        return Matrix(
            self.ring,
            self.rows,
            self.cols,
            tuple(red(a + b) for a, b in zip(self.entries, other.entries)),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        red = self.ring.reduce
        return Matrix(
            self.ring, self.rows, self.cols, tuple(red(-a) for a in self.entries)
        )

    def scale(self, c):
        red = self.ring.reduce
        return Matrix(
            self.ring, self.rows, self.cols, tuple(red(c * a) for a in self.entries)
        )

    def __mul__(self, other):
        self._same_ring(other)
        if self.cols != other.rows:
            raise DimensionError(
                "cannot multiply %dx%d by %dx%d"
                % (self.rows, self.cols, other.rows, other.cols)
            )
        m, k, n = self.rows, self.cols, other.cols
        a, b = self.entries, other.entries
        out = [0] * (m * n)
        for i in range(m):
            arow = a[i * k:(i + 1) * k]
            for t in range(k):
                c = arow[t]
                if c:
                    boff = t * n
                    ooff = i * n
                    for j in range(n):
                        out[ooff + j] += c * b[boff + j]
        if self.ring.p:
            p = self.ring.p
            out = [x % p for x in out]
        return Matrix(self.ring, m, n, tuple(out))

    def transpose(self):
        return Matrix(
            self.ring,
            self.cols,
            self.rows,
            tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
        )

    # -- block building -----------------------------------------------

    def hstack(self, other):
        self._same_ring(other)
        if self.rows != other.rows:
            raise DimensionError("row count mismatch in hstack")
        ent = []
        for i in range(self.rows):
            ent.extend(self.row_list(i))
            ent.extend(other.row_list(i))
        return Matrix(self.ring, self.rows, self.cols + other.cols, tuple(ent))

    def vstack(self, other):
        self._same_ring(other)
        if self.cols != other.cols:
            raise DimensionError("column count mismatch in vstack")
        return Matrix(
            self.ring,
            self.rows + other.rows,
            self.cols,
            self.entries + other.entries,
        )

    def submatrix(self, row_idx, col_idx):
        return Matrix(
            self.ring,
            len(row_idx),
            len(col_idx),
            tuple(self[i, j] for i in row_idx for j in col_idx),
        )


def block_diag(ring, blocks):
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r = c = 0
    for b in blocks:
        for i in range(b.rows):
            out[r + i][c:c + b.cols] = b.row_list(i)
        r += b.rows
        c += b.cols
    return Matrix(ring, rows, cols, tuple(x for row in out for x in row))


@dataclass(frozen=True)
class SmithForm:
    U: Matrix
    D: Matrix
    V: Matrix
    elementary_divisors: tuple

    @property
    def rank(self):
        return len(self.elementary_divisors)


@dataclass(frozen=True)
class ModulePresentation:
    """A finitely generated module: free part plus invariant factors."""

    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise PreconditionError("invariant factors must form a chain")

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append("Z^%d" % self.free_rank)
        parts.extend("Z/%d" % t for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def invariant_factors(divisors):
    """Invariant factor chain of the direct sum of Z/d for the given d > 1."""
    primes = {}
    for d in divisors:
        if d <= 1:
            raise PreconditionError("divisors must exceed 1")
        p = 2
        while p * p <= d:
            if d % p == 0:
                e = 0
                while d % p == 0:
                    d //= p
                    e += 1
                primes.setdefault(p, []).append(e)
            p += 1
        if d > 1:
            primes.setdefault(d, []).append(1)
    depth = max((len(v) for v in primes.values()), default=0)
    out = []
    for idx in range(depth):  # idx 0 collects the largest powers
        f = 1
        for p, es in primes.items():
            es = sorted(es, reverse=True)
            if idx < len(es):
                f *= p ** es[idx]
        out.append(f)
    return tuple(sorted(out))


def smith_normal_form(M):
    U_f, D_f, V_f = snf_raw(M.rows, M.cols, list(M.entries), M.ring.p)
    U = Matrix(M.ring, M.rows, M.rows, tuple(U_f))
    D = Matrix(M.ring, M.rows, M.cols, tuple(D_f))
    V = Matrix(M.ring, M.cols, M.cols, tuple(V_f))
    divisors = []
    for i in range(min(M.rows, M.cols)):
        d = D[i, i]
        if d == 0:
            break
        divisors.append(d)
    return SmithForm(U, D, V, tuple(divisors))


def rank(M):
    return smith_normal_form(M).rank


def kernel_basis(M):
    """Basis of {x : Mx = 0} as matrix columns (saturated over Z)."""
    s = smith_normal_form(M)
    r = s.rank
    cols = list(range(r, M.cols))
    return s.V.submatrix(range(M.cols), cols)


def cokernel_invariants(M):
    """coker(M) as a module: target free module of rank M.rows mod im(M)."""
    s = smith_normal_form(M)
    torsion = tuple(d for d in s.elementary_divisors if not M.ring.is_unit(d))
    return ModulePresentation(M.rows - s.rank, torsion)


def solve(M, b):
    """One x with Mx = b, or None when the system has no solution.

    Dimension mismatches raise; they are usage errors, not "unsolvable".
    """
    if b.cols != 1 or b.rows != M.rows:
        raise DimensionError(
            "right-hand side must be a %dx1 column, got %dx%d"
            % (M.rows, b.rows, b.cols)
        )
    s = smith_normal_form(M)
    c = s.U * b
    y = [0] * M.cols
    r = s.rank
    for i in range(M.rows):
        ci = c[i, 0]
        if i >= r:
            if ci:
                return None
            continue
        d = s.D[i, i]
        if M.ring.p:
            y[i] = ci * M.ring.inverse(d) % M.ring.p
        else:
            if ci % d:
                return None
            y[i] = ci // d
    x = s.V * Matrix.column(M.ring, y)
    if M * x != b:
        raise AssertionError("solve produced a non-solution")  # pragma: no cover
    return x


def solve_matrix(M, B):
    """Solve MX = B column by column; None if any column fails."""
    cols = []
    for j in range(B.cols):
        x = solve(M, B.column_vector(j))
        if x is None:
            return None
        cols.append(x)
    out = Matrix.zero(M.ring, M.cols, B.cols)
    if cols:
        ent = [c.entries for c in cols]
        out = Matrix(
            M.ring,
            M.cols,
            B.cols,
            tuple(ent[j][i] for i in range(M.cols) for j in range(B.cols)),
        )
    return out


def right_inverse(M):
    """S with M*S = identity, or None when M is not a split surjection."""
    return solve_matrix(M, Matrix.identity(M.ring, M.rows))


def invert(M):
    """Two-sided inverse of a square matrix invertible over the ring."""
    if M.rows != M.cols:
        raise DimensionError("only square matrices can be inverted")
    inv = right_inverse(M)
    if inv is None:
        raise PreconditionError("matrix is not invertible over %s" % M.ring)
    return inv


def det(M):
    """Determinant via fraction-field elimination (independent of SNF)."""
    if M.rows != M.cols:
        raise DimensionError("determinant of a non-square matrix")
    n = M.rows
    if M.ring.p:
        p = M.ring.p
        a = M.to_lists()
        d = 1
        for t in range(n):
            piv = next((i for i in range(t, n) if a[i][t] % p), None)
            if piv is None:
                return 0
            if piv != t:
                a[t], a[piv] = a[piv], a[t]
                d = -d % p
            d = d * a[t][t] % p
            inv = pow(a[t][t], p - 2, p)
            for i in range(t + 1, n):
                c = a[i][t] * inv % p
                for j in range(t, n):
                    a[i][j] = (a[i][j] - c * a[t][j]) % p
        return d % p
    a = [[Fraction(x) for x in M.row_list(i)] for i in range(n)]
    d = Fraction(1)
    for t in range(n):
        piv = next((i for i in range(t, n) if a[i][t]), None)
        if piv is None:
            return 0
        if piv != t:
            a[t], a[piv] = a[piv], a[t]
            d = -d
        d *= a[t][t]
        for i in range(t + 1, n):
            c = a[i][t] / a[t][t]
            for j in range(t, n):
                a[i][j] -= c * a[t][j]
    assert d.denominator == 1
    return d.numerator


def rank_by_elimination(M):
    """Rank over the fraction field, independent of the SNF kernel."""
    m, n = M.rows, M.cols
    if M.ring.p:
        p = M.ring.p
        a = M.to_lists()
        r = 0
        for j in range(n):
            piv = next((i for i in range(r, m) if a[i][j] % p), None)
            if piv is None:
                continue
            a[r], a[piv] = a[piv], a[r]
            inv = pow(a[r][j], p - 2, p)
            for i in range(r + 1, m):
                c = a[i][j] * inv % p
                for jj in range(j, n):
                    a[i][jj] = (a[i][jj] - c * a[r][jj]) % p
            r += 1
            if r == m:
                break
        return r
    a = [[Fraction(x) for x in M.row_list(i)] for i in range(m)]
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, m) if a[i][j]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, m):
            c = a[i][j] / a[r][j]
            for jj in range(j, n):
                a[i][jj] -= c * a[r][jj]
        r += 1
        if r == m:
            break
    return r


def solve_rational(M, b):
    """Solve over Q (Z matrices only): None, or one rational solution.

    Used as the oracle distinguishing "no solution at all" from "only
    non-integral solutions" when solve() over Z returns None.
    """
    if M.ring.p:
        raise PreconditionError("rational solving applies to Z matrices")
    m, n = M.rows, M.cols
    a = [[Fraction(x) for x in M.row_list(i)] + [Fraction(b[i, 0])] for i in range(m)]
    pivots = []
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, m) if a[i][j]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(m):
            if i != r and a[i][j]:
                c = a[i][j] / a[r][j]
                for jj in range(j, n + 1):
                    a[i][jj] -= c * a[r][jj]
        pivots.append((r, j))
        r += 1
    for i in range(r, m):
        if a[i][n]:
            return None
    x = [Fraction(0)] * n
    for i, j in pivots:
        x[j] = a[i][n] / a[i][j]
    return x
