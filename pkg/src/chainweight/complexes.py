"""Bounded chain complexes of finitely generated free modules.

Grading is homological: d_i lowers degree, d_{i-1} * d_i = 0.  The sign
conventions are fixed once and for all here:

  shift     (S^k X)_i = X_{i-k},  d = (-1)^k d_X
  cone(f)_i = X_{i-1} + Y_i,      d(x, y) = (-d x, d y - f x)
  cyl(f)_i  = X_i + X_{i-1} + Y_i, d(x, x', y) = (d x + x', -d x', d y - f x')
  Hom(X,Y)_n = sum_i Hom(X_i, Y_{i+n}),  (Df)_i = d_Y f_i - (-1)^n f_{i-1} d_X

With these choices cyl(f)/X is cone(f) on the nose, degree-0 cycles of
the hom complex are the chain maps, and degree-0 boundaries are the
nullhomotopic ones.
"""

from dataclasses import dataclass, field

from .errors import (
    DimensionError,
    PreconditionError,
    RingMismatchError,
    TheoryError,
)
from .linalg import (
    Matrix,
    ModulePresentation,
    cokernel_invariants,
    invert,
    kernel_basis,
    solve,
    solve_matrix,
)


@dataclass(frozen=True)
class ChainComplex:
    """Bounded complex given by per-degree ranks and differentials.

    ranks[k] is the rank in degree min_deg + k; diffs[k] is the
    differential from degree min_deg + k + 1 down to min_deg + k.  The
    zero complex is encoded by max_deg = min_deg - 1 with empty data.
    """

    ring: object
    min_deg: int
    max_deg: int
    ranks: tuple
    diffs: tuple

    def __post_init__(self):
        n = self.max_deg - self.min_deg + 1
        if n < 0:
            raise DimensionError("min_deg may exceed max_deg by at most one")
        if len(self.ranks) != n or len(self.diffs) != max(n - 1, 0):
            raise DimensionError("ranks/diffs length mismatch")
        for k, d in enumerate(self.diffs):
            if d.ring != self.ring:
                raise RingMismatchError("differential over the wrong ring")
            if (d.rows, d.cols) != (self.ranks[k], self.ranks[k + 1]):
                raise DimensionError(
                    "differential into degree %d has shape %dx%d, want %dx%d"
                    % (self.min_deg + k, d.rows, d.cols, self.ranks[k], self.ranks[k + 1])
                )

    @property
    def is_zero(self):
        return all(r == 0 for r in self.ranks)

    def rank(self, i):
        if self.min_deg <= i <= self.max_deg:
            return self.ranks[i - self.min_deg]
        return 0

    def d(self, i):
        """Differential from degree i to degree i-1 (zero outside support)."""
        k = i - self.min_deg
        if 1 <= k <= len(self.diffs):
            return self.diffs[k - 1]
        return Matrix.zero(self.ring, self.rank(i - 1), self.rank(i))

    def degrees(self):
        return range(self.min_deg, self.max_deg + 1)

    def total_rank(self):
        return sum(self.ranks)


def zero_complex(ring):
    return ChainComplex(ring, 0, -1, (), ())


def from_diffs(ring, min_deg, ranks, diffs):
    return ChainComplex(ring, min_deg, min_deg + len(ranks) - 1, tuple(ranks), tuple(diffs))


def free_sphere(ring, deg, rk=1):
    """Free module of the given rank concentrated in one degree."""
    if rk == 0:
        return zero_complex(ring)
    return ChainComplex(ring, deg, deg, (rk,), ())


def two_term(ring, top_deg, M):
    """Complex [F_top --M--> F_bottom] in degrees top_deg, top_deg - 1."""
    return ChainComplex(ring, top_deg - 1, top_deg, (M.rows, M.cols), (M,))


def trim(X):
    """Shrink the stated degree window to the nonzero support."""
    degs = [i for i in X.degrees() if X.rank(i)]
    if not degs:
        return zero_complex(X.ring)
    lo, hi = min(degs), max(degs)
    ranks = tuple(X.rank(i) for i in range(lo, hi + 1))
    diffs = tuple(X.d(i) for i in range(lo + 1, hi + 1))
    return ChainComplex(X.ring, lo, hi, ranks, diffs)


def validate(X):
    """List of defects ("" means valid): shape coherence and d*d = 0."""
    problems = []
    for i in X.degrees():
        prod = X.d(i) * X.d(i + 1)
        if not prod.is_zero:
            problems.append(
                "d_%d * d_%d != 0 (product %s)" % (i, i + 1, prod.to_lists())
            )
            break
    return problems


def assert_valid(X):
    problems = validate(X)
    if problems:
        raise PreconditionError("; ".join(problems))
    return X


class ChainMap:
    """Degreewise matrices commuting with the differentials.

    Components are stored total over the degree overlap; accessors
    return zero matrices of the right shape elsewhere.
    """

    def __init__(self, source, target, components):
        if source.ring != target.ring:
            raise RingMismatchError("chain map between different rings")
        self.source = source
        self.target = target
        comps = {}
        for i, M in components.items():
            if (M.rows, M.cols) != (target.rank(i), source.rank(i)):
                raise DimensionError(
                    "component at degree %d has shape %dx%d, want %dx%d"
                    % (i, M.rows, M.cols, target.rank(i), source.rank(i))
                )
            if M.rows and M.cols:
                comps[i] = M
        self.components = comps

    def component(self, i):
        c = self.components.get(i)
        if c is None:
            return Matrix.zero(self.source.ring, self.target.rank(i), self.source.rank(i))
        return c

    def is_chain_map(self):
        return not self.first_defect()

    def first_defect(self):
        for i in range(
            min(self.source.min_deg, self.target.min_deg),
            max(self.source.max_deg, self.target.max_deg) + 1,
        ):
            lhs = self.target.d(i) * self.component(i)
            rhs = self.component(i - 1) * self.source.d(i)
            if lhs != rhs:
                return "square at degree %d does not commute" % i
        return ""

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        degs = set(self.components) | set(other.components)
        return all(self.component(i) == other.component(i) for i in degs)

    def __hash__(self):
        raise TypeError("chain maps are not hashable")

    def compose(self, other):
        """self after other (other first)."""
        if other.target != self.source:
            raise DimensionError("composition through mismatched complexes")
        comps = {
            i: self.component(i) * other.component(i)
            for i in other.source.degrees()
        }
        return ChainMap(other.source, self.target, comps)

    def __add__(self, other):
        if self.source != other.source or self.target != other.target:
            raise DimensionError("sum of maps with different (co)domains")
        comps = {
            i: self.component(i) + other.component(i) for i in self.source.degrees()
        }
        return ChainMap(self.source, self.target, comps)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ChainMap(
            self.source, self.target, {i: -M for i, M in self.components.items()}
        )


def identity_map(X):
    return ChainMap(X, X, {i: Matrix.identity(X.ring, X.rank(i)) for i in X.degrees()})


def zero_map(X, Y):
    return ChainMap(X, Y, {})


def assert_chain_map(f):
    defect = f.first_defect()
    if defect:
        raise PreconditionError(defect)
    return f


class Homotopy:
    """Witness that two parallel chain maps agree in the homotopy category.

    Components raise degree: h_i maps degree i to degree i + 1, and
    f - g = d h + h d.
    """

    def __init__(self, f, g, components):
        if f.source != g.source or f.target != g.target:
            raise DimensionError("homotopy between non-parallel maps")
        self.f = f
        self.g = g
        src, tgt = f.source, f.target
        comps = {}
        for i, M in components.items():
            if (M.rows, M.cols) != (tgt.rank(i + 1), src.rank(i)):
                raise DimensionError(
                    "homotopy component at degree %d has shape %dx%d, want %dx%d"
                    % (i, M.rows, M.cols, tgt.rank(i + 1), src.rank(i))
                )
            if M.rows and M.cols:
                comps[i] = M
        self.components = comps

    def component(self, i):
        c = self.components.get(i)
        if c is None:
            return Matrix.zero(
                self.f.source.ring, self.f.target.rank(i + 1), self.f.source.rank(i)
            )
        return c

    def verify(self):
        src, tgt = self.f.source, self.f.target
        for i in range(
            min(src.min_deg, tgt.min_deg) - 1, max(src.max_deg, tgt.max_deg) + 2
        ):
            want = self.f.component(i) - self.g.component(i)
            got = tgt.d(i + 1) * self.component(i) + self.component(i - 1) * src.d(i)
            if want != got:
                return False
        return True


def assert_homotopy(h):
    if not h.verify():
        raise TheoryError("claimed homotopy fails d h + h d = f - g")
    return h


# -- constructions --------------------------------------------------------


def shift(X, k):
    """Suspension S^k: degrees move up by k, differentials scale by (-1)^k."""
    sign = -1 if k % 2 else 1
    return ChainComplex(
        X.ring,
        X.min_deg + k,
        X.max_deg + k,
        X.ranks,
        tuple(d.scale(sign) for d in X.diffs),
    )


def shift_map(f, k):
    return ChainMap(
        shift(f.source, k),
        shift(f.target, k),
        {i + k: M for i, M in f.components.items()},
    )


def direct_sum(X, Y):
    if X.ring != Y.ring:
        raise RingMismatchError("direct sum over different rings")
    if X.is_zero:
        lo, hi = Y.min_deg, Y.max_deg
    elif Y.is_zero:
        lo, hi = X.min_deg, X.max_deg
    else:
        lo = min(X.min_deg, Y.min_deg)
        hi = max(X.max_deg, Y.max_deg)
    if hi < lo:
        return zero_complex(X.ring)
    ranks = tuple(X.rank(i) + Y.rank(i) for i in range(lo, hi + 1))
    diffs = []
    for i in range(lo + 1, hi + 1):
        dX, dY = X.d(i), Y.d(i)
        top = dX.hstack(Matrix.zero(X.ring, dX.rows, dY.cols))
        bot = Matrix.zero(X.ring, dY.rows, dX.cols).hstack(dY)
        diffs.append(top.vstack(bot))
    Z = ChainComplex(X.ring, lo, hi, ranks, tuple(diffs))
    inc_X = ChainMap(
        X,
        Z,
        {
            i: Matrix.identity(X.ring, X.rank(i)).vstack(
                Matrix.zero(X.ring, Y.rank(i), X.rank(i))
            )
            for i in X.degrees()
        },
    )
    inc_Y = ChainMap(
        Y,
        Z,
        {
            i: Matrix.zero(X.ring, X.rank(i), Y.rank(i)).vstack(
                Matrix.identity(X.ring, Y.rank(i))
            )
            for i in Y.degrees()
        },
    )
    return Z, inc_X, inc_Y


def direct_sum_map(f, g):
    """Block sum of two chain maps."""
    S, iSf, iSg = direct_sum(f.source, g.source)
    T, iTf, iTg = direct_sum(f.target, g.target)
    comps = {}
    for i in S.degrees():
        a, b = f.component(i), g.component(i)
        top = a.hstack(Matrix.zero(a.ring, a.rows, b.cols))
        bot = Matrix.zero(a.ring, b.rows, a.cols).hstack(b)
        comps[i] = top.vstack(bot)
    return ChainMap(S, T, comps)


def cone(f):
    """Mapping cone with its two canonical maps Y -> C(f) -> S X."""
    X, Y = f.source, f.target
    ring = X.ring
    if X.is_zero:
        lo, hi = Y.min_deg, Y.max_deg
    elif Y.is_zero:
        lo, hi = X.min_deg + 1, X.max_deg + 1
    else:
        lo = min(X.min_deg + 1, Y.min_deg)
        hi = max(X.max_deg + 1, Y.max_deg)
    if hi < lo:
        C = zero_complex(ring)
        return C, zero_map(Y, C), zero_map(C, shift(X, 1))
    ranks = tuple(X.rank(i - 1) + Y.rank(i) for i in range(lo, hi + 1))
    diffs = []
    for i in range(lo + 1, hi + 1):
        dX = X.d(i - 1).scale(-1)
        dY = Y.d(i)
        fc = f.component(i - 1).scale(-1)
        # block [[ -dX, 0 ], [ -f, dY ]]
        top = dX.hstack(Matrix.zero(ring, dX.rows, dY.cols))
        bot = fc.hstack(dY)
        diffs.append(top.vstack(bot))
    C = ChainComplex(ring, lo, hi, ranks, tuple(diffs))
    inc = ChainMap(
        Y,
        C,
        {
            i: Matrix.zero(ring, X.rank(i - 1), Y.rank(i)).vstack(
                Matrix.identity(ring, Y.rank(i))
            )
            for i in Y.degrees()
        },
    )
    SX = shift(X, 1)
    proj = ChainMap(
        C,
        SX,
        {
            i: Matrix.identity(ring, X.rank(i - 1)).hstack(
                Matrix.zero(ring, X.rank(i - 1), Y.rank(i))
            )
            for i in C.degrees()
        },
    )
    return C, inc, proj


def cone_functorial(f, fp, u, v, eta=None):
    """Induced map cone(f) -> cone(fp) from a square commuting up to eta.

    u : X -> X', v : Y -> Y', and eta witnesses v f - fp u = d eta + eta d
    (omit eta when the square commutes strictly).
    """
    C, _, _ = cone(f)
    Cp, _, _ = cone(fp)
    ring = C.ring
    comps = {}
    for i in C.degrees():
        ui = u.component(i - 1)
        vi = v.component(i)
        ei = (
            eta.component(i - 1)
            if eta is not None
            else Matrix.zero(ring, fp.target.rank(i), u.source.rank(i - 1))
        )
        top = ui.hstack(Matrix.zero(ring, ui.rows, vi.cols))
        bot = ei.hstack(vi)
        comps[i] = top.vstack(bot)
    return assert_chain_map(ChainMap(C, Cp, comps))


def cylinder(f):
    """Mapping cylinder with inclusion of X and projection onto Y."""
    X, Y = f.source, f.target
    ring = X.ring
    lo = min(X.min_deg, Y.min_deg) if not X.is_zero and not Y.is_zero else (
        Y.min_deg if X.is_zero else X.min_deg
    )
    hi = max(X.max_deg + 1, Y.max_deg) if not X.is_zero else Y.max_deg
    if X.is_zero:
        return Y, zero_map(X, Y), identity_map(Y)
    ranks = tuple(
        X.rank(i) + X.rank(i - 1) + Y.rank(i) for i in range(lo, hi + 1)
    )
    diffs = []
    for i in range(lo + 1, hi + 1):
        nX, nXp, nY = X.rank(i), X.rank(i - 1), Y.rank(i)
        mX, mXp, mY = X.rank(i - 1), X.rank(i - 2), Y.rank(i - 1)
        z = lambda r, c: Matrix.zero(ring, r, c)
        row1 = X.d(i).hstack(Matrix.identity(ring, mX)).hstack(z(mX, nY))
        row2 = z(mXp, nX).hstack(X.d(i - 1).scale(-1)).hstack(z(mXp, nY))
        row3 = z(mY, nX).hstack(f.component(i - 1).scale(-1)).hstack(Y.d(i))
        diffs.append(row1.vstack(row2).vstack(row3))
    Cyl = ChainComplex(ring, lo, hi, ranks, tuple(diffs))
    inc = ChainMap(
        X,
        Cyl,
        {
            i: Matrix.identity(ring, X.rank(i))
            .vstack(Matrix.zero(ring, X.rank(i - 1), X.rank(i)))
            .vstack(Matrix.zero(ring, Y.rank(i), X.rank(i)))
            for i in X.degrees()
        },
    )
    proj = ChainMap(
        Cyl,
        Y,
        {
            i: f.component(i)
            .hstack(Matrix.zero(ring, Y.rank(i), X.rank(i - 1)))
            .hstack(Matrix.identity(ring, Y.rank(i)))
            for i in Cyl.degrees()
        },
    )
    return Cyl, inc, proj


# -- homology -------------------------------------------------------------


@dataclass(frozen=True)
class HomologyProfile:
    """Per-degree presentations of H_i; trivial degrees are omitted."""

    ring: object
    groups: tuple  # sorted tuple of (degree, ModulePresentation)

    @staticmethod
    def of(ring, mapping):
        items = tuple(
            sorted((i, p) for i, p in mapping.items() if not p.is_trivial)
        )
        return HomologyProfile(ring, items)

    def presentation(self, i):
        for d, p in self.groups:
            if d == i:
                return p
        return ModulePresentation(0)

    @property
    def is_trivial(self):
        return not self.groups

    def degrees(self):
        return [d for d, _ in self.groups]

    def shifted(self, k):
        return HomologyProfile(self.ring, tuple((d + k, p) for d, p in self.groups))

    def __str__(self):
        if self.is_trivial:
            return "0"
        return "; ".join("H_%d = %s" % (d, p) for d, p in self.groups)


def homology(X):
    groups = {}
    for i in X.degrees():
        K = kernel_basis(X.d(i))
        if K.cols == 0:
            continue
        A = solve_matrix(K, X.d(i + 1))
        if A is None:  # pragma: no cover - image always lies in the kernel
            raise TheoryError("image of d is not contained in the kernel")
        groups[i] = cokernel_invariants(A)
    return HomologyProfile.of(X.ring, groups)


def is_acyclic(X):
    return homology(X).is_trivial


# -- hom complexes --------------------------------------------------------


class HomComplex:
    """Hom(X, Y) with bookkeeping between elements and coordinates.

    Degree-n elements are families phi_i : X_i -> Y_{i+n}; coordinates
    list the blocks by ascending i, each block row-major.
    """

    def __init__(self, X, Y):
        if X.ring != Y.ring:
            raise RingMismatchError("hom complex over different rings")
        self.X = X
        self.Y = Y
        self.ring = X.ring
        if X.is_zero or Y.is_zero:
            self.complex = zero_complex(X.ring)
            self._blocks = {}
            return
        lo = Y.min_deg - X.max_deg
        hi = Y.max_deg - X.min_deg
        self._blocks = {}
        ranks = []
        for n in range(lo, hi + 1):
            blocks = []
            off = 0
            for i in X.degrees():
                r, c = Y.rank(i + n), X.rank(i)
                if r and c:
                    blocks.append((i, r, c, off))
                    off += r * c
            self._blocks[n] = blocks
            ranks.append(off)
        diffs = []
        for n in range(lo + 1, hi + 1):
            diffs.append(self._diff_matrix(n))
        self.complex = ChainComplex(X.ring, lo, hi, tuple(ranks), tuple(diffs))

    def rank(self, n):
        return self.complex.rank(n)

    def _block(self, n, i):
        for bi, r, c, off in self._blocks.get(n, ()):
            if bi == i:
                return r, c, off
        return 0, 0, None

    def _diff_matrix(self, n):
        """Matrix of D : Hom_n -> Hom_{n-1}."""
        X, Y = self.X, self.Y
        src_blocks = self._blocks.get(n, ())
        n_src = sum(r * c for _, r, c, _ in src_blocks)
        n_dst = sum(r * c for _, r, c, _ in self._blocks.get(n - 1, ()))
        ent = [[0] * n_src for _ in range(n_dst)]
        sign = 1 if n % 2 else -1  # -(-1)^n
        for i, r, c, off in src_blocks:
            dY = Y.d(i + n)
            if dY.rows:
                r2, c2, off2 = self._block(n - 1, i)
                if off2 is not None:
                    for rr in range(r):
                        for rt in range(r2):
                            a = dY[rt, rr]
                            if a:
                                for cc in range(c):
                                    ent[off2 + rt * c2 + cc][off + rr * c + cc] += a
            dX = X.d(i + 1)
            if dX.cols:
                r3, c3, off3 = self._block(n - 1, i + 1)
                if off3 is not None:
                    for cc in range(c):
                        for ct in range(c3):
                            a = dX[cc, ct]
                            if a:
                                for rr in range(r):
                                    ent[off3 + rr * c3 + ct][off + rr * c + cc] += sign * a
        red = self.ring.reduce
        return Matrix(
            self.ring, n_dst, n_src, tuple(red(x) for row in ent for x in row)
        )

    def vectorize(self, components, n):
        """Column vector of a degree-n family {i: Matrix X_i -> Y_{i+n}}."""
        vals = [0] * self.rank(n)
        for i, r, c, off in self._blocks.get(n, ()):
            M = components.get(i)
            if M is None:
                continue
            if (M.rows, M.cols) != (r, c):
                raise DimensionError("bad block shape at degree %d" % i)
            vals[off:off + r * c] = list(M.entries)
        return Matrix.column(self.ring, vals)

    def devectorize(self, vec, n):
        comps = {}
        for i, r, c, off in self._blocks.get(n, ()):
            comps[i] = Matrix(
                self.ring, r, c, tuple(vec[off + t, 0] for t in range(r * c))
            )
        return comps

    def vectorize_map(self, f):
        return self.vectorize({i: f.component(i) for i in f.components}, 0)

    def map_from_vector(self, vec):
        return ChainMap(self.X, self.Y, self.devectorize(vec, 0))

    def homotopy_from_vector(self, f, g, vec):
        return Homotopy(f, g, self.devectorize(vec, 1))

    # linear operators induced by composition ------------------------------

    def postcompose_matrix(self, u, dst, n=0):
        """Matrix of phi |-> u . phi, into dst = HomComplex(X, u.target)."""
        rows, cols = dst.rank(n), self.rank(n)
        ent = [[0] * cols for _ in range(rows)]
        for i, r, c, off in self._blocks.get(n, ()):
            ui = u.component(i + n)
            r2, c2, off2 = dst._block(n, i)
            if off2 is None:
                continue
            for rr in range(r):
                for rt in range(r2):
                    a = ui[rt, rr]
                    if a:
                        for cc in range(c):
                            ent[off2 + rt * c2 + cc][off + rr * c + cc] += a
        red = self.ring.reduce
        return Matrix(self.ring, rows, cols, tuple(red(x) for row in ent for x in row))

    def precompose_matrix(self, u, dst, n=0):
        """Matrix of phi |-> phi . u, into dst = HomComplex(u.source, Y)."""
        rows, cols = dst.rank(n), self.rank(n)
        ent = [[0] * cols for _ in range(rows)]
        for i, r, c, off in self._blocks.get(n, ()):
            ui = u.component(i)
            r2, c2, off2 = dst._block(n, i)
            if off2 is None:
                continue
            for cc in range(c):
                for ct in range(c2):
                    a = ui[cc, ct]
                    if a:
                        for rr in range(r):
                            ent[off2 + rr * c2 + ct][off + rr * c + cc] += a
        red = self.ring.reduce
        return Matrix(self.ring, rows, cols, tuple(red(x) for row in ent for x in row))


def hom_complex(X, Y):
    return HomComplex(X, Y).complex


def pi0_hom(X, Y):
    """H_0 of Hom(X, Y): chain maps modulo chain homotopy."""
    return homology(hom_complex(X, Y)).presentation(0)


def nullhomotopy(f):
    """A homotopy f ~ 0, or None when f is nonzero in the homotopy category."""
    hc = HomComplex(f.source, f.target)
    b = hc.vectorize_map(f)
    D1 = hc.complex.d(1)
    x = solve(D1, b)
    if x is None:
        return None
    return assert_homotopy(hc.homotopy_from_vector(f, zero_map(f.source, f.target), x))


def homotopic(f, g):
    return nullhomotopy(f - g) is not None


def is_quasi_iso(f):
    C, _, _ = cone(f)
    return is_acyclic(C)


def is_homotopy_equivalence(f):
    # For bounded complexes of frees over Z or F_p the two notions agree.
    return is_quasi_iso(f)


def solve_map_up_to_homotopy(U, V, transform, hom_st, target):
    """Chain map m : U -> V with transform(m) homotopic to target.

    transform is a matrix from coordinates of Hom(U, V)_0 to coordinates
    of hom_st's degree 0; target is a chain map living in hom_st.
    Returns (m, homotopy transform(m) ~ target) or None.
    """
    hom_uv = HomComplex(U, V)
    n1 = hom_uv.rank(0)
    n2 = hom_st.rank(1)
    D0 = hom_uv.complex.d(0)
    D1 = hom_st.complex.d(1)
    ring = hom_uv.ring
    top = D0.hstack(Matrix.zero(ring, D0.rows, n2))
    bottom = transform.hstack(-D1)
    big = top.vstack(bottom)
    rhs = Matrix.column(ring, [0] * D0.rows + list(hom_st.vectorize_map(target).entries))
    sol = solve(big, rhs)
    if sol is None:
        return None
    m = hom_uv.map_from_vector(
        Matrix.column(ring, [sol[t, 0] for t in range(n1)])
    )
    assert_chain_map(m)
    h_vec = Matrix.column(ring, [sol[n1 + t, 0] for t in range(n2)])
    moved = hom_st.map_from_vector(transform * hom_uv.vectorize_map(m))
    h = assert_homotopy(hom_st.homotopy_from_vector(moved, target, h_vec))
    return m, h


def left_inverse_up_to_homotopy(f):
    """g with g f ~ id, plus the witnessing homotopy, or None."""
    X, Y = f.source, f.target
    hom_xx = HomComplex(X, X)
    hom_yx = HomComplex(Y, X)
    transform = hom_yx.precompose_matrix(f, hom_xx)
    return solve_map_up_to_homotopy(Y, X, transform, hom_xx, identity_map(X))


def homotopy_inverse(f):
    """(g, h_left: g f ~ id, h_right: f g ~ id) for a homotopy equivalence."""
    got = left_inverse_up_to_homotopy(f)
    if got is None:
        return None
    g, h_left = got
    h_right = nullhomotopy(f.compose(g) - identity_map(f.target))
    if h_right is None:
        return None
    return g, h_left, h_right


# -- minimization ---------------------------------------------------------


@dataclass
class Equivalence:
    """A strong deformation retraction X -> X_small.

    forth . back is the identity of the small model on the nose;
    homotopy witnesses id_X ~ back . forth.
    """

    source: ChainComplex
    small: ChainComplex
    forth: ChainMap
    back: ChainMap
    homotopy: Homotopy

    def verify(self):
        ok = self.forth.is_chain_map() and self.back.is_chain_map()
        ok = ok and self.forth.compose(self.back) == identity_map(self.small)
        return ok and self.homotopy.verify()


def _identity_equivalence(X):
    ident = identity_map(X)
    return Equivalence(X, X, ident, ident, Homotopy(ident, ident, {}))


def _compose_sdr(outer, inner):
    """Stack inner : X -> Y on top of outer-step data Y -> Z."""
    forth = outer.forth.compose(inner.forth)
    back = inner.back.compose(outer.back)
    comps = {}
    for i in inner.source.degrees():
        part = inner.back.component(i + 1) * outer.homotopy.component(i) * inner.forth.component(i)
        total = inner.homotopy.component(i) + part
        comps[i] = total
    ident = identity_map(inner.source)
    h = Homotopy(ident, back.compose(forth), comps)
    return Equivalence(inner.source, outer.small, forth, back, h)


def _find_unit_entry(X):
    for i in X.degrees():
        d = X.d(i)
        for r in range(d.rows):
            for c in range(d.cols):
                if X.ring.is_unit(d[r, c]):
                    return i, r, c
    return None


def _cancel_pair(X, k, i, j):
    """Gaussian cancellation of the unit entry d_k[i, j]; one SDR step."""
    ring = X.ring
    d_k = X.d(k)
    a_inv = ring.inverse(d_k[i, j])
    keep_k = [c for c in range(X.rank(k)) if c != j]
    keep_km1 = [r for r in range(X.rank(k - 1)) if r != i]
    ranks = list(X.ranks)
    ranks[k - X.min_deg] -= 1
    ranks[k - 1 - X.min_deg] -= 1
    diffs = list(X.diffs)

    red = ring.reduce
    new_dk = Matrix(
        ring,
        len(keep_km1),
        len(keep_k),
        tuple(
            red(d_k[r, c] - a_inv * d_k[r, j] * d_k[i, c])
            for r in keep_km1
            for c in keep_k
        ),
    )
    diffs[k - 1 - X.min_deg] = new_dk
    if k + 1 <= X.max_deg:
        d_up = X.d(k + 1)
        diffs[k - X.min_deg] = d_up.submatrix(keep_k, range(d_up.cols))
    if k - 1 > X.min_deg:
        d_dn = X.d(k - 1)
        diffs[k - 2 - X.min_deg] = d_dn.submatrix(range(d_dn.rows), keep_km1)
    Xp = ChainComplex(ring, X.min_deg, X.max_deg, tuple(ranks), tuple(diffs))

    ident = lambda deg: Matrix.identity(ring, X.rank(deg))
    forth_comps = {deg: ident(deg) for deg in X.degrees()}
    phi_k = Matrix(
        ring,
        len(keep_k),
        X.rank(k),
        tuple(1 if c == keep_k[r] else 0 for r in range(len(keep_k)) for c in range(X.rank(k))),
    )
    phi_km1_rows = []
    for r in keep_km1:
        row = [0] * X.rank(k - 1)
        row[r] = 1
        row[i] = red(-a_inv * d_k[r, j])
        phi_km1_rows.append(row)
    phi_km1 = Matrix.from_rows(ring, phi_km1_rows) if phi_km1_rows else Matrix.zero(ring, 0, X.rank(k - 1))
    forth_comps[k] = phi_k
    forth_comps[k - 1] = phi_km1
    forth = ChainMap(X, Xp, forth_comps)

    back_comps = {deg: ident(deg) for deg in X.degrees()}
    psi_k_rows = []
    for r in range(X.rank(k)):
        if r == j:
            psi_k_rows.append([red(-a_inv * d_k[i, c]) for c in keep_k])
        else:
            row = [0] * len(keep_k)
            row[keep_k.index(r)] = 1
            psi_k_rows.append(row)
    psi_k = Matrix.from_rows(ring, psi_k_rows) if psi_k_rows else Matrix.zero(ring, 0, len(keep_k))
    psi_km1_rows = []
    for r in range(X.rank(k - 1)):
        row = [0] * len(keep_km1)
        if r != i:
            row[keep_km1.index(r)] = 1
        psi_km1_rows.append(row)
    psi_km1 = Matrix.from_rows(ring, psi_km1_rows) if psi_km1_rows else Matrix.zero(ring, 0, len(keep_km1))
    back_comps[k] = psi_k
    back_comps[k - 1] = psi_km1
    back = ChainMap(Xp, X, back_comps)

    eta_ent = [[0] * X.rank(k - 1) for _ in range(X.rank(k))]
    eta_ent[j][i] = red(a_inv)
    eta = Homotopy(
        identity_map(X),
        back.compose(forth),
        {k - 1: Matrix(ring, X.rank(k), X.rank(k - 1), tuple(x for row in eta_ent for x in row))},
    )
    return Equivalence(X, Xp, forth, back, eta)


def minimize(X):
    """Cancel unit differential entries until none remain.

    Over F_p the result has zero differentials (ranks are the Betti
    numbers); over Z no unit entries survive.  Returns an Equivalence.
    """
    current = _identity_equivalence(X)
    while True:
        hit = _find_unit_entry(current.small)
        if hit is None:
            break
        step = _cancel_pair(current.small, *hit)
        stacked = _compose_sdr(step, current)
        current = stacked
    small = trim(current.small)
    if small != current.small:
        re_forth = ChainMap(current.small, small, {i: Matrix.identity(X.ring, small.rank(i)) for i in small.degrees()})
        re_back = ChainMap(small, current.small, {i: Matrix.identity(X.ring, small.rank(i)) for i in small.degrees()})
        current = Equivalence(
            X,
            small,
            re_forth.compose(current.forth),
            current.back.compose(re_back),
            current.homotopy,
        )
    return current


# -- elementary decomposition over a hereditary base ----------------------


@dataclass
class ElementaryDecomposition:
    """X written, by a degreewise change of basis, as a sum of pieces.

    Pieces are spheres (a basis vector with zero differential) and
    two-term complexes [R --d--> R].  `pairs[k]` lists (src, tgt, d):
    basis vector src in degree k maps by d onto tgt in degree k - 1.
    `iso` maps the block model onto the original complex.
    """

    original: ChainComplex
    model: ChainComplex
    iso: ChainMap
    iso_inv: ChainMap
    pairs: dict
    spheres: dict

    def verify(self):
        ok = self.iso.is_chain_map() and self.iso_inv.is_chain_map()
        ok = ok and self.iso.compose(self.iso_inv) == identity_map(self.original)
        ok = ok and self.iso_inv.compose(self.iso) == identity_map(self.model)
        return ok


def elementary_decomposition(X):
    ring = X.ring
    if X.is_zero:
        z = trim(X)
        return ElementaryDecomposition(
            X, z, ChainMap(z, X, {}), ChainMap(X, z, {}), {}, {}
        )
    delta = {i: X.d(i) for i in X.degrees()}
    phi = {i: Matrix.identity(ring, X.rank(i)) for i in X.degrees()}
    phi_inv = {i: Matrix.identity(ring, X.rank(i)) for i in X.degrees()}
    sources = {i: {} for i in X.degrees()}  # idx -> (tgt_idx, divisor)
    targets = {i: set() for i in X.degrees()}
    from .linalg import smith_normal_form

    for m in range(X.min_deg, X.max_deg):
        free_rows = [r for r in range(X.rank(m)) if r not in sources[m]]
        M = delta[m + 1]
        sub = M.submatrix(free_rows, range(M.cols))
        s = smith_normal_form(sub)
        # lift the row transform to the full degree-m space
        Ufull_rows = []
        for r in range(X.rank(m)):
            row = [0] * X.rank(m)
            if r in sources[m]:
                row[r] = 1
            else:
                fi = free_rows.index(r)
                for fj, rr in enumerate(free_rows):
                    row[rr] = s.U[fi, fj]
            Ufull_rows.append(row)
        Ufull = Matrix.from_rows(ring, Ufull_rows) if Ufull_rows else Matrix.zero(ring, 0, 0)
        V = s.V
        Ufull_inv = invert(Ufull) if Ufull.rows else Ufull
        V_inv = invert(V) if V.rows else V
        delta[m + 1] = Ufull * M * V
        if m + 2 <= X.max_deg:
            delta[m + 2] = V_inv * delta[m + 2]
        phi[m] = phi[m] * Ufull_inv
        phi_inv[m] = Ufull * phi_inv[m]
        phi[m + 1] = phi[m + 1] * V
        phi_inv[m + 1] = V_inv * phi_inv[m + 1]
        for t, dv in enumerate(s.elementary_divisors):
            sources[m + 1][t] = (free_rows[t], dv)
            targets[m].add(free_rows[t])

    model = ChainComplex(
        ring, X.min_deg, X.max_deg, X.ranks, tuple(delta[i] for i in range(X.min_deg + 1, X.max_deg + 1))
    )
    pairs = {
        k: sorted((src, tgt, dv) for src, (tgt, dv) in sources[k].items())
        for k in X.degrees()
        if sources[k]
    }
    spheres = {}
    for i in X.degrees():
        free = [
            r
            for r in range(X.rank(i))
            if r not in sources[i] and r not in targets[i]
        ]
        if free:
            spheres[i] = free
    iso = ChainMap(model, X, phi)
    iso_inv = ChainMap(X, model, phi_inv)
    dec = ElementaryDecomposition(X, model, iso, iso_inv, pairs, spheres)
    if not dec.verify():  # pragma: no cover
        raise TheoryError("elementary decomposition failed to verify")
    return dec


def decomposition_profile(dec):
    """Homology read off the block model (independent of homology())."""
    groups = {}
    ring = dec.original.ring
    for i, idxs in dec.spheres.items():
        p = groups.get(i, (0, []))
        groups[i] = (p[0] + len(idxs), p[1])
    for k, triples in dec.pairs.items():
        for _, _, dv in triples:
            if not ring.is_unit(dv):
                p = groups.get(k - 1, (0, []))
                p[1].append(dv)
                groups[k - 1] = p
    return HomologyProfile.of(
        ring,
        {
            i: ModulePresentation(fr, tuple(sorted(tor)))
            for i, (fr, tor) in groups.items()
        },
    )


def split_acyclic(X):
    """Exhibit an acyclic complex as elementary pieces, id ~ 0 included.

    Rejects non-acyclic input, reporting the lowest nonzero homology.
    """
    prof = homology(X)
    if not prof.is_trivial:
        d = prof.degrees()[0]
        raise PreconditionError(
            "complex is not acyclic: H_%d = %s" % (d, prof.presentation(d))
        )
    dec = elementary_decomposition(X)
    if dec.spheres or any(
        not X.ring.is_unit(dv) for tr in dec.pairs.values() for _, _, dv in tr
    ):  # pragma: no cover
        raise TheoryError("acyclic complex decomposed with non-contractible pieces")
    comps = {}
    ring = X.ring
    for k, triples in dec.pairs.items():
        ent = [[0] * dec.model.rank(k - 1) for _ in range(dec.model.rank(k))]
        for src, tgt, dv in triples:
            ent[src][tgt] = ring.inverse(dv)
        comps[k - 1] = Matrix(
            ring,
            dec.model.rank(k),
            dec.model.rank(k - 1),
            tuple(x for row in ent for x in row),
        )
    h_comps = {
        i: dec.iso.component(i + 1) * M * dec.iso_inv.component(i)
        for i, M in comps.items()
    }
    h = Homotopy(identity_map(X), zero_map(X, X), h_comps)
    return dec, assert_homotopy(h)


# -- homotopy classification ---------------------------------------------


def canonical_model(ring, profile):
    """The canonical complex with the given homology.

    Degree i holds the free part of H_i, the targets of the torsion of
    H_i, and the sources of the torsion of H_{i-1} (divisors ascending).
    """
    if profile.is_trivial:
        return zero_complex(ring)
    degs = profile.degrees()
    lo, hi = min(degs), max(degs) + 1
    tors = {i: tuple(sorted(profile.presentation(i).torsion)) for i in range(lo - 1, hi + 1)}
    free = {i: profile.presentation(i).free_rank for i in range(lo - 1, hi + 1)}
    ranks = []
    for i in range(lo, hi + 1):
        ranks.append(free.get(i, 0) + len(tors.get(i, ())) + len(tors.get(i - 1, ())))
    while ranks and ranks[-1] == 0:
        ranks.pop()
        hi -= 1
    diffs = []
    for i in range(lo + 1, hi + 1):
        rows, cols = ranks[i - 1 - lo], ranks[i - lo]
        ent = [[0] * cols for _ in range(rows)]
        t = tors.get(i - 1, ())
        for s, dv in enumerate(t):
            ent[free.get(i - 1, 0) + s][free.get(i, 0) + len(tors.get(i, ())) + s] = dv
        diffs.append(Matrix(ring, rows, cols, tuple(x for row in ent for x in row)))
    return ChainComplex(ring, lo, hi, tuple(ranks), tuple(diffs))


@dataclass
class Classification:
    profile: HomologyProfile
    equivalence: Equivalence  # X -> canonical model


def homotopy_classify(X, with_equivalence=False):
    """Canonical form deciding homotopy equivalence over Z and F_p.

    Two complexes are homotopy equivalent exactly when the returned
    profiles agree degreewise.  With with_equivalence=True the explicit
    retraction onto the canonical model comes along.
    """
    profile = homology(X)
    if not with_equivalence:
        return profile
    dec = elementary_decomposition(X)
    if decomposition_profile(dec) != profile:  # pragma: no cover
        raise TheoryError("decomposition disagrees with homology")
    ring = X.ring
    C = canonical_model(ring, profile)

    # slot assignment: model basis vector -> canonical basis index
    slot = {i: {} for i in X.degrees()}
    for i, idxs in dec.spheres.items():
        for pos, r in enumerate(idxs):
            slot[i][r] = pos
    for k in sorted(dec.pairs):
        kept = [(dv, src, tgt) for src, tgt, dv in dec.pairs[k] if not ring.is_unit(dv)]
        kept.sort()
        f_km1 = profile.presentation(k - 1).free_rank
        f_k = profile.presentation(k).free_rank
        t_k = len(profile.presentation(k).torsion)
        for pos, (dv, src, tgt) in enumerate(kept):
            slot[k][src] = f_k + t_k + pos
            slot[k - 1][tgt] = f_km1 + pos

    proj_comps = {}
    inc_comps = {}
    for i in X.degrees():
        rows, cols = C.rank(i), dec.model.rank(i)
        ent = [[0] * cols for _ in range(rows)]
        for r, pos in slot[i].items():
            ent[pos][r] = 1
        P = Matrix(ring, rows, cols, tuple(x for row in ent for x in row))
        proj_comps[i] = P
        inc_comps[i] = P.transpose()
    proj = ChainMap(dec.model, C, proj_comps)
    inc = ChainMap(C, dec.model, inc_comps)

    forth = proj.compose(dec.iso_inv)
    back = dec.iso.compose(inc)
    assert_chain_map(forth)
    assert_chain_map(back)

    # contraction of the discarded unit pieces, conjugated back to X
    h_comps = {}
    for k, triples in dec.pairs.items():
        unit = [(src, tgt, dv) for src, tgt, dv in triples if ring.is_unit(dv)]
        if not unit:
            continue
        ent = [[0] * dec.model.rank(k - 1) for _ in range(dec.model.rank(k))]
        for src, tgt, dv in unit:
            ent[src][tgt] = ring.inverse(dv)
        M = Matrix(
            ring,
            dec.model.rank(k),
            dec.model.rank(k - 1),
            tuple(x for row in ent for x in row),
        )
        h_comps[k - 1] = dec.iso.component(k) * M * dec.iso_inv.component(k - 1)
    ident = identity_map(X)
    h = assert_homotopy(Homotopy(ident, back.compose(forth), h_comps))
    eq = Equivalence(X, C, forth, back, h)
    if forth.compose(back) != identity_map(C):  # pragma: no cover
        raise TheoryError("canonical retraction is not split")
    return Classification(profile, eq)
