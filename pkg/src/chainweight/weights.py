"""The weight structure on bounded complexes of free modules.

Membership is decided through homology: X is in w>=n when H_i(X)
vanishes below n, and in w<=n when H_i(X) vanishes above n and (over Z)
H_n(X) is torsion-free.  Over the supported hereditary bases these
criteria characterize "homotopy equivalent to a complex of frees
concentrated in the right degrees", which is what the abstract
definition asks for.  Weight decompositions are brutal truncations.
"""

from dataclasses import dataclass

from .complexes import (
    ChainComplex,
    ChainMap,
    HomComplex,
    Homotopy,
    assert_chain_map,
    cone,
    free_sphere,
    homology,
    homotopy_classify,
    identity_map,
    is_homotopy_equivalence,
    left_inverse_up_to_homotopy,
    pi0_hom,
    shift,
    solve_map_up_to_homotopy,
    zero_complex,
    zero_map,
)
from .errors import PreconditionError, TheoryError
from .linalg import Matrix, kernel_basis, rank as matrix_rank, solve_matrix


def in_w_geq(X, n):
    prof = homology(X)
    return all(d >= n for d in prof.degrees())


def in_w_leq(X, n):
    prof = homology(X)
    if any(d > n for d in prof.degrees()):
        return False
    if X.ring.is_field:
        return True
    return not prof.presentation(n).torsion


def in_heart(X):
    return in_w_leq(X, 0) and in_w_geq(X, 0)


@dataclass(frozen=True)
class WeightBounds:
    """Minimal [lo, hi] with X in w>=lo and w<=hi; zero flags acyclicity."""

    lo: int
    hi: int
    zero: bool = False

    @staticmethod
    def zero_object():
        return WeightBounds(0, 0, True)


def weight_bounds(X):
    prof = homology(X)
    if prof.is_trivial:
        return WeightBounds.zero_object()
    degs = prof.degrees()
    lo, top = min(degs), max(degs)
    hi = top
    if not X.ring.is_field and prof.presentation(top).torsion:
        hi = top + 1
    return WeightBounds(lo, hi)


def brutal_below(X, n):
    """sigma_{<=n}: degrees <= n kept verbatim."""
    if X.is_zero or n < X.min_deg:
        return zero_complex(X.ring)
    hi = min(n, X.max_deg)
    ranks = tuple(X.rank(i) for i in range(X.min_deg, hi + 1))
    diffs = tuple(X.d(i) for i in range(X.min_deg + 1, hi + 1))
    return ChainComplex(X.ring, X.min_deg, hi, ranks, diffs)


def brutal_above(X, n):
    """sigma_{>=n}: degrees >= n kept verbatim."""
    if X.is_zero or n > X.max_deg:
        return zero_complex(X.ring)
    lo = max(n, X.min_deg)
    ranks = tuple(X.rank(i) for i in range(lo, X.max_deg + 1))
    diffs = tuple(X.d(i) for i in range(lo + 1, X.max_deg + 1))
    return ChainComplex(X.ring, lo, X.max_deg, ranks, diffs)


@dataclass
class WeightDecomposition:
    """A -> X -> B, degreewise short exact, A in w<=n, B in w>=n+1."""

    degree: int
    total: ChainComplex
    low: ChainComplex
    high: ChainComplex
    i_map: ChainMap
    p_map: ChainMap

    def verify(self):
        """Re-check every invariant; raises TheoryError on failure."""
        n = self.degree
        X, A, B = self.total, self.low, self.high
        if not (self.i_map.is_chain_map() and self.p_map.is_chain_map()):
            raise TheoryError("decomposition maps fail to be chain maps")
        for i in X.degrees():
            if A.rank(i) + B.rank(i) != X.rank(i):
                raise TheoryError("ranks not additive at degree %d" % i)
            ii, pp = self.i_map.component(i), self.p_map.component(i)
            if not (pp * ii).is_zero:
                raise TheoryError("p . i nonzero at degree %d" % i)
            # exactness of 0 -> A -> X -> B -> 0 in each degree
            if matrix_rank(ii) != A.rank(i) or matrix_rank(pp) != B.rank(i):
                raise TheoryError("degreewise sequence not exact at %d" % i)
        if not in_w_leq(A, n):
            raise TheoryError("low piece escapes w<=%d" % n)
        if not in_w_geq(B, n + 1):
            raise TheoryError("high piece escapes w>=%d" % (n + 1))
        # cofiber comparison: cone(i) -> B is an equivalence
        C, _, _ = cone(self.i_map)
        ring = X.ring
        comps = {}
        for i in C.degrees():
            left = Matrix.zero(ring, B.rank(i), A.rank(i - 1))
            comps[i] = left.hstack(self.p_map.component(i))
        q = ChainMap(C, B, comps)
        assert_chain_map(q)
        if not is_homotopy_equivalence(q):
            raise TheoryError("cone of the inclusion is not the high piece")
        return True


def weight_decompose(X, n):
    """Brutal truncation decomposition at degree n (always defined)."""
    A = brutal_below(X, n)
    B = brutal_above(X, n + 1)
    ring = X.ring
    i_map = ChainMap(
        A, X, {i: Matrix.identity(ring, A.rank(i)).vstack(
            Matrix.zero(ring, X.rank(i) - A.rank(i), A.rank(i)))
            if X.rank(i) else Matrix.zero(ring, 0, A.rank(i))
            for i in A.degrees()},
    ) if not A.is_zero else zero_map(A, X)
    p_map = ChainMap(
        X, B, {i: Matrix.zero(ring, B.rank(i), X.rank(i) - B.rank(i)).hstack(
            Matrix.identity(ring, B.rank(i)))
            for i in B.degrees()},
    ) if not B.is_zero else zero_map(X, B)
    return WeightDecomposition(n, X, A, B, i_map, p_map)


@dataclass(frozen=True)
class OrthogonalityVerdict:
    ok: bool
    group: object  # pi0 hom classes; trivial exactly when ok


def check_orthogonality(X, Y, n):
    """pi0 of Hom(X, Y) for X in w<=n, Y in w>=n+1 must vanish."""
    if not in_w_leq(X, n):
        raise PreconditionError("first argument is not in w<=%d" % n)
    if not in_w_geq(Y, n + 1):
        raise PreconditionError("second argument is not in w>=%d" % (n + 1))
    group = pi0_hom(X, Y)
    return OrthogonalityVerdict(group.is_trivial, group)


@dataclass
class DecompositionComparison:
    low_map: ChainMap
    high_map: ChainMap
    low_homotopy: Homotopy
    high_homotopy: Homotopy
    unique: bool


def compare_decompositions(dec_n, dec_m):
    """Maps of decompositions at degrees n <= m of the same object.

    low_map : A_n -> A_m with i_m . low_map ~ i_n,
    high_map : B_n -> B_m with high_map . p_n ~ p_m; the homotopies are
    returned.  unique reflects whether pi0 Hom(B_n, A_m) vanishes.
    """
    if dec_n.total != dec_m.total:
        raise PreconditionError("decompositions of different objects")
    if dec_n.degree > dec_m.degree:
        raise PreconditionError("first degree must not exceed the second")
    X = dec_n.total
    hom_ax = HomComplex(dec_n.low, X)
    hom_aa = HomComplex(dec_n.low, dec_m.low)
    transform = hom_aa.postcompose_matrix(dec_m.i_map, hom_ax)
    got = solve_map_up_to_homotopy(
        dec_n.low, dec_m.low, transform, hom_ax, dec_n.i_map
    )
    if got is None:
        raise TheoryError("no comparison map on the low pieces exists")
    a, ha = got
    hom_xb = HomComplex(X, dec_m.high)
    hom_bb = HomComplex(dec_n.high, dec_m.high)
    transform = hom_bb.precompose_matrix(dec_n.p_map, hom_xb)
    got = solve_map_up_to_homotopy(
        dec_n.high, dec_m.high, transform, hom_xb, dec_m.p_map
    )
    if got is None:
        raise TheoryError("no comparison map on the high pieces exists")
    b, hb = got
    unique = pi0_hom(dec_n.high, dec_m.low).is_trivial
    return DecompositionComparison(a, b, ha, hb, unique)


def heart_split(f):
    """Retraction up to homotopy of a heart ingression.

    f : X -> Y with X, Y, cone(f) all in the heart; returns (g, h) with
    g . f ~ id_X witnessed by h.  Failure of the solver would falsify
    the splitting proposition, hence TheoryError.
    """
    X, Y = f.source, f.target
    if not in_heart(X):
        raise PreconditionError("source is not in the heart")
    if not in_heart(Y):
        raise PreconditionError("target is not in the heart")
    C, _, _ = cone(f)
    if not in_heart(C):
        raise PreconditionError("cofiber is not in the heart")
    got = left_inverse_up_to_homotopy(f)
    if got is None:
        raise TheoryError("heart ingression failed to split")
    return got


def strictify_heart(X):
    """Equivalence from a pure-weight-n object onto a free module at n."""
    wb = weight_bounds(X)
    if wb.zero:
        z = zero_complex(X.ring)
        cls = homotopy_classify(X, with_equivalence=True)
        return z, cls.equivalence
    if wb.lo != wb.hi:
        raise PreconditionError(
            "object has weight bounds [%d, %d], not pure" % (wb.lo, wb.hi)
        )
    cls = homotopy_classify(X, with_equivalence=True)
    F = cls.equivalence.small
    expect = free_sphere(X.ring, wb.lo, homology(X).presentation(wb.lo).free_rank)
    if F != expect:  # pragma: no cover
        raise TheoryError("canonical model of a pure object is not a free sphere")
    return F, cls.equivalence


@dataclass(frozen=True)
class NegativityVerdict:
    negative: bool
    failures: tuple  # (source index, target index, shift, group)


def check_negative(objects):
    """No maps S -> S'[n] for n > 0 up to homotopy, for all pairs."""
    failures = []
    for si, S in enumerate(objects):
        for ti, Sp in enumerate(objects):
            if S.is_zero or Sp.is_zero:
                continue
            bound = S.max_deg - Sp.min_deg + 1
            for n in range(1, bound + 1):
                group = pi0_hom(S, shift(Sp, n))
                if not group.is_trivial:
                    failures.append((si, ti, n, group))
    return NegativityVerdict(not failures, tuple(failures))


# -- the left adjacent t-structure ---------------------------------------


def in_t_geq(X, n):
    """Homology vanishes below n (no freeness condition)."""
    return all(d >= n for d in homology(X).degrees())


def in_t_leq(X, n):
    return all(d <= n for d in homology(X).degrees())


def t_cotruncate(X, n):
    """Good truncation: subcomplex (... -> X_{n+1} -> ker d_n).

    Returns (subcomplex, inclusion); quasi-isomorphism onto degrees >= n.
    """
    if X.is_zero or n > X.max_deg:
        z = zero_complex(X.ring)
        return z, zero_map(z, X)
    if n <= X.min_deg:
        return X, identity_map(X)
    K = kernel_basis(X.d(n))
    A = solve_matrix(K, X.d(n + 1))
    if A is None:  # pragma: no cover
        raise TheoryError("image of d escapes the kernel")
    ranks = (K.cols,) + tuple(X.rank(i) for i in range(n + 1, X.max_deg + 1))
    diffs = ((A,) if n < X.max_deg else ()) + tuple(
        X.d(i) for i in range(n + 2, X.max_deg + 1)
    )
    Z = ChainComplex(X.ring, n, X.max_deg, ranks, diffs)
    comps = {n: K}
    for i in range(n + 1, X.max_deg + 1):
        comps[i] = Matrix.identity(X.ring, X.rank(i))
    inc = assert_chain_map(ChainMap(Z, X, comps))
    return Z, inc


def check_left_adjacent(X, n):
    """The defining identity C_{t>=n} = C_{w>=n}, instance by instance."""
    return in_t_geq(X, n) == in_w_geq(X, n)
