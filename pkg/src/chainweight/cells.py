"""Cellular filtrations: chains of split inclusions with pure quotients.

A filtration is a finite list of stages A_{lo-1} ... A_hi with
degreewise split inclusions, constant outside that window, whose level
quotients A_k/A_{k-1} are pure of weight k.  Quotients of split
inclusions are computed with explicit chosen complements, so every
derived map comes with exact matrices rather than abstract colimits.
"""

import math
from dataclasses import dataclass, field

from .complexes import (
    ChainComplex,
    ChainMap,
    Homotopy,
    HomologyProfile,
    assert_chain_map,
    cone,
    cylinder,
    direct_sum,
    direct_sum_map,
    homology,
    homotopy_classify,
    identity_map,
    is_acyclic,
    is_homotopy_equivalence,
    nullhomotopy,
    trim,
    zero_complex,
    zero_map,
)
from .errors import PreconditionError, TheoryError
from .linalg import Matrix, ModulePresentation, invariant_factors, invert, smith_normal_form
from .weights import brutal_below, in_w_leq, weight_bounds


# -- split monomorphisms and their quotients ------------------------------


@dataclass
class SplitMonoData:
    """Chosen complement data for a degreewise split mono i : A -> X.

    retraction[d] . i_d = id; proj : X -> Q is a chain map onto the
    quotient; section[d] splits proj degreewise (not a chain map); the
    twist[d] : Q_d -> A_{d-1} measures the failure, via
    d_X . section - section . d_Q = i . twist.
    """

    inclusion: ChainMap
    quotient: ChainComplex
    proj: ChainMap
    retraction: dict
    section: dict
    twist: dict

    def section_matrix(self, i):
        m = self.section.get(i)
        if m is None:
            X = self.inclusion.target
            return Matrix.zero(X.ring, X.rank(i), self.quotient.rank(i))
        return m

    def twist_matrix(self, i):
        m = self.twist.get(i)
        if m is None:
            A = self.inclusion.source
            return Matrix.zero(
                A.ring, A.rank(i - 1), self.quotient.rank(i)
            )
        return m


def split_mono_complement(inc):
    """Quotient of a degreewise split monomorphism, with all witnesses.

    Raises PreconditionError when some component fails to be a split
    mono (over Z: not full column rank with unit elementary divisors).
    """
    A, X = inc.source, inc.target
    ring = A.ring
    lam, sec, proj_c = {}, {}, {}
    q_ranks = {}
    lo = min(A.min_deg, X.min_deg) if not X.is_zero else A.min_deg
    hi = max(A.max_deg, X.max_deg) if not X.is_zero else A.max_deg
    if X.is_zero and A.is_zero:
        Q = zero_complex(ring)
        return SplitMonoData(inc, Q, zero_map(X, Q), {}, {}, {})
    for i in range(lo, hi + 1):
        m = inc.component(i)
        a, n = m.cols, m.rows
        s = smith_normal_form(m)
        if s.rank != a or any(not ring.is_unit(dv) for dv in s.elementary_divisors):
            raise PreconditionError(
                "inclusion is not split mono at degree %d" % i
            )
        U_inv = invert(s.U)
        # pseudo-inverse of the diagonal: a x n with unit inverses
        dplus = Matrix.diagonal(
            ring, a, n, [ring.inverse(dv) for dv in s.elementary_divisors]
        )
        lam[i] = s.V * dplus * s.U
        sec[i] = U_inv.submatrix(range(n), range(a, n))
        proj_c[i] = s.U.submatrix(range(a, n), range(n))
        q_ranks[i] = n - a
    ranks = tuple(q_ranks[i] for i in range(lo, hi + 1))
    diffs = tuple(
        proj_c[i - 1] * X.d(i) * sec[i] for i in range(lo + 1, hi + 1)
    )
    Q = ChainComplex(ring, lo, hi, ranks, diffs)
    proj = assert_chain_map(ChainMap(X, Q, proj_c))
    twist = {
        i: lam[i - 1] * X.d(i) * sec[i] for i in range(lo + 1, hi + 1)
    }
    twist[lo] = Matrix.zero(ring, A.rank(lo - 1), Q.rank(lo))
    return SplitMonoData(inc, Q, proj, lam, sec, twist)


def induced_quotient_map(smd, smd_target, g, u):
    """Map of quotients from a strictly commuting square.

    g : X -> X' over u : A -> A' (with g . inc = inc' . u on the nose)
    induces proj' . g . section : Q -> Q', again a chain map.
    """
    if g.compose(smd.inclusion) != smd_target.inclusion.compose(u):
        raise PreconditionError("square over the inclusions does not commute")
    Q, Qp = smd.quotient, smd_target.quotient
    comps = {
        i: smd_target.proj.component(i) * g.component(i) * smd.section_matrix(i)
        for i in Q.degrees()
    }
    return assert_chain_map(ChainMap(Q, Qp, comps))


# -- filtrations ----------------------------------------------------------


@dataclass
class CellFiltration:
    """Stages A_{lo-1} ... A_hi, constant outside the window.

    stages[0] is the base A_{lo-1} (acyclic for an absolute filtration);
    inclusions[j] maps stage lo-1+j into stage lo+j.  hi = lo - 1 is
    allowed and means a constant filtration at the base.
    """

    lo: int
    hi: int
    stages: tuple
    inclusions: tuple
    quotient_witnesses: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.stages) != self.hi - self.lo + 2:
            raise PreconditionError("stage list length does not match [lo, hi]")
        if len(self.inclusions) != self.hi - self.lo + 1:
            raise PreconditionError("inclusion list length does not match [lo, hi]")
        for j, f in enumerate(self.inclusions):
            if f.source != self.stages[j] or f.target != self.stages[j + 1]:
                raise PreconditionError(
                    "inclusion %d does not connect consecutive stages" % j
                )

    @property
    def ring(self):
        return self.stages[0].ring

    def stage(self, k):
        k = max(self.lo - 1, min(k, self.hi))
        return self.stages[k - self.lo + 1]

    def inclusion(self, k):
        """The map stage(k-1) -> stage(k); identity outside the window."""
        if self.lo <= k <= self.hi:
            return self.inclusions[k - self.lo]
        return identity_map(self.stage(k))

    def inclusion_range(self, i, j):
        """Composite stage(i) -> stage(j) for i <= j."""
        f = identity_map(self.stage(i))
        for k in range(i + 1, j + 1):
            f = self.inclusion(k).compose(f)
        return f

    @property
    def colimit(self):
        return self.stages[-1]

    def quotient(self, k):
        """(split data, weight bounds) for the level-k quotient."""
        got = self.quotient_witnesses.get(k)
        if got is None:
            smd = split_mono_complement(self.inclusion(k))
            got = (smd, weight_bounds(smd.quotient))
            self.quotient_witnesses[k] = got
        return got

    def quotient_profile(self, k):
        smd, _ = self.quotient(k)
        return homology(smd.quotient)


def constant_filtration(A, at=0):
    """The filtration with every stage equal to A (no cells)."""
    return CellFiltration(at, at - 1, (A,), ())


def skeletal_filtration(X):
    """Stages are the brutal truncations; one free cell layer per degree."""
    ring = X.ring
    Xt = trim(X)
    if Xt.is_zero:
        return constant_filtration(zero_complex(ring))
    lo, hi = Xt.min_deg, Xt.max_deg
    stages = [brutal_below(Xt, k) for k in range(lo - 1, hi + 1)]
    incs = []
    for j, k in enumerate(range(lo, hi + 1)):
        A, B = stages[j], stages[j + 1]
        comps = {
            i: Matrix.identity(ring, A.rank(i)).vstack(
                Matrix.zero(ring, B.rank(i) - A.rank(i), A.rank(i))
            )
            for i in A.degrees()
        }
        incs.append(assert_chain_map(ChainMap(A, B, comps)))
    return CellFiltration(lo, hi, tuple(stages), tuple(incs))


def truncate_filtration(F, n):
    """tr_n: hold stages constant at stage(n) above level n."""
    new_hi = max(min(n, F.hi), F.lo - 1)
    cut = new_hi - F.lo + 2
    return CellFiltration(F.lo, new_hi, F.stages[:cut], F.inclusions[: cut - 1])


def cotruncate_filtration(F, n):
    """cotr_n: hold stages constant at stage(n) below level n.

    The result generally has a non-acyclic base (a relative filtration).
    """
    if n <= F.lo - 1:
        return F
    if n > F.hi:
        return constant_filtration(F.colimit, at=n + 1)
    drop = n - F.lo + 1
    return CellFiltration(
        n + 1, F.hi, F.stages[drop:], F.inclusions[drop:]
    )


@dataclass(frozen=True)
class FiltrationDiagnostics:
    ok: bool
    level: object  # level index of the first failure, or None
    message: str
    cells: tuple  # (level, degreewise free rank of the quotient)


def verify_cell_filtration(F, allow_relative_base=False):
    """Check every filtration invariant; stop at the first failure."""

    def fail(level, msg):
        return FiltrationDiagnostics(False, level, msg, ())

    base = F.stages[0]
    if not allow_relative_base and not is_acyclic(base):
        return fail(F.lo - 1, "base stage is not acyclic")
    cells = []
    for k in range(F.lo, F.hi + 1):
        inc = F.inclusion(k)
        defect = inc.first_defect()
        if defect:
            return fail(k, "inclusion at level %d: %s" % (k, defect))
        try:
            smd, wb = F.quotient(k)
        except PreconditionError as e:
            return fail(k, "level %d: %s" % (k, e))
        if not wb.zero and (wb.lo, wb.hi) != (k, k):
            return fail(
                k,
                "quotient at level %d has weight bounds [%d, %d]"
                % (k, wb.lo, wb.hi),
            )
        if not wb.zero:
            cells.append((k, smd.quotient.total_rank()))
        if not allow_relative_base and not in_w_leq(F.stage(k), k):
            return fail(k, "stage %d is not in w<=%d" % (k, k))
    return FiltrationDiagnostics(True, None, "", tuple(cells))


def is_v_acyclic(F):
    """Colimit stage acyclic; if so, every stage must be pure.

    A v-acyclic filtration forces weight_bounds(A_n) = [n, n] (or the
    zero marker) at every level; violation is a TheoryError.
    """
    if not is_acyclic(F.colimit):
        return False
    for k in range(F.lo - 1, F.hi + 1):
        wb = weight_bounds(F.stage(k))
        if not wb.zero and (wb.lo, wb.hi) != (k, k):
            raise TheoryError(
                "stage %d of a v-acyclic filtration has weight bounds [%d, %d]"
                % (k, wb.lo, wb.hi)
            )
    return True


# -- maps of filtrations --------------------------------------------------


@dataclass
class FiltrationMap:
    """Levelwise chain maps strictly commuting with the inclusions."""

    source: CellFiltration
    target: CellFiltration
    levels: dict  # level k -> ChainMap stage_k(source) -> stage_k(target)

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        for k in range(lo - 1, hi + 1):
            f = self.level(k)
            if f.source != self.source.stage(k) or f.target != self.target.stage(k):
                raise PreconditionError("level %d connects the wrong stages" % k)
            assert_chain_map(f)
        for k in range(lo, hi + 1):
            left = self.level(k).compose(self.source.inclusion(k))
            right = self.target.inclusion(k).compose(self.level(k - 1))
            if left != right:
                raise PreconditionError("square at level %d does not commute" % k)

    @property
    def lo(self):
        return min(self.source.lo, self.target.lo)

    @property
    def hi(self):
        return max(self.source.hi, self.target.hi)

    def level(self, k):
        k = max(self.lo - 1, min(k, self.hi))
        f = self.levels.get(k)
        if f is None:
            return zero_map(self.source.stage(k), self.target.stage(k))
        return f


def identity_filtration_map(F):
    return FiltrationMap(
        F, F, {k: identity_map(F.stage(k)) for k in range(F.lo - 1, F.hi + 1)}
    )


def filtration_map_from_levels(src, tgt, level_fn):
    lo = min(src.lo, tgt.lo)
    hi = max(src.hi, tgt.hi)
    return FiltrationMap(
        src, tgt, {k: level_fn(k) for k in range(lo - 1, hi + 1)}
    )


def is_ingression(fmap):
    """Latching maps have cofibers of weight within (level window].

    For every i < j the induced map A_j u_{A_i} B_i -> B_j must have a
    cofiber with weight bounds inside [i+1, j].
    """
    A, B = fmap.source, fmap.target
    for i in range(fmap.lo - 1, fmap.hi + 1):
        for j in range(i + 1, fmap.hi + 1):
            P_smd, latch = _latching_map(fmap, i, j)
            C, _, _ = cone(latch)
            wb = weight_bounds(C)
            if not wb.zero and not (i + 1 <= wb.lo and wb.hi <= j):
                return False
    return True


def _pushout(inc_a, leg_b):
    """Pushout of B <- A -> X along a degreewise split mono A -> X.

    Returns split data for A -> X + B, whose quotient is the pushout;
    the two structure maps are proj restricted to the summands.
    """
    X, B = inc_a.target, leg_b.target
    S, iX, iB = direct_sum(X, B)
    j = iX.compose(inc_a) - iB.compose(leg_b)
    smd = split_mono_complement(assert_chain_map(j))
    return smd, iX, iB


def _latching_map(fmap, i, j):
    A, B = fmap.source, fmap.target
    smd, iX, iB = _pushout(
        A.inclusion_range(i, j), fmap.level(i)
    )
    P = smd.quotient
    u_j = fmap.level(j)
    b_inc = B.inclusion_range(i, j)
    comps = {}
    for d in P.degrees():
        m = u_j.component(d).hstack(b_inc.component(d))
        comps[d] = m * smd.section_matrix(d)
    latch = assert_chain_map(ChainMap(P, B.stage(j), comps))
    return smd, latch


# -- mapping cylinders ----------------------------------------------------


def _profile_sum(ring, profiles):
    groups = {}
    for p in profiles:
        for d in p.degrees():
            pres = p.presentation(d)
            fr, tor = groups.get(d, (0, ()))
            groups[d] = (fr + pres.free_rank, tor + pres.torsion)
    return HomologyProfile.of(
        ring,
        {
            d: ModulePresentation(fr, invariant_factors(tor))
            for d, (fr, tor) in groups.items()
        },
    )


def mapping_cylinder_filtration(f):
    """Levelwise pushout (Mf)_k = (A_k + B_k)/A_{k-1}.

    Returns (Mf, ingression A -> Mf, v-equivalence B -> Mf).  Level
    quotients are verified against the wedge formula
    Q_k(Mf) ~ Q_k(A) + Q_k(B) + S Q_{k-1}(A), and the top level of
    B -> Mf is certified a homotopy equivalence.
    """
    A, B = f.source, f.target
    ring = A.ring
    lo = min(A.lo, B.lo)
    hi = max(A.hi, B.hi) + 1
    stage_data = {}
    for k in range(lo - 1, hi + 1):
        inc_a = A.inclusion(k)  # A_{k-1} -> A_k
        leg_b = B.inclusion_range(k - 1, k).compose(f.level(k - 1))
        smd, iX, iB = _pushout(inc_a, leg_b)
        stage_data[k] = (smd, iX, iB)
    stages, incs = [], []
    for k in range(lo - 1, hi + 1):
        smd, _, _ = stage_data[k]
        stages.append(smd.quotient)
        if k == lo - 1:
            continue
        smd0, _, _ = stage_data[k - 1]
        mid = direct_sum_map(A.inclusion(k), B.inclusion(k))
        comps = {
            i: smd.proj.component(i)
            * mid.component(i)
            * smd0.section_matrix(i)
            for i in smd0.quotient.degrees()
        }
        incs.append(assert_chain_map(ChainMap(smd0.quotient, smd.quotient, comps)))
    Mf = CellFiltration(lo, hi, tuple(stages), tuple(incs))

    def a_level(k):
        smd, iX, _ = stage_data[max(lo - 1, min(k, hi))]
        return smd.proj.compose(iX)

    def b_level(k):
        smd, _, iB = stage_data[max(lo - 1, min(k, hi))]
        return smd.proj.compose(iB)

    ingression = filtration_map_from_levels(_as_wide(A, lo, hi), Mf, a_level)
    v_map = filtration_map_from_levels(_as_wide(B, lo, hi), Mf, b_level)
    # wedge formula on level quotients, profile-exact
    for k in range(lo, hi + 1):
        want = _profile_sum(
            ring,
            [
                A.quotient_profile(k),
                B.quotient_profile(k),
                A.quotient_profile(k - 1).shifted(1),
            ],
        )
        got = Mf.quotient_profile(k)
        if got != want:
            raise TheoryError(
                "wedge formula fails at level %d: %s vs %s" % (k, got, want)
            )
    if not is_homotopy_equivalence(v_map.level(hi)):
        raise TheoryError("stabilized cylinder stage is not equivalent to B")
    return Mf, ingression, v_map


def _as_wide(F, lo, hi):
    """Reindex a filtration to a wider window using its constancy."""
    if F.lo == lo and F.hi == hi:
        return F
    stages = tuple(F.stage(k) for k in range(lo - 1, hi + 1))
    incs = tuple(F.inclusion(k) for k in range(lo, hi + 1))
    return CellFiltration(lo, hi, stages, incs)


# -- connectivity and factorization ---------------------------------------


def connectivity(f):
    """Largest n with the cofiber in w>=n+1; infinity for equivalences."""
    C, _, _ = cone(f)
    prof = homology(C)
    if prof.is_trivial:
        return math.inf
    return min(prof.degrees()) - 1


@dataclass(frozen=True)
class ConnectivityVerdict:
    first: object
    second: object
    composite: object
    ok: bool


def compose_connectivity_check(f, g):
    """connectivity(g . f) >= min of the parts; violation is fatal."""
    if f.target != g.source:
        raise PreconditionError("maps are not composable")
    cf, cg = connectivity(f), connectivity(g)
    cc = connectivity(g.compose(f))
    v = ConnectivityVerdict(cf, cg, cc, cc >= min(cf, cg))
    if not v.ok:
        raise TheoryError(
            "composite connectivity %s below min(%s, %s)" % (cc, cf, cg)
        )
    return v


@dataclass
class Factorization:
    """X = X_n -> X_{n+1} -> ... -> X_m -> Y with pure free quotients.

    maps[j] includes stages[j] into stages[j+1]; quotients[k] is the
    homology profile of stages at level k over the previous one;
    equivalence carries the last stage onto Y; witness shows that the
    composite of the whole chain with it is homotopic to f.
    """

    f: ChainMap
    degree: int
    stages: list
    maps: list
    quotients: dict
    equivalence: ChainMap
    witness: Homotopy


def factor_connected_map(f, n):
    """Factor an n-connected map through cell attachments in degrees > n."""
    c = connectivity(f)
    if c < n:
        raise PreconditionError(
            "map has connectivity %s, below the requested %d" % (c, n)
        )
    X, Y = f.source, f.target
    ring = X.ring
    if c == math.inf:
        return Factorization(
            f, n, [X], [], {}, f, Homotopy(f, f, {})
        )
    Cyl, cyl_inc, cyl_proj = cylinder(f)
    smd = split_mono_complement(cyl_inc)
    cls = homotopy_classify(smd.quotient, with_equivalence=True)
    Qc = cls.equivalence.small
    back = cls.equivalence.back  # Qc -> Q, a chain map
    if Qc.min_deg <= n:  # pragma: no cover
        raise TheoryError("cofiber model has cells at or below the cut")
    twist = {
        i: smd.twist_matrix(i) * back.component(i) for i in Qc.degrees()
    }

    mn = min(X.min_deg, Qc.min_deg) if not X.is_zero else Qc.min_deg
    mx = max(X.max_deg, Qc.max_deg) if not X.is_zero else Qc.max_deg
    top = Qc.max_deg

    def stage(k):
        """Twisted sum of X with the cells of Qc in degrees <= k."""
        qr = lambda i: Qc.rank(i) if i <= k else 0
        ranks = tuple(qr(i) + X.rank(i) for i in range(mn, mx + 1))
        diffs = []
        for i in range(mn + 1, mx + 1):
            dq = Qc.d(i).submatrix(range(qr(i - 1)), range(qr(i)))
            tw = twist.get(i)
            if tw is None or qr(i) == 0:
                tw = Matrix.zero(ring, X.rank(i - 1), qr(i))
            blkA = dq.hstack(Matrix.zero(ring, qr(i - 1), X.rank(i)))
            blkB = tw.hstack(X.d(i))
            diffs.append(blkA.vstack(blkB))
        return trim(ChainComplex(ring, mn, mx, ranks, diffs))

    stages = [X]
    maps = []
    quotients = {}
    prev, prev_k = X, n
    for k in range(n + 1, top + 1):
        if Qc.rank(k) == 0:
            continue  # nothing attached at this level
        cur = stage(k)
        comps = {}
        for i in prev.degrees():
            q_prev = Qc.rank(i) if i <= prev_k else 0
            q_cur = Qc.rank(i) if i <= k else 0
            qblock = Matrix.identity(ring, q_prev).vstack(
                Matrix.zero(ring, q_cur - q_prev, q_prev)
            )
            xi = Matrix.identity(ring, X.rank(i))
            comps[i] = _block_incl(ring, qblock, xi, q_cur)
        g = assert_chain_map(ChainMap(prev, cur, comps))
        q_smd = split_mono_complement(g)
        wb = weight_bounds(q_smd.quotient)
        if not wb.zero and (wb.lo, wb.hi) != (k, k):
            raise TheoryError(
                "attachment quotient at level %d has weight bounds [%d, %d]"
                % (k, wb.lo, wb.hi)
            )
        stages.append(cur)
        maps.append(g)
        quotients[k] = homology(q_smd.quotient)
        prev, prev_k = cur, k

    # last stage -> Cyl -> Y
    last = stages[-1]
    comps = {}
    for i in last.degrees():
        sb = smd.section_matrix(i) * back.component(i)
        comps[i] = sb.hstack(cyl_inc.component(i))
    alpha = assert_chain_map(ChainMap(last, Cyl, comps))
    equiv = cyl_proj.compose(alpha)
    if not is_homotopy_equivalence(equiv):  # pragma: no cover
        raise TheoryError("final comparison map is not an equivalence")
    chain = identity_map(X)
    for g in maps:
        chain = g.compose(chain)
    full = equiv.compose(chain)
    if full == f:
        witness = Homotopy(full, f, {})
    else:  # pragma: no cover
        witness = nullhomotopy(full - f)
        if witness is None:
            raise TheoryError("recomposition is not homotopic to the input")
        witness = Homotopy(full, f, witness.components)
    return Factorization(f, n, stages, maps, quotients, equiv, witness)


def _block_incl(ring, qblock, xblock, q_cur):
    top = qblock.hstack(Matrix.zero(ring, q_cur, xblock.cols))
    bot = Matrix.zero(ring, xblock.rows, qblock.cols).hstack(xblock)
    return top.vstack(bot)
