"""Seeded random complexes, maps, and changes of basis.

Generation never rejection-samples d*d = 0: complexes are direct sums
of known building blocks (spheres, elementary acyclic pieces, torsion
pieces) conjugated by random degreewise unimodular matrices, so every
instance is valid by construction and its homology is known before any
computation runs.  That bookkeeping is the oracle all the fuzz suites
check against.
"""

import random
from dataclasses import dataclass, field

from .complexes import (
    ChainComplex,
    ChainMap,
    HomComplex,
    HomologyProfile,
    direct_sum,
    free_sphere,
    trim,
    two_term,
    zero_complex,
)
from .errors import PreconditionError
from .linalg import (
    GF,
    ZZ,
    Matrix,
    ModulePresentation,
    invariant_factors,
    invert,
    kernel_basis,
)


@dataclass(frozen=True)
class GenParams:
    """Knobs for the complex generator; fully determined by the seed."""

    seed: int
    ring: object = ZZ
    deg_lo: int = -2
    deg_hi: int = 2
    max_rank: int = 3
    max_entry: int = 3
    max_blocks: int = 4
    # mix weights for (sphere, elementary acyclic, torsion) blocks
    weights: tuple = (2, 2, 1)

    def __post_init__(self):
        if self.deg_hi < self.deg_lo:
            raise PreconditionError("empty degree window")
        if self.max_rank < 1 or self.max_entry < 1 or self.max_blocks < 0:
            raise PreconditionError("bounds must be positive")


def rng_for(params, trial=0):
    return random.Random((params.seed, trial))


def random_unimodular(ring, n, rng, max_entry=3, ops=None):
    """A product of seeded elementary matrices, with its exact inverse."""
    if n == 0:
        U = Matrix.identity(ring, 0)
        return U, U
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    if ops is None:
        ops = n + rng.randrange(0, n + 2)
    for _ in range(ops):
        kind = rng.randrange(4) if n > 1 else 1
        i = rng.randrange(n)
        j = rng.randrange(n)
        if kind == 0:
            while j == i:
                j = rng.randrange(n)
            rows[i], rows[j] = rows[j], rows[i]
        elif kind == 1:
            rows[i] = [ring.reduce(-x) for x in rows[i]]
        else:
            while j == i:
                j = rng.randrange(n)
            c = rng.choice([k for k in range(-max_entry, max_entry + 1) if k])
            rows[i] = [ring.reduce(a + c * b) for a, b in zip(rows[i], rows[j])]
    U = Matrix.from_rows(ring, rows)
    return U, invert(U)


def conjugate_complex(X, rng, max_entry=3):
    """Random degreewise change of basis; returns (X', iso X -> X')."""
    ring = X.ring
    U = {}
    U_inv = {}
    for i in X.degrees():
        U[i], U_inv[i] = random_unimodular(ring, X.rank(i), rng, max_entry)
    diffs = []
    for i in range(X.min_deg + 1, X.max_deg + 1):
        diffs.append(U[i - 1] * X.d(i) * U_inv[i])
    Xp = ChainComplex(ring, X.min_deg, X.max_deg, X.ranks, tuple(diffs))
    iso = ChainMap(X, Xp, U)
    return Xp, iso


def _random_block(params, rng):
    """One building block plus its homology contribution."""
    ring = params.ring
    deg = rng.randrange(params.deg_lo, params.deg_hi + 1)
    rk = rng.randrange(1, params.max_rank + 1)
    w_sphere, w_acyclic, w_torsion = params.weights
    if ring.is_field:
        w_acyclic += w_torsion
        w_torsion = 0
    total = w_sphere + w_acyclic + w_torsion
    if total == 0:
        raise PreconditionError("all block weights are zero")
    roll = rng.randrange(total)
    if roll < w_sphere:
        return free_sphere(ring, deg, rk), {deg: ModulePresentation(rk)}
    top = min(deg + 1, params.deg_hi)
    if top == params.deg_lo:
        top = params.deg_lo + 1
    if roll < w_sphere + w_acyclic:
        sign = rng.choice([1, -1]) if not ring.is_field else 1
        M = Matrix.diagonal(ring, rk, rk, [ring.reduce(sign)] * rk)
        return two_term(ring, top, M), {}
    d = rng.randrange(2, 7)
    M = Matrix.diagonal(ring, rk, rk, [d] * rk)
    return two_term(ring, top, M), {top - 1: ModulePresentation(0, (d,) * rk)}


def gen_complex(params, trial=0):
    """(complex, expected homology); the expectation is exact by construction."""
    rng = rng_for(params, trial)
    ring = params.ring
    blocks = rng.randrange(0, params.max_blocks + 1)
    X = zero_complex(ring)
    expected = {}
    for _ in range(blocks):
        B, contrib = _random_block(params, rng)
        X = direct_sum(X, B)[0]
        for i, p in contrib.items():
            prev = expected.get(i, ModulePresentation(0))
            expected[i] = ModulePresentation(
                prev.free_rank + p.free_rank,
                invariant_factors(prev.torsion + p.torsion),
            )
    X = trim(X)
    X, _ = conjugate_complex(X, rng, params.max_entry)
    profile = HomologyProfile.of(ring, expected)
    return X, profile


def gen_chain_map(seed, X, Y, max_entry=2):
    """A seeded genuine chain map: a random cycle of Hom(X, Y) in degree 0."""
    rng = random.Random(seed)
    hc = HomComplex(X, Y)
    D0 = hc.complex.d(0)
    K = kernel_basis(D0)
    n = hc.rank(0)
    vals = [0] * n
    for j in range(K.cols):
        c = rng.randrange(-max_entry, max_entry + 1)
        if c:
            for i in range(n):
                vals[i] = X.ring.reduce(vals[i] + c * K[i, j])
    return hc.map_from_vector(Matrix.column(X.ring, vals))
