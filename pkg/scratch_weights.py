import time

from chainweight.complexes import (
    ChainMap, cone, free_sphere, homology, is_acyclic, homotopic, identity_map,
)
from chainweight.generators import GenParams, gen_complex, random_unimodular, rng_for
from chainweight.linalg import GF, ZZ, Matrix
from chainweight.weights import (
    check_left_adjacent, check_negative, check_orthogonality,
    compare_decompositions, heart_split, in_heart, in_t_geq, in_w_geq,
    in_w_leq, strictify_heart, t_cotruncate, weight_bounds, weight_decompose,
)

t0 = time.time()
for ring in (ZZ, GF(3)):
    for seed in range(30):
        X, prof = gen_complex(GenParams(seed=seed, ring=ring))
        rng = rng_for(GenParams(seed=seed + 999))
        wb = weight_bounds(X)
        if wb.zero:
            assert is_acyclic(X)
        else:
            assert in_w_geq(X, wb.lo) and in_w_leq(X, wb.hi)
            assert not in_w_geq(X, wb.lo + 1)
            assert not in_w_leq(X, wb.hi - 1)
        n = rng.randrange(-3, 3)
        dec = weight_decompose(X, n)
        assert dec.verify()
        v = check_orthogonality(dec.low, dec.high, n)
        assert v.ok, (ring, seed, n, v.group)
        m = n + rng.randrange(0, 3)
        dec2 = weight_decompose(X, m)
        cmpres = compare_decompositions(dec, dec2)
        # recheck witnesses explicitly
        assert homotopic(dec2.i_map.compose(cmpres.low_map), dec.i_map)
        assert homotopic(cmpres.high_map.compose(dec.p_map), dec2.p_map)
        assert check_left_adjacent(X, n)
        # good truncation
        Z, inc = t_cotruncate(X, n)
        hz, hx = homology(Z), homology(X)
        for i in range(-6, 7):
            if i >= n:
                assert hz.presentation(i) == hx.presentation(i), (seed, i)
            else:
                assert hz.presentation(i).is_trivial
        assert in_t_geq(Z, n)
print("decompose/orthogonality/compare/truncate fuzz ok %.2f s" % (time.time() - t0))

t0 = time.time()
for ring in (ZZ, GF(5)):
    for seed in range(20):
        rng = rng_for(GenParams(seed=seed + 5000))
        a = rng.randrange(0, 3)
        b = a + rng.randrange(0, 3)
        X = free_sphere(ring, 0, a)
        Y = free_sphere(ring, 0, b)
        U, _ = random_unimodular(ring, b, rng)
        ent = [[U[i, j] for j in range(a)] for i in range(b)]
        f = ChainMap(X, Y, {0: Matrix.from_rows(ring, ent)} if b else {})
        C, _, _ = cone(f)
        assert in_heart(X) and in_heart(Y) and in_heart(C)
        g, h = heart_split(f)
        assert homotopic(g.compose(f), identity_map(X))
        F, eq = strictify_heart(Y)
        assert F.total_rank() == b
print("heart split / strictify fuzz ok %.2f s" % (time.time() - t0))

t0 = time.time()
for ring in (ZZ, GF(3)):
    objs = []
    for seed in range(6):
        X, _ = gen_complex(GenParams(seed=seed + 7000, ring=ring, weights=(2, 2, 0),
                                     deg_lo=0, deg_hi=1))
        # spheres at varying degrees + acyclics: all w>=0, mixed
        objs.append(X)
    objs.append(free_sphere(ring, 0, 2))
    v = check_negative([o for o in objs if weight_bounds(o).zero or weight_bounds(o).lo == weight_bounds(o).hi == 0])
    assert v.negative, v.failures
print("negativity fuzz ok %.2f s" % (time.time() - t0))
print("all weights smoke ok")
