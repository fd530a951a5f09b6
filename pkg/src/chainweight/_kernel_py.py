"""Pure-Python Smith normal form kernel.

This is the reference implementation of the hot loop.  A Cython twin
(_kernel_cy) implements the same contract; chainweight.kernel picks
whichever is importable.  Everything here works on flat row-major lists
of Python ints so the two backends stay drop-in interchangeable.

Contract of snf_raw(m, n, ent, p):
  returns (U, D, V) as flat row-major lists with U (m x m), D (m x n),
  V (n x n), U*M*V == D, U and V invertible over the ring, D diagonal.
  Over Z (p == 0) the diagonal is non-negative with d1 | d2 | ...;
  over F_p every diagonal entry is 0 or 1.
"""


def _swap_rows(rows, i, j):
    rows[i], rows[j] = rows[j], rows[i]


def _swap_cols(rows, i, j):
    for r in rows:
        r[i], r[j] = r[j], r[i]


def _snf_int(m, n, A, U, V):
    t = 0
    top = min(m, n)
    while t < top:
        # smallest-absolute-value nonzero pivot, ties by lowest (row, col)
        bi = bj = -1
        best = 0
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                a = Ai[j]
                if a:
                    if a < 0:
                        a = -a
                    if bi < 0 or a < best:
                        bi, bj, best = i, j, a
        if bi < 0:
            break
        if bi != t:
            _swap_rows(A, t, bi)
            _swap_rows(U, t, bi)
        if bj != t:
            _swap_cols(A, t, bj)
            _swap_cols(V, t, bj)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    if q:
                        Ai, At, Ui, Ut = A[i], A[t], U[i], U[t]
                        for j in range(t, n):
                            Ai[j] -= q * At[j]
                        for j in range(m):
                            Ui[j] -= q * Ut[j]
                    if A[i][t]:
                        # remainder beats the pivot; promote it
                        _swap_rows(A, t, i)
                        _swap_rows(U, t, i)
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    if q:
                        for i in range(t, m):
                            A[i][j] -= q * A[i][t]
                        for i in range(n):
                            V[i][j] -= q * V[i][t]
                    if A[t][j]:
                        _swap_cols(A, t, j)
                        _swap_cols(V, t, j)
                        dirty = True
            if not dirty and all(A[i][t] == 0 for i in range(t + 1, m)):
                break
        # enforce the divisibility chain before moving on
        piv = A[t][t]
        fixed = True
        for i in range(t + 1, m):
            Ai = A[i]
            for j in range(t + 1, n):
                if Ai[j] % piv:
                    At, Ut, Ui = A[t], U[t], U[i]
                    for jj in range(t, n):
                        At[jj] += Ai[jj]
                    for jj in range(m):
                        Ut[jj] += Ui[jj]
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            t += 1
    for i in range(top):
        if A[i][i] < 0:
            for j in range(n):
                A[i][j] = -A[i][j]
            for j in range(m):
                U[i][j] = -U[i][j]


def _snf_mod(m, n, A, U, V, p):
    for rows in (A, U, V):
        for r in rows:
            for j in range(len(r)):
                r[j] %= p
    t = 0
    top = min(m, n)
    while t < top:
        bi = bj = -1
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                if Ai[j]:
                    bi, bj = i, j
                    break
            if bi >= 0:
                break
        if bi < 0:
            break
        if bi != t:
            _swap_rows(A, t, bi)
            _swap_rows(U, t, bi)
        if bj != t:
            _swap_cols(A, t, bj)
            _swap_cols(V, t, bj)
        inv = pow(A[t][t], p - 2, p)
        for j in range(t, n):
            A[t][j] = A[t][j] * inv % p
        for j in range(m):
            U[t][j] = U[t][j] * inv % p
        for i in range(t + 1, m):
            c = A[i][t]
            if c:
                Ai, At, Ui, Ut = A[i], A[t], U[i], U[t]
                for j in range(t, n):
                    Ai[j] = (Ai[j] - c * At[j]) % p
                for j in range(m):
                    Ui[j] = (Ui[j] - c * Ut[j]) % p
        for j in range(t + 1, n):
            c = A[t][j]
            if c:
                for i in range(t, m):
                    A[i][j] = (A[i][j] - c * A[i][t]) % p
                for i in range(n):
                    V[i][j] = (V[i][j] - c * V[i][t]) % p
        t += 1


def snf_raw(m, n, ent, p):
    A = [list(ent[i * n:(i + 1) * n]) for i in range(m)]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    if p:
        _snf_mod(m, n, A, U, V, p)
    else:
        _snf_int(m, n, A, U, V)
    flat = lambda rows: [x for r in rows for x in r]
    return flat(U), flat(A), flat(V)
