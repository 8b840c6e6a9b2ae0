"""Random (phi,N)-modules and pure-column monodromy complexes.

Modules start diagonal with eigenvalues +-p^(w/2) and an N that only joins
basis vectors of weight w to weight w - 2 with the same sign, which is
exactly when N Phi = p Phi N holds; then everything is conjugated by a
random invertible matrix.
"""

from __future__ import annotations

import random

from limitcoh.complexes import Complex
from limitcoh.exact import Field, Matrix
from limitcoh.phimod import PhiNModule


def random_invertible(F: Field, n: int, rng: random.Random) -> Matrix:
    # product of a unit lower and a unit upper triangular matrix
    L = [[1 if i == j else (rng.randint(-2, 2) if i > j else 0) for j in range(n)] for i in range(n)]
    U = [[1 if i == j else (rng.randint(-2, 2) if i < j else 0) for j in range(n)] for i in range(n)]
    return F.matrix(L) @ F.matrix(U) if n else F.zeros(0, 0)


def random_module(F: Field, rng: random.Random, dim: int | None = None, weights=None,
                  with_n: bool = True) -> tuple:
    """(module, weight list of the hidden diagonal basis)."""
    if weights is not None:
        ws = list(weights)
        dim = len(ws)
    else:
        dim = rng.randint(1, 5) if dim is None else dim
        ws = [rng.randint(-4, 4) for _ in range(dim)]
    signs = [rng.choice((1, -1)) for _ in ws]
    Phi0 = F.diag([F.half_power(w) * s for w, s in zip(ws, signs)])
    N0 = [[0] * dim for _ in range(dim)]
    if with_n:
        for i in range(dim):
            for j in range(dim):
                if ws[j] == ws[i] - 2 and signs[j] == signs[i] and rng.random() < 0.7:
                    N0[j][i] = rng.randint(-2, 2)
    S = random_invertible(F, dim, rng)
    Si = S.inverse()
    return PhiNModule(S @ Phi0 @ Si, S @ F.matrix(N0) @ Si), sorted(ws)


def random_pure_complex(F: Field, rng: random.Random, kummer: bool = True) -> Complex:
    """A complex whose column p of degree n is pure of weight n - p.

    For each weight w there is a random complex V_w^0 -> V_w^1 -> ... placed
    in columns 0, 1, ... (degree = column + w) with d^2 = 0, Frobenius
    lam_w * U on every piece (U a shared random unipotent, lam_w = +-p^(w/2)).
    With ``kummer`` the result is tensored with the Kummer object: a copy
    with weight w + 2 in column p - 2 and N the identity back onto the
    original.  Finally each column block of each term is conjugated by a
    random invertible matrix.
    """
    length = rng.randint(1, 3)
    weights = sorted(rng.sample(range(-2, 4), rng.randint(1, 3)))
    k = rng.randint(1, 2)  # multiplicity block carrying U
    U = F.identity(k) if rng.random() < 0.3 else _unipotent(F, k, rng)
    sign = rng.choice((1, -1))
    pieces = {}  # (w, p) -> dim of the multiplicity space A
    diffs = {}  # (w, p) -> matrix A_p -> A_(p+1)
    for w in weights:
        dims = [rng.randint(0, 2) for _ in range(length + 1)]
        mats = {}
        for p in range(length - 1, -1, -1):
            rows, cols = dims[p + 1], dims[p]
            nxt = mats.get(p + 1)
            if nxt is not None and nxt.nrows:
                K = nxt.kernel()
            else:
                K = F.identity(rows)
            R = F.matrix([[rng.randint(-2, 2) for _ in range(cols)] for _ in range(K.ncols)]) \
                if K.ncols and cols else F.zeros(K.ncols, cols)
            mats[p] = K @ R if K.ncols else F.zeros(rows, cols)
        for p in range(length + 1):
            pieces[(w, p)] = dims[p]
        for p, M in mats.items():
            diffs[(w, p)] = M

    blocks = []  # (w, p, twisted)
    for (w, p), n in pieces.items():
        if n:
            blocks.append((w, p, False))
            if kummer:
                blocks.append((w, p, True))

    def where(b):
        w, p, tw = b
        col = p - 2 if tw else p
        weight = w + 2 if tw else w
        return w + p, col, weight  # degree, column, weight

    terms_blocks: dict = {}
    for b in blocks:
        terms_blocks.setdefault(where(b)[0], []).append(b)
    for v in terms_blocks.values():
        v.sort(key=lambda b: (where(b)[1], b))

    def size(b):
        return pieces[(b[0], b[1])] * k

    def phi(b):
        lam = F.half_power(where(b)[2]) * sign
        return F.identity(pieces[(b[0], b[1])]).kron(U).scale(lam)

    F0 = F
    terms, d, cols = {}, {}, {}
    offsets = {}
    for n, bs in terms_blocks.items():
        off = 0
        for b in bs:
            offsets[b] = (n, off)
            off += size(b)
        Phi = Matrix.block_diag(F0, [phi(b) for b in bs])
        terms[n] = (Phi, off, bs)
        cols[n] = sum(((where(b)[1],) * size(b) for b in bs), ())
    # N: twisted copy -> original, same degree
    Nmats = {}
    for n, (Phi, off, bs) in terms.items():
        rows = [[0] * off for _ in range(off)]
        for b in bs:
            if b[2]:
                _, s0 = offsets[b]
                _, t0 = offsets[(b[0], b[1], False)]
                for x in range(size(b)):
                    rows[t0 + x][s0 + x] = 1
        Nmats[n] = F0.matrix(rows)
    for n, (Phi, off, bs) in terms.items():
        if n + 1 not in terms:
            continue
        _, off1, bs1 = terms[n + 1]
        rows = [[F0.zero] * off for _ in range(off1)]
        for b in bs:
            w, p, tw = b
            nb = (w, p + 1, tw)
            if nb not in offsets or (w, p) not in diffs:
                continue
            M = diffs[(w, p)].kron(F0.identity(k))
            _, s0 = offsets[b]
            _, t0 = offsets[nb]
            for i in range(M.nrows):
                for j in range(M.ncols):
                    rows[t0 + i][s0 + j] = M[i, j]
        d[n] = F0.matrix(rows) if off1 else F0.zeros(0, off)

    # conjugate within each column block of each term
    mods = {}
    for n, (Phi, off, bs) in terms.items():
        labels = cols[n]
        S = _block_conjugator(F0, labels, rng)
        mods[n] = (S, S.inverse())
    out_terms, out_d = {}, {}
    for n, (Phi, off, bs) in terms.items():
        S, Si = mods[n]
        out_terms[n] = PhiNModule(S @ Phi @ Si, S @ Nmats[n] @ Si)
    for n, M in d.items():
        S1, _ = mods[n + 1]
        _, Si = mods[n]
        out_d[n] = S1 @ M @ Si
    return Complex(F0, out_terms, out_d, cols).validate()


def _unipotent(F: Field, k: int, rng: random.Random) -> Matrix:
    return F.matrix([[1 if i == j else (rng.randint(-1, 1) if j > i else 0) for j in range(k)] for i in range(k)])


def _block_conjugator(F: Field, labels: tuple, rng: random.Random) -> Matrix:
    n = len(labels)
    groups: dict = {}
    for i, l in enumerate(labels):
        groups.setdefault(l, []).append(i)
    rows = [[0] * n for _ in range(n)]
    for idx in groups.values():
        S = random_invertible(F, len(idx), rng)
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                rows[i][j] = S[a, b]
    return F.matrix(rows) if n else F.zeros(0, 0)
