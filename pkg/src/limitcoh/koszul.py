"""Finite truncations of the nilpotent-operator constructions.

The cofree object on X is sum_{k>=0} X(-k) with N shifting slot k to slot
k-1; truncating at ``n_max`` keeps slots 0..n_max.  The projection-formula
isomorphism, the multiplication on the Bar algebra H = sum t^k and its
derivation property are then identities between explicit matrices, checked
here exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

from .complexes import Complex, one_term
from .errors import NotInvertible
from .exact import Field, Matrix
from .phimod import PhiNModule, tensor, unit

DEFAULT_NMAX = 4


def kummer_object(ctx: Field) -> Complex:
    """unit + K0(-1) in degree 0, N sending the twisted line onto the unit line."""
    K = PhiNModule(ctx.diag([1, ctx.p]), ctx.matrix([[0, 1], [0, 0]]))
    return one_term(K)


def shift_operator(ctx: Field, n_max: int) -> Matrix:
    """e_k -> e_(k-1) on slots 0..n_max (e_0 -> 0)."""
    n = n_max + 1
    return ctx.matrix([[1 if j == i + 1 else 0 for j in range(n)] for i in range(n)])


def cofree_truncation(X: PhiNModule, n_max: int) -> Complex:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    F = X.field
    slots = F.diag([F.p ** k for k in range(n_max + 1)])
    M = PhiNModule(slots.kron(X.Phi), shift_operator(F, n_max).kron(F.identity(X.dim)))
    return one_term(M)


def lax_tensor(X: PhiNModule, Y: PhiNModule) -> PhiNModule:
    """(X, f) x (Y, g) = (X (x) Y, f (x) 1 + 1 (x) g)."""
    F = X.field
    N = X.N.kron(F.identity(Y.dim)) + F.identity(X.dim).kron(Y.N)
    return PhiNModule(X.Phi.kron(Y.Phi), N)


@dataclass(frozen=True)
class ProjectionFormula:
    matrix: Matrix
    domain: PhiNModule  # cofree(Y) boxtimes (X, f)
    target: PhiNModule  # cofree(Y (x) X)
    n_max: int
    block: int

    def truncated_equivariance(self) -> bool:
        """B N_dom = N_tgt B on all slots below the top one (the top slot of
        the target would need slot n_max + 1 to close up)."""
        keep = range(self.n_max * self.block)
        lhs = (self.matrix @ self.domain.N).select_rows(keep)
        rhs = (self.target.N @ self.matrix).select_rows(keep)
        return lhs == rhs and self.matrix @ self.domain.Phi == self.target.Phi @ self.matrix


def projection_formula_matrix(Y: PhiNModule, X: PhiNModule, n_max: int = DEFAULT_NMAX) -> ProjectionFormula:
    """Block matrix B_{m,n} = binom(m, m-n) (1_Y (x) f^(m-n)) for n <= m <= n_max.

    ``X.N`` plays the role of the nilpotent monodromy f of (X, f).
    """
    F = X.field
    f = F.identity(Y.dim).kron(X.N)
    b = Y.dim * X.dim
    grid = []
    for m in range(n_max + 1):
        row = []
        for n in range(n_max + 1):
            if n > m:
                row.append(F.zeros(b, b))
            else:
                row.append((f ** (m - n)).scale(comb(m, m - n)))
        grid.append(row)
    B = Matrix.block(F, grid)
    if not B.det():
        raise NotInvertible("projection formula matrix is singular")
    cof_Y = cofree_truncation(Y, n_max).terms[0]
    domain = lax_tensor(cof_Y, X)
    target = cofree_truncation(tensor(Y, PhiNModule(X.Phi, F.zeros(X.dim, X.dim))), n_max).terms[0]
    return ProjectionFormula(B, domain, target, n_max, b)


def bar_mult_table(n_max: int = DEFAULT_NMAX, ctx: Field | None = None) -> dict:
    """Multiplication coefficients c_{a,b} (e_a e_b = c_{a,b} e_(a+b)) of the
    truncated Bar algebra, read off from the projection formula with Y = unit
    and X = the truncated cofree object, followed by the counit (projection to
    slot 0 of X)."""
    ctx = ctx or Field(2)
    U = unit(ctx)
    H = cofree_truncation(U, n_max).terms[0]
    pf = projection_formula_matrix(U, H, n_max)
    B = pf.matrix
    h = n_max + 1
    table = {}
    for a in range(n_max + 1):
        for b in range(n_max + 1 - a):
            col = a * h + b
            # output slot m, X-coordinate 0 (counit)
            table[(a, b)] = B[(a + b) * h + 0, col]
    for (a, b), c in table.items():
        if table[(b, a)] != c:
            raise AssertionError(f"bar multiplication not commutative at {(a, b)}")
    for n in range(n_max + 1):
        if mu_power(table, n) != factorial(n):
            raise AssertionError(f"mu_{n} on t^{n} is not {n}!")
    return table


def mu_power(table: dict, n: int):
    """Scalar of the iterated product t (x) ... (x) t -> t^n (n factors),
    built as mu(t, mu(t, ...))."""
    acc = 1
    for k in range(1, n):
        acc = acc * table[(1, k)]
    return acc


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""


def derivation_check(n_max: int = DEFAULT_NMAX, ctx: Field | None = None) -> Verdict:
    """nu(mu(x, y)) == mu(nu x, y) + mu(x, nu y) on all components of total
    degree <= n_max, as one matrix identity."""
    ctx = ctx or Field(2)
    table = bar_mult_table(n_max, ctx)
    pairs = sorted(table)
    h = n_max + 1
    mu = [[0] * len(pairs) for _ in range(h)]
    for j, (a, b) in enumerate(pairs):
        mu[a + b][j] = table[(a, b)]
    mu = ctx.matrix(mu)
    index = {ab: j for j, ab in enumerate(pairs)}
    leib = [[0] * len(pairs) for _ in pairs]
    for j, (a, b) in enumerate(pairs):
        if a:
            leib[index[(a - 1, b)]][j] += 1
        if b:
            leib[index[(a, b - 1)]][j] += 1
    leib = ctx.matrix(leib)
    nu = shift_operator(ctx, n_max)
    lhs = nu @ mu
    rhs = mu @ leib
    bad = [pairs[j] for j in range(len(pairs)) if lhs.column(j) != rhs.column(j)]
    return Verdict("derivation", not bad, f"mismatch at {bad}" if bad else f"n_max={n_max}")


def koszul_suite(n_max: int = DEFAULT_NMAX, ctx: Field | None = None) -> list:
    """All finite-truncation identities; one Verdict each."""
    ctx = ctx or Field(3)
    out = []
    U = unit(ctx)
    K = kummer_object(ctx).terms[0]

    # projection formula: binomial blocks, unitriangular, equivariant below the top slot
    ok = True
    detail = []
    for X in (K, lax_tensor(K, K), PhiNModule(ctx.identity(1), ctx.zeros(1, 1))):
        pf = projection_formula_matrix(U, X, n_max)
        b = pf.block
        for m in range(n_max + 1):
            for n in range(n_max + 1):
                blk = pf.matrix.submatrix(range(m * b, m * b + b), range(n * b, n * b + b))
                want = (X.N ** (m - n)).scale(comb(m, m - n)) if n <= m else ctx.zeros(b, b)
                if blk != want:
                    ok = False
                    detail.append(f"block {(m, n)}")
        if pf.matrix.det() != 1:
            ok = False
            detail.append("det != 1")
        if not pf.truncated_equivariance():
            ok = False
            detail.append("not equivariant")
    out.append(Verdict("projection_formula", ok, "; ".join(detail) or f"n_max={n_max}"))

    table = bar_mult_table(n_max, ctx)
    bad = [ab for ab, c in table.items() if c != comb(ab[0] + ab[1], ab[0])]
    facts = all(mu_power(table, n) == factorial(n) for n in range(n_max + 1))
    out.append(Verdict("bar_multiplication", not bad and facts,
                       f"c_(a,b)=binom(a+b,a), mu_n=n! for n<={n_max}" if not bad else f"bad {bad}"))

    out.append(derivation_check(n_max, ctx))

    ok = True
    for X, Y in ((K, K), (K, U), (lax_tensor(K, K), K)):
        L = lax_tensor(X, Y)
        T = tensor(X, Y)
        if L != T or not L.relation_holds():
            ok = False
    KK = lax_tensor(K, K)
    ok = ok and KK.N.rank() == 2 and (KK.N ** 3).is_zero()
    out.append(Verdict("lax_tensor", ok, "f(x)1 + 1(x)g agrees with the (phi,N) tensor"))

    cof = cofree_truncation(U, n_max).terms[0]
    ok = cof.relation_holds() and (cof.N ** (n_max + 1)).is_zero() and cof.N.rank() == n_max
    out.append(Verdict("cofree_truncation", ok, f"rank nu = {cof.N.rank()}"))
    return out
