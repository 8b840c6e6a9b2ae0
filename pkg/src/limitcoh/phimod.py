"""phi-modules and (phi,N)-modules over K0 with residue field F_p.

Frobenius is linear here, so a phi-module is a vector space with an
invertible matrix ``Phi`` and a (phi,N)-module adds ``N`` with
``N Phi = p Phi N``.  Weights are read off from eigenvalues +-p^(m/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import NotInvertible, RelationViolated
from .exact import Field, Matrix, WeightSplit, intersect_columns, span_columns, weil_split


@dataclass(frozen=True)
class PhiModule:
    Phi: Matrix

    @property
    def field(self) -> Field:
        return self.Phi.field

    @property
    def dim(self) -> int:
        return self.Phi.nrows


@dataclass(frozen=True)
class PhiNModule:
    Phi: Matrix
    N: Matrix

    @property
    def field(self) -> Field:
        return self.Phi.field

    @property
    def p(self) -> int:
        return self.Phi.field.p

    @property
    def dim(self) -> int:
        return self.Phi.nrows

    @property
    def base(self) -> PhiModule:
        return PhiModule(self.Phi)

    def relation_holds(self) -> bool:
        return self.N @ self.Phi == (self.Phi @ self.N).scale(self.p)

    def __repr__(self):
        return f"PhiNModule(dim={self.dim}, Phi={self.Phi!r}, N={self.N!r})"


@dataclass(frozen=True)
class PhiNMorphism:
    source: PhiNModule
    target: PhiNModule
    M: Matrix

    def __post_init__(self):
        if not is_morphism(self.M, self.source, self.target):
            raise RelationViolated("matrix does not commute with Frobenius and N")


def is_morphism(M: Matrix, source, target) -> bool:
    if M.shape != (target.dim, source.dim):
        return False
    if M @ source.Phi != target.Phi @ M:
        return False
    sN = getattr(source, "N", None)
    tN = getattr(target, "N", None)
    if sN is None or tN is None:
        return True
    return M @ sN == tN @ M


def _as_phin(D) -> PhiNModule:
    if isinstance(D, PhiNModule):
        return D
    return PhiNModule(D.Phi, Matrix.zeros(D.field, D.dim, D.dim))


def mk_phin(dim: int, Phi, N=None, ctx: Field | None = None) -> PhiNModule:
    """Validated constructor.  ``Phi``/``N`` may be matrices or nested lists."""
    if ctx is None:
        if not isinstance(Phi, Matrix):
            raise ValueError("a Field context is required for list input")
        ctx = Phi.field
    Phi = Phi if isinstance(Phi, Matrix) else ctx.matrix(Phi)
    if Phi.shape != (dim, dim):
        raise ValueError(f"phi has shape {Phi.shape}, expected {(dim, dim)}")
    if N is None:
        N = ctx.zeros(dim, dim)
    N = N if isinstance(N, Matrix) else ctx.matrix(N)
    if N.shape != (dim, dim):
        raise ValueError(f"n has shape {N.shape}, expected {(dim, dim)}")
    if dim and not Phi.det():
        raise NotInvertible("Frobenius matrix is singular")
    D = PhiNModule(Phi, N)
    if not D.relation_holds():
        raise RelationViolated("N*Phi != p*Phi*N")
    if dim and not (N ** dim).is_zero():
        raise RelationViolated("N is not nilpotent")
    return D


def unit(ctx: Field) -> PhiNModule:
    return PhiNModule(ctx.identity(1), ctx.zeros(1, 1))


def tate(ctx: Field, n: int) -> PhiNModule:
    """K0(n): one dimension, Frobenius p^(-n)."""
    return PhiNModule(ctx.matrix([[Fraction(ctx.p) ** (-n)]]), ctx.zeros(1, 1))


def zero_module(ctx: Field) -> PhiNModule:
    return PhiNModule(ctx.zeros(0, 0), ctx.zeros(0, 0))


def tate_twist(D: PhiNModule, n: int) -> PhiNModule:
    if n == 0:
        return D
    c = Fraction(D.p) ** (-n)
    return PhiNModule(D.Phi.scale(c), D.N)


def direct_sum(*mods: PhiNModule, ctx: Field | None = None) -> PhiNModule:
    mods = [_as_phin(m) for m in mods]
    if not mods:
        return zero_module(ctx)
    F = mods[0].field
    return PhiNModule(Matrix.block_diag(F, [m.Phi for m in mods]), Matrix.block_diag(F, [m.N for m in mods]))


def tensor(D: PhiNModule, E: PhiNModule) -> PhiNModule:
    """Kronecker Frobenius, Leibniz monodromy N (x) 1 + 1 (x) N."""
    D, E = _as_phin(D), _as_phin(E)
    if D.field != E.field:
        raise ValueError("modules over different primes")
    F = D.field
    Id, Ie = F.identity(D.dim), F.identity(E.dim)
    return PhiNModule(D.Phi.kron(E.Phi), D.N.kron(Ie) + Id.kron(E.N))


def dual(D: PhiNModule) -> PhiNModule:
    D = _as_phin(D)
    return PhiNModule(D.Phi.T.inverse(), -D.N.T)


def evaluation_matrix(D: PhiNModule) -> Matrix:
    """The pairing D^v (x) D -> unit as a 1 x dim^2 matrix."""
    F = D.field
    n = D.dim
    return F.matrix([[1 if i == j else 0 for i in range(n) for j in range(n)]])


def power(M: Matrix, k: int) -> Matrix:
    return M ** k


# -- Hom and Ext ---------------------------------------------------------------

def _left(A: Matrix, cols: int) -> Matrix:
    """vec(A X) for X with ``cols`` columns, row-major vectorisation."""
    return A.kron(A.field.identity(cols))


def _right(B: Matrix, rows: int) -> Matrix:
    """vec(X B) for X with ``rows`` rows, row-major vectorisation."""
    return B.field.identity(rows).kron(B.T)


def _unvec(v, rows: int, cols: int, F: Field) -> Matrix:
    return F.matrix([[v[i * cols + j] for j in range(cols)] for i in range(rows)])


def hom_ext_phi(D, E):
    """(hom_dim, hom_basis, ext1_dim) for phi-modules.

    The two-term complex is xi -> Phi_E xi - xi Phi_D on dim(E) x dim(D)
    matrices; Hom is its kernel and Ext^1 its cokernel.
    """
    F = D.field
    m, n = E.dim, D.dim
    delta = _left(E.Phi, n) - _right(D.Phi, m)
    K = delta.kernel()
    basis = [_unvec(K.column(j), m, n, F) for j in range(K.ncols)]
    return K.ncols, basis, m * n - delta.rank()


def ext_complex_phin(D: PhiNModule, E: PhiNModule):
    """Total complex of the (phi,N) Hom bicomplex: (d0, d1) in degrees 0..2.

    Rows use the Frobenius normalisation xi -> Phi_E xi Phi_D^-1 - xi, which
    differs from Phi_E xi - xi Phi_D by the invertible factor Phi_D and so has
    the same kernel and cokernel dimensions; in this form the monodromy column
    xi -> N_E xi - xi N_D commutes with both rows on the nose.
    """
    D, E = _as_phin(D), _as_phin(E)
    F = D.field
    m, n = E.dim, D.dim
    PdI = D.Phi.inverse() if n else D.Phi
    I = F.identity(m * n)
    frob = _left(E.Phi, n) @ _right(PdI, m)
    h0 = frob - I
    h1 = frob.scale(F.p) - I
    v = _left(E.N, n) - _right(D.N, m)
    d0 = Matrix.vstack(F, [h0, v])
    d1 = Matrix.hstack(F, [v, -h1])
    return d0, d1


def hom_ext_phin(D: PhiNModule, E: PhiNModule):
    """(ext0_dim, ext1_dim, ext2_dim) in the category of (phi,N)-modules."""
    d0, d1 = ext_complex_phin(D, E)
    s = D.dim * E.dim
    r0, r1 = d0.rank(), d1.rank()
    return s - r0, 2 * s - r1 - r0, s - r1


# -- weights and monodromy -----------------------------------------------------

def weight_grading(D) -> tuple[WeightSplit, bool]:
    """Weight decomposition of Frobenius; checks N lowers weight by exactly 2."""
    split = weil_split(D.Phi)
    N = getattr(D, "N", None)
    if N is not None and not N.is_zero():
        F = D.field
        for m, (_, B) in split.pieces.items():
            target = split.basis(m - 2, F)
            img = N @ B
            if img.is_zero():
                continue
            if target.ncols == 0 or not target.in_span(img):
                raise RelationViolated(f"N does not map weight {m} into weight {m - 2}")
    return split, split.is_pure


def nilpotency_index(N: Matrix) -> int:
    """Smallest l >= 0 with N^(l+1) = 0 (so l = 0 for N = 0)."""
    if N.nrows == 0:
        return 0
    P = N
    l = 0
    while not P.is_zero():
        P = P @ N
        l += 1
        if l > N.nrows:
            raise RelationViolated("N is not nilpotent")
    return l


@dataclass(frozen=True)
class MonodromyFiltration:
    steps: dict
    dim: int
    N: Matrix = dc_field(repr=False)

    def step(self, i: int) -> Matrix:
        if i in self.steps:
            return self.steps[i]
        F = self.N.field
        if not self.steps or i < min(self.steps):
            return F.zeros(self.dim, 0)
        return F.identity(self.dim)

    def gr_dims(self) -> dict:
        out = {}
        for i in sorted(self.steps):
            d = self.step(i).ncols - self.step(i - 1).ncols
            if d:
                out[i] = d
        return out

    def check(self) -> bool:
        """Both defining properties, verified by exact rank computations."""
        N = self.N
        F = N.field
        for i in self.steps:
            img = N @ self.step(i)
            if not self.step(i - 2).in_span(img):
                return False
        gr = self.gr_dims()
        for k in range(0, max(self.steps, default=0) + 1):
            lo = self.step(-k - 1)
            Mk = self.step(k)
            image = (N ** k) @ Mk
            r = span_columns(F, [lo, image], self.dim).ncols - lo.ncols
            if r != gr.get(k, 0) or gr.get(k, 0) != gr.get(-k, 0):
                return False
        return True


def monodromy_filtration(D) -> MonodromyFiltration:
    """M_i = sum_{j >= max(0,-i)} N^j ker N^(i+2j+1)  (convolution recipe)."""
    N = D.N if isinstance(D, PhiNModule) else D
    F = N.field
    n = N.nrows
    l = nilpotency_index(N)
    kernels = {}

    def ker_pow(a):
        if a <= 0:
            return F.zeros(n, 0)
        if a > l:
            return F.identity(n)
        if a not in kernels:
            kernels[a] = (N ** a).kernel()
        return kernels[a]

    steps = {}
    for i in range(-l - 1, l + 1):
        parts = []
        for j in range(max(0, -i), l + 1):
            K = ker_pow(i + 2 * j + 1)
            if K.ncols:
                parts.append((N ** j) @ K)
        steps[i] = span_columns(F, parts, n)
    filt = MonodromyFiltration(steps, n, N)
    if not filt.check():
        raise RelationViolated("monodromy filtration axioms failed")
    return filt


@dataclass(frozen=True)
class WMReport:
    center: int
    passed: bool
    symmetric: bool
    ranks: dict  # k -> (rank of N^k on gr_{center+k}, dim source, dim target)
    weights: dict

    def lines(self):
        yield f"center {self.center}: {'pass' if self.passed else 'FAIL'}"
        for k, (r, s, t) in sorted(self.ranks.items()):
            yield f"  N^{k}: gr_{self.center + k} ({s}) -> gr_{self.center - k} ({t}) rank {r}"


def wm_check(D: PhiNModule, center: int) -> WMReport:
    """Weight-monodromy test: N^k : gr_{c+k} -> gr_{c-k} iso for every k >= 1."""
    split, _ = weight_grading(D)
    dims = split.dims()
    F = D.field
    symmetric = all(dims.get(center + k, 0) == dims.get(center - k, 0) for k in
                    {abs(w - center) for w in dims})
    ranks = {}
    ok = symmetric
    kmax = max((abs(w - center) for w in dims), default=0)
    for k in range(1, kmax + 1):
        src = split.basis(center + k, F)
        tgt_dim = dims.get(center - k, 0)
        r = ((D.N ** k) @ src).rank() if src.ncols else 0
        ranks[k] = (r, src.ncols, tgt_dim)
        if not (r == src.ncols == tgt_dim):
            ok = False
    return WMReport(center, ok, symmetric, ranks, dims)
