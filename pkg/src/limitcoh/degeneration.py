"""Strict semistable special fibers and their limit cohomology.

A fiber is given combinatorially: components D_0..D_{c-1}, the cohomology of
every nonempty stratum D_J (as pure phi-modules, one Frobenius matrix per
degree) and the restriction maps H^a(D_J) -> H^a(D_{J+i}).  Gysin maps are
derived from the restrictions through the Poincare pairings.

Everything downstream is built from one cell grid.  For j, k >= 0 with
m = j + k + 1 at most the maximal stratum depth, cell (j, k) holds

    H^a(D^(m))(-j),   D^(m) = disjoint union of the D_J with |J| = m,

in total degree a + j + k, with column label k - j and weight a + 2j.  The
differential is rho + gamma: rho restricts (k -> k + 1), gamma is the Gysin
map (j -> j - 1, a -> a + 2).  Both carry the sign (-1)^(position of the
moved index inside the larger stratum), so they anticommute exactly when the
triple-point relation holds.  Monodromy is the identity from cell (j, k) to
cell (j - 1, k + 1).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

from . import records
from .complexes import (
    Complex, DoubleComplex, HomologyPiece, SSResult, dual_complex, homology_data,
    monodromy_fiber, monodromy_on_graded, total_complex, twist_shift, weight_ss, cone,
)
from .errors import (
    CompositionMismatch, FrobeniusMismatch, ImpureStratum, MismatchError, MissingDegree,
    NotAComplex, ParseError, SignViolation, UnknownExample, ValidationError,
)
from .exact import Field, Matrix, weil_split
from .phimod import PhiNModule, WMReport, tate_twist, wm_check, zero_module

SIGN_CONVENTION = "cech-pos/v1"


# -- the fiber ---------------------------------------------------------------------

@dataclass(frozen=True)
class SemistableFiber:
    field: Field
    d: int
    components: tuple
    strata: dict  # J (sorted index tuple) -> {a: Frobenius matrix on H^a(D_J)}
    restrictions: dict  # (J, i, a) -> matrix H^a(D_J) -> H^a(D_{J+i})
    pairings: dict  # (J, a) -> Gram matrix of H^a x H^(2e-a) -> K0(-e)
    gysin: dict = dc_field(default_factory=dict)  # (J, i, a) -> H^a(D_{J+i})(-1) -> H^(a+2)(D_J)
    name: str = ""

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def depth(self) -> int:
        return max((len(J) for J in self.strata), default=0)

    @property
    def conjectural(self) -> bool:
        """More than two components: the bicomplex is used as a definition."""
        return len(self.components) > 2

    def stratum_dim(self, J) -> int:
        return self.d - len(J) + 1

    def h(self, J, a) -> Matrix:
        return self.strata[J].get(a) or self.field.zeros(0, 0)

    def hdim(self, J, a) -> int:
        return self.h(J, a).nrows

    def of_depth(self, m: int) -> list:
        return sorted(J for J in self.strata if len(J) == m)

    def label(self, J) -> str:
        return "{" + ",".join(str(self.components[i]) for i in J) + "}"


def _grid(F: Field, mats: dict, rows: list, cols: list) -> Matrix:
    """Assemble a block matrix from {(row_key, col_key): Matrix}; rows/cols are
    lists of (key, dim)."""
    grid = [[mats.get((r, c)) or F.zeros(rd, cd) for c, cd in cols] for r, rd in rows]
    if not rows or not cols:
        return F.zeros(sum(d for _, d in rows), sum(d for _, d in cols))
    return Matrix.block(F, grid)


def _pairing(F: SemistableFiber | None, J, a, declared: dict, strata: dict, field: Field, d: int) -> Matrix:
    e = d - len(J) + 1
    n = strata[J].get(a).nrows if a in strata[J] else 0
    if (J, a) in declared:
        return declared[(J, a)]
    if (J, 2 * e - a) in declared:
        return declared[(J, 2 * e - a)].T.scale(-1 if a % 2 else 1)
    return field.identity(n)


def validate_fiber(raw: dict, name: str = "") -> SemistableFiber:
    """Parse and check a fiber description (the JSON schema, as Python data)."""
    where = name or "fiber"
    p = records.require(raw, "prime", where, int)
    try:
        F = Field(p)
    except ValueError as exc:
        raise ParseError(str(exc), f"{where}.prime") from None
    d = records.require(raw, "relative_dimension", where, int)
    if d < 0:
        raise ParseError("must be >= 0", f"{where}.relative_dimension")
    comps = records.require(raw, "components", where, list)
    if not comps or len(set(map(str, comps))) != len(comps):
        raise ParseError("need a nonempty list of distinct labels", f"{where}.components")
    index = {str(c): i for i, c in enumerate(comps)}

    def lab(J) -> str:
        return "{" + ",".join(str(comps[i]) for i in J) + "}"

    def parse_J(x, loc):
        if not isinstance(x, list) or not x:
            raise ParseError("expected a nonempty list of component labels", loc)
        try:
            J = tuple(sorted(index[str(c)] for c in x))
        except KeyError as exc:
            raise ParseError(f"unknown component {exc.args[0]!r}", loc) from None
        if len(set(J)) != len(J):
            raise ParseError("repeated component", loc)
        return J

    strata: dict = {}
    for si, rec in enumerate(records.require(raw, "strata", where, list)):
        loc = f"{where}.strata[{si}]"
        J = parse_J(records.require(rec, "J", loc), f"{loc}.J")
        if J in strata:
            raise ParseError(f"stratum {lab(J)} listed twice", f"{loc}.J")
        coh = records.require(rec, "cohomology", loc, dict)
        e = d - len(J) + 1
        if e < 0:
            raise ValidationError(f"{loc}: stratum of {len(J)} components is empty in relative dimension {d}")
        degs = {}
        for key, pieces in coh.items():
            cloc = f"{loc}.cohomology.{key}"
            try:
                a = int(key)
            except ValueError:
                raise ParseError("degree keys must be integers", cloc) from None
            if not 0 <= a <= 2 * e:
                raise MissingDegree(f"stratum {lab(J)}: degree {a} outside 0..{2 * e}")
            if not isinstance(pieces, list):
                raise ParseError("expected a list of pieces", cloc)
            blocks = []
            for pi, piece in enumerate(pieces):
                ploc = f"{cloc}[{pi}]"
                w = records.require(piece, "weight", ploc, int)
                n = records.require(piece, "dim", ploc, int)
                if n < 0:
                    raise ParseError("negative dimension", f"{ploc}.dim")
                if w != a:
                    raise ImpureStratum(f"stratum {lab(J)}, H^{a}: declared weight {w}")
                if "phi" in piece:
                    Phi = records.matrix(F, piece["phi"], f"{ploc}.phi", (n, n))
                else:
                    Phi = F.identity(n).scale(F.half_power(w))
                if n:
                    split = weil_split(Phi)  # NotInvertible / UnsupportedWeilNumber pass through
                    if split.weights != [a]:
                        raise ImpureStratum(f"stratum {lab(J)}, H^{a}: Frobenius weights {split.weights}")
                blocks.append(Phi)
            Phi = Matrix.block_diag(F, blocks) if blocks else F.zeros(0, 0)
            if Phi.nrows:
                degs[a] = Phi
        for a in (0, 2 * e):
            if a not in degs:
                raise MissingDegree(f"stratum {lab(J)}: H^{a} is required for a nonempty stratum")
        for a in degs:
            if degs[a].nrows != degs.get(2 * e - a, F.zeros(0, 0)).nrows:
                raise MissingDegree(f"stratum {lab(J)}: dim H^{a} != dim H^{2 * e - a}")
        strata[J] = degs

    if not any(len(J) == 1 for J in strata):
        raise ValidationError(f"{where}: no components listed among the strata")
    for J in strata:
        for K in combinations(J, len(J) - 1):
            if K and K not in strata:
                raise ValidationError(f"stratum {lab(J)} is present but its face {lab(K)} is missing")
    if len(comps) != len([J for J in strata if len(J) == 1]):
        raise ValidationError(f"{where}: every component needs a stratum record")

    restr: dict = {}
    for ri, rec in enumerate(raw.get("restrictions", [])):
        loc = f"{where}.restrictions[{ri}]"
        J = parse_J(records.require(rec, "from", loc), f"{loc}.from")
        K = parse_J(records.require(rec, "to", loc), f"{loc}.to")
        a = records.require(rec, "degree", loc, int)
        extra = set(K) - set(J)
        if len(K) != len(J) + 1 or not set(J) <= set(K):
            raise ParseError("'to' must add exactly one component to 'from'", loc)
        if J not in strata or K not in strata:
            raise ValidationError(f"{loc}: restriction between absent strata {lab(J)} -> {lab(K)}")
        i = extra.pop()
        shape = (strata[K].get(a, F.zeros(0, 0)).nrows, strata[J].get(a, F.zeros(0, 0)).nrows)
        restr[(J, i, a)] = records.matrix(F, records.require(rec, "matrix", loc), f"{loc}.matrix", shape)

    for J in strata:
        for K in strata:
            if len(K) != len(J) + 1 or not set(J) <= set(K):
                continue
            i = (set(K) - set(J)).pop()
            for a in set(strata[J]) | set(strata[K]):
                rows = strata[K].get(a, F.zeros(0, 0)).nrows
                cols = strata[J].get(a, F.zeros(0, 0)).nrows
                if (J, i, a) not in restr:
                    if rows and cols:
                        raise MissingDegree(f"restriction {lab(J)} -> {lab(K)} in degree {a} is missing")
                    restr[(J, i, a)] = F.zeros(rows, cols)
                R = restr[(J, i, a)]
                if rows and cols and R @ strata[J][a] != strata[K][a] @ R:
                    raise FrobeniusMismatch(f"restriction {lab(J)} -> {lab(K)} in degree {a} does not commute with Frobenius")

    # restrictions are pullbacks, so the two routes J -> J+i+k must agree
    for (J, i, a), R in list(restr.items()):
        for k in range(len(comps)):
            if k in J or k == i:
                continue
            L = tuple(sorted(J + (i, k)))
            if L not in strata:
                continue
            Ji = tuple(sorted(J + (i,)))
            Jk = tuple(sorted(J + (k,)))

            def get(S, t):
                T = tuple(sorted(S + (t,)))
                size = (strata[T].get(a, F.zeros(0, 0)).nrows, strata[S].get(a, F.zeros(0, 0)).nrows)
                return restr.get((S, t, a), F.zeros(*size))

            one = get(Ji, k) @ R
            two = get(Jk, i) @ get(J, k)
            if one != two:
                raise CompositionMismatch(f"restrictions {lab(J)} -> {lab(L)} in degree {a} depend on the route")

    declared: dict = {}
    for gi, rec in enumerate(raw.get("pairings", [])):
        loc = f"{where}.pairings[{gi}]"
        J = parse_J(records.require(rec, "J", loc), f"{loc}.J")
        if J not in strata:
            raise ValidationError(f"{loc}: pairing on absent stratum {lab(J)}")
        a = records.require(rec, "degree", loc, int)
        e = d - len(J) + 1
        shape = (strata[J].get(a, F.zeros(0, 0)).nrows, strata[J].get(2 * e - a, F.zeros(0, 0)).nrows)
        G = records.matrix(F, records.require(rec, "matrix", loc), f"{loc}.matrix", shape)
        if G.nrows and not G.det():
            raise ValidationError(f"{loc}: pairing is degenerate")
        if G.nrows:
            lhs = strata[J][a].T @ G @ strata[J][2 * e - a]
            if lhs != G.scale(Fraction(p) ** e):
                raise FrobeniusMismatch(f"pairing on {lab(J)} in degree {a} is not Frobenius-compatible")
        declared[(J, a)] = G

    gysin: dict = {}
    for (J, i, b), R in restr.items():
        # R is restriction in degree b = 2e - a; it yields the Gysin map in degree a
        K = tuple(sorted(J + (i,)))
        e = d - len(K) + 1
        a = 2 * e - b
        if a < 0 or not strata[K].get(a) or not strata[J].get(a + 2):
            continue
        GX = _pairing(None, J, a + 2, declared, strata, F, d)
        GY = _pairing(None, K, a, declared, strata, F, d)
        if GX.nrows != strata[J][a + 2].nrows or GX.ncols != strata[J].get(b, F.zeros(0, 0)).nrows:
            raise ValidationError(f"stratum {lab(J)}: no usable pairing in degree {a + 2}")
        if GY.nrows != strata[K][a].nrows or GY.ncols != strata[K].get(b, F.zeros(0, 0)).nrows:
            raise ValidationError(f"stratum {lab(K)}: no usable pairing in degree {a}")
        gys = GX.T.inverse() @ R.T @ GY.T
        if (gys @ strata[K][a]).scale(p) != strata[J][a + 2] @ gys:
            raise FrobeniusMismatch(f"Gysin map {lab(K)} -> {lab(J)} in degree {a} is not Frobenius-compatible")
        gysin[(J, i, a)] = gys

    return SemistableFiber(F, d, tuple(comps), strata, restr, declared, gysin, name)


# -- the cell grid ------------------------------------------------------------------

def _sign(K, i) -> int:
    return -1 if K.index(i) % 2 else 1


def restriction_block(X: SemistableFiber, m: int, a: int) -> Matrix:
    """Signed restriction H^a(D^(m)) -> H^a(D^(m+1))."""
    src = [(J, X.hdim(J, a)) for J in X.of_depth(m)]
    tgt = [(K, X.hdim(K, a)) for K in X.of_depth(m + 1)]
    mats = {}
    for J, _ in src:
        for K, _ in tgt:
            if set(J) <= set(K):
                i = (set(K) - set(J)).pop()
                R = X.restrictions.get((J, i, a))
                if R is not None and R.nrows and R.ncols:
                    mats[(K, J)] = R.scale(_sign(K, i))
    return _grid(X.field, mats, tgt, src)


def gysin_block(X: SemistableFiber, m: int, a: int) -> Matrix:
    """Signed Gysin H^a(D^(m))(-1) -> H^(a+2)(D^(m-1))."""
    src = [(K, X.hdim(K, a)) for K in X.of_depth(m)]
    tgt = [(J, X.hdim(J, a + 2)) for J in X.of_depth(m - 1)]
    mats = {}
    for K, _ in src:
        for J, _ in tgt:
            if set(J) <= set(K):
                i = (set(K) - set(J)).pop()
                G = X.gysin.get((J, i, a))
                if G is not None:
                    mats[(J, K)] = G.scale(_sign(K, i))
    return _grid(X.field, mats, tgt, src)


def frobenius_block(X: SemistableFiber, m: int, a: int, twist: int) -> Matrix:
    """Frobenius of H^a(D^(m))(twist)."""
    blocks = [X.h(J, a) for J in X.of_depth(m) if X.hdim(J, a)]
    if not blocks:
        return X.field.zeros(0, 0)
    return Matrix.block_diag(X.field, blocks).scale(Fraction(X.p) ** (-twist))


def depth_dim(X: SemistableFiber, m: int, a: int) -> int:
    return sum(X.hdim(J, a) for J in X.of_depth(m))


@dataclass(frozen=True)
class Cell:
    j: int
    k: int
    a: int
    dim: int

    @property
    def depth(self) -> int:
        return self.j + self.k + 1

    @property
    def degree(self) -> int:
        return self.a + self.j + self.k

    @property
    def column(self) -> int:
        return self.k - self.j

    @property
    def weight(self) -> int:
        return self.a + 2 * self.j


def cells(X: SemistableFiber) -> list:
    out = []
    M = X.depth
    for m in range(1, M + 1):
        for j in range(m):
            k = m - 1 - j
            for a in range(0, 2 * (X.d - m + 1) + 1):
                n = depth_dim(X, m, a)
                if n:
                    out.append(Cell(j, k, a, n))
    return out


# -- Steenbrink complex ----------------------------------------------------------------

@dataclass(frozen=True)
class SteenbrinkComplex:
    """Double complex on the cell grid and its totalisation.

    ``double`` has cells (r, s) = (k, a + j); ``total`` carries the monodromy
    as the N of its terms; ``layout[n]`` lists (cell, start) inside Tot^n.
    """

    fiber: SemistableFiber
    double: DoubleComplex
    total: Complex
    layout: dict
    rescale: Fraction = Fraction(1)

    @property
    def nu(self) -> dict:
        return self.total.nu

    def coords(self, n: int, pred) -> list:
        out = []
        for c, start in self.layout.get(n, ()):
            if pred(c):
                out.extend(range(start, start + c.dim))
        return out


def _rho(X, c: Cell) -> Matrix:
    return restriction_block(X, c.depth, c.a)


def _gamma(X, c: Cell) -> Matrix:
    return gysin_block(X, c.depth, c.a)


def steenbrink(X: SemistableFiber, rescale=1) -> SteenbrinkComplex:
    F = X.field
    rescale = Fraction(rescale)
    if not rescale:
        raise ValueError("the monodromy rescale factor must be nonzero")
    grid = cells(X)
    by_key = {(c.j, c.k, c.a): c for c in grid}

    # double-complex cells (r, s) = (k, a + j), components ordered by j
    members: dict = {}
    for c in grid:
        members.setdefault((c.k, c.a + c.j), []).append(c)
    for v in members.values():
        v.sort(key=lambda c: c.j)

    def module(cs):
        Phi = Matrix.block_diag(F, [frobenius_block(X, c.depth, c.a, -c.j) for c in cs])
        return PhiNModule(Phi, F.zeros(Phi.nrows, Phi.nrows))

    dcells = {rs: module(cs) for rs, cs in members.items()}
    labels = {rs: sum(((c.column,) * c.dim for c in cs), ()) for rs, cs in members.items()}
    dh, dv = {}, {}
    for (r, s), cs in members.items():
        src = [(c, c.dim) for c in cs]
        if (r + 1, s) in members:
            tgt = [(t, t.dim) for t in members[(r + 1, s)]]
            mats = {}
            for c in cs:
                t = by_key.get((c.j, c.k + 1, c.a))
                if t is not None:
                    mats[(t, c)] = _rho(X, c)
            dh[(r, s)] = _grid(F, mats, tgt, src)
        if (r, s + 1) in members:
            tgt = [(t, t.dim) for t in members[(r, s + 1)]]
            mats = {}
            for c in cs:
                t = by_key.get((c.j - 1, c.k, c.a + 2))
                if t is not None:
                    mats[(t, c)] = _gamma(X, c).scale(-1 if r % 2 else 1)
            dv[(r, s)] = _grid(F, mats, tgt, src)
    D = DoubleComplex(F, dcells, dh, dv, labels, {"sign_convention": SIGN_CONVENTION})
    try:
        bare = total_complex(D)
    except (SignViolation, NotAComplex) as exc:
        raise SignViolation(f"{X.name or 'fiber'}: {exc}") from None

    layout: dict = {}
    for n, slots in D.offsets().items():
        entries = []
        for rs, start in sorted(slots.items(), key=lambda t: t[1]):
            off = start
            for c in members[rs]:
                entries.append((c, off))
                off += c.dim
        layout[n] = entries

    # monodromy: identity from (j, k) to (j - 1, k + 1), same a and depth
    terms = {}
    for n, mod in bare.terms.items():
        size = mod.dim
        rows = [[0] * size for _ in range(size)]
        pos = {(c.j, c.k, c.a): start for c, start in layout[n]}
        for c, start in layout[n]:
            if c.j == 0:
                continue
            t0 = pos[(c.j - 1, c.k + 1, c.a)]
            for x in range(c.dim):
                rows[t0 + x][start + x] = rescale
        terms[n] = PhiNModule(mod.Phi, F.matrix(rows))
    total = Complex(F, terms, dict(bare.d), bare.columns)
    try:
        total.validate()
    except (NotAComplex, ValidationError) as exc:
        raise SignViolation(f"{X.name or 'fiber'}: monodromy check failed: {exc}") from None
    return SteenbrinkComplex(X, D, total, layout, rescale)


def _sub(S: SteenbrinkComplex, pred, with_labels=True) -> tuple:
    """Coordinate sub/quotient complex of Tot spanned by the cells satisfying
    ``pred`` (caller guarantees it is a sub- or quotient complex).  Returns
    (complex, {n: selection matrix Tot^n -> piece^n})."""
    T = S.total
    F = T.field
    keep = {n: S.coords(n, pred) for n in T.degrees}
    terms, d, cols, proj = {}, {}, {}, {}
    for n, idx in keep.items():
        if not idx:
            continue
        P = F.identity(T.dim(n)).select_rows(idx)
        proj[n] = P
        Phi = T.term(n).Phi.submatrix(idx, idx)
        terms[n] = PhiNModule(Phi, F.zeros(len(idx), len(idx)))
        cols[n] = tuple(T.labels(n)[i] for i in idx)
    for n in terms:
        if n + 1 in terms:
            d[n] = T.diff(n).submatrix(keep[n + 1], keep[n])
    C = Complex(F, terms, d, cols if with_labels else None).validate()
    return C, proj


def special_fiber_complexes(X: SemistableFiber) -> tuple:
    """(homological, cohomological).

    The cohomological complex is the Cech complex of restrictions,
    H^a(D^(k+1)) in degree a + k.  The homological one is the Gysin complex
    H^a(D^(j+1))(-j-1) in degree a + j + 2; its cohomology is
    H_{2d+2-m}(X_k)(-d-1), i.e. cohomology of the total space with supports
    in the special fiber.
    """
    S = steenbrink(X)
    return supports_complex(S)[0], cech_complex(S)[0]


def cech_complex(S: SteenbrinkComplex) -> tuple:
    return _sub(S, lambda c: c.j == 0)


def supports_complex(S: SteenbrinkComplex) -> tuple:
    """(Sup, Q, proj): Q is the k = 0 quotient of Tot and Sup = Tw(Q, -1)."""
    Q, proj = _sub(S, lambda c: c.k == 0)
    return twist_shift(Q, -1), Q, proj


def specialization_inclusion(S: SteenbrinkComplex) -> dict:
    """Chain map C -> Tot (transpose of the coordinate selection)."""
    _, proj = cech_complex(S)
    return {n: P.T for n, P in proj.items()}


def intersection_map(S: SteenbrinkComplex, sign: int = -1) -> dict:
    """Chain map Sup -> C: on the j = 0 cells, H^a(D^(1))(-1) -> H^(a+2)(D^(1))
    is sign * gamma * rho (Gysin after restriction), zero elsewhere.  The
    default sign makes it the intersection form of the components."""
    X = S.fiber
    F = X.field
    Sup, Q, _ = supports_complex(S)
    C, _ = cech_complex(S)
    out = {}
    for m in Sup.degrees:
        rows, cols = C.dim(m), Sup.dim(m)
        a = m - 2
        blk = None
        if X.depth >= 2 and 0 <= a:
            blk = (gysin_block(X, 2, a) @ restriction_block(X, 1, a)).scale(sign)
        M = [[F.zero] * cols for _ in range(rows)]
        if blk is not None and blk.nrows and blk.ncols:
            # j = 0, k = 0 cells come first in both layouts
            src0 = _offset(S, m - 2, lambda c: c.k == 0, (0, 0, a))
            tgt0 = _offset(S, m, lambda c: c.j == 0, (0, 0, a + 2))
            if src0 is not None and tgt0 is not None:
                for i in range(blk.nrows):
                    for j in range(blk.ncols):
                        M[tgt0 + i][src0 + j] = blk[i, j]
        out[m] = F.matrix(M) if rows else F.zeros(0, cols)
    return out


def _offset(S: SteenbrinkComplex, n: int, pred, key) -> int | None:
    pos = 0
    for c, _ in S.layout.get(n, ()):
        if not pred(c):
            continue
        if (c.j, c.k, c.a) == key:
            return pos
        pos += c.dim
    return None


# -- limit cohomology -------------------------------------------------------------------

@dataclass(frozen=True)
class LimitPiece:
    degree: int
    module: PhiNModule
    weights: dict  # weight -> dim, from the weight spectral sequence
    graded_N: dict  # i -> matrix gr_i -> gr_(i-2)

    @property
    def dim(self) -> int:
        return self.module.dim

    @property
    def n_rank(self) -> int:
        return self.module.N.rank()


@dataclass(frozen=True)
class LimitCohomology:
    fiber: SemistableFiber
    complex: SteenbrinkComplex
    pieces: dict
    ss: SSResult

    def dims(self) -> dict:
        return {n: P.dim for n, P in self.pieces.items()}

    def __getitem__(self, n) -> LimitPiece:
        return self.pieces[n]

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * P.dim for n, P in self.pieces.items())


def limit_cohomology(X: SemistableFiber, rescale=1) -> LimitCohomology:
    S = steenbrink(X, rescale)
    ss = weight_ss(S.total)
    blocks = monodromy_on_graded(S.total, ss)
    pieces = {}
    for n, h in homology_data(S.total).items():
        if not h.module.dim:
            continue
        graded = {i: M for (m, i), M in blocks.items() if m == n}
        pieces[n] = LimitPiece(n, h.module, ss.weights.get(n, {}), graded)
    return LimitCohomology(X, S, pieces, ss)


def weight_basis_form(D: PhiNModule) -> tuple:
    """(weights, Phi, N) in a basis adapted to the weight splitting, weights
    ascending; N is divided by its first nonzero entry (scanning rows then
    columns) so the normalised scalar is 1."""
    split = weil_split(D.Phi)
    P = split.change_of_basis(D.field)
    Pi = P.inverse()
    Phi = Pi @ D.Phi @ P
    N = Pi @ D.N @ P
    lead = next((x for row in N.rows() for x in row if x), None)
    if lead is not None:
        N = N.scale(lead.inv())
    return split.multiset(), Phi, N


# -- chi --------------------------------------------------------------------------------

@dataclass(frozen=True)
class ChiReport:
    passed: bool
    via_monodromy: dict  # n -> PhiNModule, homology of fib(N)
    via_special_fiber: dict  # n -> PhiNModule, homology of cone(Sup -> C)
    profile_monodromy: dict
    profile_special_fiber: dict


def _weight_profile(H: dict) -> dict:
    return {n: weil_split(m.Phi).dims() for n, m in sorted(H.items()) if m.dim}


def chi_compare(X: SemistableFiber, rescale=1, raise_on_mismatch: bool = True) -> ChiReport:
    """chi computed as fib(N) on Tot and as cone(Sup -> C); the two must agree
    in dimension and Frobenius weights in every degree."""
    S = steenbrink(X, rescale)
    fib = monodromy_fiber(S.total)
    Hf = {n: h.module for n, h in homology_data(fib).items() if h.module.dim}
    Sup, _, _ = supports_complex(S)
    C, _ = cech_complex(S)
    f = intersection_map(S)
    cn = cone(f, Sup, C)
    Hc = {n: h.module for n, h in homology_data(cn).items() if h.module.dim}
    a, b = _weight_profile(Hf), _weight_profile(Hc)
    ok = a == b
    if not ok and raise_on_mismatch:
        bad = min(n for n in set(a) | set(b) if a.get(n) != b.get(n))
        raise MismatchError(f"chi disagrees in degree {bad}: fib(N) {a.get(bad, {})} vs cone {b.get(bad, {})}")
    return ChiReport(ok, Hf, Hc, a, b)


# -- Clemens-Schmid ----------------------------------------------------------------------

@dataclass(frozen=True)
class CSNode:
    name: str
    degree: int
    module: PhiNModule


@dataclass(frozen=True)
class CSThread:
    parity: int
    nodes: tuple
    maps: tuple  # maps[i] : nodes[i] -> nodes[i + 1]; the last one goes to 0
    exact: tuple  # per node: dim ker(out) == rank(in)
    composites_zero: bool


@dataclass(frozen=True)
class CSReport:
    fiber_name: str
    threads: tuple
    wm: dict  # n -> WMReport
    conjectural: bool
    notes: tuple = ()

    @property
    def composites_zero(self) -> bool:
        return all(t.composites_zero for t in self.threads)

    @property
    def exact(self) -> bool:
        return all(all(t.exact) for t in self.threads)

    @property
    def wm_pass(self) -> bool:
        return all(r.passed for r in self.wm.values())

    @property
    def passed(self) -> bool:
        return self.composites_zero and self.exact and self.wm_pass

    def duality_isomorphisms(self) -> bool:
        """True when sp and Hhat(-1) -> H_(2d-*)(X_k)(-d-1) are isomorphisms
        (the good-reduction shape)."""
        for t in self.threads:
            for node, M in zip(t.nodes, t.maps):
                if node.name in ("H(X_k)", "Hhat(-1)"):
                    if M.nrows != M.ncols or (M.nrows and not M.det()):
                        return False
        return True


def _piece_map(f: Matrix, src: HomologyPiece | None, tgt: HomologyPiece | None, F: Field) -> Matrix:
    rows = tgt.reps.ncols if tgt else 0
    cols = src.reps.ncols if src else 0
    if not rows or not cols:
        return F.zeros(rows, cols)
    return tgt.classes(f @ src.reps)


def clemens_schmid(X: SemistableFiber, rescale=1, sign: int = -1) -> CSReport:
    F = X.field
    S = steenbrink(X, rescale)
    A = S.total
    HA = homology_data(A)
    C, _ = cech_complex(S)
    HC = homology_data(C)
    Sup, Q, proj = supports_complex(S)
    HS = homology_data(Sup)
    incl = specialization_inclusion(S)
    T = intersection_map(S, sign)

    def mod(H, n, twist=0):
        piece = H.get(n)
        m = piece.module if piece else zero_module(F)
        return tate_twist(m, twist) if m.dim else m

    top = 2 * X.d + 2
    threads = []
    for parity in (0, 1):
        nodes, maps = [], []
        for n in range(parity, top + 1, 2):
            nodes.append(CSNode("H(X_k)", n, mod(HC, n)))
            maps.append(_piece_map(incl.get(n, F.zeros(A.dim(n), C.dim(n))), HC.get(n), HA.get(n), F))
            nodes.append(CSNode("Hhat", n, mod(HA, n)))
            maps.append(mod(HA, n).N)
            nodes.append(CSNode("Hhat(-1)", n, mod(HA, n, -1)))
            maps.append(_piece_map(proj.get(n, F.zeros(Q.dim(n), A.dim(n))), HA.get(n), HS.get(n + 2), F))
            nodes.append(CSNode("H_(2d-*)(X_k)(-d-1)", n + 2, mod(HS, n + 2)))
            Tm = T.get(n + 2, F.zeros(C.dim(n + 2), Sup.dim(n + 2)))
            maps.append(_piece_map(Tm, HS.get(n + 2), HC.get(n + 2), F))
        # the last map leaves the thread
        maps[-1] = F.zeros(0, nodes[-1].module.dim)
        exact, zero = [], True
        for i, node in enumerate(nodes):
            out = maps[i]
            inc = maps[i - 1] if i else F.zeros(node.module.dim, 0)
            if inc.ncols and out.nrows and not (out @ inc).is_zero():
                zero = False
            ker = node.module.dim - out.rank()
            exact.append(ker == inc.rank())
        threads.append(CSThread(parity, tuple(nodes), tuple(maps), tuple(exact), zero))
    if not all(t.composites_zero for t in threads):
        raise NotAComplex(f"{X.name or 'fiber'}: a Clemens-Schmid composite is nonzero")
    wm = {n: wm_check(h.module, n) for n, h in sorted(HA.items()) if h.module.dim}
    notes = [f"sign convention {SIGN_CONVENTION}; Sup -> H(X_k) uses {'-' if sign < 0 else '+'}gamma.rho"]
    if X.conjectural:
        notes.append("conjectural normalization: more than two components")
    return CSReport(X.name, tuple(threads), wm, X.conjectural, tuple(notes))


# -- duality ------------------------------------------------------------------------------

def self_duality(X: SemistableFiber) -> tuple:
    """(passed, profile of Tot, profile of Tw(Tot^dual, -d))."""
    S = steenbrink(X)
    T = S.total
    D = twist_shift(dual_complex(T), -X.d)
    a, b = T.profile(), D.profile()
    return a == b, a, b


def cell_euler_characteristic(X: SemistableFiber) -> int:
    return sum((-1) ** c.degree * c.dim for c in cells(X))


# -- builtin examples ----------------------------------------------------------------------

def _p1(label) -> dict:
    return {"J": [label], "cohomology": {"0": [{"weight": 0, "dim": 1}], "2": [{"weight": 2, "dim": 1}]}}


def _ngon(n: int, p: int) -> dict:
    if n < 2:
        raise UnknownExample(f"tate-ngon needs n >= 2, got {n}")
    comps = [f"D{i}" for i in range(n)]
    strata = [_p1(c) for c in comps]
    restr = []
    if n == 2:
        strata.append({"J": comps, "cohomology": {"0": [{"weight": 0, "dim": 2}]}})
        for c in comps:
            restr.append({"from": [c], "to": comps, "degree": 0, "matrix": [[1], [1]]})
    else:
        for i in range(n):
            J = [comps[i], comps[(i + 1) % n]]
            strata.append({"J": J, "cohomology": {"0": [{"weight": 0, "dim": 1}]}})
            for c in J:
                restr.append({"from": [c], "to": J, "degree": 0, "matrix": [[1]]})
    return {"prime": p, "relative_dimension": 1, "components": comps, "strata": strata, "restrictions": restr}


def _good_elliptic(p: int) -> dict:
    return {
        "prime": p,
        "relative_dimension": 1,
        "components": ["E"],
        "strata": [{"J": ["E"], "cohomology": {
            "0": [{"weight": 0, "dim": 1}],
            "1": [{"weight": 1, "dim": 2, "phi": [[0, p], [1, 0]]}],
            "2": [{"weight": 2, "dim": 1}],
        }}],
    }


def _two_component_surface(p: int) -> dict:
    # P^2 and the Hirzebruch surface F1 glued along a line = the (-1)-curve E;
    # F1 has H^2 basis (E, F) with E.E = -1, E.F = 1, F.F = 0
    return {
        "prime": p,
        "relative_dimension": 2,
        "components": ["P2", "F1"],
        "strata": [
            {"J": ["P2"], "cohomology": {"0": [{"weight": 0, "dim": 1}], "2": [{"weight": 2, "dim": 1}],
                                         "4": [{"weight": 4, "dim": 1}]}},
            {"J": ["F1"], "cohomology": {"0": [{"weight": 0, "dim": 1}], "2": [{"weight": 2, "dim": 2}],
                                         "4": [{"weight": 4, "dim": 1}]}},
            _p1("P2") | {"J": ["P2", "F1"]},
        ],
        "restrictions": [
            {"from": ["P2"], "to": ["P2", "F1"], "degree": 0, "matrix": [[1]]},
            {"from": ["F1"], "to": ["P2", "F1"], "degree": 0, "matrix": [[1]]},
            {"from": ["P2"], "to": ["P2", "F1"], "degree": 2, "matrix": [[1]]},
            {"from": ["F1"], "to": ["P2", "F1"], "degree": 2, "matrix": [[-1, 1]]},
        ],
        "pairings": [{"J": ["F1"], "degree": 2, "matrix": [[-1, 1], [1, 0]]}],
    }


BUILTIN_NAMES = ("good-elliptic", "tate-2gon", "tate-ngon(n)", "two-component-surface")
_NGON = re.compile(r"^tate-(?:ngon[(:]?(\d+)\)?|(\d+)gon)$")


def builtin_raw(name: str, p: int = 3) -> dict:
    key = name.strip().lower()
    if key == "good-elliptic":
        return _good_elliptic(p)
    if key == "two-component-surface":
        return _two_component_surface(p)
    m = _NGON.match(key)
    if m:
        return _ngon(int(m.group(1) or m.group(2)), p)
    raise UnknownExample(f"unknown example {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def builtin_example(name: str, p: int = 3) -> SemistableFiber:
    return validate_fiber(builtin_raw(name, p), name.strip().lower())
