"""Bounded cochain complexes of (phi,N)-modules.

Degrees are cohomological: ``d[n]`` maps ``terms[n]`` to ``terms[n + 1]``.
A complex may carry a column label for every basis vector of every term;
the labels define the decreasing filtration F^p = span(labels >= p) used by
the weight spectral sequence.  When the terms carry a nonzero ``N`` the
complex is a monodromy complex: N is a degree-preserving chain endomorphism
with ``N Phi = p Phi N``, i.e. a chain map C -> C(-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

from .errors import NotAComplex, RelationViolated, SignViolation
from .exact import Field, Matrix, weil_split
from .phimod import PhiNModule, direct_sum, is_morphism, tate_twist, zero_module


@dataclass(frozen=True)
class Complex:
    field: Field
    terms: dict
    d: dict = dc_field(default_factory=dict)
    columns: dict | None = None

    def __post_init__(self):
        terms = {n: m for n, m in self.terms.items() if m.dim}
        object.__setattr__(self, "terms", dict(sorted(terms.items())))
        d = {n: M for n, M in self.d.items() if n in terms and n + 1 in terms}
        object.__setattr__(self, "d", d)
        if self.columns is not None:
            object.__setattr__(self, "columns", {n: tuple(c) for n, c in self.columns.items() if n in terms})

    # -- access ---------------------------------------------------------------
    @property
    def degrees(self) -> list:
        return list(self.terms)

    @property
    def span(self) -> range:
        if not self.terms:
            return range(0)
        return range(min(self.terms), max(self.terms) + 1)

    def term(self, n: int) -> PhiNModule:
        return self.terms.get(n) or zero_module(self.field)

    def dim(self, n: int) -> int:
        return self.term(n).dim

    def diff(self, n: int) -> Matrix:
        if n in self.d:
            return self.d[n]
        return self.field.zeros(self.dim(n + 1), self.dim(n))

    def labels(self, n: int) -> tuple:
        if self.columns is None:
            raise ValueError("complex carries no column filtration")
        return self.columns.get(n, ())

    @property
    def nu(self) -> dict:
        return {n: m.N for n, m in self.terms.items()}

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * m.dim for n, m in self.terms.items())

    def profile(self) -> dict:
        """Per degree, the multiset of Frobenius weights as {weight: dim}."""
        return {n: weil_split(m.Phi).dims() for n, m in self.terms.items()}

    def validate(self) -> "Complex":
        for n in self.span:
            D = self.diff(n)
            if D.shape != (self.dim(n + 1), self.dim(n)):
                raise NotAComplex(f"d[{n}] has shape {D.shape}")
            if not (self.diff(n + 1) @ D).is_zero():
                raise NotAComplex(f"d[{n + 1}] d[{n}] != 0")
            if not is_morphism(D, self.term(n), self.term(n + 1)):
                raise NotAComplex(f"d[{n}] does not commute with Frobenius and N")
        for n, m in self.terms.items():
            if not m.relation_holds():
                raise RelationViolated(f"degree {n}: N Phi != p Phi N")
            if self.columns is not None and len(self.labels(n)) != m.dim:
                raise ValueError(f"degree {n}: {len(self.labels(n))} labels for dim {m.dim}")
        return self


MonodromyComplex = Complex


def one_term(module: PhiNModule, degree: int = 0) -> Complex:
    return Complex(module.field, {degree: module})


def chain_map_ok(f: dict, A: Complex, B: Complex) -> bool:
    F = A.field
    for n in set(A.span) | set(B.span):
        fn = f.get(n, F.zeros(B.dim(n), A.dim(n)))
        fn1 = f.get(n + 1, F.zeros(B.dim(n + 1), A.dim(n + 1)))
        if fn1 @ A.diff(n) != B.diff(n) @ fn:
            return False
    return True


# -- homology --------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyPiece:
    """H^n with chosen representatives: basis of C^n is split as [B | Q | rest]."""

    module: PhiNModule
    reps: Matrix  # representatives of a basis of H^n (columns in C^n)
    boundaries: Matrix  # basis of im d_{n-1}

    def classes(self, cycles: Matrix) -> Matrix:
        """Coordinates in H^n of the given cycles (columns)."""
        F = self.reps.field
        if self.reps.ncols == 0:
            return F.zeros(0, cycles.ncols)
        basis = Matrix.hstack(F, [self.boundaries, self.reps])
        X = basis.solve(cycles)
        return X.select_rows(range(self.boundaries.ncols, basis.ncols))


def homology_data(C: Complex) -> dict:
    F = C.field
    out = {}
    for n in C.degrees:
        Z = C.diff(n).kernel()
        B = C.diff(n - 1).image()
        if B.ncols:
            _, piv = Matrix.hstack(F, [B, Z]).rref()
            reps = [c - B.ncols for c in piv if c >= B.ncols]
        else:
            reps = list(range(Z.ncols))
        Q = Z.select_columns(reps)
        piece = HomologyPiece(None, Q, B)
        term = C.term(n)
        if Q.ncols:
            Phi = piece.classes(term.Phi @ Q)
            N = piece.classes(term.N @ Q)
            module = PhiNModule(Phi, N)
        else:
            module = zero_module(F)
        out[n] = HomologyPiece(module, Q, B)
    return out


def homology(C: Complex) -> dict:
    return {n: h.module for n, h in homology_data(C).items() if h.module.dim}


def homology_dims(C: Complex) -> dict:
    return {n: h.module.dim for n, h in homology_data(C).items() if h.module.dim}


def induced_map(f: dict, HA: dict, HB: dict, n: int, field: Field) -> Matrix:
    """Matrix of H^n(f) in the chosen homology bases."""
    a, b = HA.get(n), HB.get(n)
    rows = b.reps.ncols if b else 0
    cols = a.reps.ncols if a else 0
    if not rows or not cols:
        return field.zeros(rows, cols)
    return b.classes(f[n] @ a.reps)


# -- constructions ---------------------------------------------------------------

def shift(C: Complex, k: int) -> Complex:
    """C[k]: degree n holds C^(n+k); differential multiplied by (-1)^k."""
    sign = -1 if k % 2 else 1
    cols = None if C.columns is None else {n - k: c for n, c in C.columns.items()}
    return Complex(C.field, {n - k: m for n, m in C.terms.items()},
                   {n - k: D.scale(sign) for n, D in C.d.items()}, cols)


def twist_shift(C: Complex, s: int) -> Complex:
    """Tw(C, s)^n = C^(n+2s)(s); Tw(C,-1)^n = C^(n-2)(-1)."""
    cols = None if C.columns is None else {n - 2 * s: c for n, c in C.columns.items()}
    return Complex(C.field, {n - 2 * s: tate_twist(m, s) for n, m in C.terms.items()},
                   {n - 2 * s: D for n, D in C.d.items()}, cols)


def tate_twist_complex(C: Complex, s: int) -> Complex:
    return Complex(C.field, {n: tate_twist(m, s) for n, m in C.terms.items()}, dict(C.d), C.columns)


def cone(f: dict, A: Complex, B: Complex) -> Complex:
    """Cone^n = A^(n+1) + B^n with d = [[-dA, 0], [f, dB]]."""
    F = A.field
    if not chain_map_ok(f, A, B):
        raise NotAComplex("cone: f is not a chain map")
    degs = set(n - 1 for n in A.degrees) | set(B.degrees)
    if not degs:
        return Complex(F, {})
    lo, hi = min(degs), max(degs)
    terms, d = {}, {}
    for n in range(lo, hi + 1):
        terms[n] = direct_sum(A.term(n + 1), B.term(n), ctx=F)
    for n in range(lo, hi):
        fn1 = f.get(n + 1, F.zeros(B.dim(n + 1), A.dim(n + 1)))
        d[n] = Matrix.block(F, [
            [-A.diff(n + 1), F.zeros(A.dim(n + 2), B.dim(n))],
            [fn1, B.diff(n)],
        ])
    return Complex(F, terms, d)


def fiber(f: dict, A: Complex, B: Complex) -> Complex:
    return shift(cone(f, A, B), -1)


def monodromy_fiber(C: Complex) -> Complex:
    """fib(N : C -> C(-1)): degree n is C^n + C(-1)^(n-1)."""
    return fiber(C.nu, C, tate_twist_complex(C, -1))


def dual_complex(C: Complex) -> Complex:
    """Degree-wise dual: (C^v)^n = (C^-n)^v with transposed differentials."""
    from .phimod import dual
    return Complex(C.field, {-n: dual(m) for n, m in C.terms.items()},
                   {-n - 1: D.T for n, D in C.d.items()})


# -- double complexes ------------------------------------------------------------

@dataclass(frozen=True)
class DoubleComplex:
    """Cells (r, s); dh maps (r,s) -> (r+1,s), dv maps (r,s) -> (r,s+1).

    Squares commute (dh dv = dv dh); the totalisation inserts the sign
    (-1)^r on dv.  ``labels`` optionally gives a filtration label per basis
    vector of each cell.
    """

    field: Field
    cells: dict
    dh: dict = dc_field(default_factory=dict)
    dv: dict = dc_field(default_factory=dict)
    labels: dict | None = None
    meta: dict = dc_field(default_factory=dict)

    def cell(self, rs) -> PhiNModule:
        return self.cells.get(rs) or zero_module(self.field)

    def h(self, rs) -> Matrix:
        r, s = rs
        if rs in self.dh:
            return self.dh[rs]
        return self.field.zeros(self.cell((r + 1, s)).dim, self.cell(rs).dim)

    def v(self, rs) -> Matrix:
        r, s = rs
        if rs in self.dv:
            return self.dv[rs]
        return self.field.zeros(self.cell((r, s + 1)).dim, self.cell(rs).dim)

    def validate(self) -> "DoubleComplex":
        for (r, s) in self.cells:
            if not (self.h((r + 1, s)) @ self.h((r, s))).is_zero():
                raise SignViolation(f"horizontal d^2 != 0 at {(r, s)}")
            if not (self.v((r, s + 1)) @ self.v((r, s))).is_zero():
                raise SignViolation(f"vertical d^2 != 0 at {(r, s)}")
            if self.h((r, s + 1)) @ self.v((r, s)) != self.v((r + 1, s)) @ self.h((r, s)):
                raise SignViolation(f"square at {(r, s)} does not commute")
        return self

    def offsets(self) -> dict:
        """n -> {(r, s): start index inside Tot^n}."""
        out: dict = {}
        for (r, s) in sorted(self.cells):
            if not self.cells[(r, s)].dim:
                continue
            n = r + s
            slot = out.setdefault(n, {})
            slot[(r, s)] = sum(self.cells[c].dim for c in slot)
        return out


def total_complex(D: DoubleComplex) -> Complex:
    """Direct-sum totalisation with d = dh + (-1)^r dv."""
    D.validate()
    F = D.field
    offs = D.offsets()
    terms, d, cols = {}, {}, {}
    for n, slots in offs.items():
        cells = sorted(slots)
        terms[n] = direct_sum(*[D.cells[c] for c in cells], ctx=F)
        if D.labels is not None:
            cols[n] = sum((tuple(D.labels[c]) for c in cells), ())
    for n, slots in offs.items():
        if n + 1 not in offs:
            continue
        tgt = offs[n + 1]
        rows = [[None] * len(slots) for _ in tgt]
        src_cells = sorted(slots)
        tgt_cells = sorted(tgt)
        for j, (r, s) in enumerate(src_cells):
            for i, t in enumerate(tgt_cells):
                if t == (r + 1, s):
                    rows[i][j] = D.h((r, s))
                elif t == (r, s + 1):
                    rows[i][j] = D.v((r, s)).scale(-1 if r % 2 else 1)
                else:
                    rows[i][j] = F.zeros(D.cells[t].dim, D.cells[(r, s)].dim)
        d[n] = Matrix.block(F, rows)
    return Complex(F, terms, d, cols if D.labels is not None else None).validate()


# -- weight spectral sequence ------------------------------------------------------

@dataclass(frozen=True)
class SSResult:
    E1: dict  # (p, n) -> dim, n the total degree; q = n - p
    E2: dict
    Einf: dict
    weights: dict  # n -> {weight: dim} with weight = n - p
    degenerates_at_e2: bool
    pure_columns: bool

    def page(self, r) -> dict:
        return {1: self.E1, 2: self.E2}.get(r, self.Einf)


def _coord_proj(F: Field, keep, size) -> Matrix:
    rows = [[1 if j == i else 0 for j in range(size)] for i in keep]
    return F.matrix(rows) if rows else F.zeros(0, size)


def _coord_basis(F: Field, keep, size) -> Matrix:
    return _coord_proj(F, keep, size).T


def _page_dims(C: Complex, r: int, ps: list) -> dict:
    F = C.field
    out = {}
    for n in C.degrees:
        labs = C.labels(n)
        size = len(labs)
        d = C.diff(n)
        dprev = C.diff(n - 1)
        labs_next = C.labels(n + 1) if C.dim(n + 1) else ()
        labs_prev = C.labels(n - 1) if C.dim(n - 1) else ()

        def Z(rr, p):
            Fp = _coord_basis(F, [i for i, l in enumerate(labs) if l >= p], size)
            if Fp.ncols == 0:
                return Fp
            low = [i for i, l in enumerate(labs_next) if l < p + rr]
            if not low:
                return Fp
            cond = _coord_proj(F, low, len(labs_next)) @ d @ Fp
            return Fp @ cond.kernel()

        def Bsp(rr, p):
            src = _coord_basis(F, [i for i, l in enumerate(labs_prev) if l >= p - rr], len(labs_prev))
            if src.ncols == 0:
                return F.zeros(size, 0)
            low = [i for i, l in enumerate(labs) if l < p]
            if low:
                src = src @ (_coord_proj(F, low, size) @ dprev @ src).kernel()
            if src.ncols == 0:
                return F.zeros(size, 0)
            return (dprev @ src).image()

        for p in ps:
            z = Z(r, p)
            if z.ncols == 0:
                continue
            denom = Matrix.hstack(F, [Z(r - 1, p + 1), Bsp(r - 1, p)])
            dim = z.ncols - (denom.rank() if denom.ncols else 0)
            if dim:
                out[(p, n)] = dim
    return out


def weight_ss(C: Complex) -> SSResult:
    """Spectral sequence of the column filtration; weight of E^{p,n} is n - p."""
    if C.columns is None:
        raise ValueError("weight_ss needs a column-labelled complex")
    F = C.field
    for n in C.degrees:
        d = C.diff(n)
        for j, l in enumerate(C.labels(n)):
            for i, l2 in enumerate(C.labels(n + 1) if C.dim(n + 1) else ()):
                if l2 < l and d[i, j]:
                    raise ValueError("differential does not preserve the column filtration")
    all_labels = sorted({l for n in C.degrees for l in C.labels(n)})
    if not all_labels:
        return SSResult({}, {}, {}, {}, True, True)
    ps = list(range(all_labels[0], all_labels[-1] + 1))
    length = all_labels[-1] - all_labels[0] + 2
    E1 = _page_dims(C, 1, ps)
    E2 = _page_dims(C, 2, ps)
    Einf = _page_dims(C, length + 1, ps)
    weights: dict = {}
    for (p, n), dim in sorted(Einf.items()):
        weights.setdefault(n, {})[n - p] = dim
    pure = True
    for n in C.degrees:
        labs = C.labels(n)
        Phi = C.term(n).Phi
        for p in set(labs):
            idx = [i for i, l in enumerate(labs) if l == p]
            block = Phi.submatrix(idx, idx)
            rest = [i for i in range(len(labs)) if labs[i] != p]
            if rest and not Phi.submatrix(rest, idx).is_zero():
                pure = False
                continue
            split = weil_split(block)
            if split.weights != [n - p]:
                pure = False
    return SSResult(E1, E2, Einf, weights, E2 == Einf, pure)


def monodromy_on_graded(C: Complex, ss: SSResult | None = None) -> dict:
    """(n, i) -> matrix of N : gr_i H^n -> gr_(i-2) H^n(-1) in Frobenius bases.

    Raises RelationViolated if N has a component gr_i -> gr_j with j != i-2,
    or if Frobenius weights disagree with the spectral-sequence weights.
    """
    H = homology(C)
    out = {}
    for n, mod in H.items():
        split = weil_split(mod.Phi)
        if ss is not None and ss.weights.get(n, {}) != split.dims():
            raise RelationViolated(f"H^{n}: Frobenius weights {split.dims()} != SS weights {ss.weights.get(n)}")
        F = mod.field
        for i in split.weights:
            src = split.basis(i, F)
            tgt = split.basis(i - 2, F)
            img = mod.N @ src
            if img.is_zero():
                out[(n, i)] = F.zeros(tgt.ncols, src.ncols)
                continue
            if tgt.ncols == 0:
                raise RelationViolated(f"H^{n}: N leaves gr_{i} outside gr_{i - 2}")
            try:
                out[(n, i)] = tgt.solve(img)
            except ValueError:
                raise RelationViolated(f"H^{n}: N leaves gr_{i} outside gr_{i - 2}") from None
    return out
