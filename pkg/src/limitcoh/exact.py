"""Exact arithmetic in Q(sqrt p) and dense linear algebra over it.

A :class:`Field` fixes the prime ``p`` for a session.  Scalars are
``a + b*sqrt(p)`` with rational ``a``, ``b``; matrices are immutable grids of
scalars.  Everything is exact, so equality tests are literal.

>>> F = Field(3)
>>> s = F.sqrt_p
>>> (1 + s) * (1 - s)
QSqrt(-2, 0, p=3)
>>> F.matrix([[0, 1], [0, 0]]).rank()
1
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import DivisionByZero, NotInvertible, UnsupportedWeilNumber

# rational parts are GMP rationals: same semantics as Fraction, far faster
# once entries grow during elimination
_MPQ = type(mpq(0))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _frac(x):
    return x if type(x) is _MPQ else mpq(x)


class QSqrt:
    """The number ``a + b*sqrt(p)``."""

    __slots__ = ("a", "b", "p")

    def __init__(self, a=0, b=0, p: int = 2):
        self.a = _frac(a)
        self.b = _frac(b)
        self.p = p

    def _coerce(self, other) -> "QSqrt":
        if type(other) is QSqrt:
            if other.p != self.p:
                raise ValueError(f"mixing primes {self.p} and {other.p}")
            return other
        if isinstance(other, (int, Fraction, _MPQ)):
            return QSqrt(other, 0, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QSqrt(self.a + o.a, self.b + o.b, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QSqrt(self.a - o.a, self.b - o.b, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return QSqrt(-self.a, -self.b, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b, c, d = self.a, self.b, o.a, o.b
        if not b and not d:
            return QSqrt(a * c, 0, self.p)
        return QSqrt(a * c + b * d * self.p, a * d + b * c, self.p)

    __rmul__ = __mul__

    def inv(self) -> "QSqrt":
        if not self.b:
            if not self.a:
                raise DivisionByZero("inverse of zero")
            return QSqrt(1 / self.a, 0, self.p)
        norm = self.a * self.a - self.b * self.b * self.p
        # p is prime, so sqrt(p) is irrational and the norm vanishes only at 0
        return QSqrt(self.a / norm, -self.b / norm, self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = QSqrt(1, 0, self.p)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if type(other) is QSqrt:
            return self.a == other.a and self.b == other.b and self.p == other.p
        if isinstance(other, (int, Fraction, _MPQ)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.p))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return not self.b

    def conjugate(self) -> "QSqrt":
        return QSqrt(self.a, -self.b, self.p)

    def valuation2(self) -> int:
        """Twice the p-adic valuation (sqrt(p) has valuation 1/2)."""
        if not self:
            raise ValueError("valuation of zero")
        vals = []
        if self.a:
            vals.append(2 * _vp(self.a, self.p))
        if self.b:
            vals.append(2 * _vp(self.b, self.p) + 1)
        return min(vals)

    def __repr__(self):
        return f"QSqrt({_fmt(self.a)}, {_fmt(self.b)}, p={self.p})"

    def __str__(self):
        if not self.b:
            return _fmt(self.a)
        root = f"sqrt{self.p}"
        if self.b == 1:
            tail = root
        elif self.b == -1:
            tail = "-" + root
        else:
            tail = f"{_fmt(self.b)}*{root}"
        if not self.a:
            return tail
        sign = "" if tail.startswith("-") else "+"
        return f"{_fmt(self.a)}{sign}{tail}"


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _vp(x: Fraction, p: int) -> int:
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def scalar_ops(x: QSqrt, y: QSqrt | None, op: str) -> QSqrt:
    """Dispatch one field operation by name: add, mul, inv or neg."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inv()
    if op == "neg":
        return -x
    raise ValueError(f"unknown op {op!r}")


class Field:
    """Session context: the quadratic field Q(sqrt p) for a fixed prime p."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not is_prime(int(p)):
            raise ValueError(f"{p} is not prime")
        self.p = int(p)

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"Field({self.p})"

    def __call__(self, a=0, b=0) -> QSqrt:
        if type(a) is QSqrt:
            if a.p != self.p:
                raise ValueError(f"scalar over p={a.p} used with p={self.p}")
            return a
        return QSqrt(a, b, self.p)

    @property
    def zero(self) -> QSqrt:
        return QSqrt(0, 0, self.p)

    @property
    def one(self) -> QSqrt:
        return QSqrt(1, 0, self.p)

    @property
    def sqrt_p(self) -> QSqrt:
        return QSqrt(0, 1, self.p)

    def half_power(self, m: int) -> QSqrt:
        """p**(m/2)."""
        q, r = divmod(m, 2)
        base = QSqrt(Fraction(self.p) ** q, 0, self.p)
        return base * self.sqrt_p if r else base

    def matrix(self, rows) -> "Matrix":
        return Matrix(self, rows)

    def identity(self, n: int) -> "Matrix":
        return Matrix.identity(self, n)

    def zeros(self, r: int, c: int) -> "Matrix":
        return Matrix.zeros(self, r, c)

    def diag(self, entries) -> "Matrix":
        return Matrix.diag(self, entries)


class Matrix:
    """Immutable dense matrix over a :class:`Field`."""

    __slots__ = ("field", "_rows", "nrows", "ncols")

    def __init__(self, field: Field, rows, ncols: int | None = None):
        self.field = field
        conv = field.__call__
        self._rows = tuple(tuple(conv(x) for x in row) for row in rows)
        self.nrows = len(self._rows)
        if self.nrows:
            self.ncols = len(self._rows[0])
            if any(len(r) != self.ncols for r in self._rows):
                raise ValueError("ragged matrix")
        else:
            self.ncols = 0 if ncols is None else ncols

    @classmethod
    def _raw(cls, field, rows, ncols):
        m = cls.__new__(cls)
        m.field = field
        m._rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        return m

    @classmethod
    def zeros(cls, field, r, c):
        z = field.zero
        return cls._raw(field, tuple((z,) * c for _ in range(r)), c)

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero, field.one
        return cls._raw(field, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)), n)

    @classmethod
    def diag(cls, field, entries):
        entries = [field(e) for e in entries]
        n = len(entries)
        z = field.zero
        return cls._raw(field, tuple(tuple(entries[i] if i == j else z for j in range(n)) for i in range(n)), n)

    @classmethod
    def from_columns(cls, field, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        if not cols:
            return cls.zeros(field, nrows, 0)
        return cls(field, [[c[i] for c in cols] for i in range(nrows)])

    # -- access ------------------------------------------------------------
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def p(self):
        return self.field.p

    def __getitem__(self, idx):
        i, j = idx
        return self._rows[i][j]

    def rows(self):
        return [list(r) for r in self._rows]

    def row(self, i):
        return list(self._rows[i])

    def column(self, j):
        return [r[j] for r in self._rows]

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "Matrix":
        rows, cols = list(rows), list(cols)
        return Matrix._raw(self.field, tuple(tuple(self._rows[i][j] for j in cols) for i in rows), len(cols))

    def select_columns(self, cols) -> "Matrix":
        return self.submatrix(range(self.nrows), cols)

    def select_rows(self, rows) -> "Matrix":
        return self.submatrix(rows, range(self.ncols))

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other, same_shape=True):
        if not isinstance(other, Matrix):
            raise TypeError("expected Matrix")
        if other.field != self.field:
            raise ValueError("matrices over different fields")
        if same_shape and other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check(other)
        return Matrix._raw(self.field, tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self._rows, other._rows)), self.ncols)

    def __sub__(self, other):
        self._check(other)
        return Matrix._raw(self.field, tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(self._rows, other._rows)), self.ncols)

    def __neg__(self):
        return Matrix._raw(self.field, tuple(tuple(-x for x in r) for r in self._rows), self.ncols)

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        return Matrix._raw(self.field, tuple(tuple(c * x for x in r) for r in self._rows), self.ncols)

    def __mul__(self, c):
        if isinstance(c, Matrix):
            return self @ c
        return self.scale(c)

    def __rmul__(self, c):
        return self.scale(c)

    def __matmul__(self, other):
        self._check(other, same_shape=False)
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        z = self.field.zero
        cols = other.columns()
        out = []
        for r in self._rows:
            nz = [(k, x) for k, x in enumerate(r) if x]
            row = []
            for c in cols:
                s = z
                for k, x in nz:
                    y = c[k]
                    if y:
                        s = s + x * y
                row.append(s)
            out.append(tuple(row))
        return Matrix._raw(self.field, tuple(out), other.ncols)

    @property
    def T(self) -> "Matrix":
        if not self.nrows:
            return Matrix.zeros(self.field, self.ncols, 0)
        if not self.ncols:
            return Matrix.zeros(self.field, 0, self.nrows)
        return Matrix._raw(self.field, tuple(zip(*self._rows)), self.nrows)

    def kron(self, other: "Matrix") -> "Matrix":
        self._check(other, same_shape=False)
        rows = []
        for r in self._rows:
            for s in other._rows:
                rows.append(tuple(x * y for x in r for y in s))
        return Matrix._raw(self.field, tuple(rows), self.ncols * other.ncols)

    def __pow__(self, n: int) -> "Matrix":
        if self.nrows != self.ncols:
            raise ValueError("power of non-square matrix")
        if n < 0:
            return self.inverse() ** (-n)
        out = Matrix.identity(self.field, self.nrows)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        return hash((self.shape, self._rows))

    def is_zero(self) -> bool:
        return not any(x for r in self._rows for x in r)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def trace(self):
        s = self.field.zero
        for i in range(min(self.nrows, self.ncols)):
            s = s + self._rows[i][i]
        return s

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self._rows)
        return f"Matrix[{self.nrows}x{self.ncols}]({body})"

    # -- block assembly -----------------------------------------------------
    @staticmethod
    def hstack(field, mats: Sequence["Matrix"], nrows: int | None = None) -> "Matrix":
        mats = list(mats)
        if not mats:
            return Matrix.zeros(field, nrows or 0, 0)
        n = mats[0].nrows
        if any(m.nrows != n for m in mats):
            raise ValueError("hstack row mismatch")
        rows = tuple(sum((m._rows[i] for m in mats), ()) for i in range(n))
        return Matrix._raw(field, rows, sum(m.ncols for m in mats))

    @staticmethod
    def vstack(field, mats: Sequence["Matrix"], ncols: int | None = None) -> "Matrix":
        mats = list(mats)
        if not mats:
            return Matrix.zeros(field, 0, ncols or 0)
        c = mats[0].ncols
        if any(m.ncols != c for m in mats):
            raise ValueError("vstack column mismatch")
        return Matrix._raw(field, sum((m._rows for m in mats), ()), c)

    @staticmethod
    def block(field, grid: Sequence[Sequence["Matrix"]]) -> "Matrix":
        return Matrix.vstack(field, [Matrix.hstack(field, row) for row in grid])

    @staticmethod
    def block_diag(field, mats: Sequence["Matrix"]) -> "Matrix":
        mats = list(mats)
        R = sum(m.nrows for m in mats)
        C = sum(m.ncols for m in mats)
        z = field.zero
        rows = []
        off = 0
        for m in mats:
            for r in m._rows:
                rows.append((z,) * off + r + (z,) * (C - off - m.ncols))
            off += m.ncols
        return Matrix._raw(field, tuple(rows), C) if rows else Matrix.zeros(field, 0, C)

    # -- elimination --------------------------------------------------------
    def rref(self):
        """Reduced row echelon form and pivot columns."""
        m = [list(r) for r in self._rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            piv = next((i for i in range(r, self.nrows) if m[i][c]), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            inv = m[r][c].inv()
            m[r] = [x * inv if x else x for x in m[r]]
            for i in range(self.nrows):
                if i != r and m[i][c]:
                    f = m[i][c]
                    m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        return Matrix._raw(self.field, tuple(tuple(row) for row in m), self.ncols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel(self) -> "Matrix":
        """Columns spanning the right kernel."""
        R, pivots = self.rref()
        free = [c for c in range(self.ncols) if c not in set(pivots)]
        z, o = self.field.zero, self.field.one
        cols = []
        for f in free:
            v = [z] * self.ncols
            v[f] = o
            for i, pc in enumerate(pivots):
                v[pc] = -R._rows[i][f]
            cols.append(v)
        return Matrix.from_columns(self.field, cols, self.ncols)

    def image(self) -> "Matrix":
        """Columns of ``self`` forming a basis of its column space."""
        _, pivots = self.rref()
        return self.select_columns(pivots)

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise NotInvertible("non-square matrix")
        n = self.nrows
        aug = Matrix.hstack(self.field, [self, Matrix.identity(self.field, n)])
        R, pivots = aug.rref()
        if pivots[:n] != list(range(n)):
            raise NotInvertible("matrix is singular")
        return R.submatrix(range(n), range(n, 2 * n))

    def det(self):
        if not self.is_square():
            raise ValueError("det of non-square matrix")
        m = [list(r) for r in self._rows]
        n = self.nrows
        d = self.field.one
        for c in range(n):
            piv = next((i for i in range(c, n) if m[i][c]), None)
            if piv is None:
                return self.field.zero
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                d = -d
            d = d * m[c][c]
            inv = m[c][c].inv()
            for i in range(c + 1, n):
                if m[i][c]:
                    f = m[i][c] * inv
                    m[i] = [x - f * y for x, y in zip(m[i], m[c])]
        return d

    def solve(self, B: "Matrix") -> "Matrix":
        """X with self @ X == B; raises ValueError if no solution exists."""
        if B.nrows != self.nrows:
            raise ValueError("solve: row mismatch")
        aug = Matrix.hstack(self.field, [self, B])
        R, pivots = aug.rref()
        if any(pc >= self.ncols for pc in pivots):
            raise ValueError("system is inconsistent")
        z = self.field.zero
        X = [[z] * B.ncols for _ in range(self.ncols)]
        for i, pc in enumerate(pivots):
            X[pc] = list(R._rows[i][self.ncols:])
        return Matrix(self.field, X) if self.ncols else Matrix.zeros(self.field, 0, B.ncols)

    def in_span(self, vectors: "Matrix") -> bool:
        """True if every column of ``vectors`` lies in the column span of self."""
        if vectors.ncols == 0:
            return True
        return Matrix.hstack(self.field, [self, vectors]).rank() == self.rank()

    def charpoly(self) -> list:
        """Coefficients c_0..c_n of det(x I - self), lowest degree first.

        Reduces to upper Hessenberg form by elimination similarities, then
        runs the Hessenberg determinant recurrence; O(n^3) field operations.
        """
        n = self.nrows
        if not self.is_square():
            raise ValueError("charpoly of non-square matrix")
        zero, one = self.field.zero, self.field.one
        H = [list(r) for r in self._rows]
        for m in range(1, n - 1):
            piv = next((i for i in range(m, n) if H[i][m - 1]), None)
            if piv is None:
                continue
            if piv != m:
                H[piv], H[m] = H[m], H[piv]
                for row in H:
                    row[piv], row[m] = row[m], row[piv]
            t = H[m][m - 1].inv()
            for i in range(m + 1, n):
                if not H[i][m - 1]:
                    continue
                u = H[i][m - 1] * t
                Hm, Hi = H[m], H[i]
                H[i] = [a - u * b for a, b in zip(Hi, Hm)]
                for row in H:
                    if row[i]:
                        row[m] = row[m] + u * row[i]
        polys = [[one]]
        for m in range(1, n + 1):
            prev = polys[m - 1]
            h = H[m - 1][m - 1]
            new = [zero] + list(prev)
            for k, c in enumerate(prev):
                new[k] = new[k] - h * c
            t = one
            for i in range(m - 1, 0, -1):
                t = t * H[i][i - 1]
                if not t:
                    break
                c = t * H[i - 1][m - 1]
                if c:
                    for k, q in enumerate(polys[i - 1]):
                        new[k] = new[k] - c * q
            polys.append(new)
        return polys[n]


def rank_kernel(M: Matrix):
    """(rank, kernel basis, image basis) of M, all exact."""
    return M.rank(), M.kernel(), M.image()


def poly_eval(coeffs, x):
    acc = x.__class__(0, 0, x.p) if isinstance(x, QSqrt) else 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_divide_root(coeffs, r):
    """Quotient of the polynomial by (x - r), assuming r is a root."""
    n = len(coeffs) - 1
    out = [None] * n
    acc = coeffs[n]
    for i in range(n - 1, -1, -1):
        out[i] = acc
        acc = coeffs[i] + acc * r
    return out


def span_columns(field, mats: Sequence[Matrix], n: int) -> Matrix:
    """A basis (as columns) of the sum of the column spaces."""
    mats = [m for m in mats if m.ncols]
    if not mats:
        return Matrix.zeros(field, n, 0)
    return Matrix.hstack(field, mats).image()


def intersect_columns(A: Matrix, B: Matrix) -> Matrix:
    """A basis of col(A) cap col(B); A and B must have independent columns."""
    field = A.field
    if A.ncols == 0 or B.ncols == 0:
        return Matrix.zeros(field, A.nrows, 0)
    K = Matrix.hstack(field, [A, -B]).kernel()
    if K.ncols == 0:
        return Matrix.zeros(field, A.nrows, 0)
    return (A @ K.select_rows(range(A.ncols))).image()


@dataclass(frozen=True)
class WeightSplit:
    """Frobenius generalized eigenspaces grouped by weight.

    ``pieces[m] = (dim, basis)`` where the columns of ``basis`` span the sum of
    generalized eigenspaces for eigenvalues +-p^(m/2).
    """

    pieces: dict
    ambient_dim: int
    eigenvalues: tuple = ()

    @property
    def weights(self) -> list:
        return sorted(self.pieces)

    @property
    def is_pure(self) -> bool:
        return len(self.pieces) == 1

    def dims(self) -> dict:
        return {m: d for m, (d, _) in sorted(self.pieces.items())}

    def multiset(self) -> list:
        out = []
        for m, (d, _) in sorted(self.pieces.items()):
            out.extend([m] * d)
        return out

    def change_of_basis(self, field: Field) -> Matrix:
        return Matrix.hstack(field, [self.pieces[m][1] for m in self.weights], nrows=self.ambient_dim)

    def basis(self, m: int, field: Field) -> Matrix:
        if m in self.pieces:
            return self.pieces[m][1]
        return Matrix.zeros(field, self.ambient_dim, 0)


def generalized_kernel(A: Matrix, k: int) -> Matrix:
    """Basis of ker A^k, grown one step at a time: v is in ker A^(j+1) iff
    A v lies in ker A^j.  Avoids forming the (coefficient-heavy) power."""
    K = A.kernel()
    for _ in range(k - 1):
        if K.ncols == 0:
            break
        sol = Matrix.hstack(A.field, [A, -K]).kernel()
        nxt = sol.select_rows(range(A.ncols)).image() if sol.ncols else sol
        if nxt.ncols == K.ncols:
            break
        K = nxt
    return K


def weight_bound(Phi: Matrix) -> int:
    vals = [abs(x.valuation2()) for r in Phi.rows() for x in r if x]
    maxval = Fraction(max(vals, default=0), 2)
    return int(2 * Phi.nrows * (1 + maxval))


def weil_split(Phi: Matrix, ctx: Field | None = None) -> WeightSplit:
    """Split the space by Frobenius weights.

    Eigenvalues are searched among +-p^(m/2); anything else raises
    :class:`UnsupportedWeilNumber`.
    """
    field = ctx or Phi.field
    if not Phi.is_square():
        raise ValueError("Frobenius must be square")
    n = Phi.nrows
    if n == 0:
        return WeightSplit({}, 0)
    if not Phi.det():
        raise NotInvertible("Frobenius is not invertible")
    poly = Phi.charpoly()
    bound = weight_bound(Phi)
    found = []
    remaining = poly
    for m in range(-bound, bound + 1):
        for u in (1, -1):
            lam = field.half_power(m) * u
            mult = 0
            while len(remaining) > 1 and not poly_eval(remaining, lam):
                remaining = poly_divide_root(remaining, lam)
                mult += 1
            if mult:
                found.append((m, u, lam, mult))
    if len(remaining) > 1:
        raise UnsupportedWeilNumber(
            f"characteristic polynomial does not split over +-p^(m/2), |m| <= {bound}"
        )
    I = Matrix.identity(field, n)
    pieces: dict = {}
    for m, u, lam, mult in found:
        K = generalized_kernel(Phi - I.scale(lam), mult)
        if m in pieces:
            d, B = pieces[m]
            pieces[m] = (d + K.ncols, Matrix.hstack(field, [B, K]))
        else:
            pieces[m] = (K.ncols, K)
    return WeightSplit(pieces, n, tuple((m, u, mult) for m, u, _, mult in found))
