"""Exact integer and mod-2 linear algebra, plus finitely generated abelian groups.

Matrices are plain lists of lists of Python ints (arbitrary precision).  A
matrix with ``m`` rows and ``n`` columns acts on column vectors ``Z^n -> Z^m``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce

Matrix = list[list[int]]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def shape(M: Matrix, ncols: int | None = None) -> tuple[int, int]:
    if not M:
        return 0, (ncols or 0)
    return len(M), len(M[0])


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    n = len(B[0]) if B else 0
    Bt = list(zip(*B)) if B else [()] * n
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def transpose(M: Matrix, nrows: int = 0) -> Matrix:
    if not M:
        return [[] for _ in range(nrows)]
    return [list(r) for r in zip(*M)]


def kron(A: Matrix, B: Matrix) -> Matrix:
    return [[a * b for a in ra for b in rb] for ra in A for rb in B]


def is_unimodular(M: Matrix) -> bool:
    return len(M) == len(M[0]) and abs(det(M)) == 1 if M else True


def det(M: Matrix) -> int:
    """Bareiss fraction-free determinant."""
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Abelian groups


def _normalize(free: int, orders) -> tuple[int, tuple[int, ...]]:
    """Invariant factors of Z^free + sum Z_d over the given orders (0 means Z)."""
    orders = [abs(int(d)) for d in orders]
    free += orders.count(0)
    orders = [d for d in orders if d > 1]
    if not orders:
        return free, ()
    # Invariant factors of a diagonal matrix via prime-power regrouping.
    by_prime: dict[int, list[int]] = {}
    for d in orders:
        for p, e in factorize(d).items():
            by_prime.setdefault(p, []).append(p**e)
    length = max(len(v) for v in by_prime.values())
    factors = [1] * length
    for p, powers in by_prime.items():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            factors[length - 1 - i] *= q
    return free, tuple(f for f in factors if f > 1)


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


_TERM = re.compile(r"^(Z|0)(\d*)(?:\^(\d+))?$")


@dataclass(frozen=True, order=True)
class AbGroup:
    """Finitely generated abelian group ``Z^free_rank + Z_d1 + ... + Z_dm``.

    ``torsion`` holds invariant factors with ``d1 | d2 | ... | dm``, all >= 2,
    so dataclass equality is group isomorphism.
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        t = tuple(self.torsion)
        if any(d < 2 for d in t) or any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"torsion {t} is not an invariant-factor chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_orders(cls, free: int = 0, orders=()) -> AbGroup:
        return cls(*_normalize(free, orders))

    @classmethod
    def cyclic(cls, n: int) -> AbGroup:
        return cls.from_orders(0, [n])

    @classmethod
    def parse(cls, text: str) -> AbGroup:
        """Parse ``"0"``, ``"Z"``, ``"Z^2 + Z4"``, ``"Z2^3"`` (``ℤ`` accepted)."""
        s = text.replace("ℤ", "Z").replace("⊕", "+").replace(" ", "")
        for sub, digit in zip("₀₁₂₃₄₅₆₇₈₉", "0123456789"):
            s = s.replace(sub, digit)
        if s in ("", "0"):
            return cls()
        free, orders = 0, []
        for term in s.split("+"):
            m = _TERM.match(term)
            if not m or (m.group(1) == "0" and (m.group(2) or m.group(3))):
                raise ValueError(f"cannot parse group term {term!r} in {text!r}")
            if m.group(1) == "0":
                continue
            mult = int(m.group(3) or 1)
            if m.group(2):
                orders += [int(m.group(2))] * mult
            else:
                free += mult
        return cls.from_orders(free, orders)

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        i = 0
        t = self.torsion
        while i < len(t):
            j = i
            while j < len(t) and t[j] == t[i]:
                j += 1
            parts.append(f"Z{t[i]}" + (f"^{j - i}" if j - i > 1 else ""))
            i = j
        return " + ".join(parts) if parts else "0"

    def __add__(self, other: AbGroup) -> AbGroup:
        return AbGroup.from_orders(self.free_rank + other.free_rank, self.torsion + other.torsion)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def is_free(self) -> bool:
        return not self.torsion

    @property
    def order(self) -> int | None:
        """Cardinality, or ``None`` when infinite."""
        return math.prod(self.torsion) if self.free_rank == 0 else None

    @property
    def torsion_order(self) -> int:
        return math.prod(self.torsion)

    @property
    def exponent(self) -> int:
        """Exponent of the torsion subgroup (1 when torsion-free)."""
        return self.torsion[-1] if self.torsion else 1

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def orders(self) -> tuple[int, ...]:
        """Generator orders in canonical generator order, 0 for free generators."""
        return (0,) * self.free_rank + self.torsion

    def tensor(self, other: AbGroup) -> AbGroup:
        orders = [0] * (self.free_rank * other.free_rank)
        orders += list(other.torsion) * self.free_rank
        orders += list(self.torsion) * other.free_rank
        orders += [math.gcd(a, b) for a in self.torsion for b in other.torsion]
        return AbGroup.from_orders(0, orders)

    def tor(self, other: AbGroup) -> AbGroup:
        return AbGroup.from_orders(0, [math.gcd(a, b) for a in self.torsion for b in other.torsion])

    def mod(self, n: int) -> AbGroup:
        """The quotient ``A / nA``."""
        n = abs(n)
        if n == 0:
            return self
        return AbGroup.from_orders(0, [n] * self.free_rank + [math.gcd(n, d) for d in self.torsion])


ZERO = AbGroup()
Z = AbGroup(1)
Z2 = AbGroup(0, (2,))


def direct_sum(groups) -> AbGroup:
    return reduce(lambda a, b: a + b, groups, ZERO)


def _pparts(g: AbGroup) -> dict[int, list[int]]:
    """Exponents of the p-primary cyclic summands, sorted descending, per prime."""
    out: dict[int, list[int]] = {}
    for d in g.torsion:
        for p, e in factorize(d).items():
            out.setdefault(p, []).append(e)
    for v in out.values():
        v.sort(reverse=True)
    return out


def embeds(a: AbGroup, b: AbGroup) -> bool:
    """Whether ``a`` is isomorphic to a subgroup of ``b``."""
    if a.free_rank > b.free_rank:
        return False
    pa, pb = _pparts(a), _pparts(b)
    for p, ea in pa.items():
        eb = pb.get(p, [])
        if len(ea) > len(eb) or any(x > y for x, y in zip(ea, eb)):
            return False
    return True


def is_quotient(a: AbGroup, b: AbGroup) -> bool:
    """Whether ``b`` is isomorphic to a quotient of ``a``."""
    if b.free_rank > a.free_rank:
        return False
    spare = a.free_rank - b.free_rank  # free summands able to cover any cyclic group
    pa, pb = _pparts(a), _pparts(b)
    for p, eb in pb.items():
        ea = pa.get(p, [])
        rest = eb[spare:]
        if len(rest) > len(ea) or any(x > y for x, y in zip(rest, ea)):
            return False
    return True


def ext1(b: AbGroup, a: AbGroup) -> AbGroup:
    """``Ext^1(b, a)``: free summands of ``b`` contribute 0, ``Z_n`` contributes ``a/na``."""
    return direct_sum(a.mod(n) for n in b.torsion)


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(M: Matrix, ncols: int | None = None) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D``, U and V unimodular.

    The pivot is the nonzero entry of least absolute value in the active
    block, ties broken by lowest (row, column).  ``ncols`` is needed only for
    matrices with zero rows.
    """
    m, n = shape(M, ncols)
    A = [list(map(int, r)) for r in M]
    U, V = identity(m), identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in A:
            R[i], R[j] = R[j], R[i]
        for R in V:
            R[i], R[j] = R[j], R[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        if q:
            A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
            U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        if q:
            for R in A:
                R[dst] += q * R[src]
            for R in V:
                R[dst] += q * R[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            # a smaller remainder in row/column t becomes the new pivot
            cand = [(abs(A[i][t]), 0, i) for i in range(t + 1, m) if A[i][t]]
            cand += [(abs(A[t][j]), 1, j) for j in range(t + 1, n) if A[t][j]]
            if cand:
                done = False
                _, kind, k = min(cand)
                if kind == 0:
                    swap_rows(t, k)
                else:
                    swap_cols(t, k)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is not None:
                done = False
                add_row(t, bad, 1)
                continue
            if done:
                break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return U, A, V


def invariant_factors(M: Matrix, ncols: int | None = None) -> list[int]:
    _, D, _ = smith_normal_form(M, ncols)
    return [D[i][i] for i in range(min(shape(D, ncols))) if D[i][i]]


def hermite_rows(rows) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Pivots positive, entries above each pivot reduced into ``[0, pivot)``;
    zero rows dropped.  Two generating sets span the same lattice iff their
    results are equal.
    """
    A = [list(r) for r in rows if any(r)]
    if not A:
        return []
    n = len(A[0])
    out: list[list[int]] = []
    col = 0
    while A and col < n:
        nz = [r for r in A if r[col]]
        rest = [r for r in A if not r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            new = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                (new if r[col] else rest).append(r)
            nz = new
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        for r in out:
            q = r[col] // piv[col]
            if q:
                r[:] = [x - q * y for x, y in zip(r, piv)]
        out.append(piv)
        A = [r for r in rest if any(r)]
        col += 1
    return [tuple(r) for r in out]


def kernel_basis(M: Matrix, ncols: int | None = None) -> list[list[int]]:
    """Hermite-reduced basis of the integer null space ``{x : M x = 0}``.

    The basis spans a saturated lattice because it comes from unimodular V.
    """
    m, n = shape(M, ncols)
    _, D, V = smith_normal_form(M, n)
    r = sum(1 for i in range(min(m, n)) if D[i][i])
    vecs = [[V[i][j] for i in range(n)] for j in range(r, n)]
    return [list(v) for v in hermite_rows(vecs)]


def coker_ker(M: Matrix, ncols: int | None = None) -> tuple[AbGroup, list[list[int]]]:
    """Cokernel ``Z^m / M Z^n`` and a basis of the kernel of ``M``."""
    m, n = shape(M, ncols)
    diag = invariant_factors(M, n)
    coker = AbGroup.from_orders(m - len(diag), diag)
    return coker, kernel_basis(M, n)


def left_inverse(K: Matrix) -> Matrix:
    """Integer ``P`` with ``P K = I`` for ``K`` whose columns span a saturated lattice."""
    m, k = shape(K)
    U, D, V = smith_normal_form(K, k)
    for i in range(k):
        if D[i][i] != 1:
            raise ValueError("columns do not span a saturated lattice")
    # D = U K V  =>  (V U[:k]) K = V D[:k] V^-1 = I
    return matmul(V, U[:k])


def homology(d_out: Matrix | None, d_in: Matrix | None, dim: int) -> AbGroup:
    """``ker(d_out) / im(d_in)`` at a chain group ``Z^dim``.

    ``d_out: Z^dim -> Z^a`` and ``d_in: Z^b -> Z^dim``; ``None`` means a zero map.
    """
    if dim == 0:
        return ZERO
    if d_out is None or not d_out:
        K = identity(dim)
    else:
        K = transpose(kernel_basis(d_out, dim), dim)
    k = len(K[0]) if K and K[0] else 0
    if k == 0:
        return ZERO
    if d_in is None or not d_in or not d_in[0]:
        return AbGroup(k)
    P = left_inverse(K)
    X = matmul(P, d_in)
    if matmul(K, X) != [list(r) for r in d_in]:
        raise ValueError("image is not contained in the kernel (d_out @ d_in != 0)")
    return coker_ker(X, len(d_in[0]))[0]


# ---------------------------------------------------------------------------
# GF(2)


def gf2_rank(M: Matrix) -> int:
    rows = []
    for r in M:
        bits = 0
        for j, x in enumerate(r):
            if x & 1:
                bits |= 1 << j
        rows.append(bits)
    rank = 0
    while rows:
        piv = rows.pop()
        if not piv:
            continue
        rank += 1
        low = piv & -piv
        rows = [r ^ piv if r & low else r for r in rows]
    return rank


def gf2_coker_ker(M: Matrix, ncols: int | None = None) -> tuple[AbGroup, int]:
    """Cokernel and kernel dimension of ``M`` reduced mod 2."""
    m, n = shape(M, ncols)
    r = gf2_rank(M)
    return AbGroup.from_orders(0, [2] * (m - r)), n - r
