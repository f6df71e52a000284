"""Chain complexes of graphs with involution, spectral-sequence rows and the
assembly of KO from filtrations (optionally completed by the exact sequence).

Chain groups of the real complex in degree ``q`` are
``A_q = KO_q(R)^f + KO_q(C)^g``:

    q     0    1     2         3   4    5   6    7
    A_q   Z^fg Z2^f  Z2^f+Z^g  0   Z^fg 0   Z^g  0

Rows ``q = 0`` and ``q = 1`` use the degree-0 fold of ``B = I - M^t`` and
``I - M_11^t`` mod 2.  The maps in rows 2, 4, 6 are not available here, so
those rows are unknown unless ``A_q`` vanishes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graphs import EPGraph, GraphError, InvolutionData, KGraph, boundary_matrix, degree0_matrix, fixed_subgraph
from .intlin import ZERO, AbGroup, Matrix, embeds, ext1, factorize, gf2_rank, homology, is_quotient
from .lessolver import BoundExhausted, order_key, solve
from .relprop import EPResult, ep_coker_ker, graph_coker_ker, matrix_coker_ker

COMPUTED, UNKNOWN, FREE = "computed", "unknown", "torsion-free"


class Ambiguous(Exception):
    def __init__(self, candidates):
        self.candidates = candidates
        super().__init__(f"{len(candidates)} candidate KO tables")


# ---------------------------------------------------------------------------
# complex K-theory


def koszul_differentials(Bs: list[Matrix]) -> dict[int, Matrix]:
    """Differentials of the Koszul complex on commuting ``B_1..B_k``.

    The basis of ``C_p`` is ``e_S (x) v`` for ``|S| = p`` (subsets in
    lexicographic order) and vertices ``v``; ``d e_S = sum_i (-1)^pos(i,S) B_i e_{S - i}``.
    """
    k = len(Bs)
    n = len(Bs[0]) if Bs else 0
    subsets = {p: list(itertools.combinations(range(k), p)) for p in range(k + 1)}
    out = {}
    for p in range(1, k + 1):
        src, tgt = subsets[p], subsets[p - 1]
        tix = {S: i for i, S in enumerate(tgt)}
        D = [[0] * (len(src) * n) for _ in range(len(tgt) * n)]
        for si, S in enumerate(src):
            for pos, i in enumerate(S):
                T = tuple(x for x in S if x != i)
                ti = tix[T]
                sign = -1 if pos % 2 else 1
                for r in range(n):
                    for c in range(n):
                        if Bs[i][r][c]:
                            D[ti * n + r][si * n + c] += sign * Bs[i][r][c]
        out[p] = D
    return out


def koszul_homology(Bs: list[Matrix]) -> list[AbGroup]:
    k = len(Bs)
    n = len(Bs[0]) if Bs else 0
    d = koszul_differentials(Bs)
    dims = {p: len(list(itertools.combinations(range(k), p))) * n for p in range(k + 1)}
    return [homology(d.get(p), d.get(p + 1), dims[p]) for p in range(k + 1)]


@dataclass
class ComplexK:
    k0: AbGroup
    k1: AbGroup
    homology: list  # H_p per homological degree
    caveat: str = ""
    propagation: EPResult | None = None

    def as_dict(self) -> dict:
        d = {"K0": str(self.k0), "K1": str(self.k1), "H": [str(h) for h in self.homology]}
        if self.caveat:
            d["caveat"] = self.caveat
        return d


def complex_k(G, max_periods: int = 16) -> ComplexK:
    """``(K_0, K_1)`` of the complex graph algebra for rank <= 3."""
    if G.rank > 3:
        raise GraphError(f"rank {G.rank} > 3 is not supported")
    if isinstance(G, EPGraph) or G.rank == 1:
        r = graph_coker_ker(G, 0, max_periods)
        return ComplexK(r.coker, r.ker, [r.coker, r.ker], "", r)
    Bs = [boundary_matrix(G.matrix(i)) for i in range(G.rank)]
    H = koszul_homology(Bs)
    k0 = k1 = ZERO
    for p, h in enumerate(H):
        if p % 2 == 0:
            k0 = k0 + h
        else:
            k1 = k1 + h
    caveat = ""
    for par in (0, 1):
        nz = [h for p, h in enumerate(H) if p % 2 == par and not h.is_zero]
        if len(nz) > 1 and any(h.torsion for h in nz):
            caveat = "extension ambiguity possible at rank >= 2: K groups are reported as direct sums of H_p"
    return ComplexK(k0, k1, H, caveat)


# ---------------------------------------------------------------------------
# spectral pages


@dataclass
class SpectralPage:
    rank: int
    entries: dict = field(default_factory=dict)  # (p, q) -> AbGroup | None
    status: dict = field(default_factory=dict)  # (p, q) -> computed | unknown | torsion-free
    d2: dict = field(default_factory=dict)  # q -> "zero" | "unknown"
    logs: dict = field(default_factory=dict)  # q -> propagation result

    def get(self, p: int, q: int):
        return self.entries.get((p, q % 8))

    def known(self, p: int, q: int) -> bool:
        return self.status.get((p, q % 8)) == COMPUTED

    def set(self, p, q, g, status=COMPUTED):
        self.entries[(p, q % 8)] = g
        self.status[(p, q % 8)] = status

    def row(self, q: int) -> list:
        return [self.get(p, q) for p in range(self.rank + 1)]

    def infinity(self, p: int, q: int):
        """E-infinity entry when determined by shape (d2 zero), else None."""
        if self.rank <= 1 or not self.known(p, q):
            return self.get(p, q) if self.known(p, q) else None
        if p == 2 and self.d2.get(q) != "zero":
            return None
        if p == 0 and self.d2.get((q - 1) % 8) != "zero":
            return None
        return self.get(p, q)

    def render(self) -> str:
        cells = {}
        for q in range(8):
            for p in range(self.rank + 1):
                st = self.status.get((p, q), UNKNOWN)
                g = self.get(p, q)
                cells[(p, q)] = str(g) if st == COMPUTED else ("free?" if st == FREE else "?")
        w = max(4, *(len(c) for c in cells.values()))
        lines = []
        for q in range(7, -1, -1):
            lines.append(f"q={q} | " + "  ".join(cells[(p, q)].rjust(w) for p in range(self.rank + 1)))
        lines.append("    +-" + "-" * ((w + 2) * (self.rank + 1)))
        lines.append("      " + "  ".join(f"p={p}".rjust(w) for p in range(self.rank + 1)))
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "entries": {f"{p},{q}": (str(self.get(p, q)) if self.known(p, q) else self.status.get((p, q), UNKNOWN)) for q in range(8) for p in range(self.rank + 1)},
        }


def _partition(G, inv):
    f, g, _ = inv.partition(G)
    if isinstance(G, EPGraph):
        rf, rg, _ = inv.ray_partition()
        return bool(f) or bool(rf), bool(g) or bool(rg)
    return bool(f), bool(g)


def _chain_zero(q: int, has_f: bool, has_g: bool) -> bool:
    """Whether A_q = KO_q(R)^f + KO_q(C)^g vanishes."""
    ko_r = {0: 1, 1: 1, 2: 1, 4: 1}
    ko_c = {0: 1, 2: 1, 4: 1, 6: 1}
    return not ((has_f and q in ko_r) or (has_g and q in ko_c))


def real_rows_rank1(G, inv: InvolutionData, max_periods: int = 16) -> SpectralPage:
    """E^2 = E^infinity for a rank-1 graph with involution."""
    page = SpectralPage(1)
    has_f, has_g = _partition(G, inv)
    if isinstance(G, EPGraph):
        r0 = ep_coker_ker(degree0_matrix(G, inv), 0, max_periods)
        r1 = graph_coker_ker(fixed_subgraph(G, inv), 2, max_periods)
    else:
        keep, B0 = degree0_matrix(G, inv)
        r0 = matrix_coker_ker(keep, B0)
        F = fixed_subgraph(G, inv)
        r1 = matrix_coker_ker(list(F.vertices), boundary_matrix(F.matrix()), 2)
    page.set(0, 0, r0.coker)
    page.set(1, 0, r0.ker)
    page.set(0, 1, r1.coker)
    page.set(1, 1, r1.ker)
    page.logs = {0: r0, 1: r1}
    for q in (2, 3, 4, 5, 6, 7):
        for p in (0, 1):
            if _chain_zero(q, has_f, has_g):
                page.set(p, q, ZERO)
            else:
                page.set(p, q, None, UNKNOWN)
    return page


def _gf2_homology(d_out: Matrix | None, d_in: Matrix | None, dim: int) -> AbGroup:
    ker = dim - (gf2_rank(d_out) if d_out else 0)
    im = gf2_rank(d_in) if d_in else 0
    return AbGroup.from_orders(0, [2] * (ker - im))


def real_rows_rank2(G: KGraph, inv: InvolutionData) -> SpectralPage:
    """Rows of the E^2 page for a finite rank-2 graph with involution.

    Each color uses the rank-1 formulas: the degree-0 fold of ``B_i`` in row
    0 and ``I - (M_i)_11^t`` mod 2 in row 1.
    """
    if isinstance(G, EPGraph) or G.rank != 2:
        raise GraphError("real_rows_rank2 needs a finite rank-2 graph")
    page = SpectralPage(2)
    f, g, _ = inv.partition(G)
    has_f, has_g = bool(f), bool(g)
    rho0 = [degree0_matrix(G, inv, i)[1] for i in range(2)]
    n0 = len(f) + len(g)
    d = koszul_differentials(rho0) if n0 else {}
    H0 = [homology(d.get(p), d.get(p + 1), [n0, 2 * n0, n0][p]) for p in range(3)] if n0 else [ZERO] * 3
    for p in range(3):
        page.set(p, 0, H0[p])
    F = G.restrict(f)
    rho1 = [[[x % 2 for x in r] for r in boundary_matrix(F.matrix(i))] for i in range(2)]
    n1 = len(f)
    if n1:
        d1 = koszul_differentials(rho1)
        dims = [n1, 2 * n1, n1]
        H1 = [_gf2_homology(d1.get(p), d1.get(p + 1), dims[p]) for p in range(3)]
    else:
        H1 = [ZERO] * 3
    for p in range(3):
        page.set(p, 1, H1[p])
    for q in (2, 3, 4, 5, 6, 7):
        for p in range(3):
            if _chain_zero(q, has_f, has_g):
                page.set(p, q, ZERO)
            elif p == 2 and q in (4, 6):
                page.set(p, q, None, FREE)
            else:
                page.set(p, q, None, UNKNOWN)
    for q in range(8):
        src, tgt = (2, q), (0, q + 1)
        zero = (page.known(*src) and page.get(*src).is_zero) or (page.known(*tgt) and page.get(*tgt).is_zero)
        page.d2[q] = "zero" if zero else "unknown"
    return page


# ---------------------------------------------------------------------------
# filtrations


def _prime_partitions(total: int):
    """Partitions of ``total`` into positive parts, descending."""
    if total == 0:
        yield ()
        return

    def rec(n, mx):
        if n == 0:
            yield ()
            return
        for k in range(min(n, mx), 0, -1):
            for rest in rec(n - k, k):
                yield (k,) + rest

    yield from rec(total, total)


def extension_candidates(A: AbGroup, B: AbGroup) -> list[AbGroup]:
    """Groups ``X`` admitting ``0 -> A -> X -> B -> 0`` (necessary conditions).

    Split when ``Ext^1(B, A) = 0``; otherwise the candidates have rank
    ``rank A + rank B``, contain ``A``, surject onto ``B`` and have torsion
    of the right size (exact when both are finite).
    """
    if ext1(B, A).is_zero:
        return [A + B]
    rank = A.free_rank + B.free_rank
    pa, pb = {}, {}
    for d in A.torsion:
        for p, e in factorize(d).items():
            pa[p] = pa.get(p, 0) + e
    for d in B.torsion:
        for p, e in factorize(d).items():
            pb[p] = pb.get(p, 0) + e
    primes = sorted(set(pa) | set(pb))
    finite = A.is_finite and B.is_finite
    per_prime = []
    for p in primes:
        tot = pa.get(p, 0) + pb.get(p, 0)
        totals = [tot] if finite else range(0, tot + 1)
        opts = []
        for t in totals:
            for part in _prime_partitions(t):
                opts.append([p ** e for e in part])
        per_prime.append(opts)
    out = set()
    for combo in itertools.product(*per_prime):
        X = AbGroup.from_orders(rank, [x for part in combo for x in part])
        if embeds(A, X) and is_quotient(X, B):
            out.add(X)
    return sorted(out, key=order_key)


@dataclass
class FiltrationProblem:
    degree: int
    subquotients: list  # [(p, q, AbGroup | None)] bottom first
    status: str  # forced | ambiguous | unknown
    candidates: list = field(default_factory=list)
    quotient: AbGroup | None = None  # KO_j must surject onto this
    subgroup: AbGroup | None = None  # KO_j must contain this

    def describe(self) -> str:
        sq = ", ".join(f"E_{{{p},{q}}} = {g if g is not None else '?'}" for p, q, g in self.subquotients)
        if self.status == "forced":
            return f"KO_{self.degree}: {sq} -> {self.candidates[0]}"
        if self.status == "ambiguous":
            return f"KO_{self.degree}: {sq} -> one of {{{', '.join(map(str, self.candidates))}}}"
        return f"KO_{self.degree}: {sq} -> unknown"


def filtration_problems(page: SpectralPage) -> list[FiltrationProblem]:
    out = []
    for j in range(8):
        sq = [(p, (j - p) % 8, page.infinity(p, j - p)) for p in range(page.rank + 1)]
        gs = [g for _, _, g in sq]
        if all(g is not None for g in gs):
            nz = [g for g in gs if not g.is_zero]
            if len(nz) <= 1:
                out.append(FiltrationProblem(j, sq, "forced", [nz[0] if nz else ZERO]))
                continue
            if page.rank == 1:
                c = extension_candidates(gs[0], gs[1])
                out.append(FiltrationProblem(j, sq, "forced" if len(c) == 1 else "ambiguous", c))
                continue
            if all(g.is_free for g in gs):
                tot = ZERO
                for g in gs:
                    tot = tot + g
                out.append(FiltrationProblem(j, sq, "forced", [tot]))
                continue
            out.append(FiltrationProblem(j, sq, "unknown"))
            continue
        fp = FiltrationProblem(j, sq, "unknown")
        if page.rank == 1:
            if gs[1] is not None and not gs[1].is_zero:
                fp.quotient = gs[1]
            if gs[0] is not None and not gs[0].is_zero:
                fp.subgroup = gs[0]
        out.append(fp)
    return out


@dataclass
class Assembly:
    ko: list  # per degree: AbGroup | None
    problems: list
    candidates: list = field(default_factory=list)  # complete KO tables
    rejected: list = field(default_factory=list)
    status: str = "unique"  # unique | ambiguous | partial
    note: str = ""
    les_notes: list = field(default_factory=list)

    @property
    def ambiguous(self) -> bool:
        return self.status == "ambiguous"

    def unique(self) -> list:
        if self.status != "unique":
            raise Ambiguous(self.candidates)
        return self.ko


def assemble(page: SpectralPage, ku=None, use_les: bool = True, les_bound: int = 8, max_two_factors: int = 2) -> Assembly:
    """Resolve each degree's filtration; complete with the exact sequence if asked."""
    probs = filtration_problems(page)
    partial: list = []
    for fp in probs:
        if fp.status == "forced":
            partial.append(fp.candidates[0])
        elif fp.status == "ambiguous":
            partial.append(list(fp.candidates))
        else:
            partial.append(None)
    if all(isinstance(x, AbGroup) for x in partial) and not use_les:
        return Assembly(partial, probs)
    if not use_les or ku is None:
        ko = [x if isinstance(x, AbGroup) else None for x in partial]
        return Assembly(ko, probs, status="partial" if None in ko else "unique")
    quot = {fp.degree: fp.quotient for fp in probs if fp.quotient is not None}
    sub = {fp.degree: fp.subgroup for fp in probs if fp.subgroup is not None}
    try:
        res = solve(partial, ku, les_bound, max_two_factors, quot, sub)
    except BoundExhausted:
        raise
    sols = res.solutions
    note = "free-to-free matrix entries bounded by %d in the exact-sequence search" % les_bound if res.bounded else ""
    if len(sols) == 1:
        return Assembly(list(sols[0]), probs, sols, res.rejected, "unique", note, res.notes)
    ko = [sols[0][j] if sols and all(s[j] == sols[0][j] for s in sols) else None for j in range(8)]
    return Assembly(ko, probs, sols, res.rejected, "ambiguous" if sols else "inconsistent", note, res.notes)
