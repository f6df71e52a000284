"""Rank-k graphs as commuting adjacency matrices, rank-1 eventually-periodic
graphs, involutions and the transforms built from them.

Adjacency convention throughout: ``M[v][w]`` counts edges with range ``v``
and source ``w`` (an edge ``w -> v``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .intlin import Matrix, identity, kron, matmul, zeros


class GraphError(ValueError):
    """Structurally malformed graph input."""


@dataclass(frozen=True)
class KGraph:
    rank: int
    vertices: tuple[str, ...]
    adjacency: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self, "adjacency", tuple(tuple(tuple(int(x) for x in r) for r in M) for M in self.adjacency)
        )
        n = len(self.vertices)
        if self.rank < 1:
            raise GraphError("rank must be >= 1")
        if len(set(self.vertices)) != n:
            raise GraphError("duplicate vertex ids")
        if len(self.adjacency) != self.rank:
            raise GraphError(f"expected {self.rank} adjacency matrices, got {len(self.adjacency)}")
        for i, M in enumerate(self.adjacency):
            if len(M) != n or any(len(r) != n for r in M):
                raise GraphError(f"adjacency matrix of color {i + 1} is not {n}x{n}")

    @classmethod
    def from_edges(cls, vertices, edges_per_color) -> KGraph:
        """Build from ``[[source, range, multiplicity], ...]`` lists, one per color."""
        vertices = tuple(vertices)
        idx = {v: i for i, v in enumerate(vertices)}
        mats = []
        for color, edges in enumerate(edges_per_color):
            M = zeros(len(vertices), len(vertices))
            for e in edges:
                if len(e) != 3:
                    raise GraphError(f"color {color + 1}: edge {e!r} is not [source, range, multiplicity]")
                s, r, k = e
                for v in (s, r):
                    if v not in idx:
                        raise GraphError(f"color {color + 1}: unknown vertex {v!r}")
                M[idx[r]][idx[s]] += int(k)
            mats.append(M)
        return cls(len(mats), vertices, mats)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        return self.vertices.index(v)

    def matrix(self, color: int = 0) -> Matrix:
        return [list(r) for r in self.adjacency[color]]

    def edges(self, color: int = 0) -> list[list]:
        V = self.vertices
        return [
            [V[w], V[v], k]
            for v, row in enumerate(self.adjacency[color])
            for w, k in enumerate(row)
            if k
        ]

    def restrict(self, keep) -> KGraph:
        idx = [self.index(v) for v in keep]
        return KGraph(
            self.rank,
            tuple(keep),
            [[[M[i][j] for j in idx] for i in idx] for M in self.adjacency],
        )


@dataclass(frozen=True)
class Ray:
    """One infinite ray of identical period blocks attached to the core.

    Matrices follow the range-by-source convention: ``intra[a][b]`` edges from
    offset ``b`` to offset ``a`` inside a block; ``forward`` edges from block n
    to block n+1; ``backward`` edges from block n+1 to block n;
    ``attach_to_core[c][b]`` edges from offset ``b`` of block 0 to core vertex
    ``c``; ``attach_from_core[a][c]`` edges from core vertex ``c`` into block 0.
    """

    name: str
    period: tuple[str, ...]
    intra: tuple
    forward: tuple
    backward: tuple
    attach_to_core: tuple
    attach_from_core: tuple

    def __post_init__(self):
        for f in ("period", "intra", "forward", "backward", "attach_to_core", "attach_from_core"):
            v = getattr(self, f)
            object.__setattr__(self, f, tuple(v) if f == "period" else tuple(tuple(int(x) for x in r) for r in v))

    @classmethod
    def from_edges(
        cls, name, period, core_vertices, intra=(), forward=(), backward=(), to_core=(), from_core=()
    ) -> Ray:
        """Build a ray from ``[source, range, mult]`` triples of labels.

        ``forward`` edges run from block n to block n+1 and ``backward`` from
        block n+1 to block n; ``to_core`` sources are block-0 offsets and
        ``from_core`` ranges are block-0 offsets.
        """
        period = tuple(period)
        p, c = len(period), len(core_vertices)
        off = {v: i for i, v in enumerate(period)}
        cix = {v: i for i, v in enumerate(core_vertices)}

        def lookup(table, v, what):
            if v not in table:
                raise GraphError(f"ray {name!r}: unknown {what} {v!r}")
            return table[v]

        def mat(edges, rows, cols, rt, ct):
            M = zeros(rows, cols)
            for e in edges:
                s, r, *m = e
                M[lookup(rt[0], r, rt[1])][lookup(ct[0], s, ct[1])] += int(m[0]) if m else 1
            return M

        po, co = (off, "period label"), (cix, "core vertex")
        return cls(
            name,
            period,
            mat(intra, p, p, po, po),
            mat(forward, p, p, po, po),
            mat(backward, p, p, po, po),
            mat(to_core, c, p, co, po),
            mat(from_core, p, c, po, co),
        )


@dataclass(frozen=True)
class EPGraph:
    """Rank-1 graph made of a finite core plus eventually-periodic rays."""

    core: KGraph
    rays: tuple[Ray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(self.rays))
        if self.core.rank != 1:
            raise GraphError("eventually-periodic graphs are rank 1")
        c = self.core.size
        for r in self.rays:
            p = len(r.period)
            if p == 0:
                raise GraphError(f"ray {r.name!r} has an empty period")
            for fname, rows, cols in (
                ("intra", p, p),
                ("forward", p, p),
                ("backward", p, p),
                ("attach_to_core", c, p),
                ("attach_from_core", p, c),
            ):
                M = getattr(r, fname)
                if len(M) != rows or any(len(x) != cols for x in M):
                    raise GraphError(f"ray {r.name!r}: {fname} must be {rows}x{cols}")

    rank = 1

    def vertex_id(self, ray: int, block: int, offset: int) -> str:
        r = self.rays[ray]
        return f"{r.name}[{block}].{r.period[offset]}"

    def window_addresses(self, n: int) -> list:
        """Addresses aligned with ``truncate(n).vertices``.

        Core vertices are addressed by id, ray vertices by ``(ray, block, offset)``.
        """
        out: list = list(self.core.vertices)
        for ri, r in enumerate(self.rays):
            out += [(ri, b, o) for b in range(n) for o in range(len(r.period))]
        return out

    def truncate(self, n: int) -> KGraph:
        """Core plus the first ``n`` blocks of every ray; edges leaving the window dropped."""
        if n < 1:
            raise ValueError("truncation needs at least one period")
        addrs = self.window_addresses(n)
        N = len(addrs)
        pos = {a: i for i, a in enumerate(addrs)}
        M = zeros(N, N)
        C = self.core.matrix()
        for i in range(self.core.size):
            for j in range(self.core.size):
                M[i][j] = C[i][j]
        for ri, r in enumerate(self.rays):
            p = len(r.period)
            for b in range(n):
                for a in range(p):
                    row = pos[(ri, b, a)]
                    for o in range(p):
                        M[row][pos[(ri, b, o)]] += r.intra[a][o]
                        if b + 1 < n:
                            M[row][pos[(ri, b + 1, o)]] += r.backward[a][o]
                        if b >= 1:
                            M[row][pos[(ri, b - 1, o)]] += r.forward[a][o]
                    if b == 0:
                        for c in range(self.core.size):
                            M[row][c] += r.attach_from_core[a][c]
            for c in range(self.core.size):
                for o in range(p):
                    M[c][pos[(ri, 0, o)]] += r.attach_to_core[c][o]
        ids = list(self.core.vertices) + [self.vertex_id(ri, b, o) for (ri, b, o) in addrs[self.core.size:]]
        return KGraph(1, ids, [M])


AnyGraph = Union[KGraph, EPGraph]


@dataclass(frozen=True)
class InvolutionData:
    """Vertex involution with its (fixed, section, image) partition.

    For an :class:`EPGraph`, ``vertex_map`` covers core vertices and
    ``ray_map`` sends each ray index to its image ray (offsets preserved).
    """

    vertex_map: dict
    ray_map: dict = field(default_factory=dict)
    section: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertex_map", dict(self.vertex_map))
        object.__setattr__(self, "ray_map", dict(self.ray_map))

    def __hash__(self):
        return hash((tuple(sorted(self.vertex_map.items())), tuple(sorted(self.ray_map.items())), self.section))

    @classmethod
    def trivial(cls, G: AnyGraph) -> InvolutionData:
        core = G.core if isinstance(G, EPGraph) else G
        rays = {i: i for i in range(len(G.rays))} if isinstance(G, EPGraph) else {}
        return cls({v: v for v in core.vertices}, rays)

    @classmethod
    def from_pairs(cls, G: AnyGraph, pairs=(), ray_pairs=(), section=None) -> InvolutionData:
        core = G.core if isinstance(G, EPGraph) else G
        vm = {v: v for v in core.vertices}
        for a, b in pairs:
            vm[a], vm[b] = b, a
        rm = {i: i for i in range(len(G.rays))} if isinstance(G, EPGraph) else {}
        for a, b in ray_pairs:
            rm[a], rm[b] = b, a
        return cls(vm, rm, tuple(section) if section is not None else None)

    def partition(self, G: AnyGraph) -> tuple[tuple, tuple, tuple]:
        """(fixed, g, h) over core vertex ids; default g = lower-index member of each pair."""
        core = G.core if isinstance(G, EPGraph) else G
        order = {v: i for i, v in enumerate(core.vertices)}
        f = tuple(v for v in core.vertices if self.vertex_map[v] == v)
        if self.section is not None:
            g = tuple(v for v in core.vertices if v in self.section)
        else:
            g = tuple(v for v in core.vertices if self.vertex_map[v] != v and order[v] < order[self.vertex_map[v]])
        h = tuple(self.vertex_map[v] for v in g)
        return f, g, h

    def ray_partition(self) -> tuple[tuple, tuple, tuple]:
        f = tuple(r for r in sorted(self.ray_map) if self.ray_map[r] == r)
        g = tuple(r for r in sorted(self.ray_map) if self.ray_map[r] > r)
        return f, g, tuple(self.ray_map[r] for r in g)

    def on_window(self, G: EPGraph, n: int) -> InvolutionData:
        """Induced involution on ``G.truncate(n)``."""
        vm = dict(self.vertex_map)
        sec = set(self.partition(G)[1])
        for ri, r in enumerate(G.rays):
            rj = self.ray_map.get(ri, ri)
            for b in range(n):
                for o in range(len(r.period)):
                    vid = G.vertex_id(ri, b, o)
                    vm[vid] = G.vertex_id(rj, b, o)
                    if rj > ri:
                        sec.add(vid)
        return InvolutionData(vm, {}, tuple(sorted(sec)))


# ---------------------------------------------------------------------------
# validation


@dataclass
class Report:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    heuristic: bool = False

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(c[1] for c in self.checks)

    def failed(self) -> list[str]:
        return [c[0] for c in self.checks if not c[1]]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "heuristic": self.heuristic,
            "checks": [{"name": n, "ok": o, "detail": d} for n, o, d in self.checks],
        }


def _check_involution(core: KGraph, inv: InvolutionData, rep: Report) -> None:
    vm = inv.vertex_map
    missing = [v for v in core.vertices if v not in vm]
    unknown = [v for v in vm if v not in core.vertices]
    if missing or unknown:
        raise GraphError(f"involution does not match vertex set (missing {missing}, unknown {unknown})")
    bad = [v for v in core.vertices if vm[vm[v]] != v]
    rep.add("involution order", not bad, f"gamma(gamma(v)) != v at {bad}" if bad else "")
    viol = []
    idx = {v: i for i, v in enumerate(core.vertices)}
    for c, M in enumerate(core.adjacency):
        for v in core.vertices:
            for w in core.vertices:
                if M[idx[vm[v]]][idx[vm[w]]] != M[idx[v]][idx[w]]:
                    viol.append((c + 1, v, w))
    rep.add(
        "equivariance",
        not viol,
        f"M(gv,gw) != M(v,w) at color/vertex pairs {viol[:5]}" if viol else "",
    )
    f, g, h = inv.partition(core)
    ok = (
        len(set(f) | set(g) | set(h)) == core.size
        and len(f) + len(g) + len(h) == core.size
        and all(vm[x] == y for x, y in zip(g, h))
    )
    rep.add("partition", ok, "" if ok else f"f={f} g={g} h={h} do not partition the vertices")


def validate(G: AnyGraph, inv: InvolutionData | None = None) -> Report:
    rep = Report()
    if isinstance(G, EPGraph):
        core = G.core
        neg = any(x < 0 for M in core.adjacency for r in M for x in r) or any(
            x < 0
            for r in G.rays
            for M in (r.intra, r.forward, r.backward, r.attach_to_core, r.attach_from_core)
            for row in M
            for x in row
        )
        rep.add("nonnegativity", not neg)
        rep.add("commutation", True, "rank 1")
        sources = []
        C = core.matrix()
        for i, v in enumerate(core.vertices):
            if not any(C[i]) and not any(any(r.attach_to_core[i]) for r in G.rays):
                sources.append(v)
        for r in G.rays:
            for a, lab in enumerate(r.period):
                first = any(r.intra[a]) or any(r.backward[a]) or any(r.attach_from_core[a])
                later = any(r.intra[a]) or any(r.backward[a]) or any(r.forward[a])
                if not first:
                    sources.append(f"{r.name}[0].{lab}")
                if not later:
                    sources.append(f"{r.name}[n>=1].{lab}")
        rep.add("source-free", not sources, f"no incoming edges at {sources}" if sources else "")
        if inv is not None:
            _check_involution(core, inv, rep)
            rm = inv.ray_map
            nr = len(G.rays)
            if sorted(rm) != list(range(nr)) or any(rm[rm[i]] != i for i in rm):
                rep.add("ray involution", False, f"ray map {rm} is not an involution of {nr} rays")
            else:
                bad = []
                idx = {v: i for i, v in enumerate(core.vertices)}
                for i, j in rm.items():
                    a, b = G.rays[i], G.rays[j]
                    if (a.intra, a.forward, a.backward) != (b.intra, b.forward, b.backward):
                        bad.append((a.name, b.name))
                        continue
                    for c in core.vertices:
                        gc = idx[inv.vertex_map[c]]
                        if a.attach_to_core[idx[c]] != b.attach_to_core[gc]:
                            bad.append((a.name, c))
                        if [row[idx[c]] for row in a.attach_from_core] != [row[gc] for row in b.attach_from_core]:
                            bad.append((a.name, c))
                rep.add("ray equivariance", not bad, f"mismatch at {bad}" if bad else "")
        return rep

    neg = [(c + 1) for c, M in enumerate(G.adjacency) if any(x < 0 for r in M for x in r)]
    rep.add("nonnegativity", not neg, f"negative entries in colors {neg}" if neg else "")
    noncomm = []
    for i in range(G.rank):
        for j in range(i + 1, G.rank):
            A, B = G.matrix(i), G.matrix(j)
            if matmul(A, B) != matmul(B, A):
                noncomm.append((i + 1, j + 1))
    rep.add("commutation", not noncomm, f"M_i M_j != M_j M_i for {noncomm}" if noncomm else "")
    sources = [
        f"{v} (color {c + 1})"
        for c, M in enumerate(G.adjacency)
        for i, v in enumerate(G.vertices)
        if not any(M[i])
    ]
    rep.add("source-free", not sources and G.size > 0, f"no incoming edges at {sources}" if sources else "")
    if inv is not None:
        _check_involution(G, inv, rep)
    return rep


# ---------------------------------------------------------------------------
# transforms


def fixed_subgraph(G: AnyGraph, inv: InvolutionData) -> AnyGraph:
    """Restriction of every adjacency matrix to the fixed vertices."""
    f, _, _ = inv.partition(G)
    if isinstance(G, KGraph):
        return G.restrict(f)
    core = G.core.restrict(f)
    idx = [G.core.index(v) for v in f]
    rays = []
    for i, r in enumerate(G.rays):
        if inv.ray_map.get(i, i) != i:
            continue
        rays.append(
            Ray(
                r.name,
                r.period,
                r.intra,
                r.forward,
                r.backward,
                [r.attach_to_core[c] for c in idx],
                [[row[c] for c in idx] for row in r.attach_from_core],
            )
        )
    return EPGraph(core, rays)


def boundary_matrix(M: Matrix) -> Matrix:
    """``I - M^t``."""
    n = len(M)
    return [[int(i == j) - M[j][i] for j in range(n)] for i in range(n)]


def fold(B: Matrix, vertices, inv: InvolutionData, f, g) -> tuple[list, Matrix]:
    """Restrict rows to ``f + g`` and fold each ``g`` column with its image column.

    For ``B = I - M^t`` this is the block matrix
    ``[[B11, 2 B12], [B21, B22 + B23]]``.
    """
    idx = {v: i for i, v in enumerate(vertices)}
    keep = list(f) + list(g)
    gset = set(g)
    out = []
    for a in keep:
        row = []
        for b in keep:
            x = B[idx[a]][idx[b]]
            if b in gset:
                x += B[idx[a]][idx[inv.vertex_map[b]]]
            row.append(x)
        out.append(row)
    return keep, out


def block_decomposition(G: KGraph, inv: InvolutionData, color: int = 0) -> dict:
    """Blocks ``B_ij`` of ``I - M^t`` w.r.t. (f, g, h), with h ordered as gamma(g)."""
    f, g, h = inv.partition(G)
    B = boundary_matrix(G.matrix(color))
    parts = [f, g, h]
    idx = {v: i for i, v in enumerate(G.vertices)}
    return {
        f"B{i + 1}{j + 1}": [[B[idx[a]][idx[b]] for b in parts[j]] for a in parts[i]]
        for i in range(3)
        for j in range(3)
    }


def block_symmetry_violations(G: KGraph, inv: InvolutionData, color: int = 0) -> list[str]:
    """Names of the equivariance identities ``B13 = B12`` etc. that fail."""
    d = block_decomposition(G, inv, color)
    pairs = [("B13", "B12"), ("B31", "B21"), ("B32", "B23"), ("B33", "B22")]
    return [f"{a} != {b}" for a, b in pairs if d[a] != d[b]]


def degree0_matrix(G: AnyGraph, inv: InvolutionData, color: int = 0):
    """Degree-0 real boundary map on ``Z^f + Z^g``.

    For a finite graph returns ``(index, matrix)``; for an eventually-periodic
    graph returns a :class:`~kgraph.relprop.FoldedSystem` window source.
    """
    if isinstance(G, EPGraph):
        from .relprop import FoldedSystem

        return FoldedSystem(G, inv)
    viol = block_symmetry_violations(G, inv, color)
    if viol:
        raise GraphError(f"involution is not equivariant: {', '.join(viol)}")
    f, g, _ = inv.partition(G)
    return fold(boundary_matrix(G.matrix(color)), G.vertices, inv, f, g)


def product(G1: KGraph, G2: KGraph, inv1: InvolutionData | None = None, inv2: InvolutionData | None = None):
    """Cartesian product graph with the coordinatewise involution."""
    if isinstance(G1, EPGraph) or isinstance(G2, EPGraph):
        raise GraphError(
            "products of eventually-periodic graphs are not formed; use the module-level Kunneth product (kunneth)"
        )
    inv1 = inv1 or InvolutionData.trivial(G1)
    inv2 = inv2 or InvolutionData.trivial(G2)
    verts = [f"({v},{w})" for v in G1.vertices for w in G2.vertices]
    I1, I2 = identity(G1.size), identity(G2.size)
    mats = [kron(G1.matrix(i), I2) for i in range(G1.rank)]
    mats += [kron(I1, G2.matrix(j)) for j in range(G2.rank)]
    P = KGraph(G1.rank + G2.rank, verts, mats)
    vm = {f"({v},{w})": f"({inv1.vertex_map[v]},{inv2.vertex_map[w]})" for v in G1.vertices for w in G2.vertices}
    return P, InvolutionData(vm)


# ---------------------------------------------------------------------------
# simplicity


def _hereditary_ok(M: Matrix, names) -> tuple[bool, str]:
    n = len(M)
    # v Lambda w nonempty <=> path from w to v: follow edges backwards
    preds = [[w for w in range(n) if M[v][w]] for v in range(n)]
    for v in range(n):
        seen = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for w in preds[x]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != n:
            return False, f"hereditary closure of {names[v]} misses {n - len(seen)} vertices"
    return True, ""


def _cycles_without_entrance(M: Matrix, names) -> list[list[str]]:
    n = len(M)
    indeg = [sum(M[v]) for v in range(n)]
    pred = {v: next(w for w in range(n) if M[v][w]) for v in range(n) if indeg[v] == 1}
    found, done = [], set()
    for start in pred:
        path, pos = [], {}
        v = start
        while v in pred and v not in done and v not in pos:
            pos[v] = len(path)
            path.append(v)
            v = pred[v]
        if v in pos:
            found.append([names[x] for x in path[pos[v]:]])
        done.update(path)
    return found


def simplicity_certificate(G: AnyGraph, periods: int = 3) -> Report:
    """Combinatorial simplicity certificate for rank-1 graphs.

    (a) every vertex has hereditary closure equal to the whole vertex set;
    (b) every cycle has an entrance.  Eventually-periodic graphs are checked
    on a finite truncation and the report is flagged heuristic.
    """
    rep = Report()
    if isinstance(G, EPGraph):
        H = G.truncate(periods)
        rep.heuristic = True
    else:
        if G.rank != 1:
            raise GraphError("simplicity certificate is for rank-1 graphs")
        H = G
    M, names = H.matrix(), H.vertices
    ok, detail = _hereditary_ok(M, names)
    rep.add("no nontrivial hereditary subsets", ok, detail)
    bad = _cycles_without_entrance(M, names)
    rep.add("every cycle has an entrance", not bad, f"cycles without entrance: {bad}" if bad else "")
    if rep.heuristic:
        rep.add("truncation-based, not a proof", True, f"checked on core + {periods} periods")
    return rep


# ---------------------------------------------------------------------------
# file format

GRAPH_FIELDS = {"rank", "vertices", "edges", "involution", "rays", "name", "description"}
INVOLUTION_FIELDS = {"fixed", "pairs", "ray_pairs", "section"}
RAY_FIELDS = {"name", "period", "intra", "forward", "backward", "attach_to_core", "attach_from_core"}


def _require(cond, path, msg):
    if not cond:
        raise GraphError(f"{path}: {msg}")


def _check_fields(obj, allowed, path, required=()):
    _require(isinstance(obj, dict), path, "expected an object")
    unknown = sorted(set(obj) - allowed)
    _require(not unknown, path, f"unknown field(s) {', '.join(unknown)}")
    for f in required:
        _require(f in obj, path, f"missing field {f!r}")


def _int_matrix(M, rows, cols, path):
    _require(isinstance(M, list) and len(M) == rows, path, f"expected {rows} rows")
    for i, r in enumerate(M):
        _require(isinstance(r, list) and len(r) == cols, f"{path}[{i}]", f"expected {cols} entries")
        for j, x in enumerate(r):
            _require(isinstance(x, int) and not isinstance(x, bool), f"{path}[{i}][{j}]", "expected an integer")
    return M


def load_graph(doc: dict) -> tuple[AnyGraph, InvolutionData]:
    """Parse a graph document; returns the graph and its involution (trivial if absent)."""
    _check_fields(doc, GRAPH_FIELDS, "$", ("rank", "vertices", "edges"))
    rank = doc["rank"]
    _require(isinstance(rank, int) and rank >= 1, "$.rank", "expected an integer >= 1")
    verts = doc["vertices"]
    _require(isinstance(verts, list) and all(isinstance(v, str) for v in verts), "$.vertices", "expected strings")
    edges = doc["edges"]
    _require(isinstance(edges, list) and len(edges) == rank, "$.edges", f"expected {rank} color lists")
    for c, es in enumerate(edges):
        _require(isinstance(es, list), f"$.edges[{c}]", "expected a list of edges")
        for k, e in enumerate(es):
            p = f"$.edges[{c}][{k}]"
            _require(isinstance(e, list) and len(e) == 3, p, "expected [source, range, multiplicity]")
            _require(e[0] in verts and e[1] in verts, p, f"unknown vertex in {e!r}")
            _require(isinstance(e[2], int) and not isinstance(e[2], bool), p, "multiplicity must be an integer")
    core = KGraph.from_edges(verts, edges)
    G: AnyGraph = core
    names: list = []
    if "rays" in doc:
        _require(rank == 1, "$.rays", "rays are only allowed for rank 1")
        _require(isinstance(doc["rays"], list), "$.rays", "expected a list")
        rays = []
        for i, r in enumerate(doc["rays"]):
            p = f"$.rays[{i}]"
            _check_fields(r, RAY_FIELDS, p, tuple(RAY_FIELDS))
            per = r["period"]
            _require(isinstance(per, list) and per and all(isinstance(x, str) for x in per), f"{p}.period", "expected labels")
            k, c = len(per), len(verts)
            for f, rows, cols in (
                ("intra", k, k),
                ("forward", k, k),
                ("backward", k, k),
                ("attach_to_core", c, k),
                ("attach_from_core", k, c),
            ):
                _int_matrix(r[f], rows, cols, f"{p}.{f}")
            rays.append(Ray(r["name"], per, r["intra"], r["forward"], r["backward"], r["attach_to_core"], r["attach_from_core"]))
            names.append(r["name"])
        _require(len(set(names)) == len(names), "$.rays", "duplicate ray names")
        G = EPGraph(core, rays)
    inv_doc = doc.get("involution")
    if inv_doc is None:
        return G, InvolutionData.trivial(G)
    _check_fields(inv_doc, INVOLUTION_FIELDS, "$.involution")
    pairs = inv_doc.get("pairs", [])
    for k, pr in enumerate(pairs):
        _require(isinstance(pr, list) and len(pr) == 2 and all(v in verts for v in pr), f"$.involution.pairs[{k}]", "expected two vertex ids")
    paired = [v for pr in pairs for v in pr]
    _require(len(set(paired)) == len(paired), "$.involution.pairs", "a vertex appears in two pairs")
    if "fixed" in inv_doc:
        fixed = inv_doc["fixed"]
        _require(set(fixed) == set(verts) - set(paired), "$.involution.fixed", "fixed set must be the vertices outside pairs")
    ray_pairs = []
    for k, pr in enumerate(inv_doc.get("ray_pairs", [])):
        _require(isinstance(pr, list) and len(pr) == 2 and all(x in names for x in pr), f"$.involution.ray_pairs[{k}]", "expected two ray names")
        ray_pairs.append((names.index(pr[0]), names.index(pr[1])))
    section = inv_doc.get("section")
    if section is not None:
        _require(all(any(v in pr for pr in pairs) for v in section), "$.involution.section", "section must pick from pairs")
        _require(all(sum(v in section for v in pr) == 1 for pr in pairs), "$.involution.section", "section must pick one vertex per pair")
    inv = InvolutionData.from_pairs(G, [tuple(p) for p in pairs], ray_pairs, section)
    return G, inv


def dump_graph(G: AnyGraph, inv: InvolutionData | None = None, name: str | None = None) -> dict:
    core = G.core if isinstance(G, EPGraph) else G
    doc: dict = {}
    if name:
        doc["name"] = name
    doc["rank"] = core.rank
    doc["vertices"] = list(core.vertices)
    doc["edges"] = [core.edges(i) for i in range(core.rank)]
    if isinstance(G, EPGraph) and G.rays:
        doc["rays"] = [
            {
                "name": r.name,
                "period": list(r.period),
                **{f: [list(x) for x in getattr(r, f)] for f in ("intra", "forward", "backward", "attach_to_core", "attach_from_core")},
            }
            for r in G.rays
        ]
    if inv is not None:
        pairs = sorted({tuple(sorted((v, w))) for v, w in inv.vertex_map.items() if v != w})
        d: dict = {"fixed": [v for v in core.vertices if inv.vertex_map[v] == v], "pairs": [list(p) for p in pairs]}
        rps = sorted({tuple(sorted((a, b))) for a, b in inv.ray_map.items() if a != b})
        if rps:
            d["ray_pairs"] = [[G.rays[a].name, G.rays[b].name] for a, b in rps]
        if inv.section is not None:
            d["section"] = list(inv.section)
        doc["involution"] = d
    return doc
