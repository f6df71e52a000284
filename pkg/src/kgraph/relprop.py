"""Zero-vertex / null-vertex propagation for cokernels and kernels of
``I - M^t``-style relation systems, including eventually-periodic infinite ones.

A relation system is a family of integer linear relations among generators.
In ``coker`` mode each relation is a column of ``B`` and generators are the
classes ``[p_v]``; in ``ker`` mode each relation is a row of ``B`` and
generators are the values ``alpha(v)``.  Saturation repeatedly applies

* a relation reduced to ``+-[u]`` marks ``u`` zero (coker) or null (ker);
* a relation reduced to ``n [u]`` with ``|n| >= 2`` marks ``u`` null in ker
  mode over Z (``alpha(u)`` is an integer) and records torsion in coker mode;
* a relation reduced to two generators, one with coefficient ``+-1``, is used
  as a substitution eliminating that generator.

Every step is a Tietze move, so the cokernel (kernel) of the residual system
equals that of the original.  The residual is finished by Smith normal form.

Infinite systems are handled on growing windows (core plus ``n`` period
blocks per ray).  Only relations whose support lies inside the window are
used.  For each ray we look for a run of at least two all-zero blocks
``s..t`` ending within two blocks of the last complete one (the relation
that zeroes block ``k`` may sit in block ``k + 1`` or ``k + 2``).  A cut
``s`` is accepted once two consecutive windows produce it.  Soundness rests
on translation invariance: the relations of block ``k + 1`` are those of
block ``k`` shifted, so the derivation that zeroes one stable block zeroes
the next, and every block from ``s`` on is zero.  Generators from ``s`` on
are then deleted; the remaining relations, restricted, present the same
group.
This is a semi-decision procedure; failure is reported as
:class:`NotStabilized`, never as a wrong group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import EPGraph, InvolutionData, KGraph, boundary_matrix, fold
from .intlin import AbGroup, Matrix, coker_ker, gf2_coker_ker, gf2_rank, kernel_basis

COKER, KER = "coker", "ker"


class NotStabilized(RuntimeError):
    def __init__(self, max_periods: int, detail: str = ""):
        self.max_periods = max_periods
        super().__init__(f"marking did not stabilize within {max_periods} periods{': ' + detail if detail else ''}")


@dataclass
class RelationSystem:
    generators: list
    relations: list  # [(relation address, {generator: coefficient})]
    mode: str = COKER
    modulus: int = 0  # 0 for Z, 2 for Z/2
    labels: dict = field(default_factory=dict)

    def label(self, a) -> str:
        return self.labels.get(a, str(a))

    @classmethod
    def from_matrix(cls, B: Matrix, addresses, mode=COKER, modulus=0, complete=None, labels=None):
        n = len(addresses)
        rels = []
        for k, a in enumerate(addresses):
            if complete is not None and not complete[k]:
                continue
            if mode == COKER:
                coeffs = {addresses[i]: B[i][k] for i in range(n)}
            else:
                coeffs = {addresses[j]: B[k][j] for j in range(n)}
            if modulus:
                coeffs = {g: c % modulus for g, c in coeffs.items()}
            rels.append((a, {g: c for g, c in coeffs.items() if c}))
        return cls(list(addresses), rels, mode, modulus, dict(labels or {}))

    def matrix(self, gens=None) -> Matrix:
        """Relation matrix over ``gens``: columns are relations (coker) or rows (ker)."""
        gens = self.generators if gens is None else gens
        rows = [[rel.get(g, 0) for g in gens] for _, rel in self.relations]
        if self.mode == KER:
            return rows
        return [[r[i] for r in rows] for i in range(len(gens))]


@dataclass
class Marking:
    system: RelationSystem
    status: dict  # generator -> "zero" | "free" | ("subst", u, k)
    torsion: dict  # generator -> list of n with n [u] = 0 recorded
    residual: list  # [(relation address, {free generator: coefficient})]
    log: list

    @property
    def zero(self) -> list:
        return [g for g in self.system.generators if self.status[g] == "zero"]

    @property
    def survivors(self) -> list:
        """Generators not marked zero/null (free or expressed by substitution)."""
        return [g for g in self.system.generators if self.status[g] != "zero"]

    @property
    def free(self) -> list:
        return [g for g in self.system.generators if self.status[g] == "free"]

    def expression(self, g) -> dict:
        """``g`` as an integer combination of free generators."""
        st = self.status[g]
        if st == "zero":
            return {}
        if st == "free":
            return {g: 1}
        _, u, k = st
        return {x: k * c for x, c in self.expression(u).items()}

    def residual_matrix(self) -> Matrix:
        sub = RelationSystem(self.free, self.residual, self.system.mode, self.system.modulus)
        return sub.matrix()

    def groups(self) -> tuple[AbGroup, list[list[int]] | int]:
        """``(group, kernel data)``: the residual cokernel or kernel.

        In ker mode over Z the second item is a basis of the kernel expressed
        on all generators; over Z/2 it is the kernel dimension.
        """
        S = self.system
        free = self.free
        M = self.residual_matrix()
        if S.mode == COKER:
            if S.modulus == 2:
                g, _ = gf2_coker_ker(M, len(self.residual))
                return g, []
            g, _ = coker_ker(M, len(self.residual))
            return g, []
        if S.modulus == 2:
            d = len(free) - gf2_rank(M)
            return AbGroup.from_orders(0, [2] * d), d
        basis = kernel_basis(M, len(free)) if free else []
        full = []
        for vec in basis:
            val = dict(zip(free, vec))
            full.append([sum(c * val[x] for x, c in self.expression(g).items()) for g in S.generators])
        return AbGroup(len(basis)), full


def saturate(S: RelationSystem) -> Marking:
    """Apply the propagation rules to a fixed point (deterministic order)."""
    mod = S.modulus
    cur = {rid: dict(rel) for rid, rel in S.relations}
    order = [rid for rid, _ in S.relations]
    live = set(order)
    status = {g: "free" for g in S.generators}
    torsion: dict = {}
    torsion_seen: set = set()
    log: list[str] = []
    gpos = {g: i for i, g in enumerate(S.generators)}
    occurs: dict = {}
    for rid in order:
        for g in cur[rid]:
            occurs.setdefault(g, set()).add(rid)
    word = "ZERO" if S.mode == COKER else "NULL"

    def kill(u, rid):
        status[u] = "zero"
        log.append(f"MARK {S.label(u)} {word} BY {S.label(rid)}")
        for r in occurs.pop(u, ()):
            cur[r].pop(u, None)

    def substitute(v, u, k, rid):
        status[v] = ("subst", u, k)
        log.append(f"SUBST {S.label(v)} = {k}*{S.label(u)} BY {S.label(rid)}")
        for r in occurs.pop(v, ()):
            c = cur[r].pop(v, 0)
            if r == rid or not c:
                continue
            x = cur[r].get(u, 0) + k * c
            if mod:
                x %= mod
            if x:
                cur[r][u] = x
                occurs.setdefault(u, set()).add(r)
            else:
                cur[r].pop(u, None)
                occurs.get(u, set()).discard(r)

    changed = True
    while changed:
        changed = False
        # single-generator rules to a fixed point
        progress = True
        while progress:
            progress = False
            for rid in order:
                if rid not in live:
                    continue
                rel = cur[rid]
                if not rel:
                    live.discard(rid)
                    continue
                if len(rel) != 1:
                    continue
                (u, c), = rel.items()
                if mod or abs(c) == 1 or S.mode == KER:
                    live.discard(rid)
                    kill(u, rid)
                    progress = changed = True
                elif (rid, abs(c)) not in torsion_seen:
                    torsion_seen.add((rid, abs(c)))
                    torsion.setdefault(u, []).append(abs(c))
                    log.append(f"MARK {S.label(u)} TORSION({abs(c)}) BY {S.label(rid)}")
        # one substitution, then back to the single-generator rules
        for rid in order:
            if rid not in live:
                continue
            rel = cur[rid]
            if len(rel) != 2:
                continue
            a, b = sorted(rel, key=gpos.__getitem__)
            if abs(rel[b]) == 1 or mod:
                v, u = b, a
            elif abs(rel[a]) == 1:
                v, u = a, b
            else:
                continue
            k = (-rel[u] * rel[v]) % mod if mod else -rel[u] * rel[v]
            live.discard(rid)
            substitute(v, u, k, rid)
            changed = True
            break

    # substituted generators whose chain ends in a zero generator are zero
    def resolve(g, seen=()):
        st = status[g]
        if isinstance(st, tuple):
            return resolve(st[1], seen + (g,))
        return st

    for g in S.generators:
        st = status[g]
        if isinstance(st, tuple) and resolve(g) == "zero":
            status[g] = "zero"
            log.append(f"MARK {S.label(g)} {word} BY SUBST {S.label(g)}")
    for g, st in list(status.items()):
        if isinstance(st, tuple):
            # collapse chains onto free generators
            k, u = st[2], st[1]
            while isinstance(status[u], tuple):
                k, u = k * status[u][2], status[u][1]
            status[g] = ("subst", u, k % mod if mod else k)

    residual = [(rid, dict(cur[rid])) for rid in order if rid in live and cur[rid]]
    return Marking(S, status, torsion, residual, log)


def replay(marking: Marking) -> bool:
    """Re-derive every logged ZERO/NULL mark from the original relations.

    Replays substitutions and kills in log order against a fresh copy of the
    relations and checks that each justifying relation has the claimed form.
    """
    S = marking.system
    mod = S.modulus
    cur = {S.label(rid): dict(rel) for rid, rel in S.relations}
    by_label = {S.label(g): g for g in S.generators}
    zero: set = set()
    subst: dict = {}

    def reduce(rel):
        out: dict = {}
        for g, c in rel.items():
            for x, k in expand(g).items():
                out[x] = out.get(x, 0) + c * k
        return {g: (c % mod if mod else c) for g, c in out.items() if (c % mod if mod else c)}

    def expand(g):
        if g in zero:
            return {}
        if g in subst:
            u, k = subst[g]
            return {x: k * c for x, c in expand(u).items()}
        return {g: 1}

    for line in marking.log:
        parts = line.split()
        if parts[0] == "SUBST":
            v = by_label[parts[1]]
            k, u = parts[3].split("*", 1)
            rel = reduce(cur[parts[5]])
            u = by_label[u]
            if set(rel) != {v, u} or abs(rel[v]) != 1 and not mod:
                return False
            subst[v] = (u, int(k))
        elif parts[0] == "MARK":
            g = by_label[parts[1]]
            if parts[3:5] == ["BY", "SUBST"]:
                if expand(g):
                    return False
                zero.add(g)
                continue
            rel = reduce(cur[parts[4]])
            if parts[2].startswith("TORSION"):
                if list(rel) != [g]:
                    return False
                continue
            if list(rel) != [g]:
                return False
            c = rel[g]
            if not (mod or abs(c) == 1 or S.mode == KER):
                return False
            zero.add(g)
    return all((g in zero) == (marking.status[g] == "zero") for g in S.generators)


# ---------------------------------------------------------------------------
# window sources


class GraphSystem:
    """``I - M^t`` of a finite or eventually-periodic rank-1 graph."""

    def __init__(self, G, color: int = 0):
        self.G = G
        self.color = color

    @property
    def periodic(self) -> bool:
        return isinstance(self.G, EPGraph) and bool(self.G.rays)

    def window(self, n: int):
        G = self.G
        if isinstance(G, KGraph):
            B = boundary_matrix(G.matrix(self.color))
            return list(G.vertices), B, [True] * G.size, {}
        T = G.truncate(n)
        addrs = G.window_addresses(n)
        labels = {a: v for a, v in zip(addrs, T.vertices)}
        complete = [not isinstance(a, tuple) or a[1] < n - 1 for a in addrs]
        return addrs, boundary_matrix(T.matrix()), complete, labels


class FoldedSystem:
    """Degree-0 real boundary ``[[B11, 2B12], [B21, B22 + B23]]`` of an
    eventually-periodic graph with involution."""

    def __init__(self, G: EPGraph, inv: InvolutionData):
        self.G = G
        self.inv = inv

    @property
    def periodic(self) -> bool:
        return bool(self.G.rays)

    def window(self, n: int):
        G = self.G
        T = G.truncate(n)
        addrs = G.window_addresses(n)
        by_id = dict(zip(T.vertices, addrs))
        winv = self.inv.on_window(G, n)
        f, g, _ = winv.partition(T)
        keep, Bp = fold(boundary_matrix(T.matrix()), T.vertices, winv, f, g)
        kaddrs = [by_id[v] for v in keep]
        labels = {by_id[v]: v for v in keep}
        complete = [not isinstance(a, tuple) or a[1] < n - 1 for a in kaddrs]
        return kaddrs, Bp, complete, labels

    def finite_matrix(self):
        """Index and matrix when the graph has no rays."""
        addrs, B, _, _ = self.window(1)
        return addrs, B


class MatrixSystem:
    """A finite square relation matrix with named generators."""

    periodic = False

    def __init__(self, addresses, B: Matrix):
        self.addresses = list(addresses)
        self.B = B

    def window(self, n: int):
        return self.addresses, self.B, [True] * len(self.addresses), {}


@dataclass
class EPResult:
    coker: AbGroup
    ker: AbGroup
    log: list
    periods: int
    stable_from: dict
    markings: dict  # mode -> Marking on the reduced system
    kernel_vectors: list

    def log_text(self) -> str:
        return "\n".join(self.log)


def _stable_blocks(marking: Marking, n: int, lag: int = 2):
    """Per ray: start ``s`` of a run of at least two all-zero blocks ending at
    block ``t`` with ``n - 2 - t <= lag``; ``None`` if some ray has no such run.

    The lag allows for the derivation of block ``k`` using relations of block
    ``k + 1`` or ``k + 2``, which are incomplete near the window edge.
    """
    zero_blocks: dict = {ri: {} for ri in {g[0] for g in marking.system.generators if isinstance(g, tuple)}}
    for g in marking.system.generators:
        if isinstance(g, tuple):
            ri, b, _ = g
            zero_blocks[ri][b] = zero_blocks[ri].get(b, True) and marking.status[g] == "zero"
    out = {}
    for ri, blocks in zero_blocks.items():
        t = n - 2
        while t >= 0 and not blocks.get(t, False) and n - 2 - t < lag:
            t -= 1
        if t < 0 or not blocks.get(t, False):
            return None
        s = t
        while s - 1 >= 0 and blocks.get(s - 1, False):
            s -= 1
        if t - s < 1:
            return None
        out[ri] = s
    return out


def _reduced(addrs, B, complete, labels, mode, modulus, cut):
    """Finite system on core + blocks below ``cut[ray]``; later blocks set to zero."""
    keep = [i for i, a in enumerate(addrs) if not isinstance(a, tuple) or a[1] < cut.get(a[0], 0)]
    gens = [addrs[i] for i in keep]
    rels = []
    for k, a in enumerate(addrs):
        if not complete[k]:
            continue
        if mode == COKER:
            coeffs = {addrs[i]: B[i][k] for i in keep}
        else:
            coeffs = {addrs[j]: B[k][j] for j in keep}
        if modulus:
            coeffs = {g: c % modulus for g, c in coeffs.items()}
        coeffs = {g: c for g, c in coeffs.items() if c}
        if coeffs:
            rels.append((a, coeffs))
    return RelationSystem(gens, rels, mode, modulus, labels)


def ep_coker_ker(source, modulus: int = 0, max_periods: int = 16) -> EPResult:
    """Cokernel and kernel of a (possibly eventually-periodic) relation source.

    ``source`` is a :class:`GraphSystem` or :class:`FoldedSystem`.  Finite
    sources are handled in a single pass.
    """
    if not getattr(source, "periodic", False):
        addrs, B, complete, labels = source.window(1)
        out = {}
        log = []
        for mode in (COKER, KER):
            mk = saturate(RelationSystem.from_matrix(B, addrs, mode, modulus, complete, labels))
            out[mode] = mk
            log += [f"# {mode} mode"] + mk.log
        coker, _ = out[COKER].groups()
        ker, vecs = out[KER].groups()
        return EPResult(coker, ker, log, 0, {}, out, vecs if isinstance(vecs, list) else [])

    stable: dict = {}
    results: dict = {}
    window_logs: dict = {}
    for mode in (COKER, KER):
        prev = None
        for n in range(3, max_periods + 1):
            addrs, B, complete, labels = source.window(n)
            S = RelationSystem.from_matrix(B, addrs, mode, modulus, complete, labels)
            mk = saturate(S)
            cut = _stable_blocks(mk, n)
            # accept a cut only once the next window reproduces it
            confirmed = cut is not None and cut == prev
            prev = cut
            if confirmed:
                red = _reduced(addrs, B, complete, labels, mode, modulus, cut)
                rmk = saturate(red)
                results[mode] = (n, cut, rmk)
                window_logs[mode] = mk.log
                break
        else:
            raise NotStabilized(max_periods, f"{mode} mode")
    log = []
    for mode in (COKER, KER):
        n, cut, _ = results[mode]
        log.append(f"# {mode} mode: window of {n} periods, rays zero from blocks {cut}")
        log += window_logs[mode]
    coker, _ = results[COKER][2].groups()
    ker, vecs = results[KER][2].groups()
    periods = max(results[COKER][0], results[KER][0])
    return EPResult(
        coker,
        ker,
        log,
        periods,
        {m: results[m][1] for m in results},
        {m: results[m][2] for m in results},
        vecs if isinstance(vecs, list) else [],
    )


def matrix_coker_ker(addresses, B: Matrix, modulus: int = 0) -> EPResult:
    return ep_coker_ker(MatrixSystem(addresses, B), modulus)


def graph_coker_ker(G, modulus: int = 0, max_periods: int = 16) -> EPResult:
    """``coker`` / ``ker`` of ``I - M^t`` for a rank-1 graph."""
    return ep_coker_ker(GraphSystem(G), modulus, max_periods)
