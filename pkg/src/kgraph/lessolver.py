"""Rule-based reasoning on the 8-periodic long exact sequence

    ... -> KU_{k+2} --L_k--> KO_k --eta_k--> KO_{k+1} --c_{k+1}--> KU_{k+1} --L_{k-1}--> KO_{k-1} -> ...

where ``L_k = r beta^{-1}``.  The cycle has 24 arrows (eight each of L, eta, c).

``deduce`` refines per-arrow facts (zero / injective / surjective) and node
groups with a fixed rule set; ``verify`` looks for explicit matrices making
the cycle exact; ``solve`` enumerates completions of a partial KO table.

Rules (trace lines ``RULE R<k> AT i=<deg>: ...``):

R1  KU_{i+1} = 0  =>  eta_i surjective
R2  KU_{i+1} = 0  =>  eta_{i-1} injective
R3  eta^3 = 0 (three surjective etas kill the last target, and variants)
R4  exactness: incoming zero <=> outgoing injective; incoming onto <=> outgoing zero
R5  bookkeeping: zero groups, embeddings/quotients, equal finite orders, isomorphisms
R6  a map from a finite group to a torsion-free group is zero
R7  2 eta = 0: eta injective/surjective forces elementary 2-groups
R8  rationally the sequence splits: rank KU_j = rank KO_j + rank KO_{j-2}
R9  at odd primes rc = 2 is invertible: odd(KU_j) = odd(KO_j) + odd(KO_{j-2})
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .intlin import ZERO, AbGroup, embeds, hermite_rows, is_quotient, kernel_basis

ETA, C, L = "eta", "c", "L"
SYMBOL = {ETA: "η", C: "c", L: "L"}

CYCLE: list[tuple[str, int]] = []
for _t in range(8):
    _k = (-_t) % 8
    CYCLE += [(L, _k), (ETA, _k), (C, (_k + 1) % 8)]
del _t, _k


def source(a):
    kind, k = a
    return ("KU", k % 2) if kind == L else ("KO", k)


def target(a):
    kind, k = a
    if kind == L:
        return ("KO", k)
    if kind == ETA:
        return ("KO", (k + 1) % 8)
    return ("KU", k % 2)


def aname(a) -> str:
    return f"{SYMBOL[a[0]]}_{a[1]}"


def nname(n) -> str:
    return f"{n[0]}_{n[1]}"


def _elem2(g: AbGroup) -> bool:
    return g.free_rank == 0 and all(d == 2 for d in g.torsion)


def _odd_part(g: AbGroup) -> AbGroup:
    out = []
    for d in g.torsion:
        while d % 2 == 0:
            d //= 2
        out.append(d)
    return AbGroup.from_orders(0, out)


def _two_part(g: AbGroup) -> AbGroup:
    return AbGroup.from_orders(0, [math.gcd(d, 2 ** d.bit_length()) for d in g.torsion])


class Contradiction(Exception):
    def __init__(self, witness: str, trace=()):
        self.witness = witness
        self.trace = list(trace)
        super().__init__(witness)


class BoundExhausted(RuntimeError):
    def __init__(self, msg: str, solutions=()):
        self.solutions = list(solutions)
        super().__init__(msg)


@dataclass
class LESState:
    groups: dict  # ("KO", j) / ("KU", j) -> AbGroup | None
    props: dict = field(default_factory=lambda: {a: set() for a in CYCLE})
    elem2: set = field(default_factory=set)
    trace: list = field(default_factory=list)

    @classmethod
    def from_groups(cls, ko, ku) -> LESState:
        if len(ko) != 8 or len(ku) not in (2, 8):
            raise ValueError("need 8 KO entries and 2 KU entries")
        g = {("KO", j): ko[j] for j in range(8)}
        g.update({("KU", j): ku[j] for j in range(2)})
        return cls(g)

    def copy(self) -> LESState:
        return LESState(dict(self.groups), {a: set(p) for a, p in self.props.items()}, set(self.elem2), list(self.trace))

    @property
    def ko(self) -> list:
        return [self.groups[("KO", j)] for j in range(8)]

    @property
    def ku(self) -> list:
        return [self.groups[("KU", j)] for j in range(2)]

    def prop(self, a) -> str:
        p = self.props[a]
        if "zero" in p:
            return "zero"
        if {"inj", "surj"} <= p:
            return "bijective"
        if "inj" in p:
            return "injective"
        if "surj" in p:
            return "surjective"
        return "unknown"


class _Deducer:
    def __init__(self, st: LESState):
        self.st = st
        self.changed = False

    def g(self, node):
        return self.st.groups[node]

    def log(self, rule, deg, text):
        self.st.trace.append(f"RULE {rule} AT i={deg}: {text}")

    def fail(self, text):
        raise Contradiction(text, self.st.trace)

    def set_prop(self, a, p, rule, why):
        if p in self.st.props[a]:
            return
        self.st.props[a].add(p)
        self.changed = True
        word = {"zero": "zero", "inj": "injective", "surj": "surjective"}[p]
        self.log(rule, a[1], f"{aname(a)} {word} ({why})")

    def set_group(self, node, G, rule, why):
        cur = self.g(node)
        if cur is None:
            self.st.groups[node] = G
            self.changed = True
            self.log(rule, node[1], f"{nname(node)} = {G} ({why})")
        elif cur != G:
            self.fail(f"{nname(node)} = {cur} but {why} forces {G}")

    def run(self):
        while True:
            self.changed = False
            self.r1_r2()
            self.r4()
            self.r3()
            self.r5()
            self.r6()
            self.r7()
            if not self.changed:
                break
        self.r8_r9()

    def r1_r2(self):
        for i in range(8):
            ku = self.g(("KU", (i + 1) % 2))
            if ku is not None and ku.is_zero:
                self.set_prop((ETA, i), "surj", "R1", f"KU_{(i + 1) % 8} = 0")
                self.set_prop((ETA, (i - 1) % 8), "inj", "R2", f"KU_{(i + 1) % 8} = 0")

    def r4(self):
        P = self.st.props
        for n in range(24):
            f, h = CYCLE[n], CYCLE[(n + 1) % 24]
            x = nname(target(f))
            if "zero" in P[f]:
                self.set_prop(h, "inj", "R4", f"ker {aname(h)} = im {aname(f)} = 0 at {x}")
            if "inj" in P[h]:
                self.set_prop(f, "zero", "R4", f"im {aname(f)} = ker {aname(h)} = 0 at {x}")
            if "surj" in P[f]:
                self.set_prop(h, "zero", "R4", f"ker {aname(h)} = im {aname(f)} = {x}")
            if "zero" in P[h]:
                self.set_prop(f, "surj", "R4", f"im {aname(f)} = ker {aname(h)} = {x}")

    def r3(self):
        P = self.st.props
        for k in range(8):
            a, b, c = (ETA, k), (ETA, (k + 1) % 8), (ETA, (k + 2) % 8)
            why = f"{aname(c)}{aname(b)}{aname(a)} = 0"
            if "surj" in P[a] and "surj" in P[b]:
                self.set_prop(c, "zero", "R3", why)
            if "inj" in P[b] and "inj" in P[c]:
                self.set_prop(a, "zero", "R3", why)
            if "surj" in P[a] and "inj" in P[c]:
                self.set_prop(b, "zero", "R3", why)

    def r5(self):
        P = self.st.props
        for a in CYCLE:
            s, t = source(a), target(a)
            gs, gt = self.g(s), self.g(t)
            if gs is not None and gs.is_zero:
                self.set_prop(a, "zero", "R5", f"{nname(s)} = 0")
                self.set_prop(a, "inj", "R5", f"{nname(s)} = 0")
            if gt is not None and gt.is_zero:
                self.set_prop(a, "zero", "R5", f"{nname(t)} = 0")
                self.set_prop(a, "surj", "R5", f"{nname(t)} = 0")
            p = P[a]
            if "zero" in p and "inj" in p:
                self.set_group(s, ZERO, "R5", f"{aname(a)} zero and injective")
            if "zero" in p and "surj" in p:
                self.set_group(t, ZERO, "R5", f"{aname(a)} zero and surjective")
            if {"inj", "surj"} <= p:
                if gs is not None and gt is None:
                    self.set_group(t, gs, "R5", f"{aname(a)} bijective")
                elif gt is not None and gs is None:
                    self.set_group(s, gt, "R5", f"{aname(a)} bijective")
                elif gs is not None and gs != gt:
                    self.fail(f"{aname(a)} bijective but {nname(s)} = {gs}, {nname(t)} = {gt}")
            gs, gt = self.g(s), self.g(t)
            if gs is None or gt is None:
                continue
            if "inj" in p and not embeds(gs, gt):
                self.fail(f"{aname(a)} injective but {gs} does not embed in {gt}")
            if "surj" in p and not is_quotient(gs, gt):
                self.fail(f"{aname(a)} surjective but {gt} is not a quotient of {gs}")
            if gs.is_finite and gs.order == gt.order:
                if "inj" in p and "surj" not in p:
                    self.set_prop(a, "surj", "R5", f"injective between groups of order {gs.order}")
                if "surj" in p and "inj" not in p:
                    self.set_prop(a, "inj", "R5", f"surjective between groups of order {gs.order}")
                if {"inj", "surj"} <= P[a] and (a, "bij") not in self.st.elem2:
                    self.st.elem2.add((a, "bij"))
                    self.log("R5", a[1], f"{aname(a)} bijective ({gs} -> {gt})")

    def r6(self):
        for a in CYCLE:
            gs, gt = self.g(source(a)), self.g(target(a))
            if gs is not None and gt is not None and gs.is_finite and gt.is_free and not gt.is_zero:
                self.set_prop(a, "zero", "R6", f"{gs} finite, {gt} torsion-free")

    def r7(self):
        for k in range(8):
            a = (ETA, k)
            s, t = ("KO", k), ("KO", (k + 1) % 8)
            for node, cond in ((s, "inj"), (t, "surj")):
                if cond in self.st.props[a] and node not in self.st.elem2:
                    G = self.g(node)
                    if G is not None and not G.is_zero and not _elem2(G):
                        self.fail(f"{aname(a)} {'injective' if cond == 'inj' else 'surjective'} needs 2 {nname(node)} = 0, but {nname(node)} = {G}")
                    self.st.elem2.add(node)
                    self.log("R7", k, f"2 {nname(node)} = 0 (2η = 0, {aname(a)} {'injective' if cond == 'inj' else 'surjective'})")
            gs, gt = self.g(s), self.g(t)
            if gs is not None and gs.mod(2).is_zero:
                self.set_prop(a, "zero", "R7", f"{nname(s)} = {gs} is 2-divisible")
            if gt is not None and not _two_part(gt).torsion:
                self.set_prop(a, "zero", "R7", f"{nname(t)} = {gt} has no 2-torsion")

    def r8_r9(self):
        for j in range(8):
            ku, a, b = self.g(("KU", j % 2)), self.g(("KO", j)), self.g(("KO", (j - 2) % 8))
            if ku is None or a is None or b is None:
                continue
            if ku.free_rank != a.free_rank + b.free_rank:
                self.log("R8", j, f"rank KU_{j} = {ku.free_rank} != rank KO_{j} + rank KO_{(j - 2) % 8} = {a.free_rank + b.free_rank}")
                self.fail(f"rank KU_{j} != rank KO_{j} + rank KO_{(j - 2) % 8}")
            if _odd_part(ku) != _odd_part(a) + _odd_part(b):
                self.log("R9", j, f"odd torsion of KU_{j} is not that of KO_{j} + KO_{(j - 2) % 8}")
                self.fail(f"odd torsion of KU_{j} != odd torsion of KO_{j} + KO_{(j - 2) % 8}")


def deduce(state: LESState) -> LESState:
    """Closure of ``state`` under R1-R9; raises :class:`Contradiction`."""
    st = state.copy()
    _Deducer(st).run()
    return st


# ---------------------------------------------------------------------------
# explicit homomorphisms


def _values(a: int, b: int, bound: int, eta: bool) -> tuple[list[int], bool]:
    """Admissible images of a generator of order ``a`` in a coordinate of order ``b``."""
    if b == 0:
        if a != 0 or eta:
            return [0], False
        vals = [0]
        for x in range(1, bound + 1):
            vals += [x, -x]
        return vals, True
    vals = [h for h in range(b) if (a * h) % b == 0 and (not eta or (2 * h) % b == 0)]
    vals.sort(key=lambda h: min(h, b - h))
    return vals, False


def hom_candidates(A: tuple, B: tuple, bound: int, eta: bool = False):
    """Yield ``(matrix, truncated)`` for homs between groups with generator orders A, B."""
    cells = [(i, j) for i in range(len(B)) for j in range(len(A))]
    opts = []
    trunc = False
    for i, j in cells:
        v, t = _values(A[j], B[i], bound, eta)
        opts.append(v)
        trunc |= t
    return opts, cells, trunc


def _lattice_rel(orders) -> list[list[int]]:
    n = len(orders)
    return [[orders[i] if k == i else 0 for k in range(n)] for i in range(n) if orders[i]]


def _image(F, XA, X) -> tuple:
    rows = [[F[i][j] for i in range(len(X))] for j in range(len(XA))]
    return tuple(hermite_rows(rows + _lattice_rel(X)))


def _kernel(G, X, Y) -> tuple:
    n = len(X)
    if n == 0:
        return ()
    tors = [i for i in range(len(Y)) if Y[i]]
    M = [list(G[i]) + [Y[i] if t == i else 0 for t in tors] for i in range(len(Y))]
    if not M:
        return tuple(hermite_rows([[int(i == k) for k in range(n)] for i in range(n)]))
    K = kernel_basis(M, n + len(tors))
    return tuple(hermite_rows([v[:n] for v in K] + _lattice_rel(X)))


def _is_zero_map(F, B) -> bool:
    return all((F[i][j] % B[i] == 0) if B[i] else F[i][j] == 0 for i in range(len(B)) for j in range(len(F[0]) if F else 0))


def _mul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]) if B else 0)] for i in range(len(A))]


def _reduce(F, B):
    return [[F[i][j] % B[i] if B[i] else F[i][j] for j in range(len(F[i]))] for i in range(len(F))]


def _automorphisms(X: tuple) -> list:
    n = len(X)
    if n == 0:
        return [[]]
    opts = [[-1, 0, 1] if X[i] == 0 else list(range(X[i])) for i in range(n) for _ in range(n)]
    full = tuple(hermite_rows([[int(i == k) for k in range(n)] for i in range(n)]))
    out = []
    for vals in itertools.product(*opts):
        M = [list(vals[i * n:(i + 1) * n]) for i in range(n)]
        ok = all((X[j] * M[i][j]) % X[i] == 0 if X[i] else X[j] == 0 or M[i][j] == 0 for i in range(n) for j in range(n))
        if ok and _image(M, X, X) == full:
            out.append(M)
    return out


@dataclass
class Verdict:
    status: str  # "consistent" | "inconsistent" | "unknown"
    witness: object = None
    bounded: bool = False
    trace: list = field(default_factory=list)

    def __bool__(self):
        return self.status == "consistent"


def _orders(G: AbGroup) -> tuple:
    return G.orders


def check_witness(ko, ku, maps: dict) -> list[str]:
    """Problems with an explicit assignment (empty list: exact with all relations)."""
    grp = {("KO", j): _orders(ko[j]) for j in range(8)}
    grp.update({("KU", j): _orders(ku[j % 2]) for j in range(2)})
    bad = []
    for n in range(24):
        f, h = CYCLE[n], CYCLE[(n + 1) % 24]
        X = grp[target(f)]
        if _image(maps[f], grp[source(f)], X) != _kernel(maps[h], X, grp[target(h)]):
            bad.append(f"not exact at {nname(target(f))} between {aname(f)} and {aname(h)}")
    for k in range(8):
        e = maps[(ETA, k)]
        if e and not _is_zero_map([[2 * x for x in r] for r in e], grp[target((ETA, k))]):
            bad.append(f"2{aname((ETA, k))} != 0")
        comp = _mul(maps[(ETA, (k + 2) % 8)], _mul(maps[(ETA, (k + 1) % 8)], e))
        if comp and comp[0] and not _is_zero_map(comp, grp[("KO", (k + 3) % 8)]):
            bad.append(f"η^3 != 0 at {k}")
    return bad


class _Search:
    def __init__(self, ko, ku, st: LESState, bound: int, budget: int):
        self.grp = {("KO", j): _orders(ko[j]) for j in range(8)}
        self.grp.update({("KU", j): _orders(ku[j]) for j in range(2)})
        self.st = st
        self.bound = bound
        self.budget = budget
        self.nodes = 0
        self.truncated = False
        self.maps: dict = {}
        self.auts = {j: _automorphisms(self.grp[("KU", j)]) for j in range(2)}
        self.kcache: dict = {}

    def kernel(self, a, M):
        key = (a, tuple(map(tuple, M)))
        if key not in self.kcache:
            self.kcache[key] = _kernel(M, self.grp[source(a)], self.grp[target(a)])
        return self.kcache[key]

    def ok_exact(self, f, h) -> bool:
        X = self.grp[target(f)]
        return _image(self.maps[f], self.grp[source(f)], X) == self.kernel(h, self.maps[h])

    def ok_eta3(self, a) -> bool:
        k = a[1]
        for s in (k, (k - 1) % 8, (k - 2) % 8):
            trip = [(ETA, s), (ETA, (s + 1) % 8), (ETA, (s + 2) % 8)]
            if all(t in self.maps for t in trip):
                comp = _mul(self.maps[trip[2]], _mul(self.maps[trip[1]], self.maps[trip[0]]))
                if comp and comp[0] and not _is_zero_map(comp, self.grp[("KO", (s + 3) % 8)]):
                    return False
        return True

    def ok_rc(self, k) -> bool:
        """Some automorphism beta of KU_k gives L_k beta c_k = 2 on KO_k."""
        X = self.grp[("KO", k)]
        n = len(X)
        if n == 0:
            return True
        Lk, ck = self.maps[(L, k)], self.maps[(C, k)]
        for beta in self.auts[k % 2]:
            comp = _mul(Lk, _mul(beta, ck)) if beta else [[0] * n for _ in range(n)]
            diff = [[comp[i][j] - (2 if i == j else 0) for j in range(n)] for i in range(n)]
            if _is_zero_map(diff, X):
                return True
        return False

    def run(self, pos: int = 0):
        if pos == 24:
            return self.ok_exact(CYCLE[23], CYCLE[0])
        a = CYCLE[pos]
        A, B = self.grp[source(a)], self.grp[target(a)]
        if "zero" in self.st.props[a] or not A or not B:
            space = [[[0] * len(A) for _ in B]]
        else:
            opts, cells, trunc = hom_candidates(A, B, self.bound, a[0] == ETA)
            self.truncated |= trunc

            def gen():
                for vals in itertools.product(*opts):
                    M = [[0] * len(A) for _ in B]
                    for (i, j), v in zip(cells, vals):
                        M[i][j] = v
                    yield M

            space = gen()
        for M in space:
            self.nodes += 1
            if self.nodes > self.budget:
                raise BoundExhausted(f"search budget of {self.budget} nodes exhausted")
            self.maps[a] = M
            if pos > 0 and not self.ok_exact(CYCLE[pos - 1], a):
                continue
            if a[0] == ETA and not self.ok_eta3(a):
                continue
            if a[0] == C and (L, a[1]) in self.maps and not self.ok_rc(a[1]):
                continue
            if a[0] == L and (C, a[1]) in self.maps and not self.ok_rc(a[1]):
                continue
            if self.run(pos + 1):
                return True
        self.maps.pop(a, None)
        return False


def verify(ko, ku, bound: int = 8, budget: int = 200_000) -> Verdict:
    """Look for an exact 24-arrow cycle realizing the given groups.

    Free-to-free matrix entries range over ``[-bound, bound]``; an exhausted
    search over such entries is reported as ``inconsistent`` with
    ``bounded=True``.  ``unknown`` means the node budget ran out.
    """
    ko = [g if isinstance(g, AbGroup) else AbGroup.parse(str(g)) for g in ko]
    ku = [g if isinstance(g, AbGroup) else AbGroup.parse(str(g)) for g in ku][:2]
    try:
        st = deduce(LESState.from_groups(ko, ku))
    except Contradiction as e:
        return Verdict("inconsistent", e.witness, False, e.trace)
    S = _Search(ko, ku, st, bound, budget)
    try:
        found = S.run()
    except BoundExhausted as e:
        return Verdict("unknown", str(e), True, st.trace)
    if found:
        return Verdict("consistent", {aname(a): S.maps[a] for a in CYCLE}, False, st.trace)
    why = "no exact assignment of homomorphisms exists"
    if S.truncated:
        why += f" with free entries bounded by {bound}"
    return Verdict("inconsistent", why, S.truncated, st.trace)


# ---------------------------------------------------------------------------
# solving


def _two_groups(max_exp: int, max_factors: int) -> list[AbGroup]:
    exps = [2 ** e for e in range(1, max_exp.bit_length()) if 2 ** e <= max_exp]
    out = [ZERO]
    for k in range(1, max_factors + 1):
        for combo in itertools.combinations_with_replacement(exps, k):
            out.append(AbGroup.from_orders(0, combo))
    return out


def _odd_subgroups(g: AbGroup) -> list[AbGroup]:
    """Odd groups that are direct summands of the odd part of ``g``."""
    from .intlin import factorize

    prim = [q ** e for d in _odd_part(g).torsion for q, e in factorize(d).items()]
    out = set()
    for mask in itertools.product((0, 1), repeat=len(prim)):
        out.add(AbGroup.from_orders(0, [p for p, m in zip(prim, mask) if m]))
    return sorted(out, key=lambda x: x.order)


def order_key(g: AbGroup):
    return (not g.is_finite, g.torsion_order, g.free_rank, g.torsion)


def candidates(j: int, ku, known, max_two_factors: int = 2) -> list[AbGroup]:
    """Candidate groups for KO_j given KU and the known KO entries."""
    kuj, kuj1 = ku[j % 2], ku[(j + 1) % 2]
    lo, hi = 0, kuj.free_rank
    prev, nxt = known[(j - 2) % 8], known[(j + 2) % 8]
    if isinstance(prev, AbGroup):
        lo = hi = kuj.free_rank - prev.free_rank
    if isinstance(nxt, AbGroup):
        r = kuj.free_rank - nxt.free_rank
        lo, hi = max(lo, r), min(hi, r)
    if lo > hi or lo < 0:
        return []
    e2 = max(_two_part(kuj).exponent, _two_part(kuj1).exponent)
    twos = _two_groups(2 * e2, max_two_factors)
    odds = _odd_subgroups(kuj)
    out = {AbGroup(r) + t + o for r in range(lo, hi + 1) for t in twos for o in odds}
    return sorted(out, key=order_key)


def _rank_reason(j: int, ku, known) -> str:
    r = ku[j % 2].free_rank
    for k in ((j - 2) % 8, (j + 2) % 8):
        if isinstance(known[k], AbGroup):
            return f"rank {r - known[k].free_rank} = rank KU_{j % 2} - rank KO_{k}"
    return f"rank at most {r} = rank KU_{j % 2}"


@dataclass
class SolveResult:
    solutions: list
    rejected: list  # (assignment, reason); unassigned degrees are None
    bounded: bool
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)


def solve(
    partial_ko,
    ku,
    bound: int = 8,
    max_two_factors: int = 2,
    quotients: dict | None = None,
    subgroups: dict | None = None,
    budget: int = 200_000,
) -> SolveResult:
    """Complete a partial KO table.

    ``partial_ko[j]`` is an :class:`AbGroup`, ``None`` (unknown) or a list of
    candidate groups.  ``quotients[j]`` / ``subgroups[j]`` are groups that
    KO_j must surject onto / contain.  Candidates for unknown degrees have
    rank fixed by the rational splitting when a neighbour is known, odd
    torsion among summands of KU_j, and 2-torsion of exponent at most twice
    that of KU with at most ``max_two_factors`` cyclic factors.
    """
    ku = [g if isinstance(g, AbGroup) else AbGroup.parse(str(g)) for g in ku][:2]
    quotients = quotients or {}
    subgroups = subgroups or {}
    known = list(partial_ko)
    order = []
    opts: dict = {}
    for j in range(8):
        x = known[j]
        if isinstance(x, AbGroup):
            continue
        order.append(j)
        if x is not None:
            opts[j] = sorted(x, key=order_key)
    sols: list = []
    rejected: list = []
    bounded = False
    unknown: list = []

    def admissible(j, G):
        if j in quotients and not is_quotient(G, quotients[j]):
            return False
        if j in subgroups and not embeds(subgroups[j], G):
            return False
        return True

    def rec(idx, cur):
        nonlocal bounded
        try:
            deduce(LESState.from_groups([c if isinstance(c, AbGroup) else None for c in cur], ku))
        except Contradiction as e:
            rejected.append((tuple(cur), e.witness))
            return
        if idx == len(order):
            v = verify(cur, ku, bound, budget)
            if v.status == "consistent":
                sols.append(tuple(cur))
            elif v.status == "inconsistent":
                bounded |= v.bounded
                rejected.append((tuple(cur), v.witness))
            else:
                unknown.append(tuple(cur))
            return
        j = order[idx]
        cands = opts.get(j) or candidates(j, ku, cur, max_two_factors)
        for G in cands:
            if not admissible(j, G):
                continue
            cur[j] = G
            rec(idx + 1, cur)
            cur[j] = None

    start = [x if isinstance(x, AbGroup) else None for x in known]
    notes = []
    for j in order:
        if j in opts:
            notes.append(f"KO_{j}: filtration leaves {', '.join(map(str, opts[j]))}")
            continue
        cs = [G for G in candidates(j, ku, start, max_two_factors) if admissible(j, G)]
        why = _rank_reason(j, ku, start)
        notes.append(f"KO_{j}: {why}; candidates {', '.join(map(str, cs)) or 'none'}")
    rec(0, start)
    sols.sort(key=lambda s: [order_key(g) for g in s])
    if unknown:
        raise BoundExhausted(f"{len(unknown)} candidate(s) undecided within the search budget", sols)
    return SolveResult(sols, rejected, bounded, notes)
