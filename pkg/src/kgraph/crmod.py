"""Graded CR-modules: KO in degrees 0..7 and 2-periodic KU.

Only the groups are stored, plus optional partial facts about the maps
eta, c and r.  Modules compare by their graded groups.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .intlin import Z, ZERO, AbGroup

MAP_PROPS = ("zero", "injective", "surjective", "bijective", "unknown")


class ModuleError(ValueError):
    pass


class UnsupportedTensor(ModuleError):
    pass


def _group(x) -> AbGroup:
    return x if isinstance(x, AbGroup) else AbGroup.parse(str(x))


@dataclass(frozen=True)
class GradedCRModule:
    ko: tuple[AbGroup, ...]
    ku: tuple[AbGroup, ...]
    map_facts: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ko = tuple(_group(g) for g in self.ko)
        ku = tuple(_group(g) for g in self.ku)
        if len(ko) != 8:
            raise ModuleError(f"need 8 KO groups, got {len(ko)}")
        if len(ku) == 2:
            ku = ku * 4
        if len(ku) != 8 or any(ku[i] != ku[i % 2] for i in range(8)):
            raise ModuleError("KU must have 2 groups or 8 groups with period 2")
        for name, facts in self.map_facts.items():
            if name not in ("eta", "c", "r"):
                raise ModuleError(f"unknown map {name!r}")
            for d, p in facts.items():
                if p not in MAP_PROPS:
                    raise ModuleError(f"{name}_{d}: unknown property {p!r}")
        object.__setattr__(self, "ko", ko)
        object.__setattr__(self, "ku", ku)
        object.__setattr__(self, "map_facts", {k: dict(v) for k, v in self.map_facts.items()})

    def ku_at(self, i: int) -> AbGroup:
        return self.ku[i % 2]

    def ko_at(self, i: int) -> AbGroup:
        return self.ko[i % 8]

    @property
    def is_zero(self) -> bool:
        return all(g.is_zero for g in self.ko + self.ku)

    def __add__(self, other: GradedCRModule) -> GradedCRModule:
        return GradedCRModule(
            tuple(a + b for a, b in zip(self.ko, other.ko)), tuple(a + b for a, b in zip(self.ku[:2], other.ku[:2]))
        )

    def table(self) -> str:
        return format_table(self)

    def as_dict(self) -> dict:
        d = {"ko": [str(g) for g in self.ko], "ku": [str(g) for g in self.ku[:2]]}
        if self.map_facts:
            d["maps"] = {k: {str(i): p for i, p in sorted(v.items())} for k, v in self.map_facts.items()}
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> GradedCRModule:
        if not isinstance(doc, dict):
            raise ModuleError("$: expected an object")
        unknown = set(doc) - {"ko", "ku", "maps", "name", "description"}
        if unknown:
            raise ModuleError(f"$: unknown field(s) {', '.join(sorted(unknown))}")
        for f in ("ko", "ku"):
            if f not in doc:
                raise ModuleError(f"$: missing field {f!r}")
        groups = {}
        for f in ("ko", "ku"):
            out = []
            for i, s in enumerate(doc[f]):
                try:
                    out.append(AbGroup.parse(str(s)))
                except ValueError as e:
                    raise ModuleError(f"$.{f}[{i}]: {e}") from None
            groups[f] = out
        maps = {k: {int(i): p for i, p in v.items()} for k, v in doc.get("maps", {}).items()}
        return cls(tuple(groups["ko"]), tuple(groups["ku"]), maps)


def format_table(M: GradedCRModule, title: str = "") -> str:
    """Two-row table: KO in degrees 0..7 and KU."""
    cells = [[str(i) for i in range(8)], [str(g) for g in M.ko], [str(M.ku_at(i)) for i in range(8)]]
    w = max(len(c) for row in cells for c in row)
    heads = ["i", "KO_i", "KU_i"]
    lines = [title] if title else []
    for h, row in zip(heads, cells):
        lines.append(f"{h:<5}| " + " ".join(c.rjust(w) for c in row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# standard modules


def _shift_facts(facts: dict, i: int) -> dict:
    return {name: {(d - i) % 8: p for d, p in v.items()} for name, v in facts.items()}


def k_real() -> GradedCRModule:
    Z2 = AbGroup.cyclic(2)
    eta = {d: "zero" for d in range(8)}
    eta.update({0: "surjective", 1: "bijective"})
    return GradedCRModule((Z, Z2, Z2, ZERO, Z, ZERO, ZERO, ZERO), (Z, ZERO), {"eta": eta})


def k_complex() -> GradedCRModule:
    Z2sum = AbGroup(2)
    return GradedCRModule((Z, ZERO, Z, ZERO, Z, ZERO, Z, ZERO), (Z2sum, ZERO), {"eta": {d: "zero" for d in range(8)}})


def k_exotic(n: int) -> GradedCRModule:
    """K-theory of the exotic real Cuntz algebra E(n), n odd >= 3."""
    if not isinstance(n, int) or n < 3 or n % 2 == 0:
        raise ModuleError(f"E(n) needs n odd and >= 3, got {n}")
    C = AbGroup.cyclic
    return GradedCRModule(
        (C(2 * (n - 1)), C(2), C(2), ZERO, C((n - 1) // 2), ZERO, C(2), C(2)),
        (C(n - 1), ZERO),
    )


_NAME = re.compile(r"^\s*(R|ℝ|C|ℂ|E\((\d+)\))\s*(?:@\s*(-?\d+))?\s*$")


def standard_module(name: str) -> GradedCRModule:
    """``"R"``, ``"C"`` or ``"E(n)"``, optionally suffixed ``@i`` for a suspension."""
    m = _NAME.match(name)
    if not m:
        raise ModuleError(f"unknown standard module {name!r}")
    base = m.group(1)
    if base in ("R", "ℝ"):
        M = k_real()
    elif base in ("C", "ℂ"):
        M = k_complex()
    else:
        M = k_exotic(int(m.group(2)))
    return suspend(M, int(m.group(3))) if m.group(3) else M


def suspend(M: GradedCRModule, i: int) -> GradedCRModule:
    """``(Sigma^i M)_j = M_{j+i}``."""
    return GradedCRModule(
        tuple(M.ko[(j + i) % 8] for j in range(8)),
        tuple(M.ku[(j + i) % 2] for j in range(2)),
        _shift_facts(M.map_facts, i),
    )


# ---------------------------------------------------------------------------
# Kunneth with free modules


@dataclass(frozen=True)
class FreeSpec:
    """Free module ``(+)_j Sigma^{a_j} K(R)  (+)_k Sigma^{b_k} K(C)``."""

    shifts: tuple[int, ...]
    complex_shifts: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(int(a) % 8 for a in self.shifts))
        object.__setattr__(self, "complex_shifts", tuple(int(b) % 8 for b in self.complex_shifts))
        if not self.shifts and not self.complex_shifts:
            raise ModuleError("empty free module")

    @classmethod
    def product(cls, *shifts: int) -> FreeSpec:
        """``Sigma^{a_1} K(R) (x) ... (x) Sigma^{a_k} K(R) = Sigma^{a_1+...+a_k} K(R)``."""
        if not shifts:
            raise ModuleError("empty tensor product")
        return cls((sum(shifts),))

    def __add__(self, other: FreeSpec) -> FreeSpec:
        return FreeSpec(self.shifts + other.shifts, self.complex_shifts + other.complex_shifts)

    def module(self) -> GradedCRModule:
        parts = [suspend(k_real(), a) for a in self.shifts] + [suspend(k_complex(), b) for b in self.complex_shifts]
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out

    def __str__(self) -> str:
        terms = [suspension_name("K(R)", a) for a in self.shifts] + [suspension_name("K(C)", b) for b in self.complex_shifts]
        return " + ".join(terms)


def tensor_free(F, M: GradedCRModule) -> GradedCRModule:
    """``F (x) M`` for a free module ``F``.

    ``F`` is a :class:`FreeSpec` (a direct sum), or a plain sequence of
    shifts read as tensor factors ``Sigma^{a_1} K(R) (x) Sigma^{a_2} K(R) ...``.
    """
    if not isinstance(F, FreeSpec):
        F = FreeSpec.product(*F)
    if F.complex_shifts:
        raise UnsupportedTensor("tensoring with K(C) summands is not supported")
    parts = [suspend(M, a) for a in F.shifts]
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


# ---------------------------------------------------------------------------
# catalog


def suspension_name(base: str, i: int) -> str:
    i %= 8
    return base if i == 0 else f"Σ^{i} {base}"


def catalog(max_n: int = 9) -> list[tuple[str, GradedCRModule]]:
    """Suspensions of K(R), K(C) and K(E(n)) for odd ``n <= max_n``.

    Repeats are dropped (``Sigma^2 K(C) = K(C)``), keeping the smallest shift.
    """
    out, seen = [], set()
    bases = [("K(R)", k_real()), ("K(C)", k_complex())]
    bases += [(f"K(E({n}))", k_exotic(n)) for n in range(3, max_n + 1, 2)]
    for name, M in bases:
        for i in range(8):
            S = suspend(M, i)
            if (S.ko, S.ku) not in seen:
                seen.add((S.ko, S.ku))
                out.append((suspension_name(name, i), S))
    return out


def identify(M: GradedCRModule, max_n: int = 9) -> list[str]:
    """Catalog entries whose graded groups equal those of ``M``.

    Only groups are compared; for catalog entries this pins down the maps too.
    """
    if M.is_zero:
        return []
    return [name for name, X in catalog(max_n) if X.ko == M.ko and X.ku == M.ku]


# ---------------------------------------------------------------------------
# obstructions


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: str = ""
    trace: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        d = {"status": self.status, "witness": self.witness}
        if self.trace:
            d["trace"] = list(self.trace)
        return d


def rank1_obstruction(M: GradedCRModule) -> Verdict:
    """KO in degrees -1 and -3 of a rank-1 graph algebra is torsion-free."""
    for d in (7, 5):
        if M.ko[d].torsion:
            return Verdict("obstructed", f"KO_{d - 8} = KO_{d} = {M.ko[d]} has torsion")
    return Verdict("realizable-unknown")


def rank2_obstruction(M: GradedCRModule) -> Verdict:
    """For a rank-2 graph algebra with finite KO, eta_6 must vanish.

    If KU_7 = 0 and KO_7 != 0 exactness makes eta_6 onto a nonzero group,
    which is the obstruction.
    """
    if not all(g.is_finite for g in M.ko):
        inf = [d for d in range(8) if not M.ko[d].is_finite]
        return Verdict("inapplicable", f"KO_{inf[0]} = {M.ko[inf[0]]} is infinite")
    from .lessolver import Contradiction, LESState, deduce

    try:
        st = deduce(LESState.from_groups(list(M.ko), [M.ku_at(0), M.ku_at(1)]))
    except Contradiction as e:
        return Verdict("inconsistent", f"no exact sequence fits these groups: {e.witness}", tuple(e.trace))
    trace = tuple(line for line in st.trace if "η_6" in line or "eta_6" in line)
    if M.ku_at(7).is_zero and not M.ko[7].is_zero:
        return Verdict(
            "obstructed",
            f"KU_7 = 0 forces eta_6: {M.ko[6]} -> {M.ko[7]} onto a nonzero group; eta_6 = 0 for rank-2 graphs",
            trace,
        )
    return Verdict("pass", "", trace)
