import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgraph import crmod
from kgraph.intlin import ZERO, Z, Z2, AbGroup
from kgraph.lessolver import (
    CYCLE,
    Contradiction,
    LESState,
    aname,
    candidates,
    check_witness,
    deduce,
    solve,
    verify,
)

P = AbGroup.parse


def groups(M):
    return list(M.ko), [M.ku[0], M.ku[1]]


class TestVerify:
    @pytest.mark.parametrize("name", [n for n, _ in crmod.catalog(9)])
    def test_catalog_consistent(self, name):
        M = dict(crmod.catalog(9))[name]
        v = verify(*groups(M))
        assert v.status == "consistent"
        maps = {a: v.witness[aname(a)] for a in CYCLE}
        assert check_witness(*groups(M), maps) == []

    def test_lambda_result_consistent(self):
        ko = [P(x) for x in ("Z2", "Z2", "0", "Z", "0", "0", "0", "Z")]
        assert verify(ko, [ZERO, Z]).status == "consistent"

    CORRUPT = [
        ("KO_1 of R set to 0", 1, "0", "R"),
        ("KO_2 of R set to 0", 2, "0", "R"),
        ("KO_0 of R set to Z2", 0, "Z2", "R"),
        ("KO_3 of R set to Z2", 3, "Z2", "R"),
        ("KO_4 of R set to Z2", 4, "Z2", "R"),
        ("KO_1 of C set to Z2", 1, "Z2", "C"),
        ("KO_7 of E(5) set to 0", 7, "0", "E(5)"),
    ]

    @pytest.mark.parametrize("label, j, g, base", CORRUPT, ids=[c[0] for c in CORRUPT])
    def test_corrupted_inconsistent(self, label, j, g, base):
        ko, ku = groups(crmod.standard_module(base))
        ko[j] = P(g)
        v = verify(ko, ku)
        assert v.status == "inconsistent", label
        assert v.witness

    def test_r_with_zero_ku_inconsistent(self):
        ko, _ = groups(crmod.k_real())
        assert verify(ko, [ZERO, ZERO]).status == "inconsistent"

    def test_witness_checker_detects_broken_map(self):
        M = crmod.k_real()
        v = verify(*groups(M))
        maps = {a: v.witness[aname(a)] for a in CYCLE}
        eta0 = next(a for a in CYCLE if aname(a) == "η_0")
        maps[eta0] = [[0]]
        assert check_witness(*groups(M), maps)


class TestDeduce:
    def test_zero_ku_forces_zero_ko(self):
        # eta is then an isomorphism in every degree, and eta^3 = 0
        st = deduce(LESState.from_groups([None] * 8, [ZERO, ZERO]))
        assert st.ko == [ZERO] * 8
        assert any("R1" in line for line in st.trace) and any("R2" in line for line in st.trace)

    def test_contradiction_carries_trace(self):
        ko, ku = groups(crmod.k_real())
        ko[1] = ZERO
        with pytest.raises(Contradiction) as e:
            deduce(LESState.from_groups(ko, ku))
        assert e.value.witness

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([n for n, _ in crmod.catalog(5)]), st.sets(st.integers(0, 7), max_size=4))
    def test_idempotent_on_partial_catalog(self, name, hide):
        M = dict(crmod.catalog(5))[name]
        ko, ku = groups(M)
        ko = [None if j in hide else g for j, g in enumerate(ko)]
        a = deduce(LESState.from_groups(ko, ku))
        b = deduce(a.copy())
        assert a.groups == b.groups and a.props == b.props


class TestSolve:
    def test_zero_ku_collapses(self):
        res = solve([None] * 8, [ZERO, ZERO])
        assert res.solutions == [tuple([ZERO] * 8)]

    def test_lambda_completion(self):
        partial = [Z2, Z2, None, None, None, None, None, None]
        res = solve(partial, [ZERO, Z], quotients={}, subgroups={})
        assert [list(map(str, s)) for s in res.solutions] == [["Z2", "Z2", "0", "Z", "0", "0", "0", "Z"]]
        assert res.notes and res.rejected

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_exotic_recovered_with_two_entries_hidden(self, n):
        M = crmod.k_exotic(n)
        ko, ku = groups(M)
        partial = [ko[0], ko[1], None, ko[3], ko[4], ko[5], None, ko[7]]
        res = solve(partial, ku)
        assert tuple(ko) in res.solutions

    def test_candidates_respect_rank(self):
        known = [Z, None, None, None, None, None, None, None]
        cs = candidates(2, [Z, ZERO], known)
        assert cs and all(c.free_rank == 0 for c in cs)
