import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgraph import crmod
from kgraph.crmod import FreeSpec, GradedCRModule, ModuleError, UnsupportedTensor
from kgraph.intlin import ZERO, Z, AbGroup

from conftest import CORPUS

P = AbGroup.parse
BASES = ["R", "C", "E(3)", "E(5)", "E(7)", "E(9)"]


class TestModules:
    def test_real_table(self):
        M = crmod.k_real()
        assert [str(g) for g in M.ko] == ["Z", "Z2", "Z2", "0", "Z", "0", "0", "0"]
        assert M.ku_at(0) == Z and M.ku_at(1) == ZERO

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_exotic_orders(self, n):
        M = crmod.k_exotic(n)
        assert M.ko[0] == AbGroup.cyclic(2 * (n - 1))
        assert M.ko[4] == AbGroup.cyclic((n - 1) // 2)
        assert M.ku_at(0) == AbGroup.cyclic(n - 1)

    @pytest.mark.parametrize("bad", [1, 2, 4, "x"])
    def test_exotic_rejects(self, bad):
        with pytest.raises(ModuleError):
            crmod.k_exotic(bad)

    @given(st.sampled_from(BASES), st.integers(-20, 20), st.integers(-20, 20))
    def test_suspension_is_additive_and_8_periodic(self, base, i, j):
        M = crmod.standard_module(base)
        assert crmod.suspend(crmod.suspend(M, i), j) == crmod.suspend(M, i + j)
        assert crmod.suspend(M, 8) == M

    def test_suspension_convention(self):
        # (Sigma M)_j = M_{j+1}
        S = crmod.suspend(crmod.k_real(), 1)
        assert [str(g) for g in S.ko] == ["Z2", "Z2", "0", "Z", "0", "0", "0", "Z"]

    def test_standard_module_names(self):
        assert crmod.standard_module("E(5)@6") == crmod.suspend(crmod.k_exotic(5), 6)
        assert crmod.standard_module("ℝ") == crmod.k_real()
        with pytest.raises(ModuleError):
            crmod.standard_module("Q")

    def test_ku_period_enforced(self):
        with pytest.raises(ModuleError):
            GradedCRModule([ZERO] * 8, [Z, ZERO, ZERO, ZERO, Z, ZERO, Z, ZERO])


class TestFiles:
    @pytest.mark.parametrize("name", [n for n, _ in crmod.catalog(5)])
    def test_dict_round_trip(self, name):
        M = dict(crmod.catalog(5))[name]
        assert GradedCRModule.from_dict(json.loads(json.dumps(M.as_dict()))) == M

    def test_corpus_module_files(self):
        e5 = GradedCRModule.from_dict(json.loads((CORPUS / "e5.json").read_text()))
        assert e5 == crmod.k_exotic(5)
        s3 = GradedCRModule.from_dict(json.loads((CORPUS / "sigma3-r.json").read_text()))
        assert s3 == crmod.suspend(crmod.k_real(), 3)

    @pytest.mark.parametrize(
        "doc, msg",
        [
            ({"ko": ["0"] * 8}, "missing field 'ku'"),
            ({"ko": ["0"] * 8, "ku": ["0", "0"], "kx": 1}, "unknown field"),
            ({"ko": ["0"] * 7 + ["Q"], "ku": ["0", "0"]}, "$.ko[7]"),
            ({"ko": ["0"] * 7, "ku": ["0", "0"]}, "need 8 KO groups"),
        ],
    )
    def test_bad_module_files(self, doc, msg):
        with pytest.raises(ModuleError) as e:
            GradedCRModule.from_dict(doc)
        assert msg in str(e.value)


class TestTensor:
    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_free_factors_restore_exotic(self, n):
        E = crmod.k_exotic(n)
        assert crmod.tensor_free([1, 1], crmod.suspend(E, 6)) == E

    def test_list_means_tensor_factors_and_spec_means_sum(self):
        R = crmod.k_real()
        assert crmod.tensor_free([1, 1], R) == crmod.suspend(R, 2)
        assert crmod.tensor_free(FreeSpec((1, 1)), R) == crmod.suspend(R, 1) + crmod.suspend(R, 1)

    @given(st.lists(st.integers(0, 7), min_size=1, max_size=4), st.sampled_from(BASES))
    def test_tensor_with_unit_shifts(self, shifts, base):
        M = crmod.standard_module(base)
        assert crmod.tensor_free(shifts, M) == crmod.suspend(M, sum(shifts))

    def test_complex_summand_rejected(self):
        with pytest.raises(UnsupportedTensor):
            crmod.tensor_free(FreeSpec((0,), (1,)), crmod.k_real())

    def test_empty_rejected(self):
        with pytest.raises(ModuleError):
            crmod.tensor_free([], crmod.k_real())


class TestIdentify:
    def test_every_catalog_entry_identifies_itself(self):
        for name, M in crmod.catalog(9):
            assert crmod.identify(M, 9) == [name]

    def test_zero_module_unmatched(self):
        assert crmod.identify(GradedCRModule([ZERO] * 8, [ZERO, ZERO])) == []

    def test_complex_period_two(self):
        names = [n for n, _ in crmod.catalog(3)]
        assert "K(C)" in names and "Σ^1 K(C)" in names and "Σ^2 K(C)" not in names

    def test_catalog_bound(self):
        assert crmod.identify(crmod.k_exotic(9), 7) == []


class TestObstructions:
    @pytest.mark.parametrize("i", range(8))
    def test_rank1_suspensions(self, i):
        v = crmod.rank1_obstruction(crmod.suspend(crmod.k_real(), i))
        assert (v.status == "obstructed") == (i % 8 in (2, 3, 4, 5))

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_exotic_obstructed_in_ranks_one_and_two(self, n):
        E = crmod.k_exotic(n)
        r1 = crmod.rank1_obstruction(E)
        assert r1.status == "obstructed" and "KO_7" in r1.witness
        r2 = crmod.rank2_obstruction(E)
        assert r2.status == "obstructed"
        assert any("η_6 bijective" in t for t in r2.trace)
        assert any("η_6 surjective (KU_7 = 0)" in t for t in r2.trace)

    def test_rank2_inapplicable_with_free_ko(self):
        assert crmod.rank2_obstruction(crmod.k_real()).status == "inapplicable"

    def test_rank2_passes_when_ko7_zero(self):
        M = crmod.suspend(crmod.k_exotic(5), 4)
        assert M.ko[7].is_zero
        assert crmod.rank2_obstruction(M).status == "pass"

    def test_rank2_flags_inconsistent_tables(self):
        M = GradedCRModule([AbGroup.cyclic(3)] + [ZERO] * 7, [AbGroup.cyclic(3), ZERO])
        assert crmod.rank2_obstruction(M).status == "inconsistent"

    def test_format_table_layout(self):
        lines = crmod.format_table(crmod.k_real()).splitlines()
        assert [ln.split("|")[0].strip() for ln in lines] == ["i", "KO_i", "KU_i"]
        assert lines[1].split("|")[1].split() == ["Z", "Z2", "Z2", "0", "Z", "0", "0", "0"]
