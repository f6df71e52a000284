import random
import time

import pytest

from kgraph import crmod, kengine
from kgraph.graphs import EPGraph, GraphError, InvolutionData, KGraph, boundary_matrix, product
from kgraph.intlin import ZERO, Z, Z2, AbGroup, matmul
from kgraph.kengine import (
    Ambiguous,
    FiltrationProblem,
    SpectralPage,
    assemble,
    complex_k,
    extension_candidates,
    filtration_problems,
    koszul_differentials,
    koszul_homology,
    real_rows_rank1,
    real_rows_rank2,
)
from kgraph.relprop import graph_coker_ker

from conftest import corpus_graph, random_equivariant, random_matrix

P = AbGroup.parse


def graded_tensor(a0, a1, b0, b1):
    return a0.tensor(b0) + a1.tensor(b1), a0.tensor(b1) + a1.tensor(b0)


def free_k_graphs(count, seed=11):
    """Random finite rank-1 graphs whose K-groups are torsion-free."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 5)
        G = KGraph(1, [f"v{i}" for i in range(n)], [random_matrix(rng, n, 3, rng.uniform(0.2, 0.7))])
        r = graph_coker_ker(G)
        if r.coker.is_free:
            out.append((G, r.coker, r.ker))
    return out


class TestKoszul:
    def test_square_zero(self, rng):
        for _ in range(20):
            A = random_matrix(rng, 3)
            B = matmul(A, A)  # commutes with A
            C = matmul(B, A)
            d = koszul_differentials([boundary_matrix(X) for X in (A, B, C)])
            for p in (1, 2):
                assert not any(any(r) for r in matmul(d[p], d[p + 1]))

    def test_torus(self):
        G, _ = corpus_graph("torus")
        ck = complex_k(G)
        assert (ck.k0, ck.k1) == (AbGroup(2), AbGroup(2))
        assert ck.homology == [Z, AbGroup(2), Z]

    def test_kunneth_cross_check(self):
        t0 = time.perf_counter()
        pairs = 0
        graphs = free_k_graphs(25)
        pick = random.Random(5)
        for _ in range(25):
            (G, a0, a1), (H, b0, b1) = pick.sample(graphs, 2)
            Pg, _ = product(G, H)
            H_ = koszul_homology([boundary_matrix(Pg.matrix(i)) for i in range(2)])
            assert H_[0] == a0.tensor(b0)
            assert H_[2] == a1.tensor(b1)
            assert H_[1] == a0.tensor(b1) + a1.tensor(b0)
            ck = complex_k(Pg)
            assert (ck.k0, ck.k1) == graded_tensor(a0, a1, b0, b1)
            pairs += 1
        assert pairs >= 20
        assert any(not a1.is_zero for _, _, a1 in graphs)
        assert time.perf_counter() - t0 < 60

    def test_rank3_cube(self):
        loop = KGraph.from_edges(["v"], [[["v", "v", 1]]])
        T, _ = product(loop, loop)
        C, _ = product(T, loop)
        ck = complex_k(C)
        assert (ck.k0, ck.k1) == (AbGroup(4), AbGroup(4))

    def test_rank4_rejected(self):
        G = KGraph(4, ["v"], [[[1]]] * 4)
        with pytest.raises(GraphError):
            complex_k(G)

    def test_torsion_factor(self):
        two = KGraph.from_edges(["v"], [[["v", "v", 3]]])
        loop = KGraph.from_edges(["v"], [[["v", "v", 1]]])
        P_, _ = product(two, loop)
        ck = complex_k(P_)
        assert ck.k0 == AbGroup.cyclic(2) and ck.k1 == AbGroup.cyclic(2)


class TestRealRows:
    def test_lambda_rows(self):
        G, inv = corpus_graph("lambda")
        page = real_rows_rank1(G, inv)
        assert page.row(1) == [Z2, ZERO]
        assert page.row(0) == [Z2, ZERO]
        for q in (3, 5, 7):
            assert page.row(q) == [ZERO, ZERO]
        assert not page.known(0, 2)

    def test_trivial_involution_kills_row_6(self):
        G, inv = corpus_graph("appendix-i0")
        page = real_rows_rank1(G, inv)
        assert page.row(6) == [ZERO, ZERO]

    def test_trivial_involution_row0_is_complex(self, rng):
        # with gamma = id the fold is I - M^t itself
        for _ in range(10):
            G, inv = random_equivariant(rng, rng.randint(1, 4), 0)
            page = real_rows_rank1(G, inv)
            r = graph_coker_ker(G)
            assert page.row(0) == [r.coker, r.ker]

    def test_free_involution_has_no_row_1(self, rng):
        G, inv = random_equivariant(rng, 0, 2)
        page = real_rows_rank1(G, inv)
        assert page.row(1) == [ZERO, ZERO]

    def test_rank2_torus_rows(self):
        G, inv = corpus_graph("torus")
        page = real_rows_rank2(G, inv)
        assert page.row(0) == [Z, AbGroup(2), Z]
        assert page.row(1) == [Z2, P("Z2^2"), Z2]
        assert page.status[(2, 4)] == kengine.FREE
        assert "free?" in page.render()

    def test_rank2_rejects_rank1(self):
        G, inv = corpus_graph("one-loop")
        with pytest.raises(GraphError):
            real_rows_rank2(G, inv)


class TestExtensions:
    @pytest.mark.parametrize(
        "a, b, expect",
        [
            ("Z2", "Z", ["Z + Z2"]),
            ("Z", "Z2", ["Z", "Z + Z2"]),
            ("Z2", "Z2", ["Z2^2", "Z4"]),
            ("Z3", "Z2", ["Z6"]),
            ("0", "Z2", ["Z2"]),
        ],
    )
    def test_candidates(self, a, b, expect):
        got = sorted(str(g) for g in extension_candidates(P(a), P(b)))
        assert got == sorted(expect)

    def test_filtration_unknown_records_constraints(self):
        page = SpectralPage(1)
        for q in range(8):
            page.set(0, q, ZERO)
            page.set(1, q, ZERO)
        page.set(0, 2, None, kengine.UNKNOWN)
        page.set(1, 1, Z2)
        (fp,) = [fp for fp in filtration_problems(page) if fp.degree == 2]
        assert fp.status == "unknown" and fp.quotient == Z2
        assert "?" in fp.describe()


class TestAssembly:
    @pytest.mark.parametrize(
        "name, ko, match",
        [
            ("lambda", "Z2 Z2 0 Z 0 0 0 Z", "Σ^1 K(R)"),
            ("appendix-i0", "Z Z2 Z2 0 Z 0 0 0", "K(R)"),
            ("appendix-im1", "0 Z Z2 Z2 0 Z 0 0", "Σ^7 K(R)"),
            ("appendix-im2", "0 0 Z Z2 Z2 0 Z 0", "Σ^6 K(R)"),
        ],
    )
    def test_paper_graphs(self, name, ko, match):
        G, inv = corpus_graph(name)
        ck = complex_k(G)
        asm = assemble(real_rows_rank1(G, inv), [ck.k0, ck.k1])
        assert [str(g) for g in asm.unique()] == ko.split()
        M = crmod.GradedCRModule(tuple(asm.ko), (ck.k0, ck.k1))
        assert crmod.identify(M) == [match]

    def test_without_les_stays_partial(self):
        G, inv = corpus_graph("lambda")
        asm = assemble(real_rows_rank1(G, inv), use_les=False)
        assert asm.status == "partial" and asm.ko[3] is None

    def test_ambiguous_raises_on_unique(self):
        G, inv = corpus_graph("swap-pair")
        ck = complex_k(G)
        asm = assemble(real_rows_rank1(G, inv), [ck.k0, ck.k1])
        assert asm.status == "ambiguous" and len(asm.candidates) >= 2
        with pytest.raises(Ambiguous):
            asm.unique()

    def test_lambda_filtrations_cover_all_degrees(self):
        G, inv = corpus_graph("lambda")
        assert isinstance(G, EPGraph) and isinstance(inv, InvolutionData)
        probs = filtration_problems(real_rows_rank1(G, inv))
        assert [fp.degree for fp in probs] == list(range(8))
        assert all(isinstance(fp, FiltrationProblem) for fp in probs)
        assert [fp.status for fp in probs[:2]] == ["forced", "forced"]
