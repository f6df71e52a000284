import itertools
import math

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from kgraph.intlin import (
    ZERO,
    Z,
    Z2,
    AbGroup,
    coker_ker,
    det,
    direct_sum,
    embeds,
    ext1,
    factorize,
    gf2_coker_ker,
    homology,
    invariant_factors,
    is_quotient,
    is_unimodular,
    kernel_basis,
    kron,
    left_inverse,
    matmul,
    smith_normal_form,
)


def matrices(max_m=5, max_n=5, lo=-6, hi=6):
    return st.integers(1, max_m).flatmap(
        lambda m: st.integers(1, max_n).flatmap(
            lambda n: st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def determinantal_divisors(M):
    """gcd of all k x k minors, k = 1..min(m, n), by brute force."""
    m, n = len(M), len(M[0])
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, int(sympy.Matrix([[M[i][j] for j in cols] for i in rows]).det()))
        if g == 0:
            break
        out.append(g)
    return out


class TestAbGroup:
    def test_parse_and_print(self):
        assert str(AbGroup.parse("Z^2 + Z4 + Z2")) == "Z^2 + Z2 + Z4"
        assert AbGroup.parse("ℤ₂ ⊕ ℤ") == Z + Z2
        assert AbGroup.parse("0") == ZERO
        assert AbGroup.parse("Z2^3").torsion == (2, 2, 2)

    def test_invariant_factor_normalization(self):
        # Z2 + Z3 = Z6 and Z4 + Z6 = Z2 + Z12
        assert AbGroup.from_orders(0, [2, 3]) == AbGroup.cyclic(6)
        assert AbGroup.from_orders(0, [4, 6]).torsion == (2, 12)
        assert AbGroup.from_orders(0, [1, 1]) == ZERO

    @pytest.mark.parametrize("bad", ["Z_", "Q", "Z^", "02"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            AbGroup.parse(bad)

    def test_rejects_bad_chain(self):
        with pytest.raises(ValueError):
            AbGroup(0, (4, 2))

    def test_tensor_tor_ext(self):
        assert Z2.tensor(AbGroup.cyclic(4)) == Z2
        assert Z.tensor(AbGroup.cyclic(6)) == AbGroup.cyclic(6)
        assert AbGroup.cyclic(4).tor(AbGroup.cyclic(6)) == Z2
        assert ext1(Z2, Z) == Z2
        assert ext1(Z, Z2) == ZERO
        assert ext1(Z2, Z2) == Z2

    def test_sub_and_quotient(self):
        assert embeds(Z2, AbGroup.cyclic(4))
        assert not embeds(Z2 + Z2, AbGroup.cyclic(8))
        assert is_quotient(Z, Z2)
        assert not is_quotient(Z2, Z)
        assert is_quotient(AbGroup.cyclic(8), AbGroup.cyclic(4))
        assert embeds(Z, Z + Z2)
        assert not embeds(Z + Z, Z + Z2)

    @given(st.lists(st.integers(0, 40), max_size=5), st.integers(0, 3))
    def test_order_matches_primary_decomposition(self, orders, free):
        g = AbGroup.from_orders(free, orders)
        expect = math.prod(o for o in orders if o > 1) if not [o for o in orders if o == 0] else None
        if free or expect is None:
            assert g.order is None
        else:
            assert g.order == expect

    @given(st.lists(st.integers(2, 30), max_size=4), st.lists(st.integers(2, 30), max_size=4))
    def test_direct_sum_commutes(self, a, b):
        A, B = AbGroup.from_orders(0, a), AbGroup.from_orders(0, b)
        assert A + B == B + A == direct_sum([A, B])
        assert embeds(A, A + B) and is_quotient(A + B, B)

    def test_factorize(self):
        assert factorize(360) == {2: 3, 3: 2, 5: 1}


class TestSmith:
    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_transform_identity(self, M):
        U, D, V = smith_normal_form(M)
        assert matmul(matmul(U, M), V) == D
        assert is_unimodular(U) and is_unimodular(V)
        diag = [D[i][i] for i in range(min(len(M), len(M[0])))]
        nz = [d for d in diag if d]
        assert all(d > 0 for d in nz)
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        assert all(D[i][j] == 0 for i in range(len(M)) for j in range(len(M[0])) if i != j)

    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_against_sympy(self, M):
        theirs = sympy_snf(sympy.Matrix(M), domain=sympy.ZZ)
        diag = [abs(int(theirs[i, i])) for i in range(min(theirs.shape))]
        ours = invariant_factors(M)
        assert [d for d in diag if d] == ours

    @settings(max_examples=60, deadline=None)
    @given(matrices(4, 4, -4, 4))
    def test_against_minors(self, M):
        dd = determinantal_divisors(M)
        expect = [dd[k] // (dd[k - 1] if k else 1) for k in range(len(dd))]
        assert invariant_factors(M) == expect

    def test_det(self):
        assert det([[2, 1], [7, 4]]) == 1
        assert det([[1, 2, 3], [4, 5, 6], [7, 8, 10]]) == -3


class TestKernel:
    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_kernel_against_rational_nullspace(self, M):
        K = kernel_basis(M)
        assert len(K) == len(sympy.Matrix(M).nullspace())
        for v in K:
            assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in M)
        if K:
            # saturated: maximal minors of the basis have gcd 1
            dd = determinantal_divisors(K)
            assert len(dd) == len(K) and dd[-1] == 1

    def test_coker_known(self):
        C, K = coker_ker([[2, 0], [0, 3]])
        assert C == AbGroup.cyclic(6) and K == []
        C, K = coker_ker([[1, -2]])
        assert C == ZERO and len(K) == 1

    def test_left_inverse(self):
        K = [[1, 0], [2, 1], [3, 5]]
        P = left_inverse(K)
        assert matmul(P, K) == [[1, 0], [0, 1]]
        with pytest.raises(ValueError):
            left_inverse([[2], [4]])

    def test_homology_of_circle(self):
        # cellular chain complex of a circle with one vertex and one edge
        assert homology(None, [[0]], 1) == Z
        # RP^2: Z --2--> Z --0--> Z
        assert homology([[0]], [[2]], 1) == Z2
        with pytest.raises(ValueError):
            homology([[1, -1]], [[1], [0]], 2)

    @settings(max_examples=80, deadline=None)
    @given(matrices(4, 4, -3, 3))
    def test_gf2_matches_mod2_snf(self, M):
        C, k = gf2_coker_ker(M)
        rank2 = _gf2_rank_oracle([[x % 2 for x in r] for r in M])
        assert C == AbGroup.from_orders(0, [2] * (len(M) - rank2))
        assert k == len(M[0]) - rank2

    def test_kron(self):
        assert kron([[1, 2]], [[0], [1]]) == [[0, 0], [1, 2]]


def _gf2_rank_oracle(M):
    rows = [r[:] for r in M]
    rank, col, n = 0, 0, len(M[0])
    while col < n and rank < len(rows):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % 2), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % 2:
                rows[i] = [(a + b) % 2 for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank
