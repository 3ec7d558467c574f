import itertools
import json
import math

import numpy as np
import pytest

from seqsum.errors import ParseError, SpaceMismatchError, ZeroDenominatorError
from seqsum.multilinear import (MultilinearOp, ProductOp, divergence_probe, divergence_verdict,
                                lower_bound_search, permute, probe_ks, rank_one, rank_one_bilinear,
                                summing_ratio, symmetrize, transpose)
from seqsum.seqclasses import (Constant, FiniteSeq, LInfSup, LpAbs, LpWeak, Rad, ScaledPattern, UnitVectors)
from seqsum.spaces import INF, Space

E2 = Space(2, 2)
E3 = Space(3, 2)
K = Space(1, 2)


def random_op(rng, n, E=E3, F=E2):
    return MultilinearOp((E,) * n, F, rng.standard_normal((E.dim,) * n + (F.dim,)))


def test_shape_validation():
    with pytest.raises(SpaceMismatchError):
        MultilinearOp((E2, E3), E2, np.zeros((2, 2, 2)))
    with pytest.raises(SpaceMismatchError):
        random_op(np.random.default_rng(0), 2).apply([1.0, 0.0], [1.0, 0.0, 0.0])


def test_scalar_product_operator():
    A = MultilinearOp((K, K), K, np.ones((1, 1, 1)))
    assert A.apply([2.0], [3.0]).coords.tolist() == [6.0]


def test_basis_args_give_fibers():
    rng = np.random.default_rng(1)
    A = random_op(rng, 3)
    for idx in itertools.product(range(3), repeat=3):
        args = [E3.basis(i) for i in idx]
        assert np.array_equal(A.apply(*args).coords, A.coeffs[idx])


def test_multilinearity():
    rng = np.random.default_rng(2)
    A = random_op(rng, 3)
    for slot in range(3):
        args = list(rng.standard_normal((3, 3)))
        x, y = rng.standard_normal((2, 3))
        a, b = rng.standard_normal(2)
        lhs = A.apply(*[a * x + b * y if i == slot else v for i, v in enumerate(args)]).coords
        rx = A.apply(*[x if i == slot else v for i, v in enumerate(args)]).coords
        ry = A.apply(*[y if i == slot else v for i, v in enumerate(args)]).coords
        assert np.allclose(lhs, a * rx + b * ry, atol=1e-10)


def test_apply_batch_matches_apply():
    rng = np.random.default_rng(3)
    A = random_op(rng, 3)
    W = [rng.standard_normal((4, 3)) for _ in range(3)]
    out = A.apply_batch(*W)
    for j in range(4):
        assert np.allclose(out.items[j], A.apply(W[0][j], W[1][j], W[2][j]).coords)


def test_permute_semantics():
    rng = np.random.default_rng(4)
    A = random_op(rng, 3)
    x = list(rng.standard_normal((3, 3)))
    for sigma in itertools.permutations(range(3)):
        B = permute(A, sigma)
        assert np.allclose(B.apply(*x).coords, A.apply(*[x[s] for s in sigma]).coords)
    assert np.array_equal(permute(A, (0, 1, 2)).coeffs, A.coeffs)
    A2 = random_op(rng, 2)
    assert np.array_equal(transpose(transpose(A2)).coeffs, A2.coeffs)
    with pytest.raises(SpaceMismatchError):
        permute(MultilinearOp((E2, E3), K, np.zeros((2, 3, 1))), (1, 0))
    with pytest.raises(ValueError):
        permute(A, (0, 0, 1))


def test_symmetrize_properties():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        A = random_op(rng, n, E2, K)
        S = symmetrize(A)
        assert np.abs(symmetrize(S).coeffs - S.coeffs).max() <= 1e-14
        for sigma in itertools.permutations(range(n)):
            assert np.abs(permute(S, sigma).coeffs - S.coeffs).max() <= 1e-14


def test_symmetrize_bilinear_closed_form():
    A = random_op(np.random.default_rng(6), 2)
    assert np.array_equal(symmetrize(A).coeffs, (A.coeffs + transpose(A).coeffs) / 2)


def test_symmetrize_trilinear_hand_built():
    # A(x, y, z) = x_1 y_2 z_1 on l2^2: the index (0, 1, 0) is sent by S_3 to
    # (0,1,0), (1,0,0), (0,0,1), twice each
    c = np.zeros((2, 2, 2, 1))
    c[0, 1, 0, 0] = 1.0
    hand = np.zeros((2, 2, 2, 1))
    for idx in [(0, 1, 0), (1, 0, 0), (0, 0, 1)]:
        hand[idx + (0,)] = 2 / 6
    assert np.allclose(symmetrize(MultilinearOp((E2,) * 3, K, c)).coeffs, hand, atol=0)


def test_symmetric_is_fixed():
    S = symmetrize(random_op(np.random.default_rng(7), 3, E2))
    assert np.abs(symmetrize(S).coeffs - S.coeffs).max() <= 1e-14


def test_rank_one_bilinear():
    f = E3.dual().basis(0)
    A = rank_one_bilinear(f)
    y = E3.vector([1.0, 2.0, 3.0])
    assert np.array_equal(A.apply(E3.basis(1), y).coords, np.zeros(3))
    assert np.array_equal(A.apply(E3.basis(0), y).coords, y.coords)
    x = np.array([2.0, -1.0, 0.5])
    At = transpose(A)
    # A^t(x, y) = f(y) x
    assert np.allclose(At.apply(x, y.coords).coords, 1.0 * x)
    assert np.allclose(A.to_dense().apply(x, y.coords).coords, A.apply(x, y.coords).coords)
    assert np.allclose(At.to_dense().coeffs, transpose(A.to_dense()).coeffs)


def test_rank_one_bilinear_with_map():
    f = E2.dual().vector([1.0, -1.0])
    U = MultilinearOp((E3,), E2, np.arange(6.0).reshape(3, 2))
    A = rank_one_bilinear(f, U)
    x, y = np.array([3.0, 1.0]), np.array([1.0, 0.0, 2.0])
    assert np.allclose(A.apply(x, y).coords, 2.0 * U.apply(y).coords)
    assert np.allclose(A.to_dense().apply(x, y).coords, A.apply(x, y).coords)


def test_rank_one_trilinear():
    fs = [E2.dual().vector([1.0, 2.0]), E2.dual().vector([0.0, 1.0]), E2.dual().vector([-1.0, 1.0])]
    y = E3.vector([1.0, 0.0, -1.0])
    A = rank_one(fs, y)
    args = [np.array([1.0, 1.0]), np.array([5.0, 2.0]), np.array([0.0, 3.0])]
    assert np.allclose(A.apply(*args).coords, 3.0 * 2.0 * 3.0 * y.coords)
    assert np.allclose(A.to_dense().apply(*args).coords, A.apply(*args).coords)
    B = permute(A, (2, 0, 1))
    assert np.allclose(B.apply(*args).coords, A.apply(args[2], args[0], args[1]).coords)


def test_operator_json_roundtrip(tmp_path):
    A = random_op(np.random.default_rng(8), 2)
    p = tmp_path / "op.json"
    p.write_text(json.dumps(A.to_dict()))
    B = MultilinearOp.load(p)
    assert np.array_equal(A.coeffs, B.coeffs) and B.domains == A.domains
    with pytest.raises(ParseError):
        MultilinearOp.from_dict({"arity": 2})


# ---------------------------------------------------------------- ratios

def test_ratio_scalar_product():
    A = MultilinearOp((K, K), K, np.ones((1, 1, 1)))
    for k in (1, 4, 9):
        w = FiniteSeq(K, np.ones((k, 1)))
        assert summing_ratio(A, [LpAbs(2), LpAbs(2)], LpAbs(1), [w, w]) == pytest.approx(1.0)


def test_ratio_zero_operator_and_zero_witness():
    A = MultilinearOp((E2, E2), E2, np.zeros((2, 2, 2)))
    w = FiniteSeq(E2, np.ones((3, 2)))
    assert summing_ratio(A, [LpAbs(1)] * 2, LpAbs(1), [w, w]) == 0.0
    with pytest.raises(ZeroDenominatorError):
        summing_ratio(A, [LpAbs(1)] * 2, LpAbs(1), [w, FiniteSeq(E2, np.zeros((3, 2)))])
    with pytest.raises(ValueError):
        summing_ratio(A, [LpAbs(1)] * 2, LpAbs(1), [w, w], k=5)


def test_ratio_homogeneity():
    rng = np.random.default_rng(9)
    A = random_op(rng, 2)
    W = [FiniteSeq(E3, rng.standard_normal((4, 3))) for _ in range(2)]
    base = summing_ratio(A, [LpWeak(2), Rad()], LpAbs(2), W)
    for slot in range(2):
        V = list(W)
        V[slot] = W[slot].scaled(np.full(4, 3.7))
        assert summing_ratio(A, [LpWeak(2), Rad()], LpAbs(2), V) == pytest.approx(base, rel=1e-10)


def test_permutation_average_bound():
    rng = np.random.default_rng(10)
    for i in range(100):
        n = 2 + i % 2
        A = random_op(rng, n, E2, E2)
        X = [LpAbs(2), LpWeak(2), LInfSup(), Rad()][i % 4]
        W = [FiniteSeq(E2, rng.standard_normal((3, 2))) for _ in range(n)]
        lhs = summing_ratio(symmetrize(A), [X] * n, LpAbs(1), W)
        rhs = max(summing_ratio(permute(A, s), [X] * n, LpAbs(1), W) for s in itertools.permutations(range(n)))
        assert lhs <= rhs + 1e-9


# ---------------------------------------------------------------- search

def test_search_reaches_analytic_value():
    # A(x, y) = f(x) g(y) scalar-valued on l_inf^2; with weak-1 x linf -> l1 the
    # ratio is at most ||f||_1 ||g||_1, attained at one norming pair
    E = Space(2, INF)
    f, g = np.array([1.0, -0.5]), np.array([0.25, 2.0])
    A = rank_one([E.dual().vector(f), E.dual().vector(g)], K.vector([1.0]))
    est = lower_bound_search(A, [LpWeak(1), LInfSup()], LpAbs(1), budget=300, ks=(1, 2), restarts=8)
    analytic = np.abs(f).sum() * np.abs(g).sum()
    assert est.value >= 0.95 * analytic
    assert est.value <= analytic * (1 + 1e-9)
    k = len(est.witness[0])
    assert summing_ratio(A, [LpWeak(1), LInfSup()], LpAbs(1), est.witness) == pytest.approx(est.value)
    assert max(r for _, r in est.trace) == est.value and k in (1, 2)


def test_search_zero_operator():
    A = MultilinearOp((E2, E2), E2, np.zeros((2, 2, 2)))
    est = lower_bound_search(A, [LpAbs(2)] * 2, LpAbs(1), budget=20, restarts=2)
    assert est.value == 0.0


def test_search_permutation_agreement():
    rng = np.random.default_rng(11)
    A = random_op(rng, 2, E2, E2)
    cl = [LpAbs(2), LpAbs(2)]
    a = lower_bound_search(A, cl, LpAbs(1), budget=300, restarts=8, seed=1).value
    b = lower_bound_search(transpose(A), cl, LpAbs(1), budget=300, restarts=8, seed=1).value
    assert abs(a - b) <= 0.05 * max(a, b)


# ---------------------------------------------------------------- probes

def test_probe_ks_and_verdict():
    assert probe_ks(128) == [16, 32, 64, 128]
    assert divergence_verdict(np.log([16, 32, 64, 128])) == "diverging"
    assert divergence_verdict([1.0, 1.5, 1.75, 1.875]) == "bounded"
    assert divergence_verdict([1.0, 0.9, 0.8]) == "bounded"


def test_ex36_probe_matches_partial_sums():
    K_MAX = 512
    E = Space(K_MAX, INF)
    A = rank_one_bilinear(E.dual().basis(0))
    fams = [UnitVectors(K_MAX), ScaledPattern(1, E.basis(0))]
    r = divergence_probe(transpose(A), [LpWeak(1), LpWeak(2)], LpAbs(1), fams, K_MAX)
    for k, rho in r.trace:
        h = math.fsum(1 / j for j in range(1, k + 1))
        s = math.sqrt(math.fsum(1 / j ** 2 for j in range(1, k + 1)))
        assert rho == pytest.approx(h / s, rel=1e-9)
    assert r.verdict == "diverging"
    # the untransposed operator only sees j = 1: rho_k = 1 / ||(1/j)_{j<=k}||_2
    r = divergence_probe(A, [LpWeak(1), LpWeak(2)], LpAbs(1), fams, K_MAX)
    assert all(rho <= 1.0 for _, rho in r.trace)
    assert r.verdict == "bounded"


def test_p34_probe():
    E = Space(256, INF)
    A = rank_one_bilinear(E.dual().basis(0))
    r = divergence_probe(transpose(A), [LpWeak(1), LInfSup()], LpAbs(1),
                         [UnitVectors(256), Constant(E.basis(0))], 256)
    assert [rho for _, rho in r.trace] == [16.0, 32.0, 64.0, 128.0, 256.0]


def test_zero_family_probe_errors():
    E = Space(32, INF)
    A = rank_one_bilinear(E.dual().basis(0))
    with pytest.raises(ZeroDenominatorError):
        divergence_probe(A, [LpWeak(1), LpWeak(2)], LpAbs(1), [UnitVectors(32), Constant(E.zero())], 32)


def test_product_op_validation():
    with pytest.raises(ValueError):
        ProductOp((E2, E2), E2, (None, None))
    with pytest.raises(SpaceMismatchError):
        ProductOp((E2, E3), E2, (np.ones(2), None))
