import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_rigidity.errors import NotUnit, PrecisionExhausted
from lattice_rigidity.linalg import (
    RMatrix,
    det_valuation,
    howell_form,
    invert,
    kernel,
    kernel_module,
    smith_invariants,
    span_contains,
)
from lattice_rigidity.witt import make_context


def M(ctx, rows):
    return RMatrix.from_entries(ctx, rows)


def random_matrix(ctx, r, c, rng):
    return RMatrix(ctx, [[ctx.random(rng) for _ in range(c)] for _ in range(r)], c)


def span_set(ctx, rows):
    """All R-combinations of rows, as a set of tuples (tiny rings only)."""
    elems = [ctx.from_int(a) for a in range(ctx.pN)]
    out = set()
    ncols = len(rows[0]) if rows else 0
    for coeffs in itertools.product(elems, repeat=len(rows)):
        v = [ctx.zero] * ncols
        for c, r in zip(coeffs, rows):
            v = [ctx.add(x, ctx.mul(c, y)) for x, y in zip(v, r)]
        out.add(tuple(v))
    return out


def test_howell_identity():
    ctx = make_context(2, 1, 4)
    I = RMatrix.identity(ctx, 3)
    hf = howell_form(I)
    assert hf.H == I and hf.U == I


def test_howell_p_diag_pivots(testdata):
    ctx = make_context(2, 1, 4)
    hf = howell_form(M(ctx, testdata("matrices.json")["howell_p_diag"]))
    assert hf.pivots == ((0, 1), (1, 0))


def test_howell_all_ones(testdata):
    ctx = make_context(2, 1, 4)
    hf = howell_form(M(ctx, testdata("matrices.json")["howell_ones"]))
    assert hf.H.to_ints() == [[1, 1], [0, 0]]
    assert hf.rank == 1


@pytest.mark.parametrize("seed", range(20))
def test_howell_transform_and_idempotence(seed):
    rng = random.Random(seed)
    ctx = make_context(rng.choice([2, 3]), rng.choice([1, 2]), rng.randint(2, 5))
    A = random_matrix(ctx, rng.randint(1, 4), rng.randint(1, 4), rng)
    hf = howell_form(A)
    assert hf.U @ A == hf.H
    assert howell_form(hf.H).H == hf.H


@pytest.mark.parametrize("seed", range(20))
def test_howell_canonical_under_row_operations(seed):
    rng = random.Random(100 + seed)
    ctx = make_context(2, 1, 4)
    A = random_matrix(ctx, 3, 3, rng)
    A = RMatrix(ctx, [A.data[0], A.data[1], A.data[0]], 3)
    # multiply by a random unimodular matrix (unit lower triangular times permutation)
    n = A.nrows
    L = [[ctx.one if i == j else (ctx.random(rng) if j < i else ctx.zero) for j in range(n)] for i in range(n)]
    perm = list(range(n))
    rng.shuffle(perm)
    P = [[ctx.one if perm[i] == j else ctx.zero for j in range(n)] for i in range(n)]
    B = RMatrix(ctx, P, n) @ RMatrix(ctx, L, n) @ A
    assert howell_form(A).H == howell_form(B).H


def test_howell_span_matches_brute_force():
    ctx = make_context(2, 1, 2)
    rng = random.Random(7)
    for _ in range(40):
        A = random_matrix(ctx, 2, 2, rng)
        H = [r for r in howell_form(A).H.data]
        assert span_set(ctx, A.data) == span_set(ctx, H)


def test_kernel_examples(testdata):
    ctx = make_context(2, 1, 4)
    Z = RMatrix.zeros(ctx, 2, 2)
    assert kernel(Z) == RMatrix.identity(ctx, 2)
    assert kernel(RMatrix.identity(ctx, 2)).nrows == 0
    A = M(ctx, testdata("matrices.json")["kernel_p"])
    with pytest.raises(PrecisionExhausted):
        kernel(A)
    assert kernel_module(A).to_ints() == [[8]]
    assert kernel(A, saturate=True).nrows == 0


def test_kernel_brute_force_w2f2():
    """Over W_2(F_2): kernel rows solve the system, and when no torsion is
    present their span is the full solution set."""
    ctx = make_context(2, 1, 2)
    elems = [ctx.from_int(a) for a in range(4)]
    count = 0
    for entries in itertools.product(range(4), repeat=4):
        A = M(ctx, [entries[:2], entries[2:]])
        sols = {
            v for v in itertools.product(elems, repeat=2)
            if all(not any(x) for x in (RMatrix(ctx, [list(v)], 2) @ A).data[0])
        }
        full = kernel_module(A)
        assert span_set(ctx, full.data) == sols if full.nrows else sols == {(ctx.zero, ctx.zero)}
        try:
            K = kernel(A)
        except PrecisionExhausted:
            continue
        count += 1
        got = span_set(ctx, K.data) if K.nrows else {(ctx.zero, ctx.zero)}
        assert got == sols
    assert count > 0


def test_kernel_is_saturated_with_nonunit_leading_entry():
    ctx = make_context(2, 1, 8)
    # solutions (a, b) with 2a + b = 0: spanned by (1, -2), primitive
    A = M(ctx, [[2], [1]])
    K = kernel(A)
    assert K.nrows == 1
    v = K.data[0]
    assert ctx.add(ctx.mul_p(v[0], 1), v[1]) == ctx.zero
    assert min(ctx.val(x) for x in v) == 0


def test_det_valuation_examples(testdata):
    ctx = make_context(2, 1, 6)
    data = testdata("matrices.json")
    assert det_valuation(RMatrix.identity(ctx, 3)) == 0
    assert det_valuation(M(ctx, data["det_pp"])) == 2
    assert det_valuation(M(ctx, data["det_swap"])) == 0
    assert det_valuation(RMatrix.zeros(ctx, 2, 2)) == 6


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_det_valuation_multiplicative(seed):
    rng = random.Random(seed)
    ctx = make_context(rng.choice([2, 3]), 1, 8)
    A, B = random_matrix(ctx, 3, 3, rng), random_matrix(ctx, 3, 3, rng)
    a, b = det_valuation(A), det_valuation(B)
    if a + b < ctx.N:
        assert det_valuation(A @ B) == a + b


def test_invert_examples(testdata):
    ctx = make_context(2, 1, 4)
    data = testdata("matrices.json")
    I = RMatrix.identity(ctx, 2)
    assert invert(I) == I
    S = M(ctx, data["det_swap"])
    assert invert(S) == S
    with pytest.raises(NotUnit):
        invert(M(ctx, data["not_unit"]))


def test_invert_random_units():
    rng = random.Random(2024)
    done = 0
    while done < 1000:
        ctx = make_context(rng.choice([2, 3]), rng.choice([1, 2]), rng.randint(1, 6))
        A = random_matrix(ctx, 3, 3, rng)
        if det_valuation(A) != 0:
            continue
        assert invert(A) @ A == RMatrix.identity(ctx, 3)
        done += 1


def test_smith_examples(testdata):
    ctx = make_context(2, 1, 6)
    data = testdata("matrices.json")
    assert smith_invariants(M(ctx, data["smith_diag"])) == [0, 1, 2]
    assert smith_invariants(M(ctx, data["smith_zero"])) == [6, 6]
    assert smith_invariants(M(ctx, data["smith_p1p"])) == [0, 2]


def test_span_contains():
    ctx = make_context(3, 1, 3)
    hf = howell_form(M(ctx, [[3, 1], [0, 9]]))
    rows = [r for r in hf.H.data[: hf.rank]]
    assert span_contains(ctx, rows, hf.pivots, [ctx.from_int(6), ctx.from_int(2)])
    assert not span_contains(ctx, rows, hf.pivots, [ctx.from_int(1), ctx.from_int(0)])
