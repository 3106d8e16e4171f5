import pytest

from lattice_rigidity.census import (
    SublatticeBasis,
    canonical_basis,
    census_rigid,
    enumerate_by_colength,
    enumerate_sublattices,
    maximal_sublattices,
)
from lattice_rigidity.errors import NotStable, PrecisionExhausted, ValidationError
from lattice_rigidity.io import lattice_from, order_from
from lattice_rigidity.linalg import RMatrix, howell_basis, span_contains
from lattice_rigidity.orders import direct_sum, is_isomorphic, make_lattice, make_order
from lattice_rigidity.witt import make_context
from oracles import stable_triangular_bases


def cyclic_regular(p, n, N):
    ctx = make_context(p, 1, N)
    c = [[[1 if k == (i + j) % n else 0 for k in range(n)] for j in range(n)] for i in range(n)]
    O = make_order(ctx, c, [1] + [0] * (n - 1), generators=[1] if n > 1 else None,
                   ext_exponent=1 if n % p == 0 else 0)
    return make_lattice(O, [[row[:] for row in c[i]] for i in range(n)]), c


@pytest.fixture(scope="module")
def trivial_O():
    from conftest import load

    O = order_from(load("order_trivial.json"), make_context(2, 1, 8))
    return lattice_from(load("lattice_trivial.json"), O)


def test_rank_one_plus(c2_lattices):
    subs = enumerate_sublattices(c2_lattices["plus"], 1)
    assert [S.B.to_ints() for S in subs] == [[[2]]]


def test_regular_colength_one(c2_lattices):
    reg = c2_lattices["reg"]
    subs = enumerate_sublattices(reg, 1)
    assert len(subs) == 1
    assert subs[0].B.to_ints() == [[1, 1], [0, 2]]
    assert is_isomorphic(subs[0].lattice(), c2_lattices["diag"])


def test_regular_colength_two(c2_lattices):
    reg = c2_lattices["reg"]
    subs = enumerate_sublattices(reg, 2)
    assert len(subs) == 3
    iso_reg = [S for S in subs if is_isomorphic(S.lattice(), reg)]
    iso_diag = [S for S in subs if is_isomorphic(S.lattice(), c2_lattices["diag"])]
    assert [S.B.to_ints() for S in iso_reg] == [[[2, 0], [0, 2]]]
    assert len(iso_diag) == 2


def test_colength_bounds(c2_lattices):
    reg = c2_lattices["reg"]
    with pytest.raises(PrecisionExhausted):
        enumerate_sublattices(reg, 8)
    with pytest.raises(ValidationError):
        enumerate_sublattices(reg, 0)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_completeness_c2_against_brute_force(c2_lattices, l):
    reg = c2_lattices["reg"]
    mats = [M.to_ints() for M in reg.matrices]
    expected = sorted(stable_triangular_bases(mats, 2, l))
    got = sorted(S.B.to_ints() for S in enumerate_sublattices(reg, l))
    assert got == expected


@pytest.mark.parametrize("l", [1, 2])
def test_completeness_c3_against_brute_force(l):
    reg, c = cyclic_regular(3, 3, 5)
    expected = sorted(stable_triangular_bases(c, 3, l))
    got = sorted(S.B.to_ints() for S in enumerate_sublattices(reg, l))
    assert got == expected


def test_completeness_diagonal_against_brute_force(c2_lattices):
    diag = c2_lattices["diag"]
    mats = [M.to_ints() for M in diag.matrices]
    for l in (1, 2):
        expected = sorted(stable_triangular_bases(mats, 2, l))
        got = sorted(S.B.to_ints() for S in enumerate_sublattices(diag, l))
        assert got == expected


def test_sublattices_sit_between_pl_and_l(c2_lattices):
    reg = c2_lattices["reg"]
    ctx = reg.ctx
    for l in (1, 2, 3):
        for S in enumerate_sublattices(reg, l):
            rows, piv = howell_basis(ctx, [list(r) for r in S.B.data], 2)
            for i in range(2):
                e = [ctx.from_int(2**l if j == i else 0) for j in range(2)]
                assert span_contains(ctx, rows, piv, e)


def test_maximal_sublattices_have_positive_colength(c2_lattices):
    root = SublatticeBasis(c2_lattices["diag"], RMatrix.identity(c2_lattices["diag"].ctx, 2))
    kids = maximal_sublattices(root)
    # L/pL is the trivial 2-dim module: three maximal subspaces
    assert len(kids) == 3
    assert all(k.colength == 1 for k in kids)


def test_canonical_basis_examples(c2_lattices, testdata):
    reg = c2_lattices["reg"]
    gens = testdata("sublattice_generators.json")
    S = canonical_basis(gens["M1"], reg)
    assert S.B.to_ints() == [[1, 1], [0, 2]]
    assert canonical_basis(S) == S
    assert canonical_basis(gens["pL_permuted"], reg).B.to_ints() == [[2, 0], [0, 2]]


def test_canonical_basis_not_stable(c2_lattices):
    with pytest.raises(NotStable):
        canonical_basis([[1, 0], [0, 2]], c2_lattices["reg"])


def test_census_c2():
    from conftest import load

    O = order_from(load("order_c2.json"), make_context(2, 1, 8))
    reg = lattice_from(load("lattice_c2_regular.json"), O)
    rep = census_rigid(reg, 4)
    assert len(rep.classes) == 2
    assert len(rep.rigid_classes) == 1
    assert is_isomorphic(rep.rigid_classes[0].representative.lattice(), reg)
    assert rep.counts == {0: 1, 1: 1, 2: 3, 3: 5, 4: 7}


def test_census_trivial_order(trivial_O):
    rep = census_rigid(trivial_O, 3)
    assert len(rep.classes) == 1
    assert rep.classes[0].rigid
    assert rep.counts == {0: 1, 1: 1, 2: 1, 3: 1}


def test_census_c3_rigid_count_stable():
    reg, _ = cyclic_regular(3, 3, 6)
    r1 = census_rigid(reg, 1)
    r2 = census_rigid(reg, 2)
    assert len(r1.rigid_classes) == len(r2.rigid_classes) == 1


def test_multiplicity_bookkeeping(c2_lattices):
    rep = census_rigid(c2_lattices["reg"], 3)
    for l in range(1, 4):
        total = sum(c.multiplicity.get(l, 0) for c in rep.classes)
        assert total == len(enumerate_sublattices(c2_lattices["reg"], l))


def test_census_classes_pairwise_non_isomorphic(c2_lattices):
    rep = census_rigid(c2_lattices["reg"], 3)
    reps = [c.representative.lattice() for c in rep.classes]
    for i, a in enumerate(reps):
        for b in reps[i + 1:]:
            assert not is_isomorphic(a, b)
    for cls in rep.classes:
        rep_lat = cls.representative.lattice()
        assert all(is_isomorphic(rep_lat, m.lattice()) for m in cls.members)


def test_census_of_direct_sum_is_complete(c2_lattices):
    # O+ + O+ is rigid; every sublattice is again a sum of two rank-one lattices
    plus = c2_lattices["plus"]
    L = direct_sum(plus, plus)
    levels = enumerate_by_colength(L, 2)
    assert [len(levels[k]) for k in range(3)] == [1, 3, 7]
