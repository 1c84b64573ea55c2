import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catwreath.disks import (
    Disk,
    DiskError,
    beta,
    canonicalize,
    d1_to_nabla_functor,
    disk_category,
    disk_compose,
    disk_from_fiber_sizes,
    disk_hom,
    disk_identity,
    disks_isomorphic,
    enumerate_disks,
    glue_disk,
    interval_disk,
    minimal_disk,
    nabla_hom_disks,
    nabla_to_d1,
    phi,
    phi_functor,
    phi_mor,
    tau,
    validate_disk,
    validate_disk_morphism,
    within_rank_bounds,
)
from catwreath.fincat import check_functor, check_isomorphism_of_categories, validate_category
from catwreath.wreath import cosegal_omega, cowreath


def laws(X, **kw):
    return {v.law for v in validate_disk(X, **kw)}


def relabel(X: Disk, level: int, perm) -> Disk:
    """Renumber the points of ``X_level`` by ``perm``; the result is isomorphic to ``X``."""
    def on(k, v):
        return perm[v] if k == level else v

    s = tuple(tuple(on(k + 1, v) for v in X.s[k]) for k in range(X.dim))
    t = tuple(tuple(on(k + 1, v) for v in X.t[k]) for k in range(X.dim))
    inv = {perm[v]: v for v in range(X.sizes[level])}
    p = tuple(tuple(on(k - 1, X.p[k][inv[v]] if k == level else X.p[k][v]) for v in range(X.sizes[k]))
              if k else () for k in range(X.dim + 1))
    orders = tuple(tuple(tuple(on(k + 1, y) for y in X.fiber_orders[k][inv[x] if k == level else x])
                         for x in range(X.sizes[k])) for k in range(X.dim))
    return Disk(X.dim, X.sizes, s, t, p, orders)


# -- validation -------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_minimal_disks_are_valid(n):
    X = minimal_disk(n)
    assert validate_disk(X) == []
    assert X.total == 1 + 2 * n


def test_two_disk_of_five_points():
    X = minimal_disk(2)
    assert X.sizes == (1, 2, 2)
    assert validate_disk(X) == []


def test_condition_1_violation():
    X = disk_from_fiber_sizes(((2,),))
    bad = Disk(1, X.sizes, ((0,),), ((0,),), X.p, ((( 0, 1),),))
    assert "condition 1" in laws(bad)


def test_condition_2_violation():
    # a single point over the interior of X_1 would make s = t there; here the boundary fiber is too big
    X = disk_from_fiber_sizes(((2,), (2, 1)))
    assert "condition 2" in laws(X)


def test_condition_3_violation():
    X = disk_from_fiber_sizes(((3,),))
    swapped = Disk(1, X.sizes, X.s, X.t, X.p, (((1, 0, 2),),))
    assert "condition 3" in laws(swapped)


def test_globular_violation():
    X = minimal_disk(2)
    s = (X.s[0], (1, 0))
    assert "globular" in laws(Disk(2, X.sizes, s, X.t, X.p, X.fiber_orders))


def test_top_condition_2_is_informational():
    assert laws(minimal_disk(2), informational=True) == {"info"}


def test_shape_violation_stops_early():
    X = minimal_disk(1)
    assert laws(Disk(1, (1, 2), ((5,),), X.t, X.p, X.fiber_orders)) == {"shape"}


# -- canonical forms ----------------------------------------------------------------


def test_relabeling_gives_isomorphic_disk():
    X = disk_from_fiber_sizes(((3,), (1, 3, 1)))
    Y = relabel(X, 2, [4, 0, 2, 1, 3])
    assert validate_disk(Y) == []
    assert Y != X
    assert canonicalize(Y) == X and disks_isomorphic(X, Y)


def test_non_isomorphic_disks():
    assert not disks_isomorphic(disk_from_fiber_sizes(((3,), (1, 2, 1))), minimal_disk(2))
    assert not disks_isomorphic(minimal_disk(1), minimal_disk(2))


def test_bad_fiber_sizes_rejected():
    with pytest.raises(DiskError):
        disk_from_fiber_sizes(((2,), (1,)))
    with pytest.raises(DiskError):
        disk_from_fiber_sizes(((0,),))


# -- enumeration ------------------------------------------------------------------


def test_enumeration_counts_at_size_8():
    assert len(enumerate_disks(1, 8)) == 6
    assert [X.fiber_sizes() for X in enumerate_disks(2, 8)] == [((2,), (1, 1)), ((3,), (1, 2, 1))]
    assert enumerate_disks(3, 8) == [minimal_disk(3)]
    assert enumerate_disks(1, 2) == []


def test_enumeration_is_valid_and_distinct():
    for n in (1, 2, 3):
        found = enumerate_disks(n, 11)
        assert all(validate_disk(X) == [] for X in found)
        assert len({canonicalize(X) for X in found}) == len(found)


def brute_force_disk_count(n, size):
    """Independent count: choose fiber sizes level by level without pruning."""
    count = 0

    def rec(k, boundary, total):
        nonlocal count
        if total > size:
            return
        if k == n:
            count += 1
            return
        interior = [b for b in boundary if not b]
        for sizes in itertools.product(range(2, size - total + 1), repeat=len(interior)):
            it = iter(sizes)
            row = [1 if b else next(it) for b in boundary]
            nxt = [j in (0, m - 1) for m in row for j in range(m)]
            rec(k + 1, nxt, total + sum(row))

    rec(0, [False], 1)
    return count


@pytest.mark.parametrize("n,size", [(1, 9), (2, 12), (3, 12)])
def test_enumeration_matches_brute_force(n, size):
    assert len(enumerate_disks(n, size)) == brute_force_disk_count(n, size)


def test_rank_bounds():
    found = enumerate_disks(2, 14, (1, 1))
    assert found and all(within_rank_bounds(X, (1, 1)) for X in found)
    assert all(max(X.fiber_sizes()[1]) <= 3 for X in found)


# -- morphisms ----------------------------------------------------------------------


def test_minimal_hom_is_a_point():
    for n in (1, 2, 3):
        assert len(disk_hom(minimal_disk(n), minimal_disk(n))) == 1


@pytest.mark.parametrize("a,b", [(1, 1), (1, 3), (3, 1), (2, 4), (4, 4)])
def test_one_disk_homs_match_nabla(a, b):
    X, Y = interval_disk(a), interval_disk(b)
    homs = disk_hom(X, Y)
    assert len(homs) == nabla_hom_disks(X, Y)
    assert all(validate_disk_morphism(f, X, Y) == [] for f in homs)


def test_disk_category_is_valid():
    D = disk_category(enumerate_disks(2, 11), "D_2")
    assert validate_category(D) == []
    assert D.header["dim"] == 2


def test_d1_and_nabla_are_isomorphic():
    D1 = disk_category([interval_disk(m) for m in range(1, 4)], "D_1")
    J = nabla_to_d1(3, D1)
    assert check_functor(J) == []
    assert check_isomorphism_of_categories(J)
    assert check_functor(d1_to_nabla_functor(D1, 3)) == []


TWO_DISKS = enumerate_disks(2, 12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TWO_DISKS), st.sampled_from(TWO_DISKS), st.sampled_from(TWO_DISKS), st.data())
def test_disk_composition_is_a_disk_morphism(X, Y, Z, data):
    f_opts, g_opts = disk_hom(X, Y), disk_hom(Y, Z)
    if not (f_opts and g_opts):
        return
    f = data.draw(st.sampled_from(f_opts))
    g = data.draw(st.sampled_from(g_opts))
    assert validate_disk_morphism(disk_compose(g, f), X, Z) == []
    assert disk_compose(f, disk_identity(X)) == f


# -- τ, Φ, gluing ---------------------------------------------------------------------


def test_tau_examples():
    X = disk_from_fiber_sizes(((4,), (1, 2, 3, 1)))
    assert [tau(X, i).fiber_sizes() for i in (1, 2)] == [((2,),), ((3,),)]
    with pytest.raises(DiskError):
        tau(X, 0)


def test_phi_of_minimal_disk_has_no_labels():
    assert phi(minimal_disk(2)) == (1, ())


def test_glue_examples():
    assert glue_disk(1, (), dim=3) == minimal_disk(3)
    assert glue_disk(2, (interval_disk(1),)) == disk_from_fiber_sizes(((3,), (1, 2, 1)))
    with pytest.raises(DiskError):
        glue_disk(3, (interval_disk(1),))
    with pytest.raises(DiskError):
        glue_disk(2, (interval_disk(1),), dim=3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_glue_phi_round_trip(n):
    for X in enumerate_disks(n, 12):
        ell, labels = phi(X)
        assert glue_disk(ell, labels, dim=n) == X


def cowreath_for(disks, n):
    """The cowreath target of Φ for the given n-disks, over all smaller labels needed."""
    ims = [phi(X) for X in disks]
    inner = sorted({L for _, ls in ims for L in ls} | {minimal_disk(n - 1) if n > 1 else disk_from_fiber_sizes(())},
                   key=lambda X: (X.total, X.fiber_sizes()))
    r = max(ell for ell, _ in ims)
    return cowreath(cosegal_omega(r), disk_category(inner, f"D_{n - 1}"))


@pytest.mark.parametrize("n", [1, 2])
def test_phi_glue_round_trip_on_objects(n):
    L = cowreath_for(enumerate_disks(n, 10), n)
    for u in L.objects:
        assert phi(glue_disk(u[0], u[1], dim=n)) == u


@pytest.mark.parametrize("n", [1, 2, 3])
def test_alpha_beta_round_trips(n):
    disks = enumerate_disks(n, 8)
    L = cowreath_for(disks, n)
    assert check_functor(phi_functor(disk_category(disks, f"D_{n}"), L)) == []
    for X, Y in itertools.product(disks, repeat=2):
        for f in disk_hom(X, Y):
            assert beta(phi_mor(f, X, Y), X, Y) == f
        for g in L.hom(phi(X), phi(Y)):
            assert phi_mor(beta(g, X, Y), X, Y) == g
