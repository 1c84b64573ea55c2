import itertools
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catwreath.fincat import check_functor
from catwreath.sieves import (
    DownFamily,
    berger_natural_iso,
    berger_sieve,
    crossed_segal,
    delta_part,
    edges_functor,
    empty_sieve,
    enumerate_down_families,
    enumerate_sieves,
    family_to_sieve,
    full_sieve,
    induce_crossed_sieve,
    is_sieve,
    largest_proper_sieve,
    quotient_functor,
    segal_comparison,
    segal_from_sieve,
    sieve_to_family,
    verify_segal_iso,
    verify_sieves,
    window_category,
    yoneda,
    yoneda_quotient,
)
from catwreath.sites import materialize


def brute_force_sieves(ambient, n, window):
    """Every subset of morphisms into ``[n]`` that is closed under precomposition."""
    C = window_category(ambient, window)
    elems = [(k, f) for k in C.objects for f in C.hom(k, n)]
    out = 0
    for mask in range(1 << len(elems)):
        chosen = {elems[b] for b in range(len(elems)) if mask >> b & 1}
        if all((j, C.compose_payloads(j, k, n, f, h)) in chosen
               for k, f in chosen for j in C.objects for h in C.hom(j, k)):
            out += 1
    return out


# -- enumeration ------------------------------------------------------------------


def test_sieve_counts_on_delta():
    assert [len(enumerate_sieves("Δ", n)) for n in range(4)] == [2, 5, 19, 167]


@pytest.mark.parametrize("n", [0, 1, 2])
def test_counts_match_down_families(n):
    assert len(enumerate_sieves("Δ", n)) == len(enumerate_down_families(n))


@pytest.mark.parametrize("ambient,n,window", [("Δ", 0, 1), ("Δ", 1, 1), ("Δ", 1, 2), ("Λ", 1, 1), ("ΔZ/2", 0, 1)])
def test_counts_match_brute_force(ambient, n, window):
    assert len(enumerate_sieves(ambient, n, window)) == brute_force_sieves(ambient, n, window)


def test_enumerated_sieves_are_sieves():
    for S in enumerate_sieves("Δ", 2):
        assert is_sieve(S)
    assert is_sieve(full_sieve("Δ", 1, 2)) and is_sieve(empty_sieve("Λ", 1, 2))


def test_a_non_sieve_is_detected():
    C = window_category("Δ", 2)
    ident = C.payload_at(1, 1, C.identity(1))
    S = empty_sieve("Δ", 1, 2)
    members = (frozenset(), frozenset({ident}), frozenset())
    assert not is_sieve(type(S)("Δ", 1, 2, members))


@pytest.mark.parametrize("n,window", [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4)])
def test_window_stability(n, window):
    small = enumerate_sieves("Δ", n, window)
    big = enumerate_sieves("Δ", n, window + 1)
    assert {S.restrict(window) for S in big} == set(small)
    assert len(big) == len(small)


def test_window_must_contain_base():
    with pytest.raises(ValueError):
        enumerate_sieves("Δ", 2, 1)


# -- classification -----------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2])
def test_classification_round_trips(n):
    sieves = enumerate_sieves("Δ", n)
    families = enumerate_down_families(n)
    assert {family_to_sieve(F) for F in families} == set(sieves)
    assert all(sieve_to_family(family_to_sieve(F)) == F for F in families)
    assert all(family_to_sieve(sieve_to_family(I)) == I for I in sieves)


def test_down_family_validation():
    assert DownFamily.of(2, [(0,), (1,), (0, 1)]).to_json() == [[0], [1], [0, 1]]
    with pytest.raises(ValueError):
        DownFamily.of(2, [(0, 1)])
    with pytest.raises(ValueError):
        DownFamily.of(1, [(2,)])


@settings(max_examples=50, deadline=None)
@given(st.sets(st.sampled_from([A for r in (1, 2, 3) for A in itertools.combinations(range(3), r)])))
def test_downward_closure_is_a_family_and_a_sieve(gens):
    closure = {B for A in gens for r in range(1, len(A) + 1) for B in itertools.combinations(A, r)}
    F = DownFamily.of(2, closure)
    S = family_to_sieve(F)
    assert is_sieve(S)
    assert sieve_to_family(S) == F


def test_verify_sieves_report():
    report = verify_sieves(2)
    assert report.passed
    assert report.notes == ["19 sieves matched"]


# -- the Berger sieve -------------------------------------------------------------------


def test_largest_proper_sieve_is_constants():
    B = largest_proper_sieve(1)
    assert B.members == frozenset({(0,), (1,)})
    full = sieve_to_family(full_sieve("Δ", 1, 2))
    proper = [sieve_to_family(S) for S in enumerate_sieves("Δ", 1) if sieve_to_family(S) != full]
    assert B in proper
    assert all(F.members <= B.members for F in proper)


def test_berger_sieve_members():
    S = berger_sieve(3)
    assert [len(m) for m in S.members] == [2, 2, 2, 2]
    assert all(len(set(f.values)) == 1 for m in S.members for f in m)


def test_quotient_by_everything_and_nothing():
    C = materialize("Δ", 2)
    Y = yoneda(C, 1)
    everything = {x: set(range(len(Y.elements[x]))) for x in C.objects}
    Q, kept = quotient_functor(Y, everything)
    assert check_functor(Q) == [] and all(Q.obj(x) == 0 for x in C.objects)
    Q, kept = quotient_functor(Y, {x: set() for x in C.objects})
    assert check_functor(Q) == []
    assert [Q.obj(x) for x in C.objects] == [C.hom_size(x, 1) for x in C.objects]


def test_quotient_rejects_non_subfunctor():
    C = materialize("Δ", 2)
    Y = yoneda(C, 1)
    ident = C.identity(1)
    with pytest.raises(ValueError):
        quotient_functor(Y, {0: set(), 1: {ident}, 2: set()})


def test_berger_quotient_counts_edges():
    Q, kept = yoneda_quotient(berger_sieve(4))
    assert check_functor(Q) == []
    assert [Q.obj(k) for k in range(5)] == [comb(k + 2, k + 1) - 2 for k in range(5)] == list(range(5))


def test_edges_functor_is_a_functor():
    assert check_functor(edges_functor(4)) == []


@pytest.mark.parametrize("r", [1, 3, 5])
def test_berger_natural_isomorphism(r):
    eta = berger_natural_iso(r)
    assert eta.check_naturality() == []
    assert eta.is_isomorphism()


def test_segal_comparison():
    eta = segal_comparison(3)
    assert eta.check_naturality() == [] and eta.is_isomorphism()
    assert verify_segal_iso(2).passed


def test_delta_segal_from_sieve():
    g = segal_from_sieve(berger_sieve(3))
    assert check_functor(g) == []
    assert [g.obj(k) for k in range(4)] == [0, 1, 2, 3]


# -- crossed simplicial groups ----------------------------------------------------------


@pytest.mark.parametrize("ambient", ["Λ", "ΔZ/2"])
@pytest.mark.parametrize("window", [1, 2, 3])
def test_crossed_induction(ambient, window):
    base = enumerate_sieves("Δ", 1, window)
    induced = [induce_crossed_sieve(S, ambient) for S in base]
    assert len(set(induced)) == len(base)
    assert all(is_sieve(T) for T in induced)
    assert all(delta_part(T) == S for S, T in zip(base, induced))
    window_sieves = enumerate_sieves(ambient, 1, window)
    assert set(induced) == set(window_sieves)
    assert all(induce_crossed_sieve(delta_part(T), ambient) == T for T in window_sieves)


def test_induced_constants_sieve_on_delta_z2():
    T = induce_crossed_sieve(berger_sieve(2), "ΔZ/2")
    assert len(T.members[1]) == 4


def test_cyclic_segal_sizes():
    g = crossed_segal("Λ", 4)
    assert check_functor(g) == []
    L = materialize("Λ", 4)
    assert [g.obj(n) for n in range(5)] == [L.hom_size(n, 0) for n in range(5)] == [n + 1 for n in range(5)]


def test_dihedral_segal_sizes():
    g = crossed_segal("ΔZ/2", 4)
    assert check_functor(g) == []
    D = materialize("ΔZ/2", 4)
    assert [g.obj(n) for n in range(5)] == [D.hom_size(n, 1) - 4 for n in range(5)] == [2 * n for n in range(5)]


def test_crossed_segal_rejects_other_sites():
    with pytest.raises(ValueError):
        crossed_segal("∇", 2)
