"""One test per acceptance criterion; each prints a PASS/FAIL line with its time and limit.

Run alone for cold-cache timings::

    pytest tests/test_acceptance.py -v
"""
import itertools
import time
from math import comb

import pytest

from catwreath.disks import (
    beta,
    disk_category,
    disk_from_fiber_sizes,
    disk_hom,
    enumerate_disks,
    glue_disk,
    minimal_disk,
    phi,
    phi_functor,
    phi_mor,
    validate_disk,
)
from catwreath.duality import verify_bj_duality, verify_crossed_duality
from catwreath.fincat import check_functor, check_isomorphism_of_categories, opposite, validate_category
from catwreath.sieves import (
    berger_natural_iso,
    crossed_segal,
    delta_part,
    enumerate_down_families,
    enumerate_sieves,
    family_to_sieve,
    full_sieve,
    induce_crossed_sieve,
    largest_proper_sieve,
    sieve_to_family,
    window_category,
)
from catwreath.sites import materialize, site_hom
from catwreath.wreath import (
    M_bang,
    Mop_bang,
    check_wreath_double,
    cosegal_omega,
    cowreath,
    duality_iso,
    isofibration_lifts,
    m_star_iso,
    segal_gamma,
    star,
    wreath,
)


@pytest.fixture
def judge(capsys):
    def run(number, title, limit, check):
        t0 = time.perf_counter()
        ok, detail = check()
        dt = time.perf_counter() - t0
        verdict = "PASS" if ok and dt < limit else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {verdict}  {title}  ({dt:.2f}s, limit {limit:g}s)"
                  + ("" if ok else f"  [{detail}]"))
        assert ok, detail
        assert dt < limit, f"took {dt:.2f}s, limit {limit:g}s"
    return run


def first_failure(pairs):
    """``(True, None)`` if every ``(ok, witness)`` holds, else the first witness."""
    for ok, witness in pairs:
        if not ok:
            return False, witness
    return True, None


def is_iso(F):
    return check_functor(F, limit=1) == [] and check_isomorphism_of_categories(F)


def test_criterion_01_hom_counts(judge):
    def check():
        D, L, Z = materialize("Δ", 4), materialize("Λ", 4), materialize("ΔZ/2", 4)
        rows = []
        for n, m in itertools.product(range(5), repeat=2):
            delta = comb(n + m + 1, n + 1)
            rows += [(D.hom_size(n, m) == len(site_hom("Δ", n, m)) == delta, ("Δ", n, m)),
                     (L.hom_size(n, m) == len(site_hom("Λ", n, m)) == (n + 1) * delta, ("Λ", n, m)),
                     (Z.hom_size(n, m) == len(site_hom("ΔZ/2", n, m)) == 2 * delta, ("ΔZ/2", n, m))]
        return first_failure(rows)

    judge(1, "hom counts of Δ, Λ, ΔZ/2 for n, m <= 4", 5, check)


def test_criterion_02_category_validity(judge):
    def check():
        return first_failure((validate_category(materialize(s, 3)) == [], s)
                             for s in ("Δ", "∇", "Γ", "Λ", "ΔZ/2"))

    judge(2, "Δ, ∇, Γ, Λ, ΔZ/2 at rank <= 3 are categories", 30, check)


def test_criterion_03_M_of_point(judge):
    def check():
        F, G = m_star_iso(3), Mop_bang(star(), 3)
        return first_failure([(F.target is materialize("Γ", 3) and is_iso(F), "M(*) -> Γ"),
                              (G.target is opposite(materialize("Γ", 3)) and is_iso(G), "M^op(*) -> Γ^op")])

    judge(3, "M(*) ≅ Γ and M^op(*) ≅ Γ^op at index bound 3", 10, check)


def test_criterion_04_isofibration(judge):
    def check():
        return first_failure(isofibration_lifts(bang(C, 3))
                             for bang in (M_bang, Mop_bang) for C in (star(), materialize("Δ", 2)))

    judge(4, "M(!) and M^op(!) lift isomorphisms at bound 3", 10, check)


def test_criterion_05_wreath_double(judge):
    def check():
        A = materialize("Δ", 2)
        ok, problems = check_wreath_double(segal_gamma(2), A)
        L = wreath(segal_gamma(2), A)
        u = (1, (1,))
        D1 = materialize("Δ", 1)
        oracle = sum(A.hom_size(1, 1) ** len(segal_gamma(1).map_payload(1, 1, f).blocks[0])
                     for f in D1.hom(1, 1))
        return first_failure([(ok, problems), (L.hom_size(u, u) == oracle == 5, L.hom_size(u, u))])

    judge(5, "pullback and direct Δ≤2 ≀ Δ≤2 agree; endo-hom of ([1],([1])) has 5 maps", 10, check)


def test_criterion_06_duality_iso(judge):
    def check():
        F = duality_iso(wreath(segal_gamma(2), materialize("Δ", 2)))
        return is_iso(F), F.name

    judge(6, "duality_iso on Δ≤2 ≀ Δ≤2 is an isomorphism of categories", 10, check)


def _disk_checks(n, disks):
    ims = [phi(X) for X in disks]
    inner = {L for _, ls in ims for L in ls}
    inner.add(minimal_disk(n - 1) if n > 1 else disk_from_fiber_sizes(()))
    inner = sorted(inner, key=lambda X: (X.total, X.fiber_sizes()))
    L = cowreath(cosegal_omega(max(ell for ell, _ in ims)), disk_category(inner, f"D_{n - 1}"))
    yield check_functor(phi_functor(disk_category(disks, f"D_{n}"), L)) == [], ("Φ functor", n)
    for X in disks:
        yield validate_disk(X) == [], X
        yield glue_disk(*phi(X), dim=n) == X, ("glue Φ", X)
    for u in L.objects:
        yield phi(glue_disk(u[0], u[1], dim=n)) == u, ("Φ glue", u)
    for X, Y in itertools.product(disks, repeat=2):
        for f in disk_hom(X, Y):
            yield beta(phi_mor(f, X, Y), X, Y) == f, ("βα", X, Y)
        for g in L.hom(phi(X), phi(Y)):
            yield phi_mor(beta(g, X, Y), X, Y) == g, ("αβ", X, Y)


def test_criterion_07_disks(judge):
    def check():
        if enumerate_disks(4, 8):
            return False, "a 4-disk of size <= 8"
        return first_failure(itertools.chain.from_iterable(
            _disk_checks(n, enumerate_disks(n, 8)) for n in (1, 2, 3)))

    judge(7, "disks of total size <= 8: valid, α/β and glue/Φ round trips", 120, check)


def test_criterion_08_berger_joyal(judge):
    def check():
        reports = [verify_bj_duality(1, (2,), size=8), verify_bj_duality(2, (2, 2), size=8)]
        return first_failure((r.passed, r.failed_stage and r.failed_stage.name) for r in reports)

    judge(8, "Θ_n^op ≃ D_n for n = 1, 2 at bounds (2,2), disk size <= 8", 300, check)


def _brute_force_sieve_count(n, window):
    C = window_category("Δ", window)
    elems = [(k, f) for k in C.objects for f in C.hom(k, n)]
    count = 0
    for mask in range(1 << len(elems)):
        chosen = {elems[b] for b in range(len(elems)) if mask >> b & 1}
        if all((j, C.compose_payloads(j, k, n, f, h)) in chosen
               for k, f in chosen for j in C.objects for h in C.hom(j, k)):
            count += 1
    return count


def test_criterion_09_sieve_classification(judge):
    def check():
        rows = [(_brute_force_sieve_count(1, 2) == 5, "brute force on [1]")]
        for n, expected in ((1, 5), (2, 19)):
            sieves, families = enumerate_sieves("Δ", n), enumerate_down_families(n)
            images = [family_to_sieve(F) for F in families]
            rows += [(len(sieves) == len(families) == expected, (n, len(sieves), len(families))),
                     (len(set(images)) == len(images) and set(images) == set(sieves), ("bijection", n)),
                     (all(sieve_to_family(S) == F for F, S in zip(families, images)), ("ΨΦ", n)),
                     (all(family_to_sieve(sieve_to_family(I)) == I for I in sieves), ("ΦΨ", n))]
        return first_failure(rows)

    judge(9, "sieves on [1], [2] in Δ: 5 and 19, matching down-families", 60, check)


def test_criterion_10_berger_sieve(judge):
    def check():
        B = largest_proper_sieve(1)
        full = sieve_to_family(full_sieve("Δ", 1, 2))
        proper = [F for F in map(sieve_to_family, enumerate_sieves("Δ", 1)) if F != full]
        eta = berger_natural_iso(5)
        return first_failure([(B in proper and all(F.members <= B.members for F in proper), "lattice"),
                              (eta.check_naturality(1) == [], "naturality"),
                              (eta.is_isomorphism(), "invertibility")])

    judge(10, "constants sieve is the largest proper sieve; Y_[1]/S ≅ γ′ for ranks <= 5", 30, check)


def test_criterion_11_crossed_induction(judge):
    def check():
        rows = []
        for ambient, window in itertools.product(("Λ", "ΔZ/2"), (2, 3)):
            base = enumerate_sieves("Δ", 1, window)
            induced = [induce_crossed_sieve(S, ambient) for S in base]
            rows += [(len(set(induced)) == len(base), ("injective", ambient, window)),
                     (all(delta_part(T) == S for S, T in zip(base, induced)), ("restriction", ambient, window)),
                     (set(enumerate_sieves(ambient, 1, window)) == set(induced), ("onto", ambient, window))]
        return first_failure(rows)

    judge(11, "S -> S^G on [1] is injective, restricts back, and hits every sieve", 60, check)


def test_criterion_12_crossed_segal_sizes(judge):
    def check():
        gL, gZ = crossed_segal("Λ", 4), crossed_segal("ΔZ/2", 4)
        L, Z = materialize("Λ", 4), materialize("ΔZ/2", 4)
        rows = [(check_functor(g, limit=1) == [], g.name) for g in (gL, gZ)]
        for n in range(5):
            rows += [(gL.obj(n) == L.hom_size(n, 0) == n + 1, ("Λ", n, gL.obj(n))),
                     (gZ.obj(n) == Z.hom_size(n, 1) - 2 * 2 == 2 * n, ("ΔZ/2", n, gZ.obj(n)))]
        return first_failure(rows)

    judge(12, "γ_Λ has n+1 points and γ_ΔZ/2 has 2n at level n <= 4", 10, check)


def test_criterion_13_crossed_duality(judge):
    def check():
        reports = [verify_crossed_duality(a, (1, 1)) for a in (["Λ", "Δ"], ["ΔZ/2", "ΔZ/2"])]
        return first_failure((r.passed, r.failed_stage and r.failed_stage.name) for r in reports)

    judge(13, "crossed duality for [Λ,Δ] and [ΔZ/2,ΔZ/2] at bounds (1,1)", 60, check)
