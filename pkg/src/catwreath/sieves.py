"""Sieves on Δ and on crossed simplicial groups, quotients ``F/S`` and the
Segal functors they produce.

A sieve on ``[n]`` is a subfunctor of the representable ``Y_{[n]}``: a family
of morphisms into ``[n]`` closed under precomposition.  Sieves are only
enumerated over a *window*, the full subcategory on ranks ``0..K``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fincat import FiniteCategory, FunctorData, NaturalTransformation, jsonify, opposite
from .sites import (
    CROSSED,
    PointedMap,
    SimplexMorphism,
    materialize,
    pointed_to_gamma,
    site_name,
)


@dataclass(frozen=True)
class DownFamily:
    """Nonempty subsets of ``{0..base}`` closed under nonempty subsets."""

    base: int
    members: frozenset

    def __post_init__(self):
        for A in self.members:
            if not A or tuple(sorted(set(A))) != tuple(A) or not all(0 <= a <= self.base for a in A):
                raise ValueError(f"{A} is not a nonempty sorted subset of 0..{self.base}")
            for r in range(1, len(A)):
                for B in itertools.combinations(A, r):
                    if B not in self.members:
                        raise ValueError(f"{B} is missing below {A}")

    @classmethod
    def of(cls, base: int, members) -> "DownFamily":
        return cls(base, frozenset(tuple(sorted(A)) for A in members))

    def to_json(self):
        return sorted((list(A) for A in self.members), key=lambda A: (len(A), A))


@dataclass(frozen=True)
class SieveWindow:
    """``members[k]``: the chosen morphisms ``[k] -> [base]`` (as payloads), ``k <= window``."""

    ambient: str
    base: int
    window: int
    members: tuple

    def size(self) -> int:
        return sum(len(m) for m in self.members)

    def restrict(self, window: int) -> "SieveWindow":
        return SieveWindow(self.ambient, self.base, window, self.members[:window + 1])

    def to_json(self):
        C = window_category(self.ambient, self.window)
        return {"ambient": self.ambient, "base": self.base, "window": self.window,
                "members": [[jsonify(p) for p in C.hom(k, self.base) if p in self.members[k]]
                            for k in range(self.window + 1)]}


def window_category(ambient: str, window: int) -> FiniteCategory:
    return materialize(site_name(ambient), window)


def all_nonempty_subsets(n: int) -> list[tuple]:
    return [A for r in range(1, n + 2) for A in itertools.combinations(range(n + 1), r)]


def enumerate_down_families(n: int) -> list[DownFamily]:
    """Brute force: every family of nonempty subsets that is closed downward."""
    subsets = all_nonempty_subsets(n)
    out = []
    for mask in range(1 << len(subsets)):
        chosen = {A for b, A in enumerate(subsets) if mask >> b & 1}
        if all(B in chosen for A in chosen for r in range(1, len(A))
               for B in itertools.combinations(A, r)):
            out.append(DownFamily(n, frozenset(chosen)))
    return out


# ---------------------------------------------------------------------------
# enumeration


class _Universe:
    """Morphisms into ``[n]`` over the window, with their down- and up-sets as bitmasks."""

    def __init__(self, C: FiniteCategory, n: int):
        self.C, self.n = C, n
        self.elements = [(k, e) for k in C.objects for e in range(C.hom_size(k, n))]
        self.bit = {el: b for b, el in enumerate(self.elements)}
        down = []
        for k, e in self.elements:
            mask = 0
            for k2 in C.objects:
                if C.hom_size(k2, k):
                    for e2 in np.unique(C.compose_table(k2, k, n)[e, :]).tolist():
                        mask |= 1 << self.bit[(k2, e2)]
            down.append(mask)
        self.down = down
        up = [0] * len(self.elements)
        for b, mask in enumerate(down):
            rest = mask
            while rest:
                low = rest & -rest
                up[low.bit_length() - 1] |= 1 << b
                rest ^= low
        self.up = up

    def down_sets(self):
        out = []
        stack = [((1 << len(self.elements)) - 1, 0)]
        while stack:
            undecided, included = stack.pop()
            if not undecided:
                out.append(included)
                continue
            b = (undecided & -undecided).bit_length() - 1
            stack.append((undecided & ~self.up[b], included))
            stack.append((undecided & ~self.down[b], included | self.down[b]))
        return sorted(out, key=lambda m: (bin(m).count("1"), m))

    def to_window(self, ambient: str, mask: int, window: int) -> SieveWindow:
        members = [set() for _ in range(window + 1)]
        for b, (k, e) in enumerate(self.elements):
            if mask >> b & 1:
                members[k].add(self.C.hom(k, self.n)[e])
        return SieveWindow(ambient, self.n, window, tuple(frozenset(m) for m in members))

    def mask_of(self, S: SieveWindow) -> int:
        mask = 0
        for k, ms in enumerate(S.members):
            for p in ms:
                mask |= 1 << self.bit[(k, self.C.local_index(k, self.n, p))]
        return mask

    def is_sieve(self, mask: int) -> bool:
        return all(self.down[b] & ~mask == 0 for b in range(len(self.elements)) if mask >> b & 1)


@lru_cache(maxsize=None)
def _universe(ambient: str, n: int, window: int) -> _Universe:
    return _Universe(window_category(ambient, window), n)


def enumerate_sieves(ambient: str, n: int, window: int | None = None) -> list[SieveWindow]:
    """All sieves on ``[n]`` over ranks ``0..window`` (default ``n + 1``)."""
    ambient = site_name(ambient)
    window = n + 1 if window is None else window
    if window < n:
        raise ValueError("the window must contain the base object")
    U = _universe(ambient, n, window)
    return [U.to_window(ambient, m, window) for m in U.down_sets()]


def is_sieve(S: SieveWindow) -> bool:
    U = _universe(S.ambient, S.base, S.window)
    return U.is_sieve(U.mask_of(S))


def full_sieve(ambient: str, n: int, window: int) -> SieveWindow:
    C = window_category(ambient, window)
    return SieveWindow(site_name(ambient), n, window,
                       tuple(frozenset(C.hom(k, n)) for k in range(window + 1)))


def empty_sieve(ambient: str, n: int, window: int) -> SieveWindow:
    return SieveWindow(site_name(ambient), n, window, tuple(frozenset() for _ in range(window + 1)))


# ---------------------------------------------------------------------------
# classification on Δ


def family_to_sieve(S: DownFamily, window: int | None = None) -> SieveWindow:
    """``Φ(S)([k]) = {f : im(f) ∈ S}``."""
    window = S.base + 1 if window is None else window
    C = window_category("Δ", window)
    return SieveWindow("Δ", S.base, window,
                       tuple(frozenset(f for f in C.hom(k, S.base) if tuple(sorted(set(f.values))) in S.members)
                             for k in range(window + 1)))


def sieve_to_family(I: SieveWindow) -> DownFamily:
    """``Ψ(I) = {im(f) : f ∈ I}``."""
    if I.ambient != "Δ":
        raise ValueError("images are taken in Δ")
    return DownFamily(I.base, frozenset(tuple(sorted(set(f.values))) for ms in I.members for f in ms))


def largest_proper_sieve(n: int = 1) -> DownFamily:
    """The constants sieve on ``[1]``: ``{{0}, {1}}``."""
    if n != 1:
        raise ValueError("stated for [1] only")
    return DownFamily.of(1, [(0,), (1,)])


def berger_sieve(window: int) -> SieveWindow:
    return family_to_sieve(largest_proper_sieve(1), window)


# ---------------------------------------------------------------------------
# crossed simplicial groups


def induce_crossed_sieve(S: SieveWindow, ambient: str) -> SieveWindow:
    """``S^G = {φ g : φ ∈ S, g ∈ G}`` on ``ΔG``."""
    ambient = site_name(ambient)
    G = CROSSED[ambient]
    C = window_category(ambient, S.window)
    members = tuple(frozenset(z for z in C.hom(k, S.base) if G.factorize(z).phi in S.members[k])
                    for k in range(S.window + 1))
    return SieveWindow(ambient, S.base, S.window, members)


def delta_part(T: SieveWindow) -> SieveWindow:
    """``T ∩ Δ``: the members with trivial automorphism part."""
    G = CROSSED[T.ambient]
    ident = {k: G.identity(k) for k in range(T.window + 1)}
    return SieveWindow("Δ", T.base, T.window,
                       tuple(frozenset(f.phi for f in map(G.factorize, ms) if f.g == ident[k])
                             for k, ms in enumerate(T.members)))


# ---------------------------------------------------------------------------
# set-valued functors and quotients


class SetFunctor:
    """A functor ``source -> FinSet`` with elements listed per object.

    ``action(x, y)`` is an int array of shape ``(|hom(x, y)|, |F(x)|)`` giving
    the index in ``F(y)`` of each element pushed along each morphism.
    """

    def __init__(self, source: FiniteCategory, elements: dict, action, name="F"):
        self.source, self.elements, self.name = source, elements, name
        self._action_fn, self._action = action, {}

    def action(self, x, y) -> np.ndarray:
        a = self._action.get((x, y))
        if a is None:
            a = self._action[(x, y)] = np.asarray(self._action_fn(x, y), dtype=np.int64).reshape(
                self.source.hom_size(x, y), len(self.elements[x]))
        return a


def yoneda(C: FiniteCategory, n) -> SetFunctor:
    """``Y_n = Hom(-, n)`` as a covariant functor on ``C^op``."""
    Cop = opposite(C)
    # a morphism x -> y of C^op is h: y -> x in C, acting by e -> e . h
    return SetFunctor(Cop, {x: C.hom(x, n) for x in C.objects},
                      lambda x, y: C.compose_table(y, x, n).T, f"Y_{n}")


def quotient_functor(F: SetFunctor, S: dict, name=None):
    """``F/S``: ``x -> (F(x) \\ S(x)) ⊔ {*}``, everything landing in ``S`` goes to ``*``.

    ``S[x]`` is a set of element indices of ``F(x)``.  Returns the functor
    into FinSet_* together with, per object, the list of surviving element
    indices (position ``t`` of the list is pointed element ``t + 1``).
    """
    C = F.source
    kept = {x: [e for e in range(len(F.elements[x])) if e not in S[x]] for x in C.objects}
    for x in C.objects:
        for y in C.objects:
            act = F.action(x, y)
            if act.size and S[x] and not set(act[:, sorted(S[x])].ravel().tolist()) <= set(S[y]):
                raise ValueError(f"S is not a subfunctor: a morphism {x!r} -> {y!r} leaves S")
    N = max((len(k) for k in kept.values()), default=0)
    target = materialize("FinSet_*", N)
    pos = {x: {e: t + 1 for t, e in enumerate(kept[x])} for x in C.objects}

    def mor(x, y, p):
        k = C.local_index(x, y, p)
        row = F.action(x, y)[k]
        return PointedMap(len(kept[x]), len(kept[y]), (0,) + tuple(pos[y].get(int(row[e]), 0) for e in kept[x]))

    Q = FunctorData.from_payloads(C, target, lambda x: len(kept[x]), mor, name or f"{F.name}/S")
    return Q, kept


def sieve_subfunctor(S: SieveWindow) -> dict:
    C = window_category(S.ambient, S.window)
    return {k: {C.local_index(k, S.base, p) for p in S.members[k]} for k in range(S.window + 1)}


def yoneda_quotient(S: SieveWindow):
    """``Y_{[n]}/S`` on the window; returns the functor and the kept elements."""
    C = window_category(S.ambient, S.window)
    return quotient_functor(yoneda(C, S.base), sieve_subfunctor(S), f"Y_{S.base}/S")


def edges_functor(max_rank: int) -> FunctorData:
    """``γ′ = P γ^op: Δ^op -> FinSet_*``; ``[k]`` goes to its edges plus a basepoint."""
    from .sites import P_to_pointed
    from .wreath import segal_gamma
    gamma = segal_gamma(max_rank)
    return FunctorData.from_payloads(opposite(materialize("Δ", max_rank)), materialize("FinSet_*", max_rank),
                                     lambda k: k, lambda x, y, f: P_to_pointed(gamma.map_payload(y, x, f)), "γ′")


def surjection_edge(p: SimplexMorphism) -> int:
    """The edge ``e_i`` of a surjection ``p: [k] -> [1]``: ``i`` is the number of zeros."""
    return sum(1 for v in p.values if v == 0)


def berger_natural_iso(max_rank: int) -> NaturalTransformation:
    """``p: Y_{[1]}/S ⇒ γ′`` with components ``p_{e_i} -> e_i``."""
    Q, kept = yoneda_quotient(berger_sieve(max_rank))
    E = edges_functor(max_rank)
    C = materialize("Δ", max_rank)
    comps = {}
    for k in Q.source.objects:
        values = (0,) + tuple(surjection_edge(C.hom(k, 1)[e]) for e in kept[k])
        comps[k] = Q.target.find(k, k, PointedMap(len(kept[k]), k, values))
    return NaturalTransformation(Q, E, comps, "p")


def segal_from_sieve(S: SieveWindow) -> FunctorData:
    """``P^{-1} (Y/S)^op``: the Segal functor ``ambient -> Γ`` of a sieve."""
    Q, _ = yoneda_quotient(S)
    C = window_category(S.ambient, S.window)
    N = max(int(Q.obj(x)) for x in C.objects)
    Gam = materialize("Γ", N)

    def mor(x, y, f):
        # f: x -> y in C is a morphism y -> x of C^op
        return pointed_to_gamma(Q.map_payload(y, x, f))

    return FunctorData.from_payloads(C, Gam, lambda x: int(Q.obj(x)), mor, f"γ_{S.ambient}")


def segal_comparison(max_rank: int) -> NaturalTransformation:
    """``γ ⇒ P^{-1}(Y_{[1]}/S)^op`` for the Berger sieve, components ``P^{-1}(p)``."""
    from .wreath import segal_gamma
    p = berger_natural_iso(max_rank)
    sigma = segal_from_sieve(berger_sieve(max_rank))
    gamma = segal_gamma(max_rank)
    F = p.source.target
    comps = {k: sigma.target.find(k, k, pointed_to_gamma(F.payload_at(k, k, c))) for k, c in p.components.items()}
    return NaturalTransformation(gamma, sigma, comps, "P^{-1}(p)")


def crossed_segal(ambient: str, window: int) -> FunctorData:
    """The Segal functors of the crossed examples.

    Λ uses the empty sieve on ``⟨0⟩``; ΔZ/2 uses the induced Berger sieve on ``[1]``.
    """
    ambient = site_name(ambient)
    if ambient == "Λ":
        return segal_from_sieve(empty_sieve("Λ", 0, window))
    if ambient == "ΔZ/2":
        return segal_from_sieve(induce_crossed_sieve(berger_sieve(window), "ΔZ/2"))
    if ambient == "Δ":
        return segal_from_sieve(berger_sieve(window))
    raise ValueError(f"no Segal functor for {ambient}")


# ---------------------------------------------------------------------------
# reports


def verify_sieves(n: int, window: int | None = None):
    """Oracle comparison of the sieve classification on ``[n]`` in Δ."""
    from .report import DualityReport, check_stage
    window = n + 1 if window is None else window
    report = DualityReport(f"sieves on [{n}]", (n, window))
    sieves = enumerate_sieves("Δ", n, window)
    families = enumerate_down_families(n)
    check_stage(report, f"{len(sieves)} sieves = {len(families)} down-families",
                lambda: (len(sieves) == len(families), (len(sieves), len(families))))
    image = {family_to_sieve(F, window) for F in families}
    check_stage(report, "Φ is onto the enumerated sieves",
                lambda: (image == set(sieves), sorted(map(repr, image ^ set(sieves)))[:1]))
    bad = next((F for F in families if sieve_to_family(family_to_sieve(F, window)) != F), None)
    check_stage(report, "ΨΦ = 1", lambda: (bad is None, bad))
    bad2 = next((I for I in sieves if family_to_sieve(sieve_to_family(I), window) != I), None)
    check_stage(report, "ΦΨ = 1", lambda: (bad2 is None, bad2))
    bigger = enumerate_sieves("Δ", n, window + 1)
    check_stage(report, "stable under window + 1",
                lambda: (len(bigger) == len(sieves) and {S.restrict(window) for S in bigger} == set(sieves),
                         len(bigger)))
    report.notes.append(f"{len(sieves)} sieves matched")
    return report


def verify_segal_iso(max_rank: int):
    """``Y_{[1]}/S ≅ γ′`` and ``γ ≅ P^{-1}(Y_{[1]}/S)^op`` for the Berger sieve."""
    from .report import DualityReport, check_stage
    report = DualityReport("Berger sieve", (max_rank,))
    for label, eta in (("Y_[1]/S ≅ γ′", berger_natural_iso(max_rank)),
                       ("γ ≅ P^-1 (Y_[1]/S)^op", segal_comparison(max_rank))):
        check_stage(report, f"{label}: natural", lambda: (not (v := eta.check_naturality(1)), v[:1]))
        check_stage(report, f"{label}: invertible", lambda: (eta.is_isomorphism(), None))
    return report
