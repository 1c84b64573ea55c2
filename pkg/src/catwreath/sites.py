"""Concrete combinatorial sites: Δ, ∇, Γ, FinSet_*, Λ and ΔZ/2.

Every site has a payload type for its morphisms, a hom enumerator, a
composition rule and a ``materialize`` truncation to a
:class:`~catwreath.fincat.FiniteCategory`.  Λ and ΔZ/2 also carry the
crossed simplicial group structure: each morphism factors uniquely as a
monotone map after an automorphism of its source.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .fincat import UNDEFINED, CategoryError, ConcreteCategory, FiniteCategory, FunctorData


def _monotone(values) -> bool:
    return all(a <= b for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# payload types


@dataclass(frozen=True)
class SimplexMorphism:
    """Monotone map ``[source] -> [target]``."""

    source: int
    target: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.source + 1:
            raise ValueError(f"need {self.source + 1} values, got {len(self.values)}")
        if not _monotone(self.values) or (self.values and not 0 <= self.values[0] <= self.values[-1] <= self.target):
            raise ValueError(f"not a monotone map [{self.source}]->[{self.target}]: {self.values}")

    def __call__(self, i):
        return self.values[i]

    def to_json(self):
        return list(self.values)


@dataclass(frozen=True)
class IntervalMorphism:
    """Monotone map ``[source] -> [target]`` preserving both endpoints."""

    source: int
    target: int
    values: tuple

    def __post_init__(self):
        if self.source < 1 or self.target < 1:
            raise ValueError("interval objects start at [1]")
        if len(self.values) != self.source + 1 or not _monotone(self.values):
            raise ValueError(f"not a monotone map [{self.source}]->[{self.target}]: {self.values}")
        if self.values[0] != 0 or self.values[-1] != self.target:
            raise ValueError(f"endpoints not preserved: {self.values}")

    def __call__(self, i):
        return self.values[i]

    def to_json(self):
        return list(self.values)


@dataclass(frozen=True)
class GammaMorphism:
    """Γ-morphism ``source -> target``: element ``a`` (1-based) goes to ``blocks[a-1]``."""

    source: int
    target: int
    blocks: tuple

    def __post_init__(self):
        if len(self.blocks) != self.source:
            raise ValueError(f"need {self.source} blocks, got {len(self.blocks)}")
        seen = set()
        for b in self.blocks:
            if tuple(sorted(set(b))) != tuple(b) or any(not 1 <= t <= self.target for t in b):
                raise ValueError(f"block {b} is not a sorted subset of 1..{self.target}")
            if seen & set(b):
                raise ValueError(f"blocks not disjoint: {self.blocks}")
            seen |= set(b)

    def __call__(self, a):
        return self.blocks[a - 1]

    def to_json(self):
        return [list(b) for b in self.blocks]


@dataclass(frozen=True)
class PointedMap:
    """Basepoint-preserving map ``source_+ -> target_+``; index 0 is the basepoint."""

    source: int
    target: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.source + 1 or self.values[0] != 0:
            raise ValueError(f"bad pointed map {self.values}")
        if any(not 0 <= v <= self.target for v in self.values):
            raise ValueError(f"values out of range: {self.values}")

    def __call__(self, i):
        return self.values[i]

    def to_json(self):
        return list(self.values)


@dataclass(frozen=True)
class CyclicMorphism:
    """Λ-morphism ``[source] -> [target]`` as a paracyclic profile.

    The profile extends to ``F(l + q(m+1)) = profile[l] + q(n+1)`` and is
    normalized so that ``profile[0]`` lies in ``0..n``.
    """

    source: int
    target: int
    profile: tuple

    def __post_init__(self):
        m, n, p = self.source, self.target, self.profile
        if len(p) != m + 1 or not 0 <= p[0] <= n:
            raise ValueError(f"bad cyclic profile {p} for [{m}]->[{n}]")
        if not _monotone(p) or p[-1] > p[0] + n + 1:
            raise ValueError(f"profile {p} does not extend monotonically")

    def value(self, l: int) -> int:
        q, r = divmod(l, self.source + 1)
        return self.profile[r] + q * (self.target + 1)

    def to_json(self):
        return list(self.profile)


@dataclass(frozen=True)
class Z2Morphism:
    """ΔZ/2-morphism: a monotone (``flip=False``) or antitone (``flip=True``) map."""

    source: int
    target: int
    values: tuple
    flip: bool

    def __post_init__(self):
        v = self.values
        if len(v) != self.source + 1 or any(not 0 <= a <= self.target for a in v):
            raise ValueError(f"bad values {v}")
        if not _monotone(v[::-1] if self.flip else v):
            raise ValueError(f"values {v} do not match flip={self.flip}")

    def to_json(self):
        return {"values": list(self.values), "flip": self.flip}


@dataclass(frozen=True)
class CrossedFactorization:
    """``f = phi . g`` with ``phi`` monotone and ``g`` an automorphism of the source."""

    phi: SimplexMorphism
    g: object


# ---------------------------------------------------------------------------
# Δ and ∇


def delta_hom(n: int, m: int) -> list[SimplexMorphism]:
    return [SimplexMorphism(n, m, v) for v in itertools.combinations_with_replacement(range(m + 1), n + 1)]


def delta_compose(g: SimplexMorphism, f: SimplexMorphism) -> SimplexMorphism:
    if f.target != g.source:
        raise ValueError("rank mismatch")
    return SimplexMorphism(f.source, g.target, tuple(g.values[v] for v in f.values))


def delta_identity(n: int) -> SimplexMorphism:
    return SimplexMorphism(n, n, tuple(range(n + 1)))


def face(n: int, i: int) -> SimplexMorphism:
    """Coface ``∂_i: [n-1] -> [n]`` skipping ``i``."""
    return SimplexMorphism(n - 1, n, tuple(l if l < i else l + 1 for l in range(n)))


def degeneracy(n: int, i: int) -> SimplexMorphism:
    """Codegeneracy ``σ_i: [n+1] -> [n]`` hitting ``i`` twice."""
    return SimplexMorphism(n + 1, n, tuple(l if l <= i else l - 1 for l in range(n + 2)))


def nabla_hom(n: int, m: int) -> list[IntervalMorphism]:
    if n < 1 or m < 1:
        raise ValueError("interval objects start at [1]")
    return [IntervalMorphism(n, m, (0,) + mid + (m,))
            for mid in itertools.combinations_with_replacement(range(m + 1), n - 1)]


def nabla_compose(g: IntervalMorphism, f: IntervalMorphism) -> IntervalMorphism:
    if f.target != g.source:
        raise ValueError("rank mismatch")
    return IntervalMorphism(f.source, g.target, tuple(g.values[v] for v in f.values))


def nabla_identity(n: int) -> IntervalMorphism:
    return IntervalMorphism(n, n, tuple(range(n + 1)))


def interval_duality(f: SimplexMorphism) -> IntervalMorphism:
    """``f: [n] -> [m]`` goes to ``[m+1] -> [n+1]``, ``i -> #{j : f(j) < i}``."""
    return IntervalMorphism(f.target + 1, f.source + 1,
                            tuple(sum(1 for v in f.values if v < i) for i in range(f.target + 2)))


def interval_duality_inverse(phi: IntervalMorphism) -> SimplexMorphism:
    """Inverse of :func:`interval_duality`: ``f(j) = max{i <= m : phi(i) <= j}``."""
    m, n = phi.source - 1, phi.target - 1
    return SimplexMorphism(n, m, tuple(max(i for i in range(m + 1) if phi.values[i] <= j)
                                       for j in range(n + 1)))


# ---------------------------------------------------------------------------
# Γ and pointed sets


def gamma_hom(n: int, l: int) -> list[GammaMorphism]:
    """All Γ-maps ``n -> l``, ordered lexicographically by the pointed map ``P(f)``."""
    return [pointed_to_gamma(PointedMap(l, n, (0,) + d)) for d in itertools.product(range(n + 1), repeat=l)]


def gamma_compose(g: GammaMorphism, f: GammaMorphism) -> GammaMorphism:
    if f.target != g.source:
        raise ValueError(f"size mismatch: {f.target} != {g.source}")
    return GammaMorphism(f.source, g.target,
                         tuple(tuple(sorted(t for b in block for t in g.blocks[b - 1])) for block in f.blocks))


def gamma_identity(n: int) -> GammaMorphism:
    return GammaMorphism(n, n, tuple((a,) for a in range(1, n + 1)))


def P_to_pointed(f: GammaMorphism) -> PointedMap:
    """``P(f): l_+ -> n_+`` with ``t -> s`` when ``t`` lies in ``f(s)``."""
    values = [0] * (f.target + 1)
    for s, block in enumerate(f.blocks, start=1):
        for t in block:
            values[t] = s
    return PointedMap(f.target, f.source, tuple(values))


def pointed_to_gamma(u: PointedMap) -> GammaMorphism:
    """Inverse of :func:`P_to_pointed`."""
    blocks = [[] for _ in range(u.target)]
    for a in range(1, u.source + 1):
        if u.values[a]:
            blocks[u.values[a] - 1].append(a)
    return GammaMorphism(u.target, u.source, tuple(tuple(b) for b in blocks))


def pointed_hom(n: int, m: int) -> list[PointedMap]:
    return [PointedMap(n, m, (0,) + d) for d in itertools.product(range(m + 1), repeat=n)]


def pointed_compose(g: PointedMap, f: PointedMap) -> PointedMap:
    if f.target != g.source:
        raise ValueError("size mismatch")
    return PointedMap(f.source, g.target, tuple(g.values[v] for v in f.values))


def pointed_identity(n: int) -> PointedMap:
    return PointedMap(n, n, tuple(range(n + 1)))


class PointedSiteCategory(FiniteCategory):
    """FinSet_* (covariant) or Γ (contravariant) on sizes ``0..max_rank``.

    Local indices are the base-``(k+1)`` digits of the pointed map, so
    ``find``, ``hom_size`` and ``compose_pairs`` never build whole hom-sets.
    """

    def __init__(self, max_rank: int, contravariant: bool):
        site = "Γ" if contravariant else "FinSet_*"
        super().__init__(range(max_rank + 1), f"{site}≤{max_rank}", {"site": site, "maxRank": max_rank})
        self.contravariant = contravariant

    def _shape(self, x, y):
        """(digit count, base) of the pointed maps encoding ``hom(x, y)``."""
        return (y, x + 1) if self.contravariant else (x, y + 1)

    def hom_size(self, x, y):
        k, b = self._shape(x, y)
        return b ** k

    def _payload(self, x, y, digits):
        if self.contravariant:
            return pointed_to_gamma(PointedMap(y, x, (0,) + tuple(digits)))
        return PointedMap(x, y, (0,) + tuple(digits))

    def _digits(self, x, y, p):
        if self.contravariant:
            if not isinstance(p, GammaMorphism) or (p.source, p.target) != (x, y):
                return None
            return P_to_pointed(p).values[1:]
        if not isinstance(p, PointedMap) or (p.source, p.target) != (x, y):
            return None
        return p.values[1:]

    def _hom(self, x, y):
        k, b = self._shape(x, y)
        return [self._payload(x, y, d) for d in itertools.product(range(b), repeat=k)]

    def find(self, x, y, payload):
        d = self._digits(x, y, payload)
        if d is None:
            return UNDEFINED
        _, b = self._shape(x, y)
        idx = 0
        for v in d:
            idx = idx * b + v
        return idx

    def _identity(self, x):
        return self.find(x, x, gamma_identity(x) if self.contravariant else pointed_identity(x))

    def _decode(self, x, y, idx):
        """Full pointed vectors (basepoint column first) for local indices."""
        k, b = self._shape(x, y)
        idx = np.asarray(idx, dtype=np.int64)
        out = np.zeros((len(idx), k + 1), dtype=np.int64)
        rest = idx.copy()
        for col in range(k, 0, -1):
            rest, out[:, col] = np.divmod(rest, b)
        return out

    def _encode_vectors(self, x, z, V):
        k, b = self._shape(x, z)
        w = b ** np.arange(k - 1, -1, -1, dtype=np.int64)
        return V[..., 1:] @ w

    def compose_pairs(self, x, y, z, G, F):
        VF, VG = self._decode(x, y, F), self._decode(y, z, G)
        if not len(VF) or not len(VG):
            return np.zeros((len(VG), len(VF)), dtype=np.int64)
        composite = VF[:, VG].transpose(1, 0, 2) if self.contravariant else VG[:, VF]
        return self._encode_vectors(x, z, composite)

    def _compose_block(self, x, y, z):
        return self.compose_pairs(x, y, z, np.arange(self.hom_size(y, z)), np.arange(self.hom_size(x, y)))

    def payload_at(self, x, y, k):
        return self._payload(x, y, self._decode(x, y, [k])[0][1:].tolist())


# ---------------------------------------------------------------------------
# crossed simplicial groups


class CrossedSite:
    """A crossed simplicial group ΔG given by composition and factorization."""

    name = "ΔG"

    def hom(self, m, n):
        raise NotImplementedError

    def compose(self, g, f):
        raise NotImplementedError

    def identity(self, n):
        raise NotImplementedError

    def group(self, n) -> list:
        raise NotImplementedError

    def factorize(self, f) -> CrossedFactorization:
        raise NotImplementedError

    def include(self, phi: SimplexMorphism):
        """The inclusion ``i: Δ -> ΔG``."""
        raise NotImplementedError

    def recompose(self, fac: CrossedFactorization):
        return self.compose(self.include(fac.phi), fac.g)

    def rearranged_compose(self, a: CrossedFactorization, b: CrossedFactorization) -> CrossedFactorization:
        """``(φg)(φ'g') = (φ . g_*φ')(φ'^*g . g')`` where ``g φ' = g_*φ' . φ'^*g``."""
        moved = self.factorize(self.compose(a.g, self.include(b.phi)))
        return CrossedFactorization(delta_compose(a.phi, moved.phi), self.compose(moved.g, b.g))

    def vector(self, p) -> tuple:
        raise NotImplementedError

    def vcompose(self, G, F, x, y, z):
        raise NotImplementedError


class CyclicSite(CrossedSite):
    name = "Λ"

    def hom(self, m, n):
        return lambda_hom(m, n)

    def compose(self, g, f):
        return lambda_compose(g, f)

    def identity(self, n):
        return CyclicMorphism(n, n, tuple(range(n + 1)))

    def group(self, n):
        return [rotation(n, r) for r in range(n + 1)]

    def factorize(self, f):
        return lambda_factorize(f)

    def include(self, phi):
        return CyclicMorphism(phi.source, phi.target, phi.values)

    def vector(self, p):
        return p.profile

    def vcompose(self, G, F, x, y, z):
        n1, p1 = y + 1, z + 1
        q, r = np.divmod(F, n1)
        out = G[:, r] + q[None] * p1
        return out - (out[..., :1] // p1) * p1


def lambda_hom(m: int, n: int) -> list[CyclicMorphism]:
    """All Λ-maps ``[m] -> [n]``; ``(m+1) C(n+m+1, m+1)`` of them."""
    out = []
    for a in range(n + 1):
        for tail in itertools.combinations_with_replacement(range(a, a + n + 2), m):
            out.append(CyclicMorphism(m, n, (a,) + tail))
    return out


def _normalize(values, n):
    shift = (values[0] // (n + 1)) * (n + 1)
    return tuple(v - shift for v in values)


def lambda_compose(g: CyclicMorphism, f: CyclicMorphism) -> CyclicMorphism:
    if f.target != g.source:
        raise ValueError(f"rank mismatch: {f.target} != {g.source}")
    return CyclicMorphism(f.source, g.target, _normalize([g.value(v) for v in f.profile], g.target))


def rotation(n: int, r: int = 1) -> CyclicMorphism:
    """``t_{n+1}^r`` on ``[n]``: ``l -> l - r``."""
    return CyclicMorphism(n, n, _normalize([l - r for l in range(n + 1)], n))


def lambda_factorize(f: CyclicMorphism) -> CrossedFactorization:
    m, n = f.source, f.target
    hits = []
    for r in range(m + 1):
        vals = _normalize([f.value(l + r) for l in range(m + 1)], n)
        if vals[-1] <= n:
            hits.append((SimplexMorphism(m, n, vals), rotation(m, r)))
    if len(hits) != 1:
        raise CategoryError(f"{f} has {len(hits)} factorizations")
    return CrossedFactorization(*hits[0])


class ReflexiveSite(CrossedSite):
    """ΔZ/2: monotone maps and their reversals."""

    name = "ΔZ/2"

    def hom(self, m, n):
        return z2_hom(m, n)

    def compose(self, g, f):
        return z2_compose(g, f)

    def identity(self, n):
        return Z2Morphism(n, n, tuple(range(n + 1)), False)

    def group(self, n):
        return [self.identity(n), reversal(n)]

    def factorize(self, f):
        return z2_factorize(f)

    def include(self, phi):
        return Z2Morphism(phi.source, phi.target, phi.values, False)

    def vector(self, p):
        return p.values + (int(p.flip),)

    def vcompose(self, G, F, x, y, z):
        values = G[:, F[:, :-1]]
        flips = np.broadcast_to((G[:, -1][:, None] ^ F[:, -1][None, :])[..., None], values.shape[:2] + (1,))
        return np.concatenate([values, flips], axis=-1)


def z2_hom(m: int, n: int) -> list[Z2Morphism]:
    mono = [v for v in itertools.combinations_with_replacement(range(n + 1), m + 1)]
    return [Z2Morphism(m, n, v, False) for v in mono] + [Z2Morphism(m, n, v[::-1], True) for v in mono]


def z2_compose(g: Z2Morphism, f: Z2Morphism) -> Z2Morphism:
    if f.target != g.source:
        raise ValueError(f"rank mismatch: {f.target} != {g.source}")
    return Z2Morphism(f.source, g.target, tuple(g.values[v] for v in f.values), f.flip != g.flip)


def reversal(n: int) -> Z2Morphism:
    """The generator ``y_n``: ``l -> n - l``."""
    return Z2Morphism(n, n, tuple(range(n, -1, -1)), True)


def z2_factorize(f: Z2Morphism) -> CrossedFactorization:
    if f.flip:
        return CrossedFactorization(SimplexMorphism(f.source, f.target, f.values[::-1]), reversal(f.source))
    return CrossedFactorization(SimplexMorphism(f.source, f.target, f.values), ReflexiveSite().identity(f.source))


def crossed_factorize(f) -> CrossedFactorization:
    if isinstance(f, CyclicMorphism):
        return lambda_factorize(f)
    if isinstance(f, Z2Morphism):
        return z2_factorize(f)
    raise TypeError(f"no crossed structure for {type(f).__name__}")


CROSSED = {"Λ": CyclicSite(), "ΔZ/2": ReflexiveSite()}


# ---------------------------------------------------------------------------
# truncations

ALIASES = {
    "delta": "Δ", "Δ": "Δ", "nabla": "∇", "∇": "∇", "gamma": "Γ", "Γ": "Γ",
    "pointed": "FinSet_*", "finset*": "FinSet_*", "FinSet_*": "FinSet_*",
    "lambda": "Λ", "Λ": "Λ", "z2": "ΔZ/2", "ΔZ/2": "ΔZ/2",
}


def site_name(site: str) -> str:
    try:
        return ALIASES[site] if site in ALIASES else ALIASES[site.lower()]
    except KeyError:
        raise ValueError(f"unknown site {site!r}; choose from {sorted(set(ALIASES.values()))}") from None


def site_hom(site: str, n: int, m: int) -> list:
    site = site_name(site)
    if site == "Δ":
        return delta_hom(n, m)
    if site == "∇":
        return nabla_hom(n, m)
    if site == "Γ":
        return gamma_hom(n, m)
    if site == "FinSet_*":
        return pointed_hom(n, m)
    return CROSSED[site].hom(n, m)


def _values(x, y, p):
    return p.values


def materialize(site: str, max_rank: int) -> FiniteCategory:
    """Full subcategory of ``site`` on objects of rank at most ``max_rank``.

    ∇ starts at ``[1]``; every other site starts at rank 0.  Results are
    cached, so equal arguments (aliases included) give the identical
    category object.
    """
    return _materialize(site_name(site), int(max_rank))


@lru_cache(maxsize=None)
def _materialize(site: str, max_rank: int) -> FiniteCategory:
    header = {"site": site, "maxRank": max_rank}
    name = f"{site}≤{max_rank}"
    if site == "Γ":
        return PointedSiteCategory(max_rank, contravariant=True)
    if site == "FinSet_*":
        return PointedSiteCategory(max_rank, contravariant=False)
    if site == "Δ":
        return ConcreteCategory(range(max_rank + 1), delta_hom, delta_identity, delta_compose,
                                name, header, vector=_values)
    if site == "∇":
        return ConcreteCategory(range(1, max_rank + 1), nabla_hom, nabla_identity, nabla_compose,
                                name, header, vector=_values)
    G = CROSSED[site]
    return ConcreteCategory(range(max_rank + 1), G.hom, G.identity, G.compose, name, header,
                            vector=lambda x, y, p: G.vector(p), vcompose=G.vcompose)


def site_of(C: FiniteCategory) -> str | None:
    return C.header.get("site")


def inclusion_delta(site: str, max_rank: int) -> FunctorData:
    """``i: Δ -> ΔG`` on truncations."""
    G = CROSSED[site_name(site)]
    return FunctorData.from_payloads(materialize("Δ", max_rank), materialize(site, max_rank),
                                     lambda x: x, lambda x, y, p: G.include(p), "i")


def interval_duality_functor(max_rank: int) -> FunctorData:
    """The isomorphism ``Δ≤r^op -> ∇≤r+1``, ``[n] -> [n+1]``."""
    from .fincat import opposite
    return FunctorData.from_payloads(opposite(materialize("Δ", max_rank)), materialize("∇", max_rank + 1),
                                     lambda n: n + 1, lambda x, y, p: interval_duality(p), "D")


def pointed_gamma_functor(max_rank: int) -> FunctorData:
    """``P: Γ -> FinSet_*^op`` on truncations."""
    from .fincat import opposite
    return FunctorData.from_payloads(materialize("Γ", max_rank), opposite(materialize("FinSet_*", max_rank)),
                                     lambda n: n, lambda x, y, p: P_to_pointed(p), "P")


def hom_count_formula(site: str, n: int, m: int) -> int:
    """Closed-form hom counts, used as an independent check of the enumerators."""
    site = site_name(site)
    if site == "Δ":
        return comb(n + m + 1, n + 1)
    if site == "∇":
        return comb(n + m - 1, n - 1)
    if site == "Γ":
        return (n + 1) ** m
    if site == "FinSet_*":
        return (m + 1) ** n
    if site == "Λ":
        return (n + 1) * comb(n + m + 1, n + 1)
    return 2 * comb(n + m + 1, n + 1)
