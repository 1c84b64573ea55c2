"""Finite categories, functors and natural transformations as explicit data.

A :class:`FiniteCategory` exposes its hom-sets as ordered tuples of payloads
and its composition as one integer table per object triple ``(x, y, z)``:
``compose_table(x, y, z)[g, f]`` is the local index of ``g . f`` in
``hom(x, z)``, where ``f`` and ``g`` are local indices into ``hom(x, y)`` and
``hom(y, z)``.  Tables are built on first use and cached.
"""
from __future__ import annotations

import bisect
import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, NamedTuple

import numpy as np

UNDEFINED = -1


class CategoryError(ValueError):
    pass


class FunctorError(ValueError):
    """A functor could not be built; ``witness`` names the offending morphism."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Violation(NamedTuple):
    law: str
    detail: str


@dataclass(frozen=True)
class Morphism:
    id: int
    dom: Hashable
    cod: Hashable
    payload: Hashable


class FiniteCategory:
    """Base class.  Subclasses implement ``_hom``, ``_identity`` and either
    ``_compose_payload`` (pairwise) or ``_compose_block`` (vectorized)."""

    def __init__(self, objects: Iterable[Hashable], name: str = "C", header: dict | None = None):
        self.objects = tuple(objects)
        self._index = {x: k for k, x in enumerate(self.objects)}
        if len(self._index) != len(self.objects):
            raise CategoryError(f"{name}: duplicate object labels")
        self.name = name
        self.header = dict(header or {})
        self._homs: dict = {}
        self._lookup: dict = {}
        self._tables: dict = {}
        self._ids: dict = {}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}: {len(self.objects)} objects>"

    # -- subclass hooks -------------------------------------------------
    def _hom(self, x, y) -> tuple:
        raise NotImplementedError

    def _identity(self, x) -> int:
        raise NotImplementedError

    def _compose_payload(self, x, y, z, g, f):
        raise NotImplementedError

    def _compose_block(self, x, y, z) -> np.ndarray:
        F, G = self.hom(x, y), self.hom(y, z)
        out = np.full((len(G), len(F)), UNDEFINED, dtype=np.int64)
        for gi, g in enumerate(G):
            for fi, f in enumerate(F):
                out[gi, fi] = self.find(x, z, self._compose_payload(x, y, z, g, f))
        return out

    # -- hom-sets -------------------------------------------------------
    def has_object(self, x) -> bool:
        return x in self._index

    def object_index(self, x) -> int:
        return self._index[x]

    def hom(self, x, y) -> tuple:
        key = (x, y)
        h = self._homs.get(key)
        if h is None:
            h = self._homs[key] = tuple(self._hom(x, y))
        return h

    def hom_size(self, x, y) -> int:
        return len(self.hom(x, y))

    def _hom_lookup(self, x, y) -> dict:
        key = (x, y)
        d = self._lookup.get(key)
        if d is None:
            d = self._lookup[key] = {p: k for k, p in enumerate(self.hom(x, y))}
            if len(d) != len(self.hom(x, y)):
                raise CategoryError(f"{self.name}: duplicate payloads in hom({x!r}, {y!r})")
        return d

    def find(self, x, y, payload) -> int:
        """Local index of ``payload`` in ``hom(x, y)``, or ``UNDEFINED``."""
        return self._hom_lookup(x, y).get(payload, UNDEFINED)

    def payload_at(self, x, y, k: int):
        return self.hom(x, y)[k]

    def local_index(self, x, y, payload) -> int:
        k = self.find(x, y, payload)
        if k == UNDEFINED:
            raise KeyError(f"{payload!r} is not in hom({x!r}, {y!r}) of {self.name}")
        return k

    def identity(self, x) -> int:
        k = self._ids.get(x)
        if k is None:
            k = self._ids[x] = self._identity(x)
        return k

    def compose_table(self, x, y, z) -> np.ndarray:
        key = (x, y, z)
        t = self._tables.get(key)
        if t is None:
            t = self._compose_block(x, y, z)
            t.setflags(write=False)
            self._tables[key] = t
        return t

    def compose_pairs(self, x, y, z, G, F) -> np.ndarray:
        """Composites ``G[a] . F[b]`` for index arrays; shape ``(len(G), len(F))``.

        Categories with very large hom-sets override this to avoid building
        the whole table.
        """
        G = np.asarray(G, dtype=np.int64)
        F = np.asarray(F, dtype=np.int64)
        return self.compose_table(x, y, z)[G[:, None], F[None, :]]

    def compose_local(self, x, y, z, g: int, f: int) -> int:
        return int(self.compose_table(x, y, z)[g, f])

    def compose_payloads(self, x, y, z, g, f):
        k = self.compose_local(x, y, z, self.local_index(y, z, g), self.local_index(x, y, f))
        if k == UNDEFINED:
            raise CategoryError(f"{self.name}: composite undefined")
        return self.hom(x, z)[k]

    def is_isomorphism(self, x, y, f: int) -> bool:
        return self.inverse(x, y, f) is not None

    def inverse(self, x, y, f: int) -> int | None:
        n = self.hom_size(y, x)
        if n == 0:
            return None
        back = self.compose_table(x, y, x)[:, f]
        forth = self.compose_table(y, x, y)[f, :]
        hit = np.flatnonzero((back == self.identity(x)) & (forth == self.identity(y)))
        return int(hit[0]) if hit.size else None

    def isomorphic(self, x, y) -> bool:
        if x == y:
            return True
        a, b = self.hom_size(x, y), self.hom_size(y, x)
        if not a or not b:
            return False
        back = self.compose_table(x, y, x) == self.identity(x)
        forth = self.compose_table(y, x, y) == self.identity(y)
        return bool((back & forth.T).any())

    # -- global morphism ids -------------------------------------------
    @cached_property
    def _offsets(self):
        starts, keys, total = [], [], 0
        for x in self.objects:
            for y in self.objects:
                starts.append(total)
                keys.append((x, y))
                total += self.hom_size(x, y)
        return starts, keys, total

    @property
    def num_morphisms(self) -> int:
        return self._offsets[2]

    def morphism_id(self, x, y, local: int) -> int:
        i, j = self._index[x], self._index[y]
        return self._offsets[0][i * len(self.objects) + j] + local

    def locate(self, mid: int):
        starts, keys, total = self._offsets
        if not 0 <= mid < total:
            raise KeyError(mid)
        k = bisect.bisect_right(starts, mid) - 1
        x, y = keys[k]
        return x, y, mid - starts[k]

    def morphisms(self) -> Iterator[Morphism]:
        mid = 0
        for x in self.objects:
            for y in self.objects:
                for p in self.hom(x, y):
                    yield Morphism(mid, x, y, p)
                    mid += 1

    def morphism(self, mid: int) -> Morphism:
        x, y, k = self.locate(mid)
        return Morphism(mid, x, y, self.hom(x, y)[k])

    def identity_id(self, x) -> int:
        return self.morphism_id(x, x, self.identity(x))

    def compose(self, g: int, f: int) -> int:
        """Compose global ids; ``g`` after ``f``."""
        x, y, fl = self.locate(f)
        y2, z, gl = self.locate(g)
        if y2 != y:
            raise CategoryError(f"{self.name}: cod(f) != dom(g)")
        k = self.compose_local(x, y, z, gl, fl)
        if k == UNDEFINED:
            raise CategoryError(f"{self.name}: composite undefined")
        return self.morphism_id(x, z, k)

    def composable_pairs(self) -> int:
        return sum(self.hom_size(x, y) * self.hom_size(y, z)
                   for x in self.objects for y in self.objects for z in self.objects)


class ConcreteCategory(FiniteCategory):
    """Category given by hom, identity and compose functions on payloads.

    If ``vector`` is given, ``vector(x, y, payload)`` encodes each morphism as
    a tuple of non-negative ints, and ``vcompose(G, F, x, y, z)`` maps stacked
    encodings of ``hom(y, z)`` (rows of ``G``) and ``hom(x, y)`` (rows of
    ``F``) to the encodings of all composites, shape ``(|G|, |F|, width)``.
    The default ``vcompose`` is function composition ``G[:, F]``, right for
    payloads that are set maps between carriers.
    """

    def __init__(self, objects, hom: Callable, identity: Callable, compose: Callable,
                 name="C", header=None, vector: Callable | None = None,
                 vcompose: Callable | None = None):
        super().__init__(objects, name, header)
        self._hom_fn, self._id_fn, self._compose_fn = hom, identity, compose
        self._vector = vector
        self._vcompose = vcompose or (lambda G, F, x, y, z: G[:, F])

    def _hom(self, x, y):
        return self._hom_fn(x, y)

    def _identity(self, x):
        return self.local_index(x, x, self._id_fn(x))

    def _compose_payload(self, x, y, z, g, f):
        return self._compose_fn(g, f)

    def _vectors(self, x, y):
        key = ("vec", x, y)
        v = self._lookup.get(key)
        if v is None:
            rows = [self._vector(x, y, p) for p in self.hom(x, y)]
            width = len(rows[0]) if rows else 0
            v = np.array(rows, dtype=np.int64).reshape(len(rows), width)
            self._lookup[key] = v
        return v

    def _codes(self, x, y):
        key = ("codes", x, y)
        c = self._lookup.get(key)
        if c is None:
            V = self._vectors(x, y)
            base = int(V.max()) + 1 if V.size else 1
            if V.shape[1] and V.shape[1] * np.log2(max(base, 2)) >= 62:
                c = None
            else:
                w = base ** np.arange(V.shape[1] - 1, -1, -1, dtype=np.int64)
                codes = V @ w
                order = np.argsort(codes, kind="stable")
                c = (base, w, codes[order], order)
            self._lookup[key] = c
        return c

    def _encode(self, x, z, composite):
        """Local indices in ``hom(x, z)`` of encoded morphisms (``UNDEFINED`` if absent)."""
        c = self._codes(x, z)
        if c is None or not self.hom_size(x, z):
            return None
        base, w, sorted_codes, order = c
        valid = ((composite >= 0) & (composite < base)).all(axis=-1)
        codes = np.where(valid[..., None], composite, 0) @ w
        pos = np.minimum(np.searchsorted(sorted_codes, codes), len(sorted_codes) - 1)
        found = valid & (sorted_codes[pos] == codes)
        return np.where(found, order[pos], UNDEFINED).astype(np.int64)

    def _compose_block(self, x, y, z):
        if self._vector is None:
            return super()._compose_block(x, y, z)
        F, G = self._vectors(x, y), self._vectors(y, z)
        if not len(F) or not len(G):
            return np.full((len(G), len(F)), UNDEFINED, dtype=np.int64)
        out = self._encode(x, z, self._vcompose(G, F, x, y, z))
        return super()._compose_block(x, y, z) if out is None else out


class TableCategory(FiniteCategory):
    """Category given by explicit hom lists, identities and a composition dict.

    Used for parsed interchange documents and hand-built test categories.  The
    ``compose`` mapping is ``(x, y, z, g_local, f_local) -> local`` and may be
    incomplete or ill-typed; :func:`validate_category` reports that.
    """

    def __init__(self, objects, homs: dict, identities: dict, compose: dict,
                 name="C", header=None, stray: Iterable = ()):
        super().__init__(objects, name, header)
        self._given_homs = homs
        self._given_ids = identities
        self._given_compose = compose
        self.stray = list(stray)

    def _hom(self, x, y):
        return self._given_homs.get((x, y), ())

    def _identity(self, x):
        return self._given_ids.get(x, UNDEFINED)

    def _compose_block(self, x, y, z):
        out = np.full((self.hom_size(y, z), self.hom_size(x, y)), UNDEFINED, dtype=np.int64)
        for g in range(out.shape[0]):
            for f in range(out.shape[1]):
                out[g, f] = self._given_compose.get((x, y, z, g, f), UNDEFINED)
        return out


class OppositeCategory(FiniteCategory):
    def __init__(self, base: FiniteCategory):
        super().__init__(base.objects, f"{base.name}^op", base.header)
        self.base = base

    def _hom(self, x, y):
        return self.base.hom(y, x)

    def _identity(self, x):
        return self.base.identity(x)

    def find(self, x, y, payload):
        return self.base.find(y, x, payload)

    def hom_size(self, x, y):
        return self.base.hom_size(y, x)

    def payload_at(self, x, y, k):
        return self.base.payload_at(y, x, k)

    def is_isomorphism(self, x, y, f):
        return self.base.is_isomorphism(y, x, f)

    def isomorphic(self, x, y):
        return self.base.isomorphic(y, x)

    def compose_pairs(self, x, y, z, G, F):
        return self.base.compose_pairs(z, y, x, F, G).T

    def _compose_block(self, x, y, z):
        return np.ascontiguousarray(self.base.compose_table(z, y, x).T)


def opposite(C: FiniteCategory) -> FiniteCategory:
    """Opposite category; strictly involutive (``opposite(opposite(C)) is C``)."""
    if isinstance(C, OppositeCategory):
        return C.base
    cached = getattr(C, "_opposite", None)
    if cached is None:
        cached = OppositeCategory(C)
        C._opposite = cached
    return cached


class FullSubcategory(FiniteCategory):
    def __init__(self, base: FiniteCategory, objects, name=None):
        objects = list(objects)
        missing = [x for x in objects if not base.has_object(x)]
        if missing:
            raise CategoryError(f"objects not in {base.name}: {missing[:3]}")
        super().__init__(objects, name or base.name, base.header)
        self.base = base

    def _hom(self, x, y):
        return self.base.hom(x, y)

    def _identity(self, x):
        return self.base.identity(x)

    def find(self, x, y, payload):
        return self.base.find(x, y, payload)

    def _compose_block(self, x, y, z):
        return self.base.compose_table(x, y, z)


class RelabeledCategory(FiniteCategory):
    """Same hom structure as ``base`` with objects and payloads renamed."""

    def __init__(self, base: FiniteCategory, obj_fn: Callable, payload_fn: Callable, name=None, header=None):
        objects = [obj_fn(x) for x in base.objects]
        super().__init__(objects, name or base.name, base.header if header is None else header)
        self.base = base
        self._back = dict(zip(objects, base.objects))
        self._payload_fn = payload_fn

    def _hom(self, x, y):
        bx, by = self._back[x], self._back[y]
        return tuple(self._payload_fn(bx, by, p) for p in self.base.hom(bx, by))

    def _identity(self, x):
        return self.base.identity(self._back[x])

    def _compose_block(self, x, y, z):
        return self.base.compose_table(self._back[x], self._back[y], self._back[z])


def terminal_category() -> FiniteCategory:
    return TableCategory(["*"], {("*", "*"): ("1",)}, {"*": 0}, {("*", "*", "*", 0, 0): 0}, name="*")


class PullbackCategory(FiniteCategory):
    """Strict pullback ``A x_X B`` of ``F: A -> X`` and ``G: B -> X``.

    Objects are pairs ``(a, b)`` with ``F(a) == G(b)``; morphisms are pairs of
    payloads agreeing in ``X``.
    """

    def __init__(self, F: "FunctorData", G: "FunctorData", name=None):
        if not same_category(F.target, G.target):
            raise CategoryError("pullback: functors have different targets")
        objects = [(a, b) for a in F.source.objects for b in G.source.objects
                   if F.obj(a) == G.obj(b)]
        super().__init__(objects, name or f"{F.source.name} x_{F.target.name} {G.source.name}")
        self.F, self.G = F, G
        self._pairs: dict = {}

    def _pair_data(self, u, v):
        key = (u, v)
        d = self._pairs.get(key)
        if d is None:
            (a, b), (a2, b2) = u, v
            fm, gm = self.F.mor_array(a, a2), self.G.mor_array(b, b2)
            by_target: dict = {}
            for j, t in enumerate(gm.tolist()):
                by_target.setdefault(t, []).append(j)
            pi, pj = [], []
            for i, t in enumerate(fm.tolist()):
                for j in by_target.get(t, ()):
                    pi.append(i)
                    pj.append(j)
            pi = np.array(pi, dtype=np.int64)
            pj = np.array(pj, dtype=np.int64)
            dense = np.full((len(fm), len(gm)), UNDEFINED, dtype=np.int64)
            dense[pi, pj] = np.arange(len(pi))
            d = self._pairs[key] = (pi, pj, dense)
        return d

    def _hom(self, u, v):
        (a, b), (a2, b2) = u, v
        pi, pj, _ = self._pair_data(u, v)
        A, B = self.F.source.hom(a, a2), self.G.source.hom(b, b2)
        return tuple((A[i], B[j]) for i, j in zip(pi.tolist(), pj.tolist()))

    def _identity(self, u):
        a, b = u
        _, _, dense = self._pair_data(u, u)
        return int(dense[self.F.source.identity(a), self.G.source.identity(b)])

    def _compose_block(self, u, v, w):
        (a, b), (a2, b2), (a3, b3) = u, v, w
        fi, fj, _ = self._pair_data(u, v)
        gi, gj, _ = self._pair_data(v, w)
        _, _, dense = self._pair_data(u, w)
        if not len(fi) or not len(gi):
            return np.full((len(gi), len(fi)), UNDEFINED, dtype=np.int64)
        ci = self.F.source.compose_table(a, a2, a3)[gi[:, None], fi[None, :]]
        cj = self.G.source.compose_table(b, b2, b3)[gj[:, None], fj[None, :]]
        return dense[ci, cj]

    def projections(self):
        """The two projection functors ``P -> A`` and ``P -> B``."""
        left = {(u, v): self._pair_data(u, v)[0] for u in self.objects for v in self.objects}
        right = {(u, v): self._pair_data(u, v)[1] for u in self.objects for v in self.objects}
        return (FunctorData(self, self.F.source, {u: u[0] for u in self.objects}, left, "pr1"),
                FunctorData(self, self.G.source, {u: u[1] for u in self.objects}, right, "pr2"))


def pullback(F: "FunctorData", G: "FunctorData") -> PullbackCategory:
    return PullbackCategory(F, G)


def same_category(C: FiniteCategory, D: FiniteCategory) -> bool:
    if C is D:
        return True
    if C.objects != D.objects:
        return False
    return document_hash(C) == document_hash(D)


# ---------------------------------------------------------------------------
# functors


class FunctorData:
    """A functor between finite categories.

    ``mor_map[(x, y)]`` is an int array sending local indices of
    ``source.hom(x, y)`` to local indices of ``target.hom(F x, F y)``.
    """

    def __init__(self, source: FiniteCategory, target: FiniteCategory, obj_map: dict,
                 mor_map: dict | Callable, name: str = "F"):
        self.source, self.target, self.name = source, target, name
        self.obj_map = dict(obj_map)
        for x in source.objects:
            if x not in self.obj_map:
                raise FunctorError(f"{name}: object {x!r} unmapped", witness=x)
            if not target.has_object(self.obj_map[x]):
                raise FunctorError(f"{name}: {x!r} goes to {self.obj_map[x]!r}, not an object of "
                                   f"{target.name}", witness=x)
        self._mor = mor_map if isinstance(mor_map, dict) else {}
        self._mor_fn = None if isinstance(mor_map, dict) else mor_map

    def __repr__(self):
        return f"<FunctorData {self.name}: {self.source.name} -> {self.target.name}>"

    def obj(self, x):
        return self.obj_map[x]

    def mor_array(self, x, y) -> np.ndarray:
        a = self._mor.get((x, y))
        if a is None:
            a = np.asarray(self._mor_fn(x, y), dtype=np.int64)
            a.setflags(write=False)
            self._mor[(x, y)] = a
        return a

    def mor(self, x, y, local: int) -> int:
        return int(self.mor_array(x, y)[local])

    def map_id(self, mid: int) -> int:
        x, y, k = self.source.locate(mid)
        return self.target.morphism_id(self.obj(x), self.obj(y), self.mor(x, y, k))

    def map_index(self, x, y, payload) -> int:
        """Local index of the image of a source payload."""
        return self.mor(x, y, self.source.local_index(x, y, payload))

    def map_payload(self, x, y, payload):
        return self.target.payload_at(self.obj(x), self.obj(y), self.map_index(x, y, payload))

    @classmethod
    def from_payloads(cls, source, target, obj_fn: Callable, mor_fn: Callable, name="F"):
        """Build from ``obj_fn(x)`` and ``mor_fn(x, y, payload) -> target payload``.

        Raises :class:`FunctorError` with the first morphism whose image is not
        in the expected target hom-set.
        """
        obj_map = {x: obj_fn(x) for x in source.objects}

        def build(x, y):
            fx, fy = obj_map[x], obj_map[y]
            out = []
            for p in source.hom(x, y):
                image = mor_fn(x, y, p)
                k = target.find(fx, fy, image)
                if k == UNDEFINED:
                    raise FunctorError(f"{name}: image of {p!r} is not in hom({fx!r}, {fy!r})",
                                       witness=(x, y, p))
                out.append(k)
            return out

        F = cls(source, target, obj_map, build, name)
        F.materialize()
        return F

    def materialize(self):
        for x in self.source.objects:
            for y in self.source.objects:
                self.mor_array(x, y)
        return self

    def then(self, G: "FunctorData", name=None) -> "FunctorData":
        """``G . self``."""
        if not same_category(self.target, G.source):
            raise FunctorError(f"cannot compose {self.name} with {G.name}")
        F = self

        def build(x, y):
            return G.mor_array(F.obj(x), F.obj(y))[F.mor_array(x, y)]

        return FunctorData(F.source, G.target, {x: G.obj(F.obj(x)) for x in F.source.objects},
                           build, name or f"{G.name}.{F.name}")


def identity_functor(C: FiniteCategory) -> FunctorData:
    return FunctorData(C, C, {x: x for x in C.objects},
                       lambda x, y: np.arange(C.hom_size(x, y)), f"1_{C.name}")


def opposite_functor(F: FunctorData) -> FunctorData:
    return FunctorData(opposite(F.source), opposite(F.target), F.obj_map,
                       lambda x, y: F.mor_array(y, x), f"{F.name}^op")


def inclusion_functor(sub: FiniteCategory, C: FiniteCategory) -> FunctorData:
    return FunctorData.from_payloads(sub, C, lambda x: x, lambda x, y, p: p, "incl")


def to_terminal(C: FiniteCategory, star: FiniteCategory | None = None) -> FunctorData:
    star = star or terminal_category()
    o = star.objects[0]
    return FunctorData(C, star, {x: o for x in C.objects},
                       lambda x, y: np.zeros(C.hom_size(x, y), dtype=np.int64), "!")


# ---------------------------------------------------------------------------
# checks


def _limited(out: list, law: str, detail: str, limit: int):
    if sum(1 for v in out if v.law == law) < limit:
        out.append(Violation(law, detail))


_CHUNK = 1 << 22


def validate_category(C: FiniteCategory, limit: int = 20, associativity: bool = True) -> list[Violation]:
    """Every violated category axiom, as a list (empty iff ``C`` is a category)."""
    out: list[Violation] = []
    obs = C.objects
    for m in getattr(C, "stray", ()):
        _limited(out, "composability", m, limit)
    for x in obs:
        k = C.identity(x)
        if not 0 <= k < C.hom_size(x, x):
            _limited(out, "identity", f"no identity at {x!r}", limit)
    bad_tables = set()
    for x, y, z in itertools.product(obs, repeat=3):
        T = C.compose_table(x, y, z)
        bad = (T < 0) | (T >= C.hom_size(x, z))
        if bad.any():
            bad_tables.add((x, y, z))
            g, f = np.argwhere(bad)[0].tolist()
            _limited(out, "closure", f"composite of {x!r}->{y!r}->{z!r} #{g}.#{f} undefined", limit)
    ids = {x: C.identity(x) for x in obs}
    for x, y in itertools.product(obs, repeat=2):
        n = C.hom_size(x, y)
        if not n or (x, x, y) in bad_tables or (x, y, y) in bad_tables:
            continue
        if not 0 <= ids[x] < C.hom_size(x, x) or not 0 <= ids[y] < C.hom_size(y, y):
            continue
        right = C.compose_table(x, x, y)[:, ids[x]]
        left = C.compose_table(x, y, y)[ids[y], :]
        idx = np.arange(n)
        if (right != idx).any():
            f = int(np.flatnonzero(right != idx)[0])
            _limited(out, "identity", f"f . 1 != f for f = hom({x!r},{y!r})[{f}]", limit)
        if (left != idx).any():
            f = int(np.flatnonzero(left != idx)[0])
            _limited(out, "identity", f"1 . f != f for f = hom({x!r},{y!r})[{f}]", limit)
    if associativity:
        for w, x, y, z in itertools.product(obs, repeat=4):
            if {(w, x, y), (x, y, z), (w, y, z), (w, x, z)} & bad_tables:
                continue
            if not (C.hom_size(w, x) and C.hom_size(x, y) and C.hom_size(y, z)):
                continue
            T_wxy, T_xyz = C.compose_table(w, x, y), C.compose_table(x, y, z)
            T_wyz, T_wxz = C.compose_table(w, y, z), C.compose_table(w, x, z)
            nh = C.hom_size(y, z)
            f = np.arange(C.hom_size(w, x))[None, None, :]
            step = max(1, _CHUNK // max(T_wxy.size, 1))
            for lo in range(0, nh, step):
                h = np.arange(lo, min(nh, lo + step))[:, None, None]
                lhs = T_wyz[h, T_wxy[None, :, :]]
                rhs = T_wxz[T_xyz[lo:lo + step, :, None], f]
                if (lhs != rhs).any():
                    i = np.argwhere(lhs != rhs)[0].tolist()
                    i[0] += lo
                    _limited(out, "associativity", f"{w!r}->{x!r}->{y!r}->{z!r} at (h,g,f)={i}", limit)
                    break
    return out


def check_functor(F: FunctorData, limit: int = 20) -> list[Violation]:
    """Exhaustive functoriality check (identities and all composable pairs)."""
    out: list[Violation] = []
    S, T = F.source, F.target
    for x in S.objects:
        if F.mor(x, x, S.identity(x)) != T.identity(F.obj(x)):
            _limited(out, "identity", f"{F.name} does not preserve 1_{x!r}", limit)
    for x, y in itertools.product(S.objects, repeat=2):
        a = F.mor_array(x, y)
        if len(a) != S.hom_size(x, y) or (len(a) and ((a < 0) | (a >= T.hom_size(F.obj(x), F.obj(y)))).any()):
            _limited(out, "hom", f"{F.name} maps hom({x!r},{y!r}) out of range", limit)
            return out
    for x, y, z in itertools.product(S.objects, repeat=3):
        if not (S.hom_size(x, y) and S.hom_size(y, z)):
            continue
        lhs = F.mor_array(x, z)[S.compose_table(x, y, z)]
        rhs = T.compose_pairs(F.obj(x), F.obj(y), F.obj(z), F.mor_array(y, z), F.mor_array(x, y))
        if (lhs != rhs).any():
            g, f = np.argwhere(lhs != rhs)[0].tolist()
            _limited(out, "composition",
                     f"{F.name}(g.f) != {F.name}(g).{F.name}(f) for f = hom({x!r},{y!r})[{f}], "
                     f"g = hom({y!r},{z!r})[{g}]", limit)
    return out


def check_fully_faithful(F: FunctorData):
    """``(True, None)`` or ``(False, (x, y))`` for the first non-bijective hom map."""
    for x, y in itertools.product(F.source.objects, repeat=2):
        a = F.mor_array(x, y)
        n = F.target.hom_size(F.obj(x), F.obj(y))
        if len(a) != n or len(np.unique(a)) != n:
            return False, (x, y)
    return True, None


def check_essentially_surjective(F: FunctorData, targets: Iterable | None = None):
    """``(ok, unhit)`` where ``unhit`` lists targets not isomorphic to any ``F(x)``."""
    targets = list(F.target.objects if targets is None else targets)
    image = list(dict.fromkeys(F.obj(x) for x in F.source.objects))
    image_set = set(image)
    unhit = []
    for t in targets:
        if t in image_set:
            continue
        if not F.target.has_object(t) or not any(F.target.isomorphic(i, t) for i in image):
            unhit.append(t)
    return not unhit, unhit


def check_isomorphism_of_categories(F: FunctorData) -> bool:
    """True iff the object map and the morphism map are bijections."""
    if len(set(F.obj_map.values())) != len(F.source.objects) or len(F.target.objects) != len(F.source.objects):
        return False
    ok, _ = check_fully_faithful(F)
    return ok


def check_isofibration(F: FunctorData):
    """Every isomorphism ``F(u) -> t`` of the target lifts to an isomorphism from ``u``.

    Returns ``(True, None)`` or ``(False, (u, t, local))`` naming a non-liftable iso.
    """
    S, T = F.source, F.target
    over: dict = {}
    for v in S.objects:
        over.setdefault(F.obj(v), []).append(v)
    for u in S.objects:
        fu = F.obj(u)
        for t in T.objects:
            for k in range(T.hom_size(fu, t)):
                if not T.is_isomorphism(fu, t, k):
                    continue
                lifted = False
                for v in over.get(t, ()):
                    hits = np.flatnonzero(F.mor_array(u, v) == k)
                    if any(S.is_isomorphism(u, v, int(m)) for m in hits):
                        lifted = True
                        break
                if not lifted:
                    return False, (u, t, k)
    return True, None


class NaturalTransformation:
    """Components ``eta_x``, each a local index in ``target.hom(F x, G x)``."""

    def __init__(self, source: FunctorData, target: FunctorData, components: dict, name="eta"):
        if source.source is not target.source or not same_category(source.target, target.target):
            raise FunctorError("natural transformation between functors with different ends")
        self.source, self.target, self.name = source, target, name
        self.components = dict(components)

    def check_naturality(self, limit: int = 20) -> list[Violation]:
        F, G = self.source, self.target
        C, D = F.source, F.target
        out: list[Violation] = []
        for x, y in itertools.product(C.objects, repeat=2):
            if not C.hom_size(x, y):
                continue
            Fx, Fy, Gx, Gy = F.obj(x), F.obj(y), G.obj(x), G.obj(y)
            # G(f) . eta_x  vs  eta_y . F(f)
            lhs = D.compose_pairs(Fx, Gx, Gy, G.mor_array(x, y), [self.components[x]])[:, 0]
            rhs = D.compose_pairs(Fx, Fy, Gy, [self.components[y]], F.mor_array(x, y))[0]
            if (lhs != rhs).any():
                f = int(np.flatnonzero(lhs != rhs)[0])
                _limited(out, "naturality", f"square fails at hom({x!r},{y!r})[{f}]", limit)
        return out

    def is_isomorphism(self) -> bool:
        D = self.source.target
        return all(D.is_isomorphism(self.source.obj(x), self.target.obj(x), k)
                   for x, k in self.components.items())


# ---------------------------------------------------------------------------
# interchange documents


class frozendict(dict):
    """Hashable read-only dict, used for labels parsed from documents."""

    def __hash__(self):
        return hash(tuple(sorted(self.items())))

    def _readonly(self, *a, **k):
        raise TypeError("frozendict is immutable")

    __setitem__ = __delitem__ = update = pop = popitem = setdefault = clear = _readonly


def jsonify(x):
    """Convert labels and payloads to JSON-compatible values."""
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, bool) or x is None or isinstance(x, (str, int, float)):
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (tuple, list)):
        return [jsonify(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((jsonify(v) for v in x), key=canonical_json)
    if isinstance(x, dict):
        return {str(k): jsonify(v) for k, v in x.items()}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def freeze(x):
    if isinstance(x, list):
        return tuple(freeze(v) for v in x)
    if isinstance(x, dict):
        return frozendict({k: freeze(v) for k, v in x.items()})
    return x


def canonical_json(x) -> str:
    return json.dumps(x, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def label_key(label) -> str:
    """Canonical text key of an object label."""
    return canonical_json(jsonify(label))


def to_document(C: FiniteCategory) -> dict:
    obs = C.objects
    doc_objects = [jsonify(x) for x in obs]
    morphisms = [{"id": m.id, "dom": jsonify(m.dom), "cod": jsonify(m.cod), "payload": jsonify(m.payload)}
                 for m in C.morphisms()]
    identities = {label_key(x): C.identity_id(x) for x in obs}
    compose = []
    for x, y, z in itertools.product(obs, repeat=3):
        if not (C.hom_size(x, y) and C.hom_size(y, z)):
            continue
        T = C.compose_table(x, y, z)
        bx, by, bz = C.morphism_id(x, y, 0), C.morphism_id(y, z, 0), C.morphism_id(x, z, 0)
        g, f = np.indices(T.shape).reshape(2, -1)
        gf = T.ravel()
        rows = np.stack([by + g, bx + f, np.where(gf == UNDEFINED, -1, bz + gf)], axis=1).tolist()
        for r in rows:
            if r[2] < 0:
                r[2] = None
        compose.extend(rows)
    doc = {"name": C.name, "objects": doc_objects, "morphisms": morphisms,
           "identities": identities, "compose": compose}
    if C.header:
        doc["header"] = jsonify(C.header)
    return doc


def dumps(doc: dict) -> str:
    return canonical_json(doc) + "\n"


def emit(C: FiniteCategory) -> str:
    return dumps(to_document(C))


def document_hash(C: FiniteCategory) -> str:
    h = getattr(C, "_doc_hash", None)
    if h is None:
        h = hashlib.sha256(emit(C).encode("utf-8")).hexdigest()
        C._doc_hash = h
    return h


def from_document(doc: dict | str) -> TableCategory:
    if isinstance(doc, str):
        doc = json.loads(doc)
    objects = [freeze(x) for x in doc["objects"]]
    by_key = {label_key(x): x for x in objects}
    homs: dict = {}
    where: dict = {}
    for m in doc["morphisms"]:
        x, y = freeze(m["dom"]), freeze(m["cod"])
        homs.setdefault((x, y), []).append(freeze(m["payload"]))
        where[m["id"]] = (x, y, len(homs[(x, y)]) - 1)
    identities = {}
    for key, mid in doc["identities"].items():
        x, y, k = where[mid]
        identities[by_key[key]] = k if x == y == by_key[key] else UNDEFINED
    compose: dict = {}
    stray = []
    for g, f, gf in doc["compose"]:
        xf, yf, kf = where[f]
        yg, zg, kg = where[g]
        if yf != yg:
            stray.append(f"compose entry for non-composable pair ({g}, {f})")
            continue
        if gf is None:
            continue
        xh, zh, kh = where[gf]
        if (xh, zh) != (xf, zg):
            stray.append(f"composite {gf} of ({g}, {f}) has wrong dom/cod")
            continue
        compose[(xf, yf, zg, kg, kf)] = kh
    return TableCategory(objects, {k: tuple(v) for k, v in homs.items()}, identities, compose,
                         name=doc.get("name", "C"), header=freeze(doc.get("header", {})), stray=stray)


def functor_document(F: FunctorData) -> dict:
    S = F.source
    return {
        "name": F.name,
        "source": document_hash(S),
        "target": document_hash(F.target),
        "objects": [[jsonify(x), jsonify(F.obj(x))] for x in S.objects],
        "morphisms": [[m.id, F.map_id(m.id)] for m in S.morphisms()],
    }
