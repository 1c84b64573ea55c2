"""Wreath-type constructions: M, M^op, Segal and coSegal maps, X ≀ A, Θ_n.

All of them are instances of one *labeled relation* category.  Given a base
category ``B``, a functor ``rho`` from ``B`` into Γ, Γ^op or FinSet_* and a
label category ``A``:

* an object is ``(x, labels)`` with one ``A``-object per index
  ``1..rho(x)``;
* a morphism ``(x, a) -> (y, b)`` is a base morphism ``f0`` together with one
  ``A``-morphism ``a(i) -> b(j)`` for each pair ``(i, j)`` of the relation
  ``rho(f0)``;
* composition is ``(gf)_{ki} = g_{kj} f_{ji}`` through the unique middle
  index ``j``.

Over Γ this is the wreath product (and ``M`` when ``B = Γ``); over FinSet_*
or Γ^op it is the dual (cowreath) product.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fincat import (
    UNDEFINED,
    CategoryError,
    FiniteCategory,
    FunctorData,
    FunctorError,
    OppositeCategory,
    RelabeledCategory,
    check_functor,
    check_isomorphism_of_categories,
    identity_functor,
    jsonify,
    opposite,
    opposite_functor,
    pullback,
    terminal_category,
)
from .sites import (
    GammaMorphism,
    IntervalMorphism,
    PointedMap,
    P_to_pointed,
    materialize,
    pointed_to_gamma,
    site_of,
)


@dataclass(frozen=True, slots=True)
class WreathMorphism:
    """Base payload plus components ``a(i) -> b(j)``, one per relation pair ``(i, j)``."""

    base: object
    pairs: tuple
    components: tuple

    def to_json(self):
        return {"base": jsonify(self.base),
                "components": {f"{j},{i}": jsonify(c) for (i, j), c in zip(self.pairs, self.components)}}


# ---------------------------------------------------------------------------
# relations


def _relation_kind(T: FiniteCategory) -> str:
    """How payloads of ``T`` encode relations: ``gamma`` or ``pointed`` (possibly ``^op``)."""
    if isinstance(T, OppositeCategory):
        inner = _relation_kind(T.base)
        return inner[:-3] if inner.endswith("^op") else inner + "^op"
    site = site_of(T)
    if site == "Γ":
        return "gamma"
    if site == "FinSet_*":
        return "pointed"
    raise CategoryError(f"{T.name} is not Γ, Γ^op or FinSet_*")


def relation_pairs(kind: str, p) -> tuple:
    """Relation ``{(dom index, cod index)}`` of a payload, in canonical order.

    Γ-like relations (a Γ-map read forwards) are ordered by domain index;
    the others (partial maps read as Γ^op) by codomain index.
    """
    if kind == "gamma":
        return tuple((i, j) for i, block in enumerate(p.blocks, start=1) for j in block)
    if kind == "gamma^op":
        return tuple(sorted(((j, i) for i, block in enumerate(p.blocks, start=1) for j in block),
                            key=lambda ji: (ji[1], ji[0])))
    if kind == "pointed":
        return tuple(sorted(((i, v) for i, v in enumerate(p.values) if i and v), key=lambda ij: (ij[1], ij[0])))
    if kind == "pointed^op":
        return tuple(sorted((v, j) for j, v in enumerate(p.values) if j and v))
    raise ValueError(kind)


def _radix_digits(radix) -> np.ndarray:
    count = int(np.prod(radix, dtype=np.int64)) if radix else 1
    out = np.zeros((count, len(radix)), dtype=np.int64)
    rest = np.arange(count, dtype=np.int64)
    for c in range(len(radix) - 1, -1, -1):
        rest, out[:, c] = np.divmod(rest, radix[c])
    return out


def _place_values(radix) -> np.ndarray:
    w = np.ones(len(radix), dtype=np.int64)
    for c in range(len(radix) - 2, -1, -1):
        w[c] = w[c + 1] * radix[c + 1]
    return w


class LabeledRelationCategory(FiniteCategory):
    def __init__(self, rho: FunctorData, labels: FiniteCategory, name=None, header=None):
        self.base, self.rho, self.labels = rho.source, rho, labels
        self.kind = _relation_kind(rho.target)
        objects = [(x, a) for x in self.base.objects
                   for a in itertools.product(labels.objects, repeat=int(rho.obj(x)))]
        super().__init__(objects, name or f"{self.base.name}≀{labels.name}", header)
        self._relations: dict = {}
        self._blocks: dict = {}
        self._middles: dict = {}

    def arity(self, x) -> int:
        return int(self.rho.obj(x))

    def relation(self, x, y, k: int) -> tuple:
        key = (x, y, k)
        r = self._relations.get(key)
        if r is None:
            T = self.rho.target
            p = T.payload_at(self.rho.obj(x), self.rho.obj(y), self.rho.mor(x, y, k))
            r = self._relations[key] = relation_pairs(self.kind, p)
        return r

    def _block_data(self, u, v):
        """Per base morphism: relation, radix, offset.  Plus the total count."""
        key = (u, v)
        d = self._blocks.get(key)
        if d is None:
            (x, a), (y, b) = u, v
            A = self.labels
            rows, total = [], 0
            for k in range(self.base.hom_size(x, y)):
                pairs = self.relation(x, y, k)
                radix = [A.hom_size(a[i - 1], b[j - 1]) for i, j in pairs]
                count = int(np.prod(radix, dtype=np.int64)) if radix else 1
                rows.append((pairs, radix, total, count))
                total += count
            d = self._blocks[key] = (rows, total)
        return d

    def hom_size(self, u, v):
        return self._block_data(u, v)[1]

    def _hom(self, u, v):
        (x, a), (y, b) = u, v
        A, out = self.labels, []
        base_hom = self.base.hom(x, y)
        for k, (pairs, radix, _, count) in enumerate(self._block_data(u, v)[0]):
            if not count:
                continue
            factors = [A.hom(a[i - 1], b[j - 1]) for i, j in pairs]
            f0 = base_hom[k]
            out.extend(WreathMorphism(f0, pairs, comps) for comps in itertools.product(*factors))
        return out

    def _identity(self, u):
        x, a = u
        k0 = self.base.identity(x)
        pairs, radix, offset, _ = self._block_data(u, u)[0][k0]
        if any(i != j for i, j in pairs) or len(pairs) != len(a):
            raise CategoryError(f"{self.rho.name} does not send 1_{x!r} to an identity")
        digits = [self.labels.identity(a[i - 1]) for i, _ in pairs]
        return offset + int(np.dot(digits, _place_values(radix))) if pairs else offset

    def _middle(self, x, y, z, f0, g0):
        """Composite relation with its unique middle indices, as (p, q, h-position) triples."""
        key = (x, y, z, f0, g0)
        m = self._middles.get(key)
        if m is None:
            h0 = self.base.compose_local(x, y, z, g0, f0)
            pf, pg, ph = self.relation(x, y, f0), self.relation(y, z, g0), self.relation(x, z, h0)
            by_dom: dict = {}
            for q, (j, k) in enumerate(pg):
                by_dom.setdefault(j, []).append((q, k))
            chains: dict = {}
            for p, (i, j) in enumerate(pf):
                for q, k in by_dom.get(j, ()):
                    chains.setdefault((i, k), []).append((p, q))
            if set(chains) != set(ph) or any(len(c) != 1 for c in chains.values()):
                raise CategoryError(f"{self.rho.name} is not functorial on composite of "
                                    f"{self.base.hom(x, y)[f0]!r} and {self.base.hom(y, z)[g0]!r}")
            m = self._middles[key] = (h0, [(chains[ik][0][0], chains[ik][0][1], ik) for ik in ph])
        return m

    # relations of Γ and of FinSet_* maps are partial functions in one direction:
    # each codomain index has at most one pair (Γ, FinSet_*^op) or each domain
    # index does (Γ^op, FinSet_*)
    _BY_COD = {"gamma": True, "pointed^op": True, "gamma^op": False, "pointed": False}

    def _relation_arrays(self, x, y):
        """``(pos, other)`` of shape ``(|hom(x,y)|, arity + 1)`` keyed by the unique end."""
        key = ("arrays", x, y)
        d = self._blocks.get(key)
        if d is None:
            by_cod = self._BY_COD[self.kind]
            width = (self.arity(y) if by_cod else self.arity(x)) + 1
            n = self.base.hom_size(x, y)
            pos = np.full((n, width), -1, dtype=np.int64)
            other = np.full((n, width), -1, dtype=np.int64)
            for r in range(n):
                for t, (i, j) in enumerate(self.relation(x, y, r)):
                    k, o = (j, i) if by_cod else (i, j)
                    if pos[r, k] >= 0:
                        raise CategoryError(f"{self.rho.name}: relation is not a partial function")
                    pos[r, k], other[r, k] = t, o
            d = self._blocks[key] = (pos, other)
        return d

    def _digit_matrix(self, rows, n):
        """Base index and per-pair component indices of every morphism in a hom block."""
        width = max((len(r[0]) for r in rows), default=0)
        base = np.empty(n, dtype=np.int64)
        digits = np.zeros((n, max(width, 1)), dtype=np.int64)
        for r0, (pairs, radix, off, count) in enumerate(rows):
            if count:
                base[off:off + count] = r0
                if pairs:
                    digits[off:off + count, :len(pairs)] = _radix_digits(radix)
        return base, digits

    def _compose_block(self, u, v, w):
        (x, a), (y, b), (z, c) = u, v, w
        rows_f, nf = self._block_data(u, v)
        rows_g, ng = self._block_data(v, w)
        rows_h, _ = self._block_data(u, w)
        if not nf or not ng:
            return np.full((ng, nf), UNDEFINED, dtype=np.int64)
        try:
            posF, othF = self._relation_arrays(x, y)
            posG, othG = self._relation_arrays(y, z)
            posH, othH = self._relation_arrays(x, z)
        except CategoryError:
            return self._compose_block_loop(u, v, w)
        by_cod = self._BY_COD[self.kind]
        F0, DF = self._digit_matrix(rows_f, nf)
        G0, DG = self._digit_matrix(rows_g, ng)
        H0 = self.base.compose_table(x, y, z)[G0[:, None], F0[None, :]]
        width_h = max((len(r[0]) for r in rows_h), default=0)
        offH = np.array([r[2] for r in rows_h], dtype=np.int64)
        WH = np.zeros((len(rows_h), max(width_h, 1)), dtype=np.int64)
        for h0, r in enumerate(rows_h):
            if r[0]:
                WH[h0, :len(r[0])] = _place_values(r[1])
        out = offH[H0].copy()
        A = self.labels
        # walk each key end across the two relations: k <- j <- i (by codomain) or i -> j -> k
        first_pos, first_oth = (posG, othG) if by_cod else (posF, othF)
        second_pos, second_oth = (posF, othF) if by_cod else (posG, othG)
        first_base, second_base = (G0, F0) if by_cod else (F0, G0)
        for key in range(1, posH.shape[1]):
            t1 = first_pos[first_base, key]
            mid = first_oth[first_base, key]
            if by_cod:
                t1g = t1[:, None]
                midg = mid[:, None]
                t2 = second_pos[second_base[None, :], np.maximum(midg, 0)]
                end = second_oth[second_base[None, :], np.maximum(midg, 0)]
                ok = (t1g >= 0) & (t2 >= 0)
                q, p, i, j, k = np.broadcast_arrays(t1g, t2, end, midg, key)
            else:
                t1f = t1[None, :]
                midf = mid[None, :]
                t2 = second_pos[second_base[:, None], np.maximum(midf, 0)]
                end = second_oth[second_base[:, None], np.maximum(midf, 0)]
                ok = (t1f >= 0) & (t2 >= 0)
                p, q, i, j, k = np.broadcast_arrays(t1f, t2, key, midf, end)
            th = posH[H0, key]
            expected_end = othH[H0, key]
            if ((th >= 0) != ok).any() or (ok & (expected_end != (i if by_cod else k))).any():
                raise CategoryError(f"{self.rho.name} is not functorial on a composite in hom({u!r}, {w!r})")
            if not ok.any():
                continue
            wgt = WH[H0, np.maximum(th, 0)]
            gs, fs = np.nonzero(ok)
            nb, nc = len(b) + 1, len(c) + 1
            code = (i[gs, fs] * nb + j[gs, fs]) * nc + k[gs, fs]
            order = np.argsort(code, kind="stable")
            gs, fs, code = gs[order], fs[order], code[order]
            cuts = np.flatnonzero(np.diff(code)) + 1
            for lo, hi in zip(np.r_[0, cuts], np.r_[cuts, len(code)]):
                rest, kk = divmod(int(code[lo]), nc)
                ii, jj = divmod(rest, nb)
                T = A.compose_table(a[ii - 1], b[jj - 1], c[kk - 1])
                g_, f_ = gs[lo:hi], fs[lo:hi]
                out[g_, f_] += wgt[g_, f_] * T[DG[g_, q[g_, f_]], DF[f_, p[g_, f_]]]
        return out

    def _compose_block_loop(self, u, v, w):
        """Reference composition, one base pair at a time."""
        (x, a), (y, b), (z, c) = u, v, w
        rows_f, nf = self._block_data(u, v)
        rows_g, ng = self._block_data(v, w)
        rows_h, _ = self._block_data(u, w)
        out = np.full((ng, nf), UNDEFINED, dtype=np.int64)
        if not nf or not ng:
            return out
        A = self.labels
        digits_f = [_radix_digits(r[1]) if r[3] else None for r in rows_f]
        digits_g = [_radix_digits(r[1]) if r[3] else None for r in rows_g]
        for f0, (pf, _, off_f, cf) in enumerate(rows_f):
            if not cf:
                continue
            Fd = digits_f[f0]
            for g0, (pg, _, off_g, cg) in enumerate(rows_g):
                if not cg:
                    continue
                Gd = digits_g[g0]
                h0, chain = self._middle(x, y, z, f0, g0)
                ph, radix_h, off_h, _ = rows_h[h0]
                idx = np.full((cg, cf), off_h, dtype=np.int64)
                for (p, q, (i, k)), wgt in zip(chain, _place_values(radix_h)):
                    j = pf[p][1]
                    T = A.compose_table(a[i - 1], b[j - 1], c[k - 1])
                    idx += wgt * T[Gd[:, q][:, None], Fd[:, p][None, :]]
                out[off_g:off_g + cg, off_f:off_f + cf] = idx
        return out

    def is_isomorphism(self, u, v, f: int) -> bool:
        """Isomorphisms are exactly base isomorphisms with invertible components."""
        (x, a), (y, b) = u, v
        rows, _ = self._block_data(u, v)
        k = next(k for k, r in enumerate(rows) if r[2] <= f < r[2] + r[3])
        pairs, radix, offset, _ = rows[k]
        if not self.base.is_isomorphism(x, y, k):
            return False
        digits = _radix_digits(radix)[f - offset] if pairs else []
        return all(self.labels.is_isomorphism(a[i - 1], b[j - 1], int(d)) for (i, j), d in zip(pairs, digits))

    def isomorphic(self, u, v) -> bool:
        if u == v:
            return True
        return any(self.is_isomorphism(u, v, f) for f in range(self.hom_size(u, v)))

    # -- structure functors -------------------------------------------------
    def base_projection(self) -> FunctorData:
        def build(u, v):
            rows, _ = self._block_data(u, v)
            return np.repeat(np.arange(len(rows)), [r[3] for r in rows])

        return FunctorData(self, self.base, {u: u[0] for u in self.objects}, build, "pr_X")

    def m_projection(self, max_index: int | None = None) -> FunctorData:
        """The projection to ``M(A)`` (Γ-kind) or ``M^op(A)`` (the other kinds)."""
        k = max_index if max_index is not None else int(self.rho.target.header.get("maxRank", 0))
        rho, T = self.rho, self.rho.target
        if self.kind == "gamma":
            target = M_of(self.labels, k)

            def mor(u, v, p):
                q = T.payload_at(rho.obj(u[0]), rho.obj(v[0]), rho.map_index(u[0], v[0], p.base))
                return WreathMorphism(q, p.pairs, p.components)
        else:
            target = Mop_of(self.labels, k)

            def mor(u, v, p):
                q = T.payload_at(rho.obj(u[0]), rho.obj(v[0]), rho.map_index(u[0], v[0], p.base))
                if self.kind == "pointed":
                    q = pointed_to_gamma(q)
                elif self.kind != "gamma^op":
                    raise CategoryError(f"no M^op projection for relation kind {self.kind}")
                return WreathMorphism(q, tuple((j, i) for i, j in p.pairs), p.components)

        return FunctorData.from_payloads(self, target, lambda u: (int(rho.obj(u[0])), u[1]), mor, "pr_M")


# ---------------------------------------------------------------------------
# M, M^op and their structure maps


@lru_cache(maxsize=None)
def M_of(C: FiniteCategory, max_index: int) -> LabeledRelationCategory:
    """``M(C)`` on index sets of size at most ``max_index``."""
    G = materialize("Γ", max_index)
    return LabeledRelationCategory(identity_functor(G), C, f"M({C.name})",
                                   {"construction": "M", "maxIndex": max_index, "labels": C.name})


@lru_cache(maxsize=None)
def Mop_of(C: FiniteCategory, max_index: int) -> FiniteCategory:
    """``M^op(C) := M(C^op)^op``, built literally by conjugation."""
    return opposite(M_of(opposite(C), max_index))


@lru_cache(maxsize=None)
def Mop_unpacked(C: FiniteCategory, max_index: int) -> LabeledRelationCategory:
    """The direct description of ``M^op(C)``: pointed index maps with components along them."""
    F = materialize("FinSet_*", max_index)
    return LabeledRelationCategory(identity_functor(F), C, f"M^op({C.name})",
                                   {"construction": "M^op", "maxIndex": max_index, "labels": C.name})


def mop_comparison(C: FiniteCategory, max_index: int) -> FunctorData:
    """Isomorphism ``M(C^op)^op -> Mop_unpacked(C)``."""
    src, dst = Mop_of(C, max_index), Mop_unpacked(C, max_index)

    def mor(u, v, p):
        return WreathMorphism(P_to_pointed(p.base), tuple((j, i) for i, j in p.pairs), p.components)

    return FunctorData.from_payloads(src, dst, lambda u: u, mor, "unpack")


def M_bang(C: FiniteCategory, max_index: int) -> FunctorData:
    """``M(!): M(C) -> M(*) = Γ``."""
    P = M_of(C, max_index).base_projection()
    return FunctorData(P.source, P.target, P.obj_map, P.mor_array, "M(!)")


def Mop_bang(C: FiniteCategory, max_index: int) -> FunctorData:
    """``M^op(!): M^op(C) -> Γ^op``."""
    P = opposite_functor(M_bang(opposite(C), max_index))
    return FunctorData(P.source, P.target, P.obj_map, P.mor_array, "M^op(!)")


def m_star_iso(max_index: int) -> FunctorData:
    """The isomorphism ``M(*) -> Γ``."""
    return M_bang(star(), max_index)


@lru_cache(maxsize=None)
def star() -> FiniteCategory:
    """The shared terminal category used as a label category."""
    return terminal_category()


# ---------------------------------------------------------------------------
# Segal and coSegal maps


@lru_cache(maxsize=None)
def segal_gamma(max_rank: int) -> FunctorData:
    """``γ: Δ -> Γ``: ``[n]`` has edges ``e_1..e_n``; ``γ(f)(e_i) = {e_k : f(i-1) < k <= f(i)}``."""
    def mor(x, y, f):
        return GammaMorphism(x, y, tuple(tuple(range(f.values[i - 1] + 1, f.values[i] + 1))
                                         for i in range(1, x + 1)))

    return FunctorData.from_payloads(materialize("Δ", max_rank), materialize("Γ", max_rank),
                                     lambda n: n, mor, "γ")


@lru_cache(maxsize=None)
def cosegal_omega(max_rank: int) -> FunctorData:
    """``ω: ∇ -> FinSet_*``: interior points, with extremes sent to the basepoint."""
    def mor(x, y, f: IntervalMorphism):
        return PointedMap(x - 1, y - 1, (0,) + tuple(v if 0 < v < y else 0 for v in f.values[1:x]))

    return FunctorData.from_payloads(materialize("∇", max_rank), materialize("FinSet_*", max_rank - 1),
                                     lambda n: n - 1, mor, "ω")


def segal_sizes(F: FunctorData) -> list[int]:
    return [int(F.obj(x)) for x in F.source.objects]


# ---------------------------------------------------------------------------
# wreath and cowreath products


def _check_target(F: FunctorData, kinds: tuple):
    kind = _relation_kind(F.target)
    if kind not in kinds:
        raise CategoryError(f"{F.name} lands in {F.target.name}; expected one of {kinds}")


@lru_cache(maxsize=None)
def wreath(gamma: FunctorData, A: FiniteCategory, name: str | None = None, header=None) -> LabeledRelationCategory:
    """Direct construction of ``X_γ ⊗^M A``."""
    _check_target(gamma, ("gamma",))
    return LabeledRelationCategory(gamma, A, name, dict(header) if header else None)


@lru_cache(maxsize=None)
def cowreath(omega: FunctorData, A: FiniteCategory, name: str | None = None) -> LabeledRelationCategory:
    """Direct construction of ``X_ω ⊗^{M^op} A`` for ``ω`` into FinSet_* or Γ^op."""
    _check_target(omega, ("pointed", "gamma^op"))
    return LabeledRelationCategory(omega, A, name or f"{omega.source.name}⊗^M^op {A.name}")


def _retarget_gamma(gamma: FunctorData, max_index: int, op: bool = False) -> FunctorData:
    G = materialize("Γ", max_index)
    target = opposite(G) if op else G
    if gamma.target is target:
        return gamma
    sizes = segal_sizes(gamma)
    if max(sizes, default=0) > max_index:
        raise CategoryError(f"bound mismatch: {gamma.name} reaches size {max(sizes)} > {max_index}")
    T = gamma.target
    return FunctorData.from_payloads(
        gamma.source, target, lambda x: int(gamma.obj(x)),
        lambda x, y, p: T.payload_at(gamma.obj(x), gamma.obj(y), gamma.map_index(x, y, p)), gamma.name)


def _to_gamma_op(omega: FunctorData, max_index: int) -> FunctorData:
    """Compose a functor into FinSet_* with ``P^{-1}: FinSet_* -> Γ^op``."""
    if _relation_kind(omega.target) == "gamma^op":
        return _retarget_gamma(omega, max_index, op=True)
    T = omega.target
    return FunctorData.from_payloads(
        omega.source, opposite(materialize("Γ", max_index)), lambda x: int(omega.obj(x)),
        lambda x, y, p: pointed_to_gamma(T.payload_at(omega.obj(x), omega.obj(y), omega.map_index(x, y, p))),
        omega.name)


def generalized_wreath(T: str, Ar: FunctorData, X: FiniteCategory, max_index: int | None = None):
    """``A_r ⊗^T X := A ×_{T(*)} T(X)`` for ``T`` in {M, Mop}; ``T(*)`` is Γ resp. Γ^op."""
    k = max_index if max_index is not None else max(segal_sizes(Ar), default=0)
    if T == "M":
        r = _retarget_gamma(Ar, k)
        return pullback(r, M_bang(X, k))
    if T == "Mop":
        r = _to_gamma_op(Ar, k)
        return pullback(r, Mop_bang(X, k))
    raise CategoryError(f"unsupported transformer {T!r}; use 'M' or 'Mop'")


def wreath_by_pullback(gamma: FunctorData, A: FiniteCategory, max_index: int | None = None):
    return generalized_wreath("M", gamma, A, max_index)


def cowreath_by_pullback(omega: FunctorData, A: FiniteCategory, max_index: int | None = None):
    return generalized_wreath("Mop", omega, A, max_index)


def pullback_comparison(L: LabeledRelationCategory, P) -> FunctorData:
    """Canonical functor from a direct (co)wreath to its pullback construction."""
    rho, T = L.rho, L.rho.target

    def obj(u):
        return (u[0], (int(rho.obj(u[0])), u[1]))

    def mor(u, v, p):
        q = T.payload_at(rho.obj(u[0]), rho.obj(v[0]), rho.map_index(u[0], v[0], p.base))
        if L.kind == "gamma":
            return (p.base, WreathMorphism(q, p.pairs, p.components))
        if L.kind == "pointed":
            q = pointed_to_gamma(q)
        return (p.base, WreathMorphism(q, tuple((j, i) for i, j in p.pairs), p.components))

    return FunctorData.from_payloads(L, P, obj, mor, "cmp")


def strip_pullback(P, like: LabeledRelationCategory) -> FiniteCategory:
    """Relabel a pullback (co)wreath into the direct construction's labels.

    The base index size and the base map inside the ``T(X)`` part are
    redundant (determined by the ``X`` part) and are dropped.
    """
    flip = like.kind != "gamma"

    def payload(u, v, p):
        p0, q = p
        pairs = tuple((j, i) for i, j in q.pairs) if flip else q.pairs
        return WreathMorphism(p0, pairs, q.components)

    return RelabeledCategory(P, lambda u: (u[0], u[1][1]), payload, like.name, like.header)


# ---------------------------------------------------------------------------
# Θ_n


@lru_cache(maxsize=None)
def theta(n: int, bounds: tuple) -> FiniteCategory:
    """``Θ_n`` with per-level rank bounds ``(b_1, ..., b_n)``; ``Θ_1 = Δ``."""
    bounds = tuple(int(b) for b in bounds)
    if n < 1 or len(bounds) != n or any(b < 0 for b in bounds):
        raise ValueError(f"theta needs n >= 1 and {n} non-negative bounds, got {bounds}")
    if n == 1:
        return materialize("Δ", bounds[0])
    inner = theta(n - 1, bounds[1:])
    return wreath(segal_gamma(bounds[0]), inner, f"Θ_{n}",
                  tuple(sorted({"name": f"Θ_{n}", "bounds": bounds}.items())))


def theta_object_count(n: int, bounds) -> int:
    """Closed form for the object count: ``sum_k (#Θ_{n-1})^k``."""
    if n == 1:
        return bounds[0] + 1
    inner = theta_object_count(n - 1, bounds[1:])
    return sum(inner ** k for k in range(bounds[0] + 1))


# ---------------------------------------------------------------------------
# duality and functoriality in the labels and the base


def duality_target(L: LabeledRelationCategory) -> LabeledRelationCategory:
    """``X^op_{γ^op} ⊗^{M^op} A^op`` for ``L = X_γ ⊗^M A``."""
    return _duality_target(L.rho, L.labels)


@lru_cache(maxsize=None)
def _duality_target(rho, A):
    return LabeledRelationCategory(opposite_functor(rho), opposite(A),
                                   f"{rho.source.name}^op⊗^M^op {A.name}^op")


def duality_iso(L: LabeledRelationCategory) -> FunctorData:
    """``(X_γ ⊗^M A)^op -> X^op_{γ^op} ⊗^{M^op} A^op``.

    Objects are unchanged.  A morphism keeps its base map and components;
    each relation pair ``(i, j)`` is read backwards as ``(j, i)``.
    """
    if L.kind != "gamma":
        raise CategoryError("duality_iso needs a wreath product over Γ")
    src, dst = opposite(L), duality_target(L)

    def mor(u, v, p):
        return WreathMorphism(p.base, tuple((j, i) for i, j in p.pairs), p.components)

    return FunctorData.from_payloads(src, dst, lambda u: u, mor, "τ")


def duality_commutes(L: LabeledRelationCategory, F: FunctorData | None = None) -> dict:
    """Check ``F = duality_iso(L)`` against the projections to ``X^op`` and ``M^op(A^op)``."""
    F = F or duality_iso(L)
    dst = F.target
    out = {}
    for label, src_proj, dst_proj in (
        ("base", opposite_functor(L.base_projection()), dst.base_projection()),
        ("M", opposite_functor(L.m_projection()), dst.m_projection()),
    ):
        composite = F.then(dst_proj)
        ok = src_proj.target is composite.target and all(
            np.array_equal(composite.mor_array(x, y), src_proj.mor_array(x, y))
            for x in F.source.objects for y in F.source.objects)
        out[label] = ok and all(composite.obj(x) == src_proj.obj(x) for x in F.source.objects)
    return out


def relabel_labels(L: LabeledRelationCategory, E: FunctorData, name=None) -> FunctorData:
    """``X ⊗ E: X ⊗ A -> X ⊗ A'`` for a functor ``E: A -> A'``."""
    dst = LabeledRelationCategory(L.rho, E.target, name or f"{L.base.name}⊗{E.target.name}")

    def mor(u, v, p):
        a, b = u[1], v[1]
        return WreathMorphism(p.base, p.pairs, tuple(E.map_payload(a[i - 1], b[j - 1], c)
                                                     for (i, j), c in zip(p.pairs, p.components)))

    return FunctorData.from_payloads(L, dst, lambda u: (u[0], tuple(E.obj(l) for l in u[1])), mor,
                                     f"1⊗{E.name}")


def rebase(L: LabeledRelationCategory, B: FunctorData, rho: FunctorData, index_map=None, name=None) -> FunctorData:
    """Change the base along ``B: X -> X'`` with new relation functor ``rho`` on ``X'``.

    ``index_map(x, i)`` identifies index ``i`` of ``x`` with an index of
    ``B(x)`` (identity by default).  Raises :class:`FunctorError` if a base
    morphism's relation does not correspond under the identification.
    """
    if B.target is not rho.source:
        raise FunctorError("rebase: relation functor must start at the new base")
    index_map = index_map or (lambda x, i: i)
    dst = LabeledRelationCategory(rho, L.labels, name)

    def obj(u):
        x, a = u
        n = int(rho.obj(B.obj(x)))
        if n != len(a):
            raise FunctorError(f"rebase: arity of {x!r} changes from {len(a)} to {n}", witness=x)
        out = [None] * n
        for i, label in enumerate(a, start=1):
            out[index_map(x, i) - 1] = label
        return (B.obj(x), tuple(out))

    def mor(u, v, p):
        x, y = u[0], v[0]
        moved = {(index_map(x, i), index_map(y, j)): c for (i, j), c in zip(p.pairs, p.components)}
        k = B.map_index(x, y, p.base)
        new_base = B.target.hom(B.obj(x), B.obj(y))[k]
        pairs = dst.relation(B.obj(x), B.obj(y), k)
        if set(pairs) != set(moved):
            raise FunctorError(f"rebase: relation of {p.base!r} does not match {new_base!r}",
                               witness=(u, v, p.base))
        return WreathMorphism(new_base, pairs, tuple(moved[ij] for ij in pairs))

    return FunctorData.from_payloads(L, dst, obj, mor, f"{B.name}⊗1")


def isofibration_lifts(P: FunctorData) -> tuple[bool, object]:
    """Constructive lifting for ``M(!)`` or ``M^op(!)``.

    For each object ``(I, a)`` and each isomorphism ``f`` of Γ (or Γ^op) out
    of ``I``, relabels along ``f`` and lifts with identity components, then
    checks the lift is an isomorphism over ``f``.  Returns ``(True, None)`` or
    the first failing ``(object, target, iso index)``.
    """
    S, T = P.source, P.target
    op = isinstance(S, OppositeCategory)
    M = S.base if op else S
    C = M.labels
    for u in S.objects:
        n, a = u
        for t in T.objects:
            for k in range(T.hom_size(n, t)):
                if not T.is_isomorphism(n, t, k):
                    continue
                f = T.payload_at(n, t, k)
                pairs = relation_pairs("gamma", f)
                # f is a Γ-bijection n -> t, or t -> n when read in Γ^op
                src_labels = a if not op else None
                if op:
                    src_labels = tuple(a[j - 1] for i, j in sorted(pairs))
                    v = (t, src_labels)
                    ends = (v, u)
                else:
                    moved = [None] * t
                    for i, j in pairs:
                        moved[j - 1] = a[i - 1]
                    v = (t, tuple(moved))
                    ends = (u, v)
                labels = ends[0][1]
                comps = tuple(C.payload_at(labels[i - 1], labels[i - 1], C.identity(labels[i - 1]))
                              for i, _ in pairs)
                idx = M.find(*ends, WreathMorphism(f, pairs, comps))
                if idx == UNDEFINED or P.mor(u, v, idx) != k or not S.is_isomorphism(u, v, idx):
                    return False, (u, t, k)
    return True, None


def check_wreath_double(gamma: FunctorData, A: FiniteCategory) -> tuple[bool, list]:
    """Direct vs pullback construction: comparison functor is a strict isomorphism."""
    L = wreath(gamma, A)
    P = wreath_by_pullback(gamma, A)
    F = pullback_comparison(L, P)
    problems = [v.detail for v in check_functor(F)]
    if not check_isomorphism_of_categories(F):
        problems.append("comparison functor is not bijective")
    return not problems, problems
