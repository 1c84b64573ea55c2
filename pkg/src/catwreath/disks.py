"""Joyal's finite combinatorial n-disks.

A disk has levels ``X_0 = {*}, X_1, ..., X_n``, projections
``p_k: X_k -> X_{k-1}`` and sections ``s_k, t_k: X_k -> X_{k+1}``; each fiber
of ``p_{k+1}`` is linearly ordered from ``s_k(x)`` to ``t_k(x)``.

Points are numbered per level.  A disk is *canonical* when every fiber is a
contiguous increasing run and fibers appear in the order of their base
points; a canonical disk is determined by its fiber sizes, and two disks are
isomorphic iff their canonical forms are equal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .fincat import ConcreteCategory, FiniteCategory, FunctorData, Violation
from .sites import IntervalMorphism, nabla_hom
from .wreath import WreathMorphism, relation_pairs


@dataclass(frozen=True, eq=True)
class Disk:
    dim: int
    sizes: tuple
    s: tuple  # s[k]: X_k -> X_{k+1}, k < dim
    t: tuple
    p: tuple  # p[k]: X_k -> X_{k-1}; p[0] is empty
    fiber_orders: tuple  # fiber_orders[k][x]: ordered fiber of p_{k+1} over x in X_k

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.dim, self.sizes, self.s, self.t, self.p, self.fiber_orders))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def total(self) -> int:
        return sum(self.sizes)

    def fiber(self, k: int, x: int) -> tuple:
        return self.fiber_orders[k][x]

    def fiber_sizes(self) -> tuple:
        return tuple(tuple(len(f) for f in level) for level in self.fiber_orders)

    def to_json(self):
        return {"dim": self.dim, "levels": [list(range(n)) for n in self.sizes],
                "s": [list(m) for m in self.s], "t": [list(m) for m in self.t],
                "p": [list(m) for m in self.p],
                "fiberOrders": {str(k): [list(f) for f in level] for k, level in enumerate(self.fiber_orders)}}

    def __repr__(self):
        return f"Disk{self.fiber_sizes()}"


@dataclass(frozen=True)
class DiskMorphism:
    """Level maps ``f_0, ..., f_n``."""

    maps: tuple

    def to_json(self):
        return [list(m) for m in self.maps]


class DiskError(ValueError):
    pass


# ---------------------------------------------------------------------------
# construction and canonical form


@lru_cache(maxsize=None)
def disk_from_fiber_sizes(fsizes: tuple) -> Disk:
    """Canonical disk whose level-``k`` points have fibers of the given sizes.

    ``fsizes[k]`` lists, for each point of ``X_k`` in order, the size of its
    fiber in ``X_{k+1}``.
    """
    fsizes = tuple(tuple(level) for level in fsizes)
    dim = len(fsizes)
    sizes = [1]
    s, t, p, orders = [], [], [()], []
    for k, level in enumerate(fsizes):
        if len(level) != sizes[k]:
            raise DiskError(f"level {k} has {sizes[k]} points but {len(level)} fiber sizes")
        parent, sk, tk, fibers, start = [], [], [], [], 0
        for x, m in enumerate(level):
            if m < 1:
                raise DiskError("fibers are nonempty")
            fibers.append(tuple(range(start, start + m)))
            sk.append(start)
            tk.append(start + m - 1)
            parent.extend([x] * m)
            start += m
        sizes.append(start)
        s.append(tuple(sk))
        t.append(tuple(tk))
        p.append(tuple(parent))
        orders.append(tuple(fibers))
    return Disk(dim, tuple(sizes), tuple(s), tuple(t), tuple(p), tuple(orders))


def _bfs_orders(X: Disk, level: int, roots) -> list[list[int]]:
    """Points below ``roots`` (at ``level``), level by level in fiber order."""
    orders = [list(roots)]
    for k in range(level, X.dim):
        orders.append([y for x in orders[-1] for y in X.fiber_orders[k][x]])
    return orders


def canonical_numbering(X: Disk) -> list[dict]:
    """``numbering[k][x]`` is the canonical index of point ``x`` of ``X_k``."""
    return [{x: i for i, x in enumerate(order)} for order in _bfs_orders(X, 0, [0])]


def canonicalize(X: Disk) -> Disk:
    orders = _bfs_orders(X, 0, [0])
    return disk_from_fiber_sizes(tuple(tuple(len(X.fiber_orders[k][x]) for x in orders[k])
                                       for k in range(X.dim)))


def disks_isomorphic(X: Disk, Y: Disk) -> bool:
    return X.dim == Y.dim and canonicalize(X) == canonicalize(Y)


def minimal_disk(n: int) -> Disk:
    """The minimal n-disk: two points in ``X_1``, singleton fibers above."""
    return disk_from_fiber_sizes(((2,),) + tuple((1, 1) for _ in range(1, n)))


# ---------------------------------------------------------------------------
# validation


def validate_disk(X: Disk, limit: int = 20, informational: bool = False) -> list[Violation]:
    """Every violated axiom; empty iff ``X`` is an n-disk.

    Condition (2) is imposed for ``1 <= k < n``.  At ``k = n`` the maps
    ``s_n, t_n`` do not exist; with ``informational=True`` a note saying so is
    appended under the law name ``info``.
    """
    out: list[Violation] = []

    def add(law, detail):
        if sum(1 for v in out if v.law == law) < limit:
            out.append(Violation(law, detail))

    n, sz = X.dim, X.sizes
    if len(sz) != n + 1 or len(X.s) != n or len(X.t) != n or len(X.p) != n + 1 or len(X.fiber_orders) != n:
        add("shape", "level tables do not match the dimension")
        return out
    for k in range(n):
        for name, m in (("s", X.s[k]), ("t", X.t[k])):
            if len(m) != sz[k] or any(not 0 <= v < sz[k + 1] for v in m):
                add("shape", f"{name}_{k} is not a map X_{k} -> X_{k + 1}")
        if len(X.p[k + 1]) != sz[k + 1] or any(not 0 <= v < sz[k] for v in X.p[k + 1]):
            add("shape", f"p_{k + 1} is not a map X_{k + 1} -> X_{k}")
    if any(v.law == "shape" for v in out):
        return out
    # globular relations
    for k in range(1, n + 1):
        pk, s_, t_ = X.p[k], X.s[k - 1], X.t[k - 1]
        for x in range(sz[k - 1]):
            if pk[s_[x]] != x or pk[t_[x]] != x:
                add("globular", f"p_{k} s_{k - 1} or p_{k} t_{k - 1} is not the identity at {x}")
        if k < n:
            for x in range(sz[k - 1]):
                if X.s[k][s_[x]] != X.t[k][s_[x]]:
                    add("globular", f"s_{k} s_{k - 1} != t_{k} s_{k - 1} at {x}")
                if X.s[k][t_[x]] != X.t[k][t_[x]]:
                    add("globular", f"s_{k} t_{k - 1} != t_{k} t_{k - 1} at {x}")
    # condition (1)
    if sz[0] != 1:
        add("condition 1", f"X_0 has {sz[0]} points")
    elif n >= 1 and X.s[0][0] == X.t[0][0]:
        add("condition 1", "s_0(*) = t_0(*)")
    # condition (2)
    for k in range(1, n):
        eq = {x for x in range(sz[k]) if X.s[k][x] == X.t[k][x]}
        boundary = set(X.s[k - 1]) | set(X.t[k - 1])
        if eq != boundary:
            add("condition 2", f"Eq(s_{k}, t_{k}) = {sorted(eq)} but the boundary is {sorted(boundary)}")
    if informational and n >= 1:
        out.append(Violation("info", f"condition 2 at k = {n} is not applicable: s_{n}, t_{n} are undefined"))
    # condition (3)
    for k in range(n):
        for x in range(sz[k]):
            order = X.fiber_orders[k][x]
            fiber = [y for y in range(sz[k + 1]) if X.p[k + 1][y] == x]
            if sorted(order) != fiber or len(set(order)) != len(order):
                add("condition 3", f"fiber order over {x} in X_{k} is not a linear order of its fiber")
            elif order[0] != X.s[k][x] or order[-1] != X.t[k][x]:
                add("condition 3", f"fiber over {x} in X_{k} does not run from s_{k}({x}) to t_{k}({x})")
    return out


def validate_disk_morphism(f: DiskMorphism, X: Disk, Y: Disk) -> list[Violation]:
    out = []
    if X.dim != Y.dim or len(f.maps) != X.dim + 1:
        return [Violation("shape", "dimension mismatch")]
    for k, m in enumerate(f.maps):
        if len(m) != X.sizes[k] or any(not 0 <= v < Y.sizes[k] for v in m):
            return [Violation("shape", f"f_{k} is not a map X_{k} -> Y_{k}")]
    for k in range(1, X.dim + 1):
        if any(f.maps[k - 1][X.p[k][x]] != Y.p[k][f.maps[k][x]] for x in range(X.sizes[k])):
            out.append(Violation("commute", f"f does not commute with p_{k}"))
    for k in range(X.dim):
        if any(f.maps[k + 1][X.s[k][x]] != Y.s[k][f.maps[k][x]] for x in range(X.sizes[k])):
            out.append(Violation("commute", f"f does not commute with s_{k}"))
        if any(f.maps[k + 1][X.t[k][x]] != Y.t[k][f.maps[k][x]] for x in range(X.sizes[k])):
            out.append(Violation("commute", f"f does not commute with t_{k}"))
        for x in range(X.sizes[k]):
            pos = {y: i for i, y in enumerate(Y.fiber_orders[k][f.maps[k][x]])}
            img = [pos.get(f.maps[k + 1][y], -1) for y in X.fiber_orders[k][x]]
            if any(a > b for a, b in zip(img, img[1:])):
                out.append(Violation("order", f"f_{k + 1} is not monotone on the fiber over {x} in X_{k}"))
    return out


# ---------------------------------------------------------------------------
# morphisms


def disk_identity(X: Disk) -> DiskMorphism:
    return DiskMorphism(tuple(tuple(range(n)) for n in X.sizes))


def disk_compose(g: DiskMorphism, f: DiskMorphism) -> DiskMorphism:
    return DiskMorphism(tuple(tuple(gm[v] for v in fm) for gm, fm in zip(g.maps, f.maps)))


def _fiber_choices(src: tuple, dst: tuple):
    """Monotone maps of a source fiber into a target fiber, min to min and max to max."""
    if len(src) == 1:
        if len(dst) == 1:
            yield (dst[0],)
        return
    for mid in itertools.combinations_with_replacement(range(len(dst)), len(src) - 2):
        yield (dst[0],) + tuple(dst[i] for i in mid) + (dst[-1],)


def disk_hom(X: Disk, Y: Disk) -> list[DiskMorphism]:
    """All disk morphisms ``X -> Y``, built fiber by fiber."""
    if X.dim != Y.dim:
        raise DiskError("disks of different dimensions")
    out = []

    def extend(k, maps):
        if k == X.dim:
            out.append(DiskMorphism(tuple(tuple(m) for m in maps)))
            return
        fk = maps[k]
        per_fiber = []
        for x in range(X.sizes[k]):
            options = list(_fiber_choices(X.fiber_orders[k][x], Y.fiber_orders[k][fk[x]]))
            if not options:
                return
            per_fiber.append((X.fiber_orders[k][x], options))
        for combo in itertools.product(*(opts for _, opts in per_fiber)):
            nxt = [0] * X.sizes[k + 1]
            for (src, _), img in zip(per_fiber, combo):
                for a, b in zip(src, img):
                    nxt[a] = b
            extend(k + 1, maps + [nxt])

    extend(0, [[0]])
    return out


def _vector(X, Y, f: DiskMorphism):
    out, off = [], 0
    for k, m in enumerate(f.maps):
        out.extend(v + off for v in m)
        off += Y.sizes[k]
    return tuple(out)


def disk_category(disks, name="D") -> FiniteCategory:
    """Full subcategory of disks on the given (canonical) objects."""
    disks = list(dict.fromkeys(disks))
    dims = {X.dim for X in disks}
    header = {"disks": True, "dim": dims.pop() if len(dims) == 1 else None}
    return ConcreteCategory(disks, disk_hom, disk_identity, disk_compose, name, header, vector=_vector)


# ---------------------------------------------------------------------------
# enumeration


def _fiber_size_range(k: int, remaining: int, rank_bounds):
    hi = remaining
    if rank_bounds is not None and k < len(rank_bounds):
        hi = min(hi, rank_bounds[k] + 2)
    return range(2, hi + 1)


def enumerate_disks(n: int, size_bound: int, rank_bounds=None) -> list[Disk]:
    """All n-disks with total size at most ``size_bound``, one per isomorphism class.

    ``rank_bounds[k]`` (optional) caps the sizes of non-singleton fibers over
    ``X_k`` at ``rank_bounds[k] + 2``; a 1-disk with ``m`` points in ``X_1``
    corresponds to ``Δ``-rank ``m - 2``.
    """
    if n < 1:
        raise ValueError("n >= 1")
    found = []

    def level(k, fsizes, boundary, total):
        # fsizes: fiber sizes for levels < k; boundary: flags for points of X_k
        if k == n:
            found.append(disk_from_fiber_sizes(tuple(fsizes)))
            return
        interior = [i for i, b in enumerate(boundary) if not b]
        singles = len(boundary) - len(interior)
        base_total = total + singles
        if base_total > size_bound:
            return

        def assign(idx, sizes, used):
            if idx == len(interior):
                row, it = [], iter(sizes)
                for b in boundary:
                    row.append(1 if b else next(it))
                nxt_boundary = []
                for m in row:
                    nxt_boundary.extend([True] + [False] * (m - 2) + [True] if m > 1 else [True])
                level(k + 1, fsizes + [tuple(row)], nxt_boundary, base_total + used)
                return
            for m in _fiber_size_range(k, size_bound - base_total - used, rank_bounds):
                assign(idx + 1, sizes + [m], used + m)

        assign(0, [], 0)

    level(0, [], [False], 1)
    return sorted(found, key=lambda X: (X.total, X.fiber_sizes()))


def within_rank_bounds(X: Disk, rank_bounds) -> bool:
    return all(m <= rank_bounds[k] + 2 for k in range(min(X.dim, len(rank_bounds)))
               for m in X.fiber_sizes()[k] if m > 1)


# ---------------------------------------------------------------------------
# D_1 and ∇


def d1_to_nabla(X: Disk) -> int:
    """The ∇-object of a 1-disk: ``[#X_1 - 1]``."""
    if X.dim != 1:
        raise DiskError("d1_to_nabla needs a 1-disk")
    return X.sizes[1] - 1


def interval_disk(m: int) -> Disk:
    """The 1-disk of the interval ``[m]`` (``m + 1`` points)."""
    return disk_from_fiber_sizes(((m + 1,),))


def nabla_to_d1(max_rank: int, D: FiniteCategory) -> FunctorData:
    """``∇≤r -> D_1``: ``[m]`` goes to the ``(m+1)``-point interval disk."""
    from .sites import materialize
    return FunctorData.from_payloads(materialize("∇", max_rank), D, interval_disk,
                                     lambda x, y, f: DiskMorphism(((0,), f.values)), "J")


def d1_to_nabla_functor(D: FiniteCategory, max_rank: int) -> FunctorData:
    from .sites import materialize
    N = materialize("∇", max_rank)

    def mor(X, Y, f):
        X, Y = canonicalize(X), canonicalize(Y)
        return IntervalMorphism(d1_to_nabla(X), d1_to_nabla(Y), f.maps[1])

    return FunctorData.from_payloads(D, N, d1_to_nabla, mor, "f")


# ---------------------------------------------------------------------------
# τ, Φ, β and gluing


def _extremes(X: Disk):
    return X.s[0][0], X.t[0][0]


def tau(X: Disk, i: int) -> Disk:
    """The n-disk of points above a non-extreme ``i`` in ``X_1``."""
    if X.dim < 1 or not 0 <= i < X.sizes[1]:
        raise DiskError(f"{i} is not a point of X_1")
    if i in _extremes(X):
        raise DiskError(f"{i} is an extreme point of X_1")
    orders = _bfs_orders(X, 1, [i])
    return disk_from_fiber_sizes(tuple(tuple(len(X.fiber_orders[k + 1][x]) for x in orders[k])
                                       for k in range(X.dim - 1)))


def interior_points(X: Disk) -> list[int]:
    """Non-extreme points of ``X_1`` in fiber order."""
    order = X.fiber_orders[0][0]
    return list(order[1:-1])


def phi(X: Disk) -> tuple:
    """``Φ(X) = (ℓ, (τ^i X)_i)``, an object of ``∇_ω ⊗^{M^op} D_n``."""
    return (X.sizes[1] - 1, tuple(tau(X, i) for i in interior_points(X)))


@lru_cache(maxsize=None)
def _subtrees(X: Disk):
    """For canonical ``X``: per point of ``X_1``, its BFS orders and reverse index."""
    out = []
    for r in range(X.sizes[1]):
        orders = _bfs_orders(X, 1, [r])
        out.append((orders, [{y: a for a, y in enumerate(level)} for level in orders]))
    return out


def _pointed_of(f1, ell_x, ell_y):
    from .sites import PointedMap
    return PointedMap(ell_x - 1, ell_y - 1, (0,) + tuple(v if 0 < v < ell_y else 0 for v in f1[1:ell_x]))


def phi_mor(f: DiskMorphism, X: Disk, Y: Disk) -> WreathMorphism:
    """``Φ(f) = (f_1, {τ^{ji} f})`` for canonical ``X`` and ``Y``."""
    lx, ly = X.sizes[1] - 1, Y.sizes[1] - 1
    f1 = f.maps[1]
    base = IntervalMorphism(lx, ly, tuple(f1))
    pairs = relation_pairs("pointed", _pointed_of(f1, lx, ly))
    sx, sy = _subtrees(X), _subtrees(Y)
    comps = []
    for i, j in pairs:
        (ox, _), (_, iy) = sx[i], sy[j]
        comps.append(DiskMorphism(tuple(tuple(iy[d][f.maps[d + 1][x]] for x in ox[d])
                                        for d in range(X.dim))))
    return WreathMorphism(base, pairs, tuple(comps))


def glue_disk(ell: int, labels, dim: int | None = None) -> Disk:
    """Canonical ``(n+1)``-disk with ``X_1 = [ell]`` and ``τ^i = labels[i-1]``."""
    labels = tuple(labels)
    if ell < 1 or len(labels) != ell - 1:
        raise DiskError(f"[{ell}] has {max(ell - 1, 0)} interior points but {len(labels)} labels were given")
    n = labels[0].dim if labels else (dim - 1 if dim is not None else 1)
    if any(L.dim != n for L in labels) or (dim is not None and dim != n + 1):
        raise DiskError("labels must all have dimension one less than the glued disk")
    rows = [(ell + 1,)]
    fs = [L.fiber_sizes() for L in labels]
    for k in range(1, n + 1):
        row = []
        for r in range(ell + 1):
            row.extend(fs[r - 1][k - 1] if 0 < r < ell else (1,))
        rows.append(tuple(row))
    return disk_from_fiber_sizes(tuple(rows))


def beta(g: WreathMorphism, X: Disk, Y: Disk) -> DiskMorphism:
    """Inverse of :func:`phi_mor` for canonical ``X`` and ``Y``."""
    f1 = g.base.values
    lx, ly = X.sizes[1] - 1, Y.sizes[1] - 1
    comp = {i: (j, c) for (i, j), c in zip(g.pairs, g.components)}
    sx, sy = _subtrees(X), _subtrees(Y)
    maps = [[0], list(f1)] + [[0] * X.sizes[k] for k in range(2, X.dim + 1)]
    for r in range(lx + 1):
        orders, _ = sx[r]
        target = f1[r]
        for d in range(1, X.dim):
            for a, x in enumerate(orders[d]):
                if r in comp:
                    j, c = comp[r]
                    maps[d + 1][x] = sy[j][0][d][c.maps[d][a]]
                else:
                    # above an extreme point, or collapsed onto one: a singleton chain
                    maps[d + 1][x] = sy[target][0][d][0]
    del ly
    return DiskMorphism(tuple(tuple(m) for m in maps))


def glue_functor(L, D: FiniteCategory) -> FunctorData:
    """``∇_ω ⊗^{M^op} D_n -> D_{n+1}``: glue on objects, ``β`` on morphisms."""
    return FunctorData.from_payloads(L, D, lambda u: glue_disk(u[0], u[1], dim=D.header.get("dim")),
                                     lambda u, v, g: beta(g, glue_disk(u[0], u[1], D.header.get("dim")),
                                                          glue_disk(v[0], v[1], D.header.get("dim"))), "β")


def phi_functor(D: FiniteCategory, L) -> FunctorData:
    """``Φ: D_{n+1} -> ∇_ω ⊗^{M^op} D_n`` on truncations."""
    return FunctorData.from_payloads(D, L, phi, lambda X, Y, f: phi_mor(f, X, Y), "Φ")


def nabla_hom_disks(X: Disk, Y: Disk) -> int:
    """Independent count for 1-disks: ``|Hom_∇([#X_1-1], [#Y_1-1])|``."""
    return len(nabla_hom(d1_to_nabla(X), d1_to_nabla(Y)))
