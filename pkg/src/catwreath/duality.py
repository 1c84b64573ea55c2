"""End-to-end checks of the duality ``Θ_n^op ≃ D_n`` and of its crossed analogue.

Each pipeline builds the explicit functors of the proof chain and checks
every link: links written ``≅`` must be isomorphisms of categories, links
written ``≃`` must be fully faithful and essentially surjective onto the
bounded target objects.
"""
from __future__ import annotations

from .disks import (
    disk_category,
    enumerate_disks,
    glue_functor,
    glue_disk,
    interval_disk,
    nabla_to_d1,
    within_rank_bounds,
)
from .fincat import FiniteCategory, FunctorData, opposite
from .report import EQUIV, ISO, DualityReport, Stage
from .report import run_stage as _run
from .sites import PointedMap, interval_duality_functor, site_name
from .wreath import (
    cosegal_omega,
    duality_iso,
    relabel_labels,
    rebase,
    theta,
    wreath,
)

__all__ = ["DualityReport", "Stage", "mirrored_omega", "verify_bj_duality", "verify_crossed_duality"]


def _disk_window(images, dim: int, size: int, rank_bounds) -> tuple[FiniteCategory, list]:
    """The bounded ``D_n``: images of the pipeline plus every small disk within the rank bounds."""
    targets = [X for X in enumerate_disks(dim, size, rank_bounds) if within_rank_bounds(X, rank_bounds)]
    objs = sorted(set(images) | set(targets), key=lambda X: (X.total, X.fiber_sizes()))
    return disk_category(objs, f"D_{dim}"), targets


def mirrored_omega(max_rank: int) -> FunctorData:
    """``ω`` conjugated by the reversal of interior points; a deliberately wrong coSegal functor."""
    omega = cosegal_omega(max_rank)
    T = omega.target

    def mor(x, y, f):
        p = T.payload_at(omega.obj(x), omega.obj(y), omega.map_index(x, y, f))
        n, m = p.source, p.target
        return PointedMap(n, m, (0,) + tuple(0 if p.values[n + 1 - i] == 0 else m + 1 - p.values[n + 1 - i]
                                             for i in range(1, n + 1)))

    return FunctorData.from_payloads(omega.source, T, omega.obj, mor, "ω̃")


def _bj_step(report, n, bounds, size, inner: FunctorData | None, inject_fault):
    """Append the stages for ``Θ_n^op -> D_n`` given ``inner: Θ_{n-1}^op -> D_{n-1}``."""
    b = bounds[0]
    rank_bounds = tuple(bounds)
    if n == 1:
        D = _run(report, "Θ_1^op = Δ^op ≅ ∇", ISO, lambda: interval_duality_functor(b))
        if D is None:
            return None
        images = [interval_disk(m) for m in D.target.objects]
        D1, targets = _disk_window(images, 1, size, rank_bounds)
        J = _run(report, "∇ ≃ D_1", EQUIV, lambda: nabla_to_d1(b + 1, D1), targets)
        return None if J is None else D.then(J)

    L = theta(n, tuple(bounds))
    tag = f"Θ_{n}"
    S1 = _run(report, f"{tag}^op = (Δ≀Θ_{n-1})^op ≅ Δ^op ⊗^M^op Θ_{n-1}^op", ISO, lambda: duality_iso(L))
    if S1 is None:
        return None
    S2 = _run(report, f"Δ^op ⊗^M^op Θ_{n-1}^op ≃ Δ^op ⊗^M^op D_{n-1}", EQUIV,
              lambda: relabel_labels(S1.target, inner))
    if S2 is None:
        return None
    omega = mirrored_omega(b + 1) if inject_fault == "cosegal" else cosegal_omega(b + 1)
    S3 = _run(report, f"Δ^op ⊗^M^op D_{n-1} ≅ ∇_ω ⊗^M^op D_{n-1}", ISO,
              lambda: rebase(S2.target, interval_duality_functor(b), omega))
    if S3 is None:
        return None
    C = S3.target
    images = [glue_disk(u[0], u[1], dim=n) for u in C.objects]
    Dn, targets = _disk_window(images, n, size, rank_bounds)
    S4 = _run(report, f"∇_ω ⊗^M^op D_{n-1} ≃ D_{n}", EQUIV, lambda: glue_functor(C, Dn), targets)
    if S4 is None:
        return None
    return S1.then(S2).then(S3).then(S4)


def verify_bj_duality(n: int, bounds=None, size: int = 8, inject_fault: str | None = None) -> DualityReport:
    """Check ``Θ_n^op ≃ D_n`` on the truncation with rank bounds ``bounds``.

    The composite is rechecked at the end against every disk of total size
    at most ``size`` whose fibers respect the bounds.
    """
    bounds = tuple(bounds) if bounds is not None else (2,) * n
    if len(bounds) != n or n < 1:
        raise ValueError(f"need {n} bounds, got {bounds}")
    if inject_fault not in (None, "cosegal"):
        raise ValueError(f"unknown fault {inject_fault!r}")
    report = DualityReport(f"Θ_{n}^op ≃ D_{n}", bounds)
    F = None
    for k in range(1, n + 1):
        F = _bj_step(report, k, bounds[n - k:], size, F, inject_fault)
        if F is None:
            return report
    targets = [X for X in enumerate_disks(n, size, bounds) if within_rank_bounds(X, bounds)]
    _run(report, f"Θ_{n}^op ≃ D_{n} (composite)", EQUIV, lambda: F, targets)
    report.functor = F
    return report


# ---------------------------------------------------------------------------
# crossed simplicial groups


def _segal(ambient, window: int) -> FunctorData:
    from .sieves import crossed_segal
    if isinstance(ambient, FunctorData):
        return ambient
    try:
        return crossed_segal(ambient, window)
    except (KeyError, ValueError) as e:
        raise ValueError(f"{ambient!r} carries no Segal functor") from e


def verify_crossed_duality(ambients, bounds) -> DualityReport:
    """``(ΔG_1 ⊗^M ⋯ ⊗^M ΔG_n)^op ≅ ΔG_1^op ⊗^{M^op} ⋯ ⊗^{M^op} ΔG_n^op``, one stage per layer.

    The left side carries an op: without it the single-factor case would
    claim ``ΔG ≅ ΔG^op``.
    """
    ambients, bounds = list(ambients), tuple(bounds)
    if not ambients or len(ambients) != len(bounds):
        raise ValueError("need one bound per ambient")
    segals = [_segal(a, b) for a, b in zip(ambients, bounds)]
    names = [s.source.name if isinstance(a, FunctorData) else site_name(a) for a, s in zip(ambients, segals)]
    report = DualityReport(" ⊗ ".join(names), bounds,
                           notes=["op applied to the left-hand side of the displayed isomorphism"])

    last = segals[-1].source
    F = _run(report, f"({names[-1]})^op ≅ {names[-1]}^op", ISO,
             lambda: FunctorData.from_payloads(opposite(last), opposite(last), lambda x: x, lambda x, y, p: p, "1"))
    if F is None:
        return report
    inner = last
    for k in range(len(segals) - 2, -1, -1):
        L = wreath(segals[k], inner)
        tag = " ⊗ ".join(names[k:])
        S1 = _run(report, f"({tag})^op ≅ {names[k]}^op ⊗^M^op ({' ⊗ '.join(names[k + 1:])})^op", ISO,
                  lambda: duality_iso(L))
        if S1 is None:
            return report
        prev = F
        S2 = _run(report, f"{names[k]}^op ⊗^M^op ({' ⊗ '.join(names[k + 1:])})^op ≅ "
                          f"{' ⊗^M^op '.join(n + '^op' for n in names[k:])}", ISO,
                  lambda: relabel_labels(S1.target, prev))
        if S2 is None:
            return report
        F = S1.then(S2)
        inner = L
    _run(report, "composite", ISO, lambda: F)
    report.functor = F
    return report
