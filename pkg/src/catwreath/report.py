"""Staged verification reports shared by the pipelines and the command line."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .fincat import (
    FunctorData,
    FunctorError,
    check_essentially_surjective,
    check_fully_faithful,
    check_functor,
    check_isomorphism_of_categories,
)

ISO, EQUIV = "≅", "≃"


@dataclass
class Stage:
    name: str
    relation: str
    checks: dict = field(default_factory=dict)
    witness: object = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    def to_json(self):
        return {"stage": self.name, "relation": self.relation, "checks": dict(sorted(self.checks.items())),
                "passed": self.passed, "witness": None if self.witness is None else repr(self.witness)}


@dataclass
class DualityReport:
    """Stages in pipeline order; the report passes iff every stage does.

    ``seconds`` records wall time per stage but is left out of
    :meth:`to_document`, which must be reproducible.
    """

    pipeline: str
    bounds: tuple
    stages: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    functor: FunctorData | None = None

    @property
    def passed(self) -> bool:
        return bool(self.stages) and all(s.passed for s in self.stages)

    @property
    def failed_stage(self) -> Stage | None:
        return next((s for s in self.stages if not s.passed), None)

    def to_document(self) -> dict:
        return {"pipeline": self.pipeline, "bounds": list(self.bounds), "passed": self.passed,
                "notes": list(self.notes), "stages": [s.to_json() for s in self.stages]}

    def summary(self) -> str:
        lines = [f"{self.pipeline} {self.bounds}: {'PASS' if self.passed else 'FAIL'}"]
        for s in self.stages:
            flag = "ok " if s.passed else "BAD"
            checks = ", ".join(f"{k}={'y' if v else 'n'}" for k, v in s.checks.items())
            lines.append(f"  [{flag}] {s.relation} {s.name}: {checks} ({s.seconds:.2f}s)")
            if not s.passed and s.witness is not None:
                lines.append(f"        witness: {s.witness!r}")
        return "\n".join(lines)


def run_stage(report: DualityReport, name: str, relation: str, build, targets=None):
    """Build a functor and check it; returns the functor or ``None`` on failure."""
    stage = Stage(name, relation)
    report.stages.append(stage)
    t0 = time.perf_counter()
    try:
        F = build()
    except FunctorError as e:
        stage.checks["functor"] = False
        stage.witness = e.witness if e.witness is not None else str(e)
        stage.seconds = time.perf_counter() - t0
        return None
    bad = check_functor(F, limit=1)
    stage.checks["functor"] = not bad
    if bad:
        stage.witness = bad[0]
    if relation == ISO:
        stage.checks["isomorphism"] = check_isomorphism_of_categories(F)
    else:
        ff, where = check_fully_faithful(F)
        es, unhit = check_essentially_surjective(F, targets)
        stage.checks["fully_faithful"] = ff
        stage.checks["essentially_surjective"] = es
        if stage.witness is None:
            stage.witness = where if not ff else (unhit[:3] if not es else None)
    stage.seconds = time.perf_counter() - t0
    return F


def check_stage(report: DualityReport, name: str, test) -> Stage:
    """A stage that is a plain predicate: ``test()`` returns ``(ok, witness)``."""
    stage = Stage(name, "=")
    report.stages.append(stage)
    t0 = time.perf_counter()
    ok, witness = test()
    stage.checks["holds"] = bool(ok)
    stage.witness = None if ok else witness
    stage.seconds = time.perf_counter() - t0
    return stage
