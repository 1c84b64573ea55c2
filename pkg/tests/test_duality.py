import pytest

from catwreath.disks import enumerate_disks, within_rank_bounds
from catwreath.duality import mirrored_omega, verify_bj_duality, verify_crossed_duality
from catwreath.fincat import check_functor, dumps
from catwreath.report import EQUIV, ISO, DualityReport, check_stage, run_stage
from catwreath.wreath import cosegal_omega


def test_bj_n1():
    report = verify_bj_duality(1, (2,))
    assert report.passed, report.summary()
    assert [s.relation for s in report.stages] == [ISO, EQUIV, EQUIV]


def test_bj_n2():
    report = verify_bj_duality(2, (2, 2), size=8)
    assert report.passed, report.summary()
    F = report.functor
    hit = {F.obj(u) for u in F.source.objects}
    assert {X for X in enumerate_disks(2, 8, (2, 2)) if within_rank_bounds(X, (2, 2))} <= hit


def test_bj_n3_small():
    report = verify_bj_duality(3, (1, 1, 1), size=10)
    assert report.passed, report.summary()


def test_mirrored_omega_is_still_a_functor():
    # the fault is a valid coSegal-shaped functor that is not the right one
    bad, good = mirrored_omega(3), cosegal_omega(3)
    assert check_functor(bad) == []
    assert any(bad.map_index(x, y, f) != good.map_index(x, y, f)
               for x in good.source.objects for y in good.source.objects
               for f in good.source.hom(x, y))


def test_fault_is_invisible_with_one_interior_point():
    assert verify_bj_duality(2, (1, 1), inject_fault="cosegal").passed


def test_injected_fault_fails_at_the_rebasing_stage():
    report = verify_bj_duality(2, (2, 1), inject_fault="cosegal")
    assert not report.passed
    assert report.failed_stage.name == "Δ^op ⊗^M^op D_1 ≅ ∇_ω ⊗^M^op D_1"
    assert report.failed_stage.witness is not None
    assert "FAIL" in report.summary()


def test_bad_arguments():
    with pytest.raises(ValueError):
        verify_bj_duality(2, (1,))
    with pytest.raises(ValueError):
        verify_bj_duality(1, (1,), inject_fault="other")
    with pytest.raises(ValueError):
        verify_crossed_duality(["Λ"], (1, 1))
    with pytest.raises(ValueError):
        verify_crossed_duality(["∇"], (1,))


def test_report_document_is_reproducible():
    a = verify_bj_duality(1, (2,)).to_document()
    b = verify_bj_duality(1, (2,)).to_document()
    assert dumps(a) == dumps(b)
    assert "seconds" not in dumps(a)


@pytest.mark.parametrize("ambients", [["Λ"], ["Λ", "Δ"], ["ΔZ/2", "ΔZ/2"], ["Δ", "Λ"]])
def test_crossed_duality(ambients):
    report = verify_crossed_duality(ambients, (1,) * len(ambients))
    assert report.passed, report.summary()
    assert report.notes == ["op applied to the left-hand side of the displayed isomorphism"]
    assert all(s.relation == ISO for s in report.stages)


def test_stage_helpers():
    report = DualityReport("demo", ())
    assert not report.passed
    check_stage(report, "true", lambda: (True, None))
    assert report.passed
    check_stage(report, "false", lambda: (False, "why"))
    assert report.failed_stage.name == "false"
    assert report.failed_stage.witness == "why"

    def boom():
        from catwreath.fincat import FunctorError
        raise FunctorError("no functor", witness=("x", "y"))

    report = DualityReport("demo", ())
    assert run_stage(report, "broken", ISO, boom) is None
    assert report.failed_stage.checks == {"functor": False}
