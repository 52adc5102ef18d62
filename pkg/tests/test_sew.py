import json
import logging

import numpy as np
import pytest

from src.rough_forms.errors import InsufficientDataError, ParameterError
from src.rough_forms.funcs import coordinate, polynomial
from src.rough_forms.germ import Germ, abs_increment, coboundary, coordinate_form, cup, signed_area
from src.rough_forms.sew import (
    SewnGerm,
    SewOptions,
    SewStatus,
    certify_sewn,
    extrapolate_sequence,
    idempotence_check,
    level_sums,
    linearity_check,
    locality_probe,
    sew_batch,
    sew_error_bound,
    sew_eval,
    sew_rate,
    sewn,
)
from src.rough_forms.simplex import Simplex, diam_batch


def power_increment(gamma):
    """|q - p|^gamma on segments."""
    return Germ(1, lambda v: np.linalg.norm(v[:, 1] - v[:, 0], axis=-1) ** gamma, label=f"|q-p|^{gamma}")


def x_dx():
    x = coordinate(0).as_germ()
    return cup(x, coboundary(x))


def test_regular_germ_is_returned_unchanged():
    s = Simplex([[0.2, 0.1], [0.9, 0.7]])
    report = sew_eval(coordinate_form(0, 1), s)
    assert report.status is SewStatus.CONVERGED
    assert report.levels_used == 2
    assert report.value == pytest.approx(coordinate_form(0, 1)(s), abs=1e-12)


def test_left_point_sums_converge_with_romberg(unit_segment, romberg):
    report = sew_eval(x_dx(), unit_segment, romberg)
    assert report.status is SewStatus.CONVERGED
    assert report.value == pytest.approx(0.5, abs=1e-12)


def test_error_estimate_covers_the_true_error(unit_segment):
    report = sew_eval(x_dx(), unit_segment)
    assert report.status is SewStatus.MAX_LEVEL
    assert report.levels_used == 14
    assert report.observed_rate == pytest.approx(0.5, rel=1e-6)
    assert abs(report.value - 0.5) <= report.error_estimate


def test_partial_sums_match_the_closed_form(unit_segment):
    report = sew_eval(x_dx(), unit_segment, SewOptions(max_level=6))
    expected = [0.5 - 0.5 * 2.0 ** -n for n in range(7)]
    np.testing.assert_allclose(report.partial_sums, expected, atol=1e-15)


def test_growing_increments_are_diverged(unit_segment):
    report = sew_eval(power_increment(0.5), unit_segment)
    assert report.status is SewStatus.DIVERGED
    assert report.levels_used == 5


def test_min_level_defers_verdicts(unit_segment):
    report = sew_eval(coordinate_form(0, 0), unit_segment, SewOptions(min_level=5))
    assert report.status is SewStatus.CONVERGED
    assert report.levels_used == 5


def test_observed_extrapolation_removes_a_geometric_tail(unit_segment):
    report = sew_eval(power_increment(1.5), unit_segment, SewOptions(extrapolate=True))
    assert report.status is SewStatus.CONVERGED
    assert report.value == pytest.approx(0.0, abs=1e-9)
    plain = sew_eval(power_increment(1.5), unit_segment, SewOptions(max_level=6))
    assert plain.status is SewStatus.MAX_LEVEL


@pytest.mark.parametrize("gamma", [1.26, 1.5, 2.0])
def test_sew_rate_on_segments(gamma, unit_segment):
    rate = sew_rate(power_increment(gamma), unit_segment, SewOptions(max_level=10))
    assert rate == pytest.approx(2.0 ** (1.0 - gamma), rel=1e-6)


@pytest.mark.parametrize("gamma", [2.26, 2.5])
def test_sew_rate_on_triangles(gamma, unit_triangle):
    # the four midpoint children all have half the parent's diameter
    g = Germ(2, lambda v: diam_batch(v) ** gamma, label=f"diam^{gamma}")
    rate = sew_rate(g, unit_triangle, SewOptions(max_level=6))
    assert rate == pytest.approx(2.0 ** (2.0 - gamma), rel=1e-6)


def test_sew_rate_needs_nonzero_increments(unit_segment):
    with pytest.raises(InsufficientDataError):
        sew_rate(coordinate_form(0, 0), unit_segment)


def test_triangles_sew_with_either_variant(unit_triangle):
    g = cup(coordinate(0).as_germ(), signed_area())
    for variant in ("dya", "dya_dagger"):
        opts = SewOptions(variant=variant, extrapolate=True, extrapolation="romberg")
        assert sew_eval(g, unit_triangle, opts).value == pytest.approx(1.0 / 6.0, abs=1e-10)


def _chunk_test_germ():
    f = polynomial([0.0, 1.0, 3.0]).as_germ()
    return cup(f, coboundary(coordinate_form(0, 1)))


@pytest.mark.parametrize("chunk_size, threads", [(7, 1), (7, 3), (64, 2), (1 << 20, 4)])
def test_level_sums_do_not_depend_on_chunking(chunk_size, threads):
    tris = np.array([
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        [[0.3, 0.1], [0.8, 0.9], [-0.2, 0.5]],
        [[1.0, 1.0], [2.0, 1.5], [1.5, 3.0]],
    ])
    g = _chunk_test_germ()
    reference = level_sums(g, tris, 4, SewOptions())
    other = level_sums(g, tris, 4, SewOptions(chunk_size=chunk_size, threads=threads))
    np.testing.assert_array_equal(reference, other)


def test_compensated_summation_agrees(unit_triangle):
    g = _chunk_test_germ()
    plain = level_sums(g, unit_triangle.vertices[None], 5, SewOptions())
    fsum = level_sums(g, unit_triangle.vertices[None], 5, SewOptions(compensated=True))
    np.testing.assert_allclose(plain, fsum, atol=1e-13)


def test_batch_sewing_reports_per_simplex(romberg):
    segs = np.array([[[0.0], [1.0]], [[0.0], [2.0]], [[1.0], [0.0]]])
    result = sew_batch(x_dx(), segs, romberg)
    np.testing.assert_allclose(result.values, [0.5, 2.0, -0.5], atol=1e-12)
    assert all(s is SewStatus.CONVERGED for s in result.statuses)
    assert result.report(1).value == pytest.approx(2.0)


def test_report_serialization(unit_segment):
    report = sew_eval(x_dx(), unit_segment, SewOptions(max_level=4))
    data = json.loads(report.to_json())
    assert data["status"] == "MaxLevel"
    assert [row["n"] for row in data["levels"]] == [0, 1, 2, 3, 4]
    assert data["levels"][0]["increment"] is None
    rows = report.table_rows()
    assert rows[3][1] == 8
    assert rows[3][4] == pytest.approx(0.5)


def test_romberg_is_exact_on_a_linear_error_term():
    sums = np.array([1.0 + 2.0 ** -n for n in range(5)])
    ext = extrapolate_sequence(sums, SewOptions(extrapolation="romberg", romberg_columns=1))
    np.testing.assert_allclose(ext[1:], 1.0, atol=1e-15)


def test_options_validation():
    with pytest.raises(ParameterError):
        SewOptions(variant="triadic")
    with pytest.raises(ParameterError):
        SewOptions(extrapolation="aitken")
    with pytest.raises(ParameterError):
        SewOptions(abs_tol=0.0)


def test_level_cap_respects_the_budget(caplog):
    with caplog.at_level(logging.WARNING, logger="src.rough_forms.sew"):
        assert SewOptions(max_level=20).level_cap(2) == 15
    assert "budget" in caplog.text
    assert SewOptions().level_cap(1) == 14
    assert SewOptions().level_cap(2) == 10


def test_options_from_config_ignores_unset_overrides():
    opts = SewOptions.from_config(None, max_level=5, variant=None)
    assert opts.max_level == 5
    assert opts.variant == "dya"


def test_sewn_germ_is_a_germ(unit_segment, romberg):
    g = sewn(x_dx(), romberg)
    values = g.evaluate(np.array([[[0.0], [1.0]], [[0.0], [1.0]]]))
    np.testing.assert_allclose(values, 0.5, atol=1e-12)
    assert g.cache.stats()["evals"] == 1
    assert g.evaluations == 1
    assert isinstance(g, SewnGerm)


def test_certification_passes_for_a_sewable_germ(romberg):
    report = certify_sewn(x_dx(), opts=romberg)
    assert report.passed
    assert set(report.checks) == {"antisymmetry", "cut", "degenerate"}


def test_certification_of_triangles_includes_flips():
    g = cup(coordinate(0).as_germ(), signed_area())
    opts = SewOptions(extrapolate=True, extrapolation="romberg")
    report = certify_sewn(g, opts=opts, dim=2, config=None)
    assert "flip" in report.checks
    assert report.checks["antisymmetry"].passed


def test_certification_fails_for_the_absolute_increment(caplog):
    with caplog.at_level(logging.WARNING):
        report = certify_sewn(abs_increment())
    assert not report.passed
    assert not report.checks["antisymmetry"].passed
    assert report.checks["antisymmetry"].witness
    assert "certification" in caplog.text


def test_sewing_only_reads_inside_the_simplex(unit_triangle):
    g = cup(coordinate(0).as_germ(), signed_area())
    report = locality_probe(g, unit_triangle, SewOptions(max_level=4))
    assert report.inside
    assert report.evaluations > 0


def test_sewing_is_linear(unit_segment, romberg):
    g2 = cup(coordinate(0).as_germ(), coboundary(polynomial([0.0, 0.0, 1.0]).as_germ()))
    assert linearity_check(x_dx(), g2, 2.0, -3.0, unit_segment, romberg).ok


def test_sewing_is_idempotent(unit_segment, romberg):
    assert idempotence_check(x_dx(), unit_segment, romberg).ok


def test_a_priori_error_bound(unit_segment, romberg, small_sampler):
    check = sew_error_bound(x_dx(), unit_segment, 2.0, small_sampler, romberg)
    assert check.measured == pytest.approx(0.5, abs=1e-10)
    assert check.ok
    with pytest.raises(ParameterError):
        sew_error_bound(x_dx(), unit_segment, 1.0, small_sampler)
