import numpy as np
import pytest

from src.rough_forms.compensator import (
    CompensatorOptions,
    cancellation_check,
    compensated_residual,
    compensator_bound_check,
    compensator_germ,
    compensator_uniqueness_probe,
    midpoint_germ,
    side_compensator,
    side_compensator_batch,
)
from src.rough_forms.errors import DegreeError, ParameterError
from src.rough_forms.germ import Germ, coboundary, coordinate_form, signed_area, zero
from src.rough_forms.sew import SewStatus
from src.rough_forms.simplex import Simplex

EXTRAPOLATED = CompensatorOptions(extrapolate=True)


def signed_power():
    """psi(pq) = (q - p)_1 |q - p|^(1/2): antisymmetric and 3/2-homogeneous."""

    def batch(v):
        d = v[:, 1] - v[:, 0]
        return d[:, 0] * np.sqrt(np.linalg.norm(d, axis=-1))

    return Germ(1, batch, label="psi")


def symmetric_power():
    return Germ(1, lambda v: np.linalg.norm(v[:, 1] - v[:, 0], axis=-1) ** 1.5, label="|q-p|^1.5")


def test_compensator_of_a_coboundary_recovers_the_primitive(unit_segment):
    report = side_compensator(coboundary(symmetric_power()), unit_segment, EXTRAPOLATED)
    assert report.status is SewStatus.CONVERGED
    assert report.value == pytest.approx(1.0, abs=1e-9)


def test_plain_recursion_approaches_the_primitive(unit_segment):
    report = side_compensator(coboundary(symmetric_power()), unit_segment, CompensatorOptions(max_depth=20))
    # the error after n steps is (2^(-1/2) - 2) 2^(-n/2)
    assert report.value == pytest.approx(1.0, abs=2e-3)
    assert report.partial_sums[0] == pytest.approx(2.0 * 2.0 ** -1.5 - 1.0)


def test_batch_compensator_scales_with_the_segment():
    segs = np.array([[[0.0], [1.0]], [[0.0], [4.0]], [[2.0], [2.0]]])
    result = side_compensator_batch(coboundary(symmetric_power()), segs, EXTRAPOLATED)
    np.testing.assert_allclose(result.values, [1.0, 8.0, 0.0], atol=1e-8)


def test_compensator_rejects_wrong_degrees(unit_triangle):
    with pytest.raises(DegreeError):
        midpoint_germ(coordinate_form())
    with pytest.raises(DegreeError):
        side_compensator(signed_area(), unit_triangle)


def test_cancellation_on_a_small_closed_alternating_germ(small_sampler):
    report = cancellation_check(coboundary(signed_power()), EXTRAPOLATED, sampler=small_sampler, dim=2)
    assert report.ok
    assert report.samples > 0


def test_cancellation_fails_for_the_area_form(unit_triangle):
    # the area form is not small against a strong 2-Dini gauge: L vanishes on every side
    report = cancellation_check(signed_area(), EXTRAPOLATED, samples=unit_triangle.vertices[None])
    assert not report.ok
    assert report.max_discrepancy == pytest.approx(0.5)
    assert report.witness == unit_triangle.vertices.tolist()


def test_cancellation_needs_input():
    with pytest.raises(ParameterError):
        cancellation_check(signed_area())


def test_compensated_residual_vanishes(unit_triangle):
    residual = compensated_residual(coboundary(signed_power()), EXTRAPOLATED)
    tri = Simplex([[0.1, 0.2], [0.9, 0.4], [0.3, 0.8]])
    assert residual(tri) == pytest.approx(0.0, abs=1e-8)
    assert residual(unit_triangle) == pytest.approx(0.0, abs=1e-8)


def test_compensator_germ_tracks_errors(unit_segment):
    L = compensator_germ(coboundary(symmetric_power()), EXTRAPOLATED)
    assert L(unit_segment) == pytest.approx(1.0, abs=1e-9)
    assert L.max_error < 1e-8
    assert L.max_depth >= 2
    assert L.omega_error_bound(1e-12) == pytest.approx(2.0 ** (L.max_depth + 1) * 1e-12)


def test_uniqueness_probe_on_the_zero_germ(small_sampler):
    report = compensator_uniqueness_probe(zero(1), small_sampler)
    assert report.hypotheses_hold
    assert report.conclusion


def test_uniqueness_probe_on_an_additive_germ_that_does_not_decay(small_sampler, caplog):
    report = compensator_uniqueness_probe(coordinate_form(0, 0), small_sampler)
    assert report.additive
    assert not report.decays
    assert not report.conclusion
    assert "does not decay" in caplog.text


def test_uniqueness_probe_on_a_non_additive_germ(small_sampler):
    report = compensator_uniqueness_probe(symmetric_power(), small_sampler)
    assert not report.additive
    assert report.additivity_defect > 0


def test_uniqueness_probe_needs_a_one_germ(small_sampler):
    with pytest.raises(DegreeError):
        compensator_uniqueness_probe(signed_area(), small_sampler)


def test_compensator_bound(small_sampler):
    check = compensator_bound_check(coboundary(signed_power()), 1.5, small_sampler, EXTRAPOLATED)
    assert check.measured == pytest.approx(1.0, rel=1e-8)
    assert check.ok
    with pytest.raises(ParameterError):
        compensator_bound_check(signed_area(), 1.0, small_sampler)


def test_options_from_config():
    opts = CompensatorOptions.from_config(None, extrapolate=True, max_depth=None)
    assert opts.extrapolate
    assert opts.max_depth == 24
    assert opts.sew_options().min_level == 2
    with pytest.raises(ParameterError):
        CompensatorOptions(max_depth=0)
