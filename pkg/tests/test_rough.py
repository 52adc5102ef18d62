import math

import numpy as np
import pytest

from src.rough_forms.errors import DegreeError, NonConvergentError, ParameterError
from src.rough_forms.funcs import Scalar0
from src.rough_forms.germ import Gauge, Germ, coboundary, cup, seminorm_estimate, signed_area, zero
from src.rough_forms.integrals import young, zust_oracle
from src.rough_forms.rough import (
    CorrectedGerm,
    alternative_corrector_1d,
    corrected_chain_sew,
    corrected_sew,
    corrector_remainder_check,
    pure_area_2d_exact,
    pure_area_2d_integral,
    pure_area_antiderivative,
    pure_area_eta_2d,
    pure_area_family_1d,
    pure_area_family_2d,
    pure_area_integrand,
    pure_area_young,
    pure_area_zust,
    resolving_options,
)
from src.rough_forms.sew import SewOptions
from src.rough_forms.simplex import Simplex


def exact_1d(n):
    return 0.5 + math.sin(2 * n) / (4 * n)


def base_1d(fam):
    return cup(fam.f.as_germ(), coboundary(fam.g.as_germ()))


def test_exact_corrector_sews_to_the_antiderivative(unit_segment):
    fam = pure_area_family_1d(7)
    result = corrected_sew(CorrectedGerm(base_1d(fam), fam.corrector), unit_segment)
    assert result.value == pytest.approx(exact_1d(7), abs=1e-12)
    assert result.provenance == "corrected"


def test_corrector_can_be_added_back(unit_segment):
    fam = pure_area_family_1d(7)
    result = corrected_sew(CorrectedGerm(base_1d(fam), fam.corrector, "with_corrector_added"), unit_segment)
    # the left-point value f(0) (g(1) - g(0))
    assert result.value == pytest.approx(math.sin(7) / 7, abs=1e-12)


def test_alternative_corrector_forgets_the_oscillation(unit_segment):
    for n in (3, 40):
        fam = pure_area_family_1d(n)
        result = corrected_sew(CorrectedGerm(base_1d(fam), alternative_corrector_1d(n)), unit_segment)
        assert result.value == pytest.approx(0.5, abs=1e-12)


def test_corrected_germ_validation():
    fam = pure_area_family_1d(2)
    with pytest.raises(DegreeError):
        CorrectedGerm(base_1d(fam), signed_area())
    with pytest.raises(ParameterError):
        CorrectedGerm(base_1d(fam), fam.corrector, mode="halfway")
    assert CorrectedGerm(base_1d(fam), fam.corrector).degree == 1


def test_corrected_sewing_reports_divergence(unit_segment):
    growing = Germ(1, lambda v: np.abs(v[:, 1, 0] - v[:, 0, 0]) ** 0.5, label="|q-p|^0.5")
    with pytest.raises(NonConvergentError) as info:
        corrected_sew(CorrectedGerm(growing, zero(1)), unit_segment)
    assert info.value.stage == "corrected"


def test_antiderivative_differentiates_to_the_density():
    n, h = 3, 1e-6
    anti = pure_area_antiderivative(n, (1.0,))
    for t in (0.1, 0.45, 0.9):
        slope = (anti([t + h]) - anti([t - h])) / (2 * h)
        assert slope == pytest.approx(math.cos(n * t) ** 2, abs=1e-6)


def test_one_dimensional_family_metadata():
    fam = pure_area_family_1d(25, (1.0,))
    assert fam.f.holder_alpha == 0.5
    assert fam.g.holder_const == pytest.approx(math.sqrt(2.0))
    assert fam.f([0.0]) == pytest.approx(0.2)
    with pytest.raises(ParameterError):
        pure_area_family_1d(0)


@pytest.mark.parametrize("n", [10, 100])
def test_young_integrals_of_the_family_approach_one_half(n, unit_segment):
    value = pure_area_young(n, unit_segment).value
    assert value == pytest.approx(exact_1d(n), abs=1e-3)
    assert abs(value - 0.5) <= 1.0 / n


def test_young_integral_of_a_fast_oscillation(unit_segment):
    value = pure_area_young(1000, unit_segment, opts=SewOptions(max_level=18)).value
    assert value == pytest.approx(exact_1d(1000), abs=1e-4)
    assert abs(value - 0.5) <= 1.0 / 1000


def test_resolving_options_defer_verdicts():
    assert resolving_options(None, 50).min_level == 7
    assert resolving_options(SewOptions(min_level=9), 50).min_level == 9
    assert resolving_options(None, 1).min_level == 1


def test_corrected_chain_rule(unit_segment):
    n = 50
    fam = pure_area_family_1d(n)
    opts = resolving_options(SewOptions(max_level=16), n)
    result = corrected_chain_sew(fam.f, fam.g, fam.corrector, lambda u: 2 * u + u * u, lambda u: 2 + 2 * u,
                                 unit_segment, opts)
    # phi(f) - phi'(f) f = -f^2, so the corrected sum is close to 2 (I(1) - I(0))
    assert abs(result.value - 1.0) <= 2.0 / n


def test_remainder_of_the_identity_vanishes(small_sampler):
    fam = pure_area_family_1d(10)
    est = corrector_remainder_check(fam.f, fam.g, fam.corrector, lambda u: u, np.ones_like, 1.5, small_sampler)
    assert est.value == 0.0


@pytest.mark.parametrize("n", [1, 10, 100])
def test_remainder_of_a_square_is_uniformly_small(n, small_sampler):
    fam = pure_area_family_1d(n)
    est = corrector_remainder_check(fam.f, fam.g, fam.corrector, np.square, lambda u: 2 * u, 1.5, small_sampler)
    assert est.value <= 12.0


@pytest.mark.parametrize("n", [4, 16])
def test_quadrature_matches_the_closed_form(n, unit_triangle):
    value = pure_area_2d_integral(n, unit_triangle.vertices[None])[0]
    assert value == pytest.approx(pure_area_2d_exact(n), abs=1e-9)


def test_quadrature_matches_the_adaptive_oracle():
    tri = Simplex.parse("0.1,0.2;0.8,0.3;0.3,0.9")
    density = Scalar0(pure_area_integrand(4))
    value = pure_area_2d_integral(4, tri.vertices[None])[0]
    assert value == pytest.approx(zust_oracle(density, tri), abs=1e-8)


def test_quadrature_is_oriented(unit_triangle):
    flipped = unit_triangle.vertices[[0, 2, 1]][None]
    assert pure_area_2d_integral(4, flipped)[0] == pytest.approx(-pure_area_2d_exact(4), abs=1e-9)


def test_closed_form_tends_to_one_eighth():
    assert abs(pure_area_2d_exact(500) - 0.125) < 1e-3
    assert abs(pure_area_2d_exact(32) - 0.125) < abs(pure_area_2d_exact(4) - 0.125)


def test_exact_eta_is_the_young_integral(romberg):
    n = 4
    fam = pure_area_family_2d(n)
    seg = Simplex.parse("0.1,0.2;0.7,0.9")
    assert fam.eta(seg) == pytest.approx(young(fam.g, fam.h, seg, romberg).value, abs=1e-8)
    degenerate = Simplex.parse("0.3,0.3;0.3,0.3")
    assert pure_area_eta_2d(n)(degenerate) == 0.0


@pytest.mark.parametrize("n", [4, 32])
def test_zust_integrals_of_the_family(n, unit_triangle):
    opts = SewOptions(max_level=9, extrapolate=True, extrapolation="romberg", romberg_columns=2)
    value = pure_area_zust(n, unit_triangle, opts=opts).value
    assert value == pytest.approx(pure_area_2d_exact(n), abs=1e-2)


def test_two_dimensional_corrector_is_exact(unit_triangle):
    fam = pure_area_family_2d(8)
    base = cup(fam.f.as_germ(), coboundary(fam.eta))
    result = corrected_sew(CorrectedGerm(base, fam.corrector), unit_triangle)
    assert result.value == pytest.approx(pure_area_2d_exact(8), abs=1e-9)


def test_two_dimensional_family_validation():
    with pytest.raises(ParameterError):
        pure_area_family_2d(1000)
    with pytest.raises(ParameterError):
        pure_area_family_2d(4, eps=0.7)
    fam = pure_area_family_2d(4, eps=0.25)
    assert fam.f.holder_alpha == 0.75
    assert fam.g.holder_alpha == 0.75
    assert fam.h.holder_alpha == 0.5


def test_one_dimensional_family_is_uniformly_half_holder(small_sampler):
    values = {}
    for n in (1, 10, 100):
        fam = pure_area_family_1d(n)
        values[n] = seminorm_estimate(coboundary(fam.f.as_germ()), Gauge.power(1, 0.5), small_sampler, dim=1).value
    # sup |cos u - cos v| / sqrt|u - v| is about 1.2
    assert max(values.values()) <= 1.25
    assert values[100] >= 0.3


@pytest.mark.parametrize("n", [1, 10, 100])
def test_exact_corrector_is_uniformly_lipschitz(n, small_sampler):
    fam = pure_area_family_1d(n)
    est = seminorm_estimate(fam.corrector, Gauge.power(1, 1.0), small_sampler, dim=1)
    assert est.value <= 3.0
