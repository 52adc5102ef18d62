"""Shared fixtures and hypothesis strategies."""
import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from src.rough_forms.germ import SamplerConfig
from src.rough_forms.sew import SewOptions
from src.rough_forms.simplex import Simplex

settings.register_profile("default", max_examples=40, derandomize=True, deadline=None)
settings.load_profile("default")

coords = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False, allow_infinity=False)


@st.composite
def simplices(draw, degree=2, dim=2):
    rows = draw(st.lists(st.lists(coords, min_size=dim, max_size=dim), min_size=degree + 1, max_size=degree + 1))
    return Simplex(rows)


@st.composite
def affine_maps(draw, dim=2, out_dim=2):
    from src.rough_forms.simplex import AffineMap

    entries = draw(st.lists(coords, min_size=out_dim * dim, max_size=out_dim * dim))
    offset = draw(st.lists(coords, min_size=out_dim, max_size=out_dim))
    return AffineMap(np.reshape(entries, (out_dim, dim)), offset)


@pytest.fixture
def unit_triangle():
    return Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def unit_segment():
    return Simplex([[0.0], [1.0]])


@pytest.fixture
def small_sampler():
    return SamplerConfig(n_random=200, dyadic_depth=3, n_scales=8, n_multiscale=8, seed=0)


@pytest.fixture
def romberg():
    return SewOptions(extrapolate=True, extrapolation="romberg")
