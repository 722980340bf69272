import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from g2kit.exterior import Form, basis_indices

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

fractions16 = st.fractions(min_value=-16, max_value=16, max_denominator=16)


@st.composite
def forms(draw, grade=None, min_grade=0, max_grade=7):
    if grade is None:
        grade = draw(st.integers(min_grade, max_grade))
    keys = basis_indices(grade)
    picked = draw(st.lists(st.sampled_from(keys), unique=True, max_size=len(keys)))
    return Form(grade, {k: draw(fractions16) for k in picked})


vectors = st.lists(fractions16, min_size=7, max_size=7)


@pytest.fixture
def rng():
    return random.Random(20261014)


def frac(s):
    return Fraction(s)
