"""Seeded random rational data for tests, the CLI and the sample generators."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .exterior import Form, basis_indices
from .g2algebra import lambda2_14_basis, lambda3_27_basis, TorsionTriple


def rational(rng: random.Random, num: int = 16, den: int = 16) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_form(rng: random.Random, grade: int, backend: str = "exact",
                density: float = 1.0) -> Form:
    coeffs = {I: rational(rng) for I in basis_indices(grade) if rng.random() < density}
    return Form(grade, coeffs).to_backend(backend)


def _combo(rng: random.Random, basis, grade: int, backend: str) -> Form:
    out = Form.zero(grade)
    for b in basis:
        out = out + b * rational(rng)
    return out.to_backend(backend)


def random_g2_form(rng: random.Random, backend: str = "exact") -> Form:
    """Random rational element of the 14-dimensional kernel Λ²₁₄."""
    return _combo(rng, lambda2_14_basis(), 2, backend)


def random_27_form(rng: random.Random, backend: str = "exact") -> Form:
    return _combo(rng, lambda3_27_basis(), 3, backend)


def random_torsion(rng: random.Random, backend: str = "exact",
                   parts: Optional[str] = None) -> TorsionTriple:
    """Random (τ₀, τ₁, τ₃); ``parts`` restricts to a subset like "01"."""
    parts = "013" if parts is None else parts
    tau0 = rational(rng) if "0" in parts else Fraction(0)
    tau1 = random_form(rng, 1) if "1" in parts else Form.zero(1)
    tau3 = random_27_form(rng) if "3" in parts else Form.zero(3)
    if backend == "f64":
        return TorsionTriple(float(tau0), tau1.to_backend("f64"), tau3.to_backend("f64"))
    return TorsionTriple(tau0, tau1, tau3)
