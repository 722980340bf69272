"""Real Cl(7) representation on R^8 and the Clifford action of forms on spinors.

Spinors and operators are numpy arrays; dtype=object holds Fractions for the
exact backend, float64 for the f64 backend.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .exterior import DIM, Form, BackendError, GradeError, e, interior, wedge
from .g2algebra import flat_model

SPIN_DIM = 8

# With these generators <e_i e_j e_k η₀, η₀> = −φ₀_ijk, consistent with
# φ₀·η₀ = −7η₀.  The overall sign is absorbed here so that η₀ maps to φ₀.
SPINOR_FORM_SIGN = -1

# Generators as signed lists of E_ij, where E_ij has -1 at (i, j) and +1 at (j, i).
_GENERATORS = {
    1: [(1, 1, 8), (1, 2, 7), (-1, 3, 6), (-1, 4, 5)],
    2: [(-1, 1, 7), (1, 2, 8), (1, 3, 5), (-1, 4, 6)],
    3: [(-1, 1, 6), (1, 2, 5), (-1, 3, 8), (1, 4, 7)],
    4: [(-1, 1, 5), (-1, 2, 6), (-1, 3, 7), (-1, 4, 8)],
    5: [(-1, 1, 3), (-1, 2, 4), (1, 5, 7), (1, 6, 8)],
    6: [(1, 1, 4), (-1, 2, 3), (-1, 5, 8), (1, 6, 7)],
    7: [(1, 1, 2), (-1, 3, 4), (-1, 5, 6), (1, 7, 8)],
}


def _dtype(backend: str):
    if backend == "exact":
        return object
    if backend == "f64":
        return np.float64
    raise ValueError(f"unknown backend {backend!r}")


def _one(backend: str):
    return Fraction(1) if backend == "exact" else 1.0


def zeros_op(backend: str = "exact") -> np.ndarray:
    z = np.empty((SPIN_DIM, SPIN_DIM), dtype=_dtype(backend))
    z[...] = Fraction(0) if backend == "exact" else 0.0
    return z


def identity_op(backend: str = "exact") -> np.ndarray:
    m = zeros_op(backend)
    for i in range(SPIN_DIM):
        m[i, i] = _one(backend)
    return m


@lru_cache(maxsize=None)
def _generator(i: int, backend: str) -> np.ndarray:
    m = zeros_op(backend)
    one = _one(backend)
    for s, a, b in _GENERATORS[i]:
        m[a - 1, b - 1] = -s * one
        m[b - 1, a - 1] = s * one
    m.setflags(write=False)
    return m


def cliff_generator(i: int, backend: str = "exact") -> np.ndarray:
    if not 1 <= i <= DIM:
        raise IndexError(f"generator index {i} outside 1..{DIM}")
    return _generator(i, backend).copy()


def eta0(backend: str = "exact") -> np.ndarray:
    s = np.empty(SPIN_DIM, dtype=_dtype(backend))
    s[...] = Fraction(0) if backend == "exact" else 0.0
    s[0] = _one(backend)
    return s


def spinor(values, backend: str = "exact") -> np.ndarray:
    vals = list(values)
    if len(vals) != SPIN_DIM:
        raise ValueError("a spinor has 8 components")
    s = np.empty(SPIN_DIM, dtype=_dtype(backend))
    for i, v in enumerate(vals):
        s[i] = Fraction(v) if backend == "exact" else float(v)
    return s


def spinor_backend(s: np.ndarray) -> str:
    return "exact" if s.dtype == object else "f64"


@lru_cache(maxsize=None)
def _monomial(idx: tuple, backend: str) -> np.ndarray:
    m = identity_op(backend)
    for i in idx:
        m = m.dot(_generator(i, backend))
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _signed_perm(idx: tuple):
    """Monomial e_I as (perm, sign) with (e_I s)[r] = sign[r] * s[perm[r]]."""
    m = _monomial(idx, "exact")
    perm, sign = [], []
    for r in range(SPIN_DIM):
        c = next(c for c in range(SPIN_DIM) if m[r, c] != 0)
        perm.append(c)
        sign.append(int(m[r, c]))
    return tuple(perm), tuple(sign)


def form_operator(a: Form) -> np.ndarray:
    """Σ over sorted I of a_I e_{i1}···e_{ik} as an 8×8 matrix."""
    m = zeros_op(a.backend)
    for k, v in a.items():
        m = m + v * _monomial(k, a.backend)
    return m


def so7_operator(b: Form) -> np.ndarray:
    """The so(7) embedding e^{jk} ↦ ½ e_j e_k of a 2-form."""
    if b.grade != 2:
        raise GradeError("so7_operator needs a 2-form")
    half = Fraction(1, 2) if b.backend == "exact" else 0.5
    return form_operator(b) * half


def _check(a: Form, s: np.ndarray) -> None:
    if spinor_backend(s) != a.backend:
        raise BackendError("form and spinor use different backends")


def act(a: Form, s: np.ndarray) -> np.ndarray:
    _check(a, s)
    out = np.empty_like(s)
    vals = list(s)
    acc = [Fraction(0) if a.backend == "exact" else 0.0] * SPIN_DIM
    for k, v in a.items():
        perm, sign = _signed_perm(k)
        for r in range(SPIN_DIM):
            x = vals[perm[r]]
            if x:
                acc[r] = acc[r] + sign[r] * v * x
    out[:] = acc
    return out


def slashed_act(a: Form, s: np.ndarray) -> np.ndarray:
    """Σ_j e_j · (e_j⌟a) · s with the so(7)-normalized action on the 2-forms."""
    if a.grade != 3:
        raise GradeError("slashed_act needs a 3-form")
    _check(a, s)
    out = np.empty_like(s)
    out[...] = Fraction(0) if a.backend == "exact" else 0.0
    for j in range(1, DIM + 1):
        inner2 = interior(e(j, backend=a.backend), a)
        out = out + _generator(j, a.backend).dot(so7_operator(inner2).dot(s))
    return out


def spinor_inner(s: np.ndarray, t: np.ndarray):
    return s.dot(t)


def is_zero_spinor(s: np.ndarray, atol: float = 0.0) -> bool:
    return all(abs(x) <= atol for x in s)


def is_g2_2form(b: Form, atol: float = 0.0):
    """(b·η₀ == 0, b·η₀)."""
    r = act(b, eta0(b.backend))
    return is_zero_spinor(r, atol), r


def phi_from_spinor(s: np.ndarray) -> Form:
    """φ(e_i, e_j, e_k) = SPINOR_FORM_SIGN · <e_i e_j e_k s, s> / <s, s>."""
    backend = spinor_backend(s)
    n = spinor_inner(s, s)
    if n == 0:
        raise ValueError("zero spinor")
    coeffs = {}
    for k in combinations(range(1, DIM + 1), 3):
        coeffs[k] = SPINOR_FORM_SIGN * _monomial(k, backend).dot(s).dot(s) / n
    return Form(3, coeffs, backend)


def commutator_form(a: Form, b: Form) -> Form:
    """γ = Σ_j i_{e_j}a ∧ i_{e_j}b.

    Under the so(7) embedding, [so7(a), so7(b)] = so7(γ); equivalently
    [act(a), act(b)] = 2 act(γ) for the plain sorted-product action.
    """
    if a.grade != 2 or b.grade != 2:
        raise GradeError("commutator_form needs two 2-forms")
    out = Form.zero(2, a.backend)
    for j in range(1, DIM + 1):
        ej = e(j, backend=a.backend)
        out = out + wedge(interior(ej, a), interior(ej, b))
    return out


def commutator(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    return m.dot(n) - n.dot(m)


def g2_kernel_dimension(backend: str = "exact") -> int:
    """dim{b ∈ Λ² : b·η₀ = 0}, from the rank of b ↦ b·η₀ on the e^{ij} basis."""
    s = eta0(backend)
    vecs = [act(e(i, j, backend=backend), s)
            for i, j in combinations(range(1, DIM + 1), 2)]
    return len(vecs) - _rank_vectors(vecs)


def _rank_vectors(vecs) -> int:
    rows = [[Fraction(x) for x in v] for v in vecs]
    r = 0
    for c in range(len(rows[0]) if rows else 0):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def convention_self_test(backend: str = "exact") -> None:
    """Abort if the generator sign convention does not give φ₀·η₀ = −7η₀."""
    m = flat_model(backend)
    got = act(m.phi, eta0(backend))
    want = eta0(backend) * (-7)
    if not all(abs(x - y) <= (0 if backend == "exact" else 1e-12) for x, y in zip(got, want)):
        raise RuntimeError(
            "Clifford sign convention mismatch: φ₀·η₀ = %s, expected −7η₀; "
            "check the E_ij convention (−1 at (i,j), +1 at (j,i))" % list(got))
