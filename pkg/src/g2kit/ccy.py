"""The contact Calabi-Yau family in its Sasakian orthonormal coframe.

The coframe f⁰, f¹..f³ = e, f⁴..f⁶ = Je is stored on kernel indices 1..7
via f^p ↦ p + 1.  In these indices f⁰∧ω³/3! = −e^{1234567}, so the coframe
model carries orientation −1.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from .exterior import DIM, Form, Scalar, contract, norm2, wedge
from .g2algebra import G2Model, TorsionTriple
from .generalized import LieCoeff, LieValuedForm, ym_rhs

COFRAME_ORIENTATION = -1
NORMALIZATIONS = ("e0", "eta")


def f(p: int, backend: str = "exact") -> Form:
    """The coframe 1-form f^p, p = 0..6."""
    if not 0 <= p <= 6:
        raise IndexError("coframe index outside 0..6")
    return Form.basis(p + 1, backend=backend)


def _e(i: int, backend: str) -> Form:
    return f(i, backend)


def _Je(i: int, backend: str) -> Form:
    return f(i + 3, backend)


def _complex_wedge(a, b):
    (ar, ai), (br, bi) = a, b
    return (wedge(ar, br) - wedge(ai, bi), wedge(ar, bi) + wedge(ai, br))


@lru_cache(maxsize=None)
def su3_coframe_forms(backend: str = "exact") -> Tuple[Form, Form, Form]:
    """(ω, ReΩ, ImΩ) with ω = Σ e^i∧Je^i and Ω = ∧_i (e^i + iJe^i)."""
    omega = Form.zero(2, backend)
    for i in (1, 2, 3):
        omega = omega + wedge(_e(i, backend), _Je(i, backend))
    cplx = (_e(1, backend), _Je(1, backend))
    for i in (2, 3):
        cplx = _complex_wedge(cplx, (_e(i, backend), _Je(i, backend)))
    return omega, cplx[0], cplx[1]


@lru_cache(maxsize=None)
def g2_eps(backend: str = "exact") -> Tuple[Form, Form]:
    """φ = f⁰∧ω + ReΩ and ψ = ½ω² − f⁰∧ImΩ."""
    omega, re, im = su3_coframe_forms(backend)
    f0 = f(0, backend)
    half = Fraction(1, 2) if backend == "exact" else 0.5
    phi = wedge(f0, omega) + re
    psi = wedge(omega, omega) * half - wedge(f0, im)
    return phi, psi


def coframe_model(backend: str = "exact") -> G2Model:
    phi, psi = g2_eps(backend)
    return G2Model(phi, psi, COFRAME_ORIENTATION)


def vol6(backend: str = "exact") -> Form:
    """ω³/3!."""
    omega = su3_coframe_forms(backend)[0]
    w3 = wedge(wedge(omega, omega), omega)
    return w3 * (Fraction(1, 6) if backend == "exact" else 1 / 6)


def _check_eps(eps) -> None:
    if not eps > 0:
        raise ValueError("eps must be positive")


def _to_scalar(x, backend: str) -> Scalar:
    return Fraction(x) if backend == "exact" else float(x)


def torsion_eps(eps, backend: Optional[str] = None) -> TorsionTriple:
    """τ₀ = 6ε/7, τ₁ = 0, τ₃ = (8/7)ε f⁰∧ω − (6/7)ε ReΩ (η∧ω = f⁰∧ω / ε)."""
    _check_eps(eps)
    if backend is None:
        backend = "f64" if isinstance(eps, float) else "exact"
    eps = _to_scalar(eps, backend)
    omega, re, _ = su3_coframe_forms(backend)
    f0 = f(0, backend)
    c = (lambda p, q: Fraction(p, q)) if backend == "exact" else (lambda p, q: p / q)
    tau3 = wedge(f0, omega) * (c(8, 7) * eps) - re * (c(6, 7) * eps)
    return TorsionTriple(c(6, 7) * eps, Form.zero(1, backend), tau3)


def h_eps(eps, backend: Optional[str] = None) -> Form:
    """ε(−f⁰∧ω + ReΩ), stated independently of the torsion forms."""
    _check_eps(eps)
    if backend is None:
        backend = "f64" if isinstance(eps, float) else "exact"
    eps = _to_scalar(eps, backend)
    omega, re, _ = su3_coframe_forms(backend)
    return (re - wedge(f(0, backend), omega)) * eps


# --------------------------------------------------------------- matrices

@dataclass(frozen=True)
class CCYParams:
    eps: Scalar
    k: Scalar
    delta: Scalar = 0
    m: Scalar = 0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.k == 0:
            raise ValueError("k must be nonzero")
        if self.backend == "exact":
            for name in ("eps", "k", "delta", "m"):
                object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def backend(self) -> str:
        vals = (self.eps, self.k, self.delta, self.m)
        return "f64" if any(isinstance(v, float) for v in vals) else "exact"


class MatrixOfForms:
    """A 7×7 array of forms of one grade, indexed by coframe positions 0..6."""
    __slots__ = ("entries", "grade", "backend")

    def __init__(self, entries, grade: int, backend: str = "exact"):
        rows = tuple(tuple(r) for r in entries)
        if len(rows) != DIM or any(len(r) != DIM for r in rows):
            raise ValueError("a matrix of forms is 7 x 7")
        for r in rows:
            for x in r:
                if x.grade != grade or x.backend != backend:
                    raise ValueError("entries must share grade and backend")
        self.entries = rows
        self.grade = grade
        self.backend = backend

    @classmethod
    def zero(cls, grade: int, backend: str = "exact") -> "MatrixOfForms":
        z = Form.zero(grade, backend)
        return cls([[z] * DIM for _ in range(DIM)], grade, backend)

    def __getitem__(self, pq) -> Form:
        p, q = pq
        return self.entries[p][q]

    def map(self, fn, grade: Optional[int] = None) -> "MatrixOfForms":
        rows = [[fn(x) for x in r] for r in self.entries]
        g = self.grade if grade is None else grade
        return MatrixOfForms(rows, g, self.backend)

    def __add__(self, o: "MatrixOfForms") -> "MatrixOfForms":
        return MatrixOfForms([[a + b for a, b in zip(r, s)]
                              for r, s in zip(self.entries, o.entries)], self.grade, self.backend)

    def __sub__(self, o: "MatrixOfForms") -> "MatrixOfForms":
        return self + o.scale(-1)

    def scale(self, c) -> "MatrixOfForms":
        return self.map(lambda x: x * c)

    def __eq__(self, o) -> bool:
        return isinstance(o, MatrixOfForms) and self.entries == o.entries

    __hash__ = None

    def is_skew(self, atol: float = 0.0) -> bool:
        return all((self.entries[p][q] + self.entries[q][p]).is_zero(atol)
                   for p in range(DIM) for q in range(p, DIM))

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(x.is_zero(atol) for r in self.entries for x in r)


def _blocks(corner, top_l, top_r, mid_l, mid_c, mid_r, bot_l, bot_c, bot_r, grade, backend):
    """Assemble a 1 + 3 + 3 block matrix; vectors are length-3 lists, blocks 3×3."""
    z = Form.zero(grade, backend)
    M = [[z] * DIM for _ in range(DIM)]
    M[0][0] = corner
    for i in range(3):
        M[0][1 + i] = top_l[i]
        M[0][4 + i] = top_r[i]
        M[1 + i][0] = mid_l[i]
        M[4 + i][0] = bot_l[i]
        for j in range(3):
            M[1 + i][1 + j] = mid_c[i][j]
            M[1 + i][4 + j] = mid_r[i][j]
            M[4 + i][1 + j] = bot_c[i][j]
            M[4 + i][4 + j] = bot_r[i][j]
    return MatrixOfForms(M, grade, backend)


def box3(v: Sequence[Form]) -> list[list[Form]]:
    """[v] = (0 v₃ −v₂; −v₃ 0 v₁; v₂ −v₁ 0)."""
    v1, v2, v3 = v
    z = v1 * 0
    return [[z, v3, -v2], [-v3, z, v1], [v2, -v1, z]]


def _vec(fn, backend):
    return [fn(i, backend) for i in (1, 2, 3)]


def _neg(v):
    return [-x for x in v]


def _scaled_identity(x: Form):
    z = x * 0
    return [[x if i == j else z for j in range(3)] for i in range(3)]


def _sblock(b, c):
    return [[x * c for x in r] for r in b]


def iconst(backend: str = "exact") -> MatrixOfForms:
    """𝐈 = (0 0 0; 0 0 −I; 0 I 0) as a matrix of 0-forms."""
    one = Form(0, {(): 1}).to_backend(backend)
    z = Form.zero(0, backend)
    zb = [[z] * 3 for _ in range(3)]
    ident = _scaled_identity(one)
    return _blocks(z, [z] * 3, [z] * 3, [z] * 3, zb, _sblock(ident, -1),
                   [z] * 3, ident, zb, 0, backend)


def matrix_B(backend: str = "exact") -> MatrixOfForms:
    e, Je, e0 = _vec(_e, backend), _vec(_Je, backend), f(0, backend)
    z = e0 * 0
    zb = [[z] * 3 for _ in range(3)]
    return _blocks(z, Je, _neg(e), _neg(Je), zb, _sblock(_scaled_identity(e0), -1),
                   e, _scaled_identity(e0), zb, 1, backend)


def matrix_C(backend: str = "exact") -> MatrixOfForms:
    e, Je, e0 = _vec(_e, backend), _vec(_Je, backend), f(0, backend)
    z = e0 * 0
    base = _blocks(z, Je, _neg(e), _neg(Je), _sblock(box3(e), -1), box3(Je),
                   e, box3(Je), box3(e), 1, backend)
    return base - iconst(backend).map(lambda c: e0 * c.value(), 1)


def m_coefficients(delta, m):
    """((1+m−5δ)(1+δ), δ² − 2(2+m)δ − 1)."""
    return (1 + m - 5 * delta) * (1 + delta), delta ** 2 - 2 * (2 + m) * delta - 1


def matrix_M(delta, m, backend: str = "exact") -> MatrixOfForms:
    P, Q = m_coefficients(delta, m)
    e, Je = _vec(_e, backend), _vec(_Je, backend)
    z = e[0] * 0
    sc = lambda v, c: [x * c for x in v]
    return _blocks(z, sc(e, P), sc(Je, P), sc(e, -P), _sblock(box3(Je), Q),
                   _sblock(box3(e), Q), sc(Je, -P), _sblock(box3(e), Q),
                   _sblock(box3(Je), -Q), 1, backend)


def matrices_BCIM(p: CCYParams):
    b = p.backend
    return matrix_B(b), matrix_C(b), iconst(b), matrix_M(p.delta, p.m, b)


# -------------------------------------------------------------- deviation

def first_coefficient(p: CCYParams):
    """kε²(6(1−δ+m) + k(1−δ)(1+3δ))/4."""
    d = p.delta
    return p.k * p.eps ** 2 * (6 * (1 - d + p.m) + p.k * (1 - d) * (1 + 3 * d)) / 4


def second_coefficient(p: CCYParams, normalization: str = "e0"):
    """Factor in front of f⁰∧(ω²/2)∧M.

    "e0": the fibre 1-form in the second term is the unit coframe f⁰,
    coefficient k²ε²/4.  "eta": the fibre 1-form is η = f⁰/ε, coefficient k²ε/4.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    c = p.k ** 2 * p.eps ** 2 / 4
    return c if normalization == "e0" else c / p.eps


def deviation(p: CCYParams, normalization: str = "e0") -> MatrixOfForms:
    """R∧ψ_ε = c₁ (ω³/3!) 𝐈 + c₂ f⁰∧(ω²/2)∧M as a matrix of 6-forms."""
    b = p.backend
    c1 = first_coefficient(p)
    c2 = second_coefficient(p, normalization)
    omega = su3_coframe_forms(b)[0]
    half = Fraction(1, 2) if b == "exact" else 0.5
    lead = wedge(f(0, b), wedge(omega, omega) * half)
    v = vol6(b)
    first = iconst(b).map(lambda x: v * (x.value() * c1), 6)
    second = matrix_M(p.delta, p.m, b).map(lambda x: wedge(lead, x) * c2, 6)
    return first + second


def matrix_norm2(T: MatrixOfForms) -> Scalar:
    """½ Σ_{p,q} |T_pq|²."""
    total = sum((norm2(x) for r in T.entries for x in r), T[0, 0]._zero())
    return total / 2


def deviation_norm(p: CCYParams, normalization: str = "e0") -> float:
    return math.sqrt(float(matrix_norm2(deviation(p, normalization))))


# ---------------------------------------------------------------- regimes

class RegimeError(ValueError):
    pass


def regime_params(case: int, delta=None, m=None, alpha: float = 0.1) -> CCYParams:
    """(ε, k, δ, m) of the three α′-regimes, positive square roots."""
    if not alpha > 0:
        raise RegimeError("alpha must satisfy alpha > 0")
    a = float(alpha)
    if case == 1:
        if delta is None or delta in (0, -1):
            raise RegimeError("case 1 needs delta not in {0, -1}")
        if m is not None and m != delta - 1:
            raise RegimeError("case 1 forces m = delta - 1")
        d = float(delta)
        eps2 = 8 / (d ** 2 * (1 + d) ** 2) * a ** 5
        return CCYParams(math.sqrt(eps2), a ** -1.5, d, d - 1)
    if case == 2:
        if delta not in (None, 0):
            raise RegimeError("case 2 needs delta = 0")
        if m is None or not m < -1:
            raise RegimeError("case 2 needs m < -1")
        mm = float(m)
        eps2 = -8 * a ** 8 / ((1 + mm) * (1 + 3 * a ** 3))
        return CCYParams(math.sqrt(eps2), a ** -3, 0.0, mm)
    if case == 3:
        if delta not in (None, -1):
            raise RegimeError("case 3 needs delta = -1")
        if m is None or not m > -2:
            raise RegimeError("case 3 needs m > -2")
        if not 4 - 3 * a ** 3 > 0:
            raise RegimeError("case 3 needs 4 - 3 alpha^3 > 0")
        mm = float(m)
        eps2 = 8 * a ** 8 / ((2 + mm) * (4 - 3 * a ** 3))
        return CCYParams(math.sqrt(eps2), a ** -3, -1.0, mm)
    raise RegimeError("case must be 1, 2 or 3")


def limit_coefficients(case: int, delta=None, m=None):
    """lim c₁/α′² and lim c₂/α′² (e0 normalization) as α′ → 0."""
    if case == 1:
        d = delta
        base = 8 / (d ** 2 * (1 + d) ** 2)          # lim k²ε²/α′²
        return base * (1 - d) * (1 + 3 * d) / 4, base / 4
    if case == 2:
        base = -8 / (1 + m)
        return base / 4, base / 4
    if case == 3:
        base = 2 / (2 + m)
        return -base, base / 4
    raise RegimeError("case must be 1, 2 or 3")


def limit_constant(case: int, delta=None, m=None) -> float:
    """lim |R∧ψ_ε| / α′² under the e0 normalization.

    |T|² = 3c₁² + c₂²(6P² + 12Q²): 𝐈 has six unit entries, M has twelve
    entries of size P and twenty-four of size Q, all of unit-norm 6-forms.
    """
    if case == 1:
        mm = delta - 1
        d = delta
    elif case == 2:
        d, mm = 0, m
    else:
        d, mm = -1, m
    c1, c2 = limit_coefficients(case, d, mm)
    P, Q = m_coefficients(d, mm)
    return math.sqrt(3 * c1 ** 2 + c2 ** 2 * (6 * P ** 2 + 12 * Q ** 2))


# ------------------------------------------------------------------ sweep

@dataclass(frozen=True)
class SweepRow:
    alpha: float
    norm: float
    ym_rhs_norm: Optional[float] = None

    @property
    def norm_over_alpha2(self) -> float:
        return self.norm / self.alpha ** 2


@dataclass(frozen=True)
class SweepResult:
    case: int
    delta: Optional[float]
    m: Optional[float]
    normalization: str
    rows: Tuple[SweepRow, ...]
    slope: float
    ym_slope: Optional[float]
    limit_const: float


def pi7_of_deviation(T: MatrixOfForms, model: Optional[G2Model] = None) -> LieValuedForm:
    """π₇ of the curvature from R∧ψ: contract(ψ, β∧ψ) = 3π₇β, one Lie slot per p < q."""
    model = coframe_model(T.backend) if model is None else model
    third = Fraction(1, 3) if T.backend == "exact" else 1 / 3
    comps = tuple(contract(model.psi, T[p, q]) * third
                  for p in range(DIM) for q in range(p + 1, DIM))
    return LieValuedForm(comps, LieCoeff((1,) * len(comps), backend=T.backend))


def _fit_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if any(v <= 0 for v in y):
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def log_grid(alpha_max: float, alpha_min: float, points: int) -> list[float]:
    """Strictly decreasing log-spaced grid from alpha_max down to alpha_min."""
    if points < 2:
        raise ValueError("need at least 2 points")
    return [float(v) for v in np.logspace(math.log10(alpha_max), math.log10(alpha_min), points)]


def scaling_sweep(case: int, delta=None, m=None, grid: Sequence[float] = (),
                  normalization: str = "e0", threads: int = 1,
                  with_ym: bool = True) -> SweepResult:
    grid = [float(a) for a in grid]
    if len(grid) < 4:
        raise ValueError("the sweep grid needs at least 4 points")
    if any(a <= 0 for a in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("the sweep grid must be strictly decreasing and positive")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    model = coframe_model("f64")

    def point(a: float) -> SweepRow:
        p = regime_params(case, delta, m, a)
        T = deviation(p, normalization)
        nrm = math.sqrt(float(matrix_norm2(T)))
        ym = None
        if with_ym:
            F = pi7_of_deviation(T, model)
            r = ym_rhs(F, torsion_eps(p.eps, "f64"), model)
            ym = math.sqrt(sum(norm2(c) for c in r.components))
        return SweepRow(a, nrm, ym)

    if threads <= 1:
        rows = [point(a) for a in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, grid))
    slope = _fit_slope(grid, [r.norm for r in rows])
    ym_slope = _fit_slope(grid, [r.ym_rhs_norm for r in rows]) if with_ym else None
    d = delta if case == 1 else (0 if case == 2 else -1)
    return SweepResult(case, d, m if case != 1 else d - 1, normalization, tuple(rows),
                       slope, ym_slope, limit_constant(case, delta, m))
