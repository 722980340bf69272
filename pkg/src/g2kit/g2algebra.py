"""The flat G2 model and the linear algebra attached to it.

Every decomposition takes an optional ``model``; by default the standard
3-form on R^7 is used.  Other models (for example the contact Calabi-Yau
coframe model) only need to be G2 3-forms whose induced metric is the
identity, possibly with reversed orientation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exterior import (DIM, Form, GradeError, Scalar, basis_indices, contract, e,
                       hodge, inner, interior, norm2, scalar, wedge)

PHI0_TERMS = {"127": 1, "347": 1, "567": 1, "135": 1, "146": -1, "236": -1, "245": -1}
PSI0_TERMS = {"3456": 1, "1256": 1, "1234": 1, "2467": -1, "2357": 1, "1457": 1,
              "1367": 1}

# (α⌟ψ)⌟ψ = SELF_COMPOSITION_PSI · α for 1-forms α; pinned by brute force
# (see tests/test_g2algebra.py::test_psi_self_composition_constant).
SELF_COMPOSITION_PSI = -4


def phi0(backend: str = "exact") -> Form:
    return Form.from_terms(PHI0_TERMS, backend)


def psi0(backend: str = "exact") -> Form:
    return Form.from_terms(PSI0_TERMS, backend)


@dataclass(frozen=True)
class G2Model:
    phi: Form
    psi: Form
    orientation: int = 1

    @property
    def backend(self) -> str:
        return self.phi.backend

    def to_backend(self, backend: str) -> "G2Model":
        return G2Model(self.phi.to_backend(backend), self.psi.to_backend(backend),
                       self.orientation)


_FLAT = {}


def flat_model(backend: str = "exact") -> G2Model:
    if backend not in _FLAT:
        _FLAT[backend] = G2Model(phi0(backend), psi0(backend), 1)
    return _FLAT[backend]


def _model(model: Optional[G2Model], backend: str) -> G2Model:
    if model is None:
        return flat_model(backend)
    if model.backend != backend:
        return model.to_backend(backend)
    return model


def metric_from_phi(phi: Form, orientation: int = 1) -> list[list[Scalar]]:
    """g_ij = (i_{e_i}φ ∧ i_{e_j}φ ∧ φ) / (6 vol), vol = orientation·e^{1..7}."""
    if phi.grade != 3:
        raise GradeError("metric_from_phi needs a 3-form")
    cols = [interior(e(i, backend=phi.backend), phi) for i in range(1, DIM + 1)]
    full = tuple(range(1, DIM + 1))
    g = [[phi._zero()] * DIM for _ in range(DIM)]
    for i in range(DIM):
        for j in range(i, DIM):
            top = wedge(wedge(cols[i], cols[j]), phi)
            v = top.coeffs().get(full, phi._zero()) * orientation / 6
            g[i][j] = g[j][i] = v
    return g


def is_identity(g: Sequence[Sequence[Scalar]]) -> bool:
    return all(g[i][j] == (1 if i == j else 0) for i in range(DIM) for j in range(DIM))


def metric_is_degenerate(g: Sequence[Sequence[Scalar]]) -> bool:
    """True if the bilinear form fails to be positive definite (Cholesky test)."""
    m = np.array([[float(x) for x in row] for row in g])
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return True
    return False


def cross(x: Form, y: Form, model: Optional[G2Model] = None) -> Form:
    """The vector cross product, g(x × y, z) = φ(x, y, z)."""
    m = _model(model, x.backend)
    return interior(y, interior(x, m.phi))


def decompose2(b: Form, model: Optional[G2Model] = None):
    """Split a 2-form into its Λ²₇ and Λ²₁₄ parts."""
    if b.grade != 2:
        raise GradeError("decompose2 needs a 2-form")
    m = _model(model, b.backend)
    bpsi = contract(b, m.psi)
    pi7 = (b + bpsi) * Fraction(1, 3)
    pi14 = b - pi7
    return pi7, pi14


def pi7_vector_of_3form(g3: Form, model: Optional[G2Model] = None) -> Form:
    """The 1-form X with π₇(γ) = X⌟ψ."""
    m = _model(model, g3.backend)
    return contract(g3, m.psi) * Fraction(1, SELF_COMPOSITION_PSI)


def decompose3(g3: Form, model: Optional[G2Model] = None):
    """Split a 3-form into its Λ³₁, Λ³₇ and Λ³₂₇ parts."""
    if g3.grade != 3:
        raise GradeError("decompose3 needs a 3-form")
    m = _model(model, g3.backend)
    pi1 = m.phi * (inner(g3, m.phi) / norm2(m.phi))
    pi7 = contract(pi7_vector_of_3form(g3, m), m.psi)
    pi27 = g3 - pi1 - pi7
    return pi1, pi7, pi27


def in_lambda3_27(g3: Form, model: Optional[G2Model] = None, atol: float = 0.0) -> bool:
    m = _model(model, g3.backend)
    return wedge(g3, m.phi).is_zero(atol) and wedge(g3, m.psi).is_zero(atol)


@dataclass(frozen=True)
class TorsionTriple:
    """Torsion forms (τ₀, τ₁, τ₃) of an integrable G2-structure."""
    tau0: Scalar
    tau1: Form
    tau3: Form

    @property
    def backend(self) -> str:
        return self.tau1.backend

    @classmethod
    def zero(cls, backend: str = "exact") -> "TorsionTriple":
        return cls(scalar(0, backend), Form.zero(1, backend), Form.zero(3, backend))

    def to_dict(self) -> dict:
        t0 = str(self.tau0) if self.backend == "exact" else self.tau0
        return {"tau0": t0, "tau1": self.tau1.to_dict(), "tau3": self.tau3.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "TorsionTriple":
        tau1 = Form.from_dict(d["tau1"])
        tau3 = Form.from_dict(d["tau3"])
        return cls(scalar(d["tau0"], tau1.backend), tau1, tau3)


def assemble_H(t: TorsionTriple, model: Optional[G2Model] = None,
               atol: float = 1e-12) -> Form:
    """H = (1/6)τ₀φ − τ₁⌟ψ − τ₃."""
    m = _model(model, t.backend)
    tol = 0.0 if t.backend == "exact" else atol
    if t.tau1.grade != 1 or t.tau3.grade != 3:
        raise GradeError("torsion triple has wrong grades")
    if not in_lambda3_27(t.tau3, m, tol):
        raise ValueError("tau3 is not in the 27-dimensional component")
    return m.phi * (Fraction(1, 6) * t.tau0) - contract(t.tau1, m.psi) - t.tau3


def decompose_H(h: Form, model: Optional[G2Model] = None) -> TorsionTriple:
    m = _model(model, h.backend)
    pi1, pi7, pi27 = decompose3(h, m)
    tau0 = inner(h, m.phi) * 6 / norm2(m.phi)
    tau1 = -pi7_vector_of_3form(h, m)
    return TorsionTriple(tau0, tau1, -pi27)


def h_norm2_formula(t: TorsionTriple) -> Scalar:
    """(7/36)τ₀² + 4|τ₁|² + |τ₃|²."""
    return Fraction(7, 36) * t.tau0 ** 2 + 4 * norm2(t.tau1) + norm2(t.tau3)


def dphi_from_H(h: Form, model: Optional[G2Model] = None) -> Form:
    """Σ_j (e_j⌟H) ∧ (e_j⌟φ)."""
    m = _model(model, h.backend)
    out = Form.zero(4, h.backend)
    for j in range(1, DIM + 1):
        ej = e(j, backend=h.backend)
        out = out + wedge(interior(ej, h), interior(ej, m.phi))
    return out


def dphi_from_torsion(t: TorsionTriple, model: Optional[G2Model] = None) -> Form:
    """τ₀ψ + 3τ₁∧φ + ⋆τ₃."""
    m = _model(model, t.backend)
    return (m.psi * t.tau0 + wedge(t.tau1, m.phi) * 3
            + hodge(t.tau3, m.orientation))


def dstar_psi(t: TorsionTriple, model: Optional[G2Model] = None) -> Form:
    """The algebraic expression τ₀φ − 3τ₁⌟ψ + τ₃."""
    m = _model(model, t.backend)
    return m.phi * t.tau0 - contract(t.tau1, m.psi) * 3 + t.tau3


def lambda2_14_basis(backend: str = "exact") -> list[Form]:
    """A basis of Λ²₁₄ obtained by projecting the e^{ij} and keeping independent ones."""
    return list(_basis14(backend))


@lru_cache(maxsize=None)
def _basis14(backend: str) -> tuple:
    return tuple(_independent([decompose2(e(i, j, backend=backend))[1]
                               for i, j in basis_indices(2)], 14))


def lambda2_7_basis(backend: str = "exact") -> list[Form]:
    return [interior(e(i, backend=backend), phi0(backend)) for i in range(1, DIM + 1)]


def lambda3_27_basis(backend: str = "exact") -> list[Form]:
    return list(_basis27(backend))


@lru_cache(maxsize=None)
def _basis27(backend: str) -> tuple:
    return tuple(_independent([decompose3(e(*k, backend=backend))[2]
                               for k in basis_indices(3)], 27))


def _independent(forms: list[Form], want: int) -> list[Form]:
    keep: list[Form] = []
    for f in forms:
        if rank(keep + [f]) > len(keep):
            keep.append(f)
        if len(keep) == want:
            break
    return keep


def rank(forms: Sequence[Form]) -> int:
    """Exact rank of a family of forms of one grade (Gaussian elimination)."""
    if not forms:
        return 0
    keys = sorted({k for f in forms for k, _ in f.items()})
    rows = [[Fraction(f.coeffs().get(k, 0)) for k in keys] for f in forms]
    r = 0
    ncol = len(keys)
    for c in range(ncol):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def _support(f: Form) -> set:
    return {i for k, _ in f.items() for i in k}


def su2_to_g2(omega: Form, psi_plus: Form, psi_minus: Form,
              dx: Sequence[int] = (1, 2, 3)) -> Form:
    """φ = dx¹²³ + dx¹∧ω + dx²∧ψ₊ − dx³∧ψ₋ from SU(2) data on the other 4 axes."""
    for f in (omega, psi_plus, psi_minus):
        if f.grade != 2:
            raise GradeError("SU(2) data are 2-forms")
        if _support(f) & set(dx):
            raise ValueError("SU(2) data overlap the dx directions")
    b = omega.backend
    d1, d2, d3 = (e(i, backend=b) for i in dx)
    return (wedge(wedge(d1, d2), d3) + wedge(d1, omega) + wedge(d2, psi_plus)
            - wedge(d3, psi_minus))


def su2_star_phi(omega: Form, psi_plus: Form, psi_minus: Form,
                 dx: Sequence[int] = (1, 2, 3)) -> Form:
    """½ω² + dx²³∧ω − dx¹³∧ψ₊ − dx¹²∧ψ₋."""
    b = omega.backend
    d1, d2, d3 = (e(i, backend=b) for i in dx)
    return (wedge(omega, omega) * Fraction(1, 2) + wedge(wedge(d2, d3), omega)
            - wedge(wedge(d1, d3), psi_plus) - wedge(wedge(d1, d2), psi_minus))


def su3_to_g2(omega: Form, psi_plus: Form, psi_minus: Form, dt: int = 7):
    """φ = ω∧dt + ψ₊ and ψ = ½ω² + ψ₋∧dt."""
    if omega.grade != 2 or psi_plus.grade != 3 or psi_minus.grade != 3:
        raise GradeError("SU(3) data are (2-form, 3-form, 3-form)")
    for f in (omega, psi_plus, psi_minus):
        if dt in _support(f):
            raise ValueError("SU(3) data overlap the dt direction")
    d = e(dt, backend=omega.backend)
    phi = wedge(omega, d) + psi_plus
    psi = wedge(omega, omega) * Fraction(1, 2) + wedge(psi_minus, d)
    return phi, psi


def flat_su2_data(backend: str = "exact"):
    """Flat hyperkähler triple on span(e4..e7), self-dual for e^{4567}."""
    omega = e(4, 5, backend=backend) + e(6, 7, backend=backend)
    psi_plus = e(4, 6, backend=backend) - e(5, 7, backend=backend)
    psi_minus = e(4, 7, backend=backend) + e(5, 6, backend=backend)
    return omega, psi_plus, psi_minus


def flat_su3_data(backend: str = "exact"):
    """ω = e¹²+e³⁴+e⁵⁶ and Ω = (e¹+ie²)(e³+ie⁴)(e⁵+ie⁶)."""
    omega = e(1, 2, backend=backend) + e(3, 4, backend=backend) + e(5, 6, backend=backend)
    re = Form.from_terms({"135": 1, "146": -1, "236": -1, "245": -1}, backend)
    im = Form.from_terms({"136": 1, "145": 1, "235": 1, "246": -1}, backend)
    return omega, re, im
