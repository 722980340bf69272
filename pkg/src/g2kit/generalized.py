"""Pointwise algebra on T ⊕ adP ⊕ T*: pairing, generalized metric, and the
residual evaluators for the generalized Ricci tensor and scalar curvature.

Nothing here differentiates.  Every derivative (Ric, d*H, dζ, ∇F, ...) is
caller-supplied data at a single point, in an orthonormal frame.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .exterior import (DIM, BackendError, Form, GradeError, Scalar, contract, e,
                       hodge, interior, norm2, scalar, wedge)
from .g2algebra import G2Model, TorsionTriple, _model, assemble_H, decompose2, dstar_psi

# The (-1)^n in front of ⋆(F∧⋆H) in the gauge-field equation, fixed at n = 7.
DIM_SIGN = (-1) ** DIM


@dataclass(frozen=True)
class LieCoeff:
    """Diagonal pairing ⟨r, s⟩ = scale · Σ_a signature[a] r_a s_a on R^dim."""
    signature: Tuple[int, ...]
    scale: Scalar = Fraction(1)
    backend: str = "exact"

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signature):
            raise ValueError("signature entries must be ±1")
        object.__setattr__(self, "scale", scalar(self.scale, self.backend))
        if self.scale == 0:
            raise ValueError("pairing scale must be nonzero")

    @classmethod
    def positive(cls, dim: int, backend: str = "exact") -> "LieCoeff":
        return cls((1,) * dim, Fraction(1), backend)

    @property
    def dim(self) -> int:
        return len(self.signature)

    def weight(self, a: int) -> Scalar:
        return self.scale * self.signature[a]

    def pair(self, r: Sequence, s: Sequence) -> Scalar:
        if len(r) != self.dim or len(s) != self.dim:
            raise ValueError("Lie coordinate length does not match the pairing")
        total = scalar(0, self.backend)
        for a in range(self.dim):
            total += self.weight(a) * r[a] * s[a]
        return total

    def doubled(self) -> "LieCoeff":
        """Same space twice, with the second copy carrying the opposite sign."""
        return LieCoeff(self.signature + tuple(-s for s in self.signature), self.scale,
                        self.backend)


@dataclass(frozen=True)
class LieValuedForm:
    """Σ_a components[a] ⊗ r_a for a basis r_a of the Lie coefficient space."""
    components: Tuple[Form, ...]
    lie: LieCoeff

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.lie.dim:
            raise ValueError("number of components does not match the Lie dimension")
        if comps:
            g, b = comps[0].grade, comps[0].backend
            if any(c.grade != g for c in comps):
                raise GradeError("Lie components have different grades")
            if any(c.backend != b for c in comps) or b != self.lie.backend:
                raise BackendError("Lie components use different backends")

    @property
    def grade(self) -> int:
        return self.components[0].grade

    @property
    def backend(self) -> str:
        return self.lie.backend

    @classmethod
    def zero(cls, grade: int, lie: LieCoeff) -> "LieValuedForm":
        return cls(tuple(Form.zero(grade, lie.backend) for _ in range(lie.dim)), lie)

    def _same(self, other: "LieValuedForm") -> None:
        if other.lie != self.lie:
            raise ValueError("mismatched Lie coefficient spaces")

    def __add__(self, other: "LieValuedForm") -> "LieValuedForm":
        self._same(other)
        return LieValuedForm(tuple(a + b for a, b in zip(self.components, other.components)),
                             self.lie)

    def __sub__(self, other: "LieValuedForm") -> "LieValuedForm":
        self._same(other)
        return LieValuedForm(tuple(a - b for a, b in zip(self.components, other.components)),
                             self.lie)

    def scale(self, c) -> "LieValuedForm":
        return LieValuedForm(tuple(a * c for a in self.components), self.lie)

    def map(self, fn) -> "LieValuedForm":
        return LieValuedForm(tuple(fn(a) for a in self.components), self.lie)

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(c.is_zero(atol) for c in self.components)

    def max_abs(self):
        return max((c.max_abs() for c in self.components), default=0)

    def value_at(self, idx) -> list[Scalar]:
        """Lie coordinates of the full-tensor component at ``idx``."""
        return [c[idx] for c in self.components]

    def to_dict(self) -> dict:
        return {"signature": list(self.lie.signature), "scale": _sjson(self.lie.scale),
                "components": [c.to_dict() for c in self.components]}

    @classmethod
    def from_dict(cls, d) -> "LieValuedForm":
        comps = tuple(Form.from_dict(c) for c in d["components"])
        backend = comps[0].backend if comps else "exact"
        lie = LieCoeff(tuple(d["signature"]), scalar(d.get("scale", "1"), backend), backend)
        return cls(comps, lie)


def _sjson(v):
    return str(v) if isinstance(v, Fraction) else v


def lie_norm2(F: LieValuedForm) -> Scalar:
    """|F|² = Σ_a ⟨r_a, r_a⟩ |F_a|²; signed when the pairing is indefinite."""
    total = scalar(0, F.backend)
    for a, c in enumerate(F.components):
        total += F.lie.weight(a) * norm2(c)
    return total


# generalized vectors

@dataclass(frozen=True)
class GeneralizedVector:
    """X + r + ζ in T ⊕ adP ⊕ T*; X is stored through its metric dual 1-form."""
    x: Form
    r: Tuple[Scalar, ...]
    zeta: Form
    lie: LieCoeff

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(scalar(v, self.lie.backend) for v in self.r))
        if self.x.grade != 1 or self.zeta.grade != 1:
            raise GradeError("tangent and cotangent parts are 1-forms")
        if len(self.r) != self.lie.dim:
            raise ValueError("Lie part has the wrong length")
        if self.x.backend != self.lie.backend or self.zeta.backend != self.lie.backend:
            raise BackendError("mixed backends in a generalized vector")

    @classmethod
    def make(cls, x=None, r=None, zeta=None, lie: Optional[LieCoeff] = None):
        lie = lie or LieCoeff.positive(0)
        b = lie.backend
        x = x if x is not None else Form.zero(1, b)
        zeta = zeta if zeta is not None else Form.zero(1, b)
        r = tuple(r) if r is not None else tuple(scalar(0, b) for _ in range(lie.dim))
        return cls(x, r, zeta, lie)

    def __add__(self, o: "GeneralizedVector") -> "GeneralizedVector":
        _same_lie(self, o)
        return GeneralizedVector(self.x + o.x, tuple(a + b for a, b in zip(self.r, o.r)),
                                 self.zeta + o.zeta, self.lie)

    def __sub__(self, o: "GeneralizedVector") -> "GeneralizedVector":
        return self + o.scale(-1)

    def scale(self, c) -> "GeneralizedVector":
        c = scalar(c, self.lie.backend) if not isinstance(c, float) else c
        return GeneralizedVector(self.x * c, tuple(c * v for v in self.r), self.zeta * c,
                                 self.lie)

    def __eq__(self, o) -> bool:
        return (isinstance(o, GeneralizedVector) and self.lie == o.lie and self.x == o.x
                and self.r == o.r and self.zeta == o.zeta)

    __hash__ = None


def _same_lie(a: GeneralizedVector, b: GeneralizedVector) -> None:
    if a.lie != b.lie:
        raise ValueError("generalized vectors over different Lie spaces")


def _pair1(a: Form, b: Form) -> Scalar:
    """ζ(X) with X given by its dual 1-form."""
    return contract(a, b).value()


def gpairing(a: GeneralizedVector, b: GeneralizedVector) -> Scalar:
    """Polarization of ⟨X+r+ζ, X+r+ζ⟩ = ζ(X) + ⟨r,r⟩."""
    _same_lie(a, b)
    half = Fraction(1, 2) if a.lie.backend == "exact" else 0.5
    return half * (_pair1(a.zeta, b.x) + _pair1(b.zeta, a.x)) + a.lie.pair(a.r, b.r)


def sigma_plus(x: Form, lie: LieCoeff) -> GeneralizedVector:
    return GeneralizedVector.make(x, None, x, lie)


def sigma_minus(x: Form, lie: LieCoeff) -> GeneralizedVector:
    return GeneralizedVector.make(x, None, -x, lie)


def gmetric(a: GeneralizedVector) -> GeneralizedVector:
    """The generalized metric endomorphism: X + r + ζ ↦ ζ♯ − r + X♭."""
    return GeneralizedVector(a.zeta, tuple(-v for v in a.r), a.x, a.lie)


def gprojections(a: GeneralizedVector):
    """(π₊a, π₋a) with π± = ½(G ± id)."""
    half = Fraction(1, 2) if a.lie.backend == "exact" else 0.5
    g = gmetric(a)
    plus = (g + a).scale(half)
    minus = a - plus
    return plus, minus


def eps_decompose(eps: GeneralizedVector):
    """Unique (ζ₊, z, ζ₋) with ε = σ₊(ζ₊♯) + z + σ₋(ζ₋♯)."""
    half = Fraction(1, 2) if eps.lie.backend == "exact" else 0.5
    zp = (eps.x + eps.zeta) * half
    zm = (eps.x - eps.zeta) * half
    return zp, eps.r, zm


def eps_reassemble(zeta_plus: Form, z: Sequence, zeta_minus: Form,
                   lie: LieCoeff) -> GeneralizedVector:
    return (sigma_plus(zeta_plus, lie) + GeneralizedVector.make(None, z, None, lie)
            + sigma_minus(zeta_minus, lie))


# symmetric tensors and residual pieces

def _zeros(backend: str, shape=(DIM, DIM)) -> np.ndarray:
    m = np.empty(shape, dtype=object if backend == "exact" else np.float64)
    m[...] = Fraction(0) if backend == "exact" else 0.0
    return m


def sym_matrix(rows, backend: str = "exact") -> np.ndarray:
    m = _zeros(backend)
    for i in range(DIM):
        for j in range(DIM):
            m[i, j] = scalar(rows[i][j], backend)
    return m


def h_squared(h: Form) -> np.ndarray:
    """(H²)_{ij} = Σ over all a, b of H_{iab} H_{jab}."""
    if h.grade != 3:
        raise GradeError("h_squared needs a 3-form")
    m = _zeros(h.backend)
    cols = [interior(e(i, backend=h.backend), h) for i in range(1, DIM + 1)]
    for i in range(DIM):
        for j in range(i, DIM):
            # Σ_{a<b} counted twice for the full sum.
            v = 2 * _inner2(cols[i], cols[j])
            m[i, j] = m[j, i] = v
    return m


def _inner2(a: Form, b: Form) -> Scalar:
    return contract(a, b).value()


def f_gram(F: LieValuedForm) -> np.ndarray:
    """S_{ii'} = Σ_j ⟨F(e_i, e_j), F(e_i', e_j)⟩."""
    if F.grade != 2:
        raise GradeError("f_gram needs a Lie-valued 2-form")
    m = _zeros(F.backend)
    for a, comp in enumerate(F.components):
        w = F.lie.weight(a)
        if comp.is_zero():
            continue
        cols = [interior(e(i, backend=F.backend), comp) for i in range(1, DIM + 1)]
        for i in range(DIM):
            for j in range(i, DIM):
                v = w * _inner2(cols[i], cols[j])
                m[i, j] = m[i, j] + v
                if j != i:
                    m[j, i] = m[j, i] + v
    return m


def star_FwedgestarH(F: LieValuedForm, h: Form) -> LieValuedForm:
    """Componentwise ⋆(F_a ∧ ⋆H)."""
    return F.map(lambda c: hodge(wedge(c, hodge(h))))


def contract_lie(a: Form, F: LieValuedForm) -> LieValuedForm:
    """a⌟F componentwise."""
    return F.map(lambda c: contract(a, c))


@dataclass(frozen=True)
class PointFields:
    """Every symbol of the generalized Ricci and scalar residuals at one point."""
    H: Form
    F: LieValuedForm
    zeta: Form
    Ric: np.ndarray
    dstarH: Form
    dzeta: Form
    LzetaG: np.ndarray
    dthetastarF: LieValuedForm
    dH: Form
    gradF: Tuple[LieValuedForm, ...]
    Rg: Scalar
    dstarzeta: Scalar

    @property
    def backend(self) -> str:
        return self.H.backend

    @classmethod
    def zero(cls, lie: LieCoeff) -> "PointFields":
        b = lie.backend
        return cls(H=Form.zero(3, b), F=LieValuedForm.zero(2, lie), zeta=Form.zero(1, b),
                   Ric=_zeros(b), dstarH=Form.zero(2, b), dzeta=Form.zero(2, b),
                   LzetaG=_zeros(b), dthetastarF=LieValuedForm.zero(1, lie),
                   dH=Form.zero(4, b),
                   gradF=tuple(LieValuedForm.zero(2, lie) for _ in range(DIM)),
                   Rg=scalar(0, b), dstarzeta=scalar(0, b))

    def with_(self, **kw) -> "PointFields":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        mat = lambda m: [[_sjson(x) for x in row] for row in m.tolist()]
        return {"H": self.H.to_dict(), "F": self.F.to_dict(), "zeta": self.zeta.to_dict(),
                "Ric": mat(self.Ric), "dstarH": self.dstarH.to_dict(),
                "dzeta": self.dzeta.to_dict(), "LzetaG": mat(self.LzetaG),
                "dthetastarF": self.dthetastarF.to_dict(), "dH": self.dH.to_dict(),
                "gradF": [g.to_dict() for g in self.gradF], "Rg": _sjson(self.Rg),
                "dstarzeta": _sjson(self.dstarzeta)}

    @classmethod
    def from_dict(cls, d) -> "PointFields":
        H = Form.from_dict(d["H"])
        b = H.backend
        F = LieValuedForm.from_dict(d["F"])
        return cls(H=H, F=F, zeta=Form.from_dict(d["zeta"]),
                   Ric=sym_matrix(d["Ric"], b), dstarH=Form.from_dict(d["dstarH"]),
                   dzeta=Form.from_dict(d["dzeta"]), LzetaG=sym_matrix(d["LzetaG"], b),
                   dthetastarF=LieValuedForm.from_dict(d["dthetastarF"]),
                   dH=Form.from_dict(d["dH"]),
                   gradF=tuple(LieValuedForm.from_dict(g) for g in d["gradF"]),
                   Rg=scalar(d["Rg"], b), dstarzeta=scalar(d["dstarzeta"], b))


def ric_plus_residual(p: PointFields):
    """Left-hand sides of the three generalized Ricci-flat equations.

    sym  = Ric − ¼H² + Σ_j⟨i_jF, i_jF⟩ + ½L_ζg
    skew = d*H − dζ + i_ζH
    lie1 = d_θ*F + (−1)^7 ⋆(F∧⋆H) + i_ζF
    """
    quarter = Fraction(1, 4) if p.backend == "exact" else 0.25
    half = Fraction(1, 2) if p.backend == "exact" else 0.5
    sym = p.Ric - h_squared(p.H) * quarter + f_gram(p.F) + p.LzetaG * half
    skew = p.dstarH - p.dzeta + contract(p.zeta, p.H)
    lie1 = (p.dthetastarF + star_FwedgestarH(p.F, p.H).scale(DIM_SIGN)
            + contract_lie(p.zeta, p.F))
    return sym, skew, lie1


def scalar_splus(p: PointFields) -> Scalar:
    """S⁺ = R_g − ½|H|² + |F|² − 2 d*ζ − |ζ|²."""
    half = Fraction(1, 2) if p.backend == "exact" else 0.5
    return (p.Rg - half * norm2(p.H) + lie_norm2(p.F) - 2 * p.dstarzeta
            - norm2(p.zeta))


def splus_from_numbers(Rg, normH2, normF2, dstarzeta, normzeta2) -> Scalar:
    return Rg - normH2 / 2 + normF2 - 2 * dstarzeta - normzeta2


def scalar_closed_form(tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq) -> Scalar:
    """(7/6)τ₀² + 12|τ₁|² + 4d*τ₁ − |τ₃|² + |F|²."""
    return (Fraction(7, 6) * tau0 ** 2 + 12 * normTau1Sq + 4 * dstarTau1 - normTau3Sq
            + normFSq)


def heterotic_Rg(tau0, normTau1Sq, dstarTau1, normTau3Sq) -> Scalar:
    """R_g = (21/8)τ₀² + 30|τ₁|² − ½|τ₃|² + 12d*τ₁."""
    return (Fraction(21, 8) * tau0 ** 2 + 30 * normTau1Sq - normTau3Sq / 2
            + 12 * dstarTau1)


def scalar_via_splus(tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq) -> Scalar:
    """S⁺ − (49/36)τ₀² with ζ = 4τ₁ and the heterotic R_g, |H|² substituted."""
    Rg = heterotic_Rg(tau0, normTau1Sq, dstarTau1, normTau3Sq)
    normH2 = Fraction(7, 36) * tau0 ** 2 + 4 * normTau1Sq + normTau3Sq
    s = splus_from_numbers(Rg, normH2, normFSq, 4 * dstarTau1, 16 * normTau1Sq)
    return s - Fraction(49, 36) * tau0 ** 2


class ConsistencyError(ArithmeticError):
    """Two evaluation routes that must agree did not."""


def corollary_residual(tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq,
                       atol: float = 1e-12) -> Scalar:
    direct = scalar_closed_form(tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq)
    chain = scalar_via_splus(tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq)
    exact = all(not isinstance(v, float)
                for v in (tau0, normTau1Sq, dstarTau1, normTau3Sq, normFSq))
    diff = abs(direct - chain)
    if (exact and diff != 0) or (not exact and diff > atol * max(1.0, abs(float(direct)))):
        raise ConsistencyError(f"routes disagree: {direct} vs {chain}")
    return direct


def ym_rhs(F: LieValuedForm, t: TorsionTriple,
           model: Optional[G2Model] = None) -> LieValuedForm:
    """6τ₁⌟π₇F + (1/3)τ₀(π₇F)⌟φ − 3(π₇F)⌟τ₃, per Lie component."""
    m = _model(model, F.backend)
    third = Fraction(1, 3) if F.backend == "exact" else 1 / 3

    def one(c: Form) -> Form:
        p7, _ = decompose2(c, m)
        return (contract(t.tau1, p7) * 6 + contract(p7, m.phi) * (third * t.tau0)
                - contract(p7, t.tau3) * 3)

    return F.map(one)


def ym_algebraic_identity(F: LieValuedForm, t: TorsionTriple,
                          model: Optional[G2Model] = None) -> LieValuedForm:
    """LHS − RHS of the derivative-free Yang–Mills identity, per Lie component.

    LHS = 4τ₁⌟F + (F⌟ψ)⌟H − F⌟(τ₀φ − 3τ₁⌟ψ + τ₃)
    RHS = ``ym_rhs``
    """
    m = _model(model, F.backend)
    H = assemble_H(t, m)
    dsp = dstar_psi(t, m)
    lhs = F.map(lambda c: contract(t.tau1, c) * 4 + contract(contract(c, m.psi), H)
                - contract(c, dsp))
    return lhs - ym_rhs(F, t, m)


def s7_pairing_scale(kappa) -> Scalar:
    """λ with dH = λ tr F∧F on the round S⁷: (8/3)κ² / (−32κ⁴/27)."""
    if kappa == 0:
        raise ZeroDivisionError("the S7 pairing scale has a pole at kappa = 0")
    if isinstance(kappa, float):
        return (8 / 3 * kappa ** 2) / (-32 / 27 * kappa ** 4)
    k = Fraction(kappa)
    return (Fraction(8, 3) * k ** 2) / (Fraction(-32, 27) * k ** 4)
