"""Curvature blocks of the coupled connection, the Bismut-Ricci form, the
coupled G2-instanton residuals, synthetic pointwise solutions, and the
instanton tower.

Index conventions (orthonormal frame, indices 1..7):

* ``CurvatureTensor`` stores R[a, b, c, d] = g(R(e_a, e_b) e_c, e_d) on a
  21 × 21 grid of sorted pairs: row = 2-form slot (a, b), column =
  endomorphism slot (c, d).  A *form slice* fixes (a, b) and reads (c, d) as
  a 2-form; a *spinor slice* fixes (c, d) and reads (a, b) as a 2-form, which
  is the part that acts on spinors by Clifford multiplication.
* R⁻[i, j, k, l] = R⁺[k, l, i, j] − ½ dH_{ijkl}.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Tuple

import numpy as np

from .exterior import DIM, Form, GradeError, Scalar, contract, e, interior, wedge
from .g2algebra import G2Model, _model, assemble_H, cross
from .generalized import LieCoeff, LieValuedForm
from .sampling import random_form, random_g2_form, random_torsion
from .spin7 import act, eta0, is_zero_spinor

PAIRS: Tuple[Tuple[int, int], ...] = tuple(combinations(range(1, DIM + 1), 2))
PAIR_INDEX = {p: n for n, p in enumerate(PAIRS)}
NPAIRS = len(PAIRS)

INT64_MAX = 2 ** 63 - 1


def _zero(backend: str) -> Scalar:
    return Fraction(0) if backend == "exact" else 0.0


def _pair_sign(i: int, j: int):
    """(pair index, sign) of the unordered pair (i, j), or (None, 0) if i == j."""
    if i == j:
        return None, 0
    if i < j:
        return PAIR_INDEX[(i, j)], 1
    return PAIR_INDEX[(j, i)], -1


def dense2(f: Form) -> list[list[Scalar]]:
    """7 × 7 antisymmetric component matrix of a 2-form, 0-based."""
    if f.grade != 2:
        raise GradeError("dense2 needs a 2-form")
    z = _zero(f.backend)
    m = [[z] * DIM for _ in range(DIM)]
    for (i, j), v in f.items():
        m[i - 1][j - 1] = v
        m[j - 1][i - 1] = -v
    return m


def form2(m, backend: str) -> Form:
    """2-form from the upper triangle of a 0-based matrix."""
    return Form(2, {(i, j): m[i - 1][j - 1] for i, j in PAIRS}, backend)


# ---------------------------------------------------------------- tensors

class CurvatureTensor:
    """Λ²-valued skew endomorphisms, antisymmetric in both index pairs."""
    __slots__ = ("data", "backend")

    def __init__(self, data: np.ndarray, backend: str = "exact"):
        if data.shape != (NPAIRS, NPAIRS):
            raise ValueError("curvature data must be 21 x 21")
        self.data = data
        self.backend = backend

    @classmethod
    def zero(cls, backend: str = "exact") -> "CurvatureTensor":
        d = np.empty((NPAIRS, NPAIRS), dtype=object if backend == "exact" else np.float64)
        d[...] = _zero(backend)
        return cls(d, backend)

    @classmethod
    def from_form_slices(cls, slices: Sequence[Form]) -> "CurvatureTensor":
        """slices[p] is the endomorphism 2-form at the p-th sorted form pair."""
        if len(slices) != NPAIRS:
            raise ValueError("need one 2-form per sorted index pair")
        backend = slices[0].backend
        t = cls.zero(backend)
        for p, f in enumerate(slices):
            for q, pq in enumerate(PAIRS):
                t.data[p, q] = f[pq]
        return t

    @classmethod
    def from_function(cls, fn, backend: str = "exact") -> "CurvatureTensor":
        """Entry (a, b, c, d) with a < b, c < d taken from fn(a, b, c, d)."""
        t = cls.zero(backend)
        for p, (a, b) in enumerate(PAIRS):
            for q, (c, d) in enumerate(PAIRS):
                t.data[p, q] = fn(a, b, c, d)
        return t

    def __getitem__(self, idx) -> Scalar:
        a, b, c, d = idx
        p, s1 = _pair_sign(a, b)
        q, s2 = _pair_sign(c, d)
        if s1 == 0 or s2 == 0:
            return _zero(self.backend)
        return s1 * s2 * self.data[p, q]

    def form_slice(self, a: int, b: int) -> Form:
        """The endomorphism R(e_a, e_b) as a 2-form in its own slots."""
        p, s = _pair_sign(a, b)
        if s == 0:
            return Form.zero(2, self.backend)
        return Form(2, {pq: s * self.data[p, q] for q, pq in enumerate(PAIRS)}, self.backend)

    def spinor_slice(self, c: int, d: int) -> Form:
        """The 2-form (a, b) ↦ R[a, b, c, d] that acts on spinors."""
        q, s = _pair_sign(c, d)
        if s == 0:
            return Form.zero(2, self.backend)
        return Form(2, {pq: s * self.data[p, q] for p, pq in enumerate(PAIRS)}, self.backend)

    def swap_pairs(self) -> "CurvatureTensor":
        return CurvatureTensor(self.data.T.copy(), self.backend)

    def __add__(self, o: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.data + o.data, self.backend)

    def __sub__(self, o: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.data - o.data, self.backend)

    def scale(self, c) -> "CurvatureTensor":
        return CurvatureTensor(self.data * c, self.backend)

    def __eq__(self, o) -> bool:
        return isinstance(o, CurvatureTensor) and bool(np.all(self.data == o.data))

    __hash__ = None

    def max_abs(self):
        return max((abs(v) for v in self.data.flat), default=_zero(self.backend))

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(abs(v) <= atol for v in self.data.flat)


def four_form_tensor(dh: Form) -> CurvatureTensor:
    """A 4-form seen as a pair-indexed tensor dH[a, b, c, d]."""
    if dh.grade != 4:
        raise GradeError("need a 4-form")
    return CurvatureTensor.from_function(lambda a, b, c, d: dh[(a, b, c, d)], dh.backend)


def rminus_from_rplus(rplus: CurvatureTensor, dh: Form) -> CurvatureTensor:
    """R⁻[i,j,k,l] = R⁺[k,l,i,j] − ½dH_{ijkl}."""
    half = Fraction(1, 2) if rplus.backend == "exact" else 0.5
    return rplus.swap_pairs() - four_form_tensor(dh).scale(half)


def rplus_from_rminus(rminus: CurvatureTensor, dh: Form) -> CurvatureTensor:
    """Inverse of ``rminus_from_rplus``: R⁺[a,b,c,d] = R⁻[c,d,a,b] + ½dH_{abcd}."""
    half = Fraction(1, 2) if rminus.backend == "exact" else 0.5
    return rminus.swap_pairs() + four_form_tensor(dh).scale(half)


# --------------------------------------------------------------- F blocks

def _need_lie(F: LieValuedForm, G: LieValuedForm) -> None:
    if F.lie != G.lie:
        raise ValueError("mismatched Lie coefficient spaces")


def lie_wedge_pairing(F: LieValuedForm, G: LieValuedForm) -> Form:
    """⟨F∧G⟩ = Σ_a ε_a F_a ∧ G_a."""
    _need_lie(F, G)
    out = Form.zero(F.grade + G.grade, F.backend)
    for a in range(F.lie.dim):
        out = out + wedge(F.components[a], G.components[a]) * F.lie.weight(a)
    return out


def _dense_lie(F: LieValuedForm):
    if F.grade != 2:
        raise GradeError("need a Lie-valued 2-form")
    return [dense2(c) for c in F.components]


def fdagger_wedge_f(F: LieValuedForm) -> CurvatureTensor:
    """F†∧F as a curvature-layout tensor T[i, j, k, l] = f^l_{kij}.

    f^l_{kij} = ⟨F_{jl}, F_{ik}⟩ − ⟨F_{il}, F_{jk}⟩.
    """
    m = _dense_lie(F)
    w = [F.lie.weight(a) for a in range(F.lie.dim)]

    def pair(p, q, r, s):
        return sum((w[a] * m[a][p - 1][q - 1] * m[a][r - 1][s - 1] for a in range(len(w))),
                   _zero(F.backend))

    return CurvatureTensor.from_function(
        lambda i, j, k, l: pair(j, l, i, k) - pair(i, l, j, k), F.backend)


def f_wedge_fdagger(F: LieValuedForm) -> Tuple[Tuple[Form, ...], ...]:
    """𝔽∧𝔽† as End(adP)-valued 2-forms: entry [γ][β] is the 2-form taking r_β to r_γ.

    h^γ_β(X, Y) = ε_β Σ_a (F^β_{Xa} F^γ_{Ya} − F^β_{Ya} F^γ_{Xa}).
    """
    m = _dense_lie(F)
    n = F.lie.dim
    out = []
    for g in range(n):
        row = []
        for b in range(n):
            wb = F.lie.weight(b)
            mat = [[wb * sum((m[b][x][a] * m[g][y][a] - m[b][y][a] * m[g][x][a]
                              for a in range(DIM)), _zero(F.backend))
                    for y in range(DIM)] for x in range(DIM)]
            row.append(form2(mat, F.backend))
        out.append(tuple(row))
    return tuple(out)


GradTensor = Tuple[LieValuedForm, ...]


def _check_grad(grad: GradTensor, F: LieValuedForm) -> None:
    if len(grad) != DIM:
        raise ValueError("a derivative tensor has one Lie-valued 2-form per direction")
    for g in grad:
        _need_lie(g, F)
        if g.grade != 2:
            raise GradeError("derivative slices must be 2-forms")


def _correction(F: LieValuedForm, h: Form, z: int, fn) -> LieValuedForm:
    """Lie-valued 2-form (X, Y) ↦ fn(Fd, hz, x, y) per Lie component."""
    hz = dense2(interior(e(z, backend=h.backend), h))
    comps = []
    for fd in _dense_lie(F):
        mat = [[fn(fd, hz, x, y) for y in range(DIM)] for x in range(DIM)]
        comps.append(form2(mat, F.backend))
    return LieValuedForm(tuple(comps), F.lie)


def _F_of(fd, hz, v: int, w: int, zero):
    """F(V, H(Z, W)) = Σ_a F_{V a} H_{Z W a}; hz is the dense i_{e_Z}H."""
    return sum((fd[v][a] * hz[w][a] for a in range(DIM)), zero)


def nabla_minus_F(grad: GradTensor, F: LieValuedForm, h: Form) -> GradTensor:
    """∇⁻_Z F = ∇_Z F + ½F(H(Z,X), Y) + ½F(X, H(Z,Y)), from the Levi-Civita value ∇F."""
    _check_grad(grad, F)
    z0 = _zero(F.backend)
    half = Fraction(1, 2) if F.backend == "exact" else 0.5
    out = []
    for z in range(1, DIM + 1):
        corr = _correction(F, h, z, lambda fd, hz, x, y:
                           half * (-_F_of(fd, hz, y, x, z0) + _F_of(fd, hz, x, y, z0)))
        out.append(grad[z - 1] + corr)
    return tuple(out)


def nabla_plus_F(grad: GradTensor, F: LieValuedForm, h: Form) -> GradTensor:
    """∇⁺_Z F = ∇_Z F − ½F(H(Z,X), Y) − ½F(X, H(Z,Y))."""
    _check_grad(grad, F)
    z0 = _zero(F.backend)
    half = Fraction(1, 2) if F.backend == "exact" else 0.5
    out = []
    for z in range(1, DIM + 1):
        hz = dense2(interior(e(z, backend=h.backend), h))
        comps = []
        for a, fd in enumerate(_dense_lie(F)):
            mat = [[z0] * DIM for _ in range(DIM)]
            for x in range(DIM):
                for y in range(DIM):
                    s1 = sum((hz[x][b] * fd[b][y] for b in range(DIM)), z0)
                    s2 = sum((fd[x][b] * hz[y][b] for b in range(DIM)), z0)
                    mat[x][y] = -half * (s1 + s2)
            comps.append(grad[z - 1].components[a] + form2(mat, F.backend))
        out.append(LieValuedForm(tuple(comps), F.lie))
    return tuple(out)


def i_block(grad: GradTensor, F: LieValuedForm, h: Form) -> GradTensor:
    """𝕀(Z)(X, Y) = (∇⁻_Z F)(X, Y) + F(X, H(Y, Z)) − F(Y, H(X, Z))."""
    z0 = _zero(F.backend)
    minus = nabla_minus_F(grad, F, h)
    out = []
    for z in range(1, DIM + 1):
        # H_{Y Z a} = (i_{e_Z}H)_{a Y}
        corr = _correction(F, h, z, lambda fd, hz, x, y:
                           sum((fd[x][a] * hz[a][y] - fd[y][a] * hz[a][x]
                                for a in range(DIM)), z0))
        out.append(minus[z - 1] + corr)
    return tuple(out)


def rho_bismut(rplus: CurvatureTensor, model: Optional[G2Model] = None) -> Tuple[Form, ...]:
    """ρ(X, Y) = ½ Σ_j (R⁺(X, Y) e_j) × e_j, as 7 two-forms (one per output component)."""
    m = _model(model, rplus.backend)
    half = Fraction(1, 2) if rplus.backend == "exact" else 0.5
    basis = [e(j, backend=rplus.backend) for j in range(1, DIM + 1)]
    crosses = [[cross(basis[k], basis[j], m) for j in range(DIM)] for k in range(DIM)]
    rows = [dict() for _ in range(DIM)]
    for p, (x, y) in enumerate(PAIRS):
        acc = [_zero(rplus.backend)] * DIM
        for j in range(1, DIM + 1):
            for k in range(1, DIM + 1):
                # R(e_x, e_y) e_j = Σ_k R[x, y, j, k] e_k
                r = rplus[(x, y, j, k)]
                if r == 0:
                    continue
                cp = crosses[k - 1][j - 1].components()
                acc = [acc[l] + r * cp[l] for l in range(DIM)]
        for l in range(DIM):
            rows[l][(x, y)] = half * acc[l]
    return tuple(Form(2, r, rplus.backend) for r in rows)


# ------------------------------------------------------------- residuals

@dataclass(frozen=True)
class StructureConstants:
    """[r_α, r_β] = Σ_γ c[α][β][γ] r_γ; None or empty means abelian."""
    c: Optional[Tuple] = None

    def ad(self, x: Sequence, beta: int, gamma: int):
        if not self.c:
            return 0
        return sum(x[a] * self.c[a][beta][gamma] for a in range(len(x)))


@dataclass(frozen=True)
class CoupledResiduals:
    rho_term: Tuple[Form, ...]
    nabla_term: Tuple[LieValuedForm, ...]
    bracket_term: Tuple[Tuple[Form, ...], ...]
    bianchi_term: Form

    def norms(self) -> dict:
        def mx(vals):
            return max(vals, default=0)
        return {
            "rho": mx(f.max_abs() for f in self.rho_term),
            "nabla": mx(g.max_abs() for g in self.nabla_term),
            "bracket": mx(f.max_abs() for row in self.bracket_term for f in row),
            "bianchi": self.bianchi_term.max_abs(),
        }

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(v <= atol for v in self.norms().values())


def coupled_residuals(rplus: CurvatureTensor, F: LieValuedForm, h: Form,
                      grad: Optional[GradTensor], dh: Form,
                      model: Optional[G2Model] = None,
                      bracket: StructureConstants = StructureConstants()) -> CoupledResiduals:
    """Left-hand sides of the four coupled G2-instanton equations.

    1. ρ + ⟨F, (F⌟φ)♯⟩
    2. (∇⁺F)⌟φ, one Lie-valued 1-form per derivative direction
    3. [F⌟φ, ·] − (𝔽∧𝔽†)⌟φ, as End(adP)-valued 1-forms
    4. dH − ⟨F∧F⟩
    """
    m = _model(model, F.backend)
    backend = F.backend
    if grad is None:
        grad = tuple(LieValuedForm.zero(2, F.lie) for _ in range(DIM))
    fphi = F.map(lambda c: contract(c, m.phi))
    rho = rho_bismut(rplus, m)
    fphi_vec = [c.components() for c in fphi.components]
    r1 = []
    for l in range(DIM):
        coeffs = {}
        for (x, y) in PAIRS:
            s = _zero(backend)
            for a in range(F.lie.dim):
                s += F.lie.weight(a) * F.components[a][(x, y)] * fphi_vec[a][l]
            coeffs[(x, y)] = s
        r1.append(rho[l] + Form(2, coeffs, backend))
    nplus = nabla_plus_F(grad, F, h)
    r2 = tuple(g.map(lambda c: contract(c, m.phi)) for g in nplus)
    hh = f_wedge_fdagger(F)
    r3 = []
    n = F.lie.dim
    for g in range(n):
        row = []
        for b in range(n):
            ad = Form.from_vector(
                [bracket.ad([fphi_vec[a][l] for a in range(n)], b, g) for l in range(DIM)],
                backend)
            row.append(ad - contract(hh[g][b], m.phi))
        r3.append(tuple(row))
    r4 = dh - lie_wedge_pairing(F, F)
    return CoupledResiduals(tuple(r1), r2, tuple(r3), r4)


def first_residual_from_spinor_slices(rplus: CurvatureTensor, F: LieValuedForm,
                                      model: Optional[G2Model] = None) -> Tuple[Form, ...]:
    """Second route to residual 1: −(R⁺(e_k, e_l) − ⟨F_{kl}, F⟩)⌟φ over all pairs (k, l).

    The bracketed 2-form is the spinor slice of R⁻ − F†∧F when dH = ⟨F∧F⟩.
    """
    m = _model(model, F.backend)
    rows = [dict() for _ in range(DIM)]
    for (k, l) in PAIRS:
        s = rplus.form_slice(k, l)
        for a in range(F.lie.dim):
            s = s - F.components[a] * (F.lie.weight(a) * F.components[a][(k, l)])
        v = (-contract(s, m.phi)).components()
        for i in range(DIM):
            rows[i][(k, l)] = v[i]
    return tuple(Form(2, r, F.backend) for r in rows)


@dataclass(frozen=True)
class SpinorResiduals:
    curvature_block: Tuple[np.ndarray, ...]
    lie_block: Tuple[np.ndarray, ...]

    def norms(self) -> dict:
        def mx(ss):
            return max((abs(x) for s in ss for x in s), default=0)
        return {"curvature": mx(self.curvature_block), "lie": mx(self.lie_block)}

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(is_zero_spinor(s, atol) for s in self.curvature_block + self.lie_block)


# ---------------------------------------------------------------- samples

@dataclass(frozen=True)
class GravitinoSample:
    rplus: CurvatureTensor
    F: LieValuedForm
    dH: Form
    rminus: CurvatureTensor
    H: Form
    grad: GradTensor

    @property
    def backend(self) -> str:
        return self.F.backend

    @classmethod
    def build(cls, rplus: CurvatureTensor, F: LieValuedForm, H: Optional[Form] = None,
              grad: Optional[GradTensor] = None, extra_dh: Optional[Form] = None):
        dh = lie_wedge_pairing(F, F)
        if extra_dh is not None:
            dh = dh + extra_dh
        H = Form.zero(3, F.backend) if H is None else H
        if grad is None:
            grad = tuple(LieValuedForm.zero(2, F.lie) for _ in range(DIM))
        return cls(rplus, F, dh, rminus_from_rplus(rplus, dh), H, grad)


def random_gravitino_sample(rng: random.Random, lie: Optional[LieCoeff] = None,
                            with_gradient: bool = False, break_bianchi: bool = False,
                            backend: str = "exact") -> GravitinoSample:
    """Pointwise data meeting the gravitino hypotheses by construction.

    R⁺ and F take values in Λ²₁₄.  With ``with_gradient`` a random H is
    drawn, ∇⁺F is drawn g2-valued and ∇F is recovered from it.  With
    ``break_bianchi`` a random 4-form is added to dH.
    """
    lie = LieCoeff((1, -1), backend=backend) if lie is None else lie
    rplus = CurvatureTensor.from_form_slices([random_g2_form(rng, backend)
                                              for _ in range(NPAIRS)])
    F = LieValuedForm(tuple(random_g2_form(rng, backend) for _ in range(lie.dim)), lie)
    H = grad = None
    if with_gradient:
        H = assemble_H(random_torsion(rng, backend))
        target = tuple(LieValuedForm(tuple(random_g2_form(rng, backend)
                                           for _ in range(lie.dim)), lie)
                       for _ in range(DIM))
        zero = tuple(LieValuedForm.zero(2, lie) for _ in range(DIM))
        shift = nabla_plus_F(zero, F, H)
        grad = tuple(t - s for t, s in zip(target, shift))
    extra = None
    if break_bianchi:
        extra = random_form(rng, 4, backend)
        if extra.is_zero():
            extra = e(1, 2, 3, 4, backend=backend)
    return GravitinoSample.build(rplus, F, H, grad, extra)


def sample_residuals(s: GravitinoSample, model: Optional[G2Model] = None) -> CoupledResiduals:
    return coupled_residuals(s.rplus, s.F, s.H, s.grad, s.dH, model)


def spinor_coupled_check(s: GravitinoSample) -> SpinorResiduals:
    """(R⁻ − F†∧F)·η₀ over every spinor slice and (𝔽∧𝔽†)·η₀ over every entry."""
    eta = eta0(s.backend)
    block = s.rminus - fdagger_wedge_f(s.F)
    curv = tuple(act(block.spinor_slice(k, l), eta) for (k, l) in PAIRS)
    lie = tuple(act(f, eta) for row in f_wedge_fdagger(s.F) for f in row)
    return SpinorResiduals(curv, lie)


def run_sample_suite(n: int, seed: int = 0, threads: int = 1, with_gradient: bool = False,
                     break_bianchi: bool = False, backend: str = "exact") -> list[dict]:
    """Generate and check ``n`` samples; result order follows the sample index."""
    def one(i: int) -> dict:
        rng = random.Random(f"{seed}:{i}")
        s = random_gravitino_sample(rng, with_gradient=with_gradient,
                                    break_bianchi=break_bianchi, backend=backend)
        res = sample_residuals(s).norms()
        res.update(spinor_coupled_check(s).norms())
        return {k: float(v) for k, v in res.items()}

    if threads <= 1:
        return [one(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(n)))


# ------------------------------------------------------------------ tower

def tower_rank(n: int, r1: int, depth: int) -> list[int]:
    """r_1 = r1, r_k = n + r_{k−1}(r_{k−1} − 1), kept within int64."""
    if n < 1 or r1 < 1 or depth < 1:
        raise ValueError("n, r1 and depth must all be at least 1")
    if r1 > INT64_MAX:
        raise OverflowError("r1 exceeds int64; last safe index 0")
    seq = [r1]
    while len(seq) < depth:
        r = seq[-1]
        nxt = n + r * (r - 1)
        if nxt > INT64_MAX:
            raise OverflowError(
                f"rank at index {len(seq) + 1} exceeds int64; last safe index {len(seq)}")
        seq.append(nxt)
    return seq


def tower_double(F: LieValuedForm) -> LieValuedForm:
    """(F, F) on the doubled Lie space with pairing signature (ε, −ε)."""
    return LieValuedForm(F.components + F.components, F.lie.doubled())


def doubled_sample(F: LieValuedForm) -> GravitinoSample:
    """One tower step: R⁺ = 0, dH = 0, doubled gauge field."""
    D = tower_double(F)
    return GravitinoSample.build(CurvatureTensor.zero(F.backend), D)
