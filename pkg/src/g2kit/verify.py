"""Named invariant checks grouped into suites, shared by the CLI and tests.

Each check returns (residual, scale).  On the exact backend a check passes
iff the residual is exactly zero; on f64 it passes if
residual ≤ max(atol, rtol·scale).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Tuple

from . import ccy, coupled, g2algebra as g2, generalized as gen, spin7
from .exterior import (DIM, Form, contract, e, hodge, inner, interior, norm2, volume,
                       wedge)
from .sampling import random_form, random_g2_form, random_torsion, rational

SUITES = ("forms", "g2", "spin", "generalized", "coupled", "ccy")


@dataclass
class Context:
    backend: str = "exact"
    seed: int = 0
    trials: int = 20
    rtol: float = 1e-12
    atol: float = 1e-14
    threads: int = 1

    def rng(self, check_id: str) -> random.Random:
        return random.Random(f"{self.seed}:{check_id}")


@dataclass(frozen=True)
class Check:
    id: str
    suite: str
    anchor: str
    fn: Callable[[Context, random.Random], Tuple[object, object]]


@dataclass
class CheckResult:
    id: str
    anchor: str
    passed: bool
    residual: float
    elapsed: float

    def to_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor,
                "status": "pass" if self.passed else "fail",
                "max_residual": self.residual, "elapsed": round(self.elapsed, 4)}


@dataclass
class VerifyReport:
    suite: str
    backend: str
    seed: int
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "backend": self.backend, "seed": self.seed,
                "passed": self.passed, "checks": [r.to_dict() for r in self.results]}


REGISTRY: Dict[str, Check] = {}


def check(suite: str, anchor: str):
    def deco(fn):
        cid = fn.__name__
        REGISTRY[cid] = Check(cid, suite, anchor, fn)
        return fn
    return deco


def _mx(*vals):
    out = 0
    for v in vals:
        out = max(out, abs(v))
    return out


def _fdiff(a: Form, b: Form):
    return (a - b).max_abs(), max(a.max_abs(), b.max_abs(), 1)


def _sdiff(s, t):
    return max((abs(x - y) for x, y in zip(s, t)), default=0)


# ------------------------------------------------------------------ forms

@check("forms", "Hodge star of the model 3-form is the model 4-form")
def hodge_phi_is_psi(ctx, rng):
    m = g2.flat_model(ctx.backend)
    return _fdiff(hodge(m.phi), m.psi)


@check("forms", "Hodge star squares to the identity in dimension 7")
def hodge_involution(ctx, rng):
    r = 0
    for _ in range(ctx.trials):
        for k in range(DIM + 1):
            a = random_form(rng, k, ctx.backend)
            r = max(r, (hodge(hodge(a)) - a).max_abs())
    return r, 16


@check("forms", "model forms have norm squared 7 and phi∧psi = 7 vol")
def model_norms(ctx, rng):
    m = g2.flat_model(ctx.backend)
    top = wedge(m.phi, m.psi) - volume(ctx.backend) * 7
    return _mx(norm2(m.phi) - 7, norm2(m.psi) - 7, top.max_abs()), 7


@check("forms", "interior product is an antiderivation")
def interior_antiderivation(ctx, rng):
    r = 0
    for _ in range(ctx.trials):
        ka, kb = rng.randint(1, 3), rng.randint(1, 3)
        a, b = random_form(rng, ka, ctx.backend), random_form(rng, kb, ctx.backend)
        x = random_form(rng, 1, ctx.backend)
        lhs = interior(x, wedge(a, b))
        rhs = wedge(interior(x, a), b) + wedge(a, interior(x, b)) * (-1) ** ka
        r = max(r, (lhs - rhs).max_abs())
    return r, 1e4


@check("forms", "star(F wedge star H) equals the contraction F into H")
def star_wedge_star_is_contraction(ctx, rng):
    r = 0
    for _ in range(ctx.trials):
        F, H = random_form(rng, 2, ctx.backend), random_form(rng, 3, ctx.backend)
        r = max(r, (hodge(wedge(F, hodge(H))) - contract(F, H)).max_abs())
    return r, 1e3


@check("forms", "JSON round trip of forms")
def json_roundtrip(ctx, rng):
    bad = 0
    for _ in range(ctx.trials):
        for k in range(DIM + 1):
            a = random_form(rng, k, ctx.backend)
            if Form.from_json(a.to_json()) != a:
                bad += 1
    return bad, 1


# --------------------------------------------------------------------- g2

@check("g2", "the model 3-form induces the identity metric")
def metric_identity(ctx, rng):
    g = g2.metric_from_phi(g2.phi0(ctx.backend))
    return max(abs(g[i][j] - (1 if i == j else 0)) for i in range(DIM) for j in range(DIM)), 1


@check("g2", "Lambda2 splits with ranks 7 and 14; eigenvalues 2 and -1 under psi")
def lambda2_split(ctx, rng):
    psi = g2.psi0(ctx.backend)
    r7 = g2.rank([b.to_backend("exact") for b in g2.lambda2_7_basis()])
    r14 = g2.rank(g2.lambda2_14_basis())
    res = abs(r7 - 7) + abs(r14 - 14)
    for b in g2.lambda2_7_basis(ctx.backend):
        res = max(res, (contract(b, psi) - b * 2).max_abs())
    for b in g2.lambda2_14_basis(ctx.backend):
        res = max(res, (contract(b, psi) + b).max_abs(),
                  wedge(b, psi).max_abs(), contract(b, g2.phi0(ctx.backend)).max_abs())
    return res, 4


@check("g2", "Lambda3 decomposition recomposes exactly and is orthogonal")
def lambda3_split(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        g = random_form(rng, 3, ctx.backend)
        p1, p7, p27 = g2.decompose3(g)
        res = max(res, (p1 + p7 + p27 - g).max_abs(), abs(inner(p1, p7)),
                  abs(inner(p1, p27)), abs(inner(p7, p27)))
    return res, 1e3


@check("g2", "torsion triple round trip through H")
def torsion_roundtrip(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        back = g2.decompose_H(g2.assemble_H(t))
        res = max(res, abs(back.tau0 - t.tau0), (back.tau1 - t.tau1).max_abs(),
                  (back.tau3 - t.tau3).max_abs())
    return res, 1e2


@check("g2", "|H|^2 = 7/36 tau0^2 + 4|tau1|^2 + |tau3|^2")
def h_norm_formula(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        res = max(res, abs(norm2(g2.assemble_H(t)) - g2.h_norm2_formula(t)))
    return res, 1e4


@check("g2", "sum_j (e_j ⌟ H)∧(e_j ⌟ phi) = tau0 psi + 3 tau1∧phi + star tau3")
def dphi_identity(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        res = max(res, (g2.dphi_from_H(g2.assemble_H(t)) - g2.dphi_from_torsion(t)).max_abs())
    return res, 1e3


@check("g2", "cross product is alternating with unit basis products")
def cross_product(ctx, rng):
    res = 0
    basis = [e(i, backend=ctx.backend) for i in range(1, DIM + 1)]
    for i, j in combinations(range(DIM), 2):
        res = max(res, abs(norm2(g2.cross(basis[i], basis[j])) - 1))
    for _ in range(ctx.trials):
        x, y, z = (random_form(rng, 1, ctx.backend) for _ in range(3))
        v = inner(g2.cross(x, y), z)
        res = max(res, abs(v + inner(g2.cross(y, x), z)), abs(v - inner(g2.cross(y, z), x)))
    return res, 1e3


@check("g2", "flat SU(3) and SU(2) data lift to the model structure")
def su_lifts(ctx, rng):
    phi, psi = g2.su3_to_g2(*g2.flat_su3_data(ctx.backend))
    res = max((phi - g2.phi0(ctx.backend)).max_abs(), (psi - g2.psi0(ctx.backend)).max_abs())
    data = g2.flat_su2_data(ctx.backend)
    p2 = g2.su2_to_g2(*data)
    g = g2.metric_from_phi(p2)
    res = max(res, max(abs(g[i][j] - (1 if i == j else 0))
                       for i in range(DIM) for j in range(DIM)),
              (hodge(p2) - g2.su2_star_phi(*data)).max_abs())
    return res, 1


# ------------------------------------------------------------------- spin

@check("spin", "Clifford relations e_i e_j + e_j e_i = -2 delta_ij")
def clifford_relations(ctx, rng):
    res = 0
    for i in range(1, DIM + 1):
        for j in range(i, DIM + 1):
            a, b = spin7.cliff_generator(i, ctx.backend), spin7.cliff_generator(j, ctx.backend)
            want = spin7.identity_op(ctx.backend) * (-2 if i == j else 0)
            res = max(res, max(abs(x) for x in (a.dot(b) + b.dot(a) - want).flat))
    return res, 1


@check("spin", "phi·eta0 = -7 eta0 and (X ⌟ psi)·eta0 = 4 X·eta0")
def spinor_constants(ctx, rng):
    b = ctx.backend
    eta = spin7.eta0(b)
    res = _sdiff(spin7.act(g2.phi0(b), eta), eta * -7)
    for i in range(1, DIM + 1):
        x = e(i, backend=b)
        lhs = spin7.act(interior(x, g2.psi0(b)), eta)
        res = max(res, _sdiff(lhs, spin7.act(x, eta) * 4))
    return res, 7


@check("spin", "Lambda3_27 annihilates eta0 under both actions")
def lambda27_annihilation(ctx, rng):
    eta = spin7.eta0(ctx.backend)
    res = 0
    for g in g2.lambda3_27_basis(ctx.backend):
        res = max(res, max(abs(x) for x in spin7.act(g, eta)),
                  max(abs(x) for x in spin7.slashed_act(g, eta)))
    return res, 1


@check("spin", "slashed action eigenvalues -21/2 on phi and 6 on X ⌟ psi")
def slashed_eigenvalues(ctx, rng):
    b = ctx.backend
    eta = spin7.eta0(b)
    res = _sdiff(spin7.slashed_act(g2.phi0(b), eta), eta * Fraction(-21, 2)
                 if b == "exact" else eta * -10.5)
    for i in range(1, DIM + 1):
        x = e(i, backend=b)
        lhs = spin7.slashed_act(interior(x, g2.psi0(b)), eta)
        res = max(res, _sdiff(lhs, spin7.act(x, eta) * 6))
    return res, 11


@check("spin", "the 2-forms killing eta0 form a 14-dimensional kernel")
def g2_kernel_dimension(ctx, rng):
    return abs(spin7.g2_kernel_dimension(ctx.backend) - 14), 1


@check("spin", "commutator of so7 images is the so7 image of the commutator form")
def so7_commutator(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        a, c = random_form(rng, 2, ctx.backend), random_form(rng, 2, ctx.backend)
        lhs = spin7.commutator(spin7.so7_operator(a), spin7.so7_operator(c))
        rhs = spin7.so7_operator(spin7.commutator_form(a, c))
        res = max(res, max(abs(x) for x in (lhs - rhs).flat))
    return res, 1e4


@check("spin", "spinor-to-form map sends eta0 to the model 3-form")
def spinor_to_form(ctx, rng):
    return _fdiff(spin7.phi_from_spinor(spin7.eta0(ctx.backend)), g2.phi0(ctx.backend))


# ------------------------------------------------------------ generalized

@check("generalized", "trace of H^2 equals 6|H|^2")
def h_squared_trace(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        h = random_form(rng, 3, ctx.backend)
        m = gen.h_squared(h)
        res = max(res, abs(sum(m[i, i] for i in range(DIM)) - 6 * norm2(h)))
    return res, 1e4


@check("generalized", "two evaluation routes of the scalar-curvature identity agree")
def scalar_routes(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        args = [rational(rng) for _ in range(5)]
        if ctx.backend == "f64":
            args = [float(a) for a in args]
        res = max(res, abs(gen.scalar_closed_form(*args) - gen.scalar_via_splus(*args)))
    return res, 1e3


@check("generalized", "heterotic consistency set gives S+ = 49/36 tau0^2")
def heterotic_splus(ctx, rng):
    res = 0
    for _ in range(ctx.trials):
        t0, n1, d1, n3 = (rational(rng) for _ in range(4))
        nf = -(Fraction(7, 6) * t0 ** 2 + 12 * n1 + 4 * d1 - n3)
        rg = gen.heterotic_Rg(t0, n1, d1, n3)
        nh = Fraction(7, 36) * t0 ** 2 + 4 * n1 + n3
        s = gen.splus_from_numbers(rg, nh, nf, 4 * d1, 16 * n1)
        res = max(res, abs(s - Fraction(49, 36) * t0 ** 2))
    return float(res) if ctx.backend == "f64" else res, 1e3


@check("generalized", "derivative-free Yang-Mills identity vanishes")
def ym_identity(ctx, rng):
    res = 0
    lie = gen.LieCoeff((1, -1), backend=ctx.backend)
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        F = gen.LieValuedForm((random_form(rng, 2, ctx.backend),
                               random_form(rng, 2, ctx.backend)), lie)
        res = max(res, gen.ym_algebraic_identity(F, t).max_abs())
    return res, 1e3


@check("generalized", "Yang-Mills residual equals -tau0 (pi7 F) ⌟ phi")
def ym_residual_structure(ctx, rng):
    res = 0
    lie = gen.LieCoeff((1,), backend=ctx.backend)
    phi = g2.phi0(ctx.backend)
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        F = gen.LieValuedForm((random_form(rng, 2, ctx.backend),), lie)
        r = gen.ym_algebraic_identity(F, t).components[0]
        p7, _ = g2.decompose2(F.components[0])
        res = max(res, (r + contract(p7, phi) * t.tau0).max_abs())
    return res, 1e3


@check("generalized", "instanton case of the Yang-Mills identity")
def ym_instanton_case(ctx, rng):
    res = 0
    lie = gen.LieCoeff((1,), backend=ctx.backend)
    for _ in range(ctx.trials):
        t = random_torsion(rng, ctx.backend)
        F = gen.LieValuedForm((random_g2_form(rng, ctx.backend),), lie)
        res = max(res, gen.ym_algebraic_identity(F, t).max_abs())
    return res, 1e3


@check("generalized", "S7 pairing scale is -9/(4 kappa^2)")
def s7_scale(ctx, rng):
    res = 0
    for k in (1, 2, Fraction(1, 3), Fraction(-5, 2)):
        kk = float(k) if ctx.backend == "f64" else k
        res = max(res, abs(gen.s7_pairing_scale(kk) * kk ** 2 + Fraction(9, 4)))
    return float(res) if ctx.backend == "f64" else res, 10


# ---------------------------------------------------------------- coupled

def _sample_max(ctx, rng, **kw):
    res = 0
    for _ in range(max(1, ctx.trials // 4)):
        s = coupled.random_gravitino_sample(rng, backend=ctx.backend, **kw)
        n1 = coupled.sample_residuals(s).norms()
        n2 = coupled.spinor_coupled_check(s).norms()
        res = max([res] + list(n1.values()) + list(n2.values()))
    return res


@check("coupled", "gravitino samples solve the coupled instanton system")
def gravitino_samples(ctx, rng):
    return _sample_max(ctx, rng), 1e4


@check("coupled", "gravitino samples with a g2-valued gradient")
def gravitino_samples_gradient(ctx, rng):
    return _sample_max(ctx, rng, with_gradient=True), 1e5


@check("coupled", "a Bianchi-broken sample is detected")
def bianchi_broken_detected(ctx, rng):
    s = coupled.random_gravitino_sample(rng, break_bianchi=True, backend=ctx.backend)
    n = coupled.spinor_coupled_check(s).norms()["curvature"]
    tol = 0 if ctx.backend == "exact" else 1e-9
    return (0 if n > tol else 1), 1


@check("coupled", "F-dagger wedge F identity under the Bianchi identity")
def fdagger_identity(ctx, rng):
    lie = gen.LieCoeff((1, -1), backend=ctx.backend)
    F = gen.LieValuedForm((random_form(rng, 2, ctx.backend), random_form(rng, 2, ctx.backend)),
                          lie)
    fd = coupled.fdagger_wedge_f(F)
    dh = coupled.lie_wedge_pairing(F, F)
    half = Fraction(1, 2) if ctx.backend == "exact" else 0.5
    res = 0
    for l in range(1, DIM + 1):
        for k in range(1, DIM + 1):
            for i, j in combinations(range(1, DIM + 1), 2):
                p = sum(lie.weight(a) * F.components[a][(i, j)] * F.components[a][(l, k)]
                        for a in range(2))
                res = max(res, abs(fd[(i, j, k, l)] + half * dh[(k, l, i, j)] + p))
    return res, 1e3


@check("coupled", "I-block equals the plus-connection derivative of F")
def i_block_reconciliation(ctx, rng):
    lie = gen.LieCoeff((1,), backend=ctx.backend)
    F = gen.LieValuedForm((random_form(rng, 2, ctx.backend),), lie)
    H = random_form(rng, 3, ctx.backend)
    grad = tuple(gen.LieValuedForm((random_form(rng, 2, ctx.backend),), lie)
                 for _ in range(DIM))
    a, b = coupled.i_block(grad, F, H), coupled.nabla_plus_F(grad, F, H)
    return max((x - y).max_abs() for x, y in zip(a, b)), 1e3


@check("coupled", "tower ranks and one doubling step")
def tower(ctx, rng):
    res = abs(coupled.tower_rank(7, 14, 2)[-1] - 189)
    F = gen.LieValuedForm((random_g2_form(rng, ctx.backend),),
                          gen.LieCoeff((1,), backend=ctx.backend))
    d = coupled.tower_double(F)
    res = max(res, coupled.lie_wedge_pairing(d, d).max_abs(),
              max(coupled.spinor_coupled_check(coupled.doubled_sample(F)).norms().values()))
    return res, 1e3


# -------------------------------------------------------------------- ccy

@check("ccy", "H of the contact Calabi-Yau torsion equals eps(-f0∧omega + ReOmega)")
def ccy_torsion(ctx, rng):
    res = 0
    m = ccy.coframe_model(ctx.backend)
    omega = ccy.su3_coframe_forms(ctx.backend)[0]
    for _ in range(max(1, ctx.trials // 2)):
        eps = Fraction(rng.randint(1, 16), rng.randint(1, 16))
        if ctx.backend == "f64":
            eps = float(eps)
        t = ccy.torsion_eps(eps, ctx.backend)
        h = g2.assemble_H(t, m)
        back = g2.decompose_H(h, m)
        res = max(res, (h - ccy.h_eps(eps, ctx.backend)).max_abs(),
                  abs(back.tau0 - t.tau0), (back.tau3 - t.tau3).max_abs(),
                  (g2.dphi_from_torsion(t, m) - wedge(omega, omega) * eps).max_abs(),
                  (g2.dphi_from_H(h, m) - g2.dphi_from_torsion(t, m)).max_abs())
    return res, 1e2


@check("ccy", "the coframe structure passes the G2 identities")
def ccy_g2_identities(ctx, rng):
    phi, psi = ccy.g2_eps(ctx.backend)
    g = g2.metric_from_phi(phi, ccy.COFRAME_ORIENTATION)
    omega, re, im = ccy.su3_coframe_forms(ctx.backend)
    w3 = wedge(wedge(omega, omega), omega)
    res = max(max(abs(g[i][j] - (1 if i == j else 0)) for i in range(DIM) for j in range(DIM)),
              (hodge(phi, ccy.COFRAME_ORIENTATION) - psi).max_abs(),
              abs(norm2(phi) - 7), abs(norm2(psi) - 7),
              (w3 * Fraction(1, 6) - wedge(re, im) * Fraction(1, 4)).max_abs()
              if ctx.backend == "exact" else (w3 / 6 - wedge(re, im) / 4).max_abs())
    return res, 7


@check("ccy", "connection and deviation matrices are skew")
def ccy_skew(ctx, rng):
    p = ccy.CCYParams(Fraction(1, 2), Fraction(3), Fraction(1, 3), Fraction(-2))
    bad = sum(0 if X.is_skew() else 1 for X in ccy.matrices_BCIM(p))
    bad += 0 if ccy.deviation(p).is_skew() else 1
    return bad, 1


@check("ccy", "approximate instanton scaling is quadratic in alpha")
def ccy_scaling(ctx, rng):
    grid = ccy.log_grid(1e-1, 1e-3, 9)
    res = 0.0
    for case, d, m in ((1, 1.0, None), (2, None, -2.0), (3, None, 0.0)):
        r = ccy.scaling_sweep(case, d, m, grid, threads=ctx.threads, with_ym=False)
        res = max(res, abs(r.slope - 2.0))
    # tolerance of the fitted exponent, not a float-rounding tolerance
    return (0 if res <= 0.05 else res), 1


def select(suite: str) -> List[Check]:
    if suite == "all":
        return list(REGISTRY.values())
    if suite not in SUITES:
        raise KeyError(suite)
    return [c for c in REGISTRY.values() if c.suite == suite]


def run_suite(suite: str, ctx: Context) -> VerifyReport:
    """Run the selected checks; raises RuntimeError if the Clifford convention is off."""
    spin7.convention_self_test(ctx.backend)
    report = VerifyReport(suite, ctx.backend, ctx.seed)
    for c in select(suite):
        t0 = time.perf_counter()
        resid, scale = c.fn(ctx, ctx.rng(c.id))
        dt = time.perf_counter() - t0
        if ctx.backend == "exact":
            ok = resid == 0
        else:
            ok = float(resid) <= max(ctx.atol, ctx.rtol * float(scale))
        report.results.append(CheckResult(c.id, c.anchor, ok, float(resid), dt))
    return report
