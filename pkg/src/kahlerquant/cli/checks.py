"""Catalog of identity checks run by ``kahlerquant verify``.

Every check returns residual WeylForms (pass iff all are empty) and
optionally a dict of reported values, which the cap-stability check
compares across caps.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Dict, List

from ..fedosov import (
    apply_D_C, apply_D_F, apply_D_K, classical_flat_section, delta01, exp_phi, fedosov_residual,
    holomorphic_flat_section, nabla_tilde01, nabla_tilde10, phi_sections, quantum_flat_section,
    star_product,
)
from ..fock import (
    ExtElt, FockElt, apply_D_alpha, apply_DB_alpha, bf_action, build_beta, d_alpha_curvature,
    line_gauge, module_action, vacuum,
)
from ..geometry import nabla
from ..scalar import Scalar
from ..toeplitz import (
    evaluate_at_basepoint, formal_inner_product, normal_symbol, normal_symbol_from_operator,
    toeplitz_apply,
)
from ..weyl import WeylForm, WickAlgebra, multi_indices
from .config import Caps, Config, connection_for
from .parser import parse_expression

FLAT = {"name": "flat"}
PREQUANTUM = "minus-hbar-ricci"


@dataclass
class Outcome:
    residuals: List[WeylForm] = field(default_factory=list)
    values: Dict[str, WeylForm] = field(default_factory=dict)
    caps: Dict[str, int] = field(default_factory=dict)

    def add(self, r: WeylForm):
        self.residuals.append(r)

    @property
    def passed(self) -> bool:
        return all(r.is_zero() for r in self.residuals)


@dataclass
class Ctx:
    config: Config
    caps: Caps
    rng: random.Random

    @property
    def n(self):
        return self.config.n

    @property
    def N(self):
        return self.caps.working

    def geometry(self, **over):
        g = dict(self.config.geometry)
        g.update(over)
        g.setdefault("n", 1)
        return g

    def connection(self, alpha=None, geometry=None, cap=None):
        return connection_for(geometry or self.geometry(),
                              self.config.alpha if alpha is None else alpha,
                              self.N if cap is None else cap)

    def expr(self, name, default):
        return parse_expression(self.config.expressions.get(name, default), self.n).with_cap(self.N)

    def hbar_trunc(self, a: WeylForm) -> WeylForm:
        k = 2 * self.caps.hbar_order
        return a.filter(lambda key: key[0] <= k)


@dataclass
class Check:
    id: str
    anchor: str
    run: Callable[[Ctx], Outcome]


CATALOG: Dict[str, Check] = {}


def check(id: str, anchor: str):
    def deco(fn):
        CATALOG[id] = Check(id, anchor, fn)
        return fn
    return deco


# random inputs -----------------------------------------------------------------------

def _small(rng) -> Scalar:
    re = rng.randint(-3, 3)
    im = rng.randint(-3, 3)
    return Scalar(re, im) if re or im else Scalar(1)


def random_section(rng, n, cap, terms=4, fiber=True, ybar=True, hbar=True, max_exp=2):
    out = WeylForm.zero(n, cap)
    for _ in range(terms):
        e = lambda: tuple(rng.randint(0, max_exp) for _ in range(n))  # noqa: E731
        zero = (0,) * n
        out = out + WeylForm.monomial(
            n, _small(rng), h2=2 * rng.randint(0, 1) if hbar else 0,
            y=e() if fiber else zero, yb=e() if (fiber and ybar) else zero, z=e(), zb=e(), cap=cap)
    return out


def random_polynomial(rng, n, cap, max_degree=2, holomorphic=False):
    """Polynomial in z, zbar of total degree <= max_degree with a few Gaussian coefficients."""
    out = WeylForm.zero(n, cap)
    for _ in range(3):
        while True:
            a = tuple(rng.randint(0, max_degree) for _ in range(n))
            b = (0,) * n if holomorphic else tuple(rng.randint(0, max_degree) for _ in range(n))
            if sum(a) + sum(b) <= max_degree:
                break
        out = out + WeylForm.monomial(n, _small(rng), z=a, zb=b, cap=cap)
    return out


# Fedosov side ------------------------------------------------------------------------

@check("fedosov_residual",
       "gamma_alpha solves the Fedosov equation: nabla gamma + (1/hbar) gamma*gamma = omega_hbar")
def _fedosov_residual(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    out = Outcome(caps={"connection": c.cap})
    out.add(fedosov_residual(c))
    out.values["gamma_at_basepoint"] = ctx.hbar_trunc(c.gamma_alpha.at_basepoint().truncate(ctx.N))
    return out


@check("fedosov_flatness", "D_F^2 = 0 on random sections")
def _fedosov_flatness(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    out = Outcome(caps={"connection": c.cap})
    for _ in range(20):
        t = random_section(ctx.rng, ctx.n, ctx.N)
        out.add(apply_D_F(apply_D_F(t, c), c))
    return out


def wick_oracle(f: WeylForm, g: WeylForm) -> WeylForm:
    """Flat-model Wick product sum_I (-hbar)^|I| / I! d_z^I f d_zbar^I g, by direct differentiation."""
    n = f.n
    out = f * g
    for k in range(1, 64):
        layer = WeylForm.zero(n, out.cap)
        for I in multi_indices(n, k):
            a, b = f, g
            for i, p in enumerate(I):
                for _ in range(p):
                    a = a.diff_z(i)
                    b = b.diff_zb(i)
            fact = 1
            for p in I:
                fact *= factorial(p)
            layer = layer + (a * b).scale(Scalar((-1) ** k, 0) / fact).hbar_shift(2 * k)
        if layer.is_zero():
            return out
        out = out + layer
    raise ArithmeticError("Wick oracle did not terminate")


def poisson_flat(f: WeylForm, g: WeylForm) -> WeylForm:
    """{f, g} = (i/2) omega^{i jbar}(d_i f d_jbar g - d_i g d_jbar f) with omega^{i jbar} = 2i delta."""
    out = WeylForm.zero(f.n, min(f.cap, g.cap))
    for i in range(f.n):
        out = out + f.diff_z(i) * g.diff_zb(i) - g.diff_z(i) * f.diff_zb(i)
    return -out


@check("flat_wick_product",
       "flat model: f*g equals the Wick bidifferential product; [z, zbar] = -hbar = hbar{z, zbar}")
def _flat_wick_product(ctx: Ctx) -> Outcome:
    c = ctx.connection(alpha="zero", geometry=ctx.geometry(name="flat"))
    N = ctx.N
    out = Outcome(caps={"connection": c.cap})
    n = ctx.n
    for _ in range(50):
        f = WeylForm.monomial(n, 1, z=tuple(ctx.rng.randint(0, 2) for _ in range(n)),
                              zb=tuple(ctx.rng.randint(0, 2) for _ in range(n)), cap=N)
        g = WeylForm.monomial(n, 1, z=tuple(ctx.rng.randint(0, 2) for _ in range(n)),
                              zb=tuple(ctx.rng.randint(0, 2) for _ in range(n)), cap=N)
        fg = star_product(f, g, c)
        out.add(fg - wick_oracle(f, g))
        comm = fg - star_product(g, f, c)
        # first order of the commutator is hbar times the Poisson bracket
        out.add(comm.filter(lambda k: k[0] == 2) - poisson_flat(f, g).hbar_shift(2))
    for i in range(n):
        z = WeylForm.var(n, "z", i, cap=N)
        zb = WeylForm.var(n, "zb", i, cap=N)
        comm = star_product(z, zb, c) - star_product(zb, z, c)
        out.add(comm + WeylForm.var(n, "hbar"))
        out.add(comm - poisson_flat(z, zb).hbar_shift(2))
    return out


@check("star_associativity",
       "(f*g)*h = f*(g*h) up to the hbar-order cap; O_{f*g} = O_f * O_g")
def _star_associativity(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    out = Outcome(caps={"connection": c.cap, "hbar_order": ctx.caps.hbar_order})
    rng, n, N = ctx.rng, ctx.n, ctx.N
    for _ in range(10):
        f, g, h = (random_polynomial(rng, n, N) for _ in range(3))
        fg = star_product(f, g, c)
        gh = star_product(g, h, c)
        out.add(ctx.hbar_trunc(star_product(fg, h, c) - star_product(f, gh, c)))
        out.add(quantum_flat_section(fg, c) - c.wick.star(quantum_flat_section(f, c), quantum_flat_section(g, c)))
    return out


@check("classical_section_structure",
       "classical flat section components are iterated tilde-nabla derivatives; "
       "(Phi_omega)_{1,k} = (Phi_omega)_{k,1} = 0; delta^{0,1}(Phi_omega)_{n,2} = (i/2) I_n")
def _classical_structure(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    geo, N, n = c.geo, ctx.N, ctx.n
    out = Outcome(caps={"connection": c.cap})
    f = ctx.expr("f", "z1*zb1")
    J = classical_flat_section(f, c)
    for k in range(1, 4):
        a = nabla_tilde10(f, geo)
        b = nabla_tilde01(f, geo)
        for _ in range(k):
            a = nabla_tilde01(a, geo)
            b = nabla_tilde10(b, geo)
        out.add(J.fiber_part(1, k) - a)
        out.add(J.fiber_part(k, 1) - b)
    Pw, _, _ = phi_sections(c)
    for k in range(2, 5):
        out.add(Pw.fiber_part(1, k).truncate(N))
        out.add(Pw.fiber_part(k, 1).truncate(N))
    for m in (2, 3):
        In = c.I_parts[m - 2] if m - 2 < len(c.I_parts) else WeylForm.zero(n, c.cap)
        out.add((delta01(Pw.fiber_part(m, 2)) - In.scale(Scalar(0, 1) / 2)).truncate(N))
    return out


@check("classical_quantum_intertwiner",
       "J_f exp(Phi/hbar) = exp(Phi/hbar) * O_f")
def _intertwiner(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    E = exp_phi(c)
    out = Outcome(caps={"connection": c.cap})
    defaults = {"f": "z1*zb1", "f2": "z1^2*zb1", "f3": "z1 + zb1"}
    for name, text in defaults.items():
        f = ctx.expr(name, text)
        J = classical_flat_section(f, c)
        O = quantum_flat_section(f, c)
        rhs = c.wick.star(E, O)
        out.add(J * E - rhs)
        out.values[name] = ctx.hbar_trunc(rhs.at_basepoint().truncate(ctx.N))
    return out


# module side -------------------------------------------------------------------------

@check("module_curvature",
       "D_alpha^2 = (1/hbar) omega_hbar - Ric on extended elements; D_{B,alpha}^2 = 0")
def _module_curvature(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    beta = build_beta(c)
    curv = d_alpha_curvature(c)
    gauge = line_gauge(c)
    out = Outcome(caps={"connection": c.cap})
    for _ in range(5):
        A = random_section(ctx.rng, ctx.n, ctx.N, terms=3, ybar=False)
        t = ExtElt(A, -beta)
        out.add(apply_D_alpha(apply_D_alpha(t, c), c).amplitude - curv * A)
        s = FockElt(t, gauge)
        out.add(apply_DB_alpha(apply_DB_alpha(s, c), c).amplitude)
    return out


@check("module_compatibility",
       "D_B(O.s) = D_F(O).s + O.D_B(s); flat sections act on flat module sections; "
       "O_f.(O_g.s) = O_{f*g}.s (prequantum twist)")
def _module_compatibility(ctx: Ctx) -> Outcome:
    c = ctx.connection(alpha=PREQUANTUM)
    geo, rng, n, N = c.geo, ctx.rng, ctx.n, ctx.N
    out = Outcome(caps={"connection": c.cap})
    for _ in range(10):
        f = random_polynomial(rng, n, N)
        g = random_polynomial(rng, n, N)
        s = random_polynomial(rng, n, N, holomorphic=True)
        # Leibniz rule on arbitrary (non-flat) inputs
        O = random_section(rng, n, N, terms=3)
        psi = vacuum(c, random_section(rng, n, N, terms=3, ybar=False))
        lhs = apply_DB_alpha(bf_action(O, psi, geo), c).amplitude
        rhs = bf_action(apply_D_F(O, c), psi, geo).amplitude + bf_action(O, apply_DB_alpha(psi, c), geo).amplitude
        out.add(lhs - rhs)
        # flat in, flat out, and the action is a representation of *
        Psi = vacuum(c, holomorphic_flat_section(s, c))
        Of, Og = quantum_flat_section(f, c), quantum_flat_section(g, c)
        after_g = bf_action(Og, Psi, geo)
        out.add(apply_DB_alpha(after_g, c).amplitude)
        twice = bf_action(Of, after_g, geo).amplitude
        once = bf_action(quantum_flat_section(star_product(f, g, c), c), Psi, geo).amplitude
        out.add(twice - once)
    return out


@check("gauge_identities",
       "conjugation by exp(Phi/hbar) carries D_F^{0,1} to nabla^{0,1} - delta^{0,1}, "
       "and D_C(A) exp(Phi/hbar) = exp(Phi/hbar) * D_F(A_q)")
def _gauge(ctx: Ctx) -> Outcome:
    c = ctx.connection()
    w, geo = c.wick, c.geo
    E = exp_phi(c)
    Einv = w.star_inverse(E)
    out = Outcome(caps={"connection": c.cap})
    out.add(w.star(E, Einv) - 1)
    for _ in range(10):
        O = random_section(ctx.rng, ctx.n, ctx.N)
        X = w.star(w.star(E, O), Einv)
        out.add(nabla(X, geo, "01") - delta01(X) - w.star(w.star(E, apply_D_F(O, c, "01")), Einv))
        A = random_section(ctx.rng, ctx.n, ctx.N)
        Aq = w.star(Einv, A * E)
        out.add(apply_D_C(A, c) * E - w.star(E, apply_D_F(Aq, c)))
    return out


def _b2_rhs(c) -> WeylForm:
    """g_{i jbar} y^i dzbar^j - d rho."""
    n = c.n
    rho = WeylForm.from_jet(c.geo.potential.rho)
    out = WeylForm.zero(n)
    for i in range(n):
        y = WeylForm.var(n, "y", i)
        out = out - rho.diff_z(i).wedge_left(i)
        for j in range(n):
            out = out + (c.geo.w("metric", i, j) * y).wedge_left(n + j)
    return out


@check("prequantum_vacuum",
       "(J_alpha)_n = -hbar d_{y^i} K_{n+1}^i; D_K(beta) = g y dzbar - d rho; "
       "D_B(A exp(-beta/hbar) e) = D_K(A) exp(-beta/hbar) e, so the vacuum is flat")
def _prequantum_vacuum(ctx: Ctx) -> Outcome:
    c = ctx.connection(alpha=PREQUANTUM)
    n, N = ctx.n, ctx.N
    out = Outcome(caps={"connection": c.cap})
    for m in (1, 2, 3):
        Jm = c.J_parts[m - 1] if m - 1 < len(c.J_parts) else WeylForm.zero(n, c.cap)
        K = c.kapranov[m - 1] if m - 1 < len(c.kapranov) else [WeylForm.zero(n, c.cap)] * n
        rhs = WeylForm.zero(n, c.cap)
        for i in range(n):
            rhs = rhs + K[i].diff_y(i)
        out.add((Jm + rhs.hbar_shift(2)).truncate(N))
    beta = build_beta(c)
    out.add((apply_D_K(beta, c) - _b2_rhs(c)).truncate(N))
    out.add(apply_DB_alpha(vacuum(c), c).amplitude)
    # both directions: a flat amplitude and a non-flat one
    s = random_polynomial(ctx.rng, n, N, holomorphic=True)
    for A in (holomorphic_flat_section(s, c), WeylForm.var(n, "y", 0, cap=N),
              random_section(ctx.rng, n, N, terms=3, ybar=False)):
        out.add(apply_DB_alpha(vacuum(c, A), c).amplitude - apply_D_K(A, c))
    out.add(apply_D_K(holomorphic_flat_section(s, c), c))
    return out


# Toeplitz side -----------------------------------------------------------------------

def _weight_monomials(n, max_weight):
    for a in range(max_weight + 1):
        for b in range(max_weight + 1 - a):
            for I in multi_indices(n, a):
                for J in multi_indices(n, b):
                    yield WeylForm.monomial(n, 1, y=I, yb=J)


@check("toeplitz_layer",
       "<y^a, y^a> = a! hbar^a; T_ybar = hbar d/dy; T_f T_g = T_{f*g}; "
       "star-inverse and Gram paths give the same O_f")
def _toeplitz_layer(ctx: Ctx) -> Outcome:
    n, N = ctx.n, ctx.N
    zero = WeylForm.zero(n)
    hb = ctx.caps.hbar_order
    out = Outcome(caps={"weight": N, "hbar_order": hb})
    y = WeylForm.var(n, "y")
    yb = WeylForm.var(n, "yb")
    for a in range(5):
        ip = formal_inner_product(y ** a, y ** a, zero, N)
        out.add(ip - WeylForm.const(n, factorial(a)).hbar_shift(2 * a).truncate(ip.cap))
        if a:
            Ty = toeplitz_apply(yb, y ** a, zero, N)
            out.add(Ty - (y ** (a - 1)).scale(a).hbar_shift(2))
    wick = WickAlgebra.flat(n)
    monos = list(_weight_monomials(n, 4))
    sources = [WeylForm.const(n, 1), y, y * y]
    for _ in range(12):
        f, g = ctx.rng.choice(monos), ctx.rng.choice(monos)
        fg = wick.star(f, g)
        for s in sources:
            lhs = toeplitz_apply(f, toeplitz_apply(g, s, zero, N), zero, N)
            out.add(ctx.hbar_trunc(lhs - toeplitz_apply(fg, s, zero, N)))
    phi = (y * y * yb * yb).scale(Scalar(1, 0) / 2) - (y * yb).hbar_shift(2).scale(2)
    for f in (y * yb, y * y * yb, y * yb * yb + y, WeylForm.const(n, 1)):
        out.add(normal_symbol(f, phi, N) - normal_symbol_from_operator(f, phi, N))
        for s in sources:
            out.add(toeplitz_apply(f, s, phi, N) - toeplitz_apply(f, s, phi, N, "gram"))
    return out


@check("toeplitz_module_action",
       "O_f . Psi_s from the module equals T_{(J_f)_0, Phi}(J_s) (prequantum twist); flat zz -> hbar")
def _toeplitz_module(ctx: Ctx) -> Outcome:
    c = ctx.connection(alpha=PREQUANTUM)
    geo, n, N = c.geo, ctx.n, ctx.N
    out = Outcome(caps={"connection": c.cap})
    Phi0 = evaluate_at_basepoint(phi_sections(c)[2])
    s = ctx.expr("s", "1")
    Js = holomorphic_flat_section(s, c)
    psi = vacuum(c, Js)
    for name, text in (("f", "z1*zb1"), ("f2", "z1^2*zb1^2")):
        f = ctx.expr(name, text)
        A = bf_action(quantum_flat_section(f, c), psi, geo).amplitude.at_basepoint()
        Jf = evaluate_at_basepoint(classical_flat_section(f, c))
        T = toeplitz_apply(Jf, Js.at_basepoint(), Phi0, N)
        out.add(A - T)
        out.values[name] = ctx.hbar_trunc(A.truncate(N))
    flat = ctx.connection(alpha=PREQUANTUM, geometry={"name": "flat", "n": n})
    zz = WeylForm.monomial(n, 1, z=_unit(n, 0), zb=_unit(n, 0), cap=N)
    sp, res = module_action(zz, WeylForm.const(n, 1, N), flat)
    out.add(sp.at_basepoint() - WeylForm.var(n, "hbar"))
    out.add(res.amplitude)
    return out


def _unit(n, i):
    return tuple(1 if k == i else 0 for k in range(n))


# cap stability -----------------------------------------------------------------------

STABILITY_CHECKS = ("fedosov_residual", "classical_quantum_intertwiner", "toeplitz_module_action")


@check("cap_stability",
       "reported coefficients are unchanged when weight cap and jet order are raised by 2")
def _cap_stability(ctx: Ctx) -> Outcome:
    out = Outcome(caps={"low": ctx.N, "high": ctx.N + 2})
    high = ctx.caps.raised(2)
    for cid in STABILITY_CHECKS:
        lo = run_check(cid, ctx.config, ctx.caps)
        hi = run_check(cid, ctx.config, high)
        for r in lo.residuals + hi.residuals:
            out.add(r)
        for key, v in lo.values.items():
            w = hi.values[key]
            cap = min(v.cap, w.cap, ctx.N)
            out.add(v.truncate(cap) - w.truncate(cap))
            out.values[f"{cid}/{key}"] = v
    return out


def check_rng(seed: int, cid: str) -> random.Random:
    return random.Random(f"{seed}:{cid}")


def run_check(cid: str, config: Config, caps: Caps | None = None) -> Outcome:
    ctx = Ctx(config, caps or config.caps, check_rng(config.seed, cid))
    return CATALOG[cid].run(ctx)


__all__ = ["CATALOG", "Check", "Outcome", "run_check", "wick_oracle", "poisson_flat"]
