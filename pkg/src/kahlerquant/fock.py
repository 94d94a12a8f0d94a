"""Bargmann-Fock modules over the Fedosov algebra.

Module elements are ``A * exp(g/hbar) (x) e`` with ``A`` holomorphic-Weyl
(no ybar), ``g`` a fixed exponent and ``e`` a local frame of a formal line
bundle with ``nabla_L e = (1/hbar) d_z(gauge) (x) e``.  Exponentials are never
expanded: every operator acts on the amplitude with the exponent fixed.

``ybar^j`` acts as ``hbar g^{i jbar} d/dy^i`` (Leibniz onto the exponent),
``y^i`` by multiplication, and a monomial ``y^I ybar^J`` multiplies by
``y^I`` first.  With this ordering ``(a * b) . s = a . (b . s)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

from .fedosov import (ConnectionData, apply_D_K, holomorphic_flat_section, nabla_tilde10,
                      quantum_flat_section)
from .geometry import KahlerData, nabla
from .scalar import Scalar
from .weyl import WeylForm


@dataclass(frozen=True)
class ExtElt:
    """``amplitude * exp(exponent / hbar)``."""
    amplitude: WeylForm
    exponent: WeylForm

    def __post_init__(self):
        n = self.amplitude.n
        for k in self.amplitude.terms:
            if any(k[1][n: 2 * n]):
                raise ValueError("amplitude must not depend on ybar")
        for k in self.exponent.terms:
            if any(k[1][n: 2 * n]) or k[2]:
                raise ValueError("exponent must be a holomorphic-Weyl 0-form")

    @property
    def n(self):
        return self.amplitude.n

    def normalized(self) -> "ExtElt":
        """Drop the fiber-constant part of the exponent (an hbar-series constant)."""
        n = self.n
        g = self.exponent.filter(lambda k: any(k[1][: 2 * n]) or any(k[1][2 * n:]))
        return ExtElt(self.amplitude, g)

    def same_class(self, other: "ExtElt") -> bool:
        d = self.exponent - other.exponent
        n = self.n
        const = all(not any(k[1]) for k in d.terms)
        return const and self.amplitude == other.amplitude

    def with_amplitude(self, a: WeylForm) -> "ExtElt":
        return ExtElt(a, self.exponent)


@dataclass(frozen=True)
class FockElt:
    """``base (x) e`` with ``nabla_L e = (1/hbar) d_z(line_gauge) (x) e``."""
    base: ExtElt
    line_gauge: WeylForm

    def with_amplitude(self, a: WeylForm) -> "FockElt":
        return FockElt(self.base.with_amplitude(a), self.line_gauge)

    @property
    def amplitude(self):
        return self.base.amplitude


def _ybar_op(X: WeylForm, j: int, g: WeylForm, geo: KahlerData) -> WeylForm:
    """``ybar^j`` acting on ``X exp(g/hbar)``, returned as the new amplitude."""
    n = X.n
    out = None
    for i in range(n):
        G = geo.w("metric_inv", i, j)
        if G.is_zero():
            continue
        t = G * (X.diff_y(i).hbar_shift(2) + g.diff_y(i) * X)
        out = t if out is None else out + t
    return WeylForm.zero(n, X.cap + 1) if out is None else out


def bf_action_amplitude(o: WeylForm, A: WeylForm, g: WeylForm, geo: KahlerData) -> WeylForm:
    n = o.n
    groups: Dict = {}
    for (h, e, f), c in o.terms.items():
        fib = e[: 2 * n]
        groups.setdefault(fib, {})[(h, (0,) * (2 * n) + e[2 * n:], f)] = c
    out = None
    for fib, terms in groups.items():
        coeff = WeylForm._raw(n, o.cap, terms)
        I, J = fib[:n], fib[n:]
        X = A
        for i, p in enumerate(I):
            if p:
                X = X.mul_fiber(i, p)
        for j, q in enumerate(J):
            for _ in range(q):
                X = _ybar_op(X, j, g, geo)
        # the cap of o restricted to this fiber monomial is o.cap - |I| - |J|
        coeff = coeff.with_cap(o.cap - sum(fib))
        t = coeff * X
        out = t if out is None else out + t
    if out is None:
        out = WeylForm.zero(n, min(o.cap + A.mindeg(), A.cap + o.mindeg()))
    return out


def bf_action(o: WeylForm, t, geo: KahlerData):
    """``o . t`` for ``t`` an ExtElt or FockElt."""
    if isinstance(t, FockElt):
        return t.with_amplitude(bf_action_amplitude(o, t.amplitude, t.base.exponent, geo))
    return t.with_amplitude(bf_action_amplitude(o, t.amplitude, t.exponent, geo))


# connections ---------------------------------------------------------------------

def d_alpha_amplitude(A: WeylForm, g: WeylForm, c: ConnectionData) -> WeylForm:
    """Amplitude of ``D_alpha(A e^{g/hbar}) = (nabla + (1/hbar) gamma_alpha .)(A e^{g/hbar})``."""
    geo = c.geo
    out = nabla(A, geo) + (nabla(g, geo).hbar_shift(-2) * A)
    out = out + bf_action_amplitude(c.gamma_alpha, A, g, geo).hbar_shift(-2)
    return out.truncate(A.cap)


def apply_D_alpha(t: ExtElt, c: ConnectionData) -> ExtElt:
    return t.with_amplitude(d_alpha_amplitude(t.amplitude, t.exponent, c))


def apply_DB_alpha(s: FockElt, c: ConnectionData) -> FockElt:
    A = s.amplitude
    dz_gauge = WeylForm.zero(A.n, s.line_gauge.cap)
    for i in range(A.n):
        dz_gauge = dz_gauge + s.line_gauge.diff_z(i).wedge_left(i)
    out = d_alpha_amplitude(A, s.base.exponent, c) + dz_gauge.hbar_shift(-2) * A
    return s.with_amplitude(out.truncate(A.cap))


def ricci_form(c: ConnectionData) -> WeylForm:
    n = c.n
    out = WeylForm.zero(n)
    for i in range(n):
        for j in range(n):
            r = c.geo.w("ricci", i, j)
            if not r.is_zero():
                out = out + r.wedge_left(n + j).wedge_left(i)
    return out


def d_alpha_curvature(c: ConnectionData) -> WeylForm:
    """The scalar 2-form ``(1/hbar) omega_hbar - Ric`` by which D_alpha^2 acts."""
    return c.omega_hbar.hbar_shift(-2) - ricci_form(c)


def line_gauge(c: ConnectionData) -> WeylForm:
    """Gauge potential ``f`` with ``-d dbar f = alpha' = -omega_hbar + hbar Ric``.

    ``f = -rho - phi_alpha - hbar log h``; in the prequantum case
    (``alpha = -hbar Ric``) this is ``-rho``.
    """
    C = c.cap + 2 * c.margin
    rho = WeylForm.from_jet(c.geo.potential.rho)
    logh = WeylForm.from_jet(c.geo.log_h).hbar_shift(2)
    return (-rho - c.alpha_potential - logh).truncate(C)


def build_beta(c: ConnectionData, cap: int | None = None) -> WeylForm:
    """``beta = sum_{k>=1} (tilde nabla^{1,0})^k rho``."""
    C = (c.cap if cap is None else cap) + c.margin
    rho = WeylForm.from_jet(c.geo.potential.rho).truncate(C + 2)
    out = WeylForm.zero(c.n, C)
    cur = rho
    while True:
        cur = nabla_tilde10(cur, c.geo).truncate(C)
        if cur.is_zero():
            return out
        out = out + cur


def vacuum(c: ConnectionData, amplitude: WeylForm | None = None) -> FockElt:
    """``A exp(-beta/hbar) (x) e``; with the engine's sign conventions the
    flat module sections carry ``exp(-beta/hbar)``."""
    beta = build_beta(c)
    A = WeylForm.const(c.n, 1, c.cap) if amplitude is None else amplitude
    return FockElt(ExtElt(A, -beta), line_gauge(c))


def module_action(f, s_hol, c: ConnectionData):
    """``O_f . (J_s exp(-beta/hbar) (x) e) = J_{s'} exp(-beta/hbar) (x) e``.

    Returns ``(s_prime, residual)`` where ``s_prime`` is the symbol of the new
    amplitude and ``residual`` is ``D_{B,alpha}`` of the output.
    """
    Js = holomorphic_flat_section(s_hol, c)
    psi = vacuum(c, Js)
    Of = quantum_flat_section(f, c)
    out = bf_action(Of, psi, c.geo)
    A = out.amplitude
    s_prime = A.symbol()
    n = c.n
    if any(any(k[1][3 * n:]) for k in s_prime.terms):
        raise ArithmeticError("output symbol is not holomorphic")
    if not (A - holomorphic_flat_section(s_prime, c, A.cap)).is_zero():
        raise ArithmeticError("output amplitude is not the flat section of its symbol")
    residual = apply_DB_alpha(out, c)
    return s_prime, residual


def boundedness_check(s, r_bound) -> bool:
    """``|| sum beta_i y^i || < r`` for the y-linear, hbar-free exponent part at the basepoint."""
    base = s.base if isinstance(s, FockElt) else s
    g = base.exponent
    n = g.n
    total = 0
    for (h, e, f), v in g.terms.items():
        if h == 0 and not f and sum(e[:n]) == 1 and not any(e[n:]):
            total += v.norm2()
    r = Scalar.parse(r_bound) if not isinstance(r_bound, Scalar) else r_bound
    if r.im != 0 or r.re <= 0:
        raise ValueError("r_bound must be a positive rational")
    return total < r.re * r.re
