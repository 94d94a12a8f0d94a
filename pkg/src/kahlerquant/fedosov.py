"""Fedosov and Kapranov connections on the Weyl bundle at a basepoint."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

from .geometry import KahlerData, nabla
from .jet import JetPoly
from .scalar import Scalar
from .weyl import WeylForm, WickAlgebra, star_exp

I1 = Scalar(0, 1)
I2 = Scalar(0, 2)

# delta family ----------------------------------------------------------------

_WEIGHTS = {
    "delta10_inv": lambda n, e, f: sum(1 for x in f if x < n) + sum(e[:n]),
    "delta01_inv": lambda n, e, f: sum(1 for x in f if x >= n) + sum(e[n: 2 * n]),
    "delta_inv": lambda n, e, f: len(f) + sum(e[: 2 * n]),
}


def delta10(a: WeylForm) -> WeylForm:
    out = WeylForm.zero(a.n, a.cap)
    for i in range(a.n):
        out = out + a.diff_y(i).wedge_left(i)
    return out


def delta01(a: WeylForm) -> WeylForm:
    n = a.n
    out = WeylForm.zero(n, a.cap)
    for j in range(n):
        out = out + a.diff_yb(j).wedge_left(n + j)
    return out


def delta(a: WeylForm) -> WeylForm:
    return delta10(a) + delta01(a)


def _star_terms(a: WeylForm, which_forms, weight=None) -> WeylForm:
    """``sum y^i iota_i`` over the selected form generators, optionally
    divided by a per-term weight (0 where the weight vanishes)."""
    n = a.n
    out: Dict = {}
    for (h, e, f), c in a.terms.items():
        if weight is not None:
            w = weight(n, e, f)
            if w == 0:
                continue
            c = c / w
        for pos, x in enumerate(f):
            if x not in which_forms:
                continue
            slot = x  # dz^i pairs with y^i, dzbar^j (index n+j) with ybar^j
            e2 = e[:slot] + (e[slot] + 1,) + e[slot + 1:]
            f2 = f[:pos] + f[pos + 1:]
            v = c if pos % 2 == 0 else -c
            key = (h, e2, f2)
            s = out.get(key)
            out[key] = v if s is None else s + v
    return WeylForm._raw(n, a.cap, {k: v for k, v in out.items() if v})


def delta10_star(a):
    return _star_terms(a, range(a.n))


def delta01_star(a):
    return _star_terms(a, range(a.n, 2 * a.n))


def delta_star(a):
    return _star_terms(a, range(2 * a.n))


def delta10_inv(a):
    return _star_terms(a, range(a.n), _WEIGHTS["delta10_inv"])


def delta01_inv(a):
    return _star_terms(a, range(a.n, 2 * a.n), _WEIGHTS["delta01_inv"])


def delta_inv(a):
    return _star_terms(a, range(2 * a.n), _WEIGHTS["delta_inv"])


DELTA_FAMILY = {
    "delta10": delta10, "delta01": delta01, "delta": delta,
    "delta10_star": delta10_star, "delta01_star": delta01_star, "delta_star": delta_star,
    "delta10_inv": delta10_inv, "delta01_inv": delta01_inv, "delta_inv": delta_inv,
}


def delta_family(a: WeylForm, which: str) -> WeylForm:
    try:
        return DELTA_FAMILY[which](a)
    except KeyError:
        raise ValueError(f"unknown delta operator {which!r}") from None


# tilde-nabla and vector-valued forms -------------------------------------------

def nabla_tilde10(a: WeylForm, geo: KahlerData) -> WeylForm:
    return delta10_inv(nabla(a, geo, "10"))


def nabla_tilde01(a: WeylForm, geo: KahlerData) -> WeylForm:
    return delta01_inv(nabla(a, geo, "01"))


def nabla_vector10(K: List[WeylForm], geo: KahlerData) -> List[WeylForm]:
    """(1,0) covariant derivative of a form with values in Hom(W, W) whose
    vector slot is ``d/dy^j``: ``(nabla K)^j = nabla K^j + Gamma^j_{km} dz^k ^ K^m``."""
    n = geo.n
    out = []
    for j in range(n):
        t = nabla(K[j], geo, "10")
        for k in range(n):
            for m in range(n):
                G = geo.w("christoffel", j, k, m)
                if not G.is_zero() and not K[m].is_zero():
                    t = t + (G * K[m]).wedge_left(k)
        out.append(t)
    return out


def kapranov_tensors(geo: KahlerData, cap: int) -> List[List[WeylForm]]:
    """Vector components ``K_n^j`` of ``R_n^* = K_n^j d/dy^j`` for n = 2, 3, ...

    ``K_2^m = (1/2) R^m_{i jbar k} y^i y^k dzbar^j`` and
    ``K_n = (delta^{1,0})^{-1} nabla^{1,0} K_{n-1}``; entry 0 holds n = 2.
    """
    n = geo.n
    half = Scalar(1) / 2
    K2 = []
    for m in range(n):
        t = WeylForm.zero(n)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    R = geo.w("curvature", m, i, j, k)
                    if R.is_zero():
                        continue
                    mono = WeylForm.var(n, "y", i).mul_fiber(k).wedge_left(n + j)
                    t = t + (R * mono).scale(half)
        K2.append(t.truncate(cap))
    out = [K2]
    deg = 2
    while True:
        deg += 1
        if deg + 1 > cap:
            break
        nxt = [delta10_inv(x).truncate(cap) for x in nabla_vector10(out[-1], geo)]
        if all(x.is_zero() for x in nxt):
            break
        out.append(nxt)
    return out


def apply_vector(K: List[WeylForm], a: WeylForm, conj: bool = False) -> WeylForm:
    """``sum_j K^j ^ d a / dy^j`` (or the conjugate action on ybar)."""
    n = a.n
    out = WeylForm.zero(n, a.cap)
    for j in range(n):
        if K[j].is_zero():
            continue
        da = a.diff_yb(j) if conj else a.diff_y(j)
        if not da.is_zero():
            out = out + K[j] * da
    return out


# connection data ---------------------------------------------------------------

def two_form(geo: KahlerData, coeff, cap: int) -> WeylForm:
    """``sum coeff(i, j) dz^i ^ dzbar^j`` for jet-valued WeylForm coefficients."""
    n = geo.n
    out = WeylForm.zero(n, cap)
    for i in range(n):
        for j in range(n):
            c = coeff(i, j)
            if not c.is_zero():
                out = out + c.wedge_left(n + j).wedge_left(i)
    return out


def dbar_form(phi: WeylForm) -> WeylForm:
    n = phi.n
    out = WeylForm.zero(n, phi.cap)
    for j in range(n):
        out = out + phi.diff_zb(j).wedge_left(n + j)
    return out


def ddbar(phi: WeylForm) -> WeylForm:
    """``d dbar`` of a 0-form as ``sum phi_{i jbar} dz^i ^ dzbar^j``."""
    n = phi.n
    out = WeylForm.zero(n, phi.cap)
    for i in range(n):
        for j in range(n):
            out = out + phi.diff_z(i).diff_zb(j).wedge_left(n + j).wedge_left(i)
    return out


@dataclass
class ConnectionData:
    geo: KahlerData
    cap: int
    wick: WickAlgebra
    alpha_potential: WeylForm
    kapranov: List[List[WeylForm]]
    I_parts: List[WeylForm]
    J_parts: List[WeylForm]
    gamma0: WeylForm
    I: WeylForm
    J_alpha: WeylForm
    I_alpha: WeylForm
    gamma_alpha: WeylForm
    omega_form: WeylForm
    alpha_form: WeylForm
    omega_hbar: WeylForm
    curvature_form: WeylForm
    margin: int = 3
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.geo.n


def alpha_potential_from(geo: KahlerData, alpha, cap: int) -> WeylForm:
    """``alpha`` is ``None``/``"zero"``, ``"minus-hbar-ricci"`` or a WeylForm
    0-form potential (no fiber variables, every term with positive hbar power)."""
    n = geo.n
    if isinstance(alpha, WeylForm):
        if any(k[2] or any(k[1][: 2 * n]) for k in alpha.terms):
            raise ValueError("alpha potential must be a fiber-constant 0-form")
        if any(k[0] <= 0 for k in ddbar(alpha).terms):
            raise ValueError("alpha must lie in hbar * A^2 (no hbar^0 part)")
        return alpha.truncate(cap)
    if alpha is None or alpha == "zero" or alpha == 0:
        return WeylForm.zero(n, cap)
    if alpha == "minus-hbar-ricci":
        return WeylForm.from_jet(geo.log_h).hbar_shift(2).scale(-1).truncate(cap)
    raise ValueError(f"unknown alpha specification {alpha!r}")


def build_connection(geo: KahlerData, alpha=None, cap: int = 8, margin: int = 3) -> ConnectionData:
    """Assemble I, J_alpha, gamma_alpha and omega_hbar at working cap ``cap``.

    Connection pieces are kept ``margin`` degrees above ``cap``: the bracket
    ``(1/hbar)[gamma, .]`` costs two degrees and the module action of the
    ``dz ybar`` part of gamma costs three.
    """
    n = geo.n
    C = cap + margin
    wick = WickAlgebra(n, [[geo.w("omega_upper", i, j) for j in range(n)] for i in range(n)])
    ol = lambda i, j: geo.w("omega_lower", i, j)
    gamma0 = WeylForm.zero(n, C)
    for i in range(n):
        for j in range(n):
            w = ol(i, j)
            if w.is_zero():
                continue
            t = WeylForm.var(n, "yb", j).wedge_left(i) - WeylForm.var(n, "y", i).wedge_left(n + j)
            gamma0 = gamma0 + (w * t).scale(I2)
    gamma0 = gamma0.truncate(C)
    kap = kapranov_tensors(geo, C)
    I_parts = []
    for Kn in kap:
        t = WeylForm.zero(n, C)
        for j in range(n):
            for k in range(n):
                w = ol(j, k)
                if w.is_zero() or Kn[j].is_zero():
                    continue
                t = t + (Kn[j] * w).mul_fiber(n + k).scale(Scalar(0, -2))
        I_parts.append(t.truncate(C))
    I = sum(I_parts, WeylForm.zero(n, C))
    phi_a = alpha_potential_from(geo, alpha, C + 2)
    J_parts = []
    cur = dbar_form(phi_a)
    while True:
        cur = nabla_tilde10(cur, geo).truncate(C)
        if cur.is_zero():
            break
        J_parts.append(cur)
    J_alpha = sum(J_parts, WeylForm.zero(n, C))
    I_alpha = I + J_alpha
    gamma = gamma0 + I_alpha
    omega_form = two_form(geo, ol, C)
    alpha_form = ddbar(phi_a).truncate(C)
    omega_hbar = omega_form.scale(I2) - alpha_form
    curv = WeylForm.zero(n, C)
    for m in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    R = geo.w("curvature", m, i, j, k)
                    if R.is_zero():
                        continue
                    for l in range(n):
                        w = ol(m, l)
                        if w.is_zero():
                            continue
                        mono = WeylForm.var(n, "y", k).mul_fiber(n + l).wedge_left(n + j).wedge_left(i)
                        curv = curv + (R * w * mono).scale(Scalar(0, -2))
    return ConnectionData(geo, cap, wick, phi_a, kap, I_parts, J_parts, gamma0, I, J_alpha,
                          I_alpha, gamma, omega_form, alpha_form, omega_hbar, curv.truncate(C), margin)


def fedosov_residual(c: ConnectionData, gamma: WeylForm | None = None) -> WeylForm:
    g = c.gamma_alpha if gamma is None else gamma
    res = nabla(g, c.geo) + c.wick.square_over_hbar(g) + c.curvature_form - c.omega_hbar
    return res.truncate(c.cap)


# connections ---------------------------------------------------------------------

def _parts(part):
    if part not in ("full", "10", "01"):
        raise ValueError("part must be full, 10 or 01")
    return part in ("full", "10"), part in ("full", "01")


def apply_D_K(a: WeylForm, c: ConnectionData, part: str = "full") -> WeylForm:
    p10, p01 = _parts(part)
    out = nabla(a, c.geo, part)
    if p10:
        out = out - delta10(a)
    if p01:
        for Kn in c.kapranov:
            out = out + apply_vector(Kn, a)
    return out.truncate(a.cap)


def _conj_kapranov(c: ConnectionData):
    got = c._cache.get("conj_kap")
    if got is None:
        got = [[x.conjugate() for x in Kn] for Kn in c.kapranov]
        c._cache["conj_kap"] = got
    return got


def apply_D_C(a: WeylForm, c: ConnectionData, part: str = "full") -> WeylForm:
    p10, p01 = _parts(part)
    out = nabla(a, c.geo, part)
    if p10:
        out = out - delta10(a)
        for Kn in _conj_kapranov(c):
            out = out + apply_vector(Kn, a, conj=True)
    if p01:
        out = out - delta01(a)
        for Kn in c.kapranov:
            out = out + apply_vector(Kn, a)
    return out.truncate(a.cap)


def apply_D_F(a: WeylForm, c: ConnectionData, part: str = "full", gamma: WeylForm | None = None) -> WeylForm:
    g = c.gamma_alpha if gamma is None else gamma
    if part == "10":
        g = g.form_part(1, 0)
    elif part == "01":
        g = g.form_part(0, 1)
    else:
        _parts(part)
    out = nabla(a, c.geo, part) + c.wick.bracket_over_hbar(g, a)
    return out.truncate(a.cap)


CONNECTIONS = {"D_K": apply_D_K, "D_C": apply_D_C, "D_F": apply_D_F}


def apply_connection(a: WeylForm, c: ConnectionData, which: str, part: str = "full") -> WeylForm:
    try:
        fn = CONNECTIONS[which]
    except KeyError:
        raise ValueError(f"unknown connection {which!r}") from None
    return fn(a, c, part)


# flat sections --------------------------------------------------------------------

def _as_section(f, c: ConnectionData, cap: int | None) -> WeylForm:
    n = c.n
    cap = c.cap if cap is None else cap
    if isinstance(f, JetPoly):
        f = WeylForm.from_jet(f)
    if not isinstance(f, WeylForm):
        f = WeylForm.const(n, f)
    if any(k[2] or any(k[1][: 2 * n]) for k in f.terms):
        raise ValueError("flat sections are generated by fiber-constant 0-forms")
    return f.truncate(cap) if f.cap < 1 << 29 else f.with_cap(cap)


def _fixpoint(f: WeylForm, step, cap: int, what: str) -> WeylForm:
    cur = f
    for _ in range(cap + 3):
        nxt = f + delta_inv(step(cur))
        nxt = nxt.truncate(cap)
        if nxt == cur and nxt.cap == cur.cap:
            return nxt
        cur = nxt
    raise RuntimeError(f"{what} iteration did not stabilize within {cap + 3} passes")


def quantum_flat_section(f, c: ConnectionData, cap: int | None = None) -> WeylForm:
    """Flat section of D_F with symbol ``f``:
    ``O = f + delta^{-1}(nabla O + (1/hbar)[I_alpha, O])``."""
    f = _as_section(f, c, cap)
    step = lambda O: nabla(O, c.geo) + c.wick.bracket_over_hbar(c.I_alpha, O)
    return _fixpoint(f, step, f.cap, "quantum flat section")


def classical_flat_section(f, c: ConnectionData, cap: int | None = None) -> WeylForm:
    """Flat section of D_C with symbol ``f``: ``J = f + delta^{-1}(D_C + delta) J``."""
    f = _as_section(f, c, cap)
    conj = _conj_kapranov(c)

    def step(J):
        out = nabla(J, c.geo)
        for Kn, Kb in zip(c.kapranov, conj):
            out = out + apply_vector(Kn, J) + apply_vector(Kb, J, conj=True)
        return out

    return _fixpoint(f, step, f.cap, "classical flat section")


def holomorphic_flat_section(f, c: ConnectionData, cap: int | None = None) -> WeylForm:
    """``J_f = sum_k (tilde nabla^{1,0})^k f`` for holomorphic ``f``."""
    f = _as_section(f, c, cap)
    out = f
    cur = f
    while True:
        cur = nabla_tilde10(cur, c.geo).truncate(f.cap)
        if cur.is_zero():
            return out
        out = out + cur


def star_product(f, g, c: ConnectionData, cap: int | None = None) -> WeylForm:
    Of = quantum_flat_section(f, c, cap)
    Og = quantum_flat_section(g, c, cap)
    return c.wick.star(Of, Og).symbol()


def mixed_part(a: WeylForm) -> WeylForm:
    n = a.n
    return a.filter(lambda k: sum(k[1][:n]) >= 1 and sum(k[1][n: 2 * n]) >= 1)


def phi_sections(c: ConnectionData, cap: int | None = None):
    """``(Phi_omega, Phi_alpha, Phi)``, all kept ``margin`` above the working cap."""
    n = c.n
    C = (c.cap if cap is None else cap) + c.margin
    key = ("phi", C)
    if key in c._cache:
        return c._cache[key]
    rho = WeylForm.from_jet(c.geo.potential.rho)
    phi = rho.scale(Scalar(0, -2).inverse())
    Phi_w = mixed_part(classical_flat_section(phi, c, C))
    Phi_a = mixed_part(classical_flat_section(c.alpha_potential, c, C))
    quad = WeylForm.zero(n)
    for i in range(n):
        for j in range(n):
            w = c.geo.w("omega_lower", i, j)
            if not w.is_zero():
                quad = quad + w * WeylForm.var(n, "y", i).mul_fiber(n + j)
    Phi = ((Phi_w - quad).scale(I2) - Phi_a).truncate(C)
    out = (Phi_w.truncate(C), Phi_a.truncate(C), Phi)
    c._cache[key] = out
    return out


def exp_phi(c: ConnectionData, cap: int | None = None) -> WeylForm:
    """``e^{Phi/hbar}`` (classical exponential) at the working cap."""
    return star_exp(phi_sections(c, cap)[2])
