"""Formal Toeplitz operators for constant-coefficient symbols at the basepoint.

The Gaussian functional is normalized so that ``<1, 1> = 1``:
``y^I ybar^J -> delta_IJ I! hbar^|I|``.  The interacting product is
``<f, g>_phi = moment(f conj(g) exp(phi/hbar))``.  All truncation is by the
filtration degree, which the moment preserves (``y ybar -> hbar``).
"""
from __future__ import annotations

from math import factorial
from typing import Dict, List, Tuple

from .scalar import Scalar
from .weyl import INF, WeylForm, WickAlgebra, classical_exp, multi_indices


def evaluate_at_basepoint(a: WeylForm) -> WeylForm:
    if any(k[2] for k in a.terms):
        raise ValueError("evaluate_at_basepoint expects a 0-form")
    return a.at_basepoint()


def _fact(idx) -> int:
    out = 1
    for k in idx:
        out *= factorial(k)
    return out


def _require_constant(a: WeylForm, what: str):
    n = a.n
    if any(any(k[1][2 * n:]) or k[2] for k in a.terms):
        raise ValueError(f"{what} must have constant coefficients and form degree 0")


def gaussian_moment(m: WeylForm) -> WeylForm:
    """Normalized Gaussian expectation; returns an hbar-series (no fiber variables)."""
    _require_constant(m, "moment argument")
    n = m.n
    out: Dict = {}
    zero = (0,) * (4 * n)
    for (h, e, f), c in m.terms.items():
        I, J = e[:n], e[n: 2 * n]
        if I != J:
            continue
        key = (h + 2 * sum(I), zero, ())
        v = c * _fact(I)
        s = out.get(key)
        out[key] = v if s is None else s + v
    return WeylForm._raw(n, m.cap, {k: v for k, v in out.items() if v})


def check_interaction(phi: WeylForm):
    _require_constant(phi, "interaction")
    n = phi.n
    for (h, e, f) in phi.terms:
        if h + sum(e[: 2 * n]) < 3:
            raise ValueError("interaction terms must have weight at least 3")


def exp_interaction(phi: WeylForm, cap: int) -> WeylForm:
    check_interaction(phi)
    if phi.is_zero():
        return WeylForm.const(phi.n, 1, cap)
    return classical_exp(phi.truncate(cap + 2).hbar_shift(-2)).truncate(cap)


def formal_inner_product(f: WeylForm, g: WeylForm, phi: WeylForm, cap: int) -> WeylForm:
    E = exp_interaction(phi, cap)
    return gaussian_moment((f * g.conjugate() * E).truncate(cap))


def pi0(u: WeylForm) -> WeylForm:
    """Flat projection ``y^A ybar^B -> hbar^|B| d^B y^A``."""
    _require_constant(u, "projection argument")
    n = u.n
    out: Dict = {}
    for (h, e, f), c in u.terms.items():
        A, B = e[:n], e[n: 2 * n]
        if any(b > a for a, b in zip(A, B)):
            continue
        coef = 1
        for a, b in zip(A, B):
            coef *= factorial(a) // factorial(a - b)
        key = (h + 2 * sum(B), tuple(a - b for a, b in zip(A, B)) + (0,) * (3 * n), ())
        v = c * coef
        s = out.get(key)
        out[key] = v if s is None else s + v
    return WeylForm._raw(n, u.cap, {k: v for k, v in out.items() if v})


def projection(f: WeylForm, phi: WeylForm, cap: int, method: str = "fixpoint") -> WeylForm:
    """Holomorphic ``s`` with ``<f - s, y^I>_phi = 0`` for all I."""
    _require_constant(f, "projection argument")
    f = f.truncate(cap)
    if method == "gram":
        return _projection_gram(f, phi, cap)
    if method != "fixpoint":
        raise ValueError("method must be fixpoint or gram")
    E = exp_interaction(phi, cap)
    Ep = E - 1
    target = pi0((f * E).truncate(cap))
    s = target
    for _ in range(cap + 3):
        nxt = (target - pi0((s * Ep).truncate(cap))).truncate(cap)
        if nxt == s:
            return nxt
        s = nxt
    raise RuntimeError("projection did not stabilize")


def _projection_gram(f: WeylForm, phi: WeylForm, cap: int) -> WeylForm:
    """Solve the Gram system ``sum_J <y^J, y^I> c_J = <f, y^I>`` directly.

    With ``S = diag(hbar^{-|I|/2})`` the rescaled matrix ``S G S`` is
    ``diag(I!) + O(hbar^{1/2})``, inverted by a Neumann series.
    """
    n = f.n
    monos = [I for d in range(cap + 1) for I in multi_indices(n, d)]
    ymono = {I: WeylForm.monomial(n, 1, y=I, cap=INF) for I in monos}
    size = len(monos)
    G = [[formal_inner_product(ymono[J], ymono[I], phi, cap + sum(I) + sum(J)).hbar_shift(-(sum(I) + sum(J)))
          for J in monos] for I in monos]
    b = [formal_inner_product(f, ymono[I], phi, cap + sum(I)).hbar_shift(-sum(I)) for I in monos]
    # G~ = Delta (1 + Delta^{-1} R); solve G~ x = b, then c_J = hbar^{-|J|/2} x_J
    inv_diag = [Scalar(1) / _fact(I) for I in monos]
    R = [[G[i][j] - (WeylForm.const(n, _fact(monos[i])) if i == j else 0) for j in range(size)] for i in range(size)]
    x = [b[i].scale(inv_diag[i]) for i in range(size)]
    term = x
    for _ in range(2 * cap + 4):
        nxt = []
        for i in range(size):
            acc = WeylForm.zero(n, INF)
            for j in range(size):
                if not R[i][j].is_zero() and not term[j].is_zero():
                    acc = acc + R[i][j] * term[j]
            nxt.append((-acc).scale(inv_diag[i]))
        nxt = [t.truncate(cap) for t in nxt]
        if all(t.is_zero() for t in nxt):
            break
        x = [a + t for a, t in zip(x, nxt)]
        term = nxt
    out = WeylForm.zero(n, cap)
    for I, xi in zip(monos, x):
        out = out + (xi.hbar_shift(-sum(I)) * ymono[I])
    return out.truncate(cap)


def toeplitz_apply(f: WeylForm, s: WeylForm, phi: WeylForm, cap: int, method: str = "fixpoint") -> WeylForm:
    return projection((f * s).truncate(cap), phi, cap, method)


def fock_action(o: WeylForm, s: WeylForm) -> WeylForm:
    """Flat Bargmann-Fock action: ``y^I ybar^J . s = hbar^|J| d^J (y^I s)``."""
    _require_constant(o, "operator")
    n = o.n
    out = WeylForm.zero(n, min(o.cap + s.mindeg(), s.cap + o.mindeg()))
    for (h, e, f), c in o.terms.items():
        I, J = e[:n], e[n: 2 * n]
        X = s
        for i, p in enumerate(I):
            if p:
                X = X.mul_fiber(i, p)
        for j, q in enumerate(J):
            if q:
                X = X.diff_y(j, q).hbar_shift(2 * q)
        out = out + X.scale(c).hbar_shift(h)
    return out


def normal_symbol(f: WeylForm, phi: WeylForm, cap: int, wick: WickAlgebra | None = None) -> WeylForm:
    """``O_f`` with ``f e^{phi/hbar} = e^{phi/hbar} * O_f`` (star-inverse formula)."""
    _require_constant(f, "symbol")
    wick = wick or WickAlgebra.flat(f.n)
    E = exp_interaction(phi, cap)
    Einv = wick.star_inverse(E, cap)
    return wick.star(Einv, (f * E).truncate(cap)).truncate(cap)


def normal_symbol_from_operator(f: WeylForm, phi: WeylForm, cap: int, method: str = "gram",
                                wick: WickAlgebra | None = None) -> WeylForm:
    """Recover ``O_f`` from the matrix of ``T_{f,phi}`` on monomials.

    Writes ``T = sum m_AB y^A . (ybar^B .)`` by induction on |B|, then uses
    the representation property: ``y^A . (ybar^B . s) = (y^A * ybar^B) . s``.
    """
    n = f.n
    wick = wick or WickAlgebra.flat(n)
    coeffs: Dict[Tuple, Dict] = {}
    for d in range(cap + 1):
        for C in multi_indices(n, d):
            yC = WeylForm.monomial(n, 1, y=C, cap=INF)
            img = toeplitz_apply(f, yC, phi, cap + d, method)
            # subtract contributions of already known m_{A,B} with B < C
            for B, row in coeffs.items():
                if not all(b <= c for b, c in zip(B, C)):
                    continue
                falling = 1
                for b, c in zip(B, C):
                    falling *= factorial(c) // factorial(c - b)
                for A, m in row.items():
                    shifted = tuple(a + c - b for a, b, c in zip(A, B, C))
                    img = img - (m * WeylForm.monomial(n, falling, y=shifted)).hbar_shift(2 * sum(B))
            row = {}
            for (h, e, ff), c in img.terms.items():
                A = e[:n]
                row.setdefault(A, WeylForm.zero(n, INF))
                row[A] = row[A] + WeylForm.const(n, c / _fact(C)).hbar_shift(h - 2 * d)
            coeffs[C] = {A: m.with_cap(cap + d - sum(A)) for A, m in row.items()}
    out = WeylForm.zero(n, cap)
    for B, row in coeffs.items():
        yb = WeylForm.monomial(n, 1, yb=B, cap=INF)
        for A, m in row.items():
            ya = WeylForm.monomial(n, 1, y=A, cap=INF)
            out = out + (m * wick.star(ya, yb)).truncate(cap)
    return out.truncate(cap)
