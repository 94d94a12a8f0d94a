"""Kahler jet geometry at a basepoint.

Conventions: ``g_{i jbar} = d_i d_jbar rho`` and ``omega_{i jbar} = (i/2) g``,
so ``d dbar rho = -2i omega``.  The inverse form ``omega^{i jbar} = 2i g^{i jbar}``
satisfies ``omega^{i jbar} omega_{k jbar} = -delta``.  Christoffels are
``Gamma^m_{ik} = g^{m lbar} d_i g_{k lbar}`` and curvature is
``R^m_{i jbar k} = d_jbar Gamma^m_{ik}``, so ``Ric_{i jbar} = R^k_{i jbar k}
= d_i d_jbar log det g``.  With this sign the Fedosov residual vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import gmpy2

from .jet import JetPoly, unit
from .scalar import ONE, ZERO, Scalar, as_scalar
from .weyl import WeylForm

I2 = Scalar(0, 2)


@dataclass(frozen=True)
class PotentialJet:
    rho: JetPoly

    def __post_init__(self):
        if not self.rho.is_real():
            raise ValueError("Kahler potential must be real")
        if self.rho.order < 2:
            raise ValueError("potential needs jet order >= 2")
        h = hessian0(self.rho)
        if _det(h) == ZERO:
            raise ValueError("singular metric at the basepoint")

    @property
    def n(self) -> int:
        return self.rho.n

    @property
    def jet_order(self) -> int:
        return self.rho.order


def hessian0(rho: JetPoly) -> List[List[Scalar]]:
    n = rho.n
    return [[rho.coeffs.get((unit(n, i), unit(n, j)), ZERO) for j in range(n)] for i in range(n)]


def _det(m):
    """Determinant by fraction-free expansion; fine for desk-scale n."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = ZERO
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = m[0][j] * _det(minor)
        total = total + t if j % 2 == 0 else total - t
    return total


def scalar_matrix_inverse(m):
    n = len(m)
    a = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = a[c][c].inverse()
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def jet_matrix_inverse(m: List[List[JetPoly]]) -> List[List[JetPoly]]:
    """Inverse of a jet matrix with invertible constant part (Neumann series)."""
    n = len(m)
    order = min(x.order for row in m for x in row)
    m0inv = scalar_matrix_inverse([[x.constant() for x in row] for row in m])
    dim = m[0][0].n
    c0 = [[JetPoly.const(dim, order, m0inv[i][j]) for j in range(n)] for i in range(n)]
    # N = -m0^{-1} (m - m0); inverse = sum_k N^k m0^{-1}
    rest = [[m[i][j] - JetPoly.const(dim, order, m[i][j].constant()) for j in range(n)] for i in range(n)]
    N = _matmul(c0, rest)
    N = [[-x for x in row] for row in N]
    out = c0
    term = c0
    for _ in range(order):
        term = _matmul(N, term)
        if all(x.is_zero() for row in term for x in row):
            break
        out = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(out, term)]
    return out


def _matmul(a, b):
    n = len(a)
    return [[_sum([a[i][k] * b[k][j] for k in range(n)]) for j in range(n)] for i in range(n)]


def _sum(xs):
    out = xs[0]
    for x in xs[1:]:
        out = out + x
    return out


@dataclass
class KahlerData:
    potential: PotentialJet
    metric: List[List[JetPoly]]          # g_{i jbar}
    metric_inv: List[List[JetPoly]]      # g^{i jbar}
    omega_lower: List[List[JetPoly]]
    omega_upper: List[List[JetPoly]]
    christoffel: List[List[List[JetPoly]]]   # [m][i][k] -> Gamma^m_{ik}
    curvature: List[List[List[List[JetPoly]]]]  # [m][i][j][k] -> R^m_{i jbar k}
    ricci: List[List[JetPoly]]
    log_h: JetPoly
    _w: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.potential.n

    @property
    def jet_order(self) -> int:
        return self.potential.jet_order

    # WeylForm views (fiber-constant 0-forms) -----------------------------
    def w(self, name: str, *idx) -> WeylForm:
        key = (name,) + idx
        got = self._w.get(key)
        if got is None:
            src = getattr(self, name)
            for i in idx:
                src = src[i]
            got = WeylForm.from_jet(src)
            self._w[key] = got
        return got

    def gamma_bar(self, m, i, k) -> WeylForm:
        key = ("gamma_bar", m, i, k)
        got = self._w.get(key)
        if got is None:
            got = self.w("christoffel", m, i, k).conjugate()
            self._w[key] = got
        return got


def kahler_from_potential(p: PotentialJet) -> KahlerData:
    rho = p.rho
    n = p.n
    g = [[rho.diff_z(i).diff_zb(j) for j in range(n)] for i in range(n)]
    # g^{i jbar} g_{k jbar} = delta_ik  <=>  ginv = (g^T)^{-1}
    gT = [[g[j][i] for j in range(n)] for i in range(n)]
    ginv = jet_matrix_inverse(gT)
    half_i = Scalar(0, 1) / 2
    omega_lower = [[x * half_i for x in row] for row in g]
    omega_upper = [[x * I2 for x in row] for row in ginv]
    chris = [[[_sum([ginv[m][l] * g[k][l].diff_z(i) for l in range(n)]) for k in range(n)]
              for i in range(n)] for m in range(n)]
    curv = [[[[chris[m][i][k].diff_zb(j) for k in range(n)] for j in range(n)]
             for i in range(n)] for m in range(n)]
    ricci = [[_sum([curv[k][i][j][k] for k in range(n)]) for j in range(n)] for i in range(n)]
    det = _jet_det(g)
    c = det.constant()
    log_h = (det * c.inverse()).log_unit()
    return KahlerData(p, g, ginv, omega_lower, omega_upper, chris, curv, ricci, log_h)


def _jet_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = m[0][j] * _jet_det(minor)
        if j % 2:
            t = -t
        total = t if total is None else total + t
    return total


# built-in potentials -------------------------------------------------------

def builtin_geometry(name: str, n: int, jet_order: int) -> PotentialJet:
    s = JetPoly(n, jet_order)
    for i in range(n):
        s = s + JetPoly.z(n, jet_order, i) * JetPoly.zb(n, jet_order, i)
    one = JetPoly.const(n, jet_order)
    if name == "flat":
        rho = s
    elif name == "fs":
        rho = (one + s).log_unit()
    elif name == "hyp":
        rho = -(one - s).log_unit()
    else:
        raise ValueError(f"unknown geometry {name!r} (expected flat, fs or hyp)")
    return PotentialJet(rho)


def potential_from_table(n: int, jet_order: int, table) -> PotentialJet:
    """Build a potential from ``[(I, J, coeff), ...]`` entries."""
    coeffs = {}
    for a, b, c in table:
        coeffs[(tuple(a), tuple(b))] = as_scalar(c) if not isinstance(c, (dict, str)) else Scalar.parse(c)
    return PotentialJet(JetPoly(n, jet_order, coeffs))


# K-normal form ---------------------------------------------------------------

def is_k_normal(p: PotentialJet) -> bool:
    n = p.n
    for (a, b), c in p.rho.coeffs.items():
        da, db = sum(a), sum(b)
        if da == 0 or db == 0:
            return False
        if da == 1 and db == 1:
            if c != (ONE if a == b else ZERO):
                return False
        elif da == 1 or db == 1:
            return False
    return all(hessian0(p.rho)[i][i] == ONE for i in range(n))


def _exact_sqrt(q) -> gmpy2.mpq:
    q = gmpy2.mpq(q)
    num, den = q.numerator, q.denominator
    rn, en = gmpy2.iroot(num, 2)
    rd, ed = gmpy2.iroot(den, 2)
    if not (en and ed):
        raise ValueError(f"K-normalization needs sqrt({q}), which is not rational")
    return gmpy2.mpq(rn, rd)


def k_normalize(p: PotentialJet):
    """Return ``(normal_potential, zs)`` with old coordinates ``z^i = zs[i](w)``.

    Pure terms are dropped (a Kahler gauge change), the basepoint metric is
    brought to the identity by a rational LDL* factorization, then the
    ``(m, 1)`` terms are killed degree by degree with ``w -> w - q_m(w)``.
    """
    n, order = p.n, p.jet_order
    rho = JetPoly(n, order, {k: v for k, v in p.rho.coeffs.items() if sum(k[0]) and sum(k[1])})
    # H = G0^T is Hermitian; H = L D L^*, change z = M w with M = L^{-*} D^{-1/2}
    g0 = hessian0(rho)
    H = [[g0[j][i] for j in range(n)] for i in range(n)]
    L = [[ZERO] * n for _ in range(n)]
    D = [ZERO] * n
    for j in range(n):
        d = H[j][j] - _sumS([L[j][k] * L[j][k].conjugate() * D[k] for k in range(j)])
        if d.im != 0 or d.re <= 0:
            raise ValueError("metric at the basepoint is not positive definite")
        D[j] = d
        L[j][j] = ONE
        for i in range(j + 1, n):
            L[i][j] = (H[i][j] - _sumS([L[i][k] * L[j][k].conjugate() * D[k] for k in range(j)])) / d
    Lstar = [[L[j][i].conjugate() for j in range(n)] for i in range(n)]
    Linv_star = scalar_matrix_inverse(Lstar)
    roots = [Scalar(_exact_sqrt(d.re)).inverse() for d in D]
    M = [[Linv_star[i][j] * roots[j] for j in range(n)] for i in range(n)]
    zs = [_linear(n, order, M[i]) for i in range(n)]
    rho = rho.substitute(zs, [z.conjugate() for z in zs])
    for m in range(2, order):
        # coefficient a_{I j} of w^I wbar^j with |I| = m
        qs = [JetPoly(n, order) for _ in range(n)]
        hit = False
        for (a, b), c in rho.coeffs.items():
            if sum(a) == m and sum(b) == 1:
                j = b.index(1)
                qs[j] = qs[j] + JetPoly(n, order, {(a, (0,) * n): c})
                hit = True
        if not hit:
            continue
        new = [JetPoly.z(n, order, j) - qs[j] for j in range(n)]
        rho = rho.substitute(new, [x.conjugate() for x in new])
        zs = [z.substitute(new, [x.conjugate() for x in new]) for z in zs]
    rho = JetPoly(n, order, {k: v for k, v in rho.coeffs.items() if sum(k[0]) and sum(k[1])})
    return PotentialJet(rho), zs


def _linear(n, order, row):
    return JetPoly(n, order, {(unit(n, k), (0,) * n): c for k, c in enumerate(row) if c})


def _sumS(xs):
    out = ZERO
    for x in xs:
        out = out + x
    return out


# covariant derivative -----------------------------------------------------------

def nabla(a: WeylForm, geo: KahlerData, part: str = "full") -> WeylForm:
    """Exterior covariant derivative of a Weyl-bundle valued form.

    ``part`` is ``"full"``, ``"10"`` (dz component) or ``"01"`` (dzbar).
    New form generators are wedged on the left.
    """
    n = a.n
    out = WeylForm.zero(n, a.cap)
    if part in ("full", "10"):
        for k in range(n):
            t = a.diff_z(k)
            for m in range(n):
                dm = a.diff_y(m)
                if dm.is_zero():
                    continue
                for i in range(n):
                    G = geo.w("christoffel", m, k, i)
                    if not G.is_zero():
                        t = t - G * dm.mul_fiber(i)
            out = out + t.wedge_left(k)
    if part in ("full", "01"):
        for k in range(n):
            t = a.diff_zb(k)
            for m in range(n):
                dm = a.diff_yb(m)
                if dm.is_zero():
                    continue
                for i in range(n):
                    G = geo.gamma_bar(m, k, i)
                    if not G.is_zero():
                        t = t - G * dm.mul_fiber(n + i)
            out = out + t.wedge_left(n + k)
    return out
