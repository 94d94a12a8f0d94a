"""Truncated Taylor jets in ``z^1..z^n, zb^1..zb^n`` at the basepoint."""
from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, Tuple

from .scalar import ONE, ZERO, Scalar, as_scalar

Mono = Tuple[Tuple[int, ...], Tuple[int, ...]]


def _add_t(a, b):
    return tuple(x + y for x, y in zip(a, b))


def unit(n: int, i: int) -> Tuple[int, ...]:
    return tuple(1 if k == i else 0 for k in range(n))


class JetPoly:
    """Sparse polynomial in ``z, zb`` trusted up to total degree ``order``.

    Keys are ``(A, B)`` exponent tuples for ``z^A zb^B``.  Terms above
    ``order`` are never stored.
    """

    __slots__ = ("n", "order", "coeffs")

    def __init__(self, n: int, order: int, coeffs: Dict[Mono, Scalar] | None = None):
        self.n = n
        self.order = order
        self.coeffs: Dict[Mono, Scalar] = {}
        if coeffs:
            for (a, b), c in coeffs.items():
                c = as_scalar(c)
                if c and sum(a) + sum(b) <= order:
                    if len(a) != n or len(b) != n:
                        raise ValueError("multi-index length does not match dimension")
                    self.coeffs[(tuple(a), tuple(b))] = c

    # constructors ----------------------------------------------------------
    @classmethod
    def const(cls, n, order, c=1) -> "JetPoly":
        z = (0,) * n
        return cls(n, order, {(z, z): as_scalar(c)})

    @classmethod
    def z(cls, n, order, i, power=1) -> "JetPoly":
        e = tuple(power if k == i else 0 for k in range(n))
        return cls(n, order, {(e, (0,) * n): ONE})

    @classmethod
    def zb(cls, n, order, i, power=1) -> "JetPoly":
        e = tuple(power if k == i else 0 for k in range(n))
        return cls(n, order, {((0,) * n, e): ONE})

    def _new(self, coeffs, order=None):
        out = JetPoly.__new__(JetPoly)
        out.n = self.n
        out.order = self.order if order is None else order
        out.coeffs = coeffs
        return out

    def _check(self, other):
        if not isinstance(other, JetPoly):
            other = JetPoly.const(self.n, self.order, other)
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        return other

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = self._check(other)
        order = min(self.order, other.order)
        out = {k: c for k, c in self.coeffs.items() if sum(k[0]) + sum(k[1]) <= order}
        for k, c in other.coeffs.items():
            if sum(k[0]) + sum(k[1]) > order:
                continue
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return self._new(out, order)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, JetPoly):
            c = as_scalar(other)
            if not c:
                return self._new({})
            return self._new({k: v * c for k, v in self.coeffs.items()})
        other = self._check(other)
        order = min(self.order, other.order)
        out: Dict[Mono, Scalar] = {}
        for (a1, b1), c1 in self.coeffs.items():
            d1 = sum(a1) + sum(b1)
            if d1 > order:
                continue
            for (a2, b2), c2 in other.coeffs.items():
                if d1 + sum(a2) + sum(b2) > order:
                    continue
                k = (_add_t(a1, a2), _add_t(b1, b2))
                out[k] = out.get(k, ZERO) + c1 * c2
        return self._new({k: v for k, v in out.items() if v}, order)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = JetPoly.const(self.n, self.order)
        for _ in range(k):
            out = out * self
        return out

    def diff_z(self, i: int) -> "JetPoly":
        out = {}
        for (a, b), c in self.coeffs.items():
            if a[i]:
                a2 = a[:i] + (a[i] - 1,) + a[i + 1:]
                out[(a2, b)] = c * a[i]
        return self._new(out, self.order - 1)

    def diff_zb(self, i: int) -> "JetPoly":
        out = {}
        for (a, b), c in self.coeffs.items():
            if b[i]:
                b2 = b[:i] + (b[i] - 1,) + b[i + 1:]
                out[(a, b2)] = c * b[i]
        return self._new(out, self.order - 1)

    def conjugate(self) -> "JetPoly":
        return self._new({(b, a): c.conjugate() for (a, b), c in self.coeffs.items()})

    def truncate(self, order: int) -> "JetPoly":
        order = min(order, self.order)
        return self._new({k: c for k, c in self.coeffs.items() if sum(k[0]) + sum(k[1]) <= order}, order)

    def constant(self) -> Scalar:
        z = (0,) * self.n
        return self.coeffs.get((z, z), ZERO)

    def invert(self) -> "JetPoly":
        """Multiplicative inverse up to ``order`` (Neumann series)."""
        c = self.constant()
        if not c:
            raise ZeroDivisionError("jet with zero constant term is not invertible")
        cinv = c.inverse()
        x = (self * cinv) - 1  # no constant term
        out = JetPoly.const(self.n, self.order)
        term = JetPoly.const(self.n, self.order)
        for _ in range(self.order):
            term = -(term * x)
            if term.is_zero():
                break
            out = out + term
        return out * cinv

    def log_unit(self) -> "JetPoly":
        """``log(self)`` for a jet with constant term 1."""
        if self.constant() != ONE:
            raise ValueError("log_unit needs constant term 1")
        x = self - 1
        out = JetPoly(self.n, self.order)
        term = JetPoly.const(self.n, self.order)
        for k in range(1, self.order + 1):
            term = term * x
            if term.is_zero():
                break
            out = out + term * (Scalar((-1) ** (k + 1)) / k)
        return out

    def substitute(self, zs, zbs) -> "JetPoly":
        """Compose with ``z^i -> zs[i]``, ``zb^i -> zbs[i]`` (jets without constant term)."""
        order = min([self.order] + [p.order for p in list(zs) + list(zbs)])
        out = JetPoly(self.n, order)
        cache: dict = {}

        def power(p, which, i, k):
            key = (which, i, k)
            if key not in cache:
                cache[key] = JetPoly.const(self.n, order) if k == 0 else power(p, which, i, k - 1) * p
            return cache[key]

        for (a, b), c in self.coeffs.items():
            if sum(a) + sum(b) > order:
                continue
            term = JetPoly.const(self.n, order, c)
            for i, k in enumerate(a):
                if k:
                    term = term * power(zs[i], 0, i, k)
            for i, k in enumerate(b):
                if k:
                    term = term * power(zbs[i], 1, i, k)
            out = out + term
        return out

    # predicates ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_real(self) -> bool:
        return self == self.conjugate()

    def is_holomorphic(self) -> bool:
        return all(not any(b) for (_, b) in self.coeffs)

    def terms(self) -> Iterable[Tuple[Mono, Scalar]]:
        return sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0]))

    def __eq__(self, other):
        if isinstance(other, JetPoly):
            if other.n != self.n:
                return False
            order = min(self.order, other.order)
            return self.truncate(order).coeffs == other.truncate(order).coeffs
        try:
            other = JetPoly.const(self.n, self.order, other)
        except TypeError:
            return NotImplemented
        return self == other

    __hash__ = None

    def __repr__(self):
        return f"JetPoly(n={self.n}, order={self.order}, {format_jet(self)})"


def format_jet(p: JetPoly) -> str:
    parts = []
    for (a, b), c in p.terms():
        mono = [f"z{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(a) if k]
        mono += [f"zb{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(b) if k]
        parts.append("*".join([str(c)] + mono) if mono else str(c))
    return " + ".join(parts) if parts else "0"


def all_monomials(n: int, max_degree: int):
    """Every ``(A, B)`` with ``|A|+|B| <= max_degree``."""
    for e in product(range(max_degree + 1), repeat=2 * n):
        if sum(e) <= max_degree:
            yield tuple(e[:n]), tuple(e[n:])
