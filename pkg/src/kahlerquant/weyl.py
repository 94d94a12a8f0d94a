"""Form-valued Weyl-bundle elements with jet coefficients.

A term is ``c * hbar^(h2/2) * y^I ybar^J * z^A zbar^B * (dz, dzbar)-monomial``.
Everything is graded by the filtration degree

    deg = h2 + |I| + |J| + |A| + |B| + (form degree)

Every operation in the engine is non-decreasing in ``deg`` once its
geometric inputs are known to enough order, so truncating at a fixed
degree is a quotient algebra and identities hold exactly there.  Each
element carries ``cap``: all terms of degree ``<= cap`` are exact, terms
above it are dropped.  Binary operations compute the cap they can still
vouch for, the same way jet orders propagate under differentiation.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from operator import add
from typing import Dict, Iterable, Tuple

from .jet import JetPoly
from .scalar import ONE, ZERO, Scalar, as_scalar

INF = 1 << 30

Key = Tuple[int, Tuple[int, ...], Tuple[int, ...]]


def key_degree(key: Key) -> int:
    return key[0] + sum(key[1]) + len(key[2])


@lru_cache(maxsize=None)
def wedge(f1: Tuple[int, ...], f2: Tuple[int, ...]):
    """Sign and sorted index tuple of ``f1 ^ f2``; sign 0 if they overlap."""
    if not f1:
        return 1, f2
    if not f2:
        return 1, f1
    if set(f1) & set(f2):
        return 0, ()
    inversions = sum(1 for a in f1 for b in f2 if a > b)
    return (-1) ** inversions, tuple(sorted(f1 + f2))


@lru_cache(maxsize=None)
def canonical_forms(idx: Tuple[int, ...]):
    """Sort an arbitrary index sequence; return (sign, sorted) or (0, ())."""
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    lst = list(idx)
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return sign, tuple(lst)


def _clamp(c: int) -> int:
    return INF if c >= INF // 2 else c


class WeylForm:
    """Sparse element of A^*(W) at the basepoint; immutable by convention.

    ``n`` is the complex dimension.  Exponent tuples have length ``4n``:
    ``y^1..y^n, yb^1..yb^n, z^1..z^n, zb^1..zb^n``.  Form indices
    ``0..n-1`` are ``dz^i`` and ``n..2n-1`` are ``dzbar^i``; stored sorted,
    so the dz block precedes the dzbar block.  Negative ``hbar`` powers are
    allowed (the extended algebra W+).
    """

    __slots__ = ("n", "cap", "terms")

    def __init__(self, n: int, cap: int = INF, terms: Dict[Key, Scalar] | None = None):
        self.n = n
        self.cap = cap
        self.terms: Dict[Key, Scalar] = {}
        if terms:
            for (h2, e, f), c in terms.items():
                c = as_scalar(c)
                if not c:
                    continue
                s, f = canonical_forms(tuple(f))
                if not s:
                    continue
                k = (h2, tuple(e), f)
                if len(k[1]) != 4 * n:
                    raise ValueError("exponent tuple must have length 4n")
                if key_degree(k) <= cap:
                    self.terms[k] = self.terms.get(k, ZERO) + (c if s == 1 else -c)
            self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def _raw(cls, n, cap, terms):
        out = cls.__new__(cls)
        out.n = n
        out.cap = _clamp(cap)
        out.terms = terms
        return out

    # constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, n, cap=INF):
        return cls._raw(n, cap, {})

    @classmethod
    def const(cls, n, c=1, cap=INF):
        c = as_scalar(c)
        return cls._raw(n, cap, {(0, (0,) * (4 * n), ()): c} if c else {})

    @classmethod
    def monomial(cls, n, coeff=1, *, h2=0, y=None, yb=None, z=None, zb=None, forms=(), cap=INF):
        zero = (0,) * n
        e = tuple(y or zero) + tuple(yb or zero) + tuple(z or zero) + tuple(zb or zero)
        return cls(n, cap, {(h2, e, tuple(forms)): coeff})

    @classmethod
    def var(cls, n, name: str, i: int = 0, cap=INF):
        """Single generator: ``y``, ``yb``, ``z``, ``zb``, ``dz``, ``dzb`` or ``hbar``."""
        e = [0] * (4 * n)
        blocks = {"y": 0, "yb": 1, "z": 2, "zb": 3}
        if name in blocks:
            e[blocks[name] * n + i] = 1
            return cls._raw(n, cap, {(0, tuple(e), ()): ONE})
        if name == "dz":
            return cls._raw(n, cap, {(0, tuple(e), (i,)): ONE})
        if name == "dzb":
            return cls._raw(n, cap, {(0, tuple(e), (n + i,)): ONE})
        if name == "hbar":
            return cls._raw(n, cap, {(2, tuple(e), ()): ONE})
        raise ValueError(f"unknown generator {name!r}")

    @classmethod
    def from_jet(cls, jet: JetPoly, cap: int | None = None):
        """Embed a jet as a fiber-constant 0-form; trusted to the jet order."""
        n = jet.n
        fz = (0,) * (2 * n)
        c = jet.order if cap is None else min(cap, jet.order)
        terms = {}
        for (a, b), v in jet.coeffs.items():
            if sum(a) + sum(b) <= c:
                terms[(0, fz + a + b, ())] = v
        return cls._raw(n, c, terms)

    def _new(self, terms, cap=None):
        return WeylForm._raw(self.n, self.cap if cap is None else cap, terms)

    # inspection ------------------------------------------------------------
    def mindeg(self) -> int:
        if not self.terms:
            return _clamp(self.cap + 1)
        return min(key_degree(k) for k in self.terms)

    def fiber_mindeg(self) -> int:
        """Min degree over terms that contain a fiber variable."""
        n2 = 2 * self.n
        ds = [key_degree(k) for k in self.terms if any(k[1][:n2])]
        return min(ds) if ds else _clamp(self.cap + 1)

    def is_zero(self) -> bool:
        return not self.terms

    def form_degrees(self):
        return {len(k[2]) for k in self.terms}

    def parity(self) -> int:
        """Form parity; raises if the element is not homogeneous in parity."""
        ps = {len(k[2]) % 2 for k in self.terms}
        if len(ps) > 1:
            raise ValueError("element is not of homogeneous form parity")
        return ps.pop() if ps else 0

    def max_abs(self):
        """Largest |coefficient|^2 as an exact rational (0 for the empty map)."""
        return max((c.norm2() for c in self.terms.values()), default=0)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (key_degree(kv[0]), kv[0]))

    def coefficient(self, h2=0, y=None, yb=None, forms=()) -> JetPoly:
        """The jet multiplying a given (hbar, y, yb, form) monomial."""
        n = self.n
        zero = (0,) * n
        fib = tuple(y or zero) + tuple(yb or zero)
        s, f = canonical_forms(tuple(forms))
        fdeg = h2 + sum(fib) + len(f)
        out = {}
        for (h, e, ff), c in self.terms.items():
            if h == h2 and ff == f and e[: 2 * n] == fib:
                out[(e[2 * n: 3 * n], e[3 * n:])] = c if s == 1 else -c
        return JetPoly(n, self.cap - fdeg, out)

    # comparison ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, WeylForm):
            return (self - other).is_zero()
        try:
            return (self - WeylForm.const(self.n, other)).is_zero()
        except TypeError:
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"WeylForm(n={self.n}, cap={self.cap}, {format_weyl(self)})"

    # linear structure ------------------------------------------------------
    def _coerce(self, other) -> "WeylForm":
        if isinstance(other, WeylForm):
            if other.n != self.n:
                raise ValueError("dimension mismatch")
            return other
        return WeylForm.const(self.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        cap = min(self.cap, other.cap)
        out = {k: v for k, v in self.terms.items() if key_degree(k) <= cap}
        for k, v in other.terms.items():
            if key_degree(k) > cap:
                continue
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return self._new(out, cap)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "WeylForm":
        c = as_scalar(c)
        if not c:
            return self._new({})
        return self._new({k: v * c for k, v in self.terms.items()})

    def truncate(self, cap: int) -> "WeylForm":
        cap = min(cap, self.cap)
        return self._new({k: v for k, v in self.terms.items() if key_degree(k) <= cap}, cap)

    def with_cap(self, cap: int) -> "WeylForm":
        """Declare an element exact to ``cap`` (for exact polynomials)."""
        return self._new({k: v for k, v in self.terms.items() if key_degree(k) <= cap}, cap)

    def hbar_shift(self, h2: int) -> "WeylForm":
        """Multiply by ``hbar^(h2/2)``; exact, so the cap moves with it."""
        return self._new({(k[0] + h2, k[1], k[2]): v for k, v in self.terms.items()}, self.cap + h2)

    # classical (graded-commutative) product -----------------------------------
    def __mul__(self, other):
        if not isinstance(other, WeylForm):
            return self.scale(other)
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        cap = _clamp(min(self.cap + other.mindeg(), other.cap + self.mindeg()))
        return self._new(_mul_terms(self.terms, other.terms, cap), cap)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = WeylForm.const(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    # fiber and base derivatives ---------------------------------------------
    def _diff(self, slot: int, times: int = 1, shift_cap: int = 1):
        out = {}
        for (h, e, f), v in self.terms.items():
            p = e[slot]
            if p < times:
                continue
            c = 1
            for t in range(times):
                c *= p - t
            e2 = e[:slot] + (p - times,) + e[slot + 1:]
            out[(h, e2, f)] = v * c
        return self._new(out, self.cap - shift_cap * times)

    def diff_y(self, i: int, times: int = 1):
        return self._diff(i, times)

    def diff_yb(self, j: int, times: int = 1):
        return self._diff(self.n + j, times)

    def diff_y_multi(self, P) -> "WeylForm":
        out = self
        for i, k in enumerate(P):
            if k:
                out = out._diff(i, k)
        return out

    def diff_yb_multi(self, Q) -> "WeylForm":
        out = self
        for j, k in enumerate(Q):
            if k:
                out = out._diff(self.n + j, k)
        return out

    def diff_z(self, i: int):
        """Coefficient derivative d/dz^i (not a form operation)."""
        return self._diff(2 * self.n + i)

    def diff_zb(self, i: int):
        return self._diff(3 * self.n + i)

    def mul_fiber(self, slot: int, power: int = 1):
        """Multiply by a single exponent generator (cap unchanged: exact)."""
        out = {}
        for (h, e, f), v in self.terms.items():
            out[(h, e[:slot] + (e[slot] + power,) + e[slot + 1:], f)] = v
        return self._new(out, self.cap + power).truncate(self.cap + power)

    def wedge_left(self, idx: int) -> "WeylForm":
        """``d(idx) ^ self`` with the new form generator on the left."""
        out = {}
        for (h, e, f), v in self.terms.items():
            s, f2 = wedge((idx,), f)
            if s:
                out[(h, e, f2)] = v if s == 1 else -v
        return self._new(out, self.cap + 1)

    def interior(self, idx: int) -> "WeylForm":
        """Contraction with the vector dual to form generator ``idx`` (odd derivation)."""
        out = {}
        for (h, e, f), v in self.terms.items():
            if idx in f:
                pos = f.index(idx)
                f2 = f[:pos] + f[pos + 1:]
                out[(h, e, f2)] = v if pos % 2 == 0 else -v
        return self._new(out, self.cap - 1)

    # filters ---------------------------------------------------------------
    def filter(self, pred) -> "WeylForm":
        return self._new({k: v for k, v in self.terms.items() if pred(k)})

    def form_part(self, p: int, q: int | None = None) -> "WeylForm":
        """Component of form type (p, q), or total degree p when q is None."""
        n = self.n
        if q is None:
            return self.filter(lambda k: len(k[2]) == p)
        return self.filter(lambda k: sum(1 for x in k[2] if x < n) == p and sum(1 for x in k[2] if x >= n) == q)

    def fiber_part(self, a: int | None = None, b: int | None = None) -> "WeylForm":
        """Component with y-degree a and ybar-degree b (None = any)."""
        n = self.n
        return self.filter(lambda k: (a is None or sum(k[1][:n]) == a) and (b is None or sum(k[1][n: 2 * n]) == b))

    def symbol(self) -> "WeylForm":
        """Fiber-constant part (y = ybar = 0), keeping hbar and jets."""
        if any(k[2] for k in self.terms):
            raise ValueError("symbol is defined on form degree 0 only")
        n2 = 2 * self.n
        return self.filter(lambda k: not any(k[1][:n2]))

    def at_basepoint(self) -> "WeylForm":
        """Evaluate jet coefficients at z = zbar = 0."""
        n2 = 2 * self.n
        return self.filter(lambda k: not any(k[1][n2:]))

    def conjugate(self) -> "WeylForm":
        n = self.n
        out = {}
        for (h, e, f), v in self.terms.items():
            e2 = e[n: 2 * n] + e[:n] + e[3 * n:] + e[2 * n: 3 * n]
            s, f2 = canonical_forms(tuple(x + n if x < n else x - n for x in f))
            c = v.conjugate()
            out[(h, e2, f2)] = c if s == 1 else -c
        return self._new(out)


def _mul_terms(ta: Dict[Key, Scalar], tb: Dict[Key, Scalar], cap: int) -> Dict[Key, Scalar]:
    if not ta or not tb:
        return {}
    bl = sorted(((key_degree(k), k[0], k[1], k[2], c) for k, c in tb.items()), key=lambda t: t[0])
    out: Dict[Key, Scalar] = {}
    get = out.get
    for (h1, e1, f1), c1 in ta.items():
        room = cap - (h1 + sum(e1) + len(f1))
        if room < 0:
            continue
        for d2, h2, e2, f2, c2 in bl:
            if d2 > room:
                break
            if f1 and f2:
                s, f = wedge(f1, f2)
                if not s:
                    continue
            else:
                s, f = 1, f1 or f2
            key = (h1 + h2, tuple(map(add, e1, e2)), f)
            v = c1 * c2
            if s < 0:
                v = -v
            old = get(key)
            out[key] = v if old is None else old + v
    return {k: v for k, v in out.items() if v}


def multi_indices(n: int, k: int):
    """All length-n tuples of non-negative ints summing to k."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in multi_indices(n - 1, k - first):
            yield (first,) + rest


def format_weyl(a: WeylForm) -> str:
    n = a.n
    names = [f"y{i + 1}" for i in range(n)] + [f"yb{i + 1}" for i in range(n)]
    names += [f"z{i + 1}" for i in range(n)] + [f"zb{i + 1}" for i in range(n)]
    fnames = [f"dz{i + 1}" for i in range(n)] + [f"dzb{i + 1}" for i in range(n)]
    parts = []
    for (h, e, f), c in a.items():
        mono = []
        if h:
            mono.append("h" if h == 2 else (f"h^{h // 2}" if h % 2 == 0 else f"h^({h}/2)"))
        mono += [nm + (f"^{p}" if p > 1 else "") for nm, p in zip(names, e) if p]
        if f:
            mono.append("^".join(fnames[x] for x in f))
        txt = str(c)
        if mono and txt in ("1", "-1"):
            txt = txt[:-1] + "*".join(mono)
        elif mono:
            txt = "*".join([txt] + mono)
        parts.append(txt)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def _matrices(P, Q):
    """Non-negative integer matrices with row sums P and column sums Q."""
    n = len(P)
    if n == 0:
        yield ()
        return

    def rows(i, remaining):
        if i == n:
            if not any(remaining):
                yield ()
            return
        for row in _compositions(P[i], remaining):
            rem = tuple(r - x for r, x in zip(remaining, row))
            for tail in rows(i + 1, rem):
                yield (row,) + tail

    yield from rows(0, tuple(Q))


def _compositions(total, bounds):
    if not bounds:
        if total == 0:
            yield ()
        return
    for x in range(min(total, bounds[0]), -1, -1):
        for rest in _compositions(total - x, bounds[1:]):
            yield (x,) + rest


class WickAlgebra:
    """Fiberwise Wick star product for a Kahler form known as a jet.

    ``omega_inv[i][j]`` is the inverse Kahler form component with upper
    indices (i, jbar), a fiber-constant 0-form.  The product is

        a * b = sum_k (i hbar / 2)^k / k! * omega^{i1 j1bar}...omega^{ik jkbar}
                d_y^{i1..ik} a  d_ybar^{j1..jk} b

    with graded multiplication of the form parts.
    """

    def __init__(self, n: int, omega_inv):
        self.n = n
        self.omega_inv = [[w for w in row] for row in omega_inv]
        self._kernel = {}

    @classmethod
    def flat(cls, n: int, scale=None):
        """Constant inverse form; ``omega^{i jbar} = 2i delta_ij`` by default."""
        c = as_scalar(scale) if scale is not None else Scalar(0, 2)
        rows = [[WeylForm.const(n, c if i == j else 0) for j in range(n)] for i in range(n)]
        return cls(n, rows)

    def kernel(self, P, Q) -> WeylForm:
        """Coefficient of ``d_y^P a d_ybar^Q b``, including ``hbar^k``."""
        key = (P, Q)
        got = self._kernel.get(key)
        if got is not None:
            return got
        n = self.n
        k = sum(P)
        total = WeylForm.zero(n)
        for M in _matrices(P, Q):
            term = WeylForm.const(n, 1)
            denom = 1
            for i in range(n):
                for j in range(n):
                    m = M[i][j]
                    if m:
                        term = term * self.omega_inv[i][j] ** m
                        for t in range(2, m + 1):
                            denom *= t
            total = total + term.scale(Scalar(1, 0) / denom)
        half_i = Scalar(0, 1) / 2
        out = total.scale(half_i ** k).hbar_shift(2 * k)
        self._kernel[key] = out
        return out

    def _contractions(self, a: WeylForm, b: WeylForm, k_min: int):
        """Sum of the k >= k_min contraction terms of ``a * b``."""
        n = self.n
        parts = []
        ay = [sum(e[:n]) for (_, e, _) in a.terms]
        byb = [sum(e[n: 2 * n]) for (_, e, _) in b.terms]
        kmax = min(max(ay, default=0), max(byb, default=0))
        for k in range(max(k_min, 1), kmax + 1):
            for P in multi_indices(n, k):
                da = a.diff_y_multi(P)
                if da.is_zero():
                    continue
                for Q in multi_indices(n, k):
                    db = b.diff_yb_multi(Q)
                    if db.is_zero():
                        continue
                    kern = self.kernel(P, Q)
                    if kern.is_zero():
                        continue
                    parts.append(kern * (da * db))
        return parts

    def star(self, a: WeylForm, b: WeylForm) -> WeylForm:
        out = a * b
        cap = out.cap
        for p in self._contractions(a, b, 1):
            out = out + p
        # contraction terms keep the degree, so trust the classical cap and
        # the fiber-degree bound, whichever is smaller
        fcap = min(a.cap + b.fiber_mindeg(), b.cap + a.fiber_mindeg())
        return out.truncate(min(cap, fcap) if (a.terms and b.terms) else cap)

    def commutator(self, a: WeylForm, b: WeylForm) -> WeylForm:
        """Graded commutator ``a*b - (-1)^{|a||b|} b*a``."""
        sign = -1 if (a.parity() and b.parity()) else 1
        ab = self.star(a, b)
        ba = self.star(b, a)
        return ab - ba if sign == 1 else ab + ba

    def bracket_over_hbar(self, a: WeylForm, b: WeylForm) -> WeylForm:
        """``(1/hbar) [a, b]`` computed without forming ``hbar^-1`` of the
        classical part, which cancels in the graded commutator."""
        sign = -1 if (a.parity() and b.parity()) else 1
        n = self.n
        cap = min(a.cap + b.fiber_mindeg(), b.cap + a.fiber_mindeg()) - 2
        out = WeylForm.zero(n, cap + 2)
        for p in self._contractions(a, b, 1):
            out = out + p
        for p in self._contractions(b, a, 1):
            out = out - p if sign == 1 else out + p
        return out.hbar_shift(-2).truncate(cap)

    def square_over_hbar(self, a: WeylForm) -> WeylForm:
        """``(1/hbar) a*a`` for an odd element (its classical part is zero)."""
        if a.parity() != 1:
            raise ValueError("square_over_hbar expects an odd form")
        return self.bracket_over_hbar(a, a).scale(Scalar(1, 0) / 2)

    def star_power(self, a: WeylForm, k: int) -> WeylForm:
        out = WeylForm.const(self.n, 1)
        for _ in range(k):
            out = self.star(out, a)
        return out

    def star_inverse(self, u: WeylForm, cap: int | None = None) -> WeylForm:
        """Inverse of ``1 + x`` with ``x`` of positive degree (Neumann series)."""
        n = self.n
        one = WeylForm.const(n, 1)
        x = u - one
        if x.terms and x.mindeg() < 1:
            raise ValueError("star_inverse needs u = 1 + (terms of positive degree)")
        c = u.cap if cap is None else min(cap, u.cap)
        x = x.truncate(c)
        out = one.with_cap(c)
        term = one.with_cap(c)
        for _ in range(c + 1):
            term = (-self.star(term, x)).truncate(c)
            if term.is_zero():
                break
            out = out + term
        return out


def classical_exp(x: WeylForm) -> WeylForm:
    """``exp(x)`` in the classical product; needs ``x`` of positive degree."""
    n = x.n
    if x.terms and x.mindeg() < 1:
        raise ValueError("exponent must have positive filtration degree")
    if any(k[2] for k in x.terms):
        raise ValueError("exponent must be a 0-form")
    out = WeylForm.const(n, 1, x.cap)
    term = WeylForm.const(n, 1)
    m = 0
    while True:
        m += 1
        term = (term * x).scale(Scalar(1, 0) / m).truncate(x.cap)
        if term.is_zero():
            break
        out = out + term
    return out


def star_exp(phi: WeylForm) -> WeylForm:
    """``exp(phi / hbar)`` with the classical product.

    ``phi`` must be divisible enough by hbar that ``phi/hbar`` has
    positive filtration degree (weight at least 3 in practice).
    """
    return classical_exp(phi.hbar_shift(-2))
