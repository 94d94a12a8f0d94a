"""JSON configuration and report documents.

Exact values never pass through floats: rationals are written as "p/q"
strings, Gaussian rationals as {"re": "p/q", "im": "r/s"}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional

from ..fedosov import ConnectionData, build_connection
from ..geometry import KahlerData, PotentialJet, builtin_geometry, kahler_from_potential, potential_from_table
from ..scalar import Scalar
from ..weyl import WeylForm
from .parser import parse_expression


class ConfigError(ValueError):
    pass


# how far beyond the working cap the potential is expanded; Christoffels lose
# 3 orders and curvature 4, connection pieces sit 3 above the cap
POTENTIAL_MARGIN = 8


@dataclass
class Caps:
    weight_cap: int = 8
    jet_order: int = 8
    hbar_order: int = 3

    def __post_init__(self):
        for name in ("weight_cap", "jet_order", "hbar_order"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"caps.{name} must be a positive integer")

    @property
    def working(self) -> int:
        return min(self.weight_cap, self.jet_order)

    def raised(self, by: int) -> "Caps":
        return Caps(self.weight_cap + by, self.jet_order + by, self.hbar_order)

    def to_json(self):
        return {"weight_cap": self.weight_cap, "jet_order": self.jet_order, "hbar_order": self.hbar_order}


@dataclass
class Config:
    geometry: Dict[str, Any] = field(default_factory=lambda: {"name": "fs", "n": 1})
    alpha: Any = "zero"
    caps: Caps = field(default_factory=Caps)
    checks: List[str] = field(default_factory=list)
    expressions: Dict[str, str] = field(default_factory=dict)
    seed: int = 0

    @property
    def n(self) -> int:
        return int(self.geometry.get("n", 1))

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Config":
        from .checks import CATALOG
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - {"geometry", "alpha", "caps", "checks", "expressions", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        geo = d.get("geometry", {"name": "fs", "n": 1})
        if isinstance(geo, str):
            geo = {"name": geo, "n": 1}
        if not isinstance(geo, dict) or not ("name" in geo or "potential" in geo):
            raise ConfigError("geometry needs a builtin 'name' or a 'potential' table")
        if "name" in geo and geo["name"] not in ("flat", "fs", "hyp"):
            raise ConfigError(f"unknown geometry {geo['name']!r}")
        caps = d.get("caps", {})
        if not isinstance(caps, dict):
            raise ConfigError("caps must be an object")
        try:
            caps = Caps(**caps)
        except TypeError as e:
            raise ConfigError(f"bad caps: {e}") from None
        checks = d.get("checks", list(CATALOG))
        if checks == "all":
            checks = list(CATALOG)
        bad = [c for c in checks if c not in CATALOG]
        if bad:
            raise ConfigError(f"unknown checks: {bad}")
        alpha = d.get("alpha", "zero")
        if not (alpha in ("zero", "minus-hbar-ricci") or (isinstance(alpha, dict) and "potential" in alpha)):
            raise ConfigError("alpha must be 'zero', 'minus-hbar-ricci' or {'potential': EXPR}")
        if isinstance(alpha, dict):
            try:
                pot = parse_expression(alpha["potential"], int(geo.get("n", 1)))
            except ValueError as e:
                raise ConfigError(f"alpha potential: {e}") from None
            n = pot.n
            if any(k[0] == 0 and any(k[1][2 * n: 3 * n]) and any(k[1][3 * n:]) for k in pot.terms):
                raise ConfigError("alpha potential must lie in hbar * A^2 (mixed terms need a positive hbar power)")
        seed = d.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("seed must be an integer")
        exprs = d.get("expressions", {})
        cfg = cls(geo, alpha, caps, list(checks), dict(exprs), seed)
        for name, text in exprs.items():
            try:
                parse_expression(text, cfg.n)
            except ValueError as e:
                raise ConfigError(f"expression {name!r}: {e}") from None
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        return cls.from_dict(data)

    def to_json(self):
        return {"geometry": self.geometry, "alpha": self.alpha, "caps": self.caps.to_json(),
                "checks": self.checks, "expressions": self.expressions, "seed": self.seed}


# geometry and connection construction, memoized per process -------------------------

def _freeze(obj):
    return json.dumps(obj, sort_keys=True)


@lru_cache(maxsize=32)
def _potential(geo_json: str, order: int) -> PotentialJet:
    geo = json.loads(geo_json)
    n = int(geo.get("n", 1))
    if "name" in geo:
        return builtin_geometry(geo["name"], n, order)
    table = []
    for entry in geo["potential"]:
        table.append((entry["I"], entry["J"], Scalar.parse(entry["c"])))
    return potential_from_table(n, order, table)


@lru_cache(maxsize=32)
def _kahler(geo_json: str, order: int) -> KahlerData:
    return kahler_from_potential(_potential(geo_json, order))


@lru_cache(maxsize=64)
def _connection(geo_json: str, alpha_json: str, cap: int) -> ConnectionData:
    geo = _kahler(geo_json, cap + POTENTIAL_MARGIN)
    alpha = json.loads(alpha_json)
    if isinstance(alpha, dict):
        alpha = parse_expression(alpha["potential"], geo.n).with_cap(cap + POTENTIAL_MARGIN)
    return build_connection(geo, alpha, cap)


def connection_for(geometry, alpha, cap: int) -> ConnectionData:
    return _connection(_freeze(geometry), _freeze(alpha), cap)


def kahler_for(geometry, cap: int) -> KahlerData:
    return _kahler(_freeze(geometry), cap + POTENTIAL_MARGIN)


# serialization helpers -------------------------------------------------------------

def rational_str(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def scalar_json(c: Scalar):
    return {"re": rational_str(c.re), "im": rational_str(c.im)}


def residual_max_abs(forms) -> str:
    """Largest component magnitude max(|re|, |im|) over all coefficients."""
    best = 0
    for f in forms:
        for c in f.terms.values():
            best = max(best, abs(c.re), abs(c.im))
    from gmpy2 import mpq
    return rational_str(mpq(best))


def weyl_json(a: WeylForm):
    """List of [hbar2, exponents, forms, coefficient] records."""
    return [[k[0], list(k[1]), list(k[2]), scalar_json(c)] for k, c in a.items()]
