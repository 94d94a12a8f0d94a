import pytest

from kahlerquant import JetPoly, Scalar, WeylForm
from kahlerquant.fedosov import build_connection
from kahlerquant.geometry import (
    PotentialJet, builtin_geometry, is_k_normal, k_normalize, kahler_from_potential, nabla,
    potential_from_table,
)

from conftest import CAP, generic_potential


def zzb(order, power=1):
    return (JetPoly.z(1, order, 0) * JetPoly.zb(1, order, 0)) ** power


def test_builtin_potentials():
    assert builtin_geometry("flat", 1, 6).rho == zzb(6)
    third = Scalar(1, 0) / 3
    half = Scalar(1, 0) / 2
    assert builtin_geometry("fs", 1, 6).rho == zzb(6) - zzb(6, 2) * half + zzb(6, 3) * third
    assert builtin_geometry("hyp", 1, 4).rho == zzb(4) + zzb(4, 2) * half
    with pytest.raises(ValueError):
        builtin_geometry("sphere", 1, 4)


def test_potential_validation():
    with pytest.raises(ValueError):
        PotentialJet(JetPoly.z(1, 4, 0, 2) * JetPoly.zb(1, 4, 0) * Scalar(0, 1))   # not real
    with pytest.raises(ValueError):
        PotentialJet(JetPoly.z(1, 4, 0, 2) * JetPoly.zb(1, 4, 0, 2))   # degenerate metric


def test_curvature_at_basepoint(geos):
    # constant curvature: FS and HYP differ by the sign of R, flat has none
    R = {name: geos[name].curvature[0][0][0][0].constant() for name in ("flat", "fs", "hyp")}
    assert R == {"flat": Scalar(0), "fs": Scalar(-2), "hyp": Scalar(2)}
    assert geos["fs"].ricci[0][0].constant() == -geos["hyp"].ricci[0][0].constant()


def test_metric_inverse(geos):
    for geo in geos.values():
        prod = geo.metric[0][0] * geo.metric_inv[0][0]
        assert prod.truncate(geo.jet_order - 2) == 1


@pytest.mark.parametrize("name", ["flat", "fs", "hyp", "gen"])
def test_log_h_gives_ricci(geos, name):
    geo = geos[name]
    assert geo.log_h.diff_z(0).diff_zb(0) == geo.ricci[0][0]


@pytest.mark.parametrize("name", ["fs", "hyp", "gen"])
def test_volume_density_pure_derivatives_vanish(geos, name):
    # for K-normal data h = det g has h(0) = 1 and no pure (anti)holomorphic terms
    geo = geos[name]
    h = geo.metric[0][0]
    assert h.constant() == 1
    pure = [k for k in h.coeffs if (sum(k[0]) == 0) != (sum(k[1]) == 0)]
    assert pure == []


def test_k_normal_predicate():
    order = 6
    assert is_k_normal(builtin_geometry("flat", 1, order))
    assert is_k_normal(builtin_geometry("fs", 1, order))
    rho = zzb(order) + JetPoly.z(1, order, 0, 2) * JetPoly.zb(1, order, 0) \
        + JetPoly.z(1, order, 0) * JetPoly.zb(1, order, 0, 2)
    assert not is_k_normal(PotentialJet(rho))


def test_k_normalize_kills_mixed_linear_terms():
    order = 6
    rho = zzb(order) + JetPoly.z(1, order, 0, 2) * JetPoly.zb(1, order, 0) \
        + JetPoly.z(1, order, 0) * JetPoly.zb(1, order, 0, 2)
    normal, zs = k_normalize(PotentialJet(rho))
    assert is_k_normal(normal)
    # the coordinate change is tangent to the identity, hence invertible
    assert zs[0].truncate(1) == JetPoly.z(1, order, 0)


def test_k_normalize_rescale_and_identity():
    order = 6
    normal, zs = k_normalize(PotentialJet(zzb(order) * 4))
    assert normal.rho == zzb(order)
    assert zs[0] == JetPoly.z(1, order, 0) * (Scalar(1, 0) / 2)
    fs = builtin_geometry("fs", 1, order)
    same, zs = k_normalize(fs)
    assert same.rho == fs.rho and zs[0] == JetPoly.z(1, order, 0)
    # 2 z zbar would need sqrt(2)
    with pytest.raises(ValueError):
        k_normalize(PotentialJet(zzb(order) * 2))


def test_k_normalize_recovers_curvature():
    # gauge term + holomorphic change applied to FS, then normalized again
    order = 8
    fs = builtin_geometry("fs", 1, order)
    w = JetPoly.z(1, order, 0)
    change = w + w * w * Scalar(1, 1) + w ** 3 * 2
    rho = fs.rho.substitute([change], [change.conjugate()])
    pure = w ** 3 * Scalar(0, 1) + w ** 2
    rho = rho + pure + pure.conjugate()
    normal, _ = k_normalize(PotentialJet(rho))
    assert is_k_normal(normal)
    a = kahler_from_potential(normal)
    b = kahler_from_potential(fs)
    assert a.curvature[0][0][0][0].constant() == b.curvature[0][0][0][0].constant()


def test_table_potential():
    p = potential_from_table(1, 6, [((1,), (1,), "1"), ((2,), (2,), {"re": "-1/2", "im": "0"})])
    assert p.rho == zzb(6) - zzb(6, 2) * (Scalar(1, 0) / 2)


def test_nabla_examples(geos, v):
    flat = geos["flat"]
    assert nabla(v["zb"] * v["y"], flat, "10").is_zero()
    assert nabla(WeylForm.const(1, 1), geos["fs"]).is_zero()


@pytest.mark.parametrize("name", ["flat", "fs", "hyp", "gen"])
def test_kahler_form_is_parallel(geos, name, v):
    geo = geos[name]
    w = geo.w("omega_lower", 0, 0) * v["y"] * v["yb"]
    assert nabla(w.with_cap(CAP), geo).is_zero()


def _rand(rng, cap):
    out = WeylForm.zero(1, cap)
    for _ in range(3):
        out = out + WeylForm.monomial(1, Scalar(rng.randint(-2, 2), rng.randint(-2, 2)),
                                      y=(rng.randint(0, 2),), yb=(rng.randint(0, 2),),
                                      z=(rng.randint(0, 2),), zb=(rng.randint(0, 2),), cap=cap)
    return out


@pytest.mark.parametrize("name", ["fs", "gen"])
def test_nabla_is_a_derivation(geos, name):
    import random
    rng = random.Random(5)
    geo = geos[name]
    wick = build_connection(geo, None, CAP).wick
    for _ in range(5):
        a, b = _rand(rng, CAP), _rand(rng, CAP)
        assert nabla(a * b, geo) == nabla(a, geo) * b + a * nabla(b, geo)
        assert nabla(wick.star(a, b), geo) == wick.star(nabla(a, geo), b) + wick.star(a, nabla(b, geo))
