import random

import pytest

from kahlerquant import Scalar, WeylForm
from kahlerquant.fedosov import (
    apply_connection, apply_D_F, apply_D_K, build_connection, classical_flat_section, delta10, delta01,
    delta10_inv, delta_family, delta_inv, delta, fedosov_residual, holomorphic_flat_section,
    kapranov_tensors, phi_sections, quantum_flat_section, star_product,
)

from conftest import CAP


@pytest.fixture(scope="module")
def conns(geos):
    out = {}
    for name in ("flat", "fs", "hyp", "gen"):
        for alpha in ("zero", "minus-hbar-ricci"):
            out[(name, alpha)] = build_connection(geos[name], alpha, CAP)
    return out


def rand_section(rng, cap, ybar=True, terms=4):
    out = WeylForm.zero(1, cap)
    for _ in range(terms):
        out = out + WeylForm.monomial(
            1, Scalar(rng.randint(-3, 3), rng.randint(-3, 3)), h2=2 * rng.randint(0, 1),
            y=(rng.randint(0, 2),), yb=(rng.randint(0, 2) if ybar else 0,),
            z=(rng.randint(0, 2),), zb=(rng.randint(0, 2),), cap=cap)
    return out


# delta family ----------------------------------------------------------------------

def test_delta_examples(v):
    y, dz = v["y"], v["dz"]
    assert delta10(y * y) == (y * dz).scale(2)
    assert delta10_inv(y * dz) == (y * y).scale(Scalar(1, 0) / 2)
    assert delta01(v["z"] ** 3) == 0
    with pytest.raises(ValueError):
        delta_family(y, "delta2")


def test_delta_hodge_decomposition():
    # delta delta^-1 + delta^-1 delta = id away from the (0 forms, constant fiber) stratum
    rng = random.Random(2)
    for _ in range(10):
        a = rand_section(rng, 10)
        a = a + (rand_section(rng, 10) * WeylForm.var(1, "dz")) + (rand_section(rng, 10) * WeylForm.var(1, "dzb"))
        a = a.filter(lambda k: k[2] or any(k[1][:2]))
        assert delta(delta_inv(a)) + delta_inv(delta(a)) == a
    assert delta_inv(WeylForm.var(1, "z")) == 0


# Kapranov tensors and connection data ---------------------------------------------------

def test_kapranov_flat_is_zero(geos):
    assert all(x.is_zero() for K in kapranov_tensors(geos["flat"], CAP) for x in K)


@pytest.mark.parametrize("name", ["fs", "gen"])
def test_kapranov_second_is_half_curvature(geos, name, v):
    geo = geos[name]
    K2 = kapranov_tensors(geo, CAP)[0][0]
    R = geo.w("curvature", 0, 0, 0, 0)
    assert K2 == (R * v["y"] * v["y"] * v["dzb"]).scale(Scalar(1, 0) / 2).truncate(CAP)


def test_kapranov_higher_tensors(geos, conns):
    # FS curvature is parallel, so only K_2 survives; the generic potential has K_3 != 0
    assert len(kapranov_tensors(geos["fs"], CAP)) == 1
    kap = kapranov_tensors(geos["gen"], CAP)
    assert len(kap) >= 2 and not kap[1][0].is_zero()
    # the tensors are exactly what makes J_f flat for D_K
    c = conns[("gen", "zero")]
    for f in (v_z2 := WeylForm.var(1, "z") ** 2, v_z2 * WeylForm.var(1, "z") + 1):
        assert apply_D_K(holomorphic_flat_section(f, c), c).is_zero()


def test_flat_connection_is_quadratic(conns, v):
    c = conns[("flat", "zero")]
    assert c.I_alpha.is_zero()
    # 2i omega (dz ybar - dzbar y) with omega = i/2
    assert c.gamma_alpha == v["dzb"] * v["y"] - v["dz"] * v["yb"]


@pytest.mark.parametrize("name", ["flat", "fs", "hyp", "gen"])
@pytest.mark.parametrize("alpha", ["zero", "minus-hbar-ricci"])
def test_fedosov_residual_vanishes(conns, name, alpha):
    assert fedosov_residual(conns[(name, alpha)]).is_zero()


def test_fedosov_residual_detects_mutation(conns, v):
    c = conns[("fs", "zero")]
    bad = c.gamma_alpha + (v["y"] * v["dzb"]).hbar_shift(2)
    assert not fedosov_residual(c, bad).is_zero()


def test_prequantum_alpha_potential(conns, geos):
    c = conns[("fs", "minus-hbar-ricci")]
    logh = WeylForm.from_jet(geos["fs"].log_h).hbar_shift(2)
    assert c.alpha_potential == -logh.truncate(c.alpha_potential.cap)


# connections ---------------------------------------------------------------------

def test_connection_examples(conns, v):
    fs = conns[("fs", "zero")]
    assert apply_D_K(holomorphic_flat_section(v["z"] ** 2, fs), fs).is_zero()
    assert apply_connection(WeylForm.const(1, 1, CAP), fs, "D_C").is_zero()
    flat = conns[("flat", "zero")]
    assert apply_D_F((v["z"] + v["y"]).with_cap(CAP), flat).is_zero()
    with pytest.raises(ValueError):
        apply_connection(v["y"], fs, "D_X")


@pytest.mark.parametrize("name", ["flat", "fs", "hyp"])
@pytest.mark.parametrize("alpha", ["zero", "minus-hbar-ricci"])
def test_fedosov_flatness(conns, name, alpha):
    c = conns[(name, alpha)]
    rng = random.Random(name + alpha)
    for _ in range(20):
        t = rand_section(rng, CAP)
        assert apply_D_F(apply_D_F(t, c), c).is_zero()


@pytest.mark.parametrize("alpha", ["zero", "minus-hbar-ricci"])
def test_fedosov_extends_kapranov(conns, alpha):
    c = conns[("gen", alpha)]
    rng = random.Random(11)
    for _ in range(20):
        A = rand_section(rng, CAP, ybar=False)
        assert apply_D_F(A, c) == apply_D_K(A, c)


# flat sections and the star product -----------------------------------------------------

def test_flat_model_sections(conns, v):
    c = conns[("flat", "zero")]
    z, zb, y, yb = v["z"], v["zb"], v["y"], v["yb"]
    taylor = z * zb + zb * y + z * yb + y * yb
    assert quantum_flat_section(z * zb, c) == taylor
    assert classical_flat_section(z * zb, c) == taylor
    assert quantum_flat_section(WeylForm.const(1, 1), c) == 1


def test_holomorphic_symbols_get_no_corrections(conns, v):
    c = conns[("fs", "zero")]
    f = v["z"] ** 2 + v["z"].scale(Scalar(0, 3))
    O = quantum_flat_section(f, c)
    assert O == holomorphic_flat_section(f, c)
    assert all(k[0] == 0 and k[1][1] == 0 for k in O.terms)


@pytest.mark.parametrize("name", ["fs", "gen"])
def test_symbol_isomorphism(conns, name):
    c = conns[(name, "zero")]
    rng = random.Random(3)
    for _ in range(5):
        f = rand_section(rng, CAP).symbol()
        O = quantum_flat_section(f, c)
        assert O.symbol() == f
        assert quantum_flat_section(O.symbol(), c) == O


def test_flat_star_examples(conns, v):
    c = conns[("flat", "zero")]
    z, zb, h = v["z"], v["zb"], v["hbar"]
    assert star_product(z, zb, c) == z * zb - h
    assert star_product(zb, z, c) == z * zb
    f = z * z * zb + 3
    assert star_product(f, WeylForm.const(1, 1), c) == f


def test_fs_star_expansion(conns, v):
    c = conns[("fs", "zero")]
    z, zb, h = v["z"], v["zb"], v["hbar"]
    # the hbar term is -g^{-1} = -(1 + z zbar)^2, exactly
    zz = z * zb
    prod = star_product(z, zb, c)
    assert prod.filter(lambda k: k[0] <= 2) == zz - h * (1 + zz) * (1 + zz)
    assert prod.filter(lambda k: k[0] == 4) == (zz.scale(2) + (zz * zz).scale(4)).hbar_shift(4)
    assert star_product(zb, z, c) == zz


@pytest.mark.parametrize("name", ["fs", "gen"])
def test_wick_type(conns, name, v):
    # antiholomorphic on the left or holomorphic on the right: no corrections
    c = conns[(name, "zero")]
    z, zb = v["z"], v["zb"]
    g = (z * zb + z * z * zb).with_cap(CAP)
    assert star_product(zb ** 2, g, c) == zb ** 2 * g
    assert star_product(g, z ** 2 + z, c) == g * (z ** 2 + z)


@pytest.mark.parametrize("name", ["fs", "hyp", "gen"])
def test_first_order_bracket(conns, name, v):
    c = conns[(name, "zero")]
    z, zb = v["z"], v["zb"]
    ginv = c.geo.w("metric_inv", 0, 0)
    for f, g in [(z, zb), (z * zb, z * z * zb), (z + zb * zb, z * zb * zb)]:
        f, g = f.with_cap(CAP), g.with_cap(CAP)
        comm = star_product(f, g, c) - star_product(g, f, c)
        pb = -(ginv * (f.diff_z(0) * g.diff_zb(0) - g.diff_z(0) * f.diff_zb(0)))
        assert comm.filter(lambda k: k[0] == 2) == pb.hbar_shift(2)
        assert comm.filter(lambda k: k[0] == 0).is_zero()


def test_phi_decomposition(conns):
    c = conns[("fs", "minus-hbar-ricci")]
    Pw, Pa, P = phi_sections(c)
    # Phi has no part with y-degree or ybar-degree 0 and starts in weight >= 3
    assert all(sum(k[1][:1]) >= 1 and k[1][1] >= 1 for k in P.terms)
    assert all(k[0] + k[1][0] + k[1][1] >= 3 for k in P.terms)


def test_alpha_given_as_potential(geos, v):
    geo = geos["gen"]
    pot = (v["z"] * v["zb"]).hbar_shift(2) + (v["z"] ** 2 * v["zb"]).hbar_shift(4).scale(Scalar(0, 1)) \
        + (v["z"] * v["zb"] ** 2).hbar_shift(4).scale(Scalar(0, -1))
    c = build_connection(geo, pot.with_cap(CAP + 8), CAP)
    assert fedosov_residual(c).is_zero()
    with pytest.raises(ValueError):
        build_connection(geo, (v["z"] * v["zb"]).with_cap(CAP + 8), CAP)
