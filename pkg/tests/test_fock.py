import random

import pytest

from kahlerquant import Scalar, WeylForm
from kahlerquant.fedosov import apply_D_F, build_connection, holomorphic_flat_section, quantum_flat_section, star_product
from kahlerquant.fock import (
    ExtElt, FockElt, apply_D_alpha, apply_DB_alpha, bf_action, boundedness_check, build_beta,
    d_alpha_curvature, line_gauge, module_action, vacuum,
)

from conftest import CAP


@pytest.fixture(scope="module")
def conns(geos):
    return {(name, alpha): build_connection(geos[name], alpha, CAP)
            for name in ("flat", "fs", "gen") for alpha in ("zero", "minus-hbar-ricci")}


def rand_amp(rng, cap, terms=3):
    out = WeylForm.zero(1, cap)
    for _ in range(terms):
        out = out + WeylForm.monomial(1, Scalar(rng.randint(-3, 3), rng.randint(-3, 3)), h2=2 * rng.randint(0, 1),
                                      y=(rng.randint(0, 2),), z=(rng.randint(0, 2),), zb=(rng.randint(0, 2),), cap=cap)
    return out


def rand_weyl(rng, cap, terms=3):
    out = WeylForm.zero(1, cap)
    for _ in range(terms):
        out = out + WeylForm.monomial(1, Scalar(rng.randint(-3, 3), rng.randint(-3, 3)), h2=2 * rng.randint(0, 1),
                                      y=(rng.randint(0, 2),), yb=(rng.randint(0, 2),),
                                      z=(rng.randint(0, 2),), zb=(rng.randint(0, 2),), cap=cap)
    return out


def test_ext_elt_validation(v):
    with pytest.raises(ValueError):
        ExtElt(v["yb"], WeylForm.zero(1))
    with pytest.raises(ValueError):
        ExtElt(v["y"], v["dz"])
    t = ExtElt(v["y"], v["y"] + 5)
    assert t.normalized().exponent == v["y"]
    assert t.same_class(ExtElt(v["y"], v["y"] + v["hbar"]))


def test_bf_action_flat_examples(geos, v):
    flat = geos["flat"]
    y, yb, h = v["y"], v["yb"], v["hbar"]
    zero = WeylForm.zero(1)
    assert bf_action(yb, ExtElt(y, zero), flat).amplitude == h
    b1 = Scalar(2, -1)
    t = ExtElt(WeylForm.const(1, 1), y.scale(b1))
    assert bf_action(yb, t, flat).amplitude == WeylForm.const(1, b1)
    s = ExtElt(y * y + v["z"], y)
    assert bf_action(WeylForm.const(1, 1), s, flat) == s


def test_bf_action_is_a_representation(conns):
    c = conns[("fs", "zero")]
    rng = random.Random(4)
    beta = build_beta(c)
    for _ in range(5):
        a, b = rand_weyl(rng, CAP), rand_weyl(rng, CAP)
        t = ExtElt(rand_amp(rng, CAP), -beta)
        lhs = bf_action(c.wick.star(a, b), t, c.geo).amplitude
        rhs = bf_action(a, bf_action(b, t, c.geo), c.geo).amplitude
        assert lhs == rhs


def test_beta_flat(conns, v):
    assert build_beta(conns[("flat", "zero")]) == v["zb"] * v["y"]


def test_flat_module_curvature(conns, v):
    c = conns[("flat", "zero")]
    t = ExtElt(WeylForm.const(1, 1, CAP), WeylForm.zero(1))
    dd = apply_D_alpha(apply_D_alpha(t, c), c).amplitude
    # (2i/hbar) omega with omega = (i/2) dz^dzbar
    assert dd == (v["dz"] * v["dzb"]).scale(-1).hbar_shift(-2)
    assert d_alpha_curvature(c) == (v["dz"] * v["dzb"]).scale(-1).hbar_shift(-2)


@pytest.mark.parametrize("name", ["flat", "fs", "gen"])
@pytest.mark.parametrize("alpha", ["zero", "minus-hbar-ricci"])
def test_module_curvature_and_flatness(conns, name, alpha):
    c = conns[(name, alpha)]
    rng = random.Random(name + alpha)
    beta = build_beta(c)
    curv = d_alpha_curvature(c)
    for _ in range(4):
        A = rand_amp(rng, CAP)
        t = ExtElt(A, -beta)
        assert apply_D_alpha(apply_D_alpha(t, c), c).amplitude == curv * A
        s = FockElt(t, line_gauge(c))
        assert apply_DB_alpha(apply_DB_alpha(s, c), c).amplitude.is_zero()


@pytest.mark.parametrize("name", ["flat", "fs", "gen"])
def test_vacuum_is_flat_for_prequantum(conns, name):
    c = conns[(name, "minus-hbar-ricci")]
    assert apply_DB_alpha(vacuum(c), c).amplitude.is_zero()


def test_corrupted_gauge_is_detected(conns, v):
    c = conns[("fs", "minus-hbar-ricci")]
    good = vacuum(c)
    bad = FockElt(good.base, good.line_gauge + (v["z"] * v["zb"] * v["z"]).with_cap(CAP))
    assert not apply_DB_alpha(bad, c).amplitude.is_zero()


@pytest.mark.parametrize("name", ["flat", "fs"])
def test_compatibility_with_fedosov(conns, name, v):
    c = conns[(name, "minus-hbar-ricci")]
    rng = random.Random(7)
    for form in (None, v["dz"], v["dzb"]):
        for _ in range(3):
            O = rand_weyl(rng, CAP)
            if form is not None:
                O = O * form
            s = vacuum(c, rand_amp(rng, CAP))
            sign = -1 if form is not None else 1
            lhs = apply_DB_alpha(bf_action(O, s, c.geo), c).amplitude
            rhs = bf_action(apply_D_F(O, c), s, c.geo).amplitude \
                + bf_action(O, apply_DB_alpha(s, c), c.geo).amplitude.scale(sign)
            assert lhs == rhs


def test_module_action_examples(conns, v):
    z, zb, h = v["z"], v["zb"], v["hbar"]
    one = WeylForm.const(1, 1, CAP)
    sp, res = module_action(z * zb, one, conns[("flat", "minus-hbar-ricci")])
    assert sp == h and res.amplitude.is_zero()
    c = conns[("fs", "minus-hbar-ricci")]
    s = (z * z + 2).with_cap(CAP)
    sp, _ = module_action(WeylForm.const(1, 1), s, c)
    assert sp == s
    f = (z + z ** 3).with_cap(CAP)
    sp, _ = module_action(f, s, c)
    assert sp == f * s


def test_fs_module_action_series(conns, v):
    c = conns[("fs", "minus-hbar-ricci")]
    z, zb, h = v["z"], v["zb"], v["hbar"]
    one = WeylForm.const(1, 1, CAP)
    sp, _ = module_action(z * zb, one, c)
    assert sp.at_basepoint() == h
    sp, _ = module_action(z * z * zb * zb, one, c)
    assert sp.at_basepoint() == (h * h).scale(2) + (h ** 3).scale(2) + (h ** 4).scale(2)


def test_representation_on_flat_sections(conns):
    c = conns[("fs", "minus-hbar-ricci")]
    rng = random.Random(9)
    for _ in range(3):
        f = rand_amp(rng, CAP).symbol()
        g = rand_amp(rng, CAP).symbol()
        psi = vacuum(c, holomorphic_flat_section(WeylForm.var(1, "z", cap=CAP) + 1, c))
        Of, Og = quantum_flat_section(f, c), quantum_flat_section(g, c)
        twice = bf_action(Of, bf_action(Og, psi, c.geo), c.geo).amplitude
        once = bf_action(quantum_flat_section(star_product(f, g, c), c), psi, c.geo).amplitude
        assert twice == once


def test_boundedness(conns, v):
    c = conns[("fs", "minus-hbar-ricci")]
    assert boundedness_check(vacuum(c), "1/1000")
    flat_exp = ExtElt(WeylForm.const(1, 1), v["y"])
    assert not boundedness_check(flat_exp, "1/2")
    assert boundedness_check(ExtElt(WeylForm.const(1, 1), WeylForm.zero(1)), "1/2")
    with pytest.raises(ValueError):
        boundedness_check(flat_exp, "-1")
