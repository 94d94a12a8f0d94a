"""The sign and normalization conventions the engine is built on.

The text is hashed into every report so that results computed under
different conventions can never be compared by accident.
"""
import hashlib

CONVENTIONS = """\
metric: g_{i jbar} = d_i d_jbar rho; omega_{i jbar} = (i/2) g_{i jbar}; d dbar rho = -2i omega
inverse: omega^{i jbar} = 2i g^{i jbar}; omega^{i jbar} omega_{k jbar} = -delta
wick: a*b = sum_k (i hbar/2)^k/k! omega^{..} d_y^k a d_ybar^k b; flat y*ybar = y ybar - hbar
christoffel: Gamma^m_{ik} = g^{m lbar} d_i g_{k lbar}
curvature: R^m_{i jbar k} = +d_jbar Gamma^m_{ik}; Ric_{i jbar} = R^k_{i jbar k} = d_i d_jbar log det g
forms: dz block before dzbar block; new generators wedge on the left; Koszul parity = form degree
delta: delta = dz^i d/dy^i + dzbar^j d/dybar^j; delta^-1 = delta*/(p+q), zero on p+q = 0
gamma0: 2i omega_{i jbar}(dz^i ybar^j - dzbar^j y^i); (1/hbar)[gamma0, a] = -delta a
curvature form: R_nabla = -2i R^m_{i jbar k} omega_{m lbar} dz^i dzbar^j y^k ybar^l
fedosov: nabla gamma + (1/hbar) gamma*gamma + R_nabla = omega_hbar = 2i omega - alpha
kapranov: R*_2 = (1/2) R^m_{i jbar k} dzbar^j y^i y^k d/dy^m; R*_n = (delta10)^-1 nabla10 R*_{n-1}
bargmann-fock: ybar^j acts as hbar g^{i jbar} d/dy^i; y^I ybar^J . s = ybar^J . (y^I s)
line bundle: nabla_L e = (1/hbar) d(f) e with f = -rho - phi_alpha - hbar log h
vacuum: flat module sections are A exp(-beta/hbar) (x) e, beta = sum_k (tilde nabla10)^k rho
gaussian: y^I ybar^J -> delta_IJ I! hbar^|I|, <1,1> = 1
truncation: degree = 2 hbar-power + |y| + |ybar| + |z| + |zbar| + form degree
"""


def conventions_hash() -> str:
    return hashlib.sha256(CONVENTIONS.encode()).hexdigest()
