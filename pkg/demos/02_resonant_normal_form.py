"""A resonant germ: linearization is refused, the normal form keeps z1^2.

For g(z) = (z1/2, z2/4 + z1^2) the eigenvalues satisfy a2 = a1^2, so the
monomial z1^2 in the second component cannot be removed.
"""
import numpy as np

from hopfjet import ResonantInputError, TruncatedMapGerm, linearize, matrix_resonances, normal_form, parse_germ
from hopfjet.parse import format_germ, format_monomial_term

g = parse_germ(["z1/2", "z2/4 + z1^2 + z2^3"], 2, 6)

for rel in matrix_resonances(g.linear_part):
    print("relation:", rel)

try:
    linearize(g)
except ResonantInputError as exc:
    print("linearize refused:", exc)

rep = normal_form(g)
# drop roundoff-level coefficients before printing
N = rep.normalized
shown = TruncatedMapGerm.from_array(N.n, N.cap, np.where(np.abs(N.coeffs) > 1e-12, N.coeffs, 0))
print("normal form :", format_germ(shown))
print("kept        :", [format_monomial_term(i, m) for i, m in rep.kept_monomials])
print("residual    :", rep.max_residual)
