"""Linearize a non-resonant shear and check the conjugacy.

g(z) = (z1/2 + z2^2, z2/3) has eigenvalues 1/2 and 1/3 with no
multiplicative relation, so a formal change of coordinates U tangent to
the identity turns it into its linear part.  Here U is a polynomial:
U = (z1 + 18/7 z2^2, z2).
"""
import numpy as np

from hopfjet import TruncatedMapGerm, linearize, parse_germ, verify_conjugacy
from hopfjet.parse import format_germ

g = parse_germ(["z1/2 + z2^2", "z2/3"], 2, 8)
rep = linearize(g)

print("g      =", format_germ(g))
print("U      =", format_germ(rep.change))
print("U g U^-1 =", format_germ(rep.normalized))

# the residual is measured coefficientwise on U o g - A o U
A = TruncatedMapGerm.linear(np.diag([0.5, 1 / 3]), 8)
print("conjugacy residual:", verify_conjugacy(rep.change, g, A))
print("smallest divisor  :", rep.small_divisor)
