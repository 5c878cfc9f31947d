"""Linearize through the invariant flat connection on the tangent bundle.

The unique connection fixed by the germ is flat and torsion free; its
parallel coframe is closed and integrates to linearizing coordinates.
The result agrees with the homological solver up to a linear map.
"""
import numpy as np

from hopfjet import (
    EquivariantBundle,
    compose_germs,
    curvature,
    invert_germ,
    linearize,
    linearize_via_connection,
    parse_germ,
    solve_equivariant_connection,
    torsion,
)

g = parse_germ(["z1/2 + z2^2 + z1*z2", "z2/3 + z1^3"], 2, 6)

theta = solve_equivariant_connection(EquivariantBundle.tangent(g))
print("connection valid to degree", theta.valid_degree)
print("curvature:", curvature(theta).max_abs(), " torsion:", torsion(theta).max_abs())

rc = linearize_via_connection(g)
rn = linearize(g)
W = compose_germs(rc.change, invert_germ(rn.change))
print("U (connection), linear part:\n", rc.change.linear_part.real)
print("nonlinear part of U_conn o U_nf^-1:", np.abs(W.nonlinear_part()).max())

# a resonant germ has no invariant connection: the solve hits weight one
try:
    solve_equivariant_connection(EquivariantBundle.tangent(parse_germ(["z1/2", "z2/4 + z1^2"], 2, 5)))
except Exception as exc:
    print(type(exc).__name__ + ":", exc)
