"""Cohomology dimensions of tensor bundles on a diagonal Hopf manifold.

With alpha = (1/2, 1/3, 1/5) the structure sheaf has h0 = h1 = 1, the
canonical bundle has no sections, and tensor powers of one-forms have
none either.  Vector fields e_i z_i are invariant, giving h0(TH) = 3.
"""
from hopfjet import TensorBundleSpec, line_bundle_cohomology, mall_dims

alpha = (0.5, 1 / 3, 0.2)
bundles = [
    TensorBundleSpec.structure_sheaf(),
    TensorBundleSpec.tangent(),
    TensorBundleSpec.canonical(),
    TensorBundleSpec.cotangent(1),
    TensorBundleSpec.cotangent(2),
    TensorBundleSpec.cotangent(3),
]
for spec in bundles:
    rep = mall_dims(alpha, spec)
    print(f"{spec.label():12s} dims = {rep.dims}")

rep = mall_dims(alpha, TensorBundleSpec.tangent())
print("invariant vector fields:", [(u, tuple(m)) for u, _, m in rep.witnesses])

for lam in (1.0, 0.5, 1 / 6, 0.3, 2.0):
    print(f"L({lam:.4g}) h0 =", line_bundle_cohomology(alpha, lam).dims[0])
