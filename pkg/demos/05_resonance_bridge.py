"""Resonance versus sections of one-forms with values in End(TH).

A weight-one section e_i (x) dz_j (x) dz_l z^m is the same thing as a
relation a_i = a_j a_l a^m.  The two sides are computed by unrelated
code and compared on random diagonal contractions.
"""
import numpy as np

from hopfjet import TensorBundleSpec, invariant_section_dim, matrix_resonances
from hopfjet.sampling import random_diagonal_contraction

rng = np.random.default_rng(0)
spec = TensorBundleSpec.one_forms_in_endomorphisms()
agree = resonant = 0
for k in range(200):
    alpha = random_diagonal_contraction(rng, 1 + k % 4)
    left = bool(matrix_resonances(alpha))
    right = invariant_section_dim(alpha, spec)[0] > 0
    agree += left == right
    resonant += left
print(f"{agree}/200 agree, {resonant} resonant")

alpha = np.array([0.5, 0.25, 0.2])
dim, wit = invariant_section_dim(alpha, spec)
print("alpha = (1/2, 1/4, 1/5):", dim, "sections, e.g.", wit[0])
print("relations:", [str(r) for r in matrix_resonances(alpha)])
