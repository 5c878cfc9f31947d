"""
Random contraction germs and eigenvalue vectors for tests and self-checks.

All generators take a :class:`numpy.random.Generator` so results are
reproducible from a seed.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .series import TruncatedMapGerm, jet_basis
from .spectral import matrix_resonances, resonance_bound, small_divisor


def random_unitary(rng, n):
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def random_eigenvalues(rng, n, modulus=(0.3, 0.8), real=False):
    """n eigenvalues with moduli uniform in ``modulus`` and random phases."""
    mods = rng.uniform(*modulus, size=n)
    if real:
        return mods * rng.choice([-1.0, 1.0], size=n)
    return mods * np.exp(2j * np.pi * rng.random(n))


def random_germ(rng, n, cap, *, modulus=(0.3, 0.8), coupling=0.2, terms=2,
                max_coeff=2.0, degrees=(2, 3), rotate=True, real=False, min_coeff=0.0):
    """A random contraction germ.

    The linear part is ``Q T Q*`` with T upper triangular (diagonal drawn by
    :func:`random_eigenvalues`, strictly upper entries of modulus at most
    ``coupling``) and Q Haar-unitary when ``rotate``.  Each component gets
    ``terms`` random monomials of degree in ``degrees`` with coefficient
    modulus at most ``max_coeff``.
    """
    alpha = random_eigenvalues(rng, n, modulus, real)
    T = np.diag(alpha).astype(complex)
    iu = np.triu_indices(n, 1)
    T[iu] = coupling * rng.uniform(0, 1, len(iu[0])) * np.exp(2j * np.pi * rng.random(len(iu[0])))
    A = T
    if rotate:
        Q = random_unitary(rng, n)
        A = Q @ T @ Q.conj().T
    basis = jet_basis(n, cap)
    arr = np.zeros((n, basis.size), dtype=complex)
    arr[:, basis.block(1)] = A
    lo, hi = degrees[0], min(degrees[1], cap)
    if lo <= hi:
        pool = np.arange(int(basis.offsets[lo]), int(basis.offsets[hi + 1]))
        for i in range(n):
            picks = rng.choice(pool, size=min(terms, len(pool)), replace=False)
            mags = max_coeff * rng.uniform(min_coeff, 1.0, len(picks))
            arr[i, picks] += mags * np.exp(2j * np.pi * rng.random(len(picks)))
    return TruncatedMapGerm.from_array(n, cap, arr)


def random_nonresonant_germ(rng, n, cap, min_divisor=1e-3, max_tries=1000, **kwargs):
    """Draw :func:`random_germ` until it is non-resonant with every divisor >= min_divisor."""
    for _ in range(max_tries):
        g = random_germ(rng, n, cap, **kwargs)
        alpha = np.linalg.eigvals(g.linear_part)
        if small_divisor(alpha, 2, max(cap, 2)) < min_divisor:
            continue
        if matrix_resonances(g.linear_part):
            continue
        return g
    raise RuntimeError("could not draw a non-resonant germ")


def germ_suite(seed, count=100, cap=8, dims=(1, 2, 3, 4), min_divisor=1e-3, **kwargs):
    """Reproducible list of non-resonant germs cycling through ``dims``."""
    rng = np.random.default_rng(seed)
    return [random_nonresonant_germ(rng, dims[k % len(dims)], cap, min_divisor, **kwargs) for k in range(count)]


def random_diagonal_contraction(rng, n, plant=0.5, modulus=(0.25, 0.8), max_bound=12):
    """Eigenvalues of a random diagonal contraction, with a planted resonance
    ``a_i = a**k`` (``k_i = 0``, ``|k|`` in 2..3) with probability ``plant``.

    Real, unimodular-phase and repeated eigenvalues are all drawn with
    positive probability.  Draws whose resonance bound exceeds
    ``max_bound`` are rejected.
    """
    while True:
        style = rng.integers(3)
        if style == 0:
            alpha = random_eigenvalues(rng, n, modulus, real=True)
        elif style == 1:
            alpha = random_eigenvalues(rng, n, modulus)
        else:
            # phases from a small cyclic group make exact relations likelier
            mods = rng.uniform(*modulus, size=n)
            alpha = mods * np.exp(2j * np.pi * rng.integers(0, 4, size=n) / 4)
        if n >= 2 and rng.random() < 0.15:
            i, j = rng.choice(n, size=2, replace=False)
            alpha[i] = alpha[j]
        if n >= 2 and rng.random() < plant:
            i = int(rng.integers(n))
            others = [j for j in range(n) if j != i]
            k = np.zeros(n, dtype=int)
            for _ in range(int(rng.integers(2, 4))):
                k[rng.choice(others)] += 1
            alpha[i] = np.prod(alpha ** k)
        if n == 1 and rng.random() < plant:
            alpha = alpha.copy()
        if resonance_bound(alpha) <= max_bound:
            return alpha


__all__ = [
    "germ_suite",
    "random_diagonal_contraction",
    "random_eigenvalues",
    "random_germ",
    "random_nonresonant_germ",
    "random_unitary",
]
