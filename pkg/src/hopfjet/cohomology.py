"""
Cohomology dimensions of equivariant bundles on diagonal linear Hopf manifolds.

For the Hopf manifold of ``z -> diag(alpha) z`` every tensor bundle
``TH^p (x) (T*H)^q (x) K^k (x) L_lam`` is equivariantly trivial, and its
global sections are the invariant sections on C^n.  A basis tensor

    e_I (x) dz_J * z**m          (I in range(n)**p, J in range(n)**q)

is an eigenvector of the pullback with weight

    w = alpha**m * prod(alpha[J]) / prod(alpha[I]) * prod(alpha)**k / lam

(vector slots pick up ``alpha_i^-1``, covector slots ``alpha_j``, the
canonical bundle ``prod(alpha)`` and a flat line bundle ``1/lam``).  The
section is invariant iff ``w == 1``; the test is ``|w - 1| <= tol``.
Constants of the structure sheaf have weight exactly 1.

Since ``|alpha**m| <= max|alpha|**|m|``, a combination whose slot weight
``w0`` has modulus below 1 contributes nothing, and otherwise only
``|m| <= log|w0| / -log max|alpha|`` can contribute.

Dimensions in every degree follow from the vanishing theorem for bundles
trivial on the universal cover (h^0 = h^1, middle degrees vanish) and
Serre duality (h^n(B) = h^0(B* (x) K), h^(n-1)(B) = h^1(B* (x) K)).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooSmallError, NotDiagonalError
from .series import MonomialIndex, exponent_vectors
from .spectral import DEFAULT_TOL, diagonal_data, matrix_resonances, monomial_values, require_contraction

#: refuse counts whose exponent box would exceed this many vectors
MAX_SEARCH = 5_000_000


@dataclass(frozen=True)
class TensorBundleSpec:
    """``TH^p (x) (T*H)^q (x) K^k_can (x) L_line_character``."""

    p: int = 0
    q: int = 0
    k_can: int = 0
    line_character: complex = 1.0

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("tensor ranks must be non-negative")
        if self.line_character == 0:
            raise ValueError("line character must be nonzero")
        object.__setattr__(self, "line_character", complex(self.line_character))

    # presets --------------------------------------------------------------------

    @classmethod
    def structure_sheaf(cls):
        return cls()

    @classmethod
    def tangent(cls):
        return cls(p=1)

    @classmethod
    def cotangent(cls, power=1):
        return cls(q=power)

    @classmethod
    def canonical(cls, power=1):
        return cls(k_can=power)

    @classmethod
    def one_forms_in_endomorphisms(cls):
        """``Omega^1 (x) End(TH) = TH (x) T*H (x) T*H``."""
        return cls(p=1, q=2)

    @classmethod
    def line(cls, lam):
        return cls(line_character=lam)

    # operations -----------------------------------------------------------------

    def dual(self):
        return TensorBundleSpec(self.q, self.p, -self.k_can, 1.0 / self.line_character)

    def twisted(self, k):
        """Tensor with ``K^k``."""
        return TensorBundleSpec(self.p, self.q, self.k_can + k, self.line_character)

    def serre_dual_twist(self):
        """``B* (x) K`` in one step."""
        return TensorBundleSpec(self.q, self.p, 1 - self.k_can, 1.0 / self.line_character)

    def label(self):
        parts = []
        if self.p:
            parts.append("TH" if self.p == 1 else f"TH^{self.p}")
        if self.q:
            parts.append("Omega1" if self.q == 1 else f"Omega1^{self.q}")
        if self.k_can:
            parts.append("K" if self.k_can == 1 else f"K^{self.k_can}")
        if self.line_character != 1:
            parts.append(f"L({self.line_character:g})")
        return " x ".join(parts) if parts else "O"


@dataclass
class CohomologyReport:
    """Dimensions ``h^0 .. h^n`` with the invariant sections realizing h^0.

    ``witnesses`` lists ``(upper slots, lower slots, m)`` for each invariant
    basis tensor (0-based slots).
    """

    n: int
    dims: tuple
    witnesses: list
    tol: float
    spec: TensorBundleSpec
    notes: dict = field(default_factory=dict)


def _diagonal_alpha(alpha):
    a = np.asarray(alpha, dtype=complex)
    if a.ndim == 2:
        off = a - np.diag(np.diag(a))
        if np.any(np.abs(off) > 0):
            raise NotDiagonalError("section counting needs a diagonal linear part")
        a = np.diag(a)
    a = a.ravel()
    require_contraction(a)
    return a


def _slot_weights(alpha, spec):
    """Slot combinations and their weights ``w0`` (everything but ``alpha**m``)."""
    n = len(alpha)
    inv = 1.0 / alpha
    base = np.prod(alpha) ** spec.k_can / spec.line_character
    combos = list(itertools.product(range(n), repeat=spec.p + spec.q))
    w0 = np.full(len(combos), base, dtype=complex)
    for k, c in enumerate(combos):
        for i in c[: spec.p]:
            w0[k] *= inv[i]
        for j in c[spec.p:]:
            w0[k] *= alpha[j]
    return combos, w0


def _max_degree(w0, amax, tol):
    """Largest |m| with ``max|alpha|**|m| >= (1 - tol) / |w0|``, or -1."""
    mod = abs(w0)
    if mod < 1.0 - tol:
        return -1
    return int(math.floor(math.log(mod / (1.0 - tol)) / -math.log(amax) + 1e-9))


def invariant_section_dim(alpha, spec, tol=DEFAULT_TOL):
    """Number of invariant basis sections of the bundle ``spec``.

    Parameters
    ----------
    alpha : array_like
        Eigenvalues of the diagonal linear contraction (or the diagonal
        matrix itself).
    spec : TensorBundleSpec
    tol : float
        Invariance test ``|w - 1| <= tol``.

    Returns
    -------
    dim : int
    witnesses : list of (tuple, tuple, MonomialIndex)

    Raises
    ------
    NotContractionError, NotDiagonalError

    Examples
    --------
    >>> invariant_section_dim([0.5, 1/3, 0.2], TensorBundleSpec.tangent())[0]
    3
    """
    alpha = _diagonal_alpha(alpha)
    n = len(alpha)
    amax = float(np.abs(alpha).max())
    combos, w0 = _slot_weights(alpha, spec)
    bounds = [_max_degree(w, amax, tol) for w in w0]
    top = max(bounds, default=-1)
    if top < 0:
        return 0, []
    if math.comb(n + top, n) > MAX_SEARCH:
        raise ValueError(f"section search box too large (|m| <= {top})")
    K = exponent_vectors(n, 0, top)
    vals = monomial_values(alpha, K)
    degs = K.sum(axis=1)
    witnesses = []
    for c, w, B in zip(combos, w0, bounds):
        if B < 0:
            continue
        sel = degs <= B
        hits = np.nonzero(np.abs(w * vals[sel] - 1.0) <= tol)[0]
        for h in hits:
            witnesses.append((tuple(c[: spec.p]), tuple(c[spec.p:]), MonomialIndex(K[sel][h])))
    return len(witnesses), witnesses


def mall_dims(alpha, spec, tol=DEFAULT_TOL):
    """All cohomology dimensions of ``spec`` on the Hopf manifold of ``diag(alpha)``.

    ``h^0 = h^1`` is the invariant-section count, ``h^i = 0`` for
    ``1 < i < n-1`` and ``h^(n-1) = h^n`` is the count for ``B* (x) K``.

    Raises
    ------
    DimensionTooSmallError
        n < 3, where the vanishing theorem does not apply.

    Examples
    --------
    >>> mall_dims([0.5, 1/3, 0.2], TensorBundleSpec()).dims
    (1, 1, 0, 0)
    """
    alpha = _diagonal_alpha(alpha)
    n = len(alpha)
    if n < 3:
        raise DimensionTooSmallError(f"cohomology dimensions need n >= 3, got n = {n}")
    h0, wit = invariant_section_dim(alpha, spec, tol)
    dual = spec.serre_dual_twist()
    hn, _ = invariant_section_dim(alpha, dual, tol)
    dims = [0] * (n + 1)
    dims[0] = dims[1] = h0
    dims[n] = dims[n - 1] = hn
    return CohomologyReport(
        n=n,
        dims=tuple(dims),
        witnesses=wit,
        tol=tol,
        spec=spec,
        notes={
            "bundle": spec.label(),
            "serre_dual": dual.label(),
            "top_degrees": "h^(n-1) = h^n counted on B* x K (Serre duality plus h^0 = h^1)",
        },
    )


def line_bundle_cohomology(alpha, lam, tol=DEFAULT_TOL):
    """Cohomology of the flat line bundle whose sections satisfy ``f o g = lam f``.

    ``h^0`` counts monomials with ``alpha**m == lam``; other degrees as in
    :func:`mall_dims`.
    """
    return mall_dims(alpha, TensorBundleSpec.line(lam), tol)


def resonance_cohomology_bridge(alpha, tol=DEFAULT_TOL):
    """True iff resonance of ``diag(alpha)`` matches ``h^0(Omega^1 (x) End TH) > 0``.

    Both sides are computed independently: the left by
    :func:`~hopfjet.spectral.matrix_resonances`, the right by
    :func:`invariant_section_dim`.  A weight-1 section
    ``e_i (x) dz_j (x) dz_l * z**m`` is the relation
    ``alpha_i = alpha_j alpha_l alpha**m``, so the two must agree.
    """
    alpha = _diagonal_alpha(alpha)
    resonant = bool(matrix_resonances(diagonal_data(alpha), tol))
    dim, _ = invariant_section_dim(alpha, TensorBundleSpec.one_forms_in_endomorphisms(), tol)
    return resonant == (dim > 0)


__all__ = [
    "CohomologyReport",
    "TensorBundleSpec",
    "invariant_section_dim",
    "line_bundle_cohomology",
    "mall_dims",
    "resonance_cohomology_bridge",
]
