"""
Eigenvalues of linear parts and multiplicative resonance relations.

The eigen-solver is a plain complex Schur decomposition: Householder
reduction to upper Hessenberg form followed by single-shift QR sweeps
with Wilkinson shifts and Givens rotations.  Resonance search is an
exhaustive scan of exponent vectors up to the modulus bound, which is
finite because every eigenvalue lies strictly inside the unit disc.

All tolerances here are relative: a matrix relation is accepted when
``|a_i - a**k| <= tol * |a_i|`` and a bundle relation when
``|b_p - b_q * a**k| <= tol * |b_p|``.

Indices are 0-based throughout the library.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceError, NotContractionError
from .series import MonomialIndex, exponent_vectors

#: guard band for the contraction test: max |a_i| must stay below 1 - CONTRACTION_GUARD
CONTRACTION_GUARD = 1e-12
#: default relative tolerance for resonance relations
DEFAULT_TOL = 1e-9
#: refuse searches whose exponent box would exceed this many vectors
MAX_SEARCH = 5_000_000

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# complex Schur decomposition
# ---------------------------------------------------------------------------

def _hessenberg(A):
    """Householder reduction ``A = Q H Q*`` with H upper Hessenberg."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H, Q


def _givens(a, b):
    """Unitary 2x2 G with ``G @ [a, b] = [r, 0]``."""
    r = math.hypot(abs(a), abs(b))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(a) / r, np.conj(b) / r], [-b / r, a / r]])


def _wilkinson(H, hi):
    a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
    c, d = H[hi, hi - 1], H[hi, hi]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def schur(A):
    """Complex Schur form ``A = Q T Q*`` by shifted QR.

    Returns
    -------
    T, Q : ndarray
        Upper triangular T and unitary Q.

    Raises
    ------
    NoConvergenceError
        More than ``100 n**2`` QR sweeps were needed.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 0:
        return A.copy(), np.eye(0, dtype=complex)
    if np.allclose(np.tril(A, -1), 0.0, rtol=0.0, atol=0.0):
        return A.copy(), np.eye(n, dtype=complex)
    H, Q = _hessenberg(A)
    scale = np.abs(H).sum(axis=0).max()
    cap = 100 * n * n
    sweeps = 0
    stalled = 0
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if s == 0.0:
                s = scale
            if abs(H[lo, lo - 1]) <= _EPS * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        sweeps += 1
        stalled += 1
        if sweeps > cap:
            raise NoConvergenceError(f"shifted QR did not converge within {cap} sweeps")
        if stalled % 10 == 0:
            # exceptional shift to break cycles
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * np.exp(1j * stalled)
        else:
            mu = _wilkinson(H, hi)
        idx = np.arange(lo, hi + 1)
        H[idx, idx] -= mu
        rots = []
        for k in range(lo, hi):
            G = _givens(H[k, k], H[k + 1, k])
            H[k:k + 2, k:] = G @ H[k:k + 2, k:]
            H[k + 1, k] = 0.0
            rots.append(G)
        for k, G in zip(range(lo, hi), rots):
            Gh = G.conj().T
            top = min(k + 2, hi) + 1
            H[:top, k:k + 2] = H[:top, k:k + 2] @ Gh
            Q[:, k:k + 2] = Q[:, k:k + 2] @ Gh
        H[idx, idx] += mu
    return np.triu(H), Q


# ---------------------------------------------------------------------------
# spectral data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of a matrix together with a triangularizing unitary basis.

    Attributes
    ----------
    eigenvalues : ndarray
        Eigenvalues sorted by decreasing modulus (ties keep Schur order).
    schur_basis : ndarray
        Unitary Q with ``Q* A Q`` upper triangular.
    schur_form : ndarray
        The triangular factor ``T = Q* A Q``; its diagonal carries the
        eigenvalues in Schur order.
    source : ndarray
        The matrix A.
    """

    eigenvalues: np.ndarray
    schur_basis: np.ndarray
    schur_form: np.ndarray
    source: np.ndarray

    @property
    def n(self):
        return len(self.eigenvalues)

    def residual(self):
        """``||A Q - Q T||`` (Frobenius)."""
        return float(np.linalg.norm(self.source @ self.schur_basis - self.schur_basis @ self.schur_form))


def eigen(A):
    """Eigenvalues and Schur basis of a square complex matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)

    Returns
    -------
    SpectralData

    Raises
    ------
    NoConvergenceError
        QR iteration budget exhausted, or the final residual
        ``||AQ - QT||`` exceeds ``1e-9 ||A||``.

    Examples
    --------
    >>> eigen([[0.5, 1.0], [0.0, 0.25]]).eigenvalues
    array([0.5 +0.j, 0.25+0.j])
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    T, Q = schur(A)
    diag = np.diag(T).copy()
    order = np.argsort(-np.abs(diag), kind="stable")
    data = SpectralData(diag[order], Q, T, A)
    norm = np.linalg.norm(A)
    if data.residual() > 1e-9 * max(norm, 1e-300):
        raise NoConvergenceError(f"Schur residual {data.residual():.3g} above 1e-9*||A||")
    return data


def spectral_data(source):
    """Coerce a matrix, SpectralData or germ-like object (``linear_part``) to SpectralData."""
    if isinstance(source, SpectralData):
        return source
    if hasattr(source, "linear_part"):
        return eigen(source.linear_part)
    return eigen(source)


def diagonal_data(alpha):
    """SpectralData of ``diag(alpha)`` without running QR."""
    alpha = np.asarray(alpha, dtype=complex).ravel()
    A = np.diag(alpha)
    order = np.argsort(-np.abs(alpha), kind="stable")
    return SpectralData(alpha[order], np.eye(len(alpha), dtype=complex), A.copy(), A)


def _eigenvalues(x):
    """Eigenvalue vector from a 1-d array, a matrix, a germ or SpectralData."""
    if isinstance(x, SpectralData) or hasattr(x, "linear_part") or np.ndim(x) == 2:
        return spectral_data(x).eigenvalues
    return np.asarray(x, dtype=complex).ravel()


def is_contraction(alpha):
    alpha = np.asarray(alpha)
    return bool(len(alpha) == 0 or np.max(np.abs(alpha)) < 1.0 - CONTRACTION_GUARD)


def assert_contraction(s):
    """True iff every eigenvalue has modulus below ``1 - 1e-12``."""
    return is_contraction(spectral_data(s).eigenvalues)


def require_contraction(alpha):
    """Raise :class:`NotContractionError` unless ``0 < |a_i| < 1 - 1e-12`` for all i."""
    alpha = np.asarray(alpha, dtype=complex)
    if not is_contraction(alpha):
        raise NotContractionError(f"not a contraction: max |eigenvalue| = {np.max(np.abs(alpha)):.17g}")
    if np.any(alpha == 0):
        raise NotContractionError("not a contraction: zero eigenvalue (linear part not invertible)")


# ---------------------------------------------------------------------------
# resonance search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BundleAction:
    """Equivariant action on the fiber over 0, with its eigenvalues."""

    fiber_matrix: np.ndarray
    eigenvalues: np.ndarray = field(default=None)

    def __post_init__(self):
        M = np.atleast_2d(np.array(self.fiber_matrix, dtype=complex))
        object.__setattr__(self, "fiber_matrix", M)
        if self.eigenvalues is None:
            object.__setattr__(self, "eigenvalues", eigen(M).eigenvalues)
        else:
            object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=complex).ravel())

    @classmethod
    def diagonal(cls, beta):
        beta = np.asarray(beta, dtype=complex).ravel()
        return cls(np.diag(beta), beta)

    @classmethod
    def tangent(cls, s):
        s = spectral_data(s)
        return cls(s.source, s.eigenvalues)

    @property
    def rank(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class ResonanceRelation:
    """One multiplicative identity among eigenvalues.

    ``kind == "matrix"``: ``alpha[target] = prod alpha**exponents``.
    ``kind == "bundle"``: ``beta[p] = beta[q] * prod alpha**exponents`` with
    ``target == (p, q)``.
    """

    kind: str
    target: object
    exponents: MonomialIndex
    residual: float

    def key(self):
        return (self.kind, self.target, tuple(self.exponents))

    def __str__(self):
        mono = "*".join(f"a{j + 1}^{e}" if e > 1 else f"a{j + 1}" for j, e in enumerate(self.exponents) if e)
        if self.kind == "matrix":
            return f"a{self.target + 1} = {mono}  (residual {self.residual:.2g})"
        p, q = self.target
        return f"b{p + 1} = b{q + 1}*{mono}  (residual {self.residual:.2g})"


def resonance_bound(alpha, weights=None):
    """Largest |k| for which a relation can hold, by modulus comparison.

    Parameters
    ----------
    alpha : array_like
        Base eigenvalues, all with ``0 < |a| < 1``.
    weights : array_like, optional
        Fiber eigenvalues; if given the bound is for bundle relations
        ``b_p = b_q a**k`` and uses the smallest ratio ``|b_p / b_q| <= 1``.

    Returns
    -------
    int
        ``ceil(log(min relevant modulus) / log(max |a|))``.

    Examples
    --------
    >>> resonance_bound([0.5, 0.25])
    2
    >>> resonance_bound([0.5, 1/3])
    2
    """
    alpha = np.asarray(alpha, dtype=complex).ravel()
    require_contraction(alpha)
    mod = np.abs(alpha)
    if weights is None:
        rel = mod.min()
    else:
        b = np.abs(np.asarray(weights, dtype=complex).ravel())
        if np.any(b == 0):
            raise ValueError("fiber weights must be nonzero")
        rel = min(1.0, (b[:, None] / b[None, :]).min())
    if rel >= 1.0:
        return 0
    ratio = math.log(rel) / math.log(mod.max())
    # absorb rounding of exact ratios such as log(1/4)/log(1/2)
    return max(int(math.ceil(ratio - 1e-9)), 0)


def _canonical_index(values, tol):
    """Map each index to the first index carrying an equal value (relative tol)."""
    out = np.arange(len(values))
    for i in range(len(values)):
        for j in range(i):
            if abs(values[i] - values[j]) <= tol * abs(values[i]):
                out[i] = out[j]
                break
    return out


def _search_box(n, lo, hi):
    count = math.comb(n + hi, n) - math.comb(n + lo - 1, n)
    if count > MAX_SEARCH:
        raise ValueError(f"resonance search box too large ({count} exponent vectors); eigenvalues too close to 1")
    return exponent_vectors(n, lo, hi)


def monomial_values(alpha, K):
    """``prod alpha**k`` for every row k of K."""
    alpha = np.asarray(alpha, dtype=complex)
    if len(K) == 0:
        return np.zeros(0, dtype=complex)
    return np.prod(alpha[None, :] ** K, axis=1)


def matrix_resonances(s, tol=DEFAULT_TOL):
    """All relations ``a_i = a**k`` with ``2 <= |k| <= resonance_bound``.

    Parameters
    ----------
    s : SpectralData, matrix, germ or eigenvalue vector wrapped by :func:`diagonal_data`
    tol : float
        Relative tolerance.

    Returns
    -------
    list of ResonanceRelation
        Empty iff the linear part is non-resonant.  Relations whose target
        duplicates an earlier equal eigenvalue are dropped.
    """
    alpha = _eigenvalues(s)
    require_contraction(alpha)
    n = len(alpha)
    B = resonance_bound(alpha)
    if B < 2:
        return []
    K = _search_box(n, 2, B)
    vals = monomial_values(alpha, K)
    resid = np.abs(alpha[:, None] - vals[None, :])
    hits = resid <= tol * np.abs(alpha)[:, None]
    canon = _canonical_index(alpha, tol)
    out = []
    for i, k in zip(*np.nonzero(hits)):
        if canon[i] != i:
            continue
        out.append(ResonanceRelation("matrix", int(i), MonomialIndex(K[k]), float(resid[i, k])))
    return out


def bundle_resonances(s, b, tol=DEFAULT_TOL):
    """All relations ``b_p = b_q * a**k`` with ``1 <= |k| <= bound`` (p = q allowed).

    Parameters
    ----------
    s : SpectralData or matrix
        Base linear part.
    b : BundleAction or array_like
        Fiber action; a 1-d array is read as the eigenvalues of a diagonal action.
    tol : float
        Relative tolerance.
    """
    alpha = _eigenvalues(s)
    require_contraction(alpha)
    if not isinstance(b, BundleAction):
        arr = np.asarray(b, dtype=complex)
        b = BundleAction.diagonal(arr) if arr.ndim <= 1 else BundleAction(arr)
    beta = b.eigenvalues
    B = resonance_bound(alpha, beta)
    if B < 1:
        return []
    K = _search_box(len(alpha), 1, B)
    vals = monomial_values(alpha, K)
    canon = _canonical_index(beta, tol)
    out = []
    for p in range(len(beta)):
        if canon[p] != p:
            continue
        for q in range(len(beta)):
            if canon[q] != q:
                continue
            resid = np.abs(beta[p] - beta[q] * vals)
            for k in np.nonzero(resid <= tol * abs(beta[p]))[0]:
                out.append(ResonanceRelation("bundle", (p, q), MonomialIndex(K[k]), float(resid[k])))
    return out


def small_divisor(alpha, lo=2, hi=None):
    """``min |a_i - a**m|`` over ``lo <= |m| <= hi`` (default hi = resonance bound, at least lo).

    Returns ``inf`` if the range is empty.  This is the smallest pivot the
    homological equation meets in diagonal coordinates.
    """
    rel = nearest_resonance(alpha, lo, hi)
    return math.inf if rel is None else rel.residual


def nearest_resonance(alpha, lo=2, hi=None):
    """The matrix relation candidate with the smallest absolute residual, or None."""
    alpha = _eigenvalues(alpha)
    require_contraction(alpha)
    if hi is None:
        hi = max(resonance_bound(alpha), lo)
    if hi < lo:
        return None
    K = _search_box(len(alpha), lo, hi)
    resid = np.abs(alpha[:, None] - monomial_values(alpha, K)[None, :])
    i, k = np.unravel_index(np.argmin(resid), resid.shape)
    return ResonanceRelation("matrix", int(i), MonomialIndex(K[k]), float(resid[i, k]))


__all__ = [
    "BundleAction",
    "ResonanceRelation",
    "SpectralData",
    "assert_contraction",
    "bundle_resonances",
    "diagonal_data",
    "eigen",
    "matrix_resonances",
    "monomial_values",
    "nearest_resonance",
    "require_contraction",
    "resonance_bound",
    "schur",
    "small_divisor",
    "spectral_data",
]
