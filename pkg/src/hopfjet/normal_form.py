"""
Poincaré linearization and Poincaré–Dulac normal forms of contraction germs.

Conventions
-----------
A coordinate change ``U`` conjugates ``g`` to ``U o g o U^-1``.  At each
degree d the correction ``h`` solves the homological equation

    L(h) = A h - h o A = r

on homogeneous vector fields of degree d, where ``A`` is the linear part
and ``r`` the degree-d part of the current conjugate.  For diagonal A the
field ``e_i z**m`` is an eigenvector of L with eigenvalue
``a_i - a**m``; the field is resonant when that eigenvalue vanishes
(relative tolerance).

Non-diagonal A is handled in a unitary Schur basis ``A = Q T Q*``, where
L becomes block triangular and each block is triangular in graded-lex
order, so the solve is a sequence of triangular substitutions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatchError, IllConditionedWarning, ResonantInputError
from .series import (
    MonomialIndex,
    TruncatedMapGerm,
    TruncatedSeries,
    compose_germs,
    invert_germ,
    jet_basis,
    linear_power_blocks,
)
from .spectral import DEFAULT_TOL, eigen, matrix_resonances, require_contraction

#: small divisors below this trigger an IllConditionedWarning
ILL_CONDITIONED = 1e-10


@dataclass(frozen=True)
class HomogeneousVectorField:
    """A vector field whose n components are homogeneous of degree ``d``.

    ``coeffs`` has shape (n, N_d): row i holds component i on the degree-d
    monomials in graded-lex order.
    """

    n: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        size = len(_monomials(self.n, self.degree))
        if c.shape != (self.n, size):
            raise DimensionMismatchError(f"degree-{self.degree} field needs shape {(self.n, size)}, got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n, d):
        return cls(n, d, np.zeros((n, len(_monomials(n, d)))))

    @classmethod
    def monomial(cls, i, m, value=1.0):
        """The field ``value * e_i * z**m`` (0-based i)."""
        m = MonomialIndex(m)
        f = np.zeros((len(m), len(_monomials(len(m), m.total_degree))), dtype=complex)
        f[i, _monomials(len(m), m.total_degree).index(tuple(m))] = value
        return cls(len(m), m.total_degree, f)

    @classmethod
    def from_germ(cls, g, d):
        """Degree-d part of a germ."""
        return cls(g.n, d, g.coeffs[:, g.basis.block(d)])

    def components(self, cap=None):
        """The components as :class:`TruncatedSeries` of the given cap (default: degree)."""
        cap = self.degree if cap is None else cap
        basis = jet_basis(self.n, cap)
        out = []
        for row in self.coeffs:
            arr = np.zeros(basis.size, dtype=complex)
            arr[basis.block(self.degree)] = row
            out.append(TruncatedSeries(self.n, cap, arr))
        return out

    def terms(self):
        """Mapping ``(i, m) -> coefficient`` of the nonzero monomials."""
        mons = _monomials(self.n, self.degree)
        return {(int(i), MonomialIndex(mons[k])): complex(self.coeffs[i, k]) for i, k in zip(*np.nonzero(self.coeffs))}

    def max_abs(self):
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0


def _monomials(n, d):
    return [tuple(int(e) for e in row) for row in jet_basis(n, d).exponents[jet_basis(n, d).block(d)]]


@dataclass
class NormalFormReport:
    """Result of :func:`linearize`, :func:`normal_form` or the connection pipeline.

    Attributes
    ----------
    change : TruncatedMapGerm
        The coordinate change U.
    normalized : TruncatedMapGerm
        The conjugate ``U o g o U^-1`` (linear for a linearization).
    kept_monomials : list of (int, MonomialIndex)
        Resonant monomials ``e_i z**m`` retained in ``normalized`` (0-based i).
    max_residual : float
        Largest coefficient of the part of the conjugate that should vanish.
    small_divisor : float
        Smallest ``|a_i - a**m|`` met by a solved monomial (inf if none).
    ill_conditioned : bool
        True when ``small_divisor`` fell below 1e-10.
    diagnostics : dict
        Additional named residuals and metadata.
    """

    change: TruncatedMapGerm
    normalized: TruncatedMapGerm
    kept_monomials: list
    max_residual: float
    small_divisor: float
    ill_conditioned: bool = False
    diagnostics: dict = field(default_factory=dict)


class HomologicalOperator:
    """``h -> A h - h o A`` on homogeneous fields of degree <= cap, factored once.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Invertible linear part.
    cap : int
        Highest degree that will be solved.
    spectral : SpectralData, optional
        Precomputed Schur data for A.
    """

    def __init__(self, A, cap, spectral=None):
        A = np.asarray(A, dtype=complex)
        s = spectral if spectral is not None else eigen(A)
        self.n = A.shape[0]
        self.cap = cap
        self.A = A
        self.T = s.schur_form
        self.Q = s.schur_basis
        self.in_schur_basis = bool(np.array_equal(self.Q, np.eye(self.n)))
        self._PT = linear_power_blocks(self.T, cap)
        if not self.in_schur_basis:
            self._PQ = linear_power_blocks(self.Q, cap)
            self._PQh = linear_power_blocks(self.Q.conj().T, cap)

    def apply(self, d, h):
        """``A h - h o A`` for an (n, N_d) coefficient array."""
        h = np.asarray(h, dtype=complex)
        if self.in_schur_basis:
            return self.T @ h - h @ self._PT[d]
        ht = self.Q.conj().T @ (h @ self._PQ[d])
        return self.Q @ ((self.T @ ht - ht @ self._PT[d]) @ self._PQh[d])

    def solve(self, d, r, tol=DEFAULT_TOL):
        """Solve ``A h - h o A = r`` in degree d.

        Returns
        -------
        h : ndarray (n, N_d)
        unsolved : ndarray (n, N_d)
            Components of r along resonant directions, left in place
            (zero when nothing is resonant).
        resonant : list of (int, int)
            (component, monomial position) pairs of resonant pivots, in
            Schur coordinates.
        divisor : float
            Smallest non-resonant pivot modulus.
        """
        r = np.asarray(r, dtype=complex)
        P = self._PT[d]
        diagT = np.diag(self.T)
        rt = r if self.in_schur_basis else self.Q.conj().T @ (r @ self._PQ[d])
        N = P.shape[0]
        c = np.zeros((self.n, N), dtype=complex)
        left = np.zeros((self.n, N), dtype=complex)
        resonant = []
        divisor = math.inf
        tmono = np.diag(P)
        for i in range(self.n - 1, -1, -1):
            rhs = rt[i] - self.T[i, i + 1:] @ c[i + 1:]
            pivots = diagT[i] - tmono
            bad = np.abs(pivots) <= tol * abs(diagT[i])
            good = np.abs(pivots[~bad])
            if good.size:
                divisor = min(divisor, float(good.min()))
            X = diagT[i] * np.eye(N) - P
            if not bad.any():
                # c X = rhs with X upper triangular
                c[i] = solve_triangular(X.T, rhs, lower=True)
                continue
            for j in range(N):
                val = rhs[j] - c[i, :j] @ X[:j, j]
                if bad[j]:
                    left[i, j] = val
                    resonant.append((i, j))
                else:
                    c[i, j] = val / X[j, j]
        if self.in_schur_basis:
            return c, left, resonant, divisor
        back = lambda x: self.Q @ (x @ self._PQh[d])
        return back(c), back(left), resonant, divisor


def homological_solve(A, d, r, tol=DEFAULT_TOL, full_output=False):
    """Solve ``A h - h o A = r`` for a degree-d vector field h.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Invertible linear part.
    d : int
        Degree, at least 2.
    r : HomogeneousVectorField or array_like (n, N_d)
    tol : float
        Relative tolerance under which a pivot ``a_i - a**m`` counts as zero.
    full_output : bool
        Also return a dict with ``unsolved`` (the part of r along resonant
        directions), ``resonant`` ((i, m) pairs in Schur coordinates) and
        ``small_divisor``.

    Returns
    -------
    HomogeneousVectorField or (HomogeneousVectorField, dict)

    Notes
    -----
    Resonant components of the Schur-basis solution are set to zero.
    For diagonal A this is the minimum-norm solution of the regular part.

    Examples
    --------
    >>> r = HomogeneousVectorField.monomial(0, (0, 2))
    >>> h = homological_solve(np.diag([0.5, 1 / 3]), 2, r)
    >>> round(h.terms()[(0, (0, 2))].real, 12) == round(18 / 7, 12)
    True
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if d < 2:
        raise ValueError("homological equation is posed in degree >= 2")
    if isinstance(r, HomogeneousVectorField):
        if r.n != n or r.degree != d:
            raise DimensionMismatchError("right-hand side has the wrong dimension or degree")
        r = r.coeffs
    op = HomologicalOperator(A, d)
    h, left, resonant, divisor = op.solve(d, r, tol)
    out = HomogeneousVectorField(n, d, h)
    if not full_output:
        return out
    mons = _monomials(n, d)
    info = {
        "unsolved": HomogeneousVectorField(n, d, left),
        "resonant": [(i, MonomialIndex(mons[j])) for i, j in resonant],
        "small_divisor": divisor,
    }
    return out, info


def _prepare(g, D):
    if D is not None and D != g.cap:
        g = g.with_cap(D)
    if g.cap < 1:
        raise ValueError("truncation degree must be at least 1")
    s = eigen(g.linear_part)
    require_contraction(s.eigenvalues)
    return g, s


def _coefficient_scale(g):
    return max(float(np.abs(g.coeffs).max()), 1e-300)


def _flag_ill_conditioned(divisor):
    if divisor < ILL_CONDITIONED:
        warnings.warn(f"small divisor {divisor:.3g} below {ILL_CONDITIONED:g}", IllConditionedWarning, stacklevel=3)
        return True
    return False


def linearize(g, D=None, tol=DEFAULT_TOL):
    """Tangent-to-identity U with ``U o g o U^-1`` linear (Poincaré's theorem in jets).

    Parameters
    ----------
    g : TruncatedMapGerm
        Contraction germ with non-resonant linear part.
    D : int, optional
        Truncation degree (defaults to ``g.cap``).
    tol : float
        Relative resonance tolerance.

    Returns
    -------
    NormalFormReport
        ``normalized`` is the linear germ A; ``max_residual`` is the
        conjugacy residual against it.

    Raises
    ------
    NotContractionError
    ResonantInputError
        The linear part is resonant; ``relations`` lists the relations.

    Notes
    -----
    Degree by degree, the obstruction is read from the defect
    ``U o g - A o U`` of the current change (exactly the degree-d part of
    ``U o g o U^-1``), so no inversion is needed inside the sweep.  The
    result is checked by a full conjugation at the end.
    """
    g, s = _prepare(g, D)
    relations = matrix_resonances(s, tol)
    if relations:
        raise ResonantInputError(
            "resonant linear part: " + "; ".join(str(r) for r in relations), relations
        )
    n, cap = g.n, g.cap
    basis = g.basis
    A = g.linear_part
    op = HomologicalOperator(A, cap, spectral=s)
    U = np.zeros((n, basis.size), dtype=complex)
    U[:, basis.block(1)] = np.eye(n)
    Pg = g.power_table()
    divisor = math.inf
    for d in range(2, cap + 1):
        blk = basis.block(d)
        r = U @ Pg[:, blk]
        h, _, _, dv = op.solve(d, r, tol)
        divisor = min(divisor, dv)
        U[:, blk] = h
    change = TruncatedMapGerm.from_array(n, cap, U)
    target = TruncatedMapGerm.linear(A, cap)
    residual = verify_conjugacy(change, g, target)
    return NormalFormReport(
        change=change,
        normalized=target,
        kept_monomials=[],
        max_residual=residual,
        small_divisor=divisor,
        ill_conditioned=_flag_ill_conditioned(divisor),
        diagnostics={"scale": _coefficient_scale(g), "schur_basis_used": not op.in_schur_basis},
    )


def normal_form(g, D=None, tol=DEFAULT_TOL):
    """Poincaré–Dulac normal form: remove every non-resonant monomial.

    If the linear part is not upper triangular, the germ is first
    conjugated into its Schur basis ``w = Q* z``; the normal form and
    ``kept_monomials`` refer to those coordinates and ``change`` includes
    the rotation.  Each degree applies ``Phi = Id + h`` by full
    re-conjugation ``G <- Phi o G o Phi^-1``.

    Returns
    -------
    NormalFormReport
        ``max_residual`` is the largest non-resonant coefficient of
        degree >= 2 remaining in ``normalized``.
    """
    g, s = _prepare(g, D)
    n, cap = g.n, g.cap
    basis = g.basis
    scale = _coefficient_scale(g)
    identity = TruncatedMapGerm.identity(n, cap)
    Q = s.schur_basis
    if np.array_equal(Q, np.eye(n)):
        G, U = g, identity
    else:
        rot = TruncatedMapGerm.linear(Q.conj().T, cap)
        G = compose_germs(rot, g, TruncatedMapGerm.linear(Q, cap))
        U = rot
    T = s.schur_form
    op = HomologicalOperator(T, cap, spectral=_triangular_data(T))
    divisor = math.inf
    resonant_masks = {}
    for d in range(2, cap + 1):
        blk = basis.block(d)
        h, _, resonant, dv = op.solve(d, G.coeffs[:, blk], tol)
        divisor = min(divisor, dv)
        mask = np.zeros((n, blk.stop - blk.start), dtype=bool)
        for i, j in resonant:
            mask[i, j] = True
        resonant_masks[d] = mask
        if not np.any(h):
            continue
        arr = np.array(identity.coeffs)
        arr[:, blk] += h
        phi = TruncatedMapGerm.from_array(n, cap, arr)
        G = compose_germs(phi, G, invert_germ(phi))
        U = compose_germs(phi, U)
    kept = []
    off = 0.0
    mons_all = basis.exponents
    for d in range(2, cap + 1):
        blk = basis.block(d)
        block = G.coeffs[:, blk]
        mask = resonant_masks[d]
        if np.any(~mask):
            off = max(off, float(np.abs(block[~mask]).max()))
        for i, j in zip(*np.nonzero(mask)):
            if abs(block[i, j]) > tol * max(scale, 1.0):
                kept.append((int(i), MonomialIndex(mons_all[blk.start + j])))
    return NormalFormReport(
        change=U,
        normalized=G,
        kept_monomials=kept,
        max_residual=off,
        small_divisor=divisor,
        ill_conditioned=_flag_ill_conditioned(divisor),
        diagnostics={"scale": scale, "schur_basis": Q},
    )


def _triangular_data(T):
    from .spectral import SpectralData

    n = T.shape[0]
    return SpectralData(np.diag(T).copy(), np.eye(n, dtype=complex), T, T)


def verify_conjugacy(U, g, target):
    """Largest coefficient of ``U o g o U^-1 - target`` over degrees <= cap.

    Raises
    ------
    DimensionMismatchError
        The three germs live in different jet rings.
    """
    for other in (g, target):
        if other.n != U.n or other.cap != U.cap:
            raise DimensionMismatchError("germs live in different jet rings")
    conj = compose_germs(U, g, invert_germ(U))
    return float(np.abs(conj.coeffs - target.coeffs).max())


__all__ = [
    "HomogeneousVectorField",
    "HomologicalOperator",
    "NormalFormReport",
    "homological_solve",
    "linearize",
    "normal_form",
    "verify_conjugacy",
]
