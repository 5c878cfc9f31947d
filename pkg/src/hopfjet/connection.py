"""
Equivariant flat connections and developing-map linearization.

Model
-----
An equivariant bundle of rank r over the germ ``g`` is the trivial bundle
with cocycle ``phi(z)`` (an r x r series matrix): a section ``s`` descends
to the quotient when ``s(g(z)) = phi(z) s(z)``.  A connection
``d + theta`` with ``theta = sum_l theta_l dz_l`` is invariant when it is
fixed by

    g#theta = phi^-1 d(phi) + phi^-1 (g*theta) phi,

where ``(g*theta)_j = sum_l (theta_l o g) dg_l/dz_j``.  For the tangent
bundle ``phi`` is the Jacobian of ``g``.

The fixed point is found degree by degree: writing ``theta_d`` for the
homogeneous part of degree d, the equation reads
``(I - P_d) theta_d = c_d`` where ``P_d`` only sees the linear part ``A``
of g and ``Phi0 = phi(0)``:

    P_d(X)_j = Phi0^-1 (sum_l A[l, j] X_l o A) Phi0.

On the tensor ``X[l, u, v, m]`` this is the Kronecker product
``A^T (x) Phi0^-1 (x) Phi0^T (x) S_d(A)^T`` (``S_d`` = symmetric power
acting on degree-d monomials), whose eigenvalues are the weights

    w = a_l * b_u^-1 * b_v * a**m

(a = eigenvalues of A, b = eigenvalues of Phi0).  We call this the
pushforward convention.  The equation is uniquely solvable exactly when
no weight equals 1, i.e. the bundle End(B) (x) T*  has no resonance.
Each factor is brought to upper triangular form through a Schur
decomposition, so the solve is a nested triangular back substitution.

Indices (legs l, rows u, columns v) are 0-based.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatchError,
    IllConditionedWarning,
    NotClosedError,
    NotFlatError,
    RankMismatchError,
    ResonanceObstructionError,
    ResonantButSolvableWarning,
    SingularCocycleError,
)
from .normal_form import ILL_CONDITIONED, NormalFormReport, verify_conjugacy
from .series import (
    DET_TOL,
    TruncatedMapGerm,
    TruncatedSeries,
    jet_basis,
    jet_diff,
    jet_matmul,
    jet_matrix_inverse,
    jet_mul,
    linear_power_blocks,
)
from .spectral import DEFAULT_TOL, eigen, require_contraction, small_divisor

#: named graded-solve orderings (permutations of the axes leg, row, column, monomial)
ORDERINGS = {"forward": (0, 1, 2, 3), "reverse": (3, 2, 1, 0)}


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

class EquivariantBundle:
    """Trivial rank-r bundle with cocycle ``phi`` over the germ ``base``.

    Parameters
    ----------
    base : TruncatedMapGerm
    cocycle : array_like, shape (r, r, M), or r x r nested list of TruncatedSeries
    preset : str, optional
        ``"tangent"`` when ``phi`` is the Jacobian of ``base``; kept so that
        changing the cap recomputes the cocycle.
    """

    def __init__(self, base, cocycle, preset=None):
        basis = base.basis
        if isinstance(cocycle, np.ndarray) and cocycle.ndim == 3:
            phi = np.array(cocycle, dtype=complex)
        else:
            rows = [list(row) for row in cocycle]
            phi = np.array([[_series_coeffs(e, base) for e in row] for row in rows], dtype=complex)
        if phi.ndim != 3 or phi.shape[0] != phi.shape[1] or phi.shape[2] != basis.size:
            raise DimensionMismatchError(f"cocycle must have shape (r, r, {basis.size}), got {phi.shape}")
        if abs(np.linalg.det(phi[..., 0])) <= DET_TOL:
            raise SingularCocycleError("cocycle is not invertible at the origin")
        phi.flags.writeable = False
        self.base = base
        self.cocycle = phi
        self.preset = preset
        # highest degree at which the cocycle is exact (a Jacobian loses one)
        self.precision = base.cap - 1 if preset == "tangent" else base.cap

    @classmethod
    def tangent(cls, g):
        """Tangent bundle: the cocycle is the Jacobian matrix of g."""
        return cls(g, g.jacobian(), preset="tangent")

    @classmethod
    def constant(cls, g, Phi0):
        """Cocycle constant in z."""
        Phi0 = np.atleast_2d(np.asarray(Phi0, dtype=complex))
        phi = np.zeros(Phi0.shape + (g.basis.size,), dtype=complex)
        phi[..., 0] = Phi0
        return cls(g, phi)

    @property
    def rank(self):
        return self.cocycle.shape[0]

    @property
    def n(self):
        return self.base.n

    @property
    def cap(self):
        return self.base.cap

    @property
    def fiber_matrix(self):
        return np.array(self.cocycle[..., 0])

    def with_cap(self, cap):
        if cap == self.cap:
            return self
        g = self.base.with_cap(cap)
        if self.preset == "tangent":
            return EquivariantBundle.tangent(g)
        M = min(self.cocycle.shape[-1], g.basis.size)
        phi = np.zeros((self.rank, self.rank, g.basis.size), dtype=complex)
        phi[..., :M] = self.cocycle[..., :M]
        return EquivariantBundle(g, phi, self.preset)


def _series_coeffs(e, g):
    if isinstance(e, TruncatedSeries):
        if e.n != g.n or e.cap != g.cap:
            raise DimensionMismatchError("cocycle entry lives in a different jet ring")
        return e.coeffs
    arr = np.zeros(g.basis.size, dtype=complex)
    arr[0] = complex(e)
    return arr


@dataclass
class ConnectionForm:
    """Matrix-valued 1-form ``theta = sum_l theta_l dz_l``.

    ``coeffs`` has shape (n, r, r, M): leg l, row u, column v, monomial.
    ``valid_degree`` is the highest degree that carries meaningful
    coefficients (higher ones are zero by construction).
    """

    n: int
    rank: int
    cap: int
    coeffs: np.ndarray
    valid_degree: int = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        shape = (self.n, self.rank, self.rank, jet_basis(self.n, self.cap).size)
        if c.shape != shape:
            raise DimensionMismatchError(f"connection coefficients need shape {shape}, got {c.shape}")
        c.flags.writeable = False
        self.coeffs = c
        if self.valid_degree is None:
            self.valid_degree = self.cap

    @classmethod
    def zero(cls, n, rank, cap):
        return cls(n, rank, cap, np.zeros((n, rank, rank, jet_basis(n, cap).size)))

    @classmethod
    def constant(cls, C, cap):
        """``sum_l C[l] dz_l`` with constant matrices C of shape (n, r, r)."""
        C = np.asarray(C, dtype=complex)
        n, r = C.shape[0], C.shape[1]
        arr = np.zeros((n, r, r, jet_basis(n, cap).size), dtype=complex)
        arr[..., 0] = C
        return cls(n, r, cap, arr)

    @property
    def basis(self):
        return jet_basis(self.n, self.cap)

    def entry(self, l, u, v):
        return TruncatedSeries(self.n, self.cap, self.coeffs[l, u, v])

    def truncated(self, degree):
        """Coefficient array with degrees above ``degree`` zeroed."""
        arr = np.array(self.coeffs)
        arr[..., int(self.basis.offsets[degree + 1]):] = 0
        return arr

    def max_abs(self, max_degree=None):
        d = self.valid_degree if max_degree is None else max_degree
        stop = int(self.basis.offsets[min(d, self.cap) + 1])
        return float(np.abs(self.coeffs[..., :stop]).max()) if self.coeffs.size else 0.0


@dataclass
class CurvatureForm:
    """``F[l, l'] = d_l theta_l' - d_l' theta_l + [theta_l, theta_l']``, shape (n, n, r, r, M).

    Antisymmetric in (l, l') by construction; meaningful up to ``valid_degree``.
    """

    coeffs: np.ndarray
    valid_degree: int
    basis: object

    def max_abs(self):
        stop = int(self.basis.offsets[max(self.valid_degree, -1) + 1]) if self.valid_degree >= 0 else 0
        return float(np.abs(self.coeffs[..., :stop]).max()) if stop else 0.0


@dataclass
class TorsionTensor:
    """``T[i, l, m] = theta_l[i, m] - theta_m[i, l]``, shape (n, n, n, M)."""

    coeffs: np.ndarray
    valid_degree: int
    basis: object

    def max_abs(self):
        stop = int(self.basis.offsets[self.valid_degree + 1])
        return float(np.abs(self.coeffs[..., :stop]).max())


# ---------------------------------------------------------------------------
# the gauge action
# ---------------------------------------------------------------------------

class _GaugeData:
    """Arrays shared by every evaluation of the gauge action on one bundle."""

    def __init__(self, E):
        g = E.base
        self.n, self.r, self.cap = g.n, E.rank, g.cap
        self.basis = g.basis
        self.P = g.power_table()
        self.J = g.jacobian()
        self.phi = E.cocycle
        self.phi_inv = jet_matrix_inverse(self.phi, self.basis)
        dphi = np.stack([jet_diff(self.phi, l, self.basis) for l in range(self.n)])
        self.inhom = jet_matmul(self.phi_inv, dphi, self.basis)

    def apply(self, theta, cap=None):
        """``g#theta`` on coefficient arrays, computed in the jet ring of order ``cap``."""
        cap = self.cap if cap is None else cap
        M = int(self.basis.offsets[cap + 1])
        basis = jet_basis(self.n, cap)
        th = theta[..., :M]
        pulled = th @ self.P[:M, :M]
        legs = jet_mul(pulled[:, None], self.J[:, :, None, None, :M], basis).sum(axis=0)
        out = jet_matmul(jet_matmul(self.phi_inv[..., :M], legs, basis), self.phi[..., :M], basis)
        return out + self.inhom[..., :M]


def gauge_pullback(theta, E):
    """The equivariant action ``g#theta = phi^-1 d phi + phi^-1 (g*theta) phi``.

    Parameters
    ----------
    theta : ConnectionForm
    E : EquivariantBundle

    Returns
    -------
    ConnectionForm
    """
    if theta.n != E.n or theta.rank != E.rank or theta.cap != E.cap:
        raise DimensionMismatchError("connection and bundle do not match")
    data = _GaugeData(E)
    valid = min(theta.valid_degree, E.precision - 1)
    return ConnectionForm(E.n, E.rank, E.cap, data.apply(theta.coeffs), valid_degree=valid)


# ---------------------------------------------------------------------------
# graded solve
# ---------------------------------------------------------------------------

def _flip(k):
    return np.eye(k)[::-1]


def _transpose_factor(M, spectral=None):
    """``M^T = V T V^-1`` with T upper triangular, from the Schur form of M."""
    s = spectral if spectral is not None else eigen(M)
    Q, T = s.schur_basis, s.schur_form
    F = _flip(len(T))
    return Q.conj() @ F, F @ T.T @ F, F @ Q.T


def _inverse_factor(M, spectral=None):
    """``M^-1 = V T V^-1`` with T upper triangular."""
    s = spectral if spectral is not None else eigen(M)
    Q, T = s.schur_basis, s.schur_form
    Tinv = solve_triangular(T, np.eye(len(T)), lower=False)
    return Q, Tinv, Q.conj().T


def _apply_axis(M, X, axis):
    return np.moveaxis(np.tensordot(M, X, axes=(1, axis)), 0, axis)


def _kron_apply(Ts, X):
    for axis, T in enumerate(Ts):
        X = _apply_axis(T, X, axis)
    return X


class _SolveState:
    def __init__(self, degree, tol):
        self.degree = degree
        self.tol = tol
        self.min_gap = math.inf
        self.consistent_singular = 0


def _kron_solve(Ts, C, s, state):
    """Solve ``(I - s T_0 (x) T_1 (x) ...) W = C`` for upper triangular factors."""
    T0 = Ts[0]
    if len(Ts) == 1:
        return _leaf_solve(T0, C, s, state)
    rest = Ts[1:]
    W = np.zeros_like(C)
    RW = np.zeros_like(C)
    for a in range(len(T0) - 1, -1, -1):
        rhs = C[a]
        if a + 1 < len(T0):
            rhs = rhs + s * np.tensordot(T0[a, a + 1:], RW[a + 1:], axes=(0, 0))
        W[a] = _kron_solve(rest, rhs, s * T0[a, a], state)
        RW[a] = _kron_apply(rest, W[a])
    return W


def _leaf_solve(T, c, s, state):
    M = np.eye(len(T)) - s * T
    piv = np.diag(M)
    gaps = np.abs(piv)
    state.min_gap = min(state.min_gap, float(gaps.min()))
    singular = gaps <= state.tol
    if not singular.any():
        return solve_triangular(M, c, lower=False)
    w = np.zeros_like(c)
    ref = max(1.0, float(np.abs(c).max()))
    for m in range(len(T) - 1, -1, -1):
        val = c[m] - M[m, m + 1:] @ w[m + 1:]
        if singular[m]:
            if abs(val) > state.tol * ref:
                raise ResonanceObstructionError(state.degree, weight=s * T[m, m], defect=abs(val))
            state.consistent_singular += 1
        else:
            w[m] = val / M[m, m]
    return w


class _GradedOperator:
    """Triangularized factors of ``P_d`` for every degree up to ``cap``."""

    def __init__(self, E, cap):
        A = E.base.linear_part
        Phi0 = E.fiber_matrix
        sA = eigen(A)
        sPhi = eigen(Phi0)
        self.leg = _transpose_factor(A, sA)
        self.row = _inverse_factor(Phi0, sPhi)
        self.col = _transpose_factor(Phi0, sPhi)
        Q, T = sA.schur_basis, sA.schur_form
        PQ = linear_power_blocks(Q, cap)
        PQh = linear_power_blocks(Q.conj().T, cap)
        PT = linear_power_blocks(T, cap)
        self.mono = []
        for d in range(cap + 1):
            F = _flip(len(PT[d]))
            self.mono.append((PQh[d].T @ F, F @ PT[d].T @ F, F @ PQ[d].T))
        self.alpha = sA.eigenvalues
        self.beta = sPhi.eigenvalues

    def factors(self, d):
        return [self.leg, self.row, self.col, self.mono[d]]

    def solve(self, d, C, tol, ordering):
        facs = self.factors(d)
        X = C
        for axis, (V, T, Vi) in enumerate(facs):
            X = _apply_axis(Vi, X, axis)
        perm = ORDERINGS[ordering] if isinstance(ordering, str) else tuple(ordering)
        inv = np.argsort(perm)
        Ts = [facs[p][1] for p in perm]
        state = _SolveState(d, tol)
        W = _kron_solve(Ts, np.transpose(X, perm), 1.0, state)
        W = np.transpose(W, inv)
        for axis, (V, T, Vi) in enumerate(facs):
            W = _apply_axis(V, W, axis)
        return W, state


def graded_weights(E, d, convention="pushforward"):
    """Eigenvalues of the degree-d graded operator as an array ``w[l, u, v, m]``.

    ``convention="pushforward"`` gives ``a_l * b_u^-1 * b_v * a**m`` (the
    operator actually inverted); ``"pullback"`` gives the reciprocals.
    Either way the equation is singular exactly where ``w == 1``.
    """
    alpha = eigen(E.base.linear_part).eigenvalues
    beta = eigen(E.fiber_matrix).eigenvalues
    basis = jet_basis(E.n, d)
    mons = basis.exponents[basis.block(d)]
    am = np.prod(alpha[None, :] ** mons, axis=1)
    w = alpha[:, None, None, None] / beta[None, :, None, None] * beta[None, None, :, None] * am[None, None, None, :]
    if convention == "pushforward":
        return w
    if convention == "pullback":
        return 1.0 / w
    raise ValueError(f"unknown convention {convention!r}")


def solve_equivariant_connection(E, D=None, tol=DEFAULT_TOL, ordering="forward"):
    """The unique connection fixed by the gauge action, degree by degree.

    Parameters
    ----------
    E : EquivariantBundle
        Its base must be a contraction.
    D : int, optional
        Cap (default ``E.cap``).  Degrees ``0 .. D-1`` are solved: the
        cocycle's derivative is only known to degree ``D-1``.
    tol : float
        A graded pivot ``|1 - w|`` at or below ``tol`` counts as singular;
        a singular equation is accepted when its right-hand side is below
        ``tol * max(1, |rhs|)`` there.
    ordering : {"forward", "reverse"} or tuple
        Nesting order of the triangular substitution over the axes
        (leg, row, column, monomial).  The solution does not depend on
        it; the option exists to check uniqueness numerically.

    Returns
    -------
    ConnectionForm
        Meaningful through ``valid_degree`` (one below the precision of the
        cocycle: ``D-1`` in general, ``D-2`` for the tangent bundle, whose
        Jacobian cocycle is exact only to ``D-1``).  ``diagnostics`` holds
        ``fixed_point_residual`` (max over degrees ``<= valid_degree``), ``min_weight_gap`` (min ``|1 - w|``) and
        ``resonant_but_solvable`` (count of singular consistent pivots).

    Raises
    ------
    NotContractionError
    ResonanceObstructionError
        Some graded equation is singular and inconsistent.

    Warns
    -----
    ResonantButSolvableWarning, IllConditionedWarning
    """
    if D is not None:
        E = E.with_cap(D)
    g = E.base
    require_contraction(eigen(g.linear_part).eigenvalues)
    n, r, cap = E.n, E.rank, E.cap
    if cap < 1:
        raise ValueError("truncation degree must be at least 1")
    data = _GaugeData(E)
    op = _GradedOperator(E, cap)
    basis = data.basis
    theta = np.zeros((n, r, r, basis.size), dtype=complex)
    min_gap = math.inf
    solvable = 0
    for d in range(cap):
        blk = basis.block(d)
        c = data.apply(theta, cap=d)[..., blk]
        W, state = op.solve(d, c, tol, ordering)
        theta[..., blk] = W
        min_gap = min(min_gap, state.min_gap)
        solvable += state.consistent_singular
    if solvable:
        warnings.warn(f"{solvable} singular graded equations were consistent; kernel components set to zero",
                      ResonantButSolvableWarning, stacklevel=2)
    if min_gap < ILL_CONDITIONED:
        warnings.warn(f"min |1 - weight| = {min_gap:.3g}", IllConditionedWarning, stacklevel=2)
    valid = E.precision - 1
    stop = int(basis.offsets[valid + 1])
    residual = float(np.abs(data.apply(theta)[..., :stop] - theta[..., :stop]).max())
    return ConnectionForm(n, r, cap, theta, valid_degree=valid, diagnostics={
        "fixed_point_residual": residual,
        "min_weight_gap": min_gap,
        "resonant_but_solvable": solvable,
        "ordering": ordering,
    })


# ---------------------------------------------------------------------------
# curvature, torsion, coframe, developing map
# ---------------------------------------------------------------------------

def curvature(theta):
    """``F = d theta + theta ^ theta``, valid to degree ``valid_degree - 1``."""
    basis = theta.basis
    th = theta.coeffs
    n = theta.n
    d = np.stack([np.stack([jet_diff(th[lp], l, basis) for lp in range(n)]) for l in range(n)])
    prod = jet_matmul(th[:, None], th[None, :], basis)
    F = d - np.swapaxes(d, 0, 1) + prod - np.swapaxes(prod, 0, 1)
    return CurvatureForm(F, theta.valid_degree - 1, basis)


def torsion(theta):
    """``T[i, l, m] = theta_l[i, m] - theta_m[i, l]`` for a connection on a rank-n bundle."""
    if theta.rank != theta.n:
        raise RankMismatchError(f"torsion needs rank n = {theta.n}, got rank {theta.rank}")
    th = theta.coeffs  # (l, i, m, M)
    t = np.transpose(th, (1, 0, 2, 3))  # (i, l, m, M)
    return TorsionTensor(t - np.swapaxes(t, 1, 2), theta.valid_degree, theta.basis)


def _scale(theta):
    return max(1.0, theta.max_abs())


def parallel_coframe(theta, tol=DEFAULT_TOL):
    """Parallel coframe ``Omega`` with ``d_l Omega = Omega theta_l`` and ``Omega(0) = I``.

    Row i of the returned (n, n, M) array is the 1-form
    ``omega_i = sum_j Omega[i, j] dz_j``.  Built by Euler's identity
    ``(k+1) Omega_{k+1} = sum_l z_l (Omega theta_l)_k``, valid through
    degree ``valid_degree + 1``.

    Raises
    ------
    RankMismatchError
        ``rank != n``.
    NotFlatError
        Curvature exceeds ``tol * max(1, |theta|)``.
    """
    if theta.rank != theta.n:
        raise RankMismatchError("a coframe needs a connection of rank n")
    F = curvature(theta).max_abs()
    if F > tol * _scale(theta):
        raise NotFlatError(f"curvature residual {F:.3g} above tolerance")
    n, basis = theta.n, theta.basis
    top = min(theta.valid_degree + 1, theta.cap)
    Om = np.zeros((n, n, basis.size), dtype=complex)
    Om[np.arange(n), np.arange(n), 0] = 1.0
    for k in range(top):
        blk = basis.block(k)
        nxt = np.zeros_like(Om)
        for l in range(n):
            prod = jet_matmul(Om, theta.coeffs[l], basis)
            part = np.zeros_like(prod)
            part[..., blk] = prod[..., blk]
            nxt += _shift(part, l, basis)
        Om[..., basis.block(k + 1)] = nxt[..., basis.block(k + 1)] / (k + 1)
    return Om


def _shift(a, j, basis):
    out = np.zeros_like(a)
    src, tgt = basis.shift_maps[j]
    out[..., tgt] = a[..., src]
    return out


def developing_coordinates(omega, tol=1e-8):
    """Antiderivatives ``Z_i`` of closed 1-forms with ``Z_i(0) = 0``.

    Parameters
    ----------
    omega : ndarray, shape (n, n, M)
        Row i is ``omega_i = sum_j omega[i, j] dz_j`` (as from
        :func:`parallel_coframe`), coefficients of degree <= cap - 1
        used.
    tol : float
        Bound on the closedness spread relative to ``max(1, |omega|)``.

    Returns
    -------
    Z : TruncatedMapGerm
    spread : float
        Largest disagreement between the ``dz_j`` slots contributing to a
        monomial of Z (the closedness residual).

    Raises
    ------
    NotClosedError
    """
    omega = np.asarray(omega, dtype=complex)
    n = omega.shape[0]
    M = omega.shape[-1]
    cap = _cap_from_size(n, M)
    basis = jet_basis(n, cap)
    exps = basis.exponents
    # contrib[j, i, mu] = omega[i, j] at mu - e_j, divided by mu_j (nan where mu_j = 0)
    contrib = np.full((n, n, M), np.nan, dtype=complex)
    for j in range(n):
        src, tgt = basis.shift_maps[j]
        contrib[j][:, tgt] = omega[:, j, src] / exps[tgt, j]
    have = ~np.isnan(contrib.real)
    Z = np.where(have, contrib, 0).sum(axis=0) / np.maximum(have.sum(axis=0), 1)
    dev = np.where(have, np.abs(contrib - Z[None]), 0.0)
    spread = float(dev.max()) if M else 0.0
    scale = max(1.0, float(np.abs(omega).max()))
    if spread > tol * scale:
        raise NotClosedError(f"1-forms not closed: spread {spread:.3g}")
    return TruncatedMapGerm.from_array(n, cap, Z), spread


def _cap_from_size(n, M):
    cap = 0
    while math.comb(n + cap, n) < M:
        cap += 1
    if math.comb(n + cap, n) != M:
        raise DimensionMismatchError(f"{M} coefficients do not form a jet basis in {n} variables")
    return cap


def linearize_via_connection(g, D=None, tol=DEFAULT_TOL, ordering="forward"):
    """Linearize ``g`` through its invariant torsion-free flat connection.

    Tangent bundle -> invariant connection -> curvature and torsion checks
    -> parallel coframe -> developing coordinates Z.  The returned change
    is ``U = Z`` and the target is ``L A L^-1`` with L the linear part of Z.

    Returns
    -------
    NormalFormReport
        ``diagnostics`` holds ``curvature``, ``torsion``,
        ``fixed_point_residual``, ``closedness`` and ``min_weight_gap``.

    Raises
    ------
    ResonanceObstructionError
        Resonant tangent bundle with a nonzero obstruction.
    NotFlatError, NotClosedError
        A stage failed its tolerance.
    """
    if D is not None and D != g.cap:
        g = g.with_cap(D)
    E = EquivariantBundle.tangent(g)
    theta = solve_equivariant_connection(E, tol=tol, ordering=ordering)
    F = curvature(theta).max_abs()
    Tor = torsion(theta).max_abs()
    omega = parallel_coframe(theta, tol=max(tol, 1e-9))
    Z, spread = developing_coordinates(omega, tol=max(tol, 1e-8))
    L = Z.linear_part
    target = TruncatedMapGerm.linear(L @ g.linear_part @ np.linalg.inv(L), g.cap)
    residual = verify_conjugacy(Z, g, target)
    alpha = eigen(g.linear_part).eigenvalues
    divisor = small_divisor(alpha, 2, max(g.cap, 2))
    return NormalFormReport(
        change=Z,
        normalized=target,
        kept_monomials=[],
        max_residual=residual,
        small_divisor=divisor,
        ill_conditioned=theta.diagnostics["min_weight_gap"] < ILL_CONDITIONED,
        diagnostics={
            "curvature": F,
            "torsion": Tor,
            "fixed_point_residual": theta.diagnostics["fixed_point_residual"],
            "closedness": spread,
            "min_weight_gap": theta.diagnostics["min_weight_gap"],
            "scale": max(float(np.abs(g.coeffs).max()), 1e-300),
            "connection": theta,
        },
    )


__all__ = [
    "ConnectionForm",
    "CurvatureForm",
    "EquivariantBundle",
    "ORDERINGS",
    "TorsionTensor",
    "curvature",
    "developing_coordinates",
    "gauge_pullback",
    "graded_weights",
    "linearize_via_connection",
    "parallel_coframe",
    "solve_equivariant_connection",
    "torsion",
]
