"""
Truncated power series in n complex variables and germs of maps.

Everything lives in the jet ring of order ``cap``: monomials of total
degree above ``cap`` are dropped silently by every operation.

Coefficients are stored densely, one slot per monomial of degree <= cap,
in graded-lexicographic order (degree first, then descending lex, so
``z1**2`` precedes ``z1*z2`` precedes ``z2**2``).  A :class:`JetBasis`
holds the enumeration together with the index tables used for fast
multiplication, differentiation and substitution; bases are cached per
``(n, cap)``.

    >>> f = TruncatedSeries.variable(0, n=2, cap=3) + TruncatedSeries.variable(1, 2, 3)
    >>> (f * f).terms()[(1, 1)]
    (2+0j)
"""
from __future__ import annotations

import numbers
from collections.abc import Mapping
from functools import cached_property, lru_cache

import numpy as np

from .errors import DimensionMismatchError, NonGermError, SingularLinearPartError

#: relative threshold under which coefficients are treated as fill-in noise
CHOP = 1e-14
#: |det| of a linear part below this is treated as singular
DET_TOL = 1e-12


class MonomialIndex(tuple):
    """Exponent vector ``m`` of a monomial ``z**m``; a plain tuple of ints."""

    __slots__ = ()

    def __new__(cls, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        return super().__new__(cls, exps)

    @property
    def total_degree(self):
        return sum(self)

    def __repr__(self):
        return f"MonomialIndex({tuple(self)})"


def _compositions(d, n):
    """All exponent vectors of total degree d in n variables, descending lex."""
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            out.append((first,) + rest)
    return out


class JetBasis:
    """Monomials of degree <= cap in n variables plus cached index tables."""

    def __init__(self, n, cap):
        if n < 0 or cap < 0:
            raise ValueError("n and cap must be non-negative")
        self.n = n
        self.cap = cap
        exps = []
        offsets = [0]
        for d in range(cap + 1):
            block = _compositions(d, n)
            exps.extend(block)
            offsets.append(offsets[-1] + len(block))
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self.degrees = self.exponents.sum(axis=1)
        self.offsets = np.array(offsets)
        self.size = len(exps)
        self.index = {m: k for k, m in enumerate(exps)}
        self._pair_cache = {}

    def __repr__(self):
        return f"JetBasis(n={self.n}, cap={self.cap}, size={self.size})"

    def block(self, d):
        """Slice selecting the monomials of degree exactly d."""
        return slice(int(self.offsets[d]), int(self.offsets[d + 1]))

    # -- lookup of exponent vectors ------------------------------------------------

    @cached_property
    def _radix(self):
        return (self.cap + 1) ** np.arange(self.n - 1, -1, -1, dtype=np.int64)

    @cached_property
    def _codes(self):
        codes = self.exponents @ self._radix
        order = np.argsort(codes)
        return codes[order], order

    def lookup(self, exponents):
        """Indices of exponent vectors (rows of ``exponents``), all of degree <= cap."""
        exponents = np.asarray(exponents, dtype=np.int64)
        sorted_codes, order = self._codes
        pos = np.searchsorted(sorted_codes, exponents @ self._radix)
        return order[pos]

    # -- structural tables ------------------------------------------------------------

    @cached_property
    def parent(self):
        """For each monomial m of degree >= 1: (index of m - e_j, j) with j its last variable."""
        par = np.zeros(self.size, dtype=np.int64)
        var = np.zeros(self.size, dtype=np.int64)
        if self.size > 1:
            e = self.exponents[1:]
            last = self.n - 1 - np.argmax(e[:, ::-1] > 0, axis=1)
            reduced = e.copy()
            reduced[np.arange(len(e)), last] -= 1
            par[1:] = self.lookup(reduced)
            var[1:] = last
        return par, var

    @cached_property
    def derivative_maps(self):
        """Per variable i: (source idx, target idx, multiplier) for d/dz_i."""
        maps = []
        for i in range(self.n):
            src = np.nonzero(self.exponents[:, i] > 0)[0]
            reduced = self.exponents[src].copy()
            reduced[:, i] -= 1
            maps.append((src, self.lookup(reduced), self.exponents[src, i].astype(float)))
        return maps

    @cached_property
    def shift_maps(self):
        """Per variable j: (source idx, target idx) for multiplication by z_j."""
        maps = []
        src = np.nonzero(self.degrees < self.cap)[0]
        for j in range(self.n):
            raised = self.exponents[src].copy()
            raised[:, j] += 1
            maps.append((src, self.lookup(raised)))
        return maps

    def pairs(self, lo_a=0, lo_b=0):
        """Convolution table for factors of valuation >= lo_a and >= lo_b.

        Returns ``(I, J, starts, k0)``: the product coefficient at index
        ``k0 + t`` is the sum of ``a[I] * b[J]`` over the segment
        ``starts[t]:starts[t+1]``.
        """
        key = (lo_a, lo_b)
        if key not in self._pair_cache:
            I_parts, J_parts = [], []
            for da in range(lo_a, self.cap + 1):
                for db in range(lo_b, self.cap - da + 1):
                    ia = np.arange(self.offsets[da], self.offsets[da + 1])
                    jb = np.arange(self.offsets[db], self.offsets[db + 1])
                    gi, gj = np.meshgrid(ia, jb, indexing="ij")
                    I_parts.append(gi.ravel())
                    J_parts.append(gj.ravel())
            I = np.concatenate(I_parts) if I_parts else np.zeros(0, np.int64)
            J = np.concatenate(J_parts) if J_parts else np.zeros(0, np.int64)
            K = self.lookup(self.exponents[I] + self.exponents[J]) if len(I) else I
            order = np.argsort(K, kind="stable")
            I, J, K = I[order], J[order], K[order]
            k0 = int(self.offsets[min(lo_a + lo_b, self.cap + 1)])
            starts = np.searchsorted(K, np.arange(k0, self.size))
            self._pair_cache[key] = (I, J, starts, k0)
        return self._pair_cache[key]

    def valuation(self, a):
        """Lowest degree carrying a nonzero coefficient anywhere in ``a`` (cap+1 if zero)."""
        nz = np.nonzero(np.any(np.asarray(a).reshape(-1, self.size) != 0, axis=0))[0]
        return int(self.degrees[nz[0]]) if len(nz) else self.cap + 1


@lru_cache(maxsize=None)
def jet_basis(n, cap):
    return JetBasis(n, cap)


@lru_cache(maxsize=64)
def exponent_vectors(n, lo, hi):
    """All exponent vectors with lo <= |m| <= hi as an int array, graded-lex order."""
    rows = [m for d in range(lo, hi + 1) for m in _compositions(d, n)]
    out = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# array-level kernels; leading axes broadcast, the last axis is the basis
# ---------------------------------------------------------------------------

def jet_mul(a, b, basis):
    """Truncated product of coefficient arrays ``a`` and ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (basis.size,)
    out = np.zeros(shape, dtype=complex)
    va, vb = basis.valuation(a), basis.valuation(b)
    if va + vb > basis.cap:
        return out
    I, J, starts, k0 = basis.pairs(va, vb)
    out[..., k0:] = np.add.reduceat(a[..., I] * b[..., J], starts, axis=-1)
    return out


def jet_matmul(X, Y, basis):
    """Matrix product of series matrices, shapes (..., r, s, M) @ (..., s, t, M)."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    lead = np.broadcast_shapes(X.shape[:-3], Y.shape[:-3])
    r, s, t = X.shape[-3], X.shape[-2], Y.shape[-2]
    out = np.zeros(lead + (r, t, basis.size), dtype=complex)
    va, vb = basis.valuation(X), basis.valuation(Y)
    if va + vb > basis.cap:
        return out
    I, J, starts, k0 = basis.pairs(va, vb)
    acc = 0
    for k in range(s):
        acc = acc + X[..., :, k, :][..., :, None, I] * Y[..., k, :, :][..., None, :, J]
    out[..., k0:] = np.add.reduceat(acc, starts, axis=-1)
    return out


def jet_diff(a, i, basis):
    """Partial derivative d/dz_i of coefficient array ``a``."""
    a = np.asarray(a)
    out = np.zeros(a.shape, dtype=complex)
    src, tgt, mult = basis.derivative_maps[i]
    out[..., tgt] = a[..., src] * mult
    return out


def jet_shift(a, j, basis):
    """Multiply coefficient array ``a`` by the variable z_j (truncating)."""
    a = np.asarray(a)
    out = np.zeros(a.shape, dtype=complex)
    src, tgt = basis.shift_maps[j]
    out[..., tgt] = a[..., src]
    return out


def jet_matrix_inverse(Phi, basis):
    """Inverse of a series matrix (r, r, M) whose constant term is invertible.

    Newton iteration X <- 2X - X Phi X, exact to one more doubling of the
    order at each step.
    """
    Phi = np.asarray(Phi, dtype=complex)
    r = Phi.shape[0]
    X = np.zeros_like(Phi)
    X[..., 0] = np.linalg.inv(Phi[..., 0])
    eye = np.zeros_like(Phi)
    eye[np.arange(r), np.arange(r), 0] = 1.0
    order = 1
    while order <= basis.cap:
        X = jet_matmul(X, 2 * eye - jet_matmul(Phi, X, basis), basis)
        order *= 2
    return X


def power_table(G, basis):
    """Matrix whose row m holds the coefficients of ``g**m`` (g = rows of G).

    ``G`` is (n, M) with zero constant terms, so ``g**m`` has valuation
    ``|m|`` and composition ``f o g`` is the row-vector product ``f @ P``.
    """
    G = np.asarray(G, dtype=complex)
    M = basis.size
    P = np.zeros((M, M), dtype=complex)
    P[0, 0] = 1.0
    if basis.cap == 0 or basis.n == 0:
        return P
    P[basis.block(1)] = G
    parent, var = basis.parent
    for k in range(2, basis.cap + 1):
        rows = basis.block(k)
        I, J, starts, k0 = basis.pairs(k - 1, 1)
        vals = P[parent[rows]][:, I] * G[var[rows]][:, J]
        P[rows, k0:] = np.add.reduceat(vals, starts, axis=1)
    return P


@lru_cache(maxsize=None)
def _degree_raise_map(n, d):
    """0/1 matrix sending (monomial of degree d-1, variable j) to the degree-d monomial."""
    lo = np.array(_compositions(d - 1, n), dtype=np.int64).reshape(-1, n)
    hi = {m: k for k, m in enumerate(_compositions(d, n))}
    S = np.zeros((len(lo) * n, len(hi)))
    for a, m in enumerate(lo):
        for j in range(n):
            e = m.copy()
            e[j] += 1
            S[a * n + j, hi[tuple(e)]] = 1.0
    return S


def linear_power_blocks(L, cap):
    """Degree blocks of the power table of the linear map ``z -> L z``.

    Entry ``d`` is the (N_d, N_d) matrix whose row m holds ``(L z)**m``
    in the degree-d monomial basis, for d = 0..cap.  Cheaper than
    :func:`power_table` because a linear map preserves degree.
    """
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    blocks = [np.ones((1, 1), dtype=complex)]
    if cap >= 1:
        blocks.append(L.copy())
    for d in range(2, cap + 1):
        basis_d = np.array(_compositions(d, n), dtype=np.int64).reshape(-1, n)
        lo_index = {m: k for k, m in enumerate(_compositions(d - 1, n))}
        # parent: drop one power of the last variable present
        last = n - 1 - np.argmax(basis_d[:, ::-1] > 0, axis=1)
        red = basis_d.copy()
        red[np.arange(len(red)), last] -= 1
        parent = np.array([lo_index[tuple(m)] for m in red])
        vals = blocks[d - 1][parent][:, :, None] * L[last][:, None, :]
        blocks.append(vals.reshape(len(basis_d), -1) @ _degree_raise_map(n, d))
    return blocks


def chop(a, basis):
    """Zero coefficients below CHOP times the largest coefficient of the same
    degree in the same row (spurious fill-in).

    Comparing within a degree keeps the rule invariant under dilations
    ``z -> c z``, which rescale each degree separately.
    """
    a = np.array(a, dtype=complex)
    if a.size == 0:
        return a
    mag = np.abs(a)
    offs = basis.offsets[:-1]
    scale = np.maximum.reduceat(mag, offs, axis=-1)
    thresh = np.repeat(CHOP * scale, np.diff(basis.offsets), axis=-1)
    a[mag < thresh] = 0
    return a


def _frozen(a):
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# TruncatedSeries
# ---------------------------------------------------------------------------

class TruncatedSeries:
    """A power series in ``n`` variables truncated at total degree ``cap``.

    Parameters
    ----------
    n, cap : int
        Number of variables and truncation degree.
    coefficients : mapping or array_like, optional
        Either ``{exponent tuple: coefficient}`` (terms above ``cap`` are
        dropped) or a dense vector in the order of ``jet_basis(n, cap)``.
    """

    __array_priority__ = 100
    __slots__ = ("n", "cap", "_c", "__weakref__")

    def __init__(self, n, cap, coefficients=None):
        basis = jet_basis(n, cap)
        if coefficients is None:
            arr = np.zeros(basis.size, dtype=complex)
        elif isinstance(coefficients, Mapping):
            arr = np.zeros(basis.size, dtype=complex)
            for m, c in coefficients.items():
                m = MonomialIndex(m)
                if len(m) != n:
                    raise DimensionMismatchError(f"exponent {tuple(m)} is not of length {n}")
                if m.total_degree <= cap:
                    arr[basis.index[m]] += complex(c)
        else:
            arr = np.asarray(coefficients, dtype=complex)
            if arr.shape != (basis.size,):
                raise DimensionMismatchError(
                    f"expected {basis.size} coefficients for n={n}, cap={cap}, got {arr.shape}"
                )
        self.n = n
        self.cap = cap
        self._c = _frozen(chop(arr, jet_basis(n, cap)))

    # constructors -----------------------------------------------------------------

    @classmethod
    def constant(cls, value, n, cap):
        arr = np.zeros(jet_basis(n, cap).size, dtype=complex)
        arr[0] = value
        return cls(n, cap, arr)

    @classmethod
    def variable(cls, i, n, cap):
        """The coordinate function z_{i+1} (``i`` is 0-based)."""
        return cls(n, cap, {tuple(int(k == i) for k in range(n)): 1.0})

    @classmethod
    def zero(cls, n, cap):
        return cls(n, cap)

    # accessors --------------------------------------------------------------------

    @property
    def basis(self):
        return jet_basis(self.n, self.cap)

    @property
    def coeffs(self):
        """Read-only dense coefficient vector in graded-lex order."""
        return self._c

    def coefficient(self, m):
        m = tuple(m)
        if sum(m) > self.cap:
            return 0j
        return complex(self._c[self.basis.index[m]])

    def terms(self):
        """Nonzero terms as an ordered ``{MonomialIndex: complex}`` dict."""
        exps = self.basis.exponents
        return {MonomialIndex(exps[k]): complex(self._c[k]) for k in np.nonzero(self._c)[0]}

    @property
    def valuation(self):
        return self.basis.valuation(self._c)

    @property
    def degree(self):
        nz = np.nonzero(self._c)[0]
        return int(self.basis.degrees[nz[-1]]) if len(nz) else -1

    def is_zero(self):
        return not np.any(self._c)

    def max_abs(self):
        return float(np.abs(self._c).max()) if self._c.size else 0.0

    def with_cap(self, cap):
        """Re-truncate (or zero-extend) to another cap."""
        if cap == self.cap:
            return self
        return TruncatedSeries(self.n, cap, self.terms())

    def __call__(self, z):
        """Evaluate the polynomial at points ``z`` of shape (..., n)."""
        z = np.asarray(z, dtype=complex)
        mons = np.prod(z[..., None, :] ** self.basis.exponents, axis=-1)
        return mons @ self._c

    # arithmetic -------------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.n != self.n or other.cap != self.cap:
            raise DimensionMismatchError(
                f"series in different jet rings: (n={self.n}, cap={self.cap}) "
                f"vs (n={other.n}, cap={other.cap})"
            )
        return other

    def _coerce(self, other):
        if isinstance(other, numbers.Number):
            return TruncatedSeries.constant(complex(other), self.n, self.cap)
        return self._check(other)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.n, self.cap, self._c + other._c)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.n, self.cap, -self._c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.n, self.cap, self._c - other._c)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return TruncatedSeries(self.n, self.cap, self._c * complex(other))
        other = self._check(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.n, self.cap, jet_mul(self._c, other._c, self.basis))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return TruncatedSeries(self.n, self.cap, self._c / complex(other))
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral):
            return NotImplemented
        if k < 0:
            return self.reciprocal() ** (-k)
        result = TruncatedSeries.constant(1.0, self.n, self.cap)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def reciprocal(self):
        """Multiplicative inverse; needs a nonzero constant term."""
        c0 = self._c[0]
        if c0 == 0:
            raise ZeroDivisionError("series without constant term is not invertible")
        basis = self.basis
        x = np.zeros_like(self._c)
        x[0] = 1 / c0
        order = 1
        while order <= self.cap:
            x = 2 * x - jet_mul(x, jet_mul(self._c, x, basis), basis)
            order *= 2
        return TruncatedSeries(self.n, self.cap, x)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.n == other.n and self.cap == other.cap and np.array_equal(self._c, other._c)

    __hash__ = None

    def allclose(self, other, atol=1e-12):
        other = self._coerce(other)
        return bool(np.all(np.abs(self._c - other._c) <= atol))

    def __repr__(self):
        from .parse import format_series

        return f"TruncatedSeries(n={self.n}, cap={self.cap}, {format_series(self)!r})"


def differentiate(f, i):
    """Formal partial derivative of ``f`` with respect to z_{i+1} (0-based ``i``)."""
    if not 0 <= i < f.n:
        raise IndexError(f"variable index {i} out of range for n={f.n}")
    return TruncatedSeries(f.n, f.cap, jet_diff(f.coeffs, i, f.basis))


def graded_component(f, d):
    """The homogeneous degree-d part of ``f``."""
    if not 0 <= d <= f.cap:
        raise ValueError(f"degree {d} outside 0..{f.cap}")
    out = np.zeros_like(f.coeffs)
    blk = f.basis.block(d)
    out[blk] = f.coeffs[blk]
    return TruncatedSeries(f.n, f.cap, out)


# ---------------------------------------------------------------------------
# TruncatedMapGerm
# ---------------------------------------------------------------------------

class TruncatedMapGerm:
    """A germ of holomorphic map (C^n, 0) -> (C^n, 0) truncated at ``cap``.

    Components must have zero constant term and the linear part must be
    invertible; pass ``check=False`` to skip both tests.
    """

    __slots__ = ("n", "cap", "_c", "_powers", "__weakref__")

    def __init__(self, components, *, check=True):
        components = list(components)
        if not components:
            raise ValueError("a germ needs at least one component")
        n, cap = components[0].n, components[0].cap
        for comp in components:
            if comp.n != n or comp.cap != cap:
                raise DimensionMismatchError("components live in different jet rings")
        if len(components) != n:
            raise DimensionMismatchError(f"{len(components)} components for dimension {n}")
        self._init(n, cap, np.array([c.coeffs for c in components]), check)

    def _init(self, n, cap, arr, check):
        self.n = n
        self.cap = cap
        self._c = _frozen(chop(arr, jet_basis(n, cap)))
        self._powers = None
        if check:
            consts = self._c[:, 0]
            if np.any(consts != 0):
                i = int(np.nonzero(consts)[0][0])
                raise NonGermError(f"component {i + 1} has constant term {consts[i]:g}")
            if cap < 1 or abs(np.linalg.det(self.linear_part)) <= DET_TOL:
                raise SingularLinearPartError("linear part is singular")

    @classmethod
    def from_array(cls, n, cap, arr, *, check=True):
        arr = np.asarray(arr, dtype=complex)
        if arr.shape != (n, jet_basis(n, cap).size):
            raise DimensionMismatchError(f"coefficient array has shape {arr.shape}")
        germ = cls.__new__(cls)
        germ._init(n, cap, arr, check)
        return germ

    @classmethod
    def linear(cls, A, cap, *, check=True):
        A = np.asarray(A, dtype=complex)
        n = A.shape[0]
        basis = jet_basis(n, cap)
        arr = np.zeros((n, basis.size), dtype=complex)
        arr[:, basis.block(1)] = A
        return cls.from_array(n, cap, arr, check=check)

    @classmethod
    def identity(cls, n, cap):
        return cls.linear(np.eye(n), cap)

    @property
    def basis(self):
        return jet_basis(self.n, self.cap)

    @property
    def coeffs(self):
        """Read-only (n, M) coefficient array, one row per component."""
        return self._c

    @property
    def components(self):
        return tuple(TruncatedSeries(self.n, self.cap, row) for row in self._c)

    def __getitem__(self, i):
        return TruncatedSeries(self.n, self.cap, self._c[i])

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.components)

    @property
    def linear_part(self):
        """n x n matrix of degree-one coefficients; entry (i, j) multiplies z_j in component i."""
        return np.array(self._c[:, self.basis.block(1)])

    def nonlinear_part(self):
        arr = np.array(self._c)
        arr[:, : self.basis.offsets[2]] = 0
        return arr

    def is_linear(self, atol=0.0):
        return bool(np.all(np.abs(self.nonlinear_part()) <= atol))

    def power_table(self):
        """Cached substitution matrix: composition with this germ is ``f @ P``."""
        if self._powers is None:
            self._powers = _frozen(power_table(self._c, self.basis))
        return self._powers

    def jacobian(self):
        """Series matrix J[i, j] = d(component i)/dz_j, shape (n, n, M)."""
        return np.stack([jet_diff(self._c, j, self.basis) for j in range(self.n)], axis=1)

    def with_cap(self, cap):
        if cap == self.cap:
            return self
        return TruncatedMapGerm([c.with_cap(cap) for c in self.components], check=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        mons = np.prod(z[..., None, :] ** self.basis.exponents, axis=-1)
        return mons @ self._c.T

    def __eq__(self, other):
        if not isinstance(other, TruncatedMapGerm):
            return NotImplemented
        return self.n == other.n and self.cap == other.cap and np.array_equal(self._c, other._c)

    __hash__ = None

    def __repr__(self):
        from .parse import format_germ

        return f"TruncatedMapGerm(cap={self.cap}, {format_germ(self)!r})"


def _same_ring(*objs):
    n, cap = objs[0].n, objs[0].cap
    for o in objs[1:]:
        if o.n != n or o.cap != cap:
            raise DimensionMismatchError(
                f"mismatched jet rings: (n={n}, cap={cap}) vs (n={o.n}, cap={o.cap})"
            )


def compose(f, g):
    """The pullback ``f o g`` of a series by a germ, truncated at the cap."""
    _same_ring(f, g)
    return TruncatedSeries(f.n, f.cap, f.coeffs @ g.power_table())


def compose_germs(*germs):
    """``g1 o g2 o ... o gk``; the linear part is the product of linear parts."""
    if not germs:
        raise ValueError("nothing to compose")
    _same_ring(*germs)
    acc = germs[-1]
    for outer in reversed(germs[:-1]):
        acc = TruncatedMapGerm.from_array(
            acc.n, acc.cap, outer.coeffs @ acc.power_table(), check=False
        )
    return acc


def invert_germ(g):
    """Formal inverse h with ``g o h = h o g = id`` up to the cap.

    Solves ``H @ P(g) = Id`` degree by degree; the diagonal blocks of
    the power table are symmetric powers of the linear part.
    """
    if abs(np.linalg.det(g.linear_part)) <= DET_TOL:
        raise SingularLinearPartError("cannot invert a germ with singular linear part")
    H = invert_array(g.coeffs, g.basis, g.power_table())
    return TruncatedMapGerm.from_array(g.n, g.cap, H, check=False)


def invert_array(G, basis, P=None):
    """Unchopped coefficient array of the formal inverse of the germ with coefficients G."""
    G = np.asarray(G, dtype=complex)
    n = G.shape[0]
    if P is None:
        P = power_table(G, basis)
    H = np.zeros((n, basis.size), dtype=complex)
    for d in range(1, basis.cap + 1):
        blk = basis.block(d)
        rhs = -H[:, : blk.start] @ P[: blk.start, blk]
        if d == 1:
            rhs = rhs + np.eye(n)
        H[:, blk] = np.linalg.solve(P[blk, blk].T, rhs.T).T
    return H


# ---------------------------------------------------------------------------
# TensorSeries
# ---------------------------------------------------------------------------

class TensorSeries:
    """Tensor field with p contravariant and q covariant slots, series entries.

    ``coeffs`` has shape ``(n,) * (p + q) + (M,)``; the first ``p`` axes
    index vector slots e_i, the remaining ``q`` index covector slots dz_j.
    """

    def __init__(self, p, q, n, cap, coefficients=None):
        basis = jet_basis(n, cap)
        shape = (n,) * (p + q) + (basis.size,)
        if coefficients is None:
            arr = np.zeros(shape, dtype=complex)
        else:
            arr = np.asarray(coefficients, dtype=complex)
            if arr.shape != shape:
                raise DimensionMismatchError(f"expected shape {shape}, got {arr.shape}")
        self.p, self.q, self.n, self.cap = p, q, n, cap
        self.coeffs = _frozen(np.array(arr))

    @classmethod
    def basis_tensor(cls, upper, lower, m, n, cap, value=1.0):
        """``value * z**m * e_upper (x) dz_lower`` with 0-based slot indices."""
        t = np.zeros((n,) * (len(upper) + len(lower)) + (jet_basis(n, cap).size,), dtype=complex)
        t[tuple(upper) + tuple(lower) + (jet_basis(n, cap).index[tuple(m)],)] = value
        return cls(len(upper), len(lower), n, cap, t)

    @property
    def entry_count(self):
        return self.n ** (self.p + self.q)

    def __add__(self, other):
        if (self.p, self.q, self.n, self.cap) != (other.p, other.q, other.n, other.cap):
            raise DimensionMismatchError("tensor types differ")
        return TensorSeries(self.p, self.q, self.n, self.cap, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        return TensorSeries(self.p, self.q, self.n, self.cap, self.coeffs * complex(c))

    __rmul__ = __mul__

    def pullback(self, g, canonical_power=0, character=1.0):
        """Pullback by the germ ``g``.

        Vector slots transform by ``Dg^{-1}``, covector slots by ``Dg^T``;
        an extra factor ``det(Dg)**canonical_power / character`` accounts
        for twists by powers of the canonical bundle and a flat line bundle.
        """
        _same_ring(self, g)
        basis = g.basis
        P = g.power_table()
        T = self.coeffs @ P
        J = g.jacobian()
        Jinv = jet_matrix_inverse(J, basis)
        k = self.p + self.q
        for slot in range(k):
            M = Jinv if slot < self.p else np.swapaxes(J, 0, 1)
            T = np.moveaxis(T, slot, 0)
            T = np.moveaxis(_slot_apply(M, T, basis), 0, slot)
        if canonical_power:
            det = _series_det(J, basis)
            factor = TruncatedSeries(self.n, self.cap, det) ** canonical_power
            T = jet_mul(T, factor.coeffs, basis)
        return TensorSeries(self.p, self.q, self.n, self.cap, T / complex(character))

    def max_abs(self):
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0


def _slot_apply(M, T, basis):
    """Contract series matrix M (a, b, K) with T along T's first axis (b)."""
    out = 0
    for b in range(M.shape[1]):
        out = out + jet_mul(M[:, b].reshape((M.shape[0],) + (1,) * (T.ndim - 2) + (-1,)), T[b], basis)
    return out


def _series_det(J, basis):
    """Determinant of a series matrix by cofactor expansion (n is small)."""
    n = J.shape[0]
    if n == 1:
        return J[0, 0]
    total = 0
    for j in range(n):
        minor = np.delete(np.delete(J, 0, axis=0), j, axis=1)
        total = total + (-1) ** j * jet_mul(J[0, j], _series_det(minor, basis), basis)
    return total
