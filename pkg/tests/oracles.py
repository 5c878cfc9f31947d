"""Independent reference implementations used as test oracles.

Nothing here touches the dense jet machinery of the package: polynomials
are plain ``{exponent tuple: complex}`` dicts, searches are nested loops
over full exponent boxes.
"""
import itertools
import math


def poly_add(a, b):
    out = dict(a)
    for m, c in b.items():
        out[m] = out.get(m, 0) + c
    return out


def poly_mul(a, b, cap):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            if sum(m) <= cap:
                out[m] = out.get(m, 0) + ca * cb
    return out


def poly_pow(a, k, n, cap):
    out = {(0,) * n: 1.0}
    for _ in range(k):
        out = poly_mul(out, a, cap)
    return out


def naive_compose(f, gs, n, cap):
    """``f(g_1, ..., g_n)`` by expanding every monomial with nested loops."""
    out = {}
    for m, c in f.items():
        term = {(0,) * n: c}
        for j, e in enumerate(m):
            term = poly_mul(term, poly_pow(gs[j], e, n, cap), cap)
        out = poly_add(out, term)
    return out


def poly_eval(a, z):
    return sum(c * math.prod(zj ** e for zj, e in zip(z, m)) for m, c in a.items())


def brute_matrix_resonances(alpha, bound, tol):
    """Set of ``(i, k)`` with ``|alpha_i - alpha**k| <= tol |alpha_i|``, ``2 <= |k| <= bound``.

    Searches the full box ``k in [0, bound]**n`` and keeps the first index of
    each group of equal eigenvalues as target, as the library does.
    """
    n = len(alpha)
    found = set()
    for k in itertools.product(range(bound + 1), repeat=n):
        s = sum(k)
        if s < 2 or s > bound:
            continue
        val = 1.0 + 0j
        for a, e in zip(alpha, k):
            val *= a ** e
        for i in range(n):
            if any(alpha[j] == alpha[i] for j in range(i)):
                continue
            if abs(alpha[i] - val) <= tol * abs(alpha[i]):
                found.add((i, k))
    return found


def brute_section_count(alpha, p, q, k_can, lam, tol):
    """Invariant basis tensors ``e_I dz_J z**m`` by a full box search.

    The box side is derived from the modulus bound ``max|alpha|**|m| >=
    (1 - tol) / |w0|`` over all slot combinations, then every m in the
    cube ``[0, side]**n`` is tried.
    """
    n = len(alpha)
    amax = max(abs(a) for a in alpha)
    det = math.prod(alpha)
    hits = []
    combos = list(itertools.product(range(n), repeat=p + q))
    w0s = []
    for c in combos:
        w = det ** k_can / lam
        for i in c[:p]:
            w /= alpha[i]
        for j in c[p:]:
            w *= alpha[j]
        w0s.append(w)
    top = max(abs(w) for w in w0s)
    if top < 1 - tol:
        return []
    side = int(math.log(top / (1 - tol)) / -math.log(amax)) + 1
    for c, w in zip(combos, w0s):
        for m in itertools.product(range(side + 1), repeat=n):
            val = w
            for a, e in zip(alpha, m):
                val *= a ** e
            if abs(val - 1) <= tol:
                hits.append((tuple(c[:p]), tuple(c[p:]), tuple(m)))
    return hits


def charpoly_residual(A, lam):
    """``|det(lam I - A)|`` by Laplace expansion (n small)."""
    n = len(A)
    M = [[(lam if i == j else 0) - A[i][j] for j in range(n)] for i in range(n)]
    return abs(_det(M))


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * _det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))
