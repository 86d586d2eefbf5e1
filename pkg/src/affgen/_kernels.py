"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical semantics.  The public names at the bottom of this
module are bound to one of them at import time.  Set ``AFFGEN_DISABLE_NUMBA=1``
(or run without numba installed) to force the numpy path.
"""
from __future__ import annotations

import os
from functools import lru_cache
from itertools import combinations

import numpy as np

_DISABLED = os.environ.get("AFFGEN_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"

MAX_DIM = 16


# ---------------------------------------------------------------------------
# blade bookkeeping (pure python, cached per dimension)


@lru_cache(maxsize=None)
def blade_layout(n: int):
    """Return ``(masks, index_table, position)`` for dimension ``n``.

    ``masks[p]`` lists the bitmasks of the grade-p basis blades in
    lexicographic order of their index tuples, ``index_table[p]`` is the
    matching ``(C(n,p), p)`` integer array of indices and ``position[mask]``
    gives the offset of a blade within its grade.
    """
    if not 0 < n <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {n}")
    masks = []
    tables = []
    position = np.zeros(1 << n, dtype=np.int64)
    for p in range(n + 1):
        combos = list(combinations(range(n), p))
        m = np.array([sum(1 << i for i in c) for c in combos], dtype=np.int64)
        t = np.array(combos, dtype=np.int64).reshape(len(combos), p)
        position[m] = np.arange(len(combos))
        m.setflags(write=False)
        t.setflags(write=False)
        masks.append(m)
        tables.append(t)
    position.setflags(write=False)
    return tuple(masks), tuple(tables), position


def reorder_sign(a: int, b: int) -> int:
    """Sign picked up when concatenating sorted blades ``a`` then ``b``."""
    inversions = 0
    j = 0
    bb = b
    while bb:
        if bb & 1:
            inversions += bin(a >> (j + 1)).count("1")
        bb >>= 1
        j += 1
    return -1 if inversions & 1 else 1


# ---------------------------------------------------------------------------
# numpy implementations


def _np_popcount(x):
    return np.bitwise_count(x).astype(np.int64)


def _np_wedge(a, b, n):
    out = np.zeros(1 << n)
    ia = np.flatnonzero(a)
    ib = np.flatnonzero(b)
    if ia.size == 0 or ib.size == 0:
        return out
    A = ia[:, None]
    B = ib[None, :]
    inv = np.zeros((ia.size, ib.size), dtype=np.int64)
    for j in range(n):
        has = (B >> j) & 1
        inv += has * _np_popcount(A >> (j + 1))
    sign = 1.0 - 2.0 * (inv & 1)
    keep = (A & B) == 0
    vals = np.where(keep, sign * a[ia][:, None] * b[ib][None, :], 0.0)
    np.add.at(out, (A | B).ravel(), vals.ravel())
    return out


def _np_compound(G, idx):
    m, p = idx.shape
    if p == 0:
        return np.ones((1, 1))
    sub = G[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def _np_minors(V, idx):
    m, p = idx.shape
    if p == 0:
        return np.ones(1)
    sub = V[:, idx]  # (p, m, p)
    return np.linalg.det(np.transpose(sub, (1, 0, 2)))


def _np_poly_eval(coeffs, exps, x):
    if coeffs.size == 0:
        return 0.0
    return float(np.sum(coeffs * np.prod(x[None, :] ** exps, axis=1)))


def _np_poly_grad(coeffs, exps, x):
    t, n = exps.shape
    if t == 0:
        return np.zeros(n)
    powers = x[None, :] ** exps
    lowered = x[None, :] ** np.maximum(exps - 1, 0)
    # product over j != i without dividing, so zeros in x are exact
    left = np.ones((t, n))
    right = np.ones((t, n))
    left[:, 1:] = np.cumprod(powers[:, :-1], axis=1)
    right[:, :-1] = np.cumprod(powers[:, :0:-1], axis=1)[:, ::-1]
    return (coeffs[:, None] * exps * lowered * left * right).sum(axis=0)


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_popcount(x):
        c = 0
        while x:
            c += x & 1
            x >>= 1
        return c

    @njit(cache=True)
    def _nb_wedge(a, b, n):
        size = 1 << n
        out = np.zeros(size)
        for ia in range(size):
            ca = a[ia]
            if ca == 0.0:
                continue
            for ib in range(size):
                cb = b[ib]
                if cb == 0.0 or (ia & ib) != 0:
                    continue
                inv = 0
                bb = ib
                j = 0
                while bb:
                    if bb & 1:
                        inv += _nb_popcount(ia >> (j + 1))
                    bb >>= 1
                    j += 1
                if inv & 1:
                    out[ia | ib] -= ca * cb
                else:
                    out[ia | ib] += ca * cb
        return out

    @njit(cache=True)
    def _nb_compound(G, idx):
        m, p = idx.shape
        out = np.empty((m, m))
        if p == 0:
            out[0, 0] = 1.0
            return out
        sub = np.empty((p, p))
        for r in range(m):
            for c in range(r, m):
                for i in range(p):
                    for j in range(p):
                        sub[i, j] = G[idx[r, i], idx[c, j]]
                d = np.linalg.det(sub)
                out[r, c] = d
                out[c, r] = d
        return out

    @njit(cache=True)
    def _nb_minors(V, idx):
        m, p = idx.shape
        out = np.empty(m)
        if p == 0:
            out[0] = 1.0
            return out
        sub = np.empty((p, p))
        for r in range(m):
            for i in range(p):
                for j in range(p):
                    sub[i, j] = V[i, idx[r, j]]
            out[r] = np.linalg.det(sub)
        return out

    @njit(cache=True)
    def _nb_poly_eval(coeffs, exps, x):
        total = 0.0
        T, n = exps.shape
        for t in range(T):
            term = coeffs[t]
            for i in range(n):
                e = exps[t, i]
                if e:
                    term *= x[i] ** e
            total += term
        return total

    @njit(cache=True)
    def _nb_poly_grad(coeffs, exps, x):
        T, n = exps.shape
        out = np.zeros(n)
        for t in range(T):
            c = coeffs[t]
            for i in range(n):
                ei = exps[t, i]
                if ei == 0:
                    continue
                term = c * ei
                for j in range(n):
                    e = exps[t, j]
                    if j == i:
                        e -= 1
                    if e:
                        term *= x[j] ** e
                out[i] += term
        return out


# ---------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    wedge_dense = _nb_wedge
    compound_matrix = _nb_compound
    vector_minors = _nb_minors
    poly_eval = _nb_poly_eval
    poly_grad = _nb_poly_grad
else:
    wedge_dense = _np_wedge
    compound_matrix = _np_compound
    vector_minors = _np_minors
    poly_eval = _np_poly_eval
    poly_grad = _np_poly_grad


def implementations(name: str):
    """Return the ``{"numpy": fn, "numba": fn}`` pair for a kernel (benchmarks, tests)."""
    table = {
        "wedge_dense": (_np_wedge, "_nb_wedge"),
        "compound_matrix": (_np_compound, "_nb_compound"),
        "vector_minors": (_np_minors, "_nb_minors"),
        "poly_eval": (_np_poly_eval, "_nb_poly_eval"),
        "poly_grad": (_np_poly_grad, "_nb_poly_grad"),
    }
    np_fn, nb_name = table[name]
    out = {"numpy": np_fn}
    if HAVE_NUMBA:
        out["numba"] = globals()[nb_name]
    return out
