"""Arithmetic over GF(2^8) and GF(2^16) with log/antilog tables.

Matrix multiply and Gauss-Jordan elimination are the hot paths for the
codec; both have a numba kernel and a vectorized numpy fallback.
"""

import numpy as np

from ._accel import jit_kernel, select

# Primitive polynomials: x^8+x^4+x^3+x^2+1 and x^16+x^12+x^3+x+1.
_POLY = {256: 0x11D, 65536: 0x1100B}


class GaloisField:
    """GF(2^w) for w in {8, 16}, generator alpha = 2."""

    _cache: dict = {}

    def __init__(self, order: int):
        if order not in _POLY:
            raise ValueError(f"unsupported field order {order}; use 256 or 65536")
        self.order = order
        poly = _POLY[order]
        exp = np.zeros(order - 1, dtype=np.int64)
        log = np.zeros(order, dtype=np.int64)
        x = 1
        for i in range(order - 1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & order:
                x ^= poly
        if x != 1:
            raise AssertionError("generator is not primitive for the chosen polynomial")
        self.exp = exp
        self.log = log

    @classmethod
    def get(cls, order: int) -> "GaloisField":
        if order not in cls._cache:
            cls._cache[order] = cls(order)
        return cls._cache[order]

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        q1 = self.order - 1
        nz = (a != 0) & (b != 0)
        out = np.where(nz, self.exp[(self.log[a] + self.log[b]) % q1], 0)
        return out if out.ndim else int(out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        q1 = self.order - 1
        out = self.exp[(q1 - self.log[a]) % q1]
        return out if out.ndim else int(out)

    def matmul(self, A, B):
        A = np.ascontiguousarray(A, dtype=np.int64)
        B = np.ascontiguousarray(B, dtype=np.int64)
        return _gf_matmul(A, B, self.log, self.exp, self.order - 1)

    def solve(self, M, B):
        """Solve M X = B; returns X or None if M is singular."""
        M = np.ascontiguousarray(M, dtype=np.int64)
        B = np.ascontiguousarray(B, dtype=np.int64)
        ok, X = _gf_solve(M, B, self.log, self.exp, self.order - 1)
        return X if ok else None

    def inv_matrix(self, M):
        """Inverse of a square matrix, or None if singular."""
        M = np.asarray(M, dtype=np.int64)
        return self.solve(M, np.eye(M.shape[0], dtype=np.int64))


def _gf_matmul_impl(A, B, logt, expt, q1):
    rows, inner = A.shape
    cols = B.shape[1]
    out = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        for t in range(inner):
            a = A[i, t]
            if a == 0:
                continue
            la = logt[a]
            for j in range(cols):
                b = B[t, j]
                if b != 0:
                    out[i, j] ^= expt[(la + logt[b]) % q1]
    return out


_gf_matmul_jit = jit_kernel(_gf_matmul_impl)


def _gf_matmul_numpy(A, B, logt, expt, q1):
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[0]):
        for t in range(A.shape[1]):
            a = A[i, t]
            if a == 0:
                continue
            row = B[t]
            nz = row != 0
            prod = np.zeros(row.shape, dtype=np.int64)
            prod[nz] = expt[(logt[a] + logt[row[nz]]) % q1]
            out[i] ^= prod
    return out


_gf_matmul = select(_gf_matmul_jit, _gf_matmul_numpy)


def _gf_solve_impl(M, B, logt, expt, q1):
    n = M.shape[0]
    w = B.shape[1]
    M = M.copy()
    B = B.copy()
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if M[r, col] != 0:
                piv = r
                break
        if piv < 0:
            return False, B
        if piv != col:
            for c in range(n):
                tmp = M[col, c]
                M[col, c] = M[piv, c]
                M[piv, c] = tmp
            for c in range(w):
                tmp = B[col, c]
                B[col, c] = B[piv, c]
                B[piv, c] = tmp
        linv = (q1 - logt[M[col, col]]) % q1
        for c in range(n):
            if M[col, c] != 0:
                M[col, c] = expt[(logt[M[col, c]] + linv) % q1]
        for c in range(w):
            if B[col, c] != 0:
                B[col, c] = expt[(logt[B[col, c]] + linv) % q1]
        for r in range(n):
            f = M[r, col]
            if r == col or f == 0:
                continue
            lf = logt[f]
            for c in range(n):
                if M[col, c] != 0:
                    M[r, c] ^= expt[(lf + logt[M[col, c]]) % q1]
            for c in range(w):
                if B[col, c] != 0:
                    B[r, c] ^= expt[(lf + logt[B[col, c]]) % q1]
    return True, B


_gf_solve_jit = jit_kernel(_gf_solve_impl)


def _gf_solve_numpy(M, B, logt, expt, q1):
    n = M.shape[0]
    M = M.copy()
    B = B.copy()

    def scaled(row, lf):
        out = np.zeros_like(row)
        nz = row != 0
        out[nz] = expt[(lf + logt[row[nz]]) % q1]
        return out

    for col in range(n):
        nzr = np.nonzero(M[col:, col])[0]
        if nzr.size == 0:
            return False, B
        piv = col + int(nzr[0])
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
            B[[col, piv]] = B[[piv, col]]
        linv = (q1 - logt[M[col, col]]) % q1
        M[col] = scaled(M[col], linv)
        B[col] = scaled(B[col], linv)
        for r in range(n):
            f = M[r, col]
            if r == col or f == 0:
                continue
            lf = logt[f]
            M[r] ^= scaled(M[col], lf)
            B[r] ^= scaled(B[col], lf)
    return True, B


_gf_solve = select(_gf_solve_jit, _gf_solve_numpy)
