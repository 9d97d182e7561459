# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled GF(2) elimination on bit-packed rows (64 columns per word)."""
import numpy as np

from libc.stdint cimport uint64_t


def echelon_inplace(uint64_t[:, ::1] rows, Py_ssize_t ncols, bint reduced=True):
    """Row-reduce ``rows`` in place over the first ``ncols`` columns.

    Columns past ``ncols`` (augmentation, tracked transforms) are carried
    along but never chosen as pivots. Returns the pivot columns.
    """
    cdef Py_ssize_t nrows = rows.shape[0]
    cdef Py_ssize_t nwords = rows.shape[1]
    cdef Py_ssize_t rank = 0
    cdef Py_ssize_t col, w, r, i, k, piv, start
    cdef uint64_t bit, tmp
    out = np.empty(min(nrows, ncols), dtype=np.intp)
    cdef Py_ssize_t[::1] piv_out = out

    with nogil:
        for col in range(ncols):
            if rank == nrows:
                break
            w = col >> 6
            bit = (<uint64_t>1) << (col & 63)
            piv = -1
            for r in range(rank, nrows):
                if rows[r, w] & bit:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != rank:
                for k in range(w, nwords):
                    tmp = rows[piv, k]
                    rows[piv, k] = rows[rank, k]
                    rows[rank, k] = tmp
            start = 0 if reduced else rank + 1
            for i in range(start, nrows):
                if i != rank and (rows[i, w] & bit):
                    for k in range(w, nwords):
                        rows[i, k] ^= rows[rank, k]
            piv_out[rank] = col
            rank += 1
    return out[:rank].copy()
