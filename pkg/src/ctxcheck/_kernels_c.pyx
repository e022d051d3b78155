# cython: language_level=3
"""Compiled tableau kernel: same contract as ``_kernels_py``.

Entries are arbitrary Python rational objects; the win over the pure-Python
twin is the removal of interpreter loop overhead, not C arithmetic.
"""


def pivot(list rows, Py_ssize_t pr, Py_ssize_t pc):
    """Row-reduce ``rows`` in place so column ``pc`` becomes unit at row ``pr``."""
    cdef list prow = <list>rows[pr]
    cdef Py_ssize_t n = len(prow)
    cdef Py_ssize_t i, j
    cdef list row, newrow
    piv = prow[pc]
    if piv != 1:
        newrow = [None] * n
        for j in range(n):
            # zero entries stay zero; skipping them avoids rational arithmetic
            x = prow[j]
            newrow[j] = x / piv if x else x
        rows[pr] = prow = newrow
    for i in range(len(rows)):
        if i == pr:
            continue
        row = <list>rows[i]
        f = row[pc]
        if f:
            newrow = [None] * n
            for j in range(n):
                b = prow[j]
                newrow[j] = row[j] - f * b if b else row[j]
            rows[i] = newrow
