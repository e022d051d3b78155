"""Pure-Python tableau kernel: the simplex pivot inner loop.

Rows are lists of exact rationals (``fractions.Fraction`` or ``gmpy2.mpq``).
The compiled twin in ``_kernels_c.pyx`` implements the same contract.
"""

from __future__ import annotations


def pivot(rows: list, pr: int, pc: int) -> None:
    """Row-reduce ``rows`` in place so column ``pc`` becomes unit at row ``pr``."""
    prow = rows[pr]
    piv = prow[pc]
    if piv != 1:
        # zero entries stay zero; skipping them avoids rational arithmetic
        prow = [x / piv if x else x for x in prow]
        rows[pr] = prow
    for i in range(len(rows)):
        if i == pr:
            continue
        row = rows[i]
        f = row[pc]
        if f:
            rows[i] = [a - f * b if b else a for a, b in zip(row, prow)]
