"""Pure numpy GF(2) elimination, used when the compiled kernel is absent."""
import numpy as np


def echelon_inplace(rows: np.ndarray, ncols: int, reduced: bool = True) -> np.ndarray:
    """Row-reduce bit-packed ``rows`` (uint64, 64 columns per word) in place.

    Same contract as the compiled kernel: only the first ``ncols`` columns
    are pivot candidates, everything to the right rides along.
    """
    nrows = rows.shape[0]
    rank = 0
    pivots = []
    one = np.uint64(1)
    for col in range(ncols):
        if rank == nrows:
            break
        w = col >> 6
        shift = np.uint64(col & 63)
        column = (rows[rank:, w] >> shift) & one
        hits = np.flatnonzero(column)
        if hits.size == 0:
            continue
        piv = rank + int(hits[0])
        if piv != rank:
            rows[[rank, piv], w:] = rows[[piv, rank], w:]
        mask = ((rows[:, w] >> shift) & one).astype(bool)
        mask[rank] = False
        if not reduced:
            mask[:rank] = False
        if mask.any():
            rows[mask, w:] ^= rows[rank, w:]
        pivots.append(col)
        rank += 1
    return np.asarray(pivots, dtype=np.intp)
