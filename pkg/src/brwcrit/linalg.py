"""Small dense determinants by Gaussian elimination with partial pivoting."""

import numpy as np


def det_partial_pivot(a):
    """Determinant of a square matrix or of a stack of square matrices.

    Parameters
    ----------
    a : array_like, shape (..., m, m)
        Matrix or batch of matrices. Elimination is vectorized over the
        leading axes, so a batch of ten thousand 9x9 matrices costs nine
        numpy passes rather than ten thousand Python loops.

    Returns
    -------
    float or ndarray
        Determinant(s), with the row-swap sign tracked exactly.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    single = a.ndim == 2
    if single:
        a = a[np.newaxis]
    batch_shape = a.shape[:-2]
    m = a.shape[-1]
    a = a.reshape(-1, m, m)
    idx = np.arange(a.shape[0])
    det = np.ones(a.shape[0])
    for col in range(m):
        piv = col + np.argmax(np.abs(a[:, col:, col]), axis=1)
        swap = piv != col
        if swap.any():
            rows_col = a[idx, col].copy()
            a[idx, col] = a[idx, piv]
            a[idx, piv] = rows_col
            det[swap] = -det[swap]
        p = a[:, col, col]
        det *= p
        live = p != 0.0
        if col + 1 < m and live.any():
            factors = np.zeros((a.shape[0], m - col - 1))
            factors[live] = a[live, col + 1:, col] / p[live, np.newaxis]
            a[:, col + 1:, col:] -= factors[:, :, np.newaxis] * a[:, np.newaxis, col, col:]
    det = det.reshape(batch_shape)
    return float(det[0]) if single else det
