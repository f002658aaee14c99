"""Backend selection for the bootstrap hot loop.

The compiled extension ``bfvar._ckernels`` is used when it was built; otherwise
(or when ``BFVAR_PURE_PYTHON=1``) the numpy implementation in
``bfvar._pykernels`` takes over.  Both share one contract.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("BFVAR_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

# relative Cholesky pivot floor for X'X on a resample
PIVOT_TOL = 1e-10

_BACKENDS = {"python": _pykernels}
if BACKEND == "cython":
    _BACKENDS["cython"] = _impl


def available_backends():
    return tuple(_BACKENDS)


def replicate_residuals(Z, idx, cols, col_ptr, resp, kappa, tol=PIVOT_TOL, backend=None):
    """Residual forms ``Y_b'(I - H_k)Y_b`` for every bootstrap replicate and model.

    Parameters
    ----------
    Z : (n, m) array
        Data table holding every design column and the response column(s).
    idx : (B, n) int array
        Resampled row indices, one row per replicate.
    cols, col_ptr : int arrays
        Model ``k`` uses ``Z`` columns ``cols[col_ptr[k]:col_ptr[k+1]]``.
    resp : int array
        Response column(s) in ``Z``.
    kappa : (K,) array
        Shrinkage factor per model.

    Returns
    -------
    forms : (B, K, q, q) array
    ok : (B, K) bool array
        ``False`` where the resampled design was numerically rank deficient.
    """
    impl = _impl if backend is None else _BACKENDS[backend]
    return impl.replicate_residuals(
        np.ascontiguousarray(Z, dtype=np.float64),
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(col_ptr, dtype=np.int64),
        np.ascontiguousarray(resp, dtype=np.int64),
        np.ascontiguousarray(kappa, dtype=np.float64),
        float(tol),
    )
