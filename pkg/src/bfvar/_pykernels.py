"""Pure numpy fallback for the compiled bootstrap kernel (same contract as ``_ckernels``)."""

import numpy as np
from scipy.linalg import solve_triangular


def _residual_form(G, cols, resp, kappa, tol):
    xtx = G[np.ix_(cols, cols)]
    diag = np.diag(xtx)
    try:
        chol = np.linalg.cholesky(xtx)
    except np.linalg.LinAlgError:
        return None
    if np.any(np.diag(chol) ** 2 <= tol * diag) or np.any(diag <= 0):
        return None
    w = solve_triangular(chol, G[np.ix_(cols, resp)], lower=True)
    return G[np.ix_(resp, resp)] - kappa * (w.T @ w)


def replicate_residuals(Z, idx, cols, col_ptr, resp, kappa, tol):
    B, K, q = idx.shape[0], len(col_ptr) - 1, len(resp)
    forms = np.zeros((B, K, q, q))
    ok = np.zeros((B, K), dtype=bool)
    model_cols = [cols[col_ptr[k] : col_ptr[k + 1]] for k in range(K)]
    for b in range(B):
        zb = Z[idx[b]]
        G = zb.T @ zb
        for k in range(K):
            form = _residual_form(G, model_cols[k], resp, kappa[k], tol)
            if form is not None:
                forms[b, k] = form
                ok[b, k] = True
    return forms, ok
