import logging

import numpy as np

logger = logging.getLogger(__name__)


def jitter(matrix):
    """Diagonal loading used when a covariance fails to factorize."""
    k = matrix.shape[0]
    return 1e-6 * abs(np.trace(matrix)) / k + 1e-12


def regularized_cholesky(matrix):
    """Lower Cholesky factor of ``matrix``, loading the diagonal once on failure.

    Returns ``(factor, regularized)``; ``factor`` is None when the loaded
    matrix still does not factorize.
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        return None, False
    try:
        return np.linalg.cholesky(matrix), False
    except np.linalg.LinAlgError:
        pass
    loaded = matrix + jitter(matrix) * np.eye(matrix.shape[0])
    try:
        factor = np.linalg.cholesky(loaded)
    except np.linalg.LinAlgError:
        logger.debug('Cholesky failed after diagonal loading (k=%d)', matrix.shape[0])
        return None, True
    return factor, True
