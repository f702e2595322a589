"""Shared fixture builders for the test suite."""

import numpy as np

HADAMARD4 = 0.5 * np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
)


def planted_spectrum_data(eigenvalues, n_rows: int, seed: int) -> np.ndarray:
    """Data whose sample correlation matrix has the given 4-eigenvalue spectrum.

    The eigenvalues must sum to 4. Construction: whiten a random matrix so its
    sample covariance is the identity, then color it with V sqrt(L) V^T where
    V is the normalized Hadamard basis. Every entry of V has magnitude 1/2,
    so diag(V L V^T) = sum(L)/4 = 1: the colored covariance is already a
    correlation matrix with the requested spectrum.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    assert lam.shape == (4,)
    assert abs(lam.sum() - 4.0) < 1e-9
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_rows, 4))
    g = g - g.mean(axis=0)
    cov = g.T @ g / (n_rows - 1)
    w, u = np.linalg.eigh(cov)
    white = g @ u @ np.diag(w**-0.5) @ u.T
    color = HADAMARD4 @ np.diag(np.sqrt(lam)) @ HADAMARD4.T
    return white @ color


def swap_positions(n: int, swaps) -> np.ndarray:
    """1..n as floats with the given (i, j) position swaps applied."""
    values = np.arange(1.0, n + 1.0)
    for i, j in swaps:
        values[i], values[j] = values[j], values[i]
    return values
