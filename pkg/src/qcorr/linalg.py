"""Fixed-size (2x2 / 4x4) complex matrix helpers and entropies in bits."""
from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
EIG_CLIP_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


class NotHermitianError(ValueError):
    pass


class NegativeSpectrumError(ValueError):
    pass


def _check_shape(m, sizes=(2, 4)):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in sizes:
        raise ValueError(f"expected a square matrix of size {sizes}, got shape {m.shape}")
    return m


def tensor(a, b):
    """Kronecker product of two 2x2 matrices."""
    a = _check_shape(a, (2,))
    b = _check_shape(b, (2,))
    return np.kron(a, b)


def partial_trace_B(rho):
    """Trace out the second qubit of a 4x4 operator."""
    rho = _check_shape(rho, (4,))
    return np.einsum("ikjk->ij", rho.reshape(2, 2, 2, 2))


def partial_trace_A(rho):
    """Trace out the first qubit of a 4x4 operator."""
    rho = _check_shape(rho, (4,))
    return np.einsum("kikj->ij", rho.reshape(2, 2, 2, 2))


def hermiticity_deviation(m) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigenvalues(m, tol: float = HERMITIAN_TOL):
    """Real eigenvalues of a Hermitian 2x2 or 4x4 matrix, in descending order.

    Raises NotHermitianError if any entry of ``m - m^dagger`` exceeds ``tol``.
    """
    m = _check_shape(m)
    dev = hermiticity_deviation(m)
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^dagger| = {dev:.3e})")
    # symmetrize so LAPACK sees an exactly Hermitian input; makes repeated calls identical
    h = 0.5 * (m + m.conj().T)
    return np.linalg.eigvalsh(h)[::-1].copy()


def xlog2x(q):
    """Elementwise q*log2(q) with 0*log 0 = 0."""
    q = np.asarray(q, dtype=float)
    safe = np.where(q > 0, q, 1.0)
    return np.where(q > 0, q * np.log2(safe), 0.0)


def spectrum_entropy(eigs, axis=-1, clip_tol: float = EIG_CLIP_TOL):
    """Shannon entropy (bits) of probability vectors along ``axis``.

    Entries in [-clip_tol, 0) are treated as zero; anything more negative is rejected.
    """
    eigs = np.asarray(eigs, dtype=float)
    if np.any(eigs < -clip_tol):
        raise NegativeSpectrumError(f"eigenvalue {eigs.min():.3e} below -{clip_tol:g}")
    eigs = np.clip(eigs, 0.0, 1.0)
    return -np.sum(xlog2x(eigs), axis=axis)


def von_neumann_entropy(rho) -> float:
    """S(rho) = -tr(rho log2 rho) for a 2x2 or 4x4 density matrix."""
    return float(max(spectrum_entropy(hermitian_eigenvalues(rho)), 0.0))


def binary_entropy(q):
    """H(q) = -q log2 q - (1-q) log2 (1-q), vectorized."""
    q = np.asarray(q, dtype=float)
    return -xlog2x(q) - xlog2x(1.0 - q)


def random_unitary(rng, dim: int = 4):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
