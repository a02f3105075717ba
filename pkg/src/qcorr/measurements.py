"""Projective and weak measurements on qubit B.

Bases are Bloch unit vectors ``n``; the projector pair is (I +/- n.sigma)/2.
Measurement strength ``x`` is a positive float, with ``PROJECTIVE`` (= inf)
standing for the strong-measurement limit. All operator builders broadcast
over leading axes of ``n`` so the optimizer can evaluate whole grids at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import I2, PAULIS, partial_trace_B

PROJECTIVE = math.inf
# tanh(x) == 1.0 in double precision well before this; cosh overflows at ~710
SATURATION_X = 350.0
UNIT_TOL = 1e-12
MIN_BRANCH_PROB = 1e-14

_PAULI_STACK = np.stack(PAULIS)


def strength(x) -> float:
    """Normalize a measurement strength: positive float or PROJECTIVE."""
    if isinstance(x, str):
        x = math.inf if x.strip().lower() in ("inf", "infinity", "projective") else float(x)
    x = float(x)
    if math.isnan(x) or x <= 0:
        raise ValueError(f"measurement strength must be > 0 (or inf), got {x}")
    return PROJECTIVE if x > SATURATION_X else x


def tanh_sech(x):
    """(tanh x, sech x) with the projective limit mapped to (1, 0)."""
    x = strength(x)
    if x == PROJECTIVE:
        return 1.0, 0.0
    return math.tanh(x), 1.0 / math.cosh(x)


def unit_basis(n, tol: float = UNIT_TOL):
    n = np.asarray(n, dtype=float)
    if n.shape[-1] != 3:
        raise ValueError(f"basis must be a 3-vector, got shape {n.shape}")
    norm = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise ValueError(f"basis vector is not unit norm (|n| = {np.ravel(norm)[0]:.15g})")
    return n


def basis_from_angles(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(phi)], axis=-1)


def bloch_from_unitary(t, y1, y2, y3):
    """Image axis (z1, z2, z3) of the computational basis under V = tI + i y.sigma."""
    norm = t * t + y1 * y1 + y2 * y2 + y3 * y3
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"t^2 + |y|^2 must be 1, got {norm}")
    return np.array([
        2 * (-t * y2 + y1 * y3),
        2 * (t * y1 + y2 * y3),
        t * t + y3 * y3 - y1 * y1 - y2 * y2,
    ])


def projectors(n):
    """(Pi0, Pi1) = ((I + n.sigma)/2, (I - n.sigma)/2)."""
    n = unit_basis(n)
    ns = np.tensordot(n, _PAULI_STACK, axes=([-1], [0]))
    return 0.5 * (I2 + ns), 0.5 * (I2 - ns)


@dataclass(frozen=True, eq=False)
class WeakPair:
    p_plus: np.ndarray
    p_minus: np.ndarray

    def completeness_error(self) -> float:
        s = (
            np.swapaxes(self.p_plus.conj(), -1, -2) @ self.p_plus
            + np.swapaxes(self.p_minus.conj(), -1, -2) @ self.p_minus
        )
        return float(np.max(np.abs(s - I2)))


def weak_pair(n, x) -> WeakPair:
    """P(+x) = sqrt((1-tanh x)/2) Pi0 + sqrt((1+tanh x)/2) Pi1 and P(-x) with the roles swapped."""
    pi0, pi1 = projectors(n)
    x = strength(x)
    if x == PROJECTIVE:
        return WeakPair(pi0, pi1)
    t = math.tanh(x)
    a, b = math.sqrt((1 - t) / 2), math.sqrt((1 + t) / 2)
    return WeakPair(a * pi0 + b * pi1, b * pi0 + a * pi1)


def lift_B(op):
    """I (x) op for op of shape (..., 2, 2)."""
    op = np.asarray(op, dtype=complex)
    out = np.einsum("ij,...kl->...ikjl", I2, op)
    return out.reshape(op.shape[:-2] + (4, 4))


def _sandwich(k, rho):
    return k @ rho @ np.swapaxes(k.conj(), -1, -2)


def _rho(state):
    return np.asarray(getattr(state, "matrix", state), dtype=complex)


@dataclass(frozen=True, eq=False)
class Branch:
    probability: float
    state: np.ndarray | None


def post_measurement_ensemble(rho, n, x) -> tuple[Branch, Branch]:
    """Outcome probabilities and conditional states of A after measuring B.

    A branch with probability below 1e-14 carries ``state=None``.
    """
    rho = _rho(rho)
    pair = weak_pair(n, x)
    out = []
    for p_op in (pair.p_plus, pair.p_minus):
        sigma = _sandwich(lift_B(p_op), rho)
        prob = float(np.trace(sigma).real)
        cond = partial_trace_B(sigma) / prob if prob >= MIN_BRANCH_PROB else None
        out.append(Branch(prob, cond))
    return out[0], out[1]


def weak_dephase(rho, n, x):
    """sum_{+/-} (I (x) P(+/-x)) rho (I (x) P(+/-x)); projective dephasing when x = PROJECTIVE."""
    rho = _rho(rho)
    pair = weak_pair(n, x)
    return _sandwich(lift_B(pair.p_plus), rho) + _sandwich(lift_B(pair.p_minus), rho)


def conditional_states_batch(rho, n, x):
    """Batched ensemble for an array of bases n (..., 3).

    Returns (probs (..., 2), conditional states (..., 2, 2, 2)); branches below
    1e-14 get the zero matrix, which contributes nothing to weighted entropies.
    """
    rho = _rho(rho)
    pair = weak_pair(n, x)
    probs, conds = [], []
    for p_op in (pair.p_plus, pair.p_minus):
        sigma = _sandwich(lift_B(p_op), rho)
        red = np.einsum("...ikjk->...ij", sigma.reshape(sigma.shape[:-2] + (2, 2, 2, 2)))
        p = np.trace(red, axis1=-2, axis2=-1).real
        safe = np.where(p >= MIN_BRANCH_PROB, p, 1.0)
        red = np.where((p >= MIN_BRANCH_PROB)[..., None, None], red / safe[..., None, None], 0.0)
        probs.append(p)
        conds.append(red)
    return np.stack(probs, axis=-1), np.stack(conds, axis=-3)
