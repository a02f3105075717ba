"""Quantum discord, super-quantum discord, one-way deficit and weak one-way deficit.

Each measure has two independent routes:

* closed forms for the Werner and Bell-diagonal families (``werner_measure``,
  ``bell_measure``), written directly in terms of the family parameters;
* ``measure_numeric``, which builds the measurement operators as matrices and
  minimizes the objective over Bloch directions of qubit B (coarse grid on the
  hemisphere, then Nelder-Mead). It accepts any two-qubit state and serves as
  the oracle for the closed forms.

All values are in bits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .linalg import partial_trace_A, spectrum_entropy, von_neumann_entropy, xlog2x
from .measurements import (
    PROJECTIVE,
    basis_from_angles,
    conditional_states_batch,
    lift_B,
    strength,
    tanh_sech,
    weak_pair,
)
from .states import BellDiagonalParams, TwoQubitState, WernerParams, bell_eigenvalues

CLAMP_TOL = 1e-9
TIE_TOL = 1e-14


class MeasureKind(str, enum.Enum):
    DISCORD = "discord"
    SUPER_DISCORD = "super-discord"
    DEFICIT = "deficit"
    WEAK_DEFICIT = "weak-deficit"

    @property
    def is_weak(self) -> bool:
        return self in (MeasureKind.SUPER_DISCORD, MeasureKind.WEAK_DEFICIT)

    @property
    def is_deficit(self) -> bool:
        return self in (MeasureKind.DEFICIT, MeasureKind.WEAK_DEFICIT)

    @classmethod
    def parse(cls, value) -> "MeasureKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for k in cls:
            if k.value == key:
                return k
        raise ValueError(f"unknown measure {value!r}; choose from {[k.value for k in cls]}")


class NegativeMeasureError(RuntimeError):
    """A measure came out below -1e-9: an entropy or optimizer bug, never clamped."""


@dataclass
class MeasureResult:
    kind: MeasureKind
    value: float
    method: str
    x: float = PROJECTIVE
    optimal_basis: tuple | None = None
    iterations: int | None = None
    final_tolerance: float | None = None
    converged: bool = True
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "method": self.method,
            "x": "inf" if self.x == PROJECTIVE else self.x,
            "optimal_basis": None if self.optimal_basis is None else list(self.optimal_basis),
            "iterations": self.iterations,
            "final_tolerance": self.final_tolerance,
            "converged": self.converged,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureResult":
        basis = d.get("optimal_basis")
        return cls(
            kind=MeasureKind.parse(d["kind"]),
            value=float(d["value"]),
            method=d["method"],
            x=strength(d.get("x", "inf")),
            optimal_basis=None if basis is None else tuple(map(float, basis)),
            iterations=d.get("iterations"),
            final_tolerance=d.get("final_tolerance"),
            converged=bool(d.get("converged", True)),
            flags=list(d.get("flags", [])),
        )


@dataclass(frozen=True)
class OptimizerOptions:
    coarse_grid: tuple = (64, 64)
    refine_tolerance: float = 1e-12
    max_refine_iters: int = 400

    def __post_init__(self):
        n_theta, n_phi = self.coarse_grid
        if n_theta < 16 or n_phi < 8:
            raise ValueError(f"coarse grid must be at least 16x8, got {self.coarse_grid}")
        if not self.refine_tolerance > 0:
            raise ValueError("refine_tolerance must be positive")
        if self.max_refine_iters < 1:
            raise ValueError("max_refine_iters must be >= 1")


def _finish(value: float, result: MeasureResult) -> MeasureResult:
    if value < 0:
        if value < -CLAMP_TOL:
            raise NegativeMeasureError(f"{result.kind.value} evaluated to {value:.3e} bits")
        value = 0.0
        result.flags.append("clamped")
    result.value = float(value)
    return result


def _effective_strength(kind: MeasureKind, x):
    """Strength actually used by ``kind`` plus the flags it implies."""
    if not kind.is_weak:
        return PROJECTIVE, []
    if x is None:
        raise ValueError(f"{kind.value} needs a measurement strength x")
    x = strength(x)
    return x, (["projective_limit"] if x == PROJECTIVE else [])


# ---- conditional entropy ---------------------------------------------------


def conditional_entropy_weak(rho, n, x) -> float:
    """p(x) S(rho_A|P(x)) + p(-x) S(rho_A|P(-x)) for a single basis n."""
    return float(_conditional_entropy_batch(getattr(rho, "matrix", rho), np.asarray(n, float), x))


def _conditional_entropy_batch(rho, ns, x):
    probs, conds = conditional_states_batch(rho, ns, x)
    eigs = np.linalg.eigvalsh(conds)
    return np.sum(probs * spectrum_entropy(eigs), axis=-1)


def _dephased_entropy_batch(rho, ns, x):
    pair = weak_pair(ns, x)
    out = 0
    for p_op in (pair.p_plus, pair.p_minus):
        k = lift_B(p_op)
        out = out + k @ rho @ np.swapaxes(k.conj(), -1, -2)
    return spectrum_entropy(np.linalg.eigvalsh(out))


# ---- closed forms ----------------------------------------------------------


def werner_value(kind: MeasureKind, z: float, x) -> float:
    """Werner closed forms as functions of z (and x for the weak kinds)."""
    t, s = tanh_sech(x) if kind.is_weak else (1.0, 0.0)
    # sum of lambda log2 lambda over the Werner spectrum, i.e. -S(rho_AB)
    neg_entropy = 3 * xlog2x((1 - z) / 4) + xlog2x((1 + 3 * z) / 4)
    if kind in (MeasureKind.DISCORD, MeasureKind.DEFICIT):
        return float(
            (1 - z) / 4 * _log2_or0(1 - z) - (1 + z) / 2 * _log2_or0(1 + z) + (1 + 3 * z) / 4 * _log2_or0(1 + 3 * z)
        )
    if kind is MeasureKind.SUPER_DISCORD:
        return float(neg_entropy + 1 - (xlog2x((1 - z * t) / 2) + xlog2x((1 + z * t) / 2)))
    # weak one-way deficit: spectrum of the weakly dephased state
    lam1 = (1 + z) / 4 + z * s / 2
    lam2 = (1 + z) / 4 - z * s / 2
    return float(xlog2x((1 + 3 * z) / 4) + xlog2x((1 - z) / 4) - xlog2x(lam1) - xlog2x(lam2))


def _log2_or0(v):
    return math.log2(v) if v > 0 else 0.0


def _log_pairs(q):
    """sum over the last axis of (q/4) log2 q; zero-safe."""
    return np.sum(xlog2x(q), axis=-1) / 4


def bell_value(kind: MeasureKind, c, x=PROJECTIVE):
    """Vectorized Bell-diagonal closed forms; c has shape (..., 3)."""
    c = np.asarray(c, dtype=float)
    t, s = tanh_sech(x) if kind.is_weak else (1.0, 0.0)
    cabs = np.abs(c)
    cmax = cabs.max(axis=-1)
    if kind in (MeasureKind.DISCORD, MeasureKind.SUPER_DISCORD):
        q = 4 * bell_eigenvalues(c)
        a = cmax * t
        # sum (q/4) log q  -  (1-a)/2 log(1-a)  -  (1+a)/2 log(1+a)
        return _log_pairs(q) - (xlog2x(1 - a) + xlog2x(1 + a)) / 2
    # deficits: dephasing along the max-|c_i| axis keeps that coefficient and
    # multiplies the other two by sech x (zero in the projective limit)
    k = np.argmax(cabs, axis=-1)
    keep = np.arange(3) == k[..., None]
    c_after = np.where(keep, c, s * c)
    return spectrum_entropy(bell_eigenvalues(c_after)) - spectrum_entropy(bell_eigenvalues(c))


def werner_measure(kind, z, x=None) -> MeasureResult:
    kind = MeasureKind.parse(kind)
    params = z if isinstance(z, WernerParams) else WernerParams(float(z))
    params.check()
    xe, flags = _effective_strength(kind, x)
    res = MeasureResult(kind, 0.0, "closed_form", xe, flags=flags)
    return _finish(werner_value(kind, params.z, xe), res)


def bell_measure(kind, c, x=None) -> MeasureResult:
    kind = MeasureKind.parse(kind)
    params = c if isinstance(c, BellDiagonalParams) else BellDiagonalParams(*map(float, c))
    params.check()
    xe, flags = _effective_strength(kind, x)
    res = MeasureResult(kind, 0.0, "closed_form", xe, flags=flags)
    return _finish(float(bell_value(kind, params.c, xe)), res)


def closed_form_measure(kind, state: TwoQubitState, x=None) -> MeasureResult:
    """Dispatch to the family closed form; raw states are rejected."""
    if state.family == "werner":
        return werner_measure(kind, state.params[0], x)
    if state.family == "bell_diagonal":
        return bell_measure(kind, state.params, x)
    raise ValueError("closed forms exist only for the werner and bell_diagonal families; use the numeric method")


# ---- numeric oracle --------------------------------------------------------


def _objective(kind: MeasureKind, rho, x):
    if kind.is_deficit:
        offset = -von_neumann_entropy(rho)

        def f(ns):
            return _dephased_entropy_batch(rho, ns, x) + offset
    else:
        offset = von_neumann_entropy(partial_trace_A(rho)) - von_neumann_entropy(rho)

        def f(ns):
            return _conditional_entropy_batch(rho, ns, x) + offset
    return f


def basis_grid(n_theta: int, n_phi: int):
    """Hemisphere grid, theta-major: theta in [0, pi/2] inclusive, phi in [0, 2pi)."""
    theta = np.linspace(0.0, math.pi / 2, n_theta)
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return tt, pp


def measure_numeric(kind, rho, x=None, opts: OptimizerOptions | None = None) -> MeasureResult:
    """Minimize the measure's objective over measurement directions on qubit B."""
    kind = MeasureKind.parse(kind)
    opts = opts or OptimizerOptions()
    matrix = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    xe, flags = _effective_strength(kind, x)
    f = _objective(kind, matrix, xe)

    tt, pp = basis_grid(*opts.coarse_grid)
    vals = f(basis_from_angles(tt, pp))
    # values within TIE_TOL of the minimum tie; the first in theta-major order is the
    # lexicographically smallest (theta, phi)
    i = int(np.argmax(vals.ravel() <= vals.min() + TIE_TOL))
    th0, ph0 = float(tt.flat[i]), float(pp.flat[i])
    grid_best = float(vals.flat[i])

    step_t = (math.pi / 2) / (opts.coarse_grid[0] - 1)
    step_p = 2 * math.pi / opts.coarse_grid[1]
    simplex = np.array([[th0, ph0], [th0 + step_t, ph0], [th0, ph0 + step_p]])
    res = minimize(
        lambda v: float(f(basis_from_angles(v[0], v[1]))),
        np.array([th0, ph0]),
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-10,
            "fatol": opts.refine_tolerance,
            "maxiter": opts.max_refine_iters,
        },
    )
    # a refinement has to beat the grid by more than roundoff, so exact ties keep the grid point
    if res.fun < grid_best - TIE_TOL:
        value, theta, phi = float(res.fun), float(res.x[0]), float(res.x[1])
    else:
        value, theta, phi = grid_best, th0, ph0
    fs = res.final_simplex[1]
    spread = float(np.max(fs) - np.min(fs))
    converged = bool(res.success)
    if not converged:
        flags = flags + ["not_converged"]
    n = basis_from_angles(theta, phi)
    out = MeasureResult(
        kind,
        0.0,
        "numeric",
        xe,
        optimal_basis=tuple(float(v) for v in n),
        iterations=int(res.nit),
        final_tolerance=spread,
        converged=converged,
        flags=flags,
    )
    return _finish(value, out)



def measure_at_basis(kind, rho, n, x=None) -> MeasureResult:
    """The kind's objective at one fixed basis n, without minimizing."""
    kind = MeasureKind.parse(kind)
    matrix = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    xe, flags = _effective_strength(kind, x)
    n = np.asarray(n, dtype=float)
    value = float(_objective(kind, matrix, xe)(n))
    res = MeasureResult(kind, 0.0, "fixed_basis", xe, optimal_basis=tuple(map(float, n)), flags=flags)
    return _finish(value, res)
