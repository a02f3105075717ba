"""Phase-flip decoherence acting on both qubits, and the measures of the decohered states."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlations import MeasureKind, MeasureResult, _effective_strength, _finish
from .linalg import I2, PAULIS, SZ
from .measurements import tanh_sech
from .states import BellDiagonalParams, TwoQubitState, WernerParams, bell_diagonal

COMPLETENESS_TOL = 1e-12


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseFlipParams:
    p: float
    gamma: float | None = None
    t: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"flip probability p={self.p} outside [0, 1]")
        if (self.gamma is None) != (self.t is None):
            raise ValueError("gamma and t must be given together")
        if self.gamma is not None:
            if self.gamma < 0 or self.t < 0:
                raise ValueError("gamma and t must be non-negative")
            expected = 1.0 - math.exp(-self.gamma * self.t)
            if abs(expected - self.p) > 1e-12:
                raise ValueError(f"p={self.p} inconsistent with 1 - exp(-gamma t) = {expected}")

    @classmethod
    def from_rate(cls, gamma: float, t: float) -> "PhaseFlipParams":
        if gamma < 0 or t < 0:
            raise ValueError("gamma and t must be non-negative")
        return cls(1.0 - math.exp(-gamma * t), gamma, t)


def _as_p(p) -> float:
    return p.p if isinstance(p, PhaseFlipParams) else PhaseFlipParams(float(p)).p


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(4))))


def phase_flip_channel(p) -> KrausChannel:
    """Products Gamma_i^(A) Gamma_j^(B) of the single-qubit phase-flip Kraus operators.

    Identically zero products are dropped, so p = 0 yields the single operator I.
    """
    p = _as_p(p)
    single = (math.sqrt(1 - p / 2) * I2, math.sqrt(p / 2) * SZ)
    ops = tuple(np.kron(a, b) for a in single for b in single)
    ops = tuple(k for k in ops if np.any(k != 0))
    ch = KrausChannel(ops)
    err = ch.completeness_error()
    if err > COMPLETENESS_TOL:
        raise RuntimeError(f"Kraus completeness violated by {err:.3e}")
    return ch


def apply_channel(rho, ch: KrausChannel) -> TwoQubitState:
    """sum_k K rho K^dagger. Bell-diagonal/Werner inputs come back tagged as Bell-diagonal."""
    state = rho if isinstance(rho, TwoQubitState) else TwoQubitState(rho)
    m = sum(k @ state.matrix @ k.conj().T for k in ch.operators)
    if state.family in ("bell_diagonal", "werner"):
        # c_i = tr(rho sigma_i x sigma_i)
        c = [float(np.trace(m @ np.kron(s, s)).real) for s in PAULIS]
        return TwoQubitState(m, "bell_diagonal", tuple(c))
    return TwoQubitState(m)


def evolved_bell_params(c, p) -> BellDiagonalParams:
    """(c1, c2, c3) -> ((1-p)^2 c1, (1-p)^2 c2, c3)."""
    params = c if isinstance(c, BellDiagonalParams) else BellDiagonalParams(*map(float, c))
    f = (1 - _as_p(p)) ** 2
    return BellDiagonalParams(f * params.c1, f * params.c2, params.c3)


def evolve_bell(c, p) -> TwoQubitState:
    return bell_diagonal(evolved_bell_params(c, p))


def _xl(v):
    """v log2 v, zero at v <= 0."""
    return v * math.log2(v) if v > 0 else 0.0


def _l(v):
    return math.log2(v) if v > 0 else 0.0


def werner_channel_value(kind: MeasureKind, z: float, x, p: float) -> float:
    t, s = tanh_sech(x) if kind.is_weak else (1.0, 0.0)
    lo = (1 - z + 4 * p * z - 2 * p * p * z) / 4
    hi = (1 + 3 * z - 4 * p * z + 2 * p * p * z) / 4
    head = _xl(lo) + _xl(hi)
    if kind is MeasureKind.SUPER_DISCORD:
        return (
            head
            + (1 - z) / 2 * _l((1 - z) / 4)
            + 1
            - _xl((1 + z * t) / 2)
            - _xl((1 - z * t) / 2)
        )
    if kind in (MeasureKind.DISCORD, MeasureKind.DEFICIT):
        return head + (1 - z) / 2 * _l((1 - z) / 4) + 1 - _xl((1 + z) / 2) - _xl((1 - z) / 2)
    d = (1 - p) ** 2 * z * s / 2
    return head - _xl((1 + z) / 4 + d) - _xl((1 + z) / 4 - d)


def channel_measure_werner(kind, z, x=None, p=0.0) -> MeasureResult:
    """Werner state after phase flip on both qubits; DEFICIT reports the discord expression."""
    kind = MeasureKind.parse(kind)
    params = z if isinstance(z, WernerParams) else WernerParams(float(z))
    params.check()
    pp = _as_p(p)
    xe, flags = _effective_strength(kind, x)
    res = MeasureResult(kind, 0.0, "closed_form", xe, flags=flags)
    return _finish(werner_channel_value(kind, params.z, xe, pp), res)


def bell_channel_value(kind: MeasureKind, c, x, p: float) -> float:
    c1, c2, c3 = c
    f = (1 - p) ** 2
    a1, a2 = f * c1, f * c2
    terms = (1 - a1 - a2 - c3, 1 - a1 + a2 + c3, 1 + a1 - a2 + c3, 1 + a1 + a2 - c3)
    head = sum(_xl(q) for q in terms) / 4
    t = tanh_sech(x)[0] if kind is MeasureKind.SUPER_DISCORD else 1.0
    return head - _xl(1 - c3 * t) / 2 - _xl(1 + c3 * t) / 2


def channel_measure_bell(kind, c, x=None, p=0.0) -> MeasureResult:
    """Super-quantum discord / discord of a decohered Bell-diagonal state, for |c1| < |c2| < |c3|."""
    kind = MeasureKind.parse(kind)
    if kind not in (MeasureKind.DISCORD, MeasureKind.SUPER_DISCORD):
        raise ValueError(f"{kind.value} has no Bell-diagonal channel closed form; use bell_measure on evolve_bell(c, p)")
    params = c if isinstance(c, BellDiagonalParams) else BellDiagonalParams(*map(float, c))
    params.check()
    a = np.abs(params.c)
    if not (a[0] < a[1] < a[2]):
        raise PreconditionError(
            f"closed form requires |c1| < |c2| < |c3|, got {tuple(float(v) for v in params.c)}; "
            "use the numeric method on the evolved state instead"
        )
    pp = _as_p(p)
    xe, flags = _effective_strength(kind, x)
    res = MeasureResult(kind, 0.0, "closed_form", xe, flags=flags)
    return _finish(bell_channel_value(kind, params.c, xe, pp), res)
