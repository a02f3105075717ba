"""Two-qubit density matrices: Bell-diagonal and Werner families, raw states, JSON descriptors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import I2, PAULIS, hermiticity_deviation, hermitian_eigenvalues, tensor

PHYSICAL_TOL = 1e-12
TRACE_TOL = 1e-12
MIN_EIG_TOL = 1e-10

# rows give the signs (s1, s2, s3) in lambda = (1 + s1 c1 + s2 c2 + s3 c3) / 4
_BELL_SIGNS = np.array([[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)


class UnphysicalStateError(ValueError):
    pass


def bell_eigenvalues(c):
    """(lambda5, lambda6, lambda7, lambda8) for coefficient triples; c has shape (..., 3)."""
    c = np.asarray(c, dtype=float)
    return (1.0 + c @ _BELL_SIGNS.T) / 4.0


@dataclass(frozen=True)
class BellDiagonalParams:
    c1: float
    c2: float
    c3: float

    @property
    def c(self):
        return np.array([self.c1, self.c2, self.c3], dtype=float)

    def eigenvalues(self):
        return bell_eigenvalues(self.c)

    def check(self):
        for name, v in zip(("c1", "c2", "c3"), self.c):
            if not np.isfinite(v) or abs(v) > 1 + PHYSICAL_TOL:
                raise UnphysicalStateError(f"{name}={v} outside [-1, 1]")
        lam = self.eigenvalues()
        i = int(np.argmin(lam))
        if lam[i] < -PHYSICAL_TOL:
            raise UnphysicalStateError(
                f"unphysical Bell-diagonal coefficients {tuple(float(v) for v in self.c)}: "
                f"lambda{5 + i} = {lam[i]:.6g} < 0"
            )
        return self

    def is_physical(self) -> bool:
        try:
            self.check()
        except UnphysicalStateError:
            return False
        return True


@dataclass(frozen=True)
class WernerParams:
    z: float

    def check(self):
        z = self.z
        if not np.isfinite(z) or z < -1 / 3 - PHYSICAL_TOL or z > 1 + PHYSICAL_TOL:
            raise UnphysicalStateError(f"Werner parameter z={z} outside [-1/3, 1]")
        return self

    def eigenvalues(self):
        z = self.z
        return np.array([(1 + 3 * z) / 4, (1 - z) / 4, (1 - z) / 4, (1 - z) / 4])


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """A 4x4 density matrix plus the family it was built from (if any)."""

    matrix: np.ndarray
    family: str = "raw"
    params: tuple = field(default=())

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"two-qubit state needs a 4x4 matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def bell_params(self) -> BellDiagonalParams:
        if self.family == "bell_diagonal":
            return BellDiagonalParams(*self.params)
        if self.family == "werner":
            z = self.params[0]
            return BellDiagonalParams(-z, -z, -z)
        raise ValueError(f"state family {self.family!r} is not Bell-diagonal")


def bell_diagonal_matrix(c):
    """(I + sum_i c_i sigma_i x sigma_i) / 4 without any physicality check."""
    c = np.asarray(c, dtype=float)
    m = tensor(I2, I2).copy()
    for ci, s in zip(c, PAULIS):
        m += ci * tensor(s, s)
    return m / 4


def bell_diagonal(*args) -> TwoQubitState:
    """Bell-diagonal state from BellDiagonalParams or (c1, c2, c3)."""
    params = args[0] if len(args) == 1 and isinstance(args[0], BellDiagonalParams) else BellDiagonalParams(
        *map(float, np.ravel(args))
    )
    params.check()
    return TwoQubitState(bell_diagonal_matrix(params.c), "bell_diagonal", tuple(map(float, params.c)))


def werner(z) -> TwoQubitState:
    """z |Psi-><Psi-| + (1 - z) I / 4, built as the Bell-diagonal state c = (-z, -z, -z)."""
    params = z if isinstance(z, WernerParams) else WernerParams(float(z))
    params.check()
    zz = params.z
    return TwoQubitState(bell_diagonal_matrix([-zz, -zz, -zz]), "werner", (zz,))


def product_state(rho_a, rho_b) -> TwoQubitState:
    return TwoQubitState(tensor(rho_a, rho_b))


@dataclass(frozen=True)
class Diagnostics:
    hermiticity: float
    trace_deviation: float
    min_eigenvalue: float
    passed: bool


def validate(state) -> Diagnostics:
    m = state.matrix if isinstance(state, TwoQubitState) else np.asarray(state, dtype=complex)
    herm = hermiticity_deviation(m)
    tr_dev = float(abs(np.trace(m) - 1))
    h = 0.5 * (m + m.conj().T)
    min_eig = float(hermitian_eigenvalues(h)[-1])
    ok = herm <= 1e-12 and tr_dev <= TRACE_TOL and min_eig >= -MIN_EIG_TOL
    return Diagnostics(herm, tr_dev, min_eig, ok)


def require_valid(state: TwoQubitState) -> TwoQubitState:
    d = validate(state)
    if not d.passed:
        raise UnphysicalStateError(
            f"invalid density matrix: hermiticity {d.hermiticity:.3e}, "
            f"trace deviation {d.trace_deviation:.3e}, min eigenvalue {d.min_eigenvalue:.3e}"
        )
    return state


def random_bell_params(rng, n: int | None = None):
    """Uniform points of the physical tetrahedron by rejection from [-1, 1]^3."""
    out = []
    want = 1 if n is None else n
    while len(out) < want:
        c = rng.uniform(-1.0, 1.0, size=3)
        if bell_eigenvalues(c).min() >= 0:
            out.append(BellDiagonalParams(*map(float, c)))
    return out[0] if n is None else out


def random_density_matrix(rng, rank: int = 4) -> TwoQubitState:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return TwoQubitState(m / np.trace(m).real)


# ---- JSON descriptors -------------------------------------------------------


def from_descriptor(desc: dict) -> TwoQubitState:
    family = desc.get("family")
    if family == "bell_diagonal":
        c = desc["c"]
        if len(c) != 3:
            raise ValueError("bell_diagonal descriptor needs three coefficients in 'c'")
        return bell_diagonal(*c)
    if family == "werner":
        return werner(desc["z"])
    if family == "raw":
        entries = desc["matrix"]
        if len(entries) != 16:
            raise ValueError("raw descriptor needs 16 [re, im] entries in row-major order")
        m = np.array([complex(re, im) for re, im in entries]).reshape(4, 4)
        return require_valid(TwoQubitState(m))
    raise ValueError(f"unknown state family {family!r}")


def to_descriptor(state: TwoQubitState) -> dict:
    if state.family == "bell_diagonal":
        return {"family": "bell_diagonal", "c": list(state.params)}
    if state.family == "werner":
        return {"family": "werner", "z": state.params[0]}
    return {
        "family": "raw",
        "matrix": [[float(v.real), float(v.imag)] for v in state.matrix.ravel()],
    }
