"""Sector basis, collective spin operators, H0 and the kicked Floquet operator.

All quantum numbers are stored doubled (``twice_m``, ``twice_j``) so that
half-integer spins stay exact integers.  Energies are in MHz, times in
microseconds, hbar = 1, and the drive period is ``T = 2*pi/omega``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
import scipy.linalg

__all__ = [
    "NumericalError",
    "Sigma",
    "SectorBasis",
    "ModelParams",
    "build_sector",
    "collective_ops",
    "build_h0",
    "hermitian_expm",
    "build_pulse",
    "build_floquet",
    "check_hermitian",
    "check_unitary",
    "unitarity_error",
]

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10


class NumericalError(RuntimeError):
    """A numerical contract (unitarity, reconstruction, ...) was violated."""


class Sigma(IntEnum):
    """Central-spin state; the integer value is the sign of ``S0_z``."""

    UP = 1
    DOWN = -1

    @property
    def flipped(self) -> "Sigma":
        return Sigma(-self.value)

    @property
    def letter(self) -> str:
        return "u" if self is Sigma.UP else "d"

    @classmethod
    def parse(cls, text) -> "Sigma":
        if isinstance(text, Sigma):
            return text
        key = str(text).strip().lower()
        if key in ("up", "u", "+", "1", "+1"):
            return cls.UP
        if key in ("down", "d", "dn", "-", "-1"):
            return cls.DOWN
        raise ValueError(f"unknown central-spin label {text!r}; use 'up' or 'down'")


@dataclass(frozen=True)
class SectorBasis:
    """The ``2(2j+1)``-dimensional block with fixed total satellite spin ``j``.

    Flat order: decreasing ``twice_m``; for equal ``twice_m`` the ``up``
    central spin comes first.  Index ``2*k`` is ``(twice_j - 2k, up)`` and
    ``2*k + 1`` is ``(twice_j - 2k, down)``.
    """

    n_satellites: int
    twice_j: int

    def __post_init__(self):
        if self.n_satellites < 1:
            raise ValueError("n_satellites must be a positive integer")
        if self.twice_j < 0 or self.twice_j > self.n_satellites:
            raise ValueError(
                f"twice_j={self.twice_j} must lie in [0, N={self.n_satellites}]"
            )
        if (self.n_satellites - self.twice_j) % 2:
            raise ValueError(
                f"twice_j={self.twice_j} and N={self.n_satellites} must have equal parity"
            )

    @property
    def dim(self) -> int:
        return 2 * (self.twice_j + 1)

    @property
    def j(self) -> float:
        return self.twice_j / 2

    @property
    def multiplet_dim(self) -> int:
        return self.twice_j + 1

    def index(self, twice_m: int, sigma) -> int:
        sigma = Sigma.parse(sigma)
        if abs(twice_m) > self.twice_j or (self.twice_j - twice_m) % 2:
            raise ValueError(f"twice_m={twice_m} is not in the j={self.j} multiplet")
        k = (self.twice_j - twice_m) // 2
        return 2 * k + (0 if sigma is Sigma.UP else 1)

    def label(self, index: int) -> tuple[int, Sigma]:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        k, s = divmod(index, 2)
        return self.twice_j - 2 * k, (Sigma.UP if s == 0 else Sigma.DOWN)

    def labels(self) -> list[tuple[int, Sigma]]:
        return [self.label(i) for i in range(self.dim)]

    def label_names(self) -> list[str]:
        """Column names ``m<twice_m>_<u|d>`` in flat order."""
        return [f"m{tm}_{s.letter}" for tm, s in self.labels()]

    @property
    def twice_m_values(self) -> np.ndarray:
        """``twice_m`` of every flat index."""
        return np.repeat(np.arange(self.twice_j, -self.twice_j - 1, -2), 2)

    @property
    def sigma_values(self) -> np.ndarray:
        return np.tile([1, -1], self.multiplet_dim)

    def basis_state(self, twice_m: int, sigma) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(twice_m, sigma)] = 1.0
        return psi


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the kicked central-spin model (MHz, radians)."""

    a_xy: float = 0.0
    a_z: float = 0.0
    b_z: float = 0.0
    omega: float = 1.0
    theta_e: float = 0.0
    theta_n: float = 0.0
    b_nz: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        for name in ("a_xy", "a_z", "b_z", "omega", "theta_e", "theta_n", "b_nz"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def interaction(self) -> str:
        if self.a_xy == 0:
            return "ising"
        if self.a_z == 0:
            return "xx"
        if self.a_xy == self.a_z:
            return "heisenberg"
        return "xxz"

    @classmethod
    def with_theta(cls, theta: float, **kwargs) -> "ModelParams":
        return cls(theta_e=theta, theta_n=theta, **kwargs)

    def as_dict(self) -> dict:
        return {
            "a_xy": self.a_xy,
            "a_z": self.a_z,
            "b_z": self.b_z,
            "b_nz": self.b_nz,
            "omega": self.omega,
            "theta_e": self.theta_e,
            "theta_n": self.theta_n,
        }


def build_sector(n_satellites: int, twice_j: int | None = None) -> SectorBasis:
    """Sector basis for ``N`` satellites; defaults to the largest sector ``j = N/2``."""
    if twice_j is None:
        twice_j = n_satellites
    return SectorBasis(int(n_satellites), int(twice_j))


def _ladder_up(twice_j: int) -> np.ndarray:
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)), multiplet ordered by decreasing m
    j = twice_j / 2
    m = j - np.arange(twice_j + 1)
    coeff = np.sqrt(np.clip(j * (j + 1) - m[1:] * (m[1:] + 1), 0.0, None))
    return np.diag(coeff, k=1).astype(complex)


def collective_ops(basis: SectorBasis) -> dict[str, np.ndarray]:
    """Collective satellite and central-spin operators on the sector basis.

    Returns a dict with keys ``It_z, It_plus, It_minus, It_x, It_y, S0_x,
    S0_y, S0_z, S0_plus, S0_minus``.  The satellite factor is the first
    tensor slot and the central spin the second, so that the flat order of
    :class:`SectorBasis` is ``kron(multiplet, central)``.
    """
    d = basis.multiplet_dim
    ident_s = np.eye(d)
    ident_c = np.eye(2)
    jz = np.diag(basis.j - np.arange(d)).astype(complex)
    jp = _ladder_up(basis.twice_j)
    jm = jp.conj().T
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.copy()
    sz = np.diag([0.5, -0.5]).astype(complex)
    ops = {
        "It_z": np.kron(jz, ident_c),
        "It_plus": np.kron(jp, ident_c),
        "It_minus": np.kron(jm, ident_c),
        "S0_z": np.kron(ident_s, sz),
        "S0_plus": np.kron(ident_s, sp),
        "S0_minus": np.kron(ident_s, sm),
    }
    ops["It_x"] = (ops["It_plus"] + ops["It_minus"]) / 2
    ops["It_y"] = (ops["It_plus"] - ops["It_minus"]) / 2j
    ops["S0_x"] = (ops["S0_plus"] + ops["S0_minus"]) / 2
    ops["S0_y"] = (ops["S0_plus"] - ops["S0_minus"]) / 2j
    return ops


def check_hermitian(h: np.ndarray, what: str = "matrix") -> np.ndarray:
    scale = max(float(np.max(np.abs(h))), 1.0) if h.size else 1.0
    dev = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if dev > HERMITIAN_RTOL * scale:
        raise NumericalError(f"{what} is not Hermitian (deviation {dev:.3e})")
    return h


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_unitary(u: np.ndarray, what: str = "matrix", tol: float = UNITARY_TOL) -> np.ndarray:
    err = unitarity_error(u)
    if not err <= tol:
        raise NumericalError(f"{what} is not unitary (deviation {err:.3e} > {tol:.1e})")
    return u


def build_h0(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """H0 = A_xy (I+ S- + I- S+) + A_z Iz Sz + B_z Sz + B^n_z Iz on one sector."""
    ops = collective_ops(basis)
    h = (
        params.a_xy * (ops["It_plus"] @ ops["S0_minus"] + ops["It_minus"] @ ops["S0_plus"])
        + params.a_z * ops["It_z"] @ ops["S0_z"]
        + params.b_z * ops["S0_z"]
        + params.b_nz * ops["It_z"]
    )
    return check_hermitian(h, "H0")


def hermitian_expm(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` via the eigendecomposition of a Hermitian ``h``."""
    h = check_hermitian(np.asarray(h, dtype=complex), "generator")
    try:
        w, v = scipy.linalg.eigh(h)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return check_unitary(u, "exp(-iHt)")


def build_pulse(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """Kick ``exp(-i[(pi - theta_e) S0_x + (pi - theta_n) It_x])``.

    The two terms act on different tensor slots and commute, so the kick is
    the Kronecker product of the two single-slot rotations.
    """
    jp = _ladder_up(basis.twice_j)
    jx = (jp + jp.conj().T) / 2
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    rot_s = hermitian_expm(jx, np.pi - params.theta_n)
    rot_c = hermitian_expm(sx, np.pi - params.theta_e)
    return check_unitary(np.kron(rot_s, rot_c), "pulse")


def build_floquet(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """One-period Floquet operator: free evolution for ``T`` followed by the kick."""
    u = build_pulse(params, basis) @ hermitian_expm(build_h0(params, basis), params.period)
    return check_unitary(u, "Floquet operator")
