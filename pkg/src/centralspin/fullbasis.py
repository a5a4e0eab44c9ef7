"""Unsymmetrized product-basis simulator with per-spin couplings.

Basis states are ``kron(satellite_1, ..., satellite_N, central)`` with the
single-spin order ``(up, down)``; in the integer index the central spin is
bit 0 and satellite ``p`` (0-based) is bit ``N - p``, a set bit meaning
``down``.  The flip-flop term uses the same normalization as the collective
engine, ``A_xy[p] (I_p^+ S^- + I_p^- S^+)``, so the two engines agree on
every symmetry sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np
import scipy.linalg

from .dynamics import order_parameter, run_tasks, evolve
from .operators import (
    ModelParams,
    SectorBasis,
    check_hermitian,
    check_unitary,
    hermitian_expm,
)

__all__ = [
    "MAX_SATELLITES",
    "FullBasisModel",
    "DisorderSpec",
    "build_full_hamiltonian",
    "full_floquet",
    "full_spin_ops",
    "satellite_iz_diagonal",
    "sector_embedding",
    "product_state",
    "sample_couplings",
    "disorder_order_parameter",
    "rng_identity",
]

MAX_SATELLITES = 14


@dataclass(frozen=True)
class FullBasisModel:
    n_satellites: int
    a_xy: tuple
    a_z: tuple
    b_z: float = 0.0
    omega: float = 1.0
    theta_e: float = 0.0
    theta_n: float = 0.0
    b_nz: float = 0.0

    def __post_init__(self):
        if not 1 <= self.n_satellites <= MAX_SATELLITES:
            raise ValueError(
                f"full-basis engine supports 1 <= N <= {MAX_SATELLITES}, got N={self.n_satellites}"
            )
        object.__setattr__(self, "a_xy", tuple(float(x) for x in np.broadcast_to(self.a_xy, self.n_satellites)))
        object.__setattr__(self, "a_z", tuple(float(x) for x in np.broadcast_to(self.a_z, self.n_satellites)))
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @classmethod
    def homogeneous(cls, params: ModelParams, n_satellites: int) -> "FullBasisModel":
        return cls(
            n_satellites, (params.a_xy,) * n_satellites, (params.a_z,) * n_satellites,
            params.b_z, params.omega, params.theta_e, params.theta_n, params.b_nz,
        )

    @property
    def dim(self) -> int:
        return 2 ** (self.n_satellites + 1)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.a_xy)) == 1 and len(set(self.a_z)) == 1


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian flip-flop couplings ``a_xy[p] ~ Normal(mean, std)``."""

    mean: float
    std: float
    seed: int = 0
    n_realizations: int = 1

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("disorder std must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")


def _spin_down_bits(n_satellites: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2 ** (n_satellites + 1))
    central = idx & 1
    sats = np.stack([(idx >> (n_satellites - p)) & 1 for p in range(n_satellites)])
    return sats, central


def satellite_iz_diagonal(n_satellites: int) -> np.ndarray:
    """Diagonal of ``I_t^z`` in the product basis."""
    sats, _ = _spin_down_bits(n_satellites)
    return (0.5 - sats).sum(axis=0)


def build_full_hamiltonian(model: FullBasisModel) -> np.ndarray:
    n = model.n_satellites
    dim = model.dim
    sats, central = _spin_down_bits(n)
    sz_c = 0.5 - central
    iz = 0.5 - sats
    a_z = np.asarray(model.a_z)
    diag = (a_z[:, None] * iz).sum(axis=0) * sz_c + model.b_z * sz_c + model.b_nz * iz.sum(axis=0)
    h = np.diag(diag).astype(complex)
    idx = np.arange(dim)
    for p, a in enumerate(model.a_xy):
        if a == 0:
            continue
        # I_p^- S^+ acts on (sat p up, central down) -> (sat p down, central up)
        src = idx[(sats[p] == 0) & (central == 1)]
        dst = src ^ (1 << (n - p)) ^ 1
        h[dst, src] += a
        h[src, dst] += a
    return check_hermitian(h, "full-basis H0")


def _single(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    mats = [np.eye(2)] * n_sites
    mats[site] = op
    return reduce(np.kron, mats)


def full_spin_ops(n_satellites: int) -> dict[str, np.ndarray]:
    """Collective satellite operators ``It_x, It_y, It_z`` and ``It_sq`` in the product basis."""
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, -0.5j], [0.5j, 0]])
    sz = np.diag([0.5, -0.5]).astype(complex)
    n_sites = n_satellites + 1
    ops = {}
    for key, s in (("It_x", sx), ("It_y", sy), ("It_z", sz)):
        ops[key] = sum(_single(s, p, n_sites) for p in range(n_satellites))
    ops["It_sq"] = ops["It_x"] @ ops["It_x"] + ops["It_y"] @ ops["It_y"] + ops["It_z"] @ ops["It_z"]
    return ops


def full_floquet(model: FullBasisModel) -> np.ndarray:
    """Free evolution for one period followed by an x-kick on every spin."""
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    rot_n = hermitian_expm(sx, np.pi - model.theta_n)
    rot_e = hermitian_expm(sx, np.pi - model.theta_e)
    pulse = reduce(np.kron, [rot_n] * model.n_satellites + [rot_e])
    u = pulse @ hermitian_expm(build_full_hamiltonian(model), model.period)
    return check_unitary(u, "full-basis Floquet operator")


def sector_embedding(n_satellites: int, twice_j: int | None = None, copy: int = 0) -> np.ndarray:
    """Isometry from a collective sector into the product basis.

    Column ``k`` is the product-basis image of flat index ``k`` of
    ``SectorBasis(n_satellites, twice_j)``.  For ``twice_j < N`` the
    multiplet is degenerate; ``copy`` selects one of the orthonormal
    highest-weight vectors.
    """
    basis = SectorBasis(n_satellites, n_satellites if twice_j is None else twice_j)
    n = n_satellites
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, -0.5j], [0.5j, 0]])
    sz = np.diag([0.5, -0.5]).astype(complex)
    ix = sum(_single(sx, p, n) for p in range(n))
    iy = sum(_single(sy, p, n) for p in range(n))
    iz = np.real(np.diag(sum(_single(sz, p, n) for p in range(n))))
    i_plus = ix + 1j * iy
    i_minus = ix - 1j * iy

    j = basis.j
    top = np.flatnonzero(np.isclose(iz, j))
    highest = scipy.linalg.null_space(i_plus[:, top])
    if copy >= highest.shape[1]:
        raise ValueError(f"sector j={j} has only {highest.shape[1]} copies")
    vec = np.zeros(2**n, dtype=complex)
    vec[top] = highest[:, copy]
    lead = np.argmax(np.abs(vec))
    vec *= abs(vec[lead]) / vec[lead]

    multiplet = [vec]
    m = j
    for _ in range(basis.twice_j):
        alpha = np.sqrt(j * (j + 1) - m * (m - 1))
        multiplet.append(i_minus @ multiplet[-1] / alpha)
        m -= 1
    e = np.zeros((2 ** (n + 1), basis.dim), dtype=complex)
    up, down = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    for k, sat in enumerate(multiplet):
        e[:, 2 * k] = np.kron(sat, up)
        e[:, 2 * k + 1] = np.kron(sat, down)
    return e


def product_state(satellites: str, central: str) -> np.ndarray:
    """Product state from ``u``/``d`` strings, e.g. ``product_state("uuuuu", "d")``."""
    chars = satellites.strip().lower() + central.strip().lower()
    if not chars or any(c not in "ud" for c in chars) or len(central.strip()) != 1:
        raise ValueError(f"bad product state {satellites!r},{central!r}; use u/d characters")
    index = int("".join("1" if c == "d" else "0" for c in chars), 2)
    psi = np.zeros(2 ** len(chars), dtype=complex)
    psi[index] = 1.0
    return psi


def rng_identity() -> str:
    return f"numpy.random.PCG64 (SeedSequence spawn keys) numpy {np.__version__}"


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for realization ``index``; depends only on ``(seed, index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_couplings(spec: DisorderSpec, n_satellites: int) -> list[np.ndarray]:
    """One length-``N`` coupling vector per realization."""
    return [
        spec.mean + spec.std * realization_rng(spec.seed, r).standard_normal(n_satellites)
        for r in range(spec.n_realizations)
    ]


def _disorder_task(task):
    model, psi0, n_cycles = task
    u = full_floquet(model)
    return order_parameter(
        u, psi0, n_cycles,
        iz_diag=satellite_iz_diagonal(model.n_satellites), n_satellites=model.n_satellites,
    )


def disorder_order_parameter(
    spec: DisorderSpec,
    base: FullBasisModel,
    psi0: np.ndarray | None = None,
    n_cycles: int = 50_000,
    workers: int | None = 1,
) -> list[float]:
    """Order parameter of each disorder realization of the flip-flop couplings.

    The default initial state is all satellites up with the central spin
    down.
    """
    n = base.n_satellites
    if psi0 is None:
        psi0 = product_state("u" * n, "d")
    tasks = [
        (replace(base, a_xy=tuple(c)), psi0, n_cycles)
        for c in sample_couplings(spec, n)
    ]
    return run_tasks(_disorder_task, tasks, workers)


def disorder_series(spec, base, psi0, n_cycles, stride=1, realization=0):
    """Staggered-magnetization series of a single realization."""
    n = base.n_satellites
    couplings = sample_couplings(replace(spec, n_realizations=realization + 1), n)[realization]
    u = full_floquet(replace(base, a_xy=tuple(couplings)))
    return evolve(u, psi0, n_cycles, stride, iz_diag=satellite_iz_diagonal(n), n_satellites=n)
