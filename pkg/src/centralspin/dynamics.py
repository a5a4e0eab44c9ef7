"""Stroboscopic evolution, staggered magnetization and phase-diagram sweeps."""

from __future__ import annotations

import concurrent.futures
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .operators import (
    ModelParams,
    NumericalError,
    SectorBasis,
    build_floquet,
    build_sector,
    check_unitary,
)

__all__ = [
    "SpectralPropagator",
    "StroboscopicSeries",
    "PhaseGrid",
    "AXIS_NAMES",
    "spectral_propagator",
    "evolve",
    "evolve_state",
    "order_parameter",
    "phase_sweep",
    "initial_state",
    "apply_axis",
]

log = logging.getLogger(__name__)

SPECTRAL_THRESHOLD = 10**5
_CHUNK = 8192
AXIS_NAMES = ("a", "a_xy", "a_z", "b_z", "theta")


@dataclass(frozen=True)
class SpectralPropagator:
    """``U = V diag(exp(i*phases)) V^dagger`` with ``V`` unitary."""

    eigenphases: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenphases.shape[0]

    def power(self, n: int) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(1j * self.eigenphases * n)) @ v.conj().T

    def states(self, psi0: np.ndarray, cycles: Sequence[int]) -> np.ndarray:
        """Columns ``U^n psi0`` for each ``n`` in ``cycles``."""
        c = self.eigenvectors.conj().T @ psi0
        n = np.asarray(cycles, dtype=float)
        return self.eigenvectors @ (np.exp(1j * np.outer(self.eigenphases, n)) * c[:, None])


def spectral_propagator(u: np.ndarray, tol: float = 1e-9) -> SpectralPropagator:
    """Unitary eigendecomposition through the complex Schur form.

    For a normal matrix the Schur factor ``Z`` is already a unitary
    eigenvector matrix, including inside near-degenerate clusters where a
    plain ``eig`` would return a non-orthogonal basis.
    """
    u = np.asarray(u, dtype=complex)
    try:
        t, z = scipy.linalg.schur(u, output="complex")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}") from exc
    lam = np.diag(t)
    phases = np.angle(lam)
    rebuilt = (z * np.exp(1j * phases)) @ z.conj().T
    resid = float(np.max(np.abs(rebuilt - u))) if u.size else 0.0
    if resid > 1e-8:
        raise NumericalError(f"spectral reconstruction residual {resid:.3e} exceeds 1e-8")
    if np.max(np.abs(z.conj().T @ z - np.eye(u.shape[0]))) > tol:
        z, _ = np.linalg.qr(z)
    return SpectralPropagator(phases, z)


@dataclass
class StroboscopicSeries:
    """Magnetization ``<I_t^z>/N`` recorded at stroboscopic times."""

    cycles: np.ndarray
    magnetization: np.ndarray
    staggered: np.ndarray
    return_probability: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.cycles)
        if len(self.magnetization) != n or len(self.staggered) != n:
            raise ValueError("series columns must have equal length")
        if n and np.max(np.abs(self.magnetization)) > 0.5 + 1e-9:
            raise NumericalError("magnetization left [-1/2, 1/2]")

    def __len__(self) -> int:
        return len(self.cycles)


def _magnetization(states: np.ndarray, iz_diag: np.ndarray, n_satellites: int) -> np.ndarray:
    prob = np.abs(states) ** 2
    norms = prob.sum(axis=0)
    if np.max(np.abs(norms - 1.0)) > 1e-9:
        raise NumericalError(f"state norm drifted by {np.max(np.abs(norms - 1)):.3e}")
    return (iz_diag @ prob) / n_satellites


def _record_cycles(n_cycles: int, stride: int) -> np.ndarray:
    if n_cycles < 0:
        raise ValueError("n_cycles must be nonnegative")
    if stride < 1:
        raise ValueError("record stride must be >= 1")
    return np.arange(0, n_cycles + 1, stride, dtype=np.int64)


def _iz_diagonal(basis_or_iz) -> np.ndarray:
    if isinstance(basis_or_iz, SectorBasis):
        return basis_or_iz.twice_m_values / 2.0
    return np.asarray(basis_or_iz, dtype=float)


def evolve(
    u_f: np.ndarray,
    psi0: np.ndarray,
    n_cycles: int,
    record_stride: int = 1,
    *,
    basis: SectorBasis | None = None,
    iz_diag: np.ndarray | None = None,
    n_satellites: int | None = None,
    method: str = "auto",
    return_probability: bool = False,
) -> StroboscopicSeries:
    """Record ``<I_t^z>/N`` at cycles ``0, stride, 2*stride, ... <= n_cycles``.

    Either ``basis`` (collective sector) or ``iz_diag`` plus ``n_satellites``
    (any basis in which ``I_t^z`` is diagonal) must be given.  ``method`` is
    ``"auto"``, ``"direct"`` or ``"spectral"``; ``auto`` switches to spectral
    powers once ``n_cycles * dim > 1e5 * stride``.
    """
    if basis is not None:
        iz = _iz_diagonal(basis)
        n_sat = basis.n_satellites
    else:
        if iz_diag is None or n_satellites is None:
            raise ValueError("pass either basis or iz_diag and n_satellites")
        iz = _iz_diagonal(iz_diag)
        n_sat = n_satellites
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    cycles = _record_cycles(n_cycles, record_stride)
    dim = psi0.shape[0]
    if method == "auto":
        method = "spectral" if n_cycles * dim > SPECTRAL_THRESHOLD * record_stride else "direct"

    mags = np.empty(len(cycles))
    ret = np.empty(len(cycles)) if return_probability else None
    if method == "direct":
        psi = psi0.copy()
        k = 0
        for n in range(n_cycles + 1):
            if n % record_stride == 0:
                mags[k] = _magnetization(psi[:, None], iz, n_sat)[0]
                if ret is not None:
                    ret[k] = abs(np.vdot(psi0, psi)) ** 2
                k += 1
            if n < n_cycles:
                psi = u_f @ psi
    elif method == "spectral":
        prop = spectral_propagator(u_f)
        for start in range(0, len(cycles), _CHUNK):
            block = cycles[start:start + _CHUNK]
            states = prop.states(psi0, block)
            mags[start:start + len(block)] = _magnetization(states, iz, n_sat)
            if ret is not None:
                ret[start:start + len(block)] = np.abs(psi0.conj() @ states) ** 2
    else:
        raise ValueError(f"unknown method {method!r}")
    stag = np.where(cycles % 2 == 0, 1.0, -1.0) * mags
    return StroboscopicSeries(cycles, mags, stag, ret)


def evolve_state(u_f: np.ndarray, psi0: np.ndarray, n_cycles: int, method: str = "auto") -> np.ndarray:
    """The state ``U^n psi0`` itself."""
    psi0 = np.asarray(psi0, dtype=complex)
    if method == "auto":
        method = "spectral" if n_cycles * psi0.shape[0] > SPECTRAL_THRESHOLD else "direct"
    if method == "spectral":
        return spectral_propagator(u_f).states(psi0, [n_cycles])[:, 0]
    psi = psi0.copy()
    for _ in range(n_cycles):
        psi = u_f @ psi
    return psi


def order_parameter(
    u_f: np.ndarray,
    psi0: np.ndarray,
    n_cycles: int,
    *,
    basis: SectorBasis | None = None,
    iz_diag: np.ndarray | None = None,
    n_satellites: int | None = None,
) -> float:
    """Time-averaged staggered magnetization ``(1/N_C) sum_{n=1}^{N_C} (-1)^n <I_t^z(nT)>/N``."""
    if n_cycles < 1:
        raise ValueError("N_C must be >= 1")
    series = evolve(
        u_f, psi0, n_cycles, 1, basis=basis, iz_diag=iz_diag, n_satellites=n_satellites
    )
    return float(np.mean(series.staggered[1:]))


def initial_state(basis: SectorBasis, spec: str) -> np.ndarray:
    """Parse ``J-up``, ``J-down``, ``-J-up``, ``-J-down`` or ``m:<twice_m>,<up|down>``."""
    text = spec.strip()
    low = text.lower()
    if low.startswith("m:"):
        body = text[2:]
        try:
            tm_text, sigma_text = body.split(",")
            twice_m = int(tm_text)
        except ValueError as exc:
            raise ValueError(f"bad initial state {spec!r}; expected m:<twice_m>,<up|down>") from exc
        return basis.basis_state(twice_m, sigma_text)
    for prefix, sign in (("-j-", -1), ("j-", 1)):
        if low.startswith(prefix):
            return basis.basis_state(sign * basis.twice_j, low[len(prefix):])
    raise ValueError(
        f"bad initial state {spec!r}; use J-up, J-down, -J-up, -J-down or m:<twice_m>,<up|down>"
    )


def apply_axis(params: ModelParams, name: str, value: float) -> ModelParams:
    """Return ``params`` with the swept quantity ``name`` set to ``value``."""
    if name == "a":
        return replace(params, a_xy=value, a_z=value)
    if name == "a_xy":
        return replace(params, a_xy=value)
    if name == "a_z":
        return replace(params, a_z=value)
    if name == "b_z":
        return replace(params, b_z=value)
    if name == "theta":
        return replace(params, theta_e=value, theta_n=value)
    raise ValueError(f"invalid axis name {name!r}; choose from {', '.join(AXIS_NAMES)}")


@dataclass
class PhaseGrid:
    """Order parameter on a (y, x) grid; ``failures`` lists cells that raised."""

    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    order_parameter: np.ndarray
    n_cycles: int
    fixed_params: dict
    failures: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures


def _cell(task):
    params, n_satellites, twice_j, psi_spec, n_cycles = task
    basis = build_sector(n_satellites, twice_j)
    psi0 = initial_state(basis, psi_spec)
    try:
        u = build_floquet(params, basis)
        return order_parameter(u, psi0, n_cycles, basis=basis), None
    except (NumericalError, np.linalg.LinAlgError, ValueError) as exc:
        return float("nan"), f"{type(exc).__name__}: {exc}"


def run_tasks(fn: Callable, tasks: list, workers: int | None = None) -> list:
    """Map ``fn`` over ``tasks`` in order; processes when ``workers > 1``."""
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def phase_sweep(
    base: ModelParams,
    x_name: str,
    x_values: Sequence[float],
    y_name: str,
    y_values: Sequence[float],
    psi0: str = "J-up",
    n_cycles: int = 10_000,
    *,
    n_satellites: int = 21,
    twice_j: int | None = None,
    workers: int | None = 1,
) -> PhaseGrid:
    """Order parameter over a 2-D parameter grid; cells run independently.

    Cells that fail numerically are stored as NaN and listed in
    ``PhaseGrid.failures`` instead of aborting the sweep.
    """
    for name in (x_name, y_name):
        if name not in AXIS_NAMES:
            raise ValueError(f"invalid axis name {name!r}; choose from {', '.join(AXIS_NAMES)}")
    if x_name == y_name:
        raise ValueError("sweep axes must be distinct")
    xs = np.asarray(x_values, dtype=float)
    ys = np.asarray(y_values, dtype=float)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("axis values must be finite")
    twice_j = n_satellites if twice_j is None else twice_j
    initial_state(build_sector(n_satellites, twice_j), psi0)

    tasks = []
    for y in ys:
        for x in xs:
            p = apply_axis(apply_axis(base, y_name, float(y)), x_name, float(x))
            tasks.append((p, n_satellites, twice_j, psi0, n_cycles))
    results = run_tasks(_cell, tasks, workers)

    grid = np.array([r[0] for r in results], dtype=float).reshape(len(ys), len(xs))
    failures = []
    for k, (_, err) in enumerate(results):
        if err is not None:
            iy, ix = divmod(k, len(xs))
            failures.append({"x": float(xs[ix]), "y": float(ys[iy]), "error": err})
            log.warning("cell (%s=%g, %s=%g) failed: %s", x_name, xs[ix], y_name, ys[iy], err)
    return PhaseGrid(
        x_name, xs, y_name, ys, grid, n_cycles,
        {**base.as_dict(), "n_satellites": n_satellites, "twice_j": twice_j, "initial": psi0},
        failures,
    )
