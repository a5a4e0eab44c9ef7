"""Krylov and Floquet-Krylov subspaces, overlap maps and spreading statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import spectral_propagator
from .operators import ModelParams, SectorBasis, build_floquet

__all__ = [
    "KrylovReport",
    "OverlapMap",
    "BranchAmbiguityWarning",
    "krylov_subspace",
    "projection_residual",
    "fig2_sampler",
    "stride_sampler",
    "parse_sampler",
    "overlap_map",
    "effective_dimension",
    "floquet_hamiltonian",
    "floquet_hamiltonian_krylov",
    "fragmentation_census",
    "expected_floquet_span",
]


class BranchAmbiguityWarning(UserWarning):
    """An eigenphase sits on the branch cut of the matrix logarithm."""


@dataclass
class KrylovReport:
    dimension: int
    basis_vectors: np.ndarray
    occupied_labels: list
    residual_history: list
    branch_ambiguous: bool = False


def _orthogonalize(basis: list[np.ndarray], v: np.ndarray) -> np.ndarray:
    # modified Gram-Schmidt, two passes
    for _ in range(2):
        for q in basis:
            v = v - np.vdot(q, v) * q
    return v


def krylov_subspace(generator: np.ndarray, psi0: np.ndarray, rank_tol: float = 1e-8,
                    basis: SectorBasis | None = None, label_threshold: float = 1e-10) -> KrylovReport:
    """Orthonormal basis of ``span{psi0, G psi0, G^2 psi0, ...}``.

    Arnoldi-style: each step applies ``G`` to the newest basis vector and
    keeps the orthogonalized image when its relative residual exceeds
    ``rank_tol``.  After a rejection ``G`` is applied to the older basis
    vectors in turn; the loop stops once every basis vector has been mapped
    back into the span without a new direction (closure), or after
    ``4 * dim`` applications.
    """
    g = np.asarray(generator, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    dim = psi0.shape[0]
    norm = np.linalg.norm(psi0)
    if norm == 0:
        raise ValueError("initial vector is zero")
    vecs = [psi0 / norm]
    history = []
    pending = 0
    misses = 0
    for _ in range(4 * dim):
        if len(vecs) >= dim or misses >= len(vecs):
            break
        w = g @ vecs[pending]
        scale = np.linalg.norm(w)
        r = _orthogonalize(vecs, w)
        resid = float(np.linalg.norm(r) / scale) if scale > 0 else 0.0
        history.append(resid)
        if resid > rank_tol:
            vecs.append(r / np.linalg.norm(r))
            pending = len(vecs) - 1
            misses = 0
        else:
            misses += 1
            pending = (pending + 1) % len(vecs)
    q = np.array(vecs).T
    labels = []
    if basis is not None:
        weight = np.sum(np.abs(q) ** 2, axis=1)
        labels = [basis.label(i) for i in np.flatnonzero(weight > label_threshold)]
    return KrylovReport(q.shape[1], q, labels, history)


def projection_residual(vectors: np.ndarray, subspace: np.ndarray) -> float:
    """Largest norm of a column of ``vectors`` left after projecting onto ``subspace``.

    ``subspace`` columns must be orthonormal.
    """
    vectors = np.atleast_2d(np.asarray(vectors).T).T
    r = vectors - subspace @ (subspace.conj().T @ vectors)
    return float(np.max(np.linalg.norm(r, axis=0)))


@dataclass
class OverlapMap:
    sampled_cycles: np.ndarray
    overlaps: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        sums = self.overlaps.sum(axis=1)
        if sums.size and np.max(np.abs(sums - 1.0)) > 1e-8:
            raise ValueError("overlap rows must sum to 1")


def fig2_sampler(n_max: int = 10**5, count: int = 500) -> np.ndarray:
    """``n = n_max - 2k`` for ``k = 0 .. count-1``, ascending."""
    return np.sort(n_max - 2 * np.arange(count))


def stride_sampler(stride: int, n_max: int) -> np.ndarray:
    if stride < 1 or n_max < 0:
        raise ValueError("stride must be >= 1 and max >= 0")
    return np.arange(0, n_max + 1, stride)


def parse_sampler(spec: str) -> np.ndarray:
    """``fig2`` or ``stride:<s>,max:<M>`` or ``list:<n1>,<n2>,...``."""
    text = spec.strip().lower()
    if text == "fig2":
        return fig2_sampler()
    if text.startswith("list:"):
        values = [int(v) for v in text[5:].split(",") if v.strip()]
        if not values or min(values) < 0:
            raise ValueError(f"bad sampler {spec!r}")
        return np.array(values)
    if text.startswith("stride:"):
        try:
            parts = dict(item.split(":") for item in text.split(","))
            return stride_sampler(int(parts["stride"]), int(parts["max"]))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad sampler {spec!r}; expected stride:<s>,max:<M>") from exc
    raise ValueError(f"bad sampler {spec!r}; use fig2, stride:<s>,max:<M> or list:<n,...>")


def overlap_map(params: ModelParams, basis: SectorBasis, psi0: np.ndarray,
                cycles: Iterable[int]) -> OverlapMap:
    """``F_n(k) = |<k| U_F^n psi0>|^2`` for every sampled ``n`` and basis state ``k``."""
    cycles = np.asarray(list(cycles), dtype=np.int64)
    prop = spectral_propagator(build_floquet(params, basis))
    states = prop.states(np.asarray(psi0, dtype=complex), cycles)
    return OverlapMap(cycles, (np.abs(states) ** 2).T, basis.label_names())


def effective_dimension(overlaps, threshold: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Per-row count of entries above ``threshold`` and inverse participation ratio."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    f = overlaps.overlaps if isinstance(overlaps, OverlapMap) else np.atleast_2d(overlaps)
    occupied = np.sum(f > threshold, axis=1)
    ipr = 1.0 / np.sum(f**2, axis=1)
    return occupied, ipr


def floquet_hamiltonian(u_f: np.ndarray, period: float, branch_tol: float = 1e-9) -> tuple[np.ndarray, bool]:
    """``H_F = i log(U_F) / T`` on the principal branch, eigenphases in (-pi, pi].

    Returns ``(H_F, ambiguous)``; ``ambiguous`` flags an eigenphase within
    ``branch_tol`` of pi, where the choice of branch changes ``H_F``.
    """
    prop = spectral_propagator(u_f)
    phases = prop.eigenphases.copy()
    phases[phases <= -np.pi + branch_tol] += 2 * np.pi
    ambiguous = bool(np.any(np.abs(phases - np.pi) <= branch_tol))
    v = prop.eigenvectors
    h = (v * (-phases / period)) @ v.conj().T
    return (h + h.conj().T) / 2, ambiguous


def floquet_hamiltonian_krylov(params: ModelParams, basis: SectorBasis, psi0: np.ndarray,
                               rank_tol: float = 1e-8) -> KrylovReport:
    """Krylov subspace of the principal-branch Floquet Hamiltonian."""
    h_f, ambiguous = floquet_hamiltonian(build_floquet(params, basis), params.period)
    if ambiguous:
        warnings.warn(
            "an eigenphase of U_F is within 1e-9 of pi; H_F depends on the log branch",
            BranchAmbiguityWarning, stacklevel=2,
        )
    report = krylov_subspace(h_f, psi0, rank_tol, basis)
    report.branch_ambiguous = ambiguous
    return report


def expected_floquet_span(basis: SectorBasis, twice_m: int, sigma, ising: bool) -> list:
    """Basis labels spanning the ideal-kick Floquet-Krylov subspace of ``|m sigma>``."""
    from .operators import Sigma

    sigma = Sigma.parse(sigma)
    tj = basis.twice_j
    if ising or (twice_m == tj and sigma is Sigma.UP) or (twice_m == -tj and sigma is Sigma.DOWN):
        labels = [(twice_m, sigma), (-twice_m, sigma.flipped)]
    elif sigma is Sigma.UP:
        labels = [(twice_m, Sigma.UP), (twice_m + 2, Sigma.DOWN),
                  (-twice_m, Sigma.DOWN), (-twice_m - 2, Sigma.UP)]
    else:
        labels = [(twice_m - 2, Sigma.UP), (twice_m, Sigma.DOWN),
                  (-twice_m + 2, Sigma.DOWN), (-twice_m, Sigma.UP)]
    return list(dict.fromkeys(labels))


def fragmentation_census(params: ModelParams, basis: SectorBasis,
                         rank_tol: float = 1e-8) -> list[dict]:
    """Floquet-Krylov dimension of every basis state of the sector.

    Each entry also carries the projection residual of the subspace onto
    the predicted span of at most four basis states.
    """
    u = build_floquet(params, basis)
    ising = params.a_xy == 0
    out = []
    for i in range(basis.dim):
        tm, sigma = basis.label(i)
        rep = krylov_subspace(u, basis.basis_state(tm, sigma), rank_tol, basis)
        expected = expected_floquet_span(basis, tm, sigma, ising)
        span = np.stack([basis.basis_state(*lab) for lab in expected], axis=1)
        out.append({
            "twice_m": tm,
            "sigma": sigma,
            "dimension": rep.dimension,
            "expected_dimension": len(expected),
            "span_residual": projection_residual(rep.basis_vectors, span),
        })
    return out
