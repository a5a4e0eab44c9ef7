"""Floquet eigenstates, satellite reduced states and their bipartite entropy.

The satellite reduced state lives in the collective multiplet ``|J, m>``.
For the fully symmetric sector (``2J = N``) each half of ``N/2`` spins is
itself symmetric with spin ``J/2``, so ``|J, m>`` embeds into the product
of the two halves through Clebsch-Gordan coefficients.  That embedding is
all the entropy calculation needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import spectral_propagator
from .operators import (
    ModelParams,
    NumericalError,
    SectorBasis,
    build_floquet,
)

__all__ = [
    "FloquetEigensystem",
    "ScarRecord",
    "floquet_eigensystem",
    "reduce_central",
    "clebsch_gordan",
    "dicke_isometry",
    "von_neumann_entropy",
    "dicke_bipartition_entropy",
    "scar_overlaps",
    "scar_scatter",
]

DEGENERACY_TOL = 1e-10
EIG_CLIP = 1e-12


@dataclass(frozen=True)
class FloquetEigensystem:
    """Quasienergies ``eps/omega`` in (-1/2, 1/2], ascending, with eigenvector columns."""

    quasienergy_over_omega: np.ndarray
    eigenvectors: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True)
class ScarRecord:
    quasienergy_over_omega: float
    entropy: float
    overlap_plus: float
    overlap_minus: float
    degenerate: bool = False


def floquet_eigensystem(u_f: np.ndarray) -> FloquetEigensystem:
    """Eigen-decompose ``U_F`` with ``U_F v = exp(-2 pi i eps/omega) v``.

    Vectors inside a degenerate cluster (``|d eps/omega| < 1e-10``) are an
    arbitrary orthonormal basis of the cluster; they are ordered by the
    index of their largest-magnitude component so the output is repeatable.
    """
    prop = spectral_propagator(u_f)
    eps = -prop.eigenphases / (2 * np.pi)
    eps = np.where(eps <= -0.5, eps + 1.0, eps) + 0.0  # no -0.0
    vecs = prop.eigenvectors
    lead = np.argmax(np.abs(vecs), axis=0)
    order = np.lexsort((lead, eps))
    eps, vecs, lead = eps[order], vecs[:, order], lead[order]

    degenerate = np.zeros(eps.shape[0], dtype=bool)
    start = 0
    for k in range(1, eps.shape[0] + 1):
        if k == eps.shape[0] or eps[k] - eps[k - 1] >= DEGENERACY_TOL:
            if k - start > 1:
                degenerate[start:k] = True
                cluster = np.argsort(lead[start:k], kind="stable") + start
                vecs[:, start:k] = vecs[:, cluster]
                eps[start:k] = eps[cluster]
            start = k
    # clusters can straddle the +-1/2 seam
    if eps.shape[0] > 1 and (eps[0] + 1.0) - eps[-1] < DEGENERACY_TOL:
        degenerate[0] = degenerate[-1] = True

    resid = np.abs(u_f @ vecs - vecs * np.exp(-2j * np.pi * eps))
    if resid.size and resid.max() > 1e-8:
        raise NumericalError(f"Floquet eigenvector residual {resid.max():.3e} exceeds 1e-8")
    return FloquetEigensystem(eps, vecs, degenerate)


def reduce_central(state: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Trace out the central spin; returns the ``(2j+1) x (2j+1)`` satellite state."""
    psi = np.asarray(state, dtype=complex).reshape(basis.multiplet_dim, 2)
    return psi @ psi.conj().T


@lru_cache(maxsize=None)
def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def clebsch_gordan(twice_j1: int, twice_m1: int, twice_j2: int, twice_m2: int,
                   twice_J: int, twice_M: int) -> float:
    """``<j1 m1; j2 m2 | J M>`` in the Condon-Shortley convention.

    Racah's closed form with log-factorials.  Arguments are doubled quantum
    numbers; any selection-rule violation gives 0.
    """
    if twice_m1 + twice_m2 != twice_M:
        return 0.0
    if twice_J < abs(twice_j1 - twice_j2) or twice_J > twice_j1 + twice_j2:
        return 0.0
    if (twice_j1 + twice_j2 + twice_J) % 2:
        return 0.0
    for tj, tm in ((twice_j1, twice_m1), (twice_j2, twice_m2), (twice_J, twice_M)):
        if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
            return 0.0

    # all of these are integers by the parity checks above
    a = (twice_j1 + twice_j2 - twice_J) // 2
    b = (twice_j1 - twice_j2 + twice_J) // 2
    c = (-twice_j1 + twice_j2 + twice_J) // 2
    total = (twice_j1 + twice_j2 + twice_J) // 2 + 1
    j1p, j1m = (twice_j1 + twice_m1) // 2, (twice_j1 - twice_m1) // 2
    j2p, j2m = (twice_j2 + twice_m2) // 2, (twice_j2 - twice_m2) // 2
    jp, jm = (twice_J + twice_M) // 2, (twice_J - twice_M) // 2

    lf = _log_factorial
    log_pref = 0.5 * (
        math.log(twice_J + 1)
        + lf(a) + lf(b) + lf(c) - lf(total)
        + lf(j1p) + lf(j1m) + lf(j2p) + lf(j2m) + lf(jp) + lf(jm)
    )
    # k runs over all values keeping every factorial argument nonnegative
    k_min = max(0, (twice_j2 - twice_J - twice_m1) // 2, (twice_j1 - twice_J + twice_m2) // 2)
    k_max = min(a, j1m, j2p)
    s = 0.0
    for k in range(k_min, k_max + 1):
        args = (
            k, a - k, j1m - k, j2p - k,
            (twice_J - twice_j2 + twice_m1) // 2 + k,
            (twice_J - twice_j1 - twice_m2) // 2 + k,
        )
        term = math.exp(log_pref - sum(lf(x) for x in args))
        s += -term if k % 2 else term
    return s


@lru_cache(maxsize=32)
def dicke_isometry(twice_J: int) -> np.ndarray:
    """``V`` with ``V[(m1, m2), m] = <J/2 m1; J/2 m2 | J m>``.

    Rows index the product of two spin-``J/2`` multiplets, columns the
    spin-``J`` multiplet; every multiplet is ordered by decreasing ``m``.
    """
    if twice_J % 2:
        raise ValueError("the equal split needs an even number of satellites")
    half = twice_J // 2
    d_half = half + 1
    v = np.zeros((d_half * d_half, twice_J + 1))
    for col in range(twice_J + 1):
        tm = twice_J - 2 * col
        for i1 in range(d_half):
            tm1 = half - 2 * i1
            tm2 = tm - tm1
            if abs(tm2) > half:
                continue
            i2 = (half - tm2) // 2
            v[i1 * d_half + i2, col] = clebsch_gordan(half, tm1, half, tm2, twice_J, tm)
    v.setflags(write=False)
    return v


def von_neumann_entropy(rho: np.ndarray, clip: float = EIG_CLIP) -> float:
    """``-Tr rho ln rho`` in nats; eigenvalues below ``clip`` count as zero."""
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    w = w[w > clip]
    return float(-np.sum(w * np.log(w)))


def dicke_bipartition_entropy(rho: np.ndarray, basis: SectorBasis) -> float:
    """Entropy of one half of the satellites for a symmetric-sector satellite state."""
    if basis.twice_j != basis.n_satellites:
        raise ValueError(
            "bipartition entropy needs the fully symmetric sector (twice_j == N)"
        )
    if basis.n_satellites % 2:
        raise ValueError(f"equal split needs even N, got N={basis.n_satellites}")
    v = dicke_isometry(basis.twice_j)
    d_half = basis.n_satellites // 2 + 1
    full = v @ rho @ v.T
    rho_a = np.einsum("ibjb->ij", full.reshape(d_half, d_half, d_half, d_half))
    return von_neumann_entropy(rho_a)


def scar_overlaps(rho: np.ndarray) -> tuple[float, float]:
    """``(<+J|rho|+J>, <-J|rho|-J>)``."""
    return float(rho[0, 0].real), float(rho[-1, -1].real)


def scar_scatter(params: ModelParams, basis: SectorBasis) -> list[ScarRecord]:
    """Entropy and polarized-state overlaps of every Floquet eigenstate."""
    if basis.n_satellites % 2:
        raise ValueError(f"scar scatter needs even N for the equal split, got N={basis.n_satellites}")
    system = floquet_eigensystem(build_floquet(params, basis))
    records = []
    for k, eps in enumerate(system.quasienergy_over_omega):
        rho = reduce_central(system.eigenvectors[:, k], basis)
        plus, minus = scar_overlaps(rho)
        records.append(ScarRecord(
            float(eps), dicke_bipartition_entropy(rho, basis), plus, minus,
            bool(system.degenerate[k]),
        ))
    return records
