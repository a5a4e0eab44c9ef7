"""Brute-force references shared by several test modules."""

import numpy as np


def random_density(dim, rng, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def dicke_states(n):
    """Columns |J=N/2, m> in the 2^N product basis, m decreasing; bit set = down."""
    out = np.zeros((2**n, n + 1))
    for index in range(2**n):
        out[index, bin(index).count("1")] = 1.0
    return out / np.linalg.norm(out, axis=0)


def brute_force_entropy(rho, n):
    d = dicke_states(n)
    full = d @ rho @ d.T
    half = 2 ** (n // 2)
    rho_a = np.einsum("ibjb->ij", full.reshape(half, half, half, half))
    w = np.linalg.eigvalsh(rho_a)
    w = w[w > 1e-12]
    return float(-np.sum(w * np.log(w)))
