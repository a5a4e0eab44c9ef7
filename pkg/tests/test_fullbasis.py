import math

import numpy as np
import pytest

from centralspin.dynamics import evolve
from centralspin.fullbasis import (
    MAX_SATELLITES,
    DisorderSpec,
    FullBasisModel,
    build_full_hamiltonian,
    disorder_order_parameter,
    full_floquet,
    full_spin_ops,
    product_state,
    realization_rng,
    rng_identity,
    sample_couplings,
    satellite_iz_diagonal,
    sector_embedding,
)
from centralspin.operators import ModelParams, build_floquet, build_h0, build_sector


def _sector_projectors(n):
    casimir = full_spin_ops(n)["It_sq"]
    w, v = np.linalg.eigh(casimir)
    out = []
    for twice_j in range(n % 2, n + 1, 2):
        j = twice_j / 2
        cols = v[:, np.isclose(w, j * (j + 1))]
        out.append(cols @ cols.conj().T)
    return out


def test_n1_hand_expanded_matrix():
    # order |s c>: uu, ud, du, dd with the satellite first
    axy, az, bz, bnz = 0.7, 1.3, 0.4, -0.2
    model = FullBasisModel(1, axy, az, bz, b_nz=bnz)
    expected = np.array([
        [az / 4 + bz / 2 + bnz / 2, 0, 0, 0],
        [0, -az / 4 - bz / 2 + bnz / 2, axy, 0],
        [0, axy, -az / 4 + bz / 2 - bnz / 2, 0],
        [0, 0, 0, az / 4 - bz / 2 - bnz / 2],
    ])
    assert np.allclose(build_full_hamiltonian(model), expected, atol=1e-15)


def test_n1_exchange_form():
    # a_xy = A/2, a_z = A gives A (S_1 . S_0)
    a = 1.1
    h = build_full_hamiltonian(FullBasisModel(1, a / 2, a))
    sx = np.array([[0, 0.5], [0.5, 0]])
    sy = np.array([[0, -0.5j], [0.5j, 0]])
    sz = np.diag([0.5, -0.5])
    dot = sum(np.kron(s, s) for s in (sx, sy, sz))
    assert np.allclose(h, a * dot, atol=1e-15)


def test_zero_couplings_field_only():
    model = FullBasisModel(3, 0.0, 0.0, b_z=2.5)
    sz = np.kron(np.eye(8), np.diag([0.5, -0.5]))
    assert np.allclose(build_full_hamiltonian(model), 2.5 * sz)


def test_n5_spectrum_is_union_of_sectors():
    params = ModelParams(a_xy=0.9, a_z=1.7, b_z=0.6, b_nz=0.3)
    full = np.linalg.eigvalsh(build_full_hamiltonian(FullBasisModel.homogeneous(params, 5)))
    parts = []
    for twice_j, mult in ((5, 1), (3, 4), (1, 5)):
        w = np.linalg.eigvalsh(build_h0(params, build_sector(5, twice_j)))
        parts.extend(list(w) * mult)
    assert len(parts) == 64
    assert np.allclose(np.sort(parts), full, atol=1e-12)


def test_hamiltonian_commutes_with_casimir():
    model = FullBasisModel.homogeneous(ModelParams(a_xy=0.9, a_z=0.2, b_z=3.0), 4)
    h = build_full_hamiltonian(model)
    c = full_spin_ops(4)["It_sq"]
    assert np.max(np.abs(h @ c - c @ h)) <= 1e-10 * max(np.max(np.abs(h)), 1)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_floquet_block_diagonal(n):
    model = FullBasisModel.homogeneous(ModelParams.with_theta(0.1 * math.pi, a_xy=0.8, a_z=1.4, b_z=2.0), n)
    u = full_floquet(model)
    projectors = _sector_projectors(n)
    for i, p in enumerate(projectors):
        for k, q in enumerate(projectors):
            if i != k:
                assert np.max(np.abs(p @ u @ q)) <= 1e-10


def test_disordered_couplings_break_blocks():
    model = FullBasisModel(3, (0.5, 1.0, 1.7), 0.0)
    assert not model.is_homogeneous
    u = full_floquet(model)
    p = _sector_projectors(3)
    assert np.max(np.abs(p[0] @ u @ p[1])) > 1e-3


def test_symmetric_projection_reproduces_collective_floquet():
    params = ModelParams.with_theta(0.2, a_xy=0.6, a_z=1.1, b_z=0.9, b_nz=0.1)
    e = sector_embedding(4)
    u_full = full_floquet(FullBasisModel.homogeneous(params, 4))
    assert np.max(np.abs(e.conj().T @ u_full @ e - build_floquet(params, build_sector(4)))) <= 1e-10


def test_embedding_is_isometry_for_every_copy():
    for twice_j, copies in ((5, 1), (3, 4), (1, 5)):
        for copy in range(copies):
            e = sector_embedding(5, twice_j, copy)
            assert np.allclose(e.conj().T @ e, np.eye(e.shape[1]), atol=1e-12)
    with pytest.raises(ValueError):
        sector_embedding(5, 3, copy=4)


def test_pure_pulse_period_two():
    u = full_floquet(FullBasisModel(3, 0.0, 0.0))
    u2 = u @ u
    assert np.allclose(u2, u2[0, 0] * np.eye(16), atol=1e-12)


def test_size_limits():
    with pytest.raises(ValueError):
        FullBasisModel(MAX_SATELLITES + 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        FullBasisModel(0, 1.0, 1.0)
    with pytest.raises(ValueError):
        FullBasisModel(2, (1.0, 2.0, 3.0), 1.0)


def test_product_state_and_iz():
    psi = product_state("uud", "d")
    assert np.flatnonzero(psi).tolist() == [0b0011]
    iz = satellite_iz_diagonal(3)
    assert iz[0] == 1.5 and iz[-1] == -1.5
    assert iz[0b0011] == 0.5
    with pytest.raises(ValueError):
        product_state("uxd", "d")
    with pytest.raises(ValueError):
        product_state("uud", "du")


def test_sampling_statistics_and_determinism():
    spec = DisorderSpec(5.7, 0.3, seed=12, n_realizations=3)
    a = sample_couplings(spec, 5)
    b = sample_couplings(spec, 5)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])
    zero = sample_couplings(DisorderSpec(5.7, 0.0, n_realizations=2), 5)
    assert all(np.all(c == 5.7) for c in zero)
    big = sample_couplings(DisorderSpec(5.7, 0.3, seed=1, n_realizations=1), 10_000)[0]
    assert abs(big.mean() - 5.7) <= 3 * 0.3 / 100
    # realization r depends only on (seed, r)
    assert np.array_equal(5.7 + 0.3 * realization_rng(12, 2).standard_normal(5), a[2])
    assert "PCG64" in rng_identity()


def test_disorder_spec_validation():
    with pytest.raises(ValueError):
        DisorderSpec(1.0, -0.1)
    with pytest.raises(ValueError):
        DisorderSpec(1.0, 0.1, seed=-1)
    with pytest.raises(ValueError):
        DisorderSpec(1.0, 0.1, n_realizations=0)


def test_disorder_single_cycle_and_workers():
    base = FullBasisModel(3, 1.0, 0.0, theta_e=0.1, theta_n=0.1)
    spec = DisorderSpec(1.0, 0.2, seed=3, n_realizations=3)
    serial = disorder_order_parameter(spec, base, n_cycles=1)
    parallel = disorder_order_parameter(spec, base, n_cycles=1, workers=2)
    assert serial == parallel
    couplings = sample_couplings(spec, 3)[0]
    u = full_floquet(FullBasisModel(3, tuple(couplings), 0.0, theta_e=0.1, theta_n=0.1))
    s = evolve(u, product_state("uuu", "d"), 1, iz_diag=satellite_iz_diagonal(3), n_satellites=3)
    assert serial[0] == pytest.approx(s.staggered[1])


def test_homogeneous_disorder_free_matches_collective():
    params = ModelParams.with_theta(0.03 * math.pi, a_xy=5.7)
    base = FullBasisModel.homogeneous(params, 5)
    value = disorder_order_parameter(DisorderSpec(5.7, 0.0), base, n_cycles=300)[0]
    basis = build_sector(5)
    s = evolve(build_floquet(params, basis), basis.basis_state(5, "down"), 300, basis=basis)
    assert value == pytest.approx(np.mean(s.staggered[1:]), abs=1e-10)
