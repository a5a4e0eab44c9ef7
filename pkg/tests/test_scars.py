import itertools
import math

import numpy as np
import pytest
from sympy import S
from sympy.physics.quantum.cg import CG

from centralspin.operators import ModelParams, build_floquet, build_sector
from centralspin.scars import (
    clebsch_gordan,
    dicke_bipartition_entropy,
    dicke_isometry,
    floquet_eigensystem,
    reduce_central,
    scar_overlaps,
    scar_scatter,
    von_neumann_entropy,
)
from helpers import brute_force_entropy, random_density


def test_cg_examples():
    assert clebsch_gordan(1, 1, 1, -1, 2, 0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    for tj in range(0, 7):
        assert clebsch_gordan(tj, tj, tj, tj, 2 * tj, 2 * tj) == pytest.approx(1.0, abs=1e-14)
    assert clebsch_gordan(1, 1, 1, 1, 0, 0) == 0.0
    assert clebsch_gordan(1, 1, 1, 1, 6, 2) == 0.0
    assert clebsch_gordan(2, 1, 2, 1, 4, 2) == 0.0


def test_cg_two_spin_half_from_diagonalization():
    # total spin of two spin-1/2 in the product basis |uu>, |ud>, |du>, |dd>
    sx = np.array([[0, 0.5], [0.5, 0]])
    sy = np.array([[0, -0.5j], [0.5j, 0]])
    sz = np.diag([0.5, -0.5])
    tot = [np.kron(s, np.eye(2)) + np.kron(np.eye(2), s) for s in (sx, sy, sz)]
    s2 = sum(t @ t for t in tot)
    w, v = np.linalg.eigh(s2 + 0.1 * tot[2])
    # triplet m=0 has s2 = 2 and sz = 0
    k = int(np.argmin(np.abs(w - 2.0)))
    vec = v[:, k] * np.sign(v[1, k].real)
    assert vec[1] == pytest.approx(clebsch_gordan(1, 1, 1, -1, 2, 0))
    assert vec[2] == pytest.approx(clebsch_gordan(1, -1, 1, 1, 2, 0))


def test_cg_matches_sympy():
    checked = 0
    for tj1, tj2 in itertools.product(range(0, 6), repeat=2):
        for tJ in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
            for tm1 in range(-tj1, tj1 + 1, 2):
                for tm2 in range(-tj2, tj2 + 1, 2):
                    if abs(tm1 + tm2) > tJ:
                        continue
                    ref = float(CG(S(tj1) / 2, S(tm1) / 2, S(tj2) / 2, S(tm2) / 2, S(tJ) / 2,
                                   S(tm1 + tm2) / 2).doit())
                    assert clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tm1 + tm2) == pytest.approx(ref, abs=1e-13)
                    checked += 1
    assert checked > 500


def test_cg_orthogonality():
    rng = np.random.default_rng(7)
    for _ in range(20):
        tj1, tj2 = int(rng.integers(0, 8)), int(rng.integers(0, 8))
        js = list(range(abs(tj1 - tj2), tj1 + tj2 + 1, 2))
        tJ, tJp = rng.choice(js), rng.choice(js)
        tM = int(rng.choice(range(-min(tJ, tJp), min(tJ, tJp) + 1, 2)))
        total = sum(
            clebsch_gordan(tj1, tm1, tj2, tM - tm1, tJ, tM) * clebsch_gordan(tj1, tm1, tj2, tM - tm1, tJp, tM)
            for tm1 in range(-tj1, tj1 + 1, 2)
        )
        assert total == pytest.approx(1.0 if tJ == tJp else 0.0, abs=1e-12)


@pytest.mark.parametrize("twice_j", [2, 4, 6, 8, 10, 20])
def test_isometry(twice_j):
    v = dicke_isometry(twice_j)
    assert np.max(np.abs(v.T @ v - np.eye(twice_j + 1))) < 1e-10
    with pytest.raises(ValueError):
        v[0, 0] = 1.0


def test_isometry_rejects_odd():
    with pytest.raises(ValueError):
        dicke_isometry(3)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_entropy_matches_brute_force(n):
    rng = np.random.default_rng(n)
    basis = build_sector(n)
    for _ in range(20):
        rho = random_density(n + 1, rng, rank=int(rng.integers(1, n + 2)))
        assert dicke_bipartition_entropy(rho, basis) == pytest.approx(brute_force_entropy(rho, n), abs=1e-8)


def test_entropy_examples():
    basis = build_sector(2)
    top = np.zeros((3, 3))
    top[0, 0] = 1
    assert dicke_bipartition_entropy(top, basis) == pytest.approx(0.0, abs=1e-12)
    mid = np.zeros((3, 3))
    mid[1, 1] = 1
    assert dicke_bipartition_entropy(mid, basis) == pytest.approx(math.log(2))


def test_entropy_rejections():
    with pytest.raises(ValueError):
        dicke_bipartition_entropy(np.eye(4) / 4, build_sector(3))
    with pytest.raises(ValueError):
        dicke_bipartition_entropy(np.eye(3) / 3, build_sector(4, 2))


def test_von_neumann_clipping():
    assert von_neumann_entropy(np.diag([1.0, 0.0, -1e-14])) == 0.0
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(math.log(4))


def test_reduce_central_examples():
    basis = build_sector(4)
    rho = reduce_central(basis.basis_state(2, "up"), basis)
    expected = np.zeros((5, 5))
    expected[1, 1] = 1
    assert np.allclose(rho, expected)
    psi = (basis.basis_state(2, "up") + basis.basis_state(-2, "down")) / math.sqrt(2)
    rho = reduce_central(psi, basis)
    expected = np.zeros((5, 5))
    expected[1, 1] = expected[3, 3] = 0.5
    assert np.allclose(rho, expected)


def test_reduce_central_against_contraction():
    rng = np.random.default_rng(11)
    basis = build_sector(21)
    psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    psi /= np.linalg.norm(psi)
    rho = reduce_central(psi, basis)
    ref = np.zeros((22, 22), dtype=complex)
    for a in range(22):
        for b in range(22):
            ref[a, b] = sum(psi[2 * a + s] * np.conj(psi[2 * b + s]) for s in range(2))
    assert np.allclose(rho, ref, atol=1e-14)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12


def test_scar_overlaps_examples():
    top = np.zeros((5, 5))
    top[0, 0] = 1
    assert scar_overlaps(top) == (1.0, 0.0)
    assert scar_overlaps(np.eye(5) / 5) == pytest.approx((0.2, 0.2))


def test_eigensystem_examples():
    system = floquet_eigensystem(np.eye(4, dtype=complex))
    assert np.all(system.quasienergy_over_omega == 0)
    assert system.degenerate.all()
    system = floquet_eigensystem(np.diag([np.exp(-0.5j * math.pi), np.exp(0.5j * math.pi)]))
    assert system.quasienergy_over_omega.tolist() == pytest.approx([-0.25, 0.25])
    assert not system.degenerate.any()


def test_eigensystem_zone_edge():
    system = floquet_eigensystem(np.diag([-1.0 + 0j, 1.0]))
    assert system.quasienergy_over_omega.tolist() == pytest.approx([0.0, 0.5])
    # clusters straddling the seam are flagged
    system = floquet_eigensystem(np.diag([-1.0 + 0j, np.exp(1j * (math.pi - 1e-12)), 1j]))
    eps = system.quasienergy_over_omega
    assert eps.min() > -0.5 and eps.max() <= 0.5
    assert system.degenerate[0] and system.degenerate[-1]


def test_eigensystem_degenerate_ordering_is_repeatable():
    basis = build_sector(4)
    params = ModelParams(theta_e=math.pi, theta_n=math.pi)
    first = floquet_eigensystem(build_floquet(params, basis))
    second = floquet_eigensystem(build_floquet(params, basis))
    assert np.array_equal(first.eigenvectors, second.eigenvectors)
    lead = np.argmax(np.abs(first.eigenvectors), axis=0)
    assert np.all(np.diff(lead) >= 0)


def test_ising_cat_eigenstates():
    basis = build_sector(6)
    system = floquet_eigensystem(build_floquet(ModelParams(a_z=1.3, b_z=10.0), basis))
    up, down = basis.index(6, "up"), basis.index(-6, "down")
    cats = [k for k in range(basis.dim) if abs(system.eigenvectors[up, k]) > 1e-6]
    assert len(cats) == 2
    for k in cats:
        v = system.eigenvectors[:, k]
        assert abs(v[up]) ** 2 == pytest.approx(0.5, abs=1e-10)
        assert abs(v[down]) ** 2 == pytest.approx(0.5, abs=1e-10)


def test_scatter_records_and_bounds():
    basis = build_sector(10)
    records = scar_scatter(ModelParams(a_xy=math.sqrt(2), a_z=math.sqrt(2), b_z=100), basis)
    assert len(records) == 22
    eps = [r.quasienergy_over_omega for r in records]
    assert eps == sorted(eps)
    for r in records:
        assert -1e-12 <= r.entropy <= math.log(6) + 1e-9
        assert 0 <= r.overlap_plus <= 1 and 0 <= r.overlap_minus <= 1
        assert r.overlap_plus + r.overlap_minus <= 1 + 1e-10


def test_scatter_xxz_scar_signature():
    basis = build_sector(10)
    records = scar_scatter(ModelParams(a_xy=1.3, a_z=0.4, b_z=100), basis)
    entropies = np.array([r.entropy for r in records])
    q25 = np.percentile(entropies, 25)
    for key in ("overlap_plus", "overlap_minus"):
        best = max(records, key=lambda r: getattr(r, key))
        assert best.entropy <= q25


def test_scatter_rejects_odd_n():
    with pytest.raises(ValueError):
        scar_scatter(ModelParams(), build_sector(5))
