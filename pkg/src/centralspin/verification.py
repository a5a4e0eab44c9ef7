"""End-to-end self-checks: closed-form oracles and engine cross-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fullbasis import FullBasisModel, full_floquet, sector_embedding
from .operators import ModelParams, Sigma, build_floquet, build_sector
from .oracles import (
    amplitudes_to_vector,
    ising_exact,
    ising_first_order,
    xx_exact,
    xx_two_cycle_first_order,
)

__all__ = ["CheckResult", "run_all", "format_table"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual <= self.tolerance)


def _random_m(rng, n_satellites: int) -> float:
    return (n_satellites - 2 * int(rng.integers(0, n_satellites + 1))) / 2


def check_ising_oracle(draws: int = 10, n_cycles: int = 200, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(2, 9))
        params = ModelParams(a_z=rng.uniform(0.1, 5), b_z=rng.uniform(-10, 10), omega=rng.uniform(0.5, 3))
        basis = build_sector(n)
        m = _random_m(rng, n)
        sigma = Sigma.UP if rng.random() < 0.5 else Sigma.DOWN
        u = build_floquet(params, basis)
        states = np.empty((n_cycles + 1, basis.dim), dtype=complex)
        states[0] = basis.basis_state(int(2 * m), sigma)
        for k in range(n_cycles):
            states[k + 1] = u @ states[k]
        expected = np.zeros_like(states)
        for k in range(n_cycles + 1):
            label, amp = ising_exact(m, sigma, k, params, n)
            expected[k, basis.index(*label)] = amp
        worst = max(worst, float(np.max(np.abs(states - expected))))
    return CheckResult("ising oracle", worst, 1e-10)


def check_xx_oracle(draws: int = 10, n_cycles: int = 200, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(2, 9))
        params = ModelParams(a_xy=rng.uniform(0.1, 5), omega=rng.uniform(0.5, 3))
        basis = build_sector(n)
        m = _random_m(rng, n)
        u = build_floquet(params, basis)
        psi = basis.basis_state(int(2 * m), Sigma.UP)
        for amps in xx_exact(m, n_cycles, params.a_xy, params.period, n):
            expected = amplitudes_to_vector({amps.first: amps.beta}, basis)
            if abs(amps.second[0]) <= n:
                expected += amplitudes_to_vector({amps.second: amps.gamma}, basis)
            worst = max(worst, float(np.max(np.abs(psi - expected))))
            psi = u @ psi
    return CheckResult("xx oracle", worst, 1e-10)


def _first_order_ratio(simulate, oracle, thetas=(1e-2, 5e-3)) -> float:
    res = [np.linalg.norm(simulate(t) - oracle(t)) for t in thetas]
    return float(res[0] / res[1])


def check_first_order(n_satellites: int = 5) -> list[CheckResult]:
    basis = build_sector(n_satellites)
    m = 0.5
    ising = ModelParams(a_z=1.3, b_z=0.7, omega=1.0)

    def sim_ising(theta):
        u = build_floquet(ModelParams.with_theta(theta, a_z=ising.a_z, b_z=ising.b_z), basis)
        return u @ u @ basis.basis_state(1, Sigma.UP)

    def orc_ising(theta):
        return amplitudes_to_vector(ising_first_order(m, 2, theta, ising, n_satellites), basis)

    a, period = 0.7, 1.0
    xx = ModelParams(a_xy=a, omega=2 * math.pi / period)

    def sim_xx(theta):
        u = build_floquet(ModelParams.with_theta(theta, a_xy=a, omega=xx.omega), basis)
        return u @ u @ basis.basis_state(1, Sigma.UP)

    def orc_xx(theta):
        terms = xx_two_cycle_first_order(m, theta, a, period, n_satellites)
        psi = amplitudes_to_vector(terms["zeroth"], basis)
        return psi + 1j * theta / 2 * amplitudes_to_vector(terms["first"], basis)

    out = []
    for name, sim, orc in (("ising first order", sim_ising, orc_ising), ("xx first order", sim_xx, orc_xx)):
        ratio = _first_order_ratio(sim, orc)
        out.append(CheckResult(f"{name} (|ratio - 4|)", abs(ratio - 4.0), 0.5))
    return out


def check_cross_engine(n_satellites: int = 5, n_cycles: int = 100) -> CheckResult:
    worst = 0.0
    couplings = {"ising": (0.0, 1.3), "xx": (0.9, 0.0), "heisenberg": (1.1, 1.1), "xxz": (0.8, 1.7)}
    for a_xy, a_z in couplings.values():
        for theta in (0.0, 0.1 * math.pi):
            params = ModelParams.with_theta(theta, a_xy=a_xy, a_z=a_z, b_z=0.4)
            u_full = full_floquet(FullBasisModel.homogeneous(params, n_satellites))
            for twice_j in range(n_satellites % 2, n_satellites + 1, 2):
                basis = build_sector(n_satellites, twice_j)
                emb = sector_embedding(n_satellites, twice_j)
                u_sec = build_floquet(params, basis)
                psi_sec = np.ones(basis.dim, dtype=complex) / math.sqrt(basis.dim)
                psi_full = emb @ psi_sec
                for _ in range(n_cycles):
                    psi_sec = u_sec @ psi_sec
                    psi_full = u_full @ psi_full
                worst = max(worst, 1.0 - abs(np.vdot(emb @ psi_sec, psi_full)))
    return CheckResult(f"cross-engine N={n_satellites} (1 - overlap)", worst, 1e-10)


def run_all() -> list[CheckResult]:
    return [check_ising_oracle(), check_xx_oracle(), *check_first_order(), check_cross_engine()]


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'max residual':>12}  {'tolerance':>9}  result"]
    for r in results:
        lines.append(
            f"{r.name:<{width}}  {r.max_residual:12.3e}  {r.tolerance:9.1e}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)
