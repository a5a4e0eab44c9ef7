"""Closed-form stroboscopic dynamics for Ising and zero-field XX couplings.

Everything here lives in the largest sector ``j = N/2`` and uses the
amplitude convention of the simulator: the ideal kick contributes the
global factor ``g = (-i)^(N+1)`` per cycle, and the kick error enters as
``U_F(theta) = exp(i theta P / 2) U_F`` with
``P = I_t^+ + I_t^- + sigma_0^x``, so first-order corrections carry the
prefactor ``+i theta / 2``.

Quantum numbers ``m`` are plain floats (half-integers allowed) in this
module; they are converted to doubled integers only when labelling
basis states.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .operators import ModelParams, SectorBasis, Sigma

__all__ = [
    "LadderCoefficient",
    "ladder",
    "pulse_phase",
    "ising_exact",
    "ising_first_order",
    "ising_robustness",
    "XXAmplitudes",
    "xx_exact",
    "xx_two_cycle_first_order",
    "geometric_sum",
    "amplitudes_to_vector",
]


@dataclass(frozen=True)
class LadderCoefficient:
    alpha_plus: float
    alpha_minus: float


def _alpha(n_satellites: int, m: float) -> float:
    # alpha_m^+ ; vanishes (not NaN) outside the multiplet edge
    return math.sqrt(max(n_satellites * (n_satellites + 2) / 4 - m * (m + 1), 0.0))


def ladder(n_satellites: int, m: float) -> LadderCoefficient:
    """``alpha_m^{+-} = sqrt(N(N+2)/4 - m(m +- 1))``."""
    return LadderCoefficient(_alpha(n_satellites, m), _alpha(n_satellites, -m))


def pulse_phase(n_satellites: int) -> complex:
    """Global factor of one ideal pi kick on the largest sector."""
    return (-1j) ** ((n_satellites + 1) % 4)


def _label(m: float, sigma: Sigma) -> tuple[int, Sigma]:
    return int(round(2 * m)), sigma


def _check_m(n_satellites: int, m: float) -> None:
    tm = 2 * m
    if abs(tm - round(tm)) > 1e-12 or abs(tm) > n_satellites or (round(tm) - n_satellites) % 2:
        raise ValueError(f"m={m} is not a valid projection for N={n_satellites}")


def ising_exact(m: float, sigma, n_cycles: int, params: ModelParams,
                n_satellites: int) -> tuple[tuple[int, Sigma], complex]:
    """State after ``n`` ideal cycles from ``|m sigma>`` with Ising coupling.

    Returns ``((twice_m, sigma), amplitude)``: ``U_F^n |m sigma>`` equals
    ``amplitude`` times that basis state.
    """
    if params.a_xy != 0:
        raise ValueError("ising_exact requires a_xy == 0")
    if params.theta_e != 0 or params.theta_n != 0:
        raise ValueError("ising_exact describes ideal kicks (theta = 0)")
    if n_cycles < 0:
        raise ValueError("n_cycles must be nonnegative")
    _check_m(n_satellites, m)
    sigma = Sigma.parse(sigma)
    s = int(sigma)
    t = params.period
    g = pulse_phase(n_satellites)
    p, odd = divmod(n_cycles, 2)
    phase = p * params.a_z * m * t * s
    if odd:
        phi = (params.a_z * m + params.b_z) * t * s / 2 + params.b_nz * m * t
        return _label(-m, sigma.flipped), g**n_cycles * cmath.exp(-1j * (phase + phi))
    return _label(m, sigma), g**n_cycles * cmath.exp(-1j * phase)


def geometric_sum(x: complex, start: int, stop: int, step: int = 1) -> complex:
    """``sum x**r`` for ``r = start, start+step, ... <= stop`` in closed form."""
    if stop < start:
        return 0j
    count = (stop - start) // step + 1
    ratio = x**step
    if abs(ratio - 1) < 1e-12:
        return x**start * count
    return x**start * (1 - ratio**count) / (1 - ratio)


def ising_first_order(m: float, two_p: int, theta: float, params: ModelParams,
                      n_satellites: int, sigma="up") -> dict:
    """Zeroth plus first order in ``theta`` of ``U(2pT, theta) |m up>``, Ising coupling.

    Returns ``{(twice_m, sigma): amplitude}`` on ``|m up>``, ``|m down>`` and
    ``|m+-1 up>``.  Each correction is a sum over the kick slot ``r``;
    even ``r`` and odd ``r`` contribute separate geometric series.
    """
    if params.a_xy != 0:
        raise ValueError("ising_first_order requires a_xy == 0")
    if Sigma.parse(sigma) is not Sigma.UP:
        raise ValueError("the first-order Ising result is only derived for sigma = up")
    if two_p < 0 or two_p % 2:
        raise ValueError("ising_first_order needs an even, nonnegative cycle count")
    _check_m(n_satellites, m)
    p = two_p // 2
    t = params.period
    a_t = params.a_z * t
    base = pulse_phase(n_satellites) ** two_p * cmath.exp(-1j * p * a_t * m)

    out = {_label(m, Sigma.UP): base}
    if p == 0:
        return out
    shift = cmath.exp(1j * params.b_nz * t)
    x_m = cmath.exp(1j * a_t * m)
    down = geometric_sum(x_m, 0, two_p - 2, 2) + cmath.exp(-1j * params.b_z * t) * geometric_sum(x_m, 1, two_p - 1, 2)
    x_half = cmath.exp(-1j * a_t / 2)
    raise_ = geometric_sum(x_half, 0, two_p - 2, 2) + shift * geometric_sum(x_half, 1, two_p - 1, 2)
    lower = geometric_sum(1 / x_half, 0, two_p - 2, 2) + geometric_sum(1 / x_half, 1, two_p - 1, 2) / shift

    lad = ladder(n_satellites, m)
    pref = 1j * theta / 2 * base
    out[_label(m, Sigma.DOWN)] = pref * down
    if m + 1 <= n_satellites / 2:
        out[_label(m + 1, Sigma.UP)] = pref * lad.alpha_plus * raise_
    if m - 1 >= -n_satellites / 2:
        out[_label(m - 1, Sigma.UP)] = pref * lad.alpha_minus * lower
    return out


def ising_robustness(a_z: float, omega: float, tol: float = 1e-9) -> bool:
    """True when ``A_z / omega`` is an odd integer (first-order corrections vanish)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    r = a_z / omega
    k = round(r)
    return abs(r - k) <= tol and k % 2 == 1


@dataclass(frozen=True)
class XXAmplitudes:
    """``U_F^n |m up> = beta |first> + gamma |second>``."""

    n: int
    beta: complex
    gamma: complex
    first: tuple[int, Sigma]
    second: tuple[int, Sigma]


def _xx_checks(params: ModelParams | None, n_satellites: int, m: float):
    if params is not None:
        if params.b_z != 0:
            raise ValueError("the XX oracle requires B_z == 0")
        if params.a_z != 0:
            raise ValueError("the XX oracle requires A_z == 0")
        if params.b_nz != 0:
            raise ValueError("the XX oracle requires B^n_z == 0")
    _check_m(n_satellites, m)


def _cs(a_t: float, n_satellites: int, m: float) -> tuple[float, float]:
    angle = a_t * _alpha(n_satellites, m)
    return math.cos(angle), math.sin(angle)


def xx_exact(m: float, n_cycles: int, a: float, period: float, n_satellites: int,
             params: ModelParams | None = None) -> list[XXAmplitudes]:
    """Amplitudes for ``n = 0 .. n_cycles`` from ``|m up>`` under ``A (I+ S- + I- S+)``.

    Even cycles stay in ``{|m up>, |m+1 down>}``; odd cycles land in
    ``{|-m down>, |-m-1 up>}``.  The two-cycle map is iterated with the
    even recursion and the odd cycles follow from one more kick.
    """
    _xx_checks(params, n_satellites, m)
    c, s = _cs(a * period, n_satellites, m)
    g = pulse_phase(n_satellites)
    beta2 = g * g * (c * c - s * s)
    gamma2 = g * g * (-2j * s * c)
    even_labels = (_label(m, Sigma.UP), _label(m + 1, Sigma.DOWN))
    odd_labels = (_label(-m, Sigma.DOWN), _label(-m - 1, Sigma.UP))

    out = []
    beta, gamma = 1.0 + 0j, 0j
    for n in range(n_cycles + 1):
        if n % 2 == 0:
            if n >= 2:
                beta, gamma = beta * beta2 + gamma * gamma2, beta * gamma2 + gamma * beta2
            out.append(XXAmplitudes(n, beta, gamma, *even_labels))
        else:
            out.append(XXAmplitudes(
                n, g * (beta * c - 1j * gamma * s), g * (gamma * c - 1j * beta * s), *odd_labels,
            ))
    return out


def xx_two_cycle_first_order(m: float, theta: float, a: float, period: float,
                             n_satellites: int) -> dict:
    """``U(2T, theta) |m up>`` to first order in ``theta`` for zero-field XX.

    Returns ``{"zeroth": {label: amp}, "first": {label: G}}`` with the full
    amplitude ``zeroth + i (theta/2) * first``.  The ``G`` coefficients sum
    the two kick-slot terms ``P U_F^2`` and ``U_F P U_F``.
    """
    _xx_checks(None, n_satellites, m)
    a_t = a * period
    g2 = pulse_phase(n_satellites) ** 2

    def cs(k):
        return _cs(a_t, n_satellites, k)

    def al(k):
        return _alpha(n_satellites, k)

    c0, s0 = cs(m)
    cm1, sm1 = cs(m - 1)
    cp1, sp1 = cs(m + 1)
    beta2 = c0 * c0 - s0 * s0
    gamma2 = -2j * s0 * c0

    # U_F P U_F |m up>
    upu = {
        (m - 1, Sigma.UP): c0 * al(m - 1) * cm1 - 1j * c0 * sm1 - s0 * al(m) * sm1,
        (m, Sigma.DOWN): -1j * c0 * al(m - 1) * sm1 + c0 * cm1 - 1j * s0 * al(m) * cm1,
        (m + 1, Sigma.UP): c0 * al(m) * cp1 - s0 * al(m + 1) * sp1 - 1j * s0 * cp1,
        (m + 2, Sigma.DOWN): -1j * c0 * al(m) * sp1 - 1j * s0 * al(m + 1) * cp1 - s0 * sp1,
    }
    # P U_F^2 |m up>
    pu2 = {
        (m - 1, Sigma.UP): beta2 * al(m - 1),
        (m, Sigma.DOWN): beta2 + gamma2 * al(m),
        (m + 1, Sigma.UP): beta2 * al(m) + gamma2,
        (m + 2, Sigma.DOWN): gamma2 * al(m + 1),
    }
    j = n_satellites / 2
    first = {}
    for key in upu:
        if abs(key[0]) <= j:
            first[_label(*key)] = g2 * (upu[key] + pu2[key])
    zeroth = {_label(m, Sigma.UP): g2 * beta2, _label(m + 1, Sigma.DOWN): g2 * gamma2}
    return {"zeroth": zeroth, "first": first}


def amplitudes_to_vector(amps: dict, basis: SectorBasis) -> np.ndarray:
    """Dense sector vector from ``{(twice_m, sigma): amplitude}``."""
    psi = np.zeros(basis.dim, dtype=complex)
    for (tm, sigma), value in amps.items():
        psi[basis.index(tm, sigma)] += value
    return psi
