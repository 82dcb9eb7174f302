"""Arithmetic of the Dirac-comb limit: zeta values, divisor sums, the
rational atoms carrying the periodic dispersion measure, and pairings
against test functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dispersion import b1_constant
from .errors import DomainError, InconsistencyError, InvalidInput
from .spectral import check_delta

# Bernoulli numbers B_2 .. B_20
_BERNOULLI = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
              -3617 / 510, 43867 / 798, -174611 / 330]


def _zeta_em(s: float, n: int = 20) -> float:
    """Euler-Maclaurin evaluation, valid for real s > -19, s != 1."""
    head = math.fsum(k ** -s for k in range(1, n))
    tail = n ** (1 - s) / (s - 1) + 0.5 * n ** -s
    rising = s
    power = n ** (-s - 1)
    fact = 2.0
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / fact * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= n * n
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail


def zeta_eval(s: float) -> float:
    if not s > 1:
        raise DomainError("zeta_eval needs s > 1")
    return _zeta_em(float(s))


def eta_eval(s: float) -> float:
    """Alternating zeta -sum (-1)^n n^-s = (1 - 2^(1-s)) zeta(s), s > 0."""
    if not s > 0:
        raise DomainError("eta_eval needs s > 0")
    if s == 1:
        return math.log(2.0)
    return (1.0 - 2.0 ** (1.0 - s)) * _zeta_em(float(s))


def factorize(n: int) -> dict:
    n = abs(int(n))
    if n == 0:
        raise InvalidInput("cannot factor 0")
    out = {}
    while n % 2 == 0:
        out[2] = out.get(2, 0) + 1
        n //= 2
    p = 3
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_sigma(n: int, s: float) -> float:
    """sigma_s(n) = sum_{d | n} d^s."""
    total = 1.0
    for p, a in factorize(n).items():
        total *= math.fsum(float(p) ** (s * j) for j in range(a + 1))
    return total


def divisors(n: int) -> list:
    divs = [1]
    for p, a in factorize(n).items():
        divs = [d * p ** j for d in divs for j in range(a + 1)]
    return sorted(divs)


def pair_sum_bruteforce(k: int, delta: float, M: int | None = None) -> float:
    """sum over m1 != m2 with m1^2 - m2^2 = k of |m1 - m2|^-(1 + 2 delta)."""
    delta = check_delta(delta)
    k = int(k)
    if M is None:
        M = abs(k) // 2 + 2
    m = np.arange(-M, M + 1)
    m1, m2 = np.meshgrid(m, m, indexing="ij")
    hit = (m1 * m1 - m2 * m2 == k) & (m1 != m2)
    d = np.abs(m1[hit] - m2[hit]).astype(float)
    return float(math.fsum(d ** -(1 + 2 * delta)))


def divisor_coefficient(k: int, delta: float) -> float:
    delta = check_delta(delta)
    k = abs(int(k))
    if k == 0:
        raise InvalidInput("k must be nonzero")
    s = -1 - 2 * delta
    if k % 2:
        return 2.0 * divisor_sigma(k, s)
    if k % 4 == 2:
        return 0.0
    return 2.0 ** (-2 * delta) * divisor_sigma(k // 4, s)


# ---------------------------------------------------------------------------
# atoms

def class_constant(q: int, delta: float, psi_norm_sq: float = 1.0) -> float:
    """Signed numerator a(q) with weight a(q) / q^(2 + 2 delta); depends on q mod 4."""
    Z = 2.0 * b1_constant(delta) / psi_norm_sq * zeta_eval(2 * (1 + delta))
    r = q % 4
    if r % 2:
        return -Z
    if r == 2:
        return 2.0 * (2.0 ** (1 + 2 * delta) - 1.0) * Z
    return -(2.0 ** (2 * (1 + delta))) * Z


def class_constants(delta: float, psi_norm_sq: float = 1.0) -> np.ndarray:
    """Numerators indexed by q mod 4."""
    return np.array([class_constant(r if r else 4, delta, psi_norm_sq) for r in range(4)])


def atom_weight(p: int, q: int, delta: float, psi_norm_sq: float = 1.0) -> float:
    delta = check_delta(delta, allow_one=False)
    if q < 1 or math.gcd(p, q) != 1:
        raise InvalidInput(f"{p}/{q} is not a reduced fraction")
    return class_constant(q, delta, psi_norm_sq) / q ** (2 * (1 + delta))


def weights_for(q: np.ndarray, delta: float, psi_norm_sq: float = 1.0) -> np.ndarray:
    q = np.asarray(q)
    return class_constants(delta, psi_norm_sq)[q % 4] / q.astype(float) ** (2 * (1 + delta))


def reduced_numerators(q: int) -> np.ndarray:
    if q == 1:
        return np.array([0])
    p = np.arange(1, q)
    return p[np.gcd(p, q) == 1]


@lru_cache(maxsize=4)
def farey_arrays(q_max: int):
    """All reduced p/q in [0, 1) with q <= q_max, in increasing order.

    Sorting uses the floating key p/q, which is exact here because distinct
    fractions differ by at least 1/q_max^2; the order is then certified in
    integer arithmetic through the neighbour identity p' q - p q' = 1.
    """
    if q_max < 1:
        raise InvalidInput("q_max must be >= 1")
    ps, qs = [], []
    for q in range(1, q_max + 1):
        p = reduced_numerators(q)
        ps.append(p.astype(np.int64))
        qs.append(np.full(p.size, q, dtype=np.int64))
    p = np.concatenate(ps)
    q = np.concatenate(qs)
    order = np.argsort(p / q, kind="stable")
    p, q = p[order], q[order]
    nxt_p = np.append(p[1:], 1)
    nxt_q = np.append(q[1:], 1)
    if not np.all(nxt_p * q - p * nxt_q == 1):
        raise InconsistencyError("Farey order certificate failed")
    p.setflags(write=False)
    q.setflags(write=False)
    return p, q


@dataclass
class PurePointMeasure:
    delta: float
    q_max: int
    p: np.ndarray
    q: np.ndarray
    weights: np.ndarray
    psi_norm_sq: float = 1.0

    @property
    def positions(self) -> np.ndarray:
        return self.p / self.q

    def __len__(self):
        return self.p.size

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def rows(self):
        return zip(self.p.tolist(), self.q.tolist(), self.weights.tolist())


def comb_measure(delta: float, q_max: int, psi_norm_sq: float = 1.0) -> PurePointMeasure:
    delta = check_delta(delta, allow_one=False)
    p, q = farey_arrays(int(q_max))
    return PurePointMeasure(delta, int(q_max), p, q, weights_for(q, delta, psi_norm_sq), psi_norm_sq)


def totient_count(q_max: int) -> int:
    """1 + sum_{q=2}^{q_max} phi(q) by a sieve."""
    phi = np.arange(q_max + 1)
    for p in range(2, q_max + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return int(1 + phi[2:].sum())


# ---------------------------------------------------------------------------
# pairings

def weak_pairing_line(line, phi_hat, variable: str = "t") -> complex:
    """Pairing of the periodic line with a test function given by its transform.

    With variable "t" the pairing is int h_p(2t) phi(t) dt = sum_k c_k phi^(-k),
    the normalisation under which the comb measure is stated; with "s" it is
    int h_p(s) phi(s) ds = sum_k c_k phi^(-k/2).
    """
    k = line.ks
    if variable == "t":
        arg = -k.astype(float)
    elif variable == "s":
        arg = -k / 2.0
    else:
        raise InvalidInput("variable must be 't' or 's'")
    return complex(np.sum(line.c * phi_hat(arg)))


def weak_pairing_measure(m: PurePointMeasure, phi, periods: int = 3) -> float:
    """sum_atoms w sum_j phi(p/q + j), |j| <= periods (the measure is 1-periodic)."""
    t = m.positions
    vals = np.zeros_like(t)
    for j in range(-periods, periods + 1):
        vals += phi(t + j)
    return float(math.fsum(m.weights * vals))


def gaussian_test_function(center: float, width: float):
    """phi(t) = exp(-pi ((t - center)/width)^2) together with its transform."""
    def phi(t):
        return np.exp(-np.pi * ((np.asarray(t) - center) / width) ** 2)

    def phi_hat(xi):
        xi = np.asarray(xi, dtype=float)
        return width * np.exp(-np.pi * (width * xi) ** 2) * np.exp(-2j * np.pi * center * xi)

    return phi, phi_hat
