"""Periodic data: the oscillating 2-periodic limit h_p of the dispersion and
its finite-width comparison against h of localised periodic data.

Coefficient convention.  With u^ = exp(-i pi t xi^2) f^, the part of h coming
from a pair of Fourier modes (nu1, nu2) oscillates as exp(i pi (nu2^2 - nu1^2) t),
so

    h_p(t) = sum_k c_k exp(i pi k t),
    c_k = -(2 b / ||psi||^2) sum_{nu2^2 - nu1^2 = k, nu1 != nu2}
              F^(nu1) conj(F^(nu2)) / |nu1 - nu2|^(1 + 2 delta).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .comb import divisors
from .dispersion import DispersionCurve, b1_constant, h_direct
from .errors import InconsistencyError, InvalidInput
from .spectral import ComplexField, Grid1D, check_delta, tail_mass, evolve


class QualityWarning(UserWarning):
    """Result computed outside the regime where it is guaranteed."""


@dataclass
class FourierCoeffSeq:
    """Coefficients F^(nu) for nu = -M..M."""
    coeffs: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 == 0:
            raise InvalidInput("coefficient array must have odd length 2M + 1")
        if self.normalized and abs(np.sum(np.abs(self.coeffs) ** 2) - 1.0) > 1e-10:
            raise InvalidInput("coefficients flagged normalized but sum |F^|^2 != 1")

    @property
    def M(self) -> int:
        return self.coeffs.size // 2

    @property
    def nus(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def __getitem__(self, nu: int) -> complex:
        if abs(nu) > self.M:
            return 0.0
        return self.coeffs[nu + self.M]

    @classmethod
    def from_dict(cls, values: dict, normalize: bool = False):
        M = max(abs(int(k)) for k in values)
        c = np.zeros(2 * M + 1, dtype=complex)
        for k, v in values.items():
            c[int(k) + M] = v
        if normalize:
            c /= np.sqrt(np.sum(np.abs(c) ** 2))
        return cls(c, normalize)

    def sample(self, x: np.ndarray) -> np.ndarray:
        """F(x) = sum F^(nu) exp(2 pi i nu x)."""
        out = np.zeros(np.shape(x), dtype=complex)
        for nu, c in zip(self.nus, self.coeffs):
            if c != 0:
                out += c * np.exp(2j * np.pi * nu * x)
        return out


@dataclass
class PeriodicLine:
    delta: float
    c: np.ndarray          # c_k for k = -K..K
    psi_norm_sq: float

    @property
    def K(self) -> int:
        return self.c.size // 2

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def coefficient(self, k: int) -> complex:
        return self.c[k + self.K] if abs(k) <= self.K else 0.0

    def rows(self):
        return zip(self.ks.tolist(), self.c.real.tolist(), self.c.imag.tolist())


def gaussian_comb_coeffs(eps1: float, M: int | None = None, normalize: bool = True) -> FourierCoeffSeq:
    """F^(m) = exp(-pi (eps1 m)^2), |m| <= M, optionally scaled to unit l2 norm.

    The unnormalised sequence tends to the Dirac comb (all ones) as eps1 -> 0,
    which is the normalisation used for the comb limit.
    """
    if eps1 <= 0:
        raise InvalidInput("eps1 must be positive")
    if M is None:
        M = int(math.ceil(4.0 / eps1))
    if M < 4.0 / eps1:
        warnings.warn(f"M={M} < 4/eps1: truncated tail exceeds 1e-20", QualityWarning)
    m = np.arange(-M, M + 1)
    c = np.exp(-np.pi * (eps1 * m) ** 2)
    if normalize:
        c = c / np.sqrt(np.sum(c ** 2))
    return FourierCoeffSeq(c.astype(complex), normalize)


def _prefactor(delta: float, psi_norm_sq: float) -> float:
    if psi_norm_sq <= 0:
        raise InvalidInput("psi_norm_sq must be positive")
    return -2.0 * b1_constant(delta) / psi_norm_sq


def periodic_line(F: FourierCoeffSeq, delta: float, K: int, psi_norm_sq: float = 1.0) -> PeriodicLine:
    """Coefficients c_k, |k| <= K, by enumerating k = d e with d = nu2 - nu1,
    e = nu2 + nu1 and d = e (mod 2)."""
    delta = check_delta(delta, allow_one=False)
    if K > F.M ** 2:
        warnings.warn("K > M^2: outer pairs are truncated", QualityWarning)
    pref = _prefactor(delta, psi_norm_sq)
    s = 1.0 + 2.0 * delta
    M = F.M
    c = np.zeros(2 * K + 1, dtype=complex)
    # k = 0: nu1 = -nu2
    acc = 0.0
    for nu2 in range(-M, M + 1):
        if nu2:
            acc += F[-nu2] * np.conj(F[nu2]) / abs(2 * nu2) ** s
    c[K] = pref * acc
    for k in range(1, K + 1):
        for sign in (1, -1):
            kk = sign * k
            acc = 0.0
            for d0 in divisors(k):
                for d in (d0, -d0):
                    e = kk // d
                    if (d - e) % 2:
                        continue
                    nu2 = (e + d) // 2
                    nu1 = (e - d) // 2
                    if abs(nu1) <= M and abs(nu2) <= M:
                        acc += F[nu1] * np.conj(F[nu2]) / abs(d) ** s
            c[kk + K] = pref * acc
    return PeriodicLine(delta, c, psi_norm_sq)


def periodic_line_bruteforce(F: FourierCoeffSeq, delta: float, K: int, psi_norm_sq: float = 1.0) -> PeriodicLine:
    """Same coefficients from a double loop over all mode pairs."""
    delta = check_delta(delta, allow_one=False)
    pref = _prefactor(delta, psi_norm_sq)
    nus = F.nus
    n1, n2 = np.meshgrid(nus, nus, indexing="ij")
    k = n2 ** 2 - n1 ** 2
    w = np.outer(F.coeffs, np.conj(F.coeffs))
    off = n1 != n2
    val = np.zeros(n1.shape, dtype=complex)
    val[off] = w[off] / np.abs(n1[off] - n2[off]) ** (1 + 2 * delta)
    sel = off & (np.abs(k) <= K)
    c = np.zeros(2 * K + 1, dtype=complex)
    np.add.at(c, k[sel] + K, val[sel])
    return PeriodicLine(delta, pref * c, psi_norm_sq)


def evaluate_hp(line: PeriodicLine, t):
    """h_p(t) = sum_k c_k exp(i pi k t); real by Hermitian symmetry."""
    t = np.asarray(t, dtype=float)
    # reduce modulo the period so large t keeps full phase accuracy
    tr = np.mod(t, 2.0)
    ph = np.exp(1j * np.pi * np.multiply.outer(tr, line.ks))
    vals = ph @ line.c
    imag = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if imag > 1e-8 * max(1.0, np.max(np.abs(vals.real), initial=0.0)):
        raise InconsistencyError(f"periodic line has imaginary residue {imag:.3e}")
    out = vals.real
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# finite-width comparison

def psi_profile(x, psi_sigma: float):
    return np.exp(-np.pi * (psi_sigma * np.asarray(x)) ** 2)


def psi_norm_sq(psi_sigma: float) -> float:
    return 1.0 / (psi_sigma * math.sqrt(2.0))


def psi_moment(psi_sigma: float, delta: float) -> float:
    """int |x|^(2 delta) psi(x)^2 dx for the Gaussian cut-off."""
    a = 2.0 * math.pi * psi_sigma ** 2
    return special.gamma(delta + 0.5) / a ** (delta + 0.5)


def comb_grid(eps1: float, eps2: float, psi_sigma: float = 0.25, n_points: int = 2 ** 15) -> Grid1D:
    """Largest box (up to 4 cut-off widths) allowed by the resolution dx <= eps1/8."""
    L = min(n_points * eps1 / 16.0, 4.0 / (psi_sigma * eps2))
    return Grid1D(L, n_points)


def comb_datum(eps1: float, eps2: float, psi_sigma: float, grid: Grid1D,
               F: FourierCoeffSeq | None = None) -> ComplexField:
    """psi(eps2 x) F(x), normalised on the grid; F defaults to the Gaussian comb."""
    problems = []
    if grid.half_width < 6.0 / eps2:
        problems.append(f"L={grid.half_width} < 6/eps2={6.0 / eps2}")
    if F is None:
        if grid.dx > eps1 / 8.0 * (1 + 1e-12):
            problems.append(f"dx={grid.dx} > eps1/8={eps1 / 8}")
        F = gaussian_comb_coeffs(eps1)
    if problems:
        raise InvalidInput("; ".join(problems))
    x = grid.x
    f = psi_profile(eps2 * x, psi_sigma) * F.sample(x)
    f = f / math.sqrt(grid.dx * np.sum(np.abs(f) ** 2))
    return ComplexField(grid, f)


def background_constant(psi_sigma: float, delta: float, eps2: float) -> float:
    """eps2^(-2 delta) ||psi||^-2 int |x|^(2 delta) psi^2."""
    delta = check_delta(delta)
    if delta >= 0.5:
        warnings.warn("background split is only established for delta < 1/2", QualityWarning)
    return eps2 ** (-2 * delta) * psi_moment(psi_sigma, delta) / psi_norm_sq(psi_sigma)


def renormalized_profile(eps1: float, eps2: float, psi_sigma: float, delta: float, t_grid,
                         grid: Grid1D | None = None) -> DispersionCurve:
    """(h[f_{eps1,eps2}](t) - C_eps2) / eps2 on t_grid."""
    delta = check_delta(delta)
    if delta >= 0.5:
        warnings.warn("renormalised profile is only established for delta < 1/2", QualityWarning)
    if grid is None:
        grid = comb_grid(eps1, eps2, psi_sigma)
    f = comb_datum(eps1, eps2, psi_sigma, grid)
    C = background_constant(psi_sigma, delta, eps2)
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.empty(t_grid.shape)
    qual = np.empty(t_grid.shape, dtype=bool)
    for i, t in enumerate(t_grid):
        u = evolve(f, t)
        vals[i] = (h_direct(f, delta, t) - C) / eps2
        qual[i] = tail_mass(u) < 1e-6
    return DispersionCurve(delta, t_grid, vals, "direct", qual)


def hp_for_comb(eps1: float, delta: float, psi_sigma: float, K: int | None = None) -> PeriodicLine:
    """Periodic line of the normalised Gaussian comb with the finite-width psi norm."""
    F = gaussian_comb_coeffs(eps1)
    if K is None:
        K = min(F.M ** 2, 4 * F.M * F.M)
    return periodic_line(F, delta, K, psi_norm_sq(psi_sigma))


def localized_datum(F: FourierCoeffSeq, eps: float, psi_sigma: float, grid: Grid1D) -> ComplexField:
    x = grid.x
    f = psi_profile(eps * x, psi_sigma) * F.sample(x)
    return ComplexField(grid, f / math.sqrt(grid.dx * np.sum(np.abs(f) ** 2)))


def background_curve(F: FourierCoeffSeq, psi_sigma: float, delta: float, eps: float, t_grid,
                     grid: Grid1D) -> DispersionCurve:
    """(eps/||psi||^2) sum |F^(nu)|^2 int |x|^(2 delta) |packet_nu(x, t)|^2 dx,
    each packet psi(eps x) exp(2 pi i nu x) evolved on its own."""
    delta = check_delta(delta)
    x = grid.x
    base = psi_profile(eps * x, psi_sigma)
    norm_sq = grid.dx * np.sum(base ** 2) * np.sum(np.abs(F.coeffs) ** 2)
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.zeros(t_grid.shape)
    for nu, c in zip(F.nus, F.coeffs):
        if c == 0:
            continue
        packet = ComplexField(grid, base * np.exp(2j * np.pi * nu * x))
        for i, t in enumerate(t_grid):
            vals[i] += abs(c) ** 2 * h_direct(packet, delta, t)
    return DispersionCurve(delta, t_grid, vals / norm_sq, "direct")


def offdiagonal_term(F: FourierCoeffSeq, psi_sigma: float, delta: float, eps: float, t: float,
                     grid: Grid1D, reach: float = 7.0) -> float:
    """-2 b Re sum_{nu != nu'} int int U_nu(xi) conj U_nu'(eta) / |xi - eta|^(1+2 delta),
    U_nu the transform of the normalised packet of mode nu at time t.

    Each U_nu lives within reach * psi_sigma * eps of nu, so the pair integrals
    are smooth and are summed directly on the dual grid.
    """
    from .spectral import fft_samples, propagator

    delta = check_delta(delta, allow_one=False)
    x = grid.x
    base = psi_profile(eps * x, psi_sigma)
    norm_sq = grid.dx * np.sum(base ** 2) * np.sum(np.abs(F.coeffs) ** 2)
    xi = grid.xi
    width = reach * psi_sigma * eps
    prop = propagator(grid, t)
    pieces = []
    for nu, c in zip(F.nus, F.coeffs):
        if c == 0:
            continue
        sel = np.abs(xi - nu) < width
        packet = base * np.exp(2j * np.pi * nu * x)
        U = c * prop * fft_samples(grid, packet) / math.sqrt(norm_sq)
        pieces.append((nu, xi[sel], U[sel]))
    total = 0.0
    for i, (nu, xa, ua) in enumerate(pieces):
        for j, (mu, xb, ub) in enumerate(pieces):
            if i == j:
                continue
            kern = np.abs(np.subtract.outer(xa, xb)) ** -(1 + 2 * delta)
            total += np.real(ua @ kern @ np.conj(ub))
    return float(-2.0 * b1_constant(delta) * total * grid.dxi ** 2)
