"""Fractional uncertainty principle: the constant a_delta and its minimiser.

The minimiser Q_delta is the positive ground state of
    A = D^(2 delta) + |x|^(2 delta),
with eigenvalue 2 a_delta^2 = inf ||f||_Sigma^2 over unit-norm f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import PowerLawFit, fit_power_law
from .errors import ConvergenceError, InvalidInput
from .spectral import (
    ComplexField, Grid1D, abs_power, check_delta, fft_samples, ifft_coefficients,
    sigma_norms,
)


@dataclass
class GroundState:
    delta: float
    q: ComplexField
    eigenvalue: float
    a_delta: float
    residual: float
    iterations: int
    rayleigh_history: np.ndarray = field(default=None, repr=False)

    def header(self) -> dict:
        return {"delta": self.delta, "eigenvalue": self.eigenvalue, "a_delta": self.a_delta,
                "residual": self.residual, "iterations": self.iterations}


def _multipliers(grid: Grid1D, delta: float):
    return abs_power(grid.xi, 2 * delta), abs_power(grid.x, 2 * delta)


def _apply(grid, kin, pot, v):
    return ifft_coefficients(grid, kin * fft_samples(grid, v)) + pot * v


def apply_uncertainty_operator(f: ComplexField, delta: float) -> ComplexField:
    delta = check_delta(delta)
    kin, pot = _multipliers(f.grid, delta)
    return ComplexField(f.grid, _apply(f.grid, kin, pot, f.samples))


def ground_state(delta: float, grid: Grid1D, tol: float = 1e-8, max_iter: int = 200000,
                 chebyshev_degree: int = 0, initial=None) -> GroundState:
    """Lowest eigenpair of D^(2 delta) + |x|^(2 delta) by shifted power iteration.

    The iteration multiplies by (c - A) with c = max|xi|^(2 delta) + L^(2 delta),
    an upper bound for the spectrum, so the ground state is the dominant mode.
    With ``chebyshev_degree`` = m > 0 each step instead applies the Chebyshev
    polynomial T_m of (c' - A) rescaled to damp [lambda_est + gap, c]; the
    monotone Rayleigh sequence is still checked after every outer step.
    ``initial`` (samples or a field) replaces the default Gaussian start.
    """
    delta = check_delta(delta)
    if tol < 1e-10:
        raise InvalidInput("tol must be >= 1e-10")
    kin, pot = _multipliers(grid, delta)
    real_op = lambda v: _apply(grid, kin, pot, v).real
    c = kin.max() + grid.half_width ** (2 * delta)
    dx = grid.dx

    if initial is None:
        v = np.exp(-np.pi * grid.x ** 2)
    else:
        v = np.asarray(getattr(initial, "samples", initial)).real.astype(float)
        if v.shape != grid.x.shape or not np.any(v):
            raise InvalidInput("initial vector must be a nonzero array on the grid")
    v /= math.sqrt(dx * np.dot(v, v))
    Av = real_op(v)
    lam = dx * np.dot(v, Av)
    history = [lam]
    res = math.inf
    it = 0
    lo_damp = None
    while it < max_iter:
        if chebyshev_degree and lo_damp is not None:
            v = _chebyshev_step(real_op, v, chebyshev_degree, lo_damp, c)
            it += chebyshev_degree
        else:
            v = c * v - Av
            it += 1
        v /= math.sqrt(dx * np.dot(v, v))
        Av = real_op(v)
        lam = dx * np.dot(v, Av)
        history.append(lam)
        r = Av - lam * v
        res = math.sqrt(dx * np.dot(r, r))
        if res <= tol:
            break
        if chebyshev_degree and lo_damp is None and it >= 50:
            # damp everything above the current estimate plus a safety margin
            lo_damp = lam + 0.5 * (lam + 1e-3)
    else:
        raise ConvergenceError(f"ground state not converged after {it} iterations "
                               f"(residual {res:.3e})", residual=res, iterations=it)
    i0 = grid.n_points // 2
    if v[i0] < 0:
        v = -v
    return GroundState(delta, ComplexField(grid, v.astype(complex)), float(lam),
                       float(math.sqrt(lam / 2)), float(res), it, np.array(history))


def _chebyshev_step(op, v, m, a, b):
    """T_m applied to the operator mapped so that [a, b] -> [-1, 1]."""
    e = (b - a) / 2.0
    cen = (b + a) / 2.0
    y_prev = v
    y = (op(v) - cen * v) / e
    for _ in range(2, m + 1):
        y_new = 2.0 * (op(y) - cen * y) / e - y_prev
        y_prev, y = y, y_new
        nrm = np.max(np.abs(y))
        y_prev = y_prev / nrm
        y = y / nrm
    return y


def tail_exponent(gs: GroundState, window) -> PowerLawFit:
    """Slope of log q against log |x| over window, both sides of the origin pooled."""
    g = gs.q.grid
    lo, hi = window
    if not (0 < lo < hi <= g.half_width):
        raise InvalidInput("window outside the grid")
    flags = []
    if lo < 0.15 * g.half_width or hi > 0.45 * g.half_width:
        flags.append("window outside [0.15 L, 0.45 L]")
    x = np.abs(g.x)
    q = np.abs(gs.q.samples.real)
    sel = (x >= lo) & (x <= hi) & (g.x != 0)
    xs = x[sel]
    qs = q[sel]
    fit = fit_power_law(xs, qs, (lo, hi))
    fit.flags.extend(flags)
    if fit.r_squared < 0.9 or not np.all(qs > 0):
        fit.flags.append("not-power-law")
    # curvature test: a genuine power law has the same slope on both halves
    mid = math.sqrt(lo * hi)
    try:
        s1 = fit_power_law(xs, qs, (lo, mid)).slope
        s2 = fit_power_law(xs, qs, (mid, hi)).slope
        if abs(s1 - s2) > 0.5 * max(1.0, abs(fit.slope)):
            fit.flags.append("not-power-law")
    except InvalidInput:
        pass
    return fit


def balance_scale(f: ComplexField, delta: float) -> float:
    sn = sigma_norms(f, delta)
    if sn.x_weighted == 0 or sn.d_delta == 0:
        raise InvalidInput("both weighted seminorms must be positive")
    # f_lam scales the x-weighted norm by lam^-delta and the derivative norm by lam^delta
    return (sn.x_weighted / sn.d_delta) ** (1.0 / (2 * delta))


def balance_rescale(f: ComplexField, delta: float) -> ComplexField:
    """f_lam(x) = lam^(1/2) f(lam x) with the two seminorms made equal.

    The dilation is applied in whichever domain compresses the function, by
    band-limited (Fourier) interpolation, so the result is accurate to the
    spectral resolution of the grid.
    """
    from .spectral import dilate_spectral

    lam = balance_scale(f, delta)
    return dilate_spectral(f, lam)


def uncertainty_product(f: ComplexField, delta: float, cusp_correction: bool = False) -> float:
    """||x|^delta f|| ||D^delta f|| / ||f||^2 (discrete sums, matching the operator)."""
    sn = sigma_norms(f, delta, cusp_correction=cusp_correction)
    if sn.l2 == 0:
        raise InvalidInput("zero field")
    return sn.x_weighted * sn.d_delta / sn.l2 ** 2


# ---------------------------------------------------------------------------
# independent variational oracle

def _hermite_functions(x: np.ndarray, n: int, scale: float = 1.0) -> np.ndarray:
    """Orthonormal Hermite functions adapted to the exp(-2 pi i x xi) transform,
    dilated by ``scale``; rows 0..n-1.  They satisfy H_k^ = (-i)^k H_k at scale 1."""
    y = math.sqrt(2 * math.pi) * x * scale
    out = np.empty((n, x.size))
    out[0] = math.pi ** -0.25 * np.exp(-y * y / 2)
    if n > 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for k in range(2, n):
        out[k] = math.sqrt(2.0 / k) * y * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out * (2 * math.pi) ** 0.25 * math.sqrt(scale)


def hermite_rayleigh_ritz(delta: float, n_basis: int = 50, scale: float = 1.0,
                          n_quad: int = 200001, x_max: float | None = None) -> float:
    """Smallest eigenvalue of D^(2 delta) + |x|^(2 delta) restricted to the span
    of the first ``n_basis`` even Hermite functions (dilated by ``scale``).

    The potential matrix is integrated on the substitution x = u^3, which
    smooths the |x|^(2 delta) cusp; the kinetic matrix follows from the same
    integrals because the basis diagonalises the Fourier transform.
    """
    delta = check_delta(delta)
    ks = 2 * np.arange(n_basis)
    if x_max is None:
        x_max = (math.sqrt(2 * ks[-1] + 1) / math.sqrt(2 * math.pi) + 6.0) / min(scale, 1 / scale)
    u = np.linspace(-x_max ** (1 / 3), x_max ** (1 / 3), n_quad)
    du = u[1] - u[0]
    x = u ** 3
    jac = 3 * u ** 2
    w = np.abs(x) ** (2 * delta) * jac * du

    def potential(sc):
        H = _hermite_functions(x, ks[-1] + 1, sc)[ks]
        return (H * w) @ H.T

    V = potential(scale)
    # the transform of H_k(scale x) sqrt(scale) is (-i)^k H_k(xi/scale)/sqrt(scale)
    Vk = potential(1.0 / scale)
    sign = (-1.0) ** (ks // 2)
    K = Vk * np.outer(sign, sign)
    A = V + K
    A = 0.5 * (A + A.T)
    return float(np.linalg.eigvalsh(A)[0])


def variational_eigenvalue(delta: float, n_basis: int = 50, scales=None) -> float:
    """Best Rayleigh-Ritz bound over a small set of basis dilations."""
    if scales is None:
        scales = np.geomspace(0.6, 1.6, 11)
    return min(hermite_rayleigh_ritz(delta, n_basis, s) for s in scales)
