"""The dispersion functional h(t) = int |x|^(2 delta) |u(x, t)|^2 dx.

Three independent numerical routes are provided:

* ``h_direct``    evolve on the grid, then weight by |x|^(2 delta);
* ``h_large_t``   |t|^(2 delta) ||D^delta g_t||^2 with the chirped datum
                  g_t = f exp(i pi y^2 / t), i.e. the far-field form;
* ``h_seminorm``  the Gagliardo-type double integral over frequency pairs
                  b * sum |U(xi) - U(eta)|^2 / |xi - eta|^(1 + 2 delta).

Exponent estimators for h and its Fourier transform live here as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, InvalidInput
from .spectral import (
    ComplexField, Grid1D, abs_power, check_delta, evolve, fft_samples,
    fractional_derivative_norm, ifft_coefficients, l2_norm, propagator,
    sigma_norms, tail_mass, weighted_quadrature,
)

METHODS = ("direct", "large_t", "seminorm")
DIRECT_TAIL_TOL = 1e-6


def b_constant(n: int, delta: float) -> float:
    """Normalising constant of the pair-difference representation of |x|^(2 delta)."""
    if n < 1 or int(n) != n:
        raise InvalidInput("n must be a positive integer")
    if not 0.0 < delta < 1.0:
        raise DomainError("b constant needs 0 < delta < 1")
    return (special.gamma((n + 2 * delta) / 2)
            / (2 * math.pi ** (n / 2 + 2 * delta) * abs(special.gamma(-delta))))


def b1_constant(delta: float) -> float:
    """One-dimensional constant written through Gamma(2 delta) / Gamma(delta)."""
    if not 0.0 < delta < 1.0:
        raise DomainError("b constant needs 0 < delta < 1")
    return (special.gamma(2 * delta)
            / ((2 * math.pi) ** (2 * delta) * abs(special.gamma(-delta)) * special.gamma(delta)))


def gaussian_reference(delta: float, t, h0: float):
    if h0 < 0:
        raise InvalidInput("h0 must be nonnegative")
    return h0 * (1.0 + np.asarray(t, dtype=float) ** 2) ** delta


# ---------------------------------------------------------------------------
# routes

def h_direct(f: ComplexField, delta: float, t: float) -> float:
    delta = check_delta(delta)
    u = evolve(f, t)
    g = f.grid
    return weighted_quadrature(np.abs(u.samples) ** 2, g.x, g.dx, 2 * delta)


def h_direct_quality(f: ComplexField, t: float) -> bool:
    """True when the evolved field keeps its mass inside [-L/2, L/2]."""
    return tail_mass(evolve(f, t)) < DIRECT_TAIL_TOL


def h_large_t(f: ComplexField, delta: float, t: float) -> float:
    delta = check_delta(delta)
    if t == 0:
        raise DomainError("far-field route needs t != 0")
    g = f.grid
    chirped = ComplexField(g, f.samples * np.exp(1j * np.pi * g.x ** 2 / t))
    return abs(t) ** (2 * delta) * fractional_derivative_norm(chirped, delta) ** 2


def h_large_t_quality(f: ComplexField, t: float, mass_tol: float = 1e-10) -> bool:
    """The chirp exp(i pi y^2/t) has local frequency |y|/|t|; it must stay
    below the Nyquist frequency wherever f carries mass."""
    g = f.grid
    w = np.abs(f.samples) ** 2
    bad = np.abs(g.x) / abs(t) > 0.9 * g.xi_max
    total = w.sum()
    return total == 0 or w[bad].sum() / total < mass_tol


def _outer_lattice_weights(n: int, s: float) -> np.ndarray:
    """sum over integer m with j + m outside [0, n) of |m|^(-s), per j."""
    j = np.arange(n)
    return special.zeta(s, n - j) + special.zeta(s, j + 1)


_D1_STENCIL = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _central_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """Eighth-order central difference; v is taken to vanish beyond the ends."""
    return np.convolve(v, _D1_STENCIL[::-1], mode="same") / h


def h_seminorm(f: ComplexField, delta: float, t: float,
               diagonal_correction: bool = True, band_completion: bool = True) -> float:
    """Frequency-pair double sum, diagonal cell excluded.

    Pairs are grouped by lag m = j - k so the sum over all N^2 pairs costs an
    autocorrelation.  Partners falling outside the sampled band (where the
    transform is taken to vanish) are summed exactly with Hurwitz zeta values.
    With ``diagonal_correction`` the first two terms of the generalised
    Euler-Maclaurin expansion for the omitted diagonal are added back, with
    derivatives of U taken by finite differences along the dual grid.
    """
    delta = check_delta(delta, allow_one=False)
    g = f.grid
    n = g.n_points
    h = g.dxi
    s = 1.0 + 2.0 * delta
    U = propagator(g, t) * fft_samples(g, f.samples)
    p = np.abs(U) ** 2

    # D(m) = sum_j |U_{j+m} - U_j|^2 for m = 1..n-1
    nfft = 1 << (2 * n - 1).bit_length()
    Uh = np.fft.fft(U, nfft)
    corr = np.fft.ifft(np.abs(Uh) ** 2)[1:n].real   # sum_j U_{j+m} conj(U_j), real part
    cp = np.concatenate([[0.0], np.cumsum(p)])
    m = np.arange(1, n)
    tails = cp[n] - cp[m]          # sum_{j >= m} p_j
    heads = cp[n - m]              # sum_{j < n-m} p_j
    D = tails + heads - 2.0 * corr
    inner = 2.0 * np.sum(D * m ** (-s))
    outer = 2.0 * np.sum(p * _outer_lattice_weights(n, s)) if band_completion else 0.0
    total = h ** (1.0 - 2.0 * delta) * (inner + outer)
    if diagonal_correction:
        # per row the summand is |v|^beta G(v), G(v) = |U(xi+v) - U(xi)|^2 / v^2;
        # the lattice sum without v = 0 exceeds the integral by
        # sum_k 2 zeta(-beta - 2k) G^(2k)(0) / (2k)! h^(1 + beta + 2k)
        beta = 1.0 - 2.0 * delta
        d1 = _central_derivative(U, h)
        d2 = _central_derivative(d1, h)
        d3 = _central_derivative(d2, h)
        g0 = np.sum(np.abs(d1) ** 2)
        g2 = np.sum(np.abs(d2) ** 2 / 4.0 + np.real(d1 * np.conj(d3)) / 3.0)
        total -= h * (2.0 * special.zeta(-beta) * g0 * h ** (1.0 + beta)
                      + 2.0 * special.zeta(-beta - 2.0) * g2 * h ** (3.0 + beta))
    return float(b_constant(1, delta) * total)


def h_seminorm_pairs(f: ComplexField, delta: float, t: float) -> float:
    """Plain O(N^2) double loop over in-band pairs (reference implementation)."""
    delta = check_delta(delta, allow_one=False)
    g = f.grid
    U = propagator(g, t) * fft_samples(g, f.samples)
    xi = g.xi
    total = 0.0
    for j in range(g.n_points):
        d = np.abs(xi - xi[j])
        d[j] = np.inf
        total += np.sum(np.abs(U - U[j]) ** 2 / d ** (1 + 2 * delta))
    return float(b_constant(1, delta) * total * g.dxi ** 2)


_ROUTES = {"direct": h_direct, "large_t": h_large_t, "seminorm": h_seminorm}


def h_auto(f: ComplexField, delta: float, t: float) -> float:
    """Direct route while the wave fits the box, far-field route afterwards."""
    if t == 0 or h_direct_quality(f, t):
        return h_direct(f, delta, t)
    return h_large_t(f, delta, t)


@dataclass
class DispersionCurve:
    delta: float
    times: np.ndarray
    values: np.ndarray
    method: str
    quality: np.ndarray = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise InvalidInput("times and values must have equal length")
        if self.quality is None:
            self.quality = np.ones(self.times.shape, dtype=bool)

    def rows(self):
        return [(t, v, self.method, int(q))
                for t, v, q in zip(self.times, self.values, self.quality)]


def dispersion_curve(f: ComplexField, delta: float, times, method: str = "direct") -> DispersionCurve:
    if method not in _ROUTES:
        raise InvalidInput(f"unknown method {method!r}; expected one of {METHODS}")
    times = np.asarray(times, dtype=float)
    vals = np.array([_ROUTES[method](f, delta, t) for t in times])
    if method == "direct":
        q = np.array([h_direct_quality(f, t) for t in times])
    elif method == "large_t":
        q = np.array([h_large_t_quality(f, t) for t in times])
    else:
        q = np.full(times.shape, delta < 0.5)
    return DispersionCurve(delta, times, vals, method, q)


# ---------------------------------------------------------------------------
# inequalities

@dataclass
class BoundsReport:
    times: np.ndarray
    h: np.ndarray
    two_time_margin: np.ndarray      # h(0) h(T) / (a^4 |T|^(2 delta)) - 1
    lower_bound_margin: np.ndarray   # h(t) / rhs - 1
    heisenberg_margin: np.ndarray | None = None   # delta = 1 only

    @property
    def min_margin(self) -> float:
        parts = [self.two_time_margin[np.isfinite(self.two_time_margin)],
                 self.lower_bound_margin]
        if self.heisenberg_margin is not None:
            parts.append(self.heisenberg_margin)
        return float(min(np.min(p) for p in parts if p.size))

    def ok(self, slack: float = 1e-6) -> bool:
        return self.min_margin >= -slack


def check_dynamical_bounds(f: ComplexField, delta: float, a_delta: float, t_grid) -> BoundsReport:
    delta = check_delta(delta)
    if abs(f.norm() - 1.0) > 1e-8:
        raise InvalidInput("datum must have unit L2 norm")
    t_grid = np.asarray(t_grid, dtype=float)
    sn = sigma_norms(f, delta)
    h0 = sn.x_weighted ** 2
    hs = np.array([h_auto(f, delta, t) for t in t_grid])
    a2 = a_delta ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        two = np.where(t_grid != 0, h0 * hs / (a2 ** 2 * np.abs(t_grid) ** (2 * delta)) - 1.0, np.inf)
    pref = (a2 / (sn.x_weighted * sn.d_delta)) ** 2
    rhs = pref * np.maximum(sn.x_weighted ** 2, sn.d_delta ** 2 * np.abs(t_grid) ** (2 * delta))
    low = hs / rhs - 1.0
    heis = None
    if delta == 1.0:
        heis = hs / (a2 * (1.0 + t_grid ** 2)) - 1.0
    return BoundsReport(t_grid, hs, two, low, heis)


def nahas_ponce_ratio(f: ComplexField, delta: float, t_grid) -> float:
    sn = sigma_norms(f, delta)
    if sn.sigma_sq == 0:
        return 0.0
    t_grid = np.asarray(t_grid, dtype=float)
    hs = np.array([h_auto(f, delta, t) for t in t_grid])
    return float(np.max(hs / (sn.sigma_sq * (1.0 + t_grid ** 2) ** delta)))


# ---------------------------------------------------------------------------
# exponent fits

@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r_squared,
                "window": list(self.window), "flags": list(self.flags)}


def fit_power_law(x, y, window=None, log_base: float = math.e) -> PowerLawFit:
    """Least-squares line through (log x, log y) restricted to window."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(x.min()), float(x.max()))
    lo, hi = window
    if not lo < hi:
        raise InvalidInput("fit window must satisfy min < max")
    sel = (x >= lo) & (x <= hi) & (y > 0) & np.isfinite(y)
    if sel.sum() < 3:
        raise InvalidInput("fewer than three usable points in the fit window")
    lx = np.log(x[sel]) / math.log(log_base)
    ly = np.log(y[sel]) / math.log(log_base)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return PowerLawFit(float(slope), float(intercept), float(r2), (float(lo), float(hi)))


def sharpness_exponent(delta: float, offset: float = 0.05) -> float:
    return 0.5 + delta + offset


def sharpness_datum(grid: Grid1D, delta: float, offset: float = 0.05,
                    cutoff: float | None = None) -> ComplexField:
    """Datum with transform <xi>^(-alpha), alpha = 1/2 + delta + offset.

    A smooth Gaussian roll-off at ``cutoff`` (default 0.6 of the Nyquist
    frequency) keeps the truncated datum in the weighted space; without it the
    sharp band edge produces sinc tails with infinite |x|^(2 delta) moment.
    """
    alpha = sharpness_exponent(delta, offset)
    if cutoff is None:
        cutoff = 0.6 * grid.xi_max
    xi = grid.xi
    spec = (1.0 + xi ** 2) ** (-alpha / 2) * np.exp(-np.pi * (xi / cutoff) ** 2)
    f = ComplexField(grid, ifft_coefficients(grid, spec))
    return ComplexField(grid, f.samples / f.norm())


def lipschitz_beta(delta: float) -> float:
    """Fourier-decay excess beta for the sharpness family: |h^(tau)| ~ tau^-(1+beta)."""
    if delta < 0.5:
        return 2 * delta
    return 0.25 + 1.5 * delta


def _h_samples(f: ComplexField, delta: float, times: np.ndarray) -> np.ndarray:
    """h on a time grid; direct route near t = 0 where the chirp is unresolved."""
    out = np.empty(times.shape)
    for i, t in enumerate(times):
        if t != 0 and h_large_t_quality(f, t):
            out[i] = h_large_t(f, delta, t)
        else:
            out[i] = h_direct(f, delta, t)
    return out


def smooth_taper(n: int, flat_fraction: float = 0.5) -> np.ndarray:
    """Window equal to 1 on the central ``flat_fraction`` and rising from 0 with
    the C-infinity ramp 1 / (1 + exp(1/u - 1/(1 - u))) on each side.

    Unlike cosine (Tukey) ramps, every derivative is continuous, so the taper
    itself adds no power-law tail to the transform.
    """
    u = np.linspace(0.0, 1.0, n)
    r = (1.0 - flat_fraction) / 2.0
    d = np.minimum(u, 1.0 - u) / r
    w = np.ones(n)
    ramp = d < 1
    x = d[ramp]
    with np.errstate(divide="ignore", over="ignore"):
        w[ramp] = np.where(x > 0, 1.0 / (1.0 + np.exp(1.0 / x - 1.0 / (1.0 - x))), 0.0)
    return w


def hhat_transform(times: np.ndarray, values: np.ndarray, flat_fraction: float = 0.5):
    """|h^(tau)| for tau >= 0 from uniform samples, after a smooth taper."""
    dt = times[1] - times[0]
    w = smooth_taper(len(times), flat_fraction)
    spec = np.fft.rfft((values - values.mean()) * w) * dt
    tau = np.fft.rfftfreq(len(times), dt)
    return tau, np.abs(spec)


def hhat_decay_fit(f: ComplexField, delta: float, t_window: float, tau_range,
                   n_samples: int = 4096) -> PowerLawFit:
    """Slope of log |h^(tau)| against log tau on tau_range.

    h is sampled on [-T, T]; its Fourier transform is taken after a smooth
    taper.  Half a decade is trimmed from both ends of tau_range before the
    fit.
    """
    delta = check_delta(delta)
    lo, hi = tau_range
    times = np.linspace(-t_window, t_window, n_samples, endpoint=False)
    dt = times[1] - times[0]
    tau_nyq = 0.5 / dt
    tau_res = 1.0 / (2 * t_window)
    if not (0 < lo < hi <= tau_nyq) or lo < 4 * tau_res:
        raise InvalidInput(f"tau range {tau_range} outside resolved band "
                           f"[{4 * tau_res:.3g}, {tau_nyq:.3g}]")
    vals = _h_samples(f, delta, times)
    tau, mag = hhat_transform(times, vals)
    trim = 10 ** 0.5
    win = (lo * trim, hi / trim) if hi / lo > 10 else (lo, hi)
    return fit_power_law(tau, mag, win)


def band_norms(curve: DispersionCurve, flat_fraction: float = 0.5):
    """sup-norms of dyadic frequency bands [2^k, 2^(k+1)) of the tapered curve."""
    t = curve.times
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise InvalidInput("curve must be uniformly sampled")
    v = curve.values - curve.values.mean()
    v = v * smooth_taper(len(t), flat_fraction)
    spec = np.fft.rfft(v)
    tau = np.fft.rfftfreq(len(t), dt)
    k0 = math.ceil(math.log2(2.0 / (t[-1] - t[0])))
    k1 = math.floor(math.log2(tau[-1])) - 1
    ks, norms = [], []
    for k in range(k0, k1 + 1):
        mask = (tau >= 2.0 ** k) & (tau < 2.0 ** (k + 1))
        if not mask.any():
            continue
        band = np.fft.irfft(np.where(mask, spec, 0), len(t))
        ks.append(k)
        norms.append(np.max(np.abs(band)))
    return np.array(ks), np.array(norms)


def band_regularity_fit(curve: DispersionCurve, k_range=None) -> PowerLawFit:
    """Fit log2 ||P_k h||_inf = -alpha k + c; returns slope (= -alpha).

    Only the central half of the tapered window enters the sup norm so that
    the taper edges do not masquerade as regularity loss.
    """
    ks, norms = band_norms(curve)
    if k_range is not None:
        sel = (ks >= k_range[0]) & (ks <= k_range[1])
        ks, norms = ks[sel], norms[sel]
    if len(ks) < 4:
        raise InvalidInput("need at least four dyadic bands")
    if np.all(norms < 1e-14 * max(1.0, np.max(np.abs(curve.values)))):
        return PowerLawFit(0.0, -np.inf, 1.0, (float(ks[0]), float(ks[-1])), ["flat"])
    fit = fit_power_law(2.0 ** ks, norms, (2.0 ** ks[0], 2.0 ** ks[-1]), log_base=2.0)
    return fit


def pair_scaling_fit(f: ComplexField, delta: float, eps_list, reach: float = 4.0,
                     n_t: int = 4001) -> PowerLawFit:
    """Slope of log <h^, zeta_eps> against log eps, zeta(tau) = exp(-pi tau^2).

    <h^, zeta_eps> = int h(t) eps exp(-pi (eps t)^2) dt; the integral is taken
    over |t| <= reach / eps where the Gaussian weight is below exp(-pi reach^2).
    """
    delta = check_delta(delta)
    if delta >= 1.0:
        raise DomainError("pair scaling needs delta < 1")
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if math.log10(eps[-1] / eps[0]) < 1.5:
        raise InvalidInput("eps list must span at least 1.5 decades")
    vals = []
    flags = []
    for e in eps:
        T = reach / e
        s = np.linspace(0.0, T, n_t)
        hp = _h_samples(f, delta, s)
        hm = _h_samples(f, delta, -s[1:])
        w = e * np.exp(-np.pi * (e * s) ** 2)
        ip = np.trapezoid(hp * w, s)
        im = np.trapezoid(np.concatenate([[hp[0]], hm]) * w, s)
        vals.append(ip + im)
        if not all(h_large_t_quality(f, t) for t in (T, -T)):
            flags.append(f"t-range coverage at eps={e:g}")
    fit = fit_power_law(eps, np.array(vals))
    fit.flags.extend(flags)
    return fit
