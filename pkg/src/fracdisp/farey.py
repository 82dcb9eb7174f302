"""Farey enumeration, counting of rational atoms, the jump path H and its
local regularity.

All (p, q) manipulation is in exact integer arithmetic.  Weights depend only
on q (through q mod 4), so per-denominator streaming is the natural order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .comb import class_constants, weights_for
from .errors import InvalidInput
from .spectral import check_delta


# ---------------------------------------------------------------------------
# Farey walk

class EndOfSequence(StopIteration):
    """Raised when stepping past 1/1."""


@dataclass(frozen=True)
class FareyState:
    p1: int
    q1: int
    p2: int
    q2: int
    q_max: int

    def __post_init__(self):
        if self.p2 * self.q1 - self.p1 * self.q2 != 1:
            raise InvalidInput("consecutive Farey fractions must satisfy p2 q1 - p1 q2 = 1")
        if not (1 <= self.q1 <= self.q_max and 1 <= self.q2 <= self.q_max):
            raise InvalidInput("denominators must lie in [1, q_max]")

    @classmethod
    def start(cls, q_max: int) -> "FareyState":
        return cls(0, 1, 1, q_max, q_max)

    @property
    def current(self) -> Fraction:
        return Fraction(self.p1, self.q1)

    @property
    def successor(self) -> Fraction:
        return Fraction(self.p2, self.q2)


def farey_next(state: FareyState) -> FareyState:
    if state.p2 == state.q2:
        raise EndOfSequence("already at 1/1")
    a = (state.q1 + state.q_max) // state.q2
    return FareyState(state.p2, state.q2, a * state.p2 - state.p1, a * state.q2 - state.q1, state.q_max)


def farey_walk(q_max: int):
    """Yield (p, q) over F_{q_max} from 0/1 to 1/1 inclusive."""
    s = FareyState.start(q_max) if q_max > 1 else FareyState(0, 1, 1, 1, 1)
    yield s.p1, s.q1
    while True:
        yield s.p2, s.q2
        try:
            s = farey_next(s)
        except EndOfSequence:
            return


# ---------------------------------------------------------------------------
# counting

@dataclass(frozen=True)
class Interval:
    """Interval with endpoint flags; default half-open [lo, hi)."""
    lo: Fraction
    hi: Fraction
    closed_lo: bool = True
    closed_hi: bool = False

    @classmethod
    def make(cls, lo, hi, closed_lo=True, closed_hi=False) -> "Interval":
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            raise InvalidInput("interval endpoints out of order")
        return cls(lo, hi, closed_lo, closed_hi)

    @property
    def length(self) -> float:
        return float(self.hi - self.lo)

    def numerator_range(self, q: int) -> tuple:
        """Integers p with p/q in the interval, as an inclusive range."""
        a, b = self.lo * q, self.hi * q
        first = math.ceil(a) if self.closed_lo else math.floor(a) + 1
        last = math.floor(b) if self.closed_hi else math.ceil(b) - 1
        return first, last


def _as_interval(I) -> Interval:
    return I if isinstance(I, Interval) else Interval.make(*I)


def mobius_sieve(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    is_comp = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if not is_comp[p]:
            is_comp[2 * p::p] = True
            mu[p::p] *= -1
            mu[p * p::p * p] = 0
    return mu


def reduced_counts(I, N: int) -> np.ndarray:
    """r[q] = number of reduced p/q in I, for q = 0..N (r[0] = 0).

    From the counts of all numerators, cnt[m] = #{p : p/m in I}, by Moebius
    inversion over the common factor d of (p, q).
    """
    I = _as_interval(I)
    cnt = np.zeros(N + 1, dtype=np.int64)
    for m in range(1, N + 1):
        first, last = I.numerator_range(m)
        cnt[m] = max(0, last - first + 1)
    mu = mobius_sieve(N)
    r = np.zeros(N + 1, dtype=np.int64)
    for d in np.flatnonzero(mu):
        r[d::d] += mu[d] * cnt[1:N // d + 1]
    return r


def count_M(I, N: int) -> int:
    """Number of reduced fractions p/q in I with 1 <= q <= N."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    return int(reduced_counts(I, int(N)).sum())


def count_M_walk(I, N: int) -> int:
    """Same count by walking F_N; used as an oracle."""
    I = _as_interval(I)
    n = 0
    for p, q in farey_walk(int(N)):
        x = Fraction(p, q)
        lo_ok = x >= I.lo if I.closed_lo else x > I.lo
        hi_ok = x <= I.hi if I.closed_hi else x < I.hi
        n += lo_ok and hi_ok
    return n


_CLASS_RESIDUES = {"odd": (1, 3), "two": (2,), "four": (0,)}


def class_thresholds(r: float, delta: float, psi_norm_sq: float = 1.0) -> dict:
    """Largest q in each residue class whose atoms have |weight| >= r."""
    if not r > 0:
        raise InvalidInput("r must be positive")
    K = np.abs(class_constants(delta, psi_norm_sq))
    out = {}
    for name, res in _CLASS_RESIDUES.items():
        Q = (K[res[0]] / r) ** (1.0 / (2.0 * (1.0 + delta)))
        Qi = int(math.floor(Q))
        # guard against rounding at exact thresholds
        while Qi >= 1 and K[res[0]] / float(Qi) ** (2 * (1 + delta)) < r:
            Qi -= 1
        while K[res[0]] / float(Qi + 1) ** (2 * (1 + delta)) >= r:
            Qi += 1
        out[name] = Qi
    return out


def count_N_abs(I, r: float, delta: float, psi_norm_sq: float = 1.0) -> int:
    """Number of atoms in I with |weight| >= r."""
    delta = check_delta(delta, allow_one=False)
    Q = class_thresholds(r, delta, psi_norm_sq)
    top = max(Q.values())
    if top < 1:
        return 0
    counts = reduced_counts(I, top)
    qs = np.arange(top + 1)
    total = 0
    for name, res in _CLASS_RESIDUES.items():
        sel = np.isin(qs % 4, res) & (qs <= Q[name]) & (qs >= 1)
        total += int(counts[sel].sum())
    return total


def count_N_abs_bound(I, r: float, delta: float, psi_norm_sq: float = 1.0) -> float:
    """C |I| r^(-1/(1+delta)) + 1 with C = (2^(2+2 delta) Z)^(1/(1+delta)).

    Every counted atom has q below the largest class threshold, and
    count_M(I, N) <= |I| N^2 + 1 does the rest.
    """
    delta = check_delta(delta, allow_one=False)
    I = _as_interval(I)
    C = np.abs(class_constants(delta, psi_norm_sq)).max() ** (1.0 / (1.0 + delta))
    return C * I.length * r ** (-1.0 / (1.0 + delta)) + 1.0


# ---------------------------------------------------------------------------
# atoms near a point and the path

def atoms_in_window(lo: float, hi: float, q_max: int):
    """All reduced p/q (p any integer) in [lo, hi] with q <= q_max, sorted.

    The measure is 1-periodic, so windows may extend outside [0, 1).
    """
    ps, qs = [], []
    for q in range(1, q_max + 1):
        first, last = math.ceil(lo * q), math.floor(hi * q)
        if last < first:
            continue
        p = np.arange(first, last + 1, dtype=np.int64)
        p = p[np.gcd(p, q) == 1]
        ps.append(p)
        qs.append(np.full(p.size, q, dtype=np.int64))
    if not ps:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    p = np.concatenate(ps)
    q = np.concatenate(qs)
    order = np.argsort(p / q, kind="stable")
    return p[order], q[order]


@dataclass
class JumpPath:
    delta: float
    q_max: int
    t: np.ndarray
    H: np.ndarray
    psi_norm_sq: float = 1.0

    def rows(self):
        return zip(self.t.tolist(), self.H.tolist())


def build_path(delta: float, q_max: int, t_grid, psi_norm_sq: float = 1.0) -> JumpPath:
    """H(t) = sum of weights of atoms p/q in [0, t], q <= q_max.

    Streams over denominators: each atom is binned to the first grid point at
    or after it, the bins are accumulated and a cumulative sum gives H.
    """
    delta = check_delta(delta, allow_one=False)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(np.diff(t) < 0) or (t.size and (t[0] < 0 or t[-1] > 1)):
        raise InvalidInput("t_grid must be sorted within [0, 1]")
    bins = np.zeros(t.size + 1)
    w_q = weights_for(np.arange(1, q_max + 1), delta, psi_norm_sq)
    for q in range(1, q_max + 1):
        p = np.arange(0, q, dtype=np.int64)
        p = p[np.gcd(p, q) == 1]
        idx = np.searchsorted(t, p / q, side="left")
        bins[:-1] += w_q[q - 1] * np.bincount(idx, minlength=t.size + 1)[:-1]
    return JumpPath(delta, q_max, t, np.cumsum(bins[:-1]), psi_norm_sq)


def path_at_farey_points(delta: float, q_max: int, psi_norm_sq: float = 1.0):
    """Positions of all atoms in [0, 1) and the path values there, by a
    global sort and cumulative sum (second accumulation order)."""
    from .comb import comb_measure

    m = comb_measure(delta, q_max, psi_norm_sq)
    return m.positions, np.cumsum(m.weights)


# ---------------------------------------------------------------------------
# increments

def smallest_denominator(t: float, h: float) -> tuple:
    """Reduced P/Q in (t, t + h] with the smallest Q (Stern-Brocot descent)."""
    if not 0 < h < 1:
        raise InvalidInput("need 0 < h < 1")
    a = Fraction(t)
    b = a + Fraction(h)
    n = math.floor(a)
    if n + 1 <= b:
        return n + 1, 1
    lp, lq, rp, rq = n, 1, n + 1, 1
    while True:
        mp, mq = lp + rp, lq + rq
        m = Fraction(mp, mq)
        if m <= a:
            # jump as many steps toward R as stay <= a
            k = math.floor((a * lq - lp) / (rp - a * rq))
            lp, lq = lp + k * rp, lq + k * rq
        elif m > b:
            k = math.ceil((rp - b * rq) / (b * lq - lp)) - 1
            rp, rq = rp + k * lp, rq + k * lq
        else:
            return mp, mq


@dataclass
class Increment:
    value: float
    P: int
    Q: int
    atom_term: float
    remainder: float
    flags: list = field(default_factory=list)


def increment(delta: float, t: float, h: float, q_max: int, psi_norm_sq: float = 1.0) -> Increment:
    """H(t + h) - H(t) split into the smallest-denominator atom and the rest."""
    delta = check_delta(delta, allow_one=False)
    if not (h > 0 and 0 <= t and t + h <= 1):
        raise InvalidInput("[t, t + h] must lie in [0, 1]")
    p, q = atoms_in_window(t, t + h, q_max)
    x = p / q
    # (t, t + h], decided exactly for atoms close to the ends
    keep = np.array([Fraction(int(pi), int(qi)) > Fraction(t) and
                     Fraction(int(pi), int(qi)) <= Fraction(t) + Fraction(h)
                     if (abs(xi - t) < 1e-9 or abs(xi - t - h) < 1e-9) else True
                     for pi, qi, xi in zip(p, q, x)], dtype=bool)
    p, q = p[keep], q[keep]
    w = weights_for(q, delta, psi_norm_sq)
    value = math.fsum(w)
    P, Q = smallest_denominator(t, h) if h < 1 else (1, 1)
    flags = []
    if Q > q_max:
        flags.append("no-atom")
        atom = 0.0
    else:
        atom = float(weights_for(np.array([Q]), delta, psi_norm_sq)[0])
    return Increment(value, P, Q, atom, value - atom, flags)


def remainder_constant(delta: float, samples, q_max: int, psi_norm_sq: float = 1.0) -> float:
    """max |remainder| / h^(1+delta) over (t, h) samples."""
    out = 0.0
    for t, h in samples:
        inc = increment(delta, t, h, q_max, psi_norm_sq)
        out = max(out, abs(inc.remainder) / h ** (1 + delta))
    return out


# ---------------------------------------------------------------------------
# local regularity

@dataclass
class HolderEstimate:
    t0: float
    exponent: float
    scales: np.ndarray
    osc: np.ndarray
    drift_removed: bool
    r_squared: float
    side: str = "both"
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"t0": self.t0, "exponent": self.exponent, "scales": self.scales.tolist(),
                "osc": self.osc.tolist(), "drift_removed": self.drift_removed,
                "r_squared": self.r_squared, "side": self.side, "flags": list(self.flags)}


def _loglog_fit(x, y):
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum((ly - pred) ** 2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(r2)


def _check_scales(scales, q_max):
    s = np.asarray(scales, dtype=float)
    floor = 10.0 / q_max ** 2
    if s.size < 2 or s.min() < floor * (1 - 1e-12) or s.max() > 0.25:
        raise InvalidInput(f"scales must lie in [{floor:.3g}, 0.25]")
    return np.sort(s)


def holder_fit(delta: float, t0: float, scales, remove_drift: bool = True, q_max: int = 10 ** 4,
               side: str = "both", psi_norm_sq: float = 1.0) -> HolderEstimate:
    """Pointwise exponent of H at t0 from the decay of its local oscillation.

    osc(h) = sup |H(s) - H(t0) - m_h (s - t0)| over s in the window of radius h
    (one- or two-sided), with m_h the least-squares slope when remove_drift is
    set and 0 otherwise.
    """
    delta = check_delta(delta, allow_one=False)
    if side not in ("both", "left", "right"):
        raise InvalidInput("side must be 'both', 'left' or 'right'")
    scales = _check_scales(scales, q_max)
    hmax = scales[-1]
    p, q = atoms_in_window(t0 - hmax, t0 + hmax, q_max)
    x = p / q
    w = weights_for(q, delta, psi_norm_sq)
    # D(s) = H(s) - H(t0): right of t0 sum over (t0, s], left minus sum over (s, t0]
    right = x > t0
    xr, cr = x[right], np.cumsum(w[right])
    xl = x[~right][::-1]
    cl = -np.cumsum(w[~right][::-1])
    osc = np.empty(scales.size)
    for i, h in enumerate(scales):
        ss, vals = [np.array([t0])], [np.array([0.0])]
        if side in ("both", "right"):
            k = np.searchsorted(xr, t0 + h, side="right")
            # value just before each jump and just after it
            before = np.concatenate([[0.0], cr[:k - 1]]) if k else np.zeros(0)
            ss += [xr[:k], xr[:k], [t0 + h]]
            vals += [before, cr[:k], [cr[k - 1] if k else 0.0]]
        if side in ("both", "left"):
            k = np.searchsorted(-xl, -(t0 - h), side="left")
            after = np.concatenate([[0.0], cl[:k - 1]]) if k else np.zeros(0)
            ss += [xl[:k], xl[:k], [t0 - h]]
            vals += [after, cl[:k], [cl[k - 1] if k else 0.0]]
        s = np.concatenate(ss) - t0
        v = np.concatenate(vals)
        if remove_drift:
            grid = np.linspace(-h if side != "right" else 0.0, h if side != "left" else 0.0, 513)
            gv = _piecewise_value(grid + t0, t0, xr, cr, xl, cl)
            m = float(grid @ gv / (grid @ grid))
            v = v - m * s
        osc[i] = np.max(np.abs(v))
    flags = []
    pos = osc > 0
    if pos.sum() < 2:
        flags.append("degenerate")
        return HolderEstimate(t0, float("nan"), scales, osc, remove_drift, float("nan"), side, flags)
    if not pos.all():
        flags.append("zero-oscillation-at-some-scales")
    slope, r2 = _loglog_fit(scales[pos], osc[pos])
    if slope < 0:
        flags.append("negative-exponent")
    return HolderEstimate(float(t0), slope, scales, osc, remove_drift, r2, side, flags)


def _piecewise_value(s, t0, xr, cr, xl, cl):
    out = np.zeros(s.shape)
    r = s > t0
    k = np.searchsorted(xr, s[r], side="right")
    out[r] = np.where(k > 0, cr[np.maximum(k - 1, 0)], 0.0)
    lft = s < t0
    k = np.searchsorted(-xl, -s[lft], side="left")
    out[lft] = np.where(k > 0, cl[np.maximum(k - 1, 0)], 0.0)
    return out


def continued_fraction(t, depth: int = 20) -> np.ndarray:
    """Partial quotients of t (exact for Fraction/int input)."""
    if depth > 40:
        raise InvalidInput("depth must be <= 40")
    x = Fraction(t)
    out = []
    for _ in range(depth):
        a = math.floor(x)
        out.append(a)
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return np.array(out, dtype=np.int64)


def convergents(cf) -> list:
    h0, h1, k0, k1 = 0, 1, 1, 0
    out = []
    for a in cf:
        h0, h1 = h1, int(a) * h1 + h0
        k0, k1 = k1, int(a) * k1 + k0
        out.append(Fraction(h1, k1))
    return out


# ---------------------------------------------------------------------------
# multifractal spectrum

@dataclass
class SpectrumEstimate:
    delta: float
    q_max: int
    gamma: np.ndarray
    d: np.ndarray
    moment_orders: np.ndarray
    tau: np.ndarray
    box_scales: np.ndarray

    def to_dict(self) -> dict:
        return {"delta": self.delta, "q_max": self.q_max, "gamma": self.gamma.tolist(),
                "d": self.d.tolist(), "moment_orders": self.moment_orders.tolist(),
                "tau": self.tau.tolist(), "box_scales": self.box_scales.tolist()}


def box_extrema(delta: float, q_max: int, level: int, psi_norm_sq: float = 1.0, n_chunks: int = 64):
    """Max and min of H over each dyadic box [k 2^-level, (k+1) 2^-level) of [0, 1).

    Atoms are assigned to boxes in integer arithmetic, streamed in chunks of
    [0, 1) and sorted only within a chunk.
    """
    nbox = 1 << level
    if nbox % n_chunks:
        raise InvalidInput("n_chunks must divide the number of boxes")
    per = nbox // n_chunks
    w_cls = class_constants(delta, psi_norm_sq)
    hi = np.full(nbox, -np.inf)
    lo = np.full(nbox, np.inf)
    carry = 0.0
    qs_all = np.arange(1, q_max + 1)
    for c in range(n_chunks):
        b0, b1 = c * per, (c + 1) * per
        ps, qs = [], []
        for q in qs_all:
            first = -((-b0 * q) // nbox)
            last = -((-b1 * q) // nbox) - 1
            if last < first:
                continue
            p = np.arange(first, last + 1, dtype=np.int64)
            p = p[np.gcd(p, q) == 1]
            ps.append(p)
            qs.append(np.full(p.size, q, dtype=np.int64))
        p = np.concatenate(ps)
        q = np.concatenate(qs)
        order = np.argsort(p / q, kind="stable")
        p, q = p[order], q[order]
        box = (p * nbox) // q
        w = w_cls[q % 4] / q.astype(float) ** (2 * (1 + delta))
        cum = carry + np.cumsum(w)
        at_left = p * nbox == box * q
        # boxes in this chunk: values are the cumulative sums at their atoms, plus
        # the value carried in when no atom sits on the left endpoint
        loc = box - b0
        bh = np.full(per, -np.inf)
        bl = np.full(per, np.inf)
        np.maximum.at(bh, loc, cum)
        np.minimum.at(bl, loc, cum)
        first_idx = np.searchsorted(loc, np.arange(per), side="left")
        has = np.zeros(per, dtype=bool)
        has[loc] = True
        prev = np.where(first_idx > 0, cum[np.maximum(first_idx - 1, 0)], carry)
        entry = np.where(has & at_left[np.minimum(first_idx, loc.size - 1)], np.nan, prev)
        use = ~np.isnan(entry)
        bh[use] = np.maximum(bh[use], entry[use])
        bl[use] = np.minimum(bl[use], entry[use])
        hi[b0:b1] = bh
        lo[b0:b1] = bl
        carry = cum[-1]
    return hi, lo


def spectrum_fit(delta: float, q_max: int = 10 ** 4, box_scales=None, moment_orders=None,
                 psi_norm_sq: float = 1.0) -> SpectrumEstimate:
    """Coarse spectrum d(gamma) by the structure-function / Legendre method.

    S(q, l) = sum over boxes of osc^q ~ l^tau(q) and
    d(gamma) = min_q (q gamma - tau(q)), clipped to [0, 1].
    """
    delta = check_delta(delta, allow_one=False)
    if box_scales is None:
        box_scales = 2.0 ** -np.arange(8, 17)
    if moment_orders is None:
        moment_orders = np.linspace(0.05, 3.0, 60)
    box_scales = np.sort(np.asarray(box_scales, dtype=float))
    moment_orders = np.asarray(moment_orders, dtype=float)
    levels = -np.log2(box_scales)
    if not np.allclose(levels, np.round(levels)):
        raise InvalidInput("box scales must be dyadic")
    if box_scales.min() < 10.0 / q_max ** 2:
        raise InvalidInput("box scales below the atom-resolution floor")
    levels = np.round(levels).astype(int)
    finest = levels.max()
    hi, lo = box_extrema(delta, q_max, finest, psi_norm_sq, n_chunks=min(64, 1 << finest))
    logS = np.empty((moment_orders.size, levels.size))
    for j, lev in enumerate(levels):
        f = 1 << (finest - lev)
        osc = hi.reshape(-1, f).max(axis=1) - lo.reshape(-1, f).min(axis=1)
        osc = osc[osc > 0]
        for i, m in enumerate(moment_orders):
            logS[i, j] = np.log(np.sum(osc ** m))
    lx = -levels * math.log(2.0)
    tau = np.array([np.polyfit(lx, logS[i], 1)[0] for i in range(moment_orders.size)])
    gamma = np.linspace(0.0, 1.5 * (1 + delta), 121)[1:]
    d = np.min(np.outer(gamma, moment_orders) - tau[None, :], axis=1)
    return SpectrumEstimate(delta, q_max, gamma, np.clip(d, 0.0, 1.0), moment_orders, tau, box_scales)
