"""Monte Carlo and exact-numeric checks of forward and inverse tail limits.

Random streams: the j-th independent input of a scenario is drawn with
base seed ``seed + j * STREAM_STRIDE``; within a stream chunk k uses
``base + k`` (see :func:`rvfilter.measures.sample_noise`).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .laws import CounterexampleLaw, Discrete, Law, MomentDivergence, Symmetrized
from .measures import (
    CallableKernel,
    ExpKernel,
    GeometricAtoms,
    PowerAtoms,
    StepKernel,
    sample_noise,
)
from .mellin import moment

STREAM_STRIDE = 1_000_000
FIT_MIN_EXCEEDANCES = 100
SERIES_TOL = 1e-6


@dataclass(frozen=True)
class LevyModel:
    """Compound-Poisson driver: jumps with the given law at the given rate."""

    jump_law: Law
    intensity: float = 1.0

    def __post_init__(self):
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")

    def tail(self, x):
        """eta(x, inf) = intensity * P(J > x)."""
        return self.intensity * self.jump_law.sf(x)


@dataclass
class TailReport:
    label: str
    n: int
    thresholds: np.ndarray
    tail: np.ndarray
    stderr: np.ndarray
    reference: np.ndarray
    target_ratio: float
    fitted_index: Optional[float] = None
    exact: Optional[np.ndarray] = None
    applicable: bool = True
    notes: dict = field(default_factory=dict)
    ratio_mode: str = "output/reference"

    @property
    def observed_ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.ratio_mode == "reference/output":
                return self.reference / self.tail
            return self.tail / self.reference

    @property
    def ratio_stderr(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = self.stderr / self.tail
        return np.abs(self.observed_ratio) * rel

    def index_of(self, x: float) -> int:
        hits = np.flatnonzero(np.isclose(self.thresholds, x, rtol=1e-12, atol=0))
        if hits.size == 0:
            raise KeyError(f"threshold {x:g} not in report")
        return int(hits[0])

    def ratio_at(self, x: float) -> tuple[float, float]:
        i = self.index_of(x)
        return float(self.observed_ratio[i]), float(self.ratio_stderr[i])

    def exact_ratio_at(self, x: float) -> float:
        if self.exact is None:
            raise ValueError("no exact oracle in this report")
        i = self.index_of(x)
        if self.ratio_mode == "reference/output":
            return float(self.reference[i] / self.exact[i])
        return float(self.exact[i] / self.reference[i])

    def within(self, x: float, k: float = 3.0, target: Optional[float] = None) -> bool:
        obs, se = self.ratio_at(x)
        goal = self.target_ratio if target is None else target
        return abs(obs - goal) <= k * se

    def monotone_within(self, k: float = 3.0) -> bool:
        order = np.argsort(self.thresholds)
        inc = np.diff(self.tail[order])
        slack = k * np.hypot(self.stderr[order][:-1], self.stderr[order][1:])
        return bool(np.all(inc <= slack))

    def exact_agreement(self, k: float = 4.0) -> Optional[bool]:
        if self.exact is None:
            return None
        ok = np.abs(self.tail - self.exact) <= k * np.maximum(self.stderr, 1e-300)
        return bool(np.all(ok | (self.stderr == 0) & np.isclose(self.tail, self.exact)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "tail", "stderr", "ratio"])
        for x, t, s, r in zip(self.thresholds, self.tail, self.stderr, self.observed_ratio):
            w.writerow([repr(float(x)), repr(float(t)), repr(float(s)), repr(float(r))])
        return buf.getvalue()

    def summary(self, checks: Sequence[dict] = ()) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "applicable": self.applicable,
            "fitted_index": self.fitted_index,
            "target_ratio": self.target_ratio,
            "notes": _jsonable(self.notes),
            "checks": list(checks),
            "pass": all(c["pass"] for c in checks) if checks else None,
        }

    def to_json(self, checks: Sequence[dict] = ()) -> str:
        return json.dumps(self.summary(checks), sort_keys=True, indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# empirical tails


def threshold_grid(sample: np.ndarray, at: Sequence[float] = (), min_count: int = 10,
                   max_points: int = 64) -> np.ndarray:
    """Ratio-2 geometric grid from the empirical 90th percentile upward, plus ``at``."""
    s = np.sort(sample)
    start = float(np.quantile(s, 0.9))
    if not start > 0:
        start = float(s[s > 0][0]) if np.any(s > 0) else 1.0
    xs = []
    x = start
    while len(xs) < max_points:
        count = s.size - np.searchsorted(s, x, side="right")
        if count < min_count:
            break
        xs.append(x)
        x *= 2.0
    return np.array(sorted(set(xs) | {float(a) for a in at}))


def empirical_tail(sample: np.ndarray, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = np.sort(sample)
    counts = s.size - np.searchsorted(s, thresholds, side="right")
    p = counts / s.size
    se = np.sqrt(p * (1 - p) / s.size)
    return p, se, counts


def fit_index(thresholds: np.ndarray, tail: np.ndarray, counts: np.ndarray) -> Optional[float]:
    """Minus the OLS slope of log tail on log x over the top two decades with >= 100 exceedances."""
    ok = counts >= FIT_MIN_EXCEEDANCES
    if ok.sum() < 2:
        return None
    top = thresholds[ok].max()
    sel = ok & (thresholds >= top / 100.0)
    if sel.sum() < 2:
        return None
    slope = np.polyfit(np.log(thresholds[sel]), np.log(tail[sel]), 1)[0]
    return float(-slope)


def _stream(law: Law, n: int, seed: int, j: int) -> np.ndarray:
    return sample_noise(law, n, seed + j * STREAM_STRIDE)


def _is_counterexample(law: Law) -> bool:
    base = law.base if isinstance(law, Symmetrized) else law
    return isinstance(base, CounterexampleLaw)


def reference_tail(law: Law, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """Exact tail of the law, or the matching pure power x^-alpha for log-periodic noise."""
    if _is_counterexample(law):
        half = 0.5 if isinstance(law, Symmetrized) else 1.0
        return lambda x: half * np.power(np.asarray(x, dtype=float), -alpha)
    return law.sf


def oscillation(law: Law, alpha: float, points: int = 4001) -> float:
    """sup - inf of x^alpha P(Z > x) over one multiplicative period beyond the truncation."""
    base = law.base if isinstance(law, Symmetrized) else law
    if not isinstance(base, CounterexampleLaw):
        raise ValueError("oscillation is defined for log-periodic noise")
    x0 = 2.0 * max(base.trunc, 1.0)
    xs = x0 * np.exp(np.linspace(0.0, math.log(base.spec.period), points))
    vals = xs**alpha * law.sf(xs)
    return float(vals.max() - vals.min())


def _truncate_weights(weights, family, alpha: float, delta: float) -> np.ndarray:
    ws = [float(w) for w in weights]
    if family is not None:
        p = alpha - delta
        k = family.truncation(p, SERIES_TOL)
        if isinstance(family, GeometricAtoms):
            ws.extend(family.locations(k - family.start + 1))
        else:
            ws.extend(family.locations(k))
    if not ws or any(w <= 0 for w in ws):
        raise ValueError("weights must be positive")
    return np.asarray(ws)


def _report(label, sample, ref, target, at, exact_fn=None, ratio_mode="output/reference"):
    xs = threshold_grid(sample, at)
    p, se, counts = empirical_tail(sample, xs)
    exact = exact_fn(xs) if exact_fn is not None else None
    return TailReport(label, sample.size, xs, p, se, np.asarray(ref(xs), dtype=float), float(target),
                      fit_index(xs, p, counts), exact, ratio_mode=ratio_mode)


# ---------------------------------------------------------------------------
# scenarios


def verify_weighted_sum(weights, noise: Law, alpha: float, n: int, seed: int,
                        at: Sequence[float] = (50.0,), family=None,
                        delta: Optional[float] = None) -> TailReport:
    """X = sum_j psi_j Z_j against the noise tail; target sum psi_j^alpha."""
    delta = alpha / 2 if delta is None else delta
    ws = _truncate_weights(weights, family, alpha, delta)
    x = np.zeros(int(n))
    for j, w in enumerate(ws):
        x += w * _stream(noise, n, seed, j)
    target = float(np.sum(ws**alpha))
    exact_fn = None
    if ws.size == 1:
        exact_fn = lambda t: noise.sf(np.asarray(t) / ws[0])  # noqa: E731
    rep = _report("weighted-sum", x, reference_tail(noise, alpha), target, at, exact_fn)
    rep.notes["weights"] = int(ws.size)
    if _is_counterexample(noise):
        rep.notes["oscillation"] = oscillation(noise, alpha)
    return rep


def _log_quad(f, lo: float, hi: float, breaks=()) -> float:
    edges = sorted({lo, hi, *[v for v in breaks if lo < v < hi]})
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
    return total


def product_tail_exact(y: Law, z: Law, x) -> np.ndarray:
    """P(YZ > x) = E[P(Z > x/Y)] for Y > 0, integrating over v = log Y."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    lo, hi = y.support()
    vlo = math.log(lo) if lo > 0 else -math.inf
    vhi = math.log(hi) if hi < math.inf else math.inf
    zlo = z.support()[0]
    for i, xv in enumerate(xs):
        total = sum(w * float(z.sf(xv / loc)) for loc, w in y.atoms())
        if y.power_terms() != ():
            def f(v):
                if v > 700:
                    return 0.0
                t = math.exp(v)
                if t == 0.0:
                    return 0.0
                return float(z.sf(xv / t) * y.pdf(t)) * t

            breaks = [math.log(b) for b in y.breakpoints() if b > 0]
            if zlo > 0:
                breaks.append(math.log(xv / zlo))
            total += _log_quad(f, vlo, vhi, breaks)
        out[i] = total
    return out


def verify_product(y: Law, z: Law, alpha: float, n: int, seed: int,
                   at: Sequence[float] = (10.0,), exact: bool = True) -> TailReport:
    """X = Y Z against P(Z > x); target E[Y^alpha] (alpha > 0) or 1 (alpha = 0)."""
    if alpha > 0:
        target = moment(y, alpha)
        if not math.isfinite(target):
            raise MomentDivergence(f"E[Y^{alpha:g}] is infinite")
    else:
        target = 1.0
    with np.errstate(over="ignore"):  # slowly varying draws can be inf
        x = _stream(y, n, seed, 0) * _stream(z, n, seed, 1)
    exact_fn = (lambda t: product_tail_exact(y, z, t)) if exact else None
    ref = reference_tail(z, alpha) if alpha > 0 else z.sf
    rep = _report("product", x, ref, target, at, exact_fn)
    if _is_counterexample(z):
        rep.notes["oscillation"] = oscillation(z, alpha)
    return rep


def _kernel_window(kernel, horizon: float) -> tuple[float, float]:
    lo, hi = kernel.support
    return max(lo, -horizon), min(hi, horizon)


def _kernel_power_on(kernel, alpha: float, a: float, b: float) -> float:
    if isinstance(kernel, ExpKernel):
        lam = kernel.rate * alpha
        if kernel.two_sided:
            return (2 - math.exp(lam * a) - math.exp(-lam * b)) / lam if a < 0 < b else 0.0
        return (math.exp(-lam * max(a, 0.0)) - math.exp(-lam * b)) / lam
    return integrate.quad(lambda s: float(kernel(s)) ** alpha, a, b, limit=400,
                          points=_kernel_breaks(kernel, a, b))[0]


def _kernel_breaks(kernel, a, b):
    if isinstance(kernel, StepKernel):
        e = np.concatenate([[0.0], np.cumsum(kernel.lengths)])
        return [float(v) for v in e if a < v < b] or None
    return None


def default_horizon(kernel, alpha: float, rel: float = 1e-4) -> float:
    """Smallest horizon H with the f^alpha mass outside [-H, H] at most ``rel`` of the total."""
    lo, hi = kernel.support
    if math.isfinite(lo) and math.isfinite(hi):
        return max(abs(lo), abs(hi))
    if isinstance(kernel, ExpKernel):
        return math.log(1 / rel) / (kernel.rate * alpha)
    raise ValueError("cannot choose a horizon for this kernel")


def verify_integral(kernel, levy: LevyModel, alpha: float, horizon: Optional[float], n: int, seed: int,
                    at: Sequence[float] = (50.0,), chunk: int = 1 << 15) -> TailReport:
    """X = sum_k f(s_k) J_k over compound-Poisson arrivals on [-horizon, horizon].

    The reference tail is eta(x, inf) = intensity * P(J > x); the target
    ratio is the integral of f^alpha.
    """
    total = kernel.power_integral(alpha)
    if not math.isfinite(total):
        raise MomentDivergence("integral of f^alpha diverges")
    if alpha == 0:
        lo_s, hi_s = kernel.support
        if not (math.isfinite(lo_s) and math.isfinite(hi_s)):
            raise ValueError("alpha = 0 needs a kernel supported on a set of finite measure")
    h = default_horizon(kernel, alpha) if horizon is None else float(horizon)
    a, b = _kernel_window(kernel, h)
    kept = _kernel_power_on(kernel, alpha, a, b)
    lost = max(total - kept, 0.0) / total
    if lost > 0.01:
        raise ValueError(f"horizon {h:g} too small: {lost:.2%} of the f^alpha mass is truncated")
    rate = levy.intensity * (b - a)
    out = np.empty(int(n))
    for k, start in enumerate(range(0, int(n), chunk)):
        m = min(chunk, int(n) - start)
        base = seed + k * STREAM_STRIDE
        rng = np.random.default_rng(base)
        counts = rng.poisson(rate, m)
        tot = int(counts.sum())
        times = a + (b - a) * rng.random(tot)
        jumps = sample_noise(levy.jump_law, tot, base + 1)
        owner = np.repeat(np.arange(m), counts)
        out[start:start + m] = np.bincount(owner, weights=kernel(times) * jumps, minlength=m)
    ref = lambda x: levy.tail(x)  # noqa: E731
    if _is_counterexample(levy.jump_law):
        pw = reference_tail(levy.jump_law, alpha)
        ref = lambda x: levy.intensity * pw(x)  # noqa: E731
    rep = _report("integral", out, ref, total, at)
    rep.notes.update({"horizon": h, "truncated_fraction": lost, "window": [a, b]})
    if _is_counterexample(levy.jump_law):
        rep.notes["oscillation"] = oscillation(levy.jump_law, alpha)
    return rep


def sum_tail_exact(z: Law, x, q: int = 2) -> np.ndarray:
    """P(Z1 + Z2 > x) for i.i.d. positive continuous Z (q = 1 or 2) by quadrature.

    Splits on which summand is below x/2:
    P = 2 int_{Z <= x/2} P(Z > x - t) dF(t) + P(Z > x/2)^2, integrated over log t.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if q == 1:
        return z.sf(xs)
    if q != 2:
        raise ValueError("the convolution oracle covers q <= 2")
    lo = z.support()[0]
    if not lo > 0:
        raise ValueError("the convolution oracle needs a support bounded away from 0")
    out = np.empty(xs.shape)
    for i, xv in enumerate(xs):
        half = 0.5 * xv
        if half <= lo:
            out[i] = 1.0
            continue

        def f(v):
            t = math.exp(v)
            return float(z.sf(xv - t) * z.pdf(t)) * t

        breaks = [math.log(b) for b in z.breakpoints() if b > 0]
        out[i] = 2 * _log_quad(f, math.log(lo), math.log(half), breaks) + float(z.sf(half)) ** 2
    return out


def verify_slow_variation_sum(q: int, noise: Law, n: int, seed: int,
                              at: Sequence[float] = (1e6,)) -> TailReport:
    """Ratio P(Z > x) / P(Z_1 + ... + Z_q > x) against the target 1/q."""
    if q < 1:
        raise ValueError("q must be at least 1")
    if not noise.slowly_varying:
        empty = np.array([])
        rep = TailReport("slow-variation-sum", int(n), empty, empty, empty, empty, 1.0 / q,
                         applicable=False)
        rep.notes["reason"] = "noise tail is not slowly varying"
        return rep
    x = np.zeros(int(n))
    for j in range(q):
        x += _stream(noise, n, seed, j)
    exact_fn = (lambda t: sum_tail_exact(noise, t, q)) if q <= 2 else None
    rep = _report("slow-variation-sum", x, noise.sf, 1.0 / q, at, exact_fn, "reference/output")
    rep.notes["q"] = q
    return rep


def slow_variation_product_exact(y: Law, z: Law, x: float) -> float:
    """P(YZ > x) / P(Z > x) from the exact product tail."""
    return float(product_tail_exact(y, z, x)[0] / z.sf(x))
