"""Oscillation-aware adaptive Gauss-Legendre quadrature for line transforms.

Integrals are written in log coordinates, u = log y, as
``int env(u) exp(i theta u) du`` with a nonnegative envelope. Panels are
capped at width pi / (4 |theta|) so the phase turns at most an eighth of
a revolution per panel, then bisected until the 20-point and 10-point
rules agree.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

Envelope = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def _rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_sums(func, lo: np.ndarray, hi: np.ndarray):
    x20, w20 = _rule(20)
    x10, w10 = _rule(10)
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    g20 = (func(mid + half * x20) * w20).sum(axis=1) * half[:, 0]
    g10 = (func(mid + half * x10) * w10).sum(axis=1) * half[:, 0]
    return g20, np.abs(g20 - g10)


def _initial_panels(edges: Sequence[float], max_width: float) -> tuple[np.ndarray, np.ndarray]:
    los, his = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        n = max(1, math.ceil((b - a) / max_width)) if math.isfinite(max_width) else 1
        cuts = np.linspace(a, b, n + 1)
        los.append(cuts[:-1])
        his.append(cuts[1:])
    return np.concatenate(los), np.concatenate(his)


def adaptive_panels(func, edges: Sequence[float], tol: float, max_width: float = math.inf,
                    max_rounds: int = 40):
    """Integrate ``func`` (vectorized, may be complex) over [edges[0], edges[-1]].

    Returns (value, error_estimate, accepted_lo, accepted_hi).
    """
    lo, hi = _initial_panels(sorted(edges), max_width)
    total_width = hi.sum() - lo.sum()
    value = 0.0 + 0.0j
    err = 0.0
    acc_lo, acc_hi = [], []
    for rnd in range(max_rounds):
        g, e = _panel_sums(func, lo, hi)
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(e))):
            raise FloatingPointError("integrand is not finite on the integration range")
        share = tol * (hi - lo) / total_width
        ok = (e <= share) | (rnd == max_rounds - 1) | ((hi - lo) < 1e-13 * max(1.0, abs(lo).max()))
        value += g[ok].sum()
        err += e[ok].sum()
        acc_lo.append(lo[ok])
        acc_hi.append(hi[ok])
        if np.all(ok):
            break
        mid = 0.5 * (lo[~ok] + hi[~ok])
        lo, hi = np.concatenate([lo[~ok], mid]), np.concatenate([mid, hi[~ok]])
    return complex(value), float(err), np.concatenate(acc_lo), np.concatenate(acc_hi)


def _envelope_quad(env: Envelope, a: float, b: float) -> float:
    val, _ = integrate.quad(lambda u: float(env(np.array([u]))[0]), a, b, limit=200,
                            epsabs=1e-300, epsrel=1e-10)
    return val


def tail_cut(env: Envelope, anchor: float, direction: int, eps: float) -> tuple[float, float]:
    """Find U beyond ``anchor`` with envelope mass past U below eps.

    Returns (U, mass beyond U). ``direction`` is +1 (right) or -1 (left).
    """
    step = 1.0
    u = anchor
    while True:
        u = anchor + direction * step
        if direction > 0:
            rest = _envelope_quad(env, u, math.inf)
        else:
            rest = _envelope_quad(env, -math.inf, u)
        if rest <= eps or step > 4096:
            return u, rest
        step *= 2


def line_integral(env: Envelope, lo: float, hi: float, theta: float, tol: float = 1e-12,
                  breakpoints: Sequence[float] = ()) -> tuple[complex, float]:
    """int_lo^hi env(u) exp(i theta u) du with an error bound; lo/hi may be infinite."""
    extra = 0.0
    inner = [b for b in breakpoints if lo < b < hi]
    if not math.isfinite(lo) or not math.isfinite(hi):
        anchor = inner[0] if inner else 0.0
        if not math.isfinite(lo):
            lo, m = tail_cut(env, min(inner) if inner else (hi - 1 if math.isfinite(hi) else anchor), -1, tol / 10)
            extra += m
        if not math.isfinite(hi):
            hi, m = tail_cut(env, max(inner) if inner else (lo + 1), +1, tol / 10)
            extra += m
    edges = [lo, *[b for b in inner if lo < b < hi], hi]
    width = math.pi / (4 * abs(theta)) if theta != 0 else math.inf

    def func(u):
        return env(u) * np.exp(1j * theta * u)

    value, err, _, _ = adaptive_panels(func, edges, tol, width)
    return value, err + extra


def exp_sum_nodes(env: Envelope, lo: float, hi: float, theta_max: float, tol: float = 1e-10,
                  breakpoints: Sequence[float] = ()):
    """Nodes u_k and weights c_k with sum c_k exp(i theta u_k) ~ int env e^{i theta u} du.

    Valid for |theta| <= theta_max: panels respect the eighth-turn cap at
    theta_max and are refined on the envelope. Returns (u, c, error bound).
    """
    extra = 0.0
    inner = [b for b in breakpoints if lo < b < hi]
    if not math.isfinite(lo):
        lo, m = tail_cut(env, min(inner) if inner else hi - 1, -1, tol / 10)
        extra += m
    if not math.isfinite(hi):
        hi, m = tail_cut(env, max(inner) if inner else lo + 1, +1, tol / 10)
        extra += m
    edges = [lo, *[b for b in inner if lo < b < hi], hi]
    width = math.pi / (4 * theta_max) if theta_max > 0 else math.inf

    def func(u):
        return env(u) * np.exp(1j * theta_max * u)

    _, err, plo, phi = adaptive_panels(func, edges, tol, width)
    x20, w20 = _rule(20)
    half = 0.5 * (phi - plo)[:, None]
    mid = 0.5 * (phi + plo)[:, None]
    u = (mid + half * x20).ravel()
    c = (env(u).reshape(half.shape[0], -1) * w20 * half).ravel()
    return u, c, err + extra
