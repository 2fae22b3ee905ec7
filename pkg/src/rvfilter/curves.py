"""Failure set of three-term weighted sums with weights (psi1, psi2, 1).

The Mellin line transform psi1^(1+i theta) + psi2^(1+i theta) + 1 vanishes
on a countable family of curves in the unit square. Each curve is U-shaped
in theta and its minimum is a fold point on psi1 + psi2 = 1 where
log psi1 / log psi2 = p / q with p, q odd. The tracer seeds every curve at
its fold (known exactly) and follows both arms by pseudo-arclength
continuation in (psi1, psi2, log theta).
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    psi1: float
    psi2: float
    theta: float
    branch: tuple[int, int, int, int]
    residual: float

    def as_row(self, label: str) -> list:
        return [label, repr(self.theta), repr(self.psi1), repr(self.psi2), f"{self.residual:.3e}"]


@dataclass
class Polyline:
    label: str
    fold: tuple[int, int]
    points: list[CurvePoint]

    def array(self) -> np.ndarray:
        return np.array([[p.psi1, p.psi2, p.theta] for p in self.points])


def residual(psi1: float, psi2: float, theta: float) -> float:
    v = (psi1 * cmath.exp(1j * theta * math.log(psi1)) + psi2 * cmath.exp(1j * theta * math.log(psi2))
         + 1.0)
    return abs(v)


def branch_labels(psi1: float, psi2: float, theta: float) -> tuple[int, int, int, int]:
    """(n, m, s1, s2) with theta log(psi1/psi2) = s1 A12 + 2 pi n and theta log psi2 = s2 A2 + 2 pi m."""
    c12 = (1 - (psi1**2 + psi2**2)) / (2 * psi1 * psi2)
    c2 = (psi1**2 - psi2**2 - 1) / (2 * psi2)
    a12 = math.acos(max(-1.0, min(1.0, c12)))
    a2 = math.acos(max(-1.0, min(1.0, c2)))
    d = theta * math.log(psi1 / psi2)
    p2 = theta * math.log(psi2)
    s1 = 1 if math.sin(d) >= 0 else -1
    s2 = 1 if math.sin(p2) >= 0 else -1
    n = round((d - s1 * a12) / (2 * math.pi))
    m = round((p2 - s2 * a2) / (2 * math.pi))
    return n, m, s1, s2


def _point(psi1: float, psi2: float, theta: float) -> CurvePoint:
    return CurvePoint(psi1, psi2, theta, branch_labels(psi1, psi2, theta), residual(psi1, psi2, theta))


# ---------------------------------------------------------------------------
# fixed-theta solver


def _newton_fixed_theta(psi1: float, psi2: float, theta: float, iters: int = 80):
    """Damped Newton for (psi1, psi2) at fixed theta."""
    fac = 1 + 1j * theta
    best = (residual(psi1, psi2, theta), psi1, psi2)
    for _ in range(iters):
        e1 = cmath.exp(1j * theta * math.log(psi1))
        e2 = cmath.exp(1j * theta * math.log(psi2))
        f = psi1 * e1 + psi2 * e2 + 1
        if abs(f) < 1e-15:
            break
        j1, j2 = e1 * fac, e2 * fac
        a, b, c, d = j1.real, j2.real, j1.imag, j2.imag
        det = a * d - b * c
        if abs(det) < 1e-300:
            break
        d1 = -(d * f.real - b * f.imag) / det
        d2 = -(-c * f.real + a * f.imag) / det
        lam = 1.0
        while lam > 1e-6:
            n1, n2 = psi1 + lam * d1, psi2 + lam * d2
            if 0 < n1 and 0 < n2:
                r = residual(n1, n2, theta)
                if r < abs(f):
                    break
            lam *= 0.5
        else:
            break
        psi1, psi2 = n1, n2
        if r < best[0]:
            best = (r, psi1, psi2)
    return best


def solve_failure_point(theta: float, branches: Optional[Iterable[tuple[int, int]]] = None,
                        samples: int = 20000, min_psi: float = 1e-3) -> list[CurvePoint]:
    """All (psi1, psi2) in (0, 1)^2 with psi1^(1+i theta) + psi2^(1+i theta) + 1 = 0.

    For each psi2 the first weight is forced: psi1 e^{i phi1} = -1 - psi2 e^{i phi2}.
    Solutions are the zeros of the phase mismatch along psi2, located on a
    grid in phi2 = theta log psi2 (sign changes and near-touching minima,
    the latter being the fold points) and polished by damped Newton.
    ``branches`` optionally restricts the result to the given (n, m) labels.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    lo = theta * math.log(min_psi)
    phi = np.linspace(lo, -1e-9, samples)
    psi2 = np.exp(phi / theta)
    v1 = -1.0 - psi2 * np.exp(1j * phi)
    psi1 = np.abs(v1)
    with np.errstate(divide="ignore"):
        mismatch = np.angle(v1) - theta * np.log(psi1)
    rr = np.sin(mismatch)
    cc = np.cos(mismatch)
    valid = (psi1 < 1) & (psi1 > 0)

    def phase_gap(p):
        v = -1.0 - math.exp(p / theta) * cmath.exp(1j * p)
        return math.sin(cmath.phase(v) - theta * math.log(abs(v)))

    starts = []
    for i in range(samples - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        if rr[i] == 0 or rr[i] * rr[i + 1] < 0:
            if cc[i] > 0 or cc[i + 1] > 0:
                root = brentq(phase_gap, phi[i], phi[i + 1], xtol=1e-15) if rr[i] != 0 else phi[i]
                starts.append(root)
    # touching minima of |sin| with cos > 0 (fold points)
    ar = np.abs(rr)
    for i in range(1, samples - 1):
        if valid[i] and cc[i] > 0 and ar[i] <= ar[i - 1] and ar[i] <= ar[i + 1] and ar[i] < 1e-2:
            if rr[i - 1] * rr[i + 1] > 0:
                starts.append(phi[i])

    found: list[CurvePoint] = []
    for p in starts:
        p2 = math.exp(p / theta)
        p1 = abs(-1.0 - p2 * cmath.exp(1j * p))
        r, p1, p2 = _newton_fixed_theta(p1, p2, theta)
        if r > RESIDUAL_TOL or not (0 < p1 < 1 and 0 < p2 < 1):
            continue
        if any(abs(q.psi1 - p1) + abs(q.psi2 - p2) < 1e-7 for q in found):
            continue
        found.append(_point(p1, p2, theta))
    if branches is not None:
        wanted = set(branches)
        found = [q for q in found if q.branch[:2] in wanted]
    return sorted(found, key=lambda q: (q.psi1, q.psi2))


# ---------------------------------------------------------------------------
# continuation


def _system(z):
    p1, p2, lt = z
    th = math.exp(lt)
    l1, l2 = math.log(p1), math.log(p2)
    e1 = cmath.exp(1j * th * l1)
    e2 = cmath.exp(1j * th * l2)
    f = p1 * e1 + p2 * e2 + 1
    c1 = e1 * (1 + 1j * th)
    c2 = e2 * (1 + 1j * th)
    c3 = 1j * th * (p1 * l1 * e1 + p2 * l2 * e2)
    return f, ((c1.real, c2.real, c3.real), (c1.imag, c2.imag, c3.imag))


def _tangent(jac, prev=None):
    (a1, a2, a3), (b1, b2, b3) = jac
    t = np.array([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    t /= np.linalg.norm(t)
    if prev is not None and t @ prev < 0:
        t = -t
    return t


def _correct(z, max_iter: int = 12):
    """Minimum-norm Newton onto the curve; returns (z, iterations) or (None, iterations)."""
    z = np.array(z, dtype=float)
    for it in range(max_iter):
        if not (0 < z[0] < 1.5 and 0 < z[1] < 1.5):
            return None, it
        f, jac = _system(z)
        if abs(f) < 1e-14:
            return z, it
        a = np.array(jac)
        g = a @ a.T
        y = np.linalg.solve(g, -np.array([f.real, f.imag]))
        z = z + a.T @ y
    f, _ = _system(z) if (0 < z[0] and 0 < z[1]) else (1.0, None)
    return (z, max_iter) if abs(f) < 1e-12 else (None, max_iter)


def fold_seed(p: int, q: int) -> np.ndarray:
    """Fold point with psi1 + psi2 = 1, theta log psi1 = -pi p, theta log psi2 = -pi q."""
    if p % 2 == 0 or q % 2 == 0 or p <= 0 or q <= 0:
        raise ValueError("fold indices must be positive odd integers")
    y = brentq(lambda t: math.log1p(-t) / math.log(t) - p / q, 1e-15, 1 - 1e-15, xtol=1e-17, rtol=1e-15)
    theta = math.pi * q / -math.log(y)
    return np.array([1 - y, y, math.log(theta)])


def _trace_arm(z0, t0, step: float, theta_hi: float, max_points: int = 100000):
    pts = []
    z, t, h = z0, t0, step
    failures = 0
    while len(pts) < max_points:
        zc, its = _correct(z + h * t)
        if zc is None:
            failures += 1
            h *= 0.5
            if failures >= 3 and h < step * 1e-3:
                break
            continue
        failures = 0
        if not (0 < zc[0] < 1 and 0 < zc[1] < 1) or math.exp(zc[2]) > theta_hi:
            break
        _, jac = _system(zc)
        t = _tangent(jac, t)
        z = zc
        pts.append(z)
        if its > 5:
            h *= 0.5
        elif h < step:
            h = min(step, 2 * h)
    return pts


def fold_pairs(branches: int) -> list[tuple[int, int]]:
    """Odd (p, q) whose fold labels satisfy |n|, |m| <= branches."""
    odd = range(1, 2 * branches + 2, 2)
    return [(p, q) for p in odd for q in odd if abs(q - p) // 2 <= branches]


def trace_curves(theta_range: tuple[float, float] = (0.0, 100.0), step: float = 0.01,
                 branches: int = 8) -> list[Polyline]:
    """Failure curves whose fold theta lies in ``theta_range``; each is one polyline.

    Both arms leave the fold and are followed until they exit the unit
    square or theta exceeds the upper end of the range.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    lo, hi = theta_range
    out: list[Polyline] = []
    for p, q in fold_pairs(branches):
        z0 = fold_seed(p, q)
        theta0 = math.exp(z0[2])
        if not (lo <= theta0 <= hi):
            continue
        _, jac = _system(z0)
        t0 = _tangent(jac)
        left = _trace_arm(z0, -t0, step, hi)
        right = _trace_arm(z0, t0, step, hi)
        chain = left[::-1] + [z0] + right
        pts = [_point(float(z[0]), float(z[1]), math.exp(float(z[2]))) for z in chain]
        out.append(Polyline(f"{p}-{q}", (p, q), pts))
    return out


# ---------------------------------------------------------------------------
# output


def curves_csv(curves: Sequence[Polyline]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "theta", "psi1", "psi2", "residual"])
    for c in curves:
        for p in c.points:
            w.writerow(p.as_row(c.label))
    return buf.getvalue()


def curves_svg(curves: Sequence[Polyline], size: int = 480) -> str:
    """Static SVG of the unit square with each curve drawn as a polyline."""
    pad = 30
    scale = size - 2 * pad

    def xy(a, b):
        return f"{pad + a * scale:.2f},{pad + (1 - b) * scale:.2f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{pad}" y="{pad}" width="{scale}" height="{scale}" fill="white" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad + scale}" y2="{pad + scale}" '
        'stroke="#999" stroke-dasharray="4 3"/>',
        f'<text x="{pad + scale / 2}" y="{size - 6}" font-size="12" text-anchor="middle">psi1</text>',
        f'<text x="10" y="{pad + scale / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 10 {pad + scale / 2})">psi2</text>',
    ]
    for c in curves:
        pts = " ".join(xy(p.psi1, p.psi2) for p in c.points)
        lines.append(f'<polyline fill="none" stroke="steelblue" stroke-width="0.8" '
                     f'data-branch="{c.label}" points="{pts}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
