"""Mellin transforms along the vertical line Re s = alpha.

``M(theta) = int y^(alpha + i theta) rho(dy)`` for atomic measures,
catalog laws and integral kernels, plus moments and the alpha-conjugate
density of a law. :func:`mellin_line` packages a measure-like object
into a :class:`LineTransform` that the certifier scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .laws import Law, MomentDivergence, PowerTerm, power_piece_derivative, power_piece_integral
from .measures import (
    CallableKernel,
    ExpKernel,
    FilterModel,
    GeometricAtoms,
    PowerAtoms,
    PowerPiece,
    SpectralMeasure,
    StepKernel,
    TabulatedPiece,
    kernel_to_measure,
    merge_atoms,
)
from .quadrature import _rule, adaptive_panels, exp_sum_nodes, line_integral

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class MellinSample:
    theta: float
    value: complex
    abs_error: float = 0.0


# ---------------------------------------------------------------------------
# atoms


def _atom_arrays(weights) -> tuple[np.ndarray, np.ndarray]:
    xs = np.array([float(x) for x, _ in weights])
    ws = np.array([float(w) for _, w in weights])
    if np.any(xs <= 0) or np.any(ws <= 0):
        raise ValueError("atom locations and masses must be positive")
    return xs, ws


def eval_atoms(weights, alpha: float, theta):
    """sum_i w_i x_i^alpha exp(i theta log x_i); ``theta`` may be an array."""
    xs, ws = _atom_arrays(weights)
    th = np.asarray(theta, dtype=float)
    u = np.log(xs)
    c = ws * xs**alpha
    out = np.exp(1j * np.multiply.outer(th, u)) @ c
    return complex(out) if th.ndim == 0 else out


def eval_atoms_derivative(weights, alpha: float, theta):
    """d/dtheta of :func:`eval_atoms`."""
    xs, ws = _atom_arrays(weights)
    th = np.asarray(theta, dtype=float)
    u = np.log(xs)
    c = 1j * u * ws * xs**alpha
    out = np.exp(1j * np.multiply.outer(th, u)) @ c
    return complex(out) if th.ndim == 0 else out


def atoms_derivative_bound(weights, alpha: float) -> float:
    xs, ws = _atom_arrays(weights)
    return float(np.sum(ws * xs**alpha * np.abs(np.log(xs))))


# ---------------------------------------------------------------------------
# catalog laws


def _law_envelope(law: Law, alpha: float):
    def env(u):
        # past exp overflow the envelope is 0 in the limit whenever the moment is finite
        with np.errstate(over="ignore", invalid="ignore"):
            y = np.exp(u)
            out = np.exp((alpha + 1.0) * u) * law.pdf(y)
        return np.where(np.isfinite(out), out, 0.0)

    return env


def _law_log_range(law: Law) -> tuple[float, float, list[float]]:
    lo, hi = law.support()
    ulo = math.log(lo) if lo > 0 else -math.inf
    uhi = math.log(hi) if hi < math.inf else math.inf
    bps = [math.log(b) for b in law.breakpoints() if b > 0]
    return ulo, uhi, bps


def law_by_quadrature(law: Law, alpha: float, theta: float, tol: float = QUAD_TOL) -> MellinSample:
    """E[Y^(alpha+i theta)] from the atoms plus adaptive quadrature of the density."""
    value = 0j
    for x, w in law.atoms():
        value += w * x**alpha * complex(math.cos(theta * math.log(x)), math.sin(theta * math.log(x)))
    ulo, uhi, bps = _law_log_range(law)
    if law.power_terms() == ():
        return MellinSample(theta, value, 0.0)
    v, err = line_integral(_law_envelope(law, alpha), ulo, uhi, theta, tol, bps)
    return MellinSample(theta, value + v, err)


def eval_catalog(dist: Law, alpha: float, theta: float, method: str = "auto",
                 delta: float = 0.0) -> MellinSample:
    """E[Y^(alpha + i theta)]: closed form when the law has one, else quadrature."""
    dist.check_moment(alpha + delta)
    if method == "auto":
        closed = dist.mellin(complex(alpha, theta))
        if closed is not None:
            return MellinSample(theta, complex(closed), 0.0)
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    return law_by_quadrature(dist, alpha, theta)


# ---------------------------------------------------------------------------
# kernels


def eval_kernel(kernel, alpha: float, theta: float, method: str = "auto") -> MellinSample:
    """int f(s)^(alpha + i theta) ds over the support of the kernel."""
    if not math.isfinite(kernel.power_integral(alpha)):
        raise MomentDivergence("integral of f^alpha diverges")
    s = complex(alpha, theta)
    if isinstance(kernel, StepKernel):
        pairs = [(v, m) for v, m in zip(kernel.values, kernel.lengths) if v > 0]
        return MellinSample(theta, complex(eval_atoms(pairs, alpha, theta)), 0.0)
    if isinstance(kernel, ExpKernel):
        if method == "auto":
            scale = 2.0 if kernel.two_sided else 1.0
            return MellinSample(theta, scale / (kernel.rate * s), 0.0)
        # image measure (scale/rate) dy/y on (0, 1), in log coordinates
        scale = (2.0 if kernel.two_sided else 1.0) / kernel.rate

        def env(u):
            return scale * np.exp(alpha * u)

        v, err = line_integral(env, -math.inf, 0.0, theta, QUAD_TOL)
        return MellinSample(theta, v, err)
    if isinstance(kernel, CallableKernel):
        def func(t):
            f = np.asarray(kernel(t), dtype=float)
            pos = f > 0
            out = np.zeros(f.shape, dtype=complex)
            out[pos] = np.exp(s * np.log(f[pos]))
            return out

        width = (kernel.hi - kernel.lo) / 64
        v, err, _, _ = adaptive_panels(func, [kernel.lo, kernel.hi], QUAD_TOL, width)
        return MellinSample(theta, v, err)
    raise TypeError(f"unsupported kernel {type(kernel).__name__}")


# ---------------------------------------------------------------------------
# moments and conjugates


def moment(measure, p: float) -> float:
    """int y^p rho(dy); ``math.inf`` on divergence."""
    if isinstance(measure, SpectralMeasure):
        return measure.moment(p)
    if isinstance(measure, Law):
        try:
            measure.check_moment(p)
        except MomentDivergence:
            return math.inf
        closed = measure.mellin(p)
        if closed is not None:
            return float(np.real(closed))
        return law_by_quadrature(measure, p, 0.0).value.real
    if isinstance(measure, (StepKernel, ExpKernel, CallableKernel)):
        return measure.power_integral(p)
    if isinstance(measure, (list, tuple)):
        return SpectralMeasure(merge_atoms(measure)).moment(p)
    raise TypeError(f"unsupported measure {type(measure).__name__}")


def alpha_conjugate_atoms(dist: Law, alpha: float) -> tuple[tuple[float, float], ...]:
    """Atoms (log x, w x^alpha / E[Y^alpha]) of the tilted law of log Y."""
    norm = moment(dist, alpha)
    if not math.isfinite(norm):
        raise MomentDivergence(f"E[Y^{alpha:g}] is infinite")
    return tuple((math.log(x), w * x**alpha / norm) for x, w in dist.atoms())


def alpha_conjugate_density(dist: Law, alpha: float, x):
    """Density at x of the law with density c e^(alpha x) (density of log Y at x).

    Atoms of the tilted law are flagged by returning ``inf`` at their
    location; :func:`alpha_conjugate_atoms` lists their masses.
    """
    norm = moment(dist, alpha)
    if not math.isfinite(norm):
        raise MomentDivergence(f"E[Y^{alpha:g}] is infinite")
    x = np.asarray(x, dtype=float)
    y = np.exp(x)
    out = np.exp(alpha * x) * dist.pdf(y) * y / norm
    for loc, _ in dist.atoms():
        out = np.where(np.isclose(x, math.log(loc), rtol=0, atol=1e-14), math.inf, out)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# line transforms for certification


@dataclass
class ExpSumPart:
    """sum_k c_k exp(i theta u_k) with c_k > 0; ``err`` bounds its distance to the target."""

    u: np.ndarray
    c: np.ndarray
    err: float = 0.0
    exact: bool = True

    def value(self, theta: np.ndarray, center: float) -> np.ndarray:
        return self._sum(theta, self.c, center)

    def deriv(self, theta: np.ndarray, center: float) -> np.ndarray:
        return self._sum(theta, 1j * (self.u - center) * self.c, center)

    def _sum(self, theta, coef, center):
        theta = np.atleast_1d(theta)
        out = np.empty(theta.shape, dtype=complex)
        step = max(1, 2_000_000 // max(1, self.u.size))
        shifted = self.u - center
        for i in range(0, theta.size, step):
            out[i:i + step] = np.exp(1j * np.multiply.outer(theta[i:i + step], shifted)) @ coef
        return out

    def lip(self, center: float, k: int) -> float:
        return float(np.sum(self.c * np.abs(self.u - center) ** k))

    def m0(self) -> float:
        return float(self.c.sum())


@dataclass
class GeometricPart:
    family: GeometricAtoms
    alpha: float

    def value(self, theta, center):
        s = self.alpha + 1j * np.atleast_1d(theta)
        return self.family.power_sum(s) * np.exp(-1j * np.atleast_1d(theta) * center)

    def deriv(self, theta, center):
        theta = np.atleast_1d(theta)
        s = self.alpha + 1j * theta
        raw = self.family.power_sum(s)
        d = self.family.power_sum_derivative(s)
        return (d - 1j * center * raw) * np.exp(-1j * theta * center)

    def lip(self, center, k):
        fam = self.family
        n = fam.truncation(self.alpha, 1e-17) + 64
        x = fam.locations(n - fam.start + 1)
        terms = x**self.alpha * np.abs(np.log(x) - center) ** k
        return float(terms.sum() * (1 + 1e-12))

    def m0(self):
        return float(self.family.power_sum(self.alpha).real)


@dataclass
class PowerPart:
    term: PowerTerm
    alpha: float

    def _s(self, theta):
        return self.alpha + 1j * np.atleast_1d(theta)

    def value(self, theta, center):
        t = self.term
        theta = np.atleast_1d(theta)
        return power_piece_integral(t.c, t.p, t.a, t.b, self._s(theta)) * np.exp(-1j * theta * center)

    def deriv(self, theta, center):
        t = self.term
        theta = np.atleast_1d(theta)
        s = self._s(theta)
        raw = power_piece_integral(t.c, t.p, t.a, t.b, s)
        d = power_piece_derivative(t.c, t.p, t.a, t.b, s)
        return (d - 1j * center * raw) * np.exp(-1j * theta * center)

    def lip(self, center, k):
        t = self.term
        beta = self.alpha - complex(t.p).real
        lo = math.log(t.a) if t.a > 0 else -math.inf
        hi = math.log(t.b) if t.b < math.inf else math.inf
        f = lambda u: math.exp(beta * u) * abs(u - center) ** k  # noqa: E731
        pts = [center] if lo < center < hi else []
        total = 0.0
        edges = [lo, *pts, hi]
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, a, b, limit=200, epsabs=0, epsrel=1e-10)[0]
        return abs(t.c) * total * (1 + 1e-8)

    def m0(self):
        t = self.term
        return float(np.real(power_piece_integral(t.c, t.p, t.a, t.b, self.alpha)))

    def decay_bound(self, theta: float) -> float:
        """Upper bound on |value(theta')| for every theta' >= theta."""
        t = self.term
        p = complex(t.p)
        re_k = self.alpha - p.real
        im_gap = max(0.0, theta - abs(p.imag))
        mod_k = math.hypot(re_k, im_gap)
        if mod_k == 0:
            return math.inf
        ends = (t.b**re_k if t.b < math.inf else 0.0) + (t.a**re_k if t.a > 0 else 0.0)
        return abs(t.c) * ends / mod_k


@dataclass
class LineTransform:
    """A Mellin line transform as a sum of parts with exact value/derivative.

    ``center`` is the log-location about which Lipschitz bounds are taken;
    |M| is unchanged by the recentering phase factor.
    """

    alpha: float
    parts: list
    label: str = ""
    closed_form: Optional[str] = None
    closed_value: Optional[object] = None
    atoms: tuple = ()
    has_continuous: bool = False
    center: float = 0.0
    _lip: dict = field(default_factory=dict)

    @property
    def err(self) -> float:
        return float(sum(getattr(p, "err", 0.0) for p in self.parts))

    @property
    def m0(self) -> float:
        if self.closed_value is not None and not self.parts:
            return float(np.real(self.closed_value(np.array([0.0]))[0]))
        return float(sum(p.m0() for p in self.parts))

    def value(self, theta):
        """M(theta) itself (no recentering)."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.closed_value is not None:
            return self.closed_value(th)
        return self.value_centered(th) * np.exp(1j * th * self.center)

    def value_centered(self, theta):
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.zeros(th.shape, dtype=complex)
        for p in self.parts:
            out += p.value(th, self.center)
        return out

    def deriv_centered(self, theta):
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.zeros(th.shape, dtype=complex)
        for p in self.parts:
            out += p.deriv(th, self.center)
        return out

    def lip(self, k: int) -> float:
        if k not in self._lip:
            self._lip[k] = float(sum(p.lip(self.center, k) for p in self.parts))
        return self._lip[k]

    def atomic_parts(self):
        return [p for p in self.parts if isinstance(p, ExpSumPart) and p.exact]

    def continuous_parts(self):
        return [p for p in self.parts if not (isinstance(p, ExpSumPart) and p.exact)
                and not isinstance(p, GeometricPart)]

    def families(self):
        return [p.family for p in self.parts if isinstance(p, GeometricPart)]


def _weighted_median(u: np.ndarray, c: np.ndarray) -> float:
    order = np.argsort(u)
    cum = np.cumsum(c[order])
    return float(u[order][np.searchsorted(cum, 0.5 * cum[-1])])


def _atoms_part(atoms, alpha) -> ExpSumPart:
    xs, ws = _atom_arrays(atoms)
    return ExpSumPart(np.log(xs), ws * xs**alpha)


def _finish(tr: LineTransform) -> LineTransform:
    atomic = tr.atomic_parts()
    if atomic:
        u = np.concatenate([p.u for p in atomic])
        c = np.concatenate([p.c for p in atomic])
        tr.center = _weighted_median(u, c)
    return tr


def mellin_line(obj, alpha: float, theta_max: float = 200.0) -> LineTransform:
    """Build the line transform of a measure, law, kernel, filter model or weight list.

    ``theta_max`` only matters for parts represented by quadrature nodes
    (tabulated densities, callable kernels, laws without power terms).
    """
    if isinstance(obj, FilterModel):
        return mellin_line(obj.spectral(), obj.alpha if alpha is None else alpha, theta_max)
    if isinstance(obj, (list, tuple)) and obj and not isinstance(obj[0], (list, tuple)):
        obj = SpectralMeasure.from_weights(obj)
    elif isinstance(obj, (list, tuple)):
        obj = SpectralMeasure(merge_atoms(obj))
    if not alpha >= 0:
        raise ValueError("filter checks are implemented for alpha >= 0 only")

    if isinstance(obj, SpectralMeasure):
        if not math.isfinite(obj.moment(alpha)):
            raise MomentDivergence(f"moment of order {alpha:g} is infinite")
        parts: list = []
        atoms = list(obj.atoms)
        if atoms:
            parts.append(_atoms_part(atoms, alpha))
        for fam in obj.families:
            if isinstance(fam, GeometricAtoms):
                parts.append(GeometricPart(fam, alpha))
            else:
                k = fam.truncation(alpha, 1e-12)
                xs = fam.locations(k)
                part = ExpSumPart(np.log(xs), xs**alpha, err=fam.tail_bound(alpha, k), exact=False)
                parts.append(part)
        for piece in obj.ac_pieces:
            if isinstance(piece, PowerPiece):
                parts.append(PowerPart(piece.term(), alpha))
            else:
                parts.append(_tabulated_part(piece, alpha, theta_max))
        tr = LineTransform(alpha, parts, "measure", atoms=tuple(atoms),
                           has_continuous=bool(obj.ac_pieces))
        return _finish(tr)

    if isinstance(obj, Law):
        obj.check_moment(alpha)
        reason = obj.never_vanishes(alpha)
        closed = None
        if obj.mellin(complex(alpha, 0.0)) is not None:
            closed = (lambda law: (lambda th: np.asarray(law.mellin(alpha + 1j * th), dtype=complex)))(obj)
        terms = obj.power_terms()
        parts = []
        if obj.atoms():
            parts.append(_atoms_part(obj.atoms(), alpha))
        if terms is not None:
            parts.extend(PowerPart(t, alpha) for t in terms)
        elif reason is None:
            ulo, uhi, bps = _law_log_range(obj)
            u, c, err = exp_sum_nodes(_law_envelope(obj, alpha), ulo, uhi, theta_max, 1e-10, bps)
            parts.append(ExpSumPart(u, c, err, exact=False))
        tr = LineTransform(alpha, parts, obj.kind, reason, closed if reason else None,
                           atoms=obj.atoms(), has_continuous=bool(terms) or terms is None)
        return _finish(tr)

    if isinstance(obj, ExpKernel):
        if alpha <= 0:
            raise MomentDivergence("integral of f^alpha diverges for alpha <= 0")
        scale = (2.0 if obj.two_sided else 1.0) / obj.rate
        part = PowerPart(PowerTerm(scale, 0.0, 0.0, 1.0), alpha)
        return LineTransform(alpha, [part], "exp-kernel",
                             "1/(rate (alpha + i theta)) has no zeros",
                             lambda th: scale / (alpha + 1j * th), has_continuous=True)
    if isinstance(obj, StepKernel):
        tr = mellin_line(kernel_to_measure(obj), alpha, theta_max)
        tr.label = "step-kernel"
        return tr
    if isinstance(obj, CallableKernel):
        return _finish(LineTransform(alpha, [_callable_part(obj, alpha, theta_max)], "kernel",
                                     has_continuous=True))
    raise TypeError(f"cannot build a line transform for {type(obj).__name__}")


def _tabulated_part(piece: TabulatedPiece, alpha: float, theta_max: float) -> ExpSumPart:
    def env(u):
        y = np.exp(u)
        return np.exp((alpha + 1) * u) * piece.density(y)

    bps = [math.log(x) for x in piece.xs]
    u, c, err = exp_sum_nodes(env, bps[0], bps[-1], theta_max, 1e-10, bps)
    return ExpSumPart(u, c, err, exact=False)


def _callable_part(kernel: CallableKernel, alpha: float, theta_max: float) -> ExpSumPart:
    def func(t):
        f = np.asarray(kernel(t), dtype=float)
        pos = f > 0
        out = np.zeros(f.shape, dtype=complex)
        out[pos] = np.exp((alpha + 1j * theta_max) * np.log(f[pos]))
        return out

    _, err, lo, hi = adaptive_panels(func, [kernel.lo, kernel.hi], 1e-10, (kernel.hi - kernel.lo) / 64)
    x20, w20 = _rule(20)
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    s = (mid + half * x20).ravel()
    w = (np.broadcast_to(w20, half.shape[:1] + w20.shape) * half).ravel()
    f = np.asarray(kernel(s), dtype=float)
    pos = f > 0
    return ExpSumPart(np.log(f[pos]), w[pos] * f[pos] ** alpha, err, exact=False)


def eval_measure(measure, alpha: float, theta: float) -> MellinSample:
    """Line transform of any supported object at one theta."""
    if isinstance(measure, Law):
        return eval_catalog(measure, alpha, theta)
    if isinstance(measure, (StepKernel, ExpKernel, CallableKernel)):
        return eval_kernel(measure, alpha, theta)
    tr = mellin_line(measure, alpha, max(abs(theta), 1.0))
    return MellinSample(theta, complex(tr.value(np.array([theta]))[0]), tr.err)
