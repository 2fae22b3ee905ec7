"""Spectral measures, kernels, filter models and the counterexample noise law."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from .laws import (
    CounterexampleLaw,
    CounterexampleSpec,
    Law,
    MomentDivergence,
    PowerTerm,
    Symmetrized,
    counterexample_tail,
    default_trunc,
    law_from_dict,
    power_piece_integral,
)

__all__ = [
    "AcPiece", "CallableKernel", "CounterexampleSpec", "ExpKernel", "FilterModel",
    "GeometricAtoms", "PowerAtoms", "PowerMeasure", "PowerPiece", "SpectralMeasure",
    "StepKernel", "TabulatedPiece", "build_noise_law", "counterexample_tail",
    "kernel_to_measure", "sample_noise",
]

FAMILY_TOL = 1e-6


# ---------------------------------------------------------------------------
# absolutely continuous pieces


@dataclass(frozen=True)
class PowerPiece:
    """Density c * x^(-(p+1)) on (a, b); a may be 0 and b may be inf."""

    c: float
    p: float
    a: float
    b: float
    source: str = "power"

    def __post_init__(self):
        if not (self.c > 0 and 0 <= self.a < self.b <= math.inf):
            raise ValueError("power piece needs c > 0 and 0 <= a < b <= inf")

    @classmethod
    def exp_kernel_image(cls, rate: float, two_sided: bool = False) -> "PowerPiece":
        """Image of Lebesgue measure under s -> exp(-rate*|s|): density (rate*y)^-1 on (0, 1)."""
        return cls((2.0 if two_sided else 1.0) / rate, 0.0, 0.0, 1.0, "exp-kernel")

    def term(self) -> PowerTerm:
        return PowerTerm(self.c, self.p, self.a, self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        return np.where(inside, self.c * np.power(np.where(inside, x, 1.0), -self.p - 1), 0.0)

    def moment(self, q: float) -> float:
        try:
            return float(power_piece_integral(self.c, self.p, self.a, self.b, q).real)
        except MomentDivergence:
            return math.inf

    def to_dict(self):
        return {"kind": "power", "c": self.c, "p": self.p, "a": self.a, "b": _num(self.b),
                "source": self.source}


@dataclass(frozen=True)
class TabulatedPiece:
    """Piecewise-linear density through (xs, ys) on [xs[0], xs[-1]]."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise ValueError("tabulated piece needs matching 1-d grids of length >= 2")
        if xs[0] <= 0 or np.any(np.diff(xs) <= 0) or np.any(ys < 0):
            raise ValueError("tabulated piece needs increasing positive xs and nonnegative ys")

    @property
    def a(self) -> float:
        return self.xs[0]

    @property
    def b(self) -> float:
        return self.xs[-1]

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), np.interp(x, self.xs, self.ys), 0.0)

    def moment(self, q: float) -> float:
        xs = np.asarray(self.xs)
        total = 0.0
        for lo, hi in zip(xs[:-1], xs[1:]):
            total += integrate.quad(lambda t: t**q * float(self.density(t)), lo, hi, epsabs=0,
                                    epsrel=1e-12)[0]
        return total

    def to_dict(self):
        return {"kind": "tabulated", "xs": list(self.xs), "ys": list(self.ys)}


AcPiece = Union[PowerPiece, TabulatedPiece]


def _num(v: float):
    return "inf" if v == math.inf else v


def _float(v) -> float:
    return math.inf if v == "inf" else float(v)


def ac_piece_from_dict(d: dict) -> AcPiece:
    if d["kind"] == "power":
        return PowerPiece(float(d["c"]), float(d["p"]), float(d["a"]), _float(d["b"]),
                          d.get("source", "power"))
    if d["kind"] == "tabulated":
        return TabulatedPiece(tuple(d["xs"]), tuple(d["ys"]))
    raise ValueError(f"unknown ac piece kind {d['kind']!r}")


# ---------------------------------------------------------------------------
# infinite atom families


@dataclass(frozen=True)
class GeometricAtoms:
    """Unit-mass atoms at scale * ratio^j for j >= start (0 < ratio < 1)."""

    scale: float = 1.0
    ratio: float = 0.5
    start: int = 1

    def __post_init__(self):
        if not (self.scale > 0 and 0 < self.ratio < 1):
            raise ValueError("geometric family needs scale > 0 and 0 < ratio < 1")

    def power_sum(self, s):
        """Sum over j of (scale * ratio^j)^s in closed form."""
        s = np.asarray(s, dtype=complex)
        if np.any(s.real <= 0):
            raise MomentDivergence("geometric family sum diverges for Re s <= 0")
        rs = np.exp(s * math.log(self.ratio))
        return np.exp(s * (math.log(self.scale) + self.start * math.log(self.ratio))) / (1 - rs)

    def power_sum_derivative(self, s):
        s = np.asarray(s, dtype=complex)
        lr = math.log(self.ratio)
        rs = np.exp(s * lr)
        head = math.log(self.scale) + self.start * lr
        return 1j * self.power_sum(s) * (head + rs * lr / (1 - rs))

    def truncation(self, p: float, tol: float = FAMILY_TOL) -> int:
        """Smallest K with sum_{j>K} psi_j^p <= tol * min(1, sum_j psi_j^p)."""
        total = float(self.power_sum(p).real)
        # tail/total = ratio^(p*(K - start + 1))
        n = math.ceil(math.log(tol * min(1.0, 1.0 / total)) / (p * math.log(self.ratio)))
        return self.start + max(n, 1) - 1

    def locations(self, count: int) -> np.ndarray:
        j = np.arange(self.start, self.start + count)
        return self.scale * self.ratio**j

    def log_spacing(self) -> float:
        return -math.log(self.ratio)

    def to_dict(self):
        return {"kind": "geometric", "scale": self.scale, "ratio": self.ratio, "start": self.start}


@dataclass(frozen=True)
class PowerAtoms:
    """Unit-mass atoms at j^(-gamma), j >= 1."""

    gamma: float = 2.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def converges(self, p: float) -> bool:
        return self.gamma * p > 1

    def tail_bound(self, p: float, k: int) -> float:
        """Integral bound: sum_{j>K} j^(-gamma p) <= K^(1 - gamma p)/(gamma p - 1)."""
        e = self.gamma * p
        return k ** (1 - e) / (e - 1)

    def truncation(self, p: float, tol: float = FAMILY_TOL) -> int:
        if not self.converges(p):
            raise MomentDivergence("power family sum diverges")
        total = self.power_sum_real(p)
        e = self.gamma * p
        k = math.ceil((tol * min(1.0, total) * (e - 1)) ** (1 / (1 - e)))
        return max(k, 1)

    def power_sum_real(self, p: float) -> float:
        from scipy.special import zeta

        return float(zeta(self.gamma * p, 1))

    def locations(self, count: int) -> np.ndarray:
        return np.arange(1, count + 1, dtype=float) ** (-self.gamma)

    def to_dict(self):
        return {"kind": "power-family", "gamma": self.gamma}


AtomFamily = Union[GeometricAtoms, PowerAtoms]


def family_from_dict(d: dict) -> AtomFamily:
    if d["kind"] == "geometric":
        return GeometricAtoms(float(d["scale"]), float(d["ratio"]), int(d["start"]))
    if d["kind"] == "power-family":
        return PowerAtoms(float(d["gamma"]))
    raise ValueError(f"unknown family kind {d['kind']!r}")


# ---------------------------------------------------------------------------
# spectral measure


def merge_atoms(atoms) -> tuple[tuple[float, float], ...]:
    """Group equal locations and add their masses; result sorted by location."""
    acc: dict[float, float] = {}
    for x, w in atoms:
        x, w = float(x), float(w)
        if not (x > 0 and w > 0):
            raise ValueError("atom locations and masses must be positive")
        acc[x] = acc.get(x, 0.0) + w
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class SpectralMeasure:
    """A sigma-finite measure on (0, inf): atoms, atom families and ac pieces."""

    atoms: tuple[tuple[float, float], ...] = ()
    ac_pieces: tuple[AcPiece, ...] = ()
    families: tuple[AtomFamily, ...] = ()

    def __post_init__(self):
        locs = [x for x, _ in self.atoms]
        if any(not (x > 0) for x in locs) or any(not (w > 0) for _, w in self.atoms):
            raise ValueError("atom locations and masses must be strictly positive")
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct (use from_weights to merge)")
        object.__setattr__(self, "atoms", tuple((float(x), float(w)) for x, w in self.atoms))
        object.__setattr__(self, "ac_pieces", tuple(self.ac_pieces))
        object.__setattr__(self, "families", tuple(self.families))

    @classmethod
    def from_weights(cls, weights, masses=None) -> "SpectralMeasure":
        """Unit masses at each weight; equal weights are merged."""
        weights = list(weights)
        masses = [1.0] * len(weights) if masses is None else list(masses)
        return cls(merge_atoms(zip(weights, masses)))

    @property
    def is_finite_atomic(self) -> bool:
        return not self.ac_pieces and not self.families

    def moment(self, p: float) -> float:
        total = sum(w * x**p for x, w in self.atoms)
        for fam in self.families:
            if isinstance(fam, GeometricAtoms):
                if p <= 0:
                    return math.inf
                total += float(fam.power_sum(p).real)
            else:
                if not fam.converges(p):
                    return math.inf
                total += fam.power_sum_real(p)
        for piece in self.ac_pieces:
            total += piece.moment(p)
        return total

    def check_moment_condition(self, alpha: float, delta: float) -> None:
        for p in (alpha - delta, alpha + delta):
            if not math.isfinite(self.moment(p)):
                raise MomentDivergence(f"moment of order {p:g} is infinite")

    def bounded_support(self) -> bool:
        # atom families accumulate only at 0, so only ac pieces can be unbounded
        return all(p.b < math.inf for p in self.ac_pieces)

    def to_dict(self) -> dict:
        return {
            "atoms": [[x, w] for x, w in self.atoms],
            "ac_pieces": [p.to_dict() for p in self.ac_pieces],
            "families": [f.to_dict() for f in self.families],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralMeasure":
        return cls(
            tuple((float(x), float(w)) for x, w in d.get("atoms", [])),
            tuple(ac_piece_from_dict(p) for p in d.get("ac_pieces", [])),
            tuple(family_from_dict(f) for f in d.get("families", [])),
        )


@dataclass(frozen=True)
class PowerMeasure:
    """nu_alpha: tail x^-alpha for alpha != 0.

    Only alpha >= 0 is used by the filter checks; for negative alpha the
    roles of the tail and the head swap and the object is informational.
    """

    alpha: float

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 0:
            raise ValueError("nu_0 has no finite tail; use the log-scale measure")
        return np.power(x, -self.alpha)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return abs(self.alpha) * np.power(x, -self.alpha - 1)

    def to_dict(self):
        return {"kind": "power-measure", "alpha": self.alpha}


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class StepKernel:
    """f = values[k] on consecutive intervals of length lengths[k], starting at 0."""

    values: tuple[float, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.lengths) or not self.values:
            raise ValueError("step kernel needs matching non-empty values and lengths")
        if any(v < 0 for v in self.values) or any(m <= 0 for m in self.lengths):
            raise ValueError("step kernel needs nonnegative values and positive lengths")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "lengths", tuple(float(m) for m in self.lengths))

    @classmethod
    def unit(cls, values) -> "StepKernel":
        values = tuple(values)
        return cls(values, (1.0,) * len(values))

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, float(sum(self.lengths)))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        edges = np.concatenate([[0.0], np.cumsum(self.lengths)])
        idx = np.searchsorted(edges, s, side="right") - 1
        inside = (s >= 0) & (idx < len(self.values))
        vals = np.asarray(self.values + (0.0,))
        return np.where(inside, vals[np.clip(idx, 0, len(self.values))], 0.0)

    def power_integral(self, p: float) -> float:
        return sum(m * v**p for v, m in zip(self.values, self.lengths) if v > 0)

    def to_dict(self):
        return {"kind": "step", "values": list(self.values), "lengths": list(self.lengths)}


@dataclass(frozen=True)
class ExpKernel:
    """exp(-rate*s) on s > 0, or exp(-rate*|s|) when two-sided."""

    rate: float = 1.0
    two_sided: bool = False

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("exponential kernel needs a positive rate")

    @property
    def support(self) -> tuple[float, float]:
        return (-math.inf if self.two_sided else 0.0, math.inf)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.two_sided:
            return np.exp(-self.rate * np.abs(s))
        return np.where(s > 0, np.exp(-self.rate * np.maximum(s, 0.0)), 0.0)

    def power_integral(self, p: float) -> float:
        if p <= 0:
            return math.inf
        return (2.0 if self.two_sided else 1.0) / (self.rate * p)

    def to_dict(self):
        return {"kind": "exp", "rate": self.rate, "two_sided": self.two_sided}


@dataclass(frozen=True)
class CallableKernel:
    """A nonnegative function on the finite interval [lo, hi]; evaluated by quadrature."""

    func: Callable = field(compare=False)
    lo: float = 0.0
    hi: float = 1.0
    name: str = "callable"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError("callable kernels need a finite support interval")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= self.lo) & (s <= self.hi)
        return np.where(inside, np.asarray(self.func(np.clip(s, self.lo, self.hi)), dtype=float), 0.0)

    def power_integral(self, p: float) -> float:
        val, _ = integrate.quad(lambda t: float(self(t)) ** p if float(self(t)) > 0 else 0.0,
                                self.lo, self.hi, limit=200, epsabs=0, epsrel=1e-11)
        return val

    def to_dict(self):
        return {"kind": "callable", "name": self.name, "lo": self.lo, "hi": self.hi}


Kernel = Union[StepKernel, ExpKernel, CallableKernel]


def kernel_from_dict(d: dict) -> Kernel:
    if d["kind"] == "step":
        return StepKernel(tuple(d["values"]), tuple(d["lengths"]))
    if d["kind"] == "exp":
        return ExpKernel(float(d["rate"]), bool(d.get("two_sided", False)))
    raise ValueError(f"kernel kind {d['kind']!r} cannot be deserialized")


def kernel_to_measure(kernel: Kernel) -> SpectralMeasure:
    """Image of Lebesgue measure under the kernel, restricted to (0, inf)."""
    if isinstance(kernel, StepKernel):
        pairs = [(v, m) for v, m in zip(kernel.values, kernel.lengths) if v > 0]
        return SpectralMeasure(merge_atoms(pairs))
    if isinstance(kernel, ExpKernel):
        return SpectralMeasure(ac_pieces=(PowerPiece.exp_kernel_image(kernel.rate, kernel.two_sided),))
    raise ValueError("only step and exponential kernels have a closed-form image measure")


# ---------------------------------------------------------------------------
# filter model


@dataclass(frozen=True)
class FilterModel:
    """A weighted sum, independent product or kernel integral with target index alpha."""

    kind: str
    alpha: float
    delta: float
    weights: tuple[float, ...] = ()
    family: Optional[AtomFamily] = None
    law: Optional[Law] = None
    kernel: Optional[Kernel] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (0 < self.delta < self.alpha):
            raise ValueError("delta must lie in (0, alpha)")
        if self.kind == "weighted_sum":
            if not self.weights and self.family is None:
                raise ValueError("weighted sum needs weights or a family")
            if any(not (w > 0) for w in self.weights):
                raise ValueError("weights must be strictly positive")
            if self.family is not None:
                p = self.alpha - self.delta
                if isinstance(self.family, GeometricAtoms):
                    pass  # ratio < 1 and p > 0: closed-form geometric sum
                elif not self.family.converges(p):
                    raise MomentDivergence(f"sum of psi_j^{p:g} diverges")
        elif self.kind == "product":
            if self.law is None:
                raise ValueError("product needs a law for the multiplier")
            self.law.check_moment(self.alpha + self.delta)
        elif self.kind == "kernel_integral":
            if self.kernel is None:
                raise ValueError("kernel integral needs a kernel")
            if not math.isfinite(self.kernel_condition()):
                raise MomentDivergence("kernel fails the integrability condition")
        else:
            raise ValueError(f"unknown filter kind {self.kind!r}")

    @classmethod
    def weighted_sum(cls, weights=(), alpha: float = 1.0, delta: Optional[float] = None,
                     family: Optional[AtomFamily] = None) -> "FilterModel":
        return cls("weighted_sum", alpha, alpha / 2 if delta is None else delta,
                   tuple(float(w) for w in weights), family=family)

    @classmethod
    def product(cls, law: Law, alpha: float, delta: Optional[float] = None) -> "FilterModel":
        if delta is None:
            room = law.upper_abscissa - alpha
            delta = min(alpha / 2, room / 2) if room > 0 else alpha / 2
        return cls("product", alpha, delta, law=law)

    @classmethod
    def kernel_integral(cls, kernel: Kernel, alpha: float, delta: Optional[float] = None) -> "FilterModel":
        return cls("kernel_integral", alpha, alpha / 2 if delta is None else delta, kernel=kernel)

    def kernel_condition(self) -> float:
        """Integral of f^(alpha-delta) v f^2 (alpha < 2) or f^(alpha-delta) v f^(alpha+delta)."""
        lo = self.alpha - self.delta
        hi = 2.0 if self.alpha < 2 else self.alpha + self.delta
        k = self.kernel
        if isinstance(k, StepKernel):
            return sum(m * max(v**lo, v**hi) for v, m in zip(k.values, k.lengths) if v > 0)
        if isinstance(k, ExpKernel):
            # f <= 1, so the max is the smaller power
            return k.power_integral(min(lo, hi))
        return CallableKernel.power_integral(k, min(lo, hi)) + CallableKernel.power_integral(k, max(lo, hi))

    def spectral(self):
        """The measure whose Mellin line transform decides the inverse problem."""
        if self.kind == "weighted_sum":
            fams = (self.family,) if self.family is not None else ()
            return SpectralMeasure(merge_atoms((w, 1.0) for w in self.weights), families=fams)
        if self.kind == "product":
            return self.law
        return self.kernel

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "alpha": self.alpha, "delta": self.delta}
        if self.weights:
            d["weights"] = list(self.weights)
        if self.family is not None:
            d["family"] = self.family.to_dict()
        if self.law is not None:
            d["law"] = self.law.to_dict()
        if self.kernel is not None:
            d["kernel"] = self.kernel.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FilterModel":
        return cls(
            d["kind"], float(d["alpha"]), float(d["delta"]),
            tuple(d.get("weights", ())),
            family_from_dict(d["family"]) if "family" in d else None,
            law_from_dict(d["law"]) if "law" in d else None,
            kernel_from_dict(d["kernel"]) if "kernel" in d else None,
        )


# ---------------------------------------------------------------------------
# counterexample noise and sampling


def build_noise_law(spec: CounterexampleSpec) -> Symmetrized:
    """Symmetrized noise law built from g * nu_alpha truncated at ``spec.trunc``.

    The one-sided law is available as ``.base``; when ``spec.trunc`` is
    None the smallest power of two with nu(trunc, inf) <= 1/2 is used.
    """
    if spec.trunc is None:
        spec = CounterexampleSpec(spec.alpha, spec.theta0, spec.a, spec.b, default_trunc(spec))
    return Symmetrized(CounterexampleLaw(spec))


CHUNK = 1 << 18
_BISECT_RTOL = 1e-12


def _bisect_isf(law: Law, v: np.ndarray) -> np.ndarray:
    """Smallest x with P(Y > x) <= v, by bisection in log space (relative tol 1e-12).

    Draws that fall inside an atom's jump are resolved to the atom up front.
    """
    out = np.full(v.shape, np.nan)
    for loc, mass in law.atoms():
        right = float(law.sf(loc))
        out = np.where((right <= v) & (v < right + mass), loc, out)
    todo = np.isnan(out)
    if not np.any(todo):
        return out
    out[todo] = _bisect_continuous(law, v[todo])
    return out


def _bisect_continuous(law: Law, v: np.ndarray) -> np.ndarray:
    lo_s, hi_s = law.support()
    lo = np.full(v.shape, math.log(lo_s) if lo_s > 0 else -50.0)
    hi = np.full(v.shape, math.log(hi_s) if hi_s < math.inf else 1.0)
    # expand the upper end until the tail drops below v
    need = law.sf(np.exp(hi)) > v
    while np.any(need):
        hi = np.where(need, hi * 2 + 1, hi)
        need = (law.sf(np.exp(hi)) > v) & (hi < 700)
    need = law.sf(np.exp(lo)) <= v
    while np.any(need & (lo > -700)):
        lo = np.where(need, lo * 2 - 1, lo)
        need = law.sf(np.exp(lo)) <= v
    while True:
        width = hi - lo
        if np.all(width <= _BISECT_RTOL):
            break
        mid = 0.5 * (lo + hi)
        above = law.sf(np.exp(mid)) > v
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    x = np.exp(hi)
    for loc, _ in law.atoms():
        # land exactly on atoms bracketed by the final interval
        hit = (np.exp(lo) <= loc) & (loc <= x * (1 + 1e-12))
        x = np.where(hit & (law.sf(loc) <= v), loc, x)
    return x


def _draw_positive(law: Law, v: np.ndarray) -> np.ndarray:
    closed = law.isf(v)
    if closed is not None:
        return np.asarray(closed, dtype=float)
    return _bisect_isf(law, v)


def sample_noise(law: Law, n: int, seed: int, chunk: int = CHUNK) -> np.ndarray:
    """n i.i.d. draws by inverse CDF; chunk k uses the generator seeded with seed + k."""
    n = int(n)
    out = np.empty(n)
    for k, start in enumerate(range(0, n, chunk)):
        m = min(chunk, n - start)
        rng = np.random.default_rng(seed + k)
        v = 1.0 - rng.random(m)  # in (0, 1]
        if isinstance(law, Symmetrized):
            sign = np.where(rng.random(m) < 0.5, -1.0, 1.0)
            out[start:start + m] = sign * _draw_positive(law.base, v)
        else:
            out[start:start + m] = _draw_positive(law, v)
    return out
