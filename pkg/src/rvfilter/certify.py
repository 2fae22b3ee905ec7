"""Decide whether a filter determines regular variation of its input.

The filter determines the input tail iff its Mellin line transform has no
real zero. Three routes are tried in order:

* closed-form certificates (dominant atom, lattice parity, catalog laws
  whose transform provably never vanishes);
* a periodic full scan when all atom log-locations are commensurable;
* a Lipschitz-certified window scan otherwise.

Every NotDetermining verdict is backed by a re-evaluated residual.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .laws import Law, MomentDivergence
from .measures import (
    CallableKernel,
    ExpKernel,
    FilterModel,
    PowerAtoms,
    PowerMeasure,
    SpectralMeasure,
    StepKernel,
    kernel_to_measure,
    merge_atoms,
)
from .mellin import ExpSumPart, GeometricPart, LineTransform, PowerPart, mellin_line

ZERO_RTOL = 1e-9
EQUALITY_RTOL = 1e-12
LATTICE_TOL = 1e-9
MAX_DENOMINATOR = 1000
LIP_SLACK = 0.9
WINDOW_CAP = 5000.0
PERIOD_CAP = 20000.0
DEFAULT_CONTINUOUS_WINDOW = 200.0

DETERMINING = "Determining"
NOT_DETERMINING = "NotDetermining"
WINDOW_CERTIFIED = "WindowCertified"


@dataclass(frozen=True)
class Verdict:
    kind: str
    certificate: Optional[str] = None
    theta0: Optional[float] = None
    residual: Optional[float] = None
    theta_max: Optional[float] = None
    min_modulus: Optional[float] = None
    lower_bound: Optional[float] = None
    method: Optional[str] = None
    detail: str = ""

    @property
    def determining(self) -> bool:
        return self.kind == DETERMINING

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class LatticeWitness:
    x0: float
    theta0: float
    members: tuple[int, ...]
    odd: tuple[int, ...]

    @property
    def k(self) -> tuple[int, ...]:
        """k_j with offset_j = pi (2 k_j + 1) / theta0."""
        return tuple((n - 1) // 2 for n in self.odd)


# ---------------------------------------------------------------------------
# commensurability


def common_divisor(offsets: Sequence[float], tol: float = LATTICE_TOL,
                   max_den: int = MAX_DENOMINATOR) -> Optional[tuple[float, tuple[int, ...]]]:
    """Largest D > 0 with offsets[i] = n_i * D for integers n_i, or None.

    Ratios to the first offset are reconstructed by continued fractions
    (``Fraction.limit_denominator``) and accepted within ``tol``.
    """
    offs = [float(d) for d in offsets]
    if not offs or any(d == 0 for d in offs):
        return None
    ref = offs[0]
    fracs = []
    for d in offs:
        r = d / ref
        f = Fraction(r).limit_denominator(max_den)
        if abs(r - float(f)) > tol * max(1.0, abs(r)):
            return None
        fracs.append(f)
    lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (f.denominator for f in fracs), 1)
    ints = [int(f * lcm) for f in fracs]
    g = reduce(math.gcd, (abs(m) for m in ints))
    sign = 1 if ref > 0 else -1
    unit = abs(ref) * g / lcm
    return unit, tuple(sign * m // g for m in ints)


def detect_lattice(atoms, anchor: int) -> Optional[LatticeWitness]:
    """theta0 > 0 with every log(x_j / x_anchor) an odd multiple of pi / theta0, if any."""
    atoms = list(atoms)
    if len(atoms) < 2:
        return None
    x0 = float(atoms[anchor][0])
    idx = [j for j in range(len(atoms)) if j != anchor]
    offsets = [math.log(float(atoms[j][0]) / x0) for j in idx]
    found = common_divisor(offsets)
    if found is None:
        return None
    unit, ints = found
    if any(n % 2 == 0 for n in ints):
        return None
    return LatticeWitness(x0, math.pi / unit, tuple(idx), ints)


# ---------------------------------------------------------------------------
# fast path


def _as_atoms(measure) -> Optional[tuple[tuple[float, float], ...]]:
    if isinstance(measure, SpectralMeasure):
        return measure.atoms if measure.is_finite_atomic else None
    if isinstance(measure, Law):
        return merge_atoms(measure.atoms()) if measure.power_terms() == () else None
    if isinstance(measure, StepKernel):
        return kernel_to_measure(measure).atoms
    if isinstance(measure, (list, tuple)):
        if measure and isinstance(measure[0], (list, tuple)):
            return merge_atoms(measure)
        return merge_atoms((w, 1.0) for w in measure)
    return None


def _residual(atoms, alpha: float, theta: float) -> float:
    xs = np.array([x for x, _ in atoms])
    c = np.array([w for _, w in atoms]) * xs**alpha
    val = np.sum(c * np.exp(1j * theta * np.log(xs)))
    return float(abs(val) / c.sum())


def fast_path_atoms(measure, alpha: float, rest_mass: float = 0.0) -> Optional[Verdict]:
    """Dominant-atom and lattice verdicts for a finite atomic measure.

    ``rest_mass`` is the alpha-mass of any non-atomic remainder; in the
    equality case such a remainder cannot sit on a lattice.
    """
    atoms = _as_atoms(measure)
    if atoms is None or not atoms:
        return None
    c = [w * x**alpha for x, w in atoms]
    total = sum(c) + rest_mass
    top = max(c)
    ties = [j for j, v in enumerate(c) if abs(v - top) <= EQUALITY_RTOL * total]
    anchor = max(ties, key=lambda j: atoms[j][0])
    rest = total - c[anchor]
    if c[anchor] > rest + EQUALITY_RTOL * total:
        return Verdict(DETERMINING, "DominantAtom", method="lattice",
                       detail=f"anchor x0={atoms[anchor][0]:.12g}: {rest:.12g} < {c[anchor]:.12g}")
    if abs(c[anchor] - rest) > EQUALITY_RTOL * total:
        return None
    if rest_mass > 0:
        return Verdict(DETERMINING, "LatticeAbsent", method="lattice",
                       detail="equality case with a continuous remainder")
    wit = detect_lattice(atoms, anchor)
    if wit is not None:
        res = _residual(atoms, alpha, wit.theta0)
        if res <= ZERO_RTOL:
            return Verdict(NOT_DETERMINING, None, theta0=wit.theta0, residual=res, method="lattice",
                           detail=f"anchor x0={wit.x0:.12g}, odd multiples {list(wit.odd)}")
    return Verdict(DETERMINING, "LatticeAbsent", method="lattice",
                   detail="equality case without an odd lattice")


# ---------------------------------------------------------------------------
# certified scan


@dataclass
class ScanResult:
    zero: Optional[float]
    residual: Optional[float]
    min_modulus: float
    lower_bound: float
    cells: int
    unresolved: int = 0


def _min_linear(f: np.ndarray, d: np.ndarray, h: np.ndarray) -> np.ndarray:
    """min over t in [0, h] of |f + d t|."""
    dd = np.abs(d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, -np.real(np.conj(d) * f) / dd, 0.0)
    t = np.clip(t, 0.0, h)
    return np.abs(f + d * t)


def _polish(tr: LineTransform, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section on |M| over [lo, hi], then a complex secant polish."""
    def mod(t):
        return float(abs(tr.value_centered(np.array([t]))[0]))

    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = mod(c1), mod(c2)
    while b - a > max(tol, 1e-15 * abs(b)) * 10:
        if f1 < f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = mod(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = mod(c2)
    t0, t1 = a, b
    m0 = complex(tr.value_centered(np.array([t0]))[0])
    m1 = complex(tr.value_centered(np.array([t1]))[0])
    best = min(((abs(m0), t0), (abs(m1), t1)))
    for _ in range(50):
        denom = m1 - m0
        if denom == 0:
            break
        t2 = t1 - (m1 * (t1 - t0) / denom).real
        if not (lo - (hi - lo) <= t2 <= hi + (hi - lo)):
            break
        m2 = complex(tr.value_centered(np.array([t2]))[0])
        best = min(best, (abs(m2), t2))
        if abs(t2 - t1) <= tol * max(1.0, abs(t2)):
            break
        t0, m0, t1, m1 = t1, m1, t2, m2
    return best[1], best[0]


def certified_scan(tr: LineTransform, lo: float, hi: float, tol: float = 1e-12,
                   max_levels: int = 60) -> ScanResult:
    """Certify |M| > 0 on [lo, hi] or locate the smallest zero there."""
    m0 = tr.m0
    l1 = tr.lip(1) / LIP_SLACK
    l2 = tr.lip(2) / LIP_SLACK
    slack = tr.err + 64 * np.finfo(float).eps * m0
    span = hi - lo
    h0 = min(span, 0.25 * m0 / max(l1, 1e-300), math.sqrt(0.5 * m0 / max(l2, 1e-300)))
    n = max(1, math.ceil(span / h0))
    grid = np.linspace(lo, hi, n + 1)
    fv = tr.value_centered(grid)
    dv = tr.deriv_centered(grid)
    a, b = grid[:-1], grid[1:]
    fa, fb, da, db = fv[:-1], fv[1:], dv[:-1], dv[1:]
    min_mod = float(np.abs(fv).min())
    lower = math.inf
    cells = n
    pending: list[tuple[float, float]] = []
    for _level in range(max_levels):
        h = b - a
        lb1 = 0.5 * (np.abs(fa) + np.abs(fb)) - 0.5 * l1 * h
        half = 0.5 * h
        lb2 = np.minimum(_min_linear(fa, da, half), _min_linear(fb, -db, half)) - 0.5 * l2 * half**2
        lb = np.maximum(lb1, lb2) - slack
        ok = lb > 0
        if np.any(ok):
            lower = min(lower, float(lb[ok].min()))
        bad = ~ok
        if not np.any(bad):
            break
        tiny = h[bad] < max(1e-11, 1e-14 * hi)
        if np.any(tiny):
            pending.extend(zip(a[bad][tiny], b[bad][tiny]))
        split = np.flatnonzero(bad)[~tiny]
        if split.size == 0:
            break
        mid = 0.5 * (a[split] + b[split])
        fm = tr.value_centered(mid)
        dm = tr.deriv_centered(mid)
        min_mod = min(min_mod, float(np.abs(fm).min()))
        cells += split.size
        a = np.concatenate([a[split], mid])
        b = np.concatenate([mid, b[split]])
        fa, fb = np.concatenate([fa[split], fm]), np.concatenate([fm, fb[split]])
        da, db = np.concatenate([da[split], dm]), np.concatenate([dm, db[split]])
    else:
        pending.extend(zip(a[~ok], b[~ok]))

    if not pending:
        return ScanResult(None, None, min_mod, lower, cells)
    pending.sort()
    groups: list[list[float]] = []
    for s, e in pending:
        if groups and s <= groups[-1][1] + 1e-9:
            groups[-1][1] = max(groups[-1][1], e)
        else:
            groups.append([s, e])
    unresolved = 0
    for s, e in groups:
        w = max(e - s, 1e-9)
        t, modv = _polish(tr, max(lo, s - w), min(hi, e + w), tol)
        min_mod = min(min_mod, modv)
        if modv <= ZERO_RTOL * m0:
            return ScanResult(t, modv / m0, min_mod, 0.0, cells)
        unresolved += 1
    return ScanResult(None, None, min_mod, 0.0, cells, unresolved)


# ---------------------------------------------------------------------------
# periodicity and windows


def _frequencies(tr: LineTransform) -> Optional[tuple[list[float], list[float]]]:
    """Atom log-locations and family spacings when the transform is purely atomic."""
    if tr.continuous_parts():
        return None
    locs: list[float] = []
    spacings: list[float] = []
    for p in tr.parts:
        if isinstance(p, ExpSumPart):
            locs.extend(float(u) for u in p.u)
        elif isinstance(p, GeometricPart):
            fam = p.family
            locs.append(math.log(fam.scale) + fam.start * math.log(fam.ratio))
            spacings.append(-math.log(fam.ratio))
    return locs, spacings


def transform_period(tr: LineTransform) -> Optional[float]:
    freq = _frequencies(tr)
    if freq is None:
        return None
    locs, spacings = freq
    ref = locs[0]
    offs = [u - ref for u in locs[1:] if abs(u - ref) > 0] + spacings
    if not offs:
        return None
    found = common_divisor(offs)
    if found is None:
        return None
    return 2 * math.pi / found[0]


def default_window(tr: LineTransform) -> float:
    freq = _frequencies(tr)
    if freq is None:
        return DEFAULT_CONTINUOUS_WINDOW
    locs, spacings = freq
    u = np.unique(np.round(np.asarray(locs), 15))
    gaps = list(np.diff(u)) + spacings
    gaps = [g for g in gaps if g > 0]
    if not gaps:
        return DEFAULT_CONTINUOUS_WINDOW
    return min(200 * math.pi / min(gaps), WINDOW_CAP)


def _verdict_from_scan(res: ScanResult, theta_max: float, m0: float, certificate: Optional[str],
                       method: str = "scan", detail: str = "") -> Verdict:
    if res.zero is not None:
        return Verdict(NOT_DETERMINING, None, theta0=float(res.zero), residual=float(res.residual),
                       theta_max=theta_max, method=method, detail=detail)
    if res.unresolved:
        return Verdict(WINDOW_CERTIFIED, "WindowOnly", theta_max=theta_max,
                       min_modulus=res.min_modulus / m0, lower_bound=0.0, method=method,
                       detail=f"{res.unresolved} unresolved near-zero cluster(s)")
    if certificate is None:
        return Verdict(WINDOW_CERTIFIED, "WindowOnly", theta_max=theta_max,
                       min_modulus=res.min_modulus / m0, lower_bound=res.lower_bound / m0,
                       method=method, detail=detail)
    return Verdict(DETERMINING, certificate, theta_max=theta_max, min_modulus=res.min_modulus / m0,
                   lower_bound=res.lower_bound / m0, method=method, detail=detail)


def _atomic_margin(tr: LineTransform) -> Optional[float]:
    """c0 - (all other atomic alpha-mass) for the heaviest exact atom, if positive."""
    atomic = tr.atomic_parts()
    if not atomic:
        return None
    c = np.concatenate([p.c for p in atomic])
    u = np.concatenate([p.u for p in atomic])
    # merge equal locations
    uniq, inv = np.unique(u, return_inverse=True)
    merged = np.bincount(inv, weights=c)
    fam_mass = sum(p.m0() for p in tr.parts if isinstance(p, GeometricPart))
    top = merged.max()
    margin = top - (merged.sum() - top) - fam_mass
    return float(margin) if margin > 0 else None


def _decay_crossover(tr: LineTransform, margin: float) -> Optional[float]:
    cont = tr.continuous_parts()
    if not cont or not all(isinstance(p, PowerPart) for p in cont):
        return None

    def bound(t):
        return sum(p.decay_bound(t) for p in cont) + tr.err

    target = LIP_SLACK * margin
    t = 1.0
    while bound(t) >= target:
        t *= 2
        if t > 1e7:
            return None
    return t


def _resolve(obj, alpha):
    if isinstance(obj, FilterModel):
        return obj.spectral(), obj.alpha if alpha is None else alpha
    if alpha is None:
        raise ValueError("alpha is required")
    return obj, alpha


def find_zero(obj, alpha: Optional[float] = None, theta_max: Optional[float] = None,
              tol: float = 1e-12, theta_min: float = 0.0, use_fast_path: bool = True) -> Verdict:
    """Decide the sign question of M on the line Re s = alpha.

    ``obj`` is a SpectralMeasure, catalog law, kernel, FilterModel, a list
    of weights or a list of (location, mass) pairs.
    """
    obj, alpha = _resolve(obj, alpha)
    if theta_max is not None and not theta_max > 0:
        raise ValueError("theta_max must be positive")
    if not 0 <= theta_min < (theta_max if theta_max is not None else math.inf):
        raise ValueError("need 0 <= theta_min < theta_max")
    window_hint = theta_max if theta_max is not None else DEFAULT_CONTINUOUS_WINDOW
    tr = mellin_line(obj, alpha, window_hint)
    m0 = tr.m0
    if not (m0 > 0 and math.isfinite(m0)):
        raise MomentDivergence("alpha-moment must be finite and positive")

    if use_fast_path and theta_min == 0:
        atoms = _as_atoms(obj)
        if atoms is not None:
            v = fast_path_atoms(atoms, alpha)
            if v is not None:
                return v
        if tr.closed_form is not None:
            return Verdict(DETERMINING, "ClosedForm", method="closed-form", detail=tr.closed_form)

    if theta_min == 0:
        period = transform_period(tr)
        if period is not None and period <= PERIOD_CAP:
            res = certified_scan(tr, 0.0, period, tol)
            return _verdict_from_scan(res, float(period), m0, "PeriodicFullScan", "periodic-scan",
                                      f"period {period:.15g}")
        if use_fast_path and tr.has_continuous:
            margin = _atomic_margin(tr)
            cross = _decay_crossover(tr, margin) if margin else None
            if cross is not None:
                res = certified_scan(tr, 0.0, cross, tol)
                return _verdict_from_scan(res, cross, m0, "DecayBound", "decay-scan",
                                          f"continuous part below atomic margin beyond {cross:g}")

    hi = float(theta_max if theta_max is not None else default_window(tr))
    res = certified_scan(tr, theta_min, hi, tol)
    return _verdict_from_scan(res, hi, m0, None)


# ---------------------------------------------------------------------------
# left tail of nu


def _bounded_support(rho) -> bool:
    if isinstance(rho, SpectralMeasure):
        return rho.bounded_support()
    if isinstance(rho, Law):
        return rho.support()[1] < math.inf
    if isinstance(rho, (StepKernel, ExpKernel)):
        return True  # image measures live on (0, max f]
    if isinstance(rho, CallableKernel):
        return True
    if isinstance(rho, (list, tuple)):
        return True
    return False


def _finite_near_zero(nu) -> bool:
    if isinstance(nu, Law):
        return True
    if isinstance(nu, PowerMeasure):
        return nu.alpha < 0
    if isinstance(nu, SpectralMeasure):
        if nu.families:
            return False
        return all(p.a > 0 or p.moment(0.0) < math.inf for p in nu.ac_pieces)
    return False


def _small_moment_finite(nu, p: float) -> bool:
    """int_0^1 y^p nu(dy) < inf."""
    if isinstance(nu, Law):
        return True
    if isinstance(nu, PowerMeasure):
        return p - nu.alpha > 0
    if isinstance(nu, SpectralMeasure):
        for fam in nu.families:
            if isinstance(fam, PowerAtoms) and not fam.converges(p):
                return False
        for piece in nu.ac_pieces:
            if piece.a == 0 and getattr(piece, "p", 0.0) >= p:
                return False
        return True
    return False


def check_left_tail_negligible(nu, rho, alpha: float, delta: float) -> bool:
    """True when a sufficient condition for a negligible left-tail contribution holds.

    The conditions: rho has bounded support, nu is finite near 0, or
    int_0^1 y^(alpha+delta) nu(dy) is finite. False means "not established".
    """
    if not 0 < delta < alpha:
        raise ValueError("delta must lie in (0, alpha)")
    return _bounded_support(rho) or _finite_near_zero(nu) or _small_moment_finite(nu, alpha + delta)

