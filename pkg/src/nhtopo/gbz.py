"""Generalized Brillouin zones of the dissipative SSH chain.

The characteristic function ``f(beta, E) = det(M(beta) - E) = P / beta**p``
of a Bloch family is factored into band factors (quadratic in ``E`` for
this model).  From there:

* :func:`numerical_gbz` recovers the GBZ from a finite open-chain spectrum
  by keeping, for every eigenvalue, the middle pair of ``beta`` roots when
  their moduli coincide;
* :func:`agbz_curves` computes the auxiliary GBZ, the locus where
  ``f(beta, E) = f(beta e^{i theta}, E) = 0`` for some ``E`` and real
  ``theta``, either by sampling ``theta`` or by full elimination;
* :func:`self_conjugate_points` finds branch points ``f = df/dbeta = 0``;
* :func:`assign_subgbz` keeps the aGBZ loops on which a band satisfies the
  middle-pair condition and tags them with that band.
"""

from __future__ import annotations

import csv
import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, FactorizationError, NumericalError
from .model import ModelParams
from .polyalg import (
    BivarPoly,
    BlochMatrixFamily,
    LaurentPoly,
    MultiPoly,
    Poly1,
    poly_det,
    poly_roots,
    resultant_eliminate,
    sylvester_matrix,
    weierstrass_real_conditions,
)

log = logging.getLogger(__name__)

__all__ = [
    "Source",
    "AgbzMode",
    "BandFactor",
    "CharacteristicEq",
    "GbzLoop",
    "SelfConjugatePoint",
    "NumericalGbz",
    "characteristic_eq",
    "closed_form_factors",
    "fit_band_factors",
    "match_closed_form",
    "numerical_gbz",
    "agbz_curves",
    "self_conjugate_points",
    "assign_subgbz",
    "middle_pair",
    "gbz_csv_rows",
    "write_gbz_csv",
    "symbolic_eliminant",
]


class Source(str, enum.Enum):
    EffectiveNH = "EffectiveNH"
    ShapeNoJump = "ShapeNoJump"
    ShapeWithJump = "ShapeWithJump"


class AgbzMode(str, enum.Enum):
    SampledTheta = "SampledTheta"
    SymbolicElimination = "SymbolicElimination"


# ---------------------------------------------------------------------------
# band factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BandFactor:
    """One factor ``F(beta, E)`` of the characteristic polynomial.

    Attributes
    ----------
    label : str
        Family label (``"1"``, ``"2"``; ``"Q"`` for a factor without a
        closed form).
    poly : BivarPoly
        Cleared factor, monic in ``E``.
    multiplicity : int
        Power with which the factor appears in the full determinant.
    b, c : LaurentPoly or None
        For quadratic factors ``E**2 + b(beta) E + c(beta)``.
    """

    label: str
    poly: BivarPoly
    multiplicity: int = 1
    b: LaurentPoly | None = None
    c: LaurentPoly | None = None

    @property
    def degree_E(self) -> int:
        return self.poly.degree("E")

    @property
    def band_ids(self) -> list[str]:
        if self.degree_E == 2:
            return [f"{self.label}+", f"{self.label}-"]
        return [f"{self.label}:{i}" for i in range(self.degree_E)]

    def energies(self, beta) -> np.ndarray:
        """Band energies at ``beta`` in :attr:`band_ids` order.

        For quadratic factors ``E_{+-} = -b/2 +- sqrt(b**2/4 - c)`` with the
        principal square root; otherwise roots sorted by (Re, Im).
        """
        beta = complex(beta)
        if self.degree_E == 2 and self.b is not None:
            hb = self.b(beta) / 2
            s = np.sqrt(hb * hb - self.c(beta))
            return np.array([-hb + s, -hb - s])
        r = poly_roots(self.poly.in_E(beta))
        return r[np.lexsort((r.imag, r.real))]

    def energy(self, band_id: str, beta) -> complex:
        try:
            i = self.band_ids.index(band_id)
        except ValueError:
            raise ConfigError(f"band {band_id!r} is not in factor {self.label}") from None
        return complex(self.energies(beta)[i])

    def beta_roots(self, E) -> np.ndarray:
        """Roots in ``beta`` at fixed ``E``, sorted by modulus."""
        p = self.poly.in_beta(E)
        if p.degree < 1:
            return np.zeros(0, dtype=complex)
        r = poly_roots(p)
        return r[np.argsort(np.abs(r), kind="stable")]


@dataclass(frozen=True, eq=False)
class CharacteristicEq:
    """Characteristic polynomial of a Bloch family with its band factors.

    Attributes
    ----------
    poly : BivarPoly
        ``P(beta, E)`` with ``det(M(beta) - E) = P / beta**p``.
    bands : list of BandFactor
        Distinct factors; ``prod F_mu**m_mu`` reproduces ``poly``.
    source : Source
    family : BlochMatrixFamily
        The family the polynomial was computed from.
    params : ModelParams or None
    """

    poly: BivarPoly
    bands: list
    source: Source
    family: BlochMatrixFamily
    params: ModelParams | None = None

    @property
    def band_ids(self) -> list[str]:
        return [bid for f in self.bands for bid in f.band_ids]

    def factor(self, label_or_band: str) -> BandFactor:
        for f in self.bands:
            if label_or_band == f.label or label_or_band in f.band_ids:
                return f
        raise ConfigError(f"no band factor {label_or_band!r}; have {[f.label for f in self.bands]}")

    def band_energy(self, band_id: str, beta) -> complex:
        return self.factor(band_id).energy(band_id, beta)

    def reconstruction_error(self, samples: int = 20, seed: int = 0) -> float:
        """Max relative mismatch of ``prod F**m`` against ``poly`` at random points."""
        rng = np.random.default_rng(seed)
        beta = rng.uniform(0.5, 1.5, samples) * np.exp(2j * np.pi * rng.random(samples))
        E = rng.normal(size=samples) + 1j * rng.normal(size=samples)
        full = self.poly.evaluate_f(beta, E)
        prod = np.ones(samples, dtype=complex)
        for f in self.bands:
            prod = prod * f.poly.evaluate_f(beta, E) ** f.multiplicity
        scale = np.maximum(np.abs(full), 1e-300)
        return float(np.max(np.abs(prod - full) / np.maximum(scale, np.abs(prod))))


def _quadratic_factor(label, b: LaurentPoly, c: LaurentPoly, multiplicity=1) -> BandFactor:
    """Cleared ``beta**p (E**2 + b E + c)`` as a band factor."""
    p = max(0, -min(b.min_exp, c.min_exp, 0))
    terms = {(p, 2): 1.0}
    for k, v in b.terms.items():
        terms[(k + p, 1)] = terms.get((k + p, 1), 0) + v
    for k, v in c.terms.items():
        terms[(k + p, 0)] = terms.get((k + p, 0), 0) + v
    return BandFactor(label, BivarPoly(terms, p), multiplicity, b, c)


def closed_form_factors(params: ModelParams, source: Source):
    """Printed closed-form band factors, or ``None`` when none is known.

    * EffectiveNH: ``E**2 = (t1 - g/2 + t2 beta)(t1 + g/2 + t2/beta)``.
    * ShapeNoJump (overall loss dropped, no jumps):
      ``E**2 - g**2/4 + t1**2 + t2**2 + t2 (t1 -+ g/2) beta + t2 (t1 +- g/2)/beta``.
    * ShapeWithJump: ``E**2 -+ s E + c0 + t2 (t1 -+ h/2) beta + t2 (t1 +- h/2)/beta``
      with ``(s, h, c0) = (g', g, t1**2 + t2**2 - gl gg)`` without jumps and
      ``(g, g', t1**2 + t2**2 + gl gg)`` with full jumps; loss-only chains
      give the same factors for every ``kappa``.

    Here ``g = gl + gg`` and ``g' = gl - gg``.
    """
    t1, t2, g, gp = params.t1, params.t2, params.gamma, params.gamma_prime
    gl, gg = params.gamma_l, params.gamma_g
    L = LaurentPoly
    if source is Source.EffectiveNH:
        c = L({0: -(t1 * t1 - g * g / 4 + t2 * t2), 1: -t2 * (t1 + g / 2), -1: -t2 * (t1 - g / 2)})
        return [("1", L({}), c, 1)]
    if source is Source.ShapeNoJump:
        c0 = t1 * t1 + t2 * t2 - g * g / 4
        c1 = L({0: c0, 1: t2 * (t1 - g / 2), -1: t2 * (t1 + g / 2)})
        c2 = L({0: c0, 1: t2 * (t1 + g / 2), -1: t2 * (t1 - g / 2)})
        return [("1", L({}), c1, 2), ("2", L({}), c2, 2)]
    k = params.kappa
    if gg == 0:
        s, h, c0 = g, g, t1 * t1 + t2 * t2
    elif k == 0:
        s, h, c0 = gp, g, t1 * t1 + t2 * t2 - gl * gg
    elif k == 1:
        s, h, c0 = g, gp, t1 * t1 + t2 * t2 + gl * gg
    else:
        return None
    c1 = L({0: c0, 1: t2 * (t1 - h / 2), -1: t2 * (t1 + h / 2)})
    c2 = L({0: c0, 1: t2 * (t1 + h / 2), -1: t2 * (t1 - h / 2)})
    return [("1", L({0: -s}), c1, 2), ("2", L({0: s}), c2, 2)]


def _distinct(values: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cluster nearly equal values; return representatives and multiplicities."""
    reps: list[complex] = []
    counts: list[int] = []
    members: list[list[complex]] = []
    for v in values:
        for i, r in enumerate(reps):
            if abs(v - r) <= tol:
                counts[i] += 1
                members[i].append(v)
                break
        else:
            reps.append(v)
            counts.append(1)
            members.append([v])
    reps = [np.mean(m) for m in members]
    return np.array(reps), np.array(counts)


def _root_multiplicity(P: BivarPoly, rng) -> int:
    """Common multiplicity of the ``E`` roots of ``P`` at generic ``beta``."""
    mults = set()
    for _ in range(3):
        beta = rng.uniform(0.6, 1.4) * np.exp(2j * np.pi * rng.random())
        roots = poly_roots(P.in_E(beta))
        scale = 1 + np.max(np.abs(roots))
        _, counts = _distinct(roots, 1e-5 * scale)
        mults.add(int(np.gcd.reduce(counts)))
    return min(mults)


def _squarefree_root(P: BivarPoly, m: int, radius=0.83) -> BivarPoly:
    """``Q`` with ``Q**m = P`` for ``P = beta**p prod (E - r_i)**m``.

    The distinct roots at each ``beta`` on a circle give the monic
    coefficients of ``Q`` (symmetric functions need no branch labels);
    these are interpolated in ``beta`` by FFT.
    """
    nE = P.degree("E") // m
    p = P.pole_order_p
    if p % m:
        raise FactorizationError("pole order is not divisible by the root multiplicity")
    N = P.degree("beta") // m + 1
    bs = radius * np.exp(2j * np.pi * np.arange(N) / N)
    coeffs = np.zeros((N, nE + 1), dtype=complex)
    for i, b in enumerate(bs):
        roots = poly_roots(P.in_E(b))
        scale = 1 + np.max(np.abs(roots))
        reps, counts = _distinct(roots, 1e-5 * scale)
        if np.any(counts % m):
            raise FactorizationError("roots do not share the expected multiplicity")
        qroots = np.repeat(reps, counts // m)
        coeffs[i] = np.polynomial.polynomial.polyfromroots(qroots) * b ** (p // m)
    c = np.fft.fft(coeffs, axis=0) / N
    c = c / (radius ** np.arange(N))[:, None]
    scale = np.max(np.abs(c))
    terms = {(int(i), int(j)): c[i, j] for i, j in zip(*np.nonzero(np.abs(c) > 1e-12 * scale))}
    return BivarPoly(terms, p // m)


def _track_branches(P: BivarPoly, radius: float, n: int) -> np.ndarray:
    bs = radius * np.exp(2j * np.pi * np.arange(n + 1) / n)
    rows = []
    prev = None
    for b in bs:
        r = poly_roots(P.in_E(b))
        if prev is not None:
            cost = np.abs(prev[:, None] - r[None, :])
            _, cols = linear_sum_assignment(cost)
            r = r[cols]
        rows.append(r)
        prev = r
    return np.array(rows)


def _laurent_fit(values: np.ndarray, radius: float, max_deg: int):
    """Laurent coefficients of a closed sampled function; None if not banded."""
    if abs(values[-1] - values[0]) > 1e-8 * (1 + np.max(np.abs(values))):
        return None
    v = values[:-1]
    N = v.size
    c = np.fft.fft(v) / N
    k = np.fft.fftfreq(N, 1 / N).astype(int)
    band = np.abs(k) <= max_deg
    if np.max(np.abs(c[~band]), initial=0) > 1e-9 * (1 + np.max(np.abs(c))):
        return None
    return LaurentPoly({int(kk): cc / radius**kk for kk, cc in zip(k[band], c[band]) if abs(cc) > 1e-13 * (1 + np.max(np.abs(c)))})


def _fit_quadratic_factors(Q: BivarPoly, max_deg: int = 3) -> list[tuple[LaurentPoly, LaurentPoly]] | None:
    """Split a square-free ``Q`` into quadratic-in-E factors by branch pairing."""
    n = Q.degree("E")
    if n % 2 or n < 4:
        return None
    # track on the circle where the roots stay best separated
    radii = np.linspace(0.55, 1.45, 19)
    sep = []
    for radius in radii:
        bs = radius * np.exp(2j * np.pi * (np.arange(128) + 0.5) / 128)
        worst = np.inf
        for b in bs:
            r = poly_roots(Q.in_E(b))
            d = np.abs(r[:, None] - r[None, :])
            np.fill_diagonal(d, np.inf)
            worst = min(worst, float(d.min()))
        sep.append(worst)
    for radius in radii[np.argsort(sep)[::-1][:4]]:
        try:
            br = _track_branches(Q, radius, 2048)
        except NumericalError:
            continue
        pairs = {}
        for i, j in itertools.combinations(range(n), 2):
            s = _laurent_fit(br[:, i] + br[:, j], radius, max_deg)
            p = _laurent_fit(br[:, i] * br[:, j], radius, max_deg)
            if s is not None and p is not None:
                pairs[(i, j)] = (-s, p)
        # find a perfect matching made of valid pairs
        for match in _perfect_matchings(list(range(n))):
            if all(pr in pairs for pr in match):
                return [pairs[pr] for pr in match]
    return None


def _perfect_matchings(items):
    if not items:
        yield []
        return
    a = items[0]
    for k in range(1, len(items)):
        b = items[k]
        rest = items[1:k] + items[k + 1 :]
        for m in _perfect_matchings(rest):
            yield [(a, b)] + m


def _match_closed_form(b: LaurentPoly, c: LaurentPoly, closed, tol=1e-8):
    for label, cb, cc, mult in closed:
        db = (b - cb).terms
        dc = (c - cc).terms
        scale = 1 + max((abs(v) for v in cc.terms.values()), default=0)
        if max((abs(v) for v in list(db.values()) + list(dc.values())), default=0) <= tol * scale:
            return label, cb, cc
    return None


def characteristic_eq(
    family: BlochMatrixFamily,
    source: Source | str,
    params: ModelParams | None = None,
) -> CharacteristicEq:
    """Characteristic polynomial of ``family`` with fitted band factors.

    The determinant is expanded with :func:`~nhtopo.polyalg.poly_det`.
    When ``params`` is given and a closed form is known for the source
    (see :func:`closed_form_factors`), the closed-form factors are adopted
    and must reproduce the determinant.  Otherwise the common root
    multiplicity is divided out and the square-free part is split into
    quadratic factors by pairing continuously tracked ``E`` branches; a
    part that does not split is kept as a single factor labelled ``"Q"``.

    Raises
    ------
    FactorizationError
        If the factors do not reproduce the determinant to ``1e-9``.
    """
    source = Source(source)
    P = poly_det(family)
    closed = closed_form_factors(params, source) if params is not None else None
    if closed is not None:
        # a known factorization is verified directly against the determinant
        bands = [_quadratic_factor(label, b, c, mult) for label, b, c, mult in closed]
        if sum(f.multiplicity * f.degree_E for f in bands) != P.degree("E"):
            raise FactorizationError(f"closed-form factors do not match the determinant degree for {source.value}")
    else:
        bands = fit_band_factors(P)
    char = CharacteristicEq(P, bands, source, family, params)
    err = char.reconstruction_error()
    if err > 1e-9:
        raise FactorizationError(f"band factors reproduce the determinant only to {err:.2e}")
    return char


def fit_band_factors(P: BivarPoly) -> list[BandFactor]:
    """Band factors of a characteristic polynomial without prior knowledge.

    The common multiplicity of the ``E`` roots is divided out; a quadratic
    square-free part is used as is, a higher one is split into quadratic
    factors by pairing continuously tracked ``E`` branches (labels ``"1"``,
    ``"2"``, ... in fit order).  A part that does not split is returned as
    a single factor labelled ``"Q"``.
    """
    rng = np.random.default_rng(12345)
    m = _root_multiplicity(P, rng)
    Q = _squarefree_root(P, m) if m > 1 else P
    lead = {i: v for (i, j), v in Q.terms.items() if j == Q.degree("E")}
    if len(lead) != 1:
        raise FactorizationError("square-free part is not monic in E up to a beta power")
    ((li, lv),) = lead.items()
    if li != Q.pole_order_p:
        raise FactorizationError("leading E coefficient is not the cleared beta power")
    Q = BivarPoly({k: v / lv for k, v in Q.terms.items()}, Q.pole_order_p)
    if Q.degree("E") == 2:
        b, c = _quadratic_from_cleared(Q)
        return [_quadratic_factor("1", b, c, m)]
    fitted = _fit_quadratic_factors(Q)
    if fitted is None:
        return [BandFactor("Q", Q, m)]
    return [_quadratic_factor(str(i + 1), b, c, m) for i, (b, c) in enumerate(fitted)]


def match_closed_form(factor: BandFactor, params: ModelParams, source: Source | str, tol: float = 1e-8) -> str | None:
    """Label of the closed-form factor equal to a fitted ``factor``, if any."""
    closed = closed_form_factors(params, Source(source))
    if closed is None or factor.b is None:
        return None
    hit = _match_closed_form(factor.b, factor.c, closed, tol)
    return None if hit is None else hit[0]


def _quadratic_from_cleared(Q: BivarPoly) -> tuple[LaurentPoly, LaurentPoly]:
    p = Q.pole_order_p
    b = LaurentPoly({i - p: v for (i, j), v in Q.terms.items() if j == 1})
    c = LaurentPoly({i - p: v for (i, j), v in Q.terms.items() if j == 0})
    return b, c


# ---------------------------------------------------------------------------
# loops and self-conjugate points
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SelfConjugatePoint:
    beta0: complex
    E0: complex
    band_id: str


@dataclass(frozen=True, eq=False)
class GbzLoop:
    """Closed sampled curve in the complex ``beta`` plane.

    Attributes
    ----------
    points : ndarray of complex
        Ordered by angle; the curve closes from the last point to the first.
    band_ids : frozenset of str
    self_conjugate_points : list of SelfConjugatePoint
    radius : float or None
        Set when the loop is an origin-centred circle.
    factor_label : str or None
        Band factor whose aGBZ produced the loop.
    """

    points: np.ndarray
    band_ids: frozenset = frozenset()
    self_conjugate_points: list = field(default_factory=list)
    radius: float | None = None
    factor_label: str | None = None

    @classmethod
    def circle(cls, radius: float, n: int = 2048, **kw) -> "GbzLoop":
        return cls(radius * np.exp(2j * np.pi * np.arange(n) / n), radius=float(radius), **kw)

    def with_(self, **changes) -> "GbzLoop":
        d = dict(
            points=self.points,
            band_ids=self.band_ids,
            self_conjugate_points=self.self_conjugate_points,
            radius=self.radius,
            factor_label=self.factor_label,
        )
        d.update(changes)
        return GbzLoop(**d)

    def resampled(self, n: int) -> "GbzLoop":
        """The same loop with ``n`` points (exact for circles)."""
        if self.radius is not None:
            return self.with_(points=self.radius * np.exp(2j * np.pi * np.arange(n) / n))
        t = np.linspace(0, 1, self.points.size, endpoint=False)
        pts = np.concatenate([self.points, self.points[:1]])
        tt = np.concatenate([t, [1.0]])
        s = np.linspace(0, 1, n, endpoint=False)
        return self.with_(points=np.interp(s, tt, pts.real) + 1j * np.interp(s, tt, pts.imag))

    def reversed(self) -> "GbzLoop":
        return self.with_(points=self.points[::-1].copy())

    def winding_around(self, z: complex) -> float:
        """Discrete winding number of the loop around ``z``."""
        d = np.angle(np.roll(self.points, -1) - z) - np.angle(self.points - z)
        d = (d + np.pi) % (2 * np.pi) - np.pi
        return float(np.sum(d) / (2 * np.pi))

    def contains(self, z: complex) -> bool:
        return abs(self.winding_around(z)) >= 0.5

    def distance_to(self, z: complex) -> float:
        if self.radius is not None:
            return abs(abs(z) - self.radius)
        return float(np.min(np.abs(self.points - z)))


def _refine_scp(F: BandFactor, beta, E, iters=30):
    """Newton refinement of ``F = dF/dbeta = 0`` in ``(beta, E)``."""
    P = F.poly
    Pb = P.deriv_beta()
    Pbb = Pb.deriv_beta()
    PE = MultiPoly(P.variables, {(i, j - 1): j * v for (i, j), v in P.terms.items() if j > 0})
    PbE = MultiPoly(P.variables, {(i, j - 1): j * v for (i, j), v in Pb.terms.items() if j > 0})
    for _ in range(iters):
        f1, f2 = P(beta, E), Pb(beta, E)
        J = np.array([[Pb(beta, E), PE(beta, E)], [Pbb(beta, E), PbE(beta, E)]])
        try:
            step = np.linalg.solve(J, -np.array([f1, f2]))
        except np.linalg.LinAlgError:
            break
        beta, E = beta + step[0], E + step[1]
        if abs(step[0]) + abs(step[1]) < 1e-15 * (1 + abs(beta) + abs(E)):
            break
    return complex(beta), complex(E)


def self_conjugate_points(char: CharacteristicEq, tol: float = 1e-8) -> list[SelfConjugatePoint]:
    """Points with ``f(beta0, E0) = 0`` and ``df/dbeta(beta0, E0) = 0``.

    For each band factor the resultant in ``beta`` of ``F`` and ``dF/dbeta``
    gives candidate energies; the matching double roots in ``beta`` are
    refined by Newton iteration and kept if both residuals are below
    ``tol`` (relative to the coefficient scale).  ``beta0 = 0`` artefacts of
    the pole clearing are discarded.
    """
    out: list[SelfConjugatePoint] = []
    for F in char.bands:
        P = F.poly
        Pb = P.deriv_beta()
        if P.degree("beta") < 2:
            continue
        res = resultant_eliminate(P, Pb, "beta").poly
        if res.degree < 1:
            continue
        scale = P.scale()
        seen: list[tuple[complex, complex]] = []
        for E0 in poly_roots(res):
            roots = F.beta_roots(E0)
            if roots.size < 2:
                continue
            # closest pair of roots is the candidate double root
            best = min(itertools.combinations(roots, 2), key=lambda pr: abs(pr[0] - pr[1]))
            beta0 = 0.5 * (best[0] + best[1])
            if abs(beta0) < 1e-9:
                continue
            beta0, E0r = _refine_scp(F, beta0, E0)
            if abs(beta0) < 1e-9:
                continue
            r1 = abs(P(beta0, E0r)) / scale
            r2 = abs(Pb(beta0, E0r)) / scale
            if r1 > tol or r2 > tol:
                continue
            if any(abs(beta0 - b) + abs(E0r - e) < 1e-7 for b, e in seen):
                continue
            seen.append((beta0, E0r))
            energies = F.energies(beta0)
            bid = F.band_ids[int(np.argmin(np.abs(energies - E0r)))] if F.degree_E == 2 else F.label
            out.append(SelfConjugatePoint(beta0, E0r, bid))
    out.sort(key=lambda s: (s.band_id, round(s.E0.real, 9), round(s.E0.imag, 9), round(s.beta0.real, 9), round(s.beta0.imag, 9)))
    return out


# ---------------------------------------------------------------------------
# numerical GBZ from open-chain spectra
# ---------------------------------------------------------------------------


def middle_pair(roots: np.ndarray, tol: float):
    """Middle pair of modulus-sorted roots if their moduli agree within ``tol``.

    Returns the pair or ``None``; ``tol`` is relative to the mean modulus.
    """
    n = roots.size
    if n < 2 or n % 2:
        return None
    r = roots[np.argsort(np.abs(roots), kind="stable")]
    a, b = r[n // 2 - 1], r[n // 2]
    ma, mb = abs(a), abs(b)
    if abs(ma - mb) <= tol * (ma + mb) / 2:
        return a, b
    return None


@dataclass
class NumericalGbz:
    """Retained ``beta`` values with their band tags."""

    points: np.ndarray
    band_ids: list
    energies: np.ndarray
    skipped: int = 0

    def __len__(self):
        return self.points.size


def numerical_gbz(
    char: CharacteristicEq,
    obc_eigs: Iterable[complex],
    dim_M: int | None = None,
    tol: float = 1e-3,
    exclude_radius: float = 1e-6,
) -> NumericalGbz:
    """Numerical GBZ from an open-chain spectrum.

    For every eigenvalue ``E_i`` and every band factor ``F``, the roots of
    ``F(beta, E_i) = 0`` are sorted by modulus and the middle pair is kept
    when ``| |b_M| - |b_{M+1}| | <= tol (|b_M| + |b_{M+1}|)/2``.

    Parameters
    ----------
    char : CharacteristicEq
    obc_eigs : iterable of complex
        Eigenvalues of the matching real-space open-chain matrix.
    dim_M : int, optional
        Expected ``M`` (half the number of ``beta`` roots) per factor;
        energies whose root count differs are skipped and counted.
    tol : float
        Relative middle-pair tolerance.
    exclude_radius : float
        Energies this close to a self-conjugate energy are skipped.
    """
    eigs = np.asarray(list(obc_eigs), dtype=complex)
    scps = self_conjugate_points(char)
    e0s = np.array([s.E0 for s in scps], dtype=complex)
    pts: list[complex] = []
    ids: list[str] = []
    ens: list[complex] = []
    skipped = 0
    for E in eigs:
        if e0s.size and np.min(np.abs(e0s - E)) < exclude_radius:
            continue
        for F in char.bands:
            expected = F.poly.degree("beta")
            roots = F.beta_roots(E)
            if roots.size != expected or (dim_M is not None and roots.size != 2 * dim_M):
                skipped += 1
                continue
            pair = middle_pair(roots, tol)
            if pair is None:
                continue
            label = F.label
            if F.degree_E == 2:
                en = F.energies(pair[0])
                label = F.band_ids[int(np.argmin(np.abs(en - E)))]
            for b in pair:
                pts.append(b)
                ids.append(label)
                ens.append(E)
    if skipped:
        log.warning("numerical_gbz skipped %d energies with degenerate root counts", skipped)
    return NumericalGbz(np.array(pts, dtype=complex), ids, np.array(ens, dtype=complex), skipped)


# ---------------------------------------------------------------------------
# auxiliary GBZ
# ---------------------------------------------------------------------------


def _theta_eliminant(P: BivarPoly, theta: float) -> Poly1:
    rotated = P.rotated(np.exp(1j * theta))
    return resultant_eliminate(P, rotated, "E").poly


def _theta_eliminants(P: BivarPoly, thetas: np.ndarray) -> list[Poly1]:
    """``R_E(P(beta, E), P(beta e^{i theta}, E))`` for many ``theta`` at once.

    Same construction as :func:`~nhtopo.polyalg.resultant_eliminate`
    (Sylvester determinants on roots of unity, FFT interpolation, relative
    cleanup), batched over ``theta``.
    """
    dB, dE = P.degree("beta"), P.degree("E")
    C = np.zeros((dB + 1, dE + 1), dtype=complex)
    for (i, j), v in P.terms.items():
        C[i, j] += v
    D = 2 * dE * dB
    N = D + 1
    bs = np.exp(2j * np.pi * np.arange(N) / N)
    powers = bs[:, None] ** np.arange(dB + 1)[None, :]  # (N, dB+1)
    a = powers @ C  # (N, dE+1)
    u = np.exp(1j * np.asarray(thetas))[:, None] ** np.arange(dB + 1)[None, :]  # (T, dB+1)
    b = np.einsum("ni,ti,ij->tnj", powers, u, C)
    vals = np.linalg.det(sylvester_matrix(a[None, :, :], b))
    coeffs = np.fft.fft(vals, axis=1) / N
    out = []
    for row in coeffs:
        scale = np.max(np.abs(row))
        row = np.where(np.abs(row) > 1e-12 * scale, row, 0)
        out.append(Poly1(row, "beta"))
    return out


def _loops_by_angle(
    cloud: np.ndarray,
    label: str,
    n_points: int,
    circle_rtol: float,
    n_bins: int = 360,
    level_gap: float = 5e-3,
) -> list[GbzLoop]:
    """Closed loops around the origin from a cloud of aGBZ points.

    The cloud is binned by ``arg(beta)``; inside each bin the moduli are
    grouped into levels separated by more than ``level_gap`` (relative).
    The most common level count defines the loops: level ``j`` over all
    bins with that count is loop ``j`` in polar form ``r_j(phi)``.  Where
    two curves cross, a level follows the lower/upper envelope, which is
    how sub-GBZ pieces join as well.  Loops with a relative modulus spread
    below ``circle_rtol`` are returned as exact circles.
    """
    cloud = cloud[np.isfinite(cloud)]
    if cloud.size == 0:
        return []
    phi = np.mod(np.angle(cloud), 2 * np.pi)
    bins = np.minimum((phi / (2 * np.pi) * n_bins).astype(int), n_bins - 1)
    levels_per_bin: list[list[tuple[float, float]]] = [[] for _ in range(n_bins)]
    for ib in range(n_bins):
        sel = bins == ib
        if not np.any(sel):
            continue
        z = cloud[sel]
        order = np.argsort(np.abs(z))
        z = z[order]
        mods = np.abs(z)
        cuts = np.nonzero(np.diff(mods) > level_gap * mods[1:])[0] + 1
        for grp in np.split(np.arange(z.size), cuts):
            levels_per_bin[ib].append((float(np.median(mods[grp])), float(np.median(np.mod(np.angle(z[grp]), 2 * np.pi)))))
    counts = np.array([len(lv) for lv in levels_per_bin])
    if not np.any(counts):
        return []
    nlev = int(np.bincount(counts[counts > 0]).argmax())
    good = np.nonzero(counts == nlev)[0]
    if good.size < 0.5 * n_bins:
        return []
    loops: list[GbzLoop] = []
    for j in range(nlev):
        r = np.array([levels_per_bin[ib][j][0] for ib in good])
        ang = np.array([levels_per_bin[ib][j][1] for ib in good])
        spread = (r.max() - r.min()) / r.mean()
        if spread <= circle_rtol:
            sel = (np.abs(np.abs(cloud) - np.median(r)) <= level_gap * np.median(r))
            radius = float(np.median(np.abs(cloud[sel])))
            if any(l.radius is not None and abs(l.radius - radius) <= 1e-6 * radius for l in loops):
                continue
            loops.append(GbzLoop.circle(radius, n_points, factor_label=label))
        else:
            order = np.argsort(ang)
            loops.append(GbzLoop(r[order] * np.exp(1j * ang[order]), factor_label=label))
    return loops


def agbz_curves(
    char: CharacteristicEq,
    mode: AgbzMode | str = AgbzMode.SampledTheta,
    n_theta: int = 360,
    n_points: int = 2048,
    n_rays: int = 72,
    circle_rtol: float = 1e-6,
) -> list[GbzLoop]:
    """Auxiliary GBZ loops of every band factor.

    Parameters
    ----------
    mode : AgbzMode
        ``SampledTheta``: for each ``theta`` on a uniform grid in
        ``(0, 2 pi)`` the eliminant ``R_E(F(beta, E), F(beta e^{i theta}, E))``
        is formed numerically and its ``beta`` roots collected.
        ``SymbolicElimination``: the eliminant is formed as a polynomial in
        ``(beta, u = e^{i theta})``, turned into real conditions in
        ``(x, y, t)`` by the tangent half-angle substitution, ``t`` is
        eliminated, and the zero locus of the resulting polynomial in
        ``(x, y)`` is located by radial root finding on ``n_rays`` rays.
    n_theta : int
        Size of the ``theta`` grid (SampledTheta).
    n_points : int
        Sampling of returned circular loops.
    circle_rtol : float
        Relative modulus spread below which a cluster is a circle.

    Returns
    -------
    list of GbzLoop
        Untagged loops (``band_ids`` empty), each with ``factor_label`` set.
        An empty list means no closed locus was found.
    """
    mode = AgbzMode(mode)
    loops: list[GbzLoop] = []
    for F in char.bands:
        if F.poly.degree("beta") < 2:
            continue
        if mode is AgbzMode.SampledTheta:
            thetas = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
            cloud = []
            for R in _theta_eliminants(F.poly, thetas):
                if R.degree < 1:
                    continue
                r = poly_roots(R)
                cloud.append(r[(np.abs(r) > 1e-8) & (np.abs(r) < 1e8)])
            cloud = np.concatenate(cloud) if cloud else np.zeros(0, dtype=complex)
            loops.extend(_loops_by_angle(cloud, F.label, n_points, circle_rtol))
        else:
            cloud = _symbolic_cloud(F.poly, n_rays)
            loops.extend(_loops_by_angle(cloud, F.label, n_points, max(circle_rtol, 1e-4), n_bins=n_rays))
    if not loops:
        log.warning("agbz_curves found no closed locus")
    return loops


def symbolic_eliminant(P: BivarPoly) -> MultiPoly:
    """Real polynomial ``R(x, y)`` whose zero set contains the aGBZ of ``P``."""
    V = ("beta", "u", "E")
    f = MultiPoly(V, {(i, 0, j): v for (i, j), v in P.terms.items()})
    g = MultiPoly(V, {(i, i, j): v for (i, j), v in P.terms.items()})
    G = resultant_eliminate(f, g, "E").poly.cleanup(1e-10)  # in (beta, u)
    G = G.shift_down("beta", G.min_degree("beta"))
    re, im = weierstrass_real_conditions(G, "beta", "u")
    re, im = re.cleanup(1e-10), im.cleanup(1e-10)
    # theta = 0 pairs every beta with itself: strip the common t**k factor
    k = min(q.min_degree("t") for q in (re, im) if not q.is_zero())
    re, im = re.shift_down("t", k), im.shift_down("t", k)
    return resultant_eliminate(re, im, "t").poly


def _root_centroids(roots: np.ndarray, rtol: float) -> np.ndarray:
    """Centroids of clusters of nearby roots (single-linkage, relative ``rtol``)."""
    n = roots.size
    label = -np.ones(n, dtype=int)
    cur = 0
    for i in range(n):
        if label[i] >= 0:
            continue
        stack = [i]
        label[i] = cur
        while stack:
            j = stack.pop()
            near = np.nonzero((label < 0) & (np.abs(roots - roots[j]) <= rtol * (1 + abs(roots[j]))))[0]
            label[near] = cur
            stack.extend(near.tolist())
        cur += 1
    return np.array([roots[label == c].mean() for c in range(cur)])


def _symbolic_cloud(P: BivarPoly, n_rays: int) -> np.ndarray:
    R = symbolic_eliminant(P)
    dtot = max(sum(k) for k in R.terms)
    N = dtot + 1
    rs = np.exp(2j * np.pi * np.arange(N) / N)
    pts = []
    for phi in 2 * np.pi * (np.arange(n_rays) + 0.25) / n_rays:
        vals = R(rs * np.cos(phi), rs * np.sin(phi))
        c = np.fft.fft(vals) / N
        p = Poly1(c, "r")
        if p.degree < 1:
            continue
        try:
            roots = poly_roots(p)
        except NumericalError:
            roots = np.polynomial.polynomial.polyroots(p.coeffs)
        # the eliminant carries its curves with high multiplicity; a multiple
        # root splits into a small cluster whose centroid stays accurate
        for r in _root_centroids(roots, 1e-2):
            if r.real > 1e-6 and abs(r.imag) <= 1e-6 * (1 + abs(r)):
                pts.append(r.real * np.exp(1j * phi))
    return np.array(pts, dtype=complex)


def assign_subgbz(
    loops: Sequence[GbzLoop],
    char: CharacteristicEq,
    tol: float = 1e-3,
    n_samples: int = 64,
    threshold: float = 0.9,
    attach_scp: bool = True,
) -> list[GbzLoop]:
    """Tag aGBZ loops with the bands whose GBZ they are; drop the rest.

    A loop belongs to band ``mu`` when, for at least ``threshold`` of
    ``n_samples`` points ``beta0`` on it, ``beta0`` is one of the middle
    modulus pair of the roots of ``F_mu(beta, E_mu(beta0)) = 0``.
    Self-conjugate points of the band within ``1e-3`` of the loop are
    attached.
    """
    scps = self_conjugate_points(char) if attach_scp else []
    out = []
    for loop in loops:
        idx = np.linspace(0, loop.points.size, n_samples, endpoint=False).astype(int)
        samples = loop.points[idx]
        ids = set()
        for F in char.bands:
            for k, bid in enumerate(F.band_ids):
                hits = 0
                for b0 in samples:
                    E = F.energies(b0)[k]
                    roots = F.beta_roots(E)
                    pair = middle_pair(roots, tol)
                    if pair is None:
                        continue
                    if min(abs(pair[0] - b0), abs(pair[1] - b0)) <= 10 * tol * max(abs(b0), 1e-12):
                        hits += 1
                if hits >= threshold * samples.size:
                    ids.add(bid)
        if not ids:
            continue
        on_loop = [s for s in scps if s.band_id in ids and loop.distance_to(s.beta0) <= 1e-3]
        # self-conjugate points of a factor also lie on its loop
        labels = {char.factor(i).label for i in ids}
        on_loop += [
            s for s in scps
            if s not in on_loop and char.factor(s.band_id).label in labels and loop.distance_to(s.beta0) <= 1e-3
        ]
        out.append(loop.with_(band_ids=frozenset(ids), self_conjugate_points=on_loop))
    return out


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def gbz_csv_rows(points, band_ids, source: str):
    """Rows ``(re_beta, im_beta, band_id, source)`` sorted deterministically."""
    rows = [(float(b.real), float(b.imag), str(i), source) for b, i in zip(points, band_ids)]
    rows.sort(key=lambda r: (r[2], r[0], r[1]))
    return rows


def write_gbz_csv(handle, rows) -> None:
    """Write GBZ rows with 17 significant digits."""
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(["re_beta", "im_beta", "band_id", "source"])
    for re, im, bid, src in rows:
        w.writerow([f"{re:.17g}", f"{im:.17g}", bid, src])
