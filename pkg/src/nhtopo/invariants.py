"""Non-Bloch topological invariants and symmetry classification.

Three families of invariants are provided:

* the chiral winding number from the flattened ``Q`` matrix,
  ``omega = (1/2 pi i) oint d ln det q`` (:func:`winding_q_integral`);
* the zero/pole count ``omega = (omega_+ - omega_-)/2`` with
  ``omega_pm = -P_pm + sum_mu Z_pm,mu`` (:func:`winding_zero_pole`), which
  handles several sub-GBZ loops;
* the biorthogonal Zak phase ``nu = i oint <l|d_beta|r> d beta`` evaluated as
  a discrete Wilson loop (:func:`zak_phase`).

Chiral blocks are named so that ``h_plus`` is the block mapping the
``S = +1`` sector into the ``S = -1`` sector (lower-left when the ``+1``
sector is listed first).  For the no-jump shape matrix this makes
``det h_plus`` pole-free, which fixes the labels of ``P_pm``.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import BandCrossingError, ConfigError, GapClosingError, NumericalError
from .gbz import CharacteristicEq, GbzLoop, Source, characteristic_eq
from .model import ModelParams
from .polyalg import BlochMatrixFamily, LaurentPoly, Poly1, poly_det, poly_roots

log = logging.getLogger(__name__)

__all__ = [
    "ChiralDecomposition",
    "WindingMethod",
    "WindingReport",
    "ZakReport",
    "SymmetryKind",
    "SymmetrySign",
    "SymmetryFragment",
    "SymmetryReport",
    "InvariantReport",
    "RationalFunction",
    "chiral_decompose",
    "determinant_laurent",
    "winding_q_integral",
    "winding_zero_pole",
    "wilson_loop_phase",
    "invariant_subspaces",
    "zak_phase",
    "pole_residues",
    "effective_winding_integrand",
    "zak_integrand_jump",
    "check_symmetry",
    "classify_az",
    "AZ_TABLE",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "shape_unitaries",
    "ModelKind",
    "model_family",
    "model_symmetries",
    "compute_invariants",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def _kron(*ms):
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def shape_unitaries() -> dict[str, np.ndarray]:
    """Symmetry operators of the 8x8 Bloch shape matrix.

    ``U_T = I2 x sy x sx``, ``U_C = sz x sy x sx`` and ``S = sz x I2 x I2``.
    """
    return {
        "U_T": _kron(I2, SIGMA_Y, SIGMA_X),
        "U_C": _kron(SIGMA_Z, SIGMA_Y, SIGMA_X),
        "S": _kron(SIGMA_Z, I2, I2),
    }


# ---------------------------------------------------------------------------
# chiral decomposition and windings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChiralDecomposition:
    """Off-diagonal blocks of a chiral family in the basis where ``S`` is diagonal.

    Attributes
    ----------
    h_plus : BlochMatrixFamily
        Block from the ``S = +1`` sector to the ``S = -1`` sector.
    h_minus : BlochMatrixFamily
        Block from the ``S = -1`` sector to the ``S = +1`` sector.
    basis : ndarray
        Unitary whose columns are the ``+1`` then ``-1`` eigenvectors of ``S``.
    family : BlochMatrixFamily
    """

    h_plus: BlochMatrixFamily
    h_minus: BlochMatrixFamily
    basis: np.ndarray
    family: BlochMatrixFamily

    def reassembled(self, beta) -> np.ndarray:
        """``basis [[0, h_minus], [h_plus, 0]] basis^H`` at ``beta``."""
        hp = self.h_plus(beta)
        hm = self.h_minus(beta)
        n1, n2 = hm.shape[-2], hp.shape[-2]
        top = np.concatenate([np.zeros(hp.shape[:-2] + (n1, n1), complex), hm], axis=-1)
        bot = np.concatenate([hp, np.zeros(hp.shape[:-2] + (n2, n2), complex)], axis=-1)
        M = np.concatenate([top, bot], axis=-2)
        return self.basis @ M @ self.basis.conj().T


def chiral_decompose(family: BlochMatrixFamily, chiral_unitary, n_checks: int = 10, tol: float = 1e-8) -> ChiralDecomposition:
    """Split a chiral family into its off-diagonal blocks.

    Parameters
    ----------
    family : BlochMatrixFamily
    chiral_unitary : array_like
        ``S`` with ``S**2 = I`` and ``S M(beta) S^H = -M(beta)``.

    Raises
    ------
    ConfigError
        If ``S`` is not an involutive unitary, or does not anticommute with
        the family at ``n_checks`` random ``beta`` (tolerance ``tol``).
    """
    S = np.asarray(chiral_unitary, dtype=complex)
    n = family.size
    if S.shape != (n, n):
        raise ConfigError(f"chiral operator has shape {S.shape}, family size is {n}")
    if np.max(np.abs(S @ S - np.eye(n))) > 1e-10 or np.max(np.abs(S @ S.conj().T - np.eye(n))) > 1e-10:
        raise ConfigError("chiral operator must be unitary and square to the identity")
    rng = np.random.default_rng(7)
    betas = rng.uniform(0.5, 1.5, n_checks) * np.exp(2j * np.pi * rng.random(n_checks))
    M = family(betas)
    res = np.max(np.abs(S @ M @ S.conj().T + M))
    if res > tol * max(1.0, float(np.max(np.abs(M)))):
        raise ConfigError(f"family is not chiral under the given operator (residual {res:.2e})")
    w, V = np.linalg.eigh((S + S.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    npl = int(np.sum(w > 0))
    if 2 * npl != n:
        raise ConfigError("chiral sectors must have equal dimension")
    cp: dict[int, np.ndarray] = {}
    cm: dict[int, np.ndarray] = {}
    for k, C in family.coefficients.items():
        Ct = V.conj().T @ C @ V
        cp[k] = Ct[npl:, :npl]
        cm[k] = Ct[:npl, npl:]
    name = family.name or "family"
    return ChiralDecomposition(BlochMatrixFamily(cp, f"{name}:h+"), BlochMatrixFamily(cm, f"{name}:h-"), V, family)


def determinant_laurent(block: BlochMatrixFamily) -> LaurentPoly:
    """``det block(beta)`` as a Laurent polynomial."""
    P = poly_det(block)
    terms = {i - P.pole_order_p: v for (i, j), v in P.terms.items() if j == 0}
    lp = LaurentPoly(terms)
    scale = max((abs(v) for v in terms.values()), default=0.0)
    return LaurentPoly({k: v for k, v in lp.terms.items() if abs(v) > 1e-12 * scale})


class WindingMethod(str, enum.Enum):
    QMatrixIntegral = "QMatrixIntegral"
    ZeroPoleCount = "ZeroPoleCount"


@dataclass
class WindingReport:
    """Chiral winding number.

    Attributes
    ----------
    omega : float
        ``(omega_+ - omega_-)/2``; integer or half-integer.
    per_band_zeros : dict
        ``{"+": {family: Z}, "-": {family: Z}}`` zero counts inside each
        sub-GBZ (zero/pole method only).
    pole_orders : tuple
        ``(P_+, P_-)``.
    method : WindingMethod
    min_abs_det : float
        Smallest ``|det q|`` met on the loop (Q-matrix method).
    zero_inventory : list
        Every zero of ``det h_pm`` with its family and inside flag.
    """

    omega: float
    per_band_zeros: dict = field(default_factory=dict)
    pole_orders: tuple = (0, 0)
    method: WindingMethod = WindingMethod.ZeroPoleCount
    min_abs_det: float = float("nan")
    zero_inventory: list = field(default_factory=list)


def _phase_winding(values: np.ndarray) -> float:
    """Winding of a closed sampled complex curve around the origin."""
    ph = np.angle(np.concatenate([values, values[:1]]))
    d = np.diff(ph)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(np.sum(d) / (2 * np.pi))


def _flattened_q(decomp: ChiralDecomposition, betas: np.ndarray) -> tuple[np.ndarray, float]:
    """Off-diagonal block of the flattened projector ``Q`` along ``betas``.

    Bands are split by the sign of ``Re(E e^{-i phi})`` for the reference
    line angle ``phi`` that keeps the spectrum furthest from the line.
    """
    M = decomp.basis.conj().T @ decomp.family(betas) @ decomp.basis
    w, R = np.linalg.eig(M)
    phis = np.linspace(0, np.pi, 37)[:-1]
    margins = [np.min(np.abs((w * np.exp(-1j * p)).real)) for p in phis]
    phi = phis[int(np.argmax(margins))]
    margin = float(np.max(margins))
    sgn = np.sign((w * np.exp(-1j * phi)).real)
    Rinv = np.linalg.inv(R)
    Q = np.einsum("bij,bj,bjk->bik", R, sgn, Rinv)
    npl = decomp.h_minus.size
    return Q[:, npl:, :npl], margin


def winding_q_integral(decomp: ChiralDecomposition, loop: GbzLoop, gap_tol: float = 1e-10) -> WindingReport:
    """Winding of ``det q`` along ``loop``.

    ``q`` is the block of the flattened operator
    ``Q = sum_mu sign(E_mu) |r_mu><l_mu|`` that maps the ``S = +1`` sector
    into the ``S = -1`` sector, so that ``omega = (w(det h_+) - w(det h_-))/2``.

    Raises
    ------
    GapClosingError
        If the spectrum touches the reference line or ``|det q|`` drops
        below ``gap_tol`` on the loop.
    """
    betas = np.asarray(loop.points, dtype=complex)
    if betas.size < 3:
        raise ConfigError("loop needs at least three points")
    q, margin = _flattened_q(decomp, betas)
    if margin < 1e-8:
        raise GapClosingError("spectrum closes the chiral gap on the loop", beta=complex(betas[0]))
    dets = np.linalg.det(q)
    mind = float(np.min(np.abs(dets)))
    if mind < gap_tol:
        i = int(np.argmin(np.abs(dets)))
        raise GapClosingError(f"det q vanishes on the loop (|det q| = {mind:.2e})", beta=complex(betas[i]))
    omega = _phase_winding(dets)
    return WindingReport(omega=omega, method=WindingMethod.QMatrixIntegral, min_abs_det=mind)


def _factor_of_zero(char: CharacteristicEq, beta: complex, tol: float = 1e-7) -> str | None:
    best, label = np.inf, None
    for F in char.bands:
        val = abs(F.poly(beta, 0.0)) / (F.poly.scale() * max(1.0, abs(beta)) ** F.poly.degree("beta"))
        if val < best:
            best, label = val, F.label
    return label if best <= tol else None


def _merge_multiple_roots(roots: np.ndarray, rtol: float = 1e-3) -> np.ndarray:
    """Replace every root by the centroid of its cluster, keeping the count.

    Multiple roots split by ``~eps**(1/m)`` in floating point; the centroid
    restores them to high accuracy.  The default tolerance admits fourfold
    roots (``eps**(1/4) ~ 1e-4``).
    """
    out = roots.astype(complex).copy()
    done = np.zeros(roots.size, dtype=bool)
    for i in range(roots.size):
        if done[i]:
            continue
        members = [i]
        k = 0
        while k < len(members):
            j = members[k]
            near = np.nonzero(~done & (np.abs(roots - roots[j]) <= rtol * (1 + abs(roots[j]))))[0]
            for m in near:
                if m not in members:
                    members.append(int(m))
            done[near] = True
            k += 1
        out[members] = roots[members].mean()
    return out


def winding_zero_pole(
    decomp: ChiralDecomposition,
    subgbz: Sequence[GbzLoop],
    char: CharacteristicEq,
    boundary_tol: float = 1e-6,
) -> WindingReport:
    """Winding number from zeros and poles of ``det h_pm``.

    ``P_pm`` is the pole order of ``det h_pm`` at ``beta = 0``.  Every zero
    ``beta_z`` (counted with multiplicity) is attributed to the band family
    whose factor vanishes at ``(beta_z, E = 0)`` and counts towards
    ``Z_pm,mu`` when it lies inside that family's sub-GBZ loop (discrete
    winding number of the sampled loop; ``|winding| >= 0.5`` is inside).

    Raises
    ------
    GapClosingError
        If a zero lies within ``boundary_tol`` of its loop.
    NumericalError
        If a zero belongs to no band family, or a family has no loop.
    """
    loops_by_family: dict[str, list[GbzLoop]] = {}
    for lp in subgbz:
        for bid in lp.band_ids:
            lab = char.factor(bid).label
            loops_by_family.setdefault(lab, [])
            if all(lp is not other for other in loops_by_family[lab]):
                loops_by_family[lab].append(lp)
    out_counts: dict[str, dict[str, int]] = {}
    poles: list[int] = []
    inventory: list[dict] = []
    omegas = []
    for sign, block in (("+", decomp.h_plus), ("-", decomp.h_minus)):
        det = determinant_laurent(block)
        if det.is_zero():
            raise GapClosingError(f"det h{sign} vanishes identically")
        P = max(0, -det.min_exp)
        poly, _ = det.cleared()
        # strip zeros at the origin: they are part of the valuation, not zeros
        c = np.trim_zeros(poly.coeffs, "f") if poly.degree > 0 else poly.coeffs
        zeros = poly_roots(Poly1(c, "beta")) if len(c) > 1 else np.zeros(0, complex)
        zeros = _merge_multiple_roots(zeros)
        counts: dict[str, int] = {}
        for z in zeros:
            lab = _factor_of_zero(char, z)
            if lab is None:
                raise NumericalError(f"zero {z:.6g} of det h{sign} belongs to no band family")
            loops = loops_by_family.get(lab)
            if not loops:
                raise NumericalError(f"band family {lab} has no sub-GBZ loop")
            inside = False
            for lp in loops:
                if lp.distance_to(z) < boundary_tol:
                    raise GapClosingError(f"zero of det h{sign} on the sub-GBZ of family {lab}", beta=complex(z))
                inside = inside or lp.contains(z)
            counts[lab] = counts.get(lab, 0) + int(inside)
            inventory.append({"block": sign, "beta": [float(z.real), float(z.imag)], "family": lab, "inside": bool(inside)})
        poles.append(P)
        out_counts[sign] = counts
        omegas.append(-P + sum(counts.values()))
    omega = 0.5 * (omegas[0] - omegas[1])
    inventory.sort(key=lambda d: (d["block"], d["family"], d["beta"][0], d["beta"][1]))
    return WindingReport(
        omega=omega,
        per_band_zeros=out_counts,
        pole_orders=(poles[0], poles[1]),
        method=WindingMethod.ZeroPoleCount,
        zero_inventory=inventory,
    )


# ---------------------------------------------------------------------------
# Zak phase
# ---------------------------------------------------------------------------


@dataclass
class ZakReport:
    """Biorthogonal Zak phase of one band.

    Attributes
    ----------
    nu : float
        Phase in ``[0, 2 pi)``.
    band_id : str
    loop : ndarray
        Loop points used in the final (converged) evaluation.
    quantization_residual : float
        ``min(|nu|, |nu - pi|, |nu - 2 pi|)``.
    refinements : int
        Number of loop doublings performed.
    """

    nu: float
    band_id: str
    loop: np.ndarray
    quantization_residual: float
    refinements: int = 0


def wilson_loop_phase(rights: np.ndarray, lefts: np.ndarray) -> float:
    """Discrete biorthogonal Wilson loop ``-sum_j arg <l_j|r_{j+1}>`` mod ``2 pi``.

    Parameters
    ----------
    rights, lefts : ndarray, shape (N, n)
        Right and left eigenvectors at the ``N`` loop points (the loop
        closes from point ``N - 1`` back to point 0).  Left vectors are
        rescaled so that ``<l_j|r_j> = 1``; the result is therefore invariant
        under any pointwise rescaling of either set.
    """
    rights = np.asarray(rights, dtype=complex)
    lefts = np.asarray(lefts, dtype=complex)
    norm = np.einsum("ji,ji->j", lefts.conj(), rights)
    if np.any(np.abs(norm) < 1e-14):
        raise NumericalError("left and right eigenvectors are orthogonal at some loop point")
    lefts = lefts / norm.conj()[:, None]
    ov = np.einsum("ji,ji->j", lefts.conj(), np.roll(rights, -1, axis=0))
    nu = -float(np.sum(np.angle(ov)))
    return nu % (2 * np.pi)


def invariant_subspaces(family: BlochMatrixFamily, seed: int = 2024, tol: float = 1e-6) -> list[np.ndarray]:
    """Bases of beta-independent invariant subspaces of a Bloch family.

    The commutant ``{X : X C_k = C_k X for all Laurent coefficients C_k}`` is
    computed as a null space; the eigenspaces of a random real element of
    it are invariant under ``M(beta)`` for every ``beta``.  Returns a single
    full basis when the family is irreducible or the split is ill
    conditioned.
    """
    n = family.size
    eye = np.eye(n)
    rows = [np.kron(eye, C) - np.kron(C.T, eye) for C in family.coefficients.values()]
    K = np.vstack(rows)
    N = scipy.linalg.null_space(K, rcond=1e-10)
    if N.shape[1] <= 1:
        return [np.eye(n, dtype=complex)]
    rng = np.random.default_rng(seed)
    X = (N @ rng.normal(size=N.shape[1])).reshape(n, n, order="F")
    w, V = np.linalg.eig(X)
    if np.linalg.cond(V) > 1e8:
        return [np.eye(n, dtype=complex)]
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    scale = max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = []
    for i in range(n):
        for g in groups:
            if abs(w[i] - w[g[0]]) <= tol * scale:
                g.append(i)
                break
        else:
            groups.append([i])
    return [V[:, g] for g in groups]


def _restricted(family: BlochMatrixFamily, basis: np.ndarray) -> BlochMatrixFamily:
    pinv = np.linalg.pinv(basis)
    return BlochMatrixFamily({k: pinv @ C @ basis for k, C in family.coefficients.items()}, family.name)


def _track_band(Y: BlochMatrixFamily, betas: np.ndarray, E0: complex):
    """Eigenvectors of the band continuously connected to ``E0``."""
    M = Y(betas)
    w, R = np.linalg.eig(M)
    Linv = np.linalg.inv(R)  # rows are biorthonormal left vectors (conj)
    N, n = w.shape
    idx = np.empty(N, dtype=int)
    E = E0
    prev_step = 0.0
    energies = np.empty(N, dtype=complex)
    for j in range(N):
        pred = E + prev_step
        d = np.abs(w[j] - pred)
        order = np.argsort(d)
        k = order[0]
        if n > 1:
            second = d[order[1]]
            gap = np.min(np.abs(np.delete(w[j], k) - w[j, k]))
            scale = max(1.0, abs(w[j, k]))
            if gap < 1e-8 * scale:
                raise BandCrossingError("band touches another band on the loop", beta=complex(betas[j]))
            if d[k] > 0.5 * second:
                return None  # ambiguous step: refine the loop
        if j > 0:
            prev_step = w[j, k] - E
        E = w[j, k]
        idx[j] = k
        energies[j] = E
    rights = R[np.arange(N), :, idx]
    lefts = Linv[np.arange(N), idx, :].conj()
    return rights, lefts, energies


def _band_target(char: CharacteristicEq, band_id: str, beta0: complex) -> complex:
    return char.band_energy(band_id, beta0)


def zak_phase(
    family: BlochMatrixFamily,
    band_id: str,
    loop: GbzLoop,
    char: CharacteristicEq | None = None,
    *,
    n_points: int = 2048,
    refine_tol: float = 1e-4,
    max_points: int = 32768,
) -> ZakReport:
    """Biorthogonal Zak phase of a band along a loop.

    The band is identified by its energy ``E_mu(beta_0)`` at the first loop
    point (principal square-root branch for quadratic band factors).  The
    family is first split into beta-independent invariant subspaces (see
    :func:`invariant_subspaces`), which separates degenerate copies of a
    band; the band is then tracked continuously inside the subspace that
    contains it and the discrete Wilson loop is evaluated.  The loop is
    doubled from ``n_points`` until the phase changes by less than
    ``refine_tol``.

    Raises
    ------
    BandCrossingError
        If the band meets another band of its subspace on the loop.
    NumericalError
        If the band does not return to itself around the loop.
    """
    if char is None:
        char = characteristic_eq(family, Source.ShapeWithJump)
    base = loop.resampled(n_points) if loop.radius is not None or loop.points.size < n_points else loop
    beta0 = complex(base.points[0])
    E0 = _band_target(char, band_id, beta0)
    blocks = invariant_subspaces(family)
    chosen = None
    for V in blocks:
        Y = _restricted(family, V)
        w = np.linalg.eigvals(Y(beta0))
        if np.min(np.abs(w - E0)) <= 1e-6 * max(1.0, abs(E0)):
            chosen = Y
            break
    if chosen is None:
        raise NumericalError(f"band {band_id} energy {E0:.6g} not found in the spectrum at beta={beta0:.6g}")

    prev = None
    loop_cur = base
    nu = None
    refinements = 0
    npts = base.points.size
    while True:
        tracked = _track_band(chosen, loop_cur.points, E0)
        if tracked is None:
            if npts * 2 > max_points:
                raise BandCrossingError("cannot track the band unambiguously on the loop", beta=beta0)
            npts *= 2
            loop_cur = loop.resampled(npts)
            refinements += 1
            continue
        rights, lefts, energies = tracked
        # closure: continuing one more step must land back on E0
        dE = abs(energies[-1] - E0)
        step = max(np.max(np.abs(np.diff(energies))), 1e-12)
        if dE > 4 * step:
            raise NumericalError(f"band {band_id} is not single valued on the loop")
        nu = wilson_loop_phase(rights, lefts)
        if prev is not None:
            diff = abs((nu - prev + np.pi) % (2 * np.pi) - np.pi)
            if diff < refine_tol:
                break
        if npts * 2 > max_points:
            break
        prev = nu
        npts *= 2
        loop_cur = loop.resampled(npts)
        refinements += 1
    resid = min(abs(nu), abs(nu - np.pi), abs(nu - 2 * np.pi))
    return ZakReport(nu=nu, band_id=band_id, loop=loop_cur.points, quantization_residual=resid, refinements=refinements)


# ---------------------------------------------------------------------------
# residues and closed-form integrands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """``num(beta) / den(beta)`` with polynomial numerator and denominator."""

    num: Poly1
    den: Poly1

    def __call__(self, beta):
        return self.num(beta) / self.den(beta)

    def poles(self) -> np.ndarray:
        if self.den.degree < 1:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.den)


def pole_residues(integrand: Callable, poles: Iterable[complex], radius: float | None = None, n_quad: int = 256, max_order: int = 8):
    """Residues and orders of isolated poles by contour quadrature.

    Parameters
    ----------
    integrand : callable
        Vectorized function of ``beta``.
    poles : iterable of complex
        Pole locations (numerically coincident entries are merged).
    radius : float, optional
        Quadrature circle radius; default a quarter of the smallest pole
        separation, capped at ``1e-2``.

    Returns
    -------
    list of (pole, residue, order)

    Raises
    ------
    ConfigError
        If two poles are closer than twice the quadrature radius.
    """
    ps: list[complex] = []
    for p in poles:
        p = complex(p)
        if all(abs(p - q) > 1e-9 * max(1.0, abs(p)) for q in ps):
            ps.append(p)
    sep = min((abs(a - b) for i, a in enumerate(ps) for b in ps[i + 1 :]), default=np.inf)
    rho = min(1e-2, sep / 4) if radius is None else float(radius)
    if sep < 2 * rho:
        raise ConfigError("poles overlap at the chosen quadrature radius")
    theta = 2 * np.pi * np.arange(n_quad) / n_quad
    unit = np.exp(1j * theta)
    out = []
    for p in ps:
        z = p + rho * unit
        vals = np.asarray(integrand(z), dtype=complex)
        # Laurent coefficients a_{-k} = (1/2 pi i) oint (z-p)^{k-1} f dz
        coeffs = [np.mean(vals * (rho * unit) ** k) for k in range(1, max_order + 1)]
        scale = np.max(np.abs(vals)) * rho
        order = 0
        for k, a in enumerate(coeffs, start=1):
            if abs(a) > 1e-9 * scale * rho ** (k - 1):
                order = k
        res = coeffs[0]
        if abs(res) < 1e-12 * max(scale, 1.0):
            res = 0.0
        out.append((p, complex(res), order))
    return out


def effective_winding_integrand(params: ModelParams) -> RationalFunction:
    """Integrand of the effective-model winding, ``omega = sum of residues inside``.

    ``(1/2)(h_+'/h_+ - h_-'/h_-)`` with ``h_+ = t1 - g/2 + t2 beta`` and
    ``h_- = t1 + g/2 + t2/beta``, i.e.
    ``t2 / (2 beta (beta (g/2 + t1) + t2)) - t2 / (2 (g/2 - (t1 + beta t2)))``.
    """
    t1, t2, g = params.t1, params.t2, params.gamma
    a = Poly1([t2, g / 2 + t1])  # beta (g/2 + t1) + t2
    b = Poly1([g / 2 - t1, -t2])  # g/2 - t1 - t2 beta
    two_beta = Poly1([0, 2])
    # t2 / (2 beta a) - t2 / (2 b) = t2 (b - beta a) / (2 beta a b)
    num = (b - Poly1([0, 1]) * a) * t2
    den = two_beta * a * b
    return RationalFunction(num, den)


def zak_integrand_jump(params: ModelParams) -> RationalFunction:
    """Closed-form Zak integrand of band ``E_{1,-}`` with jumps (loss only).

    ``t2 (2 beta**2 (t1 - g/2) + 4 beta t2 + 2 t1 + g) /
    (2 beta (beta (g - 2 t1) - 2 t2) (g + 2 (t1 + beta t2)))``; the phase is
    ``nu = i oint f d beta = -2 pi sum(residues inside)``.
    """
    t1, t2, g = params.t1, params.t2, params.gamma
    num = Poly1([t2 * (2 * t1 + g), 4 * t2 * t2, 2 * t2 * (t1 - g / 2)])
    den = Poly1([0, 2]) * Poly1([-2 * t2, g - 2 * t1]) * Poly1([g + 2 * t1, 2 * t2])
    return RationalFunction(num, den)


# ---------------------------------------------------------------------------
# symmetry
# ---------------------------------------------------------------------------


class SymmetryKind(str, enum.Enum):
    TRS = "TRS"
    PHS = "PHS"
    Chiral = "Chiral"


class SymmetrySign(str, enum.Enum):
    none = "none"
    plus = "plus"
    minus = "minus"


@dataclass
class SymmetryFragment:
    """Outcome of one symmetry test.

    ``holds``/``residual`` refer to the standard relation
    (TRS ``U M*(k) U^H = M(-k)``, PHS ``U M*(k) U^H = -M(-k)``, chiral
    ``U M(k) U^H = -M(k)``); ``alt_holds``/``alt_residual`` to the
    alternative relation without complex conjugation (TRS/PHS) or without
    the minus sign (chiral).  ``sign`` is the sign of ``U U* = +-I`` for
    TRS/PHS when the standard relation holds.
    """

    kind: SymmetryKind
    holds: bool
    residual: float
    alt_holds: bool
    alt_residual: float
    sign: SymmetrySign = SymmetrySign.none


@dataclass
class SymmetryReport:
    trs: SymmetrySign
    phs: SymmetrySign
    chiral: bool
    az_class: str
    fragments: list = field(default_factory=list)


def check_symmetry(family: BlochMatrixFamily, U, kind: SymmetryKind | str, n_k: int = 64, tol: float = 1e-8) -> SymmetryFragment:
    """Test a TRS, PHS or chiral relation on ``beta = e^{ik}`` for ``n_k`` k-points."""
    kind = SymmetryKind(kind)
    U = np.asarray(U, dtype=complex)
    n = family.size
    if U.shape != (n, n):
        raise ConfigError(f"operator shape {U.shape} does not match family size {n}")
    if np.max(np.abs(U @ U.conj().T - np.eye(n))) > 1e-10:
        raise ConfigError("symmetry operator must be unitary")
    k = 2 * np.pi * np.arange(n_k) / n_k + 0.1234
    Mk = family(np.exp(1j * k))
    Mmk = family(np.exp(-1j * k))
    Ud = U.conj().T
    scale = max(1.0, float(np.max(np.abs(Mk))))
    if kind is SymmetryKind.TRS:
        std = U @ Mk.conj() @ Ud - Mmk
        alt = U @ Mmk @ Ud - Mk
    elif kind is SymmetryKind.PHS:
        std = U @ Mk.conj() @ Ud + Mmk
        alt = U @ Mmk @ Ud + Mk
    else:
        std = U @ Mk @ Ud + Mk
        alt = U @ Mk @ Ud - Mk
    r_std = float(np.max(np.abs(std))) / scale
    r_alt = float(np.max(np.abs(alt))) / scale
    holds = r_std <= tol
    sign = SymmetrySign.none
    if holds and kind is not SymmetryKind.Chiral:
        uu = U @ U.conj()
        if np.max(np.abs(uu - np.eye(n))) < 1e-10:
            sign = SymmetrySign.plus
        elif np.max(np.abs(uu + np.eye(n))) < 1e-10:
            sign = SymmetrySign.minus
        else:
            raise NumericalError("U U* is not +-I for a symmetry that holds")
    return SymmetryFragment(kind, holds, r_std, r_alt <= tol, r_alt, sign)


_T = {"0": SymmetrySign.none, "+": SymmetrySign.plus, "-": SymmetrySign.minus}

AZ_TABLE: dict[tuple, str] = {
    (_T[t], _T[c], s == "1"): name
    for name, t, c, s in [
        ("A", "0", "0", "0"),
        ("AIII", "0", "0", "1"),
        ("AI", "+", "0", "0"),
        ("BDI", "+", "+", "1"),
        ("D", "0", "+", "0"),
        ("DIII", "-", "+", "1"),
        ("AII", "-", "0", "0"),
        ("CII", "-", "-", "1"),
        ("C", "0", "-", "0"),
        ("CI", "+", "-", "1"),
    ]
}


def classify_az(fragments: Sequence[SymmetryFragment]) -> SymmetryReport:
    """Altland-Zirnbauer class from TRS, PHS and chiral test results.

    Uses the standard relations.  A combination outside the ten-fold table
    (e.g. chiral symmetry with exactly one of TRS/PHS) is labelled
    ``"unclassified"``.
    """
    by_kind = {f.kind: f for f in fragments}
    missing = {SymmetryKind.TRS, SymmetryKind.PHS, SymmetryKind.Chiral} - set(by_kind)
    if missing:
        raise ConfigError(f"missing symmetry checks: {sorted(m.value for m in missing)}")
    t = by_kind[SymmetryKind.TRS].sign if by_kind[SymmetryKind.TRS].holds else SymmetrySign.none
    c = by_kind[SymmetryKind.PHS].sign if by_kind[SymmetryKind.PHS].holds else SymmetrySign.none
    s = by_kind[SymmetryKind.Chiral].holds
    if t is not SymmetrySign.none and c is not SymmetrySign.none:
        s = True  # TRS and PHS together imply chiral symmetry
    name = AZ_TABLE.get((t, c, s), "unclassified")
    return SymmetryReport(t, c, s, name, list(fragments))


# ---------------------------------------------------------------------------
# aggregated report
# ---------------------------------------------------------------------------


@dataclass
class InvariantReport:
    """Winding numbers, Zak phases, pole/zero data and AZ class of one point."""

    omega: float | None
    nu_by_band: dict
    az_class: str | None
    pole_orders: tuple | None
    zero_inventory: list
    params: dict | None = None

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "nu_by_band": dict(sorted(self.nu_by_band.items())),
            "az_class": self.az_class,
            "pole_orders": list(self.pole_orders) if self.pole_orders is not None else None,
            "zero_inventory": self.zero_inventory,
            **({"params": self.params} if self.params is not None else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# per-point driver
# ---------------------------------------------------------------------------


class ModelKind(str, enum.Enum):
    """Which Bloch family an analysis runs on."""

    effective = "effective"
    shape_nojump = "shape-nojump"
    shape_jump = "shape-jump"


def model_family(params: ModelParams, model: ModelKind | str) -> tuple[BlochMatrixFamily, Source, ModelParams]:
    """Bloch family, characteristic-equation source and effective parameters.

    ``shape-nojump`` forces ``kappa = 0`` and drops the overall loss; the
    effective model also drops it.
    """
    from .model import bloch_effective
    from .thirdq import bloch_shape_matrix

    model = ModelKind(model)
    if model is ModelKind.effective:
        return bloch_effective(params), Source.EffectiveNH, params
    if model is ModelKind.shape_nojump:
        p = params.with_(kappa=0.0)
        return bloch_shape_matrix(p, drop_overall_loss=True), Source.ShapeNoJump, p
    return bloch_shape_matrix(params), Source.ShapeWithJump, params


def model_symmetries(model: ModelKind | str) -> dict[str, np.ndarray]:
    """Symmetry operators used for a model: ``U_T``, ``U_C`` and ``S``."""
    if ModelKind(model) is ModelKind.effective:
        # real couplings: H(k)* = H(-k) (T = K) and sublattice symmetry sigma_z
        return {"U_T": I2, "U_C": SIGMA_Z, "S": SIGMA_Z}
    return shape_unitaries()


def _loop_for_band(loops: Sequence[GbzLoop], band_id: str) -> GbzLoop:
    for lp in loops:
        if band_id in lp.band_ids:
            return lp
    raise NumericalError(f"no sub-GBZ loop carries band {band_id}")


def compute_invariants(
    params: ModelParams,
    model: ModelKind | str,
    bands: Sequence[str] = ("1-",),
    *,
    winding: bool | None = None,
    symmetry: bool = True,
    tol_gbz: float = 1e-3,
    refine_tol: float = 1e-4,
) -> InvariantReport:
    """All invariants of one parameter point.

    Parameters
    ----------
    params : ModelParams
    model : ModelKind or str
        ``effective``, ``shape-nojump`` or ``shape-jump``.
    bands : sequence of str
        Band ids whose Zak phases are computed (may be empty).
    winding : bool, optional
        Compute the zero/pole winding number (default: for the chiral
        models ``effective`` and ``shape-nojump``).
    symmetry : bool
        Run the AZ classification.
    tol_gbz : float
        Tolerance attaching self-conjugate points to loops.
    refine_tol : float
        Zak-phase convergence tolerance.

    Raises
    ------
    GapClosingError, BandCrossingError
        At transition points.
    """
    from .gbz import agbz_curves, assign_subgbz

    model = ModelKind(model)
    family, source, p = model_family(params, model)
    char = characteristic_eq(family, source, p)
    loops = assign_subgbz(agbz_curves(char), char, tol=tol_gbz)
    U = model_symmetries(model)
    if winding is None:
        winding = model is not ModelKind.shape_jump
    omega = pole_orders = None
    inventory: list = []
    if winding:
        decomp = chiral_decompose(family, U["S"])
        rep = winding_zero_pole(decomp, loops, char)
        omega, pole_orders, inventory = rep.omega, rep.pole_orders, rep.zero_inventory
    nu = {}
    for b in bands:
        z = zak_phase(family, b, _loop_for_band(loops, b), char, refine_tol=refine_tol)
        # report in (-pi/2, 3pi/2] so both quantized values are unambiguous
        nu[b] = float((z.nu + np.pi / 2) % (2 * np.pi) - np.pi / 2)
    az = None
    if symmetry:
        frags = [
            check_symmetry(family, U["U_T"], SymmetryKind.TRS),
            check_symmetry(family, U["U_C"], SymmetryKind.PHS),
            check_symmetry(family, U["S"], SymmetryKind.Chiral),
        ]
        az = classify_az(frags).az_class
    pdict = {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in dataclasses.asdict(params).items()}
    return InvariantReport(omega, nu, az, pole_orders, inventory, pdict)
