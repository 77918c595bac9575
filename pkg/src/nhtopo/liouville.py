"""Exact diagonalization of the Lindbladian on a truncated fermionic Fock space.

The density operator is expanded on operator pairs ``|i><j|`` whose bra and
ket both lie in a :class:`FockBasis` (occupation bitmasks with at most
``max_excitation`` particles).  Superoperators act on column-stacked vectors,
``vec(A X B) = (B^T kron A) vec(X)``, so the pair ``|i><j|`` sits at index
``i + d j``.  The generator is split as

    L(kappa) = L0 + L_eff + kappa L_jump,
    L0 X     = -i [H, X],
    L_eff X  = -sum_m {L_m^+ L_m, X},
    L_jump X = 2 sum_m L_m X L_m^+,

which is the dissipator ``2 kappa L X L^+ - X L^+ L - L^+ L X`` term by term.

Fermionic operators use Jordan-Wigner strings in the fixed site order
``(1A, 1B, 2A, 2B, ...)``: ``c_j`` carries the sign ``(-1)**(number of
occupied sites before j)``.  Operators are built on a basis allowing one
extra excitation, so products such as ``L^+ L`` of single-particle operators
are exact before they are restricted to the truncated space.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError, ConvergenceError, NumericalError, TruncationOverflowError
from .model import ModelParams, build_free_hamiltonian
from .thirdq import MajoranaData, majorana_coefficients, majorana_transform, shape_matrix_elements

__all__ = [
    "MAX_OPERATOR_PAIRS",
    "RATE_SCALE",
    "FockBasis",
    "SuperopMatrix",
    "build_superoperator",
    "superoperator_from_operators",
    "liouvillian_eigenvalues",
    "multiset_distance",
    "SpectrumComparison",
    "spectrum_compare",
    "BlockStructureReport",
    "block_structure_check",
    "Calibration",
    "calibrate_rapidities",
    "CompositionReport",
    "rapidity_composition_check",
    "chain_rapidities",
    "write_spectrum_csv",
]

MAX_OPERATOR_PAIRS = 10_000

#: The master equation ``2 L X L^+ - {L^+ L, X}`` is the standard Lindblad form
#: for the jump operators ``sqrt(2) L``, whereas the shape matrix (and the
#: no-jump Hamiltonian ``H - (i/2) sum L^+ L``) follow the standard form for
#: ``L`` itself.  Rapidities of the ED Liouvillian are therefore those of the
#: shape matrix at rates multiplied by this factor.
RATE_SCALE = 2.0


# ---------------------------------------------------------------------------
# Fock basis and fermionic operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation bitmasks with at most ``max_excitation`` particles.

    Bit ``j`` of a state is the occupation of site ``j``.  States are ordered
    by ``(popcount, numeric value)``.

    Examples
    --------
    >>> FockBasis(sites=2, max_excitation=2).states
    (0, 1, 2, 3)
    """

    sites: int
    max_excitation: int
    states: tuple = field(init=False)

    def __post_init__(self):
        if self.sites < 1:
            raise ConfigError("need at least one site")
        if self.max_excitation < 0:
            raise ConfigError("max_excitation must be nonnegative")
        cap = min(self.max_excitation, self.sites)
        object.__setattr__(self, "states", tuple(_enumerate_states(self.sites, cap)))

    @property
    def dim(self) -> int:
        return len(self.states)

    def popcounts(self) -> np.ndarray:
        return np.array([bin(s).count("1") for s in self.states], dtype=int)

    def index(self) -> dict:
        return {s: k for k, s in enumerate(self.states)}


def _enumerate_states(sites: int, cap: int) -> list:
    out = []
    for n in range(cap + 1):
        block = [sum(1 << j for j in occ) for occ in itertools.combinations(range(sites), n)]
        out.extend(sorted(block))
    return out


def _annihilators(basis: FockBasis) -> list:
    """Matrices of ``c_j`` on ``basis`` (Jordan-Wigner signs)."""
    idx = basis.index()
    d = basis.dim
    ops = []
    for j in range(basis.sites):
        c = np.zeros((d, d))
        below = (1 << j) - 1
        for col, s in enumerate(basis.states):
            if s >> j & 1:
                sign = -1.0 if bin(s & below).count("1") % 2 else 1.0
                c[idx[s ^ (1 << j)], col] = sign
        ops.append(c)
    return ops


# ---------------------------------------------------------------------------
# superoperator
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SuperopMatrix:
    """The three parts of the Lindbladian on the operator-pair basis.

    Attributes
    ----------
    L0, L_eff, L_jump : ndarray (d**2, d**2)
        Unitary, anticommutator and jump parts.
    basis : FockBasis
        Bra/ket basis; pair ``|i><j|`` has index ``i + d j``.
    """

    L0: np.ndarray
    L_eff: np.ndarray
    L_jump: np.ndarray
    basis: FockBasis

    @property
    def dim(self) -> int:
        return self.L0.shape[0]

    def total(self, kappa: float = 1.0) -> np.ndarray:
        """``L0 + L_eff + kappa L_jump``."""
        return self.L0 + self.L_eff + kappa * self.L_jump

    def pair_sectors(self) -> np.ndarray:
        """``(n_ket, n_bra)`` excitation numbers of every operator pair, shape ``(d**2, 2)``."""
        n = self.basis.popcounts()
        d = n.size
        ket = np.tile(n, d)
        bra = np.repeat(n, d)
        return np.stack([ket, bra], axis=1)

    def trace_residual(self, kappa: float = 1.0) -> float:
        """``max |vec(I)^T L(kappa)|``: how far the trace is from being conserved."""
        d = self.basis.dim
        tr = np.eye(d).reshape(-1, order="F")
        return float(np.max(np.abs(tr @ self.total(kappa)), initial=0.0))


def superoperator_from_operators(
    h_single: np.ndarray,
    loss_vectors=(),
    gain_vectors=(),
    max_excitation: int | None = None,
) -> SuperopMatrix:
    """Superoperator of a quadratic fermionic Lindbladian.

    Parameters
    ----------
    h_single : ndarray (n, n)
        Single-particle Hamiltonian, ``H = sum_ij h_ij c_i^+ c_j``.
    loss_vectors : iterable of ndarray (n,)
        Jump operators ``L = sum_j u_j c_j``.
    gain_vectors : iterable of ndarray (n,)
        Jump operators ``L = sum_j v_j c_j^+``.
    max_excitation : int, optional
        Excitation cap (default: no truncation).

    Raises
    ------
    TruncationOverflowError
        If the operator-pair basis exceeds ``MAX_OPERATOR_PAIRS``.
    """
    h_single = np.asarray(h_single, dtype=complex)
    n = h_single.shape[0]
    cap = n if max_excitation is None else int(max_excitation)
    basis = FockBasis(n, cap)
    if basis.dim**2 > MAX_OPERATOR_PAIRS:
        raise TruncationOverflowError(
            f"{basis.dim}**2 = {basis.dim**2} operator pairs exceed the guard of {MAX_OPERATOR_PAIRS}"
        )
    ext = FockBasis(n, min(n, cap + 1))
    keep = np.arange(basis.dim)  # ext lists the truncated states first
    cs = _annihilators(ext)

    def restrict(op):
        return op[np.ix_(keep, keep)]

    H = sum(h_single[i, j] * cs[i].T @ cs[j] for i in range(n) for j in range(n))
    jumps = [sum(u[j] * cs[j] for j in range(n)) for u in map(np.asarray, loss_vectors)]
    jumps += [sum(v[j] * cs[j].T for j in range(n)) for v in map(np.asarray, gain_vectors)]

    d = basis.dim
    eye = np.eye(d)
    Hr = restrict(np.asarray(H, dtype=complex))
    L0 = -1j * (np.kron(eye, Hr) - np.kron(Hr.T, eye))
    L_eff = np.zeros((d * d, d * d), dtype=complex)
    L_jump = np.zeros((d * d, d * d), dtype=complex)
    for Lm in jumps:
        Lm = np.asarray(Lm, dtype=complex)
        K = restrict(Lm.conj().T @ Lm)
        Lr = restrict(Lm)
        L_eff -= np.kron(eye, K) + np.kron(K.T, eye)
        L_jump += 2 * np.kron(Lr.conj(), Lr)
    return SuperopMatrix(L0, L_eff, L_jump, basis)


def build_superoperator(params: ModelParams, max_excitation: int) -> SuperopMatrix:
    """Lindbladian of the chain on the truncated operator-pair basis.

    Loss ``sqrt(gl) (c_nA + i c_nB)`` and gain ``sqrt(gg) (c+_nA + i c+_nB)``
    act on every cell; the excitation cap applies to bra and ket alike.

    Examples
    --------
    >>> S = build_superoperator(ModelParams(t1=1.5, gamma_l=4/3, cells=2), 2)
    >>> S.basis.dim, S.dim
    (11, 121)
    """
    h = build_free_hamiltonian(params)
    n = h.shape[0]
    loss, gain = [], []
    for c in range(params.cells):
        u = np.zeros(n, dtype=complex)
        u[2 * c], u[2 * c + 1] = 1.0, 1j
        if params.gamma_l > 0:
            loss.append(math.sqrt(params.gamma_l) * u)
        if params.gamma_g > 0:
            gain.append(math.sqrt(params.gamma_g) * u)
    return superoperator_from_operators(h, loss, gain, max_excitation)


def liouvillian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by ``(Re, Im)`` (rounded to 12 digits for ties)."""
    try:
        w = scipy.linalg.eigvals(matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceError("eigensolver returned non-finite eigenvalues")
    order = np.lexsort((np.round(w.imag, 12), np.round(w.real, 12)))
    return w[order]


def multiset_distance(a, b) -> float:
    """Largest distance in the optimal one-to-one matching of two multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ConfigError("multisets must have equal size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


# ---------------------------------------------------------------------------
# full vs no-jump comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumComparison:
    """Full and no-jump spectra with their matched distance."""

    full: np.ndarray
    nojump: np.ndarray
    distance: float
    kappa: float
    trace_residual: float

    def csv_rows(self):
        for source, vals in (("full", self.full), ("nojump", self.nojump)):
            for v in vals:
                yield (float(v.real), float(v.imag), source)


def spectrum_compare(params: ModelParams, max_excitation: int, kappa: float | None = None) -> SpectrumComparison:
    """Compare ``eig(L0 + L_eff + kappa L_jump)`` with ``eig(L0 + L_eff)``.

    ``kappa`` defaults to ``params.kappa``.  For loss-only dissipators the
    jump part is strictly block triangular in the excitation-sector order, so
    the two spectra coincide; with gain they do not.
    """
    S = build_superoperator(params, max_excitation)
    k = params.kappa if kappa is None else float(kappa)
    full = liouvillian_eigenvalues(S.total(k))
    nojump = liouvillian_eigenvalues(S.total(0.0))
    return SpectrumComparison(full, nojump, multiset_distance(full, nojump), k, S.trace_residual(1.0))


# ---------------------------------------------------------------------------
# block structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockStructureReport:
    """Sector structure of the jump part.

    Attributes
    ----------
    jump_is_zero : bool
    loss_pattern : bool
        Every nonzero entry maps sector ``(N, M)`` to ``(N-1, M-1)``.
    strictly_triangular : bool
        Every nonzero entry lowers the total excitation ``N + M``.
    violations : list of tuple
        ``(row, col, (N, M) -> (N', M'), |value|)`` for entries breaking the
        loss pattern, largest first (at most ``max_listed``).
    n_violations : int
    """

    jump_is_zero: bool
    loss_pattern: bool
    strictly_triangular: bool
    violations: list
    n_violations: int


def block_structure_check(superop: SuperopMatrix, tol: float = 1e-12, max_listed: int = 20) -> BlockStructureReport:
    """Check that the jump part only links ``(N, M)`` to ``(N-1, M-1)``."""
    J = superop.L_jump
    sec = superop.pair_sectors()
    rows, cols = np.nonzero(np.abs(J) > tol)
    if rows.size == 0:
        return BlockStructureReport(True, True, True, [], 0)
    src, dst = sec[cols], sec[rows]
    ok = np.all(dst == src - 1, axis=1)
    lowers = dst.sum(axis=1) < src.sum(axis=1)
    bad = np.nonzero(~ok)[0]
    mags = np.abs(J[rows[bad], cols[bad]])
    order = np.argsort(-mags, kind="stable")[:max_listed]
    listed = [
        (int(rows[bad[k]]), int(cols[bad[k]]), (tuple(map(int, src[bad[k]])), tuple(map(int, dst[bad[k]]))), float(mags[k]))
        for k in order
    ]
    return BlockStructureReport(False, bool(ok.all()), bool(lowers.all()), listed, int(bad.size))


# ---------------------------------------------------------------------------
# rapidity composition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    """Scale between shape-matrix eigenvalues and Liouvillian building blocks.

    Liouvillian eigenvalues are ``factor * sum_{j in S} b_j`` for subsets
    ``S`` of the rapidities ``b_j``.
    """

    factor: float
    residual: float


def _subset_sums(values: np.ndarray, limit: int = 1 << 22) -> np.ndarray:
    values = np.asarray(values, dtype=complex).ravel()
    if (1 << values.size) > limit:
        raise ConfigError(f"{values.size} rapidities give too many subsets to enumerate")
    sums = np.zeros(1, dtype=complex)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    return sums


def _nearest_distance(targets: np.ndarray, sums: np.ndarray) -> np.ndarray:
    """Distance from every target to the nearest candidate sum."""
    order = np.lexsort((sums.imag, sums.real))
    s = sums[order]
    re = s.real
    out = np.empty(targets.size)
    for k, t in enumerate(targets):
        best = np.inf
        lo = np.searchsorted(re, t.real - 1e-3, side="left")
        hi = np.searchsorted(re, t.real + 1e-3, side="right")
        if hi > lo:
            best = float(np.min(np.abs(s[lo:hi] - t)))
        if not np.isfinite(best) or best > 1e-3:
            best = float(np.min(np.abs(s - t)))
        out[k] = best
    return out


def calibrate_rapidities(gamma: float = 0.7, tol: float = 1e-9, rate_scale: float = RATE_SCALE) -> Calibration:
    """Fit the convention factor on a single lossy fermion.

    The fixture is one mode with ``L = sqrt(gamma) c``; its Liouvillian
    spectrum is ``{0, -gamma, -gamma, -2 gamma}``.  Its shape matrix is
    built at the rate ``rate_scale * gamma``, the same mapping used by
    :func:`chain_rapidities`.  Candidate factors are the
    ratios of nonzero Liouvillian eigenvalues to nonzero rapidity subset
    sums; the smallest one (negative preferred on ties) that reproduces the
    whole spectrum is returned.

    Raises
    ------
    NumericalError
        If no scalar fits the fixture.
    """
    S = superoperator_from_operators(np.zeros((1, 1)), [np.array([math.sqrt(gamma)])])
    lam = liouvillian_eigenvalues(S.total(1.0))
    Om = majorana_transform(1)
    A = shape_matrix_elements(MajoranaData(np.zeros((2, 2)), [math.sqrt(rate_scale * gamma) * Om[0]]), 1.0).matrix
    b = np.linalg.eigvals(A)
    sums = _subset_sums(b)
    nz_l = lam[np.abs(lam) > tol]
    nz_s = sums[np.abs(sums) > tol]
    candidates = sorted(
        {round(float((x / y).real), 12) for x in nz_l for y in nz_s if abs((x / y).imag) < 1e-9},
        key=lambda f: (abs(f), f),
    )
    for f in candidates:
        res = float(np.max(_nearest_distance(lam, f * sums)))
        if res <= tol * max(1.0, gamma):
            return Calibration(f, res)
    raise NumericalError("no scalar maps the shape-matrix rapidities onto the single-mode Liouvillian spectrum")


@dataclass(frozen=True)
class CompositionReport:
    """Result of matching ED eigenvalues to rapidity combinations.

    Attributes
    ----------
    calibration : Calibration
    matched : int
        ED eigenvalues within ``tol`` of a calibrated 0/1 combination.
    unmatched : ndarray
        ED eigenvalues without a partner (truncation-induced omissions).
    max_residual : float
        Largest nearest-combination distance over the matched eigenvalues.
    all_matched : bool
    """

    calibration: Calibration
    matched: int
    unmatched: np.ndarray
    max_residual: float
    all_matched: bool


def chain_rapidities(params: ModelParams, kappa: float | None = None, rate_scale: float = RATE_SCALE) -> np.ndarray:
    """Rapidities matching the ED Liouvillian of ``params``.

    Eigenvalues of the real-space shape matrix (overall loss kept) at rates
    ``rate_scale * (gamma_l, gamma_g)``; see :data:`RATE_SCALE`.
    """
    k = params.kappa if kappa is None else kappa
    scaled = params.with_(gamma_l=rate_scale * params.gamma_l, gamma_g=rate_scale * params.gamma_g)
    return np.linalg.eigvals(shape_matrix_elements(majorana_coefficients(scaled), k).matrix)


def rapidity_composition_check(
    superop: SuperopMatrix,
    rapidities,
    kappa: float = 1.0,
    tol: float = 1e-6,
    calibration: Calibration | None = None,
) -> CompositionReport:
    """Match every ED eigenvalue to a 0/1 combination of calibrated rapidities."""
    cal = calibrate_rapidities() if calibration is None else calibration
    lam = liouvillian_eigenvalues(superop.total(kappa))
    sums = cal.factor * _subset_sums(np.asarray(rapidities, dtype=complex))
    dist = _nearest_distance(lam, sums)
    ok = dist <= tol
    max_res = float(dist[ok].max()) if ok.any() else math.inf
    return CompositionReport(cal, int(ok.sum()), lam[~ok], max_res, bool(ok.all()))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def write_spectrum_csv(path, comparison: SpectrumComparison) -> None:
    """Write ``re, im, source`` rows (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im", "source"])
        for re, im, src in comparison.csv_rows():
            w.writerow([f"{re:.17g}", f"{im:.17g}", src])
