"""The dissipative SSH chain: parameters, Hamiltonians and OBC spectra.

Sites are ordered ``(1A, 1B, 2A, 2B, ...)``.  The free Hamiltonian is

    H = sum_n t1 (c+_{nA} c_{nB} + h.c.) + t2 (c+_{n+1,A} c_{nB} + h.c.)

and the chain is subject to collective loss ``L1n = sqrt(gl) (c_nA + i c_nB)``
and gain ``L2n = sqrt(gg) (c+_nA + i c+_nB)``.  Dropping quantum jumps gives
a non-reciprocal SSH Hamiltonian with intracell hoppings ``t1 +- gamma/2``
(``gamma = gl + gg``) and a uniform on-site term ``-i gamma'/2``
(``gamma' = gl - gg``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import ConfigError, ConvergenceError
from .polyalg import BlochMatrixFamily

__all__ = [
    "Boundary",
    "ModelParams",
    "SpectrumReport",
    "build_free_hamiltonian",
    "build_effective_hamiltonian",
    "bloch_effective",
    "obc_spectrum",
    "edge_mode_epsilon",
    "transition_point",
]


class Boundary(str, enum.Enum):
    OBC = "OBC"
    PBC = "PBC"


@dataclass(frozen=True)
class ModelParams:
    """Physical knobs of the dissipative SSH chain.

    Parameters
    ----------
    t1, t2 : float
        Intracell and intercell hopping.
    gamma_l, gamma_g : float
        Loss and gain rates (nonnegative).
    kappa : float
        Jump strength in ``[0, 1]``; 0 is the no-jump effective theory, 1
        the full master equation.
    cells : int
        Number of unit cells ``L``.
    boundary : Boundary
        Open or periodic boundary conditions.
    """

    t1: float = 1.0
    t2: float = 1.0
    gamma_l: float = 0.0
    gamma_g: float = 0.0
    kappa: float = 1.0
    cells: int = 1
    boundary: Boundary = Boundary.OBC

    def __post_init__(self):
        for name in ("t1", "t2", "gamma_l", "gamma_g", "kappa"):
            v = getattr(self, name)
            if isinstance(v, complex) or not math.isfinite(float(v)):
                raise ConfigError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.gamma_l < 0 or self.gamma_g < 0:
            raise ConfigError("loss and gain rates must be nonnegative")
        if not 0.0 <= self.kappa <= 1.0:
            raise ConfigError(f"kappa must lie in [0, 1], got {self.kappa}")
        if int(self.cells) != self.cells:
            raise ConfigError(f"cells must be an integer, got {self.cells!r}")
        object.__setattr__(self, "cells", int(self.cells))
        try:
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError:
            raise ConfigError(f"unknown boundary {self.boundary!r}") from None

    @property
    def gamma(self) -> float:
        """Total rate ``gamma_l + gamma_g`` (sets the hopping asymmetry)."""
        return self.gamma_l + self.gamma_g

    @property
    def gamma_prime(self) -> float:
        """Rate difference ``gamma_l - gamma_g`` (sets the overall loss)."""
        return self.gamma_l - self.gamma_g

    @property
    def has_gain(self) -> bool:
        return self.gamma_g > 0

    def with_(self, **changes) -> "ModelParams":
        """Copy with some fields replaced."""
        return replace(self, **changes)


def transition_point(t2: float, rate: float) -> float:
    """Positive transition hopping ``sqrt((rate/2)**2 + t2**2)``."""
    return math.sqrt((rate / 2) ** 2 + t2**2)


def _require_cells(params: ModelParams):
    if params.cells < 1:
        raise ConfigError("the chain needs at least one unit cell")


def _hopping_matrix(L: int, t_ab: complex, t_ba: complex, t2: float, periodic: bool) -> np.ndarray:
    n = 2 * L
    H = np.zeros((n, n), dtype=complex)
    for c in range(L):
        a, b = 2 * c, 2 * c + 1
        H[a, b] += t_ab
        H[b, a] += t_ba
        if c + 1 < L or periodic:
            nxt = (2 * (c + 1)) % n
            H[nxt, b] += t2
            H[b, nxt] += t2
    return H


def build_free_hamiltonian(params: ModelParams) -> np.ndarray:
    """Single-particle matrix of the Hermitian SSH chain (``2L x 2L``).

    Examples
    --------
    >>> build_free_hamiltonian(ModelParams(t1=1.0, cells=1)).real
    array([[0., 1.],
           [1., 0.]])
    """
    _require_cells(params)
    periodic = params.boundary is Boundary.PBC
    return _hopping_matrix(params.cells, params.t1, params.t1, params.t2, periodic)


def build_effective_hamiltonian(params: ModelParams, drop_overall_loss: bool = False) -> np.ndarray:
    """Non-Hermitian no-jump Hamiltonian ``H - (i/2) sum_m L_m^+ L_m``.

    Intracell hoppings are ``t1 + gamma/2`` (``A <- B``) and ``t1 - gamma/2``
    (``B <- A``); intercell bonds are the symmetric ``t2``.  Unless
    ``drop_overall_loss`` is set, the on-site term ``-i gamma'/2`` is kept.
    """
    _require_cells(params)
    g = params.gamma
    periodic = params.boundary is Boundary.PBC
    H = _hopping_matrix(params.cells, params.t1 + g / 2, params.t1 - g / 2, params.t2, periodic)
    if not drop_overall_loss:
        H = H - 0.5j * params.gamma_prime * np.eye(H.shape[0])
    return H


def bloch_effective(params: ModelParams) -> BlochMatrixFamily:
    """Bloch family of the effective model with the overall loss dropped.

    ``H(beta) = [[0, h_up], [h_dn, 0]]`` with ``h_up = t1 + gamma/2 + t2/beta``
    and ``h_dn = t1 - gamma/2 + t2 beta``; ``det(H - E) = 0`` is
    ``(t1 - gamma/2 + t2 beta)(t1 + gamma/2 + t2/beta) = E**2``.
    """
    g = params.gamma
    c0 = np.array([[0, params.t1 + g / 2], [params.t1 - g / 2, 0]], dtype=complex)
    cp = np.array([[0, 0], [params.t2, 0]], dtype=complex)
    cm = np.array([[0, params.t2], [0, 0]], dtype=complex)
    return BlochMatrixFamily({0: c0, 1: cp, -1: cm}, name="effective")


# ---------------------------------------------------------------------------
# OBC spectra and edge modes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of a dense matrix plus an edge-mode count.

    Attributes
    ----------
    eigenvalues : ndarray of complex
        Sorted by ``(|lambda|, Re, Im)``.
    edge_mode_count : int
        Number of eigenvalues classified as edge (zero) modes; always even.
    edge_mode_tolerance : float
        Window ``|lambda| < tol`` that was applied.
    """

    eigenvalues: np.ndarray
    edge_mode_count: int
    edge_mode_tolerance: float


def edge_mode_epsilon(matrix: np.ndarray) -> float:
    """Numerical zero scale ``max(1e-8, ||M||_2 * 1e-12)``."""
    return max(1e-8, float(np.linalg.norm(matrix, 2)) * 1e-12)


def _cluster_tolerance(mags: np.ndarray, floor: float, ratio: float, max_cluster: int, window: float):
    """Smallest even-sized cluster of ``|lambda|`` separated by ``ratio``.

    Returns the tolerance separating the cluster from the rest, or ``floor``
    when no cluster qualifies.
    """
    n = mags.size
    for k in range(2, min(max_cluster, n - 1) + 1, 2):
        inner, outer = mags[k - 1], mags[k]
        if inner > window:
            break
        if outer >= ratio * max(inner, floor):
            return max(floor, math.sqrt(max(inner, floor / 10) * outer))
    return floor


def obc_spectrum(
    matrix,
    edge_tol: float | None = None,
    *,
    cluster_ratio: float = 5.0,
    max_cluster: int = 16,
) -> SpectrumReport:
    """All eigenvalues of a square matrix and the number of edge modes.

    Parameters
    ----------
    matrix : array_like or ShapeMatrix
        Square complex matrix (typically the real-space shape matrix with the
        overall loss dropped).
    edge_tol : float, optional
        Explicit window: modes with ``|lambda| < edge_tol`` are edge modes.
        When omitted, a mode is an edge mode if ``|lambda| < 10 * eps`` with
        ``eps = max(1e-8, ||M|| 1e-12)``, or if it belongs to the smallest
        even-sized cluster of near-zero moduli separated from the rest of
        the spectrum by a factor ``cluster_ratio`` (finite chains split the
        exact zero modes exponentially in ``L``).
    cluster_ratio, max_cluster : float, int
        Parameters of the automatic cluster rule.

    Raises
    ------
    ConfigError
        If the input is not a finite square matrix.
    ConvergenceError
        If LAPACK fails to converge.
    """
    M = np.asarray(getattr(matrix, "matrix", matrix), dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"obc_spectrum needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError("matrix has non-finite entries")
    try:
        w = scipy.linalg.eigvals(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceError("eigensolver returned non-finite eigenvalues")
    order = np.lexsort((w.imag, w.real, np.round(np.abs(w), 12)))
    w = w[order]
    mags = np.abs(w)
    eps = edge_mode_epsilon(M)
    if edge_tol is None:
        floor = 10 * eps
        scale = float(mags.max()) if mags.size else 0.0
        tol = _cluster_tolerance(mags, floor, cluster_ratio, max_cluster, window=0.05 * scale)
    else:
        if edge_tol <= 0:
            raise ConfigError("edge tolerance must be positive")
        tol = float(edge_tol)
    count = int(np.sum(mags < tol))
    if count % 2:
        # edge modes come in end pairs; an odd count means the window cuts a
        # pair, so the boundary mode is dropped
        count -= 1
    return SpectrumReport(w, count, tol)
