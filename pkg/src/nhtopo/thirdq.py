"""Third-quantized shape matrices of the dissipative SSH chain.

Majorana operators are ``w_{2m-1} = c_m + c_m^+`` and
``w_{2m} = i (c_m - c_m^+)`` with fermion modes ordered
``(1A, 1B, 2A, 2B, ...)``.  The shape matrix acts on the doubled space of
``4n`` normal-mode components; row ``2j + s`` belongs to Majorana ``j`` and
copy ``s`` in {0, 1}.  Grouped per fermion mode this gives the 4x4 blocks in
which the real-space and Bloch matrices are written.

Two construction paths are provided and cross-checked:

* :func:`shape_matrix_elements` assembles ``A`` entry by entry from the
  Majorana Hamiltonian coefficients and the Lindblad coefficient vectors;
* :func:`shape_matrix_blocks` lays out closed-form 4x4 blocks.

The jump strength ``kappa`` scales only the sandwich (jump) part of the
dissipator, which in this basis populates the off-diagonal copy blocks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import Boundary, ModelParams, build_free_hamiltonian
from .polyalg import BlochMatrixFamily

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "T_BLOCK",
    "MajoranaData",
    "Provenance",
    "ShapeMatrix",
    "BlochMatrixFamily",
    "majorana_transform",
    "majorana_coefficients",
    "shape_matrix_elements",
    "onsite_blocks",
    "shape_matrix_blocks",
    "bloch_shape_matrix",
    "bloch_from_real_space",
    "rapidities_closed_form",
]

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: Hopping block ``T = -i sigma_y (x) I``.
T_BLOCK = -1j * np.kron(SIGMA_Y, I2)


@dataclass(frozen=True, eq=False)
class MajoranaData:
    """Majorana-basis data of a quadratic Lindbladian.

    Attributes
    ----------
    H_majorana : ndarray (2n, 2n)
        Antisymmetric coefficients with ``H = sum_jk w_j H_jk w_k`` (up to a
        constant).
    lindblad_vectors : list of ndarray (2n,)
        Coefficients ``l_mu`` with ``L_mu = sum_m l_{mu,m} w_m``.
    """

    H_majorana: np.ndarray
    lindblad_vectors: list = field(default_factory=list)

    def __post_init__(self):
        H = np.asarray(self.H_majorana, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] % 2:
            raise ConfigError("H_majorana must be square with even dimension")
        sym = H + H.T
        diag = np.trace(sym) / H.shape[0]
        if np.max(np.abs(sym - diag * np.eye(H.shape[0])), initial=0) > 1e-12 * max(1.0, np.max(np.abs(H))):
            raise ConfigError("H_majorana is not antisymmetric up to a multiple of the identity")
        vecs = [np.asarray(v, dtype=complex).ravel() for v in self.lindblad_vectors]
        for v in vecs:
            if v.size != H.shape[0]:
                raise ConfigError(f"Lindblad vector of length {v.size}, expected {H.shape[0]}")
        object.__setattr__(self, "H_majorana", H)
        object.__setattr__(self, "lindblad_vectors", vecs)

    @property
    def n_majorana(self) -> int:
        return self.H_majorana.shape[0]


class Provenance(str, enum.Enum):
    ElementFormulas = "ElementFormulas"
    BlockFormulas = "BlockFormulas"


@dataclass(frozen=True, eq=False)
class ShapeMatrix:
    """A ``4n x 4n`` shape matrix with its jump strength and construction path."""

    matrix: np.ndarray
    kappa: float
    provenance: Provenance

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def majorana_transform(n_modes: int) -> np.ndarray:
    """Matrix ``Om`` with ``c_m = sum_a Om[m, a] w_a``."""
    Om = np.zeros((n_modes, 2 * n_modes), dtype=complex)
    Om[np.arange(n_modes), 2 * np.arange(n_modes)] = 0.5
    Om[np.arange(n_modes), 2 * np.arange(n_modes) + 1] = -0.5j
    return Om


def majorana_coefficients(params: ModelParams) -> MajoranaData:
    """Majorana Hamiltonian and Lindblad vectors of the chain.

    The loss operator of cell ``n`` expands as
    ``sqrt(gl) (c_nA + i c_nB) = sqrt(gl) (w1 - i w2 + i w3 + w4) / 2`` in the
    Majoranas of that cell, the gain operator as
    ``sqrt(gg) (w1 + i w2 + i w3 - w4) / 2``.
    """
    h = build_free_hamiltonian(params)
    n = h.shape[0]
    Om = majorana_transform(n)
    Md = Om.conj().T @ h @ Om
    H = (Md - Md.T) / 2
    vecs = []
    for c in range(params.cells):
        a, b = 2 * c, 2 * c + 1
        if params.gamma_l > 0:
            vecs.append(np.sqrt(params.gamma_l) * (Om[a] + 1j * Om[b]))
        if params.gamma_g > 0:
            vecs.append(np.sqrt(params.gamma_g) * (Om[a].conj() + 1j * Om[b].conj()))
    return MajoranaData(H, vecs)


def shape_matrix_elements(data: MajoranaData, kappa: float) -> ShapeMatrix:
    """Assemble the shape matrix entry by entry.

    With ``M = sum_mu l_mu l_mu^+`` (the bath matrix) the entries are

    * ``A[2j, 2k]     = -4i H_jk + M_jk - M_kj``
    * ``A[2j+1, 2k+1] = -4i H_jk - M_jk + M_kj``
    * ``A[2j, 2k+1]   =  2i kappa M_jk``
    * ``A[2j+1, 2k]   = -2i kappa M_kj``

    i.e. the Hamiltonian and the anticommutator part of the dissipator fill
    the copy-diagonal entries while the jump part, scaled by ``kappa``, fills
    the copy-off-diagonal ones.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ConfigError("kappa must lie in [0, 1]")
    H = data.H_majorana
    n2 = H.shape[0]
    M = np.zeros((n2, n2), dtype=complex)
    for v in data.lindblad_vectors:
        M += np.outer(v, v.conj())
    Hs = 2 * (H - H.T) / 2  # drop the gauge (identity) part
    A = np.zeros((2 * n2, 2 * n2), dtype=complex)
    A[0::2, 0::2] = -2j * Hs + M - M.T
    A[1::2, 1::2] = -2j * Hs - M + M.T
    A[0::2, 1::2] = 2j * kappa * M
    A[1::2, 0::2] = -2j * kappa * M.T
    return ShapeMatrix(A, float(kappa), Provenance.ElementFormulas)


# ---------------------------------------------------------------------------
# block construction
# ---------------------------------------------------------------------------


def _loss_blocks(gl: float, kappa: float):
    k = kappa
    A = -gl / 2 * np.array(
        [[0, -1j * k, -1j, k], [1j * k, 0, k, 1j], [1j, -k, 0, -1j * k], [-k, -1j, 1j * k, 0]],
        dtype=complex,
    )
    B = -gl / 2 * np.array(
        [[1j, -k, 0, -1j * k], [-k, -1j, 1j * k, 0], [0, 1j * k, 1j, -k], [-1j * k, 0, -k, -1j]],
        dtype=complex,
    )
    return A, B


def _gain_blocks(gg: float, kappa: float):
    k = kappa
    A = -gg / 2 * np.array(
        [[0, -1j * k, 1j, -k], [1j * k, 0, -k, -1j], [-1j, k, 0, -1j * k], [k, 1j, 1j * k, 0]],
        dtype=complex,
    )
    B = -gg / 2 * np.array(
        [[1j, -k, 0, 1j * k], [-k, -1j, -1j * k, 0], [0, -1j * k, 1j, -k], [1j * k, 0, -k, -1j]],
        dtype=complex,
    )
    return A, B


def onsite_blocks(params: ModelParams, kappa: float | None = None):
    """Dissipative 4x4 blocks ``(A, B)`` of one cell.

    ``A`` sits on both mode blocks of a cell, ``B`` on the ``(A, B)`` block
    and ``-B`` on the ``(B, A)`` block.
    """
    k = params.kappa if kappa is None else kappa
    Al, Bl = _loss_blocks(params.gamma_l, k)
    Ag, Bg = _gain_blocks(params.gamma_g, k)
    return Al + Ag, Bl + Bg


def _cell_blocks(params: ModelParams, drop_overall_loss: bool):
    """Coefficient blocks ``{d: 8x8}`` coupling cell ``n`` to cell ``n + d``."""
    A, B = onsite_blocks(params)
    if drop_overall_loss:
        A0, _ = onsite_blocks(params, kappa=0.0)
        A = A - A0
    T = T_BLOCK
    c0 = np.block([[A, params.t1 * T + B], [params.t1 * T - B, A]])
    z = np.zeros((4, 4), dtype=complex)
    cp = np.block([[z, z], [params.t2 * T, z]])  # B_n <- A_{n+1}
    cm = np.block([[z, params.t2 * T], [z, z]])  # A_n <- B_{n-1}
    return {0: c0, 1: cp, -1: cm}


def shape_matrix_blocks(params: ModelParams, drop_overall_loss: bool = False) -> ShapeMatrix:
    """Real-space shape matrix laid out from closed-form 4x4 blocks.

    ``A = A_0 + A_diss``: hopping blocks ``t1 T`` (intracell) and ``t2 T``
    (intercell), dissipative on-site blocks from :func:`onsite_blocks`.
    OBC omits the wrap-around ``t2`` blocks.  With ``drop_overall_loss`` the
    kappa-independent on-site block is removed from every mode (the
    shape-matrix counterpart of dropping ``-i gamma'/2``).
    """
    L = params.cells
    if L < 1:
        raise ConfigError("the chain needs at least one unit cell")
    blocks = _cell_blocks(params, drop_overall_loss)
    N = 8 * L
    A = np.zeros((N, N), dtype=complex)
    periodic = params.boundary is Boundary.PBC
    for n in range(L):
        for d, blk in blocks.items():
            m = n + d
            if not 0 <= m < L:
                if not periodic:
                    continue
                m %= L
            A[8 * n : 8 * n + 8, 8 * m : 8 * m + 8] += blk
    return ShapeMatrix(A, params.kappa, Provenance.BlockFormulas)


def bloch_shape_matrix(params: ModelParams, drop_overall_loss: bool = False) -> BlochMatrixFamily:
    """8x8 Bloch shape matrix ``[[A, (t1 + t2/beta) T + B], [(t1 + t2 beta) T - B, A]]``."""
    name = "shape-nojump" if drop_overall_loss else "shape"
    return BlochMatrixFamily(_cell_blocks(params, drop_overall_loss), name=name)


def bloch_from_real_space(matrix: np.ndarray, cell_dim: int = 8) -> BlochMatrixFamily:
    """Extract the Bloch family of a periodic real-space matrix (``L >= 3``)."""
    M = np.asarray(matrix)
    L = M.shape[0] // cell_dim
    if L < 3:
        raise ConfigError("need at least three cells to separate the neighbour blocks")
    s = slice(cell_dim, 2 * cell_dim)
    coeffs = {d: M[s, cell_dim * ((1 + d) % L) : cell_dim * ((1 + d) % L) + cell_dim] for d in (-1, 0, 1)}
    return BlochMatrixFamily(coeffs)


def rapidities_closed_form(params: ModelParams, beta) -> np.ndarray:
    """Loss-only band rapidities ``E_{1,+-}``, ``E_{2,+-}`` at ``beta``.

    ``E_1 = g/2 +- sqrt((g/2 + t1 + t2 beta)(g/2 - t1 - t2/beta))`` and
    ``E_2 = -g/2 +- sqrt((g/2 + t1 + t2/beta)(g/2 - t1 - t2 beta))``.
    Returned with shape ``beta.shape + (4,)`` in the order
    ``(E1+, E1-, E2+, E2-)``.
    """
    if params.has_gain:
        raise ConfigError("closed-form rapidities are for loss-only chains")
    b = np.asarray(beta, dtype=complex)
    g, t1, t2 = params.gamma_l, params.t1, params.t2
    r1 = np.sqrt((g / 2 + t1 + t2 * b) * (g / 2 - t1 - t2 / b))
    r2 = np.sqrt((g / 2 + t1 + t2 / b) * (g / 2 - t1 - t2 * b))
    return np.stack([g / 2 + r1, g / 2 - r1, -g / 2 + r2, -g / 2 - r2], axis=-1)
