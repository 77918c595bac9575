import numpy as np
import pytest

from nhtopo.errors import ConfigError
from nhtopo.model import Boundary, ModelParams, build_free_hamiltonian
from nhtopo.invariants import shape_unitaries
from nhtopo.thirdq import (
    MajoranaData,
    Provenance,
    bloch_shape_matrix,
    majorana_coefficients,
    majorana_transform,
    rapidities_closed_form,
    shape_matrix_blocks,
    shape_matrix_elements,
)

G = 4 / 3


def fock_annihilators(n):
    """Jordan-Wigner c_j on the full 2**n Fock space."""
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    I = np.eye(2, dtype=complex)
    ops = []
    for j in range(n):
        mats = [z] * j + [a] + [I] * (n - j - 1)
        M = mats[0]
        for m in mats[1:]:
            M = np.kron(M, m)
        ops.append(M)
    return ops


def majoranas(n):
    cs = fock_annihilators(n)
    ws = []
    for c in cs:
        ws.append(c + c.conj().T)
        ws.append(1j * (c - c.conj().T))
    return cs, ws


def test_no_dissipation_no_vectors():
    assert majorana_coefficients(ModelParams(cells=3)).lindblad_vectors == []


def test_loss_vector_expands_jump_operator():
    data = majorana_coefficients(ModelParams(t1=1.0, gamma_l=1.0, cells=1))
    (l,) = data.lindblad_vectors
    assert l.shape == (4,)
    np.testing.assert_allclose(l, [0.5, -0.5j, 0.5j, 0.5], atol=1e-15)
    cs, ws = majoranas(2)
    L = sum(lm * w for lm, w in zip(l, ws))
    np.testing.assert_allclose(L, cs[0] + 1j * cs[1], atol=1e-14)


def test_gain_vector_expands_jump_operator():
    data = majorana_coefficients(ModelParams(gamma_g=0.49, cells=1))
    (l,) = data.lindblad_vectors
    cs, ws = majoranas(2)
    L = sum(lm * w for lm, w in zip(l, ws))
    np.testing.assert_allclose(L, 0.7 * (cs[0].conj().T + 1j * cs[1].conj().T), atol=1e-14)


def test_majorana_contraction_reproduces_free_hamiltonian():
    p = ModelParams(t1=1.3, t2=0.6, cells=1)
    data = majorana_coefficients(p)
    cs, ws = majoranas(2)
    Hw = sum(data.H_majorana[j, k] * ws[j] @ ws[k] for j in range(4) for k in range(4))
    h = build_free_hamiltonian(p)
    Hc = sum(h[i, j] * cs[i].conj().T @ cs[j] for i in range(2) for j in range(2))
    diff = Hw - Hc
    # equal up to a multiple of the identity
    np.testing.assert_allclose(diff, diff[0, 0] * np.eye(4), atol=1e-14)


def test_majorana_transform_anticommutation():
    Om = majorana_transform(3)
    # c_m = sum Om w with {w_a, w_b} = 2 delta -> {c_m, c_n^+} = 2 (Om Om^+)_{mn} = delta
    np.testing.assert_allclose(2 * Om @ Om.conj().T, np.eye(3), atol=1e-15)


def test_majorana_data_validation():
    with pytest.raises(ConfigError):
        MajoranaData(np.ones((2, 2)))
    with pytest.raises(ConfigError):
        MajoranaData(np.zeros((2, 2)), [np.ones(3)])
    with pytest.raises(ConfigError):
        MajoranaData(np.zeros((3, 3)))


def test_zero_dissipation_is_unitary_part_only():
    p = ModelParams(t1=1.1, t2=0.8, cells=2)
    A0 = shape_matrix_elements(majorana_coefficients(p), 0.0).matrix
    A1 = shape_matrix_elements(majorana_coefficients(p), 1.0).matrix
    np.testing.assert_array_equal(A0, A1)
    # the unitary part is real antisymmetric up to a factor i: spectrum purely imaginary
    w = np.linalg.eigvals(A0)
    assert np.max(np.abs(w.real)) < 1e-12


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("gains", [(G, 0.0), (1.0, 1 / 3)])
def test_element_and_block_paths_agree(L, kappa, gains):
    p = ModelParams(t1=1.2, t2=0.9, gamma_l=gains[0], gamma_g=gains[1], kappa=kappa, cells=L)
    Ae = shape_matrix_elements(majorana_coefficients(p), kappa)
    Ab = shape_matrix_blocks(p)
    assert Ae.provenance is Provenance.ElementFormulas and Ab.provenance is Provenance.BlockFormulas
    assert Ae.matrix.shape == (8 * L, 8 * L)
    np.testing.assert_allclose(Ae.matrix, Ab.matrix, atol=1e-13)


def test_zero_hopping_no_loss_is_zero_matrix():
    assert not np.any(shape_matrix_blocks(ModelParams(t1=0.0, t2=0.0, cells=3)).matrix)


def test_kappa_out_of_range():
    with pytest.raises(ConfigError):
        shape_matrix_elements(majorana_coefficients(ModelParams(cells=1)), 1.5)


def _multiset_close(a, b, tol):
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max() <= tol


@pytest.mark.parametrize("boundary", ["OBC", "PBC"])
@pytest.mark.parametrize("L", [3, 8])
def test_loss_only_spectrum_is_kappa_independent(boundary, L):
    p = ModelParams(t1=1.5, t2=1.0, gamma_l=G, cells=L, boundary=boundary)
    w0 = np.linalg.eigvals(shape_matrix_blocks(p.with_(kappa=0.0)).matrix)
    w1 = np.linalg.eigvals(shape_matrix_blocks(p.with_(kappa=1.0)).matrix)
    assert _multiset_close(w0, w1, 1e-9)


def test_bloch_consistency_pbc():
    L = 6
    p = ModelParams(t1=0.8, t2=1.0, gamma_l=1.0, gamma_g=0.3, kappa=0.7, cells=L, boundary=Boundary.PBC)
    w_real = np.linalg.eigvals(shape_matrix_blocks(p).matrix)
    fam = bloch_shape_matrix(p)
    w_bloch = np.concatenate([np.linalg.eigvals(fam(np.exp(2j * np.pi * m / L))) for m in range(L)])
    assert _multiset_close(w_real, w_bloch, 1e-9)


def test_rapidities_match_band_formulas():
    p = ModelParams(t1=1.0, t2=1.0, gamma_l=G, kappa=1.0)
    fam = bloch_shape_matrix(p)
    for beta in np.exp(1j * np.linspace(0.1, 6.2, 9)) * np.array([1.0, 0.7, 1.3] * 3):
        w = np.linalg.eigvals(fam(beta))
        bands = rapidities_closed_form(p, beta)
        # every band value appears twice in the 8x8 spectrum
        assert _multiset_close(w, np.concatenate([bands, bands]), 1e-9)


def test_hermitian_bloch_spectrum_pattern():
    t1, t2 = 0.7, 1.2
    fam = bloch_shape_matrix(ModelParams(t1=t1, t2=t2))
    for k in np.linspace(0, 2 * np.pi, 7):
        w = np.linalg.eigvals(fam(np.exp(1j * k)))
        e = np.sqrt(t1**2 + t2**2 + 2 * t1 * t2 * np.cos(k))
        assert np.max(np.abs(w.real)) < 1e-12
        np.testing.assert_allclose(np.sort(np.abs(w.imag)), [e] * 8, atol=1e-12)


def test_chiral_relation_of_nojump_bloch_matrix():
    fam = bloch_shape_matrix(ModelParams(t1=1.2, gamma_l=G, kappa=0.0), drop_overall_loss=True)
    S = shape_unitaries()["S"]
    for k in np.linspace(0, 2 * np.pi, 5):
        M = fam(np.exp(1j * k))
        # standard form S M S^-1 = -M holds; the variant without the sign does not
        np.testing.assert_allclose(S @ M @ S.conj().T, -M, atol=1e-13)
        assert np.max(np.abs(S @ M @ S.conj().T - M)) > 0.1


def test_rapidities_are_stable():
    p = ModelParams(t1=1.3, t2=1.0, gamma_l=1.0, gamma_g=0.4, kappa=1.0, cells=6)
    w = np.linalg.eigvals(shape_matrix_blocks(p).matrix)
    # eigenvalues come in +- pairs; decay rates of the Liouvillian are the
    # negatives of one member per pair, so the spectrum is symmetric
    assert np.max(w.real) >= 0
    assert abs(np.max(w.real) + np.min(w.real)) < 1e-9


def test_bloch_rejects_beta_zero():
    with pytest.raises(ConfigError):
        bloch_shape_matrix(ModelParams())(0.0)


def test_closed_form_rapidities_reject_gain():
    with pytest.raises(ConfigError):
        rapidities_closed_form(ModelParams(gamma_g=0.1), 1.0)
