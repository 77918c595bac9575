import numpy as np
import pytest

from nhtopo.errors import ConfigError
from nhtopo.model import (
    Boundary,
    ModelParams,
    bloch_effective,
    build_effective_hamiltonian,
    build_free_hamiltonian,
    obc_spectrum,
    transition_point,
)
from nhtopo.thirdq import shape_matrix_blocks

G = 4 / 3


def test_single_dimer():
    H = build_free_hamiltonian(ModelParams(t1=1.0, cells=1))
    np.testing.assert_array_equal(H, [[0, 1], [1, 0]])


def test_decoupled_dimers_block_diagonal():
    H = build_free_hamiltonian(ModelParams(t1=1.0, t2=0.0, cells=2))
    expected = np.kron(np.eye(2), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(H, expected)


def test_three_cell_tridiagonal_against_hand_built():
    H = build_free_hamiltonian(ModelParams(t1=1.5, t2=1.0, cells=3))
    hop = [1.5, 1, 1.5, 1, 1.5]
    hand = np.diag(hop, 1) + np.diag(hop, -1)
    np.testing.assert_array_equal(H, hand)
    np.testing.assert_allclose(np.linalg.eigvalsh(H), np.linalg.eigvalsh(hand), atol=1e-14)


def test_pbc_adds_wraparound_bond():
    H = build_free_hamiltonian(ModelParams(t1=1.5, t2=0.7, cells=3, boundary=Boundary.PBC))
    assert H[0, 5] == 0.7 and H[5, 0] == 0.7
    assert build_free_hamiltonian(ModelParams(cells=3))[0, 5] == 0


def test_free_hamiltonian_is_exactly_hermitian():
    H = build_free_hamiltonian(ModelParams(t1=0.3, t2=1.7, cells=7, boundary="PBC"))
    assert np.array_equal(H, H.conj().T)


def test_zero_cells_rejected():
    with pytest.raises(ConfigError):
        build_free_hamiltonian(ModelParams(cells=0))


@pytest.mark.parametrize(
    "kw",
    [dict(kappa=1.5), dict(gamma_l=-1.0), dict(t1=float("nan")), dict(t1=1j), dict(cells=2.5), dict(boundary="XYZ")],
)
def test_invalid_params_rejected(kw):
    with pytest.raises(ConfigError):
        ModelParams(**kw)


def test_effective_hermitian_limit_equals_free():
    p = ModelParams(t1=1.3, t2=0.4, cells=5)
    np.testing.assert_array_equal(build_effective_hamiltonian(p), build_free_hamiltonian(p))


def test_effective_single_cell_hoppings():
    H = build_effective_hamiltonian(ModelParams(t1=1.0, gamma_l=G, cells=1), drop_overall_loss=True)
    np.testing.assert_allclose(H, [[0, 1 + 2 / 3], [1 - 2 / 3, 0]], atol=1e-15)


def test_effective_overall_loss_term():
    p = ModelParams(t1=1.0, gamma_l=1.0, gamma_g=0.25, cells=2)
    d = np.diag(build_effective_hamiltonian(p))
    np.testing.assert_allclose(d, -0.5j * 0.75)


def test_gauge_shift_moves_spectrum():
    p = ModelParams(t1=1.5, gamma_l=G, cells=6)
    H = build_effective_hamiltonian(p, drop_overall_loss=True)
    c = 0.3 - 0.7j
    w0 = np.sort_complex(np.linalg.eigvals(H))
    w1 = np.sort_complex(np.linalg.eigvals(H + c * np.eye(H.shape[0])))
    np.testing.assert_allclose(w1, w0 + c, atol=1e-12)


def test_effective_obc_cloud_matches_bloch_radius():
    # eigenvalues of the open chain lie on E(beta) with |beta| = r
    p = ModelParams(t1=1.5, t2=1.0, gamma_l=G, cells=30)
    w = np.linalg.eigvals(build_effective_hamiltonian(p, drop_overall_loss=True))
    r = np.sqrt((1.5 - G / 2) / (1.5 + G / 2))
    k = np.linspace(0, 2 * np.pi, 4001)
    band = np.sqrt((1.5 - G / 2 + r * np.exp(1j * k)) * (1.5 + G / 2 + np.exp(-1j * k) / r))
    curve = np.concatenate([band, -band])
    dist = np.min(np.abs(w[:, None] - curve[None, :]), axis=1)
    assert np.max(dist) < 1e-2


def test_bloch_effective_values():
    fam = bloch_effective(ModelParams(t1=1.0, t2=1.0, gamma_l=G))
    M = fam(1.0)
    assert M[0, 1] == pytest.approx(1 + G / 2 + 1)
    assert M[1, 0] == pytest.approx(1 - G / 2 + 1)
    assert M[0, 1] * M[1, 0] == pytest.approx(3.5556, abs=1e-4)


def test_bloch_effective_hermitian_ssh_at_k0():
    fam = bloch_effective(ModelParams(t1=0.7, t2=1.1))
    np.testing.assert_allclose(fam(1.0), [[0, 1.8], [1.8, 0]])


def test_bloch_effective_rejects_beta_zero():
    with pytest.raises(ConfigError):
        bloch_effective(ModelParams())(0.0)


def test_bloch_effective_zero_energy_roots():
    t1, t2 = 1.0, 1.0
    fam = bloch_effective(ModelParams(t1=t1, t2=t2, gamma_l=G))
    for beta in (-(t1 - G / 2) / t2, -t2 / (t1 + G / 2)):
        assert abs(np.linalg.det(fam(beta))) < 1e-12


def test_obc_spectrum_two_by_two():
    rep = obc_spectrum(np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(np.sort(rep.eigenvalues.real), [-1, 1])
    assert rep.edge_mode_count == 0


def test_obc_spectrum_rejects_non_square():
    with pytest.raises(ConfigError):
        obc_spectrum(np.zeros((2, 3)))
    with pytest.raises(ConfigError):
        obc_spectrum(np.array([[np.nan]]))


@pytest.mark.parametrize("t1,count", [(1.1519, 8), (1.2519, 0)])
def test_shape_matrix_edge_modes(t1, count):
    p = ModelParams(t1=t1, t2=1.0, gamma_l=G, kappa=0.0, cells=50)
    rep = obc_spectrum(shape_matrix_blocks(p, drop_overall_loss=True))
    assert rep.edge_mode_count == count
    assert rep.edge_mode_count % 2 == 0
    if count:
        # exact zeros, broadened by the non-normality of the open chain
        mags = np.sort(np.abs(rep.eigenvalues))
        assert mags[7] < 1e-2 < mags[8]


def test_edge_modes_across_transition():
    tc = transition_point(1.0, G)
    for t1 in (-2.0, -tc - 0.1, -tc + 0.1, 0.0, tc - 0.1, tc + 0.1, 2.5):
        p = ModelParams(t1=t1, t2=1.0, gamma_l=G, kappa=0.0, cells=40)
        rep = obc_spectrum(shape_matrix_blocks(p, drop_overall_loss=True))
        assert rep.edge_mode_count == (8 if abs(t1) < tc else 0), t1


def test_explicit_edge_window():
    rep = obc_spectrum(np.diag([1e-9, -1e-9, 1.0, 2.0]), edge_tol=1e-6)
    assert rep.edge_mode_count == 2
    with pytest.raises(ConfigError):
        obc_spectrum(np.eye(2), edge_tol=-1)


def test_transition_point():
    assert transition_point(1.0, G) == pytest.approx(1.2019, abs=1e-4)
