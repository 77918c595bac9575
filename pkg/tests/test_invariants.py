import json

import numpy as np
import pytest

from nhtopo.errors import ConfigError, GapClosingError, NumericalError
from nhtopo.gbz import GbzLoop, Source, agbz_curves, assign_subgbz, characteristic_eq
from nhtopo.invariants import (
    SIGMA_Z,
    RationalFunction,
    SymmetryKind,
    SymmetrySign,
    check_symmetry,
    chiral_decompose,
    classify_az,
    compute_invariants,
    determinant_laurent,
    effective_winding_integrand,
    shape_unitaries,
    pole_residues,
    winding_q_integral,
    winding_zero_pole,
    wilson_loop_phase,
    zak_integrand_jump,
    zak_phase,
)
from nhtopo.invariants import SymmetryFragment
from nhtopo.model import ModelParams, bloch_effective, transition_point
from nhtopo.polyalg import Poly1
from nhtopo.thirdq import bloch_shape_matrix

G = 4 / 3
U = shape_unitaries()


def effective_setup(t1, g=G, t2=1.0):
    p = ModelParams(t1=t1, t2=t2, gamma_l=g)
    fam = bloch_effective(p)
    ch = characteristic_eq(fam, Source.EffectiveNH, p)
    loops = assign_subgbz(agbz_curves(ch), ch)
    return p, fam, ch, loops


def nojump_setup(t1, g=G):
    p = ModelParams(t1=t1, t2=1.0, gamma_l=g, kappa=0.0)
    fam = bloch_shape_matrix(p, drop_overall_loss=True)
    ch = characteristic_eq(fam, Source.ShapeNoJump, p)
    loops = assign_subgbz(agbz_curves(ch), ch)
    return p, fam, ch, loops


def jump_setup(t1, kappa=1.0, gl=G, gg=0.0):
    p = ModelParams(t1=t1, t2=1.0, gamma_l=gl, gamma_g=gg, kappa=kappa)
    fam = bloch_shape_matrix(p)
    ch = characteristic_eq(fam, Source.ShapeWithJump, p)
    loops = assign_subgbz(agbz_curves(ch), ch)
    lp = next(lp for lp in loops if "1-" in lp.band_ids)
    return p, fam, ch, lp


# --- chiral decomposition ----------------------------------------------------------


def test_effective_chiral_blocks():
    t1, t2 = 1.0, 1.0
    fam = bloch_effective(ModelParams(t1=t1, t2=t2, gamma_l=G))
    d = chiral_decompose(fam, SIGMA_Z)
    for b in (0.7, -1.3 + 0.4j):
        # h_plus maps S=+1 to S=-1: the lower-left entry t1 - g/2 + t2 beta
        assert d.h_plus(b)[0, 0] == pytest.approx(t1 - G / 2 + t2 * b)
        assert d.h_minus(b)[0, 0] == pytest.approx(t1 + G / 2 + t2 / b)
        np.testing.assert_allclose(d.reassembled(b), fam(b), atol=1e-14)


def test_hermitian_blocks_are_conjugate_on_unit_circle():
    d = chiral_decompose(bloch_effective(ModelParams(t1=0.4, t2=1.0)), SIGMA_Z)
    for k in np.linspace(0, 6, 5):
        b = np.exp(1j * k)
        assert d.h_minus(b)[0, 0] == pytest.approx(np.conj(d.h_plus(b)[0, 0]))


def test_nojump_det_h_plus_closed_form():
    t1, t2 = 1.1519, 1.0
    _, fam, _, _ = nojump_setup(t1)
    d = chiral_decompose(fam, U["S"])
    det = determinant_laurent(d.h_plus)
    for b in (0.3, -0.8 + 0.2j, 1.7j):
        expected = (G**2 - 4 * (t1 + t2 * b) ** 2) ** 2 / 16
        assert det(b) == pytest.approx(expected, abs=1e-12 * (1 + abs(expected)))
        # the alternative closed form is the same polynomial at beta -> i beta
        alt = (G**2 - 4 * (t1 - 1j * t2 * (1j * b)) ** 2) ** 2 / 16
        assert alt == pytest.approx(expected)


def test_chiral_decompose_rejects_non_chiral():
    fam = bloch_shape_matrix(ModelParams(t1=1.0, gamma_l=G, kappa=1.0))
    with pytest.raises((ConfigError, NumericalError)):
        chiral_decompose(fam, U["S"])


# --- windings ------------------------------------------------------------------------


@pytest.mark.parametrize("t1,omega", [(1.0, 1.0), (1.5, 0.0), (-1.5, 0.0)])
def test_effective_winding_both_methods(t1, omega):
    _, fam, ch, loops = effective_setup(t1)
    d = chiral_decompose(fam, SIGMA_Z)
    wq = winding_q_integral(d, loops[0])
    wz = winding_zero_pole(d, loops, ch)
    assert wq.omega == pytest.approx(omega, abs=1e-6)
    assert wz.omega == pytest.approx(omega, abs=1e-6)


def test_constant_q_has_zero_winding():
    from nhtopo.polyalg import BlochMatrixFamily

    fam = BlochMatrixFamily({0: np.array([[0, 2.0], [3.0, 0]], dtype=complex)})
    d = chiral_decompose(fam, SIGMA_Z)
    assert winding_q_integral(d, GbzLoop.circle(1.0)).omega == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("t1,omega", [(1.1519, 4.0), (1.2519, 0.0)])
def test_nojump_zero_pole_winding(t1, omega):
    _, fam, ch, loops = nojump_setup(t1)
    rep = winding_zero_pole(chiral_decompose(fam, U["S"]), loops, ch)
    assert rep.omega == omega
    assert rep.pole_orders == (0, 4)


def test_hermitian_limit_cross_method():
    _, fam, ch, loops = nojump_setup(0.5, g=0.0)
    d = chiral_decompose(fam, U["S"])
    wz = winding_zero_pole(d, loops, ch)
    wq = winding_q_integral(d, GbzLoop.circle(1.0))
    assert wz.omega == pytest.approx(wq.omega, abs=1e-6)
    assert abs(wz.omega) == 4


def test_winding_at_transition_raises():
    tc = transition_point(1.0, G)
    _, fam, ch, loops = effective_setup(tc)
    d = chiral_decompose(fam, SIGMA_Z)
    with pytest.raises(GapClosingError):
        winding_q_integral(d, loops[0])


def test_reversed_loop_negates_winding():
    _, fam, _, loops = effective_setup(1.0)
    d = chiral_decompose(fam, SIGMA_Z)
    assert winding_q_integral(d, loops[0].reversed()).omega == pytest.approx(-1.0, abs=1e-6)


# --- Zak phases --------------------------------------------------------------------------


@pytest.mark.parametrize("t1,nu", [(2.0, 0.0), (0.5, np.pi)])
def test_hermitian_ssh_zak(t1, nu):
    p = ModelParams(t1=t1, t2=1.0)
    fam = bloch_effective(p)
    ch = characteristic_eq(fam, Source.EffectiveNH, p)
    z = zak_phase(fam, "1-", GbzLoop.circle(1.0), ch)
    assert min(abs(z.nu - nu), abs(z.nu - nu - 2 * np.pi)) < 1e-6


@pytest.mark.parametrize("t1,nu", [(1.0, np.pi), (1.5, 0.0)])
def test_jump_zak_phase(t1, nu):
    _, fam, ch, lp = jump_setup(t1)
    z = zak_phase(fam, "1-", lp, ch)
    assert z.quantization_residual < 1e-6
    assert min(abs(z.nu - nu), abs(z.nu - nu - 2 * np.pi)) < 1e-6
    assert 0 <= z.nu < 2 * np.pi


@pytest.mark.parametrize("t1", [1.0, 1.5])
def test_zak_kappa_independent(t1):
    vals = []
    for k in (0.0, 0.25, 0.5, 1.0):
        _, fam, ch, lp = jump_setup(t1, kappa=k)
        vals.append(zak_phase(fam, "1-", lp, ch).nu)
    d = [abs((v - vals[0] + np.pi) % (2 * np.pi) - np.pi) for v in vals]
    assert max(d) < 1e-6


def test_zak_reversed_loop():
    _, fam, ch, lp = jump_setup(1.0)
    a = zak_phase(fam, "1-", lp, ch).nu
    b = zak_phase(fam, "1-", lp.reversed(), ch).nu
    assert abs((a + b + np.pi) % (2 * np.pi) - np.pi) < 1e-6


def test_wilson_loop_gauge_invariance():
    rng = np.random.default_rng(5)
    n, d = 64, 3
    k = 2 * np.pi * np.arange(n) / n
    rights = np.stack([np.exp(1j * k), np.cos(k) + 2, np.sin(k) * 1j + 1], axis=1)
    lefts = rights.copy()
    nu0 = wilson_loop_phase(rights, lefts)
    s = rng.normal(size=n) + 1j * rng.normal(size=n)
    nu1 = wilson_loop_phase(rights * s[:, None], lefts / s.conj()[:, None] * (1 + 0.5j))
    assert abs((nu0 - nu1 + np.pi) % (2 * np.pi) - np.pi) < 1e-10


# --- residues ----------------------------------------------------------------------------


def test_simple_pole_residues():
    (p, r, o), = pole_residues(lambda b: 1 / b, [0.0])
    assert r == pytest.approx(1.0, abs=1e-12) and o == 1
    (p, r, o), = pole_residues(lambda b: 1 / b**2, [0.0])
    assert abs(r) < 1e-12 and o == 2


def test_overlapping_poles_rejected():
    with pytest.raises(ConfigError):
        pole_residues(lambda b: 1 / (b * (b - 1e-3)), [0.0, 1e-3], radius=1e-3)


def test_effective_integrand_residues_sum_to_winding():
    p, _, _, loops = effective_setup(1.0)
    f = effective_winding_integrand(p)
    res = pole_residues(f, f.poles())
    poles = sorted(round(complex(pp).real, 9) for pp, _, _ in res)
    assert poles == sorted([0.0, round(-1 / (G / 2 + 1), 9), round(G / 2 - 1, 9)])
    inside = sum(r for pp, r, _ in res if loops[0].contains(pp))
    assert inside == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("t1,nu", [(1.0, np.pi), (1.5, 0.0)])
def test_jump_integrand_residues_give_zak(t1, nu):
    p, _, _, lp = jump_setup(t1)
    f = zak_integrand_jump(p)
    assert isinstance(f, RationalFunction)
    res = pole_residues(f, f.poles())
    val = -2 * np.pi * sum(r for pp, r, _ in res if lp.contains(pp))
    assert abs((val.real - nu + np.pi) % (2 * np.pi) - np.pi) < 1e-8


# --- symmetry -----------------------------------------------------------------------------


def test_trs_with_minus_sign():
    fam = bloch_shape_matrix(ModelParams(t1=1.2, gamma_l=G, kappa=1.0))
    f = check_symmetry(fam, U["U_T"], SymmetryKind.TRS)
    assert f.holds and f.sign is SymmetrySign.minus
    assert not f.alt_holds


def test_nojump_chiral_holds():
    fam = bloch_shape_matrix(ModelParams(t1=1.2, gamma_l=G, kappa=0.0), drop_overall_loss=True)
    f = check_symmetry(fam, U["S"], SymmetryKind.Chiral)
    assert f.holds and not f.alt_holds


def test_jump_breaks_phs_and_chiral():
    fam = bloch_shape_matrix(ModelParams(t1=1.2, gamma_l=G, kappa=1.0))
    assert not check_symmetry(fam, U["U_C"], SymmetryKind.PHS).holds
    assert not check_symmetry(fam, U["S"], SymmetryKind.Chiral).holds


def test_non_unitary_operator_rejected():
    fam = bloch_effective(ModelParams())
    with pytest.raises(ConfigError):
        check_symmetry(fam, 2 * np.eye(2), "TRS")


def _frag(kind, sign):
    return SymmetryFragment(kind, sign is not SymmetrySign.none, 0.0, False, 1.0, sign)


@pytest.mark.parametrize(
    "t,c,s,name",
    [
        (SymmetrySign.minus, SymmetrySign.minus, True, "CII"),
        (SymmetrySign.minus, SymmetrySign.none, False, "AII"),
        (SymmetrySign.none, SymmetrySign.none, False, "A"),
        (SymmetrySign.none, SymmetrySign.none, True, "AIII"),
        (SymmetrySign.plus, SymmetrySign.plus, True, "BDI"),
    ],
)
def test_classify_table(t, c, s, name):
    frags = [
        _frag(SymmetryKind.TRS, t),
        _frag(SymmetryKind.PHS, c),
        SymmetryFragment(SymmetryKind.Chiral, s, 0.0, False, 1.0),
    ]
    assert classify_az(frags).az_class == name


def test_classify_requires_all_checks():
    with pytest.raises(ConfigError):
        classify_az([_frag(SymmetryKind.TRS, SymmetrySign.minus)])


# --- aggregated report ---------------------------------------------------------------------


def test_compute_invariants_report_json():
    rep = compute_invariants(ModelParams(t1=1.1519, gamma_l=G), "shape-nojump", bands=())
    d = json.loads(rep.to_json())
    assert d["omega"] == 4.0 and d["pole_orders"] == [0, 4] and d["az_class"] == "CII"
    assert set(d) >= {"omega", "nu_by_band", "az_class", "pole_orders", "zero_inventory"}


def test_compute_invariants_jump():
    rep = compute_invariants(ModelParams(t1=1.0, gamma_l=G), "shape-jump")
    assert rep.omega is None and rep.az_class == "AII"
    assert rep.nu_by_band["1-"] == pytest.approx(np.pi, abs=1e-6)
