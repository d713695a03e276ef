"""Koebe transforms, order functionals, and membership checks."""

import numpy as np
import pytest

from schwarzball.errors import NormalizationError
from schwarzball.family import (
    NormalizedJet,
    grad_jacobian,
    koebe_map,
    koebe_transform,
    membership_check,
    norm_order_functional,
    normalize_map,
    order_functionals,
    trace_order_functional,
)
from schwarzball.bergman import schwarzian_norm_sup
from schwarzball.jets import Jet, JetVector
from schwarzball.maps import (
    PolyMap,
    identity_map,
    map_jet_at,
    moebius_pole_at_e1,
    random_ball_point,
    random_normalized_polymap,
)


def shear_a(a):
    return PolyMap(2, [{(1, 0): 1, (0, 2): a}, {(0, 1): 1}])


def shear_b(b):
    return PolyMap(2, [{(1, 0): 1, (2, 0): b}, {(0, 1): 1}])


def test_koebe_at_origin_returns_map_itself():
    m = shear_b(0.4)
    g = koebe_transform(m, np.zeros(2), d=3)
    direct = map_jet_at(m, np.zeros(2), 3)
    for i in range(2):
        keys = set(g.jets[i].coeffs) | set(direct[i].coeffs)
        worst = max(abs(g.jets[i].coeff(k) - direct[i].coeff(k)) for k in keys)
        assert worst <= 1e-13


def test_koebe_identity_gradient_exact():
    rng = np.random.default_rng(14)
    for scale in (1e-1, 1e-2):
        for _ in range(5):
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            u /= np.linalg.norm(u)
            zeta = scale * u
            g = koebe_transform(identity_map(2), zeta, d=2)
            expect = -3.0 * np.conj(zeta)
            assert np.max(np.abs(grad_jacobian(g) - expect)) <= 1e-12


def test_koebe_normalization_for_moebius():
    g = koebe_transform(moebius_pole_at_e1(2), [0.05, -0.02 + 0.01j], d=3)
    assert np.max(np.abs(g.jets.constants())) <= 1e-12
    assert np.max(np.abs(g.jets.linear_matrix() - np.eye(2))) <= 1e-12


def test_normalized_jet_validation():
    bad = JetVector([
        Jet(2, 2, {(0, 0): 0.1, (1, 0): 1.0}),
        Jet(2, 2, {(0, 1): 1.0}),
    ])
    with pytest.raises(NormalizationError):
        NormalizedJet(bad)


def test_grad_jacobian_examples():
    assert np.max(np.abs(grad_jacobian(koebe_transform(identity_map(2), np.zeros(2), 2)))) == 0
    g = NormalizedJet(map_jet_at(moebius_pole_at_e1(2), np.zeros(2), 3))
    assert np.max(np.abs(grad_jacobian(g) - np.array([3.0, 0.0]))) <= 1e-12
    gb = NormalizedJet(map_jet_at(shear_b(0.5), np.zeros(2), 3))
    assert np.max(np.abs(grad_jacobian(gb) - np.array([1.0, 0.0]))) <= 1e-13


def test_trace_order_examples():
    assert trace_order_functional(NormalizedJet(map_jet_at(identity_map(2), np.zeros(2), 2))) == 0
    g = NormalizedJet(map_jet_at(moebius_pole_at_e1(2), np.zeros(2), 3))
    assert abs(trace_order_functional(g) - 1.5) <= 1e-12
    gb = NormalizedJet(map_jet_at(shear_b(0.5), np.zeros(2), 3))
    assert abs(trace_order_functional(gb) - 0.5) <= 1e-13


def test_norm_order_examples():
    assert norm_order_functional(NormalizedJet(map_jet_at(identity_map(2), np.zeros(2), 2))) <= 1e-12
    ga = NormalizedJet(map_jet_at(shear_a(0.7), np.zeros(2), 2))
    assert abs(norm_order_functional(ga) - 0.7) <= 1e-10
    gb = NormalizedJet(map_jet_at(shear_b(0.3), np.zeros(2), 2))
    assert abs(norm_order_functional(gb) - 0.3) <= 1e-10


def test_order_functionals_invariant():
    rng = np.random.default_rng(25)
    for _ in range(10):
        m = random_normalized_polymap(2, rng, scale=0.15)
        g = NormalizedJet(map_jet_at(m, np.zeros(2), 3))
        of = order_functionals(g)
        assert abs(2 * of.trace_order - np.linalg.norm(of.grad_jf)) <= 1e-10


def test_koebe_random_maps_stay_normalized():
    rng = np.random.default_rng(33)
    for _ in range(10):
        m = random_normalized_polymap(2, rng, scale=0.1)
        zeta = random_ball_point(2, rng, 0.5)
        g = koebe_transform(m, zeta, d=3)
        assert np.max(np.abs(g.jets.constants())) <= 1e-12
        assert np.max(np.abs(g.jets.linear_matrix() - np.eye(2))) <= 1e-12


def test_linear_invariance_of_norm_estimate():
    rng = np.random.default_rng(2)
    for m in (moebius_pole_at_e1(2), shear_a(0.15)):
        zeta = random_ball_point(2, rng, 0.3)
        est_f = schwarzian_norm_sup(m, r_max=0.7, shells=4, angular=10, starts=8)
        est_g = schwarzian_norm_sup(koebe_map(m, zeta), r_max=0.7, shells=4, angular=10, starts=8)
        assert est_g.value <= est_f.value + 1e-6


def test_membership_identity_and_moebius():
    assert membership_check(identity_map(2), 0.0, shells=3, angular=6, starts=6).member
    res = membership_check(moebius_pole_at_e1(2), 0.0, shells=3, angular=6, starts=6)
    assert res.member and res.was_normalized


def test_membership_rejects_large_shear():
    res = membership_check(shear_a(2.0), 0.5, shells=3, angular=6, starts=6)
    assert not res.member
    assert res.estimate.value >= 4 / np.sqrt(3) - 1e-9
    assert res.margin < 0


def test_normalize_map_fixes_affine_offsets():
    m = PolyMap(2, [
        {(0, 0): 0.3, (1, 0): 2.0, (0, 2): 0.5},
        {(0, 0): -0.1j, (0, 1): 1.0 + 1.0j},
    ])
    normalized, was = normalize_map(m)
    assert not was
    jv = map_jet_at(normalized, np.zeros(2), 1)
    assert np.max(np.abs(jv.constants())) <= 1e-12
    assert np.max(np.abs(jv.linear_matrix() - np.eye(2))) <= 1e-12


def test_trace_vs_norm_order_observation():
    # observed inequality trace <= n * norm_order on samples; reported only,
    # recorded here so a drastic regression is noticed
    rng = np.random.default_rng(40)
    ratios = []
    for _ in range(5):
        m = random_normalized_polymap(2, rng, scale=0.15)
        g = NormalizedJet(map_jet_at(m, np.zeros(2), 3))
        t = trace_order_functional(g)
        no = norm_order_functional(g)
        if no > 1e-12:
            ratios.append(t / (2 * no))
    print("observed trace/(n*norm_order) ratios:", np.round(ratios, 6))
