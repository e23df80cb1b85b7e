import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from parking_garage import Configuration
from parking_garage.dihedral import Family, FamilySpec, closed_form, lift
from parking_garage.limit import (
    DegenerateBasepointError,
    LimitForms,
    PoleError,
    contour_integral,
    dh0_zeros,
    eval_dh0,
    eval_limit_forms,
    gauss_map_modulus,
    horizontal_period_limits,
    integrate_omega0,
    neck_scales,
    residues_at_infinity,
    vertical_period_limits,
)


def test_two_point_single_zero_at_origin(two_point):
    z = dh0_zeros(two_point)
    assert z.size == 1 and abs(z[0]) <= 1e-15


def test_neutral_pair_has_no_zeros():
    assert dh0_zeros(Configuration(np.array([1.0, -1.0]), np.array([1, -1]))).size == 0


def test_ks3_double_zero_at_origin():
    z = dh0_zeros(lift(closed_form(FamilySpec(Family.KARCHER_SCHERK, 3))))
    assert z.size == 2 and np.all(np.abs(z) <= 1e-6)


def test_two_point_pair_value():
    cfg = Configuration(np.array([1.0, -1.0]), np.array([-1, -1]))
    dh0, _ = eval_limit_forms(LimitForms(cfg), 1j)
    assert abs(dh0 - eval_dh0(cfg, 1j)) <= 1e-15
    assert abs(eval_dh0(cfg, 1j) - 1j * (1 / (1j - 1) + 1 / (1j + 1))) <= 1e-15


def test_pole_errors(two_point):
    forms = LimitForms(two_point)
    with pytest.raises(PoleError):
        eval_limit_forms(forms, two_point.points[0])
    with pytest.raises(PoleError):
        eval_limit_forms(forms, 0.0)


def test_t_range_checked(two_point):
    with pytest.raises(ValueError):
        LimitForms(two_point, t=1.0)


def random_config(rng, n):
    while True:
        p = rng.normal(size=n) + 1j * rng.normal(size=n)
        d = np.abs(p[:, None] - p[None, :]) + np.eye(n)
        if d.min() > 0.2:
            return Configuration(p, rng.choice([-1, 1], size=n))


@pytest.mark.parametrize("seed", range(10))
def test_dh0_residues_and_zero_count(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng, int(rng.integers(2, 7)))
    for pj, ej in zip(cfg.points, cfg.charges):
        res = contour_integral(lambda z: eval_dh0(cfg, z), pj, 0.05) / (2j * np.pi)
        assert abs(res + 1j * ej) <= 1e-10
    expected = cfg.n - 1 if cfg.total_charge != 0 else cfg.n - 2
    zeros = dh0_zeros(cfg)
    if cfg.total_charge == 0:
        assert zeros.size <= expected
    else:
        assert zeros.size == expected
    for q in zeros:
        assert abs(eval_dh0(cfg, q)) <= 1e-8 * max(1, np.max(np.abs(cfg.points)))


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("t", [0.0, 0.3])
def test_omega0_residue_sum_matches_infinity(seed, t):
    rng = np.random.default_rng(100 + seed)
    cfg = random_config(rng, int(rng.integers(2, 6)))
    forms = LimitForms(cfg, t=t)
    finite = float(np.sum(forms.omega0_residues))
    _, res_inf = residues_at_infinity(cfg, t)
    if cfg.total_charge != 0 or forms.dh0_zeros.size == cfg.n - 2:
        assert abs(finite + res_inf) <= 1e-8
    big = 3 * np.max(np.abs(forms.pole_points)) + 1
    around = contour_integral(lambda z: eval_limit_forms(forms, z)[1], 0, big, nodes=2048) / (2j * np.pi)
    assert abs(around - finite) <= 1e-8


def test_residues_at_infinity_cases(two_point):
    assert residues_at_infinity(two_point, 0.2) == (-2j, -1 + 0.4)
    neutral = Configuration(np.array([1.0, -1.0]), np.array([1, -1]))
    assert residues_at_infinity(neutral) == (0j, -2.0)


def test_gauss_modulus_matches_integral(two_point):
    forms = LimitForms(two_point, t=0.2)
    path = [0.3 + 0.4j, 1.5 + 0.9j, 0.2 + 1.7j, -1.1 + 0.5j]
    ratio = gauss_map_modulus(forms, path[-1]) / gauss_map_modulus(forms, path[0])
    assert abs(math.log(ratio) - integrate_omega0(forms, path).real) <= 1e-12


def test_omega0_loop_integral_is_residue():
    cfg = Configuration(np.array([0.8, -0.6 + 0.3j, 0.2j]), np.array([-1, 1, -1]))
    forms = LimitForms(cfg, t=0.25)
    p = cfg.points[0]
    loop = p + 0.1 * np.exp(2j * np.pi * np.arange(65) / 64)
    val = integrate_omega0(forms, loop)
    assert abs(val - 2j * np.pi * (1 + 0.25 * -1)) <= 1e-12


def test_neck_scales_examples():
    eq = Configuration(np.array([1.0, -1.0, 2j]), np.array([-1, -1, -1]))
    assert np.allclose(neck_scales(eq, 0.4).s, 1)
    pair = Configuration(np.array([1.0, -1.0]), np.array([1, -1]))
    ns = neck_scales(pair, 0.1)
    assert abs(ns.s[1] - 11 / 9) <= 1e-15
    assert np.allclose(vertical_period_limits(ns.s, pair.charges, 0.1), 0, atol=1e-15)
    assert np.allclose(neck_scales(pair, 0.0).s, 1)
    assert abs(ns.lambda_sq_t_target - 4 / abs(ns.c0) ** 2) <= 1e-15


def test_neck_scales_errors():
    pair = Configuration(np.array([1.0, -1.0]), np.array([1, -1]))
    with pytest.raises(ValueError):
        neck_scales(pair, 1.0)
    with pytest.raises(ValueError):
        neck_scales(pair, 0.1, epsilon_disk=1.5)
    # on the real axis c0(e) = 1/e - 1/(1 - e) - 1/(1 + e) changes sign in (0.3, 0.45)
    line = Configuration(np.array([0.0, 1.0, -1.0]), np.array([1, 1, -1]))
    e = brentq(lambda e: 1 / e - 1 / (1 - e) - 1 / (1 + e), 0.3, 0.45, xtol=1e-16)
    with pytest.raises(DegenerateBasepointError):
        neck_scales(line, 0.0, epsilon_disk=e)


def test_horizontal_period_limits_vanish_when_balanced(two_point):
    assert np.max(np.abs(horizontal_period_limits(two_point))) <= 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_zero_count_law_property(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng, int(rng.integers(2, 8)))
    zeros = dh0_zeros(cfg)
    if cfg.total_charge != 0:
        assert zeros.size == cfg.n - 1
    else:
        assert zeros.size <= cfg.n - 2


def test_balanced_neutral_configuration_has_zero_at_infinity():
    from parking_garage import random_search
    from parking_garage.limit import dh0_order_at_infinity, dh0_zero_count

    sols = random_search(4, (1, 1, -1, -1), 60)
    assert sols
    cfg = sols[0].config
    assert abs(np.sum(cfg.charges * cfg.points)) <= 1e-10
    assert dh0_order_at_infinity(cfg) >= 1
    assert dh0_zero_count(cfg) == cfg.n - 2
    forms = LimitForms(cfg, t=0.2)
    assert abs(forms.residue_sum_away_from_end() - 2) <= 1e-12


def test_zero_count_on_sphere_generic():
    from parking_garage.limit import dh0_order_at_infinity, dh0_zero_count

    cfg = Configuration(np.array([1.0, -0.5 + 0.2j, 0.3j, 2.0]), np.array([1, -1, 1, -1]))
    assert dh0_order_at_infinity(cfg) == 0 and dh0_zero_count(cfg) == 2
    scherk = Configuration(np.array([1.0, -1.0, 0.5j]), np.array([-1, -1, 1]))
    assert dh0_order_at_infinity(scherk) == -1 and dh0_zero_count(scherk) == 2
