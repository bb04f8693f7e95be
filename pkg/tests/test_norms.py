import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyamabe.dimension import Dimensions
from hyamabe.norms import (NormBundle, choose_truncation, sinh_weighted_integral, tail_bound,
                           weighted_grad2, weighted_lk)
from hyamabe.ode import IntegrationControls, OdeParams, Trajectory
from hyamabe.shooting import find_ground_state
from hyamabe.yamabe import SolverSettings, compute_q


def constant_one(T):
    t = np.linspace(0.0, T, 41)
    return Trajectory.from_samples(t, np.ones_like(t), np.zeros_like(t))


@pytest.mark.parametrize("T", [0.5, 3.0, 10.0])
@pytest.mark.parametrize("k", [1.0, 2.0, 10 / 3])
def test_constant_closed_form_n2(T, k):
    assert weighted_lk(constant_one(T), k, 2) == pytest.approx(2 * math.pi * (math.cosh(T) - 1),
                                                               rel=1e-12)


@pytest.mark.parametrize("T", [0.5, 3.0, 10.0])
def test_constant_closed_form_n3(T):
    expected = 4 * math.pi * (math.sinh(2 * T) / 4 - T / 2)
    assert weighted_lk(constant_one(T), 4.0, 3) == pytest.approx(expected, rel=1e-12)


def test_constant_has_zero_gradient():
    assert weighted_grad2(constant_one(5.0), 2) == 0.0


def test_linear_probe():
    # int_0^1 t sinh t dt = cosh 1 - sinh 1 = 1/e
    t = np.linspace(0.0, 1.0, 11)
    traj = Trajectory.from_samples(t, t, np.ones_like(t))
    assert weighted_lk(traj, 1.0, 2) == pytest.approx(2 * math.pi / math.e, rel=1e-12)
    # phi' = 1: int_0^1 sinh = cosh 1 - 1
    assert weighted_grad2(traj, 2) == pytest.approx(2 * math.pi * (math.cosh(1) - 1), rel=1e-12)


def test_sech_ground_state_norm():
    # phi = sqrt(2) sech t: int phi^4 sinh = 4/3, so ||f||_4^4 = 8 pi / 3
    _, traj = find_ground_state(OdeParams(0.0, 2, 3.0))
    assert weighted_lk(traj, 4.0, 2) == pytest.approx(8 * math.pi / 3, rel=1e-9)
    # int_0^5 phi^2 sinh = 2 int_0^5 sinh / cosh^2 = 2 (1 - sech 5)
    assert weighted_lk(traj, 2.0, 2, 5.0) == pytest.approx(4 * math.pi * (1 - 1 / math.cosh(5)),
                                                           rel=1e-9)


def test_head_piece_included():
    # integral from 0 vs from t_start: the series head carries the difference
    _, traj = find_ground_state(OdeParams(0.0, 2, 3.0))
    full = weighted_lk(traj, 4.0, 2, 1.0)
    body = 2 * math.pi * sinh_weighted_integral(lambda t: traj.evaluate(t) ** 4, 2, traj.t_start,
                                                1.0, traj.t)
    assert full - body == pytest.approx(2 * math.pi * 4 * traj.t_start ** 2 / 2, rel=1e-6)


@pytest.mark.parametrize("kwargs", [dict(k=0.0), dict(k=-1.0)])
def test_weighted_lk_rejects_bad_power(kwargs):
    with pytest.raises(ValueError):
        weighted_lk(constant_one(1.0), n=2, **kwargs)


def test_weighted_lk_rejects_cut_beyond_end():
    with pytest.raises(ValueError):
        weighted_lk(constant_one(1.0), 2.0, 2, 2.0)


def test_quadrature_refinement():
    params = OdeParams(-0.3, 3, 7 / 3)
    _, traj = find_ground_state(params)
    coarse = weighted_lk(traj, params.p, 3, 20.0, spacing=1e-2)
    fine = weighted_lk(traj, params.p, 3, 20.0, spacing=1e-3)
    assert abs(coarse - fine) / fine < 1e-8


@given(st.floats(1e-6, 0.1), st.sampled_from([(2, 2), (2, 3), (3, 2)]))
def test_tail_bound_scaling(eps, nm):
    dims = Dimensions(*nm)
    p = float(dims.derived.p)
    a = tail_bound(eps, 0.5, dims, 1.0, 60.0)
    b = tail_bound(2 * eps, 0.5, dims, 1.0, 60.0)
    assert b / a == pytest.approx(2 ** (p - 2), rel=1e-12)


def test_tail_bound_value():
    # (2,2): p = 4, V(S^2) = 4 pi, D = 3/2
    dims = Dimensions(2, 2)
    expected = 1e-4 * 2.0 ** 2 * 60.0 / (0.25 ** 0.5 * (4 * math.pi) ** 0.5 * 1.5)
    assert tail_bound(1e-2, 0.25, dims, 2.0, 60.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("arg", ["eps", "r", "lp_upper", "q_upper"])
def test_tail_bound_rejects_nonpositive(arg):
    kw = dict(eps=1e-3, r=0.5, lp_upper=1.0, q_upper=60.0) | {arg: 0.0}
    with pytest.raises(ValueError):
        tail_bound(dims=Dimensions(2, 2), **kw)


def test_tail_bound_dominates_actual_tail():
    dims = Dimensions(2, 3)
    res = compute_q(dims, 0.5)
    _, traj = find_ground_state(OdeParams(res.lam, 2, float(dims.derived.q)))
    t_cut = 6.0
    eps = float(traj.evaluate(t_cut)[0])
    p = res.norms.p
    actual = weighted_lk(traj, p, 2, 12.0) - weighted_lk(traj, p, 2, t_cut)
    bound = tail_bound(eps, 0.5, dims, res.norms.lp * 1.01, res.q_value * 1.01)
    assert 0 < actual <= bound


def test_choose_truncation():
    t = np.linspace(0.0, 40.0, 801)
    mid = Trajectory.from_samples(t, np.exp(-t), -np.exp(-t))
    tc, eps = choose_truncation(mid, mid, mid, 1e-10)
    assert tc == pytest.approx(-math.log(1e-10), abs=0.01)
    assert eps <= 1.0001e-10


def test_truncated_vs_extended_horizon():
    dims = Dimensions(3, 2)
    base = compute_q(dims, 0.2)
    longer = compute_q(dims, 0.2, SolverSettings(controls=IntegrationControls(t_max=80.0)))
    assert longer.q_value == pytest.approx(base.q_value, rel=1e-9)


def test_norm_bundle_lp_power():
    nb = NormBundle(lp=2.0, l2=1.0, grad2=1.0, tail_bound_p=0.0, truncation_t=1.0, p=3.0)
    assert nb.lp_power == 8.0
