"""Acceptance suite: one PASS/FAIL line per criterion (see the terminal summary)."""

import json
import math
import time

import numpy as np
from click.testing import CliRunner

from conftest import CASES, CERTIFY_SECONDS, certification, record_criterion
from hyamabe import cli
from hyamabe.certify import CERTIFIED, check_trace, soundness_residuals
from hyamabe.dimension import Dimensions, sphere_yamabe
from hyamabe.norms import weighted_lk
from hyamabe.ode import EventKind, IntegrationControls, OdeParams, Trajectory, integrate
from hyamabe.shooting import find_ground_state
from hyamabe.yamabe import compute_q, scaling_upper_bound

REL = 1e-3

# published values
Q1_4D = 61.56239
Q1_5D = 78.99686
TABLES = {
    (2, 2): ([0.22732, 0.09051, 0.04630, 0.02641, 0.01593, 0.00992],
             [60.42277, 59.87433, 59.65783, 59.55268, 59.49515, 59.46143]),
    (2, 3): ([0.46075, 0.22854, 0.12886, 0.07706, 0.04774, 0.02968],
             [78.79217, 78.55030, 78.40924, 78.32559, 78.27483, 78.24226]),
    (3, 2): ([0.36158, 0.07155, 0.02794, 0.01315, 0.00668, 0.00325],
             [77.77070, 76.03779, 75.66151, 75.52397, 75.46201, 75.42872]),
}
STEP_COUNTS = {(2, 2): 126, (2, 3): 152, (3, 2): 132}
THRESHOLDS = {(2, 2): 0.01, (2, 3): 0.03, (3, 2): 1 / 300}

# every ground state computed in this module, for the Rayleigh check
_RAYLEIGH = []


def _q(dims, r):
    res = compute_q(dims, r)
    _RAYLEIGH.append(res.diagnostics["rayleigh_residual"])
    return res


def test_criterion_1_sphere_endpoint_4d():
    t0 = time.perf_counter()
    q = _q(Dimensions(2, 2), 1).q_value
    elapsed = time.perf_counter() - t0
    closed = 12 * math.sqrt(8 * math.pi ** 2 / 3)
    ok = abs(q - Q1_4D) <= 0.062 and abs(q - closed) <= 5e-4 * closed and elapsed < 10
    record_criterion("criterion 1", ok,
                     f"Q_2,2(1) = {q:.6f} (published {Q1_4D}, closed form {closed:.6f}), "
                     f"{elapsed:.2f}s")
    assert ok


def test_criterion_2_sphere_endpoint_5d():
    vals = {nm: _q(Dimensions(*nm), 1).q_value for nm in [(2, 3), (3, 2)]}
    ok = all(abs(v - Q1_5D) <= 0.08 for v in vals.values())
    record_criterion("criterion 2", ok,
                     ", ".join(f"Q_{n},{m}(1) = {v:.6f}" for (n, m), v in vals.items())
                     + f" (published {Q1_5D})")
    assert ok


def _table(nm, label):
    dims = Dimensions(*nm)
    rs, published = TABLES[nm]
    t0 = time.perf_counter()
    got = [_q(dims, r).q_value for r in rs]
    elapsed = time.perf_counter() - t0
    errs = [abs(g - p) / p for g, p in zip(got, published)]
    ok = max(errs) <= REL and elapsed < 120
    record_criterion(label, ok, f"(n,m)={nm}: max relative error {max(errs):.2e} over "
                                f"{len(rs)} rows (tolerance {REL:.0e}), {elapsed:.2f}s")
    return ok


def test_criterion_3_table_22():
    assert _table((2, 2), "criterion 3")


def test_criterion_4_table_23():
    assert _table((2, 3), "criterion 4")


def test_criterion_5_table_32():
    assert _table((3, 2), "criterion 5")


def test_criterion_6_first_steps_22():
    dims = Dimensions(2, 2)
    q0 = 59.40481
    q1 = sphere_yamabe(4)
    s2 = (0.99 * q0 / q1) ** 2
    q_s2 = _q(dims, s2).q_value
    s3 = (0.99 * q0 / q_s2) ** 2 * s2
    ok = abs(q_s2 - 61.55039) <= 0.062 and abs(s3 - 0.83317) <= 5e-4
    record_criterion("criterion 6", ok,
                     f"s2 = {s2:.6f}, Q(s2) = {q_s2:.5f} (published 61.55039), "
                     f"s3 = {s3:.5f} (published 0.83317)")
    assert ok


def test_criterion_7_full_certifications():
    parts, ok = [], True
    for nm in CASES:
        tr = certification(*nm)
        elapsed = CERTIFY_SECONDS[(*nm, 0.99)]
        count_ok = abs(tr.step_count - STEP_COUNTS[nm]) <= 0.1 * STEP_COUNTS[nm]
        this = (tr.verdict == CERTIFIED and check_trace(tr) == CERTIFIED
                and tr.final_s < THRESHOLDS[nm] and count_ok and elapsed < 1800)
        ok &= this
        parts.append(f"{nm}: {tr.verdict}, {tr.step_count} steps (published "
                     f"{STEP_COUNTS[nm]}), s_final = {tr.final_s:.5f}, {elapsed:.1f}s")
    strict = certification(2, 2, 0.999)
    elapsed = CERTIFY_SECONDS[(2, 2, 0.999)]
    mono = strict.verdict == CERTIFIED and strict.step_count > certification(2, 2).step_count
    ok &= mono
    parts.append(f"(2, 2) mu=0.999: {strict.verdict}, {strict.step_count} steps, {elapsed:.1f}s")
    record_criterion("criterion 7", ok, "; ".join(parts))
    assert ok


def _property_suite():
    results = {}
    rng = np.random.default_rng(20240601)

    # (a), (b) random shots
    energy_ok, min_ok = True, True
    controls = IntegrationControls(t_max=30.0, check_energy=False)
    for _ in range(100):
        lam = rng.uniform(-1.0, 4.0)
        alpha = rng.uniform(1e-3, 4.0)
        n = int(rng.integers(2, 4))
        q = float(rng.choice([3.0, 7 / 3]))
        traj = integrate(OdeParams(lam, n, q), alpha, controls)
        e = traj.energy_trace
        slack = 100 * np.maximum(controls.abs_tol, controls.rel_tol * np.abs(e[:-1]))
        energy_ok &= bool(np.all(np.diff(e) <= slack))
        if lam <= 0:
            min_ok &= not any(ev.phi > 0 for ev in traj.events_of(EventKind.LOCAL_MIN))
    results["a"], results["b"] = energy_ok, min_ok

    # (c) scaling inequality on 25-point sweeps
    scaling_ok = True
    for nm in CASES:
        dims = Dimensions(*nm)
        rs = np.geomspace(THRESHOLDS[nm], 1.0, 25)
        qs = [_q(dims, float(r)).q_value for r in rs]
        for r0, r1, q0, q1 in zip(rs, rs[1:], qs, qs[1:]):
            scaling_ok &= q1 <= scaling_upper_bound(q0, r0, r1, dims) * (1 + 1e-6)
    results["c"] = scaling_ok

    # (d) p-norm ordering on N-solution pairs
    params = OdeParams(-3 / 32, 2, 7 / 3)
    gs = find_ground_state(params)
    shots = [integrate(params, a) for a in gs.alpha * np.geomspace(1.02, 5.0, 20)]
    order_ok = all(s.crossed_zero for s in shots)
    for s1, s2 in zip(shots[::2], shots[1::2]):
        order_ok &= s1.zero_crossing > s2.zero_crossing
        order_ok &= s2.accumulator[-1] >= s1.accumulator[-1]
    results["d"] = order_ok

    # (e) phi = 1 closed forms
    t = np.linspace(0.0, 4.0, 41)
    one = Trajectory.from_samples(t, np.ones_like(t), np.zeros_like(t))
    e2 = weighted_lk(one, 3.0, 2) / (2 * math.pi * (math.cosh(4.0) - 1)) - 1
    e3 = weighted_lk(one, 3.0, 3) / (4 * math.pi * (math.sinh(8.0) / 4 - 2.0)) - 1
    results["e"] = max(abs(e2), abs(e3)) < 1e-12

    # (f) step soundness on every trace step
    results["f"] = all(max(soundness_residuals(certification(*nm))) < 1e-12 for nm in CASES)

    # (g) Rayleigh identity on every ground state solved in this module
    results["g"] = bool(_RAYLEIGH) and max(abs(x) for x in _RAYLEIGH) < 1e-6
    return results


def test_criterion_8_property_suite():
    res = _property_suite()
    ok = all(res.values())
    detail = ", ".join(f"({k}) {'ok' if v else 'FAIL'}" for k, v in sorted(res.items()))
    record_criterion("criterion 8", ok, f"{detail}; {len(_RAYLEIGH)} ground states checked "
                                        f"for the Rayleigh identity")
    assert ok


def test_criterion_9_figure_data(tmp_path):
    runner = CliRunner()
    expected = {
        "-0.5": ("0.5,0.9,1.2,1.9,3", {0.5: False, 0.9: False, 1.2: True, 1.9: True, 3.0: True}),
        "10": ("0.3,2.5,2.8", {0.3: False, 2.5: False, 2.8: True}),
    }
    ok, parts = True, []
    for s, (family, crossing) in expected.items():
        out = tmp_path / f"s{s}"
        res = runner.invoke(cli.main, ["solve", "--n", "2", "--m", "3", "--s", s, "--family",
                                       family, "--out-dir", str(out)])
        ev = json.loads((out / "events.json").read_text())
        got = {run["alpha"]: any(e["kind"] == "ZeroCrossing" for e in run["events"])
               for run in ev["runs"]}
        ok &= res.exit_code == 0 and got == crossing
        parts.append(f"lambda={ev['lambda']}: crossing "
                     + ",".join(f"{a:g}" for a, c in got.items() if c))
    record_criterion("criterion 9", ok, "; ".join(parts))
    assert ok
