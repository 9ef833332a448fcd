import math

import numpy as np
import pytest

from ccbell import bell
from ccbell.bell import (
    AsymptoticFamily,
    asymptotic_phm,
    asymptotic_vsp,
    evaluate,
    fig3_curves,
    lhs,
    noise_threshold,
    rac_inequality,
)
from ccbell.correlations import BoxSummary, CorrelationBox, lhv_membership, mix, summarize
from ccbell.problems import index_problem
from ccbell.quantum import box_from_protocol, index_quantum_protocol, rac_quantum_protocol, werner

from conftest import COS2
from test_correlations import all_deterministic


@pytest.mark.parametrize("p_A, delta, expected", [(0.5, 0.5, 2), (0.25, 0.25, 4), (0.5, 2 / 3, 2), (1.0, 0.5, 1)])
def test_lhs_examples(p_A, delta, expected):
    assert lhs(p_A, delta) == expected


def test_lhs_loglog_value():
    assert math.log2(math.log2(1.5)) == pytest.approx(-0.774, abs=1e-3)


def test_lhs_domain():
    assert lhs(0.0, 0.5) == math.inf
    with pytest.raises(ValueError):
        lhs(0.5, 1.0)
    with pytest.raises(ValueError):
        lhs(0.5, 0.0)


def test_rac_box_not_violated_by_complexity_inequality(rac, rac_box):
    rep = evaluate(summarize(rac_box, rac), rac)
    assert not rep.violated
    for row in rep.per_delta:
        if row["success"] <= 0.75:
            assert row["rhs"] <= 1 and row["lhs"] >= 2
    assert rep.delta_star in bell.DEFAULT_DELTA_GRID
    assert rep.rhs_source == "exact-search"


def test_report_invariants(rac):
    s = BoxSummary(0.5, 0.95)
    for src in (bell.RHS_EXACT, bell.RHS_PUMPED):
        rep = evaluate(s, rac, rhs_source=src)
        assert rep.violated == (rep.lhs < rep.rhs - 1e-12)
        assert max(r["gap"] for r in rep.per_delta) == rep.gap
    d = rep.to_dict()
    assert set(d) >= {"lhs", "rhs", "delta_star", "violated", "rhs_source", "per_delta"}


def test_guessing_level_never_violates(rac):
    for p_B in (0.0, 0.3, 0.5):
        for p_A in (1e-6, 0.5, 1.0):
            assert not evaluate(BoxSummary(p_A, p_B), rac).violated


def test_unattainable_rhs_is_not_a_violation():
    rep = evaluate(BoxSummary(1.0, 1.0), None, [0.5], complexity_fn=lambda s: math.inf)
    assert not rep.violated
    assert rep.per_delta[0]["rhs"] == math.inf


def test_violation_with_large_curve():
    # a synthetic problem needing 10 bits for any advantage: Q = 1 qubit at p_S = 1 violates
    rep = evaluate(BoxSummary(0.5, 1.0), None, complexity_fn=lambda s: 10.0 if s > 0.5 else 0.0)
    assert rep.violated and rep.lhs < rep.rhs


def test_soundness_on_local_boxes(rac):
    rng = np.random.default_rng(2)
    boxes = list(all_deterministic(rac))
    mixtures = [CorrelationBox(rac.x_labels, rac.y_labels, sum(w * b.p for w, b in zip(rng.dirichlet(np.ones(64)), boxes)))
                for _ in range(30)]
    for box in boxes + mixtures:
        assert lhv_membership(box).feasible
        s = summarize(box, rac)
        for src in (bell.RHS_EXACT, bell.RHS_PUMPED):
            assert not evaluate(s, rac, rhs_source=src).violated
        assert rac_inequality(box, rac) <= 0.75 + 1e-9


@pytest.mark.parametrize("Q", range(0, 9))
@pytest.mark.parametrize("C", [0, 1, 2, 3, 4.5, 5, 7.25, 8, 11, 12])
@pytest.mark.parametrize("delta", [0.5, 2 / 3])
def test_quantum_advantage_implication(Q, C, delta):
    fn = lambda s: float(C) if s > 0.5 else 0.0
    rep = evaluate(BoxSummary(2.0**-Q, 1.0), None, [delta], complexity_fn=fn)
    # rigorous form: ceil(Q + loglog) + 1 < C
    assert rep.violated == (math.ceil(Q + bell.loglog(delta) - 1e-12) + 1 < C - 1e-12)
    # lemma: fewer qubits than the bound always yields a violation
    if Q < bell.lemma_bound(1.0, fn, [delta]):
        assert rep.violated


def test_lemma_delta_two_thirds_is_tight_for_integers():
    for C in range(0, 15):
        fn = lambda s, C=C: float(C)
        for Q in range(0, 15):
            rep = evaluate(BoxSummary(2.0**-Q, 1.0), None, [2 / 3], complexity_fn=fn)
            assert rep.violated == (Q < bell.lemma_bound(1.0, fn, [2 / 3]))


# --- RAC inequality --------------------------------------------------------


def test_rac_value(rac_box):
    assert rac_inequality(rac_box) == pytest.approx(COS2, abs=1e-12)
    assert bell.rac_violated(rac_inequality(rac_box))


def test_rac_sign_convention_oracle(rac, rac_box):
    # evaluate both decodings by hand; only one reaches cos^2(pi/8)
    vals = {}
    for parity in (0, 1):
        v = 0.0
        for i, x in enumerate(rac.x_labels):
            for j, y in enumerate(rac.y_labels):
                xy = int(x[1 - y])
                for a in (0, 1):
                    v += rac_box.p[i, j, a, xy ^ a ^ parity] / 8
        vals[parity] = v
        assert rac_inequality(rac_box, parity=parity) == pytest.approx(v, abs=1e-12)
    assert vals[1] == pytest.approx(COS2, abs=1e-12)
    assert vals[0] == pytest.approx(1 - COS2, abs=1e-12)


def test_rac_local_bound(rac):
    assert bell.local_bound(rac, 1) == 0.75
    assert bell.local_bound(rac, 0) == 0.75
    for box in all_deterministic(rac):
        assert rac_inequality(box) <= 0.75


@pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1 / math.sqrt(2), 0.8, 1.0])
def test_rac_werner_value(rac, p):
    box = box_from_protocol(rac_quantum_protocol(), werner(p), rac)
    assert rac_inequality(box) == pytest.approx(p * COS2 + (1 - p) / 2, abs=1e-12)


def test_rac_affine(rac, rac_box):
    other = box_from_protocol(rac_quantum_protocol(), werner(0.2), rac)
    for w in (0.0, 0.25, 0.9):
        m = mix(rac_box, other, w)
        assert rac_inequality(m) == pytest.approx(w * rac_inequality(rac_box) + (1 - w) * rac_inequality(other), abs=1e-12)


# --- noise thresholds ------------------------------------------------------


def test_rac_noise_threshold(rac):
    p = noise_threshold(rac_quantum_protocol(), rac, "rac", tol=1e-9)
    assert p == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_threshold_stable_under_tolerance(rac):
    q = rac_quantum_protocol()
    for tol in (1e-3, 1e-5):
        assert abs(noise_threshold(q, rac, "rac", tol) - noise_threshold(q, rac, "rac", tol / 10)) < tol


def test_threshold_zero_and_none():
    prob = index_problem(2)
    proto = index_quantum_protocol(2)
    assert noise_threshold(proto, prob, "theorem1", complexity_fn=lambda s: 100.0) == 0.0
    assert noise_threshold(proto, prob, "theorem1") is None


def test_threshold_analytic_inversion():
    # p_B(p) = p/2 + 1/2 at p_A = 1/4, against a linear synthetic curve C(s) = K (s - 1/2)
    K = 40.0
    prob = index_problem(2)
    proto = index_quantum_protocol(2)
    grid = [0.5, 0.25, 0.125, 2 / 3, 0.01]
    expected = min(2 * (lhs(0.25, d) + 1e-12) / (K * (1 - d)) for d in grid)
    got = noise_threshold(proto, prob, "theorem1", tol=1e-10, delta_grid=grid, complexity_fn=lambda s: K * (s - 0.5))
    assert got == pytest.approx(expected, abs=1e-8)


def test_threshold_unknown_inequality(rac):
    with pytest.raises(ValueError):
        noise_threshold(rac_quantum_protocol(), rac, "chsh")


# --- asymptotic forms -------------------------------------------------------


def test_vsp_example():
    left, right, v = asymptotic_vsp(10**6, 1.0, 0.01)
    assert right == pytest.approx(100.0, rel=1e-12)
    assert left == pytest.approx(math.log2(1e6) + math.log2(math.log2(100)), abs=1e-12)
    assert left == pytest.approx(19.93 + 2.73, abs=0.01)
    assert v


def test_vsp_guessing_level():
    for n in (10, 10**4, 10**9):
        left, right, v = asymptotic_vsp(n, 0.5, 0.1)
        assert right == 0 and not v


def test_vsp_constant_scales_rhs():
    _, r1, _ = asymptotic_vsp(10**5, 0.9, 0.05, AsymptoticFamily(c=1.0))
    _, r3, _ = asymptotic_vsp(10**5, 0.9, 0.05, AsymptoticFamily(c=3.0))
    assert r3 == pytest.approx(3 * r1, rel=1e-12)


def test_phm_example():
    fam = AsymptoticFamily(family="alphaPHM")
    left, right, v = asymptotic_phm(10**6, 0.5, fam)
    assert left == pytest.approx(19.93, abs=0.01)
    assert right == pytest.approx(1000 / 432, rel=1e-12)
    assert not v
    n_star = bell.phm_crossover(fam)
    assert n_star is not None and n_star > 10**6
    assert asymptotic_phm(n_star, 0.5, fam)[2]


def test_phm_delta_to_one_and_scaling():
    fam = AsymptoticFamily(family="alphaPHM")
    left, right, v = asymptotic_phm(10**8, 1 - 1e-6, fam)
    assert right < 1e-10 and not v
    fam2 = AsymptoticFamily(family="alphaPHM", c_dprime=2.0)
    assert asymptotic_phm(10**7, 0.3, fam2)[1] == pytest.approx(2 * asymptotic_phm(10**7, 0.3, fam)[1], rel=1e-15)


def test_family_validation():
    with pytest.raises(ValueError):
        AsymptoticFamily(c=0)
    with pytest.raises(ValueError):
        AsymptoticFamily(alpha=0.5)
    with pytest.raises(ValueError):
        AsymptoticFamily(family="KV")


def test_crossover_helper():
    assert bell.crossover(lambda n: n >= 5, list(range(10))) == 5
    assert bell.crossover(lambda n: n in (2, 3, 8, 9), list(range(10))) == 8
    assert bell.crossover(lambda n: False, list(range(10))) is None


# --- curves ------------------------------------------------------------------


def test_boundary_curve_shape():
    table = fig3_curves(10**4)
    rows = np.array(table.rows)
    assert np.all(rows[:, 2] <= rows[:, 1] + 1e-12)
    assert np.all(np.diff(rows[:, 1]) >= -1e-12)
    assert np.all(np.diff(rows[:, 2]) >= -1e-9)
    assert rows[0, 0] == 0.5 and rows[0, 1] == 0 and rows[0, 2] == 0


def test_boundary_curves_small_n_and_scaling():
    rows = np.array(fig3_curves(2, p_B_grid=[0.5, 0.7, 1.0]).rows)
    assert np.all(np.isfinite(rows))
    a = np.array(fig3_curves(1000, AsymptoticFamily(c=1.0)).rows)
    b = np.array(fig3_curves(1000, AsymptoticFamily(c=2.5)).rows)
    np.testing.assert_allclose(b[:, 1], 2.5 * a[:, 1], rtol=1e-12)


def test_boundary_against_dense_grid():
    # independent check: brute maximization over a very dense delta grid never beats the optimizer
    deltas = np.geomspace(1e-15, 0.5, 20000)
    for pb in (0.55, 0.6, 0.7, 0.8, 0.95):
        vals = [bell.vsp_bound(10**4, (1 - d) * pb + d / 2) - bell.loglog(d) for d in deltas]
        b = bell.vsp_boundary(10**4, pb)
        assert b >= max(vals) - 1e-6
        assert b <= bell.vsp_bound(10**4, pb) + 1e-12


def test_region_classification():
    table = fig3_curves(10**4)
    c = bell.vsp_bound(10**4, 0.9)
    b = bell.vsp_boundary(10**4, 0.7)
    assert table.classify(0.9, c + 1) == "classical"
    assert table.classify(0.7, b - 1) == "detected"
    assert table.classify(0.7, b + 0.3) == "advantage-undetected"
