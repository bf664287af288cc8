from fractions import Fraction as Fr
import random

import pytest

from concave_pd import (
    AffineFixed,
    FixedCharge,
    GeneratorSpec,
    LotSizingInstance,
    PiecewiseLinearMin,
    compute_tight_positions,
    dp_lot_sizing,
    generate,
    recover_duals,
    solve_classical_lspd,
    solve_concave_lspd,
    solve_expanded_lspd,
)
from concave_pd.instances import linear_parts
from concave_pd.numeric import FLOAT
from concave_pd.oracles import check_certificate
from concave_pd.solution import TANGENT_TIGHT


def test_single_period():
    inst = LotSizingInstance.classical([Fr(5)], [Fr(0)], [Fr(1)], [])
    for sol in (solve_classical_lspd(inst), solve_concave_lspd(inst)):
        assert sol.primal_cost == sol.dual_value == 5
        assert sol.serve == [0]
        assert sol.wave_end == -5
        assert sol.v == [5]


def test_two_periods_hand_simulation():
    inst = LotSizingInstance.classical([Fr(3), Fr(100)], [0, 0], [1, 1], [1])
    for sol in (solve_classical_lspd(inst), solve_concave_lspd(inst)):
        assert sol.serve == [0, 0]
        assert sol.primal_cost == sol.dual_value == 4
        assert sol.v == [Fr(3, 2), Fr(5, 2)]
    W2, _ = compute_tight_positions(inst)
    assert W2[0] == Fr(-3, 2)
    assert recover_duals(W2, inst) == [Fr(3, 2), Fr(5, 2)]


def test_no_demand():
    inst = LotSizingInstance.classical([Fr(3)] * 3, [0] * 3, [0, 0, 0], [1, 1])
    sol = solve_concave_lspd(inst)
    assert sol.primal_cost == sol.dual_value == 0
    assert sol.serve == [None] * 3 and sol.orders == []


def test_zero_demand_period_has_zero_dual():
    inst = LotSizingInstance.classical([Fr(4)] * 3, [0] * 3, [1, 0, 2], [1, 1])
    sol = solve_concave_lspd(inst)
    assert sol.v[1] == 0
    assert sol.primal_cost == sol.dual_value == dp_lot_sizing(inst)[0]


def test_recover_duals_needs_tight_period():
    inst = LotSizingInstance.classical([Fr(1)], [0], [1], [])
    with pytest.raises(ValueError):
        recover_duals([None], inst)


def test_affine_costs_match_classical():
    for seed in range(40):
        inst = generate(GeneratorSpec("lot_sizing", n=10, seed=seed, families=("fixed_charge", "affine_fixed")))
        a, b = solve_concave_lspd(inst), solve_classical_lspd(inst)
        assert a.serve == b.serve
        assert a.primal_cost == b.primal_cost == a.dual_value == b.dual_value


def test_pwl_costs_match_expansion():
    for seed in range(40):
        inst = generate(GeneratorSpec("lot_sizing", n=random.Random(seed).randint(1, 6), seed=seed, families=("pwl_min",)))
        a, b = solve_concave_lspd(inst), solve_expanded_lspd(inst)
        assert a.primal_cost == b.primal_cost == dp_lot_sizing(inst)[0]


def test_exact_on_random_instances():
    for seed in range(60):
        inst = generate(GeneratorSpec("lot_sizing", n=random.Random(seed).randint(1, 25), seed=seed))
        sol = solve_concave_lspd(inst)
        assert sol.primal_cost == sol.dual_value == dp_lot_sizing(inst)[0]
        cert = check_certificate("lot_sizing", inst, sol)
        assert cert.passed and cert.ratio == 1


def _contributes(inst, sol, t, s):
    freeze = sol.W2[max(u for u in range(t + 1) if sol.W2[u] is not None)]
    return -freeze >= sol.lines[s][1] - inst.H[s]


def test_each_point_pays_at_most_one_open_order():
    for seed in range(80):
        inst = generate(GeneratorSpec("lot_sizing", n=12, seed=seed))
        sol = solve_concave_lspd(inst)
        for t in range(inst.n):
            if inst.d[t] > 0:
                paid = [s for s in sol.lines if s <= t and _contributes(inst, sol, t, s)]
                assert len(paid) <= 1, (seed, t, paid)


def test_classical_wave_bound():
    for seed in range(60):
        inst = generate(GeneratorSpec("lot_sizing", n=8, seed=seed, families=("fixed_charge", "affine_fixed")))
        sol = solve_classical_lspd(inst)
        f1, c1 = linear_parts(inst.costs[0])
        assert sol.wave_end >= -c1 - f1


def test_trace_wave_decreases():
    inst = generate(GeneratorSpec("lot_sizing", n=15, seed=3))
    sol = solve_concave_lspd(inst)
    assert sol.trace.is_monotone()
    tight = {e.payload["period"] for e in sol.trace.of_kind(TANGENT_TIGHT)}
    assert set(sol.orders) <= tight


def test_float_backend():
    inst = generate(GeneratorSpec("lot_sizing", n=30, seed=9, families=("power", "pwl_min"), backend=FLOAT))
    sol = solve_concave_lspd(inst)
    assert sol.primal_cost == pytest.approx(sol.dual_value, rel=1e-9)
    assert sol.primal_cost == pytest.approx(dp_lot_sizing(inst)[0], rel=1e-9)
