import copy
from fractions import Fraction as Fr
import random

import pytest

from concave_pd import (
    AffineFixed,
    FacilityInstance,
    FixedCharge,
    GeneratorSpec,
    JrpInstance,
    LotSizingInstance,
    PiecewiseLinearMin,
    brute_force_flp,
    brute_force_jrp,
    brute_force_lot_sizing,
    check_certificate,
    dp_lot_sizing,
    generate,
    solve_concave_flpd,
    solve_concave_jrppd,
    solve_concave_lspd,
)
from concave_pd.oracles import LimitExceeded, enumerate_flp, max_excess


def test_flp_examples():
    inst = FacilityInstance([Fr(2), Fr(1)], [[0], [0]], [FixedCharge(Fr(6))])
    assert brute_force_flp(inst)[0] == 6
    inst = FacilityInstance.classical([Fr(1), Fr(3)], [[0, 0]], [1])
    assert brute_force_flp(inst) == (1, [0])


def test_flp_two_enumerators_agree():
    for seed in range(40):
        rng = random.Random(seed)
        inst = generate(GeneratorSpec("facility_location", m=rng.randint(1, 5), n=rng.randint(1, 4), seed=seed))
        cost, assignment = brute_force_flp(inst)
        assert inst.cost(assignment) == cost
        assert enumerate_flp(inst)[0] == cost


def test_flp_limit():
    inst = generate(GeneratorSpec("facility_location", m=5, n=5, seed=0))
    with pytest.raises(LimitExceeded):
        brute_force_flp(inst, limit=100)


def test_lot_sizing_examples():
    inst = LotSizingInstance.classical([Fr(3), Fr(100)], [0, 0], [1, 1], [1])
    assert dp_lot_sizing(inst) == (4, [0])
    phi = PiecewiseLinearMin(((Fr(1), Fr(3)), (Fr(4), Fr(1))))
    one = LotSizingInstance([Fr(5, 2)], [], [phi])
    assert dp_lot_sizing(one)[0] == phi.value(Fr(5, 2))


def test_dp_equals_subset_enumeration():
    for seed in range(60):
        rng = random.Random(seed)
        inst = generate(GeneratorSpec("lot_sizing", n=rng.randint(1, 10), seed=seed))
        assert dp_lot_sizing(inst)[0] == brute_force_lot_sizing(inst)[0]


def _fold(phi, f0):
    if isinstance(phi, FixedCharge):
        return FixedCharge(phi.F + f0)
    if isinstance(phi, AffineFixed):
        return AffineFixed(phi.F + f0, phi.c)
    return PiecewiseLinearMin(tuple((f + f0, s) for f, s in phi.pieces))


def test_single_item_jrp_is_folded_lot_sizing():
    for seed in range(40):
        rng = random.Random(seed)
        inst = generate(GeneratorSpec("jrp", n=rng.randint(1, 6), K=1, seed=seed))
        ls = LotSizingInstance(inst.d[0], inst.h[0], [_fold(inst.costs[0], inst.f0)] * inst.n)
        assert brute_force_jrp(inst)[0] == dp_lot_sizing(ls)[0]


def test_jrp_examples():
    inst = JrpInstance(Fr(3), [[0, 0], [0, 0]], [[1], [1]], [FixedCharge(Fr(1))] * 2)
    assert brute_force_jrp(inst)[0] == 0
    unit = JrpInstance(Fr(1), [[1, 1], [1, 1]], [[0], [0]], [FixedCharge(Fr(1))] * 2)
    assert brute_force_jrp(unit)[0] == 3
    with pytest.raises(LimitExceeded):
        brute_force_jrp(unit, limit=2)


def test_max_excess_matches_line_scan():
    phi = PiecewiseLinearMin(((Fr(0), Fr(4)), (Fr(3), Fr(1)), (Fr(9), Fr(0))))
    rng = random.Random(1)
    for _ in range(100):
        budgets = [(Fr(rng.randint(1, 4)), Fr(rng.randint(-3, 8), 2)) for _ in range(rng.randint(1, 5))]
        scan = max(sum((d * max(0, b - s) for d, b in budgets), Fr(0)) - f for f, s in phi.pieces)
        assert max_excess(phi, budgets) == scan


def test_lot_sizing_certificate_ratio_one():
    for seed in range(20):
        inst = generate(GeneratorSpec("lot_sizing", n=10, seed=seed))
        cert = check_certificate("lot_sizing", inst, solve_concave_lspd(inst), seed=seed)
        assert cert.passed and cert.ratio == 1
        assert cert.to_json()["seed"] == seed


def test_corrupted_dual_fails():
    inst = LotSizingInstance.classical([Fr(3), Fr(100)], [0, 0], [1, 1], [1])
    sol = solve_concave_lspd(inst)
    bad = copy.deepcopy(sol)
    bad.v[1] += 5
    bad.dual_value += 5
    cert = check_certificate("lot_sizing", inst, bad)
    assert not cert.passed
    assert any(v.startswith("dual: order 0") for v in cert.violations)
    out = cert.to_json()
    assert out["pass"] is False and out["violations"]


def test_corrupted_primal_fails():
    inst = LotSizingInstance.classical([Fr(3), Fr(100)], [0, 0], [1, 1], [1])
    bad = copy.deepcopy(solve_concave_lspd(inst))
    bad.serve[1] = None
    assert not check_certificate("lot_sizing", inst, bad).passed


def test_facility_and_jrp_certificates():
    for seed in range(30):
        inst = generate(GeneratorSpec("facility_location", m=6, n=4, seed=seed))
        cert = check_certificate("facility_location", inst, solve_concave_flpd(inst))
        assert cert.passed and cert.ratio <= Fr(161, 100)
        j = generate(GeneratorSpec("jrp", n=3, K=2, seed=seed))
        assert check_certificate("jrp", j, solve_concave_jrppd(j)).passed
