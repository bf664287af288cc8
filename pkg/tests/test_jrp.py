from fractions import Fraction as Fr
import random

import pytest

from concave_pd import (
    FixedCharge,
    GeneratorSpec,
    InstanceError,
    JrpInstance,
    LotSizingInstance,
    Power,
    brute_force_jrp,
    generate,
    instance_from_json,
    item_wave,
    solve_classical_lspd,
    solve_concave_jrppd,
    solve_concave_lspd,
    solve_generalized_jrppd,
)
from concave_pd.jrp import JrpRun
from concave_pd.numeric import FLOAT
from concave_pd.oracles import check_certificate
from concave_pd.solution import JOINT_TIGHT

# a point ends up with no open joint order in its freeze window
MISS_CASE = {
    "type": "jrp", "n": 3, "K": 2, "f0": 11,
    "costs": [{"kind": "fixed_charge", "F": 16}, {"kind": "fixed_charge", "F": 12}],
    "d": [[3, 5, 5], [2, 3, 3]], "h": [[3, 1], [1, 1]],
}


def tiny(seed):
    rng = random.Random(seed)
    return generate(GeneratorSpec("jrp", n=rng.randint(1, 3), K=rng.randint(1, 2), seed=seed, max_pieces=2))


def test_item_wave_examples():
    inst = JrpInstance(Fr(1), [[1, 1, 1]], [[1, 1]], [FixedCharge(Fr(1))])
    assert item_wave(3, 0, inst) == 2
    assert item_wave(Fr(5, 2), 0, inst) == Fr(3, 2)
    assert item_wave(1, 0, inst) == 0


def test_item_wave_hits_prefix_sums_and_is_continuous():
    inst = JrpInstance(Fr(1), [[1] * 5, [1] * 5], [[2, 0, 1, 3], [1, 1, 1, 1]], [FixedCharge(1)] * 2)
    for k in range(2):
        for t in range(1, 6):
            assert item_wave(t, k, inst) == inst.H[k][t - 1]
            eps = Fr(1, 10**6)
            assert abs(item_wave(t - eps, k, inst) - item_wave(t, k, inst)) <= 3 * eps
        # slope 1 below the first period keeps every item moving
        assert item_wave(Fr(1, 2), k, inst) == Fr(-1, 2)


def test_unit_example():
    inst = JrpInstance(Fr(1), [[1, 1], [1, 1]], [[0], [0]], [FixedCharge(Fr(1)), FixedCharge(Fr(1))])
    assert brute_force_jrp(inst)[0] == 3
    for sol in (solve_generalized_jrppd(inst), solve_concave_jrppd(inst)):
        assert sol.primal_cost == 3
        assert sol.serve == [[0, 0], [0, 0]]
        assert sol.joint_orders == [0]
        assert check_certificate("jrp", inst, sol).passed


def test_no_demand():
    inst = JrpInstance(Fr(5), [[0, 0], [0, 0]], [[1], [1]], [FixedCharge(Fr(1))] * 2)
    for sol in (solve_generalized_jrppd(inst), solve_concave_jrppd(inst)):
        assert sol.primal_cost == sol.dual_value == 0
        assert sol.joint_orders == []


def test_single_item_free_joint_is_lot_sizing():
    rng = random.Random(0)
    for _ in range(30):
        n = rng.randint(1, 6)
        f = [Fr(rng.randint(0, 9)) for _ in range(n)]
        d = [Fr(rng.randint(0, 4)) for _ in range(n)]
        h = [Fr(rng.randint(0, 3)) for _ in range(n - 1)]
        fk = f[0]
        inst = JrpInstance(Fr(0), [d], [h], [FixedCharge(fk)])
        ls = LotSizingInstance.classical([fk] * n, [0] * n, d, h)
        want = solve_classical_lspd(ls).primal_cost
        assert solve_generalized_jrppd(inst).primal_cost == want
        assert solve_concave_jrppd(inst).primal_cost == want


def test_free_joint_decomposes_per_item():
    for seed in range(30):
        inst = generate(GeneratorSpec("jrp", n=5, K=3, seed=seed))
        inst = JrpInstance(Fr(0), inst.d, inst.h, inst.costs)
        sol = solve_concave_jrppd(inst)
        for k in range(inst.K):
            ls = solve_concave_lspd(inst.item(k))
            assert inst.item(k).cost(sol.serve[k]) == ls.primal_cost


def test_explicit_limit():
    inst = generate(GeneratorSpec("jrp", n=3, K=2, seed=1, families=("pwl_min",), max_pieces=3))
    with pytest.raises(InstanceError):
        solve_generalized_jrppd(inst, limit=1)
    finv = JrpInstance(1.0, [[1.0]], [[]], [Power(0.5, 1.0)])
    with pytest.raises(InstanceError):
        solve_generalized_jrppd(finv)


def test_explicit_and_implicit_agree():
    for seed in range(60):
        inst = tiny(seed)
        a, b = solve_generalized_jrppd(inst), solve_concave_jrppd(inst)
        assert a.primal_cost == b.primal_cost
        opt = brute_force_jrp(inst)[0]
        for sol in (a, b):
            assert sol.primal_cost <= 4 * opt
            assert sol.dual_value <= opt <= sol.primal_cost
            assert check_certificate("jrp", inst, sol).passed
            for k in range(inst.K):
                for t, s in enumerate(sol.serve[k]):
                    assert (s is None) == (inst.d[k][t] == 0)
                    assert s is None or s <= t


def test_miss_regression():
    inst = instance_from_json(MISS_CASE)
    opt = brute_force_jrp(inst)[0]
    sol = solve_concave_jrppd(inst)
    assert sol.misses == [(2, 0)]
    assert check_certificate("jrp", inst, sol).passed
    assert sol.primal_cost <= 4 * opt
    strict = solve_concave_jrppd(inst, strict=True)
    assert strict.misses == []
    assert check_certificate("jrp", inst, strict).passed


def _kept_joint_invariants(run, kept):
    for k in range(run.K):
        for t in range(run.n):
            paying = [s for s in kept if run.contributes(k, t, s)]
            assert len(paying) <= 1


def test_pruning_invariants():
    for seed in range(80):
        inst = tiny(seed)
        if inst.f0 == 0:
            continue
        for strict in (False, True):
            run = JrpRun(inst, explicit=False, strict=strict).run()
            kept = run.prune_joint()
            _kept_joint_invariants(run, kept)
            _, misses = run.assign(kept)
            if strict:
                # every point has an open joint order in its freeze window
                assert misses == []


def test_first_tight_tuple_maximises_joint_contribution():
    checks = 0
    for seed in range(60):
        inst = tiny(seed)
        if inst.f0 == 0:
            continue
        run = JrpRun(inst, explicit=True)
        while any(r >= 0 for r in run.r):
            run.step()
            for s in range(run.n):
                first = {}
                for ss, k, p in run.tight:
                    if ss == s and k not in first:
                        first[k] = p
                pi = tuple(first.get(k, 0) for k in range(run.K))
                best = max(run.joint_value(s, q, run.w) for q in run.tuples)
                assert run.joint_value(s, pi, run.w) == best
                checks += 1
    assert checks > 100


def test_trace_and_wave_end_visible():
    inst = tiny(7)
    sol = solve_concave_jrppd(inst)
    assert sol.trace.is_monotone()
    assert sol.trace.of_kind(JOINT_TIGHT)
    assert sol.trace.events[-1].t <= inst.n - 1


def test_earliest_pick_is_still_feasible():
    for seed in range(30):
        inst = tiny(seed)
        sol = solve_concave_jrppd(inst, pick="earliest")
        assert check_certificate("jrp", inst, sol).passed


def test_float_backend_with_power():
    for seed in range(10):
        inst = generate(GeneratorSpec("jrp", n=4, K=2, seed=seed, families=("power", "pwl_min"), backend=FLOAT))
        sol = solve_concave_jrppd(inst)
        cert = check_certificate("jrp", inst, sol)
        assert cert.passed, cert.violations
