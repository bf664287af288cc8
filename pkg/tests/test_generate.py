import pytest

from concave_pd import GeneratorSpec, InstanceError, dumps_instance, generate, is_metric
from concave_pd.numeric import FLOAT


def test_same_seed_same_bytes():
    for kind in ("facility_location", "lot_sizing", "jrp"):
        a = dumps_instance(generate(GeneratorSpec(kind, m=5, n=6, K=3, seed=1)))
        b = dumps_instance(generate(GeneratorSpec(kind, m=5, n=6, K=3, seed=1)))
        assert a == b
    a = generate(GeneratorSpec("lot_sizing", n=8, seed=1))
    b = generate(GeneratorSpec("lot_sizing", n=8, seed=2))
    assert a != b


def test_generated_facility_is_metric():
    for seed in range(50):
        inst = generate(GeneratorSpec("facility_location", m=6, n=5, seed=seed))
        assert is_metric(inst.c)


def test_bad_specs_refused():
    with pytest.raises(InstanceError):
        generate(GeneratorSpec("facility_location", m=0, n=3))
    with pytest.raises(InstanceError):
        generate(GeneratorSpec("lot_sizing", n=0))
    with pytest.raises(InstanceError):
        generate(GeneratorSpec("cubes", n=3))
    with pytest.raises(InstanceError):
        generate(GeneratorSpec("lot_sizing", n=3, families=("power",)))
    with pytest.raises(InstanceError):
        generate(GeneratorSpec("lot_sizing", n=3, families=("zigzag",)))


def test_float_backend_with_power():
    inst = generate(GeneratorSpec("facility_location", m=3, n=3, seed=4, families=("power",), backend=FLOAT))
    assert all(isinstance(x, float) for x in inst.d)
    assert all(phi.kind == "power" for phi in inst.costs)


def test_seed_env_default(monkeypatch):
    monkeypatch.setenv("CONCAVE_PD_SEED", "17")
    assert GeneratorSpec("lot_sizing", n=3).seed == 17
    monkeypatch.delenv("CONCAVE_PD_SEED")
    assert GeneratorSpec("lot_sizing", n=3).seed == 0
