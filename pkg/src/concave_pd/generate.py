"""Seeded random instance generation.

Facility-location connection costs are L1 distances between random grid
points, so they are metric by construction.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import os
import random

from .concave import AffineFixed, FixedCharge, PiecewiseLinearMin, Power
from .instances import FacilityInstance, InstanceError, JrpInstance, LotSizingInstance
from .numeric import FLOAT, RATIONAL

DEFAULT_SEED = 0
SEED_ENV = "CONCAVE_PD_SEED"
EXACT_FAMILIES = ("fixed_charge", "affine_fixed", "pwl_min")
ALL_FAMILIES = EXACT_FAMILIES + ("power",)


def default_seed():
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


@dataclass
class GeneratorSpec:
    kind: str
    m: int = 0
    n: int = 1
    K: int = 1
    seed: int = field(default_factory=default_seed)
    families: tuple = EXACT_FAMILIES
    max_pieces: int = 3
    demand_range: tuple = (1, 5)
    grid: int = 10
    cost_range: tuple = (0, 20)
    holding_range: tuple = (0, 3)
    backend: str = RATIONAL

    def validate(self):
        if self.kind not in ("facility_location", "lot_sizing", "jrp"):
            raise InstanceError(f"unknown kind {self.kind!r}")
        if self.kind == "facility_location" and (self.m < 1 or self.n < 1):
            raise InstanceError("facility instances need m >= 1 and n >= 1")
        if self.n < 1 or self.K < 1:
            raise InstanceError("sizes must be positive")
        if self.backend == RATIONAL and "power" in self.families:
            raise InstanceError("power costs need the float backend")
        unknown = set(self.families) - set(ALL_FAMILIES)
        if unknown or not self.families:
            raise InstanceError(f"bad cost families {sorted(unknown)}")
        if self.max_pieces < 1:
            raise InstanceError("max_pieces must be positive")


def _num(x, backend):
    return float(x) if backend == FLOAT else Fraction(x)


def random_pwl(rng, pieces, cost_range=(0, 20), backend=RATIONAL):
    """Piecewise-linear concave cost with exactly ``pieces`` pieces."""
    lo, hi = cost_range
    slopes = sorted(rng.sample(range(0, max(hi, pieces) + 1), pieces), reverse=True)
    f = Fraction(rng.randint(lo, hi))
    x = Fraction(0)
    out = [(f, Fraction(slopes[0]))]
    for a, b in zip(slopes, slopes[1:]):
        x += Fraction(rng.randint(1, 8), rng.choice((1, 2)))
        f = f + (a - b) * x
        out.append((f, Fraction(b)))
    return PiecewiseLinearMin(tuple((_num(f, backend), _num(s, backend)) for f, s in out))


def random_cost(rng, families, max_pieces=3, cost_range=(0, 20), backend=RATIONAL):
    lo, hi = cost_range
    kind = rng.choice(list(families))
    if kind == "fixed_charge":
        return FixedCharge(_num(rng.randint(lo, hi), backend))
    if kind == "affine_fixed":
        return AffineFixed(_num(rng.randint(lo, hi), backend), _num(rng.randint(0, 3), backend))
    if kind == "power":
        return Power(rng.choice((0.3, 0.5, 0.7, 0.9)), float(rng.randint(max(lo, 1), max(hi, 1))))
    return random_pwl(rng, rng.randint(1, max_pieces), cost_range, backend)


def _demand(rng, spec):
    lo, hi = spec.demand_range
    return _num(rng.randint(lo, hi), spec.backend)


def generate_facility(spec):
    rng = random.Random(spec.seed)
    g = spec.grid
    cust = [(rng.randint(0, g), rng.randint(0, g)) for _ in range(spec.m)]
    fac = [(rng.randint(0, g), rng.randint(0, g)) for _ in range(spec.n)]
    c = [[_num(abs(a - x) + abs(b - y), spec.backend) for (x, y) in fac] for (a, b) in cust]
    d = [_demand(rng, spec) for _ in range(spec.m)]
    costs = [random_cost(rng, spec.families, spec.max_pieces, spec.cost_range, spec.backend) for _ in range(spec.n)]
    return FacilityInstance(d, c, costs)


def generate_lot_sizing(spec):
    rng = random.Random(spec.seed)
    lo, hi = spec.demand_range
    d = [_num(rng.randint(0, hi) if rng.random() < 0.15 else rng.randint(lo, hi), spec.backend) for _ in range(spec.n)]
    h = [_num(rng.randint(*spec.holding_range), spec.backend) for _ in range(spec.n - 1)]
    costs = [random_cost(rng, spec.families, spec.max_pieces, spec.cost_range, spec.backend) for _ in range(spec.n)]
    return LotSizingInstance(d, h, costs)


def generate_jrp(spec):
    rng = random.Random(spec.seed)
    lo, hi = spec.demand_range
    f0 = _num(rng.randint(*spec.cost_range), spec.backend)
    d = [[_num(rng.randint(0, hi) if rng.random() < 0.15 else rng.randint(lo, hi), spec.backend) for _ in range(spec.n)] for _ in range(spec.K)]
    h = [[_num(rng.randint(*spec.holding_range), spec.backend) for _ in range(spec.n - 1)] for _ in range(spec.K)]
    costs = [random_cost(rng, spec.families, spec.max_pieces, spec.cost_range, spec.backend) for _ in range(spec.K)]
    return JrpInstance(f0, d, h, costs)


def generate(spec):
    spec.validate()
    if spec.kind == "facility_location":
        return generate_facility(spec)
    if spec.kind == "lot_sizing":
        return generate_lot_sizing(spec)
    return generate_jrp(spec)
