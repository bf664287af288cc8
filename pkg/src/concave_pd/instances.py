"""Problem instances for facility location, lot-sizing and joint replenishment.

Indices are 0-based throughout.  Lot-sizing periods run ``0..n-1`` and
``h[t]`` is the holding cost per unit from period ``t`` to ``t+1``.
"""

from dataclasses import dataclass
import json

from . import concave
from .concave import AffineFixed, FixedCharge, PiecewiseLinearMin, Power
from .numeric import RATIONAL, dump_number, parse_number


class InstanceError(ValueError):
    pass


def _nums(xs, backend):
    return tuple(parse_number(x, backend) for x in xs)


def _check_nonneg(name, xs):
    for x in xs:
        if x < 0:
            raise InstanceError(f"{name} must be nonnegative, got {x}")


def linear_parts(phi):
    """``(F, c)`` when ``phi`` is a fixed charge plus a linear term, else None."""
    if isinstance(phi, FixedCharge):
        return phi.F, 0 * phi.F
    if isinstance(phi, AffineFixed):
        return phi.F, phi.c
    if isinstance(phi, Power) and phi.a == 1:
        return 0 * phi.scale, phi.scale
    if isinstance(phi, PiecewiseLinearMin) and len(phi.pieces) == 1:
        return phi.pieces[0]
    return None


def metric_violations(c, limit=None):
    """Quadruples ``(i, j, l, k)`` with ``c[i][j] > c[i][k] + c[l][k] + c[l][j]``."""
    m = len(c)
    n = len(c[0]) if m else 0
    out = []
    for i in range(m):
        for l in range(m):
            # cheapest detour i -> k -> l
            k = min(range(n), key=lambda k: c[i][k] + c[l][k])
            via = c[i][k] + c[l][k]
            for j in range(n):
                if c[i][j] > via + c[l][j]:
                    out.append((i, j, l, k))
                    if limit and len(out) >= limit:
                        return out
    return out


def is_metric(c):
    return not metric_violations(c, limit=1)


@dataclass(frozen=True)
class FacilityInstance:
    d: tuple
    c: tuple
    costs: tuple

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        object.__setattr__(self, "c", tuple(tuple(row) for row in self.c))
        object.__setattr__(self, "costs", tuple(self.costs))
        if self.m == 0 or self.n == 0:
            raise InstanceError("facility instance needs m >= 1 and n >= 1")
        if any(x <= 0 for x in self.d):
            raise InstanceError("customer demands must be positive")
        if len(self.c) != self.m or any(len(row) != self.n for row in self.c):
            raise InstanceError("connection matrix must be m x n")
        for row in self.c:
            _check_nonneg("connection costs", row)

    @property
    def m(self):
        return len(self.d)

    @property
    def n(self):
        return len(self.costs)

    @property
    def kind(self):
        return "facility_location"

    @property
    def is_classical(self):
        return all(isinstance(phi, FixedCharge) for phi in self.costs)

    @property
    def fixed_charges(self):
        if not self.is_classical:
            raise InstanceError("instance has non fixed-charge costs")
        return tuple(phi.F for phi in self.costs)

    @classmethod
    def classical(cls, f, c, d):
        return cls(d, c, tuple(FixedCharge(x) for x in f))

    def cost(self, assignment):
        """Objective of a customer -> facility assignment."""
        loads = [0] * self.n
        total = 0
        for i, j in enumerate(assignment):
            loads[j] += self.d[i]
            total += self.c[i][j] * self.d[i]
        for j, load in enumerate(loads):
            if load > 0:
                total += self.costs[j].value(load)
        return total

    def to_json(self):
        return {
            "type": self.kind,
            "m": self.m,
            "n": self.n,
            "d": [dump_number(x) for x in self.d],
            "c": [[dump_number(x) for x in row] for row in self.c],
            "costs": [phi.to_json() for phi in self.costs],
        }

    @classmethod
    def from_json(cls, obj, backend=RATIONAL):
        inst = cls(
            _nums(obj["d"], backend),
            tuple(_nums(row, backend) for row in obj["c"]),
            tuple(concave.from_json(x, backend) for x in obj["costs"]),
        )
        if obj.get("m", inst.m) != inst.m or obj.get("n", inst.n) != inst.n:
            raise InstanceError("declared sizes disagree with data")
        return inst

    def convert(self, backend):
        return FacilityInstance.from_json(self.to_json(), backend)


@dataclass(frozen=True)
class LotSizingInstance:
    d: tuple
    h: tuple
    costs: tuple

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        object.__setattr__(self, "h", tuple(self.h))
        object.__setattr__(self, "costs", tuple(self.costs))
        if self.n == 0:
            raise InstanceError("lot-sizing instance needs n >= 1")
        if len(self.d) != self.n or len(self.h) != self.n - 1:
            raise InstanceError("need n demands and n-1 holding costs")
        _check_nonneg("demands", self.d)
        _check_nonneg("holding costs", self.h)
        prefix = [0 * self.n]
        for x in self.h:
            prefix.append(prefix[-1] + x)
        object.__setattr__(self, "_H", tuple(prefix))

    @property
    def n(self):
        return len(self.costs)

    @property
    def kind(self):
        return "lot_sizing"

    @property
    def H(self):
        """``H[t]`` is the holding cost per unit from period 0 to ``t``."""
        return self._H

    def hold(self, s, t):
        return self._H[t] - self._H[s]

    @property
    def is_classical(self):
        return all(linear_parts(phi) is not None for phi in self.costs)

    @classmethod
    def classical(cls, f, c, d, h):
        return cls(d, h, tuple(AffineFixed(a, b) for a, b in zip(f, c)))

    def cost(self, serve):
        """Objective of a period -> order period map (None for zero demand)."""
        loads = [0] * self.n
        total = 0
        for t, s in enumerate(serve):
            if self.d[t] == 0:
                continue
            if s is None or s > t:
                raise InstanceError(f"period {t} not served from an earlier order")
            loads[s] += self.d[t]
            total += self.hold(s, t) * self.d[t]
        for s, load in enumerate(loads):
            if load > 0:
                total += self.costs[s].value(load)
        return total

    def to_json(self):
        return {
            "type": self.kind,
            "n": self.n,
            "d": [dump_number(x) for x in self.d],
            "h": [dump_number(x) for x in self.h],
            "costs": [phi.to_json() for phi in self.costs],
        }

    @classmethod
    def from_json(cls, obj, backend=RATIONAL):
        inst = cls(
            _nums(obj["d"], backend),
            _nums(obj["h"], backend),
            tuple(concave.from_json(x, backend) for x in obj["costs"]),
        )
        if obj.get("n", inst.n) != inst.n:
            raise InstanceError("declared size disagrees with data")
        return inst

    def convert(self, backend):
        return LotSizingInstance.from_json(self.to_json(), backend)


@dataclass(frozen=True)
class JrpInstance:
    f0: object
    d: tuple
    h: tuple
    costs: tuple

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(tuple(row) for row in self.d))
        object.__setattr__(self, "h", tuple(tuple(row) for row in self.h))
        object.__setattr__(self, "costs", tuple(self.costs))
        if self.K == 0 or self.n == 0:
            raise InstanceError("JRP instance needs K >= 1 and n >= 1")
        if self.f0 < 0:
            raise InstanceError("joint fixed cost must be nonnegative")
        if len(self.h) != self.K or any(len(row) != self.n - 1 for row in self.h):
            raise InstanceError("holding costs must be K x (n-1)")
        if any(len(row) != self.n for row in self.d):
            raise InstanceError("demands must be K x n")
        for row in self.d:
            _check_nonneg("demands", row)
        for row in self.h:
            _check_nonneg("holding costs", row)
        H = []
        for row in self.h:
            prefix = [0 * self.f0]
            for x in row:
                prefix.append(prefix[-1] + x)
            H.append(tuple(prefix))
        object.__setattr__(self, "_H", tuple(H))

    @property
    def K(self):
        return len(self.costs)

    @property
    def n(self):
        return len(self.d[0]) if self.d else 0

    @property
    def kind(self):
        return "jrp"

    @property
    def H(self):
        return self._H

    def hold(self, k, s, t):
        return self._H[k][t] - self._H[k][s]

    def item(self, k):
        """Lot-sizing instance of item ``k`` alone (joint cost dropped)."""
        return LotSizingInstance(self.d[k], self.h[k], (self.costs[k],) * self.n)

    def cost(self, serve):
        """Objective of ``serve[k][t]`` order periods (None for zero demand)."""
        joint = set()
        total = 0
        for k in range(self.K):
            loads = [0] * self.n
            for t, s in enumerate(serve[k]):
                if self.d[k][t] == 0:
                    continue
                if s is None or s > t:
                    raise InstanceError(f"demand ({t}, {k}) not served from an earlier order")
                loads[s] += self.d[k][t]
                total += self.hold(k, s, t) * self.d[k][t]
            for s, load in enumerate(loads):
                if load > 0:
                    total += self.costs[k].value(load)
                    joint.add(s)
        return total + self.f0 * len(joint)

    def to_json(self):
        return {
            "type": self.kind,
            "n": self.n,
            "K": self.K,
            "f0": dump_number(self.f0),
            "costs": [phi.to_json() for phi in self.costs],
            "d": [[dump_number(x) for x in row] for row in self.d],
            "h": [[dump_number(x) for x in row] for row in self.h],
        }

    @classmethod
    def from_json(cls, obj, backend=RATIONAL):
        inst = cls(
            parse_number(obj["f0"], backend),
            tuple(_nums(row, backend) for row in obj["d"]),
            tuple(_nums(row, backend) for row in obj["h"]),
            tuple(concave.from_json(x, backend) for x in obj["costs"]),
        )
        if obj.get("n", inst.n) != inst.n or obj.get("K", inst.K) != inst.K:
            raise InstanceError("declared sizes disagree with data")
        return inst

    def convert(self, backend):
        return JrpInstance.from_json(self.to_json(), backend)


_KINDS = {
    "facility_location": FacilityInstance,
    "lot_sizing": LotSizingInstance,
    "jrp": JrpInstance,
}


def instance_from_json(obj, backend=RATIONAL):
    try:
        cls = _KINDS[obj["type"]]
    except KeyError:
        raise InstanceError(f"unknown instance type {obj.get('type')!r}") from None
    return cls.from_json(obj, backend)


def load_instance(path, backend=RATIONAL):
    with open(path) as fh:
        return instance_from_json(json.load(fh), backend)


def dumps_instance(inst):
    return json.dumps(inst.to_json(), sort_keys=True, separators=(",", ":"))
