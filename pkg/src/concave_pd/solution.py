"""Solution containers and the event trace."""

from dataclasses import dataclass, field

from .numeric import dump_number

TANGENT_TIGHT = "TangentTight"
CUSTOMER_CONNECTS = "CustomerConnects"
CUSTOMER_CONTRIBUTES = "CustomerContributesFacility"
OPEN_FACILITY = "OpenFacility"
ORDER_TIGHT = "OrderTight"
JOINT_TIGHT = "JointTight"
DEMAND_REACHED = "DemandReached"


@dataclass(frozen=True)
class Event:
    t: object
    kind: str
    payload: dict

    def to_json(self):
        return {"t": _dump(self.t), "kind": self.kind, "payload": {k: _dump(v) for k, v in self.payload.items()}}


def _dump(x):
    if isinstance(x, (list, tuple)):
        return [_dump(y) for y in x]
    if x is None or isinstance(x, (str, bool)):
        return x
    return dump_number(x)


class TraceLog:
    """Ordered event log.  ``decreasing=True`` for wave-driven solvers."""

    def __init__(self, enabled=True, decreasing=False):
        self.enabled = enabled
        self.decreasing = decreasing
        self.events = []

    def add(self, t, kind, **payload):
        if self.enabled:
            self.events.append(Event(t, kind, payload))

    def of_kind(self, kind):
        return [e for e in self.events if e.kind == kind]

    def is_monotone(self):
        ts = [e.t for e in self.events]
        if self.decreasing:
            return all(a >= b for a, b in zip(ts, ts[1:]))
        return all(a <= b for a, b in zip(ts, ts[1:]))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_json(self):
        return [e.to_json() for e in self.events]


@dataclass
class FLSolution:
    """Facility location result.

    ``assignment[i]`` is an index into ``open``, whose entries are
    ``(facility, (f, s))`` support lines.  ``v`` holds the customer budgets at
    connection time; ``dual_value = sum(v)`` and ``lower_bound`` is the
    weak-duality bound ``dual_value / 1.61``.
    """

    assignment: list
    open: list
    v: list
    primal_cost: object
    dual_value: object
    lower_bound: object
    trace: TraceLog = field(default_factory=TraceLog)

    @property
    def facility_of(self):
        return [self.open[a][0] for a in self.assignment]

    @property
    def ratio(self):
        if self.lower_bound == 0:
            return 1.0 if self.primal_cost == 0 else float("inf")
        return self.primal_cost / self.lower_bound

    def to_json(self, trace=False):
        out = {
            "assignment": self.facility_of,
            "tangent": [[_dump(x) for x in self.open[a][1]] for a in self.assignment],
            "open": [[j, [_dump(x) for x in line]] for j, line in self.open],
            "v": [_dump(x) for x in self.v],
            "primal_cost": _dump(self.primal_cost),
            "dual_value": _dump(self.dual_value),
            "lower_bound": _dump(self.lower_bound),
        }
        if trace:
            out["trace"] = self.trace.to_json()
        return out


@dataclass
class LSSolution:
    """Lot-sizing result; ``serve[t]`` is the order period or None."""

    serve: list
    orders: list
    lines: dict
    v: list
    primal_cost: object
    dual_value: object
    W2: list = None
    wave_end: object = None
    trace: TraceLog = field(default_factory=lambda: TraceLog(decreasing=True))

    @property
    def lower_bound(self):
        return self.dual_value

    @property
    def ratio(self):
        if self.dual_value == 0:
            return 1.0 if self.primal_cost == 0 else float("inf")
        return self.primal_cost / self.dual_value

    def to_json(self, trace=False):
        out = {
            "serve": self.serve,
            "orders": self.orders,
            "lines": {str(s): [_dump(x) for x in line] for s, line in self.lines.items()},
            "v": [_dump(x) for x in self.v],
            "primal_cost": _dump(self.primal_cost),
            "dual_value": _dump(self.dual_value),
        }
        if trace:
            out["trace"] = self.trace.to_json()
        return out


@dataclass
class JrpSolution:
    """JRP result; ``serve[k][t]`` is the order period or None."""

    serve: list
    joint_orders: list
    individual_orders: dict
    v: list
    primal_cost: object
    dual_value: object
    freeze: list = None
    trace: TraceLog = field(default_factory=lambda: TraceLog(decreasing=True))
    # joint periods surviving pruning, and points with no surviving joint
    # order in their freeze window (served from the latest earlier one)
    pruned_joint: list = field(default_factory=list)
    misses: list = field(default_factory=list)

    @property
    def lower_bound(self):
        return self.dual_value

    @property
    def ratio(self):
        if self.dual_value == 0:
            return 1.0 if self.primal_cost == 0 else float("inf")
        return self.primal_cost / self.dual_value

    def to_json(self, trace=False):
        out = {
            "serve": self.serve,
            "joint_orders": self.joint_orders,
            "individual_orders": [
                [s, k, [_dump(x) for x in line]] for (s, k), line in sorted(self.individual_orders.items())
            ],
            "v": [[_dump(x) for x in row] for row in self.v],
            "primal_cost": _dump(self.primal_cost),
            "dual_value": _dump(self.dual_value),
        }
        if trace:
            out["trace"] = self.trace.to_json()
        return out
