"""Ground-truth solvers and weak-duality certificate checks.

Nothing here calls the primal-dual solvers or the tangent engine; only the
instance types and cost evaluation are shared.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import random

from .concave import NoZeroTangent
from .instances import FacilityInstance, JrpInstance, LotSizingInstance
from .numeric import is_exact, tol_for

DEFAULT_LIMIT = 10**7
FL_BOUND = Fraction(161, 100)
LS_BOUND = Fraction(1)
JRP_BOUND = Fraction(4)


class LimitExceeded(ValueError):
    pass


# facility location


def brute_force_flp(inst, limit=DEFAULT_LIMIT):
    """Exact optimum over all customer -> facility assignments.

    Uses a DP over (facility, customer subset) which visits every
    assignment implicitly; ``n ** m`` is still the size bound checked.
    Returns ``(cost, assignment)``.
    """
    m, n = inst.m, inst.n
    if n**m > limit:
        raise LimitExceeded(f"{n}^{m} assignments exceed limit {limit}")
    full = (1 << m) - 1
    # cost of serving subset S entirely from facility j
    group = []
    for j in range(n):
        row = [0] * (1 << m)
        load = [0] * (1 << m)
        conn = [0] * (1 << m)
        for S in range(1, 1 << m):
            low = (S & -S).bit_length() - 1
            prev = S & (S - 1)
            load[S] = load[prev] + inst.d[low]
            conn[S] = conn[prev] + inst.c[low][j] * inst.d[low]
            row[S] = inst.costs[j].value(load[S]) + conn[S]
        group.append(row)
    best = [None] * (1 << m)
    best[0] = 0
    layers = []
    for j in range(n):
        new = list(best)
        pick = [0] * (1 << m)
        for S in range(1, 1 << m):
            # split S into U served by j and the rest
            U = S
            while U:
                T = S ^ U
                if best[T] is not None:
                    val = best[T] + group[j][U]
                    if new[S] is None or val < new[S]:
                        new[S] = val
                        pick[S] = U
                U = (U - 1) & S
        best = new
        layers.append(pick)
    assignment = [None] * m
    S = full
    for j in range(n - 1, -1, -1):
        U = layers[j][S]
        for i in range(m):
            if U >> i & 1:
                assignment[i] = j
        S ^= U
    return best[full], assignment


def enumerate_flp(inst, limit=DEFAULT_LIMIT):
    """Plain enumeration of all ``n ** m`` assignments."""
    if inst.n**inst.m > limit:
        raise LimitExceeded("too many assignments")
    best = None
    for a in itertools.product(range(inst.n), repeat=inst.m):
        val = inst.cost(a)
        if best is None or val < best[0]:
            best = (val, list(a))
    return best


# lot-sizing


def dp_lot_sizing(inst):
    """Zero-inventory-ordering DP; returns ``(cost, order periods)``."""
    n = inst.n
    H = inst.H
    zero = 0 * H[-1]
    best = [None] * (n + 1)
    back = [None] * (n + 1)
    best[0] = zero
    for t in range(1, n + 1):
        load = zero
        weighted = zero
        for s in range(t - 1, -1, -1):
            # periods s..t-1 served from s
            load += inst.d[s]
            weighted += inst.d[s] * H[s]
            val = best[s] + weighted - H[s] * load
            if load > 0:
                val += inst.costs[s].value(load)
            if best[t] is None or val < best[t]:
                best[t] = val
                back[t] = s
    orders = []
    t = n
    while t > 0:
        orders.append(back[t])
        t = back[t]
    return best[n], sorted(orders)


def brute_force_lot_sizing(inst, limit=DEFAULT_LIMIT):
    """Enumerate every set of order periods; each serves until the next one."""
    n = inst.n
    if 2**n > limit:
        raise LimitExceeded("too many order subsets")
    best = None
    for mask in range(1 << n):
        serve = []
        cur = None
        for t in range(n):
            if mask >> t & 1:
                cur = t
            serve.append(cur if inst.d[t] > 0 else None)
        if any(s is None and inst.d[t] > 0 for t, s in enumerate(serve)):
            continue
        val = inst.cost(serve)
        if best is None or val < best[0]:
            best = (val, mask)
    return best


# joint replenishment


def brute_force_jrp(inst, limit=DEFAULT_LIMIT):
    """Exact optimum over per-item assignments of demand to order periods."""
    n, K = inst.n, inst.K
    options = []
    for k in range(K):
        for t in range(n):
            if inst.d[k][t] > 0:
                options.append(((k, t), range(t + 1)))
    size = 1
    for _, r in options:
        size *= len(r)
        if size > limit:
            raise LimitExceeded("too many serve patterns")
    best = None
    for pick in itertools.product(*(r for _, r in options)):
        serve = [[None] * n for _ in range(K)]
        for ((k, t), _), s in zip(options, pick):
            serve[k][t] = s
        val = inst.cost(serve)
        if best is None or val < best[0]:
            best = (val, serve)
    if best is None:
        return 0 * inst.f0, [[None] * n for _ in range(K)]
    return best


# certificates


@dataclass
class Certificate:
    kind: str
    primal_cost: object
    dual_value: object
    bound: object
    ratio: object = None
    passed: bool = True
    violations: list = field(default_factory=list)
    seed: int = 0

    def fail(self, msg):
        self.passed = False
        self.violations.append(msg)

    def to_json(self):
        return {
            "pass": self.passed,
            "kind": self.kind,
            "ratio": float(self.ratio) if self.ratio is not None else None,
            "bound": float(self.bound),
            "primal_cost": float(self.primal_cost),
            "dual_value": float(self.dual_value),
            "seed": self.seed,
            "violations": self.violations,
        }


def _leq(a, b):
    return a <= b + tol_for(a, b)


def max_excess(phi, budgets):
    """``max over tangents (f, s) of sum d (b - s)^+ - f``.

    ``budgets`` is a list of ``(d, b)`` per-unit budgets.  For a concave
    ``phi`` the maximum is attained by a prefix of customers sorted by
    ``b`` and equals ``max_J (sum_J d b - phi(sum_J d))``; empty ``J`` gives
    the tangent limit at 0 (excess ``-phi(0+)`` intercept, at most 0).
    """
    items = sorted(((b, d) for d, b in budgets if d > 0), key=lambda x: -x[0])
    try:
        best = -phi.tangent_at(0).f
    except NoZeroTangent:
        # intercepts shrink to 0 as the touch point goes to 0
        best = 0.0
    D = 0
    B = 0
    for b, d in items:
        if b < 0:
            break
        D += d
        B += d * b
        val = B - phi.value(D)
        if val > best:
            best = val
    return best


def _sample_tangents(phi, points, rng, count):
    out = []
    hi = max([float(p) for p in points] + [1.0])
    for _ in range(count):
        x = rng.uniform(1e-6, 2 * hi)
        p = Fraction(x).limit_denominator(1000) if phi.exact else x
        if p <= 0:
            continue
        out.append(phi.tangent_at(p))
    try:
        out.append(phi.tangent_at(0))
    except NoZeroTangent:
        pass
    return out


def _sample_check(cert, phi, budgets, slack, where, rng, count):
    pts = [d for d, _ in budgets]
    for tan in _sample_tangents(phi, [sum(pts)] if pts else [1], rng, count):
        total = sum((d * max(0, b - tan.s) for d, b in budgets), 0)
        if not _leq(total, tan.f + slack):
            cert.fail(f"{where}: tangent at {float(tan.p):.6g} over-tight by {float(total - tan.f):.6g}")
            return


def check_facility(inst, sol, seed=0, samples=20):
    gamma = FL_BOUND if is_exact(sol.dual_value) else float(FL_BOUND)
    cert = Certificate("facility_location", sol.primal_cost, sol.dual_value, FL_BOUND, seed=seed)
    rng = random.Random(seed)
    m, n = inst.m, inst.n
    if len(sol.assignment) != m or any(a is None for a in sol.assignment):
        cert.fail("primal: unassigned customer")
        return cert
    fac = sol.facility_of
    if not _eq(inst.cost(fac), sol.primal_cost):
        cert.fail("primal: reported cost differs from assignment cost")
    v = sol.v
    if any(x is None for x in v) or not _eq(sum(v), sol.dual_value):
        cert.fail("dual: dual value differs from sum of budgets")
        return cert
    for j in range(n):
        budgets = [(inst.d[i], v[i] / (gamma * inst.d[i]) - inst.c[i][j]) for i in range(m)]
        ex = max_excess(inst.costs[j], budgets)
        if not _leq(ex, 0):
            cert.fail(f"dual: facility {j} over-paid by {float(ex):.6g} under budgets/1.61")
        _sample_check(cert, inst.costs[j], budgets, 0, f"facility {j}", rng, samples)
    lower = sol.dual_value / gamma
    cert.ratio = sol.primal_cost / lower if lower else (1 if sol.primal_cost == 0 else float("inf"))
    if not _leq(sol.primal_cost, gamma * lower):
        cert.fail(f"ratio: primal {float(sol.primal_cost):.6g} exceeds 1.61 x bound")
    return cert


def _eq(a, b):
    return abs(a - b) <= tol_for(a, b)


def check_lot_sizing(inst, sol, seed=0, samples=20):
    cert = Certificate("lot_sizing", sol.primal_cost, sol.dual_value, LS_BOUND, seed=seed)
    rng = random.Random(seed)
    n = inst.n
    serve = sol.serve
    for t in range(n):
        if inst.d[t] > 0 and (serve[t] is None or serve[t] > t):
            cert.fail(f"primal: period {t} unserved")
    if not cert.passed:
        return cert
    if not _eq(inst.cost(serve), sol.primal_cost):
        cert.fail("primal: reported cost differs from schedule cost")
    v = sol.v
    if not _eq(sum(v), sol.dual_value):
        cert.fail("dual: dual value differs from sum of budgets")
    for s in range(n):
        budgets = [(inst.d[t], v[t] / inst.d[t] - inst.hold(s, t)) for t in range(s, n) if inst.d[t] > 0]
        ex = max_excess(inst.costs[s], budgets)
        if not _leq(ex, 0):
            cert.fail(f"dual: order {s} over-paid by {float(ex):.6g}")
        _sample_check(cert, inst.costs[s], budgets, 0, f"order {s}", rng, samples)
    cert.ratio = sol.primal_cost / sol.dual_value if sol.dual_value else (1 if sol.primal_cost == 0 else float("inf"))
    if not _leq(sol.primal_cost, sol.dual_value):
        cert.fail("ratio: primal exceeds dual")
    return cert


def check_jrp(inst, sol, seed=0, samples=20):
    cert = Certificate("jrp", sol.primal_cost, sol.dual_value, JRP_BOUND, seed=seed)
    rng = random.Random(seed)
    n, K = inst.n, inst.K
    for k in range(K):
        for t in range(n):
            if inst.d[k][t] > 0 and (sol.serve[k][t] is None or sol.serve[k][t] > t):
                cert.fail(f"primal: demand ({t}, {k}) unserved")
    if not cert.passed:
        return cert
    if not _eq(inst.cost(sol.serve), sol.primal_cost):
        cert.fail("primal: reported cost differs from schedule cost")
    v = sol.v
    total = sum((x for row in v for x in row), 0 * inst.f0)
    if not _eq(total, sol.dual_value):
        cert.fail("dual: dual value differs from sum of budgets")
    for s in range(n):
        joint = 0
        for k in range(K):
            budgets = [
                (inst.d[k][t], v[k][t] / inst.d[k][t] - inst.hold(k, s, t)) for t in range(s, n) if inst.d[k][t] > 0
            ]
            ex = max_excess(inst.costs[k], budgets)
            if ex > 0:
                joint += ex
        if not _leq(joint, inst.f0):
            cert.fail(f"dual: joint order {s} over-paid by {float(joint - inst.f0):.6g}")
    cert.ratio = sol.primal_cost / sol.dual_value if sol.dual_value else (1 if sol.primal_cost == 0 else float("inf"))
    if not _leq(sol.primal_cost, JRP_BOUND * sol.dual_value):
        cert.fail("ratio: primal exceeds 4 x dual")
    return cert


def check_certificate(kind, inst, sol, seed=0, samples=20):
    """Primal feasibility, exact dual feasibility and the ratio bound."""
    if kind in ("facility_location", "fl") or isinstance(inst, FacilityInstance):
        return check_facility(inst, sol, seed, samples)
    if kind in ("lot_sizing", "ls") or isinstance(inst, LotSizingInstance):
        return check_lot_sizing(inst, sol, seed, samples)
    if kind in ("jrp",) or isinstance(inst, JrpInstance):
        return check_jrp(inst, sol, seed, samples)
    raise ValueError(f"unknown kind {kind!r}")
