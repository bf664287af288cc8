"""Wave-based primal-dual lot-sizing, exact for concave ordering costs.

A wave ``W`` starts at ``H[n-1]`` and decreases.  Demand point ``t`` holds
budget ``d_t * max(0, H[t] - W)`` while unserved, so an unserved point pays
``d_t * max(0, H[s] - c - W)`` toward an order at ``s <= t`` with unit cost
``c``.  Unserved points always form a prefix of the horizon.
"""

from dataclasses import dataclass

from .concave import tangent_lines
from .instances import InstanceError, LotSizingInstance, linear_parts
from .solution import DEMAND_REACHED, ORDER_TIGHT, TANGENT_TIGHT, LSSolution, TraceLog
from .tangent import first_tight_grouped


@dataclass(frozen=True)
class Order:
    period: int
    f: object
    c: object


def classical_orders(inst):
    out = []
    for s, phi in enumerate(inst.costs):
        parts = linear_parts(phi)
        if parts is None:
            raise InstanceError(f"period {s} cost is not fixed plus linear")
        out.append(Order(s, *parts))
    return out


def expanded_orders(inst):
    """One order per support line of every period's cost, period-major."""
    return [Order(s, f, c) for s, phi in enumerate(inst.costs) for f, c in tangent_lines(phi)]


def postprocess(inst, open_orders, slope, freeze, serve):
    """Close an order when a point also pays toward an earlier open order.

    ``open_orders`` are keys sorted ascending by (period, tiebreak);
    ``slope[o]`` is the order's unit cost and ``freeze[t]`` the wave
    position where point ``t`` stopped.  A point contributes to order ``o``
    at period ``s`` iff ``-freeze[t] >= slope[o] - H[s]``.  Returns the
    surviving keys and updates ``serve`` (point -> key) in place.
    """
    n = inst.n
    # suffix max of -freeze over demand points
    best_after = [None] * (n + 1)
    for t in range(n - 1, -1, -1):
        cur = best_after[t + 1]
        if inst.d[t] > 0:
            x = -freeze[t]
            cur = x if cur is None or x > cur else cur
        best_after[t] = cur
    kept = []
    best_key = None
    owner = None
    redirect = {}
    for o, s in open_orders:
        key = slope[o] - inst.H[s]
        M = best_after[s]
        if best_key is not None and M is not None and M >= key and M >= best_key:
            redirect[o] = owner
            continue
        kept.append(o)
        if best_key is None or key < best_key:
            best_key, owner = key, o
    for t, o in enumerate(serve):
        while o in redirect:
            o = redirect[o]
        serve[t] = o
    return kept


def solve_explicit_lspd(inst, orders, trace=True):
    """Explicit wave simulation over a finite list of fixed-plus-linear orders."""
    n = inst.n
    d, H = inst.d, inst.H
    log = TraceLog(enabled=trace, decreasing=True)
    zero = 0 * H[-1]
    r = max((t for t in range(n) if d[t] > 0), default=-1)
    freeze = [None] * n
    serve = [None] * n
    A = [zero] * len(orders)
    W = H[-1]
    opened = []
    while r >= 0:
        # D[s] = unserved demand in [s, r]
        D = [zero] * (r + 2)
        for t in range(r, -1, -1):
            D[t] = D[t + 1] + d[t]
        best = None
        for o, od in enumerate(orders):
            s = od.period
            if s > r or D[s] == 0:
                continue
            Ws = H[s] - od.c - (od.f - A[o]) / D[s]
            if Ws > W:
                Ws = W
            key = (-Ws, s, o)
            if best is None or key < best:
                best = key
        negW, s, o = best
        W = -negW
        opened.append(o)
        log.add(W, ORDER_TIGHT, order=o, period=s, f=orders[o].f, c=orders[o].c)
        for t in range(s, r + 1):
            if d[t] > 0:
                freeze[t] = W
                serve[t] = o
        # frozen block [s, r] pays a fixed amount to orders before s
        block = D[s]
        for q, oq in enumerate(orders):
            if oq.period < s:
                gap = H[oq.period] - oq.c - W
                if gap > 0:
                    A[q] += block * gap
        r = max((t for t in range(s) if d[t] > 0), default=-1)
    slope = {o: orders[o].c for o in opened}
    keys = sorted((orders[o].period, o) for o in opened)
    kept = postprocess(inst, [(o, s) for s, o in keys], slope, freeze, serve)
    serve_period = [orders[o].period if o is not None else None for o in serve]
    v = [d[t] * (H[t] - freeze[t]) if d[t] > 0 else zero for t in range(n)]
    primal = inst.cost(serve_period)
    used = sorted({orders[o].period for o in serve if o is not None})
    lines = {orders[o].period: (orders[o].f, orders[o].c) for o in kept if orders[o].period in used}
    return LSSolution(serve_period, used, lines, v, primal, sum(v, zero), None, W, log), [orders[o] for o in kept]


def solve_classical_lspd(inst, trace=True):
    """Wave algorithm on fixed-plus-linear ordering costs; exact."""
    sol, _ = solve_explicit_lspd(inst, classical_orders(inst), trace=trace)
    return sol


def solve_expanded_lspd(inst, trace=True):
    """Wave algorithm on the finite support-line expansion of each cost."""
    sol, _ = solve_explicit_lspd(inst, expanded_orders(inst), trace=trace)
    return sol


def compute_tight_positions(inst):
    """Backward stack sweep giving each period's tight wave position.

    Returns ``(W2, tangents)`` where ``W2[s]`` is None for periods whose
    cost never becomes tight.
    """
    n = inst.n
    d, H = inst.d, inst.H
    zero = 0 * H[-1]
    # prefix demand for interval sums
    P = [zero]
    for x in d:
        P.append(P[-1] + x)
    stack = []  # (period, W, tangent); top has the lowest W

    def position(s, depth):
        """Tight position of ``s`` with the top ``depth`` stack entries removed."""
        live = stack[: len(stack) - depth] if depth else stack
        end = live[-1][0] if live else n
        DG = P[end] - P[s]
        if DG == 0:
            return None
        groups = []
        # frozen intervals from the top of the stack downward; entries are
        # stored bottom (largest period) first
        for k in range(len(live) - 1, -1, -1):
            o, Wo, _ = live[k]
            hi = live[k - 1][0] if k > 0 else n
            Dg = P[hi] - P[o]
            b = H[s] - Wo
            if Dg > 0 and b >= 0:
                groups.append((Dg, b))
        Wref = live[-1][1] if live else H[s]
        D, tau, _ = first_tight_grouped(inst.costs[s], DG, H[s] - Wref, groups)
        # tau is the extra per-unit budget beyond the reference position
        return Wref - tau, D

    W2 = [None] * n
    tangents = [None] * n
    for s in range(n - 1, -1, -1):
        while True:
            res = position(s, 0)
            if res is None:
                if not stack:
                    break
                alt = position(s, 1)
                if alt is not None and alt[0] >= stack[-1][1]:
                    stack.pop()
                    continue
                break
            Ws, D = res
            if stack and Ws >= stack[-1][1]:
                stack.pop()
                continue
            stack.append((s, Ws, inst.costs[s].tangent_at(D)))
            break
    for s, Ws, tan in stack:
        W2[s] = Ws
        tangents[s] = tan
    return W2, tangents


def recover_duals(W2, inst):
    """``v_t = d_t (H[t] - W2[sigma(t)])`` with ``sigma(t)`` the latest tight period <= t."""
    zero = 0 * inst.H[-1]
    v = []
    last = None
    for t in range(inst.n):
        if W2[t] is not None:
            last = t
        if inst.d[t] == 0:
            v.append(zero)
            continue
        if last is None:
            raise ValueError(f"no tight period at or before {t}")
        v.append(inst.d[t] * (inst.H[t] - W2[last]))
    return v


def solve_concave_lspd(inst, trace=True):
    """Exact implicit wave algorithm for concave ordering costs; O(n^2)."""
    n = inst.n
    d = inst.d
    zero = 0 * inst.H[-1]
    log = TraceLog(enabled=trace, decreasing=True)
    W2, tangents = compute_tight_positions(inst)
    if trace:
        events = [(inst.H[t], 0, t) for t in range(n) if d[t] > 0]
        events += [(W2[s], 1, s) for s in range(n) if W2[s] is not None]
        for W, kind, s in sorted(events, key=lambda e: (-e[0], e[1], e[2])):
            if kind == 0:
                log.add(W, DEMAND_REACHED, period=s)
            else:
                tan = tangents[s]
                log.add(W, TANGENT_TIGHT, period=s, f=tan.f, s=tan.s, p=tan.p)
    freeze = [None] * n
    serve = [None] * n
    last = None
    for t in range(n):
        if W2[t] is not None:
            last = t
        if d[t] > 0:
            freeze[t] = W2[last]
            serve[t] = last
    opened = [s for s in range(n) if W2[s] is not None]
    slope = {s: tangents[s].s for s in opened}
    kept = postprocess(inst, [(s, s) for s in opened], slope, freeze, serve)
    v = recover_duals(W2, inst)
    primal = inst.cost(serve)
    used = sorted({s for s in serve if s is not None})
    lines = {s: (tangents[s].f, tangents[s].s) for s in kept if s in used}
    wave_end = min((W2[s] for s in opened), default=inst.H[-1])
    return LSSolution(serve, used, lines, v, primal, sum(v, zero), W2, wave_end, log)
