"""Primal-dual facility location with fixed-charge and concave costs.

Both solvers run the same dual ascent.  Unconnected customers raise their
budget ``v_i = t * d_i``; a budget pays ``max(0, v_i - (c_ij + s) d_i)``
toward a facility tangent ``(f, s)``.  Connected customers keep their current
connection cost as budget and switch whenever a cheaper tangent opens.

Events at equal times are handled in the order: customer starts
contributing to a facility, customer reaches an open tangent, tangent
becomes tight.  Within one kind the smallest (facility, touch point,
customer) wins.
"""

from fractions import Fraction

import numpy as np

from .concave import FixedCharge, tangent_lines
from .instances import FacilityInstance, InstanceError
from .numeric import FLOAT, RATIONAL, backend_of, geq, leq
from .solution import (
    CUSTOMER_CONNECTS,
    CUSTOMER_CONTRIBUTES,
    OPEN_FACILITY,
    TANGENT_TIGHT,
    FLSolution,
    TraceLog,
)
from .tangent import first_tight_mixed, first_tight_mixed_array, RateProfile

GAMMA = Fraction(161, 100)


def _gamma(backend):
    return float(GAMMA) if backend == FLOAT else GAMMA


def instance_backend(inst):
    nums = list(inst.d) + [x for row in inst.c for x in row]
    if backend_of(nums) == FLOAT or not all(phi.exact for phi in inst.costs):
        return FLOAT
    for phi in inst.costs:
        for x in phi.to_json().values():
            if isinstance(x, float):
                return FLOAT
    return RATIONAL


def expansion_map(inst):
    """``(facility, (f, s))`` for every support line, facility-major."""
    out = []
    for j, phi in enumerate(inst.costs):
        for line in tangent_lines(phi):
            out.append((j, tuple(line)))
    return out


def expand_pwl_instance(inst):
    """Classical instance with one fixed-charge facility per support line.

    Facility ``(j, p)`` gets opening cost ``f_jp`` and connection costs
    ``c_ij + s_jp``; ordering is facility-major, pieces by decreasing slope.
    """
    try:
        lines = expansion_map(inst)
    except ValueError as exc:
        raise InstanceError(f"cannot expand: {exc}") from None
    c = [[inst.c[i][j] + s for j, (f, s) in lines] for i in range(inst.m)]
    return FacilityInstance.classical([f for _, (f, _s) in lines], c, inst.d)


def _finish(inst, assignment, open_lines, alpha, trace, backend):
    primal = inst.cost([open_lines[a][0] for a in assignment])
    dual = sum(alpha)
    return FLSolution(assignment, open_lines, alpha, primal, dual, dual / _gamma(backend), trace)


def _tight_time(t, f, A, growing):
    """First ``T >= t`` with ``A + sum d (T - c)^+ >= f`` and some ``c <= T``.

    ``growing`` is a list of ``(c, d)`` for unconnected customers.
    """
    if not growing:
        return None
    growing = sorted(growing)
    T = max(t, growing[0][0])
    total = A
    rate = 0
    k = 0
    while k < len(growing) and growing[k][0] <= T:
        total += growing[k][1] * (T - growing[k][0])
        rate += growing[k][1]
        k += 1
    if total >= f:
        return T
    while True:
        nxt = growing[k][0] if k < len(growing) else None
        T_hit = T + (f - total) / rate
        if nxt is None or T_hit <= nxt:
            return T_hit
        total += rate * (nxt - T)
        T = nxt
        while k < len(growing) and growing[k][0] <= T:
            rate += growing[k][1]
            k += 1


def solve_classical_flpd(inst, trace=True):
    """Dual ascent on a fixed-charge instance, simulated event by event."""
    if not inst.is_classical:
        raise InstanceError("classical solver needs fixed-charge costs")
    backend = instance_backend(inst)
    f = inst.fixed_charges
    m, n = inst.m, inst.n
    log = TraceLog(enabled=trace)
    t = 0 * f[0]
    connected = [None] * m
    v = [None] * m
    alpha = [None] * m
    is_open = [False] * n
    open_lines = []
    slot = {}

    def connect(i, j, when):
        connected[i] = slot[j]
        v[i] = inst.c[i][j] * inst.d[i]
        log.add(when, CUSTOMER_CONNECTS, customer=i, facility=j)

    while any(a is None for a in connected):
        best = None
        for i in range(m):
            if connected[i] is not None:
                continue
            for j in range(n):
                if is_open[j]:
                    key = (inst.c[i][j], 2, j, i)
                    if best is None or key < best:
                        best = key
        for j in range(n):
            if is_open[j]:
                continue
            A = 0
            growing = []
            for i in range(m):
                if connected[i] is None:
                    growing.append((inst.c[i][j], inst.d[i]))
                else:
                    A += max(0, v[i] - inst.c[i][j] * inst.d[i])
            T = _tight_time(t, f[j], A, growing)
            if T is not None:
                key = (T, 3, j, -1)
                if best is None or key < best:
                    best = key
        T, kind, j, i = best
        t = max(t, T)
        if kind == 2:
            alpha[i] = t * inst.d[i]
            connect(i, j, t)
            continue
        is_open[j] = True
        slot[j] = len(open_lines)
        open_lines.append((j, (f[j], 0 * f[j])))
        log.add(t, OPEN_FACILITY, facility=j)
        for i in range(m):
            cost = inst.c[i][j] * inst.d[i]
            if connected[i] is None:
                if geq(t * inst.d[i], cost):
                    alpha[i] = t * inst.d[i]
                    connect(i, j, t)
            elif v[i] > cost and not leq(v[i], cost):
                connect(i, j, t)
    return _finish(inst, list(connected), open_lines, alpha, log, backend)


def solve_expanded_flpd(inst, trace=True):
    """Classical dual ascent on the support-line expansion, mapped back.

    The primal cost is re-evaluated on the original costs, so it can be
    below what the expansion charges for the same assignment.
    """
    if inst.is_classical:
        return solve_classical_flpd(inst, trace=trace)
    lines = expansion_map(inst)
    sol = solve_classical_flpd(expand_pwl_instance(inst), trace=trace)
    sol.open = [lines[j] for j, _ in sol.open]
    sol.primal_cost = inst.cost(sol.facility_of)
    return sol


class ConcaveFLState:
    """Mutable state of the implicit dual ascent over all tangents.

    ``next_event`` answers the three event times; ``apply`` executes one.
    """

    def __init__(self, inst, backend=None, trace=True):
        self.inst = inst
        self.backend = backend or instance_backend(inst)
        if self.backend == FLOAT:
            inst = inst.convert(FLOAT)
            self.inst = inst
        m, n = inst.m, inst.n
        self.m, self.n = m, n
        self.t = 0.0 if self.backend == FLOAT else Fraction(0)
        self.trace = TraceLog(enabled=trace)
        self.unconnected = set(range(m))
        self.v = [None] * m
        self.alpha = [None] * m
        self.conn = [None] * m
        self.open_lines = []
        self.best2 = [None] * m
        self.pairs = sorted((inst.c[i][j], j, i) for i in range(m) for j in range(n))
        self.cursor = 0
        self.started = [set() for _ in range(n)]
        self.t1 = [None] * n
        if self.backend == FLOAT:
            self._c = np.asarray(inst.c, dtype=float)
            self._d = np.asarray(inst.d, dtype=float)
        self._advance_pairs(self.t)
        for j in range(n):
            self._recompute(j)

    # contributor bookkeeping

    def _advance_pairs(self, upto):
        touched = set()
        while self.cursor < len(self.pairs) and self.pairs[self.cursor][0] <= upto:
            c, j, i = self.pairs[self.cursor]
            self.cursor += 1
            if i in self.unconnected:
                self.started[j].add(i)
                self.trace.add(c, CUSTOMER_CONTRIBUTES, customer=i, facility=j)
                touched.add(j)
        return touched

    def _members(self, j):
        inst = self.inst
        unc, con = [], []
        for i in sorted(self.started[j]):
            if i in self.unconnected:
                unc.append((i, inst.d[i], (self.t - inst.c[i][j]) * inst.d[i]))
        for i in range(self.m):
            if i not in self.unconnected:
                b = self.v[i] - inst.c[i][j] * inst.d[i]
                if b >= 0:
                    con.append((i, inst.d[i], b))
        return unc, con

    def _recompute(self, j):
        unc, con = self._members(j)
        if not unc:
            self.t1[j] = None
            return
        phi = self.inst.costs[j]
        if self.backend == FLOAT:
            members = unc + con
            d = [x[1] for x in members]
            v = [x[2] for x in members]
            grow = [True] * len(unc) + [False] * len(con)
            D, dt = first_tight_mixed_array(phi, d, v, grow)
        else:
            prof = RateProfile.mixed(
                [x[1] for x in unc + con],
                [x[2] for x in unc + con],
                [True] * len(unc) + [False] * len(con),
            )
            res = first_tight_mixed(phi, prof)
            D, dt = res.p_star, res.t_star
        T = self.t + max(dt, 0 * dt)
        tan = phi.tangent_at(D)
        left = phi.left_tangent_at(D)
        if left.s != tan.s and self._omega(j, left, T, unc, con) >= left.f:
            tan = left
        self.t1[j] = (T, tan)

    def _omega(self, j, tan, T, unc, con):
        total = 0
        for i, d, b in unc:
            total += max(0, b + (T - self.t) * d - tan.s * d)
        for i, d, b in con:
            total += max(0, b - tan.s * d)
        return total

    # events

    def next_event(self):
        """``(t, kind, j, i)`` of the next event, or None when all are connected.

        ``kind`` is 1 (tangent tight), 2 (customer reaches an open tangent)
        or 3 (customer starts contributing to facility ``j``).
        """
        if not self.unconnected:
            return None
        best = None
        while self.cursor < len(self.pairs) and self.pairs[self.cursor][2] not in self.unconnected:
            self.cursor += 1
        if self.cursor < len(self.pairs):
            c, j, i = self.pairs[self.cursor]
            best = (c, 0, j, 0, i)
        for i in self.unconnected:
            if self.best2[i] is not None:
                T, j, neg_s, _ = self.best2[i]
                key = (T, 1, j, neg_s, i)
                if best is None or key < best:
                    best = key
        for j in range(self.n):
            if self.t1[j] is not None:
                T, tan = self.t1[j]
                key = (T, 2, j, -tan.s, -1)
                if best is None or key < best:
                    best = key
        if best is None:
            return None
        T, rank, j, _, i = best
        return (T, (3, 2, 1)[rank], j, i)

    def apply(self, event):
        T, kind, j, i = event
        if T > self.t:
            self.t = T
        if kind == 3:
            for jj in self._advance_pairs(self.t):
                self._recompute(jj)
            return
        if kind == 2:
            self._connect(i, self.best2[i][3], self.t, first=True)
            self._refresh(self._facilities_of({i}))
            return
        _, tan = self.t1[j]
        self._open(j, tan)

    def _open(self, j, tan):
        inst = self.inst
        idx = len(self.open_lines)
        self.open_lines.append((j, (tan.f, tan.s)))
        self.trace.add(self.t, TANGENT_TIGHT, facility=j, f=tan.f, s=tan.s, p=tan.p)
        changed = set()
        for i in range(self.m):
            cost = (inst.c[i][j] + tan.s) * inst.d[i]
            if i in self.unconnected:
                if geq(self.t * inst.d[i], cost):
                    self._connect(i, idx, self.t, first=True)
                    changed.add(i)
            elif self.v[i] > cost and not leq(self.v[i], cost):
                self._connect(i, idx, self.t, first=False)
                changed.add(i)
        for i in self.unconnected:
            cand = (inst.c[i][j] + tan.s, j, -tan.s, idx)
            if self.best2[i] is None or cand < self.best2[i]:
                self.best2[i] = cand
        self._refresh(self._facilities_of(changed) | {j})

    def _connect(self, i, idx, when, first):
        j, (f, s) = self.open_lines[idx]
        d = self.inst.d[i]
        if first:
            self.unconnected.discard(i)
            self.alpha[i] = when * d
        self.conn[i] = idx
        self.v[i] = (self.inst.c[i][j] + s) * d
        self.trace.add(when, CUSTOMER_CONNECTS, customer=i, facility=j, f=f, s=s)

    def _facilities_of(self, customers):
        out = set()
        for i in customers:
            for j in range(self.n):
                if self.inst.c[i][j] <= self.t:
                    out.add(j)
        return out

    def _refresh(self, facilities):
        for j in sorted(facilities):
            self._recompute(j)

    def solution(self):
        return _finish(self.inst, list(self.conn), self.open_lines, list(self.alpha), self.trace, self.backend)


def step_event_times(state):
    """``(t*, e*, j*)`` for the next event of an implicit run."""
    ev = state.next_event()
    if ev is None:
        raise ValueError("all customers are connected")
    return ev[0], ev[1], ev[2]


def solve_concave_flpd(inst, backend=None, trace=True):
    """Implicit dual ascent over the tangent expansion of concave costs."""
    state = ConcaveFLState(inst, backend=backend, trace=trace)
    while True:
        ev = state.next_event()
        if ev is None:
            break
        state.apply(ev)
    return state.solution()
