"""Primal-dual joint replenishment (4-approximation).

A master wave ``w`` runs over periods (0-based, starting at ``n-1``) and
drives one item wave per item, ``X^k(w) = H^k[floor w] + h^k_floor(w) *
frac(w)``; below period 0 every item wave moves with slope 1.  Unserved
demand ``(t, k)`` holds budget ``d * max(0, H^k[t] - X^k)``.

Two modes share the wave machinery:

* explicit: every support line of every item cost is an individual order
  and every tuple of lines a joint order (exponential, tiny instances);
* implicit: per (period, item) only the first support line to become
  tight is kept, found with the tangent engine, and one joint order per
  period collects the contributions of those lines.
"""

from fractions import Fraction
import itertools
import math

from .concave import tangent_lines
from .instances import InstanceError, JrpInstance
from .solution import JOINT_TIGHT, ORDER_TIGHT, JrpSolution, TraceLog
from .tangent import first_tight_grouped

EXPLICIT_LIMIT = 10**5


def item_wave(W, k, inst):
    """Item-``k`` wave at master position ``W`` (1-based, as periods ``1..n``)."""
    return _X(inst, k, W - 1)


def _X(inst, k, w):
    """0-based item wave."""
    H = inst.H[k]
    if w < 0:
        return w
    i = math.floor(w)
    if i >= inst.n - 1:
        return H[inst.n - 1] + (w - (inst.n - 1))
    return H[i] + inst.h[k][i] * (w - i)


def _largest_w_at_most(inst, k, X, w_hi):
    """Largest ``w <= w_hi`` with ``X^k(w) <= X``."""
    if _X(inst, k, w_hi) <= X:
        return w_hi
    H = inst.H[k]
    i = min(math.floor(w_hi), inst.n - 1)
    if i == w_hi:
        i -= 1
    while i >= 0:
        if H[i] <= X:
            h = inst.h[k][i]
            # H[i] <= X < X(i+1) so the slope is positive
            return i + (X - H[i]) / h
        i -= 1
    return X


def _smallest_w_reaching(inst, k, X):
    """Smallest ``w`` with ``X^k(w) >= X``."""
    H = inst.H[k]
    if X <= 0:
        return X
    for i in range(1, inst.n):
        if H[i] >= X:
            return i - 1 + (X - H[i - 1]) / inst.h[k][i - 1]
    return inst.n - 1 + (X - H[inst.n - 1])


def _first_crossing(fn, w_cur, bps, target):
    """Largest ``w <= w_cur`` with ``fn(w) >= target``.

    ``fn`` is nonincreasing in ``w`` and linear between consecutive
    breakpoints and below the smallest one.
    """
    hi = w_cur
    g_hi = fn(hi)
    if g_hi >= target:
        return hi
    pts = sorted({b for b in bps if b < w_cur}, reverse=True)
    for lo in pts:
        g_lo = fn(lo)
        if g_lo >= target:
            return hi - (target - g_hi) * (hi - lo) / (g_lo - g_hi)
        hi, g_hi = lo, g_lo
    lo = hi - 1
    g_lo = fn(lo)
    if g_lo <= g_hi:
        return None
    return hi - (target - g_hi) / (g_lo - g_hi)


class _Tight:
    __slots__ = ("s", "k", "p", "f", "c", "X", "w")

    def __init__(self, s, k, p, f, c, X, w):
        self.s, self.k, self.p, self.f, self.c, self.X, self.w = s, k, p, f, c, X, w


class JrpRun:
    """State of one wave run; ``explicit`` selects the candidate family."""

    def __init__(self, inst, explicit, trace=True, limit=EXPLICIT_LIMIT, pick="latest", strict=False):
        self.inst = inst
        self.strict = strict
        self.pick = pick
        self.explicit = explicit
        n, K = inst.n, inst.K
        self.n, self.K = n, K
        self.zero = 0 * inst.f0
        if explicit:
            try:
                self.lines = [list(tangent_lines(phi)) for phi in inst.costs]
            except ValueError as exc:
                raise InstanceError(f"explicit mode needs piecewise-linear costs: {exc}") from None
            size = n
            for ls in self.lines:
                size *= len(ls)
            if size > limit:
                raise InstanceError(f"explicit candidate set {size} exceeds limit {limit}")
            self.tuples = list(itertools.product(*[range(len(ls)) for ls in self.lines]))
        self.w = Fraction(n - 1) if not isinstance(inst.f0, float) else float(n - 1)
        self.trace = TraceLog(enabled=trace, decreasing=True)
        self.served = [[None] * n for _ in range(K)]
        self.vstop = [[self.zero] * n for _ in range(K)]
        self.Xstop = [[None] * n for _ in range(K)]
        self.r = [max((t for t in range(n) if inst.d[k][t] > 0), default=-1) for k in range(K)]
        self.tight = {}  # (s, k, p) -> _Tight
        self.first = {}  # (s, k) -> _Tight, implicit mode
        self.open_joint = set()  # (s, tuple) explicit, (s, None) implicit

    # budgets and contributions

    def X(self, k):
        return _X(self.inst, k, self.w)

    def budget(self, k, t, X):
        if self.served[k][t] is not None:
            return self.vstop[k][t]
        d = self.inst.d[k][t]
        return d * max(self.zero, self.inst.H[k][t] - X)

    def individual_contrib(self, s, k, f, c, X):
        inst = self.inst
        total = self.zero
        for t in range(s, self.n):
            d = inst.d[k][t]
            if d > 0:
                total += max(self.zero, self.budget(k, t, X) - (c + inst.hold(k, s, t)) * d)
        return total

    def joint_part(self, rec, X):
        inst = self.inst
        total = self.zero
        for t in range(rec.s, self.n):
            d = inst.d[rec.k][t]
            if d > 0:
                x = self.budget(rec.k, t, X) - (rec.c + inst.hold(rec.k, rec.s, t)) * d - rec.w[t]
                if x > 0:
                    total += x
        return total

    def _unserved_demand(self, k, s):
        return sum((self.inst.d[k][t] for t in range(s, self.r[k] + 1)), self.zero) if s <= self.r[k] else self.zero

    def _make_tight(self, s, k, p, f, c, X):
        inst = self.inst
        w = {}
        for t in range(s, self.n):
            d = inst.d[k][t]
            w[t] = max(self.zero, self.budget(k, t, X) - (c + inst.hold(k, s, t)) * d) if d > 0 else self.zero
        return _Tight(s, k, p, f, c, X, w)

    # event times

    def _individual_events(self):
        inst = self.inst
        out = []
        for k in range(self.K):
            Xc = self.X(k)
            for s in range(self.r[k] + 1):
                Du = self._unserved_demand(k, s)
                if Du == 0:
                    continue
                if self.explicit:
                    for p, (f, c) in enumerate(self.lines[k]):
                        if (s, k, p) in self.tight:
                            continue
                        A = self.zero
                        for t in range(self.r[k] + 1, self.n):
                            d = inst.d[k][t]
                            if d > 0 and self.served[k][t] is not None:
                                A += max(self.zero, self.vstop[k][t] - (c + inst.hold(k, s, t)) * d)
                        Xs = inst.H[k][s] - c - (f - A) / Du
                        if Xs > Xc:
                            Xs = Xc
                        out.append((_largest_w_at_most(inst, k, Xs, self.w), 1, s, k, p, (f, c, Xs)))
                else:
                    if (s, k) in self.first:
                        continue
                    groups = []
                    for t in range(self.r[k] + 1, self.n):
                        d = inst.d[k][t]
                        if d > 0 and t >= s:
                            groups.append((d, self.vstop[k][t] / d - inst.hold(k, s, t)))
                    grow_b = inst.H[k][s] - Xc
                    groups = [g for g in groups if g[1] >= 0]
                    D, tau, _ = first_tight_grouped(inst.costs[k], Du, grow_b, groups)
                    Xs = Xc - tau if tau > 0 else Xc
                    phi = inst.costs[k]
                    tan = phi.tangent_at(D)
                    left = phi.left_tangent_at(D)
                    if left.s != tan.s:
                        if self.individual_contrib(s, k, left.f, left.s, Xs) >= left.f:
                            tan = left
                    out.append((_largest_w_at_most(inst, k, Xs, self.w), 1, s, k, 0, (tan.f, tan.s, Xs)))
        return out

    def _joint_records(self, s, pi):
        if self.explicit:
            return [self.tight[(s, k, pi[k])] for k in range(self.K) if (s, k, pi[k]) in self.tight]
        return [self.first[(s, k)] for k in range(self.K) if (s, k) in self.first]

    def joint_value(self, s, pi, w):
        return sum((self.joint_part(rec, _X(self.inst, rec.k, w)) for rec in self._joint_records(s, pi)), self.zero)

    def _joint_breakpoints(self, recs):
        inst = self.inst
        bps = set(range(0, math.floor(self.w) + 1))
        bps.add(0)
        for rec in recs:
            k = rec.k
            for t in range(rec.s, self.n):
                d = inst.d[k][t]
                if d > 0 and self.served[k][t] is None:
                    for X in (inst.H[k][t], inst.H[k][t] - rec.c - inst.hold(k, rec.s, t) - rec.w[t] / d):
                        bps.add(_largest_w_at_most(inst, k, X, self.w))
        return bps

    def _joint_candidates(self):
        if self.explicit:
            seen = set()
            for s in range(self.n):
                for pi in self.tuples:
                    if (s, pi) in self.open_joint:
                        continue
                    recs = self._joint_records(s, pi)
                    if not recs:
                        continue
                    # tuples agreeing on tight components behave identically
                    sig = (s, tuple(pi[k] if (s, k, pi[k]) in self.tight else None for k in range(self.K)))
                    if sig in seen:
                        continue
                    seen.add(sig)
                    yield s, pi, recs
        else:
            for s in range(self.n):
                if (s, None) in self.open_joint:
                    continue
                recs = self._joint_records(s, None)
                if recs:
                    yield s, None, recs

    def _joint_events(self):
        out = []
        for s, pi, recs in self._joint_candidates():
            if not any(s <= self.r[rec.k] for rec in recs) and self.joint_value(s, pi, self.w) < self.inst.f0:
                continue
            fn = lambda w, s=s, pi=pi: self.joint_value(s, pi, w)
            w_ev = _first_crossing(fn, self.w, self._joint_breakpoints(recs), self.inst.f0)
            if w_ev is not None:
                out.append((w_ev, 0, s, -1, pi if pi is not None else (), None))
        return out

    # execution

    def _serve(self, k, s):
        if s > self.r[k]:
            return
        for t in range(s, self.r[k] + 1):
            if self.inst.d[k][t] > 0 and self.served[k][t] is None:
                X = self.X(k)
                self.vstop[k][t] = self.budget(k, t, X)
                self.Xstop[k][t] = X
                self.served[k][t] = s
        self.r[k] = max((t for t in range(s) if self.inst.d[k][t] > 0), default=-1)

    def _open_joint(self, s, pi):
        key = (s, pi if self.explicit else None)
        self.open_joint.add(key)
        self.trace.add(self.w, JOINT_TIGHT, period=s)
        for rec in self._joint_records(s, pi):
            self._serve(rec.k, s)

    def step(self):
        events = self._individual_events() + self._joint_events()
        if not events:
            raise RuntimeError("wave stalled with unserved demand")
        # largest w first, joint before individual, then smallest (s, k)
        best = min(events, key=lambda e: (-e[0], e[1], e[2], e[3], e[4]))
        w_ev, kind, s, k, p, extra = best
        if w_ev < self.w:
            self.w = w_ev
        if kind == 0:
            self._open_joint(s, p if self.explicit else None)
            return
        f, c, _ = extra
        rec = self._make_tight(s, k, p, f, c, self.X(k))
        self.trace.add(self.w, ORDER_TIGHT, period=s, item=k, f=f, c=c)
        if self.explicit:
            self.tight[(s, k, p)] = rec
            for pi in self.tuples:
                if pi[k] == p and self.joint_value(s, pi, self.w) >= self.inst.f0:
                    self.open_joint.add((s, pi))
                    self._serve(k, s)
                    break
        else:
            self.first[(s, k)] = rec
            if (s, None) in self.open_joint or self.joint_value(s, None, self.w) >= self.inst.f0:
                self.open_joint.add((s, None))
                self._serve(k, s)

    def run(self):
        while any(r >= 0 for r in self.r):
            self.step()
        return self

    # postprocessing

    def _joint_recs(self, s):
        """Tight individual records through which items pay toward open joint ``s``."""
        out = {}
        for key in self.open_joint:
            if key[0] == s:
                for rec in self._joint_records(s, key[1]):
                    out[(rec.k, rec.p)] = rec
        return list(out.values())

    def contributes(self, k, t, s):
        """Point ``(t, k)`` pays a positive amount toward open joint order ``s``."""
        inst = self.inst
        d = inst.d[k][t]
        if d == 0 or t < s:
            return False
        for rec in self._joint_recs(s):
            if rec.k != k:
                continue
            u = self.vstop[k][t] - (rec.c + inst.hold(k, s, t)) * d - rec.w[t]
            if u > 0 if self.strict else self.vstop[k][t] >= (rec.c + inst.hold(k, s, t)) * d:
                return True
        return False

    def prune_joint(self):
        periods = sorted({key[0] for key in self.open_joint})
        kept = []
        for s in periods:
            drop = False
            for k in range(self.K):
                for t in range(s, self.n):
                    if self.contributes(k, t, s) and any(self.contributes(k, t, q) for q in kept):
                        drop = True
                        break
                if drop:
                    break
            if not drop:
                kept.append(s)
        return kept

    def freeze_w(self, k, t):
        return _smallest_w_reaching(self.inst, k, self.Xstop[k][t])

    def assign(self, joint):
        inst = self.inst
        serve = [[None] * self.n for _ in range(self.K)]
        misses = []
        for k in range(self.K):
            for t in range(self.n - 1, -1, -1):
                if inst.d[k][t] == 0 or serve[k][t] is not None:
                    continue
                lo = self.freeze_w(k, t)
                cands = [s for s in joint if lo <= s <= t]
                if cands:
                    s = cands[-1] if self.pick == "latest" else cands[0]
                else:
                    misses.append((t, k))
                    s = max((q for q in joint if q <= t), default=None)
                    if s is None:
                        s = t
                for u in range(s, t + 1):
                    if inst.d[k][u] > 0 and serve[k][u] is None:
                        serve[k][u] = s
        return serve, misses

    def solution(self):
        joint = self.prune_joint()
        serve, misses = self.assign(joint)
        inst = self.inst
        primal = inst.cost(serve)
        used = sorted({serve[k][t] for k in range(self.K) for t in range(self.n) if serve[k][t] is not None})
        indiv = {}
        for k in range(self.K):
            loads = {}
            for t, s in enumerate(serve[k]):
                if s is not None:
                    loads[s] = loads.get(s, self.zero) + inst.d[k][t]
            for s, load in loads.items():
                tan = inst.costs[k].tangent_at(load)
                indiv[(s, k)] = (tan.f, tan.s)
        dual = sum((x for row in self.vstop for x in row), self.zero)
        freeze = [[self.freeze_w(k, t) if self.Xstop[k][t] is not None else None for t in range(self.n)] for k in range(self.K)]
        return JrpSolution(serve, used, indiv, [list(r) for r in self.vstop], primal, dual, freeze, self.trace, joint, misses)


def _merge(inst, parts, trace):
    """Combine single-item solutions of a zero joint-cost instance."""
    zero = 0 * inst.f0
    serve = [p.serve[0] for p in parts]
    v = [p.v[0] for p in parts]
    freeze = [p.freeze[0] for p in parts]
    indiv = {(s, k): line for k, p in enumerate(parts) for (s, _), line in p.individual_orders.items()}
    log = TraceLog(enabled=trace, decreasing=True)
    events = [(e.t, k, i, e) for k, p in enumerate(parts) for i, e in enumerate(p.trace.events)]
    for t, k, _, e in sorted(events, key=lambda x: (-x[0], x[1], x[2])):
        payload = dict(e.payload)
        payload["item"] = k
        log.add(t, e.kind, **payload)
    used = sorted({s for row in serve for s in row if s is not None})
    dual = sum((x for row in v for x in row), zero)
    kept = sorted({q for p in parts for q in p.pruned_joint})
    misses = [(t, k) for k, p in enumerate(parts) for t, _ in p.misses]
    return JrpSolution(serve, used, indiv, v, inst.cost(serve), dual, freeze, log, kept, misses)


def _solve(inst, trace, **kw):
    if inst.f0 == 0 and inst.K > 1:
        # a free joint order decouples the items exactly
        parts = [JrpRun(JrpInstance(inst.f0, [inst.d[k]], [inst.h[k]], [inst.costs[k]]), trace=trace, **kw).run().solution() for k in range(inst.K)]
        return _merge(inst, parts, trace)
    return JrpRun(inst, trace=trace, **kw).run().solution()


def solve_generalized_jrppd(inst, trace=True, limit=EXPLICIT_LIMIT, **options):
    """Explicit run over every support line and line tuple.

    ``options`` go to :class:`JrpRun` (``pick``, ``strict``).
    """
    return _solve(inst, trace, explicit=True, limit=limit, **options)


def solve_concave_jrppd(inst, trace=True, **options):
    """Implicit run keeping only the first tight tangent per (period, item)."""
    return _solve(inst, trace, explicit=False, **options)
