"""First-tight-tangent computations for a single concave cost.

Setting: one cost ``phi`` with zero connection costs.  Customer ``i`` has
demand ``d[i] > 0`` and a budget ``v[i] + t * delta[i]`` at time ``t >= 0``.
It contributes ``max(0, budget - s * d[i])`` to the tangent with slope ``s``;
a tangent ``(f, s)`` is tight once its contributions reach ``f``.  The
functions here find which tangent becomes tight first and when, without
enumerating the (possibly infinite) tangent family.

Every candidate set ``C`` of contributing customers maps to a zero-budget
re-timed setting whose first tight tangent touches ``phi`` at
``p = sum(d[C])``; the original first-tight time is the minimum over a
polynomial family of such sets.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .concave import Tangent

MERGE_TOL = 1e-12


class NoGrowth(ValueError):
    """No budget increases, so no tangent ever becomes tight."""


@dataclass(frozen=True)
class RateProfile:
    d: tuple
    v: tuple
    delta: tuple

    def __post_init__(self):
        for name in ("d", "v", "delta"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not (len(self.d) == len(self.v) == len(self.delta)):
            raise ValueError("d, v and delta must have equal length")
        if any(x <= 0 for x in self.d):
            raise ValueError("demands must be positive")
        if any(x < 0 for x in self.v) or any(x < 0 for x in self.delta):
            raise ValueError("budgets and rates must be nonnegative")

    @classmethod
    def mixed(cls, d, v, unconnected):
        """Profile with rate ``d[i]`` for unconnected customers, 0 otherwise."""
        delta = [di if u else 0 * di for di, u in zip(d, unconnected)]
        return cls(d, v, delta)

    @property
    def m(self):
        return len(self.d)

    def level(self, i, t):
        """Per-unit budget ``(v_i + t delta_i) / d_i``."""
        return (self.v[i] + t * self.delta[i]) / self.d[i]

    def is_mixed(self):
        return all(r == 0 or r == di for r, di in zip(self.delta, self.d))


@dataclass(frozen=True)
class TightTangentResult:
    p_star: object
    t_star: object
    tangent: Tangent
    members: tuple = ()


@dataclass(frozen=True)
class AlternateSetting:
    members: tuple
    alpha: object
    beta: object
    p_prime: object
    tau_prime: object
    t_prime: object


@dataclass
class BreakpointSchedule:
    thetas: list
    permutations: list
    family: list = field(default_factory=list)


def contribution(line, budgets, d):
    """Total contribution received by the support line ``(f, s)``."""
    _, s = line
    total = 0
    for b, di in zip(budgets, d):
        x = b - s * di
        if x > 0:
            total += x
    return total


def alternate_setting(phi, profile, members):
    """Zero-budget re-timed setting for the contributor set ``members``."""
    members = tuple(members)
    D = sum(profile.d[i] for i in members)
    rate = sum(profile.delta[i] for i in members)
    V = sum(profile.v[i] for i in members)
    if rate <= 0:
        raise NoGrowth("alternate setting needs a growing member")
    tan = phi.tangent_at(D)
    tau = tan.s + tan.f / D
    alpha = rate / D
    beta = V / D
    return AlternateSetting(members, alpha, beta, D, tau, (tau - beta) / alpha)


def first_tight_zero_budgets(phi, demands):
    """All budgets zero, every listed customer growing at rate ``d_i``."""
    demands = list(demands)
    if not demands:
        raise NoGrowth("no unconnected customers")
    p = sum(demands)
    if p <= 0:
        raise ValueError("demands must be positive")
    tan = phi.tangent_at(p)
    return TightTangentResult(p, tan.s + tan.f / p, tan, tuple(range(len(demands))))


def _ordered(indices, profile):
    # nonincreasing v/d, stable by index
    return sorted(indices, key=lambda i: (-(profile.v[i] / profile.d[i]), i))


def first_tight_mixed(phi, profile):
    """First tight tangent when every rate is 0 or ``d_i``; O(m^2)."""
    if not profile.is_mixed():
        raise ValueError("mixed regime needs rates in {0, d_i}")
    unc = _ordered([i for i in range(profile.m) if profile.delta[i] > 0], profile)
    con = _ordered([i for i in range(profile.m) if profile.delta[i] == 0], profile)
    if not unc:
        raise NoGrowth("no unconnected customers")
    Dc, Vc = [0], [0]
    for i in con:
        Dc.append(Dc[-1] + profile.d[i])
        Vc.append(Vc[-1] + profile.v[i])
    best = None
    Du = Vu = 0
    for k, i in enumerate(unc, start=1):
        Du += profile.d[i]
        Vu += profile.v[i]
        for l in range(len(con) + 1):
            D = Du + Dc[l]
            t = (phi.value(D) - Vu - Vc[l]) / Du
            # ties go to the smallest touch point, then smallest (k, l)
            if best is None or t < best[0] or (t == best[0] and D < best[3]):
                best = (t, k, l, D)
    t, k, l, D = best
    return TightTangentResult(D, t, phi.tangent_at(D), tuple(sorted(unc[:k] + con[:l])))


def first_tight_mixed_array(phi, d, v, growing):
    """Float/numpy version of :func:`first_tight_mixed`.

    Returns ``(p_star, t_star)`` or ``None`` when nothing grows.
    """
    d = np.asarray(d, dtype=float)
    v = np.asarray(v, dtype=float)
    growing = np.asarray(growing, dtype=bool)
    if not growing.any():
        return None
    du, vu = d[growing], v[growing]
    dc, vc = d[~growing], v[~growing]
    ou = np.lexsort((np.arange(len(du)), -(vu / du)))
    oc = np.lexsort((np.arange(len(dc)), -(vc / dc)))
    Du = np.cumsum(du[ou])
    Vu = np.cumsum(vu[ou])
    Dc = np.concatenate(([0.0], np.cumsum(dc[oc])))
    Vc = np.concatenate(([0.0], np.cumsum(vc[oc])))
    D = Du[:, None] + Dc[None, :]
    T = (phi.values(D) - Vu[:, None] - Vc[None, :]) / Du[:, None]
    flat = int(np.argmin(T))
    return float(D.flat[flat]), float(T.flat[flat])


def first_tight_grouped(phi, grow_d, grow_b, groups):
    """Mixed regime where all growing customers share one per-unit budget.

    ``grow_d`` is the total growing demand and ``grow_b`` their common
    per-unit budget; ``groups`` lists ``(demand, per_unit_budget)`` for
    stopped customers, none above ``grow_b``.  Growing customers are tied,
    so only the sets "all growing plus a prefix of stopped groups" matter,
    which makes this O(len(groups)).  Returns ``(p_star, t_star, j)`` with
    ``j`` the number of stopped groups in the minimising set.
    """
    if grow_d <= 0:
        raise NoGrowth("no growing demand")
    order = sorted(range(len(groups)), key=lambda g: (-groups[g][1], g))
    D = grow_d
    V = grow_d * grow_b
    best_t = (phi.value(D) - V) / grow_d
    best = (D, best_t, 0)
    for j, g in enumerate(order, start=1):
        dg, bg = groups[g]
        if bg < 0:
            break
        D += dg
        V += dg * bg
        t = (phi.value(D) - V) / grow_d
        if t < best[1]:
            best = (D, t, j)
    return best


def _crossing(profile, i, j):
    """Positive time where the per-unit budgets of i and j swap order."""
    di, dj = profile.d[i], profile.d[j]
    # (v_i + t r_i) dj = (v_j + t r_j) di
    a = profile.delta[i] * dj - profile.delta[j] * di
    b = profile.v[j] * di - profile.v[i] * dj
    if a == 0:
        return None
    t = b / a
    if t > 0:
        return t
    return None


def _infinity_order(profile):
    return sorted(
        range(profile.m),
        key=lambda i: (-(profile.delta[i] / profile.d[i]), -(profile.v[i] / profile.d[i]), i),
    )


def compute_breakpoints(profile):
    """Times where the order of per-unit budgets changes, with permutations."""
    m = profile.m
    raw = []
    for i in range(m):
        for j in range(i + 1, m):
            t = _crossing(profile, i, j)
            if t is not None:
                raw.append(t)
    raw.sort()
    thetas = []
    for t in raw:
        if thetas:
            last = thetas[-1]
            if t == last:
                continue
            if isinstance(t, float) and abs(t - last) <= MERGE_TOL:
                continue
        thetas.append(t)
    rank = {i: r for r, i in enumerate(_infinity_order(profile))}
    perms = []
    for t in [0] + thetas:
        perms.append(tuple(sorted(range(m), key=lambda i: (-profile.level(i, t), rank[i]))))
    family = []
    seen = set()
    for perm in perms:
        for k in range(m + 1):
            K = frozenset(perm[:k])
            if K not in seen:
                seen.add(K)
                family.append(K)
    return BreakpointSchedule(thetas, perms, family)


def first_tight_general(phi, profile):
    """First tight tangent under arbitrary nonnegative rates; O(m^3)."""
    if not any(r > 0 for r in profile.delta):
        raise NoGrowth("all rates are zero")
    sched = compute_breakpoints(profile)
    best = None
    for K in sched.family:
        rate = sum(profile.delta[i] for i in K)
        if rate <= 0:
            continue
        D = sum(profile.d[i] for i in K)
        V = sum(profile.v[i] for i in K)
        t = (phi.value(D) - V) / rate
        key = tuple(sorted(K))
        # same tie rule as the mixed regime: smallest touch point, then set
        if best is None or (t, D, key) < best:
            best = (t, D, key)
    t, D, key = best
    return TightTangentResult(D, t, phi.tangent_at(D), key)


def leftmost_tangent_point(phi, level):
    """Smallest touch point whose tangent slope is at most ``level``.

    This is the leftmost tangent a customer with per-unit budget ``level``
    contributes to; ``math.inf`` if it contributes to none.  Only defined
    for costs with a finite tangent list or a closed-form slope inverse.
    """
    from .concave import AffineFixed, FixedCharge, PiecewiseLinearMin, Power

    if isinstance(phi, (FixedCharge, AffineFixed)):
        return 0 if phi.tangent_at(0).s <= level else math.inf
    if isinstance(phi, PiecewiseLinearMin):
        if phi.pieces[0][1] <= level:
            return 0
        xs = phi.breakpoints
        for (f, s), x in zip(phi.pieces[1:], xs):
            if s <= level:
                return x
        return math.inf
    if isinstance(phi, Power):
        if phi.a == 1:
            return 0 if phi.scale <= level else math.inf
        if level <= 0:
            return math.inf
        # scale * a * p^(a-1) <= level
        return (float(level) / (float(phi.scale) * float(phi.a))) ** (1.0 / (float(phi.a) - 1.0))
    raise TypeError(f"unsupported cost {phi!r}")
