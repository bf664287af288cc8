"""Independent reference computations used only by the tests.

Nothing here calls the tangent engine or the solvers; every quantity is
computed directly from definitions over an explicit finite line set.
"""

from fractions import Fraction
import random

from concave_pd import AffineFixed, FixedCharge, PiecewiseLinearMin, RateProfile


def omega(line, profile, t):
    """Total contribution to support line ``(f, s)`` at time ``t``."""
    _, s = line
    total = 0
    for d, v, r in zip(profile.d, profile.v, profile.delta):
        x = v + t * r - s * d
        if x > 0:
            total += x
    return total


def line_tight_time(line, profile):
    """Earliest ``t >= 0`` where contributions reach ``f``, or None."""
    f, s = line
    terms = [(v - s * d, r) for d, v, r in zip(profile.d, profile.v, profile.delta)]
    if f == 0:
        # a free line goes tight once any single budget reaches it
        times = [max(0, -a / b) if b > 0 else 0 for a, b in terms if a >= 0 or b > 0]
        return min(times) if times else None
    if omega(line, profile, 0) >= f:
        return 0 * f
    kinks = sorted({-a / b for a, b in terms if b > 0 and -a / b > 0})
    lo = 0
    for hi in kinks + [None]:
        # contributions are linear on [lo, hi]
        g_lo = omega(line, profile, lo)
        slope = sum(b for a, b in terms if b > 0 and a + b * lo >= 0 and (hi is None or a + b * hi >= 0))
        if hi is not None and omega(line, profile, hi) < f:
            lo = hi
            continue
        if slope == 0:
            if hi is None:
                return None
            lo = hi
            continue
        return lo + (f - g_lo) / slope
    return None


def explicit_first_tight(lines, profile):
    """``(t*, tight lines)`` by scanning every support line."""
    times = [(line_tight_time(line, profile), line) for line in lines]
    times = [(t, line) for t, line in times if t is not None]
    if not times:
        return None, []
    t_star = min(t for t, _ in times)
    return t_star, [line for t, line in times if t == t_star]


def random_pwl(rng, max_pieces=4):
    k = rng.randint(1, max_pieces)
    slopes = sorted(rng.sample(range(0, 12), k), reverse=True)
    f = Fraction(rng.randint(0, 10))
    if slopes[0] == 0 and f == 0:
        f = Fraction(1)
    x = Fraction(0)
    pieces = [(f, Fraction(slopes[0]))]
    for a, b in zip(slopes, slopes[1:]):
        x += Fraction(rng.randint(1, 6), rng.choice((1, 2, 3)))
        f += (a - b) * x
        pieces.append((f, Fraction(b)))
    return PiecewiseLinearMin(tuple(pieces))


def random_cost(rng, max_pieces=4):
    pick = rng.random()
    if pick < 0.25:
        return FixedCharge(Fraction(rng.randint(1, 12)))
    if pick < 0.35:
        return AffineFixed(Fraction(rng.randint(0, 12)), Fraction(rng.randint(1, 4)))
    return random_pwl(rng, max_pieces)


def lines_of(phi):
    if isinstance(phi, PiecewiseLinearMin):
        return list(phi.pieces)
    if isinstance(phi, FixedCharge):
        return [(phi.F, Fraction(0))]
    return [(phi.F, phi.c)]


def slack_at_start(lines, profile):
    """Every support line strictly short of tight at time 0."""
    for f, s in lines:
        if f == 0:
            if any(v >= s * d for d, v in zip(profile.d, profile.v)):
                return False
        elif omega((f, s), profile, 0) >= f:
            return False
    return True


def random_profile(rng, phi, m, mixed=True):
    """Random rate profile with no support line tight at time 0."""
    lines = lines_of(phi)
    while True:
        d = [Fraction(rng.randint(1, 5), rng.choice((1, 2))) for _ in range(m)]
        v = [Fraction(rng.randint(0, 20), rng.choice((1, 2, 4))) if rng.random() < 0.6 else Fraction(0) for _ in range(m)]
        if mixed:
            grow = [rng.random() < 0.6 for _ in range(m)]
            if not any(grow):
                grow[rng.randrange(m)] = True
            delta = [di if g else Fraction(0) for di, g in zip(d, grow)]
        else:
            delta = [Fraction(rng.randint(0, 6), rng.choice((1, 2))) for _ in range(m)]
            if not any(delta):
                delta[rng.randrange(m)] = Fraction(1)
        prof = RateProfile(d, v, delta)
        if slack_at_start(lines, prof):
            return prof
        # shrink budgets until nothing is over-tight
        for _ in range(6):
            v = [x / 2 for x in v]
            prof = RateProfile(d, v, delta)
            if slack_at_start(lines, prof):
                return prof


def rng_for(seed):
    return random.Random(seed)


def _prefix_order(idx, profile):
    return sorted(idx, key=lambda i: (-(profile.v[i] / profile.d[i]), i))


def contribution_identities(phi, profile, t, p, setting):
    """Check the aggregated-contribution identities at one ``(t, p)``.

    ``setting(phi, profile, members)`` must return an object with
    ``alpha`` and ``beta``.  Returns the number of inequalities checked;
    raises AssertionError on the first failure.

    * For the contributor set ``C`` of tangent ``p`` at time ``t`` (a prefix
      of each class), ``omega_p(t) == D_C * max(0, beta + alpha * t - s_p)``.
    * For every other prefix pair, ``omega_p(t) >=`` the same expression.
    """
    s_p = phi.tangent_at(p).s
    line = (0, s_p)
    total = omega(line, profile, t)
    unc = _prefix_order([i for i in range(profile.m) if profile.delta[i] > 0], profile)
    con = _prefix_order([i for i in range(profile.m) if profile.delta[i] == 0], profile)
    k0 = sum(1 for i in unc if profile.level(i, t) >= s_p)
    l0 = sum(1 for i in con if profile.level(i, t) >= s_p)
    # contributors form prefixes in the sorted orders
    assert all(profile.level(i, t) >= s_p for i in unc[:k0] + con[:l0])
    checks = 0
    for k in range(1, len(unc) + 1):
        for l in range(len(con) + 1):
            members = unc[:k] + con[:l]
            a = setting(phi, profile, members)
            D = sum(profile.d[i] for i in members)
            agg = D * max(0, a.beta + a.alpha * t - s_p)
            if (k, l) == (k0, l0):
                assert total == agg, (t, p, k, l, total, agg)
            assert total >= agg, (t, p, k, l, total, agg)
            checks += 1
    return checks
