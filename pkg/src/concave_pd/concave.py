"""Nondecreasing concave cost functions with phi(0) = 0.

Each function answers value, right-derivative and tangent queries in O(1)
(``PiecewiseLinearMin`` in O(pieces)).  A tangent at a touch point ``p`` is the
support line ``f + s * x`` with ``s = phi'(p)`` and ``f = phi(p) - p * s``; the
tangent at 0 is the limit of tangents as ``p -> 0+``.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .numeric import FLOAT, RATIONAL, dump_number, parse_number


class DomainError(ValueError):
    pass


class NoZeroTangent(DomainError):
    """The slope at 0 is infinite, so only tangents at p > 0 exist."""


@dataclass(frozen=True)
class Tangent:
    f: object
    s: object
    p: object

    @property
    def line(self):
        return (self.f, self.s)

    def __call__(self, x):
        return self.f + self.s * x


class ConcaveFunction:
    kind = None

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        if x < 0:
            raise DomainError(f"negative argument {x}")
        if x == 0:
            return 0 * self._zero()
        return self._value(x)

    def right_derivative(self, x):
        if x <= 0:
            raise DomainError(f"right derivative needs x > 0, got {x}")
        return self._slope(x)

    def tangent_at(self, p):
        if p < 0:
            raise DomainError(f"negative touch point {p}")
        if p == 0:
            f, s = self._zero_tangent()
            return Tangent(f, s, p)
        s = self._slope(p)
        return Tangent(self._value(p) - p * s, s, p)

    def left_tangent_at(self, p):
        """Steepest support line through ``(p, phi(p))``; differs only at kinks."""
        return self.tangent_at(p)

    def fd_slope(self, x, delta):
        """Difference quotient over the demand granularity ``delta``."""
        if delta <= 0:
            raise DomainError(f"granularity must be positive, got {delta}")
        hi = math.floor(x + delta)
        lo = math.floor(x)
        return (self.value(hi) - self.value(lo)) / delta

    @property
    def has_zero_tangent(self):
        try:
            self._zero_tangent()
        except NoZeroTangent:
            return False
        return True

    @property
    def exact(self):
        """True when all values are rational given rational arguments."""
        return True

    def values(self, xs):
        """Vectorised float evaluation; ``xs`` must be positive."""
        return np.array([float(self._value(x)) for x in np.asarray(xs).ravel()]).reshape(np.shape(xs))

    def _zero(self):
        return 1

    def to_json(self):
        raise NotImplementedError

    def convert(self, backend):
        """Same function with parameters in the given numeric backend."""
        raise NotImplementedError


@dataclass(frozen=True)
class FixedCharge(ConcaveFunction):
    F: object
    kind = "fixed_charge"

    def __post_init__(self):
        if self.F < 0:
            raise ValueError("fixed charge must be nonnegative")

    def _zero(self):
        return self.F

    def _value(self, x):
        return self.F

    def _slope(self, x):
        return 0 * self.F

    def _zero_tangent(self):
        return self.F, 0 * self.F

    def values(self, xs):
        return np.full(np.shape(xs), float(self.F))

    def to_json(self):
        return {"kind": self.kind, "F": dump_number(self.F)}

    def convert(self, backend):
        return FixedCharge(parse_number(self.F, backend))


@dataclass(frozen=True)
class AffineFixed(ConcaveFunction):
    F: object
    c: object
    kind = "affine_fixed"

    def __post_init__(self):
        if self.F < 0 or self.c < 0:
            raise ValueError("affine cost needs F >= 0 and c >= 0")

    def _zero(self):
        return self.F

    def _value(self, x):
        return self.F + self.c * x

    def _slope(self, x):
        return self.c

    def _zero_tangent(self):
        return self.F, self.c

    def values(self, xs):
        return float(self.F) + float(self.c) * np.asarray(xs, dtype=float)

    def to_json(self):
        return {"kind": self.kind, "F": dump_number(self.F), "c": dump_number(self.c)}

    def convert(self, backend):
        return AffineFixed(parse_number(self.F, backend), parse_number(self.c, backend))


@dataclass(frozen=True)
class Power(ConcaveFunction):
    """``scale * x**a`` with ``0 < a <= 1``; evaluated in floating point."""

    a: object
    scale: object
    kind = "power"

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ValueError("power exponent must lie in (0, 1]")
        if self.scale < 0:
            raise ValueError("power scale must be nonnegative")

    @property
    def exact(self):
        return self.a == 1

    def _zero(self):
        return self.scale if self.a == 1 else 0.0

    def _value(self, x):
        if self.a == 1:
            return self.scale * x
        return float(self.scale) * float(x) ** float(self.a)

    def _slope(self, x):
        if self.a == 1:
            return self.scale
        return float(self.scale) * float(self.a) * float(x) ** (float(self.a) - 1.0)

    def _zero_tangent(self):
        if self.a == 1:
            return 0 * self.scale, self.scale
        raise NoZeroTangent("power cost with exponent < 1 has infinite slope at 0")

    def values(self, xs):
        return float(self.scale) * np.asarray(xs, dtype=float) ** float(self.a)

    def to_json(self):
        return {"kind": self.kind, "a": dump_number(self.a), "scale": dump_number(self.scale)}

    def convert(self, backend):
        return Power(parse_number(self.a, backend), parse_number(self.scale, backend))


@dataclass(frozen=True)
class PiecewiseLinearMin(ConcaveFunction):
    """``min_p (f_p + s_p x)`` for ``x > 0``; pieces as ``(f, s)`` pairs.

    Pieces must be sorted by strictly decreasing slope with every piece
    attaining the minimum on a nondegenerate interval.  Use
    :meth:`from_pieces` to normalise arbitrary input.
    """

    pieces: tuple
    kind = "pwl_min"

    def __post_init__(self):
        pieces = tuple((f, s) for f, s in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise ValueError("need at least one piece")
        for f, s in pieces:
            if f < 0 or s < 0:
                raise ValueError("pieces need f >= 0 and s >= 0")
        for (f1, s1), (f2, s2) in zip(pieces, pieces[1:]):
            if not (s1 > s2 and f1 < f2):
                raise ValueError("pieces must have decreasing slopes and increasing intercepts")
        xs = self.breakpoints
        for x1, x2 in zip(xs, xs[1:]):
            if not x1 < x2:
                raise ValueError("dominated piece in piecewise-linear cost")

    @classmethod
    def from_pieces(cls, pieces):
        """Sort, drop dominated pieces and build the function."""
        best = {}
        for f, s in pieces:
            if s not in best or f < best[s]:
                best[s] = f
        hull = []
        for s, f in sorted(best.items(), key=lambda kv: -kv[0]):
            while hull:
                f1, s1 = hull[-1]
                if f <= f1:
                    hull.pop()
                    continue
                if len(hull) >= 2:
                    f0, s0 = hull[-2]
                    # last piece never strictly below both neighbours
                    if (f1 - f0) * (s1 - s) >= (f - f1) * (s0 - s1):
                        hull.pop()
                        continue
                break
            hull.append((f, s))
        return cls(tuple(hull))

    @property
    def breakpoints(self):
        """Points where consecutive pieces cross."""
        return [(f2 - f1) / (s1 - s2) for (f1, s1), (f2, s2) in zip(self.pieces, self.pieces[1:])]

    def _zero(self):
        return self.pieces[0][0]

    def _active(self, x):
        best = None
        for f, s in self.pieces:
            val = f + s * x
            # ties resolved toward the flatter piece (right derivative)
            if best is None or val <= best[0]:
                best = (val, f, s)
        return best

    def _value(self, x):
        return self._active(x)[0]

    def _slope(self, x):
        return self._active(x)[2]

    def _zero_tangent(self):
        return self.pieces[0]

    def tangent_at(self, p):
        if p < 0:
            raise DomainError(f"negative touch point {p}")
        if p == 0:
            f, s = self.pieces[0]
            return Tangent(f, s, p)
        _, f, s = self._active(p)
        return Tangent(f, s, p)

    def left_tangent_at(self, p):
        if p <= 0:
            return self.tangent_at(p)
        best = None
        for f, s in self.pieces:
            val = f + s * p
            if best is None or val < best[0]:
                best = (val, f, s)
        return Tangent(best[1], best[2], p)

    def values(self, xs):
        xs = np.asarray(xs, dtype=float)
        out = np.full(xs.shape, np.inf)
        for f, s in self.pieces:
            out = np.minimum(out, float(f) + float(s) * xs)
        return out

    def to_json(self):
        return {"kind": self.kind, "pieces": [[dump_number(f), dump_number(s)] for f, s in self.pieces]}

    def convert(self, backend):
        return PiecewiseLinearMin(tuple((parse_number(f, backend), parse_number(s, backend)) for f, s in self.pieces))


def from_json(obj, backend=RATIONAL):
    kind = obj.get("kind")
    num = lambda key: parse_number(obj[key], backend)
    if kind == "fixed_charge":
        return FixedCharge(num("F"))
    if kind == "affine_fixed":
        return AffineFixed(num("F"), num("c"))
    if kind == "power":
        a = parse_number(obj["a"], backend)
        scale = parse_number(obj["scale"], backend)
        return Power(a, scale)
    if kind == "pwl_min":
        pieces = [(parse_number(f, backend), parse_number(s, backend)) for f, s in obj["pieces"]]
        return PiecewiseLinearMin(tuple(pieces))
    raise ValueError(f"unknown cost kind {kind!r}")


def granularity(demands):
    """``1 / prod(denominators)`` of rational demands."""
    den = 1
    for d in demands:
        den *= Fraction(d).denominator
    return Fraction(1, den)


def tangent_lines(phi):
    """Finite list of distinct support lines for piecewise-linear-like costs."""
    if isinstance(phi, PiecewiseLinearMin):
        return list(phi.pieces)
    if isinstance(phi, FixedCharge):
        return [(phi.F, 0 * phi.F)]
    if isinstance(phi, AffineFixed):
        return [(phi.F, phi.c)]
    if isinstance(phi, Power) and phi.a == 1:
        return [(0 * phi.scale, phi.scale)]
    raise DomainError(f"{phi.kind} has infinitely many tangents")
