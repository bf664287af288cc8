"""Number handling shared by the solvers.

Two backends are supported: exact rationals (:class:`fractions.Fraction`) and
64-bit floats.  Every solver is written against plain arithmetic so the same
code path runs on either; only comparisons need to know which one is active.
"""

from fractions import Fraction
import math

RATIONAL = "rational"
FLOAT = "float"
BACKENDS = (RATIONAL, FLOAT)

REL_TOL = 1e-9
ABS_TOL = 1e-12


def parse_number(x, backend=RATIONAL):
    """Parse an int, float or ``"p/q"`` string into the requested backend."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if backend == FLOAT:
        if isinstance(x, str):
            return float(Fraction(x))
        return float(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        # decimal literal, not the binary expansion
        return Fraction(repr(x))
    return Fraction(x)


def convert(x, backend):
    if backend == FLOAT:
        return float(x)
    return parse_number(x, RATIONAL)


def dump_number(x):
    """JSON-friendly form: ints stay ints, rationals become ``"p/q"``."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return float(x)


def is_exact(x):
    return isinstance(x, (int, Fraction))


def tol_for(*xs):
    """Comparison slack: zero when every operand is exact."""
    if all(is_exact(x) for x in xs):
        return 0
    scale = max([1.0] + [abs(float(x)) for x in xs if math.isfinite(float(x))])
    return REL_TOL * scale


def leq(a, b):
    return a <= b + tol_for(a, b)


def geq(a, b):
    return a + tol_for(a, b) >= b


def eq(a, b):
    return abs(a - b) <= tol_for(a, b)


def backend_of(values):
    """``"rational"`` if every value is exact, else ``"float"``."""
    for x in values:
        if not is_exact(x):
            return FLOAT
    return RATIONAL
