"""Statistical primitives: paired t-test, Pearson r, Kendall tau-b.

Implemented from first principles on top of a regularized incomplete beta
evaluated by continued fraction (modified Lentz), so the package carries no
numeric dependency. The test suite cross-checks every routine against an
independent reference implementation.
"""

from __future__ import annotations

import math

from .errors import InputError

_BETA_EPS = 1e-15
_BETA_TINY = 1e-300
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise InputError(f"incomplete beta failed to converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise InputError("beta parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise InputError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the representation that converges fast for the given x.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided p-value P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise InputError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_t_test(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Two-sided paired t-test on related samples.

    t = mean(d) / (sd(d) / sqrt(n)) over differences d = xs - ys, df = n - 1.
    Degenerate zero-variance differences: (0, 1) when the mean difference is
    also zero, (+-inf, 0) otherwise.
    """
    n = len(xs)
    if n != len(ys):
        raise InputError(f"sample length mismatch: {n} vs {len(ys)}")
    if n < 2:
        raise InputError("paired t-test needs at least 2 pairs")
    d = [float(x) - float(y) for x, y in zip(xs, ys)]
    mean_d = math.fsum(d) / n
    var_d = math.fsum((v - mean_d) ** 2 for v in d) / (n - 1)
    if var_d == 0.0:
        if mean_d == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean_d), 0.0
    t = mean_d / math.sqrt(var_d / n)
    return t, student_t_sf_two_sided(t, n - 1)


def pearson(xs: list[float], ys: list[float]) -> float:
    """Pearson product-moment correlation."""
    n = len(xs)
    if n != len(ys):
        raise InputError(f"sample length mismatch: {n} vs {len(ys)}")
    if n < 2:
        raise InputError("pearson needs at least 2 observations")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise InputError("correlation undefined for constant input")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def kendall_tau_b(xs: list[float], ys: list[float]) -> float:
    """Kendall tau-b with tie correction.

    (C - D) / sqrt((C + D + Tx)(C + D + Ty)) over all pairs, where Tx / Ty
    count pairs tied only in x / only in y; pairs tied in both count nowhere.
    """
    n = len(xs)
    if n != len(ys):
        raise InputError(f"sample length mismatch: {n} vs {len(ys)}")
    if n < 2:
        raise InputError("kendall tau-b needs at least 2 observations")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    denom_x = concordant + discordant + ties_x
    denom_y = concordant + discordant + ties_y
    if denom_x == 0 or denom_y == 0:
        raise InputError("tau-b undefined: all pairs tied in one vector")
    return (concordant - discordant) / math.sqrt(denom_x * denom_y)
