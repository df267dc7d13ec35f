"""Double-well potentials, mobilities and their regularizations.

Three potential families are supported:

* ``regular``      F(s) = (s^2 - 1)^2 on all of R,
* ``logarithmic``  F(s) = theta/2 [(1+s)log(1+s) + (1-s)log(1-s)]
                         + theta_c/2 (1 - s^2) on (-1, 1), 0 < theta < theta_c,
* ``regularized``  the logarithmic family with its singular part replaced
  by the quadratic Taylor extension beyond |s| = 1 - eps (second derivative
  clamped at the joints), which lives on all of R.

Every family carries a convexity-defect constant ``c0`` with
F''(s) >= -c0, and the solver's convex/concave splitting is
F = (F + c0 s^2/2) - c0 s^2/2.

Mobilities: ``constant``, generic bounded ``nondegenerate``,
``degenerate`` m(s) = k(s)(1-s^2)^n (extended by zero outside [-1, 1]) and
its ``clamped`` version m_eps, constant outside |s| <= 1 - eps.

`EntropyFunction` integrates G'' = 1/m_eps twice from 0 (composite Simpson
tables in the core interval, exact quadratic tails where m_eps is
constant).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import DomainError, ParameterError

__all__ = [
    "PotentialSpec",
    "MobilitySpec",
    "EntropyFunction",
    "regular_potential",
    "logarithmic_potential",
    "regularize_potential",
    "potential_value",
    "potential_deriv",
    "potential_convex_deriv",
    "potential_concave_deriv",
    "potential_convex_value",
    "potential_concave_value",
    "constant_mobility",
    "degenerate_mobility",
    "nondegenerate_mobility",
    "regularize_mobility",
    "mobility_value",
    "mobility_bounds",
    "entropy_value",
]

_LOG_GUARD = 1e-14


@dataclass(frozen=True)
class PotentialSpec:
    """Immutable description of one double-well potential."""

    kind: str
    theta: float = 0.0
    theta_c: float = 0.0
    c0: float = 0.0
    p: float = 3.0
    eps: float = 0.0
    eps0: float = 0.5
    growth: tuple = (0.0, 0.0, 0.0)  # (C1, C2, C3) metadata for sampling checks
    splitting: str = ""

    @property
    def domain(self):
        """Open admissible interval for the argument."""
        if self.kind == "logarithmic":
            return (-1.0, 1.0)
        return (-math.inf, math.inf)


def regular_potential(c0=4.0):
    """Quartic double well (s^2 - 1)^2 with wells at +-1."""
    return PotentialSpec(
        kind="regular",
        c0=float(c0),
        p=3.0,
        growth=(4.0, 4.0, 12.0),
        splitting="convex F + 2 s^2, concave -2 s^2",
    )


def logarithmic_potential(theta=0.15, theta_c=0.3, eps0=0.5):
    """Singular logarithmic well on (-1, 1), temperatures 0 < theta < theta_c."""
    theta = float(theta)
    theta_c = float(theta_c)
    if not (0.0 < theta < theta_c):
        raise ParameterError(
            f"need 0 < theta < theta_c, got theta={theta}, theta_c={theta_c}"
        )
    return PotentialSpec(
        kind="logarithmic",
        theta=theta,
        theta_c=theta_c,
        c0=theta_c - theta,
        p=1.0,
        eps0=float(eps0),
        growth=(theta, theta_c, theta),
        splitting="convex F + (theta_c-theta) s^2/2, concave -(theta_c-theta) s^2/2",
    )


def regularize_potential(spec, eps):
    """Quadratic Taylor extension of the singular part beyond |s| = 1 - eps.

    The extension keeps value and slope at 0 and clamps the second
    derivative at the joints, so it coincides with the base potential for
    |s| <= 1 - eps and is defined on all of R.
    """
    if spec.kind != "logarithmic":
        raise ParameterError(f"can only regularize the logarithmic kind, got {spec.kind}")
    eps = float(eps)
    if not (0.0 < eps <= spec.eps0):
        raise ParameterError(f"need 0 < eps <= {spec.eps0}, got eps={eps}")
    return PotentialSpec(
        kind="regularized",
        theta=spec.theta,
        theta_c=spec.theta_c,
        c0=spec.c0,
        p=1.0,
        eps=eps,
        eps0=spec.eps0,
        growth=spec.growth,
        splitting=spec.splitting,
    )


# -- logarithmic singular part and its derivatives --------------------------

def _f1_log(s, theta):
    return 0.5 * theta * ((1.0 + s) * np.log1p(s) + (1.0 - s) * np.log1p(-s))


def _f1p_log(s, theta):
    return 0.5 * theta * (np.log1p(s) - np.log1p(-s))


def _f1pp_log(s, theta):
    return theta / (1.0 - s * s)


def _check_log_domain(s):
    bad = int(np.count_nonzero(1.0 - np.abs(s) < _LOG_GUARD))
    if bad:
        raise DomainError(
            f"logarithmic potential evaluated within 1e-14 of +-1 at {bad} sample(s)"
        )


def _regularized_f1(spec, s, order):
    """F1_eps and derivatives: base inside |s| <= 1-eps, Taylor outside."""
    th = spec.theta
    sc = 1.0 - spec.eps
    s = np.asarray(s, dtype=float)
    inner = np.clip(s, -sc, sc)
    v0, d0, c0 = _f1_log(sc, th), _f1p_log(sc, th), _f1pp_log(sc, th)
    if order == 0:
        core = _f1_log(inner, th)
        hi = v0 + d0 * (s - sc) + 0.5 * c0 * (s - sc) ** 2
        lo = v0 - d0 * (s + sc) + 0.5 * c0 * (s + sc) ** 2
    elif order == 1:
        core = _f1p_log(inner, th)
        hi = d0 + c0 * (s - sc)
        lo = -d0 + c0 * (s + sc)
    else:
        core = _f1pp_log(inner, th)
        hi = np.full_like(s, c0)
        lo = np.full_like(s, c0)
    return np.where(s > sc, hi, np.where(s < -sc, lo, core))


def _eval_potential(spec, s, order):
    s_arr = np.asarray(s, dtype=float)
    if spec.kind == "regular":
        if order == 0:
            out = (s_arr**2 - 1.0) ** 2
        elif order == 1:
            out = 4.0 * s_arr * (s_arr**2 - 1.0)
        else:
            out = 12.0 * s_arr**2 - 4.0
    elif spec.kind == "logarithmic":
        _check_log_domain(s_arr)
        if order == 0:
            out = _f1_log(s_arr, spec.theta) + 0.5 * spec.theta_c * (1.0 - s_arr**2)
        elif order == 1:
            out = _f1p_log(s_arr, spec.theta) - spec.theta_c * s_arr
        else:
            out = _f1pp_log(s_arr, spec.theta) - spec.theta_c
    elif spec.kind == "regularized":
        f1 = _regularized_f1(spec, s_arr, order)
        if order == 0:
            out = f1 + 0.5 * spec.theta_c * (1.0 - s_arr**2)
        elif order == 1:
            out = f1 - spec.theta_c * s_arr
        else:
            out = f1 - spec.theta_c
    else:
        raise ParameterError(f"unknown potential kind {spec.kind!r}")
    return out if np.ndim(s) else float(out)


def potential_value(spec, s):
    """F(s); raises DomainError outside the admissible interval."""
    return _eval_potential(spec, s, 0)


def potential_deriv(spec, s, order=1):
    """Analytic first or second derivative of F."""
    if order not in (1, 2):
        raise ParameterError(f"derivative order must be 1 or 2, got {order}")
    return _eval_potential(spec, s, order)


def potential_convex_deriv(spec, s):
    """Derivative of the convex split part, F'(s) + c0 s."""
    s_arr = np.asarray(s, dtype=float)
    out = _eval_potential(spec, s_arr, 1) + spec.c0 * s_arr
    return out if np.ndim(s) else float(out)


def potential_concave_deriv(spec, s):
    """Derivative of the concave split part, -c0 s."""
    out = -spec.c0 * np.asarray(s, dtype=float)
    return out if np.ndim(s) else float(out)


def potential_convex_value(spec, s):
    s_arr = np.asarray(s, dtype=float)
    out = _eval_potential(spec, s_arr, 0) + 0.5 * spec.c0 * s_arr**2
    return out if np.ndim(s) else float(out)


def potential_concave_value(spec, s):
    out = -0.5 * spec.c0 * np.asarray(s, dtype=float) ** 2
    return out if np.ndim(s) else float(out)


# ---------------------------------------------------------------------------
# mobilities

@dataclass(frozen=True)
class MobilitySpec:
    """Immutable description of one mobility law."""

    kind: str
    value: float = 1.0
    n: int = 1
    k: object = None  # optional C^1 prefactor on [-1, 1]
    eps0: float = 0.5
    eps: float = 0.0
    m1: float = 0.0
    m2: float = 0.0
    fn: object = None


def constant_mobility(value=1.0):
    value = float(value)
    if value <= 0.0:
        raise ParameterError(f"constant mobility must be positive, got {value}")
    return MobilitySpec(kind="constant", value=value, m1=value, m2=value)


def degenerate_mobility(n=1, k=None, eps0=0.5):
    """m(s) = k(s)(1 - s^2)^n, zero at the pure phases and outside [-1, 1]."""
    n = int(n)
    if n < 1:
        raise ParameterError(f"degeneracy exponent must be >= 1, got {n}")
    return MobilitySpec(kind="degenerate", n=n, k=k, eps0=float(eps0))


def nondegenerate_mobility(fn, m1, m2):
    m1, m2 = float(m1), float(m2)
    if not (0.0 < m1 <= m2):
        raise ParameterError(f"need 0 < m1 <= m2, got m1={m1}, m2={m2}")
    return MobilitySpec(kind="nondegenerate", fn=fn, m1=m1, m2=m2)


def regularize_mobility(spec, eps):
    """Clamp a degenerate mobility to its values at |s| = 1 - eps."""
    if spec.kind != "degenerate":
        raise ParameterError(f"can only clamp the degenerate kind, got {spec.kind}")
    eps = float(eps)
    if not (0.0 < eps <= spec.eps0):
        raise ParameterError(f"need 0 < eps <= {spec.eps0}, got eps={eps}")
    clamped = MobilitySpec(kind="clamped", n=spec.n, k=spec.k, eps0=spec.eps0, eps=eps)
    lo = float(mobility_value(clamped, -1.0 + eps))
    hi = float(mobility_value(clamped, 1.0 - eps))
    m2 = float(np.max(mobility_value(clamped, np.linspace(-1.0 + eps, 1.0 - eps, 2049))))
    return MobilitySpec(
        kind="clamped", n=spec.n, k=spec.k, eps0=spec.eps0, eps=eps,
        m1=min(lo, hi), m2=m2,
    )


def _degenerate_core(spec, s):
    k = spec.k(s) if spec.k is not None else 1.0
    return k * (1.0 - s * s) ** spec.n


def mobility_value(spec, s):
    """m(s) >= 0, vectorized."""
    s_arr = np.asarray(s, dtype=float)
    if spec.kind == "constant":
        out = np.full_like(s_arr, spec.value)
    elif spec.kind == "nondegenerate":
        out = np.asarray(spec.fn(s_arr), dtype=float)
    elif spec.kind == "degenerate":
        inside = np.clip(s_arr, -1.0, 1.0)
        out = np.where(np.abs(s_arr) <= 1.0, _degenerate_core(spec, inside), 0.0)
    elif spec.kind == "clamped":
        sc = 1.0 - spec.eps
        out = _degenerate_core(spec, np.clip(s_arr, -sc, sc))
    else:
        raise ParameterError(f"unknown mobility kind {spec.kind!r}")
    return out if np.ndim(s) else float(out)


def mobility_bounds(spec):
    """(m1, m2) lower/upper bounds where the kind guarantees them."""
    if spec.kind == "degenerate":
        raise ParameterError("degenerate mobility has no positive lower bound")
    return spec.m1, spec.m2


# ---------------------------------------------------------------------------
# entropy function  G'' = 1/m, G(0) = G'(0) = 0

class EntropyFunction:
    """Double integral of 1/m from 0, for bounded (clamped/constant) mobility.

    Composite-Simpson cumulative tables cover the core interval where the
    mobility varies; outside it the mobility is constant and the exact
    quadratic continuation is used.  Point evaluation inside the table is
    Hermite-cubic in (G, G'), so constant mobility reproduces s^2/2 to
    roundoff.
    """

    def __init__(self, mobility, resolution=512):
        if mobility.kind not in ("constant", "clamped"):
            raise ParameterError(
                "entropy function needs a bounded mobility (constant or clamped), "
                f"got kind {mobility.kind!r}"
            )
        resolution = int(resolution)
        if resolution < 128:
            raise ParameterError(f"resolution must be >= 128 panels/unit, got {resolution}")
        self.mobility = mobility
        if mobility.kind == "clamped":
            half = 1.0 - mobility.eps
        else:
            half = 1.0
        panels = 2 * max(1, math.ceil(half * resolution))
        self.nodes = np.linspace(-half, half, panels + 1)
        w = 1.0 / np.asarray(mobility_value(mobility, self.nodes), dtype=float)
        if not np.all(w > 0.0) or not np.all(np.isfinite(w)):
            raise ParameterError("mobility must be strictly positive on the core interval")
        i0 = panels // 2  # node at s = 0
        gp = cumulative_simpson(w, x=self.nodes, initial=0.0)
        gp -= gp[i0]
        g = cumulative_simpson(gp, x=self.nodes, initial=0.0)
        g -= g[i0]
        self._w = w
        self._gp = gp
        self._g = g
        self._half = half
        self._m_edge = (float(mobility_value(mobility, -half)),
                        float(mobility_value(mobility, half)))

    def _hermite(self, s, ya, yb, da, db):
        x = self.nodes
        idx = np.clip(np.searchsorted(x, s, side="right") - 1, 0, len(x) - 2)
        hseg = x[idx + 1] - x[idx]
        t = (s - x[idx]) / hseg
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return (
            h00 * ya[idx] + hseg * h10 * da[idx]
            + h01 * ya[idx + 1] + hseg * h11 * da[idx + 1]
        )

    def value(self, s):
        """G(s) >= 0."""
        s_arr = np.asarray(s, dtype=float)
        a = self._half
        core = self._hermite(np.clip(s_arr, -a, a), self._g, self._g, self._gp, self._gp)
        g_lo, g_hi = self._g[0], self._g[-1]
        gp_lo, gp_hi = self._gp[0], self._gp[-1]
        m_lo, m_hi = self._m_edge
        hi = g_hi + gp_hi * (s_arr - a) + (s_arr - a) ** 2 / (2.0 * m_hi)
        lo = g_lo + gp_lo * (s_arr + a) + (s_arr + a) ** 2 / (2.0 * m_lo)
        out = np.where(s_arr > a, hi, np.where(s_arr < -a, lo, core))
        return out if np.ndim(s) else float(out)

    def derivative(self, s):
        """G'(s), odd-symmetric for symmetric mobilities."""
        s_arr = np.asarray(s, dtype=float)
        a = self._half
        core = self._hermite(np.clip(s_arr, -a, a), self._gp, self._gp, self._w, self._w)
        m_lo, m_hi = self._m_edge
        hi = self._gp[-1] + (s_arr - a) / m_hi
        lo = self._gp[0] + (s_arr + a) / m_lo
        out = np.where(s_arr > a, hi, np.where(s_arr < -a, lo, core))
        return out if np.ndim(s) else float(out)


def entropy_value(entropy, s):
    """G(s) for an EntropyFunction (convenience wrapper)."""
    return entropy.value(s)
