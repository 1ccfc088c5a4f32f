"""Change-of-measure upper bounds on P(E) from Q(E) and a divergence.

Every bound here is of the shape  P(E) <= xi(Q(E), dP/dQ)  and is verified
against exhaustive event enumeration by the verify module.  Scalar entry
points return a :class:`BoundResult`; the ``*_core`` functions are the
vectorized formula kernels shared with the verification harness (they accept
scalars or numpy arrays for q and return raw, unclipped values).

Conventions
-----------
* Degenerate events: q = 0 forces P(E) = 0 under domination, and q = 1
  forces the vacuous bound 1.  Cores apply these overrides instead of
  evaluating the interior formula.
* All scalar parameter searches (c, u, v, t, s) use a log-domain bracket
  [1e-12, 1e12] with a coarse grid plus golden-section refinement, relative
  tolerance 1e-10, at most 200 iterations, no RNG.
* Raw values may exceed 1 or be +inf; ``BoundResult.value`` clips to [0, 1]
  for reporting.  Dominance comparisons always use raw values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._optim import (
    bisect_increasing,
    bisect_increasing_vec,
    golden_min,
    golden_min_vec,
    min_convex_line,
)
from .dist import AbsContPair, EventMask, JointFinite, event_probability
from .divergences import (
    DivergenceKind,
    bernoulli_kl,
    generator_derivative,
    generator_values,
)
from .errors import RangeError, ValidationError
from .orlicz import OrliczSpec, amemiya_norm, amemiya_norm_values, luxemburg_norm_values


@dataclass(frozen=True)
class BoundResult:
    """An evaluated upper bound on P(E).

    ``raw`` is the formula value (may exceed 1 or be +inf); ``value`` clips
    it to [0, 1] for reporting.  ``preconditions_met`` is False when the
    bound is not applicable at these inputs (e.g. a nonpositive slope gap);
    soundness is only promised while it is True.
    """

    name: str
    raw: float
    free_params: dict = field(default_factory=dict)
    preconditions_met: bool = True
    notes: tuple[str, ...] = ()

    @property
    def value(self) -> float:
        if math.isnan(self.raw):
            return 1.0
        return min(max(self.raw, 0.0), 1.0)


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q <= 1.0 or math.isnan(q):
        raise RangeError(f"q = {q!r} must lie in [0, 1]")
    return q


def _check_div(d: float, what: str = "divergence") -> float:
    d = float(d)
    if math.isnan(d) or d < -1e-12:
        raise RangeError(f"{what} must be nonnegative, got {d!r}")
    return max(d, 0.0)  # forgive roundoff-level negatives


def _degenerate(name: str, q: float, params: dict) -> BoundResult | None:
    if q == 0.0:
        return BoundResult(name, 0.0, params, notes=("degenerate: Q(E)=0 forces P(E)=0",))
    if q == 1.0:
        return BoundResult(name, 1.0, params, notes=("degenerate: Q(E)=1 forces the vacuous bound",))
    return None


def _override(q, raw):
    """Apply the degenerate-event convention elementwise."""
    return np.where(q <= 0.0, 0.0, np.where(q >= 1.0, 1.0, raw))


# ---------------------------------------------------------------------------
# hockey-stick (E_gamma) and the strong-converse comparison point
# ---------------------------------------------------------------------------


def egamma_core(q, e_gamma, gamma):
    """gamma * q + E_gamma(P || Q)."""
    q = np.asarray(q, dtype=float)
    return _override(q, gamma * q + e_gamma)


def bound_egamma(q: float, e_gamma: float, gamma: float) -> BoundResult:
    """P(E) <= gamma Q(E) + E_gamma(P || Q), any real gamma."""
    q = _check_q(q)
    params = {"gamma": float(gamma)}
    deg = _degenerate("egamma", q, params)
    if deg:
        return deg
    return BoundResult("egamma", float(gamma * q + _check_div(e_gamma, "E_gamma")), params)


def strong_converse_core(q, tail_mass, gamma):
    """gamma * q + P(dP/dQ > gamma)."""
    q = np.asarray(q, dtype=float)
    return _override(q, gamma * q + tail_mass)


def likelihood_tail_mass(pair: AbsContPair, gamma: float) -> float:
    """P({dP/dQ > gamma}), the strict upper tail of the ratio under P."""
    return float(pair.p.probs[pair.ratios > gamma].sum())


def bound_strong_converse(pair: AbsContPair, mask: EventMask, gamma: float) -> BoundResult:
    """P(E) <= gamma Q(E) + P(dP/dQ > gamma): counts only how often the
    ratio exceeds gamma, hence never beats :func:`bound_egamma`."""
    q = event_probability(pair.q, mask)
    tail = likelihood_tail_mass(pair, gamma)
    params = {"gamma": float(gamma), "tail_mass": tail}
    deg = _degenerate("strong_converse", q, params)
    if deg:
        return deg
    return BoundResult("strong_converse", float(gamma * q + tail), params)


# ---------------------------------------------------------------------------
# chi-square and KL
# ---------------------------------------------------------------------------


def chi2_core(q, chi2):
    q = np.asarray(q, dtype=float)
    with np.errstate(invalid="ignore"):
        raw = q + np.sqrt(q * (1.0 - q) * chi2)
    return _override(q, raw)


def bound_chi2(q: float, chi2: float) -> BoundResult:
    """P(E) <= q + sqrt(q (1-q) chi^2(P||Q))."""
    q = _check_q(q)
    deg = _degenerate("chi2", q, {})
    if deg:
        return deg
    return BoundResult("chi2", float(chi2_core(q, _check_div(chi2))), {})


def kl_fixed_core(q, d, c):
    with np.errstate(over="ignore"):
        return (d + np.log1p(np.asarray(q, dtype=float) * np.expm1(c))) / c


def kl_opt_core(q, d):
    """Minimize the KL bound over c > 0.  Returns (raw, c_star) arrays."""
    q = np.asarray(q, dtype=float)
    d = np.broadcast_to(np.asarray(d, dtype=float), q.shape)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    c_star, val = golden_min_vec(lambda c: kl_fixed_core(qs, d, c), 1e-12, 1e12, q.shape)
    return _override(q, val), c_star


def kl_closed_core(q, d):
    """The closed specialization c = log(1/q): (KL + log(2 - q)) / log(1/q)."""
    q = np.asarray(q, dtype=float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore"):
        raw = (d + np.log(2.0 - qs)) / np.log(1.0 / qs)
    return _override(q, raw)


def bound_kl(q: float, kl: float, c: float | None = None) -> BoundResult:
    """P(E) <= (KL(P||Q) + log(1 + q(e^c - 1))) / c for any c > 0.

    With c omitted, minimizes over c numerically; the result also reports the
    closed specialization at c = log(1/q) under ``free_params['closed_c']``.
    """
    q = _check_q(q)
    kl = _check_div(kl, "KL")
    if q in (0.0, 1.0):
        deg = _degenerate("kl", q, {})
        assert deg is not None
        return deg
    if c is not None:
        if c <= 0:
            raise RangeError("need c > 0")
        return BoundResult("kl", float(kl_fixed_core(q, kl, c)), {"c": float(c)})
    raw, c_star = kl_opt_core(np.asarray(q), kl)
    closed = float(kl_closed_core(q, kl))
    return BoundResult(
        "kl",
        float(raw),
        {"c": float(c_star), "closed_c": math.log(1.0 / q), "closed_value": closed},
    )


# ---------------------------------------------------------------------------
# squared Hellinger distance
# ---------------------------------------------------------------------------


def hellinger_core(q, h2):
    """Exact inversion of the two-point Hellinger constraint.

    For x := 1 - h2/2 >= sqrt(q) this is the closed form
    (sqrt(q) x + sqrt((1-q)(1-x^2)))^2; below that threshold the constraint
    admits p = 1, so the bound is vacuous and we return 1.
    """
    q = np.asarray(q, dtype=float)
    x = 1.0 - 0.5 * np.asarray(h2, dtype=float)
    with np.errstate(invalid="ignore"):
        s = np.sqrt(q)
        body = (s * x + np.sqrt((1.0 - q) * np.maximum(1.0 - x * x, 0.0))) ** 2
        raw = np.where(x >= s, body, 1.0)
    return _override(q, raw)


def bound_hellinger(q: float, h2: float) -> BoundResult:
    """Invert 2(1 - sqrt(pq) - sqrt((1-p)(1-q))) <= H^2 for the largest p."""
    q = _check_q(q)
    h2 = float(h2)
    if not 0.0 <= h2 <= 2.0:
        raise RangeError("squared Hellinger distance must lie in [0, 2]")
    informative = (1.0 - 0.5 * h2) >= math.sqrt(q) if 0.0 < q < 1.0 else True
    deg = _degenerate("hellinger", q, {})
    if deg:
        return deg
    notes = () if informative else ("vacuous: sqrt(q) exceeds 1 - H^2/2",)
    return BoundResult("hellinger", float(hellinger_core(q, h2)), {}, notes=notes)


# ---------------------------------------------------------------------------
# power-beta divergence (three modes)
# ---------------------------------------------------------------------------


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not 1.0 < beta <= 50.0:
        raise RangeError("beta must lie in (1, 50]")
    return beta


def power_implicit_core(q, h_beta, beta):
    """Largest p in [q, 1] with p^b q^(1-b) + (1-p)^b (1-q)^(1-b) <= 1 + (b-1) H_b.

    The left side is increasing in p on [q, 1], so bisection applies; the
    returned value sits on the safe (upper) side of the final bracket.
    """
    q = np.asarray(q, dtype=float)
    target = 1.0 + (beta - 1.0) * np.asarray(h_beta, dtype=float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    target = np.broadcast_to(target, qs.shape)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lq = np.log(qs)
        l1q = np.log1p(-qs)

        def lhs(p):
            a = beta * np.log(np.maximum(p, 1e-300)) + (1.0 - beta) * lq
            b = beta * np.log(np.maximum(1.0 - p, 1e-300)) + (1.0 - beta) * l1q
            b = np.where(p >= 1.0, -np.inf, b)
            return np.exp(np.logaddexp(a, b))

        at_one = np.exp((1.0 - beta) * lq)
        root = bisect_increasing_vec(lhs, qs, 1.0, target, qs.shape)
        raw = np.where(at_one <= target, 1.0, root)
    return _override(q, raw)


def power_qmax_core(q, h_beta, beta, q_max):
    """Linearized relaxation under an a-priori event-mass cap Q(E) <= q_max.

    Returns (raw, m, valid): the implied slope m must be positive for the
    bound to apply.
    """
    q = np.asarray(q, dtype=float)
    rhs = 1.0 + (beta - 1.0) * np.asarray(h_beta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        m = q_max ** ((1.0 - beta) / beta) * rhs ** (-1.0 / beta) - 1.0
        qs = np.clip(q, 1e-300, 1.0 - 1e-16)
        inner = np.logaddexp(
            (1.0 - beta) * np.log(qs),
            beta * np.log(np.maximum(m, 1e-300)) + (1.0 - beta) * np.log1p(-qs),
        )
        raw = np.exp(np.log(rhs) / beta - inner / beta)
    valid = m > 0.0
    return _override(q, raw), m, valid


def power_small_q_core(q, h_beta, beta):
    """Small-q relaxation with the plug-in cap u0 on p itself."""
    q = np.asarray(q, dtype=float)
    rhs = 1.0 + (beta - 1.0) * np.asarray(h_beta, dtype=float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_u0 = np.minimum(0.0, (np.log(rhs) + (beta - 1.0) * np.log(qs)) / beta)
        u0 = np.exp(log_u0)
        bracket = rhs - np.exp(
            (1.0 - beta) * np.log1p(-qs) + beta * np.log(np.maximum(1.0 - u0, 1e-300))
        )
        bracket = np.where(u0 >= 1.0, rhs - 0.0 * bracket, bracket)  # (1-u0)^b = 0
        bracket = np.maximum(bracket, 0.0)
        raw = np.exp(
            ((beta - 1.0) * np.log(qs) + np.log(np.maximum(bracket, 1e-300))) / beta
        )
        raw = np.where(bracket <= 0.0, 0.0, raw)
    return _override(q, raw), u0


def bound_power_beta(
    q: float,
    h_beta: float,
    beta: float,
    mode: str = "implicit",
    q_max: float | None = None,
) -> BoundResult:
    """Power-beta divergence bounds.

    mode = "implicit": sharp inversion of the two-point constraint by
    bisection (residual below 1e-12).
    mode = "qmax" (alias "relaxedM"): linear relaxation requiring an a-priori
    cap q_max < 1 on Q(E); flags ``preconditions_met`` False when the implied
    slope is nonpositive.
    mode = "small_q" (alias "relaxedU0"): relaxation with the plug-in cap u0,
    tightest when Q(E) is small.
    """
    q = _check_q(q)
    beta = _check_beta(beta)
    h_beta = _check_div(h_beta, "power divergence")
    mode = {"relaxedM": "qmax", "relaxedU0": "small_q"}.get(mode, mode)
    params: dict = {"beta": beta}
    name = f"power_{mode}"
    deg = _degenerate(name, q, params)
    if deg:
        return deg
    if mode == "implicit":
        return BoundResult(name, float(power_implicit_core(q, h_beta, beta)), params)
    if mode == "qmax":
        if q_max is None or not q <= q_max < 1.0:
            raise RangeError("qmax mode needs q <= q_max < 1")
        raw, m, valid = power_qmax_core(q, h_beta, beta, q_max)
        params.update({"q_max": float(q_max), "m": float(m)})
        return BoundResult(name, float(raw), params, preconditions_met=bool(valid))
    if mode == "small_q":
        raw, u0 = power_small_q_core(q, h_beta, beta)
        params["u0"] = float(u0)
        return BoundResult(name, float(raw), params)
    raise ValidationError(f"unknown power mode {mode!r}")


# ---------------------------------------------------------------------------
# Young-Fenchel relaxation for a generic convex generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugateSpec:
    """A generator's convex conjugate, for the Young-Fenchel bound.

    ``nonneg`` marks generators that are pointwise >= 0 after the affine
    normalization f(t) - f'(1)(t - 1) (the divergence value is unchanged by
    that shift); it enables the simpler v = 0 search.
    """

    name: str
    fstar: Callable[[float], float]
    nonneg: bool
    f: Callable[[float], float] | None = None


def _exp_safe(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _power_conjugate(beta: float) -> Callable[[float], float]:
    # sup_t (u t - (t^b - 1)/(b-1)) = 1/(b-1) + ((b-1) u / b)^(b/(b-1)), u >= 0
    kexp = beta / (beta - 1.0)

    def fstar(u: float) -> float:
        base = 1.0 / (beta - 1.0)
        if u <= 0.0:
            return base
        return base + _exp_safe(kexp * math.log((beta - 1.0) * u / beta))

    return fstar


def conjugate_spec_for(f) -> ConjugateSpec:
    """Closed conjugates for the chi2 / KL / power generators; numeric
    conjugation (sup over a log bracket) for a user-supplied callable."""
    if isinstance(f, DivergenceKind):
        if f.name == "chi2":
            # conjugate of the affine-normalized generator (t - 1)^2
            return ConjugateSpec("chi2", lambda u: u + 0.25 * u * u, True)
        if f.name == "kl":
            return ConjugateSpec("kl", lambda u: _exp_safe(u - 1.0), False)
        if f.name == "power":
            return ConjugateSpec(f"power({f.param:g})", _power_conjugate(f.param), False)
        raise ValidationError(f"no built-in conjugate for kind {f}")

    def fstar(u: float) -> float:
        t_star, neg = golden_min(lambda t: -(u * t - float(f(t))))
        if t_star > 0.5e12:
            return math.inf  # supremum ran off the bracket
        return -neg

    grid = np.geomspace(1e-6, 1e6, 41)
    nonneg = all(float(f(t)) >= -1e-12 for t in grid)
    return ConjugateSpec(getattr(f, "__name__", "custom"), fstar, nonneg, f)


def bound_young_fenchel(
    q: float,
    df: float,
    fspec: ConjugateSpec | DivergenceKind | Callable,
    u: float | None = None,
    v: float | None = None,
) -> BoundResult:
    """P(E) <= (D_f - v + q f*(u) + (1-q) f*(v)) / (u - v) for any u > v.

    With (u, v) omitted, optimizes them: the v = 0 shortcut when the
    normalized generator is nonnegative, coordinate descent from (1, 0)
    (50 rounds or relative change < 1e-10), and a nested search over the
    gap w = u - v with an inner line search over v.  Every evaluated pair is
    a valid bound, so the best candidate is returned.  The searched gap is
    floored at 1e-5: below that the numerator cancels catastrophically and
    roundoff could report values under the true infimum.
    """
    q = _check_q(q)
    df = _check_div(df, "D_f")
    if not isinstance(fspec, ConjugateSpec):
        fspec = conjugate_spec_for(fspec)
    deg = _degenerate("young_fenchel", q, {"f": fspec.name})
    if deg:
        return deg

    def value(uu: float, vv: float) -> float:
        if not uu > vv:
            return math.inf
        fu, fv = fspec.fstar(uu), fspec.fstar(vv)
        if not (math.isfinite(fu) and math.isfinite(fv)):
            return math.inf
        return (df - vv + q * fu + (1.0 - q) * fv) / (uu - vv)

    if u is not None and v is not None:
        if not u > v:
            raise RangeError("need u > v")
        fu, fv = fspec.fstar(u), fspec.fstar(v)
        if not (math.isfinite(fu) and math.isfinite(fv)):
            raise RangeError("conjugate not finite at the requested (u, v)")
        return BoundResult(
            "young_fenchel", value(u, v), {"u": float(u), "v": float(v), "f": fspec.name}
        )
    if (u is None) != (v is None):
        raise ValidationError("provide both u and v, or neither")

    candidates: list[tuple[float, float, float]] = []
    gap_lo = 1e-5

    if fspec.nonneg:
        u5, val5 = golden_min(lambda uu: value(uu, 0.0), gap_lo, 1e12)
        candidates.append((val5, u5, 0.0))

    cu, cv = 1.0, 0.0
    prev = value(cu, cv)
    for _ in range(50):
        w, _fw = golden_min(lambda ww: value(cv + ww, cv), gap_lo, 1e12)
        cu = cv + w
        w2, _fw2 = golden_min(lambda ww: value(cu, cu - ww), gap_lo, 1e12)
        cv = cu - w2
        cur = value(cu, cv)
        if prev - cur <= 1e-10 * max(abs(cur), 1.0):
            prev = cur
            break
        prev = cur
    candidates.append((prev, cu, cv))

    best_inner: dict[float, float] = {}

    def gap_objective(w: float) -> float:
        vv, val = min_convex_line(lambda x: value(x + w, x), x0=0.0, step=max(w, 1.0))
        best_inner[w] = vv
        return val

    w_star, nested = golden_min(gap_objective, gap_lo, 1e12)
    candidates.append((nested, best_inner[w_star] + w_star, best_inner[w_star]))

    val, ub, vb = min(candidates)
    return BoundResult(
        "young_fenchel", float(val), {"u": float(ub), "v": float(vb), "f": fspec.name}
    )


# ---------------------------------------------------------------------------
# generic f-divergence bound through the hockey-stick comparison
# ---------------------------------------------------------------------------


def _richardson_derivative(f: Callable[[float], float], t: float, h: float = 1e-6) -> float:
    d1 = (f(t + h) - f(t - h)) / (2.0 * h)
    d2 = (f(t + 0.5 * h) - f(t - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def f_hs_core(q, df, gamma, slope_gap):
    q = np.asarray(q, dtype=float)
    return _override(q, gamma * q + df / slope_gap)


def bound_f_via_egamma(
    q: float,
    df: float,
    f: DivergenceKind | Callable[[float], float],
    gamma: float,
    lipschitz: float | None = None,
) -> BoundResult:
    """P(E) <= gamma q + D_f / (f'(gamma) - f'(1)) for gamma > 1.

    With a Lipschitz constant L for f' on [gamma, inf), the denominator
    improves to f'(gamma0) - f'(1) at
    gamma0 = gamma + sqrt(2 (f(gamma) - f'(1)(gamma - 1)) / L).
    """
    q = _check_q(q)
    df = _check_div(df, "D_f")
    gamma = float(gamma)
    if gamma <= 1.0:
        raise RangeError("need gamma > 1")

    if isinstance(f, DivergenceKind):
        fprime = lambda t: generator_derivative(f, t)  # noqa: E731
        fval = lambda t: float(generator_values(f, np.asarray(t, dtype=float)))  # noqa: E731
        fname = str(f)
    else:
        fprime = lambda t: _richardson_derivative(f, t)  # noqa: E731
        fval = lambda t: float(f(t))  # noqa: E731
        fname = getattr(f, "__name__", "custom")

    params: dict = {"gamma": gamma, "f": fname}
    gamma_eff = gamma
    if lipschitz is not None:
        if lipschitz <= 0:
            raise RangeError("Lipschitz constant must be positive")
        tilde = fval(gamma) - fprime(1.0) * (gamma - 1.0)
        gamma_eff = gamma + math.sqrt(max(2.0 * tilde / lipschitz, 0.0))
        params["gamma0"] = gamma_eff
        params["lipschitz"] = float(lipschitz)

    gap = fprime(gamma_eff) - fprime(1.0)
    params["slope_gap"] = gap
    deg = _degenerate("f_from_egamma", q, params)
    if deg:
        return deg
    if gap <= 0.0:
        return BoundResult("f_from_egamma", math.inf, params, preconditions_met=False)
    return BoundResult("f_from_egamma", float(gamma * q + df / gap), params)


# ---------------------------------------------------------------------------
# reverse chi-square, reverse KL, Vincze-Le Cam
# ---------------------------------------------------------------------------


def reverse_chi2_core(q, r):
    """Upper root of (1+r) p^2 - (r + 2q) p + q^2 <= 0, r = chi^2(Q || P)."""
    q = np.asarray(q, dtype=float)
    r = np.broadcast_to(np.asarray(r, dtype=float), q.shape)
    with np.errstate(invalid="ignore", over="ignore"):
        raw = (r + 2.0 * q + np.sqrt(r * r + 4.0 * r * q * (1.0 - q))) / (2.0 * (1.0 + r))
    raw = np.where(np.isinf(r), 1.0, raw)
    return _override(q, raw)


def bound_reverse_chi2(q: float, rchi2: float) -> BoundResult:
    q = _check_q(q)
    rchi2 = _check_div(rchi2, "chi^2(Q||P)")
    deg = _degenerate("reverse_chi2", q, {})
    if deg:
        return deg
    return BoundResult("reverse_chi2", float(reverse_chi2_core(q, rchi2)), {})


def bernoulli_kl_core(a, b):
    """Vectorized kl(a, b) with the 0 log 0 convention; b in (0, 1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(a > 0, a * (np.log(np.maximum(a, 1e-300)) - np.log(b)), 0.0)
        t2 = np.where(
            a < 1,
            (1.0 - a) * (np.log(np.maximum(1.0 - a, 1e-300)) - np.log(1.0 - b)),
            0.0,
        )
    return t1 + t2


def reverse_kl_exact_core(q, d):
    """Sharp inversion: the unique p in [q, 1) with kl(q, p) = D(Q || P)."""
    q = np.asarray(q, dtype=float)
    d = np.broadcast_to(np.asarray(d, dtype=float), q.shape)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    hi = np.nextafter(1.0, 0.0)
    root = bisect_increasing_vec(lambda p: bernoulli_kl_core(qs, p), qs, hi, d, qs.shape)
    return _override(q, root)


def reverse_kl_explicit_core(q, d):
    """One-sided explicit bound 1 - (1-q) exp(-(D(Q||P) + q log(1/q)) / (1-q)).

    Comes from bounding the dropped two-point term by its minimum
    q log(q/p) >= q log q over p <= 1 (dropping it outright is only valid
    for p <= q and fails soundness otherwise); always at least the sharp
    kl-inversion.
    """
    q = np.asarray(q, dtype=float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        shift = np.asarray(d, dtype=float) - qs * np.log(qs)
        raw = 1.0 - (1.0 - qs) * np.exp(-shift / (1.0 - qs))
    return _override(q, raw)


def bound_reverse_kl(q: float, dqp: float, mode: str = "exact") -> BoundResult:
    """Reverse-KL bounds: the sharp kl-inversion or its explicit relaxation."""
    q = _check_q(q)
    dqp = _check_div(dqp, "D(Q||P)")
    name = f"reverse_kl_{mode}"
    deg = _degenerate(name, q, {})
    if deg:
        return deg
    if mode == "exact":
        return BoundResult(name, float(invert_binary_kl(q, dqp)), {})
    if mode == "explicit":
        return BoundResult(name, float(reverse_kl_explicit_core(q, dqp)), {})
    raise ValidationError(f"unknown reverse-KL mode {mode!r}")


def vincze_core(q, vc):
    """Upper root of the Vincze-Le Cam two-point quadratic."""
    q = np.asarray(q, dtype=float)
    v = np.broadcast_to(np.asarray(vc, dtype=float), q.shape)
    with np.errstate(invalid="ignore", over="ignore"):
        raw = (v * (1.0 - q) + 2.0 * q + np.sqrt(v * (v + 8.0 * q * (1.0 - q)))) / (v + 2.0)
    raw = np.where(np.isinf(v), 2.0 - q, raw)
    return _override(q, raw)


def bound_vincze_lecam(q: float, vc: float) -> BoundResult:
    q = _check_q(q)
    vc = _check_div(vc, "Vincze-Le Cam divergence")
    deg = _degenerate("vincze_lecam", q, {})
    if deg:
        return deg
    return BoundResult("vincze_lecam", float(vincze_core(q, vc)), {})


def invert_binary_kl(q: float, d: float) -> float:
    """The unique p in [q, 1) solving kl(q, p) = d, residual <= 1e-12.

    Returns the predecessor of 1.0 when d exceeds kl(q, 1 - 1e-15).
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise RangeError("need q in (0, 1)")
    d = _check_div(d)
    if d == 0.0:
        return q
    top = 1.0 - 1e-15
    if not d < bernoulli_kl(q, top):
        return np.nextafter(1.0, 0.0)
    return bisect_increasing(lambda p: bernoulli_kl(q, p), q, top, d, residual=1e-12)


# ---------------------------------------------------------------------------
# Orlicz-norm bounds
# ---------------------------------------------------------------------------


def orlicz_indicator_core(q, spec: OrliczSpec):
    """Vectorized 1 / psi^{-1}(1/q) with the 0-at-0 convention."""
    q = np.asarray(q, dtype=float)
    qs = np.clip(q, 1e-300, 1.0)
    with np.errstate(divide="ignore"):
        lux = 1.0 / np.asarray(spec.inverse(1.0 / qs), dtype=float)
    return np.where(q > 0.0, lux, 0.0)


def orlicz_core(q, amemiya: float, gamma: float, spec: OrliczSpec):
    q = np.asarray(q, dtype=float)
    raw = gamma * q + orlicz_indicator_core(q, spec) * amemiya
    return np.where(q <= 0.0, 0.0, raw)


def bound_orlicz(
    pair: AbsContPair, mask: EventMask, gamma: float, spec: OrliczSpec
) -> BoundResult:
    """P(E) <= gamma Q(E) + ||1_E||_psi^Q * ||[dP/dQ - gamma]_+||_{psi*}^{A,Q}."""
    q = event_probability(pair.q, mask)
    am = amemiya_norm(pair, gamma, spec)
    params = {"gamma": float(gamma), "amemiya": am, "gauge": spec.name}
    if q == 0.0:
        return BoundResult("orlicz", 0.0, params, notes=("degenerate: Q(E)=0",))
    return BoundResult("orlicz", float(orlicz_core(q, am, gamma, spec)), params)


def bound_orlicz_joint(
    joint: JointFinite,
    mask: EventMask,
    gamma: float,
    psi: OrliczSpec,
    phi: OrliczSpec,
) -> BoundResult:
    """Fiberwise refinement on a joint: inner (per-output) norms over S under
    phi, outer norms over W under psi.  Power-family gauges only.

    The event mask indexes the row-major flattening of the |S| x |W| matrix.
    Zero-mass outputs are skipped and recorded in the notes.
    """
    if psi.kappa is None or phi.kappa is None:
        raise ValidationError("the joint bound supports power-family gauges only")
    n_s, n_w = joint.shape
    if len(mask) != n_s * n_w:
        raise RangeError(f"mask length {len(mask)} != {n_s * n_w}")
    bits = mask.bits.reshape(n_s, n_w)
    ms = joint.matrix.sum(axis=1)
    mw = joint.matrix.sum(axis=0)
    live_w = mw > 0.0
    live_s = ms > 0.0
    notes: tuple[str, ...] = ()
    if not live_w.all():
        notes = (f"skipped zero-mass outputs {np.flatnonzero(~live_w).tolist()}",)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            live_s[:, None] & live_w[None, :],
            joint.matrix / np.where(live_s[:, None] & live_w[None, :],
                                    np.outer(ms, mw), 1.0),
            0.0,
        )
    excess = np.maximum(ratio - gamma, 0.0)

    inner_ind = np.zeros(n_w)
    inner_am = np.zeros(n_w)
    for w in np.flatnonzero(live_w):
        qw = float(ms[bits[:, w]].sum())
        inner_ind[w] = orlicz_indicator_core(qw, phi) if qw > 0 else 0.0
        inner_am[w] = amemiya_norm_values(excess[:, w], ms, phi)

    outer_ind = luxemburg_norm_values(inner_ind[live_w], mw[live_w], psi)
    outer_am = amemiya_norm_values(inner_am[live_w], mw[live_w], psi)
    q_prod = float(np.outer(ms, mw)[bits].sum())
    raw = gamma * q_prod + outer_ind * outer_am
    params = {
        "gamma": float(gamma),
        "outer_indicator_norm": outer_ind,
        "outer_amemiya_norm": outer_am,
        "q_product": q_prod,
    }
    return BoundResult("orlicz_joint", float(raw), params, notes=notes)


# ---------------------------------------------------------------------------
# competitor bounds (prior art, used for dominance comparisons)
# ---------------------------------------------------------------------------


def comp_sq_hellinger_core(q, h2, c=None):
    """Competitor family 1 + c - c(1+c)(1 - H^2)^2 / (q + c) and its closed
    optimum.  Returns (raw, valid): valid requires H^2 <= 1 and
    sqrt(q) <= 1 - H^2."""
    q = np.asarray(q, dtype=float)
    x = 1.0 - np.asarray(h2, dtype=float)
    with np.errstate(invalid="ignore"):
        valid = (x >= 0.0) & (np.sqrt(q) <= x)
        if c is None:
            raw = (np.sqrt(np.maximum(1.0 - x * x, 0.0) * (1.0 - q)) + x * np.sqrt(q)) ** 2
        else:
            raw = 1.0 + c - c * (1.0 + c) * x * x / (q + c)
    return _override(q, raw), valid


def comp_reverse_chi2_core(q, r):
    q = np.asarray(q, dtype=float)
    r = np.broadcast_to(np.asarray(r, dtype=float), q.shape)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)

    def obj(c):
        with np.errstate(over="ignore", invalid="ignore"):
            num = (qs * np.sqrt(c) + (1.0 - qs) * np.sqrt(1.0 + c)) ** 2
            return 1.0 + c - np.where(np.isinf(r), 0.0, num / (1.0 + r))

    c_star, val = golden_min_vec(obj, 1e-12, 1e12, qs.shape)
    return _override(q, val), c_star


def comp_reverse_kl_core(q, d):
    q = np.asarray(q, dtype=float)
    d = np.broadcast_to(np.asarray(d, dtype=float), q.shape)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)

    def obj(c):
        with np.errstate(over="ignore", invalid="ignore"):
            return 1.0 + c - np.exp(qs * np.log(c) + (1.0 - qs) * np.log1p(c) - d)

    c_star, val = golden_min_vec(obj, 1e-12, 1e12, qs.shape)
    return _override(q, val), c_star


def comp_vincze_ac(q, vc, c):
    with np.errstate(over="ignore", invalid="ignore"):
        return (
            2.0 * (1.0 + c)
            - q
            - 4.0 * (q * np.sqrt(c) + (1.0 - q) * np.sqrt(1.0 + c)) ** 2 / (vc + 2.0)
        )


def comp_vincze_core(q, vc):
    """Closed optimizer of the competitor family; degenerates to q at vc = 0."""
    q = np.asarray(q, dtype=float)
    v = np.broadcast_to(np.asarray(vc, dtype=float), q.shape).astype(float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        disc = np.sqrt(v * (v + 8.0 * qs * (1.0 - qs)))
        r_star = (v + 4.0 * qs * (1.0 - qs) - disc) / (4.0 * qs * (1.0 - qs))
        r_star = np.clip(r_star, 1e-16, 1.0 - 1e-16)
        c_star = r_star**2 / (1.0 - r_star**2)
        raw = comp_vincze_ac(qs, v, c_star)
    raw = np.where(v <= 1e-14, qs, raw)
    raw = np.where(np.isinf(v), 2.0 - qs, raw)
    return _override(q, raw), c_star


def comp_power_core(q, h_beta, beta):
    """Competitor with a free shift s, minimized over the real line."""
    q = np.asarray(q, dtype=float)
    qs = np.clip(q, 1e-300, 1.0 - 1e-16)
    rhs = 1.0 + (beta - 1.0) * np.asarray(h_beta, dtype=float)
    amp = np.broadcast_to(rhs ** (1.0 / beta), qs.shape)
    qb = beta / (beta - 1.0)
    log_q = np.log(qs)
    log_1q = np.log1p(-qs)

    def obj(s):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t1 = np.where(s < 1.0, log_q + qb * np.log1p(-np.minimum(s, 1.0 - 1e-300)), -np.inf)
            t2 = np.where(s < 0.0, log_1q + qb * np.log(np.maximum(-s, 1e-300)), -np.inf)
            norm = np.exp(np.logaddexp(t1, t2) / qb)
        return s + amp * norm

    s_star, val = golden_min_vec(obj, -1e8, 1.0 - 1e-9, qs.shape, log_space=False)
    return _override(q, val), s_star


_COMP_ROWS = (
    "kl",
    "chi2",
    "power",
    "squared_hellinger",
    "reverse_chi2",
    "reverse_kl",
    "vincze_lecam",
)


def competitor_bound(
    row: str,
    q: float,
    div: float,
    *,
    c: float | None = None,
    s: float | None = None,
    beta: float | None = None,
) -> BoundResult:
    """Best previously known bound for one divergence row.

    ``div`` is the divergence value matching the row (KL(P||Q), chi^2(P||Q),
    power-beta, squared Hellinger, chi^2(Q||P), D(Q||P), or Vincze-Le Cam).
    Free parameters are optimized when not supplied.
    """
    if row not in _COMP_ROWS:
        raise ValidationError(f"unknown competitor row {row!r}")
    q = _check_q(q)
    div = _check_div(div)
    name = f"competitor_{row}"
    params: dict = {}
    deg = _degenerate(name, q, params)
    if deg:
        return deg

    if row == "kl":
        if c is not None:
            if c <= 0:
                raise RangeError("need c > 0")
            return BoundResult(name, float(kl_fixed_core(q, div, c)), {"c": float(c)})
        raw, c_star = kl_opt_core(np.asarray(q), div)
        return BoundResult(name, float(raw), {"c": float(c_star)})
    if row == "chi2":
        return BoundResult(name, float(chi2_core(q, div)), {})
    if row == "power":
        if beta is None:
            raise RangeError("power row needs beta")
        beta = _check_beta(beta)
        if s is not None:
            val = comp_power_fixed(q, div, beta, s)
            return BoundResult(name, float(val), {"beta": beta, "s": float(s)})
        raw, s_star = comp_power_core(q, div, beta)
        return BoundResult(name, float(raw), {"beta": beta, "s": float(s_star)})
    if row == "squared_hellinger":
        if div > 2.0:
            raise RangeError("squared Hellinger distance must lie in [0, 2]")
        raw, valid = comp_sq_hellinger_core(q, div, c)
        params = {} if c is None else {"c": float(c)}
        return BoundResult(name, float(raw), params, preconditions_met=bool(valid))
    if row == "reverse_chi2":
        if c is not None:
            with np.errstate(over="ignore"):
                num = (q * math.sqrt(c) + (1.0 - q) * math.sqrt(1.0 + c)) ** 2
            val = 1.0 + c - (0.0 if math.isinf(div) else num / (1.0 + div))
            return BoundResult(name, float(val), {"c": float(c)})
        raw, c_star = comp_reverse_chi2_core(np.asarray(q), div)
        return BoundResult(name, float(raw), {"c": float(c_star)})
    if row == "reverse_kl":
        if c is not None:
            val = 1.0 + c - math.exp(q * math.log(c) + (1.0 - q) * math.log1p(c) - div)
            return BoundResult(name, float(val), {"c": float(c)})
        raw, c_star = comp_reverse_kl_core(np.asarray(q), div)
        return BoundResult(name, float(raw), {"c": float(c_star)})
    if row == "vincze_lecam":
        if c is not None:
            return BoundResult(
                name, float(comp_vincze_ac(q, div, c)), {"c": float(c)}
            )
        raw, c_star = comp_vincze_core(np.asarray(q), div)
        return BoundResult(name, float(raw), {"c": float(c_star)})
    raise AssertionError("unreachable")


def comp_power_fixed(q: float, h_beta: float, beta: float, s: float) -> float:
    qb = beta / (beta - 1.0)
    amp = (1.0 + (beta - 1.0) * h_beta) ** (1.0 / beta)
    norm = (
        q * max(1.0 - s, 0.0) ** qb + (1.0 - q) * max(-s, 0.0) ** qb
    ) ** (1.0 / qb)
    return s + amp * norm
