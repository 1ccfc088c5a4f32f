"""Information measures on finite pairs and joints.

Covers the f-divergence family (KL, reverse KL, chi-square, reverse
chi-square, total variation, squared Hellinger, power-beta, hockey-stick,
Vincze-Le Cam), the Renyi divergence with its power-divergence conversion,
Sibson mutual information of any order alpha > 1, maximal leakage, and the
per-output fiber constants used by the leakage-style bounds.

Values are in nats.  Infinities are first-class: a divergence that diverges
(e.g. reverse KL when P kills an atom Q keeps) evaluates to +inf, never NaN,
and never raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optim import logsumexp
from .dist import AbsContPair, JointFinite
from .errors import (
    BoundaryError,
    DegenerateMarginalError,
    RangeError,
    ValidationError,
)

_NON_RENYI = (
    "kl",
    "reverse_kl",
    "chi2",
    "reverse_chi2",
    "tv",
    "squared_hellinger",
    "power",
    "hockey_stick",
    "vincze_lecam",
)


@dataclass(frozen=True)
class DivergenceKind:
    """Tag (plus optional order parameter) selecting an information measure."""

    name: str
    param: float | None = None

    def __post_init__(self) -> None:
        if self.name not in _NON_RENYI and self.name != "renyi":
            raise ValidationError(f"unknown divergence kind {self.name!r}")
        if self.name == "power":
            if self.param is None or not 1.0 < self.param <= 50.0:
                raise RangeError("power kind requires beta in (1, 50]")
        elif self.name == "renyi":
            if self.param is None or self.param <= 0 or self.param == 1.0:
                raise RangeError("renyi kind requires alpha in (0, inf) \\ {1}")
        elif self.name == "hockey_stick":
            if self.param is None or not math.isfinite(self.param):
                raise RangeError("hockey_stick kind requires a finite gamma")
        elif self.param is not None:
            raise ValidationError(f"kind {self.name!r} takes no parameter")

    def __str__(self) -> str:
        if self.param is None:
            return self.name
        return f"{self.name}({self.param:g})"


KL = DivergenceKind("kl")
REVERSE_KL = DivergenceKind("reverse_kl")
CHI2 = DivergenceKind("chi2")
REVERSE_CHI2 = DivergenceKind("reverse_chi2")
TV = DivergenceKind("tv")
SQUARED_HELLINGER = DivergenceKind("squared_hellinger")
VINCZE_LECAM = DivergenceKind("vincze_lecam")


def power_kind(beta: float) -> DivergenceKind:
    return DivergenceKind("power", float(beta))


def hockey_stick_kind(gamma: float) -> DivergenceKind:
    return DivergenceKind("hockey_stick", float(gamma))


def renyi_kind(alpha: float) -> DivergenceKind:
    return DivergenceKind("renyi", float(alpha))


@dataclass(frozen=True)
class DivergenceValue:
    kind: DivergenceKind
    value: float


def generator_values(kind: DivergenceKind, t) -> np.ndarray:
    """Evaluate the convex generator f on t >= 0, with f(0) = lim f.

    Entries where the limit diverges come back as +inf.
    """
    t = np.asarray(t, dtype=float)
    name, par = kind.name, kind.param
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if name == "kl":
            return np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)
        if name == "reverse_kl":
            return np.where(t > 0, -np.log(np.where(t > 0, t, 1.0)), np.inf)
        if name == "chi2":
            return t * t - 1.0
        if name == "reverse_chi2":
            return np.where(t > 0, 1.0 / np.where(t > 0, t, 1.0) - 1.0, np.inf)
        if name == "tv":
            return 0.5 * np.abs(t - 1.0)
        if name == "squared_hellinger":
            return (1.0 - np.sqrt(t)) ** 2
        if name == "power":
            return (np.power(t, par) - 1.0) / (par - 1.0)
        if name == "hockey_stick":
            return np.maximum(t - par, 0.0)
        if name == "vincze_lecam":
            return (2.0 - 2.0 * t) / (t + 1.0)
    raise ValidationError(f"{kind} has no pointwise generator")


def generator_derivative(kind: DivergenceKind, t: float) -> float:
    """Closed-form f'(t) for t > 0 (subgradient 0 at the TV kink)."""
    name, par = kind.name, kind.param
    if t <= 0:
        raise RangeError("generator derivative needs t > 0")
    if name == "kl":
        return math.log(t) + 1.0
    if name == "reverse_kl":
        return -1.0 / t
    if name == "chi2":
        return 2.0 * t
    if name == "reverse_chi2":
        return -1.0 / (t * t)
    if name == "tv":
        return 0.0 if t == 1.0 else (0.5 if t > 1.0 else -0.5)
    if name == "squared_hellinger":
        return 1.0 - 1.0 / math.sqrt(t)
    if name == "power":
        return par * t ** (par - 1.0) / (par - 1.0)
    if name == "hockey_stick":
        return 0.0 if t < par else 1.0
    if name == "vincze_lecam":
        return -4.0 / (1.0 + t) ** 2
    raise ValidationError(f"{kind} has no pointwise generator")


def generator_lipschitz(kind: DivergenceKind, gamma: float) -> float | None:
    """Lipschitz constant of f' on [gamma, inf), or None if unbounded/kinked."""
    name, par = kind.name, kind.param
    if gamma <= 0:
        raise RangeError("need gamma > 0")
    if name == "kl":
        return 1.0 / gamma
    if name == "reverse_kl":
        return 1.0 / gamma**2
    if name == "chi2":
        return 2.0
    if name == "reverse_chi2":
        return 2.0 / gamma**3
    if name == "squared_hellinger":
        return 0.5 * gamma**-1.5
    if name == "power":
        if par <= 2.0:
            return par * gamma ** (par - 2.0)
        return None  # f'' grows without bound
    if name == "vincze_lecam":
        return 8.0 / (1.0 + gamma) ** 3
    return None  # tv / hockey_stick have kinks


def f_divergence_from_ratios(
    ratios: np.ndarray, q: np.ndarray, kind: DivergenceKind
) -> np.ndarray:
    """sum_i f(r_i) q_i along the last axis; supports batched inputs."""
    if kind.name == "renyi":
        raise ValidationError("use renyi() for Renyi divergences")
    vals = generator_values(kind, ratios)
    with np.errstate(invalid="ignore"):
        terms = np.where(q > 0, vals * q, 0.0)
    # 0 * inf at q == 0 must vanish, inf at q > 0 must survive
    inf_mask = np.isinf(vals) & (q > 0)
    out = terms.sum(axis=-1)
    if np.any(inf_mask):
        out = np.where(inf_mask.any(axis=-1), np.inf, out)
    return out


def f_divergence(pair: AbsContPair, kind: DivergenceKind) -> DivergenceValue:
    """D_f(P || Q) = sum_i f(dP/dQ)_i Q_i over the atoms with Q_i > 0."""
    value = float(f_divergence_from_ratios(pair.ratios, pair.q.probs, kind))
    return DivergenceValue(kind, value)


def binary_f_divergence(p: float, q: float, kind: DivergenceKind) -> float:
    """Two-point divergence D_f(Ber(p) || Ber(q)) for q in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise BoundaryError("binary divergence needs q in (0, 1)")
    if not 0.0 <= p <= 1.0:
        raise RangeError("p must lie in [0, 1]")
    ratios = np.array([p / q, (1.0 - p) / (1.0 - q)])
    masses = np.array([q, 1.0 - q])
    return float(f_divergence_from_ratios(ratios, masses, kind))


def bernoulli_kl(a: float, b: float) -> float:
    """kl(a, b) = a log(a/b) + (1-a) log((1-a)/(1-b)), with 0 log 0 = 0."""
    if not 0.0 <= a <= 1.0 or not 0.0 < b < 1.0:
        raise RangeError("need a in [0,1], b in (0,1)")
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return out


def renyi(pair: AbsContPair, alpha: float) -> float:
    """Renyi divergence D_alpha = log(sum r^alpha Q) / (alpha - 1), in nats."""
    if alpha <= 0 or alpha == 1.0:
        raise RangeError("Renyi order must be in (0, inf) \\ {1}")
    r, q = pair.ratios, pair.q.probs
    mask = (r > 0) & (q > 0)
    if not mask.any():
        return math.inf if alpha > 1 else math.inf
    with np.errstate(divide="ignore"):
        log_terms = alpha * np.log(r[mask]) + np.log(q[mask])
    total = logsumexp(log_terms)
    return float(total / (alpha - 1.0))


def binary_renyi(p: float, q: float, alpha: float) -> float:
    """D_alpha(Ber(p) || Ber(q))."""
    if not 0.0 < q < 1.0:
        raise BoundaryError("binary divergence needs q in (0, 1)")
    if alpha <= 0 or alpha == 1.0:
        raise RangeError("Renyi order must be in (0, inf) \\ {1}")
    terms = []
    if p > 0:
        terms.append(alpha * math.log(p) + (1.0 - alpha) * math.log(q))
    if p < 1:
        terms.append(alpha * math.log(1.0 - p) + (1.0 - alpha) * math.log(1.0 - q))
    return logsumexp(np.array(terms)) / (alpha - 1.0)


def hellinger_to_renyi(h_beta: float, beta: float) -> float:
    """Convert the power-beta divergence value to Renyi of the same order."""
    if beta <= 1.0:
        raise RangeError("need beta > 1")
    if h_beta < 0:
        raise RangeError("divergence must be nonnegative")
    return math.log1p((beta - 1.0) * h_beta) / (beta - 1.0)


def renyi_to_hellinger(d_alpha: float, alpha: float) -> float:
    """Inverse of :func:`hellinger_to_renyi`."""
    if alpha <= 1.0:
        raise RangeError("need alpha > 1")
    return math.expm1((alpha - 1.0) * d_alpha) / (alpha - 1.0)


def mutual_information(joint: JointFinite) -> float:
    """I(S; W) = KL(P_SW || P_S P_W)."""
    from .dist import product_pair

    return f_divergence(product_pair(joint), KL).value


def sibson_mi(joint: JointFinite, alpha: float) -> float:
    """Sibson alpha-mutual-information, alpha in (1, inf].

    Uses the closed-form optimizer of the defining minimum over output
    marginals,

        I_alpha = alpha/(alpha-1) * log sum_w (sum_s P_S(s) P(w|s)^alpha)^(1/alpha),

    which the test suite proves against direct grid minimization rather than
    taking on faith.  alpha = inf gives maximal leakage.
    """
    if alpha == math.inf:
        return maximal_leakage(joint)
    if alpha <= 1.0:
        raise RangeError("sibson_mi needs alpha in (1, inf]")
    cond = joint.conditional_w_given_s()  # raises on zero-mass rows
    ms = joint.matrix.sum(axis=1)
    if np.any(ms == 0.0):
        raise DegenerateMarginalError("marginal of S must be strictly positive")
    with np.errstate(divide="ignore"):
        log_cond = np.log(cond)
        log_ms = np.log(ms)
    inner = logsumexp(log_ms[:, None] + alpha * log_cond, axis=0) / alpha
    return float(alpha / (alpha - 1.0) * logsumexp(inner))


def maximal_leakage(joint: JointFinite) -> float:
    """log sum_w max_s P(w | s): the order-infinity Sibson information."""
    cond = joint.conditional_w_given_s()
    return float(np.log(cond.max(axis=0).sum()))


def fiber_constants(joint: JointFinite, alpha: float = math.inf) -> np.ndarray:
    """Per-output constants of the posterior-to-prior ratio dP_{S|W=w}/dP_S.

    alpha = inf gives M(w), the essential sup of the ratio; finite alpha > 1
    gives the alpha-norm M_alpha(w) = (E_{P_S}[ratio^alpha])^(1/alpha).
    E_{P_W}[M(W)] equals exp(maximal leakage).
    """
    if alpha != math.inf and alpha <= 1.0:
        raise RangeError("fiber constants need alpha in (1, inf]")
    mw = joint.matrix.sum(axis=0)
    if np.any(mw == 0.0):
        dead = np.flatnonzero(mw == 0.0).tolist()
        raise DegenerateMarginalError(f"zero-mass outputs {dead}")
    ms = joint.matrix.sum(axis=1)
    live = ms > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = joint.matrix[live] / (ms[live][:, None] * mw[None, :])
    if alpha == math.inf:
        return ratio.max(axis=0)
    with np.errstate(divide="ignore"):
        logs = np.log(ms[live])[:, None] + alpha * np.log(ratio)
    return np.exp(logsumexp(logs, axis=0) / alpha)
