"""Exact verification harness: exhaustive-event oracles for every bound.

The defining contract of a change-of-measure bound is P(E) <= xi(Q(E), dP/dQ)
for *every* event E.  On supports of size n <= 16 that is checkable by brute
force: enumerate all 2^n events, evaluate the bound, and record the worst
slack.  This module implements that oracle, a seeded random-pair generator,
the variational identities, the mixture tightness witness, the dominance
comparisons, and a deliberately broken bound used as a negative control of
the harness itself.

Trials are reproducible: pair i of a suite with seed s draws from the RNG
stream seeded by (s, i), so any violation report pins down its instance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds as B
from ._optim import logsumexp
from .dist import (
    AbsContPair,
    FiniteDistribution,
    JointFinite,
    event_mask_matrix,
)
from .divergences import (
    CHI2,
    KL,
    REVERSE_CHI2,
    REVERSE_KL,
    SQUARED_HELLINGER,
    VINCZE_LECAM,
    DivergenceKind,
    f_divergence_from_ratios,
    generator_derivative,
    generator_values,
    hockey_stick_kind,
    power_kind,
)
from .errors import RangeError, ResourceError, UnknownBoundError, ValidationError
from .orlicz import OrliczSpec, power_orlicz

SLACK_TOL = 1e-9
EXHAUSTIVE_LIMIT = 16
SAMPLED_EVENTS = 100_000


# ---------------------------------------------------------------------------
# seeded instance generation
# ---------------------------------------------------------------------------


def random_pair(seed, index: int, support: int, zero_prob: float = 0.2) -> AbsContPair:
    """Reproducible random pair: Dirichlet-style masses from normalized
    exponentials of seeded uniforms; with probability `zero_prob` a strict
    subset of P's atoms is zeroed to exercise the f(0) conventions."""
    rng = np.random.default_rng((seed, index))
    q = -np.log(rng.random(support))
    p = -np.log(rng.random(support))
    if rng.random() < zero_prob:
        n_zero = int(rng.integers(1, support))
        dead = rng.choice(support, size=n_zero, replace=False)
        p[dead] = 0.0
    q /= q.sum()
    q[int(np.argmax(q))] += 1.0 - q.sum()
    p /= p.sum()
    p[int(np.argmax(p))] += 1.0 - p.sum()
    return AbsContPair(FiniteDistribution(p), FiniteDistribution(q))


def random_joint(seed, index: int, n_s: int, n_w: int) -> JointFinite:
    rng = np.random.default_rng((seed, index))
    m = -np.log(rng.random((n_s, n_w)))
    return JointFinite(m / m.sum())


# ---------------------------------------------------------------------------
# batched pair context
# ---------------------------------------------------------------------------


class PairBatch:
    """Vectorized view of several pairs against a shared event-mask matrix."""

    def __init__(self, p: np.ndarray, q: np.ndarray, masks: np.ndarray) -> None:
        self.p = p
        self.q = q
        with np.errstate(divide="ignore", invalid="ignore"):
            self.r = np.where(q > 0.0, p / np.where(q > 0.0, q, 1.0), 0.0)
        mf = masks.astype(float)
        self.masks = masks
        self.p_events = p @ mf.T
        self.q_events = q @ mf.T
        self._div_cache: dict = {}
        self._case_cache: dict = {}

    @classmethod
    def from_pairs(cls, pairs: list[AbsContPair], masks: np.ndarray) -> "PairBatch":
        p = np.stack([pr.p.probs for pr in pairs])
        q = np.stack([pr.q.probs for pr in pairs])
        return cls(p, q, masks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p_events.shape  # (batch, events)

    def div(self, kind: DivergenceKind) -> np.ndarray:
        """Column vector (batch, 1) of divergence values for broadcasting."""
        key = (kind.name, kind.param)
        if key not in self._div_cache:
            vals = f_divergence_from_ratios(self.r, self.q, kind)
            self._div_cache[key] = np.atleast_1d(vals).reshape(-1, 1)
        return self._div_cache[key]


def _amemiya_batch(u: np.ndarray, w: np.ndarray, spec: OrliczSpec) -> np.ndarray:
    """Row-wise Amemiya norms (wrt the conjugate gauge) of (batch, n) data."""
    live = (u > 0) & (w > 0)
    any_live = live.any(axis=1)
    u = np.where(live, u, 0.0)

    def obj(t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(spec.conjugate(t[:, None] * u), dtype=float)
            vals = np.where(live, vals, 0.0)
            return ((vals * w).sum(axis=1) + 1.0) / t

    from ._optim import golden_min_vec

    _, best = golden_min_vec(obj, 1e-12, 1e12, (u.shape[0],))
    return np.where(any_live, best, 0.0)


# ---------------------------------------------------------------------------
# bound registry
# ---------------------------------------------------------------------------

Evaluator = Callable[..., tuple[np.ndarray, np.ndarray | None]]
_REGISTRY: dict[str, Evaluator] = {}
NEGATIVE_CONTROLS = frozenset({"chi2_missing_sqrt"})


def _register(name: str):
    def deco(fn: Evaluator) -> Evaluator:
        _REGISTRY[name] = fn
        return fn

    return deco


def registered_bounds() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


@_register("egamma")
def _ev_egamma(b: PairBatch, gamma: float):
    return B.egamma_core(b.q_events, b.div(hockey_stick_kind(gamma)), gamma), None


@_register("strong_converse")
def _ev_strong_converse(b: PairBatch, gamma: float):
    tail = ((b.r > gamma) * b.p).sum(axis=1, keepdims=True)
    return B.strong_converse_core(b.q_events, tail, gamma), None


@_register("chi2")
def _ev_chi2(b: PairBatch):
    return B.chi2_core(b.q_events, b.div(CHI2)), None


def _kl_opt_cached(b: PairBatch) -> np.ndarray:
    if "kl_opt" not in b._case_cache:
        b._case_cache["kl_opt"] = B.kl_opt_core(b.q_events, b.div(KL))[0]
    return b._case_cache["kl_opt"]


@_register("kl")
def _ev_kl(b: PairBatch):
    return _kl_opt_cached(b), None


@_register("kl_closed")
def _ev_kl_closed(b: PairBatch):
    return B.kl_closed_core(b.q_events, b.div(KL)), None


@_register("hellinger")
def _ev_hellinger(b: PairBatch):
    return B.hellinger_core(b.q_events, b.div(SQUARED_HELLINGER)), None


@_register("power_implicit")
def _ev_power_implicit(b: PairBatch, beta: float):
    return B.power_implicit_core(b.q_events, b.div(power_kind(beta)), beta), None


@_register("power_qmax")
def _ev_power_qmax(b: PairBatch, beta: float):
    raw, _m, valid = B.power_qmax_core(
        b.q_events, b.div(power_kind(beta)), beta, np.clip(b.q_events, 1e-300, 1 - 1e-12)
    )
    return raw, valid & (b.q_events < 1.0)


@_register("power_small_q")
def _ev_power_small_q(b: PairBatch, beta: float):
    raw, _u0 = B.power_small_q_core(b.q_events, b.div(power_kind(beta)), beta)
    return raw, None


_F_KINDS = {
    "chi2": CHI2,
    "kl": KL,
    "squared_hellinger": SQUARED_HELLINGER,
    "reverse_kl": REVERSE_KL,
    "vincze_lecam": VINCZE_LECAM,
}


@_register("f_from_egamma")
def _ev_f_from_egamma(b: PairBatch, kind: str, gamma: float, lipschitz: float | None = None):
    k = _F_KINDS[kind]
    gamma_eff = gamma
    if lipschitz is not None:
        f_at = float(generator_values(k, np.asarray(gamma)))
        tilde = f_at - generator_derivative(k, 1.0) * (gamma - 1.0)
        gamma_eff = gamma + math.sqrt(max(2.0 * tilde / lipschitz, 0.0))
    gap = generator_derivative(k, gamma_eff) - generator_derivative(k, 1.0)
    if gap <= 0.0:
        raw = np.full(b.shape, np.inf)
        return raw, np.zeros(b.shape, dtype=bool)
    return B.f_hs_core(b.q_events, b.div(k), gamma, gap), None


@_register("orlicz")
def _ev_orlicz(b: PairBatch, kappa: float, gamma: float):
    spec = power_orlicz(kappa)
    excess = np.maximum(b.r - gamma, 0.0)
    am = _amemiya_batch(excess, b.q, spec)
    return B.orlicz_core(b.q_events, am[:, None], gamma, spec), None


@_register("reverse_chi2")
def _ev_reverse_chi2(b: PairBatch):
    return B.reverse_chi2_core(b.q_events, b.div(REVERSE_CHI2)), None


@_register("reverse_kl_exact")
def _ev_reverse_kl_exact(b: PairBatch):
    return B.reverse_kl_exact_core(b.q_events, b.div(REVERSE_KL)), None


@_register("reverse_kl_explicit")
def _ev_reverse_kl_explicit(b: PairBatch):
    return B.reverse_kl_explicit_core(b.q_events, b.div(REVERSE_KL)), None


@_register("vincze_lecam")
def _ev_vincze(b: PairBatch):
    return B.vincze_core(b.q_events, b.div(VINCZE_LECAM)), None


@_register("competitor_kl")
def _ev_comp_kl(b: PairBatch):
    # identical formula to ours; reuse the cached optimization
    return _kl_opt_cached(b), None


@_register("competitor_chi2")
def _ev_comp_chi2(b: PairBatch):
    return B.chi2_core(b.q_events, b.div(CHI2)), None


@_register("competitor_power")
def _ev_comp_power(b: PairBatch, beta: float):
    raw, _ = B.comp_power_core(b.q_events, b.div(power_kind(beta)), beta)
    return raw, None


@_register("competitor_squared_hellinger")
def _ev_comp_hellinger(b: PairBatch):
    raw, valid = B.comp_sq_hellinger_core(b.q_events, b.div(SQUARED_HELLINGER))
    return raw, valid


@_register("competitor_reverse_chi2")
def _ev_comp_reverse_chi2(b: PairBatch):
    raw, _ = B.comp_reverse_chi2_core(b.q_events, b.div(REVERSE_CHI2))
    return raw, None


@_register("competitor_reverse_kl")
def _ev_comp_reverse_kl(b: PairBatch):
    raw, _ = B.comp_reverse_kl_core(b.q_events, b.div(REVERSE_KL))
    return raw, None


@_register("competitor_vincze_lecam")
def _ev_comp_vincze(b: PairBatch):
    raw, _ = B.comp_vincze_core(b.q_events, b.div(VINCZE_LECAM))
    return raw, None


@_register("chi2_missing_sqrt")
def _ev_chi2_broken(b: PairBatch):
    # deliberately wrong (sqrt dropped): negative control for the harness
    q = b.q_events
    return q + q * (1.0 - q) * b.div(CHI2), None


def default_cases() -> list[tuple[str, dict]]:
    """The master-suite grid: every registered bound at its default params."""
    gammas_hs = (0.5, 1.0, 2.0, 5.0)
    gammas_f = (1.5, 2.0, 5.0)
    betas = (1.5, 2.0, 4.0)
    kappas = (1.5, 2.0, 4.0)
    cases: list[tuple[str, dict]] = []
    cases += [("egamma", {"gamma": g}) for g in gammas_hs]
    cases += [("strong_converse", {"gamma": g}) for g in gammas_hs]
    cases += [("chi2", {}), ("kl", {}), ("kl_closed", {}), ("hellinger", {})]
    for beta in betas:
        cases += [
            ("power_implicit", {"beta": beta}),
            ("power_qmax", {"beta": beta}),
            ("power_small_q", {"beta": beta}),
        ]
    for kind in ("chi2", "kl", "squared_hellinger"):
        cases += [("f_from_egamma", {"kind": kind, "gamma": g}) for g in gammas_f]
    cases += [("f_from_egamma", {"kind": "chi2", "gamma": g, "lipschitz": 2.0}) for g in gammas_f]
    for kappa in kappas:
        cases += [("orlicz", {"kappa": kappa, "gamma": g}) for g in (0.0, 1.0, 2.0)]
    cases += [
        ("reverse_chi2", {}),
        ("reverse_kl_exact", {}),
        ("reverse_kl_explicit", {}),
        ("vincze_lecam", {}),
        ("competitor_kl", {}),
        ("competitor_chi2", {}),
        ("competitor_squared_hellinger", {}),
        ("competitor_reverse_chi2", {}),
        ("competitor_reverse_kl", {}),
        ("competitor_vincze_lecam", {}),
    ]
    cases += [("competitor_power", {"beta": beta}) for beta in betas]
    return cases


def case_label(bound_id: str, params: dict) -> str:
    if not params:
        return bound_id
    inner = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(params.items()))
    return f"{bound_id}[{inner}]"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    """Outcome of checking one bound against enumerated events."""

    bound: str
    trials: int = 0
    violations: int = 0
    worst_slack: float = math.inf
    seed: int | None = None
    witness: dict | None = None

    def absorb(
        self,
        slack: np.ndarray,
        valid: np.ndarray | None,
        pair_indices: np.ndarray,
        extras: dict | None = None,
    ) -> None:
        if valid is None:
            valid = np.ones(slack.shape, dtype=bool)
        valid = np.broadcast_to(valid, slack.shape)
        n_valid = int(valid.sum())
        self.trials += n_valid
        if n_valid == 0:
            return
        slack_v = np.where(valid, slack, np.inf)
        self.violations += int((slack_v < -SLACK_TOL).sum())
        flat = int(np.argmin(slack_v))
        i, j = np.unravel_index(flat, slack.shape)
        worst = float(slack_v[i, j])
        if worst < self.worst_slack:
            self.worst_slack = worst
            self.witness = {
                "pair_index": int(pair_indices[i]),
                "event_code": int(j),
                "slack": worst,
            }
            if extras:
                self.witness.update(extras)

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        if other.trials == 0:
            return self
        if self.trials == 0:
            self.trials = other.trials
            self.violations = other.violations
            self.worst_slack = other.worst_slack
            self.witness = other.witness
            return self
        self.trials += other.trials
        self.violations += other.violations
        if other.worst_slack < self.worst_slack:
            self.worst_slack = other.worst_slack
            self.witness = other.witness
        return self

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "trials": self.trials,
            "violations": self.violations,
            "worst_slack": None if math.isinf(self.worst_slack) else self.worst_slack,
            "seed": self.seed,
            "witness": self.witness,
        }


def _evaluate_cases(
    batch: PairBatch,
    cases: list[tuple[str, dict]],
    pair_indices: np.ndarray,
    seed: int | None,
) -> dict[str, VerificationReport]:
    out: dict[str, VerificationReport] = {}
    for bound_id, params in cases:
        if bound_id not in _REGISTRY:
            raise UnknownBoundError(bound_id)
        values, valid = _REGISTRY[bound_id](batch, **params)
        values = np.broadcast_to(np.asarray(values, dtype=float), batch.shape)
        with np.errstate(invalid="ignore"):
            slack = values - batch.p_events
        slack = np.where(np.isnan(slack), np.inf, slack)  # inf bound is sound
        label = case_label(bound_id, params)
        rep = out.setdefault(label, VerificationReport(label, seed=seed))
        rep.absorb(slack, valid, pair_indices)
    return out


def verify_com_bound(
    pair: AbsContPair,
    bound_id: str,
    params: dict | None = None,
    *,
    seed: int = 0,
) -> VerificationReport:
    """Check one bound against every event of one pair (exhaustive up to
    support 16, seeded uniform event sampling beyond)."""
    if bound_id not in _REGISTRY:
        raise UnknownBoundError(bound_id)
    n = pair.size
    if n <= EXHAUSTIVE_LIMIT:
        masks = event_mask_matrix(n)
    else:
        rng = np.random.default_rng(seed)
        masks = rng.random((SAMPLED_EVENTS, n)) < 0.5
        masks[0] = False
        masks[1] = True
    batch = PairBatch.from_pairs([pair], masks)
    reports = _evaluate_cases(batch, [(bound_id, params or {})], np.array([0]), seed)
    return next(iter(reports.values()))


def master_soundness(
    n_pairs: int = 10_000,
    support: int = 8,
    seed: int = 42,
    cases: list[tuple[str, dict]] | None = None,
    jobs: int = 1,
    batch_size: int = 500,
) -> dict[str, VerificationReport]:
    """The master suite: seeded random pairs x all events x all bounds."""
    if support > EXHAUSTIVE_LIMIT:
        raise ResourceError("master suite is exhaustive; support must be <= 16")
    cases = default_cases() if cases is None else cases
    chunks = [
        (seed, start, min(batch_size, n_pairs - start), support, cases)
        for start in range(0, n_pairs, batch_size)
    ]
    merged: dict[str, VerificationReport] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_master_chunk, chunks)
            for part in parts:
                _merge_into(merged, part)
    else:
        for chunk in chunks:
            _merge_into(merged, _master_chunk(chunk))
    return merged


def _master_chunk(args) -> dict[str, VerificationReport]:
    seed, start, count, support, cases = args
    indices = np.arange(start, start + count)
    pairs = [random_pair(seed, int(i), support) for i in indices]
    batch = PairBatch.from_pairs(pairs, event_mask_matrix(support))
    return _evaluate_cases(batch, cases, indices, seed)


def _merge_into(acc: dict[str, VerificationReport], part: dict[str, VerificationReport]) -> None:
    for key, rep in part.items():
        if key in acc:
            acc[key].merge(rep)
        else:
            acc[key] = rep


# ---------------------------------------------------------------------------
# variational identities and other oracles
# ---------------------------------------------------------------------------


def verify_egamma_variational(pair: AbsContPair, gamma: float) -> dict:
    """Exhaustively check sup_E (P(E) - gamma Q(E)) against the integral
    sum_i [r_i - gamma]_+ Q_i; also reports the absolute-value supremum."""
    n = pair.size
    if n > EXHAUSTIVE_LIMIT:
        raise ResourceError("variational check is exhaustive; support <= 16")
    masks = event_mask_matrix(n).astype(float)
    p_e = pair.p.probs @ masks.T
    q_e = pair.q.probs @ masks.T
    signed = p_e - gamma * q_e
    integral = float(np.maximum(pair.ratios - gamma, 0.0) @ pair.q.probs)
    best = int(np.argmax(signed))
    return {
        "gamma": gamma,
        "signed_sup": float(signed.max()),
        "integral": integral,
        "abs_sup": float(np.abs(signed).max()),
        "gap": float(signed.max() - integral),
        "witness_event": best,
    }


def approx_max_info(pair: AbsContPair, tau: float) -> float:
    """log sup over events with P(E) > tau of (P(E) - tau) / Q(E), by
    exhaustive enumeration."""
    if not 0.0 <= tau < 1.0:
        raise RangeError("tau must lie in [0, 1)")
    n = pair.size
    if n > EXHAUSTIVE_LIMIT:
        raise ResourceError("approximate max-information is exhaustive; support <= 16")
    masks = event_mask_matrix(n).astype(float)
    p_e = pair.p.probs @ masks.T
    q_e = pair.q.probs @ masks.T
    hot = p_e > tau
    if not hot.any():
        return -math.inf
    with np.errstate(divide="ignore"):
        ratio = np.where(q_e[hot] > 0, (p_e[hot] - tau) / np.where(q_e[hot] > 0, q_e[hot], 1.0), np.inf)
    return float(np.log(ratio.max()))


def binary_tightness_witness(
    p: float, q: float, atoms_per_block: int, seed: int = 0
) -> AbsContPair:
    """Mixture pair P = p R1 + (1-p) R0, Q = q R1 + (1-q) R0 with R1, R0 on
    disjoint atom blocks.  Its ratio is two-valued, so every divergence of
    the pair equals the corresponding two-point divergence at (p, q)."""
    if not 0.0 < p < 1.0 or not 0.0 < q < 1.0:
        raise RangeError("need p, q in (0, 1)")
    if atoms_per_block < 1:
        raise RangeError("need at least one atom per block")
    rng = np.random.default_rng(seed)
    r1 = -np.log(rng.random(atoms_per_block))
    r0 = -np.log(rng.random(atoms_per_block))
    r1 /= r1.sum()
    r0 /= r0.sum()
    pv = np.concatenate([p * r1, (1.0 - p) * r0])
    qv = np.concatenate([q * r1, (1.0 - q) * r0])
    pv[int(np.argmax(pv))] += 1.0 - pv.sum()
    qv[int(np.argmax(qv))] += 1.0 - qv.sum()
    return AbsContPair(FiniteDistribution(pv), FiniteDistribution(qv))


def sibson_grid_min(
    joint: JointFinite,
    alpha: float,
    resolution: float = 1e-3,
    refine: int = 2,
    shrink: float = 20.0,
) -> float:
    """Direct grid minimization of the order-alpha divergence over output
    marginals: the independent oracle for the Sibson closed form.

    Scans the whole simplex at `resolution`, then zooms `refine` times around
    the incumbent, shrinking the step by `shrink` each time.  Supports
    |W| in {2, 3}.
    """
    if alpha <= 1.0:
        raise RangeError("need alpha > 1")
    n_w = joint.shape[1]
    if n_w not in (2, 3):
        raise ValidationError("grid oracle supports 2 or 3 outputs")
    ms = joint.matrix.sum(axis=1)
    with np.errstate(divide="ignore"):
        log_c = logsumexp(
            alpha * np.log(joint.matrix) + (1.0 - alpha) * np.log(ms)[:, None],
            axis=0,
        )

    def objective(qw: np.ndarray) -> np.ndarray:
        bad = (qw <= 0.0).any(axis=1)
        safe = np.where(qw > 0.0, qw, 1.0)
        terms = log_c[None, :] + (1.0 - alpha) * np.log(safe)
        m = terms.max(axis=1, keepdims=True)
        val = (np.log(np.exp(terms - m).sum(axis=1)) + m[:, 0]) / (alpha - 1.0)
        return np.where(bad, math.inf, val)

    def grid_around(center: np.ndarray, half_width: float, step: float) -> np.ndarray:
        axes = [
            np.arange(
                max(0.0, c - half_width), min(1.0, c + half_width) + step / 2, step
            )
            for c in center[:-1]
        ]
        if n_w == 2:
            x = axes[0]
            pts = np.stack([x, 1.0 - x], axis=1)
        else:
            xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
            x = xx.ravel()
            y = yy.ravel()
            keep = x + y <= 1.0 + 1e-15
            pts = np.stack([x[keep], y[keep], 1.0 - x[keep] - y[keep]], axis=1)
        return np.clip(pts, 0.0, 1.0)

    step = resolution
    center = np.full(n_w, 1.0 / n_w)
    half = 1.0
    best = math.inf
    for _ in range(refine + 1):
        pts = grid_around(center, half, step)
        vals = objective(pts)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            center = pts[i]
        half = 2.0 * step
        step = step / shrink
    return best


def dominance_report(pair: AbsContPair, tol: float = 1e-10) -> list[dict]:
    """Ours-vs-competitor comparison per divergence row, over all events.

    Claims: "same" rows must agree to 1e-12, "ours" rows must never exceed
    the competitor by more than `tol`, the power row is reported without a
    claim.  Rows with infinite divergence are marked not applicable.
    """
    n = pair.size
    if n > EXHAUSTIVE_LIMIT:
        raise ResourceError("dominance report is exhaustive; support <= 16")
    batch = PairBatch.from_pairs([pair], event_mask_matrix(n))
    rows = []

    def finite(kind):
        return bool(np.isfinite(batch.div(kind))[0, 0])

    def row(name, ours, comp, valid, claim, div_value):
        ours = np.asarray(ours, dtype=float).ravel()
        comp = np.asarray(comp, dtype=float).ravel()
        if valid is None:
            valid = np.ones(ours.shape, dtype=bool)
        else:
            valid = np.asarray(valid, dtype=bool).ravel()
        diff = ours - comp
        n_valid = int(valid.sum())
        entry = {
            "row": name,
            "claim": claim,
            "applicable": True,
            "events": n_valid,
            "divergence": div_value,
            "max_ours_minus_competitor": float(diff[valid].max()) if n_valid else None,
            "ours_tighter_or_equal": int(((diff <= tol) & valid).sum()),
        }
        rows.append(entry)

    # KL and chi2: identical formulas
    d_kl = float(batch.div(KL)[0, 0])
    ours_kl, _ = B.kl_opt_core(batch.q_events, d_kl)
    row("kl", ours_kl, ours_kl.copy(), None, "same", d_kl)
    d_c2 = float(batch.div(CHI2)[0, 0])
    c2 = B.chi2_core(batch.q_events, d_c2)
    row("chi2", c2, c2.copy(), None, "same", d_c2)

    d_pow = float(batch.div(power_kind(2.0))[0, 0])
    ours_pow = B.power_small_q_core(batch.q_events, d_pow, 2.0)[0]
    comp_pow, _ = B.comp_power_core(batch.q_events, d_pow, 2.0)
    row("power", ours_pow, comp_pow, None, "incomparable", d_pow)

    d_h2 = float(batch.div(SQUARED_HELLINGER)[0, 0])
    ours_h = B.hellinger_core(batch.q_events, d_h2)
    comp_h, valid_h = B.comp_sq_hellinger_core(batch.q_events, d_h2)
    row("squared_hellinger", ours_h, comp_h, valid_h, "ours", d_h2)

    for name, kind, ours_core, comp_core in (
        ("reverse_chi2", REVERSE_CHI2, B.reverse_chi2_core, B.comp_reverse_chi2_core),
        ("reverse_kl", REVERSE_KL, B.reverse_kl_exact_core, B.comp_reverse_kl_core),
        ("vincze_lecam", VINCZE_LECAM, B.vincze_core, B.comp_vincze_core),
    ):
        d = float(batch.div(kind)[0, 0])
        if not math.isfinite(d):
            rows.append(
                {
                    "row": name,
                    "claim": "ours",
                    "applicable": False,
                    "events": 0,
                    "divergence": None,
                    "max_ours_minus_competitor": None,
                    "ours_tighter_or_equal": 0,
                }
            )
            continue
        ours = ours_core(batch.q_events, d)
        comp = comp_core(batch.q_events, d)[0]
        row(name, ours, comp, None, "ours", d)
    return rows


def dominance_rows_at_event(pair: AbsContPair, mask) -> list[dict]:
    """Ours vs competitor vs the true P(E) for one event, one row per
    divergence family."""
    from .dist import event_probability

    p = event_probability(pair.p, mask)
    q = event_probability(pair.q, mask)
    rows = []

    def push(name, div_value, ours, comp, claim, applicable=None):
        if applicable is None:
            applicable = math.isfinite(div_value)
        if not applicable:
            rows.append(
                {"row": name, "divergence": div_value if math.isfinite(div_value) else None,
                 "p": p, "q": q, "ours": None, "competitor": None, "tighter": None,
                 "claim": claim, "applicable": False}
            )
            return
        ours_v = float(np.asarray(ours).reshape(()))
        comp_v = float(np.asarray(comp).reshape(()))
        rows.append(
            {"row": name, "divergence": div_value, "p": p, "q": q, "ours": ours_v,
             "competitor": comp_v, "tighter": bool(ours_v <= comp_v + 1e-10),
             "claim": claim, "applicable": True}
        )

    r, w = pair.ratios, pair.q.probs
    d_kl = float(f_divergence_from_ratios(r, w, KL))
    ours_kl, _ = B.kl_opt_core(np.asarray(q), d_kl)
    push("kl", d_kl, ours_kl, ours_kl, "same")
    d_c2 = float(f_divergence_from_ratios(r, w, CHI2))
    c2 = B.chi2_core(np.asarray(q), d_c2)
    push("chi2", d_c2, c2, c2, "same")
    d_pow = float(f_divergence_from_ratios(r, w, power_kind(2.0)))
    push(
        "power", d_pow,
        B.power_small_q_core(np.asarray(q), d_pow, 2.0)[0],
        B.comp_power_core(np.asarray(q), d_pow, 2.0)[0],
        "incomparable",
    )
    d_h2 = float(f_divergence_from_ratios(r, w, SQUARED_HELLINGER))
    comp_h, valid_h = B.comp_sq_hellinger_core(np.asarray(q), d_h2)
    push(
        "squared_hellinger", d_h2,
        B.hellinger_core(np.asarray(q), d_h2), comp_h, "ours",
        applicable=bool(np.asarray(valid_h).reshape(())),
    )
    d_rc = float(f_divergence_from_ratios(r, w, REVERSE_CHI2))
    push(
        "reverse_chi2", d_rc,
        B.reverse_chi2_core(np.asarray(q), d_rc),
        B.comp_reverse_chi2_core(np.asarray(q), d_rc)[0] if math.isfinite(d_rc) else None,
        "ours",
    )
    d_rk = float(f_divergence_from_ratios(r, w, REVERSE_KL))
    push(
        "reverse_kl", d_rk,
        B.reverse_kl_exact_core(np.asarray(q), d_rk),
        B.comp_reverse_kl_core(np.asarray(q), d_rk)[0] if math.isfinite(d_rk) else None,
        "ours",
    )
    d_vc = float(f_divergence_from_ratios(r, w, VINCZE_LECAM))
    push(
        "vincze_lecam", d_vc,
        B.vincze_core(np.asarray(q), d_vc),
        B.comp_vincze_core(np.asarray(q), d_vc)[0],
        "ours",
    )
    return rows


def harness_self_test(n_pairs: int = 50, support: int = 6, seed: int = 7) -> VerificationReport:
    """Run the deliberately broken chi-square bound; a healthy harness must
    flag violations (> 0)."""
    merged: dict[str, VerificationReport] = {}
    indices = np.arange(n_pairs)
    pairs = [random_pair(seed, int(i), support, zero_prob=0.0) for i in indices]
    batch = PairBatch.from_pairs(pairs, event_mask_matrix(support))
    _merge_into(merged, _evaluate_cases(batch, [("chi2_missing_sqrt", {})], indices, seed))
    return merged["chi2_missing_sqrt"]
