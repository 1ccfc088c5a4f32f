"""divgauge command line: divergences, bounds, comparisons, verification,
generalization-bound sweeps, exact experiments, and the averaged-MI gap curve.

All I/O goes through files and stdout; identical config plus seed produces
byte-identical outputs (floats are written in shortest round-trip form).
Exit codes: 0 success, 2 validation/parse error, 3 verification violations.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bounds as B
from . import divergences as dv
from . import genbounds as gb
from . import verify as vf
from .dist import (
    AbsContPair,
    EventMask,
    FiniteDistribution,
    JointFinite,
    event_probability,
)
from .errors import DivgaugeError, ValidationError
from .experiments import (
    GibbsExperiment,
    SuperSampleExperiment,
    run_gibbs_experiment,
    run_supersample_experiment,
)

SEED_ENV = "DIVGAUGE_SEED"


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _dist_from_obj(obj) -> FiniteDistribution:
    labels = tuple(obj["labels"]) if "labels" in obj else None
    return FiniteDistribution(np.asarray(obj["probs"], dtype=float), labels)


def load_pair(path: str) -> AbsContPair:
    """pair.json schema: {"p": {"probs": [...]}, "q": {"probs": [...]}}."""
    obj = _load_json(path)
    if not isinstance(obj, dict) or "p" not in obj or "q" not in obj:
        raise ValidationError(f"{path}: expected keys 'p' and 'q'")
    return AbsContPair(_dist_from_obj(obj["p"]), _dist_from_obj(obj["q"]))


def load_joint(path: str) -> JointFinite:
    obj = _load_json(path)
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise ValidationError(f"{path}: expected key 'matrix'")
    return JointFinite(np.asarray(obj["matrix"], dtype=float))


def parse_grid(text: str) -> np.ndarray:
    """start:stop:step sweep syntax (inclusive of stop up to rounding)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid {text!r} must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValidationError(f"grid {text!r} must have step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def parse_event(text: str, size: int) -> EventMask:
    code = int(text, 0)  # accepts 0b0101, 0x.., decimal
    return EventMask.from_int(code, size)


def _emit(args, payload: dict, csv_rows: list[dict] | None = None) -> None:
    """Write JSON (default) or CSV with the resolved config echoed first."""
    fmt = getattr(args, "format", "json")
    text: str
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"
    elif fmt == "csv":
        if csv_rows is None:
            raise ValidationError("this command has no CSV form")
        lines = ["# config " + json.dumps(payload["config"], sort_keys=True)]
        cols = list(csv_rows[0].keys()) if csv_rows else []
        lines.append(",".join(cols))
        for row in csv_rows:
            lines.append(",".join(_fmt(row[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError(f"unknown format {fmt!r}")
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args) -> dict:
    skip = {"func"}
    return {
        k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
        for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    }


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    return int(env) if env else 0


def _kind_from_args(args) -> dv.DivergenceKind:
    name = args.kind
    if name == "power":
        if args.beta is None:
            raise ValidationError("--kind power needs --beta")
        return dv.power_kind(args.beta)
    if name == "hockey_stick":
        if args.gamma is None:
            raise ValidationError("--kind hockey_stick needs --gamma")
        return dv.hockey_stick_kind(args.gamma)
    if name == "renyi":
        if args.alpha is None:
            raise ValidationError("--kind renyi needs --alpha")
        return dv.renyi_kind(args.alpha)
    return dv.DivergenceKind(name)


_JOINT_KINDS = ("sibson", "maximal_leakage", "mutual_information")


def cmd_div(args) -> int:
    if (args.pair is None) == (args.joint is None):
        raise ValidationError("provide exactly one of --pair / --joint")
    params: dict = {}
    if args.joint:
        joint = load_joint(args.joint)
        if args.kind == "sibson":
            if args.alpha is None:
                raise ValidationError("--kind sibson needs --alpha")
            value = dv.sibson_mi(joint, args.alpha)
            params = {"order": args.alpha}
            kind_name = "sibson"
        elif args.kind == "maximal_leakage":
            value = dv.maximal_leakage(joint)
            kind_name = "maximal_leakage"
        elif args.kind == "mutual_information":
            value = dv.mutual_information(joint)
            kind_name = "mutual_information"
        else:
            # f-divergences of a joint mean: joint law against its product law
            from .dist import product_pair

            kind = _kind_from_args(args)
            pair = product_pair(joint)
            value = dv.renyi(pair, kind.param) if kind.name == "renyi" else dv.f_divergence(pair, kind).value
            params = {} if kind.param is None else {"order": kind.param}
            kind_name = kind.name
    else:
        if args.kind in _JOINT_KINDS:
            raise ValidationError(f"--kind {args.kind} needs --joint")
        pair = load_pair(args.pair)
        kind = _kind_from_args(args)
        value = dv.renyi(pair, kind.param) if kind.name == "renyi" else dv.f_divergence(pair, kind).value
        params = {} if kind.param is None else {"order": kind.param}
        kind_name = kind.name
    payload = {
        "config": _config_echo(args),
        "kind": kind_name,
        "params": params,
        "value": value,
    }
    _emit(args, payload)
    return 0


_BOUND_DISPATCH = {
    "egamma",
    "chi2",
    "kl",
    "hellinger",
    "power_implicit",
    "power_qmax",
    "power_small_q",
    "reverse_chi2",
    "reverse_kl_exact",
    "reverse_kl_explicit",
    "vincze_lecam",
}


def cmd_bound(args) -> int:
    name, q, d = args.name, args.q, args.div
    if name not in _BOUND_DISPATCH:
        raise ValidationError(
            f"unknown bound {name!r}; choose one of {sorted(_BOUND_DISPATCH)}"
        )
    if name == "egamma":
        if args.gamma is None:
            raise ValidationError("egamma needs --gamma")
        res = B.bound_egamma(q, d, args.gamma)
    elif name == "chi2":
        res = B.bound_chi2(q, d)
    elif name == "kl":
        res = B.bound_kl(q, d, c=args.c)
    elif name == "hellinger":
        res = B.bound_hellinger(q, d)
    elif name.startswith("power_"):
        if args.beta is None:
            raise ValidationError("power bounds need --beta")
        mode = name.removeprefix("power_")
        res = B.bound_power_beta(q, d, args.beta, mode=mode, q_max=args.q_max)
    elif name == "reverse_chi2":
        res = B.bound_reverse_chi2(q, d)
    elif name.startswith("reverse_kl"):
        res = B.bound_reverse_kl(q, d, mode=name.removeprefix("reverse_kl_"))
    else:
        res = B.bound_vincze_lecam(q, d)
    payload = {
        "config": _config_echo(args),
        "name": res.name,
        "raw": res.raw,
        "value": res.value,
        "free_params": res.free_params,
        "preconditions_met": res.preconditions_met,
        "notes": list(res.notes),
    }
    _emit(args, payload)
    return 0


def cmd_compare(args) -> int:
    pair = load_pair(args.pair)
    config = _config_echo(args)
    if args.event is not None:
        # per-event replica: ours vs competitor vs the true P(E), one row
        # per divergence family
        mask = parse_event(args.event, pair.size)
        rows = vf.dominance_rows_at_event(pair, mask)
        p = event_probability(pair.p, mask)
        q = event_probability(pair.q, mask)
        payload = {"config": config, "p": p, "q": q, "rows": rows}
    else:
        rows = vf.dominance_report(pair)
        payload = {"config": config, "rows": rows}
    csv_rows = [{k: ("" if v is None else v) for k, v in r.items()} for r in rows]
    _emit(args, payload, csv_rows)
    return 0


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    suite = args.suite
    reports: list[dict] = []
    ok = True

    if suite in ("master", "all"):
        merged = vf.master_soundness(
            n_pairs=args.pairs, support=args.support, seed=seed, jobs=args.jobs
        )
        for key in sorted(merged):
            rep = merged[key]
            reports.append(rep.to_dict())
            ok = ok and rep.violations == 0

    if suite in ("identities", "all"):
        ident_ok, ident_reports = _identity_suite(seed)
        reports.extend(ident_reports)
        ok = ok and ident_ok

    if suite in ("selftest", "all"):
        control = vf.harness_self_test(seed=seed)
        caught = control.violations > 0
        entry = control.to_dict()
        entry["bound"] = "negative_control:" + entry["bound"]
        entry["expected_violations"] = True
        reports.append(entry)
        ok = ok and caught

    if suite not in ("master", "identities", "selftest", "all"):
        raise ValidationError(f"unknown suite {suite!r}")

    payload = {
        "config": _config_echo(args),
        "seed": seed,
        "suite": suite,
        "ok": ok,
        "reports": reports,
    }
    _emit(args, payload)
    return 0 if ok else 3


def _identity_suite(seed: int, trials: int = 200) -> tuple[bool, list[dict]]:
    """Exact identities on random pairs: variational form of the hockey-stick
    divergence, order-2 Renyi vs chi-square, unit hockey-stick vs TV."""
    worst_var = 0.0
    worst_d2 = 0.0
    worst_tv = 0.0
    for i in range(trials):
        pair = vf.random_pair(seed, i, 8)
        for g in (0.5, 1.0, 2.0, 5.0):
            rep = vf.verify_egamma_variational(pair, g)
            worst_var = max(worst_var, abs(rep["gap"]))
        chi2 = dv.f_divergence(pair, dv.CHI2).value
        if math.isfinite(chi2):
            worst_d2 = max(
                worst_d2, abs(dv.renyi(pair, 2.0) - math.log1p(chi2))
            )
        tv = dv.f_divergence(pair, dv.TV).value
        e1 = dv.f_divergence(pair, dv.hockey_stick_kind(1.0)).value
        worst_tv = max(worst_tv, abs(tv - e1))
    entries = [
        {"bound": "identity:egamma_variational", "trials": trials * 4,
         "violations": int(worst_var > 1e-12), "worst_slack": worst_var, "seed": seed,
         "witness": None},
        {"bound": "identity:renyi2_chi2", "trials": trials,
         "violations": int(worst_d2 > 1e-12), "worst_slack": worst_d2, "seed": seed,
         "witness": None},
        {"bound": "identity:unit_hockey_stick_tv", "trials": trials,
         "violations": int(worst_tv > 1e-12), "worst_slack": worst_tv, "seed": seed,
         "witness": None},
    ]
    ok = all(e["violations"] == 0 for e in entries)
    return ok, entries


def _tail_rows(args, eta_grid, divs, exact_tail=None) -> list[dict]:
    setting = gb.SubGaussianSetting(sigma=args.sigma, n=args.n)
    rows = []
    for eta in eta_grid:
        eta = float(eta)
        res = gb.gen_tail_bounds(
            setting,
            eta,
            gamma=divs["gamma"],
            e_gamma=divs["e_gamma"],
            chi2=divs["chi2"],
            h2=divs["h2"],
            beta=divs["beta"],
            h_beta=divs["h_beta"],
        )
        row = {
            "eta": eta,
            "theta": res.theta,
            "hockey_stick": res.branches["hockey_stick"].raw,
            "chi2": res.branches["chi2"].raw,
            "hellinger": res.branches["hellinger"].raw,
            "power": res.branches["power"].raw,
        }
        if "leakage" in divs:
            row["maximal_leakage"] = gb.gen_tail_ml(setting, eta, divs["leakage"]).raw
        if "i_alpha" in divs and "alpha" in divs:
            row["alpha_mi"] = gb.gen_tail_alpha_mi(
                setting, eta, divs["i_alpha"], divs["alpha"]
            ).raw
        row["min"] = min(v for k, v in row.items() if k not in ("eta", "theta"))
        if exact_tail is not None:
            row["exact_tail"] = exact_tail(eta)
        rows.append(row)
    return rows


def cmd_genbound(args) -> int:
    eta_grid = parse_grid(args.eta_grid)
    exact_tail = None
    if args.experiment:
        run = run_gibbs_experiment(_gibbs_from_file(args.experiment))
        panel = run.divergence_panel(
            alphas=(args.alpha,) if args.alpha else (2.0,),
            betas=(args.beta,),
            gammas=(args.gamma,),
        )
        divs = {
            "gamma": args.gamma,
            "e_gamma": panel["hockey_stick"][args.gamma],
            "chi2": panel["chi2"],
            "h2": panel["squared_hellinger"],
            "beta": args.beta,
            "h_beta": panel["power"][args.beta],
            "leakage": panel["maximal_leakage"],
        }
        if args.alpha:
            divs["alpha"] = args.alpha
            divs["i_alpha"] = panel["sibson_mi"][args.alpha]
        exact_tail = run.exact_tail
    elif args.div_file:
        divs = _load_json(args.div_file)
        for key in ("gamma", "e_gamma", "chi2", "h2", "beta", "h_beta"):
            if key not in divs:
                raise ValidationError(f"{args.div_file}: missing key {key!r}")
    else:
        raise ValidationError("provide --div-file or --experiment")
    rows = _tail_rows(args, eta_grid, divs, exact_tail)
    payload = {"config": _config_echo(args), "rows": rows}
    _emit(args, payload, rows)
    return 0


def _gibbs_from_file(path: str) -> GibbsExperiment:
    obj = _load_json(path)
    return GibbsExperiment(
        p_z=FiniteDistribution(np.asarray(obj["p_z"], dtype=float)),
        loss_table=np.asarray(obj["loss_table"], dtype=float),
        n=int(obj["n"]),
        temperature=float(obj["temperature"]) if obj["temperature"] != "inf" else math.inf,
    )


def cmd_experiment(args) -> int:
    obj = _load_json(args.config)
    kind = obj.get("type", "gibbs")
    eta_grid = parse_grid(args.eta_grid) if args.eta_grid else None
    if kind == "gibbs":
        run = run_gibbs_experiment(_gibbs_from_file(args.config))
        payload = {
            "config": _config_echo(args),
            "type": "gibbs",
            "divergences": _jsonable(run.divergence_panel()),
        }
        if eta_grid is not None:
            payload["tails"] = [
                {"eta": float(e), "exact_tail": run.exact_tail(float(e))}
                for e in eta_grid
            ]
    elif kind == "supersample":
        exp = SuperSampleExperiment(
            p_z=FiniteDistribution(np.asarray(obj["p_z"], dtype=float)),
            loss_table=np.asarray(obj["loss_table"], dtype=float),
            n=int(obj["n"]),
            temperature=float(obj["temperature"]) if obj["temperature"] != "inf" else math.inf,
        )
        run = run_supersample_experiment(exp)
        gammas = obj.get("gammas", [1.0, 2.0, 4.0])
        payload = {
            "config": _config_echo(args),
            "type": "supersample",
            "conditional_hockey_stick": {
                str(g): run.conditional_hockey_stick(float(g)) for g in gammas
            },
        }
        if eta_grid is not None:
            payload["tails"] = [
                {"eta": float(e), "exact_tail": run.exact_tail(float(e))}
                for e in eta_grid
            ]
    else:
        raise ValidationError(f"unknown experiment type {kind!r}")
    _emit(args, payload)
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def cmd_mi_gap(args) -> int:
    """Averaged-MI bound vs its competitor over an I(S;W) grid.

    Emits columns mi, ours, competitor, gap; the minimum gap approaches
    2 (sqrt(8 - 4/e) - sqrt(pi)) * sigma / sqrt(n).
    """
    setting = gb.SubGaussianSetting(sigma=args.sigma, n=args.n)
    grid = parse_grid(args.mi_grid)
    rows = []
    for mi in grid:
        mi = float(mi)
        ours = gb.avg_gen_bound_mi(setting, mi, variant="closed")
        comp = gb.avg_mi_competitor(setting, mi)
        rows.append({"mi": mi, "ours": ours, "competitor": comp, "gap": comp - ours})
    payload = {
        "config": _config_echo(args),
        "rows": rows,
        "min_gap": min(r["gap"] for r in rows),
        "gap_constant_scaled": gb.mi_gap_constant() * args.sigma / math.sqrt(args.n),
    }
    _emit(args, payload, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="divgauge",
        description="Divergences, change-of-measure bounds, and exact verification "
        "on finite probability spaces.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--out", help="output file (stdout when omitted)")
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
        p.add_argument("--seed", type=int, help=f"RNG seed (fallback ${SEED_ENV})")

    p = sub.add_parser("div", help="evaluate an information measure")
    p.add_argument("--pair", help="pair JSON file (dominated pair P, Q)")
    p.add_argument("--joint", help="joint JSON file (matrix over S x W)")
    p.add_argument(
        "--kind",
        required=True,
        choices=(
            "kl", "reverse_kl", "chi2", "reverse_chi2", "tv",
            "squared_hellinger", "vincze_lecam", "power", "hockey_stick", "renyi",
            "sibson", "maximal_leakage", "mutual_information",
        ),
    )
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    common(p)
    p.set_defaults(func=cmd_div)

    p = sub.add_parser("bound", help="evaluate one change-of-measure bound")
    p.add_argument("--name", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--div", type=float, required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--q-max", dest="q_max", type=float)
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="ours vs competitor rows on a pair")
    p.add_argument("--pair", required=True)
    p.add_argument("--event", help="event mask literal, e.g. 0b0101")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all",
                   choices=("all", "master", "identities", "selftest"))
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--support", type=int, default=8)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("genbound", help="tail-bound sweep over an eta grid")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta-grid", dest="eta_grid", required=True)
    p.add_argument("--div-file", dest="div_file")
    p.add_argument("--experiment", help="Gibbs experiment JSON for exact tails")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--alpha", type=float)
    common(p, fmt_default="csv")
    p.set_defaults(func=cmd_genbound)

    p = sub.add_parser("experiment", help="run an exact enumeration experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--eta-grid", dest="eta_grid")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("mi-gap", help="averaged-MI bound vs competitor curve")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--mi-grid", dest="mi_grid", default="0:10:0.01")
    common(p, fmt_default="csv")
    p.set_defaults(func=cmd_mi_gap)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except DivgaugeError as exc:
        print(f"divgauge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
