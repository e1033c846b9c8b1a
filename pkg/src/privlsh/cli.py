"""Command-line front-end.

Subcommands: ``budget`` (accounting tables), ``hash`` / ``perturb`` (batch
hashing and privatization of an event file), ``knn`` (neighbor lists),
``experiment`` (utility-loss sweeps), ``audit`` (statistical verification).
Tables go out as CSV or JSON; audit reports as JSON.  Every command is
deterministic given explicit seeds; omitted seeds are drawn from entropy
and printed so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import audit as audit_mod
from . import data as data_mod
from . import nns as nns_mod
from . import privacy
from .exceptions import InvalidParamsError
from .lsh import sample_family
from .mechanisms import flip_probability
from .vectors import angular_to_euclidean

SCHEMA = "privlsh-v1"


def _draw_seed(label: str) -> int:
    seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    print(f"# drew {label} = {seed}", file=sys.stderr)
    return seed


def _emit_rows(rows: list[dict], columns: list[str], fmt: str, out: str | None) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in columns})
        text = buf.getvalue()
    else:
        text = json.dumps({"schema": SCHEMA, "rows": rows}, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_dataset(args) -> nns_mod.Dataset:
    if getattr(args, "synth", None):
        spec = data_mod.SynthSpec(**json.loads(args.synth))
        return data_mod.synthesize(spec)
    if not getattr(args, "events", None):
        raise InvalidParamsError("provide --events FILE or --synth JSON")
    events = data_mod.load_events(
        args.events, fmt=args.input_format, header=args.header, n_items=args.n_items
    )
    dataset = data_mod.build_vectors(events, n_items=args.n_items, mode=args.mode)
    if getattr(args, "truncate", None):
        dataset = data_mod.truncate_dimensions(dataset, args.truncate)
    return dataset


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--events", help="events file with user_id,item_index,value records")
    p.add_argument("--synth", help='synthetic dataset spec as JSON, e.g. \'{"dim":100,"clusters":5,"users_per_cluster":20,"spread":0.05,"seed":7}\'')
    p.add_argument("--n-items", type=int, default=None, help="item-vector dimension for --events")
    p.add_argument("--mode", choices=data_mod.MODES, default="rating_centered")
    p.add_argument("--input-format", choices=("csv", "tsv"), default="csv")
    p.add_argument("--header", action="store_true", help="skip the first line of the events file")
    p.add_argument("--truncate", type=int, default=None, help="keep only the N most-supported items")


# ---------------------------------------------------------------------------
# budget


def cmd_budget(args) -> int:
    columns = ["bound_kind", "d_theta", "delta", "n_bits", "xi", "epsilon", "alpha", "flip_prob", "ldp_budget"]
    rows: list[dict] = []

    if args.table1:
        for entry in privacy.budget_table():
            rows.append(
                {
                    "bound_kind": "pxdp_tight",
                    "d_theta": entry["d_theta"],
                    "delta": 0.01,
                    "n_bits": entry["n_bits"],
                    "xi": entry["xi"],
                    "epsilon": entry["epsilon"],
                    "alpha": "",
                    "flip_prob": flip_probability(entry["epsilon"]),
                    "ldp_budget": entry["ldp_budget"],
                }
            )
        _emit_rows(rows, columns, args.format, args.out)
        return 0

    kappas = args.kappa or [20]
    if args.xi:
        for xi in args.xi:
            for k in kappas:
                eps = privacy.epsilon_for_target_xi(xi, k, args.d_theta, args.delta)
                alpha = privacy.solve_alpha(k, args.d_theta, args.delta)
                report = privacy.pxdp_budget_tight(
                    privacy.PrivacyParams(epsilon=eps, n_bits=k, delta=args.delta, d=args.d_theta), alpha
                )
                rows.append(
                    {
                        "bound_kind": report.bound_kind,
                        "d_theta": args.d_theta,
                        "delta": args.delta,
                        "n_bits": k,
                        "xi": report.xi,
                        "epsilon": eps,
                        "alpha": alpha,
                        "flip_prob": report.flip_prob,
                        "ldp_budget": report.ldp_budget,
                    }
                )
    elif args.eps:
        for eps in args.eps:
            for k in kappas:
                # report every applicable bound; callers pick the one they trust
                simple = privacy.pxdp_budget_simple(
                    privacy.PrivacyParams(epsilon=eps, n_bits=k, delta=args.delta, d=args.d_theta)
                )
                rows.append(
                    {
                        "bound_kind": "worst_case_dp",
                        "d_theta": args.d_theta,
                        "delta": 1.0,
                        "n_bits": k,
                        "xi": privacy.worst_case_dp(eps, k),
                        "epsilon": eps,
                        "alpha": "",
                        "flip_prob": flip_probability(eps),
                        "ldp_budget": privacy.worst_case_dp(eps, k),
                    }
                )
                rows.append(
                    {
                        "bound_kind": simple.bound_kind,
                        "d_theta": args.d_theta,
                        "delta": args.delta,
                        "n_bits": k,
                        "xi": simple.xi,
                        "epsilon": eps,
                        "alpha": "",
                        "flip_prob": simple.flip_prob,
                        "ldp_budget": simple.ldp_budget,
                    }
                )
                if 0.0 < args.d_theta < 1.0 and args.delta < 1.0:
                    alpha = privacy.solve_alpha(k, args.d_theta, args.delta)
                    tight = privacy.pxdp_budget_tight(
                        privacy.PrivacyParams(epsilon=eps, n_bits=k, delta=args.delta, d=args.d_theta), alpha
                    )
                    rows.append(
                        {
                            "bound_kind": tight.bound_kind,
                            "d_theta": args.d_theta,
                            "delta": args.delta,
                            "n_bits": k,
                            "xi": tight.xi,
                            "epsilon": eps,
                            "alpha": alpha,
                            "flip_prob": tight.flip_prob,
                            "ldp_budget": tight.ldp_budget,
                        }
                    )
    else:
        print("budget: provide --table1, --xi or --eps", file=sys.stderr)
        return 2
    _emit_rows(rows, columns, args.format, args.out)
    return 0


# ---------------------------------------------------------------------------
# hash / perturb


def _write_bits(ids: list[str], bits: np.ndarray, out: str | None, fmt: str) -> None:
    rows = [{"user_id": uid, "bits": "".join(str(int(b)) for b in row)} for uid, row in zip(ids, bits)]
    _emit_rows(rows, ["user_id", "bits"], fmt, out)


def read_bits_file(path: str) -> tuple[list[str], np.ndarray]:
    """Read a hash/perturb output file (CSV or JSON) back into ids + bits."""
    with open(path) as fh:
        text = fh.read()
    rows: list[dict]
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["rows"]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    ids = [r["user_id"] for r in rows]
    bits = np.array([[int(c) for c in r["bits"]] for r in rows], dtype=np.uint8)
    return ids, bits


def cmd_hash(args) -> int:
    dataset = _load_dataset(args)
    seed = args.family_seed if args.family_seed is not None else _draw_seed("--family-seed")
    family = sample_family(dataset.dim, args.kappa, seed)
    bits = nns_mod.perturbed_hashes(dataset, family, "lsh", np.random.default_rng(0))
    _write_bits(dataset.ids, bits, args.out, args.format)
    return 0


def cmd_perturb(args) -> int:
    dataset = _load_dataset(args)
    fam_seed = args.family_seed if args.family_seed is not None else _draw_seed("--family-seed")
    noise_seed = args.noise_seed if args.noise_seed is not None else _draw_seed("--noise-seed")
    family = sample_family(dataset.dim, args.kappa, fam_seed)
    if args.mechanism == "lshrr" and args.eps is None and args.xi is not None:
        epsilon = privacy.epsilon_for_target_xi(args.xi, args.kappa, args.d_theta, args.delta)
    else:
        epsilon = args.eps
    if args.mechanism in ("lshrr", "laplsh") and epsilon is None:
        print("perturb: --eps (or --xi for lshrr) is required", file=sys.stderr)
        return 2
    bits = nns_mod.perturbed_hashes(
        dataset, family, args.mechanism, np.random.default_rng(noise_seed), epsilon=epsilon
    )
    _write_bits(dataset.ids, bits, args.out, args.format)
    return 0


# ---------------------------------------------------------------------------
# knn


def cmd_knn(args) -> int:
    rows = []
    if args.hashes:
        ids, bits = read_bits_file(args.hashes)
        for qid in ids:
            nl = nns_mod.approx_knn(ids, bits, qid, args.k)
            for rank, (nid, dist) in enumerate(nl.neighbors, start=1):
                rows.append({"query_id": qid, "rank": rank, "neighbor_id": nid, "distance": dist})
    else:
        dataset = _load_dataset(args)
        for qid in sorted(dataset.ids):
            nl = nns_mod.exact_knn(dataset, qid, args.k)
            for rank, (nid, dist) in enumerate(nl.neighbors, start=1):
                rows.append({"query_id": qid, "rank": rank, "neighbor_id": nid, "distance": dist})
    _emit_rows(rows, ["query_id", "rank", "neighbor_id", "distance"], args.format, args.out)
    return 0


# ---------------------------------------------------------------------------
# experiment


def _experiment_epsilon(mechanism: str, xi: float, n_bits: int, d_theta: float, delta: float) -> float | None:
    """Per-bit (or vector) budget realizing total budget ``xi`` for a mechanism."""
    if mechanism in ("lsh", "uniform"):
        return None
    if mechanism == "lshrr":
        return 0.0 if xi == 0.0 else privacy.epsilon_for_target_xi(xi, n_bits, d_theta, delta)
    # laplsh: budget is epsilon * euclidean distance; put it on the same
    # angular axis via the unit-sphere chord at the reference distance
    if xi <= 0.0:
        raise InvalidParamsError("laplsh needs a positive budget")
    return xi / angular_to_euclidean(d_theta)


def cmd_experiment(args) -> int:
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        for key, value in cfg.items():
            setattr(args, key, value)
    if bool(args.xi) == bool(args.eps):
        print("experiment: provide exactly one of --xi or --eps", file=sys.stderr)
        return 2

    dataset = _load_dataset(args)
    family_seed = args.family_seed if args.family_seed is not None else _draw_seed("--family-seed")
    noise_seed = args.noise_seed if args.noise_seed is not None else _draw_seed("--noise-seed")
    queries = sorted(dataset.ids)[: args.queries] if args.queries else None

    rows = []
    per_query_rows = []
    for kappa in args.kappa:
        family = sample_family(dataset.dim, kappa, family_seed)
        budgets = args.xi if args.xi else args.eps
        for k in args.k:
            for budget in budgets:
                if args.xi:
                    epsilon = _experiment_epsilon(args.mechanism, budget, kappa, args.d_theta, args.delta)
                    xi = budget
                else:
                    epsilon = None if args.mechanism in ("lsh", "uniform") else budget
                    xi = ""
                summary = nns_mod.run_matching_experiment(
                    dataset,
                    family,
                    args.mechanism,
                    k,
                    epsilon=epsilon,
                    queries=queries,
                    noise_seed=noise_seed,
                )
                rows.append(
                    {
                        "mechanism": args.mechanism,
                        "n_bits": kappa,
                        "k": summary.k,
                        "xi": xi,
                        "epsilon": "" if epsilon is None else epsilon,
                        "mean_utility_loss": summary.mean_loss,
                        "std_err": summary.std_err,
                        "n_queries": len(summary.losses),
                        "family_seed": family_seed,
                        "noise_seed": noise_seed,
                    }
                )
                if args.per_query:
                    per_query_rows.extend(summary.records(xi=None if xi == "" else xi))
    if args.per_query:
        columns = ["query_id", "k", "n_bits", "epsilon", "xi", "mechanism", "utility_loss"]
        _emit_rows(per_query_rows, columns, args.format, args.out)
        return 0
    columns = [
        "mechanism",
        "n_bits",
        "k",
        "xi",
        "epsilon",
        "mean_utility_loss",
        "std_err",
        "n_queries",
        "family_seed",
        "noise_seed",
    ]
    _emit_rows(rows, columns, args.format, args.out)
    return 0


# ---------------------------------------------------------------------------
# audit


def _jsonable(value):
    if isinstance(value, Fraction):
        return {"numerator": value.numerator, "denominator": value.denominator}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _pair_at_angle(d_theta: float) -> tuple[np.ndarray, np.ndarray]:
    return np.array([1.0, 0.0]), np.array([np.cos(np.pi * d_theta), np.sin(np.pi * d_theta)])


def cmd_audit(args) -> int:
    checks = []
    all_passed = True
    seed = args.seed if args.seed is not None else _draw_seed("--seed")

    if args.toy_channel:
        cm = audit_mod.enumerate_2d_channel([(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)])
        leak = audit_mod.hyperplane_release_leakage(cm)
        probs = sorted(cm.functions, key=lambda f: f.probability)
        ok = (
            len(cm.functions) == 6
            and [f.probability for f in probs] == [Fraction(1, 8)] * 4 + [Fraction(1, 4)] * 2
            and all(p == Fraction(1, 2) for p in cm.channel)
            and leak.singleton_probability == Fraction(1, 2)
        )
        all_passed &= ok
        checks.append(
            {
                "name": "toy_channel",
                "passed": ok,
                "functions": [
                    {"bits": list(f.bits), "probability": _jsonable(f.probability)} for f in cm.functions
                ],
                "channel_p_one": [_jsonable(p) for p in cm.channel],
                "singleton_probability": _jsonable(leak.singleton_probability),
            }
        )

    if args.collision:
        x, xp = _pair_at_angle(args.d_theta)
        report = audit_mod.estimate_collision_rate(x, xp, trials=args.trials, seed=seed)
        all_passed &= report.passed
        checks.append(report.to_dict())

    if args.hamming_law:
        x, xp = _pair_at_angle(args.d_theta)
        report = audit_mod.hamming_law_check(x, xp, args.kappa, n_families=max(args.trials, 500), seed=seed)
        all_passed &= report.passed
        checks.append(report.to_dict())

    if args.error_bound:
        x, xp = _pair_at_angle(args.d_theta)
        report = audit_mod.error_bound_check(args.eps, args.kappa, x, xp, trials=max(args.trials, 1000), seed=seed)
        all_passed &= report.passed
        checks.append(report.to_dict())

    if args.pxdp:
        x, xp = _pair_at_angle(args.d_theta)
        report = audit_mod.certify_pxdp(
            args.eps, args.kappa, x, xp, delta_target=args.delta, trials=max(args.trials, 10_000), seed=seed
        )
        all_passed &= report.passed
        checks.append(report.to_dict())

    if not checks:
        print("audit: nothing to do (pass --toy-channel / --collision / --hamming-law / --error-bound / --pxdp)", file=sys.stderr)
        return 2

    doc = {"schema": SCHEMA, "passed": bool(all_passed), "checks": _jsonable(checks)}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privlsh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("budget", help="privacy-budget accounting tables")
    p.add_argument("--table1", action="store_true", help="emit the full published comparison grid")
    p.add_argument("--xi", type=float, nargs="+", help="total budget target(s); inverted to per-bit epsilon")
    p.add_argument("--eps", type=float, nargs="+", help="per-bit budget(s); all bounds reported")
    p.add_argument("--kappa", type=int, nargs="+", help="hash width(s)")
    p.add_argument("--d", "--d-theta", dest="d_theta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("hash", help="hash an event file to bitstrings")
    _add_dataset_args(p)
    p.add_argument("--kappa", type=int, default=20)
    p.add_argument("--family-seed", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("perturb", help="hash and privatize an event file")
    _add_dataset_args(p)
    p.add_argument("--kappa", type=int, default=20)
    p.add_argument("--mechanism", choices=nns_mod.MECHANISMS, default="lshrr")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--xi", type=float, default=None, help="total budget; inverted to --eps for lshrr")
    p.add_argument("--d", "--d-theta", dest="d_theta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--family-seed", type=int, default=None)
    p.add_argument("--noise-seed", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("knn", help="neighbor lists from vectors (exact) or a hash file (Hamming)")
    _add_dataset_args(p)
    p.add_argument("--hashes", help="bits file produced by hash/perturb")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("experiment", help="utility-loss sweep over budgets")
    _add_dataset_args(p)
    p.add_argument("--config", help="flat JSON file with these same keys")
    p.add_argument("--kappa", type=int, nargs="+", default=[20])
    p.add_argument("--k", type=int, nargs="+", default=[5])
    p.add_argument("--mechanism", choices=nns_mod.MECHANISMS, default="lshrr")
    p.add_argument("--xi", type=float, nargs="+", default=None)
    p.add_argument("--eps", type=float, nargs="+", default=None)
    p.add_argument("--d", "--d-theta", dest="d_theta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--family-seed", type=int, default=None)
    p.add_argument("--noise-seed", type=int, default=None)
    p.add_argument("--queries", type=int, default=None, help="limit to the first N query ids")
    p.add_argument("--per-query", action="store_true", help="emit one record per query instead of summaries")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("audit", help="statistical verification of the mechanism properties")
    p.add_argument("--toy-channel", action="store_true")
    p.add_argument("--collision", action="store_true")
    p.add_argument("--hamming-law", action="store_true")
    p.add_argument("--error-bound", action="store_true")
    p.add_argument("--pxdp", action="store_true")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--kappa", type=int, default=20)
    p.add_argument("--d", "--d-theta", dest="d_theta", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())
