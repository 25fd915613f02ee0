"""Command-line workflows: validate-witness, simulate, infer, certify, report.

Exit codes: 0 success (including an explicit "not certified" certificate),
1 analysis failure, 2 input error.
"""
from __future__ import annotations

import argparse
import math
import sys

from . import bootstrap as bs
from . import inference, io, witness
from .data import AodKind
from .simulator import default_plan, ground_truth, run_campaign

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_INPUT = 2


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------

def _parse_triples(text: str):
    """Rows of 'alpha beta gamma k N' (whitespace- or comma-separated)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 5 columns, got {len(parts)}")
        try:
            a, b, g = (float(x) for x in parts[:3])
            k, n = (int(x) for x in parts[3:])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        rows.append(witness.WitnessParams(alpha=a, beta=b, gamma=g, k=k, n=n))
    if not rows:
        raise ValueError("no parameter rows found")
    return rows


def cmd_validate_witness(args) -> int:
    try:
        with open(args.params_file, encoding="utf-8") as fh:
            rows = _parse_triples(fh.read())
    except OSError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INPUT, f"{args.params_file}: {exc}")
    all_ok = True
    for p in rows:
        res = witness.min_f(p)
        ok = res.f_min >= -args.slack
        all_ok &= ok
        pt = res.argmin
        print(
            f"{'PASS' if ok else 'FAIL'} alpha={p.alpha:g} beta={p.beta:g} "
            f"gamma={p.gamma:g} k={p.k} N={p.n} f_min={res.f_min:.6e} "
            f"l={pt.l} theta1={pt.theta1:.6f} theta2={pt.theta2:.6f} "
            f"[{res.method.value}]"
        )
    return EXIT_OK if all_ok else EXIT_ANALYSIS


# ---------------------------------------------------------------------------

def _estimate_dict(est: inference.PopulationEstimate) -> dict:
    return {
        "p0": est.p0, "p1": est.p1, "p2": est.p2, "F": est.F,
        "p0p": est.p0p, "p1p": est.p1p, "p2p": est.p2p, "Fp": est.Fp,
        "alpha3": est.alpha3, "lambda_poisson": est.lambda_poisson,
        "corrected": est.corrected,
    }


def cmd_simulate(args) -> int:
    try:
        cfg = io.read_config(args.config)
        if args.seed is not None:
            cfg = io.RunConfig(**{**cfg.__dict__, "seed": args.seed})
        model = io.build_model(cfg)
    except (OSError, io.ConfigError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    plan = default_plan(model, three_photon_factor=cfg.three_photon_factor)
    dataset = run_campaign(model, plan, seed=cfg.seed, analytic=cfg.analytic)
    io.write_dataset(dataset, args.out)
    gt = ground_truth(model)
    sidecar = {
        "ground_truth": _estimate_dict(gt),
        "eta": list(model.eta),
        "weights": list(model.excite_weights.weights),
        "phases": list(model.excite_weights.phases),
        "lam": model.lam,
        "seed": cfg.seed,
        "analytic": cfg.analytic,
    }
    io.write_json(sidecar, str(args.out) + ".truth.json")
    print(f"wrote {len(dataset.records)} records to {args.out}")
    return EXIT_OK


def cmd_infer(args) -> int:
    try:
        dataset = io.read_dataset(args.dataset)
    except (OSError, io.DatasetFormatError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        est, cal = inference.full_pipeline(dataset)
    except inference.IncompleteDatasetError as exc:
        return _fail(EXIT_ANALYSIS, str(exc))
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_ANALYSIS, f"inference failed: {exc}")
    report = _estimate_dict(est)
    report.update({
        "eta": list(cal.eta),
        "T": cal.T,
        "overlap_sq": cal.overlap_sq,
        "S": sum(q / e for q, e in zip(
            (r.counts["click"] / r.trials
             for r in dataset.by_kind(AodKind.POPULATION)), cal.eta)),
        "warnings": list(est.warnings) + list(cal.warnings),
    })
    try:
        corrected = inference.higher_order_correction(est)
        report["corrected_p0"] = corrected.p0
        report["corrected_p1"] = corrected.p1
        report["corrected_p2"] = corrected.p2
        report["corrected_F"] = corrected.F
    except (ValueError, inference.ModelViolationError) as exc:
        report["correction_error"] = str(exc)
    if args.out:
        io.write_keyvalue(report, args.out)
    for key in sorted(report):
        print(f"{key} = {report[key]}")
    return EXIT_OK


def cmd_certify(args) -> int:
    try:
        dataset = io.read_dataset(args.dataset)
    except (OSError, io.DatasetFormatError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        est, _ = inference.full_pipeline(dataset)
        est = inference.higher_order_correction(est)
    except inference.IncompleteDatasetError as exc:
        return _fail(EXIT_ANALYSIS, str(exc))
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_ANALYSIS, f"inference failed: {exc}")

    last_result: dict = {}

    def confidence_fn(params: witness.WitnessParams) -> float:
        res = bs.bootstrap_pipeline(
            dataset, params,
            n_samples=args.samples, seed=args.seed,
            correct=True, reoptimize=args.reoptimize_per_resample,
            slack=args.slack,
        )
        last_result["bootstrap"] = res
        return res.confidence_negative

    try:
        cert = witness.certify_depth(est, dataset.n_modes, confidence_fn)
    except bs.UnstableStatisticsError as exc:
        return _fail(EXIT_ANALYSIS, str(exc))

    record = {
        "n": cert.n,
        "certified": cert.certified,
        "k": cert.k,
        "k_floor": cert.k_floor,
        "witness_value": cert.witness_value,
        "confidence_negative": cert.confidence_negative,
        "estimate": _estimate_dict(est),
    }
    if cert.params is not None:
        record["params"] = {
            "alpha": cert.params.alpha, "beta": cert.params.beta,
            "gamma": cert.params.gamma, "k": cert.params.k, "n": cert.params.n,
        }
    if "bootstrap" in last_result:
        res = last_result["bootstrap"]
        record["intervals68"] = {q: list(v) for q, v in res.interval68.items()}
        record["n_samples"] = res.n_samples
        record["n_failed_resamples"] = res.n_failed
        bs.write_distribution(res, str(args.out) + ".dist")
    io.write_json(record, args.out)
    if cert.certified:
        print(
            f"certified depth k={cert.k} of N={cert.n} "
            f"(witness {cert.witness_value:.6f}, confidence {cert.confidence_negative:.4f})"
        )
    else:
        print(f"not certified (no negative witness for k >= {cert.k_floor})")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        certs = [io.read_json(p) for p in args.certificates]
    except (OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    rows = ["quantity," + ",".join(args.certificates)]
    quantities = ["p0", "p1", "p2", "F", "p0p", "p1p", "p2p", "Fp"]
    for q in quantities:
        vals = [c.get("estimate", {}).get(q) for c in certs]
        rows.append(q + "," + ",".join("" if v is None else repr(v) for v in vals))
    for key in ("k", "witness_value", "confidence_negative", "certified"):
        vals = [c.get(key) for c in certs]
        rows.append(key + "," + ",".join("" if v is None else str(v) for v in vals))
    table = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(table)
    print(table, end="")
    if args.dist:
        try:
            with open(args.dist, encoding="utf-8") as fh:
                values = [float(ln) for ln in fh if ln.strip()]
        except (OSError, ValueError) as exc:
            return _fail(EXIT_INPUT, str(exc))
        out = (args.out or "report") + ".hist.csv"
        io.histogram_csv(values, out)
        print(f"wrote histogram to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wdepth",
        description="Certify entanglement depth of W-type states from photon-counting data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-witness", help="check witness parameter feasibility")
    p.add_argument("params_file", help="rows of: alpha beta gamma k N")
    p.add_argument("--slack", type=float, default=1e-9)
    p.set_defaults(func=cmd_validate_witness)

    p = sub.add_parser("simulate", help="run a synthetic counting campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("infer", help="estimate populations from a dataset")
    p.add_argument("dataset")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("certify", help="optimize witness and bootstrap its negativity")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=bs.DEFAULT_N_SAMPLES)
    p.add_argument("--slack", type=float, default=1e-9)
    p.add_argument("--reoptimize-per-resample", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("report", help="tabulate certificates; histogram distribution dumps")
    p.add_argument("certificates", nargs="+")
    p.add_argument("--out", default=None)
    p.add_argument("--dist", default=None, help="witness distribution dump to histogram")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
