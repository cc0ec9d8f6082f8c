"""Command-line interface and report emission.

Reports are JSON (schema shipped in psmod1/schemas/report.schema.json) or
CSV where a row stream makes sense (search records, ladder plot data).
Byte-identical output for identical configs is part of the contract:
runtime is only included under --timings, log means natural logarithm
everywhere, and randomized checks take an explicit seed (default 0).

Exit codes: 0 success, 2 invalid configuration or usage, 3 precision
exhausted.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .core_arith import parse_real
from .errors import (GammaOutOfRange, InvalidConfig, InvalidDelta,
                     InvalidLambda, PrecisionExhausted, PsToolError,
                     RegimeViolation)
from .expsums import (direct_lambda_sum, make_phase, s_of_x, theta_sum,
                      van_der_corput_check, vaughan_decompose,
                      weyl_shift_check)
from .gamma_engine import (derive_params, desk_params, envelope_audit,
                           gamma_sum)
from .harmonic import f_delta_fourier, psi, psi_truncated
from .ps_primes import CACHE_ENV, DEFAULT_SEGMENT_BITS, ps_count
from .rational_approx import convergents, dirichlet_approx, min_sum
from .search import run_search


@dataclass
class RunConfig:
    """Echo of the user-level configuration, spec strings preserved."""

    alpha_spec: str
    beta_spec: str
    gamma_spec: str
    mode: str
    n_max: int | None
    q: int | None
    C: float
    delta: float | None
    output: str | None
    format: str
    segment_bits: int
    workers: int
    seed: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        to_dict = getattr(obj, "to_dict", None)
        d = to_dict() if to_dict else dataclasses.asdict(obj)
        return _jsonable(d)
    return obj


def build_report(command: str, config: dict, results, args,
                 runtime: float | None, mode: str | None = None) -> dict:
    return {
        "tool": "psmod1",
        "version": __version__,
        "command": command,
        "config": _jsonable(config),
        "mode": mode,
        "seed": args.seed,
        "workers": args.workers,
        "segment_bits": args.segment_bits,
        "results": _jsonable(results),
        "runtime_seconds": runtime if args.timings else None,
    }


def _write(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--segment-bits", type=int, default=DEFAULT_SEGMENT_BITS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock runtime in the report")
    p.add_argument("--cache-dir", help="sieve segment cache directory "
                   f"(or set ${CACHE_ENV})")


def _parse_gamma(spec: str) -> Fraction:
    try:
        return Fraction(spec)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidConfig(f"bad gamma spec {spec!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="psmod1",
        description="Audit toolkit for ||alpha p + beta|| over "
                    "Piatetski-Shapiro primes")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derived parameter schedule from q")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--C", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("convergents", help="continued-fraction convergents")
    p.add_argument("--alpha", required=True)
    p.add_argument("--q-max", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("ps-count", help="PS prime count against X^gamma/log X")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--gamma", required=True)
    _add_common(p)

    p = sub.add_parser("expsum", help="prime exponential sum S(X)")
    p.add_argument("--alpha", required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--Q", type=int, help="Dirichlet denominator bound "
                   "(default [sqrt(X)])")
    _add_common(p)

    p = sub.add_parser("theta", help="Lambda-weighted bilinear-phase sum")
    p.add_argument("--N1", type=int, required=True)
    p.add_argument("--N2", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--gamma", required=True)
    _add_common(p)

    p = sub.add_parser("vaughan", help="Vaughan decomposition audit")
    p.add_argument("--N1", type=int, required=True)
    p.add_argument("--N2", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("lemma-check", help="randomized inequality audits")
    p.add_argument("which", choices=("weyl", "vdc", "psi", "fdelta", "minsum"))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--alpha", default="sqrt:2")
    p.add_argument("--gamma", default="0.95")
    _add_common(p)

    p = sub.add_parser("gamma", help="discrepancy sum over PS primes")
    p.add_argument("--mode", choices=("desk", "schedule"), default="desk")
    p.add_argument("--N", type=float, help="desk mode prime range")
    p.add_argument("--q", type=int, help="schedule mode denominator")
    p.add_argument("--gamma", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", default="0")
    p.add_argument("--delta", help="window half-width (desk mode)")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--ladder", help="comma list of N values for a trend audit")
    p.add_argument("--emit-plot-data",
                   help="CSV of (N, discrepancy_ratio) rows for the ladder")
    _add_common(p)

    p = sub.add_parser("search", help="record search for small ||alpha p + beta||")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", default="0")
    p.add_argument("--gamma", required=True)
    p.add_argument("--N-max", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--emit-plot-data", help="CSV of (p, score) record rows")
    _add_common(p)

    return ap


# ---------------------------------------------------------------------------
# command bodies

def _cmd_params(args) -> dict:
    ps = derive_params(args.q, _parse_gamma(args.gamma), args.C)
    return {"results": ps.to_dict(), "mode": ps.mode,
            "config": {"q": args.q, "gamma": args.gamma, "C": args.C}}


def _cmd_convergents(args) -> dict:
    alpha = parse_real(args.alpha)
    scan = convergents(alpha, args.q_max)
    return {"results": {
        "convergents": [[c.a, c.q] for c in scan.items],
        "terminated": scan.terminated,
        "precision_exhausted": scan.precision_exhausted,
    }, "config": {"alpha": args.alpha, "q_max": args.q_max}}


def _cmd_ps_count(args) -> dict:
    rep = ps_count(args.X, _parse_gamma(args.gamma), args.segment_bits)
    return {"results": dataclasses.asdict(rep),
            "config": {"X": args.X, "gamma": args.gamma}}


def _cmd_expsum(args) -> dict:
    alpha = parse_real(args.alpha)
    Q = args.Q if args.Q else max(1, math.isqrt(args.X))
    approx = dirichlet_approx(alpha, Q)
    rep = s_of_x(alpha, args.X, approx, args.segment_bits)
    return {"results": {
        "value": rep.value, "abs": rep.abs, "bound": rep.bound,
        "ratio": rep.ratio, "parameters": rep.parameters,
        "approx": dataclasses.asdict(approx),
    }, "config": {"alpha": args.alpha, "X": args.X, "Q": Q}}


def _cmd_theta(args) -> dict:
    alpha = parse_real(args.alpha)
    rep = theta_sum(args.N1, args.N2, alpha, args.h, args.m,
                    _parse_gamma(args.gamma), args.segment_bits)
    return {"results": {
        "value": rep.value, "abs": rep.abs, "bound": rep.bound,
        "ratio": rep.ratio, "parameters": rep.parameters,
    }, "config": {"N1": args.N1, "N2": args.N2, "alpha": args.alpha,
                  "h": args.h, "m": args.m, "gamma": args.gamma}}


def _cmd_vaughan(args) -> dict:
    alpha = parse_real(args.alpha)
    gamma = _parse_gamma(args.gamma)
    f = make_phase(alpha, args.h, args.m, gamma)
    parts = vaughan_decompose(args.N1, args.N2, f, args.v)
    direct = direct_lambda_sum(args.N1, args.N2, f, args.segment_bits)
    residual = abs(parts.reconstruction - direct)
    return {"results": {
        "U1": parts.U1, "U2": parts.U2, "U3": parts.U3, "U4": parts.U4,
        "v": parts.v, "reconstruction": parts.reconstruction,
        "direct": direct, "residual": residual,
        "residual_ok": residual <= 1e-9 * (1 + abs(direct)),
    }, "config": {"N1": args.N1, "N2": args.N2, "v": args.v,
                  "alpha": args.alpha, "gamma": args.gamma,
                  "h": args.h, "m": args.m}}


def _cmd_lemma_check(args) -> dict:
    rng = np.random.default_rng(args.seed)
    which = args.which
    cfg = {"which": which, "trials": args.trials, "seed": args.seed}
    if which == "weyl":
        holds = 0
        for _ in range(args.trials):
            L = int(rng.integers(2, 513))
            Q = int(rng.integers(1, max(2, L // 2 + 1)))
            seq = rng.normal(size=L) + 1j * rng.normal(size=L)
            if weyl_shift_check(seq, Q).holds:
                holds += 1
        results = {"holds": holds, "violations": args.trials - holds}
    elif which == "vdc":
        ratios = []
        for _ in range(args.trials):
            x = float(rng.uniform(1e-4, 0.05))
            b = int(rng.integers(50, 400))
            r = van_der_corput_check(
                lambda ns, x=x: x * ns.astype(np.float64) ** 2, 0, b, 2.0 * x)
            ratios.append(r.ratio)
        gamma = _parse_gamma(args.gamma)
        alpha = parse_real(args.alpha)
        row_ratios = []
        for d in (8, 16, 32):
            for m in (1, 2, 4):
                n1 = 4096
                f = make_phase(alpha, 1, m, gamma)
                lam = m * d * d * n1 ** (float(gamma) - 2.0)
                r = van_der_corput_check(
                    lambda ls, d=d, f=f: f(ls * d), n1 // d, 2 * n1 // d, lam)
                row_ratios.append(r.ratio)
        results = {"max_ratio_quadratic": max(ratios),
                   "max_ratio_rows": max(row_ratios),
                   "trials": args.trials}
    elif which == "psi":
        worst = 0.0
        for _ in range(args.trials):
            t = float(rng.uniform(0, 1))
            M = int(rng.integers(2, 10001))
            te = psi_truncated(t, M)
            err = abs(psi(t) - te.value)
            worst = max(worst, err / te.error_envelope)
        results = {"C_emp": worst, "trials": args.trials}
    elif which == "fdelta":
        worst = 0.0
        for _ in range(args.trials):
            delta = float(rng.uniform(0.01, 0.24))
            H = int(rng.integers(8, 2048))
            t = float(rng.uniform(0, 1))
            d_plus = abs(t + delta - round(t + delta))
            d_minus = abs(t - delta - round(t - delta))
            if min(d_plus, d_minus) < 1.0 / H:
                continue  # edge band: envelope saturates, no accuracy claim
            te = f_delta_fourier(t, delta, H)
            from .harmonic import f_delta
            err = abs((f_delta(t, delta) - 2 * delta) - te.value)
            worst = max(worst, err / te.error_envelope)
        results = {"C_emp": worst, "trials": args.trials}
    else:  # minsum
        alpha = parse_real(args.alpha)
        scan = convergents(alpha, 10 ** 3)
        conv = scan.items[-1]
        beta = parse_real("0")
        rows = []
        for X in (10 ** 3, 10 ** 4, 10 ** 5):
            rep = min_sum(X, 50.0, alpha, beta, conv)
            rows.append({"X": X, "value": rep.value, "bound": rep.bound,
                         "ratio": rep.ratio})
        ratios = [r["ratio"] for r in rows]
        results = {"rows": rows, "C_emp": max(ratios),
                   "stability_factor": max(ratios) / min(ratios)}
    return {"results": results, "config": cfg}


def _gamma_single(args, n_val: float, alpha, beta, gamma):
    delta = float(Fraction(args.delta)) if args.delta else None
    if args.mode == "schedule":
        if not args.q:
            raise InvalidConfig("schedule mode needs --q")
        if args.delta:
            raise InvalidConfig("schedule mode derives the window width from "
                                "q; use desk mode for an explicit --delta")
        params = derive_params(args.q, gamma, args.C)
    else:
        if n_val is None:
            raise InvalidConfig("desk mode needs --N")
        params = desk_params(n_val, gamma, delta, args.C)
    delta_fp = parse_real(args.delta) if args.delta else None
    return gamma_sum(params, alpha, beta, delta_fp,
                     args.segment_bits, args.workers)


def _cmd_gamma(args) -> dict:
    alpha = parse_real(args.alpha)
    beta = parse_real(args.beta)
    gamma = _parse_gamma(args.gamma)
    cfg = {"mode": args.mode, "N": args.N, "q": args.q, "gamma": args.gamma,
           "alpha": args.alpha, "beta": args.beta, "delta": args.delta,
           "C": args.C, "ladder": args.ladder}
    if args.ladder:
        ns = [float(x) for x in args.ladder.split(",") if x.strip()]
        reports = [_gamma_single(args, n, alpha, beta, gamma) for n in ns]
        audit = envelope_audit(reports)
        if args.emit_plot_data:
            rows = [[r.N, r.discrepancy_ratio] for r in audit.rows]
            _write(_csv_text(["N", "discrepancy_ratio"], rows),
                   args.emit_plot_data)
        results = {"ladder": [r.to_dict() for r in reports],
                   "audit": audit.to_dict()}
        return {"results": results, "mode": args.mode, "config": cfg}
    rep = _gamma_single(args, args.N, alpha, beta, gamma)
    return {"results": rep.to_dict(), "mode": rep.params.mode, "config": cfg}


def _cmd_search(args) -> dict:
    alpha = parse_real(args.alpha)
    beta = parse_real(args.beta)
    gamma = _parse_gamma(args.gamma)
    result = run_search(alpha, beta, gamma, args.N_max, args.delta,
                        args.segment_bits, verify_specs=(args.alpha, args.beta))
    records = [dataclasses.asdict(r) for r in result.records]
    if args.emit_plot_data:
        rows = [[r.p, r.score] for r in result.records]
        _write(_csv_text(["p", "score"], rows), args.emit_plot_data)
    cfg = RunConfig(args.alpha, args.beta, args.gamma, "search", args.N_max,
                    None, 1.0, args.delta, args.output, args.format,
                    args.segment_bits, args.workers, args.seed)
    return {"results": {"records": records, "summary": result.summary},
            "config": cfg.to_dict(),
            "csv_rows": [[r.p, r.n, r.dist, r.score, int(r.is_record)]
                         for r in result.records]}


def record_search(config: RunConfig):
    """Spec-level entry: stream of score records plus summary."""
    alpha = parse_real(config.alpha_spec)
    beta = parse_real(config.beta_spec)
    gamma = _parse_gamma(config.gamma_spec)
    return run_search(alpha, beta, gamma, config.n_max, config.delta,
                      config.segment_bits,
                      verify_specs=(config.alpha_spec, config.beta_spec))


_COMMANDS = {
    "params": _cmd_params,
    "convergents": _cmd_convergents,
    "ps-count": _cmd_ps_count,
    "expsum": _cmd_expsum,
    "theta": _cmd_theta,
    "vaughan": _cmd_vaughan,
    "lemma-check": _cmd_lemma_check,
    "gamma": _cmd_gamma,
    "search": _cmd_search,
}


def cli_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as se:
        return 0 if se.code in (0, None) else 2
    if args.cache_dir:
        os.environ[CACHE_ENV] = args.cache_dir
    t0 = time.perf_counter()
    try:
        out = _COMMANDS[args.command](args)
    except PrecisionExhausted as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return 3
    except (InvalidConfig, InvalidDelta, InvalidLambda, GammaOutOfRange,
            RegimeViolation, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except PsToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    runtime = time.perf_counter() - t0
    csv_rows = out.pop("csv_rows", None)
    if args.format == "csv":
        if args.command == "search":
            text = _csv_text(["p", "n", "dist", "score", "is_record"],
                             csv_rows or [])
        else:
            print("csv format is only available for the search command",
                  file=sys.stderr)
            return 2
    else:
        report = build_report(args.command, out.get("config", {}),
                              out["results"], args, runtime,
                              out.get("mode"))
        text = report_json(report)
    _write(text, args.output)
    return 0


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
