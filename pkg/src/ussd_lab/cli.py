"""Command-line front end.

Six subcommands: eval (one instance, every derived quantity), fig2 /
fig3 / fig4 (the three parameter sweeps), teleport (branch bookkeeping
for the channel application, optionally sampled), and selftest (the
verification battery). Output is CSV with a commented metadata header
or a JSON document with the same content; both are deterministic byte
for byte, use 12 significant digits, and never include timestamps.

Exit codes: 0 on success, 1 when the selftest battery fails, 2 for
invalid input (the message names the offending field). The
USSD_LAB_THREADS environment variable caps the worker threads used for
sweep rows (default: the machine's core count); rows are always emitted
in input order regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import RangeError, UndefinedPhase, UssdLabError
from .coherence import (
    closed_form_coherences,
    coherence_band,
    initial_coherence,
    ledger,
    wootters_concurrence,
)
from .ussd import (
    bargmann_phase,
    coupled_state,
    make_instance,
    p_suc_max,
    separable_strategy,
    separability_params,
    system_ancilla_density,
    total_coherence_conservation,
)
from .teleport import (
    TeleportInstance,
    enumerate_runs,
    fig4_sweep,
    sample_teleport,
)
from .selftest import run_selftest

_CLIP = 1.0 - 1e-9


def _r12(x):
    """Round a float to 12 significant digits (and kill negative zero)."""
    if isinstance(x, float):
        if not math.isfinite(x):
            return x
        if x == 0.0:
            return 0.0
        return float(f"{x:.12g}")
    return x


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{_r12(v):.12g}"
    return str(v)


def _emit(args, meta: dict, columns: list, rows: list) -> None:
    if args.format == "csv":
        lines = [f"# {k}: {_csv_cell(v)}" for k, v in sorted(meta.items())]
        lines.append(",".join(columns))
        lines.extend(",".join(_csv_cell(c) for c in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        doc = {
            "meta": {k: _r12(v) for k, v in meta.items()},
            "columns": columns,
            "rows": [[_r12(c) for c in row] for row in rows],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _write(args.out, text)


def _write(out, text: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_count() -> int:
    raw = os.environ.get("USSD_LAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise RangeError(f"USSD_LAB_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise RangeError(f"USSD_LAB_THREADS must be a positive integer, got {raw!r}")
    return n


def _map_rows(fn, items) -> list:
    """Order-preserving parallel map; row order never depends on timing."""
    n = _thread_count()
    items = list(items)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _meta(args, command: str, **params) -> dict:
    meta = {"tool": "ussd-lab", "version": __version__, "command": command}
    meta.update(params)
    return meta


# --------------------------------------------------------------------------
# subcommands

def cmd_eval(args) -> int:
    alpha = args.alpha * np.exp(1j * args.alpha_phase)
    alpha_c = args.alpha_c * np.exp(1j * args.alpha_c_phase)
    inst = make_instance(args.p_plus, alpha, alpha_c)
    strat = separable_strategy(inst)
    par = separability_params(inst, strat)
    led = ledger(coupled_state(inst, strat))
    ct, ca, cg = closed_form_coherences(inst, strat)
    led_total = led.c_total
    led_conv = led.bipartite_of("A")
    led_gen = led.c_genuine
    led_ret = led.pair("S", "C")
    dev = max(abs(ct - led_total), abs(ca - led_conv), abs(cg - led_gen),
              abs((ct - ca) - led_ret))
    cons = total_coherence_conservation(inst, strat)
    sep = wootters_concurrence(system_ancilla_density(inst, strat))
    try:
        loop = bargmann_phase(inst)
    except UndefinedPhase:
        loop = "undefined"
    rows = [
        ("r_plus", inst.r_plus),
        ("r_minus", inst.r_minus),
        ("gamma", inst.gamma),
        ("case", inst.case),
        ("abs_alpha_plus_opt", abs(strat.alpha_plus)),
        ("abs_alpha_minus_opt", abs(strat.alpha_minus)),
        ("p_suc_max", p_suc_max(inst)),
        ("beta_star", par.beta_star),
        ("delta_star", par.delta_star),
        ("c_total_closed", ct),
        ("c_total_ledger", led_total),
        ("c_converted_closed", ca),
        ("c_converted_ledger", led_conv),
        ("c_retained_closed", ct - ca),
        ("c_retained_ledger", led_ret),
        ("c_genuine_closed", cg),
        ("c_genuine_ledger", led_gen),
        ("c_env_ancilla_ledger", led.pair("C", "A")),
        ("max_ledger_deviation", dev),
        ("conservation_residual", cons.residual),
        ("separability_concurrence", sep),
        ("loop_phase", loop),
    ]
    meta = _meta(args, "eval", p_plus=args.p_plus, abs_alpha=args.alpha,
                 alpha_phase=args.alpha_phase, abs_alpha_c=args.alpha_c,
                 alpha_c_phase=args.alpha_c_phase)
    _emit(args, meta, ["quantity", "value"], rows)
    return 0


def cmd_fig2(args) -> int:
    pts = np.minimum(np.linspace(0.0, 1.0, args.steps), _CLIP)

    def row(ac: float):
        cells = [float(ac)]
        insts = [make_instance(args.p_plus, args.alpha * np.exp(1j * g), float(ac))
                 for g in (0.0, math.pi / 2, math.pi)]
        cells.extend(initial_coherence(i) for i in insts)
        cells.extend(p_suc_max(i) for i in insts)
        return cells

    columns = ["abs_alpha_c",
               "c_total_gamma_0", "c_total_gamma_half_pi", "c_total_gamma_pi",
               "p_suc_gamma_0", "p_suc_gamma_half_pi", "p_suc_gamma_pi"]
    meta = _meta(args, "fig2", p_plus=args.p_plus, abs_alpha=args.alpha,
                 steps=args.steps)
    _emit(args, meta, columns, _map_rows(row, pts))
    return 0


def cmd_fig3(args) -> int:
    pts = np.minimum(np.linspace(0.0, 1.0, args.steps), _CLIP)

    def row(aa: float):
        inst = make_instance(args.p_plus, float(aa) * np.exp(1j * math.pi / 2),
                             args.alpha_c)
        led = ledger(coupled_state(inst, separable_strategy(inst)))
        total = led.c_total
        conv = led.bipartite_of("A")
        ret = led.pair("S", "C")
        scan = coherence_band(args.p_plus, float(aa), args.alpha_c,
                              scan_points=args.band_points)
        return [float(aa), total, led.bipartite_of("S"), ret, conv,
                led.pair("C", "A"),
                conv / total if total > 0 else None,
                ret / total if total > 0 else None,
                scan.minimum, scan.maximum,
                1.0 - scan.maximum, 1.0 - scan.minimum]

    columns = ["abs_alpha", "c_total", "c_system_split", "c_retained_pair",
               "c_converted", "c_env_ancilla_pair", "share_converted",
               "share_retained", "band_env_ancilla_min", "band_env_ancilla_max",
               "band_system_split_min", "band_system_split_max"]
    meta = _meta(args, "fig3", p_plus=args.p_plus, abs_alpha_c=args.alpha_c,
                 steps=args.steps, band_points=args.band_points)
    _emit(args, meta, columns, _map_rows(row, pts))
    return 0


def cmd_fig4(args) -> int:
    pts = np.linspace(0.0, 1.0, args.steps)
    rows = [[r.tangle, r.smr_total, r.smr_retained, r.smr_converted,
             r.converted_share]
            for r in fig4_sweep(pts)]
    columns = ["tangle", "smr_total", "smr_retained", "smr_converted",
               "converted_share"]
    _emit(args, _meta(args, "fig4", steps=args.steps), columns, rows)
    return 0


def cmd_teleport(args) -> int:
    inst = TeleportInstance(args.rho, args.mu, args.nu)
    runs = enumerate_runs(inst)
    rows = []
    for r in runs:
        kind = "success" if r.s_outcome is not None else "failure"
        rows.append([kind, r.b_outcome,
                     r.s_outcome if r.s_outcome is not None else None,
                     r.probability, r.fidelity, r.correction])
    total = sum(r.probability for r in runs if r.success)
    closed = 1.0 - math.sin(2.0 * args.rho)
    rows.append(["total_success", None, None, total, None, None])
    rows.append(["closed_form", None, None, closed, None, None])
    meta = _meta(args, "teleport", rho=args.rho, mu=args.mu, nu=args.nu)
    if args.sample is not None:
        rep = sample_teleport(inst, args.sample, args.seed)
        rows.append(["sampled_rate", None, None, rep.empirical_rate, None, None])
        rows.append(["sample_sigma", None, None, rep.binomial_sigma, None, None])
        meta.update(sample=args.sample, seed=args.seed)
    columns = ["path", "b_outcome", "s_outcome", "probability", "fidelity",
               "correction"]
    _emit(args, meta, columns, rows)
    return 0


def cmd_selftest(args) -> int:
    report = run_selftest(tolerance_override=args.tolerance, only=args.only)
    meta = _meta(args, "selftest", n_passed=report.n_passed,
                 n_failed=report.n_failed, passed=report.passed)
    if args.tolerance is not None:
        meta["tolerance"] = args.tolerance
    if args.only is not None:
        meta["only"] = args.only
    if args.format == "csv":
        rows = [[c.name, "pass" if c.passed else "FAIL", c.value, c.tolerance,
                 c.detail.replace(",", ";")] for c in report.checks]
        _emit(args, meta, ["check", "status", "value", "tolerance", "detail"],
              rows)
    else:
        doc = {"meta": {k: _r12(v) for k, v in meta.items()}}
        doc.update(report.to_dict())
        doc["checks"] = [
            {**c, "value": _r12(c["value"]) if c["value"] is not None else None,
             "tolerance": _r12(c["tolerance"])}
            for c in doc["checks"]
        ]
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0 if report.passed else 1


# --------------------------------------------------------------------------
# argument plumbing

def _add_output_flags(p) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ussd-lab",
        description="Ancilla-assisted sub-state discrimination: success "
                    "optima, coherence ledgers, and the teleportation "
                    "application. All angles are radians.")
    ap.add_argument("--version", action="version",
                    version=f"ussd-lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="every derived quantity for one instance")
    p.add_argument("--p-plus", type=float, default=0.2,
                   help="prior weight of the first sub-state (default 0.2)")
    p.add_argument("--alpha", type=float, default=0.4,
                   help="system overlap magnitude (default 0.4)")
    p.add_argument("--alpha-phase", type=float, default=0.0,
                   help="system overlap phase in radians (default 0)")
    p.add_argument("--alpha-c", type=float, default=0.0,
                   help="environment overlap magnitude (default 0)")
    p.add_argument("--alpha-c-phase", type=float, default=0.0,
                   help="environment overlap phase in radians (default 0)")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("fig2", help="sweep the environment overlap magnitude")
    p.add_argument("--p-plus", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.4,
                   help="system overlap magnitude (default 0.4)")
    p.add_argument("--steps", type=int, default=101,
                   help="sweep points, endpoints included (default 101)")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_fig2)

    p = sub.add_parser("fig3", help="sweep the system overlap magnitude")
    p.add_argument("--p-plus", type=float, default=0.4)
    p.add_argument("--alpha-c", type=float, default=0.8,
                   help="environment overlap magnitude (default 0.8)")
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--band-points", type=int, default=120,
                   help="phase-scan resolution for the band columns")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_fig3)

    p = sub.add_parser("fig4", help="sweep the channel tangle")
    p.add_argument("--steps", type=int, default=51)
    _add_output_flags(p)
    p.set_defaults(fn=cmd_fig4)

    p = sub.add_parser("teleport", help="branch bookkeeping for one channel")
    p.add_argument("--rho", type=float, default=0.35,
                   help="channel angle in [0, pi/4] (default 0.35)")
    p.add_argument("--mu", type=float, default=math.pi / 2,
                   help="polar angle of the sent state (default pi/2)")
    p.add_argument("--nu", type=float, default=0.0,
                   help="azimuthal angle of the sent state (default 0)")
    p.add_argument("--sample", type=int, default=None, metavar="N",
                   help="also draw N pseudo-random runs")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --sample (default 0)")
    _add_output_flags(p)
    p.set_defaults(fn=cmd_teleport)

    p = sub.add_parser("selftest", help="run the verification battery")
    p.add_argument("--tolerance", type=float, default=None,
                   help="override every per-check tolerance")
    p.add_argument("--only", default=None, metavar="SUBSTR",
                   help="run only checks whose name contains SUBSTR")
    p.add_argument("--format", choices=("csv", "json"), default="json",
                   help="output format (default json)")
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "steps", None) is not None and args.steps < 2:
        print("error: --steps must be at least 2", file=sys.stderr)
        return 2
    if getattr(args, "band_points", None) is not None and args.band_points < 8:
        print("error: --band-points must be at least 8", file=sys.stderr)
        return 2
    if getattr(args, "sample", None) is not None and args.sample < 1:
        print("error: --sample must be a positive count", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except UssdLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":          # pragma: no cover
    sys.exit(main())
