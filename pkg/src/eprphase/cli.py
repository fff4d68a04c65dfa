"""Command-line front end.

Subcommands: ``eval``, ``fig1``, ``fig2``, ``fig4``, ``scan-ch``, ``optimize``,
``mc``.  Exit codes: 0 success, 2 parse error, 3 range error, 4 I/O error,
5 truncation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import shlex
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytics, bell, detector, fock
from .errors import RangeError, TruncationError
from .optimize import OptimizerConfig

EXIT_PARSE, EXIT_RANGE, EXIT_IO, EXIT_TRUNCATION = 2, 3, 4, 5

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-]{_NUM})i$")

FORMULAS = {
    "wigner": "W = 4/pi^2 * exp[-2 cosh(2r)(|a|^2+|b|^2) + 2 sinh(2r)(ab + a*b*)]",
    "qfunc": "Q = 1/(pi cosh r)^2 * exp[-|a|^2 - |b|^2 + tanh(r)(a*b* + ab)]",
    "parity": "E = exp[-2 cosh(2r)(|a|^2+|b|^2) + 2 sinh(2r)(ab + a*b*)] = (pi^2/4) W",
    "nocount-joint": "p_ab = sech^2(r) * exp[-|a|^2 - |b|^2 + tanh(r)(a*b* + ab)] = pi^2 Q",
    "nocount-single": "p_a = sech^2(r) * exp[-|a|^2 sech^2(r)]",
    "ch": "CH = p_ab(a';b') + p_ab(a';b) + p_ab(a;b') - p_ab(a;b) - p_a(a') - p_b(b')",
    "ch-closed-form": "CH = sech^2(r) * (2 e^{-J} - e^{-2J(1+tanh r)} - 1), a = -b = sqrt(J)",
    "chsh": "B = E(a';b') + E(a';b) + E(a;b') - E(a;b)",
}


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` / ``a-bi`` (sign of the imaginary part mandatory, no spaces)."""
    m = _COMPLEX_RE.match(text)
    if m is None:
        raise argparse.ArgumentTypeError(f"expected a complex literal like 0.5-0.3i, got {text!r}")
    return complex(float(m["re"]), float(m["im"]))


def format_complex(z: complex) -> str:
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


def _finite_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return x


def _positive_float(text: str) -> float:
    x = _finite_float(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def _seed(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text!r}")
    return n


def _cutoff(text: str):
    if text == "auto":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a non-negative integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"cutoff must be non-negative, got {text!r}")
    return n


def _grid(text: str):
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:N, got {text!r}") from None
    if len(parts) != 3 or n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:N with N >= 1, got {text!r}")
    return lo, hi, n


def _linspace(spec) -> np.ndarray:
    lo, hi, n = spec
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _g(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------- output


def _render_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, args, parameters: dict, seed=None):
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    data = text.encode("utf-8")
    out.write_bytes(data)
    manifest = {
        "command_line": shlex.join(["eprphase", *args.argv]),
        "argv": list(args.argv),
        "parameters": parameters,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "output_file": out.name,
        "output_sha256": hashlib.sha256(data).hexdigest(),
    }
    Path(str(out) + ".manifest.json").write_text(_render_json(manifest), encoding="utf-8")


def _settings_json(s: bell.BellSettings) -> dict:
    return {k: format_complex(getattr(s, k)) for k in ("alpha", "alpha_prime", "beta", "beta_prime")}


def _settings_from_args(args) -> bell.BellSettings:
    return bell.BellSettings(
        alpha=args.alpha if args.alpha is not None else 0j,
        alpha_prime=args.alpha_prime if args.alpha_prime is not None else 0j,
        beta=args.beta if args.beta is not None else 0j,
        beta_prime=args.beta_prime if args.beta_prime is not None else 0j,
    )


# ---------------------------------------------------------------- commands


def _load_settings(spec: str, r: float) -> bell.BellSettings:
    if spec == "optimized":
        return bell.chsh_optimize(r, OptimizerConfig(refine=False)).settings
    data = json.loads(Path(spec).read_text(encoding="utf-8"))
    s = data.get("settings", data)
    return bell.BellSettings(**{k: parse_complex(s[k]) for k in ("alpha", "alpha_prime", "beta", "beta_prime")})


def cmd_eval(args, parser):
    q, r = args.quantity, args.r
    inputs = {"r": r}
    formula = FORMULAS[q]
    if q in ("wigner", "qfunc", "parity", "nocount-joint"):
        if args.alpha is None or args.beta is None:
            parser.error(f"eval {q} requires --alpha and --beta")
        fn = {"wigner": analytics.wigner, "qfunc": analytics.qfunc, "parity": analytics.parity_correlation,
              "nocount-joint": analytics.nocount_joint}[q]
        value = fn(r, args.alpha, args.beta)
        inputs.update(alpha=format_complex(args.alpha), beta=format_complex(args.beta))
    elif q == "nocount-single":
        if (args.alpha is None) == (args.beta is None):
            parser.error("eval nocount-single requires exactly one of --alpha (mode a) or --beta (mode b)")
        if args.alpha is not None:
            value = analytics.nocount_single_a(r, args.alpha)
            inputs["alpha"] = format_complex(args.alpha)
        else:
            value = analytics.nocount_single_b(r, args.beta)
            inputs["beta"] = format_complex(args.beta)
    elif q == "ch":
        if args.J is not None:
            value = analytics.ch_closed_form(r, args.J)
            inputs["j"] = args.J
            formula = FORMULAS["ch-closed-form"]
        else:
            s = _settings_from_args(args)
            value = bell.ch_combination_general(r, s)
            inputs.update(_settings_json(s))
    else:  # chsh
        if args.J is not None:
            s = bell.BellSettings.restricted(args.J)
            inputs["j"] = args.J
        elif args.settings is not None:
            try:
                s = _load_settings(args.settings, r)
            except (KeyError, TypeError, argparse.ArgumentTypeError, json.JSONDecodeError) as exc:
                parser.error(f"--settings: cannot read settings from {args.settings!r}: {exc}")
            inputs["settings_source"] = args.settings
        else:
            s = _settings_from_args(args)
        value = bell.chsh_combination(r, s)
        inputs.update(_settings_json(s))
    if args.format == "json":
        text = _render_json({"quantity": q, "inputs": inputs, "formula": formula, "value": value})
    elif args.format == "csv":
        keys = list(inputs)
        text = _render_csv(["quantity", *keys, "value"], [[q, *[_csv_value(inputs[k]) for k in keys], _g(value)]])
    else:
        text = _g(value) + "\n"
    _emit(text, args, {"quantity": q, **inputs})


def _csv_value(v):
    return _g(v) if isinstance(v, float) else v


def _fig_quasi(args, which):
    alphas = _linspace(args.alpha_grid)
    betas = _linspace(args.beta_grid)
    fn, name = (analytics.wigner, "wigner") if which == "fig1" else (analytics.qfunc, "qfunc")
    table = fn(args.r, alphas[:, None], betas[None, :])
    header = ["alpha_re[dimensionless]", "beta_re[dimensionless]", f"{name}[dimensionless]"]
    rows = [[_g(a), _g(b), _g(table[i, j])] for i, a in enumerate(alphas) for j, b in enumerate(betas)]
    params = {"figure": which, "r": args.r, "alpha_grid": list(args.alpha_grid), "beta_grid": list(args.beta_grid)}
    _emit(_render_csv(header, rows), args, params)


def cmd_fig1(args, parser):
    _fig_quasi(args, "fig1")


def cmd_fig2(args, parser):
    _fig_quasi(args, "fig2")


def cmd_fig4(args, parser):
    Js = _linspace(args.J_grid)
    rs = _linspace(args.r_grid)
    table = bell.ch_scan(rs, Js)  # [r, J]
    header = ["J[dimensionless]", "r[dimensionless]", "ch_raw[dimensionless]", "ch_violation[dimensionless]"]
    rows = []
    for j, J in enumerate(Js):
        for i, r in enumerate(rs):
            v = table[i, j]
            rows.append([_g(J), _g(r), _g(v), _g(v) if v > 0 else "nan"])
    params = {"figure": "fig4", "J_grid": list(args.J_grid), "r_grid": list(args.r_grid)}
    _emit(_render_csv(header, rows), args, params)


def cmd_scan_ch(args, parser):
    rs = _linspace(args.r_grid)
    J_star, ch_star = bell.ch_scan_maxima(rs, _linspace(args.J_grid))
    params = {"J_grid": list(args.J_grid), "r_grid": list(args.r_grid)}
    if args.format == "json":
        records = [{"r": float(r), "j_star": float(j), "ch_star": float(c), "violated": bool(c > 0)}
                   for r, j, c in zip(rs, J_star, ch_star)]
        _emit(_render_json({"rows": records, **params}), args, params)
        return
    header = ["r[dimensionless]", "J_star[dimensionless]", "ch_star[dimensionless]", "violated[bool]"]
    rows = [[_g(r), _g(j), _g(c), str(bool(c > 0)).lower()] for r, j, c in zip(rs, J_star, ch_star)]
    _emit(_render_csv(header, rows), args, params)


def report_to_json(rep: bell.ViolationReport) -> dict:
    out = {
        "combination": rep.combination,
        "r": rep.r,
        "settings": _settings_json(rep.settings),
        "j": rep.J,
        "value": rep.value,
        "analytic_value": rep.analytic_value,
        "bound_low": rep.bound_low,
        "bound_high": rep.bound_high,
        "violated": rep.violated,
        "converged": rep.converged,
        "optimizer_trace": [[i, v] for i, v in rep.optimizer_trace],
        "messages": list(rep.messages),
        "unrestricted": None,
    }
    if rep.unrestricted is not None:
        u = rep.unrestricted
        out["unrestricted"] = {
            "settings": _settings_json(u.settings),
            "value": u.value,
            "n_iter": u.n_iter,
            "converged": u.converged,
            "optimizer_trace": [[i, v] for i, v in u.trace],
        }
    return out


def _require_json(args, parser):
    if args.format != "json":
        parser.error(f"{args.command} writes JSON only; --format {args.format} is not supported")


def cmd_optimize(args, parser):
    _require_json(args, parser)
    config = OptimizerConfig(max_iter=args.max_iter, tol=args.opt_tol, refine=not args.no_refine)
    run = bell.chsh_optimize if args.combination == "chsh" else bell.ch_optimize
    rep = run(args.r, config)
    params = {"r": args.r, "combination": args.combination, "max_iter": args.max_iter,
              "opt_tol": args.opt_tol, "refine": not args.no_refine}
    _emit(_render_json(report_to_json(rep)), args, params)


def _estimate_json(e: detector.EstimateWithError, target: float) -> dict:
    diff = e.value - target
    if e.std_error > 0:
        z = abs(diff) / e.std_error
    else:
        z = 0.0 if diff == 0 else math.inf
    return {"value": e.value, "std_error": e.std_error, "n_trials": e.n_trials, "seed": e.seed,
            "target": target, "z_score": z if math.isfinite(z) else None}


def _result_inputs(params):
    # the worker count never changes the estimates, so it stays in the manifest only
    return {k: v for k, v in params.items() if k != "workers"}


def cmd_mc(args, parser):
    _require_json(args, parser)
    r = args.r
    params = {"r": r, "trials": args.trials, "seed": args.seed, "workers": args.workers,
              "tol": args.tol, "cutoff": "auto" if args.cutoff is None else args.cutoff}
    if args.combination is not None:
        wanted = "number" if args.combination == "chsh" else "binary"
        if args.detector is not None and args.detector != wanted:
            parser.error(f"--combination {args.combination} requires --detector {wanted}")
        s = _settings_from_args(args)
        est = detector.mc_bell(r, s, args.combination, args.trials, args.seed,
                               cutoff=args.cutoff, tol=args.tol, workers=args.workers)
        target = bell.chsh_combination(r, s) if args.combination == "chsh" else bell.ch_combination_general(r, s)
        params.update(combination=args.combination, detector=wanted, **_settings_json(s))
        body = {"experiment": args.combination, "detector": wanted, "inputs": _result_inputs(params),
                "estimates": {args.combination: _estimate_json(est, target)}}
    else:
        if args.detector is None:
            parser.error("mc requires --detector {number|binary} or --combination {chsh|ch}")
        alpha = args.alpha if args.alpha is not None else 0j
        beta = args.beta if args.beta is not None else 0j
        dist = fock.displaced_joint_distribution(r, alpha, beta, args.cutoff, args.tol)
        params.update(detector=args.detector, alpha=format_complex(alpha), beta=format_complex(beta))
        kw = dict(workers=args.workers, tol=args.tol)
        if args.detector == "number":
            est = detector.estimate_parity_correlation(dist, args.trials, args.seed, **kw)
            estimates = {"parity": _estimate_json(est, analytics.parity_correlation(r, alpha, beta))}
        else:
            both, pa, pb = detector.estimate_nocount(dist, args.trials, args.seed, **kw)
            estimates = {
                "p_ab": _estimate_json(both, analytics.nocount_joint(r, alpha, beta)),
                "p_a": _estimate_json(pa, analytics.nocount_single_a(r, alpha)),
                "p_b": _estimate_json(pb, analytics.nocount_single_b(r, beta)),
            }
        body = {"experiment": "single-setting", "detector": args.detector, "inputs": _result_inputs(params),
                "cutoff": dist.cutoff, "estimates": estimates}
    _emit(_render_json(body), args, params, seed=args.seed)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprphase", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, r_default=None):
        p.add_argument("--r", type=_finite_float, required=r_default is None, default=r_default,
                       help="squeezing parameter r >= 0")
        p.add_argument("--out", default=None, help="output path (a .manifest.json is written beside it)")
        p.add_argument("--format", choices=("text", "json", "csv"), default=None)

    def amplitudes(p):
        for flag in ("--alpha", "--beta", "--alpha-prime", "--beta-prime"):
            p.add_argument(flag, type=parse_complex, default=None, help="complex literal a+bi")

    p = sub.add_parser("eval", help="evaluate one quantity")
    p.add_argument("quantity", choices=("wigner", "qfunc", "parity", "nocount-joint", "nocount-single", "ch", "chsh"))
    common(p)
    amplitudes(p)
    p.add_argument("--J", type=_finite_float, default=None, help="displacement intensity, alpha = -beta = sqrt(J)")
    p.add_argument("--settings", default=None, help="'optimized' or path to an optimize JSON report")
    p.set_defaults(func=cmd_eval, default_format="text")

    for name, quantity in (("fig1", "Wigner"), ("fig2", "Q")):
        p = sub.add_parser(name, help=f"{quantity} function over real alpha, beta grids (CSV)")
        common(p, r_default=1.0)
        p.add_argument("--alpha-grid", type=_grid, default=(-2.0, 2.0, 81), metavar="MIN:MAX:N")
        p.add_argument("--beta-grid", type=_grid, default=(-2.0, 2.0, 81), metavar="MIN:MAX:N")
        p.set_defaults(func=cmd_fig1 if name == "fig1" else cmd_fig2, default_format="csv")

    p = sub.add_parser("fig4", help="CH closed form over (J, r) grids (CSV)")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--J-grid", dest="J_grid", type=_grid, default=(0.0, 1.5, 151), metavar="MIN:MAX:N")
    p.add_argument("--r-grid", type=_grid, default=(0.0, 2.0, 101), metavar="MIN:MAX:N")
    p.set_defaults(func=cmd_fig4, default_format="csv")

    p = sub.add_parser("scan-ch", help="maximum of CH over J for each r")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--J-grid", dest="J_grid", type=_grid, default=(0.0, 1.5, 151), metavar="MIN:MAX:N")
    p.add_argument("--r-grid", type=_grid, default=(0.0, 2.0, 101), metavar="MIN:MAX:N")
    p.set_defaults(func=cmd_scan_ch, default_format="csv")

    p = sub.add_parser("optimize", help="maximise a Bell combination (JSON report)")
    common(p)
    p.add_argument("--combination", choices=("chsh", "ch"), required=True)
    p.add_argument("--max-iter", type=_positive_int, default=2000)
    p.add_argument("--opt-tol", type=_finite_float, default=1e-10)
    p.add_argument("--no-refine", action="store_true", help="skip the unrestricted simplex refinement")
    p.set_defaults(func=cmd_optimize, default_format="json")

    p = sub.add_parser("mc", help="Monte Carlo photodetection experiment (JSON)")
    common(p)
    amplitudes(p)
    p.add_argument("--detector", choices=("number", "binary"), default=None)
    p.add_argument("--combination", choices=("chsh", "ch"), default=None)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--cutoff", type=_cutoff, default=None, help="'auto' or N")
    p.add_argument("--tol", type=_positive_float, default=fock.DEFAULT_TOL)
    p.set_defaults(func=cmd_mc, default_format="json")
    return parser


# flags whose values may legitimately start with "-" (complex literals, grids, reals)
_SIGNED_VALUE_FLAGS = frozenset(
    ("--r", "--J", "--alpha", "--beta", "--alpha-prime", "--beta-prime", "--alpha-grid", "--beta-grid", "--J-grid", "--r-grid")
)


def _attach_signed_values(argv):
    """Rewrite ``--beta -0.2+0i`` as ``--beta=-0.2+0i`` so argparse does not read the value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in _SIGNED_VALUE_FLAGS and nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_attach_signed_values(argv))
    args.argv = argv
    if getattr(args, "format", None) is None:
        args.format = args.default_format
    try:
        args.func(args, parser)
    except RangeError as exc:
        print(f"eprphase: range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except TruncationError as exc:
        print(f"eprphase: truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except OSError as exc:
        print(f"eprphase: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
