"""Command-line interface.

Usage::

    tracespec SUBCOMMAND [--config FILE | --preset NAME] [--precision BITS] [--out DIR] [options]

Subcommands: ``moments``, ``ek``, ``spectrum``, ``qmin``, ``norm-bound``,
``oracle`` and ``report``.  Results are written as CSV (20 significant
digits, LF line endings) plus a JSON summary per command; a one-line JSON
summary goes to stdout.  Exit codes: 0 success, 2 validation error,
3 numerical failure; errors are reported as JSON on stderr.

The config file is TOML.  Numbers may be written as TOML floats, integers or
strings (``"3/2"`` is accepted); floats are read from their decimal text, so
no binary round-trip happens before the working precision is applied::

    precision = 256

    [kernel]
    type = "polygauss"        # or "gaussian"
    A = "3/2"
    C = 1
    A_P = -1
    C_P = 40
    F_P = 1

    [qmin]
    n_max = 40
    c_source = "explicit"     # "oracle", "holder" or "explicit"
    c = 1.16445

    [output]
    dir = "out"
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import gmpy2
import tomli

from . import __version__
from .elemsym import check_ek_bound, ek_newton
from .errors import NumericalError, TraceSpecError, ValidationError
from .kernels import GaussianKernel, PolyGaussianKernel, validate
from .moments import moment_sequence
from .normbound import minimize_R, product_R, w_min_gaussian
from .oracle import exact_gaussian_spectrum, nystrom_spectrum, oracle_quantities
from .precision import DEFAULT_PRECISION, MIN_PRECISION, big, fmt, precision
from .presets import PRESETS, polygauss_family, preset
from .spectrum import hausdorff, lambda_n, q_n0, q_nc, rate_report, LowerBoundSeries

COMMANDS = ("moments", "ek", "spectrum", "qmin", "norm-bound", "oracle", "report")

_GAUSS_KEYS = {"A", "B", "C", "D", "E"}
_POLY_KEYS = {"A_P", "B_P", "C_P", "D_P", "E_P", "F_P"}
_SCHEMA = {
    "precision": None,
    "kernel": {"type", "normalized"} | _GAUSS_KEYS | _POLY_KEYS,
    "moments": {"n"},
    "ek": {"n", "c"},
    "spectrum": {"n", "reference_count", "m_nystrom"},
    "qmin": {"n_max", "c_source", "c", "m_nystrom"},
    "norm_bound": {"samples", "sweep_C_P"},
    "oracle": {"m"},
    "output": {"dir"},
}
_DEFAULTS = {
    "moments": {"n": 10},
    "ek": {"n": 10},
    "spectrum": {"n": 10, "reference_count": 40, "m_nystrom": 200},
    "qmin": {"n_max": 40, "c_source": "oracle", "m_nystrom": 200},
    "norm_bound": {"samples": 128},
    "oracle": {"m": 200},
}


# ---------------------------------------------------------------- config


def _num(v):
    if isinstance(v, bool):
        raise ValidationError(f"expected a number, got {v!r}", [f"not a number: {v!r}"])
    if isinstance(v, str):
        s = v.strip()
        try:
            if "/" in s:
                return Fraction(s)
            big(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a number: {v!r}", [f"not a number: {v!r}"]) from exc
        return s
    if isinstance(v, int):
        return v
    raise ValidationError(f"expected a number, got {v!r}", [f"not a number: {v!r}"])


def load_config(text: str) -> dict:
    """Parse and check a TOML config; unknown keys are rejected."""
    try:
        raw = tomli.loads(text, parse_float=str)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"config is not valid TOML: {exc}", [str(exc)]) from exc
    bad = []
    for key, val in raw.items():
        if key not in _SCHEMA:
            bad.append(f"unknown section or key: {key}")
        elif _SCHEMA[key] is not None:
            if not isinstance(val, dict):
                bad.append(f"[{key}] must be a table")
                continue
            bad.extend(f"unknown key: {key}.{k}" for k in val if k not in _SCHEMA[key])
    if bad:
        raise ValidationError("invalid config", bad)
    return raw


def kernel_from_config(block: dict):
    """Build a kernel from a ``[kernel]`` table; raises ValidationError on bad input."""
    if "type" not in block:
        raise ValidationError("kernel.type is required", ["kernel.type missing"])
    kind = block["type"]
    normalized = bool(block.get("normalized", True))
    missing = [k for k in ("A", "C") if k not in block]
    if missing:
        raise ValidationError("missing kernel parameters", [f"kernel.{k} missing" for k in missing])
    gauss_args = {k: _num(block[k]) for k in _GAUSS_KEYS if k in block}
    if kind == "gaussian":
        extra = [k for k in _POLY_KEYS if k in block]
        if extra:
            raise ValidationError("polynomial keys on a gaussian kernel", [f"unexpected key kernel.{k}" for k in extra])
        k = GaussianKernel(normalized=normalized, **gauss_args)
    elif kind == "polygauss":
        poly_args = {k: _num(block[k]) for k in _POLY_KEYS if k in block}
        k = PolyGaussianKernel(gauss=GaussianKernel(**gauss_args), normalized=normalized, **poly_args)
    else:
        raise ValidationError(f"unknown kernel type {kind!r}", [f"kernel.type must be gaussian or polygauss, got {kind!r}"])
    violations = validate(k)
    if violations:
        raise ValidationError("kernel violates its invariants", violations)
    return k


# ---------------------------------------------------------------- output


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        return str(v)
    return fmt(v, 20)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    _write_atomic(path, buf.getvalue())


def write_json(path: Path, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands


def _opt(cfg, section, key, override=None):
    if override is not None:
        return override
    return cfg.get(section, {}).get(key, _DEFAULTS.get(section, {}).get(key))


def _reference_spectrum(k, cfg, args):
    """Reference eigenvalues: exact for Gaussians, Nystrom otherwise."""
    if isinstance(k, GaussianKernel):
        count = int(_opt(cfg, "spectrum", "reference_count", getattr(args, "ref_count", None)))
        return list(exact_gaussian_spectrum(k, count).eigenvalues), "exact"
    m = int(_opt(cfg, "spectrum", "m_nystrom", getattr(args, "m", None)))
    model = nystrom_spectrum(k, m)
    return [big(float(v)) for v in model.eigenvalues], f"nystrom-{m}"


def cmd_moments(k, cfg, args, out: Path) -> dict:
    n = int(_opt(cfg, "moments", "n", args.n))
    ms = moment_sequence(k, n)
    write_csv(out / "moments.csv", ["l", "M_l"], [(i + 1, v) for i, v in enumerate(ms.values)])
    return {"n": n, "files": ["moments.csv"]}


def cmd_ek(k, cfg, args, out: Path) -> dict:
    n = int(_opt(cfg, "ek", "n", args.n))
    e = ek_newton(moment_sequence(k, n), n)
    write_csv(out / "ek.csv", ["k", "e_k"], list(enumerate(e.e)))
    summary = {"n": n, "files": ["ek.csv"]}
    c = _opt(cfg, "ek", "c", getattr(args, "c", None))
    if c is not None:
        viol = check_ek_bound(e, _num(c))
        summary["bound_c"] = str(c)
        summary["bound_first_violation"] = viol
    return summary


def cmd_spectrum(k, cfg, args, out: Path) -> dict:
    n = int(_opt(cfg, "spectrum", "n", args.n))
    e = ek_newton(moment_sequence(k, n), n)
    ref, ref_kind = _reference_spectrum(k, cfg, args)
    ref_set = ref + [big(0)]
    rows, hrows = [], []
    for j in range(1, n + 1):
        est = lambda_n(e, j)
        for i, lam in enumerate(est.by_abs):
            rows.append((j, i, lam))
        hd = hausdorff(est.lambda_set, ref_set) if est.lambda_set else None
        hrows.append((j, len(est.lambda_set), hd))
    write_csv(out / "spectrum.csv", ["n", "index", "lambda"], rows)
    write_csv(out / "hausdorff.csv", ["n", "size", "hausdorff_to_reference"], hrows)
    return {"n": n, "reference": ref_kind, "files": ["spectrum.csv", "hausdorff.csv"]}


def _resolve_c(k, cfg, args, source, oracle_l1):
    if source == "explicit":
        c = _opt(cfg, "qmin", "c", getattr(args, "c", None))
        if c is None:
            raise ValidationError("c_source=explicit needs c", ["qmin.c missing"])
        c = big(_num(c))
        if not c > 0:
            raise ValidationError("c must be positive", ["qmin.c > 0"])
        return c
    if source == "oracle":
        return big(oracle_l1)
    if source == "holder":
        return minimize_R(k).bound_1norm
    raise ValidationError(f"unknown c_source {source!r}", ["qmin.c_source must be oracle, holder or explicit"])


def cmd_qmin(k, cfg, args, out: Path) -> dict:
    n_max = int(_opt(cfg, "qmin", "n_max", args.n))
    source = _opt(cfg, "qmin", "c_source", getattr(args, "c_source", None))
    e = ek_newton(moment_sequence(k, n_max), n_max)
    ref, ref_kind = _reference_spectrum(k, cfg, args)
    if isinstance(k, GaussianKernel):
        l1 = exact_gaussian_spectrum(k, 1).l1_norm
    else:
        l1 = sum(abs(v) for v in ref)
    lam_min = min(min(ref), big(0))
    c = _resolve_c(k, cfg, args, source, l1)
    ns = list(range(1, n_max + 1))
    q0 = [q_n0(e, n) for n in ns]
    qc = [q_nc(e, c, n) for n in ns]
    rows = []
    report = None
    if lam_min < 0:
        report = rate_report(LowerBoundSeries(kind="qc", c=c, ns=tuple(ns), values=tuple(qc)), lam_min, c)
    for i, n in enumerate(ns):
        hd = None
        est = lambda_n(e, n)
        if est.lambda_set:
            hd = hausdorff(est.lambda_set, ref + [big(0)])
        bound = report.allowed_gap[i] if report is not None else None
        rows.append((n, q0[i], qc[i], hd, bound))
    write_csv(out / "qmin.csv", ["n", "q_n0", "q_nc", "hausdorff_to_oracle", "theorem_bound"], rows)
    summary = {
        "n_max": n_max,
        "c_source": source,
        "c": fmt(c),
        "reference": ref_kind,
        "lambda_min_reference": fmt(lam_min),
        "files": ["qmin.csv"],
    }
    if report is not None:
        summary["alpha"] = fmt(report.alpha)
        summary["rate_flags"] = list(report.flags)
    return summary


def cmd_norm_bound(k, cfg, args, out: Path) -> dict:
    samples = int(_opt(cfg, "norm_bound", "samples"))
    res = minimize_R(k, samples=samples)
    g = k.gauss if isinstance(k, PolyGaussianKernel) else k
    A, _, C, _, _ = g.params()
    wg = w_min_gaussian(A, C)
    at_wg = product_R(k, wg) if wg < min(A, C) else None
    summary = {
        "w_min": fmt(res.w_min),
        "bound_1norm": fmt(res.bound_1norm),
        "bound_at_w_min_gaussian": fmt(gmpy2.sqrt(at_wg)) if at_wg is not None else None,
        "trace": fmt(res.trace),
        "neg_upper": fmt(res.neg_upper),
        "lambda_min_lower": fmt(res.lambda_min_lower),
        "intervals": [[fmt(a), fmt(b)] for a, b in res.intervals],
        "files": ["norm_bound.json"],
    }
    sweep = _opt(cfg, "norm_bound", "sweep_C_P", getattr(args, "sweep_cp", None))
    if sweep and isinstance(k, PolyGaussianKernel):
        rows = []
        for cp in sweep:
            kk = PolyGaussianKernel(
                gauss=k.gauss, A_P=k.A_P, B_P=k.B_P, C_P=_num(cp), D_P=k.D_P, E_P=k.E_P, F_P=k.F_P
            )
            r = minimize_R(kk, samples=samples)
            lg = gmpy2.sqrt(product_R(kk, wg))
            l1 = oracle_quantities(nystrom_spectrum(kk, int(_opt(cfg, "oracle", "m"))))[0]
            rows.append((str(cp), r.bound_1norm, lg, big(l1)))
        write_csv(out / "norm_bound_sweep.csv", ["C_P", "bound_L1_opt", "bound_L1_at_wminG", "oracle_L1"], rows)
        summary["files"].append("norm_bound_sweep.csv")
    write_json(out / "norm_bound.json", summary)
    return summary


def cmd_oracle(k, cfg, args, out: Path) -> dict:
    m = int(_opt(cfg, "oracle", "m", getattr(args, "m", None)))
    model = nystrom_spectrum(k, m)
    write_csv(out / "oracle.csv", ["i", "lambda_i"], [(i, big(float(v))) for i, v in enumerate(model.eigenvalues)])
    l1, lmin, neg, tr = oracle_quantities(model)
    summary = {
        "m": m,
        "l1_norm": repr(l1),
        "lambda_min": repr(lmin),
        "negativity": repr(neg),
        "trace": repr(tr),
        "files": ["oracle.csv", "oracle.json"],
    }
    write_json(out / "oracle.json", summary)
    return summary


_RUNNERS = {
    "moments": cmd_moments,
    "ek": cmd_ek,
    "spectrum": cmd_spectrum,
    "qmin": cmd_qmin,
    "norm-bound": cmd_norm_bound,
    "oracle": cmd_oracle,
}


def cmd_report(k, cfg, args, out: Path) -> dict:
    """Everything; without a kernel, the reference kernels and the C_P sweep."""
    if k is not None:
        return {name: fn(k, cfg, args, out) for name, fn in _RUNNERS.items()}
    results = {}
    plan = {
        "gauss-1-4": ("moments", "ek", "spectrum", "qmin", "norm-bound", "oracle"),
        "polygauss-cp5": ("moments", "ek", "spectrum", "oracle"),
        "polygauss-cp1": ("ek", "qmin", "norm-bound", "oracle"),
        "polygauss-cp40": ("moments", "ek", "qmin", "norm-bound", "oracle"),
    }
    sub_cfg = {
        "gauss-1-4": {"ek": {"n": 16}, "spectrum": {"n": 16}, "qmin": {"n_max": 30, "c_source": "oracle"}},
        "polygauss-cp5": {"moments": {"n": 10}, "ek": {"n": 10}, "spectrum": {"n": 10}},
        "polygauss-cp1": {"ek": {"n": 60}, "qmin": {"n_max": 60, "c_source": "explicit", "c": "1.04054"}},
        "polygauss-cp40": {
            "moments": {"n": 40},
            "ek": {"n": 40},
            "qmin": {"n_max": 40, "c_source": "explicit", "c": "1.16445"},
        },
    }
    blank = argparse.Namespace(n=None, m=None, c=None, c_source=None, ref_count=None, sweep_cp=None)
    for name, cmds in plan.items():
        kk = preset(name)
        sub = out / name
        results[name] = {c: _RUNNERS[c](kk, sub_cfg[name], blank, sub) for c in cmds}
    # second budget for the C_P = 40 kernel: the optimized factorization bound
    hold = {"qmin": {"n_max": 40, "c_source": "holder"}}
    results["polygauss-cp40-holder"] = {
        "qmin": cmd_qmin(preset("polygauss-cp40"), hold, blank, out / "polygauss-cp40-holder")
    }
    sweep_cfg = {"norm_bound": {"sweep_C_P": list(range(1, 41))}, "oracle": {"m": 200}}
    results["norm-bound-sweep"] = cmd_norm_bound(polygauss_family(1), sweep_cfg, blank, out / "norm-bound-sweep")
    return results


# ---------------------------------------------------------------- entry point


def _add_common(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, default=d, help="TOML config file")
    p.add_argument("--preset", choices=sorted(PRESETS), default=d, help="use a built-in kernel")
    p.add_argument("--precision", type=int, default=d, help=f"working precision in bits (default {DEFAULT_PRECISION})")
    p.add_argument("--out", type=Path, default=d, help="output directory (default: out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracespec", description="Spectral estimates for polynomial-Gaussian integral operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p, suppress=True)
        p.add_argument("--n", type=int, default=None, help="order (n or n_max)")
        if name in ("spectrum", "qmin", "oracle"):
            p.add_argument("--m", type=int, default=None, help="Nystrom node count")
        if name == "spectrum":
            p.add_argument("--ref-count", type=int, default=None, help="exact Gaussian eigenvalues in the reference")
        if name in ("qmin", "ek"):
            p.add_argument("--c", default=None, help="explicit 1-norm budget")
        if name == "qmin":
            p.add_argument("--c-source", choices=("oracle", "holder", "explicit"), default=None)
        if name == "norm-bound":
            p.add_argument("--sweep-cp", type=lambda s: [v for v in s.split(",") if v], default=None,
                           help="comma-separated C_P values for a family sweep")
    return parser


def _fail(code: int, exc: Exception) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ValidationError):
        payload["violations"] = exc.violations
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config is not None:
            try:
                text = args.config.read_text(encoding="utf-8")
            except OSError as exc:
                raise ValidationError(f"cannot read config: {exc}", [str(exc)]) from exc
            cfg = load_config(text)
        bits = args.precision or cfg.get("precision") or DEFAULT_PRECISION
        if int(bits) < MIN_PRECISION:
            raise ValidationError(f"precision must be at least {MIN_PRECISION}", [f"precision >= {MIN_PRECISION}"])
        out = args.out or Path(cfg.get("output", {}).get("dir", "out"))
        with precision(int(bits)):
            if args.preset and "kernel" in cfg:
                raise ValidationError("use either --preset or a [kernel] block", ["conflicting kernel sources"])
            if args.preset:
                kernel = preset(args.preset)
            elif "kernel" in cfg:
                kernel = kernel_from_config(cfg["kernel"])
            elif args.command == "report":
                kernel = None
            else:
                raise ValidationError("no kernel given", ["pass --config with a [kernel] block or --preset"])
            t0 = time.perf_counter()
            if args.command == "report":
                result = cmd_report(kernel, cfg, args, out)
            else:
                result = _RUNNERS[args.command](kernel, cfg, args, out)
            elapsed = time.perf_counter() - t0
    except ValidationError as exc:
        return _fail(2, exc)
    except NumericalError as exc:
        return _fail(3, exc)
    except TraceSpecError as exc:
        return _fail(3, exc)
    print(json.dumps({"command": args.command, "out": str(out), "seconds": round(elapsed, 3), "result": result}, sort_keys=True, default=str))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
