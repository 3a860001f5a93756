"""``specgap`` command line.

Chains come either from model flags (``--model rw-g2d1 --a 1/2,1/3,0,1/6``)
or from a JSON document with top-level keys ``model``, ``params`` and
``analysis``::

    {"model": "mh",
     "params": {"target": {"tag": "poisson", "lam": 1},
                "proposal": {"r": "1/2", "q": "0.38"}},
     "analysis": {"eps": 1e-5, "k_max": 400}}

Numbers may be written as rationals (``"1/3"``); they are parsed exactly
and converted to float afterwards.

Exit status: 0 success, 2 input error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import __version__
from .band_chain import BandChain, LimitProfile, StationaryDist, stationary_truncated, validate as validate_chain
from .band_chain import check_invariance, is_reversible
from .errors import InputError, NumericalError, ParseError, SchemaError, SpecgapError
from .models import (
    BdmcSpec,
    bdmc_chain,
    bdmc_profile,
    bdmc_stationary,
    linear_geometric_target,
    mh_chain,
    mh_limit_profile,
    poisson_target,
    proposal_rw,
    rw_chain,
)
from .spectral import Alpha0Result, alpha0_from_profile, neri, solve_tau
from .tables import COLUMNS, TABLES, reproduce
from .truncation import DEFAULT_EPS, DEFAULT_K_MAX, DEFAULT_K_START, estimate_rho2, parameter_sweep

__all__ = ["main", "run", "load_spec", "parse_spec", "ChainSpecDocument", "build_model", "ModelSetup"]

MODEL_TAGS = ("rw", "bdmc", "mh", "explicit")
TARGET_TAGS = ("poisson", "linear-geometric")
SWEEP_COLUMNS = ("parameter", "alpha0", "k_final", "rho_k", "verdict")


# -- chain-spec documents ------------------------------------------------------

@dataclass(frozen=True)
class ChainSpecDocument:
    model: str
    params: dict
    analysis: dict = field(default_factory=dict)


def _number(value, where: str, errors: list):
    """Exact parse of ints, floats and ``"p/q"`` strings."""
    if isinstance(value, bool):
        errors.append(f"{where}: expected a number, got a boolean")
        return None
    try:
        x = Fraction(value) if isinstance(value, (str, int)) else Fraction(float(value))
    except (TypeError, ValueError, ZeroDivisionError):
        errors.append(f"{where}: cannot parse {value!r} as a number")
        return None
    return float(x)


def _probability(value, where, errors):
    x = _number(value, where, errors)
    if x is not None and not 0.0 <= x <= 1.0:
        errors.append(f"{where}: must lie in [0, 1], got {value!r}")
        return None
    return x


def _prob_list(value, where, errors):
    if not isinstance(value, list) or not value:
        errors.append(f"{where}: expected a nonempty list")
        return None
    out = [_probability(v, f"{where}[{i}]", errors) for i, v in enumerate(value)]
    return None if None in out else out


def _row_dict(value, where, errors):
    if not isinstance(value, dict) or not value:
        errors.append(f"{where}: expected an object {{column: probability}}")
        return None
    out = {}
    for key, v in value.items():
        try:
            j = int(key)
        except ValueError:
            errors.append(f"{where}: column {key!r} is not an integer")
            continue
        if j < 0:
            errors.append(f"{where}: column {j} is negative")
            continue
        p = _probability(v, f"{where}[{key}]", errors)
        if p is not None:
            out[j] = p
    return out


def _integer(value, where, errors, lo=0):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        errors.append(f"{where}: expected an integer >= {lo}, got {value!r}")
        return None
    return value


def _need(params, keys, errors):
    for key in keys:
        if key not in params:
            errors.append(f"params.{key}: missing")
    return all(k in params for k in keys)


def _check_params(model: str, raw: dict, errors: list) -> dict:
    p = {}
    if model == "rw":
        if _need(raw, ("g", "d", "a", "boundary"), errors):
            p["g"] = _integer(raw["g"], "params.g", errors, 1)
            p["d"] = _integer(raw["d"], "params.d", errors, 1)
            p["a"] = _prob_list(raw["a"], "params.a", errors)
            b = raw["boundary"]
            if not isinstance(b, list):
                errors.append("params.boundary: expected a list of rows")
            else:
                p["boundary"] = [_row_dict(r, f"params.boundary[{i}]", errors) for i, r in enumerate(b)]
    elif model == "explicit":
        if _need(raw, ("N", "i0", "band", "boundary"), errors):
            p["N"] = _integer(raw["N"], "params.N", errors, 1)
            p["i0"] = _integer(raw["i0"], "params.i0", errors, 0)
            p["band"] = _prob_list(raw["band"], "params.band", errors)
            b = raw["boundary"]
            if not isinstance(b, list):
                errors.append("params.boundary: expected a list of rows")
            else:
                p["boundary"] = [_row_dict(r, f"params.boundary[{i}]", errors) for i, r in enumerate(b)]
    elif model == "bdmc":
        if _need(raw, ("p", "q", "r", "r0"), errors):
            for key in ("p", "q", "r", "r0"):
                p[key] = _probability(raw[key], f"params.{key}", errors)
    elif model == "mh":
        if _need(raw, ("target", "proposal"), errors):
            t = raw["target"]
            if not isinstance(t, dict) or t.get("tag") not in TARGET_TAGS:
                errors.append(f"params.target.tag: expected one of {', '.join(TARGET_TAGS)}")
            elif t["tag"] == "poisson":
                lam = _number(t.get("lam", 1), "params.target.lam", errors)
                if lam is not None and not lam > 0:
                    errors.append("params.target.lam: must be positive")
                p["target"] = {"tag": "poisson", "lam": lam}
            else:
                if "tau" not in t:
                    errors.append("params.target.tau: missing")
                else:
                    p["target"] = {"tag": "linear-geometric",
                                   "tau": _probability(t["tau"], "params.target.tau", errors)}
            prop = raw["proposal"]
            if not isinstance(prop, dict) or "q" not in prop:
                errors.append("params.proposal.q: missing")
            else:
                p["proposal"] = {
                    "r": _probability(prop.get("r", "1/2"), "params.proposal.r", errors),
                    "q": _probability(prop["q"], "params.proposal.q", errors),
                }
    return p


def _check_analysis(raw, errors) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        errors.append("analysis: expected an object")
        return {}
    out = {}
    for key, value in raw.items():
        if key == "eps":
            x = _number(value, "analysis.eps", errors)
            if x is not None and not x > 0:
                errors.append("analysis.eps: must be positive")
            out[key] = x
        elif key in ("k_max", "k_start", "i_max", "ell", "window"):
            out[key] = _integer(value, f"analysis.{key}", errors, 1)
        elif key == "sweep":
            if not isinstance(value, dict) or "param" not in value or not isinstance(value.get("values"), list):
                errors.append("analysis.sweep: expected {\"param\": name, \"values\": [...]}")
            else:
                out[key] = {"param": str(value["param"]),
                            "values": [_number(v, f"analysis.sweep.values[{i}]", errors)
                                       for i, v in enumerate(value["values"])]}
        else:
            errors.append(f"analysis.{key}: unknown option")
    return out


def parse_spec(doc) -> ChainSpecDocument:
    """Validate a decoded document; every violation is reported at once."""
    errors = []
    if not isinstance(doc, dict):
        raise SchemaError(["document: expected a JSON object"])
    unknown = set(doc) - {"model", "params", "analysis"}
    for key in sorted(unknown):
        errors.append(f"{key}: unknown top-level key")
    model = doc.get("model")
    if isinstance(model, list):
        if len(model) != 1:
            errors.append(f"model: exactly one model tag required, got {len(model)}")
            model = None
        else:
            model = model[0]
    if model is None and "model" not in doc:
        errors.append("model: missing")
    elif model is not None and model not in MODEL_TAGS:
        errors.append(f"model: unknown tag {model!r}; expected one of {', '.join(MODEL_TAGS)}")
        model = None
    raw_params = doc.get("params")
    if not isinstance(raw_params, dict):
        errors.append("params: expected an object")
        raw_params = {}
    params = _check_params(model, raw_params, errors) if model else {}
    analysis = _check_analysis(doc.get("analysis"), errors)
    if errors:
        raise SchemaError(errors)
    return ChainSpecDocument(model, params, analysis)


def load_spec(path: str) -> ChainSpecDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_spec(doc)


# -- models ---------------------------------------------------------------------

@dataclass
class ModelSetup:
    chain: BandChain
    profile: LimitProfile
    tau: float
    alpha0: Alpha0Result
    stationary: Callable[[int], StationaryDist]
    similarity: float | None = None


def _profile_setup(chain, profile) -> ModelSetup:
    tau = solve_tau(profile)
    return ModelSetup(
        chain, profile.with_tail_ratio(tau), tau, alpha0_from_profile(profile, tau),
        lambda k: stationary_truncated(chain, k), math.sqrt(tau),
    )


def build_model(doc: ChainSpecDocument) -> ModelSetup:
    p = doc.params
    if doc.model == "rw":
        chain = rw_chain(p["g"], p["d"], p["a"], p["boundary"])
        profile = LimitProfile.from_offsets(dict(zip(range(-p["g"], p["d"] + 1), p["a"])))
        return _profile_setup(chain, profile)
    if doc.model == "explicit":
        N, band = p["N"], p["band"]
        if len(band) != 2 * N + 1:
            raise SchemaError([f"params.band: expected {2 * N + 1} coefficients, got {len(band)}"])
        if len(p["boundary"]) != p["i0"]:
            raise SchemaError([f"params.boundary: expected {p['i0']} rows, got {len(p['boundary'])}"])
        offsets = dict(zip(range(-N, N + 1), band))
        chain = BandChain(N, p["i0"], p["boundary"], lambda i: offsets, name="explicit")
        return _profile_setup(chain, LimitProfile(N, band))
    if doc.model == "bdmc":
        spec = BdmcSpec.constant(p["p"], p["q"], p["r"], p["r0"])
        chain = bdmc_chain(spec)
        if not p["p"] > p["q"]:
            raise NumericalError("need p > q for positive recurrence")
        tau = p["q"] / p["p"]
        profile = bdmc_profile(p["p"], p["r"], p["q"]).with_tail_ratio(tau)
        return ModelSetup(chain, profile, tau, alpha0_from_profile(profile, tau),
                          lambda k: bdmc_stationary(spec, k), math.sqrt(tau))
    if doc.model == "mh":
        t = p["target"]
        target = poisson_target(t["lam"]) if t["tag"] == "poisson" else linear_geometric_target(t["tau"])
        q = p["proposal"]["q"]
        chain = mh_chain(target, proposal_rw(p["proposal"]["r"], q))
        profile = mh_limit_profile({-1: q, 0: 1 - 2 * q, 1: q}, target.tau, 1)
        return ModelSetup(chain, profile, target.tau, alpha0_from_profile(profile, target.tau),
                          target.stationary, math.sqrt(target.tau) if target.tau > 0 else None)
    raise SchemaError([f"model: unknown tag {doc.model!r}"])


def _split_numbers(text: str, flag: str) -> list:
    errors = []
    vals = [_number(s.strip(), flag, errors) for s in text.split(",")]
    if errors:
        raise SchemaError(errors)
    return vals


def _doc_from_flags(args) -> ChainSpecDocument:
    """Shortcut models selected by ``--model``."""
    m = args.model
    if m == "rw-g2d1":
        a = args.a or "1/2,1/3,0,1/6"
        ab = _split_numbers(args.ab, "--ab") if args.ab else [0.5, 0.5]
        if len(ab) != 2:
            raise SchemaError(["--ab: expected two values a,b"])
        doc = {"model": "rw", "params": {"g": 2, "d": 1, "a": a.split(","),
                                         "boundary": [{"0": str(ab[0]), "1": str(1 - ab[0])},
                                                      {"0": str(ab[1]), "2": str(1 - ab[1])}]}}
        # keep the exact boundary values, the string round trip is only for validation
        parsed = parse_spec(doc)
        parsed.params["boundary"] = [{0: ab[0], 1: 1 - ab[0]}, {0: ab[1], 2: 1 - ab[1]}]
        return parsed
    if m == "bdmc":
        return parse_spec({"model": "bdmc", "params": {"p": args.p, "q": args.q, "r": args.r, "r0": args.r0}})
    if m in ("mh-poisson", "mh-geometric"):
        target = {"tag": "poisson", "lam": args.lam} if m == "mh-poisson" else {"tag": "linear-geometric", "tau": args.tau}
        if m == "mh-geometric" and args.tau is None:
            raise SchemaError(["--tau: required for mh-geometric"])
        if args.q is None:
            raise SchemaError(["--q: required for M-H models"])
        return parse_spec({"model": "mh", "params": {"target": target, "proposal": {"r": args.r or "1/2", "q": args.q}}})
    raise SchemaError([f"--model: unknown model {m!r}"])


def _document(args) -> ChainSpecDocument:
    if args.spec and args.model:
        raise SchemaError(["give either --spec or --model, not both"])
    if args.spec:
        return load_spec(args.spec)
    if args.model:
        return _doc_from_flags(args)
    raise SchemaError(["a chain is required: use --spec FILE or --model NAME"])


# -- output -------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _emit(rows: list, columns, fmt: str, out, extra: dict | None = None):
    if fmt == "json":
        payload = [{c: r.get(c) for c in columns} for r in rows]
        if extra:
            payload = {"rows": payload, **extra}
        json.dump(payload, out, indent=2, sort_keys=False)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
    else:
        cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c)
                  for i, c in enumerate(columns)]
        out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
        for row in cells:
            out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _emit_record(record: dict, fmt: str, out):
    if fmt == "json":
        json.dump(record, out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
        w = csv.writer(out, lineterminator="\n")
        w.writerow(flat.keys())
        w.writerow([_fmt(v) for v in flat.values()])
    else:
        width = max(len(k) for k in record)
        for k, v in record.items():
            if isinstance(v, list):
                out.write(f"{k}:\n")
                for item in v:
                    out.write("  " + "  ".join(_fmt(x) for x in item) + "\n")
            elif isinstance(v, dict):
                out.write(f"{k.ljust(width)}  {json.dumps(v, default=str)}\n")
            else:
                out.write(f"{k.ljust(width)}  {_fmt(v)}\n")


def _options(args, doc: ChainSpecDocument | None):
    an = doc.analysis if doc else {}
    eps = args.eps if args.eps is not None else an.get("eps", DEFAULT_EPS)
    k_max = args.k_max if args.k_max is not None else an.get("k_max", DEFAULT_K_MAX)
    k_start = args.k_start if args.k_start is not None else an.get("k_start", DEFAULT_K_START)
    return eps, k_start, k_max


# -- subcommands --------------------------------------------------------------------

def cmd_tau(args, out):
    setup = build_model(_document(args))
    _emit_record({"model": setup.chain.name, "tau": setup.tau}, args.format, out)


def cmd_alpha0(args, out):
    setup = build_model(_document(args))
    a = setup.alpha0
    _emit_record({"model": setup.chain.name, "alpha0": a.value, "method": a.method, "tau": a.tau},
                 args.format, out)


def cmd_rho2(args, out):
    doc = _document(args)
    setup = build_model(doc)
    eps, k_start, k_max = _options(args, doc)
    est = estimate_rho2(setup.chain, setup.alpha0.value, eps, k_start, k_max, similarity=setup.similarity)
    record = {"model": setup.chain.name, **est.as_dict(trajectory=args.verbose)}
    _emit_record(record, args.format, out)
    return 0 if est.stabilized else 3


def _set_param(doc: ChainSpecDocument, name: str, value: float) -> ChainSpecDocument:
    params = json.loads(json.dumps(doc.params))
    if doc.model == "rw":
        params["boundary"] = doc.params["boundary"]
    targets = {
        "mh": {"q": ("proposal", "q"), "r": ("proposal", "r"), "tau": ("target", "tau"), "lam": ("target", "lam")},
    }.get(doc.model, {})
    if name in targets:
        outer, inner = targets[name]
        params[outer][inner] = value
    elif name in params and not isinstance(params[name], (list, dict)):
        params[name] = value
    else:
        raise SchemaError([f"sweep parameter {name!r} is not a scalar parameter of model {doc.model!r}"])
    if doc.model == "bdmc" and name in ("p", "q"):
        # keep the rates stochastic: r absorbs the change
        params["r"] = 1.0 - params["p"] - params["q"]
    return ChainSpecDocument(doc.model, params, doc.analysis)


def cmd_sweep(args, out):
    doc = _document(args)
    eps, k_start, k_max = _options(args, doc)
    sweep = doc.analysis.get("sweep")
    name = args.param or (sweep or {}).get("param")
    values = _split_numbers(args.values, "--values") if args.values else (sweep or {}).get("values")
    if not name or not values:
        raise SchemaError(["sweep needs a parameter and values (--param/--values or analysis.sweep)"])

    def builder(v):
        setup = build_model(_set_param(doc, name, v))
        return setup.chain, setup.alpha0.value, {"similarity": setup.similarity}

    rows = []
    for point in parameter_sweep(builder, values, eps, k_max, k_start):
        if point.estimate is None:
            rows.append({"parameter": point.parameter, "verdict": f"error: {point.error}"})
            continue
        e = point.estimate
        rows.append({"parameter": point.parameter, "alpha0": e.alpha0, "k_final": e.k_final,
                     "rho_k": e.rho, "verdict": e.verdict or "unstabilized"})
    _emit(rows, SWEEP_COLUMNS, args.format, out)
    return 0 if all(not str(r["verdict"]).startswith("error") for r in rows) else 3


def cmd_reproduce(args, out):
    eps, k_start, k_max = _options(args, None)
    rows = reproduce(args.table, eps, k_start, k_max)
    fmt = args.format or "csv"
    _emit(rows, COLUMNS, fmt, out)


def cmd_validate(args, out):
    doc = _document(args)
    setup = build_model(doc)
    window = doc.analysis.get("window", args.window)
    chain = setup.chain
    report = validate_chain(chain, window)
    pi = setup.stationary(window + chain.reach + 2)
    inv = max(check_invariance(chain, pi, i) for i in range(1, window - chain.reach))
    has_neri, drift = neri(setup.profile)
    record = {
        "model": chain.name,
        "window": window,
        "checked_rows": report.checked_rows,
        "max_row_sum_deviation": report.max_row_sum_deviation,
        "violations": len(report.violations),
        "neri": has_neri,
        "mean_increment": drift,
        "tau": setup.tau,
        "alpha0": setup.alpha0.value,
        "reversible": is_reversible(chain, pi, window, tol=1e-10, relative=True),
        "max_invariance_residual": inv,
    }
    if args.verbose and report.violations:
        record["violation_list"] = [[v] for v in report.violations]
    _emit_record(record, args.format, out)
    return 0 if report.ok else 2


# -- entry point ----------------------------------------------------------------------

def _add_chain_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("chain")
    g.add_argument("--spec", help="JSON chain-spec document")
    g.add_argument("--model", choices=("rw-g2d1", "bdmc", "mh-poisson", "mh-geometric"))
    g.add_argument("--a", help="rw-g2d1 increments a_-2,a_-1,a_0,a_1 (default 1/2,1/3,0,1/6)")
    g.add_argument("--ab", help="rw-g2d1 boundary parameters a,b (default 1/2,1/2)")
    g.add_argument("--p")
    g.add_argument("--q")
    g.add_argument("--r")
    g.add_argument("--r0")
    g.add_argument("--tau")
    g.add_argument("--lam", default="1")


def _add_loop_options(p: argparse.ArgumentParser):
    p.add_argument("--eps", type=float, default=None, help=f"stabilization tolerance (default {DEFAULT_EPS:g})")
    p.add_argument("--k-max", type=int, default=None, help=f"largest truncation order (default {DEFAULT_K_MAX})")
    p.add_argument("--k-start", type=int, default=None, help=f"first truncation order (default {DEFAULT_K_START})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specgap", description="l2 convergence rates of band Markov chains")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "csv", "json"), default=None)
    common.add_argument("--verbose", "-v", action="store_true", help="include the rho_k trajectory")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("tau", cmd_tau, "tail ratio of the invariant law"),
        ("alpha0", cmd_alpha0, "bound on the essential spectral radius"),
        ("rho2", cmd_rho2, "truncation estimate of the convergence rate"),
        ("sweep", cmd_sweep, "rho2 over a parameter grid"),
        ("validate", cmd_validate, "row and invariance diagnostics"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_chain_options(p)
        if name in ("rho2", "sweep"):
            _add_loop_options(p)
        if name == "sweep":
            p.add_argument("--param", help="parameter to vary (e.g. q, tau, p, r0)")
            p.add_argument("--values", help="comma-separated values")
        if name == "validate":
            p.add_argument("--window", type=int, default=200)
        p.set_defaults(func=fn)

    p = sub.add_parser("reproduce", parents=[common], help="regenerate a reference table")
    p.add_argument("table", choices=TABLES)
    _add_loop_options(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None and args.command != "reproduce":
        args.format = "human"
    try:
        status = args.func(args, out)
    except SchemaError as exc:
        for v in exc.violations:
            err.write(f"specgap: {v}\n")
        return 2
    except InputError as exc:
        err.write(f"specgap: input error: {exc}\n")
        return 2
    except NumericalError as exc:
        err.write(f"specgap: numerical error: {exc}\n")
        return 3
    except SpecgapError as exc:
        err.write(f"specgap: {exc}\n")
        return 3
    return status or 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
