"""Command-line front end.

Commands: ``decompose``, ``metrics``, ``compose``, ``verify``, ``sweep``.
Data outputs are byte-identical for identical (inputs, flags, seed); every
output *file* is accompanied by a ``<file>.manifest.json`` sidecar carrying
the resolved configuration, seed, wall-clock, and interpretation notes
(the sidecar contains the wall clock and is therefore not byte-stable).

Exit codes: 0 ok, 1 bound violation, 2 parse error, 3 domain error
(CPTP / non-catastrophic), 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__, channel as chn, genlib, metrics, polar, suites
from .errors import ChanPolarError, ParamOutOfRange

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_USAGE = 64


def _fmt(x) -> str:
    """Fixed 17-significant-digit decimal rendering for CSV cells."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _error_json(kind: str, detail: str):
    sys.stderr.write(json.dumps({"error": kind, "detail": detail}) + "\n")


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot parse {path}: {exc}") from exc


def _load_channel(path: str) -> chn.KrausChannel:
    obj = chn.channel_from_json(_load_json(path))
    if isinstance(obj, chn.ChoiMatrix):
        return chn.from_choi(obj).as_channel()
    return obj


def _write_manifest(out_path: str, command: str, config: dict, seed, notes, t0: float):
    manifest = {
        "tool": "chanpolar",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "wallclock_s": time.time() - t0,
        "notes": list(notes),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(payload: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _matrix_json(m) -> list:
    return chn._matrix_to_pairs(np.asarray(m))


# ---------------------------------------------------------------------------
# decompose / metrics
# ---------------------------------------------------------------------------


def _decompose_report(ch: chn.KrausChannel, target, kappa: float, strict: bool) -> dict:
    canon = chn.canonical(ch)
    pol = polar.channel_polar(ch, strict=strict)
    eq = None
    try:
        eq_rep = polar.equability(ch, kappa)
        eq = {
            "sigma": [float(s) for s in eq_rep.sigma],
            "lambda_re": [float(x) for x in eq_rep.lambda_re],
            "Gamma_decoh": eq_rep.Gamma_decoh,
            "Gamma_coh": eq_rep.Gamma_coh,
            "gamma_decoh": eq_rep.gamma_decoh,
            "gamma_coh": eq_rep.gamma_coh,
            "sse_ok": eq_rep.sse_ok,
            "wse_ok": eq_rep.wse_ok,
            "kappa": eq_rep.kappa,
        }
    except ChanPolarError as exc:
        eq = {"error": str(exc), "kappa": kappa}
    rep = metrics.report(ch, target)
    split = polar.infidelity_split(ch, target)
    cls = polar.classify(ch, target, kappa)
    return {
        "dim": ch.dim,
        "canonical_kraus": [_matrix_json(a) for a in canon.kraus],
        "weights": [float(w) for w in canon.weights],
        "degenerate_leading": canon.degenerate_leading,
        "lk": {"a1": _matrix_json(canon.a1), "weight": canon.w1},
        "polar": {
            "unitary": _matrix_json(pol.unitary),
            "psd": _matrix_json(pol.psd),
            "phase_fixed": pol.phase_fixed,
            "unique": pol.unique,
            "singular_values": [float(s) for s in pol.singular_values],
        },
        "decoherent": polar.is_decoherent(ch),
        "equability": eq,
        "metrics": rep.as_dict(),
        "infidelity_split": split.as_dict(),
        "classification": cls.as_dict(),
    }


def _cmd_decompose(args) -> int:
    t0 = time.time()
    try:
        ch = _load_channel(args.infile)
        target = (
            chn.unitary_from_json(_load_json(args.target)) if args.target else None
        )
    except ChanPolarError as exc:  # e.g. NotCP while decomposing a Choi input
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    except ValueError as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    val = chn.validate_cptp(ch)
    if not val.ok:
        _error_json(
            "domain",
            f"channel is not CPTP (cp_slack={val.cp_slack:.3e}, "
            f"tp_slack={val.tp_slack:.3e})",
        )
        return EXIT_DOMAIN
    try:
        report = _decompose_report(ch, target, args.kappa, args.strict_lk)
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    payload = json.dumps(report, indent=2) + "\n"
    _emit(payload, args.out)
    if args.out:
        _write_manifest(
            args.out,
            "decompose",
            {"in": args.infile, "target": args.target, "kappa": args.kappa,
             "strict_lk": args.strict_lk},
            None,
            [],
            t0,
        )
    return EXIT_OK


def _cmd_metrics(args) -> int:
    t0 = time.time()
    try:
        ch = _load_channel(args.infile)
        target = (
            chn.unitary_from_json(_load_json(args.target)) if args.target else None
        )
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    except ValueError as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    val = chn.validate_cptp(ch)
    if not val.ok:
        _error_json("domain", "channel is not CPTP")
        return EXIT_DOMAIN
    try:
        rep = metrics.report(ch, target)
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    payload = json.dumps(rep.as_dict(), indent=2) + "\n"
    _emit(payload, args.out)
    if args.out:
        _write_manifest(
            args.out, "metrics", {"in": args.infile, "target": args.target}, None, [], t0
        )
    return EXIT_OK


def _cmd_compose(args) -> int:
    t0 = time.time()
    try:
        chans = [_load_channel(p) for p in args.infile]
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    except ValueError as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    for c in chans:
        if not chn.validate_cptp(c).ok:
            _error_json("domain", "an input channel is not CPTP")
            return EXIT_DOMAIN
    try:
        composed = chn.canonical(chn.compose(chans)).as_channel()
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    payload = json.dumps(chn.channel_to_json(composed), indent=2) + "\n"
    _emit(payload, args.out)
    if args.out:
        _write_manifest(args.out, "compose", {"in": list(args.infile)}, None, [], t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_VERIFY_COLUMNS = ("case_id", "theorem", "observed", "lower", "upper", "slack", "holds")


def _cases_csv(cases) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_VERIFY_COLUMNS)
    for c in cases:
        writer.writerow(
            [c.case_id, c.theorem, _fmt(c.observed), _fmt(c.lower), _fmt(c.upper),
             _fmt(c.slack), _fmt(c.holds)]
        )
    return buf.getvalue()


def _cmd_verify(args, parser) -> int:
    t0 = time.time()
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    if args.seed < 0:
        parser.error("--seed must be non-negative")
    dims = tuple(int(x) for x in args.dims.split(",")) if args.dims else None
    cases = suites.run_suite(args.suite, dims=dims, trials=args.trials, seed=args.seed)
    payload = _cases_csv(cases)
    _emit(payload, args.out)
    if args.out:
        _write_manifest(
            args.out,
            "verify",
            {"suite": args.suite, "dims": dims, "trials": args.trials},
            args.seed,
            [],
            t0,
        )
    n_fail = sum(1 for c in cases if not c.holds)
    summary = f"verify {args.suite}: {len(cases)} cases, {n_fail} violations\n"
    sys.stderr.write(summary)
    return EXIT_OK if n_fail == 0 else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_COLUMNS = (
    "depth", "phi", "upsilon_envelope", "thm8_centre", "thm8_lower", "thm8_upper",
    "coherent_lower", "non_catastrophic", "contained",
)

_FIG3_NOTE = (
    "coherence_mix 'infidelity' is the average infidelity r = 1 - F of the "
    "element; figure-style captions quoting a decoherent-factor process "
    "fidelity of 1e-4 are interpreted as infidelity 1 - Phi = 1e-4 (a "
    "literal Phi of 1e-4 would be catastrophic)."
)


def _cmd_sweep(args, parser) -> int:
    t0 = time.time()
    try:
        cfg = _load_json(args.config)
        if not isinstance(cfg, dict):
            raise ValueError("sweep config must be a JSON object")
        mode = cfg.get("mode", "composition")
        fam = genlib.FamilySpec.from_dict(cfg["family"]) if "family" in cfg else None
        if fam is None:
            raise ValueError("sweep config needs a 'family' entry")
    except (ValueError, KeyError) as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    if args.seed is not None:
        fam.seed = args.seed
    out_path = args.out or cfg.get("out")
    notes = []
    if fam.family == "coherence_mix":
        notes.append(_FIG3_NOTE)
    try:
        element = genlib.make_channel(fam)
    except ParamOutOfRange as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    except ChanPolarError as exc:
        _error_json("domain", str(exc))
        return EXIT_DOMAIN
    if mode == "sigma_profile":
        kappa = (
            args.kappa if args.kappa is not None else float(cfg.get("kappa", 0.1))
        )
        prof = suites.sigma_profile(element, kappa)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["row_type", "index", "value", "mean", "sd", "gamma_decoh",
             "Gamma_decoh", "threshold", "sse_decoh_ok", "wse_decoh_ok"]
        )
        for i, s in enumerate(prof.sigma):
            writer.writerow(["sigma", str(i), _fmt(s), "", "", "", "", "", "", ""])
        writer.writerow(
            ["summary", "", "", _fmt(prof.mean), _fmt(prof.sd),
             _fmt(prof.gamma_decoh), _fmt(prof.Gamma_decoh), _fmt(prof.threshold),
             _fmt(prof.sse_decoh_ok), _fmt(prof.wse_decoh_ok)]
        )
        _emit(buf.getvalue(), out_path)
        if out_path:
            _write_manifest(out_path, "sweep", cfg, fam.seed, notes, t0)
        return EXIT_OK
    if mode != "composition":
        _error_json("parse", f"unknown sweep mode '{mode}'")
        return EXIT_PARSE
    try:
        max_depth = int(cfg.get("max_depth", 1))
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        wanted = cfg.get("metrics")
        if wanted is not None:
            unknown = set(wanted) - set(_SWEEP_COLUMNS)
            if unknown:
                raise ValueError(f"unknown metric names: {sorted(unknown)}")
    except (TypeError, ValueError) as exc:
        _error_json("parse", str(exc))
        return EXIT_PARSE
    rows = suites.composition_sweep(element, max_depth)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(
            [str(r.depth), _fmt(r.phi), _fmt(r.upsilon_envelope), _fmt(r.thm8_centre),
             _fmt(r.thm8_lower), _fmt(r.thm8_upper), _fmt(r.coherent_lower),
             _fmt(r.non_catastrophic), _fmt(r.contained)]
        )
    _emit(buf.getvalue(), out_path)
    if out_path:
        _write_manifest(out_path, "sweep", cfg, fam.seed, notes, t0)
    if any(not r.non_catastrophic for r in rows):
        _error_json("domain", "composition left the non-catastrophic regime mid-sweep")
        return EXIT_DOMAIN
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="chanpolar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_dec = sub.add_parser("decompose", help="canonical Kraus / LK / polar report")
    p_dec.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p_dec.add_argument("--out", default=None, metavar="PATH")
    p_dec.add_argument("--target", default=None, metavar="PATH")
    p_dec.add_argument("--kappa", type=float, default=0.1)
    p_dec.add_argument("--strict-lk", action="store_true", dest="strict_lk")

    p_met = sub.add_parser("metrics", help="figures-of-merit report")
    p_met.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p_met.add_argument("--out", default=None, metavar="PATH")
    p_met.add_argument("--target", default=None, metavar="PATH")

    p_comp = sub.add_parser("compose", help="compose channel files in order")
    p_comp.add_argument(
        "--in", dest="infile", required=True, action="append", metavar="PATH"
    )
    p_comp.add_argument("--out", default=None, metavar="PATH")

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("--suite", choices=suites.SUITES, default="all")
    p_ver.add_argument(
        "--dim", "--dims", dest="dims", default=None,
        help="comma-separated dimensions",
    )
    p_ver.add_argument("--trials", type=int, default=100)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", default=None, metavar="PATH")

    p_sw = sub.add_parser("sweep", help="composition / profile sweep from a config")
    p_sw.add_argument("--config", required=True, metavar="PATH")
    p_sw.add_argument("--out", default=None, metavar="PATH")
    p_sw.add_argument("--seed", type=int, default=None, help="override config seed")
    p_sw.add_argument("--kappa", type=float, default=None, help="override config kappa")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "decompose":
            return _cmd_decompose(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        if args.command == "compose":
            return _cmd_compose(args)
        if args.command == "verify":
            return _cmd_verify(args, parser)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        parser.error(f"unknown command {args.command}")
    except _UsageError as exc:
        _error_json("usage", str(exc))
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
