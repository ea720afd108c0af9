"""Command line entry point ``cp3``.

::

    cp3 <correlate|potential|scan|verify> --config PATH [--out PATH] [--threads N] [--tol REL]

Exit status: 0 success, 1 computation error, 2 configuration error,
3 verification failures. Results go to ``--out`` (or ``output.path``) and
otherwise to standard output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from cp3 import __version__
from cp3.config import load_config, parse_config
from cp3.correlations import Atom, correlation_tensor, correlation_tensor_pv
from cp3.errors import ComputationError, ConfigError, ValidationError
from cp3.potentials import METHODS, energy_scan
from cp3.verify import VerificationSettings, run_verification_suite

EXIT_OK, EXIT_COMPUTATION, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("correlate", "potential", "scan", "verify")


def _provenance(command, cfg):
    return {"tool": "cp3", "version": __version__, "command": command, "config": cfg.resolved}


def _dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _tensor(x):
    return [[float(v) for v in row] for row in np.asarray(x)]


def cmd_correlate(cfg, threads):
    if not cfg.correlate_pairs:
        raise ValidationError("correlate.pairs is empty")
    if cfg.positions is None:
        raise ValidationError("geometry.positions is required to locate the excited atom")
    atom_c = Atom(np.asarray(cfg.positions["C"]), cfg.models[2])
    fn = correlation_tensor if cfg.correlate_method == "laplace" else correlation_tensor_pv
    rows = []
    for i, (r, rp) in enumerate(cfg.correlate_pairs):
        try:
            res = fn(np.asarray(r), np.asarray(rp), atom_c, cfg.quadrature)
        except ComputationError as exc:
            raise type(exc)(f"pair {i}: {exc}") from None
        rows.append(
            {
                "pair": i,
                "resonant": _tensor(res.resonant_part),
                "nonresonant": _tensor(res.nonresonant_part),
                "total": _tensor(res.tensor),
                "err_estimate": float(res.error),
            }
        )
    return "json", {"provenance": _provenance("correlate", cfg), "correlations": rows}, EXIT_OK


def cmd_potential(cfg, threads):
    t = cfg.triangle()
    energy = METHODS[cfg.potential_method](t, *cfg.models, cfg.quadrature)
    result = {"sides": {"a": t.a, "b": t.b, "c": t.c}, **energy.as_dict()}
    return "json", {"provenance": _provenance("potential", cfg), "method": cfg.potential_method, "result": result}, EXIT_OK


def cmd_scan(cfg, threads):
    if cfg.sweep is None:
        raise ValidationError("geometry.sweep is required for scan")
    rows = energy_scan(cfg.sweep.grid(), cfg.models, cfg.quadrature, cfg.potential_method, workers=threads)
    return "table", rows, EXIT_OK


def cmd_verify(cfg, threads):
    settings = VerificationSettings(
        quadrature=cfg.quadrature, box=cfg.box, seed=cfg.verify_seed, include_box=cfg.verify_include_box
    )
    report = run_verification_suite(settings)
    report = {"provenance": _provenance("verify", cfg), **report}
    return "json", report, EXIT_OK if report["passed"] else EXIT_VERIFY


def format_scan_csv(cfg, rows):
    """CSV with a ``# `` provenance header; failing rows hold ``nan`` and are listed in the header."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(_provenance("scan", cfg), sort_keys=False) + "\n")
    for row in rows:
        if not row.ok:
            buf.write(f"# row {row.index}: {row.error}\n")
    params = list(rows[0].params) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(params + ["resonant", "nonresonant", "total", "err_estimate"])
    for row in rows:
        vals = [repr(float(row.params[p])) for p in params]
        if row.ok:
            e = row.energy
            vals += [repr(float(x)) for x in (e.resonant, e.nonresonant, e.total, e.error)]
        else:
            vals += ["nan"] * 4
        writer.writerow(vals)
    return buf.getvalue()


def format_scan_json(cfg, rows):
    out = []
    for row in rows:
        entry = {"index": row.index, "params": row.params}
        if row.ok:
            entry.update(row.energy.as_dict())
        else:
            entry["error"] = row.error
        out.append(entry)
    return _dump_json({"provenance": _provenance("scan", cfg), "rows": out})


HANDLERS = {"correlate": cmd_correlate, "potential": cmd_potential, "scan": cmd_scan, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="cp3", description="Three-body dispersion potentials with one excited atom.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration file (optional for verify)")
    p.add_argument("--out", help="output file; standard output if omitted")
    p.add_argument("--threads", type=int, default=1, help="worker processes for scan rows")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance override")
    p.add_argument("--version", action="version", version=f"cp3 {__version__}")
    return p


def _default_verify_config():
    return parse_config({"atoms": {"A": {"k_res": 1.0}, "B": {"k_res": 1.0}, "C": {"k_res": 1.0, "excited": True}}})


def run(command, cfg, threads=1):
    """Execute ``command`` and return ``(text, exit_status)``."""
    kind, payload, status = HANDLERS[command](cfg, threads)
    if kind == "table":
        text = format_scan_json(cfg, payload) if cfg.output_format == "json" else format_scan_csv(cfg, payload)
    else:
        text = _dump_json(payload)
    return text, status


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        if args.config is None:
            if args.command != "verify":
                raise ValidationError(f"--config is required for {args.command}")
            cfg = _default_verify_config()
        else:
            cfg = load_config(args.config)
        if args.tol is not None:
            if not args.tol > 0:
                raise ValidationError("--tol must be positive")
            cfg = cfg.with_rel_tol(args.tol)
    except ConfigError as exc:
        print(f"cp3: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text, status = run(args.command, cfg, args.threads)
    except ConfigError as exc:
        print(f"cp3: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputationError as exc:
        print(f"cp3: computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    out = args.out or cfg.output_path
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
