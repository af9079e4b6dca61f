"""Command line entry point: ``finsler-kahler COMMAND [--config PATH] ...``.

Exit codes: 0 ok, 1 a check failed, 2 configuration error, 3 numeric or
domain error.  Artifacts go to ``--out`` (or ``output.path``) and default to
standard output; a one-line summary goes to standard error unless
``--quiet``.  With ``--format json`` errors are also reported as JSON.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import config as cf
from . import connection as cn
from . import einstein as es
from . import finsler as fs
from . import kahler as kh
from .errors import ConfigError, FinslerError, NullSectionError, StiffnessError
from .integrate import integrate
from .verify import run_verification, sample_points

__all__ = ["main", "run", "COMMANDS", "EXIT_OK", "EXIT_CHECK", "EXIT_CONFIG", "EXIT_NUMERIC"]

COMMANDS = ("validate", "derive", "simulate", "verify", "einstein")
EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
EINSTEIN_TOLERANCE = 1e-9
DEFAULT_FORMAT = {"validate": "json", "derive": "json", "simulate": "csv", "verify": "json", "einstein": "csv"}


class _Result:
    def __init__(self, text, ok, summary):
        self.text = text
        self.ok = ok
        self.summary = summary


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _table(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def cmd_validate(cfg, fmt):
    F = cf.build_metric(cfg)
    pts = sample_points(F, cfg.samples, np.random.default_rng(cfg.seed))
    rep = fs.validate_finsler(F, pts)
    body = dict(rep.as_dict(), seed=cfg.seed, metric={"kind": F.kind, "dimension": F.n, "params": F.params})
    if fmt == "csv":
        rows = [[k, _cell(c.passed), _cell(c.worst), c.failures] for k, c in rep.conditions.items()]
        text = _table(["condition", "pass", "worst", "failures"], rows)
    else:
        text = _dumps(body)
    failed = [k for k, c in rep.conditions.items() if not c.passed]
    summary = "validate: all Finsler conditions hold" if rep.passed else f"validate: failed {', '.join(failed)}"
    return _Result(text, rep.passed, summary)


def cmd_derive(cfg, fmt):
    if fmt != "json":
        raise ConfigError("--format: derive emits json only")
    F = cf.build_metric(cfg)
    m = cf.build_model(cfg)
    p = cf.initial_point(cfg, "derive")
    body = {
        "point": {"x": p.x, "y": p.y},
        "a": m.a,
        "norm": F.norm(p),
        "g": fs.metric_tensor(F, p).g,
        "spray": cn.spray_coefficients(F, p).G,
        "N": cn.nonlinear_connection(F, p).N,
        "G_homogeneous": kh.homogeneous_lift(F, p, m).matrix,
        "F_homogeneous": kh.homogeneous_almost_complex(F, p, m).matrix,
        "theta": kh.symplectic_form_theta(F, p).matrix,
        "conventions": {
            "basis": "adapted frame (delta/delta x^i, d/dy^i), horizontal slots first",
            "N": "N[i][j] = N^i_j",
            "bilinear": "B(U, W) = U^T M W",
            "endomorphism": "column k is the image of basis vector k",
        },
    }
    return _Result(_dumps(body), True, f"derive: objects at x={p.x.tolist()}, y={p.y.tolist()}")


def _trajectory_json(tr):
    return _dumps({"meta": tr.meta, "columns": tr.header(), "rows": [list(r) for r in tr.rows()]})


def cmd_simulate(cfg, fmt):
    flow = cf.build_flow(cfg)
    p0 = cf.initial_point(cfg, "simulate")
    icfg = cf.build_integrator(cfg)
    try:
        tr = integrate(flow, p0, (cfg.initial.t0, cfg.initial.t1), icfg)
    except (NullSectionError, StiffnessError) as exc:
        # keep the partial trajectory, then let the caller map the error
        exc.partial_text = _render_trajectory(exc.trajectory, fmt) if exc.trajectory is not None else None
        raise
    text = _render_trajectory(tr, fmt)
    end = tr.z[-1]
    return _Result(text, True, f"simulate: {len(tr)} samples, endpoint x={end[: tr.n].tolist()}")


def _render_trajectory(tr, fmt):
    return _trajectory_json(tr) if fmt == "json" else tr.to_csv()


def cmd_verify(cfg, fmt):
    F = cf.build_metric(cfg)
    rep = run_verification(F, samples=cfg.samples, seed=cfg.seed, a=cfg.model.a)
    if fmt == "csv":
        rows = [[e.name, e.samples, _cell(e.max_defect), _cell(e.tolerance), _cell(e.passed)] for e in rep.entries]
        text = _table(["name", "samples", "maxDefect", "tolerance", "pass"], rows)
    else:
        text = rep.to_json()
    failed = [e.name for e in rep.entries if not e.passed]
    summary = (
        f"verify: {len(rep.entries)} invariants pass"
        if rep.passed
        else f"verify: {len(failed)} of {len(rep.entries)} invariants failed ({', '.join(failed)})"
    )
    return _Result(text, rep.passed, summary)


def cmd_einstein(cfg, fmt):
    ts = cf.einstein_grid(cfg)
    rows = es.sweep(cfg.einstein.A, cfg.einstein.c, ts)
    valid = [r for r in rows if r[-1] and not math.isnan(r[5])]
    worst = max((r[5] for r in valid), default=0.0)
    ok = worst < EINSTEIN_TOLERANCE
    if fmt == "json":
        text = _dumps(
            {
                "columns": list(es.SWEEP_COLUMNS),
                "rows": [list(r) for r in rows],
                "maxDefect": worst,
                "tolerance": EINSTEIN_TOLERANCE,
                "pass": ok,
            }
        )
    else:
        text = es.sweep_csv(rows)
    summary = f"einstein: {len(valid)} of {len(rows)} grid points in the domain, max defect {worst:.3e}"
    return _Result(text, ok, summary)


HANDLERS = {
    "validate": cmd_validate,
    "derive": cmd_derive,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "einstein": cmd_einstein,
}


def _parser():
    ap = argparse.ArgumentParser(prog="finsler-kahler", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="YAML run configuration (defaults apply when omitted)")
    ap.add_argument("--out", metavar="PATH", help="artifact path (default: output.path or stdout)")
    ap.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    ap.add_argument("--samples", type=int, metavar="N", help="override the sample count")
    ap.add_argument("--format", choices=("csv", "json"), help="artifact format")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return ap


def _load(args):
    cfg = cf.load_config(args.config) if args.config else cf.parse_config("{}")
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("--samples: must be at least 1")
        updates["samples"] = args.samples
    return cfg.model_copy(update=updates) if updates else cfg


def _write(text, path, stdout):
    if path is None:
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"--out: cannot write {path}: {exc.strerror}") from None


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return its exit code (no ``sys.exit``)."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    fmt = args.format or DEFAULT_FORMAT[args.command]

    def report_error(code, exc):
        if fmt == "json":
            stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc), "exitCode": code}))
        else:
            stderr.write(f"error: {exc}\n")
        return code

    try:
        cfg = _load(args)
        if args.format is None and cfg.output.format is not None:
            fmt = cfg.output.format
        out = args.out or cfg.output.path
        result = HANDLERS[args.command](cfg, fmt)
        _write(result.text, out, stdout)
    except ConfigError as exc:
        return report_error(EXIT_CONFIG, exc)
    except FinslerError as exc:
        partial = getattr(exc, "partial_text", None)
        if partial is not None:
            _write(partial, args.out or cfg.output.path, stdout)
        return report_error(EXIT_NUMERIC, exc)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return report_error(EXIT_NUMERIC, exc)
    if not args.quiet:
        stderr.write(result.summary + "\n")
    return EXIT_OK if result.ok else EXIT_CHECK


def main(argv=None):
    sys.exit(run(argv))
