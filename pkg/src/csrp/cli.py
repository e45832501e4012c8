"""Command-line entry point.

Exit status: 0 when every requested check passes, 2 for unreadable or
malformed configuration, 3 for validation failures and contract violations,
4 for capacity limits, 5 for failed numerical assertion suites.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .airy import AIRY_COLUMNS, AiryConfig, airy_sweep
from .bose_fock import build_bose_space
from .config import build_lie, build_spec, config_hash, load_document, parse_lambdas, resolve
from .covariance import (
    build_bose_model,
    build_fermi_model,
    build_three_region_model,
    validate_bose_model,
    validate_fermi_model,
)
from .errors import CapacityError, ConfigParseError, ConfigurationError, ContractViolation, NumericalFailure
from .fermi_fock import build_fermi_space, dagger_adjoint, plus_adjoint
from .gluing import verify_gluing
from .interaction import TensorSpace, build_interactions, certify_bound, fit_growth_constant, split_symmetry_residual, xi_b_pairings
from .lie_algebra import validate_lie
from .partition import setup_partition, sweep, z_limit
from .report import ValidationReport
from .splitting import validate_splitting
from .wick import BoseFields, FermiFields, gram_q, phi, psi, psi_pfaffian

SCHEMA_VERSION = 1
PARTITION_COLUMNS = ["config_hash", "genus", "lie", "d", "eps", "lambda", "order", "seed", "n_scale", "v_scale",
                     "n", "re_z", "im_z", "cauchy_diff", "re_z_direct", "im_z_direct", "wall_ms"]
EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4, 5


class SuiteFailure(Exception):
    """A numerical assertion suite finished with failures (exit 5)."""


# ------------------------------------------------------------ formatting ---


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "" if value is None else str(value)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- output ---


class Output:
    def __init__(self, args, cfg: dict, command: str):
        self.path = Path(args.out) if args.out else None
        self.cfg = cfg
        self.command = command
        self.hash = config_hash({"command": command, "config": cfg})
        self.checks: list[dict] = []
        self.started = datetime.now(timezone.utc).isoformat()

    def add_report(self, rep: ValidationReport) -> None:
        self.checks.extend({"report": rep.title, **c.to_dict()} for c in rep)

    def write_table(self, rows: list[dict], columns: list[str]) -> None:
        for row in rows:
            row.setdefault("config_hash", self.hash)
        if self.path is None or self.path.suffix == ".json":
            self._emit(dumps({"config_hash": self.hash, "columns": columns, "rows": rows}))
        elif self.path.suffix == ".csv":
            self._emit(rows_to_csv(rows, columns))
        else:
            raise ConfigParseError(f"--out: unsupported extension {self.path.suffix!r} (use .csv or .json)")

    def write_json(self, payload: dict) -> None:
        if self.path is not None and self.path.suffix != ".json":
            raise ConfigParseError(f"--out: {self.command} writes JSON; use a .json path")
        payload = dict(payload)
        payload["config_hash"] = self.hash
        self._emit(dumps(payload))

    def _emit(self, text: str) -> None:
        if self.path is None:
            sys.stdout.write(text)
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(text)
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "artifact_version": __version__,
            "command": self.command,
            "config": self.cfg,
            "config_hash": self.hash,
            "seeds": {"model": self.cfg["model"]["seed"], "airy": self.cfg["airy"]["seed"]},
            "outputs": [self.path.name],
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "checks": self.checks,
            "passed": all(c["pass"] for c in self.checks),
        }
        (self.path.parent / "manifest.json").write_text(dumps(manifest))


# ------------------------------------------------------------- polynomials -


def read_polynomials(path: str, fields_by_kind: dict, many: bool):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    kind = doc.get("kind")
    if kind not in fields_by_kind:
        raise ConfigParseError(f"{path}: kind must be one of {sorted(fields_by_kind)}")
    fields = fields_by_kind[kind]
    bodies = doc.get("polynomials") if many else [doc]
    if not isinstance(bodies, list):
        raise ConfigParseError(f"{path}: expected a list under 'polynomials'")
    out = []
    for body in bodies:
        terms = []
        for mono in body.get("monomials", []):
            factors = []
            for fac in mono.get("factors", []):
                idx, col = fac.get("index"), fac.get("color", 0)
                if not isinstance(idx, int) or not 0 <= idx < fields.model.dim or not isinstance(col, int) or not 0 <= col < fields.n:
                    raise ConfigParseError(f"{path}: factor {fac} out of range (index < {fields.model.dim}, color < {fields.n})")
                factors.append(fields.vector(idx, col))
            terms.append((float(mono.get("coef", 1.0)), tuple(factors)))
        out.append(fields.poly_class(fields, terms))
    return kind, out


# --------------------------------------------------------------- commands --


def _context(cfg: dict):
    lie = build_lie(cfg)
    spec = build_spec(cfg, lie)
    return lie, spec


def cmd_validate(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    reports = [validate_lie(lie), validate_splitting(spec)]
    if reports[1].passed:
        m = cfg["model"]
        reports.append(validate_bose_model(build_bose_model(spec, m["null_modes"], m["seed"])))
        reports.append(validate_fermi_model(build_fermi_model(spec, m["null_modes"], m["seed"])))
        bs = build_bose_space(spec, lie, cfg["fock"]["d"])
        rep = ValidationReport("bose_fock")
        rep.add("dimension", abs(bs.dim - bs.expected_dim()), 0.0)
        rep.add_positive("gram_positive_definite", min(np.linalg.eigvalsh(b).min() for b in bs.gram_blocks))
        reports.append(rep)
        fs = build_fermi_space(lie, spec.vol)
        rep = ValidationReport("fermi_fock")
        j = fs.j_matrix
        rep.add("j_involution", float(abs(j @ j - np.eye(fs.dim)).max()), 1e-12)
        op = fs.wedge_ops[0]
        dag = dagger_adjoint(fs, op).matrix
        split = fs.split_gram()
        rep.add("dagger_identity", float(abs(split @ dag - op.T @ split).max()), 1e-12)
        rep.add("plus_adjoint_identity", float(abs(fs.gram_plus @ plus_adjoint(fs, op) - op.T @ fs.gram_plus).max()), 1e-12)
        reports.append(rep)
    for rep in reports:
        out.add_report(rep)
    out.write_json({"reports": [r.to_dict() for r in reports], "passed": all(r.passed for r in reports)})
    if not all(r.passed for r in reports):
        raise ConfigurationError("validation failed: " + ", ".join(
            f"{r.title}.{c.name}" for r in reports for c in r.failures()))
    return True


def _fields(cfg, lie, spec):
    m = cfg["model"]
    bm = build_bose_model(spec, m["null_modes"], m["seed"])
    fm = build_fermi_model(spec, m["null_modes"], m["seed"])
    return {"bose": BoseFields(bm, lie.dim), "fermi": FermiFields(fm, lie.dim)}


def cmd_phi(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    kind, (poly,) = read_polynomials(args.poly, {"bose": _fields(cfg, lie, spec)["bose"]}, many=False)
    out.write_json({"kind": kind, "phi": phi(poly)})
    return True


def cmd_psi(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    kind, (poly,) = read_polynomials(args.poly, {"fermi": _fields(cfg, lie, spec)["fermi"]}, many=False)
    det_route, pf_route = psi(poly), psi_pfaffian(poly)
    rep = ValidationReport("psi")
    rep.add("determinant_vs_pfaffian", abs(det_route - pf_route) / max(1.0, abs(det_route)), 1e-12)
    out.add_report(rep)
    out.write_json({"kind": kind, "psi": det_route, "psi_pfaffian": pf_route, "report": rep.to_dict()})
    if not rep.passed:
        raise SuiteFailure(str(rep))
    return True


def cmd_gram(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    kind, polys = read_polynomials(args.poly, {"bose": _fields(cfg, lie, spec)["bose"]}, many=True)
    gram = gram_q(polys)
    eig = np.linalg.eigvalsh(gram) if len(gram) else np.zeros(0)
    top = float(eig.max()) if eig.size else 0.0
    rep = ValidationReport("gram")
    rep.add_positive("psd", float(eig.min()) + 1e-8 * max(top, 0.0) if eig.size else 0.0)
    out.add_report(rep)
    out.write_json({"kind": kind, "gram": gram, "eigenvalues": eig, "report": rep.to_dict()})
    if not rep.passed:
        raise SuiteFailure(str(rep))
    return True


def cmd_gluing(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    m3 = build_three_region_model(spec, cfg["model"]["seed"], cfg["model"]["null_modes"])
    rep = verify_gluing(m3, args.trials, lie.dim, args.max_degree)
    out.add_report(rep)
    out.write_json({"report": rep.to_dict()})
    if not rep.passed:
        raise SuiteFailure(str(rep))
    return True


def cmd_interaction(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    d = cfg["fock"]["d"]
    tspace = TensorSpace(build_bose_space(spec, lie, d), build_fermi_space(lie, spec.vol))
    inter = build_interactions(spec, lie, tspace)
    cert = certify_bound(inter.o_bf, tspace)
    inter.k1, inter.k2 = cert.k1, cert.k2
    eps, lam = cfg["partition"]["eps"], cfg["partition"]["lambda"]
    c, spread, cs = fit_growth_constant(inter.o_bf, tspace, eps, lam)
    rep = ValidationReport("interaction")
    rep.add("o_bf_split_symmetry", split_symmetry_residual(tspace, inter.o_bf), 1e-12)
    rep.add_positive("bound_slack", cert.slack, -1e-8)
    rep.add("growth_constant_spread", spread, 0.2)
    payload = {"interaction": inter.to_dict(), "certificate": cert.to_dict(),
               "growth": {"c": c, "spread": spread, "c_n": cs, "n": [4, 8, 16, 32], "eps": eps, "lambda": lam},
               "report": rep.to_dict()}
    if d >= 3:
        pair = xi_b_pairings(tspace.bose, inter.xi_b)
        ob = inter.o_b.matrix
        omega = tspace.bose.vacuum()
        payload["o_b_moments"] = {"omega_o_b3_omega": float(omega @ (tspace.bose.gram @ (ob @ (ob @ (ob @ omega)))))}
        payload["xi_b_pairings_max"] = float(np.abs(pair).max()) if pair.size else 0.0
    out.add_report(rep)
    out.write_json(payload)
    if not rep.passed:
        raise SuiteFailure(str(rep))
    return True


def cmd_partition(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    p = cfg["partition"]
    setup = setup_partition(spec, lie, cfg["fock"]["d"], cfg["model"]["seed"], cfg["model"]["null_modes"])
    run = z_limit(setup, p["eps"], p["lambda"], p["n_max"], p["order"], p["direct"],
                  {"n_scale": 1.0, "v_scale": 1.0})
    out.write_table(run.rows(args.timing), PARTITION_COLUMNS)
    return True


def cmd_sweep(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    s = cfg["sweep"]
    rows = sweep(spec, lie, s["eps"], s["lambda"], [int(d) for d in s["d"]], [int(x) for x in s["seeds"]],
                 s["n_scale"], s["v_scale"], s["n_max"], s["order"], s["direct"], cfg["model"]["null_modes"],
                 timing=args.timing)
    out.write_table(rows, PARTITION_COLUMNS)
    return True


def cmd_airy(args, cfg, out: Output) -> bool:
    lie, spec = _context(cfg)
    a = cfg["airy"]
    acfg = AiryConfig(0.0, a["method"], a["samples"], a.get("order"), a["seed"])
    rows = airy_sweep(spec, lie, parse_lambdas(a["lambda"]), acfg)
    out.write_table(rows, ["config_hash"] + AIRY_COLUMNS)
    return True


# ----------------------------------------------------------------- report --


def _read_csv(path: Path) -> list[dict]:
    with path.open() as fh:
        return list(csv.DictReader(fh))


def _floats(rows, key):
    return [float(r[key]) for r in rows if r.get(key) not in (None, "")]


def build_report(run_dir: Path) -> dict[str, str]:
    """File name -> contents of the summary and plot-data files (no timestamps)."""
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigurationError(f"{run_dir}: no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    lines = [
        f"command: {manifest['command']}",
        f"config_hash: {manifest['config_hash']}",
        f"schema_version: {manifest['schema_version']}",
        f"checks: {sum(c['pass'] for c in manifest['checks'])}/{len(manifest['checks'])} passed",
    ]
    for c in manifest["checks"]:
        lines.append(f"  [{'ok ' if c['pass'] else 'FAIL'}] {c['report']}.{c['name']} residual={c['residual']!r}")
    files = {}
    for name in manifest["outputs"]:
        path = run_dir / name
        if path.suffix != ".csv" or not path.is_file():
            continue
        rows = _read_csv(path)
        lines.append(f"{name}: {len(rows)} rows")
        if rows and "n" in rows[0]:
            lines.append(f"  {'n':>6} {'lambda':>10} {'re_z':>24} {'im_z':>24} {'cauchy_diff':>24}")
            for r in rows:
                lines.append(f"  {r['n']:>6} {r['lambda']:>10} {r['re_z']:>24} {r['im_z']:>24} {r['cauchy_diff']:>24}")
            cauchy = [(r["n"], r["cauchy_diff"]) for r in rows if r["cauchy_diff"]]
            files["cauchy.dat"] = "# n |Z_n - Z_2n|\n" + "".join(f"{n} {v}\n" for n, v in cauchy)
            top = {}
            for r in rows:
                key = r["lambda"]
                if key not in top or int(r["n"]) > int(top[key]["n"]):
                    top[key] = r
            files["z_profile.dat"] = "# lambda Re Z (largest n)\n" + "".join(
                f"{k} {top[k]['re_z']}\n" for k in sorted(top, key=float))
        elif rows and "re" in rows[0]:
            lines.append(f"  {'lambda':>10} {'re':>24} {'im':>24} {'stderr':>24}")
            for r in rows:
                lines.append(f"  {r['lambda']:>10} {r['re']:>24} {r['im']:>24} {r['stderr']:>24}")
            files["airy_profile.dat"] = "# lambda Re Airy\n" + "".join(f"{r['lambda']} {r['re']}\n" for r in rows)
    files["summary.txt"] = "\n".join(lines) + "\n"
    return files


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    files = build_report(run_dir)
    for name, text in files.items():
        (run_dir / name).write_text(text)
    sys.stdout.write(files["summary.txt"])
    return EXIT_OK


# ------------------------------------------------------------------ parser -


COMMANDS = {
    "validate": cmd_validate,
    "phi": cmd_phi,
    "psi": cmd_psi,
    "gram": cmd_gram,
    "gluing": cmd_gluing,
    "interaction": cmd_interaction,
    "partition": cmd_partition,
    "airy": cmd_airy,
    "sweep": cmd_sweep,
}


def _lambda_list(text: str) -> list[float]:
    text = text.strip()
    return [float(x) for x in text.split(",")] if text else []


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--out", help="output path (.csv or .json); manifest.json is written beside it")
    common.add_argument("--genus", type=int)
    common.add_argument("--lie", choices=["u1", "su2", "su3"])
    common.add_argument("--degree", type=int, help="Bose truncation degree d")
    common.add_argument("--seed", type=int, help="model seed (and Monte Carlo seed for airy)")
    common.add_argument("--null-modes", type=int)
    common.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte reproducibility)")

    parser = argparse.ArgumentParser(prog="csrp", description="Reflection-positive functional integral laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="run all structural validation suites")
    for name in ("phi", "psi"):
        sp_ = sub.add_parser(name, parents=[common], help=f"evaluate {name} on a polynomial file")
        sp_.add_argument("--poly", required=True)
    sp_ = sub.add_parser("gram", parents=[common], help="reflection-positivity Gram of a polynomial list")
    sp_.add_argument("--poly", required=True)
    sp_ = sub.add_parser("gluing", parents=[common], help="three-region cut identities")
    sp_.add_argument("--trials", type=int, default=100)
    sp_.add_argument("--max-degree", type=int, default=3)
    sp_ = sub.add_parser("interaction", parents=[common], help="interaction elements and bound certificate")
    sp_.add_argument("--eps", type=float)
    sp_.add_argument("--lambda", dest="lam", type=float)
    sp_ = sub.add_parser("partition", parents=[common], help="Trotter sequence Z_n")
    sp_.add_argument("--eps", type=float)
    sp_.add_argument("--lambda", dest="lam", type=float)
    sp_.add_argument("--n-max", type=int)
    sp_.add_argument("--order", choices=["bf-b", "b-bf"])
    sp_.add_argument("--no-direct", action="store_true", help="skip the direct exponential oracle")
    sp_ = sub.add_parser("airy", parents=[common], help="matrix Airy integral")
    sp_.add_argument("--lambda", dest="lam", type=_lambda_list, help="comma-separated lambda grid")
    sp_.add_argument("--method", choices=["monte_carlo", "gauss_quadrature"])
    sp_.add_argument("--samples", type=int)
    sp_.add_argument("--order", type=int)
    sub.add_parser("sweep", parents=[common], help="partition sweep over the [sweep] grid")
    sp_ = sub.add_parser("report", help="summarise a run directory")
    sp_.add_argument("run_dir")
    return parser


def _overrides(args) -> dict:
    o = {
        "splitting": {"genus": args.genus},
        "fock": {"d": args.degree},
        "model": {"seed": args.seed, "null_modes": args.null_modes},
    }
    if args.lie:
        o["lie_algebra"] = {"preset": args.lie}
    cmd = args.command
    if cmd in ("partition", "interaction"):
        o["partition"] = {"eps": args.eps, "lambda": args.lam}
    if cmd == "partition":
        o["partition"].update({"n_max": args.n_max, "order": args.order, "direct": False if args.no_direct else None})
    if cmd == "airy":
        o["airy"] = {"lambda": args.lam, "method": args.method, "samples": args.samples, "order": args.order,
                     "seed": args.seed}
    return o


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args)
        doc = load_document(args.config)
        cfg = resolve(doc, _overrides(args))
        out = Output(args, cfg, args.command)
        COMMANDS[args.command](args, cfg, out)
        return EXIT_OK
    except ConfigParseError as exc:
        print(f"csrp: configuration error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigurationError, ContractViolation) as exc:
        print(f"csrp: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"csrp: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (NumericalFailure, SuiteFailure) as exc:
        print(f"csrp: numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
