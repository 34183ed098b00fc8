"""Command-line entry point: ``framecurv <command> --config run.json``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical degeneracy (singular frame, domain error or unstable differences).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import collapse as co
from . import expr as ex
from .config import ConfigError, RunConfig, f_grid, load
from .curvature import scalar_curvature_frame, scalar_curvature_oracle, scalar_from_structure
from .geometry import (ChartManifold, DerivativeEngine, NumericalDegeneracyError,
                       SingularFrameError, frame_jet, sample_points)
from .structure import structure_derivatives, structure_tensor

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3

ORACLE_RTOL = 1e-5
LEMMA_TOL = 1e-6
DECOMPOSITION_RTOL = 1e-5
EXPECTED_TOL = 1e-6
VERIFY_F = (0.5, 1.0, 2.0, 5.0)
LEMMA_F = (0.5, 2.0)


def fmt(v: float) -> str:
    return format(float(v) + 0.0, ".17g")  # + 0.0 turns -0.0 into 0.0


@dataclass
class Report:
    command: str
    manifold: str
    records: list[dict] = field(default_factory=list)
    classification: dict | None = None
    thresholds: list[dict] = field(default_factory=list)
    verification: list[dict] = field(default_factory=list)
    csv_rows: list[list[str]] = field(default_factory=list)
    csv_header: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s["passed"] for s in self.verification)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"command": self.command, "manifold": self.manifold,
                               "records": self.records}
        if self.classification is not None:
            out["classification"] = self.classification
        if self.thresholds:
            out["thresholds"] = self.thresholds
        if self.verification:
            out["verification"] = {"passed": self.passed, "suites": self.verification}
        return out

    def json_text(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header)
        w.writerows(self.csv_rows)
        return buf.getvalue()


def _points(cfg: RunConfig) -> np.ndarray:
    return sample_points(cfg.manifold, cfg.count, cfg.seed)


def _profile_dict(p: co.CollapseProfile) -> dict[str, float]:
    return dict(zip(("q4", "q2", "q0", "qm2"), p.as_tuple()))


def cmd_curvature(cfg: RunConfig) -> Report:
    m, split = cfg.manifold, cfg.split
    rep = Report("curvature", cfg.manifold_id)
    rep.csv_header = (["point_id"] + [f"x_{c}" for c in m.coord_names]
                      + ["S", "q4", "q2", "q0", "qm2", "npb_indicator"])
    for pid, x in enumerate(_points(cfg)):
        c, D = structure_derivatives(m, x, cfg.engine)
        rec: dict[str, Any] = {"point_id": pid, "point": x.tolist(),
                               "S": scalar_from_structure(c, D)}
        extra = [""] * 5
        if split is not None:
            prof = co.profile_from_structure(c, D, split)
            rec["profile"] = _profile_dict(prof)
            rec["npb_indicator"] = co.npb_from_structure(c, D, split)
            extra = [fmt(v) for v in prof.as_tuple()] + [fmt(rec["npb_indicator"])]
        rep.records.append(rec)
        rep.csv_rows.append([str(pid)] + [fmt(v) for v in x] + [fmt(rec["S"])] + extra)
    return rep


def _suite(name: str, tolerance: float, relative: bool) -> dict:
    return {"name": name, "tolerance": tolerance, "relative": relative,
            "max_residual": 0.0, "checked": 0, "worst": None, "passed": True}


def _record(suite: dict, residual: float, scale: float, detail: dict):
    suite["checked"] += 1
    bound = suite["tolerance"] * ((1 + abs(scale)) if suite["relative"] else 1.0)
    ratio = residual / bound
    if suite["worst"] is None or ratio > suite["worst"]["ratio"]:
        suite["worst"] = dict(detail, residual=residual, bound=bound, ratio=ratio)
    suite["max_residual"] = max(suite["max_residual"], residual)
    if not residual <= bound:
        suite["passed"] = False


def nonconstant_factor(manifold: ChartManifold) -> ex.Expr:
    """``1 + x^2/4`` in the first coordinate."""
    return ex.parse(f"1 + {manifold.coord_names[0]}^2/4", manifold.coord_names)


def cmd_verify(cfg: RunConfig) -> Report:
    """Oracle, rescaling and decomposition identity suites plus expected values."""
    m, split, eng = cfg.manifold, cfg.split, cfg.engine
    rep = Report("verify", cfg.manifold_id)
    oracle = _suite("oracle", ORACLE_RTOL, True)
    suites = [oracle]
    lemma = decomp = None
    if split is not None:
        lemma = _suite("rescaling", LEMMA_TOL, False)
        decomp = _suite("decomposition", DECOMPOSITION_RTOL, True)
        suites += [lemma, decomp]
        fnode = nonconstant_factor(m)
        rescaled = {f: co.rescale_frame(m, split, f) for f in set(LEMMA_F + VERIFY_F)}
        rescaled["nonconstant"] = co.rescale_frame(m, split, fnode)
    expected = _suite("expected", EXPECTED_TOL, False) if cfg.expected else None
    if expected is not None:
        suites.append(expected)
    for pid, x in enumerate(_points(cfg)):
        pt = x.tolist()
        c, D = structure_derivatives(m, x, eng)
        S = scalar_from_structure(c, D)
        S_or = scalar_curvature_oracle(m, x, eng)
        _record(oracle, abs(S - S_or), S_or, {"point": pt, "frame": S, "oracle": S_or})
        rec: dict[str, Any] = {"point_id": pid, "point": pt, "S": S}
        if split is not None:
            prof = co.profile_from_structure(c, D, split)
            npb = co.npb_from_structure(c, D, split)
            rec["profile"] = _profile_dict(prof)
            rec["npb_indicator"] = npb
            for f in LEMMA_F:
                pred = co.transform_structure_functions(c, split, f)
                direct = structure_tensor(rescaled[f], x, eng)
                _record(lemma, float(np.max(np.abs(pred - direct))), 0.0,
                        {"point": pt, "f": f})
            jet = ex.eval_jet(fnode, m.coord_names, x)
            E = frame_jet(m, x, eng).E
            pred = co.transform_structure_functions(c, split, jet.value, jet.grad @ E)
            direct = structure_tensor(rescaled["nonconstant"], x, eng)
            _record(lemma, float(np.max(np.abs(pred - direct))), 0.0,
                    {"point": pt, "f": ex.to_text(fnode)})
            for f in VERIFY_F:
                direct_S = scalar_curvature_frame(rescaled[f], x, eng)
                _record(decomp, abs(direct_S - prof(f)), direct_S,
                        {"point": pt, "f": f, "direct": direct_S, "profile": prof(f)})
        if expected is not None:
            got = dict(scalar_curvature=S)
            if split is not None:
                got.update(rec["profile"], npb_indicator=rec["npb_indicator"])
            for key, want in sorted(cfg.expected.items()):
                if key not in got:
                    continue
                _record(expected, abs(got[key] - want), want,
                        {"point": pt, "quantity": key, "expected": want, "got": got[key]})
        rep.records.append(rec)
    rep.verification = suites
    return rep


def cmd_collapse(cfg: RunConfig) -> Report:
    m, split, eng = cfg.manifold, cfg.split, cfg.engine
    if split is None:
        raise ConfigError("collapse needs a split")
    if not cfg.f_values:
        raise ConfigError("collapse needs f_values or f_range")
    rep = Report("collapse", cfg.manifold_id)
    rep.csv_header = ["point_id", "f", "S_direct", "S_profile", "q4", "q2", "q0", "qm2"]
    rescaled = {f: co.rescale_frame(m, split, f) for f in cfg.f_values}
    for pid, x in enumerate(_points(cfg)):
        prof = co.collapse_profile(m, split, x, eng)
        th = co.sign_thresholds(prof)
        rep.thresholds.append({"point_id": pid, "roots": list(th.roots),
                               "asymptotic_sign": th.asymptotic_sign})
        sweep = []
        for f in cfg.f_values:
            direct = scalar_curvature_frame(rescaled[f], x, eng)
            sweep.append({"f": f, "S_direct": direct, "S_profile": prof(f)})
            rep.csv_rows.append([str(pid), fmt(f), fmt(direct), fmt(prof(f))]
                                + [fmt(v) for v in prof.as_tuple()])
        rep.records.append({"point_id": pid, "point": x.tolist(),
                            "profile": _profile_dict(prof), "sweep": sweep})
    return rep


def cmd_classify(cfg: RunConfig) -> Report:
    if cfg.split is None:
        raise ConfigError("classify needs a split")
    rep = Report("classify", cfg.manifold_id)
    rep.classification = co.classify(cfg.manifold, cfg.split, _points(cfg),
                                     cfg.engine).as_dict()
    return rep


COMMANDS = {"curvature": cmd_curvature, "verify": cmd_verify,
            "collapse": cmd_collapse, "classify": cmd_classify}


def _summary(rep: Report) -> list[str]:
    count = (rep.classification["sample_count"] if rep.classification is not None
             else len(rep.records))
    lines = [f"{rep.command} {rep.manifold}: {count} points"]
    if rep.command == "curvature" and rep.records:
        vals = [r["S"] for r in rep.records]
        lines.append(f"S in [{fmt(min(vals))}, {fmt(max(vals))}]")
    for s in rep.verification:
        status = "PASS" if s["passed"] else "FAIL"
        lines.append(f"{status} {s['name']}: max residual {s['max_residual']:.3e} "
                     f"over {s['checked']} checks")
        if not s["passed"]:
            lines.append(f"  worst: {json.dumps(s['worst'], sort_keys=True)}")
    if rep.thresholds:
        distinct = sorted({(tuple(round(r, 9) for r in t["roots"]), t["asymptotic_sign"])
                           for t in rep.thresholds})
        for roots, sign in distinct:
            shown = ", ".join(fmt(r) for r in roots) or "none"
            lines.append(f"thresholds f = {shown}; sign of S as f -> oo: {sign:+d}")
    if rep.classification is not None:
        cl = rep.classification
        lines.append(f"involutive={cl['involutive']} "
                     f"everywhere_noninvolutive={cl['everywhere_noninvolutive']} "
                     f"bundle_like={cl['bundle_like_certificate']} npb={cl['npb_certificate']}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="framecurv",
                                description="Scalar curvature from orthonormal frames.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True)
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--engine", choices=["ad", "fd"])
    p.add_argument("--csv")
    p.add_argument("--json")
    p.add_argument("--f-min", type=float)
    p.add_argument("--f-max", type=float)
    p.add_argument("--steps", type=int)
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.points is not None and args.points < 1:
        raise ConfigError("--points must be positive")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be non-negative")
    engine = None
    if args.engine is not None:
        engine = DerivativeEngine(args.engine, cfg.engine.fd_step, cfg.engine.nested_step)
    f_values = None
    flags = (args.f_min, args.f_max, args.steps)
    if any(v is not None for v in flags):
        if any(v is None for v in flags):
            raise ConfigError("--f-min, --f-max and --steps go together")
        f_values = f_grid(*flags)
    return cfg.with_overrides(count=args.points, seed=args.seed, engine=engine,
                              f_values=f_values)


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load(args.config), args)
        rep = COMMANDS[args.command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=stderr)
        return EXIT_CONFIG
    except (NumericalDegeneracyError, SingularFrameError, ex.DomainError) as err:
        print(f"numerical degeneracy: {err}", file=stderr)
        return EXIT_DEGENERATE
    csv_path, json_path = args.csv, args.json
    if csv_path is None and json_path is None and cfg.output_path:
        if cfg.output_format == "json":
            json_path = cfg.output_path
        else:
            csv_path = cfg.output_path
    if csv_path and not rep.csv_header:
        print(f"config error: {rep.command} has no CSV output", file=stderr)
        return EXIT_CONFIG
    if csv_path:
        _write(csv_path, rep.csv_text())
    if json_path:
        _write(json_path, rep.json_text())
    if not csv_path and not json_path:
        stdout.write(rep.csv_text() if rep.command == "collapse" else rep.json_text())
    for line in _summary(rep):
        print(line, file=stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def main(argv: list[str] | None = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
