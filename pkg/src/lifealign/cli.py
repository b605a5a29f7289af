"""Command-line surface for the pipeline.

Commands: unadjusted, align, sullivan, simcheck, export-matrices.
Every command writes a RunManifest (inputs, digests, options, version)
next to its outputs.  Exit codes: 0 success, 2 validation error,
3 non-convergence, 4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import AlignmentError, align
from .lifetable import LifeTable, load_life_table
from .multistate import (
    healthy_life_expectancy,
    state_mix_at_age,
    survival_curve,
)
from .probit import (
    Gender,
    HealthMeasure,
    build_all_matrices,
    bundled_coefficients,
    load_coefficients,
)
from .simcheck import SimulationConfig, cross_validate, simulate
from .sullivan import load_prevalence, load_schedule, sullivan_hle

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_ORACLE = 4


@dataclasses.dataclass
class RunManifest:
    command: str
    tool_version: str
    measure: str | None = None
    gender: str | None = None
    year: int | None = None
    inputs: dict[str, str] = dataclasses.field(default_factory=dict)
    input_digests: dict[str, str] = dataclasses.field(default_factory=dict)
    options: dict = dataclasses.field(default_factory=dict)
    outputs: list[str] = dataclasses.field(default_factory=list)

    def add_input(self, label: str, path: str | None):
        if path is None:
            return
        self.inputs[label] = str(path)
        self.input_digests[label] = _sha256(path)

    def write(self, out_path: Path):
        path = out_path.with_suffix(out_path.suffix + ".manifest.json")
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2) + "\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _coefficients(args):
    measure = HealthMeasure(args.measure)
    if args.coeffs:
        cset = load_coefficients(*args.coeffs)
        if cset.measure is not measure:
            raise ValueError(
                f"coefficient file is for {cset.measure.value}, requested {measure.value}"
            )
        return cset
    return bundled_coefficients(measure)


def _birth_cohort(n_states: int, mix_arg: str | None) -> np.ndarray:
    if mix_arg is None:
        x0 = np.zeros(n_states)
        x0[0] = 1.0
        return x0
    x0 = np.array([float(v) for v in mix_arg.split(",")])
    if x0.shape != (n_states,) or x0.min() < 0 or x0.sum() <= 0:
        raise ValueError(f"birth mix must be {n_states} non-negative values")
    return x0


def _expectancy_row(matrices, measure, from_age, x0, half_year):
    mix = state_mix_at_age(matrices, x0, from_age)
    he = healthy_life_expectancy(matrices, measure, from_age, mix)
    if half_year:
        le = he.le + 0.5
        hle = he.hle + 0.5 * float(mix[list(measure.healthy_states)].sum())
        return le, hle, le - hle, 100.0 * hle / le
    return he.le, he.hle, he.uhle, he.pct_healthy


def _write_rows(out: Path, header: list[str], rows: list[list]):
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_unadjusted(args) -> int:
    cset = _coefficients(args)
    measure, gender = cset.measure, Gender(args.gender)
    matrices = build_all_matrices(cset, gender)
    x0 = _birth_cohort(measure.n_states, args.birth_mix)
    le, hle, uhle, pct = _expectancy_row(
        matrices, measure, args.from_age, x0, args.half_year_correction
    )
    header = ["measure", "gender", "from_age", "le_years", "hle_years", "uhle_years", "pct_healthy"]
    row = [measure.value, gender.value, args.from_age,
           f"{le:.6f}", f"{hle:.6f}", f"{uhle:.6f}", f"{pct:.4f}"]
    print(f"{measure.value.upper()} {gender.value} at {args.from_age}: "
          f"LE={le:.2f}y HLE={hle:.2f}y ({pct:.1f}% healthy)")
    if args.out:
        out = Path(args.out)
        _write_rows(out, header, [row])
        manifest = _manifest(args, "unadjusted", measure, gender)
        manifest.outputs = [str(out)]
        manifest.write(out)
    return EXIT_OK


def cmd_align(args) -> int:
    cset = _coefficients(args)
    measure, gender = cset.measure, Gender(args.gender)
    matrices = build_all_matrices(cset, gender)
    x0 = _birth_cohort(measure.n_states, args.birth_mix)
    table = load_life_table(args.life_table, gender=args.gender, base_year=args.year)

    aligned, report = align(
        matrices,
        x0,
        table,
        tolerance=args.tolerance,
        max_iterations=args.max_iter,
        damping=args.damping,
        allow_rank_deficient=args.allow_rank_deficient,
    )
    le, hle, uhle, pct = _expectancy_row(
        aligned, measure, args.from_age, x0, args.half_year_correction
    )
    label = args.year if args.year is not None else ""
    print(f"aligned {measure.value.upper()} {gender.value} at {args.from_age}: "
          f"LE={le:.2f}y HLE={hle:.2f}y ({pct:.1f}% healthy) "
          f"[{report.iterations} iters, residual {report.final_residual:.2e}]")
    if args.out:
        out = Path(args.out)
        header = ["year", "measure", "gender", "from_age",
                  "le_years", "hle_years", "pct_healthy"]
        row = [label, measure.value, gender.value, args.from_age,
               f"{le:.6f}", f"{hle:.6f}", f"{pct:.4f}"]
        _write_rows(out, header, [row])
        report_path = out.with_suffix(out.suffix + ".report.json")
        report_path.write_text(report.to_json() + "\n")
        manifest = _manifest(args, "align", measure, gender)
        manifest.year = args.year
        manifest.outputs = [str(out), str(report_path)]
        manifest.write(out)
    if not report.converged:
        print(f"alignment did not converge: residual {report.final_residual:.3e}",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_sullivan(args) -> int:
    schedule = load_schedule(args.schedule)
    prevalence = load_prevalence(args.prevalence)
    hle = sullivan_hle(schedule, prevalence, args.from_age)
    print(f"sullivan HLE at {args.from_age}: {hle:.4f} years")
    if args.out:
        out = Path(args.out)
        _write_rows(out, ["from_age", "hle_years"], [[args.from_age, f"{hle:.6f}"]])
        manifest = _manifest(args, "sullivan", None, None)
        manifest.outputs = [str(out)]
        manifest.write(out)
    return EXIT_OK


def cmd_simcheck(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    measure = HealthMeasure(cfg["measure"])
    gender = Gender(cfg["gender"])
    if "coeffs" in cfg:
        cset = load_coefficients(*_aslist(cfg["coeffs"]))
    else:
        cset = bundled_coefficients(measure)
    matrices = build_all_matrices(cset, gender)
    agents = int(cfg.get("agents", 1_000_000))
    seed = int(cfg.get("seed", args.seed))
    lines = cross_validate(matrices, measure, agents=agents, seed=seed)

    failed = [l for l in lines if not l.ok]
    for l in lines:
        status = "ok" if l.ok else "FAIL"
        print(f"{status:4s} {l.name}: empirical={l.empirical:.6f} "
              f"analytic={l.analytic:.6f} se={l.se:.2e}")
    if args.out:
        out = Path(args.out)
        out.write_text(json.dumps(
            {
                "rng": "philox4x64",
                "seed": seed,
                "agents": agents,
                "measure": measure.value,
                "gender": gender.value,
                "checks": [dataclasses.asdict(l) for l in lines],
            }, indent=2) + "\n")
        manifest = _manifest(args, "simcheck", measure, gender)
        manifest.add_input("config", args.config)
        manifest.outputs = [str(out)]
        manifest.write(out)
    return EXIT_ORACLE if failed else EXIT_OK


def cmd_export_matrices(args) -> int:
    cset = _coefficients(args)
    measure, gender = cset.measure, Gender(args.gender)
    matrices = build_all_matrices(cset, gender)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["age", "destination_state", "initial_state", "probability"])
    names = measure.living_states
    for age in range(matrices.shape[0]):
        for j in range(matrices.shape[1]):
            for k in range(matrices.shape[2]):
                w.writerow([age, names[j], names[k], repr(float(matrices[age, j, k]))])
    if args.out:
        out = Path(args.out)
        out.write_text(buf.getvalue())
        manifest = _manifest(args, "export-matrices", measure, gender)
        manifest.outputs = [str(out)]
        manifest.write(out)
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _aslist(v):
    return v if isinstance(v, list) else [v]


def _manifest(args, command, measure, gender) -> RunManifest:
    m = RunManifest(
        command=command,
        tool_version=__version__,
        measure=measure.value if measure else None,
        gender=gender.value if gender else None,
        options={k: v for k, v in vars(args).items()
                 if k not in ("func", "config") and not callable(v)},
    )
    for label in ("coeffs", "life_table", "schedule", "prevalence"):
        value = getattr(args, label, None)
        if isinstance(value, list):
            for i, p in enumerate(value):
                m.add_input(f"{label}[{i}]", p)
        elif value:
            m.add_input(label, value)
    return m


def _add_common(p, *, measure=True, coeffs=True):
    p.add_argument("--config", help="JSON file with flag defaults")
    if measure:
        p.add_argument("--measure", choices=["sah", "hh"], required=True)
        p.add_argument("--gender", choices=["m", "f"], required=True)
    if coeffs:
        p.add_argument("--coeffs", action="append",
                       help="coefficient JSON file (repeatable; default: bundled)")
        p.add_argument("--birth-mix",
                       help="comma-separated birth cohort mix over living states "
                            "(default: all in the best state)")
    p.add_argument("--from-age", type=int, default=65)
    p.add_argument("--out", help="output CSV/JSON path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifealign",
        description="Healthy life expectancy from health-state transition "
                    "matrices, with life-table alignment",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("unadjusted", help="LE/HLE from the raw transition matrices")
    _add_common(p)
    p.add_argument("--half-year-correction", action="store_true")
    p.set_defaults(func=cmd_unadjusted)

    p = sub.add_parser("align", help="align matrices to a life table and report LE/HLE")
    _add_common(p)
    p.add_argument("--life-table", required=True, help="CSV age,survival or age,qx")
    p.add_argument("--year", type=int, help="year label for the output row")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--allow-rank-deficient", action="store_true")
    p.add_argument("--half-year-correction", action="store_true")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("sullivan", help="prevalence-based HLE baseline")
    _add_common(p, measure=False, coeffs=False)
    p.add_argument("--schedule", required=True, help="CSV age,lx,ex")
    p.add_argument("--prevalence", required=True, help="CSV age_from,age_to,ill_health_rate")
    p.set_defaults(func=cmd_sullivan)

    p = sub.add_parser("simcheck", help="Monte Carlo cross-validation of the engine")
    p.add_argument("--config", required=True, help="JSON simulation config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="summary JSON path")
    p.set_defaults(func=cmd_simcheck)

    p = sub.add_parser("export-matrices", help="dump all transition matrices as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_export_matrices)

    return parser


def _apply_config_file(parser, argv):
    # config files hold flag defaults in the same JSON format as the
    # coefficient files; explicit command-line flags win
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    with open(argv[i + 1], encoding="utf-8") as fh:
        cfg = json.load(fh)
    extra = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        elif isinstance(value, list):
            for v in value:
                extra.extend([flag, str(v)])
        else:
            extra.extend([flag, str(value)])
    return argv + extra


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and argv[0] != "simcheck":
        try:
            argv = _apply_config_file(parser, argv)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error reading config: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AlignmentError as exc:
        print(f"alignment error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
