"""Command-line front end.

Commands:
    eval       Truth value of a proposition on a model file.
    sweep      Truth value of a template F[t](...) over a time grid (CSV).
    check-ch   Consistent-histories residual of a proposition's normal form.
    verify     Theorem suite over a seeded model family.
    gen-model  Write a generated model file.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 truth value out of
range (CH violation), 4 verify inconclusive, 5 verify failed.

Example:
    python scripts/tau.py eval --model artifacts/models/rabi.model --prop "F[1.0471975512](A)"
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from tense_logic.consistency import ch_certify
from tense_logic.errors import InputError, RangeViolation, StrictModeViolation
from tense_logic.linalg import DEFAULT_TOL
from tense_logic.logic import check_strict, instantiate, normalize, parse, parse_template
from tense_logic.model import (
    QuantumModel,
    generate_commuting_model,
    generate_dephasing_model,
    generate_random_model,
    load_model_file,
    rabi_model,
    save_model,
    save_model_file,
)
from tense_logic.valuation import (
    EvalOptions,
    evaluate_history_breakdown,
    metalanguage_truth,
    parallel_map,
    tau_prop,
    tau_time_sweep,
)
from tense_logic.verify import FAMILIES, format_report, overall_status, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_RANGE = 3
EXIT_INCONCLUSIVE = 4
EXIT_FAILED = 5

COMMANDS = ("eval", "sweep", "check-ch", "verify", "gen-model")
OUTPUTS = ("text", "csv", "structured")

_VERIFY_EXIT = {"passed": EXIT_OK, "inconclusive": EXIT_INCONCLUSIVE, "failed": EXIT_FAILED}


@dataclass(frozen=True)
class CliConfig:
    """Validated command-line settings for one invocation."""

    command: str
    model_path: Optional[Path] = None
    prop: Optional[str] = None
    template: Optional[str] = None
    grid: Optional[str] = None
    mode: str = "general"
    tol: float = DEFAULT_TOL
    strict: bool = False
    metalanguage: bool = False
    negation: str = "structural"
    output: str = "text"
    family: Optional[str] = None
    cases: int = 200
    seed: int = 0
    preset: Optional[str] = None
    ch_filter: bool = True
    workers: int = 1
    dim: int = 4
    dim_e: int = 1
    events: int = 3
    splitting: float = 1.0
    couplings: Optional[str] = None
    out: Optional[Path] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        values = {name: getattr(args, name) for name in cls.__dataclass_fields__ if hasattr(args, name)}
        if "mode" in values:
            values["mode"] = values["mode"].replace("-", "_")
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        required = {
            "eval": ("model_path", "prop"),
            "sweep": ("model_path", "template", "grid"),
            "check-ch": ("model_path", "prop"),
            "verify": ("family",),
            "gen-model": ("family",),
        }[self.command]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--" + name.replace("_path", "").replace("_", "-") for name in missing)
            raise InputError(f"{self.command} requires {flags}")
        if not self.tol > 0:
            raise InputError(f"--tol must be positive, got {self.tol}")
        if self.workers < 1:
            raise InputError(f"--workers must be >= 1, got {self.workers}")
        if self.metalanguage and not self.strict:
            raise InputError("--metalanguage requires --strict")

    def eval_options(self, clamp: bool = True) -> EvalOptions:
        return EvalOptions(mode=self.mode, tolerance=self.tol, clamp=clamp, negation=self.negation)


def parse_grid(text: str) -> List[float]:
    """``start:stop:step`` with ``stop`` inclusive.

    Raises:
        InputError: Malformed grid, non-positive start or step.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"Malformed grid {text!r}; expected start:stop:step")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as exc:
        raise InputError(f"Malformed grid {text!r}: {exc}") from exc
    if not start > 0:
        raise InputError(f"Grid start must be > 0 (F requires t > 0), got {start}")
    if not step > 0:
        raise InputError(f"Grid step must be > 0, got {step}")
    if stop < start:
        raise InputError(f"Grid stop {stop} is before start {start}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def _write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _dump(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2)


def _initial_state_kind(model: QuantumModel) -> str:
    return "product" if model.is_product_state else "superposed"


def _flatten_rows(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Dict[str, Any]:
    """``{name}_{i}`` for every cell, with rows numbered from 0."""
    return {f"{name}_{i}": value for i, row in enumerate(rows) for name, value in zip(header, row)}


# Commands

def cmd_eval(config: CliConfig) -> int:
    model = load_model_file(config.model_path, tol=config.tol)
    prop = parse(config.prop)
    if config.strict:
        try:
            check_strict(prop)
        except StrictModeViolation:
            if not config.metalanguage:
                raise
            truth = metalanguage_truth(model, prop, config.eval_options())
            if config.output == "structured":
                print(_dump({"proposition": config.prop, "metalanguage": truth,
                             "initial_state": _initial_state_kind(model)}))
            elif config.output == "csv":
                print(_write_csv(["metalanguage"], [[str(truth).lower()]]), end="")
            else:
                print(f"proposition: {config.prop}")
                print(f"metalanguage: {str(truth).lower()}")
            return EXIT_OK

    opts = config.eval_options()
    nf = normalize(prop, model)
    value = tau_prop(model, prop, opts)
    report = ch_certify(model, nf, config.tol)
    breakdown = evaluate_history_breakdown(model, nf, config.eval_options(clamp=False))

    kind = _initial_state_kind(model)
    if config.output == "structured":
        data = {"proposition": config.prop, "mode": config.mode, **value.to_dict(),
                "ch_residual": report.max_residual, "n_histories": len(nf), "initial_state": kind}
        print(_dump(data))
    elif config.output == "csv":
        print(_write_csv(["tau", "raw", "imag_residual", "ch_residual", "initial_state"],
                         [[value.value, value.raw, value.imag_residual, report.max_residual, kind]]), end="")
    else:
        print(f"proposition: {config.prop}")
        print(f"mode: {config.mode}")
        if not model.is_product_state:
            print("initial_state: superposed")
        print(f"tau: {value.value:.6f}")
        print(f"raw: {value.raw!r}")
        print(f"imag_residual: {value.imag_residual:.3e}")
        print(f"ch_residual: {report.max_residual:.3e}")
        print(f"histories ({len(nf)}):")
        for i, (history, tv) in enumerate(breakdown, 1):
            print(f"  {i}. {history}  tau={tv.raw:.6f}")
    return EXIT_OK


def cmd_sweep(config: CliConfig) -> int:
    grid = parse_grid(config.grid)
    model = load_model_file(config.model_path, tol=config.tol)
    template = parse_template(config.template)
    if config.strict:
        check_strict(template)

    points = tau_time_sweep(model, template, grid, config.eval_options(), workers=config.workers)
    residuals = parallel_map(
        lambda t: ch_certify(model, normalize(instantiate(template, t), model), config.tol).max_residual,
        grid,
        config.workers,
    )
    rows = [[t, tv.value, tv.imag_residual, residual] for (t, tv), residual in zip(points, residuals)]
    header = ["t", "tau", "imag_residual", "ch_residual"]

    if config.output == "structured":
        print(_dump({"template": config.template, "n_points": len(rows),
                     "initial_state": _initial_state_kind(model), **_flatten_rows(header, rows)}))
    elif config.output == "text":
        print(f"{'t':>12} {'tau':>10} {'imag_residual':>14} {'ch_residual':>12}")
        for t, tau, imag, residual in rows:
            print(f"{t:>12.6f} {tau:>10.6f} {imag:>14.3e} {residual:>12.3e}")
    else:
        print(_write_csv(header, rows), end="")
    return EXIT_OK


def cmd_check_ch(config: CliConfig) -> int:
    model = load_model_file(config.model_path, tol=config.tol)
    nf = normalize(parse(config.prop), model)
    report = ch_certify(model, nf, config.tol)
    data = {"proposition": config.prop, **report.to_dict(), "certified": report.certified(config.tol),
            "initial_state": _initial_state_kind(model)}
    if data["worst_pair"] is not None:
        data["worst_pair"] = "/".join(data["worst_pair"])

    if config.output == "structured":
        print(_dump(data))
    elif config.output == "csv":
        print(_write_csv(["ch_residual", "n_pairs_checked", "skipped_trivial", "certified", "initial_state"],
                         [[report.max_residual, report.n_pairs_checked, report.skipped_trivial,
                           str(data["certified"]).lower(), data["initial_state"]]]), end="")
    else:
        print(f"proposition: {config.prop}")
        if not model.is_product_state:
            print("initial_state: superposed")
        print(f"ch_residual: {report.max_residual:.3e}")
        if report.worst_pair is not None:
            print(f"worst_pair: {data['worst_pair']} in {data['worst_history']}")
        print(f"pairs_checked: {report.n_pairs_checked}")
        print(f"skipped_trivial: {report.skipped_trivial}")
        print(f"certified: {str(data['certified']).lower()} (tol {config.tol:g})")
    return EXIT_OK


def cmd_verify(config: CliConfig) -> int:
    reports = run_suite(
        config.family,
        config.cases,
        config.seed,
        tol=config.tol,
        ch_filter=config.ch_filter,
        workers=config.workers,
        preset=config.preset,
    )
    status = overall_status(reports)

    if config.output == "structured":
        data = {"family": config.family, "cases": config.cases, "seed": config.seed, "status": status}
        for r in reports:
            row = r.to_dict()
            theorem_id = row.pop("theorem_id")
            data.update({f"{theorem_id}_{key}": value for key, value in row.items()})
        print(_dump(data))
    elif config.output == "csv":
        rows = [list(r.to_dict().values()) for r in reports]
        print(_write_csv(list(reports[0].to_dict().keys()), rows), end="")
    else:
        print(format_report(reports))
    return _VERIFY_EXIT[status]


def cmd_gen_model(config: CliConfig) -> int:
    family = config.family
    if family == "commuting":
        model = generate_commuting_model(config.dim, config.events, config.seed)
    elif family == "dephasing":
        couplings = _parse_couplings(config.couplings or "0.05,0.1,0.2")
        model = generate_dephasing_model(len(couplings), config.splitting, couplings, config.seed)
    elif family == "generic":
        model = generate_random_model(config.dim, config.dim_e, config.events, config.seed)
    else:
        model = rabi_model()

    if config.out is not None:
        save_model_file(model, config.out)
        logger.info(f"Wrote {family} model to {config.out}")
    else:
        print(save_model(model), end="")
    return EXIT_OK


def _parse_couplings(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"Malformed --couplings {text!r}: {exc}") from exc


HANDLERS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "check-ch": cmd_check_ch,
    "verify": cmd_verify,
    "gen-model": cmd_gen_model,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Numerical tolerance (default: 1e-9)")
    common.add_argument("--output", choices=OUTPUTS, default=None, help="Output format")
    common.add_argument("--workers", type=int, default=1, help="Worker threads (default: 1)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")

    evaluation = argparse.ArgumentParser(add_help=False)
    evaluation.add_argument("--model", dest="model_path", type=Path, help="Model file")
    evaluation.add_argument("--mode", choices=("general", "ch-fast"), default="general", help="History formula")
    evaluation.add_argument("--strict", action="store_true", help="Reject cross-tense connectives")

    parser = argparse.ArgumentParser(
        prog="tau",
        description="Evaluate many-valued tensed propositions over consistent histories",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_eval = commands.add_parser("eval", parents=[common, evaluation], help="Evaluate a proposition")
    p_eval.add_argument("--prop", help="Proposition in the tense DSL")
    p_eval.add_argument("--metalanguage", action="store_true",
                        help="With --strict, read cross-tense connectives bivalently")
    p_eval.add_argument("--negation", choices=("structural", "arithmetic"), default="structural",
                        help="Top-level negation path")

    p_sweep = commands.add_parser("sweep", parents=[common, evaluation], help="Sweep a template over a time grid")
    p_sweep.add_argument("--template", help="Proposition with free time symbol t, e.g. F[t](A)")
    p_sweep.add_argument("--grid", help="start:stop:step, stop inclusive")

    p_check = commands.add_parser("check-ch", parents=[common], help="Consistent-histories residual")
    p_check.add_argument("--model", dest="model_path", type=Path, help="Model file")
    p_check.add_argument("--prop", help="Proposition in the tense DSL")

    p_verify = commands.add_parser("verify", parents=[common], help="Run the theorem suite")
    p_verify.add_argument("--family", choices=FAMILIES, help="Model family")
    p_verify.add_argument("--cases", type=int, default=200, help="Number of seeded cases (default: 200)")
    p_verify.add_argument("--seed", type=int, default=0, help="Suite seed (default: 0)")
    p_verify.add_argument("--preset", help="Dephasing preset name")
    p_verify.add_argument("--no-ch-filter", dest="ch_filter", action="store_false",
                          help="Run CH-dependent checks on uncertified cases too")

    p_gen = commands.add_parser("gen-model", parents=[common], help="Generate a model file")
    p_gen.add_argument("--family", choices=("commuting", "dephasing", "generic", "rabi"), help="Model family")
    p_gen.add_argument("--dim", type=int, default=4, help="Dimension (commuting) or dim_s (generic)")
    p_gen.add_argument("--dim-e", dest="dim_e", type=int, default=1, help="Environment dimension (generic)")
    p_gen.add_argument("--events", type=int, default=3, help="Number of named events")
    p_gen.add_argument("--splitting", type=float, default=1.0, help="System splitting (dephasing)")
    p_gen.add_argument("--couplings", help="Comma-separated environment couplings (dephasing)")
    p_gen.add_argument("--seed", type=int, default=0, help="Generator seed")
    p_gen.add_argument("--out", type=Path, help="Output path (default: stdout)")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT

    _configure_logging(args.verbose)
    if args.output is None:
        args.output = "csv" if args.command == "sweep" else "text"

    try:
        config = CliConfig.from_args(args)
        return HANDLERS[config.command](config)
    except RangeViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RANGE
    except (InputError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.exception("Internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
