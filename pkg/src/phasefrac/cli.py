"""Batch driver: run a fracture case from the catalog or a config file.

Subcommands:

``run``
    Execute one case and write its outputs into a directory: the
    per-increment ``history.csv``, the resolved ``case.cfg``, and a
    ``fields_<increment>.vtk`` series with displacement, phase field and
    element history.  VTK volume is bounded by default: a file is written
    only when the peak phase value moved by more than 0.01 since the last
    written file, plus always the final increment (``--write-fields``
    overrides the policy).

``report``
    Reprint the summary table from an existing ``history.csv``.

Exit codes: 0 — run completed with every increment converged; 2 — run
finished (or was cut short by a solver failure) with non-converged
increments, partial outputs are on disk; 1 — bad input (unknown case,
malformed config or override, unreadable mesh), diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

from .cases import (
    CaseError,
    apply_overrides,
    get_case,
    parse_case_config,
    prepare,
    serialize_case,
)
from .mesh_io import MeshFormatError, write_history_csv, write_vtk
from .solver import (
    DivergenceError,
    NonConvergenceError,
    SingularSystemError,
    run,
)

__all__ = ["main"]

_WORKERS_ENV = "PHASEFRAC_WORKERS"


class _InputError(Exception):
    """User-input fault: message is printed to stderr, exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage errors; this artifact uses
    2 for non-convergence, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _InputError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="phasefrac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a case and write outputs")
    src = runp.add_mutually_exclusive_group(required=True)
    src.add_argument("--case", help="catalog case, optionally 'name:variant'")
    src.add_argument("--config", help="path to a case config file")
    runp.add_argument("--out", default="phasefrac_out", help="output directory")
    runp.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path override, e.g. solve.extrapolate=false or "
        "extrapolate=false (bare solver fields are accepted); repeatable",
    )
    runp.add_argument("--scheme", help="solver scheme override")
    runp.add_argument("--increments", type=int, help="load increment count override")
    runp.add_argument(
        "--extrapolate", choices=("on", "off"), help="predictor toggle override"
    )
    runp.add_argument("--split", help="energy split override")
    runp.add_argument("--formulation", help="damage coupling override")
    runp.add_argument(
        "--mesh-size", type=float, help="fine mesh size override (generator meshes)"
    )
    runp.add_argument(
        "--workers",
        type=int,
        default=None,
        help=f"assembly worker count (default ${_WORKERS_ENV} or 1)",
    )
    runp.add_argument(
        "--write-fields",
        choices=("auto", "all", "final", "off"),
        default="auto",
        help="VTK policy: auto = on phi_max change > 0.01 plus final",
    )
    verb = runp.add_mutually_exclusive_group()
    verb.add_argument(
        "-v", "--verbose", action="store_true", help="print every increment"
    )
    verb.add_argument(
        "-q", "--quiet", action="store_true", help="suppress progress output"
    )

    repp = sub.add_parser("report", help="print the table from a history.csv")
    repp.add_argument("path", help="history.csv or a directory containing it")
    return parser


# ---------------------------------------------------------------------------
# run


def _parse_set(items) -> dict:
    overrides = {}
    for item in items:
        key, eq, value = item.partition("=")
        if not eq or not key.strip():
            raise _InputError(f"--set expects KEY=VALUE, got {item!r}")
        key = key.strip()
        if "." not in key:
            key = f"solve.{key}"  # bare names are solver fields
        overrides[key] = value.strip()
    return overrides


def _load_case(args):
    if args.case:
        return get_case(args.case)  # CaseError lists the catalog
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise _InputError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_case_config(text)


def _flag_overrides(args, case) -> dict:
    overrides = {}
    if args.scheme:
        overrides["solve.scheme"] = args.scheme
    if args.increments is not None:
        overrides["solve.n_increments"] = args.increments
    if args.extrapolate:
        overrides["solve.extrapolate"] = args.extrapolate == "on"
    if args.split:
        overrides["material.split"] = args.split
    if args.formulation:
        overrides["material.formulation"] = args.formulation
    if args.mesh_size is not None:
        params = dict(case.mesh.params or ())
        if "h_fine" not in params:
            have = ", ".join(sorted(params)) or "none (mesh comes from a file)"
            raise _InputError(
                "--mesh-size sets the generator parameter 'h_fine', which "
                f"this case does not use; its parameters are: {have}. "
                "Use --set mesh.<param>=<value> instead."
            )
        overrides["mesh.h_fine"] = args.mesh_size
    if args.workers is not None:
        overrides["solve.workers"] = args.workers
    elif os.environ.get(_WORKERS_ENV):
        overrides["solve.workers"] = os.environ[_WORKERS_ENV]
    return overrides


class _FieldWriter:
    """Applies the VTK output policy over the increment stream."""

    def __init__(self, outdir: Path, mesh, policy: str, n_increments: int):
        self.outdir = outdir
        self.mesh = mesh
        self.policy = policy
        self.n_increments = n_increments
        self.last_phi_max = None
        self.written = []

    def __call__(self, record, state, history):
        if self.policy == "off":
            return
        final = record.increment == self.n_increments
        if self.policy == "final":
            due = final
        elif self.policy == "all":
            due = True
        else:  # auto
            moved = (
                self.last_phi_max is None
                or abs(record.phi_max - self.last_phi_max) > 0.01
            )
            due = moved or final
        if not due:
            return
        path = self.outdir / f"fields_{record.increment:05d}.vtk"
        dim = self.mesh.dim
        write_vtk(
            path,
            self.mesh,
            point_data={
                "displacement": state.u.reshape(-1, dim),
                "phi": state.phi,
            },
            cell_data={"history": history.max(axis=1)},
        )
        self.last_phi_max = record.phi_max
        self.written.append(path.name)


def _summary_lines(records, wall_time=None):
    peak = max((abs(r.force) for r in records), default=0.0)
    cumulative = sum(r.iterations for r in records)
    failed = [r.increment for r in records if not r.converged]
    lines = [
        f"increments          {len(records)}",
        f"cumulative iterations {cumulative}",
        f"peak |force|        {peak:.6g}",
        f"wall time           "
        + (f"{wall_time:.1f} s" if wall_time is not None else "-"),
    ]
    if failed:
        lines.append(f"non-converged       {len(failed)} increment(s): " + _brief(failed))
    else:
        lines.append("non-converged       none")
    return lines


def _brief(increments, limit=12):
    text = ", ".join(str(i) for i in increments[:limit])
    if len(increments) > limit:
        text += f", ... ({len(increments) - limit} more)"
    return text


def _row(r):
    flag = "" if r.converged else "  FAILED"
    return (
        f"{r.increment:6d} {r.displacement:13.6g} {r.force:13.6g} "
        f"{r.iterations:6d}{flag}"
    )


_HEADER = f"{'inc':>6} {'displacement':>13} {'force':>13} {'iters':>6}"


def _cmd_run(args) -> int:
    case = _load_case(args)
    overrides = _parse_set(args.overrides)
    overrides.update(_flag_overrides(args, case))
    if overrides:
        case = apply_overrides(case, overrides)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    mesh, bcs = prepare(case)
    (outdir / "case.cfg").write_text(serialize_case(case))

    echo = print if not args.quiet else (lambda *a, **k: None)
    echo(
        f"case {case.name}: {mesh.n_nodes} nodes, {mesh.n_elements} "
        f"{mesh.kind.name} elements, {case.solve.scheme.value} scheme, "
        f"{case.solve.n_increments} increments"
    )

    writer = _FieldWriter(outdir, mesh, args.write_fields, case.solve.n_increments)
    records = []
    stride = max(1, case.solve.n_increments // 20)

    def on_increment(record, state, history):
        records.append(record)
        writer(record, state, history)
        if args.verbose or (
            not args.quiet
            and (record.increment % stride == 0 or not record.converged)
        ):
            echo(_row(record))

    t0 = time.perf_counter()
    aborted = None
    try:
        result = run(
            mesh,
            case.material,
            bcs,
            case.solve,
            monitor=case.monitor,
            on_increment=on_increment,
        )
    except (SingularSystemError, DivergenceError, NonConvergenceError) as exc:
        aborted = str(exc)
    wall = time.perf_counter() - t0

    write_history_csv(outdir / "history.csv", records)
    echo(f"\nwrote {outdir / 'history.csv'} and {len(writer.written)} field file(s)")
    for line in _summary_lines(records, wall):
        echo(line)

    if aborted is not None:
        print(
            f"run aborted after {len(records)} increment(s): {aborted}",
            file=sys.stderr,
        )
        return 2
    if not result.converged:
        failed = [r.increment for r in records if not r.converged]
        print(
            "completed with non-converged increment(s): " + _brief(failed),
            file=sys.stderr,
        )
        return 2
    return 0


# ---------------------------------------------------------------------------
# report


class _CsvRecord:
    def __init__(self, row):
        try:
            self.increment = int(row["increment"])
            self.displacement = float(row["displacement"])
            self.force = float(row["force"])
            self.iterations = int(row["iterations"])
            self.converged = row["converged"] == "1"
        except (KeyError, TypeError, ValueError) as exc:
            raise _InputError(f"malformed history row {row!r}: {exc}") from None


def _cmd_report(args) -> int:
    path = Path(args.path)
    if path.is_dir():
        path = path / "history.csv"
    try:
        with open(path, newline="") as f:
            rows = [_CsvRecord(row) for row in csv.DictReader(f)]
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise _InputError(f"{path} contains no increments")
    print(_HEADER)
    for r in rows:
        print(_row(r))
    print()
    for line in _summary_lines(rows):
        print(line)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_report(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CaseError, MeshFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
