"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure, 4 I/O error.
Every command writes ``<output>.manifest.json`` next to its primary output.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from clothoid_arm import __version__
from clothoid_arm.beam import GRAVITY, BeamParams, LoadCase, run_validation_study, simulate_equilibrium
from clothoid_arm.dataset import GridConfig, generate_grid, load, save, split, write_quarantine
from clothoid_arm.errors import (
    ClothoidArmError,
    ConfigError,
    DataError,
    NumericalError,
    RoleMismatch,
    SchemaVersionMismatch,
)
from clothoid_arm.evaluate import N_VAL, evaluate_models
from clothoid_arm.hermite import BoundaryData, SolverOptions, solve_g1
from clothoid_arm.learn.metrics import EvalReport
from clothoid_arm.learn.mlp import Hyperparams, MlpModel
from clothoid_arm.learn.models import forward_predict, train_forward, train_inverse
from clothoid_arm.spiral import ShapeRep, eval_poses, read_station_csv, stations, write_station_csv
from clothoid_arm.svg import write_svg

log = logging.getLogger("clothoid_arm")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
DEFAULT_SEED = 42

BEAM_FLAGS = {"length": "length", "EI": "flexural_rigidity", "pressure_gain": "pressure_gain",
              "self_weight": "self_weight", "nodes": "nodes"}
HYPER_FLAGS = {"epochs": "epochs", "batch_size": "batch_size", "learning_rate": "learning_rate", "decay": "decay"}


class Run:
    """Collects the resolved configuration and writes the manifest."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = args
        self.started = time.perf_counter()
        self.file_config = _read_config(args.config) if getattr(args, "config", None) else {}
        self.config: dict = {}
        self.inputs: list[str] = []
        self.outputs: list[str] = []

    @property
    def seed(self) -> int:
        if self.args.seed is not None:
            return self.args.seed
        return int(self.file_config.get("seed", DEFAULT_SEED))

    def beam(self) -> BeamParams:
        d = dict(self.file_config.get("beam", {}))
        for flag, key in BEAM_FLAGS.items():
            v = getattr(self.args, flag, None)
            if v is not None:
                d[key] = v
        params = BeamParams.from_dict(d)
        self.config["beam"] = params.to_dict()
        return params

    def hyper(self) -> Hyperparams:
        d = dict(self.file_config.get("hyper", {}))
        for flag, key in HYPER_FLAGS.items():
            v = getattr(self.args, flag, None)
            if v is not None:
                d[key] = v
        d["seed"] = self.seed
        try:
            hyper = Hyperparams(**d)
        except TypeError as exc:
            raise ConfigError(f"bad training config: {exc}") from None
        self.config["hyper"] = asdict(hyper)
        return hyper

    def write_manifest(self, primary: Path) -> None:
        self.config["seed"] = self.seed
        manifest = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "tool_version": __version__,
            "duration_s": round(time.perf_counter() - self.started, 6),
        }
        Path(str(primary) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _read_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON config ({exc.msg} at line {exc.lineno})") from None
    # A manifest doubles as a config file.
    return data.get("config", data) if isinstance(data, dict) else {}


def _out(run: Run, path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    run.outputs.append(str(p))
    return p


def cmd_simulate(run: Run) -> int:
    a = run.args
    params = run.beam()
    magnitude = a.W * 1e-3 * GRAVITY
    if a.kind == "payload":
        load_case = LoadCase.payload(magnitude)
    else:
        d = np.asarray(a.contact_dir, dtype=float)
        load_case = LoadCase.contact(magnitude, d / np.linalg.norm(d))
    run.config["load"] = {"P_kPa": a.P, "W_g": a.W, "kind": load_case.kind, "direction": list(load_case.direction)}
    res = simulate_equilibrium(params, a.P, load_case)
    out = _out(run, a.out)
    write_station_csv(out, res.stations, res.poses)
    if a.svg:
        write_svg(_out(run, a.svg), [res.poses], [f"P={a.P:g} kPa, W={a.W:g} g"])
    run.write_manifest(out)
    log.info("tip pose %s after %d iterations", res.tip, res.iterations)
    return EXIT_OK


def cmd_fit(run: Run) -> int:
    a = run.args
    try:
        request = json.loads(Path(a.boundary).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{a.boundary}: invalid boundary JSON ({exc.msg})") from None
    run.inputs.append(a.boundary)
    boundary = BoundaryData.from_dict(request)
    order = a.order if a.order is not None else int(request.get("order", 2))
    run.config["fit"] = {**boundary.to_dict(), "order": order}
    report = solve_g1(boundary, order, SolverOptions())
    text = json.dumps({**report.to_dict(), "order": order}, indent=2) + "\n"
    if a.out:
        out = _out(run, a.out)
        out.write_text(text)
        run.write_manifest(out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_study(run: Run) -> int:
    a = run.args
    params = run.beam()
    pressures = np.arange(a.p_min, a.p_max + 0.5 * a.p_step, a.p_step)
    loads = np.round(np.arange(a.w_min, a.w_max + 0.5 * a.w_step, a.w_step), 12)
    run.config["study"] = {"pressures_kPa": pressures.tolist(), "loads_N": loads.tolist(),
                           "kinds": a.kinds, "contact_dir": a.contact_dir}
    d = np.asarray(a.contact_dir, dtype=float)
    table = run_validation_study(params, pressures, loads, a.kinds, d / np.linalg.norm(d), jobs=a.jobs)
    out = _out(run, a.out)
    table.write_csv(out)
    table.write_summary_csv(_out(run, a.summary or out.with_name(out.stem + "_summary.csv")))
    for row in table.summary():
        log.info("%s degree %d: R^2 = %.4f +- %.4f", row["kind"], row["degree"], row["mean_r2"], row["std_r2"])
    for f in table.failures:
        log.warning("failed cell %s", f)
    run.write_manifest(out)
    return EXIT_OK


def _grid(run: Run) -> GridConfig:
    a = run.args
    d = dict(run.file_config.get("grid", {}))
    for key in ("order", "noise_std", "record_limit"):
        v = getattr(a, key, None)
        if v is not None:
            d[key] = v
    d["seed"] = run.seed
    grid = GridConfig.from_dict(d)
    run.config["grid"] = grid.to_dict()
    return grid


def cmd_generate(run: Run) -> int:
    a = run.args
    params = run.beam()
    grid = _grid(run)
    ds = generate_grid(params, grid, jobs=a.jobs)
    out = _out(run, a.out)
    save(ds, out)
    write_quarantine(ds.quarantine, _out(run, str(out) + ".quarantine.jsonl"))
    log.info("%d records, %d quarantined", len(ds.records), len(ds.quarantine))
    run.write_manifest(out)
    return EXIT_OK


def _load_dataset(run: Run, path):
    run.inputs.append(str(path))
    return load(path)


def cmd_train(run: Run) -> int:
    a = run.args
    hyper = run.hyper()
    ds = _load_dataset(run, a.data)
    run.config["train"] = {"role": a.role, "n_val": a.n_val}
    train_set, _ = split(ds.records, a.n_val, hyper.seed)
    fit = train_forward if a.role == "forward" else train_inverse
    model, history = fit(train_set, ds.order, ds.length, hyper)
    model.meta["n_val"] = a.n_val
    model.meta["final_loss"] = history[-1]
    out = _out(run, a.out)
    model.save(out)
    if a.history:
        Path(_out(run, a.history)).write_text("".join(f"{i},{v:.17g}\n" for i, v in enumerate(history)))
    log.info("%s model N=%d: loss %.5f -> %.5f", a.role, ds.order, history[0], history[-1])
    run.write_manifest(out)
    return EXIT_OK


def cmd_eval(run: Run) -> int:
    a = run.args
    datasets = [_load_dataset(run, p) for p in a.data]
    models = []
    for p in (a.forward or []) + (a.inverse or []):
        run.inputs.append(p)
        models.append(MlpModel.load(p))
    reports = []
    for ds in datasets:
        fwd = [m for m in models if m.role == "forward" and m.order == ds.order]
        inv = [m for m in models if m.role == "inverse" and m.order == ds.order]
        if not fwd and not inv:
            raise RoleMismatch(f"no forward or inverse model of order N={ds.order} was given")
        ref = (fwd or inv)[0]
        n_val = int(ref.meta.get("n_val", N_VAL)) if a.n_val is None else a.n_val
        _, val = split(ds.records, n_val, ref.seed)
        reports.append(evaluate_models(ds, val, fwd[0] if fwd else None, inv[0] if inv else None))
    run.config["eval"] = {"orders": [r.order for r in reports]}
    out = _out(run, a.out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EvalReport.COLUMNS)
        for r in sorted(reports, key=lambda r: -r.order):
            w.writerow([r.order] + [f"{v:.17g}" for v in r.row()[1:]])
    for r in reports:
        log.info("N=%d tip %.3f%% load %.3f%%", r.order, r.err_tip[0], r.load_err[0])
    run.write_manifest(out)
    return EXIT_OK


def cmd_plot(run: Run) -> int:
    a = run.args
    curves, labels = [], []
    for p in a.csv or []:
        run.inputs.append(p)
        _, poses = read_station_csv(p)
        curves.append(poses)
        labels.append(Path(p).stem)
    for p in a.forward or []:
        run.inputs.append(p)
        model = MlpModel.load(p)
        shape = forward_predict(model, a.P, a.W)
        curves.append(eval_poses(shape, stations(shape.length, 101)))
        labels.append(f"N={model.order} forward ({a.P:g} kPa, {a.W:g} g)")
    if not curves:
        raise ConfigError("plot needs at least one --csv or --forward input")
    run.config["plot"] = {"P_kPa": a.P, "W_g": a.W}
    out = _out(run, a.out)
    write_svg(out, curves, labels)
    run.write_manifest(out)
    return EXIT_OK


def _add_beam_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("beam")
    g.add_argument("--length", type=float, help="actuator length (m)")
    g.add_argument("--EI", type=float, help="flexural rigidity (N m^2)")
    g.add_argument("--pressure-gain", type=float, help="actuation moment per kPa (N m / kPa)")
    g.add_argument("--self-weight", type=float, help="distributed weight (N/m)")
    g.add_argument("--nodes", type=int, help="oracle discretization nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clothoid-arm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (or a previous manifest)")
        p.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        return p

    p = command("simulate", "beam-oracle shape for one pressure/load")
    _add_beam_flags(p)
    p.add_argument("--P", type=float, required=True, help="pressure (kPa)")
    p.add_argument("--W", type=float, required=True, help="tip load (g)")
    p.add_argument("--kind", choices=("payload", "contact"), default="payload")
    p.add_argument("--contact-dir", type=float, nargs=2, default=(-1.0, -1.0), metavar=("DX", "DY"))
    p.add_argument("--out", required=True, help="station CSV (s,x,y,theta)")
    p.add_argument("--svg", help="optional SVG of the deformed shape")

    p = command("fit", "G1 Hermite interpolation of a boundary JSON")
    p.add_argument("--boundary", required=True)
    p.add_argument("--order", type=int, help="curvature order (overrides the file)")
    p.add_argument("--out", help="report JSON (default: standard output)")

    p = command("study", "linear vs quadratic curvature fits over a beam-oracle grid")
    _add_beam_flags(p)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=100.0)
    p.add_argument("--p-step", type=float, default=25.0)
    p.add_argument("--w-min", type=float, default=0.1, help="load (N)")
    p.add_argument("--w-max", type=float, default=0.5)
    p.add_argument("--w-step", type=float, default=0.1)
    p.add_argument("--kinds", nargs="+", choices=("payload", "contact"), default=["payload", "contact"])
    p.add_argument("--contact-dir", type=float, nargs=2, default=(-1.0, -1.0), metavar=("DX", "DY"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="cell CSV")
    p.add_argument("--summary", help="summary CSV (default: <out>_summary.csv)")

    p = command("generate", "synthesize the pressure/payload dataset")
    _add_beam_flags(p)
    p.add_argument("--order", type=int)
    p.add_argument("--noise-std", type=float, help="marker position noise (m)")
    p.add_argument("--record-limit", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="dataset JSONL")

    p = command("train", "train a forward or inverse model")
    p.add_argument("--data", required=True)
    p.add_argument("--role", choices=("forward", "inverse"), required=True)
    p.add_argument("--n-val", type=int, default=N_VAL, help="held-out records")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--history", help="optional per-epoch loss CSV")

    p = command("eval", "hold-out position and payload errors per order")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--forward", nargs="*")
    p.add_argument("--inverse", nargs="*")
    p.add_argument("--n-val", type=int, help="override the hold-out size stored in the models")
    p.add_argument("--out", required=True, help="report CSV")

    p = command("plot", "SVG of station CSVs and/or forward-model predictions")
    p.add_argument("--csv", nargs="*")
    p.add_argument("--forward", nargs="*")
    p.add_argument("--P", type=float, default=40.0)
    p.add_argument("--W", type=float, default=23.7)
    p.add_argument("--out", required=True)
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "study": cmd_study,
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](Run(args.command, args))
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except (SchemaVersionMismatch, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, RoleMismatch, ClothoidArmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
