"""Command-line entry point.

Every experiment is a subcommand reading a YAML config (unknown keys
rejected), with scalar settings overridable by flags. Runs write their
artifacts plus a manifest.json into the output directory; the manifest echoes
the resolved config so a run can be reproduced bit-exactly from it. Exit
codes: 0 ok, 2 bad config, 1 runtime failure; errors go to stderr as JSON.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np
import scipy
import yaml

from . import __version__
from ._seeding import rng_for  # noqa: F401  (re-exported for config docs)

CONFIG_EXIT = 2
RUNTIME_EXIT = 1

OUT_ENV = "SPLITQC_OUT"
MANIFEST_SCHEMA = "splitqc.manifest.v1"
HISTORY_SCHEMA = "splitqc.classify-history.v1"
TRAJECTORY_SCHEMA = "splitqc.vqe-trajectory.v1"
PARAMS_SCHEMA = "splitqc.params.v1"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- field table

def _int_list(value):
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    return tuple(int(v) for v in str(value).split(","))


def _str_list(value):
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return tuple(str(value).split(","))


def _float_pair(value):
    if isinstance(value, (list, tuple)):
        pair = tuple(float(v) for v in value)
    else:
        pair = tuple(float(v) for v in str(value).split(","))
    if len(pair) != 2:
        raise ValueError(f"expected two comma-separated values, got {value!r}")
    return pair


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _opt_int(value):
    return None if value in (None, "none", "null") else int(value)


REQUIRED = object()

# key -> (converter, default); REQUIRED means the key must be supplied
FIELDS = {
    "bp-scan": {
        "n_values": (_int_list, REQUIRED),
        "m_values": (_int_list, REQUIRED),
        "l_values": (_int_list, (2,)),
        "t_values": (_int_list, (0,)),
        "total_depth": (_opt_int, None),
        "samples": (int, 2000),
        "statistic": (str, "delta_cost"),
        "observable": (str, "one_local_z"),
        "block_family": (str, "ladder_ry_cx"),
    },
    "haar-verify": {
        "dims": (_int_list, (2, 4, 8)),
        "samples": (int, 100_000),
    },
    "gen-dataset": {
        "kind": (str, REQUIRED),
        "n_features": (int, 4),
        "n_samples": (int, 600),
        "class_sep": (float, 1.0),
        "flip_frac": (float, 0.02),
        "num_qubits": (int, 4),
        "ce_targets": (_float_pair, (0.05, 0.35)),
        "per_class": (int, 300),
        "depth": (int, 5),
    },
    "train-classify": {
        "dataset": (str, REQUIRED),
        "block_size": (_opt_int, None),
        "layers": (int, 2),
        "standard_layers": (int, 0),
        "block_family": (str, "ladder_ry_cx"),
        "epochs": (_opt_int, None),
        "batch_size": (_opt_int, None),
        "learning_rate": (float, 0.1),
        "seeds": (int, 1),
        "seed_list": (_int_list, None),
    },
    "vqe": {
        "n": (int, REQUIRED),
        "m": (_opt_int, None),
        "depth": (int, REQUIRED),
        "t": (int, 0),
        "j": (float, 1.0),
        "h": (float, 1.0),
        "periodic": (_bool, True),
        "iterations": (int, 2000),
        "shots": (_opt_int, None),
        "seeds": (int, 1),
        "seed_list": (_int_list, None),
    },
    "transpile-count": {
        "n_values": (_int_list, (4, 16, 36)),
        "m_labels": (_str_list, ("2", "4", "N")),
        "l_labels": (_str_list, ("2", "N")),
        "families": (_str_list, ("linear", "full")),
        "restarts": (int, 2),
    },
}

def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    table = FIELDS[command]
    unknown = set(file_values) - set(table)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    merged = {}
    for key, (convert, default) in table.items():
        if key in flag_values and flag_values[key] is not None:
            raw = flag_values[key]
        elif key in file_values and file_values[key] is not None:
            raw = file_values[key]
        else:
            merged[key] = default
            continue
        try:
            merged[key] = convert(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {command}.{key}: {exc}") from exc
    missing = sorted(k for k, v in merged.items() if v is REQUIRED)
    if missing:
        raise ConfigError(f"{command} requires config keys {missing}")
    return merged


def _seed_set(cfg: dict):
    if cfg.get("seed_list") is not None:
        return cfg["seed_list"]
    if cfg["seeds"] < 1:
        raise ConfigError(f"seeds must be a positive count, got {cfg['seeds']}")
    return tuple(range(cfg["seeds"]))


# ---------------------------------------------------------------- output

def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_tree(path) -> str:
    if os.path.isfile(path):
        return _sha256(path)
    digest = hashlib.sha256()
    for root, _, files in sorted(os.walk(path)):
        for name in sorted(files):
            full = os.path.join(root, name)
            digest.update(os.path.relpath(full, path).encode())
            digest.update(bytes.fromhex(_sha256(full)))
    return digest.hexdigest()


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def write_manifest(out_dir, command: str, config: dict, seed: int, outputs) -> None:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "subcommand": command,
        "seed": seed,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "outputs": {name: _hash_tree(os.path.join(out_dir, name)) for name in sorted(outputs)},
        "versions": {"splitqc": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _csv_writer(fh, schema: str, columns):
    fh.write(f"# schema={schema}\n")
    writer = csv.writer(fh)
    writer.writerow(columns)
    return writer


# ---------------------------------------------------------------- subcommands

def _run_bp_scan(cfg: dict, seed: int, out_dir: str, workers: int):
    from .scans import ScanConfig, run_scan, scan_ecs, write_records_csv

    try:
        base = ScanConfig(n_values=cfg["n_values"], m_values=cfg["m_values"],
                          l_values=cfg["l_values"], t_values=cfg["t_values"],
                          samples=cfg["samples"], seed=seed, statistic=cfg["statistic"],
                          observable=cfg["observable"], block_family=cfg["block_family"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg["total_depth"] is not None:
        records = scan_ecs(base, cfg["total_depth"], workers=workers)
    else:
        records = run_scan(base, workers=workers)
    write_records_csv(records, os.path.join(out_dir, "records.csv"))
    return ["records.csv"]


def _run_haar_verify(cfg: dict, seed: int, out_dir: str, workers: int):
    from .haar import haar_report

    report = haar_report(dims=cfg["dims"], samples=cfg["samples"], seed=seed)
    _write_json(os.path.join(out_dir, "report.json"), report)
    if not report["pass"]:
        raise RuntimeError("unitary-moment verification failed; see report.json")
    return ["report.json"]


def _run_gen_dataset(cfg: dict, seed: int, out_dir: str, workers: int):
    from .datasets import gen_hypercube_classification, gen_quantum_ce_dataset, save_dataset

    try:
        if cfg["kind"] == "classical":
            ds = gen_hypercube_classification(cfg["n_features"], n_samples=cfg["n_samples"],
                                              class_sep=cfg["class_sep"],
                                              flip_frac=cfg["flip_frac"], seed=seed)
            name = "dataset.csv"
        elif cfg["kind"] == "quantum":
            ds = gen_quantum_ce_dataset(cfg["num_qubits"], cfg["ce_targets"],
                                        per_class=cfg["per_class"], seed=seed,
                                        depth=cfg["depth"])
            name = "dataset"
        else:
            raise ConfigError(f"gen-dataset kind must be classical or quantum, got {cfg['kind']!r}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    save_dataset(ds, os.path.join(out_dir, name))
    return [name]


def _run_train_classify(cfg: dict, seed: int, out_dir: str, workers: int):
    from .classify import train_classifier
    from .datasets import load_dataset

    if not os.path.exists(cfg["dataset"]):
        raise ConfigError(f"dataset path not found: {cfg['dataset']}")
    try:
        dataset = load_dataset(cfg["dataset"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seeds = _seed_set(cfg)  # `--seeds 10` means ten seeds, 0..9
    results = train_classifier(dataset, block_size=cfg["block_size"],
                               layers=cfg["layers"], epochs=cfg["epochs"],
                               seeds=seeds, learning_rate=cfg["learning_rate"],
                               batch_size=cfg["batch_size"],
                               standard_layers=cfg["standard_layers"],
                               block_family=cfg["block_family"], workers=workers)

    with open(os.path.join(out_dir, "history.csv"), "w", encoding="utf-8") as fh:
        writer = _csv_writer(fh, HISTORY_SCHEMA,
                             ("seed", "epoch", "train_loss", "train_accuracy",
                              "test_loss", "test_accuracy"))
        for res in results:
            for row in res.history:
                writer.writerow([res.seed, row["epoch"],
                                 "%.17g" % row["train_loss"], "%.17g" % row["train_accuracy"],
                                 "%.17g" % row["test_loss"], "%.17g" % row["test_accuracy"]])
    _write_params_csv(os.path.join(out_dir, "params.csv"),
                      [(res.seed, res.params) for res in results])
    best = [res.best_test_accuracy for res in results]
    summary = {
        "per_seed": [{"seed": res.seed, "best_test_accuracy": res.best_test_accuracy,
                      "final_train_accuracy": res.final_train_accuracy,
                      "epochs_to_full_train": res.epochs_to_full_train}
                     for res in results],
        "median_best_test_accuracy": float(np.median(best)),
        "mean_best_test_accuracy": float(np.mean(best)),
        "seeds_reaching_full_train": sum(1 for r in results
                                         if r.epochs_to_full_train is not None),
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return ["history.csv", "params.csv", "summary.json"]


def _run_vqe(cfg: dict, seed: int, out_dir: str, workers: int):
    from .ansatz import SplitSpec
    from .vqe import VqeRun, mean_final_error, run_vqe_batch

    n, depth, t = cfg["n"], cfg["depth"], cfg["t"]
    if not 0 <= t <= depth:
        raise ConfigError(f"need 0 <= t <= depth, got t={t} depth={depth}")
    m = cfg["m"] if cfg["m"] is not None else n
    try:
        spec = SplitSpec(n, m, depth - t, standard_layers=t,
                         block_family="efficient_su2_full")
        run = VqeRun(spec, j=cfg["j"], h=cfg["h"], periodic=cfg["periodic"],
                     iterations=cfg["iterations"], shots=cfg["shots"], seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    results = run_vqe_batch(run, _seed_set(cfg), workers=workers)

    with open(os.path.join(out_dir, "trajectory.csv"), "w", encoding="utf-8") as fh:
        writer = _csv_writer(fh, TRAJECTORY_SCHEMA, ("seed", "step", "energy", "best_energy"))
        for res in results:
            for step, (e, b) in enumerate(zip(res.trajectory, res.best_trajectory)):
                writer.writerow([res.run.seed, step, "%.17g" % e, "%.17g" % b])
    _write_params_csv(os.path.join(out_dir, "params.csv"),
                      [(res.run.seed, res.params) for res in results])
    summary = {
        "ground_energy": results[0].ground_energy,
        "per_seed": [{"seed": res.run.seed, "final_energy": res.final_energy,
                      "error": res.error} for res in results],
        "mean_final_error": mean_final_error(results),
        "config_depth": depth, "config_t": t, "config_m": m,
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return ["trajectory.csv", "params.csv", "summary.json"]


def _run_transpile_count(cfg: dict, seed: int, out_dir: str, workers: int):
    from .routing import count_table, write_counts_csv

    bad = [f for f in cfg["families"] if f not in ("linear", "full")]
    if bad:
        raise ConfigError(f"unknown entangler families {bad}")
    rows = count_table(n_values=cfg["n_values"], m_labels=cfg["m_labels"],
                       l_labels=cfg["l_labels"], families=cfg["families"],
                       seed=seed, restarts=cfg["restarts"])
    write_counts_csv(rows, os.path.join(out_dir, "counts.csv"))
    return ["counts.csv"]


def _write_params_csv(path, seed_params) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        writer = _csv_writer(fh, PARAMS_SCHEMA, ("seed", "index", "value"))
        for seed, params in seed_params:
            for idx, value in enumerate(params):
                writer.writerow([seed, idx, "%.17g" % value])


_RUNNERS = {
    "bp-scan": _run_bp_scan,
    "haar-verify": _run_haar_verify,
    "gen-dataset": _run_gen_dataset,
    "train-classify": _run_train_classify,
    "vqe": _run_vqe,
    "transpile-count": _run_transpile_count,
}


# ---------------------------------------------------------------- dispatch

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print usage and exit 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="splitqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for command, table in FIELDS.items():
        p = sub.add_parser(command, add_help=True)
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./splitqc-out)")
        p.add_argument("--workers", type=int, default=0,
                       help="0 = all available cores")
        for key in table:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return parser


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            loaded = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"config {path} must be a mapping of keys to values")
    return loaded


def dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("missing subcommand; try `splitqc --help`")
        table = FIELDS[args.command]
        flag_values = {key: getattr(args, key) for key in table}
        config = resolve_config(args.command, _load_config_file(args.config), flag_values)
        out_dir = args.out or os.environ.get(OUT_ENV) or "./splitqc-out"
        workers = args.workers if args.workers > 0 else (os.cpu_count() or 1)
    except ConfigError as exc:
        json.dump({"error": str(exc), "kind": "config"}, sys.stderr)
        sys.stderr.write("\n")
        return CONFIG_EXIT
    try:
        os.makedirs(out_dir, exist_ok=True)
        outputs = _RUNNERS[args.command](config, args.seed, out_dir, workers)
        write_manifest(out_dir, args.command, config, args.seed, outputs)
        return 0
    except ConfigError as exc:
        json.dump({"error": str(exc), "kind": "config"}, sys.stderr)
        sys.stderr.write("\n")
        return CONFIG_EXIT
    except Exception as exc:  # noqa: BLE001 - boundary turns failures into exit codes
        json.dump({"error": f"{type(exc).__name__}: {exc}", "kind": "runtime"}, sys.stderr)
        sys.stderr.write("\n")
        return RUNTIME_EXIT


def main() -> None:
    sys.exit(dispatch())
