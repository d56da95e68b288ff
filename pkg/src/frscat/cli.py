"""Command-line interface.

Every subcommand accepts ``--config FILE``: a JSON object whose keys are the
subcommand's option names with dashes replaced by underscores (for example
``{"num_scales": 4, "seed": 3, "order_grid": [[1, 0.4], [1, 1]]}``).  Flags
given on the command line override config keys.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 data-shape error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path as FsPath

import numpy as np

from . import io
from .classifier import DEFAULT_PCA_DIMS, EvalProtocol, PcaClassModel, SplitError, evaluate, predict, train_models
from .features import (
    FeatureTensor,
    LabeledPatch,
    assemble_q,
    extract_patches,
    load_tensor,
    default_order_grid,
    save_tensor,
)
from .filterbank import FilterBankSpec, build_morlet_bank, littlewood_paley
from .grid import FractionalOrderPair
from .metrics import SCORE_COLUMNS, evaluate_masks, rank_aggregate
from .scattering import energy_report, scatter

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4

#: Built-in values for options left unset by both the flags and the config.
DEFAULTS = {
    "num_scales": 5,
    "num_angles": 8,
    "sigma_phi": 0.7,
    "sigma_psi": 0.5,
    "grid_width": None,
    "grid_height": None,
    "max_order": 2,
    "alpha1": 1.0,
    "alpha2": 1.0,
    "order_grid": "default",
    "window": 32,
    "stride": None,
    "overlap_threshold": 0.95,
    "normalize": True,
    "train_ratio": 0.5,
    "repetitions": 5,
    "pca_dims": list(DEFAULT_PCA_DIMS),
    "pca_dim": 10,
    "ties": "average",
    "ranked": False,
    "json": False,
    "count": 4,
    "size": 64,
    "threads": None,
}


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class InputError(Exception):
    pass


# ---------------------------------------------------------------- config


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = FsPath(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return cfg


def _resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Fill unset options from the config file, then from :data:`DEFAULTS`."""
    cfg = _load_config(args.config)
    known = {a.dest for a in parser._actions} - {"help", "config", "command", "handler"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s) for '{args.command}': {', '.join(unknown)}")
    for key in known:
        if getattr(args, key, None) in (None, []):
            if key in cfg:
                setattr(args, key, cfg[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    return args


def _bank_spec(args, shape=None) -> FilterBankSpec:
    h, w = shape if shape is not None else (64, 64)
    try:
        spec = FilterBankSpec(
            num_scales=int(args.num_scales),
            num_angles=int(args.num_angles),
            sigma_phi=float(args.sigma_phi),
            sigma_psi=float(args.sigma_psi),
            grid_width=int(args.grid_width or w),
            grid_height=int(args.grid_height or h),
            max_order=int(args.max_order),
        )
        spec.check_grid()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid filter bank: {exc}") from None
    return spec


def _orders(args) -> FractionalOrderPair:
    try:
        return FractionalOrderPair(float(args.alpha1), float(args.alpha2))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid fractional order: {exc}") from None


def _order_grid(value) -> list[FractionalOrderPair]:
    if value == "default":
        return default_order_grid()
    if isinstance(value, str):
        # "1,0.4;1,1" on the command line
        try:
            value = [tuple(float(v) for v in item.split(",")) for item in value.split(";") if item.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse order grid {value!r}; use 'default' or 'a1,a2;a1,a2'") from None
    try:
        grid = [FractionalOrderPair.coerce(o) for o in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid order grid: {exc}") from None
    if not grid:
        raise ConfigError("order grid is empty")
    return grid


def _int_list(value, name) -> list[int]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        out = [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of integers, got {value!r}") from None
    if not out or min(out) < 1:
        raise ConfigError(f"{name} must be nonempty positive integers, got {out}")
    return out


def _require_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("a seed is required (--seed or config key 'seed')")
    try:
        return int(args.seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {args.seed!r}") from None


def _read_image(path) -> np.ndarray:
    try:
        return io.read_pnm(path)
    except OSError as exc:
        raise InputError(f"cannot read image {path}: {exc.strerror or exc}") from None
    except io.FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _gray(img: np.ndarray) -> np.ndarray:
    img = img.astype(np.float64)
    return img.mean(axis=2) if img.ndim == 3 else img


def _out_dir(path) -> FsPath:
    if path is None:
        raise ConfigError("an output location is required (--out)")
    out = FsPath(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    return out


def _out_file(path) -> FsPath:
    if path is None:
        raise ConfigError("an output location is required (--out)")
    out = FsPath(path)
    if out.parent != FsPath(""):
        _out_dir(out.parent)
    return out


def _write_json(path, obj) -> None:
    FsPath(path).write_text(json.dumps(obj, indent=2) + "\n")


def _load_tensor(path) -> FeatureTensor:
    try:
        return load_tensor(path)
    except OSError as exc:
        raise InputError(f"cannot read tensor {path}: {exc.strerror or exc}") from None
    except io.FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_filterbank(args) -> int:
    spec = _bank_spec(args)
    bank = build_morlet_bank(spec)
    report = littlewood_paley(bank)
    payload = {"spec": spec.to_dict(), "scale_factor": bank.scale_factor, **report.to_dict()}
    if args.out is not None:
        out = _out_dir(args.out)
        _write_json(out / "lp_report.json", payload)
        # centered magnitude responses, one image per filter
        io.write_pgm(out / "phi.pgm", io.scale_to_u8(np.fft.fftshift(np.abs(bank.phi_hat)))[0])
        for j in range(bank.num_scales):
            for k in range(bank.num_angles):
                img = io.scale_to_u8(np.fft.fftshift(np.abs(bank.psi_hat[j, k])))[0]
                io.write_pgm(out / f"psi_j{j}_k{k}.pgm", img)
    if args.json:
        print(json.dumps(payload))
    else:
        print(
            f"LP sum in [{report.min_sum:.6f}, {report.max_sum:.6f}], epsilon = {report.epsilon:.6f}"
        )
    return EXIT_OK


def cmd_scatter(args) -> int:
    orders = _orders(args)
    x = _gray(_read_image(args.image))
    spec = _bank_spec(args, x.shape)
    if spec.shape != x.shape:
        raise DataError(f"image {x.shape[1]}x{x.shape[0]} does not match bank grid {spec.grid_width}x{spec.grid_height}")
    out = _out_dir(args.out)
    bank = build_morlet_bank(spec)
    result = scatter(x, bank, orders)
    ranges = {}
    for path, coef in zip(result.paths, result.values):
        img, lo, hi = io.scale_to_u8(coef)
        io.write_pgm(out / f"{path}.pgm", img)
        ranges[str(path)] = [lo, hi]
    _write_json(out / "ranges.json", ranges)
    norm_sq = float(np.sum(x * x))
    report = energy_report(result, norm_sq)
    ledger = {
        "orders": [orders.alpha1, orders.alpha2],
        "input_energy": norm_sq,
        "per_order": [{"order": m, "s_energy": s, "u_energy": u} for m, (s, u) in enumerate(result.energy_ledger)],
        "residual_energy": result.residual_energy,
        "report": [{"order": r.order, "captured": r.captured, "residual": r.residual} for r in report],
    }
    _write_json(out / "ledger.json", ledger)
    print(f"wrote {len(result.paths)} coefficient images to {out}")
    return EXIT_OK


def _parse_inputs(items) -> list[tuple[str, int, str | None]]:
    entries = []
    for item in items:
        path, sep, label = str(item).rpartition(":")
        if not sep:
            raise ConfigError(f"input {item!r} must be IMAGE:LABEL")
        try:
            entries.append((path, int(label), None))
        except ValueError:
            raise ConfigError(f"label of {item!r} must be an integer") from None
    return entries


def _manifest_inputs(path) -> list[tuple[str, int, str | None]]:
    manifest = _load_config(path)
    base = FsPath(path).parent
    try:
        return [
            (str(base / e["image"]), int(e.get("label", 0)), str(base / e["mask"]) if e.get("mask") else None)
            for e in manifest["images"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"manifest {path}: each entry needs 'image' and 'label' ({exc})") from None


def cmd_features(args) -> int:
    entries = _parse_inputs(args.inputs or [])
    if args.manifest:
        entries += _manifest_inputs(args.manifest)
    if not entries:
        raise ConfigError("no inputs: give IMAGE:LABEL arguments or --manifest")
    grid = _order_grid(args.order_grid)
    patches = []
    patch_mode = any(mask for _, _, mask in entries)
    for i, (image_path, label, mask_path) in enumerate(entries):
        img = _read_image(image_path)
        if patch_mode:
            if mask_path is None:
                raise ConfigError(f"{image_path}: every entry needs a mask once any entry has one")
            try:
                mask = io.read_mask(mask_path)
            except OSError as exc:
                raise InputError(f"cannot read mask {mask_path}: {exc.strerror or exc}") from None
            except io.FormatError as exc:
                raise InputError(f"{mask_path}: {exc}") from None
            try:
                patches += extract_patches(
                    img, mask, int(args.window), float(args.overlap_threshold),
                    None if args.stride is None else int(args.stride), image_id=i,
                )
            except ValueError as exc:
                raise DataError(f"{image_path}: {exc}") from None
        else:
            px = img.astype(np.float64)
            px = px.transpose(2, 0, 1) if px.ndim == 3 else px[None]
            patches.append(LabeledPatch(px, label, (i, 0, 0)))
    if not patches:
        raise DataError("no patches passed the overlap threshold")
    shape = patches[0].shape
    bank = build_morlet_bank(_bank_spec(args, (64, 64) if patch_mode else shape))
    try:
        tensor = assemble_q(
            patches, bank, grid, normalize=bool(args.normalize),
            threads=None if args.threads is None else int(args.threads),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = _out_file(args.out)
    save_tensor(tensor, out)
    if args.csv:
        tensor.to_csv(_out_file(args.csv))
    print(f"tensor L={tensor.L} N={tensor.N} D={tensor.D} -> {out}")
    return EXIT_OK


def _order_index(tensor: FeatureTensor, orders: FractionalOrderPair) -> int:
    for d, o in enumerate(tensor.order_grid):
        if o == orders:
            return d
    raise DataError(f"order {orders} is not in the tensor's order grid {[str(o) for o in tensor.order_grid]}")


def cmd_train(args) -> int:
    tensor = _load_tensor(args.tensor)
    orders = _orders(args)
    d = _order_index(tensor, orders)
    dim = int(args.pca_dim)
    if dim < 1:
        raise ConfigError(f"pca_dim must be >= 1, got {dim}")
    try:
        models = train_models(tensor.order_slice(d), tensor.labels, dim)
    except SplitError as exc:
        raise DataError(str(exc)) from None
    out = _out_file(args.out)
    out.write_bytes(io.pack_models(models, (orders.alpha1, orders.alpha2)))
    print(f"{len(models)} class models at {orders}, d <= {dim} -> {out}")
    return EXIT_OK


def cmd_classify(args) -> int:
    tensor = _load_tensor(args.tensor)
    try:
        (a1, a2), raw = io.unpack_models(FsPath(args.models).read_bytes())
    except OSError as exc:
        raise InputError(f"cannot read models {args.models}: {exc.strerror or exc}") from None
    except io.FormatError as exc:
        raise InputError(f"{args.models}: {exc}") from None
    models = [PcaClassModel(c, mean, basis) for c, mean, basis in raw]
    d = _order_index(tensor, FractionalOrderPair(a1, a2))
    X = tensor.order_slice(d)
    if X.shape[1] != models[0].L:
        raise DataError(f"tensor has L={X.shape[1]} features, models expect {models[0].L}")
    pred, errs = predict(X, models)
    ids = sorted(m.class_id for m in models)
    out = _out_file(args.out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "label", "predicted", *[f"error_class{c}" for c in ids]])
        for n in range(tensor.N):
            w.writerow([n, int(tensor.labels[n]), int(pred[n]), *[repr(float(e)) for e in errs[n]]])
    print(f"error rate {float(np.mean(pred != tensor.labels)):.4f} on {tensor.N} samples -> {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    tensor = _load_tensor(args.tensor)
    seed = _require_seed(args)
    try:
        protocol = EvalProtocol(
            float(args.train_ratio), int(args.repetitions), tuple(_int_list(args.pca_dims, "pca_dims")), seed
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        table = evaluate(tensor, protocol)
    except SplitError as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = _out_file(args.out)
    table.to_csv(out)
    best = int(np.argmin(table.best_per_order))
    print(f"lowest error {table.best_per_order[best]:.4f} at {table.order_grid[best]} -> {out}")
    return EXIT_OK


def cmd_evaluate_masks(args) -> int:
    masks = []
    for path in (args.seg, args.gt):
        try:
            masks.append(io.read_mask(path))
        except OSError as exc:
            raise InputError(f"cannot read mask {path}: {exc.strerror or exc}") from None
        except io.FormatError as exc:
            raise InputError(f"{path}: {exc}") from None
    try:
        scores = evaluate_masks(*masks)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    text = json.dumps(scores, indent=2)
    if args.out:
        _out_file(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_rank(args) -> int:
    try:
        with open(args.scores, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise InputError(f"cannot read scores {args.scores}: {exc.strerror or exc}") from None
    needed = ("method", *SCORE_COLUMNS)
    if not rows or any(c not in rows[0] for c in needed):
        raise DataError(f"{args.scores}: need a header with columns {', '.join(needed)}")
    try:
        items = [(r["method"], [float(r[c]) for c in SCORE_COLUMNS]) for r in rows]
        result = rank_aggregate(items, ties=str(args.ties), ranked=bool(args.ranked))
    except (TypeError, ValueError) as exc:
        raise DataError(f"{args.scores}: {exc}") from None
    out = _out_file(args.out) if args.out else None
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", *[f"rank_{c}" for c in SCORE_COLUMNS], "rs", "wrs"])
        for row in result:
            w.writerow([row.method, *[f"{v:g}" for v in row.ranks], f"{row.rank_sum:g}", f"{row.weighted_rank_sum:g}"])
    finally:
        if out:
            fh.close()
    return EXIT_OK


def cmd_make_fixtures(args) -> int:
    from .synthetic import make_fixture_set

    seed = _require_seed(args)
    out = _out_dir(args.out)
    entries = make_fixture_set(out, seed=seed, count=int(args.count), size=int(args.size))
    print(f"wrote {len(entries)} images and manifest.json to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_bank_options(p):
    g = p.add_argument_group("filter bank")
    g.add_argument("--num-scales", type=int, help="number of scales S (default 5)")
    g.add_argument("--num-angles", type=int, help="number of orientations K (default 8)")
    g.add_argument("--sigma-phi", type=float, help="low-pass width factor (default 0.7)")
    g.add_argument("--sigma-psi", type=float, help="band-pass width factor (default 0.5)")
    g.add_argument("--grid-width", type=int, help="bank grid width (default: input width, or 64)")
    g.add_argument("--grid-height", type=int, help="bank grid height (default: input height, or 64)")
    g.add_argument("--max-order", type=int, help="scattering order (default 2)")


def _add_orders(p):
    p.add_argument("--alpha1", type=float, help="fractional order along the width axis (default 1)")
    p.add_argument("--alpha2", type=float, help="fractional order along the height axis (default 1)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; command-line flags override it")

    parser = argparse.ArgumentParser(prog="frscat", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("filterbank", parents=[common], help="build the filter bank and check its frame bounds")
    _add_bank_options(p)
    p.add_argument("--out", help="directory for lp_report.json and filter images")
    p.add_argument("--json", action="store_const", const=True, help="print the report as JSON")
    p.set_defaults(handler=cmd_filterbank)

    p = sub.add_parser("scatter", parents=[common], help="scatter one image at one order pair")
    p.add_argument("image", nargs="?", help="PGM/PPM input (PPM channels are averaged)")
    _add_bank_options(p)
    _add_orders(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(handler=cmd_scatter)

    p = sub.add_parser("features", parents=[common], help="assemble the feature tensor")
    p.add_argument("inputs", nargs="*", help="IMAGE:LABEL pairs")
    p.add_argument("--manifest", help="JSON manifest with images, labels and optional masks")
    _add_bank_options(p)
    p.add_argument("--order-grid", help="'default' (the 18-setting grid) or 'a1,a2;a1,a2;...'")
    p.add_argument("--window", type=int, help="patch size with masks (default 32)")
    p.add_argument("--stride", type=int, help="patch center spacing (default window/2)")
    p.add_argument("--overlap-threshold", type=float, help="foreground fraction for a target patch (default 0.95)")
    p.add_argument("--no-normalize", dest="normalize", action="store_const", const=False,
                   help="skip per-patch zero-mean unit-norm normalization")
    p.add_argument("--threads", type=int, help="worker threads (default FRSC_THREADS or all cores)")
    p.add_argument("--csv", help="also write the tensor as CSV")
    p.add_argument("--out", help="output FRSC file")
    p.set_defaults(handler=cmd_features)

    p = sub.add_parser("train", parents=[common], help="fit PCA class models at one order pair")
    p.add_argument("tensor", nargs="?", help="FRSC tensor")
    _add_orders(p)
    p.add_argument("--pca-dim", type=int, help="subspace dimension (default 10)")
    p.add_argument("--out", help="output FRSM file")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("classify", parents=[common], help="classify tensor samples with trained models")
    p.add_argument("tensor", nargs="?", help="FRSC tensor")
    p.add_argument("--models", help="FRSM model file")
    p.add_argument("--out", help="output CSV of predictions")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("evaluate", parents=[common], help="error rates over orders and PCA dimensions")
    p.add_argument("tensor", nargs="?", help="FRSC tensor")
    p.add_argument("--seed", type=int, help="split seed (required)")
    p.add_argument("--train-ratio", type=float, help="training share per class (default 0.5)")
    p.add_argument("--repetitions", type=int, help="random splits (default 5)")
    p.add_argument("--pca-dims", help="comma-separated dimensions (default 10,15,...,80)")
    p.add_argument("--out", help="output CSV")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("evaluate-masks", parents=[common], help="F1, object Dice and Hausdorff of two instance masks")
    p.add_argument("seg", nargs="?", help="segmented instance mask (16-bit PGM)")
    p.add_argument("gt", nargs="?", help="ground-truth instance mask (16-bit PGM)")
    p.add_argument("--out", help="also write the scores as JSON")
    p.set_defaults(handler=cmd_evaluate_masks)

    p = sub.add_parser("rank", parents=[common], help="rank sums from a CSV of per-method scores")
    p.add_argument("scores", nargs="?", help=f"CSV with columns method,{','.join(SCORE_COLUMNS)}")
    p.add_argument("--ranked", action="store_const", const=True, help="columns already hold ranks")
    p.add_argument("--ties", choices=["average", "min", "max", "dense", "ordinal"], help="tie rule (default average)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(handler=cmd_rank)

    p = sub.add_parser("make-fixtures", parents=[common], help="write the synthetic texture fixture set")
    p.add_argument("--seed", type=int, help="texture seed (required)")
    p.add_argument("--count", type=int, help="images per class (default 4)")
    p.add_argument("--size", type=int, help="image side (default 64)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(handler=cmd_make_fixtures)
    return parser


_REQUIRED = {
    "scatter": ("image",),
    "train": ("tensor",),
    "classify": ("tensor", "models"),
    "evaluate": ("tensor",),
    "evaluate-masks": ("seg", "gt"),
    "rank": ("scores",),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        _resolve(args, subparser)
        missing = [k for k in _REQUIRED.get(args.command, ()) if not getattr(args, k, None)]
        if missing:
            raise ConfigError(f"missing required input(s): {', '.join(missing)}")
        return args.handler(args)
    except ConfigError as exc:
        print(f"frscat {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"frscat {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"frscat {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DataError as exc:
        print(f"frscat {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
