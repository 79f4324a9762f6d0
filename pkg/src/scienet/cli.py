"""Command-line pipeline: learn, extract, perturb, train-clf, evaluate, distance.

Every subcommand loads the packaged default config, overlays ``--config``
and then the flags.  Artifacts carry the effective config hash and seed so
any two outputs of one run can be matched up.

Exit codes: 0 success, 1 usage/config error, 2 data/format error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import classify, context, dataio, perturb
from .config import load_config, override
from .errors import NumericError, ScieNetError
from .network import SnnModel
from .plasticity import epoch_log_csv, train_unsupervised

log = logging.getLogger("scienet")


class UsageError(ScieNetError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# -- helpers --------------------------------------------------------------

def _parse_set(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        out[key.strip()] = yaml.safe_load(raw)
    return out


def _config(args, extra=None):
    cfg = load_config(args.config)
    dotted = _parse_set(args.set)
    dotted.update({"seed": args.seed, "workers": args.workers})
    dotted.update(extra or {})
    return override(cfg, dotted)


def _stamp(cfg) -> dict:
    return {"config_hash": cfg.digest(), "seed": int(cfg.seed)}


def _comment(cfg) -> str:
    return f"# scienet config_hash={cfg.digest()} seed={cfg.seed}\n"


def _load_images(path, split, limit):
    data = dataio.load_cifar10(path, split)
    return data.head(limit)


def _chunks(n, workers):
    return [c for c in np.array_split(np.arange(n), max(1, workers)) if c.size]


def _map_rows(fn, args_list, workers):
    """Apply ``fn`` to each argument tuple, in a process pool if workers > 1.

    Results come back in submission order, so output never depends on the
    worker count.
    """
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *a) for a in args_list]
        return [f.result() for f in futures]


def _extract_rows(model, images, w, k):
    return context.extract_batch(model, images, w, k), context.score_batch(model, images)


def _perturb_rows(spec, images, seed, ids):
    return spec.apply_batch(images, seed, ids=ids)


def _templates(model, images, w, k, workers):
    parts = _map_rows(
        _extract_rows, [(model, images[c], w, k) for c in _chunks(len(images), workers)], workers
    )
    if not parts:
        return np.zeros((0, images.shape[1])), np.zeros((0, model.d))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _apply(spec, images, seed, ids, workers):
    parts = _map_rows(
        _perturb_rows, [(spec, images[c], seed, ids[c]) for c in _chunks(len(images), workers)], workers
    )
    return np.concatenate(parts) if parts else images.copy()


def _spec_from_args(kind, snr, rain, cfg_overrides=None):
    if kind == "awgn":
        if snr is None:
            raise UsageError("--snr is required for --kind awgn")
        return perturb.PerturbationSpec("awgn", snr_db=float(snr))
    if kind == "rain":
        return perturb.PerturbationSpec("rain", rain=rain, rain_overrides=dict(cfg_overrides or {}))
    return perturb.PerturbationSpec("none")


# -- subcommands ----------------------------------------------------------

def cmd_learn(args):
    cfg = _config(args, {"snn.d": args.neurons, "snn.epochs": args.epochs, "train_images": args.limit})
    data = _load_images(args.data, "train", cfg.train_images)
    model = SnnModel.initialize(
        cfg.snn.d, data.images.shape[1], seed=cfg.seed,
        lif=cfg.lif, inhibition=cfg.inhibition, stdp=cfg.stdp, encoder=cfg.encoder,
        init_low=cfg.snn.init_low, init_high=cfg.snn.init_high,
        homeostasis=cfg.homeostasis,
        meta={**_stamp(cfg), "train_images": len(data)},
    )
    model, stats = train_unsupervised(model, data.images, cfg.snn.epochs, seed=cfg.seed)
    dataio.save_snn_model(args.out, model)
    if args.log:
        Path(args.log).write_text(_comment(cfg) + epoch_log_csv(stats))
    log.info("wrote %s (%d x %d)", args.out, model.d, model.n)
    return 0


def cmd_extract(args):
    cfg = _config(args, {"context.w": args.w, "context.k": args.k, "test_images": args.limit})
    model = dataio.load_snn_model(args.model)
    data = _load_images(args.data, args.split, cfg.test_images)
    values, scores = _templates(model, data.images, cfg.context.w, cfg.context.k, cfg.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(_comment(cfg))
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["image_id", "label", "file", "source_neurons"])
    for i in range(len(data)):
        src = context.top_k_select(scores[i], cfg.context.k)
        name = f"template_{int(data.ids[i]):06d}.tensor"
        meta = {
            **_stamp(cfg),
            "image_id": int(data.ids[i]),
            "label": int(data.labels[i]),
            "source_neurons": [int(j) for j in src],
            "w": cfg.context.w,
            "k": cfg.context.k,
        }
        dataio.save_tensor(out / name, values[i], tag="template", meta=meta)
        wr.writerow([int(data.ids[i]), int(data.labels[i]), name, " ".join(str(int(j)) for j in src)])
    (out / "manifest.csv").write_text(buf.getvalue())
    log.info("wrote %d templates to %s", len(data), out)
    return 0


def cmd_perturb(args):
    cfg = _config(args)
    data = dataio.load_cifar10(args.input)
    spec = _spec_from_args(args.kind, args.snr, args.rain, cfg.rain.get(args.rain))
    out = _apply(spec, data.images, cfg.seed, data.ids, cfg.workers)
    dataio.write_cifar10(args.output, out, data.labels)
    side = {**_stamp(cfg), "perturbation": spec.label, "images": len(data)}
    Path(str(args.output) + ".json").write_text(json.dumps(side, sort_keys=True, indent=1) + "\n")
    return 0


def _read_manifest(path):
    path = Path(path)
    manifest = path / "manifest.csv" if path.is_dir() else path
    lines = [ln for ln in manifest.read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    xs, ys = [], []
    for r in rows:
        arr, _ = dataio.load_tensor(manifest.parent / r["file"], expect_tag="template")
        xs.append(arr.astype(np.float64))
        ys.append(int(r["label"]))
    if not xs:
        raise dataio.FormatError(f"manifest {manifest} lists no templates", offset=0)
    return np.stack(xs), np.asarray(ys)


def cmd_train_clf(args):
    cfg = _config(args, {"mlp.epochs": args.epochs, "train_images": args.limit,
                         "context.w": args.w, "context.k": args.k})
    if args.templates:
        x, y = _read_manifest(args.templates)
        source = "templates"
    else:
        if not args.data:
            raise UsageError("train-clf needs --data or --templates")
        data = _load_images(args.data, "train", cfg.train_images)
        x, y = data.images, data.labels
        source = "raw"
        if args.snn:
            model = dataio.load_snn_model(args.snn)
            x, _ = _templates(model, x, cfg.context.w, cfg.context.k, cfg.workers)
            source = "snn"
    # hold out the tail of the training data, at most a fifth of it
    nv = min(cfg.mlp.validation_size, len(y) // 5)
    split = len(y) - nv
    mlp, logs = classify.train_classifier(
        x[:split], y[:split], cfg.mlp, seed=cfg.seed, x_val=x[split:], y_val=y[split:]
    )
    mlp.meta.update(_stamp(cfg))
    mlp.meta["input"] = source
    if source == "snn":
        mlp.meta["snn_config_hash"] = model.meta.get("config_hash")
    classify.save_mlp(args.out, mlp)
    if args.log:
        Path(args.log).write_text(_comment(cfg) + classify.training_log_csv(logs))
    return 0


def cmd_evaluate(args):
    cfg = _config(args, {"test_images": args.limit, "context.w": args.w, "context.k": args.k})
    mlp = classify.load_mlp(args.clf)
    data = _load_images(args.data, args.split, cfg.test_images)
    snn = dataio.load_snn_model(args.snn) if args.snn else None
    snrs = cfg.snr_levels if args.snr is None else args.snr
    specs = [perturb.PerturbationSpec("none")]
    specs += [perturb.PerturbationSpec("awgn", snr_db=float(s)) for s in snrs]
    specs += [perturb.PerturbationSpec("rain", rain=r, rain_overrides=dict(cfg.rain.get(r, {})))
              for r in args.rain]
    n_classes = mlp.n_classes
    buf = io.StringIO()
    buf.write(_comment(cfg))
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["condition", "level", "accuracy", "n"] + [f"class_{c}" for c in range(n_classes)])
    for spec in specs:
        x = data.images if spec.kind == "none" else _apply(spec, data.images, cfg.seed, data.ids, cfg.workers)
        if snn is not None:
            x, _ = _templates(snn, x, cfg.context.w, cfg.context.k, cfg.workers)
        res = classify.evaluate(mlp, x, data.labels, n_classes=n_classes)
        level = {"none": "", "awgn": f"{spec.snr_db:g}", "rain": spec.rain}[spec.kind]
        cond = {"none": "clean", "awgn": "awgn", "rain": "rain"}[spec.kind]
        wr.writerow([cond, level, f"{res.accuracy:.6f}", len(data)]
                    + ["" if np.isnan(a) else f"{a:.6f}" for a in res.per_class])
        log.info("%s %s: %.4f", cond, level, res.accuracy)
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def distance_table(model, images, ids, levels, k, seed, workers=1):
    """Per-image clean-vs-noisy context distances, one row per (image, level)."""
    rows = []
    clean = np.stack([context.context_vector(model, x, k) for x in images]) if len(images) else None
    for snr in levels:
        noisy = _apply(perturb.PerturbationSpec("awgn", snr_db=float(snr)), images, seed, ids, workers)
        for i in range(len(images)):
            cn = context.context_vector(model, noisy[i], k)
            rows.append((int(ids[i]), float(snr), float(np.sqrt(np.sum((clean[i] - cn) ** 2)))))
    return rows


def summarize_distances(rows):
    levels = sorted({r[1] for r in rows}, reverse=True)
    out = []
    for lv in levels:
        ds = np.array([r[2] for r in rows if r[1] == lv])
        out.append((lv, float(ds.mean()), float(ds.std()), ds.size))
    return out


def cmd_distance(args):
    cfg = _config(args, {"test_images": args.limit, "context.k": args.k})
    model = dataio.load_snn_model(args.model)
    data = _load_images(args.data, args.split, cfg.test_images)
    levels = cfg.snr_levels if args.snr is None else args.snr
    rows = distance_table(model, data.images, data.ids, levels, cfg.context.k, cfg.seed, cfg.workers)
    buf = io.StringIO()
    buf.write(_comment(cfg))
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["image_id", "snr_db", "distance"])
    for r in rows:
        wr.writerow([r[0], f"{r[1]:g}", f"{r[2]:.8f}"])
    Path(args.out).write_text(buf.getvalue())
    sb = io.StringIO()
    sb.write(_comment(cfg))
    ws = csv.writer(sb, lineterminator="\n")
    ws.writerow(["snr_db", "mean", "std", "n"])
    for lv, mean, std, n in summarize_distances(rows):
        ws.writerow([f"{lv:g}", f"{mean:.8f}", f"{std:.8f}", n])
    summary = Path(args.summary) if args.summary else Path(args.out).with_name(Path(args.out).stem + "_summary.csv")
    summary.write_text(sb.getvalue())
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML config overlaid on the packaged defaults")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="dotted config override, e.g. stdp.alpha_p=0.02 (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, help="processes for per-image work")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="scienet", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("learn", parents=[common], help="unsupervised STDP learning")
    s.add_argument("--data", required=True, help="CIFAR-10 binary directory or batch file")
    s.add_argument("--out", required=True, help="model file to write")
    s.add_argument("--log", help="per-epoch CSV log")
    s.add_argument("--neurons", type=int, help="number of spiking neurons d")
    s.add_argument("--epochs", type=int)
    s.add_argument("--limit", type=int, help="use only the first N training images")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("extract", parents=[common], help="write context templates")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--split", default="test", choices=["train", "test"])
    s.add_argument("--out-dir", required=True)
    s.add_argument("--w", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--limit", type=int)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("perturb", parents=[common], help="corrupt a CIFAR-10 batch file")
    s.add_argument("--kind", required=True, choices=["awgn", "rain", "none"])
    s.add_argument("--snr", type=float, help="target SNR in dB (awgn)")
    s.add_argument("--rain", default="light", choices=sorted(perturb.RAIN_PRESETS))
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("train-clf", parents=[common], help="train the MLP classifier")
    s.add_argument("--data", help="CIFAR-10 training data (raw or via --snn)")
    s.add_argument("--snn", help="SNN model; train on its templates instead of raw images")
    s.add_argument("--templates", help="extract output directory or manifest")
    s.add_argument("--out", required=True)
    s.add_argument("--log", help="per-epoch CSV log")
    s.add_argument("--epochs", type=int)
    s.add_argument("--w", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--limit", type=int)
    s.set_defaults(func=cmd_train_clf)

    s = sub.add_parser("evaluate", parents=[common], help="accuracy under perturbations")
    s.add_argument("--clf", required=True, help="MLP model file")
    s.add_argument("--snn", help="SNN model; evaluate the template pipeline")
    s.add_argument("--data", required=True)
    s.add_argument("--split", default="test", choices=["train", "test"])
    s.add_argument("--snr", type=float, nargs="*", help="AWGN levels (default: config snr_levels)")
    s.add_argument("--rain", nargs="*", default=["light", "heavy"], choices=sorted(perturb.RAIN_PRESETS))
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.add_argument("--w", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--limit", type=int)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("distance", parents=[common], help="clean-vs-noisy context distances")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--split", default="test", choices=["train", "test"])
    s.add_argument("--snr", type=float, nargs="*")
    s.add_argument("--k", type=int)
    s.add_argument("--limit", type=int)
    s.add_argument("--out", required=True, help="per-image CSV")
    s.add_argument("--summary", help="per-level CSV (default: <out>_summary.csv)")
    s.set_defaults(func=cmd_distance)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ScieNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        # ValueError subclasses from the library carry their own code
        code = getattr(exc, "exit_code", 2)
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (ArithmeticError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
