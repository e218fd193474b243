"""Command-line entry points for every pipeline stage.

Every subcommand is reproducible: identical flags and seed produce
bit-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import animation as anim
from . import data as df
from . import motion
from .models.seq2seq import Seq2Seq, Seq2SeqConfig, perplexity, seq2seq_train
from .models.training import TrainConfig, history_to_csv, token_accuracy, train_loop
from .models.transformer import ARTConfig, ARTransformer, SimpleConfig, SimpleTransformer
from .nn import load_checkpoint, save_checkpoint
from .pose import load_landmark_stream


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betaboard")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect static extremity points in a landmark stream")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--threshold", type=float, default=motion.DEFAULT_DIST_THRESHOLD)
    p.add_argument("--min-frames", type=int, default=motion.DEFAULT_MIN_STATIC_FRAMES)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("cluster", help="cluster static points into holds and extract moves")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--eps", type=float, default=motion.DEFAULT_EPS)
    p.add_argument("--min-pts", type=int, default=motion.DEFAULT_MIN_PTS)
    p.add_argument("--moves", default=None, help="also write the ordered move sequence CSV")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("animate", help="synthesize a skeleton clip from a move sequence")
    p.add_argument("--in", dest="infile", required=True, help="move sequence CSV")
    p.add_argument("--out", required=True, help="clip JSON path")
    p.add_argument("--frames-per-move", type=int, default=120)
    p.add_argument("--regressor", default=None, help="fitted body regressor JSON")
    p.add_argument("--fit-from", nargs="+", default=None, help="landmark CSVs to fit the regressor")
    p.add_argument("--save-regressor", default=None)
    p.add_argument("--fps", type=int, default=30)
    p.set_defaults(func=cmd_animate)

    p = sub.add_parser("render", help="render a clip to PNG frames")
    p.add_argument("--in", dest="infile", required=True, help="clip JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--width", type=int, default=440)
    p.add_argument("--height", type=int, default=720)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("dataset", help="build an augmented ordering dataset")
    p.add_argument("--in", dest="infile", nargs="+", required=True, help="holds sequence JSONs")
    p.add_argument("--out", required=True)
    p.add_argument("--n-perms", type=int, default=50)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--max-len", type=int, default=df.DEFAULT_MAX_LEN)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="train one of the three models")
    p.add_argument("--model", choices=["art", "simple", "seq2seq"], required=True)
    p.add_argument("--data", required=True, help="dataset JSON (art/simple) or pair corpus JSON (seq2seq)")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", default=None, help="metric history CSV path")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=None, help="model width override")
    p.add_argument("--hidden", type=int, default=512, help="seq2seq hidden size")
    p.add_argument("--heads", type=int, default=None)
    p.add_argument("--blocks", type=int, default=None)
    p.add_argument("--ignore-pads", action="store_true")
    p.add_argument("--teacher-forcing", type=float, default=1.0)
    p.add_argument("--eval-interval", type=int, default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict a hold usage order")
    p.add_argument("--model", choices=["art", "simple"], required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--holds", required=True, help="holds sequence JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset's validation split")
    p.add_argument("--model", choices=["art", "simple", "seq2seq"], required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", required=True)
    p.add_argument("--regressor", default=None)
    p.add_argument(
        "--ckpt",
        action="append",
        default=[],
        metavar="NAME=PATH",
        help="checkpoint to load; repeat for multiple models",
    )
    p.set_defaults(func=cmd_serve)

    return parser


def cmd_detect(args) -> int:
    path = Path(args.infile)
    fmt = args.format or ("json" if path.suffix == ".json" else "csv")
    frames = load_landmark_stream(path.read_bytes(), fmt)
    tracks = motion.extremity_tracks(frames)
    points = []
    for ext in motion.Extremity:
        points.extend(
            motion.detect_static_points(tracks[ext], args.threshold, args.min_frames)
        )
    Path(args.out).write_bytes(motion.static_points_to_json(points))
    print(f"detected {len(points)} static points from {len(frames)} frames -> {args.out}")
    return 0


def cmd_cluster(args) -> int:
    points = motion.static_points_from_json(Path(args.infile).read_bytes())
    holds, labels = motion.cluster_holds(points, eps=args.eps, min_pts=args.min_pts)
    Path(args.out).write_bytes(motion.holds_to_json(holds, labels))
    n_noise = sum(1 for lab in labels if lab == motion.NOISE)
    print(f"clustered {len(points)} points into {len(holds)} holds ({n_noise} noise) -> {args.out}")
    if args.moves:
        seq = motion.extract_move_sequence(points, holds, labels)
        Path(args.moves).write_bytes(motion.dump_move_csv(seq))
        print(f"extracted {len(seq)} moves -> {args.moves}")
    return 0


def cmd_animate(args) -> int:
    seq = motion.load_move_csv(Path(args.infile).read_bytes())
    if args.regressor:
        reg = anim.regressor_from_json(Path(args.regressor).read_bytes())
    elif args.fit_from:
        streams = []
        for stream_path in args.fit_from:
            p = Path(stream_path)
            fmt = "json" if p.suffix == ".json" else "csv"
            streams.append(load_landmark_stream(p.read_bytes(), fmt))
        reg = anim.fit_body_regressor(streams)
    else:
        raise ValueError("need --regressor or --fit-from to supply body landmarks")
    if args.save_regressor:
        Path(args.save_regressor).write_bytes(anim.regressor_to_json(reg))
    traj = anim.interpolate_extremities(seq, avg_frames_per_move=args.frames_per_move)
    clip = anim.synthesize_clip(traj, reg, fps=args.fps)
    Path(args.out).write_bytes(anim.clip_to_json(clip))
    print(f"synthesized clip of {clip.frames_total} frames -> {args.out}")
    return 0


def cmd_render(args) -> int:
    clip = anim.clip_from_json(Path(args.infile).read_bytes())
    paths = anim.render_frames(clip, args.out, width=args.width, height=args.height)
    print(f"rendered {len(paths)} frames -> {args.out}")
    return 0


def cmd_dataset(args) -> int:
    examples = []
    names = []
    for base_id, path in enumerate(args.infile):
        holds, order = df.holds_sequence_from_json(Path(path).read_bytes())
        if order is None:
            raise ValueError(f"{path}: holds sequence has no usage order; cannot train on it")
        examples.append(df.example_from_holds(holds, order, base_id=base_id))
        names.append(Path(path).name)
    augmented = df.permute_augment(examples, args.n_perms, seed=args.seed)
    train, val = df.split_train_val(augmented, args.val_frac, seed=args.seed)
    manifest = df.DatasetManifest(
        bases=tuple(names),
        seed=args.seed,
        n_perms=args.n_perms,
        max_len=args.max_len,
        pad_id=args.max_len,
    )
    Path(args.out).write_bytes(df.dataset_to_json(manifest, train, val))
    print(
        f"dataset: {len(examples)} bases x {args.n_perms} perms = {len(augmented)} examples "
        f"({len(train)} train / {len(val)} val) -> {args.out}"
    )
    return 0


def _load_dataset(path: str):
    return df.dataset_from_json(Path(path).read_bytes())


def cmd_train(args) -> int:
    if args.model == "seq2seq":
        return _train_seq2seq(args)
    manifest, train, val = _load_dataset(args.data)
    epochs = args.epochs if args.epochs is not None else 300
    cfg = TrainConfig(
        epochs=epochs,
        lr=args.lr,
        batch_size=args.batch_size,
        eval_interval=args.eval_interval,
        checkpoint_path=args.out,
        seed=args.seed,
        ignore_pads=args.ignore_pads,
    )
    if args.model == "art":
        mcfg = ARTConfig(
            max_len=manifest.max_len,
            d_model=args.width or 128,
            n_heads=args.heads or 4,
            n_blocks=args.blocks or 2,
            seed=args.seed,
        )
        model = ARTransformer(mcfg)
    else:
        mcfg = SimpleConfig(
            max_len=manifest.max_len,
            d_model=args.width or 128,
            n_heads=args.heads or 4,
            n_blocks=args.blocks or 1,
            seed=args.seed,
        )
        model = SimpleTransformer(mcfg)
    history = train_loop(model, train, val, cfg)
    if args.history:
        Path(args.history).write_bytes(history_to_csv(history))
    last = history[-1]
    print(
        f"trained {args.model} for {epochs} epochs: train_loss={last['train_loss']:.4f}"
        + (f" val_loss={last['val_loss']:.4f}" if "val_loss" in last else "")
    )
    return 0


def _train_seq2seq(args) -> int:
    corpus_payload = json.loads(Path(args.data).read_text())
    pairs = [(rec["holds_sentence"], rec["move_sentence"]) for rec in corpus_payload["pairs"]]
    in_words = [w for src, _ in pairs for w in src]
    out_words = [w for _, tgt in pairs for w in tgt]
    in_vocab = df.Vocab.from_words(in_words)
    out_vocab = df.Vocab.from_words(out_words)
    epochs = args.epochs if args.epochs is not None else 100
    model = Seq2Seq(Seq2SeqConfig(hidden=args.hidden, seed=args.seed), in_vocab, out_vocab)
    cfg = TrainConfig(
        epochs=epochs,
        lr=args.lr,
        teacher_forcing=args.teacher_forcing,
        eval_interval=args.eval_interval,
        seed=args.seed,
    )
    history = seq2seq_train(model, pairs, cfg)
    config = {
        "model": "seq2seq",
        "model_config": model.config_dict(),
        "train_config": {"epochs": epochs, "lr": args.lr, "seed": args.seed},
        "vocabs": {"input": list(in_vocab.id_to_word), "output": list(out_vocab.id_to_word)},
    }
    save_checkpoint(args.out, model.store, config)
    if args.history:
        Path(args.history).write_bytes(history_to_csv(history))
    print(f"trained seq2seq for {epochs} epochs: train_loss={history[-1]['train_loss']:.4f}")
    return 0


def _load_model(kind: str, ckpt_path: str):
    store, config = load_checkpoint(ckpt_path)
    if config["model"] != kind:
        raise ValueError(f"checkpoint holds a {config['model']!r} model, not {kind!r}")
    if kind == "art":
        model = ARTransformer.from_config(config["model_config"])
    elif kind == "simple":
        model = SimpleTransformer.from_config(config["model_config"])
    else:
        vocabs = config["vocabs"]
        model = Seq2Seq(
            Seq2SeqConfig(**config["model_config"]),
            df.Vocab(id_to_word=tuple(vocabs["input"])),
            df.Vocab(id_to_word=tuple(vocabs["output"])),
        )
    model.store = store
    return model, config


def cmd_predict(args) -> int:
    model, _ = _load_model(args.model, args.ckpt)
    holds, provided = df.holds_sequence_from_json(Path(args.holds).read_bytes())
    if args.model == "art":
        order = model.generate(holds)
    else:
        order = model.predict(holds)
    result: dict = {"order": order}
    if provided is not None:
        matches = sum(1 for a, b in zip(order, provided) if a == b)
        result["accuracy_vs_provided"] = matches / len(order)
    payload = json.dumps(result, indent=2).encode("utf-8")
    if args.out:
        Path(args.out).write_bytes(payload)
    print(payload.decode("utf-8"))
    return 0


def cmd_eval(args) -> int:
    if args.model == "seq2seq":
        model, _ = _load_model("seq2seq", args.ckpt)
        corpus_payload = json.loads(Path(args.data).read_text())
        pairs = [(rec["holds_sentence"], rec["move_sentence"]) for rec in corpus_payload["pairs"]]
        metrics = {"ppl": perplexity(model, pairs)}
    else:
        model, _ = _load_model(args.model, args.ckpt)
        _, _, val = _load_dataset(args.data)
        inputs, targets = model.collate(val)
        preds = model.predictions(inputs)
        acc = token_accuracy(preds, targets, model.cfg.pad_id)
        metrics = {
            "val_loss": model.loss_only(inputs, targets),
            "token_accuracy": acc.overall,
            "token_accuracy_non_pad": acc.non_pad,
            "pad_output_fraction": acc.pad_output_fraction,
            "permutation_accuracy_std": _permutation_accuracy_std(model, val, preds, targets),
        }
    payload = json.dumps(metrics, indent=2).encode("utf-8")
    if args.out:
        Path(args.out).write_bytes(payload)
    print(payload.decode("utf-8"))
    return 0


def _permutation_accuracy_std(model, val_examples, preds, targets) -> float:
    """Mean per-base spread of accuracy across permuted copies.

    Measures (not asserts) how robust predictions are to the presentation
    order of the same underlying sequence.
    """
    import numpy as np

    match = (preds == targets).mean(axis=1)
    per_base: dict[int, list[float]] = {}
    for row, ex in enumerate(val_examples):
        per_base.setdefault(ex.base_id, []).append(float(match[row]))
    spreads = [float(np.std(accs)) for accs in per_base.values() if len(accs) > 1]
    return float(np.mean(spreads)) if spreads else 0.0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    checkpoints = {}
    for spec_pair in args.ckpt:
        name, _, path = spec_pair.partition("=")
        if not path:
            raise ValueError(f"--ckpt expects name=path, got {spec_pair!r}")
        checkpoints[name] = path
    app = create_app(args.store, regressor_path=args.regressor, checkpoints=checkpoints)
    uvicorn.run(app, host="127.0.0.1", port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
