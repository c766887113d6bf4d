"""Operator entry points.

Subcommands: train, eval, serve, inspect, edit. Results go to stdout as
JSON; progress and warnings go to stderr. Exit codes: 0 success, 1
runtime/data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path


from . import audio_io, edits, introspect, training
from .dataset import TrainConfig, scan_dataset
from .errors import AudioscopeError
from .nn import load_checkpoint_file
from .server import create_server

log = logging.getLogger("audioscope")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _port(text: str) -> int:
    value = int(text)
    if not 0 <= value <= 65535:
        raise argparse.ArgumentTypeError(f"port {value} out of range")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audioscope",
        description="Spoken-digit CNN trainer and debugger.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model on a dataset dir")
    p_train.add_argument("--data", required=True, help="dataset root "
                         "(<root>/<class>/*.wav)")
    p_train.add_argument("--out", required=True, help="checkpoint path")
    p_train.add_argument("--epochs", type=_positive_int, default=10)
    p_train.add_argument("--batch", type=_positive_int, default=32)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--val-frac", type=float, default=0.1)

    p_eval = sub.add_parser("eval", help="accuracy + confusion matrix")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--split", choices=["val", "train", "all"],
                        default="val")
    p_eval.add_argument("--val-frac", type=float, default=0.1)

    p_serve = sub.add_parser("serve", help="run the HTTP API / UI server")
    p_serve.add_argument("--checkpoint",
                         default=os.environ.get("AUDIOSCOPE_CHECKPOINT"))
    p_serve.add_argument("--port", type=_port,
                         default=int(os.environ.get("AUDIOSCOPE_PORT", 8722)))
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static-dir",
                         default=os.environ.get("AUDIOSCOPE_STATIC_DIR"))

    p_inspect = sub.add_parser(
        "inspect", help="batch-export feature maps, feature audio, "
        "weight histograms, and the prediction for one clip")
    p_inspect.add_argument("--checkpoint", required=True)
    p_inspect.add_argument("--wav", required=True)
    p_inspect.add_argument("--out", required=True, help="output directory")

    p_edit = sub.add_parser("edit", help="apply an edit-op pipeline to a WAV")
    p_edit.add_argument("--wav", required=True)
    p_edit.add_argument("--ops", required=True,
                        help='JSON list, e.g. \'[{"kind":"repeat",'
                        '"params":{"count":2}}]\'')
    p_edit.add_argument("--out", required=True)
    return parser


def cmd_train(args) -> int:
    config = TrainConfig(
        dataset_root=Path(args.data),
        checkpoint_path=Path(args.out),
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        val_fraction=args.val_frac,
    )
    result = training.train(config)
    report = result.report()
    report_path = Path(str(args.out) + ".report.json")
    report_path.write_text(json.dumps(report, indent=2))
    log.info("checkpoint written to %s, report to %s", args.out, report_path)
    print(json.dumps(report))
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint_file(args.checkpoint)
    examples = scan_dataset(args.data, val_fraction=args.val_frac)
    if args.split != "all":
        examples = [e for e in examples if e.split == args.split]
    accuracy, confusion = training.evaluate(model, examples)
    print(json.dumps({
        "accuracy": round(accuracy, 6),
        "examples": int(confusion.sum()),
        "class_labels": list(model.class_labels),
        "confusion": confusion.tolist(),
    }))
    return 0


def cmd_serve(args) -> int:
    model = None
    if args.checkpoint:
        model = load_checkpoint_file(args.checkpoint)
        log.info("loaded checkpoint %s", args.checkpoint)
    else:
        log.warning("no --checkpoint given; API will answer 503")
    server = create_server(model, port=args.port, host=args.host,
                           static_dir=args.static_dir)
    log.info("listening on http://%s:%d/", args.host,
             server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        log.info("shutting down")
    finally:
        server.server_close()
    return 0


def cmd_inspect(args) -> int:
    model = load_checkpoint_file(args.checkpoint)
    clip = audio_io.load_wav(Path(args.wav).read_bytes())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    acts = introspect.activations(model, clip)
    for la in acts.layers:
        layer_dir = out_dir / f"layer{la.layer_index}"
        layer_dir.mkdir(exist_ok=True)
        for f in range(la.filter_count):
            png = introspect.feature_map_to_image(la.maps[f])
            (layer_dir / f"filter{f:02d}.png").write_bytes(png)
            audio = introspect.feature_to_audio(la.maps[f],
                                                acts.input_spectrogram)
            audio = audio_io.fit_to_duration(audio, audio_io.CANONICAL_SECONDS)
            (layer_dir / f"filter{f:02d}.wav").write_bytes(
                audio_io.write_wav(audio))

    for i, layer in enumerate(model.layers):
        if not layer.params():
            continue
        hist = introspect.weight_histogram(model, i)
        lines = ["bin_lo,bin_hi,count"]
        lines += [f"{hist.bin_edges[j]:.6g},{hist.bin_edges[j + 1]:.6g},"
                  f"{int(hist.counts[j])}" for j in range(len(hist.counts))]
        (out_dir / f"hist_layer{i:02d}_{layer.kind}.csv").write_text(
            "\n".join(lines) + "\n")

    prediction = {
        "label": acts.predicted_label,
        "probs": [float(x) for x in introspect._sig6(acts.probs)],
        "class_labels": list(model.class_labels),
    }
    (out_dir / "prediction.json").write_text(json.dumps(prediction, indent=2))
    print(json.dumps(prediction))
    return 0


def cmd_edit(args) -> int:
    try:
        ops_json = json.loads(args.ops)
        if not isinstance(ops_json, list):
            raise ValueError("ops must be a JSON array")
        ops = [edits.EditOp.from_json(o) for o in ops_json]
    except (json.JSONDecodeError, ValueError, AudioscopeError) as exc:
        print(f"bad --ops value: {exc}", file=sys.stderr)
        return 2
    clip = audio_io.load_wav(Path(args.wav).read_bytes())
    edited = edits.apply(clip, ops)
    Path(args.out).write_bytes(audio_io.write_wav(edited))
    print(json.dumps({
        "samples": len(edited),
        "sample_rate": edited.sample_rate,
        "duration_ms": round(edited.duration_ms, 3),
    }))
    return 0


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "inspect": cmd_inspect,
    "edit": cmd_edit,
}


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=os.environ.get("AUDIOSCOPE_LOG", "INFO"),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AudioscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
