"""Command line entry point.

augment --few-shot imgs.idx lbls.idx --model model.txt --out dir \
        [--alpha 0.8] --count M [--seed S] [training knobs]

Exit codes mirror the harness's convention: 0 success, 2 bad invocation or
input, 4 malformed file.
"""

import argparse
import sys

from cvae_augmenter import cvae, idxio, model_io, postprocess
from cvae_augmenter.config import AugmenterConfig
from cvae_augmenter.errors import FormatError, InputError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="augment",
        description="Train a conditional VAE on a few-shot set and emit "
        "confidence-filtered synthetic images as an IDX pair.",
    )
    parser.add_argument(
        "--few-shot",
        nargs=2,
        metavar=("IMAGES_IDX", "LABELS_IDX"),
        required=True,
        help="few-shot training pair in IDX format",
    )
    parser.add_argument("--model", required=True, help="classifier text file to match")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--alpha", type=float, default=0.8, help="confidence filter level")
    parser.add_argument("--count", type=int, required=True, help="images to generate")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=600)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--latent-dim", type=int, default=2)
    parser.add_argument("--hidden-dim", type=int, default=400)
    return parser


def run(args) -> int:
    config = AugmenterConfig(
        model_path=args.model,
        sample_count=args.count,
        latent_dim=args.latent_dim,
        hidden_dim=args.hidden_dim,
        batch_size=args.batch_size,
        epochs=args.epochs,
        alpha=args.alpha,
        seed=args.seed,
    )
    model = model_io.read_model(config.model_path)
    images, labels = idxio.read_pair(*args.few_shot)
    print(f"loaded {len(images)} few-shot images, classifier with "
          f"{model.class_count} classes")

    generator = cvae.train_cvae(images, labels, model, config)
    means = generator.epoch_mean_totals()
    print(f"trained {config.epochs} epochs, mean loss {means[0]:.3f} -> {means[-1]:.3f}")

    batch = cvae.generate(generator, config.sample_count, config.seed)
    result = postprocess.post_process(batch, config.alpha, args.out, model, seed=config.seed)
    print(f"generated {len(batch)}, kept {len(result.kept)} above alpha={config.alpha}, "
          f"wrote {result.written}")
    print(f"wrote {result.images_path}")
    print(f"wrote {result.labels_path}")
    print(f"wrote {result.manifest_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return run(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 4
    except (InputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
