"""Command-line entry points: degrade, train, estimate, restore, serve.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import imgio
from .attrs import CHANNEL_NAMES, constant_map, decode_attrs, encode_spec, image_to_map, map_to_image
from .degrade import DegradationSpec, degrade
from .evaluation import blind_restore_8bit, psnr
from .networks import forward_estimate, forward_restore, load_weights
from .training import OptimizerConfig, TrainingConfig, train

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


class UsageError(Exception):
    pass


def _spec_json(spec: DegradationSpec) -> dict:
    v_b, v_n, v_c = encode_spec(spec)
    return {
        "sigma": spec.sigma,
        "lambda": spec.lam,
        "q": spec.q if spec.jpeg_applied else None,
        "jpeg_applied": spec.jpeg_applied,
        "attributes": {"blur": v_b, "noise": v_n, "jpeg": v_c},
    }


def _load_weights_checked(path: str):
    return load_weights(path)


def cmd_degrade(args) -> int:
    img = imgio.load_image(args.input)
    quality = args.quality if args.quality is not None else 100
    spec = DegradationSpec(
        sigma=args.sigma,
        lam=args.lam,
        q=quality if not args.no_jpeg else 100,
        jpeg_applied=not args.no_jpeg,
    )
    out = degrade(img, spec, args.seed)
    imgio.save_image(out, args.output)
    print(json.dumps(_spec_json(spec)))
    return EXIT_OK


def cmd_train(args) -> int:
    config = TrainingConfig(
        dataset_dir=args.data,
        patch_size=args.patch,
        batch_size=args.batch,
        epochs=args.epochs,
        optimizer=OptimizerConfig(kind=args.optimizer, learning_rate=args.lr),
        seed=args.seed,
        patches_per_epoch=args.patches_per_epoch,
        val_fraction=args.val_fraction,
    )
    print(config.to_json())
    weights, history = train(args.kind, config, out_path=args.out)
    if history.records:
        last = history.records[-1]
        print(f"final train loss {last.train_loss:.6g}  val loss {last.val_loss:.6g}")
    else:
        print("no epochs run; initialized weights written")
    print(f"weights: {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    weights = _load_weights_checked(args.weights)
    img = imgio.load_image(args.input)
    raw = forward_estimate(weights, img)
    clamped = np.clip(raw, 0.0, 1.0).astype(np.float32)
    imgio.save_image(map_to_image(clamped), args.out_map)
    means = {name: float(clamped[c].mean()) for c, name in enumerate(CHANNEL_NAMES)}
    payload = json.dumps({"channel_means": means})
    if args.out_json:
        Path(args.out_json).write_text(payload + "\n")
    print(payload)
    return EXIT_OK


def _restore_sources(args) -> int:
    nonblind_flags = any(
        v is not None for v in (args.sigma, args.lam, args.quality)
    ) or args.no_jpeg
    return sum((args.est_weights is not None, args.map is not None, nonblind_flags))


def cmd_restore(args) -> int:
    if _restore_sources(args) != 1:
        raise UsageError(
            "exactly one attribute source required: --est-weights (blind), "
            "--map FILE, or explicit --sigma/--lambda/--quality flags"
        )
    res_w = _load_weights_checked(args.res_weights)
    img = imgio.load_image(args.input)

    if args.est_weights is not None:
        est_w = _load_weights_checked(args.est_weights)
        restored, _ = blind_restore_8bit(est_w, res_w, img)
    elif args.map is not None:
        attr_map = image_to_map(imgio.load_image(args.map))
        if attr_map.shape[1:] != img.shape[1:]:
            raise ValueError(
                f"map size {attr_map.shape[1:]} does not match image {img.shape[1:]}"
            )
        restored = forward_restore(res_w, img, attr_map)
    else:
        spec = DegradationSpec(
            sigma=args.sigma if args.sigma is not None else 0.0,
            lam=args.lam if args.lam is not None else 0.0,
            q=args.quality if args.quality is not None else 100,
            jpeg_applied=args.quality is not None and not args.no_jpeg,
        )
        attr_map = constant_map(spec, img.shape[1], img.shape[2])
        restored = forward_restore(res_w, img, attr_map)

    imgio.save_image(restored, args.out)
    if args.reference:
        ref = imgio.load_image(args.reference)
        print(json.dumps({"psnr": psnr(restored, ref)}))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    est_w = _load_weights_checked(args.est_weights)
    res_w = _load_weights_checked(args.res_weights)
    app = create_app(est_w, res_w, max_dim=args.max_dim, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compdeg",
        description="Compositional degradation simulation, estimation, and restoration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="apply blur + AWGN + quantization + JPEG")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=float, default=0.0, help="blur std in [0, 3.5]")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="noise std in [0, 55]")
    jpeg = p.add_mutually_exclusive_group()
    jpeg.add_argument("--quality", type=int, default=None, help="JPEG quality in [5, 100] (default 100)")
    jpeg.add_argument("--no-jpeg", action="store_true", help="skip the JPEG stage")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("train", help="train the estimator or restorer")
    p.add_argument("--kind", choices=("estimator", "restorer"), required=True)
    p.add_argument("--data", required=True, help="directory of PNG/PPM images")
    p.add_argument("--out", required=True, help="output weights file")
    p.add_argument("--epochs", type=int, default=80)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--patch", type=int, default=60)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patches-per-epoch", type=int, default=2048)
    p.add_argument("--val-fraction", type=float, default=0.05)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("estimate", help="write the estimated attribute map")
    p.add_argument("input")
    p.add_argument("--weights", required=True)
    p.add_argument("--out-map", required=True, help="attribute map PNG (R=blur, G=noise, B=jpeg)")
    p.add_argument("--out-json", default=None, help="also write channel means as JSON")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("restore", help="restore an image (blind or nonblind)")
    p.add_argument("input")
    p.add_argument("--res-weights", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--est-weights", default=None, help="blind mode: estimate attributes first")
    p.add_argument("--map", default=None, help="nonblind mode: attribute map PNG")
    p.add_argument("--sigma", type=float, default=None, help="nonblind mode: blur std")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="nonblind mode: noise std")
    p.add_argument("--quality", type=int, default=None, help="nonblind mode: JPEG quality")
    p.add_argument("--no-jpeg", action="store_true", help="nonblind mode: no JPEG stage")
    p.add_argument("--reference", default=None, help="print PSNR against this image")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("serve", help="serve the estimate/restore HTTP API")
    p.add_argument("--est-weights", required=True)
    p.add_argument("--res-weights", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-dim", type=int, default=2048, help="largest accepted image side")
    p.add_argument("--static", default=None, help="directory of studio UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
