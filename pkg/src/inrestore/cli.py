"""Command-line interface.

Subcommands:
    corrupt  synthesize corruptions (noise / downsample / mask / blur)
    restore  single-task restoration (denoise | sr | inpaint | deblur)
    joint    multi-task restoration with per-task weights
    ablate   activation-function ablation on the super-resolution task
    metrics  PSNR/SSIM between two images

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
Runs are deterministic: repeating the same argv (including --seed)
reproduces output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys

from .degradations import (
    Blur,
    Downsample,
    Identity,
    Mask,
    add_gaussian_noise,
    gaussian_kernel,
    sample_mask,
)
from .image_io import (
    ImageFormatError,
    load_image,
    load_mask,
    save_image,
    save_mask,
    write_trace,
)
from .metrics import psnr, ssim
from .network import Activation, PositionalEncoding, RawCoords
from .numerics import Rng
from .restoration import NonFiniteLossError, TaskSpec, TrainConfig, restore

__all__ = ["run_cli", "main"]

_TASK_KINDS = ("denoise", "sr", "inpaint", "deblur")
_ABLATE_VARIANTS = ("sine", "relu", "relu-pe", "tanh", "sigmoid", "selu")


class UsageError(ValueError):
    """Bad flag combination or malformed argument value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_train_flags(p: argparse.ArgumentParser, iters_help: str) -> None:
    p.add_argument("--iters", type=int, default=None, help=iters_help)
    p.add_argument("--lr", type=float, default=1e-4, help="learning rate (default 1e-4)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--width", type=int, default=256, help="hidden width (default 256)")
    p.add_argument("--depth", type=int, default=6, help="hidden layers (default 6)")
    p.add_argument("--omega0", type=float, default=30.0, help="sine frequency scale (default 30)")
    p.add_argument(
        "--posenc-freqs",
        type=int,
        default=0,
        help="positional-encoding frequencies; 0 = raw coordinates (default 0)",
    )
    p.add_argument(
        "--snapshot-every", type=int, default=10, help="trace interval (default 10)"
    )
    p.add_argument("--trace", default=None, help="write training trace CSV here")
    p.add_argument(
        "--reference", default=None, help="clean image for evaluation-only PSNR"
    )
    p.add_argument("--config", default=None, help="JSON config file; flags override it")


def _add_operator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--factor", type=int, default=4, help="SR factor (default 4)")
    p.add_argument("--mask", default=None, help="keep-mask image (byte >= 128 keeps)")
    p.add_argument(
        "--blur-sigma", type=float, default=1.6, help="blur kernel sigma (default 1.6)"
    )
    p.add_argument(
        "--blur-width", type=int, default=25, help="blur kernel width (default 25)"
    )


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="inrestore",
        description="Single-image restoration with a sine-activated coordinate network.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("corrupt", help="synthesize corruptions from a clean image")
    p.add_argument("--input", required=True, help="clean input image")
    p.add_argument("--out", required=True, help="corrupted output image")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument(
        "--noise-sigma",
        type=float,
        default=None,
        help="add Gaussian noise with this sigma on the 0-255 scale (paper value 25)",
    )
    p.add_argument(
        "--factor",
        type=int,
        default=None,
        help="downsample by this integer factor, lanczos2 (paper value 4)",
    )
    p.add_argument(
        "--mask-sparsity",
        type=float,
        default=None,
        help="keep each pixel with this probability (paper value 0.1); needs --out-mask",
    )
    p.add_argument("--out-mask", default=None, help="where to save the sampled mask")
    p.add_argument(
        "--blur-sigma",
        type=float,
        default=None,
        help="Gaussian-blur sigma (paper value 1.6)",
    )
    p.add_argument(
        "--blur-width", type=int, default=25, help="Gaussian-blur width (default 25)"
    )
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.set_defaults(func=_cmd_corrupt)

    p = subs.add_parser("restore", help="restore one corrupted image")
    p.add_argument("--task", required=True, choices=_TASK_KINDS)
    p.add_argument("--input", required=True, help="corrupted observation")
    p.add_argument("--out", required=True, help="restored output image (final iterate)")
    p.add_argument(
        "--best-out",
        default=None,
        help="also save the best-PSNR snapshot (needs --reference)",
    )
    p.add_argument(
        "--activation",
        choices=[a.value for a in Activation],
        default="sine",
        help="hidden activation (default sine)",
    )
    _add_operator_flags(p)
    _add_train_flags(p, "training iterations (default 500; 4000 for deblur)")
    p.set_defaults(func=_cmd_restore)

    p = subs.add_parser("joint", help="fit one network to several corruptions")
    p.add_argument(
        "--task",
        action="append",
        required=True,
        metavar="KIND:PATH[:WEIGHT]",
        help="repeatable; KIND in denoise|sr|inpaint|deblur, default weight 0.1 "
        "for denoise and 1.0 otherwise",
    )
    p.add_argument("--out", required=True, help="restored output image (final iterate)")
    p.add_argument(
        "--best-out",
        default=None,
        help="also save the best-PSNR snapshot (needs --reference)",
    )
    p.add_argument(
        "--activation",
        choices=[a.value for a in Activation],
        default="sine",
        help="hidden activation (default sine)",
    )
    _add_operator_flags(p)
    _add_train_flags(p, "training iterations (default 500)")
    p.set_defaults(func=_cmd_joint)

    p = subs.add_parser(
        "ablate", help="super-resolution with different activation functions"
    )
    p.add_argument("--input", required=True, help="low-resolution observation")
    p.add_argument("--out", required=True, help="output path; variant name is suffixed")
    p.add_argument(
        "--activation",
        action="append",
        choices=list(_ABLATE_VARIANTS),
        default=None,
        help="repeatable; default runs all of: " + " ".join(_ABLATE_VARIANTS),
    )
    p.add_argument("--factor", type=int, default=4, help="SR factor (default 4)")
    _add_train_flags(p, "training iterations for every variant (default 500)")
    p.set_defaults(func=_cmd_ablate)

    p = subs.add_parser("metrics", help="print PSNR and SSIM between two images")
    p.add_argument("--a", required=True, help="first image")
    p.add_argument("--b", required=True, help="second image")
    p.set_defaults(func=_cmd_metrics)

    return parser


def _activation(name: str) -> Activation:
    return Activation(name)


def _encoding(posenc_freqs: int):
    if posenc_freqs < 0:
        raise UsageError(f"--posenc-freqs must be >= 0, got {posenc_freqs}")
    return PositionalEncoding(posenc_freqs) if posenc_freqs > 0 else RawCoords()


def _load_reference(path, canonical, channels):
    if path is None:
        return None
    ref = load_image(path)
    if ref.shape != (canonical[0], canonical[1], channels):
        raise UsageError(
            f"reference {path} is {ref.shape[0]}x{ref.shape[1]}x{ref.shape[2]}, "
            f"expected {canonical[0]}x{canonical[1]}x{channels}"
        )
    return ref


def _task_pieces(kind: str, observed, args):
    """Operator, canonical render size, and default iterations for one task."""
    h, w = observed.shape[:2]
    if kind == "denoise":
        return Identity((h, w)), (h, w), 500
    if kind == "sr":
        if args.factor < 1:
            raise UsageError(f"--factor must be >= 1, got {args.factor}")
        canonical = (args.factor * h, args.factor * w)
        return Downsample(args.factor, canonical), canonical, 500
    if kind == "inpaint":
        if args.mask is None:
            raise UsageError("inpainting needs --mask (the keep-mask image)")
        keep = load_mask(args.mask)
        if keep.shape != (h, w):
            raise UsageError(
                f"mask {args.mask} is {keep.shape[0]}x{keep.shape[1]}, "
                f"observation is {h}x{w}"
            )
        return Mask(keep), (h, w), 500
    if kind == "deblur":
        kernel = gaussian_kernel(args.blur_width, args.blur_sigma)
        return Blur(kernel, (h, w)), (h, w), 4000
    raise UsageError(f"unknown task kind {kind!r}")


def _train_config(args, canonical, iterations, reference, activation, encoding):
    return TrainConfig(
        canonical_size=canonical,
        iterations=iterations,
        learning_rate=args.lr,
        seed=args.seed,
        width=args.width,
        depth=args.depth,
        omega0=args.omega0,
        activation=activation,
        encoding=encoding,
        snapshot_every=args.snapshot_every,
        reference=reference,
    )


def _finish_run(result, args, n_tasks: int) -> None:
    save_image(result.final, args.out)
    if args.best_out is not None:
        if result.best is None:
            raise UsageError("--best-out needs --reference")
        save_image(result.best, args.best_out)
    if args.trace is not None:
        write_trace(result.trace, args.trace, n_tasks=n_tasks)
    last = result.trace.rows[-1] if result.trace.rows else None
    if last is not None and last.psnr_ref is not None:
        print(
            f"psnr_ref final={last.psnr_ref:.4f} "
            f"best={max(r.psnr_ref for r in result.trace.rows):.4f} "
            f"(iteration {result.best_iteration})"
        )


def _cmd_restore(args) -> int:
    observed = load_image(args.input)
    op, canonical, default_iters = _task_pieces(args.task, observed, args)
    iters = args.iters if args.iters is not None else default_iters
    reference = _load_reference(args.reference, canonical, observed.shape[2])
    config = _train_config(
        args, canonical, iters, reference,
        _activation(args.activation), _encoding(args.posenc_freqs),
    )
    result = restore(config, [TaskSpec(observed, op, 1.0)])
    _finish_run(result, args, n_tasks=1)
    return 0


def _parse_task_arg(text: str):
    parts = text.split(":")
    if len(parts) < 2 or parts[0] not in _TASK_KINDS:
        raise UsageError(
            f"task {text!r} must be KIND:PATH[:WEIGHT] with KIND in "
            + "|".join(_TASK_KINDS)
        )
    kind = parts[0]
    weight = None
    if len(parts) >= 3:
        try:
            weight = float(parts[-1])
            parts = parts[:-1]
        except ValueError:
            pass
    path = ":".join(parts[1:])
    if weight is not None and weight <= 0:
        raise UsageError(f"task weight must be > 0, got {weight}")
    return kind, path, weight


def _cmd_joint(args) -> int:
    requested = [_parse_task_arg(t) for t in args.task]
    if sum(1 for kind, _, _ in requested if kind == "inpaint") > 1:
        raise UsageError("joint runs support a single inpaint task (one --mask)")
    observations = [(kind, load_image(path), weight) for kind, path, weight in requested]

    canonical = None
    for kind, obs, _ in observations:
        h, w = obs.shape[:2]
        size = (args.factor * h, args.factor * w) if kind == "sr" else (h, w)
        if canonical is None:
            canonical = size
        elif canonical != size:
            raise UsageError(
                f"tasks disagree on the render size: {canonical} vs {size}"
            )

    tasks = []
    for kind, obs, weight in observations:
        op, _, _ = _task_pieces(kind, obs, args)
        if weight is None:
            weight = 0.1 if kind == "denoise" else 1.0
        tasks.append(TaskSpec(obs, op, weight))

    iters = args.iters if args.iters is not None else 500
    reference = _load_reference(args.reference, canonical, tasks[0].observed.shape[2])
    config = _train_config(
        args, canonical, iters, reference,
        _activation(args.activation), _encoding(args.posenc_freqs),
    )
    result = restore(config, tasks)
    _finish_run(result, args, n_tasks=len(tasks))
    return 0


def _variant_path(path: str, variant: str) -> str:
    stem, dot, ext = str(path).rpartition(".")
    if not dot:
        return f"{path}_{variant}"
    return f"{stem}_{variant}.{ext}"


def _cmd_ablate(args) -> int:
    observed = load_image(args.input)
    variants = args.activation or list(_ABLATE_VARIANTS)
    if args.factor < 1:
        raise UsageError(f"--factor must be >= 1, got {args.factor}")
    h, w = observed.shape[:2]
    canonical = (args.factor * h, args.factor * w)
    reference = _load_reference(args.reference, canonical, observed.shape[2])
    iters = args.iters if args.iters is not None else 500

    for variant in variants:
        if variant == "relu-pe":
            activation = Activation.RELU
            encoding = PositionalEncoding(args.posenc_freqs or 10)
        else:
            activation = _activation(variant)
            encoding = _encoding(args.posenc_freqs)
        op = Downsample(args.factor, canonical)
        config = _train_config(args, canonical, iters, reference, activation, encoding)
        result = restore(config, [TaskSpec(observed, op, 1.0)])
        out_path = _variant_path(args.out, variant)
        save_image(result.final, out_path)
        if args.trace is not None:
            write_trace(result.trace, _variant_path(args.trace, variant), n_tasks=1)
        if reference is not None:
            best = max(r.psnr_ref for r in result.trace.rows)
            print(
                f"{variant} final_psnr={result.trace.rows[-1].psnr_ref:.4f} "
                f"best_psnr={best:.4f}"
            )
        else:
            print(f"{variant} final_loss={result.trace.rows[-1].loss:.6g}")
    return 0


def _cmd_corrupt(args) -> int:
    img = load_image(args.input)
    selected = (
        args.noise_sigma is not None
        or args.factor is not None
        or args.mask_sparsity is not None
        or args.blur_sigma is not None
    )
    if not selected:
        raise UsageError(
            "select at least one corruption: --noise-sigma, --factor, "
            "--mask-sparsity or --blur-sigma"
        )
    rng = Rng(args.seed)
    if args.blur_sigma is not None:
        kernel = gaussian_kernel(args.blur_width, args.blur_sigma)
        img = Blur(kernel, img.shape[:2]).apply(img)
    if args.factor is not None:
        if args.factor < 1:
            raise UsageError(f"--factor must be >= 1, got {args.factor}")
        img = Downsample(args.factor, img.shape[:2]).apply(img)
    if args.mask_sparsity is not None:
        if args.out_mask is None:
            raise UsageError("--mask-sparsity needs --out-mask to save the mask")
        keep = sample_mask(rng, img.shape[0], img.shape[1], args.mask_sparsity)
        img = Mask(keep).apply(img)
        save_mask(keep, args.out_mask)
    if args.noise_sigma is not None:
        img = add_gaussian_noise(rng, img, args.noise_sigma)
    save_image(img, args.out)
    return 0


def _cmd_metrics(args) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    print(f"psnr {psnr(a, b):.6f}")
    print(f"ssim {ssim(a, b):.6f}")
    return 0


def _merge_config(argv: list[str]) -> list[str]:
    """Expand --config JSON into flags; explicit flags override them."""
    if not argv or argv[0].startswith("-"):
        return argv
    path = None
    for i, tok in enumerate(argv[1:]):
        if tok == "--config":
            if i + 2 > len(argv) - 1:
                raise UsageError("--config needs a file path")
            path = argv[1:][i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    user_flags = {tok.split("=", 1)[0] for tok in argv[1:] if tok.startswith("--")}
    expanded: list[str] = []
    for key, value in cfg.items():
        flag = "--" + str(key).replace("_", "-").lstrip("-")
        if flag == "--config" or flag in user_flags:
            continue  # explicit flags win
        values = value if isinstance(value, list) else [value]
        for item in values:
            expanded += [flag, str(item)]
    return [argv[0]] + expanded + argv[1:]


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        argv = _merge_config(argv)
    except UsageError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 1
    except NonFiniteLossError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 3
    except ImageFormatError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"inrestore: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run_cli(sys.argv[1:]))
