"""Command-line interface: fit, translate, eval, synth, inspect.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure (the failing pipeline stage is reported).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import fileio
from .errors import EmbAlignError, FileFormatError
from .pipeline import evaluate, fit, translate
from .preprocess import DEGENERATE_NORM, drop_degenerate_rows
from .synth import SynthSpec, generate
from .types import EmbeddingMatrix, PipelineConfig

# CLI flag name (without leading dashes) -> PipelineConfig field. Config
# files use exactly these keys.
FLAG_TO_FIELD = {
    "c": "anchor_clusters",
    "k": "pair_neighbors",
    "s": "anchor_runs",
    "t": "match_iterations",
    "alpha": "alpha",
    "k-prime": "match_neighbors",
    "c-prime": "refine_clusters",
    "n-sample": "match_sample",
    "qap-restarts": "qap_restarts",
    "refine2-iters": "refine_cluster_passes",
    "seed": "seed",
}

PRESETS = {
    "small": {
        "c": 10,
        "s": 10,
        "k": 20,
        "t": 50,
        "c-prime": 100,
        "n-sample": 2000,
        "k-prime": 20,
    },
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # --help
        return int(err.code or 0)
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return 1

    started = time.monotonic()
    try:
        code = _dispatch(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileFormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except EmbAlignError as err:
        stage = getattr(err, "stage", None)
        if stage is not None:
            print(f"error: stage '{stage}' failed: {err}", file=sys.stderr)
            return 3
        print(f"error: {err}", file=sys.stderr)
        return 2
    if getattr(args, "verbose", False):
        print(f"elapsed: {time.monotonic() - started:.1f}s", file=sys.stderr)
    return code


def _dispatch(args) -> int:
    handler = {
        "fit": _cmd_fit,
        "translate": _cmd_translate,
        "eval": _cmd_eval,
        "synth": _cmd_synth,
        "inspect": _cmd_inspect,
    }[args.command]
    threads = getattr(args, "threads", None)
    if threads is None:
        return handler(args)
    _require(threads >= 1, "--threads", "must be an integer >= 1")
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=threads):
        return handler(args)


def _build_parser() -> _Parser:
    parser = _Parser(prog="embalign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    p_fit = sub.add_parser("fit", help="learn a map between two embedding pools")
    p_fit.add_argument("--source", required=True, help="source pool (space A)")
    p_fit.add_argument("--target", required=True, help="target pool (space B)")
    p_fit.add_argument("--out", required=True, help="output model file")
    p_fit.add_argument("--config", help="JSON config file (keys match flag names)")
    p_fit.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    p_fit.add_argument("--c", type=int, help="anchor clusters per run")
    p_fit.add_argument("--k", type=int, help="neighbors averaged into initial pairs")
    p_fit.add_argument("--s", type=int, help="anchor-discovery runs")
    p_fit.add_argument("--t", type=int, help="matching-refinement iterations")
    p_fit.add_argument("--alpha", type=float, help="smoothing weight in (0,1]")
    p_fit.add_argument("--k-prime", type=int, help="matching-refinement neighbors")
    p_fit.add_argument("--c-prime", type=int, help="clustering-refinement clusters")
    p_fit.add_argument("--n-sample", type=int, help="matching-refinement sample size")
    p_fit.add_argument("--qap-restarts", type=int, help="2-OPT restarts")
    p_fit.add_argument("--refine2-iters", type=int, help="clustering-refinement passes")
    p_fit.add_argument("--seed", type=int, help="master seed")
    _common_flags(p_fit)

    p_tr = sub.add_parser("translate", help="map embeddings through a fitted model")
    p_tr.add_argument("--model", required=True)
    p_tr.add_argument("--in", dest="input", required=True, help="input embeddings")
    p_tr.add_argument("--out", required=True, help="output embeddings")
    _common_flags(p_tr)

    p_ev = sub.add_parser("eval", help="score a model on parallel eval pairs")
    p_ev.add_argument("--model", required=True)
    p_ev.add_argument("--eval-source", required=True)
    p_ev.add_argument("--eval-target", required=True)
    p_ev.add_argument("--json", action="store_true", help="machine-readable report")
    _common_flags(p_ev)

    p_sy = sub.add_parser("synth", help="generate synthetic pools with known truth")
    p_sy.add_argument("--n", type=int, required=True, help="rows per training pool")
    p_sy.add_argument("--d", type=int, required=True, help="dimension")
    p_sy.add_argument("--components", type=int, required=True, help="mixture components")
    p_sy.add_argument("--noise", type=float, default=0.0, help="target-view noise scale")
    p_sy.add_argument("--eval-pairs", type=int, default=0, help="held-out parallel pairs")
    p_sy.add_argument("--seed", type=int, default=0)
    p_sy.add_argument("--out-dir", required=True)
    _common_flags(p_sy)

    p_in = sub.add_parser("inspect", help="print a model's config and diagnostics")
    p_in.add_argument("--model", required=True)
    _common_flags(p_in)
    return parser


def _common_flags(p) -> None:
    p.add_argument("--threads", type=int, help="cap threads used by matrix kernels")
    p.add_argument("--verbose", action="store_true", help="print timing to stderr")


def _require(condition: bool, flag: str, requirement: str) -> None:
    if not condition:
        raise _UsageError(f"invalid value for {flag}: {requirement}")


def _load_pool(path) -> EmbeddingMatrix:
    return fileio.read_embeddings(path)


def _clean_pool(x: EmbeddingMatrix, name: str) -> EmbeddingMatrix:
    cleaned, dropped = drop_degenerate_rows(x)
    if dropped:
        print(
            f"warning: dropped {len(dropped)} degenerate row(s) from {name}: "
            f"{dropped[:10]}{'...' if len(dropped) > 10 else ''}",
            file=sys.stderr,
        )
    return cleaned


def _cmd_fit(args) -> int:
    config = _build_config(args)
    source = _clean_pool(_load_pool(args.source), "source")
    target = _clean_pool(_load_pool(args.target), "target")
    model = fit(source, target, config)
    fileio.save_model(args.out, model)
    summary = " | ".join(f"{k} {v:.4f}" for k, v in model.stage_summary().items())
    print(f"pools: source n={source.n} target n={target.n} d={source.d}")
    print(f"stage mean cosine: {summary}")
    print(f"wrote model: {args.out}")
    return 0


def _build_config(args) -> PipelineConfig:
    for flag, value in (
        ("--c", args.c),
        ("--k", args.k),
        ("--s", args.s),
        ("--k-prime", args.k_prime),
        ("--c-prime", args.c_prime),
        ("--n-sample", args.n_sample),
        ("--qap-restarts", args.qap_restarts),
    ):
        if value is not None:
            _require(value >= 1, flag, "must be an integer >= 1")
    for flag, value in (("--t", args.t), ("--refine2-iters", args.refine2_iters)):
        if value is not None:
            _require(value >= 0, flag, "must be an integer >= 0")
    if args.alpha is not None:
        _require(0.0 < args.alpha <= 1.0, "--alpha", "must lie in (0, 1]")
    if args.seed is not None:
        _require(args.seed >= 0, "--seed", "must be a non-negative integer")

    values: dict = {}
    if args.preset is not None:
        values.update(PRESETS[args.preset])
    if args.config is not None:
        values.update(_load_config_file(args.config))
    for flag, field in FLAG_TO_FIELD.items():
        arg_value = getattr(args, flag.replace("-", "_"))
        if arg_value is not None:
            values[flag] = arg_value
    mapped = {FLAG_TO_FIELD[flag]: value for flag, value in values.items()}
    try:
        return PipelineConfig(**mapped)
    except ValueError as err:
        raise _UsageError(str(err)) from None


def _load_config_file(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise FileFormatError(f"{path}: invalid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise FileFormatError(f"{path}: config must be a JSON object")
    unknown = set(raw) - set(FLAG_TO_FIELD)
    if unknown:
        raise _UsageError(
            f"unknown config key(s) in {path}: {sorted(unknown)} "
            f"(valid: {sorted(FLAG_TO_FIELD)})"
        )
    return raw


def _cmd_translate(args) -> int:
    model = fileio.load_model(args.model)
    pool = _load_pool(args.input)
    data = pool.data
    bad = np.flatnonzero(
        np.linalg.norm(data - model.stats_a.mean, axis=1) < DEGENERATE_NORM
    )
    if bad.size:
        print(
            f"warning: dropped {bad.size} degenerate row(s) from input: "
            f"{bad[:10].tolist()}{'...' if bad.size > 10 else ''}",
            file=sys.stderr,
        )
        data = np.delete(data, bad, axis=0)
    out = translate(model, EmbeddingMatrix(data, label=pool.label))
    fileio.write_embeddings(args.out, out)
    print(f"translated {out.n} rows -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = fileio.load_model(args.model)
    eval_a = _load_pool(args.eval_source)
    eval_b = _load_pool(args.eval_target)
    a, b = eval_a.data, eval_b.data
    if a.shape[0] == b.shape[0]:
        bad_a = np.linalg.norm(a - model.stats_a.mean, axis=1) < DEGENERATE_NORM
        bad_b = np.linalg.norm(b - model.stats_b.mean, axis=1) < DEGENERATE_NORM
        bad = np.flatnonzero(bad_a | bad_b)
        if bad.size:
            print(
                f"warning: dropped {bad.size} degenerate eval pair(s): "
                f"{bad[:10].tolist()}{'...' if bad.size > 10 else ''}",
                file=sys.stderr,
            )
            a = np.delete(a, bad, axis=0)
            b = np.delete(b, bad, axis=0)
    report = evaluate(model, EmbeddingMatrix(a), EmbeddingMatrix(b))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"n           {report.n}")
        print(f"top1        {report.top1:.4f}")
        print(f"avg_rank    {report.avg_rank:.4f}")
        print(f"mean_cosine {report.mean_cosine:.4f}")
    return 0


def _cmd_synth(args) -> int:
    _require(args.n >= 1, "--n", "must be an integer >= 1")
    _require(args.d >= 2, "--d", "must be an integer >= 2")
    _require(1 <= args.components <= args.n, "--components", "must lie in [1, n]")
    _require(args.noise >= 0.0, "--noise", "must be >= 0")
    _require(args.eval_pairs >= 0, "--eval-pairs", "must be an integer >= 0")
    _require(args.seed >= 0, "--seed", "must be a non-negative integer")

    spec = SynthSpec(
        n=args.n,
        dim=args.d,
        components=args.components,
        noise_sigma=args.noise,
        seed=args.seed,
        eval_pairs=args.eval_pairs,
    )
    data = generate(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fileio.write_embeddings(out_dir / "XA.emb", data.pool_a)
    fileio.write_embeddings(out_dir / "XB.emb", data.pool_b)
    written = ["XA.emb", "XB.emb"]
    if data.eval_a is not None:
        fileio.write_embeddings(out_dir / "evalA.emb", data.eval_a)
        fileio.write_embeddings(out_dir / "evalB.emb", data.eval_b)
        written += ["evalA.emb", "evalB.emb"]
    truth = {
        "linear_map": data.truth.linear_map.tolist(),
        "translation": data.truth.translation.tolist(),
        "scale": data.truth.scale,
        "spec": {
            "n": spec.n,
            "d": spec.dim,
            "components": spec.components,
            "noise": spec.noise_sigma,
            "eval_pairs": spec.eval_pairs,
            "seed": spec.seed,
        },
    }
    (out_dir / "truth.json").write_text(
        json.dumps(truth, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append("truth.json")
    print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


def _cmd_inspect(args) -> int:
    model = fileio.load_model(args.model)
    defect = float(np.abs(model.w.T @ model.w - np.eye(model.d)).max())
    print(f"dimension: {model.d}")
    print("config:")
    for key, value in model.config.to_dict().items():
        print(f"  {key} = {value}")
    print("diagnostics (mean cosine):")
    for stage, values in model.diagnostics.items():
        if values:
            print(f"  {stage:<18} {values[-1]:.6f}  ({len(values)} value(s))")
        else:
            print(f"  {stage:<18} skipped")
    print(f"orthogonality defect: {defect:.3e}")
    return 0
