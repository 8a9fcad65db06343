"""Command-line frontend: train, recognize, eval, synth, features, tag, serve.

An optional config file (--config, key=value lines) supplies defaults;
explicit flags always win. All randomness flows through --seed.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import default_templates, default_vocabulary
from .classifier import classify
from .dtw import DtwConfig
from .evaluate import (
    NoiseConfig,
    SynthConfig,
    emit_report,
    enumerate_splits,
    generate_synthetic_dataset,
    load_templates,
    run_experiment,
)
from .features import FeatureConfig, extract_curvature_points, extract_edf
from .ink import (
    Dataset,
    DatasetError,
    load_vocabulary,
    parse_dataset,
    write_dataset,
)
from .smoothing import SmoothingConfig, smooth_stroke
from .trainer import (
    ModelError,
    TauSearch,
    TrainerConfig,
    build_model,
    load_model,
    save_model,
)

log = logging.getLogger(__name__)


class CliError(click.ClickException):
    exit_code = 1


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    values: dict = {}
    try:
        text = Path(path).read_text("utf-8")
    except OSError as e:
        raise CliError(f"cannot read config file {path}: {e.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Optional key=value config file; flags override it.")
@click.option("--verbose", is_flag=True, help="Print the resolved configuration.")
@click.pass_context
def main(ctx, config_path, verbose):
    """Online handwritten stroke recognition with extended directional features."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = _load_config_file(config_path)
    ctx.default_map = {cmd: dict(config) for cmd in
                       ("train", "recognize", "eval", "synth", "features", "tag", "serve")}
    ctx.obj = {"verbose": verbose}


def _feature_options(fn):
    fn = click.option("--smooth-levels", type=int, default=1, show_default=True,
                      help="Haar smoothing depth.")(fn)
    fn = click.option("--no-smooth", is_flag=True, help="Disable smoothing.")(fn)
    fn = click.option("--epsilon", type=float, default=0.0, show_default=True,
                      help="Sign-difference dead zone.")(fn)
    fn = click.option("--y-up", is_flag=True,
                      help="Input y axis grows upward (default: device y-down).")(fn)
    return fn


def _dtw_options(fn):
    fn = click.option("--no-normalize", is_flag=True,
                      help="Use raw accumulated DTW cost.")(fn)
    fn = click.option("--window", type=int, default=None,
                      help="Sakoe-Chiba band half-width.")(fn)
    return fn


def _make_feature_config(smooth_levels, no_smooth, epsilon, y_up) -> FeatureConfig:
    return FeatureConfig(
        smoothing=SmoothingConfig(levels=max(smooth_levels, 1), enabled=not no_smooth),
        epsilon=epsilon,
        y_up=y_up,
    )


def _echo_config(ctx, **resolved):
    if ctx.obj.get("verbose"):
        click.echo("resolved config:", err=True)
        for key, value in sorted(resolved.items()):
            click.echo(f"  {key} = {value}", err=True)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text("utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _load_dataset(path: str, vocab: list[str] | None) -> Dataset:
    try:
        return parse_dataset(_read_text(path), vocab)
    except DatasetError as e:
        raise CliError(f"{path}: {e}") from None


def _load_vocab(vocab_path: str | None) -> list[str]:
    if vocab_path is None:
        return default_vocabulary()
    try:
        return load_vocabulary(_read_text(vocab_path))
    except DatasetError as e:
        raise CliError(f"{vocab_path}: {e}") from None


@main.command()
@click.option("--data", required=True, help="Training dataset (.strokes.jsonl).")
@click.option("--out", required=True, type=click.Path(), help="Model output path.")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file.")
@click.option("--max-refs", type=int, default=3, show_default=True)
@click.option("--min-count", type=int, default=10, show_default=True)
@click.option("--tau-lo", type=float, default=0.0, show_default=True)
@click.option("--tau-hi", type=float, default=4.0, show_default=True)
@click.option("--tau-iterations", type=int, default=24, show_default=True)
@_feature_options
@_dtw_options
@click.pass_context
def train(ctx, data, out, vocab_path, max_refs, min_count, tau_lo, tau_hi,
          tau_iterations, smooth_levels, no_smooth, epsilon, y_up,
          no_normalize, window):
    """Build a reference model from a labeled dataset."""
    _echo_config(ctx, data=data, out=out, max_refs=max_refs, min_count=min_count,
                 tau_lo=tau_lo, tau_hi=tau_hi, smooth_levels=smooth_levels,
                 no_smooth=no_smooth, epsilon=epsilon, y_up=y_up)
    vocab = _load_vocab(vocab_path)
    dataset = _load_dataset(data, vocab)
    try:
        model = build_model(
            dataset,
            _make_feature_config(smooth_levels, no_smooth, epsilon, y_up),
            TrainerConfig(max_refs=max_refs, min_count=min_count,
                          tau_search=TauSearch(tau_lo, tau_hi, tau_iterations)),
            DtwConfig(normalize=not no_normalize, window=window),
        )
    except (ModelError, ValueError) as e:
        raise CliError(str(e)) from None
    Path(out).write_text(save_model(model), encoding="utf-8")
    for lm in model.labels:
        click.echo(f"{lm.label}: tau={lm.tau:.4f} references={len(lm.references)}")
    click.echo(f"model written to {out} "
               f"({len(model.all_references())} references, {len(model.labels)} labels)")


@main.command()
@click.option("--model", "model_path", required=True, help="Model file.")
@click.option("--input", "input_path", required=True,
              help="Stroke dataset file, or '-' for stdin.")
@click.option("--method", type=click.Choice(["1", "2"]), default="2", show_default=True)
@click.option("--top-k", type=int, default=3, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@_dtw_options
@click.pass_context
def recognize(ctx, model_path, input_path, method, top_k, as_json,
              no_normalize, window):
    """Classify each stroke in a dataset file against a model."""
    try:
        model = load_model(_read_text(model_path))
    except ModelError as e:
        raise CliError(f"{model_path}: {e}") from None
    feature_config = FeatureConfig.from_dict(model.config_snapshot.get("features", {}))
    dataset = _load_dataset(input_path, None)
    dtw_config = DtwConfig(normalize=not no_normalize, window=window)
    results = []
    for stroke in dataset:
        edf = _pipeline_edf(stroke, feature_config)
        result = classify(edf, model, method, dtw_config)
        ranking = result.ranking[: max(top_k, 1)]
        results.append({"id": stroke.id,
                        "ranking": [{"label": l, "score": s} for l, s in ranking]})
        if not as_json:
            top = ", ".join(f"{l} ({s:.4f})" for l, s in ranking)
            click.echo(f"{stroke.id}: {top}")
    if as_json:
        click.echo(json.dumps(results, indent=2))


def _pipeline_edf(stroke, feature_config: FeatureConfig):
    smoothed = smooth_stroke(stroke, feature_config.smoothing)
    cps = extract_curvature_points(smoothed, feature_config.epsilon)
    return extract_edf(smoothed, cps, feature_config.y_up)


@main.command(name="eval")
@click.option("--data", required=True, help="Labeled dataset (.strokes.jsonl).")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file.")
@click.option("--splits", "splits_spec", default="all", show_default=True,
              help="'all' or comma-separated split indices.")
@click.option("--train-size", type=int, default=None,
              help="Writers on the training side (default: half).")
@click.option("--train-writers", default=None,
              help="Explicit comma-separated training writer ids (single split).")
@click.option("--format", "fmt", type=click.Choice(["text", "csv", "json"]),
              default="text", show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Report output path.")
@click.option("--max-refs", type=int, default=3, show_default=True)
@click.option("--min-count", type=int, default=10, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@_feature_options
@_dtw_options
@click.pass_context
def eval_cmd(ctx, data, vocab_path, splits_spec, train_size, train_writers, fmt, out,
             max_refs, min_count, workers, smooth_levels, no_smooth, epsilon, y_up,
             no_normalize, window):
    """Run the writer-independent evaluation protocol."""
    vocab = _load_vocab(vocab_path)
    dataset = _load_dataset(data, vocab)
    writers = dataset.writers
    if len(writers) < 2:
        raise CliError(f"dataset has {len(writers)} writer(s); need at least 2")
    size = train_size if train_size is not None else len(writers) // 2
    try:
        all_splits = enumerate_splits(writers, size)
    except ValueError as e:
        raise CliError(str(e)) from None
    if train_writers is not None:
        chosen = tuple(sorted(w.strip() for w in train_writers.split(",") if w.strip()))
        selected = [s for s in all_splits if s.train_writers == chosen]
        if not selected:
            raise CliError(f"no split has training writers {chosen}")
    elif splits_spec == "all":
        selected = all_splits
    else:
        try:
            indices = [int(tok) for tok in splits_spec.split(",") if tok.strip()]
            selected = [all_splits[i] for i in indices]
        except (ValueError, IndexError):
            raise CliError(
                f"--splits must be 'all' or indices in [0, {len(all_splits) - 1}]"
            ) from None
    _echo_config(ctx, data=data, splits=len(selected), train_size=size,
                 max_refs=max_refs, min_count=min_count, epsilon=epsilon,
                 smooth_levels=smooth_levels, workers=workers)
    try:
        report = run_experiment(
            dataset,
            _make_feature_config(smooth_levels, no_smooth, epsilon, y_up),
            TrainerConfig(max_refs=max_refs, min_count=min_count),
            DtwConfig(normalize=not no_normalize, window=window),
            splits=selected,
            workers=max(workers, 1),
        )
    except ValueError as e:
        raise CliError(str(e)) from None
    fmt_name = {"text": "text-table", "csv": "csv", "json": "json"}[fmt]
    rendered = emit_report(report, fmt_name)
    if out:
        Path(out).write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)
    acc1, acc2 = report.overall_accuracy()
    click.echo(f"overall accuracy: method1={acc1:.1%} method2={acc2:.1%}", err=True)


@main.command()
@click.option("--templates", "templates_path", default=None,
              help="Template polylines JSON (default: built-in 20 labels).")
@click.option("--writers", type=int, default=10, show_default=True)
@click.option("--samples", type=int, default=3, show_default=True,
              help="Samples per writer per label.")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--jitter-sd", type=float, default=0.05, show_default=True)
@click.option("--rotation-sd", type=float, default=0.02, show_default=True)
@click.option("--scale-range", default="0.9,1.1", show_default=True)
@click.option("--resample-range", default="0.8,1.2", show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def synth(ctx, templates_path, writers, samples, seed, jitter_sd, rotation_sd,
          scale_range, resample_range, out):
    """Generate a deterministic synthetic stroke corpus."""

    def parse_range(spec, name):
        try:
            lo, hi = (float(tok) for tok in spec.split(","))
            return (lo, hi)
        except ValueError:
            raise CliError(f"--{name} must be 'lo,hi'") from None

    templates = (load_templates(_read_text(templates_path))
                 if templates_path else default_templates())
    try:
        config = SynthConfig(
            templates=templates,
            writers=writers,
            samples_per_writer_per_label=samples,
            noise=NoiseConfig(
                jitter_sd=jitter_sd,
                rotation_sd_rad=rotation_sd,
                scale_range=parse_range(scale_range, "scale-range"),
                resample_rate_range=parse_range(resample_range, "resample-range"),
            ),
            seed=seed,
        )
    except ValueError as e:
        raise CliError(str(e)) from None
    dataset = generate_synthetic_dataset(config)
    Path(out).write_text(write_dataset(dataset), encoding="utf-8")
    click.echo(f"wrote {len(dataset)} strokes to {out}")


@main.command()
@click.option("--input", "input_path", required=True,
              help="Stroke dataset file, or '-' for stdin.")
@_feature_options
@click.pass_context
def features(ctx, input_path, smooth_levels, no_smooth, epsilon, y_up):
    """Dump curvature-point indices and EDF codes for inspection."""
    dataset = _load_dataset(input_path, None)
    feature_config = _make_feature_config(smooth_levels, no_smooth, epsilon, y_up)
    out = []
    for stroke in dataset:
        smoothed = smooth_stroke(stroke, feature_config.smoothing)
        cps = extract_curvature_points(smoothed, feature_config.epsilon)
        edf = extract_edf(smoothed, cps, feature_config.y_up)
        out.append({
            "id": stroke.id,
            "points": len(stroke.points),
            "curvature_indices": list(cps.indices),
            "k": cps.k,
            "edf": list(edf.codes),
            "edf_length": len(edf),
        })
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--data", required=True, help="Dataset to re-label.")
@click.option("--labels", "labels_path", required=True,
              help="JSON object mapping stroke id -> label.")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file.")
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def tag(ctx, data, labels_path, vocab_path, out):
    """Re-label strokes by id from a mapping file."""
    from dataclasses import replace

    vocab = _load_vocab(vocab_path)
    dataset = _load_dataset(data, None)
    try:
        mapping = json.loads(_read_text(labels_path))
    except json.JSONDecodeError as e:
        raise CliError(f"{labels_path}: invalid JSON: {e.msg}") from None
    unknown = sorted(
        {l for l in mapping.values() if l != "OOV" and l not in vocab}
    )
    if unknown:
        raise CliError(f"labels not in vocabulary: {', '.join(unknown)}")
    missing = sorted(set(mapping) - {s.id for s in dataset})
    if missing:
        raise CliError(f"ids not in dataset: {', '.join(missing)}")
    strokes = [
        replace(s, label=mapping[s.id]) if s.id in mapping else s for s in dataset
    ]
    Path(out).write_text(write_dataset(Dataset(strokes=strokes)), encoding="utf-8")
    click.echo(f"re-labeled {len(mapping)} of {len(strokes)} strokes")


@main.command()
@click.option("--port", type=int, default=8472, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--model", "model_path", default=None, help="Initial model file.")
@click.option("--data", "pending_path", required=True,
              help="Pending sample dataset path (appended to).")
@click.option("--base-data", default=None, help="Base training dataset.")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file.")
@click.option("--cors-origin", multiple=True, help="Extra allowed CORS origins.")
@click.option("--max-refs", type=int, default=3, show_default=True)
@click.option("--min-count", type=int, default=10, show_default=True)
@_feature_options
@_dtw_options
@click.pass_context
def serve(ctx, port, host, model_path, pending_path, base_data, vocab_path,
          cors_origin, max_refs, min_count, smooth_levels, no_smooth, epsilon, y_up,
          no_normalize, window):
    """Run the recognition HTTP service."""
    import uvicorn

    from .service import ServiceState, create_app

    model = None
    if model_path:
        try:
            model = load_model(_read_text(model_path))
        except ModelError as e:
            raise CliError(f"{model_path}: {e}") from None
    state = ServiceState(
        vocabulary=_load_vocab(vocab_path),
        pending_path=Path(pending_path),
        base_path=Path(base_data) if base_data else None,
        model=model,
        feature_config=_make_feature_config(smooth_levels, no_smooth, epsilon, y_up),
        trainer_config=TrainerConfig(max_refs=max_refs, min_count=min_count),
        dtw_config=DtwConfig(normalize=not no_normalize, window=window),
    )
    app = create_app(state, cors_origins=list(cors_origin) or None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
