"""Command line client.

Commands run in process by default; with --server they are sent to a
running service instead, carrying the exact same request payloads.  Exit
codes: 0 success, 1 processing failure, 2 bad invocation or config.
"""

from __future__ import annotations

import json
import sys

import click

from . import __version__
from .handlers import (
    HandlerError,
    handle_calibrate,
    handle_detect,
    handle_eval,
    handle_fix,
    handle_synth,
    handle_train,
)
from .schemas import (
    CalibrateRequest,
    DetectRequest,
    EvalRequest,
    FixRequest,
    SynthRequest,
    TrainRequest,
)

FORMAT_CHOICES = click.Choice(["json-dump", "xml-dump"])


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", default=None, help="INI config file.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option(
    "--format",
    "out_format",
    type=click.Choice(["json", "table"]),
    default="table",
    show_default=True,
    help="Output rendering.",
)
@click.option(
    "--server",
    default=None,
    metavar="URL",
    help="Send the command to a running service at URL instead of running in process.",
)
@click.pass_context
def main(ctx, config_path, seed, out_format, server):
    """Detect and repair accessibility problems in GUI hierarchies."""
    ctx.obj = {
        "config_path": config_path,
        "seed": seed,
        "out_format": out_format,
        "server": server,
    }


def _dispatch(ctx, endpoint: str, req, handler) -> dict:
    obj = ctx.obj
    server = obj["server"]
    if server is None:
        try:
            return handler(req).model_dump()
        except HandlerError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2 if exc.usage else 1)
    import httpx

    url = server.rstrip("/") + endpoint
    try:
        resp = httpx.post(url, json=req.model_dump(), timeout=600.0)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach {url}: {exc}", err=True)
        sys.exit(1)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(2 if resp.status_code == 400 else 1)
    return resp.json()


def _emit(ctx, data: dict, table_fn) -> None:
    if ctx.obj["out_format"] == "json":
        click.echo(json.dumps(data, sort_keys=True, indent=2))
    else:
        click.echo(table_fn(data), nl=False)


@main.command()
@click.argument("path", type=click.Path())
@click.option(
    "--input-format", type=FORMAT_CHOICES, default="json-dump", show_default=True
)
@click.pass_context
def detect(ctx, path, input_format):
    """Scan one GUI document and list its accessibility issues."""
    req = DetectRequest(
        path=path, format=input_format, config_path=ctx.obj["config_path"]
    )
    data = _dispatch(ctx, "/detect", req, handle_detect)

    def table(d):
        lines = []
        for s in d["issues"]:
            peer = f"  peer={s['peer_id']}" if s["peer_id"] else ""
            lines.append(
                f"{s['kind']:<15} {s['component_id']:<14} "
                f"measured={s['measured']:.4g} threshold={s['threshold']:g}{peer}"
            )
        lines.append(
            f"{len(d['issues'])} issue(s) in {d['components']} component(s), "
            f"{d['containers']} container(s)"
        )
        if d["unscanned"]:
            lines.append("not scanned: " + ", ".join(d["unscanned"]))
        return "\n".join(lines) + "\n"

    _emit(ctx, data, table)


@main.command()
@click.option("--corpus", "corpus_dir", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--epochs", type=int, default=None)
@click.option("--dim", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--negative-ratio", type=int, default=None)
@click.pass_context
def train(ctx, corpus_dir, out_path, epochs, dim, learning_rate, negative_ratio):
    """Fit the link predictor on a corpus of GUI documents."""
    req = TrainRequest(
        corpus_dir=corpus_dir,
        out_path=out_path,
        epochs=epochs,
        dim=dim,
        learning_rate=learning_rate,
        negative_ratio=negative_ratio,
        seed=ctx.obj["seed"],
        config_path=ctx.obj["config_path"],
    )
    data = _dispatch(ctx, "/train", req, handle_train)
    _emit(
        ctx,
        data,
        lambda d: (
            f"trained on {d['graphs']} graph(s), {d['epochs_run']} epoch(s), "
            f"final loss {d['final_loss']:.6f}\nmodel written to {d['model_path']}\n"
        ),
    )


@main.command()
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_dir", default=None, type=click.Path())
@click.option("--model", "model_path", default=None, type=click.Path())
@click.option("--preset", is_flag=True, help="Write the built-in curves unchanged.")
@click.option("--k", type=int, default=None, help="Edges removed per screen.")
@click.pass_context
def calibrate(ctx, out_path, corpus_dir, model_path, preset, k):
    """Fit (or copy) the signal-to-attribute curves."""
    req = CalibrateRequest(
        out_path=out_path,
        corpus_dir=corpus_dir,
        model_path=model_path,
        preset=preset,
        k=k,
        seed=ctx.obj["seed"],
        config_path=ctx.obj["config_path"],
    )
    data = _dispatch(ctx, "/calibrate", req, handle_calibrate)

    def table(d):
        lines = [f"calibration ({d['provenance']}) written to {d['calibration_path']}"]
        for name, c in sorted(d["curves"].items()):
            a2, a1, a0 = c["coefficients"]
            lines.append(
                f"{name:<9} a2={a2:+.6g} a1={a1:+.6g} a0={a0:+.6g} "
                f"rms={c['rms']:.4g} n={c['n']}"
            )
        return "\n".join(lines) + "\n"

    _emit(ctx, data, table)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--calibration", "calibration_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(), help="Write the repaired document here.")
@click.option("--patch", "patch_path", default=None, type=click.Path(), help="Write the patch JSON here.")
@click.option(
    "--input-format", type=FORMAT_CHOICES, default="json-dump", show_default=True
)
@click.pass_context
def fix(ctx, path, model_path, calibration_path, out_path, patch_path, input_format):
    """Repair one GUI document and report what changed."""
    req = FixRequest(
        path=path,
        format=input_format,
        model_path=model_path,
        calibration_path=calibration_path,
        out_path=out_path,
        patch_path=patch_path,
        seed=ctx.obj["seed"],
        config_path=ctx.obj["config_path"],
    )
    data = _dispatch(ctx, "/fix", req, handle_fix)

    def table(d):
        lines = []
        for c in d["patch"]["changes"]:
            minor = " (minor)" if c["minor"] else ""
            lines.append(
                f"change {c['component_id']:<14} {c['field']:<6} "
                f"{c['old']} -> {c['new']}{minor}"
            )
        for u in d["patch"]["unfixable"]:
            peer = f" / {u['peer_id']}" if u["peer_id"] else ""
            lines.append(
                f"unfixable {u['kind']} at {u['component_id']}{peer}: {u['reason']}"
            )
        counts = d["report"]["counts"]
        lines.append(
            "verdicts: "
            + ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
            + ("  [partial]" if d["patch"]["partial"] else "")
        )
        if d.get("out_path"):
            lines.append(f"repaired document written to {d['out_path']}")
        return "\n".join(lines) + "\n"

    _emit(ctx, data, table)


@main.command(name="eval")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path())
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--calibration", "calibration_path", required=True, type=click.Path())
@click.pass_context
def eval_(ctx, corpus_dir, model_path, calibration_path):
    """Repair every broken screen in a corpus and score the outcome."""
    req = EvalRequest(
        corpus_dir=corpus_dir,
        model_path=model_path,
        calibration_path=calibration_path,
        seed=ctx.obj["seed"],
        config_path=ctx.obj["config_path"],
    )
    data = _dispatch(ctx, "/eval", req, handle_eval)
    _emit(ctx, data, lambda d: d["text"])


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--count", type=int, default=None)
@click.pass_context
def synth(ctx, out_dir, count):
    """Generate a corpus of clean screens plus broken variants."""
    req = SynthRequest(
        out_dir=out_dir,
        count=count,
        seed=ctx.obj["seed"],
        config_path=ctx.obj["config_path"],
    )
    data = _dispatch(ctx, "/synth", req, handle_synth)
    _emit(
        ctx,
        data,
        lambda d: (
            f"wrote {d['screens']} screen(s) to {d['out_dir']} "
            f"(injected: {', '.join(f'{k}={v}' for k, v in sorted(d['issues'].items()))})\n"
        ),
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
