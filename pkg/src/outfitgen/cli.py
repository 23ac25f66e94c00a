"""Command-line interface.

Subcommands: synth (write a synthetic catalog), ablate (run the
configuration sweep and emit the report + CSV), diversity (full-system
diversity metrics), warm (pre-generate the outfit cache into a state
file), report (re-render the text table from a CSV, losslessly), and
serve (run the HTTP service).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import dump_catalog, load_catalog
from .config import EngineConfig
from .embedding import SyntheticProvider
from .harness import (
    ABLATIONS,
    ablation_report,
    csv_to_rows,
    render_report,
    run_ablation,
    sample_anchors,
    synth_catalog,
)


def _parse_composition(text: str | None) -> dict[str, int] | None:
    if not text:
        return None
    counts = {}
    for part in text.split(","):
        category, _, count = part.partition("=")
        counts[category.strip()] = int(count)
    return counts


def _load_config(path: str | None) -> EngineConfig:
    return EngineConfig.load(path) if path else EngineConfig()


def cmd_synth(args) -> int:
    config = _load_config(args.config)
    provider = SyntheticProvider(seed=config.provider_seed, dimension=config.dimension)
    catalog = synth_catalog(
        args.seed, _parse_composition(args.composition), provider, config.blend
    )
    dump_catalog(catalog, args.out)
    print(f"wrote {len(catalog)} items to {args.out}")
    return 0


def cmd_ablate(args) -> int:
    config = _load_config(args.config)
    configs = tuple(args.configs.split(",")) if args.configs else ABLATIONS
    outputs = run_ablation(
        seed=args.seed,
        n_anchors=args.anchors,
        composition=_parse_composition(args.composition),
        base_config=config,
        configs=configs,
        measure_latency=not args.no_latency,
    )
    report, _ = ablation_report(
        {name: out.metrics for name, out in outputs.items()}, args.out
    )
    print(report, end="")
    if args.out:
        print(f"report written to {args.out}/ablation.txt and ablation.csv")
    worst = 0.0
    for out in outputs.values():
        denominator = max(1, 3 * args.anchors)
        worst = max(worst, out.metrics.unfillable / denominator)
    if worst > 0.20:
        print(f"unfillable rate {worst:.1%} exceeds 20%", file=sys.stderr)
        return 1
    return 0


def cmd_diversity(args) -> int:
    config = _load_config(args.config)
    outputs = run_ablation(
        seed=args.seed,
        n_anchors=args.anchors,
        composition=_parse_composition(args.composition),
        base_config=config,
        configs=("full",),
        measure_latency=False,
    )
    metrics = outputs["full"].metrics
    print(f"mean distinct colors across directions: {metrics.mean_distinct_colors:.2f}")
    print(f"mean slot diversity per outfit: {metrics.mean_slot_diversity:.2f}")
    return 0


def cmd_warm(args) -> int:
    from .service import build_state  # deferred: pulls in fastapi

    config = _load_config(args.config)
    provider = SyntheticProvider(seed=config.provider_seed, dimension=config.dimension)
    if args.catalog:
        catalog = load_catalog(args.catalog, provider, config.blend, config.dimension)
    else:
        catalog = synth_catalog(args.seed, None, provider, config.blend)
    state = build_state(catalog, config, provider, state_path=args.state)

    from .embedding import hash64
    from .generator import GenerationRequest, generate_three_outfits
    from .service import _result_payload

    occasions = args.occasions.split(",")
    anchors = (
        sample_anchors(catalog, args.anchors, args.seed)
        if args.anchors
        else list(catalog.items)
    )
    for occasion in occasions:
        for anchor_id in anchors:
            request = GenerationRequest(
                anchor_id=anchor_id, occasion=occasion, seed=hash64(0, anchor_id, occasion)
            )
            result = generate_three_outfits(request, catalog, state.index, None, state.runtime)
            state.cache.put(
                anchor_id, occasion, catalog.items[anchor_id].category,
                _result_payload(result, state),
            )
    state.persist()
    print(f"warmed {len(state.cache)} cache entries into {args.state}")
    return 0


def cmd_report(args) -> int:
    rows = csv_to_rows(Path(args.csv).read_text("utf-8"))
    print(render_report(rows), end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app, load_state

    config = _load_config(args.config)
    provider = SyntheticProvider(seed=config.provider_seed, dimension=config.dimension)
    if args.state and Path(args.state).exists():
        state = load_state(args.state, provider)
    else:
        if args.catalog:
            catalog = load_catalog(args.catalog, provider, config.blend, config.dimension)
        else:
            catalog = synth_catalog(args.seed, None, provider, config.blend)
        state = build_state(catalog, config, provider, state_path=args.state)
    ui_dir = args.ui_dir or str(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    app = create_app(state, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="outfitgen")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic catalog file")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--composition", help="e.g. top=200,bottom=150,shoes=120")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="run the ablation sweep")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--anchors", type=int, default=50)
    p.add_argument("--composition")
    p.add_argument("--configs", help="comma list; default all eight")
    p.add_argument("--config")
    p.add_argument("--out", help="directory for ablation.csv / ablation.txt")
    p.add_argument("--no-latency", action="store_true",
                   help="skip wall-clock timing for byte-stable reports")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("diversity", help="diversity metrics for the full system")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--anchors", type=int, default=50)
    p.add_argument("--composition")
    p.add_argument("--config")
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("warm", help="pre-generate the outfit cache")
    p.add_argument("--catalog", help="catalog JSONL; default synthetic")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--anchors", type=int, help="subsample anchors; default all")
    p.add_argument("--occasions", default="casual")
    p.add_argument("--config")
    p.add_argument("--state", required=True, help="state file to write")
    p.set_defaults(func=cmd_warm)

    p = sub.add_parser("report", help="re-render the report from its CSV")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--catalog")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--config")
    p.add_argument("--state")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--ui-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
