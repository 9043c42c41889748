"""Command-line entry points: sweep, features, validate."""

from __future__ import annotations

import argparse
import sys
from collections import defaultdict
from pathlib import Path

from .chain import NonErgodicError, UnstableChainError
from .harness import ConfigError, SweepConfig, compute_cell, emit_csv, load_config, run_sweep, write_manifest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcsfa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a parameter sweep; write CSV, heatmaps, manifest")
    sweep.add_argument("--config", required=True, help="path to the sweep config JSON")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--jobs", type=int, default=1, help="max parallel worker processes")

    feats = sub.add_parser("features", help="emit feature and occupancy plots per sweep cell")
    feats.add_argument("--config", required=True, help="path to the sweep config JSON")
    feats.add_argument("--out", required=True, help="output directory")

    val = sub.add_parser("validate", help="check a sweep config and exit")
    val.add_argument("--config", required=True, help="path to the sweep config JSON")
    return parser


def _cmd_sweep(config: SweepConfig, out: Path, jobs: int) -> int:
    from .plots import plot_heatmap_diff, plot_heatmap_logmse

    out.mkdir(parents=True, exist_ok=True)
    results = run_sweep(config, jobs=jobs)
    files = [emit_csv(results, out / "results.csv")]

    grouped: dict[tuple[str, str], list] = defaultdict(list)
    for row in results:
        grouped[(row.reward, row.correction)].append(row)
    for (reward, correction), rows in sorted(grouped.items()):
        name = f"heatmap_logmse_reward-{reward}_{correction}.svg"
        files.append(plot_heatmap_logmse(rows, out / name))
    if "none" in config.corrections:
        for (reward, correction), rows in sorted(grouped.items()):
            if correction == "none":
                continue
            name = f"heatmap_diff_reward-{reward}_{correction}-vs-none.svg"
            files.append(plot_heatmap_diff(grouped[(reward, "none")], rows, out / name))

    write_manifest(out, config, files)
    ok = sum(r.status == "ok" for r in results)
    print(f"wrote {len(files) + 1} files to {out} ({ok}/{len(results)} cells ok)")
    return 0


def _cmd_features(config: SweepConfig, out: Path) -> int:
    from .harness import _env_and_value
    from .plots import plot_features_1d, plot_features_2d, plot_stationary

    out.mkdir(parents=True, exist_ok=True)
    e_max = max(config.feature_counts)
    shape = None if config.env_kind == "linear" else config.env_size
    files: list[Path] = []
    for position in config.reward_positions:
        env, solution = _env_and_value(config.env_kind, config.env_size, position, config.gamma)
        label = config.reward_label(position)
        for param in config.directedness_grid:
            emitted_stationary = False
            for correction in config.corrections:
                try:
                    cell = compute_cell(env, solution, config.behavior, param, correction, e_max)
                except (NonErgodicError, UnstableChainError) as exc:
                    print(f"skipping reward={label} param={param:g} {correction}: {exc}",
                          file=sys.stderr)
                    continue
                if not emitted_stationary:
                    name = f"stationary_reward-{label}_param-{param:g}.svg"
                    files.append(plot_stationary(cell.chain.mu, out / name, shape=shape))
                    emitted_stationary = True
                name = f"features_reward-{label}_param-{param:g}_{correction}.svg"
                if shape is None:
                    files.append(plot_features_1d(cell.basis, out / name))
                else:
                    files.append(plot_features_2d(cell.basis, shape, out / name))
    if not files:
        print("no cell produced a usable chain; nothing to plot", file=sys.stderr)
        return 2
    write_manifest(out, config, files)
    print(f"wrote {len(files) + 1} files to {out}")
    return 0


def _cmd_validate(config: SweepConfig) -> int:
    cells = (len(config.directedness_grid) * len(config.reward_positions)
             * len(config.corrections) * len(config.feature_counts))
    print(f"config ok: {config.env_name}, {config.behavior}, {cells} result rows, "
          f"hash {config.config_hash()[:12]}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "sweep":
            return _cmd_sweep(config, Path(args.out), args.jobs)
        if args.command == "features":
            return _cmd_features(config, Path(args.out))
        return _cmd_validate(config)
    except Exception as exc:  # surfaced with context; exit code 2 per contract
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
