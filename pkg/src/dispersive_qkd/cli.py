"""Command-line front end.

Exit status: 0 on success, 1 on validation errors, 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, apply_overrides, build_config, emit_config, read_document
from .devices import DEFAULT_CATALOG, catalog_metadata, load_catalog
from .output import write_csv, write_sidecar
from .presets import PRESETS, appendix_config

log = logging.getLogger("dispersive_qkd")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config, or a JSON sidecar from an earlier run")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (dotted path or alias), repeatable")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--catalog", help="YAML device catalog")
    p.add_argument("--workers", type=int, help="worker threads for grid evaluation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispersive-qkd",
        description="Key rate and secure distance for entanglement-based BB84 over dispersive fiber.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("point", help="evaluate one configuration"))
    _common(sub.add_parser("sweep", help="evaluate the configured grid"))
    _common(sub.add_parser("maxdist", help="maximal secure length of Bob's link"))
    p = sub.add_parser("preset", help="regenerate the data behind a figure")
    p.add_argument("name", choices=sorted(PRESETS))
    _common(p)
    p = sub.add_parser("rerun", help="repeat a run from its JSON sidecar")
    p.add_argument("sidecar")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--workers", type=int)
    return parser


def _resolve(args: argparse.Namespace) -> tuple[str, RunConfig]:
    if args.command == "rerun":
        doc = json.loads(Path(args.sidecar).read_text(encoding="utf-8"))
        if not isinstance(doc, dict) or "config" not in doc or "command" not in doc:
            raise ConfigError(f"{args.sidecar}: not a sidecar file")
        cfg = build_config(doc["config"])
        command = doc["command"]
        name = doc.get("preset") if command == "preset" else command
        extra = []
    else:
        doc = read_document(args.config)
        cfg = build_config(apply_overrides(doc, args.set))
        name = args.name if args.command == "preset" else args.command
        extra = [("catalog", args.catalog)]
        command = args.command
    updates = {k: v for k, v in [("output", args.output), *extra] if v is not None}
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError(f"--workers: must be >= 1, got {args.workers}")
        updates["workers"] = args.workers
    cfg = replace(cfg, preset=name, **updates)
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown name {name!r}")
    if name == "figA1":
        cfg = appendix_config(cfg)
    return command, cfg


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        command, cfg = _resolve(args)
        catalog = load_catalog(cfg.catalog) if cfg.catalog else DEFAULT_CATALOG
        tables = PRESETS[cfg.preset](cfg, catalog)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    main_path = Path(cfg.output or f"{cfg.preset}.csv")
    try:
        written = []
        for suffix, columns, rows in tables:
            path = main_path if not suffix else main_path.with_name(f"{main_path.stem}_{suffix}.csv")
            write_csv(path, columns, rows)
            written.append(path.name)
            log.info("wrote %s (%d rows)", path, len(rows))
        side = write_sidecar(main_path, command, cfg.preset if command in ("preset", "rerun") else None,
                             emit_config(cfg), catalog_metadata(catalog), written)
        log.info("wrote %s", side)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
