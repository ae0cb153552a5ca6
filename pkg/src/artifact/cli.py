"""Command-line entry point.

Exit status: 0 on success, 1 on any error, 2 when the verification suite
has failing checks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from .commands import COMMAND_TABLE
from .config import COMMANDS, FORMATS, RunConfig, load_config
from .errors import ArtifactError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2

log = logging.getLogger("artifact")


def _jsonable(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def render_json(cfg: RunConfig, results: dict, status: str) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "config": cfg.canonical(),
        "status": status,
        "results": results,
    }
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def render_csv(cfg: RunConfig, table: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} command={cfg.command} "
              f"config_hash={cfg.config_hash} seed={cfg.seed}\n")
    if table:
        keys = list(dict.fromkeys(k for row in table for k in row))
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in table:
            w.writerow({k: _jsonable(v) if hasattr(v, "item") else v for k, v in row.items()})
    return buf.getvalue()


def report_path(out_dir: Path, cfg: RunConfig) -> Path:
    """Reports are never overwritten: a repeated hash gets a numeric suffix."""
    stem = f"{cfg.command}-{cfg.config_hash}"
    path = out_dir / f"{stem}.{cfg.format}"
    k = 1
    while path.exists():
        path = out_dir / f"{stem}.{k}.{cfg.format}"
        k += 1
    return path


def run(cfg: RunConfig) -> tuple[int, Path]:
    outcome = COMMAND_TABLE[cfg.command](cfg)
    status = "failed" if outcome.failed else "ok"
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = report_path(out_dir, cfg)
    text = render_json(cfg, outcome.results, status) if cfg.format == "json" \
        else render_csv(cfg, outcome.table)
    path.write_text(text)
    if outcome.failed:
        log.error("verification failed: %s", ", ".join(outcome.failed))
        return EXIT_VERIFY, path
    return EXIT_OK, path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--command", choices=COMMANDS, help="override the config's command")
    p.add_argument("--seed", type=int, help="override the config's seed")
    p.add_argument("--out", help="report directory (overrides 'output')")
    p.add_argument("--format", choices=FORMATS, help="report format")
    p.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    overrides = {"command": args.command, "seed": args.seed, "output": args.out,
                 "format": args.format, "jobs": args.jobs}
    try:
        cfg = load_config(args.config, overrides)
        if cfg.jobs is None:
            cfg.jobs = os.cpu_count() or 1
        code, path = run(cfg)
    except (ArtifactError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
