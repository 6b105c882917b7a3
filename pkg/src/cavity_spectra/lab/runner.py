"""Run one configured experiment and write its report directory."""
import os
from dataclasses import dataclass

from .. import __version__
from ..exceptions import NumericalError
from .config import resolve_config
from .experiments import RUNNERS, make_setup
from .report import atomic_write, blob_hash, branches_svg, canonical_json, csv_text, json_text


@dataclass(frozen=True)
class Report:
    """Paths and content of a finished experiment."""

    directory: str
    files: tuple
    data: dict


def run(config, out_dir=None):
    """Validate ``config``, run its experiment, and write the report files.

    Files are written atomically.  The report embeds the resolved config and
    its git-style blob hash, so every table can be regenerated from it.
    """
    resolved = resolve_config(config)
    out_dir = out_dir or resolved["output"]["directory"]
    kind = resolved["kind"]
    try:
        outcome = RUNNERS[kind](make_setup(resolved))
    except NumericalError as exc:
        # keep the exception type (exit code) and add the experiment context
        exc.args = (f"{kind}: {exc}",) + exc.args[1:]
        raise

    written = []
    for name, (header, rows) in sorted(outcome.tables.items()):
        path = os.path.join(out_dir, name)
        atomic_write(path, csv_text(header, rows))
        written.append(name)
    if resolved["output"]["plot"] and outcome.curves is not None:
        atomic_write(os.path.join(out_dir, "branches.svg"), branches_svg(outcome.curves, title=kind))
        written.append("branches.svg")
    data = {
        "kind": kind,
        "version": __version__,
        "config": resolved,
        "config_hash": blob_hash(canonical_json(resolved)),
        "files": sorted(written + ["report.json"]),
        "results": outcome.results,
    }
    atomic_write(os.path.join(out_dir, "report.json"), json_text(data))
    return Report(directory=out_dir, files=tuple(data["files"]), data=data)
