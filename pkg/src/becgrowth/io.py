"""CSV emission and run manifests."""
from __future__ import annotations

import configparser
import csv
import datetime as _dt
import math
import os

from . import __version__
from .config import config_to_sections

CSV_SCHEMA_VERSION = 1


def fmt(x):
    """Floats with 17 significant digits; None/NaN as empty/'nan'."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    try:
        xf = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isnan(xf):
        return "nan"
    return f"{xf:.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_columns(path, header, columns):
    return write_csv(path, header, zip(*columns))


def write_dict_rows(path, rows):
    header = list(rows[0].keys())
    return write_csv(path, header, ([r[k] for k in header] for r in rows))


def write_manifest(path, subcommand, config=None, seed=None, outputs=(), extra=None):
    """Plain-text manifest, loadable back as a scenario file (the [run] section is ignored)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["run"] = {
        "subcommand": subcommand,
        "artifact_version": __version__,
        "csv_schema_version": str(CSV_SCHEMA_VERSION),
        "seed": "" if seed is None else str(seed),
        "outputs": ", ".join(os.path.basename(p) for p in outputs),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    for k, v in (extra or {}).items():
        cp["run"][k] = str(v)
    if config is not None:
        for sec, vals in config_to_sections(config).items():
            cp[sec] = vals
    with open(path, "w") as fh:
        cp.write(fh)
    return path
