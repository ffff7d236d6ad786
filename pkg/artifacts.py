import json
import logging
import math
import platform
from pathlib import Path

import attrs
import numpy as np
import pandas as pd
import scipy
from attrs import field, frozen

from schemas import validate_document, validate_table

log = logging.getLogger(__name__)

LAB_VERSION = "0.3.0"
MANIFEST = "manifest.json"


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def dumps(document):
    return json.dumps(_plain(document), sort_keys=True, indent=2) + "\n"


@frozen(eq=False)
class ExperimentRecord:
    subcommand: str
    seed: int
    config: dict
    summary: dict
    tables: dict = field(factory=dict)
    documents: dict = field(factory=dict)

    def with_table(self, name, frame, contract=None):
        validate_table(contract or name, frame)
        return attrs.evolve(self, tables={**self.tables, name: frame})

    def with_document(self, name, document, schema_name=None):
        validate_document(schema_name or name, _plain(document))
        return attrs.evolve(self, documents={**self.documents, name: document})


def versions():
    return {
        "lab": LAB_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def _summary_frame(summary):
    return pd.json_normalize(_plain(summary), sep=".")


def write_record(record, output_dir, fmt="json"):
    """Write every file of the record, then the manifest listing them; returns the written paths."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    validate_document(record.subcommand, _plain(record.summary))
    contents = {}
    if fmt == "json":
        contents[f"{record.subcommand}.json"] = dumps(record.summary)
    else:
        contents[f"{record.subcommand}.csv"] = _summary_frame(record.summary).to_csv(index=False)
    for name, frame in record.tables.items():
        contents[f"{name}.csv"] = frame.to_csv(index=False)
    for name, document in record.documents.items():
        contents[f"{name}.json"] = dumps(document)
    manifest = {
        "subcommand": record.subcommand,
        "seed": record.seed,
        "config": record.config,
        "versions": versions(),
        "files": sorted(contents),
    }
    validate_document("manifest", _plain(manifest))
    contents[MANIFEST] = dumps(manifest)
    written = []
    for name in sorted(contents):
        path = output_dir / name
        path.write_text(contents[name], encoding="utf-8")
        written.append(path)
    log.info("wrote %d files to %s", len(written), output_dir)
    return written
