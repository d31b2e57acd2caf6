"""Chain CSV and JSON report writers."""
import csv
import json
import math
from pathlib import Path

import numpy as np


def jsonable(value):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(document, indent=2):
    return json.dumps(jsonable(document), indent=indent, allow_nan=False)


def write_json(path, document):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document) + '\n', encoding='utf-8')
    return path


def write_chain_csv(path, chain):
    """Header of slot names, one row per iteration, floats at full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(chain.slot_names)
        for row in chain.samples:
            writer.writerow([format(float(x), '.17g') for x in row])
    return path


def sidecar_path(path):
    return Path(path).with_suffix('.json')


def run_metadata(graph, chain, report=None):
    document = {
        'model': graph.name,
        'model_digest': graph.digest,
        'seed': chain.seed,
        'iterations': chain.iterations,
        'sampling_seconds': chain.sampling_seconds,
        'plan': chain.plan.to_json(chain.slot_names) if chain.plan is not None else None,
        'acceptance': chain.acceptance,
    }
    if report is not None:
        document['report'] = report.to_dict()
    return document


def write_rows_csv(path, rows, fieldnames):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(jsonable(row))
    return path
