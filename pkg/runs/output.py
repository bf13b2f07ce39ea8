"""
Run outputs: CSV tables, their JSON mirror and the manifest digest.

Tables are written with one header row. Floats are rendered with ``repr`` so
equal values always give equal bytes, and the JSON mirror carries the same
rows next to the manifest, the parameters and any arrays a command adds.
"""

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

logger = logging.getLogger(__name__)


class LabJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also knows numpy values, complex numbers and dataclasses."""

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, complex):
            return {'re': o.real, 'im': o.imag}
        if isinstance(o, Path):
            return str(o)
        if is_dataclass(o) and not isinstance(o, type):
            return asdict(o)
        return super().default(o)


def to_jsonable(value):
    return json.loads(json.dumps(value, cls=LabJSONEncoder))


def compute_digest(command, parameters):
    """sha256 over the command name and its parameters, independent of key order."""
    payload = json.dumps({'command': command, 'parameters': parameters},
                         cls=LabJSONEncoder, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name} has {len(self.columns)} columns, got {len(values)} values")
        self.rows.append(values)

    def as_dict(self):
        return {'columns': list(self.columns), 'rows': [[_cell(value) for value in row] for row in self.rows]}


@dataclass
class RunOutput:
    """What a command hands back for publishing."""

    tables: list
    data: dict = field(default_factory=dict)
    seed: int = None


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def format_cell(value):
    value = _cell(value)
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, table):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_cell(value) for value in row])
    logger.debug("wrote %d rows to %s", len(table.rows), path)
    return path


def write_json(path, payload):
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(payload, handle, cls=LabJSONEncoder, indent=2, sort_keys=True)
        handle.write('\n')
    return path
