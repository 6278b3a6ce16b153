"""
Result records and collections for CLI reports.

Each record stores the configuration it was computed from, named scalar
values and optional tabular rows (spectra, table columns, curves).
Record ids are hashes of name and configuration, so two runs of the same
command produce byte-identical reports.
"""

import csv
import io
import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from utils import config_hash

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1.0'


def _clean(value: Any, precision: int) -> Any:
    """JSON-safe copy; floats rounded to the export precision, non-finite to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v, precision) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v, precision) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _clean(value.real, precision), 'im': _clean(value.imag, precision)}
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{precision}g}")
    return value


class ResultRecord:
    """One computed result with its configuration."""

    def __init__(self, name: str, kind: str, config: Dict[str, Any],
                 values: Optional[Dict[str, Any]] = None,
                 rows: Optional[List[Dict[str, Any]]] = None,
                 status: str = 'ok', notes: str = ''):
        self.name = name
        self.kind = kind
        self.config = dict(config)
        self.values = dict(values or {})
        self.rows = list(rows or [])
        self.status = status
        self.notes = notes
        self.id = config_hash({'name': name, 'kind': kind, 'config': self.config})

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_dict(self, precision: int = 12) -> Dict[str, Any]:
        return {
            'id': self.id,
            'name': self.name,
            'kind': self.kind,
            'status': self.status,
            'config': _clean(self.config, precision),
            'config_hash': self.config_hash,
            'values': _clean(self.values, precision),
            'rows': _clean(self.rows, precision),
            'notes': self.notes
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ResultRecord':
        record = cls(data['name'], data['kind'], data.get('config', {}),
                     data.get('values'), data.get('rows'), data.get('status', 'ok'),
                     data.get('notes', ''))
        if data.get('id') and data['id'] != record.id:
            logger.warning("record %s: stored id %s does not match its config", data['name'], data['id'])
        return record


class ResultCollection:
    """Ordered collection of result records for one CLI run."""

    def __init__(self, command: str = '', config: Optional[Dict[str, Any]] = None):
        self.command = command
        self.config = dict(config or {})
        self.records: Dict[str, ResultRecord] = {}

    def add_record(self, record: ResultRecord) -> str:
        """
        Add a record to the collection.

        Args:
            record: ResultRecord

        Returns:
            Record id (an identical record replaces the earlier one)
        """
        if record.id in self.records:
            logger.debug("replacing record %s (%s)", record.id, record.name)
        self.records[record.id] = record
        return record.id

    def add(self, name: str, kind: str, config: Dict[str, Any], values: Optional[Dict[str, Any]] = None,
            rows: Optional[List[Dict[str, Any]]] = None, status: str = 'ok', notes: str = '') -> str:
        return self.add_record(ResultRecord(name, kind, config, values, rows, status, notes))

    def remove_record(self, record_id: str) -> bool:
        if record_id in self.records:
            del self.records[record_id]
            return True
        return False

    def get_record(self, record_id: str) -> Optional[ResultRecord]:
        return self.records.get(record_id)

    def rename_record(self, record_id: str, new_name: str) -> bool:
        """Rename a record; the id follows the new name."""
        record = self.records.pop(record_id, None)
        if record is None:
            return False
        renamed = ResultRecord(new_name, record.kind, record.config, record.values,
                               record.rows, record.status, record.notes)
        self.records[renamed.id] = renamed
        return True

    def clear_all(self):
        self.records.clear()

    def get_all_records(self) -> Dict[str, ResultRecord]:
        return self.records.copy()

    def get_record_count(self) -> int:
        return len(self.records)

    def get_record_ids(self) -> List[str]:
        return list(self.records.keys())

    @property
    def failed(self) -> List[ResultRecord]:
        return [r for r in self.records.values() if r.status == 'failed']

    def export_to_dict(self, precision: int = 12) -> dict:
        """Export the collection in the versioned report layout."""
        return {
            'schema_version': SCHEMA_VERSION,
            'command': self.command,
            'config': _clean(self.config, precision),
            'config_hash': config_hash(self.config),
            'records': [r.to_dict(precision) for r in self.records.values()]
        }

    def import_from_dict(self, data: dict) -> bool:
        """Import a collection exported by export_to_dict."""
        if 'records' not in data:
            return False
        if data.get('schema_version') != SCHEMA_VERSION:
            logger.error("unsupported report schema %s", data.get('schema_version'))
            return False
        try:
            records = [ResultRecord.from_dict(r) for r in data['records']]
        except (KeyError, TypeError) as e:
            logger.error("Error importing report: %s", e)
            return False
        self.clear_all()
        self.command = data.get('command', '')
        self.config = dict(data.get('config', {}))
        for record in records:
            self.add_record(record)
        return True

    def to_json(self, filename: Optional[str] = None, precision: int = 12) -> str:
        text = json.dumps(self.export_to_dict(precision), indent=2, sort_keys=True)
        if filename:
            with open(filename, 'w') as f:
                f.write(text + '\n')
        return text

    def to_csv(self, filename: Optional[str] = None, precision: int = 12) -> str:
        """
        Flatten records to CSV: one line per row of every record, or one
        line of scalar values for records without rows.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        columns = self._csv_columns()
        writer.writerow(['record', 'name'] + columns)
        for record in self.records.values():
            entries = record.rows or [record.values]
            for entry in entries:
                cleaned = _clean(entry, precision)
                row = [record.id, record.name]
                for col in columns:
                    v = cleaned.get(col, '')
                    row.append('' if v is None else _csv_field(v))
                writer.writerow(row)
        text = buffer.getvalue()
        if filename:
            with open(filename, 'w') as f:
                f.write(text)
        return text

    def _csv_columns(self) -> List[str]:
        columns: List[str] = []
        for record in self.records.values():
            for entry in (record.rows or [record.values]):
                for key in entry:
                    if key not in columns:
                        columns.append(key)
        return columns


def _csv_field(value: Any) -> str:
    if isinstance(value, dict) and set(value) == {'re', 'im'}:
        return str(value['re'])
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def columns_to_rows(columns: Dict[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """{'s': [...], 'value': [...]} → [{'s': .., 'value': ..}, ...]."""
    keys = list(columns)
    if not keys:
        return []
    length = len(columns[keys[0]])
    if any(len(columns[k]) != length for k in keys):
        raise ValueError("columns have different lengths")
    return [{k: columns[k][i] for k in keys} for i in range(length)]
