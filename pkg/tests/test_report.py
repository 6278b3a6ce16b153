import csv
import io
import json

import pytest

from report import SCHEMA_VERSION, ResultCollection, ResultRecord, columns_to_rows


def _collection():
    report = ResultCollection('zeta', {'bc': 'DD'})
    report.add('Z(2)', 'zeta', {'s': 2.0}, {'re': 1 / 3, 'pole_order': 0})
    report.add('curve', 'curve', {'which': 'psi'}, rows=[{'x': 0.0, 'value': 0.0},
                                                         {'x': 1.0, 'value': float('nan')}])
    return report


def test_reports_are_deterministic():
    assert _collection().to_json() == _collection().to_json()
    assert _collection().to_csv() == _collection().to_csv()


def test_record_ids_follow_configuration():
    a = ResultRecord('Z', 'zeta', {'s': 2.0})
    b = ResultRecord('Z', 'zeta', {'s': 3.0})
    assert a.id != b.id
    assert a.id == ResultRecord('Z', 'zeta', {'s': 2.0}, {'re': 1.0}).id


def test_values_are_cleaned_for_json():
    record = ResultRecord('Z', 'zeta', {}, {'re': 1 / 3, 'bad': float('inf'), 'c': 1 + 2j,
                                            'flag': True})
    values = record.to_dict(precision=4)['values']
    assert values == {'re': 0.3333, 'bad': None, 'c': {'re': 1.0, 'im': 2.0}, 'flag': True}


def test_csv_layout():
    text = _collection().to_csv()
    lines = text.strip().split('\n')
    assert lines[0] == 'record,name,re,pole_order,x,value'
    assert len(lines) == 4
    # non-finite values become empty fields
    assert lines[-1].endswith(',1.0,')


def test_export_and_import():
    report = _collection()
    data = json.loads(report.to_json())
    assert data['schema_version'] == SCHEMA_VERSION
    restored = ResultCollection()
    assert restored.import_from_dict(data)
    assert restored.command == 'zeta'
    assert restored.get_record_ids() == report.get_record_ids()
    data['schema_version'] = '0.1'
    assert not ResultCollection().import_from_dict(data)
    assert not ResultCollection().import_from_dict({'command': 'zeta'})


def test_rename_and_remove():
    report = _collection()
    old = report.get_record_ids()[0]
    assert report.rename_record(old, 'Z(2) renamed')
    assert report.get_record(old) is None
    names = [r.name for r in report.get_all_records().values()]
    assert 'Z(2) renamed' in names
    assert not report.rename_record('missing', 'x')
    assert report.remove_record(report.get_record_ids()[0])
    assert report.get_record_count() == 1


def test_failed_records():
    report = ResultCollection('verify')
    report.add('a', 'identity', {'n': 1}, {'passed': True})
    report.add('b', 'identity', {'n': 2}, {'passed': False}, status='failed')
    assert [r.name for r in report.failed] == ['b']


def test_columns_to_rows():
    assert columns_to_rows({'x': [1, 2], 'y': [3, 4]}) == [{'x': 1, 'y': 3}, {'x': 2, 'y': 4}]
    assert columns_to_rows({}) == []
    with pytest.raises(ValueError):
        columns_to_rows({'x': [1, 2], 'y': [3]})


def test_csv_quotes_commas_and_nested_values():
    report = ResultCollection('table', {})
    report.add('a, b', 'table', {}, {'laurent': {'c_minus1': 0.5, 'c_0': -1.0}, 'note': 'x,"y"'})
    rows = list(csv.reader(io.StringIO(report.to_csv())))
    assert rows[0] == ['record', 'name', 'laurent', 'note']
    assert rows[1][1] == 'a, b'
    assert json.loads(rows[1][2]) == {'c_minus1': 0.5, 'c_0': -1.0}
    assert rows[1][3] == 'x,"y"'
