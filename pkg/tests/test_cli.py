import json

import pytest

from cli import (EXIT_CONFIG, EXIT_OK, _collocation_grid, apply_overrides, build_parser,
                 load_presets, main, parse_param, RunConfig)
from continuation import sinusoidal_exact_sums
from utils import TOLERANCES, ConfigError, ConfigManager


def _records(text):
    data = json.loads(text)
    return {r['name']: r for r in data['records']}


def test_parse_param():
    assert parse_param('a=[0.2, 0.1]') == ('a', [0.2, 0.1])
    assert parse_param(' eta = 0.3') == ('eta', 0.3)
    with pytest.raises(ConfigError):
        parse_param('eta')


def test_overrides_leave_the_preset_untouched():
    preset = {'density': {'kind': 'sinusoidal', 'params': {'eta': 0.1}}}
    out = apply_overrides(preset, eta=0.2, params=['L=0.7'])
    assert out['density']['params'] == {'eta': 0.2, 'L': 0.7}
    assert preset['density']['params'] == {'eta': 0.1}


def test_presets_resolve_into_run_config():
    presets = load_presets()
    assert 'sinusoidal' in presets
    args = build_parser().parse_args(['zeta', '--preset', 'sinusoidal', '--eta', '0.2'])
    config = RunConfig.from_args(args, presets)
    assert config.s == [1.0, 2.0, 3.0]
    assert config.density_spec().param_dict['eta'] == 0.2
    assert 'out_path' not in config.to_dict()


def test_unknown_preset_is_a_config_error(capsys):
    assert main(['zeta', '--preset', 'nope']) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err.strip().split('\n')[-1])
    assert err['error']['type'] == 'ConfigError'


def test_bad_order_and_missing_s(tmp_path):
    assert main(['zeta', '--preset', 'sinusoidal', '--order', '3']) == EXIT_CONFIG
    density_file = tmp_path / 'density.json'
    density_file.write_text(json.dumps({'kind': 'sinusoidal', 'params': {'eta': 0.1}}))
    assert main(['zeta', '--density-file', str(density_file)]) == EXIT_CONFIG


def test_closed_form_zeta_report(capsys):
    assert main(['zeta', '--preset', 'sinusoidal', '--method', 'closed']) == EXIT_OK
    records = _records(capsys.readouterr().out)
    exact = sinusoidal_exact_sums(0.1)
    for s in (1, 2, 3):
        values = records[f"Z({s})"]['values']
        assert values['re'] == pytest.approx(exact[s], rel=1e-10)
        assert values['method'] == 'closed_form'
        assert values['pole'] is False


def test_closed_method_without_closed_form():
    assert main(['zeta', '--preset', 'borg', '--method', 'closed']) == EXIT_CONFIG


def test_series_zeta_to_csv_file(tmp_path):
    out = tmp_path / 'zeta.csv'
    code = main(['zeta', '--preset', 'sinusoidal', '--method', 'series', '--s', '2',
                 '--ntrunc', '40', '--format', 'csv', '--out', str(out)])
    assert code == EXIT_OK
    lines = out.read_text().strip().split('\n')
    assert lines[0].startswith('record,name,')
    assert len(lines) == 2


def test_casimir_of_sinusoidal_string(capsys):
    assert main(['casimir', '--preset', 'sinusoidal']) == EXIT_OK
    values = _records(capsys.readouterr().out)['E_C']['values']
    assert values['method'] == 'closed_form'
    assert values['divergence']['finite'] is True
    assert values['laurent']['c_minus1'] > 0


def test_verify_exit_code(capsys):
    assert main(['verify', '--suite', 'piecewise']) == EXIT_OK
    records = json.loads(capsys.readouterr().out)['records']
    assert len(records) == 2
    assert all(r['status'] == 'ok' for r in records)
    assert main(['verify', '--suite', 'nope']) == EXIT_CONFIG


def test_curve_marks_poles(capsys):
    code = main(['curve', 'psi', '--param', 'start=0', '--param', 'stop=2', '--param', 'num=5'])
    assert code == EXIT_OK
    rows = _records(capsys.readouterr().out)['psi']['rows']
    assert [r['x'] for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert rows[0]['value'] == pytest.approx(0.0, abs=1e-12)
    assert rows[2]['value'] is None


def test_table1_covers_every_preset_alpha(capsys):
    code = main(['table', 'table1', '--ntrunc', '8', '--grid', '12'])
    assert code == EXIT_OK
    rows = _records(capsys.readouterr().out)['table1']['rows']
    assert [row['param'] for row in rows] == [f"alpha={a:g}" for a in
                                              load_presets()['deformed_square']['alphas']]
    for row in rows:
        assert {'z', 'diag', 'num', 'weyl', 'diag_reference', 'diag_dev'} <= set(row)
        # the Weyl column does not depend on truncation
        assert abs(row['weyl_dev']) < 1e-6


@pytest.mark.slow
def test_table1_desk_scale(capsys):
    assert main(['table', 'table1']) == EXIT_OK
    for row in _records(capsys.readouterr().out)['table1']['rows']:
        assert abs(row['diag_dev']) < 1e-7
        assert abs(row['weyl_dev']) < 1e-6
        assert abs(row['num_dev']) < 1e-4


@pytest.mark.slow
def test_table2_desk_scale(capsys):
    assert main(['table', 'table2']) == EXIT_OK
    rows = _records(capsys.readouterr().out)['table2']['rows']
    assert [row['param'] for row in rows] == ['r=0.1', 'r=0.5', 'r=0.9']
    for row in rows:
        assert abs(row['z_dev']) < 1e-8
        assert abs(row['diag_dev']) < 1e-8
        # 10⁴ Bessel roots plus the Weyl tail against the exact column
        assert abs(row['num'] - row['z_reference']) < 1e-7
        assert abs(row['num_dev']) < 1e-7


def test_config_pole_tolerance_reaches_pole_detection(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(TOLERANCES, 'pole', TOLERANCES.pole)
    argv = ['curve', 'psi', '--param', 'start=0.995', '--param', 'stop=0.995', '--param', 'num=1']
    assert main(argv) == EXIT_OK
    assert _records(capsys.readouterr().out)['psi']['rows'][0]['value'] is not None

    wide = tmp_path / 'wide.json'
    wide.write_text(json.dumps({'tolerances': {'pole': 0.01}}))
    assert main(argv + ['--config', str(wide)]) == EXIT_OK
    assert TOLERANCES.pole == 0.01
    assert _records(capsys.readouterr().out)['psi']['rows'][0]['value'] is None


def test_config_k_band_limits_second_order(tmp_path, capsys):
    argv = ['zeta', '--preset', 'sinusoidal', '--method', 'series', '--s', '2', '--ntrunc', '40']
    assert main(argv + ['--order', '1']) == EXIT_OK
    first = _records(capsys.readouterr().out)['Z(2)']['values']['re']
    assert main(argv) == EXIT_OK
    banded = _records(capsys.readouterr().out)['Z(2)']['values']
    assert banded['details']['second_order'] != 0
    assert banded['re'] != pytest.approx(first, rel=1e-12)

    diagonal_only = tmp_path / 'band.json'
    diagonal_only.write_text(json.dumps({'truncation': {'k_band': 0}}))
    assert main(argv + ['--config', str(diagonal_only)]) == EXIT_OK
    values = _records(capsys.readouterr().out)['Z(2)']['values']
    assert values['details']['second_order'] == 0
    assert values['re'] == pytest.approx(first, rel=1e-12)


def test_collocation_grid_resolution():
    manager = ConfigManager()
    manager.set('collocation.grid_n', 12)
    parser = build_parser()

    def grid(*argv):
        return _collocation_grid(RunConfig.from_args(parser.parse_args(['table', 'table1', *argv])),
                                 manager)

    assert grid() == 12
    assert grid('--scale', 'full') == 99
    assert grid('--grid', '7') == 7
