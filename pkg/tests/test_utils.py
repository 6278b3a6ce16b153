import json

import pytest

from utils import (ConfigError, ConfigManager, DivergenceError, DomainError, SpectralError,
                   Tolerances, config_hash, exact_sum)


def test_error_hierarchy():
    assert issubclass(DomainError, ValueError)
    for cls in (DomainError, DivergenceError, ConfigError):
        assert issubclass(cls, SpectralError)


def test_exact_sum_keeps_small_terms():
    assert exact_sum([1e16, 1.0, -1e16]) == 1.0
    assert exact_sum([[0.1] * 10]) == 1.0


def test_config_hash_ignores_key_order():
    assert config_hash({'a': 1, 'b': [1, 2]}) == config_hash({'b': [1, 2], 'a': 1})
    assert config_hash({'a': 1}) != config_hash({'a': 2})
    assert len(config_hash({})) == 12


def test_default_configuration():
    manager = ConfigManager()
    assert manager.get('truncation.one_d') == 200
    assert manager.get('export.precision') == 12
    assert manager.get('missing.key', 'fallback') == 'fallback'
    manager.set('cutoff.points', 24)
    manager.set('new.section.value', 1)
    assert manager.get('cutoff.points') == 24
    assert manager.get('new.section.value') == 1


def test_yaml_file_merges_over_defaults(tmp_path):
    path = tmp_path / 'run.yaml'
    path.write_text('truncation:\n  one_d: 50\nlogging:\n  level: DEBUG\n')
    manager = ConfigManager(str(path))
    assert manager.get('truncation.one_d') == 50
    assert manager.get('truncation.two_d') == 64
    assert manager.get('logging.level') == 'DEBUG'


def test_bad_config_files(tmp_path):
    manager = ConfigManager()
    assert not manager.load_config(str(tmp_path / 'absent.yaml'))
    listing = tmp_path / 'list.yaml'
    listing.write_text('- 1\n- 2\n')
    assert not manager.load_config(str(listing))
    broken = tmp_path / 'broken.json'
    broken.write_text('{"truncation": ')
    assert not manager.load_config(str(broken))
    assert manager.get('truncation.one_d') == 200


def test_save_config(tmp_path):
    manager = ConfigManager()
    manager.set('truncation.one_d', 321)
    target = tmp_path / 'nested' / 'saved.json'
    assert manager.save_config(str(target))
    assert json.loads(target.read_text())['truncation']['one_d'] == 321
    assert ConfigManager(str(target)).get('truncation.one_d') == 321


def test_tolerances_follow_configuration(tmp_path):
    tol = Tolerances()
    tol.configure(ConfigManager())
    assert tol == Tolerances()

    path = tmp_path / 'tight.yaml'
    path.write_text('tolerances:\n  pole: 1.0e-6\n  series_cap: 1.0e+5\n')
    tol.configure(ConfigManager(str(path)))
    assert tol.pole == 1e-6
    assert tol.series_cap == 100000 and isinstance(tol.series_cap, int)
    assert tol.imaginary == 1e-9
