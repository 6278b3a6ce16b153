"""
Command-line surface: zeta values, Casimir energies, table reproduction
and identity batteries, written as versioned JSON or CSV reports.
"""

import argparse
import copy
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

import identities
from bases import BasisSpec
from continuation import (PIECEWISE_BCS, PiecewiseParams, cylinder_casimir, dd_plus_nn_zeta,
                          divergence_check, oscillating_phi, oscillating_zeta, piecewise_casimir,
                          piecewise_zeta, psi_aux, sinusoidal_laurent, sinusoidal_zeta,
                          square_zeta, staircase_zeta, thin_annulus_casimir)
from densities import DensitySpec, make_density, mass, perimeter
from oracles import (annulus_spectrum, annulus_zeta2, collocation_2d, weyl_tail,
                     zeta_from_spectrum)
from pertzeta import ZetaValue, cutoff_casimir, make_tail, z_diag, z_perturbative
from report import ResultCollection, columns_to_rows
from specfun import riemann_zeta
from table_manager import TableManager
from utils import (TOLERANCES, ConfigError, ConfigManager, DivergenceError, DomainError,
                   PoleError, SpectralError, setup_logging)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3

COMMANDS = ('zeta', 'casimir', 'table', 'verify', 'curve')
PRESETS_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                            'configs', 'presets.yaml')

TABLE1_REFERENCE = {
    0.01: {'z': 0.06970508, 'diag': 0.06968939, 'num': 0.06970508, 'weyl': 0.04950760},
    0.02: {'z': 0.06969987, 'diag': 0.06963720, 'num': 0.06969987, 'weyl': 0.04950758},
    0.04: {'z': 0.06967869, 'diag': 0.06942953, 'num': 0.06967869, 'weyl': 0.04950735},
    0.1: {'z': 0.06951485, 'diag': 0.06802167, 'num': 0.06951486, 'weyl': 0.04949801},
    0.25: {'z': 0.06805735, 'diag': 0.06073539, 'num': 0.06805740, 'weyl': 0.04918833},
    0.5: {'z': 0.06143122, 'diag': 0.04641541, 'num': 0.06143131, 'weyl': 0.04662053},
}

TABLE2_REFERENCE = {
    0.1: {'z': 0.0257710759, 'diag': 0.0169570674, 'num': 0.0257710743, 'weyl': 0.030450016},
    0.5: {'z': 0.0057419570, 'diag': 0.0054705758, 'num': 0.0057419569, 'weyl': 0.011541075},
    0.9: {'z': 0.0000578599, 'diag': 0.0000577934, 'num': 0.0000578601, 'weyl': 0.000251957},
}

SCALES = {
    'desk': {'two_d': 32, 'roots': 10000, 'orders': 400},
    'full': {'two_d': 64, 'grid_n': 99, 'roots': 10000, 'orders': 800},
}


# --- configuration -------------------------------------------------------------

def load_presets(filename: Optional[str] = None) -> Dict[str, Any]:
    """Named parameter sets from configs/presets.yaml."""
    filename = filename or PRESETS_FILE
    try:
        with open(filename, 'r') as f:
            presets = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read presets {filename}: {e}") from e
    if not isinstance(presets, dict):
        raise ConfigError(f"presets file {filename} is not a mapping")
    return presets


def parse_param(text: str) -> Tuple[str, Any]:
    """'key=value' with the value parsed as YAML (numbers, lists, booleans)."""
    if '=' not in text:
        raise ConfigError(f"--param expects key=value, got {text!r}")
    key, raw = text.split('=', 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value of {key}: {e}") from e
    return key.strip(), value


def apply_overrides(preset: Dict[str, Any], eta: Optional[float] = None,
                    alpha: Optional[float] = None, r: Optional[float] = None,
                    params: Sequence[str] = ()) -> Dict[str, Any]:
    """Copy of a preset with density parameters overridden."""
    out = copy.deepcopy(preset)
    density = out.setdefault('density', {})
    dparams = density.setdefault('params', {})
    for key, value in (('eta', eta), ('alpha', alpha), ('r', r)):
        if value is not None:
            dparams[key] = value
    for item in params:
        key, value = parse_param(item)
        dparams[key] = value
    return out


def _load_density_file(filename: str) -> Dict[str, Any]:
    try:
        with open(filename, 'r') as f:
            data = yaml.safe_load(f) if filename.endswith(('.yaml', '.yml')) else json.load(f)
    except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read density file {filename}: {e}") from e
    if isinstance(data, dict) and 'density' in data:
        return data
    if not isinstance(data, dict) or 'kind' not in data:
        raise ConfigError(f"density file {filename} needs a 'kind' entry")
    return {'density': data}


@dataclass
class RunConfig:
    """Everything one CLI command needs, independent of argparse."""
    command: str
    preset: Optional[str] = None
    density: Dict[str, Any] = field(default_factory=dict)
    bc: str = 'DD'
    s: List[float] = field(default_factory=list)
    order: int = 2
    ntrunc: Optional[int] = None
    grid: Optional[int] = None
    output: str = 'json'
    out_path: Optional[str] = None
    which: Optional[str] = None
    scale: str = 'desk'
    suites: List[str] = field(default_factory=list)
    geometry: Optional[str] = None
    method: str = 'auto'
    extras: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace, presets: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        """
        Resolve presets, density files and overrides into a RunConfig.

        Raises:
            ConfigError: unknown preset, unreadable density file, bad values
        """
        if args.command not in COMMANDS:
            raise ConfigError(f"Unknown command: {args.command}")
        base: Dict[str, Any] = {}
        if args.preset:
            presets = load_presets() if presets is None else presets
            if args.preset not in presets:
                raise ConfigError(f"Unknown preset: {args.preset} (known: {sorted(presets)})")
            base = presets[args.preset]
        if args.density_file:
            base = {**base, **_load_density_file(args.density_file)}
        base = apply_overrides(base, args.eta, args.alpha, args.r, args.param or [])

        s_values = args.s if args.s else base.get('s', [])
        try:
            s_values = [float(v) for v in s_values]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid s values: {s_values}") from e
        if args.order not in (1, 2):
            raise ConfigError(f"--order must be 1 or 2, got {args.order}")
        extras = {k: v for k, v in base.items() if k not in ('density', 'bc', 's', 'geometry')}
        return cls(command=args.command, preset=args.preset, density=base.get('density', {}),
                   bc=args.bc or base.get('bc', 'DD'), s=s_values, order=args.order,
                   ntrunc=args.ntrunc, grid=args.grid, output=args.format, out_path=args.out,
                   which=args.which, scale=args.scale, suites=list(args.suite or []),
                   geometry=base.get('geometry', args.preset), method=args.method, extras=extras)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop('out_path')
        data.pop('output')
        return data

    def density_spec(self) -> DensitySpec:
        if not self.density.get('kind'):
            raise ConfigError("no density given (use --preset or --density-file)")
        kind = self.density.get('kind')
        if kind == 'custom':
            raise ConfigError("custom densities need a callable and cannot come from a file")
        try:
            return make_density(kind, self.density.get('params', {}))
        except DomainError as e:
            raise ConfigError(str(e)) from e

    def basis(self, density: DensitySpec) -> BasisSpec:
        try:
            if density.dim == 1:
                return BasisSpec(1, density.half_width, self.bc)
            return BasisSpec(2, density.half_width, self.bc, density.half_width_y)
        except DomainError as e:
            raise ConfigError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='spectral-zeta',
        description='Perturbative spectral zeta functions and Casimir energies of inhomogeneous strings and drums')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('which', nargs='?', default=None,
                        help='table1/table2 for "table", psi/xi/phi for "curve"')
    parser.add_argument('--preset', help='named parameter set from configs/presets.yaml')
    parser.add_argument('--density-file', help='YAML/JSON file with {kind, params}')
    parser.add_argument('--bc', help='boundary condition tag (DD, NN, DN, ND, PP, DP, DD2)')
    parser.add_argument('--s', type=float, nargs='+', help='zeta arguments')
    parser.add_argument('--order', type=int, default=2, help='perturbative order (1 or 2)')
    parser.add_argument('--ntrunc', type=int, help='truncation level of the matrix-element table')
    parser.add_argument('--grid', type=int, help='collocation grid points per axis')
    parser.add_argument('--format', choices=('json', 'csv'), default=None)
    parser.add_argument('--out', help='output file (stdout by default)')
    parser.add_argument('--eta', type=float)
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--r', type=float)
    parser.add_argument('--param', action='append', help='density parameter override key=value')
    parser.add_argument('--scale', choices=tuple(SCALES), default='desk')
    parser.add_argument('--suite', action='append', help='verification suite (repeatable)')
    parser.add_argument('--method', choices=('auto', 'closed', 'series'), default='auto')
    parser.add_argument('--config', help='configuration file (YAML or JSON)')
    parser.add_argument('--log-level', help='logging level (overrides the configuration)')
    return parser


# --- zeta ------------------------------------------------------------------------

def _closed_form_zeta(s: float, density: DensitySpec, bc: str) -> Optional[ZetaValue]:
    """Continued closed form for catalog strings and the square, if one exists."""
    p = density.param_dict
    if density.kind == 'piecewise' and bc in PIECEWISE_BCS:
        return piecewise_zeta(bc, s, PiecewiseParams.from_density(density))
    if bc != 'DD':
        return None
    if density.kind == 'sinusoidal':
        return sinusoidal_zeta(s, p['eta'], density.half_width)
    if density.kind == 'oscillating':
        return oscillating_zeta(s, p['eta'], p['eps_bar'], p.get('ell'), density.half_width)
    if density.kind == 'staircase':
        return staircase_zeta(s, p['eta'], p['eps_bar'], p.get('ell'), density.half_width,
                              int(p['N']))
    if density.kind == 'constant' and density.dim == 2 and p.get('value', 1.0) == 1.0 \
            and density.half_width == density.half_width_y:
        return square_zeta(s, density.half_width)
    return None


def _series_zeta(s: float, density: DensitySpec, basis: BasisSpec, level, order: int,
                 manager: ConfigManager) -> ZetaValue:
    table = TableManager().get_or_build(density, basis, level,
                                        workers=manager.get('performance.max_worker_threads', 1))
    try:
        tail = make_tail(density, basis, config=manager)
    except DomainError as e:
        logger.warning("no diagonal tail for %s: %s", density.density_id, e)
        tail = None
    return z_perturbative(s, table, tail, order, k_band=manager.get('truncation.k_band'))


def _default_level(density: DensitySpec, config: RunConfig, manager: ConfigManager):
    if config.ntrunc:
        return config.ntrunc
    return manager.get('truncation.one_d' if density.dim == 1 else 'truncation.two_d')


def cmd_zeta(config: RunConfig, manager: ConfigManager) -> ResultCollection:
    """Z(s) for every requested s, closed form where available, else the perturbative series."""
    if not config.s:
        raise ConfigError("zeta needs at least one --s value")
    density = config.density_spec()
    basis = config.basis(density)
    level = _default_level(density, config, manager)
    report = ResultCollection('zeta', config.to_dict())
    for s in config.s:
        value = None
        if config.method in ('auto', 'closed'):
            value = _closed_form_zeta(s, density, config.bc)
            if value is None and config.method == 'closed':
                raise ConfigError(f"no closed form for {density.kind} with bc {config.bc}")
        if value is None:
            try:
                value = _series_zeta(s, density, basis, level, config.order, manager)
            except DivergenceError as e:
                raise ConfigError(f"s={s} needs analytic continuation, which {density.kind} "
                                  f"does not provide: {e}") from e
        entry = value.to_dict()
        entry['pole'] = value.pole_order > 0
        entry['details'] = dict(value.details)
        report.add(f"Z({s:g})", 'zeta', {**config.to_dict(), 's': s, 'level': level}, entry)
    return report


# --- casimir ---------------------------------------------------------------------

def _casimir_values(config: RunConfig, density: DensitySpec, basis: BasisSpec,
                    manager: ConfigManager) -> Dict[str, Any]:
    p = density.param_dict
    geometry = config.geometry or density.kind
    if geometry == 'cylinder':
        res = cylinder_casimir(p['r'])
        return {'energy': res.numeric, 'closed_form': res.closed_form, 'rel_diff': res.rel_diff,
                'finite': True, 'stable': res.stable, 'parts': res.parts, 'method': 'cylinder_lift'}
    if geometry == 'thin_annulus':
        modes = {m: thin_annulus_casimir(m, p['r']) for m in ('TE', 'TM', 'EM')}
        return {'energy': modes['EM'], 'modes': modes, 'finite': True,
                'closed_form': -riemann_zeta(3).real / (4 * (1 - p['r']) ** 2),
                'method': 'thin_annulus'}
    if density.dim != 1:
        raise ConfigError(f"Casimir energies of {density.kind} drums are not available")

    if density.kind == 'piecewise' and config.bc in PIECEWISE_BCS:
        energy = piecewise_casimir(config.bc, PiecewiseParams.from_density(density))
        fit = cutoff_casimir(density, basis, config=manager)
        return {'energy': energy, 'finite': True, 'method': 'closed_form',
                'cutoff_finite_part': fit.finite_part, 'cutoff_residual': fit.residual}

    values: Dict[str, Any] = {}
    if config.bc == 'DD':
        report = divergence_check(density)
        values.update({'finite': report.finite, 'divergence': report.to_dict()})
    closed = _closed_form_zeta(-0.5, density, config.bc)
    if closed is not None:
        values.update({'energy': 0.5 * closed.real, 'method': 'closed_form',
                       'residue': closed.residue,
                       'finite': closed.pole_order == 0 or abs(closed.residue or 0.0) < 1e-12})
        if density.kind == 'sinusoidal':
            lau = sinusoidal_laurent(p['eta'], density.half_width)
            values['laurent'] = {'c_minus1': lau.coeff_minus1, 'c_0': lau.coeff_0}
        if config.bc == 'DD':
            values['dd_plus_nn'] = 0.5 * dd_plus_nn_zeta(-0.5, density).real
        return values

    fit = cutoff_casimir(density, basis, config=manager)
    values.update({'energy': fit.finite_part, 'method': 'cutoff', 'cutoff_residual': fit.residual,
                   'divergent_coefficients': {str(k): v for k, v in fit.divergent_coeffs.items()}})
    values.setdefault('finite', fit.removable)
    return values


def cmd_casimir(config: RunConfig, manager: ConfigManager) -> ResultCollection:
    """E_C = ½Z(−1/2) with its finiteness classification; divergence is a result, not an error."""
    density = config.density_spec()
    basis = config.basis(density)
    report = ResultCollection('casimir', config.to_dict())
    try:
        values = _casimir_values(config, density, basis, manager)
        status = 'ok'
    except PoleError as e:
        values, status = {'error': str(e), 'finite': False}, 'pole'
    report.add('E_C', 'casimir', config.to_dict(), values, status=status)
    return report


# --- tables ----------------------------------------------------------------------

def _deviation_row(name: str, computed: Dict[str, float], reference: Dict[str, float]) -> Dict[str, Any]:
    row: Dict[str, Any] = {'param': name}
    for key, value in computed.items():
        row[key] = value
        if key in reference:
            row[f"{key}_reference"] = reference[key]
            row[f"{key}_dev"] = value - reference[key]
    return row


def _collocation_grid(config: RunConfig, manager: ConfigManager) -> int:
    return config.grid or SCALES[config.scale].get('grid_n') or manager.get('collocation.grid_n', 60)


def _table1(config: RunConfig, manager: ConfigManager, presets: Dict[str, Any]) -> List[Dict[str, Any]]:
    scale = SCALES[config.scale]
    level = config.ntrunc or scale['two_d']
    grid = _collocation_grid(config, manager)
    alphas = presets.get('deformed_square', {}).get('alphas', sorted(TABLE1_REFERENCE))
    rows = []
    for alpha in alphas:
        density = make_density('deformed_square', {'alpha': alpha, 'L': 1.0})
        basis = BasisSpec(2, 1.0, 'DD')
        weyl = {'area': mass(density), 'perimeter': perimeter(density)}
        table = TableManager().get_or_build(density, basis, level)
        tail = make_tail(density, basis, config=manager)
        full = z_perturbative(2.0, table, tail, order=2)
        oracle = collocation_2d(density, grid)
        oracle.weyl = weyl
        computed = {
            'z': full.real,
            'diag': full.details['diag'],
            'num': zeta_from_spectrum(2.0, oracle).real,
            'weyl': weyl_tail(2.0, 1, weyl, dim=2),
        }
        logger.info("table1 α=%g done", alpha)
        rows.append(_deviation_row(f"alpha={alpha:g}", computed, TABLE1_REFERENCE.get(alpha, {})))
    return rows


def _table2(config: RunConfig, manager: ConfigManager, presets: Dict[str, Any]) -> List[Dict[str, Any]]:
    scale = SCALES[config.scale]
    level = config.ntrunc or scale['two_d']
    workers = manager.get('performance.max_worker_threads', 1)
    radii = presets.get('annulus', {}).get('radii', sorted(TABLE2_REFERENCE))
    rows = []
    for r in radii:
        density = make_density('annulus_map', {'r': r})
        basis = BasisSpec(2, density.half_width, 'DP', density.half_width_y)
        table = TableManager().get_or_build(density, basis, (level, level // 2))
        diag = z_diag(2.0, table, make_tail(density, basis, config=manager))
        oracle = annulus_spectrum(r, scale['roots'], workers)
        computed = {
            'z': annulus_zeta2(r, scale['orders']).real,
            'diag': diag.real,
            'num': zeta_from_spectrum(2.0, oracle).real,
            'weyl': weyl_tail(2.0, 1, oracle.weyl, dim=2),
        }
        logger.info("table2 r=%g done", r)
        rows.append(_deviation_row(f"r={r:g}", computed, TABLE2_REFERENCE.get(r, {})))
    return rows


def cmd_table(config: RunConfig, manager: ConfigManager,
              presets: Optional[Dict[str, Any]] = None) -> ResultCollection:
    """Recompute the deformed-square (table1) or annulus (table2) zeta table at s=2."""
    builders = {'table1': _table1, 'table2': _table2}
    if config.which not in builders:
        raise ConfigError(f"table needs table1 or table2, got {config.which}")
    presets = load_presets() if presets is None else presets
    rows = builders[config.which](config, manager, presets)
    report = ResultCollection('table', config.to_dict())
    report.add(config.which, 'table', config.to_dict(), rows=rows)
    return report


# --- verification and curves ----------------------------------------------------

def cmd_verify(config: RunConfig, manager: ConfigManager) -> ResultCollection:
    """Run identity suites; failed checks are marked in the report."""
    checks = identities.run_suites(config.suites or None, config.scale)
    report = ResultCollection('verify', config.to_dict())
    for check in checks:
        report.add(check.name, 'identity', {'params': check.params}, check.to_dict(),
                   status='ok' if check.passed else 'failed')
    return report


def cmd_curve(config: RunConfig, manager: ConfigManager) -> ResultCollection:
    """Plot-ready columns of Ψ(a), Ξ(s) or Φ(s, ε̄)."""
    opts = {**config.extras, **config.density.get('params', {})}
    start = float(opts.get('start', -2.0))
    stop = float(opts.get('stop', 2.0))
    num = int(opts.get('num', 81))
    xs = np.linspace(start, stop, num)
    which = config.which
    values = []
    for x in xs:
        try:
            if which == 'psi':
                res = psi_aux(x)
                values.append(None if res.is_pole else res.real)
            elif which == 'xi':
                values.append(identities.borg_xi_closed(x))
            elif which == 'phi':
                eps_bar = float(opts.get('eps_bar', 2 / 101))
                res = oscillating_phi(x, eps_bar)
                values.append(None if res.is_pole else res.real)
            else:
                raise ConfigError(f"curve needs psi, xi or phi, got {which}")
        except (DivergenceError, PoleError):
            values.append(None)
    report = ResultCollection('curve', config.to_dict())
    report.add(which, 'curve', config.to_dict(), rows=columns_to_rows({'x': xs.tolist(), 'value': values}))
    return report


# --- entry point -------------------------------------------------------------------

def _write(report: ResultCollection, config: RunConfig, manager: ConfigManager):
    precision = manager.get('export.precision', 12)
    fmt = config.output or manager.get('export.default_format', 'json')
    text = report.to_csv(precision=precision) if fmt == 'csv' else report.to_json(precision=precision) + '\n'
    if config.out_path:
        with open(config.out_path, 'w') as f:
            f.write(text)
        logger.info("report written to %s", config.out_path)
    else:
        sys.stdout.write(text)


def _error_report(command: str, error: Exception) -> str:
    return json.dumps({'schema_version': '1.0', 'command': command,
                       'error': {'type': type(error).__name__, 'message': str(error)}},
                      sort_keys=True)


def run(config: RunConfig, manager: ConfigManager) -> ResultCollection:
    if config.command == 'zeta':
        return cmd_zeta(config, manager)
    if config.command == 'casimir':
        return cmd_casimir(config, manager)
    if config.command == 'table':
        return cmd_table(config, manager)
    if config.command == 'verify':
        return cmd_verify(config, manager)
    return cmd_curve(config, manager)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return the exit code."""
    args = build_parser().parse_args(argv)
    manager = ConfigManager(args.config) if args.config else ConfigManager()
    if args.config and not manager.load_config(args.config):
        sys.stderr.write(_error_report(args.command, ConfigError(f"cannot load {args.config}")) + '\n')
        return EXIT_CONFIG
    setup_logging(args.log_level or manager.get('logging.level', 'WARNING'))
    TOLERANCES.configure(manager)

    try:
        config = RunConfig.from_args(args)
        report = run(config, manager)
    except (ConfigError, DomainError, PoleError) as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write(_error_report(args.command, e) + '\n')
        return EXIT_CONFIG
    except SpectralError as e:
        logger.error("%s failed: %s", args.command, e)
        sys.stderr.write(_error_report(args.command, e) + '\n')
        return EXIT_VERIFY if args.command == 'verify' else EXIT_CONFIG

    _write(report, config, manager)
    if config.command == 'verify' and report.failed:
        logger.warning("%d of %d checks failed", len(report.failed), report.get_record_count())
        return EXIT_VERIFY
    return EXIT_OK
