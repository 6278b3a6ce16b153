"""
Matrix element tables and the process-wide table cache.

A table holds ⟨n|Σ|m⟩ over a truncated basis together with the
homogeneous eigenvalues and the provenance of its entries. The
TableManager singleton builds tables once per (density, basis, level)
and keeps lineage metadata for reports.
"""

import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

import bases
from bases import BasisSpec, ModeIndex
from densities import DensitySpec, DensityTerm, SeparableTerm, make_density, mean_value
from utils import DomainError

logger = logging.getLogger(__name__)

Level = Union[int, Tuple[int, int]]


@dataclass
class MatrixElementTable:
    """⟨n|Σ|m⟩ (or ⟨n|Ŵ|m⟩) over a truncated basis."""
    basis: BasisSpec
    density_id: str
    level: Level
    modes: List[ModeIndex]
    eigenvalues: np.ndarray
    entries: Any
    provenance: str
    sigma_bar: float
    kind: str = 'density'

    @property
    def size(self) -> int:
        return len(self.modes)

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.entries)

    def dense(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else np.asarray(self.entries)

    def diagonal(self) -> np.ndarray:
        return np.asarray(self.entries.diagonal()).ravel()

    def nonzero_modes(self) -> np.ndarray:
        """Boolean mask of modes with ε > 0 (zero modes are skipped by zeta sums)."""
        return self.eigenvalues > 0

    def off_diagonal(self, k_band: Optional[int] = None):
        """
        Off-diagonal entries between nonzero modes as (rows, cols, values);
        both orderings of every pair are returned.
        """
        keep = self.nonzero_modes()
        if self.is_sparse:
            coo = self.entries.tocoo()
            rows, cols, vals = coo.row, coo.col, coo.data
        else:
            mat = np.asarray(self.entries)
            rows, cols = np.nonzero(mat)
            vals = mat[rows, cols]
        mask = (rows != cols) & keep[rows] & keep[cols] & (vals != 0)
        if k_band is not None and self.basis.dim == 1:
            mask &= np.abs(rows - cols) <= k_band
        return rows[mask], cols[mask], vals[mask]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        mat = self.entries
        diff = abs(mat - mat.T)
        worst = diff.max() if self.is_sparse else float(np.max(diff))
        scale = abs(mat).max() if self.is_sparse else float(np.max(np.abs(mat)))
        return worst <= tol * max(scale, 1.0)

    def sub_table(self, level: Level) -> 'MatrixElementTable':
        """Restriction to a smaller truncation box."""
        wanted = bases.enumerate_modes(self.basis, level)
        position = {m: i for i, m in enumerate(self.modes)}
        try:
            idx = np.array([position[m] for m in wanted])
        except KeyError as e:
            raise DomainError(f"level {level} is larger than the table level {self.level}") from e
        if self.is_sparse:
            sub = self.entries[idx][:, idx]
        else:
            sub = np.asarray(self.entries)[np.ix_(idx, idx)]
        return MatrixElementTable(self.basis, self.density_id, level, wanted,
                                  self.eigenvalues[idx], sub, self.provenance,
                                  self.sigma_bar, self.kind)

    def to_dict(self) -> Dict[str, Any]:
        mat = self.dense()
        return {
            'basis': {'dim': self.basis.dim, 'half_width_x': self.basis.half_width_x,
                      'bc': self.basis.bc, 'half_width_y': self.basis.half_width_y},
            'density_id': self.density_id,
            'level': list(self.level) if isinstance(self.level, tuple) else self.level,
            'modes': [[m.n_x, m.n_y, m.u] for m in self.modes],
            'eigenvalues': self.eigenvalues.tolist(),
            'entries': mat.tolist(),
            'provenance': self.provenance,
            'sigma_bar': self.sigma_bar,
            'kind': self.kind
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MatrixElementTable':
        b = data['basis']
        basis = BasisSpec(b['dim'], b['half_width_x'], b['bc'], b.get('half_width_y'))
        level = tuple(data['level']) if isinstance(data['level'], list) else data['level']
        entries = np.array(data['entries'], dtype=float)
        if basis.dim == 2:
            entries = sparse.csr_matrix(entries)
        return cls(basis, data['density_id'], level,
                   [ModeIndex(*m) for m in data['modes']],
                   np.array(data['eigenvalues'], dtype=float), entries,
                   data['provenance'], data['sigma_bar'], data.get('kind', 'density'))

    def save(self, filename: str):
        with open(filename, 'w') as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, filename: str) -> 'MatrixElementTable':
        with open(filename, 'r') as f:
            return cls.from_dict(json.load(f))


def build_table(density: DensitySpec, basis: BasisSpec, level: Level, method: str = 'auto',
                sigma_bar: Optional[float] = None, workers: int = 1) -> MatrixElementTable:
    """Assemble the full ⟨n|Σ|m⟩ table for a density."""
    entries, eps, modes, prov = bases.assemble(density, basis, level, method, workers)
    sb = mean_value(density) if sigma_bar is None else float(sigma_bar)
    logger.debug("built %s table for %s at level %s (%d modes)", prov, density.density_id,
                 level, len(modes))
    return MatrixElementTable(basis, density.density_id, level, modes, eps, entries, prov, sb)


def reciprocal_density(density: DensitySpec) -> DensitySpec:
    """1/Σ as a density; polynomial for the Borg string, quadrature otherwise."""
    if density.dim != 1:
        raise DomainError("reciprocal densities are used for strings only")
    p = density.param_dict
    if density.kind == 'borg':
        a = p['alpha']
        c0 = 1 + a / 2
        terms = [SeparableTerm(DensityTerm(math.comb(4, k) * c0 ** (4 - k) * a ** k / (1 + a) ** 2,
                                           power=k)) for k in range(5)]
        return DensitySpec(kind='borg_reciprocal', params=density.params, dim=1,
                           half_width=density.half_width, terms=tuple(terms))
    if density.kind == 'constant':
        return make_density('constant', {'value': 1 / p.get('value', 1.0),
                                         'L': density.half_width})
    return make_density('custom', {'L': density.half_width, 'of': density.density_id},
                        func=lambda x: 1.0 / np.asarray(density(x), dtype=float))


def build_w_table(density: DensitySpec, basis: BasisSpec, level: int,
                  method: str = 'auto') -> MatrixElementTable:
    """
    Table of Ŵ = √ε ⟨n|1/Σ|m⟩ √ε, the operator whose heat trace is expanded.
    The stored sigma_bar is the mean of 1/Σ, the asymptotic ratio W_nn/ε_n.
    """
    recip = reciprocal_density(density)
    entries, eps, modes, prov = bases.assemble(recip, basis, level, method)
    root = np.sqrt(eps)
    w = entries * root[:, None] * root[None, :]
    return MatrixElementTable(basis, density.density_id, level, modes, eps, w, prov,
                              mean_value(recip), kind='w_operator')


def w_matrix_element(density: DensitySpec, basis: BasisSpec, n: ModeIndex, m: ModeIndex,
                     method: str = 'auto') -> float:
    """Single element ⟨n|Ŵ|m⟩ = √(ε_n ε_m) ⟨n|1/Σ|m⟩."""
    if basis.dim != 1:
        raise DomainError("Ŵ elements are defined for strings")
    value = bases.matrix_element(reciprocal_density(density), basis, n, m, method)
    return math.sqrt(bases.eigenvalue(basis, n) * bases.eigenvalue(basis, m)) * value


class TableManager:
    """Singleton cache of matrix element tables."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._initialized = True
        self.tables: Dict[str, MatrixElementTable] = {}
        self.metadata: Dict[str, dict] = {}

    @staticmethod
    def table_key(density: DensitySpec, basis: BasisSpec, level: Level, method: str,
                  kind: str = 'density') -> str:
        return (f"{kind}|{density.density_id}|{basis.dim}:{basis.bc}:{basis.half_width_x!r}:"
                f"{basis.half_width_y!r}|{level}|{method}")

    def get_or_build(self, density: DensitySpec, basis: BasisSpec, level: Level,
                     method: str = 'auto', workers: int = 1) -> MatrixElementTable:
        """Return the cached table or build and register it."""
        key = self.table_key(density, basis, level, method)
        if key in self.tables:
            return self.tables[key]
        table = build_table(density, basis, level, method, workers=workers)
        self.add_table(key, table, {'type': 'density', 'density': density.density_id,
                                    'level': level, 'provenance': table.provenance})
        return table

    def get_or_build_w(self, density: DensitySpec, basis: BasisSpec, level: int,
                       method: str = 'auto') -> MatrixElementTable:
        key = self.table_key(density, basis, level, method, kind='w_operator')
        if key in self.tables:
            return self.tables[key]
        table = build_w_table(density, basis, level, method)
        self.add_table(key, table, {'type': 'w_operator', 'density': density.density_id,
                                    'level': level, 'provenance': table.provenance})
        return table

    def add_table(self, name: str, table: MatrixElementTable,
                  source_info: Optional[dict] = None) -> bool:
        """
        Register a table.

        Args:
            name: unique key
            table: MatrixElementTable
            source_info: optional lineage (density id, level, provenance)

        Returns:
            True if added, False if the key already exists
        """
        if name in self.tables:
            return False
        self.tables[name] = table
        self.metadata[name] = {
            'added_time': datetime.now().isoformat(),
            'source_info': source_info or {},
            'size': table.size
        }
        return True

    def get_table(self, name: str) -> Optional[MatrixElementTable]:
        return self.tables.get(name)

    def remove_table(self, name: str) -> bool:
        if name in self.tables:
            del self.tables[name]
            del self.metadata[name]
            return True
        return False

    def list_tables(self) -> List[dict]:
        return [{'name': name, 'size': meta['size'], **meta['source_info']}
                for name, meta in self.metadata.items()]

    def clear_all(self):
        self.tables.clear()
        self.metadata.clear()
