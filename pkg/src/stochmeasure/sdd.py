"""Systems of density distributions on a cell-discretized bounded volume.

A density system assigns to every multiset of ``n`` cells the density
``mu^n(x_1..x_n)`` (units measure^-n).  Integrals over ``Lambda^n`` become
sums over ordered cell tuples weighted by the product of cell measures; since
every density is symmetric, those sums run over multisets with multinomial
multiplicities.  Entries are keyed by lexicographically non-decreasing cell
index tuples.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, ValidationError

__all__ = [
    "Volume",
    "DensitySystem",
    "CorrelationTable",
    "ValidationReport",
    "OrderEntries",
    "validate_sdd",
    "correlation_from_sdd",
    "correlation_table",
    "sdd_from_correlation",
    "density_from_correlation",
    "poisson_sdd",
    "brute_force_correlation",
    "multisets",
    "marginal",
    "to_json",
    "from_json",
]

DEFAULT_MAX_ORDER = 8
ORACLE_MAX_ORDER = 20


@dataclass(frozen=True)
class Volume:
    """Bounded region made of cells with positive measures."""

    measures: tuple
    cells: tuple = None

    def __post_init__(self):
        m = tuple(float(x) for x in np.atleast_1d(self.measures))
        if not m:
            raise ValidationError("a volume needs at least one cell")
        if not all(math.isfinite(x) and x > 0 for x in m):
            raise ValidationError("cell measures must be positive and finite")
        cells = tuple(str(c) for c in self.cells) if self.cells is not None else tuple(str(i) for i in range(len(m)))
        if len(cells) != len(m) or len(set(cells)) != len(cells):
            raise ValidationError("cell identifiers must be unique, one per measure")
        object.__setattr__(self, "measures", m)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def uniform(cls, size, count, prefix="c"):
        return cls((size / count,) * count, tuple(f"{prefix}{i}" for i in range(count)))

    def __len__(self):
        return len(self.measures)

    @property
    def size(self):
        return math.fsum(self.measures)

    def index(self, cell):
        try:
            return self.cells.index(str(cell))
        except ValueError:
            raise DomainError(f"cell {cell!r} is not part of the volume") from None

    def subvolume(self, cells) -> "Volume":
        idx = [self.index(c) for c in cells]
        return Volume(tuple(self.measures[i] for i in idx), tuple(self.cells[i] for i in idx))


def _canon(idx):
    return tuple(sorted(idx))


def multisets(ncells, order):
    """All non-decreasing index tuples of length ``order``."""
    return list(combinations_with_replacement(range(ncells), order))


def _ordered_weights(measures, order):
    """``(multiset, p!/prod(q_i!) * prod(h))`` covering every ordered ``order``-tuple."""
    out = []
    fact = math.factorial(order)
    for q in combinations_with_replacement(range(len(measures)), order):
        mult = fact
        w = 1.0
        for i, k in Counter(q).items():
            mult //= math.factorial(k)
            w *= measures[i] ** k
        out.append((q, mult * w))
    return out


class _Tabulated:
    """Lookup of symmetric entries with a lazily computed fallback."""

    def __init__(self, volume, max_order, func):
        if max_order < 0:
            raise ValidationError("max_order must be >= 0")
        self.volume = volume
        self.max_order = int(max_order)
        self._func = lru_cache(maxsize=None)(func)

    def __call__(self, idx) -> float:
        idx = _canon(idx)
        if len(idx) > self.max_order:
            return 0.0
        return self._func(idx)

    def table(self, order):
        """Dense flattened table of ``order`` over non-decreasing tuples."""
        return np.array([self(q) for q in multisets(len(self.volume), order)])

    def tables(self):
        return {n: self.table(n) for n in range(self.max_order + 1)}


def _from_tables(volume, tables):
    """Entry function backed by per-order dicts or flattened arrays."""
    store = {}
    for n, tab in tables.items():
        n = int(n)
        if isinstance(tab, dict):
            for key, v in tab.items():
                key = tuple(int(i) for i in (key if isinstance(key, tuple) else (key,)))
                if len(key) != n:
                    raise ValidationError(f"entry {key} does not have order {n}")
                if any(not 0 <= i < len(volume) for i in key):
                    raise ValidationError(f"entry {key} references a cell outside the volume")
                c = _canon(key)
                if c in store and not math.isclose(store[c], float(v), rel_tol=1e-12, abs_tol=1e-300):
                    raise ValidationError(f"entries for permutations of {c} disagree; densities must be symmetric")
                store[c] = float(v)
        else:
            vals = np.asarray(tab, dtype=float).ravel()
            keys = multisets(len(volume), n)
            if vals.size != len(keys):
                raise ValidationError(f"order {n} table needs {len(keys)} entries, got {vals.size}")
            store.update(zip(keys, vals.tolist()))
    for v in store.values():
        if not math.isfinite(v) or v < 0:
            raise ValidationError("entries must be finite and non-negative")
    return lambda idx: store.get(idx, 0.0)


class DensitySystem(_Tabulated):
    """``mu^n`` for ``n <= max_order`` on ``volume``; higher orders are zero.

    ``density`` is either a function of a sorted cell-index tuple or a mapping
    ``order -> {tuple: value}`` / ``order -> flat table``.
    """

    def __init__(self, volume: Volume, max_order: int, density):
        if not callable(density):
            density = _from_tables(volume, density)
        super().__init__(volume, max_order, density)


class CorrelationTable(_Tabulated):
    """``rho(x_1..x_n)`` for ``n <= max_order``, same conventions as :class:`DensitySystem`.

    ``complete`` marks tables whose orders above ``max_order`` vanish exactly
    (those derived from a finite density system); inverting them involves no
    series truncation.
    """

    def __init__(self, volume: Volume, max_order: int, values, complete: bool = False):
        if not callable(values):
            values = _from_tables(volume, values)
        super().__init__(volume, max_order, values)
        self.complete = bool(complete)


@dataclass
class ValidationReport:
    empty_volume_residual: float
    consistency_residual: float
    normalization_residual: float
    symmetry_residual: float
    last_term: float
    tol: float
    truncation_warning: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return max(self.empty_volume_residual, self.consistency_residual, self.normalization_residual, self.symmetry_residual) < self.tol

    def as_dict(self):
        return {
            "empty_volume_residual": self.empty_volume_residual,
            "consistency_residual": self.consistency_residual,
            "normalization_residual": self.normalization_residual,
            "symmetry_residual": self.symmetry_residual,
            "last_term": self.last_term,
            "tol": self.tol,
            "truncation_warning": self.truncation_warning,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _order_mass(d: DensitySystem, order: int) -> float:
    """``int_{Lambda^order} mu^order``."""
    return math.fsum(w * d(q) for q, w in _ordered_weights(d.volume.measures, order))


def marginal(d: DensitySystem, sub: Volume) -> DensitySystem:
    """Densities on ``sub`` obtained by integrating out ``d.volume minus sub``.

    Sums over the number ``p`` of particles outside ``sub`` are truncated at
    ``d.max_order``.
    """
    sub_idx = [d.volume.index(c) for c in sub.cells]
    rest = [i for i in range(len(d.volume)) if i not in set(sub_idx)]
    rest_measures = [d.volume.measures[i] for i in rest]
    weights = {p: [(tuple(rest[j] for j in q), w) for q, w in _ordered_weights(rest_measures, p)]
               for p in range(d.max_order + 1)} if rest else {0: [((), 1.0)]}

    def mu(idx):
        n = len(idx)
        x = tuple(sub_idx[i] for i in idx)
        acc = []
        for p in range(d.max_order - n + 1):
            if p not in weights:
                break
            coef = math.comb(n + p, p)
            acc.extend(coef * w * d(x + y) for y, w in weights[p])
        return math.fsum(acc)

    return DensitySystem(sub, d.max_order, mu)


def validate_sdd(d: DensitySystem, sub: Volume, tol: float = 1e-8, reference: DensitySystem = None) -> ValidationReport:
    """Check the defining conditions of a density system.

    * empty-volume density equals 1 (marginalizing everything away);
    * marginal consistency on ``sub``: compared entry-wise against
      ``reference`` when given, otherwise the marginal must be normalized;
    * normalization over ``d.volume``.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    missing = [c for c in sub.cells if c not in d.volume.cells]
    if missing:
        raise DomainError(f"sub-volume cells {missing} are not in the system volume")
    empty_res = abs(_empty_marginal(d) - 1.0)
    masses = [_order_mass(d, n) for n in range(d.max_order + 1)]
    norm_res = abs(math.fsum(masses) - 1.0)
    m = marginal(d, sub)
    if reference is not None:
        if reference.volume.cells != sub.cells:
            raise DomainError("reference system must live on the sub-volume")
        cons_res = max(
            (abs(m(q) - reference(q)) for n in range(d.max_order + 1) for q in multisets(len(sub), n)),
            default=0.0,
        )
    else:
        cons_res = abs(math.fsum(_order_mass(m, n) for n in range(m.max_order + 1)) - 1.0)
    report = ValidationReport(empty_res, cons_res, norm_res, 0.0, masses[-1], tol)
    if masses[-1] > tol and d.max_order > 0:
        report.truncation_warning = True
        report.notes.append(f"order {d.max_order} still carries mass {masses[-1]:.3g}; raise max_order")
    return report


def _empty_marginal(d: DensitySystem) -> float:
    """``mu^0`` of the empty volume: every cell integrated out."""
    all_w = (w * d(q) for p in range(d.max_order + 1) for q, w in _ordered_weights(d.volume.measures, p))
    return math.fsum(all_w)


def correlation_from_sdd(d: DensitySystem, n: int) -> dict:
    """Order-``n`` correlation entries ``{sorted cells: rho}``."""
    if not 0 <= n <= d.max_order:
        raise DomainError(f"order {n} outside 0..{d.max_order}")
    rho = correlation_table(d)
    return {q: rho(q) for q in multisets(len(d.volume), n)}


def correlation_table(d: DensitySystem) -> CorrelationTable:
    """Lazy table of ``rho(x) = sum_p (n+p)!/p! int mu^{n+p}(x, y) dy``."""
    weights = [_ordered_weights(d.volume.measures, p) for p in range(d.max_order + 1)]

    def rho(x):
        n = len(x)
        acc = []
        for p in range(d.max_order - n + 1):
            coef = math.perm(n + p, n)
            acc.extend(coef * w * d(x + q) for q, w in weights[p])
        return math.fsum(acc)

    return CorrelationTable(d.volume, d.max_order, rho, complete=True)


@dataclass(frozen=True)
class OrderEntries:
    order: int
    values: dict
    truncation: float


def sdd_from_correlation(c: CorrelationTable, n: int, tol: float = 1e-8) -> OrderEntries:
    """Invert the correlation series for order ``n``.

    ``mu^n(x) = 1/n! sum_p (-1)^p/p! int rho^{n+p}(x, y) dy``, truncated at
    ``c.max_order``.  The largest magnitude of the last retained term is the
    truncation estimate; above ``tol`` the inversion is refused.  Complete
    tables have no truncation and report 0.
    """
    if not 0 <= n <= c.max_order:
        raise DomainError(f"order {n} outside 0..{c.max_order}")
    p_last = c.max_order - n
    weights = [_ordered_weights(c.volume.measures, p) for p in range(p_last + 1)]
    values = {}
    last = 0.0
    for x in multisets(len(c.volume), n):
        terms = []
        for p in range(p_last + 1):
            s = math.fsum(w * c(x + q) for q, w in weights[p])
            terms.append((-1) ** p * s / math.factorial(p))
        last = max(last, abs(terms[-1]) / math.factorial(n))
        values[x] = math.fsum(terms) / math.factorial(n)
    if c.complete:
        last = 0.0
    elif last > tol:
        raise ConvergenceError(
            f"correlation series for order {n} not converged: last retained term {last:.3g} > tol {tol:g}"
        )
    return OrderEntries(n, values, last)


def density_from_correlation(c: CorrelationTable, tol: float = 1e-8) -> DensitySystem:
    """All orders of :func:`sdd_from_correlation` assembled into a density system."""
    tables = {n: sdd_from_correlation(c, n, tol).values for n in range(c.max_order + 1)}
    # tiny negative rounding residue is clipped; real negativity is an error
    for n, tab in tables.items():
        for k, v in tab.items():
            if v < -tol:
                raise ConvergenceError(f"inverted density negative at {k}: {v:.3g}")
            tab[k] = max(v, 0.0)
    return DensitySystem(c.volume, c.max_order, tables)


def poisson_sdd(z: float, v: Volume, max_order: int = ORACLE_MAX_ORDER, tail_tol: float = 1e-10) -> DensitySystem:
    """Ideal-gas system ``mu^n = e^{-z|V|} z^n / n!`` (position independent)."""
    if not (math.isfinite(z) and z > 0):
        raise DomainError(f"intensity z must be > 0, got {z}")
    mean = z * v.size
    log_p = [-mean + n * math.log(mean) - math.lgamma(n + 1) for n in range(max_order + 1)]
    tail = 1.0 - math.fsum(math.exp(lp) for lp in log_p)
    # the complement can lose precision; bound the tail by its leading terms as well
    leading = math.fsum(math.exp(-mean + k * math.log(mean) - math.lgamma(k + 1))
                        for k in range(max_order + 1, max_order + 60))
    if max(tail, leading) >= tail_tol:
        raise DomainError(
            f"Poisson tail beyond order {max_order} is {max(tail, leading):.3g} >= {tail_tol:g}; raise max_order"
        )
    coef = [math.exp(-mean + n * math.log(z) - math.lgamma(n + 1)) for n in range(max_order + 1)]
    return DensitySystem(v, max_order, lambda idx: coef[len(idx)])


def brute_force_correlation(d: DensitySystem, x) -> float:
    """``rho(x)`` by enumerating every occupation configuration of the cells.

    A configuration with counts ``k`` (total ``N``) has probability
    ``N!/prod(k_i!) mu^N prod(h_i^k_i)``; ``rho(x)`` is the factorial moment
    ``E[prod k_i!/(k_i - m_i)!]`` divided by ``prod h_i^m_i`` for the cell
    counts ``m`` of ``x``.
    """
    h = d.volume.measures
    m = Counter(x)
    total = []
    ncell = len(h)

    def configs(i, left):
        if i == ncell - 1:
            for k in range(left + 1):
                yield (k,)
            return
        for k in range(left + 1):
            for rest in configs(i + 1, left - k):
                yield (k,) + rest

    for k in configs(0, d.max_order):
        if any(k[i] < m.get(i, 0) for i in range(ncell)):
            continue
        N = sum(k)
        cells = tuple(i for i in range(ncell) for _ in range(k[i]))
        prob = math.factorial(N) * d(cells)
        for i in range(ncell):
            prob *= h[i] ** k[i] / math.factorial(k[i])
        fm = 1.0
        for i, mi in m.items():
            fm *= math.perm(k[i], mi) / h[i] ** mi
        total.append(prob * fm)
    return math.fsum(total)


def to_json(table, kind=None) -> str:
    """Serialize a density system or correlation table.

    Orders map to flat lists over lexicographically non-decreasing index tuples.
    """
    kind = kind or ("density" if isinstance(table, DensitySystem) else "correlation")
    doc = {
        "kind": kind,
        "index_convention": "lexicographic non-decreasing cell-index tuples",
        "volume": {"cells": list(table.volume.cells), "measures": list(table.volume.measures)},
        "max_order": table.max_order,
        "orders": {str(n): table.table(n).tolist() for n in range(table.max_order + 1)},
    }
    if isinstance(table, CorrelationTable):
        doc["complete"] = table.complete
    return json.dumps(doc, indent=1)


def from_json(text):
    doc = json.loads(text)
    try:
        vol = Volume(tuple(doc["volume"]["measures"]), tuple(doc["volume"]["cells"]))
        orders = {int(k): v for k, v in doc["orders"].items()}
        max_order = int(doc["max_order"])
        kind = doc.get("kind", "density")
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed density document: missing {exc}") from None
    if kind == "density":
        return DensitySystem(vol, max_order, orders)
    return CorrelationTable(vol, max_order, orders, complete=bool(doc.get("complete", False)))
