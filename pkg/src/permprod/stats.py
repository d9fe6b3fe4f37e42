"""Monte Carlo estimators and Poisson reference laws.

The reference law for the vector of small-cycle counts is a product of
independent Poisson variables with mean 1/d in coordinate d. Joint laws
live on a truncated lattice {0..T}^k with one extra overflow cell that
lumps all mass outside the box, and total-variation distance includes
that overflow cell.

Sampling is chunked; chunk c of factor f draws from the stream
(seed, c * num_factors + f), so results are reproducible bit for bit
for a fixed chunk size and independent of how chunks would be spread
over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from permprod.samplers import (
    RngStream,
    SamplerSpec,
    product_rows,
    small_cycle_counts,
)

__all__ = [
    "JointPmf",
    "MomentEstimate",
    "Functional",
    "ScanRow",
    "ScanResult",
    "parse_functional",
    "poisson_pmf",
    "eta_joint_pmf",
    "empirical_joint_pmf",
    "tv_distance",
    "sample_joint_counts",
    "moment_estimate",
    "moment_estimates",
    "convergence_scan",
]

_CHUNK = 8192
# Cap on elements per batch array so large n does not blow up memory.
_CHUNK_ELEMENTS = 1 << 22
_GRID_STRIDE = 2**32


def _chunk_size(n: int) -> int:
    return max(1, min(_CHUNK, _CHUNK_ELEMENTS // max(n, 1)))


@dataclass
class JointPmf:
    """Probability masses on {0..truncation}^k plus one overflow cell."""

    k: int
    truncation: int
    mass: dict[tuple[int, ...], float]
    overflow: float

    def __post_init__(self) -> None:
        if self.k < 1 or self.truncation < 0:
            raise ValueError("need k >= 1 and truncation >= 0")
        exact = isinstance(self.overflow, Fraction) and all(
            isinstance(v, Fraction) for v in self.mass.values()
        )
        total = sum(self.mass.values(), self.overflow)
        for cell, value in self.mass.items():
            if len(cell) != self.k:
                raise ValueError(f"cell {cell!r} has wrong arity")
            if any(not 0 <= c <= self.truncation for c in cell):
                raise ValueError(f"cell {cell!r} outside the truncation box")
            if value < 0:
                raise ValueError(f"negative mass at {cell!r}")
        if exact:
            if total != 1:
                raise ValueError(f"exact masses sum to {total}, expected 1")
        elif abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total!r}, expected 1")

    def cell(self, counts: Sequence[int]):
        return self.mass.get(tuple(counts), type(self.overflow)(0))

    def marginal_mean(self, coord: int) -> float:
        if not 1 <= coord <= self.k:
            raise ValueError(f"coordinate {coord} outside 1..{self.k}")
        return sum(cell[coord - 1] * value for cell, value in self.mass.items())


@dataclass
class MomentEstimate:
    """Monte Carlo mean with its standard error."""

    value: float
    stderr: float
    samples: int
    seed: int
    spec: str

    def __post_init__(self) -> None:
        if self.samples < 2:
            raise ValueError("an estimate needs at least two samples")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")


@dataclass(frozen=True)
class Functional:
    """What to average per sampled product.

    * ``product_cycle_counts``: product over v_vec of the number of
      v-cycles of the product permutation (all factors multiplied).
    * ``scaled_fixed_point_moment``: (fixed points / sqrt(n))^power of a
      single factor.
    * ``scaled_two_cycle_rate``: (number of 2-cycles) / n of a single
      factor.
    """

    kind: str
    v_vec: tuple[int, ...] = ()
    power: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (
            "product_cycle_counts",
            "scaled_fixed_point_moment",
            "scaled_two_cycle_rate",
        ):
            raise ValueError(f"unknown functional {self.kind!r}")
        if self.kind == "product_cycle_counts":
            if not self.v_vec or any(v < 1 for v in self.v_vec):
                raise ValueError(f"cycle lengths must be >= 1: {self.v_vec!r}")
        if self.power < 1:
            raise ValueError("power must be >= 1")

    @classmethod
    def product_cycle_counts(cls, v_vec: Sequence[int]) -> "Functional":
        return cls(kind="product_cycle_counts", v_vec=tuple(v_vec))

    @classmethod
    def scaled_fixed_point_moment(cls, power: int) -> "Functional":
        return cls(kind="scaled_fixed_point_moment", power=power)

    @classmethod
    def scaled_two_cycle_rate(cls) -> "Functional":
        return cls(kind="scaled_two_cycle_rate")

    @property
    def num_factors_used(self) -> str:
        return "all" if self.kind == "product_cycle_counts" else "one"

    def label(self) -> str:
        if self.kind == "product_cycle_counts":
            return "product:" + "*".join(str(v) for v in self.v_vec)
        if self.kind == "scaled_fixed_point_moment":
            return f"fixed-moment:{self.power}"
        return "two-cycle-rate"

    @property
    def kmax(self) -> int:
        if self.kind == "product_cycle_counts":
            return max(self.v_vec)
        return 2 if self.kind == "scaled_two_cycle_rate" else 1


def parse_functional(text: str) -> Functional:
    """Parse a functional descriptor, the inverse of ``Functional.label``."""
    t = text.strip()
    if t == "two-cycle-rate":
        return Functional.scaled_two_cycle_rate()
    if t.startswith("fixed-moment:"):
        return Functional.scaled_fixed_point_moment(int(t.removeprefix("fixed-moment:")))
    if t.startswith("product:"):
        body = t.removeprefix("product:")
        return Functional.product_cycle_counts(
            tuple(int(part) for part in body.split("*"))
        )
    raise ValueError(f"unknown functional descriptor {text!r}")


def poisson_pmf(lam: float, j: int) -> float:
    if j < 0:
        raise ValueError("j must be >= 0")
    return math.exp(-lam) * lam**j / math.factorial(j)


def eta_joint_pmf(k: int, truncation: int = 8) -> JointPmf:
    """Product of independent Poisson(1/d) laws for d = 1..k, truncated."""
    if k < 1 or truncation < 0:
        raise ValueError("need k >= 1 and truncation >= 0")
    marginals = [
        [poisson_pmf(1.0 / d, j) for j in range(truncation + 1)]
        for d in range(1, k + 1)
    ]
    mass: dict[tuple[int, ...], float] = {}
    total = 0.0
    for cell in np.ndindex(*([truncation + 1] * k)):
        value = 1.0
        for d, j in enumerate(cell):
            value *= marginals[d][j]
        cell_t = tuple(int(c) for c in cell)
        mass[cell_t] = value
        total += value
    return JointPmf(k=k, truncation=truncation, mass=mass, overflow=max(0.0, 1.0 - total))


def empirical_joint_pmf(samples, truncation: int = 8) -> JointPmf:
    """Relative frequencies of integer count vectors on the truncated box."""
    arr = np.asarray(samples, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("samples must be a non-empty 2d array of count vectors")
    size, k = arr.shape
    inside = (arr <= truncation).all(axis=1) & (arr >= 0).all(axis=1)
    overflow = float((~inside).sum()) / size
    mass: dict[tuple[int, ...], float] = {}
    kept = arr[inside]
    if kept.size:
        cells, counts = np.unique(kept, axis=0, return_counts=True)
        for cell, count in zip(cells, counts):
            mass[tuple(int(c) for c in cell)] = float(count) / size
    return JointPmf(k=k, truncation=truncation, mass=mass, overflow=overflow)


def tv_distance(p: JointPmf, q: JointPmf) -> float:
    """Half the l1 distance over the truncated box and the overflow cell."""
    if p.k != q.k or p.truncation != q.truncation:
        raise ValueError(
            f"shape mismatch: ({p.k}, {p.truncation}) vs ({q.k}, {q.truncation})"
        )
    cells = set(p.mass) | set(q.mass)
    total = sum(abs(p.cell(c) - q.cell(c)) for c in cells)
    total += abs(p.overflow - q.overflow)
    return total / 2


def _resolved_specs(
    specs: Sequence[SamplerSpec], n: int | None
) -> tuple[list[SamplerSpec], int]:
    if not specs:
        raise ValueError("need at least one sampler spec")
    ns = {spec.n for spec in specs if spec.n is not None}
    if n is not None:
        ns.add(n)
    if len(ns) != 1:
        raise ValueError(f"ambiguous or missing ground-set size: {sorted(ns)}")
    size = ns.pop()
    return [spec.bind(n=size) for spec in specs], size


def _product_counts_chunks(
    specs: Sequence[SamplerSpec],
    n: int | None,
    kmax: int,
    samples: int,
    seed: int,
    stream_base: int = 0,
) -> np.ndarray:
    bound, size_n = _resolved_specs(specs, n)
    num = len(bound)
    chunk = _chunk_size(size_n)
    out = np.empty((samples, kmax), dtype=np.int64)
    pos = 0
    chunk_index = 0
    while pos < samples:
        size = min(chunk, samples - pos)
        factors = []
        for f, spec in enumerate(bound):
            stream = RngStream(seed, stream_base + chunk_index * num + f)
            factors.append(spec.draw_batch(stream, size))
        prod = product_rows(factors)
        out[pos : pos + size] = small_cycle_counts(prod, kmax)
        pos += size
        chunk_index += 1
    return out


def sample_joint_counts(
    specs: Sequence[SamplerSpec],
    k: int,
    samples: int,
    seed: int,
    n: int | None = None,
    stream_base: int = 0,
) -> np.ndarray:
    """Count vectors (1-cycles, ..., k-cycles) of the sampled products."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return _product_counts_chunks(specs, n, k, samples, seed, stream_base)


def _functional_values(
    functional: Functional, counts: np.ndarray, n: int
) -> np.ndarray:
    if functional.kind == "product_cycle_counts":
        values = np.ones(counts.shape[0], dtype=np.float64)
        for v in functional.v_vec:
            values *= counts[:, v - 1]
        return values
    if functional.kind == "scaled_fixed_point_moment":
        return (counts[:, 0] / math.sqrt(n)) ** functional.power
    return counts[:, 1] / n


def moment_estimates(
    specs: Sequence[SamplerSpec],
    functionals: Sequence[Functional],
    samples: int,
    seed: int,
    n: int | None = None,
    stream_base: int = 0,
) -> list[MomentEstimate]:
    """Monte Carlo estimates of several functionals from one set of draws.

    All product functionals are evaluated on the product of every factor;
    single-factor functionals require exactly one sampler spec. Sharing
    draws keeps a multi-functional run at the cost of a single one and
    does not change any individual estimate: the streams are keyed the
    same way as for a lone estimate.
    """
    funcs = list(functionals)
    if not funcs:
        raise ValueError("need at least one functional")
    if samples < 100:
        raise ValueError("moment estimates need samples >= 100")
    bound, size_n = _resolved_specs(specs, n)
    num = len(bound)
    if num != 1 and any(f.kind != "product_cycle_counts" for f in funcs):
        bad = next(f for f in funcs if f.kind != "product_cycle_counts")
        raise ValueError(
            f"functional {bad.label()} applies to a single sampler, got {num}"
        )
    kmax = max(f.kmax for f in funcs)
    chunk = _chunk_size(size_n)
    values = np.empty((len(funcs), samples), dtype=np.float64)
    pos = 0
    chunk_index = 0
    while pos < samples:
        size = min(chunk, samples - pos)
        factors = []
        for fi, spec in enumerate(bound):
            stream = RngStream(seed, stream_base + chunk_index * num + fi)
            factors.append(spec.draw_batch(stream, size))
        counts = small_cycle_counts(product_rows(factors), kmax)
        for qi, functional in enumerate(funcs):
            values[qi, pos : pos + size] = _functional_values(
                functional, counts, size_n
            )
        pos += size
        chunk_index += 1
    label = " x ".join(s.label() for s in bound)
    return [
        MomentEstimate(
            value=float(row.mean()),
            stderr=float(row.std(ddof=1) / math.sqrt(samples)),
            samples=samples,
            seed=seed,
            spec=f"{functional.label()} | {label} | n={size_n}",
        )
        for functional, row in zip(funcs, values)
    ]


def moment_estimate(
    specs: Sequence[SamplerSpec],
    functional: Functional,
    samples: int,
    seed: int,
    n: int | None = None,
    stream_base: int = 0,
) -> MomentEstimate:
    """Monte Carlo estimate of one functional with its standard error."""
    return moment_estimates(
        specs, [functional], samples, seed, n=n, stream_base=stream_base
    )[0]


@dataclass
class ScanRow:
    n: int
    functional: str
    value: float
    stderr: float | None
    samples: int
    seed: int


@dataclass
class ScanResult:
    rows: list[ScanRow] = field(default_factory=list)
    trend: dict = field(default_factory=dict)


def _trend_verdict(points: list[tuple[float, float]]) -> str:
    # points: (value, slack); non-increasing up to per-step slack.
    for (prev, _), (cur, slack) in zip(points, points[1:]):
        if cur > prev + slack:
            return "non-monotone"
    return "non-increasing"


def convergence_scan(
    specs: Sequence[SamplerSpec],
    functionals: Sequence[Functional],
    n_grid: Sequence[int],
    samples: int,
    seed: int,
    truncation: int = 8,
    tv_orders: Sequence[int] = (),
) -> ScanResult:
    """Evaluate functionals and optional reference-law distances on a grid.

    ``tv_orders`` lists joint orders k; for each, the scan reports the
    total-variation distance between the empirical joint law of the
    first k cycle counts of the product and the Poisson reference law.
    """
    grid = list(n_grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"n_grid must be strictly increasing: {grid!r}")
    if not functionals and not tv_orders:
        raise ValueError("nothing to scan")
    result = ScanResult()
    series: dict[str, list[tuple[float, float]]] = {}
    for gi, n in enumerate(grid):
        base = gi * _GRID_STRIDE
        estimates = (
            moment_estimates(specs, functionals, samples, seed, n=n, stream_base=base)
            if functionals
            else []
        )
        for functional, est in zip(functionals, estimates):
            result.rows.append(
                ScanRow(
                    n=n,
                    functional=functional.label(),
                    value=est.value,
                    stderr=est.stderr,
                    samples=samples,
                    seed=seed,
                )
            )
            series.setdefault(functional.label(), []).append(
                (est.value, 2.0 * est.stderr)
            )
        for k in tv_orders:
            counts = sample_joint_counts(
                specs, k, samples, seed, n=n, stream_base=base + _GRID_STRIDE // 2
            )
            emp = empirical_joint_pmf(counts, truncation)
            ref = eta_joint_pmf(k, truncation)
            dist = tv_distance(emp, ref)
            label = f"tv:{k}"
            result.rows.append(
                ScanRow(
                    n=n,
                    functional=label,
                    value=dist,
                    stderr=None,
                    samples=samples,
                    seed=seed,
                )
            )
            occupied = max(1, len(emp.mass))
            noise = 2.0 * math.sqrt(occupied / samples)
            series.setdefault(label, []).append((dist, noise))
    for label, points in series.items():
        if len(points) >= 2:
            result.trend[label] = _trend_verdict(points)
    return result
