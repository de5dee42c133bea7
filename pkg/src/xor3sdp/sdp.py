"""Quadratic-program relaxation and Gaussian-projection rounding.

The relaxation max sum a_ij <v_i, v_j> over unit vectors is solved by
block-coordinate ascent on a low-rank factor (each vector is repeatedly set
to the normalized weighted sum of its neighbors). Rounding projects the
vectors onto a random Gaussian direction, truncates at a threshold T swept
over a grid (T=0 meaning pure sign rounding), and keeps the best sampled
sign vector by exact objective value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .fourier import Monomial, MultilinearPoly, Var, make_poly
from .instances import ValidationError

DEFAULT_T_GRID = (0.0, 0.5, 1.0, math.sqrt(2.0 * math.log(4.0)), 2.0)


class NumericalError(RuntimeError):
    """The solver produced non-finite values."""


@dataclass(frozen=True)
class QuadraticObjective:
    """Sparse symmetric off-diagonal form: sum over i<j of a_ij x_i x_j."""

    n: int
    entries: dict[tuple[int, int], float]

    def __post_init__(self) -> None:
        for (i, j), _ in self.entries.items():
            if not (0 <= i < j < self.n):
                raise ValidationError(f"entry key ({i},{j}) must satisfy 0 <= i < j < n")

    def value(self, signs: Sequence[int]) -> float:
        return float(sum(a * signs[i] * signs[j] for (i, j), a in self.entries.items()))


@dataclass(frozen=True)
class SdpConfig:
    rank: int | None = None  # default min(n, ceil(sqrt(2n)) + 1)
    max_sweeps: int = 200
    tol: float = 1e-9
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    trials: int = 25
    restarts: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rank is not None and self.rank < 2:
            raise ValidationError("rank must be >= 2")
        if not self.tol > 0:
            raise ValidationError("tol must be > 0")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")


@dataclass(frozen=True, eq=False)
class GramFactor:
    rank: int
    vectors: np.ndarray  # (n, rank), unit rows
    degenerate: bool = False
    sweep_values: tuple[float, ...] = ()


def default_rank(n: int) -> int:
    return max(2, min(n, math.ceil(math.sqrt(2 * n)) + 1))


def relaxation_value(g: GramFactor, q: QuadraticObjective) -> float:
    if g.vectors.shape[0] != q.n:
        raise ValidationError(
            f"factor has {g.vectors.shape[0]} vectors, objective has {q.n} variables"
        )
    total = 0.0
    for (i, j), a in q.entries.items():
        total += a * float(g.vectors[i] @ g.vectors[j])
    return total


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return v / norms


def _ascend(q: QuadraticObjective, rank: int, cfg: SdpConfig, rng: np.random.Generator):
    n = q.n
    v = _normalize_rows(rng.standard_normal((n, rank)))
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), a in q.entries.items():
        neighbors[i].append((j, a))
        neighbors[j].append((i, a))
    values = [relaxation_value(GramFactor(rank, v), q)]
    for _ in range(cfg.max_sweeps):
        for i in range(n):
            if not neighbors[i]:
                continue
            s = np.zeros(rank)
            for j, a in neighbors[i]:
                s += a * v[j]
            norm = float(np.linalg.norm(s))
            if norm > 1e-300:
                v[i] = s / norm
        val = relaxation_value(GramFactor(rank, v), q)
        if not math.isfinite(val):
            raise NumericalError("relaxation value is not finite")
        if val < values[-1] - 1e-12:
            raise NumericalError(
                f"ascent lost monotonicity: {values[-1]} -> {val}"
            )
        values.append(val)
        if val - values[-2] <= cfg.tol * max(1.0, abs(val)):
            break
    return v, values


def solve_relaxation(q: QuadraticObjective, cfg: SdpConfig) -> GramFactor:
    """Best factor over `cfg.restarts` seeded ascent runs."""
    if q.n == 0 or not q.entries or all(a == 0 for a in q.entries.values()):
        rank = cfg.rank or default_rank(max(q.n, 2))
        rng = np.random.default_rng([cfg.seed, 0, 0])
        v = _normalize_rows(rng.standard_normal((max(q.n, 0), rank)))
        return GramFactor(rank, v, degenerate=True, sweep_values=(0.0,))
    rank = cfg.rank or default_rank(q.n)
    best: GramFactor | None = None
    for run in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, 0, run])
        v, values = _ascend(q, rank, cfg, rng)
        if best is None or values[-1] > best.sweep_values[-1]:
            best = GramFactor(rank, v, sweep_values=tuple(values))
    assert best is not None
    return best


def cw_round(
    g: GramFactor, q: QuadraticObjective, cfg: SdpConfig
) -> tuple[list[int], float]:
    """Best sampled sign vector and its exact objective value.

    Each trial draws one Gaussian direction and sweeps the truncation grid;
    T=0 is the pure sign-of-projection candidate, so it is always sampled.
    Ties keep the earliest (trial, grid) candidate.
    """
    n = q.n
    if n == 0:
        return [], 0.0
    ii = np.array([i for (i, _) in q.entries], dtype=np.int64)
    jj = np.array([j for (_, j) in q.entries], dtype=np.int64)
    aa = np.array(list(q.entries.values()), dtype=np.float64)
    best_signs: np.ndarray | None = None
    best_val = -math.inf
    for trial in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, 1, trial])
        gamma = rng.standard_normal(g.rank)
        u = g.vectors @ gamma
        for t in cfg.t_grid:
            if t == 0:
                y = np.where(u >= 0, 1.0, -1.0)
            else:
                y = np.clip(u / t, -1.0, 1.0)
            x = np.where(rng.random(n) < (1.0 + y) / 2.0, 1, -1).astype(np.int64)
            val = float(aa @ (x[ii] * x[jj])) if len(aa) else 0.0
            if val > best_val:
                best_val = val
                best_signs = x
    assert best_signs is not None
    return [int(s) for s in best_signs], best_val


def from_bilinear_poly(
    p: MultilinearPoly, var_index: Mapping[Var, int]
) -> QuadraticObjective:
    """Flatten a degree-2 polynomial through the given variable->index map."""
    entries: dict[tuple[int, int], float] = {}
    for m, coeff in p.terms.items():
        if len(m) != 2:
            raise ValidationError(f"monomial {m} has degree {len(m)}, expected 2")
        i, j = sorted(var_index[v] for v in m)
        if i == j:
            raise ValidationError(f"monomial {m} maps to a diagonal entry")
        entries[(i, j)] = entries.get((i, j), 0.0) + float(coeff)
    n = (max(var_index.values()) + 1) if var_index else 0
    return QuadraticObjective(n, entries)


def variable_order(p: MultilinearPoly) -> dict[Var, int]:
    return {v: i for i, v in enumerate(sorted(p.variables()))}


def to_bilinear_poly(
    q: QuadraticObjective, var_index: Mapping[Var, int]
) -> MultilinearPoly:
    """Inverse of from_bilinear_poly (coefficients become floats)."""
    from fractions import Fraction

    inverse = {i: v for v, i in var_index.items()}
    terms: dict[Monomial, Fraction] = {}
    for (i, j), a in q.entries.items():
        m = tuple(sorted((inverse[i], inverse[j])))
        terms[m] = Fraction(a)
    return make_poly(terms)
