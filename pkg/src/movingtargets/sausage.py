"""Expected volume of the box sausage around a lazy walk on Z^d.

The exact route sums, over every lattice point ``x0`` that the union can
cover, the probability that the walk ever enters ``x0 - D_s`` at time
``s``.  Survival masses live on the finitely many points the walk can reach,
so there is no wraparound and no truncation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, SymmetryViolation

EXACT_BUDGET = 20_000_000
MC_CHUNK = 8192


def box(d: int, n: int, center: Sequence[int] | None = None) -> frozenset:
    """Q_n(center) = center + [-n, n]^d."""
    c = tuple(center) if center is not None else (0,) * d
    return frozenset(tuple(ci + o for ci, o in zip(c, off))
                     for off in itertools.product(range(-n, n + 1), repeat=d))


def linear_drift(d: int, t: int, step: Sequence[int]) -> list:
    """f(s) = s * step for s = 0..t."""
    return [tuple(s * v for v in step) for s in range(t + 1)]


def _neighbours(d: int):
    out = []
    for k in range(d):
        for sgn in (1, -1):
            e = [0] * d
            e[k] = sgn
            out.append(tuple(e))
    return out


def _reachable(d: int, t: int) -> list:
    """Points reachable by the walk at times 0..t (L1 balls)."""
    moves = _neighbours(d)
    layers = [{(0,) * d}]
    for _ in range(t):
        prev = layers[-1]
        layers.append(prev | {tuple(a + b for a, b in zip(p, m)) for p in prev for m in moves})
    return layers


def expected_union_volume(d: int, sets: Sequence[Iterable[tuple]], budget: int = EXACT_BUDGET) -> Fraction:
    """``E vol( union_s (X_s + D_s) )`` for the lazy walk from the origin, exactly."""
    sets = [frozenset(tuple(p) for p in s) for s in sets]
    t = len(sets) - 1
    layers = _reachable(d, t)
    candidates = set()
    for s, D in enumerate(sets):
        for y in layers[s]:
            for z in D:
                candidates.add(tuple(a + b for a, b in zip(y, z)))
    work = len(candidates) * sum(len(layer) for layer in layers) * (2 * d + 1)
    if work > budget:
        raise BudgetExceeded(f"exact sausage needs ~{work} operations, budget {budget}")
    moves = _neighbours(d)
    den = 4 * d
    hold = 2 * d
    total = Fraction(0)
    for x0 in candidates:
        forbidden = [{tuple(a - b for a, b in zip(x0, z)) for z in D} for D in sets]
        v = {} if (0,) * d in forbidden[0] else {(0,) * d: 1}
        for s in range(1, t + 1):
            if not v:
                break
            nxt: dict = {}
            for p, m in v.items():
                nxt[p] = nxt.get(p, 0) + hold * m
                for e in moves:
                    q = tuple(a + b for a, b in zip(p, e))
                    nxt[q] = nxt.get(q, 0) + m
            v = {p: m for p, m in nxt.items() if p not in forbidden[s]}
        total += 1 - Fraction(sum(v.values()), den ** t)
    return total


def expected_sausage_exact(d: int, n: int, traj: Sequence[Sequence[int]], budget: int = EXACT_BUDGET) -> Fraction:
    """``E vol( union_{s<=t} (X_s + f(s) + Q_n) )`` with ``traj = [f(0), ..., f(t)]``."""
    return expected_union_volume(d, [box(d, n, f) for f in traj], budget)


def _simulate(d: int, t: int, runs: int, rng: np.random.Generator) -> np.ndarray:
    """Positions (runs, t+1, d) of lazy walks from the origin."""
    move = rng.random((runs, t)) < 0.5
    axis = rng.integers(0, d, size=(runs, t))
    sign = rng.integers(0, 2, size=(runs, t)) * 2 - 1
    steps = np.zeros((runs, t, d), dtype=np.int64)
    r_idx, s_idx = np.nonzero(move)
    steps[r_idx, s_idx, axis[r_idx, s_idx]] = sign[r_idx, s_idx]
    pos = np.concatenate([np.zeros((runs, 1, d), dtype=np.int64), np.cumsum(steps, axis=1)], axis=1)
    return pos


def expected_sausage_mc(d: int, n: int, traj: Sequence[Sequence[int]], runs: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of the sausage volume.

    Runs are simulated in fixed-size chunks, chunk ``k`` drawing from
    ``SeedSequence([seed, k])``, so the estimate depends only on ``seed``
    and ``runs``.
    """
    if runs < 1000:
        raise ValueError("runs must be at least 1000")
    f = np.asarray(traj, dtype=np.int64).reshape(len(traj), d)
    t = len(traj) - 1
    offsets = np.array(list(itertools.product(range(-n, n + 1), repeat=d)), dtype=np.int64)
    span = 2 * (t + n + int(np.abs(f).max(initial=0))) + 3
    vols = np.empty(runs, dtype=np.int64)
    for k, lo in enumerate(range(0, runs, MC_CHUNK)):
        m = min(MC_CHUNK, runs - lo)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k])))
        centres = _simulate(d, t, m, rng) + f[None, :, :]
        pts = (centres[:, :, None, :] + offsets[None, None, :, :]).reshape(m, -1, d) + span // 2
        keys = np.zeros(pts.shape[:2], dtype=np.int64)
        for axis_ in range(d):
            keys = keys * span + pts[:, :, axis_]
        keys.sort(axis=1)
        vols[lo:lo + m] = 1 + (np.diff(keys, axis=1) != 0).sum(axis=1)
    est = float(vols.mean())
    return est, float(vols.std(ddof=1) / np.sqrt(runs))


@dataclass(frozen=True)
class HyperplaneReflection:
    """``x_coord -> c - x_coord`` on Z^d; ``positive`` picks which side of ``c/2`` is H+."""

    d: int
    coord: int
    c: int
    positive: int = 1

    def image(self, x: tuple) -> tuple:
        y = list(x)
        y[self.coord] = self.c - y[self.coord]
        return tuple(y)

    def side(self, x: tuple) -> str:
        gap = 2 * x[self.coord] - self.c
        if gap == 0:
            return "0"
        return "+" if gap * self.positive > 0 else "-"


def check_prelim_volume(d: int, sigma: HyperplaneReflection, D: Sequence[Iterable[tuple]]):
    """Both sides of the polarization inequality for expected union volumes.

    ``D = [D_0, ..., D_t]`` must be symmetric sets.  Returns ``(lhs, rhs,
    lhs >= rhs)`` where the right side uses the polarized sets.
    """
    from .torus import polarize_set
    sets = [frozenset(tuple(p) for p in s) for s in D]
    for i, s in enumerate(sets):
        if s != frozenset(tuple(-c for c in p) for p in s):
            raise SymmetryViolation(f"D_{i} is not symmetric about the origin")
    lhs = expected_union_volume(d, sets)
    rhs = expected_union_volume(d, [polarize_set(s, sigma) for s in sets])
    return lhs, rhs, lhs >= rhs
