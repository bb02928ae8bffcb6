"""Hitting times of static sets and of time-varying target sequences.

Conventions: ``tau_A = inf{t >= 0 : X_t in A_t}``, so a walk that starts
inside its target has hitting time zero.  Target sequences are oblivious
(they depend on time only) and eventually constant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .chain import MarkovChain, stationary
from .errors import StateLimitExceeded
from .linalg import solve, to_fraction

StateSet = frozenset

ALL_FAMILY_LIMIT = 16
MINIMAL_FAMILY_LIMIT = 20


def state_set(members: Iterable[int]) -> frozenset:
    return frozenset(int(m) for m in members)


def measure(chain: MarkovChain, members: Iterable[int]):
    pi = stationary(chain)
    return sum((pi[i] for i in members), Fraction(0) if chain.exact else 0.0)


def meets(chain: MarkovChain, members: Iterable[int], alpha) -> bool:
    """pi(A) >= alpha (exactly, or with 1e-12 slack in float mode)."""
    a = chain.as_number(alpha)
    m = measure(chain, members)
    return m >= a if chain.exact else m >= a - 1e-12


@dataclass(frozen=True)
class SetSequence:
    """Targets ``A_0 .. A_{T-1}`` followed by ``tail`` forever."""

    prefix: tuple = ()
    tail: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(state_set(s) for s in self.prefix))
        object.__setattr__(self, "tail", state_set(self.tail))
        if not self.tail:
            raise ValueError("tail of a SetSequence must be nonempty")

    @classmethod
    def constant(cls, target: Iterable[int]) -> "SetSequence":
        return cls((), target)

    @classmethod
    def trajectory(cls, points: Sequence[int], final: int) -> "SetSequence":
        """Single-point target visiting ``points`` then resting at ``final``."""
        return cls(tuple({p} for p in points), {final})

    def __len__(self) -> int:
        return len(self.prefix)

    def at(self, t: int) -> frozenset:
        return self.prefix[t] if t < len(self.prefix) else self.tail

    def in_family(self, chain: MarkovChain, alpha) -> bool:
        """Membership of the sequence in the collection of alpha-large sequences."""
        return all(meets(chain, s, alpha) for s in (*self.prefix, self.tail))

    def to_json(self) -> dict:
        return {"prefix": [sorted(s) for s in self.prefix], "tail": sorted(self.tail)}

    @classmethod
    def from_json(cls, doc: dict) -> "SetSequence":
        return cls(tuple(doc.get("prefix", ())), doc["tail"])


@dataclass(frozen=True)
class SurvivalVector:
    """``masses[y] = P(X_t = y, no collision through time t)``."""

    masses: tuple
    time: int = 0

    @property
    def total(self):
        return sum(self.masses)


def _mask(vec: np.ndarray, members: Iterable[int]) -> np.ndarray:
    idx = list(members)
    if idx:
        vec[..., idx] = 0
    return vec


def static_hitting(chain: MarkovChain, target: Iterable[int]) -> np.ndarray:
    """Expected hitting times ``E_x[tau_A]`` for every start ``x``.

    Solves ``(I - P) h = 1`` on the complement of ``A`` with ``h = 0`` on
    ``A``; exact in exact mode.
    """
    target = state_set(target)
    if not target:
        raise ValueError("target set must be nonempty")
    key = ("hit", target)
    if key in chain._memo:
        return chain._memo[key]
    rest = [i for i in range(chain.n) if i not in target]
    h = chain.zeros(chain.n)
    if rest:
        sub = chain.P[np.ix_(rest, rest)]
        a = (chain.identity()[np.ix_(rest, rest)] - sub)
        rhs = chain.zeros(len(rest)) + 1
        h[rest] = solve(a, rhs, chain.exact)
    if chain.exact:
        h = np.array([to_fraction(v) for v in h], dtype=object)
    h.flags.writeable = False
    chain._memo[key] = h
    return h


def all_pairs_hitting(chain: MarkovChain) -> np.ndarray:
    """``H[x, y] = E_x[tau_y]`` through the fundamental matrix.

    ``Z = (I - P + 1 pi)^{-1}`` and ``H[x, y] = (Z[y, y] - Z[x, y]) / pi[y]``.
    Independent of :func:`static_hitting`, which solves one system per target.
    """
    pi = stationary(chain)
    n = chain.n
    ones_pi = np.tile(np.asarray(pi, dtype=object if chain.exact else float), (n, 1))
    a = chain.identity() - chain.P + ones_pi
    z = solve(a, chain.identity(), chain.exact)
    diag = np.array([z[y, y] for y in range(n)], dtype=z.dtype)
    return (diag[None, :] - z) / np.asarray(pi, dtype=z.dtype)[None, :]


def survival_step(chain: MarkovChain, v: SurvivalVector, next_target: Iterable[int]) -> SurvivalVector:
    """Push ``v`` one step forward and remove the mass landing in ``next_target``."""
    vec = np.asarray(v.masses, dtype=object if chain.exact else float) @ chain.P
    vec = _mask(vec, next_target)
    return SurvivalVector(tuple(vec), v.time + 1)


def initial_survival(chain: MarkovChain, start: int, first_target: Iterable[int]) -> SurvivalVector:
    vec = chain.zeros(chain.n)
    vec[start] = 1
    vec = _mask(vec, first_target)
    return SurvivalVector(tuple(vec), 0)


def moving_hitting(chain: MarkovChain, start: int, seq: SetSequence):
    """``E_start[tau]`` for a target sequence, by the forward survival recursion.

    ``sum_{t<T} |v_t| + sum_y v_T(y) E_y[tau_tail]`` with ``v_t`` the survival
    vector after masking by ``A_t``.
    """
    num, den = chain.kernel
    v = chain.zeros(chain.n)
    v[start] = 1
    _mask(v, seq.at(0))
    total = Fraction(0) if chain.exact else 0.0
    scale = 1
    for t in range(len(seq)):
        total += chain.value(v.sum(), scale)
        v = _mask(chain.rmul(v), seq.at(t + 1))
        scale *= den
    h = static_hitting(chain, seq.tail)
    return total + (v @ h) / scale


def moving_hitting_all(chain: MarkovChain, seq: SetSequence) -> np.ndarray:
    """``E_x[tau]`` for every start ``x`` by backward recursion over the prefix.

    ``g_T = h_tail`` and ``g_t = 1(y not in A_t) (1 + P g_{t+1})``; the result is
    ``g_0``.  Serves as the independent route to :func:`moving_hitting`.
    """
    g = np.array(static_hitting(chain, seq.tail), dtype=object if chain.exact else float)
    for t in reversed(range(len(seq))):
        g = np.asarray(chain.P @ g) + 1
        _mask(g, seq.at(t))
    return g


def moving_hitting_mc(chain: MarkovChain, start: int, seq: SetSequence, runs: int, seed: int,
                      max_steps: int = 10_000_000) -> tuple[float, float]:
    """Monte Carlo estimate of ``E_start[tau]`` with its standard error."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(np.asarray(chain.P, dtype=float), axis=1)
    cdf[:, -1] = 1.0
    n = chain.n
    member = np.zeros((len(seq) + 1, n), dtype=bool)
    for t in range(len(seq) + 1):
        member[t, list(seq.at(t))] = True
    pos = np.full(runs, start, dtype=np.int64)
    tau = np.full(runs, -1, dtype=np.int64)
    alive = np.arange(runs)
    t = 0
    while alive.size:
        row = member[min(t, len(seq))]
        caught = row[pos[alive]]
        tau[alive[caught]] = t
        alive = alive[~caught]
        if not alive.size:
            break
        if t >= max_steps:
            raise RuntimeError("Monte Carlo walk exceeded max_steps")
        u = rng.random(alive.size)
        pos[alive] = (cdf[pos[alive]] < u[:, None]).sum(axis=1)
        t += 1
    est = float(tau.mean())
    se = float(tau.std(ddof=1) / np.sqrt(runs)) if runs > 1 else float("inf")
    return est, se


# -- t_H ----------------------------------------------------------------------

def interval(n: int, start: int, length: int) -> frozenset:
    return frozenset((start + k) % n for k in range(length))


def qualifying_sets(chain: MarkovChain, alpha, family: str) -> list[frozenset]:
    """Target sets of measure >= alpha drawn from ``family``.

    ``all``: every qualifying subset.  ``minimal``: inclusion-minimal ones.
    ``intervals``: for each start on the cycle, the shortest qualifying arc.
    ``singleton-complements``: ``Omega minus {y}`` when it qualifies.
    """
    n = chain.n
    if family == "all":
        if n > ALL_FAMILY_LIMIT:
            raise StateLimitExceeded(f"family=all needs n <= {ALL_FAMILY_LIMIT}, got {n}")
        return [frozenset(c) for k in range(1, n + 1) for c in itertools.combinations(range(n), k)
                if meets(chain, c, alpha)]
    if family == "minimal":
        if n > MINIMAL_FAMILY_LIMIT:
            raise StateLimitExceeded(f"family=minimal needs n <= {MINIMAL_FAMILY_LIMIT}, got {n}")
        out = []
        for k in range(1, n + 1):
            for c in itertools.combinations(range(n), k):
                if meets(chain, c, alpha) and not any(meets(chain, c[:i] + c[i + 1:], alpha) for i in range(k)):
                    out.append(frozenset(c))
        return out
    if family == "intervals":
        out = []
        for s in range(n):
            for length in range(1, n + 1):
                arc = interval(n, s, length)
                if meets(chain, arc, alpha):
                    out.append(arc)
                    break
        return sorted(set(out), key=lambda a: (len(a), sorted(a)))
    if family == "singleton-complements":
        return [frozenset(range(n)) - {y} for y in range(n) if meets(chain, frozenset(range(n)) - {y}, alpha)] \
            or [frozenset(range(n))]
    raise ValueError(f"unknown set family {family!r}")


def t_hit(chain: MarkovChain, alpha, family: str = "minimal"):
    """Max over starts and qualifying sets of the static hitting time.

    Returns ``(value, argmax start, argmax set)``; ties resolve to the first
    set in the family's enumeration order and the smallest start.
    """
    a = chain.as_number(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    best = None
    for s in qualifying_sets(chain, alpha, family):
        h = static_hitting(chain, s)
        x = int(max(range(chain.n), key=lambda i: (h[i], -i)))
        if best is None or h[x] > best[0]:
            best = (h[x], x, s)
    return best
t_H = t_hit
