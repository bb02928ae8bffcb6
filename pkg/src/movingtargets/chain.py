"""Finite Markov chains: stationary laws, total variation and mixing times.

A chain runs in one of two numeric modes.  In *exact* mode every transition
probability is a :class:`~fractions.Fraction`; internally the matrix is kept
as an integer numerator matrix over one common denominator so that powers
and survival recursions stay in integer arithmetic.  In *float* mode the
matrix is a plain ``float64`` array.

Code that wants to be mode-agnostic works with *scaled* arrays: a quantity
``x`` after ``k`` kernel applications is stored as ``num / den**k`` where
``(kernel, den) = chain.kernel``.  In float mode ``den == 1`` and ``num`` is
already the value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded, InvalidChain, LengthMismatch, MonotonicityViolation, SingularSystem
from .linalg import solve, to_fraction

FLOAT_ROW_TOL = 1e-12
FLOAT_MONO_TOL = 1e-12
EXACT_DEFAULT_LIMIT = 64


class MarkovChain:
    """Immutable finite irreducible Markov chain.

    Parameters
    ----------
    rows : n x n array-like
        Transition matrix.  Entries may be ints, Fractions, ``"p/q"`` strings
        or floats.
    exact : bool, optional
        Numeric mode.  Defaults to exact when every entry is rational
        (int, Fraction or string) and ``n <= 64``.
    name : str, optional
        Free-form label carried into reports.
    """

    def __init__(self, rows, exact: bool | None = None, name: str | None = None):
        raw = [list(r) for r in rows]
        n = len(raw)
        if n == 0 or any(len(r) != n for r in raw):
            raise InvalidChain("transition matrix must be square and nonempty")
        rational = all(isinstance(v, (int, Fraction, str, np.integer)) for r in raw for v in r)
        if exact is None:
            exact = rational and n <= EXACT_DEFAULT_LIMIT
        self.n = n
        self.exact = bool(exact)
        self.name = name
        self._memo: dict = {}

        if self.exact:
            P = np.empty((n, n), dtype=object)
            for i, r in enumerate(raw):
                P[i] = [to_fraction(v) for v in r]
            if any(v < 0 for v in P.flat):
                raise InvalidChain("negative transition probability")
            for i in range(n):
                if sum(P[i]) != 1:
                    raise InvalidChain(f"row {i} sums to {sum(P[i])}, not 1")
            den = lcm(*(v.denominator for v in P.flat))
            num = np.empty((n, n), dtype=object)
            for i in range(n):
                num[i] = [v.numerator * (den // v.denominator) for v in P[i]]
            self.P = P
            self.num = num
            self.den = den
            self._nz = [(i, j, num[i, j]) for i in range(n) for j in range(n) if num[i, j]]
        else:
            P = np.array([[float(to_fraction(v)) if isinstance(v, str) else float(v) for v in r] for r in raw])
            if (P < 0).any():
                raise InvalidChain("negative transition probability")
            bad = np.abs(P.sum(axis=1) - 1.0) > FLOAT_ROW_TOL
            if bad.any():
                raise InvalidChain(f"row {int(np.argmax(bad))} does not sum to 1 within {FLOAT_ROW_TOL}")
            self.P = P
            self.num = P
            self.den = 1
        self.P.flags.writeable = False
        self._check_irreducible()

    def _check_irreducible(self) -> None:
        mask = np.array([[bool(v) for v in row] for row in self.P], dtype=float)
        ncomp, _ = connected_components(csr_matrix(mask), directed=True, connection="strong")
        if ncomp != 1:
            raise InvalidChain(f"chain is reducible ({ncomp} strongly connected classes)")

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        label = f" {self.name!r}" if self.name else ""
        return f"MarkovChain{label}(n={self.n}, mode={mode})"

    # -- scaled arithmetic -------------------------------------------------
    @property
    def kernel(self) -> tuple[np.ndarray, int]:
        return self.num, self.den

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(0)
            return out
        return np.zeros(shape)

    def identity(self) -> np.ndarray:
        out = self.zeros((self.n, self.n))
        for i in range(self.n):
            out[i, i] = 1
        return out

    def rmul(self, m: np.ndarray) -> np.ndarray:
        """Return ``m @ K`` (row vectors pushed forward one step)."""
        if not self.exact:
            return m @ self.P
        out = self.zeros(m.shape)
        for i, j, v in self._nz:
            out[..., j] += m[..., i] * v
        return out

    def lmul(self, u: np.ndarray) -> np.ndarray:
        """Return ``K @ u`` (functions pulled back one step)."""
        if not self.exact:
            return self.P @ u
        out = self.zeros(u.shape)
        for i, j, v in self._nz:
            out[i, ...] += u[j, ...] * v
        return out

    def value(self, num, scale):
        """Turn a scaled numerator back into a number."""
        if self.exact:
            return Fraction(num, scale)
        return num / scale

    def as_number(self, x):
        f = to_fraction(x)
        return f if self.exact else float(f)

    def with_mode(self, exact: bool) -> "MarkovChain":
        if exact == self.exact:
            return self
        if exact:
            rows = [[to_fraction(v) for v in r] for r in self.P]
        else:
            rows = [[float(v) for v in r] for r in self.P]
        return MarkovChain(rows, exact=exact, name=self.name)


@dataclass(frozen=True)
class MixingProfile:
    """Worst-case TV distances d(0..T) and the mixing times they imply."""

    values: tuple
    epsilon_thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        for a, b in zip(self.values, self.values[1:]):
            if b > a + (0 if isinstance(a, Fraction) else FLOAT_MONO_TOL):
                raise MonotonicityViolation(f"d(t) increased from {a} to {b}")


def stationary(chain: MarkovChain) -> np.ndarray:
    """Stationary distribution of ``chain`` (cached per instance)."""
    if "pi" in chain._memo:
        return chain._memo["pi"]
    n = chain.n
    a = (chain.identity() - chain.P).T.copy() if chain.exact else np.eye(n) - chain.P.T
    rhs = chain.zeros(n)
    # replace the last balance equation by normalisation
    a[n - 1, :] = 1
    rhs[n - 1] = 1
    pi = solve(a, rhs, chain.exact)
    if chain.exact:
        if any(v < 0 for v in pi) or sum(pi) != 1:
            raise SingularSystem("stationary solve did not normalise")
    else:
        pi = np.clip(pi, 0.0, None)
        pi = pi / pi.sum()
        if np.max(np.abs(pi @ chain.P - pi)) > 1e-10:
            raise SingularSystem("stationary residual above 1e-10")
    pi.flags.writeable = False
    chain._memo["pi"] = pi
    return pi


def tv_distance(mu: Sequence, nu: Sequence):
    """Total variation distance, half the L1 norm of the difference."""
    if len(mu) != len(nu):
        raise LengthMismatch(f"lengths {len(mu)} and {len(nu)} differ")
    return sum(abs(a - b) for a, b in zip(mu, nu)) / 2


def _tv_scan(chain: MarkovChain) -> Iterator:
    """Yield d(0), d(1), ... from an incrementally maintained matrix power."""
    pi = stationary(chain)
    power = chain.identity()
    if chain.exact:
        pden = lcm(*(v.denominator for v in pi))
        pnum = np.array([v.numerator * (pden // v.denominator) for v in pi], dtype=object)
        scale = 1
        while True:
            gap = np.abs(power * pden - pnum * scale)
            yield Fraction(max(gap.sum(axis=1)), 2 * scale * pden)
            power = chain.rmul(power)
            scale *= chain.den
    else:
        while True:
            yield float(np.max(np.abs(power - pi).sum(axis=1)) / 2)
            power = power @ chain.P


def worst_case_tv(chain: MarkovChain, t: int):
    """d(t) = max over starts x of ||P^t(x, .) - pi||_TV."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    for s, d in enumerate(_tv_scan(chain)):
        if s == t:
            return d


def mixing_profile(chain: MarkovChain, horizon: int, epsilons: Sequence = ()) -> MixingProfile:
    values = []
    for s, d in enumerate(_tv_scan(chain)):
        values.append(d)
        if s == horizon:
            break
    thresholds = {}
    for eps in epsilons:
        hit = [s for s, d in enumerate(values) if d <= chain.as_number(eps)]
        thresholds[eps] = hit[0] if hit else None
    return MixingProfile(tuple(values), thresholds)


def t_mix(chain: MarkovChain, epsilon=Fraction(1, 4), cap: int = 100_000) -> int:
    """Least t with d(t) <= epsilon.

    Raises
    ------
    CapExceeded
        If d(cap) is still above epsilon (periodic chain or cap too small).
    MonotonicityViolation
        If the scan observes d(t+1) > d(t).
    """
    eps = chain.as_number(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    key = ("t_mix", eps, cap)
    if key in chain._memo:
        cached = chain._memo[key]
        if isinstance(cached, Exception):
            raise cached
        return cached
    slack = 0 if chain.exact else FLOAT_MONO_TOL
    prev = None
    for s, d in enumerate(_tv_scan(chain)):
        if prev is not None and d > prev + slack:
            raise MonotonicityViolation(f"d({s}) = {d} > d({s - 1}) = {prev}")
        if d <= eps:
            chain._memo[key] = s
            return s
        if s >= cap:
            err = CapExceeded(f"d({cap}) = {float(d):.6g} > {float(eps):.6g}")
            chain._memo[key] = err
            raise err
        prev = d


def period(chain: MarkovChain) -> int:
    """Period of the chain: gcd of level differences along edges of a BFS tree."""
    if "period" in chain._memo:
        return chain._memo["period"]
    level = {0: 0}
    frontier = [0]
    g = 0
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(chain.n):
                if chain.P[u, v]:
                    if v not in level:
                        level[v] = level[u] + 1
                        nxt.append(v)
                    else:
                        g = gcd(g, level[u] + 1 - level[v])
        frontier = nxt
    chain._memo["period"] = abs(g)
    return abs(g)


def lazify(chain: MarkovChain) -> MarkovChain:
    """The chain (P + I) / 2."""
    half = Fraction(1, 2) if chain.exact else 0.5
    rows = [[half * chain.P[i, j] + (half if i == j else 0) for j in range(chain.n)] for i in range(chain.n)]
    name = f"lazy({chain.name})" if chain.name else None
    return MarkovChain(rows, exact=chain.exact, name=name)


# -- builders ---------------------------------------------------------------

def cycle_walk(n: int, p_forward=Fraction(1, 2), exact: bool = True) -> MarkovChain:
    """Walk on Z_n stepping +1 with probability p_forward and -1 otherwise."""
    if n < 3:
        raise InvalidChain("cycle needs n >= 3")
    p = to_fraction(p_forward) if exact else float(p_forward)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][(i + 1) % n] += p
        rows[i][(i - 1) % n] += 1 - p
    return MarkovChain(rows, exact=exact, name=f"cycle({n},{p_forward})")


def biased_cycle(n: int, p=Fraction(3, 4), exact: bool = True) -> MarkovChain:
    return cycle_walk(n, p, exact=exact)


def lazy_cycle(n: int, exact: bool = True) -> MarkovChain:
    return lazify(cycle_walk(n, Fraction(1, 2), exact=exact))


def random_chain(n: int, rng: np.random.Generator, density: float = 0.5, max_weight: int = 6,
                 exact: bool = True) -> MarkovChain:
    """Random irreducible chain with rational entries.

    A Hamiltonian cycle through a random permutation guarantees irreducibility;
    further edges are added with probability ``density``.
    """
    order = rng.permutation(n)
    weights = [[0] * n for _ in range(n)]
    for k in range(n):
        weights[order[k]][order[(k + 1) % n]] = int(rng.integers(1, max_weight + 1))
    for i in range(n):
        for j in range(n):
            if weights[i][j] == 0 and rng.random() < density:
                weights[i][j] = int(rng.integers(1, max_weight + 1))
    rows = []
    for w in weights:
        tot = sum(w)
        rows.append([Fraction(x, tot) for x in w])
    return MarkovChain(rows, exact=exact, name=f"random({n})")
