"""Lazy walks on Z_n^d, reflections and two-point rearrangements.

Points of the torus are indexed in mixed radix, first coordinate most
significant.  All survival probabilities here are exact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .chain import MarkovChain
from .errors import InvalidCase, InvalidReflection, SearchSpaceExceeded, StateLimitExceeded

STATE_BUDGET = 4096
TRAJECTORY_BUDGET = 10 ** 7


def coords(n: int, d: int, index: int) -> tuple:
    out = []
    for _ in range(d):
        index, r = divmod(index, n)
        out.append(r)
    return tuple(reversed(out))


def index_of(n: int, point: Sequence[int]) -> int:
    idx = 0
    for c in point:
        idx = idx * n + (c % n)
    return idx


def antipode(n: int, d: int) -> tuple:
    return (n // 2,) * d


def torus_distance(n: int, x: Sequence[int], y: Sequence[int]) -> int:
    return sum(min((a - b) % n, (b - a) % n) for a, b in zip(x, y))


def lazy_torus_kernel(n: int, d: int, lazy: bool = True) -> MarkovChain:
    """Lazy simple random walk on Z_n^d: hold 1/2, each neighbour 1/(4d).

    With ``lazy=False`` the walk moves to each of the 2d neighbours with
    probability 1/(2d).
    """
    if n < 3 or d < 1:
        raise ValueError("need n >= 3 and d >= 1")
    size = n ** d
    if size > STATE_BUDGET:
        raise StateLimitExceeded(f"n^d = {size} exceeds {STATE_BUDGET}")
    hold = Fraction(1, 2) if lazy else Fraction(0)
    step = Fraction(1, 4 * d) if lazy else Fraction(1, 2 * d)
    rows = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        x = coords(n, d, i)
        rows[i][i] += hold
        for k in range(d):
            for s in (1, -1):
                y = list(x)
                y[k] = (y[k] + s) % n
                rows[i][index_of(n, y)] += step
    name = f"{'lazy-' if lazy else ''}torus({n},{d})"
    return MarkovChain(rows, exact=True, name=name)


# -- reflections --------------------------------------------------------------

@dataclass(frozen=True)
class Reflection:
    """Involutive isometry of Z_n^d acting on one coordinate as ``x -> c - x``.

    ``h_plus``, ``h_minus`` and ``h_zero`` partition the point indices.
    """

    n: int
    d: int
    mapping: tuple
    h_plus: frozenset
    h_minus: frozenset
    h_zero: frozenset

    def image(self, x: int) -> int:
        return self.mapping[x]

    def side(self, x: int) -> str:
        if x in self.h_plus:
            return "+"
        if x in self.h_minus:
            return "-"
        return "0"

    @classmethod
    def on_coordinate(cls, n: int, d: int, coord: int, c: int, plus: Iterable[int], minus: Iterable[int]):
        """Reflection ``x_coord -> (c - x_coord) mod n`` with the 1-d half spaces ``plus``/``minus``."""
        plus, minus = set(plus), set(minus)
        size = n ** d
        mapping, hp, hm, h0 = [], set(), set(), set()
        for i in range(size):
            x = list(coords(n, d, i))
            r = x[coord]
            x[coord] = (c - r) % n
            mapping.append(index_of(n, x))
            (hp if r in plus else hm if r in minus else h0).add(i)
        refl = cls(n, d, tuple(mapping), frozenset(hp), frozenset(hm), frozenset(h0))
        refl.validate()
        return refl

    @classmethod
    def bisector(cls, n: int, d: int, coord: int, p: int, q: int):
        """Reflection swapping residues ``p`` and ``q`` in one coordinate.

        ``H+`` holds the residues strictly closer (on the cycle) to ``p`` than
        to ``q``, ``H-`` those strictly closer to ``q``.
        """
        c = (p + q) % n
        dist = lambda a, b: min((a - b) % n, (b - a) % n)
        plus = {r for r in range(n) if dist(r, p) < dist(r, q)}
        minus = {r for r in range(n) if dist(r, q) < dist(r, p)}
        return cls.on_coordinate(n, d, coord, c, plus, minus)

    def validate(self) -> None:
        """Check the reflection axioms exhaustively; raise InvalidReflection otherwise."""
        size = self.n ** self.d
        m = self.mapping
        if self.h_plus | self.h_minus | self.h_zero != frozenset(range(size)) or \
                len(self.h_plus) + len(self.h_minus) + len(self.h_zero) != size:
            raise InvalidReflection("H+, H-, H0 do not partition the torus")
        pts = [coords(self.n, self.d, i) for i in range(size)]
        for i in range(size):
            if m[m[i]] != i:
                raise InvalidReflection(f"not an involution at {pts[i]}")
        if {m[i] for i in self.h_plus} != set(self.h_minus):
            raise InvalidReflection("sigma(H+) != H-")
        if any(m[i] != i for i in self.h_zero):
            raise InvalidReflection("sigma moves a point of H0")
        dist = lambda a, b: torus_distance(self.n, pts[a], pts[b])
        for i in range(size):
            for j in range(i, size):
                if dist(i, j) != dist(m[i], m[j]):
                    raise InvalidReflection(f"not an isometry on {pts[i]}, {pts[j]}")
        plus = sorted(self.h_plus)
        for i in plus:
            for j in plus:
                if not dist(i, j) < dist(i, m[j]):
                    raise InvalidReflection(f"d(x,y) < d(x, sigma y) fails for {pts[i]}, {pts[j]}")


def polarize_set(A: Iterable, sigma) -> frozenset:
    """Two-point rearrangement of a set.

    On ``H+`` keep ``A | sigma A``, on ``H-`` keep ``A & sigma A`` and on the
    fixed points keep ``A``.  ``sigma`` needs ``image`` and ``side``; sets on
    infinite spaces are fine as long as they are finite.
    """
    A = frozenset(A)
    out = set()
    for x in A | {sigma.image(y) for y in A}:
        side = sigma.side(x)
        in_a, in_mirror = x in A, sigma.image(x) in A
        if side == "+" and (in_a or in_mirror):
            out.add(x)
        elif side == "-" and in_a and in_mirror:
            out.add(x)
        elif side == "0" and in_a:
            out.add(x)
    return frozenset(out)


def polarize_function(f: Sequence, sigma: Reflection) -> list:
    out = list(f)
    for x in range(len(f)):
        s = sigma.side(x)
        if s == "+":
            out[x] = max(f[x], f[sigma.image(x)])
        elif s == "-":
            out[x] = min(f[x], f[sigma.image(x)])
    return out


# -- two-point inequality ------------------------------------------------------

@dataclass(frozen=True)
class TwoPointInstance:
    """Nonnegative ``phi_i`` on {+, -} and kernels ``k_ij = a_ij + b_ij 1(eps_i = eps_j)`` for ``i <= j``."""

    phi: tuple          # phi[i] = (value at +, value at -)
    a: tuple            # n x n, only i <= j used
    b: tuple

    def __post_init__(self):
        if any(v < 0 for p in self.phi for v in p) or \
                any(v < 0 for m in (self.a, self.b) for row in m for v in row):
            raise ValueError("two-point instance needs nonnegative data")

    @property
    def n_funcs(self) -> int:
        return len(self.phi)

    def rearranged(self) -> "TwoPointInstance":
        return TwoPointInstance(tuple((max(p), min(p)) for p in self.phi), self.a, self.b)


def two_point_J(inst: TwoPointInstance):
    """Sum over sign patterns of ``prod phi_i(eps_i) * prod_{i<=j} k_ij(eps_i, eps_j)``."""
    n = inst.n_funcs
    total = 0
    for signs in itertools.product((0, 1), repeat=n):
        term = 1
        for i in range(n):
            term *= inst.phi[i][signs[i]]
            if term == 0:
                break
            for j in range(i, n):
                term *= inst.a[i][j] + (inst.b[i][j] if signs[i] == signs[j] else 0)
        total += term
    return total


# -- survival probabilities ----------------------------------------------------

def _survival(chain: MarkovChain, start: Iterable[int], allowed: Sequence[frozenset]):
    """P(X_1 in D_1, ..., X_t in D_t) with X_0 uniform on ``start`` (a singleton in practice)."""
    start = list(start)
    v = chain.zeros(chain.n)
    v[start] = 1
    scale = len(start)
    for D in allowed:
        v = chain.rmul(v)
        scale *= chain.den
        keep = np.zeros(chain.n, dtype=bool)
        keep[list(D)] = True
        v[~keep] = 0
    return Fraction(int(v.sum()), scale)


def check_survival_monotone(n: int, d: int, b: int, D: Sequence[Iterable[int]], sigma: Reflection,
                            chain: MarkovChain | None = None):
    """Both sides of the survival rearrangement inequality.

    ``lhs = P(X_1 in D_1, ..., X_t in D_t | X_0 = b)`` and ``rhs`` is the same
    with every set and the start polarized by ``sigma``.  Returns
    ``(lhs, rhs, lhs <= rhs)``.
    """
    chain = chain or lazy_torus_kernel(n, d)
    sets = [frozenset(s) for s in D]
    lhs = _survival(chain, [b], sets)
    start = polarize_set({b}, sigma)
    rhs = _survival(chain, start, [polarize_set(s, sigma) for s in sets])
    return lhs, rhs, lhs <= rhs


@dataclass(frozen=True)
class TrajectorySearchResult:
    n: int
    d: int
    t: int
    lazy: bool
    max_survival: Fraction
    antipode_survival: Fraction
    maximizers: tuple
    evaluated: int

    @property
    def holds(self) -> bool:
        return self.max_survival == self.antipode_survival

    @property
    def antipode_is_maximizer(self) -> bool:
        a = index_of(self.n, antipode(self.n, self.d))
        return (a,) * self.t in self.maximizers or self.t == 0

    def to_json(self) -> dict:
        from .report import num
        pt = lambda i: list(coords(self.n, self.d, i))
        return {"n": self.n, "d": self.d, "t": self.t, "lazy": self.lazy,
                "max_survival": num(self.max_survival), "antipode_survival": num(self.antipode_survival),
                "holds": self.holds, "antipode_is_maximizer": self.antipode_is_maximizer,
                "maximizers": [[pt(i) for i in f] for f in self.maximizers[:64]],
                "n_maximizers": len(self.maximizers), "evaluated": self.evaluated}


def theorem2_bruteforce(n: int, d: int, t: int, lazy: bool = True, budget: int = TRAJECTORY_BUDGET,
                        max_keep: int = 100_000) -> TrajectorySearchResult:
    """Maximise ``P_0(X_1 != f(1), ..., X_t != f(t))`` over all trajectories ``f``.

    Depth-first over trajectory prefixes, sharing survival vectors; all
    leaves at depth ``t`` share the scale ``den**t`` so they compare as
    integers.
    """
    size = n ** d
    if size ** t > budget:
        raise SearchSpaceExceeded(f"{size}^{t} trajectories exceed budget {budget}")
    chain = lazy_torus_kernel(n, d, lazy=lazy)
    a = index_of(n, antipode(n, d))
    best = [-1, []]
    count = 0

    def dfs(prefix, v):
        nonlocal count
        if len(prefix) == t:
            count += 1
            s = v.sum()
            if s > best[0]:
                best[0], best[1] = s, [tuple(prefix)]
            elif s == best[0] and len(best[1]) < max_keep:
                best[1].append(tuple(prefix))
            return
        w = chain.rmul(v)
        for y in range(size):
            child = w.copy()
            child[y] = 0
            dfs(prefix + [y], child)

    v0 = chain.zeros(size)
    v0[index_of(n, (0,) * d)] = 1
    dfs([], v0)
    scale = chain.den ** t
    anti = _survival(chain, [index_of(n, (0,) * d)], [frozenset(range(size)) - {a}] * t)
    return TrajectorySearchResult(n, d, t, lazy, Fraction(int(best[0]), scale), anti, tuple(best[1]), count)


# -- the reflection sequence pushing a trajectory onto the antipode -----------

def _detailed_case(n: int, target: int, a: int) -> bool:
    return n % 2 == 1 and (target + a) % 2 == 0 and target + a >= n - 1


def antipode_reflection(n: int, target: int, a: int | None = None) -> Reflection:
    """Reflection of Z_n mapping ``target`` to ``a`` with ``{0}`` and ``Z_n - {a}`` stable.

    For odd ``n`` with ``target + a`` even and ``>= n - 1`` the half spaces are
    ``H+ = ((target+a)/2, n-1] | [0, (target+a)/2 - (n-1)/2)`` and ``H0 =
    {(target+a)/2}``.  Every other case uses the perpendicular bisector of
    ``target`` and ``a`` (``H+`` = residues strictly closer to ``target``),
    which reduces to the same partition in the case above.  The result is
    validated; ``InvalidCase`` is raised when the stability conditions fail.
    """
    a = n // 2 if a is None else a % n
    target %= n
    if target == a:
        # the half-space formula below would put 0 into H- here
        sigma = Reflection(n, 1, tuple(range(n)), frozenset(), frozenset(), frozenset(range(n)))
    elif _detailed_case(n, target, a):
        mid = (target + a) // 2
        plus = {r for r in range(n) if mid < r <= n - 1 or 0 <= r < mid - (n - 1) // 2}
        minus = set(range(n)) - plus - {mid}
        sigma = Reflection.on_coordinate(n, 1, 0, target + a, plus, minus)
    else:
        try:
            sigma = Reflection.bisector(n, 1, 0, target, a)
        except InvalidReflection as exc:
            raise InvalidCase(str(exc)) from exc
    everything = frozenset(range(n))
    if polarize_set(everything - {target}, sigma) != everything - {a}:
        raise InvalidCase(f"Z_{n} - {{{target}}} does not polarize to Z_{n} - {{{a}}}")
    if polarize_set(everything - {a}, sigma) != everything - {a}:
        raise InvalidCase(f"Z_{n} - {{{a}}} is not stable")
    if polarize_set({0}, sigma) != {0}:
        raise InvalidCase("{0} is not stable")
    return sigma


def lift(sigma: Reflection, d: int, coord: int) -> Reflection:
    """Apply a reflection of Z_n to one coordinate of Z_n^d."""
    n = sigma.n
    mapping, hp, hm, h0 = [], set(), set(), set()
    for i in range(n ** d):
        x = list(coords(n, d, i))
        r = x[coord]
        x[coord] = sigma.image(r)
        mapping.append(index_of(n, x))
        {"+": hp, "-": hm, "0": h0}[sigma.side(r)].add(i)
    out = Reflection(n, d, tuple(mapping), frozenset(hp), frozenset(hm), frozenset(h0))
    out.validate()
    return out


def rearrangement_path(n: int, d: int, trajectory: Sequence[Sequence[int]]):
    """Reflections that push every avoided point of ``trajectory`` onto the antipode.

    Works coordinate by coordinate.  Returns ``(steps, survivals)`` where
    ``survivals[k]`` is the exact survival probability after ``k`` reflections;
    the sequence is non-decreasing and ends at the constant-antipode value.
    """
    chain = lazy_torus_kernel(n, d)
    a = antipode(n, d)
    size = n ** d
    everything = frozenset(range(size))
    sets = [everything - {index_of(n, p)} for p in trajectory]
    origin = index_of(n, (0,) * d)
    survivals = [_survival(chain, [origin], sets)]
    steps = []
    for k in range(d):
        for i in range(len(sets)):
            (removed,) = everything - sets[i]
            r = coords(n, d, removed)[k]
            if r == a[k]:
                continue
            sigma = lift(antipode_reflection(n, r, a[k]), d, k)
            sets = [polarize_set(s, sigma) for s in sets]
            if polarize_set({origin}, sigma) != {origin}:
                raise InvalidCase("origin moved")
            steps.append(sigma)
            survivals.append(_survival(chain, [origin], sets))
    final = everything - {index_of(n, a)}
    if any(s != final for s in sets):
        raise InvalidCase("reflections did not reach the constant antipode trajectory")
    return steps, survivals


# -- random instances for property suites -------------------------------------

def _rand_fraction(rng: np.random.Generator, max_num: int = 6, max_den: int = 6) -> Fraction:
    return Fraction(int(rng.integers(0, max_num + 1)), int(rng.integers(1, max_den + 1)))


def random_two_point_instance(rng: np.random.Generator, max_funcs: int = 5) -> TwoPointInstance:
    """Nonnegative rational ``phi``, ``a`` and ``b`` with ``1 <= n_funcs <= max_funcs``."""
    k = int(rng.integers(1, max_funcs + 1))
    phi = tuple((_rand_fraction(rng), _rand_fraction(rng)) for _ in range(k))
    mat = lambda: tuple(tuple(_rand_fraction(rng) for _ in range(k)) for _ in range(k))
    return TwoPointInstance(phi, mat(), mat())


def random_reflection(n: int, d: int, rng: np.random.Generator) -> Reflection:
    """Bisector reflection of two distinct residues in a random coordinate."""
    p, q = rng.choice(n, size=2, replace=False)
    return Reflection.bisector(n, d, int(rng.integers(0, d)), int(p), int(q))


def random_survival_instance(rng: np.random.Generator, n: int, d: int, t: int, density: float = 0.7):
    """``(b, D, sigma)`` with random subsets ``D_1..D_t`` of Z_n^d."""
    size = n ** d
    D = [frozenset(np.flatnonzero(rng.random(size) < density).tolist()) for _ in range(t)]
    return int(rng.integers(0, size)), D, random_reflection(n, d, rng)
