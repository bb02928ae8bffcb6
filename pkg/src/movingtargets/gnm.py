"""The cluster graphs G_{n,m} and the run-versus-hide counterexample.

Vertices are ``i(a,b)`` with cluster ``i`` in Z_m and coordinates ``a, b`` in
Z_n, indexed as ``i*n*n + a*n + b``.  Short edges join every pair of
vertices in adjacent clusters.  Long edges join clusters ``m/4`` apart and
change exactly one coordinate:

* rule 2: ``i`` even, ``j = i + m/4``, same ``a``;
* rule 3: ``i`` even, ``j = i - m/4``, same ``b``;
* rule 4: ``i`` odd, ``j = i + m/4``, same ``b``;
* rule 5: ``i`` odd, ``j = i - m/4``, same ``a``.

``long_rule="doubled"`` instead joins ``i`` to both ``i +- m/4`` through
both same-row and same-column pairs.  At ``n = 2`` it gives each vertex two
long neighbours per direction, so a long move in a fixed direction has
probability 1/6.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .chain import MarkovChain
from .errors import InvalidParams, NotLumpable
from .hitting import SetSequence, all_pairs_hitting, moving_hitting, static_hitting
from .linalg import solve

LONG_RULES = ("literal", "doubled")


@dataclass
class GnmGraph:
    n: int
    m: int
    long_rule: str
    adjacency: list = field(repr=False)
    kinds: dict = field(repr=False)

    @property
    def size(self) -> int:
        return self.n * self.n * self.m

    def index(self, i: int, a: int, b: int) -> int:
        n = self.n
        return (i % self.m) * n * n + (a % n) * n + (b % n)

    def vertex(self, v: int) -> tuple:
        n = self.n
        return v // (n * n), (v // n) % n, v % n

    def label(self, v: int) -> str:
        i, a, b = self.vertex(v)
        return f"{i}({a},{b})"

    def parse(self, text: str) -> int:
        i, rest = text.strip().split("(")
        a, b = rest.rstrip(")").split(",")
        return self.index(int(i), int(a), int(b))

    def cluster(self, i: int) -> list:
        n2 = self.n * self.n
        return list(range(i * n2, (i + 1) * n2))

    @property
    def degree(self) -> int:
        return len(self.adjacency[0])

    def edges(self) -> list:
        return sorted((u, v) for u in range(self.size) for v in self.adjacency[u] if u < v)

    def edge_list(self) -> str:
        return "".join(f"{self.label(u)} {self.label(v)} {self.kinds[(u, v)]}\n" for u, v in self.edges())

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.size, self.size), dtype=bool)
        for u, nb in enumerate(self.adjacency):
            A[u, list(nb)] = True
        return A

    def walk(self, lazy: bool = True, exact: bool | None = None) -> MarkovChain:
        """Simple random walk, optionally holding with probability 1/2."""
        deg = self.degree
        exact = self.size <= 64 if exact is None else exact
        zero = Fraction(0) if exact else 0.0
        rows = []
        for u in range(self.size):
            row = [zero] * self.size
            step = Fraction(1, 2 * deg) if lazy else Fraction(1, deg)
            step = step if exact else float(step)
            for v in self.adjacency[u]:
                row[v] = step
            if lazy:
                row[u] = Fraction(1, 2) if exact else 0.5
            rows.append(row)
        name = f"gnm({self.n},{self.m},{'lazy' if lazy else 'plain'})"
        return MarkovChain(rows, exact=exact, name=name)


def rule_edges(n: int, m: int) -> dict:
    """Undirected edge sets produced by each literal rule, keyed 1..5."""
    q = m // 4
    idx = lambda i, a, b: (i % m) * n * n + a * n + b
    out = {r: set() for r in range(1, 6)}
    for i in range(m):
        for a in range(n):
            for b in range(n):
                u = idx(i, a, b)
                for c in range(n):
                    for d in range(n):
                        # pairs with |i - j| = 1 (mod m)
                        out[1].add(frozenset((u, idx(i + 1, c, d))))
                if i % 2 == 0:
                    out[2].update(frozenset((u, idx(i + q, a, d))) for d in range(n) if d != b)
                    out[3].update(frozenset((u, idx(i - q, c, b))) for c in range(n) if c != a)
                else:
                    out[4].update(frozenset((u, idx(i + q, c, b))) for c in range(n) if c != a)
                    out[5].update(frozenset((u, idx(i - q, a, d))) for d in range(n) if d != b)
    return out


def _doubled_long(n: int, m: int) -> set:
    q = m // 4
    idx = lambda i, a, b: (i % m) * n * n + a * n + b
    out = set()
    for i in range(m):
        for a in range(n):
            for b in range(n):
                u = idx(i, a, b)
                for j in (i + q, i - q):
                    out.update(frozenset((u, idx(j, a, d))) for d in range(n) if d != b)
                    out.update(frozenset((u, idx(j, c, b))) for c in range(n) if c != a)
    return out


def build_gnm(n: int, m: int, long_rule: str = "literal") -> GnmGraph:
    if m % 4 or m < 8 or n < 2:
        raise InvalidParams(f"need m divisible by 4 with m >= 8 and n >= 2, got n={n}, m={m}")
    if long_rule not in LONG_RULES:
        raise InvalidParams(f"long_rule must be one of {LONG_RULES}")
    rules = rule_edges(n, m)
    short = rules[1]
    long_ = set().union(rules[2], rules[3], rules[4], rules[5]) if long_rule == "literal" else _doubled_long(n, m)
    size = n * n * m
    adjacency = [set() for _ in range(size)]
    kinds = {}
    for kind, edges in (("short", short), ("long", long_)):
        for e in edges:
            u, v = sorted(e)
            if u == v or (u, v) in kinds:
                raise InvalidParams(f"self-loop or repeated edge at {u}-{v}")
            kinds[(u, v)] = kind
            adjacency[u].add(v)
            adjacency[v].add(u)
    g = GnmGraph(n, m, long_rule, [frozenset(a) for a in adjacency], kinds)
    degrees = {len(a) for a in adjacency}
    if len(degrees) != 1:
        raise InvalidParams(f"G_{{{n},{m}}} is not regular: degrees {sorted(degrees)}")
    ncomp, _ = connected_components(csr_matrix(g.adjacency_matrix()), directed=False)
    if ncomp != 1:
        raise InvalidParams(f"G_{{{n},{m}}} is disconnected")
    return g


# -- transitivity ---------------------------------------------------------------

def automorphism(g: GnmGraph, x: int, y: int) -> np.ndarray:
    """The cluster-shift map sending ``x`` to ``y``; coordinates swap on odd shifts."""
    n, m = g.n, g.m
    i, a, b = g.vertex(x)
    j, c, d = g.vertex(y)
    shift = j - i
    phi = np.empty(g.size, dtype=np.int64)
    for v in range(g.size):
        k, u, w = g.vertex(v)
        if shift % 2 == 0:
            phi[v] = g.index(k + shift, u + c - a, w + d - b)
        else:
            phi[v] = g.index(k + shift, w + c - b, u + d - a)
    return phi


@dataclass
class TransitivityResult:
    passed: bool
    pairs_checked: int
    witness: tuple | None = None
    reason: str | None = None

    def to_json(self) -> dict:
        return {"passed": self.passed, "pairs_checked": self.pairs_checked,
                "witness": list(self.witness) if self.witness else None, "reason": self.reason}


def check_transitivity(g: GnmGraph, pairs: Iterable[tuple] | None = None) -> TransitivityResult:
    """Check that the shift map is an edge-preserving bijection for each pair.

    ``pairs`` defaults to every ordered vertex pair.
    """
    A = g.adjacency_matrix()
    if pairs is None:
        pairs = ((x, y) for x in range(g.size) for y in range(g.size))
    count = 0
    for x, y in pairs:
        count += 1
        phi = automorphism(g, x, y)
        if phi[x] != y:
            return TransitivityResult(False, count, (g.label(x), g.label(y)), "phi(x) != y")
        if np.unique(phi).size != g.size:
            return TransitivityResult(False, count, (g.label(x), g.label(y)), "phi is not a bijection")
        if not np.array_equal(A[np.ix_(phi, phi)], A):
            return TransitivityResult(False, count, (g.label(x), g.label(y)), "phi does not preserve edges")
    return TransitivityResult(True, count)


# -- cluster chains -----------------------------------------------------------

@dataclass(frozen=True)
class ClusterChain:
    """Circulant walk on Z_m given by its step law ``{offset: probability}``."""

    m: int
    steps: dict

    def __post_init__(self):
        if any(p <= 0 for p in self.steps.values()) or sum(self.steps.values()) != 1:
            raise InvalidParams("cluster step law must be positive and sum to 1")

    def q(self, offset: int):
        return sum((p for k, p in self.steps.items() if (k - offset) % self.m == 0), Fraction(0))

    def is_symmetric(self) -> bool:
        return all(self.q(k) == self.q(-k) for k in self.steps)

    def chain(self, exact: bool = True) -> MarkovChain:
        key = ("chain", exact)
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            rows = [[self.q(j - i) for j in range(self.m)] for i in range(self.m)]
            cache[key] = MarkovChain(rows, exact=exact, name=f"cluster-chain(m={self.m})")
        return cache[key]

    def hitting(self, source: int, target: int, exact: bool = True):
        """E[source -> target] for the cluster walk."""
        return static_hitting(self.chain(exact), [target % self.m])[source % self.m]

    def h(self, exact: bool = True) -> list:
        """``h(i) = E[0 -> i]`` for ``i = 1 .. m/2``."""
        return [self.hitting(0, i, exact) for i in range(1, self.m // 2 + 1)]

    def to_json(self) -> dict:
        return {"m": self.m, "steps": {str(k): v for k, v in sorted(self.steps.items())}}


def lump_to_clusters(g: GnmGraph) -> ClusterChain:
    """Cluster projection of the simple walk, after checking strong lumpability."""
    n2 = g.n * g.n
    law = None
    for u in range(g.size):
        i = u // n2
        counts: dict = {}
        for v in g.adjacency[u]:
            off = (v // n2 - i) % g.m
            counts[off] = counts.get(off, 0) + 1
        if law is None:
            law, ref = counts, u
        elif counts != law:
            raise NotLumpable(f"{g.label(ref)} and {g.label(u)} send different edge counts to clusters "
                              f"(by offset: {law} vs {counts})")
    deg = g.degree
    steps = {(k if k <= g.m // 2 else k - g.m): Fraction(c, deg) for k, c in law.items()}
    return ClusterChain(g.m, steps)


def paper_cluster_chain(m: int = 12) -> ClusterChain:
    """Cluster walk with ``q(+-1) = 1/3`` and ``q(+-3) = 1/6`` on Z_12."""
    if m != 12:
        raise InvalidParams("the reference cluster chain is defined for m = 12 only")
    return ClusterChain(12, {1: Fraction(1, 3), -1: Fraction(1, 3), 3: Fraction(1, 6), -3: Fraction(1, 6)})


def compare_cluster_chains(a: ClusterChain, b: ClusterChain) -> dict:
    offsets = sorted(set(a.steps) | set(b.steps))
    return {str(k): {"first": a.q(k), "second": b.q(k)} for k in offsets if a.q(k) != b.q(k)}


# -- the shuttle --------------------------------------------------------------

@dataclass
class ShuttleReport:
    p: Fraction
    sigma_odd: Fraction
    sigma_even: Fraction
    A1: object
    A2: object
    expected_exit: Fraction
    unit_accounting: object
    corrected_accounting: object
    direct: object
    h6: object

    def to_json(self) -> dict:
        return dict(self.__dict__)


def shuttle_expectation(cc: ClusterChain, exact: bool = True) -> ShuttleReport:
    """Expected time to reach cluster 3 from 0 when the 0-3 shuttle edge does not count.

    The walk bounces along the shuttle (each crossing has probability ``p``)
    until it first steps elsewhere at time ``X``; from there it needs the
    ordinary cluster hitting time to 3.  Three values are returned: the
    accounting ``1 + sum P(X=i) A``, the same with ``E[X]`` in place of 1,
    and a direct absorbing-chain solve.
    """
    m = cc.m
    q = m // 4
    if m != 12:
        raise InvalidParams("shuttle computation is set up for m = 12")
    p = cc.q(q)
    if cc.q(-q) != p:
        raise InvalidParams("shuttle needs q(+m/4) = q(-m/4)")
    rest = 1 - p
    sigma_odd = rest / (1 - p * p)
    sigma_even = rest * p / (1 - p * p)

    def exit_mean(frm):
        # leave endpoint `frm` by any move other than the shuttle
        moves = [(k, cc.q(k)) for k in sorted(cc.steps) if (frm + k) % m != (frm + q if frm == 0 else frm - q) % m]
        total = sum(w for _, w in moves)
        return sum(w / total * cc.hitting(frm + k, q, exact) for k, w in moves)

    A1 = exit_mean(0)
    A2 = exit_mean(q)
    expected_exit = 1 / rest
    unit = 1 + sigma_odd * A1 + sigma_even * A2
    corrected = expected_exit + sigma_odd * A1 + sigma_even * A2

    # states: shuttle endpoints S0, S3, then off-shuttle clusters other than 3
    off = [c for c in range(m) if c != q]
    pos = {("S", 0): 0, ("S", q): 1}
    for c in off:
        pos[("C", c)] = len(pos)
    size = len(pos)
    a = np.empty((size, size), dtype=object)
    a.fill(Fraction(0))
    for i in range(size):
        a[i, i] = Fraction(1)
    for (kind, c), r in pos.items():
        for k in cc.steps:
            dest = (c + k) % m
            if kind == "S" and dest == (c + q if c == 0 else c - q) % m:
                a[r, pos[("S", dest)]] -= cc.steps[k]
            elif dest != q:
                a[r, pos[("C", dest)]] -= cc.steps[k]
    direct = solve(a, [Fraction(1)] * size, True)[pos[("S", 0)]] if exact else \
        float(solve(a.astype(float), np.ones(size), False)[pos[("S", 0)]])
    return ShuttleReport(p, sigma_odd, sigma_even, A1, A2, expected_exit, unit, corrected, direct,
                         cc.hitting(0, m // 2, exact))


# -- hitting on the graph ----------------------------------------------------------

def uniform_cluster_hitting(g: GnmGraph, cluster: int, target: int, lazy: bool = False) -> Fraction:
    """E_{U_cluster}[tau_target] with the start uniform over ``cluster``."""
    if g.vertex(target)[0] != cluster % g.m:
        raise InvalidParams("target must lie in the named cluster")
    h = static_hitting(_walk(g, lazy), [target])
    members = g.cluster(cluster % g.m)
    return sum((h[v] for v in members), Fraction(0)) / len(members)


def _walk(g: GnmGraph, lazy: bool, exact: bool = True) -> MarkovChain:
    key = (lazy, exact)
    cache = g.__dict__.setdefault("_walks", {})
    if key not in cache:
        cache[key] = g.walk(lazy=lazy, exact=exact)
    return cache[key]


def hitting_matrix(g: GnmGraph, lazy: bool = True, exact: bool = True) -> np.ndarray:
    """``H[x, y] = E_x[tau_y]`` from one static solve per target."""
    chain = _walk(g, lazy, exact)
    cols = [static_hitting(chain, [y]) for y in range(g.size)]
    return np.stack(cols, axis=1)


@dataclass
class CounterexampleReport:
    start: str
    static_max: object
    static_argmax: tuple
    best_moving: object
    best_trajectory: SetSequence
    best_shape: dict
    reference_value: object
    reference_static: object
    reference_margin: object
    reference_trajectory: SetSequence
    evaluated: int
    lazy: bool
    labels: dict = field(repr=False, default_factory=dict)

    @property
    def margin(self):
        return self.best_moving - self.static_max

    @property
    def passed(self) -> bool:
        return self.margin > 0

    def to_json(self) -> dict:
        return {"start": self.start, "lazy": self.lazy, "static_max": self.static_max,
                "static_argmax": list(self.static_argmax), "best_moving": self.best_moving,
                "margin": self.margin, "best_shape": self.best_shape,
                "best_trajectory": self.best_trajectory.to_json(),
                "reference_trajectory": {"shape": {"wait_at": "5(1,1)", "wait": 2, "then": "6(1,1)"},
                                     "value": self.reference_value, "static_value": self.reference_static,
                                     "gain": self.reference_value - self.reference_static,
                                     "margin": self.reference_margin},
                "evaluated": self.evaluated, "passed": self.passed}


def wait_then_move(u: int, w: int, v: int) -> SetSequence:
    """Target at ``u`` for times ``0..w`` and at ``v`` from time ``w + 1`` on."""
    return SetSequence(tuple({u} for _ in range(w + 1)), {v})


def wait_then_move_values(chain: MarkovChain, H: np.ndarray, start: int, u: int, waits: Iterable[int]) -> dict:
    """``{w: vector over v of E_start[tau_f]}`` for ``f = u`` on ``0..w`` then ``v``.

    Uses ``E = sum_{t<=w} |s_t| + (s_w P) . h_v``, where ``s_t`` is the
    survival vector avoiding ``u`` and ``h_v(v) = 0``, so every ``v`` is
    priced at once against the matrix of static hitting times.
    """
    waits = sorted(set(waits))
    _, den = chain.kernel
    s = chain.zeros(chain.n)
    s[start] = 1
    s[u] = 0
    total = Fraction(0) if chain.exact else 0.0
    scale = 1
    out = {}
    for w in range(waits[-1] + 1):
        total += chain.value(s.sum(), scale)
        r = chain.rmul(s)
        if w in waits:
            out[w] = (r @ H) / (scale * den) + total
        s = r
        s[u] = 0
        scale *= den
    return out


def certify_counterexample(g: GnmGraph, lazy: bool = True, wait_budget: int = 4, exact: bool = True,
                           first: Iterable[int] | None = None, start: int = 0) -> CounterexampleReport:
    """Search wait-then-move targets from ``start`` against the best static target.

    Every ``u`` in ``first`` (default: all vertices), every wait
    ``w <= wait_budget`` and every final vertex ``v`` is evaluated.  Ties
    keep the first trajectory found, so a constant target wins over a
    moving one of equal value.
    """
    if wait_budget < 0:
        raise InvalidParams("wait_budget must be nonnegative")
    chain = _walk(g, lazy, exact)
    H = hitting_matrix(g, lazy, exact)
    flat = int(max(range(H.size), key=lambda k: (H.flat[k], -k)))
    sx, sy = divmod(flat, g.size)
    static_max = H[sx, sy]
    first = list(range(g.size)) if first is None else list(first)
    best = None
    evaluated = 0
    for u in first:
        for w, vals in wait_then_move_values(chain, H, start, u, range(wait_budget + 1)).items():
            evaluated += len(vals)
            v = int(max(range(g.size), key=lambda k: (vals[k], -k)))
            if best is None or vals[v] > best[0]:
                best = (vals[v], u, w, v)
    best_value, u, w, v = best
    ref_u, ref_v = g.index(5, 1, 1), g.index(6, 1, 1)
    ref_seq = wait_then_move(ref_u, 2, ref_v)
    reference_value = moving_hitting(chain, start, ref_seq)
    return CounterexampleReport(
        start=g.label(start), static_max=static_max, static_argmax=(g.label(sx), g.label(sy)),
        best_moving=best_value, best_trajectory=wait_then_move(u, w, v),
        best_shape={"wait_at": g.label(u), "wait": w, "then": g.label(v)},
        reference_value=reference_value, reference_static=H[start, ref_v], reference_margin=reference_value - static_max,
        reference_trajectory=ref_seq, evaluated=evaluated, lazy=lazy)


def large_instance_experiment(n: int = 7, m: int = 20, wait_budget: int = 4, lazy: bool = True) -> dict:
    """Float wait-then-move run on a larger G_{n,m}, waiting in cluster ``2m/5`` before cluster ``m/2``.

    Reported, not asserted: the discrete walk need not favour the moving target here.
    """
    g = build_gnm(n, m)
    chain = _walk(g, lazy, exact=False)
    H = all_pairs_hitting(chain)
    start = 0
    target = g.index(m // 2, 1, 1)
    u = g.index(2 * m // 5, 1, 1)
    static_max = float(H[start].max())
    vals = wait_then_move_values(chain, H, start, u, range(wait_budget + 1))
    rows = [{"wait": w, "value": float(v[target]), "gain_over_static_target": float(v[target] - H[start, target])}
            for w, v in vals.items()]
    best_w, best_v = max(((w, float(v.max())) for w, v in vals.items()), key=lambda r: r[1])
    return {"graph": f"G_{{{n},{m}}}", "lazy": lazy, "static_max": static_max,
            "static_target": g.label(target), "static_target_value": float(H[start, target]),
            "wait_at": g.label(u), "waits": rows, "best_wait": best_w, "best_value": best_v,
            "margin": best_v - static_max}
