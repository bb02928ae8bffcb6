"""Adversarial target sequences.

Lower bounds on the moving-target hitting time come from exhaustive search
over oblivious, eventually constant sequences.  The slow-set gadget turns a
start state that is far from stationarity at time ``t`` into a sequence of
large sets that is slow to hit, and the tripwire checks every evaluated
large-set sequence against the geometric-domination upper bound.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, lcm

import numpy as np

from .chain import MarkovChain, biased_cycle, lazify, period, stationary, t_mix
from .errors import CapExceeded, GadgetFalsified, SearchSpaceExceeded
from .hitting import (SetSequence, interval, measure, meets, moving_hitting_all, qualifying_sets,
                      static_hitting, t_hit)
from .linalg import to_fraction

log = logging.getLogger(__name__)

FLOAT_SLACK = 1e-9
DEFAULT_BUDGET = 2_000_000


def ceil_log2_inverse(alpha) -> int:
    """Smallest k >= 0 with 2**k * alpha >= 1."""
    a = to_fraction(alpha)
    k = 0
    while (2 ** k) * a < 1:
        k += 1
    return k


def mixing_upper_bound(chain: MarkovChain, alpha, cap: int = 100_000):
    """``(2 ceil(log2(1/alpha)) / alpha) * t_mix(1/4)``, or None when t_mix is not reached by ``cap``."""
    if period(chain) != 1:
        return None
    try:
        tm = t_mix(chain, Fraction(1, 4), cap)
    except CapExceeded:
        return None
    a = chain.as_number(alpha)
    return 2 * ceil_log2_inverse(alpha) / a * tm


@dataclass
class Tripwire:
    """Records every large-set sequence value checked against the upper bound."""

    checks: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)

    def check(self, chain: MarkovChain, alpha, value, context: str = "") -> bool:
        key = ("tripwire-bound", chain.as_number(alpha))
        if key not in chain._memo:
            chain._memo[key] = mixing_upper_bound(chain, alpha)
        bound = chain._memo[key]
        if bound is None:
            self.skipped += 1
            return True
        self.checks += 1
        ok = value <= bound if chain.exact else value <= bound + FLOAT_SLACK
        if not ok:
            self.violations.append({"chain": repr(chain), "alpha": str(alpha), "value": value,
                                    "bound": bound, "context": context})
            log.error("upper-bound tripwire: %s > %s (%s)", value, bound, context)
        return ok

    def reset(self) -> None:
        self.checks = self.skipped = 0
        self.violations.clear()


TRIPWIRE = Tripwire()


# -- slow witness and gadget ---------------------------------------------------

def _power_rows(chain: MarkovChain, t: int):
    """``(num, scale)`` with ``P^t = num / scale``."""
    m = chain.identity()
    scale = 1
    for _ in range(t):
        m = chain.rmul(m)
        scale *= chain.den
    return m, scale


def _strictly_less(chain: MarkovChain, a, b) -> bool:
    return a < b if chain.exact else a < b - FLOAT_SLACK


def find_slow_witness(chain: MarkovChain, alpha, epsilon, t: int):
    """First start ``x`` whose canonical worst set ``A`` has ``P^t(x, A) < pi(A) - (alpha + epsilon)``.

    The canonical set is ``{y : P^t(x, y) < pi(y)}``, which maximises the
    deficit ``pi(A) - P^t(x, A)`` for the given start.  Returns ``None`` when
    no start qualifies.
    """
    a, e = chain.as_number(alpha), chain.as_number(epsilon)
    pi = stationary(chain)
    num, scale = _power_rows(chain, t)
    for x in range(chain.n):
        row = [chain.value(num[x, y], scale) for y in range(chain.n)]
        A = frozenset(y for y in range(chain.n) if row[y] < pi[y])
        if not A:
            continue
        if _strictly_less(chain, sum(row[y] for y in A), measure(chain, A) - (a + e)):
            return x, A
    return None


@dataclass(frozen=True)
class GadgetCertificate:
    t: int
    x: int
    A: frozenset
    alpha: object
    epsilon: object
    B: SetSequence
    theta_bound: object
    achieved: object
    pi_A: object
    p_t_x_A: object
    min_pi_B: object
    argmax_start: int

    def to_json(self) -> dict:
        from .report import num
        return {"t": self.t, "x": self.x, "A": sorted(self.A), "alpha": num(self.alpha),
                "epsilon": num(self.epsilon), "B": self.B.to_json(), "theta": num(self.theta_bound),
                "achieved": num(self.achieved), "threshold": num(self.theta_bound * self.t),
                "pi_A": num(self.pi_A), "P_t_x_A": num(self.p_t_x_A), "min_pi_B": num(self.min_pi_B),
                "argmax_start": self.argmax_start}


def default_epsilon(alpha):
    return (Fraction(1, 2) - to_fraction(alpha)) / 2


def build_gadget(chain: MarkovChain, alpha, epsilon, t: int, x: int, A) -> GadgetCertificate:
    """Slow-set sequence ``B_s = {y : P^{t-s}(y, A) > pi(A) - alpha}`` for ``s < t``, then everything.

    Raises
    ------
    GadgetFalsified
        If any of the certificate inequalities fails.
    """
    a, e = chain.as_number(alpha), chain.as_number(epsilon)
    A = frozenset(A)
    n = chain.n
    pi_A = measure(chain, A)
    # u_k(y) = P^k(y, A) kept as numerators over den**k
    u = chain.zeros(n)
    u[list(A)] = 1
    probs = [[chain.value(u[y], 1) for y in range(n)]]
    scale = 1
    for _ in range(t):
        u = chain.lmul(u)
        scale *= chain.den
        probs.append([chain.value(u[y], scale) for y in range(n)])
    p_t_x_A = probs[t][x]
    threshold = pi_A - a
    prefix = []
    for s in range(t):
        row = probs[t - s]
        prefix.append(frozenset(y for y in range(n) if row[y] > threshold))
    B = SetSequence(tuple(prefix), frozenset(range(n)))
    min_pi_B = min((measure(chain, s) for s in (*B.prefix, B.tail)))
    g = moving_hitting_all(chain, B)
    z = int(max(range(n), key=lambda i: (g[i], -i)))
    achieved = g[z]
    theta = e / (pi_A - a)

    failures = []
    if not (pi_A > a + e):
        failures.append(f"pi(A) = {pi_A} is not > alpha + epsilon")
    if not _strictly_less(chain, p_t_x_A, pi_A - (a + e)):
        failures.append(f"P^t(x, A) = {p_t_x_A} is not < pi(A) - (alpha + epsilon)")
    if not B.in_family(chain, alpha):
        failures.append(f"min pi(B_s) = {min_pi_B} < alpha")
    lhs_ok = achieved >= theta * t if chain.exact else achieved >= theta * t - FLOAT_SLACK
    if not lhs_ok:
        failures.append(f"max_z E_z[tau_B] = {achieved} < theta t = {theta * t}")
    if achieved > t + (0 if chain.exact else FLOAT_SLACK):
        failures.append(f"max_z E_z[tau_B] = {achieved} exceeds t = {t}")
    TRIPWIRE.check(chain, alpha, achieved, context=f"gadget t={t} x={x}")
    if failures:
        raise GadgetFalsified("; ".join(failures))
    return GadgetCertificate(t, x, A, a, e, B, theta, achieved, pi_A, p_t_x_A, min_pi_B, z)


def gadget_sweep(chain: MarkovChain, alpha, epsilon=None, t_values=None, cap: int = 64):
    """Certificates for every ``t`` below ``t_mix(alpha + epsilon)`` (or below ``cap``)."""
    eps = default_epsilon(alpha) if epsilon is None else to_fraction(epsilon)
    try:
        limit = t_mix(chain, to_fraction(alpha) + eps, cap)
    except CapExceeded:
        limit = cap
    ts = range(limit) if t_values is None else [t for t in t_values if t < limit]
    certs = []
    for t in ts:
        w = find_slow_witness(chain, alpha, eps, t)
        if w is None:
            raise GadgetFalsified(f"no slow witness at t={t} < t_mix(alpha+epsilon)={limit}")
        certs.append(build_gadget(chain, alpha, eps, t, *w))
    return certs


# -- exhaustive moving-target search ------------------------------------------

@dataclass(frozen=True)
class MovingSearchResult:
    value: object
    start: int
    sequence: SetSequence
    static_value: object
    nodes: int

    def to_json(self) -> dict:
        from .report import num
        return {"value": num(self.value), "start": self.start, "sequence": self.sequence.to_json(),
                "static_value": num(self.static_value), "nodes": self.nodes}


def _tail_matrix(chain: MarkovChain, tails):
    hs = [static_hitting(chain, b) for b in tails]
    if chain.exact:
        hden = lcm(*(v.denominator for h in hs for v in h))
        mat = np.empty((chain.n, len(tails)), dtype=object)
        for j, h in enumerate(hs):
            mat[:, j] = [v.numerator * (hden // v.denominator) for v in h]
        return mat, hden
    return np.column_stack(hs), 1


class _Best:
    def __init__(self, chain, alpha, context):
        self.value = None
        self.start = None
        self.seq = None
        self.chain = chain
        self.alpha = alpha
        self.context = context

    def offer(self, nums, scale, prefix, tails):
        """``nums[x, j]`` is the value (times ``scale``) of prefix + tail j from start x."""
        flat = int(np.argmax(nums)) if not self.chain.exact else max(
            range(nums.size), key=lambda k: (nums.flat[k], -k))
        x, j = divmod(flat, nums.shape[1])
        val = self.chain.value(nums[x, j], scale)
        TRIPWIRE.check(self.chain, self.alpha, val, context=self.context)
        if self.value is None or val > self.value:
            self.value, self.start = val, x
            self.seq = SetSequence(tuple(prefix), tails[j])


def t_mov_lower_bound(chain: MarkovChain, alpha, horizon: int, family: str = "intervals",
                      budget: int = DEFAULT_BUDGET, speed=Fraction(1, 2), offsets=(0,)) -> MovingSearchResult:
    """Best oblivious eventually-constant sequence found by exhaustive search.

    Prefixes of length ``<= horizon`` are drawn from ``family`` (``all``,
    ``minimal``, ``intervals``, ``singleton-complements``) and every qualifying
    set of the family is tried as the constant tail.  ``family="rotating"``
    instead evaluates intervals advancing ``speed`` sites per step for exactly
    ``horizon`` steps, starting at each offset in ``offsets``.

    The returned value is a certified lower bound on the moving-target
    hitting time over alpha-large sequences.
    """
    if family == "rotating":
        return _rotating(chain, alpha, horizon, speed, offsets, budget)
    sets = qualifying_sets(chain, alpha, family)
    size = sum(len(sets) ** k for k in range(1, horizon + 1))
    if size > budget:
        raise SearchSpaceExceeded(f"{size} prefixes exceed budget {budget}")
    tails = sets
    hnum, hden = _tail_matrix(chain, tails)
    best = _Best(chain, alpha, f"t_mov search family={family} horizon={horizon}")
    best.offer(hnum, hden, [], tails)
    static_value = best.value
    den = chain.den
    nodes = 0

    def visit(prefix, v, mass, scale):
        # v: survival rows after masking by prefix[-1], at ``scale``; mass: prefix mass * scale
        nonlocal nodes
        nodes += 1
        w = chain.rmul(v)
        if chain.exact:
            nums = (mass * den * hden)[:, None] + w.dot(hnum)
        else:
            nums = mass[:, None] + w @ hnum
        best.offer(nums, scale * den * hden, prefix, tails)
        if len(prefix) == horizon or not any(v.flat):
            return
        for s in sets:
            child = w.copy()
            child[:, list(s)] = 0
            visit(prefix + [s], child, mass * den + child.sum(axis=1), scale * den)

    for s in sets:
        v0 = chain.identity()
        v0[:, list(s)] = 0
        if horizon >= 1:
            visit([s], v0, v0.sum(axis=1), 1)
    return MovingSearchResult(best.value, best.start, best.seq, static_value, nodes)


def _rotating(chain, alpha, horizon, speed, offsets, budget):
    n = chain.n
    tails = qualifying_sets(chain, alpha, "intervals")
    length = min(len(s) for s in tails)
    if horizon * len(offsets) > budget:
        raise SearchSpaceExceeded("rotating template exceeds budget")
    sp = to_fraction(speed)
    hnum, hden = _tail_matrix(chain, tails)
    best = _Best(chain, alpha, f"rotating speed={speed} horizon={horizon}")
    best.offer(hnum, hden, [], tails)
    static_value = best.value
    den = chain.den
    for c in offsets:
        prefix = [interval(n, c + floor(sp * t), length) for t in range(horizon)]
        if not all(meets(chain, s, alpha) for s in prefix):
            continue
        v = chain.identity()
        v[:, list(prefix[0])] = 0
        mass = v.sum(axis=1)
        scale = 1
        for t in range(1, horizon):
            v = chain.rmul(v)
            v[:, list(prefix[t])] = 0
            mass = mass * den + v.sum(axis=1)
            scale *= den
        w = chain.rmul(v)
        if chain.exact:
            nums = (mass * den * hden)[:, None] + w.dot(hnum)
        else:
            nums = mass[:, None] + w @ hnum
        best.offer(nums, scale * den * hden, prefix, tails)
    return MovingSearchResult(best.value, best.start, best.seq, static_value, len(offsets))


# -- separation demo -----------------------------------------------------------

SEPARATION_BANDS = {"t_mix_lazy": (2.5, 5.5), "t_H": (1.4, 2.8), "rotating": (2.5, 5.5)}


@dataclass
class SeparationReport:
    bias: object
    alpha: object
    rows: list
    ratios: list
    passed: bool

    def to_json(self) -> dict:
        from .report import num
        return {"bias": num(self.bias), "alpha": num(self.alpha),
                "rows": [{k: num(v) for k, v in r.items()} for r in self.rows],
                "ratios": [{k: num(v) for k, v in r.items()} for r in self.ratios],
                "bands": {k: list(v) for k, v in SEPARATION_BANDS.items()}, "passed": self.passed}


def separation_demo(n_values=(16, 32, 64), bias=Fraction(3, 4), alpha=Fraction(1, 4),
                    horizon_factor: int = 4, exact: bool = False) -> SeparationReport:
    """Growth of lazy mixing time, static t_H and rotating-target time on the biased cycle.

    The rotating target advances at the walk's drift ``2 bias - 1`` for
    ``horizon_factor * n**2`` steps.  Static hitting times are always exact.
    """
    n_values = list(n_values)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be ascending")
    p = to_fraction(bias)
    rows = []
    for n in n_values:
        walk = biased_cycle(n, p, exact=True)
        work = walk if exact else walk.with_mode(False)
        tl = t_mix(lazify(work), Fraction(1, 4), cap=10 * n * n + 100)
        th = t_hit(walk, alpha, "intervals")[0]
        rot = t_mov_lower_bound(work, alpha, horizon_factor * n * n, "rotating", speed=2 * p - 1)
        rows.append({"n": n, "t_mix_lazy": tl, "t_H": th, "rotating": rot.value})
    ratios = []
    passed = True
    for r0, r1 in zip(rows, rows[1:]):
        ratio = {"n": r1["n"]}
        for key, (lo, hi) in SEPARATION_BANDS.items():
            q = float(r1[key]) / float(r0[key])
            ratio[key] = q
            passed &= lo <= q <= hi
        ratios.append(ratio)
    return SeparationReport(p, to_fraction(alpha), rows, ratios, passed)
