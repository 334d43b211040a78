"""Mobius orthogonality experiments along symbolic orbits.

A linear sieve produces the Mobius values; orbit words come from random
access into the block layout, so horizons far beyond the materialization cap
are feasible.  Partial averages are accumulated exactly (rationals for
rational-valued observables) and emitted on a geometric grid of horizons.
Decay is reported, never "verified": the vanishing of these averages is an
asymptotic statement, so acceptance rests on recorded regression baselines
and trend diagnostics, not on the conjecture.

The K-floor suspension pairs each orbit position with a cyclic floor index,
modelling a finite cyclic group of eigenvalues with continuous
eigenfunctions; observables split into per-floor cylinder functions, and the
floorwise means can be subtracted exactly.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

from .blocks import BlockDag, _check_word
from .errors import InputError, RangeError

__all__ = [
    "mobius_sieve",
    "mertens",
    "OrbitSpec",
    "orbit_word",
    "geometric_grid",
    "partial_averages",
    "cylinder_sarnak_averages",
    "prime_power_averages",
    "suspension_values",
    "EigenObservable",
    "FloorCylinderObservable",
    "floor_means",
]


def mobius_sieve(limit):
    """mu(1..limit) by a linear sieve; index 0 is unused."""
    if limit < 1:
        raise InputError("need limit >= 1")
    mu = [0] * (limit + 1)
    mu[1] = 1
    primes = []
    composite = bytearray(limit + 1)
    for i in range(2, limit + 1):
        if not composite[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            ip = i * p
            if ip > limit:
                break
            composite[ip] = 1
            if i % p == 0:
                mu[ip] = 0
                break
            mu[ip] = -mu[i]
    return mu


def mertens(mu, limit=None):
    """Sum of mu(1..limit)."""
    return sum(mu[1 : (limit or len(mu) - 1) + 1])


# ----------------------------------------------------------------------------
# Orbits
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitSpec:
    """Base point of an orbit: a window of a deep block, optionally spliced.

    A plain spec reads from B_stage at 1-based `offset`.  A spliced spec
    realizes points near the all-spacers fixed point: the last `splice_suffix`
    symbols of B_stage, then `splice_ones` spacers, then a prefix of B_stage.
    Spliced words need not belong to the language and are flagged as such.
    `floors` >= 2 with `start_floor` selects a suspension orbit."""

    stage: int
    offset: int = 1
    splice_suffix: int = 0
    splice_ones: int = 0
    floors: int = 1
    start_floor: int = 0

    def __post_init__(self):
        if self.offset < 1 or self.stage < 1:
            raise InputError("stage and offset must be >= 1")
        if self.splice_suffix < 0 or self.splice_ones < 0:
            raise InputError("splice lengths must be >= 0")
        if self.floors < 1 or not 0 <= self.start_floor < self.floors:
            raise InputError("need floors >= 1 and 0 <= start_floor < floors")

    @property
    def spliced(self):
        return self.splice_suffix > 0 or self.splice_ones > 0


def orbit_word(dag: BlockDag, spec: OrbitSpec, length):
    """The first `length` symbols of the orbit's itinerary word."""
    if length < 1:
        raise InputError("need length >= 1")
    h = dag.height(spec.stage)
    if not spec.spliced:
        if spec.offset + length - 1 > h:
            raise RangeError(
                f"window [{spec.offset}, {spec.offset + length - 1}] leaves B_{spec.stage}"
            )
        return dag.extract(spec.stage, spec.offset, length)
    if spec.splice_suffix > h:
        raise RangeError("splice suffix longer than the block")
    parts = []
    take = min(spec.splice_suffix, length)
    parts.append(dag.extract(spec.stage, h - spec.splice_suffix + 1, take))
    remaining = length - take
    ones = min(spec.splice_ones, remaining)
    parts.append("1" * ones)
    remaining -= ones
    if remaining:
        if remaining > h:
            raise RangeError("splice prefix longer than the block")
        parts.append(dag.extract(spec.stage, 1, remaining))
    return "".join(parts)


def geometric_grid(horizon):
    """Horizons ceil(N / 2^k), deduplicated, ascending."""
    grid = set()
    k = 0
    while True:
        n = -(-horizon // (2 ** k))
        grid.add(n)
        if n == 1:
            break
        k += 1
    return sorted(grid)


def partial_averages(values, weights, horizon, grid=None):
    """Exact partial averages (1/N') * sum_{n<=N'} values[n] * weights[n].

    `values` is indexed from 1 (callable or sequence with [n]); accumulation
    is exact for int/Fraction values and complex otherwise."""
    grid = sorted(set(grid or geometric_grid(horizon)))
    if grid[-1] > horizon:
        raise InputError("grid exceeds horizon")
    get = values if callable(values) else values.__getitem__
    out = []
    acc = 0
    idx = 0
    for n in range(1, horizon + 1):
        w = weights[n]
        if w:
            acc = acc + get(n) * w
        if idx < len(grid) and n == grid[idx]:
            avg = Fraction(acc, n) if isinstance(acc, (int, Fraction)) else acc / n
            out.append((n, avg))
            idx += 1
    return out


def cylinder_sarnak_averages(word, cylinder, center, mu, horizon, grid=None):
    """Mobius averages of the centered cylinder observable, via integer counts.

    The observable at step n is [cylinder occurs at position n] - center, so
    the partial sum splits into an integer hit count and center * Mertens;
    both are tracked exactly and combined per grid point."""
    _check_word(cylinder)
    center = Fraction(center)
    if len(word) < horizon + len(cylinder):
        raise RangeError("orbit word too short for the horizon and window")
    grid = sorted(set(grid or geometric_grid(horizon)))
    out = []
    hit_sum = 0
    mertens_sum = 0
    idx = 0
    for n in range(1, horizon + 1):
        m = mu[n]
        if m:
            mertens_sum += m
            if word.startswith(cylinder, n):
                hit_sum += m
        if idx < len(grid) and n == grid[idx]:
            out.append((n, Fraction(hit_sum - center * mertens_sum, n)))
            idx += 1
    return out


def prime_power_averages(word, cylinder, center, p, q, horizon, grid=None):
    """Partial averages of f(T^{pn} omega) * f(T^{qn} omega) for f centered.

    p and q must differ (primes in the intended use); the orbit word must
    reach max(p, q) * horizon plus the window."""
    _check_word(cylinder)
    if p == q:
        raise InputError("need two different primes")
    center = Fraction(center)
    need = max(p, q) * horizon + len(cylinder)
    if len(word) < need:
        raise RangeError(f"orbit word must cover {need} symbols")
    grid = sorted(set(grid or geometric_grid(horizon)))
    out = []
    acc = Fraction(0)
    idx = 0
    for n in range(1, horizon + 1):
        fp = int(word.startswith(cylinder, p * n)) - center
        fq = int(word.startswith(cylinder, q * n)) - center
        acc += fp * fq
        if idx < len(grid) and n == grid[idx]:
            out.append((n, acc / n))
            idx += 1
    return out


# ----------------------------------------------------------------------------
# Suspension orbits
# ----------------------------------------------------------------------------


def suspension_values(dag, spec: OrbitSpec, observable, horizon):
    """Values of a floor-aware observable along the suspension orbit.

    Step n sits on floor (start_floor + n) mod K with the base advanced by
    (start_floor + n) // K.  `observable` maps (word, base_position, floor)
    to a value; base positions are 0-based into the orbit word."""
    K = spec.floors
    base_steps = (spec.start_floor + horizon) // K
    word = orbit_word(dag, spec, base_steps + getattr(observable, "window", 1) + 1)
    values = [None] * (horizon + 1)
    for n in range(1, horizon + 1):
        total = spec.start_floor + n
        values[n] = observable(word, total // K, total % K)
    return values


class EigenObservable:
    """Pure eigenfunction of the floor rotation: value exp(2*pi*i*j*floor/K)."""

    window = 1

    def __init__(self, K, power=1):
        self.K = K
        self.power = power
        self._table = [cmath.exp(2j * cmath.pi * power * i / K) for i in range(K)]

    def __call__(self, word, base_pos, floor):
        return self._table[floor]


class FloorCylinderObservable:
    """Cylinder indicator on selected floors, with exact per-floor centering."""

    def __init__(self, cylinder, floor_centers):
        _check_word(cylinder)
        self.cylinder = cylinder
        self.window = len(cylinder)
        self.floor_centers = [Fraction(c) for c in floor_centers]

    def __call__(self, word, base_pos, floor):
        hit = int(word.startswith(self.cylinder, base_pos))
        return hit - self.floor_centers[floor]


def floor_means(dag, stage, cylinder, K):
    """Per-floor means of a cylinder indicator under the product measure:
    the block frequency on every floor (the floors are measure-uniform)."""
    f = dag.frequency(cylinder, stage).frequency
    return [f] * K
