"""Cutting-and-stacking construction parameters and their integer sequences.

A rank-one construction is described by cutting numbers p_n >= 2 and spacer
counts s_{n,0..p_n-1} >= 0, one row per stage.  Tower heights follow the exact
recursion h_1 = 1, h_{n+1} = p_n*h_n + sum_j s_{n,j}; the products
q_n = p_1*...*p_n give the widths of the underlying adding-machine towers.
Everything here is arbitrary-precision integer or reduced-rational arithmetic:
heights grow exponentially and floats would silently corrupt downstream
certificates.

Parameters are supplied as a finite prefix plus a generator rule (periodic
repetition or a named family schedule).  Convergence-style outputs are
prefix-based heuristics and are labelled as such.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError, RangeError

FAMILIES = ("chacon", "vnk", "generalized_chacon", "katok", "custom")


@dataclass(frozen=True)
class ConstructionParams:
    """Finite prefix of a rank-one construction: one (cut, spacer row) per stage."""

    cuts: tuple
    spacers: tuple
    family: str = "custom"
    # True when generated by a schedule whose cuts grow without bound; such
    # constructions admit no stabilizing subsequence and the level-based
    # eigenvalue criterion is unsound for them.
    unbounded: bool = False

    def __post_init__(self):
        if len(self.cuts) != len(self.spacers):
            raise InputError("cuts and spacers must have one row per stage")
        if not self.cuts:
            raise InputError("need at least one stage")
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        for n, (p, row) in enumerate(zip(self.cuts, self.spacers), start=1):
            if not isinstance(p, int) or p < 2:
                raise InputError(f"cut p_{n} = {p!r} must be an integer >= 2")
            if len(row) != p:
                raise InputError(f"spacer row {n} must have p_{n} = {p} entries")
            if any((not isinstance(s, int)) or s < 0 for s in row):
                raise InputError(f"spacer row {n} must be non-negative integers")
        if self.family == "katok":
            for n, (p, row) in enumerate(zip(self.cuts, self.spacers), start=1):
                half = p // 2
                if p % 2 or row != (0,) * half + (1,) * half:
                    raise InputError(
                        f"katok stage {n} needs an even cut and spacers 0^(p/2) 1^(p/2)"
                    )
        if self.family == "generalized_chacon":
            for n, row in enumerate(self.spacers, start=1):
                if sorted(row) != [0] * (len(row) - 1) + [1]:
                    raise InputError(
                        f"generalized_chacon stage {n} needs exactly one spacer value 1"
                    )

    @property
    def depth(self):
        return len(self.cuts)

    def cut(self, n):
        """p_n for 1 <= n <= depth."""
        self._check_stage(n)
        return self.cuts[n - 1]

    def spacer_row(self, n):
        self._check_stage(n)
        return self.spacers[n - 1]

    def spacer(self, n, j):
        row = self.spacer_row(n)
        if not 0 <= j < len(row):
            raise RangeError(f"spacer index {j} outside 0..{len(row) - 1}")
        return row[j]

    def _check_stage(self, n):
        if not 1 <= n <= self.depth:
            raise RangeError(f"stage {n} outside available prefix 1..{self.depth}")

    def to_doc(self):
        """JSON-ready document describing the explicit prefix."""
        return {
            "family": self.family,
            "depth": self.depth,
            "cuts": list(self.cuts),
            "spacers": [list(r) for r in self.spacers],
            "unbounded": self.unbounded,
        }


@dataclass(frozen=True)
class HeightSequence:
    """Exact prefix h_1..h_{n+1} of tower heights with tower widths q_1..q_n."""

    heights: tuple
    products: tuple

    def h(self, k):
        if not 1 <= k <= len(self.heights):
            raise RangeError(f"height index {k} outside 1..{len(self.heights)}")
        return self.heights[k - 1]

    def q(self, k):
        if not 1 <= k <= len(self.products):
            raise RangeError(f"width index {k} outside 1..{len(self.products)}")
        return self.products[k - 1]


def heights(params: ConstructionParams, n: int) -> HeightSequence:
    """h_1..h_{n+1} and q_1..q_n by the exact recursion h_{n+1} = p_n h_n + sum s_{n,j}."""
    if not 1 <= n <= params.depth:
        raise RangeError(f"stage {n} exceeds depth {params.depth}")
    hs = [1]
    qs = []
    q = 1
    for k in range(1, n + 1):
        p = params.cut(k)
        hs.append(p * hs[-1] + sum(params.spacer_row(k)))
        q *= p
        qs.append(q)
    return HeightSequence(tuple(hs), tuple(qs))


def finite_measure_partial_sums(params, n, threshold=Fraction(1, 1000)):
    """Partial sums of sum_k (1/h_{k+1}) * sum_i s_{k,i}, exact rationals.

    The returned flag is a prefix heuristic only (last increment below
    `threshold`); convergence of the series is not decidable from a prefix.
    """
    seq = heights(params, n)
    sums = []
    acc = Fraction(0)
    last_inc = None
    for k in range(1, n + 1):
        inc = Fraction(sum(params.spacer_row(k)), seq.h(k + 1))
        acc += inc
        sums.append(acc)
        last_inc = inc
    converged_hint = last_inc is not None and last_inc < threshold
    return sums, converged_hint


def spacer_stats(params, n):
    """Per-stage spacer maxima t_k and the ratios (t_1+...+t_k)/h_k.

    The flag is a heuristic monotone-decrease check of the ratios over the
    prefix (constructions are "reasonable" when t_n = o(h_n))."""
    seq = heights(params, n)
    ts = [max(params.spacer_row(k)) for k in range(1, n + 1)]
    ratios = []
    run = 0
    for k, t in enumerate(ts, start=1):
        run += t
        ratios.append(Fraction(run, seq.h(k)))
    reasonable = all(ratios[i + 1] <= ratios[i] for i in range(len(ratios) - 1))
    reasonable = reasonable and (not ratios or ratios[-1] < 1)
    return ts, ratios, reasonable


# ----------------------------------------------------------------------------
# Named families and JSON loading
# ----------------------------------------------------------------------------


def chacon(depth):
    """Classical Chacon: p = 3, one spacer after the middle column, every stage."""
    return ConstructionParams(
        cuts=(3,) * depth, spacers=((0, 1, 0),) * depth, family="chacon"
    )


def von_neumann_kakutani(depth):
    """Dyadic doubling with no spacers (an odometer)."""
    return ConstructionParams(cuts=(2,) * depth, spacers=((0, 0),) * depth, family="vnk")


def generalized_chacon(depth, cuts=None, spacer_index=0):
    """One spacer per stage at a chosen column, cuts growing to infinity.

    Default schedule p_n = 2n + 2; `spacer_index` is an int, the string
    "last", or a per-stage sequence."""
    if cuts is None:
        cuts = tuple(2 * n + 2 for n in range(1, depth + 1))
        generated = True
    else:
        cuts = tuple(cuts)
        if len(cuts) != depth:
            raise InputError("need one cut per stage")
        generated = all(a < b for a, b in zip(cuts, cuts[1:]))
    rows = []
    for n, p in enumerate(cuts, start=1):
        if isinstance(spacer_index, str):
            if spacer_index != "last":
                raise InputError("spacer_index must be an int, 'last', or a sequence")
            r = p - 1
        elif isinstance(spacer_index, int):
            r = spacer_index
        else:
            r = spacer_index[n - 1]
        if not 0 <= r < p:
            raise InputError(f"spacer index {r} outside 0..{p - 1} at stage {n}")
        rows.append(tuple(1 if j == r else 0 for j in range(p)))
    return ConstructionParams(
        cuts=cuts, spacers=tuple(rows), family="generalized_chacon", unbounded=generated
    )


def katok(cuts=None, depth=None):
    """Even cuts with spacers on the second half of the columns.

    Growth schedules are user-supplied; the default doubling p_n = 2^{n+1} is
    for prefix diagnostics only and does not satisfy the fast-growth regime
    needed by the mixing-limit experiments."""
    if cuts is None:
        if depth is None:
            raise InputError("katok needs cuts or a depth")
        cuts = tuple(2 ** (n + 1) for n in range(1, depth + 1))
    cuts = tuple(cuts)
    rows = tuple((0,) * (p // 2) + (1,) * (p // 2) for p in cuts)
    unbounded = all(a < b for a, b in zip(cuts, cuts[1:]))
    return ConstructionParams(cuts=cuts, spacers=rows, family="katok", unbounded=unbounded)


def _expand_custom(doc):
    cuts = [int(c) for c in doc.get("cuts", [])]
    spacers = [tuple(int(s) for s in row) for row in doc.get("spacers", [])]
    if len(cuts) != len(spacers):
        raise InputError("cuts and spacers must have the same number of stages")
    depth = int(doc.get("depth", len(cuts)))
    gen = doc.get("generator", {}) or {}
    rule = gen.get("rule", "periodic" if depth > len(cuts) else "none")
    if depth > len(cuts):
        if rule != "periodic":
            raise InputError(f"cannot extend prefix to depth {depth} with rule {rule!r}")
        if not cuts:
            raise InputError("periodic generator needs a non-empty prefix")
        k = len(cuts)
        cuts = [cuts[i % k] for i in range(depth)]
        spacers = [spacers[i % k] for i in range(depth)]
    return ConstructionParams(
        cuts=tuple(cuts[:depth]), spacers=tuple(spacers[:depth]), family="custom"
    )


def expand_family(doc) -> ConstructionParams:
    """Deterministically expand a construction document to an explicit prefix."""
    family = doc.get("family", "custom")
    depth = doc.get("depth")
    gen = doc.get("generator", {}) or {}
    if family == "chacon":
        return chacon(int(depth))
    if family == "vnk":
        return von_neumann_kakutani(int(depth))
    if family == "generalized_chacon":
        cuts = doc.get("cuts") or gen.get("cuts")
        idx = gen.get("spacer_index", 0)
        if isinstance(idx, list):
            idx = tuple(idx)
        return generalized_chacon(int(depth), cuts=cuts, spacer_index=idx)
    if family == "katok":
        cuts = doc.get("cuts") or gen.get("cuts")
        return katok(cuts=cuts, depth=None if cuts else int(depth))
    if family == "custom":
        return _expand_custom(doc)
    raise InputError(f"unknown family {family!r}")


def load_construction(source) -> ConstructionParams:
    """Load from a dict, a JSON file path, or a built-in family name.

    Built-in names take the form "chacon" or "chacon:depth=20"."""
    if isinstance(source, ConstructionParams):
        return source
    if isinstance(source, dict):
        return expand_family(source)
    text = str(source)
    name, _, rest = text.partition(":")
    if name in ("chacon", "vnk", "generalized_chacon", "katok"):
        doc = {"family": name}
        for item in filter(None, rest.split(",")):
            key, _, value = item.partition("=")
            doc[key] = int(value)
        doc.setdefault("depth", 20)
        return expand_family(doc)
    with open(text, "r", encoding="utf-8") as fh:
        return expand_family(json.load(fh))
