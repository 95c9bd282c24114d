"""Nearest-neighbor interactions and their cocycles.

An interaction assigns a weight to each single-site pattern and each
directed edge pattern; the associated cocycle of a homoclinic pair is the
telescoped difference of weights over all patterns meeting the difference
set.  `synth_invariant` realizes any zero-sum coefficient vector as a
shift-invariant interaction supported on one edge direction;
`synth_nonstationary` drops shift invariance and realizes arbitrary
coefficients via a recursion marching along the first axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from .cocycles import Alphas, _num_from_json, _num_to_json
from .errors import NotGibbsError, UnsupportedModelError
from .lattice import (
    Configuration,
    HomoclinicPair,
    Site,
    Window,
    site_add,
    unit_vector,
)


@dataclass(frozen=True)
class NNInteraction:
    """Shift-invariant nearest-neighbor interaction.

    ``site[a]`` weighs the single-site pattern ``a``; ``edge[(j, a, b)]``
    weighs the pattern with ``a`` at ``n`` and ``b`` at ``n + e_j``.
    Missing entries weigh zero.
    """

    r: int
    d: int
    site: Mapping[int, object] = field(default_factory=dict)
    edge: Mapping[Tuple[int, int, int], object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "site", dict(self.site))
        object.__setattr__(self, "edge", dict(self.edge))
        for j, _, _ in self.edge:
            if not 1 <= j <= self.d:
                raise ValueError(f"edge direction {j} out of range")

    def site_weight(self, a: int):
        return self.site.get(a, 0)

    def edge_weight(self, j: int, a: int, b: int):
        return self.edge.get((j, a, b), 0)

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "d": self.d,
            "site": {str(a): _num_to_json(v) for a, v in sorted(self.site.items())},
            "edge": {
                f"{j}:{a},{b}": _num_to_json(v)
                for (j, a, b), v in sorted(self.edge.items())
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "NNInteraction":
        site = {int(a): _num_from_json(v) for a, v in data.get("site", {}).items()}
        edge = {}
        for key, v in data.get("edge", {}).items():
            j, pair = key.split(":")
            a, b = pair.split(",")
            edge[(int(j), int(a), int(b))] = _num_from_json(v)
        return cls(int(data["r"]), int(data["d"]), site, edge)


@dataclass(frozen=True)
class SiteInteraction:
    """Site-indexed nearest-neighbor interaction with finite support.

    ``entries[(n, j, a, b)]`` weighs the pattern ``(a, b)`` on the edge
    ``(n, n + e_j)``; everything else weighs zero.  `support` declares the
    window inside which the tables are meaningful.
    """

    r: int
    d: int
    support: Window
    entries: Mapping[Tuple[Site, int, int, int], object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    def edge_weight(self, n: Site, j: int, a: int, b: int):
        return self.entries.get((n, j, a, b), 0)

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "d": self.d,
            "support": self.support.to_json_dict(),
            "edge": {
                f"{','.join(map(str, n))}:{j}:{a},{b}": _num_to_json(v)
                for (n, j, a, b), v in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "SiteInteraction":
        entries = {}
        for key, v in data.get("edge", {}).items():
            site_part, j, pair = key.split(":")
            n = tuple(int(c) for c in site_part.split(","))
            a, b = pair.split(",")
            entries[(n, int(j), int(a), int(b))] = _num_from_json(v)
        return cls(
            int(data["r"]),
            int(data["d"]),
            Window.from_json_dict(data["support"]),
            entries,
        )


def gibbs_eval(phi, pair: HomoclinicPair):
    """Telescoped interaction difference over the pair's difference set.

    Sums ``phi(y|_W) - phi(x|_W)`` over every site and edge meeting a
    site where the pair differs; nearest-neighbor range keeps this finite.
    """
    x, y = pair.x, pair.y
    window = x.window
    d = window.d
    diff = pair.diff
    total = 0
    if isinstance(phi, NNInteraction):
        for n in diff:
            total += phi.site_weight(y[n]) - phi.site_weight(x[n])
        edges = set()
        for n in diff:
            for j in range(1, d + 1):
                edges.add((n, j))
                prev = site_add(n, unit_vector(d, j, -1))
                if prev in window:
                    edges.add((prev, j))
        for n, j in edges:
            m = site_add(n, unit_vector(d, j))
            if m not in window:
                continue
            total += phi.edge_weight(j, y[n], y[m]) - phi.edge_weight(j, x[n], x[m])
        return total
    if isinstance(phi, SiteInteraction):
        edges = set()
        for n in diff:
            for j in range(1, d + 1):
                edges.add((n, j))
                prev = site_add(n, unit_vector(d, j, -1))
                if prev in window:
                    edges.add((prev, j))
        for n, j in edges:
            m = site_add(n, unit_vector(d, j))
            if m not in window:
                continue
            total += (
                phi.edge_weight(n, j, y[n], y[m])
                - phi.edge_weight(n, j, x[n], x[m])
            )
        return total
    raise TypeError(f"unsupported interaction type {type(phi)!r}")


def synth_invariant(alphas: Alphas, d: int = 2) -> NNInteraction:
    """Shift-invariant interaction realizing zero-sum coefficients.

    Sets the direction-1 ascending-pair weights to the tail sums
    ``-(alpha_i + ... + alpha_{r-1})`` and everything else to zero; a
    single-site pivot from residue i then telescopes to exactly alpha_i.
    """
    total = alphas.total()
    exact = all(isinstance(c, (int, Fraction)) for c in alphas.coeffs)
    if exact:
        if total != 0:
            raise NotGibbsError(
                f"coefficients sum to {total}; a shift-invariant interaction "
                "exists only for zero-sum coefficients"
            )
    elif abs(total) > 1e-12:
        raise NotGibbsError(
            f"coefficients sum to {total}; a shift-invariant interaction "
            "exists only for zero-sum coefficients"
        )
    r = alphas.r
    edge = {}
    for i in range(r):
        tail = sum(alphas.coeffs[i:])
        if tail != 0:
            edge[(1, i, (i + 1) % r)] = -tail
    return NNInteraction(r, d, {}, edge)


def synth_nonstationary(alphas: Alphas, window: Window) -> SiteInteraction:
    """Site-indexed interaction realizing arbitrary coefficients.

    Direction-1 tables only.  Ascending-pair weights vanish for first
    coordinate <= 0 and grow by the recursion
    ``phi_n(i, i+1) = -alpha_i + phi_{n-e_1}(i+1, i+2)``; descending-pair
    weights mirror this for negative first coordinates.  The tables are
    built for every edge inside `window`; single-site pivots whose edges
    stay inside reproduce the coefficient cocycle exactly.
    """
    if alphas.r in (1, 2, 4):
        raise UnsupportedModelError("site-indexed synthesis needs r outside {1,2,4}")
    r = alphas.r
    d = window.d

    asc_cache: Dict[Tuple[int, int], object] = {}
    desc_cache: Dict[Tuple[int, int], object] = {}

    def asc(n1: int, i: int):
        # weight of (i, i+1) on the edge (n, n+e_1) for first coordinate n1
        if n1 <= 0:
            return 0
        key = (n1, i % r)
        if key not in asc_cache:
            asc_cache[key] = -alphas.coeffs[i % r] + asc(n1 - 1, (i + 1) % r)
        return asc_cache[key]

    def desc(n1: int, i: int):
        # weight of (i+1, i) on the edge (n, n+e_1) for first coordinate n1
        if n1 >= 0:
            return 0
        key = (n1, i % r)
        if key not in desc_cache:
            desc_cache[key] = -alphas.coeffs[i % r] + desc(n1 + 1, (i + 1) % r)
        return desc_cache[key]

    entries: Dict[Tuple[Site, int, int, int], object] = {}
    for n in window.sites():
        if site_add(n, unit_vector(d, 1)) not in window:
            continue
        n1 = n[0]
        for i in range(r):
            up = asc(n1, i)
            if up != 0:
                entries[(n, 1, i, (i + 1) % r)] = up
            down = desc(n1, i)
            if down != 0:
                entries[(n, 1, (i + 1) % r, i)] = down
    return SiteInteraction(r, d, window, entries)


def _exact_div(value, divisor: int):
    """Divide, staying exact for int/Fraction inputs."""
    if isinstance(value, (int, Fraction)):
        out = Fraction(value) / divisor
        return int(out) if out.denominator == 1 else out
    return value / divisor


def symmetrize(phi: NNInteraction) -> NNInteraction:
    """Direction-free interaction with the same single-site pivot cocycle.

    Averages each residue pair's edge weights over directions and both
    orientations, folding the site potentials of both endpoints into the
    edge table; site potentials of the result are zero.  Pivot values are
    preserved exactly (the per-pair constant is
    ``(sum_j both orientations + c_i + c_{i+1}) / 2d``).
    """
    r, d = phi.r, phi.d
    edge = {}
    for i in range(r):
        nxt = (i + 1) % r
        pooled = sum(
            phi.edge_weight(j, i, nxt) + phi.edge_weight(j, nxt, i)
            for j in range(1, d + 1)
        )
        pooled = pooled + phi.site_weight(i) + phi.site_weight(nxt)
        value = _exact_div(pooled, 2 * d)
        if value != 0:
            for j in range(1, d + 1):
                edge[(j, i, nxt)] = value
                edge[(j, nxt, i)] = value
    return NNInteraction(r, d, {}, edge)


def f_phi(phi: NNInteraction, pattern: Mapping[Site, int]):
    """Per-site energy density of the local pattern around the origin.

    The pattern must cover the origin and its 2d neighbors; each edge at
    the origin contributes half its weight, the origin contributes its
    full site weight.
    """
    d = phi.d
    origin = (0,) * d
    if origin not in pattern:
        raise ValueError("pattern must cover the origin")
    for j in range(1, d + 1):
        for s in (1, -1):
            if site_add(origin, unit_vector(d, j, s)) not in pattern:
                raise ValueError("pattern must cover all neighbors of the origin")
    total = phi.site_weight(pattern[origin])
    for j in range(1, d + 1):
        before = pattern[site_add(origin, unit_vector(d, j, -1))]
        after = pattern[site_add(origin, unit_vector(d, j, 1))]
        both = (
            phi.edge_weight(j, before, pattern[origin])
            + phi.edge_weight(j, pattern[origin], after)
        )
        total = total + _exact_div(both, 2)
    return total
