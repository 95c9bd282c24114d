"""Finite conditional-probability tables and sampling for edge models.

Given a boundary pattern around a box region, the region's valid fillings
are enumerated by backtracking with forward constraint checks.  A cocycle
turns the filling set into a probability table: each filling is weighted
by the exponential of its cocycle value against a fixed reference filling,
and the normalizer absorbs the reference choice.  The three defining
properties of such a table family (support, in-region conditional
independence, and ratio consistency under region nesting) are verified
numerically by `check_axioms`.

`heat_bath` resamples one site at a time from its exact single-site
conditional, sweeping the region in lexicographic order.  Each per-site
kernel is reversible for the table law, so the sweep kernel preserves it;
`exact` mode iterates a distribution vector to the fixed point, `sample`
mode runs a seeded trajectory.  This finite-volume sampler is artifact
plumbing, not a construction taken from any source.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .cocycles import Alphas, crossing_count, evaluate
from .errors import (
    NonExtendableBoundaryError,
    ResourceBudgetError,
    UnsupportedModelError,
)
from .heights import bracket
from .lattice import (
    Configuration,
    EdgeSFT,
    HomoclinicPair,
    Site,
    Window,
    make_pair,
    site_add,
    site_sub,
    unit_vector,
    xr_edge_sft,
)

DEFAULT_MAX_PATTERNS = 200_000
DEFAULT_MAX_NODES = 5_000_000


# ---------------------------------------------------------------------------
# pattern enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternSet:
    """Valid fillings of a box region under a fixed outer boundary."""

    sft: EdgeSFT
    window: Window
    boundary: Mapping[Site, object]
    patterns: Tuple[tuple, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundary", dict(self.boundary))

    def index(self, pattern: tuple) -> int:
        return self.patterns.index(tuple(pattern))

    def to_json_dict(self) -> dict:
        return {
            "window": self.window.to_json_dict(),
            "boundary": {
                ",".join(map(str, n)): v for n, v in sorted(self.boundary.items())
            },
            "patterns": [list(p) for p in self.patterns],
        }


def _check_boundary(sft: EdgeSFT, window: Window,
                    boundary: Mapping[Site, object]) -> None:
    symbols = set(sft.alphabet)
    expected = window.boundary_sites()
    missing = expected - set(boundary)
    if missing:
        raise ValueError(f"boundary value missing at {sorted(missing)[0]}")
    for n, v in boundary.items():
        if v not in symbols:
            raise ValueError(f"boundary symbol {v!r} at {n} not in alphabet")
    d = window.d
    for n in boundary:
        for j in range(1, d + 1):
            m = site_add(n, unit_vector(d, j))
            if m in boundary and not sft.edge_ok(j, boundary[n], boundary[m]):
                raise ValueError(
                    f"boundary pattern itself violates the edge constraint "
                    f"between {n} and {m}"
                )


def enumerate_patterns(sft: EdgeSFT, window: Window,
                       boundary: Mapping[Site, object], *,
                       max_patterns: int = DEFAULT_MAX_PATTERNS,
                       max_nodes: int = DEFAULT_MAX_NODES) -> PatternSet:
    """All valid fillings of `window` given the outer `boundary` pattern.

    Backtracking in row-major site order, checking each placement against
    already-placed neighbors and the boundary.  Raises a budget error when
    the search tree or the result set grows past the caps.
    """
    _check_boundary(sft, window, boundary)
    sites = list(window.sites())
    d = window.d
    patterns: List[tuple] = []
    if not sites:
        return PatternSet(sft, window, boundary, ((),))

    # neighbors already known when a site is placed, per row-major order
    fixed: Dict[Site, object] = dict(boundary)
    preceding: List[List[Tuple[int, int, bool]]] = []
    site_index = {n: i for i, n in enumerate(sites)}
    bnd_checks: List[List[Tuple[object, int, bool]]] = []
    for n in sites:
        prev = []
        bnd = []
        for j in range(1, d + 1):
            for sign, before in ((-1, True), (1, False)):
                m = site_add(n, unit_vector(d, j, sign))
                if m in site_index:
                    if site_index[m] < site_index[n]:
                        prev.append((site_index[m], j, before))
                elif m in fixed:
                    bnd.append((fixed[m], j, before))
        preceding.append(prev)
        bnd_checks.append(bnd)

    assignment: List[object] = [None] * len(sites)
    nodes = 0

    def candidates(depth: int) -> Iterator:
        for symbol in sft.alphabet:
            ok = True
            for idx, j, before in preceding[depth]:
                other = assignment[idx]
                pair_ok = (
                    sft.edge_ok(j, other, symbol)
                    if before
                    else sft.edge_ok(j, symbol, other)
                )
                if not pair_ok:
                    ok = False
                    break
            if ok:
                for value, j, before in bnd_checks[depth]:
                    pair_ok = (
                        sft.edge_ok(j, value, symbol)
                        if before
                        else sft.edge_ok(j, symbol, value)
                    )
                    if not pair_ok:
                        ok = False
                        break
            if ok:
                yield symbol

    depth = 0
    iterators: List[Iterator] = [candidates(0)]
    while iterators:
        try:
            symbol = next(iterators[-1])
        except StopIteration:
            iterators.pop()
            depth -= 1
            continue
        nodes += 1
        if nodes > max_nodes:
            raise ResourceBudgetError(
                f"enumeration search exceeded {max_nodes} nodes "
                f"({len(patterns)} patterns found)",
                count=len(patterns),
            )
        assignment[depth] = symbol
        if depth + 1 == len(sites):
            patterns.append(tuple(assignment))
            if len(patterns) > max_patterns:
                raise ResourceBudgetError(
                    f"more than {max_patterns} valid patterns",
                    count=len(patterns),
                )
        else:
            depth += 1
            iterators.append(candidates(depth))
    return PatternSet(sft, window, boundary, tuple(patterns))


# ---------------------------------------------------------------------------
# conditional tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecTable:
    """Probability table over a pattern set."""

    pattern_set: PatternSet
    probabilities: Tuple[float, ...]
    normalizer: float

    def __post_init__(self):
        if len(self.probabilities) != len(self.pattern_set.patterns):
            raise ValueError("probability count does not match pattern count")
        if any(p <= 0 for p in self.probabilities):
            raise ValueError("probabilities must be strictly positive")
        if abs(sum(self.probabilities) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    def probability_of(self, pattern: tuple) -> float:
        return self.probabilities[self.pattern_set.index(pattern)]

    def to_json_dict(self) -> dict:
        data = self.pattern_set.to_json_dict()
        data["probabilities"] = list(self.probabilities)
        data["normalizer"] = self.normalizer
        return data


def _corner_fill(window: Window, r: int,
                 boundary: Mapping[Site, object]) -> Dict[Site, int]:
    """Extend an outer boundary pattern to the corners of the +1 box.

    Each corner is adjacent to two boundary strip sites whose residues
    differ by 0 or +-2 whenever the boundary is extendable at all, so the
    smallest residue adjacent to both exists; it is chosen.
    """
    boxed = window.expand(1)
    out: Dict[Site, int] = dict(boundary)
    for n in boxed.sites():
        if n in window or n in out:
            continue
        constraints = [
            out[m]
            for j in range(1, window.d + 1)
            for s in (1, -1)
            if (m := site_add(n, unit_vector(window.d, j, s))) in out
        ]
        for v in range(r):
            if all((v - c) % r in (1, r - 1) for c in constraints):
                out[n] = v
                break
        else:
            raise NonExtendableBoundaryError(
                f"no residue fits the corner site {n}"
            )
    return out


def theta_table(alphas: Alphas, window: Window,
                boundary: Mapping[Site, int], *,
                max_patterns: int = DEFAULT_MAX_PATTERNS,
                max_nodes: int = DEFAULT_MAX_NODES) -> SpecTable:
    """Conditional law of the region given the boundary, for the cocycle.

    Weights each filling by ``exp(M(reference, filling))`` with the first
    enumerated filling as reference; the normalizer makes the choice of
    reference immaterial.
    """
    r = alphas.r
    if r in (1, 2, 4):
        raise UnsupportedModelError(f"conditional tables need r outside {{1,2,4}}")
    sft = xr_edge_sft(r, window.d)
    pats = enumerate_patterns(
        sft, window, boundary, max_patterns=max_patterns, max_nodes=max_nodes
    )
    if not pats.patterns:
        raise NonExtendableBoundaryError("boundary admits no valid filling")
    boxed = window.expand(1)
    frame = _corner_fill(window, r, boundary)
    sites = list(window.sites())

    def full_config(pattern: tuple) -> Configuration:
        values = dict(frame)
        values.update(zip(sites, pattern))
        return Configuration.from_values(boxed, r, values)

    reference = full_config(pats.patterns[0])
    weights = []
    for pattern in pats.patterns:
        if pattern == pats.patterns[0]:
            weights.append(1.0)
            continue
        pair = make_pair(reference, full_config(pattern))
        weights.append(math.exp(float(evaluate(alphas, pair))))
    z = sum(weights)
    return SpecTable(pats, tuple(w / z for w in weights), z)


# ---------------------------------------------------------------------------
# axiom checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    support_ok: bool
    markov_ok: bool
    consistency_ok: bool
    failures: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.support_ok and self.markov_ok and self.consistency_ok

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "support_ok": self.support_ok,
            "markov_ok": self.markov_ok,
            "consistency_ok": self.consistency_ok,
            "failures": list(self.failures),
        }


def _support_failures(table: SpecTable, tol: float) -> List[str]:
    failures = []
    fresh = enumerate_patterns(
        table.pattern_set.sft, table.pattern_set.window, table.pattern_set.boundary
    )
    if set(fresh.patterns) != set(table.pattern_set.patterns):
        failures.append("support: pattern set does not match the valid fillings")
    for pattern, p in zip(table.pattern_set.patterns, table.probabilities):
        if p <= tol:
            failures.append(f"support: extendable pattern {pattern} has mass {p}")
    return failures


def _markov_failures(table: SpecTable, tol: float) -> List[str]:
    """Single-site conditional independence inside the region.

    For strictly positive tables the one-site condition implies the full
    region-wise one.  For each site, patterns are grouped by their values
    off the site; groups whose neighbor values coincide must induce the
    same conditional law at the site.
    """
    failures = []
    pats = table.pattern_set
    sites = list(pats.window.sites())
    for k, site in enumerate(sites):
        rest_idx = [i for i in range(len(sites)) if i != k]
        nbr_pos = [
            pos for pos, i in enumerate(rest_idx)
            if sum(abs(a - b) for a, b in zip(sites[i], site)) == 1
        ]
        groups: Dict[tuple, Dict[object, float]] = {}
        for pattern, p in zip(pats.patterns, table.probabilities):
            rest = tuple(pattern[i] for i in rest_idx)
            groups.setdefault(rest, {})[pattern[k]] = p
        seen: Dict[tuple, Dict[object, float]] = {}
        for rest, dist in groups.items():
            mass = sum(dist.values())
            cond = {v: p / mass for v, p in dist.items()}
            nbrs = tuple(rest[pos] for pos in nbr_pos)
            if nbrs in seen:
                prev = seen[nbrs]
                for v in set(cond) | set(prev):
                    if abs(cond.get(v, 0.0) - prev.get(v, 0.0)) > tol:
                        failures.append(
                            f"markov: conditional at {site} given neighbors "
                            f"{nbrs} differs between contexts"
                        )
                        break
            else:
                seen[nbrs] = cond
    return failures


def _consistency_failures(inner: SpecTable, outer: SpecTable,
                          tol: float) -> List[str]:
    """Ratio consistency of the inner table against the outer one."""
    failures = []
    fw, hw = inner.pattern_set.window, outer.pattern_set.window
    f_sites = list(fw.sites())
    h_sites = list(hw.sites())
    f_boundary = inner.pattern_set.boundary
    if not all(n in hw for n in list(f_sites) + list(f_boundary)):
        raise ValueError("inner region plus boundary must lie inside the outer region")
    h_index = {n: i for i, n in enumerate(h_sites)}
    denom = 0.0
    numer: Dict[tuple, float] = {p: 0.0 for p in inner.pattern_set.patterns}
    for pattern, p in zip(outer.pattern_set.patterns, outer.probabilities):
        if all(pattern[h_index[n]] == v for n, v in f_boundary.items()):
            denom += p
            restricted = tuple(pattern[h_index[n]] for n in f_sites)
            if restricted in numer:
                numer[restricted] += p
    if denom == 0.0:
        failures.append("consistency: inner boundary has outer probability zero")
        return failures
    for pattern, p in zip(inner.pattern_set.patterns, inner.probabilities):
        ratio = numer[pattern] / denom
        if abs(ratio - p) > tol:
            failures.append(
                f"consistency: pattern {pattern} has inner mass {p} "
                f"but outer ratio {ratio}"
            )
    return failures


def check_axioms(inner: SpecTable, outer: SpecTable,
                 tol: float = 1e-9) -> AxiomReport:
    """Verify support, Markov, and consistency for a nested table pair."""
    support = _support_failures(inner, 0.0) + _support_failures(outer, 0.0)
    markov = _markov_failures(inner, tol) + _markov_failures(outer, tol)
    consistency = _consistency_failures(inner, outer, tol)
    return AxiomReport(
        not support,
        not markov,
        not consistency,
        tuple(support + markov + consistency),
    )


# ---------------------------------------------------------------------------
# heat bath
# ---------------------------------------------------------------------------

def _site_conditional(alphas: Alphas, nbr_values: Sequence[int]) -> Dict[int, float]:
    """Exact one-site conditional given the neighboring residues."""
    r = alphas.r
    candidates = []
    for v in range(r):
        if all((v - u) % r in (1, r - 1) for u in nbr_values):
            candidates.append(v)
    if not candidates:
        raise NonExtendableBoundaryError("no residue fits the neighborhood")
    anchor = nbr_values[0]
    heights = {v: anchor + bracket(v, anchor, r) for v in candidates}
    ref = candidates[0]
    weights = {}
    for v in candidates:
        exponent = sum(
            float(alphas.coeffs[i]) * crossing_count(i, heights[ref], heights[v], r)
            for i in range(r)
        )
        weights[v] = math.exp(exponent)
    z = sum(weights.values())
    return {v: w / z for v, w in weights.items()}


def _sweep_sites(window: Window) -> List[Site]:
    return sorted(window.sites())


def heat_bath(alphas: Alphas, window: Window, boundary: Mapping[Site, int],
              sweeps: int, seed: int, mode: str = "sample", *,
              exact_limit: int = 12, record_every: Optional[int] = None):
    """Single-site resampling dynamics for the conditional law.

    ``sample`` mode returns the configuration on the window after `sweeps`
    lexicographic sweeps (or the recorded trajectory when `record_every`
    is set), deterministic per seed.  ``exact`` mode returns the stationary
    :class:`SpecTable` of the sweep kernel, found by iterating the
    distribution vector to a fixed point with residual below 1e-12.
    """
    r = alphas.r
    if r in (1, 2, 4):
        raise UnsupportedModelError("heat bath needs r outside {1,2,4}")
    sft = xr_edge_sft(r, window.d)
    d = window.d
    sites = _sweep_sites(window)

    if mode == "exact":
        if window.site_count > exact_limit:
            raise ResourceBudgetError(
                f"exact mode limited to {exact_limit} cells", count=window.site_count
            )
        pats = enumerate_patterns(sft, window, boundary)
        if not pats.patterns:
            raise NonExtendableBoundaryError("boundary admits no valid filling")
        order = {n: i for i, n in enumerate(window.sites())}
        dist = {p: 1.0 / len(pats.patterns) for p in pats.patterns}
        for _ in range(100_000):
            new = dist
            for site in sites:
                out: Dict[tuple, float] = {}
                for pattern, mass in new.items():
                    if mass == 0.0:
                        continue
                    nbrs = []
                    for j in range(1, d + 1):
                        for s in (1, -1):
                            m = site_add(site, unit_vector(d, j, s))
                            if m in order:
                                nbrs.append(pattern[order[m]])
                            elif m in boundary:
                                nbrs.append(boundary[m])
                    cond = _site_conditional(alphas, nbrs)
                    for v, q in cond.items():
                        nxt = list(pattern)
                        nxt[order[site]] = v
                        nxt = tuple(nxt)
                        out[nxt] = out.get(nxt, 0.0) + mass * q
                new = out
            residual = sum(abs(new.get(p, 0.0) - dist.get(p, 0.0))
                           for p in set(new) | set(dist))
            dist = new
            if residual < 1e-12:
                break
        probs = tuple(dist.get(p, 0.0) for p in pats.patterns)
        return SpecTable(pats, probs, 1.0)

    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")

    # initial state: first valid filling via depth-first search
    state = _first_filling(sft, window, boundary)
    if state is None:
        raise NonExtendableBoundaryError("boundary admits no valid filling")
    rng = random.Random(seed)
    order = {n: i for i, n in enumerate(window.sites())}
    trajectory = []
    for sweep in range(1, sweeps + 1):
        for site in sites:
            nbrs = []
            for j in range(1, d + 1):
                for s in (1, -1):
                    m = site_add(site, unit_vector(d, j, s))
                    if m in order:
                        nbrs.append(state[order[m]])
                    elif m in boundary:
                        nbrs.append(boundary[m])
            cond = _site_conditional(alphas, nbrs)
            u = rng.random()
            acc = 0.0
            chosen = None
            for v in sorted(cond):
                acc += cond[v]
                if u <= acc:
                    chosen = v
                    break
            if chosen is None:
                chosen = max(sorted(cond))
            state[order[site]] = chosen
        if record_every and sweep % record_every == 0:
            trajectory.append(Configuration(window, r, tuple(state)))
    final = Configuration(window, r, tuple(state))
    if record_every:
        return trajectory
    return final


def _first_filling(sft: EdgeSFT, window: Window,
                   boundary: Mapping[Site, object]) -> Optional[list]:
    """First valid filling in row-major depth-first order."""
    _check_boundary(sft, window, boundary)
    sites = list(window.sites())
    d = window.d
    site_index = {n: i for i, n in enumerate(sites)}
    assignment: List[object] = [None] * len(sites)

    def ok_at(depth: int, symbol) -> bool:
        n = sites[depth]
        for j in range(1, d + 1):
            for sign in (1, -1):
                m = site_add(n, unit_vector(d, j, sign))
                other = None
                before = sign == -1
                if m in site_index:
                    if site_index[m] < depth:
                        other = assignment[site_index[m]]
                elif m in boundary:
                    other = boundary[m]
                if other is None:
                    continue
                allowed = (
                    sft.edge_ok(j, other, symbol)
                    if before
                    else sft.edge_ok(j, symbol, other)
                )
                if not allowed:
                    return False
        return True

    def solve(depth: int) -> bool:
        if depth == len(sites):
            return True
        for symbol in sft.alphabet:
            if ok_at(depth, symbol):
                assignment[depth] = symbol
                if solve(depth + 1):
                    return True
        assignment[depth] = None
        return False

    return assignment if solve(0) else None


# ---------------------------------------------------------------------------
# slope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeEstimate:
    v: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    sample_count: int

    def to_json_dict(self) -> dict:
        return {
            "v": list(self.v),
            "standard_errors": list(self.standard_errors),
            "sample_count": self.sample_count,
        }


def slope_estimate(samples: Sequence[Configuration]) -> SlopeEstimate:
    """Mean bracket per direction, spatially and ensemble averaged.

    Standard errors come from batch means over up to ten consecutive
    sample batches.
    """
    if not samples:
        raise ValueError("need at least one sample")
    window = samples[0].window
    r = samples[0].r
    d = window.d
    if any(s.window != window or s.r != r for s in samples):
        raise ValueError("samples must share one window and modulus")
    per_sample: List[List[float]] = []
    for config in samples:
        sums = [0.0] * d
        counts = [0] * d
        for n in window.sites():
            for j in range(1, d + 1):
                m = site_add(n, unit_vector(d, j))
                if m in window:
                    sums[j - 1] += bracket(config[m], config[n], r)
                    counts[j - 1] += 1
        per_sample.append([s / c for s, c in zip(sums, counts)])
    v = tuple(
        sum(row[j] for row in per_sample) / len(per_sample) for j in range(d)
    )
    n_batches = min(10, len(per_sample))
    batch_size = len(per_sample) // n_batches
    errors = []
    for j in range(d):
        if n_batches < 2:
            errors.append(0.0)
            continue
        means = []
        for b in range(n_batches):
            chunk = per_sample[b * batch_size:(b + 1) * batch_size]
            means.append(sum(row[j] for row in chunk) / len(chunk))
        mu = sum(means) / n_batches
        var = sum((m - mu) ** 2 for m in means) / (n_batches - 1)
        errors.append(math.sqrt(var / n_batches))
    return SlopeEstimate(v, tuple(errors), len(samples))
