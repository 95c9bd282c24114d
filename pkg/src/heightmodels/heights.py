"""Height-function lifts of residue configurations and range surgery.

A height function on a region assigns integers differing by exactly 1
across every lattice edge of the region.  Reducing mod ``r`` gives a valid
residue configuration; conversely a valid configuration lifts by summing
brackets along paths, and the lift is unique once one base value is fixed
(two lifts differ by a constant multiple of ``r``).  For ``r = 4`` the
bracket sums can be path-dependent; the plaquette identity is checked and
a witness reported when it fails.

Range surgery on heights (`steep_to_flat`, `flat_extension`) repeatedly
moves one extremal interior site by 2, which preserves validity because a
site at a strict extremum has all its in-region neighbors exactly one step
toward the mean.  `patch` composes these moves with two residue marching
bands to splice an arbitrary valid pattern into any sufficiently non-steep
surrounding configuration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Set, Tuple

from .errors import (
    InfeasibleBoundaryError,
    PathDependenceError,
    PreconditionError,
    UnsupportedModelError,
)
from .lattice import (
    Configuration,
    HomoclinicPair,
    Site,
    Window,
    boundary,
    bracket,
    l1norm,
    l1_ball,
    l1_sphere,
    neighbors,
    plaquette_defects,
    require_valid,
    site_add,
    site_sub,
    unit_vector,
)

__all__ = [
    "HeightFunction",
    "RangeReport",
    "bracket",
    "grad",
    "lift",
    "lift_pair",
    "max_height",
    "steep_to_flat",
    "flat_extension",
    "patch",
    "range_over",
    "random_height_function",
    "random_configuration",
]


def _check_liftable(config: Configuration) -> None:
    if config.r == 1:
        raise UnsupportedModelError("r=1 has no height structure")
    if config.r == 4:
        defects = plaquette_defects(config)
        if defects:
            p, i, j, side_i, side_j = defects[0]
            raise PathDependenceError(
                f"bracket sums are path-dependent: plaquette at {p} "
                f"(axes {i},{j}) gives {side_i} vs {side_j}",
                plaquette=(p, i, j),
                sides=(side_i, side_j),
            )


def grad(config: Configuration, frm: Site, to: Site) -> int:
    """Bracket path sum from `frm` to `to` inside the window.

    Path-independent for every supported modulus; for ``r = 4`` the
    plaquette identity is verified first.
    """
    window = config.window
    if frm not in window or to not in window:
        raise ValueError("both sites must lie in the window")
    require_valid(config, "xr" if config.r != 4 else "x4")
    _check_liftable(config)
    # L-shaped path; boxes are axis-convex so it stays inside.
    total = 0
    cur = list(frm)
    for axis in range(window.d):
        step = 1 if to[axis] > cur[axis] else -1
        while cur[axis] != to[axis]:
            prev = tuple(cur)
            cur[axis] += step
            nxt = tuple(cur)
            if nxt not in window:
                raise ValueError("path leaves the window")  # unreachable for boxes
            total += bracket(config[nxt], config[prev], config.r)
    return total


@dataclass(frozen=True)
class HeightFunction:
    """Integer lift of a configuration on a box window."""

    window: Window
    r: int
    values: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.window.site_count:
            raise ValueError("value count does not match window")
        for n in self.window.sites():
            for j in range(1, self.window.d + 1):
                m = site_add(n, unit_vector(self.window.d, j))
                if m in self.window:
                    if abs(self[n] - self[m]) != 1:
                        raise ValueError(
                            f"heights at {n} and {m} differ by "
                            f"{self[m] - self[n]}, expected +-1"
                        )

    def __getitem__(self, site: Site) -> int:
        return self.values[self.window.index(site)]

    def as_dict(self) -> Dict[Site, int]:
        return {n: self.values[i] for i, n in enumerate(self.window.sites())}

    def residues(self) -> Configuration:
        return Configuration(
            self.window, self.r, tuple(v % self.r for v in self.values)
        )

    def shift_values(self, c: int) -> "HeightFunction":
        return HeightFunction(self.window, self.r, tuple(v + c for v in self.values))

    def to_json_dict(self) -> dict:
        base = min(self.window.sites())
        data = self.residues().to_json_dict()
        data["base"] = list(base)
        data["base_value"] = self[base]
        return data

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "HeightFunction":
        config = Configuration.from_json_dict(data)
        return lift(config, tuple(data["base"]), int(data["base_value"]))


def lift(config: Configuration, base: Site, base_value: int) -> HeightFunction:
    """Lift a valid configuration to heights with the given anchor."""
    window = config.window
    if base not in window:
        raise ValueError("base site outside window")
    require_valid(config, "xr" if config.r != 4 else "x4")
    _check_liftable(config)
    if (base_value - config[base]) % config.r != 0:
        raise ValueError(
            f"base value {base_value} incongruent to residue {config[base]} "
            f"mod {config.r}"
        )
    values: Dict[Site, int] = {base: base_value}
    stack = [base]
    while stack:
        n = stack.pop()
        for m in neighbors(n):
            if m in window and m not in values:
                values[m] = values[n] + bracket(config[m], config[n], config.r)
                stack.append(m)
    return HeightFunction(
        window, config.r, tuple(values[n] for n in window.sites())
    )


def lift_pair(pair: HomoclinicPair) -> Tuple[HeightFunction, HeightFunction]:
    """Lift both members from a common collar anchor.

    The shared anchor pins the two lifts together outside the difference
    region, so their pointwise gap is supported near ``pair.diff`` and is
    even everywhere.
    """
    base = min(pair.x.window.collar_sites(1))
    base_value = pair.x[base]
    hx = lift(pair.x, base, base_value)
    hy = lift(pair.y, base, base_value)
    return hx, hy


@dataclass(frozen=True)
class RangeReport:
    max: int
    min: int
    range: int
    argmax: Site
    argmin: Site

    def to_json_dict(self) -> dict:
        return {
            "max": self.max,
            "min": self.min,
            "range": self.range,
            "argmax": list(self.argmax),
            "argmin": list(self.argmin),
        }


def range_over(heights, sites: Iterable[Site]) -> RangeReport:
    """Max/min/range of a height assignment over a site set.

    `heights` is a :class:`HeightFunction` or a site->int mapping.
    """
    get = heights.__getitem__
    sites = sorted(sites)
    if not sites:
        raise ValueError("empty site set")
    top = max(get(n) for n in sites)
    bot = min(get(n) for n in sites)
    argmax = next(n for n in sites if get(n) == top)
    argmin = next(n for n in sites if get(n) == bot)
    return RangeReport(top, bot, top - bot, argmax, argmin)


# ---------------------------------------------------------------------------
# maximal heights
# ---------------------------------------------------------------------------

def max_height(boundary_heights: Mapping[Site, int],
               region: Iterable[Site]) -> Dict[Site, int]:
    """Pointwise maximal height extension of boundary data over `region`.

    Uses the closed formula ``h_n = min over boundary k of (h_k + |n-k|_1)``
    and verifies the result is a genuine height function agreeing with the
    input; otherwise the boundary data admits no extension at all and an
    infeasibility error is raised.  Returns heights on region + boundary.
    """
    region = frozenset(region)
    bdry = boundary(region)
    missing = bdry - set(boundary_heights)
    if missing:
        raise ValueError(f"boundary height missing at {sorted(missing)[0]}")
    out: Dict[Site, int] = {k: int(boundary_heights[k]) for k in bdry}
    for n in region:
        out[n] = min(out[k] + l1norm(site_sub(n, k)) for k in bdry)
    for n in region | bdry:
        for m in neighbors(n):
            if m in out and abs(out[n] - out[m]) != 1:
                raise InfeasibleBoundaryError(
                    f"boundary data admits no height extension: "
                    f"formula gives {out[n]} at {n} next to {out[m]} at {m}"
                )
    return out


# ---------------------------------------------------------------------------
# range surgery
# ---------------------------------------------------------------------------

def _move_extremes(values: Dict[Site, int], movable: Set[Site],
                   scope: Set[Site], lo: int, hi: int) -> None:
    """Push movable sites into [lo, hi] by repeated extremal +-2 moves.

    `scope` is the region over which extremality is judged; a movable site
    at the scope-wide max (min) has all lattice neighbors inside the scope
    one below (above), so the move keeps a valid height function.  Ties
    break to the lexicographically smallest site, maxima before minima.
    Requires hi - lo >= 1; terminates because the total deviation from
    [lo, hi] drops each step.
    """
    if hi - lo < 1:
        raise ValueError("band too narrow")
    while True:
        top = max(values[n] for n in scope)
        if top > hi:
            cands = sorted(n for n in movable if values[n] == top)
            if cands:
                values[cands[0]] -= 2
                continue
        bot = min(values[n] for n in scope)
        if bot < lo:
            cands = sorted(n for n in movable if values[n] == bot)
            if cands:
                values[cands[0]] += 2
                continue
        break


def _clamp_region(values: Dict[Site, int], movable: Set[Site],
                  scope: Set[Site], lo: int, hi: int) -> None:
    """Like `_move_extremes` but with the band widened to odd parities.

    With a flat target (hi == lo) the band becomes [lo-1, lo+1] so that
    sites of the opposite parity have somewhere to go.
    """
    if hi == lo:
        lo, hi = lo - 1, lo + 1
    _move_extremes(values, movable, scope, lo, hi)


def steep_to_flat(hf: HeightFunction, region: Iterable[Site]) -> HeightFunction:
    """Flatten the interior of `region` below its boundary range.

    Returns a height function equal to `hf` outside `region` whose range
    over the region is exactly two less than the boundary range.  Requires
    boundary range > 2 (two less than that is the best possible, since the
    region holds both site parities).
    """
    region = frozenset(region)
    bdry = boundary(region)
    window = hf.window
    if not window.contains_sites(region | bdry):
        raise ValueError("region and its boundary must lie inside the window")
    rng = range_over(hf, bdry)
    if rng.range <= 2:
        raise PreconditionError(
            f"boundary range is {rng.range}, must exceed 2"
        )
    values = hf.as_dict()
    _move_extremes(values, set(region), region | bdry, rng.min + 1, rng.max - 1)
    out = HeightFunction(
        window, hf.r, tuple(values[n] for n in window.sites())
    )
    achieved = range_over(out, region)
    if achieved.range != rng.range - 2:  # pragma: no cover - safety net
        raise AssertionError("flattening did not reach the target range")
    return out


def flat_extension(hf: HeightFunction, inner_radius: int) -> Dict[Site, int]:
    """Taper boundary oscillation to a flat outermost ring.

    With ``2M`` the height range over the sphere of radius ``inner_radius+1``
    (the boundary of the l1-ball ``D_inner``), returns heights on the ball of
    radius ``inner_radius + 1 + M`` equal to `hf` on the ball of radius
    ``inner_radius + 1``, with the range over the sphere at radius
    ``inner_radius + 1 + k`` equal to ``2M - 2k``.  The outermost ring ends
    up constant, so the result extends to the whole lattice by alternating
    two values.  Returned as a site->height mapping (the support is a ball,
    not a box).
    """
    d = hf.window.d
    rng = range_over(hf, l1_sphere(inner_radius + 1, d))
    if rng.range % 2 != 0:  # pragma: no cover - parity guarantees even
        raise AssertionError("sphere range must be even")
    m_steps = rng.range // 2
    outer = inner_radius + 1 + m_steps
    ball = l1_ball(outer, d)
    if not hf.window.contains_sites(ball):
        raise ValueError(
            f"window must contain the l1-ball of radius {outer}"
        )
    values = {n: hf[n] for n in ball}
    for k in range(m_steps):
        cur = inner_radius + k
        shell = l1_sphere(cur + 1, d)
        scope = {n for n in ball if l1norm(n) > cur}
        movable = {n for n in scope if l1norm(n) >= cur + 2}
        srng = range_over(values, shell)
        _clamp_region(values, movable, scope, srng.min, srng.max)
    return values


# ---------------------------------------------------------------------------
# patching
# ---------------------------------------------------------------------------

def _greedy_ball_extension(values: Dict[Site, int], have_radius: int,
                           want_radius: int, d: int) -> None:
    """Extend heights shell by shell; each new site gets 1 + min of its
    assigned neighbors (always consistent: those neighbors pairwise differ
    by at most 2)."""
    for rad in range(have_radius + 1, want_radius + 1):
        for n in sorted(l1_sphere(rad, d)):
            nbrs = [values[m] for m in neighbors(n) if m in values]
            values[n] = 1 + min(nbrs)


def patch(x: Configuration, y: Configuration, inner: int,
          range_budget: int) -> Configuration:
    """Splice ``x``'s pattern on the ball D_inner into the configuration `y`.

    Requires ``r`` outside {1, 2, 4}, ``inner >= 1``, `x` valid on a window
    containing D_{inner+1}, and `y` valid on a window containing
    D_{2*inner + 2r + range_budget + 2} whose lift has range at most
    ``2 * range_budget`` over the sphere bounding D_{2*inner+2r+range_budget+1}.

    The output agrees with `y` outside that ball.  On D_inner it equals `x`
    when r is odd or the sitewise parity of x - y is even, and the e_1
    translate of `x` otherwise (for even r the residues carry the site
    parity, so splicing odd-parity data needs the one-step shift).
    """
    r = x.r
    if r != y.r:
        raise ValueError("moduli differ")
    if r in (1, 2, 4):
        raise UnsupportedModelError(f"patching is not defined for r={r}")
    if inner < 1:
        raise ValueError("inner radius must be at least 1")
    d = y.window.d
    k = range_budget
    if k < 1:
        raise ValueError("range budget must be at least 1")
    big = 2 * inner + 2 * r + k + 1
    if not y.window.contains_sites(l1_ball(big + 1, d)):
        raise ValueError(f"y's window must contain the l1-ball of radius {big + 1}")
    if not x.window.contains_sites(l1_ball(inner + 1, d)):
        raise ValueError(
            f"x's window must contain the l1-ball of radius {inner + 1}"
        )
    require_valid(y, "xr")
    require_valid(x, "xr")

    base = min(y.window.sites())
    hy = lift(y, base, y[base])
    yvals = hy.as_dict()
    measured = range_over(yvals, l1_sphere(big + 1, d)).range
    if measured > 2 * k:
        raise PreconditionError(
            f"range {measured} over the sphere of radius {big + 1} exceeds "
            f"the budget {2 * k}"
        )

    # decide the case: for even r the sitewise parity of x - y is constant
    case_shift = False
    if r % 2 == 0:
        origin = (0,) * d
        if (x[origin] - y[origin]) % 2 == 1:
            case_shift = True
    if case_shift:
        e1 = unit_vector(d, 1)
        needed = [site_add(n, e1) for n in l1_ball(inner + 1, d)]
        if not x.window.contains_sites(needed):
            raise ValueError(
                "shifted splice (even r, odd parity) needs x on the e_1 "
                "translate of the ball as well"
            )

        def x_get(n: Site) -> int:
            return x[site_add(n, e1)]
    else:

        def x_get(n: Site) -> int:
            return x[n]

    # flatten y inward: shells D_big, D_{big-1}, ..., D_{big-k+2}, lowering
    # the sphere range by 2 per step until it is at most 2
    for step in range(k - 1):
        rad = big - step
        shell = l1_sphere(rad + 1, d)
        ball = l1_ball(rad, d)
        srng = range_over(yvals, shell)
        if srng.range > 2:
            _move_extremes(yvals, set(ball), ball | shell,
                           srng.min + 1, srng.max - 1)
        else:
            _clamp_region(yvals, set(ball), ball | shell, srng.min, srng.max)
    calm = 2 * inner + 2 * r + 2
    ring_rng = range_over(yvals, l1_sphere(calm + 1, d))
    if ring_rng.range > 2:  # pragma: no cover - flattening guarantees this
        raise AssertionError("inward flattening failed")
    c = yvals[ring_rng.argmin] % r
    dd = yvals[ring_rng.argmax] % r
    a = next(
        s for s in range(r)
        if (s - c) % r in (1, r - 1) and (s - dd) % r in (1, r - 1)
    )

    # x side: lift on D_{inner+1} and taper so a constant-height ring forms
    # at radius inner + M with M = half the range over S_inner; since the
    # range over a sphere of radius inner is at most 2*inner, the ring lands
    # inside S_{2*inner}
    small_hull = l1_ball(inner + 1, d)
    xvals: Dict[Site, int] = {}
    origin = (0,) * d
    xvals[origin] = x_get(origin)
    stack = [origin]
    while stack:
        n = stack.pop()
        for m in neighbors(n):
            if m in small_hull and m not in xvals:
                xvals[m] = xvals[n] + bracket(x_get(m), x_get(n), r)
                stack.append(m)
    m_x = range_over(xvals, l1_sphere(inner, d)).range // 2
    rho_x = inner + m_x  # flat ring radius after tapering
    if m_x >= 1:
        if rho_x > inner + 1:
            _greedy_ball_extension(xvals, inner + 1, rho_x, d)
        hull = Window.l1_ball_hull(rho_x, d)
        box_vals = dict(xvals)
        for n in sorted(hull.sites(), key=lambda s: (l1norm(s), s)):
            if n not in box_vals:
                nbrs = [box_vals[m] for m in neighbors(n) if m in box_vals]
                box_vals[n] = 1 + min(nbrs)
        hf = HeightFunction(hull, r, tuple(box_vals[n] for n in hull.sites()))
        xvals = dict(flat_extension(hf, inner - 1))
    flat_value = xvals[min(l1_sphere(rho_x, d))]
    if rho_x < 2 * inner:
        # alternate heights outward so every shell is constant
        for rad in range(rho_x + 1, 2 * inner + 1):
            level = flat_value + (rad - rho_x) % 2
            for n in l1_sphere(rad, d):
                xvals[n] = level
    b = (flat_value + (2 * inner - rho_x) % 2) % r

    # marching bands: residues +1 per shell from S_{2*inner} out to the
    # meeting ring, then -1 per shell out to S_{2*inner+2r} landing on `a`;
    # the meeting offset solves b - 2*offset = a mod r, which has a solution
    # exactly in the cases admitted above
    offset = next(t for t in range(r) if (b - 2 * t) % r == a % r)
    meet = 2 * inner + r - offset

    out: Dict[Site, int] = {}
    for n in y.window.sites():
        nn = l1norm(n)
        if nn <= 2 * inner:
            out[n] = xvals[n] % r
        elif nn <= meet:
            out[n] = (b + (nn - 2 * inner)) % r
        elif nn <= 2 * inner + 2 * r:
            out[n] = (b + (meet - 2 * inner) - (nn - meet)) % r
        elif nn <= calm:
            out[n] = a if nn % 2 == calm % 2 else c
        else:
            out[n] = yvals[n] % r
    z = Configuration.from_values(y.window, r, out)
    require_valid(z, "xr")  # construction invariant; cheap insurance
    return z


# ---------------------------------------------------------------------------
# random fields (test/demo plumbing)
# ---------------------------------------------------------------------------

def random_height_function(window: Window, rng: random.Random,
                           r: int = 3) -> HeightFunction:
    """Uniform-ish random height function via sequential +-1 choices."""
    values: Dict[Site, int] = {}
    for n in window.sites():
        prev = [
            values[site_sub(n, unit_vector(window.d, j))]
            for j in range(1, window.d + 1)
            if site_sub(n, unit_vector(window.d, j)) in values
        ]
        if not prev:
            values[n] = 0
        elif min(prev) == max(prev):
            values[n] = prev[0] + rng.choice((1, -1))
        else:
            values[n] = (min(prev) + max(prev)) // 2
    return HeightFunction(window, r, tuple(values[n] for n in window.sites()))


def random_configuration(window: Window, r: int,
                         rng: random.Random) -> Configuration:
    """Random member of the r-residue model on the window."""
    if r in (1, 4):
        raise UnsupportedModelError("no generic sampler for r in {1,4}")
    return random_height_function(window, rng, r).residues()
