"""Lattice windows, configurations, edge-constraint models, homoclinic pairs.

Conventions used throughout the package:

* a *site* is a tuple of ``d`` integers; ``e_j`` is the unit vector along
  axis ``j`` (1-based);
* adjacency is l1-distance 1 (the standard hypercubic lattice);
* a :class:`Window` is an axis-aligned box; every other region is an
  explicit set of sites;
* cell storage is row-major with the last axis fastest, so for ``d = 2``
  the first axis indexes rows.

The residue models: ``"xr"`` keeps every lattice edge difference at
``+-1 mod r`` (supported for ``r`` other than 1 and 4); ``"x4"`` adds the
plaquette bracket identity that restores path-independent lifting for
``r = 4``; ``"coloring"`` asks adjacent cells to differ.  Arbitrary
nearest-neighbor constraints are expressed as an :class:`EdgeSFT`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Sequence, Tuple, Union

from .errors import (
    InvalidConfigurationError,
    NotHomoclinicError,
    UnsupportedModelError,
)

Site = Tuple[int, ...]


# ---------------------------------------------------------------------------
# sites and site sets
# ---------------------------------------------------------------------------

def l1norm(n: Site) -> int:
    return sum(abs(c) for c in n)


def unit_vector(d: int, axis: int, sign: int = 1) -> Site:
    """Unit vector along 1-based `axis` in dimension `d`."""
    if not 1 <= axis <= d:
        raise ValueError(f"axis {axis} out of range for d={d}")
    return tuple(sign if i == axis - 1 else 0 for i in range(d))


def site_add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def site_sub(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def neighbors(n: Site) -> Iterator[Site]:
    """The 2d sites at l1-distance 1 from `n`."""
    for i in range(len(n)):
        for s in (1, -1):
            yield tuple(c + s if i == j else c for j, c in enumerate(n))


def l1_ball(radius: int, d: int = 2) -> FrozenSet[Site]:
    """Sites with l1-norm at most `radius`, centered at the origin."""
    if radius < 0:
        return frozenset()
    out = []
    for n in product(range(-radius, radius + 1), repeat=d):
        if l1norm(n) <= radius:
            out.append(n)
    return frozenset(out)


def l1_sphere(radius: int, d: int = 2) -> FrozenSet[Site]:
    """Sites with l1-norm exactly `radius`."""
    if radius < 0:
        return frozenset()
    if radius == 0:
        return frozenset({(0,) * d})
    out = []
    for n in product(range(-radius, radius + 1), repeat=d):
        if l1norm(n) == radius:
            out.append(n)
    return frozenset(out)


def boundary(sites: Iterable[Site]) -> FrozenSet[Site]:
    """Outer boundary: sites outside the set adjacent to it.

    Disjoint from the input by construction; the empty set has empty
    boundary.
    """
    sites = frozenset(sites)
    out = set()
    for n in sites:
        for m in neighbors(n):
            if m not in sites:
                out.add(m)
    return frozenset(out)


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Axis-aligned box of lattice sites.

    ``dims`` entries may be zero only to represent the empty region used by
    pattern enumeration; all constructors below produce positive dims.
    """

    offset: Site
    dims: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(int(c) for c in self.offset))
        object.__setattr__(self, "dims", tuple(int(c) for c in self.dims))
        if len(self.offset) != len(self.dims):
            raise ValueError("offset and dims must have equal length")
        if any(s < 0 for s in self.dims):
            raise ValueError("dims must be nonnegative")

    @classmethod
    def centered(cls, dims: Sequence[int]) -> "Window":
        """Box with the given dims placed symmetrically around the origin."""
        return cls(tuple(-(s // 2) for s in dims), tuple(dims))

    @classmethod
    def linf_ball(cls, radius: int, d: int = 2) -> "Window":
        """The box ``[-radius, radius]^d`` (sites with sup-norm <= radius)."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        return cls((-radius,) * d, (2 * radius + 1,) * d)

    @classmethod
    def l1_ball_hull(cls, radius: int, d: int = 2) -> "Window":
        """Smallest box containing the l1-ball of the given radius.

        The ball itself is a site set (`l1_ball`), not a box.
        """
        return cls.linf_ball(radius, d)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def site_count(self) -> int:
        total = 1
        for s in self.dims:
            total *= s
        return total

    def sites(self) -> Iterator[Site]:
        """Row-major iteration (last axis fastest)."""
        ranges = [range(o, o + s) for o, s in zip(self.offset, self.dims)]
        return product(*ranges)

    def __contains__(self, site: Site) -> bool:
        return all(o <= c < o + s for c, o, s in zip(site, self.offset, self.dims))

    def index(self, site: Site) -> int:
        if site not in self:
            raise KeyError(f"site {site} outside window")
        idx = 0
        for c, o, s in zip(site, self.offset, self.dims):
            idx = idx * s + (c - o)
        return idx

    def contains_sites(self, sites: Iterable[Site]) -> bool:
        return all(s in self for s in sites)

    def expand(self, width: int) -> "Window":
        return Window(
            tuple(o - width for o in self.offset),
            tuple(s + 2 * width for s in self.dims),
        )

    def interior_sites(self, width: int = 1) -> FrozenSet[Site]:
        """Sites at l-infinity distance >= `width` from the complement."""
        ranges = [
            range(o + width, o + s - width) for o, s in zip(self.offset, self.dims)
        ]
        if any(len(r) == 0 for r in ranges):
            return frozenset()
        return frozenset(product(*ranges))

    def collar_sites(self, width: int = 1) -> FrozenSet[Site]:
        """Window sites within distance `width` of the complement."""
        return frozenset(self.sites()) - self.interior_sites(width)

    def boundary_sites(self) -> FrozenSet[Site]:
        """Outer boundary of the whole box (no corner sites)."""
        return boundary(self.sites())

    def to_json_dict(self) -> dict:
        return {"offset": list(self.offset), "dims": list(self.dims)}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Window":
        return cls(tuple(data["offset"]), tuple(data["dims"]))


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    """Residues mod r on a window, row-major."""

    window: Window
    r: int
    cells: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if len(self.cells) != self.window.site_count:
            raise ValueError(
                f"expected {self.window.site_count} cells, got {len(self.cells)}"
            )
        if any(not 0 <= c < self.r for c in self.cells):
            raise ValueError(f"cells must lie in [0, {self.r})")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], r: int,
                  offset: Site = None) -> "Configuration":
        """Build a d=2 configuration from a list of rows (axis 1 = row)."""
        dims = (len(rows), len(rows[0]))
        if any(len(row) != dims[1] for row in rows):
            raise ValueError("ragged rows")
        if offset is None:
            offset = (0, 0)
        cells = tuple(v for row in rows for v in row)
        return cls(Window(tuple(offset), dims), r, cells)

    @classmethod
    def from_values(cls, window: Window, r: int,
                    values: Mapping[Site, int]) -> "Configuration":
        return cls(window, r, tuple(values[n] for n in window.sites()))

    def __getitem__(self, site: Site) -> int:
        return self.cells[self.window.index(site)]

    def values(self) -> Dict[Site, int]:
        return {n: self.cells[i] for i, n in enumerate(self.window.sites())}

    def with_values(self, updates: Mapping[Site, int]) -> "Configuration":
        cells = list(self.cells)
        for site, value in updates.items():
            cells[self.window.index(site)] = value % self.r
        return Configuration(self.window, self.r, tuple(cells))

    def restrict(self, sub: Window) -> "Configuration":
        if not all(n in self.window for n in sub.sites()):
            raise ValueError("sub-window not contained in window")
        return Configuration(sub, self.r, tuple(self[n] for n in sub.sites()))

    def translate(self, vector: Site) -> "Configuration":
        """Shift the window by `vector`, keeping cell values attached."""
        return Configuration(
            Window(site_add(self.window.offset, vector), self.window.dims),
            self.r,
            self.cells,
        )

    def to_rows(self) -> list:
        if self.window.d != 2:
            raise ValueError("rows only defined for d=2")
        n_rows, n_cols = self.window.dims
        return [
            list(self.cells[i * n_cols:(i + 1) * n_cols]) for i in range(n_rows)
        ]

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "dims": list(self.window.dims),
            "offset": list(self.window.offset),
            "cells": list(self.cells),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Configuration":
        window = Window(tuple(data["offset"]), tuple(data["dims"]))
        return cls(window, int(data["r"]), tuple(data["cells"]))


def render_configuration(config: Configuration) -> str:
    """ASCII matrix of residues, rows along axis 1."""
    width = len(str(config.r - 1))
    return "\n".join(
        " ".join(f"{v:>{width}}" for v in row) for row in config.to_rows()
    )


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def bracket(a: int, b: int, r: int) -> int:
    """Signed unit difference of adjacent residues: [a - b].

    ``+1`` when ``a - b = 1 mod r``, ``-1`` when ``a - b = -1 mod r``.  For
    ``r = 2`` the two conditions coincide and the integer difference of the
    canonical residues decides the sign, which is the unique convention
    making bracket sums path-independent on the two chessboards.
    """
    if r == 2:
        diff = a - b
        if diff == 1:
            return 1
        if diff == -1:
            return -1
        raise ValueError(f"residues {a},{b} not adjacent mod 2")
    diff = (a - b) % r
    if diff == 1:
        return 1
    if diff == r - 1:
        return -1
    raise ValueError(f"residues {a},{b} not adjacent mod {r}")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    sites: Tuple[Site, ...]
    detail: str = ""
    data: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: Tuple[Violation, ...]

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {
                    "kind": v.kind,
                    "sites": [list(s) for s in v.sites],
                    "detail": v.detail,
                    "data": list(v.data),
                }
                for v in self.violations
            ],
        }


def _window_edges(window: Window) -> Iterator[Tuple[Site, Site, int]]:
    """Directed edges (n, n+e_j, j) with both endpoints inside the window."""
    d = window.d
    for n in window.sites():
        for j in range(1, d + 1):
            m = site_add(n, unit_vector(d, j))
            if m in window:
                yield n, m, j


def plaquette_defects(config: Configuration) -> list:
    """Plaquettes where the two bracket path sums disagree.

    Returns tuples ``(p, i, j, side_i, side_j)`` where ``side_i`` follows
    ``p -> p+e_i -> p+e_i+e_j`` and ``side_j`` the other way around.
    """
    window, r = config.window, config.r
    d = window.d
    defects = []
    for p in window.sites():
        for i in range(1, d + 1):
            for j in range(i + 1, d + 1):
                pi = site_add(p, unit_vector(d, i))
                pj = site_add(p, unit_vector(d, j))
                pij = site_add(pi, unit_vector(d, j))
                if not (pi in window and pj in window and pij in window):
                    continue
                side_i = bracket(config[p], config[pi], r) + bracket(
                    config[pi], config[pij], r
                )
                side_j = bracket(config[p], config[pj], r) + bracket(
                    config[pj], config[pij], r
                )
                if side_i != side_j:
                    defects.append((p, i, j, side_i, side_j))
    return defects


def validate(config: Configuration,
             model: Union[str, "EdgeSFT"] = "xr") -> ValidationReport:
    """Check a configuration against a nearest-neighbor model.

    `model` is ``"xr"``, ``"x4"``, ``"coloring"``, or an :class:`EdgeSFT`
    whose alphabet is a set of integers containing every cell value.  The
    report lists one entry per violated edge or plaquette.
    """
    violations = []
    if isinstance(model, EdgeSFT):
        symbols = set(model.alphabet)
        bad_cells = [n for n in config.window.sites() if config[n] not in symbols]
        for n in bad_cells:
            violations.append(Violation("symbol", (n,), "cell not in alphabet"))
        if not bad_cells:
            for n, m, j in _window_edges(config.window):
                if (config[n], config[m]) not in model.allowed[j - 1]:
                    violations.append(
                        Violation("edge", (n, m), f"pair not allowed along e_{j}")
                    )
        return ValidationReport(not violations, tuple(violations))

    if model == "coloring":
        for n, m, _ in _window_edges(config.window):
            if config[n] == config[m]:
                violations.append(Violation("edge", (n, m), "equal adjacent colors"))
        return ValidationReport(not violations, tuple(violations))

    if model == "xr":
        if config.r in (1, 4):
            raise UnsupportedModelError(
                f"r={config.r} is not an edge-constraint residue model; "
                "use the x4 mode for r=4"
            )
        for n, m, _ in _window_edges(config.window):
            if (config[n] - config[m]) % config.r not in (1, config.r - 1):
                violations.append(
                    Violation(
                        "edge",
                        (n, m),
                        f"difference {config[n]}-{config[m]} not +-1 mod {config.r}",
                    )
                )
        return ValidationReport(not violations, tuple(violations))

    if model == "x4":
        if config.r != 4:
            raise UnsupportedModelError("x4 mode requires r = 4")
        edge_ok = True
        for n, m, _ in _window_edges(config.window):
            if (config[n] - config[m]) % 4 not in (1, 3):
                edge_ok = False
                violations.append(
                    Violation("edge", (n, m), "difference not +-1 mod 4")
                )
        if edge_ok:
            for p, i, j, side_i, side_j in plaquette_defects(config):
                pi = site_add(p, unit_vector(config.window.d, i))
                pj = site_add(p, unit_vector(config.window.d, j))
                pij = site_add(pi, unit_vector(config.window.d, j))
                violations.append(
                    Violation(
                        "plaquette",
                        (p, pi, pij, pj),
                        f"bracket sums {side_i} vs {side_j} along e_{i}/e_{j}",
                        (side_i, side_j),
                    )
                )
        return ValidationReport(not violations, tuple(violations))

    raise UnsupportedModelError(f"unknown model {model!r}")


def require_valid(config: Configuration, model="xr") -> None:
    report = validate(config, model)
    if not report.ok:
        first = report.violations[0]
        raise InvalidConfigurationError(
            f"configuration invalid for {model if isinstance(model, str) else 'edge sft'}:"
            f" {first.kind} at {first.sites}: {first.detail}"
        )


# ---------------------------------------------------------------------------
# edge-constraint shifts of finite type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeSFT:
    """Nearest-neighbor constraints: per direction, the allowed ordered pairs.

    ``allowed[j-1]`` holds pairs ``(a, b)`` permitted on edges
    ``(n, n + e_j)``.
    """

    alphabet: tuple
    allowed: Tuple[FrozenSet[tuple], ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(
            self, "allowed", tuple(frozenset(pairs) for pairs in self.allowed)
        )
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")
        if not self.allowed or any(not pairs for pairs in self.allowed):
            raise ValueError("each direction needs a nonempty allowed set")
        symbols = set(self.alphabet)
        for pairs in self.allowed:
            for a, b in pairs:
                if a not in symbols or b not in symbols:
                    raise ValueError(f"pair ({a},{b}) uses unknown symbols")

    @property
    def d(self) -> int:
        return len(self.allowed)

    def edge_ok(self, j: int, a, b) -> bool:
        return (a, b) in self.allowed[j - 1]

    def to_json_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "allowed": {
                str(j + 1): sorted([list(p) for p in pairs])
                for j, pairs in enumerate(self.allowed)
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "EdgeSFT":
        alphabet = tuple(data["alphabet"])
        directions = sorted(int(j) for j in data["allowed"])
        allowed = tuple(
            frozenset(tuple(p) for p in data["allowed"][str(j)]) for j in directions
        )
        return cls(alphabet, allowed)


def xr_edge_sft(r: int, d: int = 2) -> EdgeSFT:
    """Edge constraints of the r-residue height model (r not in {1, 4})."""
    if r in (1, 4):
        raise UnsupportedModelError(
            "r=4 needs the plaquette condition and is not a pure edge SFT"
        )
    pairs = frozenset(
        (a, b) for a in range(r) for b in range(r) if (a - b) % r in (1, r - 1)
    )
    return EdgeSFT(tuple(range(r)), (pairs,) * d)


def coloring_edge_sft(n_colors: int, d: int = 2) -> EdgeSFT:
    """Proper-coloring constraints on the lattice."""
    if n_colors < 2:
        raise ValueError("need at least two colors")
    pairs = frozenset(
        (a, b) for a in range(n_colors) for b in range(n_colors) if a != b
    )
    return EdgeSFT(tuple(range(n_colors)), (pairs,) * d)


def full_shift_sft(alphabet: Sequence, d: int = 2) -> EdgeSFT:
    pairs = frozenset((a, b) for a in alphabet for b in alphabet)
    return EdgeSFT(tuple(alphabet), (pairs,) * d)


def is_safe_symbol(sft: EdgeSFT, symbol) -> bool:
    """Syntactic safe-symbol test.

    True when the symbol pairs with every alphabet letter (and itself) in
    both orders in every direction.  Sufficient for edge-constraint models;
    no claim is made beyond them.
    """
    if symbol not in sft.alphabet:
        raise ValueError(f"symbol {symbol!r} not in alphabet")
    for pairs in sft.allowed:
        for a in sft.alphabet:
            if (symbol, a) not in pairs or (a, symbol) not in pairs:
                return False
    return True


# ---------------------------------------------------------------------------
# homoclinic pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomoclinicPair:
    """Two configurations on one window agreeing on the width-1 collar.

    The collar agreement makes every cocycle evaluated on the window equal
    to its infinite-lattice value: all difference terms vanish outside.
    """

    x: Configuration
    y: Configuration
    diff: FrozenSet[Site]

    def reversed(self) -> "HomoclinicPair":
        return HomoclinicPair(self.y, self.x, self.diff)

    def translate(self, vector: Site) -> "HomoclinicPair":
        return HomoclinicPair(
            self.x.translate(vector),
            self.y.translate(vector),
            frozenset(site_add(n, vector) for n in self.diff),
        )

    def to_json_dict(self) -> dict:
        return {"x": self.x.to_json_dict(), "y": self.y.to_json_dict()}


def make_pair(x: Configuration, y: Configuration,
              model: Union[str, EdgeSFT] = "xr") -> HomoclinicPair:
    """Build a homoclinic pair, checking validity and collar agreement."""
    if x.window != y.window:
        raise ValueError("configurations live on different windows")
    if x.r != y.r:
        raise ValueError("configurations have different moduli")
    require_valid(x, model)
    require_valid(y, model)
    diff = frozenset(
        n for n in x.window.sites() if x[n] != y[n]
    )
    collar = x.window.collar_sites(1)
    bad = diff & collar
    if bad:
        raise NotHomoclinicError(
            f"configurations differ on the boundary collar at {sorted(bad)[0]}"
        )
    return HomoclinicPair(x, y, diff)
