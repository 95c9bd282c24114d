"""Crossing-count cocycles on homoclinic pairs of residue configurations.

For residue class ``i`` and integers ``a, b`` of equal parity, the crossing
count ``N_i(a, b)`` is the net number of integers congruent to ``i`` mod r
met by the step-2 walk from ``a`` to ``b``.  Summing ``N_i`` over the
pointwise gap between the paired lifts of a homoclinic pair gives the
basis values ``M_i``; every shift-invariant Markov cocycle on the model is
a unique linear combination of these, and the combination is a Gibbs
cocycle for a shift-invariant nearest-neighbor interaction exactly when
the coefficients sum to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .errors import UnsupportedModelError
from .heights import lift_pair
from .lattice import HomoclinicPair


def crossing_count(i: int, a: int, b: int, r: int) -> int:
    """Net crossings of the class ``i mod r`` on the step-2 walk a -> b."""
    if r < 2:
        raise ValueError("r must be at least 2")
    if (a - b) % 2 != 0:
        raise ValueError(f"endpoints {a},{b} differ in parity")
    if a > b:
        return -crossing_count(i, b, a, r)
    count = 0
    for m in range(a, b, 2):
        if (m - i) % r == 0:
            count += 1
    return count


@dataclass(frozen=True)
class Alphas:
    """Coefficients of a shift-invariant Markov cocycle in the M_i basis.

    Coefficients may be ints, Fractions, or floats; exact inputs keep every
    downstream evaluation exact.
    """

    r: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if len(self.coeffs) != self.r:
            raise ValueError(f"expected {self.r} coefficients, got {len(self.coeffs)}")

    def total(self):
        return sum(self.coeffs)

    def to_json_dict(self) -> dict:
        return {"r": self.r, "coeffs": [_num_to_json(c) for c in self.coeffs]}

    @classmethod
    def from_json_dict(cls, data) -> "Alphas":
        return cls(int(data["r"]), tuple(_num_from_json(c) for c in data["coeffs"]))


def _num_to_json(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def _num_from_json(value):
    if isinstance(value, str):
        return Fraction(value)
    return value


@dataclass(frozen=True)
class CocycleReport:
    """Basis values of one homoclinic pair, plus the height-sum value."""

    basis_values: Tuple[int, ...]
    hat_value: int
    value: Optional[object] = None

    def __post_init__(self):
        if self.hat_value != 2 * sum(self.basis_values):
            raise ValueError("hat value must equal twice the basis sum")

    def to_json_dict(self) -> dict:
        return {
            "basis_values": list(self.basis_values),
            "hat_value": self.hat_value,
            "value": _num_to_json(self.value) if self.value is not None else None,
        }


def basis_eval(pair: HomoclinicPair) -> CocycleReport:
    """Basis values M_i and the height-sum value for one pair.

    Independent of the lift choice since crossing counts are invariant
    under a common shift by a multiple of r.
    """
    r = pair.x.r
    if r in (1, 2, 4):
        raise UnsupportedModelError(f"cocycle basis requires r outside {{1,2,4}}, got {r}")
    hx, hy = lift_pair(pair)
    basis = [0] * r
    hat = 0
    for idx, n in enumerate(pair.x.window.sites()):
        a, b = hx.values[idx], hy.values[idx]
        if a == b:
            continue
        hat += b - a
        for i in range(r):
            basis[i] += crossing_count(i, a, b, r)
    return CocycleReport(tuple(basis), hat)


def evaluate(alphas: Alphas, pair: HomoclinicPair):
    """Value of the cocycle with the given coefficients on the pair.

    Exact (int/Fraction) whenever the coefficients are exact.
    """
    if alphas.r != pair.x.r:
        raise ValueError(f"coefficients are for r={alphas.r}, pair has r={pair.x.r}")
    report = basis_eval(pair)
    return sum(a * m for a, m in zip(alphas.coeffs, report.basis_values))


def full_report(alphas: Optional[Alphas], pair: HomoclinicPair) -> CocycleReport:
    """Basis report with the linear-combination value filled in."""
    report = basis_eval(pair)
    if alphas is None:
        return report
    if alphas.r != pair.x.r:
        raise ValueError(f"coefficients are for r={alphas.r}, pair has r={pair.x.r}")
    value = sum(a * m for a, m in zip(alphas.coeffs, report.basis_values))
    return CocycleReport(report.basis_values, report.hat_value, value)


@dataclass(frozen=True)
class Decomposition:
    """Split of a cocycle into a zero-sum part plus a height-sum multiple."""

    gibbs_part: Alphas
    hat_coefficient: object
    is_gibbs: bool

    def to_json_dict(self) -> dict:
        return {
            "gibbs_part": self.gibbs_part.to_json_dict(),
            "hat_coefficient": _num_to_json(self.hat_coefficient),
            "is_gibbs": self.is_gibbs,
        }


def decompose(alphas: Alphas) -> Decomposition:
    """Write the cocycle as zero-sum part + c times the height-sum cocycle.

    Since the height-sum cocycle has basis coordinates (2, ..., 2), the
    split ``alpha_i = beta_i + 2c`` with ``sum(beta) = 0`` forces
    ``c = sum(alpha) / (2r)``; it is unique.
    """
    total = alphas.total()
    exact = all(isinstance(c, (int, Fraction)) for c in alphas.coeffs)
    if exact:
        c = Fraction(total, 2 * alphas.r)
        mean = Fraction(total, alphas.r)
        if c.denominator == 1:
            c = int(c)
    else:
        c = total / (2 * alphas.r)
        mean = total / alphas.r
    beta = tuple(a - mean for a in alphas.coeffs)
    if exact:
        beta = tuple(int(b) if isinstance(b, Fraction) and b.denominator == 1 else b
                     for b in beta)
        is_gibbs = total == 0
    else:
        is_gibbs = abs(total) <= 1e-12
    return Decomposition(Alphas(alphas.r, beta), c, is_gibbs)
