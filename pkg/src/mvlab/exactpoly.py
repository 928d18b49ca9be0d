"""Exact rational polynomial arithmetic and symbolic residuals.

For a univariate polynomial p and a weight 0 < lambda < 1, the residual

    R(a, b) = p(b) - p(a) - (b - a) * p'(lambda*a + (1-lambda)*b)

is itself a polynomial in the two interval endpoints.  Expanding it with
exact rational arithmetic decides *identically* whether the weighted
average of the endpoints serves as a mean value abscissa on every
interval: R == 0 is a proof, not a numerical observation.

The monomial family solver handles the fixed-left-endpoint variant: for
f(x) = x^(k+1) on [0, b], the abscissa sits at c = b * (k+1)^(-1/k) for
every b, and two different lambda conventions can describe that point
(see `lambda_family`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Union

import mpmath

__all__ = [
    "Rational",
    "RationalPolynomial",
    "BivariatePolynomial",
    "MvtResidual",
    "PolyVerdict",
    "LambdaFamily",
    "poly_from_coeffs",
    "mvt_residual",
    "classify",
    "lambda_family",
    "MAX_DEGREE",
]

Rational = Fraction
RationalLike = Union[Fraction, int, str]

MAX_DEGREE = 64  # bivariate expansion is O(d^2) terms; keep it desk-scale


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class RationalPolynomial:
    """Dense univariate polynomial over Fraction, lowest degree first.

    Canonical form: trailing zero coefficients stripped; the zero
    polynomial has an empty coefficient tuple and degree None.
    """

    coeffs: tuple[Fraction, ...]

    @property
    def degree(self) -> int | None:
        return len(self.coeffs) - 1 if self.coeffs else None

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def derivative(self) -> "RationalPolynomial":
        return poly_from_coeffs(
            [k * c for k, c in enumerate(self.coeffs)][1:] or [0]
        )

    def __call__(self, x: RationalLike) -> Fraction:
        x = _as_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return poly_from_coeffs(
            [self.coefficient(k) + other.coefficient(k) for k in range(n)] or [0]
        )

    def scale(self, factor: RationalLike) -> "RationalPolynomial":
        factor = _as_fraction(factor)
        return poly_from_coeffs([c * factor for c in self.coeffs] or [0])

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            term = "1" if (c == 1 and k > 0) else str(c)
            if k == 1:
                term = f"{term}*x" if term != "1" else "x"
            elif k > 1:
                term = f"{term}*x^{k}" if term != "1" else f"x^{k}"
            parts.append(term)
        return " + ".join(parts).replace("+ -", "- ")


def poly_from_coeffs(coeffs: Iterable[RationalLike]) -> RationalPolynomial:
    """Canonical polynomial sum(coeffs[i] * x^i) from any rational-like list."""
    cs = [_as_fraction(c) for c in coeffs]
    if not cs:
        raise ValueError("coefficient list must be nonempty")
    while cs and cs[-1] == 0:
        cs.pop()
    return RationalPolynomial(tuple(cs))


@dataclass(frozen=True)
class BivariatePolynomial:
    """Polynomial in formal endpoint variables a, b: (i, j) -> coeff of a^i b^j."""

    terms: Mapping[tuple[int, int], Fraction]

    @staticmethod
    def from_terms(raw: Mapping[tuple[int, int], Fraction]) -> "BivariatePolynomial":
        return BivariatePolynomial({k: v for k, v in raw.items() if v != 0})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def evaluate(self, a: RationalLike, b: RationalLike) -> Fraction:
        a = _as_fraction(a)
        b = _as_fraction(b)
        return sum(
            (c * a**i * b**j for (i, j), c in self.terms.items()), Fraction(0)
        )

    def eval_float(self, a: float, b: float) -> float:
        return float(
            sum(float(c) * a**i * b**j for (i, j), c in self.terms.items())
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def as_power_of_difference(self) -> tuple[Fraction, int] | None:
        """If the polynomial is exactly gamma * (b - a)^d, return (gamma, d)."""
        if self.is_zero:
            return None
        d = max(i + j for i, j in self.terms)
        gamma = self.coefficient(0, d)
        if gamma == 0:
            return None
        expected = {
            (i, d - i): gamma * comb(d, i) * (-1) ** i for i in range(d + 1)
        }
        return (gamma, d) if dict(self.terms) == expected else None

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        power = self.as_power_of_difference()
        if power is not None:
            gamma, d = power
            suffix = "" if d == 1 else f"^{d}"
            return f"({gamma})*(b-a){suffix}"
        parts = []
        for (i, j), c in sorted(
            self.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), kv[0])
        ):
            factors = [str(c)]
            if i:
                factors.append("a" if i == 1 else f"a^{i}")
            if j:
                factors.append("b" if j == 1 else f"b^{j}")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class MvtResidual:
    residual: BivariatePolynomial
    is_identically_zero: bool


@dataclass(frozen=True)
class PolyVerdict:
    satisfies: bool
    residual: MvtResidual
    degree: int | None
    lam: Fraction


def _weighted_point_power(lam: Fraction, m: int) -> dict[tuple[int, int], Fraction]:
    """(lam*a + (1-lam)*b)^m expanded into a^i b^(m-i) terms."""
    mu = 1 - lam
    return {
        (i, m - i): comb(m, i) * lam**i * mu ** (m - i) for i in range(m + 1)
    }


def mvt_residual(p: RationalPolynomial, lam: RationalLike) -> MvtResidual:
    """Exact expansion of p(b) - p(a) - (b-a) * p'(lam*a + (1-lam)*b).

    The result vanishes identically iff the lam-weighted endpoint average
    is a mean value abscissa of p on *every* interval (a polynomial
    identity, so the a < b restriction is immaterial).
    """
    lam = _as_fraction(lam)
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if p.degree is not None and p.degree > MAX_DEGREE:
        raise ValueError(f"degree {p.degree} exceeds expansion cap {MAX_DEGREE}")

    terms: dict[tuple[int, int], Fraction] = {}

    def add(key: tuple[int, int], value: Fraction) -> None:
        terms[key] = terms.get(key, Fraction(0)) + value

    for k, c in enumerate(p.coeffs):
        if c != 0 and k > 0:  # p(b) - p(a); constant terms cancel
            add((0, k), c)
            add((k, 0), -c)
    dp = p.derivative()
    for m, d in enumerate(dp.coeffs):
        if d == 0:
            continue
        for (i, j), t in _weighted_point_power(lam, m).items():
            add((i, j + 1), -d * t)  # times -b
            add((i + 1, j), d * t)  # times +a
    residual = BivariatePolynomial.from_terms(terms)
    return MvtResidual(residual, residual.is_zero)


def classify(p: RationalPolynomial, lam: RationalLike) -> PolyVerdict:
    """satisfies <=> the residual is identically zero (exact decision)."""
    lam = _as_fraction(lam)
    res = mvt_residual(p, lam)
    return PolyVerdict(res.is_identically_zero, res, p.degree, lam)


@dataclass(frozen=True)
class LambdaFamily:
    """Fixed-left-endpoint solution for f(x) = x^(k+1) on [0, b].

    ratio is c/b = (k+1)^(-1/k), independent of b.  Two conventions can
    express the same point as a weight and they differ for k >= 2, so
    both are reported rather than silently picking one:

    - lambda_abscissa_fraction: lambda read directly as c/b (= ratio);
    - lambda_left_weight: lambda in c = lambda*a + (1-lambda)*b with
      a = 0, i.e. 1 - ratio.

    residual_check is max over b in {1/2, 1, 2, 5} of
    |(f(b) - f(0))/b - f'(ratio*b)|, evaluated in 60-digit arithmetic so
    the identity can be verified to 1e-12 absolute even at b^k ~ 1e14.
    """

    k: int
    ratio: float
    lambda_left_weight: float
    lambda_abscissa_fraction: float
    residual_check: float


def lambda_family(k: int) -> LambdaFamily:
    if not 1 <= k <= 20:
        raise ValueError(f"k must be in 1..20, got {k}")
    with mpmath.workdps(60):
        kk = mpmath.mpf(k)
        ratio = mpmath.power(k + 1, -1 / kk)
        worst = mpmath.mpf(0)
        for b in (mpmath.mpf(1) / 2, mpmath.mpf(1), mpmath.mpf(2), mpmath.mpf(5)):
            secant = (b ** (k + 1) - 0) / b
            slope_at_c = (k + 1) * (ratio * b) ** k
            worst = max(worst, abs(secant - slope_at_c))
        return LambdaFamily(
            k=k,
            ratio=float(ratio),
            lambda_left_weight=float(1 - ratio),
            lambda_abscissa_fraction=float(ratio),
            residual_check=float(worst),
        )
