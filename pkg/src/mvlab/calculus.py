"""Forward-mode derivatives of parsed expressions.

`Jet3` carries a value and its first three derivatives through arithmetic
(truncated Taylor algebra); `HyperDual` carries two independent
first-order perturbations and their mixed second-order term, which gives
exact second partials one axis at a time.  Components may be floats or
numpy arrays with elementwise semantics, so a whole grid of derivative
evaluations costs a single tree walk.

`abs` is not differentiable at 0: both types raise a domain error when an
`abs` argument is exactly 0 rather than silently picking a subgradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import expr
from .expr import Node, _DomainViolation

__all__ = [
    "Jet3",
    "HyperDual",
    "derivatives_1d",
    "first_derivative_many",
    "gradient",
    "laplacian",
    "directional_derivative",
]

_SCALARS = (int, float, np.floating)


def _frac_pow_checks(t: Any, p: float) -> None:
    if not p.is_integer():
        if np.any(np.asarray(t) <= 0):
            raise _DomainViolation("fractional power of a non-positive base")
    elif p < 0:
        if np.any(np.asarray(t) == 0):
            raise _DomainViolation("zero raised to a negative power")


def _pow_term(t: Any, coeff: float, q: float) -> Any:
    # coeff * t**q, skipping the power when the coefficient vanishes so
    # integer exponents at t == 0 never touch 0**negative
    if coeff == 0:
        return 0.0
    return coeff * t**q


@dataclass(frozen=True)
class Jet3:
    """Value and first three derivatives of a univariate quantity.

    d2/d3 hold the actual second/third derivatives (not Taylor
    coefficients).  Lifting a constant gives d1=d2=d3=0; lifting the
    variable at x gives value=x, d1=1, d2=d3=0.
    """

    f: Any
    d1: Any
    d2: Any
    d3: Any

    # keep numpy from coercing jets into object arrays; reflected dunders run instead
    __array_ufunc__ = None

    @staticmethod
    def constant(c: Any) -> "Jet3":
        return Jet3(c, 0.0, 0.0, 0.0)

    @staticmethod
    def variable(x: Any) -> "Jet3":
        return Jet3(x, 1.0, 0.0, 0.0)

    @staticmethod
    def _lift(other: Any) -> "Jet3 | None":
        if isinstance(other, Jet3):
            return other
        if isinstance(other, _SCALARS) or isinstance(other, np.ndarray):
            return Jet3.constant(other)
        return None

    # -- ring operations ----------------------------------------------

    def __add__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return Jet3(self.f + o.f, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)

    __radd__ = __add__

    def __neg__(self) -> "Jet3":
        return Jet3(-self.f, -self.d1, -self.d2, -self.d3)

    def __sub__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return Jet3(self.f - o.f, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)

    def __rsub__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return Jet3(
            self.f * o.f,
            self.d1 * o.f + self.f * o.d1,
            self.d2 * o.f + 2.0 * self.d1 * o.d1 + self.f * o.d2,
            self.d3 * o.f + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.f * o.d3,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def _reciprocal(self) -> "Jet3":
        t = self.f
        if np.any(np.asarray(t) == 0):
            raise _DomainViolation("division by zero")
        inv = 1.0 / t
        return self._compose(inv, -inv * inv, 2.0 * inv**3, -6.0 * inv**4)

    # -- composition with an outer univariate map ----------------------

    def _compose(self, u0: Any, u1: Any, u2: Any, u3: Any) -> "Jet3":
        """Chain rule through third order for u(self)."""
        g1 = self.d1
        return Jet3(
            u0,
            u1 * g1,
            u2 * g1 * g1 + u1 * self.d2,
            u3 * g1 * g1 * g1 + 3.0 * u2 * g1 * self.d2 + u1 * self.d3,
        )

    def sin(self) -> "Jet3":
        s, c = np.sin(self.f), np.cos(self.f)
        return self._compose(s, c, -s, -c)

    def cos(self) -> "Jet3":
        s, c = np.sin(self.f), np.cos(self.f)
        return self._compose(c, -s, -c, s)

    def exp(self) -> "Jet3":
        e = np.exp(self.f)
        return self._compose(e, e, e, e)

    def log(self) -> "Jet3":
        t = self.f
        if np.any(np.asarray(t) <= 0):
            raise _DomainViolation("log of a non-positive argument")
        inv = 1.0 / t
        return self._compose(np.log(t), inv, -inv * inv, 2.0 * inv**3)

    def sqrt(self) -> "Jet3":
        t = self.f
        if np.any(np.asarray(t) <= 0):
            raise _DomainViolation(
                "sqrt of a non-positive argument (derivative undefined at 0)"
            )
        r = np.sqrt(t)
        return self._compose(r, 0.5 / r, -0.25 / (r * t), 0.375 / (r * t * t))

    def tanh(self) -> "Jet3":
        t = np.tanh(self.f)
        s = 1.0 - t * t  # sech^2
        return self._compose(t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0))

    def abs(self) -> "Jet3":
        t = self.f
        if np.any(np.asarray(t) == 0):
            raise _DomainViolation("abs is not differentiable at 0")
        sign = np.sign(t)
        return self._compose(np.abs(t), sign, 0.0, 0.0)

    def __pow__(self, other: Any) -> "Jet3":
        if isinstance(other, Jet3):
            if (
                np.all(np.asarray(other.d1) == 0)
                and np.all(np.asarray(other.d2) == 0)
                and np.all(np.asarray(other.d3) == 0)
            ):
                return self._pow_const(other.f)
            if np.any(np.asarray(self.f) <= 0):
                raise _DomainViolation("power with varying exponent needs a positive base")
            return (other * self.log()).exp()
        if isinstance(other, _SCALARS):
            return self._pow_const(other)
        return NotImplemented

    def __rpow__(self, other: Any) -> "Jet3":
        o = Jet3._lift(other)
        if o is None:
            return NotImplemented
        return o.__pow__(self)

    def _pow_const(self, p: Any) -> "Jet3":
        p = float(p)
        t = self.f
        _frac_pow_checks(t, p)
        return self._compose(
            t**p,
            _pow_term(t, p, p - 1.0),
            _pow_term(t, p * (p - 1.0), p - 2.0),
            _pow_term(t, p * (p - 1.0) * (p - 2.0), p - 3.0),
        )


@dataclass(frozen=True)
class HyperDual:
    """Two first-order perturbations and their mixed second derivative.

    Evaluating g(x + a*eps1 + b*eps2) yields d_ab = the a*b-weighted mixed
    partial; seeding a = b = e_i gives the pure second partial d2g/dxi2.
    """

    f: Any
    da: Any
    db: Any
    dab: Any

    __array_ufunc__ = None

    @staticmethod
    def constant(c: Any) -> "HyperDual":
        return HyperDual(c, 0.0, 0.0, 0.0)

    @staticmethod
    def seed(x: Any, a: float = 1.0, b: float = 1.0) -> "HyperDual":
        return HyperDual(x, a, b, 0.0)

    @staticmethod
    def _lift(other: Any) -> "HyperDual | None":
        if isinstance(other, HyperDual):
            return other
        if isinstance(other, _SCALARS) or isinstance(other, np.ndarray):
            return HyperDual.constant(other)
        return None

    def __add__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return HyperDual(self.f + o.f, self.da + o.da, self.db + o.db, self.dab + o.dab)

    __radd__ = __add__

    def __neg__(self) -> "HyperDual":
        return HyperDual(-self.f, -self.da, -self.db, -self.dab)

    def __sub__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return HyperDual(self.f - o.f, self.da - o.da, self.db - o.db, self.dab - o.dab)

    def __rsub__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return HyperDual(
            self.f * o.f,
            self.da * o.f + self.f * o.da,
            self.db * o.f + self.f * o.db,
            self.dab * o.f + self.da * o.db + self.db * o.da + self.f * o.dab,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def _reciprocal(self) -> "HyperDual":
        t = self.f
        if np.any(np.asarray(t) == 0):
            raise _DomainViolation("division by zero")
        inv = 1.0 / t
        return self._compose(inv, -inv * inv, 2.0 * inv**3)

    def _compose(self, u0: Any, u1: Any, u2: Any) -> "HyperDual":
        return HyperDual(
            u0,
            u1 * self.da,
            u1 * self.db,
            u1 * self.dab + u2 * self.da * self.db,
        )

    def sin(self) -> "HyperDual":
        return self._compose(np.sin(self.f), np.cos(self.f), -np.sin(self.f))

    def cos(self) -> "HyperDual":
        return self._compose(np.cos(self.f), -np.sin(self.f), -np.cos(self.f))

    def exp(self) -> "HyperDual":
        e = np.exp(self.f)
        return self._compose(e, e, e)

    def log(self) -> "HyperDual":
        t = self.f
        if np.any(np.asarray(t) <= 0):
            raise _DomainViolation("log of a non-positive argument")
        inv = 1.0 / t
        return self._compose(np.log(t), inv, -inv * inv)

    def sqrt(self) -> "HyperDual":
        t = self.f
        if np.any(np.asarray(t) <= 0):
            raise _DomainViolation(
                "sqrt of a non-positive argument (derivative undefined at 0)"
            )
        r = np.sqrt(t)
        return self._compose(r, 0.5 / r, -0.25 / (r * t))

    def tanh(self) -> "HyperDual":
        t = np.tanh(self.f)
        s = 1.0 - t * t
        return self._compose(t, s, -2.0 * t * s)

    def abs(self) -> "HyperDual":
        t = self.f
        if np.any(np.asarray(t) == 0):
            raise _DomainViolation("abs is not differentiable at 0")
        return self._compose(np.abs(t), np.sign(t), 0.0)

    def __pow__(self, other: Any) -> "HyperDual":
        if isinstance(other, HyperDual):
            if (
                np.all(np.asarray(other.da) == 0)
                and np.all(np.asarray(other.db) == 0)
                and np.all(np.asarray(other.dab) == 0)
            ):
                return self._pow_const(other.f)
            if np.any(np.asarray(self.f) <= 0):
                raise _DomainViolation("power with varying exponent needs a positive base")
            return (other * self.log()).exp()
        if isinstance(other, _SCALARS):
            return self._pow_const(other)
        return NotImplemented

    def __rpow__(self, other: Any) -> "HyperDual":
        o = HyperDual._lift(other)
        if o is None:
            return NotImplemented
        return o.__pow__(self)

    def _pow_const(self, p: Any) -> "HyperDual":
        p = float(p)
        t = self.f
        _frac_pow_checks(t, p)
        return self._compose(
            t**p,
            _pow_term(t, p, p - 1.0),
            _pow_term(t, p * (p - 1.0), p - 2.0),
        )


# ---------------------------------------------------------------------------
# Derivative drivers


def _sole_variable(f: Node) -> int | None:
    used = expr.variables(f)
    if len(used) > 1:
        raise ValueError(f"expression is not univariate (uses {used})")
    return used[0] if used else None


def derivatives_1d(f: Node, x0: float) -> tuple[float, float, float, float]:
    """(f(x0), f'(x0), f''(x0), f'''(x0)) by one order-3 jet pass."""
    index = _sole_variable(f)
    env = {} if index is None else {index: Jet3.variable(float(x0))}
    out = eval_jet(f, env)
    return (float(out.f), float(out.d1), float(out.d2), float(out.d3))


def eval_jet(f: Node, env: dict[int, Any]) -> Jet3:
    out = expr.eval_with(f, env)
    if not isinstance(out, Jet3):
        out = Jet3.constant(out)
    return out


def first_derivative_many(f: Node, xs: Sequence[float]) -> np.ndarray:
    """f'(x) at every x in `xs`, computed in a single array-valued pass."""
    xs = np.asarray(xs, dtype=float)
    index = _sole_variable(f)
    if index is None:
        return np.zeros_like(xs)
    out = eval_jet(f, {index: Jet3.variable(xs)})
    return np.broadcast_to(np.asarray(out.d1, dtype=float), xs.shape).copy()


def _check_dimension(g: Node, n: int) -> None:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    used = expr.variables(g)
    if used and used[-1] > n:
        raise ValueError(f"expression uses x{used[-1]} but dimension is {n}")


def _axis_pass(g: Node, point: Sequence[float], axis: int) -> HyperDual:
    env: dict[int, Any] = {j + 1: float(point[j]) for j in range(len(point))}
    env[axis + 1] = HyperDual.seed(float(point[axis]))
    out = expr.eval_with(g, env)
    if not isinstance(out, HyperDual):
        out = HyperDual.constant(out)
    return out


def gradient(g: Node, point: Sequence[float]) -> list[float]:
    """Vector of first partials of g at `point` (dimension = len(point))."""
    _check_dimension(g, len(point))
    return [float(_axis_pass(g, point, i).da) for i in range(len(point))]


def laplacian(g: Node, point: Sequence[float]) -> float:
    """Sum of pure second partials at `point`, one hyper-dual pass per axis."""
    _check_dimension(g, len(point))
    return float(sum(_axis_pass(g, point, i).dab for i in range(len(point))))


def directional_derivative(g: Node, point: Sequence[float], v: Sequence[float]) -> float:
    """Gradient dotted with the unit vector v."""
    v = np.asarray(v, dtype=float)
    if len(v) != len(point):
        raise ValueError("direction and point dimensions differ")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"v must be a unit vector (|v| = {norm!r})")
    grad = gradient(g, point)
    return float(sum(gi * vi for gi, vi in zip(grad, v)))
