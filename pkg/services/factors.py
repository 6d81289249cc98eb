"""
Per-dimension factors of separable propensities and their range sums.

A propensity is coefficient * prod_l f_l(x_l) on the region x >= floor
(the reaction's loss vector) and zero elsewhere. Each factor knows its
value at a point and its sum over an integer range [a, b].
"""
import math
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union
from config import settings
from models.errors import ModelValidationError
from models.network import CustomFactor, Hill, MassAction, Reaction, SeparableCustom


class ConstantSum:
    """f(x) = 1; the range sum counts micro-states."""

    def value(self, x: int) -> int:
        return 1

    def range_sum(self, a: int, b: int) -> int:
        return max(b - a + 1, 0)


class BinomialSum:
    """f(x) = C(x, k); range sums by the hockey-stick identity."""

    def __init__(self, order: int):
        self.order = order

    def value(self, x: int) -> int:
        return math.comb(x, self.order)

    def range_sum(self, a: int, b: int) -> int:
        if a > b:
            return 0
        return binomial_range_sum(a, b, self.order)


class IntegralApprox:
    """Non-polynomial factor summed by its antiderivative with +-0.5 continuity correction.

    Ranges no wider than ``exact_width`` are summed exactly.
    """

    def __init__(
        self,
        value: Callable[[float], float],
        antiderivative: Optional[Callable[[float], float]],
        exact_width: int,
        label: str,
    ):
        self._value = value
        self.antiderivative = antiderivative
        self.exact_width = exact_width
        self.label = label

    def value(self, x: int) -> float:
        return self._value(x)

    def range_sum(self, a: int, b: int) -> float:
        if a > b:
            return 0.0
        if b - a + 1 <= self.exact_width:
            return math.fsum(self._value(x) for x in range(a, b + 1))
        if self.antiderivative is None:
            raise ModelValidationError(f"factor {self.label} has no antiderivative for wide ranges")
        return self.antiderivative(b + 0.5) - self.antiderivative(a - 0.5)


Factor = Union[ConstantSum, BinomialSum, IntegralApprox]


def binomial_range_sum(a: int, b: int, k: int) -> int:
    """Sum of C(x, k) for x in [a, b] = C(b+1, k+1) - C(a, k+1); zero when a = b+1."""
    if k < 0 or a < 0 or a > b + 1:
        raise ValueError(f"invalid binomial range a={a}, b={b}, k={k}")
    return math.comb(b + 1, k + 1) - math.comb(a, k + 1)


class RangeSumPlan:
    """Factorization of one reaction's propensity for box sums."""

    def __init__(self, coefficient: float, factors: Sequence[Factor], floor: Tuple[int, ...]):
        self.coefficient = coefficient
        self.factors = tuple(factors)
        self.floor = floor

    def evaluate(self, state: Sequence[int]) -> float:
        if any(x < f for x, f in zip(state, self.floor)):
            return 0.0
        total = self.coefficient
        for factor, x in zip(self.factors, state):
            total *= factor.value(x)
        return float(total)

    def box_sum(self, lower: Sequence[int], upper: Sequence[int]) -> float:
        total = self.coefficient
        for factor, a, b, f in zip(self.factors, lower, upper, self.floor):
            a = max(a, f)
            if a > b:
                return 0.0
            total *= factor.range_sum(a, b)
        return float(total)


def _hill_factor(offset: float, exact_width: int) -> IntegralApprox:
    return IntegralApprox(
        value=lambda x: 1.0 / (offset + x),
        antiderivative=lambda y: math.log(offset + y),
        exact_width=exact_width,
        label=f"1/({offset}+x)",
    )


def _custom_factor(descriptor: CustomFactor, exact_width: int) -> IntegralApprox:
    if descriptor.name == "inv":
        (c,) = descriptor.args
        return IntegralApprox(
            value=lambda x: 1.0 / (c + x),
            antiderivative=lambda y: math.log(c + y),
            exact_width=exact_width,
            label=f"inv({c})",
        )
    if descriptor.name == "lin":
        a, b = descriptor.args
        return IntegralApprox(
            value=lambda x: a + b * x,
            antiderivative=lambda y: a * y + 0.5 * b * y * y,
            exact_width=exact_width,
            label=f"lin({a},{b})",
        )
    if descriptor.name == "exp":
        (r,) = descriptor.args
        return IntegralApprox(
            value=lambda x: math.exp(r * x),
            antiderivative=lambda y: math.exp(r * y) / r,
            exact_width=exact_width,
            label=f"exp({r})",
        )
    raise ModelValidationError(f"unknown custom factor {descriptor.name!r}")


@lru_cache(maxsize=None)
def plan_for(reaction: Reaction, exact_width: int = None) -> RangeSumPlan:
    """Build (and cache) the range-sum plan of a reaction."""
    if exact_width is None:
        exact_width = settings.exact_sum_width
    spec = reaction.propensity
    n = len(reaction.loss)
    factors = [ConstantSum() for _ in range(n)]
    if isinstance(spec, MassAction):
        for dim, order in enumerate(reaction.loss):
            if order > 0:
                factors[dim] = BinomialSum(order)
        return RangeSumPlan(spec.rate, factors, reaction.loss)
    if isinstance(spec, Hill):
        if spec.offset <= 0.5:
            raise ModelValidationError("hill offset must exceed 0.5 for the continuity-corrected integral")
        factors[spec.species] = _hill_factor(spec.offset, exact_width)
        return RangeSumPlan(spec.numerator, factors, reaction.loss)
    if isinstance(spec, SeparableCustom):
        for descriptor in spec.factors:
            if descriptor.name == "inv" and descriptor.args[0] <= 0.5:
                raise ModelValidationError("inv offset must exceed 0.5 for the continuity-corrected integral")
            factors[descriptor.species] = _custom_factor(descriptor, exact_width)
        return RangeSumPlan(spec.coefficient, factors, reaction.loss)
    raise ModelValidationError(f"unsupported propensity {type(spec).__name__}")
