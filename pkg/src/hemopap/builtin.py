"""Built-in model instances used by the CLI, the tests and the acceptance suite."""
from __future__ import annotations

import math

from .model import HarvestSpec, ModelSpec, RangeParams
from .pap_funcs import (
    Abs,
    BumpTrain,
    Const,
    Cos,
    GaussianDecay,
    PapFunction,
    RationalDecay,
    Scale,
    Sin,
    Square,
    Sum,
)

# reference constants quoted for the worked example
EXAMPLE6_OVERRIDES = {"H_plus": 0.005, "H_minus": 0.0, "L": 0.01}
EXAMPLE6_RANGE = RangeParams(k=2.0, M=3.29)


def example6_coefficients() -> dict[str, PapFunction]:
    a = PapFunction(
        Sum([Const(0.38), Scale(1 / 400, Abs(Sum([Sin(1.0), Sin(math.pi)])))]),
        [BumpTrain(math.pi / 800)],
    )
    b1 = PapFunction(
        Sum([Const(1.0), Scale(0.1, Sum([Square(Sin(1.0)), Square(Sin(math.sqrt(2.0)))]))]),
        [RationalDecay(0.01)],
    )
    tau1 = PapFunction(
        Sum([Square(Cos(1.0)), Square(Cos(math.sqrt(2.0))), Const(1.0)]),
        [GaussianDecay(1.0)],
    )
    sigma = PapFunction(Abs(Sum([Sin(1.0), Scale(-1.0, Sin(math.pi))])))
    c = PapFunction(Scale(0.01, Abs(Sum([Sin(1.0), Cos(math.sqrt(3.0))]))))
    return {"a": a, "b1": b1, "tau1": tau1, "sigma": sigma, "c": c}


def example6_spec() -> ModelSpec:
    f = example6_coefficients()
    return ModelSpec(
        m=2,
        n=2,
        a=f["a"],
        b=[f["b1"]],
        tau=[f["tau1"]],
        sigma=f["sigma"],
        harvest=HarvestSpec(f["c"], "rational"),
        L=0.01,
    )


def constant_spec(a: float = 0.38, b: float = 1.1, tau: float = 1.0, m: float = 2, n: float = 2) -> ModelSpec:
    """Constant coefficients, one delay, no harvesting."""
    return ModelSpec(
        m=m,
        n=n,
        a=PapFunction.constant(a),
        b=[PapFunction.constant(b)],
        tau=[PapFunction.constant(tau)],
    )


CONSTANT_RANGE = RangeParams(k=2.0, M=2.9)


def extinction_spec() -> ModelSpec:
    return constant_spec(a=1.0, b=0.5, tau=1.0)


def decay_spec() -> ModelSpec:
    """Pure exponential decay ``x' = -x``."""
    return constant_spec(a=1.0, b=0.0, tau=1.0)
