"""Canonical small models used across tests, docs, and the CLI examples.

The noisy chain is the workhorse: A ~ Bernoulli(1/2), M flips A with
probability 0.1, Y flips M with probability 0.1, all noises independent.
Hand-enumerable: P(A=1,M=1,Y=1) = 0.405, E{Y(1,M(0))} = 0.18, TE = NIE =
0.64, NDE = 0.
"""

from __future__ import annotations

import itertools

from .core import (
    ExogenousSpace,
    FiniteScm,
    FiniteVariable,
    SeparableExposure,
    StructuralFunction,
)


def _bern_table(names_probs):
    """Independent product pmf over binary exogenous variables."""
    names = [n for n, _ in names_probs]
    pmf = {}
    for config in itertools.product((0, 1), repeat=len(names)):
        p = 1.0
        for bit, (_, q) in zip(config, names_probs):
            p *= q if bit == 1 else (1.0 - q)
        pmf[config] = p
    variables = [FiniteVariable(n, "exogenous", (0, 1)) for n in names]
    return ExogenousSpace(variables, pmf)


def _table(parents, supports, fn):
    return {
        key: fn(*key) for key in itertools.product(*supports)
    } if parents else {(): fn()}


def noisy_chain() -> FiniteScm:
    """A -> M -> Y with independent 10% flips on each arrow."""
    exo = _bern_table([("eA", 0.5), ("eM", 0.1), ("eY", 0.1)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "M", ("A", "eM"), _table(("A", "eM"), [(0, 1), (0, 1)], lambda a, e: a ^ e)
        ),
        StructuralFunction(
            "Y", ("M", "eY"), _table(("M", "eY"), [(0, 1), (0, 1)], lambda m, e: m ^ e)
        ),
    ]
    return FiniteScm(variables, exo, functions, declares=frozenset({"NPSEM-IE"}), name="noisy-chain")


def null_m() -> FiniteScm:
    """Mediator ignores the exposure; the A -> M edge is absent."""
    exo = _bern_table([("eA", 0.5), ("eM", 0.3), ("eY", 0.1)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction("M", ("eM",), _table(("eM",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "Y",
            ("A", "M", "eY"),
            _table(("A", "M", "eY"), [(0, 1)] * 3, lambda a, m, e: (a & m) ^ e),
        ),
    ]
    return FiniteScm(variables, exo, functions, declares=frozenset({"NPSEM-IE"}), name="null-m")


def null_y() -> FiniteScm:
    """Outcome ignores the mediator; the M -> Y edge is absent."""
    exo = _bern_table([("eA", 0.5), ("eM", 0.2), ("eY", 0.1)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "M", ("A", "eM"), _table(("A", "eM"), [(0, 1)] * 2, lambda a, e: a ^ e)
        ),
        StructuralFunction(
            "Y", ("A", "eY"), _table(("A", "eY"), [(0, 1)] * 2, lambda a, e: a ^ e)
        ),
    ]
    return FiniteScm(variables, exo, functions, declares=frozenset({"NPSEM-IE"}), name="null-y")


def deterministic_chain() -> FiniteScm:
    """M = A and Y = M exactly; P(A=1, M=0) = 0, so positivity fails."""
    exo = _bern_table([("eA", 0.5)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction("M", ("A",), _table(("A",), [(0, 1)], lambda a: a)),
        StructuralFunction("Y", ("M",), _table(("M",), [(0, 1)], lambda m: m)),
    ]
    return FiniteScm(variables, exo, functions, name="deterministic-chain")


def separable_isolated() -> FiniteScm:
    """Two exposure components with pointwise isolation: M reads only A_M,
    Y reads only A_Y (plus M).  Independent noises, so Theorem 1 applies
    and SIE equals NIE exactly."""
    exo = _bern_table([("eA", 0.5), ("eM", 0.1), ("eY", 0.15)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "M", ("A_M", "eM"), _table(("A_M", "eM"), [(0, 1)] * 2, lambda a, e: a ^ e)
        ),
        StructuralFunction(
            "Y",
            ("A_Y", "M", "eY"),
            _table(("A_Y", "M", "eY"), [(0, 1)] * 3, lambda a, m, e: (a | m) ^ e),
        ),
    ]
    return FiniteScm(
        variables,
        exo,
        functions,
        separable=SeparableExposure(("A_M", "A_Y")),
        name="separable-isolated",
    )


def l_chain() -> FiniteScm:
    """A -> L -> M -> Y with independent flips; the smallest model with an
    exposure-induced intermediate confounder position filled."""
    exo = _bern_table([("eA", 0.5), ("eL", 0.15), ("eM", 0.1), ("eY", 0.1)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("L", "intermediate", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "L", ("A", "eL"), _table(("A", "eL"), [(0, 1)] * 2, lambda a, e: a ^ e)
        ),
        StructuralFunction(
            "M", ("L", "eM"), _table(("L", "eM"), [(0, 1)] * 2, lambda l, e: l ^ e)
        ),
        StructuralFunction(
            "Y",
            ("L", "M", "eY"),
            _table(("L", "M", "eY"), [(0, 1)] * 3, lambda l, m, e: (m & (1 ^ l)) ^ e),
        ),
    ]
    return FiniteScm(variables, exo, functions, declares=frozenset({"NPSEM-IE-L"}), name="l-chain")


def crossworld_confounded() -> FiniteScm:
    """World-split noises with a cross-world coupling: Y's world-1 noise is
    exactly M's world-0 noise.  A1-A3 hold, A4 fails, so the model is
    FFRCISTG but not NPSEM-IE."""
    exo = _bern_table([("eA", 0.5), ("u0", 0.3), ("u1", 0.6), ("v0", 0.45)])
    variables = [
        FiniteVariable("A", "exposure", (0, 1)),
        FiniteVariable("M", "mediator", (0, 1)),
        FiniteVariable("Y", "outcome", (0, 1)),
    ]
    functions = [
        StructuralFunction("A", ("eA",), _table(("eA",), [(0, 1)], lambda e: e)),
        StructuralFunction(
            "M",
            ("A", "u0", "u1"),
            _table(("A", "u0", "u1"), [(0, 1)] * 3, lambda a, u0, u1: u1 if a else u0),
        ),
        StructuralFunction(
            "Y",
            ("A", "M", "u0", "v0"),
            _table(
                ("A", "M", "u0", "v0"),
                [(0, 1)] * 4,
                lambda a, m, u0, v0: m ^ (u0 if a else v0),
            ),
        ),
    ]
    return FiniteScm(variables, exo, functions, name="crossworld-confounded")


FIXTURES = {
    "noisy-chain": noisy_chain,
    "null-m": null_m,
    "null-y": null_y,
    "deterministic-chain": deterministic_chain,
    "separable-isolated": separable_isolated,
    "l-chain": l_chain,
    "crossworld-confounded": crossworld_confounded,
}
