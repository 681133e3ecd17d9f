"""Exact ground-truth effect measures computed from a model.

Every estimand reduces to expectations of nested counterfactuals, evaluated
by exogenous enumeration: per configuration, inner naturals (for instance
M's value under A:=0) are resolved first and then frozen into the outer
world, which makes cross-world quantities exact by construction.

Named effects on the additive (risk difference) scale:

    TE, NDE, NIE          natural decomposition, Y(a', M(a''))
    IDE, IIE              randomized-draw analogues via G_C(a')
    CDE(m'), PE(m')       controlled direct effect and its complement
    SDE, SIE              two exposure components, Y(A_Y=a', A_M=a'')
    SE_direct, SE_L, SE_M three components, Y(A_Y=., A_L*=., A_M*=.)
    JM_direct, JM_LM      joint-mediator decomposition, Y(a', L(a''), M(a''))
    PSE_direct, PSE_L, PSE_M  path-specific decomposition
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .core import FiniteScm, ScmError, evaluate_world


@dataclass(frozen=True)
class Term:
    """A nested counterfactual: ``var`` under fixed and/or natural contexts.

    ``context`` maps variable or component names either to fixed support
    values or to inner Terms whose resolved value is plugged in.
    """

    var: str
    context: tuple = ()  # sorted ((name, value-or-Term), ...)

    @staticmethod
    def of(var: str, context: Mapping | None = None) -> "Term":
        items = tuple(sorted((context or {}).items(), key=lambda kv: kv[0]))
        return Term(var, items)

    def __str__(self):
        if not self.context:
            return self.var
        inner = ",".join(f"{k}={v}" for k, v in self.context)
        return f"{self.var}({inner})"


def _validate_term(scm: FiniteScm, term: Term) -> None:
    known = set(scm.variables) | set(scm.component_names)
    if term.var not in known:
        raise ScmError(f"term references missing variable {term.var!r}")
    y = scm.outcome
    for name, sub in term.context:
        if name not in known:
            raise ScmError(f"term context references missing variable {name!r}")
        if name == y:
            raise ScmError("cannot bind the outcome inside a context")
        if isinstance(sub, Term):
            _validate_term(scm, sub)
        elif sub not in scm.support(name):
            raise ScmError(f"value {sub!r} outside support of {name!r}")


def resolve_term(scm: FiniteScm, term: Term, exo: Mapping):
    """Value of a nested counterfactual for one exogenous configuration."""
    iv = {}
    for name, sub in term.context:
        iv[name] = resolve_term(scm, sub, exo) if isinstance(sub, Term) else sub
    world = evaluate_world(scm, exo, iv)
    if term.var in world:
        return world[term.var]
    # exposure component: equals its assigned or inherited exposure value
    return iv.get(term.var, iv.get(scm.exposure, world[scm.exposure]))


def nested_expectation(scm: FiniteScm, term: Term) -> float:
    """Exact E[term] by enumeration over exogenous configurations."""
    _validate_term(scm, term)
    total = 0.0
    names = scm.exogenous.names
    for config, p in scm.exogenous.configs():
        total += p * float(resolve_term(scm, term, dict(zip(names, config))))
    return total


def _strata(scm: FiniteScm):
    """(c-value, P(C=c), member configs) per baseline stratum; one stratum
    with c-value None when the model has no baseline variable."""
    names = scm.exogenous.names
    c_name = scm.baseline
    groups: dict = {}
    for config, p in scm.exogenous.configs():
        exo = dict(zip(names, config))
        c = evaluate_world(scm, exo, {})[c_name] if c_name else None
        key = c
        bucket = groups.setdefault(key, [0.0, []])
        bucket[0] += p
        bucket[1].append((exo, p))
    return [(c, mass, members) for c, (mass, members) in sorted(groups.items(), key=lambda kv: repr(kv[0]))]


def interventional_expectation(scm: FiniteScm, a_outer, a_draw) -> float:
    """E{Y(a_outer, G_C(a_draw))} where G_C is a random draw from M(a_draw)
    within baseline strata, independent of the individual given C."""
    a, m_name, y_name = scm.exposure, scm.mediator, scm.outcome
    total = 0.0
    for _, mass, members in _strata(scm):
        if mass <= 0.0:
            continue
        m_law: dict = {}
        for exo, p in members:
            m_val = evaluate_world(scm, exo, {a: a_draw})[m_name]
            m_law[m_val] = m_law.get(m_val, 0.0) + p / mass
        for m_val, q in m_law.items():
            inner = 0.0
            for exo, p in members:
                inner += (p / mass) * float(
                    evaluate_world(scm, exo, {a: a_outer, m_name: m_val})[y_name]
                )
            total += mass * q * inner
    return total


@dataclass(frozen=True)
class EstimandResult:
    name: str
    value: float
    components: tuple  # ((label, value), ...)


def _require_l(scm: FiniteScm, name: str):
    if not scm.intermediate:
        raise ScmError(f"effect {name} needs an intermediate confounder L")


def _require_components(scm: FiniteScm, name: str, k: int):
    if not scm.separable or len(scm.component_names) != k:
        raise ScmError(f"effect {name} needs a {k}-component separable exposure")


def effect(scm: FiniteScm, name: str, m_prime=None) -> EstimandResult:
    """Exact value of a named effect; components record the sub-expectations."""
    a, m, y = scm.exposure, scm.mediator, scm.outcome
    l = scm.intermediate

    def nested(**ctx):
        return nested_expectation(scm, Term.of(y, ctx))

    def pair(label_values):
        comps = tuple(label_values)
        value = comps[0][1] - comps[1][1]
        return comps, value

    if name == "TE":
        comps, value = pair(
            [("E[Y(A=1)]", nested(**{a: 1})), ("E[Y(A=0)]", nested(**{a: 0}))]
        )
    elif name in ("NIE", "NDE"):
        m1 = Term.of(m, {a: 1})
        m0 = Term.of(m, {a: 0})
        e11 = nested(**{a: 1, m: m1})
        e10 = nested(**{a: 1, m: m0})
        e00 = nested(**{a: 0, m: m0})
        if name == "NIE":
            comps, value = pair([("E[Y(1,M(1))]", e11), ("E[Y(1,M(0))]", e10)])
        else:
            comps, value = pair([("E[Y(1,M(0))]", e10), ("E[Y(0,M(0))]", e00)])
    elif name in ("IIE", "IDE"):
        g11 = interventional_expectation(scm, 1, 1)
        g10 = interventional_expectation(scm, 1, 0)
        g00 = interventional_expectation(scm, 0, 0)
        if name == "IIE":
            comps, value = pair([("E[Y(1,G(1))]", g11), ("E[Y(1,G(0))]", g10)])
        else:
            comps, value = pair([("E[Y(1,G(0))]", g10), ("E[Y(0,G(0))]", g00)])
    elif name in ("CDE", "PE"):
        if m_prime is None:
            raise ScmError(f"effect {name} requires an explicit m_prime")
        if m_prime not in scm.support(m):
            raise ScmError(f"m_prime {m_prime!r} outside the mediator support")
        c1 = nested(**{a: 1, m: m_prime})
        c0 = nested(**{a: 0, m: m_prime})
        if name == "CDE":
            comps, value = pair(
                [(f"E[Y(1,{m_prime})]", c1), (f"E[Y(0,{m_prime})]", c0)]
            )
        else:
            te = effect(scm, "TE").value
            comps = ((f"TE", te), (f"CDE({m_prime})", c1 - c0))
            value = te - (c1 - c0)
    elif name in ("SIE", "SDE"):
        _require_components(scm, name, 2)
        am, ay = "A_M", "A_Y"
        s11 = nested(**{ay: 1, am: 1})
        s10 = nested(**{ay: 1, am: 0})
        s00 = nested(**{ay: 0, am: 0})
        if name == "SIE":
            comps, value = pair([("E[Y_S(1,1)]", s11), ("E[Y_S(1,0)]", s10)])
        else:
            comps, value = pair([("E[Y_S(1,0)]", s10), ("E[Y_S(0,0)]", s00)])
    elif name in ("SE_direct", "SE_L", "SE_M"):
        _require_components(scm, name, 3)
        al, am, ay = "A_L*", "A_M*", "A_Y*"

        def ysl(a_y, a_l, a_m):
            return nested(**{ay: a_y, al: a_l, am: a_m})

        if name == "SE_direct":
            comps, value = pair(
                [("E[Y_SL(1,0,0)]", ysl(1, 0, 0)), ("E[Y_SL(0,0,0)]", ysl(0, 0, 0))]
            )
        elif name == "SE_L":
            comps, value = pair(
                [("E[Y_SL(1,1,1)]", ysl(1, 1, 1)), ("E[Y_SL(1,0,1)]", ysl(1, 0, 1))]
            )
        else:
            comps, value = pair(
                [("E[Y_SL(1,0,1)]", ysl(1, 0, 1)), ("E[Y_SL(1,0,0)]", ysl(1, 0, 0))]
            )
    elif name in ("JM_direct", "JM_LM"):
        _require_l(scm, name)

        def phi_jm(a1, a2):
            return nested(
                **{a: a1, l: Term.of(l, {a: a2}), m: Term.of(m, {a: a2})}
            )

        if name == "JM_direct":
            comps, value = pair(
                [("phi_JM(1,0)", phi_jm(1, 0)), ("phi_JM(0,0)", phi_jm(0, 0))]
            )
        else:
            comps, value = pair(
                [("phi_JM(1,1)", phi_jm(1, 1)), ("phi_JM(1,0)", phi_jm(1, 0))]
            )
    elif name in ("PSE_direct", "PSE_L", "PSE_M"):
        _require_l(scm, name)

        def phi_pse(a1, a2, a3):
            l_a2 = Term.of(l, {a: a2})
            return nested(**{a: a1, l: l_a2, m: Term.of(m, {a: a3, l: l_a2})})

        if name == "PSE_direct":
            comps, value = pair(
                [("phi_PSE(1,0,0)", phi_pse(1, 0, 0)), ("phi_PSE(0,0,0)", phi_pse(0, 0, 0))]
            )
        elif name == "PSE_L":
            comps, value = pair(
                [("phi_PSE(1,1,1)", phi_pse(1, 1, 1)), ("phi_PSE(1,0,1)", phi_pse(1, 0, 1))]
            )
        else:
            comps, value = pair(
                [("phi_PSE(1,0,1)", phi_pse(1, 0, 1)), ("phi_PSE(1,0,0)", phi_pse(1, 0, 0))]
            )
    else:
        raise ScmError(f"unknown effect {name!r}")
    return EstimandResult(name, value, comps)


EFFECT_NAMES = (
    "TE",
    "NDE",
    "NIE",
    "IDE",
    "IIE",
    "CDE",
    "PE",
    "SDE",
    "SIE",
    "SE_direct",
    "SE_L",
    "SE_M",
    "JM_direct",
    "JM_LM",
    "PSE_direct",
    "PSE_L",
    "PSE_M",
)
