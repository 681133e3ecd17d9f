"""Finite structural causal models with exact counterfactual enumeration.

A model is a set of discrete variables (baseline C, exposure A, optional
intermediate confounder L, mediator M, outcome Y), a joint probability table
over exogenous noise variables, and one deterministic lookup table per
endogenous variable.  Because everything is finite, any counterfactual or
observational distribution is computed exactly by enumerating exogenous
configurations: one configuration fixes every potential outcome at once, so
cross-world joints come for free.

The exposure may optionally be split into components (two: A_M, A_Y; or
three: A_L*, A_M*, A_Y*).  In the unintervened world every component equals
A; interventions may set components independently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .tables import JointTable

EPS_NUM = 1e-9

ROLE_BASELINE = "baseline"
ROLE_EXPOSURE = "exposure"
ROLE_INTERMEDIATE = "intermediate"
ROLE_MEDIATOR = "mediator"
ROLE_OUTCOME = "outcome"
ROLE_EXOGENOUS = "exogenous"

ROLES = (
    ROLE_BASELINE,
    ROLE_EXPOSURE,
    ROLE_INTERMEDIATE,
    ROLE_MEDIATOR,
    ROLE_OUTCOME,
    ROLE_EXOGENOUS,
)

TWO_COMPONENTS = ("A_M", "A_Y")
THREE_COMPONENTS = ("A_L*", "A_M*", "A_Y*")


class ScmError(ValueError):
    """Structural problem with a model or a query against it."""


@dataclass(frozen=True)
class FiniteVariable:
    """A named variable with an ordered finite support."""

    name: str
    role: str
    support: tuple

    def __post_init__(self):
        if self.role not in ROLES:
            raise ScmError(f"unknown role {self.role!r} for variable {self.name}")
        if len(self.support) == 0:
            raise ScmError(f"empty support for variable {self.name}")
        if len(set(self.support)) != len(self.support):
            raise ScmError(f"duplicate support values for variable {self.name}")


@dataclass(frozen=True)
class StructuralFunction:
    """Total lookup table from parent-value tuples to an output value."""

    output: str
    parents: tuple
    table: Mapping[tuple, object]

    def __call__(self, parent_values: tuple):
        return self.table[parent_values]


class ExogenousSpace:
    """Joint probability table over the exogenous variables.

    Probabilities must be nonnegative and sum to one.  Zero-probability
    configurations stay in the support but are skipped during enumeration,
    so individual-level quantifiers range over positive-probability
    configurations only.
    """

    def __init__(self, variables: Sequence[FiniteVariable], pmf: Mapping[tuple, float]):
        self.variables = tuple(variables)
        self.names = tuple(v.name for v in self.variables)
        self.pmf = dict(pmf)
        self._positive = [
            (config, p) for config, p in self.pmf.items() if p > 0.0
        ]

    def configs(self):
        """(config, probability) pairs with positive probability."""
        return self._positive

    def all_configs(self):
        return list(self.pmf.items())

    def total(self) -> float:
        return sum(self.pmf.values())

    def marginal(self, name: str) -> dict:
        i = self.names.index(name)
        out: dict = {}
        for config, p in self.pmf.items():
            out[config[i]] = out.get(config[i], 0.0) + p
        return out

    def factorization_gap(self) -> float:
        """Max cell-wise gap between the joint and the product of marginals."""
        marginals = [self.marginal(n) for n in self.names]
        gap = 0.0
        for config, p in self.pmf.items():
            prod = 1.0
            for i, v in enumerate(config):
                prod *= marginals[i].get(v, 0.0)
            gap = max(gap, abs(p - prod))
        return gap


@dataclass(frozen=True)
class SeparableExposure:
    """Declared exposure components; each equals A in the observed regime."""

    components: tuple

    def __post_init__(self):
        if tuple(self.components) not in (TWO_COMPONENTS, THREE_COMPONENTS):
            raise ScmError(
                "separable components must be %r or %r"
                % (TWO_COMPONENTS, THREE_COMPONENTS)
            )


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class FiniteScm:
    """A complete discrete structural causal model.

    Parameters
    ----------
    variables : endogenous FiniteVariables (exactly one each of exposure,
        mediator, outcome; baseline and intermediate optional).
    exogenous : ExogenousSpace.
    functions : one StructuralFunction per endogenous variable.
    separable : optional SeparableExposure; when present, the L/M/Y
        functions must consume exposure components rather than A itself.
    declares : optional set of claimed model-class tags (checked, never
        trusted).
    """

    def __init__(
        self,
        variables: Sequence[FiniteVariable],
        exogenous: ExogenousSpace,
        functions: Sequence[StructuralFunction],
        separable: SeparableExposure | None = None,
        declares: frozenset = frozenset(),
        name: str = "scm",
    ):
        self.variables = {v.name: v for v in variables}
        self.exogenous = exogenous
        self.functions = {f.output: f for f in functions}
        self.separable = separable
        self.declares = frozenset(declares)
        self.name = name

        self.roles: dict = {}
        for v in variables:
            self.roles.setdefault(v.role, v.name)
        self._by_role = {v.name: v.role for v in variables}
        self.topo_order = self._topological_order()

    # -- structure ---------------------------------------------------------

    def var(self, role: str) -> str | None:
        return self.roles.get(role)

    @property
    def exposure(self) -> str:
        return self.roles[ROLE_EXPOSURE]

    @property
    def mediator(self) -> str:
        return self.roles[ROLE_MEDIATOR]

    @property
    def outcome(self) -> str:
        return self.roles[ROLE_OUTCOME]

    @property
    def baseline(self) -> str | None:
        return self.roles.get(ROLE_BASELINE)

    @property
    def intermediate(self) -> str | None:
        return self.roles.get(ROLE_INTERMEDIATE)

    @property
    def component_names(self) -> tuple:
        return self.separable.components if self.separable else ()

    def support(self, name: str) -> tuple:
        if name in self.variables:
            return self.variables[name].support
        if name in self.component_names:
            return self.variables[self.exposure].support
        for v in self.exogenous.variables:
            if v.name == name:
                return v.support
        raise ScmError(f"unknown variable {name!r}")

    def endogenous_names(self) -> tuple:
        return self.topo_order

    def _topological_order(self) -> tuple:
        """Order endogenous variables so every parent precedes its child."""
        endo = set(self.variables)
        exo = set(self.exogenous.names)
        comps = set(self.component_names)
        deps = {}
        for name, f in self.functions.items():
            ds = set()
            for p in f.parents:
                if p in endo:
                    ds.add(p)
                elif p in comps:
                    ds.add(self.exposure)
                elif p not in exo:
                    raise ScmError(f"function for {name} uses unknown parent {p!r}")
            deps[name] = ds
        order, placed = [], set()
        remaining = dict(deps)
        while remaining:
            ready = sorted(n for n, ds in remaining.items() if ds <= placed)
            if not ready:
                raise ScmError("cycle in structural functions")
            # prefer the causal role ordering C, A, L, M, Y among ready nodes
            rank = {
                ROLE_BASELINE: 0,
                ROLE_EXPOSURE: 1,
                ROLE_INTERMEDIATE: 2,
                ROLE_MEDIATOR: 3,
                ROLE_OUTCOME: 4,
            }
            ready.sort(key=lambda n: (rank.get(self._by_role[n], 9), n))
            for n in ready:
                order.append(n)
                placed.add(n)
                del remaining[n]
        return tuple(order)

    def __eq__(self, other):
        if not isinstance(other, FiniteScm):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.exogenous.names == other.exogenous.names
            and tuple(v.support for v in self.exogenous.variables)
            == tuple(v.support for v in other.exogenous.variables)
            and self.exogenous.pmf == other.exogenous.pmf
            and {n: (f.parents, dict(f.table)) for n, f in self.functions.items()}
            == {n: (f.parents, dict(f.table)) for n, f in other.functions.items()}
            and self.separable == other.separable
            and self.declares == other.declares
        )


# -- intervention handling --------------------------------------------------


def _check_intervention(scm: FiniteScm, iv: Mapping) -> None:
    valid = set(scm.variables) | set(scm.component_names)
    for target, value in iv.items():
        if target not in valid:
            raise ScmError(f"unknown intervention target {target!r}")
        role = scm._by_role.get(target)
        if role in (ROLE_OUTCOME, ROLE_EXOGENOUS):
            raise ScmError(f"cannot intervene on {target!r} (role {role})")
        if value not in scm.support(target):
            raise ScmError(
                f"intervention value {value!r} outside support of {target!r}"
            )


def evaluate_world(scm: FiniteScm, exo: Mapping, iv: Mapping | None = None) -> dict:
    """Resolve every endogenous variable for one exogenous configuration.

    Intervened variables take their assigned values; everything else follows
    its structural function in topological order.  Exposure components
    default to A's resolved value unless individually assigned.
    """
    iv = iv or {}
    _check_intervention(scm, iv)
    env = dict(zip(scm.exogenous.names, exo)) if not isinstance(exo, dict) else dict(exo)
    a_name = scm.exposure
    for name in scm.topo_order:
        if name in iv:
            env[name] = iv[name]
        else:
            f = scm.functions[name]
            parent_values = []
            for p in f.parents:
                if p in env:
                    parent_values.append(env[p])
                elif p in scm.component_names:
                    env[p] = iv.get(p, iv.get(a_name, env[a_name]))
                    parent_values.append(env[p])
                else:
                    raise ScmError(f"unresolved parent {p!r} for {name}")
            env[name] = f(tuple(parent_values))
        if name == a_name:
            for comp in scm.component_names:
                env[comp] = iv.get(comp, iv.get(a_name, env[a_name]))
    return {n: env[n] for n in scm.topo_order}


# -- validation --------------------------------------------------------------


def validate_scm(scm: FiniteScm) -> ValidationReport:
    """Report every violated invariant; a valid model yields no violations.

    Positivity problems (zero-probability (A, M) or (A, L, M) cells, which
    empty the conditioning events of the identification formulas) are
    warnings, not violations.
    """
    report = ValidationReport()
    add = report.violations.append

    for role in (ROLE_EXPOSURE, ROLE_MEDIATOR, ROLE_OUTCOME):
        names = [v.name for v in scm.variables.values() if v.role == role]
        if len(names) != 1:
            add(f"expected exactly one {role} variable, found {names}")
    for role in (ROLE_BASELINE, ROLE_INTERMEDIATE):
        names = [v.name for v in scm.variables.values() if v.role == role]
        if len(names) > 1:
            add(f"at most one {role} variable allowed, found {names}")

    a = scm.roles.get(ROLE_EXPOSURE)
    if a and tuple(scm.variables[a].support) != (0, 1):
        add(f"exposure support must be (0, 1), found {scm.variables[a].support}")

    total = scm.exogenous.total()
    if abs(total - 1.0) > EPS_NUM:
        add(f"pmf sums to {total:.12g}")
    if any(p < 0 for p in scm.exogenous.pmf.values()):
        add("pmf has negative entries")
    expected_cells = 1
    for v in scm.exogenous.variables:
        expected_cells *= len(v.support)
    if len(scm.exogenous.pmf) != expected_cells:
        add(
            "exogenous pmf covers %d of %d configurations"
            % (len(scm.exogenous.pmf), expected_cells)
        )

    for name in scm.variables:
        if name not in scm.functions:
            add(f"no structural function for {name}")
    for name, f in scm.functions.items():
        if name not in scm.variables:
            add(f"function output {name} is not a declared variable")
            continue
        try:
            supports = [scm.support(p) for p in f.parents]
        except ScmError as exc:
            add(str(exc))
            continue
        expected = set(itertools.product(*supports)) if supports else {()}
        got = set(f.table)
        if expected - got:
            missing = sorted(expected - got, key=repr)[0]
            add(f"table for {name} missing entry for parents {missing}")
        if got - expected:
            extra = sorted(got - expected, key=repr)[0]
            add(f"table for {name} has spurious entry {extra}")
        out_support = set(scm.variables[name].support)
        for key in expected & got:
            if f.table[key] not in out_support:
                add(f"table for {name} maps {key} outside the support")
                break

    if scm.separable:
        a_name = scm.exposure
        comps = set(scm.component_names)
        for name, f in scm.functions.items():
            if name == a_name or name not in scm.variables:
                continue
            if scm._by_role[name] in (ROLE_BASELINE,):
                continue
            if a_name in f.parents and (comps & set(f.parents)):
                add(f"function for {name} mixes A with exposure components")
            if a_name in f.parents:
                add(
                    f"separable model: function for {name} must consume "
                    f"exposure components, not {a_name}"
                )

    try:
        scm._topological_order()
    except ScmError as exc:
        add(str(exc))

    if report.ok:
        _positivity_warnings(scm, report)
    return report


def _positivity_warnings(scm: FiniteScm, report: ValidationReport) -> None:
    obs = observational_joint(scm)
    names = [scm.exposure]
    if scm.intermediate:
        names.append(scm.intermediate)
    names.append(scm.mediator)
    marg = obs.marginal(tuple(names))
    for assignment, p in marg.cells():
        if p <= 0.0:
            cell = ", ".join(f"{n}={v}" for n, v in zip(names, assignment))
            report.warnings.append(f"P({cell}) = 0")


# -- exact joints -------------------------------------------------------------


def format_query_label(var: str, iv: Mapping, order: Sequence[str]) -> str:
    if not iv:
        return var
    pos = {n: i for i, n in enumerate(order)}
    keys = sorted(iv, key=lambda k: (pos.get(k, len(pos)), k))
    inner = ",".join(f"{k}={iv[k]}" for k in keys)
    return f"{var}({inner})"


def counterfactual_joint(
    scm: FiniteScm,
    queries: Sequence[tuple],
    cell_cap: int = 10_000_000,
) -> JointTable:
    """Exact joint law of counterfactual variables.

    Each query is ``(variable, intervention)``.  One exogenous configuration
    fixes every queried world simultaneously, so the returned table is the
    true cross-world joint.  Duplicate queries get a ``#k`` label suffix.
    """
    order = scm.topo_order + tuple(scm.component_names)
    labels, supports, seen = [], [], {}
    parsed = []
    for q in queries:
        var, iv = q[0], dict(q[1]) if len(q) > 1 and q[1] else {}
        _check_intervention(scm, iv)
        if var not in scm.variables and var not in scm.component_names:
            raise ScmError(f"unknown query variable {var!r}")
        label = format_query_label(var, iv, order)
        if label in seen:
            seen[label] += 1
            label = f"{label}#{seen[label]}"
        else:
            seen[label] = 1
        labels.append(label)
        supports.append(tuple(scm.support(var)))
        parsed.append((var, iv))

    n_cells = 1
    for s in supports:
        n_cells *= len(s)
    if n_cells > cell_cap:
        raise ScmError(f"table too large: {n_cells} cells exceeds cap {cell_cap}")

    table = JointTable.zeros(labels, supports)
    # distinct interventions evaluated once per exogenous configuration
    distinct = {}
    for var, iv in parsed:
        distinct.setdefault(tuple(sorted(iv.items(), key=repr)), iv)
    for config, p in scm.exogenous.configs():
        worlds = {
            key: evaluate_world(scm, dict(zip(scm.exogenous.names, config)), iv)
            for key, iv in distinct.items()
        }
        values = []
        for var, iv in parsed:
            world = worlds[tuple(sorted(iv.items(), key=repr))]
            if var in world:
                values.append(world[var])
            else:  # exposure component
                values.append(iv.get(var, iv.get(scm.exposure, world[scm.exposure])))
        table.add(tuple(values), p)
    table.freeze()
    return table


def observational_joint(scm: FiniteScm) -> JointTable:
    """Exact law of the endogenous variables under no intervention."""
    return counterfactual_joint(scm, [(n, {}) for n in scm.topo_order])


def conditional(table: JointTable, targets: Sequence[str], given: Mapping):
    """Exact Bayes conditioning; see JointTable.condition."""
    return table.condition(dict(given)).marginal(tuple(targets))


def conditional_mean(table: JointTable, target: str, given: Mapping | None = None) -> float:
    cond = table.condition(dict(given)) if given else table
    return cond.expectation(target)
