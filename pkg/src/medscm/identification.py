"""Identification formulas evaluated on observational distributions.

All formulas are exact sums over a canonical five-axis array P[c, a, l, m, y];
absent baseline or intermediate variables become degenerate size-one axes,
which makes the documented degenerate-L collapses hold by construction.

Formula catalogue (risk-difference scale; Q is the mediation formula):

    formula1        Q(1,1) - Q(1,0)                 indirect, no-L case
    formula2        Q(1,0) - Q(0,0)                 direct, no-L case
    q_total         Q(1,1) - Q(0,0)                 total effect, no-L case
    formula3        Q^L(1,1) - Q^L(1,0)             interventional indirect
    formula4        Q^L(1,0) - Q^L(0,0)             interventional direct
    qte_contrast    Q^TE(1) - Q^TE(0)               total effect via g-formula
    qcde_contrast   Q^CDE(1,m') - Q^CDE(0,m')       controlled direct
    pe_contrast     qte_contrast - qcde_contrast    portion eliminated
    formula5        qte_contrast - qcde_contrast    natural indirect under the
                                                    no-interaction condition
    q1_*            contrasts of Q1(a',a'')         joint (L,M) transport
    q2_*            contrasts of Q2(a',a'')         M|L transport, L at a'
    q3_*            contrasts of Q3(a',a'',a''')    M|L at a'', L at a'''

The Q3 component contrasts are wired so that each formula matches its
estimand (q3_l varies the L law, q3_m varies the M|L law); the same three
contrasts serve both the three-component separable effects and the
path-specific effects, whose identifying formulas are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import FiniteScm, observational_joint
from .tables import JointTable, PositivityError


class NotIdentifiedError(LookupError):
    pass


class ObsDistribution:
    """A joint law over (C, A, [L], M, Y) with declared roles."""

    def __init__(self, table: JointTable, roles: Mapping[str, str]):
        self.roles = dict(roles)  # role -> variable name
        for role in ("exposure", "mediator", "outcome"):
            if role not in self.roles:
                raise ValueError(f"role {role} missing from distribution")
        self.names = {v: k for k, v in self.roles.items()}
        order, self.present = [], {}
        for role in ("baseline", "exposure", "intermediate", "mediator", "outcome"):
            name = self.roles.get(role)
            self.present[role] = name is not None
            if name is not None:
                order.append(name)
        base = table.marginal(order)
        probs = base.probs
        supports = list(base.supports)
        # insert degenerate axes for absent baseline / intermediate
        axis = 0
        for role in ("baseline", "exposure", "intermediate", "mediator", "outcome"):
            if not self.present[role]:
                probs = np.expand_dims(probs, axis)
                supports.insert(axis, (0,))
            axis += 1
        self.p = probs
        self.supports = tuple(tuple(s) for s in supports)
        total = float(self.p.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution sums to {total:.12g}")
        try:
            self.y_values = np.asarray(self.supports[4], dtype=float)
        except (TypeError, ValueError):
            raise ValueError("outcome support must be numeric")

    @classmethod
    def from_scm(cls, scm: FiniteScm) -> "ObsDistribution":
        roles = {}
        for role_key, role_name in (
            ("baseline", "baseline"),
            ("exposure", "exposure"),
            ("intermediate", "intermediate"),
            ("mediator", "mediator"),
            ("outcome", "outcome"),
        ):
            name = scm.roles.get(role_name)
            if name:
                roles[role_key] = name
        return cls(observational_joint(scm), roles)

    # axis order: 0=C, 1=A, 2=L, 3=M, 4=Y
    def _cell_name(self, c=None, a=None, l=None, m=None) -> dict:
        out = {}
        if a is not None:
            out[self.roles["exposure"]] = self.supports[1][a]
        if l is not None and self.present["intermediate"]:
            out[self.roles["intermediate"]] = self.supports[2][l]
        if m is not None:
            out[self.roles["mediator"]] = self.supports[3][m]
        if c is not None and self.present["baseline"]:
            out[self.roles["baseline"]] = self.supports[0][c]
        return out

    def a_index(self, value) -> int:
        return self.supports[1].index(value)

    def m_index(self, value) -> int:
        return self.supports[3].index(value)

    @property
    def l_size(self) -> int:
        return len(self.supports[2])


def _pc(dist: ObsDistribution) -> np.ndarray:
    return dist.p.sum(axis=(1, 2, 3, 4))


def _ey(dist: ObsDistribution, c: int, a: int, m: int, l: int | None = None) -> float:
    """E(Y | A, M, C) marginalizing L, or E(Y | A, L, M, C) when l given."""
    if l is None:
        block = dist.p[c, a, :, m, :].sum(axis=0)
        cell = dist._cell_name(c=c, a=a, m=m)
    else:
        block = dist.p[c, a, l, m, :]
        cell = dist._cell_name(c=c, a=a, l=l, m=m)
    denom = float(block.sum())
    if denom <= 0.0:
        raise PositivityError(cell)
    return float(np.dot(dist.y_values, block)) / denom


def _stratum_mass(dist: ObsDistribution, c: int, a: int, l: int | None = None) -> float:
    if l is None:
        return float(dist.p[c, a].sum())
    return float(dist.p[c, a, l].sum())


def q_mediation(dist: ObsDistribution, a_outer, a_inner) -> float:
    """Q(a', a'') = E[ E{ E(Y | A=a', M, C) | A=a'', C } ]."""
    a1, a2 = dist.a_index(a_outer), dist.a_index(a_inner)
    pc = _pc(dist)
    total = 0.0
    for c in range(len(pc)):
        if pc[c] <= 0.0:
            continue
        denom = _stratum_mass(dist, c, a2)
        if denom <= 0.0:
            raise PositivityError(dist._cell_name(c=c, a=a2))
        for m in range(len(dist.supports[3])):
            w = float(dist.p[c, a2, :, m, :].sum()) / denom
            if w <= 0.0:
                continue
            total += pc[c] * w * _ey(dist, c, a1, m)
    return total


def q_l(dist: ObsDistribution, a_outer, a_inner) -> float:
    """Q^L(a', a''): M's law at A=a'' (not given L), L's law at A=a'."""
    a1, a2 = dist.a_index(a_outer), dist.a_index(a_inner)
    pc = _pc(dist)
    total = 0.0
    for c in range(len(pc)):
        if pc[c] <= 0.0:
            continue
        denom_m = _stratum_mass(dist, c, a2)
        if denom_m <= 0.0:
            raise PositivityError(dist._cell_name(c=c, a=a2))
        denom_l = _stratum_mass(dist, c, a1)
        if denom_l <= 0.0:
            raise PositivityError(dist._cell_name(c=c, a=a1))
        for m in range(len(dist.supports[3])):
            wm = float(dist.p[c, a2, :, m, :].sum()) / denom_m
            if wm <= 0.0:
                continue
            for l in range(dist.l_size):
                wl = float(dist.p[c, a1, l].sum()) / denom_l
                if wl <= 0.0:
                    continue
                total += pc[c] * wm * wl * _ey(dist, c, a1, m, l)
    return total


def q_te(dist: ObsDistribution, a_val) -> float:
    """Q^TE(a'): full sequential g-formula, collapses to E[E(Y|A=a',C)]."""
    a1 = dist.a_index(a_val)
    pc = _pc(dist)
    total = 0.0
    for c in range(len(pc)):
        if pc[c] <= 0.0:
            continue
        denom_a = _stratum_mass(dist, c, a1)
        if denom_a <= 0.0:
            raise PositivityError(dist._cell_name(c=c, a=a1))
        for l in range(dist.l_size):
            wl = float(dist.p[c, a1, l].sum()) / denom_a
            if wl <= 0.0:
                continue
            denom_l = _stratum_mass(dist, c, a1, l)
            for m in range(len(dist.supports[3])):
                wm = float(dist.p[c, a1, l, m].sum()) / denom_l
                if wm <= 0.0:
                    continue
                total += pc[c] * wl * wm * _ey(dist, c, a1, m, l)
    return total


def q_cde(dist: ObsDistribution, a_val, m_prime) -> float:
    """Q^CDE(a', m'): requires P(M=m'|L,A=a',C) > 0 on every positive
    (L, A=a', C) cell."""
    a1, mp = dist.a_index(a_val), dist.m_index(m_prime)
    pc = _pc(dist)
    total = 0.0
    for c in range(len(pc)):
        if pc[c] <= 0.0:
            continue
        denom_a = _stratum_mass(dist, c, a1)
        if denom_a <= 0.0:
            raise PositivityError(dist._cell_name(c=c, a=a1))
        for l in range(dist.l_size):
            wl = float(dist.p[c, a1, l].sum()) / denom_a
            if wl <= 0.0:
                continue
            if float(dist.p[c, a1, l, mp].sum()) <= 0.0:
                raise PositivityError(dist._cell_name(c=c, a=a1, l=l, m=mp))
            total += pc[c] * wl * _ey(dist, c, a1, mp, l)
    return total


def formula5(dist: ObsDistribution, m_prime) -> float:
    """Q^TE(1) - Q^TE(0) - Q^CDE(1,m') + Q^CDE(0,m')."""
    return (
        q_te(dist, 1)
        - q_te(dist, 0)
        - q_cde(dist, 1, m_prime)
        + q_cde(dist, 0, m_prime)
    )


def q_separable(dist: ObsDistribution, variant: int, *args) -> float:
    """Q1(a',a''), Q2(a',a''), or Q3(a',a'',a''') per the variant."""
    pc = _pc(dist)
    if variant == 1:
        a1, a2 = (dist.a_index(v) for v in args)
        total = 0.0
        for c in range(len(pc)):
            if pc[c] <= 0.0:
                continue
            denom = _stratum_mass(dist, c, a2)
            if denom <= 0.0:
                raise PositivityError(dist._cell_name(c=c, a=a2))
            for l in range(dist.l_size):
                for m in range(len(dist.supports[3])):
                    w = float(dist.p[c, a2, l, m].sum()) / denom
                    if w <= 0.0:
                        continue
                    total += pc[c] * w * _ey(dist, c, a1, m, l)
        return total
    if variant == 2:
        a1, a2 = args
        return q_separable(dist, 3, a1, a2, a1)
    if variant == 3:
        a1, a2, a3 = (dist.a_index(v) for v in args)
        total = 0.0
        for c in range(len(pc)):
            if pc[c] <= 0.0:
                continue
            denom_l = _stratum_mass(dist, c, a3)
            if denom_l <= 0.0:
                raise PositivityError(dist._cell_name(c=c, a=a3))
            for l in range(dist.l_size):
                wl = float(dist.p[c, a3, l].sum()) / denom_l
                if wl <= 0.0:
                    continue
                denom_m = _stratum_mass(dist, c, a2, l)
                if denom_m <= 0.0:
                    raise PositivityError(dist._cell_name(c=c, a=a2, l=l))
                for m in range(len(dist.supports[3])):
                    wm = float(dist.p[c, a2, l, m].sum()) / denom_m
                    if wm <= 0.0:
                        continue
                    total += pc[c] * wl * wm * _ey(dist, c, a1, m, l)
        return total
    raise ValueError(f"unknown separable variant {variant}")


def valid_m_primes(dist: ObsDistribution) -> list:
    """Mediator levels satisfying the Q^CDE positivity requirement in both arms."""
    out = []
    for m_val in dist.supports[3]:
        try:
            q_cde(dist, 1, m_val)
            q_cde(dist, 0, m_val)
        except PositivityError:
            continue
        out.append(m_val)
    return out


def _need_m_prime(dist: ObsDistribution, params: Mapping):
    if params.get("m_prime") is not None:
        return params["m_prime"]
    valid = valid_m_primes(dist)
    if not valid:
        raise PositivityError({dist.roles["mediator"]: "every level"})
    return valid[0]


FORMULAS = {
    "formula1": ("Q(1,1) - Q(1,0)", lambda d, p: q_mediation(d, 1, 1) - q_mediation(d, 1, 0)),
    "formula2": ("Q(1,0) - Q(0,0)", lambda d, p: q_mediation(d, 1, 0) - q_mediation(d, 0, 0)),
    "q_total": ("Q(1,1) - Q(0,0)", lambda d, p: q_mediation(d, 1, 1) - q_mediation(d, 0, 0)),
    "formula3": ("Q^L(1,1) - Q^L(1,0)", lambda d, p: q_l(d, 1, 1) - q_l(d, 1, 0)),
    "formula4": ("Q^L(1,0) - Q^L(0,0)", lambda d, p: q_l(d, 1, 0) - q_l(d, 0, 0)),
    "qte_contrast": ("Q^TE(1) - Q^TE(0)", lambda d, p: q_te(d, 1) - q_te(d, 0)),
    "qcde_contrast": (
        "Q^CDE(1,m') - Q^CDE(0,m')",
        lambda d, p: q_cde(d, 1, _need_m_prime(d, p)) - q_cde(d, 0, _need_m_prime(d, p)),
    ),
    "pe_contrast": (
        "Q^TE contrast - Q^CDE contrast",
        lambda d, p: (q_te(d, 1) - q_te(d, 0))
        - (q_cde(d, 1, _need_m_prime(d, p)) - q_cde(d, 0, _need_m_prime(d, p))),
    ),
    "formula5": (
        "Q^TE(1) - Q^TE(0) - Q^CDE(1,m') + Q^CDE(0,m')",
        lambda d, p: formula5(d, _need_m_prime(d, p)),
    ),
    "q1_indirect": ("Q1(1,1) - Q1(1,0)", lambda d, p: q_separable(d, 1, 1, 1) - q_separable(d, 1, 1, 0)),
    "q1_direct": ("Q1(1,0) - Q1(0,0)", lambda d, p: q_separable(d, 1, 1, 0) - q_separable(d, 1, 0, 0)),
    "q2_indirect": ("Q2(1,1) - Q2(1,0)", lambda d, p: q_separable(d, 2, 1, 1) - q_separable(d, 2, 1, 0)),
    "q2_direct": ("Q2(1,0) - Q2(0,0)", lambda d, p: q_separable(d, 2, 1, 0) - q_separable(d, 2, 0, 0)),
    "q3_direct": ("Q3(1,0,0) - Q3(0,0,0)", lambda d, p: q_separable(d, 3, 1, 0, 0) - q_separable(d, 3, 0, 0, 0)),
    "q3_l": ("Q3(1,1,1) - Q3(1,1,0)", lambda d, p: q_separable(d, 3, 1, 1, 1) - q_separable(d, 3, 1, 1, 0)),
    "q3_m": ("Q3(1,1,0) - Q3(1,0,0)", lambda d, p: q_separable(d, 3, 1, 1, 0) - q_separable(d, 3, 1, 0, 0)),
}


def evaluate_formula(dist: ObsDistribution, formula_id: str, params: Mapping | None = None) -> float:
    if formula_id not in FORMULAS:
        raise NotIdentifiedError(f"unknown formula {formula_id!r}")
    _, fn = FORMULAS[formula_id]
    return fn(dist, dict(params or {}))


# -- model classes and dispatch -------------------------------------------------

MODEL_CLASSES = (
    "NPSEM-IE",
    "FFRCISTG",
    "FFRCISTG+A5",
    "popFFRCISTG",
    "FFRCISTG-sep",
    "FFRCISTG-L",
    "FFRCISTG-L+A5",
    "NPSEM-IE-L",
    "NPSEM-IE-LM",
    "popFFRCISTG-6d",
    "popFFRCISTG-6e",
    "popFFRCISTG-6f",
)

# defining assumption sets; classify() checks these, identify() reports them
CLASS_SETS = {
    "FFRCISTG": frozenset({"A1", "A2", "A3"}),
    "FFRCISTG+A5": frozenset({"A1", "A2", "A3", "A5"}),
    "NPSEM-IE": frozenset({"NPSEM-IE-factorization", "A1", "A2", "A3", "A4"}),
    "popFFRCISTG": frozenset({"A1", "A2", "A3", "A8", "A9"}),
    "FFRCISTG-sep": frozenset({"A1", "A2", "A3", "A4", "A6", "A7", "A8", "A9"}),
    "FFRCISTG-L": frozenset({"A1", "A2", "A10", "SA1", "SA2", "SA3"}),
    "FFRCISTG-L+A5": frozenset({"A1", "A2", "A10", "SA1", "SA2", "SA3", "A5"}),
    "NPSEM-IE-L": frozenset(
        {"NPSEM-IE-factorization", "A1", "A2", "A4", "A4L", "A10", "SA1", "SA2", "SA3"}
    ),
    "NPSEM-IE-LM": frozenset({"A1", "A2", "A4L", "A10", "SA1", "SA2", "SA3"}),
    "popFFRCISTG-6d": frozenset({"A1", "A2", "SA1", "SA2", "SA3", "DIS6D"}),
    "popFFRCISTG-6e": frozenset({"A1", "A2", "SA1", "SA2", "SA3", "DIS6E"}),
    "popFFRCISTG-6f": frozenset({"A1", "A2", "SA1", "SA2", "SA3", "DIS6F"}),
}

# set-inclusion implications (stronger -> weaker); classify output must be
# upward closed along these arrows
CLASS_ARROWS = (
    ("NPSEM-IE", "FFRCISTG"),
    ("FFRCISTG+A5", "FFRCISTG"),
    ("popFFRCISTG", "FFRCISTG"),
    ("FFRCISTG-sep", "popFFRCISTG"),
    ("FFRCISTG-L+A5", "FFRCISTG-L"),
    ("NPSEM-IE-L", "NPSEM-IE-LM"),
    ("NPSEM-IE-LM", "FFRCISTG-L"),
)


def reachable_classes(declared: str) -> frozenset:
    """declared plus every class it implies along the arrows."""
    if declared not in MODEL_CLASSES:
        raise NotIdentifiedError(f"unknown model class {declared!r}")
    out = {declared}
    changed = True
    while changed:
        changed = False
        for a, b in CLASS_ARROWS:
            if a in out and b not in out:
                out.add(b)
                changed = True
    return frozenset(out)


@dataclass(frozen=True)
class DispatchRow:
    effect: str
    model_class: str
    formula_id: str
    note: str = ""


DISPATCH = (
    DispatchRow("TE", "FFRCISTG", "q_total"),
    DispatchRow("TE", "FFRCISTG-L", "qte_contrast"),
    DispatchRow("NIE", "NPSEM-IE", "formula1"),
    DispatchRow("NIE", "FFRCISTG+A5", "formula1", "equals IIE under A5"),
    DispatchRow("NIE", "FFRCISTG-sep", "formula1", "equals SIE under isolation"),
    DispatchRow("NIE", "FFRCISTG-L+A5", "formula5"),
    DispatchRow("NDE", "NPSEM-IE", "formula2"),
    DispatchRow("NDE", "FFRCISTG+A5", "formula2"),
    DispatchRow("NDE", "FFRCISTG-sep", "formula2"),
    DispatchRow("NDE", "FFRCISTG-L+A5", "qcde_contrast", "NDE = CDE(m') under A5"),
    DispatchRow("IIE", "FFRCISTG", "formula1"),
    DispatchRow("IDE", "FFRCISTG", "formula2"),
    DispatchRow("IIE", "FFRCISTG-L", "formula3"),
    DispatchRow("IDE", "FFRCISTG-L", "formula4"),
    DispatchRow("SIE", "popFFRCISTG", "formula1"),
    DispatchRow("SDE", "popFFRCISTG", "formula2"),
    DispatchRow("SIE", "popFFRCISTG-6d", "q1_indirect"),
    DispatchRow("SDE", "popFFRCISTG-6d", "q1_direct"),
    DispatchRow("SIE", "popFFRCISTG-6e", "q2_indirect"),
    DispatchRow("SDE", "popFFRCISTG-6e", "q2_direct"),
    DispatchRow("CDE", "FFRCISTG", "qcde_contrast"),
    DispatchRow("PE", "FFRCISTG", "pe_contrast"),
    DispatchRow("CDE", "FFRCISTG-L", "qcde_contrast"),
    DispatchRow("PE", "FFRCISTG-L", "pe_contrast"),
    DispatchRow("SE_direct", "popFFRCISTG-6f", "q3_direct"),
    DispatchRow("SE_L", "popFFRCISTG-6f", "q3_l"),
    DispatchRow("SE_M", "popFFRCISTG-6f", "q3_m"),
    DispatchRow("JM_direct", "NPSEM-IE-LM", "q1_direct"),
    DispatchRow("JM_LM", "NPSEM-IE-LM", "q1_indirect"),
    DispatchRow("PSE_direct", "NPSEM-IE-L", "q3_direct"),
    DispatchRow("PSE_L", "NPSEM-IE-L", "q3_l"),
    DispatchRow("PSE_M", "NPSEM-IE-L", "q3_m"),
)


@dataclass(frozen=True)
class IdentifiedValue:
    effect: str
    model_class: str
    formula_id: str
    formula: str
    value: float
    assumptions: tuple
    params: tuple = field(default=())


def identify(
    dist: ObsDistribution,
    effect: str,
    model_class: str,
    params: Mapping | None = None,
) -> IdentifiedValue:
    """Evaluate the identifying formula for (effect, declared class).

    The declared class is accepted for a dispatch row when it equals the
    row's class or implies it along the class arrows.
    """
    params = dict(params or {})
    accepted = reachable_classes(model_class)
    rows = [r for r in DISPATCH if r.effect == effect and r.model_class in accepted]
    if not rows:
        if effect in ("NIE", "NDE") and model_class in ("FFRCISTG", "popFFRCISTG"):
            raise NotIdentifiedError(
                f"{effect} is not identified under {model_class}: only upper and "
                "lower bounds exist there, and bounds are out of scope"
            )
        known = {r.effect for r in DISPATCH}
        if effect not in known:
            raise NotIdentifiedError(f"unknown effect {effect!r}")
        raise NotIdentifiedError(
            f"({effect}, {model_class}) not identified under declared class"
        )
    row = rows[0]
    value = evaluate_formula(dist, row.formula_id, params)
    return IdentifiedValue(
        effect=effect,
        model_class=model_class,
        formula_id=row.formula_id,
        formula=FORMULAS[row.formula_id][0],
        value=value,
        assumptions=tuple(sorted(CLASS_SETS[row.model_class])),
        params=tuple(sorted(params.items())),
    )


def dispatch_table_text() -> str:
    """The (effect, class) -> formula mapping, printable for audit."""
    lines = ["effect       model class        formula"]
    for r in DISPATCH:
        note = f"   ({r.note})" if r.note else ""
        lines.append(f"{r.effect:<12} {r.model_class:<18} {FORMULAS[r.formula_id][0]}{note}")
    return "\n".join(lines)
