"""Plain-text model files.

Sections, in order:

    [variables]    name : role : v1 v2 ...
    [exogenous]    vars: e1 e2 ...        then rows  "v1 v2 ... = prob"
    [functions]    "out <- p1 p2 ..."     then rows  "v1 v2 ... -> value"
    [separable]    components: A_M A_Y    (optional)
    [declares]     one claimed model-class tag per line (optional)

Values that parse as integers are integers; anything else is a label.
Round trip guarantee: parse(serialize(m)) == m.
"""

from __future__ import annotations

from .core import (
    ExogenousSpace,
    FiniteScm,
    FiniteVariable,
    ScmError,
    SeparableExposure,
    StructuralFunction,
)

ROLE_ALIASES = {
    "c": "baseline",
    "a": "exposure",
    "l": "intermediate",
    "m": "mediator",
    "y": "outcome",
    "e": "exogenous",
    "eps": "exogenous",
}


def _parse_value(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def _fmt(value) -> str:
    return str(value)


def parse_model(text: str, name: str = "model") -> FiniteScm:
    section = None
    variables: list[FiniteVariable] = []
    exo_names: list[str] = []
    exo_pmf: dict = {}
    functions: list[StructuralFunction] = []
    current_fn = None  # (output, parents, table)
    separable = None
    declares: set[str] = set()

    def close_fn():
        nonlocal current_fn
        if current_fn is not None:
            out, parents, table = current_fn
            functions.append(StructuralFunction(out, tuple(parents), table))
            current_fn = None

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            close_fn()
            section = line[1:-1].strip().lower()
            continue
        if section == "variables":
            parts = [p.strip() for p in line.split(":")]
            if len(parts) != 3:
                raise ScmError(f"bad variable line: {raw!r}")
            vname, role, support = parts
            role = ROLE_ALIASES.get(role.lower(), role.lower())
            variables.append(
                FiniteVariable(vname, role, tuple(_parse_value(t) for t in support.split()))
            )
        elif section == "exogenous":
            if line.lower().startswith("vars:"):
                exo_names = line.split(":", 1)[1].split()
                continue
            if "=" not in line:
                raise ScmError(f"bad exogenous row: {raw!r}")
            lhs, rhs = line.rsplit("=", 1)
            config = tuple(_parse_value(t) for t in lhs.split())
            exo_pmf[config] = float(rhs)
        elif section == "functions":
            if "<-" in line:
                close_fn()
                out, parents = line.split("<-", 1)
                current_fn = (out.strip(), parents.split(), {})
            elif "->" in line:
                if current_fn is None:
                    raise ScmError(f"table row before any function header: {raw!r}")
                lhs, rhs = line.rsplit("->", 1)
                key = tuple(_parse_value(t) for t in lhs.split())
                current_fn[2][key] = _parse_value(rhs.strip())
            else:
                raise ScmError(f"bad function line: {raw!r}")
        elif section == "separable":
            if line.lower().startswith("components:"):
                separable = SeparableExposure(tuple(line.split(":", 1)[1].split()))
            else:
                raise ScmError(f"bad separable line: {raw!r}")
        elif section == "declares":
            declares.add(line)
        else:
            raise ScmError(f"content outside any section: {raw!r}")
    close_fn()

    exo_vars = [v for v in variables if v.role == "exogenous"]
    by_name = {v.name: v for v in exo_vars}
    try:
        ordered = [by_name[n] for n in exo_names]
    except KeyError as exc:
        raise ScmError(f"exogenous vars line names undeclared variable {exc}")
    endo = [v for v in variables if v.role != "exogenous"]
    return FiniteScm(
        endo,
        ExogenousSpace(ordered, exo_pmf),
        functions,
        separable=separable,
        declares=frozenset(declares),
        name=name,
    )


def serialize_model(scm: FiniteScm) -> str:
    lines = [f"# model: {scm.name}", "[variables]"]
    for v in scm.variables.values():
        lines.append(f"{v.name} : {v.role} : " + " ".join(_fmt(x) for x in v.support))
    for v in scm.exogenous.variables:
        lines.append(f"{v.name} : exogenous : " + " ".join(_fmt(x) for x in v.support))
    lines.append("[exogenous]")
    lines.append("vars: " + " ".join(scm.exogenous.names))
    for config, p in scm.exogenous.all_configs():
        lines.append(" ".join(_fmt(x) for x in config) + f" = {p!r}")
    lines.append("[functions]")
    for out in scm.topo_order:
        f = scm.functions[out]
        lines.append(f"{out} <- " + " ".join(f.parents))
        for key in sorted(f.table, key=repr):
            lines.append(
                " ".join(_fmt(x) for x in key) + " -> " + _fmt(f.table[key])
            )
    if scm.separable:
        lines.append("[separable]")
        lines.append("components: " + " ".join(scm.separable.components))
    if scm.declares:
        lines.append("[declares]")
        for tag in sorted(scm.declares):
            lines.append(tag)
    return "\n".join(lines) + "\n"


def load_model(path: str) -> FiniteScm:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stem = path.rsplit("/", 1)[-1]
    return parse_model(text, name=stem.rsplit(".", 1)[0])


def save_model(scm: FiniteScm, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(scm))
