"""MPS-subset reader producing MblpInstance objects.

Supported: NAME, ROWS (N/L/G/E), COLUMNS with INTORG/INTEND integer
markers, RHS, BOUNDS (UP, LO, BV), ENDATA.  G rows are negated into "<="
form and E rows are split into a <= / >= pair.  Integer-marked (or BV)
variables must be binary; continuous variables need a finite nonnegative
upper bound since the model requires y in [0, ybar].

Anything else (RANGES, OBJSENSE, SOS, free variables, ...) raises
UnsupportedMpsFeatureError naming the offending section or bound type.
"""

from __future__ import annotations

import numpy as np

from dccut.instance import MblpInstance

_KNOWN_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"}
_UNSUPPORTED_SECTIONS = {"RANGES", "OBJSENSE", "OBJSENSE:", "SOS", "QUADOBJ", "QMATRIX", "INDICATORS"}


class MpsFormatError(ValueError):
    pass


class UnsupportedMpsFeatureError(MpsFormatError):
    """A structurally valid MPS feature this reader does not model."""

    def __init__(self, feature: str, detail: str = ""):
        self.feature = feature
        msg = f"unsupported MPS feature: {feature}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def parse_mps(text: str, name: str = "") -> MblpInstance:
    objective_row: str | None = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    col_order: list[str] = []
    col_is_int: dict[str, bool] = {}
    entries: dict[tuple[str, str], float] = {}
    obj_coef: dict[str, float] = {}
    rhs: dict[str, float] = {}
    upper: dict[str, float] = {}
    lower: dict[str, float] = {}
    prob_name = name

    section = None
    int_mode = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = not raw[0].isspace()
        toks = raw.split()
        if is_header:
            head = toks[0].upper()
            if head in _UNSUPPORTED_SECTIONS:
                raise UnsupportedMpsFeatureError(head)
            if head not in _KNOWN_SECTIONS:
                raise UnsupportedMpsFeatureError(head, f"unknown section at line {line_no}")
            section = head
            if head == "NAME" and len(toks) > 1:
                prob_name = toks[1]
            if head == "ENDATA":
                break
            continue

        if section == "ROWS":
            sense, rname = toks[0].upper(), toks[1]
            if sense == "N":
                if objective_row is None:
                    objective_row = rname
                continue
            if sense not in ("L", "G", "E"):
                raise MpsFormatError(f"line {line_no}: unknown row sense {sense!r}")
            row_sense[rname] = sense
            row_order.append(rname)
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1].upper() == "'MARKER'":
                marker = toks[2].upper().strip("'")
                if marker == "INTORG":
                    int_mode = True
                elif marker == "INTEND":
                    int_mode = False
                else:
                    raise MpsFormatError(f"line {line_no}: unknown marker {toks[2]!r}")
                continue
            cname = toks[0]
            if cname not in col_is_int:
                col_is_int[cname] = int_mode
                col_order.append(cname)
            pairs = toks[1:]
            if len(pairs) % 2:
                raise MpsFormatError(f"line {line_no}: odd number of row/value tokens")
            for rname, val in zip(pairs[::2], pairs[1::2]):
                v = float(val)
                if rname == objective_row:
                    obj_coef[cname] = obj_coef.get(cname, 0.0) + v
                elif rname in row_sense:
                    entries[(rname, cname)] = entries.get((rname, cname), 0.0) + v
                else:
                    raise MpsFormatError(f"line {line_no}: entry for undeclared row {rname!r}")
        elif section == "RHS":
            pairs = toks[1:]
            if len(pairs) % 2:
                raise MpsFormatError(f"line {line_no}: odd number of row/value tokens")
            for rname, val in zip(pairs[::2], pairs[1::2]):
                if rname == objective_row:
                    continue
                if rname not in row_sense:
                    raise MpsFormatError(f"line {line_no}: RHS for undeclared row {rname!r}")
                rhs[rname] = float(val)
        elif section == "BOUNDS":
            btype = toks[0].upper()
            cname = toks[2]
            if cname not in col_is_int:
                raise MpsFormatError(f"line {line_no}: bound on undeclared column {cname!r}")
            if btype == "UP":
                upper[cname] = float(toks[3])
            elif btype == "LO":
                lower[cname] = float(toks[3])
            elif btype == "BV":
                col_is_int[cname] = True
                lower[cname] = 0.0
                upper[cname] = 1.0
            else:
                raise UnsupportedMpsFeatureError(f"bound type {btype}", f"line {line_no}")
        elif section == "NAME":
            continue
        else:
            raise MpsFormatError(f"line {line_no}: data before any section header")

    if objective_row is None:
        raise MpsFormatError("no objective (N) row declared")
    if not col_order:
        raise MpsFormatError("no columns declared")

    bin_cols = [cname for cname in col_order if col_is_int[cname]]
    cont_cols = [cname for cname in col_order if not col_is_int[cname]]
    if not bin_cols:
        raise MpsFormatError("instance declares no binary variables")

    for cname in bin_cols:
        lo = lower.get(cname, 0.0)
        up = upper.get(cname, 1.0)
        if lo != 0.0 or up != 1.0:
            raise UnsupportedMpsFeatureError(
                "general integer variable", f"{cname} has bounds [{lo}, {up}], need [0, 1]"
            )
    ybar = []
    for cname in cont_cols:
        if lower.get(cname, 0.0) != 0.0:
            raise UnsupportedMpsFeatureError("nonzero lower bound", f"continuous column {cname}")
        if cname not in upper:
            raise UnsupportedMpsFeatureError("free continuous variable", f"{cname} has no UP bound")
        if upper[cname] < 0:
            raise MpsFormatError(f"continuous column {cname} has negative upper bound")
        ybar.append(upper[cname])

    n, q = len(bin_cols), len(cont_cols)
    col_index = {cname: j for j, cname in enumerate(bin_cols + cont_cols)}

    G_rows: list[np.ndarray] = []
    h_vals: list[float] = []
    for rname in row_order:
        row = np.zeros(n + q)
        for cname in col_order:
            v = entries.get((rname, cname))
            if v:
                row[col_index[cname]] = v
        rv = rhs.get(rname, 0.0)
        sense = row_sense[rname]
        if sense in ("L", "E"):
            G_rows.append(row.copy())
            h_vals.append(rv)
        if sense in ("G", "E"):
            G_rows.append(-row)
            h_vals.append(-rv)

    G = np.array(G_rows) if G_rows else np.zeros((0, n + q))
    c = np.array([obj_coef.get(cname, 0.0) for cname in bin_cols])
    d = np.array([obj_coef.get(cname, 0.0) for cname in cont_cols])
    return MblpInstance(
        n=n,
        q=q,
        c=c,
        d=d,
        A=G[:, :n],
        B=G[:, n:],
        b=np.array(h_vals),
        ybar=np.array(ybar),
        name=prob_name or "unnamed",
    )
