"""Problem data model for mixed-binary linear programs.

An instance is

    min  c'x + d'y
    s.t. A x + B y <= b,   x in {0,1}^n,   y in [0, ybar],

and its linear relaxation K drops the binary restriction to x in [0,1]^n.
All rows are stored in "<=" form; inputs written as ">=" must be negated
by the caller (the MPS reader does this for G rows).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from dccut.cutgen import Cut

INT_TOL = 1e-6
FEAS_TOL = 1e-7


class InstanceFormatError(ValueError):
    """Malformed instance text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MblpInstance:
    """Immutable problem data (n binary vars, q continuous vars, m rows)."""

    n: int
    q: int
    c: np.ndarray
    d: np.ndarray
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    ybar: np.ndarray
    name: str = "unnamed"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one binary variable")
        if self.q < 0:
            raise ValueError("q must be nonnegative")
        object.__setattr__(self, "c", _freeze(np.atleast_1d(self.c)))
        object.__setattr__(self, "d", _freeze(np.atleast_1d(self.d)))
        object.__setattr__(self, "b", _freeze(np.atleast_1d(self.b)))
        object.__setattr__(self, "ybar", _freeze(np.atleast_1d(self.ybar)))
        m = self.b.shape[0]
        object.__setattr__(self, "A", _freeze(np.asarray(self.A, dtype=float).reshape(m, self.n)))
        object.__setattr__(self, "B", _freeze(np.asarray(self.B, dtype=float).reshape(m, self.q)))
        if self.c.shape != (self.n,):
            raise ValueError(f"c has length {self.c.shape[0]}, expected n={self.n}")
        if self.d.shape != (self.q,):
            raise ValueError(f"d has length {self.d.shape[0]}, expected q={self.q}")
        if self.ybar.shape != (self.q,):
            raise ValueError(f"ybar has length {self.ybar.shape[0]}, expected q={self.q}")
        if self.q and float(self.ybar.min()) < 0.0:
            raise ValueError("ybar must be entrywise nonnegative")

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def dim(self) -> int:
        return self.n + self.q

    def cost_vector(self) -> np.ndarray:
        """Objective over the concatenated (x, y) space."""
        return np.concatenate([self.c, self.d])

    def row_matrix(self) -> np.ndarray:
        """[A | B] as one dense m x (n+q) matrix."""
        return np.hstack([self.A, self.B]) if self.q else self.A.copy()

    def box_lower(self) -> np.ndarray:
        return np.zeros(self.dim)

    def box_upper(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n), self.ybar])


@dataclass(frozen=True)
class Point:
    """One point u = (x, y) of an instance's variable space."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _freeze(np.atleast_1d(self.x)))
        object.__setattr__(self, "y", _freeze(np.atleast_1d(self.y) if np.size(self.y) else np.zeros(0)))

    @classmethod
    def from_vector(cls, u: np.ndarray, n: int) -> "Point":
        u = np.asarray(u, dtype=float)
        return cls(x=u[:n], y=u[n:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @property
    def dim(self) -> int:
        return self.x.shape[0] + self.y.shape[0]


@dataclass(frozen=True)
class PolyState:
    """The relaxation polytope after `iteration` rounds of cutting.

    Wraps the base instance plus an append-only tuple of cuts; snapshots
    are immutable and safe to share across workers.
    """

    base: MblpInstance
    cuts: tuple = field(default_factory=tuple)
    iteration: int = 0

    def with_cuts(self, new_cuts: Iterable["Cut"]) -> "PolyState":
        """Next-iteration snapshot with `new_cuts` appended."""
        return PolyState(self.base, self.cuts + tuple(new_cuts), self.iteration + 1)

    def row_system(self) -> tuple[np.ndarray, np.ndarray]:
        """All rows (base + cuts) in "<=" form: returns (G, h) with G u <= h.

        Cuts are stored as coeffs'u >= rhs, so they enter negated.
        """
        G = self.base.row_matrix()
        h = self.base.b
        if self.cuts:
            Gc = np.array([-cut.coeffs for cut in self.cuts])
            hc = np.array([-cut.rhs for cut in self.cuts])
            G = np.vstack([G, Gc])
            h = np.concatenate([h, hc])
        return G, h

    def full_row_system(self) -> tuple[np.ndarray, np.ndarray]:
        """Like row_system but with the box bounds materialized as rows.

        Order: base rows, cut rows, then u_i <= upper_i, then -u_i <= 0.
        """
        G, h = self.row_system()
        dim = self.base.dim
        eye = np.eye(dim)
        G = np.vstack([G, eye, -eye])
        h = np.concatenate([h, self.base.box_upper(), np.zeros(dim)])
        return G, h


def evaluate_f(inst: MblpInstance, u: Point) -> float:
    """Objective value c'x + d'y."""
    val = float(inst.c @ u.x)
    if inst.q:
        val += float(inst.d @ u.y)
    return val


def is_in_K(state: PolyState, u: Point, tol: float = FEAS_TOL) -> bool:
    """Membership in the (cut-reduced) relaxation polytope, within tol."""
    inst = state.base
    if u.x.shape[0] != inst.n or u.y.shape[0] != inst.q:
        raise ValueError("point dimensions do not match instance")
    if float(u.x.min(initial=0.0)) < -tol or float(u.x.max(initial=0.0)) > 1.0 + tol:
        return False
    if inst.q and (float((u.y - inst.ybar).max()) > tol or float(u.y.min()) < -tol):
        return False
    vec = u.as_vector()
    G, h = state.row_system()
    if G.shape[0] and float((G @ vec - h).max()) > tol:
        return False
    return True


def is_in_S(state: PolyState, u: Point, int_tol: float = INT_TOL, feas_tol: float = FEAS_TOL) -> bool:
    """Membership in the mixed-binary feasible set: in K and x near-binary."""
    if not is_in_K(state, u, feas_tol):
        return False
    frac = np.abs(u.x - np.round(u.x))
    return bool(frac.max(initial=0.0) <= int_tol)


# ---------------------------------------------------------------------------
# Canonical text format
#
#   mblp <n> <q> <m>
#   c <n decimals>
#   d <q decimals>
#   b <m decimals>
#   ybar <q decimals>
#   <m lines: n A-entries followed by q B-entries>
#
# '#' starts a comment; blank lines are skipped.
# ---------------------------------------------------------------------------


def _numbers(tokens: list[str], line_no: int) -> np.ndarray:
    vals = []
    for tok in tokens:
        try:
            vals.append(float(tok))
        except ValueError:
            raise InstanceFormatError(f"non-numeric token {tok!r}", line_no) from None
    return np.array(vals)


def parse_instance(text: str, name: str = "unnamed") -> MblpInstance:
    """Parse the canonical instance format; errors carry line numbers."""
    lines: list[tuple[int, list[str]]] = []
    for idx, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((idx, content.split()))

    if not lines:
        raise InstanceFormatError("empty instance file")

    line_no, header = lines[0]
    if header[0] != "mblp" or len(header) != 4:
        raise InstanceFormatError("expected header 'mblp <n> <q> <m>'", line_no)
    try:
        n, q, m = (int(tok) for tok in header[1:])
    except ValueError:
        raise InstanceFormatError("header dimensions must be integers", line_no) from None

    expected = {"c": n, "d": q, "b": m, "ybar": q}
    vectors: dict[str, np.ndarray] = {}
    cursor = 1
    for label in ("c", "d", "b", "ybar"):
        if cursor >= len(lines):
            raise InstanceFormatError(f"missing '{label}' line", lines[-1][0])
        line_no, toks = lines[cursor]
        if toks[0] != label:
            raise InstanceFormatError(f"expected '{label}' line, found {toks[0]!r}", line_no)
        vec = _numbers(toks[1:], line_no)
        if vec.shape[0] != expected[label]:
            raise InstanceFormatError(
                f"'{label}' has {vec.shape[0]} entries, expected {expected[label]}", line_no
            )
        vectors[label] = vec
        cursor += 1

    rows = np.zeros((m, n + q))
    for i in range(m):
        if cursor >= len(lines):
            raise InstanceFormatError(f"missing constraint row {i + 1} of {m}", lines[-1][0])
        line_no, toks = lines[cursor]
        row = _numbers(toks, line_no)
        if row.shape[0] != n + q:
            raise InstanceFormatError(
                f"row {i + 1} has {row.shape[0]} entries, expected {n + q}", line_no
            )
        rows[i] = row
        cursor += 1

    if cursor != len(lines):
        raise InstanceFormatError("trailing content after last constraint row", lines[cursor][0])

    return MblpInstance(
        n=n,
        q=q,
        c=vectors["c"],
        d=vectors["d"],
        A=rows[:, :n],
        B=rows[:, n:],
        b=vectors["b"],
        ybar=vectors["ybar"],
        name=name,
    )


def serialize_instance(inst: MblpInstance) -> str:
    """Inverse of parse_instance; floats printed with repr so the
    round trip is bit-exact."""

    def fmt(vals: np.ndarray) -> str:
        return " ".join(repr(float(v)) for v in vals)

    out = [f"mblp {inst.n} {inst.q} {inst.m}"]
    out.append(("c " + fmt(inst.c)).rstrip())
    out.append(("d " + fmt(inst.d)).rstrip())
    out.append(("b " + fmt(inst.b)).rstrip())
    out.append(("ybar " + fmt(inst.ybar)).rstrip())
    rows = inst.row_matrix()
    for i in range(inst.m):
        out.append(fmt(rows[i]))
    return "\n".join(out) + "\n"
