"""Exact-rational scheduling instances, schedules, loads, and brute-force optima.

Everything here is exact: processing times, loads, and makespans are
`fractions.Fraction` values, and the optimizers enumerate assignments
exhaustively (with pruning) rather than approximating.  Machines and jobs are
0-indexed throughout the library; the 1-indexed names (M1, J1, ...) appear
only in the file format and CLI layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

#: A complete assignment: entry j is the machine of job j.
Schedule = tuple[int, ...]
#: A partial assignment: job index -> machine index.
PartialSchedule = Mapping[int, int]
#: Per-machine totals.
LoadVector = tuple[Fraction, ...]

#: Default cap on exhaustive-search leaf evaluations (m ** free jobs).
DEFAULT_BUDGET = 10**8


class InstanceFormatError(ValueError):
    """Malformed instance text; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive search would exceed its evaluation budget."""


def as_rational(value: RationalLike) -> Fraction:
    """Convert an int, Fraction, or string token ("3", "2/3", "0.01") exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class Instance:
    """A scheduling instance on unrelated machines.

    Attributes:
        p: m x n matrix of processing times; p[i][j] is the time of job j on
            machine i.
        initial_loads: length-m vector of preexisting machine loads.
    """

    p: tuple[tuple[Fraction, ...], ...]
    initial_loads: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.p) < 1:
            raise ValueError("an instance needs at least one machine")
        n = len(self.p[0])
        for row in self.p:
            if len(row) != n:
                raise ValueError("processing-time rows have unequal lengths")
            for value in row:
                if value < 0:
                    raise ValueError("negative processing time")
        if len(self.initial_loads) != len(self.p):
            raise ValueError("initial_loads length differs from machine count")
        for value in self.initial_loads:
            if value < 0:
                raise ValueError("negative initial load")

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return len(self.p[0])

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Iterable[RationalLike]],
        initial_loads: Iterable[RationalLike] | None = None,
    ) -> "Instance":
        """Build an Instance from per-machine rows of int/str/Fraction values."""
        p = tuple(tuple(as_rational(x) for x in row) for row in rows)
        if initial_loads is None:
            loads0 = tuple(Fraction(0) for _ in p)
        else:
            loads0 = tuple(as_rational(x) for x in initial_loads)
        return cls(p, loads0)


def _assignment_items(inst: Instance, assignment) -> Iterator[tuple[int, int]]:
    """Normalize a Schedule or PartialSchedule into (job, machine) pairs."""
    if isinstance(assignment, Mapping):
        items = assignment.items()
    else:
        if len(assignment) != inst.n:
            raise ValueError(
                f"schedule covers {len(assignment)} jobs, expected {inst.n}"
            )
        items = enumerate(assignment)
    for job, machine in items:
        if not 0 <= job < inst.n:
            raise ValueError(f"job index {job} out of range")
        if not 0 <= machine < inst.m:
            raise ValueError(f"machine index {machine} out of range")
        yield job, machine


def loads(inst: Instance, assignment) -> LoadVector:
    """Per-machine load totals of a (partial) assignment.

    Args:
        inst: the instance.
        assignment: a complete Schedule (sequence) or a PartialSchedule
            (mapping job -> machine); unassigned jobs contribute nothing.

    Returns:
        Tuple of m exact loads, including initial loads.
    """
    totals = list(inst.initial_loads)
    for job, machine in _assignment_items(inst, assignment):
        totals[machine] += inst.p[machine][job]
    return tuple(totals)


def makespan(inst: Instance, schedule: Sequence[int]) -> Fraction:
    """Maximum machine load of a complete schedule."""
    return max(loads(inst, schedule))


def opt(inst: Instance, budget: int = DEFAULT_BUDGET) -> tuple[Fraction, Schedule]:
    """Exact optimum makespan and its canonical witness schedule.

    The witness is the lexicographically smallest assignment vector among all
    minimizers (machine indices compared numerically, jobs in index order).

    Raises:
        BudgetExceededError: if m ** n exceeds the leaf-evaluation budget.
    """
    return constrained_opt(inst, {}, budget)


def constrained_opt(
    inst: Instance, fixed: PartialSchedule, budget: int = DEFAULT_BUDGET
) -> tuple[Fraction, Schedule]:
    """Exact optimum over completions of a fixed partial assignment.

    Args:
        inst: the instance.
        fixed: jobs whose machines are pinned; the search runs over the rest.
        budget: cap on m ** (free jobs).

    Returns:
        (makespan, schedule) where the schedule extends `fixed` and is the
        lexicographically smallest minimizer among completions.
    """
    pinned = dict(_assignment_items(inst, fixed))
    free = [j for j in range(inst.n) if j not in pinned]
    if inst.m ** len(free) > budget:
        raise BudgetExceededError(
            f"instance too large for exact search: {inst.m}**{len(free)} leaves"
        )

    cur = list(loads(inst, pinned))
    assign = [pinned.get(j, -1) for j in range(inst.n)]
    best_ms: Fraction | None = None
    best: Schedule | None = None

    def dfs(idx: int, cur_max: Fraction) -> None:
        nonlocal best_ms, best
        if best_ms is not None and cur_max >= best_ms:
            return
        if idx == len(free):
            # Strict improvement only, so the first optimum found in DFS
            # (= lexicographic) order is kept as the canonical witness.
            best_ms = cur_max
            best = tuple(assign)
            return
        job = free[idx]
        for machine in range(inst.m):
            t = inst.p[machine][job]
            cur[machine] += t
            assign[job] = machine
            dfs(idx + 1, max(cur_max, cur[machine]))
            cur[machine] -= t
        assign[job] = -1

    dfs(0, max(cur))
    assert best_ms is not None and best is not None
    return best_ms, best


_INITIAL_LOADS_KEY = "initial_loads"


def _parse_token(token: str, line_no: int) -> Fraction:
    """Parse one nonnegative rational token, reporting the line on failure."""
    if token.startswith("-"):
        raise InstanceFormatError(line_no, f"negative value {token!r}")
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(line_no, f"bad rational token {token!r}") from None


def parse_instance(text: str) -> Instance:
    """Parse the instance file format.

    Format: optional `#` comment lines; first data line `m n`; then m lines
    of n whitespace-separated nonnegative rationals (integer, a/b, or exact
    decimal); optionally a final line `initial_loads l_1 ... l_m`.
    """
    data: list[tuple[int, list[str]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        data.append((line_no, stripped.split()))

    if not data:
        raise InstanceFormatError(1, "empty instance")
    line_no, header = data[0]
    if len(header) != 2:
        raise InstanceFormatError(line_no, "expected header 'm n'")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise InstanceFormatError(line_no, "expected integer 'm n'") from None
    if m < 1 or n < 0:
        raise InstanceFormatError(line_no, f"bad dimensions m={m} n={n}")

    if len(data) < 1 + m:
        last = data[-1][0]
        raise InstanceFormatError(last, f"expected {m} machine rows")
    rows = []
    for i in range(m):
        line_no, tokens = data[1 + i]
        if len(tokens) != n:
            raise InstanceFormatError(
                line_no, f"expected {n} values, got {len(tokens)}"
            )
        rows.append(tuple(_parse_token(tok, line_no) for tok in tokens))

    initial = tuple(Fraction(0) for _ in range(m))
    rest = data[1 + m :]
    if rest:
        line_no, tokens = rest[0]
        if tokens[0] != _INITIAL_LOADS_KEY:
            raise InstanceFormatError(line_no, f"unexpected line {tokens[0]!r}")
        if len(tokens) != 1 + m:
            raise InstanceFormatError(line_no, f"expected {m} initial loads")
        initial = tuple(_parse_token(tok, line_no) for tok in tokens[1:])
        if len(rest) > 1:
            raise InstanceFormatError(rest[1][0], "trailing content")

    return Instance(tuple(rows), initial)


def format_instance(inst: Instance) -> str:
    """Render an Instance in the file format; parse(format(x)) == x."""
    lines = [f"{inst.m} {inst.n}"]
    for row in inst.p:
        lines.append(" ".join(str(x) for x in row))
    if any(load != 0 for load in inst.initial_loads):
        lines.append(
            _INITIAL_LOADS_KEY + " " + " ".join(str(x) for x in inst.initial_loads)
        )
    return "\n".join(lines) + "\n"
