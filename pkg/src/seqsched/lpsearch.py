"""Adversarial-instance search over fixed-order SPE tree structures (m = 2).

A `TreeStructure` fixes the branch chosen at every internal node of the
identity-order binary tree.  Each structure plus a designated optimum leaf
induces a linear program over the processing times whose optimum is the worst
makespan that structure can force while the optimum stays at most 1; the
search maximizes over structures and leaves with the paper's prunings.

All LP arithmetic is exact (`fractions.Fraction`); the solver is a two-phase
tableau simplex with Bland's anti-cycling rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .core import Instance
from .equilibria import PreferLowest, SpeOutcome, TieBreakRule


@dataclass(frozen=True)
class TreeStructure:
    """Chosen branches for the depth-n identity-order binary tree.

    Internal nodes are indexed level-order (node i has children 2i+1, 2i+2);
    bit i of `bits` set means node i chooses M2.  Leaves are indexed 0..2^n-1
    left to right, so the leaf reached by choices b_1..b_n (first mover's bit
    most significant) has index sum(b_d << (n-1-d)).
    """

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("structures need n >= 1")
        if not 0 <= self.bits < 1 << (2**self.n - 1):
            raise ValueError("bits out of range for n")

    def choice(self, node: int) -> int:
        return (self.bits >> node) & 1

    def leaf_below(self, node: int) -> int:
        """The leaf reached from `node` by following chosen branches."""
        first_leaf = 2**self.n - 1
        while node < first_leaf:
            node = 2 * node + 1 + self.choice(node)
        return node - first_leaf

    def equilibrium_leaf(self) -> int:
        return self.leaf_below(0)

    def __str__(self) -> str:
        return f"{self.bits:#x}"


def leaf_machine(n: int, leaf: int, depth: int) -> int:
    """Machine chosen at `depth` on the path to `leaf` (0 = M1, 1 = M2)."""
    return (leaf >> (n - 1 - depth)) & 1


def obs1_consistent(structure: TreeStructure) -> bool:
    """Observation-1 check on the last layer of a structure.

    Viewing the last player's decisions as f(S) over the set S of earlier
    players on M2: if f(S) = M1 then f(S') = M1 for every S' >= S (more
    predecessors on M2 only make M1 relatively better).
    """
    n = structure.n
    k = n - 1
    first = 2**k - 1  # first last-layer node index
    m1 = [1 - structure.choice(first + p) for p in range(2**k)]
    for p in range(2**k):
        if not m1[p]:
            continue
        for v in range(k):
            if m1[p] and not m1[p | (1 << v)]:
                return False
    return True


def monotone_masks(k: int) -> list[int]:
    """All monotone increasing boolean functions on k variables, as bitmasks.

    Bit p of a mask is the value at the point whose variable set is the bit
    pattern of p.  Built recursively: f = (f0, f1) with f0 <= f1 pointwise.
    The counts are the Dedekind numbers 2, 3, 6, 20, 168, ...
    """
    if k == 0:
        return [0, 1]
    half = monotone_masks(k - 1)
    shift = 1 << (k - 1)
    out = []
    for lo in half:
        for hi in half:
            if lo & ~hi == 0:
                out.append(lo | (hi << shift))
    return out


def enumerate_structures(
    n: int,
    *,
    prune_obs1: bool = True,
    prune_mirror: bool = True,
    exclude_extreme_eq_leaf: bool = True,
) -> Iterator[TreeStructure]:
    """Stream structures passing the enabled filters, in bit order.

    Filters: Observation-1 consistency of the last layer; mirror
    canonicalization (keep the representative whose root chooses M1); and
    exclusion of structures whose equilibrium leaf is leftmost or rightmost.
    """
    if n > 6:
        raise ValueError("full enumeration is limited to n <= 6")
    last_nodes = 2 ** (n - 1)
    upper_bits = last_nodes - 1  # nodes above the last layer
    if prune_obs1:
        full = (1 << last_nodes) - 1
        lasts = sorted(full & ~mask for mask in monotone_masks(n - 1))
    else:
        lasts = list(range(1 << last_nodes))
    rightmost = 2**n - 1
    for upper in range(1 << upper_bits):
        for last in lasts:
            bits = upper | (last << upper_bits)
            if prune_mirror and bits & 1:
                continue
            structure = TreeStructure(n, bits)
            if exclude_extreme_eq_leaf and structure.equilibrium_leaf() in (
                0,
                rightmost,
            ):
                continue
            yield structure


def count_structures(
    n: int,
    *,
    prune_obs1: bool = True,
    prune_mirror: bool = False,
    exclude_extreme_eq_leaf: bool = False,
) -> tuple[int, int]:
    """(unpruned total, count passing the filters).

    The count factorizes into (upper choices) x (consistent last layers)
    unless the equilibrium-leaf filter couples the two, in which case the
    stream is counted directly.
    """
    total = 1 << (2**n - 1)
    if exclude_extreme_eq_leaf:
        kept = sum(
            1
            for _ in enumerate_structures(
                n,
                prune_obs1=prune_obs1,
                prune_mirror=prune_mirror,
                exclude_extreme_eq_leaf=True,
            )
        )
        return total, kept
    last_nodes = 2 ** (n - 1)
    lasts = len(monotone_masks(n - 1)) if prune_obs1 else 1 << last_nodes
    uppers = 1 << (last_nodes - 1)
    if prune_mirror:
        if n == 1:
            # The root is the last-layer node; its choice lives in the last bits.
            kept_lasts = (
                sum(1 for mask in monotone_masks(0) if (1 & ~mask) == 0)
                if prune_obs1
                else 1
            )
            return total, kept_lasts
        uppers //= 2
    return total, uppers * lasts


@dataclass(frozen=True)
class LpProblem:
    """maximize objective . x subject to rows . x <= rhs, x >= 0."""

    n_vars: int
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None
    point: tuple[Fraction, ...] | None


def _load_coeffs(n: int, leaf: int, machine: int) -> list[Fraction]:
    """Coefficient vector (over p-variables) of `machine`'s load at `leaf`."""
    coeffs = [Fraction(0)] * (2 * n)
    for depth in range(n):
        if leaf_machine(n, leaf, depth) == machine:
            coeffs[2 * depth + machine] = Fraction(1)
    return coeffs


def var_index(machine: int, job: int) -> int:
    """Column of p[machine][job] in the LP variable vector."""
    return 2 * job + machine


def build_lp(
    structure: TreeStructure,
    opt_leaf: int,
    objective_machine: int,
    tie_mode: str = "weak",
    eps: Fraction | None = None,
) -> LpProblem:
    """The Appendix-B program for one structure and optimum-leaf position.

    Variables are the 2n processing times p[i][j] >= 0.  Every internal node
    contributes the mover's best-response constraint between the equilibrium
    continuations of its two children (weak by default, or strict with an
    explicit eps); the optimum leaf's two machine loads are constrained to 1;
    the objective maximizes one machine's load at the equilibrium leaf.
    """
    n = structure.n
    eq_leaf = structure.equilibrium_leaf()
    if opt_leaf == eq_leaf:
        raise ValueError("the optimum leaf must differ from the equilibrium leaf")
    if opt_leaf in (0, 2**n - 1):
        raise ValueError("extreme leaves are excluded as optimum positions")
    if tie_mode == "weak":
        slack = Fraction(0)
    elif tie_mode == "strict":
        if eps is None or eps <= 0:
            raise ValueError("strict mode needs a positive eps")
        slack = eps
    else:
        raise ValueError(f"unknown tie mode {tie_mode!r}")

    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    for node in range(2**n - 1):
        chosen = structure.choice(node)
        child = 2 * node + 1
        leaf_chosen = structure.leaf_below(child + chosen)
        leaf_other = structure.leaf_below(child + 1 - chosen)
        cost_chosen = _load_coeffs(n, leaf_chosen, chosen)
        cost_other = _load_coeffs(n, leaf_other, 1 - chosen)
        rows.append(tuple(a - b for a, b in zip(cost_chosen, cost_other)))
        rhs.append(-slack)
    for machine in (0, 1):
        rows.append(tuple(_load_coeffs(n, opt_leaf, machine)))
        rhs.append(Fraction(1))

    objective = tuple(_load_coeffs(n, eq_leaf, objective_machine))
    return LpProblem(2 * n, objective, tuple(rows), tuple(rhs))


def simplex_solve(lp: LpProblem) -> LpResult:
    """Exact two-phase simplex with Bland's rule."""
    n = lp.n_vars
    m = len(lp.rows)
    slack0 = n
    art0 = n + m
    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    n_art = 0
    for i in range(m):
        row = list(lp.rows[i]) + [Fraction(0)] * m
        row[slack0 + i] = Fraction(1)
        rhs = lp.rhs[i]
        if rhs < 0:
            row = [-a for a in row]
            rhs = -rhs
            basis.append(art0 + n_art)
            n_art += 1
        else:
            basis.append(slack0 + i)
        tableau.append(row + [rhs])
    width = art0 + n_art
    for i in range(m):
        tail = [Fraction(0)] * n_art
        if basis[i] >= art0:
            tail[basis[i] - art0] = Fraction(1)
        rhs = tableau[i].pop()
        tableau[i] = tableau[i] + tail + [rhs]

    def run(costs: list[Fraction], allowed: int) -> str:
        """Bland simplex maximizing costs.x, entering only columns < allowed."""
        z = [Fraction(0)] * (width + 1)
        for j in range(width):
            z[j] = -costs[j]
        for i in range(m_live()):
            c = costs[basis[i]]
            if c:
                for j in range(width + 1):
                    z[j] += c * tableau[i][j]
        while True:
            enter = next((j for j in range(allowed) if z[j] < 0), None)
            if enter is None:
                return "optimal"
            best_ratio = None
            leave = None
            for i in range(m_live()):
                a = tableau[i][enter]
                if a > 0:
                    ratio = tableau[i][width] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave is None:
                return "unbounded"
            _pivot(leave, enter, z)

    def m_live() -> int:
        return len(tableau)

    def _pivot(row: int, col: int, z: list[Fraction]) -> None:
        piv = tableau[row][col]
        tableau[row] = [a / piv for a in tableau[row]]
        for i in range(m_live()):
            if i != row and tableau[i][col]:
                factor = tableau[i][col]
                tableau[i] = [
                    a - factor * b for a, b in zip(tableau[i], tableau[row])
                ]
        if z[col]:
            factor = z[col]
            for j in range(width + 1):
                z[j] -= factor * tableau[row][j]
        basis[row] = col

    if n_art:
        phase1 = [Fraction(0)] * width
        for j in range(art0, width):
            phase1[j] = Fraction(-1)
        run(phase1, width)
        infeasible = any(
            basis[i] >= art0 and tableau[i][width] != 0 for i in range(m_live())
        )
        if infeasible:
            return LpResult("infeasible", None, None)
        # Drive any degenerate artificials out of the basis.
        i = 0
        while i < m_live():
            if basis[i] >= art0:
                col = next(
                    (j for j in range(art0) if tableau[i][j] != 0), None
                )
                if col is None:
                    del tableau[i]
                    del basis[i]
                    continue
                _pivot(i, col, [Fraction(0)] * (width + 1))
            i += 1

    phase2 = list(lp.objective) + [Fraction(0)] * (width - n)
    status = run(phase2, art0)
    if status != "optimal":
        return LpResult(status, None, None)
    point = [Fraction(0)] * n
    for i in range(m_live()):
        if basis[i] < n:
            point[basis[i]] = tableau[i][width]
    value = sum(c * x for c, x in zip(lp.objective, point))
    return LpResult("optimal", value, tuple(point))


def witness_instance(n: int, point: Sequence[Fraction]) -> Instance:
    """Assemble an LP point back into a 2-machine Instance."""
    rows = [[point[var_index(i, j)] for j in range(n)] for i in (0, 1)]
    return Instance.from_rows(rows)


def structure_from_spe(
    inst: Instance, rule: TieBreakRule | None = None
) -> TreeStructure:
    """The SPE decisions of every identity-order node, as a TreeStructure."""
    if inst.m != 2:
        raise ValueError("structures are defined for m = 2")
    if rule is None:
        rule = PreferLowest()
    n = inst.n
    bits = 0
    history: dict[int, int] = {}

    def solve(node: int, depth: int, cur: tuple[Fraction, ...]) -> SpeOutcome:
        nonlocal bits
        if depth == n:
            schedule = tuple(history[j] for j in range(n))
            costs = tuple(cur[mach] for mach in schedule)
            return SpeOutcome(schedule, cur, max(cur), costs, ())
        j = depth
        options = []
        for machine in (0, 1):
            nxt = list(cur)
            nxt[machine] += inst.p[machine][j]
            history[j] = machine
            options.append(
                (machine, solve(2 * node + 1 + machine, depth + 1, tuple(nxt)))
            )
            del history[j]
        best = min(o.costs[j] for _, o in options)
        tied = [(mach, o) for mach, o in options if o.costs[j] == best]
        if len(tied) == 1:
            machine, outcome = tied[0]
        else:
            machine = rule.choose(j, dict(history), tuple(tied))
            outcome = dict(tied)[machine]
        if machine:
            bits |= 1 << node
        return outcome

    solve(0, 0, inst.initial_loads)
    return TreeStructure(n, bits)


@dataclass(frozen=True)
class SearchResult:
    """Best LP value over the scanned structures, with its certificate."""

    value: Fraction | None
    structure: TreeStructure | None
    opt_leaf: int | None
    objective_machine: int | None
    witness: Instance | None
    unbounded: tuple[tuple[int, int, int], ...]  # (structure bits, leaf, machine)
    scanned: int
    next_index: int | None


def search(
    n: int,
    *,
    tie_mode: str = "weak",
    eps: Fraction | None = None,
    prune_obs1: bool = True,
    prune_mirror: bool = True,
    exclude_extreme_eq_leaf: bool = True,
    structures: Iterable[TreeStructure] | None = None,
    opt_leaves: Sequence[int] | None = None,
    start: int = 0,
    limit: int | None = None,
    on_improve: Callable[[Fraction, TreeStructure, int, Instance], None] | None = None,
) -> SearchResult:
    """Maximize the equilibrium-leaf load over structures and optimum leaves.

    For every structure and admissible optimum leaf, two LPs are solved (one
    per objective machine); the global maximum, its witness instance, and any
    unbounded (structure, leaf, machine) combinations are reported.  `start`
    and `limit` give a resumable window over the structure stream.
    """
    if structures is None:
        structures = enumerate_structures(
            n,
            prune_obs1=prune_obs1,
            prune_mirror=prune_mirror,
            exclude_extreme_eq_leaf=exclude_extreme_eq_leaf,
        )
    best_value: Fraction | None = None
    best: tuple[TreeStructure, int, int, Instance] | None = None
    unbounded: list[tuple[int, int, int]] = []
    scanned = 0
    index = -1
    exhausted = True
    rightmost = 2**n - 1
    for index, structure in enumerate(structures):
        if index < start:
            continue
        if limit is not None and scanned >= limit:
            exhausted = False
            break
        scanned += 1
        eq_leaf = structure.equilibrium_leaf()
        if opt_leaves is None:
            leaves = [
                leaf
                for leaf in range(2**n)
                if leaf != eq_leaf and leaf not in (0, rightmost)
            ]
        else:
            leaves = list(opt_leaves)
        for leaf in leaves:
            for machine in (0, 1):
                result = simplex_solve(
                    build_lp(structure, leaf, machine, tie_mode, eps)
                )
                if result.status == "unbounded":
                    unbounded.append((structure.bits, leaf, machine))
                elif result.status == "optimal":
                    assert result.value is not None and result.point is not None
                    if best_value is None or result.value > best_value:
                        best_value = result.value
                        best = (
                            structure,
                            leaf,
                            machine,
                            witness_instance(n, result.point),
                        )
                        if on_improve is not None:
                            on_improve(result.value, structure, leaf, best[3])
    if best is None:
        return SearchResult(
            None, None, None, None, None, tuple(unbounded), scanned,
            None if exhausted else index,
        )
    structure, leaf, machine, witness = best
    return SearchResult(
        best_value, structure, leaf, machine, witness, tuple(unbounded), scanned,
        None if exhausted else index,
    )
