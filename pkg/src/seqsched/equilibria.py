"""Decision trees, tie-breaking rules, backward induction, and pure Nash.

The sequential game: players (jobs) move in the order given by a decision
tree, each picking a machine; a player's final cost is the completed load of
the machine she chose.  `spe` computes the subgame perfect equilibrium for a
deterministic tie-breaking rule; `spe_outcome_set` computes every outcome
achievable when each tie may be resolved arbitrarily per history.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .core import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    Instance,
    LoadVector,
    Schedule,
)

#: A permutation of job indices; position d is the depth-d mover.
PlayerOrder = tuple[int, ...]

#: Default cap on m ** n when computing outcome sets.
DEFAULT_OUTCOME_LEAVES = 4096


class TieBreakContractError(RuntimeError):
    """A tie-breaking rule returned a machine that was not tied."""


@dataclass(frozen=True)
class Node:
    """Internal tree node: the moving player and one subtree per machine.

    A ``None`` child is a leaf (the game ends below it).
    """

    player: int
    children: tuple["Node | None", ...]


@dataclass(frozen=True)
class AdaptiveTree:
    """A complete m-ary decision tree of depth n.

    Every root-to-leaf path must contain each of the n players exactly once.
    """

    m: int
    n: int
    root: Node | None

    def validate(self) -> None:
        """Check arity and the path-coverage invariant; raise ValueError."""

        def walk(node: Node | None, seen: set[int]) -> None:
            if node is None:
                if len(seen) != self.n:
                    raise ValueError("a path misses some players")
                return
            if node.player in seen:
                raise ValueError(f"player {node.player} repeats on a path")
            if not 0 <= node.player < self.n:
                raise ValueError(f"player {node.player} out of range")
            if len(node.children) != self.m:
                raise ValueError("internal node without exactly m children")
            seen.add(node.player)
            for child in node.children:
                walk(child, seen)
            seen.remove(node.player)

        walk(self.root, set())

    @classmethod
    def from_order(cls, order: Sequence[int], m: int) -> "AdaptiveTree":
        """The fixed-order tree: all depth-d nodes carry player order[d]."""
        n = len(order)
        if sorted(order) != list(range(n)):
            raise ValueError(f"not a permutation of 0..{n - 1}: {order!r}")
        node: Node | None = None
        for player in reversed(order):
            node = Node(player, (node,) * m)
        return cls(m, n, node)


def identity_order(n: int) -> PlayerOrder:
    return tuple(range(n))


@dataclass(frozen=True)
class SpeOutcome:
    """One equilibrium outcome: the leaf schedule and everything derived.

    Attributes:
        schedule: machine of each job at the leaf.
        loads: final machine loads.
        makespan: max load.
        costs: per-player final cost, costs[j] == loads[schedule[j]].
        path: (player, machine) choices from the root down.
    """

    schedule: Schedule
    loads: LoadVector
    makespan: Fraction
    costs: tuple[Fraction, ...]
    path: tuple[tuple[int, int], ...]


class TieBreakRule:
    """Deterministic choice among machines whose continuations tie.

    `choose` receives the moving player, the history (machines of earlier
    movers), and the tied candidates as (machine, continuation outcome)
    pairs; it must return one of the candidate machines.
    """

    name = "tie-rule"

    def choose(
        self,
        player: int,
        history: Mapping[int, int],
        candidates: Sequence[tuple[int, SpeOutcome]],
    ) -> int:
        raise NotImplementedError


class PreferLowest(TieBreakRule):
    """Ties go to the lowest machine index (the paper's M1 convention)."""

    name = "lowest"

    def choose(self, player, history, candidates):
        return min(machine for machine, _ in candidates)


class PreferHighest(TieBreakRule):
    """Ties go to the highest machine index."""

    name = "highest"

    def choose(self, player, history, candidates):
        return max(machine for machine, _ in candidates)


class PreferRecommended(TieBreakRule):
    """Ties follow a per-history recommendation map (Theorem-4 trees).

    The map is keyed by frozenset(history.items()); histories without a
    recommendation, or whose recommendation is not tied, fall back to the
    lowest candidate machine.
    """

    name = "recommended"

    def __init__(self, recommendations: Mapping[frozenset, int]):
        self._rec = dict(recommendations)

    def choose(self, player, history, candidates):
        machines = [machine for machine, _ in candidates]
        rec = self._rec.get(frozenset(history.items()))
        return rec if rec in machines else min(machines)


class ScriptedRule(TieBreakRule):
    """Ties follow a finite text table of per-player, per-history preferences.

    Table grammar, one rule per line (`#` comments allowed)::

        player <j> when <pattern> prefer <i>

    where `<j>` and `<i>` are 1-indexed, and `<pattern>` is `*` or a
    comma-separated list of conditions `<job>=M<machine>` that must all hold
    in the history.  The first matching line wins; with no match, ties go to
    the lowest candidate machine.
    """

    name = "scripted"

    def __init__(self, table: str):
        self.rows: list[tuple[int, dict[int, int], int]] = []
        for line_no, raw in enumerate(table.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if (
                len(tokens) != 6
                or tokens[0] != "player"
                or tokens[2] != "when"
                or tokens[4] != "prefer"
            ):
                raise ValueError(f"line {line_no}: bad rule syntax: {line!r}")
            player = int(tokens[1]) - 1
            conditions: dict[int, int] = {}
            if tokens[3] != "*":
                for part in tokens[3].split(","):
                    job_text, _, machine_text = part.partition("=")
                    if not machine_text.startswith("M"):
                        raise ValueError(
                            f"line {line_no}: bad condition {part!r}"
                        )
                    conditions[int(job_text) - 1] = int(machine_text[1:]) - 1
            machine = int(tokens[5][1:]) - 1 if tokens[5].startswith("M") else int(tokens[5]) - 1
            self.rows.append((player, conditions, machine))

    def choose(self, player, history, candidates):
        machines = [machine for machine, _ in candidates]
        for row_player, conditions, machine in self.rows:
            if row_player != player:
                continue
            if all(history.get(job) == mach for job, mach in conditions.items()):
                if machine in machines:
                    return machine
        return min(machines)


class Thm2Rule(TieBreakRule):
    """The tie table that realizes the k+2 equilibrium on the k-block family.

    Jobs come in blocks (J_{3t+1}, J_{3t+2}, J_{3t+3}); once a leading block
    has settled on its zero-cost machines (M2, M1, M1) the remaining jobs play
    the k-1 sub-instance, so the rule is applied relative to the first
    unsettled block, the "governing" block (capped so the governing
    sub-instance keeps k' = k - t >= 2).  With b1, b2, b3 the governing
    block's 1-indexed jobs:

    * the tail job 3k-2 prefers M1 exactly when b3 sits on M2 and b2 does
      not, and the last job 3k-1 prefers M1 exactly when b1 sits on M2 and
      b2 on M1 (the punishment branches after the first job's deviation);
    * b1 prefers M1 (the k'+1 cost on the first machine);
    * b2 and b3 avoid b1 when she deviated to M2 - except in the k' = 2
      endgame, where they follow her (the five-job base construction);
      on the main branch (b1 on M1) they prefer M2;
    * later-block jobs prefer their zero-cost machines.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("the family needs k >= 2")
        self.k = k
        self.name = f"thm2:{k}"

    def choose(self, player, history, candidates):
        machines = [machine for machine, _ in candidates]
        preferred = self._preferred(player + 1, history)
        return preferred if preferred in machines else min(machines)

    def _preferred(self, j: int, history: Mapping[int, int]) -> int:
        M1, M2 = 0, 1
        k = self.k

        def at(job_1indexed: int) -> int | None:
            return history.get(job_1indexed - 1)

        t = 0
        while (
            t < k - 2
            and at(3 * t + 1) == M2
            and at(3 * t + 2) == M1
            and at(3 * t + 3) == M1
        ):
            t += 1
        b1, b2, b3 = 3 * t + 1, 3 * t + 2, 3 * t + 3

        if j == 3 * k - 2:
            return M1 if (at(b3) == M2 and at(b2) != M2) else M2
        if j == 3 * k - 1:
            return M1 if (at(b1) == M2 and at(b2) == M1) else M2
        if j == b1:
            return M1
        if j in (b2, b3):
            if at(b1) == M2:
                return M1 if k - t >= 3 else M2
            return M2
        return M2 if (j - 1) % 3 == 0 else M1


def scripted_rule_thm2(k: int) -> TieBreakRule:
    """The Theorem-2 tie-breaking rule for the k-block instance family."""
    return Thm2Rule(k)


def spe(inst: Instance, tree: AdaptiveTree, rule: TieBreakRule) -> SpeOutcome:
    """Subgame perfect equilibrium by backward induction.

    At every node the mover takes the child minimizing her own final cost;
    exact ties are resolved by `rule`.

    Raises:
        TieBreakContractError: if the rule picks a non-tied machine.
    """
    if tree.m != inst.m or tree.n != inst.n:
        raise ValueError("tree shape does not match the instance")
    history: dict[int, int] = {}

    def solve(node: Node | None, cur: tuple[Fraction, ...]) -> SpeOutcome:
        if node is None:
            schedule = tuple(history[j] for j in range(inst.n))
            costs = tuple(cur[machine] for machine in schedule)
            return SpeOutcome(schedule, cur, max(cur), costs, ())
        j = node.player
        options: list[tuple[int, SpeOutcome]] = []
        for machine, child in enumerate(node.children):
            nxt = list(cur)
            nxt[machine] += inst.p[machine][j]
            history[j] = machine
            options.append((machine, solve(child, tuple(nxt))))
            del history[j]
        best = min(outcome.costs[j] for _, outcome in options)
        tied = [(mach, o) for mach, o in options if o.costs[j] == best]
        if len(tied) == 1:
            machine, outcome = tied[0]
        else:
            machine = rule.choose(j, dict(history), tuple(tied))
            matches = [o for mach, o in tied if mach == machine]
            if not matches:
                raise TieBreakContractError(
                    f"rule {rule.name!r} chose non-candidate machine {machine}"
                )
            outcome = matches[0]
        return replace(outcome, path=((j, machine),) + outcome.path)

    return solve(tree.root, inst.initial_loads)


def spe_outcome_set(
    inst: Instance,
    tree: AdaptiveTree,
    max_leaves: int = DEFAULT_OUTCOME_LEAVES,
) -> tuple[SpeOutcome, ...]:
    """All SPE outcomes achievable under arbitrary per-history tie rules.

    At a node, an outcome o of the branch-c subtree survives iff choosing c
    with continuation o can be optimal for the mover against *some* choice of
    continuations on the other branches; the worst available cost on branch c'
    is max over that subtree's outcomes, so the test is
    ``o.costs[j] <= min over c' != c of worst(c')``.

    Returns outcomes in a canonical order (branch-major, recursively).
    """
    if tree.m != inst.m or tree.n != inst.n:
        raise ValueError("tree shape does not match the instance")
    if inst.m**inst.n > max_leaves:
        raise BudgetExceededError(
            f"outcome set too large: {inst.m}**{inst.n} leaves"
        )
    history: dict[int, int] = {}

    def collect(node: Node | None, cur: tuple[Fraction, ...]) -> list[SpeOutcome]:
        if node is None:
            schedule = tuple(history[j] for j in range(inst.n))
            costs = tuple(cur[machine] for machine in schedule)
            return [SpeOutcome(schedule, cur, max(cur), costs, ())]
        j = node.player
        per_branch: list[list[SpeOutcome]] = []
        for machine, child in enumerate(node.children):
            nxt = list(cur)
            nxt[machine] += inst.p[machine][j]
            history[j] = machine
            per_branch.append(collect(child, tuple(nxt)))
            del history[j]
        worst = [max(o.costs[j] for o in branch) for branch in per_branch]
        result: list[SpeOutcome] = []
        for machine, branch in enumerate(per_branch):
            bar = min(w for c, w in enumerate(worst) if c != machine)
            for o in branch:
                if o.costs[j] <= bar:
                    result.append(
                        replace(o, path=((j, machine),) + o.path)
                    )
        return result

    return tuple(collect(tree.root, inst.initial_loads))


def replay(inst: Instance, tree: AdaptiveTree, path) -> SpeOutcome:
    """Walk `tree` following a (player, machine) path; rebuild the outcome."""
    node = tree.root
    history: dict[int, int] = {}
    for player, machine in path:
        if node is None or node.player != player:
            raise ValueError("path does not match the tree")
        history[player] = machine
        node = node.children[machine]
    if node is not None:
        raise ValueError("path stops before a leaf")
    schedule = tuple(history[j] for j in range(inst.n))
    from .core import loads as _loads  # local alias to avoid shadowing

    final = _loads(inst, schedule)
    costs = tuple(final[machine] for machine in schedule)
    return SpeOutcome(schedule, final, max(final), costs, tuple(path))


def pure_nash(inst: Instance, budget: int = DEFAULT_BUDGET) -> set[Schedule]:
    """All pure Nash equilibria of the one-shot (strategic) game.

    A schedule is Nash iff no single job can strictly lower its cost by
    switching machines; the cost after switching to d is loads[d] + p[d][j].
    """
    if inst.m**inst.n > budget:
        raise BudgetExceededError(
            f"instance too large for Nash enumeration: {inst.m}**{inst.n}"
        )
    result: set[Schedule] = set()
    for schedule in itertools.product(range(inst.m), repeat=inst.n):
        totals = list(inst.initial_loads)
        for j, machine in enumerate(schedule):
            totals[machine] += inst.p[machine][j]
        stable = True
        for j, machine in enumerate(schedule):
            own = totals[machine]
            for d in range(inst.m):
                if d != machine and totals[d] + inst.p[d][j] < own:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            result.add(schedule)
    return result
