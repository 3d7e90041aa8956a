"""Inefficiency measures: SPoA, SPoS, adaptive SPoS, and PoA/PoS.

Tie conventions: `spoa_fixed` takes the *maximum* makespan over the outcome
set (adversarial ties); `spos` takes the minimum (optimistic ties) before
minimizing over orders; `adaptive_spos` scores each tree by its *worst*
outcome and then minimizes over trees, so the reported value is a guarantee
that holds no matter how ties are resolved once the tree is fixed.  Under
the optimistic convention the gen_thm5 lower bound would vanish: the
J1-first order's outcome set contains the optimum (the last mover's tie
broken toward machine 1 makes J1 strictly prefer machine 2), so every
measure would collapse to 1 there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .core import DEFAULT_BUDGET, BudgetExceededError, Instance, Schedule, opt
from .equilibria import (
    AdaptiveTree,
    Node,
    PlayerOrder,
    SpeOutcome,
    identity_order,
    pure_nash,
    spe_outcome_set,
)


@dataclass(frozen=True)
class MeasureReport:
    """A measured ratio together with the object attaining it.

    `value` is witness_makespan / opt_makespan, or ``None`` when the ratio is
    unbounded (zero optimum, positive witness).
    """

    value: Fraction | None
    witness_makespan: Fraction
    opt_makespan: Fraction
    witness: object
    outcome: SpeOutcome

    @property
    def unbounded(self) -> bool:
        return self.value is None


def _ratio(ms: Fraction, opt_ms: Fraction) -> Fraction | None:
    if opt_ms > 0:
        return ms / opt_ms
    return Fraction(1) if ms == 0 else None


def spoa_fixed(inst: Instance, order: PlayerOrder) -> MeasureReport:
    """Worst-tie SPE makespan over OPT for a fixed player order."""
    opt_ms, _ = opt(inst)
    tree = AdaptiveTree.from_order(order, inst.m)
    outcomes = spe_outcome_set(inst, tree)
    worst = max(outcomes, key=lambda o: o.makespan)
    return MeasureReport(
        _ratio(worst.makespan, opt_ms), worst.makespan, opt_ms, tuple(order), worst
    )


def spos(inst: Instance, max_jobs: int = 7) -> MeasureReport:
    """Best order, best ties: min over orders of the outcome-set minimum."""
    if inst.n > max_jobs:
        raise BudgetExceededError(f"spos over {inst.n}! orders refused")
    opt_ms, _ = opt(inst)
    best: tuple[PlayerOrder, SpeOutcome] | None = None
    for perm in itertools.permutations(range(inst.n)):
        tree = AdaptiveTree.from_order(perm, inst.m)
        outcome = min(spe_outcome_set(inst, tree), key=lambda o: o.makespan)
        if best is None or outcome.makespan < best[1].makespan:
            best = (perm, outcome)
    assert best is not None
    order, outcome = best
    return MeasureReport(
        _ratio(outcome.makespan, opt_ms), outcome.makespan, opt_ms, order, outcome
    )


def adaptive_tree_count(n: int, m: int) -> int:
    """Number of valid adaptive trees: f(0) = 1, f(r) = r * f(r-1)**m."""
    count = 1
    for r in range(1, n + 1):
        count = r * count**m
    return count


def iter_adaptive_trees(n: int, m: int) -> Iterator[AdaptiveTree]:
    """All valid trees, root players ascending, children in machine order."""
    for root in _iter_nodes(tuple(range(n)), m):
        yield AdaptiveTree(m, n, root)


def _iter_nodes(jobs: tuple[int, ...], m: int) -> Iterator[Node | None]:
    if not jobs:
        yield None
        return
    for j in jobs:
        rest = tuple(x for x in jobs if x != j)
        for children in _iter_children(rest, m, m):
            yield Node(j, children)


def _iter_children(
    jobs: tuple[int, ...], m: int, remaining: int
) -> Iterator[tuple]:
    if remaining == 0:
        yield ()
        return
    for first in _iter_nodes(jobs, m):
        for rest in _iter_children(jobs, m, remaining - 1):
            yield (first,) + rest


def adaptive_spos(
    inst: Instance,
    method: str = "auto",
    tree_budget: int = 10**5,
) -> MeasureReport:
    """Min over all adaptive trees of the outcome-set *maximum*, over OPT.

    Each tree is scored by its worst outcome (ties are adversarial once the
    tree is fixed); the best such guarantee over all trees is returned.

    Methods:
        "auto"/"dp": exact dynamic program over subgame states; equivalent to
            enumerating every tree, with shared subgames (`_adaptive_minmax_dp`).
        "enumerate": literally iterate all trees in canonical order; refused
            when the tree count exceeds `tree_budget`.

    Both return the same value; the witness tree is canonical per method.
    """
    opt_ms, _ = opt(inst)
    if method in ("auto", "dp"):
        tree, outcome = _adaptive_minmax_dp(inst)
    elif method == "enumerate":
        count = adaptive_tree_count(inst.n, inst.m)
        if count > tree_budget:
            raise BudgetExceededError(f"{count} trees exceed the budget")
        best: tuple[AdaptiveTree, SpeOutcome] | None = None
        for candidate in iter_adaptive_trees(inst.n, inst.m):
            outcome = max(
                spe_outcome_set(inst, candidate), key=lambda o: o.makespan
            )
            if best is None or outcome.makespan < best[1].makespan:
                best = (candidate, outcome)
        assert best is not None
        tree, outcome = best
    else:
        raise ValueError(f"unknown method {method!r}")
    return MeasureReport(
        _ratio(outcome.makespan, opt_ms), outcome.makespan, opt_ms, tree, outcome
    )


def _adaptive_minmax_dp(inst: Instance) -> tuple[AdaptiveTree, SpeOutcome]:
    """Witness tree whose worst outcome-set makespan is minimal, over all trees.

    State = (remaining jobs, current loads); two subtrees below the same
    state are interchangeable, so only their outcome sets matter upstream.
    `collect` returns every distinct outcome set (a sorted tuple of final
    load vectors) some subtree rooted at the state can produce: pick a mover
    j and one outcome set per branch, then an outcome o from branch c
    survives iff o[c] <= the maximum cost on every other branch.
    De-duplication keeps the collections small even when the raw tree count
    is astronomical.
    """
    collections: dict[tuple, tuple[tuple, ...]] = {}
    provenance: dict[tuple, dict[tuple, tuple[int, tuple] | None]] = {}

    def collect(remaining: frozenset, cur: tuple[Fraction, ...]) -> tuple:
        key = (remaining, cur)
        if key in collections:
            return collections[key]
        if not remaining:
            leaf_set = (cur,)
            collections[key] = (leaf_set,)
            provenance[key] = {leaf_set: None}
            return collections[key]
        found: dict[tuple, tuple[int, tuple]] = {}
        for j in sorted(remaining):
            rest = remaining - {j}
            child_options = []
            for c in range(inst.m):
                nxt = list(cur)
                nxt[c] += inst.p[c][j]
                child_options.append(collect(rest, tuple(nxt)))
            for combo in itertools.product(*child_options):
                worst = [max(v[c] for v in s) for c, s in enumerate(combo)]
                merged = set()
                for c, s in enumerate(combo):
                    bar = min(w for d, w in enumerate(worst) if d != c)
                    merged.update(v for v in s if v[c] <= bar)
                outcome_set = tuple(sorted(merged))
                if outcome_set not in found:
                    found[outcome_set] = (j, combo)
        collections[key] = tuple(found)
        provenance[key] = found
        return collections[key]

    def realize(remaining: frozenset, cur: tuple[Fraction, ...], target) -> Node | None:
        """A tree below the state whose outcome set is exactly `target`."""
        if not remaining:
            return None
        j, combo = provenance[(remaining, cur)][target]
        rest = remaining - {j}
        children = []
        for c in range(inst.m):
            nxt = list(cur)
            nxt[c] += inst.p[c][j]
            children.append(realize(rest, tuple(nxt), combo[c]))
        return Node(j, tuple(children))

    all_jobs = frozenset(range(inst.n))
    options = collect(all_jobs, inst.initial_loads)
    target = min(options, key=lambda s: (max(max(v) for v in s), s))
    tree = AdaptiveTree(inst.m, inst.n, realize(all_jobs, inst.initial_loads, target))
    outcome = max(spe_outcome_set(inst, tree), key=lambda o: o.makespan)
    if outcome.makespan != max(max(v) for v in target):
        raise AssertionError("witness tree does not attain the DP value")
    return tree, outcome


@dataclass(frozen=True)
class PoaPosReport:
    """Pure-Nash price of anarchy and stability for one instance."""

    poa: Fraction | None
    pos: Fraction | None
    opt_makespan: Fraction
    worst: Schedule | None
    best: Schedule | None
    has_nash: bool


def poa_pos(inst: Instance, budget: int = DEFAULT_BUDGET) -> PoaPosReport:
    """(worst Nash makespan / OPT, best Nash makespan / OPT).

    Either ratio is ``None`` when unbounded; `has_nash` is False (and all
    other fields None-ish) when no pure Nash equilibrium exists.
    """
    opt_ms, _ = opt(inst)
    equilibria = pure_nash(inst, budget)
    if not equilibria:
        return PoaPosReport(None, None, opt_ms, None, None, False)
    from .core import makespan as _makespan

    ranked = sorted(equilibria, key=lambda s: (_makespan(inst, s), s))
    best, worst = ranked[0], max(ranked, key=lambda s: (_makespan(inst, s), s))
    best_ms = _makespan(inst, best)
    worst_ms = _makespan(inst, worst)
    return PoaPosReport(
        _ratio(worst_ms, opt_ms), _ratio(best_ms, opt_ms), opt_ms, worst, best, True
    )
