"""Exact stabilizer ground states of small Pauli Hamiltonians.

Enumerates every distinct stabilizer group generated by signed Hamiltonian
terms (depth-first with canonical dedup) and minimizes the group energy.
Exponential in the worst case; guarded by term count.
"""
from __future__ import annotations

from dataclasses import dataclass

from .hamiltonian import Hamiltonian
from .pauli import PauliOp, PauliSet
from .stabgroup import GuardExceededError, StabGroup, StabGroupError


@dataclass(frozen=True)
class SolveResult:
    energy: float
    group: StabGroup
    chosen_terms: PauliSet
    algorithm_tag: str
    tie_break_note: str


def e_stab(h: Hamiltonian, s: StabGroup) -> float:
    """Group energy: sum of weights of terms that are signed members."""
    if h.n_sites != s.n_sites:
        raise StabGroupError("size mismatch")
    total = 0.0
    for w, op in h.terms:
        v = s.member_value(op)
        if v:
            total += w * v
    return total


def signed_terms(h: Hamiltonian) -> PauliSet:
    """Both signs of every non-identity term, insertion-ordered."""
    out = PauliSet()
    for _, op in h.terms:
        if op.is_identity:
            continue
        out.add(op)
        out.add(op.negated())
    return out


def make_result(h: Hamiltonian, group: StabGroup, tag: str, note: str) -> SolveResult:
    """Assemble a SolveResult, enforcing closure and recomputing the energy."""
    chosen = group.intersect_with_set(signed_terms(h))
    closed = (
        StabGroup.from_generators(list(chosen), h.n_sites)
        if len(chosen)
        else StabGroup.trivial(h.n_sites)
    )
    energy = e_stab(h, closed)
    return SolveResult(energy, closed, chosen, tag, note)


def _iter_reachable_groups(candidates: PauliSet, n: int):
    """Yield every distinct group generated by the candidates, DFS preorder."""
    seen = {(): True}

    def visit(group: StabGroup):
        yield group
        for p in candidates:
            try:
                child = group.extend(p)
            except StabGroupError:
                continue
            if child.rank == group.rank or child.rows in seen:
                continue
            seen[child.rows] = True
            yield from visit(child)

    yield from visit(StabGroup.trivial(n))


def enumerate_restricted_subsets(terms: PauliSet, n: int, max_terms_guard: int = 24):
    """Every distinct group generated by a closed signed-term subset.

    Groups come back in deterministic DFS discovery order, each once.
    """
    if len(terms) > 2 * max_terms_guard:
        raise GuardExceededError(f"term guard {max_terms_guard} exceeded")
    return list(_iter_reachable_groups(terms, n))


def solve_general(
    h: Hamiltonian,
    max_terms_guard: int = 24,
    use_bound_pruning: bool = False,
) -> SolveResult:
    """Exact minimum of e_stab over all restricted commuting subsets.

    DFS over signed terms as generators with canonical dedup; ties broken
    by first DFS encounter with insertion-ordered candidates.
    """
    candidates = signed_terms(h)
    n_real_terms = sum(1 for _, op in h.terms if not op.is_identity)
    if n_real_terms > max_terms_guard:
        raise GuardExceededError(
            f"{n_real_terms} terms exceed solve_general guard {max_terms_guard}"
        )

    best_group = StabGroup.trivial(h.n_sites)
    best_energy = e_stab(h, best_group)
    ties = 1
    seen = {(): True}

    def potential(group: StabGroup) -> float:
        slack = 0.0
        for w, op in h.terms:
            if op.is_identity:
                continue
            if group.member_sign(op) == "absent":
                from .pauli import commutes

                if all(commutes(g, op) for g in group.generators):
                    slack += abs(w)
        return slack

    def visit(group: StabGroup, energy: float):
        nonlocal best_group, best_energy, ties
        if energy < best_energy:
            best_group, best_energy, ties = group, energy, 1
        elif energy == best_energy and group is not best_group:
            ties += 1
        if use_bound_pruning and energy - potential(group) > best_energy:
            return
        for p in candidates:
            try:
                child = group.extend(p)
            except StabGroupError:
                continue
            if child.rank == group.rank or child.rows in seen:
                continue
            seen[child.rows] = True
            visit(child, e_stab(h, child))

    visit(best_group, best_energy)
    note = f"dfs-first-minimum; {ties} group(s) at E_min"
    return make_result(h, best_group, "general", note)
