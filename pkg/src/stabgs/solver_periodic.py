"""Infinite-system solvers.

1D periodic chains: run the sweep automaton on a long enough finite
prefix until the set of states observed at unit boundaries repeats, then
search for minimum-energy cycles of up to ``c_max`` units among those
boundary states.  The automaton is weight-independent, so one saturated
engine serves every parameter point of a sweep with the same term shapes.

General periodic Hamiltonians (1 or 2 dimensions) are handled for unit
supercells by realizing the model on a small torus: a selection is a set
of whole translation orbits of terms with a common sign, terms that
anticommute with one of their own translates are excluded up front, and
the orbit selections are enumerated exactly like the general solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .hamiltonian import (
    Hamiltonian,
    HamiltonianError,
    PeriodicHamiltonian1D,
    SupercellHamiltonian,
    rotate_y,
)
from .pauli import PauliOp, commutes, format_pauli
from .solver_general import e_stab
from .stabgroup import GuardExceededError, StabGroup, StabGroupError
from .solver_local1d import _Automaton


class NoCycleFoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodicResult:
    e_per_site: float
    supercell_c: int
    generators: tuple[str, ...]
    phase_signature: str
    algorithm_tag: str
    tie_break_note: str = ""
    degenerate: tuple["PeriodicResult", ...] = ()


# ---------------------------------------------------------------------------
# 1D periodic: bulk automaton + cycle search
# ---------------------------------------------------------------------------


class _PeriodicEngine:
    """Saturated unit-boundary graph for one family of term shapes."""

    def __init__(self, l: int, patterns: tuple, unit_cap: int = 256):
        self.l = l
        self.patterns = patterns  # ((site, letter), ...) per template
        self.k = max((p[-1][0] - p[0][0] + 1 for p in patterns), default=1)
        self.unit_cap = unit_cap
        self._build()

    def _finite(self, units: int):
        """Unit-major finite realization plus tid <-> (unit, template) maps."""
        n = units * self.l
        pairs = []
        meta = []
        for j in range(units):
            for t, pattern in enumerate(self.patterns):
                sites = {j * self.l + s: c for s, c in pattern}
                if max(sites) >= n:
                    continue
                pairs.append((float(t + 1), PauliOp.from_letters(n, sites)))
                meta.append((j, t))
        # distinct placeholder weights keep from_terms from merging anything
        h = Hamiltonian.from_terms(n, pairs)
        if len(h.terms) != len(meta):
            raise HamiltonianError("periodic templates produced duplicate terms")
        return h, meta

    def _build(self):
        units = max(4 * self.k // self.l + 8, 12)
        while True:
            h, meta = self._finite(units)
            auto = _Automaton(h)
            buffer_units = (2 * self.k + 2) // self.l + 4
            trusted = units - buffer_units
            # the unit map is translation invariant only once every window in
            # the unit is unclipped, so transient boundaries are not compared
            j_min = (self.k + 1 + self.l - 1) // self.l + 1
            if trusted < j_min + 2:
                if units >= self.unit_cap:
                    raise NoCycleFoundError("chain prefix too short; raise the unit cap")
                units *= 2
                continue
            rel_sets = []
            rel_maps = []  # per boundary: rel_key -> state idx
            for j in range(trusted + 1):
                m = j * self.l
                keys = {}
                for idx, state in enumerate(auto.recs[m]):
                    keys[self._rel_key(state, j, meta)] = idx
                rel_maps.append(keys)
                rel_sets.append(frozenset(keys))
            repeat = None
            for j2 in range(j_min + 1, trusted + 1):
                for j1 in range(j_min, j2):
                    if rel_sets[j1] == rel_sets[j2]:
                        repeat = (j1, j2)
                        break
                if repeat:
                    break
            if repeat is not None and self._vw_stable(auto, j_min, repeat[1]):
                self._collect(auto, meta, rel_maps, *repeat)
                return
            if units >= self.unit_cap:
                raise NoCycleFoundError(
                    "boundary state set did not saturate; raise the unit cap"
                )
            units *= 2

    def _vw_stable(self, auto, j_lo: int, j_hi: int) -> bool:
        ctx = auto.ctx
        for m in range(j_lo * self.l, (j_hi + 1) * self.l + 1):
            if ctx.vw(m) != ctx.vw(m + self.l):
                return False
        return True

    def _rel_key(self, state, j: int, meta):
        proj, blocked, claim = state
        rel_blocked = frozenset((meta[t][0] - j, meta[t][1]) for t in blocked)
        return (proj, rel_blocked, claim)

    def _collect(self, auto, meta, rel_maps, j1: int, j2: int):
        """Unit edges for every boundary state seen in the recurrent window."""
        occurrence = {}
        for j in range(j1, j2):
            for key, idx in rel_maps[j].items():
                occurrence.setdefault(key, (j, idx))
        self.nodes = sorted(occurrence)
        self.edges: dict = {}
        for key in self.nodes:
            j, idx = occurrence[key]
            base = j * self.l
            paths = [(idx, ())]
            for step in range(self.l):
                m = base + step
                nxt = []
                for cur, commits in paths:
                    extra = tuple(
                        ((meta[t][0] - j, meta[t][1]), sb)
                        for t, sb in auto.commits[m][cur]
                    )
                    for child in auto.edges[m][cur]:
                        nxt.append((child, commits + extra))
                paths = nxt
            bucket: dict = {}
            for cur, commits in paths:
                tgt = self._rel_key(auto.recs[base + self.l][cur], j + 1, meta)
                bucket.setdefault(tgt, set()).add(tuple(sorted(commits)))
            self.edges[key] = {
                tgt: tuple(sorted(opts)) for tgt, opts in sorted(bucket.items())
            }

    def cycle_search(self, weights, c_max: int):
        """Best mean-energy cycles: list of (value, c, start, commit_chain)."""

        def delta(commits):
            return sum(weights[t] if sb == 0 else -weights[t] for (_, t), sb in commits)

        found = []
        for start in self.nodes:
            dist = {start: (0.0, None)}
            for step in range(1, c_max + 1):
                nxt: dict = {}
                for node in sorted(dist):
                    val = dist[node][0]
                    for tgt, options in self.edges.get(node, {}).items():
                        for opt in options:
                            cand = val + delta(opt)
                            cur = nxt.get(tgt)
                            if cur is None or cand < cur[0]:
                                nxt[tgt] = (cand, (node, opt))
                dist = nxt
                if start in dist:
                    found.append((dist[start][0] / (step * self.l), step, start))
        return found

    def reconstruct(self, weights, start, c: int):
        """Commit chain of the best cycle start -> start in exactly c units."""

        def delta(commits):
            return sum(weights[t] if sb == 0 else -weights[t] for (_, t), sb in commits)

        dist = {start: (0.0, None)}
        history = [dist]
        for _ in range(c):
            nxt: dict = {}
            for node in sorted(dist):
                val = dist[node][0]
                for tgt, options in self.edges.get(node, {}).items():
                    for opt in options:
                        cand = val + delta(opt)
                        cur = nxt.get(tgt)
                        if cur is None or cand < cur[0]:
                            nxt[tgt] = (cand, (node, opt))
            dist = nxt
            history.append(dist)
        chain = []
        node = start
        for step in range(c, 0, -1):
            _, back = history[step][node]
            prev, opt = back
            chain.append((step - 1, opt))
            node = prev
        chain.reverse()
        return chain


_ENGINE_CACHE: dict = {}


def _get_engine(h: PeriodicHamiltonian1D) -> _PeriodicEngine:
    key = (h.l, tuple(p for _, p in h.cell_terms))
    eng = _ENGINE_CACHE.get(key)
    if eng is None:
        eng = _PeriodicEngine(h.l, key[1])
        if len(_ENGINE_CACHE) > 8:
            _ENGINE_CACHE.pop(next(iter(_ENGINE_CACHE)))
        _ENGINE_CACHE[key] = eng
    return eng


def _cycle_generators(h: PeriodicHamiltonian1D, chain, c: int):
    """Supercell generators from a commit chain, anchored into [0, c*l)."""
    period = c * h.l
    gens = {}
    for step, commits in chain:
        for (du, t), sb in commits:
            anchor_unit = (step + du) % c
            key = (anchor_unit, t)
            sign = -1 if sb else 1
            if key in gens and gens[key] != sign:
                raise StabGroupError("inconsistent signs along a cycle")
            gens[key] = sign
    out = []
    for (u, t), sign in sorted(gens.items()):
        pattern = h.cell_terms[t][1]
        base = u * h.l
        out.append((sign, tuple((base + s, c0) for s, c0 in pattern)))
    return tuple(out), period


def _gen_string(sign: int, sites) -> str:
    body = " ".join(f"{c}{s}" for s, c in sites)
    return ("+" if sign > 0 else "-") + body


def signature_of_generators(gens, period: int, k: int) -> str:
    """Phase label of a periodic stabilizer group.

    Serializes the canonical window projection of the group generated by
    all translates, minimized over translations, so the label depends on
    the group itself and not on which Hamiltonian terms happened to
    generate it (closures list redundant terms, terms vanish on
    parameter-axis cuts, and degenerate cycles may carry an inflated
    supercell).  The window is sized from the group's minimal period.
    """
    if not gens:
        return "(trivial)"
    span = max(max(s for s, _ in sites) - min(s for s, _ in sites) + 1 for _, sites in gens)
    scale = max(k, span, 1)
    length = 6 * period + 12 * scale
    ops = []
    for sign, sites in gens:
        first = sites[0][0]
        j = -(first // period) - 1
        while True:
            base = j * period
            j += 1
            if base + first < 0:
                continue
            if base + sites[-1][0] >= length:
                break
            ops.append(PauliOp.from_letters(length, {base + s: c for s, c in sites}, sign))
    group = StabGroup.from_generators(ops, length)
    lo0 = 2 * period + 4 * scale
    probe = period + 2 * scale

    def window_rows(lo, width):
        return group.project_window(lo, lo + width - 1)

    minimal = period
    for p in range(1, period):
        if period % p:
            continue
        if window_rows(lo0, probe) == window_rows(lo0 + p, probe):
            minimal = p
            break
    win = minimal + 2 * scale
    best = None
    for delta in range(minimal):
        proj = window_rows(lo0 + delta, win)
        key = "|".join(format_pauli(g) for g in proj.generators) or "(trivial)"
        if best is None or key < best:
            best = key
    return best


def solve_periodic_1d(
    h: PeriodicHamiltonian1D, c_max: int = 6, collect_degenerate: bool = False
) -> PeriodicResult:
    """Exact stabilizer ground state energy per site of a 1D periodic chain."""
    if c_max < 1:
        raise ValueError("c_max must be >= 1")
    if not h.cell_terms:
        return PeriodicResult(0.0, 1, (), "(trivial)", "periodic1d")
    eng = _get_engine(h)
    weights = [w for w, _ in h.cell_terms]
    found = eng.cycle_search(weights, c_max)
    if not found:
        raise NoCycleFoundError(f"no cycle within c_max={c_max}; raise c_max")
    best_val = min(v for v, _, _ in found)
    tol = 1e-9 * max(1.0, abs(best_val))
    # smallest supercell first so float noise cannot inflate c
    winners = sorted(
        ((v, c, start) for v, c, start in found if v <= best_val + tol),
        key=lambda rec: (rec[1], rec[0], str(rec[2])),
    )

    def build(v, c, start):
        chain = eng.reconstruct(weights, start, c)
        gens, period = _cycle_generators(h, chain, c)
        strings = tuple(_gen_string(s, sites) for s, sites in gens)
        return PeriodicResult(
            v, c, strings, signature_of_generators(gens, period, eng.k), "periodic1d",
            f"{len(winners)} optimal cycle(s)",
        )

    results = []
    seen_sigs = set()
    for v, c, start in winners:
        r = build(v, c, start)
        if r.phase_signature not in seen_sigs:
            seen_sigs.add(r.phase_signature)
            results.append(r)
        if not collect_degenerate and results:
            break
    primary = results[0]
    if collect_degenerate:
        primary = PeriodicResult(
            primary.e_per_site,
            primary.supercell_c,
            primary.generators,
            primary.phase_signature,
            primary.algorithm_tag,
            primary.tie_break_note,
            tuple(results[1:]),
        )
    return primary


# ---------------------------------------------------------------------------
# wrapped supercell (c = 1) and the rotation scan
# ---------------------------------------------------------------------------


def wrapped_instances(h: SupercellHamiltonian):
    """All torus translates per template; rejects non-Hermitian wraps."""
    per_template = []
    for w, entries in h.terms:
        ops = []
        for shift in h.cells():
            op = h.wrapped_term(entries, shift)
            if not op.is_hermitian:
                raise HamiltonianError(
                    f"term {entries} wraps onto itself non-Hermitianly; enlarge dims"
                )
            ops.append(op)
        per_template.append(ops)
    return per_template


def _self_commuting_templates(h: SupercellHamiltonian, per_template):
    """Indices of templates commuting with every one of their own translates.

    Evaluated on an enlarged torus so wrapping cannot overlay a pair of
    translates on extra shared qubits: the check reflects the infinite
    lattice even when the working torus is as small as one period.
    """
    reach = [0] * len(h.dims)
    for _, entries in h.terms:
        for _, off, _ in entries:
            for d, o in enumerate(off):
                reach[d] = max(reach[d], abs(o))
    big_dims = tuple(max(dim, 2 * r + 3) for dim, r in zip(h.dims, reach))
    big = SupercellHamiltonian(big_dims, h.sites_per_cell, h.terms)
    keep = []
    for t, (_, entries) in enumerate(big.terms):
        anchor = big.wrapped_term(entries, (0,) * len(big_dims))
        if not anchor.is_hermitian:
            continue
        ok = True
        for shift in big.cells():
            other = big.wrapped_term(entries, shift)
            if not commutes(anchor, other):
                ok = False
                break
        if ok:
            keep.append(t)
    return keep


def _torus_hamiltonian(h: SupercellHamiltonian, per_template) -> Hamiltonian:
    pairs = []
    for (w, _), ops in zip(h.terms, per_template):
        for op in ops:
            pairs.append((w, op))
    return Hamiltonian.from_terms(h.n_qubits, pairs)


def _normalize_entries(h: SupercellHamiltonian, entries):
    best = None
    for shift in h.cells():
        moved = tuple(
            sorted(
                (c, tuple((o + s) % d for o, s, d in zip(off, shift, h.dims)), site)
                for c, off, site in entries
            )
        )
        if best is None or moved < best:
            best = moved
    return best


def solve_supercell_c1(h: SupercellHamiltonian, max_templates_guard: int = 24) -> PeriodicResult:
    """Minimum over translation-invariant selections on the wrapped torus.

    Selections commit whole orbits of a signed template; terms that
    anticommute with one of their own translates can never be selected
    and are excluded before the search.
    """
    per_template = wrapped_instances(h)
    torus_h = _torus_hamiltonian(h, per_template)
    keep = _self_commuting_templates(h, per_template)
    if len(keep) > max_templates_guard:
        raise GuardExceededError(
            f"{len(keep)} templates exceed the guard {max_templates_guard}"
        )

    n_q = h.n_qubits
    candidates = []
    for t in keep:
        candidates.append((t, 0))
        candidates.append((t, 1))

    def commit(group: StabGroup, t: int, sb: int) -> StabGroup | None:
        for op in per_template[t]:
            try:
                group = group.extend(op if sb == 0 else op.negated())
            except StabGroupError:
                return None
        return group

    seen = {(): True}
    best = (e_stab(torus_h, StabGroup.trivial(n_q)), 0, StabGroup.trivial(n_q))
    counter = [0]
    ties = [1]

    def visit(group: StabGroup, energy: float):
        nonlocal best
        counter[0] += 1
        if energy < best[0]:
            best = (energy, counter[0], group)
            ties[0] = 1
        elif energy == best[0] and group is not best[2]:
            ties[0] += 1
        for t, sb in candidates:
            child = commit(group, t, sb)
            if child is None or child.rows in seen:
                continue
            seen[child.rows] = True
            visit(child, e_stab(torus_h, child))

    visit(best[2], best[0])
    energy, _, group = best

    gens = []
    for t, ops in enumerate(per_template):
        signs = {group.member_sign(op) for op in ops}
        if signs == {"plus"}:
            gens.append((1, t))
        elif signs == {"minus"}:
            gens.append((-1, t))
        elif signs not in ({"absent"}, set()):
            raise StabGroupError("selection lost translation invariance")
    gen_strings = []
    sig_parts = []
    for sign, t in gens:
        norm = _normalize_entries(h, h.terms[t][1])
        body = " ".join(
            "{}@({},{})".format(c, ",".join(str(o) for o in off), s) for c, off, s in norm
        )
        sig_parts.append(("+" if sign > 0 else "-") + body)
        gen_strings.append(("+" if sign > 0 else "-") + body)
    signature = "|".join(sorted(sig_parts)) if sig_parts else "(trivial)"
    note = f"dfs-first-minimum; {ties[0]} selection(s) at E_min"
    return PeriodicResult(
        energy / n_q, 1, tuple(gen_strings), signature, "supercell_c1", note
    )


def evaluate_branch(h: SupercellHamiltonian, branch) -> float:
    """Energy per site of a fixed translation-invariant selection.

    ``branch``: iterable of (sign, entries) template descriptors; all
    torus translates of each are taken as generators.
    """
    per_template = wrapped_instances(h)
    torus_h = _torus_hamiltonian(h, per_template)
    gens = []
    for sign, entries in branch:
        for shift in h.cells():
            op = h.wrapped_term(entries, shift)
            gens.append(op if sign > 0 else op.negated())
    group = StabGroup.from_generators(gens, h.n_qubits) if gens else StabGroup.trivial(h.n_qubits)
    return e_stab(torus_h, group) / h.n_qubits


def extended_scan(h: SupercellHamiltonian, angle_grid):
    """Solve the rotated model on each (alpha, beta) grid point.

    alpha rotates vertical-bond sites (site 0 in each cell), beta the
    horizontal-bond sites (site 1).  Returns (results, argmin_point).
    """
    if not angle_grid:
        raise ValueError("angle grid must be non-empty")
    results = {}
    best_point = None
    for alpha, beta in angle_grid:
        rotated = rotate_y(h, {0: alpha, 1: beta})
        res = solve_supercell_c1(rotated)
        results[(alpha, beta)] = res
        key = (res.e_per_site, (alpha, beta), res.phase_signature)
        if best_point is None or key < best_point:
            best_point = key
    return results, best_point[1]
