"""Dense maximum-weight assignment.

``solve_max_assignment`` is an O(n^3) shortest-augmenting-path solver
(Kuhn-Munkres with row/column potentials) over a complete weighted bipartite
graph. Among all maximizing bijections it returns the lexicographically
smallest one, viewed as the sequence ``column_of_row[0..n-1]``: after the
optimum is found, the assignment is greedily re-shaped inside the subgraph of
dual-tight edges, where every perfect matching attains the optimal total.

``brute_force_max_assignment`` enumerates all n! permutations and is the
independent cross-check for the solver; it applies the same tie-break.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DomainError

# Edges whose dual slack is below this (relative to the weight scale) are
# treated as tight during tie-break refinement. Kept far below the 1e-9
# optimality tolerance so over-admission cannot move a total noticeably.
_TIGHT_SLACK_SCALE = 1e-11

# Refined totals may differ from the solver's total only by float summation
# order; anything worse falls back to the unrefined assignment.
_REFINE_GUARD_SCALE = 1e-9

BRUTE_FORCE_LIMIT = 10


def _check_square(weights) -> np.ndarray:
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"weight matrix must be square, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DomainError("weight matrix must have n >= 1")
    if not np.isfinite(arr).all():
        raise DomainError("weight matrix entries must be finite")
    return arr


def _hungarian_min(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum-cost perfect assignment; returns (column_of_row, u, v).

    Classic potentials formulation with a virtual column 0; ``u`` is indexed
    by row 1..n and ``v`` by column 0..n. Matched edges are dual-tight:
    cost[i][j] == u[i+1] + v[j+1] up to float rounding.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            free = ~used[1:]
            improve = free & (cur < minv[1:])
            if improve.any():
                minv[1:][improve] = cur[improve]
                way[1:][improve] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1  # first minimum: deterministic
            delta = masked[j1 - 1]
            used_idx = np.flatnonzero(used)
            u[p[used_idx]] += delta
            v[used_idx] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    column_of_row = np.empty(n, dtype=np.int64)
    column_of_row[p[1:] - 1] = np.arange(n)
    return column_of_row, u, v


def _lex_refine(
    weights: np.ndarray,
    column_of_row: np.ndarray,
    row_pot: np.ndarray,
    col_pot: np.ndarray,
) -> np.ndarray:
    """Lexicographically smallest perfect matching within the tight subgraph."""
    n = weights.shape[0]
    scale = max(1.0, float(np.abs(weights).max()))
    slack = row_pot[:, None] + col_pot[None, :] - weights
    tight = slack <= _TIGHT_SLACK_SCALE * scale
    # The solver's own edges are tight up to rounding; force them in so a
    # perfect matching always exists in the subgraph.
    tight[np.arange(n), column_of_row] = True
    adj = [np.flatnonzero(tight[i]).tolist() for i in range(n)]
    match_c = [int(c) for c in column_of_row]
    match_r = [-1] * n
    for row, col in enumerate(match_c):
        match_r[col] = row
    fixed_cols = [False] * n

    def augment(row: int, visited: set[int]) -> bool:
        for col in adj[row]:
            if fixed_cols[col] or col in visited:
                continue
            visited.add(col)
            owner = match_r[col]
            if owner == -1 or augment(owner, visited):
                match_r[col] = row
                match_c[row] = col
                return True
        return False

    for i in range(n):
        for col in adj[i]:
            if fixed_cols[col]:
                continue
            if col == match_c[i]:
                break  # nothing smaller was feasible; keep the current column
            owner = match_r[col]
            old = match_c[i]
            match_c[i] = col
            match_r[col] = i
            match_c[owner] = -1
            match_r[old] = -1
            if augment(owner, set()):
                break
            match_c[owner] = col  # revert the tentative swap
            match_r[col] = owner
            match_c[i] = old
            match_r[old] = i
        fixed_cols[match_c[i]] = True
    return np.array(match_c, dtype=np.int64)


def assignment_total(weights: np.ndarray, column_of_row: np.ndarray) -> float:
    return float(weights[np.arange(len(column_of_row)), column_of_row].sum())


def solve_max_assignment(weights) -> tuple[np.ndarray, float]:
    """Maximum-total perfect assignment of a square weight matrix.

    Returns ``(column_of_row, total)``. Deterministic: ties between optimal
    bijections resolve to the lexicographically smallest permutation.
    """
    w = _check_square(weights)
    n = w.shape[0]
    column_of_row, u, v = _hungarian_min(-w)
    total = assignment_total(w, column_of_row)
    refined = _lex_refine(w, column_of_row, -u[1:], -v[1:])
    refined_total = assignment_total(w, refined)
    guard = _REFINE_GUARD_SCALE * max(1.0, abs(total))
    if refined_total >= total - guard:
        return refined, refined_total
    return column_of_row, total  # pathological near-tie: keep the proven optimum


_PERM_TABLES: dict[int, np.ndarray] = {}


def _perm_table(n: int) -> np.ndarray:
    if n not in _PERM_TABLES:
        _PERM_TABLES[n] = np.array(
            list(itertools.permutations(range(n))), dtype=np.int64
        )
    return _PERM_TABLES[n]


def brute_force_max_assignment(weights) -> tuple[np.ndarray, float]:
    """Exhaustive maximum over all n! bijections; guard-limited to n <= 10.

    Permutations are scanned in lexicographic order and only a strictly
    better total replaces the incumbent, which yields the same tie-break as
    :func:`solve_max_assignment`.
    """
    w = _check_square(weights)
    n = w.shape[0]
    if n > BRUTE_FORCE_LIMIT:
        raise DomainError(
            f"exhaustive matching is limited to n <= {BRUTE_FORCE_LIMIT}, got n = {n}"
        )
    if n <= 8:
        perms = _perm_table(n)
        totals = w[np.arange(n), perms].sum(axis=1)
        best = int(np.argmax(totals))  # first maximum: lexicographically smallest
        return perms[best].copy(), float(totals[best])
    rows = w.tolist()
    best_perm = None
    best_total = -np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(rows[i][j] for i, j in enumerate(perm))
        if total > best_total:
            best_total = total
            best_perm = perm
    return np.array(best_perm, dtype=np.int64), float(best_total)
