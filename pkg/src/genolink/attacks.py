"""The two linkage attacks over a likelihood matrix.

The identification attack ranks every genotype in a database by the log
likelihood that it produced one observed phenotype profile. The matching
attack treats a phenotype set and a genotype set as the two sides of a
complete weighted bipartite graph and returns the one-to-one assignment that
maximizes the summed log weights.

Everything here is pure and deterministic: ranking ties break by ascending
genotype id, assignment ties by the lexicographically smallest permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import brute_force_max_assignment, solve_max_assignment
from .errors import DomainError
from .genome import MISSING, GenotypeDatabase, PhenotypeDatabase, PhenotypeProfile
from .traits import TraitModel


@dataclass(frozen=True)
class LikelihoodMatrix:
    """Complete |P| x |G| grid of finite log scores, with row/column ids."""

    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        arr = np.array(self.scores, dtype=np.float64, copy=True)
        if arr.shape != (len(self.row_ids), len(self.col_ids)):
            raise DomainError(
                f"scores shape {arr.shape} does not match ids "
                f"({len(self.row_ids)} x {len(self.col_ids)})"
            )
        if min(arr.shape) < 1:
            raise DomainError("likelihood matrix must be non-empty on both sides")
        if not np.isfinite(arr).all():
            raise DomainError("likelihood matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LikelihoodMatrix):
            return NotImplemented
        return (
            self.row_ids == other.row_ids
            and self.col_ids == other.col_ids
            and np.array_equal(self.scores, other.scores)
        )

    __hash__ = None


@dataclass(frozen=True)
class RankedCandidates:
    """Genotype ids with scores, best first; ties ordered by ascending id."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        entries = tuple((str(i), float(s)) for i, s in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise DomainError("ranking must contain at least one candidate")
        ids = [i for i, _ in entries]
        if len(set(ids)) != len(ids):
            raise DomainError("ranking contains duplicate genotype ids")
        for (id_a, score_a), (id_b, score_b) in zip(entries, entries[1:]):
            if score_b > score_a:
                raise DomainError("ranking scores must be non-increasing")
            if score_b == score_a and id_b < id_a:
                raise DomainError("tied candidates must be ordered by ascending id")

    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.entries)

    def top(self, k: int) -> tuple[tuple[str, float], ...]:
        return self.entries[:k]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class Assignment:
    """Bijection row index -> column index plus its total log weight."""

    column_of_row: tuple[int, ...]
    total: float

    def __post_init__(self):
        mapping = tuple(int(c) for c in self.column_of_row)
        object.__setattr__(self, "column_of_row", mapping)
        object.__setattr__(self, "total", float(self.total))
        if sorted(mapping) != list(range(len(mapping))):
            raise DomainError("assignment mapping must be a permutation")

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(enumerate(self.column_of_row))

    def __len__(self) -> int:
        return len(self.column_of_row)


# ---------------------------------------------------------------------------
# scoring


def _check_model_against(model: TraitModel, pdb: PhenotypeDatabase) -> None:
    pdb_domains = {t.name: t.domain for t in pdb.traits}
    for trait in model.traits:
        if trait.name in pdb_domains and pdb_domains[trait.name] != trait.domain:
            raise DomainError(
                f"trait {trait.name!r} has different domains in model and database"
            )


def _check_panel(model: TraitModel, gdb: GenotypeDatabase) -> None:
    if gdb.panel.rsids != model.panel.rsids:
        raise DomainError("genotype panel does not match the model's panel")


def _genotype_scores(model: TraitModel, value_of_trait, gdb: GenotypeDatabase) -> np.ndarray:
    """Scores of one profile against every genotype; ``value_of_trait`` maps
    trait name -> domain index or MISSING."""
    scores = np.zeros(len(gdb), dtype=np.float64)
    for trait_name, _trait_def, col, log_table in model.scoring_terms():
        vi = value_of_trait(trait_name)
        if vi == MISSING:
            continue
        calls = gdb.calls[:, col]
        present = calls != MISSING
        safe = np.maximum(calls, 0)
        scores += np.where(present, log_table[safe, vi], 0.0)
    return scores


def build_likelihood_matrix(
    model: TraitModel, pdb: PhenotypeDatabase, gdb: GenotypeDatabase
) -> LikelihoodMatrix:
    """Score every (profile, genotype) pair; entry (x, j) equals
    ``log_likelihood(model, profile_x, genotype_j)`` exactly."""
    if len(pdb) == 0 or len(gdb) == 0:
        raise DomainError("both databases must be non-empty")
    _check_panel(model, gdb)
    _check_model_against(model, pdb)
    pdb_cols = {t.name: i for i, t in enumerate(pdb.traits)}
    scores = np.zeros((len(pdb), len(gdb)), dtype=np.float64)
    for trait_name, _trait_def, col, log_table in model.scoring_terms():
        if trait_name not in pdb_cols:
            continue  # trait absent from this database: no observed terms
        values = pdb.values[:, pdb_cols[trait_name]]
        calls = gdb.calls[:, col]
        valid = (values[:, None] != MISSING) & (calls[None, :] != MISSING)
        term = log_table[np.maximum(calls, 0)[None, :], np.maximum(values, 0)[:, None]]
        scores += np.where(valid, term, 0.0)
    return LikelihoodMatrix(pdb.ids, gdb.ids, scores)


def identification_attack(
    model: TraitModel, profile: PhenotypeProfile, gdb: GenotypeDatabase
) -> RankedCandidates:
    """Rank every genotype by the likelihood it produced ``profile``."""
    if len(gdb) == 0:
        raise DomainError("genotype database is empty")
    _check_panel(model, gdb)

    def value_of_trait(name: str) -> int:
        value = profile.value(name)
        if value is None:
            return MISSING
        return model.trait(name).value_index(value)

    scores = _genotype_scores(model, value_of_trait, gdb)
    order = sorted(range(len(gdb)), key=lambda j: (-scores[j], gdb.ids[j]))
    return RankedCandidates(tuple((gdb.ids[j], float(scores[j])) for j in order))


def matching_attack(matrix: LikelihoodMatrix) -> Assignment:
    """Globally optimal one-to-one pairing of the matrix rows and columns."""
    n_rows, n_cols = matrix.shape
    if n_rows != n_cols:
        raise DomainError(
            f"matching needs equal-size sides, got {n_rows} x {n_cols}"
        )
    column_of_row, total = solve_max_assignment(matrix.scores)
    return Assignment(tuple(int(c) for c in column_of_row), total)


def brute_force_matching(matrix: LikelihoodMatrix) -> Assignment:
    """Exhaustive reference for :func:`matching_attack` (n <= 10)."""
    n_rows, n_cols = matrix.shape
    if n_rows != n_cols:
        raise DomainError(
            f"matching needs equal-size sides, got {n_rows} x {n_cols}"
        )
    column_of_row, total = brute_force_max_assignment(matrix.scores)
    return Assignment(tuple(int(c) for c in column_of_row), total)
