"""Synthetic linked populations and real-world data corruption.

Genotypes are drawn per SNP under Hardy-Weinberg proportions from the panel's
minor allele frequencies: P(2) = p^2, P(1) = 2p(1-p), P(0) = (1-p)^2. Trait
values are then sampled from the model's tables given the drawn calls; a
trait backed by several markers uses the normalized product of its per-marker
columns, the same combination rule the scoring kernel applies. Generator and
attacker therefore share one probabilistic world, which makes supervised
training on generated data well-posed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .defenses import _flip_calls
from .errors import DomainError
from .genome import MISSING, GenotypeDatabase, PhenotypeDatabase, SnpPanel
from .traits import TraitModel


@dataclass(frozen=True)
class PopulationConfig:
    """Inputs of one synthetic population draw."""

    panel: SnpPanel
    model: TraitModel
    size: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise DomainError(f"population size must be a positive integer, got {self.size!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise DomainError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.panel.rsids != self.model.panel.rsids:
            raise DomainError("population panel does not match the model's panel")


def _individual_ids(n: int) -> tuple[str, ...]:
    return tuple(f"ind{i:06d}" for i in range(n))


def generate_population(cfg: PopulationConfig) -> tuple[GenotypeDatabase, PhenotypeDatabase]:
    """Draw a linked (genotype, phenotype) pair of databases.

    Deterministic in the config: one seeded stream, fixed draw order (all
    calls first, then one draw column per trait).
    """
    rng = np.random.default_rng(cfg.seed)
    n, m = cfg.size, len(cfg.panel)
    p = cfg.panel.mafs()
    hom_minor = p * p
    het = hom_minor + 2.0 * p * (1.0 - p)
    u = rng.random((n, m))
    calls = np.where(u < hom_minor[None, :], 2, np.where(u < het[None, :], 1, 0)).astype(
        np.int8
    )

    traits = cfg.model.traits
    values = np.full((n, len(traits)), MISSING, dtype=np.int8)
    terms = cfg.model.scoring_terms()
    for t_idx, trait in enumerate(traits):
        k = len(trait.domain)
        log_weight = np.zeros((n, k), dtype=np.float64)
        for trait_name, _trait_def, col, log_table in terms:
            if trait_name != trait.name:
                continue
            c = calls[:, col]
            present = (c != MISSING)[:, None]
            log_weight += np.where(present, log_table[np.maximum(c, 0), :], 0.0)
        log_weight -= log_weight.max(axis=1, keepdims=True)
        weight = np.exp(log_weight)
        weight /= weight.sum(axis=1, keepdims=True)
        draw = rng.random((n, 1))
        values[:, t_idx] = np.minimum(
            (weight.cumsum(axis=1) < draw).sum(axis=1), k - 1
        ).astype(np.int8)

    ids = _individual_ids(n)
    return (
        GenotypeDatabase(cfg.panel, ids, calls),
        PhenotypeDatabase(traits, ids, values),
    )


def inject_phenotype_errors(
    pdb: PhenotypeDatabase, rate: float, seed: int
) -> PhenotypeDatabase:
    """Collection-error model: each present value flipped with probability
    ``rate`` to a uniformly chosen different domain value."""
    if not 0.0 <= rate <= 1.0:
        raise DomainError(f"error rate must be in [0, 1], got {rate!r}")
    rng = np.random.default_rng(seed)
    out = np.array(pdb.values, copy=True)
    for t_idx, trait in enumerate(pdb.traits):
        k = len(trait.domain)
        flip = rng.random(len(pdb)) < rate
        offset = rng.integers(1, k, size=len(pdb), dtype=np.int8)
        col = out[:, t_idx]
        target = flip & (col != MISSING)
        col[target] = (col[target] + offset[target]) % k
    if pdb.salted:
        return type(pdb)(pdb.traits, pdb.ids, out, pdb.key_fingerprint)
    return PhenotypeDatabase(pdb.traits, pdb.ids, out)


def inject_sequencing_errors(
    gdb: GenotypeDatabase, rate: float, seed: int
) -> GenotypeDatabase:
    """Pre-attack data corruption; same flip mechanics as the noise defense."""
    if not 0.0 <= rate <= 1.0:
        raise DomainError(f"error rate must be in [0, 1], got {rate!r}")
    return GenotypeDatabase(gdb.panel, gdb.ids, _flip_calls(gdb.calls, rate, seed))
