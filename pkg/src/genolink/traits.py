"""Trait probability tables and the likelihood kernel both attacks share.

A model is a list of (trait, marker) associations, each holding a conditional
probability table P(trait value | minor-allele count). Traits, and the
markers behind one trait, are treated as conditionally independent given the
genotype, so a (profile, genotype) pair scores as the sum of log table
entries over every association observed on both sides. Scores only ever feed
rankings and assignments, so relative order is what matters.

Every table cell is kept at or above ``PROBABILITY_FLOOR`` so that a single
zero entry can never veto a candidate outright and scores stay finite.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ModelFormatError
from .genome import (
    MISSING,
    Genotype,
    GenotypeDatabase,
    PhenotypeDatabase,
    PhenotypeProfile,
    SnpPanel,
    TraitDef,
)

PROBABILITY_FLOOR = 1e-6
RAW_ROW_SUM_TOLERANCE = 1e-6  # accepted drift of file rows before normalization
LAPLACE_ALPHA = 1.0


class Provenance(enum.Enum):
    """How a model's tables were obtained."""

    CURATED = "curated"
    SUPERVISED = "supervised"


class Cpt:
    """P(trait value | call) as a 3 x |domain| table.

    Rows are indexed by minor-allele count 0/1/2. Any nonnegative weights are
    accepted: each row is floored at ``PROBABILITY_FLOOR`` and renormalized,
    so rows sum to 1 within 1e-9 and no cell can reach zero.
    """

    def __init__(self, table):
        arr = np.array(table, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != 3 or arr.shape[1] < 2:
            raise DomainError(f"cpt must have shape (3, k>=2), got {arr.shape}")
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise DomainError("cpt entries must be finite and nonnegative")
        arr = np.maximum(arr, PROBABILITY_FLOOR)
        arr = arr / arr.sum(axis=1, keepdims=True)
        # Renormalization can push a floored cell a hair under the floor;
        # re-clipping shifts row sums by far less than the 1e-9 tolerance.
        arr = np.maximum(arr, PROBABILITY_FLOOR)
        arr.setflags(write=False)
        self._table = arr
        log = np.log(arr)
        log.setflags(write=False)
        self._log_table = log

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def log_table(self) -> np.ndarray:
        return self._log_table

    @property
    def width(self) -> int:
        return self._table.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cpt):
            return NotImplemented
        return np.array_equal(self._table, other._table)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Cpt(width={self.width})"


@dataclass(frozen=True)
class Association:
    """One (trait, marker) edge of the relational model."""

    trait: str
    rsid: str
    cpt: Cpt


class TraitModel:
    """Associations bound to a panel and a trait set, ready for scoring."""

    def __init__(
        self,
        panel: SnpPanel,
        traits: Iterable[TraitDef],
        associations: Iterable[Association],
        provenance: Provenance,
    ):
        if not isinstance(provenance, Provenance):
            raise DomainError(f"provenance must be a Provenance, got {provenance!r}")
        traits = tuple(traits)
        associations = tuple(associations)
        by_name: dict[str, TraitDef] = {}
        for trait in traits:
            if trait.name in by_name:
                raise DomainError(f"duplicate trait {trait.name!r} in model")
            by_name[trait.name] = trait
        seen_pairs = set()
        covered = set()
        for assoc in associations:
            if assoc.trait not in by_name:
                raise DomainError(f"association references unknown trait {assoc.trait!r}")
            if assoc.rsid not in panel:
                raise DomainError(f"association references unknown rsid {assoc.rsid!r}")
            if assoc.cpt.width != len(by_name[assoc.trait].domain):
                raise DomainError(
                    f"cpt width {assoc.cpt.width} does not match domain of "
                    f"trait {assoc.trait!r}"
                )
            pair = (assoc.trait, assoc.rsid)
            if pair in seen_pairs:
                raise DomainError(f"duplicate association {pair!r}")
            seen_pairs.add(pair)
            covered.add(assoc.trait)
        for trait in traits:
            if trait.name not in covered:
                raise DomainError(f"trait {trait.name!r} has no associations")
        self._panel = panel
        self._traits = traits
        self._by_name = by_name
        self._associations = associations
        self._provenance = provenance
        # (trait name, trait def, panel column, log table) in association order
        self._terms = tuple(
            (a.trait, by_name[a.trait], panel.index_of(a.rsid), a.cpt.log_table)
            for a in associations
        )

    @property
    def panel(self) -> SnpPanel:
        return self._panel

    @property
    def traits(self) -> tuple[TraitDef, ...]:
        return self._traits

    @property
    def associations(self) -> tuple[Association, ...]:
        return self._associations

    @property
    def provenance(self) -> Provenance:
        return self._provenance

    def trait(self, name: str) -> TraitDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise DomainError(f"model does not cover trait {name!r}") from None

    def trait_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self._traits)

    def scoring_terms(self) -> tuple[tuple[str, TraitDef, int, np.ndarray], ...]:
        """Resolved (trait name, trait def, panel column, log table) tuples."""
        return self._terms

    def restricted_to(self, panel: SnpPanel) -> "TraitModel":
        """Model over ``panel`` only; traits left with no markers are dropped."""
        kept = tuple(a for a in self._associations if a.rsid in panel)
        kept_names = {a.trait for a in kept}
        kept_traits = tuple(t for t in self._traits if t.name in kept_names)
        return TraitModel(panel, kept_traits, kept, self._provenance)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraitModel):
            return NotImplemented
        return (
            self._panel == other._panel
            and self._traits == other._traits
            and self._associations == other._associations
            and self._provenance is other._provenance
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"TraitModel(traits={len(self._traits)}, "
            f"associations={len(self._associations)}, "
            f"provenance={self._provenance.value})"
        )


# ---------------------------------------------------------------------------
# model file format


def model_payload(model: TraitModel) -> list[dict]:
    """JSON-ready form of a model: the documented curated-model schema."""
    out = []
    for trait in model.traits:
        entry = {
            "trait": trait.name,
            "domain": list(trait.domain),
            "associations": [
                {"rsid": a.rsid, "cpt": [float(x) for x in a.cpt.table.ravel()]}
                for a in model.associations
                if a.trait == trait.name
            ],
        }
        out.append(entry)
    return out


def save_model(model: TraitModel, path) -> None:
    Path(path).write_text(
        json.dumps(model_payload(model), indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def parse_model_entries(entries, panel: SnpPanel, traits: Sequence[TraitDef]) -> TraitModel:
    """Build a curated model from already-decoded JSON entries."""
    if not isinstance(entries, list) or not entries:
        raise ModelFormatError("model must be a non-empty list of trait entries")
    defs = {t.name: t for t in traits}
    model_traits: list[TraitDef] = []
    associations: list[Association] = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise ModelFormatError(f"trait entry must be an object, got {entry!r}")
        extra = set(entry) - {"trait", "domain", "associations"}
        if extra:
            raise ModelFormatError(f"unknown keys {sorted(extra)} in trait entry")
        for key in ("trait", "domain", "associations"):
            if key not in entry:
                raise ModelFormatError(f"trait entry is missing {key!r}")
        name = entry["trait"]
        if name not in defs:
            raise ModelFormatError(f"unknown trait {name!r}")
        trait = defs[name]
        if tuple(entry["domain"]) != trait.domain:
            raise ModelFormatError(
                f"domain mismatch for trait {name!r}: file has {entry['domain']}, "
                f"expected {list(trait.domain)}"
            )
        if any(t.name == name for t in model_traits):
            raise ModelFormatError(f"trait {name!r} appears twice")
        model_traits.append(trait)
        if not isinstance(entry["associations"], list) or not entry["associations"]:
            raise ModelFormatError(f"trait {name!r} needs at least one association")
        for assoc in entry["associations"]:
            if not isinstance(assoc, dict) or set(assoc) != {"rsid", "cpt"}:
                raise ModelFormatError(
                    f"association for trait {name!r} needs exactly 'rsid' and 'cpt'"
                )
            rsid = assoc["rsid"]
            if rsid not in panel:
                raise ModelFormatError(f"unknown rsid {rsid!r} for trait {name!r}")
            flat = assoc["cpt"]
            k = len(trait.domain)
            if (
                not isinstance(flat, list)
                or len(flat) != 3 * k
                or not all(isinstance(x, (int, float)) for x in flat)
            ):
                raise ModelFormatError(
                    f"cpt for ({name!r}, {rsid!r}) must be a flat row-major list "
                    f"of {3 * k} numbers"
                )
            raw = np.array(flat, dtype=np.float64).reshape(3, k)
            if (raw < 0).any() or not np.isfinite(raw).all():
                raise ModelFormatError(
                    f"cpt for ({name!r}, {rsid!r}) has negative or non-finite entries"
                )
            sums = raw.sum(axis=1)
            for call, s in enumerate(sums):
                if abs(s - 1.0) > RAW_ROW_SUM_TOLERANCE:
                    raise ModelFormatError(
                        f"cpt row for call {call} of ({name!r}, {rsid!r}) sums to {s!r}"
                    )
            associations.append(Association(name, rsid, Cpt(raw)))
    return TraitModel(panel, tuple(model_traits), tuple(associations), Provenance.CURATED)


def load_curated_model(path, panel: SnpPanel, traits: Sequence[TraitDef]) -> TraitModel:
    """Load a curated model file and validate it against ``panel`` and ``traits``."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        return parse_model_entries(obj, panel, traits)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# training and scoring


def train_supervised(
    gdb: GenotypeDatabase,
    pdb: PhenotypeDatabase,
    associations: Iterable[tuple[str, str]],
) -> TraitModel:
    """Estimate per-association tables from linked data with Laplace smoothing.

    Cell (g, v) becomes (count[g, v] + 1) / (sum_v count[g, v] + |domain|),
    counting individuals present in both databases whose call and trait value
    are both observed. Rows with no evidence fall back to uniform.
    """
    pairs = tuple(associations)
    if not pairs:
        raise DomainError("no associations given")
    shared = sorted(set(gdb.ids) & set(pdb.ids))
    if not shared:
        raise DomainError("databases share no individual ids")
    g_rows = np.array([gdb.index_of(i) for i in shared], dtype=np.int64)
    p_rows = np.array([pdb.index_of(i) for i in shared], dtype=np.int64)
    trait_defs = {t.name: t for t in pdb.traits}
    built: list[Association] = []
    seen = set()
    for trait_name, rsid in pairs:
        if trait_name not in trait_defs:
            raise DomainError(f"association references unknown trait {trait_name!r}")
        if rsid not in gdb.panel:
            raise DomainError(f"association references unknown rsid {rsid!r}")
        if (trait_name, rsid) in seen:
            raise DomainError(f"duplicate association {(trait_name, rsid)!r}")
        seen.add((trait_name, rsid))
        k = len(trait_defs[trait_name].domain)
        calls = gdb.calls[g_rows, gdb.panel.index_of(rsid)]
        values = pdb.values[p_rows, pdb.trait_index(trait_name)]
        observed = (calls != MISSING) & (values != MISSING)
        counts = np.zeros((3, k), dtype=np.float64)
        np.add.at(counts, (calls[observed], values[observed]), 1.0)
        raw = (counts + LAPLACE_ALPHA) / (
            counts.sum(axis=1, keepdims=True) + LAPLACE_ALPHA * k
        )
        built.append(Association(trait_name, rsid, Cpt(raw)))
    covered = {a.trait for a in built}
    model_traits = tuple(t for t in pdb.traits if t.name in covered)
    return TraitModel(gdb.panel, model_traits, tuple(built), Provenance.SUPERVISED)


def log_likelihood(model: TraitModel, profile: PhenotypeProfile, genotype: Genotype) -> float:
    """Log score of one (profile, genotype) pair under the model.

    Sums log P(value | call) over associations where both the trait value and
    the call are observed; pairs with nothing in common score 0. Always
    finite and never positive.
    """
    if len(genotype.calls) != len(model.panel):
        raise DomainError(
            f"genotype has {len(genotype.calls)} calls, model panel has "
            f"{len(model.panel)}"
        )
    total = 0.0
    for trait_name, trait_def, col, log_table in model.scoring_terms():
        value = profile.value(trait_name)
        if value is None:
            continue
        call = genotype.calls[col]
        if call == MISSING:
            continue
        total += float(log_table[call, trait_def.value_index(value)])
    return total


def perturb_model(model: TraitModel, magnitude: float, seed: int) -> TraitModel:
    """Mis-specified copy: every table cell shifted by U(-magnitude, +magnitude).

    Shifted rows are clipped at zero and renormalized, modelling curated
    knowledge that is systematically off by up to ``magnitude``.
    """
    if not 0.0 <= magnitude < 1.0:
        raise DomainError(f"perturbation magnitude must be in [0, 1), got {magnitude}")
    rng = np.random.default_rng(seed)
    out = []
    for assoc in model.associations:
        raw = assoc.cpt.table + rng.uniform(
            -magnitude, magnitude, size=assoc.cpt.table.shape
        )
        raw = np.clip(raw, 0.0, None)
        if (raw.sum(axis=1) <= 0.0).any():
            raise DomainError("perturbation wiped out an entire cpt row")
        out.append(Association(assoc.trait, assoc.rsid, Cpt(raw)))
    return TraitModel(model.panel, model.traits, tuple(out), model.provenance)


def min_possible_term() -> float:
    """Lower bound of a single observed scoring term."""
    return math.log(PROBABILITY_FLOOR)
