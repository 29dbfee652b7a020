"""SNP panels, genotype/phenotype databases, and their on-disk formats.

Databases are immutable after construction and safe to share between threads.
File ingestion is strict: any header or cell that violates a type invariant
raises :class:`IngestionError` naming the offending row and column instead of
coercing silently, so experiment inputs reproduce bit-for-bit.

File formats
------------
Genotype file   UTF-8, comma-delimited, LF line endings.
                Header ``id,<rsid>,...,<rsid>`` in panel order; cells are
                ``0``/``1``/``2`` (minor-allele count) or ``NA``.
Phenotype file  Header ``id,<trait>,...,<trait>``; cells are a domain value
                or ``NA``. A salted database carries one leading comment line
                ``#salted:<fingerprint-hex>``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, IngestionError

MISSING = -1  # in-memory code for an absent call / trait value
NA_TOKEN = "NA"  # on-disk spelling of MISSING
SALT_HEADER_PREFIX = "#salted:"

_RESERVED_CHARS = (",", "\n", "\r")


def _check_token(kind: str, value: object) -> str:
    if not isinstance(value, str) or not value:
        raise DomainError(f"{kind} must be a non-empty string, got {value!r}")
    if any(c in value for c in _RESERVED_CHARS) or value.startswith("#"):
        raise DomainError(f"{kind} {value!r} uses characters reserved by the file format")
    return value


@dataclass(frozen=True)
class SnpDef:
    """One biallelic marker: stable identifier plus minor allele frequency."""

    rsid: str
    minor_allele_frequency: float

    def __post_init__(self):
        _check_token("rsid", self.rsid)
        maf = self.minor_allele_frequency
        if not isinstance(maf, (int, float)) or not 0.0 <= float(maf) <= 0.5:
            raise DomainError(
                f"minor allele frequency must lie in [0, 0.5], got {maf!r} for {self.rsid}"
            )
        object.__setattr__(self, "minor_allele_frequency", float(maf))


@dataclass(frozen=True)
class SnpPanel:
    """Ordered marker list; the order fixes the layout of genotype vectors."""

    snps: tuple[SnpDef, ...]

    def __post_init__(self):
        snps = tuple(self.snps)
        object.__setattr__(self, "snps", snps)
        seen = set()
        for snp in snps:
            if not isinstance(snp, SnpDef):
                raise DomainError(f"panel entries must be SnpDef, got {snp!r}")
            if snp.rsid in seen:
                raise DomainError(f"duplicate rsid {snp.rsid!r} in panel")
            seen.add(snp.rsid)
        object.__setattr__(self, "_index", {s.rsid: i for i, s in enumerate(snps)})

    @property
    def rsids(self) -> tuple[str, ...]:
        return tuple(s.rsid for s in self.snps)

    def mafs(self) -> np.ndarray:
        return np.array([s.minor_allele_frequency for s in self.snps], dtype=np.float64)

    def index_of(self, rsid: str) -> int:
        try:
            return self._index[rsid]
        except KeyError:
            raise DomainError(f"unknown rsid {rsid!r}") from None

    def without(self, rsid: str) -> "SnpPanel":
        idx = self.index_of(rsid)
        return SnpPanel(self.snps[:idx] + self.snps[idx + 1 :])

    def __len__(self) -> int:
        return len(self.snps)

    def __contains__(self, rsid: object) -> bool:
        return rsid in self._index

    def __iter__(self) -> Iterator[SnpDef]:
        return iter(self.snps)


@dataclass(frozen=True)
class Genotype:
    """Minor-allele counts over a panel; MISSING marks an unusable call."""

    calls: tuple[int, ...]

    def __post_init__(self):
        calls = tuple(int(c) for c in self.calls)
        for c in calls:
            if c not in (0, 1, 2, MISSING):
                raise DomainError(f"genotype call must be 0/1/2/MISSING, got {c}")
        object.__setattr__(self, "calls", calls)


@dataclass(frozen=True)
class TraitDef:
    """A categorical trait and its canonical value order."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        _check_token("trait name", self.name)
        domain = tuple(self.domain)
        object.__setattr__(self, "domain", domain)
        if len(domain) < 2:
            raise DomainError(f"trait {self.name!r} needs a domain of at least 2 values")
        seen = set()
        for value in domain:
            _check_token(f"trait value for {self.name!r}", value)
            if value == NA_TOKEN:
                raise DomainError(f"trait value {NA_TOKEN!r} is reserved for missing data")
            if value in seen:
                raise DomainError(f"duplicate value {value!r} in domain of {self.name!r}")
            seen.add(value)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(domain)})

    def value_index(self, value: str) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise DomainError(
                f"value {value!r} is not in the domain of trait {self.name!r}"
            ) from None


@dataclass(frozen=True)
class PhenotypeProfile:
    """Trait assignments for one individual; ``None`` marks a missing value."""

    assignments: Mapping[str, str | None]

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def value(self, trait_name: str) -> str | None:
        return self.assignments.get(trait_name)


def _as_id_tuple(ids: Iterable[str]) -> tuple[str, ...]:
    out = tuple(ids)
    seen = set()
    for individual_id in out:
        _check_token("individual id", individual_id)
        if individual_id in seen:
            raise DomainError(f"duplicate individual id {individual_id!r}")
        seen.add(individual_id)
    return out


class GenotypeDatabase:
    """Immutable (individuals x panel) table of SNP calls."""

    def __init__(self, panel: SnpPanel, ids: Iterable[str], calls: np.ndarray):
        if not isinstance(panel, SnpPanel):
            raise DomainError("panel must be a SnpPanel")
        self._panel = panel
        self._ids = _as_id_tuple(ids)
        arr = np.array(calls, dtype=np.int8, copy=True)
        if arr.shape != (len(self._ids), len(panel)):
            raise DomainError(
                f"calls must have shape {(len(self._ids), len(panel))}, got {arr.shape}"
            )
        if arr.size and not np.isin(arr, (0, 1, 2, MISSING)).all():
            raise DomainError("genotype calls must be 0/1/2/MISSING")
        arr.setflags(write=False)
        self._calls = arr
        self._row = {individual_id: i for i, individual_id in enumerate(self._ids)}

    @classmethod
    def from_records(
        cls, panel: SnpPanel, records: Iterable[tuple[str, Genotype]]
    ) -> "GenotypeDatabase":
        ids, rows = [], []
        for individual_id, genotype in records:
            if len(genotype.calls) != len(panel):
                raise DomainError(
                    f"genotype for {individual_id!r} has {len(genotype.calls)} calls, "
                    f"panel has {len(panel)}"
                )
            ids.append(individual_id)
            rows.append(genotype.calls)
        calls = np.array(rows, dtype=np.int8).reshape(len(ids), len(panel))
        return cls(panel, ids, calls)

    @property
    def panel(self) -> SnpPanel:
        return self._panel

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def calls(self) -> np.ndarray:
        """Read-only (n, len(panel)) int8 matrix; MISSING encoded as -1."""
        return self._calls

    def __len__(self) -> int:
        return len(self._ids)

    def index_of(self, individual_id: str) -> int:
        try:
            return self._row[individual_id]
        except KeyError:
            raise DomainError(f"unknown individual id {individual_id!r}") from None

    def genotype(self, index: int) -> Genotype:
        return Genotype(tuple(int(c) for c in self._calls[index]))

    def records(self) -> Iterator[tuple[str, Genotype]]:
        for i, individual_id in enumerate(self._ids):
            yield individual_id, self.genotype(i)

    def subset(self, indices: Iterable[int]) -> "GenotypeDatabase":
        rows = np.asarray(list(indices), dtype=np.int64)
        return GenotypeDatabase(
            self._panel, (self._ids[i] for i in rows), self._calls[rows]
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GenotypeDatabase):
            return NotImplemented
        return (
            type(self) is type(other)
            and self._panel == other._panel
            and self._ids == other._ids
            and np.array_equal(self._calls, other._calls)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"GenotypeDatabase(n={len(self)}, snps={len(self._panel)})"


class PhenotypeDatabase:
    """Immutable (individuals x traits) table of categorical trait values."""

    def __init__(self, traits: Iterable[TraitDef], ids: Iterable[str], values: np.ndarray):
        traits = tuple(traits)
        names = set()
        for trait in traits:
            if not isinstance(trait, TraitDef):
                raise DomainError(f"traits must be TraitDef, got {trait!r}")
            if trait.name in names:
                raise DomainError(f"duplicate trait {trait.name!r}")
            names.add(trait.name)
        self._traits = traits
        self._ids = _as_id_tuple(ids)
        arr = np.array(values, dtype=np.int8, copy=True)
        if arr.shape != (len(self._ids), len(traits)):
            raise DomainError(
                f"values must have shape {(len(self._ids), len(traits))}, got {arr.shape}"
            )
        if arr.size:
            widths = np.array([len(t.domain) for t in traits], dtype=np.int8)
            if (arr < MISSING).any() or (arr >= widths[None, :]).any():
                raise DomainError("phenotype value index outside its trait domain")
        arr.setflags(write=False)
        self._values = arr
        self._row = {individual_id: i for i, individual_id in enumerate(self._ids)}
        self._col = {t.name: i for i, t in enumerate(traits)}

    @classmethod
    def from_records(
        cls, traits: Iterable[TraitDef], records: Iterable[tuple[str, PhenotypeProfile]]
    ) -> "PhenotypeDatabase":
        traits = tuple(traits)
        known = {t.name for t in traits}
        ids, rows = [], []
        for individual_id, profile in records:
            for name in profile.assignments:
                if name not in known:
                    raise DomainError(
                        f"profile for {individual_id!r} names unknown trait {name!r}"
                    )
            row = []
            for trait in traits:
                value = profile.value(trait.name)
                row.append(MISSING if value is None else trait.value_index(value))
            ids.append(individual_id)
            rows.append(row)
        values = np.array(rows, dtype=np.int8).reshape(len(ids), len(traits))
        return cls(traits, ids, values)

    @property
    def traits(self) -> tuple[TraitDef, ...]:
        return self._traits

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def values(self) -> np.ndarray:
        """Read-only (n, len(traits)) int8 matrix of domain indices; MISSING = -1."""
        return self._values

    @property
    def salted(self) -> bool:
        return False

    def __len__(self) -> int:
        return len(self._ids)

    def index_of(self, individual_id: str) -> int:
        try:
            return self._row[individual_id]
        except KeyError:
            raise DomainError(f"unknown individual id {individual_id!r}") from None

    def trait_index(self, name: str) -> int:
        try:
            return self._col[name]
        except KeyError:
            raise DomainError(f"unknown trait {name!r}") from None

    def profile(self, index: int) -> PhenotypeProfile:
        row = self._values[index]
        return PhenotypeProfile(
            {
                t.name: (t.domain[v] if v != MISSING else None)
                for t, v in zip(self._traits, row)
            }
        )

    def records(self) -> Iterator[tuple[str, PhenotypeProfile]]:
        for i, individual_id in enumerate(self._ids):
            yield individual_id, self.profile(i)

    def subset(self, indices: Iterable[int]) -> "PhenotypeDatabase":
        rows = np.asarray(list(indices), dtype=np.int64)
        return PhenotypeDatabase(
            self._traits, (self._ids[i] for i in rows), self._values[rows]
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhenotypeDatabase):
            return NotImplemented
        return (
            type(self) is type(other)
            and self._traits == other._traits
            and self._ids == other._ids
            and np.array_equal(self._values, other._values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={len(self)}, traits={len(self._traits)})"


class SaltedPhenotypeDatabase(PhenotypeDatabase):
    """Phenotype table whose values passed through a keyed trait permutation.

    Schema-identical to :class:`PhenotypeDatabase`; the only additions are the
    ``salted`` flag and a one-way fingerprint of the key that produced it.
    """

    def __init__(
        self,
        traits: Iterable[TraitDef],
        ids: Iterable[str],
        values: np.ndarray,
        key_fingerprint: str,
    ):
        super().__init__(traits, ids, values)
        if (
            not isinstance(key_fingerprint, str)
            or len(key_fingerprint) != 64
            or any(c not in "0123456789abcdef" for c in key_fingerprint)
        ):
            raise DomainError("key fingerprint must be 64 lowercase hex characters")
        self._fingerprint = key_fingerprint

    @property
    def key_fingerprint(self) -> str:
        return self._fingerprint

    @property
    def salted(self) -> bool:
        return True

    def subset(self, indices: Iterable[int]) -> "SaltedPhenotypeDatabase":
        rows = np.asarray(list(indices), dtype=np.int64)
        return SaltedPhenotypeDatabase(
            self._traits,
            (self._ids[i] for i in rows),
            self._values[rows],
            self._fingerprint,
        )

    def __eq__(self, other: object) -> bool:
        base = super().__eq__(other)
        if base is NotImplemented or base is False:
            return base
        return self._fingerprint == other._fingerprint

    __hash__ = None


# ---------------------------------------------------------------------------
# file ingestion / serialization


def _read_lines(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if "\r" in text:
        raise IngestionError(f"{path}: CR line endings are not supported (LF only)")
    if text.endswith("\n"):
        text = text[:-1]
    if not text:
        raise IngestionError(f"{path}: file is empty")
    return text.split("\n")


def _check_header(path, header_line: str, expected: tuple[str, ...]) -> None:
    found = tuple(header_line.split(","))
    want = ("id",) + expected
    if found == want:
        return
    if len(found) != len(want):
        raise IngestionError(
            f"{path}: header has {len(found)} columns, expected {len(want)}"
        )
    for pos, (got, exp) in enumerate(zip(found, want)):
        if got != exp:
            raise IngestionError(
                f"{path}: header column {pos} is {got!r}, expected {exp!r}"
            )


def load_genotype_db(path, panel: SnpPanel) -> GenotypeDatabase:
    """Parse a genotype file against ``panel``; every invariant is enforced."""
    lines = _read_lines(path)
    _check_header(path, lines[0], panel.rsids)
    ids: list[str] = []
    seen: set[str] = set()
    rows = np.empty((len(lines) - 1, len(panel)), dtype=np.int8)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 1 + len(panel):
            raise IngestionError(
                f"{path}: row {lineno} has {len(parts)} fields, expected {1 + len(panel)}"
            )
        individual_id = parts[0]
        if not individual_id:
            raise IngestionError(f"{path}: row {lineno} has an empty id")
        if individual_id in seen:
            raise IngestionError(f"{path}: duplicate id {individual_id!r} at row {lineno}")
        seen.add(individual_id)
        for col, cell in enumerate(parts[1:]):
            if cell == NA_TOKEN:
                rows[len(ids), col] = MISSING
            elif cell in ("0", "1", "2"):
                rows[len(ids), col] = int(cell)
            else:
                raise IngestionError(
                    f"{path}: invalid call {cell!r} at (id {individual_id!r}, "
                    f"column {panel.rsids[col]!r})"
                )
        ids.append(individual_id)
    return GenotypeDatabase(panel, ids, rows)


def save_genotype_db(db: GenotypeDatabase, path) -> None:
    """Write the canonical serialization (LF endings, ``NA`` for missing)."""
    lines = ["id," + ",".join(db.panel.rsids)]
    for i, individual_id in enumerate(db.ids):
        cells = [
            NA_TOKEN if c == MISSING else str(int(c)) for c in db.calls[i]
        ]
        lines.append(",".join([individual_id] + cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_phenotype_db(path, traits: Iterable[TraitDef]) -> PhenotypeDatabase:
    """Parse a phenotype file; returns a salted database when the salt header is present."""
    traits = tuple(traits)
    lines = _read_lines(path)
    fingerprint = None
    if lines[0].startswith("#"):
        if not lines[0].startswith(SALT_HEADER_PREFIX):
            raise IngestionError(f"{path}: unrecognized comment line {lines[0]!r}")
        fingerprint = lines[0][len(SALT_HEADER_PREFIX):]
        lines = lines[1:]
        if not lines:
            raise IngestionError(f"{path}: salted file has no header row")
    _check_header(path, lines[0], tuple(t.name for t in traits))
    ids: list[str] = []
    seen: set[str] = set()
    values = np.empty((len(lines) - 1, len(traits)), dtype=np.int8)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 1 + len(traits):
            raise IngestionError(
                f"{path}: row {lineno} has {len(parts)} fields, expected {1 + len(traits)}"
            )
        individual_id = parts[0]
        if not individual_id:
            raise IngestionError(f"{path}: row {lineno} has an empty id")
        if individual_id in seen:
            raise IngestionError(f"{path}: duplicate id {individual_id!r} at row {lineno}")
        seen.add(individual_id)
        for col, cell in enumerate(parts[1:]):
            trait = traits[col]
            if cell == NA_TOKEN:
                values[len(ids), col] = MISSING
            elif cell in trait.domain:
                values[len(ids), col] = trait.value_index(cell)
            else:
                raise IngestionError(
                    f"{path}: invalid value {cell!r} at (id {individual_id!r}, "
                    f"trait {trait.name!r})"
                )
        ids.append(individual_id)
    if fingerprint is not None:
        try:
            return SaltedPhenotypeDatabase(traits, ids, values, fingerprint)
        except DomainError as exc:
            raise IngestionError(f"{path}: {exc}") from exc
    return PhenotypeDatabase(traits, ids, values)


def save_phenotype_db(db: PhenotypeDatabase, path) -> None:
    """Write the canonical serialization; salted databases keep their header."""
    lines = []
    if isinstance(db, SaltedPhenotypeDatabase):
        lines.append(SALT_HEADER_PREFIX + db.key_fingerprint)
    lines.append("id," + ",".join(t.name for t in db.traits))
    for i, individual_id in enumerate(db.ids):
        cells = [
            NA_TOKEN if v == MISSING else t.domain[v]
            for t, v in zip(db.traits, db.values[i])
        ]
        lines.append(",".join([individual_id] + cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def drop_snp(db: GenotypeDatabase, rsid: str) -> GenotypeDatabase:
    """New database with the ``rsid`` column removed from panel and calls."""
    col = db.panel.index_of(rsid)
    return GenotypeDatabase(
        db.panel.without(rsid), db.ids, np.delete(db.calls, col, axis=1)
    )


# ---------------------------------------------------------------------------
# auxiliary config files used by the CLI


def load_panel_file(path) -> SnpPanel:
    """Parse a panel file: header ``rsid,maf`` then one marker per line."""
    lines = _read_lines(path)
    if lines[0] != "rsid,maf":
        raise IngestionError(f"{path}: header must be 'rsid,maf', got {lines[0]!r}")
    snps = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise IngestionError(f"{path}: row {lineno} must have 2 fields")
        try:
            maf = float(parts[1])
        except ValueError:
            raise IngestionError(
                f"{path}: row {lineno}: maf {parts[1]!r} is not a number"
            ) from None
        try:
            snps.append(SnpDef(parts[0], maf))
        except DomainError as exc:
            raise IngestionError(f"{path}: row {lineno}: {exc}") from exc
    try:
        return SnpPanel(tuple(snps))
    except DomainError as exc:
        raise IngestionError(f"{path}: {exc}") from exc


def save_panel_file(panel: SnpPanel, path) -> None:
    lines = ["rsid,maf"] + [
        f"{s.rsid},{s.minor_allele_frequency!r}" for s in panel.snps
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_traits_file(path) -> tuple[tuple[TraitDef, ...], tuple[tuple[str, str], ...]]:
    """Parse a traits file: JSON list of ``{trait, domain, rsids?}`` entries.

    Returns the trait definitions plus the (trait, rsid) association pairs
    declared by the optional ``rsids`` lists.
    """
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, list) or not obj:
        raise IngestionError(f"{path}: traits file must be a non-empty JSON list")
    traits: list[TraitDef] = []
    pairs: list[tuple[str, str]] = []
    for entry in obj:
        if not isinstance(entry, dict) or not {"trait", "domain"} <= set(entry):
            raise IngestionError(f"{path}: each entry needs 'trait' and 'domain' keys")
        extra = set(entry) - {"trait", "domain", "rsids"}
        if extra:
            raise IngestionError(f"{path}: unknown keys {sorted(extra)} in traits entry")
        try:
            trait = TraitDef(entry["trait"], tuple(entry["domain"]))
        except DomainError as exc:
            raise IngestionError(f"{path}: {exc}") from exc
        traits.append(trait)
        for rsid in entry.get("rsids", ()):
            pairs.append((trait.name, rsid))
    return tuple(traits), tuple(pairs)


def save_traits_file(
    traits: Iterable[TraitDef], pairs: Iterable[tuple[str, str]], path
) -> None:
    pairs = tuple(pairs)
    payload = [
        {
            "trait": t.name,
            "domain": list(t.domain),
            "rsids": [rsid for name, rsid in pairs if name == t.name],
        }
        for t in traits
    ]
    Path(path).write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8", newline="\n"
    )
