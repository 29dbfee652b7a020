"""Seeded replication harness producing grid-shaped accuracy reports.

One experiment sweeps database size x model source x attack under a fixed
defense configuration. Each replication draws a fresh population from a
sub-seed of the master seed, subsamples nested cohorts (the size-10 cohort is
contained in the size-80 cohort), applies data-quality errors and defenses,
builds or trains the attack model, runs the attacks, and scores top-1
accuracy. Results aggregate to mean/std per grid cell, deterministically in
the master seed and independently of the worker count.

Supervised models train on the same (already degraded) cohort they attack,
reproducing the shared train/test protocol; ``clean_split`` instead trains on
one half of the cohort and attacks the other.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .attacks import LikelihoodMatrix, build_likelihood_matrix, matching_attack
from .defenses import add_genotype_noise, apply_salt
from .errors import DomainError, ExperimentError, GenolinkError
from .genome import GenotypeDatabase, PhenotypeDatabase, SnpDef, SnpPanel, drop_snp
from .population import PopulationConfig, generate_population, inject_phenotype_errors
from .rng import MASK64, derive_seed
from .traits import Provenance, TraitModel, parse_model_entries, train_supervised
from .traits import model_payload as _model_payload


class AttackKind(enum.Enum):
    IDENTIFICATION = "identification"
    MATCHING = "matching"


@dataclass(frozen=True)
class DefenseConfig:
    """Defenses and data-quality degradations applied to each cohort."""

    noise_rate: float = 0.0
    phenotype_error_rate: float = 0.0
    salt: bool = False
    salt_key: int | None = None
    drop_rsids: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.noise_rate <= 1.0:
            raise DomainError(f"noise rate must be in [0, 1], got {self.noise_rate!r}")
        if not 0.0 <= self.phenotype_error_rate <= 1.0:
            raise DomainError(
                f"phenotype error rate must be in [0, 1], got {self.phenotype_error_rate!r}"
            )
        if self.salt_key is not None:
            if not self.salt:
                raise DomainError("salt_key given but salt is disabled")
            if not isinstance(self.salt_key, int) or not 0 <= self.salt_key <= MASK64:
                raise DomainError("salt_key must be an unsigned 64-bit integer")
        object.__setattr__(self, "drop_rsids", tuple(self.drop_rsids))

    def label(self) -> str:
        parts = []
        if self.noise_rate:
            parts.append(f"noise={self.noise_rate:g}")
        if self.phenotype_error_rate:
            parts.append(f"phenotype_errors={self.phenotype_error_rate:g}")
        if self.salt:
            parts.append("salt")
        if self.drop_rsids:
            parts.append("drop=" + "+".join(self.drop_rsids))
        return ",".join(parts) if parts else "none"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment grid."""

    population: PopulationConfig
    db_sizes: tuple[int, ...]
    model_sources: tuple[Provenance, ...]
    attacks: tuple[AttackKind, ...]
    replications: int
    master_seed: int
    defenses: DefenseConfig = field(default_factory=DefenseConfig)
    curated_model: TraitModel | None = None
    clean_split: bool = False

    def __post_init__(self):
        object.__setattr__(self, "db_sizes", tuple(self.db_sizes))
        object.__setattr__(self, "model_sources", tuple(self.model_sources))
        object.__setattr__(self, "attacks", tuple(self.attacks))
        if not self.db_sizes:
            raise DomainError("at least one database size is required")
        if len(set(self.db_sizes)) != len(self.db_sizes):
            raise DomainError("database sizes must be unique")
        for size in self.db_sizes:
            if not isinstance(size, int) or size < 1:
                raise DomainError(f"database size must be a positive integer, got {size!r}")
            if size > self.population.size:
                raise DomainError(
                    f"database size {size} exceeds population size {self.population.size}"
                )
            if self.clean_split and size < 2:
                raise DomainError("clean_split needs database sizes of at least 2")
        if not self.model_sources or len(set(self.model_sources)) != len(self.model_sources):
            raise DomainError("model sources must be non-empty and unique")
        for source in self.model_sources:
            if not isinstance(source, Provenance):
                raise DomainError(f"model source must be a Provenance, got {source!r}")
        if not self.attacks or len(set(self.attacks)) != len(self.attacks):
            raise DomainError("attacks must be non-empty and unique")
        for attack in self.attacks:
            if not isinstance(attack, AttackKind):
                raise DomainError(f"attack must be an AttackKind, got {attack!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise DomainError(
                f"replications must be a positive integer, got {self.replications!r}"
            )
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise DomainError(f"master seed must be nonnegative, got {self.master_seed!r}")
        if self.curated_model is not None:
            if self.curated_model.panel.rsids != self.population.panel.rsids:
                raise DomainError("curated model panel does not match the population panel")
        for rsid in self.defenses.drop_rsids:
            if rsid not in self.population.panel:
                raise DomainError(f"drop_rsids names unknown rsid {rsid!r}")


@dataclass(frozen=True)
class MetricsRow:
    """One aggregated grid cell."""

    size: int
    source: str
    attack: str
    defense: str
    mean: float
    std: float
    replications: int

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise DomainError(f"mean accuracy must be in [0, 1], got {self.mean!r}")
        if self.std < 0.0:
            raise DomainError(f"std must be nonnegative, got {self.std!r}")


# ---------------------------------------------------------------------------
# accuracy metrics


def _check_linked(pdb: PhenotypeDatabase, gdb: GenotypeDatabase) -> None:
    if set(pdb.ids) != set(gdb.ids):
        raise DomainError("databases are not linked: id sets differ")


def _best_column(scores_row: np.ndarray, col_ids: tuple[str, ...]) -> int:
    best = scores_row.max()
    ties = np.flatnonzero(scores_row == best)
    if len(ties) == 1:
        return int(ties[0])
    return min((int(j) for j in ties), key=lambda j: col_ids[j])


def _rank1_accuracy(matrix: LikelihoodMatrix) -> float:
    hits = 0
    for x, row_id in enumerate(matrix.row_ids):
        j = _best_column(matrix.scores[x], matrix.col_ids)
        hits += matrix.col_ids[j] == row_id
    return hits / len(matrix.row_ids)


def _topk_accuracy(matrix: LikelihoodMatrix, k: int) -> float:
    hits = 0
    for x, row_id in enumerate(matrix.row_ids):
        row = matrix.scores[x]
        order = sorted(range(len(row)), key=lambda j: (-row[j], matrix.col_ids[j]))
        hits += row_id in {matrix.col_ids[j] for j in order[:k]}
    return hits / len(matrix.row_ids)


def _matching_accuracy(matrix: LikelihoodMatrix) -> float:
    assignment = matching_attack(matrix)
    hits = sum(
        matrix.col_ids[col] == matrix.row_ids[row]
        for row, col in assignment.pairs()
    )
    return hits / len(matrix.row_ids)


def identification_accuracy(
    model: TraitModel, pdb: PhenotypeDatabase, gdb: GenotypeDatabase
) -> float:
    """Fraction of profiles whose top-ranked genotype carries their own id."""
    _check_linked(pdb, gdb)
    return _rank1_accuracy(build_likelihood_matrix(model, pdb, gdb))


def identification_topk_accuracy(
    model: TraitModel, pdb: PhenotypeDatabase, gdb: GenotypeDatabase, k: int
) -> float:
    """Diagnostic variant: hit when the true genotype ranks within the top k."""
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    _check_linked(pdb, gdb)
    return _topk_accuracy(build_likelihood_matrix(model, pdb, gdb), k)


def matching_accuracy(
    model: TraitModel, pdb: PhenotypeDatabase, gdb: GenotypeDatabase
) -> float:
    """Fraction of individuals the optimal assignment pairs with themselves."""
    if len(pdb) != len(gdb):
        raise DomainError(f"databases differ in size: {len(pdb)} vs {len(gdb)}")
    _check_linked(pdb, gdb)
    return _matching_accuracy(build_likelihood_matrix(model, pdb, gdb))


# ---------------------------------------------------------------------------
# experiment driver


def _replicate(cfg: ExperimentConfig, r: int) -> dict[tuple[int, str, str], float]:
    rep_seed = derive_seed(cfg.master_seed, f"replication/{r}")
    pop_cfg = replace(cfg.population, seed=derive_seed(rep_seed, "population"))
    gdb_full, pdb_full = generate_population(pop_cfg)
    order = np.random.default_rng(derive_seed(rep_seed, "subsample")).permutation(
        len(gdb_full)
    )
    base_curated = cfg.curated_model if cfg.curated_model is not None else cfg.population.model
    assoc_pairs = tuple((a.trait, a.rsid) for a in cfg.population.model.associations)
    defense = cfg.defenses
    out: dict[tuple[int, str, str], float] = {}
    for size in cfg.db_sizes:
        try:
            cohort = order[:size]
            gdb = gdb_full.subset(cohort)
            pdb = pdb_full.subset(cohort)
            if defense.phenotype_error_rate > 0.0:
                pdb = inject_phenotype_errors(
                    pdb,
                    defense.phenotype_error_rate,
                    derive_seed(rep_seed, f"phenotype-errors/{size}"),
                )
            if defense.noise_rate > 0.0:
                gdb = add_genotype_noise(
                    gdb, defense.noise_rate, derive_seed(rep_seed, f"noise/{size}")
                )
            for rsid in defense.drop_rsids:
                gdb = drop_snp(gdb, rsid)
            if defense.salt:
                key = (
                    defense.salt_key
                    if defense.salt_key is not None
                    else derive_seed(rep_seed, f"salt-key/{size}")
                )
                pdb = apply_salt(pdb, key)
            if cfg.clean_split:
                half = size // 2
                train_g, test_g = gdb.subset(range(half)), gdb.subset(range(half, size))
                train_p, test_p = pdb.subset(range(half)), pdb.subset(range(half, size))
            else:
                train_g = test_g = gdb
                train_p = test_p = pdb
        except GenolinkError as exc:
            raise ExperimentError(
                f"replication {r}, size {size}: {exc}"
            ) from exc
        for source in cfg.model_sources:
            try:
                if source is Provenance.CURATED:
                    model = base_curated.restricted_to(test_g.panel)
                else:
                    pairs = tuple(
                        (trait, rsid)
                        for trait, rsid in assoc_pairs
                        if rsid in test_g.panel
                    )
                    model = train_supervised(train_g, train_p, pairs)
                matrix = build_likelihood_matrix(model, test_p, test_g)
                if AttackKind.IDENTIFICATION in cfg.attacks:
                    out[(size, source.value, AttackKind.IDENTIFICATION.value)] = (
                        _rank1_accuracy(matrix)
                    )
                if AttackKind.MATCHING in cfg.attacks:
                    out[(size, source.value, AttackKind.MATCHING.value)] = (
                        _matching_accuracy(matrix)
                    )
            except GenolinkError as exc:
                raise ExperimentError(
                    f"replication {r}, size {size}, source {source.value}: {exc}"
                ) from exc
    return out


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[MetricsRow]:
    """Run every replication and aggregate each grid cell to mean/std.

    ``workers`` only controls parallelism; per-replication sub-seeds make the
    output byte-identical for any worker count.
    """
    if not isinstance(workers, int) or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers!r}")
    reps = range(cfg.replications)
    if workers == 1:
        per_rep = [_replicate(cfg, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(lambda r: _replicate(cfg, r), reps))
    label = cfg.defenses.label()
    if cfg.clean_split:
        label = label + ",clean_split" if label != "none" else "clean_split"
    rows = []
    for size in cfg.db_sizes:
        for source in cfg.model_sources:
            for attack in cfg.attacks:
                vals = np.array(
                    [per_rep[r][(size, source.value, attack.value)] for r in reps]
                )
                rows.append(
                    MetricsRow(
                        size=size,
                        source=source.value,
                        attack=attack.value,
                        defense=label,
                        mean=float(vals.mean()),
                        std=float(vals.std()),
                        replications=cfg.replications,
                    )
                )
    return rows


# ---------------------------------------------------------------------------
# config file parsing and report writing


_TOP_KEYS = {
    "population",
    "panel",
    "model",
    "model_file",
    "curated_model",
    "curated_model_file",
    "db_sizes",
    "model_sources",
    "attacks",
    "defenses",
    "clean_split",
    "replications",
    "master_seed",
}


def _parse_panel(entries) -> SnpPanel:
    if not isinstance(entries, list) or not entries:
        raise DomainError("config 'panel' must be a non-empty list")
    snps = []
    for entry in entries:
        if not isinstance(entry, dict) or set(entry) != {"rsid", "maf"}:
            raise DomainError("each panel entry needs exactly 'rsid' and 'maf'")
        snps.append(SnpDef(entry["rsid"], entry["maf"]))
    return SnpPanel(tuple(snps))


def _traits_from_entries(entries) -> list:
    from .genome import TraitDef

    out = []
    for entry in entries:
        if not isinstance(entry, dict) or "trait" not in entry or "domain" not in entry:
            raise DomainError("each model entry needs 'trait' and 'domain'")
        out.append(TraitDef(entry["trait"], tuple(entry["domain"])))
    return out


def _load_model_entries(obj: dict, key: str, base_dir: Path):
    inline = obj.get(key)
    file_ref = obj.get(key + "_file")
    if inline is not None and file_ref is not None:
        raise DomainError(f"config gives both '{key}' and '{key}_file'")
    if inline is not None:
        return inline
    if file_ref is not None:
        return json.loads((base_dir / file_ref).read_text(encoding="utf-8"))
    return None


def load_experiment_config(path) -> ExperimentConfig:
    """Parse the JSON experiment config documented in the README."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise DomainError(f"{path}: config must be a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise DomainError(f"{path}: unknown config keys {sorted(unknown)}")
    for key in ("population", "panel", "db_sizes", "replications", "master_seed"):
        if key not in obj:
            raise DomainError(f"{path}: config is missing {key!r}")
    panel = _parse_panel(obj["panel"])
    model_entries = _load_model_entries(obj, "model", path.parent)
    if model_entries is None:
        raise DomainError(f"{path}: config needs 'model' or 'model_file'")
    traits = _traits_from_entries(model_entries)
    model = parse_model_entries(model_entries, panel, traits)
    pop = obj["population"]
    if not isinstance(pop, dict) or "size" not in pop or set(pop) - {"size", "seed"}:
        raise DomainError(f"{path}: 'population' needs 'size' and optional 'seed'")
    population = PopulationConfig(panel, model, pop["size"], pop.get("seed", 0))
    curated_entries = _load_model_entries(obj, "curated_model", path.parent)
    curated = None
    if curated_entries is not None:
        curated = parse_model_entries(
            curated_entries, panel, _traits_from_entries(curated_entries)
        )
    try:
        sources = tuple(
            Provenance(s) for s in obj.get("model_sources", ["curated", "supervised"])
        )
        attacks = tuple(
            AttackKind(a) for a in obj.get("attacks", ["identification", "matching"])
        )
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from exc
    defenses_obj = obj.get("defenses", {})
    if not isinstance(defenses_obj, dict):
        raise DomainError(f"{path}: 'defenses' must be an object")
    allowed = {"noise_rate", "phenotype_error_rate", "salt", "salt_key", "drop_rsids"}
    if set(defenses_obj) - allowed:
        raise DomainError(
            f"{path}: unknown defense keys {sorted(set(defenses_obj) - allowed)}"
        )
    defenses = DefenseConfig(
        noise_rate=defenses_obj.get("noise_rate", 0.0),
        phenotype_error_rate=defenses_obj.get("phenotype_error_rate", 0.0),
        salt=defenses_obj.get("salt", False),
        salt_key=defenses_obj.get("salt_key"),
        drop_rsids=tuple(defenses_obj.get("drop_rsids", ())),
    )
    return ExperimentConfig(
        population=population,
        db_sizes=tuple(obj["db_sizes"]),
        model_sources=sources,
        attacks=attacks,
        replications=obj["replications"],
        master_seed=obj["master_seed"],
        defenses=defenses,
        curated_model=curated,
        clean_split=obj.get("clean_split", False),
    )


def experiment_config_to_jsonable(cfg: ExperimentConfig) -> dict:
    """Fully resolved config (inline model, explicit seeds) for provenance."""
    return {
        "population": {"size": cfg.population.size, "seed": cfg.population.seed},
        "panel": [
            {"rsid": s.rsid, "maf": s.minor_allele_frequency}
            for s in cfg.population.panel.snps
        ],
        "model": _model_payload(cfg.population.model),
        "curated_model": (
            None if cfg.curated_model is None else _model_payload(cfg.curated_model)
        ),
        "db_sizes": list(cfg.db_sizes),
        "model_sources": [s.value for s in cfg.model_sources],
        "attacks": [a.value for a in cfg.attacks],
        "defenses": {
            "noise_rate": cfg.defenses.noise_rate,
            "phenotype_error_rate": cfg.defenses.phenotype_error_rate,
            "salt": cfg.defenses.salt,
            "salt_key": cfg.defenses.salt_key,
            "drop_rsids": list(cfg.defenses.drop_rsids),
        },
        "clean_split": cfg.clean_split,
        "replications": cfg.replications,
        "master_seed": cfg.master_seed,
    }


def render_metrics_csv(rows: list[MetricsRow]) -> str:
    lines = ["size,source,attack,defense,mean,std,replications"]
    for row in rows:
        lines.append(
            f"{row.size},{row.source},{row.attack},{row.defense},"
            f"{row.mean!r},{row.std!r},{row.replications}"
        )
    return "\n".join(lines) + "\n"


def render_report(rows: list[MetricsRow], cfg: ExperimentConfig) -> str:
    """Human-readable grid: attacks as rows, (size, source) cells as columns."""
    sizes = list(cfg.db_sizes)
    sources = [s.value for s in cfg.model_sources]
    attacks = [a.value for a in cfg.attacks]
    cell = {(r.size, r.source, r.attack): r for r in rows}
    label = rows[0].defense if rows else "none"
    header = (
        f"Attack accuracy (mean % +- std % over {cfg.replications} replications; "
        f"defense: {label}; master seed {cfg.master_seed})"
    )
    col_heads = [f"n={size} {source}" for size in sizes for source in sources]
    width = max(18, max((len(h) for h in col_heads), default=18) + 2)
    name_width = max(len(a) for a in attacks) + 2
    lines = [header, ""]
    lines.append(" " * name_width + "".join(h.rjust(width) for h in col_heads))
    for attack in attacks:
        cells = []
        for size in sizes:
            for source in sources:
                row = cell[(size, source, attack)]
                cells.append(f"{100 * row.mean:.1f}% +- {100 * row.std:.1f}%")
        lines.append(attack.ljust(name_width) + "".join(c.rjust(width) for c in cells))
    return "\n".join(lines) + "\n"


def write_reports(rows: list[MetricsRow], cfg: ExperimentConfig, out_dir) -> None:
    """Write metrics.csv, report.txt and the resolved config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(
        render_metrics_csv(rows), encoding="utf-8", newline="\n"
    )
    (out / "report.txt").write_text(
        render_report(rows, cfg), encoding="utf-8", newline="\n"
    )
    (out / "config.json").write_text(
        json.dumps(experiment_config_to_jsonable(cfg), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )
