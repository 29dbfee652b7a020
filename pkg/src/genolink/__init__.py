"""genolink: genotype-phenotype linkage attacks and countermeasures.

A simulation toolkit for studying how well observable traits re-identify
nominally anonymous genotype records, and how much protection trait salting,
genotype noise and data-quality degradation buy back. Everything runs on
synthetic, seeded populations and reproduces bit-for-bit.
"""

from .attacks import (
    Assignment,
    LikelihoodMatrix,
    RankedCandidates,
    brute_force_matching,
    build_likelihood_matrix,
    identification_attack,
    matching_attack,
)
from .defenses import (
    SaltKey,
    add_genotype_noise,
    apply_salt,
    key_fingerprint,
    remove_salt,
    salt_permutation,
)
from .errors import (
    DomainError,
    ExperimentError,
    GenolinkError,
    IngestionError,
    InputFormatError,
    KeyMismatchError,
    ModelFormatError,
    SaltStateError,
)
from .evaluate import (
    AttackKind,
    DefenseConfig,
    ExperimentConfig,
    MetricsRow,
    identification_accuracy,
    identification_topk_accuracy,
    load_experiment_config,
    matching_accuracy,
    run_experiment,
    write_reports,
)
from .genome import (
    MISSING,
    Genotype,
    GenotypeDatabase,
    PhenotypeDatabase,
    PhenotypeProfile,
    SaltedPhenotypeDatabase,
    SnpDef,
    SnpPanel,
    TraitDef,
    drop_snp,
    load_genotype_db,
    load_panel_file,
    load_phenotype_db,
    load_traits_file,
    save_genotype_db,
    save_phenotype_db,
)
from .population import (
    PopulationConfig,
    generate_population,
    inject_phenotype_errors,
    inject_sequencing_errors,
)
from .sequences import diff_positions, str_repeat_count, validate_dna
from .traits import (
    Association,
    Cpt,
    Provenance,
    TraitModel,
    load_curated_model,
    log_likelihood,
    perturb_model,
    save_model,
    train_supervised,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Association",
    "AttackKind",
    "Cpt",
    "DefenseConfig",
    "DomainError",
    "ExperimentConfig",
    "ExperimentError",
    "GenolinkError",
    "Genotype",
    "GenotypeDatabase",
    "IngestionError",
    "InputFormatError",
    "KeyMismatchError",
    "LikelihoodMatrix",
    "MISSING",
    "MetricsRow",
    "ModelFormatError",
    "PhenotypeDatabase",
    "PhenotypeProfile",
    "PopulationConfig",
    "Provenance",
    "RankedCandidates",
    "SaltKey",
    "SaltStateError",
    "SaltedPhenotypeDatabase",
    "SnpDef",
    "SnpPanel",
    "TraitDef",
    "TraitModel",
    "add_genotype_noise",
    "apply_salt",
    "brute_force_matching",
    "build_likelihood_matrix",
    "diff_positions",
    "drop_snp",
    "generate_population",
    "identification_accuracy",
    "identification_attack",
    "identification_topk_accuracy",
    "inject_phenotype_errors",
    "inject_sequencing_errors",
    "key_fingerprint",
    "load_curated_model",
    "load_experiment_config",
    "load_genotype_db",
    "load_panel_file",
    "load_phenotype_db",
    "load_traits_file",
    "log_likelihood",
    "matching_accuracy",
    "matching_attack",
    "perturb_model",
    "remove_salt",
    "run_experiment",
    "salt_permutation",
    "save_genotype_db",
    "save_model",
    "save_phenotype_db",
    "str_repeat_count",
    "train_supervised",
    "validate_dna",
    "write_reports",
]
