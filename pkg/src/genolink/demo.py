"""A built-in eight-trait world used by the docs, the demo configs and tests.

Only the eye-colour table is anchored to published predictive accuracy
(brown given two minor alleles at rs12913832: 0.88); the other traits are
synthetic stand-ins with plausible names. Domains all have three or more
values so that a keyed permutation rarely fixes a value in place.
"""

from __future__ import annotations

import json
from pathlib import Path

from .evaluate import AttackKind, DefenseConfig, ExperimentConfig, experiment_config_to_jsonable
from .genome import SnpDef, SnpPanel, TraitDef, save_panel_file, save_traits_file
from .population import PopulationConfig
from .traits import Association, Cpt, Provenance, TraitModel, model_payload

# (trait name, domain, rsid, maf, cpt rows for calls 0/1/2)
_WORLD = [
    (
        "eye_colour",
        ("blue", "brown", "green"),
        "rs12913832",
        0.30,
        [[0.72, 0.08, 0.20], [0.30, 0.50, 0.20], [0.06, 0.88, 0.06]],
    ),
    (
        "hair_colour",
        ("brown", "black", "blonde"),
        "rs1042602",
        0.35,
        [[0.70, 0.20, 0.10], [0.25, 0.60, 0.15], [0.10, 0.15, 0.75]],
    ),
    (
        "skin_tone",
        ("light", "medium", "dark"),
        "rs1426654",
        0.45,
        [[0.78, 0.16, 0.06], [0.18, 0.64, 0.18], [0.06, 0.16, 0.78]],
    ),
    (
        "freckles",
        ("none", "light", "heavy"),
        "rs4778138",
        0.30,
        [[0.75, 0.18, 0.07], [0.22, 0.58, 0.20], [0.08, 0.22, 0.70]],
    ),
    (
        "height_band",
        ("short", "average", "tall"),
        "rs143384",
        0.40,
        [[0.62, 0.28, 0.10], [0.20, 0.56, 0.24], [0.08, 0.28, 0.64]],
    ),
    (
        "blood_type",
        ("o", "a", "b", "ab"),
        "rs8176719",
        0.32,
        [[0.70, 0.16, 0.10, 0.04], [0.16, 0.56, 0.18, 0.10], [0.06, 0.16, 0.56, 0.22]],
    ),
    (
        "hair_texture",
        ("straight", "wavy", "curly"),
        "rs11803731",
        0.35,
        [[0.74, 0.18, 0.08], [0.20, 0.60, 0.20], [0.08, 0.18, 0.74]],
    ),
    (
        "earlobe",
        ("attached", "detached", "partial"),
        "rs17023457",
        0.30,
        [[0.68, 0.22, 0.10], [0.22, 0.58, 0.20], [0.10, 0.22, 0.68]],
    ),
]


def demo_panel() -> SnpPanel:
    return SnpPanel(tuple(SnpDef(rsid, maf) for _, _, rsid, maf, _ in _WORLD))


def demo_traits() -> tuple[TraitDef, ...]:
    return tuple(TraitDef(name, domain) for name, domain, _, _, _ in _WORLD)


def demo_model() -> TraitModel:
    associations = tuple(
        Association(name, rsid, Cpt(rows)) for name, _, rsid, _, rows in _WORLD
    )
    return TraitModel(demo_panel(), demo_traits(), associations, Provenance.CURATED)


def demo_association_pairs() -> tuple[tuple[str, str], ...]:
    return tuple((name, rsid) for name, _, rsid, _, _ in _WORLD)


def demo_population_config(size: int = 100, seed: int = 7) -> PopulationConfig:
    return PopulationConfig(demo_panel(), demo_model(), size, seed)


def demo_experiment_config(
    size: int = 100,
    db_sizes: tuple[int, ...] = (10, 80),
    replications: int = 50,
    master_seed: int = 20260810,
    defenses: DefenseConfig | None = None,
) -> ExperimentConfig:
    return ExperimentConfig(
        population=demo_population_config(size=size),
        db_sizes=db_sizes,
        model_sources=(Provenance.CURATED, Provenance.SUPERVISED),
        attacks=(AttackKind.IDENTIFICATION, AttackKind.MATCHING),
        replications=replications,
        master_seed=master_seed,
        defenses=defenses if defenses is not None else DefenseConfig(),
    )


def write_demo_files(out_dir) -> None:
    """Write the demo panel/traits/model/experiment files used by the CLI."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_panel_file(demo_panel(), out / "demo_panel.csv")
    save_traits_file(demo_traits(), demo_association_pairs(), out / "demo_traits.json")
    model = demo_model()
    (out / "demo_model.json").write_text(
        json.dumps(model_payload(model), indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    (out / "demo_experiment.json").write_text(
        json.dumps(experiment_config_to_jsonable(demo_experiment_config()), indent=2)
        + "\n",
        encoding="utf-8",
        newline="\n",
    )
