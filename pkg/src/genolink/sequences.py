"""Small DNA-string helpers used by ingestion sanity checks and the docs."""

from __future__ import annotations

from .errors import DomainError, InputFormatError

DNA_ALPHABET = frozenset("ATCG")

# Tandem-repeat motifs are conventionally 2..13 bases long.
MIN_MOTIF_LENGTH = 2
MAX_MOTIF_LENGTH = 13

# A DNA sequence is a plain ``str`` over {A,T,C,G}; run it through
# ``validate_dna`` before trusting it.
DnaSequence = str


def validate_dna(seq: str) -> str:
    """Return ``seq`` unchanged if it is a non-empty A/T/C/G string."""
    if not isinstance(seq, str) or not seq:
        raise InputFormatError("DNA sequence must be a non-empty string")
    for pos, char in enumerate(seq):
        if char not in DNA_ALPHABET:
            raise InputFormatError(
                f"invalid base {char!r} at position {pos}; expected one of A/T/C/G"
            )
    return seq


def str_repeat_count(seq: DnaSequence, motif: DnaSequence) -> int:
    """Largest k such that ``motif`` repeated k times appears somewhere in ``seq``.

    Returns 0 when the motif does not occur at all. The scan considers every
    start offset, so repeats embedded in flanking sequence are found.
    """
    validate_dna(seq)
    validate_dna(motif)
    if not MIN_MOTIF_LENGTH <= len(motif) <= MAX_MOTIF_LENGTH:
        raise DomainError(
            f"motif length must be in [{MIN_MOTIF_LENGTH}, {MAX_MOTIF_LENGTH}], "
            f"got {len(motif)}"
        )
    count = 0
    while motif * (count + 1) in seq:
        count += 1
    return count


def diff_positions(a: DnaSequence, b: DnaSequence) -> list[int]:
    """Sorted 0-based positions where two equal-length sequences differ."""
    validate_dna(a)
    validate_dna(b)
    if len(a) != len(b):
        raise DomainError(f"sequences differ in length: {len(a)} vs {len(b)}")
    return [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
