"""Deterministic pattern queries over a presence matrix."""

from __future__ import annotations

from typing import FrozenSet, Iterable, Set

from ..errors import UnknownReferenceError
from .models import PresenceMatrix, SampleClass


def samples_of(matrix: PresenceMatrix, compound_id: int) -> FrozenSet[str]:
    if not matrix.has_compound(compound_id):
        raise UnknownReferenceError(compound_id)
    return matrix.present_in(compound_id)


def exclusive_compounds(matrix: PresenceMatrix, sample_class: SampleClass) -> Set[int]:
    """Ids found in at least one sample, all of which belong to ``sample_class``."""
    result: Set[int] = set()
    for compound in matrix.compounds:
        found = matrix.present_in(compound.id)
        if found and all(matrix.sample(name).sample_class is sample_class for name in found):  # type: ignore[union-attr]
            result.add(compound.id)
    return result


def co_occurring(matrix: PresenceMatrix, ids: Iterable[int]) -> Set[str]:
    """Samples containing every listed compound. An empty id set yields every sample."""
    result = set(matrix.sample_names())
    for compound_id in ids:
        result &= samples_of(matrix, compound_id)
    return result
