"""Presence-matrix domain types."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union


class SampleClass(str, Enum):
    METEORITE = "Meteorite"
    SOIL = "Soil"

    @classmethod
    def parse(cls, value: str) -> "SampleClass":
        normalized = value.strip().lower()
        for member in cls:
            if member.value.lower() == normalized:
                return member
        raise ValueError(f"unknown sample class '{value}'")


class Polarity(str, Enum):
    PRESENT = "Present"
    ABSENT = "Absent"


@dataclass(frozen=True)
class Compound:
    id: int
    name: str
    alt_names: Tuple[str, ...] = ()
    molecular_weight: Optional[float] = None
    rt1: Optional[float] = None
    rt2: Optional[float] = None
    mz: Optional[float] = None

    def __post_init__(self) -> None:
        if self.id <= 0:
            raise ValueError(f"compound id must be positive, got {self.id}")
        if not self.name.strip():
            raise ValueError(f"compound {self.id} has an empty name")
        for label, value in (("molecular_weight", self.molecular_weight), ("rt1", self.rt1),
                             ("rt2", self.rt2), ("mz", self.mz)):
            if value is not None and value <= 0:
                raise ValueError(f"compound {self.id}: {label} must be positive, got {value}")

    @property
    def all_names(self) -> Tuple[str, ...]:
        return (self.name, *self.alt_names)


@dataclass(frozen=True)
class Sample:
    name: str
    sample_class: SampleClass
    subtype: Optional[str] = None


@dataclass(frozen=True)
class PresenceMatrix:
    """Immutable compound x sample occurrence table."""

    compounds: Tuple[Compound, ...]
    samples: Tuple[Sample, ...]
    presence: FrozenSet[Tuple[int, str]]
    _by_id: Mapping[int, Compound] = field(init=False, repr=False, compare=False)
    _by_sample: Mapping[str, Sample] = field(init=False, repr=False, compare=False)
    _samples_of: Mapping[int, FrozenSet[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: Dict[int, Compound] = {}
        for compound in self.compounds:
            if compound.id in by_id:
                raise ValueError(f"duplicate compound id {compound.id}")
            by_id[compound.id] = compound
        by_sample: Dict[str, Sample] = {}
        for sample in self.samples:
            if sample.name in by_sample:
                raise ValueError(f"duplicate sample name '{sample.name}'")
            by_sample[sample.name] = sample

        grouped: Dict[int, set] = {cid: set() for cid in by_id}
        for compound_id, sample_name in self.presence:
            if compound_id not in by_id:
                raise ValueError(f"presence pair references unknown compound {compound_id}")
            if sample_name not in by_sample:
                raise ValueError(f"presence pair references unknown sample '{sample_name}'")
            grouped[compound_id].add(sample_name)

        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_sample", by_sample)
        object.__setattr__(self, "_samples_of", {cid: frozenset(names) for cid, names in grouped.items()})

    @classmethod
    def build(
        cls,
        compounds: List[Compound],
        samples: List[Sample],
        presence: "set[Tuple[int, str]] | FrozenSet[Tuple[int, str]]",
    ) -> "PresenceMatrix":
        return cls(tuple(compounds), tuple(samples), frozenset(presence))

    def compound(self, compound_id: int) -> Optional[Compound]:
        return self._by_id.get(compound_id)

    def sample(self, name: str) -> Optional[Sample]:
        return self._by_sample.get(name)

    def has_compound(self, compound_id: int) -> bool:
        return compound_id in self._by_id

    def has_sample(self, name: str) -> bool:
        return name in self._by_sample

    def sample_names(self, sample_class: Optional[SampleClass] = None) -> List[str]:
        return [s.name for s in self.samples if sample_class is None or s.sample_class is sample_class]

    def present_in(self, compound_id: int) -> FrozenSet[str]:
        return self._samples_of.get(compound_id, frozenset())

    def is_present(self, compound_id: int, sample_name: str) -> bool:
        return (compound_id, sample_name) in self.presence

    def __len__(self) -> int:
        return len(self.compounds)


CompoundRef = Union[int, str]


@dataclass(frozen=True)
class Assertion:
    """One claim: compound (id or name) is present in / absent from a sample."""

    compound: CompoundRef
    sample: str
    polarity: Polarity

    def describe(self) -> str:
        label = f"ID {self.compound}" if isinstance(self.compound, int) else self.compound
        return f"{self.polarity.value}({label}, {self.sample})"


@dataclass(frozen=True)
class ClaimRefs:
    compound_ids: FrozenSet[int] = frozenset()
    compound_names: FrozenSet[str] = frozenset()
    sample_names: FrozenSet[str] = frozenset()
    assertions: Tuple[Assertion, ...] = ()

    def __post_init__(self) -> None:
        for assertion in self.assertions:
            if isinstance(assertion.compound, int):
                if assertion.compound not in self.compound_ids:
                    raise ValueError(f"assertion references id {assertion.compound} not in compound_ids")
            elif assertion.compound not in self.compound_names:
                raise ValueError(f"assertion references '{assertion.compound}' not in compound_names")
            if assertion.sample not in self.sample_names:
                raise ValueError(f"assertion references sample '{assertion.sample}' not in sample_names")

    @classmethod
    def from_assertions(cls, assertions: List[Assertion]) -> "ClaimRefs":
        """Build refs whose sets are exactly those the assertions mention."""
        ids = {a.compound for a in assertions if isinstance(a.compound, int)}
        names = {a.compound for a in assertions if isinstance(a.compound, str)}
        return cls(
            compound_ids=frozenset(ids),  # type: ignore[arg-type]
            compound_names=frozenset(names),  # type: ignore[arg-type]
            sample_names=frozenset(a.sample for a in assertions),
            assertions=tuple(assertions),
        )

    def is_empty(self) -> bool:
        return not (self.compound_ids or self.compound_names or self.sample_names or self.assertions)


@dataclass(frozen=True)
class GroundingReport:
    supported: Tuple[Assertion, ...] = ()
    violated: Tuple[Assertion, ...] = ()
    unresolved: Tuple[str, ...] = ()

    @property
    def grounded(self) -> bool:
        return not self.violated

    def summary(self) -> str:
        return f"{len(self.supported)} supported / {len(self.violated)} violated / {len(self.unresolved)} unresolved"
