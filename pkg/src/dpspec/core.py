"""Domains, universes, input premetrics, budgets and DP specifications.

A specification is the quintuple (domain, multiverse, input premetric,
output divergence, budget). Domains are finite and enumerated up front so
that "for all pairs of datasets" can be checked by iteration.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from dpspec._schema import validate_document
from dpspec.divergences import OutputDivergence
from dpspec.errors import (
    DomainMismatchError,
    EnumerationTooLargeError,
    ModeMismatchError,
    ParameterError,
    SchemaError,
)
from dpspec.exact import ExactReal, Value, is_inf, to_extreal

__all__ = [
    "BudgetMap",
    "DataUniverse",
    "DatasetDomain",
    "DpSpecification",
    "Flavor",
    "InputPremetric",
    "Mode",
    "Multiverse",
    "PremetricKind",
    "ValidationReport",
    "input_distance",
    "load_spec",
    "make_domain",
    "spec_from_document",
    "spec_to_document",
    "validate_spec",
]

DEFAULT_ENUMERATION_CAP = 10**6


class Mode(str, Enum):
    FIXED_SIZE = "fixed-size"
    UP_TO_SIZE = "up-to-size"


def _domain_size(n_values: int, max_size: int, mode: Mode) -> int:
    if mode is Mode.FIXED_SIZE:
        return n_values**max_size
    return sum(math.comb(n_values + k - 1, k) for k in range(max_size + 1))


@dataclass(frozen=True)
class DatasetDomain:
    """All datasets over ``value_alphabet`` with at most/exactly ``max_size`` records.

    Fixed-size datasets are tuples; up-to-size datasets are multisets, stored
    as tuples sorted by alphabet position. A dataset's id is its index in
    ``datasets``.
    """

    value_alphabet: tuple
    max_size: int
    mode: Mode
    datasets: tuple[tuple, ...] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.datasets)

    @property
    def ids(self) -> range:
        return range(len(self.datasets))

    def __getitem__(self, dataset_id: int) -> tuple:
        return self.datasets[dataset_id]

    def id_of(self, dataset: Sequence) -> int:
        key = tuple(dataset)
        if self.mode is Mode.UP_TO_SIZE:
            order = {v: i for i, v in enumerate(self.value_alphabet)}
            key = tuple(sorted(key, key=order.__getitem__))
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"{dataset!r} is not a dataset of this domain") from None

    @property
    def _index(self) -> dict:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {d: i for i, d in enumerate(self.datasets)}
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def to_document(self) -> dict:
        return {"alphabet": list(self.value_alphabet), "max_size": self.max_size, "mode": self.mode.value}


def make_domain(
    value_alphabet: Sequence,
    max_size: int,
    mode: Mode | str = Mode.FIXED_SIZE,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DatasetDomain:
    """Enumerate a finite dataset domain in lexicographic order.

    Fixed-size domains list ``product(alphabet, repeat=max_size)``; up-to-size
    domains list multisets by size, then lexicographically.

    Raises:
        EnumerationTooLargeError: if the domain would exceed ``cap`` datasets.
    """
    alphabet = tuple(value_alphabet)
    mode = Mode(mode)
    if not alphabet:
        raise ParameterError("value alphabet must be nonempty")
    if len(set(alphabet)) != len(alphabet):
        raise ParameterError("value alphabet has repeated values")
    if max_size < 1:
        raise ParameterError("max_size must be at least 1")
    count = _domain_size(len(alphabet), max_size, mode)
    if count > cap:
        raise EnumerationTooLargeError(count, cap)
    if mode is Mode.FIXED_SIZE:
        datasets = tuple(itertools.product(alphabet, repeat=max_size))
    else:
        datasets = tuple(
            itertools.chain.from_iterable(
                itertools.combinations_with_replacement(alphabet, k) for k in range(max_size + 1)
            )
        )
    return DatasetDomain(alphabet, max_size, mode, datasets)


@dataclass(frozen=True)
class DataUniverse:
    id: str
    member_ids: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(self.member_ids)))
        if not members:
            raise ParameterError(f"universe {self.id!r} is empty")
        object.__setattr__(self, "member_ids", members)

    def __contains__(self, dataset_id: int) -> bool:
        return dataset_id in self.member_ids

    def __len__(self):
        return len(self.member_ids)


@dataclass(frozen=True)
class Multiverse:
    universes: tuple[DataUniverse, ...]

    def __post_init__(self):
        universes = tuple(self.universes)
        if not universes:
            raise ParameterError("a multiverse needs at least one universe")
        ids = [u.id for u in universes]
        if len(set(ids)) != len(ids):
            raise ParameterError(f"duplicate universe ids in {ids}")
        object.__setattr__(self, "universes", universes)

    @classmethod
    def full(cls, domain: DatasetDomain, universe_id: str = "full") -> "Multiverse":
        return cls((DataUniverse(universe_id, tuple(domain.ids)),))

    @classmethod
    def from_mapping(cls, members: Mapping[str, Sequence[int]]) -> "Multiverse":
        return cls(tuple(DataUniverse(k, tuple(v)) for k, v in members.items()))

    def __iter__(self) -> Iterator[DataUniverse]:
        return iter(self.universes)

    def __len__(self):
        return len(self.universes)

    def __getitem__(self, universe_id: str) -> DataUniverse:
        for u in self.universes:
            if u.id == universe_id:
                return u
        raise KeyError(universe_id)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(u.id for u in self.universes)

    def is_partition_of(self, domain: DatasetDomain) -> bool:
        seen: list[int] = [i for u in self.universes for i in u.member_ids]
        return sorted(seen) == list(domain.ids)


class PremetricKind(str, Enum):
    BOUNDED_HAMMING = "bounded-hamming"
    SYMMETRIC_DIFFERENCE = "unbounded-symmetric-difference"
    EXPLICIT_MATRIX = "explicit-matrix"


@dataclass(frozen=True)
class InputPremetric:
    """How far apart two datasets are. Explicit matrices hold rationals or inf."""

    kind: PremetricKind
    matrix: tuple[tuple[Value, ...], ...] | None = None

    def __post_init__(self):
        kind = PremetricKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if (self.matrix is not None) != (kind is PremetricKind.EXPLICIT_MATRIX):
            raise ParameterError("a matrix is required for, and only for, explicit-matrix premetrics")
        if self.matrix is not None:
            rows = tuple(tuple(_distance_entry(v) for v in row) for row in self.matrix)
            object.__setattr__(self, "matrix", rows)

    @classmethod
    def hamming(cls) -> "InputPremetric":
        return cls(PremetricKind.BOUNDED_HAMMING)

    @classmethod
    def symmetric_difference(cls) -> "InputPremetric":
        return cls(PremetricKind.SYMMETRIC_DIFFERENCE)

    @classmethod
    def explicit(cls, matrix) -> "InputPremetric":
        return cls(PremetricKind.EXPLICIT_MATRIX, tuple(tuple(r) for r in matrix))

    def to_document(self) -> dict:
        doc: dict = {"kind": self.kind.value}
        if self.matrix is not None:
            doc["matrix"] = [["inf" if is_inf(v) else str(v) for v in row] for row in self.matrix]
        return doc


def _distance_entry(v) -> Value:
    v = to_extreal(v)
    if not (is_inf(v) or (isinstance(v, ExactReal) and v.is_rational)):
        raise ParameterError(f"premetric entries must be rational or inf, got {v!r}")
    return v


def input_distance(premetric: InputPremetric, domain: DatasetDomain, x: int, x_prime: int) -> Value:
    """Distance between datasets ``x`` and ``x_prime`` (ids in ``domain``).

    Bounded Hamming counts differing positions of fixed-size tuples; the
    symmetric-difference premetric counts records to add or remove to turn
    one multiset into the other.
    """
    n = len(domain)
    if not (0 <= x < n and 0 <= x_prime < n):
        raise DomainMismatchError(f"dataset ids ({x}, {x_prime}) outside domain of size {n}")
    if premetric.kind is PremetricKind.BOUNDED_HAMMING:
        if domain.mode is not Mode.FIXED_SIZE:
            raise ModeMismatchError("bounded Hamming distance needs a fixed-size domain")
        a, b = domain[x], domain[x_prime]
        return ExactReal(sum(u != v for u, v in zip(a, b)))
    if premetric.kind is PremetricKind.SYMMETRIC_DIFFERENCE:
        a, b = Counter(domain[x]), Counter(domain[x_prime])
        return ExactReal(sum(((a - b) + (b - a)).values()))
    matrix = premetric.matrix
    if len(matrix) != n or len(matrix[x]) != n:
        raise DomainMismatchError(f"premetric matrix is not {n}x{n}")
    return matrix[x][x_prime]


@dataclass(frozen=True)
class BudgetMap:
    """Per-universe protection-loss budget; ``inf`` means unconstrained."""

    per_universe: Mapping[str, Value]

    def __post_init__(self):
        items = {str(k): to_extreal(v) for k, v in dict(self.per_universe).items()}
        object.__setattr__(self, "per_universe", _FrozenDict(items))

    @classmethod
    def uniform(cls, multiverse: Multiverse, eps) -> "BudgetMap":
        return cls({uid: eps for uid in multiverse.ids})

    def __getitem__(self, universe_id: str) -> Value:
        return self.per_universe[universe_id]

    def __iter__(self):
        return iter(self.per_universe)

    def items(self):
        return self.per_universe.items()

    def to_document(self) -> dict:
        return {k: ("inf" if is_inf(v) else str(v)) for k, v in self.per_universe.items()}


class _FrozenDict(dict):
    def __hash__(self):
        return hash(tuple(self.items()))

    def _readonly(self, *a, **k):
        raise TypeError("budget maps are immutable")

    __setitem__ = __delitem__ = clear = pop = popitem = setdefault = update = _readonly


@dataclass(frozen=True)
class Flavor:
    """The four components of a specification other than its budget."""

    domain: DatasetDomain
    multiverse: Multiverse
    input_premetric: InputPremetric
    output_divergence: OutputDivergence

    def with_budget(self, budget: BudgetMap | Mapping | object) -> "DpSpecification":
        if not isinstance(budget, BudgetMap):
            budget = BudgetMap(budget) if isinstance(budget, Mapping) else BudgetMap.uniform(self.multiverse, budget)
        return DpSpecification(self.domain, self.multiverse, self.input_premetric, self.output_divergence, budget)

    def fingerprint(self) -> str:
        """Structural identity of the flavor, as a short hex digest."""
        doc = {
            "domain": self.domain.to_document(),
            "multiverse": [[u.id, list(u.member_ids)] for u in self.multiverse],
            "premetric": self.input_premetric.to_document(),
            "divergence": self.output_divergence.to_document(),
        }
        blob = json.dumps(doc, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class DpSpecification:
    domain: DatasetDomain
    multiverse: Multiverse
    input_premetric: InputPremetric
    output_divergence: OutputDivergence
    budget: BudgetMap

    @property
    def flavor(self) -> Flavor:
        return Flavor(self.domain, self.multiverse, self.input_premetric, self.output_divergence)

    def fingerprint(self) -> str:
        return self.flavor.fingerprint()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_spec(spec: DpSpecification | Flavor) -> ValidationReport:
    """Collect structural defects; never raises on a malformed spec."""
    out: list[str] = []
    n = len(spec.domain)
    for u in spec.multiverse:
        dangling = [i for i in u.member_ids if not 0 <= i < n]
        if dangling:
            out.append(f"universe {u.id!r} references unknown dataset ids {dangling}")
    pm = spec.input_premetric
    if pm.kind is PremetricKind.BOUNDED_HAMMING and spec.domain.mode is not Mode.FIXED_SIZE:
        out.append("bounded-hamming premetric on an up-to-size domain")
    if pm.kind is PremetricKind.EXPLICIT_MATRIX:
        m = pm.matrix
        if len(m) != n or any(len(row) != n for row in m):
            out.append(f"premetric matrix is not {n}x{n}")
        else:
            if any(m[i][i] != 0 for i in range(n)):
                out.append("premetric diagonal nonzero")
            if any(not is_inf(v) and v < 0 for row in m for v in row):
                out.append("premetric has negative entries")
    if isinstance(spec, DpSpecification):
        ids = set(spec.multiverse.ids)
        for uid in spec.multiverse.ids:
            if uid not in spec.budget.per_universe:
                out.append(f"budget missing for universe {uid!r}")
        for uid, eps in spec.budget.items():
            if uid not in ids:
                out.append(f"budget names unknown universe {uid!r}")
            elif not is_inf(eps) and eps < 0:
                out.append(f"budget for universe {uid!r} is negative")
    return ValidationReport(tuple(out))


# -- spec documents ----------------------------------------------------------


def _multiverse_from_document(doc, domain: DatasetDomain) -> Multiverse:
    if doc == "full":
        return Multiverse.full(domain)
    return Multiverse(tuple(DataUniverse(str(u["id"]), tuple(u["members"])) for u in doc))


def spec_from_document(doc: Mapping, require_budget: bool = True) -> DpSpecification | Flavor:
    """Build a specification (or a budget-less Flavor) from a JSON document.

    ``multiverse`` may be the string ``"full"`` or a list of
    ``{"id": ..., "members": [...]}``; the budget maps universe ids to values
    such as ``"ln(3)"``, ``"1/2"``, ``1.0`` or ``"inf"``. A scalar budget is
    applied to every universe.
    """
    validate_document(doc, "spec")
    try:
        d = doc["domain"]
        domain = make_domain(d["alphabet"], d["max_size"], d.get("mode", "fixed-size"))
        flavor = Flavor(
            domain,
            _multiverse_from_document(doc.get("multiverse", "full"), domain),
            InputPremetric(doc["premetric"]["kind"], doc["premetric"].get("matrix")),
            OutputDivergence.from_document(doc["divergence"]),
        )
        if "budget" not in doc:
            if require_budget:
                raise SchemaError("'budget' is a required property")
            return flavor
        budget = doc["budget"]
        if isinstance(budget, Mapping):
            return flavor.with_budget(BudgetMap(budget))
        return flavor.with_budget(budget)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(str(exc)) from exc


def spec_to_document(spec: DpSpecification | Flavor) -> dict:
    doc = {
        "domain": spec.domain.to_document(),
        "multiverse": [{"id": u.id, "members": list(u.member_ids)} for u in spec.multiverse],
        "premetric": spec.input_premetric.to_document(),
        "divergence": spec.output_divergence.to_document(),
    }
    if isinstance(spec, DpSpecification):
        doc["budget"] = spec.budget.to_document()
    return doc


def load_spec(path: str | Path, require_budget: bool = True) -> DpSpecification | Flavor:
    with open(path) as fh:
        return spec_from_document(json.load(fh), require_budget=require_budget)
