"""Invariant statistics and the multiverses they induce.

An invariant is released exactly. Protection can then only hold among
datasets that agree on it, so the domain is partitioned into the level sets
of the statistic and each level set becomes a universe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

from dpspec._schema import validate_document
from dpspec.core import DataUniverse, DatasetDomain, Flavor, InputPremetric, Mode, Multiverse
from dpspec.divergences import OutputDivergence
from dpspec.errors import DomainMismatchError, SchemaError
from dpspec.exact import INF, Value, is_inf
from dpspec.mechanisms import Mechanism
from dpspec.verifier import tightest_epsilon

__all__ = [
    "InvariantStatistic",
    "MarginReport",
    "invariant_margin_report",
    "load_statistic",
    "partition_by_invariant",
    "statistic_from_document",
]


@dataclass(frozen=True)
class InvariantStatistic:
    """``values[i]`` is the invariant's value on dataset id ``i``."""

    label: str
    values: tuple

    @classmethod
    def from_function(cls, domain: DatasetDomain, fn: Callable[[tuple], object], label: str | None = None):
        return cls(label or getattr(fn, "__name__", "statistic"), tuple(fn(ds) for ds in domain.datasets))


def partition_by_invariant(domain: DatasetDomain, statistic: InvariantStatistic) -> Multiverse:
    """Universes are the nonempty level sets, in order of first appearance.

    Universe ids read ``"<label>=<value>"``.
    """
    if len(statistic.values) != len(domain):
        raise DomainMismatchError(
            f"statistic has {len(statistic.values)} values for a domain of {len(domain)} datasets"
        )
    levels: dict[object, list[int]] = {}
    for i, v in enumerate(statistic.values):
        levels.setdefault(v, []).append(i)
    return Multiverse(tuple(DataUniverse(f"{statistic.label}={v}", tuple(ids)) for v, ids in levels.items()))


@dataclass(frozen=True)
class MarginReport:
    """What an invariant leaks by construction.

    ``cross_minima[(u, v)]`` is the smallest divergence from a row in ``u`` to
    a row in ``v``; ``within_tightest`` is the verifier's budget per universe.
    Informational only.
    """

    universes: tuple[str, ...]
    cross_minima: Mapping[tuple[str, str], Value]
    within_tightest: Mapping[str, Value]


def invariant_margin_report(
    mechanism: Mechanism,
    statistic: InvariantStatistic,
    divergence: OutputDivergence | None = None,
    premetric: InputPremetric | None = None,
) -> MarginReport:
    domain = mechanism.domain
    if domain is None:
        raise DomainMismatchError("the mechanism must carry its domain")
    divergence = divergence or OutputDivergence.max()
    if premetric is None:
        premetric = (
            InputPremetric.hamming() if domain.mode is Mode.FIXED_SIZE else InputPremetric.symmetric_difference()
        )
    multiverse = partition_by_invariant(domain, statistic)
    cross: dict[tuple[str, str], Value] = {}
    for u in multiverse:
        for v in multiverse:
            if u.id == v.id:
                continue
            best: Value = INF
            for x in u.member_ids:
                for y in v.member_ids:
                    d = divergence(mechanism[x], mechanism[y])
                    if not is_inf(d) and (is_inf(best) or d < best):
                        best = d
            cross[(u.id, v.id)] = best
    within = tightest_epsilon(mechanism, Flavor(domain, multiverse, premetric, divergence))
    return MarginReport(multiverse.ids, cross, within)


def statistic_from_document(doc: Mapping, domain: DatasetDomain) -> InvariantStatistic:
    """Read ``{"label": ..., "values": {"<dataset id>": <value label>}}``."""
    validate_document(doc, "statistic")
    values = doc["values"]
    ids = sorted(int(k) for k in values)
    if ids != list(domain.ids):
        raise SchemaError(f"statistic must assign every dataset id 0..{len(domain) - 1}", "$['values']")
    return InvariantStatistic(doc.get("label", "statistic"), tuple(values[str(i)] for i in ids))


def load_statistic(path: str | Path, domain: DatasetDomain) -> InvariantStatistic:
    with open(path) as fh:
        return statistic_from_document(json.load(fh), domain)
