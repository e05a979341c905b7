"""Finite data-release mechanisms as exact stochastic kernels.

A mechanism assigns every dataset id of a domain one exact output
distribution. Nothing here samples; the verifier only needs distributions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from dpspec._schema import validate_document
from dpspec.core import DatasetDomain, Mode
from dpspec.divergences import Distribution
from dpspec.errors import DomainMismatchError, NotStochasticError, ParameterError, SchemaError
from dpspec.exact import to_fraction

__all__ = [
    "Mechanism",
    "constant",
    "exact_release",
    "geometric_count",
    "kernel_from_file",
    "kernel_to_document",
    "product",
    "randomized_response",
]


@dataclass(frozen=True)
class Mechanism:
    """Row ``i`` of ``rows`` is the output distribution on dataset id ``i``.

    ``domain`` may be None for kernels read from files; the verifier then
    binds them to the domain being checked by row count.
    """

    output_labels: tuple
    rows: tuple[Distribution, ...]
    domain: DatasetDomain | None = None

    def __post_init__(self):
        labels = tuple(self.output_labels)
        rows = tuple(self.rows)
        if not rows:
            raise ParameterError("a mechanism needs at least one row")
        for i, row in enumerate(rows):
            if set(row.outcomes) != set(labels) or len(row.outcomes) != len(labels):
                raise ParameterError(f"row {i} is not over the mechanism's output labels")
        if self.domain is not None and len(self.domain) != len(rows):
            raise DomainMismatchError(f"{len(rows)} rows for a domain of {len(self.domain)} datasets")
        object.__setattr__(self, "output_labels", labels)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_function(
        cls, domain: DatasetDomain, output_labels: Sequence, kernel: Callable[[tuple], Mapping]
    ) -> "Mechanism":
        """Tabulate ``kernel(dataset) -> {label: probability}`` over the domain."""
        labels = tuple(output_labels)
        rows = []
        for i, ds in enumerate(domain.datasets):
            probs = kernel(ds)
            try:
                rows.append(Distribution(labels, tuple(probs.get(t, 0) for t in labels)))
            except NotStochasticError as exc:
                raise NotStochasticError(f"dataset {i}: {exc}", dataset_id=i) from None
        return cls(labels, tuple(rows), domain)

    def __getitem__(self, dataset_id: int) -> Distribution:
        return self.rows[dataset_id]

    def __len__(self):
        return len(self.rows)


def randomized_response(domain: DatasetDomain, keep_prob) -> Mechanism:
    """Report the single binary record truthfully with probability ``keep_prob``.

    ``keep_prob`` must lie strictly between 1/2 and 1.
    """
    keep = to_fraction(keep_prob)
    if not Fraction(1, 2) < keep < 1:
        raise ParameterError(f"keep_prob must lie in (1/2, 1), got {keep}")
    if len(domain.value_alphabet) != 2 or domain.max_size != 1 or domain.mode is not Mode.FIXED_SIZE:
        raise ParameterError("randomized response needs a fixed-size binary domain with one record")
    a, b = domain.value_alphabet
    return Mechanism.from_function(
        domain, (a, b), lambda ds: {ds[0]: keep, (b if ds[0] == a else a): 1 - keep}
    )


def geometric_count(domain: DatasetDomain, query: Callable[[tuple], int], decay, clamp) -> Mechanism:
    """Truncated geometric noise on an integer query.

    The output distribution at ``x`` is proportional to
    ``decay ** abs(t - query(x))`` for ``t`` in ``clamp``, renormalized over the
    clamp range (no endpoint pile-up), so every row is strictly positive.

    Args:
        domain: the dataset domain.
        query: integer-valued function of a dataset.
        decay: rational in (0, 1).
        clamp: an inclusive ``(lo, hi)`` pair or a ``range`` of output values.
    """
    decay = to_fraction(decay)
    if not 0 < decay < 1:
        raise ParameterError(f"decay must lie in (0, 1), got {decay}")
    outputs = tuple(clamp) if isinstance(clamp, range) else tuple(range(clamp[0], clamp[1] + 1))
    if not outputs:
        raise ParameterError("clamp range is empty")

    def kernel(ds):
        q = query(ds)
        if q not in outputs:
            raise ParameterError(f"query value {q} on {ds!r} lies outside the clamp range")
        weights = {t: decay ** abs(t - q) for t in outputs}
        z = sum(weights.values())
        return {t: w / z for t, w in weights.items()}

    return Mechanism.from_function(domain, outputs, kernel)


def exact_release(domain: DatasetDomain, statistic) -> Mechanism:
    """Publish ``statistic(x)`` with no noise: each row is a point mass.

    ``statistic`` is a callable on datasets, or anything with a ``values``
    sequence indexed by dataset id (an InvariantStatistic).
    """
    if hasattr(statistic, "values") and not callable(statistic):
        values = list(statistic.values)
        if len(values) != len(domain):
            raise DomainMismatchError("statistic does not cover the domain")
    else:
        values = [statistic(ds) for ds in domain.datasets]
    labels = tuple(dict.fromkeys(values))
    rows = tuple(Distribution.point_mass(v, labels) for v in values)
    return Mechanism(labels, rows, domain)


def constant(domain: DatasetDomain, distribution: Distribution | None = None) -> Mechanism:
    """The same output distribution on every dataset (a single label by default)."""
    dist = distribution or Distribution.of([1], ["*"])
    return Mechanism(dist.outcomes, (dist,) * len(domain), domain)


def product(m1: Mechanism, m2: Mechanism) -> Mechanism:
    """Independent joint release: labels are pairs, rows are product measures."""
    if len(m1) != len(m2) or (m1.domain is not None and m2.domain is not None and m1.domain != m2.domain):
        raise DomainMismatchError("product needs mechanisms on the same domain")
    labels = tuple(itertools.product(m1.output_labels, m2.output_labels))
    rows = []
    for r1, r2 in zip(m1.rows, m2.rows):
        p1, p2 = r1.as_dict(), r2.as_dict()
        rows.append(Distribution(labels, tuple(p1[a] * p2[b] for a, b in labels)))
    return Mechanism(labels, tuple(rows), m1.domain or m2.domain)


def kernel_from_file(document: Mapping, domain: DatasetDomain | None = None) -> Mechanism:
    """Read ``{"outputs": [...], "rows": {"<id>": {"<label>": "p/q", ...}}}``.

    Row ids must be exactly ``0..n-1``. Labels missing from a row get
    probability 0.

    Raises:
        SchemaError: the document does not match the kernel schema.
        NotStochasticError: a row has a negative entry or does not sum to 1;
            ``dataset_id`` names the row.
    """
    validate_document(document, "kernel")
    outputs = tuple(document["outputs"])
    raw_rows = document["rows"]
    ids = sorted(int(k) for k in raw_rows)
    if ids != list(range(len(ids))):
        raise SchemaError(f"row ids must be 0..{len(ids) - 1}, got {ids}", "$['rows']")
    rows = []
    for i in ids:
        row = raw_rows[str(i)]
        unknown = set(row) - {str(o) for o in outputs}
        if unknown:
            raise SchemaError(f"unknown output labels {sorted(unknown)}", f"$['rows']['{i}']")
        by_label = {str(o): o for o in outputs}
        probs = {by_label[k]: to_fraction(v) for k, v in row.items()}
        try:
            rows.append(Distribution(outputs, tuple(probs.get(o, Fraction(0)) for o in outputs)))
        except NotStochasticError as exc:
            raise NotStochasticError(f"row for dataset {i}: {exc}", dataset_id=i) from None
    return Mechanism(outputs, tuple(rows), domain)


def kernel_to_document(mechanism: Mechanism) -> dict:
    labels = [_json_label(o) for o in mechanism.output_labels]
    return {
        "outputs": labels,
        "rows": {
            str(i): {str(lab): str(p) for lab, p in zip(labels, row.probs)}
            for i, row in enumerate(mechanism.rows)
        },
    }


def _json_label(label):
    if isinstance(label, (str, int)) and not isinstance(label, bool):
        return label
    if isinstance(label, tuple):
        return ",".join(map(str, label))
    return str(label)
