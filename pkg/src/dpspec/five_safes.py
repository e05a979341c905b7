"""Five Safes regimes, their contextual-integrity reading, and DP evidence.

A regime scores the five dimensions (people, projects, settings, data,
outputs) for one information flow. Levels live in [0, 1] and are shown in
four bands; they are never aggregated into a single risk score. Verified DP
results can be attached as evidence, but only on the data and outputs
dimensions, and always with two fixed caveats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from dpspec._schema import validate_document
from dpspec.exact import format_value
from dpspec.verifier import VerificationResult

__all__ = [
    "DP_NATURE_CAVEAT",
    "DP_SCOPE_CAVEAT",
    "CiNormAssignment",
    "Dimension",
    "DpEvidence",
    "Flow",
    "PresetKind",
    "Safety",
    "SafetyLabel",
    "SafesRegime",
    "SafesReport",
    "assess",
    "attach_dp",
    "label_for",
    "map_to_ci",
    "preset",
    "regime_from_document",
    "regime_to_document",
]

DP_NATURE_CAVEAT = (
    "DP evidence covers the form of the release, not the nature of the data: "
    "structurally identical datasets get the same guarantee however sensitive their content."
)
DP_SCOPE_CAVEAT = (
    "DP evidence is a property of the released outputs and makes no assessment "
    "of the people, projects or settings dimensions."
)

SENDER = "statistical agency / NSO / data custodian"


class Dimension(str, Enum):
    PEOPLE = "people"
    PROJECTS = "projects"
    SETTINGS = "settings"
    DATA = "data"
    OUTPUTS = "outputs"


DP_TARGETS = (Dimension.DATA, Dimension.OUTPUTS)


class Flow(str, Enum):
    DATA_TO_RESEARCHER = "data-to-researcher"
    OUTPUTS_TO_PUBLIC = "outputs-to-public"

    @property
    def recipient(self) -> str:
        return "researchers" if self is Flow.DATA_TO_RESEARCHER else "general public"


class SafetyLabel(str, Enum):
    NONE = "none"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


def label_for(level: float) -> SafetyLabel:
    """Band a level: none < 0.25 <= low < 0.5 <= medium < 0.75 <= high."""
    if not 0 <= level <= 1:
        raise ValueError(f"safety level {level} outside [0, 1]")
    if level < 0.25:
        return SafetyLabel.NONE
    if level < 0.5:
        return SafetyLabel.LOW
    if level < 0.75:
        return SafetyLabel.MEDIUM
    return SafetyLabel.HIGH


@dataclass(frozen=True)
class Safety:
    level: float
    label: SafetyLabel | None = None
    rationale: str = ""

    def __post_init__(self):
        banded = label_for(self.level)
        if self.label is None:
            object.__setattr__(self, "label", banded)
        elif SafetyLabel(self.label) is not banded:
            raise ValueError(f"label {SafetyLabel(self.label).value!r} does not match level {self.level}")
        else:
            object.__setattr__(self, "label", banded)


@dataclass(frozen=True)
class DpEvidence:
    target: Dimension
    satisfied: bool
    summary: str
    fingerprint: str
    epsilons: Mapping[str, str]
    witness: str | None = None
    caveat: str = DP_NATURE_CAVEAT

    def __post_init__(self):
        target = Dimension(self.target)
        if target not in DP_TARGETS:
            raise ValueError(f"DP evidence can only target data or outputs, not {target.value}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "epsilons", MappingProxyType(dict(self.epsilons)))


@dataclass(frozen=True)
class SafesRegime:
    """A dissemination regime assessed along the five dimensions for one flow.

    ``mandates`` records reasons for a flow (legal duties, say) that the five
    dimensions do not capture.
    """

    name: str
    flow: Flow
    safety: Mapping[Dimension, Safety]
    subject: str = "data contributors: persons, businesses or other entities"
    information_type: str = "unspecified"
    mandates: tuple[str, ...] = ()
    dp_evidence: tuple[DpEvidence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "flow", Flow(self.flow))
        safety = {Dimension(k): v for k, v in dict(self.safety).items()}
        missing = [d.value for d in Dimension if d not in safety]
        if missing:
            raise ValueError(f"regime {self.name!r} lacks dimensions {missing}")
        object.__setattr__(self, "safety", MappingProxyType(safety))
        object.__setattr__(self, "mandates", tuple(self.mandates))
        object.__setattr__(self, "dp_evidence", tuple(self.dp_evidence))

    def __getitem__(self, dim: Dimension | str) -> Safety:
        return self.safety[Dimension(dim)]

    people = property(lambda self: self[Dimension.PEOPLE])
    projects = property(lambda self: self[Dimension.PROJECTS])
    settings = property(lambda self: self[Dimension.SETTINGS])
    data = property(lambda self: self[Dimension.DATA])
    outputs = property(lambda self: self[Dimension.OUTPUTS])

    def evidence_for(self, dim: Dimension | str) -> tuple[DpEvidence, ...]:
        dim = Dimension(dim)
        return tuple(e for e in self.dp_evidence if e.target is dim)


# -- presets -----------------------------------------------------------------


class PresetKind(str, Enum):
    OPEN_DATA = "open-data"
    PHYSICAL_ENCLAVE = "physical-enclave"
    VIRTUAL_ENCLAVE = "virtual-enclave"
    SYNTHETIC_WITH_VALIDATION = "synthetic-with-validation"


def _regime(name, flow, **dims) -> SafesRegime:
    return SafesRegime(name, flow, {Dimension(k): Safety(level, rationale=why) for k, (level, why) in dims.items()})


def _enclave(name: str, settings: tuple[float, str]) -> SafesRegime:
    return _regime(
        name,
        Flow.DATA_TO_RESEARCHER,
        people=(0.9, "only vetted researchers with a legitimate scientific purpose get access"),
        projects=(0.9, "each project is reviewed for purpose and research ethics before access"),
        settings=settings,
        data=(0.3, "the accessible data are detailed and comprehensive"),
        outputs=(0.85, "anything taken out of the enclave passes output review"),
    )


def preset(kind: PresetKind | str) -> tuple[SafesRegime, ...]:
    """Editorial encodings of the standard dissemination regimes.

    Returns one regime per information flow involved: a single regime for
    open data and enclaves, two for synthetic data with validation.
    """
    kind = PresetKind(kind)
    if kind is PresetKind.OPEN_DATA:
        return (
            _regime(
                "open data",
                Flow.OUTPUTS_TO_PUBLIC,
                people=(0.0, "anyone may download the files; users are not vetted"),
                projects=(0.0, "use cannot be supervised after release, so projects go unexamined"),
                settings=(0.0, "the custodian has no control over where the files are used"),
                data=(0.9, "files are aggregated or subsampled and reviewed before publication"),
                outputs=(0.9, "the published files are themselves the outputs and get the same review"),
            ),
        )
    if kind is PresetKind.PHYSICAL_ENCLAVE:
        return (_enclave("physical enclave", (0.95, "on-site research data centre under custodian control")),)
    if kind is PresetKind.VIRTUAL_ENCLAVE:
        return (
            _enclave(
                "virtual enclave",
                (0.75, "remote secure server; less oversight of the access location than on site"),
            ),
        )
    return (
        _regime(
            "synthetic data with validation: released results",
            Flow.OUTPUTS_TO_PUBLIC,
            people=(0.0, "validated results reach the general public"),
            projects=(0.0, "further use of published results is not supervised"),
            settings=(0.0, "published results circulate freely"),
            data=(0.8, "only vetted results computed on the confidential file leave the custodian"),
            outputs=(0.9, "validated results get stringent disclosure review, as for open data"),
        ),
        _regime(
            "synthetic data with validation: researcher access",
            Flow.DATA_TO_RESEARCHER,
            people=(0.5, "researchers face moderate vetting"),
            projects=(0.75, "proposed analyses are checked as appropriate and feasible"),
            settings=(0.75, "the synthetic-data server works as a virtual enclave"),
            data=(0.6, "synthetic file is safer than the confidential file used for validation"),
            outputs=(0.85, "validation results are reviewed as strictly as enclave outputs"),
        ),
    )


# -- contextual integrity ----------------------------------------------------


@dataclass(frozen=True)
class CiNormAssignment:
    """The five contextual-integrity parameters read off a regime.

    ``*_sources`` name the Five Safes dimensions each parameter draws on.
    """

    sender: str
    recipient: str
    subject: str
    information_type: str
    transmission_principles: tuple[str, ...]
    unmapped_remainder: str
    recipient_sources: tuple[str, ...] = ("people",)
    subject_sources: tuple[str, ...] = ("data",)
    information_type_sources: tuple[str, ...] = ("data", "outputs")
    transmission_sources: tuple[str, ...] = ("projects", "settings")


def map_to_ci(regime: SafesRegime) -> CiNormAssignment:
    principles = (
        f"projects ({regime.projects.label.value}): {regime.projects.rationale}",
        f"settings ({regime.settings.label.value}): {regime.settings.rationale}",
    ) + tuple(f"mandate: {m}" for m in regime.mandates)
    return CiNormAssignment(
        sender=SENDER,
        recipient=regime.flow.recipient,
        subject=f"{regime.subject} (component of data)",
        information_type=f"{regime.information_type} (component of data; determines outputs)",
        transmission_principles=principles,
        unmapped_remainder="; ".join(regime.mandates),
    )


# -- DP evidence ---------------------------------------------------------------


def attach_dp(regime: SafesRegime, result: VerificationResult, fingerprint: str | None = None) -> SafesRegime:
    """Record a verification result on the data and outputs dimensions.

    Safety levels are left alone on every dimension; the evidence is
    informational and carries the nature-of-data caveat.
    """
    eps = {u: format_value(v) for u, v in result.per_universe_tightest.items()}
    status = "satisfied" if result.satisfied else "not satisfied"
    summary = f"{status}; tightest budget per universe: " + ", ".join(f"{u}={e}" for u, e in eps.items())
    witness = result.witness.describe() if result.witness else None
    fp = fingerprint if fingerprint is not None else result.fingerprint
    new = tuple(DpEvidence(t, result.satisfied, summary, fp, eps, witness) for t in DP_TARGETS)
    return replace(regime, dp_evidence=regime.dp_evidence + new)


# -- assessment ----------------------------------------------------------------


@dataclass(frozen=True)
class SafesReport:
    name: str
    flow: Flow
    rows: tuple[tuple[str, float, str, str], ...]
    ci: CiNormAssignment
    evidence: tuple[DpEvidence, ...]
    caveats: tuple[str, ...]
    comparison: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "flow": self.flow.value,
            "dimensions": [
                {"dimension": d, "level": lv, "label": lab, "rationale": why} for d, lv, lab, why in self.rows
            ],
            "ci": {
                "sender": self.ci.sender,
                "recipient": self.ci.recipient,
                "subject": self.ci.subject,
                "information_type": self.ci.information_type,
                "transmission_principles": list(self.ci.transmission_principles),
                "unmapped_remainder": self.ci.unmapped_remainder,
            },
            "dp_evidence": [_evidence_doc(e) for e in self.evidence],
            "caveats": list(self.caveats),
            "comparison": {k: dict(v) for k, v in self.comparison.items()},
        }

    def render_text(self) -> str:
        lines = [f"Five Safes assessment: {self.name} ({self.flow.value})", ""]
        for d, lv, lab, why in self.rows:
            lines.append(f"  {d:<9} {lab:<7} {lv:.2f}  {why}")
        lines += [
            "",
            "Contextual integrity:",
            f"  sender:      {self.ci.sender}",
            f"  recipient:   {self.ci.recipient}",
            f"  subject:     {self.ci.subject}",
            f"  info type:   {self.ci.information_type}",
            "  transmission principles:",
        ]
        lines += [f"    - {p}" for p in self.ci.transmission_principles]
        if self.ci.unmapped_remainder:
            lines.append(f"  beyond the five safes: {self.ci.unmapped_remainder}")
        if self.evidence:
            lines += ["", "DP evidence:"]
            lines += [f"  [{e.target.value}] {e.summary}" for e in self.evidence]
            lines += [f"    witness: {e.witness}" for e in self.evidence if e.witness]
            lines += ["", "Caveats:"] + [f"  * {c}" for c in self.caveats]
        header = ["dimension", self.name[:24]] + list(self.comparison)
        lines += ["", "Comparison with presets:", "  " + " | ".join(header)]
        for d, _, lab, _ in self.rows:
            lines.append("  " + " | ".join([d, lab] + [self.comparison[p][d] for p in self.comparison]))
        return "\n".join(lines) + "\n"


def assess(regime: SafesRegime) -> SafesReport:
    """Assemble the report; there is deliberately no overall score."""
    rows = tuple((d.value, regime[d].level, regime[d].label.value, regime[d].rationale) for d in Dimension)
    comparison = {}
    for kind in (PresetKind.OPEN_DATA, PresetKind.PHYSICAL_ENCLAVE, PresetKind.SYNTHETIC_WITH_VALIDATION):
        candidates = preset(kind)
        ref = next((r for r in candidates if r.flow is regime.flow), candidates[0])
        comparison[kind.value] = {d.value: ref[d].label.value for d in Dimension}
    caveats = (DP_NATURE_CAVEAT, DP_SCOPE_CAVEAT) if regime.dp_evidence else ()
    return SafesReport(regime.name, regime.flow, rows, map_to_ci(regime), regime.dp_evidence, caveats, comparison)


# -- documents -----------------------------------------------------------------


def _evidence_doc(e: DpEvidence) -> dict:
    return {
        "target": e.target.value,
        "satisfied": e.satisfied,
        "summary": e.summary,
        "fingerprint": e.fingerprint,
        "epsilons": dict(e.epsilons),
        "witness": e.witness,
        "caveat": e.caveat,
    }


def regime_to_document(regime: SafesRegime) -> dict:
    doc = {
        "name": regime.name,
        "flow": regime.flow.value,
        "safety": {
            d.value: {"level": regime[d].level, "label": regime[d].label.value, "rationale": regime[d].rationale}
            for d in Dimension
        },
        "subject": regime.subject,
        "information_type": regime.information_type,
        "mandates": list(regime.mandates),
    }
    if regime.dp_evidence:
        doc["dp_evidence"] = [_evidence_doc(e) for e in regime.dp_evidence]
    return doc


def regime_from_document(doc: Mapping) -> SafesRegime:
    validate_document(doc, "regime")
    safety = {
        Dimension(k): Safety(v["level"], v.get("label"), v.get("rationale", "")) for k, v in doc["safety"].items()
    }
    evidence = tuple(
        DpEvidence(
            e["target"], e["satisfied"], e.get("summary", ""), e["fingerprint"], e["epsilons"],
            e.get("witness"), e.get("caveat", DP_NATURE_CAVEAT),
        )
        for e in doc.get("dp_evidence", ())
    )
    kwargs = {k: doc[k] for k in ("subject", "information_type") if k in doc}
    return SafesRegime(
        doc["name"], doc["flow"], safety, mandates=tuple(doc.get("mandates", ())), dp_evidence=evidence, **kwargs
    )


def load_regime(path: str | Path) -> SafesRegime:
    with open(path) as fh:
        return regime_from_document(json.load(fh))
