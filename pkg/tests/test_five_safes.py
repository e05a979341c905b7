import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpspec import (
    DP_NATURE_CAVEAT,
    DP_SCOPE_CAVEAT,
    Dimension,
    DpEvidence,
    Flavor,
    Flow,
    InputPremetric,
    Multiverse,
    OutputDivergence,
    PresetKind,
    Safety,
    SafesRegime,
    assess,
    attach_dp,
    label_for,
    make_domain,
    map_to_ci,
    preset,
    randomized_response,
    regime_from_document,
    regime_to_document,
    satisfies,
)

BIT = make_domain([0, 1], 1)
SPEC = Flavor(BIT, Multiverse.full(BIT), InputPremetric.hamming(), OutputDivergence.max())
RR = randomized_response(BIT, "3/4")
PASSED = satisfies(RR, SPEC.with_budget("ln(3)"))
FAILED = satisfies(RR, SPEC.with_budget(1))


def test_bands():
    assert [label_for(x).value for x in (0, 0.25, 0.5, 0.75, 1)] == ["none", "low", "medium", "high", "high"]
    with pytest.raises(ValueError):
        Safety(0.9, "low")
    with pytest.raises(ValueError):
        label_for(1.5)


def test_presets():
    (open_data,) = preset("open-data")
    assert open_data.projects.label.value == "none"
    assert open_data.settings.label.value == "none"
    (enclave,) = preset("physical-enclave")
    assert enclave.settings.label.value == "high"
    synth = preset(PresetKind.SYNTHETIC_WITH_VALIDATION)
    assert {r.flow for r in synth} == set(Flow)


def test_ci_mapping():
    for kind in PresetKind:
        for r in preset(kind):
            ci = map_to_ci(r)
            assert ci.recipient == ("researchers" if r.flow is Flow.DATA_TO_RESEARCHER else "general public")
            assert ci.sender == "statistical agency / NSO / data custodian"
            assert "component of data" in ci.subject
            assert "determines outputs" in ci.information_type
            assert any(p.startswith("projects") for p in ci.transmission_principles)
            assert any(p.startswith("settings") for p in ci.transmission_principles)


def test_mandates_land_in_remainder():
    (r,) = preset("open-data")
    r = SafesRegime(r.name, r.flow, r.safety, mandates=("constitutional apportionment",))
    ci = map_to_ci(r)
    assert "constitutional apportionment" in ci.unmapped_remainder
    assert "mandate: constitutional apportionment" in ci.transmission_principles


def test_attach_dp():
    (r,) = preset("physical-enclave")
    once = attach_dp(r, PASSED)
    assert [e.target for e in once.dp_evidence] == [Dimension.DATA, Dimension.OUTPUTS]
    assert "ln(3)" in once.evidence_for("data")[0].summary
    assert all(once[d] == r[d] for d in Dimension)

    twice = attach_dp(once, FAILED)
    assert len(twice.dp_evidence) == 4
    assert twice.dp_evidence[:2] == once.dp_evidence
    latest = twice.evidence_for("outputs")[-1]
    assert not latest.satisfied and "not satisfied" in latest.summary and latest.witness
    with pytest.raises(ValueError):
        DpEvidence("people", True, "", "", {})


def test_assess():
    (open_data,) = preset("open-data")
    report = assess(open_data)
    assert report.ci.recipient == "general public"
    rows = {d: lab for d, _, lab, _ in report.rows}
    assert rows["projects"] == rows["settings"] == "none"
    assert report.caveats == ()
    (enclave,) = preset("physical-enclave")
    assert {d: lab for d, _, lab, _ in assess(enclave).rows}["settings"] == "high"

    with_dp = assess(attach_dp(enclave, PASSED))
    assert with_dp.caveats == (DP_NATURE_CAVEAT, DP_SCOPE_CAVEAT)
    text = with_dp.render_text()
    assert DP_NATURE_CAVEAT in text and DP_SCOPE_CAVEAT in text
    assert "score" not in json.dumps(with_dp.to_document())


def test_regime_document_roundtrip():
    for kind in PresetKind:
        for r in preset(kind):
            r = attach_dp(r, FAILED)
            assert regime_from_document(json.loads(json.dumps(regime_to_document(r)))) == r


levels = st.floats(0, 1, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(levels, min_size=5, max_size=5),
    st.sampled_from(list(Flow)),
    st.lists(st.text(min_size=1, max_size=20), max_size=3),
    st.sampled_from([PASSED, FAILED]),
)
def test_attach_dp_leaves_people_projects_settings_alone(lv, flow, mandates, result):
    regime = SafesRegime("r", flow, {d: Safety(x) for d, x in zip(Dimension, lv)}, mandates=tuple(mandates))
    attached = attach_dp(regime, result)
    for dim in ("people", "projects", "settings"):
        assert regime_to_document(attached)["safety"][dim] == regime_to_document(regime)["safety"][dim]
    assert all(attached[d].label is label_for(attached[d].level) for d in Dimension)
    assert map_to_ci(attached).recipient == flow.recipient
    report = assess(attached)
    assert DP_NATURE_CAVEAT in report.caveats and DP_SCOPE_CAVEAT in report.caveats
