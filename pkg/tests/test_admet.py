"""ADMET aggregation, candidate parsing and screening filters."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from molblocks.admet import (
    AdmetProbabilities,
    CandidateError,
    admet_score,
    candidate_from_mapping,
    candidate_from_tsv_row,
    filter_candidates,
    parse_candidate_header,
    passes_filter,
    rule_of_three,
)
from molblocks.descriptors import Descriptors

probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def probs(p_dili=0.0, p_ames=0.0, p_herg=0.0, p_pgp=0.0, p_hia=1.0,
          p_bbb=None):
    return AdmetProbabilities(p_dili=p_dili, p_ames=p_ames, p_herg=p_herg,
                              p_pgp=p_pgp, p_hia=p_hia, p_bbb=p_bbb)


def record(smiles="CCO", qed=None, **admet):
    mapping = {"smiles": smiles, "p_dili": 0.1, "p_ames": 0.1,
               "p_herg": 0.1, "p_pgp": 0.1, "p_hia": 0.9}
    mapping.update(admet)
    if qed is not None:
        mapping["qed"] = qed
    return candidate_from_mapping(mapping)


def descriptors(mw=150.0, hbd=1, hba=1):
    return Descriptors(molecular_weight=mw, heavy_atom_count=10, hbd=hbd,
                       hba=hba, rotatable_bonds=2, aromatic_ring_count=1)


class TestAdmetScore:
    def test_best_case(self):
        assert admet_score(probs()) == pytest.approx(5.0, abs=1e-9)

    def test_all_raw_zero(self):
        assert admet_score(probs(p_hia=0.0)) == pytest.approx(4.0, abs=1e-9)

    def test_tabulated_mixed_case(self):
        got = admet_score(probs(0.2, 0.1, 0.3, 0.4, 0.9))
        assert got == pytest.approx(3.9, abs=1e-9)

    def test_bbb_does_not_contribute(self):
        assert admet_score(probs(p_bbb=0.1)) == admet_score(probs(p_bbb=0.9))

    @given(p=probabilities, delta=st.floats(min_value=0.0, max_value=1.0))
    def test_lower_toxicity_never_lowers_score(self, p, delta):
        lowered = max(0.0, p - delta)
        base = admet_score(probs(p_dili=p))
        assert admet_score(probs(p_dili=lowered)) >= base

    @given(p=probabilities, delta=st.floats(min_value=0.0, max_value=1.0))
    def test_higher_absorption_never_lowers_score(self, p, delta):
        raised = min(1.0, p + delta)
        base = admet_score(probs(p_hia=p))
        assert admet_score(probs(p_hia=raised)) >= base

    @given(a=probabilities, b=probabilities, c=probabilities,
           d=probabilities, e=probabilities)
    def test_score_stays_in_range(self, a, b, c, d, e):
        assert 0.0 <= admet_score(probs(a, b, c, d, e)) <= 5.0

    @pytest.mark.parametrize("field, value", [
        ("p_dili", -0.1), ("p_ames", 1.5), ("p_hia", 2.0), ("p_bbb", -1.0),
    ])
    def test_out_of_range_probability_rejected(self, field, value):
        with pytest.raises(ValueError, match=field):
            probs(**{field: value})


class TestCandidateParsing:
    def test_mapping_roundtrip(self):
        got = record(qed=0.8)
        assert got.smiles == "CCO"
        assert got.qed == 0.8
        assert got.descriptors.hba == 1
        assert admet_score(got.admet) == pytest.approx(4.5)

    def test_optional_fields_default_to_none(self):
        got = record()
        assert (got.qed, got.sa, got.logp) == (None, None, None)
        assert got.admet.p_bbb is None

    def test_missing_required_column(self):
        with pytest.raises(CandidateError, match="p_herg"):
            candidate_from_mapping({"smiles": "CCO", "p_dili": 0.1,
                                    "p_ames": 0.1, "p_pgp": 0.1,
                                    "p_hia": 0.9})

    def test_unparseable_smiles(self):
        with pytest.raises(CandidateError, match="bad smiles"):
            record(smiles="C1CC")

    def test_non_numeric_probability(self):
        with pytest.raises(CandidateError, match="p_dili"):
            record(p_dili="high")

    def test_qed_out_of_range(self):
        with pytest.raises(CandidateError, match="qed"):
            record(qed=1.4)

    def test_unknown_keys_ignored(self):
        got = candidate_from_mapping({"smiles": "CCO", "p_dili": 0.1,
                                      "p_ames": 0.1, "p_herg": 0.1,
                                      "p_pgp": 0.1, "p_hia": 0.9,
                                      "compound_id": "xyz-1"})
        assert got.smiles == "CCO"

    def test_tsv_header_and_row(self):
        header = parse_candidate_header(
            "smiles\tp_dili\tp_ames\tp_herg\tp_pgp\tp_hia\tqed\n")
        got = candidate_from_tsv_row(
            header, "CCO\t0.1\t0.2\t0.3\t0.4\t0.9\t0.75\n")
        assert got.qed == 0.75
        assert got.admet.p_ames == 0.2

    def test_tsv_blank_optional_cell(self):
        header = parse_candidate_header(
            "smiles\tp_dili\tp_ames\tp_herg\tp_pgp\tp_hia\tqed")
        got = candidate_from_tsv_row(header, "CCO\t0\t0\t0\t0\t1\t")
        assert got.qed is None

    def test_tsv_header_missing_column(self):
        with pytest.raises(CandidateError, match="p_hia"):
            parse_candidate_header("smiles\tp_dili\tp_ames\tp_herg\tp_pgp")

    def test_tsv_row_width_mismatch(self):
        header = parse_candidate_header(
            "smiles\tp_dili\tp_ames\tp_herg\tp_pgp\tp_hia")
        with pytest.raises(CandidateError, match="fields"):
            candidate_from_tsv_row(header, "CCO\t0.1\t0.2")


class TestFilter:
    def test_passing_record_kept(self):
        kept = filter_candidates([record(qed=0.8)])
        assert len(kept) == 1

    def test_score_boundary_rejected(self):
        # 0.5 everywhere sums to exactly 2.5; strict comparison drops it.
        boundary = record(qed=0.9, p_dili=0.5, p_ames=0.5, p_herg=0.5,
                          p_pgp=0.5, p_hia=0.5)
        assert admet_score(boundary.admet) == 2.5
        assert not passes_filter(boundary)

    def test_qed_boundary_rejected(self):
        assert not passes_filter(record(qed=0.7))

    def test_just_above_boundaries_kept(self):
        nudged = record(qed=0.700001, p_dili=0.5, p_ames=0.5, p_herg=0.5,
                        p_pgp=0.5, p_hia=0.500001)
        assert admet_score(nudged.admet) > 2.5
        assert passes_filter(nudged)

    def test_missing_qed_rejected_by_default(self):
        assert not passes_filter(record())

    def test_missing_qed_kept_in_admet_only_mode(self):
        assert passes_filter(record(), admet_only=True)

    def test_present_qed_still_checked_in_admet_only_mode(self):
        assert not passes_filter(record(qed=0.2), admet_only=True)

    def test_threshold_overrides(self):
        middling = record(qed=0.5)
        assert passes_filter(middling, admet_threshold=4.0,
                             qed_threshold=0.4)
        assert not passes_filter(middling, admet_threshold=4.6,
                                 qed_threshold=0.4)

    def test_filter_preserves_order(self):
        records = [record(qed=0.8, smiles=s) for s in ("CCO", "CCCO", "CCN")]
        kept = filter_candidates(records)
        assert [r.smiles for r in kept] == ["CCO", "CCCO", "CCN"]


class TestRuleOfThree:
    def test_benzene_like_passes_without_logp(self):
        got = rule_of_three(descriptors(mw=78.11, hbd=0, hba=0))
        assert got.passed
        assert got.violations == ()
        assert got.logp_status == "not evaluated"

    def test_heavy_molecule_fails_on_weight(self):
        got = rule_of_three(descriptors(mw=350.0))
        assert not got.passed
        assert got.violations == ("molecular_weight",)

    def test_high_logp_fails(self):
        got = rule_of_three(descriptors(), logp=3.5)
        assert not got.passed
        assert got.violations == ("clogp",)
        assert got.logp_status == "violated"

    def test_limits_are_inclusive(self):
        got = rule_of_three(descriptors(mw=300.0, hbd=3, hba=3), logp=3.0)
        assert got.passed
        assert got.logp_status == "ok"

    def test_count_limits_exceeded(self):
        got = rule_of_three(descriptors(hbd=4, hba=5))
        assert got.violations == ("hbd", "hba")

    def test_all_violations_reported_together(self):
        got = rule_of_three(descriptors(mw=400.0, hbd=4, hba=4), logp=4.0)
        assert got.violations == ("molecular_weight", "hbd", "hba", "clogp")
