"""ADMET scoring, candidate records and drug-likeness filters.

Candidate files carry model-predicted probabilities plus optional
QED/SA/logP columns; none of those quantities are computed here, they
are consumed as given.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping

from .descriptors import Descriptors, compute_descriptors
from .smiles import parse_smiles

DEFAULT_ADMET_THRESHOLD = 2.5
DEFAULT_QED_THRESHOLD = 0.7

REQUIRED_COLUMNS = ("smiles", "p_dili", "p_ames", "p_herg", "p_pgp", "p_hia")
OPTIONAL_COLUMNS = ("p_bbb", "qed", "sa", "logp")


class CandidateError(ValueError):
    """Raised when a candidate row cannot be turned into a record."""


@dataclass(frozen=True)
class AdmetProbabilities:
    """Per-endpoint probabilities; p_bbb is informational only."""

    p_dili: float
    p_ames: float
    p_herg: float
    p_pgp: float
    p_hia: float
    p_bbb: float | None = None

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{f.name} must lie in [0, 1], got {value}")


def admet_score(p: AdmetProbabilities) -> float:
    """Sum of favourable-outcome probabilities, ranging over [0, 5].

    Four endpoints count the complement (low toxicity and low efflux are
    favourable); absorption counts directly. p_bbb does not contribute.
    """
    return ((1.0 - p.p_dili) + (1.0 - p.p_ames) + (1.0 - p.p_herg)
            + (1.0 - p.p_pgp) + p.p_hia)


@dataclass(frozen=True)
class CandidateRecord:
    smiles: str
    admet: AdmetProbabilities
    descriptors: Descriptors
    qed: float | None = None
    sa: float | None = None
    logp: float | None = None


def _number(data: Mapping[str, object], key: str) -> float:
    try:
        return float(data[key])  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise CandidateError(f"column {key!r} is not a number: {data[key]!r}")


def _optional_number(data: Mapping[str, object], key: str) -> float | None:
    value = data.get(key)
    if value is None or value == "":
        return None
    return _number(data, key)


def candidate_from_mapping(data: Mapping[str, object]) -> CandidateRecord:
    """Build a record from one parsed row; unknown keys are ignored."""
    missing = [c for c in REQUIRED_COLUMNS
               if data.get(c) is None or data.get(c) == ""]
    if missing:
        raise CandidateError(f"missing column(s): {', '.join(missing)}")
    smiles = str(data["smiles"])
    try:
        mol = parse_smiles(smiles)
    except ValueError as exc:
        raise CandidateError(f"bad smiles {smiles!r}: {exc}")
    try:
        admet = AdmetProbabilities(
            p_dili=_number(data, "p_dili"),
            p_ames=_number(data, "p_ames"),
            p_herg=_number(data, "p_herg"),
            p_pgp=_number(data, "p_pgp"),
            p_hia=_number(data, "p_hia"),
            p_bbb=_optional_number(data, "p_bbb"),
        )
    except ValueError as exc:
        raise CandidateError(str(exc))
    qed = _optional_number(data, "qed")
    if qed is not None and not 0.0 <= qed <= 1.0:
        raise CandidateError(f"qed must lie in [0, 1], got {qed}")
    return CandidateRecord(
        smiles=smiles,
        admet=admet,
        descriptors=compute_descriptors(mol),
        qed=qed,
        sa=_optional_number(data, "sa"),
        logp=_optional_number(data, "logp"),
    )


def parse_candidate_header(line: str) -> list[str]:
    """Validate a tab-separated header; extra columns ride along."""
    names = [c.strip() for c in line.rstrip("\n").split("\t")]
    missing = [c for c in REQUIRED_COLUMNS if c not in names]
    if missing:
        raise CandidateError(f"header lacks column(s): {', '.join(missing)}")
    return names


def candidate_from_tsv_row(header: list[str], line: str) -> CandidateRecord:
    values = line.rstrip("\n").split("\t")
    if len(values) != len(header):
        raise CandidateError(
            f"expected {len(header)} fields, got {len(values)}")
    return candidate_from_mapping(dict(zip(header, values)))


def passes_filter(record: CandidateRecord,
                  admet_threshold: float = DEFAULT_ADMET_THRESHOLD,
                  qed_threshold: float = DEFAULT_QED_THRESHOLD,
                  *,
                  admet_only: bool = False) -> bool:
    """Strict thresholds; boundary values are rejected.

    A record without a qed value only survives in admet-only mode; when
    qed is present it is always checked.
    """
    if not admet_score(record.admet) > admet_threshold:
        return False
    if record.qed is None:
        return admet_only
    return record.qed > qed_threshold


def filter_candidates(records: list[CandidateRecord],
                      admet_threshold: float = DEFAULT_ADMET_THRESHOLD,
                      qed_threshold: float = DEFAULT_QED_THRESHOLD,
                      *,
                      admet_only: bool = False) -> list[CandidateRecord]:
    return [r for r in records
            if passes_filter(r, admet_threshold, qed_threshold,
                             admet_only=admet_only)]


MW_LIMIT = 300.0
HBD_LIMIT = 3
HBA_LIMIT = 3
LOGP_LIMIT = 3.0

LOGP_NOT_EVALUATED = "not evaluated"


@dataclass(frozen=True)
class RuleOfThree:
    passed: bool
    violations: tuple[str, ...]
    logp_status: str


def rule_of_three(d: Descriptors, logp: float | None = None) -> RuleOfThree:
    """Fragment-sized check: MW, donors, acceptors and optionally logp.

    All limits are inclusive; only values beyond a limit violate. When no
    logp is supplied that criterion is skipped and reported as such.
    """
    violations: list[str] = []
    if d.molecular_weight > MW_LIMIT:
        violations.append("molecular_weight")
    if d.hbd > HBD_LIMIT:
        violations.append("hbd")
    if d.hba > HBA_LIMIT:
        violations.append("hba")
    if logp is None:
        logp_status = LOGP_NOT_EVALUATED
    elif logp > LOGP_LIMIT:
        violations.append("clogp")
        logp_status = "violated"
    else:
        logp_status = "ok"
    return RuleOfThree(passed=not violations,
                       violations=tuple(violations),
                       logp_status=logp_status)
