"""Derive each university's research staff from author clusters.

A cluster becomes a staff candidate when its prevailing organization
matches a registered name variant or its email lands in a registered
domain. Candidates then pass coherence checks (organization that is no
known university, email outside every university, email and organization
pointing at different universities), size/age/recency filters, and a
deterministic resolution of clusters sharing an orcid or email. A
candidate is accepted exactly when its flag set is empty; every rejected
candidate carries the flags naming the rules that fired.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import UniversityRegistry
from .disambig import AuthorCluster

log = logging.getLogger(__name__)

FLAG_INCOHERENT_ORG = "incoherent_org"
FLAG_NON_UNIVERSITY_EMAIL = "non_university_email"
FLAG_EMAIL_ORG_CONFLICT = "email_org_conflict"
FLAG_ORCID_CONFLICT = "orcid_conflict"
FLAG_EMAIL_CONFLICT = "email_conflict"
FLAG_BELOW_AGE = "below_age"
FLAG_STALE = "stale"
FLAG_SMALL_UNIVERSITY = "excluded_small_university"


@dataclass
class StaffCandidate:
    """A cluster tentatively attached to a university. Accepted iff
    ``flags`` is empty."""

    cluster: AuthorCluster
    university_id: str
    evidence: str                      # organization | email | both
    flags: set[str] = field(default_factory=set)

    @property
    def cluster_id(self) -> str:
        return self.cluster.cluster_id

    @property
    def accepted(self) -> bool:
        return not self.flags


@dataclass
class StaffUnit:
    """One accepted staff member; usually one cluster, more after merges."""

    unit_id: str                       # smallest member cluster_id
    university_id: str
    evidence: str
    cluster_ids: tuple[str, ...]
    pub_ids: frozenset[str]
    orcid: str | None
    emails: tuple[str, ...]

    @property
    def n_pubs(self) -> int:
        return len(self.pub_ids)


@dataclass
class DerivedStaff:
    """Accepted staff per university plus the queue of flagged candidates
    (the machine stand-in for manual adjudication)."""

    members: dict[str, list[StaffUnit]]
    review_queue: list[StaffCandidate]

    def university_ids(self) -> list[str]:
        return sorted(self.members)

    def all_units(self) -> list[StaffUnit]:
        return [u for uid in sorted(self.members) for u in self.members[uid]]


def match_university(cluster: AuthorCluster,
                     registry: UniversityRegistry) -> tuple[str, str] | None:
    """(university_id, evidence) for a cluster, or None when neither the
    organization nor the email matches the registry.

    When organization and email point at different universities the email
    wins (the domain convention is the higher-trust signal); the
    disagreement itself is flagged later by coherence_check.
    """
    by_org = registry.match_organization(cluster.organization)
    by_email = registry.match_email(cluster.email)
    if by_org is None and by_email is None:
        return None
    if by_org is not None and by_email is not None:
        if by_org == by_email:
            return by_org, "both"
        return by_email, "email"
    if by_email is not None:
        return by_email, "email"
    return by_org, "organization"


def coherence_check(cluster: AuthorCluster, registry: UniversityRegistry) -> set[str]:
    """Flags for internally inconsistent evidence.

    * incoherent_org: the cluster names an organization, but it is no
      registered university variant.
    * non_university_email: the cluster has an email outside every
      registered domain.
    * email_org_conflict: organization and email match different
      universities.
    """
    flags: set[str] = set()
    by_org = registry.match_organization(cluster.organization)
    by_email = registry.match_email(cluster.email)
    if cluster.organization and by_org is None:
        flags.add(FLAG_INCOHERENT_ORG)
    if cluster.email and by_email is None:
        flags.add(FLAG_NON_UNIVERSITY_EMAIL)
    if by_org is not None and by_email is not None and by_org != by_email:
        flags.add(FLAG_EMAIL_ORG_CONFLICT)
    return flags


def build_candidates(clusters: list[AuthorCluster],
                     registry: UniversityRegistry) -> list[StaffCandidate]:
    """Match clusters to universities and attach coherence flags."""
    out = []
    for cluster in sorted(clusters, key=lambda c: c.cluster_id):
        matched = match_university(cluster, registry)
        if matched is None:
            continue
        university_id, evidence = matched
        out.append(StaffCandidate(
            cluster=cluster,
            university_id=university_id,
            evidence=evidence,
            flags=coherence_check(cluster, registry),
        ))
    return out


def apply_filters(candidates: list[StaffCandidate],
                  min_clusters: int = 30,
                  min_age: int = 4,
                  recency_year: int = 2020) -> list[StaffCandidate]:
    """Flag candidates failing the robustness filters (in place, returned
    for chaining).

    The small-university cut counts every matched candidate of the
    university, before any other filter: the cut happens right after the
    first extraction, ahead of the quality-control steps.
    """
    per_university: dict[str, int] = {}
    for cand in candidates:
        per_university[cand.university_id] = per_university.get(cand.university_id, 0) + 1
    for cand in candidates:
        if cand.cluster.academic_age < min_age:
            cand.flags.add(FLAG_BELOW_AGE)
        if cand.cluster.last_year < recency_year:
            cand.flags.add(FLAG_STALE)
        if per_university[cand.university_id] < min_clusters:
            cand.flags.add(FLAG_SMALL_UNIVERSITY)
    return candidates


def _unit_from_candidate(cand: StaffCandidate) -> StaffUnit:
    return StaffUnit(
        unit_id=cand.cluster_id,
        university_id=cand.university_id,
        evidence=cand.evidence,
        cluster_ids=(cand.cluster_id,),
        pub_ids=cand.cluster.pub_ids,
        orcid=cand.cluster.orcid,
        emails=(cand.cluster.email,) if cand.cluster.email else (),
    )


def _merge_units(a: StaffUnit, b: StaffUnit) -> StaffUnit:
    first, second = sorted((a, b), key=lambda u: u.unit_id)
    evidence = a.evidence if a.evidence == b.evidence else "both"
    return StaffUnit(
        unit_id=first.unit_id,
        university_id=first.university_id,
        evidence=evidence,
        cluster_ids=tuple(sorted(set(a.cluster_ids) | set(b.cluster_ids))),
        pub_ids=a.pub_ids | b.pub_ids,
        orcid=a.orcid or b.orcid,
        emails=tuple(sorted(set(a.emails) | set(b.emails))),
    )


def resolve_conflicts(candidates: list[StaffCandidate]) -> DerivedStaff:
    """Resolve accepted clusters sharing an orcid or email.

    Same university: merged into one staff unit (union of publications);
    two clusters claiming one identifier but carrying distinct orcids are
    not merged, the smaller one is queued instead. Different universities:
    the unit with more publications survives, the rest are queued with
    orcid_conflict/email_conflict; ties keep the smaller cluster_id.
    Flagged candidates go to the review queue untouched.
    """
    review = [c for c in candidates if not c.accepted]
    units: dict[str, StaffUnit] = {
        c.cluster_id: _unit_from_candidate(c) for c in candidates if c.accepted}
    by_candidate = {c.cluster_id: c for c in candidates}

    def drop(unit: StaffUnit, flag: str) -> None:
        units.pop(unit.unit_id, None)
        for cid in unit.cluster_ids:
            cand = by_candidate[cid]
            cand.flags.add(flag)
            review.append(cand)

    def conflicted(key_of) -> dict[str, list[StaffUnit]]:
        groups: dict[str, dict[str, StaffUnit]] = {}
        for unit in units.values():
            for key in key_of(unit):
                groups.setdefault(key, {})[unit.unit_id] = unit
        return {k: sorted(g.values(), key=lambda u: (-u.n_pubs, u.unit_id))
                for k, g in groups.items() if len(g) > 1}

    def resolve_identifier(key_of, flag: str) -> None:
        # one group per pass: merging can chain identifiers, so regroup
        # after every mutation; each pass strictly shrinks the unit set
        while groups := conflicted(key_of):
            survivor, *rest = groups[min(groups)]
            for other in rest:
                if other.university_id != survivor.university_id:
                    drop(other, flag)
                elif len({survivor.orcid, other.orcid} - {None}) > 1:
                    # one address shared by two distinct identities: never
                    # merge across orcids, queue the smaller unit instead
                    drop(other, flag)
                else:
                    units.pop(survivor.unit_id, None)
                    units.pop(other.unit_id, None)
                    survivor = _merge_units(survivor, other)
                    units[survivor.unit_id] = survivor

    resolve_identifier(lambda u: [u.orcid] if u.orcid else [], FLAG_ORCID_CONFLICT)
    resolve_identifier(lambda u: list(u.emails), FLAG_EMAIL_CONFLICT)

    members: dict[str, list[StaffUnit]] = {}
    for unit in sorted(units.values(), key=lambda u: u.unit_id):
        members.setdefault(unit.university_id, []).append(unit)
    review.sort(key=lambda c: c.cluster_id)
    return DerivedStaff(members=members, review_queue=review)


def derive_staff(clusters: list[AuthorCluster],
                 registry: UniversityRegistry,
                 min_clusters: int = 30,
                 min_age: int = 4,
                 recency_year: int = 2020) -> DerivedStaff:
    """Full unsupervised staff derivation: match, check, filter, resolve."""
    candidates = build_candidates(clusters, registry)
    apply_filters(candidates, min_clusters=min_clusters, min_age=min_age,
                  recency_year=recency_year)
    return resolve_conflicts(candidates)


def write_staff_csv(staff: DerivedStaff, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["university_id", "cluster_id", "evidence", "n_pubs",
                         "member_cluster_ids"])
        for unit in staff.all_units():
            writer.writerow([unit.university_id, unit.unit_id, unit.evidence,
                             unit.n_pubs, ";".join(unit.cluster_ids)])


def write_review_queue_csv(staff: DerivedStaff, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_id", "flags", "details"])
        for cand in staff.review_queue:
            details = (f"university={cand.university_id} evidence={cand.evidence} "
                       f"n_pubs={cand.cluster.n_pubs} age={cand.cluster.academic_age} "
                       f"last_year={cand.cluster.last_year}")
            writer.writerow([cand.cluster_id, ";".join(sorted(cand.flags)), details])
