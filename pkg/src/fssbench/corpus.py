"""Data model and ingestion for publication corpora, staff rosters, the
university registry, and the subject-category scheme.

Input formats (documented in the README):

* ``publications.jsonl`` - one JSON object per line, fields ``pub_id``,
  ``year``, ``doc_type``, ``source_index``, ``subject_categories``,
  ``journal``, ``citation_count``, ``census_date``, ``mentions``.
* ``roster.csv`` - ``person_id, full_name, university_id, field_code,
  sc_hint, active_years, linked_pub_ids`` (years and pub ids joined
  with ";", year ranges like "2015-2019" allowed).
* ``registry.csv`` - ``university_id, official_name, email_domains,
  organization_variants`` (";"-joined lists).
* ``scheme.csv`` - ``sc_id, name, area_id, excluded_area,
  is_multidisciplinary``.

Unknown columns and JSON fields are ignored with a warning. Loading is a
pure function of the file bytes: the same input yields an identical
in-memory corpus, and downstream code treats it as read-only.
"""

from __future__ import annotations

import csv
import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

log = logging.getLogger(__name__)

DOC_TYPES = ("article", "review", "letter", "proceedings", "other")
SOURCE_INDEXES = ("core", "esci", "other")

#: Document types counted by default: articles, reviews, letters, proceedings.
DEFAULT_DOC_FILTER = frozenset({"article", "review", "letter", "proceedings"})

#: Default span, in years up to the window end, of the production used for
#: supervised subject-category assignment (19 years: e.g. 2001-2019 for a
#: window ending in 2019).
DEFAULT_SC_LOOKBACK = 19

_ORCID_RE = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[0-9X]$")


class CorpusError(ValueError):
    """Raised for malformed or inconsistent input files."""


# ---------------------------------------------------------------------------
# normalization

def normalize_name(text: str) -> str:
    """Normal form used for person and organization names.

    Lowercase, fold Unicode diacritics, drop punctuation (hyphens between
    letters survive, so double-barrelled surnames stay joined; apostrophes
    vanish outright, so the D'Amico/Damico spellings coincide), collapse
    whitespace. Idempotent.
    """
    text = unicodedata.normalize("NFKD", text)
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    text = text.lower().replace("'", "").replace("’", "")
    out = []
    for i, ch in enumerate(text):
        if ch.isalnum():
            out.append(ch)
        elif ch == "-" and 0 < i < len(text) - 1 and text[i - 1].isalnum() and text[i + 1].isalnum():
            out.append(ch)
        else:
            out.append(" ")
    return " ".join("".join(out).split())


normalize_org = normalize_name


def split_full_name(raw: str) -> tuple[str, str]:
    """Split a raw byline name into (last, first) parts, both normalized.

    "surname, given names" when a comma is present, otherwise the final
    whitespace token is taken as the surname.
    """
    if "," in raw:
        last, _, first = raw.partition(",")
    else:
        parts = raw.rsplit(None, 1)
        if len(parts) == 2:
            first, last = parts
        else:
            first, last = "", raw
    return normalize_name(last), normalize_name(first)


def first_initial(first_name: str) -> str:
    return first_name[0] if first_name else ""


def normalize_email(text: str | None) -> str | None:
    if text is None:
        return None
    text = text.strip().lower()
    return text or None


def email_host(email: str) -> str | None:
    """The part after '@', or None when the address has no '@'."""
    if "@" not in email:
        return None
    return email.rsplit("@", 1)[1]


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class YearWindow:
    """Inclusive range of calendar years."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise CorpusError(f"empty year window {self.start}:{self.end}")

    def __contains__(self, year: int) -> bool:
        return self.start <= year <= self.end

    def __len__(self) -> int:
        return self.end - self.start + 1

    def years(self) -> range:
        return range(self.start, self.end + 1)

    @classmethod
    def parse(cls, text: str) -> "YearWindow":
        m = re.match(r"^(\d{4})[:\-](\d{4})$", text.strip())
        if not m:
            raise CorpusError(f"cannot parse year window {text!r} (expected START:END)")
        return cls(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class AuthorMention:
    """One name on one byline, with its affiliation and identifier evidence."""

    raw_full_name: str
    last_name: str
    first_name: str
    email: str | None = None
    orcid: str | None = None
    researcher_id: str | None = None
    affiliation_raw: str = ""
    organization: str | None = None
    city: str | None = None
    country: str | None = None


@dataclass(frozen=True)
class PublicationRecord:
    """One indexed publication; byline order is the mention order."""

    pub_id: str
    year: int
    doc_type: str
    source_index: str
    subject_categories: tuple[str, ...]
    journal: str
    mentions: tuple[AuthorMention, ...]
    citation_count: int
    census_date: date

    @property
    def byline_size(self) -> int:
        return len(self.mentions)


@dataclass(frozen=True)
class RosterEntry:
    """Ground-truth staff member for the supervised path."""

    person_id: str
    full_name: str
    university_id: str
    field_code: str
    sc_hint: str | None
    active_years: frozenset[int]
    linked_pub_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class University:
    university_id: str
    official_name: str
    email_domains: tuple[str, ...]
    organization_variants: tuple[str, ...]


class UniversityRegistry:
    """Universities with their normalized name variants and email domains.

    Each variant and each domain maps to exactly one university.
    """

    def __init__(self, universities: list[University]):
        self.universities = {u.university_id: u for u in universities}
        self._by_variant: dict[str, str] = {}
        self._by_domain: dict[str, str] = {}
        for u in universities:
            for v in u.organization_variants:
                other = self._by_variant.get(v)
                if other is not None and other != u.university_id:
                    raise CorpusError(
                        f"organization variant {v!r} claimed by both "
                        f"{other!r} and {u.university_id!r}")
                self._by_variant[v] = u.university_id
            for d in u.email_domains:
                other = self._by_domain.get(d)
                if other is not None and other != u.university_id:
                    raise CorpusError(
                        f"email domain {d!r} claimed by both "
                        f"{other!r} and {u.university_id!r}")
                self._by_domain[d] = u.university_id

    def __len__(self) -> int:
        return len(self.universities)

    def __contains__(self, university_id: str) -> bool:
        return university_id in self.universities

    def match_organization(self, organization: str | None) -> str | None:
        if not organization:
            return None
        return self._by_variant.get(normalize_org(organization))

    def match_email(self, email: str | None) -> str | None:
        """University whose domain the address ends in ('@dom' or '.dom')."""
        if not email:
            return None
        host = email_host(email.lower())
        if host is None:
            return None
        for domain, univ in self._by_domain.items():
            if host == domain or host.endswith("." + domain):
                return univ
        return None


@dataclass(frozen=True)
class SubjectCategory:
    sc_id: str
    name: str
    area_id: str
    excluded_area: bool = False
    is_multidisciplinary: bool = False


class SCScheme:
    """Subject categories, each assigned to exactly one area."""

    def __init__(self, categories: list[SubjectCategory]):
        self.categories = {c.sc_id: c for c in categories}
        if len(self.categories) != len(categories):
            seen: set[str] = set()
            for c in categories:
                if c.sc_id in seen:
                    raise CorpusError(f"duplicate sc_id {c.sc_id!r} in scheme")
                seen.add(c.sc_id)

    def __contains__(self, sc_id: str) -> bool:
        return sc_id in self.categories

    def area_of(self, sc_id: str) -> str:
        return self.categories[sc_id].area_id

    def is_dropped(self, sc_id: str) -> bool:
        """True when researchers of this SC are outside the analysis scope."""
        cat = self.categories.get(sc_id)
        if cat is None:
            return False
        return cat.excluded_area or cat.is_multidisciplinary


class Corpus:
    """Immutable post-ingestion view of the loaded publications."""

    def __init__(self, records: list[PublicationRecord], window: YearWindow):
        self.records: tuple[PublicationRecord, ...] = tuple(
            sorted(records, key=lambda r: r.pub_id))
        self.window = window
        self.by_id: dict[str, PublicationRecord] = {r.pub_id: r for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __contains__(self, pub_id: str) -> bool:
        return pub_id in self.by_id

    def mention_count(self) -> int:
        return sum(len(r.mentions) for r in self.records)

    def to_jsonl(self) -> str:
        """Deterministic serialized form (used for purity checks and the
        ``ingest`` stage output)."""
        lines = [json.dumps(_record_to_dict(r), sort_keys=True, ensure_ascii=False)
                 for r in self.records]
        return "\n".join(lines) + "\n" if lines else ""

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


def _record_to_dict(r: PublicationRecord) -> dict:
    return {
        "pub_id": r.pub_id,
        "year": r.year,
        "doc_type": r.doc_type,
        "source_index": r.source_index,
        "subject_categories": list(r.subject_categories),
        "journal": r.journal,
        "citation_count": r.citation_count,
        "census_date": r.census_date.isoformat(),
        "mentions": [
            {
                "full_name": m.raw_full_name,
                "email": m.email,
                "orcid": m.orcid,
                "researcher_id": m.researcher_id,
                "affiliation": m.affiliation_raw,
                "organization": m.organization,
                "city": m.city,
                "country": m.country,
            }
            for m in r.mentions
        ],
    }


# ---------------------------------------------------------------------------
# loaders

_PUB_FIELDS = {"pub_id", "year", "doc_type", "source_index", "subject_categories",
               "journal", "citation_count", "census_date", "mentions"}
_MENTION_FIELDS = {"full_name", "email", "orcid", "researcher_id", "affiliation",
                   "organization", "city", "country"}


def _warn_unknown(kind: str, names, warned: set[str]) -> None:
    for name in names:
        if name not in warned:
            warned.add(name)
            log.warning("ignoring unknown %s field %r", kind, name)


def _parse_mention(obj: dict, where: str, warned: set[str]) -> AuthorMention:
    _warn_unknown("mention", set(obj) - _MENTION_FIELDS, warned)
    raw = obj.get("full_name")
    if not raw or not isinstance(raw, str):
        raise CorpusError(f"{where}: mention missing full_name")
    last, first = split_full_name(raw)
    if not last:
        raise CorpusError(f"{where}: empty surname after normalization in {raw!r}")
    orcid = obj.get("orcid") or None
    if orcid is not None and not _ORCID_RE.match(str(orcid)):
        raise CorpusError(f"{where}: invalid orcid {orcid!r}")
    rid = obj.get("researcher_id") or None
    org = obj.get("organization")
    return AuthorMention(
        raw_full_name=raw,
        last_name=last,
        first_name=first,
        email=normalize_email(obj.get("email")),
        orcid=orcid,
        researcher_id=str(rid) if rid is not None else None,
        affiliation_raw=obj.get("affiliation") or "",
        organization=normalize_org(org) if org else None,
        city=normalize_name(obj["city"]) if obj.get("city") else None,
        country=normalize_name(obj["country"]) if obj.get("country") else None,
    )


def _parse_record(obj: dict, where: str, warned: set[str]) -> PublicationRecord:
    _warn_unknown("publication", set(obj) - _PUB_FIELDS, warned)

    def need(fieldname, kind):
        value = obj.get(fieldname)
        if value is None:
            raise CorpusError(f"{where}: missing field {fieldname!r}")
        try:
            return kind(value)
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"{where}: invalid {fieldname!r}: {value!r}") from exc

    pub_id = str(need("pub_id", str))
    year = need("year", int)
    doc_type = need("doc_type", str)
    if doc_type not in DOC_TYPES:
        raise CorpusError(f"{where}: invalid doc_type {doc_type!r}")
    source_index = obj.get("source_index", "other")
    if source_index not in SOURCE_INDEXES:
        raise CorpusError(f"{where}: invalid source_index {source_index!r}")
    scs = obj.get("subject_categories")
    if not isinstance(scs, list) or not scs:
        raise CorpusError(f"{where}: subject_categories must be a non-empty list")
    citations = need("citation_count", int)
    if citations < 0:
        raise CorpusError(f"{where}: citation_count must be >= 0, got {citations}")
    census_raw = need("census_date", str)
    try:
        census = date.fromisoformat(census_raw)
    except ValueError as exc:
        raise CorpusError(f"{where}: invalid census_date {census_raw!r}") from exc
    if year > census.year:
        raise CorpusError(f"{where}: year {year} is after census_date {census_raw}")
    mention_objs = obj.get("mentions")
    if not isinstance(mention_objs, list) or not mention_objs:
        raise CorpusError(f"{where}: mentions must be a non-empty list")
    mentions = tuple(_parse_mention(m, where, warned) for m in mention_objs)
    return PublicationRecord(
        pub_id=pub_id,
        year=year,
        doc_type=doc_type,
        source_index=source_index,
        subject_categories=tuple(str(s) for s in scs),
        journal=normalize_name(str(obj.get("journal", ""))),
        mentions=mentions,
        citation_count=citations,
        census_date=census,
    )


def lookback_window(window: YearWindow, sc_lookback: int = DEFAULT_SC_LOOKBACK) -> YearWindow:
    """Years of production considered for supervised SC assignment."""
    return YearWindow(window.end - sc_lookback + 1, window.end)


def load_publications(path: str | Path,
                      window: YearWindow,
                      doc_filter: frozenset[str] = DEFAULT_DOC_FILTER,
                      sc_lookback: int = DEFAULT_SC_LOOKBACK) -> Corpus:
    """Load and filter publications.jsonl.

    Keeps records whose doc_type is in ``doc_filter``, whose source index is
    the core collection, and whose year falls in the observation window or
    the SC-assignment lookback range. Records come back sorted by pub_id.
    """
    path = Path(path)
    accepted_years = set(window.years()) | set(lookback_window(window, sc_lookback).years())
    warned: set[str] = set()
    records: list[PublicationRecord] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name} line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON: {exc}") from exc
            rec = _parse_record(obj, where, warned)
            if rec.pub_id in seen:
                raise CorpusError(
                    f"{where}: duplicate pub_id {rec.pub_id!r} "
                    f"(first seen on line {seen[rec.pub_id]})")
            seen[rec.pub_id] = lineno
            if rec.doc_type not in doc_filter:
                continue
            if rec.source_index != "core":
                continue
            if rec.year not in accepted_years:
                continue
            records.append(rec)
    return Corpus(records, window)


def _parse_years(text: str, where: str) -> frozenset[int]:
    years: set[int] = set()
    for token in filter(None, (t.strip() for t in text.split(";"))):
        m = re.match(r"^(\d{4})-(\d{4})$", token)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if lo > hi:
                raise CorpusError(f"{where}: bad year range {token!r}")
            years.update(range(lo, hi + 1))
        elif re.match(r"^\d{4}$", token):
            years.add(int(token))
        else:
            raise CorpusError(f"{where}: bad year token {token!r}")
    return frozenset(years)


_ROSTER_FIELDS = {"person_id", "full_name", "university_id", "field_code",
                  "sc_hint", "active_years", "linked_pub_ids"}


def load_roster(path: str | Path, window: YearWindow) -> list[RosterEntry]:
    """Load roster.csv; active years must fall inside the window."""
    path = Path(path)
    warned: set[str] = set()
    entries: list[RosterEntry] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path.name}: empty file")
        _warn_unknown("roster", set(reader.fieldnames) - _ROSTER_FIELDS, warned)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name} line {lineno}"
            pid = (row.get("person_id") or "").strip()
            if not pid:
                raise CorpusError(f"{where}: missing person_id")
            if pid in seen:
                raise CorpusError(
                    f"{where}: duplicate person_id {pid!r} "
                    f"(first seen on line {seen[pid]})")
            seen[pid] = lineno
            years = _parse_years(row.get("active_years") or "", where)
            if not years:
                raise CorpusError(f"{where}: person {pid!r} has empty active_years")
            outside = sorted(y for y in years if y not in window)
            if outside:
                raise CorpusError(
                    f"{where}: person {pid!r} active_years {outside} outside "
                    f"window {window.start}:{window.end}")
            links = tuple(filter(None, (t.strip() for t in (row.get("linked_pub_ids") or "").split(";"))))
            entries.append(RosterEntry(
                person_id=pid,
                full_name=(row.get("full_name") or "").strip(),
                university_id=(row.get("university_id") or "").strip(),
                field_code=(row.get("field_code") or "").strip(),
                sc_hint=(row.get("sc_hint") or "").strip() or None,
                active_years=years,
                linked_pub_ids=links,
            ))
    return entries


_REGISTRY_FIELDS = {"university_id", "official_name", "email_domains",
                    "organization_variants"}


def load_registry(path: str | Path) -> UniversityRegistry:
    """Load registry.csv, normalizing variants and enforcing disjointness."""
    path = Path(path)
    warned: set[str] = set()
    universities: list[University] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path.name}: empty file")
        _warn_unknown("registry", set(reader.fieldnames) - _REGISTRY_FIELDS, warned)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name} line {lineno}"
            uid = (row.get("university_id") or "").strip()
            if not uid:
                raise CorpusError(f"{where}: missing university_id")
            if uid in seen:
                raise CorpusError(f"{where}: duplicate university_id {uid!r}")
            seen.add(uid)
            domains = tuple(dict.fromkeys(
                d.strip().lower() for d in (row.get("email_domains") or "").split(";") if d.strip()))
            variants = tuple(dict.fromkeys(
                normalize_org(v) for v in (row.get("organization_variants") or "").split(";") if v.strip()))
            universities.append(University(
                university_id=uid,
                official_name=(row.get("official_name") or uid).strip(),
                email_domains=domains,
                organization_variants=variants,
            ))
    return UniversityRegistry(universities)


_SCHEME_FIELDS = {"sc_id", "name", "area_id", "excluded_area", "is_multidisciplinary"}
_TRUTHY = {"1", "true", "yes", "y"}
_FALSY = {"0", "false", "no", "n", ""}


def _parse_bool(text: str | None, where: str, fieldname: str) -> bool:
    text = (text or "").strip().lower()
    if text in _TRUTHY:
        return True
    if text in _FALSY:
        return False
    raise CorpusError(f"{where}: invalid {fieldname} value {text!r}")


def load_scheme(path: str | Path) -> SCScheme:
    """Load scheme.csv; every SC belongs to exactly one area."""
    path = Path(path)
    warned: set[str] = set()
    categories: list[SubjectCategory] = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path.name}: empty file")
        _warn_unknown("scheme", set(reader.fieldnames) - _SCHEME_FIELDS, warned)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name} line {lineno}"
            sc_id = (row.get("sc_id") or "").strip()
            if not sc_id:
                raise CorpusError(f"{where}: missing sc_id")
            area = (row.get("area_id") or "").strip()
            if not area:
                raise CorpusError(f"{where}: SC {sc_id!r} missing area_id")
            categories.append(SubjectCategory(
                sc_id=sc_id,
                name=(row.get("name") or sc_id).strip(),
                area_id=area,
                excluded_area=_parse_bool(row.get("excluded_area"), where, "excluded_area"),
                is_multidisciplinary=_parse_bool(row.get("is_multidisciplinary"), where,
                                                 "is_multidisciplinary"),
            ))
    return SCScheme(categories)


def load_incidence(path: str | Path) -> dict[str, tuple[tuple[str, float], ...]]:
    """Load the field-code to SC incidence table (columns field_code, sc_id,
    incidence), used as the supervised SC-assignment fallback."""
    path = Path(path)
    table: dict[str, list[tuple[str, float]]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name} line {lineno}"
            code = (row.get("field_code") or "").strip()
            sc = (row.get("sc_id") or "").strip()
            if not code or not sc:
                raise CorpusError(f"{where}: missing field_code or sc_id")
            try:
                weight = float(row.get("incidence") or "")
            except ValueError as exc:
                raise CorpusError(f"{where}: invalid incidence") from exc
            table.setdefault(code, []).append((sc, weight))
    return {code: tuple(sorted(rows, key=lambda r: (-r[1], r[0])))
            for code, rows in table.items()}
