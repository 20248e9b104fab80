"""Publication store: ingest, per-(domain, year) keyword frequencies, citation queries.

Input is newline-delimited JSON, one work per line, with fields ``work_id``,
``title``, ``publication_year``, ``cited_by_count``, ``topics[].display_name``
and ``concepts[].{display_name, score}``. A work's domain is resolved through
a topic-name lookup table loaded from CSV (columns ``topic_name, domain``);
works matching no entry are rejected.

Ingest is single-writer. Queries are safe for concurrent readers once ingest
has completed; saved snapshots are immutable.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ContractViolation, EmptySliceError
from .util import normalize_keyword

DOMAINS = (
    "ArtificialIntelligence",
    "Physics",
    "Chemistry",
    "Biology",
    "Economics",
)

RECORDS_FORMAT_TAG = "trendvote-corpus/1"
INDEX_MAGIC = b"TVIDX001"


@dataclass(frozen=True)
class Keyword:
    name: str
    score: float | None = None


@dataclass(frozen=True)
class WorkRecord:
    """One publication. ``keywords`` holds normalized, deduplicated names."""

    work_id: str
    title: str
    year: int
    domain: str
    keywords: tuple[Keyword, ...]
    cited_by_count: int

    def keyword_names(self) -> tuple[str, ...]:
        return tuple(k.name for k in self.keywords)


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    counts: dict[tuple[str, int], int] = field(default_factory=dict)
    rejects: list[tuple[str, str]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "counts": {f"{d}/{y}": n for (d, y), n in sorted(self.counts.items())},
            "rejects": [{"record": r, "reason": why} for r, why in self.rejects],
        }


def load_domain_map(path: Path | str) -> dict[str, str]:
    """Read the topic-name to domain lookup CSV. Topic names are normalized."""
    mapping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            domain = row["domain"].strip()
            if domain not in DOMAINS:
                raise ContractViolation(f"unknown domain in map: {domain!r}")
            mapping[normalize_keyword(row["topic_name"])] = domain
    return mapping


def _dedup_keywords(raw: Iterable[tuple[str, float | None]]) -> tuple[Keyword, ...]:
    # first occurrence wins; identity is the normalized name
    seen: dict[str, Keyword] = {}
    for name, score in raw:
        norm = normalize_keyword(name)
        if norm and norm not in seen:
            seen[norm] = Keyword(norm, score)
    return tuple(seen.values())


def parse_work(
    obj: dict,
    domain_map: dict[str, str],
    min_concept_score: float = 0.0,
) -> tuple[WorkRecord | None, str | None]:
    """Turn one raw record into a WorkRecord, or (None, reject_reason)."""
    work_id = obj.get("work_id") or obj.get("id")
    if not work_id:
        return None, "missing work_id"
    year = obj.get("publication_year", obj.get("year"))
    if not isinstance(year, int):
        return None, "missing year"

    domain = None
    for topic in obj.get("topics") or []:
        name = topic.get("display_name") if isinstance(topic, dict) else topic
        if name is not None:
            domain = domain_map.get(normalize_keyword(str(name)))
            if domain:
                break
    if domain is None:
        return None, "unresolvable domain"

    raw_keywords: list[tuple[str, float | None]] = []
    for concept in obj.get("concepts") or []:
        if isinstance(concept, dict):
            name, score = concept.get("display_name"), concept.get("score")
        else:
            name, score = concept, None
        if name is None:
            continue
        if score is not None and score < min_concept_score:
            continue
        raw_keywords.append((str(name), score))
    keywords = _dedup_keywords(raw_keywords)
    if not keywords:
        return None, "no keywords"

    cited = obj.get("cited_by_count", 0)
    if not isinstance(cited, int) or cited < 0:
        return None, "invalid cited_by_count"

    return (
        WorkRecord(
            work_id=str(work_id),
            title=str(obj.get("title", "")),
            year=year,
            domain=domain,
            keywords=keywords,
            cited_by_count=cited,
        ),
        None,
    )


class CorpusStore:
    """In-memory store keyed by work_id with per-(domain, year) freq indexes.

    Re-ingesting a work_id replaces the previous record and adjusts the
    affected indexes, so ingest is idempotent.
    """

    def __init__(self, domain_map: dict[str, str], min_concept_score: float = 0.0):
        self.domain_map = dict(domain_map)
        self.min_concept_score = min_concept_score
        self._works: dict[str, WorkRecord] = {}
        self._slices: dict[tuple[str, int], set[str]] = {}
        self._freq: dict[tuple[str, int], Counter] = {}

    def __len__(self) -> int:
        return len(self._works)

    def __contains__(self, work_id: str) -> bool:
        return work_id in self._works

    def get(self, work_id: str) -> WorkRecord:
        return self._works[work_id]

    def slices(self) -> list[tuple[str, int]]:
        return sorted(self._slices)

    def _remove(self, rec: WorkRecord) -> None:
        key = (rec.domain, rec.year)
        self._slices[key].discard(rec.work_id)
        freq = self._freq[key]
        for kw in rec.keyword_names():
            freq[kw] -= 1
            if freq[kw] <= 0:
                del freq[kw]
        if not self._slices[key]:
            del self._slices[key]
            del self._freq[key]

    def add(self, rec: WorkRecord) -> None:
        old = self._works.get(rec.work_id)
        if old is not None:
            self._remove(old)
        self._works[rec.work_id] = rec
        key = (rec.domain, rec.year)
        self._slices.setdefault(key, set()).add(rec.work_id)
        freq = self._freq.setdefault(key, Counter())
        for kw in rec.keyword_names():
            freq[kw] += 1

    def ingest_works(self, source: Iterable[str | dict] | Path | str) -> IngestReport:
        """Ingest a stream of records (dicts, JSON lines, or an NDJSON file).

        Records lacking work_id, year, a resolvable domain, or any keyword are
        rejected and counted; an unreadable source raises OSError.
        """
        report = IngestReport()
        for label, obj, parse_err in self._iter_source(source):
            if parse_err is not None:
                report.rejected += 1
                report.rejects.append((label, parse_err))
                continue
            rec, reason = parse_work(obj, self.domain_map, self.min_concept_score)
            if rec is None:
                report.rejected += 1
                report.rejects.append((label, reason or "malformed"))
                continue
            self.add(rec)
            report.accepted += 1
            key = (rec.domain, rec.year)
            report.counts[key] = report.counts.get(key, 0) + 1
        return report

    @staticmethod
    def _iter_source(
        source: Iterable[str | dict] | Path | str,
    ) -> Iterator[tuple[str, dict | None, str | None]]:
        if isinstance(source, (str, Path)):
            stream: Iterable[str | dict] = open(source, "r", encoding="utf-8")
        else:
            stream = source
        try:
            for i, item in enumerate(stream, start=1):
                if isinstance(item, dict):
                    yield f"record {i}", item, None
                    continue
                line = item.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    yield f"line {i}", None, "invalid JSON"
                    continue
                if not isinstance(obj, dict):
                    yield f"line {i}", None, "not an object"
                    continue
                yield f"line {i}", obj, None
        finally:
            if isinstance(stream, io.IOBase):
                stream.close()

    # -- queries ------------------------------------------------------------

    def works_in_slice(self, domain: str, year: int) -> list[WorkRecord]:
        key = (domain, year)
        if key not in self._slices:
            raise EmptySliceError(f"no works ingested for {domain}/{year}")
        return sorted(
            (self._works[w] for w in self._slices[key]), key=lambda r: r.work_id
        )

    def keyword_frequencies(self, domain: str, year: int) -> dict[str, int]:
        """Distinct-work counts per keyword in one (domain, year) slice."""
        key = (domain, year)
        if key not in self._freq:
            raise EmptySliceError(f"no works ingested for {domain}/{year}")
        return dict(self._freq[key])

    def top_cited_works(
        self,
        domain: str,
        keyword: str,
        year_from: int,
        year_to: int,
        limit: int,
    ) -> list[WorkRecord]:
        """Works containing ``keyword`` in [year_from, year_to], most cited first.

        Ties break by work_id ascending; the result is at most ``limit`` long.
        """
        if limit < 1:
            raise ContractViolation("limit must be >= 1")
        norm = normalize_keyword(keyword)
        hits = [
            rec
            for rec in self._works.values()
            if rec.domain == domain
            and year_from <= rec.year <= year_to
            and norm in rec.keyword_names()
        ]
        hits.sort(key=lambda r: (-r.cited_by_count, r.work_id))
        return hits[:limit]

    # -- persistence ----------------------------------------------------------

    def save(self, directory: Path | str) -> None:
        """Write the record file and binary index. Output is deterministic."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "records.ndjson", "w", encoding="utf-8") as f:
            f.write(json.dumps({"format": RECORDS_FORMAT_TAG}) + "\n")
            for work_id in sorted(self._works):
                rec = self._works[work_id]
                f.write(
                    json.dumps(
                        {
                            "work_id": rec.work_id,
                            "title": rec.title,
                            "year": rec.year,
                            "domain": rec.domain,
                            "keywords": [
                                {"name": k.name, "score": k.score}
                                for k in rec.keywords
                            ],
                            "cited_by_count": rec.cited_by_count,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        with open(directory / "index.bin", "wb") as f:
            f.write(INDEX_MAGIC)
            f.write(struct.pack("<I", len(self._freq)))
            for (domain, year) in sorted(self._freq):
                freq = self._freq[(domain, year)]
                dom = domain.encode("utf-8")
                f.write(struct.pack("<H", len(dom)))
                f.write(dom)
                f.write(struct.pack("<iII", year, len(self._slices[(domain, year)]), len(freq)))
                for kw in sorted(freq):
                    kb = kw.encode("utf-8")
                    f.write(struct.pack("<H", len(kb)))
                    f.write(kb)
                    f.write(struct.pack("<I", freq[kw]))

    @classmethod
    def load(
        cls,
        directory: Path | str,
        domain_map: dict[str, str] | None = None,
        min_concept_score: float = 0.0,
    ) -> "CorpusStore":
        directory = Path(directory)
        store = cls(domain_map or {}, min_concept_score)
        with open(directory / "records.ndjson", "r", encoding="utf-8") as f:
            header = json.loads(f.readline())
            if header.get("format") != RECORDS_FORMAT_TAG:
                raise ContractViolation(
                    f"unsupported record file format: {header.get('format')!r}"
                )
            for line in f:
                obj = json.loads(line)
                store.add(
                    WorkRecord(
                        work_id=obj["work_id"],
                        title=obj["title"],
                        year=obj["year"],
                        domain=obj["domain"],
                        keywords=tuple(
                            Keyword(k["name"], k.get("score"))
                            for k in obj["keywords"]
                        ),
                        cited_by_count=obj["cited_by_count"],
                    )
                )
        return store

    def verify_index(self) -> None:
        """Rescan all records and assert the freq index matches. Test support."""
        for (domain, year), freq in self._freq.items():
            recount: Counter = Counter()
            for work_id in self._slices[(domain, year)]:
                for kw in self._works[work_id].keyword_names():
                    recount[kw] += 1
            if recount != freq:
                raise AssertionError(f"index mismatch for {domain}/{year}")
