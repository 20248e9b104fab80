"""Synthetic corpus generator with a ground-truth manifest.

Works are grouped into per-domain keyword communities so the co-occurrence
graphs have real cluster structure, with occasional cross-community keywords
as bridges. Citation counts are heavy-tailed. Everything derives from one
seed, and the manifest records the counts the generator intended, so ingest
results can be checked against it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .agents import PanelSpec, VoterProfile
from .corpus import DOMAINS
from .util import dump_json, rng_for

_DOMAIN_CODES = {
    "ArtificialIntelligence": "ai",
    "Physics": "phy",
    "Chemistry": "chem",
    "Biology": "bio",
    "Economics": "econ",
}


@dataclass(frozen=True)
class FixtureSpec:
    seed: int = 0
    works_per_domain: int = 200
    groups_per_domain: int = 5
    keywords_per_group: int = 8
    early_years: tuple[int, int] = (2015, 2023)
    prev_year: int = 2024
    curr_year: int = 2025
    early_share: float = 0.3  # remainder splits evenly over prev/curr years


def domain_topics(domain: str) -> list[str]:
    code = _DOMAIN_CODES[domain]
    return [f"{code} core research", f"{code} applied methods"]


def domain_keywords(domain: str, spec: FixtureSpec) -> list[list[str]]:
    code = _DOMAIN_CODES[domain]
    return [
        [
            f"{code} g{g + 1} kw{i + 1:02d}"
            for i in range(spec.keywords_per_group)
        ]
        for g in range(spec.groups_per_domain)
    ]


def generate_fixture(out_dir: Path | str, spec: FixtureSpec = FixtureSpec()) -> dict:
    """Write works.ndjson, domain_map.csv and manifest.json; return the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = rng_for(spec.seed, "fixture")

    with open(out_dir / "domain_map.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["topic_name", "domain"])
        for domain in DOMAINS:
            for topic in domain_topics(domain):
                writer.writerow([topic, domain])

    counts: dict[str, int] = {}
    keyword_counts: dict[str, int] = {}
    total = 0
    with open(out_dir / "works.ndjson", "w", encoding="utf-8") as f:
        for domain in DOMAINS:
            groups = domain_keywords(domain, spec)
            keyword_counts[domain] = sum(len(g) for g in groups)
            topics = domain_topics(domain)
            n_early = int(spec.works_per_domain * spec.early_share)
            n_late = spec.works_per_domain - n_early
            n_prev = n_late // 2
            years = (
                [
                    int(rng.integers(spec.early_years[0], spec.early_years[1] + 1))
                    for _ in range(n_early)
                ]
                + [spec.prev_year] * n_prev
                + [spec.curr_year] * (n_late - n_prev)
            )
            for i, year in enumerate(years):
                work_id = f"W-{_DOMAIN_CODES[domain]}-{i:04d}"
                group_idx = int(rng.integers(0, len(groups)))
                group = groups[group_idx]
                k = int(rng.integers(3, min(8, len(group)) + 1))
                picked = list(rng.choice(group, size=k, replace=False))
                if rng.random() < 0.35:  # cross-community bridge keyword
                    other = groups[int(rng.integers(0, len(groups)))]
                    picked.append(str(rng.choice(other)))
                cited = int(rng.pareto(1.5) * 8)
                concepts = [
                    {"display_name": kw, "score": round(float(rng.uniform(0.3, 1.0)), 3)}
                    for kw in picked
                ]
                record = {
                    "work_id": work_id,
                    "title": f"Study {i:04d} on {picked[0]}",
                    "publication_year": year,
                    "cited_by_count": cited,
                    "topics": [{"display_name": topics[i % len(topics)]}],
                    "concepts": concepts,
                }
                f.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
                key = f"{domain}/{year}"
                counts[key] = counts.get(key, 0) + 1
                total += 1

    manifest = {
        "seed": spec.seed,
        "total_works": total,
        "counts": dict(sorted(counts.items())),
        "keywords_per_domain": keyword_counts,
        "works_file": "works.ndjson",
        "domain_map_file": "domain_map.csv",
    }
    dump_json(manifest, out_dir / "manifest.json")
    return manifest


def synthetic_human_panel(spec: PanelSpec) -> list[VoterProfile]:
    """Placeholder human panelists for offline runs and tests."""
    return [
        VoterProfile(
            voter_id=f"human-{spec.level}-{i + 1:03d}",
            kind="human",
            level=spec.level,
            role=f"{spec.level} panelist",
            specialization=f"human focus area {i + 1:03d}",
            background="independent reviewer",
        )
        for i in range(spec.human_count)
    ]


def write_roster(path: Path | str, panels: list[PanelSpec]) -> None:
    """Token roster for the ballot service: one entry per synthetic human."""
    voters = [
        {
            "token": "admin-token",
            "voter_id": "admin",
            "kind": "human",
            "level": "professor",
            "role": "administrator",
            "admin": True,
        }
    ]
    for spec in panels:
        for profile in synthetic_human_panel(spec):
            voters.append(
                {
                    "token": f"tok-{profile.voter_id}",
                    "voter_id": profile.voter_id,
                    "kind": profile.kind,
                    "level": profile.level,
                    "role": profile.role,
                    "specialization": profile.specialization,
                    "background": profile.background,
                    "admin": False,
                }
            )
    dump_json({"voters": voters}, Path(path))
