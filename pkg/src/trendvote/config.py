"""Pipeline configuration: one flat TOML file plus credential env overrides.

All randomness flows from the single rng_seed through named substreams, so a
fixed seed makes the whole mock-mode pipeline deterministic.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agents import AgentEndpoint, EndpointRoster, PanelSpec
from .ballot import VotingRule
from .corpus import DOMAINS
from .embedding import TrainConfig
from .errors import ContractViolation
from .hotness import HotnessParams
from .trends import SelectionThresholds
from .util import stable_hash


@dataclass
class PipelineConfig:
    works_file: Path
    domain_map_file: Path
    output_dir: Path
    corpus_store: Path
    mock_table_dir: Path | None = None
    roster_file: Path | None = None
    domains: tuple[str, ...] = DOMAINS
    year_range: tuple[int, int] = (2015, 2025)
    prev_year: int = 2024
    curr_year: int = 2025
    rng_seed: int = 0
    mock: bool = True
    train: TrainConfig = field(default_factory=TrainConfig)
    hotness: HotnessParams = field(default_factory=HotnessParams)
    selection: SelectionThresholds = field(default_factory=SelectionThresholds)
    candidates_per_model: int = 100
    votes_per_model: int = 100
    pool_size: int = 100
    works_limit: int = 20
    panel_screening: PanelSpec = field(
        default_factory=lambda: PanelSpec.defaults("screening")
    )
    panel_refinement: PanelSpec = field(
        default_factory=lambda: PanelSpec.defaults("refinement")
    )
    rule_screening: VotingRule = field(default_factory=VotingRule.screening)
    rule_refinement: VotingRule = field(default_factory=VotingRule.refinement)
    endpoints: EndpointRoster = field(default_factory=EndpointRoster)

    def validate(self) -> None:
        for path, label in (
            (self.works_file, "works file"),
            (self.domain_map_file, "domain map"),
        ):
            if not Path(path).exists():
                raise ContractViolation(f"{label} does not exist: {path}")
        if self.roster_file is not None and not Path(self.roster_file).exists():
            raise ContractViolation(f"roster file does not exist: {self.roster_file}")
        unknown = [d for d in self.domains if d not in DOMAINS]
        if unknown:
            raise ContractViolation(f"unknown domain {unknown[0]!r}")
        if not self.endpoints.proposal:
            raise ContractViolation("endpoint roster needs >= 1 proposal endpoint")
        if not self.endpoints.research:
            raise ContractViolation("endpoint roster needs >= 1 research endpoint")
        for role in ("consolidator", "chair", "voter"):
            if getattr(self.endpoints, role) is None:
                raise ContractViolation(f"endpoint roster needs a {role} endpoint")

    def config_hash(self) -> str:
        """Hash of everything that affects artifacts (paths excluded)."""
        payload = {
            "domains": list(self.domains),
            "year_range": list(self.year_range),
            "prev_year": self.prev_year,
            "curr_year": self.curr_year,
            "rng_seed": self.rng_seed,
            "mock": self.mock,
            "train": self.train.__dict__,
            "hotness": self.hotness.__dict__,
            "selection": self.selection.__dict__,
            "candidates_per_model": self.candidates_per_model,
            "votes_per_model": self.votes_per_model,
            "pool_size": self.pool_size,
            "works_limit": self.works_limit,
            "panels": [
                self.panel_screening.__dict__,
                self.panel_refinement.__dict__,
            ],
            "rules": [
                self.rule_screening.as_dict(),
                self.rule_refinement.as_dict(),
            ],
            "endpoints": [e.__dict__ for e in self.endpoints.all_endpoints()],
        }
        return stable_hash("config", json.dumps(payload, sort_keys=True))


def mock_endpoint_roster() -> EndpointRoster:
    """Six mock proposal endpoints (3 US, 3 CN) plus the support roles."""
    proposal = [
        AgentEndpoint(
            endpoint_id=f"prop-{region.lower()}-{i}",
            provider_kind="mock",
            model_name=f"mock-{region.lower()}-{i}",
            region_tag=region,
        )
        for region in ("US", "CN")
        for i in (1, 2, 3)
    ]
    research = [
        AgentEndpoint(
            endpoint_id=f"research-{region.lower()}",
            provider_kind="mock",
            model_name=f"mock-research-{region.lower()}",
            region_tag=region,
        )
        for region in ("US", "CN")
    ]
    return EndpointRoster(
        proposal=proposal,
        research=research,
        consolidator=AgentEndpoint(
            endpoint_id="consolidator", provider_kind="mock", model_name="mock-merge"
        ),
        chair=AgentEndpoint(
            endpoint_id="chair", provider_kind="mock", model_name="mock-chair"
        ),
        voter=AgentEndpoint(
            endpoint_id="voter", provider_kind="mock", model_name="mock-voter"
        ),
    )


def _parse_endpoint(obj: dict) -> AgentEndpoint:
    return AgentEndpoint(
        endpoint_id=obj["endpoint_id"],
        provider_kind=obj.get("provider_kind", "mock"),
        model_name=obj.get("model_name", ""),
        base_url=obj.get("base_url", ""),
        credential_ref=obj.get("credential_ref", ""),
        temperature=obj.get("temperature", 0.6),
        region_tag=obj.get("region_tag", "other"),
    )


def _section_kwargs(data: dict, section: str, cls) -> dict:
    allowed = set(cls.__dataclass_fields__)
    given = data.get(section, {})
    unknown = set(given) - allowed
    if unknown:
        raise ContractViolation(
            f"unknown key {sorted(unknown)[0]!r} in [{section}]"
        )
    return given


def load_config(path: Path | str, **overrides) -> PipelineConfig:
    """Parse a TOML config; keyword overrides win over file values."""
    path = Path(path)
    with open(path, "rb") as f:
        data = tomllib.load(f)
    base = path.parent

    def respath(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    paths = data.get("paths", {})
    pipeline = data.get("pipeline", {})
    output_dir = respath(paths.get("output_dir", "out"))

    endpoints_data = data.get("endpoints", {})
    if endpoints_data:
        roster = EndpointRoster(
            proposal=[_parse_endpoint(e) for e in endpoints_data.get("proposal", [])],
            research=[_parse_endpoint(e) for e in endpoints_data.get("research", [])],
            consolidator=_parse_endpoint(endpoints_data["consolidator"])
            if "consolidator" in endpoints_data
            else None,
            chair=_parse_endpoint(endpoints_data["chair"])
            if "chair" in endpoints_data
            else None,
            voter=_parse_endpoint(endpoints_data["voter"])
            if "voter" in endpoints_data
            else None,
        )
    else:
        roster = mock_endpoint_roster()

    panels = data.get("panels", {})
    panel_screening = PanelSpec(
        stage="screening",
        human_count=panels.get("screening_human", 30),
        ai_count=panels.get("screening_ai", 70),
        level="graduate",
    )
    panel_refinement = PanelSpec(
        stage="refinement",
        human_count=panels.get("refinement_human", 10),
        ai_count=panels.get("refinement_ai", 30),
        level="professor",
    )
    rules = data.get("rules", {})
    rule_screening = (
        VotingRule.from_dict({**VotingRule.screening().as_dict(), **rules["screening"]})
        if "screening" in rules
        else VotingRule.screening()
    )
    rule_refinement = (
        VotingRule.from_dict(
            {**VotingRule.refinement().as_dict(), **rules["refinement"]}
        )
        if "refinement" in rules
        else VotingRule.refinement()
    )

    propose = data.get("propose", {})
    cfg = PipelineConfig(
        works_file=respath(paths["works"]),
        domain_map_file=respath(paths["domain_map"]),
        output_dir=output_dir,
        corpus_store=respath(paths.get("corpus_store", str(output_dir / "corpus"))),
        mock_table_dir=respath(paths["mock_table"]) if "mock_table" in paths else None,
        roster_file=respath(paths["roster"]) if "roster" in paths else None,
        domains=tuple(pipeline.get("domains", DOMAINS)),
        year_range=tuple(pipeline.get("year_range", (2015, 2025))),
        prev_year=pipeline.get("prev_year", 2024),
        curr_year=pipeline.get("curr_year", 2025),
        rng_seed=pipeline.get("rng_seed", 0),
        mock=pipeline.get("mock", True),
        train=TrainConfig(**_section_kwargs(data, "train", TrainConfig)),
        hotness=HotnessParams(**_section_kwargs(data, "hotness", HotnessParams)),
        selection=SelectionThresholds(
            **_section_kwargs(data, "selection", SelectionThresholds)
        ),
        candidates_per_model=propose.get("candidates_per_model", 100),
        votes_per_model=propose.get("votes_per_model", 100),
        pool_size=propose.get("pool_size", 100),
        works_limit=propose.get("works_limit", 20),
        panel_screening=panel_screening,
        panel_refinement=panel_refinement,
        rule_screening=rule_screening,
        rule_refinement=rule_refinement,
        endpoints=roster,
    )
    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ContractViolation(f"unknown config override {key!r}")
        cfg = replace(cfg, **{key: value})
    # the training seed follows the pipeline seed unless set explicitly
    if "train" not in data or "rng_seed" not in data.get("train", {}):
        cfg = replace(cfg, train=cfg.train.with_seed(cfg.rng_seed))
    cfg.validate()
    return cfg


def write_default_config(
    path: Path | str,
    works: str,
    domain_map: str,
    roster: str | None = None,
    rng_seed: int = 0,
    desk_scale: bool = True,
) -> None:
    """Write a starter TOML next to a generated fixture."""
    lines = [
        "[paths]",
        f'works = "{works}"',
        f'domain_map = "{domain_map}"',
        'output_dir = "out"',
    ]
    if roster:
        lines.append(f'roster = "{roster}"')
    lines += [
        "",
        "[pipeline]",
        f"rng_seed = {rng_seed}",
        "mock = true",
        "prev_year = 2024",
        "curr_year = 2025",
    ]
    if desk_scale:
        lines += [
            "",
            "# desk-scale training settings; defaults are full scale",
            "[train]",
            "embedding_dim = 32",
            "walk_length = 10",
            "num_walks = 5",
            "epochs = 5",
            "",
            "[hotness]",
            "sample_size = 20000",
        ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
