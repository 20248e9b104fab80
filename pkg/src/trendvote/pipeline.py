"""Stage orchestration: artifacts, content-hash manifests, re-entrant runs.

Each stage writes its artifacts plus a manifest recording input hashes, the
config hash, the seed, and timings. Re-running a stage whose manifest still
matches its inputs and outputs is a no-op. Missing upstream artifacts raise a
dependency error naming the stage to run first.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import simulator
from .agents import (
    AgentClient,
    MockTable,
    RESEARCH_MODES,
    ContextDocument,
    consolidate_contexts,
    instantiate_panel,
    run_deep_research,
)
from .analysis import alignment_report, write_alignment_report
from .ballot import (
    Ballot,
    SessionStore,
    advance,
    collect_ai_ballots,
    create_session,
    tally,
)
from .config import PipelineConfig
from .cooccur import CoocGraph, graph_from_slice
from .corpus import CorpusStore, load_domain_map
from .embedding import EmbeddingTable, embed_graph
from .errors import ContractViolation, DependencyError
from .fixtures import synthetic_human_panel
from .hotness import (
    HotnessTable,
    bandwidth_from_percentile,
    compute_hotness,
    rank_change,
    sample_pairwise_distances,
)
from .propose import (
    CandidatePool,
    assemble_breakthrough_prompt,
    assemble_question_prompt,
    cross_model_vote,
    merge_pools,
    propose_candidates,
    select_top_pool,
)
from .trends import (
    Cluster,
    ClusterSet,
    cluster_by_hotness_priority,
    make_selections,
    select_breakthrough_keywords,
    select_question_keywords,
)
from .util import derive_seed, dump_json, file_sha256, load_json

STAGES = (
    "ingest",
    "graph",
    "embed",
    "hotness",
    "cluster",
    "select",
    "context",
    "propose",
    "ensemble",
    "vote-tally",
    "analyze",
    "export",
)

_PRODUCER_HINTS = {
    "corpus": "ingest",
    "graphs": "graph",
    "embeddings": "embed",
    "hotness": "hotness",
    "clusters": "cluster",
    "selections": "select",
    "contexts": "context",
    "pools/raw": "propose",
    "pools/pool100": "ensemble",
    "sessions": "vote-tally",
    "reports": "analyze",
}

MOCK_CLOCK = "1970-01-01T00:00:00+00:00"


class Layout:
    """Canonical artifact paths under the configured output directory."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)

    def years(self) -> tuple[int, int]:
        return (self.config.prev_year, self.config.curr_year)

    @property
    def corpus_dir(self) -> Path:
        return Path(self.config.corpus_store)

    @property
    def ingest_report(self) -> Path:
        return self.out / "ingest_report.json"

    def graph_path(self, domain: str, year: int) -> Path:
        return self.out / "graphs" / f"{domain}-{year}.json"

    def embedding_path(self, domain: str, year: int) -> Path:
        return self.out / "embeddings" / f"{domain}-{year}.emb"

    def hotness_path(self, domain: str, year: int) -> Path:
        return self.out / "hotness" / f"{domain}-{year}.json"

    def cluster_path(self, domain: str) -> Path:
        return self.out / "clusters" / f"{domain}-{self.config.curr_year}.json"

    def selection_path(self, domain: str) -> Path:
        return self.out / "selections" / f"{domain}.json"

    def context_path(self, mode: str) -> Path:
        return self.out / "contexts" / f"{mode}.json"

    def pool_path(self, tag: str, domain: str, category: str) -> Path:
        return self.out / "pools" / tag / f"{domain}-{category}.jsonl"

    def ensemble_votes_path(self, domain: str, category: str) -> Path:
        return self.out / "ensemble" / f"{domain}-{category}.json"

    @property
    def sessions_dir(self) -> Path:
        return self.out / "sessions"

    def tally_path(self, session_id: str) -> Path:
        return self.out / "tallies" / f"{session_id}.json"

    def report_paths(self, domain: str) -> tuple[Path, Path]:
        base = self.out / "reports"
        return base / f"alignment-{domain}.csv", base / f"alignment-{domain}.json"

    @property
    def export_dir(self) -> Path:
        return self.out / "export"

    def manifest_path(self, stage: str) -> Path:
        return self.out / "manifests" / f"{stage}.json"


def build_client(config: PipelineConfig) -> AgentClient:
    table = (
        MockTable.load_dir(config.mock_table_dir, responder=simulator.respond)
        if config.mock_table_dir
        else MockTable(responder=simulator.respond)
    )
    if config.mock:
        return AgentClient(mock_table=table, clock=lambda: MOCK_CLOCK)
    return AgentClient(mock_table=table)


def _session_seed(config: PipelineConfig, *parts: str) -> int:
    return derive_seed(config.rng_seed, ":".join(parts))


def _hotness_table(path: Path) -> tuple[HotnessTable, dict[str, int]]:
    obj = load_json(path)
    table = HotnessTable(
        domain=obj["domain"],
        year=obj["year"],
        score={k: float(v) for k, v in obj["score"].items()},
        rank={k: int(v) for k, v in obj["rank"].items()},
    )
    return table, {k: int(v) for k, v in obj["freq"].items()}


def _cluster_set(path: Path) -> ClusterSet:
    obj = load_json(path)
    return ClusterSet(
        domain=obj["domain"],
        year=obj["year"],
        distance_threshold=obj["distance_threshold"],
        clusters=[Cluster(seed=c["seed"], members=list(c["members"])) for c in obj["clusters"]],
        unassigned=list(obj["unassigned"]),
    )


# -- stage implementations ----------------------------------------------------


def _stage_ingest(config: PipelineConfig, layout: Layout) -> list[Path]:
    store = CorpusStore(load_domain_map(config.domain_map_file))
    report = store.ingest_works(config.works_file)
    store.save(layout.corpus_dir)
    dump_json(report.as_dict(), layout.ingest_report)
    return [
        layout.corpus_dir / "records.ndjson",
        layout.corpus_dir / "index.bin",
        layout.ingest_report,
    ]


def _stage_graph(config: PipelineConfig, layout: Layout) -> list[Path]:
    store = CorpusStore.load(layout.corpus_dir)
    outputs = []
    for domain in config.domains:
        for year in layout.years():
            graph = graph_from_slice(store, domain, year)
            path = layout.graph_path(domain, year)
            dump_json(graph.serialized(), path)
            outputs.append(path)
    return outputs


def _stage_embed(config: PipelineConfig, layout: Layout) -> list[Path]:
    outputs = []
    for domain in config.domains:
        for year in layout.years():
            graph = CoocGraph.from_serialized(load_json(layout.graph_path(domain, year)))
            cfg = replace(
                config.train,
                rng_seed=derive_seed(config.train.rng_seed, f"embed:{domain}:{year}"),
            )
            table = embed_graph(graph, cfg)
            path = layout.embedding_path(domain, year)
            path.parent.mkdir(parents=True, exist_ok=True)
            table.save(path)
            outputs.append(path)
    return outputs


def _distance_sample(config: PipelineConfig, table: EmbeddingTable):
    params = replace(
        config.hotness,
        rng_seed=derive_seed(config.rng_seed, f"distances:{table.domain}:{table.year}"),
    )
    return sample_pairwise_distances(table, params)


def _stage_hotness(config: PipelineConfig, layout: Layout) -> list[Path]:
    store = CorpusStore.load(layout.corpus_dir)
    outputs = []
    for domain in config.domains:
        for year in layout.years():
            table = EmbeddingTable.load(layout.embedding_path(domain, year))
            sample = _distance_sample(config, table)
            sigma = bandwidth_from_percentile(sample, config.hotness.sigma_perc_1)
            freq = store.keyword_frequencies(domain, year)
            hot = compute_hotness(table, freq, sigma)
            path = layout.hotness_path(domain, year)
            dump_json(
                {
                    "domain": domain,
                    "year": year,
                    "sigma": sigma,
                    "score": hot.score,
                    "rank": hot.rank,
                    "freq": freq,
                },
                path,
            )
            outputs.append(path)
    return outputs


def _stage_cluster(config: PipelineConfig, layout: Layout) -> list[Path]:
    outputs = []
    for domain in config.domains:
        year = config.curr_year
        table = EmbeddingTable.load(layout.embedding_path(domain, year))
        hot, _ = _hotness_table(layout.hotness_path(domain, year))
        # same seeded sample as the hotness stage, by construction
        sample = _distance_sample(config, table)
        clusters = cluster_by_hotness_priority(hot, table, config.selection, sample)
        path = layout.cluster_path(domain)
        dump_json(
            {
                "domain": domain,
                "year": year,
                "distance_threshold": clusters.distance_threshold,
                "clusters": [
                    {"seed": c.seed, "members": c.members} for c in clusters.clusters
                ],
                "unassigned": clusters.unassigned,
            },
            path,
        )
        outputs.append(path)
    return outputs


def _stage_select(config: PipelineConfig, layout: Layout) -> list[Path]:
    outputs = []
    for domain in config.domains:
        prev, _ = _hotness_table(layout.hotness_path(domain, config.prev_year))
        curr, _ = _hotness_table(layout.hotness_path(domain, config.curr_year))
        clusters = _cluster_set(layout.cluster_path(domain))
        delta = rank_change(prev, curr)
        breakthrough = select_breakthrough_keywords(prev.rank, curr.rank, config.selection)
        questions = select_question_keywords(clusters, curr.rank, delta, config.selection)
        selections = make_selections(domain, breakthrough, questions)
        score_delta = {
            k: curr.score[k] - prev.score[k] for k in curr.score if k in prev.score
        }
        path = layout.selection_path(domain)
        dump_json(
            {
                "domain": domain,
                "breakthrough_keywords": list(selections.breakthrough_keywords),
                "question_keywords_1": list(selections.question_keywords_1),
                "question_keywords_2": list(selections.question_keywords_2),
                "no_eligible_clusters": selections.no_eligible_clusters,
                "rank_delta": delta,
                "score_delta": score_delta,
            },
            path,
        )
        outputs.append(path)
    return outputs


def _stage_context(config: PipelineConfig, layout: Layout) -> list[Path]:
    client = build_client(config)
    research = config.endpoints.research
    outputs = []
    for mode in RESEARCH_MODES:
        doc_a = run_deep_research(client, research[0], mode)
        doc_b = run_deep_research(client, research[1 % len(research)], mode)
        merged = consolidate_contexts(client, doc_a, doc_b, config.endpoints.consolidator)
        path = layout.context_path(mode)
        dump_json(
            {
                "research": [doc_a.as_dict(), doc_b.as_dict()],
                "consolidated": merged.as_dict(),
            },
            path,
        )
        outputs.append(path)
    return outputs


def _quota_split(target: int, keywords: list[str]) -> list[int]:
    # even split; the remainder goes to the hottest keywords, in order
    base, extra = divmod(target, len(keywords))
    return [base + (1 if i < extra else 0) for i in range(len(keywords))]


def _stage_propose(config: PipelineConfig, layout: Layout) -> list[Path]:
    client = build_client(config)
    store = CorpusStore.load(layout.corpus_dir)
    contexts = {
        mode: ContextDocument.from_dict(load_json(layout.context_path(mode))["consolidated"])
        for mode in RESEARCH_MODES
    }
    outputs = []
    for domain in config.domains:
        sel = load_json(layout.selection_path(domain))
        curr_rank = _hotness_table(layout.hotness_path(domain, config.curr_year))[0].rank

        def hottest_first(keywords: list[str]) -> list[str]:
            return sorted(keywords, key=lambda k: curr_rank.get(k, len(curr_rank) + 1))

        jobs = {
            "breakthrough": hottest_first(sel["breakthrough_keywords"]),
            "question": hottest_first(
                sorted(set(sel["question_keywords_1"]) | set(sel["question_keywords_2"]))
            ),
        }
        for category, keywords in jobs.items():
            bundles = []
            if keywords:
                quotas = _quota_split(config.candidates_per_model, keywords)
                for kw, quota in zip(keywords, quotas):
                    if quota == 0:
                        continue
                    if category == "breakthrough":
                        works = store.top_cited_works(
                            domain, kw, config.curr_year, config.curr_year,
                            config.works_limit,
                        )
                        bundles.append(
                            assemble_breakthrough_prompt(
                                kw, works, contexts["breakthrough_2025"],
                                domain, config.curr_year, quota,
                            )
                        )
                    else:
                        recent = store.top_cited_works(
                            domain, kw, config.curr_year, config.curr_year,
                            config.works_limit,
                        )
                        foundational = store.top_cited_works(
                            domain, kw, config.year_range[0], config.prev_year,
                            config.works_limit,
                        )
                        bundles.append(
                            assemble_question_prompt(
                                kw, recent, foundational, contexts["question_2026"],
                                domain, config.curr_year + 1, quota,
                            )
                        )
            if bundles:
                reports = [
                    propose_candidates(client, ep, bundles, config.candidates_per_model)
                    for ep in config.endpoints.proposal
                ]
            else:
                reports = []
            pool = merge_pools(reports, category, domain)
            if not bundles:
                pool.flags.append("no_seed_keywords")
            path = layout.pool_path("raw", domain, category)
            pool.save(path)
            outputs.append(path)
    return outputs


def _stage_ensemble(config: PipelineConfig, layout: Layout) -> list[Path]:
    client = build_client(config)
    outputs = []
    for domain in config.domains:
        for category in ("breakthrough", "question"):
            pool = CandidatePool.load(layout.pool_path("raw", domain, category))
            report = cross_model_vote(
                client,
                pool,
                config.endpoints.proposal,
                votes_per_model=config.votes_per_model,
                rng_seed=derive_seed(config.rng_seed, f"ensemble:{domain}:{category}"),
            )
            votes_path = layout.ensemble_votes_path(domain, category)
            dump_json(
                {
                    "domain": domain,
                    "category": category,
                    "tally": report.tally,
                    "valid_ballots": report.valid_ballots,
                    "votes_per_ballot": report.votes_per_ballot,
                    "dropped": report.dropped,
                    "ballots": report.ballots,
                },
                votes_path,
            )
            top = select_top_pool(pool, report.tally, k=config.pool_size)
            pool_path = layout.pool_path("pool100", domain, category)
            top.save(pool_path)
            outputs.extend([votes_path, pool_path])
    return outputs


def _stage_vote_tally(config: PipelineConfig, layout: Layout) -> list[Path]:
    client = build_client(config)
    chair = config.endpoints.chair
    voter_ep = config.endpoints.voter
    panels = {
        "screening": synthetic_human_panel(config.panel_screening)
        + instantiate_panel(client, chair, config.panel_screening),
        "refinement": synthetic_human_panel(config.panel_refinement)
        + instantiate_panel(client, chair, config.panel_refinement),
    }
    rules = {"screening": config.rule_screening, "refinement": config.rule_refinement}
    store = SessionStore(layout.sessions_dir)
    outputs = []

    def run_session(stage: str, pool: CandidatePool, domain: str, category: str):
        session = create_session(
            category=category,
            domain=domain,
            stage=stage,
            pool=pool,
            panel=panels[stage],
            rule=rules[stage],
            rng_seed=_session_seed(config, "present", stage, domain, category),
        )
        store.add(session)
        collect_ai_ballots(
            client,
            session,
            voter_ep,
            submit=lambda b: store.submit(session.session_id, b),
        )
        if config.mock:
            for profile in panels[stage]:
                if profile.kind != "human":
                    continue
                selections = simulator.synth_selections(
                    profile.voter_id,
                    session.presentation_order,
                    session.rule.kind,
                    session.rule.votes_per_voter,
                    style="human",
                )
                store.submit(
                    session.session_id,
                    Ballot(
                        voter_id=profile.voter_id,
                        selections=tuple(selections),
                        submitted_at=client.clock(),
                    ),
                )
        store.close(session.session_id)
        session_tally = tally(session)
        tally_path = layout.tally_path(session.session_id)
        dump_json(session_tally.as_dict(), tally_path)
        outputs.append(tally_path)
        outputs.append(layout.sessions_dir / session.session_id / "session.json")
        outputs.append(layout.sessions_dir / session.session_id / "ballots.jsonl")
        return advance(session, session_tally)

    for domain in config.domains:
        for category in ("breakthrough", "question"):
            pool100 = CandidatePool.load(layout.pool_path("pool100", domain, category))
            result1 = run_session("screening", pool100, domain, category)
            short30_path = layout.pool_path("short30", domain, category)
            result1.pool.save(short30_path)
            outputs.append(short30_path)
            result2 = run_session("refinement", result1.pool, domain, category)
            final_path = layout.pool_path("final10", domain, category)
            result2.pool.save(final_path)
            outputs.append(final_path)
            inducted_path = layout.pool_path("inducted2", domain, category)
            result2.inducted.save(inducted_path)
            outputs.append(inducted_path)
    return outputs


def _stage_analyze(config: PipelineConfig, layout: Layout) -> list[Path]:
    store = SessionStore.load(layout.sessions_dir)
    sessions = [store.get(sid) for sid in store.session_ids()]
    outputs = []
    for domain in config.domains:
        rows = alignment_report(
            [s for s in sessions if s.domain == domain and s.status == "closed"]
        )
        csv_path, json_path = layout.report_paths(domain)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_alignment_report(rows, csv_path, json_path)
        outputs.extend([csv_path, json_path])
    return outputs


def _stage_export(config: PipelineConfig, layout: Layout) -> list[Path]:
    out = layout.export_dir
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for domain in config.domains:
        for year in layout.years():
            table = EmbeddingTable.load(layout.embedding_path(domain, year))
            emb_csv = out / f"embeddings-{domain}-{year}.csv"
            table.export_csv(emb_csv)
            outputs.append(emb_csv)
            hot, freq = _hotness_table(layout.hotness_path(domain, year))
            hot_csv = out / f"hotness-{domain}-{year}.csv"
            hot.export_csv(hot_csv, freq)
            outputs.append(hot_csv)
        curr_hot, _ = _hotness_table(layout.hotness_path(domain, config.curr_year))
        clusters = _cluster_set(layout.cluster_path(domain))
        cl_csv = out / f"clusters-{domain}.csv"
        clusters.export_csv(cl_csv, curr_hot.rank)
        outputs.append(cl_csv)

        sel = load_json(layout.selection_path(domain))
        sel_csv = out / f"selections-{domain}.csv"
        with open(sel_csv, "w", encoding="utf-8", newline="") as f:
            f.write("set_name,keyword\n")
            for name in (
                "breakthrough_keywords",
                "question_keywords_1",
                "question_keywords_2",
            ):
                for kw in sel[name]:
                    f.write(f'{name},"{kw}"\n')
        outputs.append(sel_csv)

        delta_csv = out / f"deltas-{domain}.csv"
        prev_hot, _ = _hotness_table(layout.hotness_path(domain, config.prev_year))
        with open(delta_csv, "w", encoding="utf-8", newline="") as f:
            f.write("keyword,rank_prev,rank_curr,rank_delta,score_prev,score_curr,score_delta\n")
            for kw in sorted(sel["rank_delta"]):
                f.write(
                    f'"{kw}",{prev_hot.rank[kw]},{curr_hot.rank[kw]},'
                    f"{sel['rank_delta'][kw]},{prev_hot.score[kw]!r},"
                    f"{curr_hot.score[kw]!r},{sel['score_delta'][kw]!r}\n"
                )
        outputs.append(delta_csv)
    return outputs


_IMPLS = {
    "ingest": _stage_ingest,
    "graph": _stage_graph,
    "embed": _stage_embed,
    "hotness": _stage_hotness,
    "cluster": _stage_cluster,
    "select": _stage_select,
    "context": _stage_context,
    "propose": _stage_propose,
    "ensemble": _stage_ensemble,
    "vote-tally": _stage_vote_tally,
    "analyze": _stage_analyze,
    "export": _stage_export,
}


def _input_files(stage: str, config: PipelineConfig, layout: Layout) -> list[Path]:
    years = layout.years()
    domains = config.domains
    both = [(d, y) for d in domains for y in years]
    curr = [(d, config.curr_year) for d in domains]
    dom_cat = [(d, c) for d in domains for c in ("breakthrough", "question")]
    corpus = [layout.corpus_dir / "records.ndjson", layout.corpus_dir / "index.bin"]
    if stage == "ingest":
        return [Path(config.works_file), Path(config.domain_map_file)]
    if stage == "graph":
        return corpus
    if stage == "embed":
        return [layout.graph_path(d, y) for d, y in both]
    if stage == "hotness":
        return corpus + [layout.embedding_path(d, y) for d, y in both]
    if stage == "cluster":
        return [layout.embedding_path(d, y) for d, y in curr] + [
            layout.hotness_path(d, y) for d, y in curr
        ]
    if stage == "select":
        return [layout.hotness_path(d, y) for d, y in both] + [
            layout.cluster_path(d) for d in domains
        ]
    if stage == "context":
        return []
    if stage == "propose":
        return (
            corpus
            + [layout.selection_path(d) for d in domains]
            + [layout.hotness_path(d, y) for d, y in curr]
            + [layout.context_path(m) for m in RESEARCH_MODES]
        )
    if stage == "ensemble":
        return [layout.pool_path("raw", d, c) for d, c in dom_cat]
    if stage == "vote-tally":
        return [layout.pool_path("pool100", d, c) for d, c in dom_cat]
    if stage == "analyze":
        if layout.sessions_dir.is_dir():
            return sorted(
                p
                for p in layout.sessions_dir.rglob("*")
                if p.is_file() and p.suffix in (".json", ".jsonl")
            )
        return [layout.sessions_dir]  # reported missing by the dependency check
    if stage == "export":
        return (
            [layout.hotness_path(d, y) for d, y in both]
            + [layout.embedding_path(d, y) for d, y in both]
            + [layout.cluster_path(d) for d in domains]
            + [layout.selection_path(d) for d in domains]
        )
    raise ContractViolation(f"unknown stage {stage!r}")


def _check_dependencies(stage: str, missing: list[Path], layout: Layout) -> None:
    if not missing:
        return
    rel = missing[0]
    try:
        rel = missing[0].relative_to(layout.out)
    except ValueError:
        pass
    producer = None
    for prefix, producing_stage in _PRODUCER_HINTS.items():
        if str(rel).startswith(prefix):
            producer = producing_stage
            break
    if producer is None:
        raise DependencyError(
            f"stage {stage!r} is missing input {missing[0]}", required_stage="ingest"
        )
    raise DependencyError(
        f"stage {stage!r} is missing {rel}: run stage {producer!r} first",
        required_stage=producer,
    )


@dataclass
class StageResult:
    stage: str
    status: str  # "ran" | "up-to-date"
    manifest: dict


def run_stage(stage: str, config: PipelineConfig) -> StageResult:
    if stage == "vote-serve":
        raise ContractViolation(
            "vote-serve is interactive; use serve_app() or the CLI 'vote serve'"
        )
    if stage not in _IMPLS:
        raise ContractViolation(f"unknown stage {stage!r}; expected one of {STAGES}")
    layout = Layout(config)
    inputs = _input_files(stage, config, layout)
    missing = [p for p in inputs if not p.exists()]
    _check_dependencies(stage, missing, layout)
    input_hashes = {str(p): file_sha256(p) for p in inputs}
    config_hash = config.config_hash()

    manifest_path = layout.manifest_path(stage)
    if manifest_path.exists():
        previous = load_json(manifest_path)
        if (
            previous.get("config_hash") == config_hash
            and previous.get("inputs") == input_hashes
            and all(
                Path(p).exists() and file_sha256(Path(p)) == h
                for p, h in previous.get("outputs", {}).items()
            )
        ):
            return StageResult(stage=stage, status="up-to-date", manifest=previous)

    started = time.time()
    outputs = _IMPLS[stage](config, layout)
    duration = time.time() - started
    manifest = {
        "stage": stage,
        "config_hash": config_hash,
        "seed": config.rng_seed,
        "inputs": input_hashes,
        "outputs": {str(p): file_sha256(p) for p in outputs},
        "duration_s": round(duration, 3),
        "finished_unix": round(started + duration, 3),
    }
    dump_json(manifest, manifest_path)
    return StageResult(stage=stage, status="ran", manifest=manifest)


def run_all(config: PipelineConfig, stages: tuple[str, ...] = STAGES) -> list[StageResult]:
    return [run_stage(stage, config) for stage in stages]
