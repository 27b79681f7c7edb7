"""Command-line driver.

Each subcommand is one pipeline stage with file-based inputs and outputs, so
stages can be re-run and resumed independently; `run` composes them all.
Every stage derives its randomness from the master seed, and artifacts are
byte-identical across re-runs with the same inputs.

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .crowd import CrowdError, JudgmentSet, PersonaMix, PRESETS, run_crowd
from .dataset import (
    Dataset,
    DatasetError,
    GroundTruth,
    SummaryStats,
    ampute,
    load_csv,
    load_schema,
    summarize,
)
from .mice import ImputationSet, MiceError, multiple_impute
from .pooling import (
    PoolingError,
    compare,
    imputation_set_from_judgments,
    summarize_imputation_set,
)
from .questionnaire import (
    Questionnaire,
    QuestionnaireError,
    batch,
    build_intro,
    render_question,
)
from .service import ServiceError, init_data_dir

AMPUTED_CSV = "amputed.csv"
GROUND_TRUTH_JSON = "ground_truth.json"
STATS_JSON = "stats.json"
MANIFEST_JSON = "run-manifest.json"
JUDGMENTS_JSONL = "judgments.jsonl"
CROWD_DIR = "crowd_imputations"
MACHINE_DIR = "machine_imputations"

_STAGE_INDEX = {"ampute": 0, "crowd": 1, "mice": 2}


class ConfigError(ValueError):
    """Bad flags or unreadable configuration inputs."""


def stage_seed(master: int, stage: str) -> int:
    """Per-stage child of the master seed, stable across runs."""
    ss = np.random.SeedSequence([master, _STAGE_INDEX[stage]])
    return int(ss.generate_state(1)[0])


def _sub_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    schema: str
    targets: tuple[str, ...]
    n_missing: int
    outdir: str
    k: int = 30
    m: int = 30
    seed: int = 0
    persona_mix: str | None = None
    preset: str = "experienced"
    cycles: int = 10
    k_d: int = 5
    top_m: int = 3
    prior_blurb: str | None = None
    prepend_prior: bool = False
    missing_token: str = "?"
    fmt: str = "txt"

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1 or self.n_missing < 1:
            raise ConfigError("k, m, and n must all be >= 1")


def _require_file(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {p}")
    return p


def _load_schema(path: str | Path):
    _require_file(path, "schema file")
    try:
        return load_schema(path)
    except (json.JSONDecodeError, KeyError, DatasetError) as e:
        raise ConfigError(f"unreadable schema {path}: {e}")


def _load_artifact_dataset(outdir: Path, schema_path: str, missing_token: str = "?") -> Dataset:
    schema, id_column = _load_schema(schema_path)
    csv_path = outdir / AMPUTED_CSV
    if not csv_path.is_file():
        raise DatasetError(f"missing upstream artifact {csv_path}; run the ampute stage first")
    return load_csv(csv_path, schema, missing_token=missing_token, id_column=id_column)


def _resolve_mix(persona_mix: str | None, preset: str) -> PersonaMix:
    if persona_mix is not None:
        _require_file(persona_mix, "persona mix file")
        return PersonaMix.load(persona_mix)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    return PersonaMix.single(PRESETS[preset])


# -- stages ---------------------------------------------------------------------


def _require_targets(cfg: RunConfig) -> None:
    if not cfg.targets:
        raise ConfigError("at least one target column is required")


def do_ampute(cfg: RunConfig) -> None:
    _require_targets(cfg)
    schema, id_column = _load_schema(cfg.schema)
    _require_file(cfg.dataset, "dataset file")
    d = load_csv(cfg.dataset, schema, missing_token=cfg.missing_token, id_column=id_column)
    base = stage_seed(cfg.seed, "ampute")
    entries: list = []
    for ci, column in enumerate(cfg.targets):
        d, gt = ampute(d, column, cfg.n_missing, _sub_seed(base, ci))
        entries.extend(gt.entries)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d.write_csv(outdir / AMPUTED_CSV, missing_token=cfg.missing_token)
    GroundTruth(tuple(entries)).to_json(outdir / GROUND_TRUTH_JSON)
    print(f"amputed {cfg.n_missing} cells per target into {outdir / AMPUTED_CSV}")


def do_describe(dataset_path: str, schema_path: str, out_path: str, missing_token: str = "?") -> None:
    schema, id_column = _load_schema(schema_path)
    _require_file(dataset_path, "dataset file")
    d = load_csv(dataset_path, schema, missing_token=missing_token, id_column=id_column)
    stats = summarize(d)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    stats.save(out_path)
    print(f"wrote summary statistics to {out_path}")


def _load_templates(template_file: str | None) -> dict[str, str]:
    if template_file is None:
        return {}
    _require_file(template_file, "template file")
    data = json.loads(Path(template_file).read_text())
    if not isinstance(data, dict):
        raise ConfigError("template file must be a JSON object {kind: template}")
    return data


def do_gen_survey(cfg: RunConfig, template_file: str | None = None) -> list[Questionnaire]:
    _require_targets(cfg)
    outdir = Path(cfg.outdir)
    d = _load_artifact_dataset(outdir, cfg.schema, cfg.missing_token)
    stats = summarize(d)
    stats.save(outdir / STATS_JSON)
    templates = _load_templates(template_file)

    questionnaires: list[Questionnaire] = []
    for target in cfg.targets:
        missing = d.missing_rows(target)
        if not missing:
            raise QuestionnaireError(f"target {target} has no missing cells to ask about")
        intro, plots = build_intro(
            stats,
            target,
            top_m=cfg.top_m,
            prior_blurb=cfg.prior_blurb,
            prepend_prior=cfg.prepend_prior,
            dataset=d,
        )
        template = templates.get(d.spec(target).kind)
        questions = [render_question(d, (r, target), template=template) for r in missing]
        questionnaires.extend(
            batch(
                questions,
                intro,
                plots,
                cfg.k,
                prior_blurb=cfg.prior_blurb,
                id_prefix=f"qn-{target}",
            )
        )
    init_data_dir(outdir, questionnaires, job_id="job-001", created=0.0)
    print(f"wrote {len(questionnaires)} questionnaire(s) under {outdir / 'questionnaires'}")
    return questionnaires


def _load_questionnaires(outdir: Path) -> list[Questionnaire]:
    job_path = outdir / "job.json"
    if not job_path.is_file():
        raise QuestionnaireError(f"missing upstream artifact {job_path}; run gen-survey first")
    job = json.loads(job_path.read_text())
    out = []
    for qn_id in job["questionnaire_ids"]:
        path = outdir / "questionnaires" / f"{qn_id}.json"
        out.append(Questionnaire.from_dict(json.loads(path.read_text())))
    return out


def do_simulate_crowd(cfg: RunConfig) -> None:
    outdir = Path(cfg.outdir)
    stats_path = outdir / STATS_JSON
    if not stats_path.is_file():
        raise QuestionnaireError(f"missing upstream artifact {stats_path}; run gen-survey first")
    stats = SummaryStats.load(stats_path)
    questionnaires = _load_questionnaires(outdir)
    mix = _resolve_mix(cfg.persona_mix, cfg.preset)
    base = stage_seed(cfg.seed, "crowd")

    total = 0
    with open(outdir / JUDGMENTS_JSONL, "w") as fh:
        for qi, qn in enumerate(questionnaires):
            js = run_crowd(qn, mix, _sub_seed(base, qi), stats)
            for j in js.all_judgments():
                fh.write(json.dumps({**j.to_dict(), "questionnaire_id": qn.id}) + "\n")
                total += 1
    print(f"recorded {total} judgments into {outdir / JUDGMENTS_JSONL}")


def do_impute_mice(cfg: RunConfig) -> None:
    outdir = Path(cfg.outdir)
    d = _load_artifact_dataset(outdir, cfg.schema, cfg.missing_token)
    if cfg.m == 1:
        warnings.warn("m=1 gives a single imputation; between-imputation variance is meaningless")
    imp = multiple_impute(d, m=cfg.m, cycles=cfg.cycles, k_d=cfg.k_d, seed=stage_seed(cfg.seed, "mice"))
    imp.save(outdir / MACHINE_DIR)
    print(f"wrote {imp.m} completed datasets to {outdir / MACHINE_DIR}")


def do_pool(cfg: RunConfig, provenance: str) -> None:
    outdir = Path(cfg.outdir)
    schema, id_column = _load_schema(cfg.schema)
    if provenance == "crowd":
        log_path = outdir / JUDGMENTS_JSONL
        if not log_path.is_file():
            raise PoolingError(f"missing upstream artifact {log_path}; run simulate-crowd or serve first")
        base = _load_artifact_dataset(outdir, cfg.schema, cfg.missing_token)
        judgments = JudgmentSet.load_jsonl(log_path)
        questions = [q for qn in _load_questionnaires(outdir) for q in qn.questions]
        imp = imputation_set_from_judgments(base, questions, judgments, seed=stage_seed(cfg.seed, "crowd"))
        imp.save(outdir / CROWD_DIR)
        source_dir = outdir / CROWD_DIR
    elif provenance == "machine":
        source_dir = outdir / MACHINE_DIR
        if not (source_dir / "manifest.json").is_file():
            raise PoolingError(f"missing upstream artifact {source_dir}; run impute-mice first")
        imp = ImputationSet.load(source_dir, schema, id_column=id_column)
    else:
        raise ConfigError(f"unknown provenance {provenance!r}")
    summaries = summarize_imputation_set(imp)
    payload = {
        "provenance": imp.provenance,
        "m": imp.m,
        "cells": [s.to_dict() for s in summaries],
    }
    out_path = outdir / f"pooled_{provenance}.json"
    out_path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"pooled {len(summaries)} cells into {out_path}")


def do_report(cfg: RunConfig) -> str:
    outdir = Path(cfg.outdir)
    schema, id_column = _load_schema(cfg.schema)
    gt_path = outdir / GROUND_TRUTH_JSON
    if not gt_path.is_file():
        raise PoolingError(f"missing upstream artifact {gt_path}; run ampute first")
    gt = GroundTruth.from_json(gt_path)
    sets = {}
    for name, subdir in (("crowd", CROWD_DIR), ("machine", MACHINE_DIR)):
        path = outdir / subdir
        if not (path / "manifest.json").is_file():
            raise PoolingError(f"missing upstream artifact {path}; run pool --provenance {name} first")
        sets[name] = ImputationSet.load(path, schema, id_column=id_column)
    report = compare(gt, sets["crowd"], sets["machine"])
    rendered = report.render(cfg.fmt)
    out_path = outdir / f"report.{cfg.fmt}"
    out_path.write_text(rendered)
    print(rendered, end="")
    return rendered


def run_pipeline(cfg: RunConfig, template_file: str | None = None) -> str:
    """ampute -> describe -> gen-survey -> simulate-crowd -> impute-mice ->
    pool both provenances -> report, with artifacts under cfg.outdir."""
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = asdict(cfg)
    manifest["targets"] = list(cfg.targets)
    (outdir / MANIFEST_JSON).write_text(json.dumps(manifest, indent=2) + "\n")
    if cfg.k == 1:
        warnings.warn("k=1 collects a single judgment per question; pooled spreads are meaningless")
    do_ampute(cfg)
    do_gen_survey(cfg, template_file)
    do_simulate_crowd(cfg)
    do_impute_mice(cfg)
    do_pool(cfg, "crowd")
    do_pool(cfg, "machine")
    return do_report(cfg)


# -- argument parsing -------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    if "schema" in names:
        p.add_argument("--schema", required=True, help="schema JSON path")
    if "outdir" in names:
        p.add_argument("--outdir", required=True, help="run artifact directory")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if "missing-token" in names:
        p.add_argument("--missing-token", default="?", help="missing-cell token (default '?')")


def _cfg_from(args: argparse.Namespace, **overrides) -> RunConfig:
    base = {
        "dataset": getattr(args, "dataset", ""),
        "schema": args.schema,
        "targets": tuple(getattr(args, "target", ()) or ()),
        "n_missing": getattr(args, "n", 1),
        "outdir": args.outdir,
        "k": getattr(args, "k", 30),
        "m": getattr(args, "m", 30),
        "seed": getattr(args, "seed", 0),
        "persona_mix": getattr(args, "persona_mix", None),
        "preset": getattr(args, "preset", "experienced"),
        "cycles": getattr(args, "cycles", 10),
        "k_d": getattr(args, "k_d", 5),
        "top_m": getattr(args, "top_m", 3),
        "prior_blurb": getattr(args, "prior_blurb", None),
        "prepend_prior": getattr(args, "prepend_prior", False),
        "missing_token": getattr(args, "missing_token", "?"),
        "fmt": getattr(args, "format", "txt"),
    }
    base.update(overrides)
    return RunConfig(**base)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdimpute",
        description="Survey-driven and machine multiple imputation for tabular data",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ampute", help="mask n observed cells per target column")
    p.add_argument("--dataset", required=True)
    _add_common(p, "schema", "outdir", "seed", "missing-token")
    p.add_argument("--target", action="append", required=True, help="column to ampute (repeatable)")
    p.add_argument("--n", type=int, required=True, help="cells to mask per target")
    p.set_defaults(func=lambda a: do_ampute(_cfg_from(a, n_missing=a.n)))

    p = sub.add_parser("describe", help="summary statistics of a CSV to JSON")
    p.add_argument("--dataset", required=True)
    _add_common(p, "schema", "missing-token")
    p.add_argument("--out", required=True, help="output stats JSON path")
    p.set_defaults(func=lambda a: do_describe(a.dataset, a.schema, a.out, a.missing_token))

    p = sub.add_parser("gen-survey", help="build questionnaires from the amputed dataset")
    _add_common(p, "schema", "outdir", "missing-token")
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--k", type=int, default=30, help="judgments per question (default 30)")
    p.add_argument("--top-m", type=int, default=3, dest="top_m")
    p.add_argument("--prior-blurb", dest="prior_blurb")
    p.add_argument("--prepend-prior", action="store_true", dest="prepend_prior")
    p.add_argument("--template-file", dest="template_file")
    p.set_defaults(func=lambda a: (do_gen_survey(_cfg_from(a), a.template_file), None)[1])

    p = sub.add_parser("simulate-crowd", help="answer the questionnaires with personas")
    _add_common(p, "schema", "outdir", "seed")
    p.add_argument("--persona-mix", dest="persona_mix", help="persona mix JSON path")
    p.add_argument("--preset", default="experienced", help=f"one of {sorted(PRESETS)}")
    p.set_defaults(func=lambda a: do_simulate_crowd(_cfg_from(a)))

    p = sub.add_parser("serve", help="host the survey service over a data directory")
    p.add_argument("--data-dir", required=True, dest="data_dir")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--k-override", type=int, default=None, dest="k_override")
    p.add_argument("--static-dir", default=None, dest="static_dir")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_serve_cmd)

    p = sub.add_parser("impute-mice", help="machine-impute m completed datasets")
    _add_common(p, "schema", "outdir", "seed", "missing-token")
    p.add_argument("--m", type=int, default=30)
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--k-d", type=int, default=5, dest="k_d")
    p.set_defaults(func=lambda a: do_impute_mice(_cfg_from(a)))

    p = sub.add_parser("pool", help="pool judgments or machine imputations per cell")
    _add_common(p, "schema", "outdir", "seed", "missing-token")
    p.add_argument("--provenance", choices=("crowd", "machine"), required=True)
    p.set_defaults(func=lambda a: do_pool(_cfg_from(a), a.provenance))

    p = sub.add_parser("report", help="side-by-side crowd vs machine comparison")
    _add_common(p, "schema", "outdir", "missing-token")
    p.add_argument("--format", choices=("json", "md", "txt"), default="txt")
    p.set_defaults(func=lambda a: (do_report(_cfg_from(a)), None)[1])

    p = sub.add_parser("run", help="full pipeline: ampute through report")
    p.add_argument("--dataset", required=True)
    _add_common(p, "schema", "outdir", "seed", "missing-token")
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--m", type=int, default=30)
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--k-d", type=int, default=5, dest="k_d")
    p.add_argument("--top-m", type=int, default=3, dest="top_m")
    p.add_argument("--prior-blurb", dest="prior_blurb")
    p.add_argument("--prepend-prior", action="store_true", dest="prepend_prior")
    p.add_argument("--persona-mix", dest="persona_mix")
    p.add_argument("--preset", default="experienced")
    p.add_argument("--template-file", dest="template_file")
    p.add_argument("--format", choices=("json", "md", "txt"), default="txt")
    p.set_defaults(func=lambda a: (run_pipeline(_cfg_from(a, n_missing=a.n), a.template_file), None)[1])

    return parser


def _serve_cmd(args: argparse.Namespace) -> None:
    from .service import serve

    data_dir = Path(args.data_dir)
    if not (data_dir / "job.json").is_file():
        raise ConfigError(f"no job.json under {data_dir}; run gen-survey first")
    serve(
        data_dir,
        port=args.port,
        k_override=args.k_override,
        static_dir=args.static_dir,
        host=args.host,
    )


_RUNTIME_ERRORS = (
    DatasetError,
    QuestionnaireError,
    CrowdError,
    MiceError,
    PoolingError,
    ServiceError,
    OSError,
    json.JSONDecodeError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as e:
        print(f"config error [{args.cmd}]: {e}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as e:
        print(f"error [{args.cmd}]: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
