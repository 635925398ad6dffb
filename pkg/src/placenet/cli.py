"""Batch command-line pipeline.

Subcommands: generate, features, similarity, represent, embed, prevalence.
Every run writes its outputs plus a ``run_metadata.json`` sidecar recording
the resolved options, seed and input digests; given identical inputs,
options and seed, all outputs are byte-identical. Exit codes: 0 success,
1 usage error, 2 data/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import re
import sys
from pathlib import Path

import numpy as np

from placenet.embedding import (
    load_corpus_jsonl,
    nearest_categories,
    save_model_tsv,
    train_skipgram,
)
from placenet.features import (
    DEFAULT_K_SET,
    ConvergenceError,
    compute_features,
    read_features_csv,
    write_features_csv,
)
from placenet.forest import ForestParams
from placenet.generators import ArchetypeSpec
from placenet.graph import GraphParseError, parse_edge_list, serialize_edge_list
from placenet.prevalence import (
    BIN_KEYS,
    bin_medians,
    fractional_counts,
    load_external_counts_csv,
    load_places_csv,
    load_regions_csv,
    log_pearson,
    per_capita,
    write_bin_medians_csv,
    write_correlation_csv,
    write_prevalence_csv,
)
from placenet.seeding import derive_seed
from placenet.similarity import (
    Ensemble,
    auc_matrix,
    read_importance_csv,
    representative_distances,
    write_auc_matrix_csv,
    write_importance_csv,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _combined_digest(named: dict[str, str]) -> str:
    joined = "\n".join(f"{name}:{digest}" for name, digest in sorted(named.items()))
    return _sha256_text(joined)


def _write_metadata(out_dir: Path, command: str, seed: int | None,
                    options: dict, inputs: dict[str, str]) -> None:
    """Location-independent provenance: names and digests only, no paths."""
    outputs = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file() and path.name != "run_metadata.json":
            outputs[path.relative_to(out_dir).as_posix()] = _sha256_file(path)
    meta = {
        "command": command,
        "seed": seed,
        "options": options,
        "inputs": inputs,
        "outputs": outputs,
    }
    (out_dir / "run_metadata.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _read_manifest(path: Path) -> list[dict]:
    """JSONL entries {"id", "path", "category"}, validated with line numbers."""
    entries: list[dict] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_no}: invalid JSON ({exc.msg})")
            if not isinstance(obj, dict) or not {"id", "path", "category"} <= set(obj):
                raise ValueError(
                    f"{path}: line {line_no}: entry needs id, path and category"
                )
            if obj["id"] in seen:
                raise ValueError(f"{path}: line {line_no}: duplicate id {obj['id']!r}")
            seen.add(obj["id"])
            entries.append(obj)
    return entries


def _resolve(base: Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else base / p


def _parse_k_set(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        k = int(tok)
        if k < 1:
            raise ValueError(f"k values must be >= 1, got {k}")
        if k not in out:
            out.append(k)
    if not out:
        raise ValueError("k-set must name at least one k value")
    return tuple(out)


def _forest_params(args) -> ForestParams:
    return ForestParams(
        n_trees=args.n_trees,
        max_depth=args.max_depth if args.max_depth > 0 else None,
        min_leaf=args.min_leaf,
        features_per_split=args.features_per_split if args.features_per_split > 0 else None,
    )


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", text)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_generate(args) -> int:
    config_path = Path(args.config)
    parser = configparser.ConfigParser()
    with open(config_path, encoding="utf-8") as fh:
        parser.read_file(fh)
    out_dir = Path(args.out_dir)
    graphs_dir = out_dir / "graphs"
    graphs_dir.mkdir(parents=True, exist_ok=True)

    manifest_lines: list[str] = []
    for section_index, section in enumerate(parser.sections()):
        items = dict(parser.items(section))
        count = int(items.pop("count", "1"))
        if count < 1:
            raise ValueError(f"section [{section}]: count must be >= 1")
        category = items.pop("category", section)
        section_seed = items.pop("seed", None)
        for i in range(count):
            if section_seed is not None:
                graph_seed = derive_seed(int(section_seed), i)
            else:
                graph_seed = derive_seed(args.seed, section_index, i)
            try:
                spec = ArchetypeSpec.from_items(items, seed=graph_seed)
            except ValueError as exc:
                raise ValueError(f"section [{section}]: {exc}")
            graph_id = f"{section}_{i:03d}"
            rel = f"graphs/{graph_id}.edges"
            (out_dir / rel).write_text(
                serialize_edge_list(spec.build()), encoding="utf-8"
            )
            manifest_lines.append(json.dumps(
                {"id": graph_id, "path": rel, "category": category},
                sort_keys=True,
            ))
    (out_dir / "manifest.jsonl").write_text(
        "\n".join(manifest_lines) + ("\n" if manifest_lines else ""),
        encoding="utf-8",
    )

    _write_metadata(
        out_dir,
        "generate",
        args.seed,
        {"config": config_path.name},
        {config_path.name: _sha256_file(config_path)},
    )
    return 0


def _cmd_features(args) -> int:
    manifest_path = Path(args.manifest)
    entries = _read_manifest(manifest_path)
    k_set = _parse_k_set(args.k_set)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    graph_digests: dict[str, str] = {}
    for entry in entries:
        gpath = _resolve(manifest_path.parent, entry["path"])
        text = gpath.read_text(encoding="utf-8")
        try:
            graph = parse_edge_list(text)
        except GraphParseError as exc:
            raise ValueError(f"{gpath}: {exc}")
        fv = compute_features(
            graph,
            k_set,
            count_mode=args.count_mode,
            lambda2_scope=args.lambda2_scope,
            lambda2_tol=args.lambda2_tol,
            lambda2_max_iter=args.lambda2_max_iter,
            path_sample_sources=args.path_sample_sources or None,
            path_sample_seed=args.seed,
        )
        rows.append((entry["id"], fv))
        graph_digests[entry["id"]] = _sha256_text(text)
    write_features_csv(str(out_dir / "features.csv"), rows, k_set)

    options = {
        "manifest": manifest_path.name,
        "k_set": list(k_set),
        "count_mode": args.count_mode,
        "lambda2_scope": args.lambda2_scope,
        "lambda2_tol": args.lambda2_tol,
        "lambda2_max_iter": args.lambda2_max_iter,
        "path_sample_sources": args.path_sample_sources,
    }
    inputs = {
        manifest_path.name: _sha256_file(manifest_path),
        "graphs": _combined_digest(graph_digests),
    }
    _write_metadata(out_dir, "features", args.seed, options, inputs)
    return 0


def _load_ensemble(features_path: Path, manifest_path: Path) -> tuple[Ensemble, list[str]]:
    ids, names, matrix = read_features_csv(str(features_path))
    entries = _read_manifest(manifest_path)
    category_of = {e["id"]: e["category"] for e in entries}
    ensemble = Ensemble()
    for graph_id, row in zip(ids, matrix):
        if graph_id not in category_of:
            raise ValueError(
                f"{features_path}: graph {graph_id!r} is not in the manifest"
            )
        ensemble.add(category_of[graph_id], graph_id, row)
    return ensemble, names


def _cmd_similarity(args) -> int:
    features_path = Path(args.features)
    manifest_path = Path(args.manifest)
    ensemble, names = _load_ensemble(features_path, manifest_path)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    matrix, importance = auc_matrix(
        ensemble, folds=args.folds, seed=args.seed, params=_forest_params(args)
    )
    write_auc_matrix_csv(matrix, str(out_dir / "auc_matrix.csv"))
    write_importance_csv(str(out_dir / "importance.csv"), importance, names)

    options = {
        "features": features_path.name,
        "manifest": manifest_path.name,
        "folds": args.folds,
        "n_trees": args.n_trees,
        "max_depth": args.max_depth,
        "min_leaf": args.min_leaf,
        "features_per_split": args.features_per_split,
    }
    inputs = {
        features_path.name: _sha256_file(features_path),
        manifest_path.name: _sha256_file(manifest_path),
    }
    _write_metadata(out_dir, "similarity", args.seed, options, inputs)
    return 0


def _cmd_represent(args) -> int:
    features_path = Path(args.features)
    manifest_path = Path(args.manifest)
    importance_path = Path(args.importance)
    ensemble, names = _load_ensemble(features_path, manifest_path)
    imp_names, importance = read_importance_csv(str(importance_path))
    if imp_names != names:
        raise ValueError(
            f"{importance_path}: feature names do not match {features_path.name}"
        )
    entries = _read_manifest(manifest_path)
    path_of = {e["id"]: e["path"] for e in entries}

    out_dir = Path(args.out_dir)
    copies_dir = out_dir / "representatives"
    copies_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for category in ensemble.category_names():
        dists = representative_distances(
            ensemble,
            category,
            importance,
            rank_scope=args.rank_scope,
            weight_mode=args.weight_mode,
        )
        rep_id, dist = min(dists, key=lambda pair: (pair[1], pair[0]))
        rows.append((category, rep_id, dist))
        src = _resolve(manifest_path.parent, path_of[rep_id])
        dst = copies_dir / f"{_safe_name(category)}__{_safe_name(rep_id)}.edges"
        dst.write_bytes(src.read_bytes())

    with open(out_dir / "representatives.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["category", "graph_id", "distance"])
        for category, rep_id, dist in rows:
            writer.writerow([category, rep_id, repr(dist)])

    options = {
        "features": features_path.name,
        "manifest": manifest_path.name,
        "importance": importance_path.name,
        "rank_scope": args.rank_scope,
        "weight_mode": args.weight_mode,
    }
    inputs = {
        features_path.name: _sha256_file(features_path),
        manifest_path.name: _sha256_file(manifest_path),
        importance_path.name: _sha256_file(importance_path),
    }
    _write_metadata(out_dir, "represent", None, options, inputs)
    return 0


def _cmd_embed(args) -> int:
    corpus_path = Path(args.corpus)
    records = load_corpus_jsonl(str(corpus_path))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = train_skipgram(
        records,
        dim=args.dim,
        epochs=args.epochs,
        negatives=args.negatives,
        learning_rate=args.learning_rate,
        min_count=args.min_count,
        seed=args.seed,
    )
    save_model_tsv(model, str(out_dir / "model.tsv"))
    with open(out_dir / "losses.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(model.epoch_losses, start=1):
            writer.writerow([epoch, repr(loss)])

    inputs = {corpus_path.name: _sha256_file(corpus_path)}
    if args.seeds:
        seeds_path = Path(args.seeds)
        seeds_map = json.loads(seeds_path.read_text(encoding="utf-8"))
        if not isinstance(seeds_map, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in seeds_map.items()
        ):
            raise ValueError(f"{seeds_path}: expected a JSON object of type -> label")
        inputs[seeds_path.name] = _sha256_file(seeds_path)
        allow: set[str] | None = None
        if args.allowlist:
            allow_path = Path(args.allowlist)
            allow = {
                line.strip()
                for line in allow_path.read_text(encoding="utf-8").splitlines()
                if line.strip() and not line.strip().startswith("#")
            }
            inputs[allow_path.name] = _sha256_file(allow_path)
        with open(out_dir / "neighbors.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["type", "seed_label", "rank", "label", "cosine"])
            for place_type in sorted(seeds_map):
                seed_label = seeds_map[place_type]
                if seed_label not in model:
                    raise ValueError(
                        f"{seeds_path}: seed label {seed_label!r} for type "
                        f"{place_type!r} is not in the vocabulary"
                    )
                neighbors = nearest_categories(model, seed_label, top_k=args.top_k)
                for rank, (label, cosine) in enumerate(neighbors, start=1):
                    if allow is not None and label not in allow:
                        continue
                    writer.writerow([place_type, seed_label, rank, label, repr(cosine)])

    options = {
        "corpus": corpus_path.name,
        "dim": args.dim,
        "epochs": args.epochs,
        "negatives": args.negatives,
        "learning_rate": args.learning_rate,
        "min_count": args.min_count,
        "top_k": args.top_k,
        "seeds": Path(args.seeds).name if args.seeds else None,
        "allowlist": Path(args.allowlist).name if args.allowlist else None,
    }
    _write_metadata(out_dir, "embed", args.seed, options, inputs)
    return 0


def _cmd_prevalence(args) -> int:
    places_path = Path(args.places)
    regions_path = Path(args.regions)
    records = load_places_csv(str(places_path))
    regions = load_regions_csv(str(regions_path))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    counts = fractional_counts(records)
    table = per_capita(counts, regions)
    write_prevalence_csv(str(out_dir / "prevalence.csv"), table)
    medians = {key: bin_medians(table, regions, key) for key in BIN_KEYS}
    write_bin_medians_csv(str(out_dir / "bin_medians.csv"), medians)

    inputs = {
        places_path.name: _sha256_file(places_path),
        regions_path.name: _sha256_file(regions_path),
    }
    if args.external:
        external_path = Path(args.external)
        external = load_external_counts_csv(str(external_path))
        inputs[external_path.name] = _sha256_file(external_path)
        # Zero-count regions stay in the map so the log transform drops
        # them visibly (reported in n_dropped) instead of silently.
        by_category: dict[str, dict[str, float]] = {}
        for (region, cat), entry in table.items():
            by_category.setdefault(cat, {})[region] = entry.weighted_count
        results = {}
        for cat in sorted(set(by_category) & set(external)):
            results[cat] = log_pearson(by_category[cat], external[cat])
        write_correlation_csv(str(out_dir / "correlation.csv"), results)

    options = {
        "places": places_path.name,
        "regions": regions_path.name,
        "external": Path(args.external).name if args.external else None,
    }
    _write_metadata(out_dir, "prevalence", None, options, inputs)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="placenet",
        description="Fingerprint and compare ensembles of social-place friendship networks.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="synthesize graphs from an archetype config")
    p.add_argument("--config", required=True, help="INI-style archetype sections")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("features", help="compute feature CSV from a graph manifest")
    p.add_argument("--manifest", required=True, help="JSONL of {id, path, category}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k-set", default=",".join(str(k) for k in DEFAULT_K_SET))
    p.add_argument("--count-mode", choices=["components", "nodes"], default="components")
    p.add_argument("--lambda2-scope", choices=["lcc", "global"], default="lcc")
    p.add_argument("--lambda2-tol", type=float, default=1e-8)
    p.add_argument("--lambda2-max-iter", type=int, default=10_000)
    p.add_argument("--path-sample-sources", type=int, default=0,
                   help="BFS source sample size for huge components (0 = exact)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("similarity", help="pairwise category AUC matrix + importance")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=0, help="0 = unbounded")
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--features-per-split", type=int, default=0,
                   help="0 = ceil(sqrt(d))")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_similarity)

    p = sub.add_parser("represent", help="pick each category's representative graph")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--importance", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--rank-scope", choices=["pooled", "per_category"], default="pooled")
    p.add_argument("--weight-mode", choices=["squared", "presquare"], default="squared")
    p.set_defaults(func=_cmd_represent)

    p = sub.add_parser("embed", help="train label embeddings and report neighbors")
    p.add_argument("--corpus", required=True, help="JSONL of {categories: [...]}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.025)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--top-k", type=int, default=300)
    p.add_argument("--seeds", help="JSON object: place type -> seed label")
    p.add_argument("--allowlist", help="optional file of permitted labels")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("prevalence", help="per-capita prevalence statistics")
    p.add_argument("--places", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--external", help="optional external counts for correlation")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_prevalence)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        message = exc.args[0] if exc.args else exc
        print(f"data error: {message}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
