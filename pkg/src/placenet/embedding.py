"""Category-label embeddings from per-page co-occurrence.

Each page contributes one record of 1-3 category labels; a record is an
unordered set, so the training window spans the whole record. Labels are
embedded with skip-gram plus negative sampling and queried by cosine
similarity for taxonomy expansion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from placenet.seeding import derive_rng

MAX_RECORD_LABELS = 3


@dataclass
class EmbeddingModel:
    labels: list[str]
    vectors: np.ndarray  # (vocab, dim) input vectors
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._index = {label: i for i, label in enumerate(self.labels)}

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def vector(self, label: str) -> np.ndarray:
        return self.vectors[self._index[label]]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def load_corpus_jsonl(path: str) -> list[tuple[str, ...]]:
    """Read one record per line: {"categories": ["A", "B"]}.

    Labels are deduplicated and sorted within a record. Raises ValueError
    naming the line for malformed JSON, empty records or records with more
    than 3 labels.
    """
    records: list[tuple[str, ...]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_no}: invalid JSON ({exc.msg})")
            labels = obj.get("categories") if isinstance(obj, dict) else None
            if not isinstance(labels, list) or not labels:
                raise ValueError(
                    f"{path}: line {line_no}: expected a non-empty 'categories' list"
                )
            if not all(isinstance(x, str) and x for x in labels):
                raise ValueError(f"{path}: line {line_no}: labels must be non-empty strings")
            uniq = tuple(sorted(set(labels)))
            if len(uniq) > MAX_RECORD_LABELS:
                raise ValueError(
                    f"{path}: line {line_no}: a record holds at most "
                    f"{MAX_RECORD_LABELS} labels, found {len(uniq)}"
                )
            records.append(uniq)
    return records


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def train_skipgram(
    records,
    *,
    dim: int = 64,
    epochs: int = 15,
    negatives: int = 5,
    learning_rate: float = 0.025,
    min_count: int = 1,
    seed: int = 0,
) -> EmbeddingModel:
    """Skip-gram with negative sampling over label co-occurrence records.

    Every ordered pair of distinct labels within a record is one training
    example; negatives are drawn from the unigram^(3/4) distribution. The
    learning rate decays linearly over all updates (floor 1e-4 of the
    start value). Training is single-threaded and deterministic given the
    seed. The model records the mean negative-sampling loss per epoch.

    Raises:
        ValueError: if the corpus is empty or min_count filtering leaves
            no vocabulary.
    """
    records = [tuple(sorted(set(r))) for r in records]
    if not records:
        raise ValueError("corpus is empty")
    counts: dict[str, int] = {}
    for rec in records:
        if not rec or len(rec) > MAX_RECORD_LABELS:
            raise ValueError("records must hold 1-3 labels")
        for label in rec:
            counts[label] = counts.get(label, 0) + 1
    vocab = sorted((l for l, c in counts.items() if c >= min_count),
                   key=lambda l: (-counts[l], l))
    if not vocab:
        raise ValueError("vocabulary is empty after min_count filtering")
    index = {label: i for i, label in enumerate(vocab)}
    v_size = len(vocab)

    noise = np.array([counts[l] for l in vocab], dtype=float) ** 0.75
    noise /= noise.sum()

    rng = derive_rng(seed, 0xE4B)
    w_in = (rng.random((v_size, dim)) - 0.5) / dim
    w_out = np.zeros((v_size, dim))

    kept = [tuple(index[l] for l in rec if l in index) for rec in records]
    pairs_per_epoch = sum(len(r) * (len(r) - 1) for r in kept)
    total_steps = max(1, pairs_per_epoch * epochs)
    lr_floor = learning_rate * 1e-4

    epoch_losses: list[float] = []
    step = 0
    for _ in range(epochs):
        order = rng.permutation(len(kept))
        pairs: list[tuple[int, int]] = []
        for ri in order:
            rec = kept[ri]
            for c in rec:
                for o in rec:
                    if o != c:
                        pairs.append((c, o))
        if not pairs:
            epoch_losses.append(0.0)
            continue
        negs = rng.choice(v_size, size=(len(pairs), negatives), p=noise)
        loss = 0.0
        for (center, context), neg_row in zip(pairs, negs):
            lr = learning_rate * max(1e-4, 1.0 - step / total_steps)
            lr = max(lr, lr_floor)
            step += 1
            targets = np.empty(1 + negatives, dtype=np.intp)
            targets[0] = context
            targets[1:] = neg_row
            vec = w_in[center]
            out = w_out[targets]
            scores = out @ vec
            # -log sigma(s_pos) - sum log sigma(-s_neg), numerically stable
            loss += float(np.logaddexp(0.0, -scores[0]) + np.logaddexp(0.0, scores[1:]).sum())
            grad = _sigmoid(scores)
            grad[0] -= 1.0
            grad *= lr
            w_in[center] = vec - grad @ out
            np.add.at(w_out, targets, -np.outer(grad, vec))
        epoch_losses.append(loss / len(pairs))

    return EmbeddingModel(labels=vocab, vectors=w_in, epoch_losses=epoch_losses)


def nearest_categories(
    model: EmbeddingModel, seed_label: str, top_k: int = 300
) -> list[tuple[str, float]]:
    """Top-k labels by cosine similarity to the seed, seed excluded.

    Returns fewer entries when the vocabulary is smaller; similarity ties
    break lexicographically.

    Raises:
        KeyError: if the seed label is not in the vocabulary.
    """
    if seed_label not in model:
        raise KeyError(seed_label)
    query = model.vector(seed_label)
    norms = np.linalg.norm(model.vectors, axis=1)
    qn = np.linalg.norm(query)
    denom = norms * qn
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(denom > 0, model.vectors @ query / denom, 0.0)
    ranked = sorted(
        ((label, float(c)) for label, c in zip(model.labels, cos) if label != seed_label),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[: max(0, top_k)]


def save_model_tsv(model: EmbeddingModel, path: str) -> None:
    """One line per label: label, then the vector components, tab-separated."""
    with open(path, "w", encoding="utf-8") as fh:
        for label, vec in zip(model.labels, model.vectors):
            fh.write(label + "\t" + "\t".join(repr(float(x)) for x in vec) + "\n")


def load_model_tsv(path: str) -> EmbeddingModel:
    labels: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}: line {line_no}: expected label + vector")
            labels.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: inconsistent vector dimensions")
    return EmbeddingModel(labels=labels, vectors=np.asarray(rows, dtype=float))
