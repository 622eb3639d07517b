"""
embedder.py
===========

Word2vec training over a walk corpus: skip-gram or CBOW with negative
sampling, written against numpy.

Design principles
-----------------
- Vocabulary indices are dense and deterministic: count descending, then
  token.
- One update per center token: all (context, negative) targets of a center
  are scored in one batch and applied with `np.add.at`, so repeated
  indices accumulate.
- `negative_sampling_grads` is the single source of the loss and its
  gradients; training and the gradient checker share it.
- Determinism: one worker + fixed seed gives bitwise-identical vectors.
  Several workers share the matrices without locks (Hogwild), so their
  result depends on thread scheduling.
"""

from __future__ import annotations

import threading
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt
from loguru import logger
from scipy.special import expit

from kgstroll.core.errors import ConfigurationError, KgStrollError
from kgstroll.schema import EmbedderMode, EmbedderParams
from kgstroll.services.walker import Walk
from kgstroll.utils.random_source import RandomSource

__all__ = [
    "EmbedderConfigError",
    "TrainingDivergedError",
    "UnknownTokenError",
    "VocabEntry",
    "Corpus",
    "build_vocab",
    "NegativeSampler",
    "negative_sampling_grads",
    "EmbeddingModel",
    "train",
]

FloatArray = npt.NDArray[np.float64]
MIN_LR_FRACTION = 1e-4
NEGATIVE_POWER = 0.75


# Error classes
class EmbedderConfigError(ConfigurationError):
    """Hyperparameters or corpus the embedder cannot train on."""


class TrainingDivergedError(KgStrollError, ArithmeticError):
    """Loss or vectors became non-finite."""

    def __init__(self, epoch: int, message: str | None = None):
        super().__init__(message or f"training diverged in epoch {epoch}")
        self.epoch = epoch


class UnknownTokenError(KgStrollError, KeyError):
    """Token has no vector in the model."""

    def __init__(self, token: str):
        super().__init__(token)
        self.token = token

    def __str__(self) -> str:
        return f"token not in vocabulary: {self.token}"


# --------------------------------------------------------
# Vocabulary
# --------------------------------------------------------
@dataclass(frozen=True, slots=True)
class VocabEntry:
    index: int
    count: int


@dataclass(slots=True)
class Corpus:
    """Training sentences and the vocabulary built from them."""

    sentences: list[tuple[str, ...]]
    vocab: dict[str, VocabEntry]
    total_tokens: int
    index_to_token: list[str] = field(default_factory=list)

    @property
    def counts(self) -> npt.NDArray[np.int64]:
        return np.array([self.vocab[t].count for t in self.index_to_token], dtype=np.int64)

    @property
    def retained_tokens(self) -> int:
        return sum(e.count for e in self.vocab.values())

    def encode(self) -> list[npt.NDArray[np.intp]]:
        """Sentences as index arrays; tokens below min_count are dropped."""
        encoded = []
        for sentence in self.sentences:
            ids = [self.vocab[t].index for t in sentence if t in self.vocab]
            encoded.append(np.array(ids, dtype=np.intp))
        return encoded


def build_vocab(walks: Iterable[Walk | Sequence[str]], min_count: int = 1) -> Corpus:
    """
    Count tokens and index those seen at least `min_count` times.

    Raises:
        EmbedderConfigError: no token survives the min_count filter
    """
    if min_count < 1:
        raise EmbedderConfigError(f"min_count must be >= 1, got {min_count}")
    sentences = [w.tokens if isinstance(w, Walk) else tuple(w) for w in walks]
    counts: Counter[str] = Counter()
    for sentence in sentences:
        counts.update(sentence)

    kept = sorted(
        ((t, c) for t, c in counts.items() if c >= min_count),
        key=lambda item: (-item[1], item[0]),
    )
    if not kept:
        raise EmbedderConfigError(
            f"empty vocabulary: no token occurs at least min_count={min_count} times"
        )
    vocab = {t: VocabEntry(i, c) for i, (t, c) in enumerate(kept)}
    logger.debug(
        f"event=vocab_built sentences={len(sentences)} tokens={sum(counts.values())} "
        f"vocab={len(vocab)} dropped={len(counts) - len(vocab)}"
    )
    return Corpus(sentences, vocab, sum(counts.values()), [t for t, _ in kept])


class NegativeSampler:
    """Noise distribution proportional to count ** 0.75."""

    def __init__(self, counts: npt.ArrayLike, power: float = NEGATIVE_POWER) -> None:
        weights = np.asarray(counts, dtype=np.float64) ** power
        if weights.size == 0 or not weights.sum() > 0:
            raise EmbedderConfigError("negative sampling needs at least one positive count")
        self.probabilities: FloatArray = weights / weights.sum()
        self._cumulative = np.cumsum(weights)

    def draw(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> npt.NDArray[np.intp]:
        u = rng.random(size) * self._cumulative[-1]
        picks = np.searchsorted(self._cumulative, u, side="right")
        return np.minimum(picks, len(self._cumulative) - 1)

    def __len__(self) -> int:
        return len(self.probabilities)


def _log_sigmoid(x: FloatArray) -> FloatArray:
    return -np.logaddexp(0.0, -x)


def negative_sampling_grads(
    center: FloatArray,
    outputs: FloatArray,
    labels: FloatArray,
    mask: FloatArray | None = None,
) -> tuple[float, FloatArray, FloatArray]:
    """
    Loss and gradients of the negative-sampling objective.

    loss = -sum(mask * log sigmoid(sign * outputs @ center)), sign = +1 for
    the positive target (label 1) and -1 for negatives (label 0).

    Args:
        center: (d,) input vector (center token, or CBOW context mean)
        outputs: (..., t, d) output vectors of the scored targets
        labels: (t,) 1.0 for positive targets, 0.0 for negatives
        mask: optional (..., t) weights; 0 drops a target

    Returns:
        (loss, d loss / d center, d loss / d outputs)
    """
    scores = outputs @ center
    sign = 2.0 * labels - 1.0
    weight = np.ones_like(scores) if mask is None else mask
    loss = float(-(weight * _log_sigmoid(sign * scores)).sum())
    coef = weight * (expit(scores) - labels)
    grad_center = np.tensordot(coef, outputs, axes=(tuple(range(coef.ndim)), tuple(range(coef.ndim))))
    grad_outputs = coef[..., None] * center
    return loss, grad_center, grad_outputs


# --------------------------------------------------------
# Model
# --------------------------------------------------------
class EmbeddingModel:
    """Vocabulary plus one input and one output vector per token."""

    def __init__(
        self,
        index_to_token: Sequence[str],
        vectors: npt.NDArray[np.float32],
        output_vectors: npt.NDArray[np.float32] | None = None,
        counts: Sequence[int] | None = None,
        params: EmbedderParams | None = None,
    ) -> None:
        if vectors.ndim != 2 or vectors.shape[0] != len(index_to_token):
            raise EmbedderConfigError("vector matrix does not match the vocabulary")
        self.index_to_token = list(index_to_token)
        self.vocab = {t: i for i, t in enumerate(self.index_to_token)}
        self.vectors = vectors
        self.output_vectors = (
            output_vectors if output_vectors is not None else np.zeros_like(vectors)
        )
        self.counts = list(counts) if counts is not None else [0] * len(self.index_to_token)
        self.params = params or EmbedderParams(dimension=vectors.shape[1])
        self.epoch_losses: list[float] = []

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def get_vector(self, token: str) -> npt.NDArray[np.float32]:
        """Copy of the token's input vector."""
        index = self.vocab.get(token)
        if index is None:
            raise UnknownTokenError(token)
        return self.vectors[index].copy()

    def similarity(self, a: str, b: str) -> float:
        """Cosine similarity; 0.0 when either vector is zero."""
        va = self.get_vector(a).astype(np.float64)
        vb = self.get_vector(b).astype(np.float64)
        norm = float(np.linalg.norm(va) * np.linalg.norm(vb))
        return float(va @ vb) / norm if norm > 0 else 0.0

    def save_word2vec_format(self, path: Path) -> None:
        """`<vocab> <dim>` header, then `token v1 ... vd` in index order."""
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(self.index_to_token)} {self.dimension}\n")
            for token, row in zip(self.index_to_token, self.vectors, strict=True):
                fh.write(token + " " + " ".join(f"{x:.9g}" for x in row) + "\n")
        logger.info(f"event=vectors_written path={path} vocab={len(self)} dim={self.dimension}")

    @classmethod
    def load_word2vec_format(cls, path: Path) -> EmbeddingModel:
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ValueError(f"{path}: expected '<vocab> <dim>' header")
            size, dim = int(header[0]), int(header[1])
            tokens: list[str] = []
            rows = np.empty((size, dim), dtype=np.float32)
            for i, line in enumerate(fh):
                if i >= size:
                    raise ValueError(f"{path}: more rows than the header declares")
                parts = line.rstrip("\n").split(" ")
                if len(parts) != dim + 1:
                    raise ValueError(f"{path}: row {i + 2} has {len(parts) - 1} values")
                tokens.append(parts[0])
                rows[i] = np.array(parts[1:], dtype=np.float32)
        if len(tokens) != size:
            raise ValueError(f"{path}: header declares {size} rows, found {len(tokens)}")
        return cls(tokens, rows, params=EmbedderParams(dimension=dim))

    def __contains__(self, token: object) -> bool:
        return token in self.vocab

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __repr__(self) -> str:
        return f"EmbeddingModel(vocab={len(self)}, dimension={self.dimension})"


# --------------------------------------------------------
# Training
# --------------------------------------------------------
def _keep_probabilities(counts: npt.NDArray[np.int64], subsample: float) -> FloatArray:
    """word2vec downsampling: keep = (sqrt(c / (t*N)) + 1) * (t*N) / c, capped at 1."""
    if subsample <= 0:
        return np.ones(len(counts))
    threshold = subsample * counts.sum()
    c = counts.astype(np.float64)
    return np.minimum(1.0, (np.sqrt(c / threshold) + 1.0) * threshold / c)


@dataclass(slots=True)
class _Trainer:
    params: EmbedderParams
    vectors: npt.NDArray[np.float32]
    outputs: npt.NDArray[np.float32]
    noise: NegativeSampler
    keep: FloatArray
    total_work: int
    workers: int = 1

    def learning_rate(self, processed: int) -> float:
        """
        Linear decay from the initial rate down to 1e-4 of it.

        Progress counts scanned center tokens out of `total_work` (epochs x
        retained tokens), not (center, context) training pairs.
        """
        initial = self.params.initial_lr
        progress = min(1.0, processed / max(1, self.total_work))
        return max(initial * MIN_LR_FRACTION, initial - (initial - initial * MIN_LR_FRACTION) * progress)

    def run_sentences(
        self,
        sentences: Sequence[npt.NDArray[np.intp]],
        rng: np.random.Generator,
        offset: int,
    ) -> tuple[float, int, int]:
        """Train on a sentence shard; returns (loss, pairs, tokens scanned)."""
        k = self.params.negatives
        labels = np.zeros(k + 1)
        labels[0] = 1.0
        loss_sum, pairs, scanned = 0.0, 0, 0
        for ids in sentences:
            if len(ids) == 0:
                continue
            kept = ids[rng.random(len(ids)) < self.keep[ids]]
            windows = rng.integers(1, self.params.window + 1, size=len(kept))
            base = scanned
            # subsampled tokens still count toward learning-rate progress
            scanned += len(ids)
            for pos, word in enumerate(kept):
                lr = self.learning_rate(offset + (base + pos) * self.workers)
                b = int(windows[pos])
                context = np.concatenate((kept[max(0, pos - b) : pos], kept[pos + 1 : pos + 1 + b]))
                if context.size == 0:
                    continue
                if self.params.mode is EmbedderMode.SKIPGRAM:
                    loss_sum += self._skipgram_step(int(word), context, labels, lr, rng)
                    pairs += context.size
                else:
                    loss_sum += self._cbow_step(int(word), context, labels, lr, rng)
                    pairs += 1
        return loss_sum, pairs, scanned

    def _targets(self, positives: npt.NDArray[np.intp], rng: np.random.Generator) -> tuple[npt.NDArray[np.intp], FloatArray]:
        k = self.params.negatives
        negatives = self.noise.draw(rng, (positives.size, k))
        targets = np.concatenate((positives[:, None], negatives), axis=1)
        mask = np.ones(targets.shape)
        mask[:, 1:] = negatives != positives[:, None]
        return targets, mask

    def _skipgram_step(
        self,
        word: int,
        context: npt.NDArray[np.intp],
        labels: FloatArray,
        lr: float,
        rng: np.random.Generator,
    ) -> float:
        targets, mask = self._targets(context, rng)
        center = self.vectors[word].astype(np.float64)
        outputs = self.outputs[targets].astype(np.float64)
        loss, grad_center, grad_outputs = negative_sampling_grads(center, outputs, labels, mask)
        np.add.at(self.outputs, targets, (-lr * grad_outputs).astype(np.float32))
        self.vectors[word] -= (lr * grad_center).astype(np.float32)
        return loss

    def _cbow_step(
        self,
        word: int,
        context: npt.NDArray[np.intp],
        labels: FloatArray,
        lr: float,
        rng: np.random.Generator,
    ) -> float:
        targets, mask = self._targets(np.array([word], dtype=np.intp), rng)
        hidden = self.vectors[context].astype(np.float64).mean(axis=0)
        outputs = self.outputs[targets[0]].astype(np.float64)
        loss, grad_hidden, grad_outputs = negative_sampling_grads(hidden, outputs, labels, mask[0])
        np.add.at(self.outputs, targets[0], (-lr * grad_outputs).astype(np.float32))
        # every context vector receives the full hidden-layer error
        np.add.at(self.vectors, context, (-lr * grad_hidden).astype(np.float32))
        return loss


def train(corpus: Corpus, params: EmbedderParams | None = None) -> EmbeddingModel:
    """
    Train vectors for every vocabulary token.

    Raises:
        EmbedderConfigError: fewer than two vocabulary tokens
        TrainingDivergedError: non-finite loss or vectors after an epoch
    """
    params = params or EmbedderParams()
    size = len(corpus.vocab)
    if size < 2:
        raise EmbedderConfigError(f"training needs at least 2 vocabulary tokens, got {size}")

    dim = params.dimension
    init = RandomSource(params.seed, 0)
    vectors = init.uniform(-0.5 / dim, 0.5 / dim, (size, dim)).astype(np.float32)
    outputs = np.zeros((size, dim), dtype=np.float32)
    counts = corpus.counts
    encoded = corpus.encode()
    retained = int(sum(len(ids) for ids in encoded))
    workers = min(params.workers, max(1, len(encoded)))

    trainer = _Trainer(
        params=params,
        vectors=vectors,
        outputs=outputs,
        noise=NegativeSampler(counts),
        keep=_keep_probabilities(counts, params.subsample),
        total_work=params.epochs * retained,
        workers=workers,
    )
    model = EmbeddingModel(corpus.index_to_token, vectors, outputs, counts.tolist(), params)
    logger.info(
        f"event=training_started mode={params.mode} vocab={size} dim={dim} "
        f"sentences={len(encoded)} epochs={params.epochs} workers={workers}"
    )

    streams = [RandomSource(params.seed, w + 1).generator for w in range(workers)]
    shards = [encoded[w::workers] for w in range(workers)]
    for epoch in range(1, params.epochs + 1):
        offset = (epoch - 1) * retained
        if workers == 1:
            loss_sum, pairs, _ = trainer.run_sentences(encoded, streams[0], offset)
        else:
            loss_sum, pairs = _run_hogwild(trainer, shards, streams, offset)

        epoch_loss = loss_sum / pairs if pairs else 0.0
        if not np.isfinite(epoch_loss) or not np.isfinite(vectors).all():
            raise TrainingDivergedError(epoch)
        model.epoch_losses.append(epoch_loss)
        logger.info(
            f"event=epoch_done epoch={epoch} loss={epoch_loss:.6f} pairs={pairs} "
            f"lr={trainer.learning_rate(epoch * retained):.6f}"
        )
    return model


def _run_hogwild(
    trainer: _Trainer,
    shards: list[list[npt.NDArray[np.intp]]],
    streams: list[np.random.Generator],
    offset: int,
) -> tuple[float, int]:
    results: list[tuple[float, int, int]] = [(0.0, 0, 0)] * len(shards)
    errors: list[BaseException] = []

    def work(w: int) -> None:
        try:
            results[w] = trainer.run_sentences(shards[w], streams[w], offset)
        except BaseException as e:  # surfaced after join
            errors.append(e)

    threads = [
        threading.Thread(target=work, args=(w,), name=f"embedder-{w}") for w in range(len(shards))
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return sum(r[0] for r in results), sum(r[1] for r in results)
