"""Training, inference, evaluation, and persistence for the sentiment model."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..errors import (
    ConfigError,
    DegenerateCorpus,
    EmptyCorpus,
    EmptyTestset,
    FileUnreadable,
    LengthMismatch,
    SchemaViolation,
)
from . import network
from .network import LstmParams, SentimentModel, softmax
from .text import LABEL_NAMES, LabeledExample, Vocab, build_vocab, tokenize


@dataclass(frozen=True)
class Hyperparams:
    d: int = 16
    h: int = 16
    learning_rate: float = 0.5
    epochs: int = 200
    seed: int = 0
    min_count: int = 1
    clip_norm: float | None = None  # global-norm clipping when set

    def __post_init__(self):
        for name in ("d", "h", "epochs", "min_count"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise ConfigError(f"clip_norm must be positive, got {self.clip_norm!r}")


def _encode_example(vocab: Vocab, text: str) -> list[int]:
    # empty or fully-unknown text still maps to one UNK step, so inference
    # never fails on arbitrary input
    return vocab.encode(tokenize(text)) or [0]


def init_sentiment_model(
    corpus, hp: Hyperparams, pretrained: dict[str, np.ndarray] | None = None
) -> SentimentModel:
    """Seeded scaled-uniform initialization over the corpus vocabulary.

    Weight matrices draw from U[-1/sqrt(fan_in), +1/sqrt(fan_in)]; biases
    start at zero except the forget gate's, which starts at one so early
    training can retain cell state. Pretrained vectors, when given, overwrite
    the rows of tokens they cover.
    """
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("corpus holds no examples")
    present = {e.label for e in corpus}
    absent = [LABEL_NAMES[k] for k in range(3) if k not in present]
    if absent:
        raise DegenerateCorpus(f"corpus lacks classes: {', '.join(absent)}")

    vocab = build_vocab((tokenize(e.text) for e in corpus), min_count=hp.min_count)
    rng = np.random.default_rng(hp.seed)
    d, h = hp.d, hp.h

    emb_bound = 1.0 / math.sqrt(d)
    gate_bound = 1.0 / math.sqrt(h + d)
    head_bound = 1.0 / math.sqrt(h)
    embeddings = rng.uniform(-emb_bound, emb_bound, size=(len(vocab), d))
    lstm = LstmParams(
        w_f=rng.uniform(-gate_bound, gate_bound, size=(h, h + d)),
        w_i=rng.uniform(-gate_bound, gate_bound, size=(h, h + d)),
        w_c=rng.uniform(-gate_bound, gate_bound, size=(h, h + d)),
        w_o=rng.uniform(-gate_bound, gate_bound, size=(h, h + d)),
        b_f=np.ones(h),
        b_i=np.zeros(h),
        b_c=np.zeros(h),
        b_o=np.zeros(h),
    )
    head_w = rng.uniform(-head_bound, head_bound, size=(3, h))
    head_b = np.zeros(3)

    if pretrained is not None:
        for token, vector in pretrained.items():
            if token not in vocab.token_to_index:
                continue
            vector = np.asarray(vector, dtype=float)
            if vector.shape != (d,):
                raise LengthMismatch(
                    f"pretrained vector for {token!r} has dimension "
                    f"{vector.size}, model expects {d}"
                )
            embeddings[vocab.token_to_index[token]] = vector

    return SentimentModel(
        vocab=vocab, embeddings=embeddings, lstm=lstm, head_w=head_w, head_b=head_b
    )


def train(
    corpus,
    hp: Hyperparams,
    pretrained: dict[str, np.ndarray] | None = None,
) -> SentimentModel:
    """Full-batch gradient descent on mean cross-entropy.

    Deterministic: identical (seed, corpus, hyperparameters) reproduce the
    model bit for bit. The per-epoch mean loss is kept on the model.
    """
    model = init_sentiment_model(corpus, hp, pretrained=pretrained)
    encoded = [(_encode_example(model.vocab, e.text), e.label) for e in corpus]
    n = len(encoded)
    trajectory: list[float] = []
    for _ in range(hp.epochs):
        total = network.zero_gradients(model)
        loss_sum = 0.0
        for ids, label in encoded:
            loss, grads = network.example_loss_and_grads(model, ids, label)
            loss_sum += loss
            for key, grad in grads.items():
                total[key] += grad
        mean = {k: g / n for k, g in total.items()}
        if hp.clip_norm is not None:
            mean = network.clip_gradients(mean, hp.clip_norm)
        model = network.apply_gradients(model, mean, hp.learning_rate)
        trajectory.append(loss_sum / n)
    return replace(model, loss_trajectory=tuple(trajectory))


def predict_proba(text: str, model: SentimentModel) -> np.ndarray:
    """Class probability vector (positive, negative, neutral)."""
    ids = _encode_example(model.vocab, text)
    return softmax(network.logits_for(model, ids))


def classify(text: str, model: SentimentModel) -> int:
    """Most probable class; exact ties go to the lowest index."""
    return int(np.argmax(predict_proba(text, model)))


def lexicon_classify(text: str, lexicon: dict[str, float]) -> int:
    """Polarity-lexicon baseline: sign of the summed token scores."""
    score = sum(lexicon.get(token, 0.0) for token in tokenize(text))
    if score > 0:
        return 0
    if score < 0:
        return 1
    return 2


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    confusion: np.ndarray  # rows = true class, columns = predicted
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    degenerate: tuple[str, ...]  # cells whose denominator was empty

    def summary_row(self, label: str) -> str:
        """Tab-separated percentage row: label, macro P, macro R, macro F1."""
        return (
            f"{label}\t{100 * self.macro_precision:.2f}"
            f"\t{100 * self.macro_recall:.2f}\t{100 * self.macro_f1:.2f}"
        )


def metrics_from_confusion(confusion: np.ndarray) -> EvaluationReport:
    """Per-class precision/recall/F1 plus macro averages and accuracy."""
    confusion = np.asarray(confusion, dtype=float)
    degenerate: list[str] = []
    precision = np.zeros(3)
    recall = np.zeros(3)
    f1 = np.zeros(3)
    for k in range(3):
        col = confusion[:, k].sum()
        row = confusion[k, :].sum()
        if col == 0:
            degenerate.append(f"precision[{k}]")
        else:
            precision[k] = confusion[k, k] / col
        if row == 0:
            degenerate.append(f"recall[{k}]")
        else:
            recall[k] = confusion[k, k] / row
        if precision[k] + recall[k] == 0:
            degenerate.append(f"f1[{k}]")
        else:
            f1[k] = 2 * precision[k] * recall[k] / (precision[k] + recall[k])
    return EvaluationReport(
        confusion=confusion,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        accuracy=float(np.trace(confusion) / confusion.sum()),
        degenerate=tuple(degenerate),
    )


def evaluate(model: SentimentModel, testset) -> EvaluationReport:
    testset = list(testset)
    if not testset:
        raise EmptyTestset("test set holds no examples")
    confusion = np.zeros((3, 3))
    for example in testset:
        confusion[example.label, classify(example.text, model)] += 1
    return metrics_from_confusion(confusion)


def split_train_test(corpus, seed: int, ratio: float = 0.8):
    """Seeded shuffle then ratio split (train, test)."""
    corpus = list(corpus)
    order = np.random.default_rng(seed).permutation(len(corpus))
    cut = int(round(ratio * len(corpus)))
    return [corpus[i] for i in order[:cut]], [corpus[i] for i in order[cut:]]


def kfold_rotation(corpus, seed: int, k: int = 5):
    """k rotations of one seeded shuffle; each fold serves as the test set once."""
    corpus = list(corpus)
    order = np.random.default_rng(seed).permutation(len(corpus))
    shuffled = [corpus[i] for i in order]
    folds = []
    for j in range(k):
        test = shuffled[j::k]
        train_part = [e for i, e in enumerate(shuffled) if i % k != j]
        folds.append((train_part, test))
    return folds


def save_model(model: SentimentModel, path) -> None:
    """Single-file dump: vocabulary, dimensions, every parameter array."""
    np.savez(
        path,
        tokens=np.array(model.vocab.index_to_token, dtype=np.str_),
        min_count=np.array([model.vocab.min_count]),
        embeddings=model.embeddings,
        w_f=model.lstm.w_f,
        w_i=model.lstm.w_i,
        w_c=model.lstm.w_c,
        w_o=model.lstm.w_o,
        b_f=model.lstm.b_f,
        b_i=model.lstm.b_i,
        b_c=model.lstm.b_c,
        b_o=model.lstm.b_o,
        head_w=model.head_w,
        head_b=model.head_b,
        loss_trajectory=np.array(model.loss_trajectory, dtype=float),
    )


def load_model(path) -> SentimentModel:
    try:
        with np.load(path) as blob:
            tokens = tuple(str(t) for t in blob["tokens"])
            vocab = Vocab(
                token_to_index={t: i for i, t in enumerate(tokens)},
                index_to_token=tokens,
                min_count=int(blob["min_count"][0]),
            )
            lstm = LstmParams(
                w_f=blob["w_f"],
                w_i=blob["w_i"],
                w_c=blob["w_c"],
                w_o=blob["w_o"],
                b_f=blob["b_f"],
                b_i=blob["b_i"],
                b_c=blob["b_c"],
                b_o=blob["b_o"],
            )
            return SentimentModel(
                vocab=vocab,
                embeddings=blob["embeddings"],
                lstm=lstm,
                head_w=blob["head_w"],
                head_b=blob["head_b"],
                loss_trajectory=tuple(float(x) for x in blob["loss_trajectory"]),
            )
    except OSError as err:
        raise FileUnreadable(f"cannot read model {path}: {err}") from None


def load_pretrained_embeddings(path) -> tuple[dict[str, np.ndarray], int]:
    """Word-vector text format: "<count> <dim>" header, then "token v1 .. vd"."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise FileUnreadable(f"cannot read {path}: {err}") from None
    if not lines:
        raise SchemaViolation(1, "header", "missing '<count> <dim>' header")
    head = lines[0].split()
    if len(head) != 2 or not all(p.isdigit() for p in head):
        raise SchemaViolation(1, "header", f"expected '<count> <dim>', got {lines[0]!r}")
    count, dim = int(head[0]), int(head[1])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise SchemaViolation(
            1, "header", f"header promises {count} vectors, file holds {len(body)}"
        )
    vectors: dict[str, np.ndarray] = {}
    for line_no, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != dim + 1:
            raise SchemaViolation(line_no, "vector", f"expected {dim} components")
        try:
            vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
        except ValueError:
            raise SchemaViolation(line_no, "vector", "non-numeric component") from None
    return vectors, dim


class SentimentClassifier(ClassifierMixin, BaseEstimator):
    """Estimator facade over train/classify for text lists."""

    def __init__(
        self,
        d: int = 16,
        h: int = 16,
        learning_rate: float = 0.5,
        epochs: int = 200,
        seed: int = 0,
        min_count: int = 1,
        clip_norm: float | None = None,
    ):
        self.d = d
        self.h = h
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.min_count = min_count
        self.clip_norm = clip_norm

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            d=self.d,
            h=self.h,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
            min_count=self.min_count,
            clip_norm=self.clip_norm,
        )

    def fit(self, X, y):
        texts = list(X)
        labels = list(y)
        if len(texts) != len(labels):
            raise LengthMismatch(f"{len(texts)} texts vs {len(labels)} labels")
        corpus = [LabeledExample(t, int(l)) for t, l in zip(texts, labels)]
        self.model_ = train(corpus, self._hyperparams())
        self.classes_ = np.array([0, 1, 2])
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                "this SentimentClassifier is not fitted yet; call fit first"
            )

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return np.array([classify(t, self.model_) for t in X], dtype=int)

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        return np.array([predict_proba(t, self.model_) for t in X])
