"""Three-class text sentiment: tokenizer, recurrent classifier, metrics."""

from .classifier import (
    EvaluationReport,
    Hyperparams,
    SentimentClassifier,
    classify,
    evaluate,
    init_sentiment_model,
    kfold_rotation,
    lexicon_classify,
    load_model,
    load_pretrained_embeddings,
    metrics_from_confusion,
    predict_proba,
    save_model,
    split_train_test,
    train,
)
from .gradcheck import grad_check
from .network import LstmParams, SentimentModel, lstm_forward, softmax
from .text import LabeledExample, Vocab, build_vocab, read_corpus, tokenize

__all__ = [
    "EvaluationReport",
    "Hyperparams",
    "LabeledExample",
    "LstmParams",
    "SentimentClassifier",
    "SentimentModel",
    "Vocab",
    "build_vocab",
    "classify",
    "evaluate",
    "grad_check",
    "init_sentiment_model",
    "kfold_rotation",
    "lexicon_classify",
    "load_model",
    "load_pretrained_embeddings",
    "lstm_forward",
    "metrics_from_confusion",
    "predict_proba",
    "read_corpus",
    "save_model",
    "softmax",
    "split_train_test",
    "tokenize",
    "train",
]
