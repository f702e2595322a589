"""Sentiment subsystem tests: tokenization, LSTM cell, training, metrics.

The LSTM recurrence is checked against a test-local scalar trace and a
finite-difference gradient oracle — the implementation never sees either.
"""

import math

import numpy as np
import pytest

from opcrisis.errors import (
    DegenerateCorpus,
    EmptyCorpus,
    EmptySequence,
    EmptyTestset,
    LengthMismatch,
    SchemaViolation,
)
from opcrisis.sentiment import (
    Hyperparams,
    LabeledExample,
    LstmParams,
    SentimentClassifier,
    Vocab,
    build_vocab,
    classify,
    evaluate,
    grad_check,
    init_sentiment_model,
    kfold_rotation,
    lexicon_classify,
    load_model,
    load_pretrained_embeddings,
    lstm_forward,
    metrics_from_confusion,
    predict_proba,
    read_corpus,
    save_model,
    softmax,
    split_train_test,
    tokenize,
    train,
)
from opcrisis.sentiment import gradcheck as gradcheck_mod


class TestTokenize:
    def test_latin_runs(self):
        assert tokenize("Good car!") == ["good", "car"]

    def test_cjk_single_chars(self):
        assert tokenize("奔驰维权") == ["奔", "驰", "维", "权"]

    def test_empty(self):
        assert tokenize("") == []

    def test_mixed_scripts(self):
        assert tokenize("I爱car2") == ["i", "爱", "car2"]

    def test_punctuation_only(self):
        assert tokenize("!!! ...") == []

    def test_deterministic(self):
        text = "Mixed 输入 with CASE and 标点!"
        assert tokenize(text) == tokenize(text)


class TestVocab:
    def corpus_tokens(self):
        return [["a", "b", "a"], ["c", "a", "b"], ["d"]]

    def test_special_slots(self):
        vocab = build_vocab(self.corpus_tokens(), min_count=1)
        assert vocab.token_to_index[Vocab.UNK] == 0
        assert vocab.token_to_index[Vocab.PAD] == 1

    def test_frequency_then_lexicographic_order(self):
        vocab = build_vocab(self.corpus_tokens(), min_count=1)
        # counts: a=3, b=2, c=1, d=1 -> ties c, d sort lexicographically
        assert vocab.index_to_token[2:] == ("a", "b", "c", "d")

    def test_min_count_filters(self):
        vocab = build_vocab(self.corpus_tokens(), min_count=2)
        assert "c" not in vocab.token_to_index
        assert "a" in vocab.token_to_index

    def test_encode_unknown_to_unk(self):
        vocab = build_vocab(self.corpus_tokens(), min_count=1)
        assert vocab.encode(["a", "zzz"]) == [vocab.token_to_index["a"], 0]

    def test_bijective(self):
        vocab = build_vocab(self.corpus_tokens(), min_count=1)
        for idx, tok in enumerate(vocab.index_to_token):
            assert vocab.token_to_index[tok] == idx


def scalar_params():
    return LstmParams(
        w_f=np.array([[0.5, -0.3]]),
        w_i=np.array([[-0.2, 0.4]]),
        w_c=np.array([[0.3, 0.8]]),
        w_o=np.array([[0.6, -0.5]]),
        b_f=np.array([0.1]),
        b_i=np.array([-0.1]),
        b_c=np.array([0.2]),
        b_o=np.array([0.05]),
    )


def scalar_oracle(params: LstmParams, xs):
    """Step-by-step scalar evaluation of the gated recurrence."""

    def sig(a):
        return 1.0 / (1.0 + math.exp(-a))

    s, c = 0.0, 0.0
    for x in xs:
        f = sig(params.w_f[0, 0] * s + params.w_f[0, 1] * x + params.b_f[0])
        i = sig(params.w_i[0, 0] * s + params.w_i[0, 1] * x + params.b_i[0])
        g = math.tanh(params.w_c[0, 0] * s + params.w_c[0, 1] * x + params.b_c[0])
        o = sig(params.w_o[0, 0] * s + params.w_o[0, 1] * x + params.b_o[0])
        c = f * c + i * g
        s = o * math.tanh(c)
    return s, c


class TestLstmForward:
    def test_zero_params_zero_states(self):
        h, d = 3, 2
        zeros = LstmParams(
            w_f=np.zeros((h, h + d)),
            w_i=np.zeros((h, h + d)),
            w_c=np.zeros((h, h + d)),
            w_o=np.zeros((h, h + d)),
            b_f=np.zeros(h),
            b_i=np.zeros(h),
            b_c=np.zeros(h),
            b_o=np.zeros(h),
        )
        rng = np.random.default_rng(40)
        states, c_final = lstm_forward([rng.normal(size=d) for _ in range(4)], zeros)
        assert len(states) == 4
        for s in states:
            np.testing.assert_array_equal(s, np.zeros(h))
        np.testing.assert_array_equal(c_final, np.zeros(h))

    def test_scalar_hand_trace(self):
        params = scalar_params()
        xs = [0.7, -1.2]
        states, c_final = lstm_forward([np.array([x]) for x in xs], params)
        want_s, want_c = scalar_oracle(params, xs)
        assert abs(states[-1][0] - want_s) < 1e-12
        assert abs(c_final[0] - want_c) < 1e-12

    def test_scalar_trace_longer_sequence(self):
        params = scalar_params()
        rng = np.random.default_rng(41)
        xs = list(rng.normal(size=6))
        states, c_final = lstm_forward([np.array([x]) for x in xs], params)
        want_s, want_c = scalar_oracle(params, xs)
        assert abs(states[-1][0] - want_s) < 1e-12
        assert abs(c_final[0] - want_c) < 1e-12

    def test_empty_sequence(self):
        with pytest.raises(EmptySequence):
            lstm_forward([], scalar_params())

    def test_states_bounded(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            h, d = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            params = LstmParams(
                w_f=rng.normal(size=(h, h + d)) * 2,
                w_i=rng.normal(size=(h, h + d)) * 2,
                w_c=rng.normal(size=(h, h + d)) * 2,
                w_o=rng.normal(size=(h, h + d)) * 2,
                b_f=rng.normal(size=h),
                b_i=rng.normal(size=h),
                b_c=rng.normal(size=h),
                b_o=rng.normal(size=h),
            )
            seq = [rng.normal(size=d) * 3 for _ in range(int(rng.integers(1, 7)))]
            states, _ = lstm_forward(seq, params)
            for s in states:
                assert np.all(np.abs(s) < 1.0)


class TestSoftmax:
    def test_equal_logits(self):
        np.testing.assert_array_equal(softmax(np.zeros(3)), np.full(3, 1 / 3))

    def test_ln2_case(self):
        p = softmax(np.array([math.log(2.0), 0.0, 0.0]))
        np.testing.assert_allclose(p, [0.5, 0.25, 0.25], atol=1e-15)

    def test_sums_to_one(self):
        rng = np.random.default_rng(43)
        for scale in (1.0, 100.0, 1e6):
            for _ in range(20):
                p = softmax(rng.normal(size=3) * scale)
                assert abs(p.sum() - 1.0) <= 1e-12
                assert np.all(np.isfinite(p)) and np.all(p >= 0)

    def test_strictly_positive_within_exp_range(self):
        # positivity is only representable while exp(min - max) stays above
        # the float64 underflow threshold, i.e. logit spreads below ~700
        rng = np.random.default_rng(46)
        for scale in (1.0, 50.0, 150.0):
            for _ in range(20):
                u = rng.normal(size=3) * scale
                if u.max() - u.min() >= 600.0:
                    continue
                assert np.all(softmax(u) > 0)

    def test_shift_invariance(self):
        rng = np.random.default_rng(44)
        u = rng.normal(size=3)
        np.testing.assert_allclose(softmax(u + 17.5), softmax(u), atol=1e-12)


TINY_CORPUS = [
    LabeledExample("good great fine", 0),
    LabeledExample("bad awful poor", 1),
    LabeledExample("table chair door", 2),
    LabeledExample("great good", 0),
    LabeledExample("awful bad", 1),
    LabeledExample("door table", 2),
]


def tiny_model(seed=0, d=3, h=2):
    hp = Hyperparams(d=d, h=h, learning_rate=0.1, epochs=1, seed=seed, min_count=1)
    return init_sentiment_model(TINY_CORPUS, hp)


class TestPredictClassify:
    def test_proba_sums_to_one(self):
        model = tiny_model()
        for text in ("good great", "nothing known here", "坏"):
            p = predict_proba(text, model)
            assert abs(p.sum() - 1.0) <= 1e-12
            assert p.shape == (3,)

    def test_empty_and_oov_never_error(self):
        model = tiny_model()
        p_empty = predict_proba("", model)
        p_oov = predict_proba("zzz qqq", model)
        assert np.all(np.isfinite(p_empty)) and np.all(np.isfinite(p_oov))

    def test_oov_equals_unk(self):
        model = tiny_model()
        np.testing.assert_array_equal(
            predict_proba("zzzz", model), predict_proba("qqqq", model)
        )

    def test_tie_breaks_to_lowest_index(self):
        model = tiny_model()
        model.head_w[:] = 0.0
        model.head_b[:] = 0.0
        assert classify("good", model) == 0

    def test_logit_shift_keeps_class(self):
        model = tiny_model(seed=3)
        before = classify("good great fine", model)
        model.head_b += 42.0
        assert classify("good great fine", model) == before

    def test_deterministic(self):
        a = predict_proba("good 坏 table", tiny_model(seed=5))
        b = predict_proba("good 坏 table", tiny_model(seed=5))
        np.testing.assert_array_equal(a, b)


class TestTrain:
    def test_same_seed_bit_identical(self):
        hp = Hyperparams(d=4, h=3, learning_rate=0.2, epochs=5, seed=11, min_count=1)
        m1 = train(TINY_CORPUS, hp)
        m2 = train(TINY_CORPUS, hp)
        np.testing.assert_array_equal(m1.embeddings, m2.embeddings)
        np.testing.assert_array_equal(m1.lstm.w_f, m2.lstm.w_f)
        np.testing.assert_array_equal(m1.head_w, m2.head_w)
        assert m1.loss_trajectory == m2.loss_trajectory

    def test_seed_changes_model(self):
        hp1 = Hyperparams(d=4, h=3, learning_rate=0.2, epochs=2, seed=1, min_count=1)
        hp2 = Hyperparams(d=4, h=3, learning_rate=0.2, epochs=2, seed=2, min_count=1)
        assert not np.array_equal(
            train(TINY_CORPUS, hp1).embeddings, train(TINY_CORPUS, hp2).embeddings
        )

    def test_empty_corpus(self):
        hp = Hyperparams(d=2, h=2, learning_rate=0.1, epochs=1, seed=0, min_count=1)
        with pytest.raises(EmptyCorpus):
            train([], hp)

    def test_missing_class(self):
        hp = Hyperparams(d=2, h=2, learning_rate=0.1, epochs=1, seed=0, min_count=1)
        with pytest.raises(DegenerateCorpus):
            train([LabeledExample("a", 0), LabeledExample("b", 1)], hp)

    def test_loss_trajectory_recorded(self):
        hp = Hyperparams(d=3, h=2, learning_rate=0.2, epochs=7, seed=0, min_count=1)
        model = train(TINY_CORPUS, hp)
        assert len(model.loss_trajectory) == 7
        assert all(math.isfinite(x) for x in model.loss_trajectory)

    def test_forget_bias_starts_at_one(self):
        model = tiny_model(seed=9)
        np.testing.assert_array_equal(model.lstm.b_f, np.ones_like(model.lstm.b_f))
        np.testing.assert_array_equal(model.lstm.b_i, np.zeros_like(model.lstm.b_i))

    def test_single_step_does_not_increase_loss(self):
        from opcrisis.sentiment.network import example_loss, example_loss_and_grads, apply_gradients

        model = tiny_model(seed=13, d=4, h=3)
        for example in TINY_CORPUS[:3]:
            ids = model.vocab.encode(tokenize(example.text)) or [0]
            before, grads = example_loss_and_grads(model, ids, example.label)
            stepped = apply_gradients(model, grads, learning_rate=1e-3)
            after = example_loss(stepped, ids, example.label)
            assert after <= before + 1e-12

    def test_clip_norm_flag(self):
        hp = Hyperparams(
            d=3, h=2, learning_rate=0.5, epochs=3, seed=4, min_count=1, clip_norm=5.0
        )
        model = train(TINY_CORPUS, hp)
        assert len(model.loss_trajectory) == 3

    def test_hyperparams_validate(self):
        with pytest.raises(Exception):
            Hyperparams(d=0, h=2, learning_rate=0.1, epochs=1, seed=0, min_count=1)
        with pytest.raises(Exception):
            Hyperparams(d=2, h=2, learning_rate=-0.1, epochs=1, seed=0, min_count=1)


class TestToyCorpus:
    def test_bundled_corpus_is_learnable(self):
        from importlib.resources import files

        corpus = read_corpus(files("opcrisis.data") / "toy_sentiment.tsv")
        assert len(corpus) == 30
        assert sorted(e.label for e in corpus) == [0] * 10 + [1] * 10 + [2] * 10
        hp = Hyperparams(d=16, h=16, learning_rate=0.5, epochs=200, seed=0, min_count=1)
        model = train(corpus, hp)
        acc = sum(classify(e.text, model) == e.label for e in corpus) / len(corpus)
        assert acc >= 0.95


class TestGradCheck:
    def test_random_small_models(self):
        rng = np.random.default_rng(45)
        for trial in range(5):
            d, h = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            hp = Hyperparams(
                d=d, h=h, learning_rate=0.1, epochs=1, seed=trial, min_count=1
            )
            model = init_sentiment_model(TINY_CORPUS, hp)
            example = TINY_CORPUS[trial % len(TINY_CORPUS)]
            assert grad_check(model, example) <= 1e-4

    def test_sabotaged_gradient_detected(self, monkeypatch):
        from opcrisis.sentiment import network

        real = network.example_loss_and_grads

        def crooked(model, ids, label):
            loss, grads = real(model, ids, label)
            grads["w_f"] = grads["w_f"] + 0.5
            return loss, grads

        monkeypatch.setattr(gradcheck_mod.network, "example_loss_and_grads", crooked)
        model = tiny_model(seed=1)
        assert grad_check(model, TINY_CORPUS[0]) > 1e-2

    def test_zero_params_finite(self):
        model = tiny_model(seed=2)
        model.embeddings[:] = 0.0
        for name in ("w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o"):
            getattr(model.lstm, name)[:] = 0.0
        model.head_w[:] = 0.0
        model.head_b[:] = 0.0
        err = grad_check(model, TINY_CORPUS[0])
        assert math.isfinite(err)
        assert err <= 1e-4


class TestEvaluate:
    def test_hand_confusion(self):
        confusion = np.array([[5, 1, 0], [0, 4, 2], [1, 0, 5]], dtype=float)
        report = metrics_from_confusion(confusion)
        np.testing.assert_allclose(report.precision, [5 / 6, 4 / 5, 5 / 7], atol=1e-12)
        np.testing.assert_allclose(report.recall, [5 / 6, 2 / 3, 5 / 6], atol=1e-12)
        np.testing.assert_allclose(report.f1, [5 / 6, 8 / 11, 10 / 13], atol=1e-12)
        assert abs(report.accuracy - 7 / 9) < 1e-12
        assert abs(report.macro_f1 - (5 / 6 + 8 / 11 + 10 / 13) / 3) < 1e-12
        assert report.degenerate == ()

    def test_perfect_predictions(self):
        report = metrics_from_confusion(np.diag([4.0, 4.0, 4.0]))
        np.testing.assert_array_equal(report.precision, [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(report.recall, [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(report.f1, [1.0, 1.0, 1.0])
        assert report.accuracy == 1.0

    def test_single_class_predictor(self):
        confusion = np.array([[5, 0, 0], [5, 0, 0], [5, 0, 0]], dtype=float)
        report = metrics_from_confusion(confusion)
        np.testing.assert_allclose(report.recall, [1.0, 0.0, 0.0])
        assert abs(report.precision[0] - 1 / 3) < 1e-12
        assert report.precision[1] == 0.0 and report.precision[2] == 0.0
        assert "precision[1]" in report.degenerate
        assert "f1[2]" in report.degenerate

    def test_evaluate_end_to_end(self):
        model = tiny_model(seed=6)
        report = evaluate(model, TINY_CORPUS)
        total = report.confusion.sum()
        assert total == len(TINY_CORPUS)
        assert abs(report.accuracy - np.trace(report.confusion) / total) < 1e-12

    def test_empty_testset(self):
        with pytest.raises(EmptyTestset):
            evaluate(tiny_model(), [])

    def test_summary_row_format(self):
        report = metrics_from_confusion(np.diag([2.0, 2.0, 2.0]))
        row = report.summary_row("LSTM")
        assert row == "LSTM\t100.00\t100.00\t100.00"


class TestLexicon:
    LEX = {"good": 1.0, "bad": -1.0, "fine": 1.0}

    def test_positive(self):
        assert lexicon_classify("good day", self.LEX) == 0

    def test_negative(self):
        assert lexicon_classify("bad bad good", self.LEX) == 1

    def test_no_hits_neutral(self):
        assert lexicon_classify("table chair", self.LEX) == 2

    def test_balanced_neutral(self):
        assert lexicon_classify("good bad", self.LEX) == 2


class TestSplit:
    def corpus(self):
        return [LabeledExample(f"t{i}", i % 3) for i in range(20)]

    def test_ratio_and_partition(self):
        train_set, test_set = split_train_test(self.corpus(), seed=7)
        assert len(train_set) == 16 and len(test_set) == 4
        combined = sorted(e.text for e in train_set + test_set)
        assert combined == sorted(e.text for e in self.corpus())

    def test_seeded_determinism(self):
        a = split_train_test(self.corpus(), seed=7)
        b = split_train_test(self.corpus(), seed=7)
        assert a == b
        c = split_train_test(self.corpus(), seed=8)
        assert a != c

    def test_kfold_rotation(self):
        folds = kfold_rotation(self.corpus(), seed=7, k=5)
        assert len(folds) == 5
        all_test_texts = []
        for train_set, test_set in folds:
            assert len(test_set) == 4 and len(train_set) == 16
            assert not {e.text for e in train_set} & {e.text for e in test_set}
            all_test_texts.extend(e.text for e in test_set)
        assert sorted(all_test_texts) == sorted(e.text for e in self.corpus())


class TestCorpusFile:
    def test_read(self, tmp_path):
        path = tmp_path / "corpus.tsv"
        path.write_text("pos\tgreat stuff\nneg\tawful mess\nneu\tplain note\n", encoding="utf-8")
        corpus = read_corpus(path)
        assert corpus == [
            LabeledExample("great stuff", 0),
            LabeledExample("awful mess", 1),
            LabeledExample("plain note", 2),
        ]

    def test_bad_label(self, tmp_path):
        path = tmp_path / "corpus.tsv"
        path.write_text("pos\tok\nwat\thuh\n", encoding="utf-8")
        with pytest.raises(SchemaViolation) as exc:
            read_corpus(path)
        assert "line 2" in str(exc.value)

    def test_missing_tab(self, tmp_path):
        path = tmp_path / "corpus.tsv"
        path.write_text("pos only\n", encoding="utf-8")
        with pytest.raises(SchemaViolation):
            read_corpus(path)


class TestModelIO:
    def test_round_trip_bit_exact(self, tmp_path):
        hp = Hyperparams(d=4, h=3, learning_rate=0.3, epochs=4, seed=21, min_count=1)
        model = train(TINY_CORPUS, hp)
        path = tmp_path / "model.npz"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.vocab.index_to_token == model.vocab.index_to_token
        np.testing.assert_array_equal(loaded.embeddings, model.embeddings)
        for name in ("w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o"):
            np.testing.assert_array_equal(
                getattr(loaded.lstm, name), getattr(model.lstm, name)
            )
        np.testing.assert_array_equal(loaded.head_w, model.head_w)
        np.testing.assert_array_equal(loaded.head_b, model.head_b)
        np.testing.assert_array_equal(
            predict_proba("good 坏 zzz", loaded), predict_proba("good 坏 zzz", model)
        )


class TestPretrainedEmbeddings:
    def write_vectors(self, tmp_path, rows, dim):
        path = tmp_path / "vectors.txt"
        lines = [f"{len(rows)} {dim}"]
        for token, vec in rows:
            lines.append(token + " " + " ".join(repr(v) for v in vec))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_loader(self, tmp_path):
        path = self.write_vectors(tmp_path, [("good", [0.1, 0.2]), ("bad", [0.3, 0.4])], 2)
        vectors, dim = load_pretrained_embeddings(path)
        assert dim == 2
        np.testing.assert_array_equal(vectors["good"], [0.1, 0.2])

    def test_header_mismatch(self, tmp_path):
        path = self.write_vectors(tmp_path, [("good", [0.1, 0.2])], 2)
        text = path.read_text().replace("1 2", "5 2")
        path.write_text(text)
        with pytest.raises(SchemaViolation):
            load_pretrained_embeddings(path)

    def test_init_uses_pretrained_rows(self, tmp_path):
        path = self.write_vectors(
            tmp_path, [("good", [0.5, -0.5, 0.25]), ("zzz", [9.0, 9.0, 9.0])], 3
        )
        vectors, dim = load_pretrained_embeddings(path)
        hp = Hyperparams(d=dim, h=2, learning_rate=0.1, epochs=1, seed=0, min_count=1)
        model = init_sentiment_model(TINY_CORPUS, hp, pretrained=vectors)
        row = model.vocab.token_to_index["good"]
        np.testing.assert_array_equal(model.embeddings[row], [0.5, -0.5, 0.25])
        # token absent from the corpus vocabulary is simply unused
        assert "zzz" not in model.vocab.token_to_index

    def test_dim_mismatch(self, tmp_path):
        path = self.write_vectors(tmp_path, [("good", [0.1, 0.2])], 2)
        vectors, dim = load_pretrained_embeddings(path)
        hp = Hyperparams(d=4, h=2, learning_rate=0.1, epochs=1, seed=0, min_count=1)
        with pytest.raises(LengthMismatch):
            init_sentiment_model(TINY_CORPUS, hp, pretrained=vectors)


class TestSentimentClassifier:
    def test_fit_predict(self):
        est = SentimentClassifier(d=4, h=3, epochs=30, learning_rate=0.5, seed=0)
        texts = [e.text for e in TINY_CORPUS]
        labels = [e.label for e in TINY_CORPUS]
        est.fit(texts, labels)
        preds = est.predict(texts)
        assert preds.shape == (len(texts),)
        assert set(preds) <= {0, 1, 2}
        probs = est.predict_proba(texts)
        assert probs.shape == (len(texts), 3)
        np.testing.assert_allclose(probs.sum(axis=1), np.ones(len(texts)), atol=1e-12)

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            SentimentClassifier().predict(["hello"])

    def test_get_params_round_trip(self):
        est = SentimentClassifier(d=8, h=4, epochs=10)
        params = est.get_params()
        clone = SentimentClassifier(**params)
        assert clone.d == 8 and clone.h == 4 and clone.epochs == 10

    def test_mismatched_lengths(self):
        est = SentimentClassifier()
        with pytest.raises(LengthMismatch):
            est.fit(["a", "b"], [0])
