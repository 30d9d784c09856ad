"""Smoke tests for the python bindings; the heavy checks live in the C++ suites."""

import math

import pytest

import tagpred


@pytest.fixture(scope="module")
def taxonomy():
    return tagpred.TaxonomyMap.builtin()


@pytest.fixture(scope="module")
def corpus(taxonomy):
    return tagpred.generate_synthetic(150, taxonomy, 11)


def test_synthetic_and_stats(taxonomy, corpus):
    assert len(corpus) == 150
    stats = tagpred.dataset_stats(corpus)
    assert stats.problem_count == 150
    assert 1.2 <= stats.avg_tags_per_problem <= 2.0
    again = tagpred.generate_synthetic(150, taxonomy, 11)
    assert again.to_json() == corpus.to_json()


def test_clean_text_and_merge():
    assert tagpred.clean_text("<p>Hello</p>") == "hello"
    assert tagpred.clean_text("sum $x_i$ of 12 items") == "sum items"
    assert tagpred.merge_fields("Two Sum", "find pairs") == "Two Sum find pairs"
    cleaned = tagpred.clean_text("The <b>Quick</b> brown FOX!")
    assert tagpred.clean_text(cleaned) == cleaned
    assert len(tagpred.default_stopwords()) == 174


def test_taxonomy_round_trip(taxonomy):
    d = tagpred.Dataset.from_json('[{"text":"x","tags":["ternary search"]}]')
    mapped = tagpred.apply_taxonomy(d, taxonomy)
    assert mapped.problems[0].tags == ["Search and Binary Search"]
    bits = tagpred.encode_labels(["Dynamic Programming"], taxonomy)
    assert bits == [1, 0, 0, 0, 0, 0, 0, 0, 0]
    with pytest.raises(tagpred.DataError):
        tagpred.apply_taxonomy(tagpred.Dataset.from_json('[{"text":"x","tags":["???"]}]'), taxonomy)


def test_tfidf_norm(corpus):
    vocab = tagpred.Vocabulary.build(corpus)
    model = tagpred.TfidfModel.fit(corpus, vocab)
    vec = model.transform(corpus.problems[0].text, vocab)
    norm = math.sqrt(sum(x * x for x in vec))
    assert norm == pytest.approx(1.0, abs=1e-9)


def test_metrics():
    truth = [[1, 0, 0, 0, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0, 0, 0, 0]]
    pred = [[1, 0, 0, 0, 0, 0, 0, 0, 0], [0, 1, 1, 0, 0, 0, 0, 0, 0]]
    whs = tagpred.weighted_hamming_score(pred, truth)
    assert whs == pytest.approx(1.0 - (0.82 / 3.0 + 0.18 / 15.0), abs=1e-12)
    assert tagpred.avg_ones(pred) == pytest.approx(1.5)
    p, r, f1 = tagpred.avg_prf(truth, truth)
    assert (p, r, f1) == (1.0, 1.0, 1.0)


def test_param_counts():
    assert tagpred.ffnn_param_count(30) == 649
    assert tagpred.lstm_param_count(300) == 20505
    assert tagpred.lstm_param_count(6259) == 401881


def test_pipeline_train_predict(taxonomy, corpus):
    train, test = tagpred.stratified_split(corpus, 0.9, 11)
    pipeline = tagpred.Pipeline.fit(
        train, test, taxonomy, "doc2vec", "ffnn",
        max_epochs="6", doc2vec_epochs="4", seed="11",
    )
    report = pipeline.evaluate(test)
    assert report["n_trainable_params"] == 649
    assert 0.0 <= report["weighted_hamming_score"] <= 1.0
    tags = pipeline.predict_tags("shortest path between nodes")
    assert isinstance(tags, list)
    for t in tags:
        assert t in taxonomy.final_tags


def test_pipeline_save_load(tmp_path, taxonomy, corpus):
    train, test = tagpred.stratified_split(corpus, 0.9, 3)
    pipeline = tagpred.Pipeline.fit(train, None, taxonomy, "tfidf", "tree", seed="3")
    path = str(tmp_path / "model.bin")
    pipeline.save(path)
    again = tagpred.Pipeline.load(path)
    assert again.predict(test) == pipeline.predict(test)
