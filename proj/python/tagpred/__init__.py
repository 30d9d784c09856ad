"""Strategy-tag prediction for programming-challenge statements.

Thin wrapper over the C++ core; see the _core extension for the full surface.
"""

from tagpred._core import (
    DataError,
    Dataset,
    Doc2VecModel,
    EmbeddingMatrix,
    Pipeline,
    Problem,
    StatsReport,
    TaxonomyMap,
    TfidfModel,
    UsageError,
    Vocabulary,
    apply_taxonomy,
    avg_ones,
    avg_prf,
    clean_text,
    dataset_stats,
    default_stopwords,
    embed_sequence,
    encode_labels,
    ffnn_param_count,
    filter_rare_words,
    generate_synthetic,
    infer_doc,
    load_dataset,
    lstm_param_count,
    merge_fields,
    onehot_sequence,
    per_tag_word_stats,
    preprocess_dataset,
    remove_duplicates,
    run_benchmark,
    save_dataset,
    stratified_split,
    tag_correlation,
    tag_frequencies,
    train_doc2vec,
    train_word2vec,
    weighted_hamming_score,
)

__all__ = [
    "DataError",
    "Dataset",
    "Doc2VecModel",
    "EmbeddingMatrix",
    "Pipeline",
    "Problem",
    "StatsReport",
    "TaxonomyMap",
    "TfidfModel",
    "UsageError",
    "Vocabulary",
    "apply_taxonomy",
    "avg_ones",
    "avg_prf",
    "clean_text",
    "dataset_stats",
    "default_stopwords",
    "embed_sequence",
    "encode_labels",
    "ffnn_param_count",
    "filter_rare_words",
    "generate_synthetic",
    "infer_doc",
    "load_dataset",
    "lstm_param_count",
    "merge_fields",
    "onehot_sequence",
    "per_tag_word_stats",
    "preprocess_dataset",
    "remove_duplicates",
    "run_benchmark",
    "save_dataset",
    "stratified_split",
    "tag_correlation",
    "tag_frequencies",
    "train_doc2vec",
    "train_word2vec",
    "weighted_hamming_score",
]
