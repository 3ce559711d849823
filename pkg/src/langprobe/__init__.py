"""Multilingual PoS tagging with trainable language embeddings.

A float64 autodiff core drives a character-only bi-LSTM tagger whose
per-language embedding vectors are trained alongside the model; transfer
grids compare mono- and bilingual training across languages, and a
logistic-regression probe tracks which typological features those
embedding vectors encode as they are fine-tuned.
"""

from .autodiff import Tensor, ShapeMismatchError, backward, softmax_cross_entropy
from .data import (
    CharVocab,
    Corpus,
    FormatError,
    LanguageEmbeddingTable,
    Sentence,
    Token,
    WalsFeatureTable,
    build_char_vocab,
    downsample,
    filter_feature,
    load_embeddings,
    load_wals,
    parse_conllu,
    save_embeddings,
)
from .layers import LstmParams, bilstm_layer, init_lstm_params, lstm_cell_step
from .optim import AdamState, adam_step, init_adam
from .probe import (
    PatternRule,
    ProbeDataset,
    classify_pattern,
    cv_probe,
    majority_baseline,
    predict_heldout,
    probe_trajectory,
    train_logreg,
)
from .tagger import (
    TaggerConfig,
    TaggerModel,
    TrainLog,
    evaluate,
    init_language_rows,
    load_checkpoint,
    save_checkpoint,
    tag_sentence,
    train,
    word_representation,
)
from .transfer import (
    RunSpec,
    TransferResult,
    average_over_seeds,
    run_bilingual_grid,
    run_monolingual_grid,
    significance_test,
)

__version__ = "0.1.0"
