"""Character-based bi-LSTM tagger with trainable per-language embeddings.

A word is encoded purely from its characters (final states of a character
bi-LSTM); the language's embedding vector is concatenated to that encoding,
never added, and is updated by the optimizer like any other parameter.  A
two-layer word-level bi-LSTM feeds a softmax tag classifier.  Training is
one Adam update per sentence with early stopping on macro dev accuracy,
and the language-embedding table is snapshotted after every epoch (epoch 0
being the initialization).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import (
    ShapeMismatchError,
    Tensor,
    add,
    backward,
    concat,
    glorot_uniform,
    matvec,
    parameter,
    row,
    softmax_cross_entropy,
    zero_grads,
)
from .data import CharVocab, Corpus, LanguageEmbeddingTable, Sentence
from .layers import LstmParams, bilstm_final, bilstm_layer, init_lstm_params
from .optim import adam_step, init_adam

__all__ = [
    "TaggerConfig",
    "TaggerModel",
    "TrainLog",
    "EarlyStopper",
    "UnknownLanguageError",
    "init_language_rows",
    "word_representation",
    "tag_sentence",
    "sentence_loss",
    "train",
    "evaluate",
    "sentence_accuracies",
    "snapshot_language_table",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_FORMAT = "langprobe-tagger"
CHECKPOINT_VERSION = 1


class UnknownLanguageError(KeyError):
    """A language code has no embedding row but one is required."""


@dataclass
class TaggerConfig:
    char_emb_dim: int = 100
    char_lstm_hidden: int = 100
    word_lstm_hidden: int = 100
    word_lstm_layers: int = 2
    lang_emb_dim: int = 64
    max_epochs: int = 10
    early_stop_patience: int = 2
    seed: int = 0
    use_lang_emb: bool = True
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        for name in ("char_emb_dim", "char_lstm_hidden", "word_lstm_hidden", "word_lstm_layers", "lang_emb_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")


@dataclass
class TrainLog:
    """Per-epoch dev accuracies plus the language-table snapshot series."""

    dev_accuracy: list[dict[str, float]] = field(default_factory=list)
    macro_dev_accuracy: list[float] = field(default_factory=list)
    snapshots: list[LanguageEmbeddingTable] = field(default_factory=list)
    best_epoch: int = 0


@dataclass
class EarlyStopper:
    """Stop after ``patience`` consecutive epochs without strict improvement."""

    patience: int
    best: float = -np.inf
    best_epoch: int = 0
    stale: int = 0

    def update(self, epoch: int, accuracy: float) -> bool:
        """Record an epoch's accuracy; True means training should stop now."""
        if accuracy > self.best:
            self.best = accuracy
            self.best_epoch = epoch
            self.stale = 0
            return False
        self.stale += 1
        return self.stale >= self.patience

    @property
    def improved(self) -> bool:
        return self.stale == 0


class TaggerModel:
    """All trainable state: char embeddings, LSTM stacks, output layer, language rows."""

    def __init__(self, tags: list[str], vocab: CharVocab, config: TaggerConfig):
        if not tags:
            raise ValueError("tag inventory must be non-empty")
        self.config = config
        self.tags = list(tags)
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.vocab = vocab
        rng = np.random.default_rng(config.seed)
        self.char_emb = parameter(
            glorot_uniform(rng, vocab.size, config.char_emb_dim), name="char_emb"
        )
        self.char_fwd = init_lstm_params(config.char_emb_dim, config.char_lstm_hidden, rng, "char_fwd")
        self.char_bwd = init_lstm_params(config.char_emb_dim, config.char_lstm_hidden, rng, "char_bwd")
        word_input = 2 * config.char_lstm_hidden + (config.lang_emb_dim if config.use_lang_emb else 0)
        self.word_layers: list[tuple[LstmParams, LstmParams]] = []
        for layer in range(config.word_lstm_layers):
            in_dim = word_input if layer == 0 else 2 * config.word_lstm_hidden
            fwd = init_lstm_params(in_dim, config.word_lstm_hidden, rng, f"word{layer}_fwd")
            bwd = init_lstm_params(in_dim, config.word_lstm_hidden, rng, f"word{layer}_bwd")
            self.word_layers.append((fwd, bwd))
        self.out_w = parameter(
            glorot_uniform(rng, len(self.tags), 2 * config.word_lstm_hidden), name="out_w"
        )
        self.out_b = parameter(np.zeros(len(self.tags)), name="out_b")
        self.lang_emb: dict[str, Tensor] = {}

    def languages(self) -> list[str]:
        return sorted(self.lang_emb)

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = [("char_emb", self.char_emb)]
        for prefix, p in (("char_fwd", self.char_fwd), ("char_bwd", self.char_bwd)):
            named.extend((f"{prefix}.{n}", t) for n, t in p.named_tensors())
        for layer, (fwd, bwd) in enumerate(self.word_layers):
            named.extend((f"word{layer}_fwd.{n}", t) for n, t in fwd.named_tensors())
            named.extend((f"word{layer}_bwd.{n}", t) for n, t in bwd.named_tensors())
        named.append(("out_w", self.out_w))
        named.append(("out_b", self.out_b))
        for code in self.languages():
            named.append((f"lang_emb/{code}", self.lang_emb[code]))
        return named

    def parameters(self) -> list[Tensor]:
        return [t for _, t in self.named_parameters()]


def init_language_rows(
    model: TaggerModel, pretrained: LanguageEmbeddingTable | None, langs, seed: int
) -> TaggerModel:
    """Copy pretrained vectors where available; seed random rows elsewhere."""
    dim = model.config.lang_emb_dim
    rng = np.random.default_rng(seed)
    for code in sorted(set(langs)):
        if pretrained is not None and code in pretrained:
            vec = pretrained.vectors[code]
            if vec.shape[0] != dim:
                raise ShapeMismatchError(
                    f"lang_emb/{code}", f"pretrained dimension {vec.shape[0]} != configured {dim}"
                )
            model.lang_emb[code] = parameter(vec.copy(), name=f"lang_emb/{code}")
        else:
            model.lang_emb[code] = parameter(rng.normal(0.0, 0.1, size=dim), name=f"lang_emb/{code}")
    return model


def word_representation(model: TaggerModel, form: str, lang: str) -> Tensor:
    """Char bi-LSTM final states, plus the language vector when enabled."""
    cfg = model.config
    if cfg.use_lang_emb and lang not in model.lang_emb:
        raise UnknownLanguageError(f"no embedding row for language {lang!r}")
    chars = [row(model.char_emb, model.vocab.lookup(ch)) for ch in form]
    rep = bilstm_final(chars, model.char_fwd, model.char_bwd)
    if cfg.use_lang_emb:
        rep = concat([rep, model.lang_emb[lang]])
    return rep


def _token_states(model: TaggerModel, sentence: Sentence, lang: str) -> list[Tensor]:
    states = [word_representation(model, tok.form, lang) for tok in sentence.tokens]
    for fwd, bwd in model.word_layers:
        states = bilstm_layer(states, fwd, bwd)
    return states


def _token_logits(model: TaggerModel, sentence: Sentence, lang: str) -> list[Tensor]:
    return [add(matvec(model.out_w, h), model.out_b) for h in _token_states(model, sentence, lang)]


def tag_sentence(model: TaggerModel, sentence: Sentence, lang: str) -> list[str]:
    """Per-token argmax tags; ties break toward the lowest tag index."""
    if len(sentence.tokens) == 0:
        raise ValueError("tag_sentence: empty sentence")
    return [model.tags[int(np.argmax(lg.data))] for lg in _token_logits(model, sentence, lang)]


def sentence_loss(model: TaggerModel, sentence: Sentence, lang: str) -> Tensor:
    """Sum of per-token cross-entropies against the gold tags."""
    if len(sentence.tokens) == 0:
        raise ValueError("sentence_loss: empty sentence")
    logits = _token_logits(model, sentence, lang)
    total = None
    for tok, lg in zip(sentence.tokens, logits):
        if tok.upos not in model.tag_index:
            raise ValueError(f"tag {tok.upos!r} not in the model's tag inventory")
        term = softmax_cross_entropy(lg, model.tag_index[tok.upos])
        total = term if total is None else add(total, term)
    return total


def evaluate(model: TaggerModel, corpus: Corpus) -> float:
    """Token-level accuracy: correct tags / total tokens."""
    if len(corpus.sentences) == 0:
        raise ValueError("evaluate: empty corpus")
    correct = 0
    total = 0
    for sentence in corpus.sentences:
        predicted = tag_sentence(model, sentence, corpus.language)
        for tok, tag in zip(sentence.tokens, predicted):
            correct += int(tok.upos == tag)
            total += 1
    return correct / total


def sentence_accuracies(model: TaggerModel, corpus: Corpus) -> list[float]:
    """Per-sentence token accuracy, in corpus order (significance-test input)."""
    if len(corpus.sentences) == 0:
        raise ValueError("sentence_accuracies: empty corpus")
    scores = []
    for sentence in corpus.sentences:
        predicted = tag_sentence(model, sentence, corpus.language)
        hits = sum(int(tok.upos == tag) for tok, tag in zip(sentence.tokens, predicted))
        scores.append(hits / len(sentence.tokens))
    return scores


def snapshot_language_table(model: TaggerModel, epoch: int) -> LanguageEmbeddingTable:
    return LanguageEmbeddingTable(
        epoch=epoch, vectors={code: t.data.copy() for code, t in model.lang_emb.items()}
    )


def _copy_params(params: list[Tensor]) -> list[np.ndarray]:
    return [p.data.copy() for p in params]


def _restore_params(params: list[Tensor], saved: list[np.ndarray]) -> None:
    for p, data in zip(params, saved):
        p.data = data.copy()


def train(
    model: TaggerModel,
    train_corpora: list[Corpus],
    dev_corpora: list[Corpus],
    cfg: TaggerConfig | None = None,
) -> tuple[TaggerModel, TrainLog]:
    """Shuffled per-sentence Adam updates with early stopping on macro dev accuracy.

    All training corpora are concatenated and reshuffled each epoch, so
    sentences from different languages interleave.  After every epoch the
    language table is snapshotted and macro (mean-over-languages) dev
    accuracy is computed; training stops once it has failed to improve for
    ``early_stop_patience`` consecutive epochs or at ``max_epochs``.  The
    returned model carries the best-dev-epoch parameters.
    """
    cfg = cfg or model.config
    if not train_corpora or all(len(c) == 0 for c in train_corpora):
        raise ValueError("train: empty training set")
    if not dev_corpora:
        raise ValueError("train: dev corpora are required for early stopping")
    for corpus in train_corpora:
        if cfg.use_lang_emb and corpus.language not in model.lang_emb:
            raise UnknownLanguageError(f"no embedding row for language {corpus.language!r}")
        for sentence in corpus.sentences:
            for tok in sentence.tokens:
                if tok.upos not in model.tag_index:
                    raise ValueError(f"tag {tok.upos!r} not in the model's tag inventory")

    params = model.parameters()
    state = init_adam(params, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, epsilon=cfg.epsilon)
    rng = np.random.default_rng(cfg.seed)
    items = [(c.language, s) for c in train_corpora for s in c.sentences]

    log = TrainLog(snapshots=[snapshot_language_table(model, 0)])
    stopper = EarlyStopper(patience=cfg.early_stop_patience)
    best_saved = _copy_params(params)
    for epoch in range(1, cfg.max_epochs + 1):
        for idx in rng.permutation(len(items)):
            lang, sentence = items[idx]
            zero_grads(params)
            backward(sentence_loss(model, sentence, lang))
            adam_step(params, state)
        log.snapshots.append(snapshot_language_table(model, epoch))
        accs = {c.language: evaluate(model, c) for c in dev_corpora}
        macro = sum(accs.values()) / len(accs)
        log.dev_accuracy.append(accs)
        log.macro_dev_accuracy.append(macro)
        stop = stopper.update(epoch, macro)
        if stopper.improved:
            best_saved = _copy_params(params)
        if stop:
            break
    log.best_epoch = stopper.best_epoch
    _restore_params(params, best_saved)
    return model, log


def save_checkpoint(model: TaggerModel, path: str | Path) -> None:
    """Self-describing JSON checkpoint: config, vocab, tags and all parameters."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "tags": model.tags,
        "char_vocab": model.vocab.index,
        "languages": model.languages(),
        "params": {
            name: {"shape": list(t.data.shape), "values": t.data.reshape(-1).tolist()}
            for name, t in model.named_parameters()
        },
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_checkpoint(path: str | Path) -> TaggerModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a tagger checkpoint: {path}")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    config = TaggerConfig(**payload["config"])
    vocab = CharVocab(index={k: int(v) for k, v in payload["char_vocab"].items()})
    model = TaggerModel(payload["tags"], vocab, config)
    for code in payload["languages"]:
        model.lang_emb[code] = parameter(np.zeros(config.lang_emb_dim), name=f"lang_emb/{code}")
    stored = payload["params"]
    for name, tensor in model.named_parameters():
        entry = stored[name]
        tensor.data = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
    return model
